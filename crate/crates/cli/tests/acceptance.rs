//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use lapqbe_core::encoder::{build_1d, build_nd, build_prep_k};
use lapqbe_core::format::g17;
use lapqbe_core::lattice::{self, BoundaryCondition, GridAxisSpec, LaplacianSpec};
use lapqbe_core::resources::{estimate_1d, estimate_nd, lower_and_count};
use lapqbe_core::simulator::{
    extract_block, oracle_success_probability, run, success_probability, test_state, SimOptions, StateVector,
};
use lapqbe_core::{Circuit, Gate};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use BoundaryCondition::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spec(axes: &[(BoundaryCondition, usize, f64)]) -> LaplacianSpec {
    LaplacianSpec::new(axes.iter().map(|&(bc, n, h)| GridAxisSpec::new(n, h, bc).unwrap()).collect()).unwrap()
}

fn all_triples() -> Vec<[BoundaryCondition; 3]> {
    let mut out = Vec::new();
    for a in BoundaryCondition::ALL {
        for b in BoundaryCondition::ALL {
            for c in BoundaryCondition::ALL {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn all_pairs() -> Vec<[BoundaryCondition; 2]> {
    BoundaryCondition::ALL.iter().flat_map(|&a| BoundaryCondition::ALL.map(|b| [a, b])).collect()
}

fn mixed_specs() -> Vec<LaplacianSpec> {
    let mut specs: Vec<LaplacianSpec> =
        all_triples().iter().map(|t| spec(&[(t[0], 1, 1.0), (t[1], 1, 1.0), (t[2], 1, 1.0)])).collect();
    specs.extend(all_pairs().iter().map(|p| spec(&[(p[0], 2, 1.0), (p[1], 2, 0.5)])));
    specs
}

fn block_deviation(s: &LaplacianSpec) -> f64 {
    let block = extract_block(&build_nd(s).unwrap(), &SimOptions::default()).unwrap();
    block.max_deviation(&lattice::build_scaled_nd(s).unwrap()).unwrap().max_abs
}

fn exactness_sweep() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for bc in BoundaryCondition::ALL {
        for n in 1..=4 {
            let block = extract_block(&build_1d(bc, n).unwrap(), &SimOptions::default()).unwrap();
            let dev = block.max_deviation(&lattice::build_scaled_1d(bc, n).unwrap()).unwrap();
            worst = worst.max(dev.max_abs);
            cases += 1;
        }
    }
    check(
        worst <= 1e-10,
        format!("{cases} cases, max deviation {} ({:.2} s)", g17(worst), start.elapsed().as_secs_f64()),
    )
}

fn mixed_boundary_exactness() -> Verdict {
    let start = Instant::now();
    let specs = mixed_specs();
    let (worst, label) = specs
        .iter()
        .map(|s| (block_deviation(s), s.label()))
        .fold((0.0, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc });
    check(
        worst <= 1e-10,
        format!(
            "{} specs, max deviation {} {label} ({:.2} s)",
            specs.len(),
            g17(worst),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn boundary_columns() -> Verdict {
    let mut worst = 0.0f64;
    let mut compare = |got: Vec<f64>, nonzero: &[(usize, f64)]| {
        let mut want = vec![0.0; got.len()];
        for &(i, v) in nonzero {
            want[i] += v / 4.0;
        }
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    };
    for n in 1..=5 {
        let last = (1usize << n) - 1;
        let d = extract_block(&build_1d(Dirichlet, n).unwrap(), &SimOptions::default()).unwrap();
        compare(d.column(0), &[(0, -2.0), (1, 1.0)]);
        compare(d.column(last), &[(last - 1, 1.0), (last, -2.0)]);
        let nm = extract_block(&build_1d(Neumann, n).unwrap(), &SimOptions::default()).unwrap();
        compare(nm.column(0), &[(0, -1.0), (1, 1.0)]);
    }
    check(worst <= 1e-12, format!("n = 1..5, max deviation {}", g17(worst)))
}

/// Amplitudes implied by the two-qubit selector angles, index `k0 + 2·k1`.
fn angle_formula_amplitudes(w: &[f64; 4]) -> ([f64; 3], [f64; 4]) {
    let theta0 = 2.0 * (w[0] + w[2]).sqrt().acos();
    let theta1 = 2.0 * (w[0] / (w[0] + w[2])).sqrt().acos();
    let theta2 = 2.0 * (w[1] / (w[1] + w[3])).sqrt().acos();
    let (c0, s0) = ((theta0 / 2.0).cos(), (theta0 / 2.0).sin());
    let (c1, s1) = ((theta1 / 2.0).cos(), (theta1 / 2.0).sin());
    let (c2, s2) = ((theta2 / 2.0).cos(), (theta2 / 2.0).sin());
    ([theta0, theta1, theta2], [c0 * c1, s0 * c2, c0 * s1, s0 * s2])
}

fn circuit_angles(c: &Circuit) -> Vec<f64> {
    c.gates()
        .iter()
        .filter_map(|g| match g {
            Gate::Ry(_, t) => Some(*t),
            Gate::Controlled(op) => match op.target {
                lapqbe_core::circuit::Target::Ry(_, t) => Some(t),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

fn state_preparation() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut amp_err, mut formula_err, mut angle_err) = (0.0f64, 0.0f64, 0.0f64);
    for dims in 2..=4 {
        for _ in 0..20 {
            let raw: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let c = build_prep_k(&w).unwrap();
            let out = run(&c, StateVector::zero(c.num_qubits())).unwrap();
            let amps = out.amplitudes();

            let mut padded = [0.0; 4];
            padded[..dims].copy_from_slice(&w);
            let (angles, formula) = angle_formula_amplitudes(&padded);
            for i in 0..4 {
                let want = padded[i].sqrt();
                let got = amps.get(i).map_or(0.0, |a| a.re);
                let imag = amps.get(i).map_or(0.0, |a| a.im.abs());
                amp_err = amp_err.max((got - want).abs()).max(imag);
                formula_err = formula_err.max((formula[i] - want).abs());
            }
            let ours = circuit_angles(&c);
            let expected: &[f64] = if dims == 2 { &angles[..1] } else { &angles };
            if ours.len() != expected.len() {
                return Err(format!("D={dims}: {} rotations, expected {}", ours.len(), expected.len()));
            }
            for (a, b) in ours.iter().zip(expected) {
                angle_err = angle_err.max((a - b).abs());
            }
        }
    }
    let worst = amp_err.max(formula_err).max(angle_err);
    check(
        worst <= 1e-12,
        format!(
            "60 weight vectors, amplitude error {}, angle-formula amplitude error {}, angle error {}",
            g17(amp_err),
            g17(formula_err),
            g17(angle_err)
        ),
    )
}

fn success_probabilities() -> Verdict {
    let opts = SimOptions::default();
    let mut specs: Vec<LaplacianSpec> = Vec::new();
    for bc in BoundaryCondition::ALL {
        for n in 2..=6 {
            specs.push(LaplacianSpec::one_dim(bc, n, 1.0).unwrap());
        }
    }
    specs.extend(mixed_specs());
    let mut worst = 0.0f64;
    for s in &specs {
        let v = test_state(s).map_err(|e| format!("{}: {e}", s.label()))?;
        let p = success_probability(&build_nd(s).unwrap(), &v, &opts).unwrap();
        let oracle = oracle_success_probability(&lattice::build_scaled_nd(s).unwrap(), &v).unwrap();
        worst = worst.max((p - oracle).abs());
    }

    // One encoding serves every spacing: p = (h⁴/16)‖L_h v‖².
    let mut scaling = 0.0f64;
    for bc in BoundaryCondition::ALL {
        for n in 2..=6 {
            let s = LaplacianSpec::one_dim(bc, n, 1.0).unwrap();
            let v = test_state(&s).unwrap();
            let p = success_probability(&build_1d(bc, n).unwrap(), &v, &opts).unwrap();
            for h in [1.0, 0.3] {
                let physical = oracle_success_probability(&lattice::build_1d(bc, n, h).unwrap(), &v).unwrap();
                scaling = scaling.max((p - h.powi(4) / 16.0 * physical).abs());
            }
        }
    }
    check(
        worst <= 1e-10 && scaling <= 1e-10,
        format!("{} specs, max |p - oracle| {}, h-scaling residual {}", specs.len(), g17(worst), g17(scaling)),
    )
}

/// Least-squares slope and largest residual of `ys` against `xs`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    (slope, residual)
}

fn resource_formulas() -> Verdict {
    let ns: Vec<u64> = (2..=8).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut failures = Vec::new();
    let mut series: Vec<(String, u64, Vec<u64>)> = Vec::new();

    let lowered: Vec<_> = ns.iter().map(|&n| lower_and_count(&build_1d(Neumann, n as usize).unwrap().circuit)).collect();
    let mcx: Vec<u64> = lowered.iter().map(|r| r.entry("j1/comparators").map_or(0, |e| e.t)).collect();
    let shifts: Vec<u64> = lowered.iter().map(|r| r.entry("j1/shifts").map_or(0, |e| e.t)).collect();
    for (i, &n) in ns.iter().enumerate() {
        if mcx[i] != 56 * n + 28 {
            failures.push(format!("MCX term at n={n} is {}", mcx[i]));
        }
        if shifts[i] != 42 * n {
            failures.push(format!("shift term at n={n} is {}", shifts[i]));
        }
    }
    series.push(("mcx".into(), 56, mcx));
    series.push(("shift".into(), 42, shifts));

    for (bc, slope, intercept) in [(Neumann, 98, 28), (Dirichlet, 70, 14), (Periodic, 42, 0)] {
        let totals: Vec<u64> = ns.iter().map(|&n| estimate_1d(bc, n as usize).unwrap().t_count).collect();
        for (i, &n) in ns.iter().enumerate() {
            if totals[i] != slope * n + intercept {
                failures.push(format!("{bc} total at n={n} is {}", totals[i]));
            }
        }
        series.push((bc.name().into(), slope, totals));
    }

    for dims in [2usize, 4] {
        let d = lattice::ceil_log2(dims) as u64;
        let mut per_axis = Vec::new();
        for &n in &ns {
            let s = LaplacianSpec::new(vec![GridAxisSpec::new(n as usize, 1.0, Neumann).unwrap(); dims]).unwrap();
            let symbolic = estimate_nd(&s).unwrap();
            let lowered = lower_and_count(&build_nd(&s).unwrap().circuit);
            for r in 1..=dims {
                let label = format!("j{r}/comparators");
                let sym = symbolic.entry(&label).map_or(0, |e| e.t);
                let low = lowered.entry(&label).map_or(0, |e| e.t);
                if sym != 56 * n + 56 * d + 28 || low != sym {
                    failures.push(format!("D={dims} n={n} {label}: symbolic {sym}, lowered {low}"));
                }
            }
            per_axis.push(symbolic.entry("j1/comparators").map_or(0, |e| e.t));
        }
        series.push((format!("mcx-D{dims}"), 56, per_axis));
    }

    let mut fits = Vec::new();
    for (name, slope, ys) in &series {
        let ys: Vec<f64> = ys.iter().map(|&y| y as f64).collect();
        let (fitted, residual) = linear_fit(&xs, &ys);
        if fitted != *slope as f64 || residual != 0.0 {
            failures.push(format!("{name}: slope {} residual {}", g17(fitted), g17(residual)));
        }
        fits.push(format!("{name}={}", g17(fitted)));
    }
    if failures.is_empty() {
        Ok(format!("n = 2..8, slopes {} with zero residual", fits.join(" ")))
    } else {
        Err(failures.join("; "))
    }
}

fn unitary_error(c: &Circuit) -> f64 {
    let q = c.num_qubits();
    let dim = 1usize << q;
    let columns: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|i| {
            let out = run(c, StateVector::basis(q, i)).unwrap();
            out.amplitudes().iter().enumerate().filter(|(_, a)| a.norm() > 0.0).map(|(r, a)| (r, *a)).collect()
        })
        .collect();
    let mut dense = vec![Complex64::new(0.0, 0.0); dim];
    let mut worst = 0.0f64;
    for (i, col_i) in columns.iter().enumerate() {
        for &(r, a) in col_i {
            dense[r] = a;
        }
        for (j, col_j) in columns.iter().enumerate() {
            let dot: Complex64 = col_j.iter().map(|&(r, b)| dense[r].conj() * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).norm());
        }
        for &(r, _) in col_i {
            dense[r] = Complex64::new(0.0, 0.0);
        }
    }
    worst
}

fn small_encoders() -> Vec<LaplacianSpec> {
    let mut specs = Vec::new();
    for bc in BoundaryCondition::ALL {
        for n in 1..=6 {
            specs.push(LaplacianSpec::one_dim(bc, n, 1.0).unwrap());
        }
    }
    for p in all_pairs() {
        for (n1, n2) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)] {
            specs.push(spec(&[(p[0], n1, 1.0), (p[1], n2, 0.7)]));
        }
    }
    for t in all_triples() {
        specs.push(spec(&[(t[0], 1, 1.0), (t[1], 1, 0.5), (t[2], 1, 2.0)]));
    }
    specs.into_iter().filter(|s| build_nd(s).unwrap().circuit.num_qubits() <= 8).collect()
}

fn unitarity() -> Verdict {
    let specs = small_encoders();
    let worst = specs.iter().map(|s| unitary_error(&build_nd(s).unwrap().circuit)).fold(0.0, f64::max);

    let mut rng = StdRng::seed_from_u64(7);
    let mut inverse_err = 0.0f64;
    for i in 0..100 {
        let s = &specs[(i * 37) % specs.len()];
        let c = build_nd(s).unwrap().circuit;
        let raw: Vec<Complex64> = (0..1usize << c.num_qubits())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v = StateVector::from_amplitudes(raw.iter().map(|a| a / norm).collect()).unwrap();
        let back = run(&c.inverse(), run(&c, v.clone()).unwrap()).unwrap();
        for (a, b) in back.amplitudes().iter().zip(v.amplitudes()) {
            inverse_err = inverse_err.max((a - b).norm());
        }
    }
    check(
        worst <= 1e-10 && inverse_err <= 1e-12,
        format!(
            "{} circuits, max |U†U - I| {}, inverse residual on 100 states {}",
            specs.len(),
            g17(worst),
            g17(inverse_err)
        ),
    )
}

fn lapqbe(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lapqbe"))
        .args(args)
        .env_remove(lapqbe_cli::CAP_ENV)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("lapqbe {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs: [&[&str]; 3] = [
        &["--axis", "n=3,h=1.0,bc=neumann"],
        &["--axis", "n=1,bc=p", "--axis", "n=1,bc=d", "--axis", "n=1,bc=n"],
        &["--axis", "n=2,h=1.0,bc=n", "--axis", "n=2,h=0.5,bc=d"],
    ];
    let mut compared = 0;
    for (i, axes) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run_idx, jobs) in ["1", "1", "8", "8"].iter().enumerate() {
            let heatmap = dir.path().join(format!("h{i}-{run_idx}.csv"));
            let heatmap = heatmap.to_str().unwrap();
            let mut verify = vec!["verify", "--jobs", jobs, "--out", heatmap];
            verify.extend_from_slice(axes);
            let stdout = lapqbe(&verify)?;
            let csv = std::fs::read(heatmap).map_err(|e| e.to_string())?;
            let mut resources = vec!["resources", "--jobs", jobs];
            resources.extend_from_slice(axes);
            let json = lapqbe(&resources)?;
            resources.extend_from_slice(&["--format", "csv"]);
            let csv_report = lapqbe(&resources)?;
            outputs.push((stdout, csv, json, csv_report));
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            return Err(format!("outputs differ for config {}", axes.join(" ")));
        }
        compared += outputs.len();
    }
    Ok(format!("{compared} runs over 3 configs at jobs 1 and 8, byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exactness sweep", exactness_sweep),
        ("mixed-boundary exactness", mixed_boundary_exactness),
        ("boundary columns", boundary_columns),
        ("state preparation", state_preparation),
        ("success probability", success_probabilities),
        ("resource formulas", resource_formulas),
        ("unitarity", unitarity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(criterion).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
