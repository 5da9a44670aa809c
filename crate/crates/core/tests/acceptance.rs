//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use threshold_contact::cli::cli_main;
use threshold_contact::dynamics::check_duality;
use threshold_contact::experiments::{
    density_plateau, growth_experiment, persistence_experiment, psi_ones_experiment,
    subcritical_experiment, PersistenceRecord,
};
use threshold_contact::psi::{default_params, is_robust_exact, is_robust_sufficient, PsiConfig, PsiParams, Shape};
use threshold_contact::seed::derive2;
use threshold_contact::theory::{binomial_lower_tail_bound, rho, simulate_branching, OffspringLaw};
use threshold_contact::{Digraph, ExperimentConfig, GraphConfig, NoiseField, State, Vertex};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, started: Instant, out: Outcome) -> bool {
    println!(
        "criterion {id:>2} {:<4} {name}: {} [{:.1}s]",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        started.elapsed().as_secs_f64()
    );
    out.pass
}

fn c1_duality() -> Outcome {
    let started = Instant::now();
    let (mut checks, mut agree) = (0u64, 0u64);
    for n in 4..=7usize {
        for r in (1..=3usize).filter(|&r| r < n) {
            for horizon in 1..=5u64 {
                for k in 0..200u64 {
                    let tag = (n * 10 + r) as u64 * 10 + horizon;
                    let g = Digraph::generate(GraphConfig::new(n, r, derive2(7, "acc-graph", tag, k)).unwrap()).unwrap();
                    let noise = NoiseField::new(0.6, derive2(7, "acc-noise", tag, k)).unwrap();
                    for x in 0..n as Vertex {
                        for y in 0..n as Vertex {
                            checks += 1;
                            agree += u64::from(check_duality(
                                &g,
                                &noise,
                                &State::singleton(n, x),
                                &State::singleton(n, y),
                                horizon,
                            ));
                        }
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Outcome {
        pass: agree == checks && secs < 60.0,
        detail: format!("{agree}/{checks} pairs agree in {secs:.1}s"),
    }
}

fn c2_rho() -> Outcome {
    let r1 = rho(OffspringLaw::new(0.75, 2).unwrap(), 1e-13);
    // smallest root of 0.6 s^2 + 0.6 s - 0.4 = 0 after factoring out (s - 1)
    let s = (-0.6 + (0.36f64 + 4.0 * 0.6 * 0.4).sqrt()) / 1.2;
    let r2 = rho(OffspringLaw::new(0.6, 3).unwrap(), 1e-13);
    let law = OffspringLaw::new(0.75, 2).unwrap();
    let sample = simulate_branching(law, 30, 100_000, 2024).unwrap();
    // exact survival to generation 30 by pgf iteration
    let mut ext = 0.0f64;
    for _ in 0..30 {
        ext = 0.25 + 0.75 * ext * ext;
    }
    let bias = (1.0 - ext) - r1;
    let se = (r1 * (1.0 - r1) / 100_000.0).sqrt();
    let diff = sample.survival_frequency - r1;
    let ok1 = (r1 - 2.0 / 3.0).abs() <= 1e-10;
    let ok2 = (r2 - (1.0 - s)).abs() <= 1e-6;
    let ok3 = diff >= -3.0 * se && diff <= 3.0 * se + bias;
    Outcome {
        pass: ok1 && ok2 && ok3,
        detail: format!(
            "rho(0.75,2)={r1:.12} rho(0.6,3)={r2:.9} oracle={:.9} mc={:.5} (se {se:.5}, horizon bias {bias:.2e})",
            1.0 - s,
            sample.survival_frequency
        ),
    }
}

fn c3_plateau() -> Outcome {
    let started = Instant::now();
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n: 10_000,
        trials: 20,
        t_max: 500,
        burn_in: Some(50),
        seed: 11,
        ..Default::default()
    };
    let res = density_plateau(&cfg).unwrap();
    let target = 2.0 / 3.0;
    let secs = started.elapsed().as_secs_f64();
    Outcome {
        pass: (res.mean_density - target).abs() <= 0.03 && res.died_early == 0 && secs < 300.0,
        detail: format!(
            "window [{},{}] mean density {:.5}, died early {}",
            res.window.0, res.window.1, res.mean_density, res.died_early
        ),
    }
}

fn c4_persistence() -> Outcome {
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n_grid: vec![5, 10, 15, 20, 25],
        trials: 200,
        t_max: 1_000_000,
        seed: 4,
        ..Default::default()
    };
    let recs = persistence_experiment(&cfg).unwrap();
    let medians: Vec<Option<f64>> = cfg
        .n_grid
        .iter()
        .map(|&n| PersistenceRecord::median_extinction(&recs, n))
        .collect();
    let increasing = medians.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => b > a,
        (Some(_), None) => true,
        _ => false,
    });
    let ratio = match (medians[4], medians[1]) {
        (Some(a), Some(b)) => a / b,
        (None, Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    };
    let shown: Vec<String> = medians
        .iter()
        .map(|m| m.map_or(format!(">={}", cfg.t_max), |v| v.to_string()))
        .collect();
    Outcome {
        pass: increasing && ratio >= 5.0,
        detail: format!("medians [{}], ratio 25/10 = {ratio:.1}", shown.join(", ")),
    }
}

fn c5_subcritical() -> Outcome {
    let cfg = ExperimentConfig {
        q: 0.4,
        r: 2,
        n: 10_000,
        trials: 100,
        t_max: 200,
        seed: 5,
        ..Default::default()
    };
    let res = subcritical_experiment(&cfg).unwrap();
    let median = res.medians[0].1;
    Outcome {
        pass: res.all_extinct && median.is_some_and(|m| (25.0..=90.0).contains(&m)),
        detail: format!("all extinct by 200: {}, median {:?}", res.all_extinct, median),
    }
}

/// Every configuration on one tree of depth `g <= 2` with `r = 2`.
fn tree_configs(g: usize) -> Vec<Vec<bool>> {
    // per tree: root, 2 level-1 nodes, 4 level-2 nodes
    let mut out = Vec::new();
    let level1 = if g >= 1 { 2 } else { 0 };
    for l1 in 0..(1u32 << level1) {
        let mut children_free = Vec::new();
        for k in 0..level1 {
            if l1 >> k & 1 == 0 {
                children_free.push(k);
            }
        }
        let free_slots = if g >= 2 { children_free.len() * 2 } else { 0 };
        for l2 in 0..(1u32 << free_slots) {
            let mut bits = vec![false; 1 + level1 + if g >= 2 { 4 } else { 0 }];
            for k in 0..level1 {
                bits[1 + k] = l1 >> k & 1 == 1;
            }
            if g >= 2 {
                for (i, &k) in children_free.iter().enumerate() {
                    for c in 0..2 {
                        bits[1 + level1 + 2 * k + c] = l2 >> (2 * i + c) & 1 == 1;
                    }
                }
            }
            out.push(bits);
        }
    }
    out
}

/// Lays per-tree configurations out in forest order.
fn forest_bits(shape: &Shape, trees: &[&Vec<bool>]) -> Vec<bool> {
    let mut bits = vec![false; shape.len()];
    for (t, tree) in trees.iter().enumerate() {
        bits[t] = tree[0];
        let mut offset = 1;
        for level in 1..=shape.g {
            let width = shape.r.pow(level as u32);
            for k in 0..width {
                bits[shape.level_start(level) + t * width + k] = tree[offset + k];
            }
            offset += width;
        }
    }
    bits
}

fn c6_soundness() -> Outcome {
    let base = default_params(0.75, 2).unwrap();
    let (mut cases, mut sufficient, mut violations) = (0usize, 0usize, 0usize);
    for g in 1..=2usize {
        let per_tree = tree_configs(g);
        for m in 1..=3usize {
            let shape = Shape::new(m, 2, g).unwrap();
            let params = PsiParams { g, ..base };
            let total = per_tree.len().pow(m as u32);
            for code in 0..total {
                let mut c = code;
                let trees: Vec<&Vec<bool>> = (0..m)
                    .map(|_| {
                        let t = &per_tree[c % per_tree.len()];
                        c /= per_tree.len();
                        t
                    })
                    .collect();
                let psi = PsiConfig::from_bits(shape, &forest_bits(&shape, &trees)).unwrap();
                cases += 1;
                if is_robust_sufficient(&psi, &params) {
                    sufficient += 1;
                    if !is_robust_exact(&psi, &params, 24).unwrap().is_robust() {
                        violations += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: violations == 0 && sufficient > 0,
        detail: format!("{cases} configurations, {sufficient} pass the sufficient check, {violations} of those not robust"),
    }
}

fn c7_psi_bound() -> Outcome {
    let cfg = ExperimentConfig {
        n: 100_000,
        m: 10,
        r: 2,
        g: Some(3),
        trials: 10_000,
        seed: 7,
        ..Default::default()
    };
    let res = psi_ones_experiment(&cfg).unwrap();
    let singles = res
        .positions
        .iter()
        .filter(|p| p.frequency > res.bound + 3.0 * p.se)
        .count();
    let pairs = res
        .pairs
        .iter()
        .filter(|p| p.frequency > res.bound * res.bound + 3.0 * p.se)
        .count();
    let worst = res.positions.iter().map(|p| p.frequency).fold(0.0, f64::max);
    Outcome {
        pass: singles == 0 && pairs == 0 && res.positions.len() == 20,
        detail: format!(
            "bound {:.6}, max marginal {worst:.6}, {singles}/20 positions and {pairs}/{} pairs above bound + 3 se",
            res.bound,
            res.pairs.len()
        ),
    }
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

fn c8_chernoff() -> Outcome {
    let ps = [(3, 10), (1, 2), (3, 4)];
    let xs = [(1, 2), (7, 10), (9, 10)];
    let (mut cases, mut bad) = (0, 0);
    for k in [5u64, 10, 20, 30] {
        for &(pn, pd) in &ps {
            let p = BigRational::new(BigInt::from(pn), BigInt::from(pd));
            let one_minus = BigRational::one() - &p;
            for &(xn, xd) in &xs {
                let x = BigRational::new(BigInt::from(xn), BigInt::from(xd));
                let cut = &x * BigRational::from_integer(BigInt::from(k)) * &p;
                let mut cdf = BigRational::zero();
                let mut binom = BigInt::one();
                for j in 0..=k {
                    if BigRational::from_integer(BigInt::from(j)) >= cut {
                        break;
                    }
                    let term = BigRational::from_integer(binom.clone())
                        * num_traits::pow(p.clone(), j as usize)
                        * num_traits::pow(one_minus.clone(), (k - j) as usize);
                    cdf += term;
                    binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
                }
                let bound = binomial_lower_tail_bound(k, pn as f64 / pd as f64, xn as f64 / xd as f64).unwrap();
                cases += 1;
                if cdf > rational(bound) {
                    bad += 1;
                }
            }
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{}/{cases} triples satisfy exact CDF <= bound", cases - bad),
    }
}

fn c9_growth() -> Outcome {
    let cfg = ExperimentConfig {
        q: 0.75,
        r: 2,
        n: 100_000,
        m_grid: vec![20, 40, 80],
        trials: 2000,
        q_tilde: Some(0.745),
        delta: Some(0.02),
        g: Some(3),
        seed: 9,
        ..Default::default()
    };
    let res = growth_experiment(&cfg).unwrap();
    let enough = res.rows.iter().all(|r| r.accepted >= 2000);
    let freqs: Vec<f64> = res.rows.iter().map(|r| r.failure_frequency).collect();
    let decreasing = freqs.windows(2).all(|w| w[1] < w[0]);
    let violations: usize = res.rows.iter().map(|r| r.inequality_violations).sum();
    let shown: Vec<String> = res
        .rows
        .iter()
        .map(|r| format!("m={}: {}/{}", r.m, r.failures, r.accepted))
        .collect();
    Outcome {
        pass: enough && decreasing && violations == 0,
        detail: format!(
            "failures {} (strictly decreasing: {decreasing}); inequality violations {violations}",
            shown.join(", ")
        ),
    }
}

fn run_cli(args: &[&str], out: &Path) -> i32 {
    let mut full = vec!["tcsim".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(out.display().to_string());
    cli_main(full)
}

fn same_outputs(a: &Path, b: &Path) -> bool {
    let names = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    let (na, nb) = (names(a), names(b));
    na == nb
        && na
            .iter()
            .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap())
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let invocations: [&[&str]; 8] = [
        &["gen-graph", "--n", "50", "--r", "3", "--seed", "5"],
        &["run", "--n", "200", "--T", "40", "--snapshots"],
        &["dual", "--n", "200", "--T", "20", "--root", "3", "--anchored"],
        &["psi", "--n", "1000", "--m", "5", "--g", "3", "--q-tilde", "0.745", "--delta", "0.02"],
        &["experiment", "persistence", "--n-grid", "5,8", "--trials", "10", "--t-max", "10000", "--jsonl"],
        &["experiment", "growth", "--n", "5000", "--m-grid", "5,10", "--trials", "50", "--q-tilde", "0.745", "--delta", "0.02", "--g", "3"],
        &["experiment", "ladder", "--n", "2000", "--roots", "20", "--g", "3", "--q-tilde", "0.745", "--delta", "0.02", "--i-cap", "20"],
        &["experiment", "psi-ones", "--n", "5000", "--m", "5", "--g", "3", "--trials", "200"],
    ];
    let (mut ok, mut total) = (0, 0);
    for (i, args) in invocations.iter().enumerate() {
        total += 1;
        let first = dir.path().join(format!("run{i}"));
        let second = dir.path().join(format!("again{i}"));
        let replay = dir.path().join(format!("replay{i}"));
        if run_cli(args, &first) != 0 || run_cli(args, &second) != 0 {
            continue;
        }
        let manifest = first.join("manifest.txt").display().to_string();
        let code = cli_main([
            "tcsim".to_string(),
            "replay".into(),
            "--manifest".into(),
            manifest,
            "--out".into(),
            replay.display().to_string(),
        ]);
        if code == 0 && same_outputs(&first, &second) && same_outputs(&first, &replay) {
            ok += 1;
        }
    }
    Outcome {
        pass: ok == total,
        detail: format!("{ok}/{total} invocations byte-identical on rerun and replay"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pathwise duality", c1_duality),
        ("survival probability", c2_rho),
        ("supercritical plateau", c3_plateau),
        ("persistence growth", c4_persistence),
        ("subcritical extinction", c5_subcritical),
        ("psi soundness sweep", c6_soundness),
        ("single-position psi bound", c7_psi_bound),
        ("binomial lower tail bound", c8_chernoff),
        ("growth signature", c9_growth),
        ("manifest determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        if !report(i + 1, name, started, f()) {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
