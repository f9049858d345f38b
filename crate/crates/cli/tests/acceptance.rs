//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn_twin::analysis::{
    breakeven_spike_rate, default_models, landscape, sparse_dense_threshold, BreakevenOutcome, LANDSCAPE_N_SRC,
};
use snn_twin::energy::{
    builtin, builtins, compute_advantage, data_advantage, data_advantage_direct, default_mac_scale, product_mac_table,
    total_energy, HardwareProfile, SnnTransmission, TransmissionMode, WorkloadConfig, TABLE_MAX_BITS,
};
use snn_twin::neuron::NeuronParams;
use snn_twin::rational::{int, parse_decimal, ratio, to_f64};
use snn_twin::twin::{bits_for_window, check_equivalence, scenario_spike_rate, Scenario, TwinSpec};
use snn_twin::verify::{check_rate_bounds, run_verification, VerifyConfig};
use snn_twin::Rational;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

type Check = fn() -> Outcome;

const SEED: u64 = 0x5EED_2024;

fn spike_count_closed_form() -> Outcome {
    let start = Instant::now();
    let report = match run_verification(&VerifyConfig::new(10_000, SEED)) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let secs = start.elapsed().as_secs_f64();
    let pass = report.trials == 10_000
        && report.premise_ok == 10_000
        && report.oracle_mismatches == 0
        && report.telescoping_failures == 0
        && secs < 10.0;
    Outcome::new(
        pass,
        format!(
            "{} premise-satisfying trials, {} mismatches, {secs:.2} s (limit 10 s)",
            report.premise_ok, report.oracle_mismatches
        ),
    )
}

fn potential_bound() -> Outcome {
    let report = match run_verification(&VerifyConfig::new(10_000, SEED)) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let pass = report.potential_violations == 0 && report.residual_violations == 0 && report.max_abs_residual < 1.0;
    Outcome::new(
        pass,
        format!(
            "{} potential and {} residual violations, max eps {:.6}",
            report.potential_violations, report.residual_violations, report.max_abs_residual
        ),
    )
}

/// All `u` with `Σ u_j < d`, `u_j ≥ 0`, of length `n`.
fn lattice(n: usize, d: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in lattice(n - 1, d) {
        let used: i64 = rest.iter().sum();
        for u in 0..d - used {
            let mut v = rest.clone();
            v.push(u);
            out.push(v);
        }
    }
    out
}

fn all_counts(n: usize, window: usize) -> Vec<Vec<usize>> {
    (0..n).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|c| {
                (0..=window).map(move |k| {
                    let mut v = c.clone();
                    v.push(k);
                    v
                })
            })
            .collect()
    })
}

fn exhaustive_equivalence() -> Outcome {
    const D: i64 = 5;
    let (mut checked, mut mismatched, mut premise_broken) = (0usize, 0usize, 0usize);
    for theta in [int(1), ratio(7, 3)] {
        for n in 1..=3 {
            for u in lattice(n, D) {
                let weights: Vec<Rational> = u.iter().map(|&x| &theta * ratio(x, D)).collect();
                let params = match NeuronParams::new(weights, theta.clone()) {
                    Ok(p) => p,
                    Err(e) => return Outcome::error(e),
                };
                for window in 1..=8u32 {
                    let spec = TwinSpec::new(window, theta.clone()).expect("valid spec");
                    for counts in all_counts(n, window as usize) {
                        match check_equivalence(&counts, &params, &spec) {
                            Ok(r) => {
                                checked += 1;
                                mismatched += usize::from(!r.matched);
                                premise_broken += usize::from(!r.premise_ok);
                            }
                            Err(e) => return Outcome::error(e),
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        mismatched == 0 && premise_broken == 0 && checked > 0,
        format!("{checked} grid points (N<=3, T<=8, lattice 1/{D}, theta in {{1, 7/3}}), {mismatched} mismatches"),
    )
}

fn spike_rate_bounds() -> Outcome {
    match check_rate_bounds(1_000, SEED) {
        Ok(r) => Outcome::new(
            r.passed() && r.trials == 1_000 && r.extremal_checked == 2_000,
            format!(
                "{} vectors, {} outside bounds, {}/{} extremal vectors off their bound",
                r.trials, r.violations, r.extremal_misses, r.extremal_checked
            ),
        ),
        Err(e) => Outcome::error(e),
    }
}

fn data_predicates_match_direct() -> Outcome {
    let mut checked = 0usize;
    let mut disagreements = Vec::new();
    for hw in builtins() {
        for window in 1..=64u32 {
            for g in 0..=20 {
                let gamma = ratio(g, 20);
                let cfg = WorkloadConfig::new(LANDSCAPE_N_SRC, window, int(0), gamma, 8).expect("valid workload");
                for scenario in Scenario::ALL {
                    for mode in [TransmissionMode::Sparse, TransmissionMode::Dense] {
                        let pred = data_advantage(&cfg, &hw, scenario, mode);
                        let direct = data_advantage_direct(&cfg, &hw, scenario, mode);
                        match (pred, direct) {
                            (Ok(p), Ok(d)) => {
                                checked += 1;
                                if p.holds != d {
                                    disagreements.push(format!("{} T={window} g={g}/20 {scenario} {mode}", hw.name));
                                }
                            }
                            (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        disagreements.is_empty() && checked == 3 * 64 * 21 * 3 * 2,
        format!(
            "{checked} comparisons, {} disagreements{}",
            disagreements.len(),
            disagreements
                .first()
                .map(|d| format!(" (first: {d})"))
                .unwrap_or_default()
        ),
    )
}

fn with_mac_ratio(base: &HardwareProfile, activation_bits: u32, weight_bits: u32, k: &Rational) -> HardwareProfile {
    let mut hw = base.clone();
    hw.e_mac.insert((activation_bits, weight_bits), &hw.e_acc * k);
    hw
}

fn compute_thresholds() -> Outcome {
    let base = builtin("typical-neuromorphic").expect("preset");
    let delta = ratio(1, 1000);
    let mut checked = 0usize;
    let mut wrong = Vec::new();
    for window in 1..=32u32 {
        let t = int(window.into());
        let bits = bits_for_window(window).expect("window");
        for gamma in [int(0), ratio(1, 2), ratio(4, 5), ratio(19, 20)] {
            for (scenario, k_star) in [
                (Scenario::Best, int(1)),
                (Scenario::Average, (int(1) + &t) / int(2)),
                (Scenario::Worst, t.clone()),
            ] {
                let rate = scenario_spike_rate(&gamma, window, scenario).expect("rate");
                let cfg = WorkloadConfig::new(1_000_000, window, rate, gamma.clone(), 8).expect("workload");
                for (k, expect) in [
                    (&k_star - &delta, false),
                    (k_star.clone(), true),
                    (&k_star + &delta, true),
                ] {
                    let hw = with_mac_ratio(&base, bits, 8, &k);
                    match compute_advantage(&cfg, &hw, false) {
                        Ok(a) => {
                            checked += 1;
                            if a.holds != expect || !a.closed_form {
                                wrong.push(format!("T={window} gamma={gamma} {scenario} k={k}"));
                            }
                        }
                        Err(e) => return Outcome::error(e),
                    }
                }
            }
        }
    }
    Outcome::new(
        wrong.is_empty(),
        format!(
            "{checked} cases, flips at k = 1, (1+T)/2, T for T in 1..=32 with N_src = 10^6; {} wrong{}",
            wrong.len(),
            wrong.first().map(|w| format!(" (first: {w})")).unwrap_or_default()
        ),
    )
}

fn transmission_threshold() -> Outcome {
    let hw = builtin("typical-neuromorphic").expect("preset");
    let (s8, s4) = match (sparse_dense_threshold(&hw, 8), sparse_dense_threshold(&hw, 4)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
    };
    let closed = 0.43 / 3.18;
    let exact = parse_decimal("0.43/3.18").is_ok_and(|v| v == s8);
    let band = |s: &Rational| (0.12..=0.17).contains(&to_f64(s));
    let pass = exact && (to_f64(&s8) - closed).abs() <= 1e-6 && band(&s8) && band(&s4);
    Outcome::new(
        pass,
        format!(
            "8-bit s* = {} ({}), 4-bit s* = {:.6}, band [0.12, 0.17]",
            s8,
            to_f64(&s8),
            to_f64(&s4)
        ),
    )
}

fn landscape_reversal() -> Outcome {
    let e_acc = builtin("worst-sparse").expect("preset").e_acc;
    let additive: std::collections::BTreeMap<_, _> = (1..=TABLE_MAX_BITS)
        .flat_map(|a| (1..=TABLE_MAX_BITS).map(move |w| (a, w)))
        .map(|(a, w)| ((a, w), &e_acc * int(i64::from(a + w))))
        .collect();
    let mut tables = vec![("default".to_string(), product_mac_table(&e_acc, &default_mac_scale()))];
    for (num, den) in [(1, 16), (1, 8), (1, 2), (1, 1)] {
        tables.push((
            format!("product c={num}/{den}"),
            product_mac_table(&e_acc, &ratio(num, den)),
        ));
    }
    tables.push(("additive a+w".to_string(), additive));

    let mut notes = Vec::new();
    let mut pass = true;
    for (label, table) in &tables {
        let hws: Vec<HardwareProfile> = builtins()
            .into_iter()
            .map(|mut h| {
                h.e_mac = table.clone();
                h
            })
            .collect();
        let rows = match landscape(&default_models(), &hws, &Scenario::ALL, LANDSCAPE_N_SRC, 8) {
            Ok(r) => r,
            Err(e) => return Outcome::error(e),
        };
        let worst: Vec<_> = rows.iter().filter(|r| r.hw == "worst-sparse").collect();
        let feasible: Vec<_> = worst.iter().filter(|r| r.feasible()).collect();
        let min_ratio = feasible.iter().filter_map(|r| r.ratio()).fold(f64::INFINITY, f64::min);
        let reversed = feasible.iter().all(|r| r.ratio().is_some_and(|x| x > 1.0));
        let flagged = rows
            .iter()
            .filter(|r| r.model == "high-performance" && r.scenario == Some(Scenario::Best))
            .all(|r| !r.feasible() && r.infeasible.as_deref().is_some_and(|m| m.contains("s_r·T ≤ 1")));
        let others_feasible = rows
            .iter()
            .filter(|r| !(r.model == "high-performance" && r.scenario == Some(Scenario::Best)))
            .all(|r| r.feasible());
        pass &= worst.len() == 9 && feasible.len() == 8 && reversed && flagged && others_feasible;
        notes.push(format!("{label}: min {min_ratio:.3}"));
    }
    Outcome::new(
        pass,
        format!(
            "worst-sparse ratio > 1 in all 8 feasible cells, high-performance best flagged (s_r·T = 6.4); {}",
            notes.join(", ")
        ),
    )
}

fn breakeven_roots() -> Outcome {
    let hws = builtins();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let step = ratio(1, 1_000_000);
    let tol = 1e-9;
    let (mut roots, mut attempts, mut worst_rel) = (0usize, 0usize, 0f64);
    let mut failures = Vec::new();
    while roots < 500 && attempts < 100_000 {
        attempts += 1;
        let window = rng.random_range(1..=64u32);
        let gamma = ratio(rng.random_range(0..=99), 100);
        let hw = &hws[rng.random_range(0..hws.len())];
        let bits = rng.random_range(1..=TABLE_MAX_BITS);
        let n_src = [64u64, 1024, 4096, 65_536][rng.random_range(0..4)];
        let r = match breakeven_spike_rate(window, n_src, &gamma, bits, hw) {
            Ok(r) => r,
            Err(e) => return Outcome::error(e),
        };
        let Some(s) = r.s_star.filter(|_| r.outcome == BreakevenOutcome::Root) else {
            continue;
        };
        if s <= step || s >= int(1) - &step {
            continue;
        }
        roots += 1;
        let at = |rate: &Rational| {
            let cfg = WorkloadConfig::new(n_src, window, rate.clone(), gamma.clone(), bits).expect("workload");
            total_energy(&cfg, hw, SnnTransmission::Auto).expect("energy")
        };
        let mid = at(&s);
        let rel = to_f64(&((&mid.snn.total_pj - &mid.qnn.total_pj) / &mid.qnn.total_pj)).abs();
        worst_rel = worst_rel.max(rel);
        let below = at(&(&s - &step));
        let above = at(&(&s + &step));
        let sign_change = below.snn.total_pj < below.qnn.total_pj && above.snn.total_pj > above.qnn.total_pj;
        if rel > tol || !sign_change {
            failures.push(format!("T={window} gamma={gamma} hw={} bits={bits} N={n_src}", hw.name));
        }
    }
    Outcome::new(
        roots == 500 && failures.is_empty(),
        format!(
            "{roots} roots from {attempts} draws, max relative gap {worst_rel:.1e} (limit 1e-9), {} sign-change failures",
            failures.len()
        ),
    )
}

fn landscape_determinism() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome::error(e),
    };
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_snn-twin"))
            .args(["landscape", "--out"])
            .arg(&path)
            .output();
        match status {
            Ok(o) if o.status.success() => {}
            Ok(o) => return Outcome::error(String::from_utf8_lossy(&o.stderr).into_owned()),
            Err(e) => return Outcome::error(e),
        }
        match std::fs::read(&path) {
            Ok(b) => files.push(b),
            Err(e) => return Outcome::error(e),
        }
    }
    let lines = files[0].iter().filter(|&&b| b == b'\n').count();
    Outcome::new(
        files[0] == files[1] && lines == 28,
        format!(
            "two runs, {} bytes each, {} data rows, identical: {}",
            files[0].len(),
            lines - 1,
            files[0] == files[1]
        ),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("spike count equals floor(sum w k / theta)", spike_count_closed_form),
        ("membrane potential stays in [0, theta)", potential_bound),
        ("exhaustive SNN/QNN twin equivalence", exhaustive_equivalence),
        ("measured spike rate within (1-gamma)/T..1-gamma", spike_rate_bounds),
        (
            "data-advantage predicates match direct comparison",
            data_predicates_match_direct,
        ),
        ("compute advantage thresholds in k", compute_thresholds),
        ("sparse/dense transmission threshold", transmission_threshold),
        ("landscape reversal under worst-sparse hardware", landscape_reversal),
        ("breakeven roots and sign change", breakeven_roots),
        ("landscape CSV is byte-identical across runs", landscape_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        failed += usize::from(!out.pass);
        println!(
            "[{}] {:02} {name}: {} [{:.2} s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
