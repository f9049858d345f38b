//! Randomized verification of the spike-count closed form and the spike-rate
//! bounds of the twin construction.
//!
//! Every trial draws from its own ChaCha8 stream keyed by the trial index, so a
//! report depends only on `(seed, trials, bounds)` and not on thread count.

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::neuron::{simulate_if, spike_count_oracle, NeuronParams, Schedule, SpikeMatrix};
use crate::rational::{int, to_f64, Rational};
use crate::twin::{check_equivalence, spike_rate_bounds, Scenario, TwinSpec};

/// Largest common denominator used when splitting `θ` into weights.
const WEIGHT_LATTICE: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_inputs: usize,
    pub max_window: usize,
    /// `None` keeps `Σ w_j < θ`. `Some(r)` draws each weight independently
    /// from `[0, r·θ]`, which can break the premise.
    pub max_weight: Option<Rational>,
}

impl VerifyConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            max_inputs: 16,
            max_window: 32,
            max_weight: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.max_inputs == 0 || self.max_window == 0 {
            return Err(Error::Domain("max_inputs and max_window must be at least 1".into()));
        }
        if let Some(r) = &self.max_weight {
            if !r.is_positive() {
                return Err(Error::Domain(format!("max weight ratio must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// One generated neuron with its input counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub params: NeuronParams,
    pub counts: Vec<usize>,
    pub window: usize,
    pub schedule: Schedule,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_threshold(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.random_range(1..=20i64).into(), rng.random_range(1..=8i64).into())
}

/// Non-negative integers `u_j` with `Σ u_j < d`.
fn split_below(rng: &mut impl Rng, n: usize, d: i64) -> Vec<i64> {
    let total = rng.random_range(0..d);
    let mut cuts: Vec<i64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts {
        parts.push(c - prev);
        prev = c;
    }
    parts.push(total - prev);
    parts
}

/// Draws an instance. Without `max_weight` the weights satisfy `Σ w_j < θ`,
/// so every step has `0 ≤ I(t) < θ` whatever the spike placement.
pub fn generate_instance(cfg: &VerifyConfig, trial: u64) -> Result<Instance> {
    let mut rng = rng_for(cfg.seed, trial);
    let n = rng.random_range(1..=cfg.max_inputs);
    let window = rng.random_range(1..=cfg.max_window);
    let theta = random_threshold(&mut rng);
    let d = rng.random_range(n as i64 + 1..=WEIGHT_LATTICE);
    let weights: Vec<Rational> = match &cfg.max_weight {
        None => split_below(&mut rng, n, d)
            .into_iter()
            .map(|u| &theta * Rational::new(u.into(), d.into()))
            .collect(),
        Some(r) => (0..n)
            .map(|_| &theta * r * Rational::new(rng.random_range(0..=d).into(), d.into()))
            .collect(),
    };
    let counts = (0..n).map(|_| rng.random_range(0..=window)).collect();
    let schedule = if trial.is_multiple_of(2) {
        Schedule::EvenSpaced
    } else {
        Schedule::SeededRandom(rng.random())
    };
    Ok(Instance {
        params: NeuronParams::new(weights, theta)?,
        counts,
        window,
        schedule,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub seed: u64,
    pub premise_ok: usize,
    pub premise_violated: usize,
    /// Simulated count differs from the closed form while the premise held.
    pub oracle_mismatches: usize,
    /// The twin activation level differs from the simulated count while the premise held.
    pub equivalence_mismatches: usize,
    /// Mismatches of either kind outside the premise. Reported only.
    pub mismatches_outside_premise: usize,
    /// Some `v(t)` left `[0, θ)` while the premise held.
    pub potential_violations: usize,
    /// `ε = v(T)/θ` left `[0, 1)` while the premise held.
    pub residual_violations: usize,
    /// `v(T) ≠ Σ w_j k_j − θ·n`. Checked on every trial.
    pub telescoping_failures: usize,
    pub max_abs_residual: f64,
    /// Largest `|n_sim − n_oracle|` over all trials.
    pub max_count_deviation: usize,
}

impl VerifyReport {
    pub fn premise_violation_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.premise_violated as f64 / self.trials as f64
        }
    }

    /// No mismatch or bound violation among premise-satisfying trials and no
    /// telescoping failure anywhere.
    pub fn passed(&self) -> bool {
        self.oracle_mismatches == 0
            && self.equivalence_mismatches == 0
            && self.potential_violations == 0
            && self.residual_violations == 0
            && self.telescoping_failures == 0
    }

    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.premise_ok += o.premise_ok;
        self.premise_violated += o.premise_violated;
        self.oracle_mismatches += o.oracle_mismatches;
        self.equivalence_mismatches += o.equivalence_mismatches;
        self.mismatches_outside_premise += o.mismatches_outside_premise;
        self.potential_violations += o.potential_violations;
        self.residual_violations += o.residual_violations;
        self.telescoping_failures += o.telescoping_failures;
        self.max_abs_residual = self.max_abs_residual.max(o.max_abs_residual);
        self.max_count_deviation = self.max_count_deviation.max(o.max_count_deviation);
        self
    }
}

/// Simulates one instance and checks it against the closed form, the twin
/// activation and the potential bound.
pub fn check_instance(inst: &Instance) -> Result<VerifyReport> {
    let params = &inst.params;
    let theta = params.threshold();
    let inputs = SpikeMatrix::encode(&inst.counts, inst.window, inst.schedule)?;
    let trace = simulate_if(&inputs, params)?;
    let drive = params.weighted_drive(&inst.counts)?;
    let oracle = spike_count_oracle(&inst.counts, params)?;
    let window = u32::try_from(inst.window).map_err(|_| Error::Domain("window too large".into()))?;
    let equiv = check_equivalence(&inst.counts, params, &TwinSpec::new(window, theta.clone())?)?;
    let eps = trace.residual_eps(params);

    let mut r = VerifyReport {
        trials: 1,
        max_abs_residual: to_f64(&eps.abs()),
        max_count_deviation: trace.n.abs_diff(oracle),
        ..Default::default()
    };
    if trace.residual != &drive - theta * int(trace.n as i64) {
        r.telescoping_failures = 1;
    }
    let oracle_ok = trace.n == oracle;
    let equiv_ok = equiv.matched && equiv.premise_ok;
    if trace.premise_ok {
        r.premise_ok = 1;
        r.oracle_mismatches = usize::from(!oracle_ok);
        r.equivalence_mismatches = usize::from(!equiv.matched);
        r.potential_violations = usize::from(trace.potentials.iter().any(|v| v.is_negative() || v >= theta));
        r.residual_violations = usize::from(eps.is_negative() || eps >= Rational::from_integer(1.into()));
    } else {
        r.premise_violated = 1;
        r.mismatches_outside_premise = usize::from(!oracle_ok || !equiv_ok);
    }
    Ok(r)
}

pub fn run_verification(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let report = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| generate_instance(cfg, i).and_then(|inst| check_instance(&inst)))
        .try_reduce(VerifyReport::default, |a, b| Ok(a.merge(b)))?;
    Ok(VerifyReport {
        seed: cfg.seed,
        ..report
    })
}

/// Spikes per channel per timestep when each level `l_j` is rate-coded as
/// `l_j` spikes over `T` steps.
pub fn measured_spike_rate(levels: &[u32], window: u32) -> Result<Rational> {
    if levels.is_empty() {
        return Err(Error::Dimension("activation vector is empty".into()));
    }
    let counts: Vec<usize> = levels.iter().map(|&l| l as usize).collect();
    let inputs = SpikeMatrix::encode(&counts, window as usize, Schedule::EvenSpaced)?;
    Ok(Rational::new(
        (inputs.total_spikes() as i64).into(),
        (levels.len() as i64 * i64::from(window)).into(),
    ))
}

/// Fraction of zero levels.
pub fn sparsity_of(levels: &[u32]) -> Rational {
    let zeros = levels.iter().filter(|&&l| l == 0).count();
    Rational::new((zeros as i64).into(), (levels.len().max(1) as i64).into())
}

/// `n_zero` zeros followed by active levels at `1` (best) or `T` (worst).
/// Average has no single extremal vector and yields a domain error.
pub fn extremal_levels(n_src: usize, n_zero: usize, window: u32, scenario: Scenario) -> Result<Vec<u32>> {
    if n_zero > n_src {
        return Err(Error::Domain(format!("{n_zero} zeros exceed {n_src} inputs")));
    }
    let active = match scenario {
        Scenario::Best => 1,
        Scenario::Worst => window,
        Scenario::Average => {
            return Err(Error::Domain(
                "only best and worst have extremal activation vectors".into(),
            ))
        }
    };
    let mut v = vec![0; n_zero];
    v.resize(n_src, active);
    Ok(v)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RateBoundReport {
    pub trials: usize,
    pub violations: usize,
    /// Extremal vectors whose rate missed the bound they should attain.
    pub extremal_misses: usize,
    pub extremal_checked: usize,
}

impl RateBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.extremal_misses == 0
    }
}

/// Random activation vectors: `N ≤ 64`, `T ≤ 32`, a random number of zeros and
/// active levels uniform on `{1, …, T}`. Each vector's measured rate must lie
/// within the bounds for its own sparsity. Each trial also checks both
/// extremal vectors for the same `(N, zeros, T)`.
pub fn check_rate_bounds(trials: usize, seed: u64) -> Result<RateBoundReport> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let n = rng.random_range(1..=64usize);
            let window = rng.random_range(1..=32u32);
            let zeros = rng.random_range(0..=n);
            let mut levels: Vec<u32> = (0..n)
                .map(|j| if j < zeros { 0 } else { rng.random_range(1..=window) })
                .collect();
            for j in (1..n).rev() {
                levels.swap(j, rng.random_range(0..=j));
            }
            let gamma = sparsity_of(&levels);
            let (lo, hi) = spike_rate_bounds(&gamma, window)?;
            let s = measured_spike_rate(&levels, window)?;
            let mut r = RateBoundReport {
                trials: 1,
                violations: usize::from(s < lo || s > hi),
                ..Default::default()
            };
            for (scenario, bound) in [(Scenario::Best, &lo), (Scenario::Worst, &hi)] {
                let ext = extremal_levels(n, zeros, window, scenario)?;
                r.extremal_checked += 1;
                r.extremal_misses += usize::from(&measured_spike_rate(&ext, window)? != bound);
            }
            Ok(r)
        })
        .try_reduce(RateBoundReport::default, |a, b| {
            Ok(RateBoundReport {
                trials: a.trials + b.trials,
                violations: a.violations + b.violations,
                extremal_misses: a.extremal_misses + b.extremal_misses,
                extremal_checked: a.extremal_checked + b.extremal_checked,
            })
        })
}

/// `n_sim − n_oracle` for an instance, for use outside the premise.
pub fn count_deviation(inst: &Instance) -> Result<i64> {
    let inputs = SpikeMatrix::encode(&inst.counts, inst.window, inst.schedule)?;
    let trace = simulate_if(&inputs, &inst.params)?;
    let drive = inst.params.weighted_drive(&inst.counts)?;
    let oracle = (drive / inst.params.threshold())
        .floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Domain("closed-form count does not fit in i64".into()))?;
    Ok(trace.n as i64 - oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn premise_safe_generator_keeps_sum_below_threshold() {
        let cfg = VerifyConfig::new(200, 7);
        for i in 0..200 {
            let inst = generate_instance(&cfg, i).unwrap();
            let sum: Rational = inst.params.weights().iter().sum();
            assert!(&sum < inst.params.threshold());
            assert!(inst.params.weights().iter().all(|w| !w.is_negative()));
            assert!(inst.counts.iter().all(|&k| k <= inst.window));
        }
    }

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let cfg = VerifyConfig::new(300, 42);
        let a = run_verification(&cfg).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.premise_ok, 300);
        assert!(a.max_abs_residual < 1.0);
        assert_eq!(a, run_verification(&cfg).unwrap());
    }

    #[test]
    fn oversized_weights_are_reported_not_failed() {
        let cfg = VerifyConfig {
            max_weight: Some(int(2)),
            ..VerifyConfig::new(400, 3)
        };
        let r = run_verification(&cfg).unwrap();
        assert!(r.premise_violated > 0);
        assert_eq!(r.premise_ok + r.premise_violated, 400);
        assert!(r.mismatches_outside_premise > 0);
        assert!(r.max_count_deviation > 0);
        assert_eq!(r.telescoping_failures, 0);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_verification(&VerifyConfig::new(0, 1)).is_err());
    }

    #[test]
    fn measured_rate_examples() {
        assert_eq!(measured_spike_rate(&[0, 1, 4, 4], 4).unwrap(), ratio(9, 16));
        assert_eq!(sparsity_of(&[0, 1, 4, 4]), ratio(1, 4));
        let best = extremal_levels(4, 1, 4, Scenario::Best).unwrap();
        assert_eq!(measured_spike_rate(&best, 4).unwrap(), ratio(3, 16));
        let worst = extremal_levels(4, 1, 4, Scenario::Worst).unwrap();
        assert_eq!(measured_spike_rate(&worst, 4).unwrap(), ratio(3, 4));
        assert!(extremal_levels(4, 1, 4, Scenario::Average).is_err());
    }

    #[test]
    fn rate_bounds_hold() {
        let r = check_rate_bounds(200, 11).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.extremal_checked, 400);
    }

    #[test]
    fn deviation_under_strong_weight() {
        // w = 2θ, one spike: simulation caps at one spike per step.
        let inst = Instance {
            params: NeuronParams::new(vec![int(2)], int(1)).unwrap(),
            counts: vec![1],
            window: 1,
            schedule: Schedule::EvenSpaced,
        };
        assert_eq!(count_deviation(&inst).unwrap(), -1);
    }

    proptest! {
        #[test]
        fn split_stays_below(n in 1usize..17, d in 18i64..1000, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let parts = split_below(&mut rng, n, d);
            prop_assert_eq!(parts.len(), n);
            prop_assert!(parts.iter().all(|&p| p >= 0));
            prop_assert!(parts.iter().sum::<i64>() < d);
        }
    }
}
