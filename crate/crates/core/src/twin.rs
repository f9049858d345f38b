//! QNN twin of a rate-coded IF neuron.
//!
//! A `T`-step SNN is paired with a QNN whose activations take the `T + 1`
//! levels `{0, 1/T, ..., 1}` and so need `⌈log₂(T+1)⌉` bits. This module also
//! maps between the SNN spike rate `s_r` and the QNN sparsity `γ`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{simulate_if, NeuronParams, Schedule, SpikeMatrix};
use crate::rational::{int, Rational};

/// `⌈log₂(T+1)⌉`: bits needed for `T + 1` activation levels.
pub fn bits_for_window(window: u32) -> Result<u32> {
    if window < 1 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    Ok((u64::from(window) + 1).next_power_of_two().trailing_zeros())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinSpec {
    window: u32,
    theta: Rational,
}

impl TwinSpec {
    pub fn new(window: u32, theta: Rational) -> Result<Self> {
        if window < 1 {
            return Err(Error::Domain("window must be at least 1".into()));
        }
        if !theta.is_positive() {
            return Err(Error::Domain(format!("threshold must be positive, got {theta}")));
        }
        Ok(Self { window, theta })
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn activation_bits(&self) -> u32 {
        bits_for_window(self.window).expect("window validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamp {
    Low,
    High,
}

/// Output of the twin activation `h(z) = (1/T)·⌊zT/θ⌋`, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QnnActivation {
    /// Numerator `n` of `n/T`.
    pub level: u32,
    pub value: Rational,
    pub clamp: Option<Clamp>,
}

pub fn qnn_activation(z: &Rational, spec: &TwinSpec) -> QnnActivation {
    let window = spec.window();
    let raw = (z * int(window.into()) / spec.theta()).floor().to_integer();
    let (level, clamp) = if raw.is_negative() {
        (0, Some(Clamp::Low))
    } else if raw > BigInt::from(window) {
        (window, Some(Clamp::High))
    } else {
        (raw.to_u32().expect("level bounded by window"), None)
    };
    QnnActivation {
        level,
        value: Rational::new(level.into(), window.into()),
        clamp,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub n_snn: usize,
    pub n_qnn_level: u32,
    pub matched: bool,
    pub premise_ok: bool,
    /// `ε = v(T)/θ`.
    pub residual_eps: Rational,
    pub clamp: Option<Clamp>,
}

/// Simulates an even-spaced encoding of `counts` and compares the spike count
/// against `T·h(z)` with `z = Σ w_j k_j / T`.
pub fn check_equivalence(counts: &[usize], params: &NeuronParams, spec: &TwinSpec) -> Result<EquivalenceReport> {
    if params.threshold() != spec.theta() {
        return Err(Error::Domain(format!(
            "neuron threshold {} differs from twin threshold {}",
            params.threshold(),
            spec.theta()
        )));
    }
    let window = spec.window() as usize;
    let inputs = SpikeMatrix::encode(counts, window, Schedule::EvenSpaced)?;
    let trace = simulate_if(&inputs, params)?;
    let z = params.weighted_drive(counts)? / int(window as i64);
    let act = qnn_activation(&z, spec);
    Ok(EquivalenceReport {
        n_snn: trace.n,
        n_qnn_level: act.level,
        matched: trace.n == act.level as usize,
        premise_ok: trace.premise_ok,
        residual_eps: trace.residual_eps(params),
        clamp: act.clamp,
    })
}

/// Scenario named from the SNN's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Every active input at full rate: `s_r = 1 − γ`.
    Worst,
    /// Active levels uniform on `[1/T, 1]`.
    Average,
    /// Every active input fires once: `s_r = (1 − γ)/T`.
    Best,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Worst, Scenario::Average, Scenario::Best];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Worst => "worst",
            Scenario::Average => "average",
            Scenario::Best => "best",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "worst" => Ok(Scenario::Worst),
            "average" | "avg" => Ok(Scenario::Average),
            "best" => Ok(Scenario::Best),
            other => Err(Error::Domain(format!(
                "unknown scenario '{other}' (worst|average|best)"
            ))),
        }
    }
}

fn check_unit(name: &str, x: &Rational) -> Result<()> {
    if x.is_negative() || x > &Rational::one() {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

fn check_window(window: u32) -> Result<Rational> {
    if window < 1 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    Ok(int(window.into()))
}

/// `((1−γ)/T, 1−γ)`.
pub fn spike_rate_bounds(gamma: &Rational, window: u32) -> Result<(Rational, Rational)> {
    check_unit("gamma", gamma)?;
    let t = check_window(window)?;
    let density = Rational::one() - gamma;
    Ok((&density / t, density))
}

pub fn scenario_spike_rate(gamma: &Rational, window: u32, scenario: Scenario) -> Result<Rational> {
    check_unit("gamma", gamma)?;
    let t = check_window(window)?;
    let density = Rational::one() - gamma;
    Ok(match scenario {
        Scenario::Worst => density,
        Scenario::Average => density * (Rational::one() / &t + Rational::one()) / int(2),
        Scenario::Best => density / t,
    })
}

/// Inverse of [`scenario_spike_rate`]: the QNN sparsity whose scenario rate is `s_r`.
pub fn scenario_sparsity(spike_rate: &Rational, window: u32, scenario: Scenario) -> Result<Rational> {
    check_unit("spike rate", spike_rate)?;
    let t = check_window(window)?;
    let gamma = match scenario {
        Scenario::Worst => Rational::one() - spike_rate,
        Scenario::Average => Rational::one() - int(2) * spike_rate * &t / (&t + Rational::one()),
        Scenario::Best => Rational::one() - spike_rate * &t,
    };
    if gamma.is_negative() {
        let bound = match scenario {
            Scenario::Best => "s_r·T ≤ 1",
            _ => "2·s_r·T/(T+1) ≤ 1",
        };
        return Err(Error::Infeasible(format!(
            "{scenario} scenario needs {bound}; s_r={spike_rate}, T={window} gives gamma={gamma} < 0"
        )));
    }
    Ok(gamma)
}
