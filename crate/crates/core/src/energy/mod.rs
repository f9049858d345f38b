//! Analytical compute and data-movement energy of one output neuron with
//! `N_src` inputs, for an SNN and its QNN twin.
//!
//! Control energy is not modelled. Every quantity is an exact rational in pJ.

mod profile;

pub use profile::{
    builtin, builtins, default_mac_scale, default_weight_table, product_mac_table, HardwareProfile, BASE_OP_PJ,
    PRESET_NAMES, TABLE_MAX_BITS,
};

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};
use crate::twin::{bits_for_window, scenario_spike_rate, Scenario};

/// Operating point of one SNN/QNN twin pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    pub n_src: u64,
    #[serde(alias = "T")]
    pub window: u32,
    #[serde(with = "rational::decimal", alias = "s_r")]
    pub spike_rate: Rational,
    #[serde(with = "rational::decimal")]
    pub gamma: Rational,
    pub weight_bits: u32,
}

impl WorkloadConfig {
    pub fn new(n_src: u64, window: u32, spike_rate: Rational, gamma: Rational, weight_bits: u32) -> Result<Self> {
        let cfg = Self {
            n_src,
            window,
            spike_rate,
            gamma,
            weight_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_src < 1 {
            return Err(Error::Domain("n_src must be at least 1".into()));
        }
        if self.window < 1 {
            return Err(Error::Domain("window T must be at least 1".into()));
        }
        for (name, v) in [("spike rate", &self.spike_rate), ("gamma", &self.gamma)] {
            if v.is_negative() || v > &Rational::one() {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.weight_bits < 1 {
            return Err(Error::Domain("weight_bits must be at least 1".into()));
        }
        Ok(())
    }

    /// `⌈log₂(T+1)⌉`.
    pub fn activation_bits(&self) -> u32 {
        bits_for_window(self.window).expect("window validated")
    }

    pub fn with_spike_rate(&self, spike_rate: Rational) -> Self {
        Self {
            spike_rate,
            ..self.clone()
        }
    }

    pub fn with_gamma(&self, gamma: Rational) -> Self {
        Self { gamma, ..self.clone() }
    }

    fn n(&self) -> Rational {
        Rational::from_integer(self.n_src.into())
    }

    fn t(&self) -> Rational {
        int(self.window.into())
    }

    fn density(&self) -> Rational {
        Rational::one() - &self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmissionMode {
    Sparse,
    Dense,
}

impl TransmissionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransmissionMode::Sparse => "sparse",
            TransmissionMode::Dense => "dense",
        }
    }
}

impl fmt::Display for TransmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransmissionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            other => Err(Error::Domain(format!("unknown transmission mode '{other}'"))),
        }
    }
}

/// Word width used by aggregated (spike-count) transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregatedBits {
    /// `⌈log₂(T+1)⌉`: enough for counts `0..=T`.
    #[default]
    CeilLog2TPlus1,
    /// `⌈log₂ T⌉`, the narrower word of the printed SNN′ formulas.
    CeilLog2T,
}

impl AggregatedBits {
    pub fn bits(self, window: u32) -> Result<u32> {
        match self {
            AggregatedBits::CeilLog2TPlus1 => bits_for_window(window),
            AggregatedBits::CeilLog2T => {
                if window < 1 {
                    return Err(Error::Domain("window must be at least 1".into()));
                }
                Ok(window.next_power_of_two().trailing_zeros())
            }
        }
    }
}

/// SNN activation transmission policy for [`total_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnnTransmission {
    /// Cheaper of per-timestep sparse and dense.
    #[default]
    Auto,
    Sparse,
    Dense,
    /// Spike counts sent as words; cheaper of sparse and dense words.
    Aggregated(AggregatedBits),
}

impl FromStr for SnnTransmission {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            "aggregated" => Ok(Self::Aggregated(AggregatedBits::CeilLog2TPlus1)),
            "aggregated-log2t" => Ok(Self::Aggregated(AggregatedBits::CeilLog2T)),
            other => Err(Error::Domain(format!(
                "unknown SNN mode '{other}' (auto|sparse|dense|aggregated|aggregated-log2t)"
            ))),
        }
    }
}

/// `N_src·(1−γ)·E_MAC + 2·E_CMP`.
pub fn compute_energy_qnn(cfg: &WorkloadConfig, hw: &HardwareProfile) -> Result<Rational> {
    let terms = qnn_compute_terms(cfg, hw)?;
    Ok(terms.0 + terms.1)
}

fn qnn_compute_terms(cfg: &WorkloadConfig, hw: &HardwareProfile) -> Result<(Rational, Rational)> {
    let mac = hw.mac(cfg.activation_bits(), cfg.weight_bits)?;
    Ok((cfg.n() * cfg.density() * mac, int(2) * &hw.e_cmp))
}

/// `N_src·T·s_r·E_ACC + T·(E_CMP + s_r·E_SUB)`.
pub fn compute_energy_snn(cfg: &WorkloadConfig, hw: &HardwareProfile) -> Rational {
    let (membrane, spiking) = snn_compute_terms(cfg, hw);
    membrane + spiking
}

fn snn_compute_terms(cfg: &WorkloadConfig, hw: &HardwareProfile) -> (Rational, Rational) {
    let t = cfg.t();
    let membrane = cfg.n() * &t * &cfg.spike_rate * &hw.e_acc;
    let spiking = t * (&hw.e_cmp + &cfg.spike_rate * &hw.e_sub);
    (membrane, spiking)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputeAdvantage {
    pub holds: bool,
    /// `k(1−γ) − [T·s_r + (T + T·s_r − 2)/N_src]`, the last term only when exact.
    /// Without the closed form it is the normalized gap `(E_QNN − E_SNN)/(N_src·E_ACC)`.
    pub margin: Rational,
    /// Whether `E_ACC = E_CMP = E_SUB` allowed the `k` form.
    pub closed_form: bool,
}

/// SNN compute-energy advantage condition, `E_SNN ≤ E_QNN` (ties hold).
pub fn compute_advantage(cfg: &WorkloadConfig, hw: &HardwareProfile, exact: bool) -> Result<ComputeAdvantage> {
    let closed_form = hw.e_acc == hw.e_cmp && hw.e_acc == hw.e_sub && hw.e_acc.is_positive();
    let n = cfg.n();
    let t = cfg.t();
    let ts = &t * &cfg.spike_rate;
    let margin = if closed_form {
        let k = hw.mac_ratio(cfg.activation_bits(), cfg.weight_bits)?;
        let mut lhs = ts.clone();
        if exact {
            lhs += (&t + &ts - int(2)) / &n;
        }
        k * cfg.density() - lhs
    } else {
        let (snn, qnn) = if exact {
            (compute_energy_snn(cfg, hw), compute_energy_qnn(cfg, hw)?)
        } else {
            let mac = hw.mac(cfg.activation_bits(), cfg.weight_bits)?;
            (&n * &ts * &hw.e_acc, &n * cfg.density() * mac)
        };
        let gap = qnn - snn;
        if hw.e_acc.is_positive() {
            gap / (n * &hw.e_acc)
        } else {
            gap
        }
    };
    Ok(ComputeAdvantage {
        holds: !margin.is_negative(),
        margin,
        closed_form,
    })
}

/// Activation-movement and weight-fetch parts of a data-movement energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataTerms {
    pub activation_move: Rational,
    pub weight_fetch: Rational,
}

impl DataTerms {
    pub fn total(&self) -> Rational {
        &self.activation_move + &self.weight_fetch
    }
}

fn move_cost(hw: &HardwareProfile, mode: TransmissionMode) -> &Rational {
    match mode {
        TransmissionMode::Sparse => &hw.e_move_sparse,
        TransmissionMode::Dense => &hw.e_move_dense,
    }
}

/// Multi-bit words, skipping zero activations when sparse.
fn word_data_terms(cfg: &WorkloadConfig, hw: &HardwareProfile, mode: TransmissionMode, bits: u32) -> Result<DataTerms> {
    let w = hw.weight(cfg.weight_bits)?;
    let count = match mode {
        TransmissionMode::Sparse => cfg.n() * cfg.density(),
        TransmissionMode::Dense => cfg.n(),
    };
    Ok(DataTerms {
        activation_move: &count * int(bits.into()) * move_cost(hw, mode),
        weight_fetch: count * w,
    })
}

pub fn qnn_data_terms(cfg: &WorkloadConfig, hw: &HardwareProfile, mode: TransmissionMode) -> Result<DataTerms> {
    word_data_terms(cfg, hw, mode, cfg.activation_bits())
}

pub fn snn_data_terms(cfg: &WorkloadConfig, hw: &HardwareProfile, mode: TransmissionMode) -> Result<DataTerms> {
    let w = hw.weight(cfg.weight_bits)?;
    let slots = match mode {
        TransmissionMode::Sparse => cfg.n() * cfg.t() * &cfg.spike_rate,
        TransmissionMode::Dense => cfg.n() * cfg.t(),
    };
    Ok(DataTerms {
        activation_move: &slots * move_cost(hw, mode),
        weight_fetch: slots * w,
    })
}

/// Sparse: `N_src·(1−γ)·(B·Ẽ + E_w)`; dense: `N_src·(B·Ē + E_w)`, `B = ⌈log₂(T+1)⌉`.
pub fn data_energy_qnn(cfg: &WorkloadConfig, hw: &HardwareProfile, mode: TransmissionMode) -> Result<Rational> {
    Ok(qnn_data_terms(cfg, hw, mode)?.total())
}

/// Sparse: `N_src·T·s_r·(Ẽ + E_w)`; dense: `N_src·T·(Ē + E_w)`.
pub fn data_energy_snn(cfg: &WorkloadConfig, hw: &HardwareProfile, mode: TransmissionMode) -> Result<Rational> {
    Ok(snn_data_terms(cfg, hw, mode)?.total())
}

/// Aggregated spike-count transmission: same shape as the QNN with word width from `bits`.
pub fn data_energy_snn_aggregated(
    cfg: &WorkloadConfig,
    hw: &HardwareProfile,
    mode: TransmissionMode,
    bits: AggregatedBits,
) -> Result<Rational> {
    Ok(word_data_terms(cfg, hw, mode, bits.bits(cfg.window)?)?.total())
}

/// `F(λ) = (⌈log₂(T+1)⌉·λ + E_w) / (Ẽ + E_w)` with `λ` the sparse or dense move cost.
pub fn factor_f(lambda: TransmissionMode, window: u32, weight_bits: u32, hw: &HardwareProfile) -> Result<Rational> {
    let bits = int(bits_for_window(window)?.into());
    let w = hw.weight(weight_bits)?;
    let denom = &hw.e_move_sparse + w;
    if denom.is_zero() {
        return Err(Error::Domain(
            "F(λ) undefined: sparse move cost plus weight cost is zero".into(),
        ));
    }
    Ok((bits * move_cost(hw, lambda) + w) / denom)
}

/// Closed-form threshold of an SNN data-movement advantage condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdvantageThreshold {
    /// Holds for every `T` and `γ`.
    Always,
    /// Holds iff `γ ≥` value.
    MinSparsity(Rational),
    /// Holds iff `T ≤` value.
    MaxWindow(Rational),
    /// The `T` bound diverges (`γ = 1` against a dense QNN).
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataAdvantage {
    pub holds: bool,
    pub threshold: AdvantageThreshold,
    /// Set when `γ = 1` makes both sides vanish or the bound diverge.
    pub degenerate: bool,
}

/// Whether sparse SNN transmission at the scenario's spike rate moves no more
/// energy than the QNN in `qnn_mode`. `cfg.spike_rate` is ignored.
pub fn data_advantage(
    cfg: &WorkloadConfig,
    hw: &HardwareProfile,
    scenario: Scenario,
    qnn_mode: TransmissionMode,
) -> Result<DataAdvantage> {
    use AdvantageThreshold::*;
    use Scenario::*;
    use TransmissionMode::*;

    let f = factor_f(qnn_mode, cfg.window, cfg.weight_bits, hw)?;
    let t = cfg.t();
    let saturated = cfg.gamma.is_one();
    let density = cfg.density();

    let threshold = match (scenario, qnn_mode) {
        (Best, Sparse) => Always,
        (Best, Dense) => MinSparsity(Rational::one() - f),
        (Average, Sparse) => MaxWindow(int(2) * f - Rational::one()),
        (Average, Dense) if saturated => Unbounded,
        (Average, Dense) => MaxWindow(int(2) * f / density - Rational::one()),
        (Worst, Sparse) => MaxWindow(f),
        (Worst, Dense) if saturated => Unbounded,
        (Worst, Dense) => MaxWindow(f / density),
    };
    // With γ = 1 the sparse energies on both sides are zero.
    let degenerate = saturated && !matches!(threshold, Always | MinSparsity(_));
    let holds = degenerate
        || match &threshold {
            Always | Unbounded => true,
            MinSparsity(g) => &cfg.gamma >= g,
            MaxWindow(bound) => &t <= bound,
        };
    Ok(DataAdvantage {
        holds,
        threshold,
        degenerate,
    })
}

/// Direct comparison behind [`data_advantage`]: `Ẽ^d_SNN(s_r(scenario)) ≤ E^d_QNN(qnn_mode)`.
pub fn data_advantage_direct(
    cfg: &WorkloadConfig,
    hw: &HardwareProfile,
    scenario: Scenario,
    qnn_mode: TransmissionMode,
) -> Result<bool> {
    let rate = scenario_spike_rate(&cfg.gamma, cfg.window, scenario)?;
    let snn = data_energy_snn(&cfg.with_spike_rate(rate), hw, TransmissionMode::Sparse)?;
    Ok(snn <= data_energy_qnn(cfg, hw, qnn_mode)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Network {
    Snn,
    Qnn,
}

/// Named sub-components; the ones that do not apply to a network are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnergyTerms {
    pub membrane_update: Rational,
    pub spiking_ops: Rational,
    pub active_macs: Rational,
    pub clamping: Rational,
    pub activation_move: Rational,
    pub weight_fetch: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyBreakdown {
    pub network: Network,
    pub compute_pj: Rational,
    pub data_pj: Rational,
    pub total_pj: Rational,
    pub transmission_mode: TransmissionMode,
    /// SNN spike counts were sent as aggregated words.
    pub aggregated: bool,
    pub terms: EnergyTerms,
}

impl EnergyBreakdown {
    /// `sparse`, `dense`, `aggregated-sparse` or `aggregated-dense`.
    pub fn mode_label(&self) -> String {
        if self.aggregated {
            format!("aggregated-{}", self.transmission_mode)
        } else {
            self.transmission_mode.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinEnergy {
    pub snn: EnergyBreakdown,
    pub qnn: EnergyBreakdown,
}

impl TwinEnergy {
    /// `E_SNN / E_QNN`, or `None` when the QNN total is zero.
    pub fn exact_ratio(&self) -> Option<Rational> {
        (!self.qnn.total_pj.is_zero()).then(|| &self.snn.total_pj / &self.qnn.total_pj)
    }

    pub fn ratio(&self) -> Option<f64> {
        self.exact_ratio().map(|r| rational::to_f64(&r))
    }
}

/// Ties resolve to dense.
fn cheaper(sparse: DataTerms, dense: DataTerms) -> (TransmissionMode, DataTerms) {
    if sparse.total() < dense.total() {
        (TransmissionMode::Sparse, sparse)
    } else {
        (TransmissionMode::Dense, dense)
    }
}

/// Compute + data energy of both twins. The QNN always takes its cheaper
/// transmission path; the SNN follows `snn_transmission`.
pub fn total_energy(
    cfg: &WorkloadConfig,
    hw: &HardwareProfile,
    snn_transmission: SnnTransmission,
) -> Result<TwinEnergy> {
    cfg.validate()?;
    let (macs, clamping) = qnn_compute_terms(cfg, hw)?;
    let (qnn_mode, qnn_data) = cheaper(
        qnn_data_terms(cfg, hw, TransmissionMode::Sparse)?,
        qnn_data_terms(cfg, hw, TransmissionMode::Dense)?,
    );
    let qnn_compute = &macs + &clamping;
    let qnn = EnergyBreakdown {
        network: Network::Qnn,
        data_pj: qnn_data.total(),
        total_pj: &qnn_compute + qnn_data.total(),
        compute_pj: qnn_compute,
        transmission_mode: qnn_mode,
        aggregated: false,
        terms: EnergyTerms {
            active_macs: macs,
            clamping,
            activation_move: qnn_data.activation_move,
            weight_fetch: qnn_data.weight_fetch,
            ..Default::default()
        },
    };

    let (membrane, spiking) = snn_compute_terms(cfg, hw);
    let (snn_mode, snn_data, aggregated) = match snn_transmission {
        SnnTransmission::Auto => {
            let (m, d) = cheaper(
                snn_data_terms(cfg, hw, TransmissionMode::Sparse)?,
                snn_data_terms(cfg, hw, TransmissionMode::Dense)?,
            );
            (m, d, false)
        }
        SnnTransmission::Sparse => (
            TransmissionMode::Sparse,
            snn_data_terms(cfg, hw, TransmissionMode::Sparse)?,
            false,
        ),
        SnnTransmission::Dense => (
            TransmissionMode::Dense,
            snn_data_terms(cfg, hw, TransmissionMode::Dense)?,
            false,
        ),
        SnnTransmission::Aggregated(rule) => {
            let bits = rule.bits(cfg.window)?;
            let (m, d) = cheaper(
                word_data_terms(cfg, hw, TransmissionMode::Sparse, bits)?,
                word_data_terms(cfg, hw, TransmissionMode::Dense, bits)?,
            );
            (m, d, true)
        }
    };
    let snn_compute = &membrane + &spiking;
    let snn = EnergyBreakdown {
        network: Network::Snn,
        data_pj: snn_data.total(),
        total_pj: &snn_compute + snn_data.total(),
        compute_pj: snn_compute,
        transmission_mode: snn_mode,
        aggregated,
        terms: EnergyTerms {
            membrane_update: membrane,
            spiking_ops: spiking,
            activation_move: snn_data.activation_move,
            weight_fetch: snn_data.weight_fetch,
            ..Default::default()
        },
    };
    Ok(TwinEnergy { snn, qnn })
}
