use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::energy::{
    compute_energy_snn, data_energy_snn, total_energy, HardwareProfile, SnnTransmission, TransmissionMode,
    WorkloadConfig,
};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// Spike rate above which dense SNN transmission is cheaper than sparse:
/// `(Ē + E_w) / (Ẽ + E_w)`.
pub fn sparse_dense_threshold(hw: &HardwareProfile, weight_bits: u32) -> Result<Rational> {
    let w = hw.weight(weight_bits)?;
    let denom = &hw.e_move_sparse + w;
    if denom.is_zero() {
        return Err(Error::Domain(
            "transmission threshold undefined: sparse move cost plus weight cost is zero".into(),
        ));
    }
    Ok((&hw.e_move_dense + w) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakevenOutcome {
    /// `E_SNN(s*) = E_QNN` for some `s* ∈ [0, 1]`.
    Root,
    /// `E_SNN(0) > E_QNN`: the QNN wins at every rate.
    NoFeasibleRate,
    /// `E_SNN(1) < E_QNN`: the SNN wins at every rate; `s*` is reported as 1.
    SnnAlwaysCheaper,
}

impl BreakevenOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            BreakevenOutcome::Root => "root",
            BreakevenOutcome::NoFeasibleRate => "no-feasible-rate",
            BreakevenOutcome::SnnAlwaysCheaper => "snn-always-cheaper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakevenResult {
    pub window: u32,
    pub n_src: u64,
    pub gamma_qnn: Rational,
    pub weight_bits: u32,
    pub outcome: BreakevenOutcome,
    pub s_star: Option<Rational>,
    /// SNN transmission mode active at `s*`.
    pub segment: Option<TransmissionMode>,
    /// Endpoints of the affine piece holding `s*` (or of `[0, 1]` without a root).
    pub bracket: (Rational, Rational),
    pub bracket_energy_pj: (Rational, Rational),
    pub qnn_energy_pj: Rational,
}

impl BreakevenResult {
    pub fn s_star_f64(&self) -> Option<f64> {
        self.s_star.as_ref().map(to_f64)
    }
}

/// `E_SNN(s) = base + compute_slope·s + min(sparse_slope·s, dense)` with
/// automatic sparse/dense selection.
#[derive(Debug, Clone)]
struct SnnCurve {
    base: Rational,
    compute_slope: Rational,
    sparse_slope: Rational,
    dense: Rational,
}

impl SnnCurve {
    fn new(cfg: &WorkloadConfig, hw: &HardwareProfile) -> Result<Self> {
        let at0 = cfg.with_spike_rate(Rational::zero());
        let at1 = cfg.with_spike_rate(Rational::one());
        let base = compute_energy_snn(&at0, hw);
        Ok(Self {
            compute_slope: compute_energy_snn(&at1, hw) - &base,
            sparse_slope: data_energy_snn(&at1, hw, TransmissionMode::Sparse)?,
            dense: data_energy_snn(cfg, hw, TransmissionMode::Dense)?,
            base,
        })
    }

    fn at(&self, s: &Rational) -> Rational {
        let sparse = &self.sparse_slope * s;
        let data = if sparse < self.dense {
            sparse
        } else {
            self.dense.clone()
        };
        &self.base + &self.compute_slope * s + data
    }

    /// Where the sparse and dense pieces meet, if inside `[0, 1]`.
    fn knee(&self) -> Option<Rational> {
        if self.sparse_slope.is_zero() {
            return None;
        }
        let s = &self.dense / &self.sparse_slope;
        (s < Rational::one()).then_some(s)
    }
}

/// Smallest spike rate where SNN total energy (auto transmission) meets the QNN
/// total at sparsity `gamma_qnn`. Solved in closed form on each affine piece.
pub fn breakeven_spike_rate(
    window: u32,
    n_src: u64,
    gamma_qnn: &Rational,
    weight_bits: u32,
    hw: &HardwareProfile,
) -> Result<BreakevenResult> {
    let cfg = WorkloadConfig::new(n_src, window, Rational::zero(), gamma_qnn.clone(), weight_bits)?;
    let qnn = total_energy(&cfg, hw, SnnTransmission::Auto)?.qnn.total_pj;
    let curve = SnnCurve::new(&cfg, hw)?;
    let zero = Rational::zero();
    let one = Rational::one();
    let knee = curve.knee();

    let result = |outcome, s_star: Option<Rational>, lo: Rational, hi: Rational| {
        let segment = s_star.as_ref().map(|s| match &knee {
            Some(k) if s >= k => TransmissionMode::Dense,
            None if curve.dense.is_zero() => TransmissionMode::Dense,
            _ => TransmissionMode::Sparse,
        });
        BreakevenResult {
            window,
            n_src,
            gamma_qnn: gamma_qnn.clone(),
            weight_bits,
            outcome,
            bracket_energy_pj: (curve.at(&lo), curve.at(&hi)),
            s_star,
            segment,
            bracket: (lo, hi),
            qnn_energy_pj: qnn.clone(),
        }
    };

    if curve.at(&zero) > qnn {
        return Ok(result(BreakevenOutcome::NoFeasibleRate, None, zero, one));
    }
    if curve.at(&one) < qnn {
        return Ok(result(BreakevenOutcome::SnnAlwaysCheaper, Some(one.clone()), zero, one));
    }

    // E_SNN is continuous and non-decreasing, so the first piece whose right
    // end reaches the target holds the smallest root.
    let sparse_end = knee.clone().unwrap_or_else(|| one.clone());
    let pieces = [
        (
            zero.clone(),
            sparse_end.clone(),
            &curve.compute_slope + &curve.sparse_slope,
        ),
        (sparse_end, one.clone(), curve.compute_slope.clone()),
    ];
    for (lo, hi, slope) in pieces {
        let (e_lo, e_hi) = (curve.at(&lo), curve.at(&hi));
        if e_hi < qnn {
            continue;
        }
        let s = if e_lo >= qnn || slope.is_zero() {
            lo.clone()
        } else {
            &lo + (&qnn - &e_lo) / slope
        };
        debug_assert!(!s.is_negative() && s <= one);
        return Ok(result(BreakevenOutcome::Root, Some(s), lo, hi));
    }
    unreachable!("E_SNN(1) >= E_QNN guarantees a root on some piece")
}

/// Report-only summaries of breakeven rates across `T = 1..=10`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakevenAnnotations {
    /// Largest `s*` over `T ∈ [5, 10]`.
    pub max_s_star_t5_to_t10: Option<f64>,
    /// Largest `s*` over `T ∈ [6, 10]`.
    pub max_s_star_above_t5: Option<f64>,
    /// Largest `s*` over `T ∈ [1, 4]`.
    pub max_s_star_below_t5: Option<f64>,
}

pub fn breakeven_annotations(
    n_src: u64,
    gamma_qnn: &Rational,
    weight_bits: u32,
    hw: &HardwareProfile,
) -> Result<BreakevenAnnotations> {
    let stars = (1..=10u32)
        .map(|t| Ok((t, breakeven_spike_rate(t, n_src, gamma_qnn, weight_bits, hw)?.s_star)))
        .collect::<Result<Vec<_>>>()?;
    let max_over = |lo: u32, hi: u32| {
        stars
            .iter()
            .filter(|(t, _)| (lo..=hi).contains(t))
            .filter_map(|(_, s)| s.as_ref())
            .max()
            .map(to_f64)
    };
    Ok(BreakevenAnnotations {
        max_s_star_t5_to_t10: max_over(5, 10),
        max_s_star_above_t5: max_over(6, 10),
        max_s_star_below_t5: max_over(1, 4),
    })
}
