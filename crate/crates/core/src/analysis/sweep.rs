use rayon::prelude::*;

use crate::analysis::breakeven::{breakeven_spike_rate, BreakevenResult};
use crate::energy::{total_energy, HardwareProfile, SnnTransmission, TwinEnergy, WorkloadConfig};
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};
use crate::twin::{bits_for_window, scenario_sparsity, Scenario};

/// Fan-in used by the preset landscape.
pub const LANDSCAPE_N_SRC: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelPreset {
    pub name: String,
    pub window: u32,
    pub spike_rate: Rational,
}

impl ModelPreset {
    pub fn new(name: impl Into<String>, window: u32, spike_rate: Rational) -> Self {
        Self {
            name: name.into(),
            window,
            spike_rate,
        }
    }
}

pub fn default_models() -> Vec<ModelPreset> {
    vec![
        ModelPreset::new("efficient", 2, ratio(2, 100)),
        ModelPreset::new("typical", 4, ratio(1, 10)),
        ModelPreset::new("high-performance", 32, ratio(20, 100)),
    ]
}

pub fn model_preset(name: &str) -> Option<ModelPreset> {
    default_models().into_iter().find(|m| m.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvantageFlags {
    pub compute: bool,
    pub data: bool,
    pub total: bool,
}

impl AdvantageFlags {
    fn of(e: &TwinEnergy) -> Self {
        Self {
            compute: e.snn.compute_pj <= e.qnn.compute_pj,
            data: e.snn.data_pj <= e.qnn.data_pj,
            total: e.snn.total_pj <= e.qnn.total_pj,
        }
    }
}

/// One grid point. `energy` is `None` exactly when `infeasible` carries a reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub model: String,
    pub hw: String,
    /// `None` for fixed-sparsity sweeps.
    pub scenario: Option<Scenario>,
    pub window: u32,
    pub spike_rate: Rational,
    pub gamma: Option<Rational>,
    pub n_src: u64,
    pub weight_bits: u32,
    pub activation_bits: u32,
    pub energy: Option<TwinEnergy>,
    pub advantage: Option<AdvantageFlags>,
    pub infeasible: Option<String>,
}

impl SweepRecord {
    pub fn feasible(&self) -> bool {
        self.energy.is_some()
    }

    pub fn ratio(&self) -> Option<f64> {
        self.energy.as_ref().and_then(TwinEnergy::ratio)
    }
}

struct Point<'a> {
    model: &'a str,
    hw: &'a HardwareProfile,
    scenario: Option<Scenario>,
    window: u32,
    spike_rate: &'a Rational,
    gamma: Option<&'a Rational>,
    n_src: u64,
    weight_bits: u32,
}

fn evaluate(p: Point<'_>) -> Result<SweepRecord> {
    let gamma = match (p.gamma, p.scenario) {
        (Some(g), _) => Ok(g.clone()),
        (None, Some(s)) => scenario_sparsity(p.spike_rate, p.window, s),
        (None, None) => return Err(Error::Domain("grid point needs a sparsity or a scenario".into())),
    };
    let mut record = SweepRecord {
        model: p.model.to_string(),
        hw: p.hw.name.clone(),
        scenario: p.scenario,
        window: p.window,
        spike_rate: p.spike_rate.clone(),
        gamma: None,
        n_src: p.n_src,
        weight_bits: p.weight_bits,
        activation_bits: bits_for_window(p.window)?,
        energy: None,
        advantage: None,
        infeasible: None,
    };
    match gamma {
        Ok(gamma) => {
            let cfg = WorkloadConfig::new(p.n_src, p.window, p.spike_rate.clone(), gamma.clone(), p.weight_bits)?;
            let energy = total_energy(&cfg, p.hw, SnnTransmission::Auto)?;
            record.advantage = Some(AdvantageFlags::of(&energy));
            record.energy = Some(energy);
            record.gamma = Some(gamma);
        }
        Err(Error::Infeasible(reason)) => record.infeasible = Some(reason),
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Every (model, hardware, scenario) cell, in that nesting order. Sparsity is
/// derived from each model's `(T, s_r)` per scenario; cells whose scenario
/// sparsity leaves `[0, 1]` become infeasibility markers.
pub fn landscape(
    models: &[ModelPreset],
    hws: &[HardwareProfile],
    scenarios: &[Scenario],
    n_src: u64,
    weight_bits: u32,
) -> Result<Vec<SweepRecord>> {
    let cells: Vec<_> = models
        .iter()
        .flat_map(|m| {
            hws.iter()
                .flat_map(move |hw| scenarios.iter().map(move |&s| (m, hw, s)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(m, hw, s)| {
            evaluate(Point {
                model: &m.name,
                hw,
                scenario: Some(s),
                window: m.window,
                spike_rate: &m.spike_rate,
                gamma: None,
                n_src,
                weight_bits,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitivityGrid {
    pub windows: Vec<u32>,
    pub spike_rates: Vec<Rational>,
    pub weight_bits: Vec<u32>,
    pub n_srcs: Vec<u64>,
}

impl SensitivityGrid {
    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty()
            || self.spike_rates.is_empty()
            || self.weight_bits.is_empty()
            || self.n_srcs.is_empty()
        {
            return Err(Error::Domain("sensitivity grid axes must be non-empty".into()));
        }
        Ok(())
    }

    /// `(T, weight_bits, n_src)` triples in output order.
    fn curves(&self) -> Vec<(u32, u32, u64)> {
        let mut out = Vec::new();
        for &t in &self.windows {
            for &b in &self.weight_bits {
                for &n in &self.n_srcs {
                    out.push((t, b, n));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.windows.len() * self.spike_rates.len() * self.weight_bits.len() * self.n_srcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub records: Vec<SweepRecord>,
    /// One per `(T, weight_bits, n_src)` curve.
    pub breakevens: Vec<BreakevenResult>,
}

/// Energy of every grid point against a QNN at fixed sparsity, plus one
/// breakeven solve per curve. Order: T, weight bits, fan-in, then spike rate.
pub fn sensitivity(grid: &SensitivityGrid, hw: &HardwareProfile, gamma_qnn: &Rational) -> Result<SensitivityReport> {
    grid.validate()?;
    let curves = grid.curves();
    let points: Vec<_> = curves
        .iter()
        .flat_map(|&(t, b, n)| grid.spike_rates.iter().map(move |s| (t, b, n, s)))
        .collect();
    let records = points
        .into_par_iter()
        .map(|(t, b, n, s)| {
            evaluate(Point {
                model: "sweep",
                hw,
                scenario: None,
                window: t,
                spike_rate: s,
                gamma: Some(gamma_qnn),
                n_src: n,
                weight_bits: b,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let breakevens = curves
        .into_par_iter()
        .map(|(t, b, n)| breakeven_spike_rate(t, n, gamma_qnn, b, hw))
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityReport { records, breakevens })
}
