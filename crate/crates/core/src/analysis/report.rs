//! Flat CSV/JSON rows for sweep and breakeven output.
//!
//! Row order follows the input grid and every number goes through a fixed
//! formatter, so identical inputs give byte-identical files.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::breakeven::BreakevenResult;
use crate::analysis::sweep::SweepRecord;
use crate::error::{Error, Result};
use crate::rational::{round_sig6, to_f64};

pub const SWEEP_CSV_HEADER: &str = "model,hw,scenario,T,s_r,gamma,n_src,weight_bits,activation_bits,\
e_snn_compute_pj,e_snn_data_pj,e_snn_total_pj,snn_mode,e_qnn_compute_pj,e_qnn_data_pj,e_qnn_total_pj,ratio,feasible";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format '{other}' (csv|json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub hw: String,
    pub scenario: String,
    #[serde(rename = "T")]
    pub window: u32,
    pub s_r: f64,
    pub gamma: Option<f64>,
    pub n_src: u64,
    pub weight_bits: u32,
    pub activation_bits: u32,
    pub e_snn_compute_pj: Option<f64>,
    pub e_snn_data_pj: Option<f64>,
    pub e_snn_total_pj: Option<f64>,
    pub snn_mode: Option<String>,
    pub e_qnn_compute_pj: Option<f64>,
    pub e_qnn_data_pj: Option<f64>,
    pub e_qnn_total_pj: Option<f64>,
    /// Six significant digits.
    pub ratio: Option<f64>,
    pub feasible: bool,
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        let e = r.energy.as_ref();
        Self {
            model: r.model.clone(),
            hw: r.hw.clone(),
            scenario: r.scenario.map_or_else(|| "fixed-gamma".to_string(), |s| s.to_string()),
            window: r.window,
            s_r: to_f64(&r.spike_rate),
            gamma: r.gamma.as_ref().map(to_f64),
            n_src: r.n_src,
            weight_bits: r.weight_bits,
            activation_bits: r.activation_bits,
            e_snn_compute_pj: e.map(|e| to_f64(&e.snn.compute_pj)),
            e_snn_data_pj: e.map(|e| to_f64(&e.snn.data_pj)),
            e_snn_total_pj: e.map(|e| to_f64(&e.snn.total_pj)),
            snn_mode: e.map(|e| e.snn.mode_label()),
            e_qnn_compute_pj: e.map(|e| to_f64(&e.qnn.compute_pj)),
            e_qnn_data_pj: e.map(|e| to_f64(&e.qnn.data_pj)),
            e_qnn_total_pj: e.map(|e| to_f64(&e.qnn.total_pj)),
            ratio: r.ratio().map(round_sig6),
            feasible: r.feasible(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakevenRow {
    pub hw: String,
    #[serde(rename = "T")]
    pub window: u32,
    pub n_src: u64,
    pub weight_bits: u32,
    pub activation_bits: u32,
    pub gamma_qnn: f64,
    pub outcome: String,
    pub s_star: Option<f64>,
    pub segment: Option<String>,
    pub s_lo: f64,
    pub s_hi: f64,
    pub e_qnn_total_pj: f64,
}

impl BreakevenRow {
    pub fn new(hw: &str, r: &BreakevenResult) -> Self {
        Self {
            hw: hw.to_string(),
            window: r.window,
            n_src: r.n_src,
            weight_bits: r.weight_bits,
            activation_bits: crate::twin::bits_for_window(r.window).expect("window validated by solver"),
            gamma_qnn: to_f64(&r.gamma_qnn),
            outcome: r.outcome.as_str().to_string(),
            s_star: r.s_star_f64(),
            segment: r.segment.map(|m| m.to_string()),
            s_lo: to_f64(&r.bracket.0),
            s_hi: to_f64(&r.bracket.1),
            e_qnn_total_pj: to_f64(&r.qnn_energy_pj),
        }
    }
}

pub fn sweep_rows(records: &[SweepRecord]) -> Vec<SweepRow> {
    records.iter().map(SweepRow::from).collect()
}

pub fn breakeven_rows(hw: &str, results: &[BreakevenResult]) -> Vec<BreakevenRow> {
    results.iter().map(|r| BreakevenRow::new(hw, r)).collect()
}

fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// CSV with [`SWEEP_CSV_HEADER`]. An empty record list still writes the header.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    if records.is_empty() {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        return Ok(());
    }
    write_csv(&sweep_rows(records), out)
}

pub fn write_sweep_json<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    write_json(&sweep_rows(records), out)
}

pub fn write_breakeven_csv<W: Write>(rows: &[BreakevenRow], out: W) -> Result<()> {
    write_csv(rows, out)
}

pub fn write_breakeven_json<W: Write>(rows: &[BreakevenRow], out: W) -> Result<()> {
    write_json(rows, out)
}
