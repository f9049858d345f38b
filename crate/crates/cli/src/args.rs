use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use snn_twin::analysis::OutputFormat;
use snn_twin::energy::SnnTransmission;
use snn_twin::rational::parse_decimal;
use snn_twin::twin::Scenario;
use snn_twin::Rational;

// Aliases keep clap from treating each list as a repeated flag.
pub type U32List = Vec<u32>;
pub type U64List = Vec<u64>;
pub type RationalList = Vec<Rational>;

#[derive(Debug, Parser)]
#[command(
    name = "snn-twin",
    version,
    about = "Energy comparison of rate-coded SNNs and their quantized twins",
    after_help = "Scenarios are named from the SNN side: `best` means one spike per active input \
(s_r = (1-γ)/T), `worst` means every active input at full rate (s_r = 1-γ) and `average` \
has active levels uniform on {1/T, ..., 1}. Seen from the QNN, `best` is the QNN's worst case."
)]
pub struct Cli {
    /// Directory with extra `<name>.json` hardware profiles; a file named like a
    /// built-in preset replaces it.
    #[arg(long, global = true, env = "SNN_TWIN_PROFILE_DIR", value_name = "DIR")]
    pub profile_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy breakdown of one SNN/QNN twin pair
    Energy(EnergyArgs),
    /// Spike rate at which the SNN costs as much as its QNN twin
    Breakeven(BreakevenArgs),
    /// Sensitivity grid over T, spike rate, weight bits and fan-in
    Sweep(SweepArgs),
    /// Preset models × hardware profiles × scenarios
    Landscape(LandscapeArgs),
    /// Randomized check of the spike-count closed form and spike-rate bounds
    Verify(VerifyArgs),
    /// List built-in hardware profiles and model presets
    Presets(PresetsArgs),
}

#[derive(Debug, Args)]
pub struct HwArgs {
    /// Hardware profile: a preset name or a path to a profile JSON file
    #[arg(long, default_value = "typical-neuromorphic")]
    pub hw: String,

    /// Replace the MAC table by E_MAC(a, w) = E_ACC·c·a·w with this c
    #[arg(long, value_name = "C", value_parser = rational)]
    pub mac_scale: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; the format follows its extension when it has one
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_parser = output_format)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub hw: HwArgs,

    #[command(flatten)]
    pub out: OutArgs,

    /// Workload JSON with n_src, T, s_r, gamma and weight_bits
    #[arg(long, conflicts_with_all = ["model", "window", "spike_rate"])]
    pub config: Option<PathBuf>,

    /// Model preset supplying T and s_r
    #[arg(long, conflicts_with_all = ["window", "spike_rate"])]
    pub model: Option<String>,

    /// Derive γ from T and s_r under this scenario
    #[arg(long, value_parser = scenario, conflicts_with = "gamma")]
    pub scenario: Option<Scenario>,

    #[arg(long = "T", alias = "window", value_name = "T")]
    pub window: Option<u32>,

    #[arg(long = "s-r", alias = "spike-rate", value_name = "S_R", value_parser = rational)]
    pub spike_rate: Option<Rational>,

    /// QNN input sparsity γ
    #[arg(long, value_parser = rational)]
    pub gamma: Option<Rational>,

    #[arg(long, default_value_t = 4096)]
    pub n_src: u64,

    #[arg(long, default_value_t = 8)]
    pub weight_bits: u32,

    /// SNN activation transmission: auto, sparse, dense, aggregated or aggregated-log2t
    #[arg(long, default_value = "auto", value_parser = snn_mode)]
    pub snn_mode: SnnTransmission,

    /// Keep the 1/N_src term in the compute advantage condition
    #[arg(long)]
    pub exact: bool,

    /// Print JSON to stdout
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BreakevenArgs {
    #[command(flatten)]
    pub hw: HwArgs,

    #[command(flatten)]
    pub out: OutArgs,

    /// Windows, as `1..8` or `1,2,4`
    #[arg(long = "T", alias = "window", value_name = "T", default_value = "1..8", value_parser = u32_list)]
    pub windows: U32List,

    #[arg(long, default_value_t = 4096)]
    pub n_src: u64,

    /// QNN input sparsity γ
    #[arg(long, default_value = "0.8", value_parser = rational)]
    pub gamma: Rational,

    #[arg(long, default_value_t = 8)]
    pub weight_bits: u32,

    /// Print JSON to stdout
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub hw: HwArgs,

    #[command(flatten)]
    pub out: OutArgs,

    #[arg(long = "T", alias = "window", value_name = "T", default_value = "1..8", value_parser = u32_list)]
    pub windows: U32List,

    /// Spike rates, as `start:step:end` or a comma list
    #[arg(long = "s-r", alias = "spike-rates", value_name = "S_R", default_value = "0:0.05:1", value_parser = rational_list)]
    pub spike_rates: RationalList,

    #[arg(long, default_value = "4,8", value_parser = u32_list)]
    pub weight_bits: U32List,

    #[arg(long, default_value = "64,4096", value_parser = u64_list)]
    pub n_src: U64List,

    /// QNN input sparsity γ
    #[arg(long, default_value = "0.8", value_parser = rational)]
    pub gamma: Rational,

    /// Companion breakeven file; defaults to `<out stem>_breakeven.<ext>`
    #[arg(long)]
    pub breakeven_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Hardware profiles, repeatable; defaults to every built-in preset
    #[arg(long)]
    pub hw: Vec<String>,

    #[arg(long, value_name = "C", value_parser = rational)]
    pub mac_scale: Option<Rational>,

    #[command(flatten)]
    pub out: OutArgs,

    #[arg(long, default_value_t = snn_twin::analysis::LANDSCAPE_N_SRC)]
    pub n_src: u64,

    #[arg(long, default_value_t = 8)]
    pub weight_bits: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub out: OutArgs,

    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 16)]
    pub max_inputs: usize,

    #[arg(long, default_value_t = 32)]
    pub max_window: usize,

    /// Draw each weight from [0, r·θ] instead of keeping Σw < θ
    #[arg(long, value_name = "R", value_parser = rational)]
    pub max_weight: Option<Rational>,

    /// Random activation vectors for the spike-rate bound check
    #[arg(long, default_value_t = 1_000)]
    pub rate_trials: usize,

    /// Print JSON to stdout
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print one profile as JSON, usable as a template
    #[arg(long)]
    pub show: Option<String>,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_decimal(s).map_err(|e| e.to_string())
}

fn scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: snn_twin::Error| e.to_string())
}

fn snn_mode(s: &str) -> Result<SnnTransmission, String> {
    s.parse().map_err(|e: snn_twin::Error| e.to_string())
}

fn output_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: snn_twin::Error| e.to_string())
}

fn int_list<T>(s: &str) -> Result<Vec<T>, String>
where
    T: std::str::FromStr + Copy + PartialOrd + TryFrom<u64>,
    u64: From<T>,
{
    let parse = |t: &str| {
        t.trim()
            .parse::<T>()
            .map_err(|_| format!("'{t}' is not a non-negative integer"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return (u64::from(a)..=u64::from(b))
            .map(|v| T::try_from(v).map_err(|_| format!("{v} out of range")))
            .collect();
    }
    s.split(',').map(parse).collect()
}

pub fn u32_list(s: &str) -> Result<Vec<u32>, String> {
    int_list(s)
}

pub fn u64_list(s: &str) -> Result<Vec<u64>, String> {
    int_list(s)
}

/// `start:step:end` (inclusive, exact) or a comma list.
pub fn rational_list(s: &str) -> Result<Vec<Rational>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (rational(start)?, rational(step)?, rational(end)?);
            if step <= Rational::from_integer(0.into()) || start > end {
                return Err(format!("bad range {s}"));
            }
            let mut out = Vec::new();
            let mut v = start;
            while v <= end {
                out.push(v.clone());
                v += &step;
            }
            Ok(out)
        }
        [_] => s.split(',').map(rational).collect(),
        _ => Err(format!("expected start:step:end or a comma list, got {s}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use snn_twin::rational::ratio;

    #[test]
    fn lists() {
        assert_eq!(u32_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(u32_list("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(u64_list("64,4096").unwrap(), vec![64, 4096]);
        assert!(u32_list("4..1").is_err());
        assert!(u32_list("x").is_err());
        let r = rational_list("0:0.25:1").unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[3], ratio(3, 4));
        assert_eq!(rational_list("0.1,1/3").unwrap(), vec![ratio(1, 10), ratio(1, 3)]);
        assert!(rational_list("0:0:1").is_err());
    }

    #[test]
    fn parser_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
