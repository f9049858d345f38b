use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use snn_twin::analysis::OutputFormat;
use snn_twin::energy::{builtin, HardwareProfile, PRESET_NAMES};
use snn_twin::Rational;

/// A failed run and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Config(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Failure::Config(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Io(e) => write!(f, "I/O error: {e:#}"),
        }
    }
}

impl From<snn_twin::Error> for Failure {
    fn from(e: snn_twin::Error) -> Self {
        match e {
            snn_twin::Error::Io(_) => Failure::Io(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

pub type RunResult<T = ()> = Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub hw: Vec<String>,
    pub out: Option<PathBuf>,
    pub format: Option<&'static str>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            config: None,
            hw: Vec::new(),
            out: None,
            format: None,
            seed: None,
        }
    }

    /// Records the output path and settles its format. An explicit format
    /// must agree with the path's extension when it has a known one.
    pub fn with_output(
        mut self,
        out: Option<&Path>,
        explicit: Option<OutputFormat>,
        default: OutputFormat,
    ) -> RunResult<(Self, OutputFormat)> {
        let from_ext = out.and_then(OutputFormat::from_path);
        let format = match (explicit, from_ext) {
            (Some(a), Some(b)) if a != b => {
                return Err(Failure::config(format!(
                    "--format {} conflicts with the extension of {}",
                    format_name(a),
                    out.expect("extension implies a path").display()
                )))
            }
            (Some(f), _) | (None, Some(f)) => f,
            (None, None) => default,
        };
        self.out = out.map(Path::to_path_buf);
        self.format = Some(format_name(format));
        Ok((self, format))
    }
}

pub fn format_name(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

fn looks_like_path(spec: &str) -> bool {
    spec.contains('/') || spec.contains('\\') || spec.ends_with(".json")
}

/// Resolves `--hw`: a file path, a profile in `profile_dir`, or a built-in.
pub fn resolve_hw(spec: &str, profile_dir: Option<&Path>, mac_scale: Option<&Rational>) -> RunResult<HardwareProfile> {
    let hw = if looks_like_path(spec) {
        HardwareProfile::load(Path::new(spec))?
    } else if let Some(path) = profile_dir
        .map(|d| d.join(format!("{spec}.json")))
        .filter(|p| p.is_file())
    {
        HardwareProfile::load(&path)?
    } else if let Some(hw) = builtin(spec) {
        hw
    } else {
        return Err(Failure::config(format!(
            "unknown hardware profile '{spec}' (built-in: {})",
            PRESET_NAMES.join(", ")
        )));
    };
    let hw = match mac_scale {
        Some(c) => hw.with_mac_scale(c),
        None => hw,
    };
    for w in hw.warnings() {
        eprintln!("warning: {}: {w}", hw.name);
    }
    Ok(hw)
}

pub fn write_output(path: &Path, bytes: &[u8]) -> RunResult {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::Io(anyhow::Error::new(e).context(format!("writing {}", path.display()))))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
