use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use snn_twin::analysis::{
    breakeven_annotations, breakeven_rows, breakeven_spike_rate, default_models, landscape, model_preset, sensitivity,
    write_breakeven_csv, write_breakeven_json, write_sweep_csv, write_sweep_json, BreakevenAnnotations, BreakevenRow,
    OutputFormat, SensitivityGrid, SweepRecord,
};
use snn_twin::energy::{
    builtin, builtins, compute_advantage, data_advantage, total_energy, AdvantageThreshold, EnergyBreakdown,
    HardwareProfile, TransmissionMode, WorkloadConfig, PRESET_NAMES,
};
use snn_twin::rational::{round_sig6, to_decimal_string, to_f64};
use snn_twin::twin::{scenario_sparsity, Scenario};
use snn_twin::verify::{check_rate_bounds, run_verification, RateBoundReport, VerifyConfig, VerifyReport};
use snn_twin::Rational;

use crate::args::{BreakevenArgs, EnergyArgs, LandscapeArgs, PresetsArgs, SweepArgs, VerifyArgs};
use crate::run::{resolve_hw, to_json, write_output, Failure, RunManifest, RunResult};

fn emit(out: Option<&Path>, text: &str) -> RunResult {
    match out {
        Some(path) => write_output(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_or_json<F, G>(format: OutputFormat, csv: F, json: G) -> RunResult<String>
where
    F: FnOnce(&mut Vec<u8>) -> snn_twin::Result<()>,
    G: FnOnce(&mut Vec<u8>) -> snn_twin::Result<()>,
{
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => csv(&mut buf)?,
        OutputFormat::Json => json(&mut buf)?,
    }
    Ok(String::from_utf8(buf).expect("writers emit UTF-8"))
}

// ---------------------------------------------------------------- energy

#[derive(Debug, Serialize)]
struct WorkloadView {
    n_src: u64,
    #[serde(rename = "T")]
    window: u32,
    s_r: String,
    gamma: String,
    weight_bits: u32,
    activation_bits: u32,
}

#[derive(Debug, Serialize)]
struct BreakdownView {
    compute_pj: f64,
    data_pj: f64,
    total_pj: f64,
    mode: String,
    membrane_update_pj: f64,
    spiking_ops_pj: f64,
    active_macs_pj: f64,
    clamping_pj: f64,
    activation_move_pj: f64,
    weight_fetch_pj: f64,
}

impl From<&EnergyBreakdown> for BreakdownView {
    fn from(b: &EnergyBreakdown) -> Self {
        Self {
            compute_pj: to_f64(&b.compute_pj),
            data_pj: to_f64(&b.data_pj),
            total_pj: to_f64(&b.total_pj),
            mode: b.mode_label(),
            membrane_update_pj: to_f64(&b.terms.membrane_update),
            spiking_ops_pj: to_f64(&b.terms.spiking_ops),
            active_macs_pj: to_f64(&b.terms.active_macs),
            clamping_pj: to_f64(&b.terms.clamping),
            activation_move_pj: to_f64(&b.terms.activation_move),
            weight_fetch_pj: to_f64(&b.terms.weight_fetch),
        }
    }
}

#[derive(Debug, Serialize)]
struct ComputeView {
    holds: bool,
    margin: f64,
    closed_form: bool,
    exact: bool,
}

#[derive(Debug, Serialize)]
struct DataView {
    scenario: Scenario,
    qnn_mode: TransmissionMode,
    holds: bool,
    threshold: String,
    degenerate: bool,
}

fn threshold_label(t: &AdvantageThreshold) -> String {
    match t {
        AdvantageThreshold::Always => "always".into(),
        AdvantageThreshold::MinSparsity(g) => format!("gamma >= {}", round_sig6(to_f64(g))),
        AdvantageThreshold::MaxWindow(b) => format!("T <= {}", round_sig6(to_f64(b))),
        AdvantageThreshold::Unbounded => "unbounded".into(),
    }
}

#[derive(Debug, Serialize)]
struct EnergyReport {
    manifest: RunManifest,
    workload: WorkloadView,
    hw: String,
    snn: BreakdownView,
    qnn: BreakdownView,
    e_snn_total_pj: f64,
    e_qnn_total_pj: f64,
    ratio: Option<f64>,
    ratio_exact: Option<String>,
    compute_advantage: ComputeView,
    data_advantage: Vec<DataView>,
}

fn gamma_for(
    window: u32,
    spike_rate: &Rational,
    gamma: Option<&Rational>,
    scenario: Option<Scenario>,
) -> RunResult<Rational> {
    match (gamma, scenario) {
        (Some(g), _) => Ok(g.clone()),
        (None, Some(s)) => Ok(scenario_sparsity(spike_rate, window, s)?),
        (None, None) => Err(Failure::config("give --gamma or --scenario")),
    }
}

fn workload(args: &EnergyArgs) -> RunResult<(WorkloadConfig, String)> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(anyhow::Error::new(e).context(format!("reading {}", path.display()))))?;
        let cfg: WorkloadConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("invalid workload {}: {e}", path.display())))?;
        cfg.validate()?;
        return Ok((cfg, "custom".into()));
    }
    let (name, window, spike_rate) = match &args.model {
        Some(name) => {
            let m = model_preset(name).ok_or_else(|| {
                let names: Vec<_> = default_models().into_iter().map(|m| m.name).collect();
                Failure::config(format!("unknown model preset '{name}' (known: {})", names.join(", ")))
            })?;
            (m.name, m.window, m.spike_rate)
        }
        None => {
            let window = args
                .window
                .ok_or_else(|| Failure::config("give --T, --model or --config"))?;
            let rate = args
                .spike_rate
                .clone()
                .ok_or_else(|| Failure::config("give --s-r, --model or --config"))?;
            ("custom".to_string(), window, rate)
        }
    };
    let gamma = gamma_for(window, &spike_rate, args.gamma.as_ref(), args.scenario)?;
    Ok((
        WorkloadConfig::new(args.n_src, window, spike_rate, gamma, args.weight_bits)?,
        name,
    ))
}

pub fn energy(args: EnergyArgs, profile_dir: Option<&Path>) -> RunResult {
    let mut manifest = RunManifest::new("energy");
    manifest.config = args.config.clone();
    manifest.hw = vec![args.hw.hw.clone()];
    let (manifest, format) = manifest.with_output(args.out.out.as_deref(), args.out.format, OutputFormat::Json)?;
    let hw = resolve_hw(&args.hw.hw, profile_dir, args.hw.mac_scale.as_ref())?;
    let (cfg, model) = workload(&args)?;
    let twin = total_energy(&cfg, &hw, args.snn_mode)?;
    let compute = compute_advantage(&cfg, &hw, args.exact)?;
    let mut data = Vec::new();
    for scenario in Scenario::ALL {
        for qnn_mode in [TransmissionMode::Sparse, TransmissionMode::Dense] {
            let d = data_advantage(&cfg, &hw, scenario, qnn_mode)?;
            data.push(DataView {
                scenario,
                qnn_mode,
                holds: d.holds,
                threshold: threshold_label(&d.threshold),
                degenerate: d.degenerate,
            });
        }
    }
    let report = EnergyReport {
        manifest,
        workload: WorkloadView {
            n_src: cfg.n_src,
            window: cfg.window,
            s_r: to_decimal_string(&cfg.spike_rate),
            gamma: to_decimal_string(&cfg.gamma),
            weight_bits: cfg.weight_bits,
            activation_bits: cfg.activation_bits(),
        },
        hw: hw.name.clone(),
        snn: (&twin.snn).into(),
        qnn: (&twin.qnn).into(),
        e_snn_total_pj: to_f64(&twin.snn.total_pj),
        e_qnn_total_pj: to_f64(&twin.qnn.total_pj),
        ratio: twin.ratio(),
        ratio_exact: twin.exact_ratio().map(|r| to_decimal_string(&r)),
        compute_advantage: ComputeView {
            holds: compute.holds,
            margin: to_f64(&compute.margin),
            closed_form: compute.closed_form,
            exact: args.exact,
        },
        data_advantage: data,
    };

    if let Some(path) = &args.out.out {
        let text = match format {
            OutputFormat::Json => to_json(&report),
            OutputFormat::Csv => {
                let record = SweepRecord {
                    model,
                    hw: hw.name.clone(),
                    scenario: args.scenario,
                    window: cfg.window,
                    spike_rate: cfg.spike_rate.clone(),
                    gamma: Some(cfg.gamma.clone()),
                    n_src: cfg.n_src,
                    weight_bits: cfg.weight_bits,
                    activation_bits: cfg.activation_bits(),
                    energy: Some(twin.clone()),
                    advantage: None,
                    infeasible: None,
                };
                let mut buf = Vec::new();
                write_sweep_csv(&[record], &mut buf)?;
                String::from_utf8(buf).expect("csv is UTF-8")
            }
        };
        write_output(path, text.as_bytes())?;
    }
    if args.json {
        print!("{}", to_json(&report));
    } else {
        print!("{}", energy_text(&report));
    }
    Ok(())
}

fn energy_text(r: &EnergyReport) -> String {
    let w = &r.workload;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "hw={}  N_src={}  T={}  s_r={}  gamma={}  weight_bits={}  activation_bits={}",
        r.hw, w.n_src, w.window, w.s_r, w.gamma, w.weight_bits, w.activation_bits
    );
    let _ = writeln!(
        s,
        "{:<4} {:>14} {:>14} {:>14}  mode",
        "", "compute_pj", "data_pj", "total_pj"
    );
    for (name, b) in [("SNN", &r.snn), ("QNN", &r.qnn)] {
        let _ = writeln!(
            s,
            "{name:<4} {:>14.6} {:>14.6} {:>14.6}  {}",
            b.compute_pj, b.data_pj, b.total_pj, b.mode
        );
    }
    match r.ratio {
        Some(x) => {
            let _ = writeln!(s, "E_SNN/E_QNN = {}", round_sig6(x));
        }
        None => {
            let _ = writeln!(s, "E_SNN/E_QNN undefined (QNN energy is zero)");
        }
    }
    let c = &r.compute_advantage;
    let _ = writeln!(
        s,
        "compute advantage: {} (margin {}{})",
        if c.holds { "holds" } else { "fails" },
        round_sig6(c.margin),
        if c.closed_form { "" } else { ", direct comparison" }
    );
    let _ = writeln!(s, "sparse SNN data advantage:");
    for d in &r.data_advantage {
        let _ = writeln!(
            s,
            "  {:<8} vs {:<6} QNN: {:<5} ({}{})",
            d.scenario.as_str(),
            d.qnn_mode.as_str(),
            d.holds,
            d.threshold,
            if d.degenerate { ", degenerate" } else { "" }
        );
    }
    s
}

// ---------------------------------------------------------------- breakeven

#[derive(Debug, Serialize)]
struct BreakevenReport {
    manifest: RunManifest,
    rows: Vec<BreakevenRow>,
    annotations: BreakevenAnnotations,
}

pub fn breakeven(args: BreakevenArgs, profile_dir: Option<&Path>) -> RunResult {
    let mut manifest = RunManifest::new("breakeven");
    manifest.hw = vec![args.hw.hw.clone()];
    let (manifest, format) = manifest.with_output(args.out.out.as_deref(), args.out.format, OutputFormat::Csv)?;
    let hw = resolve_hw(&args.hw.hw, profile_dir, args.hw.mac_scale.as_ref())?;
    let results = args
        .windows
        .iter()
        .map(|&t| breakeven_spike_rate(t, args.n_src, &args.gamma, args.weight_bits, &hw))
        .collect::<snn_twin::Result<Vec<_>>>()?;
    let rows = breakeven_rows(&hw.name, &results);
    let annotations = breakeven_annotations(args.n_src, &args.gamma, args.weight_bits, &hw)?;

    if let Some(path) = &args.out.out {
        let text = csv_or_json(
            format,
            |b| write_breakeven_csv(&rows, b),
            |b| write_breakeven_json(&rows, b),
        )?;
        write_output(path, text.as_bytes())?;
    }
    let report = BreakevenReport {
        manifest,
        rows,
        annotations,
    };
    if args.json {
        print!("{}", to_json(&report));
        return Ok(());
    }
    println!(
        "hw={}  N_src={}  gamma={}  weight_bits={}",
        hw.name,
        args.n_src,
        to_decimal_string(&args.gamma),
        args.weight_bits
    );
    println!("{:>4} {:>5} {:>12}  {:<8} outcome", "T", "bits", "s*", "segment");
    for r in &report.rows {
        let star = r.s_star.map_or_else(|| "none".to_string(), |s| format!("{:.6}", s));
        let reason = match r.outcome.as_str() {
            "no-feasible-rate" => " (SNN costs more than the QNN even at s_r = 0)",
            "snn-always-cheaper" => " (SNN cheaper at every rate up to 1)",
            _ => "",
        };
        println!(
            "{:>4} {:>5} {:>12}  {:<8} {}{}",
            r.window,
            r.activation_bits,
            star,
            r.segment.as_deref().unwrap_or("-"),
            r.outcome,
            reason
        );
    }
    let a = &report.annotations;
    let show = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |v| format!("{v:.4}"));
    println!("max s* over T in 5..=10: {}", show(a.max_s_star_t5_to_t10));
    println!("max s* over T in 6..=10: {}", show(a.max_s_star_above_t5));
    println!("max s* over T in 1..=4:  {}", show(a.max_s_star_below_t5));
    Ok(())
}

// ---------------------------------------------------------------- sweep / landscape

fn breakeven_sibling(out: &Path, format: OutputFormat) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    out.with_file_name(format!("{stem}_breakeven.{ext}"))
}

pub fn sweep(args: SweepArgs, profile_dir: Option<&Path>) -> RunResult {
    let mut manifest = RunManifest::new("sweep");
    manifest.hw = vec![args.hw.hw.clone()];
    let (_, format) = manifest.with_output(args.out.out.as_deref(), args.out.format, OutputFormat::Csv)?;
    let hw = resolve_hw(&args.hw.hw, profile_dir, args.hw.mac_scale.as_ref())?;
    let grid = SensitivityGrid {
        windows: args.windows,
        spike_rates: args.spike_rates,
        weight_bits: args.weight_bits,
        n_srcs: args.n_src,
    };
    let report = sensitivity(&grid, &hw, &args.gamma)?;
    let text = csv_or_json(
        format,
        |b| write_sweep_csv(&report.records, b),
        |b| write_sweep_json(&report.records, b),
    )?;
    let rows = breakeven_rows(&hw.name, &report.breakevens);
    let be_text = csv_or_json(
        format,
        |b| write_breakeven_csv(&rows, b),
        |b| write_breakeven_json(&rows, b),
    )?;
    emit(args.out.out.as_deref(), &text)?;
    let be_path = args
        .breakeven_out
        .or_else(|| args.out.out.as_deref().map(|p| breakeven_sibling(p, format)));
    match be_path {
        Some(path) => {
            write_output(&path, be_text.as_bytes())?;
            eprintln!(
                "{} grid rows, {} breakeven rows -> {}",
                report.records.len(),
                rows.len(),
                path.display()
            );
        }
        None => print!("{be_text}"),
    }
    Ok(())
}

pub fn landscape_cmd(args: LandscapeArgs, profile_dir: Option<&Path>) -> RunResult {
    let names: Vec<String> = if args.hw.is_empty() {
        PRESET_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.hw.clone()
    };
    let mut manifest = RunManifest::new("landscape");
    manifest.hw = names.clone();
    let (_, format) = manifest.with_output(args.out.out.as_deref(), args.out.format, OutputFormat::Csv)?;
    let hws = names
        .iter()
        .map(|n| resolve_hw(n, profile_dir, args.mac_scale.as_ref()))
        .collect::<RunResult<Vec<HardwareProfile>>>()?;
    let records = landscape(&default_models(), &hws, &Scenario::ALL, args.n_src, args.weight_bits)?;
    let text = csv_or_json(
        format,
        |b| write_sweep_csv(&records, b),
        |b| write_sweep_json(&records, b),
    )?;
    emit(args.out.out.as_deref(), &text)?;
    for r in records.iter().filter(|r| !r.feasible()) {
        eprintln!(
            "infeasible: {} / {} / {}: {}",
            r.model,
            r.hw,
            r.scenario.map_or("-", Scenario::as_str),
            r.infeasible.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Serialize)]
struct VerifyOutput {
    manifest: RunManifest,
    spike_count: VerifyReport,
    premise_violation_rate: f64,
    spike_rate_bounds: Option<RateBoundReport>,
    passed: bool,
}

pub fn verify(args: VerifyArgs) -> RunResult {
    let mut manifest = RunManifest::new("verify");
    manifest.seed = Some(args.seed);
    let (manifest, format) = manifest.with_output(args.out.out.as_deref(), args.out.format, OutputFormat::Json)?;
    if format == OutputFormat::Csv {
        return Err(Failure::config("verify writes JSON only"));
    }
    let cfg = VerifyConfig {
        trials: args.trials,
        seed: args.seed,
        max_inputs: args.max_inputs,
        max_window: args.max_window,
        max_weight: args.max_weight,
    };
    let report = run_verification(&cfg)?;
    let rates = if args.rate_trials > 0 {
        Some(check_rate_bounds(args.rate_trials, args.seed)?)
    } else {
        None
    };
    let passed = report.passed() && rates.as_ref().is_none_or(RateBoundReport::passed);
    let out = VerifyOutput {
        manifest,
        premise_violation_rate: report.premise_violation_rate(),
        spike_count: report,
        spike_rate_bounds: rates,
        passed,
    };
    if let Some(path) = &args.out.out {
        write_output(path, to_json(&out).as_bytes())?;
    }
    if args.json {
        print!("{}", to_json(&out));
    } else {
        let r = &out.spike_count;
        println!("trials: {}  seed: {}", r.trials, r.seed);
        println!(
            "premise held: {}  violated: {} ({:.2}%)",
            r.premise_ok,
            r.premise_violated,
            100.0 * out.premise_violation_rate
        );
        println!("closed-form mismatches (premise held): {}", r.oracle_mismatches);
        println!("twin mismatches (premise held):        {}", r.equivalence_mismatches);
        println!("potential bound violations:            {}", r.potential_violations);
        println!("residual bound violations:             {}", r.residual_violations);
        println!("telescoping failures:                  {}", r.telescoping_failures);
        println!(
            "mismatches outside premise (reported): {}",
            r.mismatches_outside_premise
        );
        println!(
            "max |eps|: {:.6}  max |n_sim - n_closed|: {}",
            r.max_abs_residual, r.max_count_deviation
        );
        if let Some(b) = &out.spike_rate_bounds {
            println!(
                "spike-rate bounds: {} vectors, {} violations, {}/{} extremal misses",
                b.trials, b.violations, b.extremal_misses, b.extremal_checked
            );
        }
        println!("{}", if out.passed { "PASS" } else { "FAIL" });
    }
    if out.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} closed-form and {} twin mismatches with the premise satisfied",
            out.spike_count.oracle_mismatches, out.spike_count.equivalence_mismatches
        )))
    }
}

// ---------------------------------------------------------------- presets

pub fn presets(args: PresetsArgs, profile_dir: Option<&Path>) -> RunResult {
    if let Some(name) = args.show {
        let hw = resolve_hw(&name, profile_dir, None)?;
        println!("{}", hw.to_json());
        return Ok(());
    }
    println!("hardware profiles:");
    for hw in builtins() {
        println!(
            "  {:<22} E_ACC={} pJ  sparse move={} pJ/bit  dense move={} pJ/bit",
            hw.name,
            to_decimal_string(&hw.e_acc),
            to_decimal_string(&hw.e_move_sparse),
            to_decimal_string(&hw.e_move_dense)
        );
    }
    if let Some(dir) = profile_dir {
        let mut extra: Vec<String> = std::fs::read_dir(dir)
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
                    .collect()
            })
            .unwrap_or_default();
        extra.sort();
        for name in extra {
            let tag = if builtin(&name).is_some() {
                " (overrides built-in)"
            } else {
                ""
            };
            println!("  {name:<22} from {}{tag}", dir.display());
        }
    }
    println!("model presets:");
    for m in default_models() {
        println!(
            "  {:<22} T={:<3} s_r={}",
            m.name,
            m.window,
            to_decimal_string(&m.spike_rate)
        );
    }
    Ok(())
}
