//! Command-line front end: loads configuration documents, runs the
//! constraint battery and the sweep experiments, and writes the CSV/JSON
//! reports and SVG charts with a manifest per run.
//!
//! Exit code 0 means the run completed; failed tuples are results, not
//! errors, and live in the output files.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use imply_sim::constraints::{self, ConstraintSet, ParamId};
use imply_sim::crossbar::{
    default_placements, initial_states, run_crossbar_sweep, CrossbarConfig, Placement,
    UnselectedPolicy,
};
use imply_sim::report::{
    constraint_report_csv, crossbar_combined_csv, crossbar_outcomes_csv,
    crossbar_summary_json, device_json, gate_json, histogram_csv, parse_csv_line,
    placement_slug, sweep_outcomes_csv, sweep_summary_json, OutputSet,
};
use imply_sim::svg::{axis_bar_from_sweep, render_four_square, render_operating_area, AxisBar};
use imply_sim::sweep::{
    run_sweep, summarize_failures, Family, ParamTuple, SweepOutcome, VariationSpec,
};
use imply_sim::{
    config, Error, GateConfig, MemristorParams, OdeOpts, Result, SchemeId, ThresholdScheme,
};

#[derive(Parser)]
#[command(
    name = "imply-sim",
    version,
    about = "Simulator and constraint engine for memristive IMPLY gates and 1T1R crossbars"
)]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the static and dynamic parameter bounds; optionally render
    /// operating-area charts.
    Constraints(ConstraintsArgs),
    /// Run single-gate variation sweeps over a parameter family.
    SweepGate(SweepGateArgs),
    /// Run the variation sweeps inside an n x n 1T1R crossbar.
    SweepCrossbar(SweepCrossbarArgs),
    /// Report the 1% -> 99% switching time against the configured timestep.
    Calibrate(CalibrateArgs),
    /// Re-render the SVG charts of a previous sweep run from its outputs.
    Plot(PlotArgs),
}

/// Configuration documents shared by every experiment command.
#[derive(Args)]
struct DocArgs {
    /// Devices document (`key = value` lines; `p.`/`q.` prefixes address
    /// one device).
    #[arg(long)]
    devices: Option<PathBuf>,
    /// Gate drive document (v_set, v_cond, v_reset, v_read, r_g, t_step,
    /// switch_on, switch_off).
    #[arg(long)]
    gate: Option<PathBuf>,
}

impl DocArgs {
    fn devices_text(&self) -> Result<String> {
        read_opt(&self.devices)
    }
    fn gate_text(&self) -> Result<String> {
        read_opt(&self.gate)
    }
}

#[derive(Args)]
struct ConstraintsArgs {
    #[command(flatten)]
    docs: DocArgs,
    /// Threshold scheme: 1/2, 1/3 or ttl.
    #[arg(long, default_value = "ttl")]
    scheme: String,
    /// Operating-area chart `X:Y` or `X:Y:XMIN:XMAX:YMIN:YMAX`
    /// (e.g. `R_offP:v_onQ`); repeatable.
    #[arg(long)]
    area: Vec<String>,
    /// Grid points per area axis.
    #[arg(long, default_value_t = 121)]
    grid: usize,
    /// Constraints entering the areas: all, static or dynamic.
    #[arg(long, default_value = "all")]
    set: String,
    /// Overlay simulated verdict bars on the areas at this deviation
    /// magnitude (percent).
    #[arg(long)]
    overlay_delta: Option<f64>,
    #[arg(long, default_value = "out/constraints")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepGateArgs {
    #[command(flatten)]
    docs: DocArgs,
    /// Sweep document (family, scheme, levels as signed fractions,
    /// `<param>.values` absolute lists).
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Parameter family: r, v or k.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Deviation magnitudes in percent, comma-separated (batch of
    /// three-level grids). Defaults to 10,20,30,40,50 unless the sweep
    /// document defines its own grid.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, default_value = "out/sweep-gate")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepCrossbarArgs {
    #[command(flatten)]
    docs: DocArgs,
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Crossbar document (n, line_r, switch_on, switch_off, unselected,
    /// sigma, seed, placements).
    #[arg(long)]
    crossbar: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    /// Array dimension n (n x n).
    #[arg(long)]
    size: Option<usize>,
    /// Gate placements `pr,pc/qr,qc`, semicolon-separated.
    #[arg(long)]
    placements: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sigma of the half-Gaussian background initial states.
    #[arg(long)]
    sigma: Option<f64>,
    /// Line resistance per segment, ohms.
    #[arg(long)]
    line_r: Option<f64>,
    /// Unselected-line policy: floating or grounded.
    #[arg(long)]
    unselected: Option<String>,
    /// Allow array sizes beyond the desk-scale limit (n > 32).
    #[arg(long)]
    long_run: bool,
    #[arg(long, default_value = "out/sweep-crossbar")]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    docs: DocArgs,
    /// Applied set-direction drive in volts (positive sets the device).
    /// Defaults to the configured V_set.
    #[arg(long)]
    drive: Option<f64>,
    #[arg(long, default_value = "out/calibrate")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding a previous sweep run (manifest.json +
    /// outcomes.csv).
    #[arg(long)]
    from: PathBuf,
    /// Where to write the charts (default: the run directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Constraints(args) => cmd_constraints(args),
        Command::SweepGate(args) => cmd_sweep_gate(args),
        Command::SweepCrossbar(args) => cmd_sweep_crossbar(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_opt(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) => Ok(fs::read_to_string(p)?),
        None => Ok(String::new()),
    }
}

/// Percent label for file names: integral magnitudes lose the decimals.
fn pct_label(d: f64) -> String {
    if (d - d.round()).abs() < 1e-9 {
        format!("{:.0}", d.round())
    } else {
        format!("{d}")
    }
}

fn parse_percent_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: f64 = part.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("'{}' is not a percentage", part.trim()))
        })?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "deviation magnitude {v}% must be positive"
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty deviation list".into()));
    }
    Ok(out)
}

/// Append a per-magnitude CSV block under a shared `delta_percent` first
/// column. The label is a bare number, so no quoting interaction.
fn merge_csv(acc: &mut String, block: &str, delta_label: &str) {
    let mut lines = block.lines();
    match lines.next() {
        Some(header) if acc.is_empty() => {
            acc.push_str("delta_percent,");
            acc.push_str(header);
            acc.push('\n');
        }
        _ => {}
    }
    for line in lines {
        acc.push_str(delta_label);
        acc.push(',');
        acc.push_str(line);
        acc.push('\n');
    }
}

enum SweepMode {
    /// Three-level grids at each percent magnitude.
    Batch(Vec<f64>),
    /// One grid straight from the document's level lists.
    Document(VariationSpec),
}

struct SweepSetup {
    family: Family,
    scheme: SchemeId,
    mode: SweepMode,
    nominal: MemristorParams,
    gate: GateConfig,
}

fn resolve_sweep_setup(
    docs: &DocArgs,
    sweep_path: &Option<PathBuf>,
    family_flag: &Option<String>,
    scheme_flag: &Option<String>,
    levels_flag: &Option<String>,
) -> Result<SweepSetup> {
    let devices_text = docs.devices_text()?;
    config::reject_per_device_keys(&devices_text)?;
    let nominal = config::load_baseline(&devices_text, &MemristorParams::nominal())?;
    let gate = config::load_gate(&docs.gate_text()?, &GateConfig::nominal())?;
    gate.validate(&nominal, "the baseline device")?;

    let doc = match sweep_path {
        Some(p) => config::load_sweep(&fs::read_to_string(p)?)?,
        None => Default::default(),
    };
    let family = match family_flag {
        Some(s) => Family::parse(s)?,
        None => doc.family.ok_or(Error::InvalidConfig(
            "no parameter family: pass --family r|v|k or set it in the sweep document".into(),
        ))?,
    };
    let scheme = match scheme_flag {
        Some(s) => SchemeId::parse(s)?,
        None => doc.scheme.unwrap_or(SchemeId::Ttl),
    };
    let document_grid = doc.levels.is_some() || doc.absolute.iter().any(Option::is_some);
    let mode = match levels_flag {
        Some(s) => SweepMode::Batch(parse_percent_list(s)?),
        None if document_grid => {
            let levels = doc.levels.clone().unwrap_or(vec![-0.1, 0.0, 0.1]);
            let mut spec = VariationSpec::new(family, levels, scheme)?;
            spec.absolute = doc.absolute.clone();
            SweepMode::Document(spec)
        }
        None => SweepMode::Batch(vec![10.0, 20.0, 30.0, 40.0, 50.0]),
    };
    Ok(SweepSetup {
        family,
        scheme,
        mode,
        nominal,
        gate,
    })
}

fn sweep_config_snapshot(setup: &SweepSetup) -> Value {
    let mut cfg = json!({
        "family": setup.family.as_str(),
        "scheme": match setup.scheme {
            SchemeId::Half => "1/2",
            SchemeId::Thirds => "1/3",
            SchemeId::Ttl => "ttl",
        },
        "devices": device_json(&setup.nominal),
        "gate": gate_json(&setup.gate),
    });
    match &setup.mode {
        SweepMode::Batch(deltas) => {
            cfg["mode"] = json!("batch");
            cfg["deltas_percent"] = json!(deltas);
        }
        SweepMode::Document(spec) => {
            cfg["mode"] = json!("document");
            cfg["levels"] = json!(spec.levels);
            cfg["absolute"] = json!(spec.absolute);
        }
    }
    cfg
}

fn cmd_sweep_gate(args: SweepGateArgs) -> Result<()> {
    let setup = resolve_sweep_setup(
        &args.docs,
        &args.sweep,
        &args.family,
        &args.scheme,
        &args.levels,
    )?;
    let mut out = OutputSet::new(&args.out)?;
    let mut csv_all = String::new();
    let mut runs: Vec<Value> = Vec::new();

    let mut run_one = |spec: &VariationSpec,
                       delta_pct: Option<f64>,
                       out: &mut OutputSet|
     -> Result<()> {
        let outcomes = run_sweep(spec, &setup.nominal, &setup.gate);
        let failed = outcomes.iter().filter(|o| !o.correct).count();
        let label = delta_pct.map(pct_label).unwrap_or_else(|| "custom".into());
        eprintln!(
            "{} family, {label}: {failed}/{} tuples failed",
            setup.family.as_str(),
            outcomes.len()
        );
        let pairs: Vec<(ParamTuple, bool)> =
            outcomes.iter().map(|o| (o.tuple, o.correct)).collect();
        let chart = render_four_square(&pairs, spec, delta_pct.map(|d| d / 100.0));
        out.write(
            &format!("four_square_{}_{label}.svg", setup.family.as_str()),
            &chart,
        )?;
        merge_csv(
            &mut csv_all,
            &sweep_outcomes_csv(spec, &outcomes),
            &delta_pct.map(pct_label).unwrap_or_default(),
        );
        let summary = summarize_failures(spec, &setup.nominal, &outcomes);
        let mut doc: Value =
            serde_json::from_str(&sweep_summary_json(spec, &outcomes, &summary)?)?;
        if let Some(d) = delta_pct {
            doc["delta_percent"] = json!(d);
        }
        runs.push(doc);
        Ok(())
    };

    match &setup.mode {
        SweepMode::Batch(deltas) => {
            for &d in deltas {
                let spec = VariationSpec::three_level(setup.family, d / 100.0, setup.scheme)?;
                run_one(&spec, Some(d), &mut out)?;
            }
        }
        SweepMode::Document(spec) => run_one(spec, None, &mut out)?,
    }

    out.write("outcomes.csv", &csv_all)?;
    let summary_doc = json!({"kind": "sweep-gate", "runs": runs});
    out.write(
        "summary.json",
        &(serde_json::to_string_pretty(&summary_doc)? + "\n"),
    )?;
    let dir = out.dir().to_path_buf();
    let snapshot = sweep_config_snapshot(&setup);
    let manifest = out.finish("sweep-gate", None, snapshot)?;
    println!(
        "sweep-gate: {} output files under {}",
        manifest.outputs.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_sweep_crossbar(args: SweepCrossbarArgs) -> Result<()> {
    let setup = resolve_sweep_setup(
        &args.docs,
        &args.sweep,
        &args.family,
        &args.scheme,
        &args.levels,
    )?;
    let crossbar_text = read_opt(&args.crossbar);
    let (mut ccfg, doc_placements) =
        config::load_crossbar(&crossbar_text?, &CrossbarConfig::nominal())?;
    if let Some(n) = args.size {
        ccfg.n = n;
    }
    if let Some(seed) = args.seed {
        ccfg.seed = seed;
    }
    if let Some(sigma) = args.sigma {
        ccfg.init_sigma = sigma;
    }
    if let Some(line_r) = args.line_r {
        ccfg.line_r = line_r;
    }
    if let Some(policy) = &args.unselected {
        ccfg.unselected = UnselectedPolicy::parse(policy)?;
    }
    ccfg.validate()?;
    if ccfg.n > 32 && !args.long_run {
        return Err(Error::InvalidConfig(format!(
            "array size {} exceeds the desk-scale limit (32); pass --long-run to accept \
             the runtime",
            ccfg.n
        )));
    }
    let placements: Vec<Placement> = match &args.placements {
        Some(s) => s
            .split(';')
            .map(|p| Placement::parse(p.trim()))
            .collect::<Result<_>>()?,
        None => doc_placements.unwrap_or_else(|| default_placements(ccfg.n)),
    };
    for p in &placements {
        p.validate(ccfg.n)?;
    }

    let background = initial_states(&ccfg);
    let mut out = OutputSet::new(&args.out)?;
    out.write("initial_states.csv", &histogram_csv(&background, 100))?;

    let mut combined_csv = String::new();
    let mut per_placement_csv: Vec<String> = vec![String::new(); placements.len()];
    let mut runs: Vec<Value> = Vec::new();

    let mut run_one = |spec: &VariationSpec,
                       delta_pct: Option<f64>,
                       out: &mut OutputSet|
     -> Result<()> {
        let outcomes = run_crossbar_sweep(
            spec,
            &ccfg,
            &setup.gate,
            &setup.nominal,
            &placements,
            &background,
        )?;
        let failed = outcomes.iter().filter(|o| !o.correct).count();
        let label = delta_pct.map(pct_label).unwrap_or_else(|| "custom".into());
        eprintln!(
            "crossbar {}x{}, {} family, {label}: {failed}/{} tuples failed (worst case \
             over {} placements)",
            ccfg.n,
            ccfg.n,
            setup.family.as_str(),
            outcomes.len(),
            placements.len()
        );
        let pairs: Vec<(ParamTuple, bool)> =
            outcomes.iter().map(|o| (o.tuple, o.correct)).collect();
        let chart = render_four_square(&pairs, spec, delta_pct.map(|d| d / 100.0));
        out.write(
            &format!("four_square_{}_{label}.svg", setup.family.as_str()),
            &chart,
        )?;
        let delta_label = delta_pct.map(pct_label).unwrap_or_default();
        merge_csv(
            &mut combined_csv,
            &crossbar_combined_csv(spec, &placements, &outcomes),
            &delta_label,
        );
        for (i, acc) in per_placement_csv.iter_mut().enumerate() {
            merge_csv(acc, &crossbar_outcomes_csv(spec, &outcomes, i), &delta_label);
        }
        let mut doc: Value =
            serde_json::from_str(&crossbar_summary_json(spec, &placements, &outcomes)?)?;
        if let Some(d) = delta_pct {
            doc["delta_percent"] = json!(d);
        }
        runs.push(doc);
        Ok(())
    };

    match &setup.mode {
        SweepMode::Batch(deltas) => {
            for &d in deltas {
                let spec = VariationSpec::three_level(setup.family, d / 100.0, setup.scheme)?;
                run_one(&spec, Some(d), &mut out)?;
            }
        }
        SweepMode::Document(spec) => run_one(spec, None, &mut out)?,
    }

    out.write("outcomes.csv", &combined_csv)?;
    for (i, p) in placements.iter().enumerate() {
        out.write(
            &format!("outcomes_{}.csv", placement_slug(p)),
            &per_placement_csv[i],
        )?;
    }
    let summary_doc = json!({"kind": "sweep-crossbar", "runs": runs});
    out.write(
        "summary.json",
        &(serde_json::to_string_pretty(&summary_doc)? + "\n"),
    )?;

    let mut snapshot = sweep_config_snapshot(&setup);
    snapshot["kind"] = json!("sweep-crossbar");
    snapshot["crossbar"] = json!({
        "n": ccfg.n,
        "line_r_ohm": ccfg.line_r,
        "switch_on_ohm": ccfg.switch_on,
        "switch_off_ohm": ccfg.switch_off,
        "unselected": ccfg.unselected.as_str(),
        "sigma": ccfg.init_sigma,
        "seed": ccfg.seed,
        "placements": placements.iter().map(|p| p.label()).collect::<Vec<_>>(),
        "long_run": args.long_run,
    });
    let dir = out.dir().to_path_buf();
    let manifest = out.finish("sweep-crossbar", Some(ccfg.seed), snapshot)?;
    println!(
        "sweep-crossbar: {} output files under {}",
        manifest.outputs.len(),
        dir.display()
    );
    Ok(())
}

/// Deviation family that owns one operating-area parameter.
fn family_of(param: ParamId) -> Family {
    match param {
        ParamId::VonP | ParamId::VonQ | ParamId::VoffP | ParamId::VoffQ => Family::Voltage,
        _ => Family::Resistance,
    }
}

fn default_range(param: ParamId, nominal: &MemristorParams) -> (f64, f64) {
    let v = match param {
        ParamId::VonP | ParamId::VonQ => nominal.v_on,
        ParamId::VoffP | ParamId::VoffQ => nominal.v_off,
        ParamId::RonP | ParamId::RonQ => nominal.r_on,
        ParamId::RoffP | ParamId::RoffQ => nominal.r_off,
    };
    let (a, b) = match param {
        ParamId::RoffP | ParamId::RoffQ => (0.2 * v, 1.5 * v),
        ParamId::RonP | ParamId::RonQ => (0.2 * v, 2.0 * v),
        _ => (0.4 * v, 1.6 * v),
    };
    (a.min(b), a.max(b))
}

struct AreaSpec {
    x: ParamId,
    y: ParamId,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

fn parse_area(s: &str, nominal: &MemristorParams) -> Result<AreaSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || {
        Error::InvalidConfig(format!(
            "area '{s}' is not 'X:Y' or 'X:Y:XMIN:XMAX:YMIN:YMAX'"
        ))
    };
    if parts.len() != 2 && parts.len() != 6 {
        return Err(bad());
    }
    let x = ParamId::parse(parts[0])?;
    let y = ParamId::parse(parts[1])?;
    let (x_range, y_range) = if parts.len() == 6 {
        let nums: Vec<f64> = parts[2..]
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        ((nums[0], nums[1]), (nums[2], nums[3]))
    } else {
        (default_range(x, nominal), default_range(y, nominal))
    };
    Ok(AreaSpec {
        x,
        y,
        x_range,
        y_range,
    })
}

fn cmd_constraints(args: ConstraintsArgs) -> Result<()> {
    let scheme_id = SchemeId::parse(&args.scheme)?;
    let scheme = ThresholdScheme::preset(scheme_id);
    let devices_text = args.docs.devices_text()?;
    let baseline = config::load_baseline(&devices_text, &MemristorParams::nominal())?;
    let (p, q) = config::load_devices(&devices_text, &MemristorParams::nominal())?;
    let gate = config::load_gate(&args.docs.gate_text()?, &GateConfig::nominal())?;
    gate.validate(&p, "P")?;
    gate.validate(&q, "Q")?;
    let set = match args.set.as_str() {
        "all" => ConstraintSet::All,
        "static" => ConstraintSet::StaticOnly,
        "dynamic" => ConstraintSet::DynamicOnly,
        other => {
            return Err(Error::InvalidConfig(format!(
                "constraint set '{other}' (all|static|dynamic)"
            )))
        }
    };

    let report = constraints::full_report(&p, &q, &baseline, &gate, &scheme);
    let rg = constraints::rg_bounds(&baseline, &gate)?;
    let satisfied = report.records.iter().filter(|r| r.satisfied).count();
    println!(
        "{} of {} bounds satisfied under the {} scheme",
        satisfied,
        report.records.len(),
        scheme_id.as_str()
    );
    for r in &report.records {
        if !r.satisfied {
            println!(
                "  violated: {} ({} {} {:.6} {})",
                r.id,
                r.parameter,
                r.direction.as_str(),
                r.bound,
                r.unit
            );
        }
    }
    if let Some(rec) = report.get("dynamic_vonq") {
        println!(
            "dynamic v_onQ bound: {:.4} V (actual {:.4} V)",
            rec.bound, rec.actual
        );
    }
    println!("R_G window: {:.3} kohm .. {:.3} kohm", rg.lower / 1e3, rg.upper / 1e3);

    let mut out = OutputSet::new(&args.out)?;
    out.write("constraints_report.csv", &constraint_report_csv(&report))?;
    let json_doc = json!({
        "scheme": scheme_id.as_str(),
        "report": report,
        "rg_bounds": {
            "lower_ohm": rg.lower,
            "upper_ohm": rg.upper,
            "lower_exact_ohm": rg.lower_exact,
            "upper_exact_ohm": rg.upper_exact,
        },
    });
    out.write(
        "constraints_report.json",
        &(serde_json::to_string_pretty(&json_doc)? + "\n"),
    )?;

    // Operating areas, with optional simulated verdict bars along the axes.
    let mut sweep_cache: HashMap<&'static str, (VariationSpec, Vec<SweepOutcome>)> =
        HashMap::new();
    for spec_str in &args.area {
        let area_spec = parse_area(spec_str, &baseline)?;
        let area = constraints::operating_area(
            area_spec.x,
            area_spec.x_range,
            args.grid,
            area_spec.y,
            area_spec.y_range,
            args.grid,
            &p,
            &q,
            &baseline,
            &gate,
            &scheme,
            set,
        )?;
        let mut bars: Vec<AxisBar> = Vec::new();
        if let Some(delta_pct) = args.overlay_delta {
            for param in [area_spec.x, area_spec.y] {
                let family = family_of(param);
                let (spec, outcomes) = match sweep_cache.entry(family.as_str()) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        let spec = VariationSpec::three_level(
                            family,
                            delta_pct / 100.0,
                            scheme_id,
                        )?;
                        let outcomes = run_sweep(&spec, &baseline, &gate);
                        e.insert((spec, outcomes))
                    }
                };
                bars.push(axis_bar_from_sweep(outcomes, spec, &baseline, param)?);
            }
        }
        let chart = render_operating_area(&area, &baseline, &scheme, &bars)?;
        out.write(
            &format!("area_{}_{}.svg", area_spec.x.as_str(), area_spec.y.as_str()),
            &chart,
        )?;
    }

    let snapshot = json!({
        "kind": "constraints",
        "scheme": scheme_id.as_str(),
        "set": args.set,
        "grid": args.grid,
        "areas": args.area,
        "overlay_delta_percent": args.overlay_delta,
        "devices": {"p": device_json(&p), "q": device_json(&q), "baseline": device_json(&baseline)},
        "gate": gate_json(&gate),
    });
    let dir = out.dir().to_path_buf();
    let manifest = out.finish("constraints", None, snapshot)?;
    println!(
        "constraints: {} output files under {}",
        manifest.outputs.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let devices_text = args.docs.devices_text()?;
    config::reject_per_device_keys(&devices_text)?;
    let dev = config::load_baseline(&devices_text, &MemristorParams::nominal())?;
    let gate = config::load_gate(&args.docs.gate_text()?, &GateConfig::nominal())?;
    let drive = args.drive.unwrap_or(gate.v_set);
    // Positive applied drive maps to a negative model voltage; the device
    // sets (state grows) only below its negative set threshold.
    let v_model = -drive;
    let t_max = 1000.0 * gate.t_step;
    let opts = OdeOpts::for_timestep(gate.t_step);

    let (switching, reason, t_switch) = if v_model >= dev.v_on {
        (false, Some("below_threshold"), None)
    } else {
        match dev.time_to_state(0.01, 0.99, v_model, t_max, &opts) {
            Some(t) => (true, None, Some(t)),
            None => (false, Some("timeout"), None),
        }
    };

    match (switching, reason) {
        (true, _) => {
            let t = t_switch.unwrap();
            println!(
                "drive {:.3} V: 1% -> 99% in {:.3} us; configured timestep {:.3} us \
                 (ratio {:.3})",
                drive,
                t * 1e6,
                gate.t_step * 1e6,
                t / gate.t_step
            );
        }
        (false, Some("below_threshold")) => println!(
            "drive {:.3} V: no switching (set threshold magnitude is {:.3} V)",
            drive,
            dev.v_on.abs()
        ),
        _ => println!(
            "drive {:.3} V: no switching within {:.3} ms",
            drive,
            t_max * 1e3
        ),
    }

    let doc = json!({
        "drive_V": drive,
        "model_voltage_V": v_model,
        "switching": switching,
        "reason": reason,
        "t_switch_s": t_switch,
        "t_step_s": gate.t_step,
        "ratio_t_switch_over_t_step": t_switch.map(|t| t / gate.t_step),
    });
    let mut out = OutputSet::new(&args.out)?;
    out.write(
        "calibration.json",
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    let snapshot = json!({
        "kind": "calibrate",
        "drive_V": drive,
        "devices": device_json(&dev),
        "gate": gate_json(&gate),
    });
    out.finish("calibrate", None, snapshot)?;
    Ok(())
}

/// Row-major index back to per-axis level indices.
fn unrank(mut index: usize, lens: &[usize; 4]) -> [usize; 4] {
    let mut out = [0usize; 4];
    for axis in (0..4).rev() {
        out[axis] = index % lens[axis];
        index /= lens[axis];
    }
    out
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let manifest_text = fs::read_to_string(args.from.join("manifest.json"))?;
    let manifest: Value = serde_json::from_str(&manifest_text)?;
    let command = manifest["command"].as_str().unwrap_or_default();
    if command != "sweep-gate" && command != "sweep-crossbar" {
        return Err(Error::InvalidConfig(format!(
            "directory {} holds a '{command}' run; plot needs a sweep run",
            args.from.display()
        )));
    }
    let cfg = &manifest["config"];
    let family = Family::parse(cfg["family"].as_str().unwrap_or_default())?;
    let scheme = SchemeId::parse(cfg["scheme"].as_str().unwrap_or_default())?;

    let csv_text = fs::read_to_string(args.from.join("outcomes.csv"))?;
    let mut lines = csv_text.lines();
    let header = parse_csv_line(lines.next().ok_or(Error::InvalidConfig(
        "outcomes.csv is empty".into(),
    ))?);
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or(Error::InvalidConfig(format!(
                "outcomes.csv lacks a '{name}' column"
            )))
    };
    let delta_col = col("delta_percent")?;
    let index_col = col("index")?;
    let correct_col = col("correct")?;
    let rows: Vec<Vec<String>> = lines.map(parse_csv_line).collect();

    let out_dir = args.out.clone().unwrap_or(args.from.clone());
    let mut out = OutputSet::new(&out_dir)?;
    let mode = cfg["mode"].as_str().unwrap_or("batch");

    let items_for = |spec: &VariationSpec, delta_label: &str| -> Result<Vec<(ParamTuple, bool)>> {
        let lists = spec.value_lists(&MemristorParams::nominal());
        let lens: [usize; 4] = core::array::from_fn(|a| lists[a].len());
        let mut items = Vec::new();
        for row in &rows {
            if row.get(delta_col).map(String::as_str) != Some(delta_label) {
                continue;
            }
            let index: usize = row[index_col].parse().map_err(|_| {
                Error::InvalidConfig(format!("bad index '{}' in outcomes.csv", row[index_col]))
            })?;
            let level_idx = unrank(index, &lens);
            let fractions: [Option<f64>; 4] = core::array::from_fn(|a| {
                if spec.absolute[a].is_some() {
                    None
                } else {
                    Some(spec.levels[level_idx[a]])
                }
            });
            let values: [f64; 4] = core::array::from_fn(|a| lists[a][level_idx[a]]);
            items.push((
                ParamTuple {
                    index,
                    level_idx,
                    fractions,
                    values,
                },
                row[correct_col] == "1",
            ));
        }
        Ok(items)
    };

    let mut written = 0usize;
    if mode == "document" {
        let levels: Vec<f64> = cfg["levels"]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default();
        let mut spec = VariationSpec::new(family, levels, scheme)?;
        if let Some(abs) = cfg["absolute"].as_array() {
            for (axis, v) in abs.iter().enumerate().take(4) {
                if let Some(list) = v.as_array() {
                    spec.absolute[axis] =
                        Some(list.iter().filter_map(Value::as_f64).collect());
                }
            }
        }
        let items = items_for(&spec, "")?;
        let chart = render_four_square(&items, &spec, None);
        out.write(&format!("four_square_{}_custom.svg", family.as_str()), &chart)?;
        written += 1;
    } else {
        let deltas: Vec<f64> = cfg["deltas_percent"]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default();
        if deltas.is_empty() {
            return Err(Error::InvalidConfig(
                "manifest lists no deviation magnitudes".into(),
            ));
        }
        for d in deltas {
            let spec = VariationSpec::three_level(family, d / 100.0, scheme)?;
            let items = items_for(&spec, &pct_label(d))?;
            let chart = render_four_square(&items, &spec, Some(d / 100.0));
            out.write(
                &format!("four_square_{}_{}.svg", family.as_str(), pct_label(d)),
                &chart,
            )?;
            written += 1;
        }
    }
    out.finish_as(
        "plot_manifest.json",
        "plot",
        None,
        json!({"from": args.from.display().to_string()}),
    )?;
    println!("plot: {written} charts under {}", out_dir.display());
    Ok(())
}
