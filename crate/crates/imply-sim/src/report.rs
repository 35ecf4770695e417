//! Report files: CSV tables, JSON summaries and the run manifest.
//!
//! The CSV layer is deliberately small (quote-when-needed escaping, one
//! writer helper); the tables here are flat and append-only, so a full CSV
//! dependency would buy nothing. JSON goes through serde.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::constraints::ConstraintReport;
use crate::crossbar::{CrossbarSweepOutcome, Placement};
use crate::device::MemristorParams;
use crate::error::Result;
use crate::gate::FailureStage;
use crate::sweep::{FailureSummary, SweepOutcome, VariationSpec};

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    let mut first = true;
    for c in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&field(c));
        first = false;
    }
    out.push('\n');
}

/// Split one CSV line produced by this module back into fields,
/// unescaping quoted cells.
pub fn parse_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (false, ',') => fields.push(std::mem::take(&mut cur)),
            (false, '"') if cur.is_empty() => quoted = true,
            (true, '"') => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            (_, c) => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

fn stage_str(stage: Option<FailureStage>) -> String {
    match stage {
        None => String::new(),
        Some(FailureStage::Initialization) => "initialization".into(),
        Some(FailureStage::Operation) => "operation".into(),
    }
}

fn opt_bool(b: Option<bool>) -> String {
    match b {
        None => "undefined".into(),
        Some(true) => "1".into(),
        Some(false) => "0".into(),
    }
}

fn tuple_header(spec: &VariationSpec, out: &mut Vec<String>) {
    out.push("index".into());
    for name in spec.family.param_names() {
        out.push(format!("{name}_frac"));
        out.push(format!("{name}_value"));
    }
}

fn tuple_cells(tuple: &crate::sweep::ParamTuple, out: &mut Vec<String>) {
    out.push(tuple.index.to_string());
    for axis in 0..4 {
        out.push(tuple.fractions[axis].map(num).unwrap_or_default());
        out.push(num(tuple.values[axis]));
    }
}

const CASE_LABELS: [&str; 4] = ["00", "01", "10", "11"];

/// One row per tuple of a single-gate sweep: the applied deviations, the
/// verdict with its stage, the analytical prediction, and the per-case
/// measured states.
pub fn sweep_outcomes_csv(spec: &VariationSpec, outcomes: &[SweepOutcome]) -> String {
    let mut header: Vec<String> = Vec::new();
    tuple_header(spec, &mut header);
    header.extend(
        ["correct", "failure_stage", "predicted_ok", "diagnostic"]
            .map(String::from),
    );
    for label in CASE_LABELS {
        for col in ["output", "output_ok", "p_survived", "inputs_valid", "sp", "sq"] {
            header.push(format!("case{label}_{col}"));
        }
    }
    let mut out = String::new();
    push_row(&mut out, &header);
    for o in outcomes {
        let mut cells: Vec<String> = Vec::new();
        tuple_cells(&o.tuple, &mut cells);
        cells.push((o.correct as u8).to_string());
        cells.push(stage_str(o.failure_stage));
        cells.push(opt_bool(o.predicted_ok));
        cells.push(o.diagnostic.clone().unwrap_or_default());
        match &o.table {
            Some(table) => {
                for c in &table.cases {
                    cells.push(opt_bool(c.output));
                    cells.push((c.output_correct as u8).to_string());
                    cells.push((c.p_survived as u8).to_string());
                    cells.push((c.init_inputs_valid as u8).to_string());
                    cells.push(num(c.s_p_measured));
                    cells.push(num(c.s_q_measured));
                }
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 24)),
        }
        push_row(&mut out, &cells);
    }
    out
}

/// Aggregate counts for a single-gate sweep, including the per-level
/// failure shares and how often the analytical prediction agreed with the
/// simulation.
pub fn sweep_summary_json(
    spec: &VariationSpec,
    outcomes: &[SweepOutcome],
    summary: &FailureSummary,
) -> Result<String> {
    let mut stage_counts = BTreeMap::new();
    for o in outcomes {
        if let Some(stage) = o.failure_stage {
            *stage_counts.entry(stage_str(Some(stage))).or_insert(0u64) += 1;
        }
    }
    let mut agree = 0u64;
    let mut sim_fail_pred_pass = 0u64;
    let mut sim_pass_pred_fail = 0u64;
    let mut unpredicted = 0u64;
    for o in outcomes {
        match o.predicted_ok {
            Some(p) if p == o.correct => agree += 1,
            Some(true) => sim_fail_pred_pass += 1,
            Some(false) => sim_pass_pred_fail += 1,
            None => unpredicted += 1,
        }
    }
    let shares: Vec<Value> = summary
        .shares
        .iter()
        .map(|s| {
            json!({
                "param": s.param,
                "level_index": s.level_idx,
                "level": s.level_value,
                "relative": s.relative,
                "failed": s.failed,
                "tuples": s.tuples,
                "fraction_of_all": s.fraction_of_all,
                "always_fails": s.always_fails,
            })
        })
        .collect();
    let flagged: Vec<Value> = summary
        .shares
        .iter()
        .filter(|s| s.always_fails)
        .map(|s| json!({"param": s.param, "level": s.level_value}))
        .collect();
    let doc = json!({
        "kind": "sweep-gate",
        "family": spec.family.as_str(),
        "scheme": spec.scheme.as_str(),
        "levels": spec.levels,
        "unit": spec.family.unit(),
        "total": summary.total,
        "failed": summary.failed,
        "passed": summary.total - summary.failed,
        "failure_stages": stage_counts,
        "prediction": {
            "agree": agree,
            "sim_fail_pred_pass": sim_fail_pred_pass,
            "sim_pass_pred_fail": sim_pass_pred_fail,
            "unavailable": unpredicted,
        },
        "always_failing_levels": flagged,
        "shares": shares,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Filesystem-safe placement name: `0,0/15,15` -> `0-0_15-15`.
pub fn placement_slug(p: &Placement) -> String {
    p.label().replace(',', "-").replace('/', "_")
}

/// Per-placement crossbar sweep table: same tuple columns as the gate
/// table plus the placement and the array-level case measurements.
pub fn crossbar_outcomes_csv(
    spec: &VariationSpec,
    outcomes: &[CrossbarSweepOutcome],
    placement_index: usize,
) -> String {
    let mut header: Vec<String> = Vec::new();
    tuple_header(spec, &mut header);
    header.extend(
        ["placement", "correct", "failure_stage", "predicted_ok", "diagnostic"]
            .map(String::from),
    );
    for label in CASE_LABELS {
        for col in [
            "output",
            "output_ok",
            "p_survived",
            "inputs_valid",
            "sp",
            "sq",
            "v_g_start",
            "background_quiet",
        ] {
            header.push(format!("case{label}_{col}"));
        }
    }
    let mut out = String::new();
    push_row(&mut out, &header);
    for o in outcomes {
        let Some(po) = o.placements.get(placement_index) else {
            continue;
        };
        let mut cells: Vec<String> = Vec::new();
        tuple_cells(&o.tuple, &mut cells);
        cells.push(po.placement.label());
        cells.push((po.correct as u8).to_string());
        cells.push(stage_str(po.failure_stage));
        cells.push(opt_bool(o.predicted_ok));
        cells.push(po.diagnostic.clone().unwrap_or_default());
        match &po.table {
            Some(table) => {
                for c in &table.cases {
                    cells.push(opt_bool(c.output));
                    cells.push((c.output_correct as u8).to_string());
                    cells.push((c.p_survived as u8).to_string());
                    cells.push((c.init_inputs_valid as u8).to_string());
                    cells.push(num(c.s_p_measured));
                    cells.push(num(c.s_q_measured));
                    cells.push(num(c.v_g_start));
                    cells.push((c.background_quiet as u8).to_string());
                }
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 32)),
        }
        push_row(&mut out, &cells);
    }
    out
}

/// Combined crossbar table: the worst-case verdict over all placements per
/// tuple, with each placement's verdict alongside.
pub fn crossbar_combined_csv(
    spec: &VariationSpec,
    placements: &[Placement],
    outcomes: &[CrossbarSweepOutcome],
) -> String {
    let mut header: Vec<String> = Vec::new();
    tuple_header(spec, &mut header);
    header.extend(["correct", "failure_stage", "predicted_ok"].map(String::from));
    for p in placements {
        header.push(format!("ok_{}", placement_slug(p)));
    }
    let mut out = String::new();
    push_row(&mut out, &header);
    for o in outcomes {
        let mut cells: Vec<String> = Vec::new();
        tuple_cells(&o.tuple, &mut cells);
        cells.push((o.correct as u8).to_string());
        cells.push(stage_str(o.failure_stage));
        cells.push(opt_bool(o.predicted_ok));
        for i in 0..placements.len() {
            cells.push(
                o.placements
                    .get(i)
                    .map(|p| (p.correct as u8).to_string())
                    .unwrap_or_default(),
            );
        }
        push_row(&mut out, &cells);
    }
    out
}

/// Crossbar sweep aggregates: worst-case counts plus per-placement counts.
pub fn crossbar_summary_json(
    spec: &VariationSpec,
    placements: &[Placement],
    outcomes: &[CrossbarSweepOutcome],
) -> Result<String> {
    let total = outcomes.len();
    let failed = outcomes.iter().filter(|o| !o.correct).count();
    let per_placement: Vec<Value> = placements
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f = outcomes
                .iter()
                .filter(|o| o.placements.get(i).map(|po| !po.correct).unwrap_or(true))
                .count();
            json!({"placement": p.label(), "failed": f, "total": total})
        })
        .collect();
    let mut agree = 0u64;
    let mut disagree = 0u64;
    for o in outcomes {
        match o.predicted_ok {
            Some(p) if p == o.correct => agree += 1,
            Some(_) => disagree += 1,
            None => {}
        }
    }
    let doc = json!({
        "kind": "sweep-crossbar",
        "family": spec.family.as_str(),
        "scheme": spec.scheme.as_str(),
        "levels": spec.levels,
        "total": total,
        "failed": failed,
        "passed": total - failed,
        "per_placement": per_placement,
        "prediction": {"agree": agree, "disagree": disagree},
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Histogram of initial device states over [0, 1].
pub fn histogram_csv(values: &[f64], bins: usize) -> String {
    let mut counts = vec![0u64; bins.max(1)];
    for &v in values {
        let i = ((v.clamp(0.0, 1.0)) * bins as f64) as usize;
        counts[i.min(bins - 1)] += 1;
    }
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in counts.iter().enumerate() {
        let lo = i as f64 / bins as f64;
        let hi = (i + 1) as f64 / bins as f64;
        push_row(&mut out, &[num(lo), num(hi), c.to_string()]);
    }
    out
}

/// Constraint battery as a flat table, one row per bound.
pub fn constraint_report_csv(report: &ConstraintReport) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        &[
            "id", "parameter", "unit", "direction", "bound", "actual", "margin",
            "satisfied", "status", "inputs",
        ]
        .map(String::from),
    );
    for r in &report.records {
        push_row(
            &mut out,
            &[
                r.id.clone(),
                r.parameter.clone(),
                r.unit.clone(),
                r.direction.as_str().into(),
                num(r.bound),
                num(r.actual),
                num(r.margin),
                (r.satisfied as u8).to_string(),
                format!("{:?}", r.status).to_ascii_lowercase(),
                r.inputs.clone(),
            ],
        );
    }
    out
}

pub fn constraint_report_json(report: &ConstraintReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// Flat snapshot of a device parameter set with explicit units, for the
/// manifest's resolved-config block.
pub fn device_json(p: &MemristorParams) -> Value {
    json!({
        "v_on_V": p.v_on,
        "v_off_V": p.v_off,
        "r_on_ohm": p.r_on,
        "r_off_ohm": p.r_off,
        "k_on_nm_per_s": p.k_on,
        "k_off_nm_per_s": p.k_off,
        "alpha_on": p.alpha_on,
        "alpha_off": p.alpha_off,
        "w_on_nm": p.w_on,
        "w_off_nm": p.w_off,
        "a_on_nm": p.a_on,
        "a_off_nm": p.a_off,
        "w_c_nm": p.w_c,
    })
}

/// Flat snapshot of a gate drive configuration with explicit units.
pub fn gate_json(cfg: &crate::gate::GateConfig) -> Value {
    json!({
        "v_set_V": cfg.v_set,
        "v_cond_V": cfg.v_cond,
        "v_reset_V": cfg.v_reset,
        "v_read_V": cfg.v_read,
        "r_g_ohm": cfg.r_g,
        "t_step_s": cfg.t_step,
        "switch_on_ohm": cfg.switch_on,
        "switch_off_ohm": cfg.switch_off,
    })
}

/// Record of one command invocation: resolved configuration, seed, tool
/// version and a content digest per output file. Re-running the same
/// version with this configuration reproduces the digests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: Value,
    /// File name -> sha256 of the content, sorted by name.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(content: &str) -> String {
    hex::encode(Sha256::digest(content.as_bytes()))
}

/// Collects output files under one directory and assembles the manifest.
pub struct OutputSet {
    dir: PathBuf,
    digests: BTreeMap<String, String>,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            digests: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one output file and record its digest.
    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.digests.insert(name.to_string(), sha256_hex(content));
        Ok(path)
    }

    /// Write `manifest.json` describing everything written so far and
    /// return the manifest.
    pub fn finish(
        self,
        command: &str,
        seed: Option<u64>,
        config: Value,
    ) -> Result<RunManifest> {
        self.finish_as("manifest.json", command, seed, config)
    }

    /// As [`finish`](Self::finish) under a different file name, so a
    /// re-plot does not clobber the original run's manifest.
    pub fn finish_as(
        self,
        file_name: &str,
        command: &str,
        seed: Option<u64>,
        config: Value,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: "imply-sim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            outputs: self.digests,
        };
        let body = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.dir.join(file_name), body)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{Family, ParamTuple};
    use crate::thresholds::SchemeId;

    #[test]
    fn csv_quoting_round_trips_commas_and_quotes() {
        let cells = ["plain".to_string(), "a,b".into(), "say \"hi\"".into()];
        let mut out = String::new();
        push_row(&mut out, &cells);
        assert_eq!(out, "plain,\"a,b\",\"say \"\"hi\"\"\"\n");
        assert_eq!(parse_csv_line(out.trim_end()), cells.to_vec());
    }

    #[test]
    fn histogram_bins_cover_unit_interval() {
        let values = [0.0, 0.004, 0.999, 1.0, 0.5];
        let csv = histogram_csv(&values, 100);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 101);
        let total: u64 = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, values.len() as u64);
        // 1.0 lands in the last bin, not a phantom 101st.
        assert!(lines[100].ends_with(",2"));
        assert!(lines[1].starts_with("0,0.01,") && lines[1].ends_with(",2"));
    }

    #[test]
    fn outcome_csv_has_one_row_per_tuple() {
        let spec =
            VariationSpec::three_level(Family::Voltage, 0.10, SchemeId::Ttl).unwrap();
        let outcomes = vec![SweepOutcome {
            tuple: ParamTuple {
                index: 7,
                level_idx: [0, 1, 2, 1],
                fractions: [Some(-0.1), Some(0.0), Some(0.1), Some(0.0)],
                values: [-0.63, 0.01, -0.77, 0.01],
            },
            table: None,
            correct: false,
            failure_stage: None,
            predicted_ok: Some(false),
            diagnostic: Some("invalid parameters: r_on".into()),
        }];
        let csv = sweep_outcomes_csv(&spec, &outcomes);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0].split(',').count(),
            lines[1].split(',').count(),
            "header and row column counts must match"
        );
        assert!(lines[1].starts_with("7,-0.1,-0.63,"));
    }

    #[test]
    fn manifest_digests_are_reproducible() {
        let base = std::env::temp_dir().join(format!("imply-sim-report-{}", std::process::id()));
        let mut digests = Vec::new();
        for sub in ["a", "b"] {
            let mut set = OutputSet::new(base.join(sub)).unwrap();
            set.write("outcomes.csv", "index,correct\n0,1\n").unwrap();
            let manifest = set
                .finish("sweep-gate", Some(42), json!({"family": "v"}))
                .unwrap();
            assert_eq!(manifest.outputs.len(), 1);
            digests.push(manifest.outputs["outcomes.csv"].clone());
        }
        assert_eq!(digests[0], digests[1]);
        assert!(base.join("a/manifest.json").exists());
        let _ = std::fs::remove_dir_all(&base);
    }
}
