//! Analytical bounds on device parameters for a working IMPLY gate.
//!
//! Static bounds come from the four truth-table cases of the quasi-static
//! node solve: requiring V_Q to clear (or stay under) a switching threshold
//! with R_Q pinned at an output logic level yields one inequality per case.
//! Dynamic bounds additionally require the switching to fit into one
//! timestep. Threshold resistance levels are the classification
//! instrument's, i.e. they are mapped through the unperturbed baseline
//! device, so a perturbed device can legitimately sit on the wrong side of
//! them; those degeneracies are flagged, not errored.

use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::gate::{solve_gate_voltages, steady_state_r_min, GateConfig};
use crate::thresholds::ThresholdScheme;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundDirection {
    Lower,
    Upper,
}

impl BoundDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundDirection::Lower => "lower",
            BoundDirection::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundStatus {
    Finite,
    /// Degenerate coefficient: no finite bound exists in this direction.
    /// The satisfied flag still reflects the exact degenerate inequality.
    Unbounded,
    /// Degenerate inputs make the constraint hold for every value.
    Vacuous,
    /// Degenerate inputs make the constraint meaningless (for example the
    /// device's off state cannot even represent the logic level involved).
    InvalidInput,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub id: String,
    /// Which parameter the bound constrains.
    pub parameter: String,
    pub unit: String,
    pub direction: BoundDirection,
    pub bound: f64,
    /// Value of the constrained parameter at the evaluation point.
    pub actual: f64,
    pub satisfied: bool,
    /// Signed distance to the bound; positive means satisfied.
    pub margin: f64,
    pub status: BoundStatus,
    /// Human-readable note on the substitutions used.
    pub inputs: String,
}

impl ConstraintRecord {
    fn finite(
        id: &str,
        parameter: &str,
        unit: &str,
        direction: BoundDirection,
        bound: f64,
        actual: f64,
        inputs: String,
    ) -> Self {
        let margin = match direction {
            BoundDirection::Lower => actual - bound,
            BoundDirection::Upper => bound - actual,
        };
        Self {
            id: id.into(),
            parameter: parameter.into(),
            unit: unit.into(),
            direction,
            bound,
            actual,
            satisfied: margin >= 0.0,
            margin,
            status: BoundStatus::Finite,
            inputs,
        }
    }

    fn degenerate(
        id: &str,
        parameter: &str,
        unit: &str,
        direction: BoundDirection,
        bound: f64,
        actual: f64,
        satisfied: bool,
        status: BoundStatus,
        inputs: String,
    ) -> Self {
        Self {
            id: id.into(),
            parameter: parameter.into(),
            unit: unit.into(),
            direction,
            bound,
            actual,
            satisfied,
            margin: if satisfied {
                f64::INFINITY
            } else if status == BoundStatus::InvalidInput {
                f64::NAN
            } else {
                f64::NEG_INFINITY
            },
            status,
            inputs,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Normalized thresholds of the active scheme: (s_OL, s_IL, s_IH, s_OH).
    pub s_thresholds: [f64; 4],
    /// Their resistance images through the baseline device map, same order.
    pub r_images: [f64; 4],
    pub records: Vec<ConstraintRecord>,
}

impl ConstraintReport {
    pub fn all_satisfied(&self) -> bool {
        self.records.iter().all(|r| r.satisfied)
    }

    pub fn get(&self, id: &str) -> Option<&ConstraintRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

/// Coefficients of the condition V_Q ? v reduced to a linear inequality in
/// R_P: the solve rearranges to R_P * b (>|<) a.
fn vq_condition_coeffs(cfg: &GateConfig, r_q: f64, v: f64) -> (f64, f64) {
    let a = r_q * cfg.r_g * (v + cfg.v_cond - cfg.v_set);
    let b = r_q * cfg.v_set - v * (cfg.r_g + r_q);
    (a, b)
}

/// Record for a case requiring V_Q > v to hold (switching must proceed, or
/// an idle device must not be reset). Only the b > 0 branch gives a finite
/// bound; the others degenerate and are flagged.
fn vq_must_hold_record(
    id: &str,
    parameter: &str,
    actual_rp: f64,
    cfg: &GateConfig,
    r_q: f64,
    v: f64,
    inputs: String,
) -> ConstraintRecord {
    let (a, b) = vq_condition_coeffs(cfg, r_q, v);
    if b > 0.0 {
        ConstraintRecord::finite(
            id,
            parameter,
            "ohm",
            BoundDirection::Lower,
            a / b,
            actual_rp,
            inputs,
        )
    } else if b == 0.0 {
        // 0 * R_P > a: holds for every R_P iff a < 0.
        let sat = a < 0.0;
        ConstraintRecord::degenerate(
            id,
            parameter,
            "ohm",
            BoundDirection::Lower,
            if sat { f64::NEG_INFINITY } else { f64::INFINITY },
            actual_rp,
            sat,
            BoundStatus::Unbounded,
            inputs,
        )
    } else {
        // b < 0 turns the requirement into R_P < a/b with a/b non-positive:
        // no resistance can satisfy it.
        ConstraintRecord::degenerate(
            id,
            parameter,
            "ohm",
            BoundDirection::Lower,
            f64::INFINITY,
            actual_rp,
            false,
            BoundStatus::Unbounded,
            inputs,
        )
    }
}

/// Record for a case requiring V_Q < v (an idle device must not be set).
fn vq_must_stay_under_record(
    id: &str,
    parameter: &str,
    actual_rp: f64,
    cfg: &GateConfig,
    r_q: f64,
    v: f64,
    inputs: String,
) -> ConstraintRecord {
    let (a, b) = vq_condition_coeffs(cfg, r_q, v);
    if b > 0.0 {
        ConstraintRecord::finite(
            id,
            parameter,
            "ohm",
            BoundDirection::Upper,
            a / b,
            actual_rp,
            inputs,
        )
    } else if b == 0.0 {
        let sat = a > 0.0;
        ConstraintRecord::degenerate(
            id,
            parameter,
            "ohm",
            BoundDirection::Upper,
            if sat { f64::INFINITY } else { f64::NEG_INFINITY },
            actual_rp,
            sat,
            BoundStatus::Unbounded,
            inputs,
        )
    } else {
        // b < 0: V_Q can never reach v, the condition holds for any R_P.
        ConstraintRecord::degenerate(
            id,
            parameter,
            "ohm",
            BoundDirection::Upper,
            f64::INFINITY,
            actual_rp,
            true,
            BoundStatus::Unbounded,
            inputs,
        )
    }
}

/// All static bounds: the four truth-table cases plus the threshold
/// consistency inequalities. `nominal` is the unperturbed baseline whose
/// resistance map defines the logic levels.
pub fn static_bounds(
    p: &MemristorParams,
    q: &MemristorParams,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
) -> ConstraintReport {
    let [r_ol, r_il, r_ih, r_oh] = scheme.r_images(nominal);
    let v_on_q = q.v_on.abs();
    let mut records = Vec::with_capacity(11);

    // Case 1 (p=0, q=0): Q must keep setting until it crosses the output
    // high level, so V_Q > |v_onQ| must hold with R_Q at R_OH.
    records.push(ConstraintRecord::finite(
        "case1_vonq",
        "v_on_q",
        "V",
        BoundDirection::Lower,
        -cfg.v_set * r_oh / (cfg.r_g + r_oh),
        q.v_on,
        format!("validity of the Case 1 bound, R_Q = R_OH = {r_oh:.1}"),
    ));
    records.push(vq_must_hold_record(
        "case1_roffp",
        "r_off_p",
        p.r_off,
        cfg,
        r_oh,
        v_on_q,
        format!("Case 1 set completion, R_Q = R_OH = {r_oh:.1}, v = |v_onQ|"),
    ));

    // Case 3 (p=1, q=0): Q must not set, so V_Q < |v_onQ| with R_Q at the
    // output low level.
    records.push(ConstraintRecord::finite(
        "case3_vonq",
        "v_on_q",
        "V",
        BoundDirection::Lower,
        -cfg.v_set * r_ol / (cfg.r_g + r_ol),
        q.v_on,
        format!("validity of the Case 3 bound, R_Q = R_OL = {r_ol:.1}"),
    ));
    records.push(vq_must_stay_under_record(
        "case3_ronp",
        "r_on_p",
        p.r_on,
        cfg,
        r_ol,
        v_on_q,
        format!("Case 3 non-switching, R_Q = R_OL = {r_ol:.1}, v = |v_onQ|"),
    ));

    // Cases 2 and 4 (q=1): Q must not reset, so V_Q > -v_offQ with R_Q at
    // the output high level. Nominally these hold with enormous margin but
    // they are part of the case list and are always emitted.
    records.push(ConstraintRecord::finite(
        "case24_voffq",
        "v_off_q",
        "V",
        BoundDirection::Lower,
        -cfg.v_set * r_oh / (cfg.r_g + r_oh),
        q.v_off,
        format!("validity of the Case 2/4 bounds, R_Q = R_OH = {r_oh:.1}"),
    ));
    records.push(vq_must_hold_record(
        "case2_roffp",
        "r_off_p",
        p.r_off,
        cfg,
        r_oh,
        -q.v_off,
        format!("Case 2 non-reset, R_Q = R_OH = {r_oh:.1}, v = -v_offQ"),
    ));
    records.push(vq_must_hold_record(
        "case4_ronp",
        "r_on_p",
        p.r_on,
        cfg,
        r_oh,
        -q.v_off,
        format!("Case 4 non-reset, R_Q = R_OH = {r_oh:.1}, v = -v_offQ"),
    ));

    // Threshold consistency: each device's corners must land inside the
    // defined input bands, otherwise its logic states cannot classify.
    for (id, param, actual, bound, dir) in [
        ("roffp_above_input_low", "r_off_p", p.r_off, r_il, BoundDirection::Lower),
        ("roffq_above_input_low", "r_off_q", q.r_off, r_il, BoundDirection::Lower),
        ("ronp_below_input_high", "r_on_p", p.r_on, r_ih, BoundDirection::Upper),
        ("ronq_below_input_high", "r_on_q", q.r_on, r_ih, BoundDirection::Upper),
    ] {
        records.push(ConstraintRecord::finite(
            id,
            param,
            "ohm",
            dir,
            bound,
            actual,
            "device corner vs input logic level".into(),
        ));
    }

    ConstraintReport {
        s_thresholds: [scheme.s_ol, scheme.s_il, scheme.s_ih, scheme.s_oh],
        r_images: [r_ol, r_il, r_ih, r_oh],
        records,
    }
}

/// Timestep-aware lower bound on v_onQ: starting from both devices off,
/// Q must cross the output high level within one step. Model: the drive
/// never exceeds its initial value V_Qi, and the window is ignored, so the
/// traveled distance is at most k_onQ*T*(V_Qi/|v_onQ| - 1)^alpha; requiring
/// that to reach Δw_min gives the bound.
pub fn dynamic_vonq_bound(
    p: &MemristorParams,
    q: &MemristorParams,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
) -> ConstraintRecord {
    let [_, _, _, r_oh] = scheme.r_images(nominal);
    let v_qi = solve_gate_voltages(cfg, p.r_off, q.r_off).v_q;
    let dw_min = q.w_of_r(r_oh) - q.w_off;
    let inputs = format!(
        "V_Qi = {v_qi:.6} at (R_offP, R_offQ), dw_min = {dw_min:.4} from R_OH = {r_oh:.1}"
    );
    if !(dw_min > 0.0) {
        // The off state already counts as output high; nothing to switch.
        return ConstraintRecord::degenerate(
            "dynamic_vonq",
            "v_on_q",
            "V",
            BoundDirection::Lower,
            f64::NEG_INFINITY,
            q.v_on,
            true,
            BoundStatus::Vacuous,
            inputs,
        );
    }
    let alpha = q.alpha_on as f64;
    let bound = -v_qi / ((dw_min / (q.k_on * cfg.t_step)).powf(1.0 / alpha) + 1.0);
    ConstraintRecord::finite(
        "dynamic_vonq",
        "v_on_q",
        "V",
        BoundDirection::Lower,
        bound,
        q.v_on,
        inputs,
    )
}

/// Which stand-in for Q's (moving) resistance the v_onP bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RqEstimator {
    /// Q parked at the analytic floor R_min: most pessimistic drive on P.
    Rq1,
    /// Arithmetic mean of R_offQ and R_min.
    Rq2,
    /// Geometric mean of R_offQ and R_min; tracks simulation best.
    Rq3,
}

impl RqEstimator {
    pub const ALL: [RqEstimator; 3] = [RqEstimator::Rq1, RqEstimator::Rq2, RqEstimator::Rq3];

    pub fn as_str(&self) -> &'static str {
        match self {
            RqEstimator::Rq1 => "RQ1",
            RqEstimator::Rq2 => "RQ2",
            RqEstimator::Rq3 => "RQ3",
        }
    }

    pub fn resistance(&self, cfg: &GateConfig, p: &MemristorParams, q: &MemristorParams) -> f64 {
        let (r_min, _) = steady_state_r_min(cfg, p, q);
        match self {
            RqEstimator::Rq1 => r_min,
            RqEstimator::Rq2 => 0.5 * (q.r_off + r_min),
            RqEstimator::Rq3 => (q.r_off * r_min).sqrt(),
        }
    }
}

/// Timestep-aware upper bound on v_onP: P holds a '0' during Case 1 and its
/// drift over one step must not push it past the input low level. The drive
/// on P is estimated with Q pinned at the chosen stand-in resistance.
pub fn dynamic_vonp_bound(
    p: &MemristorParams,
    q: &MemristorParams,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
    estimator: RqEstimator,
) -> ConstraintRecord {
    let id = match estimator {
        RqEstimator::Rq1 => "dynamic_vonp_rq1",
        RqEstimator::Rq2 => "dynamic_vonp_rq2",
        RqEstimator::Rq3 => "dynamic_vonp_rq3",
    };
    let [_, r_il, _, _] = scheme.r_images(nominal);
    let dw_max = p.w_of_r(r_il) - p.w_off;
    if !(dw_max > 0.0) || !dw_max.is_finite() {
        // P's off state does not classify as '0' against the baseline
        // levels; drift headroom is meaningless here.
        return ConstraintRecord::degenerate(
            id,
            "v_on_p",
            "V",
            BoundDirection::Upper,
            f64::NAN,
            p.v_on,
            false,
            BoundStatus::InvalidInput,
            format!("R_offP = {:.1} at or below R_IL = {r_il:.1}", p.r_off),
        );
    }
    let r_qj = estimator.resistance(cfg, p, q);
    if !r_qj.is_finite() || r_qj <= 0.0 {
        return ConstraintRecord::degenerate(
            id,
            "v_on_p",
            "V",
            BoundDirection::Upper,
            f64::NAN,
            p.v_on,
            false,
            BoundStatus::InvalidInput,
            format!("estimator {} produced a non-physical resistance", estimator.as_str()),
        );
    }
    let v_pf = solve_gate_voltages(cfg, p.r_off, r_qj).v_p;
    let alpha = p.alpha_on as f64;
    let bound = -v_pf / ((dw_max / (p.k_on * cfg.t_step)).powf(1.0 / alpha) + 1.0);
    ConstraintRecord::finite(
        id,
        "v_on_p",
        "V",
        BoundDirection::Upper,
        bound,
        p.v_on,
        format!(
            "estimator {} -> R_Q = {r_qj:.1}, V_Pf = {v_pf:.6}, dw_max = {dw_max:.4}",
            estimator.as_str()
        ),
    )
}

/// Static bounds plus the dynamic bounds (all three v_onP estimators).
pub fn full_report(
    p: &MemristorParams,
    q: &MemristorParams,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
) -> ConstraintReport {
    let mut report = static_bounds(p, q, nominal, cfg, scheme);
    report.records.push(dynamic_vonq_bound(p, q, nominal, cfg, scheme));
    for est in RqEstimator::ALL {
        report
            .records
            .push(dynamic_vonp_bound(p, q, nominal, cfg, scheme, est));
    }
    report
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RgBounds {
    pub lower: f64,
    pub upper: f64,
    /// Lower bound from the full nodal solve with R_P = R_on, R_Q = R_off,
    /// documenting the approximation gap of the closed form.
    pub lower_exact: f64,
    /// Upper bound from the full nodal solve with both devices off; it
    /// coincides with the closed form.
    pub upper_exact: f64,
}

impl RgBounds {
    pub fn geometric_mean(&self) -> f64 {
        (self.lower * self.upper).sqrt()
    }
}

/// Design window for the gate resistor: large enough that a set device can
/// pull the common node up, small enough that switching still starts.
pub fn rg_bounds(nominal: &MemristorParams, cfg: &GateConfig) -> Result<RgBounds> {
    let v_on = nominal.v_on.abs();
    let lo_den = cfg.v_cond - (cfg.v_set - v_on);
    let hi_den = 2.0 * v_on - cfg.v_set + cfg.v_cond;
    if !(lo_den > 0.0) {
        return Err(Error::InvalidConfig(
            "R_G lower bound undefined: V_cond must exceed V_set - |v_on|".into(),
        ));
    }
    if !(hi_den > 0.0) {
        return Err(Error::InvalidConfig(
            "R_G upper bound undefined: 2|v_on| + V_cond must exceed V_set".into(),
        ));
    }
    let exact = |r_p: f64, r_q: f64, v: f64| -> Result<f64> {
        let den = r_q * (cfg.v_set - cfg.v_cond) - v * (r_p + r_q);
        if den == 0.0 {
            return Err(Error::InvalidConfig(
                "exact R_G bound undefined: degenerate nodal solve".into(),
            ));
        }
        Ok(r_p * r_q * (v - cfg.v_set) / den)
    };
    Ok(RgBounds {
        lower: nominal.r_on * (cfg.v_set - v_on) / lo_den,
        upper: nominal.r_off * (cfg.v_set - v_on) / hi_den,
        lower_exact: exact(nominal.r_on, nominal.r_off, v_on)?,
        upper_exact: exact(nominal.r_off, nominal.r_off, v_on)?,
    })
}

/// Parameters an operating-area axis may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamId {
    VonP,
    VonQ,
    VoffP,
    VoffQ,
    RonP,
    RoffP,
    RonQ,
    RoffQ,
}

impl ParamId {
    pub fn parse(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "vonp" => ParamId::VonP,
            "vonq" => ParamId::VonQ,
            "voffp" => ParamId::VoffP,
            "voffq" => ParamId::VoffQ,
            "ronp" => ParamId::RonP,
            "roffp" => ParamId::RoffP,
            "ronq" => ParamId::RonQ,
            "roffq" => ParamId::RoffQ,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown operating-area parameter '{s}' (expected one of \
                     v_onP, v_onQ, v_offP, v_offQ, R_onP, R_offP, R_onQ, R_offQ)"
                )))
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ParamId::VonP => "v_on_p",
            ParamId::VonQ => "v_on_q",
            ParamId::VoffP => "v_off_p",
            ParamId::VoffQ => "v_off_q",
            ParamId::RonP => "r_on_p",
            ParamId::RoffP => "r_off_p",
            ParamId::RonQ => "r_on_q",
            ParamId::RoffQ => "r_off_q",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            ParamId::VonP | ParamId::VonQ | ParamId::VoffP | ParamId::VoffQ => "V",
            _ => "ohm",
        }
    }

    pub fn apply(&self, p: &mut MemristorParams, q: &mut MemristorParams, value: f64) {
        match self {
            ParamId::VonP => p.v_on = value,
            ParamId::VonQ => q.v_on = value,
            ParamId::VoffP => p.v_off = value,
            ParamId::VoffQ => q.v_off = value,
            ParamId::RonP => p.r_on = value,
            ParamId::RoffP => p.r_off = value,
            ParamId::RonQ => q.r_on = value,
            ParamId::RoffQ => q.r_off = value,
        }
    }
}

/// Which constraint records participate in an operating area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ConstraintSet {
    #[default]
    All,
    StaticOnly,
    DynamicOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPolyline {
    pub constraint_id: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatingArea {
    pub x_id: ParamId,
    pub y_id: ParamId,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// Row-major (y outer, x inner): every active constraint satisfied.
    pub admissible: Vec<bool>,
    /// Points whose parameter combination is not physical (for example
    /// r_off <= r_on); excluded from admissibility and boundary tracing.
    pub invalid: Vec<bool>,
    pub polylines: Vec<BoundaryPolyline>,
}

impl OperatingArea {
    pub fn idx(&self, iy: usize, ix: usize) -> usize {
        iy * self.x_grid.len() + ix
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Evaluate the selected constraints over a 2D parameter grid and trace the
/// boundary polyline of each record from its margin sign changes.
#[allow(clippy::too_many_arguments)]
pub fn operating_area(
    x_id: ParamId,
    x_range: (f64, f64),
    nx: usize,
    y_id: ParamId,
    y_range: (f64, f64),
    ny: usize,
    p0: &MemristorParams,
    q0: &MemristorParams,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
    set: ConstraintSet,
) -> Result<OperatingArea> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParams("operating area grid must be at least 2x2".into()));
    }
    if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
        return Err(Error::InvalidParams(
            "operating area range is degenerate (min must be below max)".into(),
        ));
    }
    if x_id == y_id {
        return Err(Error::InvalidParams(
            "operating area axes must vary different parameters".into(),
        ));
    }
    let x_grid = linspace(x_range.0, x_range.1, nx);
    let y_grid = linspace(y_range.0, y_range.1, ny);

    let evaluate = |p: &MemristorParams, q: &MemristorParams| -> Vec<ConstraintRecord> {
        let mut recs = Vec::new();
        if set != ConstraintSet::DynamicOnly {
            recs.extend(static_bounds(p, q, nominal, cfg, scheme).records);
        }
        if set != ConstraintSet::StaticOnly {
            recs.push(dynamic_vonq_bound(p, q, nominal, cfg, scheme));
            recs.push(dynamic_vonp_bound(p, q, nominal, cfg, scheme, RqEstimator::Rq3));
        }
        recs
    };
    let record_ids: Vec<String> = evaluate(p0, q0).iter().map(|r| r.id.clone()).collect();

    let n = nx * ny;
    let mut admissible = vec![false; n];
    let mut invalid = vec![false; n];
    let mut margins: HashMap<String, Vec<f64>> = record_ids
        .iter()
        .map(|id| (id.clone(), vec![f64::NAN; n]))
        .collect();

    for (iy, &yv) in y_grid.iter().enumerate() {
        for (ix, &xv) in x_grid.iter().enumerate() {
            let i = iy * nx + ix;
            let mut p = *p0;
            let mut q = *q0;
            x_id.apply(&mut p, &mut q, xv);
            y_id.apply(&mut p, &mut q, yv);
            if p.validate().is_err() || q.validate().is_err() {
                invalid[i] = true;
                continue;
            }
            let recs = evaluate(&p, &q);
            admissible[i] = recs.iter().all(|r| r.satisfied);
            for r in recs {
                if let Some(col) = margins.get_mut(&r.id) {
                    col[i] = r.margin;
                }
            }
        }
    }

    // Boundary tracing: collect margin zero crossings along rows and along
    // columns, then keep whichever orientation describes the curve better
    // (more crossings). The bounds here are monotone single-valued curves,
    // so this simple scan is adequate for plotting.
    let mut polylines = Vec::new();
    for id in &record_ids {
        let m = &margins[id];
        let mut by_col: Vec<(f64, f64)> = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny - 1 {
                let (m1, m2) = (m[iy * nx + ix], m[(iy + 1) * nx + ix]);
                if m1.is_finite() && m2.is_finite() && (m1 < 0.0) != (m2 < 0.0) {
                    let t = m1 / (m1 - m2);
                    by_col.push((x_grid[ix], y_grid[iy] + t * (y_grid[iy + 1] - y_grid[iy])));
                }
            }
        }
        let mut by_row: Vec<(f64, f64)> = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx - 1 {
                let (m1, m2) = (m[iy * nx + ix], m[iy * nx + ix + 1]);
                if m1.is_finite() && m2.is_finite() && (m1 < 0.0) != (m2 < 0.0) {
                    let t = m1 / (m1 - m2);
                    by_row.push((x_grid[ix] + t * (x_grid[ix + 1] - x_grid[ix]), y_grid[iy]));
                }
            }
        }
        let mut points = if by_col.len() >= by_row.len() { by_col } else { by_row };
        if points.is_empty() {
            continue;
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        polylines.push(BoundaryPolyline {
            constraint_id: id.clone(),
            points,
        });
    }

    Ok(OperatingArea {
        x_id,
        y_id,
        x_grid,
        y_grid,
        admissible,
        invalid,
        polylines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::SchemeId;

    fn nominal_setup() -> (MemristorParams, GateConfig, ThresholdScheme) {
        (
            MemristorParams::nominal(),
            GateConfig::nominal(),
            ThresholdScheme::preset(SchemeId::Ttl),
        )
    }

    #[test]
    fn static_case_bounds_at_nominal() {
        let (m, cfg, scheme) = nominal_setup();
        let rep = static_bounds(&m, &m, &m, &cfg, &scheme);
        assert_eq!(rep.records.len(), 11);
        assert!(rep.all_satisfied());
        let r = rep.get("case1_roffp").unwrap();
        assert!((r.bound - 97_305.315).abs() < 0.5, "bound = {}", r.bound);
        let r = rep.get("case3_ronp").unwrap();
        assert_eq!(r.direction, BoundDirection::Upper);
        assert!((r.bound - 89_023.526).abs() < 0.5, "bound = {}", r.bound);
    }

    #[test]
    fn dynamic_vonq_bound_at_nominal() {
        let (m, cfg, scheme) = nominal_setup();
        let rec = dynamic_vonq_bound(&m, &m, &m, &cfg, &scheme);
        assert!((rec.bound - (-0.766_684_8)).abs() < 1e-6, "bound = {}", rec.bound);
        assert!(rec.satisfied);
    }

    #[test]
    fn rg_window_at_nominal() {
        let (m, cfg, _) = nominal_setup();
        let b = rg_bounds(&m, &cfg).unwrap();
        assert!((b.lower - 5_000.0).abs() < 1e-6);
        assert!((b.upper - 230_769.230_769).abs() < 1e-3);
        assert!((b.lower_exact - 4_942.339).abs() < 1e-2);
    }
}
