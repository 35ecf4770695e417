//! Variation sweeps over device parameters for the single gate.
//!
//! A sweep varies one parameter family (the resistance corners, the
//! switching thresholds, or the switching speeds) on both devices
//! independently: P's on/off pair and Q's on/off pair give four axes. The
//! grid is the Cartesian product of the level lists on those axes, run as
//! full truth-table experiments, with the verdict requiring every case to
//! produce the expected output while the inputs stay valid.

use crate::constraints;
use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::gate::{run_truth_table, FailureStage, GateConfig, TruthTable};
use crate::thresholds::{SchemeId, ThresholdScheme};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Resistance,
    Voltage,
    Speed,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Resistance => "r",
            Family::Voltage => "v",
            Family::Speed => "k",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r" | "resistance" | "resistances" => Ok(Family::Resistance),
            "v" | "voltage" | "voltages" => Ok(Family::Voltage),
            "k" | "speed" | "speeds" => Ok(Family::Speed),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep family '{other}' (r|v|k)"
            ))),
        }
    }

    /// Axis labels in tuple order: P's on-parameter, P's off-parameter,
    /// then Q's pair.
    pub fn param_names(&self) -> [&'static str; 4] {
        match self {
            Family::Resistance => ["r_on_p", "r_off_p", "r_on_q", "r_off_q"],
            Family::Voltage => ["v_on_p", "v_off_p", "v_on_q", "v_off_q"],
            Family::Speed => ["k_on_p", "k_off_p", "k_on_q", "k_off_q"],
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Family::Resistance => "ohm",
            Family::Voltage => "V",
            Family::Speed => "nm/s",
        }
    }

    /// Nominal (on, off) values of this family's parameter pair.
    pub fn nominal_pair(&self, nominal: &MemristorParams) -> (f64, f64) {
        match self {
            Family::Resistance => (nominal.r_on, nominal.r_off),
            Family::Voltage => (nominal.v_on, nominal.v_off),
            Family::Speed => (nominal.k_on, nominal.k_off),
        }
    }

    fn apply_pair(&self, dev: &mut MemristorParams, on_value: f64, off_value: f64) {
        match self {
            Family::Resistance => {
                dev.r_on = on_value;
                dev.r_off = off_value;
            }
            Family::Voltage => {
                dev.v_on = on_value;
                dev.v_off = off_value;
            }
            Family::Speed => {
                dev.k_on = on_value;
                dev.k_off = off_value;
            }
        }
    }
}

/// What to vary and how far. `levels` holds signed fractions applied
/// multiplicatively (value = nominal * (1 + level)); a positive level grows
/// the magnitude, so +20% of -0.7 V is -0.84 V. Individual axes may instead
/// carry an explicit absolute value list.
#[derive(Debug, Clone)]
pub struct VariationSpec {
    pub family: Family,
    pub levels: Vec<f64>,
    pub scheme: SchemeId,
    /// Absolute value lists per axis, overriding the relative levels there.
    pub absolute: [Option<Vec<f64>>; 4],
}

impl VariationSpec {
    pub fn new(family: Family, levels: Vec<f64>, scheme: SchemeId) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidConfig("deviation level list is empty".into()));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidConfig("deviation levels must be finite".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "deviation levels must be strictly ascending".into(),
            ));
        }
        if !levels.iter().any(|&l| l == 0.0) {
            return Err(Error::InvalidConfig(
                "deviation levels must include 0 (the nominal point)".into(),
            ));
        }
        Ok(Self {
            family,
            levels,
            scheme,
            absolute: [None, None, None, None],
        })
    }

    /// The standard three-level grid for one deviation magnitude:
    /// {-delta, 0, +delta}.
    pub fn three_level(family: Family, delta: f64, scheme: SchemeId) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "deviation magnitude {delta} must be a positive fraction"
            )));
        }
        Self::new(family, vec![-delta, 0.0, delta], scheme)
    }

    /// Value list per axis after applying relative levels or absolute
    /// overrides.
    pub fn value_lists(&self, nominal: &MemristorParams) -> [Vec<f64>; 4] {
        let (on_nom, off_nom) = self.family.nominal_pair(nominal);
        let noms = [on_nom, off_nom, on_nom, off_nom];
        core::array::from_fn(|axis| match &self.absolute[axis] {
            Some(list) => list.clone(),
            None => self.levels.iter().map(|l| noms[axis] * (1.0 + l)).collect(),
        })
    }
}

/// One grid point: indices into each axis's value list, the applied signed
/// fractions (absent on absolute axes), and the resulting values.
#[derive(Debug, Clone, Copy)]
pub struct ParamTuple {
    pub index: usize,
    pub level_idx: [usize; 4],
    pub fractions: [Option<f64>; 4],
    pub values: [f64; 4],
}

impl ParamTuple {
    /// Devices with this tuple applied on top of the nominal baseline.
    pub fn devices(
        &self,
        family: Family,
        nominal: &MemristorParams,
    ) -> (MemristorParams, MemristorParams) {
        let mut p = *nominal;
        let mut q = *nominal;
        family.apply_pair(&mut p, self.values[0], self.values[1]);
        family.apply_pair(&mut q, self.values[2], self.values[3]);
        (p, q)
    }
}

/// Cartesian product over the four axes, outermost axis first, each axis in
/// ascending level order. `index` is the row-major position, so re-running
/// a grid yields identical ordering.
pub fn generate_grid(spec: &VariationSpec, nominal: &MemristorParams) -> Vec<ParamTuple> {
    let lists = spec.value_lists(nominal);
    let fraction = |axis: usize, i: usize| -> Option<f64> {
        if spec.absolute[axis].is_some() {
            None
        } else {
            Some(spec.levels[i])
        }
    };
    let mut out = Vec::with_capacity(lists.iter().map(Vec::len).product());
    let mut index = 0usize;
    for i0 in 0..lists[0].len() {
        for i1 in 0..lists[1].len() {
            for i2 in 0..lists[2].len() {
                for i3 in 0..lists[3].len() {
                    let level_idx = [i0, i1, i2, i3];
                    out.push(ParamTuple {
                        index,
                        level_idx,
                        fractions: [
                            fraction(0, i0),
                            fraction(1, i1),
                            fraction(2, i2),
                            fraction(3, i3),
                        ],
                        values: [
                            lists[0][i0],
                            lists[1][i1],
                            lists[2][i2],
                            lists[3][i3],
                        ],
                    });
                    index += 1;
                }
            }
        }
    }
    out
}

/// One tuple's full experiment result. A tuple whose devices are not even
/// physically valid is recorded as failed with the diagnostic, so a sweep
/// never aborts on individual grid points.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub tuple: ParamTuple,
    pub table: Option<TruthTable>,
    pub correct: bool,
    pub failure_stage: Option<FailureStage>,
    /// Verdict of the analytical constraint report for the same devices:
    /// true when every bound holds. Lets reports compare prediction against
    /// simulation per tuple.
    pub predicted_ok: Option<bool>,
    pub diagnostic: Option<String>,
}

/// Run every tuple of the grid as a four-case truth-table experiment.
/// Parallel across tuples; the result order is by tuple index regardless of
/// worker scheduling.
pub fn run_sweep(
    spec: &VariationSpec,
    nominal: &MemristorParams,
    cfg: &GateConfig,
) -> Vec<SweepOutcome> {
    let scheme = ThresholdScheme::preset(spec.scheme);
    let grid = generate_grid(spec, nominal);
    let mut outcomes: Vec<SweepOutcome> = grid
        .into_par_iter()
        .map(|tuple| run_tuple(spec.family, tuple, nominal, cfg, &scheme))
        .collect();
    outcomes.sort_by_key(|o| o.tuple.index);
    outcomes
}

fn run_tuple(
    family: Family,
    tuple: ParamTuple,
    nominal: &MemristorParams,
    cfg: &GateConfig,
    scheme: &ThresholdScheme,
) -> SweepOutcome {
    let (p, q) = tuple.devices(family, nominal);
    if let Err(e) = p.validate().and_then(|_| q.validate()) {
        return SweepOutcome {
            tuple,
            table: None,
            correct: false,
            failure_stage: None,
            predicted_ok: None,
            diagnostic: Some(e.to_string()),
        };
    }
    let table = run_truth_table(cfg, &p, &q, nominal, scheme);
    let predicted_ok =
        Some(constraints::full_report(&p, &q, nominal, cfg, scheme).all_satisfied());
    SweepOutcome {
        tuple,
        table: Some(table),
        correct: table.correct,
        failure_stage: table.failure_stage,
        predicted_ok,
        diagnostic: None,
    }
}

/// Failure share of one (axis, level) cell of the grid.
#[derive(Debug, Clone)]
pub struct LevelShare {
    pub param: &'static str,
    pub level_idx: usize,
    /// Signed fraction for relative axes, absolute value otherwise.
    pub level_value: f64,
    pub relative: bool,
    pub failed: usize,
    pub tuples: usize,
    /// Failed tuples at this level over all tuples in the sweep. Summing
    /// over one parameter's levels recovers the sweep's failure share.
    pub fraction_of_all: f64,
    /// Every tuple containing this level failed.
    pub always_fails: bool,
}

#[derive(Debug, Clone)]
pub struct FailureSummary {
    pub total: usize,
    pub failed: usize,
    pub shares: Vec<LevelShare>,
}

/// Count failures per (parameter, level) so the common factor of failed runs
/// stands out: a level is flagged when every tuple containing it failed.
pub fn summarize_failures(
    spec: &VariationSpec,
    nominal: &MemristorParams,
    outcomes: &[SweepOutcome],
) -> FailureSummary {
    let names = spec.family.param_names();
    let lists = spec.value_lists(nominal);
    let total = outcomes.len();
    let failed = outcomes.iter().filter(|o| !o.correct).count();
    let mut shares = Vec::new();
    for axis in 0..4 {
        for (li, &value) in lists[axis].iter().enumerate() {
            let at_level = outcomes.iter().filter(|o| o.tuple.level_idx[axis] == li);
            let (mut n, mut nf) = (0usize, 0usize);
            for o in at_level {
                n += 1;
                if !o.correct {
                    nf += 1;
                }
            }
            let relative = spec.absolute[axis].is_none();
            shares.push(LevelShare {
                param: names[axis],
                level_idx: li,
                level_value: if relative { spec.levels[li] } else { value },
                relative,
                failed: nf,
                tuples: n,
                fraction_of_all: if total > 0 { nf as f64 / total as f64 } else { 0.0 },
                always_fails: n > 0 && nf == n,
            });
        }
    }
    FailureSummary {
        total,
        failed,
        shares,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_row_major_and_complete() {
        let spec =
            VariationSpec::three_level(Family::Voltage, 0.10, SchemeId::Ttl).unwrap();
        let nominal = MemristorParams::nominal();
        let grid = generate_grid(&spec, &nominal);
        assert_eq!(grid.len(), 81);
        // Innermost axis advances fastest.
        assert_eq!(grid[0].level_idx, [0, 0, 0, 0]);
        assert_eq!(grid[1].level_idx, [0, 0, 0, 1]);
        assert_eq!(grid[3].level_idx, [0, 0, 1, 0]);
        assert_eq!(grid[80].level_idx, [2, 2, 2, 2]);
        // Sign convention: +10% grows the magnitude of a negative nominal.
        let t = &grid[80];
        assert!((t.values[0] - (-0.77)).abs() < 1e-12, "v_on_p = {}", t.values[0]);
        assert!((t.values[1] - 0.011).abs() < 1e-12, "v_off_p = {}", t.values[1]);
    }

    #[test]
    fn spec_rejects_levels_without_nominal() {
        let err = VariationSpec::new(Family::Speed, vec![-0.1, 0.1], SchemeId::Ttl)
            .unwrap_err();
        assert!(err.to_string().contains("include 0"));
    }

    #[test]
    fn summary_conserves_failure_counts() {
        let spec =
            VariationSpec::three_level(Family::Voltage, 0.10, SchemeId::Ttl).unwrap();
        let nominal = MemristorParams::nominal();
        let cfg = GateConfig::nominal();
        let outcomes = run_sweep(&spec, &nominal, &cfg);
        let summary = summarize_failures(&spec, &nominal, &outcomes);
        assert_eq!(summary.total, 81);
        for axis in 0..4 {
            let name = spec.family.param_names()[axis];
            let sum: usize = summary
                .shares
                .iter()
                .filter(|s| s.param == name)
                .map(|s| s.failed)
                .sum();
            assert_eq!(sum, summary.failed, "axis {name} counts must partition failures");
        }
        // The all-nominal tuple sits at index (1,1,1,1) base 3 = 40.
        let nominal_tuple = &outcomes[40];
        assert_eq!(nominal_tuple.tuple.level_idx, [1, 1, 1, 1]);
        assert!(nominal_tuple.correct, "nominal tuple must pass");
    }
}
