//! Simulator and analytical constraint engine for memristive IMPLY logic
//! under device parameter variability.
//!
//! The crate models a two-memristor IMPLY gate (and its 1T1R crossbar
//! embedding) with the VTEAM device model, derives the static and dynamic
//! parameter bounds that make the gate work, and sweeps parameter
//! variations to map where simulation and analysis agree.

pub mod config;
pub mod constraints;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod gate;
pub mod ode;
pub mod report;
pub mod solver;
pub mod svg;
pub mod sweep;
pub mod thresholds;

pub use config::{
    load_baseline, load_crossbar, load_devices, load_gate, load_sweep,
    reject_per_device_keys, SweepDoc,
};
pub use constraints::{
    dynamic_vonp_bound, dynamic_vonq_bound, full_report, operating_area, rg_bounds,
    static_bounds, BoundDirection, BoundStatus, ConstraintRecord, ConstraintReport,
    ConstraintSet, OperatingArea, ParamId, RgBounds, RqEstimator,
};
pub use crossbar::{
    default_placements, initial_states, run_crossbar_sweep, Crossbar, CrossbarCase,
    CrossbarConfig, CrossbarSweepOutcome, CrossbarTruthTable, Operand, Placement,
    PlacementOutcome, UnselectedPolicy,
};
pub use device::MemristorParams;
pub use error::{Error, Result};
pub use gate::{
    imply_expected, initialize, readout, run_imply, run_truth_table, solve_gate_voltages,
    steady_state_r_min, CaseOutcome, FailureStage, GateConfig, GateVoltages, ReadoutSense,
    TruthTable, TRUTH_TABLE_INPUTS,
};
pub use ode::OdeOpts;
pub use report::{
    constraint_report_csv, constraint_report_json, crossbar_combined_csv,
    device_json, gate_json,
    crossbar_outcomes_csv, crossbar_summary_json, histogram_csv, parse_csv_line, placement_slug,
    sweep_outcomes_csv, sweep_summary_json, OutputSet, RunManifest,
};
pub use svg::{axis_bar_from_sweep, render_four_square, render_operating_area, AxisBar};
pub use sweep::{
    generate_grid, run_sweep, summarize_failures, Family, FailureSummary, ParamTuple,
    SweepOutcome, VariationSpec,
};
pub use thresholds::{Role, SchemeId, ThresholdScheme};
