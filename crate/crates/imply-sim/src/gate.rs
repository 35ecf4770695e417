//! Single IMPLY gate: two memristors P and Q joined at a common node that
//! returns to ground through R_G, driven by V_cond (on P) and V_set (on Q).
//!
//! The quasi-static closed-form node solve is the fast path used inside
//! transients; an independent nodal solve that models the driver switches
//! explicitly backs it as a cross-check and is kept separate on purpose.

use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::ode::{self, OdeOpts};
use crate::thresholds::{Role, ThresholdScheme};
use serde::{Deserialize, Serialize};

/// Which quantity the readout instrument digitizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ReadoutSense {
    /// Current delivered by the read driver (series with the device).
    #[default]
    DriverCurrent,
    /// Voltage across R_G; differs from the driver current by the leak
    /// into the floating partner branch.
    GateResistorVoltage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub v_set: f64,
    pub v_cond: f64,
    pub v_reset: f64,
    pub v_read: f64,
    pub r_g: f64,
    /// Length of one operation timestep (also used for init and readout
    /// pulses).
    pub t_step: f64,
    /// Driver switch on-resistance.
    pub switch_on: f64,
    /// Driver switch off-resistance (High-Z mode).
    pub switch_off: f64,
    pub readout_sense: ReadoutSense,
}

impl GateConfig {
    pub fn nominal() -> Self {
        Self {
            v_set: 1.0,
            v_cond: 0.9,
            v_reset: -1.0,
            v_read: 0.1,
            r_g: 40e3,
            t_step: 15e-6,
            switch_on: 1e-9,
            switch_off: 1e9,
            readout_sense: ReadoutSense::DriverCurrent,
        }
    }

    pub fn ode_opts(&self) -> OdeOpts {
        OdeOpts::for_timestep(self.t_step)
    }

    /// Check the drive-window relations against a device. Violations name
    /// the broken relation. These hold for the configured nominal devices;
    /// sweep-perturbed devices may violate them and such runs are data,
    /// not errors.
    pub fn validate(&self, params: &MemristorParams, side: &str) -> Result<()> {
        if !(self.v_set.abs() > params.v_on.abs()) {
            return Err(Error::InvalidConfig(format!(
                "set drive must exceed the set threshold magnitude: |V_set| > |v_on| fails for {side}"
            )));
        }
        if !((self.v_set - self.v_cond).abs() < params.v_on.abs()) {
            return Err(Error::InvalidConfig(format!(
                "drive difference must stay below the set threshold magnitude: \
                 |V_set - V_cond| < |v_on| fails for {side}"
            )));
        }
        if !(self.v_reset.abs() > params.v_off.abs()) {
            return Err(Error::InvalidConfig(format!(
                "reset drive must exceed the reset threshold magnitude: \
                 |V_reset| > |v_off| fails for {side}"
            )));
        }
        if !(self.r_g > 0.0) {
            return Err(Error::InvalidConfig("R_G must be positive".into()));
        }
        if !(self.t_step > 0.0) {
            return Err(Error::InvalidConfig("timestep must be positive".into()));
        }
        Ok(())
    }
}

/// Voltages drawn across the devices and the common node during one
/// quasi-static instant of the operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateVoltages {
    /// Across P, driver side positive.
    pub v_p: f64,
    /// Across Q, driver side positive.
    pub v_q: f64,
    /// Common node against ground.
    pub v_g: f64,
}

/// Closed-form solve of the three-branch star: P from V_cond, Q from V_set,
/// R_G to ground. Driver switches are nine orders of magnitude below the
/// memristor resistances and are intentionally not part of this form; the
/// nodal cross-check includes them.
pub fn solve_gate_voltages(cfg: &GateConfig, r_p: f64, r_q: f64) -> GateVoltages {
    let den = r_p * cfg.r_g + r_p * r_q + r_q * cfg.r_g;
    let v_q = (r_q * (r_p + cfg.r_g) * cfg.v_set - r_q * cfg.r_g * cfg.v_cond) / den;
    let v_g = cfg.v_set - v_q;
    GateVoltages {
        v_p: cfg.v_cond - v_g,
        v_q,
        v_g,
    }
}

/// Relative KCL residual of a solution at the common node.
pub fn kcl_residual(cfg: &GateConfig, r_p: f64, r_q: f64, v: &GateVoltages) -> f64 {
    let i_p = v.v_p / r_p;
    let i_q = v.v_q / r_q;
    let i_g = v.v_g / cfg.r_g;
    let scale = i_p.abs().max(i_q.abs()).max(i_g.abs()).max(1e-30);
    (i_p + i_q - i_g).abs() / scale
}

/// Independent route: one-unknown nodal solve with the driver switches
/// modeled in series. Kept verbatim rather than shared with the closed form
/// so the two can check each other.
pub fn solve_gate_voltages_nodal(cfg: &GateConfig, r_p: f64, r_q: f64) -> GateVoltages {
    let bp = r_p + cfg.switch_on;
    let bq = r_q + cfg.switch_on;
    let v_g = (cfg.v_cond / bp + cfg.v_set / bq) / (1.0 / bp + 1.0 / bq + 1.0 / cfg.r_g);
    GateVoltages {
        v_p: (cfg.v_cond - v_g) * r_p / bp,
        v_q: (cfg.v_set - v_g) * r_q / bq,
        v_g,
    }
}

/// Analytic floor of Q's resistance in Case 1: once V_Q sinks to |v_onQ|
/// the set transient stalls. Uses P parked at its high-resistance state.
/// Returns (r_min, s_min) with s mapped through Q.
pub fn steady_state_r_min(
    cfg: &GateConfig,
    p: &MemristorParams,
    q: &MemristorParams,
) -> (f64, f64) {
    let r_off_p = p.r_off;
    let v_on_q = q.v_on;
    let r_min = -v_on_q * cfg.r_g * r_off_p
        / ((cfg.r_g + r_off_p) * (cfg.v_set + v_on_q) - cfg.r_g * cfg.v_cond);
    let s_min = q.s_of_w(q.w_of_r(r_min));
    (r_min, s_min)
}

#[derive(Debug, Clone, Copy)]
pub struct InitOutcome {
    pub w: f64,
    /// True when the state reached its target bound within the pulse.
    pub completed: bool,
}

/// Write a logic value into one device: full-drive pulse from the opposite
/// bound, partner floating, R_G bypassed by its shorting switch. A '1'
/// starts from w_off under -V_set; a '0' starts from w_on under -V_reset.
/// Incomplete pulses return whatever state was reached; failures here are
/// data for the caller, never masked.
pub fn initialize(cfg: &GateConfig, dev: &MemristorParams, bit: bool) -> InitOutcome {
    let (w0, v_model, target) = if bit {
        (dev.w_off, -cfg.v_set, dev.w_on)
    } else {
        (dev.w_on, -cfg.v_reset, dev.w_off)
    };
    let w = dev.integrate_const(w0, v_model, cfg.t_step, &cfg.ode_opts());
    InitOutcome {
        w,
        completed: (w - target).abs() < 1e-6,
    }
}

/// One IMPLY timestep: co-integrates both devices against the quasi-static
/// node solve. Returns the final states of (P, Q).
pub fn run_imply(
    cfg: &GateConfig,
    p: &MemristorParams,
    q: &MemristorParams,
    wp0: f64,
    wq0: f64,
) -> (f64, f64) {
    run_imply_traced(cfg, p, q, wp0, wq0, |_, _, _| {})
}

/// As `run_imply` but invokes `observer(wp, wq, voltages)` on the initial
/// state and after every accepted integrator step, in time order.
pub fn run_imply_traced(
    cfg: &GateConfig,
    p: &MemristorParams,
    q: &MemristorParams,
    wp0: f64,
    wq0: f64,
    mut observer: impl FnMut(f64, f64, &GateVoltages),
) -> (f64, f64) {
    let rhs = |_t: f64, y: &[f64; 2]| {
        let v = solve_gate_voltages(cfg, p.r_of_w(y[0]), q.r_of_w(y[1]));
        [p.dwdt_bounded(y[0], -v.v_p), q.dwdt_bounded(y[1], -v.v_q)]
    };
    observer(
        wp0,
        wq0,
        &solve_gate_voltages(cfg, p.r_of_w(wp0), q.r_of_w(wq0)),
    );
    // The integrator's clamp hook runs on every accepted state, so the
    // trace piggybacks there; the extra node solve per step is cheap.
    let sol = ode::integrate::<2>(
        rhs,
        |y| {
            y[0] = p.clamp_w(y[0]);
            y[1] = q.clamp_w(y[1]);
            observer(
                y[0],
                y[1],
                &solve_gate_voltages(cfg, p.r_of_w(y[0]), q.r_of_w(y[1])),
            );
        },
        0.0,
        cfg.t_step,
        [p.clamp_w(wp0), q.clamp_w(wq0)],
        &cfg.ode_opts(),
    );
    (sol.y_end[0], sol.y_end[1])
}

/// Case-1 probe with P's state pinned: only Q moves. Used to exercise the
/// analytic resistance floor without P's drift shifting it.
pub fn run_imply_p_frozen(
    cfg: &GateConfig,
    p: &MemristorParams,
    q: &MemristorParams,
    wp_pinned: f64,
    wq0: f64,
) -> f64 {
    let r_p = p.r_of_w(wp_pinned);
    let sol = ode::integrate_1d(
        |_, wq| {
            let v = solve_gate_voltages(cfg, r_p, q.r_of_w(wq));
            q.dwdt_bounded(wq, -v.v_q)
        },
        |wq| q.clamp_w(wq),
        0.0,
        cfg.t_step,
        q.clamp_w(wq0),
        &cfg.ode_opts(),
    );
    sol.y_end
}

#[derive(Debug, Clone, Copy)]
pub struct Readout {
    pub r_measured: f64,
    /// Device state after the read pulse.
    pub w_after: f64,
    /// Signed state disturbance caused by the pulse.
    pub delta_s: f64,
}

/// Measure one device: read drive through the device and R_G, partner
/// floating through its off switch into an idle driver. The drive polarity
/// is the reset direction, so a fully reset device is not disturbed at all
/// and a fully set one drifts by femtometers per pulse.
pub fn readout(
    cfg: &GateConfig,
    dev: &MemristorParams,
    w: f64,
    other: &MemristorParams,
    other_w: f64,
) -> Readout {
    let leak = other.r_of_w(other_w) + cfg.switch_off;
    let node = |r: f64| {
        let b = r + cfg.switch_on;
        let v_g = (cfg.v_read / b) / (1.0 / b + 1.0 / leak + 1.0 / cfg.r_g);
        let i_driver = (cfg.v_read - v_g) / b;
        (v_g, i_driver)
    };
    let r_now = dev.r_of_w(w);
    let (v_g, i_driver) = node(r_now);
    let r_measured = match cfg.readout_sense {
        ReadoutSense::DriverCurrent => cfg.v_read / i_driver - (cfg.r_g + cfg.switch_on),
        ReadoutSense::GateResistorVoltage => {
            cfg.r_g * (cfg.v_read / v_g - 1.0) - cfg.switch_on
        }
    };
    // State evolves over the pulse; the sample above is taken at its start.
    let w_after = ode::integrate_1d(
        |_, w| {
            let r = dev.r_of_w(w);
            let (v_g, _) = node(r);
            // Model voltage is positive (reset direction) under this drive.
            let u = (cfg.v_read - v_g) * r / (r + cfg.switch_on);
            dev.dwdt_bounded(w, u)
        },
        |w| dev.clamp_w(w),
        0.0,
        cfg.t_step,
        dev.clamp_w(w),
        &cfg.ode_opts(),
    )
    .y_end;
    Readout {
        r_measured,
        w_after,
        delta_s: dev.s_of_w(w_after) - dev.s_of_w(w),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureStage {
    Initialization,
    Operation,
}

#[derive(Debug, Clone, Copy)]
pub struct CaseOutcome {
    pub p_in: bool,
    pub q_in: bool,
    pub expected: bool,
    pub init_sp: f64,
    pub init_sq: f64,
    /// Both inputs classified to their intended values right after init.
    pub init_inputs_valid: bool,
    pub wp_end: f64,
    pub wq_end: f64,
    pub r_p_measured: f64,
    pub r_q_measured: f64,
    /// Measured resistances mapped through the experiment's nominal device
    /// map and clamped to [0, 1].
    pub s_p_measured: f64,
    pub s_q_measured: f64,
    pub output: Option<bool>,
    pub output_correct: bool,
    /// P still classified as the input it was given, post operation.
    pub p_survived: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TruthTable {
    pub cases: [CaseOutcome; 4],
    /// Normative verdict: every case produced the expected output AND its
    /// inputs remained valid (P survived; init wrote what it meant to).
    pub correct: bool,
    pub failure_stage: Option<FailureStage>,
}

pub const TRUTH_TABLE_INPUTS: [(bool, bool); 4] =
    [(false, false), (false, true), (true, false), (true, true)];

pub fn imply_expected(p: bool, q: bool) -> bool {
    !p || q
}

/// Map a measured resistance onto the normalized state of the reference
/// device, clamped into [0, 1]. Classification always goes through the
/// nominal map: a readout circuit cannot know a device's true corners.
pub fn measured_s(nominal_map: &MemristorParams, r_measured: f64) -> f64 {
    nominal_map
        .s_of_w(nominal_map.w_of_r(r_measured))
        .clamp(0.0, 1.0)
}

/// Run all four truth-table cases with fresh initialization each time.
/// `nominal_map` is the unperturbed baseline device used for classifying
/// measured resistances.
pub fn run_truth_table(
    cfg: &GateConfig,
    p: &MemristorParams,
    q: &MemristorParams,
    nominal_map: &MemristorParams,
    scheme: &ThresholdScheme,
) -> TruthTable {
    let mut cases = Vec::with_capacity(4);
    for (p_in, q_in) in TRUTH_TABLE_INPUTS {
        let init_p = initialize(cfg, p, p_in);
        let init_q = initialize(cfg, q, q_in);
        let init_sp = measured_s(nominal_map, p.r_of_w(init_p.w));
        let init_sq = measured_s(nominal_map, q.r_of_w(init_q.w));
        let init_inputs_valid = scheme.classify(init_sp, Role::Input) == Some(p_in)
            && scheme.classify(init_sq, Role::Input) == Some(q_in);

        let (wp_end, wq_end) = run_imply(cfg, p, q, init_p.w, init_q.w);

        // Q first, then P; each read leaves the partner floating so the
        // order only matters for which drift lands in which record.
        let read_q = readout(cfg, q, wq_end, p, wp_end);
        let read_p = readout(cfg, p, wp_end, q, read_q.w_after);

        let s_q_measured = measured_s(nominal_map, read_q.r_measured);
        let s_p_measured = measured_s(nominal_map, read_p.r_measured);
        let expected = imply_expected(p_in, q_in);
        let output = scheme.classify(s_q_measured, Role::Output);
        let output_correct = output == Some(expected);
        let p_survived = scheme.classify(s_p_measured, Role::Input) == Some(p_in);

        cases.push(CaseOutcome {
            p_in,
            q_in,
            expected,
            init_sp,
            init_sq,
            init_inputs_valid,
            wp_end: read_p.w_after,
            wq_end: read_q.w_after,
            r_p_measured: read_p.r_measured,
            r_q_measured: read_q.r_measured,
            s_p_measured,
            s_q_measured,
            output,
            output_correct,
            p_survived,
        });
    }
    let cases: [CaseOutcome; 4] = cases.try_into().unwrap();
    let correct = cases
        .iter()
        .all(|c| c.output_correct && c.p_survived && c.init_inputs_valid);
    let failure_stage = if correct {
        None
    } else if cases.iter().any(|c| !c.init_inputs_valid) {
        Some(FailureStage::Initialization)
    } else {
        Some(FailureStage::Operation)
    };
    TruthTable {
        cases,
        correct,
        failure_stage,
    }
}
