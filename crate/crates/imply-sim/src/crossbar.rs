//! 1T1R crossbar embedding of the two-memristor IMPLY gate.
//!
//! Every cell is a memristor in series with an access switch. Bit lines run
//! vertically, word lines horizontally, with a fixed line resistance per
//! segment between adjacent junctions. Each line reaches its driver through
//! a switch at both ends; the top and left drivers sit one line segment away
//! from their first junction while the bottom and right drivers attach at
//! the last junction directly.
//!
//! The gate operation drives P's bit line with V_cond and Q's with V_set,
//! routes both selected word lines to a shared node behind R_G, and leaves
//! every other line either floating (off switch to an idle driver) or
//! grounded (on switch to 0 V), per policy. Writes and reads select a single
//! cell: one driven column against one grounded row.
//!
//! Background cells are passive during an operation. The isolation audit
//! checks this assumption rather than assuming it: the voltage share across
//! each unselected memristor must stay inside the device's dead zone.

use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::gate::{imply_expected, measured_s, GateConfig, InitOutcome, TRUTH_TABLE_INPUTS};
use crate::ode;
use crate::solver::{FactoredNet, NetBuilder, NodeId, R_TIE};
use crate::thresholds::{Role, ThresholdScheme};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

/// What an unselected line connects to during an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnselectedPolicy {
    /// Off switch to an idle driver: the line leaks, it does not float truly.
    Floating,
    /// On switch to 0 V. Quieter neighbours, more driver current.
    Grounded,
}

impl UnselectedPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnselectedPolicy::Floating => "floating",
            UnselectedPolicy::Grounded => "grounded",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "floating" => Ok(UnselectedPolicy::Floating),
            "grounded" => Ok(UnselectedPolicy::Grounded),
            other => Err(Error::InvalidConfig(format!(
                "unknown unselected-line policy '{other}' (floating|grounded)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrossbarConfig {
    /// Array dimension (n x n).
    pub n: usize,
    /// Line resistance per segment between adjacent junctions, ohms.
    pub line_r: f64,
    /// Access and driver switch on-resistance, ohms.
    pub switch_on: f64,
    /// Switch off-resistance, ohms.
    pub switch_off: f64,
    pub unselected: UnselectedPolicy,
    /// Background cell states are |N(0, sigma)| clamped to [0, 1].
    pub init_sigma: f64,
    pub seed: u64,
}

impl CrossbarConfig {
    pub fn nominal() -> Self {
        Self {
            n: 16,
            line_r: 10.0,
            switch_on: 1e-6,
            switch_off: 100e6,
            unselected: UnselectedPolicy::Floating,
            init_sigma: 0.15,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "array dimension {} is below the 2x2 minimum",
                self.n
            )));
        }
        if !(self.line_r >= 0.0) || !self.line_r.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "line resistance {} must be finite and non-negative",
                self.line_r
            )));
        }
        if !(self.switch_on > 0.0) || !self.switch_on.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "switch on-resistance {} must be positive",
                self.switch_on
            )));
        }
        if !(self.switch_off > self.switch_on) || !self.switch_off.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "switch off-resistance {} must exceed the on-resistance",
                self.switch_off
            )));
        }
        if !(self.init_sigma >= 0.0) || !self.init_sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "background state sigma {} must be finite and non-negative",
                self.init_sigma
            )));
        }
        Ok(())
    }
}

/// Where the two gate cells sit, as (row, column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub p: (usize, usize),
    pub q: (usize, usize),
}

impl Placement {
    pub fn validate(&self, n: usize) -> Result<()> {
        for (label, (r, c)) in [("P", self.p), ("Q", self.q)] {
            if r >= n || c >= n {
                return Err(Error::InvalidConfig(format!(
                    "{label} cell ({r},{c}) outside the {n}x{n} array"
                )));
            }
        }
        if self.p == self.q {
            return Err(Error::InvalidConfig(
                "P and Q cannot share one cell".into(),
            ));
        }
        if self.p.1 == self.q.1 {
            return Err(Error::InvalidConfig(
                "P and Q need distinct columns; one bit line cannot carry both drives".into(),
            ));
        }
        Ok(())
    }

    /// Parse "pr,pc/qr,qc", e.g. "0,0/15,15".
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("placement '{s}' is not 'pr,pc/qr,qc'"));
        let (ps, qs) = s.split_once('/').ok_or_else(bad)?;
        let cell = |t: &str| -> Result<(usize, usize)> {
            let (r, c) = t.split_once(',').ok_or_else(bad)?;
            Ok((
                r.trim().parse().map_err(|_| bad())?,
                c.trim().parse().map_err(|_| bad())?,
            ))
        };
        Ok(Self {
            p: cell(ps)?,
            q: cell(qs)?,
        })
    }

    pub fn label(&self) -> String {
        format!(
            "{},{}/{},{}",
            self.p.0, self.p.1, self.q.0, self.q.1
        )
    }
}

/// The four standard gate positions exercised by sweeps: opposite corners,
/// corner against array center, and both with P and Q swapped. Entries that
/// collapse for very small arrays are dropped.
pub fn default_placements(n: usize) -> Vec<Placement> {
    let far = n - 1;
    let mid = (n - 1) / 2;
    let raw = [
        Placement { p: (0, 0), q: (far, far) },
        Placement { p: (far, far), q: (0, 0) },
        Placement { p: (0, 0), q: (mid, mid) },
        Placement { p: (mid, mid), q: (0, 0) },
    ];
    raw.into_iter()
        .filter(|pl| pl.validate(n).is_ok())
        .collect()
}

/// Background cell states, row-major, drawn as |N(0, sigma)| clamped to
/// [0, 1]. The gate cells' entries are ignored by the assembly.
pub fn initial_states(cfg: &CrossbarConfig) -> Vec<f64> {
    let count = cfg.n * cfg.n;
    if cfg.init_sigma == 0.0 {
        return vec![0.0; count];
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let dist = Normal::new(0.0, cfg.init_sigma).expect("sigma validated non-negative finite");
    (0..count)
        .map(|_| {
            let draw: f64 = dist.sample(&mut rng);
            draw.abs().min(1.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    P,
    Q,
}

/// One gate embedded in one array: the configuration, the two (possibly
/// perturbed) gate devices, the reference device for background cells and
/// classification, and the frozen background states.
pub struct Crossbar<'a> {
    pub cfg: &'a CrossbarConfig,
    pub drives: &'a GateConfig,
    pub p: &'a MemristorParams,
    pub q: &'a MemristorParams,
    pub nominal: &'a MemristorParams,
    pub placement: Placement,
    pub background: &'a [f64],
}

/// Net assembly request: which columns are driven at what voltage, which
/// rows sink to ground, which rows route to the shared gate node, and which
/// gate cells move versus sit parked at a fixed resistance.
struct NetSpec<'s> {
    driven_cols: &'s [(usize, f64)],
    grounded_rows: &'s [usize],
    rows_to_gate: &'s [usize],
    rg_in_path: bool,
    movers: &'s [(usize, usize)],
    parked: &'s [((usize, usize), f64)],
}

struct BuiltNet {
    net: FactoredNet,
    gate_node: Option<NodeId>,
    sinks: Vec<NodeId>,
    /// (bit junction, word junction, memristance) per background cell.
    bg_ends: Vec<(NodeId, NodeId, f64)>,
}

impl<'a> Crossbar<'a> {
    pub fn new(
        cfg: &'a CrossbarConfig,
        drives: &'a GateConfig,
        p: &'a MemristorParams,
        q: &'a MemristorParams,
        nominal: &'a MemristorParams,
        placement: Placement,
        background: &'a [f64],
    ) -> Result<Self> {
        cfg.validate()?;
        placement.validate(cfg.n)?;
        if background.len() != cfg.n * cfg.n {
            return Err(Error::InvalidConfig(format!(
                "background has {} states, array needs {}",
                background.len(),
                cfg.n * cfg.n
            )));
        }
        for (label, dev) in [("P", p), ("Q", q), ("reference", nominal)] {
            dev.validate().map_err(|e| {
                Error::InvalidConfig(format!("{label} device rejected: {e}"))
            })?;
        }
        Ok(Self {
            cfg,
            drives,
            p,
            q,
            nominal,
            placement,
            background,
        })
    }

    fn device(&self, which: Operand) -> &MemristorParams {
        match which {
            Operand::P => self.p,
            Operand::Q => self.q,
        }
    }

    fn position(&self, which: Operand) -> (usize, usize) {
        match which {
            Operand::P => self.placement.p,
            Operand::Q => self.placement.q,
        }
    }

    /// A cell parked mid-range behind its off switch: the stand-in for the
    /// partner gate cell during single-cell writes and reads, when its true
    /// state is not known to the controller. The off switch dominates the
    /// series value, so the parked guess is inert.
    fn parked(&self, which: Operand) -> ((usize, usize), f64) {
        let dev = self.device(which);
        let w_mid = 0.5 * (dev.w_off + dev.w_on);
        (self.position(which), dev.r_of_w(w_mid) + self.cfg.switch_off)
    }

    fn assemble(&self, spec: &NetSpec) -> Result<BuiltNet> {
        let n = self.cfg.n;
        let lr = self.cfg.line_r;
        let sw_on = self.cfg.switch_on;
        let sw_off = self.cfg.switch_off;
        let mut b = NetBuilder::new();

        // Junctions in row-major interleaved order: the banded factorization
        // relies on adjacent junctions having nearby matrix indices.
        let mut bits = vec![0usize; n * n];
        let mut words = vec![0usize; n * n];
        for r in 0..n {
            for c in 0..n {
                bits[r * n + c] = b.node();
                words[r * n + c] = b.node();
            }
        }
        let bit = |r: usize, c: usize| bits[r * n + c];
        let word = |r: usize, c: usize| words[r * n + c];

        for c in 0..n {
            for r in 0..n - 1 {
                b.resistor(bit(r, c), bit(r + 1, c), lr)?;
            }
        }
        for r in 0..n {
            for c in 0..n - 1 {
                b.resistor(word(r, c), word(r, c + 1), lr)?;
            }
        }

        // Column ends. Unselected lines follow the policy.
        for c in 0..n {
            let (series, volts) = match spec.driven_cols.iter().find(|&&(dc, _)| dc == c) {
                Some(&(_, v)) => (sw_on, v),
                None => match self.cfg.unselected {
                    UnselectedPolicy::Grounded => (sw_on, 0.0),
                    UnselectedPolicy::Floating => (sw_off, 0.0),
                },
            };
            let top = b.source(volts);
            b.resistor(bit(0, c), top, lr + series)?;
            let bottom = b.source(volts);
            b.resistor(bit(n - 1, c), bottom, series)?;
        }

        // Row ends.
        let gate_node = if spec.rows_to_gate.is_empty() {
            None
        } else {
            Some(b.node())
        };
        let mut sinks = Vec::new();
        for r in 0..n {
            if spec.grounded_rows.contains(&r) {
                let left = b.source(0.0);
                b.resistor(word(r, 0), left, lr + sw_on)?;
                sinks.push(left);
                let right = b.source(0.0);
                b.resistor(word(r, n - 1), right, sw_on)?;
                sinks.push(right);
            } else if spec.rows_to_gate.contains(&r) {
                let g = gate_node.expect("gate node exists when rows route to it");
                b.resistor(word(r, 0), g, lr + sw_on)?;
                b.resistor(word(r, n - 1), g, sw_on)?;
            } else {
                let series = match self.cfg.unselected {
                    UnselectedPolicy::Grounded => sw_on,
                    UnselectedPolicy::Floating => sw_off,
                };
                let left = b.source(0.0);
                b.resistor(word(r, 0), left, lr + series)?;
                let right = b.source(0.0);
                b.resistor(word(r, n - 1), right, series)?;
            }
        }
        if let Some(g) = gate_node {
            let gnd = b.source(0.0);
            if spec.rg_in_path {
                b.resistor(g, gnd, self.drives.r_g)?;
            } else {
                b.tie(g, gnd)?;
                sinks.push(gnd);
            }
        }

        // Cells. Gate positions are movers or parked; the rest sit at their
        // background state through the reference device map, behind an off
        // switch.
        let mut bg_ends = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let pos = (r, c);
                if pos == self.placement.p || pos == self.placement.q {
                    continue;
                }
                let s_bg = self.background[r * n + c];
                let rm = self.nominal.r_of_w(self.nominal.w_of_s(s_bg));
                b.resistor(bit(r, c), word(r, c), rm + sw_off)?;
                bg_ends.push((bit(r, c), word(r, c), rm));
            }
        }
        for &((r, c), series) in spec.parked {
            b.resistor(bit(r, c), word(r, c), series)?;
        }
        for &(r, c) in spec.movers {
            b.mover(bit(r, c), word(r, c));
        }

        Ok(BuiltNet {
            net: b.finalize()?,
            gate_node,
            sinks,
            bg_ends,
        })
    }

    /// The solver rejects mover resistances at or below its tie threshold,
    /// which cannot be reported from inside an integrator callback. Rule the
    /// whole trajectory out up front instead.
    fn check_mover_range(&self, dev: &MemristorParams) -> Result<()> {
        let lo = dev.r_of_w(dev.w_on).min(dev.r_of_w(dev.w_off)) + self.cfg.switch_on;
        if lo <= R_TIE {
            return Err(Error::InvalidConfig(format!(
                "cell series resistance can reach {lo} ohms, below the solver tie threshold"
            )));
        }
        Ok(())
    }

    /// Write one logic value into one gate cell: its column driven at V_set
    /// ('1') or V_reset ('0'), its row grounded, everything else per policy,
    /// the partner parked. R_G is not in the write path.
    pub fn init_cell(&self, which: Operand, bit_val: bool) -> Result<InitOutcome> {
        let dev = self.device(which);
        self.check_mover_range(dev)?;
        let (row, col) = self.position(which);
        let other = match which {
            Operand::P => Operand::Q,
            Operand::Q => Operand::P,
        };
        let drive = if bit_val {
            self.drives.v_set
        } else {
            self.drives.v_reset
        };
        let built = self.assemble(&NetSpec {
            driven_cols: &[(col, drive)],
            grounded_rows: &[row],
            rows_to_gate: &[],
            rg_in_path: false,
            movers: &[(row, col)],
            parked: &[self.parked(other)],
        })?;
        let (w0, target) = if bit_val {
            (dev.w_off, dev.w_on)
        } else {
            (dev.w_on, dev.w_off)
        };
        let sw = self.cfg.switch_on;
        let sol = ode::integrate_1d(
            |_, w| {
                let r = dev.r_of_w(w);
                let drop = built
                    .net
                    .solve_drops(&[r + sw])
                    .expect("mover range prechecked")[0];
                // Drop is bit side minus word side; the device sees its
                // series share of it, with the model's sign flip.
                let u = drop * r / (r + sw);
                dev.dwdt_bounded(w, -u)
            },
            |w| dev.clamp_w(w),
            0.0,
            self.drives.t_step,
            dev.clamp_w(w0),
            &self.drives.ode_opts(),
        );
        Ok(InitOutcome {
            w: sol.y_end,
            completed: (sol.y_end - target).abs() < 1e-6,
        })
    }

    fn imply_net(&self) -> Result<BuiltNet> {
        let (pr, pc) = self.placement.p;
        let (qr, qc) = self.placement.q;
        self.assemble(&NetSpec {
            driven_cols: &[(pc, self.drives.v_cond), (qc, self.drives.v_set)],
            grounded_rows: &[],
            rows_to_gate: &[pr, qr],
            rg_in_path: true,
            movers: &[(pr, pc), (qr, qc)],
            parked: &[],
        })
    }

    /// IMPLY pulse over the full timestep. Both gate cells co-integrate
    /// against the quasi-static array solve; background cells stay put, and
    /// the returned audit says whether they were entitled to.
    pub fn run_imply(&self, wp0: f64, wq0: f64) -> Result<ImplyRun> {
        self.check_mover_range(self.p)?;
        self.check_mover_range(self.q)?;
        let built = self.imply_net()?;
        let sw = self.cfg.switch_on;
        let series = |wp: f64, wq: f64| [self.p.r_of_w(wp) + sw, self.q.r_of_w(wq) + sw];

        let sol = ode::integrate::<2>(
            |_, y| {
                let rs = series(y[0], y[1]);
                let d = built.net.solve_drops(&rs).expect("mover range prechecked");
                let rp = rs[0] - sw;
                let rq = rs[1] - sw;
                let up = d[0] * rp / rs[0];
                let uq = d[1] * rq / rs[1];
                [
                    self.p.dwdt_bounded(y[0], -up),
                    self.q.dwdt_bounded(y[1], -uq),
                ]
            },
            |y| {
                y[0] = self.p.clamp_w(y[0]);
                y[1] = self.q.clamp_w(y[1]);
            },
            0.0,
            self.drives.t_step,
            [self.p.clamp_w(wp0), self.q.clamp_w(wq0)],
            &self.drives.ode_opts(),
        );

        let audit = |wp: f64, wq: f64| -> Result<(f64, f64)> {
            let full = built.net.solve_full(&series(wp, wq))?;
            let v_g = built
                .gate_node
                .map(|g| full.voltage(g))
                .unwrap_or(f64::NAN);
            let mut max_u = 0.0f64;
            for &(nb, nw, rm) in &built.bg_ends {
                let drop = full.voltage(nb) - full.voltage(nw);
                let u = drop * rm / (rm + self.cfg.switch_off);
                max_u = max_u.max(u.abs());
            }
            Ok((v_g, max_u))
        };
        let (v_g_start, u_start) = audit(wp0, wq0)?;
        let (_, u_end) = audit(sol.y_end[0], sol.y_end[1])?;
        let max_background_drive = u_start.max(u_end);
        // Conservative quiet bound: inside the dead zone whichever way the
        // model-voltage sign lands.
        let quiet_band = self
            .nominal
            .v_off
            .abs()
            .min(self.nominal.v_on.abs());
        Ok(ImplyRun {
            wp_end: sol.y_end[0],
            wq_end: sol.y_end[1],
            v_g_start,
            max_background_drive,
            background_quiet: max_background_drive < quiet_band,
        })
    }

    /// Measure one gate cell: its column driven at V_read, its row grounded,
    /// the partner parked. The sensed quantity is the total current absorbed
    /// by the grounded row ends; the selected line and switch resistances in
    /// the intended path are compensated analytically.
    pub fn readout(&self, which: Operand, w: f64) -> Result<f64> {
        let dev = self.device(which);
        self.check_mover_range(dev)?;
        let (row, col) = self.position(which);
        let other = match which {
            Operand::P => Operand::Q,
            Operand::Q => Operand::P,
        };
        let built = self.assemble(&NetSpec {
            driven_cols: &[(col, self.drives.v_read)],
            grounded_rows: &[row],
            rows_to_gate: &[],
            rg_in_path: false,
            movers: &[(row, col)],
            parked: &[self.parked(other)],
        })?;
        let series = [dev.r_of_w(w) + self.cfg.switch_on];
        let full = built.net.solve_full(&series)?;
        let i_sense = full.current_into(&built.sinks, &series);
        if !(i_sense > 0.0) {
            return Err(Error::SingularNetwork(
                "read drive produced no current into the grounded row".into(),
            ));
        }
        let n = self.cfg.n as f64;
        let lr = self.cfg.line_r;
        let sw = self.cfg.switch_on;
        let par = |a: f64, b: f64| a * b / (a + b);
        let r_top = sw + (row as f64 + 1.0) * lr;
        let r_bottom = sw + (n - 1.0 - row as f64) * lr;
        let r_left = sw + (col as f64 + 1.0) * lr;
        let r_right = sw + (n - 1.0 - col as f64) * lr;
        let comp = par(r_top, r_bottom) + sw + par(r_left, r_right);
        Ok(self.drives.v_read / i_sense - comp)
    }

    /// One truth-table case end to end: write both inputs, run the pulse,
    /// read both cells back. Classification goes through the reference
    /// device map exactly as in the lone gate.
    pub fn run_case(
        &self,
        p_in: bool,
        q_in: bool,
        scheme: &ThresholdScheme,
    ) -> Result<CrossbarCase> {
        let init_p = self.init_cell(Operand::P, p_in)?;
        let init_q = self.init_cell(Operand::Q, q_in)?;
        let init_sp = measured_s(self.nominal, self.p.r_of_w(init_p.w));
        let init_sq = measured_s(self.nominal, self.q.r_of_w(init_q.w));
        let init_inputs_valid = scheme.classify(init_sp, Role::Input) == Some(p_in)
            && scheme.classify(init_sq, Role::Input) == Some(q_in);

        let run = self.run_imply(init_p.w, init_q.w)?;

        // Reads are quasi-static snapshots here; the lone-gate model shows
        // the per-pulse read disturb is femtometer-scale, so the array pass
        // does not re-integrate it.
        let r_q_measured = self.readout(Operand::Q, run.wq_end)?;
        let r_p_measured = self.readout(Operand::P, run.wp_end)?;
        let s_q_measured = measured_s(self.nominal, r_q_measured);
        let s_p_measured = measured_s(self.nominal, r_p_measured);

        let expected = imply_expected(p_in, q_in);
        let output = scheme.classify(s_q_measured, Role::Output);
        let output_correct = output == Some(expected);
        let p_survived = scheme.classify(s_p_measured, Role::Input) == Some(p_in);

        Ok(CrossbarCase {
            p_in,
            q_in,
            expected,
            init_completed: init_p.completed && init_q.completed,
            init_sp,
            init_sq,
            init_inputs_valid,
            wp_end: run.wp_end,
            wq_end: run.wq_end,
            r_p_measured,
            r_q_measured,
            s_p_measured,
            s_q_measured,
            output,
            output_correct,
            p_survived,
            v_g_start: run.v_g_start,
            max_background_drive: run.max_background_drive,
            background_quiet: run.background_quiet,
        })
    }

    /// All four cases with fresh writes each time, plus the combined verdict
    /// under the same rule as the lone gate: every output correct, every
    /// input written validly, P intact afterwards.
    pub fn run_truth_table(&self, scheme: &ThresholdScheme) -> Result<CrossbarTruthTable> {
        let mut cases = Vec::with_capacity(4);
        for (p_in, q_in) in TRUTH_TABLE_INPUTS {
            cases.push(self.run_case(p_in, q_in, scheme)?);
        }
        let cases: [CrossbarCase; 4] = cases.try_into().expect("four cases");
        let correct = cases
            .iter()
            .all(|c| c.output_correct && c.p_survived && c.init_inputs_valid);
        let failure_stage = if correct {
            None
        } else if cases.iter().any(|c| !c.init_inputs_valid) {
            Some(crate::gate::FailureStage::Initialization)
        } else {
            Some(crate::gate::FailureStage::Operation)
        };
        let max_background_drive = cases
            .iter()
            .map(|c| c.max_background_drive)
            .fold(0.0, f64::max);
        let background_quiet = cases.iter().all(|c| c.background_quiet);
        Ok(CrossbarTruthTable {
            cases,
            correct,
            failure_stage,
            max_background_drive,
            background_quiet,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ImplyRun {
    pub wp_end: f64,
    pub wq_end: f64,
    /// Shared gate-node voltage at the start of the pulse.
    pub v_g_start: f64,
    /// Largest voltage share seen across any background memristor at the
    /// pulse-start and pulse-end checkpoints.
    pub max_background_drive: f64,
    /// True when that drive stays strictly inside the dead zone, so the
    /// frozen background states are exact, not an approximation.
    pub background_quiet: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CrossbarCase {
    pub p_in: bool,
    pub q_in: bool,
    pub expected: bool,
    /// Both write pulses reached their target bound.
    pub init_completed: bool,
    pub init_sp: f64,
    pub init_sq: f64,
    pub init_inputs_valid: bool,
    pub wp_end: f64,
    pub wq_end: f64,
    pub r_p_measured: f64,
    pub r_q_measured: f64,
    pub s_p_measured: f64,
    pub s_q_measured: f64,
    pub output: Option<bool>,
    pub output_correct: bool,
    pub p_survived: bool,
    pub v_g_start: f64,
    pub max_background_drive: f64,
    pub background_quiet: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CrossbarTruthTable {
    pub cases: [CrossbarCase; 4],
    pub correct: bool,
    pub failure_stage: Option<crate::gate::FailureStage>,
    pub max_background_drive: f64,
    pub background_quiet: bool,
}

/// One placement's truth-table verdict for one parameter tuple.
#[derive(Debug, Clone)]
pub struct PlacementOutcome {
    pub placement: Placement,
    pub table: Option<CrossbarTruthTable>,
    pub correct: bool,
    pub failure_stage: Option<crate::gate::FailureStage>,
    pub diagnostic: Option<String>,
}

/// One tuple of the crossbar sweep: per-placement results plus the combined
/// worst case (a tuple passes only when every placement passes).
#[derive(Debug, Clone)]
pub struct CrossbarSweepOutcome {
    pub tuple: crate::sweep::ParamTuple,
    pub placements: Vec<PlacementOutcome>,
    pub correct: bool,
    pub failure_stage: Option<crate::gate::FailureStage>,
    pub predicted_ok: Option<bool>,
}

/// The single-gate sweep methodology run inside the array: every grid tuple
/// at every placement, combined as the worst case across placements.
/// Parallel across (tuple, placement) pairs; output order is by tuple index.
pub fn run_crossbar_sweep(
    spec: &crate::sweep::VariationSpec,
    cfg: &CrossbarConfig,
    drives: &GateConfig,
    nominal: &MemristorParams,
    placements: &[Placement],
    background: &[f64],
) -> Result<Vec<CrossbarSweepOutcome>> {
    use rayon::prelude::*;
    if placements.is_empty() {
        return Err(Error::InvalidConfig("no placements given".into()));
    }
    for pl in placements {
        pl.validate(cfg.n)?;
    }
    let scheme = ThresholdScheme::preset(spec.scheme);
    let grid = crate::sweep::generate_grid(spec, nominal);
    let mut outcomes: Vec<CrossbarSweepOutcome> = grid
        .into_par_iter()
        .map(|tuple| {
            let (p, q) = tuple.devices(spec.family, nominal);
            if let Err(e) = p.validate().and_then(|_| q.validate()) {
                return CrossbarSweepOutcome {
                    tuple,
                    placements: placements
                        .iter()
                        .map(|&placement| PlacementOutcome {
                            placement,
                            table: None,
                            correct: false,
                            failure_stage: None,
                            diagnostic: Some(e.to_string()),
                        })
                        .collect(),
                    correct: false,
                    failure_stage: None,
                    predicted_ok: None,
                };
            }
            let placements: Vec<PlacementOutcome> = placements
                .par_iter()
                .map(|&placement| {
                    match Crossbar::new(cfg, drives, &p, &q, nominal, placement, background)
                        .and_then(|xb| xb.run_truth_table(&scheme))
                    {
                        Ok(table) => PlacementOutcome {
                            placement,
                            table: Some(table),
                            correct: table.correct,
                            failure_stage: table.failure_stage,
                            diagnostic: None,
                        },
                        Err(e) => PlacementOutcome {
                            placement,
                            table: None,
                            correct: false,
                            failure_stage: None,
                            diagnostic: Some(e.to_string()),
                        },
                    }
                })
                .collect();
            let correct = placements.iter().all(|o| o.correct);
            let failure_stage = if correct {
                None
            } else if placements
                .iter()
                .any(|o| o.failure_stage == Some(crate::gate::FailureStage::Initialization))
            {
                Some(crate::gate::FailureStage::Initialization)
            } else if placements.iter().any(|o| o.failure_stage.is_some()) {
                Some(crate::gate::FailureStage::Operation)
            } else {
                None
            };
            let predicted_ok = Some(
                crate::constraints::full_report(&p, &q, nominal, drives, &scheme)
                    .all_satisfied(),
            );
            CrossbarSweepOutcome {
                tuple,
                placements,
                correct,
                failure_stage,
                predicted_ok,
            }
        })
        .collect();
    outcomes.sort_by_key(|o| o.tuple.index);
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::solve_gate_voltages;
    use crate::thresholds::{SchemeId, ThresholdScheme};

    fn zero_background(n: usize) -> Vec<f64> {
        vec![0.0; n * n]
    }

    /// With zero line resistance and near-ideal switches the array must
    /// reproduce the lone gate's closed-form node voltages.
    #[test]
    fn ideal_array_matches_closed_form_gate() {
        let mut cfg = CrossbarConfig::nominal();
        cfg.line_r = 0.0;
        cfg.switch_on = 1e-9;
        cfg.switch_off = 1e9;
        let drives = GateConfig::nominal();
        let nom = MemristorParams::nominal();
        let bg = zero_background(cfg.n);
        let placement = Placement { p: (0, 0), q: (15, 15) };

        for (policy, vg_expect, tol) in [
            (UnselectedPolicy::Floating, 0.070_598_041, 5e-4),
            (UnselectedPolicy::Grounded, 0.070_362_568, 5e-5),
        ] {
            let mut cfg = cfg;
            cfg.unselected = policy;
            let xb = Crossbar::new(&cfg, &drives, &nom, &nom, &nom, placement, &bg).unwrap();
            let built = xb.imply_net().unwrap();
            let r = nom.r_of_w(nom.w_off); // both devices fully reset
            let series = [r + cfg.switch_on, r + cfg.switch_on];
            let full = built.net.solve_full(&series).unwrap();
            let uq = full.mover_drop(1) * r / series[1];
            let exact = solve_gate_voltages(&drives, r, r);
            let rel = (uq - exact.v_q).abs() / exact.v_q;
            assert!(
                rel < tol,
                "{}: u_q={uq} vs {} rel {rel}",
                policy.as_str(),
                exact.v_q
            );
            let vg = full.voltage(built.gate_node.unwrap());
            assert!(
                (vg - vg_expect).abs() < 1e-6,
                "{}: v_g={vg} expected {vg_expect}",
                policy.as_str()
            );
        }
    }

    /// Line and switch compensation keeps single-cell reads honest when the
    /// sneak paths are shut off.
    #[test]
    fn readout_compensation_recovers_cell_resistance() {
        let mut cfg = CrossbarConfig::nominal();
        cfg.switch_off = 1e12;
        let drives = GateConfig::nominal();
        let nom = MemristorParams::nominal();
        let bg = zero_background(cfg.n);
        for placement in default_placements(cfg.n) {
            let xb = Crossbar::new(&cfg, &drives, &nom, &nom, &nom, placement, &bg).unwrap();
            for s in [0.0, 0.5, 1.0] {
                let w = nom.w_of_s(s);
                let r_true = nom.r_of_w(w);
                let r_meas = xb.readout(Operand::Q, w).unwrap();
                let rel = (r_meas - r_true).abs() / r_true;
                assert!(
                    rel < 1e-3,
                    "placement {} s={s}: {r_meas} vs {r_true} rel {rel}",
                    placement.label()
                );
            }
        }
    }

    #[test]
    fn in_array_writes_reach_both_bounds() {
        let cfg = CrossbarConfig::nominal();
        let drives = GateConfig::nominal();
        let nom = MemristorParams::nominal();
        let bg = zero_background(cfg.n);
        let placement = Placement { p: (0, 0), q: (15, 15) };
        let xb = Crossbar::new(&cfg, &drives, &nom, &nom, &nom, placement, &bg).unwrap();
        let one = xb.init_cell(Operand::P, true).unwrap();
        assert!(one.completed, "set write stopped at w={}", one.w);
        let zero = xb.init_cell(Operand::Q, false).unwrap();
        assert!(zero.completed, "reset write stopped at w={}", zero.w);
    }

    /// Full nominal truth table at 16x16 against frozen reference values,
    /// including the gate-node voltage, the measured output resistance and
    /// the background isolation audit.
    #[test]
    fn nominal_truth_table_matches_reference() {
        let cfg = CrossbarConfig::nominal();
        let drives = GateConfig::nominal();
        let nom = MemristorParams::nominal();
        let bg = zero_background(cfg.n);
        let placement = Placement { p: (0, 0), q: (15, 15) };
        let xb = Crossbar::new(&cfg, &drives, &nom, &nom, &nom, placement, &bg).unwrap();
        let scheme = ThresholdScheme::preset(SchemeId::Half);
        let table = xb.run_truth_table(&scheme).unwrap();
        assert!(table.correct, "nominal array gate must pass all cases");

        let c00 = &table.cases[0];
        assert!((nom.s_of_w(c00.wp_end) - 0.093_273).abs() < 2e-3, "sP={}", nom.s_of_w(c00.wp_end));
        assert!((nom.s_of_w(c00.wq_end) - 0.815_921).abs() < 2e-3, "sQ={}", nom.s_of_w(c00.wq_end));
        assert!((c00.v_g_start - 0.072_598).abs() < 1e-4, "v_g={}", c00.v_g_start);
        assert!((c00.r_q_measured - 191_416.0).abs() < 4_000.0, "rQ={}", c00.r_q_measured);

        let c01 = &table.cases[1];
        assert!((c01.r_q_measured - 9_998.0).abs() < 50.0, "rQ={}", c01.r_q_measured);
        let c10 = &table.cases[2];
        assert!((c10.r_q_measured - 978_149.0).abs() < 4_000.0, "rQ={}", c10.r_q_measured);

        assert!(table.background_quiet);
        assert!(
            table.max_background_drive < 0.01,
            "background drive {} exceeds the dead zone",
            table.max_background_drive
        );
    }
}
