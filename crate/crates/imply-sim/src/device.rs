//! Voltage-threshold memristor model (VTEAM) with a double-exponential
//! window, plus the state/resistance mappings used everywhere else.
//!
//! Sign convention: `v` is the model voltage. Positive `v` above `v_off`
//! drives the device toward the high-resistance state (reset), negative `v`
//! below `v_on` drives it toward the low-resistance state (set). A device
//! driven by an external voltage `u` across its terminals sees `v = -u`, so
//! a positive applied drive sets the device.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Full parameter set of one device. Lengths are in nm, voltages in V,
/// resistances in ohm, speeds in nm/s, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorParams {
    /// Set threshold, negative.
    pub v_on: f64,
    /// Reset threshold, positive.
    pub v_off: f64,
    /// Low-resistance state (fully set, w = w_on).
    pub r_on: f64,
    /// High-resistance state (fully reset, w = w_off).
    pub r_off: f64,
    /// Set-direction speed coefficient, positive.
    pub k_on: f64,
    /// Reset-direction speed coefficient, negative.
    pub k_off: f64,
    pub alpha_on: u32,
    pub alpha_off: u32,
    /// Window center for the set direction.
    pub a_on: f64,
    /// Window center for the reset direction.
    pub a_off: f64,
    /// Window width.
    pub w_c: f64,
    /// Upper state bound (fully set).
    pub w_on: f64,
    /// Lower state bound (fully reset).
    pub w_off: f64,
}

impl MemristorParams {
    /// Nominal device used throughout: 10 kOhm / 1 MOhm, thresholds
    /// -0.7 V / +10 mV, state range 0..3 nm.
    pub fn nominal() -> Self {
        Self {
            v_on: -0.7,
            v_off: 0.010,
            r_on: 10e3,
            r_off: 1e6,
            k_on: 1.0e7,
            k_off: -0.5,
            alpha_on: 3,
            alpha_off: 3,
            a_on: 3.0,
            a_off: 0.0,
            w_c: 0.1,
            w_on: 3.0,
            w_off: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.v_on < 0.0 && 0.0 < self.v_off) {
            return bad("thresholds must satisfy v_on < 0 < v_off");
        }
        if !(self.r_on < self.r_off) {
            return bad("resistance states must satisfy r_on < r_off");
        }
        if !(self.r_on > 0.0) {
            return bad("r_on must be positive");
        }
        if !(self.w_on > self.w_off) {
            return bad("state bounds must satisfy w_on > w_off");
        }
        if !(self.k_on > 0.0) {
            return bad("k_on must be positive");
        }
        if !(self.k_off < 0.0) {
            return bad("k_off must be negative");
        }
        if !(self.w_c > 0.0) {
            return bad("window width w_c must be positive");
        }
        Ok(())
    }

    /// Normalized state in [0, 1]: 0 = fully reset (HRS), 1 = fully set (LRS).
    pub fn s_of_w(&self, w: f64) -> f64 {
        (w - self.w_off) / (self.w_on - self.w_off)
    }

    pub fn w_of_s(&self, s: f64) -> f64 {
        self.w_off + s * (self.w_on - self.w_off)
    }

    /// Linear resistance map: r(w_off) = r_off, r(w_on) = r_on.
    pub fn r_of_w(&self, w: f64) -> f64 {
        self.r_off + (self.r_on - self.r_off) * self.s_of_w(w)
    }

    pub fn w_of_r(&self, r: f64) -> f64 {
        self.w_of_s((r - self.r_off) / (self.r_on - self.r_off))
    }

    /// Set-direction window factor, suppresses motion near w_on.
    /// The double-exponential form is the only one shipped; swapping the
    /// window means swapping these two methods.
    pub fn window_set(&self, w: f64) -> f64 {
        (-((w - self.a_on) / self.w_c).exp()).exp()
    }

    /// Reset-direction window factor, suppresses motion near w_off.
    pub fn window_reset(&self, w: f64) -> f64 {
        (-(-(w - self.a_off) / self.w_c).exp()).exp()
    }

    /// State velocity dw/dt at model voltage `v`. Zero inside the dead zone
    /// [v_on, v_off]. Threshold exponents are integers by contract, so the
    /// power is exact repeated multiplication.
    pub fn dwdt(&self, w: f64, v: f64) -> f64 {
        if v > self.v_off {
            self.k_off * (v / self.v_off - 1.0).powi(self.alpha_off as i32) * self.window_reset(w)
        } else if v < self.v_on {
            self.k_on * (v / self.v_on - 1.0).powi(self.alpha_on as i32) * self.window_set(w)
        } else {
            0.0
        }
    }

    pub fn clamp_w(&self, w: f64) -> f64 {
        w.clamp(self.w_off, self.w_on)
    }

    /// State velocity with the outward component zeroed at the bounds, the
    /// form the integrators use so the clamped state is a true equilibrium.
    pub fn dwdt_bounded(&self, w: f64, v: f64) -> f64 {
        let rate = self.dwdt(w, v);
        if (w >= self.w_on && rate > 0.0) || (w <= self.w_off && rate < 0.0) {
            0.0
        } else {
            rate
        }
    }

    /// Integrate the state under a constant model voltage for `dt` seconds.
    pub fn integrate_const(&self, w0: f64, v: f64, dt: f64, opts: &crate::ode::OdeOpts) -> f64 {
        let y = crate::ode::integrate_1d(
            |_, w| self.dwdt_bounded(w, v),
            |w| self.clamp_w(w),
            0.0,
            dt,
            self.clamp_w(w0),
            opts,
        );
        y.y_end
    }

    /// Time for the state to cross `s_target` under a constant model voltage,
    /// or None if it does not get there within `t_max`. The crossing instant
    /// is refined by bisection on a cubic Hermite interpolant of the
    /// accepting step.
    pub fn time_to_state(
        &self,
        s_from: f64,
        s_target: f64,
        v: f64,
        t_max: f64,
        opts: &crate::ode::OdeOpts,
    ) -> Option<f64> {
        let w0 = self.w_of_s(s_from);
        let w_target = self.w_of_s(s_target);
        let rising = w_target > w0;
        let mut t = 0.0;
        let mut w = w0;
        let mut h = opts.h_max.min(t_max);
        let crossed = |w: f64| {
            if rising {
                w >= w_target
            } else {
                w <= w_target
            }
        };
        if crossed(w0) {
            return Some(0.0);
        }
        while t < t_max {
            h = h.min(t_max - t);
            let step = crate::ode::integrate_1d(
                |_, w| self.dwdt_bounded(w, v),
                |w| self.clamp_w(w),
                t,
                t + h,
                w,
                opts,
            );
            if crossed(step.y_end) {
                // Bisect inside [t, t+h] on fresh sub-integrations; the step
                // is at most h_max so this converges fast and stays exact.
                let (mut lo, mut hi) = (t, t + h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let probe = crate::ode::integrate_1d(
                        |_, w| self.dwdt_bounded(w, v),
                        |w| self.clamp_w(w),
                        t,
                        mid,
                        w,
                        opts,
                    );
                    if crossed(probe.y_end) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            w = step.y_end;
            t += h;
            let rate = self.dwdt_bounded(w, v);
            if rate.abs() * (t_max - t) < 1e-12 {
                break; // cannot move far enough to matter any more
            }
        }
        None
    }
}
