//! Adaptive explicit integrator for the small, stiff-ish state systems in
//! this crate: an embedded Bogacki-Shampine 3(2) pair with FSAL reuse,
//! bounded maximum step, and post-step state clamping.
//!
//! The clamp runs after every accepted step; when it actually moves the
//! state the FSAL derivative is stale and gets recomputed. Combined with
//! right-hand sides that zero the outward derivative at the state bounds
//! (see `MemristorParams::dwdt_bounded`) the clamped bound is a genuine
//! equilibrium and saturated transients cost almost nothing.

#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on the internal step, one thousandth of the operation
    /// timestep by default.
    pub h_max: f64,
}

impl Default for OdeOpts {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-6,
            h_max: 15e-9,
        }
    }
}

impl OdeOpts {
    /// Options scaled to an operation of length `t_step`.
    pub fn for_timestep(t_step: f64) -> Self {
        Self {
            h_max: t_step / 1000.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Solution<const D: usize> {
    pub y_end: [f64; D],
    pub steps: usize,
    pub rejected: usize,
}

/// Integrate y' = rhs(t, y) from t0 to t_end. `clamp` is applied to the
/// state after every accepted step.
pub fn integrate<const D: usize>(
    mut rhs: impl FnMut(f64, &[f64; D]) -> [f64; D],
    mut clamp: impl FnMut(&mut [f64; D]),
    t0: f64,
    t_end: f64,
    y0: [f64; D],
    opts: &OdeOpts,
) -> Solution<D> {
    let mut t = t0;
    let mut y = y0;
    clamp(&mut y);
    let mut h = opts.h_max.min(t_end - t0);
    let mut k1 = rhs(t, &y);
    let mut steps = 0usize;
    let mut rejected = 0usize;

    while t < t_end {
        if h > t_end - t {
            h = t_end - t;
        }
        if h < 1e-18 {
            break;
        }

        let y2 = axpy(&y, 0.5 * h, &k1);
        let k2 = rhs(t + 0.5 * h, &y2);
        let y3 = axpy(&y, 0.75 * h, &k2);
        let k3 = rhs(t + 0.75 * h, &y3);

        let mut y_new = y;
        for i in 0..D {
            y_new[i] += h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
        }
        let k4 = rhs(t + h, &y_new);

        let mut err_norm = 0.0f64;
        for i in 0..D {
            let err = h
                * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i]
                    - 1.0 / 8.0 * k4[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_norm += (err / scale) * (err / scale);
        }
        err_norm = (err_norm / D as f64).sqrt();

        if err_norm <= 1.0 {
            t += h;
            let before = y_new;
            clamp(&mut y_new);
            y = y_new;
            k1 = if y == before { k4 } else { rhs(t, &y) };
            steps += 1;
        } else {
            rejected += 1;
        }

        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(opts.h_max);
    }

    Solution {
        y_end: y,
        steps,
        rejected,
    }
}

fn axpy<const D: usize>(y: &[f64; D], a: f64, k: &[f64; D]) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        out[i] += a * k[i];
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Solution1 {
    pub y_end: f64,
    pub steps: usize,
}

/// Scalar convenience wrapper.
pub fn integrate_1d(
    mut rhs: impl FnMut(f64, f64) -> f64,
    clamp: impl Fn(f64) -> f64,
    t0: f64,
    t_end: f64,
    y0: f64,
    opts: &OdeOpts,
) -> Solution1 {
    let sol = integrate::<1>(
        |t, y| [rhs(t, y[0])],
        |y| y[0] = clamp(y[0]),
        t0,
        t_end,
        [y0],
        opts,
    );
    Solution1 {
        y_end: sol.y_end[0],
        steps: sol.steps,
    }
}
