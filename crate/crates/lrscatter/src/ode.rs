//! Embedded Runge-Kutta integration for the small dense systems used by the
//! transfer-matrix propagators: the Dormand-Prince 5(4) pair with FSAL and a
//! standard PI-free step controller.
//!
//! Reference: Hairer, Norsett & Wanner, Solving Ordinary Differential
//! Equations I, 2nd ed., section II.4 (DOPRI5).

use crate::error::{Error, Result};
use crate::mat2::{C64, Mat2};

/// State vectors the integrator can advance: closed under scaled addition,
/// with a weighted error norm for step control.
pub trait OdeState: Copy {
    fn add_scaled(self, c: f64, k: Self) -> Self;
    /// max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))
    fn weighted_err(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for Mat2 {
    fn add_scaled(self, c: f64, k: Self) -> Self {
        self + k.scale(C64::new(c, 0.0))
    }

    fn weighted_err(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let e = [err.m11, err.m12, err.m21, err.m22];
        let a = [y0.m11, y0.m12, y0.m21, y0.m22];
        let b = [y1.m11, y1.m12, y1.m21, y1.m22];
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let scale = atol + rtol * a[i].norm().max(b[i].norm());
            worst = worst.max(e[i].norm() / scale);
        }
        worst
    }
}

/// Two-component complex state, e.g. (psi, psi').
pub type Vec2 = [C64; 2];

impl OdeState for Vec2 {
    fn add_scaled(self, c: f64, k: Self) -> Self {
        [self[0] + k[0] * c, self[1] + k[1] * c]
    }

    fn weighted_err(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            let scale = atol + rtol * y0[i].norm().max(y1[i].norm());
            worst = worst.max(err[i].norm() / scale);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step size guess; `None` picks a small fraction of the span.
    pub h_init: Option<f64>,
    /// Upper bound on |h|; `None` means a tenth of the span.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOutcome<S> {
    pub y: S,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Sum of accepted local error estimates in the weighted norm; a rough
    /// upper proxy for the accumulated error relative to tolerance.
    pub err_accum: f64,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
pub fn integrate<S, F>(f: F, x0: f64, x1: f64, y0: S, opts: &OdeOpts) -> Result<OdeOutcome<S>>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    if x0 == x1 {
        return Ok(OdeOutcome { y: y0, steps_accepted: 0, steps_rejected: 0, err_accum: 0.0 });
    }
    let span = x1 - x0;
    let dir = span.signum();
    let h_max = opts.h_max.unwrap_or(span.abs() * 0.1).abs();
    let mut h = opts
        .h_init
        .map(|h| h.abs())
        .unwrap_or((span.abs() * 1e-4).min(h_max))
        .min(h_max)
        * dir;

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut err_accum = 0.0;

    while (x1 - x) * dir > 0.0 {
        if (accepted + rejected) >= opts.max_steps {
            return Err(Error::OdeFailure(format!(
                "step limit {} reached at x = {x} (h = {h:.3e})",
                opts.max_steps
            )));
        }
        if ((x + h) - x1) * dir > 0.0 {
            h = x1 - x;
        }

        let y2 = y.add_scaled(h * A21, k1);
        let k2 = f(x + C2 * h, &y2);
        let y3 = y.add_scaled(h * A31, k1).add_scaled(h * A32, k2);
        let k3 = f(x + C3 * h, &y3);
        let y4 = y
            .add_scaled(h * A41, k1)
            .add_scaled(h * A42, k2)
            .add_scaled(h * A43, k3);
        let k4 = f(x + C4 * h, &y4);
        let y5 = y
            .add_scaled(h * A51, k1)
            .add_scaled(h * A52, k2)
            .add_scaled(h * A53, k3)
            .add_scaled(h * A54, k4);
        let k5 = f(x + C5 * h, &y5);
        let y6 = y
            .add_scaled(h * A61, k1)
            .add_scaled(h * A62, k2)
            .add_scaled(h * A63, k3)
            .add_scaled(h * A64, k4)
            .add_scaled(h * A65, k5);
        let k6 = f(x + h, &y6);
        let y7 = y
            .add_scaled(h * A71, k1)
            .add_scaled(h * A73, k3)
            .add_scaled(h * A74, k4)
            .add_scaled(h * A75, k5)
            .add_scaled(h * A76, k6);
        let k7 = f(x + h, &y7);

        let err = {
            let z = y.add_scaled(-1.0, y);
            z.add_scaled(h * E1, k1)
                .add_scaled(h * E3, k3)
                .add_scaled(h * E4, k4)
                .add_scaled(h * E5, k5)
                .add_scaled(h * E6, k6)
                .add_scaled(h * E7, k7)
        };

        let err_norm = S::weighted_err(&err, &y, &y7, opts.atol, opts.rtol);
        if err_norm <= 1.0 {
            x += h;
            y = y7;
            k1 = k7;
            accepted += 1;
            err_accum += err_norm;
        } else {
            rejected += 1;
        }

        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).clamp(-h_max, h_max);
        if h.abs() < 1e-15 * (1.0 + x.abs()) {
            return Err(Error::OdeFailure(format!(
                "step size underflow at x = {x} (err {err_norm:.3e})"
            )));
        }
    }

    Ok(OdeOutcome { y, steps_accepted: accepted, steps_rejected: rejected, err_accum })
}
