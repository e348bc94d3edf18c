//! Quadrature kernels.
//!
//! Three integrators cover every integral in the crate:
//!
//! * [`adaptive`] — bisection-adaptive Gauss-Kronrod 7/15 on a finite
//!   interval (complex integrand, real abscissae), QUADPACK-style error
//!   rescaling.
//! * [`tail_decaying`] — semi-infinite integral of an absolutely integrable
//!   tail, mapped to (0, 1] by `x = x0/t`.
//! * [`oscillatory_tail`] — semi-infinite integral of `f(x) e^{i phi(x)}`
//!   with monotone phase and decaying envelope, by splitting into half-period
//!   phase cells and accelerating the alternating cell sums with iterated
//!   averaging. Handles conditionally convergent envelopes down to `1/x`.
//!
//! References: Piessens et al., QUADPACK (1983); Press et al., Numerical
//! Recipes 3rd ed., ch. 4 (series acceleration).

use crate::error::{Error, Result};
use crate::mat2::C64;

/// Kronrod-15 abscissae on [0, 1] side (symmetric).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod-15 weights.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss-7 weights (nodes are XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 7/15 panel. Returns (integral, error estimate).
pub fn gk15<F>(f: &F, a: f64, b: f64) -> (C64, f64)
where
    F: Fn(f64) -> C64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];

    let mut fv = [C64::new(0.0, 0.0); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        let fsum = f1 + f2;
        kronrod += fsum * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += fsum * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm());
    }

    let result = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0_f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Adaptive Gauss-Kronrod integration of a complex-valued function over a
/// finite interval, to absolute tolerance `tol`.
pub fn adaptive<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<(C64, f64)>
where
    F: Fn(f64) -> C64,
{
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    const MAX_PANELS: usize = 4000;
    let (i0, e0) = gk15(f, a, b);
    let mut stack = vec![(a, b, i0, e0)];
    let mut done: Vec<(C64, f64)> = Vec::new();
    let mut total_err: f64 = e0;

    while let Some((lo, hi, val, err)) = stack.pop() {
        let width_frac = ((hi - lo) / (b - a)).abs();
        if err <= tol * width_frac.max(1e-3) || (hi - lo).abs() < 1e-14 * (b - a).abs() {
            done.push((val, err));
            continue;
        }
        if done.len() + stack.len() > MAX_PANELS {
            return Err(Error::QuadFailure(format!(
                "adaptive GK exceeded {MAX_PANELS} panels on [{a}, {b}] (err {err:.3e}, tol {tol:.3e})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let (il, el) = gk15(f, lo, mid);
        let (ir, er) = gk15(f, mid, hi);
        total_err += el + er - err;
        stack.push((lo, mid, il, el));
        stack.push((mid, hi, ir, er));
    }

    let mut sum = C64::new(0.0, 0.0);
    let mut esum = 0.0;
    for (v, e) in done {
        sum += v;
        esum += e;
    }
    let _ = total_err;
    Ok((sum, esum))
}

/// Integral of `f` over `[x0, inf)` for an absolutely integrable tail that
/// decays at least like `x^{-2}` (possibly with slowly varying factors).
/// Substitutes `x = x0 / t` so the infinite tail becomes `t` in (0, 1].
pub fn tail_decaying<F>(f: &F, x0: f64, tol: f64) -> Result<(C64, f64)>
where
    F: Fn(f64) -> C64,
{
    if x0 <= 0.0 {
        // The inversion map needs a positive start; peel off a finite head.
        let split = x0 + 1.0;
        let (head, eh) = adaptive(f, x0, split, tol)?;
        let (rest, er) = tail_decaying(f, split, tol)?;
        return Ok((head + rest, eh + er));
    }
    let g = |t: f64| -> C64 {
        if t <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let x = x0 / t;
        f(x) * (x0 / (t * t))
    };
    adaptive(&g, 0.0, 1.0, tol)
}

/// Iterated averaging of the partial sums of an (approximately) alternating
/// complex series. Returns the accelerated limit.
fn average_partial_sums(cells: &[C64]) -> C64 {
    let mut s: Vec<C64> = Vec::with_capacity(cells.len());
    let mut acc = C64::new(0.0, 0.0);
    for &c in cells {
        acc += c;
        s.push(acc);
    }
    let mut len = s.len();
    while len > 1 {
        for i in 0..len - 1 {
            s[i] = (s[i] + s[i + 1]) * 0.5;
        }
        len -= 1;
    }
    s[0]
}

/// Integral of `f(x) e^{i phi(x)}` over `[x0, inf)`.
///
/// Requirements: `phi` real and strictly increasing with derivative
/// `dphi > 0` on the tail, `|f|` decreasing to zero (a `1/x` envelope — a
/// conditionally convergent integral — is fine). Complex amplitude factors,
/// including any `e^{-Im phi}` damping, belong in `f`.
///
/// The integral is split at the points where `phi` advances by pi; each cell
/// is integrated with a single GK15 panel (smooth half-oscillations), and the
/// alternating cell series is summed with iterated averaging.
pub fn oscillatory_tail<F, P, D>(f: &F, phi: &P, dphi: &D, x0: f64, tol: f64) -> Result<(C64, f64)>
where
    F: Fn(f64) -> C64,
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    use std::f64::consts::PI;
    const BATCHES: [usize; 4] = [32, 64, 128, 256];

    let integrand = |x: f64| f(x) * C64::new(0.0, phi(x)).exp();

    // advance from x by one pi of phase, Newton with bisection safeguard
    let next_cell = |x: f64| -> Result<f64> {
        let target = phi(x) + PI;
        // the phase itself carries rounding noise of order eps * |phi|
        let tol_phi = 1e-12 * target.abs().max(1.0);
        let mut guess = x + PI / dphi(x).max(1e-12);
        for _ in 0..60 {
            let miss = phi(guess) - target;
            if miss.abs() < tol_phi {
                return Ok(guess);
            }
            let step = miss / dphi(guess).max(1e-12);
            let mut new_guess = guess - step;
            if new_guess <= x {
                new_guess = 0.5 * (guess + x);
            }
            guess = new_guess;
        }
        Err(Error::QuadFailure(format!(
            "phase-cell search failed to converge near x = {x}"
        )))
    };

    let mut cells: Vec<C64> = Vec::new();
    let mut edges = vec![x0];
    let mut best = C64::new(0.0, 0.0);
    let mut prev_best: Option<C64> = None;

    for &n_target in BATCHES.iter() {
        while cells.len() < n_target {
            let lo = *edges.last().unwrap();
            let hi = next_cell(lo)?;
            let (c, _) = gk15(&integrand, lo, hi);
            edges.push(hi);
            cells.push(c);
            // fast-decaying envelope: remaining tail is bounded by the next
            // alternating cell, stop early
            if c.norm() < 0.01 * tol && cells.len() >= 8 {
                let total = average_partial_sums(&cells);
                return Ok((total, c.norm() + 0.01 * tol));
            }
        }
        best = average_partial_sums(&cells);
        let half = average_partial_sums(&cells[..cells.len() / 2]);
        let est = (best - half).norm();
        if est < tol {
            return Ok((best, est));
        }
        prev_best = Some(best);
    }

    let est = prev_best.map(|p| (best - p).norm()).unwrap_or(f64::MAX);
    if est < 10.0 * tol {
        Ok((best, est))
    } else {
        Err(Error::QuadFailure(format!(
            "oscillatory tail did not reach tol {tol:.3e} (estimate {est:.3e}) from x0 = {x0}"
        )))
    }
}

/// Richardson extrapolation of `g(x) -> L + C x^{-p}` along `x_n = x0 2^n`.
/// Returns (L, error estimate).
pub fn richardson_limit<G>(g: &G, x0: f64, p: f64, levels: usize) -> (C64, f64)
where
    G: Fn(f64) -> C64,
{
    let two_p = 2f64.powf(p);
    let mut row: Vec<C64> = (0..levels)
        .map(|n| g(x0 * 2f64.powi(n as i32)))
        .collect();
    let mut last = *row.last().unwrap();
    let mut est = f64::MAX;
    let mut weight = two_p;
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = (row[i + 1] * weight - row[i]) / (weight - 1.0);
        }
        row.pop();
        weight *= 2.0;
        let new = *row.last().unwrap();
        est = (new - last).norm();
        last = new;
    }
    (last, est)
}
