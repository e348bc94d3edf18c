//! Potential models v : R -> C with analytic derivatives, support and decay
//! metadata, truncation, and the three-interval dissection used by the
//! tail-decomposition machinery.
//!
//! Conventions: a tail interval keeps its left endpoint ([a, inf)), the left
//! piece of a dissection keeps its right endpoint ((-inf, -a]), and the
//! middle piece is open. Values at the one or two boundary points are
//! measure-zero for every integral in the crate but the pointwise sum of a
//! dissection reproduces the original potential exactly, boundaries included.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat2::C64;

const ZERO_C: C64 = C64::new(0.0, 0.0);

/// Cubic-Hermite tabulated potential with monotone (Fritsch-Carlson style)
/// slopes fitted separately to the real and imaginary parts.
#[derive(Clone, Debug)]
pub struct Tabulated {
    pub xs: Vec<f64>,
    pub ys: Vec<C64>,
    slopes: Vec<C64>,
    /// Exact integrals of the interpolant from xs[0] to each knot.
    prefix: Vec<C64>,
    pub decay_alpha: f64,
    pub im_decay_alpha: f64,
}

fn monotone_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n == 2 {
        let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return vec![d, d];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

impl Tabulated {
    fn new(xs: Vec<f64>, ys: Vec<C64>, decay_alpha: f64, im_decay_alpha: f64) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Domain(
                "tabulated potential needs at least two (x, v) samples".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(
                "tabulated sample abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().any(|x| !x.is_finite()) || ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Domain("tabulated samples must be finite".into()));
        }
        if !(decay_alpha > 0.0) || !(im_decay_alpha > 0.0) {
            return Err(Error::Domain("decay exponents must be positive".into()));
        }
        let re: Vec<f64> = ys.iter().map(|y| y.re).collect();
        let im: Vec<f64> = ys.iter().map(|y| y.im).collect();
        let mre = monotone_slopes(&xs, &re);
        let mim = monotone_slopes(&xs, &im);
        let slopes: Vec<C64> = mre
            .iter()
            .zip(mim.iter())
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        let mut prefix = Vec::with_capacity(xs.len());
        prefix.push(ZERO_C);
        for i in 0..xs.len() - 1 {
            let h = xs[i + 1] - xs[i];
            let panel =
                (ys[i] + ys[i + 1]) * (0.5 * h) + (slopes[i] - slopes[i + 1]) * (h * h / 12.0);
            let last = *prefix.last().unwrap();
            prefix.push(last + panel);
        }
        Ok(Tabulated { xs, ys, slopes, prefix, decay_alpha, im_decay_alpha })
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return None;
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i - 1,
        };
        Some(i)
    }

    fn eval(&self, x: f64) -> C64 {
        let Some(i) = self.segment(x) else { return ZERO_C };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.ys[i] * h00
            + self.slopes[i] * (h * h10)
            + self.ys[i + 1] * h01
            + self.slopes[i + 1] * (h * h11)
    }

    fn eval_d1(&self, x: f64) -> C64 {
        let Some(i) = self.segment(x) else { return ZERO_C };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        self.ys[i] * d00 + self.slopes[i] * d10 + self.ys[i + 1] * d01 + self.slopes[i + 1] * d11
    }

    fn eval_d2(&self, x: f64) -> C64 {
        let Some(i) = self.segment(x) else { return ZERO_C };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let s00 = (12.0 * t - 6.0) / (h * h);
        let s10 = (6.0 * t - 4.0) / h;
        let s01 = (-12.0 * t + 6.0) / (h * h);
        let s11 = (6.0 * t - 2.0) / h;
        self.ys[i] * s00 + self.slopes[i] * s10 + self.ys[i + 1] * s01 + self.slopes[i + 1] * s11
    }

    /// Exact integral of the interpolant over [xs[0], x] (clamped to the
    /// sample range).
    pub fn integral_from_start(&self, x: f64) -> C64 {
        let xc = x.clamp(self.xs[0], *self.xs.last().unwrap());
        let Some(i) = self.segment(xc) else { return ZERO_C };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (xc - self.xs[i]) / h;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let i00 = 0.5 * t4 - t3 + t;
        let i10 = 0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2;
        let i01 = -0.5 * t4 + t3;
        let i11 = 0.25 * t4 - t3 / 3.0;
        let partial = (self.ys[i] * i00
            + self.slopes[i] * (h * i10)
            + self.ys[i + 1] * i01
            + self.slopes[i + 1] * (h * i11))
            * h;
        self.prefix[i] + partial
    }
}

/// A complex potential on the line. Evaluators return exact zero outside the
/// support; derivative evaluators are analytic (interpolant derivatives for
/// tabulated data).
#[derive(Clone, Debug)]
pub enum PotentialModel {
    Zero,
    /// height on [left, right), zero elsewhere.
    SquareBarrier { height: C64, left: f64, right: f64 },
    /// g/x + z/x^2 on [a, inf), zero below a; requires a > 0.
    CoulombLike { g: f64, z: C64, a: f64 },
    Tabulated(Arc<Tabulated>),
    /// inner restricted to the window; endpoint membership is explicit.
    Restricted {
        inner: Box<PotentialModel>,
        lo: f64,
        hi: f64,
        incl_lo: bool,
        incl_hi: bool,
    },
    /// v(-x).
    Reflected { inner: Box<PotentialModel> },
}

impl PotentialModel {
    pub fn zero() -> Self {
        PotentialModel::Zero
    }

    pub fn square_barrier(height: C64, left: f64, right: f64) -> Result<Self> {
        if !left.is_finite() || !right.is_finite() || !(left < right) {
            return Err(Error::Domain(format!(
                "square barrier needs finite left < right, got [{left}, {right})"
            )));
        }
        if !height.is_finite() {
            return Err(Error::Domain("square barrier height must be finite".into()));
        }
        Ok(PotentialModel::SquareBarrier { height, left, right })
    }

    pub fn coulomb_like(g: f64, z: C64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("coulomb-like cut must be positive, got a = {a}")));
        }
        if !g.is_finite() || !z.is_finite() {
            return Err(Error::Domain("coulomb-like parameters must be finite".into()));
        }
        Ok(PotentialModel::CoulombLike { g, z, a })
    }

    pub fn tabulated(
        xs: Vec<f64>,
        ys: Vec<C64>,
        decay_alpha: f64,
        im_decay_alpha: f64,
    ) -> Result<Self> {
        Ok(PotentialModel::Tabulated(Arc::new(Tabulated::new(
            xs,
            ys,
            decay_alpha,
            im_decay_alpha,
        )?)))
    }

    fn in_window(x: f64, lo: f64, hi: f64, incl_lo: bool, incl_hi: bool) -> bool {
        let above = if incl_lo { x >= lo } else { x > lo };
        let below = if incl_hi { x <= hi } else { x < hi };
        above && below
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            PotentialModel::Zero => ZERO_C,
            PotentialModel::SquareBarrier { height, left, right } => {
                if x >= *left && x < *right {
                    *height
                } else {
                    ZERO_C
                }
            }
            PotentialModel::CoulombLike { g, z, a } => {
                if x >= *a {
                    C64::new(*g / x, 0.0) + *z / (x * x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Tabulated(t) => t.eval(x),
            PotentialModel::Restricted { inner, lo, hi, incl_lo, incl_hi } => {
                if Self::in_window(x, *lo, *hi, *incl_lo, *incl_hi) {
                    inner.eval(x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Reflected { inner } => inner.eval(-x),
        }
    }

    pub fn eval_d1(&self, x: f64) -> C64 {
        match self {
            PotentialModel::Zero | PotentialModel::SquareBarrier { .. } => ZERO_C,
            PotentialModel::CoulombLike { g, z, a } => {
                if x >= *a {
                    C64::new(-*g / (x * x), 0.0) - *z * 2.0 / (x * x * x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Tabulated(t) => t.eval_d1(x),
            PotentialModel::Restricted { inner, lo, hi, incl_lo, incl_hi } => {
                if Self::in_window(x, *lo, *hi, *incl_lo, *incl_hi) {
                    inner.eval_d1(x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Reflected { inner } => -inner.eval_d1(-x),
        }
    }

    pub fn eval_d2(&self, x: f64) -> C64 {
        match self {
            PotentialModel::Zero | PotentialModel::SquareBarrier { .. } => ZERO_C,
            PotentialModel::CoulombLike { g, z, a } => {
                if x >= *a {
                    let x3 = x * x * x;
                    C64::new(2.0 * *g / x3, 0.0) + *z * 6.0 / (x3 * x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Tabulated(t) => t.eval_d2(x),
            PotentialModel::Restricted { inner, lo, hi, incl_lo, incl_hi } => {
                if Self::in_window(x, *lo, *hi, *incl_lo, *incl_hi) {
                    inner.eval_d2(x)
                } else {
                    ZERO_C
                }
            }
            PotentialModel::Reflected { inner } => inner.eval_d2(-x),
        }
    }

    /// Support as (lo, hi), possibly infinite; None for the zero potential.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            PotentialModel::Zero => None,
            PotentialModel::SquareBarrier { left, right, .. } => Some((*left, *right)),
            PotentialModel::CoulombLike { a, .. } => Some((*a, f64::INFINITY)),
            PotentialModel::Tabulated(t) => Some((t.xs[0], *t.xs.last().unwrap())),
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let (slo, shi) = inner.support()?;
                let l = slo.max(*lo);
                let h = shi.min(*hi);
                if l < h { Some((l, h)) } else { None }
            }
            PotentialModel::Reflected { inner } => {
                let (slo, shi) = inner.support()?;
                Some((-shi, -slo))
            }
        }
    }

    /// Decay exponent alpha of |v| <= C (1+|x|)^(-alpha); bounded supports
    /// count as infinitely fast decay.
    pub fn decay_alpha(&self) -> f64 {
        match self {
            PotentialModel::Zero | PotentialModel::SquareBarrier { .. } => f64::INFINITY,
            PotentialModel::CoulombLike { g, z, .. } => {
                if *g != 0.0 {
                    1.0
                } else if *z != ZERO_C {
                    2.0
                } else {
                    f64::INFINITY
                }
            }
            PotentialModel::Tabulated(t) => t.decay_alpha,
            PotentialModel::Restricted { inner, hi, lo, .. } => {
                if hi.is_finite() && lo.is_finite() {
                    f64::INFINITY
                } else {
                    inner.decay_alpha()
                }
            }
            PotentialModel::Reflected { inner } => inner.decay_alpha(),
        }
    }

    /// Decay exponent of Im v.
    pub fn im_decay_alpha(&self) -> f64 {
        match self {
            PotentialModel::Zero | PotentialModel::SquareBarrier { .. } => f64::INFINITY,
            PotentialModel::CoulombLike { z, .. } => {
                if z.im != 0.0 { 2.0 } else { f64::INFINITY }
            }
            PotentialModel::Tabulated(t) => t.im_decay_alpha,
            PotentialModel::Restricted { inner, hi, lo, .. } => {
                if hi.is_finite() && lo.is_finite() {
                    f64::INFINITY
                } else {
                    inner.im_decay_alpha()
                }
            }
            PotentialModel::Reflected { inner } => inner.im_decay_alpha(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            PotentialModel::Zero => true,
            PotentialModel::SquareBarrier { height, .. } => height.im == 0.0,
            PotentialModel::CoulombLike { z, .. } => z.im == 0.0,
            PotentialModel::Tabulated(t) => t.ys.iter().all(|y| y.im == 0.0),
            PotentialModel::Restricted { inner, .. } => inner.is_real(),
            PotentialModel::Reflected { inner } => inner.is_real(),
        }
    }

    /// Short-range: both Re v and Im v decay faster than 1/x (or the support
    /// is bounded).
    pub fn is_short_range(&self) -> bool {
        self.decay_alpha() > 1.0 && self.im_decay_alpha() > 1.0
    }

    /// Admissible for the phase-carrier (breve/script) machinery:
    /// Re v in C_{alpha > 1/2} and Im v short-range.
    pub fn is_admissible_long_range(&self) -> bool {
        self.decay_alpha() > 0.5 && self.im_decay_alpha() > 1.0
    }

    /// Restriction of the potential to [lo, hi) (the left endpoint is kept,
    /// matching the tail-interval convention). Simplifies where the window
    /// swallows or misses the support.
    pub fn truncate(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Domain(format!("truncate needs lo < hi, got [{lo}, {hi})")));
        }
        let Some((slo, shi)) = self.support() else {
            return Ok(PotentialModel::Zero);
        };
        if hi <= slo || lo >= shi {
            return Ok(PotentialModel::Zero);
        }
        if lo <= slo && hi >= shi && (hi == f64::INFINITY || hi > shi) {
            return Ok(self.clone());
        }
        if let PotentialModel::CoulombLike { g, z, a } = self {
            if hi == f64::INFINITY {
                let cut = lo.max(*a);
                return PotentialModel::coulomb_like(*g, *z, cut);
            }
        }
        Ok(PotentialModel::Restricted {
            inner: Box::new(self.clone()),
            lo,
            hi,
            incl_lo: true,
            incl_hi: false,
        })
    }

    /// Split into (v_minus, v_zero, v_plus) supported on (-inf, -a],
    /// (-a, a), [a, inf); the pointwise sum reproduces the potential exactly.
    pub fn dissect(&self, a: f64) -> Result<(Self, Self, Self)> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("dissection half-width must be positive, got {a}")));
        }
        let restrict = |lo: f64, hi: f64, incl_lo: bool, incl_hi: bool| -> Self {
            let Some((slo, shi)) = self.support() else {
                return PotentialModel::Zero;
            };
            if hi < slo || lo > shi || (hi <= slo && !incl_hi) || (lo >= shi && !incl_lo) {
                return PotentialModel::Zero;
            }
            if lo <= slo && hi >= shi && (incl_lo || lo < slo) && (incl_hi || hi > shi) {
                return self.clone();
            }
            PotentialModel::Restricted {
                inner: Box::new(self.clone()),
                lo,
                hi,
                incl_lo,
                incl_hi,
            }
        };
        let v_minus = restrict(f64::NEG_INFINITY, -a, false, true);
        let v_zero = restrict(-a, a, false, false);
        let v_plus = if let PotentialModel::CoulombLike { g, z, a: ac } = self {
            if a <= *ac {
                self.clone()
            } else {
                PotentialModel::coulomb_like(*g, *z, a)?
            }
        } else {
            restrict(a, f64::INFINITY, true, false)
        };
        Ok((v_minus, v_zero, v_plus))
    }

    /// Parity image v(-x).
    pub fn reflect(&self) -> Self {
        match self {
            PotentialModel::Zero => PotentialModel::Zero,
            PotentialModel::Reflected { inner } => (**inner).clone(),
            other => PotentialModel::Reflected { inner: Box::new(other.clone()) },
        }
    }
}
