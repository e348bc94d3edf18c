//! Accumulated phase integral varsigma(x) = -(1/2k) * integral_0^x v(s) ds,
//! the WKB-style phase S(x) = k x + varsigma(x), the running average
//! V(x) = -(1/x) * integral_0^x v, and the four asymptotic phase limits.
//!
//! Every potential family evaluates varsigma in closed form; tabulated data
//! integrates its cubic interpolant exactly panel by panel, so no quadrature
//! error enters anywhere in this module.

use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::potential::PotentialModel;

#[derive(Clone, Debug)]
pub struct PhaseProfile {
    model: PotentialModel,
    k: f64,
}

impl PhaseProfile {
    pub fn new(model: PotentialModel, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("wavenumber must be positive and finite, got {k}")));
        }
        Ok(PhaseProfile { model, k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    /// integral_0^x v(s) ds in closed form.
    fn integral_from_origin(model: &PotentialModel, x: f64) -> C64 {
        match model {
            PotentialModel::Zero => C64::new(0.0, 0.0),
            PotentialModel::SquareBarrier { height, left, right } => {
                let span = x.clamp(*left, *right) - 0.0f64.clamp(*left, *right);
                *height * span
            }
            PotentialModel::CoulombLike { g, z, a } => {
                if x <= *a {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(*g * (x / a).ln(), 0.0) + *z * ((x - a) / (a * x))
                }
            }
            PotentialModel::Tabulated(t) => {
                t.integral_from_start(x) - t.integral_from_start(0.0)
            }
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let xc = x.clamp(*lo, *hi);
                let oc = 0.0f64.clamp(*lo, *hi);
                Self::integral_from_origin(inner, xc) - Self::integral_from_origin(inner, oc)
            }
            PotentialModel::Reflected { inner } => -Self::integral_from_origin(inner, -x),
        }
    }

    pub fn varsigma(&self, x: f64) -> C64 {
        Self::integral_from_origin(&self.model, x) * C64::new(-0.5 / self.k, 0.0)
    }

    /// S(x) = k x + varsigma(x).
    pub fn s_of(&self, x: f64) -> C64 {
        C64::new(self.k * x, 0.0) + self.varsigma(x)
    }

    /// Running average V(x) = -(1/x) integral_0^x v = 2k varsigma(x)/x.
    pub fn v_of(&self, x: f64) -> Result<C64> {
        if x == 0.0 {
            return Err(Error::Domain("running average V is undefined at x = 0".into()));
        }
        Ok(self.varsigma(x) * (2.0 * self.k / x))
    }

    fn limit_right(model: &PotentialModel, k: f64) -> Result<C64> {
        match model {
            PotentialModel::Zero => Ok(C64::new(0.0, 0.0)),
            PotentialModel::SquareBarrier { .. } | PotentialModel::Tabulated(_) => {
                let (_, shi) = model.support().unwrap();
                Ok(Self::integral_from_origin(model, shi.max(0.0)) * C64::new(-0.5 / k, 0.0))
            }
            PotentialModel::CoulombLike { g, z, a } => {
                if *g != 0.0 {
                    Err(Error::Domain(
                        "theta_plus limit does not exist for a long-range potential".into(),
                    ))
                } else {
                    Ok(-*z / (2.0 * k * a))
                }
            }
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let oc = 0.0f64.clamp(*lo, *hi);
                let base = if hi.is_finite() {
                    Self::integral_from_origin(inner, *hi) * C64::new(-0.5 / k, 0.0)
                } else {
                    Self::limit_right(inner, k)?
                };
                Ok(base - Self::integral_from_origin(inner, oc) * C64::new(-0.5 / k, 0.0))
            }
            PotentialModel::Reflected { inner } => Ok(-Self::limit_left(inner, k)?),
        }
    }

    fn limit_left(model: &PotentialModel, k: f64) -> Result<C64> {
        match model {
            PotentialModel::Zero | PotentialModel::CoulombLike { .. } => Ok(C64::new(0.0, 0.0)),
            PotentialModel::SquareBarrier { .. } | PotentialModel::Tabulated(_) => {
                let (slo, _) = model.support().unwrap();
                Ok(Self::integral_from_origin(model, slo.min(0.0)) * C64::new(-0.5 / k, 0.0))
            }
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let oc = 0.0f64.clamp(*lo, *hi);
                let base = if lo.is_finite() {
                    Self::integral_from_origin(inner, *lo) * C64::new(-0.5 / k, 0.0)
                } else {
                    Self::limit_left(inner, k)?
                };
                Ok(base - Self::integral_from_origin(inner, oc) * C64::new(-0.5 / k, 0.0))
            }
            PotentialModel::Reflected { inner } => Ok(-Self::limit_right(inner, k)?),
        }
    }

    fn im_limit_right(model: &PotentialModel, k: f64) -> Result<f64> {
        match model {
            PotentialModel::CoulombLike { z, a, .. } => Ok(-z.im / (2.0 * k * a)),
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let oc = 0.0f64.clamp(*lo, *hi);
                let base = if hi.is_finite() {
                    -0.5 / k * Self::integral_from_origin(inner, *hi).im
                } else {
                    Self::im_limit_right(inner, k)?
                };
                Ok(base + 0.5 / k * Self::integral_from_origin(inner, oc).im)
            }
            PotentialModel::Reflected { inner } => Ok(-Self::im_limit_left(inner, k)?),
            other => Ok(Self::limit_right(other, k)?.im),
        }
    }

    fn im_limit_left(model: &PotentialModel, k: f64) -> Result<f64> {
        match model {
            PotentialModel::CoulombLike { .. } => Ok(0.0),
            PotentialModel::Restricted { inner, lo, hi, .. } => {
                let oc = 0.0f64.clamp(*lo, *hi);
                let base = if lo.is_finite() {
                    -0.5 / k * Self::integral_from_origin(inner, *lo).im
                } else {
                    Self::im_limit_left(inner, k)?
                };
                Ok(base + 0.5 / k * Self::integral_from_origin(inner, oc).im)
            }
            PotentialModel::Reflected { inner } => Ok(-Self::im_limit_right(inner, k)?),
            other => Ok(Self::limit_left(other, k)?.im),
        }
    }

    /// theta_plus = lim_{x -> +inf} varsigma(x); errors when the potential's
    /// right tail is long-range so the limit does not exist.
    pub fn theta_plus(&self) -> Result<C64> {
        Self::limit_right(&self.model, self.k)
    }

    /// theta_minus = lim_{x -> -inf} varsigma(x).
    pub fn theta_minus(&self) -> Result<C64> {
        Self::limit_left(&self.model, self.k)
    }

    /// Imaginary part of the right phase limit; exists whenever Im v is
    /// short-range, even when theta_plus itself diverges.
    pub fn theta_i_plus(&self) -> Result<f64> {
        Self::im_limit_right(&self.model, self.k)
    }

    pub fn theta_i_minus(&self) -> Result<f64> {
        Self::im_limit_left(&self.model, self.k)
    }

    /// Alias for theta_plus, named for its role as the saturated phase of a
    /// compactly supported piece in transfer-matrix composition.
    pub fn varsigma_inf(&self) -> Result<C64> {
        self.theta_plus()
    }

    /// Extrapolated right limit of varsigma on the geometric grid x0 * 2^n,
    /// assuming an O(x^-p) tail. Used to cross-check the closed forms.
    pub fn theta_plus_extrapolated(&self, x0: f64, p: f64, levels: usize) -> (C64, f64) {
        crate::quad::richardson_limit(&|x| self.varsigma(x), x0, p, levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_potential_has_free_phase() {
        let p = PhaseProfile::new(PotentialModel::zero(), 0.7).unwrap();
        assert_eq!(p.varsigma(5.0), c(0.0, 0.0));
        assert!((p.s_of(5.0) - c(3.5, 0.0)).norm() < 1e-15);
        assert_eq!(p.theta_plus().unwrap(), c(0.0, 0.0));
        assert_eq!(p.theta_minus().unwrap(), c(0.0, 0.0));
        assert_eq!(p.theta_i_plus().unwrap(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_wavenumber() {
        assert!(PhaseProfile::new(PotentialModel::zero(), 0.0).is_err());
        assert!(PhaseProfile::new(PotentialModel::zero(), -2.0).is_err());
    }

    #[test]
    fn imaginary_barrier_phase() {
        let h0 = 0.8;
        let k = 1.3;
        let m = PotentialModel::square_barrier(c(0.0, h0), 0.0, 1.0).unwrap();
        let p = PhaseProfile::new(m, k).unwrap();
        let expect = c(0.0, -h0 / (2.0 * k));
        assert!((p.varsigma(2.0) - expect).norm() < 1e-15);
        assert!((p.varsigma(0.5) - expect * 0.5).norm() < 1e-15);
        assert!((p.theta_plus().unwrap() - expect).norm() < 1e-15);
        assert_eq!(p.theta_minus().unwrap(), c(0.0, 0.0));
        assert!((p.theta_i_plus().unwrap() - (-h0 / (2.0 * k))).abs() < 1e-15);
    }

    #[test]
    fn coulomb_like_log_phase_and_average_identity() {
        let m = PotentialModel::coulomb_like(1.0, c(0.0, 0.0), 1.0).unwrap();
        let k = 1.0;
        let p = PhaseProfile::new(m, k).unwrap();
        let e = std::f64::consts::E;
        assert!((p.varsigma(e) - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((p.s_of(e) - c(e - 0.5, 0.0)).norm() < 1e-14);
        for &x in &[0.5, 1.0, 2.0, 10.0, 400.0] {
            let v_avg = p.v_of(x).unwrap();
            let s = C64::new(k * x, 0.0) * (C64::new(1.0, 0.0) + v_avg / (2.0 * k * k));
            assert!(
                (s - p.s_of(x)).norm() <= 1e-12 * p.s_of(x).norm().max(1.0),
                "average-form identity failed at {x}"
            );
        }
        assert!(p.v_of(0.0).is_err());
    }

    #[test]
    fn coulomb_like_phase_derivative_is_minus_v_over_2k() {
        let m = PotentialModel::coulomb_like(-1.0, c(5.0, -1.0), 1.0).unwrap();
        let k = 2.0;
        let p = PhaseProfile::new(m.clone(), k).unwrap();
        for &x in &[1.5, 3.0, 8.0] {
            let h = 1e-6;
            let fd = (p.varsigma(x + h) - p.varsigma(x - h)) / (2.0 * h);
            let expect = -m.eval(x) / (2.0 * k);
            assert!((fd - expect).norm() < 1e-8, "at {x}: {fd} vs {expect}");
        }
    }

    #[test]
    fn theta_limits_for_complex_coulomb_like() {
        let m = PotentialModel::coulomb_like(-1.0, c(5.0, -1.0), 1.0).unwrap();
        let p = PhaseProfile::new(m, 1.0).unwrap();
        assert!(p.theta_plus().is_err());
        assert_eq!(p.theta_minus().unwrap(), c(0.0, 0.0));
        assert!((p.theta_i_plus().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.theta_i_minus().unwrap(), 0.0);
    }

    #[test]
    fn short_range_theta_i_equals_im_theta() {
        let models = [
            PotentialModel::square_barrier(c(1.0, -0.4), -0.5, 2.0).unwrap(),
            PotentialModel::coulomb_like(0.0, c(2.0, 1.5), 1.0).unwrap(),
            PotentialModel::tabulated(
                vec![-1.0, 0.0, 1.0, 2.0],
                vec![c(0.0, 0.0), c(1.0, 0.5), c(0.5, -0.2), c(0.0, 0.0)],
                2.0,
                2.0,
            )
            .unwrap(),
        ];
        for m in models {
            let p = PhaseProfile::new(m, 1.7).unwrap();
            let tp = p.theta_plus().unwrap();
            let tm = p.theta_minus().unwrap();
            assert!((p.theta_i_plus().unwrap() - tp.im).abs() < 1e-14);
            assert!((p.theta_i_minus().unwrap() - tm.im).abs() < 1e-14);
        }
    }

    #[test]
    fn varsigma_is_additive_over_dissection() {
        let models = [
            PotentialModel::coulomb_like(-1.0, c(5.0, -1.0), 1.0).unwrap(),
            PotentialModel::square_barrier(c(2.0, 0.3), -1.5, 2.5).unwrap(),
        ];
        let k = 1.1;
        for m in &models {
            let (vm, v0, vp) = m.dissect(1.25).unwrap();
            let p = PhaseProfile::new(m.clone(), k).unwrap();
            let parts = [
                PhaseProfile::new(vm, k).unwrap(),
                PhaseProfile::new(v0, k).unwrap(),
                PhaseProfile::new(vp, k).unwrap(),
            ];
            for i in -40..60 {
                let x = 0.1 * i as f64;
                let sum: C64 = parts.iter().map(|q| q.varsigma(x)).sum();
                assert!(
                    (sum - p.varsigma(x)).norm() < 1e-13,
                    "additivity failed at x={x}"
                );
            }
        }
    }

    #[test]
    fn restricted_coulomb_slice_matches_direct_integral() {
        let m = PotentialModel::coulomb_like(-1.0, c(5.0, -1.0), 1.0).unwrap();
        let slice = m.truncate(1.0, 2.0).unwrap();
        let k = 10.0;
        let p = PhaseProfile::new(slice, k).unwrap();
        let full = PhaseProfile::new(m, k).unwrap();
        assert!((p.varsigma(1.5) - full.varsigma(1.5)).norm() < 1e-14);
        // saturates beyond the window
        assert!((p.varsigma(5.0) - full.varsigma(2.0)).norm() < 1e-14);
        assert!((p.theta_plus().unwrap() - full.varsigma(2.0)).norm() < 1e-14);
    }

    #[test]
    fn tabulated_phase_matches_riemann_sum() {
        let m = PotentialModel::tabulated(
            vec![-0.5, 0.25, 1.0, 1.75, 2.5],
            vec![c(0.1, 0.0), c(0.9, -0.3), c(0.4, 0.2), c(0.2, 0.0), c(0.0, 0.0)],
            2.0,
            2.0,
        )
        .unwrap();
        let k = 0.9;
        let p = PhaseProfile::new(m.clone(), k).unwrap();
        let x = 2.2;
        let n = 200_000;
        let h = x / n as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            acc += m.eval((i as f64 + 0.5) * h) * h;
        }
        let expect = acc * (-0.5 / k);
        assert!((p.varsigma(x) - expect).norm() < 1e-8);
    }

    #[test]
    fn extrapolated_theta_matches_closed_form() {
        let m = PotentialModel::coulomb_like(0.0, c(2.0, 1.5), 1.0).unwrap();
        let p = PhaseProfile::new(m, 1.3).unwrap();
        let exact = p.theta_plus().unwrap();
        let (est, err) = p.theta_plus_extrapolated(8.0, 1.0, 12);
        assert!((est - exact).norm() < 1e-10, "est {est} exact {exact} err {err}");
    }
}
