//! Transfer matrices via the first-order 2x2 dynamical formulation of the
//! stationary Schrodinger equation.
//!
//! A solution psi is repackaged as a two-component state whose components are
//! the local coefficients of the carrier waves. Three carrier conventions are
//! supported:
//!
//! - standard: plane waves e^{+-ikx}; requires a short-range potential for
//!   the asymptotic coefficients to converge;
//! - breve: phase-corrected carriers e^{+-iS(x)} with S = kx + varsigma(x),
//!   which stay well-defined for 1/x-type tails;
//! - script: the breve matrix renormalized by the imaginary phase limits so
//!   that |T|^2, |R|^2 are the physical intensity coefficients when Im v is
//!   integrable.
//!
//! The state obeys i Psi' = H(x) Psi with a traceless H, so the propagator
//! is unimodular; determinant drift is recorded, never renormalized away.
//! Long-range right tails are handled by integrating the oscillatory system
//! to a residual-controlled cut and closing the remainder with an analytic
//! second-order tail factor whose entries are evaluated to quadrature
//! accuracy.

use crate::error::{Error, Result};
use crate::mat2::{C64, Mat2, I, ONE, ZERO};
use crate::ode::{self, OdeOpts};
use crate::phase::PhaseProfile;
use crate::potential::PotentialModel;
use crate::quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Standard,
    Breve,
    Script,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Ode,
    Composed,
    Solvable,
    Perturbative,
    ClosedForm,
}

/// Phase context a matrix carries so it can participate in composition and
/// convention changes without re-propagation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Frame {
    /// Saturated phase varsigma(+inf) of the underlying potential piece
    /// (None when the limit does not exist).
    pub varsigma_inf: Option<C64>,
    pub theta_i_plus: Option<f64>,
    pub theta_i_minus: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct TransferMatrix {
    pub mat: Mat2,
    pub convention: Convention,
    pub k: f64,
    /// |det M - 1| at construction time.
    pub det_drift: f64,
    /// Accumulated numerical error estimate (0 for closed forms).
    pub err_est: f64,
    pub provenance: Provenance,
    pub frame: Frame,
}

impl TransferMatrix {
    pub fn new(mat: Mat2, convention: Convention, k: f64, provenance: Provenance) -> Self {
        let det_drift = (mat.det() - ONE).norm();
        TransferMatrix { mat, convention, k, det_drift, err_est: 0.0, provenance, frame: Frame::default() }
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn identity(convention: Convention, k: f64) -> Self {
        TransferMatrix::new(Mat2::identity(), convention, k, Provenance::ClosedForm).with_frame(
            Frame {
                varsigma_inf: Some(ZERO),
                theta_i_plus: Some(0.0),
                theta_i_minus: Some(0.0),
            },
        )
    }
}

/// Scattering amplitudes in a fixed carrier convention.
#[derive(Clone, Copy, Debug)]
pub struct Amplitudes {
    pub r_left: C64,
    pub r_right: C64,
    pub t: C64,
    pub convention: Convention,
    pub k: f64,
}

impl Amplitudes {
    /// breve -> script amplitude renormalization.
    pub fn breve_to_script(&self, theta_i_plus: f64, theta_i_minus: f64) -> Result<Amplitudes> {
        if self.convention != Convention::Breve {
            return Err(Error::Domain("breve_to_script needs breve amplitudes".into()));
        }
        Ok(Amplitudes {
            r_left: self.r_left * (2.0 * theta_i_minus).exp(),
            r_right: self.r_right * (-2.0 * theta_i_plus).exp(),
            t: self.t * (theta_i_minus - theta_i_plus).exp(),
            convention: Convention::Script,
            k: self.k,
        })
    }

    /// breve -> standard amplitude dressing (short-range potentials).
    pub fn breve_to_standard(&self, theta_plus: C64, theta_minus: C64) -> Result<Amplitudes> {
        if self.convention != Convention::Breve {
            return Err(Error::Domain("breve_to_standard needs breve amplitudes".into()));
        }
        Ok(Amplitudes {
            r_left: self.r_left * (-2.0 * I * theta_minus).exp(),
            r_right: self.r_right * (2.0 * I * theta_plus).exp(),
            t: self.t * (I * (theta_plus - theta_minus)).exp(),
            convention: Convention::Standard,
            k: self.k,
        })
    }

    /// Amplitudes of the parity-reflected potential: left and right swap.
    pub fn reflected(&self) -> Amplitudes {
        Amplitudes {
            r_left: self.r_right,
            r_right: self.r_left,
            t: self.t,
            convention: self.convention,
            k: self.k,
        }
    }
}

/// H(x) for the plane-wave carriers.
pub fn hamiltonian_standard(model: &PotentialModel, k: f64, x: f64) -> Mat2 {
    let c = model.eval(x) / (2.0 * k);
    let em = C64::new(0.0, -2.0 * k * x).exp();
    let ep = em.conj();
    Mat2::new(c, c * em, -c * ep, -c)
}

/// H(x) for the phase-corrected carriers e^{+-iS}.
pub fn hamiltonian_breve(phase: &PhaseProfile, x: f64) -> Mat2 {
    let k = phase.k();
    let c = phase.model().eval(x) / (2.0 * k);
    let s = phase.s_of(x);
    let em = (-2.0 * I * s).exp();
    let ep = (2.0 * I * s).exp();
    Mat2::new(ZERO, c * em, -c * ep, ZERO)
}

#[derive(Clone, Copy, Debug)]
pub struct PropagationStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Absolute entrywise error proxy: the integrator's accumulated weighted
    /// local errors rescaled into the units of the final state.
    pub err_est: f64,
}

/// Propagator U(x1, x0) of i U' = H U, U(x0, x0) = I.
pub fn propagate<F: Fn(f64) -> Mat2>(
    h: &F,
    x0: f64,
    x1: f64,
    opts: &OdeOpts,
) -> Result<(Mat2, PropagationStats)> {
    let rhs = |x: f64, u: &Mat2| (h(x) * *u).scale(-I);
    let out = ode::integrate(rhs, x0, x1, Mat2::identity(), opts)?;
    let scale = opts.atol + opts.rtol * out.y.norm_max();
    Ok((
        out.y,
        PropagationStats {
            steps_accepted: out.steps_accepted,
            steps_rejected: out.steps_rejected,
            err_est: out.err_accum * scale,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct NumericOpts {
    /// Target accuracy of tail truncation and tail quadratures.
    pub tol: f64,
    /// Integration window override; None derives it from the support and the
    /// tail policy. A finite upper edge suppresses the analytic tail factor.
    pub window: Option<(f64, f64)>,
    pub ode: OdeOpts,
    /// Re-run with a doubled cut and fold the difference into err_est.
    pub verify_tail: bool,
}

impl Default for NumericOpts {
    fn default() -> Self {
        NumericOpts { tol: 1e-9, window: None, ode: OdeOpts::default(), verify_tail: false }
    }
}

pub(crate) fn frame_of(phase: &PhaseProfile) -> Frame {
    Frame {
        varsigma_inf: phase.theta_plus().ok(),
        theta_i_plus: phase.theta_i_plus().ok(),
        theta_i_minus: phase.theta_i_minus().ok(),
    }
}

/// Pick the tail cut X so the discarded remainder beyond the analytic tail
/// factor stays below tol: the off-diagonal residual scales like
/// (|v(X)|/4k^2)^2 and the diagonal one like the square of the remaining
/// 1/(8k^3) integral of v^2.
fn tail_cut(model: &PotentialModel, k: f64, from: f64, tol: f64) -> Result<f64> {
    let tol_t = (tol / 10.0).max(1e-15);
    let mut x = from.max(1.0 / k).max(1.0);
    for _ in 0..60 {
        let q = model.eval(x).norm() / (4.0 * k * k);
        let d = model.eval(x).norm_sqr() * x / (8.0 * k * k * k);
        if q * q <= tol_t && q * d <= tol_t && d * d <= tol_t {
            return Ok(x);
        }
        x *= 2.0;
        if x > 1e12 {
            break;
        }
    }
    Err(Error::WindowTooSmall { x_hi: x, residual: model.eval(x).norm(), tol })
}

/// Analytic closure of the breve propagator over [x_cut, inf):
/// I - i [[0, J-],[-J+, 0]] with the second-order diagonal drift -iD sigma3,
/// where J+- = (1/2k) int v e^{+-2iS} and D = (1/8k^3) int v^2/tau.
fn breve_tail_factor(phase: &PhaseProfile, x_cut: f64, tol: f64) -> Result<(Mat2, f64)> {
    let k = phase.k();
    let model = phase.model();
    let tolq = (tol / 10.0).max(1e-14);

    let phi = |x: f64| 2.0 * (k * x + phase.varsigma(x).re);
    let dphi = |x: f64| 2.0 * k - model.eval(x).re / k;
    let fp = |x: f64| model.eval(x) * (-2.0 * phase.varsigma(x).im).exp() / (2.0 * k);
    let fm = |x: f64| model.eval(x).conj() * (2.0 * phase.varsigma(x).im).exp() / (2.0 * k);
    let (jp, ejp) = quad::oscillatory_tail(&fp, &phi, &dphi, x_cut, tolq)?;
    let (jm_c, ejm) = quad::oscillatory_tail(&fm, &phi, &dphi, x_cut, tolq)?;
    let jm = jm_c.conj();

    let k2 = 2.0 * k * k;
    let dint = |x: f64| {
        let v = model.eval(x);
        v * v / (ONE - v / k2)
    };
    let (dval, ed) = quad::tail_decaying(&dint, x_cut, tolq)?;
    let d = dval / (8.0 * k * k * k);

    let q = model.eval(x_cut).norm() / (4.0 * k * k);
    let residual = q * q + q * d.norm() + d.norm() * d.norm();
    let tail = Mat2::new(ONE - I * d, -I * jm, I * jp, ONE + I * d);
    Ok((tail, ejp + ejm + ed / (8.0 * k * k * k) + residual))
}

fn breve_matrix(
    phase: &PhaseProfile,
    x_lo: f64,
    x_hi: f64,
    append_tail_from: Option<f64>,
    opts: &NumericOpts,
) -> Result<(Mat2, f64)> {
    let h = |x: f64| hamiltonian_breve(phase, x);
    let (mut m, stats) = if x_hi > x_lo {
        propagate(&h, x_lo, x_hi, &opts.ode)?
    } else {
        (Mat2::identity(), PropagationStats { steps_accepted: 0, steps_rejected: 0, err_est: 0.0 })
    };
    let mut err = stats.err_est;
    if let Some(cut) = append_tail_from {
        let (tail, etail) = breve_tail_factor(phase, cut, opts.tol)?;
        m = tail * m;
        err += etail;
    }
    Ok((m, err))
}

/// Whole-line transfer matrix by numerical propagation in the requested
/// convention.
pub fn transfer_numeric(
    model: &PotentialModel,
    k: f64,
    convention: Convention,
    opts: &NumericOpts,
) -> Result<TransferMatrix> {
    let phase = PhaseProfile::new(model.clone(), k)?;
    let Some((slo, shi)) = model.support() else {
        return Ok(TransferMatrix::identity(convention, k));
    };
    if slo == f64::NEG_INFINITY && opts.window.is_none() {
        return Err(Error::Unsupported(
            "left-infinite tails are handled through the parity mapping (reflect the potential and swap the reflection amplitudes)"
                .into(),
        ));
    }

    match convention {
        Convention::Standard => {
            if !model.is_short_range() {
                return Err(Error::LongRangeStandardMatrix { alpha: model.decay_alpha() });
            }
            if let Some((w0, w1)) = opts.window {
                let h = |x: f64| hamiltonian_standard(model, k, x);
                let (m, stats) = propagate(&h, w0, w1, &opts.ode)?;
                let mut tm = TransferMatrix::new(m, convention, k, Provenance::Ode)
                    .with_frame(frame_of(&phase));
                tm.err_est = stats.err_est;
                return Ok(tm);
            }
            if shi.is_finite() {
                let h = |x: f64| hamiltonian_standard(model, k, x);
                let (m, stats) = propagate(&h, slo, shi, &opts.ode)?;
                let mut tm = TransferMatrix::new(m, convention, k, Provenance::Ode)
                    .with_frame(frame_of(&phase));
                tm.err_est = stats.err_est;
                return Ok(tm);
            }
            // Short-range but unbounded: propagate with phase carriers and
            // undo the gauge exactly; theta limits exist here.
            let breve = transfer_numeric(model, k, Convention::Breve, opts)?;
            convert(&breve, Convention::Standard, &phase)
        }
        Convention::Breve | Convention::Script => {
            if !model.is_short_range() && !model.is_admissible_long_range() {
                return Err(Error::Unsupported(format!(
                    "potential decays too slowly for the phase-carrier formulation (alpha = {}, im alpha = {})",
                    model.decay_alpha(),
                    model.im_decay_alpha()
                )));
            }
            let (x_lo, x_hi, cut) = if let Some((w0, w1)) = opts.window {
                if w1.is_finite() {
                    (w0, w1, None)
                } else {
                    let x = tail_cut(model, k, w0.max(slo), opts.tol)?;
                    (w0.max(slo), x, Some(x))
                }
            } else if shi.is_finite() {
                (slo, shi, None)
            } else {
                let x = tail_cut(model, k, slo, opts.tol)?;
                (slo, x, Some(x))
            };
            let (mut m, mut err) = breve_matrix(&phase, x_lo, x_hi, cut, opts)?;
            if opts.verify_tail {
                if let Some(c) = cut {
                    let (m2, _) = breve_matrix(&phase, x_lo, 2.0 * c, Some(2.0 * c), opts)?;
                    err = err.max(m.dist_max(&m2));
                }
            }
            let mut tm = TransferMatrix::new(m, Convention::Breve, k, Provenance::Ode)
                .with_frame(frame_of(&phase));
            tm.err_est = err;
            if convention == Convention::Script {
                let tip = phase.theta_i_plus()?;
                let tim = phase.theta_i_minus()?;
                m = Mat2::exp_sigma3(C64::new(-tip, 0.0)) * tm.mat * Mat2::exp_sigma3(C64::new(tim, 0.0));
                let mut stm = TransferMatrix::new(m, Convention::Script, k, Provenance::Ode)
                    .with_frame(tm.frame);
                stm.err_est = err;
                return Ok(stm);
            }
            Ok(tm)
        }
    }
}

/// Exact convention change by sigma3 exponential dressing; never
/// re-propagates.
pub fn convert(
    tm: &TransferMatrix,
    target: Convention,
    phase: &PhaseProfile,
) -> Result<TransferMatrix> {
    if tm.convention == target {
        return Ok(*tm);
    }
    // route everything through the breve form
    let breve_mat = match tm.convention {
        Convention::Breve => tm.mat,
        Convention::Standard => {
            let tp = phase.theta_plus()?;
            let tn = phase.theta_minus()?;
            Mat2::exp_sigma3(-I * tp) * tm.mat * Mat2::exp_sigma3(I * tn)
        }
        Convention::Script => {
            let tip = phase.theta_i_plus()?;
            let tim = phase.theta_i_minus()?;
            Mat2::exp_sigma3(C64::new(tip, 0.0)) * tm.mat * Mat2::exp_sigma3(C64::new(-tim, 0.0))
        }
    };
    let out = match target {
        Convention::Breve => breve_mat,
        Convention::Standard => {
            let tp = phase.theta_plus()?;
            let tn = phase.theta_minus()?;
            Mat2::exp_sigma3(I * tp) * breve_mat * Mat2::exp_sigma3(-I * tn)
        }
        Convention::Script => {
            let tip = phase.theta_i_plus()?;
            let tim = phase.theta_i_minus()?;
            Mat2::exp_sigma3(C64::new(-tip, 0.0)) * breve_mat * Mat2::exp_sigma3(C64::new(tim, 0.0))
        }
    };
    let mut res = TransferMatrix::new(out, target, tm.k, tm.provenance).with_frame(tm.frame);
    res.err_est = tm.err_est;
    Ok(res)
}

/// Transfer matrix of adjacent pieces laid left to right. Standard matrices
/// multiply directly; breve factors are conjugated by the accumulated
/// saturated phases of the pieces to their left; script factors are
/// undressed to breve, composed, and re-dressed with the summed imaginary
/// limits, so only the outermost factors feel them.
pub fn compose(parts: &[TransferMatrix]) -> Result<TransferMatrix> {
    let Some(first) = parts.first() else {
        return Err(Error::Domain("compose needs at least one factor".into()));
    };
    let (k, conv) = (first.k, first.convention);
    if parts.iter().any(|p| p.convention != conv || p.k != k) {
        return Err(Error::ConditionViolated(
            "compose requires a shared wavenumber and convention".into(),
        ));
    }
    let mut err = 0.0;
    let mut tip_tot = 0.0;
    let mut tim_tot = 0.0;
    let mut vs_ok = true;
    let mut vs_tot = ZERO;
    for p in parts {
        err += p.err_est;
        match (p.frame.theta_i_plus, p.frame.theta_i_minus) {
            (Some(a), Some(b)) => {
                tip_tot += a;
                tim_tot += b;
            }
            _ => {
                if conv == Convention::Script {
                    return Err(Error::Domain(
                        "script composition needs the imaginary phase limits of every piece".into(),
                    ));
                }
            }
        }
        match p.frame.varsigma_inf {
            Some(v) => vs_tot += v,
            None => vs_ok = false,
        }
    }

    let mat = match conv {
        Convention::Standard => {
            let mut m = Mat2::identity();
            for p in parts {
                m = p.mat * m;
            }
            m
        }
        Convention::Breve | Convention::Script => {
            let mut m = Mat2::identity();
            let mut c = ZERO;
            for (j, p) in parts.iter().enumerate() {
                let pm = if conv == Convention::Script {
                    let tip = p.frame.theta_i_plus.unwrap();
                    let tim = p.frame.theta_i_minus.unwrap();
                    Mat2::exp_sigma3(C64::new(tip, 0.0)) * p.mat * Mat2::exp_sigma3(C64::new(-tim, 0.0))
                } else {
                    p.mat
                };
                let dressed = Mat2::exp_sigma3(-I * c) * pm * Mat2::exp_sigma3(I * c);
                m = dressed * m;
                if j + 1 < parts.len() {
                    let vs = p.frame.varsigma_inf.ok_or_else(|| {
                        Error::Domain(
                            "breve composition needs varsigma(inf) for every piece left of the last"
                                .into(),
                        )
                    })?;
                    c += vs;
                }
            }
            if conv == Convention::Script {
                Mat2::exp_sigma3(C64::new(-tip_tot, 0.0)) * m * Mat2::exp_sigma3(C64::new(tim_tot, 0.0))
            } else {
                m
            }
        }
    };
    let frame = Frame {
        varsigma_inf: if vs_ok { Some(vs_tot) } else { None },
        theta_i_plus: Some(tip_tot),
        theta_i_minus: Some(tim_tot),
    };
    let mut tm = TransferMatrix::new(mat, conv, k, Provenance::Composed).with_frame(frame);
    tm.err_est = err;
    Ok(tm)
}

/// Reflection/transmission amplitudes read off the matrix; a vanishing
/// m22 is a spectral singularity and is reported as a hard error.
pub fn amplitudes(tm: &TransferMatrix) -> Result<Amplitudes> {
    let m22 = tm.mat.m22;
    if m22.norm() <= 1e-13 {
        return Err(Error::SpectralSingularity { abs_m22: m22.norm() });
    }
    Ok(Amplitudes {
        r_left: -tm.mat.m21 / m22,
        r_right: tm.mat.m12 / m22,
        t: ONE / m22,
        convention: tm.convention,
        k: tm.k,
    })
}

/// Rebuild the (unimodular) matrix from amplitudes.
pub fn from_amplitudes(
    r_left: C64,
    r_right: C64,
    t: C64,
    k: f64,
    convention: Convention,
) -> Result<TransferMatrix> {
    if t.norm() == 0.0 {
        return Err(Error::Domain("transmission amplitude must be nonzero".into()));
    }
    let mat = Mat2::new(t - r_left * r_right / t, r_right / t, -r_left / t, ONE / t);
    Ok(TransferMatrix::new(mat, convention, k, Provenance::ClosedForm))
}

/// M = G(+inf) G(-inf)^{-1} from a fundamental-solution pair sampled in the
/// two free regions.
pub fn fundamental_to_transfer(g_minus: &Mat2, g_plus: &Mat2) -> Result<Mat2> {
    let inv = g_minus.inverse().filter(|_| g_minus.det().norm() >= 1e-14).ok_or_else(|| {
        Error::Domain(
            "fundamental matrix on the left is singular; the solutions are not independent".into(),
        )
    })?;
    Ok(*g_plus * inv)
}

/// Local two-component repackaging of (psi, psi').
#[derive(Clone, Copy, Debug)]
pub struct TwoComponentState {
    pub up: C64,
    pub dn: C64,
    pub x: f64,
    pub convention: Convention,
}

impl TwoComponentState {
    pub fn from_wave(
        psi: C64,
        dpsi: C64,
        x: f64,
        phase: &PhaseProfile,
        convention: Convention,
    ) -> Result<Self> {
        let k = phase.k();
        let carrier = match convention {
            Convention::Standard => C64::new(0.0, k * x),
            Convention::Breve => I * phase.s_of(x),
            Convention::Script => {
                return Err(Error::Domain(
                    "script normalization applies to whole-line matrices, not local states".into(),
                ))
            }
        };
        let e = carrier.exp();
        Ok(TwoComponentState {
            up: (psi - I * dpsi / k) / (2.0 * e),
            dn: (psi + I * dpsi / k) * e / 2.0,
            x,
            convention,
        })
    }

    /// Reconstruct (psi, psi').
    pub fn wave(&self, phase: &PhaseProfile) -> (C64, C64) {
        let k = phase.k();
        let e = match self.convention {
            Convention::Standard => C64::new(0.0, k * self.x).exp(),
            Convention::Breve => (I * phase.s_of(self.x)).exp(),
            Convention::Script => unreachable!("states are never script-normalized"),
        };
        let psi = e * self.up + self.dn / e;
        let dpsi = I * k * (e * self.up - self.dn / e);
        (psi, dpsi)
    }
}
