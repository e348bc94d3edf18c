//! Sweep execution: one row per (ak, method), evaluated in parallel but
//! emitted in ak-then-method order so identical configs produce byte-identical
//! CSV.

use std::sync::Arc;

use lrscatter::evolution::{self, Convention, NumericOpts};
use lrscatter::ode::OdeOpts;
use lrscatter::perturb;
use lrscatter::phase::PhaseProfile;
use lrscatter::potential::PotentialModel;
use lrscatter::solvable;
use lrscatter::{Amplitudes, C64, SolvableDecomposition};
use rayon::prelude::*;

use crate::config::{FamilySpec, Method, SweepConfig, Vary, ZSpec};

pub const CSV_HEADER: &str =
    "ak,method,re_rl,im_rl,re_rr,im_rr,re_t,im_t,abs2_rl,abs2_rr,abs2_t,det_drift,err_est,error";

#[derive(Clone, Copy, Debug)]
pub struct RowData {
    pub r_left: C64,
    pub r_right: C64,
    pub t: C64,
    pub det_drift: f64,
    pub err_est: f64,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub ak: f64,
    pub method: Method,
    pub outcome: Result<RowData, String>,
}

fn load_tabulated(path: &str, alpha: f64, im_alpha: f64) -> Result<PotentialModel, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read potential file `{path}`: {e}"))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(format!("{path}:{}: expected `x,re[,im]`", idx + 1));
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|_| format!("{path}:{}: bad abscissa `{}`", idx + 1, fields[0]))?;
        let re: f64 = fields[1]
            .parse()
            .map_err(|_| format!("{path}:{}: bad value `{}`", idx + 1, fields[1]))?;
        let im: f64 = match fields.get(2) {
            Some(s) => s.parse().map_err(|_| format!("{path}:{}: bad value `{s}`", idx + 1))?,
            None => 0.0,
        };
        xs.push(x);
        vs.push(C64::new(re, im));
    }
    PotentialModel::tabulated(xs, vs, alpha, im_alpha).map_err(|e| e.to_string())
}

struct Plan {
    cfg: SweepConfig,
    base: Option<Arc<PotentialModel>>,
}

fn make_plan(cfg: &SweepConfig) -> Result<Plan, String> {
    let base = match &cfg.family {
        FamilySpec::File { path, decay_alpha, im_decay_alpha } => {
            Some(Arc::new(load_tabulated(path, *decay_alpha, *im_decay_alpha)?))
        }
        _ => None,
    };
    Ok(Plan { cfg: cfg.clone(), base })
}

/// The (a, k) pair a grid value denotes under the configured sweep mode.
fn point_scales(cfg: &SweepConfig, ak: f64) -> (f64, f64) {
    match cfg.vary {
        Vary::K => (cfg.a, ak / cfg.a),
        Vary::A => {
            let k = cfg.k_fixed.expect("validated");
            (ak / k, k)
        }
    }
}

/// Model and coupling g at a single sweep point.
fn point_model(plan: &Plan, a: f64, k: f64) -> Result<(PotentialModel, f64), String> {
    match &plan.cfg.family {
        FamilySpec::Zero => Ok((PotentialModel::Zero, 0.0)),
        FamilySpec::CoulombLike { coupling, z } => {
            let g = coupling.at(a);
            let z = match z {
                ZSpec::Literal(v) => *v,
                ZSpec::Star => solvable::z_star(g, k),
            };
            PotentialModel::coulomb_like(g, z, a).map(|m| (m, g)).map_err(|e| e.to_string())
        }
        FamilySpec::Barrier { height, left, right } => {
            PotentialModel::square_barrier(*height, *left, *right)
                .map(|m| (m, 0.0))
                .map_err(|e| e.to_string())
        }
        FamilySpec::File { .. } => {
            Ok((plan.base.as_ref().unwrap().as_ref().clone(), 0.0))
        }
    }
}

fn decomp_cut(family: &FamilySpec, a: f64) -> f64 {
    match family {
        FamilySpec::Zero => 0.0,
        FamilySpec::CoulombLike { .. } => a,
        FamilySpec::Barrier { left, .. } => *left,
        FamilySpec::File { .. } => a,
    }
}

fn numeric_opts(tol: f64) -> NumericOpts {
    let rtol = (tol / 10.0).clamp(1e-13, 1e-6);
    NumericOpts {
        tol,
        ode: OdeOpts { rtol, atol: rtol * 1e-2, ..OdeOpts::default() },
        ..NumericOpts::default()
    }
}

fn script_amps(model: &PotentialModel, k: f64, breve: &Amplitudes) -> Result<Amplitudes, String> {
    let phase = PhaseProfile::new(model.clone(), k).map_err(|e| e.to_string())?;
    let tip = phase.theta_i_plus().map_err(|e| e.to_string())?;
    let tim = phase.theta_i_minus().map_err(|e| e.to_string())?;
    breve.breve_to_script(tip, tim).map_err(|e| e.to_string())
}

fn eval_point(plan: &Plan, ak: f64, method: Method) -> Row {
    let (a, k) = point_scales(&plan.cfg, ak);
    let outcome = (|| -> Result<RowData, String> {
        let (model, g) = point_model(plan, a, k)?;
        match method {
            Method::Exact => {
                let tm = solvable::exact_transfer(g, k, a).map_err(|e| e.to_string())?;
                let amps = solvable::exact_amplitudes(g, k, a).map_err(|e| e.to_string())?;
                Ok(RowData {
                    r_left: amps.r_left,
                    r_right: amps.r_right,
                    t: amps.t,
                    det_drift: tm.det_drift,
                    err_est: tm.err_est,
                })
            }
            Method::Ode => {
                let opts = numeric_opts(plan.cfg.tol);
                let tm = evolution::transfer_numeric(&model, k, Convention::Breve, &opts)
                    .map_err(|e| e.to_string())?;
                let breve = evolution::amplitudes(&tm).map_err(|e| e.to_string())?;
                let amps = script_amps(&model, k, &breve)?;
                Ok(RowData {
                    r_left: amps.r_left,
                    r_right: amps.r_right,
                    t: amps.t,
                    det_drift: tm.det_drift,
                    err_est: tm.err_est,
                })
            }
            Method::Pert0 | Method::Pert1 => {
                let cut = decomp_cut(&plan.cfg.family, a);
                let d = SolvableDecomposition::new(&model, k, cut, 0.5)
                    .map_err(|e| e.to_string())?;
                let order = if method == Method::Pert0 { 0 } else { 1 };
                let p = perturb::transfer_plus_perturbative(&d, order)
                    .map_err(|e| e.to_string())?;
                let breve = evolution::amplitudes(&p.m_approx).map_err(|e| e.to_string())?;
                let amps = script_amps(&model, k, &breve)?;
                Ok(RowData {
                    r_left: amps.r_left,
                    r_right: amps.r_right,
                    t: amps.t,
                    det_drift: p.m_approx.det_drift,
                    err_est: p.m_approx.err_est,
                })
            }
        }
    })();
    Row { ak, method, outcome }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<Row>, String> {
    let plan = make_plan(cfg)?;
    let tasks: Vec<(f64, Method)> = cfg
        .ak
        .iter()
        .flat_map(|&ak| cfg.methods.iter().map(move |&m| (ak, m)))
        .collect();
    Ok(tasks.par_iter().map(|&(ak, m)| eval_point(&plan, ak, m)).collect())
}

fn push_f64(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v }; // collapse -0
    out.push(',');
    out.push_str(&format!("{v}"));
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{}", row.ak));
        out.push(',');
        out.push_str(row.method.name());
        match &row.outcome {
            Ok(d) => {
                for v in [
                    d.r_left.re,
                    d.r_left.im,
                    d.r_right.re,
                    d.r_right.im,
                    d.t.re,
                    d.t.im,
                    d.r_left.norm_sqr(),
                    d.r_right.norm_sqr(),
                    d.t.norm_sqr(),
                    d.det_drift,
                    d.err_est,
                ] {
                    push_f64(&mut out, v);
                }
                out.push(',');
            }
            Err(msg) => {
                out.push_str(&",".repeat(12));
                out.push_str(&msg.replace(',', ";").replace('\n', " "));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug)]
pub struct PairReport {
    pub first: Method,
    pub second: Method,
    pub max_gap: f64,
    pub max_at: f64,
    pub points: usize,
    /// Log-log least-squares slope of gap vs ak with a 2-standard-error
    /// half-width, when at least three positive gaps exist.
    pub slope: Option<(f64, f64)>,
}

fn rel_gap(x: &RowData, y: &RowData) -> f64 {
    let c = |p: C64, q: C64| {
        (p.norm_sqr() - q.norm_sqr()).abs() / p.norm_sqr().max(q.norm_sqr()).max(1e-300)
    };
    c(x.r_left, y.r_left).max(c(x.r_right, y.r_right)).max(c(x.t, y.t))
}

fn slope_fit(lx: &[f64], ly: &[f64]) -> Option<(f64, f64)> {
    let n = lx.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 =
        lx.iter().zip(ly).map(|(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let se = (ss_res / (nf - 2.0) / sxx).sqrt();
    Some((slope, 2.0 * se))
}

pub fn summarize(rows: &[Row], methods: &[Method]) -> Vec<PairReport> {
    let mut reports = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let (ma, mb) = (methods[i], methods[j]);
            let mut max_gap = 0.0f64;
            let mut max_at = f64::NAN;
            let mut lx = Vec::new();
            let mut ly = Vec::new();
            let mut points = 0;
            let mut by_ak: std::collections::BTreeMap<u64, (Option<&RowData>, Option<&RowData>)> =
                Default::default();
            for row in rows {
                if let Ok(d) = &row.outcome {
                    let slot = by_ak.entry(row.ak.to_bits()).or_default();
                    if row.method == ma {
                        slot.0 = Some(d);
                    } else if row.method == mb {
                        slot.1 = Some(d);
                    }
                }
            }
            for (bits, pair) in by_ak {
                if let (Some(x), Some(y)) = pair {
                    let ak = f64::from_bits(bits);
                    let gap = rel_gap(x, y);
                    points += 1;
                    if gap >= max_gap {
                        max_gap = gap;
                        max_at = ak;
                    }
                    if gap > 0.0 {
                        lx.push(ak.ln());
                        ly.push(gap.ln());
                    }
                }
            }
            reports.push(PairReport {
                first: ma,
                second: mb,
                max_gap,
                max_at,
                points,
                slope: slope_fit(&lx, &ly),
            });
        }
    }
    reports
}

pub fn render_summary(rows: &[Row], reports: &[PairReport]) -> String {
    let failures = rows.iter().filter(|r| r.outcome.is_err()).count();
    let mut out = format!("rows: {} ({} failed)\n", rows.len(), failures);
    for r in reports {
        out.push_str(&format!(
            "{} vs {}: {} points, max relative gap {:.3e} at ak = {}",
            r.first, r.second, r.points, r.max_gap, r.max_at
        ));
        match r.slope {
            Some((slope, half)) => {
                out.push_str(&format!(", log-log slope {slope:.3} +/- {half:.3}\n"))
            }
            None => out.push('\n'),
        }
    }
    out
}

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(
            "[potential]\nfamily = coulomb-like\ng_over_a = -1\nz = 5-1i\n\n\
             [sweep]\nak = 5:40:36\nspacing = linear\na = 1\n\n\
             [methods]\nuse = pert0,pert1\n\n[output]\npath = fig1.csv\n",
        ),
        "fig2" => Some(
            "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
             [sweep]\nak = 5:60:56\nspacing = linear\na = 1\n\n\
             [methods]\nuse = exact,pert0\n\n[output]\npath = fig2.csv\n",
        ),
        _ => None,
    }
}

fn data(row: &Row) -> Result<&RowData, String> {
    row.outcome.as_ref().map_err(|e| format!("ak = {}, {}: {e}", row.ak, row.method))
}

/// Built-in invariant battery; prints one line per check.
pub fn selftest() -> bool {
    let checks: Vec<(&str, Box<dyn Fn() -> Result<(), String>>)> = vec![
        (
            "free line is the identity for every numeric method",
            Box::new(|| {
                let cfg = crate::config::parse_config(
                    "[potential]\nfamily = zero\n\n[sweep]\nak = 3:3:1\n\n\
                     [methods]\nuse = ode,pert0,pert1\n",
                )
                .map_err(|e| e.join("; "))?;
                let rows = run_sweep(&cfg)?;
                for row in &rows {
                    let d = data(row)?;
                    let worst = d
                        .r_left
                        .norm()
                        .max(d.r_right.norm())
                        .max((d.t - C64::new(1.0, 0.0)).norm());
                    if worst > 1e-12 {
                        return Err(format!("{} drifted by {worst:.2e}", row.method));
                    }
                }
                Ok(())
            }),
        ),
        (
            "solvable desk values at ak = 5",
            Box::new(|| {
                let amps = solvable::exact_amplitudes(-5.0, 5.0, 1.0).map_err(|e| e.to_string())?;
                let t2 = amps.t.norm_sqr();
                let rl2 = amps.r_left.norm_sqr();
                let want_t2 = 0.9070294784580499;
                let want_rl2 = 0.0022675736961451248;
                if (t2 - want_t2).abs() > 1e-9 {
                    return Err(format!("|T|^2 = {t2}, wanted {want_t2}"));
                }
                if (rl2 - want_rl2).abs() > 1e-9 {
                    return Err(format!("|R^l|^2 = {rl2}, wanted {want_rl2}"));
                }
                Ok(())
            }),
        ),
        (
            "transfer matrices stay unimodular across the family set",
            Box::new(|| {
                let k = 2.0;
                let models = [
                    PotentialModel::Zero,
                    PotentialModel::square_barrier(C64::new(2.0, 0.0), 0.0, 1.0)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::square_barrier(C64::new(1.0, 0.5), -1.0, 2.5)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::square_barrier(C64::new(-0.7, 0.0), 0.0, 0.4)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::coulomb_like(-1.0, C64::new(5.0, -1.0), 1.0)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::coulomb_like(-5.0, solvable::z_star(-5.0, k), 1.0)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::coulomb_like(2.0, C64::new(1.0, 0.0), 0.5)
                        .map_err(|e| e.to_string())?,
                    PotentialModel::coulomb_like(-0.3, C64::new(-2.0, 0.25), 2.0)
                        .map_err(|e| e.to_string())?,
                ];
                let opts = numeric_opts(1e-9);
                for (idx, m) in models.iter().enumerate() {
                    let tm = evolution::transfer_numeric(m, k, Convention::Breve, &opts)
                        .map_err(|e| format!("model {idx}: {e}"))?;
                    if tm.det_drift > 1e-8 {
                        return Err(format!("model {idx}: |det - 1| = {:.2e}", tm.det_drift));
                    }
                }
                Ok(())
            }),
        ),
        (
            "independent routes agree on the solvable family",
            Box::new(|| {
                let cfg = crate::config::parse_config(
                    "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
                     [sweep]\nak = 10:10:1\n\n[methods]\nuse = exact,ode\n",
                )
                .map_err(|e| e.join("; "))?;
                let rows = run_sweep(&cfg)?;
                let gap = rel_gap(data(&rows[0])?, data(&rows[1])?);
                if gap > 1e-5 {
                    return Err(format!("exact vs ode gap {gap:.2e}"));
                }
                Ok(())
            }),
        ),
        (
            "support-edge sweep reproduces the first-order error law",
            Box::new(|| {
                let cfg = crate::config::parse_config(
                    "[potential]\nfamily = coulomb-like\ng = -5\nz = star\n\n\
                     [sweep]\nak = 10:160:12\nspacing = log\nvary = a\nk = 5\n\n\
                     [methods]\nuse = exact,pert0\n",
                )
                .map_err(|e| e.join("; "))?;
                let rows = run_sweep(&cfg)?;
                let reports = summarize(&rows, &cfg.methods);
                let (slope, half) = reports[0].slope.ok_or("no slope fit")?;
                if (slope + 1.0).abs() > 0.3 {
                    return Err(format!("slope {slope:.3} +/- {half:.3}, wanted -1 +/- 0.3"));
                }
                Ok(())
            }),
        ),
        (
            "first order beats zeroth on the slow tail",
            Box::new(|| {
                let cfg = crate::config::parse_config(
                    "[potential]\nfamily = coulomb-like\ng_over_a = -1\nz = 5-1i\n\n\
                     [sweep]\nak = 20:20:1\n\n[methods]\nuse = ode,pert0,pert1\n",
                )
                .map_err(|e| e.join("; "))?;
                let rows = run_sweep(&cfg)?;
                let reference = data(&rows[0])?;
                let g0 = rel_gap(data(&rows[1])?, reference);
                let g1 = rel_gap(data(&rows[2])?, reference);
                if g1 >= g0 {
                    return Err(format!("order 1 gap {g1:.2e} vs order 0 gap {g0:.2e}"));
                }
                Ok(())
            }),
        ),
    ];

    let mut all_ok = true;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok   - {name}"),
            Err(msg) => {
                all_ok = false;
                println!("FAIL - {name}: {msg}");
            }
        }
    }
    all_ok
}
