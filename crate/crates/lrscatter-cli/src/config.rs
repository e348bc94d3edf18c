//! INI-style sweep configuration: sectioned key=value text with complex
//! literals like `5-1i`. Validation collects every problem instead of
//! stopping at the first.

use std::fmt;

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZSpec {
    Literal(Complex64),
    /// Resolve to the solvable family's distinguished 1/x^2 strength at
    /// each sweep point.
    Star,
}

/// Coulomb strength, either fixed or specified through the product g·a so
/// that `g = value / a` at each sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Direct(f64),
    TimesA(f64),
}

impl Coupling {
    pub fn at(self, a: f64) -> f64 {
        match self {
            Coupling::Direct(g) => g,
            Coupling::TimesA(ga) => ga / a,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Zero,
    CoulombLike { coupling: Coupling, z: ZSpec },
    Barrier { height: Complex64, left: f64, right: f64 },
    File { path: String, decay_alpha: f64, im_decay_alpha: f64 },
}

/// Which physical parameter traces the ak grid: the wavenumber at fixed
/// support edge (the default), or the support edge at fixed wavenumber.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vary {
    K,
    A,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Ode,
    Pert0,
    Pert1,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Ode => "ode",
            Method::Pert0 => "pert0",
            Method::Pert1 => "pert1",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: FamilySpec,
    pub a: f64,
    pub vary: Vary,
    /// Fixed wavenumber; set exactly when `vary = a`.
    pub k_fixed: Option<f64>,
    /// Strictly increasing dimensionless grid.
    pub ak: Vec<f64>,
    /// Canonical order, deduplicated.
    pub methods: Vec<Method>,
    /// Quadrature/ODE tolerance for the numeric methods.
    pub tol: f64,
    /// Gate for `compare`; absent means report-only.
    pub compare_tol: Option<f64>,
    pub out_path: Option<String>,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn split_sections(text: &str, errors: &mut Vec<String>) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            match name.strip_suffix(']') {
                Some(name) => {
                    sections.push(Section { name: name.trim().to_string(), line, entries: vec![] })
                }
                None => errors.push(format!("line {line}: unterminated section header")),
            }
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            errors.push(format!("line {line}: expected `key = value`, got `{trimmed}`"));
            continue;
        };
        let entry =
            Entry { line, key: key.trim().to_string(), value: value.trim().to_string() };
        match sections.last_mut() {
            Some(section) => section.entries.push(entry),
            None => errors.push(format!("line {line}: `{}` appears before any section", entry.key)),
        }
    }
    sections
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    if !s.ends_with('i') && !s.ends_with('I') {
        return s.parse::<f64>().map(Complex64::from).map_err(|_| bad_complex(s));
    }
    let body = &s[..s.len() - 1];
    let bytes = body.as_bytes();
    let mut split = None;
    for j in 1..bytes.len() {
        let c = bytes[j];
        if (c == b'+' || c == b'-') && bytes[j - 1] != b'e' && bytes[j - 1] != b'E' {
            split = Some(j);
        }
    }
    let (re_str, im_str) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str.parse::<f64>().map_err(|_| bad_complex(s))?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad_complex(s))?,
    };
    Ok(Complex64::new(re, im))
}

fn bad_complex(s: &str) -> String {
    format!("`{s}` is not a number or a complex literal like `5-1i`")
}

fn parse_grid(spec: &str, spacing: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("`{spec}` should be min:max:count"));
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| format!("bad grid minimum `{}`", parts[0]))?;
    let max: f64 = parts[1].trim().parse().map_err(|_| format!("bad grid maximum `{}`", parts[1]))?;
    let count: usize =
        parts[2].trim().parse().map_err(|_| format!("bad grid count `{}`", parts[2]))?;
    if !(min > 0.0) {
        return Err(format!("grid must start at positive ak, got {min}"));
    }
    if count == 0 {
        return Err("grid count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    if !(max > min) {
        return Err(format!("grid maximum {max} must exceed minimum {min}"));
    }
    let n = (count - 1) as f64;
    let pts = match spacing {
        "linear" => (0..count).map(|j| min + (max - min) * j as f64 / n).collect(),
        "log" => {
            let ratio = max / min;
            (0..count).map(|j| min * ratio.powf(j as f64 / n)).collect()
        }
        other => return Err(format!("spacing must be linear or log, got `{other}`")),
    };
    Ok(pts)
}

pub fn parse_config(text: &str) -> Result<SweepConfig, Vec<String>> {
    let mut errors = Vec::new();
    let sections = split_sections(text, &mut errors);

    let mut family_kind: Option<(String, usize)> = None;
    let mut g_direct = None;
    let mut g_times_a = None;
    let mut z = None;
    let mut height = None;
    let mut left = None;
    let mut right = None;
    let mut file_path = None;
    let mut decay_alpha = None;
    let mut im_decay_alpha = None;

    let mut ak_spec: Option<(String, usize)> = None;
    let mut spacing = "linear".to_string();
    let mut a = None;
    let mut vary = Vary::K;
    let mut k_fixed = None;
    let mut tol = 1e-9;
    let mut methods: Option<(String, usize)> = None;
    let mut compare_tol = None;
    let mut out_path = None;

    let mut saw_potential = false;
    let mut saw_sweep = false;
    let mut saw_methods = false;

    for section in &sections {
        match section.name.as_str() {
            "potential" => {
                saw_potential = true;
                for e in &section.entries {
                    match e.key.as_str() {
                        "family" => family_kind = Some((e.value.clone(), e.line)),
                        "g" => match e.value.parse::<f64>() {
                            Ok(v) => g_direct = Some(v),
                            Err(_) => errors.push(format!("line {}: g must be a number", e.line)),
                        },
                        "g_over_a" => match e.value.parse::<f64>() {
                            Ok(v) => g_times_a = Some(v),
                            Err(_) => errors
                                .push(format!("line {}: g_over_a must be a number", e.line)),
                        },
                        "z" => {
                            if e.value == "star" {
                                z = Some(ZSpec::Star);
                            } else {
                                match parse_complex(&e.value) {
                                    Ok(v) => z = Some(ZSpec::Literal(v)),
                                    Err(m) => errors.push(format!("line {}: {m}", e.line)),
                                }
                            }
                        }
                        "height" => match parse_complex(&e.value) {
                            Ok(v) => height = Some(v),
                            Err(m) => errors.push(format!("line {}: {m}", e.line)),
                        },
                        "left" => match e.value.parse::<f64>() {
                            Ok(v) => left = Some(v),
                            Err(_) => errors.push(format!("line {}: left must be a number", e.line)),
                        },
                        "right" => match e.value.parse::<f64>() {
                            Ok(v) => right = Some(v),
                            Err(_) => {
                                errors.push(format!("line {}: right must be a number", e.line))
                            }
                        },
                        "file" => file_path = Some(e.value.clone()),
                        "decay_alpha" => match e.value.parse::<f64>() {
                            Ok(v) => decay_alpha = Some(v),
                            Err(_) => errors
                                .push(format!("line {}: decay_alpha must be a number", e.line)),
                        },
                        "im_decay_alpha" => match e.value.parse::<f64>() {
                            Ok(v) => im_decay_alpha = Some(v),
                            Err(_) => errors
                                .push(format!("line {}: im_decay_alpha must be a number", e.line)),
                        },
                        other => errors.push(format!(
                            "line {}: unknown [potential] key `{other}`",
                            e.line
                        )),
                    }
                }
            }
            "sweep" => {
                saw_sweep = true;
                for e in &section.entries {
                    match e.key.as_str() {
                        "ak" => ak_spec = Some((e.value.clone(), e.line)),
                        "spacing" => spacing = e.value.clone(),
                        "a" => match e.value.parse::<f64>() {
                            Ok(v) if v > 0.0 => a = Some(v),
                            _ => errors
                                .push(format!("line {}: a must be a positive number", e.line)),
                        },
                        "vary" => match e.value.as_str() {
                            "k" => vary = Vary::K,
                            "a" => vary = Vary::A,
                            other => errors
                                .push(format!("line {}: vary must be k or a, got `{other}`", e.line)),
                        },
                        "k" => match e.value.parse::<f64>() {
                            Ok(v) if v > 0.0 => k_fixed = Some(v),
                            _ => errors
                                .push(format!("line {}: k must be a positive number", e.line)),
                        },
                        "tol" => match e.value.parse::<f64>() {
                            Ok(v) if v > 0.0 => tol = v,
                            _ => errors
                                .push(format!("line {}: tol must be a positive number", e.line)),
                        },
                        other => {
                            errors.push(format!("line {}: unknown [sweep] key `{other}`", e.line))
                        }
                    }
                }
            }
            "methods" => {
                saw_methods = true;
                for e in &section.entries {
                    match e.key.as_str() {
                        "use" => methods = Some((e.value.clone(), e.line)),
                        "compare_tol" => match e.value.parse::<f64>() {
                            Ok(v) if v > 0.0 => compare_tol = Some(v),
                            _ => errors.push(format!(
                                "line {}: compare_tol must be a positive number",
                                e.line
                            )),
                        },
                        other => {
                            errors.push(format!("line {}: unknown [methods] key `{other}`", e.line))
                        }
                    }
                }
            }
            "output" => {
                for e in &section.entries {
                    match e.key.as_str() {
                        "path" => out_path = Some(e.value.clone()),
                        other => {
                            errors.push(format!("line {}: unknown [output] key `{other}`", e.line))
                        }
                    }
                }
            }
            other => errors.push(format!("line {}: unknown section [{other}]", section.line)),
        }
    }

    if !saw_potential {
        errors.push("missing [potential] section".into());
    }
    if !saw_sweep {
        errors.push("missing [sweep] section".into());
    }
    if !saw_methods {
        errors.push("missing [methods] section".into());
    }

    let family = match &family_kind {
        Some((kind, line)) => match kind.as_str() {
            "zero" => {
                for (given, what) in [
                    (g_direct.is_some(), "g"),
                    (g_times_a.is_some(), "g_over_a"),
                    (z.is_some(), "z"),
                    (height.is_some(), "height"),
                    (file_path.is_some(), "file"),
                ] {
                    if given {
                        errors.push(format!("`{what}` does not apply to family=zero"));
                    }
                }
                Some(FamilySpec::Zero)
            }
            "coulomb-like" => {
                if height.is_some() || left.is_some() || right.is_some() {
                    errors.push("height/left/right only apply to family=barrier".into());
                }
                if file_path.is_some() {
                    errors.push("`file` only applies to family=file".into());
                }
                let coupling = match (g_direct, g_times_a) {
                    (Some(_), Some(_)) => {
                        errors.push("give either g or g_over_a, not both".into());
                        None
                    }
                    (Some(g), None) => Some(Coupling::Direct(g)),
                    (None, Some(ga)) => Some(Coupling::TimesA(ga)),
                    (None, None) => {
                        errors.push("family=coulomb-like requires g or g_over_a".into());
                        None
                    }
                };
                if z.is_none() {
                    errors.push("family=coulomb-like requires z".into());
                }
                match (coupling, z) {
                    (Some(coupling), Some(z)) => Some(FamilySpec::CoulombLike { coupling, z }),
                    _ => None,
                }
            }
            "barrier" => {
                if g_direct.is_some() || g_times_a.is_some() || z.is_some() {
                    errors.push("g/g_over_a/z only apply to family=coulomb-like".into());
                }
                match (height, left, right) {
                    (Some(h), Some(l), Some(r)) if r > l => {
                        Some(FamilySpec::Barrier { height: h, left: l, right: r })
                    }
                    (Some(_), Some(l), Some(r)) => {
                        errors.push(format!("barrier needs right > left, got [{l}, {r}]"));
                        None
                    }
                    _ => {
                        errors.push("family=barrier requires height, left and right".into());
                        None
                    }
                }
            }
            "file" => match (&file_path, decay_alpha) {
                (Some(p), Some(alpha)) => Some(FamilySpec::File {
                    path: p.clone(),
                    decay_alpha: alpha,
                    im_decay_alpha: im_decay_alpha.unwrap_or(alpha),
                }),
                _ => {
                    errors.push("family=file requires file and decay_alpha".into());
                    None
                }
            },
            other => {
                errors.push(format!(
                    "line {line}: unknown family `{other}` (zero, coulomb-like, barrier, file)"
                ));
                None
            }
        },
        None => {
            if saw_potential {
                errors.push("[potential] needs a family".into());
            }
            None
        }
    };

    let ak = match &ak_spec {
        Some((spec, line)) => match parse_grid(spec, &spacing) {
            Ok(pts) => Some(pts),
            Err(m) => {
                errors.push(format!("line {line}: {m}"));
                None
            }
        },
        None => {
            if saw_sweep {
                errors.push("[sweep] needs an ak grid (min:max:count)".into());
            }
            None
        }
    };

    let methods = match &methods {
        Some((list, line)) => {
            let mut parsed = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match name {
                    "exact" => parsed.push(Method::Exact),
                    "ode" => parsed.push(Method::Ode),
                    "pert0" => parsed.push(Method::Pert0),
                    "pert1" => parsed.push(Method::Pert1),
                    other => errors.push(format!(
                        "line {line}: unknown method `{other}` (exact, ode, pert0, pert1)"
                    )),
                }
            }
            parsed.sort();
            parsed.dedup();
            if parsed.is_empty() {
                errors.push("at least one method is required".into());
                None
            } else {
                Some(parsed)
            }
        }
        None => {
            if saw_methods {
                errors.push("[methods] needs `use = ...` with at least one method".into());
            }
            None
        }
    };

    if let (Some(f), Some(ms)) = (&family, &methods) {
        let is_star_coulomb =
            matches!(f, FamilySpec::CoulombLike { z: ZSpec::Star, .. });
        if ms.contains(&Method::Exact) && !is_star_coulomb {
            errors.push(
                "method `exact` needs family=coulomb-like with z=star (the solvable family)"
                    .into(),
            );
        }
        if matches!(f, FamilySpec::File { .. })
            && ms.iter().any(|m| matches!(m, Method::Pert0 | Method::Pert1))
        {
            errors.push("pert0/pert1 need an analytic family, not tabulated data".into());
        }
    }

    match vary {
        Vary::K => {
            if k_fixed.is_some() {
                errors.push("`k` only applies when vary = a".into());
            }
        }
        Vary::A => {
            if k_fixed.is_none() {
                errors.push("vary = a needs a fixed wavenumber: set `k`".into());
            }
            if a.is_some() {
                errors.push("`a` is derived from ak/k when vary = a".into());
            }
            match &family {
                Some(FamilySpec::CoulombLike { coupling: Coupling::Direct(_), .. }) | None => {}
                Some(FamilySpec::CoulombLike { coupling: Coupling::TimesA(_), .. }) => errors.push(
                    "vary = a sweeps the support edge of a fixed potential: give g, not g_over_a"
                        .into(),
                ),
                Some(_) => errors.push("vary = a applies to family=coulomb-like only".into()),
            }
        }
    }

    match (family, ak, methods) {
        (Some(family), Some(ak), Some(methods)) if errors.is_empty() => Ok(SweepConfig {
            family,
            a: a.unwrap_or(1.0),
            vary,
            k_fixed,
            ak,
            methods,
            tol,
            compare_tol,
            out_path,
        }),
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_cover_the_paper_style() {
        assert_eq!(parse_complex("5-1i").unwrap(), Complex64::new(5.0, -1.0));
        assert_eq!(parse_complex("-0.25+0.5i").unwrap(), Complex64::new(-0.25, 0.5));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5e2i").unwrap(), Complex64::new(1e-3, 250.0));
        assert!(parse_complex("star").is_err());
        assert!(parse_complex("5-1j").is_err());
    }

    #[test]
    fn minimal_config_round_trips() {
        let cfg = parse_config(
            "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
             [sweep]\nak = 5:60:56\n\n[methods]\nuse = exact,pert0\n",
        )
        .unwrap();
        assert_eq!(cfg.ak.len(), 56);
        assert!((cfg.ak[0] - 5.0).abs() < 1e-15);
        assert!((cfg.ak[55] - 60.0).abs() < 1e-15);
        assert!((cfg.ak[1] - 6.0).abs() < 1e-12);
        assert_eq!(cfg.methods, vec![Method::Exact, Method::Pert0]);
        assert_eq!(cfg.a, 1.0);
        assert!(matches!(cfg.family, FamilySpec::CoulombLike { z: ZSpec::Star, .. }));
    }

    #[test]
    fn validation_collects_every_problem() {
        let err = parse_config(
            "[potential]\nfamily = quartic\n\n[sweep]\nak = 5:1:10\n\n[methods]\nuse =\n",
        )
        .unwrap_err();
        assert!(err.len() >= 3, "got {err:?}");
        assert!(err.iter().any(|m| m.contains("unknown family")));
        assert!(err.iter().any(|m| m.contains("must exceed")));
        assert!(err.iter().any(|m| m.contains("at least one method")));
    }

    #[test]
    fn exact_method_needs_the_solvable_family() {
        let err = parse_config(
            "[potential]\nfamily = coulomb-like\ng_over_a = -1\nz = 5-1i\n\n\
             [sweep]\nak = 5:10:2\n\n[methods]\nuse = exact\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|m| m.contains("z=star")), "{err:?}");

        let err = parse_config(
            "[potential]\nfamily = zero\n\n[sweep]\nak = 5:10:2\n\n[methods]\nuse = exact,ode\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|m| m.contains("z=star")), "{err:?}");
    }

    #[test]
    fn support_edge_sweeps_need_a_pinned_potential() {
        let cfg = parse_config(
            "[potential]\nfamily = coulomb-like\ng = -5\nz = star\n\n\
             [sweep]\nak = 10:160:12\nspacing = log\nvary = a\nk = 5\n\n\
             [methods]\nuse = exact,pert0\n",
        )
        .unwrap();
        assert_eq!(cfg.vary, Vary::A);
        assert_eq!(cfg.k_fixed, Some(5.0));
        assert!(matches!(
            cfg.family,
            FamilySpec::CoulombLike { coupling: Coupling::Direct(g), .. } if g == -5.0
        ));

        let err = parse_config(
            "[potential]\nfamily = coulomb-like\ng_over_a = -5\nz = star\n\n\
             [sweep]\nak = 10:160:12\nvary = a\na = 2\n\n[methods]\nuse = pert0\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|m| m.contains("give g, not g_over_a")), "{err:?}");
        assert!(err.iter().any(|m| m.contains("set `k`")), "{err:?}");
        assert!(err.iter().any(|m| m.contains("derived from ak/k")), "{err:?}");

        let err = parse_config(
            "[potential]\nfamily = coulomb-like\ng = -5\ng_over_a = -5\nz = star\n\n\
             [sweep]\nak = 10:160:12\nk = 5\n\n[methods]\nuse = pert0\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|m| m.contains("not both")), "{err:?}");
        assert!(err.iter().any(|m| m.contains("only applies when vary = a")), "{err:?}");
    }

    #[test]
    fn log_spacing_and_unknown_keys() {
        let cfg = parse_config(
            "[potential]\nfamily = zero\n\n[sweep]\nak = 1:100:3\nspacing = log\n\n\
             [methods]\nuse = ode\n",
        )
        .unwrap();
        assert!((cfg.ak[1] - 10.0).abs() < 1e-12);

        let err = parse_config(
            "[potential]\nfamily = zero\nwarp = 9\n\n[sweep]\nak = 1:2:2\n\n\
             [methods]\nuse = ode\n\n[plotting]\nstyle = dots\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|m| m.contains("unknown [potential] key `warp`")));
        assert!(err.iter().any(|m| m.contains("unknown section [plotting]")));
    }
}
