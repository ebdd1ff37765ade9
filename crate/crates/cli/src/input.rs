//! Turning command-line inputs into library values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use starved_core::config::DEFAULT_SEED;
use starved_core::polynomials::default_hyper_tol;
use starved_core::{Composition, Config, MonicPoly, RootMultiset};

use crate::args::{PolyArgs, TolArgs};
use crate::CliError;

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "STARVED_POLY_SEED";

/// Contents of a `--poly` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyFile {
    #[serde(default)]
    #[allow(dead_code)]
    comment: Option<String>,
    coeffs: Option<Vec<f64>>,
    roots: Option<Vec<f64>>,
    mults: Option<Vec<usize>>,
}

/// The polynomial as given, echoed in output metadata.
#[derive(Debug, Clone, Serialize)]
pub struct PolyEcho {
    pub source: String,
    pub degree: usize,
    pub coeffs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mults: Option<Vec<usize>>,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn from_roots(roots: Vec<f64>, mults: Option<Vec<usize>>) -> Result<(MonicPoly, Vec<usize>), CliError> {
    let mults = mults.unwrap_or_else(|| vec![1; roots.len()]);
    let comp = Composition::new(mults.clone()).map_err(usage)?;
    let r = RootMultiset::new(roots, comp).map_err(usage)?;
    Ok((MonicPoly::from_roots(&r), mults))
}

pub fn read_poly(args: &PolyArgs) -> Result<(MonicPoly, PolyEcho), CliError> {
    let (coeffs, roots, mults, source) = if let Some(path) = &args.poly {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let file: PolyFile =
            serde_json::from_str(&text).map_err(|e| usage(format!("bad polynomial file {}: {e}", path.display())))?;
        (file.coeffs, file.roots, file.mults, display_path(path))
    } else {
        (args.coeffs.clone(), args.roots.clone(), args.mults.clone(), String::new())
    };
    match (coeffs, roots) {
        (Some(c), None) if mults.is_none() => {
            let p = MonicPoly::new(c.clone()).map_err(usage)?;
            let source = if source.is_empty() { "coeffs".into() } else { source };
            Ok((p, PolyEcho { source, degree: c.len(), coeffs: c, roots: None, mults: None }))
        }
        (None, Some(r)) => {
            let (p, m) = from_roots(r.clone(), mults)?;
            let source = if source.is_empty() { "roots".into() } else { source };
            let echo = PolyEcho { source, degree: p.degree(), coeffs: p.coeffs().to_vec(), roots: Some(r), mults: Some(m) };
            Ok((p, echo))
        }
        _ => Err(usage("give the polynomial by --coeffs, by --roots [--mults], or by --poly FILE")),
    }
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}

pub fn seed(explicit: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn config(tol: &TolArgs) -> Result<Config, CliError> {
    let mut cfg = Config::default().with_seed(seed(tol.seed)?);
    for (name, v) in [("--tol-hyper", tol.tol_hyper), ("--tol-cluster", tol.tol_cluster), ("--tol-residual", tol.tol_residual)] {
        if v.is_some_and(|x| !(x.is_finite() && x > 0.0)) {
            return Err(usage(format!("{name} must be a positive number")));
        }
    }
    cfg.hyper_tol = tol.tol_hyper;
    if let Some(c) = tol.tol_cluster {
        cfg.cluster_tol = c;
    }
    if let Some(r) = tol.tol_residual {
        cfg.residual_tol = r;
    }
    Ok(cfg)
}

/// The configuration with the polynomial-dependent default resolved.
#[derive(Debug, Serialize)]
pub struct EffectiveConfig<'a> {
    #[serde(flatten)]
    pub config: &'a Config,
    pub hyper_tol_effective: f64,
}

pub fn effective<'a>(cfg: &'a Config, f: &MonicPoly) -> EffectiveConfig<'a> {
    EffectiveConfig { config: cfg, hyper_tol_effective: cfg.hyper_tol.unwrap_or_else(|| default_hyper_tol(f)) }
}

pub fn composition(text: &str, d: usize) -> Result<Composition, CliError> {
    let u: Composition = text.parse().map_err(usage)?;
    if u.degree() != d {
        return Err(usage(format!("{u} is a composition of {}, expected {d}", u.degree())));
    }
    Ok(u)
}

pub fn check_s(s: usize, d: usize) -> Result<(), CliError> {
    if s > d {
        return Err(usage(format!("--s {s} exceeds the degree {d}")));
    }
    Ok(())
}

/// Parses `lo:hi` pairs.
pub fn bounds(items: &[String]) -> Result<Vec<(f64, f64)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| usage(format!("bound {item:?} is not lo:hi")))?;
            let lo: f64 = a.trim().parse().map_err(|_| usage(format!("bad lower bound in {item:?}")))?;
            let hi: f64 = b.trim().parse().map_err(|_| usage(format!("bad upper bound in {item:?}")))?;
            if !(lo < hi) {
                return Err(usage(format!("bound {item:?} needs lo < hi")));
            }
            Ok((lo, hi))
        })
        .collect()
}
