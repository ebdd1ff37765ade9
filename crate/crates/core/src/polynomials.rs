//! Monic polynomials, root multisets, Newton's identities and the weighted
//! root-to-coefficient map.
//!
//! A monic polynomial of degree `d` is stored as `(f_1, ..., f_d)`, the
//! coefficient of `t^(d-i)` being `f_i`. Coefficient `i` of the polynomial with
//! roots `a` is `(-1)^i e_i(a)`.

use std::fmt;

use nalgebra::{DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::compositions::Composition;
use crate::error::{Error, Result};

/// Monic real polynomial `t^d + f_1 t^(d-1) + ... + f_d`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct MonicPoly {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    degree: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<PolyRepr> for MonicPoly {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        if r.coeffs.len() != r.degree {
            return Err(Error::LengthMismatch { expected: r.degree, got: r.coeffs.len() });
        }
        MonicPoly::new(r.coeffs)
    }
}

impl From<MonicPoly> for PolyRepr {
    fn from(p: MonicPoly) -> Self {
        PolyRepr { degree: p.degree(), coeffs: p.coeffs }
    }
}

impl MonicPoly {
    /// Builds `t^d + coeffs[0] t^(d-1) + ...`; `d` is inferred from the length.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { coeffs })
    }

    /// Normalizes a full coefficient list `[a_0, a_1, ..., a_d]` (leading first)
    /// by dividing through by `a_0`.
    pub fn from_leading(all: &[f64]) -> Result<Self> {
        let (&lead, rest) = all
            .split_first()
            .ok_or_else(|| Error::InvalidPolynomial("no coefficients".into()))?;
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidPolynomial(format!("leading coefficient {lead} is not usable")));
        }
        Self::new(rest.iter().map(|c| c / lead).collect())
    }

    /// `(t - a)^d`.
    pub fn power_of_linear(a: f64, d: usize) -> Result<Self> {
        let u = Composition::bottom(d)?;
        pi_u(&[a], &u)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `(f_1, ..., f_d)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `[1, f_1, ..., f_d]`.
    pub fn full_coeffs(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.coeffs.iter().copied()).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().fold(1.0, |acc, &c| acc * t + c)
    }

    /// `p(t + c)`, so the roots move by `-c`.
    pub fn shifted(&self, c: f64) -> MonicPoly {
        MonicPoly { coeffs: taylor_shift(&self.coeffs, c) }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficientwise difference.
    pub fn distance(&self, other: &MonicPoly) -> Result<f64> {
        if self.degree() != other.degree() {
            return Err(Error::LengthMismatch { expected: self.degree(), got: other.degree() });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Expands the product over a root multiset.
    pub fn from_roots(r: &RootMultiset) -> MonicPoly {
        MonicPoly { coeffs: expand(&r.roots, r.mults.parts()) }
    }
}

impl fmt::Debug for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonicPoly{:?}", self.coeffs)
    }
}

/// Coefficients of `prod (t - x_j)^(m_j)`, leading 1 dropped.
pub(crate) fn expand(x: &[f64], mults: &[usize]) -> Vec<f64> {
    let d: usize = mults.iter().sum();
    let mut c = Vec::with_capacity(d + 1);
    c.push(1.0);
    for (&a, &m) in x.iter().zip(mults) {
        for _ in 0..m {
            c.push(0.0);
            for i in (1..c.len()).rev() {
                c[i] -= a * c[i - 1];
            }
        }
    }
    c.remove(0);
    c
}

fn taylor_shift(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut a: Vec<f64> = std::iter::once(1.0).chain(coeffs.iter().copied()).collect();
    let n = a.len();
    for i in 0..n {
        for j in 1..n - i {
            a[j] += c * a[j - 1];
        }
    }
    a.remove(0);
    a
}

/// Distinct real roots in increasing order together with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootMultiset {
    roots: Vec<f64>,
    mults: Composition,
}

impl RootMultiset {
    pub fn new(roots: Vec<f64>, mults: Composition) -> Result<Self> {
        if roots.len() != mults.len() {
            return Err(Error::LengthMismatch { expected: mults.len(), got: roots.len() });
        }
        if roots.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite root".into()));
        }
        if roots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPolynomial(format!("roots not strictly increasing: {roots:?}")));
        }
        Ok(Self { roots, mults })
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn mults(&self) -> &Composition {
        &self.mults
    }

    pub fn degree(&self) -> usize {
        self.mults.degree()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SymKind {
    Elementary,
    PowerSum,
}

/// The first `s` elementary symmetric functions or power sums of `nvars` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymFuncVector {
    pub kind: SymKind,
    pub values: Vec<f64>,
    pub nvars: usize,
}

impl SymFuncVector {
    pub fn new(kind: SymKind, values: Vec<f64>, nvars: usize) -> Result<Self> {
        if values.is_empty() || values.len() > nvars {
            return Err(Error::InvalidRange(format!(
                "need 1 <= s <= d, got s = {} with d = {nvars}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRange("non-finite symmetric function value".into()));
        }
        Ok(Self { kind, values, nvars })
    }

    pub fn elementary(values: Vec<f64>, nvars: usize) -> Result<Self> {
        Self::new(SymKind::Elementary, values, nvars)
    }

    pub fn power_sums(values: Vec<f64>, nvars: usize) -> Result<Self> {
        Self::new(SymKind::PowerSum, values, nvars)
    }
}

fn expect_kind(v: &SymFuncVector, kind: SymKind) -> Result<()> {
    if v.kind != kind {
        return Err(Error::InvalidRange(format!("expected {kind:?} values, got {:?}", v.kind)));
    }
    Ok(())
}

/// Newton's identities, `p_k = sum_{i<k} (-1)^(i-1) e_i p_(k-i) + (-1)^(k-1) k e_k`.
pub fn elem_to_power(e: &SymFuncVector) -> Result<SymFuncVector> {
    expect_kind(e, SymKind::Elementary)?;
    let ev = &e.values;
    let mut p: Vec<f64> = Vec::with_capacity(ev.len());
    for k in 1..=ev.len() {
        let mut acc = 0.0;
        for i in 1..k {
            acc += sign(i - 1) * ev[i - 1] * p[k - i - 1];
        }
        acc += sign(k - 1) * k as f64 * ev[k - 1];
        p.push(acc);
    }
    SymFuncVector::power_sums(p, e.nvars)
}

/// Inverse of [`elem_to_power`]: `e_k = (1/k) sum_{i<=k} (-1)^(i-1) e_(k-i) p_i`.
pub fn power_to_elem(p: &SymFuncVector) -> Result<SymFuncVector> {
    expect_kind(p, SymKind::PowerSum)?;
    let pv = &p.values;
    let mut e = vec![1.0];
    for k in 1..=pv.len() {
        let acc: f64 = (1..=k).map(|i| sign(i - 1) * e[k - i] * pv[i - 1]).sum();
        e.push(acc / k as f64);
    }
    e.remove(0);
    SymFuncVector::elementary(e, p.nvars)
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The first `s` power sums of the roots of `f`, from `e_i = (-1)^i f_i`.
pub fn power_sums_of(f: &MonicPoly, s: usize) -> Result<Vec<f64>> {
    let e: Vec<f64> = f.coeffs().iter().take(s).enumerate().map(|(i, c)| sign(i + 1) * c).collect();
    Ok(elem_to_power(&SymFuncVector::elementary(e, f.degree())?)?.values)
}

/// Repeats `x_i` exactly `u_i` times.
pub fn repeat_by(x: &[f64], u: &Composition) -> Result<Vec<f64>> {
    if x.len() != u.len() {
        return Err(Error::LengthMismatch { expected: u.len(), got: x.len() });
    }
    Ok(x.iter()
        .zip(u.parts())
        .flat_map(|(&a, &m)| std::iter::repeat_n(a, m))
        .collect())
}

/// The polynomial with roots `x` taken with multiplicities `u`. Defined for
/// any `x`, ordered or not.
pub fn pi_u(x: &[f64], u: &Composition) -> Result<MonicPoly> {
    if x.len() != u.len() {
        return Err(Error::LengthMismatch { expected: u.len(), got: x.len() });
    }
    if x.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidPolynomial("non-finite root".into()));
    }
    Ok(MonicPoly { coeffs: expand(x, u.parts()) })
}

/// First `keep` coefficients.
pub fn truncate_coeffs(p: &MonicPoly, keep: usize) -> Result<Vec<f64>> {
    if keep > p.degree() {
        return Err(Error::InvalidRange(format!("keep = {keep} exceeds degree {}", p.degree())));
    }
    Ok(p.coeffs[..keep].to_vec())
}

/// Default imaginary-part tolerance, `1e-7 (1 + max |f_i|)`.
pub fn default_hyper_tol(p: &MonicPoly) -> f64 {
    1e-7 * (1.0 + p.max_abs_coeff())
}

/// Relative residual reached by fitting exact multiple roots to rounded coefficients.
const ETA_ROUNDING: f64 = 1e-15;

/// Residual below which a pattern is worth refining by splitting its multiple roots.
const ETA_NEAR: f64 = 1e-4;

/// Rounds of splitting.
const SPLIT_ROUNDS: usize = 2;

/// Smallest root modulus used for weights, as a fraction of `1 + max |x|`:
/// tolerances near zero are absolute in that unit.
const WEIGHT_FLOOR: f64 = 0.5;

/// Default root clustering tolerance.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Roots of a hyperbolic polynomial with multiplicities. See [`roots_of_with`].
pub fn roots_of(p: &MonicPoly, cluster_tol: f64) -> Result<RootMultiset> {
    roots_of_with(p, cluster_tol, None)
}

/// Composition of `p`: the multiplicities of its distinct roots in increasing order.
pub fn composition_of(p: &MonicPoly, cluster_tol: f64) -> Result<Composition> {
    Ok(roots_of(p, cluster_tol)?.mults)
}

/// Root extraction with multiplicities.
///
/// Companion eigenvalues only locate the roots: a root of multiplicity `m`
/// splits into a ring of radius about `eps^(1/m)`. Instead of clustering the
/// eigenvalues directly, candidate multiplicity patterns are read off the
/// eigenvalues and each is fitted by Gauss-Newton on the coefficients. A
/// pattern fits when it reproduces `p` within `(cluster_tol / 10)^2` (relative
/// to the natural coefficient scale of the roots). The coarsest fitting
/// pattern wins unless a finer one fits a hundred times better while the
/// coarse residual is still above rounding level. Fitted roots closer than
/// `cluster_tol (1 + max |root|)` are then merged; gaps within a factor 10 of
/// that threshold are reported as ill-conditioned.
pub fn roots_of_with(p: &MonicPoly, cluster_tol: f64, hyper_tol: Option<f64>) -> Result<RootMultiset> {
    if !(cluster_tol > 0.0 && cluster_tol.is_finite()) {
        return Err(Error::InvalidRange(format!("cluster_tol must be positive, got {cluster_tol}")));
    }
    let d = p.degree();
    let hyper_tol = hyper_tol.unwrap_or_else(|| default_hyper_tol(p));
    if d == 1 {
        return RootMultiset::new(vec![-p.coeffs[0]], Composition::bottom(1)?);
    }

    let mu = -p.coeffs[0] / d as f64;
    let g = taylor_shift(&p.coeffs, mu);
    let sigma = (1..d).fold(0.0f64, |m, i| m.max(g[i].abs().powf(1.0 / (i + 1) as f64)));
    if sigma == 0.0 {
        return RootMultiset::new(vec![mu], Composition::bottom(d)?);
    }

    let eig = companion_eigenvalues(&g, sigma)?;
    let located: Vec<f64> = eig.iter().map(|z| (mu + sigma * z.0).hypot(sigma * z.1)).collect();
    let floor = WEIGHT_FLOOR * (1.0 + located.iter().fold(0.0f64, |m, &a| m.max(a)));
    // Coefficient i of `prod (t + |x_j|)` bounds |f_i| and the rounding error
    // that forming it from roots leaves behind.
    let moduli: Vec<f64> = located.iter().map(|&a| -a.max(floor)).collect();
    let weights = expand(&moduli, &vec![1; d]);
    // Merging two roots a gap `g` apart leaves a residual near `(g / |x|)^2`
    // up to binomial weights, so this accepts merges of gaps below about
    // `cluster_tol` while true multiple roots fit at rounding level.
    let eta_fit = (0.01 * cluster_tol * cluster_tol).max(ETA_ROUNDING);

    let mut fits: Vec<Fit> = structure_candidates(&eig)
        .iter()
        .map(|cand| {
            let start: Vec<f64> = cand.centers.iter().map(|z| mu + sigma * z).collect();
            fit_structure(p.coeffs(), &start, &cand.mults, &weights)
        })
        .collect();
    // Eigenvalue rings of nearby multiple roots overlap, so the right grouping
    // may be missing; split the multiple roots of nearly fitting patterns.
    let mut frontier: Vec<usize> = (0..fits.len()).collect();
    for _ in 0..SPLIT_ROUNDS {
        let mut next = Vec::new();
        for &i in &frontier {
            if fits[i].eta > ETA_NEAR || fits[i].eta <= ETA_ROUNDING {
                continue;
            }
            for (mults, start) in splits(&fits[i], &eig, mu, sigma) {
                if fits.iter().any(|f| f.mults == mults && close_roots(&f.roots, &start)) {
                    continue;
                }
                next.push(fits.len());
                fits.push(fit_structure(p.coeffs(), &start, &mults, &weights));
            }
        }
        frontier = next;
    }
    // Best fit per number of distinct roots, coarsest first.
    fits.sort_by(|a, b| a.mults.len().cmp(&b.mults.len()).then(a.eta.total_cmp(&b.eta)));
    fits.dedup_by_key(|f| f.mults.len());

    // Start from the coarsest fitting pattern and move to a finer one only
    // while the residual is above rounding level and drops a hundredfold.
    let mut accepted: Option<Fit> = None;
    for fit in fits {
        if fit.eta > eta_fit {
            continue;
        }
        match &accepted {
            None => accepted = Some(fit),
            Some(best) if best.eta > ETA_ROUNDING && fit.eta <= 0.01 * best.eta => accepted = Some(fit),
            Some(_) => {}
        }
    }

    let Some(mut fit) = accepted else {
        let imag = eig.iter().fold(0.0f64, |m, z| m.max(z.1.abs())) * sigma;
        if imag > hyper_tol {
            return Err(Error::NotHyperbolic { imag, tol: hyper_tol });
        }
        return Err(Error::IllConditioned(format!(
            "no multiplicity pattern reproduces the coefficients (largest imaginary part {imag:e})"
        )));
    };

    // Merge fitted roots that sit closer than the clustering threshold.
    loop {
        let max_root = fit.roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let tau = cluster_tol * (1.0 + max_root);
        let gaps: Vec<f64> = fit.roots.windows(2).map(|w| w[1] - w[0]).collect();
        let Some((k, &gap)) = gaps.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) else {
            break;
        };
        if gap >= 10.0 * tau {
            break;
        }
        if gap >= tau {
            return Err(Error::IllConditioned(format!(
                "roots {} and {} are {gap:e} apart, within a factor 10 of the clustering threshold {tau:e}",
                fit.roots[k],
                fit.roots[k + 1]
            )));
        }
        let mut mults = fit.mults.clone();
        let mut start = fit.roots.clone();
        let m2 = mults.remove(k + 1);
        let r2 = start.remove(k + 1);
        start[k] = (start[k] * mults[k] as f64 + r2 * m2 as f64) / (mults[k] + m2) as f64;
        mults[k] += m2;
        fit = fit_structure(p.coeffs(), &start, &mults, &weights);
    }

    if fit.mults.len() < d && fit.eta > eta_fit {
        return Err(Error::IllConditioned(format!(
            "multiple-root pattern {:?} fits only to relative residual {:e}",
            fit.mults, fit.eta
        )));
    }
    RootMultiset::new(fit.roots, Composition::new(fit.mults)?)
}


/// Eigenvalues of the companion matrix of `g(sigma z) / sigma^d`, as `(re, im)`.
fn companion_eigenvalues(g: &[f64], sigma: f64) -> Result<Vec<(f64, f64)>> {
    let d = g.len();
    let scaled: Vec<f64> = g.iter().enumerate().map(|(i, v)| v / sigma.powi(i as i32 + 1)).collect();
    // QR iteration can stall on root sets symmetric about the origin, such as
    // those of (t^2 - 1)^2; moving the origin breaks the symmetry.
    for shift in [0.0, 0.1373, -0.2914] {
        let c = if shift == 0.0 { scaled.clone() } else { taylor_shift(&scaled, shift) };
        let mut m = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            m[(0, i)] = -c[i];
            if i + 1 < d {
                m[(i + 1, i)] = 1.0;
            }
        }
        if let Some(schur) = Schur::try_new(m, f64::EPSILON, 10_000) {
            let mut eig: Vec<(f64, f64)> =
                schur.complex_eigenvalues().iter().map(|z| (z.re + shift, z.im)).collect();
            eig.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            return Ok(eig);
        }
    }
    Err(Error::IllConditioned("companion eigenvalue iteration did not converge".into()))
}

struct Candidate {
    mults: Vec<usize>,
    centers: Vec<f64>,
}

/// Multiplicity patterns suggested by eigenvalues sorted by real part:
/// single linkage on real-part gaps, and greedy merging of neighbouring groups
/// by complex centroid distance.
fn structure_candidates(eig: &[(f64, f64)]) -> Vec<Candidate> {
    let d = eig.len();
    let mut out: Vec<Candidate> = Vec::new();
    let mut push = |groups: &[Vec<usize>]| {
        let mults: Vec<usize> = groups.iter().map(Vec::len).collect();
        if out.iter().any(|c| c.mults == mults) {
            return;
        }
        let centers = groups
            .iter()
            .map(|g| g.iter().map(|&i| eig[i].0).sum::<f64>() / g.len() as f64)
            .collect();
        out.push(Candidate { mults, centers });
    };

    let mut order: Vec<usize> = (0..d.saturating_sub(1)).collect();
    order.sort_by(|&a, &b| (eig[a + 1].0 - eig[a].0).total_cmp(&(eig[b + 1].0 - eig[b].0)));
    for k in 0..d {
        let cut: Vec<bool> = {
            let mut merged = vec![false; d.saturating_sub(1)];
            for &i in &order[..k] {
                merged[i] = true;
            }
            merged
        };
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..d {
            if cut[i - 1] {
                groups.last_mut().expect("nonempty").push(i);
            } else {
                groups.push(vec![i]);
            }
        }
        push(&groups);
    }

    let mut groups: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
    push(&groups);
    while groups.len() > 1 {
        let centroid = |g: &Vec<usize>| {
            let n = g.len() as f64;
            (
                g.iter().map(|&i| eig[i].0).sum::<f64>() / n,
                g.iter().map(|&i| eig[i].1).sum::<f64>() / n,
            )
        };
        let k = (0..groups.len() - 1)
            .min_by(|&a, &b| {
                let (ca, cb) = (centroid(&groups[a]), centroid(&groups[a + 1]));
                let (da, db) = (centroid(&groups[b]), centroid(&groups[b + 1]));
                (ca.0 - cb.0).hypot(ca.1 - cb.1).total_cmp(&(da.0 - db.0).hypot(da.1 - db.1))
            })
            .expect("at least two groups");
        let next = groups.remove(k + 1);
        groups[k].extend(next);
        push(&groups);
    }
    out
}

/// Patterns refining `fit` by splitting one multiple root `m` into `(j, m - j)`,
/// started at offsets set by the spread of the eigenvalues nearest to it.
fn splits(fit: &Fit, eig: &[(f64, f64)], mu: f64, sigma: f64) -> Vec<(Vec<usize>, Vec<f64>)> {
    let l = fit.roots.len();
    let mut spread = vec![0.0f64; l];
    for z in eig {
        let (x, y) = (mu + sigma * z.0, sigma * z.1);
        let dist = |r: f64| (x - r).hypot(y);
        let k = (0..l).min_by(|&a, &b| dist(fit.roots[a]).total_cmp(&dist(fit.roots[b]))).expect("roots");
        spread[k] = spread[k].max(dist(fit.roots[k]));
    }
    let mut out = Vec::new();
    for k in 0..l {
        let m = fit.mults[k];
        let c = fit.roots[k];
        let room = fit.roots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let base = if spread[k] > 0.0 { spread[k] } else { room.min(1.0) * 0.1 };
        for j in 1..m {
            for delta in [2.0 * base, 0.5 * base] {
                let (a, b) = (c - delta * (m - j) as f64 / m as f64, c + delta * j as f64 / m as f64);
                let mut mults = fit.mults.clone();
                let mut roots = fit.roots.clone();
                mults.splice(k..=k, [j, m - j]);
                roots.splice(k..=k, [a, b]);
                out.push((mults, roots));
            }
        }
    }
    out
}

fn close_roots(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

struct Fit {
    roots: Vec<f64>,
    mults: Vec<usize>,
    eta: f64,
}

fn weighted_residual(target: &[f64], x: &[f64], mults: &[usize], weights: &[f64]) -> Vec<f64> {
    expand(x, mults)
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((a, b), w)| (a - b) / w)
        .collect()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gauss-Newton fit of `prod (t - x_j)^(m_j)` to the target coefficients.
fn fit_structure(target: &[f64], start: &[f64], mults: &[usize], weights: &[f64]) -> Fit {
    let d = target.len();
    let l = start.len();
    let mut x = start.to_vec();
    let mut r = weighted_residual(target, &x, mults, weights);
    let mut norm = sup_norm(&r);
    for _ in 0..100 {
        if norm == 0.0 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(d, l);
        for j in 0..l {
            let mut m = mults.to_vec();
            m[j] -= 1;
            let col = expand(&x, &m);
            // d/dx_j of prod (t - x)^m is -m_j prod / (t - x_j), degree d - 1.
            jac[(0, j)] = -(mults[j] as f64) / weights[0];
            for i in 1..d {
                jac[(i, j)] = -(mults[j] as f64) * col[i - 1] / weights[i];
            }
        }
        let rhs = DVector::from_iterator(d, r.iter().map(|v| -v));
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&rhs, 1e-14) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
            let rt = weighted_residual(target, &trial, mults, weights);
            let nt = sup_norm(&rt);
            if nt < norm {
                let moved = step.iter().fold(0.0f64, |m, s| m.max((lambda * s).abs()));
                let size = x.iter().fold(1.0f64, |m, a| m.max(a.abs()));
                x = trial;
                r = rt;
                let gain = norm - nt;
                norm = nt;
                improved = moved > 1e-16 * size && gain > 1e-3 * nt;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let mut pairs: Vec<(f64, usize)> = x.into_iter().zip(mults.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Fit {
        roots: pairs.iter().map(|p| p.0).collect(),
        mults: pairs.iter().map(|p| p.1).collect(),
        eta: norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(parts: &[usize]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Elementary symmetric functions by subset enumeration.
    fn elementary_brute(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut e = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let prod: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).product();
            e[mask.count_ones() as usize] += prod;
        }
        e.remove(0);
        e
    }

    #[test]
    fn from_roots_examples() {
        let r = RootMultiset::new(vec![-2.0, 1.0], c(&[1, 2])).unwrap();
        assert_eq!(MonicPoly::from_roots(&r).coeffs(), &[0.0, -3.0, 2.0]);
        let r = RootMultiset::new(vec![0.0], c(&[4])).unwrap();
        assert_eq!(MonicPoly::from_roots(&r).coeffs(), &[0.0; 4]);
        let r = RootMultiset::new(vec![-1.0, 2.0], c(&[2, 1])).unwrap();
        assert_eq!(MonicPoly::from_roots(&r).coeffs(), &[0.0, -3.0, -2.0]);
        assert!(RootMultiset::new(vec![1.0, 1.0], c(&[1, 1])).is_err());
        assert!(RootMultiset::new(vec![1.0], c(&[1, 1])).is_err());
    }

    #[test]
    fn repeat_by_examples() {
        assert_eq!(repeat_by(&[-2.0, 1.0], &c(&[1, 2])).unwrap(), vec![-2.0, 1.0, 1.0]);
        assert_eq!(repeat_by(&[4.0], &c(&[3])).unwrap(), vec![4.0; 3]);
        assert_eq!(
            repeat_by(&[3.0, 5.0, 7.0], &c(&[2, 1, 3])).unwrap(),
            vec![3.0, 3.0, 5.0, 7.0, 7.0, 7.0]
        );
        assert_eq!(
            repeat_by(&[1.0], &c(&[1, 1])),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn pi_u_examples() {
        assert_eq!(pi_u(&[-1.0, 2.0], &c(&[2, 1])).unwrap().coeffs(), &[0.0, -3.0, -2.0]);
        let p = pi_u(&[2.0], &c(&[4])).unwrap();
        assert_eq!(p.coeffs(), &[-8.0, 24.0, -32.0, 16.0]);
        assert_eq!(
            pi_u(&[-2.0, 1.0, 1.0], &c(&[1, 1, 1])).unwrap(),
            pi_u(&[-2.0, 1.0], &c(&[1, 2])).unwrap()
        );
    }

    #[test]
    fn vieta_sign_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let d = rng.random_range(1..=8);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = pi_u(&x, &Composition::top(d).unwrap()).unwrap();
            let e = elementary_brute(&x);
            for i in 0..d {
                let expect = if (i + 1) % 2 == 0 { e[i] } else { -e[i] };
                assert!((p.coeffs()[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn newton_identity_examples() {
        let p = elem_to_power(&SymFuncVector::elementary(vec![3.5], 4).unwrap()).unwrap();
        assert_eq!(p.values, vec![3.5]);
        assert_eq!(p.kind, SymKind::PowerSum);
        let (e1, e2, e3) = (1.5, -0.75, 2.25);
        let p = elem_to_power(&SymFuncVector::elementary(vec![e1, e2, e3], 5).unwrap()).unwrap();
        assert!((p.values[1] - (e1 * e1 - 2.0 * e2)).abs() < 1e-14);
        assert!((p.values[2] - (e1 * e1 * e1 - 3.0 * e1 * e2 + 3.0 * e3)).abs() < 1e-13);
        let e = power_to_elem(&SymFuncVector::power_sums(vec![0.0, 6.0], 3).unwrap()).unwrap();
        assert_eq!(e.values, vec![0.0, -3.0]);
        assert!(SymFuncVector::elementary(vec![1.0; 3], 2).is_err());
        assert!(power_to_elem(&SymFuncVector::elementary(vec![1.0], 2).unwrap()).is_err());
    }

    #[test]
    fn power_sums_match_roots() {
        let x = [-1.5, 0.25, 0.25, 2.0, 3.0];
        let p = pi_u(&x, &Composition::top(5).unwrap()).unwrap();
        let ps = power_sums_of(&p, 5).unwrap();
        for (k, v) in ps.iter().enumerate() {
            let direct: f64 = x.iter().map(|a| a.powi(k as i32 + 1)).sum();
            assert!((v - direct).abs() < 1e-11 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn truncate_examples() {
        let p = MonicPoly::new(vec![0.0, -3.0, 2.0]).unwrap();
        assert_eq!(truncate_coeffs(&p, 2).unwrap(), vec![0.0, -3.0]);
        assert_eq!(truncate_coeffs(&p, 3).unwrap(), p.coeffs().to_vec());
        assert!(truncate_coeffs(&p, 4).is_err());
    }

    #[test]
    fn roots_of_examples() {
        let p = MonicPoly::new(vec![0.0, -3.0, 2.0]).unwrap();
        let r = roots_of(&p, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(r.mults(), &c(&[1, 2]));
        assert!(close(r.roots(), &[-2.0, 1.0], 1e-12));

        let r = roots_of(&MonicPoly::new(vec![0.0; 6]).unwrap(), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(r.mults(), &c(&[6]));
        assert_eq!(r.roots(), &[0.0]);

        let err = roots_of(&MonicPoly::new(vec![0.0, 1.0]).unwrap(), DEFAULT_CLUSTER_TOL).unwrap_err();
        assert!(matches!(err, Error::NotHyperbolic { .. }), "{err:?}");
    }

    #[test]
    fn composition_of_examples() {
        let p = MonicPoly::power_of_linear(1.0, 5).unwrap();
        assert_eq!(composition_of(&p, DEFAULT_CLUSTER_TOL).unwrap(), c(&[5]));
        let p = pi_u(&[-2.0, -0.5, 0.3, 1.1, 2.4], &Composition::top(5).unwrap()).unwrap();
        assert_eq!(composition_of(&p, DEFAULT_CLUSTER_TOL).unwrap(), Composition::top(5).unwrap());
        let p = pi_u(&[-1.0, 0.5, 3.0], &c(&[3, 1, 4])).unwrap();
        let r = roots_of(&p, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(r.mults(), &c(&[3, 1, 4]));
        assert!(close(r.roots(), &[-1.0, 0.5, 3.0], 1e-9));
    }

    #[test]
    fn tolerance_hyperbolic_input_is_accepted() {
        // Roots +-1e-8 i sit within the default imaginary tolerance.
        let p = MonicPoly::new(vec![0.0, 1e-16]).unwrap();
        assert_eq!(composition_of(&p, DEFAULT_CLUSTER_TOL).unwrap(), c(&[2]));
    }

    #[test]
    fn near_threshold_gap_is_ill_conditioned() {
        let tau = DEFAULT_CLUSTER_TOL * 2.0;
        let p = pi_u(&[0.0, 1.0, 1.0 + 3.0 * tau], &c(&[1, 1, 1])).unwrap();
        assert!(matches!(roots_of(&p, DEFAULT_CLUSTER_TOL), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn close_simple_roots_are_resolved() {
        let tol = DEFAULT_CLUSTER_TOL;
        let x = [-1.0, 0.5, 0.5 + 12.0 * tol * 2.0, 1.0];
        let p = pi_u(&x, &Composition::top(4).unwrap()).unwrap();
        let r = roots_of(&p, tol).unwrap();
        assert_eq!(r.mults(), &Composition::top(4).unwrap());
        assert!(close(r.roots(), &x, 1e-8));
    }

    #[test]
    fn shift_and_json() {
        let p = MonicPoly::new(vec![0.0, -3.0, 2.0]).unwrap();
        let q = p.shifted(1.0);
        for t in [-1.0, 0.0, 0.7, 2.0] {
            assert!((q.eval(t) - p.eval(t + 1.0)).abs() < 1e-12);
        }
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"degree":3,"coeffs":[0.0,-3.0,2.0]}"#);
        assert_eq!(serde_json::from_str::<MonicPoly>(&json).unwrap(), p);
        assert!(serde_json::from_str::<MonicPoly>(r#"{"degree":2,"coeffs":[1.0]}"#).is_err());
        assert_eq!(MonicPoly::from_leading(&[2.0, 0.0, -6.0]).unwrap().coeffs(), &[0.0, -3.0]);
        assert!(MonicPoly::from_leading(&[0.0, 1.0]).is_err());
    }

    /// Random strictly increasing roots with pairwise gaps at least `sep`.
    fn separated_roots(l: usize, sep: f64) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, l).prop_map(move |w| {
            let mut x = Vec::with_capacity(l);
            let mut acc = -1.0;
            for v in w {
                acc += sep + 0.3 * v;
                x.push(acc);
            }
            x
        })
    }

    fn multiset() -> impl Strategy<Value = (Vec<f64>, Composition)> {
        (1usize..=10).prop_flat_map(|d| {
            proptest::collection::vec(any::<bool>(), d - 1).prop_flat_map(move |bits| {
                let mut sums: Vec<usize> =
                    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect();
                sums.push(d);
                let u = Composition::from_partial_sums(&crate::compositions::PartialSumSet::new(sums).unwrap());
                separated_roots(u.len(), 0.05).prop_map(move |x| (x, u.clone()))
            })
        })
    }

    proptest! {
        #[test]
        fn newton_round_trip(d in 1usize..=10, raw in proptest::collection::vec(-3.0f64..3.0, 10)) {
            let s = 1 + raw.len() % d;
            let e = SymFuncVector::elementary(raw[..s].to_vec(), d).unwrap();
            let back = power_to_elem(&elem_to_power(&e).unwrap()).unwrap();
            for (a, b) in e.values.iter().zip(&back.values) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
            }
        }

        #[test]
        fn pi_collision_consistency((x, u) in multiset()) {
            let a = pi_u(&x, &u).unwrap();
            let b = pi_u(&repeat_by(&x, &u).unwrap(), &Composition::top(u.degree()).unwrap()).unwrap();
            prop_assert!(a.distance(&b).unwrap() <= 1e-12 * (1.0 + a.max_abs_coeff()));
        }

        #[test]
        fn root_round_trip((x, u) in multiset()) {
            let r = RootMultiset::new(x.clone(), u.clone()).unwrap();
            let back = roots_of(&MonicPoly::from_roots(&r), DEFAULT_CLUSTER_TOL).unwrap();
            prop_assert_eq!(back.mults(), &u);
            prop_assert!(close(back.roots(), &x, 1e-8), "{:?} vs {:?}", back.roots(), x);
        }
    }
}
