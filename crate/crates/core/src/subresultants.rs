//! Discriminant and subdiscriminants of a monic polynomial.
//!
//! With roots `x_1, ..., x_d`,
//! `Delta_{d,k} = sum over (d-k)-subsets I of prod_{i<j in I} (x_i - x_j)^2`,
//! so `Delta_{d,0}` is the classical discriminant and `Delta_{d,d-1} = d`.
//! In terms of principal subresultant coefficients of `(P, P')`,
//! `Delta_{d,k} = (-1)^((d-k)(d-k-1)/2) sRes_k(P, P')`.
//!
//! Two evaluation routes are provided: exact rational arithmetic through a
//! remainder sequence, and floating-point determinants of Sylvester-type
//! minors. Every `f64` is a dyadic rational, so the exact route applies to any
//! [`MonicPoly`] and is exact for the coefficients as stored.

use nalgebra::DMatrix;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomials::MonicPoly;

/// `(Delta_{d,0}, ..., Delta_{d,d-1})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubdiscriminantSequence {
    pub d: usize,
    pub values: Vec<f64>,
    /// Exact values, present when computed in exact mode.
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

impl SubdiscriminantSequence {
    pub fn discriminant(&self) -> f64 {
        self.values[0]
    }

    /// Exact values rendered as `p/q` strings.
    pub fn exact_strings(&self) -> Option<Vec<String>> {
        self.exact.as_ref().map(|v| v.iter().map(|q| q.to_string()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    Hyperbolic,
    NotHyperbolic,
    Indeterminate,
}

/// Relative zero threshold used when every root coincides with the mean.
pub const ZERO_THRESHOLD: f64 = 1e-9;

fn alternating(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn derivative(full: &[f64]) -> Vec<f64> {
    let n = full.len() - 1;
    full[..n].iter().enumerate().map(|(i, c)| c * (n - i) as f64).collect()
}

/// Principal subresultant coefficient `sRes_k(A, B)` from the Sylvester minor;
/// `a`, `b` are leading-first coefficient lists with `deg a > deg b`.
fn sres_float(a: &[f64], b: &[f64], k: usize) -> f64 {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n - 2 * k;
    if size == 0 {
        return 1.0;
    }
    let mut s = DMatrix::<f64>::zeros(size, size);
    // Row r holds t^(shift) * poly, with column c standing for t^(m+n-k-1-c).
    for r in 0..n - k {
        for (i, &v) in a.iter().enumerate() {
            let col = r + i;
            if col < size {
                s[(r, col)] = v;
            }
        }
    }
    for r in 0..m - k {
        for (i, &v) in b.iter().enumerate() {
            let col = r + i;
            if col < size {
                s[(n - k + r, col)] = v;
            }
        }
    }
    // The last column must be the t^k column, which is column m+n-2k-1 already
    // since the first size columns run from t^(m+n-k-1) down to t^k.
    s.determinant()
}

/// Floating-point subdiscriminants from Sylvester minors.
pub fn subdiscriminants(p: &MonicPoly) -> SubdiscriminantSequence {
    let full = p.full_coeffs();
    let d = p.degree();
    let dp = derivative(&full);
    let values = (0..d)
        .map(|k| alternating((d - k) * (d - k - 1) / 2) * sres_float(&full, &dp, k))
        .collect();
    SubdiscriminantSequence { d, values, exact: None }
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("coefficients are finite")
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    let lead_zeros = v.iter().take_while(|c| c.is_zero()).count();
    v.drain(..lead_zeros);
    v
}

/// Field remainder of `a` by `b`, both leading-first with nonzero leading terms.
fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let n = b.len();
    while r.len() >= n && !r.is_empty() {
        let q = &r[0] / &b[0];
        for i in 0..n {
            let t = &q * &b[i];
            r[i] -= t;
        }
        r.remove(0);
        r = trim(r);
    }
    r
}

/// `sRes_j(A, B)` for `j = 0..=deg B`, by the remainder-sequence recursion
/// `sRes_j(A, B) = (-1)^((n0-j)(n1-j)) b^(n0-n2) sRes_j(B, rem(A, B))`.
fn sres_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n0 = a.len() - 1;
    let n1 = b.len() - 1;
    let lead = &b[0];
    let mut out = vec![BigRational::zero(); n1 + 1];
    out[n1] = num::pow(lead.clone(), n0 - n1);
    if n1 == 0 {
        return out;
    }
    let r = rem(a, b);
    if r.is_empty() {
        return out;
    }
    let n2 = r.len() - 1;
    let sub = sres_exact(b, &r);
    let factor = num::pow(lead.clone(), n0 - n2);
    for j in 0..=n2 {
        let sign = if ((n0 - j) * (n1 - j)) % 2 == 0 { 1 } else { -1 };
        out[j] = &factor * &sub[j] * BigRational::from_integer(sign.into());
    }
    out
}

/// Exact subdiscriminants of `t^d + c_1 t^(d-1) + ... + c_d`.
pub fn subdiscriminants_rational(coeffs: &[BigRational]) -> Vec<BigRational> {
    let d = coeffs.len();
    let full: Vec<BigRational> = std::iter::once(BigRational::one()).chain(coeffs.iter().cloned()).collect();
    let dp: Vec<BigRational> = full[..d]
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigRational::from_integer(((d - i) as i64).into()))
        .collect();
    let s = sres_exact(&full, &dp);
    (0..d)
        .map(|k| {
            let sign = alternating((d - k) * (d - k - 1) / 2);
            if sign > 0.0 {
                s[k].clone()
            } else {
                -s[k].clone()
            }
        })
        .collect()
}

/// Exact subdiscriminants of the stored (dyadic) coefficients.
pub fn subdiscriminants_exact(p: &MonicPoly) -> SubdiscriminantSequence {
    let c: Vec<BigRational> = p.coeffs().iter().map(|&x| to_rational(x)).collect();
    let exact = subdiscriminants_rational(&c);
    let values = exact.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
    SubdiscriminantSequence { d: p.degree(), values, exact: Some(exact) }
}

/// Root-size estimate `max |c_i|^(1/i)`; within a factor 2 of the largest root modulus.
fn root_scale(c: &[f64]) -> f64 {
    c.iter()
        .enumerate()
        .fold(0.0f64, |m, (i, v)| m.max(v.abs().powf(1.0 / (i + 1) as f64)))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Centered polynomial `p(t + mu)` with `mu` the mean root, or `None` when it
/// is indistinguishable from `t^d` at the rounding level of the shift.
fn centered(p: &MonicPoly) -> Option<(MonicPoly, f64)> {
    let d = p.degree();
    let mu = -p.coeffs()[0] / d as f64;
    let q = p.shifted(mu);
    let noise = |i: usize| 1e3 * f64::EPSILON * binomial(d, i) * (1.0 + mu.abs()).powi(i as i32);
    let all_noise = q.coeffs().iter().enumerate().all(|(i, g)| g.abs() <= noise(i + 1));
    (!all_noise).then_some((q, mu))
}

/// Sign patterns for the rounding-noise probe.
const PROBES: usize = 4;

/// Coefficients after translating to mean root zero and scaling the roots to
/// unit size, with the rounding error each one carries. Subdiscriminants of
/// the result differ from those of `p` only by positive factors.
fn normalized(p: &MonicPoly) -> Option<(Vec<f64>, Vec<f64>)> {
    let (q, mu) = centered(p)?;
    let d = p.degree();
    let rho = root_scale(q.coeffs());
    let c: Vec<f64> = q.coeffs().iter().enumerate().map(|(i, v)| v / rho.powi(i as i32 + 1)).collect();
    // The shift carries errors of size eps * binomial(d, i) * (R + |mu|)^i;
    // elimination adds errors relative to the largest entry.
    let kappa = (root_scale(p.coeffs()) + mu.abs()) / rho;
    let big = c.iter().fold(1.0f64, |m, v| m.max(v.abs())) * d as f64;
    let noise = (0..d)
        .map(|i| 4.0 * f64::EPSILON * (binomial(d, i + 1) * kappa.powi(i as i32 + 1) + big))
        .collect();
    Some((c, noise))
}

/// Normalized floating subdiscriminants and a zero threshold for each: the
/// largest change seen when the coefficients move by their rounding error.
/// A polynomial within rounding of `(t - a)^d` yields the exact pattern of a
/// single root.
pub fn normalized_subdiscriminants(p: &MonicPoly) -> (Vec<f64>, Vec<f64>) {
    let d = p.degree();
    let Some((c, noise)) = normalized(p) else {
        let mut v = vec![0.0; d];
        v[d - 1] = d as f64;
        return (v, vec![ZERO_THRESHOLD * (1.0 + d as f64); d]);
    };
    let eval = |c: Vec<f64>| subdiscriminants(&MonicPoly::new(c).expect("finite")).values;
    let v = eval(c.clone());
    let mut spread = vec![0.0f64; d];
    for probe in 0..PROBES {
        let moved = c
            .iter()
            .zip(&noise)
            .enumerate()
            .map(|(i, (x, n))| if (i * (2 * probe + 1) + probe) % 3 == 0 { x - n } else { x + n })
            .collect();
        for (s, (a, b)) in spread.iter_mut().zip(eval(moved).iter().zip(&v)) {
            *s = s.max((a - b).abs());
        }
    }
    let thr = spread.iter().map(|s| 10.0 * s.max(f64::MIN_POSITIVE)).collect();
    (v, thr)
}

/// `Delta_{d,k} / (binomial(d,k) (2R)^((d-k)(d-k-1)))` with `R` a bound on the
/// root moduli: each value measured against its natural size for roots of
/// that magnitude, without translating.
pub fn scaled_subdiscriminants(p: &MonicPoly) -> Vec<f64> {
    let d = p.degree();
    let r = 2.0 * root_scale(p.coeffs());
    let raw = subdiscriminants(p).values;
    if r == 0.0 {
        return raw.iter().enumerate().map(|(k, v)| v / binomial(d, k)).collect();
    }
    raw.iter()
        .enumerate()
        .map(|(k, v)| v / (binomial(d, k) * (2.0 * r).powi(((d - k) * (d - k - 1)) as i32)))
        .collect()
}

/// Number of distinct complex roots, from the leading run of vanishing
/// subdiscriminants (floating mode).
pub fn count_distinct_roots(p: &MonicPoly) -> Result<usize> {
    let d = p.degree();
    let (v, thr) = normalized_subdiscriminants(p);
    for (k, (x, t)) in v.iter().zip(&thr).enumerate() {
        let a = x.abs();
        if a <= *t {
            continue;
        }
        if a <= 10.0 * t {
            return Err(Error::IllConditioned(format!(
                "subdiscriminant {k} = {x:e} is within a factor 10 of its zero threshold {t:e}"
            )));
        }
        return Ok(d - k);
    }
    Ok(1)
}

/// Number of distinct complex roots of the stored coefficients, exactly.
pub fn count_distinct_roots_exact(p: &MonicPoly) -> usize {
    let exact = subdiscriminants_exact(p).exact.expect("exact mode");
    let k = exact.iter().take_while(|q| q.is_zero()).count();
    p.degree() - k.min(p.degree() - 1)
}

/// Floating-mode real-rootedness test. Every root real iff every
/// subdiscriminant is nonnegative and none vanishes after the first nonzero
/// one; anything inside the tolerance band, or an interior zero, is
/// indeterminate.
pub fn hyperbolicity_certificate(p: &MonicPoly) -> Certificate {
    let (v, thr) = normalized_subdiscriminants(p);
    let pairs = || v.iter().zip(&thr);
    if pairs().any(|(&x, &t)| x < -10.0 * t) {
        return Certificate::NotHyperbolic;
    }
    if pairs().any(|(&x, &t)| x < -t || (x.abs() > t && x.abs() <= 10.0 * t)) {
        return Certificate::Indeterminate;
    }
    let first = pairs().position(|(x, t)| x.abs() > *t).unwrap_or(v.len() - 1);
    if pairs().skip(first).any(|(x, t)| x.abs() <= *t) {
        return Certificate::Indeterminate;
    }
    Certificate::Hyperbolic
}

/// Exact real-rootedness decision for the stored coefficients. Falls back to
/// a Sturm count on the squarefree part when a subdiscriminant vanishes after
/// the leading run.
pub fn hyperbolicity_certificate_exact(p: &MonicPoly) -> Certificate {
    let exact = subdiscriminants_exact(p).exact.expect("exact mode");
    if exact.iter().any(|q| q.is_negative()) {
        return Certificate::NotHyperbolic;
    }
    let first = exact.iter().position(|q| !q.is_zero()).unwrap_or(exact.len() - 1);
    if exact[first..].iter().all(|q| !q.is_zero()) {
        return Certificate::Hyperbolic;
    }
    let full: Vec<BigRational> = p.full_coeffs().into_iter().map(to_rational).collect();
    if sturm_all_real(&full) {
        Certificate::Hyperbolic
    } else {
        Certificate::NotHyperbolic
    }
}

fn derivative_exact(a: &[BigRational]) -> Vec<BigRational> {
    let n = a.len() - 1;
    a[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigRational::from_integer(((n - i) as i64).into()))
        .collect()
}

fn gcd_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let (mut x, mut y) = (a.to_vec(), trim(b.to_vec()));
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn quotient_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let n = b.len();
    let mut q = Vec::new();
    while r.len() >= n {
        let c = &r[0] / &b[0];
        for i in 0..n {
            let t = &c * &b[i];
            r[i] -= t;
        }
        r.remove(0);
        q.push(c);
    }
    q
}

/// Whether all roots of `a` are real, by Sturm's theorem on its squarefree part.
fn sturm_all_real(a: &[BigRational]) -> bool {
    let g = gcd_exact(a, &derivative_exact(a));
    let sq = quotient_exact(a, &g);
    let deg = sq.len() - 1;
    if deg == 0 {
        return true;
    }
    let mut seq = vec![sq.clone(), derivative_exact(&sq)];
    loop {
        let n = seq.len();
        let r = rem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let sign_at = |poly: &Vec<BigRational>, plus: bool| -> i32 {
        let deg = poly.len() - 1;
        let s = if poly[0].is_positive() { 1 } else { -1 };
        if !plus && deg % 2 == 1 {
            -s
        } else {
            s
        }
    };
    let variations = |plus: bool| -> usize {
        let signs: Vec<i32> = seq.iter().map(|q| sign_at(q, plus)).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    variations(false) - variations(true) == deg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compositions::Composition;
    use crate::polynomials::pi_u;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(c: &[f64]) -> MonicPoly {
        MonicPoly::new(c.to_vec()).unwrap()
    }

    /// Subdiscriminants straight from the root formula.
    fn from_roots_formula(x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut out = vec![0.0; d];
        for mask in 1u32..(1 << d) {
            let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
            let mut prod = 1.0;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    prod *= (x[idx[a]] - x[idx[b]]).powi(2);
                }
            }
            out[d - idx.len()] += prod;
        }
        out
    }

    #[test]
    fn quadratic_discriminant() {
        for (b, c) in [(0.0, -1.0), (3.0, 1.0), (-1.5, 4.0)] {
            let s = subdiscriminants(&poly(&[b, c]));
            assert!((s.values[0] - (b * b - 4.0 * c)).abs() < 1e-12);
            assert!((s.values[1] - 2.0).abs() < 1e-12);
            let e = subdiscriminants_exact(&poly(&[b, c]));
            assert_eq!(e.values[0], b * b - 4.0 * c);
        }
    }

    #[test]
    fn cubic_examples() {
        let e = subdiscriminants_exact(&poly(&[0.0, -3.0, 2.0])).exact.unwrap();
        assert!(e[0].is_zero());
        let e = subdiscriminants_exact(&poly(&[-3.0, 3.0, -1.0])).exact.unwrap();
        assert!(e[0].is_zero() && e[1].is_zero());
        assert_eq!(e[2], BigRational::from_integer(3.into()));
        // t^3 + p t + q has discriminant -4p^3 - 27q^2.
        let (p, q) = (-2.0, 0.5);
        let e = subdiscriminants_exact(&poly(&[0.0, p, q]));
        assert_eq!(e.values[0], -4.0 * p * p * p - 27.0 * q * q);
    }

    #[test]
    fn matches_root_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.random_range(1..=7);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = pi_u(&x, &Composition::top(d).unwrap()).unwrap();
            let oracle = from_roots_formula(&x);
            let fl = subdiscriminants(&p).values;
            let ex = subdiscriminants_exact(&p).values;
            for k in 0..d {
                let scale = 1e-8 * (1.0 + oracle[k].abs());
                assert!((fl[k] - oracle[k]).abs() <= scale, "float k={k} {fl:?} {oracle:?}");
                assert!((ex[k] - oracle[k]).abs() <= scale, "exact k={k} {ex:?} {oracle:?}");
            }
        }
    }

    #[test]
    fn counting_examples() {
        assert_eq!(count_distinct_roots(&poly(&[0.0, -3.0, 2.0])).unwrap(), 2);
        assert_eq!(count_distinct_roots_exact(&poly(&[0.0, -3.0, 2.0])), 2);
        assert_eq!(count_distinct_roots(&poly(&[0.0; 5])).unwrap(), 1);
        assert_eq!(count_distinct_roots_exact(&poly(&[0.0; 5])), 1);
        let p = pi_u(&[-2.0, -0.7, 0.1, 0.9, 1.8], &Composition::top(5).unwrap()).unwrap();
        assert_eq!(count_distinct_roots(&p).unwrap(), 5);
        let p = pi_u(&[-1.0, 0.5, 2.0], &Composition::new(vec![2, 3, 1]).unwrap()).unwrap();
        assert_eq!(count_distinct_roots(&p).unwrap(), 3);
    }

    #[test]
    fn certificate_examples() {
        assert_eq!(hyperbolicity_certificate(&poly(&[0.0, -3.0, 2.0])), Certificate::Hyperbolic);
        assert_eq!(hyperbolicity_certificate_exact(&poly(&[0.0, -3.0, 2.0])), Certificate::Hyperbolic);
        assert_eq!(hyperbolicity_certificate(&poly(&[0.0, 1.0])), Certificate::NotHyperbolic);
        assert_eq!(hyperbolicity_certificate_exact(&poly(&[0.0, 1.0])), Certificate::NotHyperbolic);
        let p = MonicPoly::power_of_linear(1.0, 4).unwrap();
        assert_eq!(hyperbolicity_certificate(&p), Certificate::Hyperbolic);
        assert_eq!(hyperbolicity_certificate_exact(&p), Certificate::Hyperbolic);
        let e = subdiscriminants_exact(&p).exact.unwrap();
        assert!(e[..3].iter().all(Zero::is_zero));
    }

    #[test]
    fn exact_certificate_with_interior_zero() {
        // (t^2 + 1)^2 (t - 3): two distinct complex roots repeated, one real.
        let a = pi_u(&[3.0], &Composition::new(vec![1]).unwrap()).unwrap();
        let mut full = vec![1.0, 0.0, 2.0, 0.0, 1.0];
        let lin = a.full_coeffs();
        let mut prod = vec![0.0; full.len() + lin.len() - 1];
        for (i, x) in full.iter().enumerate() {
            for (j, y) in lin.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        full = prod;
        let p = MonicPoly::from_leading(&full).unwrap();
        assert_eq!(hyperbolicity_certificate_exact(&p), Certificate::NotHyperbolic);
        assert_eq!(count_distinct_roots_exact(&p), 3);
    }

    #[test]
    fn translation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.random_range(2..=6);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = pi_u(&x, &Composition::top(d).unwrap()).unwrap();
            let c = rng.random_range(-2.0..2.0);
            let a = subdiscriminants(&p).values;
            let b = subdiscriminants(&p.shifted(c)).values;
            for k in 0..d {
                assert!((a[k] - b[k]).abs() <= 1e-8 * (1.0 + a[k].abs()), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn boundary_polynomials_have_zero_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=7 {
            for u in crate::compositions::enumerate(d, None, Some(d - 1)).unwrap() {
                let mut x: Vec<f64> = (0..u.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
                x.sort_by(f64::total_cmp);
                let p = pi_u(&x, &u).unwrap();
                let v = scaled_subdiscriminants(&p);
                assert!(v[0].abs() <= 1e-8, "{u} {v:?}");
                assert!(hyperbolicity_certificate(&p) != Certificate::NotHyperbolic, "{u} {p:?}");
            }
        }
    }
}
