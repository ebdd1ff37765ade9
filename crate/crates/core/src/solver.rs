//! Damped Newton on weighted power-sum systems `sum_j w_j x_j^i = c_i`.
//!
//! Systems are solved in a normalized frame: roots are translated by the mean
//! root of `f` and divided by its root standard deviation, so the targets
//! satisfy `c_1 = 0` and `c_2 = d` whenever `s >= 2`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::polynomials::{power_sums_of, MonicPoly};

/// Affine change of root coordinates `x = mu + sigma y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub mu: f64,
    pub sigma: f64,
    pub d: usize,
}

impl Frame {
    /// Mean root and root standard deviation of `f`; `sigma = 1` when all
    /// roots coincide.
    pub fn of(f: &MonicPoly) -> Frame {
        let d = f.degree();
        let mu = -f.coeffs()[0] / d as f64;
        let sigma = if d >= 2 {
            let p = power_sums_of(f, 2).expect("d >= 2");
            let var = p[1] / d as f64 - mu * mu;
            if var > 1e-24 * (1.0 + mu * mu) {
                var.sqrt()
            } else {
                1.0
            }
        } else {
            1.0
        };
        Frame { mu, sigma, d }
    }

    pub fn to_norm(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| (v - self.mu) / self.sigma).collect()
    }

    pub fn from_norm(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| self.mu + self.sigma * v).collect()
    }

    /// Power sums `(p_1, ..., p_k)` of the roots, re-expressed for the normalized roots.
    pub fn power_sums(&self, p: &[f64]) -> Vec<f64> {
        let mut full = Vec::with_capacity(p.len() + 1);
        full.push(self.d as f64);
        full.extend_from_slice(p);
        (1..=p.len())
            .map(|i| {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for m in 0..=i {
                    acc += binom * (-self.mu).powi((i - m) as i32) * full[m];
                    binom = binom * (i - m) as f64 / (m + 1) as f64;
                }
                acc / self.sigma.powi(i as i32)
            })
            .collect()
    }
}

/// `sum_j w_j x_j^i` for `i = 1..=k`.
pub fn weighted_power_sums(w: &[f64], x: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for (&wj, &xj) in w.iter().zip(x) {
        let mut pw = 1.0;
        for o in out.iter_mut() {
            pw *= xj;
            *o += wj * pw;
        }
    }
    out
}

/// A (possibly underdetermined) system in normalized coordinates.
pub struct System<'a> {
    pub w: &'a [f64],
    pub target: &'a [f64],
    /// Coordinate bound used for row scaling `1 / (d B^i)`.
    pub bound: f64,
}

impl System<'_> {
    fn row_scale(&self, i: usize) -> f64 {
        let d: f64 = self.w.iter().sum();
        1.0 / (d * self.bound.max(1.0).powi(i as i32 + 1))
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        weighted_power_sums(self.w, x, self.target.len())
            .iter()
            .zip(self.target)
            .enumerate()
            .map(|(i, (p, c))| (p - c) * self.row_scale(i))
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.target.len();
        let n = x.len();
        let mut j = DMatrix::<f64>::zeros(m, n);
        for c in 0..n {
            let mut pw = 1.0;
            for r in 0..m {
                j[(r, c)] = (r + 1) as f64 * self.w[c] * pw * self.row_scale(r);
                pw *= x[c];
            }
        }
        j
    }

    /// Damped Newton with backtracking; minimum-norm steps when the system
    /// is underdetermined. Returns the converged point.
    pub fn newton(&self, x0: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut r = self.residual(&x);
        let mut norm = sup(&r);
        let limit = 1e3 * self.bound.max(1.0);
        let mut polish = 0;
        for _ in 0..max_iter {
            if norm <= tol {
                polish += 1;
                if polish > 2 {
                    break;
                }
            }
            let jac = self.jacobian(&x);
            let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
            let step = jac.svd(true, true).solve(&rhs, 1e-15).ok()?;
            if step.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda >= 1.0 / 1024.0 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + lambda * b).collect();
                let rt = self.residual(&trial);
                let nt = sup(&rt);
                if nt < norm || (norm <= tol && nt <= tol) {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
            if x.iter().any(|v| v.abs() > limit) {
                return None;
            }
        }
        (norm <= tol).then_some(x)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smallest consecutive difference, `+inf` for fewer than two entries.
pub fn min_gap(x: &[f64]) -> f64 {
    x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut n: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base as u64) as f64 * inv;
        n /= base as u64;
        inv /= b;
    }
    out
}

/// Halton points in `[-r, r]^k`, rotated by a seeded offset and each sorted
/// ascending so every start lies in the chamber.
pub fn start_cloud(k: usize, count: usize, r: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let offset: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|n| {
            let mut p: Vec<f64> = (0..k)
                .map(|i| {
                    let v = (radical_inverse(n, PRIMES[i % PRIMES.len()]) + offset[i]).fract();
                    r * (2.0 * v - 1.0)
                })
                .collect();
            p.sort_by(f64::total_cmp);
            p
        })
        .collect()
}

/// All strictly increasing solutions of the square system
/// `sum_j w_j y_j^i = c_i`, `i = 1..=k`, in normalized coordinates.
/// Solutions are merged within `radius` and returned in lexicographic order.
pub fn solve_square(w: &[f64], c: &[f64], starts: usize, seed: u64, tol: f64, radius: f64, max_iter: usize) -> Vec<Vec<f64>> {
    let k = w.len();
    debug_assert_eq!(c.len(), k);
    if k == 1 {
        return vec![vec![c[0] / w[0]]];
    }
    if c[1] <= 0.0 {
        return Vec::new();
    }
    let r = 1.05 * c[1].sqrt();
    let sys = System { w, target: c, bound: r };
    let found: Vec<Vec<f64>> = start_cloud(k, starts, r, seed)
        .into_par_iter()
        .filter_map(|x0| sys.newton(&x0, tol, max_iter))
        .filter(|y| min_gap(y) > radius)
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for y in found {
        if !out.iter().any(|z| z.iter().zip(&y).all(|(a, b)| (a - b).abs() <= radius)) {
            out.push(y);
        }
    }
    out.sort_by(|a, b| a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let f = MonicPoly::new(vec![-3.0, 1.0, 2.0]).unwrap();
        let fr = Frame::of(&f);
        let x = [0.3, 1.0, 2.5];
        let y = fr.to_norm(&x);
        let back = fr.from_norm(&y);
        assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-14));
        let w = [2.0, 1.0, 3.0];
        let p = weighted_power_sums(&w, &x, 4);
        let q = weighted_power_sums(&w, &y, 4);
        let mapped = Frame { d: 6, ..fr }.power_sums(&p);
        for (a, b) in mapped.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn halton_cloud_is_sorted_and_bounded() {
        let cloud = start_cloud(3, 50, 2.0, 1);
        assert_eq!(cloud.len(), 50);
        for p in &cloud {
            assert!(p.windows(2).all(|w| w[0] <= w[1]));
            assert!(p.iter().all(|v| v.abs() <= 2.0));
        }
        assert_eq!(cloud, start_cloud(3, 50, 2.0, 1));
        assert_ne!(cloud, start_cloud(3, 50, 2.0, 2));
    }

    #[test]
    fn solves_two_by_two() {
        // y1 + 2 y2 = 0, y1^2 + 2 y2^2 = 6: y = (-2, 1).
        let sols = solve_square(&[1.0, 2.0], &[0.0, 6.0], 100, 0, 1e-12, 1e-7, 100);
        assert_eq!(sols.len(), 1);
        assert!((sols[0][0] + 2.0).abs() < 1e-12 && (sols[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_newton_projects() {
        let sys = System { w: &[1.0, 1.0, 1.0], target: &[0.0, 6.0], bound: 3.0 };
        let y = sys.newton(&[-2.0, 0.5, 1.5], 1e-13, 50).unwrap();
        let p = weighted_power_sums(&[1.0; 3], &y, 2);
        assert!(p[0].abs() < 1e-10 && (p[1] - 6.0).abs() < 1e-10);
    }
}
