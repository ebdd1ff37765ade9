//! Grid sampling of full-dimensional strata.
//!
//! A stratum labelled `u` with `l` parts has dimension `k = l - s`, and the
//! coefficients `h_{s+1}, ..., h_l` of its polynomials determine them. The
//! sampler sweeps those coefficients on a regular grid and solves the square
//! `l x l` power-sum system in each cell, flooding outward from the cell
//! nearest a known interior point so that every solve starts next to a
//! solved neighbour.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compositions::Composition;
use crate::error::{Error, Result};
use crate::polynomials::{elem_to_power, pi_u, MonicPoly, SymFuncVector};
use crate::solver::{min_gap, System};
use crate::vandermonde::{StratumClass, StratumSolver, StratumTag};

/// Largest number of grid cells swept for one stratum.
pub const MAX_CELLS: usize = 5_000_000;

/// Points per axis and optional per-axis bounds for `h_{s+1}, h_{s+2}, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub count: usize,
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl GridSpec {
    pub fn new(count: usize) -> Self {
        Self { count, bounds: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    /// Strictly increasing distinct roots.
    pub roots: Vec<f64>,
    pub poly: MonicPoly,
}

/// Samples of one stratum plus bookkeeping on the sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub u: Composition,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub samples: Vec<Sample>,
    pub cells: usize,
    /// Cells whose solve converged inside the chamber.
    pub solved: usize,
    /// Solved cells dropped because two roots sit within the clustering band.
    pub near_boundary: usize,
    /// Solved cells dropped by the coefficient check.
    pub rejected: usize,
}

/// Samples strata of one `(f, s)` pair, caching classifications and samples.
pub struct Sampler {
    solver: StratumSolver,
    grid: GridSpec,
    cache: Mutex<BTreeMap<Composition, SampleSet>>,
}

fn weights(u: &Composition) -> Vec<f64> {
    u.parts().iter().map(|&p| p as f64).collect()
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

impl Sampler {
    pub fn new(solver: StratumSolver, grid: GridSpec) -> Self {
        Self { solver, grid, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn solver(&self) -> &StratumSolver {
        &self.solver
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn classify(&self, u: &Composition) -> Result<StratumClass> {
        self.solver.classify(u)
    }

    /// Samples the full-dimensional stratum `u`.
    pub fn sample(&self, u: &Composition) -> Result<SampleSet> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(u) {
            return Ok(hit.clone());
        }
        let set = self.sample_uncached(u)?;
        self.cache.lock().expect("cache lock").insert(u.clone(), set.clone());
        Ok(set)
    }

    fn sample_uncached(&self, u: &Composition) -> Result<SampleSet> {
        let s = self.solver.s();
        let class = self.solver.classify(u)?;
        if class.tag != StratumTag::FullDim {
            return Err(Error::NoInteriorPoint(u.to_string()));
        }
        if self.grid.count == 0 {
            return Err(Error::EmptyGrid);
        }
        let witness = class.witness_roots.expect("full-dimensional strata carry a witness");
        let k = u.len() - s;
        let n = self.grid.count;
        if n == 1 {
            let x = witness.roots().to_vec();
            let poly = pi_u(&x, u)?;
            return Ok(SampleSet {
                u: u.clone(),
                dim: k,
                bounds: Vec::new(),
                samples: vec![Sample { roots: x, poly }],
                cells: 1,
                solved: 1,
                near_boundary: 0,
                rejected: 0,
            });
        }
        let cells = n.checked_pow(k as u32).filter(|&c| c <= MAX_CELLS).ok_or_else(|| {
            Error::CostGuard(format!("{n}^{k} grid cells exceed the limit of {MAX_CELLS}"))
        })?;
        let bounds = self.bounds_for(u, k)?;
        let sweep = Sweep { sampler: self, u, k, n, bounds: &bounds, w: weights(u) };
        let solved = sweep.flood(&self.solver.frame().to_norm(witness.roots()))?;

        let cfg = self.solver.config();
        let mut samples = Vec::new();
        let (mut near, mut rejected) = (0, 0);
        let count = solved.len();
        for y in solved.into_values() {
            let x = self.solver.frame().from_norm(&y);
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if min_gap(&x) < 10.0 * cfg.cluster_tol * scale {
                near += 1;
                continue;
            }
            let poly = pi_u(&x, u)?;
            if !self.solver.verifies(&poly) {
                rejected += 1;
                continue;
            }
            samples.push(Sample { roots: x, poly });
        }
        // The first `s` coefficients agree up to rounding, so order by the free ones.
        samples.sort_by(|a, b| lex(&a.poly.coeffs()[s..], &b.poly.coeffs()[s..]));
        Ok(SampleSet {
            u: u.clone(),
            dim: k,
            bounds,
            samples,
            cells,
            solved: count,
            near_boundary: near,
            rejected,
        })
    }

    /// User bounds, or the bounding box of the stratum's boundary (points and
    /// samples of lower strata) with a small margin. The projection to
    /// `(h_{s+1}, ..., h_l)` is injective on the closed stratum, so the box
    /// of the boundary contains the whole stratum.
    fn bounds_for(&self, u: &Composition, k: usize) -> Result<Vec<(f64, f64)>> {
        let s = self.solver.s();
        if let Some(b) = &self.grid.bounds {
            if b.len() < k {
                return Err(Error::InvalidRange(format!(
                    "{k} sweep axes need bounds, {} given",
                    b.len()
                )));
            }
            return Ok(b[..k].to_vec());
        }
        if s <= 1 {
            return Err(Error::InvalidRange(
                "strata are unbounded for s <= 1; grid bounds are required".into(),
            ));
        }
        let mut lo = vec![f64::INFINITY; k];
        let mut hi = vec![f64::NEG_INFINITY; k];
        let mut add = |h: &MonicPoly| {
            for a in 0..k {
                let v = h.coeffs()[s + a];
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        };
        for w in u.down_set() {
            if &w == u {
                continue;
            }
            let class = self.solver.classify(&w)?;
            match class.tag {
                StratumTag::Empty => {}
                StratumTag::Point => add(class.witness.as_ref().expect("points carry a witness")),
                StratumTag::FullDim => {
                    for smp in self.sample(&w)?.samples {
                        add(&smp.poly);
                    }
                }
            }
        }
        if lo.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRange(format!("no boundary points found to bound {u}")));
        }
        Ok(lo
            .into_iter()
            .zip(hi)
            .map(|(a, b)| {
                let m = 0.02 * (b - a) + 1e-9 * (1.0 + a.abs().max(b.abs()));
                (a - m, b + m)
            })
            .collect())
    }
}

struct Sweep<'a> {
    sampler: &'a Sampler,
    u: &'a Composition,
    k: usize,
    n: usize,
    bounds: &'a [(f64, f64)],
    w: Vec<f64>,
}

impl Sweep<'_> {
    fn coords(&self, cell: usize) -> Vec<usize> {
        let mut c = cell;
        (0..self.k)
            .map(|_| {
                let i = c % self.n;
                c /= self.n;
                i
            })
            .collect()
    }

    fn index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.n + i)
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(self.bounds)
            .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }

    /// Normalized power-sum targets for sweep coordinates `h`.
    fn targets(&self, h: &[f64]) -> Result<Vec<f64>> {
        let solver = self.sampler.solver();
        let f = solver.poly();
        let s = solver.s();
        let coeffs: Vec<f64> = f.coeffs()[..s].iter().chain(h).copied().collect();
        let e: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { -c } else { *c })
            .collect();
        let p = elem_to_power(&SymFuncVector::elementary(e, f.degree())?)?.values;
        Ok(solver.frame().power_sums(&p))
    }

    /// Newton on the square system; a solution equal to the chamber point up
    /// to swapping equal weights is sorted back.
    fn solve(&self, start: &[f64], target: &[f64]) -> Option<Vec<f64>> {
        let bound = if target.len() >= 2 { 1.05 * target[1].max(0.0).sqrt() } else { 1.0 };
        let sys = System { w: &self.w, target, bound };
        let cfg = self.sampler.solver().config();
        let y = sys.newton(start, cfg.residual_tol, cfg.max_newton_iter)?;
        if min_gap(&y) > 0.0 {
            return Some(y);
        }
        let mut pairs: Vec<(f64, f64)> = y.iter().copied().zip(self.w.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sorted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        (pairs.iter().zip(&self.w).all(|(p, w)| p.1 == *w) && min_gap(&sorted) > 0.0).then_some(sorted)
    }

    /// Continuation in `steps` equal moves of the sweep coordinates.
    fn track(&self, mut y: Vec<f64>, from: &[f64], to: &[f64], steps: usize) -> Option<Vec<f64>> {
        for step in 1..=steps {
            let t = step as f64 / steps as f64;
            let h: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect();
            let target = self.targets(&h).ok()?;
            y = self.solve(&y, &target)?;
        }
        Some(y)
    }

    fn flood(&self, witness: &[f64]) -> Result<BTreeMap<usize, Vec<f64>>> {
        let s = self.sampler.solver().s();
        let l = self.u.len();
        let x = self.sampler.solver().frame().from_norm(witness);
        let h0: Vec<f64> = pi_u(&x, self.u)?.coeffs()[s..l].to_vec();
        let total = self.n.pow(self.k as u32);

        // Seed: the cells nearest the witness, tried in order of distance.
        let frac: Vec<f64> = h0
            .iter()
            .zip(self.bounds)
            .map(|(v, &(lo, hi))| (v - lo) / (hi - lo) * (self.n - 1) as f64)
            .collect();
        let mut near: Vec<Vec<usize>> = Vec::new();
        for offs in 0..(1usize << self.k) {
            let idx: Vec<usize> = frac
                .iter()
                .enumerate()
                .map(|(a, &f)| {
                    let base = f.floor().clamp(0.0, (self.n - 1) as f64) as usize;
                    (base + (offs >> a & 1)).min(self.n - 1)
                })
                .collect();
            if !near.contains(&idx) {
                near.push(idx);
            }
        }
        let dist = |idx: &Vec<usize>| idx.iter().zip(&frac).map(|(&i, f)| (i as f64 - f).powi(2)).sum::<f64>();
        near.sort_by(|a, b| dist(a).total_cmp(&dist(b)));

        let mut solved: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut visited = vec![false; total];
        let mut frontier = Vec::new();
        for idx in near {
            let cell = self.index(&idx);
            visited[cell] = true;
            if let Some(y) = self.track(witness.to_vec(), &h0, &self.point(&idx), 16) {
                solved.insert(cell, y);
                frontier.push(cell);
                break;
            }
        }

        while !frontier.is_empty() {
            let mut next: Vec<(usize, usize)> = Vec::new();
            for &cell in &frontier {
                let idx = self.coords(cell);
                for a in 0..self.k {
                    for up in [false, true] {
                        if (!up && idx[a] == 0) || (up && idx[a] + 1 == self.n) {
                            continue;
                        }
                        let mut nb = idx.clone();
                        nb[a] = if up { nb[a] + 1 } else { nb[a] - 1 };
                        let nc = self.index(&nb);
                        if !visited[nc] {
                            visited[nc] = true;
                            next.push((nc, cell));
                        }
                    }
                }
            }
            let results: Vec<(usize, Option<Vec<f64>>)> = next
                .par_iter()
                .map(|&(nc, parent)| {
                    let from = self.point(&self.coords(parent));
                    let to = self.point(&self.coords(nc));
                    let y0 = solved[&parent].clone();
                    let y = self
                        .track(y0.clone(), &from, &to, 1)
                        .or_else(|| self.track(y0, &from, &to, 4));
                    (nc, y)
                })
                .collect();
            frontier = Vec::new();
            for (nc, y) in results {
                if let Some(y) = y {
                    solved.insert(nc, y);
                    frontier.push(nc);
                }
            }
        }
        Ok(solved)
    }
}

/// Grid samples of a full-dimensional stratum, sorted by their free coefficients.
pub fn sample_stratum(f: &MonicPoly, s: usize, u: &Composition, grid: &GridSpec) -> Result<Vec<MonicPoly>> {
    let solver = StratumSolver::new(f, s, &crate::config::Config::default())?;
    let set = Sampler::new(solver, grid.clone()).sample(u)?;
    Ok(set.samples.into_iter().map(|s| s.poly).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::polynomials::{composition_of, DEFAULT_CLUSTER_TOL};

    fn c(parts: &[usize]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn cubic() -> MonicPoly {
        MonicPoly::new(vec![0.0, -3.0, 0.0]).unwrap()
    }

    #[test]
    fn cubic_interval() {
        let samples = sample_stratum(&cubic(), 2, &c(&[1, 1, 1]), &GridSpec::new(101)).unwrap();
        assert!(samples.len() >= 95, "{}", samples.len());
        let f3: Vec<f64> = samples.iter().map(|p| p.coeffs()[2]).collect();
        assert!(f3.iter().all(|v| v.abs() < 2.0));
        assert!(f3.first().unwrap() < &-1.9 && f3.last().unwrap() > &1.9);
        // Sorted by coefficients, and no hole wider than three grid steps.
        let spacing = 4.0 * 1.04 / 100.0;
        assert!(f3.windows(2).all(|w| w[0] < w[1] && w[1] - w[0] < 3.0 * spacing));
        for p in &samples {
            assert!((p.coeffs()[0]).abs() < 1e-9 && (p.coeffs()[1] + 3.0).abs() < 1e-9 * 4.0);
            assert_eq!(composition_of(p, DEFAULT_CLUSTER_TOL).unwrap(), c(&[1, 1, 1]));
        }
    }

    #[test]
    fn degenerate_grids() {
        let one = sample_stratum(&cubic(), 2, &c(&[1, 1, 1]), &GridSpec::new(1)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(
            sample_stratum(&cubic(), 2, &c(&[1, 1, 1]), &GridSpec::new(0)),
            Err(Error::EmptyGrid)
        );
        assert!(matches!(
            sample_stratum(&cubic(), 2, &c(&[2, 1]), &GridSpec::new(5)),
            Err(Error::NoInteriorPoint(_))
        ));
        let f = MonicPoly::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(sample_stratum(&f, 1, &c(&[1, 2]), &GridSpec::new(5)), Err(Error::InvalidRange(_))));
        let grid = GridSpec { count: 21, bounds: Some(vec![(-5.0, 5.0)]) };
        let samples = sample_stratum(&f, 1, &c(&[1, 2]), &grid).unwrap();
        assert!(!samples.is_empty());
        assert!(samples.iter().all(|p| (p.coeffs()[0] - 1.0).abs() < 1e-9));
    }

    #[test]
    fn closure_of_interval() {
        let solver = StratumSolver::new(&cubic(), 2, &Config::default()).unwrap();
        let sampler = Sampler::new(solver, GridSpec::new(4001));
        let set = sampler.sample(&c(&[1, 1, 1])).unwrap();
        for w in [c(&[1, 2]), c(&[2, 1])] {
            let p = sampler.classify(&w).unwrap().witness.unwrap();
            let best = set
                .samples
                .iter()
                .map(|smp| smp.poly.distance(&p).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-3, "{w}: {best}");
        }
    }
}
