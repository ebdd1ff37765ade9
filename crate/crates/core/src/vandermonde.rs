//! Weighted Vandermonde systems and the classification of strata.
//!
//! For a composition `u` of `d` with `l` parts, the points of the stratum of
//! `H_s(f)` labelled `u` are the increasing `x in R^l` with
//! `sum_j u_j x_j^i = c_i` for `i = 1..=s`, the `c_i` being the power sums of
//! the roots of `f`. When `l <= s` the stratum holds at most one polynomial;
//! when it holds a polynomial with at least `s` distinct roots it has
//! dimension `l - s`.

use std::collections::BTreeMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::compositions::Composition;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::polynomials::{pi_u, power_sums_of, MonicPoly, RootMultiset};
use crate::solver::{min_gap, solve_square, start_cloud, weighted_power_sums, Frame, System};

/// The constraints `sum_j u_j x_j^i = c_i`, `i = 1..=s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VandermondeSystem {
    u: Composition,
    s: usize,
    c: Vec<f64>,
    derived_from: Vec<f64>,
}

impl VandermondeSystem {
    pub fn u(&self) -> &Composition {
        &self.u
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Power-sum targets `(c_1, ..., c_s)`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `(f_1, ..., f_s)`.
    pub fn derived_from(&self) -> &[f64] {
        &self.derived_from
    }

    /// `sum_j u_j x_j^i - c_i` for each constraint.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.u, x)?;
        Ok(weighted_power_sums(&weights(&self.u), x, self.s)
            .iter()
            .zip(&self.c)
            .map(|(p, c)| p - c)
            .collect())
    }
}

fn check_len(u: &Composition, x: &[f64]) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::LengthMismatch { expected: u.len(), got: x.len() });
    }
    Ok(())
}

fn weights(u: &Composition) -> Vec<f64> {
    u.parts().iter().map(|&p| p as f64).collect()
}

fn check_degree(f: &MonicPoly, u: &Composition) -> Result<()> {
    if u.degree() != f.degree() {
        return Err(Error::MismatchedDegree(u.degree(), f.degree()));
    }
    Ok(())
}

/// Power-sum form of the first `s` coefficient constraints.
pub fn build_system(f: &MonicPoly, s: usize, u: &Composition) -> Result<VandermondeSystem> {
    let d = f.degree();
    if s == 0 || s > d {
        return Err(Error::InvalidS { s, d });
    }
    check_degree(f, u)?;
    Ok(VandermondeSystem {
        u: u.clone(),
        s,
        c: power_sums_of(f, s)?,
        derived_from: f.coeffs()[..s].to_vec(),
    })
}

/// `s x l` matrix with entries `i u_j x_j^(i-1)`.
pub fn jacobian(sys: &VandermondeSystem, x: &[f64]) -> Result<DMatrix<f64>> {
    check_len(&sys.u, x)?;
    let mut m = DMatrix::<f64>::zeros(sys.s, x.len());
    for (j, (&xj, &uj)) in x.iter().zip(sys.u.parts()).enumerate() {
        let mut pw = 1.0;
        for i in 0..sys.s {
            m[(i, j)] = (i + 1) as f64 * uj as f64 * pw;
            pw *= xj;
        }
    }
    Ok(m)
}

/// `|prod_i i u_i| prod_{j<r} |x_j - x_r|`, the absolute Jacobian determinant
/// of a square system.
pub fn jacobian_det_formula(u: &Composition, x: &[f64]) -> Result<f64> {
    check_len(u, x)?;
    let lead: f64 = u.parts().iter().enumerate().map(|(i, &p)| ((i + 1) * p) as f64).product();
    let mut prod = 1.0;
    for j in 0..x.len() {
        for r in j + 1..x.len() {
            prod *= (x[j] - x[r]).abs();
        }
    }
    Ok(lead * prod)
}

/// `x_1 <= ... <= x_l`, or strict inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderedChamber {
    pub l: usize,
}

impl OrderedChamber {
    pub fn contains(&self, x: &[f64], strict: bool) -> bool {
        x.len() == self.l
            && x.windows(2).all(|w| if strict { w[0] < w[1] } else { w[0] <= w[1] })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StratumTag {
    Empty,
    Point,
    FullDim,
}

/// Outcome of classifying one stratum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumClass {
    pub tag: StratumTag,
    /// `-1` empty, `0` point, `l - s` full-dimensional.
    pub dim: i64,
    /// The point, or an interior polynomial of a full-dimensional stratum.
    pub witness: Option<MonicPoly>,
    pub witness_roots: Option<RootMultiset>,
    /// False when an empty verdict rests on a failed numerical search only.
    pub certified: bool,
}

impl StratumClass {
    fn empty(certified: bool) -> Self {
        Self { tag: StratumTag::Empty, dim: -1, witness: None, witness_roots: None, certified }
    }

    fn point(r: RootMultiset) -> Self {
        Self {
            tag: StratumTag::Point,
            dim: 0,
            witness: Some(MonicPoly::from_roots(&r)),
            witness_roots: Some(r),
            certified: true,
        }
    }

    /// Composition of the witness, if any.
    pub fn witness_composition(&self) -> Option<&Composition> {
        self.witness_roots.as_ref().map(RootMultiset::mults)
    }
}

/// `x = (-f_1 / sum a_i) (a_1/u_1, ..., a_l/u_l)`, which satisfies
/// `sum u_i x_i = -f_1` and is increasing when `a_i / u_i` increases and the
/// prefactor is positive.
pub fn s1_closed_form(f1: f64, u: &Composition, a: &[f64]) -> Result<Vec<f64>> {
    check_len(u, a)?;
    let total: f64 = a.iter().sum();
    if total == 0.0 {
        return Err(Error::InvalidRange("the a_i must not sum to zero".into()));
    }
    let factor = -f1 / total;
    Ok(a.iter().zip(u.parts()).map(|(ai, &ui)| factor * ai / ui as f64).collect())
}

/// Caches solves for one `(f, s)` pair so that many strata can share them.
pub struct StratumSolver {
    f: MonicPoly,
    s: usize,
    cfg: Config,
    frame: Frame,
    /// Normalized power sums of the roots of `f`, as many as `d`.
    targets: Vec<f64>,
    exact: Mutex<BTreeMap<Composition, Vec<Vec<f64>>>>,
    classes: Mutex<BTreeMap<Composition, StratumClass>>,
}

impl StratumSolver {
    /// Accepts `0 <= s <= d`.
    pub fn new(f: &MonicPoly, s: usize, cfg: &Config) -> Result<Self> {
        let d = f.degree();
        if s > d {
            return Err(Error::InvalidS { s, d });
        }
        let frame = Frame::of(f);
        let targets = frame.power_sums(&power_sums_of(f, d)?);
        Ok(Self {
            f: f.clone(),
            s,
            cfg: cfg.clone(),
            frame,
            targets,
            exact: Mutex::new(BTreeMap::new()),
            classes: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn poly(&self) -> &MonicPoly {
        &self.f
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    /// Whether `h` matches the first `s` coefficients of `f`.
    pub fn verifies(&self, h: &MonicPoly) -> bool {
        h.coeffs()
            .iter()
            .zip(self.f.coeffs())
            .take(self.s)
            .all(|(a, b)| (a - b).abs() <= self.cfg.verify_tol * (1.0 + b.abs()))
    }

    fn seed_for(&self, w: &Composition) -> u64 {
        w.parts().iter().fold(self.cfg.seed, |h, &p| h.wrapping_mul(31).wrapping_add(p as u64))
    }

    /// Strictly increasing solutions with composition exactly `w`, for
    /// `l(w) <= s`, that satisfy all `s` constraints. Original coordinates.
    pub fn exact_points(&self, w: &Composition) -> Result<Vec<Vec<f64>>> {
        check_degree(&self.f, w)?;
        if w.len() > self.s {
            return Err(Error::InvalidRange(format!("{w} has more than s = {} parts", self.s)));
        }
        if let Some(hit) = self.exact.lock().expect("cache lock").get(w) {
            return Ok(hit.clone());
        }
        let k = w.len();
        let sols = solve_square(
            &weights(w),
            &self.targets[..k],
            self.cfg.starts,
            self.seed_for(w),
            self.cfg.residual_tol,
            self.cfg.solution_radius,
            self.cfg.max_newton_iter,
        );
        let mut out = Vec::new();
        for y in sols {
            let x = self.frame.from_norm(&y);
            if !(OrderedChamber { l: k }).contains(&x, true) {
                continue;
            }
            if self.verifies(&pi_u(&x, w)?) {
                out.push(x);
            }
        }
        self.exact.lock().expect("cache lock").insert(w.clone(), out.clone());
        Ok(out)
    }

    /// Distinct polynomials among solved points, coarsest label first.
    fn distinct_points(&self, mut found: Vec<(Composition, Vec<f64>)>) -> Result<Vec<RootMultiset>> {
        found.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        let same = 1e-6 * (1.0 + self.f.max_abs_coeff());
        let mut out: Vec<(MonicPoly, RootMultiset)> = Vec::new();
        for (w, x) in found {
            let h = pi_u(&x, &w)?;
            if out.iter().any(|(g, _)| g.distance(&h).map(|dist| dist <= same).unwrap_or(false)) {
                continue;
            }
            out.push((h, RootMultiset::new(x, w)?));
        }
        Ok(out.into_iter().map(|(_, r)| r).collect())
    }

    /// All solved points with label `w <= u` and `l(w) <= max_len`.
    fn points_below(&self, u: &Composition, max_len: usize) -> Result<Vec<RootMultiset>> {
        let mut found = Vec::new();
        for w in u.down_set() {
            if w.len() <= max_len {
                for x in self.exact_points(&w)? {
                    found.push((w.clone(), x));
                }
            }
        }
        self.distinct_points(found)
    }

    /// The unique polynomial of the stratum `u`, `l(u) <= s`, if any.
    pub fn point_stratum(&self, u: &Composition) -> Result<Option<RootMultiset>> {
        check_degree(&self.f, u)?;
        if u.len() > self.s {
            return Err(Error::InvalidRange(format!("{u} has more than s = {} parts", self.s)));
        }
        let pts = self.points_below(u, self.s)?;
        match pts.len() {
            0 => Ok(None),
            1 => Ok(pts.into_iter().next()),
            n => Err(Error::InternalInconsistency(format!(
                "{n} distinct polynomials found in the point stratum {u}: {:?}",
                pts.iter().map(|r| r.roots().to_vec()).collect::<Vec<_>>()
            ))),
        }
    }

    /// A strictly increasing `x` with composition `u` in the stratum, for
    /// `l(u) > s`, or `None` if the stratum is not full-dimensional.
    pub fn interior_point(&self, u: &Composition) -> Result<Option<Vec<f64>>> {
        check_degree(&self.f, u)?;
        let l = u.len();
        if l <= self.s {
            return Err(Error::InvalidRange(format!("{u} needs more than s = {} parts", self.s)));
        }
        match self.s {
            0 => return Ok(Some((0..l).map(|i| i as f64).collect())),
            1 => return Ok(Some(s1_interior(self.f.coeffs()[0], u))),
            _ => {}
        }

        let mut stalled = None;
        for w in u.down_set().into_iter().filter(|w| w.len() == self.s) {
            for x in self.exact_points(&w)? {
                match self.continue_to(&w, &self.frame.to_norm(&x), u) {
                    Ok(y) => return Ok(Some(self.finish(u, y)?)),
                    Err(e @ Error::ContinuationStalled(_)) => stalled = Some(e),
                    Err(e) => return Err(e),
                }
            }
        }
        if let Some(y) = self.projected_multistart(u) {
            return Ok(Some(self.finish(u, y)?));
        }
        match stalled {
            Some(e) => Err(e),
            None => Ok(None),
        }
    }

    fn system<'a>(&'a self, w: &'a [f64]) -> System<'a> {
        System { w, target: &self.targets[..self.s], bound: 1.05 * self.targets[1].max(0.0).sqrt() }
    }

    /// Follows a chain of covers from `w` up to `u`, splitting one coordinate
    /// at a time along the constraint tangent and re-projecting.
    fn continue_to(&self, w: &Composition, y: &[f64], u: &Composition) -> Result<Vec<f64>> {
        let target: Vec<usize> = u.partial_sums().sums().to_vec();
        let mut sums: Vec<usize> = w.partial_sums().sums().to_vec();
        let mut y = y.to_vec();
        for &m in &target {
            if sums.contains(&m) {
                continue;
            }
            // Block k of the current composition contains m strictly inside.
            let k = sums.iter().position(|&p| p > m).expect("m < d");
            let lo = if k == 0 { 0 } else { sums[k - 1] };
            let (a, b) = ((m - lo) as f64, (sums[k] - m) as f64);
            sums.insert(k, m);
            let comp = Composition::from_partial_sums(&crate::compositions::PartialSumSet::new(sums.clone())?);
            let wts = weights(&comp);
            let sys = self.system(&wts);
            let mut delta = self.cfg.split_delta;
            loop {
                let mut start = y.clone();
                let xk = start[k];
                start[k] = xk - delta * b / (a + b);
                start.insert(k + 1, xk + delta * a / (a + b));
                if let Some(z) = sys.newton(&start, self.cfg.residual_tol, self.cfg.max_newton_iter) {
                    let moved = z.iter().zip(&start).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()));
                    if min_gap(&z) > 0.0 && z[k + 1] - z[k] >= 0.5 * delta && moved <= delta {
                        y = z;
                        break;
                    }
                }
                delta *= 0.5;
                if delta < self.cfg.min_split_delta {
                    return Err(Error::ContinuationStalled(format!(
                        "splitting towards {u} from {w} at {comp}"
                    )));
                }
            }
        }
        Ok(y)
    }

    /// Random starts projected onto the constraints by minimum-norm Newton.
    fn projected_multistart(&self, u: &Composition) -> Option<Vec<f64>> {
        let wts = weights(u);
        let sys = self.system(&wts);
        let r = sys.bound;
        start_cloud(u.len(), self.cfg.starts, r, self.seed_for(u) ^ 0xabcd)
            .into_iter()
            .filter_map(|y0| sys.newton(&y0, self.cfg.residual_tol, self.cfg.max_newton_iter))
            .find(|y| min_gap(y) > 1e3 * self.cfg.solution_radius)
    }

    /// Moves towards the analytic center of the gaps, then maps back and checks.
    fn finish(&self, u: &Composition, y: Vec<f64>) -> Result<Vec<f64>> {
        let wts = weights(u);
        let y = self.center(&wts, y);
        let x = self.frame.from_norm(&y);
        if !(OrderedChamber { l: x.len() }).contains(&x, true) || !self.verifies(&pi_u(&x, u)?) {
            return Err(Error::InternalInconsistency(format!("interior point for {u} fails verification")));
        }
        Ok(x)
    }

    fn center(&self, wts: &[f64], mut y: Vec<f64>) -> Vec<f64> {
        let sys = self.system(wts);
        let barrier = |z: &[f64]| z.windows(2).map(|w| (w[1] - w[0]).ln()).sum::<f64>();
        let mut value = barrier(&y);
        for _ in 0..40 {
            let n = y.len();
            let mut g = vec![0.0; n];
            for j in 0..n - 1 {
                let inv = 1.0 / (y[j + 1] - y[j]);
                g[j] -= inv;
                g[j + 1] += inv;
            }
            let jac = {
                let mut m = DMatrix::<f64>::zeros(self.s, n);
                for c in 0..n {
                    let mut pw = 1.0;
                    for r in 0..self.s {
                        m[(r, c)] = (r + 1) as f64 * wts[c] * pw;
                        pw *= y[c];
                    }
                }
                m
            };
            let gv = nalgebra::DVector::from_vec(g);
            let Some(pinv) = jac.clone().pseudo_inverse(1e-12).ok() else { break };
            let tangent = &gv - &pinv * (&jac * &gv);
            let norm = tangent.norm();
            if norm < 1e-12 {
                break;
            }
            let mut alpha = 0.5 * min_gap(&y).min(0.5);
            let mut improved = false;
            while alpha > 1e-6 {
                let trial: Vec<f64> = y.iter().zip(tangent.iter()).map(|(a, t)| a + alpha * t / norm).collect();
                if let Some(z) = sys.newton(&trial, self.cfg.residual_tol, self.cfg.max_newton_iter) {
                    if min_gap(&z) > 0.0 {
                        let v = barrier(&z);
                        if v > value + 1e-9 {
                            y = z;
                            value = v;
                            improved = true;
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        y
    }

    /// Empty, point or full-dimensional, with a witness.
    pub fn classify(&self, u: &Composition) -> Result<StratumClass> {
        check_degree(&self.f, u)?;
        if let Some(hit) = self.classes.lock().expect("cache lock").get(u) {
            return Ok(hit.clone());
        }
        let class = self.classify_uncached(u)?;
        self.classes.lock().expect("cache lock").insert(u.clone(), class.clone());
        Ok(class)
    }

    fn classify_uncached(&self, u: &Composition) -> Result<StratumClass> {
        let l = u.len();
        if l <= self.s {
            return Ok(match self.point_stratum(u)? {
                Some(r) => StratumClass::point(r),
                None => StratumClass::empty(true),
            });
        }
        let stalled = match self.interior_point(u) {
            Ok(Some(x)) => {
                let r = RootMultiset::new(x, u.clone())?;
                return Ok(StratumClass {
                    tag: StratumTag::FullDim,
                    dim: (l - self.s) as i64,
                    witness: Some(MonicPoly::from_roots(&r)),
                    witness_roots: Some(r),
                    certified: true,
                });
            }
            Ok(None) => None,
            Err(e @ Error::ContinuationStalled(_)) => Some(e),
            Err(e) => return Err(e),
        };
        let pts = self.points_below(u, self.s)?;
        if let Some(p) = pts.iter().find(|p| p.mults().len() == self.s) {
            return Err(Error::Indeterminate(format!(
                "{u} contains a point with {} distinct roots but no interior point was reached{}",
                p.mults().len(),
                stalled.map(|e| format!(" ({e})")).unwrap_or_default()
            )));
        }
        match pts.len() {
            0 => Ok(StratumClass::empty(false)),
            1 => Ok(StratumClass::point(pts.into_iter().next().expect("one point"))),
            n => Err(Error::InternalInconsistency(format!(
                "{n} isolated points found in the stratum {u}"
            ))),
        }
    }
}

/// Increasing `x` with `sum u_i x_i = -f_1`.
fn s1_interior(f1: f64, u: &Composition) -> Vec<f64> {
    let l = u.len();
    if f1 == 0.0 {
        // Translate (1, ..., l) so the weighted sum vanishes.
        let d = u.degree() as f64;
        let mean: f64 = u.parts().iter().enumerate().map(|(i, &p)| (i + 1) as f64 * p as f64).sum::<f64>() / d;
        return (0..l).map(|i| (i + 1) as f64 - mean).collect();
    }
    let q: Vec<f64> = if f1 < 0.0 {
        (1..=l).map(|i| i as f64).collect()
    } else {
        (1..=l).map(|i| i as f64 - (l + 1) as f64).collect()
    };
    let a: Vec<f64> = q.iter().zip(u.parts()).map(|(qi, &ui)| qi * ui as f64).collect();
    s1_closed_form(f1, u, &a).expect("nonzero weighted sum")
}

/// The unique polynomial of the point stratum `u` (`l(u) <= s`), if any.
pub fn solve_point_stratum(f: &MonicPoly, s: usize, u: &Composition) -> Result<Option<MonicPoly>> {
    solve_point_stratum_with(f, s, u, &Config::default()).map(|r| r.map(|r| MonicPoly::from_roots(&r)))
}

pub fn solve_point_stratum_with(f: &MonicPoly, s: usize, u: &Composition, cfg: &Config) -> Result<Option<RootMultiset>> {
    if s == 0 {
        return Err(Error::InvalidS { s, d: f.degree() });
    }
    StratumSolver::new(f, s, cfg)?.point_stratum(u)
}

/// A strictly increasing root vector with composition exactly `u` in the
/// stratum, `l(u) > s`.
pub fn find_interior_point(f: &MonicPoly, s: usize, u: &Composition) -> Result<Option<Vec<f64>>> {
    find_interior_point_with(f, s, u, &Config::default())
}

pub fn find_interior_point_with(f: &MonicPoly, s: usize, u: &Composition, cfg: &Config) -> Result<Option<Vec<f64>>> {
    StratumSolver::new(f, s, cfg)?.interior_point(u)
}

pub fn classify_stratum(f: &MonicPoly, s: usize, u: &Composition) -> Result<StratumClass> {
    classify_stratum_with(f, s, u, &Config::default())
}

pub fn classify_stratum_with(f: &MonicPoly, s: usize, u: &Composition, cfg: &Config) -> Result<StratumClass> {
    if s == 0 {
        return Err(Error::InvalidS { s, d: f.degree() });
    }
    StratumSolver::new(f, s, cfg)?.classify(u)
}
