//! Occurring compositions of a starved set and the lattice of its strata.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::compositions::{enumerate, upward_closure, Composition};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::polynomials::MonicPoly;
use crate::vandermonde::{StratumSolver, StratumTag};

/// Largest degree accepted by the exhaustive oracle.
pub const BRUTE_FORCE_MAX_DEGREE: usize = 8;

/// Largest degree for which the lattice of strata is built.
pub const LATTICE_MAX_DEGREE: usize = 16;

/// The compositions occurring in `H_s(f)`: those `u` with some polynomial of
/// composition exactly `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OccurrenceTable {
    pub d: usize,
    pub s: usize,
    pub occurring: BTreeSet<Composition>,
    /// The occurring compositions of length at most `s`.
    pub atoms_input: BTreeSet<Composition>,
}

impl OccurrenceTable {
    pub fn new(d: usize, s: usize, occurring: BTreeSet<Composition>) -> Result<Self> {
        if let Some(u) = occurring.iter().find(|u| u.degree() != d) {
            return Err(Error::MismatchedDegree(u.degree(), d));
        }
        let atoms_input = occurring.iter().filter(|u| u.len() <= s).cloned().collect();
        Ok(Self { d, s, occurring, atoms_input })
    }

    pub fn occurs(&self, u: &Composition) -> bool {
        self.occurring.contains(u)
    }

    /// Compositions `w >= u` with `u` occurring and `l(w) > s` that are
    /// missing from the table. Empty for every consistent table.
    pub fn upward_violations(&self) -> Result<Vec<Composition>> {
        let closure = upward_closure(&self.occurring, self.d)?;
        Ok(closure
            .into_iter()
            .filter(|w| w.len() > self.s && !self.occurring.contains(w))
            .collect())
    }
}

/// The intermediate sets of the join-and-close algorithm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgorithmRun {
    pub d: usize,
    pub s: usize,
    /// Input: occurring compositions of length at most `s`.
    pub atoms: BTreeSet<Composition>,
    /// Joins of distinct pairs of atoms.
    pub joins: BTreeSet<Composition>,
    /// Upward closure of the joins.
    pub closure: BTreeSet<Composition>,
    pub occurring: BTreeSet<Composition>,
    pub advisory: Option<String>,
}

/// Runs the join-and-close algorithm, keeping every intermediate set.
pub fn run_algorithm(atoms: &BTreeSet<Composition>, d: usize, s: usize) -> Result<AlgorithmRun> {
    if s < 2 {
        return Err(Error::HypothesisViolation(format!("the algorithm needs s >= 2, got s = {s}")));
    }
    for u in atoms {
        if u.degree() != d {
            return Err(Error::MismatchedDegree(u.degree(), d));
        }
        if u.len() > s {
            return Err(Error::HypothesisViolation(format!(
                "input composition {u} has length {} > s = {s}",
                u.len()
            )));
        }
    }
    let list: Vec<&Composition> = atoms.iter().collect();
    let mut joins = BTreeSet::new();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            joins.insert(a.join(b)?);
        }
    }
    let closure = upward_closure(&joins, d)?;
    let occurring = atoms.union(&closure).cloned().collect();
    let advisory = (atoms.len() == 1).then(|| {
        "a single input composition has no pairwise joins, so nothing longer is reported; \
         a positive-dimensional starved set with one atom is not expected"
            .to_string()
    });
    Ok(AlgorithmRun { d, s, atoms: atoms.clone(), joins, closure, occurring, advisory })
}

/// `U` together with the upward closure of all pairwise joins of `U`.
pub fn algorithm_occurring(atoms: &BTreeSet<Composition>, d: usize, s: usize) -> Result<BTreeSet<Composition>> {
    Ok(run_algorithm(atoms, d, s)?.occurring)
}

/// Checks that `s >= 2` and that `H_s(f)` has dimension `d - s`, the latter
/// through a squarefree interior polynomial.
pub fn check_hypotheses(solver: &StratumSolver) -> Result<()> {
    let (d, s) = (solver.degree(), solver.s());
    if s < 2 {
        return Err(Error::HypothesisViolation(format!("the algorithm needs s >= 2, got s = {s}")));
    }
    if s >= d {
        return Ok(());
    }
    let top = Composition::top(d)?;
    let class = solver.classify(&top).map_err(|e| e.context(&format!("checking dimension via {top}")))?;
    if class.tag != StratumTag::FullDim {
        return Err(Error::HypothesisViolation(format!(
            "H_{s}(f) is not {}-dimensional: no polynomial with {d} distinct roots found",
            d - s
        )));
    }
    Ok(())
}

/// The occurring compositions of length at most `s`, each point labelled by
/// its actual composition.
pub fn compute_u(f: &MonicPoly, s: usize) -> Result<BTreeSet<Composition>> {
    compute_u_with(&StratumSolver::new(f, s, &Config::default())?)
}

pub fn compute_u_with(solver: &StratumSolver) -> Result<BTreeSet<Composition>> {
    check_hypotheses(solver)?;
    let s = solver.s();
    let labels = enumerate(solver.degree(), None, Some(s.min(solver.degree())))?;
    let found: Vec<Option<Composition>> = labels
        .par_iter()
        .map(|u| {
            let point = solver.point_stratum(u).map_err(|e| e.context(&format!("composition {u}")))?;
            Ok(point.map(|r| r.mults().clone()).filter(|w| w.len() <= s))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Classifies every composition of `d` and keeps those realised exactly.
pub fn brute_force_occurring(f: &MonicPoly, s: usize) -> Result<BTreeSet<Composition>> {
    brute_force_occurring_with(&StratumSolver::new(f, s, &Config::default())?)
}

pub fn brute_force_occurring_with(solver: &StratumSolver) -> Result<BTreeSet<Composition>> {
    let d = solver.degree();
    if d > BRUTE_FORCE_MAX_DEGREE {
        return Err(Error::CostGuard(format!(
            "exhaustive classification is limited to d <= {BRUTE_FORCE_MAX_DEGREE}, got {d}"
        )));
    }
    let all = enumerate(d, None, None)?;
    let hits: Vec<Option<Composition>> = all
        .par_iter()
        .map(|u| {
            let class = solver.classify(u).map_err(|e| e.context(&format!("composition {u}")))?;
            let exact = match class.tag {
                StratumTag::Empty => false,
                StratumTag::Point | StratumTag::FullDim => class.witness_composition() == Some(u),
            };
            Ok(exact.then(|| u.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

/// One stratum: the set of polynomials whose composition refines to at most
/// any of its labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumElement {
    /// Least label; for non-empty strata, the composition of the relative interior.
    pub label: Composition,
    /// Every label denoting this stratum.
    pub labels: Vec<Composition>,
    /// Occurring compositions below the label.
    pub down_set: Vec<Composition>,
    pub dim: i64,
    /// Height above the bottom element.
    pub rank: usize,
    pub witness: Option<MonicPoly>,
}

/// Strata ordered by inclusion, stored as a Hasse diagram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumLattice {
    pub d: usize,
    pub s: usize,
    pub elements: Vec<StratumElement>,
    /// Cover relations `(lower, upper)` as element indices.
    pub covers: Vec<(usize, usize)>,
    pub bottom: usize,
    pub top: usize,
    #[serde(skip)]
    leq: Vec<Vec<bool>>,
    #[serde(skip)]
    by_label: BTreeMap<Composition, usize>,
}

/// Builds the lattice of strata; witnesses are attached when a solver is given.
pub fn build_lattice(occ: &OccurrenceTable, solver: Option<&StratumSolver>) -> Result<StratumLattice> {
    let (d, s) = (occ.d, occ.s);
    if d > LATTICE_MAX_DEGREE {
        return Err(Error::CostGuard(format!("lattices are limited to d <= {LATTICE_MAX_DEGREE}, got {d}")));
    }
    let mut classes: BTreeMap<Vec<Composition>, Vec<Composition>> = BTreeMap::new();
    for u in enumerate(d, None, None)? {
        let down: Vec<Composition> = occ
            .occurring
            .iter()
            .filter(|w| w.leq(&u).unwrap_or(false))
            .cloned()
            .collect();
        classes.entry(down).or_default().push(u);
    }

    let mut elements = Vec::with_capacity(classes.len());
    for (down, labels) in classes {
        let mut label = labels[0].clone();
        for u in &labels[1..] {
            label = label.meet(u)?;
        }
        let dim = if down.is_empty() {
            -1
        } else {
            if !occ.occurs(&label) {
                return Err(Error::InconsistentTable(format!(
                    "stratum below {} has no occurring least label ({label} does not occur)",
                    labels[0]
                )));
            }
            (label.len() as i64 - s as i64).max(0)
        };
        let witness = match solver {
            Some(sv) if dim >= 0 => sv.classify(&label).map_err(|e| e.context(&format!("composition {label}")))?.witness,
            _ => None,
        };
        elements.push(StratumElement { label, labels, down_set: down, dim, rank: 0, witness });
    }
    elements.sort_by(|a, b| (a.down_set.len(), &a.label).cmp(&(b.down_set.len(), &b.label)));

    let n = elements.len();
    let sets: Vec<BTreeSet<&Composition>> = elements.iter().map(|e| e.down_set.iter().collect()).collect();
    let leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| sets[i].is_subset(&sets[j])).collect()).collect();
    let mut covers = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && leq[i][j] && !(0..n).any(|k| k != i && k != j && leq[i][k] && leq[k][j]) {
                covers.push((i, j));
            }
        }
    }
    // Elements are sorted by down-set size, so covers point forward.
    for &(i, j) in &covers {
        let r = elements[i].rank + 1;
        if r > elements[j].rank {
            elements[j].rank = r;
        }
    }
    let by_label = elements
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.labels.iter().map(move |u| (u.clone(), i)))
        .collect();
    Ok(StratumLattice { d, s, elements, covers, bottom: 0, top: n - 1, leq, by_label })
}

/// Outcome of the exhaustive property checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeReport {
    pub elements: usize,
    pub is_lattice: bool,
    pub graded: bool,
    pub atomic: bool,
    pub coatomic: bool,
    /// Cover steps in a longest chain from bottom to top.
    pub max_chain_len: usize,
    pub rank_is_dim_plus_one: bool,
    /// Number of elements of each rank.
    pub rank_counts: Vec<usize>,
    pub simplex_face_lattice: bool,
}

impl StratumLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    /// The element a label denotes.
    pub fn element_of(&self, u: &Composition) -> Option<usize> {
        self.by_label.get(u).copied()
    }

    /// Least upper bound, if unique.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let upper: Vec<usize> = (0..self.len()).filter(|&k| self.leq[i][k] && self.leq[j][k]).collect();
        upper.iter().copied().find(|&k| upper.iter().all(|&m| self.leq[k][m]))
    }

    /// Greatest lower bound, if unique.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len()).filter(|&k| self.leq[k][i] && self.leq[k][j]).collect();
        lower.iter().copied().find(|&k| lower.iter().all(|&m| self.leq[m][k]))
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.covers.iter().filter(|c| c.0 == self.bottom).map(|c| c.1).collect()
    }

    pub fn coatoms(&self) -> Vec<usize> {
        self.covers.iter().filter(|c| c.1 == self.top).map(|c| c.0).collect()
    }

    /// Shortest and longest cover-chain lengths from the bottom to each element.
    fn heights(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut lo = vec![usize::MAX; n];
        let mut hi = vec![0; n];
        lo[self.bottom] = 0;
        for &(i, j) in &self.covers {
            if lo[i] != usize::MAX {
                lo[j] = lo[j].min(lo[i] + 1);
                hi[j] = hi[j].max(hi[i] + 1);
            }
        }
        (lo, hi)
    }

    /// True when the order is that of all subsets of the atoms.
    pub fn is_simplex_face_lattice(&self) -> bool {
        let atoms = self.atoms();
        if atoms.len() >= 32 || self.len() != 1usize << atoms.len() {
            return false;
        }
        let masks: Vec<u32> = (0..self.len())
            .map(|i| atoms.iter().enumerate().filter(|(_, &a)| self.leq[a][i]).fold(0, |m, (b, _)| m | 1 << b))
            .collect();
        let distinct: BTreeSet<u32> = masks.iter().copied().collect();
        distinct.len() == self.len()
            && (0..self.len()).all(|i| (0..self.len()).all(|j| self.leq[i][j] == (masks[i] & !masks[j] == 0)))
    }

    /// Hasse diagram in Graphviz DOT, bottom to top.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strata {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, e) in self.elements.iter().enumerate() {
            let name = if e.dim < 0 { "empty".to_string() } else { e.label.to_string() };
            let _ = writeln!(out, "  n{i} [label=\"{name}\\ndim {}\"];", e.dim);
        }
        for &(i, j) in &self.covers {
            let _ = writeln!(out, "  n{i} -> n{j};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn verify_lattice_properties(l: &StratumLattice) -> LatticeReport {
    let n = l.len();
    let is_lattice = (0..n).all(|i| (0..n).all(|j| l.join(i, j).is_some() && l.meet(i, j).is_some()));
    let (lo, hi) = l.heights();
    let graded = lo == hi && lo.iter().all(|&h| h != usize::MAX);
    let atoms = l.atoms();
    let coatoms = l.coatoms();
    let atomic = is_lattice
        && (0..n).filter(|&x| x != l.bottom).all(|x| {
            atoms
                .iter()
                .filter(|&&a| l.leq[a][x])
                .try_fold(l.bottom, |acc, &a| l.join(acc, a))
                == Some(x)
        });
    let coatomic = is_lattice
        && (0..n).filter(|&x| x != l.top).all(|x| {
            coatoms
                .iter()
                .filter(|&&c| l.leq[x][c])
                .try_fold(l.top, |acc, &c| l.meet(acc, c))
                == Some(x)
        });
    let max_chain_len = hi[l.top];
    let mut rank_counts = vec![0; max_chain_len + 1];
    for e in &l.elements {
        if e.rank < rank_counts.len() {
            rank_counts[e.rank] += 1;
        }
    }
    LatticeReport {
        elements: n,
        is_lattice,
        graded,
        atomic,
        coatomic,
        max_chain_len,
        rank_is_dim_plus_one: l.elements.iter().all(|e| e.rank as i64 == e.dim + 1),
        rank_counts,
        simplex_face_lattice: l.is_simplex_face_lattice(),
    }
}
