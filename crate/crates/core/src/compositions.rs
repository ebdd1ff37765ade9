//! Integer compositions and the refinement order.
//!
//! A composition `u = (u_1, ..., u_l)` of `d` is identified with its set of
//! partial sums `{u_1, u_1 + u_2, ..., d}`. Refinement `v <= u` (merging
//! adjacent parts of `u` yields `v`) is inclusion of partial-sum sets, so the
//! join is the union and the meet the intersection of those sets.
//!
//! Compositions order (`Ord`) lexicographically on their parts, which is the
//! same as lexicographic order on the sorted partial sums. Every listing in
//! this crate uses that order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered tuple of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Composition {
    parts: Vec<usize>,
}

/// Strictly increasing partial sums of a composition; the last entry is `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialSumSet {
    sums: Vec<usize>,
}

impl PartialSumSet {
    pub fn new(sums: Vec<usize>) -> Result<Self> {
        if sums.is_empty() {
            return Err(Error::InvalidComposition("empty partial-sum set".into()));
        }
        if sums[0] == 0 || sums.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidComposition(format!(
                "partial sums must be positive and strictly increasing: {sums:?}"
            )));
        }
        Ok(Self { sums })
    }

    pub fn sums(&self) -> &[usize] {
        &self.sums
    }

    pub fn degree(&self) -> usize {
        *self.sums.last().expect("nonempty by construction")
    }

    pub fn is_subset(&self, other: &PartialSumSet) -> bool {
        let mut it = other.sums.iter().peekable();
        'outer: for &a in &self.sums {
            while let Some(&&b) = it.peek() {
                it.next();
                if a == b {
                    continue 'outer;
                }
                if b > a {
                    return false;
                }
            }
            return false;
        }
        true
    }
}

impl Composition {
    /// Builds a composition, rejecting empty tuples and zero parts.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidComposition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidComposition(format!("zero part in {parts:?}")));
        }
        Ok(Self { parts })
    }

    /// `(1, 1, ..., 1)`, the top of the lattice of compositions of `d`.
    pub fn top(d: usize) -> Result<Self> {
        Self::new(vec![1; d])
    }

    /// `(d)`, the bottom of the lattice.
    pub fn bottom(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of parts, `l(u)`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The integer being composed, the sum of the parts.
    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn partial_sums(&self) -> PartialSumSet {
        let sums = self
            .parts
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        PartialSumSet { sums }
    }

    pub fn from_partial_sums(set: &PartialSumSet) -> Self {
        let mut prev = 0;
        let parts = set
            .sums
            .iter()
            .map(|&m| {
                let p = m - prev;
                prev = m;
                p
            })
            .collect();
        Self { parts }
    }

    fn check_same_degree(&self, other: &Composition) -> Result<()> {
        let (a, b) = (self.degree(), other.degree());
        if a != b {
            return Err(Error::MismatchedDegree(a, b));
        }
        Ok(())
    }

    /// Refinement order: `self <= other` iff `self` is obtained from `other`
    /// by merging adjacent parts.
    pub fn leq(&self, other: &Composition) -> Result<bool> {
        self.check_same_degree(other)?;
        Ok(self.partial_sums().is_subset(&other.partial_sums()))
    }

    /// Least common refinement.
    pub fn join(&self, other: &Composition) -> Result<Composition> {
        self.check_same_degree(other)?;
        let a = self.partial_sums();
        let b = other.partial_sums();
        let merged: BTreeSet<usize> = a.sums.iter().chain(b.sums.iter()).copied().collect();
        Ok(Self::from_partial_sums(&PartialSumSet {
            sums: merged.into_iter().collect(),
        }))
    }

    /// Finest common coarsening.
    pub fn meet(&self, other: &Composition) -> Result<Composition> {
        self.check_same_degree(other)?;
        let a = self.partial_sums();
        let b: BTreeSet<usize> = other.partial_sums().sums.into_iter().collect();
        let sums = a.sums.into_iter().filter(|m| b.contains(m)).collect();
        Ok(Self::from_partial_sums(&PartialSumSet { sums }))
    }

    /// Elements covering `self`: split exactly one part into two.
    pub fn covers(&self) -> Vec<Composition> {
        let mut out = Vec::new();
        for (i, &p) in self.parts.iter().enumerate() {
            for a in 1..p {
                let mut parts = Vec::with_capacity(self.parts.len() + 1);
                parts.extend_from_slice(&self.parts[..i]);
                parts.push(a);
                parts.push(p - a);
                parts.extend_from_slice(&self.parts[i + 1..]);
                out.push(Composition { parts });
            }
        }
        out.sort();
        out
    }

    /// Elements covered by `self`: merge one pair of adjacent parts.
    pub fn lower_covers(&self) -> Vec<Composition> {
        let mut out: Vec<Composition> = (0..self.parts.len().saturating_sub(1))
            .map(|i| {
                let mut parts = self.parts.clone();
                let b = parts.remove(i + 1);
                parts[i] += b;
                Composition { parts }
            })
            .collect();
        out.sort();
        out
    }

    /// All `w <= self` (the down-set), in canonical order.
    pub fn down_set(&self) -> Vec<Composition> {
        let sums = self.partial_sums().sums;
        let inner = &sums[..sums.len() - 1];
        let d = self.degree();
        let mut out: Vec<Composition> = (0u64..(1u64 << inner.len()))
            .map(|mask| {
                let mut kept: Vec<usize> = inner
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &m)| m)
                    .collect();
                kept.push(d);
                Self::from_partial_sums(&PartialSumSet { sums: kept })
            })
            .collect();
        out.sort();
        out
    }

    /// Dash-separated label, e.g. `2-1-2`; safe inside CSV fields and file names.
    pub fn label(&self) -> String {
        self.parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TryFrom<Vec<usize>> for Composition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Composition> for Vec<usize> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

/// Accepts `1,2,2`, `(1,2,2)`, `[1,2,2]` and `1-2-2`.
impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let parts = trimmed
            .split([',', '-', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidComposition(format!("bad part {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

/// All compositions of `d` with length in `[min_len, max_len]`, in canonical
/// order. There are `binomial(d-1, l-1)` of length `l`.
pub fn enumerate(d: usize, min_len: Option<usize>, max_len: Option<usize>) -> Result<Vec<Composition>> {
    if d == 0 {
        return Err(Error::InvalidRange("d must be positive".into()));
    }
    if d > 40 {
        return Err(Error::InvalidRange(format!("d = {d} is too large to enumerate")));
    }
    let lo = min_len.unwrap_or(1);
    let hi = max_len.unwrap_or(d);
    if lo < 1 || lo > hi || hi > d {
        return Err(Error::InvalidRange(format!(
            "length range [{lo}, {hi}] is not within [1, {d}]"
        )));
    }
    let inner = d - 1;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << inner) {
        let len = mask.count_ones() as usize + 1;
        if len < lo || len > hi {
            continue;
        }
        let mut sums: Vec<usize> = (0..inner).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        sums.push(d);
        out.push(Composition::from_partial_sums(&PartialSumSet { sums }));
    }
    out.sort();
    Ok(out)
}

/// `{w : exists v in set with v <= w}` over the compositions of `d`.
pub fn upward_closure(set: &BTreeSet<Composition>, d: usize) -> Result<BTreeSet<Composition>> {
    let mut out = BTreeSet::new();
    for v in set {
        if v.degree() != d {
            return Err(Error::MismatchedDegree(v.degree(), d));
        }
        let present: BTreeSet<usize> = v.partial_sums().sums.into_iter().collect();
        let missing: Vec<usize> = (1..d).filter(|m| !present.contains(m)).collect();
        if missing.len() > 40 {
            return Err(Error::InvalidRange("upward closure too large".into()));
        }
        for mask in 0u64..(1u64 << missing.len()) {
            let mut sums: BTreeSet<usize> = present.clone();
            sums.extend(
                missing
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &m)| m),
            );
            out.insert(Composition::from_partial_sums(&PartialSumSet {
                sums: sums.into_iter().collect(),
            }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(parts: &[usize]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn leq_examples() {
        assert!(c(&[2, 3]).leq(&c(&[1, 1, 3])).unwrap());
        assert!(c(&[2, 3]).leq(&c(&[2, 3])).unwrap());
        assert!(!c(&[1, 4]).leq(&c(&[2, 1, 1, 1])).unwrap());
        assert_eq!(c(&[2, 3]).leq(&c(&[1, 1])), Err(Error::MismatchedDegree(5, 2)));
    }

    #[test]
    fn join_examples() {
        assert_eq!(c(&[1, 4]).join(&c(&[2, 3])).unwrap(), c(&[1, 1, 3]));
        assert_eq!(c(&[2, 1, 2]).join(&c(&[2, 1, 2])).unwrap(), c(&[2, 1, 2]));
        assert_eq!(c(&[1, 1, 2]).join(&c(&[2, 2])).unwrap(), c(&[1, 1, 2]));
        assert!(c(&[1]).join(&c(&[2])).is_err());
    }

    #[test]
    fn meet_examples() {
        assert_eq!(c(&[1, 3]).meet(&c(&[3, 1])).unwrap(), c(&[4]));
        for u in enumerate(5, None, None).unwrap() {
            assert_eq!(c(&[1, 1, 1, 1, 1]).meet(&u).unwrap(), u);
        }
        assert_eq!(c(&[1, 1, 3]).meet(&c(&[2, 3])).unwrap(), c(&[2, 3]));
        assert!(c(&[1, 3]).meet(&c(&[5])).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate(5, None, None).unwrap().len(), 16);
        assert_eq!(enumerate(1, None, None).unwrap(), vec![c(&[1])]);
        assert_eq!(
            enumerate(5, Some(2), Some(2)).unwrap(),
            vec![c(&[1, 4]), c(&[2, 3]), c(&[3, 2]), c(&[4, 1])]
        );
        assert!(enumerate(0, None, None).is_err());
        assert!(enumerate(5, Some(3), Some(2)).is_err());
        assert!(enumerate(5, Some(0), None).is_err());
        assert!(enumerate(5, None, Some(6)).is_err());
    }

    #[test]
    fn enumeration_order_is_lexicographic_on_partial_sums() {
        let all = enumerate(6, None, None).unwrap();
        let sums: Vec<Vec<usize>> = all.iter().map(|u| u.partial_sums().sums().to_vec()).collect();
        let mut sorted = sums.clone();
        sorted.sort();
        assert_eq!(sums, sorted);
    }

    #[test]
    fn covers_examples() {
        assert_eq!(c(&[2, 3]).covers(), vec![c(&[1, 1, 3]), c(&[2, 1, 2]), c(&[2, 2, 1])]);
        assert!(c(&[1, 1, 1, 1]).covers().is_empty());
        assert_eq!(c(&[5]).covers(), vec![c(&[1, 4]), c(&[2, 3]), c(&[3, 2]), c(&[4, 1])]);
    }

    #[test]
    fn covers_match_brute_force() {
        for d in 1..=7 {
            let all = enumerate(d, None, None).unwrap();
            for u in &all {
                let brute: Vec<Composition> = all
                    .iter()
                    .filter(|w| u.leq(w).unwrap() && *w != u)
                    .filter(|w| {
                        !all.iter().any(|z| {
                            z != u && z != *w && u.leq(z).unwrap() && z.leq(w).unwrap()
                        })
                    })
                    .cloned()
                    .collect();
                assert_eq!(u.covers(), brute, "covers of {u}");
                for w in u.covers() {
                    assert!(w.lower_covers().contains(u));
                }
            }
        }
    }

    #[test]
    fn upward_closure_examples() {
        let top: BTreeSet<_> = [c(&[1, 1, 1, 1, 1])].into();
        assert_eq!(upward_closure(&top, 5).unwrap(), top);
        let from: BTreeSet<_> = [c(&[1, 1, 3])].into();
        let expect: BTreeSet<_> =
            [c(&[1, 1, 3]), c(&[1, 1, 1, 2]), c(&[1, 1, 2, 1]), c(&[1, 1, 1, 1, 1])].into();
        assert_eq!(upward_closure(&from, 5).unwrap(), expect);
        assert!(upward_closure(&BTreeSet::new(), 5).unwrap().is_empty());
        assert!(upward_closure(&from, 4).is_err());
    }

    #[test]
    fn upward_closure_matches_scan() {
        let all = enumerate(6, None, None).unwrap();
        for (i, a) in all.iter().enumerate() {
            let b = &all[(i * 7 + 3) % all.len()];
            let set: BTreeSet<_> = [a.clone(), b.clone()].into();
            let scan: BTreeSet<_> = all
                .iter()
                .filter(|w| set.iter().any(|v| v.leq(w).unwrap()))
                .cloned()
                .collect();
            assert_eq!(upward_closure(&set, 6).unwrap(), scan);
        }
    }

    #[test]
    fn down_set_matches_scan() {
        let all = enumerate(6, None, None).unwrap();
        for u in &all {
            let scan: Vec<_> = all.iter().filter(|w| w.leq(u).unwrap()).cloned().collect();
            assert_eq!(u.down_set(), scan);
        }
    }

    #[test]
    fn bottom_and_top() {
        for d in 1..=8 {
            let bot = Composition::bottom(d).unwrap();
            let top = Composition::top(d).unwrap();
            for u in enumerate(d, None, None).unwrap() {
                assert!(bot.leq(&u).unwrap());
                assert!(u.leq(&top).unwrap());
            }
        }
    }

    #[test]
    fn partial_sum_round_trip_exhaustive() {
        for d in 1..=10 {
            for u in enumerate(d, None, None).unwrap() {
                let ps = u.partial_sums();
                assert_eq!(ps.sums().len(), u.len());
                assert_eq!(ps.degree(), d);
                assert_eq!(Composition::from_partial_sums(&ps), u);
                let again = PartialSumSet::new(ps.sums().to_vec()).unwrap();
                assert_eq!(again, ps);
            }
        }
        assert!(PartialSumSet::new(vec![2, 2, 5]).is_err());
        assert!(PartialSumSet::new(vec![0, 5]).is_err());
    }

    #[test]
    fn rank_counts_are_binomial() {
        for d in 1..=10 {
            let all = enumerate(d, None, None).unwrap();
            assert_eq!(all.len(), 1 << (d - 1));
            for l in 1..=d {
                let n = all.iter().filter(|u| u.len() == l).count();
                assert_eq!(n, binomial(d - 1, l - 1));
                assert_eq!(enumerate(d, Some(l), Some(l)).unwrap().len(), n);
            }
        }
    }

    #[test]
    fn joins_of_length_two_compositions() {
        for d in 2..=8 {
            let atoms = enumerate(d, Some(2), Some(2)).unwrap();
            assert_eq!(atoms.len(), d - 1);
            for mask in 1u32..(1 << atoms.len()) {
                let chosen: Vec<&Composition> =
                    atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a).collect();
                let joined = chosen
                    .iter()
                    .skip(1)
                    .fold(chosen[0].clone(), |acc, a| acc.join(a).unwrap());
                assert_eq!(joined.len(), chosen.len() + 1);
            }
        }
    }

    #[test]
    fn parsing_and_json() {
        assert_eq!("1,2,2".parse::<Composition>().unwrap(), c(&[1, 2, 2]));
        assert_eq!("(2,1,2)".parse::<Composition>().unwrap(), c(&[2, 1, 2]));
        assert_eq!("2-1-2".parse::<Composition>().unwrap(), c(&[2, 1, 2]));
        assert!("1,0".parse::<Composition>().is_err());
        assert!("".parse::<Composition>().is_err());
        assert_eq!(serde_json::to_string(&c(&[2, 1, 2])).unwrap(), "[2,1,2]");
        assert_eq!(serde_json::from_str::<Composition>("[1,4]").unwrap(), c(&[1, 4]));
        assert!(serde_json::from_str::<Composition>("[1,0]").is_err());
        assert_eq!(c(&[2, 1, 2]).to_string(), "(2,1,2)");
        assert_eq!(c(&[2, 1, 2]).label(), "2-1-2");
    }

    fn composition_of(d: usize) -> impl Strategy<Value = Composition> {
        proptest::collection::vec(any::<bool>(), d - 1).prop_map(move |bits| {
            let mut sums: Vec<usize> =
                bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect();
            sums.push(d);
            Composition::from_partial_sums(&PartialSumSet::new(sums).unwrap())
        })
    }

    fn triple() -> impl Strategy<Value = (Composition, Composition, Composition)> {
        (2usize..=10).prop_flat_map(|d| (composition_of(d), composition_of(d), composition_of(d)))
    }

    proptest! {
        #[test]
        fn lattice_axioms((u, v, w) in triple()) {
            prop_assert_eq!(u.join(&v).unwrap(), v.join(&u).unwrap());
            prop_assert_eq!(u.meet(&v).unwrap(), v.meet(&u).unwrap());
            prop_assert_eq!(u.join(&v).unwrap().join(&w).unwrap(), u.join(&v.join(&w).unwrap()).unwrap());
            prop_assert_eq!(u.meet(&v).unwrap().meet(&w).unwrap(), u.meet(&v.meet(&w).unwrap()).unwrap());
            prop_assert_eq!(u.join(&u).unwrap(), u.clone());
            prop_assert_eq!(u.meet(&u).unwrap(), u.clone());
            prop_assert_eq!(u.meet(&u.join(&v).unwrap()).unwrap(), u.clone());
            prop_assert_eq!(u.join(&u.meet(&v).unwrap()).unwrap(), u.clone());
            let le = u.leq(&v).unwrap();
            prop_assert_eq!(le, u.join(&v).unwrap() == v);
            prop_assert_eq!(le, u.meet(&v).unwrap() == u);
        }

        #[test]
        fn join_is_least_upper_bound((u, v, w) in triple()) {
            let j = u.join(&v).unwrap();
            prop_assert!(u.leq(&j).unwrap() && v.leq(&j).unwrap());
            if u.leq(&w).unwrap() && v.leq(&w).unwrap() {
                prop_assert!(j.leq(&w).unwrap());
            }
            let m = u.meet(&v).unwrap();
            prop_assert!(m.leq(&u).unwrap() && m.leq(&v).unwrap());
            if w.leq(&u).unwrap() && w.leq(&v).unwrap() {
                prop_assert!(w.leq(&m).unwrap());
            }
        }
    }
}
