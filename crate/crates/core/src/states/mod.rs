//! Qudit states: sparse superpositions of computational-basis vectors.
//!
//! States are stored unnormalised; the global factor `1/sqrt(total weight)`
//! is implicit and applied whenever a normalised quantity is computed.

pub(crate) mod construct;
mod density;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

pub use construct::{
    ame5_linear_raw, construct_ame43, construct_ame44, construct_ame5_phased, construct_ame5_prime, construct_ame64,
    construct_ghz, construct_linear, tensor_compose, tensor_compose_sparse,
};
pub use density::{reduced_density, uniformity, DensityMatrix, MAX_DENSITY_DIM};

use crate::error::{domain, Error, Result};
use crate::phases::{ComplexAmp, Phase};

/// A computational-basis label `|i_1, …, i_n⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(symbols: Vec<usize>) -> MultiIndex {
        MultiIndex(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// The symbols at `positions`, in the given order.
    pub fn project(&self, positions: &[usize]) -> MultiIndex {
        MultiIndex(positions.iter().map(|&p| self.0[p]).collect())
    }

    /// Mixed-radix code of the symbols at `positions` (first position most significant).
    pub fn code(&self, positions: &[usize], d: usize) -> usize {
        positions.iter().fold(0, |acc, &p| acc * d + self.0[p])
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(">")
    }
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// First `k`-column subset on which two of the `d^k` rows agree, if any.
/// Callers guarantee `rows.len() == d^k`.
pub(crate) fn repeated_projection(rows: &[MultiIndex], n: usize, d: usize, k: usize) -> Option<Vec<usize>> {
    let mut seen = alloc::vec![false; rows.len()];
    for cols in subsets(n, k) {
        seen.iter_mut().for_each(|s| *s = false);
        for r in rows {
            let c = r.code(&cols, d);
            if seen[c] {
                return Some(cols);
            }
            seen[c] = true;
        }
    }
    None
}

/// A `k`-uniform state of minimal support: `d^k` basis terms forming an
/// orthogonal array of strength `k` and index one, each with a unit phase.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalSupportState {
    n: usize,
    d: usize,
    k: usize,
    rows: Vec<MultiIndex>,
    phases: Vec<Phase>,
}

impl MinimalSupportState {
    /// Build and validate a state from its terms (any order).
    pub fn new(n: usize, d: usize, k: usize, terms: Vec<(MultiIndex, Phase)>) -> Result<Self> {
        if d < 2 || n < 2 {
            return Err(domain!("need n >= 2 and d >= 2, got n={n}, d={d}"));
        }
        if k == 0 || k > n {
            return Err(domain!("uniformity k={k} outside 1..={n}"));
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        for (idx, _) in &terms {
            if idx.len() != n || idx.0.iter().any(|&s| s >= d) {
                return Err(domain!("index {idx} is not a word of length {n} over [{d}]"));
            }
        }
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(domain!("repeated support index"));
        }
        let rows: Vec<MultiIndex> = terms.iter().map(|t| t.0.clone()).collect();
        let expected = d.checked_pow(k as u32).ok_or(Error::Overflow("d^k"))?;
        if rows.len() != expected {
            return Err(Error::Construction(alloc::format!(
                "support has {} terms, minimal support needs d^k = {expected}",
                rows.len()
            )));
        }
        if let Some(cols) = repeated_projection(&rows, n, d, k) {
            return Err(Error::Construction(alloc::format!(
                "support is not an index-unity orthogonal array: columns {cols:?} repeat a tuple"
            )));
        }
        let phases = terms.into_iter().map(|t| t.1).collect();
        Ok(MinimalSupportState { n, d, k, rows, phases })
    }

    /// Re-validate a sparse state as minimal support, inferring `k` from the
    /// term count. All amplitudes must share one modulus.
    pub fn try_from_sparse(s: &SparseState, tol: f64) -> Result<Self> {
        let count = s.support_count();
        let mut k = 0;
        let mut p = 1usize;
        while p < count {
            p = p.checked_mul(s.d).ok_or(Error::Overflow("d^k"))?;
            k += 1;
        }
        if p != count || k == 0 {
            return Err(Error::Construction(alloc::format!("{count} terms is not a power of d = {}", s.d)));
        }
        let mut terms = Vec::with_capacity(count);
        let mut weight: Option<f64> = None;
        let mut exact_weight: Option<u64> = None;
        for (idx, amp) in &s.terms {
            let phase = match amp {
                ComplexAmp::Exact { weight: w, phase } => {
                    if *exact_weight.get_or_insert(*w) != *w {
                        return Err(Error::Construction("amplitudes differ in modulus".into()));
                    }
                    *phase
                }
                ComplexAmp::Float(c) => {
                    let w = c.norm_sqr();
                    let w0 = *weight.get_or_insert(w);
                    if (w - w0).abs() > tol * w0.max(1.0) {
                        return Err(Error::Construction("amplitudes differ in modulus".into()));
                    }
                    Phase::from_angle(c.arg())
                }
            };
            terms.push((idx.clone(), phase));
        }
        if exact_weight.is_some() && weight.is_some() {
            return Err(Error::Construction("mixed exact and float amplitudes".into()));
        }
        MinimalSupportState::new(s.n, s.d, k, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of support terms, `d^k`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Support rows in lexicographic order.
    pub fn rows(&self) -> &[MultiIndex] {
        &self.rows
    }

    /// Phases parallel to [`Self::rows`].
    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Phase)> {
        self.rows.iter().zip(&self.phases)
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.rows.binary_search(idx).ok()
    }

    pub fn phase_of(&self, idx: &MultiIndex) -> Option<Phase> {
        self.position(idx).map(|i| self.phases[i])
    }

    /// Whether every phase is a rational turn.
    pub fn is_exact(&self) -> bool {
        self.phases.iter().all(Phase::is_exact)
    }

    /// Same support, phases replaced where assigned.
    pub fn with_phases<'a, I>(&self, assignment: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a MultiIndex, Phase)>,
    {
        let mut out = self.clone();
        for (idx, ph) in assignment {
            let pos = self.position(idx).ok_or_else(|| domain!("{idx} is not in the support"))?;
            out.phases[pos] = ph;
        }
        Ok(out)
    }

    /// The same support with all phases set to one.
    pub fn unit_phases(&self) -> Self {
        let mut out = self.clone();
        out.phases.iter_mut().for_each(|p| *p = Phase::ONE);
        out
    }

    pub fn to_sparse(&self) -> SparseState {
        SparseState {
            n: self.n,
            d: self.d,
            terms: self.terms().map(|(i, p)| (i.clone(), ComplexAmp::unit(*p))).collect(),
        }
    }
}

/// A superposition stored as a map from basis labels to nonzero amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    n: usize,
    d: usize,
    terms: BTreeMap<MultiIndex, ComplexAmp>,
}

impl SparseState {
    /// Build a state, dropping zero amplitudes.
    pub fn new<I>(n: usize, d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, ComplexAmp)>,
    {
        if n == 0 || d == 0 {
            return Err(domain!("need n >= 1 and d >= 1"));
        }
        let mut map = BTreeMap::new();
        for (idx, amp) in terms {
            if idx.len() != n || idx.0.iter().any(|&s| s >= d) {
                return Err(domain!("index {idx} is not a word of length {n} over [{d}]"));
            }
            if amp.is_zero() {
                continue;
            }
            if map.insert(idx.clone(), amp).is_some() {
                return Err(domain!("repeated index {idx}"));
            }
        }
        if map.is_empty() {
            return Err(domain!("state has no nonzero amplitude"));
        }
        Ok(SparseState { n, d, terms: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ComplexAmp> {
        &self.terms
    }

    /// Number of nonzero computational-basis terms.
    pub fn support_count(&self) -> usize {
        self.terms.len()
    }

    /// Whether the support has exactly `d^k` terms.
    pub fn is_minimal_support(&self, k: usize) -> bool {
        self.d.checked_pow(k as u32) == Some(self.terms.len())
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.values().map(ComplexAmp::weight_f64).sum()
    }

    /// Exact amplitudes with rational phases and a common weight.
    pub fn is_uniform_exact(&self) -> bool {
        let mut w0 = None;
        self.terms.values().all(|a| match a {
            ComplexAmp::Exact { weight, phase } => phase.is_exact() && *w0.get_or_insert(*weight) == *weight,
            ComplexAmp::Float(_) => false,
        })
    }
}

/// The phase `g` with `a = g·b` (both read as normalised states), if any.
///
/// The phase is taken relative to the lexicographically first term.
pub fn states_equal_up_to_global_phase(a: &SparseState, b: &SparseState, tol: f64) -> Option<Phase> {
    if a.n != b.n || a.d != b.d || a.terms.len() != b.terms.len() {
        return None;
    }
    if a.terms.keys().ne(b.terms.keys()) {
        return None;
    }
    let exact = a.is_uniform_exact() && b.is_uniform_exact();
    if exact {
        let mut g = None;
        for (pa, pb) in a.terms.values().zip(b.terms.values()) {
            let r = pa.exact_phase()? / pb.exact_phase()?;
            if *g.get_or_insert(r) != r {
                return None;
            }
        }
        return g;
    }
    let (wa, wb) = (libm::sqrt(a.total_weight()), libm::sqrt(b.total_weight()));
    let (first_a, first_b) = (a.terms.values().next()?, b.terms.values().next()?);
    let ca = first_a.to_complex() / wa;
    let cb = first_b.to_complex() / wb;
    if cb.norm() == 0.0 {
        return None;
    }
    let g = (ca / cb) / (ca / cb).norm();
    for (pa, pb) in a.terms.values().zip(b.terms.values()) {
        if (pa.to_complex() / wa - g * pb.to_complex() / wb).norm() > tol {
            return None;
        }
    }
    Some(Phase::from_angle(g.arg()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), [Vec::<usize>::new()]);
        assert_eq!(subsets(3, 3), [alloc::vec![0, 1, 2]]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn global_phase_detection() {
        let s = construct_ame43().to_sparse();
        assert_eq!(states_equal_up_to_global_phase(&s, &s, 1e-10), Some(Phase::ONE));
        let half = Phase::rational(1, 2).unwrap();
        let neg = SparseState::new(
            4,
            3,
            s.terms().iter().map(|(i, a)| (i.clone(), ComplexAmp::unit(a.exact_phase().unwrap() * half))),
        )
        .unwrap();
        assert_eq!(states_equal_up_to_global_phase(&neg, &s, 1e-10), Some(half));
    }

    #[test]
    fn rejects_non_oa_support() {
        let terms = (0..3).map(|i| (MultiIndex(alloc::vec![i, 0, i]), Phase::ONE)).collect();
        assert!(matches!(MinimalSupportState::new(3, 3, 1, terms), Err(Error::Construction(_))));
    }
}
