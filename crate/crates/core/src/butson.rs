//! Butson-type complex Hadamard matrices `BH(d, q)`.
//!
//! Entries are stored as exponents of `ζ_q = exp(2πi/q)`; the unitary matrix is
//! the stored one scaled by `1/sqrt(d)`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::cyclotomic::CyclotomicRing;
use crate::error::{domain, Error, Result};
use crate::operator::Monomial;
use crate::phases::Phase;

/// Largest order accepted by [`enumerate_bh`].
pub const ENUMERATION_CAP: usize = 6;

/// A `d × d` matrix of `q`-th roots of unity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ButsonMatrix {
    d: usize,
    q: u64,
    exps: Vec<u64>,
}

impl ButsonMatrix {
    /// Entry `[r][c] = ζ_q^{exps[r·d + c]}`; orthogonality is not checked here.
    pub fn from_exponents(d: usize, q: u64, exps: Vec<u64>) -> Result<Self> {
        if d == 0 || q == 0 || exps.len() != d * d {
            return Err(domain!("need d >= 1, q >= 1 and d^2 exponents"));
        }
        Ok(ButsonMatrix { d, q, exps: exps.into_iter().map(|e| e % q).collect() })
    }

    /// Build from rational phases; the complexity is the least common order.
    pub fn from_phases(d: usize, phases: &[Phase]) -> Result<Self> {
        if phases.len() != d * d {
            return Err(domain!("need {} phases", d * d));
        }
        let mut q = 1u64;
        for p in phases {
            let t = p.as_turn().ok_or_else(|| domain!("Butson entries must be rational turns"))?;
            q = q.lcm(&t.den());
        }
        let exps = phases.iter().map(|p| {
            let t = p.as_turn().unwrap();
            t.num() * (q / t.den())
        });
        ButsonMatrix::from_exponents(d, q, exps.collect())
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn complexity(&self) -> u64 {
        self.q
    }

    pub fn exponent(&self, r: usize, c: usize) -> u64 {
        self.exps[r * self.d + c]
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn phase(&self, r: usize, c: usize) -> Phase {
        Phase::rational(self.exponent(r, c) as i128, self.q).unwrap()
    }

    pub fn phases(&self) -> Vec<Phase> {
        (0..self.d * self.d).map(|i| self.phase(i / self.d, i % self.d)).collect()
    }

    /// The same matrix written over `ζ_{q'}` for a multiple `q'` of `q`.
    pub fn with_complexity(&self, q: u64) -> Result<Self> {
        if !q.is_multiple_of(self.q) {
            return Err(domain!("{q} is not a multiple of {}", self.q));
        }
        let f = q / self.q;
        Ok(ButsonMatrix { d: self.d, q, exps: self.exps.iter().map(|e| e * f).collect() })
    }

    /// Exact row-orthogonality test.
    pub fn rows_orthogonal(&self) -> bool {
        let ring = CyclotomicRing::new(self.q).unwrap();
        let d = self.d;
        let mut counts = vec![0i64; self.q as usize];
        for a in 0..d {
            for b in a + 1..d {
                counts.iter_mut().for_each(|c| *c = 0);
                for j in 0..d {
                    let e = (self.exponent(a, j) + self.q - self.exponent(b, j)) % self.q;
                    counts[e as usize] += 1;
                }
                if !ring.vanishes(&counts) {
                    return false;
                }
            }
        }
        true
    }
}

/// Whether `phases` (row-major `d × d`) is a `BH(d, q)` matrix.
pub fn is_butson(d: usize, phases: &[Phase], q: u64) -> bool {
    if q == 0 || phases.len() != d * d {
        return false;
    }
    let in_order = phases.iter().all(|p| p.as_turn().is_some_and(|t| q.is_multiple_of(t.den())));
    if !in_order {
        return false;
    }
    ButsonMatrix::from_phases(d, phases).and_then(|m| m.with_complexity(q)).is_ok_and(|m| m.rows_orthogonal())
}

/// `F_d` with entries `ω^{jk}`.
pub fn fourier(d: usize) -> ButsonMatrix {
    let exps = (0..d * d).map(|i| ((i / d) * (i % d) % d) as u64).collect();
    ButsonMatrix::from_exponents(d, d as u64, exps).unwrap()
}

/// Kronecker product; row `(x, y)` has index `d_b·x + y`.
pub fn tensor_butson(a: &ButsonMatrix, b: &ButsonMatrix) -> ButsonMatrix {
    let q = a.q.lcm(&b.q);
    let (fa, fb) = (q / a.q, q / b.q);
    let d = a.d * b.d;
    let mut exps = vec![0; d * d];
    for r in 0..d {
        for c in 0..d {
            let ea = a.exponent(r / b.d, c / b.d) * fa;
            let eb = b.exponent(r % b.d, c % b.d) * fb;
            exps[r * d + c] = (ea + eb) % q;
        }
    }
    ButsonMatrix { d, q, exps }
}

/// Multiply rows and columns so the first row and column are all ones.
pub fn dephase(m: &ButsonMatrix) -> ButsonMatrix {
    dephase_at(m, 0, 0)
}

fn dephase_at(m: &ButsonMatrix, r: usize, c: usize) -> ButsonMatrix {
    let (d, q) = (m.d, m.q);
    let mut exps = vec![0; d * d];
    for i in 0..d {
        for j in 0..d {
            exps[i * d + j] = (m.exponent(i, j) + 2 * q - m.exponent(i, c) - m.exponent(r, j) + m.exponent(r, c)) % q;
        }
    }
    ButsonMatrix { d, q, exps }
}

/// Left and right monomial factors with `L · M · R` equal to a given matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialPair {
    pub left: Monomial,
    pub right: Monomial,
}

impl MonomialPair {
    /// `left · m · right` (exponents over `m`'s complexity; `None` if the
    /// monomial phases leave that order).
    pub fn apply(&self, m: &ButsonMatrix) -> Option<ButsonMatrix> {
        let d = m.d;
        let mut phases = vec![Phase::ONE; d * d];
        let linv = self.left.inverse();
        for row in 0..d {
            let l = linv.perm()[row];
            for col in 0..d {
                let k = self.right.perm()[col];
                phases[row * d + col] = self.left.phases()[l] * m.phase(l, k) * self.right.phases()[col];
            }
        }
        let b = ButsonMatrix::from_phases(d, &phases).ok()?;
        let q = b.q.lcm(&m.q);
        b.with_complexity(q).ok()
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exponents, pivot row, pivot column, row order and column order of a candidate.
type Candidate = (Vec<u64>, usize, usize, Vec<usize>, Vec<usize>);

/// Canonical representative of the monomial class of `m` together with the
/// factors that produce it: `canon = left · m · right`.
///
/// The representative is the lexicographically least matrix over every
/// pivot `(r, c)`, every order of the non-pivot columns, with the matrix
/// dephased at the pivot and the non-pivot rows sorted.
pub fn canonical_form(m: &ButsonMatrix) -> (ButsonMatrix, MonomialPair) {
    let (d, q) = (m.d, m.q);
    let mut best: Option<Candidate> = None;
    let mut row_buf: Vec<(Vec<u64>, usize)> = Vec::with_capacity(d);
    for r in 0..d {
        for c in 0..d {
            let f = dephase_at(m, r, c);
            let others: Vec<usize> = (0..d).filter(|&j| j != c).collect();
            let mut perm: Vec<usize> = (0..others.len()).collect();
            loop {
                let cols: Vec<usize> = core::iter::once(c).chain(perm.iter().map(|&p| others[p])).collect();
                row_buf.clear();
                for i in (0..d).filter(|&i| i != r) {
                    row_buf.push((cols.iter().map(|&j| f.exps[i * d + j]).collect(), i));
                }
                row_buf.sort();
                let mut flat: Vec<u64> = vec![0; d];
                for (row, _) in &row_buf {
                    flat.extend_from_slice(row);
                }
                if best.as_ref().is_none_or(|b| flat < b.0) {
                    let rows: Vec<usize> = core::iter::once(r).chain(row_buf.iter().map(|x| x.1)).collect();
                    best = Some((flat, r, c, rows, cols));
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
    }
    let (flat, r, c, rows, cols) = best.expect("nonempty matrix");
    // f = Dr · m · Dc, then rows/cols reordered
    let dr: Vec<u64> = (0..d).map(|i| (2 * q + m.exponent(r, c) - m.exponent(i, c)) % q).collect();
    let dc: Vec<u64> = (0..d).map(|j| (q - m.exponent(r, j)) % q).collect();
    let ph = |e: u64| Phase::rational(e as i128, q).unwrap();
    // left[t][rows[t]] = ζ^{dr[rows[t]]}: column a = rows[t] goes to row t
    let mut lperm = vec![0; d];
    for (t, &a) in rows.iter().enumerate() {
        lperm[a] = t;
    }
    let left = Monomial::new(lperm, (0..d).map(|a| ph(dr[a])).collect()).unwrap();
    // right[cols[u]][u] = ζ^{dc[cols[u]]}: column u goes to row cols[u]
    let right = Monomial::new(cols.clone(), cols.iter().map(|&j| ph(dc[j])).collect()).unwrap();
    (ButsonMatrix { d, q, exps: flat }, MonomialPair { left, right })
}

/// Find monomials `L`, `R` with `b = L · a · R`; the witness is verified by replay.
pub fn monomially_equivalent(a: &ButsonMatrix, b: &ButsonMatrix) -> Option<MonomialPair> {
    if a.d != b.d {
        return None;
    }
    let q = a.q.lcm(&b.q);
    let a = a.with_complexity(q).ok()?;
    let b = b.with_complexity(q).ok()?;
    let (ca, pa) = canonical_form(&a);
    let (cb, pb) = canonical_form(&b);
    if ca != cb {
        return None;
    }
    // cb = Lb b Rb = La a Ra  ⇒  b = Lb⁻¹ La a Ra Rb⁻¹
    let pair = MonomialPair { left: pb.left.inverse().compose(&pa.left), right: pa.right.compose(&pb.right.inverse()) };
    let replay = pair.apply(&a)?.with_complexity(q).ok()?;
    (replay == b).then_some(pair)
}

/// Representatives of `BH(d, d)` up to monomial equivalence, in canonical
/// form and sorted.
pub fn enumerate_bh(d: usize) -> Result<Vec<ButsonMatrix>> {
    if d > ENUMERATION_CAP {
        return Err(Error::Unsupported(alloc::format!(
            "Butson enumeration is capped at d = {ENUMERATION_CAP}, got {d}"
        )));
    }
    if d < 1 {
        return Err(domain!("order must be positive"));
    }
    let q = d as u64;
    let ring = CyclotomicRing::new(q)?;
    let vanishes = |row: &[u64]| {
        let mut counts = vec![0i64; d];
        for &e in row {
            counts[e as usize] += 1;
        }
        ring.vanishes(&counts)
    };
    // dephased rows (0, x_1, …) orthogonal to the all-ones first row
    let mut candidates: Vec<Vec<u64>> = Vec::new();
    let total = d.pow(d.saturating_sub(1) as u32);
    for code in 0..total {
        let mut row = vec![0u64; d];
        let mut c = code;
        for slot in row[1..].iter_mut().rev() {
            *slot = (c % d) as u64;
            c /= d;
        }
        if d == 1 || vanishes(&row) {
            candidates.push(row);
        }
    }
    let m = candidates.len();
    let ortho = |a: &[u64], b: &[u64]| {
        let diff: Vec<u64> = a.iter().zip(b).map(|(x, y)| (x + q - y) % q).collect();
        vanishes(&diff)
    };
    let adj: Vec<Vec<bool>> =
        (0..m).map(|i| (0..m).map(|j| i != j && ortho(&candidates[i], &candidates[j])).collect()).collect();
    let mut classes: BTreeSet<ButsonMatrix> = BTreeSet::new();
    let mut clique: Vec<usize> = Vec::new();
    fn extend(start: usize, need: usize, clique: &mut Vec<usize>, adj: &[Vec<bool>], found: &mut dyn FnMut(&[usize])) {
        if clique.len() == need {
            found(clique);
            return;
        }
        for v in start..adj.len() {
            if clique.iter().all(|&u| adj[u][v]) {
                clique.push(v);
                extend(v + 1, need, clique, adj, found);
                clique.pop();
            }
        }
    }
    let mut found = |rows: &[usize]| {
        let mut exps = vec![0u64; d];
        for &r in rows {
            exps.extend_from_slice(&candidates[r]);
        }
        let mat = ButsonMatrix { d, q, exps };
        classes.insert(canonical_form(&mat).0);
    };
    extend(0, d - 1, &mut clique, &adj, &mut found);
    Ok(classes.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_small_orders() {
        assert_eq!(fourier(1).exponents(), &[0]);
        assert_eq!(fourier(2).exponents(), &[0, 0, 0, 1]);
        for d in 1..=12 {
            assert!(is_butson(d, &fourier(d).phases(), d as u64));
        }
    }

    #[test]
    fn products_and_non_examples() {
        let f22 = tensor_butson(&fourier(2), &fourier(2));
        assert!(is_butson(4, &f22.phases(), 4));
        assert_eq!(tensor_butson(&fourier(2), &fourier(3)).order(), 6);
        let one = fourier(1);
        assert_eq!(tensor_butson(&fourier(3), &one), fourier(3));
        assert!(!is_butson(3, &[Phase::ONE; 9], 3));
    }

    #[test]
    fn dephase_fixes_fourier() {
        assert_eq!(dephase(&fourier(4)), fourier(4));
        let d = dephase(&tensor_butson(&fourier(2), &fourier(2)));
        assert_eq!(dephase(&d), d);
    }

    #[test]
    fn monomial_equivalence() {
        let f3 = fourier(3);
        let mut swapped = f3.exps.clone();
        swapped.swap(3, 6);
        swapped.swap(4, 7);
        swapped.swap(5, 8);
        let s = ButsonMatrix::from_exponents(3, 3, swapped).unwrap();
        assert!(monomially_equivalent(&f3, &s).is_some());
        let id = monomially_equivalent(&f3, &f3).unwrap();
        assert_eq!(id.apply(&f3).unwrap(), f3);
        let f22 = tensor_butson(&fourier(2), &fourier(2));
        assert!(monomially_equivalent(&fourier(4), &f22).is_none());
        assert!(monomially_equivalent(&fourier(6), &tensor_butson(&fourier(2), &fourier(3))).is_some());
    }

    #[test]
    fn class_counts() {
        assert_eq!(enumerate_bh(2).unwrap().len(), 1);
        assert_eq!(enumerate_bh(3).unwrap().len(), 1);
        assert_eq!(enumerate_bh(4).unwrap().len(), 2);
        assert_eq!(enumerate_bh(5).unwrap().len(), 1);
        assert!(matches!(enumerate_bh(7), Err(Error::Unsupported(_))));
    }
}
