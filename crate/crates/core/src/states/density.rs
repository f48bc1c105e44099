use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{subsets, MultiIndex, SparseState};
use crate::cyclotomic::{CyclotomicRing, RootSum};
use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::phases::{common_order, ComplexAmp};

/// Largest reduced dimension `d^{|keep|}` accepted.
pub const MAX_DENSITY_DIM: usize = 1 << 20;

#[derive(Clone, Debug)]
enum Entries {
    /// Entry `(r, c)` equals `sum / denom` with `sum` a reduced root sum.
    Exact {
        order: u64,
        denom: u64,
        map: BTreeMap<(usize, usize), RootSum>,
    },
    Float(BTreeMap<(usize, usize), Complex64>),
}

/// A reduced density matrix over the kept parties.
///
/// Basis label `r` is the mixed-radix code of the kept symbols in the order
/// of `keep`. Only nonzero entries are stored.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    d: usize,
    keep: Vec<usize>,
    dim: usize,
    entries: Entries,
}

/// `ρ_keep = tr_rest |ψ⟩⟨ψ|`, normalised.
///
/// The result is exact when every amplitude is exact with a rational phase
/// and all weights agree.
pub fn reduced_density(s: &SparseState, keep: &[usize]) -> Result<DensityMatrix> {
    let n = s.n();
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || keep.iter().any(|&p| p >= n) {
        return Err(domain!("keep must list distinct positions below {n}"));
    }
    if keep.is_empty() || keep.len() == n {
        return Err(domain!("keep must be a nonempty strict subset of the parties"));
    }
    let dim = s
        .d()
        .checked_pow(keep.len() as u32)
        .filter(|&x| x <= MAX_DENSITY_DIM)
        .ok_or_else(|| Error::Unsupported(alloc::format!("reduced dimension exceeds {MAX_DENSITY_DIM}")))?;
    let rest: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let mut groups: BTreeMap<MultiIndex, Vec<(usize, &ComplexAmp)>> = BTreeMap::new();
    for (idx, amp) in s.terms() {
        groups.entry(idx.project(&rest)).or_default().push((idx.code(keep, s.d()), amp));
    }
    let order = if s.is_uniform_exact() {
        common_order(s.terms().values().filter_map(|a| match a {
            ComplexAmp::Exact { phase, .. } => Some(phase),
            ComplexAmp::Float(_) => None,
        }))
    } else {
        None
    };
    let entries = match order {
        Some(order) => {
            let mut map: BTreeMap<(usize, usize), RootSum> = BTreeMap::new();
            let exponent = |a: &ComplexAmp| -> i64 {
                let t = a.exact_phase().and_then(|p| p.as_turn()).unwrap();
                (t.num() * (order / t.den())) as i64
            };
            for members in groups.values() {
                for &(r, a) in members {
                    for &(c, b) in members {
                        map.entry((r, c))
                            .or_insert_with(|| RootSum::zero(order))
                            .add_root(exponent(a) - exponent(b), 1);
                    }
                }
            }
            let ring = CyclotomicRing::new(order)?;
            map.retain(|_, v| !v.is_zero(&ring));
            Entries::Exact { order, denom: s.support_count() as u64, map }
        }
        None => {
            let total = s.total_weight();
            let mut map: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for members in groups.values() {
                for &(r, a) in members {
                    for &(c, b) in members {
                        *map.entry((r, c)).or_default() += a.to_complex() * b.to_complex().conj() / total;
                    }
                }
            }
            Entries::Float(map)
        }
    };
    Ok(DensityMatrix { d: s.d(), keep: keep.to_vec(), dim, entries })
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact { .. })
    }

    /// Number of stored (nonzero) entries.
    pub fn nonzero_count(&self) -> usize {
        match &self.entries {
            Entries::Exact { map, .. } => map.len(),
            Entries::Float(map) => map.len(),
        }
    }

    /// Positions `(r, c)` of stored entries, row-major.
    pub fn nonzero_positions(&self) -> Vec<(usize, usize)> {
        match &self.entries {
            Entries::Exact { map, .. } => map.keys().copied().collect(),
            Entries::Float(map) => map.keys().copied().collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        match &self.entries {
            Entries::Exact { denom, map, .. } => {
                map.get(&(r, c)).map_or(Complex64::new(0.0, 0.0), |v| v.to_complex() / *denom as f64)
            }
            Entries::Float(map) => map.get(&(r, c)).copied().unwrap_or_default(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.nonzero_positions().into_iter().all(|(r, c)| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol)
    }

    /// Dense row-major copy; refused above `4096` rows.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.dim > 4096 {
            return Err(Error::Unsupported("dense copy limited to dimension 4096".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for (r, c) in self.nonzero_positions() {
            out[r * self.dim + c] = self.get(r, c);
        }
        Ok(out)
    }

    /// Eigenvalues (ascending) by Jacobi rotation; refused above dimension 512.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim > 512 {
            return Err(Error::Unsupported("eigenvalues limited to dimension 512".into()));
        }
        Ok(linalg::hermitian_eigenvalues(self.dim, &self.to_dense()?))
    }

    /// Whether the matrix equals `Id / dim`.
    pub fn is_maximally_mixed(&self, tol: f64) -> bool {
        match &self.entries {
            Entries::Exact { order, denom, map } => {
                if map.len() != self.dim {
                    return false;
                }
                let ring = CyclotomicRing::new(*order).unwrap();
                map.iter().all(|(&(r, c), v)| {
                    if r != c {
                        return false;
                    }
                    let mut t = v.scaled(self.dim as i64);
                    t.add_root(0, -(*denom as i64));
                    t.is_zero(&ring)
                })
            }
            Entries::Float(map) => {
                let target = 1.0 / self.dim as f64;
                (0..self.dim).all(|i| (self.get(i, i) - Complex64::new(target, 0.0)).norm() <= tol)
                    && map.iter().all(|(&(r, c), v)| r == c || v.norm() <= tol)
            }
        }
    }

    /// Entrywise equality, exact when both sides are exact.
    pub fn equals(&self, other: &DensityMatrix, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        if let (Entries::Exact { order: oa, denom: da, map: ma }, Entries::Exact { order: ob, denom: db, map: mb }) =
            (&self.entries, &other.entries)
        {
            if ma.len() != mb.len() || ma.keys().ne(mb.keys()) {
                return false;
            }
            let order = num_integer::lcm(*oa, *ob);
            let ring = CyclotomicRing::new(order).unwrap();
            return ma.values().zip(mb.values()).all(|(a, b)| {
                let mut t = a.embedded(order).scaled(*db as i64);
                t.sub_assign(&b.embedded(order).scaled(*da as i64));
                t.is_zero(&ring)
            });
        }
        let mut keys = self.nonzero_positions();
        keys.extend(other.nonzero_positions());
        keys.into_iter().all(|(r, c)| (self.get(r, c) - other.get(r, c)).norm() <= tol)
    }
}

/// Largest `k` such that every `k`-party reduction is maximally mixed.
pub fn uniformity(s: &SparseState, tol: f64) -> Result<usize> {
    let mut k = 0;
    for size in 1..=s.n() / 2 {
        for keep in subsets(s.n(), size) {
            if !reduced_density(s, &keep)?.is_maximally_mixed(tol) {
                return Ok(k);
            }
        }
        k = size;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::Phase;
    use crate::states::{construct_ame43, construct_ghz};

    #[test]
    fn ghz_two_body_marginal() {
        let g = construct_ghz(3, 2).unwrap().to_sparse();
        let rho = reduced_density(&g, &[0, 1]).unwrap();
        assert!(rho.is_exact());
        assert_eq!(rho.nonzero_positions(), [(0, 0), (3, 3)]);
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-15);
        assert_eq!(uniformity(&g, 1e-10).unwrap(), 1);
    }

    #[test]
    fn ame43_is_two_uniform() {
        let s = construct_ame43().to_sparse();
        assert!(reduced_density(&s, &[0, 1]).unwrap().is_maximally_mixed(1e-10));
        assert_eq!(uniformity(&s, 1e-10).unwrap(), 2);
    }

    #[test]
    fn product_state_has_zero_uniformity() {
        let s = SparseState::new(4, 2, [(MultiIndex(vec![0; 4]), ComplexAmp::unit(Phase::ONE))]).unwrap();
        assert_eq!(uniformity(&s, 1e-10).unwrap(), 0);
    }

    #[test]
    fn rejects_bad_keep() {
        let s = construct_ame43().to_sparse();
        assert!(reduced_density(&s, &[]).is_err());
        assert!(reduced_density(&s, &[0, 1, 2, 3]).is_err());
        assert!(reduced_density(&s, &[1, 1]).is_err());
    }
}
