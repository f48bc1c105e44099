//! Local operators `ω (U_1 ⊗ … ⊗ U_n)` and their action on sparse states.
//!
//! Matrices act on columns: `U|a⟩ = Σ_b U[b][a] |b⟩`, with `U[b][a]` stored
//! row-major at `b·d + a`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_integer::Integer;

use crate::butson::ButsonMatrix;
use crate::cyclotomic::{CyclotomicRing, RootSum};
use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::phases::{ComplexAmp, Phase};
use crate::states::{states_equal_up_to_global_phase, MinimalSupportState, MultiIndex, SparseState};

/// The matrix sending `|a⟩` to `phases[a]·|perm[a]⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    perm: Vec<usize>,
    phases: Vec<Phase>,
}

impl Monomial {
    pub fn new(perm: Vec<usize>, phases: Vec<Phase>) -> Result<Monomial> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || core::mem::replace(&mut seen[p], true) {
                return Err(domain!("{perm:?} is not a permutation"));
            }
        }
        if phases.len() != d {
            return Err(domain!("{} phases for dimension {d}", phases.len()));
        }
        Ok(Monomial { perm, phases })
    }

    pub fn identity(d: usize) -> Monomial {
        Monomial { perm: (0..d).collect(), phases: vec![Phase::ONE; d] }
    }

    pub fn permutation(perm: Vec<usize>) -> Result<Monomial> {
        let d = perm.len();
        Monomial::new(perm, vec![Phase::ONE; d])
    }

    pub fn diagonal(phases: Vec<Phase>) -> Monomial {
        Monomial { perm: (0..phases.len()).collect(), phases }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn is_permutation(&self) -> bool {
        self.phases.iter().all(Phase::is_one)
    }

    pub fn is_diagonal(&self) -> bool {
        self.perm.iter().enumerate().all(|(a, &b)| a == b)
    }

    /// The matrix product `self · other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let perm = other.perm.iter().map(|&b| self.perm[b]).collect();
        let phases = other.phases.iter().zip(&other.perm).map(|(&p, &b)| p * self.phases[b]).collect();
        Monomial { perm, phases }
    }

    pub fn inverse(&self) -> Monomial {
        let d = self.dim();
        let mut perm = vec![0; d];
        let mut phases = vec![Phase::ONE; d];
        for a in 0..d {
            perm[self.perm[a]] = a;
            phases[self.perm[a]] = self.phases[a].inv();
        }
        Monomial { perm, phases }
    }

    /// Entry `[row][col]`.
    pub fn cell(&self, row: usize, col: usize) -> Option<Phase> {
        (self.perm[col] == row).then(|| self.phases[col])
    }
}

/// Structural tag of a site matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SiteKind {
    Permutation,
    Diagonal,
    Monomial,
    Butson,
    General,
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    Monomial(Monomial),
    /// Entries `cells[b·d + a] / sqrt(norm)` with `None` for zero.
    Phased {
        dim: usize,
        norm: u64,
        cells: Vec<Option<Phase>>,
    },
    Dense {
        dim: usize,
        cells: Vec<Complex64>,
    },
}

/// One tensor factor of a [`LocalOperator`].
#[derive(Clone, Debug, PartialEq)]
pub struct SiteMatrix {
    kind: SiteKind,
    body: Body,
}

impl SiteMatrix {
    pub fn identity(d: usize) -> SiteMatrix {
        SiteMatrix::monomial(Monomial::identity(d))
    }

    pub fn monomial(m: Monomial) -> SiteMatrix {
        let kind = match (m.is_permutation(), m.is_diagonal()) {
            (true, _) => SiteKind::Permutation,
            (false, true) => SiteKind::Diagonal,
            _ => SiteKind::Monomial,
        };
        SiteMatrix { kind, body: Body::Monomial(m) }
    }

    /// `left · B · right`, scaled by `1/sqrt(d)`.
    pub fn butson_layer(left: &Monomial, b: &ButsonMatrix, right: &Monomial) -> Result<SiteMatrix> {
        let d = b.order();
        if left.dim() != d || right.dim() != d {
            return Err(domain!("monomial factors must have dimension {d}"));
        }
        let mut cells = vec![None; d * d];
        let linv = left.inverse();
        for row in 0..d {
            let l = linv.perm[row];
            let lp = left.phases[l];
            for col in 0..d {
                let m = right.perm[col];
                cells[row * d + col] = Some(lp * b.phase(l, m) * right.phases[col]);
            }
        }
        Ok(SiteMatrix { kind: SiteKind::Butson, body: Body::Phased { dim: d, norm: d as u64, cells } })
    }

    /// A matrix whose nonzero entries are phases scaled by `1/sqrt(norm)`.
    pub fn phased(dim: usize, norm: u64, cells: Vec<Option<Phase>>) -> Result<SiteMatrix> {
        if cells.len() != dim * dim || norm == 0 {
            return Err(domain!("phased matrix needs {} cells and a positive norm", dim * dim));
        }
        Ok(SiteMatrix { kind: SiteKind::General, body: Body::Phased { dim, norm, cells } })
    }

    pub fn dense(dim: usize, cells: Vec<Complex64>) -> Result<SiteMatrix> {
        if cells.len() != dim * dim {
            return Err(domain!("dense matrix needs {} cells", dim * dim));
        }
        Ok(SiteMatrix { kind: SiteKind::General, body: Body::Dense { dim, cells } })
    }

    pub fn kind(&self) -> SiteKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.body {
            Body::Monomial(m) => m.dim(),
            Body::Phased { dim, .. } | Body::Dense { dim, .. } => *dim,
        }
    }

    pub fn as_monomial(&self) -> Option<&Monomial> {
        match &self.body {
            Body::Monomial(m) => Some(m),
            _ => None,
        }
    }

    /// Phase-valued view: `(norm, cells)` for exact matrices.
    pub fn phase_cells(&self) -> Option<(u64, Vec<Option<Phase>>)> {
        match &self.body {
            Body::Monomial(m) => {
                let d = m.dim();
                let cells = (0..d * d).map(|i| m.cell(i / d, i % d)).collect();
                Some((1, cells))
            }
            Body::Phased { norm, cells, .. } => Some((*norm, cells.clone())),
            Body::Dense { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.phase_cells().is_some_and(|(_, c)| c.iter().flatten().all(Phase::is_exact))
    }

    pub fn cell(&self, row: usize, col: usize) -> Complex64 {
        match &self.body {
            Body::Monomial(m) => m.cell(row, col).map_or(Complex64::new(0.0, 0.0), |p| p.to_complex()),
            Body::Phased { dim, norm, cells } => {
                cells[row * dim + col].map_or(Complex64::new(0.0, 0.0), |p| p.to_complex() / libm::sqrt(*norm as f64))
            }
            Body::Dense { dim, cells } => cells[row * dim + col],
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let d = self.dim();
        (0..d * d).map(|i| self.cell(i / d, i % d)).collect()
    }

    /// Nonzero entries of column `col` as `(row, value)`.
    fn column(&self, col: usize, tol: f64) -> Vec<(usize, Complex64)> {
        (0..self.dim()).map(|r| (r, self.cell(r, col))).filter(|(_, v)| v.norm() > tol).collect()
    }

    /// Per-row and per-column nonzero counts.
    pub fn nonzero_counts(&self, tol: f64) -> (Vec<usize>, Vec<usize>) {
        let d = self.dim();
        let mut rows = vec![0; d];
        let mut cols = vec![0; d];
        for r in 0..d {
            for c in 0..d {
                let nz = match &self.body {
                    Body::Monomial(m) => m.cell(r, c).is_some(),
                    Body::Phased { cells, .. } => cells[r * d + c].is_some(),
                    Body::Dense { cells, .. } => cells[r * d + c].norm() > tol,
                };
                if nz {
                    rows[r] += 1;
                    cols[c] += 1;
                }
            }
        }
        (rows, cols)
    }

    /// Exact Gram-identity check for phase-valued matrices, float otherwise.
    pub fn is_unitary(&self, tol: f64) -> bool {
        match self.phase_cells() {
            Some((norm, cells)) if cells.iter().flatten().all(Phase::is_exact) => {
                let d = self.dim();
                let order = cells.iter().flatten().fold(1u64, |acc, p| acc.lcm(&p.as_turn().unwrap().den()));
                let ring = CyclotomicRing::new(order).unwrap();
                for a in 0..d {
                    for b in 0..d {
                        let mut s = RootSum::zero(order);
                        for r in 0..d {
                            if let (Some(x), Some(y)) = (cells[r * d + a], cells[r * d + b]) {
                                s.add_turn((x / y).as_turn().unwrap(), 1);
                            }
                        }
                        if a == b {
                            s.add_root(0, -(norm as i64));
                        }
                        if !s.is_zero(&ring) {
                            return false;
                        }
                    }
                }
                true
            }
            _ => linalg::is_unitary(self.dim(), &self.to_dense(), tol),
        }
    }

    pub fn adjoint(&self) -> SiteMatrix {
        match &self.body {
            Body::Monomial(m) => SiteMatrix::monomial(m.inverse()),
            Body::Phased { dim, norm, cells } => {
                let d = *dim;
                let t = (0..d * d).map(|i| cells[(i % d) * d + i / d].map(Phase::conj)).collect();
                SiteMatrix { kind: self.kind, body: Body::Phased { dim: d, norm: *norm, cells: t } }
            }
            Body::Dense { dim, cells } => SiteMatrix {
                kind: SiteKind::General,
                body: Body::Dense { dim: *dim, cells: linalg::adjoint(*dim, cells) },
            },
        }
    }

    /// Matrix product `self · other`, exact whenever one factor is monomial.
    pub fn compose(&self, other: &SiteMatrix) -> SiteMatrix {
        let d = self.dim();
        match (&self.body, &other.body) {
            (Body::Monomial(a), Body::Monomial(b)) => SiteMatrix::monomial(a.compose(b)),
            (Body::Monomial(a), Body::Phased { norm, cells, .. }) => {
                let mut out = vec![None; d * d];
                for r in 0..d {
                    for c in 0..d {
                        out[a.perm[r] * d + c] = cells[r * d + c].map(|p| a.phases[r] * p);
                    }
                }
                SiteMatrix { kind: other.kind, body: Body::Phased { dim: d, norm: *norm, cells: out } }
            }
            (Body::Phased { norm, cells, .. }, Body::Monomial(b)) => {
                let mut out = vec![None; d * d];
                for r in 0..d {
                    for c in 0..d {
                        out[r * d + c] = cells[r * d + b.perm[c]].map(|p| p * b.phases[c]);
                    }
                }
                SiteMatrix { kind: self.kind, body: Body::Phased { dim: d, norm: *norm, cells: out } }
            }
            _ => SiteMatrix {
                kind: SiteKind::General,
                body: Body::Dense { dim: d, cells: linalg::mat_mul(d, &self.to_dense(), &other.to_dense()) },
            },
        }
    }

    /// Divide by the phase of the first nonzero entry (column-major scan).
    fn normalized(&self, tol: f64) -> (SiteMatrix, Phase) {
        let d = self.dim();
        let first = (0..d * d).map(|i| (i % d, i / d)).find(|&(r, c)| self.cell(r, c).norm() > tol);
        let Some((r, c)) = first else { return (self.clone(), Phase::ONE) };
        let g = match &self.body {
            Body::Monomial(m) => m.cell(r, c).unwrap(),
            Body::Phased { cells, .. } => cells[r * d + c].unwrap(),
            Body::Dense { cells, .. } => Phase::from_angle(cells[r * d + c].arg()),
        };
        let gi = g.inv();
        let body = match &self.body {
            Body::Monomial(m) => {
                Body::Monomial(Monomial { perm: m.perm.clone(), phases: m.phases.iter().map(|&p| p * gi).collect() })
            }
            Body::Phased { dim, norm, cells } => {
                Body::Phased { dim: *dim, norm: *norm, cells: cells.iter().map(|c| c.map(|p| p * gi)).collect() }
            }
            Body::Dense { dim, cells } => {
                let z = gi.to_complex();
                Body::Dense { dim: *dim, cells: cells.iter().map(|&x| x * z).collect() }
            }
        };
        (SiteMatrix { kind: self.kind, body }, g)
    }

    fn approx_eq(&self, other: &SiteMatrix, tol: f64) -> bool {
        let d = self.dim();
        if d != other.dim() {
            return false;
        }
        match (self.phase_cells(), other.phase_cells()) {
            (Some((na, ca)), Some((nb, cb))) if na == nb => ca.iter().zip(&cb).all(|(x, y)| match (x, y) {
                (None, None) => true,
                (Some(p), Some(q)) => p.approx_eq(q, tol),
                _ => false,
            }),
            _ => (0..d * d).all(|i| (self.cell(i / d, i % d) - other.cell(i / d, i % d)).norm() <= tol),
        }
    }
}

/// A product operator `ω (U_1 ⊗ … ⊗ U_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    sites: Vec<SiteMatrix>,
    global: Phase,
}

impl LocalOperator {
    pub fn new(sites: Vec<SiteMatrix>, global: Phase) -> Result<LocalOperator> {
        if sites.is_empty() {
            return Err(domain!("operator needs at least one site"));
        }
        Ok(LocalOperator { sites, global })
    }

    pub fn identity(n: usize, d: usize) -> LocalOperator {
        LocalOperator { sites: vec![SiteMatrix::identity(d); n], global: Phase::ONE }
    }

    pub fn from_monomials(ms: Vec<Monomial>, global: Phase) -> LocalOperator {
        LocalOperator { sites: ms.into_iter().map(SiteMatrix::monomial).collect(), global }
    }

    pub fn sites(&self) -> &[SiteMatrix] {
        &self.sites
    }

    pub fn global(&self) -> Phase {
        self.global
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn is_monomial(&self) -> bool {
        self.sites.iter().all(|s| s.as_monomial().is_some())
    }

    pub fn is_exact(&self) -> bool {
        self.global.is_exact() && self.sites.iter().all(SiteMatrix::is_exact)
    }

    /// `self · other` site by site.
    pub fn compose(&self, other: &LocalOperator) -> Result<LocalOperator> {
        if self.n() != other.n() {
            return Err(domain!("operators act on {} and {} sites", self.n(), other.n()));
        }
        let sites = self.sites.iter().zip(&other.sites).map(|(a, b)| a.compose(b)).collect();
        Ok(LocalOperator { sites, global: self.global * other.global })
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator { sites: self.sites.iter().map(SiteMatrix::adjoint).collect(), global: self.global.inv() }
    }

    /// Equality up to a global phase (site-wise scalars may be redistributed).
    pub fn equals_up_to_phase(&self, other: &LocalOperator, tol: f64) -> bool {
        self.n() == other.n()
            && self
                .sites
                .iter()
                .zip(&other.sites)
                .all(|(a, b)| a.normalized(tol).0.approx_eq(&b.normalized(tol).0, tol))
    }

    fn check_dims(&self, n: usize, d: usize) -> Result<()> {
        if self.n() != n || self.sites.iter().any(|s| s.dim() != d) {
            return Err(domain!("operator does not act on {n} sites of dimension {d}"));
        }
        Ok(())
    }

    /// Fast path for monomial operators on minimal-support states.
    pub fn apply_monomial(&self, s: &MinimalSupportState) -> Result<MinimalSupportState> {
        self.check_dims(s.n(), s.d())?;
        let ms: Vec<&Monomial> = self
            .sites
            .iter()
            .map(|x| x.as_monomial().ok_or_else(|| domain!("operator is not monomial")))
            .collect::<Result<_>>()?;
        let terms = s
            .terms()
            .map(|(idx, &ph)| {
                let mut p = ph * self.global;
                let row = idx
                    .0
                    .iter()
                    .zip(&ms)
                    .map(|(&a, m)| {
                        p = p * m.phases[a];
                        m.perm[a]
                    })
                    .collect();
                (MultiIndex(row), p)
            })
            .collect();
        MinimalSupportState::new(s.n(), s.d(), s.k(), terms)
    }

    /// Apply to a sparse state. The result is exact (unit amplitudes with
    /// rational phases, up to a dropped global phase) whenever the input and
    /// all sites are exact and the output amplitudes share one modulus.
    pub fn apply(&self, s: &SparseState, tol: f64) -> Result<SparseState> {
        self.check_dims(s.n(), s.d())?;
        if s.is_uniform_exact() && self.is_exact() {
            if let Some(out) = self.apply_exact(s)? {
                return Ok(out);
            }
        }
        self.apply_float(s, tol)
    }

    fn apply_exact(&self, s: &SparseState) -> Result<Option<SparseState>> {
        let (n, d) = (s.n(), s.d());
        let mut order = self.global.as_turn().unwrap().den();
        for a in s.terms().values() {
            order = order.lcm(&a.exact_phase().unwrap().as_turn().unwrap().den());
        }
        let site_cells: Vec<Vec<Option<Phase>>> = self.sites.iter().map(|x| x.phase_cells().unwrap().1).collect();
        for p in site_cells.iter().flatten().flatten() {
            order = order.lcm(&p.as_turn().unwrap().den());
        }
        let order = order.lcm(&2);
        let exp = |p: Phase| -> i64 {
            let t = p.as_turn().unwrap();
            (t.num() * (order / t.den())) as i64
        };
        let mut cur: BTreeMap<MultiIndex, RootSum> = BTreeMap::new();
        let g = exp(self.global);
        for (idx, a) in s.terms() {
            let mut r = RootSum::zero(order);
            r.add_root(exp(a.exact_phase().unwrap()) + g, 1);
            cur.insert(idx.clone(), r);
        }
        let ring = CyclotomicRing::new(order)?;
        for (site, cells) in site_cells.iter().enumerate() {
            let mut next: BTreeMap<MultiIndex, RootSum> = BTreeMap::new();
            for (idx, v) in &cur {
                let a = idx.0[site];
                for b in 0..d {
                    if let Some(p) = cells[b * d + a] {
                        let mut j = idx.clone();
                        j.0[site] = b;
                        next.entry(j).or_insert_with(|| RootSum::zero(order)).add_assign(&v.rotated(exp(p)));
                    }
                }
            }
            next.retain(|_, v| !v.is_zero(&ring));
            cur = next;
        }
        let Some((_, first)) = cur.iter().next() else {
            return Err(Error::Construction("operator annihilated the state".into()));
        };
        let base = first.to_complex();
        let mut terms = Vec::with_capacity(cur.len());
        for (idx, v) in &cur {
            let rel = (v.to_complex() / base).arg();
            let e = libm::round(rel * order as f64 / core::f64::consts::TAU) as i64;
            let mut diff = v.clone();
            diff.sub_assign(&first.rotated(e));
            if !diff.is_zero(&ring) {
                return Ok(None);
            }
            terms.push((idx.clone(), ComplexAmp::unit(Phase::rational(e as i128, order)?)));
        }
        SparseState::new(n, d, terms).map(Some)
    }

    fn apply_float(&self, s: &SparseState, tol: f64) -> Result<SparseState> {
        let d = s.d();
        let norm = libm::sqrt(s.total_weight());
        let g = self.global.to_complex();
        let mut cur: BTreeMap<MultiIndex, Complex64> =
            s.terms().iter().map(|(i, a)| (i.clone(), a.to_complex() * g / norm)).collect();
        for (site, m) in self.sites.iter().enumerate() {
            let cols: Vec<Vec<(usize, Complex64)>> = (0..d).map(|a| m.column(a, 0.0)).collect();
            let mut next: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
            for (idx, v) in &cur {
                for &(b, u) in &cols[idx.0[site]] {
                    let mut j = idx.clone();
                    j.0[site] = b;
                    *next.entry(j).or_default() += u * v;
                }
            }
            cur = next;
        }
        let terms = cur.into_iter().filter(|(_, v)| v.norm() > tol).map(|(i, v)| (i, ComplexAmp::Float(v)));
        SparseState::new(s.n(), d, terms)
    }

    /// The global phase `g` with `self·src = g·dst`, if the operator maps one onto the other.
    pub fn replays(&self, src: &SparseState, dst: &SparseState, tol: f64) -> Result<Option<Phase>> {
        let out = self.apply(src, tol)?;
        Ok(states_equal_up_to_global_phase(&out, dst, tol))
    }

    /// Human-readable one-line summary.
    pub fn describe(&self) -> alloc::string::String {
        let kinds: Vec<_> = self.sites.iter().map(|s| format!("{:?}", s.kind())).collect();
        format!("global {} sites [{}]", self.global, kinds.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::butson::fourier;
    use crate::states::construct_ame43;

    #[test]
    fn monomial_algebra() {
        let p = Monomial::new(vec![1, 2, 0], vec![Phase::rational(1, 3).unwrap(), Phase::ONE, Phase::ONE]).unwrap();
        let id = p.compose(&p.inverse());
        assert_eq!(id, Monomial::identity(3));
        assert!(Monomial::new(vec![0, 0], vec![Phase::ONE; 2]).is_err());
    }

    #[test]
    fn fourier_layer_is_unitary() {
        let f = fourier(3);
        let m = SiteMatrix::butson_layer(&Monomial::identity(3), &f, &Monomial::identity(3)).unwrap();
        assert!(m.is_unitary(1e-12));
        assert_eq!(m.nonzero_counts(1e-12), (vec![3; 3], vec![3; 3]));
        let a = m.adjoint().compose(&m);
        assert!(linalg::is_unitary(3, &a.to_dense(), 1e-12));
    }

    #[test]
    fn fourier_power_fixes_ame43() {
        let f = fourier(3);
        let layer = SiteMatrix::butson_layer(&Monomial::identity(3), &f, &Monomial::identity(3)).unwrap();
        let op = LocalOperator::new(vec![layer; 4], Phase::ONE).unwrap();
        let s = construct_ame43().to_sparse();
        let out = op.apply(&s, 1e-10).unwrap();
        assert!(out.is_uniform_exact());
        assert!(states_equal_up_to_global_phase(&out, &s, 1e-10).is_some());
    }
}
