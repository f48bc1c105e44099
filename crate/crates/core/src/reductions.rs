//! Reduced-state arguments: an LM filter on `(k+1)`-party reductions and the
//! five-party non-equivalence chain built on the triangular-number unitaries
//! `Ũ₄`, `Ũ₅`.
//!
//! For a minimal-support `k`-uniform state with `2k < N`, the reduction to
//! `k+1` parties is the uniform mixture of the projected support rows (the
//! traced part determines a row uniquely), so LM-equivalence of reductions is
//! a permutation matching of projected supports.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::butson::ButsonMatrix;
use crate::equivalence::{lm_match, SearchOptions, SearchStats, Verdict};
use crate::error::{domain, Result};
use crate::operator::{LocalOperator, Monomial, SiteMatrix};
use crate::phases::{ComplexAmp, Phase};
use crate::states::construct::is_prime;
use crate::states::{
    ame5_linear_raw, construct_ame5_phased, construct_ame5_prime, reduced_density, subsets, MinimalSupportState,
    MultiIndex, SparseState,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FilterVerdict {
    Passed,
    /// The reductions on `subset` are not LM-equivalent.
    Failed {
        subset: Vec<usize>,
    },
    /// The search on `subset` ran out of budget.
    Incomplete {
        subset: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionFilterReport {
    pub verdict: FilterVerdict,
    pub examined: Vec<Vec<usize>>,
    pub exact: bool,
    pub stats: SearchStats,
}

fn projected(s: &MinimalSupportState, subset: &[usize]) -> Result<MinimalSupportState> {
    let terms = s.rows().iter().map(|r| (r.project(subset), Phase::ONE)).collect();
    MinimalSupportState::new(subset.len(), s.d(), s.k(), terms)
}

/// Compare every `(k+1)`-party reduction of two minimal-support states.
pub fn reduced_lm_filter(
    a: &MinimalSupportState,
    b: &MinimalSupportState,
    opts: &SearchOptions,
) -> Result<ReductionFilterReport> {
    if (a.n(), a.d(), a.k()) != (b.n(), b.d(), b.k()) {
        return Err(domain!("states differ in (n, d, k)"));
    }
    let (n, k) = (a.n(), a.k());
    if 2 * k >= n {
        return Err(domain!(
            "the reduction filter needs 2k < N; with N = {n}, k = {k} reductions to k+1 parties are not pure-support mixtures"
        ));
    }
    let mut stats = SearchStats::default();
    let mut examined = Vec::new();
    for subset in subsets(n, k + 1) {
        let cert = lm_match(&projected(a, &subset)?, &projected(b, &subset)?, opts)?;
        stats.absorb(&cert.stats);
        examined.push(subset.clone());
        let verdict = match cert.verdict {
            Verdict::Equivalent(_) => continue,
            Verdict::Inequivalent(_) => FilterVerdict::Failed { subset },
            Verdict::Inconclusive(_) => FilterVerdict::Incomplete { subset },
        };
        return Ok(ReductionFilterReport { verdict, examined, exact: true, stats });
    }
    Ok(ReductionFilterReport { verdict: FilterVerdict::Passed, examined, exact: true, stats })
}

/// The matrices `W`, `V` over `Z_d` and the unitaries `Ũ₄ = (ω^{w})`,
/// `Ũ₅ = (ω^{v})` (scale `1/sqrt(d)`).
///
/// As operators, `Ũ|x⟩ = Σ_m ω^{w_{xm}} |m⟩ / sqrt(d)`: rows of `W` index
/// input levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularMatrixPair {
    pub d: usize,
    pub w: Vec<Vec<usize>>,
    pub v: Vec<Vec<usize>>,
}

fn triangular(k: i64, d: usize) -> usize {
    let k = k.rem_euclid(d as i64);
    ((k * (k + 1) / 2) % d as i64) as usize
}

/// `W` and `V` from the closed formula `w_{ij} = 2t_{j-i-1}`,
/// `v_{ij} = -2t_{j-i/2-1}` (even `i`) or `-2t_{j-(i+d)/2-1}` (odd `i`).
pub fn closed_form_wv(d: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let di = d as i64;
    let w = (0..di).map(|i| (0..di).map(|j| 2 * triangular(j - i - 1, d) % d).collect()).collect();
    let v = (0..di)
        .map(|i| {
            let shift = if i % 2 == 0 { i / 2 } else { (i + di) / 2 };
            (0..di).map(|j| (d - 2 * triangular(j - shift - 1, d) % d) % d).collect()
        })
        .collect();
    (w, v)
}

/// Build `W`, `V` by the row recursion and cross-check the closed formula.
pub fn build_u4_u5(d: usize) -> Result<TriangularMatrixPair> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(domain!("the triangular construction needs odd d >= 3, got {d}"));
    }
    let mut w = vec![vec![0usize; d]; d];
    let mut v = vec![vec![0usize; d]; d];
    for j in 0..d - 1 {
        w[0][j + 1] = (w[0][j] + 2 * j) % d;
        v[0][j + 1] = (v[0][j] + d * d - 2 * j) % d;
    }
    for i in 1..d {
        for j in 0..d {
            w[i][j] = w[i - 1][(j + d - 1) % d];
        }
    }
    // V rows follow i -> i + 2, which visits every row for odd d
    let mut i = 0;
    for _ in 1..d {
        let next = (i + 2) % d;
        for j in 0..d {
            v[next][j] = v[i][(j + d - 1) % d];
        }
        i = next;
    }
    let (cw, cv) = closed_form_wv(d);
    if cw != w || cv != v {
        return Err(crate::Error::Construction(format!(
            "recursive and closed-form triangular matrices disagree for d = {d}"
        )));
    }
    Ok(TriangularMatrixPair { d, w, v })
}

impl TriangularMatrixPair {
    fn butson(&self, m: &[Vec<usize>]) -> ButsonMatrix {
        let d = self.d;
        let exps = (0..d * d).map(|c| m[c % d][c / d] as u64).collect();
        ButsonMatrix::from_exponents(d, d as u64, exps).expect("d x d exponents")
    }

    /// `Ũ₄` as a matrix: entry `[m][x] = ω^{w_{xm}}`.
    pub fn u4(&self) -> ButsonMatrix {
        self.butson(&self.w)
    }

    pub fn u5(&self) -> ButsonMatrix {
        self.butson(&self.v)
    }

    pub fn u4_site(&self) -> SiteMatrix {
        let id = Monomial::identity(self.d);
        SiteMatrix::butson_layer(&id, &self.u4(), &id).expect("dimensions agree")
    }

    pub fn u5_site(&self) -> SiteMatrix {
        let id = Monomial::identity(self.d);
        SiteMatrix::butson_layer(&id, &self.u5(), &id).expect("dimensions agree")
    }

    /// `Id ⊗ Id ⊗ Id ⊗ Ũ₄ ⊗ Ũ₅` on five parties.
    pub fn five_party_layer(&self) -> LocalOperator {
        let id = SiteMatrix::identity(self.d);
        LocalOperator::new(vec![id.clone(), id.clone(), id, self.u4_site(), self.u5_site()], Phase::ONE)
            .expect("five sites")
    }
}

/// Whether `Id ⊗ Ũ₄ ⊗ Ũ₅` carries the three-party reduction (parties 3, 4, 5)
/// of `Σ|i, j, i+j, 2i+j, 3i+j⟩` onto that of the phased five-party state.
pub fn verify_rho345_lemma(d: usize, tol: f64) -> Result<bool> {
    let pair = build_u4_u5(d)?;
    let linear = ame5_linear_raw(d)?;
    let moved = pair.five_party_layer().apply(&linear, tol)?;
    let target = construct_ame5_phased(d)?;
    let keep = [2, 3, 4];
    Ok(reduced_density(&moved, &keep)?.equals(&reduced_density(&target, &keep)?, tol))
}

/// One checked claim of a proof chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub claim: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ame5Report {
    pub d: usize,
    pub steps: Vec<ProofStep>,
}

impl Ame5Report {
    pub fn all_passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }

    pub fn first_failure(&self) -> Option<&ProofStep> {
        self.steps.iter().find(|s| !s.passed)
    }
}

/// Run the support-counting chain showing that the phased state
/// `Σ ω^{(3i+j)k}|i, j, i+j, 2i+j+k, k⟩` and the linear state
/// `Σ|i, j, i+j, 2i+j, 3i+j⟩` are not locally equivalent.
pub fn verify_ame5_nonequivalence(d: usize, tol: f64) -> Result<Ame5Report> {
    if d < 5 || !is_prime(d) {
        return Err(domain!("the five-party chain needs a prime d >= 5, got {d}"));
    }
    let mut steps = Vec::new();
    let mut step = |claim: String, passed: bool| steps.push(ProofStep { claim, passed });

    let linear = construct_ame5_prime(d)?;
    step(
        format!("linear state is 2-uniform of minimal support with {} = d^2 terms", linear.len()),
        linear.len() == d * d,
    );

    step(
        format!("Id x U4 x U5 maps rho_345 of the linear state onto rho_345 of the phased state (d = {d})"),
        verify_rho345_lemma(d, tol)?,
    );

    let pair = build_u4_u5(d)?;
    let two = LocalOperator::new(vec![pair.u4_site(), pair.u5_site()], Phase::ONE)?;
    let mut dense = true;
    for a in 0..d {
        for b in 0..d {
            let basis = SparseState::new(2, d, [(MultiIndex(vec![a, b]), ComplexAmp::unit(Phase::ONE))])?;
            dense &= two.apply(&basis, tol)?.support_count() == d * d;
        }
    }
    step(format!("supp((U4 x U5)|a,b>) = d^2 = {} for all a, b", d * d), dense);

    let phased = construct_ame5_phased(d)?;
    step(format!("phased state has support d^3 = {}", d * d * d), phased.support_count() == d * d * d);

    let moved = pair.five_party_layer().apply(&linear.to_sparse(), tol)?;
    let d4 = d.pow(4);
    step(
        format!(
            "monomial U1, U2, M3 with M4·U4, M5·U5 give support d^4 = {d4} on the linear state, not d^3 = {}",
            d * d * d
        ),
        moved.support_count() == d4 && d4 != d * d * d,
    );
    Ok(Ame5Report { d, steps })
}
