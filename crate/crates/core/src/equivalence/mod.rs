//! Local-equivalence decisions between minimal-support states.
//!
//! The engine searches local monomial (LM) operators `σ_1 D_1 ⊗ … ⊗ σ_n D_n`
//! by backtracking over symbol permutations and solving the diagonal phases
//! as a linear system over turns. For `N = 2k` a Butson layer is tried on top.
//! Every positive answer carries a witness operator that has been replayed.

mod butson_branch;
mod dispatch;
mod lm;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use butson_branch::{butson_form_excluded, butson_match};
pub use dispatch::{
    automorphisms, decide_slocc, family_classes, family_member, AutomorphismReport, Branch, FamilyPair, FamilyReport,
    PairOutcome,
};
pub use lm::{lm_automorphisms, lm_match, necessary_condition};

use crate::error::{domain, Result};
use crate::operator::LocalOperator;
use crate::phases::{phase_product, Phase};
use crate::states::{MinimalSupportState, SparseState};

/// Search limits shared by every procedure in this module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub tolerance: f64,
    /// Budget of permutation-assignment nodes before a search gives up.
    pub max_nodes: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { tolerance: crate::DEFAULT_TOLERANCE, max_nodes: 5_000_000 }
    }
}

/// Counters collected during a search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub support_conflicts: u64,
    pub condition_prunes: u64,
    pub solver_calls: u64,
    pub butson_candidates: u64,
}

impl SearchStats {
    pub(crate) fn absorb(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.support_conflicts += other.support_conflicts;
        self.condition_prunes += other.condition_prunes;
        self.solver_calls += other.solver_calls;
        self.butson_candidates += other.butson_candidates;
    }
}

/// A failed multiplicative-separability test on W-statistics.
///
/// `values` holds the four quantities `R(J)`, `R(J|p=0)`, `R(J|q=0)`,
/// `R(J|p=q=0)` whose cross-ratio is not one.
#[derive(Clone, Debug, PartialEq)]
pub struct NecessaryViolation {
    /// Positions fixed by the statistic.
    pub positions: Vec<usize>,
    /// The two coordinates (indices into `positions`) of the failing cross-ratio.
    pub coordinates: (usize, usize),
    /// Symbols at `positions` where the cross-ratio fails.
    pub symbols: Vec<usize>,
    pub values: [Phase; 4],
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InequivalenceReason {
    /// The whole LM search space was examined without a witness.
    SearchExhausted {
        space: String,
    },
    NecessaryConditionViolated(NecessaryViolation),
    /// A local invariant (uniformity, party count, …) differs.
    InvariantMismatch(String),
    /// A `(k+1)`-party reduction admits no LM equivalence.
    ReductionFilterFailed {
        subset: Vec<usize>,
    },
    /// A support-counting argument, listed step by step.
    SupportCounting {
        steps: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Equivalent(LocalOperator),
    Inequivalent(InequivalenceReason),
    Inconclusive(String),
}

/// Outcome of an equivalence procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCertificate {
    pub verdict: Verdict,
    /// False when any step relied on a floating-point tolerance.
    pub exact: bool,
    pub stats: SearchStats,
}

impl EquivalenceCertificate {
    pub fn is_equivalent(&self) -> bool {
        matches!(self.verdict, Verdict::Equivalent(_))
    }

    pub fn is_inequivalent(&self) -> bool {
        matches!(self.verdict, Verdict::Inequivalent(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.verdict, Verdict::Inconclusive(_))
    }

    pub fn witness(&self) -> Option<&LocalOperator> {
        match &self.verdict {
            Verdict::Equivalent(w) => Some(w),
            _ => None,
        }
    }

    /// Replay the witness: `Some(true)` when it maps `src` onto `dst` up to a
    /// global phase, `None` for certificates without a witness.
    pub fn replay(&self, src: &SparseState, dst: &SparseState, tol: f64) -> Result<Option<bool>> {
        match self.witness() {
            Some(w) => Ok(Some(w.replays(src, dst, tol)?.is_some())),
            None => Ok(None),
        }
    }
}

/// `W^{positions}_{symbols}`: the product of the phases of all support terms
/// carrying `symbols` at `positions`.
pub fn compute_w(s: &MinimalSupportState, positions: &[usize], symbols: &[usize]) -> Result<Phase> {
    if positions.len() != symbols.len() {
        return Err(domain!("{} positions but {} symbols", positions.len(), symbols.len()));
    }
    if positions.len() > s.k() {
        return Err(domain!("at most k = {} positions may be fixed", s.k()));
    }
    let mut seen = vec![false; s.n()];
    for &p in positions {
        if p >= s.n() || seen[p] {
            return Err(domain!("positions must be distinct and below {}", s.n()));
        }
        seen[p] = true;
    }
    if symbols.iter().any(|&a| a >= s.d()) {
        return Err(domain!("symbols must be below {}", s.d()));
    }
    Ok(phase_product(
        s.terms().filter(|(idx, _)| positions.iter().zip(symbols).all(|(&p, &a)| idx.0[p] == a)).map(|(_, &ph)| ph),
    ))
}

/// `W` for every symbol tuple at `positions`, indexed by mixed-radix code.
pub(crate) fn w_table(s: &MinimalSupportState, positions: &[usize]) -> Vec<Phase> {
    let size = s.d().pow(positions.len() as u32);
    let mut table = vec![Phase::ONE; size];
    for (idx, &ph) in s.terms() {
        let c = idx.code(positions, s.d());
        table[c] = table[c] * ph;
    }
    table
}

pub(crate) fn phases_match(a: Phase, b: Phase, tol: f64) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        a.approx_eq(&b, tol)
    }
}

/// Failing coordinates, symbols and the four values of a cross-ratio.
pub(crate) type CrossRatioFailure = ((usize, usize), Vec<usize>, [Phase; 4]);

/// First failing cross-ratio of a table over `d^m` symbol tuples, if any.
///
/// The table is multiplicatively separable exactly when every cross-ratio
/// `R(J)·R(J|p=q=0) / (R(J|p=0)·R(J|q=0))` equals one.
pub(crate) fn separability_violation(table: &[Phase], d: usize, m: usize, tol: f64) -> Option<CrossRatioFailure> {
    let weights: Vec<usize> = (0..m).map(|t| d.pow((m - 1 - t) as u32)).collect();
    for p in 0..m {
        for q in p + 1..m {
            for code in 0..table.len() {
                let (sp, sq) = ((code / weights[p]) % d, (code / weights[q]) % d);
                if sp == 0 || sq == 0 {
                    continue;
                }
                let zp = code - sp * weights[p];
                let zq = code - sq * weights[q];
                let zpq = zp - sq * weights[q];
                let vals = [table[code], table[zp], table[zq], table[zpq]];
                if !phases_match(vals[0] * vals[3], vals[1] * vals[2], tol) {
                    let symbols = (0..m).map(|t| (code / weights[t]) % d).collect();
                    return Some(((p, q), symbols, vals));
                }
            }
        }
    }
    None
}

/// Per-site nonzero count `s` when every site has exactly `s` nonzero
/// entries in each row and column, all of modulus `1/sqrt(s)`.
pub fn site_block_sizes(op: &LocalOperator, tol: f64) -> Option<Vec<usize>> {
    op.sites()
        .iter()
        .map(|m| {
            let (rows, cols) = m.nonzero_counts(tol);
            let s = *rows.first()?;
            if s == 0 || rows.iter().chain(&cols).any(|&c| c != s) {
                return None;
            }
            let target = 1.0 / libm::sqrt(s as f64);
            let d = m.dim();
            let moduli_ok = (0..d * d)
                .map(|i| m.cell(i / d, i % d).norm())
                .filter(|&x| x > tol)
                .all(|x| (x - target).abs() <= 1e3 * tol.max(1e-12));
            moduli_ok.then_some(s)
        })
        .collect()
}
