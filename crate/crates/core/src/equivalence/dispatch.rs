use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::lm::{lm_all, lm_automorphisms};
use super::{
    butson_match, compute_w, lm_match, phases_match, EquivalenceCertificate, InequivalenceReason, NecessaryViolation,
    SearchOptions, SearchStats, Verdict,
};
use crate::butson::{enumerate_bh, ENUMERATION_CAP};
use crate::designs::small_regime;
use crate::error::{domain, Result};
use crate::operator::{LocalOperator, Monomial, SiteMatrix};
use crate::phases::Phase;
use crate::reductions::{reduced_lm_filter, verify_ame5_nonequivalence, FilterVerdict};
use crate::states::construct::is_prime;
use crate::states::{
    construct_ame5_phased, construct_ame5_prime, states_equal_up_to_global_phase, uniformity, MinimalSupportState,
    MultiIndex, SparseState,
};

fn as_minimal(s: &SparseState, k: usize, tol: f64) -> Option<MinimalSupportState> {
    if !s.is_minimal_support(k) {
        return None;
    }
    MinimalSupportState::try_from_sparse(s, tol).ok().filter(|m| m.k() == k)
}

fn certificate(verdict: Verdict, exact: bool, stats: SearchStats) -> EquivalenceCertificate {
    EquivalenceCertificate { verdict, exact, stats }
}

/// The phased five-party state against a minimal-support state LM-equivalent
/// to the linear one, for prime `d >= 5`.
fn five_party_pair(
    a: &SparseState,
    ma: Option<&MinimalSupportState>,
    b: &SparseState,
    mb: Option<&MinimalSupportState>,
    opts: &SearchOptions,
) -> Result<Option<usize>> {
    let d = a.d();
    if a.n() != 5 || d < 5 || !is_prime(d) {
        return Ok(None);
    }
    let phased = construct_ame5_phased(d)?;
    let linear = construct_ame5_prime(d)?;
    for (non_minimal, minimal) in [(a, mb), (b, ma)] {
        let Some(minimal) = minimal else { continue };
        if states_equal_up_to_global_phase(non_minimal, &phased, opts.tolerance).is_some()
            && minimal.k() == 2
            && lm_match(&linear, minimal, opts)?.is_equivalent()
        {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Decide SLOCC equivalence of two `k`-uniform states.
///
/// For `k`-uniform (hence critical) states SLOCC and LU equivalence agree.
/// Minimal-support pairs with `2k < N` are decided by LM search after the
/// reduction filter; pairs with `2k = N` go through [`butson_match`]. Other
/// pairs are only decided when identical or when they are the five-party
/// pair with a support-counting argument.
pub fn decide_slocc(src: &SparseState, dst: &SparseState, opts: &SearchOptions) -> Result<EquivalenceCertificate> {
    if (src.n(), src.d()) != (dst.n(), dst.d()) {
        return Err(domain!("states live on different systems"));
    }
    let tol = opts.tolerance;
    let (ka, kb) = (uniformity(src, tol)?, uniformity(dst, tol)?);
    if ka == 0 || kb == 0 {
        return Err(domain!("both states must be k-uniform for some k >= 1 (uniformities {ka}, {kb})"));
    }
    let exact = src.is_uniform_exact() && dst.is_uniform_exact();
    if ka != kb {
        let why = format!("uniformity {ka} vs {kb}");
        return Ok(certificate(
            Verdict::Inequivalent(InequivalenceReason::InvariantMismatch(why)),
            exact,
            SearchStats::default(),
        ));
    }
    let (n, k) = (src.n(), ka);
    let ma = as_minimal(src, k, tol);
    let mb = as_minimal(dst, k, tol);
    if let (Some(a), Some(b)) = (&ma, &mb) {
        if 2 * k == n {
            return butson_match(a, b, opts);
        }
        let filter = reduced_lm_filter(a, b, opts)?;
        if let FilterVerdict::Failed { subset } = filter.verdict {
            let reason = InequivalenceReason::ReductionFilterFailed { subset };
            return Ok(certificate(Verdict::Inequivalent(reason), exact, filter.stats));
        }
        let mut cert = lm_match(a, b, opts)?;
        let mut stats = filter.stats;
        stats.absorb(&cert.stats);
        cert.stats = stats;
        return Ok(cert);
    }
    if let Some(g) = states_equal_up_to_global_phase(src, dst, tol) {
        let witness = LocalOperator::new(vec![SiteMatrix::identity(src.d()); n], g.inv())?;
        return Ok(certificate(Verdict::Equivalent(witness), exact, SearchStats::default()));
    }
    if let Some(d) = five_party_pair(src, ma.as_ref(), dst, mb.as_ref(), opts)? {
        let report = verify_ame5_nonequivalence(d, tol)?;
        let verdict = if report.all_passed() {
            let steps = report.steps.into_iter().map(|s| s.claim).collect();
            Verdict::Inequivalent(InequivalenceReason::SupportCounting { steps })
        } else {
            let failed = report.first_failure().map(|s| s.claim.clone()).unwrap_or_default();
            Verdict::Inconclusive(format!("support-counting step failed: {failed}"))
        };
        return Ok(certificate(verdict, exact, SearchStats::default()));
    }
    let why = match (&ma, &mb) {
        (None, None) => "neither state has minimal support",
        _ => "only one state has minimal support",
    };
    Ok(certificate(
        Verdict::Inconclusive(format!("{why}; no complete procedure applies")),
        exact,
        SearchStats::default(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Local monomial operators only.
    Lm,
    /// LM operators and Butson layers (`N = 2k`).
    LmButson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutomorphismReport {
    pub witnesses: Vec<LocalOperator>,
    /// False when a budget or enumeration cap cut the search short.
    pub complete: bool,
    pub stats: SearchStats,
}

fn push_unique(list: &mut Vec<LocalOperator>, op: LocalOperator, tol: f64) {
    if !list.iter().any(|w| w.equals_up_to_phase(&op, tol)) {
        list.push(op);
    }
}

/// All automorphisms found by the complete search of the chosen branch,
/// deduplicated up to a global phase.
pub fn automorphisms(s: &MinimalSupportState, branch: Branch, opts: &SearchOptions) -> Result<AutomorphismReport> {
    let (witnesses, mut stats, mut complete) = lm_automorphisms(s, opts)?;
    if branch == Branch::Lm {
        return Ok(AutomorphismReport { witnesses, complete, stats });
    }
    let (n, d, k) = (s.n(), s.d(), s.k());
    if 2 * k != n {
        return Err(domain!("Butson layers need N = 2k, got N = {n}, k = {k}"));
    }
    if !small_regime(k, d)? || d > ENUMERATION_CAP {
        return Ok(AutomorphismReport { witnesses, complete: false, stats });
    }
    let mut all = Vec::new();
    for w in witnesses {
        push_unique(&mut all, w, opts.tolerance);
    }
    let reps = enumerate_bh(d)?;
    let sparse = s.to_sparse();
    let mut choice = vec![0usize; n];
    'tuples: loop {
        stats.butson_candidates += 1;
        let layer_sites: Vec<SiteMatrix> = choice
            .iter()
            .map(|&c| SiteMatrix::butson_layer(&Monomial::identity(d), &reps[c], &Monomial::identity(d)))
            .collect::<Result<_>>()?;
        let layer = LocalOperator::new(layer_sites, Phase::ONE)?;
        let mid = layer.apply(&sparse, opts.tolerance)?;
        if let Some(mid) = as_minimal(&mid, k, opts.tolerance) {
            let (found, st, done) = lm_all(&mid, s, opts)?;
            stats.absorb(&st);
            complete &= done;
            for m in found {
                let sites = m
                    .sites()
                    .iter()
                    .zip(&choice)
                    .map(|(mm, &c)| {
                        SiteMatrix::butson_layer(mm.as_monomial().expect("LM"), &reps[c], &Monomial::identity(d))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let op = LocalOperator::new(sites, Phase::ONE)?;
                if let Some(g) = op.replays(&sparse, &sparse, opts.tolerance)? {
                    push_unique(&mut all, LocalOperator::new(op.sites().to_vec(), g.inv())?, opts.tolerance);
                }
            }
        }
        for slot in choice.iter_mut().rev() {
            *slot += 1;
            if *slot < reps.len() {
                continue 'tuples;
            }
            *slot = 0;
        }
        break;
    }
    Ok(AutomorphismReport { witnesses: all, complete, stats })
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairOutcome {
    /// Equal parameters: the identity replays.
    Equivalent(EquivalenceCertificate),
    /// Some permutation satisfies the single-pair condition.
    NotSeparated { case: String },
    /// Separated by the condition and certified by the full engine.
    Inequivalent(EquivalenceCertificate),
    /// Separated by the condition, but the full engine did not certify it.
    Unconfirmed(EquivalenceCertificate),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPair {
    pub i: usize,
    pub j: usize,
    pub phi_i: f64,
    pub phi_j: f64,
    pub outcome: PairOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub pairs: Vec<FamilyPair>,
}

/// The member of the family with phase `e^{iφ}` on the marked term.
pub fn family_member(base: &MinimalSupportState, marked: &MultiIndex, phi: f64) -> Result<MinimalSupportState> {
    base.with_phases([(marked, Phase::from_angle(phi))])
}

/// Which branch of the single-pair condition
/// `W'_{ℓ,I} / W_{σ₁(ℓ),σ₂(I)} = W'_{ℓ,I'} / W_{σ₁(ℓ),σ₂(I')}` on the first
/// two positions holds, with `(ℓ, I)` the marked symbols and `I' = I + 1`.
fn single_pair_case(
    src: &MinimalSupportState,
    dst: &MinimalSupportState,
    marked: &MultiIndex,
    tol: f64,
) -> Result<core::result::Result<String, NecessaryViolation>> {
    let d = src.d();
    let (l, i0) = (marked.0[0], marked.0[1]);
    let i1 = (i0 + 1) % d;
    let lhs_num = compute_w(dst, &[0, 1], &[l, i0])?;
    let rhs_num = compute_w(dst, &[0, 1], &[l, i1])?;
    let mut first = None;
    for a in 0..d {
        for b0 in 0..d {
            for b1 in (0..d).filter(|&b| b != b0) {
                let lhs_den = compute_w(src, &[0, 1], &[a, b0])?;
                let rhs_den = compute_w(src, &[0, 1], &[a, b1])?;
                if phases_match(lhs_num / lhs_den, rhs_num / rhs_den, tol) {
                    let case = if (a, b0) == (l, i0) {
                        "sigma fixes the marked pair: alpha_1 = alpha_2"
                    } else if (a, b1) == (l, i0) {
                        "sigma sends (l, I') to the marked pair: alpha_1 = conj(alpha_2)"
                    } else {
                        "sigma moves the marked pair away: both phases trivial"
                    };
                    return Ok(Ok(case.into()));
                }
                first.get_or_insert([lhs_num, lhs_den, rhs_num, rhs_den]);
            }
        }
    }
    let values = first.expect("d >= 2");
    Ok(Err(NecessaryViolation {
        positions: vec![0, 1],
        coordinates: (0, 1),
        symbols: vec![l, i0],
        values,
        detail: format!("W'({l},{i0})/W(σ) = W'({l},{i1})/W(σ) fails for every choice of σ on the first two sites"),
    }))
}

/// Pairwise classification of the family obtained by setting the phase of
/// the `marked` term to `e^{iφ}`.
pub fn family_classes(
    base: &MinimalSupportState,
    marked: &MultiIndex,
    phis: &[f64],
    opts: &SearchOptions,
) -> Result<FamilyReport> {
    if base.k() <= 2 {
        return Err(domain!("family separation needs k > 2; for k <= 2 all phase decorations are LM-equivalent"));
    }
    if base.position(marked).is_none() {
        return Err(domain!("{marked} is not in the support"));
    }
    let tol = opts.tolerance;
    let members = phis.iter().map(|&phi| family_member(base, marked, phi)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..phis.len() {
        for j in i + 1..phis.len() {
            let (a, b) = (&members[i], &members[j]);
            let outcome = if Phase::from_angle(phis[i]).approx_eq(&Phase::from_angle(phis[j]), tol) {
                let witness = LocalOperator::identity(base.n(), base.d());
                let g = witness.replays(&a.to_sparse(), &b.to_sparse(), tol)?;
                let cert = match g {
                    Some(g) => certificate(
                        Verdict::Equivalent(LocalOperator::new(witness.sites().to_vec(), g.inv())?),
                        false,
                        SearchStats::default(),
                    ),
                    None => certificate(
                        Verdict::Inconclusive("identity failed to replay".into()),
                        false,
                        SearchStats::default(),
                    ),
                };
                PairOutcome::Equivalent(cert)
            } else {
                match single_pair_case(a, b, marked, tol)? {
                    Ok(case) => PairOutcome::NotSeparated { case },
                    Err(_) => {
                        let cert =
                            if 2 * base.k() == base.n() { butson_match(a, b, opts)? } else { lm_match(a, b, opts)? };
                        if matches!(
                            cert.verdict,
                            Verdict::Inequivalent(InequivalenceReason::NecessaryConditionViolated(_))
                        ) {
                            PairOutcome::Inequivalent(cert)
                        } else {
                            PairOutcome::Unconfirmed(cert)
                        }
                    }
                }
            };
            pairs.push(FamilyPair { i, j, phi_i: phis[i], phi_j: phis[j], outcome });
        }
    }
    Ok(FamilyReport { pairs })
}
