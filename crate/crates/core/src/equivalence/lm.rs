use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::{
    separability_violation, w_table, EquivalenceCertificate, InequivalenceReason, NecessaryViolation, SearchOptions,
    SearchStats, Verdict,
};
use crate::error::{domain, Result};
use crate::operator::{LocalOperator, Monomial};
use crate::phases::Phase;
use crate::smith::Diagonalization;
use crate::states::{states_equal_up_to_global_phase, subsets, MinimalSupportState};

const UNSET: usize = usize::MAX;

/// Phase data for the diagonal solve: exact numerators over a common
/// denominator, or real turns.
enum PhaseData {
    Exact { den: i128, src: Vec<i128>, dst: Vec<i128> },
    Real { src: Vec<f64>, dst: Vec<f64> },
}

/// W tables on one `(k-1)`-subset for both states.
struct Condition {
    positions: Vec<usize>,
    src: Vec<Phase>,
    dst: Vec<Phase>,
}

struct Prepared<'a> {
    src: &'a MinimalSupportState,
    dst: &'a MinimalSupportState,
    n: usize,
    d: usize,
    k: usize,
    rows_by: Vec<Vec<Vec<usize>>>,
    dst_lookup: Vec<usize>,
    conditions: Vec<Condition>,
    phases: PhaseData,
    system: Diagonalization,
    tol: f64,
}

fn check_shapes(src: &MinimalSupportState, dst: &MinimalSupportState) -> Result<()> {
    if (src.n(), src.d(), src.k()) != (dst.n(), dst.d(), dst.k()) {
        return Err(domain!(
            "states differ in shape: (n, d, k) = ({}, {}, {}) vs ({}, {}, {})",
            src.n(),
            src.d(),
            src.k(),
            dst.n(),
            dst.d(),
            dst.k()
        ));
    }
    Ok(())
}

fn first_k_code(symbols: impl Iterator<Item = usize>, d: usize) -> usize {
    symbols.fold(0, |acc, s| acc * d + s)
}

/// The incidence system `A[I][(j, a)] = [I_j = a]` of a support.
pub(crate) fn incidence_system(s: &MinimalSupportState) -> Result<Diagonalization> {
    let (n, d) = (s.n(), s.d());
    let a: Vec<Vec<i64>> = s
        .rows()
        .iter()
        .map(|r| {
            let mut row = vec![0i64; n * d];
            for (j, &x) in r.0.iter().enumerate() {
                row[j * d + x] = 1;
            }
            row
        })
        .collect();
    Diagonalization::new(&a, n * d)
}

impl<'a> Prepared<'a> {
    fn new(src: &'a MinimalSupportState, dst: &'a MinimalSupportState, tol: f64) -> Result<Self> {
        check_shapes(src, dst)?;
        let (n, d, k) = (src.n(), src.d(), src.k());
        let mut rows_by = vec![vec![Vec::new(); d]; k];
        for (r, row) in src.rows().iter().enumerate() {
            for (j, by) in rows_by.iter_mut().enumerate() {
                by[row.0[j]].push(r);
            }
        }
        let mut dst_lookup = vec![UNSET; dst.len()];
        for (r, row) in dst.rows().iter().enumerate() {
            dst_lookup[first_k_code(row.0[..k].iter().copied(), d)] = r;
        }
        let conditions = if k > 2 {
            subsets(n, k - 1)
                .into_iter()
                .map(|positions| Condition { src: w_table(src, &positions), dst: w_table(dst, &positions), positions })
                .collect()
        } else {
            Vec::new()
        };
        let exact_den =
            src.phases().iter().chain(dst.phases()).try_fold(1u64, |acc, p| p.as_turn().map(|t| acc.lcm(&t.den())));
        let phases = match exact_den {
            Some(den) => {
                let scale = |p: &Phase| {
                    let t = p.as_turn().unwrap();
                    (t.num() * (den / t.den())) as i128
                };
                PhaseData::Exact {
                    den: den as i128,
                    src: src.phases().iter().map(scale).collect(),
                    dst: dst.phases().iter().map(scale).collect(),
                }
            }
            None => PhaseData::Real {
                src: src.phases().iter().map(Phase::turn_f64).collect(),
                dst: dst.phases().iter().map(Phase::turn_f64).collect(),
            },
        };
        Ok(Prepared { src, dst, n, d, k, rows_by, dst_lookup, conditions, phases, system: incidence_system(src)?, tol })
    }

    fn exact(&self) -> bool {
        matches!(self.phases, PhaseData::Exact { .. })
    }

    /// Check the separability of `W'_{σ(J)} / W_J` on one condition.
    fn violation(&self, c: &Condition, fwd: &[Vec<usize>]) -> Option<NecessaryViolation> {
        let d = self.d;
        let m = c.positions.len();
        let ratio: Vec<Phase> = (0..c.src.len())
            .map(|code| {
                let mut rest = code;
                let mut image = vec![0; m];
                for t in (0..m).rev() {
                    image[t] = fwd[c.positions[t]][rest % d];
                    rest /= d;
                }
                c.dst[first_k_code(image.into_iter(), d)] / c.src[code]
            })
            .collect();
        separability_violation(&ratio, d, m, self.tol).map(|(coordinates, symbols, values)| NecessaryViolation {
            detail: format!(
                "W'(σ(J))/W(J) on positions {:?} is not separable in coordinates {:?} at J = {:?}",
                c.positions, coordinates, symbols
            ),
            positions: c.positions.clone(),
            coordinates,
            symbols,
            values,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    First,
    All,
}

struct Search<'p, 'a> {
    p: &'p Prepared<'a>,
    fwd: Vec<Vec<usize>>,
    inv: Vec<Vec<usize>>,
    count: Vec<usize>,
    trail: Vec<(usize, usize)>,
    order: Vec<(usize, usize)>,
    checked: Vec<bool>,
    stats: SearchStats,
    max_nodes: u64,
    mode: Mode,
    found: Vec<LocalOperator>,
    first_violation: Option<NecessaryViolation>,
    aborted: bool,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(p: &'p Prepared<'a>, mode: Mode, max_nodes: u64) -> Self {
        let (n, d, k) = (p.n, p.d, p.k);
        // symbol-major over the free sites, so rows become determined early
        let order = (0..d).flat_map(|a| (0..k).map(move |j| (j, a))).collect();
        Search {
            p,
            fwd: vec![vec![UNSET; d]; n],
            inv: vec![vec![UNSET; d]; n],
            count: vec![0; n],
            trail: Vec::new(),
            order,
            checked: vec![false; p.conditions.len()],
            stats: SearchStats::default(),
            max_nodes,
            mode,
            found: Vec::new(),
            first_violation: None,
            aborted: false,
        }
    }

    fn set(&mut self, site: usize, a: usize, b: usize) -> bool {
        let cur = self.fwd[site][a];
        if cur == b {
            return true;
        }
        if cur != UNSET || self.inv[site][b] != UNSET {
            return false;
        }
        self.fwd[site][a] = b;
        self.inv[site][b] = a;
        self.count[site] += 1;
        self.trail.push((site, a));
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (site, a) = self.trail.pop().unwrap();
            let b = self.fwd[site][a];
            self.fwd[site][a] = UNSET;
            self.inv[site][b] = UNSET;
            self.count[site] -= 1;
        }
    }

    /// Map every source row that `(site, a)` completes and fix the derived sites.
    fn propagate(&mut self, site: usize, a: usize) -> bool {
        let p = self.p;
        let k = p.k;
        'rows: for &r in &p.rows_by[site][a] {
            let row = &p.src.rows()[r].0;
            let mut code = 0;
            for (t, &x) in row[..k].iter().enumerate() {
                let y = self.fwd[t][x];
                if y == UNSET {
                    continue 'rows;
                }
                code = code * p.d + y;
            }
            let target = &p.dst.rows()[p.dst_lookup[code]].0;
            for t in k..p.n {
                if !self.set(t, row[t], target[t]) {
                    return false;
                }
            }
        }
        true
    }

    /// Check conditions whose positions just became fully assigned; returns
    /// the indices newly marked, or `Err` on a violation.
    fn check_conditions(&mut self) -> core::result::Result<Vec<usize>, ()> {
        let d = self.p.d;
        let mut newly = Vec::new();
        for (ci, c) in self.p.conditions.iter().enumerate() {
            if self.checked[ci] || c.positions.iter().any(|&t| self.count[t] < d) {
                continue;
            }
            if let Some(v) = self.p.violation(c, &self.fwd) {
                for &i in &newly {
                    self.checked[i] = false;
                }
                if self.first_violation.is_none() {
                    self.first_violation = Some(v);
                }
                return Err(());
            }
            self.checked[ci] = true;
            newly.push(ci);
        }
        Ok(newly)
    }

    fn done(&self) -> bool {
        self.aborted || (self.mode == Mode::First && !self.found.is_empty())
    }

    fn dfs(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.leaf();
            return;
        }
        let (site, a) = self.order[depth];
        for b in 0..self.p.d {
            if self.inv[site][b] != UNSET {
                continue;
            }
            self.stats.nodes += 1;
            if self.stats.nodes > self.max_nodes {
                self.aborted = true;
                return;
            }
            let mark = self.trail.len();
            if self.set(site, a, b) && self.propagate(site, a) {
                match self.check_conditions() {
                    Ok(newly) => {
                        self.dfs(depth + 1);
                        for i in newly {
                            self.checked[i] = false;
                        }
                    }
                    Err(()) => self.stats.condition_prunes += 1,
                }
            } else {
                self.stats.support_conflicts += 1;
            }
            self.undo(mark);
            if self.done() {
                return;
            }
        }
    }

    fn leaf(&mut self) {
        let p = self.p;
        if self.count.iter().any(|&c| c != p.d) {
            self.stats.support_conflicts += 1;
            return;
        }
        self.stats.solver_calls += 1;
        let image: Vec<usize> = p
            .src
            .rows()
            .iter()
            .map(|row| p.dst_lookup[first_k_code((0..p.k).map(|t| self.fwd[t][row.0[t]]), p.d)])
            .collect();
        let theta: Option<Vec<Phase>> = match &p.phases {
            PhaseData::Exact { den, src, dst } => {
                let num: Vec<i128> = image.iter().enumerate().map(|(r, &j)| dst[j] - src[r]).collect();
                match p.system.solve_mod_one(&num, *den) {
                    Ok(Some(x)) => Some(x.into_iter().map(Phase::Rational).collect()),
                    _ => None,
                }
            }
            PhaseData::Real { src, dst } => {
                let r: Vec<f64> = image.iter().enumerate().map(|(r, &j)| dst[j] - src[r]).collect();
                p.system.solve_mod_one_f64(&r, p.tol).map(|x| x.into_iter().map(Phase::real).collect())
            }
        };
        let Some(theta) = theta else { return };
        let monomials: Vec<Monomial> = (0..p.n)
            .map(|j| Monomial::new(self.fwd[j].clone(), theta[j * p.d..(j + 1) * p.d].to_vec()))
            .collect::<Result<_>>()
            .expect("complete assignment is a permutation");
        let op = LocalOperator::from_monomials(monomials, Phase::ONE);
        let Ok(out) = op.apply_monomial(p.src) else { return };
        if let Some(g) = states_equal_up_to_global_phase(&out.to_sparse(), &p.dst.to_sparse(), p.tol) {
            let op = LocalOperator::new(op.sites().to_vec(), g.inv()).expect("nonempty");
            self.found.push(op);
        }
    }
}

/// Witnesses, counters, whether the budget ran out, the first recorded
/// violation, and exactness.
type RunOutcome = (Vec<LocalOperator>, SearchStats, bool, Option<NecessaryViolation>, bool);

fn run(src: &MinimalSupportState, dst: &MinimalSupportState, opts: &SearchOptions, mode: Mode) -> Result<RunOutcome> {
    let prepared = Prepared::new(src, dst, opts.tolerance)?;
    let mut search = Search::new(&prepared, mode, opts.max_nodes);
    search.dfs(0);
    Ok((search.found, search.stats, search.aborted, search.first_violation, prepared.exact()))
}

/// Decide LM-equivalence of two minimal-support states with equal `(n, d, k)`.
///
/// Symbols are tried in ascending order, so the identity is the first
/// candidate and the returned witness is deterministic.
pub fn lm_match(
    src: &MinimalSupportState,
    dst: &MinimalSupportState,
    opts: &SearchOptions,
) -> Result<EquivalenceCertificate> {
    let (mut found, stats, aborted, violation, exact) = run(src, dst, opts, Mode::First)?;
    let verdict = if let Some(w) = found.pop() {
        Verdict::Equivalent(w)
    } else if aborted {
        Verdict::Inconclusive(format!("node budget of {} exhausted", opts.max_nodes))
    } else if stats.solver_calls == 0 && stats.condition_prunes > 0 {
        Verdict::Inequivalent(InequivalenceReason::NecessaryConditionViolated(violation.expect("a prune records it")))
    } else {
        Verdict::Inequivalent(InequivalenceReason::SearchExhausted {
            space: format!(
                "all local permutations on {} sites of dimension {} with exact diagonal solve",
                src.n(),
                src.d()
            ),
        })
    };
    Ok(EquivalenceCertificate { verdict, exact, stats })
}

/// Every LM automorphism found by the complete search, one per permutation
/// tuple; the flag is false when the node budget ran out.
pub fn lm_automorphisms(
    s: &MinimalSupportState,
    opts: &SearchOptions,
) -> Result<(Vec<LocalOperator>, SearchStats, bool)> {
    lm_all(s, s, opts)
}

/// Every LM equivalence from `src` to `dst`, one per permutation tuple.
pub(crate) fn lm_all(
    src: &MinimalSupportState,
    dst: &MinimalSupportState,
    opts: &SearchOptions,
) -> Result<(Vec<LocalOperator>, SearchStats, bool)> {
    let (found, stats, aborted, _, _) = run(src, dst, opts, Mode::All)?;
    Ok((found, stats, !aborted))
}

/// Test the W-statistic separability conditions for a complete permutation
/// tuple `sigma` (`sigma[j][a]` is the image of symbol `a` at site `j`).
///
/// Returns the first violation, or `None` when every condition holds.
pub fn necessary_condition(
    src: &MinimalSupportState,
    dst: &MinimalSupportState,
    sigma: &[Vec<usize>],
    tol: f64,
) -> Result<Option<NecessaryViolation>> {
    if src.k() <= 2 {
        return Err(domain!("the W-statistic conditions need k > 2, got k = {}", src.k()));
    }
    let p = Prepared::new(src, dst, tol)?;
    if sigma.len() != p.n || sigma.iter().any(|s| Monomial::permutation(s.clone()).map_or(true, |m| m.dim() != p.d)) {
        return Err(domain!("sigma must list {} permutations of [{}]", p.n, p.d));
    }
    Ok(p.conditions.iter().find_map(|c| p.violation(c, sigma)))
}
