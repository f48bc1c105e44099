//! Orthogonal arrays and mutually orthogonal Latin hypercubes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::phases::Phase;
use crate::states::construct::words;
use crate::states::{subsets, MinimalSupportState, MultiIndex};

/// Outcome of an orthogonal-array check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OaCheck {
    pub is_oa: bool,
    /// `λ = r / d^k` when the strength property holds.
    pub index: Option<usize>,
}

/// Check that every `k`-column projection of `rows` contains each of the
/// `d^k` tuples equally often.
pub fn check_oa(rows: &[Vec<usize>], d: usize, k: usize) -> Result<OaCheck> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format("ragged orthogonal array rows".into()));
    }
    if let Some(s) = rows.iter().flatten().find(|&&s| s >= d) {
        return Err(Error::Format(format!("symbol {s} outside alphabet of size {d}")));
    }
    let fail = OaCheck { is_oa: false, index: None };
    if k > n {
        return Ok(fail);
    }
    let cells = d.checked_pow(k as u32).ok_or(Error::Overflow("d^k"))?;
    if rows.is_empty() || !rows.len().is_multiple_of(cells) {
        return Ok(fail);
    }
    let lambda = rows.len() / cells;
    let mut counts = vec![0usize; cells];
    for cols in subsets(n, k) {
        counts.iter_mut().for_each(|c| *c = 0);
        for r in rows {
            counts[cols.iter().fold(0, |acc, &c| acc * d + r[c])] += 1;
        }
        if counts.iter().any(|&c| c != lambda) {
            return Ok(fail);
        }
    }
    Ok(OaCheck { is_oa: true, index: Some(lambda) })
}

/// A validated orthogonal array `OA(r, N, d, k)` with rows in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalArray {
    d: usize,
    strength: usize,
    index: usize,
    rows: Vec<Vec<usize>>,
}

impl OrthogonalArray {
    pub fn new(mut rows: Vec<Vec<usize>>, d: usize, strength: usize) -> Result<Self> {
        let check = check_oa(&rows, d, strength)?;
        let index = check.index.ok_or_else(|| {
            Error::Construction(format!("rows do not form an orthogonal array of strength {strength}"))
        })?;
        rows.sort();
        Ok(OrthogonalArray { d, strength, index, rows })
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn runs(&self) -> usize {
        self.rows.len()
    }

    pub fn factors(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn levels(&self) -> usize {
        self.d
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

/// The minimal-support state whose support is the row set of an index-one array.
pub fn oa_to_state(oa: &OrthogonalArray, phases: Option<&[Phase]>) -> Result<MinimalSupportState> {
    if oa.index != 1 {
        return Err(domain!("orthogonal array has index {}, need 1", oa.index));
    }
    if oa.strength == 0 {
        return Err(domain!("strength-0 arrays do not define a uniform state"));
    }
    if let Some(p) = phases {
        if p.len() != oa.runs() {
            return Err(domain!("{} phases for {} rows", p.len(), oa.runs()));
        }
    }
    let terms =
        oa.rows.iter().enumerate().map(|(i, r)| (MultiIndex(r.clone()), phases.map_or(Phase::ONE, |p| p[i]))).collect();
    MinimalSupportState::new(oa.factors(), oa.d, oa.strength, terms)
}

/// Erase phases, keeping the support as an index-one array of strength `k`.
pub fn state_to_oa(s: &MinimalSupportState) -> OrthogonalArray {
    OrthogonalArray { d: s.d(), strength: s.k(), index: 1, rows: s.rows().iter().map(|r| r.0.clone()).collect() }
}

/// A map `[d]^k → [d]^k` stored as a full table indexed by the mixed-radix
/// code of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatinHypercube {
    k: usize,
    d: usize,
    table: Vec<Vec<usize>>,
}

impl LatinHypercube {
    pub fn new(k: usize, d: usize, table: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(domain!("hypercube needs k >= 1 and d >= 1"));
        }
        let cells = d.checked_pow(k as u32).ok_or(Error::Overflow("d^k"))?;
        if table.len() != cells {
            return Err(Error::Format(format!("table has {} cells, expected {cells}", table.len())));
        }
        if table.iter().any(|v| v.len() != k || v.iter().any(|&x| x >= d)) {
            return Err(Error::Format(format!("every cell must be a {k}-tuple over [{d}]")));
        }
        Ok(LatinHypercube { k, d, table })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    fn code(&self, input: &[usize]) -> usize {
        input.iter().fold(0, |acc, &x| acc * self.d + x)
    }

    pub fn get(&self, input: &[usize]) -> &[usize] {
        &self.table[self.code(input)]
    }
}

/// Result of [`check_molh`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MolhCheck {
    pub is_molh: bool,
    pub diagnostic: Option<String>,
}

/// Definitional check: for every set `A` of `s` free input axes (other axes
/// fixed) and every set `B` of `s` output coordinates, the induced map from the
/// free inputs to the `B` outputs is a bijection.
pub fn check_molh(l: &LatinHypercube) -> MolhCheck {
    let (k, d) = (l.k, l.d);
    let distinct: BTreeSet<&Vec<usize>> = l.table.iter().collect();
    if distinct.len() != l.table.len() {
        return MolhCheck { is_molh: false, diagnostic: Some("table is not a bijection".into()) };
    }
    for s in 1..=k {
        let cells = d.pow(s as u32);
        let mut seen = vec![false; cells];
        for free in subsets(k, s) {
            let fixed: Vec<usize> = (0..k).filter(|a| !free.contains(a)).collect();
            for fixed_vals in words(d, k - s) {
                for outs in subsets(k, s) {
                    seen.iter_mut().for_each(|x| *x = false);
                    let mut input = vec![0; k];
                    for (&a, &v) in fixed.iter().zip(&fixed_vals) {
                        input[a] = v;
                    }
                    for free_vals in words(d, s) {
                        for (&a, &v) in free.iter().zip(&free_vals) {
                            input[a] = v;
                        }
                        let out = l.get(&input);
                        let c = outs.iter().fold(0, |acc, &o| acc * d + out[o]);
                        if seen[c] {
                            return MolhCheck {
                                is_molh: false,
                                diagnostic: Some(format!(
                                    "free axes {free:?} with fixed values {fixed_vals:?} are not bijective onto outputs {outs:?}"
                                )),
                            };
                        }
                        seen[c] = true;
                    }
                }
            }
        }
    }
    MolhCheck { is_molh: true, diagnostic: None }
}

/// Read the last `k` coordinates of an `AME(2k, d)` support as a function of the first `k`.
pub fn state_to_molh(s: &MinimalSupportState) -> Result<LatinHypercube> {
    let k = s.k();
    if s.n() != 2 * k {
        return Err(domain!("state_to_molh needs N = 2k, got N={}, k={k}", s.n()));
    }
    let mut table = vec![Vec::new(); s.len()];
    let first: Vec<usize> = (0..k).collect();
    for r in s.rows() {
        table[r.code(&first, s.d())] = r.0[k..].to_vec();
    }
    LatinHypercube::new(k, s.d(), table)
}

/// The unit-phase state `Σ |I, L(I)⟩`.
pub fn molh_to_state(l: &LatinHypercube) -> Result<MinimalSupportState> {
    let terms = words(l.d, l.k)
        .map(|input| {
            let mut row = input.clone();
            row.extend_from_slice(l.get(&input));
            (MultiIndex(row), Phase::ONE)
        })
        .collect();
    MinimalSupportState::new(2 * l.k, l.d, l.k, terms)
}

/// Necessary condition `k <= d - 1` for a `k`-MOLH of size `d`.
pub fn molh_existence_bound(k: usize, d: usize) -> Result<bool> {
    if k <= 1 {
        return Err(domain!("existence bound is stated for k > 1"));
    }
    Ok(k < d)
}

/// Necessary condition `s <= d / (1 + k^{1/(k-1)})` for a sub-MOLH of size `s`
/// to extend to size `d`, evaluated exactly as `k·s^{k-1} <= (d-s)^{k-1}`.
pub fn extension_bound(s: usize, d: usize, k: usize) -> Result<bool> {
    if k <= 1 || s == 0 || s >= d {
        return Err(domain!("extension bound needs k > 1 and 0 < s < d"));
    }
    let e = (k - 1) as u32;
    let lhs = (s as u128).checked_pow(e).and_then(|x| x.checked_mul(k as u128));
    let rhs = ((d - s) as u128).checked_pow(e);
    match (lhs, rhs) {
        (Some(l), Some(r)) => Ok(l <= r),
        _ => Err(Error::Overflow("extension bound")),
    }
}

/// Whether `(k, d)` lies in the regime `d < (k+1)(1 + k^{1/(k-1)})` (`d < 3`
/// for `k = 1`) where the monomial-times-Butson form of local equivalences holds.
pub fn small_regime(k: usize, d: usize) -> Result<bool> {
    if k == 0 {
        return Err(domain!("small_regime needs k >= 1"));
    }
    if k == 1 {
        return Ok(d < 3);
    }
    if d <= k + 1 {
        return Ok(true);
    }
    let e = (k - 1) as u32;
    let lhs = ((d - k - 1) as u128).checked_pow(e);
    let rhs = ((k + 1) as u128).checked_pow(e).and_then(|x| x.checked_mul(k as u128));
    match (lhs, rhs) {
        (Some(l), Some(r)) => Ok(l < r),
        _ => Err(Error::Overflow("small regime bound")),
    }
}

/// Outcome of a bounded search for a `k`-MOLH of size `d`.
#[derive(Clone, Debug)]
pub struct MolhSearch {
    pub found: Option<LatinHypercube>,
    /// True when the search space was exhausted (so `found == None` is a proof).
    pub complete: bool,
    pub nodes: u64,
}

/// Backtracking search for a `k`-MOLH of size `d`.
///
/// Output symbols are normalised so that `L(i, 0, …, 0) = (i, …, i)`, which
/// is no loss of generality because each output coordinate may be relabelled
/// independently. The search fills cells in lexicographic order and keeps,
/// for every `k`-subset of the `2k` columns other than the input block, the set
/// of projected tuples already used.
pub fn search_molh(k: usize, d: usize, max_nodes: u64) -> Result<MolhSearch> {
    if k == 0 || d == 0 {
        return Err(domain!("search needs k >= 1 and d >= 1"));
    }
    let cells = d
        .checked_pow(k as u32)
        .filter(|&c| c <= 1 << 16)
        .ok_or_else(|| Error::Unsupported("MOLH search limited to 65536 cells".into()))?;
    let inputs: Vec<Vec<usize>> = words(d, k).collect();
    let outputs: Vec<Vec<usize>> = words(d, k).collect();
    let input_block: Vec<usize> = (0..k).collect();
    let col_sets: Vec<Vec<usize>> = subsets(2 * k, k).into_iter().filter(|c| *c != input_block).collect();
    let mut used = vec![vec![false; cells]; col_sets.len()];
    let mut table: Vec<Option<usize>> = vec![None; cells];
    let stride = d.pow((k - 1) as u32);
    let mut nodes = 0u64;

    let project = |cols: &[usize], input: &[usize], out: &[usize]| -> usize {
        cols.iter().fold(0, |acc, &c| acc * d + if c < k { input[c] } else { out[c - k] })
    };

    let place = |used: &mut Vec<Vec<bool>>, cell: usize, o: usize, on: bool| -> bool {
        if on {
            let ok = col_sets.iter().zip(used.iter()).all(|(cols, u)| !u[project(cols, &inputs[cell], &outputs[o])]);
            if !ok {
                return false;
            }
        }
        for (cols, u) in col_sets.iter().zip(used.iter_mut()) {
            u[project(cols, &inputs[cell], &outputs[o])] = on;
        }
        true
    };

    // normalisation: cell (i, 0, …, 0) has code i·stride and maps to (i, …, i)
    let diag_out = |i: usize| (0..k).fold(0, |acc, _| acc * d + i);
    for i in 0..d {
        let cell = i * stride;
        if !place(&mut used, cell, diag_out(i), true) {
            return Ok(MolhSearch { found: None, complete: true, nodes });
        }
        table[cell] = Some(diag_out(i));
    }
    let free: Vec<usize> = (0..cells).filter(|&c| table[c].is_none()).collect();
    let mut choice = vec![0usize; free.len()];
    let mut depth = 0usize;
    loop {
        if depth == free.len() {
            let t = table.iter().map(|o| outputs[o.unwrap()].clone()).collect();
            return Ok(MolhSearch { found: Some(LatinHypercube::new(k, d, t)?), complete: true, nodes });
        }
        let cell = free[depth];
        let mut placed = false;
        while choice[depth] < cells {
            let o = choice[depth];
            choice[depth] += 1;
            nodes += 1;
            if nodes > max_nodes {
                return Ok(MolhSearch { found: None, complete: false, nodes });
            }
            if place(&mut used, cell, o, true) {
                table[cell] = Some(o);
                placed = true;
                break;
            }
        }
        if placed {
            depth += 1;
            if depth < free.len() {
                choice[depth] = 0;
            }
            continue;
        }
        if depth == 0 {
            return Ok(MolhSearch { found: None, complete: true, nodes });
        }
        depth -= 1;
        let prev = free[depth];
        let o = table[prev].take().unwrap();
        place(&mut used, prev, o, false);
    }
}

/// An axis-aligned block `S_1 × … × S_k` and its image `T_1 × … × T_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubBlock {
    pub input: Vec<Vec<usize>>,
    pub output: Vec<Vec<usize>>,
}

/// Result of [`find_sub_molh`].
#[derive(Clone, Debug)]
pub struct SubMolhReport {
    pub blocks: Vec<SubBlock>,
    /// False when the candidate count exceeded the budget and the scan stopped early.
    pub complete: bool,
    pub examined: u64,
}

/// Default number of candidate blocks examined by [`find_sub_molh`].
pub const SUB_MOLH_BUDGET: u64 = 10_000_000;

/// All blocks `S_1 × … × S_k` with `|S_i| = s` that `L` maps onto a block
/// `T_1 × … × T_k` with `|T_j| = s`.
pub fn find_sub_molh(l: &LatinHypercube, s: usize, budget: u64) -> Result<SubMolhReport> {
    if s == 0 || s > l.d {
        return Err(domain!("need 1 <= s <= d"));
    }
    let choices = subsets(l.d, s);
    let m = choices.len();
    let total = (m as u128).checked_pow(l.k as u32).unwrap_or(u128::MAX);
    let mut report = SubMolhReport { blocks: Vec::new(), complete: total <= budget as u128, examined: 0 };
    let mut pick = vec![0usize; l.k];
    'outer: loop {
        if report.examined >= budget {
            report.complete = false;
            break;
        }
        report.examined += 1;
        let sets: Vec<&Vec<usize>> = pick.iter().map(|&p| &choices[p]).collect();
        let mut images: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); l.k];
        let mut ok = true;
        let mut input = vec![0; l.k];
        for w in words(s, l.k) {
            for (a, &x) in w.iter().enumerate() {
                input[a] = sets[a][x];
            }
            for (j, &y) in l.get(&input).iter().enumerate() {
                images[j].insert(y);
                if images[j].len() > s {
                    ok = false;
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            report.blocks.push(SubBlock {
                input: sets.into_iter().cloned().collect(),
                output: images.into_iter().map(|t| t.into_iter().collect()).collect(),
            });
        }
        let mut i = l.k;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < m {
                break;
            }
            pick[i] = 0;
        }
    }
    Ok(report)
}

/// Product hypercube of size `d_a·d_b` with levels paired as `d_b·x + y`.
pub fn tensor_molh(a: &LatinHypercube, b: &LatinHypercube) -> Result<LatinHypercube> {
    if a.k != b.k {
        return Err(domain!("hypercube dimensions differ: {} vs {}", a.k, b.k));
    }
    let (k, db) = (a.k, b.d);
    let d = a.d * db;
    let table = words(d, k)
        .map(|input| {
            let xa: Vec<usize> = input.iter().map(|v| v / db).collect();
            let xb: Vec<usize> = input.iter().map(|v| v % db).collect();
            a.get(&xa).iter().zip(b.get(&xb)).map(|(x, y)| db * x + y).collect()
        })
        .collect();
    LatinHypercube::new(k, d, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{construct_ame43, construct_ame44, construct_ghz};

    fn fig1() -> Vec<Vec<usize>> {
        words(3, 2).map(|w| vec![w[0], w[1], (w[0] + w[1]) % 3, (2 * w[0] + w[1]) % 3]).collect()
    }

    #[test]
    fn oa_checks() {
        assert_eq!(check_oa(&fig1(), 3, 2).unwrap(), OaCheck { is_oa: true, index: Some(1) });
        assert_eq!(check_oa(&fig1(), 3, 3).unwrap(), OaCheck { is_oa: false, index: None });
        assert_eq!(check_oa(&[vec![0, 1, 2]], 3, 0).unwrap(), OaCheck { is_oa: true, index: Some(1) });
        assert!(matches!(check_oa(&[vec![0, 1], vec![0]], 2, 1), Err(Error::Format(_))));
    }

    #[test]
    fn oa_state_round_trip() {
        let oa = OrthogonalArray::new(fig1(), 3, 2).unwrap();
        let s = oa_to_state(&oa, None).unwrap();
        assert_eq!(s, construct_ame43());
        assert_eq!(state_to_oa(&s), oa);
        let ghz = OrthogonalArray::new(vec![vec![0; 3], vec![1; 3]], 2, 1).unwrap();
        assert_eq!(oa_to_state(&ghz, None).unwrap(), construct_ghz(3, 2).unwrap());
        let ame44 = state_to_oa(&construct_ame44());
        assert!(check_oa(ame44.rows(), 4, 2).unwrap().is_oa);
    }

    #[test]
    fn mols3_from_ame43() {
        let l = state_to_molh(&construct_ame43()).unwrap();
        let expected = [[0, 0], [1, 1], [2, 2], [1, 2], [2, 0], [0, 1], [2, 1], [0, 2], [1, 0]];
        for (cell, p) in l.table().iter().zip(expected) {
            assert_eq!(cell.as_slice(), p);
        }
        assert!(check_molh(&l).is_molh);
        assert_eq!(molh_to_state(&l).unwrap(), construct_ame43());
    }

    #[test]
    fn identity_is_not_molh() {
        let id = LatinHypercube::new(2, 3, words(3, 2).collect()).unwrap();
        let c = check_molh(&id);
        assert!(!c.is_molh && c.diagnostic.is_some());
    }

    #[test]
    fn bounds() {
        assert!(molh_existence_bound(2, 3).unwrap());
        assert!(!molh_existence_bound(3, 3).unwrap());
        assert!(!molh_existence_bound(2, 2).unwrap());
        assert!(extension_bound(3, 9, 2).unwrap());
        assert!(!extension_bound(4, 9, 2).unwrap());
        let thresholds = [(1, 3), (2, 9), (3, 11), (4, 13)];
        for (k, t) in thresholds {
            assert!(small_regime(k, t - 1).unwrap());
            assert!(!small_regime(k, t).unwrap());
        }
    }

    #[test]
    fn mols3_has_no_size_two_block() {
        let l = state_to_molh(&construct_ame43()).unwrap();
        let r = find_sub_molh(&l, 2, SUB_MOLH_BUDGET).unwrap();
        assert!(r.complete && r.blocks.is_empty() && r.examined == 9);
        let full = find_sub_molh(&l, 3, SUB_MOLH_BUDGET).unwrap();
        assert_eq!(full.blocks.len(), 1);
    }

    #[test]
    fn molh_search_finds_mols3_and_rejects_k_equal_d() {
        let r = search_molh(2, 3, 1_000_000).unwrap();
        assert!(r.complete && check_molh(r.found.as_ref().unwrap()).is_molh);
        let r = search_molh(2, 2, 1_000_000).unwrap();
        assert!(r.complete && r.found.is_none());
    }
}
