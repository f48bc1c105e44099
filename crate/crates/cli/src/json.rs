//! JSON interchange formats.
//!
//! Each `*Json` type mirrors a core object; `to_json`/`from_json` pairs
//! convert in both directions. Emitting a parsed document again yields the
//! same bytes once the input is canonical (reduced turns, sorted terms).

use ame_core::butson::ButsonMatrix;
use ame_core::designs::{LatinHypercube, OrthogonalArray};
use ame_core::equivalence::{EquivalenceCertificate, InequivalenceReason, NecessaryViolation, SearchStats, Verdict};
use ame_core::operator::Monomial;
use ame_core::{ComplexAmp, LocalOperator, MultiIndex, Phase, SiteMatrix, SparseState};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnJson {
    pub num: i64,
    pub den: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseJson {
    Turn { turn: TurnJson },
    Real { turn_real: f64 },
}

pub fn phase_to_json(p: Phase) -> PhaseJson {
    match p {
        Phase::Rational(t) => PhaseJson::Turn { turn: TurnJson { num: t.num() as i64, den: t.den() } },
        Phase::Real(t) => PhaseJson::Real { turn_real: t },
    }
}

pub fn phase_from_json(p: &PhaseJson) -> CliResult<Phase> {
    match *p {
        PhaseJson::Turn { turn } => Ok(Phase::rational(turn.num.into(), turn.den)?),
        PhaseJson::Real { turn_real } if turn_real.is_finite() => Ok(Phase::real(turn_real)),
        PhaseJson::Real { turn_real } => {
            Err(ame_core::Error::Format(format!("turn_real must be finite, got {turn_real}")).into())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub idx: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseJson>,
    /// Squared modulus relative to the other exact terms; omitted when 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
    /// Floating amplitude `[re, im]`, exclusive with `phase`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub n: usize,
    pub d: usize,
    pub terms: Vec<TermJson>,
}

pub fn state_to_json(s: &SparseState) -> StateJson {
    let terms = s
        .terms()
        .iter()
        .map(|(idx, amp)| match *amp {
            ComplexAmp::Exact { weight, phase } => TermJson {
                idx: idx.0.clone(),
                phase: Some(phase_to_json(phase)),
                weight: (weight != 1).then_some(weight),
                amp: None,
            },
            ComplexAmp::Float(c) => TermJson { idx: idx.0.clone(), phase: None, weight: None, amp: Some([c.re, c.im]) },
        })
        .collect();
    StateJson { n: s.n(), d: s.d(), terms }
}

pub fn state_from_json(j: &StateJson) -> CliResult<SparseState> {
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        let amp = match (t.amp, t.phase, t.weight) {
            (Some([re, im]), None, None) => ComplexAmp::Float(Complex64::new(re, im)),
            (Some(_), _, _) => {
                return Err(format_err(format!("term {:?} mixes \"amp\" with \"phase\"/\"weight\"", t.idx)));
            }
            (None, phase, weight) => {
                let phase = phase.as_ref().map(phase_from_json).transpose()?.unwrap_or(Phase::ONE);
                ComplexAmp::Exact { weight: weight.unwrap_or(1), phase }
            }
        };
        terms.push((MultiIndex::new(t.idx.clone()), amp));
    }
    Ok(SparseState::new(j.n, j.d, terms)?)
}

fn format_err(msg: String) -> CliError {
    ame_core::Error::Format(msg).into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OaJson {
    pub d: usize,
    pub strength: usize,
    pub rows: Vec<Vec<usize>>,
}

pub fn oa_to_json(oa: &OrthogonalArray) -> OaJson {
    OaJson { d: oa.levels(), strength: oa.strength(), rows: oa.rows().to_vec() }
}

pub fn oa_from_json(j: &OaJson) -> CliResult<OrthogonalArray> {
    Ok(OrthogonalArray::new(j.rows.clone(), j.d, j.strength)?)
}

/// A hypercube as its table of output tuples, inputs in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MolhJson {
    pub k: usize,
    pub d: usize,
    pub table: Vec<Vec<usize>>,
}

pub fn molh_to_json(l: &LatinHypercube) -> MolhJson {
    MolhJson { k: l.k(), d: l.d(), table: l.table().to_vec() }
}

pub fn molh_from_json(j: &MolhJson) -> CliResult<LatinHypercube> {
    Ok(LatinHypercube::new(j.k, j.d, j.table.clone())?)
}

/// A Butson matrix: rows of unscaled phases.
pub type MatrixJson = Vec<Vec<PhaseJson>>;

pub fn butson_to_json(b: &ButsonMatrix) -> MatrixJson {
    let d = b.order();
    (0..d).map(|r| (0..d).map(|c| phase_to_json(b.phase(r, c))).collect()).collect()
}

pub fn butson_from_json(m: &MatrixJson) -> CliResult<ButsonMatrix> {
    let d = m.len();
    if m.iter().any(|row| row.len() != d) {
        return Err(format_err(format!("matrix is not square ({d} rows)")));
    }
    let phases = m.iter().flatten().map(phase_from_json).collect::<CliResult<Vec<_>>>()?;
    Ok(ButsonMatrix::from_phases(d, &phases)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteJson {
    /// `|a⟩ ↦ phases[a]·|perm[a]⟩`.
    Monomial {
        perm: Vec<usize>,
        phases: Vec<PhaseJson>,
    },
    /// Entry `cells[b][a] / sqrt(norm)` maps `|a⟩` to `|b⟩`; `null` is zero.
    Phased {
        dim: usize,
        norm: u64,
        cells: Vec<Vec<Option<PhaseJson>>>,
    },
    Dense {
        dense: Vec<Vec<[f64; 2]>>,
    },
}

pub fn site_to_json(m: &SiteMatrix) -> SiteJson {
    if let Some(mono) = m.as_monomial() {
        return SiteJson::Monomial {
            perm: mono.perm().to_vec(),
            phases: mono.phases().iter().map(|&p| phase_to_json(p)).collect(),
        };
    }
    let d = m.dim();
    match m.phase_cells() {
        Some((norm, cells)) => SiteJson::Phased {
            dim: d,
            norm,
            cells: cells.chunks(d).map(|row| row.iter().map(|c| c.map(phase_to_json)).collect()).collect(),
        },
        None => SiteJson::Dense {
            dense: m.to_dense().chunks(d).map(|row| row.iter().map(|c| [c.re, c.im]).collect()).collect(),
        },
    }
}

pub fn site_from_json(j: &SiteJson) -> CliResult<SiteMatrix> {
    match j {
        SiteJson::Monomial { perm, phases } => {
            let phases = phases.iter().map(phase_from_json).collect::<CliResult<Vec<_>>>()?;
            Ok(SiteMatrix::monomial(Monomial::new(perm.clone(), phases)?))
        }
        SiteJson::Phased { dim, norm, cells } => {
            if cells.len() != *dim || cells.iter().any(|r| r.len() != *dim) {
                return Err(format_err(format!("phased site matrix must be {dim}x{dim}")));
            }
            let flat = cells
                .iter()
                .flatten()
                .map(|c| c.as_ref().map(phase_from_json).transpose())
                .collect::<CliResult<Vec<_>>>()?;
            Ok(SiteMatrix::phased(*dim, *norm, flat)?)
        }
        SiteJson::Dense { dense } => {
            let dim = dense.len();
            if dense.iter().any(|r| r.len() != dim) {
                return Err(format_err("dense site matrix is not square".into()));
            }
            let flat = dense.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
            Ok(SiteMatrix::dense(dim, flat)?)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub global: PhaseJson,
    pub sites: Vec<SiteJson>,
}

pub fn operator_to_json(op: &LocalOperator) -> OperatorJson {
    OperatorJson { global: phase_to_json(op.global()), sites: op.sites().iter().map(site_to_json).collect() }
}

pub fn operator_from_json(j: &OperatorJson) -> CliResult<LocalOperator> {
    let sites = j.sites.iter().map(site_from_json).collect::<CliResult<Vec<_>>>()?;
    Ok(LocalOperator::new(sites, phase_from_json(&j.global)?)?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsJson {
    pub nodes: u64,
    pub support_conflicts: u64,
    pub condition_prunes: u64,
    pub solver_calls: u64,
    pub butson_candidates: u64,
}

impl From<SearchStats> for StatsJson {
    fn from(s: SearchStats) -> Self {
        StatsJson {
            nodes: s.nodes,
            support_conflicts: s.support_conflicts,
            condition_prunes: s.condition_prunes,
            solver_calls: s.solver_calls,
            butson_candidates: s.butson_candidates,
        }
    }
}

impl From<StatsJson> for SearchStats {
    fn from(s: StatsJson) -> Self {
        SearchStats {
            nodes: s.nodes,
            support_conflicts: s.support_conflicts,
            condition_prunes: s.condition_prunes,
            solver_calls: s.solver_calls,
            butson_candidates: s.butson_candidates,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReasonJson {
    SearchExhausted {
        space: String,
    },
    NecessaryConditionViolated {
        positions: Vec<usize>,
        coordinates: [usize; 2],
        symbols: Vec<usize>,
        values: [PhaseJson; 4],
        detail: String,
    },
    InvariantMismatch {
        detail: String,
    },
    ReductionFilterFailed {
        subset: Vec<usize>,
    },
    SupportCounting {
        steps: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum VerdictJson {
    Equivalent { witness: OperatorJson },
    Inequivalent { reason: ReasonJson },
    Inconclusive { detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(flatten)]
    pub verdict: VerdictJson,
    pub exact: bool,
    pub stats: StatsJson,
}

fn reason_to_json(r: &InequivalenceReason) -> ReasonJson {
    match r {
        InequivalenceReason::SearchExhausted { space } => ReasonJson::SearchExhausted { space: space.clone() },
        InequivalenceReason::NecessaryConditionViolated(v) => ReasonJson::NecessaryConditionViolated {
            positions: v.positions.clone(),
            coordinates: [v.coordinates.0, v.coordinates.1],
            symbols: v.symbols.clone(),
            values: v.values.map(phase_to_json),
            detail: v.detail.clone(),
        },
        InequivalenceReason::InvariantMismatch(detail) => ReasonJson::InvariantMismatch { detail: detail.clone() },
        InequivalenceReason::ReductionFilterFailed { subset } => {
            ReasonJson::ReductionFilterFailed { subset: subset.clone() }
        }
        InequivalenceReason::SupportCounting { steps } => ReasonJson::SupportCounting { steps: steps.clone() },
    }
}

fn reason_from_json(r: &ReasonJson) -> CliResult<InequivalenceReason> {
    Ok(match r {
        ReasonJson::SearchExhausted { space } => InequivalenceReason::SearchExhausted { space: space.clone() },
        ReasonJson::NecessaryConditionViolated { positions, coordinates, symbols, values, detail } => {
            let [a, b, c, e] = values;
            InequivalenceReason::NecessaryConditionViolated(NecessaryViolation {
                positions: positions.clone(),
                coordinates: (coordinates[0], coordinates[1]),
                symbols: symbols.clone(),
                values: [phase_from_json(a)?, phase_from_json(b)?, phase_from_json(c)?, phase_from_json(e)?],
                detail: detail.clone(),
            })
        }
        ReasonJson::InvariantMismatch { detail } => InequivalenceReason::InvariantMismatch(detail.clone()),
        ReasonJson::ReductionFilterFailed { subset } => {
            InequivalenceReason::ReductionFilterFailed { subset: subset.clone() }
        }
        ReasonJson::SupportCounting { steps } => InequivalenceReason::SupportCounting { steps: steps.clone() },
    })
}

pub fn certificate_to_json(c: &EquivalenceCertificate) -> CertificateJson {
    let verdict = match &c.verdict {
        Verdict::Equivalent(w) => VerdictJson::Equivalent { witness: operator_to_json(w) },
        Verdict::Inequivalent(r) => VerdictJson::Inequivalent { reason: reason_to_json(r) },
        Verdict::Inconclusive(detail) => VerdictJson::Inconclusive { detail: detail.clone() },
    };
    CertificateJson { verdict, exact: c.exact, stats: c.stats.into() }
}

pub fn certificate_from_json(j: &CertificateJson) -> CliResult<EquivalenceCertificate> {
    let verdict = match &j.verdict {
        VerdictJson::Equivalent { witness } => Verdict::Equivalent(operator_from_json(witness)?),
        VerdictJson::Inequivalent { reason } => Verdict::Inequivalent(reason_from_json(reason)?),
        VerdictJson::Inconclusive { detail } => Verdict::Inconclusive(detail.clone()),
    };
    Ok(EquivalenceCertificate { verdict, exact: j.exact, stats: j.stats.into() })
}

/// Parse a document, naming `origin` in the error.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { origin: origin.into(), source })
}

pub fn read<T: DeserializeOwned>(path: &std::path::Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_encodings() {
        let half = phase_to_json(Phase::rational(1, 2).unwrap());
        assert_eq!(serde_json::to_string(&half).unwrap(), r#"{"turn":{"num":1,"den":2}}"#);
        let real: PhaseJson = serde_json::from_str(r#"{"turn_real":0.25}"#).unwrap();
        assert!(!phase_from_json(&real).unwrap().is_exact());
        let unreduced: PhaseJson = serde_json::from_str(r#"{"turn":{"num":-2,"den":4}}"#).unwrap();
        let p = phase_from_json(&unreduced).unwrap();
        assert_eq!(phase_to_json(p), PhaseJson::Turn { turn: TurnJson { num: 1, den: 2 } });
        let zero_den: PhaseJson = serde_json::from_str(r#"{"turn":{"num":1,"den":0}}"#).unwrap();
        assert!(phase_from_json(&zero_den).is_err());
    }

    #[test]
    fn term_with_amp_and_phase_is_rejected() {
        let j: StateJson =
            parse(r#"{"n":1,"d":2,"terms":[{"idx":[0],"amp":[1.0,0.0],"phase":{"turn_real":0.5}}]}"#, "t").unwrap();
        assert!(state_from_json(&j).is_err());
    }

    #[test]
    fn missing_phase_defaults_to_one() {
        let j: StateJson = parse(r#"{"n":2,"d":2,"terms":[{"idx":[1,1]},{"idx":[0,0]}]}"#, "t").unwrap();
        let s = state_from_json(&j).unwrap();
        let back = state_to_json(&s);
        assert_eq!(back.terms[0].idx, vec![0, 0]);
        assert_eq!(back.terms[1].phase, Some(phase_to_json(Phase::ONE)));
    }

    #[test]
    fn certificate_tag_is_flat() {
        let c = EquivalenceCertificate {
            verdict: Verdict::Inconclusive("budget".into()),
            exact: true,
            stats: SearchStats::default(),
        };
        let text = serde_json::to_string(&certificate_to_json(&c)).unwrap();
        assert!(text.starts_with(r#"{"verdict":"inconclusive","detail":"budget""#), "{text}");
        let back: CertificateJson = parse(&text, "t").unwrap();
        assert_eq!(certificate_from_json(&back).unwrap(), c);
    }
}
