use alloc::vec;
use alloc::vec::Vec;

use super::{MinimalSupportState, MultiIndex, SparseState};
use crate::error::{domain, Error, Result};
use crate::phases::{ComplexAmp, Phase};

/// `(1/sqrt(d)) Σ_i |i, …, i⟩` on `n` parties.
pub fn construct_ghz(n: usize, d: usize) -> Result<MinimalSupportState> {
    if n < 2 || d < 2 {
        return Err(domain!("GHZ state needs n >= 2 and d >= 2"));
    }
    let terms = (0..d).map(|i| (MultiIndex(vec![i; n]), Phase::ONE)).collect();
    MinimalSupportState::new(n, d, 1, terms)
}

pub(crate) fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|p| p * p <= d).all(|p| !d.is_multiple_of(p))
}

/// Iterate over `[d]^k` in lexicographic order.
pub(crate) fn words(d: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = d.pow(k as u32);
    (0..total).map(move |mut c| {
        let mut w = vec![0; k];
        for slot in w.iter_mut().rev() {
            *slot = c % d;
            c /= d;
        }
        w
    })
}

/// Linear code state over `Z_d` for prime `d`.
///
/// `positions[p]` holds the coefficients of party `p` as a linear form in the
/// `k` free symbols, so `[[1,0],[0,1],[1,1],[2,1]]` yields
/// `Σ |i, j, i+j, 2i+j⟩`.
pub fn construct_linear(d: usize, positions: &[Vec<usize>]) -> Result<MinimalSupportState> {
    if !is_prime(d) {
        return Err(domain!("construct_linear needs a prime local dimension, got {d}"));
    }
    let n = positions.len();
    let k = positions.first().map_or(0, Vec::len);
    if k == 0 || positions.iter().any(|p| p.len() != k) {
        return Err(domain!("every position needs the same nonzero number of coefficients"));
    }
    let terms = words(d, k)
        .map(|free| {
            let row =
                positions.iter().map(|coef| coef.iter().zip(&free).map(|(c, x)| c * x).sum::<usize>() % d).collect();
            (MultiIndex(row), Phase::ONE)
        })
        .collect();
    MinimalSupportState::new(n, d, k, terms)
}

/// `Σ |i, j, i+j, 2i+j⟩` over `Z_3`.
pub fn construct_ame43() -> MinimalSupportState {
    construct_linear(3, &[vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]]).expect("AME(4,3) is a valid linear code")
}

/// `Σ |i, j, i+j, 2i+j, 3i+j⟩` over `Z_d`, minimal support for prime `d >= 5`.
pub fn construct_ame5_prime(d: usize) -> Result<MinimalSupportState> {
    if d < 5 {
        return Err(domain!("the five-party linear code is 2-uniform only for d >= 5"));
    }
    construct_linear(d, &[vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1], vec![3, 1]])
}

/// The same five-party linear formula for any `d`, without validation.
pub fn ame5_linear_raw(d: usize) -> Result<SparseState> {
    if d < 2 {
        return Err(domain!("local dimension must be at least 2"));
    }
    let terms = words(d, 2).map(|w| {
        let (i, j) = (w[0], w[1]);
        let row = vec![i, j, (i + j) % d, (2 * i + j) % d, (3 * i + j) % d];
        (MultiIndex(row), ComplexAmp::unit(Phase::ONE))
    });
    SparseState::new(5, d, terms)
}

const M1: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
const M2: [[usize; 4]; 4] = [[0, 2, 3, 1], [1, 3, 2, 0], [2, 0, 1, 3], [3, 1, 0, 2]];

/// `Σ |i, j, M¹_{ij}, M²_{ij}⟩` with the GF(4) Latin squares `M¹ = i + j`,
/// `M² = i + ωj`.
pub fn construct_ame44() -> MinimalSupportState {
    let terms = words(4, 2)
        .map(|w| {
            let (i, j) = (w[0], w[1]);
            (MultiIndex(vec![i, j, M1[i][j], M2[i][j]]), Phase::ONE)
        })
        .collect();
    MinimalSupportState::new(4, 4, 2, terms).expect("AME(4,4) tables form an OA")
}

/// GF(4) with elements `0, 1, ω, ω²` labelled `0..4`.
fn gf4_mul(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        return 0;
    }
    const EXP: [usize; 3] = [1, 2, 3];
    let log = |x: usize| x - 1;
    EXP[(log(a) + log(b)) % 3]
}

/// The hexacode state `Σ |a, b, c, f(1), f(ω), f(ω²)⟩`, `f(x) = ax² + bx + c`
/// over GF(4); a 3-uniform AME(6,4) state of minimal support.
pub fn construct_ame64() -> MinimalSupportState {
    let terms = words(4, 3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let f = |x: usize| gf4_mul(a, gf4_mul(x, x)) ^ gf4_mul(b, x) ^ c;
            (MultiIndex(vec![a, b, c, f(1), f(2), f(3)]), Phase::ONE)
        })
        .collect();
    MinimalSupportState::new(6, 4, 3, terms).expect("hexacode is MDS")
}

/// `Σ ω^{(3i+j)k} |i, j, i+j, 2i+j+k, k⟩`, a 2-uniform five-party state with
/// `d³` terms.
pub fn construct_ame5_phased(d: usize) -> Result<SparseState> {
    if d < 2 {
        return Err(domain!("local dimension must be at least 2"));
    }
    let terms = words(d, 3).map(|w| {
        let (i, j, k) = (w[0], w[1], w[2]);
        let row = vec![i, j, (i + j) % d, (2 * i + j + k) % d, k];
        let phase = Phase::rational((((3 * i + j) % d) * k) as i128, d as u64).unwrap();
        (MultiIndex(row), ComplexAmp::unit(phase))
    });
    SparseState::new(5, d, terms)
}

/// Tensor composition with level pairing `(x, y) ↦ d_b·x + y`.
pub fn tensor_compose(a: &MinimalSupportState, b: &MinimalSupportState) -> Result<MinimalSupportState> {
    if a.n() != b.n() {
        return Err(domain!("party counts differ: {} vs {}", a.n(), b.n()));
    }
    if a.k() != b.k() {
        return Err(Error::Domain(alloc::format!(
            "composition of minimal-support states needs equal k, got {} and {}",
            a.k(),
            b.k()
        )));
    }
    let db = b.d();
    let mut terms = Vec::with_capacity(a.len() * b.len());
    for (ia, pa) in a.terms() {
        for (ib, pb) in b.terms() {
            let row = ia.0.iter().zip(&ib.0).map(|(x, y)| db * x + y).collect();
            terms.push((MultiIndex(row), *pa * *pb));
        }
    }
    MinimalSupportState::new(a.n(), a.d() * db, a.k(), terms)
}

/// Tensor composition of general sparse states.
pub fn tensor_compose_sparse(a: &SparseState, b: &SparseState) -> Result<SparseState> {
    if a.n() != b.n() {
        return Err(domain!("party counts differ: {} vs {}", a.n(), b.n()));
    }
    let db = b.d();
    let mut terms = Vec::with_capacity(a.support_count() * b.support_count());
    for (ia, xa) in a.terms() {
        for (ib, xb) in b.terms() {
            let row = ia.0.iter().zip(&ib.0).map(|(x, y)| db * x + y).collect();
            let amp = match (xa, xb) {
                (ComplexAmp::Exact { weight: wa, phase: pa }, ComplexAmp::Exact { weight: wb, phase: pb }) => {
                    ComplexAmp::Exact { weight: wa * wb, phase: *pa * *pb }
                }
                _ => ComplexAmp::Float(xa.to_complex() * xb.to_complex()),
            };
            terms.push((MultiIndex(row), amp));
        }
    }
    SparseState::new(a.n(), a.d() * db, terms)
}
