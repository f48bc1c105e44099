//! Exact integer combinations of `N`-th roots of unity.
//!
//! A [`RootSum`] is a coefficient vector over `ζ^0, …, ζ^{N-1}`. It vanishes
//! exactly when the polynomial `Σ c_e x^e` is divisible by the cyclotomic
//! polynomial `Φ_N`, which is the test used for every orthogonality and
//! density-matrix comparison in exact mode.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{domain, Result};
use crate::phases::Turn;

fn mobius(mut n: u64) -> i8 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Coefficients of `Φ_n`, lowest degree first, from
/// `Φ_n = Π_{m | n} (x^m - 1)^{μ(n/m)}`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    let divisors: Vec<u64> = (1..=n).filter(|m| n.is_multiple_of(*m)).collect();
    let mut poly: Vec<i128> = vec![1];
    // multiply by x^m - 1
    for &m in divisors.iter().filter(|&&m| mobius(n / m) == 1) {
        let m = m as usize;
        let mut next = vec![0i128; poly.len() + m];
        for (i, &c) in poly.iter().enumerate() {
            next[i] -= c;
            next[i + m] += c;
        }
        poly = next;
    }
    // divide by x^m - 1: q_i = q_{i-m} - p_i, read from the low end
    for &m in divisors.iter().filter(|&&m| mobius(n / m) == -1) {
        let m = m as usize;
        let len = poly.len() - m;
        let mut quot = vec![0i128; len];
        for i in 0..len {
            let prev = if i >= m { quot[i - m] } else { 0 };
            quot[i] = prev - poly[i];
        }
        poly = quot;
    }
    poly.into_iter().map(|c| c as i64).collect()
}

fn totient(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// The ring `Z[ζ_N]` presented as `Z[x]/Φ_N`.
///
/// Vanishing tests first rewrite a sum in the smallest order that contains
/// all of its exponent differences, so large composite orders stay cheap.
/// Cyclotomic polynomials are computed on demand and cached.
#[derive(Clone, Debug)]
pub struct CyclotomicRing {
    order: u64,
    cache: RefCell<BTreeMap<u64, Vec<i64>>>,
}

impl CyclotomicRing {
    pub fn new(order: u64) -> Result<CyclotomicRing> {
        if order == 0 {
            return Err(domain!("cyclotomic ring of order 0"));
        }
        Ok(CyclotomicRing { order, cache: RefCell::new(BTreeMap::new()) })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn degree(&self) -> usize {
        totient(self.order) as usize
    }

    fn phi(&self, m: u64) -> Vec<i64> {
        self.cache.borrow_mut().entry(m).or_insert_with(|| cyclotomic_polynomial(m)).clone()
    }

    fn reduce_in(&self, m: u64, terms: impl Iterator<Item = (u64, i64)>) -> Vec<i128> {
        let phi = self.phi(m);
        let deg = phi.len() - 1;
        let mut r: Vec<i128> = vec![0; (m as usize).max(deg)];
        for (e, c) in terms {
            r[(e % m) as usize] += c as i128;
        }
        for i in (deg..r.len()).rev() {
            let c = r[i];
            if c != 0 {
                for (j, &pj) in phi.iter().enumerate() {
                    r[i - deg + j] -= c * pj as i128;
                }
            }
        }
        r.truncate(deg);
        r
    }

    /// Canonical representative of `Σ counts[e] ζ^e`, of length `degree()`.
    pub fn reduce(&self, counts: &[i64]) -> Vec<i128> {
        let terms = counts.iter().enumerate().map(|(e, &c)| (e as u64, c));
        self.reduce_in(self.order, terms)
    }

    pub fn vanishes(&self, counts: &[i64]) -> bool {
        self.vanishes_sparse(counts.iter().enumerate().filter(|(_, &c)| c != 0).map(|(e, &c)| (e as u64, c)))
    }

    /// Whether `Σ c ζ^e` over the given `(e, c)` pairs is zero.
    pub fn vanishes_sparse(&self, terms: impl Iterator<Item = (u64, i64)>) -> bool {
        let n = self.order;
        let mut merged: BTreeMap<u64, i64> = BTreeMap::new();
        for (e, c) in terms {
            *merged.entry(e % n).or_default() += c;
        }
        merged.retain(|_, c| *c != 0);
        let Some((&e0, _)) = merged.iter().next() else { return true };
        if merged.len() == 1 {
            return false;
        }
        let g = merged.keys().fold(n, |g, &e| g.gcd(&(e - e0)));
        let m = n / g;
        let shifted = merged.iter().map(|(&e, &c)| ((e - e0) / g, c));
        self.reduce_in(m, shifted).iter().all(|&c| c == 0)
    }
}

/// An integer combination of `N`-th roots of unity, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    order: u64,
    terms: BTreeMap<u64, i64>,
}

impl RootSum {
    pub fn zero(order: u64) -> RootSum {
        RootSum { order, terms: BTreeMap::new() }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coefficient of `ζ^e`.
    pub fn coefficient(&self, e: u64) -> i64 {
        self.terms.get(&(e % self.order)).copied().unwrap_or(0)
    }

    /// Nonzero `(exponent, coefficient)` pairs in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    /// Add `coeff·ζ^exponent`.
    pub fn add_root(&mut self, exponent: i64, coeff: i64) {
        let e = exponent.rem_euclid(self.order as i64) as u64;
        let slot = self.terms.entry(e).or_default();
        *slot += coeff;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    /// Add `coeff·exp(2πi·t)`; the denominator of `t` must divide the order.
    pub fn add_turn(&mut self, t: Turn, coeff: i64) {
        let n = self.order;
        debug_assert_eq!(n % t.den(), 0, "turn {t} outside order {n}");
        self.add_root((t.num() * (n / t.den())) as i64, coeff);
    }

    pub fn add_assign(&mut self, other: &RootSum) {
        for (e, c) in other.terms() {
            self.add_root(e as i64, c);
        }
    }

    pub fn sub_assign(&mut self, other: &RootSum) {
        for (e, c) in other.terms() {
            self.add_root(e as i64, -c);
        }
    }

    /// Multiply by `ζ^shift`.
    pub fn rotated(&self, shift: i64) -> RootSum {
        let n = self.order as i64;
        let terms = self.terms().map(|(e, c)| ((e as i64 + shift).rem_euclid(n) as u64, c)).collect();
        RootSum { order: self.order, terms }
    }

    /// The same value viewed in a ring of order `order` (a multiple of the current one).
    pub fn embedded(&self, order: u64) -> RootSum {
        debug_assert_eq!(order % self.order, 0);
        let step = order / self.order;
        RootSum { order, terms: self.terms().map(|(e, c)| (e * step, c)).collect() }
    }

    /// Scale coefficients by an integer.
    pub fn scaled(&self, k: i64) -> RootSum {
        if k == 0 {
            return RootSum::zero(self.order);
        }
        RootSum { order: self.order, terms: self.terms().map(|(e, c)| (e, c * k)).collect() }
    }

    /// Complex conjugate, `ζ^e ↦ ζ^{-e}`.
    pub fn conj(&self) -> RootSum {
        let n = self.order;
        RootSum { order: n, terms: self.terms().map(|(e, c)| ((n - e) % n, c)).collect() }
    }

    pub fn is_zero(&self, ring: &CyclotomicRing) -> bool {
        debug_assert_eq!(ring.order(), self.order);
        ring.vanishes_sparse(self.terms())
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.terms().map(|(e, c)| Complex64::from_polar(c as f64, core::f64::consts::TAU * e as f64 / n)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), [-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), [1, 1]);
        assert_eq!(cyclotomic_polynomial(4), [1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), [1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), [1, 0, -1, 0, 1]);
        // first order with a coefficient outside {-1, 0, 1}
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn vanishing_sums() {
        let ring = CyclotomicRing::new(6).unwrap();
        assert!(ring.vanishes(&[1, 1, 1, 1, 1, 1]));
        // 1 + ζ^2 + ζ^4 = 0 and 1 + ζ^3 = 0 in order 6
        assert!(ring.vanishes(&[1, 0, 1, 0, 1, 0]));
        assert!(ring.vanishes(&[1, 0, 0, 1, 0, 0]));
        assert!(!ring.vanishes(&[1, 1, 0, 0, 0, 0]));
    }

    #[test]
    fn large_composite_orders() {
        let ring = CyclotomicRing::new(27720).unwrap();
        let mut s = RootSum::zero(27720);
        // 1 + ζ_3 + ζ_3^2 embedded at order 27720, then rotated
        for e in [0, 9240, 18480] {
            s.add_root(e, 1);
        }
        assert!(s.rotated(17).is_zero(&ring));
        s.add_root(5, 1);
        assert!(!s.is_zero(&ring));
        assert_eq!(cyclotomic_polynomial(27720).len() as u64 - 1, totient(27720));
    }

    #[test]
    fn rotation_and_conjugation() {
        let mut s = RootSum::zero(5);
        s.add_root(1, 2);
        s.add_root(3, -1);
        assert_eq!(s.rotated(4).terms().collect::<Vec<_>>(), [(0, 2), (2, -1)]);
        assert_eq!(s.conj().terms().collect::<Vec<_>>(), [(2, -1), (4, 2)]);
        assert!((s.conj().to_complex() - s.to_complex().conj()).norm() < 1e-12);
    }
}
