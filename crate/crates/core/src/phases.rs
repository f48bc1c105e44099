//! Unit-modulus scalars stored as turns: the value of a turn `t` is `exp(2πi·t)`.
//!
//! Rational turns stay rational under products, quotients and integer powers;
//! only [`Phase::Real`] carries floating-point data.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Div, Mul};

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{domain, Result};

/// A reduced fraction `num/den` with `0 <= num < den`, read modulo one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Turn {
    num: u64,
    den: u64,
}

impl Turn {
    pub const ZERO: Turn = Turn { num: 0, den: 1 };

    /// Reduce `num/den` modulo one. `den` must be nonzero.
    pub fn new(num: i128, den: u64) -> Result<Turn> {
        if den == 0 {
            return Err(domain!("turn denominator must be positive"));
        }
        Ok(Self::reduce(num, den as u128))
    }

    fn reduce(num: i128, den: u128) -> Turn {
        let d = den as i128;
        let r = num.rem_euclid(d) as u128;
        let g = r.gcd(&den);
        let (n, d) = (r / g, den / g);
        let den = u64::try_from(d).expect("turn denominator exceeds 64 bits");
        Turn { num: n as u64, den }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn scale(self, k: i64) -> Turn {
        Self::reduce(self.num as i128 * k as i128, self.den as u128)
    }

    /// `self / k` as a turn, i.e. the principal `k`-th root direction.
    pub fn divide(self, k: u64) -> Turn {
        Self::reduce(self.num as i128, self.den as u128 * k as u128)
    }
}

impl Ord for Turn {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128)
            .cmp(&(other.num as u128 * self.den as u128))
            .then(self.den.cmp(&other.den))
    }
}

impl PartialOrd for Turn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl core::ops::Add for Turn {
    type Output = Turn;

    fn add(self, other: Turn) -> Turn {
        let den = self.den as u128 * other.den as u128 / self.den.gcd(&other.den) as u128;
        let a = self.num as i128 * (den / self.den as u128) as i128;
        let b = other.num as i128 * (den / other.den as u128) as i128;
        Turn::reduce(a + b, den)
    }
}

impl core::ops::Neg for Turn {
    type Output = Turn;

    fn neg(self) -> Turn {
        Turn::reduce(-(self.num as i128), self.den as u128)
    }
}

impl core::ops::Sub for Turn {
    type Output = Turn;

    fn sub(self, other: Turn) -> Turn {
        self + -other
    }
}

/// `exp(2πi·turn)`, exact for rational turns.
#[derive(Clone, Copy, Debug)]
pub enum Phase {
    Rational(Turn),
    /// Real turn in `[0, 1)`; equality is tolerance based.
    Real(f64),
}

fn wrap_unit(t: f64) -> f64 {
    let r = t - libm::floor(t);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl Phase {
    pub const ONE: Phase = Phase::Rational(Turn::ZERO);

    pub fn rational(num: i128, den: u64) -> Result<Phase> {
        Turn::new(num, den).map(Phase::Rational)
    }

    pub fn real(turn: f64) -> Phase {
        Phase::Real(wrap_unit(turn))
    }

    /// The phase `exp(iθ)` for an angle in radians.
    pub fn from_angle(theta: f64) -> Phase {
        Phase::real(theta / core::f64::consts::TAU)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Rational(_))
    }

    pub fn as_turn(&self) -> Option<Turn> {
        match self {
            Phase::Rational(t) => Some(*t),
            Phase::Real(_) => None,
        }
    }

    pub fn turn_f64(&self) -> f64 {
        match self {
            Phase::Rational(t) => t.to_f64(),
            Phase::Real(t) => *t,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Phase::Rational(t) => t.is_zero(),
            Phase::Real(t) => *t == 0.0,
        }
    }

    pub fn inv(self) -> Phase {
        match self {
            Phase::Rational(t) => Phase::Rational(-t),
            Phase::Real(t) => Phase::real(-t),
        }
    }

    pub fn conj(self) -> Phase {
        self.inv()
    }

    pub fn pow(self, k: i64) -> Phase {
        match self {
            Phase::Rational(t) => Phase::Rational(t.scale(k)),
            Phase::Real(t) => Phase::real(t * k as f64),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Phase::Rational(t) => {
                // exact values on the axes keep float output clean
                match (t.num(), t.den()) {
                    (0, _) => Complex64::new(1.0, 0.0),
                    (1, 4) => Complex64::new(0.0, 1.0),
                    (1, 2) => Complex64::new(-1.0, 0.0),
                    (3, 4) => Complex64::new(0.0, -1.0),
                    _ => Complex64::from_polar(1.0, core::f64::consts::TAU * t.to_f64()),
                }
            }
            Phase::Real(t) => Complex64::from_polar(1.0, core::f64::consts::TAU * t),
        }
    }

    /// Distance on the circle measured in turns.
    pub fn turn_distance(&self, other: &Phase) -> f64 {
        let diff = wrap_unit(self.turn_f64() - other.turn_f64());
        diff.min(1.0 - diff)
    }

    /// Exact equality for rational pairs, tolerance comparison otherwise.
    pub fn approx_eq(&self, other: &Phase, tol: f64) -> bool {
        match (self, other) {
            (Phase::Rational(a), Phase::Rational(b)) => a == b,
            _ => self.turn_distance(other) <= tol,
        }
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Phase::Rational(a), Phase::Rational(b)) => a == b,
            (Phase::Real(a), Phase::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Phase {}

impl Ord for Phase {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Phase::Rational(a), Phase::Rational(b)) => a.cmp(b),
            (Phase::Real(a), Phase::Real(b)) => a.total_cmp(b),
            (Phase::Rational(a), Phase::Real(b)) => a.to_f64().total_cmp(b).then(Ordering::Less),
            (Phase::Real(a), Phase::Rational(b)) => a.total_cmp(&b.to_f64()).then(Ordering::Greater),
        }
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        match (self, rhs) {
            (Phase::Rational(a), Phase::Rational(b)) => Phase::Rational(a + b),
            _ => Phase::real(self.turn_f64() + rhs.turn_f64()),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Phase {
    type Output = Phase;

    fn div(self, rhs: Phase) -> Phase {
        self * rhs.inv()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Rational(t) => write!(f, "e({t})"),
            Phase::Real(t) => write!(f, "e({t:.12})"),
        }
    }
}

/// `exp(2πi·p/q)`.
pub fn root_of_unity(q: u64, p: i64) -> Result<Phase> {
    if q == 0 {
        return Err(domain!("root_of_unity needs q >= 1"));
    }
    Phase::rational(p as i128, q)
}

/// Product of all factors; rational iff every factor is rational.
pub fn phase_product<I: IntoIterator<Item = Phase>>(factors: I) -> Phase {
    factors.into_iter().fold(Phase::ONE, |acc, p| acc * p)
}

/// The `d` phases `y` with `y^d = x`, in ascending turn order.
pub fn nth_roots(x: Phase, d: u64) -> Result<Vec<Phase>> {
    if d == 0 {
        return Err(domain!("nth_roots needs d >= 1"));
    }
    let roots = match x {
        Phase::Rational(t) => {
            let base = t.divide(d);
            (0..d).map(|j| Phase::Rational(base + Turn::reduce(j as i128, d as u128))).collect()
        }
        Phase::Real(t) => (0..d).map(|j| Phase::real((t + j as f64) / d as f64)).collect(),
    };
    Ok(roots)
}

/// Least common multiple of the denominators of rational phases.
pub fn common_order<'a, I: IntoIterator<Item = &'a Phase>>(phases: I) -> Option<u64> {
    let mut order = 1u64;
    for p in phases {
        let t = p.as_turn()?;
        order = order.lcm(&t.den());
    }
    Some(order)
}

/// Amplitude of a sparse state term.
///
/// Exact amplitudes are `sqrt(weight)·phase` with a positive integer weight;
/// states carry an implicit global normalisation, so only ratios of weights
/// matter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComplexAmp {
    Exact { weight: u64, phase: Phase },
    Float(Complex64),
}

impl ComplexAmp {
    pub fn unit(phase: Phase) -> ComplexAmp {
        ComplexAmp::Exact { weight: 1, phase }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            ComplexAmp::Exact { weight, phase } => phase.to_complex() * libm::sqrt(*weight as f64),
            ComplexAmp::Float(c) => *c,
        }
    }

    pub fn weight_f64(&self) -> f64 {
        match self {
            ComplexAmp::Exact { weight, .. } => *weight as f64,
            ComplexAmp::Float(c) => c.norm_sqr(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ComplexAmp::Exact { weight, .. } => *weight == 0,
            ComplexAmp::Float(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    /// The phase when the amplitude is exact.
    pub fn exact_phase(&self) -> Option<Phase> {
        match self {
            ComplexAmp::Exact { phase, .. } => Some(*phase),
            ComplexAmp::Float(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: i128, d: u64) -> Phase {
        Phase::rational(n, d).unwrap()
    }

    #[test]
    fn root_of_unity_reduces() {
        assert_eq!(root_of_unity(1, 0).unwrap(), Phase::ONE);
        assert_eq!(root_of_unity(3, 1).unwrap(), t(1, 3));
        assert_eq!(root_of_unity(6, 4).unwrap().as_turn().unwrap(), Turn { num: 2, den: 3 });
        assert_eq!(root_of_unity(4, -1).unwrap(), t(3, 4));
        assert!(root_of_unity(0, 1).is_err());
    }

    #[test]
    fn products() {
        assert_eq!(phase_product([]), Phase::ONE);
        assert_eq!(phase_product([t(1, 3), t(1, 3), t(1, 3)]), Phase::ONE);
        assert_eq!(phase_product(core::iter::repeat_n(Phase::ONE, 9)), Phase::ONE);
        assert!(!phase_product([t(1, 3), Phase::real(0.25)]).is_exact());
    }

    #[test]
    fn roots() {
        assert_eq!(nth_roots(Phase::ONE, 2).unwrap(), [Phase::ONE, t(1, 2)]);
        assert_eq!(nth_roots(t(1, 2), 2).unwrap(), [t(1, 4), t(3, 4)]);
        assert_eq!(nth_roots(t(1, 3), 3).unwrap(), [t(1, 9), t(4, 9), t(7, 9)]);
        let r = nth_roots(Phase::real(0.3), 4).unwrap();
        assert!(r.iter().all(|y| y.pow(4).approx_eq(&Phase::real(0.3), 1e-12)));
    }

    #[test]
    fn axis_values_are_clean() {
        assert_eq!(t(1, 4).to_complex(), Complex64::new(0.0, 1.0));
        assert_eq!(t(1, 2).to_complex(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn ordering_follows_value() {
        assert!(t(1, 3) < t(1, 2));
        assert!(t(2, 3) > t(1, 2));
        assert!(Phase::real(0.1) > t(0, 1));
    }
}
