//! Truncated power series in the unfolding parameter ε.
//!
//! A [`Jet`] stores `ε^v · (c0 + c1 ε + c2 ε²)` with an explicit valuation `v`.
//! Truncation is relative to the valuation, so a jet that starts at `ε¹`
//! carries its coefficients through `ε³`. The standard-form pipeline relies on
//! this: every quantity it divides by `dθ/dt` has valuation at least one.
//!
//! When the leading coefficients of a sum cancel exactly, the result is
//! re-normalised to a higher valuation and the newly exposed top coefficient is
//! unknown; it is filled with zero. Callers that need the top coefficient must
//! avoid such cancellations.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{lit, Scalar};

/// Number of coefficients kept after the valuation, minus one.
pub const ORDER: usize = 2;

const LEN: usize = ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("division by the zero jet")]
    DivisionByZeroJet,
    #[error("quotient would have negative valuation {0}")]
    NegativeValuation(i64),
    #[error("square root of a jet with odd valuation {0}")]
    OddValuation(u32),
    #[error("square root of a jet with negative leading coefficient")]
    NegativeLeading,
}

/// `ε^valuation · (c0 + c1 ε + c2 ε²)`; the zero jet has all coefficients zero.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<T> {
    valuation: u32,
    coeffs: [T; LEN],
}

impl<T: Scalar> Jet<T> {
    pub fn zero() -> Self {
        Self {
            valuation: 0,
            coeffs: [T::zero(); LEN],
        }
    }

    pub fn constant(c: T) -> Self {
        Self::new(0, [c, T::zero(), T::zero()])
    }

    /// The jet `ε`.
    pub fn eps() -> Self {
        Self::new(1, [T::one(), T::zero(), T::zero()])
    }

    /// Builds `ε^valuation · (c0 + c1 ε + c2 ε²)` and canonicalises it.
    pub fn new(valuation: u32, coeffs: [T; LEN]) -> Self {
        canonical(valuation, coeffs)
    }

    /// Builds a jet from the absolute coefficients of a polynomial in ε
    /// (`poly[k]` multiplies `ε^k`). Terms beyond the truncation window of the
    /// leading power are dropped.
    pub fn from_poly(poly: &[T]) -> Self {
        let thr = zero_threshold::<T>();
        let Some(first) = poly.iter().position(|c| c.abs() > thr) else {
            return Self::zero();
        };
        let mut coeffs = [T::zero(); LEN];
        for (k, slot) in coeffs.iter_mut().enumerate() {
            if let Some(c) = poly.get(first + k) {
                *slot = *c;
            }
        }
        canonical(first as u32, coeffs)
    }

    pub fn valuation(&self) -> u32 {
        self.valuation
    }

    pub fn coeffs(&self) -> [T; LEN] {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }

    /// Leading coefficient `c0` (zero for the zero jet).
    pub fn leading(&self) -> T {
        self.coeffs[0]
    }

    /// Coefficient of `ε^power`, zero outside the stored window.
    pub fn coeff(&self, power: u32) -> T {
        if self.is_zero() || power < self.valuation {
            return T::zero();
        }
        let k = (power - self.valuation) as usize;
        if k < LEN {
            self.coeffs[k]
        } else {
            T::zero()
        }
    }

    /// Evaluates the stored truncated polynomial at a concrete ε.
    pub fn eval(&self, eps: T) -> T {
        let body = self.coeffs[0] + eps * (self.coeffs[1] + eps * self.coeffs[2]);
        body * eps.powi(self.valuation as i32)
    }

    /// Multiplies by `ε^k`.
    pub fn shift(&self, k: u32) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self {
            valuation: self.valuation + k,
            coeffs: self.coeffs,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        canonical(self.valuation, self.coeffs.map(|c| c * s))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, JetError> {
        if rhs.is_zero() {
            return Err(JetError::DivisionByZeroJet);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let v = self.valuation as i64 - rhs.valuation as i64;
        if v < 0 {
            return Err(JetError::NegativeValuation(v));
        }
        let x = self.coeffs;
        let y = rhs.coeffs;
        let q0 = x[0] / y[0];
        let q1 = (x[1] - q0 * y[1]) / y[0];
        let q2 = (x[2] - q0 * y[2] - q1 * y[1]) / y[0];
        Ok(canonical(v as u32, [q0, q1, q2]))
    }

    pub fn try_recip(&self) -> Result<Self, JetError> {
        Self::constant(T::one()).try_div(self)
    }

    /// Square root by the binomial series on the normalised part.
    pub fn try_sqrt(&self) -> Result<Self, JetError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.valuation % 2 == 1 {
            return Err(JetError::OddValuation(self.valuation));
        }
        let [c0, c1, c2] = self.coeffs;
        if c0 < T::zero() {
            return Err(JetError::NegativeLeading);
        }
        let s0 = c0.sqrt();
        let u1 = c1 / c0;
        let u2 = c2 / c0;
        let half = lit::<T>(0.5);
        let eighth = lit::<T>(0.125);
        Ok(canonical(
            self.valuation / 2,
            [s0, s0 * half * u1, s0 * (half * u2 - eighth * u1 * u1)],
        ))
    }
}

fn zero_threshold<T: Scalar>() -> T {
    // underflows to exact zero for f32
    lit(1e-300)
}

fn canonical<T: Scalar>(mut valuation: u32, mut coeffs: [T; LEN]) -> Jet<T> {
    let thr = zero_threshold::<T>();
    for c in coeffs.iter_mut() {
        if c.abs() <= thr {
            *c = T::zero();
        }
    }
    if coeffs.iter().all(|c| *c == T::zero()) {
        return Jet::zero();
    }
    while coeffs[0] == T::zero() {
        coeffs = [coeffs[1], coeffs[2], T::zero()];
        valuation += 1;
    }
    Jet { valuation, coeffs }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let v = self.valuation.min(rhs.valuation);
        let mut c = [T::zero(); LEN];
        for (k, slot) in c.iter_mut().enumerate() {
            let p = v + k as u32;
            *slot = self.coeff(p) + rhs.coeff(p);
        }
        canonical(v, c)
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            valuation: self.valuation,
            coeffs: self.coeffs.map(|c| -c),
        }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let x = self.coeffs;
        let y = rhs.coeffs;
        canonical(
            self.valuation + rhs.valuation,
            [
                x[0] * y[0],
                x[0] * y[1] + x[1] * y[0],
                x[0] * y[2] + x[1] * y[1] + x[2] * y[0],
            ],
        )
    }
}

impl<T: Scalar> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Add<T> for Jet<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self + Jet::constant(rhs)
    }
}

impl<T: fmt::Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ε^{}·({:?} + {:?}ε + {:?}ε²)",
            self.valuation, self.coeffs[0], self.coeffs[1], self.coeffs[2]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn j(v: u32, c: [f64; 3]) -> Jet<f64> {
        Jet::new(v, c)
    }

    #[test]
    fn product_of_conjugates() {
        let p = j(0, [1.0, 1.0, 0.0]) * j(0, [1.0, -1.0, 0.0]);
        assert_eq!(p, j(0, [1.0, 0.0, -1.0]));
    }

    #[test]
    fn product_adds_valuations() {
        let p = Jet::<f64>::eps() * Jet::eps();
        assert_eq!(p.valuation(), 2);
        assert_eq!(p.leading(), 1.0);
    }

    #[test]
    fn sum_aligns_powers() {
        let s = j(0, [1.0, 2.0, 3.0]) + Jet::eps();
        assert_eq!(s, j(0, [1.0, 3.0, 3.0]));
    }

    #[test]
    fn geometric_series() {
        let q = Jet::constant(1.0).try_div(&j(0, [1.0, 1.0, 0.0])).unwrap();
        assert_eq!(q.coeffs(), [1.0, -1.0, 1.0]);
    }

    #[test]
    fn divide_out_epsilon() {
        let q = j(1, [1.0, 1.0, 0.0]).try_div(&Jet::eps()).unwrap();
        assert_eq!(q, j(0, [1.0, 1.0, 0.0]));
    }

    #[test]
    fn negative_valuation_rejected() {
        let err = Jet::constant(1.0).try_div(&Jet::eps()).unwrap_err();
        assert_eq!(err, JetError::NegativeValuation(-1));
        assert_eq!(
            Jet::constant(1.0).try_div(&Jet::zero()).unwrap_err(),
            JetError::DivisionByZeroJet
        );
    }

    #[test]
    fn sqrt_binomial() {
        let s = j(2, [4.0, 4.0, 0.0]).try_sqrt().unwrap();
        assert_eq!(s.valuation(), 1);
        assert_eq!(s.coeffs(), [2.0, 1.0, -0.25]);
        assert_eq!(Jet::constant(1.0).try_sqrt().unwrap(), Jet::constant(1.0));
        assert_eq!(
            Jet::<f64>::eps().try_sqrt().unwrap_err(),
            JetError::OddValuation(1)
        );
        assert_eq!(
            Jet::constant(-1.0).try_sqrt().unwrap_err(),
            JetError::NegativeLeading
        );
    }

    #[test]
    fn exact_cancellation_raises_valuation() {
        let s = j(0, [1.0, 2.0, 3.0]) - j(0, [1.0, 0.0, 0.0]);
        assert_eq!(s.valuation(), 1);
        assert_eq!(s.coeffs(), [2.0, 3.0, 0.0]);
        assert!((j(0, [1.0, 0.0, 0.0]) - Jet::constant(1.0)).is_zero());
    }

    #[test]
    fn from_poly_skips_leading_zeros() {
        let p = Jet::from_poly(&[0.0, 0.0, 3.0, 4.0]);
        assert_eq!(p.valuation(), 2);
        assert_eq!(p.coeff(3), 4.0);
        assert_eq!(p.coeff(1), 0.0);
        assert!(Jet::<f64>::from_poly(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn eval_is_truncated_polynomial() {
        let x = j(1, [2.0, -1.0, 0.5]);
        for eps in [1e-2, 5e-3, 2.5e-3] {
            let want = eps * (2.0 - eps + 0.5 * eps * eps);
            assert_eq!(x.eval(eps), want);
        }
    }

    fn jet_strategy(min_lead: f64) -> impl Strategy<Value = Jet<f64>> {
        (0u32..3, min_lead..4.0, any::<bool>(), -4.0..4.0f64, -4.0..4.0f64).prop_map(
            |(v, lead, neg, c1, c2)| {
                let c0 = if neg { -lead } else { lead };
                Jet::new(v, [c0, c1, c2])
            },
        )
    }

    fn close(a: &Jet<f64>, b: &Jet<f64>, rel: f64) -> bool {
        let scale = b.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        a.valuation() == b.valuation()
            && a.coeffs()
                .iter()
                .zip(b.coeffs())
                .all(|(x, y)| (x - y).abs() <= rel * scale)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn mul_then_div_round_trips(x in jet_strategy(0.1), y in jet_strategy(0.5)) {
            let back = (x * y).try_div(&y).unwrap();
            prop_assert!(close(&back, &x, 1e-13), "{:?} vs {:?}", back, x);
        }

        #[test]
        fn sqrt_squares_back(v in 0u32..2, c0 in 0.1..4.0f64, c1 in -4.0..4.0f64, c2 in -4.0..4.0f64) {
            let x = Jet::new(2 * v, [c0, c1, c2]);
            let s = x.try_sqrt().unwrap();
            prop_assert!(close(&(s * s), &x, 1e-13), "{:?}", s * s);
        }
    }
}
