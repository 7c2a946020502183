//! The six-parameter Chua vector field, its equilibria and zero-Hopf detection.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{char_poly3, Mat3, Vec3};
use crate::scalar::{lit, max_norm, Scalar};
use crate::solve::cubic::{Cubic, CubicError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ambiguous zero-Hopf detection: {first:?} and {second:?} both qualify")]
    AmbiguousDetection {
        first: EquilibriumKind,
        second: EquilibriumKind,
    },
    #[error(transparent)]
    Cubic(#[from] CubicError),
}

/// Parameters `(a, a1, a2, b, b1, b2)` of
/// `x' = a(z - b x - a2 x² - a1 x³)`, `y' = -z`, `z' = -b1 x + y + b2 z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams<T> {
    pub a: T,
    pub a1: T,
    pub a2: T,
    pub b: T,
    pub b1: T,
    pub b2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    Origin,
    PMinus,
    PPlus,
    PDouble,
}

impl EquilibriumKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Origin => "origin",
            Self::PMinus => "p_minus",
            Self::PPlus => "p_plus",
            Self::PDouble => "p_double",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<T> {
    pub position: Vec3<T>,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex<T>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroHopfPoint<T> {
    pub equilibrium: Equilibrium<T>,
    pub omega: T,
}

/// Non-fatal diagnostics attached to a constructed family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyWarning {
    /// ω = 1 gives b1 = 0 and is excluded from the first-order averaging result.
    OmegaIsOne,
}

impl<T: Scalar> ChuaParams<T> {
    pub fn new(a: T, a1: T, a2: T, b: T, b1: T, b2: T) -> Self {
        Self {
            a,
            a1,
            a2,
            b,
            b1,
            b2,
        }
    }

    pub fn from_array(p: [T; 6]) -> Self {
        Self::new(p[0], p[1], p[2], p[3], p[4], p[5])
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.a, self.a1, self.a2, self.b, self.b1, self.b2]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn vector_field(&self, s: &Vec3<T>) -> Vec3<T> {
        let [x, y, z] = *s;
        [
            self.a * (z - self.b * x - self.a2 * x * x - self.a1 * x * x * x),
            -z,
            -self.b1 * x + y + self.b2 * z,
        ]
    }

    pub fn jacobian(&self, s: &Vec3<T>) -> Mat3<T> {
        let x = s[0];
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let zero = T::zero();
        [
            [
                self.a * (-self.b - two * self.a2 * x - three * self.a1 * x * x),
                zero,
                self.a,
            ],
            [zero, zero, -T::one()],
            [-self.b1, T::one(), self.b2],
        ]
    }

    /// Scale-aware tolerance under which the discriminant `a2² - 4 a1 b`
    /// counts as zero.
    pub fn discriminant_tolerance(&self) -> T {
        lit::<T>(1e-10) * (T::one() + self.a2 * self.a2)
    }

    /// Equilibria of the field: the origin, then `p-`/`p+` or the double point.
    /// A nontrivial root that coincides with the origin (b = 0) is not repeated.
    pub fn equilibria(&self) -> Result<Vec<Equilibrium<T>>, ModelError> {
        let mut xs = vec![(T::zero(), EquilibriumKind::Origin)];
        if self.a1 != T::zero() {
            let disc = self.a2 * self.a2 - lit::<T>(4.0) * self.a1 * self.b;
            if disc.abs() <= self.discriminant_tolerance() {
                if self.a2 != T::zero() {
                    xs.push((-self.a2 / (lit::<T>(2.0) * self.a1), EquilibriumKind::PDouble));
                }
            } else if disc > T::zero() {
                let sq = disc.sqrt();
                // stable quadratic roots of a1 x² + a2 x + b
                let (minus, plus) = if self.a2 >= T::zero() {
                    let q = -lit::<T>(0.5) * (self.a2 + sq);
                    (q / self.a1, self.b / q)
                } else {
                    let q = lit::<T>(0.5) * (sq - self.a2);
                    (self.b / q, q / self.a1)
                };
                for (x, kind) in [(minus, EquilibriumKind::PMinus), (plus, EquilibriumKind::PPlus)] {
                    if x != T::zero() {
                        xs.push((x, kind));
                    }
                }
            }
        }
        xs.into_iter()
            .map(|(x, kind)| {
                let position = [x, self.b1 * x, T::zero()];
                let mut eq = Equilibrium {
                    position,
                    kind,
                    eigenvalues: [Complex::new(T::zero(), T::zero()); 3],
                };
                eq.eigenvalues = self.char_poly_at(&eq).complex_roots()?;
                Ok(eq)
            })
            .collect()
    }

    /// `det(J - λI)` at the equilibrium. At the origin the coefficients are
    /// `(-1, b2 - a b, b2 a b - a b1 - 1, -a b)`.
    pub fn char_poly_at(&self, eq: &Equilibrium<T>) -> Cubic<T> {
        match eq.kind {
            EquilibriumKind::Origin => {
                let (a, b, b1, b2) = (self.a, self.b, self.b1, self.b2);
                Cubic::new([-T::one(), b2 - a * b, b2 * a * b - a * b1 - T::one(), -a * b])
            }
            _ => Cubic::new(char_poly3(&self.jacobian(&eq.position))),
        }
    }

    /// Finds the equilibrium whose spectrum is `{0, ±iω}` within `tol`
    /// (relative to `1 + max|λ|`).
    pub fn detect_zero_hopf(&self, tol: T) -> Result<Option<ZeroHopfPoint<T>>, ModelError> {
        if !(tol > T::zero()) {
            return Err(ModelError::InvalidInput("tolerance must be positive".into()));
        }
        let mut found: Option<ZeroHopfPoint<T>> = None;
        for eq in self.equilibria()? {
            let Some(omega) = zero_hopf_frequency(&self.char_poly_at(&eq), &eq.eigenvalues, tol)
            else {
                continue;
            };
            if let Some(prev) = &found {
                return Err(ModelError::AmbiguousDetection {
                    first: prev.equilibrium.kind,
                    second: eq.kind,
                });
            }
            found = Some(ZeroHopfPoint {
                equilibrium: eq,
                omega,
            });
        }
        Ok(found)
    }

    /// Residual `max|F(p)| / (1 + max|p|)` of a candidate equilibrium.
    pub fn equilibrium_residual(&self, p: &Vec3<T>) -> T {
        max_norm(&self.vector_field(p)) / (T::one() + max_norm(p))
    }
}

fn zero_hopf_frequency<T: Scalar>(
    poly: &Cubic<T>,
    eigenvalues: &[Complex<T>; 3],
    tol: T,
) -> Option<T> {
    let scale = T::one() + eigenvalues.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let thr = tol * scale;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| {
        eigenvalues[i]
            .norm()
            .partial_cmp(&eigenvalues[j].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let zero = eigenvalues[idx[0]];
    let (l1, l2) = (eigenvalues[idx[1]], eigenvalues[idx[2]]);
    let imaginary_pair = l1.re.abs() <= thr
        && l2.re.abs() <= thr
        && l1.im.abs() > thr
        && (l1.im + l2.im).abs() <= thr;
    if zero.norm() > thr || !imaginary_pair {
        return None;
    }
    // for roots {0, ±iω} the monic linear coefficient is ω²
    let [c3, _, c1, _] = poly.coeffs();
    let w2 = c1 / c3;
    if w2 > T::zero() {
        Some(w2.sqrt())
    } else {
        None
    }
}

/// Member of the origin zero-Hopf family: `b = b2 = 0`, `b1 = (ω² - 1)/a`.
pub fn zero_hopf_family_origin<T: Scalar>(
    a: T,
    a1: T,
    a2: T,
    omega: T,
) -> Result<(ChuaParams<T>, Vec<FamilyWarning>), ModelError> {
    if a == T::zero() {
        return Err(ModelError::InvalidInput("a must be nonzero".into()));
    }
    if !(omega > T::zero()) {
        return Err(ModelError::InvalidInput("omega must be positive".into()));
    }
    let mut warnings = Vec::new();
    if omega == T::one() {
        log::warn!("omega = 1 lies outside the first-order averaging hypotheses");
        warnings.push(FamilyWarning::OmegaIsOne);
    }
    let b1 = (omega * omega - T::one()) / a;
    Ok((
        ChuaParams::new(a, a1, a2, T::zero(), b1, T::zero()),
        warnings,
    ))
}
