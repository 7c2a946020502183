//! Zero-Hopf unfoldings and their reduction to a 2π-periodic standard form.
//!
//! The Chua field is translated to the unfolded equilibrium, rescaled by ε,
//! put in real Jordan form at ε = 0 and written in cylindrical coordinates
//! `(r, θ, w)`. Taking θ as the new time gives `d(r, w)/dθ = ε F1 + ε² F2 + …`.
//!
//! The rescaled field is kept in the form
//! `X' = ā0 Z + P1`, `Y' = -Z`, `Z' = -b1⁰ X + Y + P3` with
//! `P1 = cZ Z + cX X + cXX X² + cXXX X³` and `P3 = dX X + dZ Z`,
//! so that the unperturbed rotation is removed analytically and every jet
//! that reaches `dθ/dt` has valuation at least one.

use thiserror::Error;

use crate::linalg::Vec3;
use crate::model::ChuaParams;
use crate::scalar::{lit, Scalar};
use crate::series::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("singular Jordan change: {0}")]
    SingularChange(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Unfolding of the origin:
/// `(a, a1, a2, b, b1, b2) = (ā0+εα0, ā1+εα1, ā2+εα2, εβ0, (ω²-1)/a + εβ1, εβ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationOrigin<T> {
    pub abar0: T,
    pub alpha0: T,
    pub abar1: T,
    pub alpha1: T,
    pub abar2: T,
    pub alpha2: T,
    pub beta0: T,
    pub beta1: T,
    pub beta2: T,
    pub omega: T,
}

/// Which nontrivial equilibrium is unfolded. `Minus` is
/// `x = (-a2 - √D)/(2a1)`, `Plus` flips the sign of the square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Minus,
    Plus,
}

impl Branch {
    fn sign<T: Scalar>(self) -> T {
        match self {
            Branch::Minus => -T::one(),
            Branch::Plus => T::one(),
        }
    }
}

/// Unfolding of `p-` (or `p+` via `branch`):
/// `a = ā0+εα0+ε²ξ0`, `a1 = ā1+εα1+ε²ξ1`, `a2 = εα2+ε²ξ2`,
/// `b = a2²/(4a1) + ε²ζ0`, `b1 = (ω²-1)/a + εβ1 + ε²ζ1`, `b2 = ε²ζ2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationPMinus<T> {
    pub abar0: T,
    pub alpha0: T,
    pub xi0: T,
    pub abar1: T,
    pub alpha1: T,
    pub xi1: T,
    pub alpha2: T,
    pub xi2: T,
    pub zeta0: T,
    pub beta1: T,
    pub zeta1: T,
    pub zeta2: T,
    pub omega: T,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    Origin(PerturbationOrigin<T>),
    PMinus(PerturbationPMinus<T>),
}

impl<T: Scalar> PerturbationOrigin<T> {
    pub fn validate(&self) -> Result<(), TransformError> {
        if self.abar0 == T::zero() {
            return Err(TransformError::InvalidFamily("abar0 must be nonzero".into()));
        }
        if !(self.omega > T::zero()) {
            return Err(TransformError::InvalidFamily("omega must be positive".into()));
        }
        Ok(())
    }

    /// `ā0·ā2 ≠ 0` and `ω ≠ 1`, the hypotheses of first-order averaging here.
    pub fn hypotheses_hold(&self) -> bool {
        self.abar0 * self.abar2 != T::zero() && self.omega != T::one() && self.omega > T::zero()
    }

    pub fn params_at(&self, eps: T) -> ChuaParams<T> {
        let a = self.abar0 + eps * self.alpha0;
        ChuaParams {
            a,
            a1: self.abar1 + eps * self.alpha1,
            a2: self.abar2 + eps * self.alpha2,
            b: eps * self.beta0,
            b1: (self.omega * self.omega - T::one()) / a + eps * self.beta1,
            b2: eps * self.beta2,
        }
    }
}

impl<T: Scalar> PerturbationPMinus<T> {
    /// `√(-ā1 ζ0)`, the principal root.
    pub fn q(&self) -> T {
        (-self.abar1 * self.zeta0).sqrt()
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if self.abar0 == T::zero() {
            return Err(TransformError::InvalidFamily("abar0 must be nonzero".into()));
        }
        if self.abar1 == T::zero() || !(self.omega > T::zero()) {
            return Err(TransformError::InvalidFamily(
                "requires abar1*omega != 0 and omega > 0".into(),
            ));
        }
        if !(self.abar1 * self.zeta0 < T::zero()) {
            return Err(TransformError::InvalidFamily(
                "requires abar1*zeta0 < 0".into(),
            ));
        }
        Ok(())
    }

    pub fn params_at(&self, eps: T) -> ChuaParams<T> {
        let e2 = eps * eps;
        let a = self.abar0 + eps * self.alpha0 + e2 * self.xi0;
        let a1 = self.abar1 + eps * self.alpha1 + e2 * self.xi1;
        let a2 = eps * self.alpha2 + e2 * self.xi2;
        ChuaParams {
            a,
            a1,
            a2,
            b: a2 * a2 / (lit::<T>(4.0) * a1) + e2 * self.zeta0,
            b1: (self.omega * self.omega - T::one()) / a + eps * self.beta1 + e2 * self.zeta1,
            b2: e2 * self.zeta2,
        }
    }

    /// x-coordinate of the unfolded equilibrium, using `a2² - 4 a1 b = -4 a1 ζ0 ε²`.
    fn equilibrium_x(&self, p: &ChuaParams<T>, eps: T) -> T {
        let disc = -lit::<T>(4.0) * p.a1 * self.zeta0 * eps * eps;
        let s = self.branch.sign::<T>() * disc.max(T::zero()).sqrt();
        let num = -p.a2 + s;
        // pick the cancellation-free form of the same root
        if (-p.a2 >= T::zero()) == (s >= T::zero()) {
            num / (lit::<T>(2.0) * p.a1)
        } else {
            lit::<T>(2.0) * p.b / (-p.a2 - s)
        }
    }
}

impl<T: Scalar> Family<T> {
    pub fn omega(&self) -> T {
        match self {
            Family::Origin(f) => f.omega,
            Family::PMinus(f) => f.omega,
        }
    }

    pub fn abar0(&self) -> T {
        match self {
            Family::Origin(f) => f.abar0,
            Family::PMinus(f) => f.abar0,
        }
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        match self {
            Family::Origin(f) => f.validate(),
            Family::PMinus(f) => f.validate(),
        }
    }

    pub fn params_at(&self, eps: T) -> ChuaParams<T> {
        match self {
            Family::Origin(f) => f.params_at(eps),
            Family::PMinus(f) => f.params_at(eps),
        }
    }

    /// The equilibrium being unfolded, at the given ε.
    pub fn anchor(&self, eps: T) -> Vec3<T> {
        match self {
            Family::Origin(_) => [T::zero(); 3],
            Family::PMinus(f) => {
                let p = f.params_at(eps);
                if eps == T::zero() {
                    return [T::zero(); 3];
                }
                let x = f.equilibrium_x(&p, eps);
                [x, p.b1 * x, T::zero()]
            }
        }
    }

    pub fn standard_form(&self) -> Result<StandardForm<T>, TransformError> {
        match self {
            Family::Origin(f) => standard_form_origin(f),
            Family::PMinus(f) => standard_form_pminus(f),
        }
    }

    /// Maps cylindrical coordinates back to the Chua state at the given ε.
    pub fn lift_orbit(&self, eps: T, r: T, theta: T, w: T) -> Result<Vec3<T>, TransformError> {
        let [x, y, z] = inverse_jordan(
            self.abar0(),
            self.omega(),
            r * theta.cos(),
            r * theta.sin(),
            w,
        )?;
        let p = self.anchor(eps);
        Ok([p[0] + eps * x, p[1] + eps * y, p[2] + eps * z])
    }

    /// Inverse of [`Family::lift_orbit`] restricted to the `(u, v, w)` chart.
    pub fn pullback(&self, eps: T, state: &Vec3<T>) -> Result<Vec3<T>, TransformError> {
        let p = self.anchor(eps);
        jordan_change(
            self.abar0(),
            self.omega(),
            (state[0] - p[0]) / eps,
            (state[1] - p[1]) / eps,
            (state[2] - p[2]) / eps,
        )
    }
}

/// `(X, Y, Z) -> (u, v, w)`, the inverse of [`inverse_jordan`].
pub fn jordan_change<T: Scalar>(
    abar0: T,
    omega: T,
    x: T,
    y: T,
    z: T,
) -> Result<Vec3<T>, TransformError> {
    check_change(abar0, omega)?;
    let xa = x / abar0;
    Ok([z, ((omega * omega - T::one()) * xa - y) / omega, y + xa])
}

/// `X = ā0(w + ωv)/ω²`, `Y = w - w/ω² - v/ω`, `Z = u`.
pub fn inverse_jordan<T: Scalar>(
    abar0: T,
    omega: T,
    u: T,
    v: T,
    w: T,
) -> Result<Vec3<T>, TransformError> {
    check_change(abar0, omega)?;
    let w2 = omega * omega;
    Ok([abar0 * (w + omega * v) / w2, w - w / w2 - v / omega, u])
}

fn check_change<T: Scalar>(abar0: T, omega: T) -> Result<(), TransformError> {
    if omega == T::zero() {
        return Err(TransformError::SingularChange("omega = 0".into()));
    }
    if abar0 == T::zero() {
        return Err(TransformError::SingularChange("abar0 = 0".into()));
    }
    Ok(())
}

/// A point on the θ-circle with its sine and cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase<T> {
    pub theta: T,
    pub sin: T,
    pub cos: T,
}

impl<T: Scalar> Phase<T> {
    pub fn new(theta: T) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { theta, sin, cos }
    }
}

/// A 2π-periodic field `d(r, w)/dθ = ε F1(θ, r, w) + ε² F2(θ, r, w) + O(ε³)`.
pub trait PeriodicField<T: Scalar>: Send + Sync {
    fn first_order(&self, phase: &Phase<T>, x: [T; 2]) -> [T; 2];

    /// `(F1, F2)` at one point.
    fn orders(&self, phase: &Phase<T>, x: [T; 2]) -> ([T; 2], [T; 2]);

    /// `DF1(θ, x)·dir`. The default is a Richardson-extrapolated central
    /// difference along `dir` with step `1e-5·(1 + |x|)` and half that step.
    fn first_order_directional(&self, phase: &Phase<T>, x: [T; 2], dir: [T; 2]) -> [T; 2] {
        let size = dir[0].abs().max(dir[1].abs());
        if size == T::zero() {
            return [T::zero(); 2];
        }
        let h = lit::<T>(1e-5) * (T::one() + x[0].abs().max(x[1].abs())) / size;
        let central = |t: T| {
            let p = self.first_order(phase, [x[0] + t * dir[0], x[1] + t * dir[1]]);
            let m = self.first_order(phase, [x[0] - t * dir[0], x[1] - t * dir[1]]);
            [(p[0] - m[0]) / (t + t), (p[1] - m[1]) / (t + t)]
        };
        let d1 = central(h);
        let d2 = central(h * lit(0.5));
        let third = lit::<T>(1.0 / 3.0);
        [
            (lit::<T>(4.0) * d2[0] - d1[0]) * third,
            (lit::<T>(4.0) * d2[1] - d1[1]) * third,
        ]
    }
}

/// Standard form of a Chua unfolding, with exact ε-jet coefficients.
#[derive(Debug, Clone)]
pub struct StandardForm<T> {
    family: Family<T>,
    abar0: T,
    omega: T,
    // cZ, cX, cXX, cXXX, dX, dZ
    coeffs: [Jet<T>; 6],
    first: [T; 6],
    second: [T; 6],
}

const NAMES: [&str; 6] = ["cZ", "cX", "cXX", "cXXX", "dX", "dZ"];

pub fn standard_form_origin<T: Scalar>(
    f: &PerturbationOrigin<T>,
) -> Result<StandardForm<T>, TransformError> {
    f.validate()?;
    let a = Jet::from_poly(&[f.abar0, f.alpha0]);
    let a1 = Jet::from_poly(&[f.abar1, f.alpha1]);
    let a2 = Jet::from_poly(&[f.abar2, f.alpha2]);
    let da = Jet::from_poly(&[T::zero(), f.alpha0]);
    let k1 = Jet::from_poly(&[T::zero(), -f.beta0]);
    let db1 = delta_b1(f.abar0, f.omega, &a, &da, &[T::zero(), f.beta1])?;
    let coeffs = [
        da,
        a * k1,
        -(a * a2).shift(1),
        -(a * a1).shift(2),
        -db1,
        Jet::from_poly(&[T::zero(), f.beta2]),
    ];
    Ok(StandardForm::new(Family::Origin(*f), coeffs))
}

pub fn standard_form_pminus<T: Scalar>(
    f: &PerturbationPMinus<T>,
) -> Result<StandardForm<T>, TransformError> {
    f.validate()?;
    let a = Jet::from_poly(&[f.abar0, f.alpha0, f.xi0]);
    let a1 = Jet::from_poly(&[f.abar1, f.alpha1, f.xi1]);
    let a2 = Jet::from_poly(&[T::zero(), f.alpha2, f.xi2]);
    let da = Jet::from_poly(&[T::zero(), f.alpha0, f.xi0]);
    let root = pminus_root(f, &a1)?;
    let xp = equilibrium_x_jet(&a1, &a2, &root)?;
    let k1 = -(xp * root);
    let c2 = a2 + a1 * xp.scale(lit(3.0));
    let db1 = delta_b1(f.abar0, f.omega, &a, &da, &[T::zero(), f.beta1, f.zeta1])?;
    let coeffs = [
        da,
        a * k1,
        -(a * c2).shift(1),
        -(a * a1).shift(2),
        -db1,
        Jet::from_poly(&[T::zero(), T::zero(), f.zeta2]),
    ];
    Ok(StandardForm::new(Family::PMinus(*f), coeffs))
}

/// `a2 + 2 a1 x_p = ±√D` with `D = -4 a1 ζ0 ε²`.
fn pminus_root<T: Scalar>(
    f: &PerturbationPMinus<T>,
    a1: &Jet<T>,
) -> Result<Jet<T>, TransformError> {
    let disc = a1.scale(-lit::<T>(4.0) * f.zeta0).shift(2);
    Ok(disc.try_sqrt()?.scale(f.branch.sign()))
}

fn equilibrium_x_jet<T: Scalar>(
    a1: &Jet<T>,
    a2: &Jet<T>,
    root: &Jet<T>,
) -> Result<Jet<T>, TransformError> {
    Ok((*root - *a2).try_div(&a1.scale(lit(2.0)))?)
}

/// `b1 - (ω²-1)/ā0 = (ω²-1)(1/a - 1/ā0) + extra`.
fn delta_b1<T: Scalar>(
    abar0: T,
    omega: T,
    a: &Jet<T>,
    da: &Jet<T>,
    extra: &[T],
) -> Result<Jet<T>, TransformError> {
    let shift = (-*da).try_div(&a.scale(abar0))?;
    Ok(shift.scale(omega * omega - T::one()) + Jet::from_poly(extra))
}

/// The equilibrium x-coordinate jet of a `p-`/`p+` unfolding.
pub fn pminus_equilibrium_jet<T: Scalar>(
    f: &PerturbationPMinus<T>,
) -> Result<Jet<T>, TransformError> {
    f.validate()?;
    let a1 = Jet::from_poly(&[f.abar1, f.alpha1, f.xi1]);
    let a2 = Jet::from_poly(&[T::zero(), f.alpha2, f.xi2]);
    let root = pminus_root(f, &a1)?;
    equilibrium_x_jet(&a1, &a2, &root)
}

impl<T: Scalar> StandardForm<T> {
    fn new(family: Family<T>, coeffs: [Jet<T>; 6]) -> Self {
        Self {
            family,
            abar0: family.abar0(),
            omega: family.omega(),
            first: coeffs.map(|c| c.coeff(1)),
            second: coeffs.map(|c| c.coeff(2)),
            coeffs,
        }
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn period(&self) -> T {
        T::TAU()
    }

    /// Coefficient jets of the rescaled perturbation, by name.
    pub fn coefficient_jets(&self) -> Vec<(&'static str, Jet<T>)> {
        NAMES.iter().copied().zip(self.coeffs.iter().copied()).collect()
    }

    fn xyz(&self, phase: &Phase<T>, r: T, w: T) -> Vec3<T> {
        let w2 = self.omega * self.omega;
        let v = r * phase.sin;
        [self.abar0 * (w + self.omega * v) / w2, w - w / w2 - v / self.omega, r * phase.cos]
    }

    /// `(dr/dθ, dw/dθ)` as jets in ε, both of valuation at least one.
    pub fn jets(&self, theta: T, r: T, w: T) -> Result<[Jet<T>; 2], TransformError> {
        let phase = Phase::new(theta);
        let [x, _, z] = self.xyz(&phase, r, w);
        let [c_z, c_x, c_xx, c_xxx, d_x, d_z] = self.coeffs;
        let p1 = c_z * z + c_x * x + c_xx * (x * x) + c_xxx * (x * x * x);
        let p3 = d_x * x + d_z * z;
        let (s, c) = theta.sin_cos();
        let pu = p3;
        let pv = p1.scale((self.omega * self.omega - T::one()) / (self.abar0 * self.omega));
        let pw = p1.scale(T::one() / self.abar0);
        let rdot = pu.scale(c) + pv.scale(s);
        let thdot = (pv.scale(c) - pu.scale(s)).scale(T::one() / r) + self.omega;
        Ok([rdot.try_div(&thdot)?, pw.try_div(&thdot)?])
    }

    /// `ε¹` and `ε²` coefficients of `(P1, P3)`.
    fn perturbation(&self, x: T, z: T) -> ([T; 2], [T; 2]) {
        let m = [z, x, x * x, x * x * x];
        let eval = |k: &[T; 6]| {
            (
                k[0] * m[0] + k[1] * m[1] + k[2] * m[2] + k[3] * m[3],
                k[4] * x + k[5] * z,
            )
        };
        let (p1a, p3a) = eval(&self.first);
        let (p1b, p3b) = eval(&self.second);
        ([p1a, p1b], [p3a, p3b])
    }

    /// Full rescaled field `(dr/dθ, dw/dθ)` at a concrete ε, computed from the
    /// Chua vector field without jets.
    pub fn direct(&self, eps: T, theta: T, r: T, w: T) -> Result<[T; 2], TransformError> {
        if !(eps > T::zero()) {
            return Err(TransformError::InvalidInput("eps must be positive".into()));
        }
        let params = self.family.params_at(eps);
        let p = self.family.anchor(eps);
        let [x, y, z] = self.xyz(&Phase::new(theta), r, w);
        let state = [p[0] + eps * x, p[1] + eps * y, p[2] + eps * z];
        let f = params.vector_field(&state);
        let [ud, vd, wd] = jordan_change(self.abar0, self.omega, f[0] / eps, f[1] / eps, f[2] / eps)?;
        let (s, c) = theta.sin_cos();
        let rdot = c * ud + s * vd;
        let thdot = (c * vd - s * ud) / r;
        Ok([rdot / thdot, wd / thdot])
    }
}

impl<T: Scalar> PeriodicField<T> for StandardForm<T> {
    fn first_order(&self, phase: &Phase<T>, x: [T; 2]) -> [T; 2] {
        let [xx, _, z] = self.xyz(phase, x[0], x[1]);
        let k = &self.first;
        let p1 = k[0] * z + xx * (k[1] + xx * (k[2] + xx * k[3]));
        let p3 = k[4] * xx + k[5] * z;
        let kv = (self.omega * self.omega - T::one()) / (self.abar0 * self.omega);
        [
            (phase.cos * p3 + phase.sin * kv * p1) / self.omega,
            p1 / (self.abar0 * self.omega),
        ]
    }

    fn orders(&self, phase: &Phase<T>, x: [T; 2]) -> ([T; 2], [T; 2]) {
        let r = x[0];
        let [xx, _, z] = self.xyz(phase, r, x[1]);
        let (s, c) = (phase.sin, phase.cos);
        let (p1, p3) = self.perturbation(xx, z);
        let kv = (self.omega * self.omega - T::one()) / (self.abar0 * self.omega);
        let om = self.omega;
        let rdot = [c * p3[0] + s * kv * p1[0], c * p3[1] + s * kv * p1[1]];
        let pw = [p1[0] / self.abar0, p1[1] / self.abar0];
        let th1 = (c * kv * p1[0] - s * p3[0]) / r;
        let f1 = [rdot[0] / om, pw[0] / om];
        let f2 = [
            rdot[1] / om - rdot[0] * th1 / (om * om),
            pw[1] / om - pw[0] * th1 / (om * om),
        ];
        (f1, f2)
    }

    fn first_order_directional(&self, phase: &Phase<T>, x: [T; 2], dir: [T; 2]) -> [T; 2] {
        let [xx, _, _] = self.xyz(phase, x[0], x[1]);
        let dx = self.abar0 * (dir[1] + self.omega * phase.sin * dir[0]) / (self.omega * self.omega);
        let dz = phase.cos * dir[0];
        let k = &self.first;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let dp1 = k[0] * dz + (k[1] + two * k[2] * xx + three * k[3] * xx * xx) * dx;
        let dp3 = k[4] * dx + k[5] * dz;
        let kv = (self.omega * self.omega - T::one()) / (self.abar0 * self.omega);
        [
            (phase.cos * dp3 + phase.sin * kv * dp1) / self.omega,
            dp1 / (self.abar0 * self.omega),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn origin_bench() -> PerturbationOrigin<f64> {
        PerturbationOrigin {
            abar0: 1.0,
            abar2: 1.0,
            beta0: 2.0,
            beta2: 1.0,
            omega: 2.0,
            ..Default::default()
        }
    }

    pub(crate) fn pminus_bench() -> PerturbationPMinus<f64> {
        PerturbationPMinus {
            abar0: 1.0,
            abar1: 1.0,
            zeta0: -1.0,
            zeta2: -6.0,
            alpha2: -6.0,
            omega: 2.0,
            ..Default::default()
        }
    }

    fn random_origin(rng: &mut ChaCha8Rng) -> PerturbationOrigin<f64> {
        let mut g = || -> f64 { rng.gen_range(-2.0..2.0) };
        PerturbationOrigin {
            abar0: 0.5 + g().abs(),
            alpha0: g(),
            abar1: g(),
            alpha1: g(),
            abar2: g(),
            alpha2: g(),
            beta0: g(),
            beta1: g(),
            beta2: g(),
            omega: 1.3 + g().abs(),
        }
    }

    fn random_pminus(rng: &mut ChaCha8Rng) -> PerturbationPMinus<f64> {
        let mut g = || -> f64 { rng.gen_range(-2.0..2.0) };
        let abar1: f64 = if g() > 0.0 { 0.5 + g().abs() } else { -0.5 - g().abs() };
        let zeta0 = -abar1.signum() * (0.2 + g().abs());
        PerturbationPMinus {
            abar0: 0.5 + g().abs(),
            alpha0: g(),
            xi0: g(),
            abar1,
            alpha1: g(),
            xi1: g(),
            alpha2: g(),
            xi2: g(),
            zeta0,
            beta1: g(),
            zeta1: g(),
            zeta2: g(),
            omega: 1.3 + g().abs(),
            branch: Branch::Minus,
        }
    }

    #[test]
    fn params_at_examples() {
        let f = PerturbationOrigin::<f64> { abar0: 1.0, omega: 2.0, ..Default::default() };
        assert_eq!(f.params_at(0.0).to_array(), [1.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
        let f = PerturbationOrigin { beta2: 1.0, ..f };
        assert!((f.params_at(0.01).b2 - 0.01).abs() < 1e-18);

        let p = PerturbationPMinus { zeta2: 0.0, ..pminus_bench() }.params_at(0.01);
        assert!((p.a2 + 0.06).abs() < 1e-15);
        assert!((p.b - 8e-4).abs() < 1e-15);
        assert!(p.a2 * p.a2 - 4.0 * p.a1 * p.b > 0.0);
    }

    #[test]
    fn params_at_zero_is_zero_hopf() {
        let f = Family::Origin(origin_bench());
        let z = f.params_at(0.0).detect_zero_hopf(1e-9).unwrap().unwrap();
        assert!((z.omega - 2.0).abs() < 1e-12);
        let f = Family::PMinus(pminus_bench());
        let z = f.params_at(0.0).detect_zero_hopf(1e-9).unwrap().unwrap();
        assert!((z.omega - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_examples() {
        assert_eq!(inverse_jordan(1.0, 2.0, 0.0, 0.0, 0.0).unwrap(), [0.0; 3]);
        let [x, y, z] = inverse_jordan(1.0, 2.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!((x, y, z), (0.5, -0.5, 0.0));
        assert!(jordan_change(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(matches!(
            inverse_jordan(1.0, 0.0, 1.0, 1.0, 1.0),
            Err(TransformError::SingularChange(_))
        ));
    }

    #[test]
    fn jordan_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a0 = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let om = rng.gen_range(0.2..4.0);
            let p: [f64; 3] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let q = inverse_jordan(a0, om, p[0], p[1], p[2]).unwrap();
            let b = jordan_change(a0, om, q[0], q[1], q[2]).unwrap();
            for k in 0..3 {
                assert!((b[k] - p[k]).abs() <= 1e-14 * (1.0 + p[k].abs()) * 10.0, "{p:?} {b:?}");
            }
        }
    }

    #[test]
    fn jordan_form_at_eps_zero() {
        // the linear part in (u, v, w) is the rotation block
        let f = origin_bench();
        let prm = f.params_at(0.0);
        let j = prm.jacobian(&[0.0; 3]);
        for (k, e) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].iter().enumerate() {
            let xyz = inverse_jordan(1.0, 2.0, e[0], e[1], e[2]).unwrap();
            let d = crate::linalg::mat3_vec(&j, &xyz);
            let uvw = jordan_change(1.0, 2.0, d[0], d[1], d[2]).unwrap();
            let expect = [[0.0, 2.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, 0.0]][k];
            for i in 0..3 {
                assert!((uvw[i] - expect[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unperturbed_field_vanishes() {
        let sf = standard_form_origin(&PerturbationOrigin { abar0: 1.0, omega: 2.0, ..Default::default() })
            .unwrap();
        for (th, r, w) in [(0.0, 1.0, 1.0), (1.3, 0.4, -2.0)] {
            let [jr, jw] = sf.jets(th, r, w).unwrap();
            assert!(jr.is_zero() && jw.is_zero());
        }
    }

    #[test]
    fn beta2_example() {
        let f = PerturbationOrigin::<f64> { abar0: 1.0, beta2: 1.0, omega: 2.0, ..Default::default() };
        let sf = standard_form_origin(&f).unwrap();
        let [jr, _] = sf.jets(0.0, 1.0, 1.0).unwrap();
        assert!((jr.coeff(1) - 0.5).abs() < 1e-15);
        assert_eq!(jr.coeff(0), 0.0);
        let d = |e: f64| sf.direct(e, 0.0, 1.0, 1.0).unwrap()[0] / e;
        let rich = 2.0 * d(5e-4) - d(1e-3);
        assert!((rich - 0.5).abs() < 1e-8, "{rich}");
    }

    #[test]
    fn standard_form_has_no_eps_zero_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let sf = standard_form_origin(&random_origin(&mut rng)).unwrap();
            let sp = standard_form_pminus(&random_pminus(&mut rng)).unwrap();
            for _ in 0..10 {
                let (th, r, w) = (rng.gen_range(0.0..6.3), rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0));
                for jet in sf.jets(th, r, w).unwrap().iter().chain(sp.jets(th, r, w).unwrap().iter()) {
                    assert!(jet.is_zero() || jet.valuation() >= 1);
                    assert_eq!(jet.coeff(0), 0.0);
                }
            }
        }
    }

    #[test]
    fn fast_path_matches_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let sf = standard_form_pminus(&random_pminus(&mut rng)).unwrap();
            let (th, r, w) = (rng.gen_range(0.0..6.3), rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0));
            let [jr, jw] = sf.jets(th, r, w).unwrap();
            let (f1, f2) = sf.orders(&Phase::new(th), [r, w]);
            let g1 = sf.first_order(&Phase::new(th), [r, w]);
            for (a, b) in [(jr.coeff(1), f1[0]), (jw.coeff(1), f1[1]), (jr.coeff(2), f2[0]), (jw.coeff(2), f2[1]), (g1[0], f1[0]), (g1[1], f1[1])] {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} {b}");
            }
        }
    }

    #[test]
    fn periodicity() {
        let sf = standard_form_pminus(&pminus_bench()).unwrap();
        let tau = std::f64::consts::TAU;
        for th in [0.0, 0.7, 2.0] {
            let (a1, a2) = sf.orders(&Phase::new(th), [1.2, -0.4]);
            let (b1, b2) = sf.orders(&Phase::new(th + tau), [1.2, -0.4]);
            for k in 0..2 {
                assert!((a1[k] - b1[k]).abs() < 1e-13 && (a2[k] - b2[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn truncation_order_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 0..20 {
            let fam = if n % 2 == 0 {
                Family::Origin(random_origin(&mut rng))
            } else {
                Family::PMinus(random_pminus(&mut rng))
            };
            let sf = fam.standard_form().unwrap();
            for _ in 0..20 {
                let (th, r, w) = (rng.gen_range(0.0..6.3), rng.gen_range(0.3..2.0), rng.gen_range(-2.0..2.0));
                let ratio = truncation_ratio(&sf, 1e-2, th, r, w);
                if let Some(q) = ratio {
                    assert!((6.0..=10.0).contains(&q), "{fam:?} {th} {r} {w} {q}");
                }
            }
        }
    }

    /// `e(ε)/e(ε/2)` for the first component with a nonzero third-order term.
    pub(crate) fn truncation_ratio(sf: &StandardForm<f64>, eps: f64, th: f64, r: f64, w: f64) -> Option<f64> {
        let (f1, f2) = sf.orders(&Phase::new(th), [r, w]);
        let err = |e: f64, k: usize| {
            let d = sf.direct(e, th, r, w).unwrap();
            (d[k] - (e * f1[k] + e * e * f2[k])).abs()
        };
        let (a, b) = (0..2)
            .map(|k| (err(eps, k), err(eps / 2.0, k)))
            .fold((0.0, 1.0), |m, p| if p.0 > m.0 { p } else { m });
        (a > 1e-11).then(|| a / b)
    }

    #[test]
    fn pminus_equilibrium_jet_benchmark() {
        let xp = pminus_equilibrium_jet(&pminus_bench()).unwrap();
        assert_eq!(xp.valuation(), 1);
        assert!((xp.leading() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pminus_invalid() {
        let f = PerturbationPMinus { zeta0: 1.0, ..pminus_bench() };
        assert!(matches!(standard_form_pminus(&f), Err(TransformError::InvalidFamily(_))));
    }

    #[test]
    fn pminus_eps_zero_is_rotation() {
        let f = Family::PMinus(pminus_bench());
        let sf = f.standard_form().unwrap();
        // dθ/dt → ω and dr/dθ, dw/dθ → 0 as ε → 0
        let d = sf.direct(1e-9, 0.4, 1.0, 0.5).unwrap();
        assert!(d[0].abs() < 1e-7 && d[1].abs() < 1e-7);
    }

    #[test]
    fn lift_orbit_examples() {
        let f = Family::Origin(origin_bench());
        assert_eq!(f.lift_orbit(0.01, 0.0, 0.3, 0.0).unwrap(), [0.0; 3]);
        let a = f.lift_orbit(0.02, 1.5, 0.3, -0.7).unwrap();
        let b = f.lift_orbit(0.01, 1.5, 0.3, -0.7).unwrap();
        for k in 0..3 {
            assert!((a[k] - 2.0 * b[k]).abs() < 1e-15);
        }
        let g = Family::PMinus(pminus_bench());
        for eps in [0.05, 0.01, 0.001] {
            let p = g.lift_orbit(eps, 0.0, 0.0, 0.0).unwrap();
            assert!(g.params_at(eps).equilibrium_residual(&p) <= 1e-12);
            assert!((p[0] - 2.0 * eps).abs() < 10.0 * eps * eps);
        }
        let s = g.lift_orbit(0.03, 1.1, 0.0, -0.4).unwrap();
        let back = g.pullback(0.03, &s).unwrap();
        assert!((back[0] - 1.1).abs() < 1e-12 && back[1].abs() < 1e-12 && (back[2] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn plus_branch_anchor() {
        let f = Family::PMinus(PerturbationPMinus { branch: Branch::Plus, ..pminus_bench() });
        let p = f.anchor(0.01);
        assert!(f.params_at(0.01).equilibrium_residual(&p) <= 1e-12);
        // x+ = (6 + 2)ε/2
        assert!((p[0] - 0.04).abs() < 1e-6);
        assert!(f.standard_form().is_ok());
    }

    #[test]
    fn f32_smoke() {
        let f = PerturbationOrigin::<f32> { abar0: 1.0, beta2: 1.0, omega: 2.0, ..Default::default() };
        let sf = standard_form_origin(&f).unwrap();
        let (f1, _) = sf.orders(&Phase::new(0.0), [1.0, 1.0]);
        assert!((f1[0] - 0.5).abs() < 1e-6);
    }
}
