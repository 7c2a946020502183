//! First- and second-order averaging of a [`PeriodicField`] on a uniform θ-grid.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::linalg::{Mat2, Vec2};
use crate::scalar::{lit, Scalar};
use crate::transform::{
    Family, PerturbationOrigin, PerturbationPMinus, PeriodicField, Phase, TransformError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AveragingError {
    #[error("grid size {0} must be a power of two and at least {1}")]
    InvalidGrid(usize, usize),
    #[error("first-order average does not vanish (|f0| = {residual:e} at r = {r}, w = {w})")]
    FirstOrderNotZero { residual: f64, r: f64, w: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

pub const DEFAULT_GRID: usize = 512;

/// Points at which the vanishing of the first-order average is checked.
const PROBES: [[f64; 2]; 4] = [[0.5, -1.0], [1.0, 0.5], [2.0, 2.0], [3.5, -3.0]];

/// The averaged function of a periodic field, evaluated by quadrature.
#[derive(Clone)]
pub struct AveragedField<T: Scalar> {
    order: u8,
    grid_size: usize,
    field: Arc<dyn PeriodicField<T>>,
    phases: Arc<Vec<Phase<T>>>,
    ffts: Option<(Arc<dyn Fft<T>>, Arc<dyn Fft<T>>)>,
}

impl<T: Scalar> std::fmt::Debug for AveragedField<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AveragedField")
            .field("order", &self.order)
            .field("grid_size", &self.grid_size)
            .finish()
    }
}

fn check_grid(n: usize, min: usize) -> Result<(), AveragingError> {
    if n < min || !n.is_power_of_two() {
        return Err(AveragingError::InvalidGrid(n, min));
    }
    Ok(())
}

fn phases<T: Scalar>(n: usize) -> Vec<Phase<T>> {
    let step = T::TAU() / lit::<T>(n as f64);
    (0..n).map(|k| Phase::new(step * lit::<T>(k as f64))).collect()
}

/// `f0(x) = (1/2π) ∮ F1(θ, x) dθ` by the trapezoidal rule.
pub fn average_first<T: Scalar>(
    field: Arc<dyn PeriodicField<T>>,
    grid_size: usize,
) -> Result<AveragedField<T>, AveragingError> {
    check_grid(grid_size, 64)?;
    Ok(AveragedField {
        order: 1,
        grid_size,
        field,
        phases: Arc::new(phases(grid_size)),
        ffts: None,
    })
}

/// `f1(x) = (1/2π) ∮ [DF1(θ, x)·y1(θ, x) + F2(θ, x)] dθ` with
/// `y1(θ, x) = ∫₀^θ F1(s, x) ds`. Fails unless the first-order average
/// vanishes.
pub fn average_second<T: Scalar>(
    field: Arc<dyn PeriodicField<T>>,
    grid_size: usize,
) -> Result<AveragedField<T>, AveragingError> {
    check_grid(grid_size, 128)?;
    let first = average_first(field.clone(), grid_size)?;
    for p in PROBES {
        let x = [lit::<T>(p[0]), lit::<T>(p[1])];
        let avg = first.eval(x);
        let scale = first
            .phases
            .iter()
            .map(|ph| {
                let v = field.first_order(ph, x);
                v[0].abs().max(v[1].abs())
            })
            .fold(T::zero(), T::max);
        let residual = avg[0].abs().max(avg[1].abs());
        if residual > lit::<T>(1e-8) * (T::one() + scale) {
            return Err(AveragingError::FirstOrderNotZero {
                residual: residual.to_f64().unwrap_or(f64::NAN),
                r: p[0],
                w: p[1],
            });
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(grid_size);
    let inv = planner.plan_fft_inverse(grid_size);
    Ok(AveragedField {
        order: 2,
        ffts: Some((fwd, inv)),
        ..first
    })
}

/// First order for origin unfoldings, second order for `p-`/`p+` ones.
pub fn average_family<T: Scalar>(
    family: &Family<T>,
    grid_size: usize,
) -> Result<AveragedField<T>, AveragingError> {
    let field: Arc<dyn PeriodicField<T>> = Arc::new(family.standard_form()?);
    match family {
        Family::Origin(_) => average_first(field, grid_size),
        Family::PMinus(_) => average_second(field, grid_size),
    }
}

impl<T: Scalar> AveragedField<T> {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Same averaging on a different grid.
    pub fn with_grid(&self, grid_size: usize) -> Result<Self, AveragingError> {
        match self.order {
            1 => average_first(self.field.clone(), grid_size),
            _ => {
                check_grid(grid_size, 128)?;
                let mut planner = FftPlanner::new();
                Ok(Self {
                    order: 2,
                    grid_size,
                    field: self.field.clone(),
                    phases: Arc::new(phases(grid_size)),
                    ffts: Some((
                        planner.plan_fft_forward(grid_size),
                        planner.plan_fft_inverse(grid_size),
                    )),
                })
            }
        }
    }

    pub fn eval(&self, x: Vec2<T>) -> Vec2<T> {
        match &self.ffts {
            None => self.eval_first(x),
            Some((fwd, inv)) => self.eval_second(x, fwd.as_ref(), inv.as_ref()),
        }
    }

    fn eval_first(&self, x: Vec2<T>) -> Vec2<T> {
        let mut acc = [T::zero(); 2];
        for ph in self.phases.iter() {
            let v = self.field.first_order(ph, x);
            acc[0] += v[0];
            acc[1] += v[1];
        }
        let n = lit::<T>(self.grid_size as f64);
        [acc[0] / n, acc[1] / n]
    }

    fn eval_second(&self, x: Vec2<T>, fwd: &dyn Fft<T>, inv: &dyn Fft<T>) -> Vec2<T> {
        let n = self.grid_size;
        let mut acc = [T::zero(); 2];
        // pack both components into one complex signal: F1r + i F1w
        let mut buf: Vec<Complex<T>> = Vec::with_capacity(n);
        for ph in self.phases.iter() {
            let (a, b) = self.field.orders(ph, x);
            buf.push(Complex::new(a[0], a[1]));
            acc[0] += b[0];
            acc[1] += b[1];
        }
        let y = self.cumulative(&mut buf, fwd, inv);
        for (ph, yk) in self.phases.iter().zip(y.iter()) {
            let d = self.field.first_order_directional(ph, x, *yk);
            acc[0] += d[0];
            acc[1] += d[1];
        }
        let nn = lit::<T>(n as f64);
        [acc[0] / nn, acc[1] / nn]
    }

    /// Spectral antiderivative `y(θ_k) = ∫₀^{θ_k} F1` of the packed samples,
    /// including the linear growth of a nonzero mean.
    fn cumulative(
        &self,
        buf: &mut [Complex<T>],
        fwd: &dyn Fft<T>,
        inv: &dyn Fft<T>,
    ) -> Vec<[T; 2]> {
        let n = buf.len();
        let nn = lit::<T>(n as f64);
        fwd.process(buf);
        let mean = buf[0] / nn;
        buf[0] = Complex::new(T::zero(), T::zero());
        buf[n / 2] = Complex::new(T::zero(), T::zero());
        for (m, c) in buf.iter_mut().enumerate().skip(1) {
            if m == n / 2 {
                continue;
            }
            let freq = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            // divide by i·freq·n
            *c = Complex::new(c.im, -c.re) / (lit::<T>(freq) * nn);
        }
        inv.process(buf);
        let base = buf[0];
        self.phases
            .iter()
            .zip(buf.iter())
            .map(|(ph, h)| {
                let v = *h - base + mean * ph.theta;
                [v.re, v.im]
            })
            .collect()
    }

    /// Jacobian by Richardson-extrapolated central differences.
    pub fn jacobian(&self, x: Vec2<T>) -> Mat2<T> {
        let mut jac = [[T::zero(); 2]; 2];
        for j in 0..2 {
            let h = lit::<T>(1e-5) * (T::one() + x[j].abs());
            let central = |t: T| {
                let mut p = x;
                let mut m = x;
                p[j] += t;
                m[j] -= t;
                let (fp, fm) = (self.eval(p), self.eval(m));
                [(fp[0] - fm[0]) / (t + t), (fp[1] - fm[1]) / (t + t)]
            };
            let d1 = central(h);
            let d2 = central(h * lit(0.5));
            for i in 0..2 {
                jac[i][j] = (lit::<T>(4.0) * d2[i] - d1[i]) / lit::<T>(3.0);
            }
        }
        jac
    }
}

/// The closed-form first-order average of an origin unfolding:
/// `f1 = r(β2ω⁴ - 2ā0²ā2 w(ω²-1) - ā0β0ω²(ω²-1)) / (2ω⁵)`,
/// `f2 = -ā0(2wβ0ω² + ā0ā2(2w² + r²ω²)) / (2ω⁵)`.
pub fn closed_form_f_origin<T: Scalar>(f: &PerturbationOrigin<T>) -> impl Fn(Vec2<T>) -> Vec2<T> {
    let f = *f;
    move |x| {
        let [r, w] = x;
        let (a0, a2, b0, b2, om) = (f.abar0, f.abar2, f.beta0, f.beta2, f.omega);
        let two = lit::<T>(2.0);
        let o2 = om * om;
        let o5 = o2 * o2 * om;
        let f1 = r * (b2 * o2 * o2 - two * a0 * a0 * a2 * w * (o2 - T::one()) - a0 * b0 * o2 * (o2 - T::one()))
            / (two * o5);
        let f2 = -a0 * (two * w * b0 * o2 + a0 * a2 * (two * w * w + r * r * o2)) / (two * o5);
        [f1, f2]
    }
}

/// The closed-form second-order functions `(g1, g2)` of a `p-` unfolding
/// as printed in the literature, scaled by 2π relative to [`average_second`].
pub fn closed_form_g_pminus<T: Scalar>(f: &PerturbationPMinus<T>) -> impl Fn(Vec2<T>) -> Vec2<T> {
    let f = *f;
    move |x| {
        let [r, w] = x;
        let (a0, a1, al2, z0, z2, om) = (f.abar0, f.abar1, f.alpha2, f.zeta0, f.zeta2, f.omega);
        let q = f.q();
        let pi = T::PI();
        let (two, three, four, six) = (lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0), lit::<T>(6.0));
        let o2 = om * om;
        let o4 = o2 * o2;
        let o6 = o4 * o2;
        let s = al2 + six * q;
        let t = two * a1 * z0 - al2 * q;
        let bracket = four * a0 * a1 * w * s * o2 + four * t * o4
            - three * a0 * a0 * a1 * a1 * (four * w * w + three * r * r * o2);
        let g1 = pi * r / (four * om) * (four * z2 + a0 * (o2 - T::one()) * bracket / (a1 * o6));
        let g2 = a0 * pi / (two * a1 * o6 * om)
            * (four * w * t * o4 - two * a0 * a0 * a1 * a1 * w * (two * w * w + three * r * r * o2)
                + a0 * a1 * s * o2 * (two * w * w + r * r * o2));
        [g1, g2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{standard_form_origin, standard_form_pminus};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Synthetic<F1, F2> {
        f1: F1,
        f2: F2,
    }

    impl<F1, F2> PeriodicField<f64> for Synthetic<F1, F2>
    where
        F1: Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync,
        F2: Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync,
    {
        fn first_order(&self, phase: &Phase<f64>, x: [f64; 2]) -> [f64; 2] {
            (self.f1)(phase.theta, x)
        }
        fn orders(&self, phase: &Phase<f64>, x: [f64; 2]) -> ([f64; 2], [f64; 2]) {
            ((self.f1)(phase.theta, x), (self.f2)(phase.theta, x))
        }
    }

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

    fn pminus_bench() -> PerturbationPMinus<f64> {
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

    fn close(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
        (0..2).all(|k| (a[k] - b[k]).abs() <= tol * (1.0 + b[k].abs()))
    }

    #[test]
    fn first_order_synthetic() {
        let om = 2.0;
        let f = Synthetic {
            f1: move |t: f64, x: [f64; 2]| [x[0] * t.cos().powi(2) / om, 0.0],
            f2: |_, _| [0.0, 0.0],
        };
        let avg = average_first(Arc::new(f), 64).unwrap();
        assert!(close(avg.eval([3.0, 1.0]), [0.75, 0.0], 1e-15));
    }

    #[test]
    fn first_order_origin_benchmark() {
        let sf = standard_form_origin(&origin_bench()).unwrap();
        let avg = average_first(Arc::new(sf), 512).unwrap();
        assert!(close(avg.eval([1.0, 1.0]), [-0.21875, -0.34375], 1e-14));
        let cf = closed_form_f_origin(&origin_bench());
        assert!(close(cf([1.0, 1.0]), [-0.21875, -0.34375], 1e-15));
    }

    #[test]
    fn closed_form_f_examples() {
        let cf = closed_form_f_origin(&origin_bench());
        for r in [0.5, 2.0] {
            assert!((cf([r, -4.0 / 3.0])[0]).abs() < 1e-15);
            assert!((cf([r, 0.3])[0] - r * (-8.0 - 1.8) / 64.0).abs() < 1e-15);
        }
        assert_eq!(cf([0.0, 1.3])[0], 0.0);
        let f = PerturbationOrigin { abar2: 0.0, beta0: 0.0, ..origin_bench() };
        let cf = closed_form_f_origin(&f);
        let avg = average_first(Arc::new(standard_form_origin(&f).unwrap()), 256).unwrap();
        assert!(close(cf([1.7, 0.4]), [1.7 / 4.0, 0.0], 1e-15));
        assert!(close(avg.eval([1.7, 0.4]), [1.7 / 4.0, 0.0], 1e-14));
    }

    #[test]
    fn pipeline_matches_closed_form_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let mut g = || -> f64 { rng.gen_range(-2.0..2.0) };
            let f = PerturbationOrigin {
                abar0: g(),
                alpha0: g(),
                abar1: g(),
                alpha1: g(),
                abar2: g(),
                alpha2: g(),
                beta0: g(),
                beta1: g(),
                beta2: g(),
                omega: 0.3 + g().abs() * 2.0,
            };
            let avg = average_first(Arc::new(standard_form_origin(&f).unwrap()), 256).unwrap();
            let cf = closed_form_f_origin(&f);
            for _ in 0..20 {
                let x = [rng.gen_range(0.01..5.0), rng.gen_range(-8.0..8.0)];
                let (a, b) = (avg.eval(x), cf(x));
                for k in 0..2 {
                    assert!((a[k] - b[k]).abs() <= 1e-8 * (1.0 + b[k].abs()), "{f:?} {x:?}");
                }
            }
        }
    }

    #[test]
    fn grid_validation() {
        let sf = Arc::new(standard_form_origin(&origin_bench()).unwrap());
        assert!(matches!(average_first(sf.clone(), 32), Err(AveragingError::InvalidGrid(32, 64))));
        assert!(average_first(sf.clone(), 100).is_err());
        assert!(matches!(average_second(sf.clone(), 64), Err(AveragingError::InvalidGrid(..))));
    }

    #[test]
    fn second_order_synthetic() {
        let f = Synthetic { f1: |_, _| [0.0, 0.0], f2: |_, _| [1.5, -2.0] };
        let avg = average_second(Arc::new(f), 128).unwrap();
        assert!(close(avg.eval([1.0, 2.0]), [1.5, -2.0], 1e-15));

        let f = Synthetic { f1: |t: f64, _| [t.cos(), 0.0], f2: |_, _| [0.0, 0.0] };
        let avg = average_second(Arc::new(f), 128).unwrap();
        let v = avg.eval([1.0, 2.0]);
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn spectral_antiderivative() {
        // F1 = (w sin θ, r cos θ): y1 = (w(1 - cos θ), r sin θ),
        // DF1·y1 = (r sin²θ, w(1 - cos θ) cos θ) ⇒ (r/2, -w/2).
        let f = Synthetic {
            f1: |t: f64, x: [f64; 2]| [x[1] * t.sin(), x[0] * t.cos()],
            f2: |_, _| [0.0, 0.0],
        };
        let avg = average_second(Arc::new(f), 128).unwrap();
        let v = avg.eval([3.0, 2.0]);
        assert!(close(v, [1.5, -1.0], 1e-9), "{v:?}");
    }

    #[test]
    fn directional_derivative_matches_default() {
        struct Plain(crate::transform::StandardForm<f64>);
        impl PeriodicField<f64> for Plain {
            fn first_order(&self, p: &Phase<f64>, x: [f64; 2]) -> [f64; 2] {
                self.0.first_order(p, x)
            }
            fn orders(&self, p: &Phase<f64>, x: [f64; 2]) -> ([f64; 2], [f64; 2]) {
                self.0.orders(p, x)
            }
        }
        let f = PerturbationPMinus { alpha0: 0.3, beta1: -0.4, alpha2: 0.7, ..pminus_bench() };
        let sf = standard_form_pminus(&f).unwrap();
        let plain = Plain(sf.clone());
        for th in [0.0, 1.0, 4.0] {
            let ph = Phase::new(th);
            let a = sf.first_order_directional(&ph, [1.3, -0.2], [0.4, 2.0]);
            let b = plain.first_order_directional(&ph, [1.3, -0.2], [0.4, 2.0]);
            assert!(close(a, b, 1e-9), "{a:?} {b:?}");
        }
    }

    #[test]
    fn pminus_benchmark_regression() {
        let avg = average_second(Arc::new(standard_form_pminus(&pminus_bench()).unwrap()), 512).unwrap();
        assert!(close(avg.eval([1.0, 0.0]), [-201.0 / 256.0, 0.0], 1e-13));
        let printed = closed_form_g_pminus(&pminus_bench())([1.0, 0.0]);
        let expect = std::f64::consts::PI / 8.0 * (-24.0 + 10.3125);
        assert!((printed[0] - expect).abs() < 1e-13);
        assert!((printed[0] + 5.3748).abs() < 1e-3);
    }

    #[test]
    fn general_family_oracle() {
        let f = PerturbationPMinus {
            abar0: 0.7,
            alpha0: 0.3,
            abar1: -1.3,
            alpha1: 0.2,
            alpha2: 0.9,
            zeta0: 0.4,
            beta1: -0.5,
            omega: 1.7,
            zeta2: 0.3,
            ..Default::default()
        };
        let avg = average_second(Arc::new(standard_form_pminus(&f).unwrap()), 512).unwrap();
        let cases = [
            ([1.0, 0.0], [0.285_425_252_449_195_56, 0.130_320_789_231_265_3]),
            ([1.5, -0.5], [0.353_583_563_399_231_97, 0.168_858_485_166_647_76]),
            ([2.0, 1.0], [1.106_920_617_672_445_2, 0.995_877_808_336_656_4]),
        ];
        for (x, expect) in cases {
            assert!(close(avg.eval(x), expect, 1e-12), "{x:?} {:?}", avg.eval(x));
        }
    }

    #[test]
    fn grid_doubling() {
        let avg = average_second(Arc::new(standard_form_pminus(&pminus_bench()).unwrap()), 256).unwrap();
        let fine = avg.with_grid(512).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = [rng.gen_range(0.01..5.0), rng.gen_range(-8.0..8.0)];
            let (a, b) = (avg.eval(x), fine.eval(x));
            let scale = 1.0 + b[0].abs().max(b[1].abs());
            assert!((a[0] - b[0]).abs() <= 1e-12 * scale && (a[1] - b[1]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn first_order_not_zero() {
        let sf = standard_form_origin(&origin_bench()).unwrap();
        assert!(matches!(
            average_second(Arc::new(sf), 256),
            Err(AveragingError::FirstOrderNotZero { .. })
        ));
    }

    #[test]
    fn reflection_symmetry_and_printed_parity() {
        let f = PerturbationPMinus { zeta2: -1.0, ..pminus_bench() };
        let avg = average_second(Arc::new(standard_form_pminus(&f).unwrap()), 256).unwrap();
        let g = closed_form_g_pminus(&f);
        for (r, w) in [(0.5, 0.3), (1.0, 1.0), (2.0, 2.5)] {
            let (a, b) = (avg.eval([r, w]), avg.eval([r, -w]));
            assert!((a[0] - b[0]).abs() <= 1e-9 && (a[1] + b[1]).abs() <= 1e-9);
            let (p, m) = (g([r, w]), g([r, -w]));
            assert!((p[0] - m[0]).abs() <= 1e-12 && (p[1] + m[1]).abs() <= 1e-12);
            assert!(g([r, 0.0])[1].abs() < 1e-15);
        }
        assert_eq!(g([0.0, 0.0]), [0.0, 0.0]);
    }
}
