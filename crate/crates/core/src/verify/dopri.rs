//! Dormand–Prince 5(4) with PI step-size control and continuous output.

use crate::scalar::{lit, Scalar};

use super::VerifyError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Segment<T, const N: usize> {
    pub t0: T,
    pub h: T,
    rcont: [[T; N]; 5],
}

impl<T: Scalar, const N: usize> Segment<T, N> {
    pub fn start(&self) -> [T; N] {
        self.rcont[0]
    }

    pub fn end(&self) -> [T; N] {
        let mut y = self.rcont[0];
        for (yi, di) in y.iter_mut().zip(self.rcont[1].iter()) {
            *yi += *di;
        }
        y
    }

    /// Continuous extension at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: T) -> [T; N] {
        let s = (t - self.t0) / self.h;
        let s1 = T::one() - s;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

/// Result of one explicit step of size `h` from `y` with `k1 = f(y)`.
pub(crate) struct RawStep<T, const N: usize> {
    pub y: [T; N],
    pub k: [[T; N]; 7],
    pub err: [T; N],
}

fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc += lit::<T>(*c) * k[i];
        }
        y[i] + h * acc
    })
}

pub(crate) fn raw_step<T: Scalar, F, const N: usize>(f: &F, y: &[T; N], k1: &[T; N], h: T) -> RawStep<T, N>
where
    F: Fn(&[T; N]) -> [T; N],
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(&y5);
    let err = std::array::from_fn(|i| {
        h * (lit::<T>(E1) * k1[i]
            + lit::<T>(E3) * k3[i]
            + lit::<T>(E4) * k4[i]
            + lit::<T>(E5) * k5[i]
            + lit::<T>(E6) * k6[i]
            + lit::<T>(E7) * k7[i])
    });
    RawStep {
        y: y5,
        k: [*k1, k2, k3, k4, k5, k6, k7],
        err,
    }
}

fn dense<T: Scalar, const N: usize>(t0: T, h: T, y0: &[T; N], s: &RawStep<T, N>) -> Segment<T, N> {
    let k = &s.k;
    let mut rcont = [[T::zero(); N]; 5];
    for i in 0..N {
        let ydiff = s.y[i] - y0[i];
        let bspl = h * k[0][i] - ydiff;
        rcont[0][i] = y0[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k[6][i] - bspl;
        rcont[4][i] = h
            * (lit::<T>(D1) * k[0][i]
                + lit::<T>(D3) * k[2][i]
                + lit::<T>(D4) * k[3][i]
                + lit::<T>(D5) * k[4][i]
                + lit::<T>(D6) * k[5][i]
                + lit::<T>(D7) * k[6][i]);
    }
    Segment { t0, h, rcont }
}

/// Adaptive stepper over an autonomous system.
pub struct Stepper<T, F, const N: usize> {
    f: F,
    tol: Tolerances<T>,
    t: T,
    y: [T; N],
    k1: [T; N],
    h: T,
    facold: T,
    steps: usize,
}

impl<T: Scalar, F: Fn(&[T; N]) -> [T; N], const N: usize> Stepper<T, F, N> {
    pub fn new(f: F, t0: T, y0: [T; N], tol: Tolerances<T>) -> Result<Self, VerifyError> {
        if !(tol.rtol > T::zero() && tol.atol > T::zero()) {
            return Err(VerifyError::InvalidInput("tolerances must be positive".into()));
        }
        let k1 = f(&y0);
        let mut s = Self {
            f,
            tol,
            t: t0,
            y: y0,
            k1,
            h: T::zero(),
            facold: lit(1e-4),
            steps: 0,
        };
        s.h = s.initial_step();
        Ok(s)
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn state(&self) -> [T; N] {
        self.y
    }

    pub fn rhs(&self) -> &F {
        &self.f
    }

    fn scale(&self, a: T, b: T) -> T {
        self.tol.atol + self.tol.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> T {
        let n = lit::<T>(N as f64);
        let mut dnf = T::zero();
        let mut dny = T::zero();
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.k1[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= lit(1e-10) || dny <= lit(1e-10) {
            lit(1e-6)
        } else {
            (dny / dnf).sqrt() * lit(0.01)
        };
        let y1: [T; N] = std::array::from_fn(|i| self.y[i] + h * self.k1[i]);
        let f1 = (self.f)(&y1);
        let mut der2 = T::zero();
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            der2 += ((f1[i] - self.k1[i]) / sk).powi(2);
        }
        let der2 = (der2 / n).sqrt() / h;
        let der12 = der2.max((dnf / n).sqrt());
        let h1 = if der12 <= lit(1e-15) {
            (h * lit(1e-3)).max(lit(1e-6))
        } else {
            (lit::<T>(0.01) / der12).powf(lit(0.2))
        };
        h = (h * lit(100.0)).min(h1);
        h
    }

    /// Advances by one accepted step, never past `t_max`.
    pub fn step(&mut self, t_max: T) -> Result<Segment<T, N>, VerifyError> {
        let n = lit::<T>(N as f64);
        let beta = lit::<T>(0.04);
        let expo1 = lit::<T>(0.2) - beta * lit(0.75);
        let safe = lit::<T>(0.9);
        let (facc1, facc2) = (lit::<T>(1.0 / 0.2), lit::<T>(1.0 / 10.0));
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(VerifyError::StepFailure {
                    t: self.t.to_f64().unwrap_or(f64::NAN),
                    h: self.h.to_f64().unwrap_or(f64::NAN),
                });
            }
            let mut h = self.h;
            let remaining = t_max - self.t;
            if h >= remaining {
                h = remaining;
            }
            if !(h > lit::<T>(16.0) * T::epsilon() * (T::one() + self.t.abs())) || !h.is_finite() {
                return Err(VerifyError::StepFailure {
                    t: self.t.to_f64().unwrap_or(f64::NAN),
                    h: h.to_f64().unwrap_or(f64::NAN),
                });
            }
            let s = raw_step(&self.f, &self.y, &self.k1, h);
            let mut err = T::zero();
            for i in 0..N {
                let sk = self.scale(self.y[i], s.y[i]);
                err += (s.err[i] / sk).powi(2);
            }
            let err = (err / n).sqrt();
            if !err.is_finite() {
                self.h = h * lit(0.1);
                continue;
            }
            let fac11 = err.powf(expo1);
            let fac = (fac11 / self.facold.powf(beta)) / safe;
            let fac = facc2.max(facc1.min(fac));
            if err <= T::one() {
                self.facold = err.max(lit(1e-4));
                let seg = dense(self.t, h, &self.y, &s);
                self.t = if h == remaining { t_max } else { self.t + h };
                self.y = s.y;
                self.k1 = s.k[6];
                self.h = h / fac;
                return Ok(seg);
            }
            self.h = h / facc1.min(fac11 / safe);
        }
    }
}

/// Piecewise continuous solution on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct DenseTrajectory<T, const N: usize> {
    segments: Vec<Segment<T, N>>,
    t0: T,
    y0: [T; N],
}

impl<T: Scalar, const N: usize> DenseTrajectory<T, N> {
    pub fn t_start(&self) -> T {
        self.t0
    }

    pub fn t_end(&self) -> T {
        self.segments.last().map_or(self.t0, |s| s.t0 + s.h)
    }

    pub fn final_state(&self) -> [T; N] {
        self.segments.last().map_or(self.y0, |s| s.end())
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[Segment<T, N>] {
        &self.segments
    }

    /// State at `t`, clamped to the integration interval.
    pub fn eval(&self, t: T) -> [T; N] {
        if self.segments.is_empty() || t <= self.t0 {
            return self.y0;
        }
        if t >= self.t_end() {
            return self.final_state();
        }
        let idx = self
            .segments
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }
}

/// Integrates `y' = f(y)` from `t0` to `t1 ≥ t0`.
pub fn integrate_system<T: Scalar, F, const N: usize>(
    f: F,
    y0: [T; N],
    t0: T,
    t1: T,
    tol: Tolerances<T>,
) -> Result<DenseTrajectory<T, N>, VerifyError>
where
    F: Fn(&[T; N]) -> [T; N],
{
    if !(t1 >= t0) {
        return Err(VerifyError::InvalidInput("t_span must be increasing".into()));
    }
    let mut st = Stepper::new(f, t0, y0, tol)?;
    let mut segments = Vec::new();
    while st.time() < t1 {
        segments.push(st.step(t1)?);
    }
    Ok(DenseTrajectory { segments, t0, y0 })
}
