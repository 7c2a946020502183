//! Zeros of averaged fields, closed-form predictions and stability classification.

pub mod cubic;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::averaging::{average_family, average_second, AveragedField, AveragingError, DEFAULT_GRID};
use crate::linalg::{det2, eig2, frobenius2, solve2, Mat2, Vec2};
use crate::scalar::{lit, Scalar};
use crate::transform::{Family, PerturbationOrigin, PerturbationPMinus, TransformError};

pub use cubic::{solve_cubic, Cubic, CubicError, RealRoot};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Cubic(#[from] CubicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    Degenerate,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::StableNode => "stable_node",
            Self::StableFocus => "stable_focus",
            Self::UnstableNode => "unstable_node",
            Self::UnstableFocus => "unstable_focus",
            Self::Saddle => "saddle",
            Self::Degenerate => "degenerate",
        }
    }

    /// Number of eigenvalues with positive real part implied by the class.
    pub fn unstable_dimension(&self) -> Option<usize> {
        match self {
            Self::StableNode | Self::StableFocus => Some(0),
            Self::Saddle => Some(1),
            Self::UnstableNode | Self::UnstableFocus => Some(2),
            Self::Degenerate => None,
        }
    }
}

/// A zero `(r, w)` of an averaged field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedZero<T> {
    pub r: T,
    pub w: T,
    pub jac: Mat2<T>,
    pub eigenvalues: [Complex<T>; 2],
    pub classification: Classification,
    pub residual: T,
}

impl<T: Scalar> AveragedZero<T> {
    pub fn is_degenerate(&self) -> bool {
        self.classification == Classification::Degenerate
    }

    pub fn det(&self) -> T {
        det2(&self.jac)
    }

    pub fn trace(&self) -> T {
        self.jac[0][0] + self.jac[1][1]
    }
}

/// Search rectangle `r ∈ (r_min, r_max]`, `w ∈ [w_min, w_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain<T> {
    pub r_min: T,
    pub r_max: T,
    pub w_min: T,
    pub w_max: T,
}

impl<T: Scalar> Default for Domain<T> {
    fn default() -> Self {
        Self {
            r_min: lit(1e-4),
            r_max: lit(20.0),
            w_min: lit(-20.0),
            w_max: lit(20.0),
        }
    }
}

impl<T: Scalar> Domain<T> {
    pub fn validate(&self) -> Result<(), SolveError> {
        let ok = self.r_min >= T::zero()
            && self.r_max > self.r_min
            && self.w_max > self.w_min
            && [self.r_min, self.r_max, self.w_min, self.w_max].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidDomain(
                "need 0 <= r_min < r_max and w_min < w_max".into(),
            ))
        }
    }

    pub fn diameter(&self) -> T {
        (self.r_max - self.r_min).hypot(self.w_max - self.w_min)
    }

    fn contains(&self, x: &Vec2<T>) -> bool {
        x[0] > self.r_min && x[0] <= self.r_max && x[1] >= self.w_min && x[1] <= self.w_max
    }

    /// Newton iterates that leave this box are abandoned.
    fn far(&self, x: &Vec2<T>) -> bool {
        let pad = self.diameter();
        x[0] > self.r_max + pad || x[1] > self.w_max + pad || x[1] < self.w_min - pad
    }
}

/// Knobs of the zero search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub domain: Domain<T>,
    pub seeds: usize,
    pub grid: usize,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            domain: Domain::default(),
            seeds: 24,
            grid: DEFAULT_GRID,
        }
    }
}

const MAX_ITER: usize = 80;
const MAX_HALVINGS: usize = 30;
const DEFLATION_ROUNDS: usize = 3;

fn norm2<T: Scalar>(v: &Vec2<T>) -> T {
    v[0].hypot(v[1])
}

/// Central-difference Jacobian used inside Newton iterations.
fn quick_jacobian<T: Scalar>(field: &AveragedField<T>, x: Vec2<T>) -> Mat2<T> {
    let mut jac = [[T::zero(); 2]; 2];
    for j in 0..2 {
        let h = lit::<T>(1e-6) * (T::one() + x[j].abs());
        let mut p = x;
        let mut m = x;
        p[j] += h;
        m[j] -= h;
        let (fp, fm) = (field.eval(p), field.eval(m));
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / (h + h);
        }
    }
    jac
}

/// `M(x) = Π (1/|x - x_i|² + 1)` and its gradient.
fn deflation<T: Scalar>(x: &Vec2<T>, roots: &[Vec2<T>]) -> (T, Vec2<T>) {
    let mut m = T::one();
    let mut g = [T::zero(); 2];
    for z in roots {
        let d = [x[0] - z[0], x[1] - z[1]];
        let d2 = d[0] * d[0] + d[1] * d[1];
        let mi = T::one() / d2 + T::one();
        let scale = -lit::<T>(2.0) / (d2 * d2 * mi);
        g[0] += scale * d[0];
        g[1] += scale * d[1];
        m *= mi;
    }
    (m, [g[0] * m, g[1] * m])
}

fn newton<T: Scalar>(
    field: &AveragedField<T>,
    x0: Vec2<T>,
    domain: &Domain<T>,
    deflate: &[Vec2<T>],
) -> Option<Vec2<T>> {
    let residual = |x: &Vec2<T>| -> (Vec2<T>, T) {
        let f = field.eval(*x);
        let (m, _) = deflation(x, deflate);
        let g = [m * f[0], m * f[1]];
        (f, norm2(&g))
    };
    let mut x = x0;
    let (mut f, mut res) = residual(&x);
    for _ in 0..MAX_ITER {
        if !res.is_finite() {
            return None;
        }
        let mut jac = quick_jacobian(field, x);
        let (m, grad) = deflation(&x, deflate);
        for i in 0..2 {
            for j in 0..2 {
                jac[i][j] = m * jac[i][j] + f[i] * grad[j];
            }
        }
        let rhs = [-m * f[0], -m * f[1]];
        let step = solve2(&jac, &rhs)?;
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if trial[0] > T::zero() {
                let (ft, rt) = residual(&trial);
                if rt < res {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            lambda *= lit(0.5);
        }
        let Some((next, fnext, rnext)) = accepted else {
            break;
        };
        let moved = lambda * norm2(&step);
        x = next;
        f = fnext;
        res = rnext;
        if domain.far(&x) {
            return None;
        }
        if moved <= lit::<T>(1e-12) * (T::one() + norm2(&x)) {
            break;
        }
    }
    Some(x)
}

fn accept<T: Scalar>(field: &AveragedField<T>, x: Vec2<T>, domain: &Domain<T>) -> Option<AveragedZero<T>> {
    if !domain.contains(&x) {
        return None;
    }
    let f = field.eval(x);
    let jac = field.jacobian(x);
    let residual = norm2(&f);
    let scale = T::one() + frobenius2(&jac) * (T::one() + norm2(&x));
    if !(residual <= lit::<T>(1e-10) * scale) {
        return None;
    }
    let (eigenvalues, classification) = classify(&jac);
    Some(AveragedZero {
        r: x[0],
        w: x[1],
        jac,
        eigenvalues,
        classification,
        residual,
    })
}

/// Eigenvalues and stability class of a 2x2 Jacobian.
pub fn classify<T: Scalar>(jac: &Mat2<T>) -> ([Complex<T>; 2], Classification) {
    let ev = eig2(jac);
    let fro = frobenius2(jac);
    if det2(jac).abs() <= lit::<T>(1e-8) * fro * fro {
        return (ev, Classification::Degenerate);
    }
    let class = if ev[0].im != T::zero() {
        if ev[0].re < T::zero() {
            Classification::StableFocus
        } else {
            Classification::UnstableFocus
        }
    } else if ev[0].re > T::zero() && ev[1].re < T::zero() {
        Classification::Saddle
    } else if ev[0].re < T::zero() {
        Classification::StableNode
    } else {
        Classification::UnstableNode
    };
    (ev, class)
}

fn merge<T: Scalar>(found: &mut Vec<AveragedZero<T>>, cand: Vec<AveragedZero<T>>, tol: T) -> usize {
    let mut added = 0;
    let mut cand = cand;
    sort_zeros(&mut cand);
    for z in cand {
        let dup = found
            .iter()
            .any(|f| (f.r - z.r).hypot(f.w - z.w) <= tol);
        if !dup {
            found.push(z);
            added += 1;
        }
    }
    sort_zeros(found);
    added
}

fn sort_zeros<T: Scalar>(v: &mut [AveragedZero<T>]) {
    v.sort_by(|a, b| {
        (a.r, a.w)
            .partial_cmp(&(b.r, b.w))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Damped Newton from a `seeds × seeds` grid, followed by deflated Newton
/// rounds against the roots found so far. Degenerate zeros are returned
/// with [`Classification::Degenerate`].
pub fn find_zeros<T: Scalar>(
    field: &AveragedField<T>,
    domain: &Domain<T>,
    seeds: usize,
) -> Result<Vec<AveragedZero<T>>, SolveError> {
    domain.validate()?;
    if seeds == 0 {
        return Err(SolveError::InvalidDomain("seeds must be positive".into()));
    }
    let n = lit::<T>(seeds as f64);
    let grid: Vec<Vec2<T>> = (0..seeds * seeds)
        .map(|k| {
            let (i, j) = (k / seeds, k % seeds);
            let fi = (lit::<T>(i as f64) + lit(0.5)) / n;
            let fj = (lit::<T>(j as f64) + lit(0.5)) / n;
            [
                domain.r_min + fi * (domain.r_max - domain.r_min),
                domain.w_min + fj * (domain.w_max - domain.w_min),
            ]
        })
        .collect();
    let tol = lit::<T>(1e-6) * domain.diameter();

    let first: Vec<AveragedZero<T>> = grid
        .par_iter()
        .filter_map(|x0| newton(field, *x0, domain, &[]).and_then(|x| accept(field, x, domain)))
        .collect();
    let mut found = Vec::new();
    merge(&mut found, first, tol);

    for _ in 0..DEFLATION_ROUNDS {
        let known: Vec<Vec2<T>> = found.iter().map(|z| [z.r, z.w]).collect();
        if known.is_empty() {
            break;
        }
        let cand: Vec<AveragedZero<T>> = grid
            .par_iter()
            .filter_map(|x0| {
                let x = newton(field, *x0, domain, &known)?;
                let x = newton(field, x, domain, &[])?;
                accept(field, x, domain)
            })
            .collect();
        if merge(&mut found, cand, tol) == 0 {
            break;
        }
    }
    Ok(found)
}

/// Closed-form zero of the first-order average of an origin unfolding;
/// `None` if the hypotheses fail or no positive radius exists.
pub fn closed_form_zero_origin<T: Scalar>(f: &PerturbationOrigin<T>) -> Option<(T, T)> {
    if !f.hypotheses_hold() {
        return None;
    }
    let (a0, a2, b0, b2, om) = (f.abar0, f.abar2, f.beta0, f.beta2, f.omega);
    let o2 = om * om;
    let two = lit::<T>(2.0);
    let w = (a0 * b0 * o2 * (T::one() - o2) + b2 * o2 * o2) / (two * a0 * a0 * a2 * (o2 - T::one()));
    let r2 = -(two * w * b0 * o2 + two * a0 * a2 * w * w) / (a0 * a2 * o2);
    (r2 > T::zero()).then(|| (r2.sqrt(), w))
}

/// `(Γ as printed, s² - β2²ω⁴)` with `s = ā0β0(1-ω²)`. The second value is
/// positive exactly when the first-order average has a zero with `r > 0`.
pub fn gamma<T: Scalar>(f: &PerturbationOrigin<T>) -> (T, T) {
    let o2 = f.omega * f.omega;
    let s = f.abar0 * f.beta0 * (T::one() - o2);
    let printed = (s + f.beta2 * o2) * (o2 * s + f.beta2 * o2 * o2);
    (printed, s * s - f.beta2 * f.beta2 * o2 * o2)
}

/// Eigenvalues of the averaged Jacobian at the origin-family zero, from the
/// closed form `(-β2ω⁵ ± √(ω⁶(β2²ω⁴(3-2ω²) + 2ā0²β0²(ω²-1)³))) / (2ω⁶(ω²-1))`.
pub fn stability_eigenvalues_origin<T: Scalar>(f: &PerturbationOrigin<T>) -> [Complex<T>; 2] {
    let om = f.omega;
    let o2 = om * om;
    let o4 = o2 * o2;
    let o6 = o4 * o2;
    let (two, three) = (lit::<T>(2.0), lit::<T>(3.0));
    let m = o2 - T::one();
    let rad = o6
        * (f.beta2 * f.beta2 * o4 * (three - two * o2)
            + two * f.abar0 * f.abar0 * f.beta0 * f.beta0 * m * m * m);
    let root = Complex::new(rad, T::zero()).sqrt();
    let den = two * o6 * m;
    let base = Complex::new(-f.beta2 * o4 * om, T::zero());
    [(base + root) / den, (base - root) / den]
}

/// One reading of the printed elimination polynomials and its solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct GroebnerReading<T> {
    pub label: &'static str,
    /// Coefficients of `G1` as a cubic in `w`, highest power first.
    pub g1: [T; 4],
    /// `(w, r)` pairs with `G1(w) = 0`, `G2(r, w) = 0` and `r > 0`.
    pub solutions: Vec<(T, T)>,
}

/// The printed `G1` has an ambiguously grouped constant term; both readings
/// are evaluated.
pub fn groebner_reference<T: Scalar>(
    f: &PerturbationPMinus<T>,
) -> Result<Vec<GroebnerReading<T>>, SolveError> {
    f.validate()?;
    let (a0, a1, al2, z0, z2, om) = (f.abar0, f.abar1, f.alpha2, f.zeta0, f.zeta2, f.omega);
    let q = f.q();
    let s = al2 + lit::<T>(6.0) * q;
    let o2 = om * om;
    let o4 = o2 * o2;
    let o6 = o4 * o2;
    let m = o2 - T::one();
    let c = |v: f64| lit::<T>(v);
    let c3 = c(30.0) * m * a0.powi(4) * a1.powi(3);
    let c2 = -c(15.0) * m * o2 * a1 * a1 * a0.powi(3) * s;
    let c1 = c(2.0) * a0 * a1 * o4
        * (-c(6.0) * a1 * z2 * o2 + a0 * (al2 * al2 - c(42.0) * a1 * z0 + c(15.0) * al2 * q * m));
    let tail = a0 * (c(8.0) * a1 * al2 * z0 - al2 * al2 * q - c(12.0) * (-a1 * z0) * q * m);
    let literal = c(2.0) * o6 * (a1 * (al2 + c(6.0) * q * z2 * o2) + tail);
    let grouped = c(2.0) * o6 * (a1 * (s * z2 * o2) + tail);

    let p1 = |w: T| a0 * a1 * o2 * (c(6.0) * a0 * a1 * w - al2 * o2 - c(6.0) * o2 * q);
    let p2 = |w: T| {
        c(2.0) * w
            * (c(2.0) * a0 * a0 * a1 * a1 * w * w - a0 * a1 * w * s * o2
                + c(2.0) * (-c(2.0) * a1 * z0 + al2 * q) * o4)
    };
    let mut out = Vec::new();
    for (label, c0) in [("literal", literal), ("grouped", grouped)] {
        let g1 = [c3, c2, c1, c0];
        let mut solutions = Vec::new();
        if c3 != T::zero() {
            for root in solve_cubic(&Cubic::new(g1))? {
                let w = root.value;
                let den = p1(w);
                if den != T::zero() {
                    let r2 = -p2(w) / den;
                    if r2 > T::zero() {
                        solutions.push((w, r2.sqrt()));
                    }
                }
            }
        }
        out.push(GroebnerReading { label, g1, solutions });
    }
    Ok(out)
}

/// The printed three-solution values for `α2 = -6√(-ā1ζ0)`:
/// `(r*, w*+)`, `(r*, w*-)` and `(r⁰, 0)`, each `None` when its radicand is
/// not positive.
pub fn printed_three_solutions<T: Scalar>(f: &PerturbationPMinus<T>) -> [(&'static str, Option<(T, T)>); 3] {
    let (a0, a1, z0, z2, om) = (f.abar0, f.abar1, f.zeta0, f.zeta2, f.omega);
    let o2 = om * om;
    let m = o2 - T::one();
    let c = |v: f64| lit::<T>(v);
    let rad_r = (c(8.0) * a0 * z0 * (T::one() - o2) - z2) / (a0.powi(3) * a1 * m);
    let rad_w = -(c(4.0) * a0 * z0 * (T::one() - o2) + c(2.0) * z2 * o2) / (c(5.0) * a0 * m);
    let rad_0 = (c(4.0) * a0 * z0 * (T::one() - o2) + z2) / (a0.powi(3) * a1 * m);
    let pos = |v: T| v > T::zero();
    let star = (pos(rad_r) && pos(rad_w) && pos(a1)).then(|| {
        (
            c(2.0) * om / c(15.0).sqrt() * rad_r.sqrt(),
            o2 / (a0 * a1.sqrt()) * rad_w.sqrt(),
        )
    });
    let zero = pos(rad_0).then(|| (c(2.0) * om / c(3.0).sqrt() * rad_0.sqrt(), T::zero()));
    [
        ("r*,w*+", star),
        ("r*,w*-", star.map(|(r, w)| (r, -w))),
        ("r0,0", zero),
    ]
}

/// Second-order prediction for a `p-` unfolding.
#[derive(Debug, Clone)]
pub struct Prediction<T: Scalar> {
    pub count: usize,
    pub zeros: Vec<AveragedZero<T>>,
    pub field: AveragedField<T>,
}

/// Counts the non-degenerate zeros with `r > 0` of the second-order average.
pub fn predict_cycle_count<T: Scalar>(
    f: &PerturbationPMinus<T>,
    zeta2_override: Option<T>,
    opts: &SolveOptions<T>,
) -> Result<Prediction<T>, SolveError> {
    let mut fam = *f;
    if let Some(z2) = zeta2_override {
        fam.zeta2 = z2;
    }
    let sf = crate::transform::standard_form_pminus(&fam)?;
    let field = average_second(std::sync::Arc::new(sf), opts.grid)?;
    let zeros = find_zeros(&field, &opts.domain, opts.seeds)?;
    let count = zeros.iter().filter(|z| !z.is_degenerate() && z.r > T::zero()).count();
    Ok(Prediction { count, zeros, field })
}

/// Prediction for any family: first-order average at the origin, second
/// order at `p-`/`p+`.
pub fn predict_family<T: Scalar>(
    family: &Family<T>,
    opts: &SolveOptions<T>,
) -> Result<Prediction<T>, SolveError> {
    let field = average_family(family, opts.grid)?;
    let zeros = find_zeros(&field, &opts.domain, opts.seeds)?;
    let count = zeros.iter().filter(|z| !z.is_degenerate() && z.r > T::zero()).count();
    Ok(Prediction { count, zeros, field })
}
