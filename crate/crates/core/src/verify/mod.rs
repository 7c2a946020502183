//! Direct verification of averaging predictions: integration of the full
//! system, Poincaré shooting, Floquet multipliers and ε-sweeps.

pub mod dopri;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{eigenvalues, solve2, Mat2, Mat3, Vec2, Vec3};
use crate::model::ChuaParams;
use crate::scalar::{lit, Scalar};
use crate::solve::{predict_family, AveragedZero, SolveError, SolveOptions};
use crate::transform::{Family, TransformError};

pub use dopri::{integrate_system, DenseTrajectory, Segment, Stepper, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("no return to the section within t = {time}")]
    NoReturn { time: f64 },
    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("no monodromy eigenvalue near 1 (closest at distance {distance:e})")]
    NoTrivialMultiplier { distance: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Integrator and shooting settings. The absolute tolerance is
/// `atol_per_eps · ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions<T> {
    pub rtol: T,
    pub atol_per_eps: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for VerifyOptions<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-11),
            atol_per_eps: lit(1e-13),
            max_iterations: 25,
        }
    }
}

impl<T: Scalar> VerifyOptions<T> {
    pub fn tolerances(&self, eps: T) -> Tolerances<T> {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol_per_eps * eps,
        }
    }
}

/// A verified periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitResult<T> {
    pub eps: T,
    pub initial_state: Vec3<T>,
    pub period: T,
    pub multipliers: [Complex<T>; 2],
    pub trivial_multiplier: Complex<T>,
    pub residual: T,
    pub pullback: (T, T),
    /// Max-norm distance of the orbit from the anchoring equilibrium.
    pub amplitude: T,
    pub iterations: usize,
}

impl<T: Scalar> OrbitResult<T> {
    pub fn unstable_multipliers(&self) -> usize {
        self.multipliers.iter().filter(|m| m.norm() > T::one()).count()
    }
}

fn norm3<T: Scalar>(v: &Vec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn check_eps<T: Scalar>(eps: T) -> Result<(), VerifyError> {
    if eps > T::zero() && eps <= lit(0.1) {
        Ok(())
    } else {
        Err(VerifyError::InvalidInput(format!("eps = {eps} outside (0, 0.1]")))
    }
}

/// Integrates the Chua system over `t_span` with dense output.
pub fn integrate<T: Scalar>(
    params: &ChuaParams<T>,
    state0: Vec3<T>,
    t_span: (T, T),
    rtol: T,
    atol: T,
) -> Result<DenseTrajectory<T, 3>, VerifyError> {
    let p = *params;
    integrate_system(
        move |y: &Vec3<T>| p.vector_field(y),
        state0,
        t_span.0,
        t_span.1,
        Tolerances { rtol, atol },
    )
}

/// `Σ = {v = 0, u > 0}` around the anchor, as a linear function of the state.
#[derive(Debug, Clone, Copy)]
struct Section<T> {
    anchor: Vec3<T>,
    normal: Vec3<T>,
}

impl<T: Scalar> Section<T> {
    fn new(family: &Family<T>, eps: T) -> Self {
        let om = family.omega();
        Self {
            anchor: family.anchor(eps),
            normal: [(om * om - T::one()) / family.abar0(), -T::one(), T::zero()],
        }
    }

    fn sigma(&self, y: &Vec3<T>) -> T {
        (0..3).map(|i| self.normal[i] * (y[i] - self.anchor[i])).sum()
    }

    fn rate(&self, f: &Vec3<T>) -> T {
        (0..3).map(|i| self.normal[i] * f[i]).sum()
    }

    fn u_positive(&self, y: &Vec3<T>) -> bool {
        y[2] > self.anchor[2]
    }
}

/// Value of the section function on a segment, as a function of the
/// normalised step fraction.
fn crossing_fraction<T: Scalar>(sec: &Section<T>, seg: &Segment<T, 3>) -> T {
    let g = |s: T| sec.sigma(&seg.eval(seg.t0 + s * seg.h));
    let (mut a, mut b) = (T::zero(), T::one());
    let (mut ga, mut gb) = (g(a), g(b));
    let mut side = 0i8;
    for _ in 0..200 {
        if gb == ga {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c);
        if gc == T::zero() || (b - a).abs() <= lit::<T>(1e-15) {
            return c;
        }
        if (gc < T::zero()) == (ga < T::zero()) {
            a = c;
            ga = gc;
            if side == -1 {
                gb = gb * lit(0.5);
            }
            side = -1;
        } else {
            b = c;
            gb = gc;
            if side == 1 {
                ga = ga * lit(0.5);
            }
            side = 1;
        }
    }
    (a + b) * lit(0.5)
}

/// First return to Σ, crossing from `v < 0` to `v > 0` with `u > 0`.
pub fn poincare_map<T: Scalar>(
    params: &ChuaParams<T>,
    family: &Family<T>,
    eps: T,
    state: Vec3<T>,
    opts: &VerifyOptions<T>,
) -> Result<(Vec3<T>, T), VerifyError> {
    let sec = Section::new(family, eps);
    let period = T::TAU() / family.omega();
    let t_max = lit::<T>(10.0) * period;
    let t_min = lit::<T>(0.25) * period;
    let p = *params;
    let f = move |y: &Vec3<T>| p.vector_field(y);
    let mut st = Stepper::new(f, T::zero(), state, opts.tolerances(eps))?;
    while st.time() < t_max {
        let seg = st.step(t_max)?;
        let (y0, y1) = (seg.start(), seg.end());
        if seg.t0 + seg.h < t_min || !(sec.sigma(&y0) < T::zero() && sec.sigma(&y1) >= T::zero()) {
            continue;
        }
        let s = crossing_fraction(&sec, &seg);
        if !sec.u_positive(&seg.eval(seg.t0 + s * seg.h)) {
            continue;
        }
        // re-step from the segment start with the exact crossing step
        let f = st.rhs();
        let k1 = f(&y0);
        let mut h = s * seg.h;
        let mut y = seg.eval(seg.t0 + h);
        for _ in 0..6 {
            y = dopri::raw_step(f, &y0, &k1, h).y;
            let rate = sec.rate(&f(&y));
            if rate == T::zero() {
                break;
            }
            let dh = sec.sigma(&y) / rate;
            h -= dh;
            if dh.abs() <= lit::<T>(1e-12) * (T::one() + seg.t0.abs()) {
                y = dopri::raw_step(f, &y0, &k1, h).y;
                break;
            }
        }
        return Ok((y, seg.t0 + h));
    }
    Err(VerifyError::NoReturn {
        time: t_max.to_f64().unwrap_or(f64::NAN),
    })
}

/// Poincaré displacement in the `(r, w)` chart of Σ.
fn displacement<T: Scalar>(
    params: &ChuaParams<T>,
    family: &Family<T>,
    eps: T,
    x: Vec2<T>,
    opts: &VerifyOptions<T>,
) -> Result<(Vec2<T>, Vec3<T>, Vec3<T>, T), VerifyError> {
    let s0 = family.lift_orbit(eps, x[0], T::zero(), x[1])?;
    let (s1, t) = poincare_map(params, family, eps, s0, opts)?;
    let [u, _, w] = family.pullback(eps, &s1)?;
    Ok(([u - x[0], w - x[1]], s0, s1, t))
}

/// Monodromy matrix and the orbit's amplitude about `anchor`.
fn monodromy<T: Scalar>(
    params: &ChuaParams<T>,
    x0: Vec3<T>,
    period: T,
    anchor: Vec3<T>,
    tol: Tolerances<T>,
) -> Result<(Mat3<T>, T), VerifyError> {
    let p = *params;
    let rhs = move |y: &[T; 12]| {
        let s = [y[0], y[1], y[2]];
        let f = p.vector_field(&s);
        let j = p.jacobian(&s);
        let mut out = [T::zero(); 12];
        out[..3].copy_from_slice(&f);
        for r in 0..3 {
            for c in 0..3 {
                out[3 + 3 * r + c] = (0..3).map(|k| j[r][k] * y[3 + 3 * k + c]).sum();
            }
        }
        out
    };
    let mut y0 = [T::zero(); 12];
    y0[..3].copy_from_slice(&x0);
    for i in 0..3 {
        y0[3 + 4 * i] = T::one();
    }
    let tr = integrate_system(rhs, y0, T::zero(), period, tol)?;
    let mut amp = T::zero();
    for seg in tr.segments() {
        for k in 0..4 {
            let y = seg.eval(seg.t0 + seg.h * lit::<T>(k as f64 * 0.25));
            for i in 0..3 {
                amp = amp.max((y[i] - anchor[i]).abs());
            }
        }
    }
    let yt = tr.final_state();
    let m = std::array::from_fn(|r| std::array::from_fn(|c| yt[3 + 3 * r + c]));
    Ok((m, amp))
}

/// Newton shooting on the Poincaré displacement from an averaged zero.
pub fn find_periodic_orbit<T: Scalar>(
    params: &ChuaParams<T>,
    family: &Family<T>,
    eps: T,
    seed: &AveragedZero<T>,
    opts: &VerifyOptions<T>,
) -> Result<OrbitResult<T>, VerifyError> {
    shoot(params, family, eps, [seed.r, seed.w], opts)
}

fn shoot<T: Scalar>(
    params: &ChuaParams<T>,
    family: &Family<T>,
    eps: T,
    start: Vec2<T>,
    opts: &VerifyOptions<T>,
) -> Result<OrbitResult<T>, VerifyError> {
    check_eps(eps)?;
    if !(start[0] > T::zero()) || !start[1].is_finite() {
        return Err(VerifyError::InvalidInput("seed needs r > 0".into()));
    }
    let tol = opts.tolerances(eps);
    let disp = |x: Vec2<T>| displacement(params, family, eps, x, opts);
    let nrm = |d: &Vec2<T>| d[0].hypot(d[1]);
    let converged = |d: &Vec2<T>, s0: &Vec3<T>| {
        eps * nrm(d) <= lit::<T>(1e-10) * (T::one() + norm3(s0))
    };
    let fail = |d: T, it: usize| VerifyError::NoConvergence {
        residual: (eps * d).to_f64().unwrap_or(f64::NAN),
        iterations: it,
    };

    let mut x = start;
    let (mut d, mut s0, mut s1, mut period) = disp(x)?;
    let mut iterations = 0;
    while !converged(&d, &s0) {
        if iterations >= opts.max_iterations {
            return Err(fail(nrm(&d), iterations));
        }
        iterations += 1;
        let mut jac: Mat2<T> = [[T::zero(); 2]; 2];
        for j in 0..2 {
            let h = lit::<T>(1e-5) * (T::one() + x[j].abs());
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let dp = disp(xp)?.0;
            let dm = disp(xm)?.0;
            for i in 0..2 {
                jac[i][j] = (dp[i] - dm[i]) / (h + h);
            }
        }
        let step = solve2(&jac, &[-d[0], -d[1]]).ok_or_else(|| fail(nrm(&d), iterations))?;
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if trial[0] > T::zero() {
                if let Ok(res) = disp(trial) {
                    if nrm(&res.0) < nrm(&d) {
                        accepted = Some((trial, res));
                        break;
                    }
                }
            }
            lambda = lambda * lit(0.5);
        }
        let Some((trial, res)) = accepted else {
            if converged(&[d[0] * lit(0.1), d[1] * lit(0.1)], &s0) {
                break;
            }
            return Err(fail(nrm(&d), iterations));
        };
        x = trial;
        (d, s0, s1, period) = res;
    }

    let gap = [s1[0] - s0[0], s1[1] - s0[1], s1[2] - s0[2]];
    let residual = norm3(&gap) + lit::<T>(10.0) * (tol.atol + tol.rtol * norm3(&s0));
    if residual > lit::<T>(1e-9) * (T::one() + norm3(&s0)) {
        return Err(fail(nrm(&d), iterations));
    }
    let (m, amplitude) = monodromy(params, s0, period, family.anchor(eps), tol)?;
    let ev = eigenvalues(m.iter().map(|r| r.to_vec()).collect())
        .ok_or_else(|| fail(nrm(&d), iterations))?;
    let one = Complex::new(T::one(), T::zero());
    let (ti, dist) = ev
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (*z - one).norm()))
        .fold((0, T::infinity()), |acc, c| if c.1 < acc.1 { c } else { acc });
    if dist > lit(1e-5) {
        return Err(VerifyError::NoTrivialMultiplier {
            distance: dist.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut rest: Vec<Complex<T>> = (0..3).filter(|&i| i != ti).map(|i| ev[i]).collect();
    rest.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(OrbitResult {
        eps,
        initial_state: s0,
        period,
        multipliers: [rest[0], rest[1]],
        trivial_multiplier: ev[ti],
        residual,
        pullback: (x[0], x[1]),
        amplitude,
        iterations,
    })
}

/// One `(ε, seed)` entry of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub eps: T,
    pub orbit_id: usize,
    pub prediction: (T, T),
    pub outcome: Result<OrbitResult<T>, VerifyError>,
}

impl<T: Scalar> SweepRow<T> {
    /// `|(r_ε, w_ε) - (r*, w*)|`.
    pub fn distance(&self) -> Option<T> {
        let o = self.outcome.as_ref().ok()?;
        Some((o.pullback.0 - self.prediction.0).hypot(o.pullback.1 - self.prediction.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T> {
    pub eps: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepTable<T> {
    pub fn orbit(&self, orbit_id: usize) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(move |r| r.orbit_id == orbit_id)
    }

    /// `d(ε_k) / d(ε_{k+1})` along one orbit.
    pub fn distance_ratios(&self, orbit_id: usize) -> Vec<Option<T>> {
        let d: Vec<Option<T>> = self.orbit(orbit_id).map(|r| r.distance()).collect();
        d.windows(2)
            .map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) if b > T::zero() => Some(a / b),
                _ => None,
            })
            .collect()
    }

    /// Successive amplitude ratios along one orbit.
    pub fn amplitude_ratios(&self, orbit_id: usize) -> Vec<Option<T>> {
        let a: Vec<Option<T>> = self
            .orbit(orbit_id)
            .map(|r| r.outcome.as_ref().ok().map(|o| o.amplitude))
            .collect();
        a.windows(2)
            .map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) if b > T::zero() => Some(a / b),
                _ => None,
            })
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// Tracks each seed through the decreasing ε list. When shooting from the
/// averaged zero fails, the previous ε's pullback is tried as a seed.
pub fn continuation_sweep<T: Scalar>(
    family: &Family<T>,
    eps_list: &[T],
    seeds: &[AveragedZero<T>],
    opts: &VerifyOptions<T>,
) -> Result<SweepTable<T>, VerifyError> {
    family.validate()?;
    if eps_list.is_empty() {
        return Err(VerifyError::InvalidInput("empty eps list".into()));
    }
    if eps_list.iter().any(|e| !(*e > T::zero())) || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VerifyError::InvalidInput("eps list must be positive and decreasing".into()));
    }
    let per_seed: Vec<Vec<SweepRow<T>>> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, seed)| {
            let mut prev: Option<Vec2<T>> = None;
            eps_list
                .iter()
                .map(|&eps| {
                    let params = family.params_at(eps);
                    let mut outcome = shoot(&params, family, eps, [seed.r, seed.w], opts);
                    if let (Err(_), Some(p)) = (&outcome, prev) {
                        if let Ok(o) = shoot(&params, family, eps, p, opts) {
                            outcome = Ok(o);
                        }
                    }
                    prev = outcome.as_ref().ok().map(|o| [o.pullback.0, o.pullback.1]).or(prev);
                    SweepRow {
                        eps,
                        orbit_id: id,
                        prediction: (seed.r, seed.w),
                        outcome,
                    }
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(seeds.len() * eps_list.len());
    for k in 0..eps_list.len() {
        for s in &per_seed {
            rows.push(s[k].clone());
        }
    }
    Ok(SweepTable {
        eps: eps_list.to_vec(),
        rows,
    })
}

/// Outcome of [`count_limit_cycles`].
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCount<T> {
    pub eps: T,
    pub predicted: usize,
    pub zeros: Vec<AveragedZero<T>>,
    pub orbits: Vec<OrbitResult<T>>,
    pub failures: Vec<(usize, VerifyError)>,
}

impl<T> CycleCount<T> {
    pub fn verified(&self) -> usize {
        self.orbits.len()
    }

    /// Verified and predicted counts disagree.
    pub fn mismatch(&self) -> bool {
        self.orbits.len() != self.predicted
    }
}

/// Predicts the cycles of `family` and shoots for each one at `eps`.
pub fn count_limit_cycles<T: Scalar>(
    family: &Family<T>,
    eps: T,
    solve_opts: &SolveOptions<T>,
    opts: &VerifyOptions<T>,
) -> Result<CycleCount<T>, VerifyError> {
    family.validate()?;
    let pred = predict_family(family, solve_opts)?;
    let zeros: Vec<AveragedZero<T>> = pred
        .zeros
        .iter()
        .filter(|z| !z.is_degenerate() && z.r > T::zero())
        .copied()
        .collect();
    let params = family.params_at(eps);
    let results: Vec<Result<OrbitResult<T>, VerifyError>> = zeros
        .par_iter()
        .map(|z| find_periodic_orbit(&params, family, eps, z, opts))
        .collect();
    let tol = opts.tolerances(eps);
    let mut orbits: Vec<OrbitResult<T>> = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => {
                let sep = lit::<T>(10.0) * (tol.atol + tol.rtol * norm3(&o.initial_state));
                let dup = orbits.iter().any(|q| {
                    let d = [
                        q.initial_state[0] - o.initial_state[0],
                        q.initial_state[1] - o.initial_state[1],
                        q.initial_state[2] - o.initial_state[2],
                    ];
                    norm3(&d) <= sep
                });
                if !dup {
                    orbits.push(o);
                }
            }
            Err(e) => failures.push((i, e)),
        }
    }
    let out = CycleCount {
        eps,
        predicted: pred.count,
        zeros,
        orbits,
        failures,
    };
    if out.mismatch() {
        log::warn!(
            "verified {} of {} predicted cycles at eps = {}",
            out.verified(),
            out.predicted,
            eps
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::average_first;
    use crate::solve::{find_zeros, Domain};
    use crate::transform::{standard_form_origin, PerturbationOrigin};
    use std::sync::Arc;

    fn origin_bench() -> Family<f64> {
        Family::Origin(PerturbationOrigin {
            abar0: 1.0,
            abar2: 1.0,
            beta0: 2.0,
            beta2: 1.0,
            omega: 2.0,
            ..Default::default()
        })
    }

    fn bench_zero() -> AveragedZero<f64> {
        let Family::Origin(f) = origin_bench() else { unreachable!() };
        let field = average_first(Arc::new(standard_form_origin(&f).unwrap()), 256).unwrap();
        find_zeros(&field, &Domain::default(), 8).unwrap()[0]
    }

    fn expm_linear(t: f64) -> Mat3<f64> {
        let a = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [-3.0, 1.0, 0.0]];
        let a2 = crate::linalg::mat3_mul(&a, &a);
        let (s, c) = (2.0 * t).sin_cos();
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let id = if i == j { 1.0 } else { 0.0 };
                id + s / 2.0 * a[i][j] + (1.0 - c) / 4.0 * a2[i][j]
            })
        })
    }

    #[test]
    fn linear_oracle() {
        let p = ChuaParams::new(1.0, 0.0, 0.0, 0.0, 3.0, 0.0);
        let tr = integrate(&p, [0.0, 1.0, 0.0], (0.0, std::f64::consts::PI), 1e-11, 1e-13).unwrap();
        for k in 0..=20 {
            let t = std::f64::consts::PI * k as f64 / 20.0;
            let want = crate::linalg::mat3_vec(&expm_linear(t), &[0.0, 1.0, 0.0]);
            let got = tr.eval(t);
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-9, "t={t} {got:?} {want:?}");
            }
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = ChuaParams::new(1.0, 1.0, 1.0, 0.0, 3.0, 0.0);
        let tr = integrate(&p, [0.0; 3], (0.0, 5.0), 1e-9, 1e-12).unwrap();
        assert_eq!(tr.final_state(), [0.0; 3]);
    }

    #[test]
    fn equilibrium_never_returns() {
        let fam = origin_bench();
        let eps = 0.01;
        let p = fam.params_at(eps);
        let r = poincare_map(&p, &fam, eps, fam.anchor(eps), &VerifyOptions::default());
        assert!(matches!(r, Err(VerifyError::NoReturn { .. })));
    }

    #[test]
    fn rejects_out_of_range_eps() {
        let fam = origin_bench();
        let z = bench_zero();
        for eps in [0.0, -0.01, 0.5] {
            let r = find_periodic_orbit(&fam.params_at(0.01), &fam, eps, &z, &VerifyOptions::default());
            assert!(matches!(r, Err(VerifyError::InvalidInput(_))));
        }
    }

    #[test]
    fn origin_benchmark_orbit() {
        let fam = origin_bench();
        let eps = 0.01;
        let p = fam.params_at(eps);
        let opts = VerifyOptions::default();
        let o = find_periodic_orbit(&p, &fam, eps, &bench_zero(), &opts).unwrap();
        let pi = std::f64::consts::PI;
        assert!((o.period - pi).abs() <= 0.05 * pi);
        assert!(o.residual <= 1e-9 * (1.0 + norm3(&o.initial_state)));
        assert!((o.trivial_multiplier - Complex::new(1.0, 0.0)).norm() <= 1e-5);
        assert_eq!(o.unstable_multipliers(), 1);
        let (next, t) = poincare_map(&p, &fam, eps, o.initial_state, &opts).unwrap();
        let gap = [next[0] - o.initial_state[0], next[1] - o.initial_state[1], next[2] - o.initial_state[2]];
        assert!(norm3(&gap) <= o.residual);
        assert!((t - o.period).abs() < 1e-9);
        let d = (o.pullback.0 - 2.0 * 10f64.sqrt() / 3.0).hypot(o.pullback.1 + 4.0 / 3.0);
        assert!((d - 0.007234).abs() < 2e-4, "d = {d}");
    }
}
