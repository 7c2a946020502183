use std::sync::Arc;

use hopfforge::averaging::average_first;
use hopfforge::model::zero_hopf_family_origin;
use hopfforge::solve::find_zeros;
use hopfforge::transform::standard_form_origin;
use hopfforge::verify::{
    continuation_sweep, count_limit_cycles, find_periodic_orbit, integrate, poincare_map,
};
use hopfforge::{
    ChuaParams, Domain, EquilibriumKind, Family, PerturbationOrigin, PerturbationPMinus,
    SolveOptions, VerifyOptions,
};
use num_complex::Complex;
use proptest::prelude::*;

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

fn pminus(zeta2: f64) -> PerturbationPMinus<f64> {
    PerturbationPMinus {
        abar0: 1.0,
        abar1: 1.0,
        zeta0: -1.0,
        zeta2,
        alpha2: -6.0,
        omega: 2.0,
        ..Default::default()
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn origin_family_is_detected(a in 0.1..5.0f64, sign in any::<bool>(), a1 in -3.0..3.0f64, a2 in -3.0..3.0f64, omega in 0.2..5.0f64) {
        let a = if sign { a } else { -a };
        let (p, _) = zero_hopf_family_origin(a, a1, a2, omega).unwrap();
        let z = p.detect_zero_hopf(1e-9).unwrap().unwrap();
        prop_assert_eq!(z.equilibrium.kind, EquilibriumKind::Origin);
        prop_assert!((z.omega - omega).abs() <= 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences(p in prop::array::uniform6(-3.0..3.0f64), s in prop::array::uniform3(-2.0..2.0f64)) {
        let params = ChuaParams::from_array(p);
        let j = params.jacobian(&s);
        for c in 0..3 {
            let h = 1e-6;
            let (mut sp, mut sm) = (s, s);
            sp[c] += h;
            sm[c] -= h;
            let (fp, fm) = (params.vector_field(&sp), params.vector_field(&sm));
            for r in 0..3 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((fd - j[r][c]).abs() <= 1e-6 * (1.0 + j[r][c].abs()));
            }
        }
    }
}

#[test]
fn halving_rtol_improves_linear_oracle() {
    let p = ChuaParams::new(1.0, 0.0, 0.0, 0.0, 3.0, 0.0);
    let t = std::f64::consts::PI;
    // exp(At)·(0,1,0) at t = π returns to the start
    let exact = [0.0, 1.0, 0.0];
    let mut last = f64::INFINITY;
    for k in 0..6 {
        let rtol = 1e-5 / 2f64.powi(k);
        let tr = integrate(&p, [0.0, 1.0, 0.0], (0.0, t), rtol, rtol * 1e-2).unwrap();
        let e = tr.final_state();
        let err = norm(&[e[0] - exact[0], e[1] - exact[1], e[2] - exact[2]]);
        assert!(err < last, "rtol {rtol}: {err} vs {last}");
        last = err;
    }
}

#[test]
fn origin_orbit_invariants_and_shrinking() {
    let fam = Family::Origin(origin_bench());
    let field = average_first(Arc::new(standard_form_origin(&origin_bench()).unwrap()), 256).unwrap();
    let zeros = find_zeros(&field, &Domain::default(), 8).unwrap();
    let opts = VerifyOptions::default();
    let table = continuation_sweep(&fam, &[0.02, 0.01, 0.005], &zeros, &opts).unwrap();
    for row in &table.rows {
        let o = row.outcome.as_ref().unwrap();
        let p = fam.params_at(row.eps);
        let tr = integrate(&p, o.initial_state, (0.0, o.period), 1e-11, 1e-13 * row.eps).unwrap();
        let end = tr.final_state();
        let gap = [end[0] - o.initial_state[0], end[1] - o.initial_state[1], end[2] - o.initial_state[2]];
        assert!(norm(&gap) <= o.residual);
        assert!(o.residual <= 1e-9 * (1.0 + norm(&o.initial_state)));
        assert!((o.trivial_multiplier - Complex::new(1.0, 0.0)).norm() <= 1e-5);
        assert_eq!(Some(o.unstable_multipliers()), zeros[0].classification.unstable_dimension());
    }
    for q in table.amplitude_ratios(0) {
        let q = q.unwrap();
        assert!((1.5..=2.5).contains(&q), "amplitude ratio {q}");
    }
}

#[test]
fn return_time_near_rotation_period() {
    let fam = Family::Origin(origin_bench());
    let eps = 0.01;
    let p = fam.params_at(eps);
    let x0 = fam.lift_orbit(eps, 2.0, 0.0, -1.0).unwrap();
    let (_, t) = poincare_map(&p, &fam, eps, x0, &VerifyOptions::default()).unwrap();
    let period = std::f64::consts::PI;
    assert!((t - period).abs() <= 0.05 * period);
}

#[test]
fn pminus_sweep_tracks_three_distinct_orbits() {
    let f = pminus(-1.0);
    let fam = Family::PMinus(f);
    let opts = SolveOptions { seeds: 8, ..Default::default() };
    let pred = hopfforge::solve::predict_family(&fam, &opts).unwrap();
    assert_eq!(pred.count, 3);
    let vopts = VerifyOptions::default();
    let table = continuation_sweep(&fam, &[0.05, 0.025], &pred.zeros, &vopts).unwrap();
    assert_eq!(table.failures().count(), 0);
    for &eps in &table.eps {
        let orbits: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.eps == eps)
            .map(|r| r.outcome.clone().unwrap())
            .collect();
        let tol = vopts.tolerances(eps);
        for i in 0..orbits.len() {
            for j in 0..i {
                let (a, b) = (orbits[i].initial_state, orbits[j].initial_state);
                let d = norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
                assert!(d > 10.0 * (tol.atol + tol.rtol * norm(&a)));
            }
        }
        for (o, z) in orbits.iter().zip(&pred.zeros) {
            assert_eq!(Some(o.unstable_multipliers()), z.classification.unstable_dimension());
        }
    }
}

#[test]
fn count_is_deterministic() {
    let fam = Family::PMinus(pminus(-1.0));
    let opts = SolveOptions { seeds: 6, ..Default::default() };
    let a = count_limit_cycles(&fam, 0.05, &opts, &VerifyOptions::default()).unwrap();
    let b = count_limit_cycles(&fam, 0.05, &opts, &VerifyOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn benchmark_without_zeros_reports_no_mismatch() {
    let fam = Family::PMinus(pminus(-6.0));
    let opts = SolveOptions { seeds: 6, ..Default::default() };
    let c = count_limit_cycles(&fam, 0.05, &opts, &VerifyOptions::default()).unwrap();
    assert_eq!((c.predicted, c.verified()), (0, 0));
    assert!(!c.mismatch());
}

#[test]
fn shooting_rejects_large_eps() {
    let fam = Family::Origin(origin_bench());
    let field = average_first(Arc::new(standard_form_origin(&origin_bench()).unwrap()), 256).unwrap();
    let z = find_zeros(&field, &Domain::default(), 8).unwrap()[0];
    assert!(find_periodic_orbit(&fam.params_at(0.5), &fam, 0.5, &z, &VerifyOptions::default()).is_err());
}

#[test]
fn single_precision_prediction() {
    let f = PerturbationOrigin::<f32> {
        abar0: 1.0,
        abar2: 1.0,
        beta0: 2.0,
        beta2: 1.0,
        omega: 2.0,
        ..Default::default()
    };
    let field = average_first(Arc::new(standard_form_origin(&f).unwrap()), 256).unwrap();
    let v = field.eval([1.0, 1.0]);
    assert!((v[0] + 0.21875).abs() < 1e-5 && (v[1] + 0.34375).abs() < 1e-5);
}
