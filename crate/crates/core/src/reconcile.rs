//! Markdown report comparing the closed-form expressions from the
//! literature with the numerical pipeline. Nothing here is asserted; the
//! pipeline is authoritative and the report only records deltas.

use std::fmt::Write;
use std::sync::Arc;

use crate::averaging::{average_first, average_second, closed_form_f_origin, closed_form_g_pminus};
use crate::linalg::Vec2;
use crate::scalar::{lit, Scalar};
use crate::solve::{
    closed_form_zero_origin, find_zeros, gamma, groebner_reference, printed_three_solutions,
    stability_eigenvalues_origin, AveragedZero, SolveError, SolveOptions,
};
use crate::transform::{standard_form_origin, standard_form_pminus, PerturbationOrigin, PerturbationPMinus};

const F_POINTS: [(f64, f64); 5] = [(1.0, 1.0), (0.5, -1.0), (1.0, 0.5), (2.0, 2.0), (3.5, -3.0)];
const G_POINTS: [(f64, f64); 5] = [(1.0, 0.0), (1.0, 1.0), (2.0, -1.0), (3.0, 0.5), (0.5, 2.0)];

fn num<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

fn pair<T: Scalar>(p: Option<(T, T)>) -> String {
    match p {
        Some((a, b)) => format!("({}, {})", num(a), num(b)),
        None => "none".into(),
    }
}

fn nearest<T: Scalar>(zeros: &[AveragedZero<T>], r: T, w: T) -> Option<(AveragedZero<T>, T)> {
    zeros
        .iter()
        .map(|z| (*z, (z.r - r).hypot(z.w - w)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
}

fn origin_section<T: Scalar>(
    out: &mut String,
    name: &str,
    f: &PerturbationOrigin<T>,
    opts: &SolveOptions<T>,
) -> Result<(), SolveError> {
    let field = average_first(Arc::new(standard_form_origin(f)?), opts.grid)?;
    let zeros = find_zeros(&field, &opts.domain, opts.seeds)?;
    let printed = closed_form_f_origin(f);

    let _ = writeln!(out, "## Origin family `{name}`\n");
    let _ = writeln!(
        out,
        "Coefficients: ā0 = {}, ā2 = {}, β0 = {}, β2 = {}, ω = {}\n",
        num(f.abar0),
        num(f.abar2),
        num(f.beta0),
        num(f.beta2),
        num(f.omega)
    );

    let (g, ind) = gamma(f);
    let count = zeros.iter().filter(|z| !z.is_degenerate()).count();
    let _ = writeln!(out, "### Γ condition\n");
    let _ = writeln!(out, "| Γ (closed form) | s² − β2²ω⁴ | pipeline zeros | Γ > 0 agrees with zeros | indicator > 0 agrees with zeros |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} | {} |\n",
        num(g),
        num(ind),
        count,
        (g > T::zero()) == (count > 0),
        (ind > T::zero()) == (count > 0)
    );

    let _ = writeln!(out, "### f1, f2\n");
    let _ = writeln!(out, "| r | w | f1 closed form | f1 pipeline | Δf1 | f2 closed form | f2 pipeline | Δf2 |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for (r, w) in F_POINTS {
        let x: Vec2<T> = [lit(r), lit(w)];
        let p = printed(x);
        let q = field.eval(x);
        let _ = writeln!(
            out,
            "| {r} | {w} | {} | {} | {} | {} | {} | {} |",
            num(p[0]),
            num(q[0]),
            num(p[0] - q[0]),
            num(p[1]),
            num(q[1]),
            num(p[1] - q[1])
        );
    }
    out.push('\n');

    let _ = writeln!(out, "### Zero and eigenvalues\n");
    let cf = closed_form_zero_origin(f);
    let _ = writeln!(out, "- closed-form zero: {}", pair(cf));
    for z in &zeros {
        let _ = writeln!(
            out,
            "- pipeline zero: ({}, {}), {}",
            num(z.r),
            num(z.w),
            z.classification.label()
        );
    }
    if let Some((z, d)) = cf.and_then(|(r, w)| nearest(&zeros, r, w)) {
        let _ = writeln!(out, "- distance closed form to pipeline: {}", num(d));
        let ev = stability_eigenvalues_origin(f);
        let _ = writeln!(out, "- eigenvalues (closed form): {} ± {}i, {} ± {}i", num(ev[0].re), num(ev[0].im.abs()), num(ev[1].re), num(ev[1].im.abs()));
        let _ = writeln!(
            out,
            "- eigenvalues (pipeline at the zero): {} ± {}i, {} ± {}i",
            num(z.eigenvalues[0].re),
            num(z.eigenvalues[0].im.abs()),
            num(z.eigenvalues[1].re),
            num(z.eigenvalues[1].im.abs())
        );
    }
    out.push('\n');
    Ok(())
}

/// Rescaled translated system around the unfolded equilibrium:
/// `X' = c1 X + a Z + c2 X² + c3 X³`, `Z' = c4 X + Y + b2 Z`.
fn pipeline_coefficients<T: Scalar>(f: &PerturbationPMinus<T>, eps: T) -> [T; 5] {
    let p = f.params_at(eps);
    let x = crate::transform::Family::PMinus(*f).anchor(eps)[0];
    let three = lit::<T>(3.0);
    [
        p.a * (-p.b - lit::<T>(2.0) * p.a2 * x - three * p.a1 * x * x),
        p.a,
        -p.a * (p.a2 + three * p.a1 * x) * eps,
        -p.a * p.a1 * eps * eps,
        -p.b1,
    ]
}

/// The printed `A2`, `A3`, `A4` and the `Z` coefficient of `X'`.
fn printed_coefficients<T: Scalar>(f: &PerturbationPMinus<T>, e: T) -> [Option<T>; 5] {
    let (a0, al0, a1, al1, al2) = (f.abar0, f.alpha0, f.abar1, f.alpha1, f.alpha2);
    let q = f.q();
    let six = lit::<T>(6.0);
    let two = lit::<T>(2.0);
    let a2 = e * e / (two * a1)
        * (a0 * (lit::<T>(3.0) * al1 * e * q + a1 * (al2 + six * q + e * f.xi2)) + a1 * al0 * e * (al2 + six * q));
    let a3 = e * e * (a1 * al0 * e + a0 * (a1 + al1 * e));
    let o2 = f.omega * f.omega;
    let a4 = (o2 - T::one())
        * (a0.powi(3)
            - al0.powi(3) * e.powi(3)
            - a0 * a0 * e * (al0 + e * f.xi0 + a0 * al0 * e * e * (al0 + two * e * f.xi0)))
        + a0.powi(4) * e * (f.beta1 + e * f.zeta1);
    [None, Some(a0 + al0 * e + e * e * f.xi0), Some(a2), Some(a3), Some(a4)]
}

fn pminus_section<T: Scalar>(
    out: &mut String,
    name: &str,
    f: &PerturbationPMinus<T>,
    eps: &[T],
    opts: &SolveOptions<T>,
) -> Result<(), SolveError> {
    let field = average_second(Arc::new(standard_form_pminus(f)?), opts.grid)?;
    let zeros = find_zeros(&field, &opts.domain, opts.seeds)?;
    let printed = closed_form_g_pminus(f);
    let tau = T::TAU();

    let _ = writeln!(out, "## p family `{name}`\n");
    let _ = writeln!(
        out,
        "Coefficients: ā0 = {}, ā1 = {}, α2 = {}, ζ0 = {}, ζ2 = {}, ω = {}; α2 + 6√(−ā1ζ0) = {}\n",
        num(f.abar0),
        num(f.abar1),
        num(f.alpha2),
        num(f.zeta0),
        num(f.zeta2),
        num(f.omega),
        num(f.alpha2 + lit::<T>(6.0) * f.q())
    );

    let _ = writeln!(out, "### g1, g2\n");
    let _ = writeln!(out, "Closed forms carry a factor 2π relative to the averaged field; the pipeline column is scaled to match.\n");
    let _ = writeln!(out, "| r | w | g1 closed form | g1 pipeline | Δg1 | g2 closed form | g2 pipeline | Δg2 |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for (r, w) in G_POINTS {
        let x: Vec2<T> = [lit(r), lit(w)];
        let p = printed(x);
        let q = field.eval(x);
        let q = [tau * q[0], tau * q[1]];
        let _ = writeln!(
            out,
            "| {r} | {w} | {} | {} | {} | {} | {} | {} |",
            num(p[0]),
            num(q[0]),
            num(p[0] - q[0]),
            num(p[1]),
            num(q[1]),
            num(p[1] - q[1])
        );
    }
    out.push('\n');

    let _ = writeln!(out, "### Pipeline zeros\n");
    if zeros.is_empty() {
        let _ = writeln!(out, "- none in the search domain");
    }
    for z in &zeros {
        let _ = writeln!(
            out,
            "- ({}, {}), det {}, trace {}, {}",
            num(z.r),
            num(z.w),
            num(z.det()),
            num(z.trace()),
            z.classification.label()
        );
    }
    out.push('\n');

    let _ = writeln!(out, "### G1 groupings\n");
    for reading in groebner_reference(f)? {
        let c = reading.g1;
        let _ = writeln!(
            out,
            "- `{}` reading: G1 = {}·w³ + {}·w² + {}·w + {}",
            reading.label,
            num(c[0]),
            num(c[1]),
            num(c[2]),
            num(c[3])
        );
        if reading.solutions.is_empty() {
            let _ = writeln!(out, "  - no solution with r > 0");
        }
        for (w, r) in reading.solutions {
            let near = nearest(&zeros, r, w)
                .map(|(_, d)| num(d))
                .unwrap_or_else(|| "no pipeline zero".into());
            let _ = writeln!(out, "  - (r, w) = ({}, {}), distance to nearest pipeline zero {}", num(r), num(w), near);
        }
    }
    out.push('\n');

    let _ = writeln!(out, "### Closed-form three solutions\n");
    let _ = writeln!(out, "| label | closed form (r, w) | nearest pipeline zero | distance |");
    let _ = writeln!(out, "|---|---|---|---|");
    for (label, sol) in printed_three_solutions(f) {
        let near = sol.and_then(|(r, w)| nearest(&zeros, r, w));
        let _ = writeln!(
            out,
            "| {label} | {} | {} | {} |",
            pair(sol),
            pair(near.map(|(z, _)| (z.r, z.w))),
            near.map(|(_, d)| num(d)).unwrap_or_else(|| "n/a".into())
        );
    }
    out.push('\n');

    let _ = writeln!(out, "### Rescaled system coefficients\n");
    let _ = writeln!(out, "`X' = A1 X + a Z + A2 X² + A3 X³`, `Z' = A4 X + Y + b2 Z` after translating the equilibrium and rescaling by ε.\n");
    let _ = writeln!(out, "| ε | coefficient | closed form | pipeline | Δ |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    let names = ["A1", "a", "A2", "A3", "A4"];
    for &e in eps {
        let pipe = pipeline_coefficients(f, e);
        let pr = printed_coefficients(f, e);
        for k in 0..5 {
            let (p, d) = match pr[k] {
                Some(v) => (num(v), num(v - pipe[k])),
                None => ("unbalanced parentheses, not evaluated".into(), "n/a".into()),
            };
            let _ = writeln!(out, "| {} | {} | {p} | {} | {d} |", num(e), names[k], num(pipe[k]));
        }
    }
    out.push('\n');
    Ok(())
}

/// Builds the report for the given families. `eps` selects where the
/// rescaled-system coefficients are compared.
pub fn reconciliation_report<T: Scalar>(
    origin: &[(&str, PerturbationOrigin<T>)],
    pminus: &[(&str, PerturbationPMinus<T>)],
    eps: &[T],
    opts: &SolveOptions<T>,
) -> Result<String, SolveError> {
    let mut out = String::from("# Closed-form reconciliation\n\n");
    out.push_str("Each closed-form expression is evaluated next to the numerical pipeline. Deltas are closed form minus pipeline. The pipeline values are authoritative.\n\n");
    for (name, f) in origin {
        origin_section(&mut out, name, f, opts)?;
    }
    for (name, f) in pminus {
        pminus_section(&mut out, name, f, eps, opts)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_lists_every_section() {
        let o = PerturbationOrigin {
            abar0: 1.0,
            abar2: 1.0,
            beta0: 2.0,
            beta2: 1.0,
            omega: 2.0,
            ..Default::default()
        };
        let p = PerturbationPMinus {
            abar0: 1.0,
            abar1: 1.0,
            zeta0: -1.0,
            zeta2: -6.0,
            alpha2: -6.0,
            omega: 2.0,
            ..Default::default()
        };
        let opts = SolveOptions { seeds: 6, grid: 128, ..Default::default() };
        let md = reconciliation_report(&[("o", o)], &[("p", p)], &[0.05], &opts).unwrap();
        for key in ["Γ condition", "f1, f2", "g1, g2", "G1 groupings", "three solutions", "Rescaled system", "unbalanced"] {
            assert!(md.contains(key), "missing {key}");
        }
    }

    #[test]
    fn coefficients_agree_at_leading_order() {
        let p = PerturbationPMinus {
            abar0: 1.0,
            abar1: 1.0,
            zeta0: -1.0,
            zeta2: -1.0,
            alpha2: -6.0,
            omega: 2.0,
            ..Default::default()
        };
        let e = 1e-3f64;
        let pipe = pipeline_coefficients(&p, e);
        let pr = printed_coefficients(&p, e);
        assert!((pr[1].unwrap() - pipe[1]).abs() < 1e-15);
        assert!((pr[3].unwrap() + pipe[3]).abs() < 1e-12);
    }
}
