//! Real cubic polynomials and their roots via the companion matrix.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::hessenberg_eigenvalues;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("leading coefficient is zero")]
    LeadingZero,
    #[error("companion eigenvalues did not converge")]
    NoConvergence,
}

/// `c3 λ³ + c2 λ² + c1 λ + c0`, coefficients stored highest power first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic<T> {
    c: [T; 4],
}

/// A real root with its multiplicity (1, 2 or 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot<T> {
    pub value: T,
    pub multiplicity: u8,
}

impl<T: Scalar> Cubic<T> {
    pub fn new(c: [T; 4]) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> [T; 4] {
        self.c
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> T {
        self.c.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn eval(&self, x: T) -> T {
        ((self.c[0] * x + self.c[1]) * x + self.c[2]) * x + self.c[3]
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        ((z * self.c[0] + self.c[1]) * z + self.c[2]) * z + self.c[3]
    }

    /// The k-th derivative evaluated at a complex point.
    fn derivative_at(&self, k: u8, z: Complex<T>) -> Complex<T> {
        let [a, b, c, d] = self.c;
        let (two, three, six) = (lit::<T>(2.0), lit::<T>(3.0), lit::<T>(6.0));
        match k {
            0 => ((z * a + b) * z + c) * z + d,
            1 => (z * (three * a) + two * b) * z + c,
            2 => z * (six * a) + two * b,
            _ => Complex::new(six * a, T::zero()),
        }
    }

    /// All three roots, each cluster of coincident roots replaced by its
    /// polished common value.
    pub fn complex_roots(&self) -> Result<[Complex<T>; 3], CubicError> {
        let clusters = self.clusters()?;
        let mut out = Vec::with_capacity(3);
        for (z, m) in clusters {
            for _ in 0..m {
                out.push(z);
            }
        }
        Ok([out[0], out[1], out[2]])
    }

    fn clusters(&self) -> Result<Vec<(Complex<T>, u8)>, CubicError> {
        let [c3, c2, c1, c0] = self.c;
        if c3 == T::zero() || !c3.is_finite() {
            return Err(CubicError::LeadingZero);
        }
        let zero = T::zero();
        let companion = vec![
            vec![-c2 / c3, -c1 / c3, -c0 / c3],
            vec![T::one(), zero, zero],
            vec![zero, T::one(), zero],
        ];
        let raw = hessenberg_eigenvalues(companion).ok_or(CubicError::NoConvergence)?;
        let tol = self.norm() * lit::<T>(1e-9);
        let scale = T::one() + raw.iter().fold(zero, |m, z| m.max(z.norm()));
        let merge = lit::<T>(1e-4) * scale;

        // greedy clustering, then try to certify each cluster as a multiple root
        let mut used = [false; 3];
        let mut out = Vec::new();
        for i in 0..raw.len() {
            if used[i] {
                continue;
            }
            let mut members = vec![i];
            used[i] = true;
            for j in i + 1..raw.len() {
                if !used[j] && (raw[j] - raw[i]).norm() <= merge {
                    members.push(j);
                    used[j] = true;
                }
            }
            let m = members.len() as u8;
            let centre = members.iter().fold(Complex::new(zero, zero), |s, &k| s + raw[k])
                / lit::<T>(m as f64);
            if m > 1 {
                let c = self.polish(centre, m - 1);
                if self.eval_complex(c).norm() <= tol {
                    out.push((c, m));
                    continue;
                }
            }
            for &k in &members {
                out.push((self.polish(raw[k], 0), 1));
            }
        }
        for (z, _) in out.iter_mut() {
            if z.im.abs() <= lit::<T>(1e-7) * (T::one() + z.re.abs()) {
                let r = self.polish_real(z.re);
                *z = Complex::new(r, zero);
            }
        }
        out.sort_by(|a, b| {
            (a.0.re, a.0.im)
                .partial_cmp(&(b.0.re, b.0.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(out)
    }

    /// Newton on the k-th derivative, which has a simple root at a root of
    /// multiplicity k + 1. Steps that increase the residual are rejected.
    fn polish(&self, mut z: Complex<T>, k: u8) -> Complex<T> {
        for _ in 0..8 {
            let f = self.derivative_at(k, z);
            let d = self.derivative_at(k + 1, z);
            if d.norm() == T::zero() {
                break;
            }
            let next = z - f / d;
            if !(next.re.is_finite() && next.im.is_finite())
                || self.derivative_at(k, next).norm() >= f.norm()
            {
                break;
            }
            z = next;
        }
        z
    }

    fn polish_real(&self, x: T) -> T {
        let z = self.polish(Complex::new(x, T::zero()), 0);
        if self.eval(z.re).abs() <= self.eval(x).abs() {
            z.re
        } else {
            x
        }
    }
}

/// Real roots in increasing order, coincident roots reported once with
/// their multiplicity.
pub fn solve_cubic<T: Scalar>(c: &Cubic<T>) -> Result<Vec<RealRoot<T>>, CubicError> {
    Ok(c.clusters()?
        .into_iter()
        .filter(|(z, _)| z.im == T::zero())
        .map(|(z, m)| RealRoot {
            value: z.re,
            multiplicity: m,
        })
        .collect())
}
