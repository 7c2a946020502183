//! Small dense linear algebra on fixed-size arrays.

use num_complex::Complex;

use crate::scalar::{lit, Scalar};

pub type Vec2<T> = [T; 2];
pub type Vec3<T> = [T; 3];
pub type Mat2<T> = [[T; 2]; 2];
pub type Mat3<T> = [[T; 3]; 3];

pub fn mat3_vec<T: Scalar>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    let mut out = [T::zero(); 3];
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

pub fn mat3_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn det3<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Coefficients `(c3, c2, c1, c0)` of `det(M - λI)`.
pub fn char_poly3<T: Scalar>(m: &Mat3<T>) -> [T; 4] {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    [-T::one(), trace, -minors, det3(m)]
}

pub fn det2<T: Scalar>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn frobenius2<T: Scalar>(m: &Mat2<T>) -> T {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

/// Eigenvalues of a real 2x2 matrix, larger real part first.
pub fn eig2<T: Scalar>(m: &Mat2<T>) -> [Complex<T>; 2] {
    let half = lit::<T>(0.5);
    let tr = m[0][0] + m[1][1];
    let det = det2(m);
    let mean = half * tr;
    let disc = mean * mean - det;
    if disc >= T::zero() {
        let s = disc.sqrt();
        // avoid cancellation in the smaller-magnitude root
        let big = if mean >= T::zero() { mean + s } else { mean - s };
        let small = if big != T::zero() { det / big } else { T::zero() };
        let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
        [Complex::new(hi, T::zero()), Complex::new(lo, T::zero())]
    } else {
        let s = (-disc).sqrt();
        [Complex::new(mean, s), Complex::new(mean, -s)]
    }
}

/// Solves `m x = rhs` for a 2x2 system; `None` when singular.
pub fn solve2<T: Scalar>(m: &Mat2<T>, rhs: &Vec2<T>) -> Option<Vec2<T>> {
    let det = det2(m);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Diagonal similarity scaling that equalises row and column norms.
fn balance<T: Scalar>(a: &mut [Vec<T>]) {
    let n = a.len();
    let radix = lit::<T>(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < lit::<T>(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

/// Eigenvalues of a general real square matrix: Givens reduction to
/// Hessenberg form, then [`hessenberg_eigenvalues`].
pub fn eigenvalues<T: Scalar>(mut a: Vec<Vec<T>>) -> Option<Vec<Complex<T>>> {
    let n = a.len();
    for col in 0..n.saturating_sub(2) {
        for row in (col + 2)..n {
            let (p, q) = (a[col + 1][col], a[row][col]);
            if q == T::zero() {
                continue;
            }
            let r = p.hypot(q);
            let (c, s) = (p / r, q / r);
            for j in 0..n {
                let (x, y) = (a[col + 1][j], a[row][j]);
                a[col + 1][j] = c * x + s * y;
                a[row][j] = c * y - s * x;
            }
            for line in a.iter_mut() {
                let (x, y) = (line[col + 1], line[row]);
                line[col + 1] = c * x + s * y;
                line[row] = c * y - s * x;
            }
            a[row][col] = T::zero();
        }
    }
    hessenberg_eigenvalues(a)
}

/// Eigenvalues of a real upper-Hessenberg matrix by the shifted double-step
/// QR iteration. Returns `None` if some eigenvalue fails to converge within
/// 30 iterations.
pub fn hessenberg_eigenvalues<T: Scalar>(mut a: Vec<Vec<T>>) -> Option<Vec<Complex<T>>> {
    let n = a.len();
    if n == 0 {
        return Some(Vec::new());
    }
    balance(&mut a);
    let eps = T::epsilon();
    let zero = T::zero();
    let mut wr = vec![Complex::new(zero, zero); n];
    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let sign = |x: T, y: T| if y >= zero { x.abs() } else { -x.abs() };

    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == zero {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = Complex::new(x + t, zero);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = lit::<T>(0.5) * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= zero {
                    z = p + sign(z, p);
                    wr[nu - 1] = Complex::new(x + z, zero);
                    wr[nu] = wr[nu - 1];
                    if z != zero {
                        wr[nu] = Complex::new(x - w / z, zero);
                    }
                } else {
                    wr[nu] = Complex::new(x + p, -z);
                    wr[nu - 1] = Complex::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == 30 {
                return None;
            }
            if its == 10 || its == 20 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = lit::<T>(0.75) * s;
                y = x;
                w = lit::<T>(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[i + 2][i] = zero;
                if i != m {
                    a[i + 2][i - 1] = zero;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = zero;
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != zero {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Some(wr)
}
