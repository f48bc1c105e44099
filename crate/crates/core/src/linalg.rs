//! Small dense complex matrices in row-major order.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

pub fn mat_mul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn adjoint(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub fn is_unitary(n: usize, a: &[Complex64], tol: f64) -> bool {
    let g = mat_mul(n, &adjoint(n, a), a);
    (0..n).all(|i| {
        (0..n).all(|j| {
            let target = if i == j { 1.0 } else { 0.0 };
            (g[i * n + j] - Complex64::new(target, 0.0)).norm() <= tol
        })
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The matrix `A = X + iY` is embedded as the real symmetric `[[X, -Y], [Y, X]]`,
/// whose spectrum is that of `A` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(n: usize, a: &[Complex64]) -> Vec<f64> {
    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            s[i * m + j] = z.re;
            s[(i + n) * m + (j + n)] = z.re;
            s[i * m + (j + n)] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    let mut ev = symmetric_eigenvalues(m, &mut s);
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Cyclic Jacobi rotations on a real symmetric matrix (destroyed in place).
pub fn symmetric_eigenvalues(m: usize, s: &mut [f64]) -> Vec<f64> {
    let scale: f64 = s.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * m + j] * s[i * m + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..m {
                    let akp = s[k * m + p];
                    let akq = s[k * m + q];
                    s[k * m + p] = c * akp - sn * akq;
                    s[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = s[p * m + k];
                    let aqk = s[q * m + k];
                    s[p * m + k] = c * apk - sn * aqk;
                    s[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_spectrum() {
        let z = Complex64::new(0.0, 0.0);
        let y = [z, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), z];
        let ev = hermitian_eigenvalues(2, &y);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_spectrum() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let a = [c(0.5), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.0), c(0.5)];
        let ev = hermitian_eigenvalues(3, &a);
        assert!((ev[0]).abs() < 1e-14 && (ev[2] - 0.5).abs() < 1e-14);
    }
}
