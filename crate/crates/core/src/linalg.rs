//! Small dense eigenvalue routines: closed forms for `p <= 3` and cyclic
//! Jacobi rotations for larger symmetric matrices.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Off-diagonal convergence target for Jacobi sweeps (relative to the Frobenius norm).
pub const JACOBI_TOL: f64 = 1e-12;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev = match h.nrows() {
        0 => Vec::new(),
        1 => vec![h[(0, 0)]],
        2 => symmetric2(h),
        3 => symmetric3(h),
        _ => jacobi_eigenvalues(h, JACOBI_TOL),
    };
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(h: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(h).last().copied().unwrap_or(f64::NEG_INFINITY)
}

fn symmetric2(h: &DMatrix<f64>) -> Vec<f64> {
    let (a, b, d) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    vec![mean - radius, mean + radius]
}

// Trigonometric solution of the symmetric 3x3 characteristic polynomial.
fn symmetric3(h: &DMatrix<f64>) -> Vec<f64> {
    let p1 = h[(0, 1)].powi(2) + h[(0, 2)].powi(2) + h[(1, 2)].powi(2);
    let q = (h[(0, 0)] + h[(1, 1)] + h[(2, 2)]) / 3.0;
    if p1 == 0.0 {
        return vec![h[(0, 0)], h[(1, 1)], h[(2, 2)]];
    }
    let p2 = (h[(0, 0)] - q).powi(2) + (h[(1, 1)] - q).powi(2) + (h[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (h - DMatrix::identity(3, 3) * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let top = q + 2.0 * p * phi.cos();
    let bottom = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - top - bottom;
    vec![bottom, middle, top]
        .into_iter()
        .map(|l| newton_polish(&char_poly3(h), l))
        .collect()
}

/// Cyclic Jacobi rotations until the off-diagonal mass falls below `tol`
/// times the Frobenius norm.
pub fn jacobi_eigenvalues(h: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let n = h.nrows();
    let mut a = h.clone();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].powi(2);
            }
        }
        if off.sqrt() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Coefficients `[c0, c1, c2]` of `l^3 + c2 l^2 + c1 l + c0`, the characteristic
/// polynomial of a 3x3 matrix.
fn char_poly3(m: &DMatrix<f64>) -> [f64; 3] {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-m.determinant(), minors, -tr]
}

fn newton_polish(c: &[f64; 3], mut l: f64) -> f64 {
    for _ in 0..3 {
        let f = ((l + c[2]) * l + c[1]) * l + c[0];
        let df = (3.0 * l + 2.0 * c[2]) * l + c[1];
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = l - f / df;
        if !next.is_finite() || (next - l).abs() > 1e-6 * (1.0 + l.abs()) {
            break;
        }
        l = next;
    }
    l
}

/// Largest real part over the eigenvalues of a general real matrix of size
/// at most 3, from the roots of its characteristic polynomial.
///
/// Returns `None` for larger matrices.
pub fn max_real_eigenvalue_small(m: &DMatrix<f64>) -> Option<f64> {
    match m.nrows() {
        1 => Some(m[(0, 0)]),
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let half = 0.5 * tr;
            let disc = half * half - det;
            Some(if disc >= 0.0 { half + disc.sqrt() } else { half })
        }
        3 => Some(max_real_cubic_root(&char_poly3(m))),
        _ => None,
    }
}

fn max_real_cubic_root(c: &[f64; 3]) -> f64 {
    let (a, b, d) = (c[2], c[1], c[0]);
    let shift = -a / 3.0;
    // depressed cubic y^3 + p y + q with l = y + shift
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        let real = newton_polish(c, u + v + shift);
        let complex_re = -(u + v) / 2.0 + shift;
        real.max(complex_re)
    } else if p == 0.0 {
        newton_polish(c, shift)
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * r * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .map(|l| newton_polish(c, l))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym_from(n: usize, vals: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |i, j| vals[i * n + j]);
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn diagonal_and_swap() {
        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        assert_eq!(symmetric_max_eigenvalue(&d), 3.0);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(symmetric_eigenvalues(&x), vec![-1.0, 1.0]);
    }

    #[test]
    fn lorenz_origin_block() {
        let l = DMatrix::from_row_slice(3, 3, &[-10.0, 10.0, 0.0, 28.0, -1.0, 0.0, 0.0, 0.0, -8.0 / 3.0]);
        let expected = (-11.0 + 1201.0_f64.sqrt()) / 2.0;
        let got = max_real_eigenvalue_small(&l).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn rotation_has_zero_real_part() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(max_real_eigenvalue_small(&r), Some(0.0));
        assert_eq!(max_real_eigenvalue_small(&DMatrix::identity(2, 2)), Some(1.0));
    }

    proptest! {
        #[test]
        fn closed_forms_match_nalgebra(vals in prop::collection::vec(-20.0f64..20.0, 9)) {
            let h = sym_from(3, &vals);
            let mut oracle: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            oracle.sort_by(f64::total_cmp);
            let ours = symmetric_eigenvalues(&h);
            for (a, b) in ours.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
            }
            let h2 = sym_from(2, &vals[..4]);
            let mut o2: Vec<f64> = h2.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            o2.sort_by(f64::total_cmp);
            let ours2 = symmetric_eigenvalues(&h2);
            for (a, b) in ours2.iter().zip(&o2) {
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn jacobi_matches_closed_form(vals in prop::collection::vec(-20.0f64..20.0, 25)) {
            let h3 = sym_from(3, &vals[..9]);
            let mut j3 = jacobi_eigenvalues(&h3, JACOBI_TOL);
            j3.sort_by(f64::total_cmp);
            for (a, b) in j3.iter().zip(symmetric_eigenvalues(&h3)) {
                prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
            }
            let h5 = sym_from(5, &vals);
            let mut oracle: Vec<f64> = h5.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            oracle.sort_by(f64::total_cmp);
            for (a, b) in symmetric_eigenvalues(&h5).iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn cubic_max_real_part_matches_schur(vals in prop::collection::vec(-10.0f64..10.0, 9)) {
            let m = DMatrix::from_row_slice(3, 3, &vals);
            let oracle = m.clone().complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let ours = max_real_eigenvalue_small(&m).unwrap();
            prop_assert!((ours - oracle).abs() < 1e-6 * (1.0 + oracle.abs()), "{} vs {}", ours, oracle);
        }
    }
}
