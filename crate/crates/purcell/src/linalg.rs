//! Dense complex eigenvalues for small matrices.
//!
//! Shifted QR iteration on the Hessenberg form with Wilkinson shifts and
//! periodic exceptional shifts. The exceptional shifts matter: plain
//! Wilkinson iteration cycles on the shifted-symmetric matrices with
//! mirror-symmetric spectra that these models produce (e.g. equal decay on
//! every state with a symmetric coupling chain).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Complex Givens pair `(c, s)` with `c` real such that the rotation
/// `[[c, conj(s)], [-s, c]]` maps `(a, b)` to `(r, 0)`.
fn rotg(a: C64, b: C64) -> (f64, C64) {
    if b == C64::ZERO {
        return (1.0, C64::ZERO);
    }
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if a == C64::ZERO {
        return (0.0, b / b.norm());
    }
    let c = a.norm() / norm;
    let s = b * a.conj() / (a.norm() * norm);
    (c, s)
}

fn apply_left(h: &mut DMatrix<C64>, c: f64, s: C64, p: usize, q: usize, cols: std::ops::Range<usize>) {
    for j in cols {
        let hp = h[(p, j)];
        let hq = h[(q, j)];
        h[(p, j)] = hp * c + hq * s.conj();
        h[(q, j)] = hq * c - hp * s;
    }
}

fn apply_right(h: &mut DMatrix<C64>, c: f64, s: C64, p: usize, q: usize, rows: std::ops::Range<usize>) {
    for i in rows {
        let hp = h[(i, p)];
        let hq = h[(i, q)];
        h[(i, p)] = hp * c + hq * s;
        h[(i, q)] = hq * c - hp * s.conj();
    }
}

/// Reduces to upper Hessenberg form by Givens similarity transformations.
fn hessenberg(h: &mut DMatrix<C64>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        for i in k + 2..n {
            if h[(i, k)] == C64::ZERO {
                continue;
            }
            let (c, s) = rotg(h[(k + 1, k)], h[(i, k)]);
            apply_left(h, c, s, k + 1, i, k..n);
            apply_right(h, c, s, k + 1, i, 0..n);
        }
    }
}

/// Eigenvalues of the complex 2x2 `[[a, b], [c, d]]`.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    (half_tr + root, half_tr - root)
}

/// One explicit shifted QR sweep on the active block `l..=hi`.
fn qr_step(h: &mut DMatrix<C64>, l: usize, hi: usize, shift: C64) {
    for k in l..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let (c, s) = rotg(h[(k, k)], h[(k + 1, k)]);
        apply_left(h, c, s, k, k + 1, k..hi + 1);
        h[(k + 1, k)] = C64::ZERO;
        rots.push((c, s));
    }
    for (k, (c, s)) in rots.into_iter().enumerate() {
        let k = l + k;
        apply_right(h, c, s, k, k + 1, l..hi + 1);
    }
    for k in l..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigenvalues: matrix must be square");
    match n {
        0 => return Vec::new(),
        1 => return vec![m[(0, 0)]],
        _ => {}
    }
    let mut h = m.clone();
    hessenberg(&mut h);

    let scale = h.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let eps = f64::EPSILON;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut stalls = 0usize;
    let mut guard = 0usize;

    loop {
        // deflate converged trailing eigenvalues
        loop {
            if hi == 0 {
                eigs.push(h[(0, 0)]);
                eigs.reverse();
                return eigs;
            }
            let sub = h[(hi, hi - 1)].norm();
            let local = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            if sub <= eps * local.max(scale * eps) {
                eigs.push(h[(hi, hi)]);
                hi -= 1;
                stalls = 0;
            } else {
                break;
            }
        }
        // find the start of the active block
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let local = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if sub <= eps * local.max(scale * eps) {
                break;
            }
            l -= 1;
        }
        if l == hi - 1 {
            // isolated 2x2 block
            let (e1, e2) = eig2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            eigs.push(e2);
            eigs.push(e1);
            if l == 0 {
                eigs.reverse();
                return eigs;
            }
            hi = l - 1;
            stalls = 0;
            continue;
        }

        stalls += 1;
        guard += 1;
        if guard > 90 * n {
            // should be unreachable; surface whatever remains rather than spin
            for k in l..=hi {
                eigs.push(h[(k, k)]);
            }
            eigs.reverse();
            return eigs;
        }
        let shift = if stalls % 12 == 0 {
            // exceptional shift breaks symmetric-spectrum cycles
            h[(hi, hi)] + C64::from(0.75 * h[(hi, hi - 1)].norm())
        } else {
            // Wilkinson: trailing 2x2 eigenvalue closest to the corner
            let (e1, e2) = eig2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let corner = h[(hi, hi)];
            if (e1 - corner).norm() <= (e2 - corner).norm() {
                e1
            } else {
                e2
            }
        };
        qr_step(&mut h, l, hi, shift);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn damped_two_state_matches_quadratic_roots() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, -0.1), c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, -0.5)],
        );
        let eigs = sorted(eigenvalues(&m));
        // lambda = -0.3i +- sqrt(1 - 0.04)
        let root = (1.0_f64 - 0.04).sqrt();
        assert_abs_diff_eq!(eigs[0].re, -root, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[1].re, root, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[0].im, -0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[1].im, -0.3, epsilon = 1e-13);
    }

    #[test]
    fn symmetric_spectrum_chain_converges() {
        // uniform decay with a symmetric coupling chain: spectrum {0, +-sqrt(2)} - 0.3i;
        // this is the shape that cycles under plain Wilkinson shifts
        let z = c(0.0, 0.0);
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, -0.3), c(-1.0, 0.0), z, //
                c(-1.0, 0.0), c(0.0, -0.3), c(-1.0, 0.0), //
                z, c(-1.0, 0.0), c(0.0, -0.3),
            ],
        );
        let eigs = sorted(eigenvalues(&m));
        let s = 2.0_f64.sqrt();
        for (e, expect) in eigs.iter().zip([-s, 0.0, s]) {
            assert_abs_diff_eq!(e.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(e.im, -0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_and_determinant_recovered_on_random_matrices() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 5, 8, 11] {
            for _ in 0..20 {
                let m = DMatrix::from_fn(n, n, |_, _| {
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let eigs = eigenvalues(&m);
                assert_eq!(eigs.len(), n);
                let tr: C64 = (0..n).map(|i| m[(i, i)]).sum();
                let sum: C64 = eigs.iter().sum();
                assert!((tr - sum).norm() < 1e-10 * (tr.norm() + 1.0));
                let det = m.clone().lu().determinant();
                let prod: C64 = eigs.iter().product();
                assert!(
                    (det - prod).norm() < 1e-9 * (det.norm() + 1.0),
                    "n={n}: det {det} vs {prod}"
                );
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_handled() {
        // diagonal with repeats plus a nilpotent coupling (defective)
        let z = c(0.0, 0.0);
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(1.0, 0.0), z, z, c(2.0, 0.0), z, z, z, c(1.0, -1.0)],
        );
        let eigs = sorted(eigenvalues(&m));
        assert_abs_diff_eq!(eigs[0].re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[0].im, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[1].re, 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(eigs[2].re, 2.0, epsilon = 1e-7);
    }

    #[test]
    fn hermitian_spectrum_is_real() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let herm = &a + a.adjoint();
        let eigs = eigenvalues(&herm);
        for e in &eigs {
            assert!(e.im.abs() < 1e-11, "lambda = {e}");
        }
        // cross-check against the symmetric eigensolver
        let reference = sorted(
            herm.symmetric_eigen().eigenvalues.iter().map(|&x| c(x, 0.0)).collect(),
        );
        let mine = sorted(eigs);
        for (a, b) in mine.iter().zip(&reference) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
