//! Adaptive Dormand-Prince 5(4) integration with dense output, over complex
//! state vectors.
//!
//! The right-hand sides in this crate are linear and time-independent
//! (`dy/dt = -i H y`), but the integrator is written against a generic RHS so
//! the budget quadratures can reuse it unchanged. Dense output uses the
//! classic 4th-order continuous extension of the DOPRI5 pair.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Butcher tableau of the Dormand-Prince 5(4) pair.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
// 5th-order solution weights (row 7 of A; the pair is FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights b - b_hat.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output quadrature weights for the 4th-order interpolant.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous-extension coefficients.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    cont: [DVector<C64>; 5],
}

impl DenseStep {
    /// Interpolated state at `t0 <= t <= t0 + h`.
    pub fn eval(&self, t: f64) -> DVector<C64> {
        let theta = C64::from(((t - self.t0) / self.h).clamp(0.0, 1.0));
        let th1 = C64::from(1.0) - theta;
        let [c1, c2, c3, c4, c5] = &self.cont;
        c1 + (c2 + (c3 + (c4 + c5 * th1) * theta) * th1) * theta
    }
}

/// The result of an adaptive integration: every accepted step with dense
/// output, plus the final state.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    pub steps: Vec<DenseStep>,
    pub t_start: f64,
    pub t_end: f64,
    pub y_end: DVector<C64>,
    pub n_steps_rejected: usize,
}

impl DenseSolution {
    /// Interpolated state at any `t` within the integration span.
    pub fn sample(&self, t: f64) -> DVector<C64> {
        if self.steps.is_empty() || t >= self.t_end {
            return self.y_end.clone();
        }
        // binary search for the step containing t
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.steps[mid].t0 <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        self.steps[lo].eval(t)
    }
}

/// Controls for [`integrate`].
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step size; estimated automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: 1e-9, atol: 1e-12, h0: None, max_steps: 50_000_000 }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1`, stopping early if `stop`
/// returns true at the end of an accepted step.
pub fn integrate<F, S>(
    f: F,
    y0: &DVector<C64>,
    t0: f64,
    t1: f64,
    opts: &Options,
    mut stop: S,
) -> Result<DenseSolution>
where
    F: Fn(f64, &DVector<C64>) -> DVector<C64>,
    S: FnMut(f64, &DVector<C64>) -> bool,
{
    assert!(t1 > t0, "integrate: t1 must exceed t0");
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&f, t, &y, &k1, opts));
    h = h.min(span);

    let mut steps: Vec<DenseStep> = Vec::new();
    let mut rejected = 0usize;
    let mut n = 0usize;

    while t < t1 {
        if n >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t_reached: t });
        }
        n += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        let hmin = 16.0 * f64::EPSILON * t.abs().max(span * 1e-14);
        if h < hmin {
            return Err(Error::StepSizeUnderflow { t_reached: t });
        }

        let k2 = f(t + C2 * h, &(&y + lc(h, &[(A21, &k1)])));
        let k3 = f(t + C3 * h, &(&y + lc(h, &[(A31, &k1), (A32, &k2)])));
        let k4 = f(t + C4 * h, &(&y + lc(h, &[(A41, &k1), (A42, &k2), (A43, &k3)])));
        let k5 = f(
            t + C5 * h,
            &(&y + lc(h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)])),
        );
        let k6 = f(
            t + h,
            &(&y + lc(h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)])),
        );
        let dy = lc(h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let y1 = &y + &dy;
        let k7 = f(t + h, &y1);

        // scaled RMS error of the embedded 4th-order solution
        let err_vec = lc(
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let mut err_sq = 0.0;
        for i in 0..y.len() {
            let scale = opts.atol + opts.rtol * y[i].norm().max(y1[i].norm());
            let e = err_vec[i].norm() / scale;
            err_sq += e * e;
        }
        let err = (err_sq / y.len() as f64).sqrt();

        if err <= 1.0 {
            // accept: record dense output and advance (FSAL)
            let bspl = &k1 * C64::from(h) - &dy;
            let cont5 = lc(
                h,
                &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
            );
            let cont4 = &dy - &bspl - &k7 * C64::from(h);
            let cont = [y.clone(), dy.clone(), bspl, cont4, cont5];
            steps.push(DenseStep { t0: t, h, cont });
            t += h;
            y = y1;
            k1 = k7;
            if stop(t, &y) {
                break;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }

    Ok(DenseSolution { steps, t_start: t0, t_end: t, y_end: y, n_steps_rejected: rejected })
}

/// Linear combination `h * sum(c_i * v_i)` of complex vectors with real
/// weights.
fn lc(h: f64, terms: &[(f64, &DVector<C64>)]) -> DVector<C64> {
    let mut acc = terms[0].1 * C64::from(h * terms[0].0);
    for (c, v) in &terms[1..] {
        acc += *v * C64::from(h * *c);
    }
    acc
}

/// Hairer-style automatic initial step size.
fn initial_step<F>(f: &F, t0: f64, y0: &DVector<C64>, f0: &DVector<C64>, opts: &Options) -> f64
where
    F: Fn(f64, &DVector<C64>) -> DVector<C64>,
{
    let sc: Vec<f64> =
        y0.iter().map(|yi| opts.atol + opts.rtol * yi.norm()).collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = y0 + f0 * C64::from(h0);
    let f1 = f(t0 + h0, &y1);
    let d2 = rms(&(&f1 - f0), &sc) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

fn rms(v: &DVector<C64>, sc: &[f64]) -> f64 {
    let s: f64 = v
        .iter()
        .zip(sc)
        .map(|(x, s)| {
            let e = x.norm() / s;
            e * e
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

/// 5-point Gauss-Legendre nodes and weights on [0, 1]; exact for the
/// degree-8 polynomials that arise as |dense interpolant|^2.
pub const GL5_NODES: [f64; 5] = [
    0.046910077030668074,
    0.23076534494715845,
    0.5,
    0.7692346550528415,
    0.9530899229693319,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.11846344252809454,
    0.23931433524968324,
    0.28444444444444444,
    0.23931433524968324,
    0.11846344252809454,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cvec(v: &[f64]) -> DVector<C64> {
        DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let f = |_t: f64, y: &DVector<C64>| y * C64::new(-0.7, 0.0);
        let sol = integrate(
            f,
            &cvec(&[1.0]),
            0.0,
            5.0,
            &Options { rtol: 1e-10, atol: 1e-14, ..Options::default() },
            |_, _| false,
        )
        .unwrap();
        assert_abs_diff_eq!(sol.y_end[0].re, (-3.5_f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn rotation_stays_on_unit_circle_with_dense_output() {
        // dy/dt = -i y  ->  y = exp(-i t)
        let f = |_t: f64, y: &DVector<C64>| y * C64::new(0.0, -1.0);
        let sol = integrate(
            f,
            &cvec(&[1.0]),
            0.0,
            20.0,
            &Options { rtol: 1e-11, atol: 1e-14, ..Options::default() },
            |_, _| false,
        )
        .unwrap();
        for &t in &[0.1, 1.7, 6.3, 13.9, 19.999] {
            let y = sol.sample(t);
            let exact = C64::new(0.0, -t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t={t}: {} vs {exact}", y[0]);
        }
    }

    #[test]
    fn stop_condition_halts_integration() {
        let f = |_t: f64, y: &DVector<C64>| y * C64::new(-1.0, 0.0);
        let sol = integrate(
            f,
            &cvec(&[1.0]),
            0.0,
            100.0,
            &Options::default(),
            |_, y: &DVector<C64>| y[0].norm() < 0.5,
        )
        .unwrap();
        assert!(sol.t_end < 2.0);
        assert!(sol.y_end[0].norm() < 0.5);
    }

    #[test]
    fn dense_interpolant_is_locally_accurate() {
        // two-state Rabi problem, compare mid-step samples to cos/sin
        let f = |_t: f64, y: &DVector<C64>| {
            DVector::from_vec(vec![C64::i() * y[1], C64::i() * y[0]])
        };
        let sol = integrate(
            f,
            &cvec(&[1.0, 0.0]),
            0.0,
            10.0,
            &Options { rtol: 1e-10, atol: 1e-13, ..Options::default() },
            |_, _| false,
        )
        .unwrap();
        let mut t = 0.05;
        while t < 10.0 {
            let y = sol.sample(t);
            assert!((y[0].re - t.cos()).abs() < 1e-8);
            assert!((y[1].im - t.sin()).abs() < 1e-8);
            t += 0.37;
        }
    }

    #[test]
    fn gl5_integrates_degree_eight_exactly() {
        // integral of x^8 over [0,1] is 1/9
        let s: f64 = GL5_NODES
            .iter()
            .zip(&GL5_WEIGHTS)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert_abs_diff_eq!(s, 1.0 / 9.0, epsilon = 1e-15);
    }
}
