//! Adaptive Dormand–Prince 5(4) integrator over fixed-size real state arrays.

use crate::error::{EncircleError, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

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

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful stepper; the accepted step size carries over between calls so
/// dense sampling does not restart the step-size search every time.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    pub tol: Tolerances,
    h: Option<f64>,
    pub max_steps: usize,
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

impl DormandPrince {
    pub fn new(tol: Tolerances) -> Self {
        Self { tol, h: None, max_steps: 10_000_000 }
    }

    /// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
    pub fn advance<const N: usize, F>(&mut self, mut rhs: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = self.h.map(f64::abs).unwrap_or(span.abs() * 1e-2).min(span.abs());
        let mut k1 = rhs(t, &y);
        let mut steps = 0usize;
        loop {
            let remaining = (t1 - t).abs();
            if remaining <= 1e-15 * t1.abs().max(1.0) {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;

            let k2 = rhs(t + C2 * hs, &combine(&y, hs, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * hs, &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(t + C5 * hs, &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(
                t + hs,
                &combine(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { t1 } else { t + hs };
            let k7 = rhs(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();

            if err.is_finite() && err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = Some(h);
                }
                h *= grow;
                if last {
                    break;
                }
            } else {
                let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h *= shrink;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(EncircleError::StepSizeUnderflow { t });
                }
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(EncircleError::StepSizeUnderflow { t });
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut dp = DormandPrince::new(Tolerances::default());
        let y = dp.advance(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_both_directions() {
        let mut dp = DormandPrince::new(Tolerances::default());
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = dp.advance(f, 0.0, [1.0, 0.0], 10.0).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9 && (y[1] + 10f64.sin()).abs() < 1e-9);
        let back = dp.advance(f, 10.0, y, 0.0).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn finite_time_blowup_underflows() {
        let mut dp = DormandPrince::new(Tolerances::default());
        let r = dp.advance(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0);
        assert!(matches!(r, Err(EncircleError::StepSizeUnderflow { .. })));
    }
}
