//! Dormand-Prince 5(4) embedded Runge-Kutta pair with standard step-size
//! control. Small fixed-size states only.

use crate::error::{Error, Result};

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// States whose magnitude exceeds this are reported as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`, landing exactly on `t1`.
///
/// `h` is the suggested initial step and is updated with the last accepted
/// step size so consecutive calls continue smoothly.
pub fn integrate<const N: usize, F>(
    rhs: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    h: &mut f64,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    const MAX_STEPS: usize = 1_000_000;
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut step = h.abs().min(span.abs()).max(1e-14 * span.abs()) * dir;

    for _ in 0..MAX_STEPS {
        let remaining = t1 - t;
        let last = step.abs() >= remaining.abs();
        if last {
            step = remaining;
        }

        let mut ys = [0.0; N];
        let stage = |coef: &[(f64, &[f64; N])], ys: &mut [f64; N]| {
            for i in 0..N {
                let mut acc = y[i];
                for (c, k) in coef {
                    acc += step * c * k[i];
                }
                ys[i] = acc;
            }
        };
        stage(&[(A21, &k1)], &mut ys);
        let k2 = rhs(t + C2 * step, &ys);
        stage(&[(A31, &k1), (A32, &k2)], &mut ys);
        let k3 = rhs(t + C3 * step, &ys);
        stage(&[(A41, &k1), (A42, &k2), (A43, &k3)], &mut ys);
        let k4 = rhs(t + C4 * step, &ys);
        stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut ys);
        let k5 = rhs(t + C5 * step, &ys);
        stage(
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut ys,
        );
        let k6 = rhs(t + step, &ys);
        let mut y_new = [0.0; N];
        stage(
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            &mut y_new,
        );
        let k7 = rhs(t + step, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if y_new.iter().any(|v| v.is_finite() && v.abs() > OVERFLOW_LIMIT)
                || y.iter().any(|v| v.abs() > OVERFLOW_LIMIT * 1e-10)
            {
                return Err(Error::Range(format!("solution overflow near t = {t:.6e}")));
            }
            step *= 0.2;
            if step.abs() < 1e-300 {
                return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
            }
            continue;
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y_new;
            k1 = k7;
            if y.iter().any(|v| v.abs() > OVERFLOW_LIMIT) {
                return Err(Error::Range(format!("solution overflow near t = {t:.6e}")));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                *h = step.abs();
            }
            if last {
                return Ok(y);
            }
            step *= factor;
        } else {
            step *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if step.abs() < 1e-15 * t.abs().max(1e-300) {
                return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
            }
        }
    }
    Err(Error::Integration("maximum number of steps exceeded".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let tol = Tolerances { abs: 1e-13, rel: 1e-13 };
        let mut h = 1e-3;
        let y = integrate(&|_t, y: &[f64; 1]| [-2.0 * y[0]], 0.0, [1.0], 1.5, tol, &mut h).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_piecewise() {
        let tol = Tolerances { abs: 1e-12, rel: 1e-12 };
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut h = 1e-2;
        let mut y = [0.0, 1.0];
        let mut t = 0.0;
        for k in 1..=10 {
            let t1 = 0.3 * k as f64;
            y = integrate(&rhs, t, y, t1, tol, &mut h).unwrap();
            t = t1;
        }
        assert!((y[0] - 3.0f64.sin()).abs() < 1e-10);
        assert!((y[1] - 3.0f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_reported_as_range_error() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let tol = Tolerances { abs: 1e-10, rel: 1e-10 };
        let mut h = 1e-3;
        let r = integrate(&|_t, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, tol, &mut h);
        assert!(r.is_err());
    }
}
