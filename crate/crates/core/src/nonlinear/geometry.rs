//! Boundary geometry of `r = R (1 + rho(theta))` and the coefficients of
//! the Laplacian pulled back to the unit disk.
//!
//! The disk is mapped by `X(s, theta) = g(s, theta) (cos theta, sin theta)`
//! with `g = R s (1 + H)` and `H(s, theta) = sum_k rho_hat(k) s^|k| e^{ik theta}`,
//! the harmonic extension of `rho`. Unlike a stretch that is constant in
//! `s`, this map is smooth through the origin, so mapped fields keep the
//! parity `w(-s, theta) = w(s, theta + pi)` that the radial grid relies on.
//! In these coordinates
//! `Delta u = a_ss w_ss + a_st w_st + a_tt w_tt + a_s w_s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{ShapeState, SMALLNESS_BOUND};

use super::grid::DiskGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub rho: Vec<f64>,
    pub rho_p: Vec<f64>,
    pub rho_pp: Vec<f64>,
    pub curvature: Vec<f64>,
    /// `|grad N|` on the boundary, `sqrt(1 + (rho' / (1 + rho))^2)`.
    pub normal_field_factor: Vec<f64>,
}

impl BoundaryGeometry {
    pub fn new(shape: &ShapeState, n_theta: usize) -> Result<Self> {
        let sup_norm = shape.sup_norm();
        if sup_norm >= SMALLNESS_BOUND {
            return Err(Error::DomainValidity { sup_norm });
        }
        let radius = shape.radius();
        let rho = shape.to_grid(n_theta);
        let rho_p = shape.grid_derivative(n_theta, 1);
        let rho_pp = shape.grid_derivative(n_theta, 2);
        let mut curvature = Vec::with_capacity(n_theta);
        let mut normal_field_factor = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            let a = 1.0 + rho[j];
            let q = a * a + rho_p[j] * rho_p[j];
            if !(q > 0.0) {
                return Err(Error::InvalidShape("degenerate boundary parametrisation".into()));
            }
            curvature.push((a * a + 2.0 * rho_p[j] * rho_p[j] - a * rho_pp[j]) / (radius * q.powf(1.5)));
            normal_field_factor.push((1.0 + (rho_p[j] / a).powi(2)).sqrt());
        }
        Ok(Self {
            rho,
            rho_p,
            rho_pp,
            curvature,
            normal_field_factor,
        })
    }
}

/// Curvature of the boundary at `theta_j = 2 pi j / n_theta`.
pub fn curvature(shape: &ShapeState, n_theta: usize) -> Result<Vec<f64>> {
    Ok(BoundaryGeometry::new(shape, n_theta)?.curvature)
}

/// Pointwise coefficients of the mapped Laplacian, plus the map quantities
/// needed for boundary gradients.
#[derive(Debug, Clone)]
pub struct MapCoefficients {
    /// `g = |X|`.
    pub g: Vec<f64>,
    pub g_s: Vec<f64>,
    /// `d s / d theta` at fixed physical radius.
    pub s_theta: Vec<f64>,
    pub a_ss: Vec<f64>,
    pub a_st: Vec<f64>,
    pub a_tt: Vec<f64>,
    pub a_s: Vec<f64>,
    /// `H` itself, so that `g / R = s (1 + H)` is the physical radius.
    pub h: Vec<f64>,
}

impl MapCoefficients {
    pub fn new(grid: &DiskGrid, shape: &ShapeState) -> Result<Self> {
        let n = grid.n_theta();
        let radius = shape.radius();
        let len = grid.len();
        let zero = Complex64::new(0.0, 0.0);
        let i_unit = Complex64::new(0.0, 1.0);
        // H and its derivatives, synthesised row by row from the shape modes
        let mut fields = vec![vec![0.0; len]; 6];
        for (i, &s) in grid.s().iter().enumerate() {
            let mut bufs = vec![vec![zero; n]; 6];
            for (k, &c) in shape.coeffs().iter().enumerate() {
                if 2 * k >= n {
                    break;
                }
                let kf = k as f64;
                let sk = s.powi(k as i32);
                let sk1 = if k >= 1 { kf * s.powi(k as i32 - 1) } else { 0.0 };
                let sk2 = if k >= 2 { kf * (kf - 1.0) * s.powi(k as i32 - 2) } else { 0.0 };
                let ik = i_unit * kf;
                let terms = [c * sk, c * sk1, c * sk2, c * ik * sk, c * ik * sk1, c * (-kf * kf) * sk];
                for (buf, t) in bufs.iter_mut().zip(terms) {
                    buf[k] += t;
                    if k > 0 {
                        buf[n - k] += t.conj();
                    }
                }
            }
            for (field, mut buf) in fields.iter_mut().zip(bufs) {
                grid.synthesize(&mut buf);
                for j in 0..n {
                    field[i * n + j] = buf[j].re;
                }
            }
        }
        let [h, h_s, h_ss, h_t, h_st, h_tt]: [Vec<f64>; 6] = fields.try_into().expect("six fields");

        let mut out = Self {
            g: vec![0.0; len],
            g_s: vec![0.0; len],
            s_theta: vec![0.0; len],
            a_ss: vec![0.0; len],
            a_st: vec![0.0; len],
            a_tt: vec![0.0; len],
            a_s: vec![0.0; len],
            h: h.clone(),
        };
        for (i, &s) in grid.s().iter().enumerate() {
            for j in 0..n {
                let p = i * n + j;
                let g = radius * s * (1.0 + h[p]);
                let gs = radius * (1.0 + h[p] + s * h_s[p]);
                let gt = radius * s * h_t[p];
                let gss = radius * (2.0 * h_s[p] + s * h_ss[p]);
                let gst = radius * (h_t[p] + s * h_st[p]);
                let gtt = radius * s * h_tt[p];
                if !(gs > 0.0 && g > 0.0) {
                    return Err(Error::InvalidShape("disk map is not invertible".into()));
                }
                let st = -gt / gs;
                let dst_dt = -(gtt * gs - gt * gst) / (gs * gs);
                let dst_ds = -(gst * gs - gt * gss) / (gs * gs);
                let stt = dst_dt + st * dst_ds;
                out.g[p] = g;
                out.g_s[p] = gs;
                out.s_theta[p] = st;
                out.a_ss[p] = (1.0 + (gt / g).powi(2)) / (gs * gs);
                out.a_st[p] = 2.0 * st / (g * g);
                out.a_tt[p] = 1.0 / (g * g);
                out.a_s[p] = -gss / gs.powi(3) + 1.0 / (gs * g) + stt / (g * g);
            }
        }
        Ok(out)
    }

    /// `Delta u` at every node given the field's derivatives.
    pub fn laplacian(&self, grid: &DiskGrid, u: &[f64]) -> Vec<f64> {
        let d = grid.derivatives(u);
        (0..u.len())
            .map(|p| {
                self.a_ss[p] * d.ss[p] + self.a_st[p] * d.s_theta[p] + self.a_tt[p] * d.theta2[p] + self.a_s[p] * d.s[p]
            })
            .collect()
    }

    /// Angular means of `a_ss`, `a_s`, `a_tt` per radial node.
    pub fn radial_means(&self, grid: &DiskGrid) -> [Vec<f64>; 3] {
        let n = grid.n_theta();
        let mean = |v: &[f64]| -> Vec<f64> {
            v.chunks(n).map(|row| row.iter().sum::<f64>() / n as f64).collect()
        };
        [mean(&self.a_ss), mean(&self.a_s), mean(&self.a_tt)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::ModeSeed;

    #[test]
    fn circle_curvatures() {
        let z = ShapeState::zero(8, 2.0).unwrap();
        assert!(curvature(&z, 32).unwrap().iter().all(|&k| (k - 0.5).abs() < 1e-15));
        let c = ShapeState::from_seeds(&[ModeSeed { k: 0, amplitude: 0.1, phase: 0.0 }], 8, 2.0).unwrap();
        assert!(curvature(&c, 32).unwrap().iter().all(|&k| (k - 1.0 / 2.2).abs() < 1e-15));
        let big = ShapeState::from_parts(vec![Complex64::new(0.3, 0.0)], 1.0, None).unwrap();
        assert!(matches!(curvature(&big, 16), Err(Error::DomainValidity { .. })));
    }

    #[test]
    fn polar_coefficients_at_zero_shape() {
        let grid = DiskGrid::new(8, 16).unwrap();
        let z = ShapeState::zero(4, 1.5).unwrap();
        let m = MapCoefficients::new(&grid, &z).unwrap();
        for (i, &s) in grid.s().iter().enumerate() {
            let r = 1.5 * s;
            let p = i * 16 + 3;
            assert!((m.a_ss[p] - 1.0 / 2.25).abs() < 1e-14);
            assert!((m.a_s[p] - 1.0 / (1.5 * r)).abs() < 1e-12);
            assert!((m.a_tt[p] - 1.0 / (r * r)).abs() < 1e-12);
            assert_eq!(m.a_st[p], 0.0);
        }
    }

    #[test]
    fn mapped_laplacian_of_quadratic() {
        // |x|^2 has Laplacian 4 on any domain
        let grid = DiskGrid::new(16, 32).unwrap();
        let seeds = [ModeSeed { k: 3, amplitude: 0.05, phase: 0.4 }, ModeSeed { k: 1, amplitude: 0.03, phase: 0.0 }];
        let shape = ShapeState::from_seeds(&seeds, 8, 1.2).unwrap();
        let m = MapCoefficients::new(&grid, &shape).unwrap();
        let u: Vec<f64> = m.g.iter().map(|g| g * g).collect();
        let lap = m.laplacian(&grid, &u);
        assert!(lap.iter().all(|v| (v - 4.0).abs() < 1e-9), "{:?}", &lap[..4]);
        // and x = g cos(theta) is harmonic
        let th = grid.theta();
        let u: Vec<f64> = m.g.iter().enumerate().map(|(p, g)| g * th[p % 32].cos()).collect();
        let lap = m.laplacian(&grid, &u);
        assert!(lap.iter().all(|v| v.abs() < 1e-9));
    }
}
