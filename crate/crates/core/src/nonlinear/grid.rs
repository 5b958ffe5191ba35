//! Tensor grid on the unit disk: Chebyshev in `s`, Fourier in `theta`.
//!
//! The radial nodes are the positive half of an even-count Chebyshev-Lobatto
//! set on `[-1, 1]`, so the origin is never a node. A value at `(-s, theta)`
//! is the value at `(s, theta + pi)`, which folds the diameter
//! differentiation matrix into two half-size blocks: on Fourier mode `k` the
//! radial derivative is `Da + (-1)^k Db`.
//!
//! Fields are stored row-major, `values[i * n_theta + j]`, with row `i = 0`
//! on the boundary `s = 1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::cheb;
use crate::error::{Error, Result};

pub struct DiskGrid {
    n_r: usize,
    n_theta: usize,
    s: Vec<f64>,
    d1a: DMatrix<f64>,
    d1b: DMatrix<f64>,
    d2a: DMatrix<f64>,
    d2b: DMatrix<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DiskGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskGrid")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

/// Derivatives of a field, all in physical space.
pub struct Derivatives {
    pub s: Vec<f64>,
    pub ss: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta2: Vec<f64>,
    pub s_theta: Vec<f64>,
}

impl DiskGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 4 {
            return Err(Error::InvalidParameter("n_r must be at least 4".into()));
        }
        if n_theta < 8 || !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidParameter("n_theta must be even and at least 8".into()));
        }
        let n = 2 * n_r - 1;
        let x = cheb::lobatto(n);
        let d = cheb::diff_matrix(n);
        let d2 = &d * &d;
        let m = n_r;
        // columns n, n-1, ... hold -s_0, -s_1, ...
        let d1a = DMatrix::from_fn(m, m, |i, l| d[(i, l)]);
        let d1b = DMatrix::from_fn(m, m, |i, l| d[(i, n - l)]);
        let d2a = DMatrix::from_fn(m, m, |i, l| d2[(i, l)]);
        let d2b = DMatrix::from_fn(m, m, |i, l| d2[(i, n - l)]);
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_r,
            n_theta,
            s: x[..m].to_vec(),
            d1a,
            d1b,
            d2a,
            d2b,
            forward: planner.plan_fft_forward(n_theta),
            inverse: planner.plan_fft_inverse(n_theta),
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Radial nodes, `s[0] = 1` decreasing towards the origin.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn theta(&self) -> Vec<f64> {
        crate::linear::theta_grid(self.n_theta)
    }

    /// Signed wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n_theta;
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Folded first-derivative block for wavenumber `k`.
    pub fn d1(&self, k: i64) -> DMatrix<f64> {
        if k % 2 == 0 {
            &self.d1a + &self.d1b
        } else {
            &self.d1a - &self.d1b
        }
    }

    /// Folded second-derivative block for wavenumber `k`.
    pub fn d2(&self, k: i64) -> DMatrix<f64> {
        if k % 2 == 0 {
            &self.d2a + &self.d2b
        } else {
            &self.d2a - &self.d2b
        }
    }

    /// Row-wise forward FFT of `rows` consecutive rows.
    pub fn to_modes(&self, phys: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = phys.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`DiskGrid::to_modes`], keeping the real part.
    pub fn to_phys(&self, modes: &[Complex64]) -> Vec<f64> {
        let mut buf = modes.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n_theta as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// Inverse FFT without normalisation, for synthesising from coefficients.
    pub fn synthesize(&self, modes: &mut [Complex64]) {
        self.inverse.process(modes);
    }

    /// Applies the folded radial matrix (`order` 1 or 2) mode by mode.
    fn radial(&self, modes: &[Complex64], order: u8) -> Vec<Complex64> {
        let (a, b) = match order {
            1 => (&self.d1a, &self.d1b),
            _ => (&self.d2a, &self.d2b),
        };
        let n = self.n_theta;
        let m = modes.len() / n;
        let sign: Vec<f64> = (0..n)
            .map(|j| if self.wavenumber(j) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); modes.len()];
        for i in 0..m {
            let row = &mut out[i * n..(i + 1) * n];
            for l in 0..m {
                let (pa, pb) = (a[(i, l)], b[(i, l)]);
                let src = &modes[l * n..(l + 1) * n];
                for j in 0..n {
                    row[j] += src[j] * (pa + sign[j] * pb);
                }
            }
        }
        out
    }

    /// All derivatives of a field that the mapped Laplacian needs.
    pub fn derivatives(&self, phys: &[f64]) -> Derivatives {
        let n = self.n_theta;
        let modes = self.to_modes(phys);
        let ms = self.radial(&modes, 1);
        let mss = self.radial(&modes, 2);
        let mut mt = modes.clone();
        let mut mtt = modes;
        let mut mst = ms.clone();
        for (idx, ((t, tt), st)) in mt.iter_mut().zip(mtt.iter_mut()).zip(mst.iter_mut()).enumerate() {
            let j = idx % n;
            let k = self.wavenumber(j) as f64;
            let ik = if 2 * j == n { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) };
            *t *= ik;
            *st *= ik;
            *tt *= -k * k;
        }
        Derivatives {
            s: self.to_phys(&ms),
            ss: self.to_phys(&mss),
            theta: self.to_phys(&mt),
            theta2: self.to_phys(&mtt),
            s_theta: self.to_phys(&mst),
        }
    }

    /// `d/ds` and `d/dtheta` on the boundary row only.
    pub fn boundary_gradient(&self, phys: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_theta;
        let modes = self.to_modes(phys);
        let mut ms = vec![Complex64::new(0.0, 0.0); n];
        let m = self.n_r;
        for l in 0..m {
            let (pa, pb) = (self.d1a[(0, l)], self.d1b[(0, l)]);
            for j in 0..n {
                let sign = if self.wavenumber(j) % 2 == 0 { 1.0 } else { -1.0 };
                ms[j] += modes[l * n + j] * (pa + sign * pb);
            }
        }
        let mut mt = modes[..n].to_vec();
        for (j, t) in mt.iter_mut().enumerate() {
            let k = self.wavenumber(j) as f64;
            *t *= if 2 * j == n { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) };
        }
        (self.to_phys(&ms), self.to_phys(&mt))
    }

    /// Values along the full diameter through `theta_j`, on the Lobatto nodes
    /// of `[-1, 1]` ordered from `s = 1` to `s = -1`.
    pub fn diameter(&self, phys: &[f64], j: usize) -> Vec<f64> {
        let n = self.n_theta;
        let m = self.n_r;
        let opposite = (j + n / 2) % n;
        let mut line = Vec::with_capacity(2 * m);
        for i in 0..m {
            line.push(phys[i * n + j]);
        }
        for i in (0..m).rev() {
            line.push(phys[i * n + opposite]);
        }
        line
    }

    /// Barycentric interpolation along the diameter through `theta_j` at
    /// signed position `s` in `[-1, 1]`.
    pub fn interpolate_diameter(&self, phys: &[f64], j: usize, s: f64) -> f64 {
        let n = 2 * self.n_r - 1;
        let nodes = cheb::lobatto(n);
        let w = cheb::lobatto_weights(n);
        cheb::barycentric(&nodes, &w, &self.diameter(phys, j), s)
    }
}

/// Zeroes every Fourier mode with `|k| > n / 3` of a periodic sample vector.
pub fn dealias(values: &[f64], grid: &DiskGrid) -> Vec<f64> {
    let n = grid.n_theta();
    let mut modes = grid.to_modes(values);
    for (j, c) in modes.iter_mut().enumerate() {
        if grid.wavenumber(j).unsigned_abs() as usize > n / 3 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    grid.to_phys(&modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_smooth_field() {
        let g = DiskGrid::new(12, 16).unwrap();
        let th = g.theta();
        let n = g.n_theta();
        // u = x^2 y + x^3 with x = s cos(theta), y = s sin(theta)
        let f = |s: f64, t: f64| s.powi(3) * (t.cos().powi(2) * t.sin() + t.cos().powi(3));
        let mut u = vec![0.0; g.len()];
        for (i, &s) in g.s().iter().enumerate() {
            for j in 0..n {
                u[i * n + j] = f(s, th[j]);
            }
        }
        let d = g.derivatives(&u);
        let h = 1e-5;
        for (i, &s) in g.s().iter().enumerate() {
            for (j, &t) in th.iter().enumerate() {
                let ds = 3.0 * f(s, t) / s;
                let ft = |t: f64| f(s, t);
                let dt = (ft(t + h) - ft(t - h)) / (2.0 * h);
                assert!((d.s[i * n + j] - ds).abs() < 1e-11, "{i} {j}");
                assert!((d.ss[i * n + j] - 6.0 * f(s, t) / (s * s)).abs() < 1e-9);
                assert!((d.theta[i * n + j] - dt).abs() < 1e-8);
                assert!((d.s_theta[i * n + j] - 3.0 * dt / s).abs() < 1e-8);
            }
        }
        let (bs, bt) = g.boundary_gradient(&u);
        for j in 0..n {
            assert!((bs[j] - d.s[j]).abs() < 1e-12);
            assert!((bt[j] - d.theta[j]).abs() < 1e-12);
        }
        assert!((g.interpolate_diameter(&u, 3, -0.4) - f(0.4, th[3 + n / 2])).abs() < 1e-12);
        assert!(g.s().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(DiskGrid::new(3, 16).is_err());
        assert!(DiskGrid::new(8, 15).is_err());
    }
}
