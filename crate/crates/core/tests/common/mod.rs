//! Independent reference values for `f = id`, computed from the modified
//! Bessel series `I_n(x) = sum_m (x/2)^(2m+n) / (m! (m+n)!)`.
#![allow(dead_code)]

pub fn bessel_i(n: usize, x: f64) -> f64 {
    let h = x / 2.0;
    let mut term = h.powi(n as i32) / (1..=n).map(|j| j as f64).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= h * h / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `u_n'(1) / u_n(1)` at radius `r` for `f = id`.
pub fn ratio(n: usize, r: f64) -> f64 {
    r * bessel_i(n + 1, r) / bessel_i(n, r)
}

/// `u_n(x)` for `f = id` at radius `r`, normalised by `u_n(0) = 1`.
pub fn u_n(n: usize, r: f64, x: f64) -> f64 {
    let z = r * x;
    if z == 0.0 {
        return 1.0;
    }
    let fact: f64 = (1..=n).map(|j| j as f64).product();
    fact * 2f64.powi(n as i32) * bessel_i(n, z) / z.powi(n as i32)
}

/// Balance `A` whose steady radius is `r` for `f = id`.
pub fn steady_a(r: f64) -> f64 {
    2.0 * bessel_i(1, r) / (r * bessel_i(0, r))
}

/// `d_k = A/2 r_k + A - 1` at the steady radius `r`, for `f = id`.
pub fn denominator(k: usize, r: f64) -> f64 {
    let a = steady_a(r);
    a / 2.0 * ratio(k, r) + a - 1.0
}

/// `mu_k` for `f = id` at the steady radius `r`.
pub fn mu(k: usize, g: f64, r: f64) -> f64 {
    let kf = k as f64;
    (-kf.powi(3) + kf) / r.powi(3) - g * denominator(k, r)
}

/// Brute-force `min G_k` over `2 <= k <= k_max` with `d_k < 0`.
pub fn g_star(r: f64, k_max: usize) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for k in 2..=k_max {
        let d = denominator(k, r);
        if d < 0.0 {
            let kf = k as f64;
            let gk = (-kf.powi(3) + kf) / r.powi(3) / d;
            if gk < best.0 {
                best = (gk, k);
            }
        }
    }
    best
}

#[test]
fn oracle_sanity() {
    assert!((bessel_i(0, 1.0) - 1.2660658777520084).abs() < 1e-14);
    assert!((bessel_i(1, 1.0) - 0.565159103992485).abs() < 1e-14);
    assert!((steady_a(1.0) - 0.89278).abs() < 1e-5);
}
