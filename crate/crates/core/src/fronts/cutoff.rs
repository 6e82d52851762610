//! Smooth monotone partition `chi`: 0 for `x <= -1`, 1 for `x >= 1`, the
//! normalized integral of the bump `exp(-1/(1-s^2))` in between.

use std::sync::OnceLock;

use crate::Real;

const TABLE_CELLS: usize = 4096;

struct Table {
    step: f64,
    /// `chi` on `s_k = k * step`, `k = 0..=TABLE_CELLS`.
    values: Vec<f64>,
    norm: f64,
}

fn bump(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn bump_derivative(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        -2.0 * s / (q * q) * (-1.0 / q).exp()
    }
}

// 8-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn integrate(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        s += w * (bump(m - h * x) + bump(m + h * x));
    }
    s * h
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let step = 1.0 / TABLE_CELLS as f64;
        let mut cumulative = vec![0.0; TABLE_CELLS + 1];
        for k in 0..TABLE_CELLS {
            cumulative[k + 1] = cumulative[k] + integrate(k as f64 * step, (k + 1) as f64 * step);
        }
        let half = cumulative[TABLE_CELLS];
        let norm = 2.0 * half;
        let values = cumulative.iter().map(|c| 0.5 + c / norm).collect();
        Table { step, values, norm }
    })
}

/// `chi` in double precision; odd-symmetric about `(0, 1/2)` by construction.
pub fn chi_f64(x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x < 0.0 {
        return 1.0 - chi_f64(-x);
    }
    let t = table();
    let pos = x / t.step;
    let k = (pos.floor() as usize).min(TABLE_CELLS - 1);
    let s0 = k as f64 * t.step;
    let s1 = s0 + t.step;
    let u = (x - s0) / t.step;
    let (y0, y1) = (t.values[k], t.values[k + 1]);
    let (m0, m1) = (bump(s0) / t.norm * t.step, bump(s1) / t.norm * t.step);
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1).clamp(0.0, 1.0)
}

/// Normalizing constant `int_{-1}^{1} exp(-1/(1-s^2)) ds`.
pub fn bump_integral() -> f64 {
    table().norm
}

/// The cutoff `chi(x)`.
pub fn cutoff_chi<T: Real>(x: T) -> T {
    T::of(chi_f64(x.to_f64_lossy()))
}

/// `chi'(x)`.
pub fn cutoff_chi_prime<T: Real>(x: T) -> T {
    T::of(bump(x.to_f64_lossy()) / table().norm)
}

/// `chi''(x)`.
pub fn cutoff_chi_second<T: Real>(x: T) -> T {
    T::of(bump_derivative(x.to_f64_lossy()) / table().norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = bump(a) + bump(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * bump(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(cutoff_chi(-1.0f64), 0.0);
        assert_eq!(cutoff_chi(-7.5f64), 0.0);
        assert_eq!(cutoff_chi(1.0f64), 1.0);
        assert_eq!(cutoff_chi(3.0f64), 1.0);
        assert_eq!(cutoff_chi(0.0f64), 0.5);
    }

    #[test]
    fn matches_simpson_quadrature() {
        let z = simpson(-1.0, 1.0, 200_000);
        assert!((bump_integral() - z).abs() < 1e-12);
        for &x in &[-0.9, -0.5, -0.123, 0.2, 0.5, 0.77, 0.999] {
            let oracle = simpson(-1.0, x, 200_000) / z;
            assert!((cutoff_chi(x) - oracle).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn derivative_consistent_with_finite_difference() {
        for &x in &[-0.8f64, -0.3, 0.0, 0.4, 0.9] {
            let h = 1e-5;
            let fd = (cutoff_chi(x + h) - cutoff_chi(x - h)) / (2.0 * h);
            assert!((fd - cutoff_chi_prime(x)).abs() < 1e-7, "x={x}");
            let fd2 = (cutoff_chi_prime(x + h) - cutoff_chi_prime(x - h)) / (2.0 * h);
            assert!((fd2 - cutoff_chi_second(x)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn f32_path() {
        assert_eq!(cutoff_chi(0.0f32), 0.5);
        assert!((cutoff_chi(0.5f32) - cutoff_chi(0.5f64) as f32).abs() < 1e-7);
    }
}
