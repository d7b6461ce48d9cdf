//! Chirp-z evaluation of the aperture sum on a uniform u-v lattice.
//!
//! Along one grid axis with element index `n` and output index `m`, the
//! array sum is `sum_n b_n exp(j alpha n m)`. Writing
//! `n m = (n² + m² - (m - n)²) / 2` turns it into a linear convolution with
//! a chirp, which is evaluated with zero-padded FFTs (Bluestein). The 2-D
//! field is obtained by transforming rows, then columns.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Aperture, UniformAxis};

/// `out[m] = sum_n x[n] exp(j alpha n m)` for `m < count`.
pub(crate) fn chirp_z(x: &[Complex64], alpha: f64, count: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 || count == 0 {
        return vec![Complex64::new(0.0, 0.0); count];
    }
    if n == 1 {
        return vec![x[0]; count];
    }
    let chirp = |i: f64| Complex64::from_polar(1.0, 0.5 * alpha * i * i);
    let len = (n + count - 1).next_power_of_two();

    let mut a = vec![Complex64::new(0.0, 0.0); len];
    for (i, &xi) in x.iter().enumerate() {
        a[i] = xi * chirp(i as f64);
    }
    let mut h = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..count {
        h[i] = chirp(i as f64).conj();
    }
    for i in 1..n {
        h[len - i] = chirp(i as f64).conj();
    }

    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut a);
    fwd.process(&mut h);
    for (ai, hi) in a.iter_mut().zip(&h) {
        *ai *= hi;
    }
    inv.process(&mut a);
    let scale = 1.0 / len as f64;
    (0..count).map(|m| a[m] * scale * chirp(m as f64)).collect()
}

// out[m] = sum_n x[n] exp(j k pos_n w_m) with pos_n = (n - center) * period,
// w_m = start + m * step.
fn axis_sum(
    x: &[Complex64],
    k: f64,
    period: f64,
    axis: &UniformAxis,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let center = (x.len() as f64 - 1.0) / 2.0;
    let shifted: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| xi * Complex64::from_polar(1.0, k * (i as f64 - center) * period * axis.start))
        .collect();
    let alpha = k * period * axis.step;
    chirp_z(&shifted, alpha, axis.count, planner)
        .into_iter()
        .enumerate()
        .map(|(m, s)| s * Complex64::from_polar(1.0, -alpha * center * m as f64))
        .collect()
}

/// Array sum (without element pattern) on the lattice, ordered v-major.
pub(crate) fn uv_field(aperture: &Aperture, period: f64, u: &UniformAxis, v: &UniformAxis) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let k = aperture.wavenumber();
    let (rows, cols) = (aperture.rows(), aperture.cols());
    let exc = aperture.excitation();

    // rows x u.count
    let by_row: Vec<Vec<Complex64>> = (0..rows)
        .map(|r| axis_sum(&exc[r * cols..(r + 1) * cols], k, period, u, &mut planner))
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); u.count * v.count];
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for m in 0..u.count {
        for r in 0..rows {
            column[r] = by_row[r][m];
        }
        for (n, val) in axis_sum(&column, k, period, v, &mut planner).into_iter().enumerate() {
            out[n * u.count + m] = val;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chirp_z_matches_direct_sum() {
        let x: Vec<Complex64> = (0..13).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let alpha = 0.0371;
        let mut planner = FftPlanner::new();
        let got = chirp_z(&x, alpha, 200, &mut planner);
        for (m, g) in got.iter().enumerate() {
            let want: Complex64 = x
                .iter()
                .enumerate()
                .map(|(n, &xn)| xn * Complex64::from_polar(1.0, alpha * (n * m) as f64))
                .sum();
            assert!((g - want).norm() < 1e-12, "m={m}");
        }
    }
}
