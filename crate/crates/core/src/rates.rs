//! Predicted decay exponents and robust fitting of measured power-law and
//! exponential rates.
//!
//! Fits are ordinary least squares on log-transformed data. A fit only
//! participates in acceptance decisions when its r² clears the goodness
//! gate, which guards against fitting crossover regimes.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum r² for a fit to count as a genuine single rate.
pub const GOODNESS_GATE: f64 = 0.995;

/// Result of a power-law fit v ≈ e^{log_prefactor} t^{-exponent}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    pub exponent: T,
    pub log_prefactor: T,
    pub r_squared: T,
    pub window: (T, T),
    pub points: usize,
}

/// Result of an exponential fit v ≈ prefactor e^{-rate t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit<T> {
    pub rate: T,
    pub prefactor: T,
    pub r_squared: T,
    pub window: (T, T),
    pub points: usize,
}

/// Sharp short-time smoothing exponent σ/((σ-1) q0 + σ(m-1)).
///
/// At σ = N/(N-2) this specializes to N/(2 q0 + N(m-1)). An infinite σ is
/// accepted and returns the limit 1/(q0 + m - 1), which is the relevant
/// exponent when every σ > 1 is admissible.
pub fn predicted_smoothing_exponent<T: Real>(q0: T, m: T, sigma: T) -> Result<T> {
    if !(q0 >= T::one()) || !(m > T::one()) || !(sigma > T::one()) {
        return Err(Error::InvalidArgument(format!(
            "need q0 >= 1, m > 1, sigma > 1; got q0={q0}, m={m}, sigma={sigma}"
        )));
    }
    if sigma.is_infinite() {
        return Ok((q0 + m - T::one()).recip());
    }
    Ok(sigma / ((sigma - T::one()) * q0 + sigma * (m - T::one())))
}

/// Late-time decay exponent 1/(m-1) of the absolute bound for zero-mean data.
pub fn predicted_zero_mean_exponent<T: Real>(m: T) -> Result<T> {
    if !(m > T::one()) {
        return Err(Error::InvalidArgument(format!("need m > 1, got {m}")));
    }
    Ok((m - T::one()).recip())
}

/// Sharp exponential rate m λ₁ |ū|^{m-1} of uniform convergence to a
/// nonzero mean (the rate predicted by linearization).
pub fn predicted_exp_rate<T: Real>(m: T, lambda1: T, mean: T) -> Result<T> {
    if !(m > T::one()) || !(lambda1 > T::zero()) || mean == T::zero() {
        return Err(Error::InvalidArgument(format!(
            "need m > 1, lambda1 > 0, mean != 0; got m={m}, lambda1={lambda1}, mean={mean}"
        )));
    }
    Ok(m * lambda1 * mean.abs().powf(m - T::one()))
}

/// Prior-literature smoothing exponent 1 - (q0/(q0+m-1))^{N/2}, computed
/// only to check that the sharp exponent strictly improves on it.
pub fn reference_exponent_bg05<T: Real>(q0: T, m: T, dim: u32) -> Result<T> {
    if !(q0 >= T::one()) || !(m > T::one()) || dim < 3 {
        return Err(Error::InvalidArgument(format!(
            "need q0 >= 1, m > 1, N >= 3; got q0={q0}, m={m}, N={dim}"
        )));
    }
    let n = T::from_u32(dim).unwrap();
    Ok(T::one() - (q0 / (q0 + m - T::one())).powf(n * T::of(0.5)))
}

fn window_slice<T: Real>(
    times: &[T],
    values: &[T],
    window: (T, T),
) -> Result<(Vec<T>, Vec<T>)> {
    if times.len() != values.len() {
        return Err(Error::Fit(format!(
            "length mismatch: {} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= lo && t <= hi {
            ts.push(t);
            vs.push(v);
        }
    }
    if ts.len() < 5 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] holds {} points, need at least 5",
            ts.len()
        )));
    }
    Ok((ts, vs))
}

/// Least squares of y against x; returns (slope, intercept, r²).
fn linear_regression<T: Real>(x: &[T], y: &[T]) -> (T, T, T) {
    let n = T::from_usize(x.len()).unwrap();
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// Fit v ≈ e^{c} t^{-p} on the points inside `window`.
pub fn fit_power<T: Real>(times: &[T], values: &[T], window: (T, T)) -> Result<RateFit<T>> {
    let (ts, vs) = window_slice(times, values, window)?;
    for (&t, &v) in ts.iter().zip(&vs) {
        if !(v > T::zero()) || !(t > T::zero()) {
            return Err(Error::Fit(format!(
                "power fit needs positive data, got v={v} at t={t}"
            )));
        }
    }
    let lx: Vec<T> = ts.iter().map(|&t| t.ln()).collect();
    let ly: Vec<T> = vs.iter().map(|&v| v.ln()).collect();
    let (slope, intercept, r2) = linear_regression(&lx, &ly);
    Ok(RateFit {
        exponent: -slope,
        log_prefactor: intercept,
        r_squared: r2,
        window,
        points: ts.len(),
    })
}

/// Fit v ≈ c e^{-rate t} on the points inside `window`.
pub fn fit_exp<T: Real>(times: &[T], values: &[T], window: (T, T)) -> Result<ExpFit<T>> {
    let (ts, vs) = window_slice(times, values, window)?;
    for (&t, &v) in ts.iter().zip(&vs) {
        if !(v > T::zero()) {
            return Err(Error::Fit(format!(
                "exponential fit needs positive data, got v={v} at t={t}"
            )));
        }
    }
    let ly: Vec<T> = vs.iter().map(|&v| v.ln()).collect();
    let (slope, intercept, r2) = linear_regression(&ts, &ly);
    Ok(ExpFit {
        rate: -slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        window,
        points: ts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let ratio = (hi / lo).powf(1.0 / (n as f64 - 1.0));
        (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
    }

    #[test]
    fn smoothing_exponent_values() {
        // q0=1, m=2, σ=3 → 3/5, the N=3 Barenblatt decay exponent
        let e = predicted_smoothing_exponent::<f64>(1.0, 2.0, 3.0).unwrap();
        assert!((e - 0.6).abs() < 1e-15);
        // strictly decreasing in q0
        let e2 = predicted_smoothing_exponent::<f64>(2.0, 2.0, 3.0).unwrap();
        assert!((e2 - 3.0 / 7.0).abs() < 1e-15);
        assert!(e2 < e);
        // σ = ∞ limit
        let einf = predicted_smoothing_exponent(1.0, 2.0, f64::INFINITY).unwrap();
        assert!((einf - 0.5).abs() < 1e-15);
        assert!(predicted_smoothing_exponent::<f64>(0.5, 2.0, 3.0).is_err());
    }

    #[test]
    fn smoothing_exponent_limits() {
        // q0 → ∞ sends the exponent to 0, monotonically
        let mut prev = f64::INFINITY;
        for q0 in [1.0, 10.0, 100.0, 1e4, 1e6] {
            let e = predicted_smoothing_exponent::<f64>(q0, 2.0, 3.0).unwrap();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-5);

        // m → 1⁺ converges monotonically to σ/((σ-1) q0)
        let sigma = 3.0;
        let q0 = 2.0;
        let limit = sigma / ((sigma - 1.0) * q0);
        let mut prev = 0.0;
        for k in 1..8 {
            let m = 1.0 + 10f64.powi(-k);
            let e = predicted_smoothing_exponent::<f64>(q0, m, sigma).unwrap();
            assert!(e > prev && e < limit);
            prev = e;
        }
        assert!((prev - limit).abs() < 1e-6 * limit);
    }

    #[test]
    fn zero_mean_exponent() {
        assert_eq!(predicted_zero_mean_exponent::<f64>(2.0).unwrap(), 1.0);
        assert_eq!(predicted_zero_mean_exponent::<f64>(3.0).unwrap(), 0.5);
        assert!(predicted_zero_mean_exponent::<f64>(1.0 + 1e-9).unwrap() > 1e8);
    }

    #[test]
    fn exp_rate_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        let r = predicted_exp_rate(2.0, pi2, 1.0).unwrap();
        assert!((r - 2.0 * pi2).abs() < 1e-12);
        // doubles with lambda1
        let r2 = predicted_exp_rate(2.0, 2.0 * pi2, 1.0).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-12);
        // |1|^{m-1} = 1 makes the rate m λ₁ for any m
        let r3 = predicted_exp_rate(3.7, pi2, -1.0).unwrap();
        assert!((r3 - 3.7 * pi2).abs() < 1e-12);
    }

    #[test]
    fn bg05_reference() {
        let a = reference_exponent_bg05::<f64>(1.0, 2.0, 3).unwrap();
        assert!((a - (1.0 - 0.5f64.powf(1.5))).abs() < 1e-15);
        assert!(a > 0.6);
        // always inside (0,1); vanishes as q0 grows
        for q0 in [1.0, 3.0, 10.0, 1e3] {
            let v = reference_exponent_bg05::<f64>(q0, 2.5, 4).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
        assert!(reference_exponent_bg05::<f64>(1e6, 2.0, 3).unwrap() < 1e-3);
    }

    #[test]
    fn power_fit_round_trip() {
        let ts = geometric(1e-4, 1e-1, 40);
        let vs: Vec<f64> = ts.iter().map(|t| t.powf(-0.6)).collect();
        let fit = fit_power(&ts, &vs, (1e-4, 1e-1)).unwrap();
        assert!((fit.exponent - 0.6).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let vs: Vec<f64> = ts.iter().map(|t| 3.0 / t).collect();
        let fit = fit_power(&ts, &vs, (1e-4, 1e-1)).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert!((fit.log_prefactor - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn power_fit_with_noise() {
        // deterministic ±1% multiplicative perturbation
        let ts = geometric(1e-3, 1.0, 60);
        let vs: Vec<f64> = ts
            .iter()
            .enumerate()
            .map(|(i, t)| t.powf(-0.42) * (1.0 + 0.01 * ((i * 2654435761) % 200) as f64 / 100.0 - 0.01))
            .collect();
        let fit = fit_power(&ts, &vs, (1e-3, 1.0)).unwrap();
        assert!((fit.exponent - 0.42).abs() < 0.02, "{}", fit.exponent);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn exp_fit_round_trip() {
        let ts: Vec<f64> = (0..50).map(|i| 0.02 * i as f64).collect();
        let vs: Vec<f64> = ts.iter().map(|t| (-5.0 * t).exp()).collect();
        let fit = fit_exp(&ts, &vs, (0.0, 1.0)).unwrap();
        assert!((fit.rate - 5.0).abs() < 1e-12);

        let vs: Vec<f64> = ts.iter().map(|t| 2.0 * (-std::f64::consts::PI * t).exp()).collect();
        let fit = fit_exp(&ts, &vs, (0.0, 1.0)).unwrap();
        assert!((fit.rate - std::f64::consts::PI).abs() < 1e-12);
        assert!((fit.prefactor - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_exponential_is_flagged_by_r2() {
        let ts: Vec<f64> = (0..80).map(|i| 0.05 * i as f64 + 0.5).collect();
        let vs: Vec<f64> = ts
            .iter()
            .map(|t| (-5.0 * t).exp() + 0.01 * (-t).exp())
            .collect();
        let fit = fit_exp(&ts, &vs, (0.5, 4.5)).unwrap();
        assert!(fit.rate > 1.0 && fit.rate < 5.0);
        assert!(fit.r_squared < 0.999, "r2={}", fit.r_squared);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let ts = geometric(1e-3, 1.0, 30);
        let vs: Vec<f64> = ts.iter().map(|t| t.powf(-0.5)).collect();
        assert!(fit_power(&ts, &vs, (2.0, 3.0)).is_err());
        let mut vs_bad = vs;
        vs_bad[10] = -1.0;
        assert!(fit_power(&ts, &vs_bad, (1e-3, 1.0)).is_err());
    }
}
