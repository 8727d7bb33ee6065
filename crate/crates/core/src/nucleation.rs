// SPDX-License-Identifier: Apache-2.0

//! Stochastic skyrmion nucleation at the notch.
//!
//! A pulse with weight `w` nominally creates `floor(w) + Bernoulli(frac(w))`
//! skyrmions. With probability `p_bar` a non-zero nominal count then deviates
//! by one, up or down with equal odds, so the mean count is exactly `w`. At
//! `w = 1` this is the `{0, 1, 2}` model with `p(0) = p(2) = p_bar / 2`, whose
//! relative spread after `N` pulses is `sqrt(p_bar / N)`. A synapse with zero
//! weight is closed and never nucleates.

use alloc::vec::Vec;

use rand::Rng;

use crate::rng::Streams;
use crate::{linear_fit, Error, LinearFit, Result};

/// Per-pulse fluctuation model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StochasticModel {
    /// Probability that a pulse's count deviates from its nominal value.
    pub p_bar: f64,
    /// Deviations split equally between -1 and +1. Only the even split is
    /// modelled; `false` is rejected by [`StochasticModel::validate`].
    #[cfg_attr(feature = "serde", serde(default = "yes"))]
    pub split_even: bool,
}

#[cfg(feature = "serde")]
fn yes() -> bool {
    true
}

impl StochasticModel {
    pub fn new(p_bar: f64) -> Result<Self> {
        let model = Self {
            p_bar,
            split_even: true,
        };
        model.validate()?;
        Ok(model)
    }

    /// Noise-free nucleation.
    pub const fn deterministic() -> Self {
        Self {
            p_bar: 0.0,
            split_even: true,
        }
    }

    /// Probability `p(1)` of exactly one skyrmion at unit weight.
    pub fn p_one(&self) -> f64 {
        1.0 - self.p_bar
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_bar) {
            return Err(Error::Precondition("p_bar must lie in [0, 1]"));
        }
        if !self.split_even {
            return Err(Error::Precondition("only the even -1/+1 deviation split is supported"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NucleationEvent {
    pub pulse_index: u32,
    pub count: u32,
}

/// Number of skyrmions created by one pulse of weight `w`.
pub fn sample_pulse_count<R: Rng + ?Sized>(w: f64, model: &StochasticModel, rng: &mut R) -> Result<u32> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Precondition("weight must be finite and >= 0"));
    }
    model.validate()?;
    Ok(draw(w, model.p_bar, rng))
}

/// Unchecked sampler. For `w > 0` it consumes one uniform for a fractional
/// weight and one for a non-zero `p_bar`.
#[inline]
pub(crate) fn draw<R: Rng + ?Sized>(w: f64, p_bar: f64, rng: &mut R) -> u32 {
    if w == 0.0 {
        return 0;
    }
    let base = libm::floor(w);
    let frac = w - base;
    let mut count = base as u32;
    if frac > 0.0 && rng.random::<f64>() < frac {
        count += 1;
    }
    if p_bar > 0.0 {
        let u = rng.random::<f64>();
        if count > 0 && u < 0.5 * p_bar {
            count -= 1;
        } else if count > 0 && u < p_bar {
            count += 1;
        }
    }
    count
}

/// Per-pulse events for `n_pulses` pulses of weight `w`.
pub fn nucleation_trace<R: Rng + ?Sized>(
    w: f64,
    model: &StochasticModel,
    n_pulses: u32,
    rng: &mut R,
) -> Result<Vec<NucleationEvent>> {
    (0..n_pulses)
        .map(|pulse_index| sample_pulse_count(w, model, rng).map(|count| NucleationEvent { pulse_index, count }))
        .collect()
}

/// Cumulative `(n_pulses, n_sk)` points, starting from `(0, 0)`.
pub fn cumulative(events: &[NucleationEvent]) -> Vec<(f64, f64)> {
    let mut total = 0u64;
    let mut points = Vec::with_capacity(events.len() + 1);
    points.push((0.0, 0.0));
    for (k, e) in events.iter().enumerate() {
        total += u64::from(e.count);
        points.push(((k + 1) as f64, total as f64));
    }
    points
}

/// Relative standard deviation of `N_sk / N_pulse` after `n_pulse` unit-weight
/// pulses: `sqrt(p_bar / n_pulse)`.
pub fn analytic_sigma(model: &StochasticModel, n_pulse: u32) -> Result<f64> {
    if n_pulse == 0 {
        return Err(Error::Precondition("n_pulse must be >= 1"));
    }
    model.validate()?;
    Ok(libm::sqrt(model.p_bar / f64::from(n_pulse)))
}

/// Minimum number of trials accepted by [`monte_carlo_sigma`].
pub const MIN_TRIALS: u32 = 1000;

/// Empirical standard deviation of `N_sk / N_pulse` at unit weight over
/// `trials` independent runs. Trial `k` draws from `streams.stream(k)`.
pub fn monte_carlo_sigma(model: &StochasticModel, n_pulse: u32, trials: u32, streams: Streams) -> Result<f64> {
    if trials < MIN_TRIALS {
        return Err(Error::Precondition("monte_carlo_sigma needs at least 1000 trials"));
    }
    if n_pulse == 0 {
        return Err(Error::Precondition("n_pulse must be >= 1"));
    }
    model.validate()?;
    let p_bar = model.p_bar;
    let totals = map_trials(trials, |k| {
        let mut rng = streams.stream(u64::from(k));
        let total: u64 = (0..n_pulse).map(|_| u64::from(draw(1.0, p_bar, &mut rng))).sum();
        total as f64 / f64::from(n_pulse)
    });
    Ok(std_dev(&totals))
}

/// Runs `f(k)` for every trial index. Results are returned in trial order
/// whatever the scheduling, so downstream reductions are deterministic.
pub(crate) fn map_trials<T, F>(trials: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(f).collect()
    }
}

/// Sample standard deviation (n - 1 denominator).
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    libm::sqrt(ss / (n - 1.0))
}

/// Fraction of unit-weight pulses whose count differs from one.
pub fn estimate_pbar_from_trace(events: &[NucleationEvent]) -> Result<f64> {
    if events.is_empty() {
        return Err(Error::InsufficientData("empty nucleation trace"));
    }
    let deviating = events.iter().filter(|e| e.count != 1).count();
    Ok(deviating as f64 / events.len() as f64)
}

/// Least-squares synaptic weight `dN_sk / dN_pulses` from cumulative counts.
pub fn fit_weight(cumulative: &[(f64, f64)]) -> Result<LinearFit> {
    if cumulative.len() >= 2 && cumulative.iter().all(|p| p.0 == cumulative[0].0) {
        return Err(Error::SingularFit);
    }
    if cumulative.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Precondition("n_pulses must be strictly increasing"));
    }
    linear_fit(cumulative)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(p: f64) -> StochasticModel {
        StochasticModel::new(p).unwrap()
    }

    #[test]
    fn deterministic_unit_weight() {
        let mut rng = Streams::new(1).stream(0);
        for _ in 0..1000 {
            assert_eq!(sample_pulse_count(1.0, &model(0.0), &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn unit_weight_distribution() {
        let mut rng = Streams::new(2).stream(0);
        let n = 200_000;
        let mut hist = [0u32; 4];
        for _ in 0..n {
            hist[sample_pulse_count(1.0, &model(0.4), &mut rng).unwrap() as usize] += 1;
        }
        assert_eq!(hist[3], 0);
        let expected = [0.2, 0.6, 0.2];
        for (k, &e) in expected.iter().enumerate() {
            let freq = f64::from(hist[k]) / f64::from(n);
            let se = libm::sqrt(e * (1.0 - e) / f64::from(n));
            assert!((freq - e).abs() < 4.0 * se, "count {k}: {freq} vs {e}");
        }
    }

    #[test]
    fn fractional_weight_mean() {
        let mut rng = Streams::new(3).stream(0);
        let n = 1_000_000u32;
        let mut sum = 0u64;
        for _ in 0..n {
            let c = sample_pulse_count(2.5, &model(0.0), &mut rng).unwrap();
            assert!(c == 2 || c == 3);
            sum += u64::from(c);
        }
        let mean = sum as f64 / f64::from(n);
        // Bernoulli(0.5) standard error.
        let se = 0.5 / libm::sqrt(f64::from(n));
        assert!((mean - 2.5).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn zero_weight_is_closed() {
        let mut rng = Streams::new(6).stream(0);
        assert!((0..10_000).all(|_| sample_pulse_count(0.0, &model(0.9), &mut rng).unwrap() == 0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = Streams::new(0).stream(0);
        assert!(sample_pulse_count(-0.1, &model(0.1), &mut rng).is_err());
        assert!(StochasticModel::new(1.5).is_err());
        let uneven = StochasticModel {
            p_bar: 0.2,
            split_even: false,
        };
        assert!(uneven.validate().is_err());
    }

    #[test]
    fn analytic_sigma_examples() {
        assert_eq!(analytic_sigma(&model(0.0), 37).unwrap(), 0.0);
        assert!((analytic_sigma(&model(0.4), 100).unwrap() - 0.063_245_553).abs() < 1e-9);
        assert!((analytic_sigma(&model(0.4), 10).unwrap() - 0.2).abs() < 1e-15);
        assert!(analytic_sigma(&model(0.4), 0).is_err());
    }

    #[test]
    fn monte_carlo_sigma_examples() {
        let s = Streams::new(11);
        assert_eq!(monte_carlo_sigma(&model(0.0), 50, 10_000, s).unwrap(), 0.0);
        let sigma = monte_carlo_sigma(&model(1.0), 4, 100_000, s).unwrap();
        assert!((sigma - 0.5).abs() < 0.01, "{sigma}");
        assert!(monte_carlo_sigma(&model(0.4), 10, 999, s).is_err());
    }

    #[test]
    fn pbar_estimator() {
        let ev = |counts: &[u32]| -> Vec<NucleationEvent> {
            counts
                .iter()
                .enumerate()
                .map(|(i, &count)| NucleationEvent {
                    pulse_index: i as u32,
                    count,
                })
                .collect()
        };
        assert_eq!(estimate_pbar_from_trace(&ev(&[1, 1, 1, 1])).unwrap(), 0.0);
        assert!((estimate_pbar_from_trace(&ev(&[0, 1, 2, 1, 1, 1, 2, 0, 1, 1])).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(estimate_pbar_from_trace(&[]), Err(Error::InsufficientData(_))));

        let mut rng = Streams::new(5).stream(0);
        let trace = nucleation_trace(1.0, &model(0.4), 10_000, &mut rng).unwrap();
        let p = estimate_pbar_from_trace(&trace).unwrap();
        assert!((p - 0.4).abs() < 0.01, "{p}");
    }

    #[test]
    fn fit_weight_examples() {
        let fit = fit_weight(&[(0.0, 0.0), (10.0, 10.0), (20.0, 20.0)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12 && fit.intercept.abs() < 1e-12);
        let fit = fit_weight(&[(0.0, 0.0), (20.0, 68.4)]).unwrap();
        assert!((fit.slope - 3.42).abs() < 1e-12);
        assert_eq!(fit.slope_std, None);
        assert_eq!(
            fit_weight(&[(3.0, 0.0), (3.0, 1.0), (3.0, 2.0)]),
            Err(Error::SingularFit)
        );
        assert!(fit_weight(&[(0.0, 0.0), (2.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn fit_weight_noise_free() {
        for w in [0.3, 1.0, 1.14, 3.42] {
            let pts: Vec<_> = (0..=20).map(|n| (f64::from(n), w * f64::from(n))).collect();
            let fit = fit_weight(&pts).unwrap();
            assert!((fit.slope - w).abs() < 1e-9);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stochastic_fit_near_weight() {
        // Mean fitted slope over many traces recovers w; the spread matches
        // the OLS variance of a cumulative random walk.
        let s = Streams::new(9);
        let trials = 4000;
        let slopes: Vec<f64> = (0..trials)
            .map(|k| {
                let mut rng = s.stream(k);
                let t = nucleation_trace(1.14, &model(0.4), 20, &mut rng).unwrap();
                fit_weight(&cumulative(&t)).unwrap().slope
            })
            .collect();
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let sd = std_dev(&slopes);
        assert!((mean - 1.14).abs() < 4.0 * sd / libm::sqrt(trials as f64), "{mean}");
        assert!(sd < 0.2, "{sd}");
    }
}
