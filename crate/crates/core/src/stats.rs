//! Entropy helpers and error-probability estimates.

use libm::{log2, sqrt};

use crate::Result;

/// `-p log2 p` with the convention `0 log 0 = 0`.
#[inline]
pub fn neg_plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * log2(p)
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().copied().map(neg_plogp).sum()
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    neg_plogp(p) + neg_plogp(1.0 - p)
}

/// How an [`ErrorEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateMode {
    Exact,
    MonteCarlo { trials: u64, failures: u64, std_err: f64 },
}

/// An error probability, either computed exactly or estimated by simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub value: f64,
    pub mode: EstimateMode,
}

impl ErrorEstimate {
    pub fn exact(value: f64) -> Self {
        // Summation noise can push a true 0 or 1 slightly outside the interval.
        Self { value: value.clamp(0.0, 1.0), mode: EstimateMode::Exact }
    }

    /// Estimate from `failures` out of `trials` Bernoulli outcomes.
    ///
    /// The standard error is the half-width of the one-sigma Wilson score
    /// interval, which stays positive when no failure was observed.
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        assert!(trials > 0, "at least one trial is required");
        assert!(failures <= trials);
        let n = trials as f64;
        let p = failures as f64 / n;
        let std_err = sqrt(p * (1.0 - p) / n + 1.0 / (4.0 * n * n)) / (1.0 + 1.0 / n);
        Self { value: p, mode: EstimateMode::MonteCarlo { trials, failures, std_err } }
    }

    /// Zero for exact values.
    pub fn std_err(&self) -> f64 {
        match self.mode {
            EstimateMode::Exact => 0.0,
            EstimateMode::MonteCarlo { std_err, .. } => std_err,
        }
    }

    pub fn trials(&self) -> Option<u64> {
        match self.mode {
            EstimateMode::Exact => None,
            EstimateMode::MonteCarlo { trials, .. } => Some(trials),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, EstimateMode::Exact)
    }

    /// `"exact"` or `"mc"`.
    pub fn mode_label(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "mc"
        }
    }

    /// True when `self` and `other` differ by at most `sigmas` combined standard errors.
    pub fn agrees_with(&self, other: &ErrorEstimate, sigmas: f64) -> bool {
        let se = sqrt(self.std_err() * self.std_err() + other.std_err() * other.std_err());
        (self.value - other.value).abs() <= sigmas * se + 1e-12
    }
}

/// Evaluates independent Monte Carlo trials and counts failures.
///
/// Trial `i` must depend only on `i`, so any implementation (sequential or
/// parallel) returns the same count.
pub trait TrialRunner {
    fn count_failures(&self, trials: u64, trial: &(dyn Fn(u64) -> Result<bool> + Sync)) -> Result<u64>;
}

/// Runs trials in index order on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialRunner for Sequential {
    fn count_failures(&self, trials: u64, trial: &(dyn Fn(u64) -> Result<bool> + Sync)) -> Result<u64> {
        let mut failures = 0;
        for i in 0..trials {
            failures += trial(i)? as u64;
        }
        Ok(failures)
    }
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, sqrt(var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_reference_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89
        assert!((binary_entropy(0.11) - 0.499_915_958_164_528).abs() < 1e-12);
    }

    #[test]
    fn wilson_error_is_positive_at_zero_failures() {
        let e = ErrorEstimate::from_counts(0, 100);
        assert_eq!(e.value, 0.0);
        assert!(e.std_err() > 0.0 && e.std_err() < 0.01);
        let e = ErrorEstimate::from_counts(50, 100);
        assert!((e.std_err() - 0.05).abs() < 1e-3);
    }
}
