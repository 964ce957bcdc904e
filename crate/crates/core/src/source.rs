//! Finite memoryless sources and channels.
//!
//! A [`Channel`] is a stochastic matrix `W(y|x)`; a [`JointSource`] is a
//! single-letter joint `p(x, y)` whose `n`-fold product is the law of
//! `(X^n, Y^n)`. Spectral entropy rates of memoryless sources coincide with
//! the single-letter Shannon entropies, so [`InfoMeasures`] doubles as the
//! inf/sup spectral rates used by the rate conditions elsewhere in the crate.
//! All logarithms are base 2.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{erfc, log2, pow, sqrt};
use rand::Rng;

use crate::gf::{FieldSpec, GfVector, Residue};
use crate::stats::{entropy_bits, mean_std, ErrorEstimate};
use crate::{seed, Error, Result};

const MASS_TOL: f64 = 1e-12;

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("probability outside [0, 1]"))
    }
}

fn check_distribution(probs: &[f64], what: &'static str) -> Result<()> {
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution(what));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidDistribution(what));
    }
    Ok(())
}

/// Inverse-CDF sampler for a finite distribution.
#[derive(Debug, Clone)]
pub(crate) struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub(crate) fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub(crate) fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u);
        // u < total so i < len unless rounding put u on the last edge
        i.min(self.cumulative.len() - 1)
    }
}

/// A discrete memoryless channel `W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Channel {
    /// Builds a channel from its row-major transition matrix.
    pub fn new(inputs: usize, outputs: usize, probs: Vec<f64>) -> Result<Self> {
        let labels = (0..outputs).map(|y| format!("{y}")).collect();
        Self::with_labels(inputs, labels, probs)
    }

    pub fn with_labels(inputs: usize, labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let outputs = labels.len();
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidParameter("channel alphabets must be nonempty"));
        }
        if probs.len() != inputs * outputs {
            return Err(Error::DimensionMismatch { expected: inputs * outputs, found: probs.len() });
        }
        for row in probs.chunks(outputs) {
            check_distribution(row, "channel row is not a probability vector")?;
        }
        Ok(Self { inputs, outputs, labels, probs })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    /// Z-channel: `0` is received intact, `1` flips to `0` with probability `p`.
    pub fn z_channel(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(2, 2, vec![1.0, 0.0, p, 1.0 - p])
    }

    /// Identity channel on `q` symbols.
    pub fn noiseless(q: usize) -> Result<Self> {
        let mut probs = vec![0.0; q * q];
        for x in 0..q {
            probs[x * q + x] = 1.0;
        }
        Self::new(q, q, probs)
    }

    /// AWGN channel with a `inputs`-point PAM constellation of unit average
    /// energy, observed through a uniform quantizer with `levels` cells.
    ///
    /// The quantizer covers `[-(a + 3 sigma), a + 3 sigma]` where `a` is the
    /// largest amplitude; the two outer cells extend to infinity.
    pub fn quantized_awgn(inputs: usize, snr_db: f64, levels: usize) -> Result<Self> {
        if inputs < 2 || levels < 2 {
            return Err(Error::InvalidParameter("quantized AWGN needs at least 2 inputs and 2 levels"));
        }
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter("snr must be finite"));
        }
        let k = inputs as f64;
        let scale = 1.0 / sqrt((k * k - 1.0) / 3.0);
        let points: Vec<f64> = (0..inputs).map(|i| (2.0 * i as f64 - (k - 1.0)) * scale).collect();
        let sigma = sqrt(1.0 / pow(10.0, snr_db / 10.0));
        let edge = points[inputs - 1] + 3.0 * sigma;
        let width = 2.0 * edge / levels as f64;
        let thresholds: Vec<f64> = (1..levels).map(|j| -edge + j as f64 * width).collect();
        let cdf = |t: f64, s: f64| 0.5 * erfc(-(t - s) / (sigma * core::f64::consts::SQRT_2));
        let mut probs = Vec::with_capacity(inputs * levels);
        for &s in &points {
            let mut prev = 0.0;
            let mut row = Vec::with_capacity(levels);
            for &t in &thresholds {
                let c = cdf(t, s);
                row.push(c - prev);
                prev = c;
            }
            row.push(1.0 - prev);
            let total: f64 = row.iter().sum();
            probs.extend(row.into_iter().map(|p| p / total));
        }
        Self::new(inputs, levels, probs)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Row-major transition probabilities.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.probs[x * self.outputs + y]
    }

    /// `W^n(y|x)` for the memoryless extension.
    pub fn word_prob(&self, y: &[usize], x: &[Residue]) -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| self.prob(yi, xi as usize)).product()
    }

    /// Passes `x` through the channel.
    pub fn transmit<R: Rng + ?Sized>(&self, x: &[Residue], rng: &mut R) -> Vec<usize> {
        x.iter().map(|&xi| Categorical::new(self.row(xi as usize).iter().copied()).sample(rng)).collect()
    }

    /// A sampler that caches the per-input row distributions.
    pub(crate) fn sampler(&self) -> ChannelSampler {
        ChannelSampler { rows: (0..self.inputs).map(|x| Categorical::new(self.row(x).iter().copied())).collect() }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ChannelSampler {
    rows: Vec<Categorical>,
}

impl ChannelSampler {
    pub(crate) fn transmit<R: Rng + ?Sized>(&self, x: &[Residue], rng: &mut R) -> Vec<usize> {
        x.iter().map(|&xi| self.rows[xi as usize].sample(rng)).collect()
    }
}

/// Single-letter entropic quantities in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoMeasures {
    pub h_x: f64,
    pub h_y: f64,
    pub h_x_given_y: f64,
    pub mutual_information: f64,
}

/// A single-letter joint distribution `p(x, y)` on a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSource {
    x_size: usize,
    y_size: usize,
    /// `joint[x * y_size + y]`
    joint: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
}

impl JointSource {
    pub fn new(x_size: usize, y_size: usize, joint: Vec<f64>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidParameter("source alphabets must be nonempty"));
        }
        if joint.len() != x_size * y_size {
            return Err(Error::DimensionMismatch { expected: x_size * y_size, found: joint.len() });
        }
        check_distribution(&joint, "joint distribution must be nonnegative with unit mass")?;
        let px = (0..x_size).map(|x| joint[x * y_size..(x + 1) * y_size].iter().sum()).collect();
        let py = (0..y_size).map(|y| (0..x_size).map(|x| joint[x * y_size + y]).sum()).collect();
        Ok(Self { x_size, y_size, joint, px, py })
    }

    /// The joint law of a channel input `X ~ input` and its output.
    pub fn from_channel(channel: &Channel, input: &[f64]) -> Result<Self> {
        if input.len() != channel.inputs() {
            return Err(Error::DimensionMismatch { expected: channel.inputs(), found: input.len() });
        }
        check_distribution(input, "input distribution")?;
        let joint = (0..channel.inputs())
            .flat_map(|x| channel.row(x).iter().map(move |&w| w * input[x]))
            .collect();
        Self::new(channel.inputs(), channel.outputs(), joint)
    }

    /// Doubly symmetric binary source: uniform `X`, `Y = X` flipped with probability `p`.
    pub fn dsbs(p: f64) -> Result<Self> {
        Self::from_channel(&Channel::bsc(p)?, &[0.5, 0.5])
    }

    /// A source without side information (`Y` constant).
    pub fn marginal_only(px: &[f64]) -> Result<Self> {
        Self::new(px.len(), 1, px.to_vec())
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn joint_table(&self) -> &[f64] {
        &self.joint
    }

    #[inline]
    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.y_size + y]
    }

    pub fn px(&self) -> &[f64] {
        &self.px
    }

    pub fn py(&self) -> &[f64] {
        &self.py
    }

    /// `p(x|y)`; zero when `p(y) = 0`.
    #[inline]
    pub fn x_given_y(&self, x: usize, y: usize) -> f64 {
        let py = self.py[y];
        if py > 0.0 {
            self.joint(x, y) / py
        } else {
            0.0
        }
    }

    /// `p(y|x)`; uniform over outputs when `p(x) = 0`.
    #[inline]
    pub fn y_given_x(&self, y: usize, x: usize) -> f64 {
        let px = self.px[x];
        if px > 0.0 {
            self.joint(x, y) / px
        } else {
            1.0 / self.y_size as f64
        }
    }

    /// The conditional `p(y|x)` as a channel.
    pub fn channel(&self) -> Channel {
        let probs = (0..self.x_size).flat_map(|x| (0..self.y_size).map(move |y| (x, y)));
        let probs: Vec<f64> = probs.map(|(x, y)| self.y_given_x(y, x)).collect();
        Channel::new(self.x_size, self.y_size, probs).expect("conditional rows are stochastic")
    }

    pub fn info_measures(&self) -> InfoMeasures {
        let h_x = entropy_bits(&self.px);
        let h_y = entropy_bits(&self.py);
        let h_xy = entropy_bits(&self.joint);
        let h_x_given_y = h_xy - h_y;
        InfoMeasures { h_x, h_y, h_x_given_y, mutual_information: h_x - h_x_given_y }
    }

    /// `log2 p(x)` for the product law.
    pub fn log2_px(&self, x: &[Residue]) -> f64 {
        x.iter().map(|&xi| log2(self.px[xi as usize])).sum()
    }

    /// `log2 p(x|y)` for the product law.
    pub fn log2_x_given_y(&self, x: &[Residue], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| log2(self.x_given_y(xi as usize, yi))).sum()
    }

    /// `p(x, y)` for the product law.
    pub fn word_joint(&self, x: &[Residue], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| self.joint(xi as usize, yi)).product()
    }

    /// `p(x)` for the product law.
    pub fn word_px(&self, x: &[Residue]) -> f64 {
        x.iter().map(|&xi| self.px[xi as usize]).product()
    }

    pub(crate) fn sampler(&self) -> JointSampler {
        JointSampler {
            x: Categorical::new(self.px.iter().copied()),
            y_given_x: self.channel().sampler(),
        }
    }

    /// Draws `n` i.i.d. pairs. The field must have `x_size` elements.
    pub fn sample_pair<R: Rng + ?Sized>(&self, field: FieldSpec, n: usize, rng: &mut R) -> Result<(GfVector, Vec<usize>)> {
        if field.order() != self.x_size {
            return Err(Error::DimensionMismatch { expected: self.x_size, found: field.order() });
        }
        let (x, y) = self.sampler().sample(n, rng);
        Ok((GfVector::from_raw(field, x), y))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct JointSampler {
    x: Categorical,
    y_given_x: ChannelSampler,
}

impl JointSampler {
    pub(crate) fn sample_x<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Residue> {
        (0..n).map(|_| self.x.sample(rng) as Residue).collect()
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<Residue>, Vec<usize>) {
        let x = self.sample_x(n, rng);
        let y = self.y_given_x.transmit(&x, rng);
        (x, y)
    }
}

/// Which information-spectrum quantity a typical set is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// `(1/n) log 1/p(x)`, compared from below against `H(X) - eps`.
    InfEntropy,
    /// `(1/n) log 1/p(x|y)`, compared from above against `H(X|Y) + eps`.
    CondSupEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSetSpec {
    pub epsilon: f64,
    pub n: usize,
    pub kind: SpectrumKind,
}

impl TypicalSetSpec {
    pub fn new(epsilon: f64, n: usize, kind: SpectrumKind) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive"));
        }
        Ok(Self { epsilon, n, kind })
    }
}

/// `(1/n) log2 1/p(x)` or `(1/n) log2 1/p(x|y)`.
pub fn spectrum_value(src: &JointSource, kind: SpectrumKind, x: &[Residue], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    match kind {
        SpectrumKind::InfEntropy => -src.log2_px(x) / n,
        SpectrumKind::CondSupEntropy => -src.log2_x_given_y(x, y) / n,
    }
}

/// Evaluates the defining inequality of the typical set.
///
/// `y` is required for [`SpectrumKind::CondSupEntropy`] and ignored otherwise.
pub fn typical_membership(spec: &TypicalSetSpec, src: &JointSource, x: &[Residue], y: Option<&[usize]>) -> Result<bool> {
    if x.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, found: x.len() });
    }
    let info = src.info_measures();
    match spec.kind {
        SpectrumKind::InfEntropy => Ok(spectrum_value(src, spec.kind, x, &[]) >= info.h_x - spec.epsilon),
        SpectrumKind::CondSupEntropy => {
            let y = y.ok_or(Error::InvalidParameter("conditional typicality needs side information"))?;
            if y.len() != spec.n {
                return Err(Error::DimensionMismatch { expected: spec.n, found: y.len() });
            }
            Ok(spectrum_value(src, spec.kind, x, y) <= info.h_x_given_y + spec.epsilon)
        }
    }
}

/// One histogram cell `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Empirical distribution of the normalized self-information.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumHistogram {
    pub kind: SpectrumKind,
    pub n: usize,
    pub trials: u64,
    pub mean: f64,
    pub std: f64,
    pub bins: Vec<HistogramBin>,
}

/// Samples `trials` pairs of length `n` and histograms their spectrum value.
pub fn spectrum_histogram(src: &JointSource, kind: SpectrumKind, n: usize, trials: u64, bins: usize, seed: u64) -> Result<SpectrumHistogram> {
    if n == 0 || trials == 0 || bins == 0 {
        return Err(Error::InvalidParameter("n, trials and bins must be positive"));
    }
    let sampler = src.sampler();
    let values: Vec<f64> = (0..trials)
        .map(|t| {
            let mut rng = seed::stream(seed, &[t]);
            let (x, y) = sampler.sample(n, &mut rng);
            spectrum_value(src, kind, &x, &y)
        })
        .collect();
    let (mean, std) = mean_std(&values);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin { lo: lo + b as f64 * width, hi: lo + (b + 1) as f64 * width, count: 0 })
        .collect();
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    Ok(SpectrumHistogram { kind, n, trials, mean, std, bins: out })
}

/// Monte Carlo estimate of the probability of falling outside the typical set.
pub fn atypical_probability(src: &JointSource, spec: &TypicalSetSpec, trials: u64, seed: u64) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive"));
    }
    let sampler = src.sampler();
    let info = src.info_measures();
    let mut outside = 0u64;
    for t in 0..trials {
        let mut rng = seed::stream(seed, &[t]);
        let (x, y) = sampler.sample(spec.n, &mut rng);
        let v = spectrum_value(src, spec.kind, &x, &y);
        let inside = match spec.kind {
            SpectrumKind::InfEntropy => v >= info.h_x - spec.epsilon,
            SpectrumKind::CondSupEntropy => v <= info.h_x_given_y + spec.epsilon,
        };
        if !inside {
            outside += 1;
        }
    }
    Ok(ErrorEstimate::from_counts(outside, trials))
}
