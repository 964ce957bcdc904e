//! Channel codes built from a source code with decoder side information.
//!
//! Given a syndrome codec `(A, x_A)`, a second map `B` and a shared vector
//! `c`, a message `m` in `Im B` is sent as a sample from `mu_X` restricted to
//! `{x : Ax = c, Bx = m}`. The receiver decodes `x_A(c | y)` and outputs
//! `B x_A(c | y)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::crng::{ConstrainedDistribution, ConstraintSet, LetterWeights, SamplerMode};
use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::gf::{index_of, AffineSolution, FieldSpec, GfVector, LinearMap};
use crate::source::{Channel, ChannelSampler, InfoMeasures, JointSource};
use crate::stats::{ErrorEstimate, TrialRunner};
use crate::sw::{rows_for_rate, DecoderKind, EvalMode, SwCodec};
use crate::{checked_pow, seed, Error, Result};

/// A channel code `(Phi_n, psi_n)` over a fixed `(A, B, c)`.
#[derive(Debug, Clone)]
pub struct ChannelCodec {
    sw: SwCodec,
    b: LinearMap,
    c: GfVector,
    channel: Channel,
    transmitter: ChannelSampler,
    messages: AffineSolution,
    input: Vec<f64>,
}

impl ChannelCodec {
    /// Draws `x ~ mu_X^n` with the stream of `seed` and fixes `c = Ax`.
    ///
    /// `mu_X` is the `X` marginal of the codec's source.
    pub fn build(sw: SwCodec, b: LinearMap, channel: Channel, seed: u64) -> Result<Self> {
        let x = sw.source().sampler().sample_x(sw.n(), &mut seed::rng(seed));
        let c = GfVector::from_raw(sw.map().field(), sw.map().apply(&x));
        Self::with_syndrome(sw, b, channel, c)
    }

    /// A codec with an explicitly chosen `c`, which must lie in `Im A`.
    pub fn with_syndrome(sw: SwCodec, b: LinearMap, channel: Channel, c: GfVector) -> Result<Self> {
        let a = sw.map();
        if b.field() != a.field() {
            return Err(Error::FieldMismatch { left: a.field().modulus(), right: b.field().modulus() });
        }
        if b.cols() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.cols(), found: b.cols() });
        }
        if channel.inputs() != sw.source().x_size() {
            return Err(Error::DimensionMismatch { expected: sw.source().x_size(), found: channel.inputs() });
        }
        if channel.outputs() != sw.source().y_size() {
            return Err(Error::DimensionMismatch { expected: sw.source().y_size(), found: channel.outputs() });
        }
        if !a.contains_in_image(&c)? {
            return Err(Error::InvalidParameter("shared vector c must lie in the image of A"));
        }
        let messages = b.image();
        let input = sw.source().px().to_vec();
        let transmitter = channel.sampler();
        Ok(Self { sw, b, c, channel, transmitter, messages, input })
    }

    pub fn sw(&self) -> &SwCodec {
        &self.sw
    }

    pub fn b(&self) -> &LinearMap {
        &self.b
    }

    pub fn syndrome(&self) -> &GfVector {
        &self.c
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn n(&self) -> usize {
        self.sw.n()
    }

    /// `r = (1/n) log2 |Im A|`.
    pub fn source_rate(&self) -> f64 {
        self.sw.rate()
    }

    /// `R = (1/n) log2 |Im B|`.
    pub fn rate(&self) -> f64 {
        self.b.rate()
    }

    /// `Im B`, the message set.
    pub fn messages(&self) -> &AffineSolution {
        &self.messages
    }

    /// `|M| = |Im B|`.
    pub fn message_count(&self) -> Option<u64> {
        self.messages.size()
    }

    /// A uniformly random message.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> GfVector {
        self.messages.random_member(rng).expect("the image always contains 0")
    }

    /// `mu_X` restricted to `{x : Ax = c, Bx = m}`.
    ///
    /// Exact sampling when the coset fits under the codec's coset cap,
    /// otherwise the default Metropolis schedule.
    pub fn encoder_distribution(&self, m: &GfVector) -> Result<ConstrainedDistribution> {
        let n = self.n();
        let f = self.b.field();
        let constraints = ConstraintSet::new(f, n, vec![(self.sw.map().clone(), self.c.clone()), (self.b.clone(), m.clone())])?;
        let weights = LetterWeights::iid(&self.input, n)?;
        let cap = self.sw.coset_cap();
        let mode = match constraints.solution().size() {
            Some(s) if s <= cap => SamplerMode::Exact,
            _ => SamplerMode::default_mcmc(n),
        };
        ConstrainedDistribution::with_cap(weights, constraints, mode, cap)
    }

    /// `Phi_n(m)`; `None` is the encoder-error outcome.
    pub fn encode(&self, m: &GfVector, seed: u64) -> Result<Option<GfVector>> {
        self.encode_with(m, &mut seed::rng(seed))
    }

    pub fn encode_with<R: Rng + ?Sized>(&self, m: &GfVector, rng: &mut R) -> Result<Option<GfVector>> {
        if m.len() != self.b.rows() {
            return Err(Error::DimensionMismatch { expected: self.b.rows(), found: m.len() });
        }
        Ok(self.encoder_distribution(m)?.draw_with(rng))
    }

    /// `psi_n(y) = B x_A(c | y)`. A decoder failure yields `None`.
    pub fn decode(&self, y: &[usize], seed: u64) -> Result<Option<GfVector>> {
        self.decode_with(y, &mut seed::rng(seed))
    }

    pub fn decode_with<R: Rng + ?Sized>(&self, y: &[usize], rng: &mut R) -> Result<Option<GfVector>> {
        match self.sw.decode_with(&self.c, y, rng) {
            Ok(x) => Ok(Some(self.b.matvec(&x)?)),
            Err(Error::DecodeFailure) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn error_probability(&self, mode: EvalMode, cap: u64, runner: &(impl TrialRunner + ?Sized)) -> Result<ErrorEstimate> {
        match mode {
            EvalMode::Exact => Ok(ErrorEstimate::exact(self.exact_error(cap)?)),
            EvalMode::MonteCarlo { trials, seed } => self.mc_error(trials, seed, runner),
        }
    }

    pub fn mc_error(&self, trials: u64, seed: u64, runner: &(impl TrialRunner + ?Sized)) -> Result<ErrorEstimate> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive"));
        }
        let failures = runner.count_failures(trials, &|i| self.mc_trial(seed, i))?;
        Ok(ErrorEstimate::from_counts(failures, trials))
    }

    /// Uniform message, encode, transmit, decode; `true` on failure.
    pub fn mc_trial(&self, seed: u64, trial: u64) -> Result<bool> {
        let mut rng = seed::stream(seed, &[trial]);
        let m = self.random_message(&mut rng);
        let Some(x) = self.encode_with(&m, &mut rng)? else {
            return Ok(true);
        };
        let y = self.transmitter.transmit(x.entries(), &mut rng);
        Ok(self.decode_with(&y, &mut rng)? != Some(m))
    }

    /// The two-term error formula, summed exactly.
    ///
    /// The state space `|M| * max coset * |Y|^n` must fit in `cap`.
    pub fn exact_error(&self, cap: u64) -> Result<f64> {
        let n = self.n();
        let f = self.b.field();
        let ys = self.channel.outputs();
        let stacked = LinearMap::stack(&[self.sw.map(), &self.b])?;
        let message_count = self.message_count();
        let coset = checked_pow(f.order() as u64, n - stacked.rank());
        let y_total = checked_pow(ys as u64, n);
        let states = message_count.zip(coset).and_then(|(m, c)| m.checked_mul(c)).zip(y_total).and_then(|(a, b)| a.checked_mul(b));
        let (message_count, y_total) = match states {
            Some(s) if s <= cap => (message_count.unwrap(), y_total.unwrap()),
            size => return Err(Error::TooLargeToEnumerate { what: "channel code states for exact error", size, cap }),
        };

        // law of psi(y) for every y
        let mut decoded: Vec<Vec<(usize, f64)>> = Vec::with_capacity(y_total as usize);
        let mut y = vec![0usize; n];
        for yi in 0..y_total {
            fill_digits(yi, ys, &mut y);
            decoded.push(self.message_law(&y)?);
        }

        let mut y_word = vec![0usize; n];
        let inv_m = 1.0 / message_count as f64;
        let mut error = 0.0;
        for m in self.messages.enumerate(cap)? {
            let m_index = m.index() as usize;
            let dist = self.encoder_distribution(&m)?;
            if !(dist.mass()? > 0.0) {
                error += inv_m;
                continue;
            }
            for (x, px) in dist.exact_distribution()? {
                for (yi, law) in decoded.iter().enumerate() {
                    fill_digits(yi as u64, ys, &mut y_word);
                    let w = self.channel.word_prob(&y_word, x.entries());
                    if w == 0.0 {
                        continue;
                    }
                    let ok: f64 = law.iter().filter(|(k, _)| *k == m_index).map(|(_, p)| p).sum();
                    error += inv_m * px * w * (1.0 - ok);
                }
            }
        }
        Ok(error)
    }

    /// Law of `psi_n(y)` as `(message index, probability)` pairs; empty on decoder failure.
    fn message_law(&self, y: &[usize]) -> Result<Vec<(usize, f64)>> {
        let f = self.b.field();
        match self.sw.decoder() {
            DecoderKind::MapExact => match self.sw.decode_map(&self.c, y) {
                Ok(x) => Ok(vec![(index_of(f, &self.b.apply(x.entries())) as usize, 1.0)]),
                Err(Error::DecodeFailure) => Ok(Vec::new()),
                Err(e) => Err(e),
            },
            DecoderKind::Stochastic => {
                let law = self.sw.coset_posterior(&self.c, y)?.exact_distribution()?;
                let mut out: Vec<(usize, f64)> = Vec::new();
                for (x, p) in law {
                    let k = index_of(f, &self.b.apply(x.entries())) as usize;
                    match out.iter_mut().find(|(j, _)| *j == k) {
                        Some(slot) => slot.1 += p,
                        None => out.push((k, p)),
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Base-`radix` digits of `value`, most significant first.
fn fill_digits(mut value: u64, radix: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (value % radix as u64) as usize;
        value /= radix as u64;
    }
}

/// Settings for [`search_message_maps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub candidates: usize,
    pub trials: u64,
    /// Exact evaluation of every candidate and of the baseline instead of Monte Carlo.
    pub exact: bool,
    pub exact_cap: u64,
    pub seed: u64,
}

/// One evaluated `(B, c)` pair.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub index: usize,
    pub codec: ChannelCodec,
    pub estimate: ErrorEstimate,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Every candidate in index order.
    pub candidates: Vec<Candidate>,
    /// Index of the lowest error; the lowest index wins ties.
    pub best: usize,
    /// `Error(A)` of the syndrome codec on its own source.
    pub baseline: ErrorEstimate,
}

impl SearchResult {
    pub fn best(&self) -> &Candidate {
        &self.candidates[self.best]
    }

    /// `best Error(A, B, c) - Error(A)`.
    pub fn delta_hat(&self) -> f64 {
        self.best().estimate.value - self.baseline.value
    }

    /// Lower median of the candidate errors.
    pub fn median(&self) -> f64 {
        let mut v: Vec<f64> = self.candidates.iter().map(|c| c.estimate.value).collect();
        v.sort_by(f64::total_cmp);
        v[(v.len() - 1) / 2]
    }
}

/// Random search for a good `(B, c)` for a fixed syndrome codec.
///
/// Candidate `k` draws `B` from `(seed, [1, k])`, builds `c` from
/// `(seed, [2, k])` and is evaluated with `(seed, [3, k])`. The baseline
/// uses `(seed, [0])`.
pub fn search_message_maps(sw: &SwCodec, ensemble_b: &EnsembleSpec, channel: &Channel, cfg: &SearchConfig, runner: &(impl TrialRunner + ?Sized)) -> Result<SearchResult> {
    if cfg.candidates == 0 {
        return Err(Error::InvalidParameter("candidates must be at least 1"));
    }
    if ensemble_b.cols != sw.n() || ensemble_b.field != sw.map().field() {
        return Err(Error::DimensionMismatch { expected: sw.n(), found: ensemble_b.cols });
    }
    let mode = |path: u64| {
        if cfg.exact {
            EvalMode::Exact
        } else {
            EvalMode::MonteCarlo { trials: cfg.trials, seed: path }
        }
    };
    let baseline = match mode(seed::derive(cfg.seed, &[0])) {
        EvalMode::Exact => ErrorEstimate::exact(sw.exact_error()?),
        m => sw.error_probability(m, runner)?,
    };
    let mut candidates = Vec::with_capacity(cfg.candidates);
    for k in 0..cfg.candidates as u64 {
        let b = ensemble_b.sample(seed::derive(cfg.seed, &[1, k]))?;
        let codec = ChannelCodec::build(sw.clone(), b, channel.clone(), seed::derive(cfg.seed, &[2, k]))?;
        let estimate = codec.error_probability(mode(seed::derive(cfg.seed, &[3, k])), cfg.exact_cap, runner)?;
        candidates.push(Candidate { index: k as usize, codec, estimate });
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.estimate.value.total_cmp(&b.estimate.value).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one candidate");
    Ok(SearchResult { candidates, best, baseline })
}

/// Settings for [`code_from_channel`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n: usize,
    /// Target source-code rate `r`; rows are `ceil(r n / log2 q)`.
    pub source_rate: f64,
    /// Target message rate `R`; rows are `floor(R n / log2 q)`.
    pub message_rate: f64,
    pub ensemble_a: EnsembleKind,
    pub ensemble_b: EnsembleKind,
    pub decoder: DecoderKind,
    pub search: SearchConfig,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub measures: InfoMeasures,
    /// Capacity the input distribution was chosen for.
    pub capacity: f64,
    pub rows_a: usize,
    pub rows_b: usize,
    pub source_rate: f64,
    pub message_rate: f64,
    pub search: SearchResult,
}

impl PipelineReport {
    /// `r > H(X|Y)` for the sampled `A`.
    pub fn source_rate_ok(&self) -> bool {
        self.source_rate > self.measures.h_x_given_y
    }

    /// `r + R < H(X)` for the sampled maps.
    pub fn sum_rate_ok(&self) -> bool {
        self.source_rate + self.message_rate < self.measures.h_x
    }
}

/// End-to-end construction: induced source from `channel` and `input`, a
/// sampled `A`, then [`search_message_maps`] over `B`.
///
/// `A` is drawn from `(seed, [4])` of the search seed.
pub fn code_from_channel(channel: &Channel, input: &[f64], capacity: f64, field: FieldSpec, cfg: &PipelineConfig, runner: &(impl TrialRunner + ?Sized)) -> Result<PipelineReport> {
    let source = JointSource::from_channel(channel, input)?;
    let measures = source.info_measures();
    if measures.h_x - measures.h_x_given_y <= 1e-12 {
        return Err(Error::RateWindowEmpty { h_x: measures.h_x, h_x_given_y: measures.h_x_given_y });
    }
    let bits = field.bits_per_symbol();
    let rows_a = rows_for_rate(cfg.source_rate, cfg.n, bits);
    let rows_b = ((cfg.message_rate * cfg.n as f64 / bits + 1e-9) as usize).min(cfg.n - rows_a);
    let spec_a = EnsembleSpec::new(cfg.ensemble_a.clone(), field, rows_a, cfg.n)?;
    let spec_b = EnsembleSpec::new(cfg.ensemble_b.clone(), field, rows_b, cfg.n)?;
    let a = spec_a.sample(seed::derive(cfg.search.seed, &[4]))?;
    let sw = SwCodec::new(a, source, cfg.decoder)?;
    let search = search_message_maps(&sw, &spec_b, channel, &cfg.search, runner)?;
    let source_rate = sw.rate();
    let message_rate = search.best().codec.rate();
    Ok(PipelineReport { measures, capacity, rows_a, rows_b, source_rate, message_rate, search })
}
