//! Flat TOML experiment configuration.
//!
//! Every key is optional at the parsing stage; [`ExperimentConfig::resolve`]
//! checks that the keys the chosen experiment needs are present and in
//! range, and names the first offending key otherwise. Unknown keys are
//! rejected so that typos do not silently fall back to defaults.
//!
//! Keys by experiment (defaults in parentheses):
//!
//! | experiment    | keys |
//! |---------------|------|
//! | all           | `experiment`, `seed` (0), `output`, `threads` (1), `enumeration_cap`, `exact_cap`, `ensemble_cap` |
//! | `capacity`    | `channel` + its parameters, `tol` (1e-9), `q_values`, `subset_samples` |
//! | `hash-verify` | `q`, `rows`, `n`, `ensemble` + its parameters, `weight_gamma` (0), `pairs` (20) |
//! | `sw`          | `q`, `source` + its parameters, `ensemble`, `decoder` (map), `rates`, `ns`, `trials`, `fixed_maps` (0) |
//! | `channel`     | `q`, `channel` + its parameters, `input` (uniform), `n`, `l_a` or `rate`, `l_b` or `message_rate`, `ensemble`, `ensemble_b`, `decoder`, `candidates`, `trials`, `exact` (false) |
//! | `decision`    | `problems`, `max_size` (4) |
//! | `crng-test`   | `q`, `rows`, `n`, `cosets` (1), `draws`, `sampler` (both), `weights` (uniform), `burn_in`, `thin` |
//!
//! Channels: `bsc` and `z-channel` take `p`; `awgn` takes `inputs`, `snr_db`,
//! `levels`; `noiseless` takes `inputs`; `file` takes `file`. Sources are
//! `dsbs` (with `p`), `joint-file` (with `file`), or any channel name, which
//! induces the joint law of a channel input drawn from `input`.
//! Ensembles: `uniform-linear`, `systematic-sparse` (with `row_weight`),
//! `expurgated` (with `gamma` and `inner`, default `uniform-linear`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use sidecode_core::capacity::{blahut_arimoto, SubsetSearch};
use sidecode_core::channel_code::SearchConfig;
use sidecode_core::ensemble::EnsembleKind;
use sidecode_core::gf::FieldSpec;
use sidecode_core::source::{Channel, JointSource};
use sidecode_core::sw::{rows_for_rate, DecoderKind, SweepConfig};
use sidecode_core::{DEFAULT_ENSEMBLE_CAP, DEFAULT_ENUMERATION_CAP, DEFAULT_EXACT_CAP};

use crate::error::{LabError, Result};
use crate::formats::{parse_channel, parse_joint, read_text, read_with};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub enumeration_cap: Option<u64>,
    pub exact_cap: Option<u64>,
    pub ensemble_cap: Option<u64>,

    pub q: Option<u16>,
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub rows: Option<usize>,
    pub l_a: Option<usize>,
    pub l_b: Option<usize>,
    pub rate: Option<f64>,
    pub message_rate: Option<f64>,
    pub rates: Option<Vec<f64>>,

    pub ensemble: Option<String>,
    pub ensemble_b: Option<String>,
    pub inner: Option<String>,
    pub row_weight: Option<usize>,
    pub gamma: Option<f64>,
    pub weight_gamma: Option<f64>,
    pub pairs: Option<usize>,

    pub source: Option<String>,
    pub channel: Option<String>,
    pub p: Option<f64>,
    pub snr_db: Option<f64>,
    pub levels: Option<usize>,
    pub inputs: Option<usize>,
    pub file: Option<PathBuf>,
    pub input: Option<InputSetting>,

    pub decoder: Option<String>,
    pub trials: Option<u64>,
    pub fixed_maps: Option<usize>,
    pub candidates: Option<usize>,
    pub exact: Option<bool>,

    pub tol: Option<f64>,
    pub q_values: Option<Vec<usize>>,
    pub subset_samples: Option<usize>,

    pub problems: Option<u64>,
    pub max_size: Option<usize>,

    pub cosets: Option<usize>,
    pub draws: Option<u64>,
    pub sampler: Option<String>,
    pub weights: Option<Vec<f64>>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
}

/// `input = "uniform"`, `input = "capacity"` or an explicit probability list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InputSetting {
    Named(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Capacity,
    HashVerify,
    Sw,
    Channel,
    Decision,
    CrngTest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Capacity,
        ExperimentKind::HashVerify,
        ExperimentKind::Sw,
        ExperimentKind::Channel,
        ExperimentKind::Decision,
        ExperimentKind::CrngTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::HashVerify => "hash-verify",
            ExperimentKind::Sw => "sw",
            ExperimentKind::Channel => "channel",
            ExperimentKind::Decision => "decision",
            ExperimentKind::CrngTest => "crng-test",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::validation("experiment", format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A channel named in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelChoice {
    Bsc(f64),
    ZChannel(f64),
    Awgn { inputs: usize, snr_db: f64, levels: usize },
    Noiseless(usize),
    File(PathBuf),
}

impl ChannelChoice {
    pub fn build(&self) -> Result<Channel> {
        Ok(match self {
            ChannelChoice::Bsc(p) => Channel::bsc(*p)?,
            ChannelChoice::ZChannel(p) => Channel::z_channel(*p)?,
            ChannelChoice::Awgn { inputs, snr_db, levels } => Channel::quantized_awgn(*inputs, *snr_db, *levels)?,
            ChannelChoice::Noiseless(q) => Channel::noiseless(*q)?,
            ChannelChoice::File(path) => read_with(path, parse_channel)?,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChannelChoice::Bsc(_) => "bsc",
            ChannelChoice::ZChannel(_) => "z-channel",
            ChannelChoice::Awgn { .. } => "awgn",
            ChannelChoice::Noiseless(_) => "noiseless",
            ChannelChoice::File(_) => "file",
        }
    }

    /// The single numeric parameter for CSV `p` columns; empty when there is none.
    pub fn p(&self) -> String {
        match self {
            ChannelChoice::Bsc(p) | ChannelChoice::ZChannel(p) => p.to_string(),
            _ => String::new(),
        }
    }

    /// All parameters as `key=value` pairs separated by `;`.
    pub fn params(&self) -> String {
        match self {
            ChannelChoice::Bsc(p) | ChannelChoice::ZChannel(p) => format!("p={p}"),
            ChannelChoice::Awgn { inputs, snr_db, levels } => format!("inputs={inputs};snr_db={snr_db};levels={levels}"),
            ChannelChoice::Noiseless(q) => format!("inputs={q}"),
            ChannelChoice::File(path) => format!("file={}", path.display()),
        }
    }
}

/// Input distribution for a channel-induced source.
#[derive(Debug, Clone, PartialEq)]
pub enum InputChoice {
    Uniform,
    /// The capacity-achieving input found by Blahut-Arimoto.
    Capacity,
    Explicit(Vec<f64>),
}

impl InputChoice {
    pub fn resolve(&self, channel: &Channel) -> Result<Vec<f64>> {
        let k = channel.inputs();
        match self {
            InputChoice::Uniform => Ok(vec![1.0 / k as f64; k]),
            InputChoice::Capacity => Ok(blahut_arimoto(channel, None, 1e-12)?.input),
            InputChoice::Explicit(p) if p.len() == k => Ok(p.clone()),
            InputChoice::Explicit(p) => Err(LabError::validation("input", format!("{} probabilities for {k} channel inputs", p.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceChoice {
    Dsbs(f64),
    JointFile(PathBuf),
    Induced(ChannelChoice, InputChoice),
}

impl SourceChoice {
    pub fn build(&self) -> Result<JointSource> {
        match self {
            SourceChoice::Dsbs(p) => Ok(JointSource::dsbs(*p)?),
            SourceChoice::JointFile(path) => read_with(path, parse_joint),
            SourceChoice::Induced(ch, input) => {
                let channel = ch.build()?;
                let px = input.resolve(&channel)?;
                Ok(JointSource::from_channel(&channel, &px)?)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SourceChoice::Dsbs(_) => "dsbs",
            SourceChoice::JointFile(_) => "joint-file",
            SourceChoice::Induced(ch, _) => ch.label(),
        }
    }

    pub fn p(&self) -> String {
        match self {
            SourceChoice::Dsbs(p) => p.to_string(),
            SourceChoice::JointFile(_) => String::new(),
            SourceChoice::Induced(ch, _) => ch.p(),
        }
    }
}

/// Enumeration limits, each overridable from the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub enumeration: u64,
    pub exact: u64,
    pub ensemble: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPlan {
    pub channel: ChannelChoice,
    pub tol: f64,
    pub q_values: Vec<usize>,
    pub search: SubsetSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashPlan {
    pub field: FieldSpec,
    pub rows: usize,
    pub n: usize,
    pub kind: EnsembleKind,
    /// Weight threshold for the parameter formulas; defaults to the
    /// expurgation threshold for expurgated ensembles and 0 otherwise.
    pub weight_gamma: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwPlan {
    pub field: FieldSpec,
    pub source: SourceChoice,
    pub kind: EnsembleKind,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    pub field: FieldSpec,
    pub channel: ChannelChoice,
    pub input: InputChoice,
    pub n: usize,
    pub l_a: usize,
    pub l_b: usize,
    /// Configured target rates, when given instead of row counts.
    pub target_rates: (Option<f64>, Option<f64>),
    pub kind_a: EnsembleKind,
    pub kind_b: EnsembleKind,
    pub decoder: DecoderKind,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionPlan {
    pub problems: u64,
    pub max_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerChoice {
    Exact,
    Mcmc,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrngPlan {
    pub field: FieldSpec,
    pub rows: usize,
    pub n: usize,
    pub cosets: usize,
    pub draws: u64,
    pub sampler: SamplerChoice,
    pub weights: Vec<f64>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Capacity(CapacityPlan),
    HashVerify(HashPlan),
    Sw(SwPlan),
    Channel(ChannelPlan),
    Decision(DecisionPlan),
    CrngTest(CrngPlan),
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub kind: ExperimentKind,
    pub plan: Plan,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub caps: Caps,
}

/// An advisory finding; the run may proceed.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}", self.message)
    }
}

fn need<T: Clone>(value: &Option<T>, field: &'static str) -> Result<T> {
    value.clone().ok_or_else(|| LabError::validation(field, "missing"))
}

fn positive<T: PartialOrd + Default + Copy + fmt::Display>(value: T, field: &'static str) -> Result<T> {
    if value > T::default() {
        Ok(value)
    } else {
        Err(LabError::validation(field, format!("must be positive, got {value}")))
    }
}

fn probability(p: f64, field: &'static str) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(LabError::validation(field, format!("must lie in [0, 1], got {p}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::parse(None, e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Parse { message, .. } => LabError::parse(Some(path.to_path_buf()), message),
            other => other,
        })
    }

    fn field(&self) -> Result<FieldSpec> {
        let q = need(&self.q, "q")?;
        FieldSpec::new(q).map_err(|e| LabError::validation("q", e.to_string()))
    }

    fn channel_choice(&self, name: &str, key: &'static str) -> Result<ChannelChoice> {
        Ok(match name {
            "bsc" => ChannelChoice::Bsc(probability(need(&self.p, "p")?, "p")?),
            "z-channel" => ChannelChoice::ZChannel(probability(need(&self.p, "p")?, "p")?),
            "awgn" => ChannelChoice::Awgn {
                inputs: positive(need(&self.inputs, "inputs")?, "inputs")?,
                snr_db: need(&self.snr_db, "snr_db")?,
                levels: positive(need(&self.levels, "levels")?, "levels")?,
            },
            "noiseless" => ChannelChoice::Noiseless(positive(need(&self.inputs, "inputs")?, "inputs")?),
            "file" => ChannelChoice::File(need(&self.file, "file")?),
            other => return Err(LabError::validation(key, format!("unknown channel `{other}`"))),
        })
    }

    fn input_choice(&self) -> Result<InputChoice> {
        match &self.input {
            None => Ok(InputChoice::Uniform),
            Some(InputSetting::Named(s)) if s == "uniform" => Ok(InputChoice::Uniform),
            Some(InputSetting::Named(s)) if s == "capacity" => Ok(InputChoice::Capacity),
            Some(InputSetting::Named(s)) => Err(LabError::validation("input", format!("expected `uniform`, `capacity` or a list, got `{s}`"))),
            Some(InputSetting::Explicit(p)) => Ok(InputChoice::Explicit(p.clone())),
        }
    }

    fn source_choice(&self) -> Result<SourceChoice> {
        match need(&self.source, "source")?.as_str() {
            "dsbs" => Ok(SourceChoice::Dsbs(probability(need(&self.p, "p")?, "p")?)),
            "joint-file" => Ok(SourceChoice::JointFile(need(&self.file, "file")?)),
            other => Ok(SourceChoice::Induced(self.channel_choice(other, "source")?, self.input_choice()?)),
        }
    }

    fn ensemble_kind(&self, name: &str, key: &'static str) -> Result<EnsembleKind> {
        Ok(match name {
            "uniform-linear" => EnsembleKind::UniformLinear,
            "systematic-sparse" => EnsembleKind::SystematicSparse { row_weight: need(&self.row_weight, "row_weight")? },
            "expurgated" => {
                let gamma = need(&self.gamma, "gamma")?;
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(LabError::validation("gamma", format!("must lie in (0, 1), got {gamma}")));
                }
                let inner = self.inner.clone().unwrap_or_else(|| "uniform-linear".into());
                if inner == "expurgated" {
                    return Err(LabError::validation("inner", "nested expurgation is not supported"));
                }
                EnsembleKind::expurgated(self.ensemble_kind(&inner, "inner")?, gamma)
            }
            other => return Err(LabError::validation(key, format!("unknown ensemble `{other}`"))),
        })
    }

    fn decoder(&self) -> Result<DecoderKind> {
        match self.decoder.as_deref().unwrap_or("map") {
            "map" => Ok(DecoderKind::MapExact),
            "stochastic" => Ok(DecoderKind::Stochastic),
            other => Err(LabError::validation("decoder", format!("expected `map` or `stochastic`, got `{other}`"))),
        }
    }

    fn dims(&self, rows_key: &'static str) -> Result<(usize, usize)> {
        let n = positive(need(&self.n, "n")?, "n")?;
        let rows = need(&self.rows, rows_key)?;
        if rows > n {
            return Err(LabError::validation(rows_key, format!("{rows} rows exceed n = {n}")));
        }
        Ok((rows, n))
    }

    /// Checks every key the experiment needs.
    ///
    /// `kind` comes from the command line; it must agree with the
    /// `experiment` key when both are present.
    pub fn resolve(&self, kind: Option<ExperimentKind>) -> Result<Resolved> {
        let kind = match (kind, &self.experiment) {
            (Some(k), None) => k,
            (None, Some(s)) => s.parse()?,
            (Some(k), Some(s)) => {
                let named: ExperimentKind = s.parse()?;
                if named != k {
                    return Err(LabError::validation("experiment", format!("config names `{named}` but `{k}` was requested")));
                }
                k
            }
            (None, None) => return Err(LabError::validation("experiment", "missing")),
        };
        let seed = self.seed.unwrap_or(0);
        let caps = Caps {
            enumeration: positive(self.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP), "enumeration_cap")?,
            exact: positive(self.exact_cap.unwrap_or(DEFAULT_EXACT_CAP), "exact_cap")?,
            ensemble: positive(self.ensemble_cap.unwrap_or(DEFAULT_ENSEMBLE_CAP), "ensemble_cap")?,
        };
        let plan = match kind {
            ExperimentKind::Capacity => {
                let name = need(&self.channel, "channel")?;
                let channel = self.channel_choice(&name, "channel")?;
                let tol = positive(self.tol.unwrap_or(1e-9), "tol")?;
                let q_values = self.q_values.clone().unwrap_or_default();
                if q_values.contains(&0) {
                    return Err(LabError::validation("q_values", "sizes must be positive"));
                }
                let search = match self.subset_samples {
                    None => SubsetSearch::Exhaustive,
                    Some(count) => SubsetSearch::Sampled { count: positive(count, "subset_samples")?, seed },
                };
                Plan::Capacity(CapacityPlan { channel, tol, q_values, search })
            }
            ExperimentKind::HashVerify => {
                let field = self.field()?;
                let (rows, n) = self.dims("rows")?;
                let kind = self.ensemble_kind(&need(&self.ensemble, "ensemble")?, "ensemble")?;
                let default_gamma = match &kind {
                    EnsembleKind::Expurgated { gamma, .. } => *gamma,
                    _ => 0.0,
                };
                let weight_gamma = self.weight_gamma.unwrap_or(default_gamma);
                if !(0.0..1.0).contains(&weight_gamma) {
                    return Err(LabError::validation("weight_gamma", format!("must lie in [0, 1), got {weight_gamma}")));
                }
                Plan::HashVerify(HashPlan { field, rows, n, kind, weight_gamma, pairs: self.pairs.unwrap_or(20) })
            }
            ExperimentKind::Sw => {
                let field = self.field()?;
                let source = self.source_choice()?;
                let kind = self.ensemble_kind(self.ensemble.as_deref().unwrap_or("uniform-linear"), "ensemble")?;
                let rates = need(&self.rates, "rates")?;
                if rates.is_empty() || rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
                    return Err(LabError::validation("rates", "need at least one finite nonnegative rate"));
                }
                let ns = need(&self.ns, "ns")?;
                if ns.is_empty() || ns.contains(&0) {
                    return Err(LabError::validation("ns", "need at least one positive block length"));
                }
                let sweep = SweepConfig {
                    rates,
                    ns,
                    trials: positive(need(&self.trials, "trials")?, "trials")?,
                    fixed_maps: self.fixed_maps.unwrap_or(0),
                    decoder: self.decoder()?,
                    seed,
                    coset_cap: caps.enumeration,
                };
                Plan::Sw(SwPlan { field, source, kind, sweep })
            }
            ExperimentKind::Channel => {
                let field = self.field()?;
                let name = need(&self.channel, "channel")?;
                let channel = self.channel_choice(&name, "channel")?;
                let n = positive(need(&self.n, "n")?, "n")?;
                let bits = field.bits_per_symbol();
                let l_a = match (self.l_a, self.rate) {
                    (Some(l), _) => l,
                    (None, Some(r)) => rows_for_rate(r, n, bits),
                    (None, None) => return Err(LabError::validation("l_a", "missing (or give `rate`)")),
                };
                let l_b = match (self.l_b, self.message_rate) {
                    (Some(l), _) => l,
                    (None, Some(r)) => ((r * n as f64 / bits + 1e-9).max(0.0) as usize).min(n),
                    (None, None) => return Err(LabError::validation("l_b", "missing (or give `message_rate`)")),
                };
                if l_a + l_b > n {
                    return Err(LabError::validation("l_b", format!("l_a + l_b = {} exceeds n = {n}", l_a + l_b)));
                }
                let kind_a = self.ensemble_kind(self.ensemble.as_deref().unwrap_or("uniform-linear"), "ensemble")?;
                let kind_b = self.ensemble_kind(self.ensemble_b.as_deref().unwrap_or("uniform-linear"), "ensemble_b")?;
                let search = SearchConfig {
                    candidates: positive(need(&self.candidates, "candidates")?, "candidates")?,
                    trials: positive(need(&self.trials, "trials")?, "trials")?,
                    exact: self.exact.unwrap_or(false),
                    exact_cap: caps.exact,
                    seed,
                };
                Plan::Channel(ChannelPlan {
                    field,
                    channel,
                    input: self.input_choice()?,
                    n,
                    l_a,
                    l_b,
                    target_rates: (self.l_a.map_or(self.rate, |_| None), self.l_b.map_or(self.message_rate, |_| None)),
                    kind_a,
                    kind_b,
                    decoder: self.decoder()?,
                    search,
                })
            }
            ExperimentKind::Decision => Plan::Decision(DecisionPlan {
                problems: positive(need(&self.problems, "problems")?, "problems")?,
                max_size: positive(self.max_size.unwrap_or(4), "max_size")?,
            }),
            ExperimentKind::CrngTest => {
                let field = self.field()?;
                let (rows, n) = self.dims("rows")?;
                let q = field.order();
                let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; q]);
                if weights.len() != q || weights.iter().any(|w| !(*w >= 0.0)) || !weights.iter().any(|w| *w > 0.0) {
                    return Err(LabError::validation("weights", format!("need {q} nonnegative weights, not all zero")));
                }
                let sampler = match self.sampler.as_deref().unwrap_or("both") {
                    "exact" => SamplerChoice::Exact,
                    "mcmc" => SamplerChoice::Mcmc,
                    "both" => SamplerChoice::Both,
                    other => return Err(LabError::validation("sampler", format!("expected `exact`, `mcmc` or `both`, got `{other}`"))),
                };
                Plan::CrngTest(CrngPlan {
                    field,
                    rows,
                    n,
                    cosets: positive(self.cosets.unwrap_or(1), "cosets")?,
                    draws: positive(need(&self.draws, "draws")?, "draws")?,
                    sampler,
                    weights,
                    burn_in: self.burn_in,
                    thin: self.thin,
                })
            }
        };
        Ok(Resolved { kind, plan, seed, output: self.output.clone(), threads: self.threads.unwrap_or(1), caps })
    }
}

/// Rate conditions the construction relies on. Violations are warnings only.
pub fn validate(resolved: &Resolved) -> Result<Vec<Finding>> {
    let mut out = Vec::new();
    match &resolved.plan {
        Plan::Sw(p) => {
            let m = p.source.build()?.info_measures();
            for &r in &p.sweep.rates {
                if r < m.h_x_given_y {
                    out.push(Finding { message: format!("r < H(X|Y): r = {r}, H(X|Y) = {:.4}", m.h_x_given_y) });
                }
            }
        }
        Plan::Channel(p) => {
            let channel = p.channel.build()?;
            let input = p.input.resolve(&channel)?;
            let m = JointSource::from_channel(&channel, &input)?.info_measures();
            let bits = p.field.bits_per_symbol();
            let r = p.target_rates.0.unwrap_or(p.l_a as f64 * bits / p.n as f64);
            let big_r = p.target_rates.1.unwrap_or(p.l_b as f64 * bits / p.n as f64);
            if r < m.h_x_given_y {
                out.push(Finding { message: format!("r < H(X|Y): r = {r}, H(X|Y) = {:.4}", m.h_x_given_y) });
            }
            if r + big_r >= m.h_x {
                out.push(Finding { message: format!("r + R >= H(X): r + R = {}, H(X) = {:.4}", r + big_r, m.h_x) });
            }
        }
        _ => {}
    }
    Ok(out)
}
