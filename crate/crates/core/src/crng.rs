//! Constrained random number generation.
//!
//! Samples `x` from a product measure `w_1(x_1) ... w_n(x_n)` conditioned on
//! a set of linear constraints `A_k x = c_k`. The exact sampler enumerates the
//! coset and draws by inverse CDF; the MCMC sampler runs a Metropolis walk
//! whose moves add a random multiple of a null-space basis vector, so every
//! state it visits satisfies the constraints.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::log;
use rand::Rng;

use crate::gf::{AffineSolution, FieldSpec, GfVector, LinearMap, Residue};
use crate::seed;
use crate::source::Categorical;
use crate::{Error, Result, DEFAULT_ENUMERATION_CAP};

/// Per-position symbol weights of a product measure on `GF(q)^n`.
///
/// Weights need not be normalized; only ratios matter for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterWeights {
    q: usize,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl LetterWeights {
    /// The same single-letter weights at every one of `n` positions.
    pub fn iid(letter: &[f64], n: usize) -> Result<Self> {
        Self::from_rows(letter.len(), (0..n).flat_map(|_| letter.iter().copied()).collect())
    }

    /// Row-major `n x q` weights.
    pub fn from_rows(q: usize, weights: Vec<f64>) -> Result<Self> {
        if q == 0 || !weights.len().is_multiple_of(q) {
            return Err(Error::DimensionMismatch { expected: q, found: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution("letter weights must be finite and nonnegative"));
        }
        let log_weights = weights.iter().map(|&w| log(w)).collect();
        Ok(Self { q, weights, log_weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn weight(&self, position: usize, symbol: Residue) -> f64 {
        self.weights[position * self.q + symbol as usize]
    }

    #[inline]
    pub fn log_weight(&self, position: usize, symbol: Residue) -> f64 {
        self.log_weights[position * self.q + symbol as usize]
    }

    pub fn word_weight(&self, x: &[Residue]) -> f64 {
        x.iter().enumerate().map(|(i, &s)| self.weight(i, s)).product()
    }

    pub fn word_log_weight(&self, x: &[Residue]) -> f64 {
        x.iter().enumerate().map(|(i, &s)| self.log_weight(i, s)).sum()
    }
}

/// A conjunction of linear constraints `A_k x = c_k` on `GF(q)^n`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    constraints: Vec<(LinearMap, GfVector)>,
    stacked: LinearMap,
    solution: AffineSolution,
}

impl ConstraintSet {
    /// All maps must share the field and the column count `n`.
    ///
    /// An empty list leaves `x` unconstrained; it needs `field` and `n` to know the space.
    pub fn new(field: FieldSpec, n: usize, constraints: Vec<(LinearMap, GfVector)>) -> Result<Self> {
        let mut rows: Vec<&LinearMap> = Vec::with_capacity(constraints.len());
        let mut rhs = Vec::new();
        for (map, c) in &constraints {
            if map.field() != field || c.field() != field {
                return Err(Error::FieldMismatch { left: field.modulus(), right: map.field().modulus() });
            }
            if map.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: map.cols() });
            }
            if c.len() != map.rows() {
                return Err(Error::DimensionMismatch { expected: map.rows(), found: c.len() });
            }
            rows.push(map);
            rhs.extend_from_slice(c.entries());
        }
        let stacked = if rows.is_empty() { LinearMap::zero(field, 0, n) } else { LinearMap::stack(&rows)? };
        let solution = stacked.solve_affine(&GfVector::from_raw(field, rhs))?;
        Ok(Self { constraints, stacked, solution })
    }

    pub fn single(map: &LinearMap, rhs: &GfVector) -> Result<Self> {
        Self::new(map.field(), map.cols(), alloc::vec![(map.clone(), rhs.clone())])
    }

    pub fn constraints(&self) -> &[(LinearMap, GfVector)] {
        &self.constraints
    }

    pub fn stacked(&self) -> &LinearMap {
        &self.stacked
    }

    pub fn solution(&self) -> &AffineSolution {
        &self.solution
    }

    pub fn field(&self) -> FieldSpec {
        self.stacked.field()
    }

    pub fn n(&self) -> usize {
        self.stacked.cols()
    }

    /// Decided by the rank test, never by sampling.
    pub fn is_empty(&self) -> bool {
        self.solution.is_empty()
    }

    pub fn is_satisfied_by(&self, x: &[Residue]) -> bool {
        self.constraints.iter().all(|(a, c)| a.satisfies(x, c.entries()))
    }
}

/// How [`ConstrainedDistribution::draw`] produces samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    /// Enumerate the coset and sample by inverse CDF.
    Exact,
    /// Metropolis walk. A sweep is one proposal per null-space basis vector.
    /// `burn_in` sweeps precede the first sample; `thin` sweeps separate
    /// consecutive samples of [`ConstrainedDistribution::draw_many`].
    Mcmc { burn_in: usize, thin: usize },
}

impl SamplerMode {
    /// Burn-in of `50 n` sweeps, thinning of `n` sweeps.
    pub fn default_mcmc(n: usize) -> Self {
        SamplerMode::Mcmc { burn_in: 50 * n, thin: n.max(1) }
    }
}

#[derive(Debug, Clone)]
struct ExactTable {
    members: Vec<Vec<Residue>>,
    sampler: Categorical,
}

/// The product measure restricted to a coset and renormalized.
#[derive(Debug, Clone)]
pub struct ConstrainedDistribution {
    weights: LetterWeights,
    constraints: ConstraintSet,
    mode: SamplerMode,
    cap: u64,
    table: Option<ExactTable>,
    /// Nonzero positions of each basis vector, for incremental MCMC updates.
    supports: Vec<Vec<(usize, Residue)>>,
}

impl ConstrainedDistribution {
    pub fn new(weights: LetterWeights, constraints: ConstraintSet, mode: SamplerMode) -> Result<Self> {
        Self::with_cap(weights, constraints, mode, DEFAULT_ENUMERATION_CAP)
    }

    /// In exact mode the coset is enumerated here, so the cap applies immediately.
    pub fn with_cap(weights: LetterWeights, constraints: ConstraintSet, mode: SamplerMode, cap: u64) -> Result<Self> {
        if weights.len() != constraints.n() {
            return Err(Error::DimensionMismatch { expected: constraints.n(), found: weights.len() });
        }
        if weights.alphabet() != constraints.field().order() {
            return Err(Error::DimensionMismatch { expected: constraints.field().order(), found: weights.alphabet() });
        }
        let table = match mode {
            SamplerMode::Exact => Some(Self::tabulate(&weights, &constraints, cap)?),
            SamplerMode::Mcmc { .. } => None,
        };
        let supports = constraints
            .solution()
            .basis()
            .iter()
            .map(|b| b.entries().iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (i, v)).collect())
            .collect();
        Ok(Self { weights, constraints, mode, cap, table, supports })
    }

    fn tabulate(weights: &LetterWeights, constraints: &ConstraintSet, cap: u64) -> Result<ExactTable> {
        let mut members = Vec::new();
        let mut masses = Vec::new();
        constraints.solution().for_each(cap, |x| {
            members.push(x.to_vec());
            masses.push(weights.word_weight(x));
        })?;
        Ok(ExactTable { members, sampler: Categorical::new(masses) })
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn weights(&self) -> &LetterWeights {
        &self.weights
    }

    /// Total weight of the coset; 0 when the constraints are inconsistent.
    ///
    /// Fails with a cap error when the coset cannot be enumerated; use the
    /// MCMC sampler for such cosets.
    pub fn mass(&self) -> Result<f64> {
        if self.constraints.is_empty() {
            return Ok(0.0);
        }
        match &self.table {
            Some(t) => Ok(t.sampler.total()),
            None => Ok(Self::tabulate(&self.weights, &self.constraints, self.cap)?.sampler.total()),
        }
    }

    /// Coset members with their normalized probabilities (empty when the mass is 0).
    pub fn exact_distribution(&self) -> Result<Vec<(GfVector, f64)>> {
        let owned;
        let table = match &self.table {
            Some(t) => t,
            None => {
                owned = Self::tabulate(&self.weights, &self.constraints, self.cap)?;
                &owned
            }
        };
        let total = table.sampler.total();
        if !(total > 0.0) {
            return Ok(Vec::new());
        }
        let f = self.constraints.field();
        Ok(table
            .members
            .iter()
            .map(|x| (GfVector::from_raw(f, x.clone()), self.weights.word_weight(x) / total))
            .collect())
    }

    /// Draws one sample; `None` is the encoder-error outcome (empty or null coset).
    pub fn draw(&self, seed: u64) -> Option<GfVector> {
        let mut rng = seed::rng(seed);
        self.draw_with(&mut rng)
    }

    pub fn draw_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<GfVector> {
        if self.constraints.is_empty() {
            return None;
        }
        let f = self.constraints.field();
        match (&self.table, self.mode) {
            (Some(t), _) => {
                if !(t.sampler.total() > 0.0) {
                    return None;
                }
                Some(GfVector::from_raw(f, t.members[t.sampler.sample(rng)].clone()))
            }
            (None, SamplerMode::Mcmc { burn_in, .. }) => {
                let mut chain = self.start_chain();
                self.run_sweeps(&mut chain, burn_in, rng);
                chain.finish(f)
            }
            (None, SamplerMode::Exact) => unreachable!("exact mode always tabulates"),
        }
    }

    /// `count` samples. In MCMC mode they come from one chain, thinned.
    pub fn draw_many(&self, count: usize, seed: u64) -> Vec<Option<GfVector>> {
        let mut rng = seed::rng(seed);
        match (self.mode, self.constraints.is_empty()) {
            (SamplerMode::Mcmc { burn_in, thin }, false) => {
                let f = self.constraints.field();
                let mut chain = self.start_chain();
                self.run_sweeps(&mut chain, burn_in, &mut rng);
                (0..count)
                    .map(|k| {
                        if k > 0 {
                            self.run_sweeps(&mut chain, thin, &mut rng);
                        }
                        chain.clone().finish(f)
                    })
                    .collect()
            }
            _ => (0..count).map(|_| self.draw_with(&mut rng)).collect(),
        }
    }

    fn start_chain(&self) -> Chain {
        let x = self.constraints.solution().particular().expect("nonempty coset").entries().to_vec();
        let log_weight = self.weights.word_log_weight(&x);
        Chain { x, log_weight }
    }

    fn run_sweeps<R: Rng + ?Sized>(&self, chain: &mut Chain, sweeps: usize, rng: &mut R) {
        let k = self.supports.len();
        if k == 0 {
            return;
        }
        let f = self.constraints.field();
        for _ in 0..sweeps * k {
            let j = rng.gen_range(0..k);
            // s = 0 is a lazy step; it keeps the walk aperiodic
            let s = f.random(rng);
            if s == 0 {
                continue;
            }
            let mut delta = 0.0;
            for &(i, b) in &self.supports[j] {
                let old = chain.x[i];
                let new = f.add(old, f.mul(b, s));
                delta += self.weights.log_weight(i, new) - self.weights.log_weight(i, old);
            }
            let accept = if chain.log_weight == f64::NEG_INFINITY {
                true
            } else if delta.is_nan() || delta == f64::NEG_INFINITY {
                false
            } else {
                delta >= 0.0 || log(rng.gen::<f64>()) < delta
            };
            if accept {
                for &(i, b) in &self.supports[j] {
                    chain.x[i] = f.add(chain.x[i], f.mul(b, s));
                }
                chain.log_weight = self.weights.word_log_weight(&chain.x);
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Chain {
    x: Vec<Residue>,
    log_weight: f64,
}

impl Chain {
    fn finish(self, field: FieldSpec) -> Option<GfVector> {
        if self.log_weight == f64::NEG_INFINITY {
            None
        } else {
            Some(GfVector::from_raw(field, self.x))
        }
    }
}

/// Total-variation distance between `draws` independent samples and the
/// exact conditional law. Draw `i` uses the seed derived from `(seed, i)`.
pub fn tv_distance_check(dist: &ConstrainedDistribution, draws: u64, seed: u64) -> Result<f64> {
    if draws == 0 {
        return Err(Error::InvalidParameter("at least one draw is required"));
    }
    let exact = dist.exact_distribution()?;
    let index: BTreeMap<&[Residue], usize> = exact.iter().enumerate().map(|(i, (x, _))| (x.entries(), i)).collect();
    let mut counts = alloc::vec![0u64; exact.len()];
    let mut misses = 0u64;
    for i in 0..draws {
        match dist.draw(seed::derive(seed, &[i])) {
            Some(x) => match index.get(x.entries()) {
                Some(&k) => counts[k] += 1,
                None => misses += 1,
            },
            None => misses += 1,
        }
    }
    let n = draws as f64;
    let tv = exact.iter().zip(&counts).map(|((_, p), &c)| (c as f64 / n - p).abs()).sum::<f64>() + misses as f64 / n;
    Ok(0.5 * tv)
}
