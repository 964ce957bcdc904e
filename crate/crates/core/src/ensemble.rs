//! Ensembles of linear maps and their hash parameters.
//!
//! An ensemble is a probability distribution over `l x n` matrices. Its
//! quality is summarized by a pair `(alpha, beta)` bounding how often two
//! distinct inputs collide:
//!
//! ```text
//! sum over x' != x with P(Ax = Ax') > alpha/|Im A| of P(Ax = Ax')  <=  beta     for every x
//! ```
//!
//! The same inequality underlies both the balanced-coloring and the
//! collision-resistance properties; [`PropertyKind`] only records which role
//! the ensemble plays. For linear maps `P(Ax = Ax') = P(A(x - x') = 0)`, so
//! everything is driven by the [`CollisionTable`] of kernel-membership
//! probabilities, and the parameters follow from the expected number of
//! kernel vectors of each type (the type spectrum).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use libm::{pow, sqrt};
use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::gf::{index_of, FieldSpec, GfVector, LinearMap, Residue};
use crate::{checked_pow, seed, Error, Result, DEFAULT_ENUMERATION_CAP};

/// Rejection-sampling attempts before an expurgated draw gives up.
pub const EXPURGATION_BUDGET: u32 = 10_000;

/// Relative slack for the strict `p > alpha / |Im|` comparison.
const THRESHOLD_SLACK: f64 = 1e-12;

/// The family a map is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    /// Uniform over all `l x n` matrices.
    UniformLinear,
    /// `[I_l | P]` where each row of `P` has `row_weight` nonzero entries at
    /// uniformly chosen positions with uniform nonzero values.
    SystematicSparse { row_weight: usize },
    /// `inner` conditioned on every nonzero kernel vector having weight `> gamma * n`.
    Expurgated { inner: Box<EnsembleKind>, gamma: f64 },
}

impl EnsembleKind {
    pub fn expurgated(inner: EnsembleKind, gamma: f64) -> Self {
        EnsembleKind::Expurgated { inner: Box::new(inner), gamma }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EnsembleKind::UniformLinear => "uniform-linear",
            EnsembleKind::SystematicSparse { .. } => "systematic-sparse",
            EnsembleKind::Expurgated { .. } => "expurgated",
        }
    }
}

/// An ensemble of `rows x cols` maps over `field`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, field: FieldSpec, rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one column"));
        }
        if rows > cols {
            return Err(Error::InvalidParameter("ensemble needs rows <= cols"));
        }
        check_kind(&kind)?;
        Ok(Self { kind, field, rows, cols })
    }

    pub fn uniform(field: FieldSpec, rows: usize, cols: usize) -> Result<Self> {
        Self::new(EnsembleKind::UniformLinear, field, rows, cols)
    }

    fn with_kind(&self, kind: EnsembleKind) -> Self {
        Self { kind, ..self.clone() }
    }

    /// Number of (equally likely, before expurgation) members; `None` on overflow.
    pub fn size(&self) -> Option<u64> {
        base_size(&self.kind, self.field, self.rows, self.cols)
    }

    /// Draws one map.
    pub fn sample(&self, seed: u64) -> Result<LinearMap> {
        let mut rng = seed::rng(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LinearMap> {
        sample_kind(&self.kind, self.field, self.rows, self.cols, rng)
    }
}

fn check_kind(kind: &EnsembleKind) -> Result<()> {
    match kind {
        EnsembleKind::UniformLinear => Ok(()),
        EnsembleKind::SystematicSparse { .. } => Ok(()),
        EnsembleKind::Expurgated { inner, gamma } => {
            if !(*gamma > 0.0 && *gamma < 1.0) {
                return Err(Error::InvalidParameter("expurgation gamma must lie in (0, 1)"));
            }
            check_kind(inner)
        }
    }
}

fn base_size(kind: &EnsembleKind, field: FieldSpec, rows: usize, cols: usize) -> Option<u64> {
    let q = field.order() as u64;
    match kind {
        EnsembleKind::UniformLinear => checked_pow(q, rows * cols),
        EnsembleKind::SystematicSparse { row_weight } => {
            let free = cols - rows;
            let w = (*row_weight).min(free);
            let per_row = binomial(free as u64, w as u64)?.checked_mul(checked_pow(q - 1, w)?)?;
            checked_pow(per_row, rows)
        }
        EnsembleKind::Expurgated { inner, .. } => base_size(inner, field, rows, cols),
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn sample_kind<R: Rng + ?Sized>(kind: &EnsembleKind, field: FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Result<LinearMap> {
    match kind {
        EnsembleKind::UniformLinear => Ok(LinearMap::random(field, rows, cols, rng)),
        EnsembleKind::SystematicSparse { row_weight } => {
            let free = cols - rows;
            let w = (*row_weight).min(free);
            let mut entries = vec![0; rows * cols];
            for i in 0..rows {
                entries[i * cols + i] = 1;
                for j in sample_indices(rng, free, w).into_iter() {
                    entries[i * cols + rows + j] = field.random_nonzero(rng);
                }
            }
            Ok(LinearMap::new(field, rows, cols, entries).expect("valid residues"))
        }
        EnsembleKind::Expurgated { inner, gamma } => {
            for _ in 0..EXPURGATION_BUDGET {
                let a = sample_kind(inner, field, rows, cols, rng)?;
                if kernel_clears(&a, *gamma, DEFAULT_ENUMERATION_CAP)? {
                    return Ok(a);
                }
            }
            Err(Error::ExpurgationInfeasible { gamma: *gamma, attempts: EXPURGATION_BUDGET })
        }
    }
}

/// `weight > gamma * n`.
#[inline]
pub fn exceeds_weight_threshold(weight: usize, gamma: f64, n: usize) -> bool {
    weight as f64 > gamma * n as f64
}

/// Smallest weight of a nonzero kernel vector; `None` when the kernel is trivial.
pub fn kernel_min_weight(a: &LinearMap, cap: u64) -> Result<Option<usize>> {
    let kernel = a.solve_affine(&GfVector::zeros(a.field(), a.rows()))?;
    let mut best: Option<usize> = None;
    kernel.for_each(cap, |x| {
        let w = x.iter().filter(|&&v| v != 0).count();
        if w > 0 {
            best = Some(best.map_or(w, |b| b.min(w)));
        }
    })?;
    Ok(best)
}

/// True when every nonzero kernel vector of `a` has weight `> gamma * n`.
pub fn kernel_clears(a: &LinearMap, gamma: f64, cap: u64) -> Result<bool> {
    Ok(kernel_min_weight(a, cap)?.is_none_or(|w| exceeds_weight_threshold(w, gamma, a.cols())))
}

/// Visits every member with its probability. Returns the number visited.
pub fn for_each_member(spec: &EnsembleSpec, cap: u64, mut visit: impl FnMut(&LinearMap, f64)) -> Result<u64> {
    visit_members(spec, cap, &mut visit)
}

fn visit_members(spec: &EnsembleSpec, cap: u64, visit: &mut dyn FnMut(&LinearMap, f64)) -> Result<u64> {
    let size = spec.size();
    match size {
        Some(s) if s <= cap => {}
        _ => return Err(Error::TooLargeToEnumerate { what: "ensemble (use sampled estimates)", size, cap }),
    }
    match &spec.kind {
        EnsembleKind::Expurgated { inner, gamma } => {
            let inner_spec = spec.with_kind((**inner).clone());
            let mut survivors = 0.0;
            visit_members(&inner_spec, cap, &mut |a, p| {
                if kernel_clears(a, *gamma, DEFAULT_ENUMERATION_CAP).unwrap_or(false) {
                    survivors += p;
                }
            })?;
            if !(survivors > 0.0) {
                return Err(Error::ExpurgationInfeasible { gamma: *gamma, attempts: 0 });
            }
            let mut visited = 0;
            visit_members(&inner_spec, cap, &mut |a, p| {
                if kernel_clears(a, *gamma, DEFAULT_ENUMERATION_CAP).unwrap_or(false) {
                    visited += 1;
                    visit(a, p / survivors);
                }
            })?;
            Ok(visited)
        }
        kind => {
            let total = base_size(kind, spec.field, spec.rows, spec.cols).expect("checked above");
            let p = 1.0 / total as f64;
            for index in 0..total {
                visit(&base_member(kind, spec, index), p);
            }
            Ok(total)
        }
    }
}

/// Member `index` of a non-expurgated kind, in a fixed enumeration order.
fn base_member(kind: &EnsembleKind, spec: &EnsembleSpec, index: u64) -> LinearMap {
    let (field, rows, cols) = (spec.field, spec.rows, spec.cols);
    match kind {
        EnsembleKind::UniformLinear => LinearMap::from_index(field, rows, cols, index),
        EnsembleKind::SystematicSparse { row_weight } => {
            let free = cols - rows;
            let w = (*row_weight).min(free);
            let q = field.order() as u64;
            let per_row = binomial(free as u64, w as u64).unwrap() * (q - 1).pow(w as u32);
            let mut entries = vec![0; rows * cols];
            let mut rest = index;
            for i in 0..rows {
                let mut choice = rest % per_row;
                rest /= per_row;
                entries[i * cols + i] = 1;
                let combos = binomial(free as u64, w as u64).unwrap();
                let positions = nth_combination(free, w, choice % combos);
                choice /= combos;
                for j in positions {
                    entries[i * cols + rows + j] = (choice % (q - 1)) as Residue + 1;
                    choice /= q - 1;
                }
            }
            LinearMap::new(field, rows, cols, entries).expect("valid residues")
        }
        EnsembleKind::Expurgated { .. } => unreachable!("expurgated members are filtered from the inner kind"),
    }
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn nth_combination(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for remaining in (1..=k).rev() {
        for c in start..n {
            let count = binomial((n - c - 1) as u64, (remaining - 1) as u64).unwrap_or(0);
            if rank < count {
                out.push(c);
                start = c + 1;
                break;
            }
            rank -= count;
        }
    }
    out
}

/// `P(A d = 0)` for every `d` in `GF(q)^n`, indexed by [`GfVector::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTable {
    field: FieldSpec,
    n: usize,
    probs: Vec<f64>,
}

impl CollisionTable {
    pub fn prob(&self, d: &[Residue]) -> f64 {
        self.probs[index_of(self.field, d) as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

fn space_size(field: FieldSpec, n: usize, cap: u64) -> Result<u64> {
    match checked_pow(field.order() as u64, n) {
        Some(s) if s <= cap => Ok(s),
        size => Err(Error::TooLargeToEnumerate { what: "input space", size, cap }),
    }
}

/// Exact collision probabilities of the ensemble.
pub fn collision_table(spec: &EnsembleSpec, cap: u64) -> Result<CollisionTable> {
    let (field, n) = (spec.field, spec.cols);
    let total = space_size(field, n, cap)?;
    let probs = if spec.kind == EnsembleKind::UniformLinear {
        let p = pow(field.order() as f64, -(spec.rows as f64));
        let mut v = vec![p; total as usize];
        v[0] = 1.0;
        v
    } else {
        let mut v = vec![0.0; total as usize];
        let points: Vec<GfVector> = (0..total).map(|i| GfVector::from_index(field, n, i)).collect();
        for_each_member(spec, cap, |a, p| {
            for (slot, d) in v.iter_mut().zip(&points) {
                if a.apply(d.entries()).iter().all(|&c| c == 0) {
                    *slot += p;
                }
            }
        })?;
        v
    };
    Ok(CollisionTable { field, n, probs })
}

/// The type of a vector: how many entries take each field value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn of(field: FieldSpec, x: &[Residue]) -> Self {
        let mut counts = vec![0; field.order()];
        for &v in x {
            counts[v as usize] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of nonzero symbols.
    pub fn weight(&self) -> usize {
        self.n() - self.counts[0]
    }

    pub fn is_zero_type(&self) -> bool {
        self.weight() == 0
    }

    /// `|C_t|`, the number of vectors of this type (multinomial coefficient).
    pub fn class_size(&self) -> f64 {
        let mut acc = 1.0;
        let mut placed = 0usize;
        for &c in &self.counts {
            for i in 1..=c {
                placed += 1;
                acc = acc * placed as f64 / i as f64;
            }
        }
        acc
    }

    /// In the high-weight set: weight `> gamma * n`.
    pub fn is_heavy(&self, gamma: f64) -> bool {
        exceeds_weight_threshold(self.weight(), gamma, self.n())
    }
}

/// All types of length `n` over `field`, excluding `t(0)`.
pub fn nonzero_types(field: FieldSpec, n: usize) -> Vec<TypeVector> {
    fn rec(q: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if prefix.len() == q - 1 {
            prefix.push(left);
            out.push(TypeVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(q, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(field.order(), n, &mut Vec::new(), &mut out);
    out.retain(|t| !t.is_zero_type());
    out
}

/// `S(p, t)`: expected number of kernel vectors of type `t`, for every nonzero type.
pub fn type_spectrum(spec: &EnsembleSpec, cap: u64) -> Result<BTreeMap<TypeVector, f64>> {
    if spec.kind == EnsembleKind::UniformLinear {
        return Ok(uniform_spectrum(spec.field, spec.rows, spec.cols));
    }
    let table = collision_table(spec, cap)?;
    let mut out: BTreeMap<TypeVector, f64> = nonzero_types(spec.field, spec.cols).into_iter().map(|t| (t, 0.0)).collect();
    for (i, &p) in table.probs.iter().enumerate().skip(1) {
        let x = GfVector::from_index(spec.field, spec.cols, i as u64);
        *out.get_mut(&TypeVector::of(spec.field, x.entries())).expect("every nonzero type listed") += p;
    }
    Ok(out)
}

/// Closed form for the uniform ensemble: `S(t) = |C_t| q^(-l)`.
pub fn uniform_spectrum(field: FieldSpec, rows: usize, cols: usize) -> BTreeMap<TypeVector, f64> {
    let scale = pow(field.order() as f64, -(rows as f64));
    nonzero_types(field, cols).into_iter().map(|t| {
        let s = t.class_size() * scale;
        (t, s)
    }).collect()
}

/// Whether the parameters certify balanced coloring or collision resistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    BalancedColoring,
    CollisionResistance,
}

impl PropertyKind {
    pub fn label(self) -> &'static str {
        match self {
            PropertyKind::BalancedColoring => "balanced-coloring",
            PropertyKind::CollisionResistance => "collision-resistance",
        }
    }
}

/// A certified `(alpha, beta)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashParams {
    pub alpha: f64,
    pub beta: f64,
    pub kind: PropertyKind,
}

impl HashParams {
    /// The `(1, 0)` pair of two-universal families.
    pub fn universal(kind: PropertyKind) -> Self {
        Self { alpha: 1.0, beta: 0.0, kind }
    }
}

/// `|Im A|` over the whole ensemble: the union of member images.
pub fn image_size(spec: &EnsembleSpec, cap: u64) -> Result<u64> {
    let q = spec.field.order() as u64;
    let full = checked_pow(q, spec.rows).ok_or(Error::TooLargeToEnumerate { what: "image space", size: None, cap })?;
    match &spec.kind {
        // both contain a rank-l member
        EnsembleKind::UniformLinear | EnsembleKind::SystematicSparse { .. } => Ok(full),
        EnsembleKind::Expurgated { .. } => {
            if full > cap {
                return Err(Error::TooLargeToEnumerate { what: "image space", size: Some(full), cap });
            }
            let mut covered = vec![false; full as usize];
            let mut count = 0u64;
            for_each_member(spec, cap, |a, _| {
                if count == full || a.rank() == 0 {
                    return;
                }
                a.image()
                    .for_each(cap, |m| {
                        let i = index_of(spec.field, m) as usize;
                        if !covered[i] {
                            covered[i] = true;
                            count += 1;
                        }
                    })
                    .expect("image fits under the cap");
            })?;
            // the zero vector is always in the image
            Ok(count.max(1))
        }
    }
}

/// Evaluates the linear-ensemble parameter formulas on the ensemble's own
/// type spectrum, with the high-weight set `{t : weight(t) > gamma n}`:
///
/// * `alpha = |Im A| / q^l * max over heavy t of S(p, t) / S(uniform, t)`
/// * `beta  = sum over light nonzero t of S(p, t)`
///
/// `alpha` is 0 when no type is heavy.
pub fn spectrum_params(spec: &EnsembleSpec, gamma: f64, cap: u64) -> Result<HashParams> {
    let q = spec.field.order() as f64;
    let (l, n) = (spec.rows, spec.cols);
    if spec.kind == EnsembleKind::UniformLinear {
        let beta: f64 = (1..=n)
            .filter(|&w| !exceeds_weight_threshold(w, gamma, n))
            .map(|w| binomial(n as u64, w as u64).map_or(f64::INFINITY, |b| b as f64) * pow(q - 1.0, w as f64))
            .sum::<f64>()
            * pow(q, -(l as f64));
        let any_heavy = (1..=n).any(|w| exceeds_weight_threshold(w, gamma, n));
        let alpha = if any_heavy { 1.0 } else { 0.0 };
        return Ok(HashParams { alpha, beta, kind: PropertyKind::CollisionResistance });
    }
    let spectrum = type_spectrum(spec, cap)?;
    let reference = uniform_spectrum(spec.field, l, n);
    let image = image_size(spec, cap)? as f64;
    let mut ratio = 0.0f64;
    let mut beta = 0.0;
    for (t, &s) in &spectrum {
        if t.is_heavy(gamma) {
            ratio = ratio.max(s / reference[t]);
        } else {
            beta += s;
        }
    }
    Ok(HashParams { alpha: image / pow(q, l as f64) * ratio, beta, kind: PropertyKind::CollisionResistance })
}

/// Hash parameters of an ensemble.
///
/// For uniform and sparse kinds this is [`spectrum_params`] with the given
/// `gamma`. For an expurgated kind the parameters of the inner ensemble are
/// computed with the expurgation's own `gamma` (the `gamma` argument is
/// ignored) and mapped to `(alpha / (1 - beta), 0)`; that map requires
/// `beta < 1`.
pub fn alpha_beta(spec: &EnsembleSpec, gamma: f64, cap: u64) -> Result<HashParams> {
    match &spec.kind {
        EnsembleKind::Expurgated { inner, gamma: g } => {
            let inner_params = alpha_beta(&spec.with_kind((**inner).clone()), *g, cap)?;
            if !(inner_params.beta < 1.0) {
                return Err(Error::ExpurgationInvalid { gamma: *g, beta: inner_params.beta });
            }
            Ok(HashParams {
                alpha: inner_params.alpha / (1.0 - inner_params.beta),
                beta: 0.0,
                kind: PropertyKind::CollisionResistance,
            })
        }
        _ => spectrum_params(spec, gamma, cap),
    }
}

/// Both sides of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12
    }
}

/// An input for which the collision sum exceeds `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: GfVector,
    pub sum: f64,
}

/// Outcome of an exhaustive certification.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub kind: &'static str,
    pub q: u16,
    pub rows: usize,
    pub cols: usize,
    pub gamma: f64,
    pub params: HashParams,
    /// Number of inputs `x` checked.
    pub checked: u64,
    pub violations: Vec<Witness>,
    pub coloring_checks: Vec<BoundCheck>,
    pub collision_checks: Vec<BoundCheck>,
}

impl CertificationReport {
    /// Total number of failed checks of any kind.
    pub fn violation_count(&self) -> usize {
        self.violations.len()
            + self.coloring_checks.iter().filter(|c| !c.holds()).count()
            + self.collision_checks.iter().filter(|c| !c.holds()).count()
    }

    pub fn passed(&self) -> bool {
        self.violation_count() == 0
    }
}

/// Checks the collision inequality for every input `x`.
///
/// `gamma` is recorded in the report only. With an exact collision table the
/// per-`x` sum is evaluated over all `x' != x` directly when `q^(2n)` fits in
/// `cap * 256`; beyond that the translation invariance of linear ensembles
/// (`P(Ax = Ax')` depends only on `x - x'`) is used to evaluate it once.
pub fn certify_hash_property(spec: &EnsembleSpec, params: HashParams, gamma: f64, cap: u64) -> Result<CertificationReport> {
    let table = collision_table(spec, cap)?;
    let image = image_size(spec, cap)? as f64;
    let threshold = params.alpha / image;
    let counts = |p: f64| p > threshold * (1.0 + THRESHOLD_SLACK) + f64::MIN_POSITIVE;
    let field = spec.field;
    let n = spec.cols;
    let total = table.probs.len() as u64;
    let mut violations = Vec::new();
    let slack = 1e-12 * (1.0 + params.beta.abs());
    if total.checked_mul(total).is_some_and(|t| t <= cap.saturating_mul(256)) {
        let points: Vec<GfVector> = (0..total).map(|i| GfVector::from_index(field, n, i)).collect();
        for x in &points {
            let mut sum = 0.0;
            for xp in &points {
                if xp == x {
                    continue;
                }
                let d = x.sub(xp)?;
                let p = table.prob(d.entries());
                if counts(p) {
                    sum += p;
                }
            }
            if sum > params.beta + slack {
                violations.push(Witness { x: x.clone(), sum });
            }
        }
    } else {
        let sum: f64 = table.probs.iter().skip(1).copied().filter(|&p| counts(p)).sum();
        if sum > params.beta + slack {
            violations.push(Witness { x: GfVector::zeros(field, n), sum });
        }
    }
    Ok(CertificationReport {
        kind: spec.kind.label(),
        q: field.modulus(),
        rows: spec.rows,
        cols: spec.cols,
        gamma,
        params,
        checked: total,
        violations,
        coloring_checks: Vec::new(),
        collision_checks: Vec::new(),
    })
}

/// Exact expectation of the balanced-coloring deviation and its bound.
///
/// `lhs = E_B sum over m in Im B of | Q(T n C_B(m)) / Q(T) - 1/|Im B| |` and
/// `rhs = sqrt(alpha - 1 + (beta + 1) |Im B| max_{u in T} Q(u) / Q(T))`.
/// `measure` is indexed like [`GfVector::index`]; `set` marks `T`.
pub fn balanced_coloring_bound(spec: &EnsembleSpec, params: HashParams, measure: &[f64], set: &[bool], cap: u64) -> Result<BoundCheck> {
    let total = space_size(spec.field, spec.cols, cap)?;
    if measure.len() as u64 != total || set.len() as u64 != total {
        return Err(Error::DimensionMismatch { expected: total as usize, found: measure.len().min(set.len()) });
    }
    if measure.iter().any(|q| !(*q >= 0.0)) {
        return Err(Error::InvalidDistribution("measure must be nonnegative"));
    }
    let members_in_t: Vec<(GfVector, f64)> = (0..total)
        .filter(|&i| set[i as usize])
        .map(|i| (GfVector::from_index(spec.field, spec.cols, i), measure[i as usize]))
        .collect();
    let q_t: f64 = members_in_t.iter().map(|(_, q)| q).sum();
    if !(q_t > 0.0) {
        return Err(Error::InvalidParameter("Q(T) must be positive"));
    }
    let max_q = members_in_t.iter().map(|(_, q)| *q).fold(0.0, f64::max);
    let image = image_size(spec, cap)?;
    let image_f = image as f64;
    let bins = space_size(spec.field, spec.rows, cap)? as usize;
    let in_image = image_membership(spec, cap)?;
    let mut lhs = 0.0;
    let mut hist = vec![0.0; bins];
    for_each_member(spec, cap, |b, p| {
        hist.iter_mut().for_each(|h| *h = 0.0);
        for (x, qx) in &members_in_t {
            hist[index_of(spec.field, &b.apply(x.entries())) as usize] += qx;
        }
        let dev: f64 = hist
            .iter()
            .zip(&in_image)
            .filter(|(_, &inside)| inside)
            .map(|(h, _)| (h / q_t - 1.0 / image_f).abs())
            .sum();
        lhs += p * dev;
    })?;
    let rhs = sqrt(params.alpha - 1.0 + (params.beta + 1.0) * image_f * max_q / q_t);
    Ok(BoundCheck { lhs, rhs })
}

fn image_membership(spec: &EnsembleSpec, cap: u64) -> Result<Vec<bool>> {
    let bins = space_size(spec.field, spec.rows, cap)? as usize;
    let mut inside = vec![false; bins];
    if image_size(spec, cap)? as usize == bins {
        inside.iter_mut().for_each(|v| *v = true);
        return Ok(inside);
    }
    for_each_member(spec, cap, |a, _| {
        a.image()
            .for_each(cap, |m| inside[index_of(spec.field, m) as usize] = true)
            .expect("image fits under the cap");
    })?;
    Ok(inside)
}

/// Exact probability that some element of `set` other than `u` shares the
/// syndrome of `u`, against the bound `|G| alpha / |Im A| + beta`.
pub fn collision_bound(spec: &EnsembleSpec, params: HashParams, set: &[GfVector], u: &GfVector, cap: u64) -> Result<BoundCheck> {
    let others: Vec<&GfVector> = set.iter().filter(|g| *g != u).collect();
    for g in &others {
        if g.len() != spec.cols || g.field() != spec.field {
            return Err(Error::DimensionMismatch { expected: spec.cols, found: g.len() });
        }
    }
    let mut lhs = 0.0;
    for_each_member(spec, cap, |a, p| {
        let au = a.apply(u.entries());
        if others.iter().any(|g| a.apply(g.entries()) == au) {
            lhs += p;
        }
    })?;
    let image = image_size(spec, cap)? as f64;
    let rhs = set.len() as f64 * params.alpha / image + params.beta;
    Ok(BoundCheck { lhs, rhs })
}

/// A random nonnegative measure on `GF(q)^n` and a random nonempty set with positive measure.
pub fn random_coloring_instance(field: FieldSpec, n: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let total = field.order().pow(n as u32);
    let mut rng = seed::rng(seed);
    loop {
        // a few exact zeros exercise the max/ratio edge cases
        let measure: Vec<f64> = (0..total).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen::<f64>() }).collect();
        let density = rng.gen_range(0.2..1.0);
        let set: Vec<bool> = (0..total).map(|_| rng.gen_bool(density)).collect();
        if measure.iter().zip(&set).any(|(q, &s)| s && *q > 0.0) {
            return (measure, set);
        }
    }
}

/// A random set `G` and point `u` in `GF(q)^n`; `u` belongs to `G` half of the time.
pub fn random_collision_instance(field: FieldSpec, n: usize, seed: u64) -> (Vec<GfVector>, GfVector) {
    let mut rng = seed::rng(seed);
    let total = field.order().pow(n as u32);
    let size = rng.gen_range(1..=total);
    let mut set: Vec<GfVector> = sample_indices(&mut rng, total, size)
        .into_iter()
        .map(|i| GfVector::from_index(field, n, i as u64))
        .collect();
    set.sort();
    let u = if rng.gen_bool(0.5) {
        set[rng.gen_range(0..set.len())].clone()
    } else {
        GfVector::random(field, n, &mut rng)
    };
    (set, u)
}
