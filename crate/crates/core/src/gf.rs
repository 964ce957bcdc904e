//! Prime-field arithmetic and linear algebra over GF(q).
//!
//! Vectors and matrices store residues as `u16` (q is at most 257). Every
//! [`LinearMap`] is reduced to row-echelon form once, at construction, and
//! keeps the reduction around: rank, pivots, the row transform and a
//! null-space basis. Solving `Ax = c` for a new right-hand side is then a
//! single `l x l` matrix-vector product. Binary maps additionally keep their
//! rows bit-packed and are eliminated with word-wide XORs.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng;

use crate::{checked_pow, Error, Result};

pub type Residue = u16;

/// The prime field GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    q: u16,
}

impl FieldSpec {
    pub const MAX_MODULUS: u16 = 257;

    pub fn new(q: u16) -> Result<Self> {
        if !(2..=Self::MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { q })
    }

    pub const fn binary() -> Self {
        Self { q: 2 }
    }

    #[inline]
    pub fn modulus(self) -> u16 {
        self.q
    }

    #[inline]
    pub fn order(self) -> usize {
        self.q as usize
    }

    #[inline]
    pub fn is_binary(self) -> bool {
        self.q == 2
    }

    /// `log2 q`, the number of bits carried by one symbol.
    pub fn bits_per_symbol(self) -> f64 {
        libm::log2(self.q as f64)
    }

    #[inline]
    pub fn add(self, a: Residue, b: Residue) -> Residue {
        let s = a as u32 + b as u32;
        let q = self.q as u32;
        (if s >= q { s - q } else { s }) as Residue
    }

    #[inline]
    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(self, a: Residue) -> Residue {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: Residue, b: Residue) -> Residue {
        ((a as u32 * b as u32) % self.q as u32) as Residue
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: Residue) -> Option<Residue> {
        if a.is_multiple_of(self.q) {
            return None;
        }
        // Fermat: a^(q-2)
        let q = self.q as u32;
        let mut base = a as u32 % q;
        let mut exp = q - 2;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            exp >>= 1;
        }
        Some(acc as Residue)
    }

    #[inline]
    pub fn reduce(self, v: u64) -> Residue {
        (v % self.q as u64) as Residue
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Residue {
        rng.gen_range(0..self.q)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> Residue {
        rng.gen_range(1..self.q)
    }

    fn check(self, value: Residue) -> Result<()> {
        if value < self.q {
            Ok(())
        } else {
            Err(Error::InvalidResidue { value, modulus: self.q })
        }
    }

    fn same(self, other: FieldSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch { left: self.q, right: other.q })
        }
    }
}

fn is_prime(q: u16) -> bool {
    q >= 2 && (2..q).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// A vector over GF(q).
///
/// Zero-length vectors are allowed: they are the syndromes of maps with no rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GfVector {
    field: FieldSpec,
    entries: Vec<Residue>,
}

impl fmt::Debug for GfVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.field.q)?;
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

impl GfVector {
    pub fn new(field: FieldSpec, entries: Vec<Residue>) -> Result<Self> {
        for &e in &entries {
            field.check(e)?;
        }
        Ok(Self { field, entries })
    }

    pub(crate) fn from_raw(field: FieldSpec, entries: Vec<Residue>) -> Self {
        debug_assert!(entries.iter().all(|&e| e < field.q));
        Self { field, entries }
    }

    pub fn zeros(field: FieldSpec, len: usize) -> Self {
        Self { field, entries: vec![0; len] }
    }

    /// The vector whose base-q digits (most significant first) spell `index`.
    ///
    /// Index order coincides with lexicographic order on entries.
    pub fn from_index(field: FieldSpec, len: usize, mut index: u64) -> Self {
        let q = field.q as u64;
        let mut entries = vec![0; len];
        for slot in entries.iter_mut().rev() {
            *slot = (index % q) as Residue;
            index /= q;
        }
        Self { field, entries }
    }

    pub fn random<R: Rng + ?Sized>(field: FieldSpec, len: usize, rng: &mut R) -> Self {
        Self { field, entries: (0..len).map(|_| field.random(rng)).collect() }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Residue] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Residue> {
        self.entries
    }

    /// Inverse of [`GfVector::from_index`]; wraps for vectors with more than 64 bits of content.
    pub fn index(&self) -> u64 {
        index_of(self.field, &self.entries)
    }

    /// Number of nonzero entries.
    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &GfVector) -> Result<GfVector> {
        self.check_compatible(other)?;
        let f = self.field;
        Ok(Self::from_raw(f, self.entries.iter().zip(&other.entries).map(|(&a, &b)| f.add(a, b)).collect()))
    }

    pub fn sub(&self, other: &GfVector) -> Result<GfVector> {
        self.check_compatible(other)?;
        let f = self.field;
        Ok(Self::from_raw(f, self.entries.iter().zip(&other.entries).map(|(&a, &b)| f.sub(a, b)).collect()))
    }

    pub fn scale(&self, s: Residue) -> GfVector {
        let f = self.field;
        Self::from_raw(f, self.entries.iter().map(|&a| f.mul(a, s % f.q)).collect())
    }

    fn check_compatible(&self, other: &GfVector) -> Result<()> {
        self.field.same(other.field)?;
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(())
    }
}

impl PartialOrd for GfVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on entries (first entry most significant).
impl Ord for GfVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries.cmp(&other.entries).then(self.field.q.cmp(&other.field.q))
    }
}

pub(crate) fn index_of(field: FieldSpec, entries: &[Residue]) -> u64 {
    let q = field.q as u64;
    entries.iter().fold(0u64, |acc, &e| acc.wrapping_mul(q).wrapping_add(e as u64))
}

/// Row-reduced form of a map, computed once per [`LinearMap`].
#[derive(Debug, Clone, PartialEq, Eq)]
struct Echelon {
    rank: usize,
    pivots: Vec<usize>,
    /// `rank` rows of the reduced row-echelon form, each of length `cols`.
    reduced: Vec<Vec<Residue>>,
    /// `rows x rows` invertible `T` with `T A = [reduced; 0]`.
    transform: Vec<Vec<Residue>>,
}

/// An `l x n` matrix over GF(q), viewed as the map `x -> Ax`.
#[derive(Clone)]
pub struct LinearMap {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Residue>,
    /// Bit-packed rows for GF(2): `words` u64 per row.
    packed: Option<Vec<u64>>,
    echelon: Echelon,
    null_basis: Vec<GfVector>,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LinearMap GF({}) {}x{} rank {}", self.field.q, self.rows, self.cols, self.rank())?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl Eq for LinearMap {}

impl LinearMap {
    /// Builds a map from row-major residues.
    pub fn new(field: FieldSpec, rows: usize, cols: usize, entries: Vec<Residue>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParameter("a linear map needs at least one column"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        for &e in &entries {
            field.check(e)?;
        }
        Ok(Self::from_raw(field, rows, cols, entries))
    }

    pub(crate) fn from_raw(field: FieldSpec, rows: usize, cols: usize, entries: Vec<Residue>) -> Self {
        let (packed, echelon) = if field.is_binary() {
            let packed = pack_rows(rows, cols, &entries);
            let echelon = eliminate_binary(rows, cols, &entries);
            (Some(packed), echelon)
        } else {
            (None, eliminate_generic(field, rows, cols, &entries))
        };
        let null_basis = null_basis(field, cols, &echelon);
        Self { field, rows, cols, entries, packed, echelon, null_basis }
    }

    pub fn from_rows(field: FieldSpec, rows: &[&[Residue]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Self::new(field, rows.len(), cols, entries)
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self::from_raw(field, n, n, entries)
    }

    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Self::from_raw(field, rows, cols, vec![0; rows * cols])
    }

    /// Uniformly random `rows x cols` matrix.
    pub fn random<R: Rng + ?Sized>(field: FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| field.random(rng)).collect();
        Self::from_raw(field, rows, cols, entries)
    }

    /// Matrix number `index` in the base-q enumeration of all `rows x cols` matrices.
    pub(crate) fn from_index(field: FieldSpec, rows: usize, cols: usize, index: u64) -> Self {
        let v = GfVector::from_index(field, rows * cols, index);
        Self::from_raw(field, rows, cols, v.entries)
    }

    /// Vertical concatenation; all maps must share field and column count.
    pub fn stack(maps: &[&LinearMap]) -> Result<Self> {
        let first = maps.first().ok_or(Error::InvalidParameter("stack needs at least one map"))?;
        let mut entries = Vec::new();
        let mut rows = 0;
        for m in maps {
            first.field.same(m.field)?;
            if m.cols != first.cols {
                return Err(Error::DimensionMismatch { expected: first.cols, found: m.cols });
            }
            entries.extend_from_slice(&m.entries);
            rows += m.rows;
        }
        Ok(Self::from_raw(first.field, rows, first.cols, entries))
    }

    /// The map with its rows reordered: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: perm.len() });
        }
        let mut seen = vec![false; self.rows];
        let mut entries = Vec::with_capacity(self.entries.len());
        for &p in perm {
            if p >= self.rows || seen[p] {
                return Err(Error::InvalidParameter("row permutation is not a bijection"));
            }
            seen[p] = true;
            entries.extend_from_slice(self.row(p));
        }
        Ok(Self::from_raw(self.field, self.rows, self.cols, entries))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Residue] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Residue] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> Residue {
        self.entries[i * self.cols + j]
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank
    }

    /// Pivot columns of the reduced row-echelon form.
    pub fn pivots(&self) -> &[usize] {
        &self.echelon.pivots
    }

    /// `log_q |Im A|`, i.e. the rank.
    pub fn image_dimension(&self) -> usize {
        self.rank()
    }

    /// `(1/n) log2 |Im A|` in bits per symbol.
    pub fn rate(&self) -> f64 {
        self.rank() as f64 * self.field.bits_per_symbol() / self.cols as f64
    }

    /// Basis of `ker A`, one vector per free column.
    pub fn null_basis(&self) -> &[GfVector] {
        &self.null_basis
    }

    /// Basis of `Im A`: the columns of `A` at the pivot positions.
    pub fn image_basis(&self) -> Vec<GfVector> {
        self.echelon
            .pivots
            .iter()
            .map(|&j| GfVector::from_raw(self.field, (0..self.rows).map(|i| self.get(i, j)).collect()))
            .collect()
    }

    /// `Im A` as an affine set through the origin, for enumeration.
    pub fn image(&self) -> AffineSolution {
        AffineSolution {
            field: self.field,
            dim: self.rows,
            particular: Some(GfVector::zeros(self.field, self.rows)),
            basis: self.image_basis(),
        }
    }

    /// `Ax`.
    pub fn matvec(&self, x: &GfVector) -> Result<GfVector> {
        self.field.same(x.field)?;
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok(GfVector::from_raw(self.field, self.apply(&x.entries)))
    }

    /// `Ax` on raw residues of length `cols`.
    pub fn apply(&self, x: &[Residue]) -> Vec<Residue> {
        debug_assert_eq!(x.len(), self.cols);
        match &self.packed {
            Some(packed) => {
                let words = words_for(self.cols);
                let xb = pack_slice(x);
                (0..self.rows)
                    .map(|i| {
                        let row = &packed[i * words..(i + 1) * words];
                        let ones: u32 = row.iter().zip(&xb).map(|(a, b)| (a & b).count_ones()).sum();
                        (ones & 1) as Residue
                    })
                    .collect()
            }
            None => {
                let q = self.field.q as u64;
                (0..self.rows)
                    .map(|i| {
                        let acc = self.row(i).iter().zip(x).fold(0u64, |acc, (&a, &b)| acc + a as u64 * b as u64);
                        (acc % q) as Residue
                    })
                    .collect()
            }
        }
    }

    /// True when `Ax = c`.
    pub fn satisfies(&self, x: &[Residue], c: &[Residue]) -> bool {
        self.apply(x) == c
    }

    /// The solution set of `Ax = c`.
    pub fn solve_affine(&self, c: &GfVector) -> Result<AffineSolution> {
        self.field.same(c.field)?;
        if c.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: c.len() });
        }
        let f = self.field;
        let t: Vec<Residue> = self
            .echelon
            .transform
            .iter()
            .map(|trow| trow.iter().zip(&c.entries).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect();
        let rank = self.echelon.rank;
        let particular = if t[rank..].iter().any(|&v| v != 0) {
            None
        } else {
            let mut x = vec![0; self.cols];
            for (k, &p) in self.echelon.pivots.iter().enumerate() {
                x[p] = t[k];
            }
            Some(GfVector::from_raw(f, x))
        };
        Ok(AffineSolution { field: f, dim: self.cols, particular, basis: self.null_basis.clone() })
    }

    /// True when `c` lies in `Im A`.
    pub fn contains_in_image(&self, c: &GfVector) -> Result<bool> {
        Ok(!self.solve_affine(c)?.is_empty())
    }
}

/// An affine subspace `particular + span(basis)`, or the empty set.
///
/// Produced by [`LinearMap::solve_affine`] (the coset `{x : Ax = c}`) and by
/// [`LinearMap::image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    field: FieldSpec,
    dim: usize,
    particular: Option<GfVector>,
    basis: Vec<GfVector>,
}

impl AffineSolution {
    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Length of the member vectors.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn particular(&self) -> Option<&GfVector> {
        self.particular.as_ref()
    }

    pub fn basis(&self) -> &[GfVector] {
        &self.basis
    }

    /// Number of members, `q^dim` (0 when empty); `None` on overflow.
    pub fn size(&self) -> Option<u64> {
        if self.is_empty() {
            Some(0)
        } else {
            checked_pow(self.field.q as u64, self.basis.len())
        }
    }

    fn check_cap(&self, cap: u64) -> Result<()> {
        match self.size() {
            Some(s) if s <= cap => Ok(()),
            size => Err(Error::TooLargeToEnumerate { what: "coset", size, cap }),
        }
    }

    /// Iterator over all members, each exactly once.
    pub fn enumerate(&self, cap: u64) -> Result<CosetIter<'_>> {
        self.check_cap(cap)?;
        Ok(CosetIter { walker: self.particular.as_ref().map(|p| CosetWalker::new(self, p)), first: true })
    }

    /// Calls `visit` on every member without allocating per member.
    pub fn for_each(&self, cap: u64, mut visit: impl FnMut(&[Residue])) -> Result<()> {
        self.check_cap(cap)?;
        if let Some(p) = &self.particular {
            let mut w = CosetWalker::new(self, p);
            visit(&w.current);
            while w.advance() {
                visit(&w.current);
            }
        }
        Ok(())
    }

    /// Member with coefficient vector `coeffs` on the basis.
    pub fn member(&self, coeffs: &[Residue]) -> Option<GfVector> {
        let p = self.particular.as_ref()?;
        let f = self.field;
        let mut x = p.entries.clone();
        for (b, &c) in self.basis.iter().zip(coeffs) {
            if c != 0 {
                for (xi, &bi) in x.iter_mut().zip(&b.entries) {
                    *xi = f.add(*xi, f.mul(bi, c));
                }
            }
        }
        Some(GfVector::from_raw(f, x))
    }

    /// A uniformly random member.
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<GfVector> {
        let coeffs: Vec<Residue> = (0..self.basis.len()).map(|_| self.field.random(rng)).collect();
        self.member(&coeffs)
    }
}

/// Odometer over basis coefficients. Every digit increment adds one basis
/// vector to the current member, including the wrap `q-1 -> 0` (since
/// `q * b = 0`), so each step costs one vector addition per changed digit.
struct CosetWalker<'a> {
    sol: &'a AffineSolution,
    coeffs: Vec<Residue>,
    current: Vec<Residue>,
}

impl<'a> CosetWalker<'a> {
    fn new(sol: &'a AffineSolution, particular: &GfVector) -> Self {
        Self { sol, coeffs: vec![0; sol.basis.len()], current: particular.entries.clone() }
    }

    fn advance(&mut self) -> bool {
        let f = self.sol.field;
        let q = f.q;
        for (digit, b) in self.coeffs.iter_mut().zip(&self.sol.basis) {
            for (xi, &bi) in self.current.iter_mut().zip(&b.entries) {
                *xi = f.add(*xi, bi);
            }
            *digit += 1;
            if *digit < q {
                return true;
            }
            *digit = 0;
        }
        false
    }
}

/// Iterator returned by [`AffineSolution::enumerate`].
pub struct CosetIter<'a> {
    walker: Option<CosetWalker<'a>>,
    first: bool,
}

impl Iterator for CosetIter<'_> {
    type Item = GfVector;

    fn next(&mut self) -> Option<GfVector> {
        let w = self.walker.as_mut()?;
        if self.first {
            self.first = false;
        } else if !w.advance() {
            self.walker = None;
            return None;
        }
        Some(GfVector::from_raw(w.sol.field, w.current.clone()))
    }
}

fn null_basis(field: FieldSpec, cols: usize, ech: &Echelon) -> Vec<GfVector> {
    let mut is_pivot = vec![false; cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&j| !is_pivot[j])
        .map(|free| {
            let mut v = vec![0; cols];
            v[free] = 1;
            for (k, &p) in ech.pivots.iter().enumerate() {
                v[p] = field.neg(ech.reduced[k][free]);
            }
            GfVector::from_raw(field, v)
        })
        .collect()
}

/// Gauss-Jordan on `[A | I]` over GF(q).
fn eliminate_generic(field: FieldSpec, rows: usize, cols: usize, entries: &[Residue]) -> Echelon {
    let width = cols + rows;
    let mut m: Vec<Vec<Residue>> = (0..rows)
        .map(|i| {
            let mut r = vec![0; width];
            r[..cols].copy_from_slice(&entries[i * cols..(i + 1) * cols]);
            r[cols + i] = 1;
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows {
            break;
        }
        let Some(p) = (next..rows).find(|&i| m[i][col] != 0) else { continue };
        m.swap(next, p);
        let inv = field.inv(m[next][col]).expect("nonzero pivot");
        for v in m[next].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot_row = m[next].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != next && row[col] != 0 {
                let factor = row[col];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = field.sub(*v, field.mul(factor, pv));
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    split_echelon(m, cols, pivots)
}

fn split_echelon(m: Vec<Vec<Residue>>, cols: usize, pivots: Vec<usize>) -> Echelon {
    let rank = pivots.len();
    let reduced = m[..rank].iter().map(|r| r[..cols].to_vec()).collect();
    let transform = m.iter().map(|r| r[cols..].to_vec()).collect();
    Echelon { rank, pivots, reduced, transform }
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn pack_slice(bits: &[Residue]) -> Vec<u64> {
    let mut out = vec![0u64; words_for(bits.len())];
    for (j, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[j / 64] |= 1 << (j % 64);
        }
    }
    out
}

fn pack_rows(rows: usize, cols: usize, entries: &[Residue]) -> Vec<u64> {
    (0..rows).flat_map(|i| pack_slice(&entries[i * cols..(i + 1) * cols])).collect()
}

/// Gauss-Jordan on `[A | I]` over GF(2) with packed rows.
fn eliminate_binary(rows: usize, cols: usize, entries: &[Residue]) -> Echelon {
    let width = cols + rows;
    let words = words_for(width);
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|i| {
            let mut r = vec![0u64; words];
            for j in 0..cols {
                if entries[i * cols + j] == 1 {
                    r[j / 64] |= 1 << (j % 64);
                }
            }
            let k = cols + i;
            r[k / 64] |= 1 << (k % 64);
            r
        })
        .collect();
    let bit = |r: &[u64], j: usize| (r[j / 64] >> (j % 64)) & 1 == 1;
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows {
            break;
        }
        let Some(p) = (next..rows).find(|&i| bit(&m[i], col)) else { continue };
        m.swap(next, p);
        let pivot_row = m[next].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != next && bit(row, col) {
                for (w, pw) in row.iter_mut().zip(&pivot_row) {
                    *w ^= pw;
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    let unpacked: Vec<Vec<Residue>> = m.iter().map(|r| (0..width).map(|j| bit(r, j) as Residue).collect()).collect();
    split_echelon(unpacked, cols, pivots)
}
