//! Capacity of discrete memoryless channels.
//!
//! Blahut-Arimoto with the usual bracket: for an input law `p` with output
//! law `q = pW`, let `D(x) = sum_y W(y|x) log2(W(y|x) / q(y))`. Then
//! `I(p) = sum_x p(x) D(x) <= C <= max_x D(x)`, and the iteration stops once
//! the two bounds are within the tolerance.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp2, log2};
use rand::seq::SliceRandom;

use crate::source::{Channel, JointSource};
use crate::{seed, Error, Result};

/// Iteration limit for [`blahut_arimoto`].
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Largest input alphabet searched exhaustively by [`signaling_sweep`].
pub const EXHAUSTIVE_ALPHABET_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// `I(p)` of the returned input, a lower bound on the capacity.
    pub capacity: f64,
    /// `max_x D(x)`, an upper bound.
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    /// The allowed inputs, in increasing order.
    pub support: Vec<usize>,
}

impl CapacityResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.capacity
    }
}

/// Divergences `D(x)` for inputs in `support` and the mutual information.
fn divergences(channel: &Channel, input: &[f64], support: &[usize], d: &mut [f64]) -> f64 {
    let outputs = channel.outputs();
    let mut q = vec![0.0; outputs];
    for &x in support {
        for (qy, w) in q.iter_mut().zip(channel.row(x)) {
            *qy += input[x] * w;
        }
    }
    let mut info = 0.0;
    for (slot, &x) in d.iter_mut().zip(support) {
        *slot = channel
            .row(x)
            .iter()
            .zip(&q)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, qy)| w * log2(w / qy))
            .sum();
        info += input[x] * *slot;
    }
    info
}

fn check_support(channel: &Channel, support: Option<&[usize]>) -> Result<Vec<usize>> {
    let mut s: Vec<usize> = match support {
        Some(s) => s.to_vec(),
        None => (0..channel.inputs()).collect(),
    };
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidParameter("signaling support must be nonempty"));
    }
    if s.iter().any(|&x| x >= channel.inputs()) {
        return Err(Error::InvalidParameter("support names an input outside the alphabet"));
    }
    Ok(s)
}

/// Capacity restricted to inputs in `support` (all inputs when `None`).
pub fn blahut_arimoto(channel: &Channel, support: Option<&[usize]>, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let support = check_support(channel, support)?;
    let mut input = vec![0.0; channel.inputs()];
    for &x in &support {
        input[x] = 1.0 / support.len() as f64;
    }
    let mut d = vec![0.0; support.len()];
    for iterations in 0..MAX_ITERATIONS {
        let info = divergences(channel, &input, &support, &mut d);
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - info <= tol {
            return Ok(CapacityResult { capacity: info.max(0.0), upper, input, iterations, support });
        }
        let mut total = 0.0;
        for (&x, &dx) in support.iter().zip(&d) {
            // shift by the max to keep exp2 in range
            input[x] *= exp2(dx - upper);
            total += input[x];
        }
        for &x in &support {
            input[x] /= total;
        }
    }
    Err(Error::InvalidParameter("Blahut-Arimoto did not reach the tolerance"))
}

/// `I(X;Y)` from its definition and `H(X) - H(X|Y)` from entropies.
pub fn entropy_difference_check(channel: &Channel, input: &[f64]) -> Result<(f64, f64)> {
    let joint = JointSource::from_channel(channel, input)?;
    let support: Vec<usize> = (0..channel.inputs()).collect();
    let mut d = vec![0.0; support.len()];
    let info = divergences(channel, input, &support, &mut d);
    let m = joint.info_measures();
    Ok((info, m.h_x - m.h_x_given_y))
}

/// How [`signaling_sweep`] chooses candidate supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetSearch {
    /// Every subset of the given size; alphabets above 16 are rejected.
    Exhaustive,
    /// `count` random subsets per size, from the given seed.
    Sampled { count: usize, seed: u64 },
}

/// Capacity with at most `q` signaling inputs, for each `q` in `q_values`.
///
/// Results come in increasing `q`. A support found for a smaller `q` stays
/// admissible for larger ones, so the values are non-decreasing.
pub fn signaling_sweep(channel: &Channel, q_values: &[usize], tol: f64, search: SubsetSearch) -> Result<Vec<CapacityResult>> {
    let k = channel.inputs();
    if q_values.iter().any(|&q| q == 0 || q > k) {
        return Err(Error::InvalidParameter("signaling size must lie in 1..=inputs"));
    }
    if search == SubsetSearch::Exhaustive && k > EXHAUSTIVE_ALPHABET_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            what: "signaling subsets (use sampled subsets)",
            size: Some(1u64 << k.min(63)),
            cap: 1 << EXHAUSTIVE_ALPHABET_LIMIT,
        });
    }
    let mut sizes = q_values.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut out: Vec<CapacityResult> = Vec::with_capacity(sizes.len());
    for (i, &q) in sizes.iter().enumerate() {
        let subsets: Vec<Vec<usize>> = match search {
            SubsetSearch::Exhaustive => (0u32..1 << k).filter(|m| m.count_ones() as usize == q).map(|m| (0..k).filter(|b| m >> b & 1 == 1).collect()).collect(),
            SubsetSearch::Sampled { count, seed } => {
                let mut rng = seed::stream(seed, &[q as u64]);
                let all: Vec<usize> = (0..k).collect();
                (0..count.max(1)).map(|_| all.choose_multiple(&mut rng, q).copied().collect()).collect()
            }
        };
        let mut best: Option<CapacityResult> = if i > 0 { Some(out[i - 1].clone()) } else { None };
        for s in subsets {
            let r = blahut_arimoto(channel, Some(&s), tol)?;
            if best.as_ref().is_none_or(|b| r.capacity > b.capacity) {
                best = Some(r);
            }
        }
        out.push(best.expect("at least one subset"));
    }
    Ok(out)
}
