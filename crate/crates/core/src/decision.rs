//! Guessing a hidden state `U` from an observation `V`.
//!
//! Compares the MAP rule with the stochastic rule that samples a guess from
//! the posterior `p(u|v)`. The latter errs at most twice as often.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{seed, Error, Result};

/// A joint law `p(u, v)` on a finite product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    u_size: usize,
    v_size: usize,
    /// Row-major by `u`.
    joint: Vec<f64>,
    pv: Vec<f64>,
}

impl DecisionProblem {
    pub fn new(u_size: usize, v_size: usize, joint: Vec<f64>) -> Result<Self> {
        if u_size == 0 || v_size == 0 {
            return Err(Error::InvalidParameter("decision alphabets must be nonempty"));
        }
        if joint.len() != u_size * v_size {
            return Err(Error::DimensionMismatch { expected: u_size * v_size, found: joint.len() });
        }
        if joint.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidDistribution("joint probabilities must be nonnegative"));
        }
        if (joint.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution("joint probabilities must sum to 1"));
        }
        let pv = (0..v_size).map(|v| (0..u_size).map(|u| joint[u * v_size + v]).sum()).collect();
        Ok(Self { u_size, v_size, joint, pv })
    }

    /// `p(v)` and the rows `p(.|v)` as `posterior[v][u]`.
    pub fn from_posteriors(pv: &[f64], posterior: &[Vec<f64>]) -> Result<Self> {
        let u_size = posterior.first().map_or(0, Vec::len);
        if posterior.len() != pv.len() || posterior.iter().any(|r| r.len() != u_size) {
            return Err(Error::DimensionMismatch { expected: pv.len(), found: posterior.len() });
        }
        let mut joint = vec![0.0; u_size * pv.len()];
        for (v, row) in posterior.iter().enumerate() {
            for (u, p) in row.iter().enumerate() {
                joint[u * pv.len() + v] = pv[v] * p;
            }
        }
        Self::new(u_size, pv.len(), joint)
    }

    /// A random problem with `|U|, |V|` drawn from `1..=max_size`.
    pub fn random(max_size: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let u_size = rng.gen_range(1..=max_size);
        let v_size = rng.gen_range(1..=max_size);
        loop {
            // sparse entries make ties and point masses common
            let raw: Vec<f64> = (0..u_size * v_size).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() }).collect();
            let total: f64 = raw.iter().sum();
            if total > 0.0 {
                return Self::new(u_size, v_size, raw.into_iter().map(|p| p / total).collect()).expect("normalized");
            }
        }
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn joint(&self, u: usize, v: usize) -> f64 {
        self.joint[u * self.v_size + v]
    }

    pub fn pv(&self, v: usize) -> f64 {
        self.pv[v]
    }

    /// `p(u|v)`; uniform when `p(v) = 0`.
    pub fn posterior(&self, u: usize, v: usize) -> f64 {
        if self.pv[v] > 0.0 {
            self.joint(u, v) / self.pv[v]
        } else {
            1.0 / self.u_size as f64
        }
    }
}

/// A way of guessing `u` from `v`.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionRule {
    /// `guess[v]`.
    Deterministic(Vec<usize>),
    /// `q(u|v)` as `probs[v][u]`.
    Stochastic(Vec<Vec<f64>>),
}

impl DecisionRule {
    pub fn stochastic(probs: Vec<Vec<f64>>) -> Result<Self> {
        for row in &probs {
            if row.iter().any(|p| !(*p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution("stochastic rule rows must be probability vectors"));
            }
        }
        Ok(DecisionRule::Stochastic(probs))
    }

    /// `q(u|v)`.
    pub fn prob(&self, u: usize, v: usize) -> f64 {
        match self {
            DecisionRule::Deterministic(f) => (f[v] == u) as u8 as f64,
            DecisionRule::Stochastic(q) => q[v][u],
        }
    }

    fn check(&self, prob: &DecisionProblem) -> Result<()> {
        let ok = match self {
            DecisionRule::Deterministic(f) => f.len() == prob.v_size && f.iter().all(|&u| u < prob.u_size),
            DecisionRule::Stochastic(q) => q.len() == prob.v_size && q.iter().all(|r| r.len() == prob.u_size),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: prob.v_size, found: self.len() })
        }
    }

    fn len(&self) -> usize {
        match self {
            DecisionRule::Deterministic(f) => f.len(),
            DecisionRule::Stochastic(q) => q.len(),
        }
    }
}

/// `sum_v p(v) sum_u p(u|v) (1 - q(u|v))`.
pub fn rule_error(prob: &DecisionProblem, rule: &DecisionRule) -> Result<f64> {
    rule.check(prob)?;
    let mut err = 0.0;
    for v in 0..prob.v_size {
        for u in 0..prob.u_size {
            err += prob.joint(u, v) * (1.0 - rule.prob(u, v));
        }
    }
    Ok(err)
}

/// `argmax_u p(u|v)`, ties to the smallest `u`.
pub fn map_rule(prob: &DecisionProblem) -> DecisionRule {
    let guess = (0..prob.v_size)
        .map(|v| {
            (0..prob.u_size).fold(0, |best, u| if prob.joint(u, v) > prob.joint(best, v) { u } else { best })
        })
        .collect();
    DecisionRule::Deterministic(guess)
}

/// Sample the guess from `p(u|v)`.
pub fn posterior_rule(prob: &DecisionProblem) -> DecisionRule {
    DecisionRule::Stochastic((0..prob.v_size).map(|v| (0..prob.u_size).map(|u| prob.posterior(u, v)).collect()).collect())
}

/// `sum_v p(v) (1 - sum_u p(u|v)^2)`, the posterior rule's error in closed form.
pub fn posterior_error_closed_form(prob: &DecisionProblem) -> f64 {
    (0..prob.v_size)
        .map(|v| prob.pv(v) * (1.0 - (0..prob.u_size).map(|u| prob.posterior(u, v) * prob.posterior(u, v)).sum::<f64>()))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor2Report {
    pub err_map: f64,
    pub err_posterior: f64,
    /// `err_posterior / err_map`; 1 when both are 0.
    pub ratio: f64,
    pub holds: bool,
}

/// Exact check of `Error(posterior) <= 2 Error(MAP)`.
pub fn verify_factor2(prob: &DecisionProblem) -> Factor2Report {
    let err_map = rule_error(prob, &map_rule(prob)).expect("rule built from the problem");
    let err_posterior = rule_error(prob, &posterior_rule(prob)).expect("rule built from the problem");
    let ratio = if err_map > 0.0 {
        err_posterior / err_map
    } else if err_posterior <= 1e-15 {
        1.0
    } else {
        f64::INFINITY
    };
    let holds = err_posterior <= 2.0 * err_map + 1e-12;
    Factor2Report { err_map, err_posterior, ratio, holds }
}
