//! Runs a resolved experiment and collects its CSV rows.

use sidecode_core::capacity::{blahut_arimoto, signaling_sweep, CapacityResult};
use sidecode_core::channel_code::search_message_maps;
use sidecode_core::crng::{tv_distance_check, ConstrainedDistribution, ConstraintSet, LetterWeights, SamplerMode};
use sidecode_core::decision::{verify_factor2, DecisionProblem};
use sidecode_core::ensemble::{
    alpha_beta, balanced_coloring_bound, certify_hash_property, collision_bound, random_coloring_instance,
    random_collision_instance, spectrum_params, EnsembleKind, EnsembleSpec,
};
use sidecode_core::gf::{GfVector, LinearMap};
use sidecode_core::seed;
use sidecode_core::source::JointSource;
use sidecode_core::stats::ErrorEstimate;
use sidecode_core::sw::{rate_sweep, SwCodec};
use sidecode_core::Error;

use crate::config::{CapacityPlan, ChannelPlan, CrngPlan, DecisionPlan, HashPlan, Plan, Resolved, SamplerChoice, SwPlan};
use crate::formats::Table;
use crate::parallel::Runner;
use crate::Result;

/// Runs the experiment with `runner` and returns its result table.
pub fn run(resolved: &Resolved, runner: &Runner) -> Result<Table> {
    let seed = resolved.seed;
    match &resolved.plan {
        Plan::Capacity(p) => capacity(p, seed),
        Plan::HashVerify(p) => hash_verify(p, resolved, runner),
        Plan::Sw(p) => sw(p, seed, runner),
        Plan::Channel(p) => channel(p, resolved, runner),
        Plan::Decision(p) => decision(p, seed, runner),
        Plan::CrngTest(p) => crng_test(p, resolved, runner),
    }
}

fn estimate_cells(e: &ErrorEstimate) -> [String; 4] {
    [
        e.mode_label().to_string(),
        e.value.to_string(),
        e.std_err().to_string(),
        e.trials().map_or_else(String::new, |t| t.to_string()),
    ]
}

fn capacity(p: &CapacityPlan, seed: u64) -> Result<Table> {
    let channel = p.channel.build()?;
    let results: Vec<CapacityResult> = if p.q_values.is_empty() {
        vec![blahut_arimoto(&channel, None, p.tol)?]
    } else {
        signaling_sweep(&channel, &p.q_values, p.tol, p.search)?
    };
    let mut t = Table::new(vec!["channel", "params", "support", "capacity", "upper", "iterations", "tol", "seed"]);
    for r in results {
        let support: Vec<String> = r.support.iter().map(usize::to_string).collect();
        t.push(vec![
            p.channel.label().into(),
            p.channel.params(),
            support.join(";"),
            r.capacity.to_string(),
            r.upper.to_string(),
            r.iterations.to_string(),
            p.tol.to_string(),
            seed.to_string(),
        ]);
    }
    Ok(t)
}

fn hash_verify(p: &HashPlan, resolved: &Resolved, runner: &Runner) -> Result<Table> {
    let cap = resolved.caps.ensemble;
    let spec = EnsembleSpec::new(p.kind.clone(), p.field, p.rows, p.n)?;
    // the expurgation map needs inner beta < 1; fall back to the direct
    // formulas on the expurgated spectrum otherwise
    let (params, method) = match alpha_beta(&spec, p.weight_gamma, cap) {
        Ok(params) if matches!(p.kind, EnsembleKind::Expurgated { .. }) => (params, "expurgation"),
        Ok(params) => (params, "spectrum"),
        Err(Error::ExpurgationInvalid { .. }) => (spectrum_params(&spec, p.weight_gamma, cap)?, "spectrum"),
        Err(e) => return Err(e.into()),
    };
    let mut report = certify_hash_property(&spec, params, p.weight_gamma, cap)?;
    if p.pairs > 0 {
        let cap = resolved.caps.enumeration;
        let space = (p.field.order() as u64).checked_pow(p.n as u32);
        if space.is_none_or(|s| s > cap) {
            return Err(Error::TooLargeToEnumerate { what: "input space", size: space, cap }.into());
        }
        let cap = resolved.caps.ensemble;
        let checks = runner.map(p.pairs, |i| -> sidecode_core::Result<_> {
            let (measure, set) = random_coloring_instance(p.field, p.n, seed::derive(resolved.seed, &[0, i as u64]));
            let coloring = balanced_coloring_bound(&spec, params, &measure, &set, cap)?;
            let (g, u) = random_collision_instance(p.field, p.n, seed::derive(resolved.seed, &[1, i as u64]));
            let collision = collision_bound(&spec, params, &g, &u, cap)?;
            Ok((coloring, collision))
        });
        for c in checks {
            let (coloring, collision) = c?;
            report.coloring_checks.push(coloring);
            report.collision_checks.push(collision);
        }
    }
    let mut t = Table::new(vec![
        "kind", "q", "l", "n", "gamma", "alpha", "beta", "violations", "checked", "method", "pairs", "seed",
    ]);
    t.push(vec![
        report.kind.into(),
        report.q.to_string(),
        report.rows.to_string(),
        report.cols.to_string(),
        report.gamma.to_string(),
        params.alpha.to_string(),
        params.beta.to_string(),
        report.violation_count().to_string(),
        report.checked.to_string(),
        method.into(),
        p.pairs.to_string(),
        resolved.seed.to_string(),
    ]);
    Ok(t)
}

fn sw(p: &SwPlan, seed: u64, runner: &Runner) -> Result<Table> {
    let source = p.source.build()?;
    let mut cfg = p.sweep.clone();
    cfg.seed = seed;
    let rows = rate_sweep(&source, &p.kind, p.field, &cfg, runner)?;
    let mut t = Table::new(vec![
        "source", "p", "n", "l", "rate", "target_rate", "decoder", "stat", "mode", "error", "std_err", "trials", "seed",
    ]);
    for r in rows {
        let [mode, error, std_err, trials] = estimate_cells(&r.estimate);
        t.push(vec![
            p.source.label().into(),
            p.source.p(),
            r.n.to_string(),
            r.l.to_string(),
            r.rate.to_string(),
            r.target_rate.to_string(),
            r.decoder.label().into(),
            r.stat.label().into(),
            mode,
            error,
            std_err,
            trials,
            r.seed.to_string(),
        ]);
    }
    Ok(t)
}

fn channel(p: &ChannelPlan, resolved: &Resolved, runner: &Runner) -> Result<Table> {
    let channel = p.channel.build()?;
    let input = p.input.resolve(&channel)?;
    let source = JointSource::from_channel(&channel, &input)?;
    let spec_a = EnsembleSpec::new(p.kind_a.clone(), p.field, p.l_a, p.n)?;
    let spec_b = EnsembleSpec::new(p.kind_b.clone(), p.field, p.l_b, p.n)?;
    let a = spec_a.sample(seed::derive(resolved.seed, &[4]))?;
    let sw = SwCodec::with_caps(a, source, p.decoder, resolved.caps.enumeration, resolved.caps.exact)?;
    let mut search = p.search;
    search.seed = resolved.seed;
    let result = search_message_maps(&sw, &spec_b, &channel, &search, runner)?;
    let delta = result.delta_hat();
    let mut t = Table::new(vec![
        "channel", "p", "n", "lA", "lB", "r", "R", "stat", "candidate", "mode", "error", "std_err", "trials",
        "baseline_error", "delta_hat", "seed",
    ]);
    let common = |stat: &str, candidate: String, e: &ErrorEstimate, rate_b: f64| {
        let [mode, error, std_err, trials] = estimate_cells(e);
        vec![
            p.channel.label().into(),
            p.channel.p(),
            p.n.to_string(),
            p.l_a.to_string(),
            p.l_b.to_string(),
            sw.rate().to_string(),
            rate_b.to_string(),
            stat.into(),
            candidate,
            mode,
            error,
            std_err,
            trials,
            result.baseline.value.to_string(),
            delta.to_string(),
            resolved.seed.to_string(),
        ]
    };
    for c in &result.candidates {
        t.push(common("candidate", c.index.to_string(), &c.estimate, c.codec.rate()));
    }
    let best = result.best();
    t.push(common("best", best.index.to_string(), &best.estimate, best.codec.rate()));
    let median = ErrorEstimate { value: result.median(), ..best.estimate };
    let nominal = p.l_b as f64 * p.field.bits_per_symbol() / p.n as f64;
    t.push(common("median", String::new(), &median, nominal));
    Ok(t)
}

fn decision(p: &DecisionPlan, seed: u64, runner: &Runner) -> Result<Table> {
    let rows = runner.map(p.problems as usize, |i| {
        let s = seed::derive(seed, &[i as u64]);
        let prob = DecisionProblem::random(p.max_size, s);
        (s, prob.u_size(), prob.v_size(), verify_factor2(&prob))
    });
    let mut t = Table::new(vec!["seed", "|U|", "|V|", "err_map", "err_posterior", "ratio", "holds", "problem_seed"]);
    for (s, u, v, r) in rows {
        t.push(vec![
            seed.to_string(),
            u.to_string(),
            v.to_string(),
            r.err_map.to_string(),
            r.err_posterior.to_string(),
            r.ratio.to_string(),
            r.holds.to_string(),
            s.to_string(),
        ]);
    }
    Ok(t)
}

fn crng_test(p: &CrngPlan, resolved: &Resolved, runner: &Runner) -> Result<Table> {
    let cap = resolved.caps.enumeration;
    let q = p.field.order();
    let total: f64 = p.weights.iter().sum();
    let letter: Vec<f64> = p.weights.iter().map(|w| w / total).collect();
    let weights = LetterWeights::iid(&letter, p.n)?;
    let a = LinearMap::random(p.field, p.rows, p.n, &mut seed::stream(resolved.seed, &[0]));
    let mut modes = Vec::new();
    if matches!(p.sampler, SamplerChoice::Exact | SamplerChoice::Both) {
        modes.push(("exact", SamplerMode::Exact));
    }
    if matches!(p.sampler, SamplerChoice::Mcmc | SamplerChoice::Both) {
        let SamplerMode::Mcmc { burn_in, thin } = SamplerMode::default_mcmc(p.n) else { unreachable!() };
        modes.push(("mcmc", SamplerMode::Mcmc { burn_in: p.burn_in.unwrap_or(burn_in), thin: p.thin.unwrap_or(thin) }));
    }
    let mut jobs = Vec::new();
    for k in 0..p.cosets {
        // a syndrome of a random word, so every coset is nonempty
        let x = GfVector::random(p.field, p.n, &mut seed::stream(resolved.seed, &[1, k as u64]));
        let c = GfVector::new(p.field, a.apply(x.entries()))?;
        for (m, &(label, mode)) in modes.iter().enumerate() {
            jobs.push((k, c.clone(), label, mode, seed::derive(resolved.seed, &[2, k as u64, m as u64])));
        }
    }
    let results = runner.map(jobs.len(), |j| -> sidecode_core::Result<(u64, f64)> {
        let (_, c, _, mode, s) = &jobs[j];
        let set = ConstraintSet::single(&a, c)?;
        let size = set.solution().size().unwrap_or(u64::MAX);
        let dist = ConstrainedDistribution::with_cap(weights.clone(), set, *mode, cap)?;
        Ok((size, tv_distance_check(&dist, p.draws, *s)?))
    });
    let mut t = Table::new(vec!["coset", "q", "l", "n", "coset_size", "sampler", "draws", "tv", "seed", "draw_seed"]);
    for ((k, _, label, _, s), r) in jobs.iter().zip(results) {
        let (size, tv) = r?;
        t.push(vec![
            k.to_string(),
            q.to_string(),
            p.rows.to_string(),
            p.n.to_string(),
            size.to_string(),
            (*label).into(),
            p.draws.to_string(),
            tv.to_string(),
            resolved.seed.to_string(),
            s.to_string(),
        ]);
    }
    Ok(t)
}
