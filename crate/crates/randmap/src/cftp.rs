//! Coupling from the past: exact sampling of the stationary law.
//!
//! The sampler extends the backward horizon by doubling (1, 2, 4, ...),
//! reusing every previously drawn innovation, until the composite of all
//! sampled maps is constant; the constant is then an exact draw from the
//! stationary law. Reuse across doublings is what makes the output exact —
//! resampling would bias it, and the forward "run until constant" variant is
//! deliberately not provided for the same reason.
//!
//! When the innovations do not determine the chain (minimal rank M > 1) no
//! composite is ever constant; the residual sampler instead stabilizes the
//! backward image at its eventual M-point set and resolves the remaining
//! choice with an auxiliary uniform pick, which again has the stationary law
//! as its marginal.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::accord;
use crate::error::{Error, Result};
use crate::exec;
use crate::semigroup::{sample_backward_walk, weight_sampler};
use crate::system::{MapElement, RandomMapSystem};

/// Hard bound on the backward depth; reaching it on a valid input is
/// statistically impossible at desk scale and reported as an error.
pub const DEPTH_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpResult {
    pub sample: usize,
    /// Doubled horizon at which the composite became constant.
    pub coalescence_depth: usize,
    /// All innovations drawn, newest first; the composite of the first
    /// `coalescence_depth` entries is constant with value `sample`.
    pub word: Vec<usize>,
}

/// Exact stationary sample; requires that the innovations determine the
/// chain (equivalently, some composite is constant with positive
/// probability) on an irreducible kernel.
pub fn cftp_sample(system: &RandomMapSystem, seed: u64) -> Result<CftpResult> {
    let determination = accord::innovations_determine(system)?;
    if !determination.determined {
        return Err(Error::Unsupported(format!(
            "innovations do not determine the chain (minimal rank {}); \
             use the residual sampler",
            determination.min_rank.rank
        )));
    }
    Ok(cftp_sample_prechecked(system, seed))
}

/// The sampler itself, hypothesis checks already done by the caller.
fn cftp_sample_prechecked(system: &RandomMapSystem, seed: u64) -> CftpResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = weight_sampler(system);
    let mut word: Vec<usize> = Vec::new();
    let mut depth = 1usize;
    loop {
        // extend the innovation stream, keeping everything already drawn
        while word.len() < depth {
            word.push(rng.sample(&sampler));
        }
        let mut composite = MapElement::identity(system.d());
        for &h in &word {
            composite = composite.compose(system.map(h));
        }
        if let Some(value) = composite.is_constant() {
            return CftpResult {
                sample: value,
                coalescence_depth: depth,
                word,
            };
        }
        assert!(depth < DEPTH_CAP, "coalescence depth cap exceeded");
        depth *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualSample {
    /// The stabilized backward image for the sampled innovations.
    pub r0: Vec<usize>,
    /// State drawn uniformly from `r0` with the auxiliary seed.
    pub sample: usize,
    /// Backward depth at which the image stabilized.
    pub depth: usize,
}

/// Backward walk until the image reaches its minimal cardinality, then a
/// uniform pick among the surviving states using an independent auxiliary
/// seed. The marginal law of the sample is the stationary law for any M.
pub fn cftp_residual_sample(
    system: &RandomMapSystem,
    seed: u64,
    aux_seed: u64,
) -> Result<ResidualSample> {
    accord::innovations_determine(system)?;
    Ok(residual_prechecked(system, seed, aux_seed))
}

fn residual_prechecked(system: &RandomMapSystem, seed: u64, aux_seed: u64) -> ResidualSample {
    let trace = sample_backward_walk(system, seed, DEPTH_CAP);
    let depth = trace
        .stabilization_index
        .expect("depth cap exceeded before image stabilization");
    let r0 = trace.limit_image().expect("stabilized trace has a limit");
    let mut aux = ChaCha8Rng::seed_from_u64(aux_seed);
    let sample = r0[aux.gen_range(0..r0.len())];
    ResidualSample { r0, sample, depth }
}

/// CFTP samples for seeds `seed0 .. seed0+count`, checked once and fanned out
/// (in parallel when the `parallel` feature is on, identically ordered either
/// way).
pub fn cftp_sample_many(
    system: &RandomMapSystem,
    seed0: u64,
    count: usize,
) -> Result<Vec<CftpResult>> {
    let determination = accord::innovations_determine(system)?;
    if !determination.determined {
        return Err(Error::Unsupported(format!(
            "innovations do not determine the chain (minimal rank {}); \
             use the residual sampler",
            determination.min_rank.rank
        )));
    }
    Ok(exec::map_seeds(seed0, count, |seed| {
        cftp_sample_prechecked(system, seed)
    }))
}

/// Residual samples for a seed range; the auxiliary seed is derived from the
/// walk seed by a fixed odd offset so the two streams stay independent.
pub fn cftp_residual_many(
    system: &RandomMapSystem,
    seed0: u64,
    count: usize,
) -> Result<Vec<ResidualSample>> {
    accord::innovations_determine(system)?;
    Ok(exec::map_seeds(seed0, count, |seed| {
        residual_prechecked(system, seed, aux_seed_for(seed))
    }))
}

/// Fixed derivation of the auxiliary seed used by the batch residual sampler.
pub fn aux_seed_for(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1)
}
