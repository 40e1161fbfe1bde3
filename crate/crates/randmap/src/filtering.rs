//! Exact conditional-law filtering through composed map words.
//!
//! For a stationary two-sided chain, the law of the present state given the
//! last `n` innovations is the pushforward of the stationary law through the
//! backward composite `T_n`: the state `n` steps ago is independent of those
//! innovations, and the present state is `T_n` applied to it. Conditioning on
//! the infinite past is replaced by this growing finite window throughout;
//! that substitution is the central modeling step of the module. As the
//! window grows, the filtered law converges to the uniform law on the
//! eventual image set.

use num::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{
    build_kernel, classify_kernel, stationary_distribution, support_components, Distribution,
};
use crate::ratio::{rat_to_f64, Rat};
use crate::semigroup::weight_sampler;
use crate::system::{MapElement, RandomMapSystem};

/// Pushforward of the stationary law through the composite of `word`, whose
/// first entry is the newest innovation. Exact rationals end to end.
pub fn filtered_law(system: &RandomMapSystem, word: &[usize]) -> Result<Distribution> {
    let kernel = build_kernel(system);
    let class = classify_kernel(&kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(&kernel),
        });
    }
    let pi = stationary_distribution(&kernel)?;
    let composite = system.compose_newest_first(word);
    Ok(pushforward(&pi, &composite))
}

pub(crate) fn pushforward(law: &Distribution, map: &MapElement) -> Distribution {
    let d = law.d();
    let mut weights = vec![Rat::zero(); d];
    for x in 0..d {
        weights[map.apply(x)] += law.weight(x).clone();
    }
    Distribution::from_weights_unchecked(weights)
}

/// Per-step record of a filtering trace.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub n: usize,
    /// Support of the filtered law (equals the image of the composite, since
    /// the stationary law has full support on an irreducible kernel).
    pub support: Vec<usize>,
    pub law: Distribution,
    /// Total variation to the uniform law on the current support, as a float
    /// for reporting; measured against the current support so the value is
    /// well defined before the image chain stabilizes.
    pub tv_to_uniform_on_support: f64,
    pub atom_count: usize,
}

/// A sampled filtering trace: the word grows one innovation at a time and the
/// exact filtered law is recorded at every window length.
#[derive(Debug, Clone)]
pub struct FilteredTrace {
    pub seed: u64,
    /// Sampled map indices, newest first; step `n` uses the first `n`.
    pub word: Vec<usize>,
    pub steps: Vec<TraceStep>,
}

impl FilteredTrace {
    pub fn final_step(&self) -> &TraceStep {
        self.steps.last().expect("trace has at least step 0")
    }

    /// First window length whose support reached the target size.
    pub fn support_reached(&self, target: usize) -> Option<usize> {
        self.steps
            .iter()
            .find(|s| s.support.len() == target)
            .map(|s| s.n)
    }
}

/// Sample a word of length `horizon` and record the exact filtered law at
/// every prefix. Requires an irreducible aperiodic kernel.
pub fn convergence_trace(
    system: &RandomMapSystem,
    seed: u64,
    horizon: usize,
) -> Result<FilteredTrace> {
    let pi = trace_preconditions(system)?;
    Ok(trace_prechecked(system, &pi, seed, horizon))
}

/// Traces for seeds `seed0 .. seed0+reps`, hypotheses checked once and the
/// batch fanned out (parallel with the `parallel` feature, same order either
/// way).
pub fn convergence_traces(
    system: &RandomMapSystem,
    seed0: u64,
    reps: usize,
    horizon: usize,
) -> Result<Vec<FilteredTrace>> {
    let pi = trace_preconditions(system)?;
    Ok(crate::exec::map_seeds(seed0, reps, |seed| {
        trace_prechecked(system, &pi, seed, horizon)
    }))
}

fn trace_preconditions(system: &RandomMapSystem) -> Result<Distribution> {
    let kernel = build_kernel(system);
    let class = classify_kernel(&kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(&kernel),
        });
    }
    if !class.aperiodic {
        return Err(Error::Periodic {
            period: class.period.unwrap_or(0),
        });
    }
    stationary_distribution(&kernel)
}

fn trace_prechecked(
    system: &RandomMapSystem,
    pi: &Distribution,
    seed: u64,
    horizon: usize,
) -> FilteredTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = weight_sampler(system);
    let mut composite = MapElement::identity(system.d());
    let mut word = Vec::with_capacity(horizon);
    let mut steps = Vec::with_capacity(horizon + 1);
    steps.push(step_record(0, pi, &composite));
    for n in 1..=horizon {
        let h = rng.sample(&sampler);
        word.push(h);
        composite = composite.compose(system.map(h));
        steps.push(step_record(n, pi, &composite));
    }
    FilteredTrace { seed, word, steps }
}

fn step_record(n: usize, pi: &Distribution, composite: &MapElement) -> TraceStep {
    let law = pushforward(pi, composite);
    let support = law.support();
    let uniform = Distribution::uniform_on(law.d(), &support);
    let tv = rat_to_f64(&law.tv(&uniform));
    TraceStep {
        n,
        atom_count: support.len(),
        support,
        tv_to_uniform_on_support: tv,
        law,
    }
}

/// Summary of a completed trace's atom structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomProfile {
    pub final_count: usize,
    /// Atom counts never increase along the trace.
    pub nonincreasing: bool,
    /// All masses at the final step agree within 1e-6 after float conversion
    /// (exact equality is only asymptotic).
    pub equal_masses_at_limit: bool,
}

pub fn atom_profile(trace: &FilteredTrace) -> AtomProfile {
    let counts: Vec<usize> = trace.steps.iter().map(|s| s.atom_count).collect();
    let nonincreasing = counts.windows(2).all(|w| w[1] <= w[0]);
    let last = trace.final_step();
    let masses: Vec<f64> = last
        .support
        .iter()
        .map(|&x| rat_to_f64(last.law.weight(x)))
        .collect();
    let equal = masses.iter().all(|&m| (m - masses[0]).abs() <= 1e-6);
    AtomProfile {
        final_count: last.atom_count,
        nonincreasing,
        equal_masses_at_limit: equal,
    }
}

/// Exact tower identity: for every prefix `w` of the word, the filtered law
/// equals the weight-mixed filtered laws of the one-step extensions,
/// `ν_w = Σ_h β_h ν_{w·h}`, as a rational identity. This is the martingale
/// property of the filtering at the law level.
pub fn tower_identity_holds(system: &RandomMapSystem, word: &[usize]) -> Result<bool> {
    let kernel = build_kernel(system);
    let class = classify_kernel(&kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(&kernel),
        });
    }
    let pi = stationary_distribution(&kernel)?;
    let mut composite = MapElement::identity(system.d());
    for n in 0..=word.len() {
        if n > 0 {
            composite = composite.compose(system.map(word[n - 1]));
        }
        let law = pushforward(&pi, &composite);
        let mut mixed = vec![Rat::zero(); system.d()];
        for m in system.maps() {
            let extended = composite.compose(&m.map);
            let ext_law = pushforward(&pi, &extended);
            for (acc, w) in mixed.iter_mut().zip(ext_law.weights()) {
                *acc += m.weight.clone() * w.clone();
            }
        }
        if mixed.as_slice() != law.weights() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ratio::rat;

    #[test]
    fn vinokourov_filtered_law_is_always_uniform() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        for word in [vec![], vec![0], vec![1, 0, 1], vec![1, 1, 1, 1, 0]] {
            let law = filtered_law(&s, &word).unwrap();
            assert_eq!(law.weights(), &[rat(1, 2), rat(1, 2)]);
        }
    }

    #[test]
    fn empty_word_gives_the_stationary_law() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let law = filtered_law(&s, &[]).unwrap();
        let pi = stationary_distribution(&build_kernel(&s)).unwrap();
        assert_eq!(law, pi);
    }

    #[test]
    fn descending_word_filters_to_a_point() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        // f1 four times sends every state to 0
        let law = filtered_law(&s, &[0, 0, 0, 0]).unwrap();
        assert_eq!(law, Distribution::dirac(5, 0));
        // brute-force pushforward oracle over all states
        let pi = stationary_distribution(&build_kernel(&s)).unwrap();
        let composite = s.compose_newest_first(&[0, 0, 0, 0]);
        let mut expected = vec![rat(0, 1); 5];
        for x in 0..5 {
            expected[composite.apply(x)] += pi.weight(x).clone();
        }
        assert_eq!(law.weights(), &expected);
    }

    #[test]
    fn filtered_law_support_is_composite_image() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        for word in [vec![0, 1], vec![2, 2, 0], vec![1]] {
            let law = filtered_law(&s, &word).unwrap();
            let composite = s.compose_newest_first(&word);
            assert_eq!(law.support(), composite.image());
            // exact probability
            let total: Rat = law.weights().iter().fold(rat(0, 1), |a, w| a + w.clone());
            assert_eq!(total, rat(1, 1));
        }
    }

    #[test]
    fn reducible_systems_are_refused() {
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "id", "weight": "1", "table": {"a": "a", "b": "b"}}
        ]}"#;
        let s = crate::system::load_system(text).unwrap();
        assert!(filtered_law(&s, &[]).is_err());
        assert!(convergence_trace(&s, 0, 10).is_err());
    }

    #[test]
    fn vinokourov_trace_is_exactly_uniform_at_every_step() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        let t = convergence_trace(&s, 3, 50).unwrap();
        for step in &t.steps {
            assert_eq!(step.tv_to_uniform_on_support, 0.0);
            assert_eq!(step.support, vec![0, 1]);
        }
        let profile = atom_profile(&t);
        assert_eq!(profile.final_count, 2);
        assert!(profile.nonincreasing);
        assert!(profile.equal_masses_at_limit);
    }

    #[test]
    fn constant_map_traces_hit_a_dirac_at_step_one() {
        // two constant maps keep the kernel irreducible while every depth-1
        // composite is already constant
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "ca", "weight": "1/2", "table": {"a": "a", "b": "a"}},
            {"name": "cb", "weight": "1/2", "table": {"a": "b", "b": "b"}}
        ]}"#;
        let s = crate::system::load_system(text).unwrap();
        let t = convergence_trace(&s, 0, 5).unwrap();
        for step in &t.steps[1..] {
            assert_eq!(step.atom_count, 1);
            assert_eq!(step.tv_to_uniform_on_support, 0.0);
        }
        assert_eq!(atom_profile(&t).final_count, 1);
        // a single constant map on several states is reducible and refused
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "c", "weight": "1", "table": {"a": "a", "b": "a"}}
        ]}"#;
        let s = crate::system::load_system(text).unwrap();
        assert!(convergence_trace(&s, 0, 5).is_err());
    }

    #[test]
    fn truncated_counterexample_traces_converge() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let mut finals = Vec::new();
        for seed in 0..30 {
            let t = convergence_trace(&s, seed, 300).unwrap();
            let profile = atom_profile(&t);
            assert!(profile.nonincreasing);
            finals.push(t.final_step().tv_to_uniform_on_support);
        }
        // M = 1 here, so once the support is a single point the filtered law
        // is a Dirac and the distance is exactly zero
        let zeroes = finals.iter().filter(|&&tv| tv == 0.0).count();
        assert!(zeroes >= 28, "only {zeroes}/30 traces fully stabilized");
    }

    #[test]
    fn tower_identity_is_exact() {
        for name in ["vinokourov", "non-h-example", "counterexample-truncated(4)"] {
            let s = catalog::builtin(name).unwrap().system;
            let t = convergence_trace(&s, 11, 40).unwrap();
            assert!(tower_identity_holds(&s, &t.word).unwrap(), "{name}");
        }
    }

    #[test]
    fn trace_words_match_backward_walk_sampling() {
        // same seed, same innovation stream as the semigroup sampler
        let s = catalog::builtin("non-h-example").unwrap().system;
        let t = convergence_trace(&s, 5, 100).unwrap();
        let walk = crate::semigroup::sample_backward_walk(&s, 5, 100);
        let n = walk.word.len();
        assert_eq!(&t.word[..n], &walk.word[..]);
    }
}
