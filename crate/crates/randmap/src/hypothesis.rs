//! Can the uniform law be made invariant by a positive reweighting of the
//! maps? The question is an exact linear program: find α with `α_h > 0`,
//! `Σ α_h = 1`, and `Σ_h α_h |h^{-1}{y}| = 1` for every state `y`. Strict
//! positivity is certified by maximizing the margin `t ≤ min_h α_h` in exact
//! arithmetic and checking `t* > 0`.
//!
//! When the hypothesis holds on an irreducible aperiodic system, preimages of
//! maximal simultaneously-accordable sets keep their cardinality, the product
//! of the two counts `M · N` equals the state count, and the state space
//! splits into `M` blocks of `N` simultaneously accordable states collapsed
//! by a single composite. All of that is verified here executably rather
//! than assumed.

use num::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::accord;
use crate::error::{Error, Result};
use crate::filtering::filtered_law;
use crate::kernel::{
    build_kernel, classify_kernel, stationary_distribution, support_components, Distribution,
};
use crate::ratio::{format_rat, Rat};
use crate::simplex::{maximize, LpOutcome};
use crate::subsets;
use crate::system::{MapElement, RandomMapSystem};

/// Outcome of the feasibility program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpCertificate {
    /// True exactly when the optimum margin is strictly positive.
    pub feasible: bool,
    /// Optimum of the margin `t`; `None` when the equality system itself is
    /// inconsistent. A non-positive value is an exact certificate of failure.
    pub t_star: Option<Rat>,
    /// Optimal weight vector, present only when feasible (then every entry
    /// is at least `t_star`, hence strictly positive).
    pub alpha: Option<Vec<Rat>>,
}

/// `|h^{-1}{y}|` for every map and state.
fn fiber_counts(system: &RandomMapSystem) -> Vec<Vec<usize>> {
    let d = system.d();
    system
        .maps()
        .iter()
        .map(|m| {
            let mut counts = vec![0usize; d];
            for x in 0..d {
                counts[m.map.apply(x)] += 1;
            }
            counts
        })
        .collect()
}

/// Exact LP: maximize `t` subject to `α_h ≥ t`, `Σ α_h = 1`, and
/// `Σ_h α_h |h^{-1}{y}| = 1` for all `y`, with `α` and `t` free in sign
/// (split into nonnegative parts for the standard-form solver).
pub fn check_hypothesis_h(system: &RandomMapSystem) -> LpCertificate {
    let k = system.map_count();
    let d = system.d();
    let counts = fiber_counts(system);

    // columns: αp_h (k) | αn_h (k) | tp | tn | slack_h (k)
    let cols = 3 * k + 2;
    let tp = 2 * k;
    let tn = 2 * k + 1;
    let slack0 = 2 * k + 2;

    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();

    let mut sum_row = vec![Rat::zero(); cols];
    for h in 0..k {
        sum_row[h] = Rat::one();
        sum_row[k + h] = -Rat::one();
    }
    rows.push(sum_row);
    rhs.push(Rat::one());

    for y in 0..d {
        let mut row = vec![Rat::zero(); cols];
        for h in 0..k {
            let c = Rat::from_integer((counts[h][y] as i64).into());
            row[h] = c.clone();
            row[k + h] = -c;
        }
        rows.push(row);
        rhs.push(Rat::one());
    }

    for h in 0..k {
        let mut row = vec![Rat::zero(); cols];
        row[h] = Rat::one();
        row[k + h] = -Rat::one();
        row[tp] = -Rat::one();
        row[tn] = Rat::one();
        row[slack0 + h] = -Rat::one();
        rows.push(row);
        rhs.push(Rat::zero());
    }

    let mut objective = vec![Rat::zero(); cols];
    objective[tp] = Rat::one();
    objective[tn] = -Rat::one();

    match maximize(&objective, &rows, &rhs) {
        LpOutcome::Optimal { x, objective } => {
            let alpha: Vec<Rat> = (0..k).map(|h| x[h].clone() - x[k + h].clone()).collect();
            let feasible = objective.is_positive();
            LpCertificate {
                feasible,
                t_star: Some(objective),
                alpha: feasible.then_some(alpha),
            }
        }
        LpOutcome::Infeasible => LpCertificate {
            feasible: false,
            t_star: None,
            alpha: None,
        },
        // t is bounded above by 1/|H|, so this cannot happen
        LpOutcome::Unbounded => unreachable!("margin objective is bounded"),
    }
}

/// Independent re-check of a certificate, bypassing the solver: positivity,
/// normalization, and the exact weighted-fiber identity at every state.
pub fn verify_certificate(system: &RandomMapSystem, alpha: &[Rat]) -> bool {
    if alpha.len() != system.map_count() {
        return false;
    }
    if alpha.iter().any(|a| !a.is_positive()) {
        return false;
    }
    let total: Rat = alpha.iter().fold(Rat::zero(), |a, v| a + v.clone());
    if !total.is_one() {
        return false;
    }
    let counts = fiber_counts(system);
    (0..system.d()).all(|y| {
        let lhs: Rat = alpha.iter().zip(&counts).fold(Rat::zero(), |acc, (a, c)| {
            acc + a.clone() * Rat::from_integer((c[y] as i64).into())
        });
        lhs.is_one()
    })
}

/// Maximal number of simultaneously accordable states.
pub fn simultaneous_accordability_number(system: &RandomMapSystem) -> usize {
    subsets::collapse_analysis(system).n
}

/// Combined report: LP certificate plus the two counts and their product.
#[derive(Debug, Clone)]
pub struct HReport {
    pub feasible: bool,
    pub t_star: Option<Rat>,
    pub alpha: Option<Vec<(String, Rat)>>,
    /// Maximal simultaneously accordable count.
    pub n: usize,
    /// Maximal pairwise non-accordable count.
    pub m: usize,
    /// `m * n == d`.
    pub product_check: bool,
    /// Whether `m` divides the state count at all.
    pub m_divides_states: bool,
}

pub fn h_report(system: &RandomMapSystem) -> HReport {
    let lp = check_hypothesis_h(system);
    let n = simultaneous_accordability_number(system);
    let m = accord::max_non_accordable(system).m;
    let d = system.d();
    HReport {
        feasible: lp.feasible,
        t_star: lp.t_star,
        alpha: lp.alpha.map(|a| {
            a.into_iter()
                .enumerate()
                .map(|(h, w)| (system.map_name(h).to_string(), w))
                .collect()
        }),
        n,
        m,
        product_check: m * n == d,
        m_divides_states: d.is_multiple_of(m),
    }
}

fn require_irreducible_aperiodic(system: &RandomMapSystem) -> Result<()> {
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
    Ok(())
}

fn require_h(system: &RandomMapSystem) -> Result<LpCertificate> {
    let lp = check_hypothesis_h(system);
    if !lp.feasible {
        return Err(Error::Unsupported(format!(
            "uniform-invariance hypothesis fails: optimum margin {}",
            lp.t_star
                .as_ref()
                .map(format_rat)
                .unwrap_or_else(|| "does not exist".into())
        )));
    }
    Ok(lp)
}

#[derive(Debug, Clone)]
pub struct Lemma12Report {
    pub ok: bool,
    pub sets_checked: usize,
    pub words_checked: usize,
    pub failure: Option<String>,
}

/// Preimages of maximal simultaneously-accordable sets keep exactly their
/// cardinality and stay simultaneously accordable. Checked for every
/// generator (which extends to all composites by induction) and additionally
/// for a batch of random deep words.
pub fn check_lemma12(system: &RandomMapSystem, seed: u64) -> Result<Lemma12Report> {
    require_irreducible_aperiodic(system)?;
    require_h(system)?;
    let analysis = subsets::collapse_analysis(system);
    let n = analysis.n;
    let mut failure = None;
    let mut words_checked = 0;

    let mut check = |composite: &MapElement, desc: &str, set: &subsets::CollapsibleSet| -> bool {
        let pre: Vec<usize> = (0..system.d())
            .filter(|&x| set.states.contains(&composite.apply(x)))
            .collect();
        if pre.len() != n {
            failure = Some(format!(
                "preimage of {:?} under {desc} has {} states, expected {n}",
                set.states,
                pre.len()
            ));
            return false;
        }
        if subsets::collapse_word(system, &pre).is_none() {
            failure = Some(format!(
                "preimage {pre:?} of {:?} under {desc} is not simultaneously accordable",
                set.states
            ));
            return false;
        }
        true
    };

    'outer: for set in &analysis.maximal_sets {
        for (h, m) in system.maps().iter().enumerate() {
            if !check(&m.map, &format!("generator {h}"), set) {
                break 'outer;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let len = rng.gen_range(2..=8);
            let word: Vec<usize> = (0..len)
                .map(|_| rng.gen_range(0..system.map_count()))
                .collect();
            let composite = system.compose_word(&word);
            words_checked += 1;
            if !check(&composite, &format!("word {word:?}"), set) {
                break 'outer;
            }
        }
    }
    Ok(Lemma12Report {
        ok: failure.is_none(),
        sets_checked: analysis.maximal_sets.len(),
        words_checked,
        failure,
    })
}

/// Disjoint blocks of simultaneously accordable states, all collapsed by one
/// composite word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Disjoint blocks, each of the maximal simultaneous size.
    pub blocks: Vec<Vec<usize>>,
    /// `values[i]` is the state the collapsing word sends block `i` to.
    pub values: Vec<usize>,
    /// Collapsing word in application order.
    pub word: Vec<usize>,
}

impl Partition {
    pub fn covered(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Every postcondition a valid partition must satisfy, checked executably.
pub fn verify_partition(system: &RandomMapSystem, partition: &Partition) -> Result<()> {
    if partition.blocks.is_empty() || partition.blocks.len() != partition.values.len() {
        return Err(Error::Inconsistent("malformed partition".into()));
    }
    let n = partition.blocks[0].len();
    if n == 0 || partition.blocks.iter().any(|b| b.len() != n) {
        return Err(Error::Inconsistent(
            "partition blocks do not share the maximal size".into(),
        ));
    }
    let covered = partition.covered();
    let mut dedup = covered.clone();
    dedup.dedup();
    if dedup.len() != covered.len() {
        return Err(Error::Inconsistent("partition blocks overlap".into()));
    }
    let composite = system.compose_word(&partition.word);
    for (block, &value) in partition.blocks.iter().zip(&partition.values) {
        for &x in block {
            if composite.apply(x) != value {
                return Err(Error::Inconsistent(format!(
                    "collapsing word is not constant on block {block:?}"
                )));
            }
        }
    }
    let relation = accord::accordability_relation(system);
    for (i, &a) in partition.values.iter().enumerate() {
        for &b in &partition.values[i + 1..] {
            if relation[a][b] {
                return Err(Error::Inconsistent(format!(
                    "block values {a} and {b} are accordable"
                )));
            }
        }
    }
    Ok(())
}

/// Initial one-block partition: a maximal simultaneously-accordable set with
/// its collapsing word from the backward subset search.
pub fn seed_partition(system: &RandomMapSystem) -> Result<Partition> {
    require_irreducible_aperiodic(system)?;
    require_h(system)?;
    let analysis = subsets::collapse_analysis(system);
    let set = analysis
        .maximal_sets
        .first()
        .ok_or_else(|| Error::Inconsistent("no collapsible set found".into()))?;
    let partition = Partition {
        blocks: vec![set.states.clone()],
        values: vec![set.value],
        word: set.word.clone(),
    };
    verify_partition(system, &partition)?;
    Ok(partition)
}

/// One extension step: pick a state outside the union, route the first block
/// value to it through the state digraph, and take preimages of the old and
/// new values under `s ∘ t ∘ s`. Postconditions are verified, not assumed;
/// a verification failure is reported with its witness rather than patched.
pub fn extend_partition(system: &RandomMapSystem, partial: &Partition) -> Result<Partition> {
    require_irreducible_aperiodic(system)?;
    require_h(system)?;
    verify_partition(system, partial)?;
    let d = system.d();
    let covered = partial.covered();
    let Some(outside) = (0..d).find(|x| !covered.contains(x)) else {
        return Err(Error::Unsupported(
            "partition already covers the state space".into(),
        ));
    };
    let s = system.compose_word(&partial.word);
    let new_value = s.apply(outside);
    if partial.values.contains(&new_value) {
        return Err(Error::Inconsistent(format!(
            "extension value {new_value} collides with an existing block value"
        )));
    }
    let route = shortest_route(system, partial.values[0], outside).ok_or_else(|| {
        Error::Inconsistent(format!(
            "no composite routes state {} to state {outside} despite irreducibility",
            partial.values[0]
        ))
    })?;
    let mut word = partial.word.clone();
    word.extend_from_slice(&route);
    word.extend_from_slice(&partial.word);
    let composite = system.compose_word(&word);

    let mut values = partial.values.clone();
    values.push(new_value);
    let blocks: Vec<Vec<usize>> = values
        .iter()
        .map(|&c| (0..d).filter(|&x| composite.apply(x) == c).collect())
        .collect();
    let extended = Partition {
        blocks,
        values,
        word,
    };
    verify_partition(system, &extended)?;
    if extended.blocks[0].len() != partial.blocks[0].len() {
        return Err(Error::Inconsistent(
            "extension changed the block size".into(),
        ));
    }
    Ok(extended)
}

/// Shortest nonempty word routing `from` to `to` through single-map steps;
/// maps tried in index order for determinism.
fn shortest_route(system: &RandomMapSystem, from: usize, to: usize) -> Option<Vec<usize>> {
    let d = system.d();
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; d];
    let mut queue = std::collections::VecDeque::new();
    for (h, m) in system.maps().iter().enumerate() {
        let y = m.map.apply(from);
        if parent[y].is_none() {
            parent[y] = Some((usize::MAX, h as u8));
            if y == to {
                return Some(vec![h]);
            }
            queue.push_back(y);
        }
    }
    while let Some(x) = queue.pop_front() {
        for (h, m) in system.maps().iter().enumerate() {
            let y = m.map.apply(x);
            if parent[y].is_none() {
                parent[y] = Some((x, h as u8));
                if y == to {
                    let mut word = Vec::new();
                    let mut cursor = y;
                    loop {
                        let (prev, gen) = parent[cursor].unwrap();
                        word.push(gen as usize);
                        if prev == usize::MAX {
                            break;
                        }
                        cursor = prev;
                    }
                    word.reverse();
                    return Some(word);
                }
                queue.push_back(y);
            }
        }
    }
    None
}

/// Iterate extensions until the blocks cover the state space. Under the
/// hypothesis this takes exactly `M - 1` steps and ends with `M` blocks of
/// `N` states each.
pub fn build_full_partition(system: &RandomMapSystem) -> Result<Partition> {
    let mut partition = seed_partition(system)?;
    let d = system.d();
    while partition.covered().len() < d {
        let before = partition.blocks.len();
        partition = extend_partition(system, &partition)?;
        if partition.blocks.len() != before + 1 {
            return Err(Error::Inconsistent(
                "extension did not add exactly one block".into(),
            ));
        }
    }
    Ok(partition)
}

/// Which branch a prime-cardinality system falls into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeBranch {
    /// Every map is a bijection; the filtered law stays uniform for every
    /// word, verified exactly on all short words.
    AllBijections { uniform_law_verified: bool },
    /// All states are simultaneously accordable (`N = d`, `M = 1`).
    AllSimultaneouslyAccordable { n_equals_d: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thm13Report {
    pub m: usize,
    pub n: usize,
    pub mn_equals_d: bool,
    /// Every fiber of a minimal-rank composite has exactly `n` states.
    pub fiber_check: bool,
    pub prime_branch: Option<PrimeBranch>,
}

/// Product identity `M · N = d` plus the fiber structure of a minimal-rank
/// composite, with the prime-cardinality dichotomy when `d` is prime.
pub fn check_thm13(system: &RandomMapSystem) -> Result<Thm13Report> {
    require_irreducible_aperiodic(system)?;
    require_h(system)?;
    let d = system.d();
    let m = accord::max_non_accordable(system).m;
    let n = simultaneous_accordability_number(system);
    let rank = subsets::min_rank(system);
    if rank.rank != m {
        return Err(Error::Inconsistent(format!(
            "minimal rank {} disagrees with the non-accordable count {m}",
            rank.rank
        )));
    }
    let composite = system.compose_word(&rank.witness);
    let image = composite.image();
    let fiber_check = image
        .iter()
        .all(|&c| (0..d).filter(|&x| composite.apply(x) == c).count() == n);
    let prime_branch = if is_prime(d) {
        if system.maps().iter().all(|m| m.map.is_bijection()) {
            Some(PrimeBranch::AllBijections {
                uniform_law_verified: uniform_law_holds(system)?,
            })
        } else {
            Some(PrimeBranch::AllSimultaneouslyAccordable { n_equals_d: n == d })
        }
    } else {
        None
    };
    Ok(Thm13Report {
        m,
        n,
        mn_equals_d: m * n == d,
        fiber_check,
        prime_branch,
    })
}

/// Exact check that the filtered law is uniform for every word of length at
/// most 3 (and that the stationary law itself is uniform).
fn uniform_law_holds(system: &RandomMapSystem) -> Result<bool> {
    let d = system.d();
    let uniform = Distribution::uniform(d);
    let pi = stationary_distribution(&build_kernel(system))?;
    if pi != uniform {
        return Ok(false);
    }
    let k = system.map_count();
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    for len in 1..=3usize {
        let mut count = 1usize;
        for _ in 0..len {
            count *= k;
        }
        for code in 0..count {
            let mut word = Vec::with_capacity(len);
            let mut c = code;
            for _ in 0..len {
                word.push(c % k);
                c /= k;
            }
            words.push(word);
        }
    }
    for word in words {
        if filtered_law(system, &word)? != uniform {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}
