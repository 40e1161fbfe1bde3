//! Powerset-automaton reachability over a system's maps.
//!
//! Two traversals share this module. The forward walk iterates image sets
//! `A -> h(A)` starting from the full state set; the smallest cardinality it
//! can reach is the minimal rank over the generated semigroup, and a rank-1
//! witness is a synchronizing word. The backward walk iterates preimage sets
//! `B -> h^{-1}(B)` starting from singletons; every set it visits can be
//! collapsed to a point by some composite, and the largest one gives the
//! maximal simultaneously-accordable count.

use std::collections::{HashMap, VecDeque};

use crate::system::{mask_to_states, states_to_mask, MapElement, RandomMapSystem};

/// Image of a state mask under a map.
pub(crate) fn image_of_mask(map: &MapElement, mask: u32) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    while rest != 0 {
        let x = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= 1 << map.apply(x);
    }
    out
}

/// Preimage of a state mask under a map.
pub(crate) fn preimage_of_mask(map: &MapElement, mask: u32) -> u32 {
    let mut out = 0u32;
    for x in 0..map.len() {
        if mask & (1 << map.apply(x)) != 0 {
            out |= 1 << x;
        }
    }
    out
}

/// Minimal reachable image cardinality with a realizing word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    /// Word in application order (first entry applied first). Empty when the
    /// full state set already attains the minimum (all maps bijective).
    pub witness: Vec<usize>,
}

/// Breadth-first search over image sets from the full state set. The search
/// is exhaustive over reachable sets, so the reported rank is the exact
/// minimum of `|s(E)|` over the generated semigroup; breadth-first order with
/// maps tried in index order makes the witness the lexicographically first
/// shortest one.
pub fn min_rank(system: &RandomMapSystem) -> RankReport {
    let d = system.d();
    let full: u32 = if d == 32 { u32::MAX } else { (1 << d) - 1 };
    // parent chain: mask -> (previous mask, generator applied)
    let mut seen: HashMap<u32, (u32, u8)> = HashMap::new();
    seen.insert(full, (full, u8::MAX));
    let mut queue = VecDeque::from([full]);
    let mut best_mask = full;

    while let Some(mask) = queue.pop_front() {
        if mask.count_ones() < best_mask.count_ones() {
            best_mask = mask;
            if best_mask.count_ones() == 1 {
                break;
            }
        }
        for (i, m) in system.maps().iter().enumerate() {
            let next = image_of_mask(&m.map, mask);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(next) {
                e.insert((mask, i as u8));
                queue.push_back(next);
            }
        }
    }

    let mut witness = Vec::new();
    let mut cursor = best_mask;
    while cursor != full {
        let (prev, gen) = seen[&cursor];
        witness.push(gen as usize);
        cursor = prev;
    }
    witness.reverse();
    RankReport {
        rank: best_mask.count_ones() as usize,
        witness,
    }
}

/// A set of states some composite collapses to a single point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsibleSet {
    pub states: Vec<usize>,
    /// Collapsing word in application order; empty only for singletons.
    pub word: Vec<usize>,
    /// The point the composite sends every member to.
    pub value: usize,
}

#[derive(Debug, Clone)]
pub struct CollapseAnalysis {
    /// Maximal number of simultaneously accordable states.
    pub n: usize,
    /// Every visited preimage set of maximal size, sorted by mask.
    pub maximal_sets: Vec<CollapsibleSet>,
}

/// Backward breadth-first search from singletons under preimages. The
/// visited sets are exactly the `s^{-1}{y}` over composites `s` (plus the
/// singletons themselves), and any simultaneously-accordable set is contained
/// in one of them, so the maximal visited cardinality is the answer.
pub fn collapse_analysis(system: &RandomMapSystem) -> CollapseAnalysis {
    let d = system.d();
    // mask -> (parent mask, generator, collapsed value)
    let mut seen: HashMap<u32, (u32, u8, u8)> = HashMap::new();
    let mut queue = VecDeque::new();
    for y in 0..d {
        let mask = 1u32 << y;
        seen.insert(mask, (mask, u8::MAX, y as u8));
        queue.push_back(mask);
    }
    let mut best = 1usize;
    while let Some(mask) = queue.pop_front() {
        best = best.max(mask.count_ones() as usize);
        let value = seen[&mask].2;
        for (i, m) in system.maps().iter().enumerate() {
            let pre = preimage_of_mask(&m.map, mask);
            if pre != 0 && !seen.contains_key(&pre) {
                seen.insert(pre, (mask, i as u8, value));
                queue.push_back(pre);
            }
        }
    }

    let mut maximal_masks: Vec<u32> = seen
        .keys()
        .copied()
        .filter(|m| m.count_ones() as usize == best)
        .collect();
    maximal_masks.sort_unstable();
    let maximal_sets = maximal_masks
        .into_iter()
        .map(|mask| {
            // each backward step prepends the generator it used, so walking
            // the parent chain yields the word already in application order
            let mut word = Vec::new();
            let mut cursor = mask;
            loop {
                let (parent, gen, _) = seen[&cursor];
                if gen == u8::MAX {
                    break;
                }
                word.push(gen as usize);
                cursor = parent;
            }
            CollapsibleSet {
                states: mask_to_states(mask),
                word,
                value: seen[&mask].2 as usize,
            }
        })
        .collect();
    CollapseAnalysis {
        n: best,
        maximal_sets,
    }
}

/// Forward search from a given set until its image is a single point.
/// Independent of `collapse_analysis`, which approaches from the other side.
pub fn collapse_word(system: &RandomMapSystem, states: &[usize]) -> Option<CollapsibleSet> {
    let start = states_to_mask(states);
    if start == 0 {
        return None;
    }
    let mut seen: HashMap<u32, (u32, u8)> = HashMap::new();
    seen.insert(start, (start, u8::MAX));
    let mut queue = VecDeque::from([start]);
    while let Some(mask) = queue.pop_front() {
        if mask.count_ones() == 1 {
            let mut word = Vec::new();
            let mut cursor = mask;
            while cursor != start {
                let (prev, gen) = seen[&cursor];
                word.push(gen as usize);
                cursor = prev;
            }
            word.reverse();
            return Some(CollapsibleSet {
                states: states.to_vec(),
                word,
                value: mask.trailing_zeros() as usize,
            });
        }
        for (i, m) in system.maps().iter().enumerate() {
            let next = image_of_mask(&m.map, mask);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(next) {
                e.insert((mask, i as u8));
                queue.push_back(next);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ratio::rat;
    use crate::system::{NamedMap, StateSpace};

    #[test]
    fn min_rank_of_bijection_system_is_d_with_empty_witness() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        let r = min_rank(&s);
        assert_eq!(r.rank, 2);
        assert!(r.witness.is_empty());
    }

    #[test]
    fn min_rank_of_truncated_counterexample_is_one() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let r = min_rank(&s);
        assert_eq!(r.rank, 1);
        // each map merges at most one pair, so four steps are required;
        // breadth-first lexicographic order picks f1 f1 f1 f1
        assert_eq!(r.witness, vec![0, 0, 0, 0]);
        let composite = s.compose_word(&r.witness);
        assert_eq!(composite.is_constant(), Some(0));
    }

    #[test]
    fn min_rank_of_non_h_example_is_three() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        let r = min_rank(&s);
        assert_eq!(r.rank, 3);
        assert_eq!(s.compose_word(&r.witness).image_mask().count_ones(), 3);
    }

    #[test]
    fn collapse_analysis_counts() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        let a = collapse_analysis(&s);
        assert_eq!(a.n, 2);
        // the only collapsible pair is {3,4} (indices 2,3)
        assert!(a.maximal_sets.iter().all(|c| c.states == vec![2, 3]));
        let s = catalog::builtin("vinokourov").unwrap().system;
        assert_eq!(collapse_analysis(&s).n, 1);
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        assert_eq!(collapse_analysis(&s).n, 5);
    }

    #[test]
    fn constant_map_collapses_everything() {
        let states = StateSpace::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let sys = crate::system::RandomMapSystem::new(
            states,
            vec![NamedMap {
                name: "c1".into(),
                map: crate::system::MapElement::constant(3, 1),
                weight: rat(1, 1),
            }],
        )
        .unwrap();
        assert_eq!(collapse_analysis(&sys).n, 3);
        let c = collapse_word(&sys, &[0, 1, 2]).unwrap();
        assert_eq!(c.value, 1);
        assert_eq!(c.word, vec![0]);
    }

    #[test]
    fn collapse_word_replay_merges() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        let c = collapse_word(&s, &[2, 3]).unwrap();
        let composite = s.compose_word(&c.word);
        assert_eq!(composite.apply(2), composite.apply(3));
        assert_eq!(composite.apply(2), c.value);
    }

    #[test]
    fn collapse_words_from_analysis_replay() {
        for name in ["non-h-example", "counterexample-truncated(4)"] {
            let s = catalog::builtin(name).unwrap().system;
            for set in collapse_analysis(&s).maximal_sets {
                let composite = s.compose_word(&set.word);
                for &x in &set.states {
                    assert_eq!(composite.apply(x), set.value, "{name} {set:?}");
                }
            }
        }
    }
}
