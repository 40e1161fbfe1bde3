//! The semigroup generated by the system's maps, its right-multiplication
//! random-walk structure, and sampled backward walks.
//!
//! The backward walk composes one older innovation at a time on the right:
//! `T_0 = id`, `T_{n+1} = T_n ∘ h`. Its image chain `T_n(E)` is a
//! nonincreasing sequence of sets whose eventual value is the missing
//! information's support; the image cardinality of every recurrent walk
//! element equals the maximal number of pairwise non-accordable states.

use std::collections::HashMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::accord;
use crate::error::{Error, Result};
use crate::kernel::{build_kernel, classify_kernel, support_components};
use crate::ratio::rat_to_f64;
use crate::scc::{self, Scc};
use crate::subsets;
use crate::system::{mask_to_states, MapElement, RandomMapSystem};

/// Breadth-first closure of the generators under right composition.
#[derive(Debug, Clone)]
pub struct SemigroupTable {
    map_count: usize,
    elements: Vec<MapElement>,
    /// `(parent, generator)` per element; generators are their own roots.
    parents: Vec<(u32, u8)>,
    /// `right_edges[s * map_count + h]` = index of `s ∘ h`.
    right_edges: Vec<u32>,
}

impl SemigroupTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &MapElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[MapElement] {
        &self.elements
    }

    pub fn right_edge(&self, element: usize, generator: usize) -> usize {
        self.right_edges[element * self.map_count + generator] as usize
    }

    pub fn map_count(&self) -> usize {
        self.map_count
    }

    /// Index of a map if it was generated.
    pub fn position_of(&self, map: &MapElement) -> Option<usize> {
        self.elements.iter().position(|e| e == map)
    }

    /// Witness word for an element, in application order; composing it
    /// reproduces the element.
    pub fn word_for(&self, index: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cursor = index as u32;
        loop {
            let (parent, gen) = self.parents[cursor as usize];
            word.push(gen as usize);
            if parent == u32::MAX {
                break;
            }
            cursor = parent;
        }
        word
    }

    /// Right-edge adjacency with duplicate targets removed.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        (0..self.len())
            .map(|s| {
                let mut t: Vec<u32> = (0..self.map_count)
                    .map(|h| self.right_edges[s * self.map_count + h])
                    .collect();
                t.sort_unstable();
                t.dedup();
                t
            })
            .collect()
    }
}

/// Enumerate the generated semigroup, failing (not truncating) past `cap`.
pub fn enumerate_semigroup(system: &RandomMapSystem, cap: usize) -> Result<SemigroupTable> {
    if cap == 0 {
        return Err(Error::Unsupported("semigroup cap must be positive".into()));
    }
    let k = system.map_count();
    if k > cap {
        return Err(Error::CapExceeded {
            what: "semigroup enumeration".into(),
            cap,
            reached: k,
        });
    }
    let mut elements: Vec<MapElement> = Vec::new();
    let mut parents: Vec<(u32, u8)> = Vec::new();
    let mut index: HashMap<MapElement, u32> = HashMap::new();
    for (i, m) in system.maps().iter().enumerate() {
        // distinct by system invariant
        index.insert(m.map.clone(), elements.len() as u32);
        elements.push(m.map.clone());
        parents.push((u32::MAX, i as u8));
    }
    let mut right_edges: Vec<u32> = Vec::new();
    let mut head = 0usize;
    while head < elements.len() {
        for h in 0..k {
            let child = elements[head].compose(system.map(h));
            let id = match index.get(&child) {
                Some(&id) => id,
                None => {
                    let id = elements.len() as u32;
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded {
                            what: "semigroup enumeration".into(),
                            cap,
                            reached: elements.len() + 1,
                        });
                    }
                    index.insert(child.clone(), id);
                    elements.push(child);
                    parents.push((head as u32, h as u8));
                    id
                }
            };
            right_edges.push(id);
        }
        head += 1;
    }
    Ok(SemigroupTable {
        map_count: k,
        elements,
        parents,
        right_edges,
    })
}

/// Strongly connected structure of the right-multiplication walk. Because
/// every generator has positive weight, the recurrent walk elements are
/// exactly the members of terminal components.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    pub scc: Scc,
    /// Per component: no right edge leaves it.
    pub terminal: Vec<bool>,
    /// Per element: member of a terminal component.
    pub recurrent: Vec<bool>,
}

pub fn walk_structure(table: &SemigroupTable) -> WalkGraph {
    let adj = table.adjacency();
    let scc = scc::tarjan(&adj);
    let terminal = scc::terminal_flags(&adj, &scc);
    let recurrent = (0..table.len())
        .map(|s| terminal[scc.comp[s] as usize])
        .collect();
    WalkGraph {
        scc,
        terminal,
        recurrent,
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentImage {
    pub element: usize,
    pub image: Vec<usize>,
    pub pairwise_non_accordable: bool,
}

#[derive(Debug, Clone)]
pub struct Prop10Report {
    pub ok: bool,
    /// Maximal pairwise non-accordable count, from the clique route.
    pub m: usize,
    pub semigroup_size: usize,
    pub recurrent_count: usize,
    /// Minimum image cardinality over every enumerated element.
    pub min_image_size: usize,
    pub details: Vec<RecurrentImage>,
}

/// Checks that every recurrent element of the walk has an image of exactly
/// `m` pairwise non-accordable states, and that no element at all beats that
/// cardinality. `m` comes from the independent clique search over the
/// accordability relation.
pub fn check_prop10(system: &RandomMapSystem, cap: usize) -> Result<Prop10Report> {
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
    let table = enumerate_semigroup(system, cap)?;
    let walk = walk_structure(&table);
    let report = accord::max_non_accordable(system);
    let m = report.m;
    let relation = &report.relation;

    let mut details = Vec::new();
    let mut ok = true;
    let mut min_image = usize::MAX;
    for s in 0..table.len() {
        let image = table.element(s).image();
        min_image = min_image.min(image.len());
        if walk.recurrent[s] {
            let mut non_accordable = true;
            for (i, &x) in image.iter().enumerate() {
                for &y in &image[i + 1..] {
                    if relation[x][y] {
                        non_accordable = false;
                    }
                }
            }
            if image.len() != m || !non_accordable {
                ok = false;
            }
            details.push(RecurrentImage {
                element: s,
                image,
                pairwise_non_accordable: non_accordable,
            });
        }
    }
    if min_image != m {
        ok = false;
    }
    Ok(Prop10Report {
        ok,
        m,
        semigroup_size: table.len(),
        recurrent_count: details.len(),
        min_image_size: min_image,
        details,
    })
}

/// One sampled realization of the backward walk.
#[derive(Debug, Clone)]
pub struct BackwardTrace {
    pub seed: u64,
    /// Sampled map indices, newest innovation first; `composite` of the first
    /// `n` entries is `T_n`.
    pub word: Vec<usize>,
    /// `images[n]` = image mask of `T_n`; `images[0]` is the full state set.
    pub images: Vec<u32>,
    /// First `n` with image cardinality equal to the minimal rank; `None`
    /// when the horizon was reached first.
    pub stabilization_index: Option<usize>,
    /// The minimal rank used as the stopping criterion.
    pub target_rank: usize,
}

impl BackwardTrace {
    /// The detected eventual image, once stabilized.
    pub fn limit_image(&self) -> Option<Vec<usize>> {
        self.stabilization_index
            .map(|n| mask_to_states(self.images[n]))
    }

    pub fn image_sizes(&self) -> Vec<usize> {
        self.images
            .iter()
            .map(|m| m.count_ones() as usize)
            .collect()
    }

    /// Composite of the sampled word; its image equals the last image mask.
    pub fn replay(&self, system: &RandomMapSystem) -> MapElement {
        system.compose_newest_first(&self.word)
    }
}

/// Samples the backward walk until the image cardinality reaches the minimal
/// rank (exact stopping rule: the image chain is nonincreasing and can never
/// go below the minimum over the semigroup). Non-stabilization within the
/// horizon is a flagged outcome, not an error.
pub fn sample_backward_walk(system: &RandomMapSystem, seed: u64, horizon: usize) -> BackwardTrace {
    let target = subsets::min_rank(system).rank;
    let d = system.d();
    let full: u32 = if d == 32 { u32::MAX } else { (1 << d) - 1 };
    let mut trace = BackwardTrace {
        seed,
        word: Vec::new(),
        images: vec![full],
        stabilization_index: None,
        target_rank: target,
    };
    if d == target {
        trace.stabilization_index = Some(0);
        return trace;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = weight_sampler(system);
    let mut composite = MapElement::identity(d);
    for n in 1..=horizon {
        let h = rng.sample(&sampler);
        trace.word.push(h);
        composite = composite.compose(system.map(h));
        let mask = composite.image_mask();
        trace.images.push(mask);
        if mask.count_ones() as usize == target {
            trace.stabilization_index = Some(n);
            break;
        }
    }
    trace
}

/// Map-index sampler; the exact weights are converted to floats once, which
/// affects sampling only, never a structural verdict.
pub(crate) fn weight_sampler(system: &RandomMapSystem) -> WeightedIndex<f64> {
    let weights: Vec<f64> = system
        .maps()
        .iter()
        .map(|m| rat_to_f64(&m.weight))
        .collect();
    WeightedIndex::new(weights).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ratio::rat;
    use crate::system::{NamedMap, RandomMapSystem, StateSpace};

    fn constant_map_system() -> RandomMapSystem {
        let states = StateSpace::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        RandomMapSystem::new(
            states,
            vec![NamedMap {
                name: "c1".into(),
                map: MapElement::constant(3, 1),
                weight: rat(1, 1),
            }],
        )
        .unwrap()
    }

    #[test]
    fn constant_map_generates_itself() {
        let s = constant_map_system();
        let table = enumerate_semigroup(&s, 10).unwrap();
        assert_eq!(table.len(), 1);
        let walk = walk_structure(&table);
        assert!(walk.recurrent[0]);
    }

    #[test]
    fn vinokourov_generates_the_two_element_group() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        let table = enumerate_semigroup(&s, 10).unwrap();
        assert_eq!(table.len(), 2);
        assert!(table.position_of(&MapElement::identity(2)).is_some());
        let walk = walk_structure(&table);
        // a group is one recurrent class
        assert_eq!(walk.scc.count, 1);
        assert!(walk.recurrent.iter().all(|&r| r));
    }

    #[test]
    fn word_for_reproduces_elements() {
        for name in ["non-h-example", "counterexample-truncated(4)"] {
            let s = catalog::builtin(name).unwrap().system;
            let table = enumerate_semigroup(&s, 100_000).unwrap();
            for idx in 0..table.len() {
                let word = table.word_for(idx);
                assert_eq!(&s.compose_word(&word), table.element(idx), "{name} #{idx}");
            }
        }
    }

    #[test]
    fn cap_is_an_error_not_a_truncation() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        let err = enumerate_semigroup(&s, 3).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 3, .. }));
    }

    #[test]
    fn non_h_example_contains_the_reference_elements() {
        let b = catalog::builtin("non-h-example").unwrap();
        let table = enumerate_semigroup(&b.system, 100_000).unwrap();
        for map in b.semigroup_reference.as_deref().unwrap() {
            assert!(table.position_of(map).is_some(), "missing {map:?}");
        }
        // recurrent elements all have image size 3
        let walk = walk_structure(&table);
        for s in 0..table.len() {
            if walk.recurrent[s] {
                assert_eq!(table.element(s).image_mask().count_ones(), 3);
            }
        }
    }

    #[test]
    fn prop10_on_the_builtins() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        let r = check_prop10(&s, 1000).unwrap();
        assert!(r.ok);
        assert_eq!(r.m, 2);
        assert_eq!(r.min_image_size, 2);

        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let r = check_prop10(&s, 100_000).unwrap();
        assert!(r.ok);
        assert_eq!(r.m, 1);
        assert!(r.details.iter().all(|d| d.image.len() == 1));

        let s = catalog::builtin("non-h-example").unwrap().system;
        let r = check_prop10(&s, 100_000).unwrap();
        assert!(r.ok);
        assert_eq!(r.m, 3);
    }

    #[test]
    fn prop10_refuses_periodic_kernels() {
        let states = StateSpace::new(vec!["a".into(), "b".into()]).unwrap();
        let s = RandomMapSystem::new(
            states,
            vec![NamedMap {
                name: "swap".into(),
                map: MapElement::from_table(&[1, 0]),
                weight: rat(1, 1),
            }],
        )
        .unwrap();
        assert!(matches!(
            check_prop10(&s, 100),
            Err(Error::Periodic { period: 2 })
        ));
    }

    #[test]
    fn backward_walk_on_constant_map_stabilizes_immediately() {
        let s = constant_map_system();
        for seed in 0..5 {
            let t = sample_backward_walk(&s, seed, 10);
            assert_eq!(t.stabilization_index, Some(1));
            assert_eq!(t.limit_image(), Some(vec![1]));
        }
    }

    #[test]
    fn backward_walk_on_bijections_stabilizes_at_zero() {
        let s = catalog::builtin("vinokourov").unwrap().system;
        let t = sample_backward_walk(&s, 7, 10);
        assert_eq!(t.stabilization_index, Some(0));
        assert_eq!(t.limit_image(), Some(vec![0, 1]));
        assert!(t.word.is_empty());
    }

    #[test]
    fn backward_walk_truncated_counterexample() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let t = sample_backward_walk(&s, 42, 10_000);
        assert!(t.stabilization_index.is_some());
        let r0 = t.limit_image().unwrap();
        assert_eq!(r0.len(), 1, "limit image must have the minimal rank");
    }

    #[test]
    fn backward_walk_invariants_across_seeds() {
        let s = catalog::builtin("non-h-example").unwrap().system;
        for seed in 0..100u64 {
            let t = sample_backward_walk(&s, seed, 1000);
            // image chain is nonincreasing under inclusion
            for w in t.images.windows(2) {
                assert_eq!(w[0] & w[1], w[1], "images must be nested");
            }
            // deterministic replay reproduces the final image
            let replayed = t.replay(&s);
            assert_eq!(replayed.image_mask(), *t.images.last().unwrap());
            // stabilized traces carry exactly M pairwise non-accordable states
            let n = t.stabilization_index.expect("desk system stabilizes");
            let r0 = t.limit_image().unwrap();
            assert_eq!(r0.len(), 3);
            let relation = accord::accordability_relation(&s);
            for (i, &x) in r0.iter().enumerate() {
                for &y in &r0[i + 1..] {
                    assert!(!relation[x][y]);
                }
            }
            assert_eq!(t.images[n].count_ones() as usize, t.target_rank);
        }
    }

    #[test]
    fn backward_walk_is_reproducible() {
        let s = catalog::builtin("counterexample-truncated(4)")
            .unwrap()
            .system;
        let a = sample_backward_walk(&s, 99, 1000);
        let b = sample_backward_walk(&s, 99, 1000);
        assert_eq!(a.word, b.word);
        assert_eq!(a.images, b.images);
    }
}
