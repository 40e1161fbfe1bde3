//! Finite state spaces, deterministic maps, and weighted random-map systems.
//!
//! A system is a finite state space `E` together with the essential set of
//! maps `H`: every distinct table that the innovation can realize, carrying an
//! exact positive rational weight. Duplicate tables in the input are merged at
//! load time with summed weights, because every structural verdict downstream
//! depends only on which maps have positive probability, not on their exact
//! weights.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{format_rat, parse_rat, Rat};

/// Default bound on the state count; subset-lattice analyses are `2^d`.
pub const DEFAULT_STATE_CAP: usize = 16;
/// Hard bound past which construction always fails.
pub const MAX_STATE_CAP: usize = 24;

/// Ordered list of distinct state labels; states are addressed by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Document("state space is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::Document(format!("duplicate state label `{l}`")));
            }
        }
        Ok(StateSpace { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A total map `E -> E` as a lookup table over state indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MapElement {
    table: Vec<u8>,
}

impl MapElement {
    /// Build from a table of target indices; every entry must be `< d <= 255`.
    pub fn from_table(table: &[usize]) -> Self {
        let d = table.len();
        assert!(d <= MAX_STATE_CAP, "map table too large");
        let table = table
            .iter()
            .map(|&y| {
                assert!(y < d, "map table entry out of range");
                y as u8
            })
            .collect();
        MapElement { table }
    }

    pub fn identity(d: usize) -> Self {
        MapElement::from_table(&(0..d).collect::<Vec<_>>())
    }

    pub fn constant(d: usize, value: usize) -> Self {
        MapElement::from_table(&vec![value; d])
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    /// Composition `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        MapElement {
            table: other
                .table
                .iter()
                .map(|&x| self.table[x as usize])
                .collect(),
        }
    }

    /// Image of the whole state space as a bitmask.
    pub fn image_mask(&self) -> u32 {
        self.table.iter().fold(0u32, |m, &y| m | (1 << y))
    }

    pub fn image(&self) -> Vec<usize> {
        mask_to_states(self.image_mask())
    }

    /// `Some(c)` when the map is constant with value `c`.
    pub fn is_constant(&self) -> Option<usize> {
        let first = self.table[0];
        self.table
            .iter()
            .all(|&y| y == first)
            .then_some(first as usize)
    }

    pub fn is_bijection(&self) -> bool {
        self.image_mask().count_ones() as usize == self.len()
    }

    pub fn table(&self) -> Vec<usize> {
        self.table.iter().map(|&y| y as usize).collect()
    }
}

impl fmt::Debug for MapElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, y) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{y}")?;
        }
        write!(f, "]")
    }
}

/// States of a bitmask in increasing index order.
pub fn mask_to_states(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

pub fn states_to_mask(states: &[usize]) -> u32 {
    states.iter().fold(0u32, |m, &x| m | (1 << x))
}

/// A map with its display name and exact sampling weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedMap {
    pub name: String,
    pub map: MapElement,
    pub weight: Rat,
}

/// A validated random-map system.
///
/// Invariants: all weights are positive and sum exactly to one, and map
/// tables are pairwise distinct (duplicates were merged at construction,
/// keeping the first name).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomMapSystem {
    states: StateSpace,
    maps: Vec<NamedMap>,
}

impl RandomMapSystem {
    pub fn new(states: StateSpace, maps: Vec<NamedMap>) -> Result<Self> {
        Self::new_with_cap(states, maps, DEFAULT_STATE_CAP)
    }

    pub fn new_with_cap(states: StateSpace, maps: Vec<NamedMap>, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_STATE_CAP);
        if states.len() > cap {
            return Err(Error::Document(format!(
                "state count {} exceeds cap {} (hard maximum {})",
                states.len(),
                cap,
                MAX_STATE_CAP
            )));
        }
        if maps.is_empty() {
            return Err(Error::Document("no maps given".into()));
        }
        let mut merged: Vec<NamedMap> = Vec::new();
        for m in maps {
            if m.map.len() != states.len() {
                return Err(Error::Document(format!(
                    "map `{}` is not a total function on the {} states",
                    m.name,
                    states.len()
                )));
            }
            if !m.weight.is_positive() {
                return Err(Error::Document(format!(
                    "map `{}` has non-positive weight {}",
                    m.name,
                    format_rat(&m.weight)
                )));
            }
            match merged.iter_mut().find(|e| e.map == m.map) {
                Some(existing) => existing.weight += m.weight,
                None => merged.push(m),
            }
        }
        let total: Rat = merged
            .iter()
            .fold(Rat::zero(), |acc, m| acc + m.weight.clone());
        if !total.is_one() {
            return Err(Error::Document(format!(
                "weights sum to {}, expected 1",
                format_rat(&total)
            )));
        }
        Ok(RandomMapSystem {
            states,
            maps: merged,
        })
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    /// Number of states `d`.
    pub fn d(&self) -> usize {
        self.states.len()
    }

    /// Number of distinct maps `|H|`.
    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[NamedMap] {
        &self.maps
    }

    pub fn map(&self, index: usize) -> &MapElement {
        &self.maps[index].map
    }

    pub fn map_name(&self, index: usize) -> &str {
        &self.maps[index].name
    }

    pub fn weight(&self, index: usize) -> &Rat {
        &self.maps[index].weight
    }

    /// Composite of a word in application order: `word[0]` is applied first.
    pub fn compose_word(&self, word: &[usize]) -> MapElement {
        let mut acc = MapElement::identity(self.d());
        for &i in word {
            acc = self.maps[i].map.compose(&acc);
        }
        acc
    }

    /// Composite of a word whose first entry is the newest innovation: each
    /// later entry is composed on the right (applied earlier in time).
    pub fn compose_newest_first(&self, word: &[usize]) -> MapElement {
        let mut acc = MapElement::identity(self.d());
        for &i in word {
            acc = acc.compose(&self.maps[i].map);
        }
        acc
    }

    /// Word of map names, for display.
    pub fn word_names(&self, word: &[usize]) -> Vec<String> {
        word.iter().map(|&i| self.maps[i].name.clone()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    states: Vec<String>,
    maps: Vec<MapDoc>,
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    name: String,
    weight: String,
    table: BTreeMap<String, String>,
}

/// Parse a system document (JSON) with the default state cap.
pub fn load_system(text: &str) -> Result<RandomMapSystem> {
    load_system_with_cap(text, DEFAULT_STATE_CAP)
}

pub fn load_system_with_cap(text: &str, cap: usize) -> Result<RandomMapSystem> {
    let doc: SystemDoc =
        serde_json::from_str(text).map_err(|e| Error::Document(format!("bad JSON: {e}")))?;
    let states = StateSpace::new(doc.states)?;
    let mut maps = Vec::new();
    for m in doc.maps {
        let weight =
            parse_rat(&m.weight).map_err(|e| Error::Document(format!("map `{}`: {e}", m.name)))?;
        let mut table = vec![usize::MAX; states.len()];
        for (from, to) in &m.table {
            let fi = states.index_of(from).ok_or_else(|| {
                Error::Document(format!("map `{}`: unknown source label `{from}`", m.name))
            })?;
            let ti = states.index_of(to).ok_or_else(|| {
                Error::Document(format!("map `{}`: unknown target label `{to}`", m.name))
            })?;
            table[fi] = ti;
        }
        if let Some(missing) = table.iter().position(|&t| t == usize::MAX) {
            return Err(Error::Document(format!(
                "map `{}` is not total: no entry for state `{}`",
                m.name,
                states.label(missing)
            )));
        }
        maps.push(NamedMap {
            name: m.name,
            map: MapElement::from_table(&table),
            weight,
        });
    }
    RandomMapSystem::new_with_cap(states, maps, cap)
}

/// Canonical document form; `load_system(serialize_system(s)) == s`.
pub fn serialize_system(system: &RandomMapSystem) -> String {
    let doc = SystemDoc {
        states: system.states.labels().to_vec(),
        maps: system
            .maps
            .iter()
            .map(|m| MapDoc {
                name: m.name.clone(),
                weight: format_rat(&m.weight),
                table: (0..system.d())
                    .map(|x| {
                        (
                            system.states.label(x).to_string(),
                            system.states.label(m.map.apply(x)).to_string(),
                        )
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    fn vinokourov_doc() -> &'static str {
        r#"{
            "states": ["-1", "1"],
            "maps": [
                {"name": "id",   "weight": "1/2", "table": {"-1": "-1", "1": "1"}},
                {"name": "swap", "weight": "1/2", "table": {"-1": "1", "1": "-1"}}
            ]
        }"#
    }

    #[test]
    fn load_vinokourov() {
        let s = load_system(vinokourov_doc()).unwrap();
        assert_eq!(s.d(), 2);
        assert_eq!(s.map_count(), 2);
        assert_eq!(s.map(0), &MapElement::identity(2));
        assert_eq!(s.map(1), &MapElement::from_table(&[1, 0]));
        assert_eq!(s.weight(0), &rat(1, 2));
    }

    #[test]
    fn single_identity_map_is_valid() {
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "id", "weight": "1", "table": {"a": "a", "b": "b"}}
        ]}"#;
        let s = load_system(text).unwrap();
        assert_eq!(s.map_count(), 1);
    }

    #[test]
    fn duplicate_tables_merge_with_summed_weights() {
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "first",  "weight": "1/3", "table": {"a": "b", "b": "a"}},
            {"name": "second", "weight": "2/3", "table": {"a": "b", "b": "a"}}
        ]}"#;
        let s = load_system(text).unwrap();
        assert_eq!(s.map_count(), 1);
        assert_eq!(s.weight(0), &rat(1, 1));
        assert_eq!(s.map_name(0), "first");
    }

    #[test]
    fn rejects_non_total_map() {
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "partial", "weight": "1", "table": {"a": "a"}}
        ]}"#;
        let err = load_system(text).unwrap_err();
        assert!(err.to_string().contains("not total"), "{err}");
    }

    #[test]
    fn rejects_bad_weights() {
        let zero = r#"{"states": ["a"], "maps": [
            {"name": "id", "weight": "0", "table": {"a": "a"}}
        ]}"#;
        assert!(load_system(zero).is_err());
        let short = r#"{"states": ["a", "b"], "maps": [
            {"name": "id", "weight": "1/2", "table": {"a": "a", "b": "b"}}
        ]}"#;
        let err = load_system(short).unwrap_err();
        assert!(err.to_string().contains("sum to 1/2"), "{err}");
    }

    #[test]
    fn rejects_unknown_and_duplicate_labels() {
        let unknown = r#"{"states": ["a"], "maps": [
            {"name": "m", "weight": "1", "table": {"a": "z"}}
        ]}"#;
        assert!(load_system(unknown).is_err());
        let dup = r#"{"states": ["a", "a"], "maps": [
            {"name": "m", "weight": "1", "table": {"a": "a"}}
        ]}"#;
        assert!(load_system(dup).is_err());
    }

    #[test]
    fn rejects_state_count_past_cap() {
        let labels: Vec<String> = (0..17).map(|i| i.to_string()).collect();
        let states = StateSpace::new(labels).unwrap();
        let id = MapElement::identity(17);
        let maps = vec![NamedMap {
            name: "id".into(),
            map: id,
            weight: rat(1, 1),
        }];
        assert!(RandomMapSystem::new(states.clone(), maps.clone()).is_err());
        assert!(RandomMapSystem::new_with_cap(states, maps, 20).is_ok());
    }

    #[test]
    fn round_trip_is_identity() {
        let s = load_system(vinokourov_doc()).unwrap();
        let text = serialize_system(&s);
        let s2 = load_system(&text).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn composition_order() {
        // word [a, b] applies a first: composite = b ∘ a
        let a = MapElement::from_table(&[1, 2, 0]);
        let b = MapElement::from_table(&[0, 0, 2]);
        let ba = b.compose(&a);
        assert_eq!(ba.apply(0), b.apply(a.apply(0)));
        let states = StateSpace::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        let sys = RandomMapSystem::new(
            states,
            vec![
                NamedMap {
                    name: "a".into(),
                    map: a.clone(),
                    weight: rat(1, 2),
                },
                NamedMap {
                    name: "b".into(),
                    map: b.clone(),
                    weight: rat(1, 2),
                },
            ],
        )
        .unwrap();
        assert_eq!(sys.compose_word(&[0, 1]), b.compose(&a));
        // newest-first word [a, b]: a is the newest, so composite = a ∘ b
        assert_eq!(sys.compose_newest_first(&[0, 1]), a.compose(&b));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_system() -> impl Strategy<Value = RandomMapSystem> {
            (2usize..=5, 1usize..=3).prop_flat_map(|(d, k)| {
                let tables = proptest::collection::vec(proptest::collection::vec(0..d, d), k);
                let numers = proptest::collection::vec(1u32..9, k);
                (tables, numers).prop_map(move |(tables, numers)| {
                    let total: u32 = numers.iter().sum();
                    let labels = (0..d).map(|i| format!("s{i}")).collect();
                    let maps = tables
                        .into_iter()
                        .zip(numers)
                        .enumerate()
                        .map(|(i, (t, n))| NamedMap {
                            name: format!("m{i}"),
                            map: MapElement::from_table(&t),
                            weight: rat(n as i64, total as i64),
                        })
                        .collect();
                    RandomMapSystem::new(StateSpace::new(labels).unwrap(), maps).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn serialize_load_round_trip(sys in arb_system()) {
                let text = serialize_system(&sys);
                let back = load_system(&text).unwrap();
                prop_assert_eq!(sys, back);
            }
        }
    }
}
