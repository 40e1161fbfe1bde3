//! Accordability of state pairs and the determination criterion.
//!
//! Two states are accordable when some composite of the system's maps sends
//! both to the same point; equivalently, the merged sink is reachable from
//! the pair in the pair automaton. Whether the innovations determine the
//! chain is an equivalence between three finite computations, all exposed
//! here: every pair accordable, the coupled kernel recurrent only on the
//! diagonal, and minimal image rank one. `innovations_determine` runs all
//! three and insists they agree.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::kernel::{build_kernel, classify_kernel, support_components};
use crate::scc;
use crate::subsets::{self, RankReport};
use crate::system::RandomMapSystem;

/// Unordered pairs `{x,y}`, `x < y`, plus a merged sink; edges apply one map
/// to both coordinates.
pub struct PairGraph {
    d: usize,
    /// `edges[pair * map_count + h]` = target pair id, or `merged_id`.
    edges: Vec<u32>,
    map_count: usize,
}

impl PairGraph {
    pub fn new(system: &RandomMapSystem) -> Self {
        let d = system.d();
        let pairs = d * (d - 1) / 2;
        let k = system.map_count();
        let mut edges = vec![0u32; pairs * k];
        for x in 0..d {
            for y in (x + 1)..d {
                let p = pair_id(d, x, y);
                for (i, m) in system.maps().iter().enumerate() {
                    let (a, b) = (m.map.apply(x), m.map.apply(y));
                    edges[p * k + i] = if a == b {
                        pairs as u32 // merged sink
                    } else {
                        pair_id(d, a.min(b), a.max(b)) as u32
                    };
                }
            }
        }
        PairGraph {
            d,
            edges,
            map_count: k,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    pub fn merged_id(&self) -> usize {
        self.pair_count()
    }

    pub fn target(&self, pair: usize, map: usize) -> usize {
        self.edges[pair * self.map_count + map] as usize
    }

    /// Pairs `{x,y}` in id order.
    pub fn pair_states(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.pair_count());
        for x in 0..self.d {
            for y in (x + 1)..self.d {
                out.push((x, y));
            }
        }
        out
    }
}

fn pair_id(d: usize, x: usize, y: usize) -> usize {
    debug_assert!(x < y && y < d);
    x * (2 * d - x - 1) / 2 + (y - x - 1)
}

/// Verdict for one pair, with a shortest merging word when accordable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Accordability {
    pub verdict: bool,
    /// Application order; `None` when not accordable, empty for `x == y`.
    pub witness: Option<Vec<usize>>,
}

/// Breadth-first search from `{x,y}` to the merged sink; maps are tried in
/// index order, so the witness is the lexicographically first shortest
/// merging word.
pub fn accordable(system: &RandomMapSystem, x: usize, y: usize) -> Result<Accordability> {
    let d = system.d();
    if x >= d || y >= d {
        return Err(Error::Unsupported(format!(
            "state index out of range: {} (d = {d})",
            x.max(y)
        )));
    }
    if x == y {
        return Ok(Accordability {
            verdict: true,
            witness: Some(Vec::new()),
        });
    }
    let graph = PairGraph::new(system);
    let start = pair_id(d, x.min(y), x.max(y));
    let merged = graph.merged_id();
    let mut parent: Vec<Option<(u32, u8)>> = vec![None; merged + 1];
    parent[start] = Some((start as u32, u8::MAX));
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for h in 0..system.map_count() {
            let q = graph.target(p, h);
            if parent[q].is_none() {
                parent[q] = Some((p as u32, h as u8));
                if q == merged {
                    let mut word = Vec::new();
                    let mut cursor = q;
                    while cursor != start {
                        let (prev, gen) = parent[cursor].unwrap();
                        word.push(gen as usize);
                        cursor = prev as usize;
                    }
                    word.reverse();
                    return Ok(Accordability {
                        verdict: true,
                        witness: Some(word),
                    });
                }
                queue.push_back(q);
            }
        }
    }
    Ok(Accordability {
        verdict: false,
        witness: None,
    })
}

/// Full relation by one backward reachability from the merged sink.
pub fn accordability_relation(system: &RandomMapSystem) -> Vec<Vec<bool>> {
    let d = system.d();
    let graph = PairGraph::new(system);
    let merged = graph.merged_id();
    // reverse adjacency over pair nodes
    let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); merged + 1];
    for p in 0..graph.pair_count() {
        for h in 0..system.map_count() {
            reverse[graph.target(p, h)].push(p as u32);
        }
    }
    let mut reachable = vec![false; merged + 1];
    reachable[merged] = true;
    let mut queue = VecDeque::from([merged]);
    while let Some(q) = queue.pop_front() {
        for &p in &reverse[q] {
            if !reachable[p as usize] {
                reachable[p as usize] = true;
                queue.push_back(p as usize);
            }
        }
    }
    let mut relation = vec![vec![false; d]; d];
    for x in 0..d {
        relation[x][x] = true;
    }
    for (p, (x, y)) in graph.pair_states().into_iter().enumerate() {
        if reachable[p] {
            relation[x][y] = true;
            relation[y][x] = true;
        }
    }
    relation
}

/// The accordability relation together with a maximum pairwise
/// non-accordable witness set of size `m`.
#[derive(Debug, Clone)]
pub struct AccordReport {
    pub relation: Vec<Vec<bool>>,
    pub m: usize,
    pub witness_set: Vec<usize>,
    /// Shortest merging word per accordable pair `(x, y)`, `x < y`; filled
    /// only on request.
    pub witnesses: Option<BTreeMap<(usize, usize), Vec<usize>>>,
}

/// Maximum clique in the complement of the relation (exact search).
pub fn max_non_accordable(system: &RandomMapSystem) -> AccordReport {
    let relation = accordability_relation(system);
    let d = system.d();
    let mut complement = vec![0u32; d];
    for x in 0..d {
        for y in 0..d {
            if x != y && !relation[x][y] {
                complement[x] |= 1 << y;
            }
        }
    }
    let mask = crate::clique::max_clique_mask(&complement);
    AccordReport {
        relation,
        m: mask.count_ones() as usize,
        witness_set: crate::clique::mask_members(mask),
        witnesses: None,
    }
}

/// `max_non_accordable` plus a merging word for every accordable pair.
pub fn accord_report_with_witnesses(system: &RandomMapSystem) -> Result<AccordReport> {
    let mut report = max_non_accordable(system);
    let mut witnesses = BTreeMap::new();
    for x in 0..system.d() {
        for y in (x + 1)..system.d() {
            if report.relation[x][y] {
                let a = accordable(system, x, y)?;
                witnesses.insert((x, y), a.witness.expect("accordable pair has witness"));
            }
        }
    }
    report.witnesses = Some(witnesses);
    Ok(report)
}

/// Outcome of the coupled-kernel check: does every terminal class of the
/// product chain sit inside the diagonal?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalCheck {
    pub holds: bool,
    /// Off-diagonal ordered pairs living in terminal classes.
    pub offenders: Vec<(usize, usize)>,
}

/// Builds the support digraph of the coupled kernel on all ordered pairs
/// (diagonal included), takes strongly connected components, and requires
/// every terminal component to sit inside the diagonal.
pub fn diagonal_recurrence_check(system: &RandomMapSystem) -> DiagonalCheck {
    let d = system.d();
    let n = d * d;
    let adj: Vec<Vec<u32>> = (0..n)
        .map(|id| {
            let (x, y) = (id / d, id % d);
            let mut targets: Vec<u32> = system
                .maps()
                .iter()
                .map(|m| (m.map.apply(x) * d + m.map.apply(y)) as u32)
                .collect();
            targets.sort_unstable();
            targets.dedup();
            targets
        })
        .collect();
    let components = scc::tarjan(&adj);
    let terminal = scc::terminal_flags(&adj, &components);
    let mut offenders = Vec::new();
    for id in 0..n {
        let (x, y) = (id / d, id % d);
        if x != y && terminal[components.comp[id] as usize] {
            offenders.push((x, y));
        }
    }
    DiagonalCheck {
        holds: offenders.is_empty(),
        offenders,
    }
}

/// Minimal image cardinality over the generated semigroup; rank 1 means some
/// composite is constant. Re-exported here because it is one leg of the
/// determination equivalence.
pub fn min_rank(system: &RandomMapSystem) -> RankReport {
    subsets::min_rank(system)
}

/// The three equivalent determination conditions, each computed by its own
/// route, plus the common verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Determination {
    pub determined: bool,
    pub pairwise_accordable: bool,
    pub diagonal_only: bool,
    pub min_rank: RankReport,
}

/// Requires an irreducible kernel (the equivalence assumes it). The three
/// sub-verdicts must agree; disagreement is reported as an internal failure,
/// never silently resolved.
pub fn innovations_determine(system: &RandomMapSystem) -> Result<Determination> {
    let kernel = build_kernel(system);
    let class = classify_kernel(&kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(&kernel),
        });
    }
    let relation = accordability_relation(system);
    let pairwise = relation
        .iter()
        .enumerate()
        .all(|(x, row)| row.iter().enumerate().all(|(y, &r)| r || x == y));
    let diag = diagonal_recurrence_check(system);
    let rank = min_rank(system);
    let rank_one = rank.rank == 1;
    if pairwise != diag.holds || pairwise != rank_one {
        return Err(Error::Inconsistent(format!(
            "determination routes disagree: pairwise_accordable={pairwise}, \
             diagonal_only={}, min_rank={}",
            diag.holds, rank.rank
        )));
    }
    Ok(Determination {
        determined: pairwise,
        pairwise_accordable: pairwise,
        diagonal_only: diag.holds,
        min_rank: rank,
    })
}
