//! DOT renderings of the pair automaton, the accordability relation, and the
//! semigroup walk (components colored, terminal components marked).

use crate::accord::PairGraph;
use crate::semigroup::{SemigroupTable, WalkGraph};
use crate::system::RandomMapSystem;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Pair automaton with the merged sink; edges labeled by map name.
pub fn pair_graph_dot(system: &RandomMapSystem) -> String {
    let graph = PairGraph::new(system);
    let pairs = graph.pair_states();
    let mut out = String::from("digraph pairs {\n  rankdir=LR;\n");
    let name = |p: usize| -> String {
        if p == graph.merged_id() {
            "MERGED".to_string()
        } else {
            let (x, y) = pairs[p];
            format!(
                "{{{},{}}}",
                system.states().label(x),
                system.states().label(y)
            )
        }
    };
    out.push_str("  node [shape=ellipse];\n");
    out.push_str(&format!(
        "  {} [shape=doublecircle];\n",
        quote(&name(graph.merged_id()))
    ));
    for p in 0..graph.pair_count() {
        for h in 0..system.map_count() {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                quote(&name(p)),
                quote(&name(graph.target(p, h))),
                quote(system.map_name(h)),
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Undirected accordability relation (off-diagonal edges only).
pub fn relation_dot(system: &RandomMapSystem, relation: &[Vec<bool>]) -> String {
    let mut out = String::from("graph accordability {\n");
    for x in 0..system.d() {
        out.push_str(&format!("  {};\n", quote(system.states().label(x))));
    }
    for x in 0..system.d() {
        for y in (x + 1)..system.d() {
            if relation[x][y] {
                out.push_str(&format!(
                    "  {} -- {};\n",
                    quote(system.states().label(x)),
                    quote(system.states().label(y)),
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

const PALETTE: [&str; 8] = [
    "lightblue",
    "lightyellow",
    "lightpink",
    "lightgreen",
    "lavender",
    "wheat",
    "mistyrose",
    "honeydew",
];

/// Right-multiplication walk on the semigroup: one node per element (labeled
/// by a witness word), filled by component, terminal components boxed.
pub fn walk_graph_dot(
    system: &RandomMapSystem,
    table: &SemigroupTable,
    walk: &WalkGraph,
) -> String {
    let mut out = String::from("digraph walk {\n  rankdir=LR;\n  node [style=filled];\n");
    let label = |s: usize| -> String {
        let names = system.word_names(&table.word_for(s));
        names.join("·")
    };
    for s in 0..table.len() {
        let comp = walk.scc.comp[s] as usize;
        let color = PALETTE[comp % PALETTE.len()];
        let shape = if walk.terminal[comp] {
            "box"
        } else {
            "ellipse"
        };
        out.push_str(&format!(
            "  {} [fillcolor={color}, shape={shape}];\n",
            quote(&label(s))
        ));
    }
    for s in 0..table.len() {
        for h in 0..system.map_count() {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                quote(&label(s)),
                quote(&label(table.right_edge(s, h))),
                quote(system.map_name(h)),
            ));
        }
    }
    out.push_str("}\n");
    out
}
