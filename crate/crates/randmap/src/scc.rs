//! Strongly connected components (iterative Tarjan) and terminal-class
//! detection for the digraphs used throughout: kernel supports, coupled
//! kernels on pairs, and the right-multiplication walk on the semigroup.

/// Component assignment: `comp[v]` is the component id of node `v`.
/// Ids are numbered in reverse topological order of the condensation
/// (a component only has edges into components with smaller ids).
#[derive(Debug, Clone)]
pub struct Scc {
    pub comp: Vec<u32>,
    pub count: usize,
}

pub fn tarjan(adj: &[Vec<u32>]) -> Scc {
    let n = adj.len();
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![u32::MAX; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0u32;
    // (node, next child position); explicit stack instead of recursion
    let mut call: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != u32::MAX {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child < adj[v as usize].len() {
                let w = adj[v as usize][*child];
                *child += 1;
                if index[w as usize] == u32::MAX {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if let Some(&mut (parent, _)) = call.last_mut() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp[w as usize] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    Scc {
        comp,
        count: count as usize,
    }
}

/// For each component: true when no edge leaves it. On a finite chain the
/// stationary laws are exactly those supported on terminal components.
pub fn terminal_flags(adj: &[Vec<u32>], scc: &Scc) -> Vec<bool> {
    let mut terminal = vec![true; scc.count];
    for (v, targets) in adj.iter().enumerate() {
        for &w in targets {
            if scc.comp[v] != scc.comp[w as usize] {
                terminal[scc.comp[v] as usize] = false;
            }
        }
    }
    terminal
}

/// Components as sorted lists of node indices, ordered by component id.
pub fn component_lists(scc: &Scc) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); scc.count];
    for (v, &c) in scc.comp.iter().enumerate() {
        lists[c as usize].push(v);
    }
    lists
}
