//! Exact maximum clique on small graphs given as bitmask adjacency.
//!
//! The scan is exhaustive over the subset lattice, which is fine at the state
//! caps used here and makes the returned witness deterministic: the
//! numerically smallest mask among maximum cliques wins.

/// `adj[v]` holds the neighbor mask of `v` (no self bit). Returns the mask of
/// a maximum clique.
pub fn max_clique_mask(adj: &[u32]) -> u32 {
    let n = adj.len();
    assert!(n <= 24, "clique search capped at 24 vertices");
    let mut best: u32 = if n == 0 { 0 } else { 1 };
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() <= best.count_ones() {
            continue;
        }
        if is_clique(adj, mask) {
            best = mask;
        }
    }
    best
}

fn is_clique(adj: &[u32], mask: u32) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let required = mask & !(1 << v);
        if adj[v] & required != required {
            return false;
        }
    }
    true
}

pub fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_plus_pendant() {
        // 0-1-2 triangle, 3 attached to 2 only
        let adj = vec![0b0110, 0b0101, 0b1011, 0b0100];
        let best = max_clique_mask(&adj);
        assert_eq!(mask_members(best), vec![0, 1, 2]);
    }

    #[test]
    fn empty_graph_yields_single_vertex() {
        let adj = vec![0, 0, 0];
        assert_eq!(max_clique_mask(&adj).count_ones(), 1);
    }

    #[test]
    fn tie_break_is_smallest_mask() {
        // two disjoint edges: {0,1} and {2,3}; smaller mask wins
        let adj = vec![0b0010, 0b0001, 0b1000, 0b0100];
        assert_eq!(mask_members(max_clique_mask(&adj)), vec![0, 1]);
    }

    #[test]
    fn brute_force_agreement_on_random_graphs() {
        // independent oracle: check every subset's clique size directly
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let n = 2 + (next() % 7) as usize;
            let mut adj = vec![0u32; n];
            for u in 0..n {
                for v in (u + 1)..n {
                    if next() % 2 == 0 {
                        adj[u] |= 1 << v;
                        adj[v] |= 1 << u;
                    }
                }
            }
            let mut oracle = 0;
            for mask in 1u32..(1 << n) {
                if is_clique(&adj, mask) {
                    oracle = oracle.max(mask.count_ones());
                }
            }
            assert_eq!(max_clique_mask(&adj).count_ones(), oracle);
        }
    }
}
