//! Strongly connected components (iterative lowlink search) and condensation.

use crate::order::Digraph;

/// Component id per vertex. Ids follow the order in which components are
/// completed, which is a reverse topological order of the condensation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub component_of: Vec<usize>,
    pub count: usize,
}

const UNSEEN: usize = usize::MAX;

pub fn strongly_connected_components(g: &Digraph) -> Components {
    let n = g.n();
    let adj = g.adjacency();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component_of = vec![UNSEEN; n];
    let mut count = 0;
    let mut next_index = 0;
    // Explicit call stack of (vertex, next edge position).
    let mut calls: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = calls.last_mut() {
            if *edge == 0 && index[v] == UNSEEN {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == UNSEEN {
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("vertex on stack");
                    on_stack[w] = false;
                    component_of[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Components { component_of, count }
}

/// Condensation: one vertex per component, deduplicated edges between components.
pub fn condensation(g: &Digraph, comps: &Components) -> Digraph {
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (comps.component_of[u], comps.component_of[v]))
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Digraph::from_edges(comps.count, edges).expect("component ids are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_is_one_component() {
        let g = Digraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let c = strongly_connected_components(&g);
        assert_eq!(c.count, 1);
        assert_eq!(c.component_of, vec![0, 0]);
    }

    #[test]
    fn path_gives_singletons_in_reverse_topological_order() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let c = strongly_connected_components(&g);
        assert_eq!(c.count, 3);
        assert_eq!(c.component_of, vec![2, 1, 0]);
        assert_eq!(condensation(&g, &c).edge_set(), vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn self_loop_and_long_chain() {
        let n = 200_000;
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        edges.push((5, 5));
        let g = Digraph::from_edges(n, edges).unwrap();
        let c = strongly_connected_components(&g);
        assert_eq!(c.count, 1);
    }
}
