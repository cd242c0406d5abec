//! Strongly connected components (iterative Tarjan) and a deterministic
//! topological order of the condensation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Components of the digraph given as adjacency lists; each component is
/// sorted ascending, components come out in reverse topological order.
pub fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Components of `adj` in topological order (edges point forward), ties
/// broken by the smallest vertex in each component.
pub fn condensation_order(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = tarjan(adj);
    let mut comp_of = vec![0; adj.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut indegree = vec![0usize; comps.len()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            let (a, b) = (comp_of[v], comp_of[w]);
            if a != b && !out[a].contains(&b) {
                out[a].push(b);
                indegree[b] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = comps
        .iter()
        .enumerate()
        .filter(|(c, _)| indegree[*c] == 0)
        .map(|(c, comp)| Reverse((comp[0], c)))
        .collect();
    let mut order = Vec::with_capacity(comps.len());
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(comps[c].clone());
        for &d in &out[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse((comps[d][0], d)));
            }
        }
    }
    order
}
