//! Reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

/// Returns `perm` with `perm[new] = old`, computed per connected component
/// from a pseudo-peripheral start node. Self loops are ignored.
pub fn rcm_order(n: usize, row_ptr: &[usize], col_idx: &[usize]) -> Vec<usize> {
    let degree: Vec<usize> = (0..n)
        .map(|i| col_idx[row_ptr[i]..row_ptr[i + 1]].iter().filter(|&&j| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut level = vec![usize::MAX; n];

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, row_ptr, col_idx, &degree, &visited, &mut level);
        let first = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = first;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(
                col_idx[row_ptr[v]..row_ptr[v + 1]]
                    .iter()
                    .copied()
                    .filter(|&u| !visited[u]),
            );
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                order.push(u);
            }
        }
    }
    order.reverse();
    order
}

/// George-Liu style search: repeatedly restart the breadth-first search from a
/// minimum-degree node of the last level while the eccentricity grows.
fn pseudo_peripheral(
    seed: usize,
    row_ptr: &[usize],
    col_idx: &[usize],
    degree: &[usize],
    visited: &[bool],
    level: &mut [usize],
) -> usize {
    let mut start = seed;
    let mut ecc = 0usize;
    for _ in 0..8 {
        let (last, depth, touched) = bfs_levels(start, row_ptr, col_idx, visited, level);
        for &t in &touched {
            level[t] = usize::MAX;
        }
        let cand = last.into_iter().min_by_key(|&u| (degree[u], u)).unwrap_or(start);
        if depth <= ecc {
            break;
        }
        ecc = depth;
        start = cand;
    }
    start
}

fn bfs_levels(
    start: usize,
    row_ptr: &[usize],
    col_idx: &[usize],
    visited: &[bool],
    level: &mut [usize],
) -> (Vec<usize>, usize, Vec<usize>) {
    let mut queue = VecDeque::new();
    let mut touched = vec![start];
    level[start] = 0;
    queue.push_back(start);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &u in &col_idx[row_ptr[v]..row_ptr[v + 1]] {
            if !visited[u] && level[u] == usize::MAX {
                level[u] = level[v] + 1;
                touched.push(u);
                queue.push_back(u);
            }
        }
    }
    let last = touched.iter().copied().filter(|&u| level[u] == depth).collect();
    (last, depth, touched)
}
