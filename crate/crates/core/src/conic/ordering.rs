//! Fill-reducing ordering for the KKT factorization.
//!
//! Plain minimum degree on an explicit elimination graph. Degrees are kept
//! in a lazy heap; stale entries are skipped when popped. Ties go to the
//! lower index, so the ordering is a deterministic function of the pattern.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

/// Merges two sorted lists, skipping `skip_a` and `skip_b`.
fn merge_sorted(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let push = |v: usize, out: &mut Vec<usize>| {
        if v != skip_a && v != skip_b && out.last() != Some(&v) {
            out.push(v);
        }
    };
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            push(a[i], &mut out);
            i += 1;
        } else {
            push(b[j], &mut out);
            j += 1;
        }
    }
    for &v in &a[i..] {
        push(v, &mut out);
    }
    for &v in &b[j..] {
        push(v, &mut out);
    }
    out
}

/// Minimum-degree permutation of a symmetric pattern given by its upper (or
/// lower, or full) triangle in CSC form. Returns `perm` with
/// `perm[new] = old`.
pub(crate) fn minimum_degree(n: usize, colptr: &[usize], rowind: &[usize]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for j in 0..n {
        for &i in &rowind[colptr[j]..colptr[j + 1]] {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut eliminated = alloc::vec![false; n];
    let mut perm = Vec::with_capacity(n);

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        perm.push(v);
        let nbrs = core::mem::take(&mut adj[v]);
        for &u in &nbrs {
            let merged = merge_sorted(&adj[u], &nbrs, v, u);
            adj[u] = merged;
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    debug_assert_eq!(perm.len(), n);
    perm
}

/// Inverse of a permutation.
pub(crate) fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = alloc::vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
