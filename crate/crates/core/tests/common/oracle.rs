//! Independent primitivity oracle: search over Whitehead automorphisms,
//! using only non-length-increasing moves. Words are plain `i32` letter
//! vectors (`1 = a`, `-1 = A`, ...) and nothing from the library is used.

use std::collections::{BTreeSet, VecDeque};

pub fn free_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn cyclic_reduce(w: &[i32]) -> Vec<i32> {
    let mut r = free_reduce(w);
    while r.len() >= 2 && r[0] == -r[r.len() - 1] {
        r.pop();
        r.remove(0);
    }
    r
}

/// Least rotation, found by comparing every rotation.
fn canonical(w: &[i32]) -> Vec<i32> {
    (0..w.len().max(1))
        .map(|i| {
            let mut r = w[i.min(w.len())..].to_vec();
            r.extend_from_slice(&w[..i.min(w.len())]);
            r
        })
        .min()
        .unwrap_or_default()
}

/// Images of the generators `1..=rank` under each type-2 Whitehead
/// automorphism `(A, a)`: `x -> a^-1? x a?` depending on whether `x^-1`
/// and `x` lie in `A`.
pub fn whitehead_automorphisms(rank: usize) -> Vec<Vec<Vec<i32>>> {
    let rank = rank as i32;
    let mut autos = Vec::new();
    for a in (1..=rank).flat_map(|i| [i, -i]) {
        let others: Vec<i32> = (1..=rank).filter(|&i| i != a.abs()).flat_map(|i| [i, -i]).collect();
        for mask in 0u32..(1 << others.len()) {
            let set: BTreeSet<i32> =
                others.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &x)| x).collect();
            let images = (1..=rank)
                .map(|x| {
                    if x == a.abs() {
                        return vec![x];
                    }
                    let mut img = Vec::new();
                    if set.contains(&-x) {
                        img.push(-a);
                    }
                    img.push(x);
                    if set.contains(&x) {
                        img.push(a);
                    }
                    img
                })
                .collect();
            autos.push(images);
        }
    }
    autos
}

fn apply(images: &[Vec<i32>], w: &[i32]) -> Vec<i32> {
    let mut out = Vec::new();
    for &x in w {
        let img = &images[(x.unsigned_abs() - 1) as usize];
        if x > 0 {
            out.extend_from_slice(img);
        } else {
            out.extend(img.iter().rev().map(|&y| -y));
        }
    }
    canonical(&cyclic_reduce(&out))
}

fn total(state: &[Vec<i32>]) -> usize {
    state.iter().map(Vec::len).sum()
}

/// A state of least total cyclic length in the orbit of `words`, reached by
/// exploring, at each length, every state reachable without increasing it.
pub fn minimize(words: &[Vec<i32>], rank: usize) -> Vec<Vec<i32>> {
    let autos = whitehead_automorphisms(rank);
    let mut current: Vec<Vec<i32>> = words.iter().map(|w| canonical(&cyclic_reduce(w))).collect();
    'descend: loop {
        let bound = total(&current);
        let mut seen = BTreeSet::from([current.clone()]);
        let mut queue = VecDeque::from([current.clone()]);
        while let Some(state) = queue.pop_front() {
            for images in &autos {
                let next: Vec<Vec<i32>> = state.iter().map(|w| apply(images, w)).collect();
                let len = total(&next);
                if len < bound {
                    current = next;
                    continue 'descend;
                }
                if len == bound && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        return current;
    }
}

/// Whether the conjugacy classes form a partial free basis.
pub fn is_partial_basis(words: &[Vec<i32>], rank: usize) -> bool {
    if words.iter().any(|w| cyclic_reduce(w).is_empty()) {
        return false;
    }
    let min = minimize(words, rank);
    let indices: BTreeSet<i32> = min.iter().map(|w| w[0].abs()).collect();
    min.iter().all(|w| w.len() == 1) && indices.len() == min.len()
}

pub fn is_primitive(word: &[i32], rank: usize) -> bool {
    is_partial_basis(&[word.to_vec()], rank)
}

/// Every cyclically reduced word of length `1..=max_len` over `rank`
/// generators.
pub fn cyclically_reduced_words(rank: usize, max_len: usize) -> Vec<Vec<i32>> {
    let letters: Vec<i32> = (1..=rank as i32).flat_map(|i| [i, -i]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &x in &letters {
                if w.last() != Some(&-x) {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().filter(|w| w.len() == 1 || w[0] != -w[w.len() - 1]).cloned());
        layer = next;
    }
    out
}
