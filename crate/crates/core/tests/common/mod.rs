#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeSet, VecDeque};

use freefold::graphs::Graph;
use freefold::words::{Endomorphism, NielsenKind, Word};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A letter sequence, not necessarily reduced.
pub fn random_letters(rng: &mut impl Rng, rank: usize, len: usize) -> Vec<i32> {
    (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=rank as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect()
}

pub fn random_reduced(rng: &mut impl Rng, rank: usize, len: usize) -> Vec<i32> {
    let mut w: Vec<i32> = Vec::with_capacity(len);
    while w.len() < len {
        let x = random_letters(rng, rank, 1)[0];
        if w.last() != Some(&-x) {
            w.push(x);
        }
    }
    w
}

pub fn word(letters: &[i32], rank: usize) -> Word {
    Word::reduce(letters, rank).unwrap()
}

pub fn random_nielsen(rng: &mut impl Rng, rank: usize) -> Endomorphism {
    let kind = *NielsenKind::ALL.choose(rng).unwrap();
    let i = rng.gen_range(1..=rank);
    let mut j = rng.gen_range(1..=rank);
    while j == i {
        j = rng.gen_range(1..=rank);
    }
    Endomorphism::nielsen(kind, i, j, rank).unwrap()
}

/// Composition of `steps` random elementary automorphisms.
pub fn random_automorphism(rng: &mut impl Rng, rank: usize, steps: usize) -> Endomorphism {
    (0..steps).fold(Endomorphism::identity(rank), |acc, _| random_nielsen(rng, rank).compose(&acc).unwrap())
}

pub fn random_endomorphism(rng: &mut impl Rng, rank: usize, max_len: usize) -> Endomorphism {
    let images = (0..rank)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            word(&random_letters(rng, rank, len), rank)
        })
        .collect();
    Endomorphism::new(images).unwrap()
}

/// A connected graph: a random tree plus `extra` random edges.
pub fn random_connected_graph(rng: &mut impl Rng, vertices: usize, extra: usize) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..vertices).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra {
        edges.push((rng.gen_range(0..vertices), rng.gen_range(0..vertices)));
    }
    edges.shuffle(rng);
    Graph::new(vertices, &edges).unwrap()
}

/// A transitive action of `F_rank` on `0..degree`: one permutation per
/// generator.
pub fn random_transitive_action(rng: &mut impl Rng, rank: usize, degree: usize) -> Vec<Vec<usize>> {
    loop {
        let perms: Vec<Vec<usize>> = (0..rank)
            .map(|_| {
                let mut p: Vec<usize> = (0..degree).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        if orbit_of_zero(&perms).len() == degree {
            return perms;
        }
    }
}

fn act(perms: &[Vec<usize>], point: usize, letter: i32) -> usize {
    let p = &perms[(letter.unsigned_abs() - 1) as usize];
    if letter > 0 {
        p[point]
    } else {
        p.iter().position(|&q| q == point).unwrap()
    }
}

fn orbit_of_zero(perms: &[Vec<usize>]) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([0]);
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for p in perms {
            if seen.insert(p[x]) {
                queue.push_back(p[x]);
            }
        }
    }
    seen
}

/// Whether `w` fixes point 0 under the action (membership in the stabilizer).
pub fn fixes_zero(perms: &[Vec<usize>], w: &[i32]) -> bool {
    w.iter().fold(0, |x, &l| act(perms, x, l)) == 0
}

/// Schreier generators of the stabilizer of 0: one per non-tree edge of
/// the coset graph, read as tree path, edge, tree path back.
pub fn stabilizer_generators(perms: &[Vec<usize>]) -> Vec<Vec<i32>> {
    let degree = perms[0].len();
    let mut path: Vec<Option<Vec<i32>>> = vec![None; degree];
    path[0] = Some(vec![]);
    // tree edges as (point, generator) with the generator acting positively
    let mut tree = BTreeSet::new();
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for g in 1..=perms.len() as i32 {
            for l in [g, -g] {
                let y = act(perms, x, l);
                if path[y].is_none() {
                    let mut p = path[x].clone().unwrap();
                    p.push(l);
                    path[y] = Some(p);
                    tree.insert(if l > 0 { (x, g) } else { (y, g) });
                    queue.push_back(y);
                }
            }
        }
    }
    let mut gens = Vec::new();
    for x in 0..degree {
        for g in 1..=perms.len() as i32 {
            if tree.contains(&(x, g)) {
                continue;
            }
            let y = act(perms, x, g);
            let mut w = path[x].clone().unwrap();
            w.push(g);
            w.extend(path[y].as_ref().unwrap().iter().rev().map(|&l| -l));
            gens.push(oracle::free_reduce(&w));
        }
    }
    gens
}
