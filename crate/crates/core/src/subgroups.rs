//! Stallings graphs of finitely generated subgroups of `F_n`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{unoriented, Graph, UnionFind};
use crate::morphisms::EdgeletMap;
use crate::words::{Letter, Word};

/// A based graph whose oriented edges carry letters, with no two edges at a
/// vertex carrying the same outgoing letter. Vertices are numbered
/// breadth-first from the base (which is vertex 0) following letter order,
/// and edges are sorted, so equal subgroups give equal values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StallingsGraph {
    rank: usize,
    graph: Graph,
    label: Vec<Letter>,
    /// `next[v][key]`: the oriented edge leaving `v` with letter key `key`.
    next: Vec<Vec<Option<usize>>>,
}

/// Result of an index computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Index {
    Finite(usize),
    Infinite,
}

/// Working state while folding: edges are stored as `(from, generator, to)`
/// with a positive generator.
struct Folding {
    uf: UnionFind,
    edges: Vec<(usize, usize, usize)>,
    alive: Vec<bool>,
}

impl Folding {
    /// All pairs of live edges that leave the same vertex with the same
    /// letter, in a fixed order.
    fn conflicts(&mut self, first_only: bool) -> Vec<(usize, usize)> {
        let mut seen: BTreeMap<(usize, usize, bool), usize> = BTreeMap::new();
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            if !self.alive[i] {
                continue;
            }
            let (from, generator, to) = self.edges[i];
            let ends = [(self.uf.find(from), generator, true), (self.uf.find(to), generator, false)];
            for key in ends {
                if let Some(&j) = seen.get(&key) {
                    out.push((j, i));
                    if first_only {
                        return out;
                    }
                } else {
                    seen.insert(key, i);
                }
            }
        }
        out
    }

    /// Identify edge `j` with edge `i`.
    fn fold(&mut self, i: usize, j: usize) {
        let (a_from, _, a_to) = self.edges[i];
        let (b_from, _, b_to) = self.edges[j];
        self.uf.union(a_from, b_from);
        self.uf.union(a_to, b_to);
        self.alive[j] = false;
    }
}

impl StallingsGraph {
    /// Wedge of loops spelling the words, folded to an immersion with the
    /// first conflict folded each time.
    pub fn build(words: &[Word], rank: usize) -> Result<Self> {
        Self::fold_words(words, rank, None)
    }

    /// As [`build`](Self::build), but `choose(k)` picks which of the `k`
    /// currently foldable pairs to fold next.
    pub fn build_with(words: &[Word], rank: usize, mut choose: impl FnMut(usize) -> usize) -> Result<Self> {
        Self::fold_words(words, rank, Some(&mut choose))
    }

    fn fold_words(words: &[Word], rank: usize, mut choose: Option<&mut dyn FnMut(usize) -> usize>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        if let Some(w) = words.iter().find(|w| w.rank() != rank) {
            return Err(Error::RankMismatch { left: rank, right: w.rank() });
        }
        let mut vertex_count = 1;
        let mut edges = Vec::new();
        for w in words {
            let n = w.len();
            let mut prev = 0;
            for (i, &l) in w.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    0
                } else {
                    vertex_count += 1;
                    vertex_count - 1
                };
                if l.is_positive() {
                    edges.push((prev, l.index(), next));
                } else {
                    edges.push((next, l.index(), prev));
                }
                prev = next;
            }
        }
        let mut state = Folding { uf: UnionFind::new(vertex_count), alive: vec![true; edges.len()], edges };
        loop {
            let pairs = state.conflicts(choose.is_none());
            if pairs.is_empty() {
                break;
            }
            let pick = match choose.as_mut() {
                Some(c) => c(pairs.len()).min(pairs.len() - 1),
                None => 0,
            };
            let (i, j) = pairs[pick];
            state.fold(i, j);
        }
        Ok(Self::from_folded(&mut state, vertex_count, rank))
    }

    fn from_folded(state: &mut Folding, vertex_count: usize, rank: usize) -> Self {
        let base = state.uf.find(0);
        let mut edges: Vec<(usize, usize, usize)> = (0..state.edges.len())
            .filter(|&i| state.alive[i])
            .map(|i| {
                let (f, g, t) = state.edges[i];
                (state.uf.find(f), g, state.uf.find(t))
            })
            .collect();
        // trim hairs away from the base
        loop {
            let mut valence = vec![0usize; vertex_count];
            for &(f, _, t) in &edges {
                valence[f] += 1;
                valence[t] += 1;
            }
            let before = edges.len();
            edges.retain(|&(f, _, t)| !((valence[f] == 1 && f != base) || (valence[t] == 1 && t != base)));
            if edges.len() == before {
                break;
            }
        }
        Self::canonical(rank, base, &edges)
    }

    /// Renumber breadth-first from the base following letter order.
    fn canonical(rank: usize, base: usize, edges: &[(usize, usize, usize)]) -> Self {
        let mut out: BTreeMap<usize, Vec<(Letter, usize)>> = BTreeMap::new();
        for &(f, g, t) in edges {
            out.entry(f).or_default().push((Letter::generator(g), t));
            out.entry(t).or_default().push((Letter::generator(g).inverse(), f));
        }
        let mut order = BTreeMap::new();
        order.insert(base, 0usize);
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            let mut nbrs = out.get(&v).cloned().unwrap_or_default();
            nbrs.sort();
            for (_, w) in nbrs {
                if !order.contains_key(&w) {
                    order.insert(w, order.len());
                    queue.push_back(w);
                }
            }
        }
        let mut renamed: Vec<(usize, usize, usize)> =
            edges.iter().map(|&(f, g, t)| (order[&f], g, order[&t])).collect();
        renamed.sort();
        let pairs: Vec<(usize, usize)> = renamed.iter().map(|&(f, _, t)| (f, t)).collect();
        let graph = Graph::new(order.len(), &pairs).expect("vertices are renumbered densely");
        let mut label = Vec::with_capacity(2 * renamed.len());
        for &(_, g, _) in &renamed {
            label.push(Letter::generator(g));
            label.push(Letter::generator(g).inverse());
        }
        let mut next = vec![vec![None; 2 * rank]; graph.vertex_count()];
        for (e, l) in label.iter().enumerate() {
            next[graph.origin(e)][l.key()] = Some(e);
        }
        StallingsGraph { rank, graph, label, next }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn label(&self, e: usize) -> Letter {
        self.label[e]
    }

    pub fn labels(&self) -> &[Letter] {
        &self.label
    }

    /// Rank of the subgroup.
    pub fn subgroup_rank(&self) -> usize {
        self.graph.rank().expect("Stallings graphs are connected")
    }

    /// One word per edge outside a breadth-first spanning tree.
    pub fn basis(&self) -> Vec<Word> {
        let tree = self.graph.maximal_tree().expect("connected");
        self.graph
            .spanning_basis(0, &tree)
            .expect("valid tree")
            .into_iter()
            .map(|p| Word::from_letters(p.edges.iter().map(|&e| self.label[e]), self.rank).expect("in range"))
            .collect()
    }

    /// Whether `w` reads a closed path at the base.
    pub fn contains(&self, w: &Word) -> Result<bool> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { left: self.rank, right: w.rank() });
        }
        let mut at = 0;
        for l in w.letters() {
            match self.next[at][l.key()] {
                Some(e) => at = self.graph.terminus(e),
                None => return Ok(false),
            }
        }
        Ok(at == 0)
    }

    /// Finite index iff every vertex has all `2 rank` letters leaving it.
    pub fn index(&self) -> Index {
        if self.next.iter().all(|row| row.iter().all(|e| e.is_some())) {
            Index::Finite(self.graph.vertex_count())
        } else {
            Index::Infinite
        }
    }

    /// The labelling as a map to the standard rose.
    pub fn to_rose_map(&self) -> Result<EdgeletMap> {
        let rose = Graph::rose(self.rank)?;
        let n = self.graph.vertex_count();
        EdgeletMap::new(
            self.graph.clone(),
            rose,
            vec![0; n],
            self.label.iter().map(|l| l.key()).collect(),
            vec![true; n],
        )
    }

    /// The core (hairs at the base removed) with rose-edge labels.
    pub fn core_labels(&self) -> Result<(Graph, Vec<usize>)> {
        let (core, emb) = self.graph.core()?;
        let labels = emb.edges.iter().map(|&e| self.label[e].key()).collect();
        Ok((core, labels))
    }

    pub fn to_doc(&self) -> StallingsDoc {
        StallingsDoc {
            vertices: (0..self.graph.vertex_count()).collect(),
            edges: self
                .graph
                .edge_list()
                .into_iter()
                .enumerate()
                .map(|(k, (from, to))| LabeledEdgeDoc { id: k, from, to, label: self.label[2 * k].to_string() })
                .collect(),
            base: 0,
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph Stallings {\n");
        for v in 0..self.graph.vertex_count() {
            let shape = if v == 0 { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  v{v} [label=\"{v}\", shape={shape}];");
        }
        for (k, (from, to)) in self.graph.edge_list().into_iter().enumerate() {
            let _ = writeln!(out, "  v{from} -> v{to} [label=\"{}\"];", self.label[2 * k]);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsDoc {
    pub vertices: Vec<usize>,
    pub edges: Vec<LabeledEdgeDoc>,
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledEdgeDoc {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub label: String,
}

/// Whether the words generate all of `F_rank`.
pub fn is_surjective(words: &[Word], rank: usize) -> Result<bool> {
    Ok(StallingsGraph::build(words, rank)?.index() == Index::Finite(1))
}

/// Whether two graphs with edge labels (ids of codomain oriented edges, with
/// `label[bar e] = bar(label[e])`) are isomorphic by a label-preserving
/// graph isomorphism, ignoring base points. Both labelings must be
/// immersions, which makes any isomorphism determined by one vertex.
pub fn is_labeled_isomorphic(g1: &Graph, l1: &[usize], g2: &Graph, l2: &[usize]) -> bool {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    if g1.vertex_count() == 0 {
        return true;
    }
    let out = |g: &Graph, l: &[usize], v: usize| -> BTreeMap<usize, usize> {
        g.star(v).iter().map(|&e| (l[e], e)).collect()
    };
    'candidate: for start in 0..g2.vertex_count() {
        let mut vmap = vec![usize::MAX; g1.vertex_count()];
        let mut used = BTreeSet::new();
        let mut edges_seen = BTreeSet::new();
        vmap[0] = start;
        used.insert(start);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let here = out(g1, l1, v);
            let there = out(g2, l2, vmap[v]);
            if here.len() != g1.valence(v) || there.len() != g2.valence(vmap[v]) || here.len() != there.len() {
                continue 'candidate;
            }
            for (lab, &e) in &here {
                let Some(&f) = there.get(lab) else { continue 'candidate };
                edges_seen.insert((unoriented(e), unoriented(f)));
                let (w, w2) = (g1.terminus(e), g2.terminus(f));
                if vmap[w] == usize::MAX {
                    if !used.insert(w2) {
                        continue 'candidate;
                    }
                    vmap[w] = w2;
                    queue.push_back(w);
                } else if vmap[w] != w2 {
                    continue 'candidate;
                }
            }
        }
        if vmap.iter().all(|&x| x != usize::MAX) {
            return true;
        }
    }
    false
}
