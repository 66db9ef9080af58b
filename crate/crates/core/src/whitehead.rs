//! Whitehead graphs of circuit families, cuts and splits, and Whitehead's
//! algorithm for deciding whether conjugacy classes form a partial free
//! basis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{bar, is_cyclically_tight, unoriented, Graph, GraphDoc, NaturalStructure};
use crate::words::{least_rotation, Word};

/// A finite family of circuits, each a cyclic sequence of oriented edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitFamily {
    graph: Graph,
    circuits: Vec<Vec<usize>>,
}

impl CircuitFamily {
    pub fn new(graph: Graph, circuits: Vec<Vec<usize>>) -> Result<Self> {
        for (i, c) in circuits.iter().enumerate() {
            if c.iter().any(|&e| e >= graph.oriented_edge_count()) {
                return Err(Error::NotACircuit(format!("circuit {i} uses an unknown edge")));
            }
            if !is_cyclically_tight(&graph, c) {
                return Err(Error::NotACircuit(format!("circuit {i} is not a closed tight path")));
            }
        }
        Ok(CircuitFamily { graph, circuits })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn circuits(&self) -> &[Vec<usize>] {
        &self.circuits
    }

    /// Number of times each unoriented edge is crossed.
    pub fn crossings(&self) -> Vec<usize> {
        let mut k = vec![0; self.graph.edge_count()];
        for c in &self.circuits {
            for &e in c {
                k[unoriented(e)] += 1;
            }
        }
        k
    }

    /// Pass to the natural cell structure, rewriting each circuit in terms
    /// of natural edges.
    pub fn to_natural(&self) -> Result<(CircuitFamily, NaturalStructure)> {
        let (graph, natural) = self.graph.natural_graph()?;
        let circuits = self
            .circuits
            .iter()
            .map(|c| {
                c.iter()
                    .filter_map(|&e| {
                        let (ne, pos) = natural.position[e];
                        (pos == 0).then_some(ne)
                    })
                    .collect()
            })
            .collect();
        Ok((CircuitFamily { graph, circuits }, natural))
    }
}

/// Realize the conjugacy classes of nonidentity words as circuits in the
/// rose. Repeated classes are kept.
pub fn circuits_from_words(words: &[Word], rank: usize) -> Result<CircuitFamily> {
    let rose = Graph::rose(rank)?;
    let mut circuits = Vec::with_capacity(words.len());
    for w in words {
        if w.rank() != rank {
            return Err(Error::RankMismatch { left: rank, right: w.rank() });
        }
        let core = w.conjugacy_class().ok_or(Error::IdentityWord)?;
        circuits.push(core.letters().iter().map(|l| l.key()).collect());
    }
    CircuitFamily::new(rose, circuits)
}

fn canonical_rotation(c: &[usize]) -> Vec<usize> {
    let r = least_rotation(c);
    let mut out = c[r..].to_vec();
    out.extend_from_slice(&c[..r]);
    out
}

fn reversed(c: &[usize]) -> Vec<usize> {
    c.iter().rev().map(|&e| bar(e)).collect()
}

fn is_root_free(c: &[usize]) -> bool {
    let n = c.len();
    (1..n).filter(|p| n.is_multiple_of(*p)).all(|p| (0..n).any(|i| c[i] != c[(i + p) % n]))
}

/// Every circuit is not a proper power, and no circuit equals another or
/// another's reverse up to rotation.
pub fn is_jointly_primitive(f: &CircuitFamily) -> bool {
    if !f.circuits.iter().all(|c| is_root_free(c)) {
        return false;
    }
    let mut seen = BTreeSet::new();
    for c in &f.circuits {
        let forward = canonical_rotation(c);
        let backward = canonical_rotation(&reversed(c));
        if seen.contains(&forward) || seen.contains(&backward) {
            return false;
        }
        seen.insert(forward);
        seen.insert(backward);
    }
    true
}

/// The turns taken by a circuit family at one vertex. Directions are
/// oriented edge ids; turns are stored as ordered pairs `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WhiteheadGraph {
    pub vertex: usize,
    pub dirs: BTreeSet<usize>,
    pub turns: BTreeSet<(usize, usize)>,
}

fn turn(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl WhiteheadGraph {
    fn neighbours(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.turns.iter().filter_map(move |&(a, b)| {
            if a == x {
                Some(b)
            } else if b == x {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn degree(&self, x: usize) -> usize {
        self.neighbours(x).count()
    }

    /// Connected components among `dirs` after deleting `removed`.
    fn components_without(&self, within: &BTreeSet<usize>, removed: Option<usize>) -> Vec<BTreeSet<usize>> {
        let mut left: BTreeSet<usize> = within.iter().copied().filter(|&x| Some(x) != removed).collect();
        let mut out = Vec::new();
        while let Some(&start) = left.iter().next() {
            let mut comp = BTreeSet::from([start]);
            let mut stack = vec![start];
            left.remove(&start);
            while let Some(x) = stack.pop() {
                for y in self.neighbours(x) {
                    if left.remove(&y) {
                        comp.insert(y);
                        stack.push(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<BTreeSet<usize>> {
        self.components_without(&self.dirs, None)
    }

    /// Directions whose removal disconnects their component, in id order.
    pub fn cut_vertices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for comp in self.components() {
            for &x in &comp {
                if self.components_without(&comp, Some(x)).len() >= 2 {
                    out.push(x);
                }
            }
        }
        out.sort();
        out
    }
}

/// Whitehead graphs at every vertex.
pub fn whitehead_graphs(f: &CircuitFamily) -> Vec<WhiteheadGraph> {
    let g = &f.graph;
    let mut out: Vec<WhiteheadGraph> =
        (0..g.vertex_count()).map(|v| WhiteheadGraph { vertex: v, ..Default::default() }).collect();
    for c in &f.circuits {
        let n = c.len();
        for i in 0..n {
            let (a, b) = (c[i], c[(i + 1) % n]);
            let v = g.terminus(a);
            out[v].dirs.insert(bar(a));
            out[v].dirs.insert(b);
            out[v].turns.insert(turn(bar(a), b));
        }
    }
    out
}

pub fn whitehead_graph(f: &CircuitFamily, v: usize) -> Result<WhiteheadGraph> {
    f.graph.check_vertex(v)?;
    Ok(whitehead_graphs(f).swap_remove(v))
}

/// Every component of every Whitehead graph is a single turn.
pub fn near_visibility(f: &CircuitFamily) -> bool {
    whitehead_graphs(f).iter().all(|w| w.dirs.iter().all(|&x| w.degree(x) == 1))
}

/// One side of a cut.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutHalf {
    pub dirs: BTreeSet<usize>,
    pub turns: BTreeSet<(usize, usize)>,
}

/// A cut of the augmented Whitehead graph at `vertex` along `direction`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub vertex: usize,
    pub direction: usize,
    pub halves: [CutHalf; 2],
}

impl Cut {
    /// Check the three cut axioms against the augmented graph at the cut
    /// vertex.
    pub fn validate(&self, f: &CircuitFamily) -> Result<()> {
        let w = whitehead_graph(f, self.vertex)?;
        let all_dirs: BTreeSet<usize> = f.graph.star(self.vertex).iter().copied().collect();
        let d = self.direction;
        let [h1, h2] = &self.halves;
        let union_dirs: BTreeSet<usize> = h1.dirs.union(&h2.dirs).copied().collect();
        let union_turns: BTreeSet<(usize, usize)> = h1.turns.union(&h2.turns).copied().collect();
        if union_dirs != all_dirs || union_turns != w.turns {
            return Err(Error::InvalidCut("halves do not cover the augmented Whitehead graph".into()));
        }
        let common: BTreeSet<usize> = h1.dirs.intersection(&h2.dirs).copied().collect();
        if common != BTreeSet::from([d]) || h1.turns.intersection(&h2.turns).next().is_some() {
            return Err(Error::InvalidCut("halves must meet in exactly the cut direction".into()));
        }
        for h in [h1, h2] {
            if h.turns.iter().any(|&(a, b)| !h.dirs.contains(&a) || !h.dirs.contains(&b)) {
                return Err(Error::InvalidCut("a half is not a subgraph".into()));
            }
            if !h.turns.iter().any(|&(a, b)| a == d || b == d) {
                return Err(Error::InvalidCut("each half needs a turn at the cut direction".into()));
            }
        }
        if !w.dirs.contains(&d) {
            return Err(Error::InvalidCut("cut direction is not crossed".into()));
        }
        Ok(())
    }
}

/// The first cut: first vertex with a cut vertex, first such direction.
/// Half 1 is the direction plus the piece of its component (with the
/// direction removed) containing the smallest direction id; half 2 is
/// everything else, including uncrossed directions.
pub fn find_cut(f: &CircuitFamily) -> Option<Cut> {
    for w in whitehead_graphs(f) {
        let Some(&d) = w.cut_vertices().first() else { continue };
        let comp = w.components().into_iter().find(|c| c.contains(&d)).expect("d is crossed");
        let pieces = w.components_without(&comp, Some(d));
        let first = pieces.into_iter().min_by_key(|p| *p.iter().next().unwrap()).expect("at least two pieces");
        let mut dirs1 = first;
        dirs1.insert(d);
        let turns1: BTreeSet<(usize, usize)> =
            w.turns.iter().copied().filter(|&(a, b)| dirs1.contains(&a) && dirs1.contains(&b)).collect();
        let mut dirs2: BTreeSet<usize> =
            f.graph.star(w.vertex).iter().copied().filter(|x| !dirs1.contains(x)).collect();
        dirs2.insert(d);
        let turns2 = w.turns.difference(&turns1).copied().collect();
        return Some(Cut {
            vertex: w.vertex,
            direction: d,
            halves: [CutHalf { dirs: dirs1, turns: turns1 }, CutHalf { dirs: dirs2, turns: turns2 }],
        });
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitCase {
    /// The split edge joins the cut vertex to a different vertex.
    DistinctEnds,
    /// The split edge is a loop at the cut vertex.
    Loop,
}

/// Result of splitting along a cut: the new graph with its pullback cell
/// structure, the fold map back to the old graph, and the lifted family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub case: SplitCase,
    pub family: CircuitFamily,
    /// The cut vertex keeps its id (`v1`); `v2` is the new last vertex.
    pub v1: usize,
    pub v2: usize,
    /// `E1` keeps the id of the split edge; `E2` is the new edge.
    pub e1: usize,
    pub e2: usize,
    pub fold_vertex_map: Vec<usize>,
    pub fold_edge_map: Vec<usize>,
}

impl Split {
    /// The single turn identified by the fold map: `{E1, E2}` at their
    /// common origin.
    pub fn illegal_turn(&self) -> (usize, (usize, usize)) {
        (self.family.graph.origin(self.e1), turn(self.e1, self.e2))
    }
}

pub fn split(f: &CircuitFamily, cut: &Cut) -> Result<Split> {
    cut.validate(f)?;
    let g = &f.graph;
    let v = cut.vertex;
    if g.valence(v) < 3 {
        return Err(Error::InvalidCut("cut vertex must be natural".into()));
    }
    let d = cut.direction;
    let e = bar(d);
    let u = g.origin(e);
    let case = if u == v { SplitCase::Loop } else { SplitCase::DistinctEnds };
    let (mut t1, mut t2) = (cut.halves[0].dirs.clone(), cut.halves[1].dirs.clone());
    if case == SplitCase::Loop && !t1.contains(&e) {
        std::mem::swap(&mut t1, &mut t2);
    }

    let v1 = v;
    let v2 = g.vertex_count();
    let mut origin: Vec<usize> = (0..g.oriented_edge_count()).map(|x| g.origin(x)).collect();
    for &x in &t2 {
        if x != d {
            origin[x] = v2;
        }
    }
    let e1 = e;
    let e2 = g.oriented_edge_count() + (e & 1);
    let e2_origin = if case == SplitCase::Loop { v1 } else { u };
    origin.push(0);
    origin.push(0);
    origin[e2] = e2_origin;
    origin[bar(e2)] = v2;
    let graph = Graph::from_origins(g.vertex_count() + 1, origin);

    let circuits = f
        .circuits
        .iter()
        .map(|c| {
            let n = c.len();
            (0..n)
                .map(|i| {
                    let x = c[i];
                    if x == e {
                        let next = c[(i + 1) % n];
                        if t2.contains(&next) { e2 } else { e1 }
                    } else if x == bar(e) {
                        let prev = c[(i + n - 1) % n];
                        if t2.contains(&bar(prev)) { bar(e2) } else { bar(e1) }
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    let family = CircuitFamily::new(graph, circuits)?;

    let mut fold_vertex_map: Vec<usize> = (0..g.vertex_count()).collect();
    fold_vertex_map.push(v);
    let mut fold_edge_map: Vec<usize> = (0..g.oriented_edge_count()).collect();
    fold_edge_map.push(0);
    fold_edge_map.push(0);
    fold_edge_map[e2] = e;
    fold_edge_map[bar(e2)] = bar(e);
    Ok(Split { case, family, v1, v2, e1, e2, fold_vertex_map, fold_edge_map })
}

/// Number of natural edges crossed exactly `k` times, for each `k`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightSequence(pub BTreeMap<usize, usize>);

impl WeightSequence {
    pub fn get(&self, k: usize) -> usize {
        self.0.get(&k).copied().unwrap_or(0)
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().rev().find(|(_, &c)| c > 0).map_or(0, |(&k, _)| k)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

impl Ord for WeightSequence {
    /// Dictionary order read from the highest index down.
    fn cmp(&self, other: &Self) -> Ordering {
        let top = self.max_index().max(other.max_index());
        for k in (0..=top).rev() {
            match self.get(k).cmp(&other.get(k)) {
                Ordering::Equal => continue,
                unequal => return unequal,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for WeightSequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().rev().filter(|(_, &c)| c > 0).map(|(k, c)| format!("w{k}={c}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Weight sequence over the natural edges of the family's graph.
pub fn weight_sequence(f: &CircuitFamily) -> Result<WeightSequence> {
    let arcs = f.graph.natural_edges()?;
    let k = f.crossings();
    let mut w = BTreeMap::new();
    for arc in arcs {
        *w.entry(k[unoriented(arc.edges[0])]).or_insert(0) += 1;
    }
    Ok(WeightSequence(w))
}

/// Whitehead graphs of the image family under a nondegenerate map given by
/// its vertex and oriented edge maps: each turn is pushed forward by the
/// derivative. Fails if a turn collapses to a direction.
pub fn induced_whitehead_graphs(
    before: &[WhiteheadGraph],
    vertex_map: &[usize],
    edge_map: &[usize],
    target_vertex_count: usize,
) -> Result<Vec<WhiteheadGraph>> {
    let mut out: Vec<WhiteheadGraph> =
        (0..target_vertex_count).map(|v| WhiteheadGraph { vertex: v, ..Default::default() }).collect();
    for w in before {
        let target = &mut out[vertex_map[w.vertex]];
        for &x in &w.dirs {
            target.dirs.insert(edge_map[x]);
        }
        for &(a, b) in &w.turns {
            let (ia, ib) = (edge_map[a], edge_map[b]);
            if ia == ib {
                return Err(Error::IllegalTurnTaken(a, b));
            }
            target.turns.insert(turn(ia, ib));
        }
    }
    Ok(out)
}

/// One iteration of the algorithm's split loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub iteration: usize,
    pub vertex: usize,
    pub cut_direction: usize,
    pub case: SplitCase,
    pub weight_sequence_before: WeightSequence,
    pub weight_sequence_after: WeightSequence,
    /// Graph after the split, in natural cell structure.
    pub graph_snapshot: GraphDoc,
    pub circuits: Vec<Vec<usize>>,
}

/// Inputs, steps and verdict of one run of the algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteheadTrace {
    pub words: Vec<String>,
    pub rank: usize,
    pub jointly_primitive: bool,
    pub steps: Vec<SplitRecord>,
    pub verdict: bool,
}

/// State of the algorithm: a family in a natural graph, plus the word in
/// the original free basis read along each oriented edge.
#[derive(Debug, Clone)]
pub struct MarkedFamily {
    pub family: CircuitFamily,
    pub edge_words: Vec<Word>,
}

impl MarkedFamily {
    pub fn from_words(words: &[Word], rank: usize) -> Result<Self> {
        let family = circuits_from_words(words, rank)?;
        let edge_words = (0..2 * rank)
            .map(|e| Word::from_letters([crate::words::Letter::from_key(e)], rank).expect("in range"))
            .collect();
        Ok(MarkedFamily { family, edge_words })
    }

    /// The conjugacy class of each circuit, read through the marking.
    pub fn circuit_words(&self) -> Vec<Word> {
        let rank = self.edge_words[0].rank();
        self.family
            .circuits
            .iter()
            .map(|c| {
                c.iter().fold(Word::identity(rank), |acc, &e| acc.multiply(&self.edge_words[e]).expect("same rank"))
            })
            .collect()
    }

    /// Split along `cut` and pass to the natural cell structure.
    pub fn split(&self, cut: &Cut) -> Result<(MarkedFamily, Split)> {
        let s = split(&self.family, cut)?;
        let mut words: Vec<Word> = s.fold_edge_map.iter().map(|&e| self.edge_words[e].clone()).collect();
        let (family, natural) = s.family.to_natural()?;
        let rank = self.edge_words[0].rank();
        words = (0..family.graph.oriented_edge_count())
            .map(|ne| {
                let arc = &natural.arcs[ne / 2];
                let path = if ne % 2 == 0 { arc.clone() } else { arc.reverse(s.family.graph()) };
                path.edges.iter().fold(Word::identity(rank), |acc, &e| acc.multiply(&words[e]).expect("same rank"))
            })
            .collect();
        Ok((MarkedFamily { family, edge_words: words }, s))
    }
}

/// Whether the conjugacy classes of `words` form a partial free basis of
/// `F_rank`.
pub fn is_partial_free_basis(words: &[Word], rank: usize) -> Result<(bool, WhiteheadTrace)> {
    if let Some(w) = words.iter().find(|w| w.rank() != rank) {
        return Err(Error::RankMismatch { left: rank, right: w.rank() });
    }
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    if words.iter().any(|w| w.is_identity()) {
        return Err(Error::IdentityWord);
    }
    let mut trace = WhiteheadTrace {
        words: words.iter().map(|w| w.to_string()).collect(),
        rank,
        jointly_primitive: false,
        steps: Vec::new(),
        verdict: false,
    };
    if rank == 1 {
        let ok = words.len() == 1 && words[0].conjugacy_class().is_some_and(|c| c.len() == 1);
        trace.jointly_primitive = ok;
        trace.verdict = ok;
        return Ok((ok, trace));
    }
    let mut state = MarkedFamily::from_words(words, rank)?;
    if !is_jointly_primitive(&state.family) {
        return Ok((false, trace));
    }
    trace.jointly_primitive = true;
    let mut weight = weight_sequence(&state.family)?;
    loop {
        if near_visibility(&state.family) {
            trace.verdict = true;
            return Ok((true, trace));
        }
        let Some(cut) = find_cut(&state.family) else {
            return Ok((false, trace));
        };
        let (next, s) = state.split(&cut)?;
        let after = weight_sequence(&next.family)?;
        if after >= weight {
            return Err(Error::InvalidCut(format!("weight sequence did not decrease: {weight} -> {after}")));
        }
        trace.steps.push(SplitRecord {
            iteration: trace.steps.len() + 1,
            vertex: cut.vertex,
            cut_direction: cut.direction,
            case: s.case,
            weight_sequence_before: weight,
            weight_sequence_after: after.clone(),
            graph_snapshot: next.family.graph.to_doc(),
            circuits: next.family.circuits.clone(),
        });
        weight = after;
        state = next;
    }
}

pub fn is_primitive(w: &Word) -> Result<bool> {
    Ok(is_partial_free_basis(std::slice::from_ref(w), w.rank())?.0)
}
