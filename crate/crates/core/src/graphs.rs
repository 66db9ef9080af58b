//! Finite graphs with an orientation-reversing involution on edges.
//!
//! Vertices are `0..vertex_count`. Unoriented edge `k` has the two
//! orientations `2k` and `2k + 1`, so `bar(e) = e ^ 1`. Only the origin of
//! each oriented edge is stored; the terminus is the origin of the reverse.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[inline]
pub fn bar(e: usize) -> usize {
    e ^ 1
}

/// Unoriented edge id of an oriented edge.
#[inline]
pub fn unoriented(e: usize) -> usize {
    e / 2
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    origin: Vec<usize>,
    star: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from `(from, to)` pairs, one per unoriented edge; edge `k` is
    /// oriented `from -> to` as `2k`.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut origin = Vec::with_capacity(2 * edges.len());
        for &(from, to) in edges {
            if from >= vertex_count || to >= vertex_count {
                return Err(Error::MalformedGraph(format!(
                    "edge ({from}, {to}) uses a vertex outside 0..{vertex_count}"
                )));
            }
            origin.push(from);
            origin.push(to);
        }
        Ok(Self::from_origins(vertex_count, origin))
    }

    pub(crate) fn from_origins(vertex_count: usize, origin: Vec<usize>) -> Self {
        debug_assert!(origin.len().is_multiple_of(2));
        let mut star = vec![Vec::new(); vertex_count];
        for (e, &v) in origin.iter().enumerate() {
            star[v].push(e);
        }
        Graph { vertex_count, origin, star }
    }

    /// One vertex with `n` loops; petal `i` (0-based) is edge `i`, so the
    /// letter `s_{i+1}` labels oriented edge `2i`.
    pub fn rose(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::RankTooSmall(n));
        }
        Self::new(1, &vec![(0, 0); n])
    }

    /// Two vertices joined by three edges.
    pub fn theta() -> Self {
        Self::new(2, &[(0, 1), (0, 1), (0, 1)]).expect("valid")
    }

    /// Single vertex, single loop.
    pub fn circle() -> Self {
        Self::new(1, &[(0, 0)]).expect("valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of unoriented edges.
    pub fn edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn oriented_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self, e: usize) -> usize {
        self.origin[e]
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.origin[bar(e)]
    }

    /// Oriented edges with origin `v`, in increasing id order. These are the
    /// directions at `v`.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.star[v]
    }

    /// Loops count twice.
    pub fn valence(&self, v: usize) -> usize {
        self.star[v].len()
    }

    /// `(from, to)` for every unoriented edge.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        (0..self.edge_count()).map(|k| (self.origin[2 * k], self.origin[2 * k + 1])).collect()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count {
            Ok(())
        } else {
            Err(Error::NoSuchVertex(v))
        }
    }

    pub fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.origin.len() {
            Ok(())
        } else {
            Err(Error::NoSuchEdge(e))
        }
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertex_count);
        for k in 0..self.edge_count() {
            uf.union(self.origin[2 * k], self.origin[2 * k + 1]);
        }
        (0..self.vertex_count).filter(|&v| uf.find(v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count > 0 && self.component_count() == 1
    }

    /// `|E| - |V| + 1`.
    pub fn rank(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.edge_count() + 1 - self.vertex_count)
    }

    /// `|V| - |E|`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count() as i64
    }

    /// Whether the given unoriented edges span no circuit.
    pub fn is_forest(&self, edges: &BTreeSet<usize>) -> bool {
        let mut uf = UnionFind::new(self.vertex_count);
        edges.iter().all(|&k| uf.union(self.origin[2 * k], self.origin[2 * k + 1]))
    }

    /// Breadth-first spanning tree from vertex 0, as unoriented edge ids.
    pub fn maximal_tree(&self) -> Result<BTreeSet<usize>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut tree = BTreeSet::new();
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.star[v] {
                let w = self.terminus(e);
                if !seen[w] {
                    seen[w] = true;
                    tree.insert(unoriented(e));
                    queue.push_back(w);
                }
            }
        }
        Ok(tree)
    }

    /// For every vertex, the oriented tree edge leading to it from the root
    /// (`None` at the root).
    fn tree_parents(&self, root: usize, tree: &BTreeSet<usize>) -> Result<Vec<Option<usize>>> {
        let mut parent = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &e in &self.star[v] {
                if !tree.contains(&unoriented(e)) {
                    continue;
                }
                let w = self.terminus(e);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != self.vertex_count || tree.len() + 1 != self.vertex_count {
            return Err(Error::MalformedGraph("edge set is not a spanning tree".into()));
        }
        Ok(parent)
    }

    /// The tree path from `root` to `v`.
    fn tree_path(parent: &[Option<usize>], graph: &Graph, v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(e) = parent[cur] {
            path.push(e);
            cur = graph.origin(e);
        }
        path.reverse();
        path
    }

    /// One tight loop at `base` per edge outside `tree`, in edge id order:
    /// tree path to the edge, across it, tree path back.
    pub fn spanning_basis(&self, base: usize, tree: &BTreeSet<usize>) -> Result<Vec<EdgePath>> {
        self.check_vertex(base)?;
        let parent = self.tree_parents(base, tree)?;
        let mut loops = Vec::new();
        for k in 0..self.edge_count() {
            if tree.contains(&k) {
                continue;
            }
            let e = 2 * k;
            let mut edges = Self::tree_path(&parent, self, self.origin(e));
            edges.push(e);
            let back = Self::tree_path(&parent, self, self.terminus(e));
            edges.extend(back.iter().rev().map(|&x| bar(x)));
            loops.push(EdgePath::new(self, base, edges)?.tighten());
        }
        Ok(loops)
    }

    /// Collapse each component of a forest to a point.
    pub fn collapse_forest(&self, forest: &BTreeSet<usize>) -> Result<(Graph, CollapseMap)> {
        if let Some(&k) = forest.iter().find(|&&k| k >= self.edge_count()) {
            return Err(Error::NoSuchEdge(2 * k));
        }
        let mut uf = UnionFind::new(self.vertex_count);
        for &k in forest {
            if !uf.union(self.origin[2 * k], self.origin[2 * k + 1]) {
                return Err(Error::NotAForest);
            }
        }
        let mut new_id = vec![usize::MAX; self.vertex_count];
        let mut vertex_map = vec![0; self.vertex_count];
        let mut count = 0;
        for v in 0..self.vertex_count {
            let r = uf.find(v);
            if new_id[r] == usize::MAX {
                new_id[r] = count;
                count += 1;
            }
            vertex_map[v] = new_id[r];
        }
        let mut edge_map = vec![None; self.origin.len()];
        let mut origin = Vec::new();
        for k in 0..self.edge_count() {
            if forest.contains(&k) {
                continue;
            }
            let nk = origin.len() / 2;
            edge_map[2 * k] = Some(2 * nk);
            edge_map[2 * k + 1] = Some(2 * nk + 1);
            origin.push(vertex_map[self.origin[2 * k]]);
            origin.push(vertex_map[self.origin[2 * k + 1]]);
        }
        Ok((Graph::from_origins(count, origin), CollapseMap { vertex_map, edge_map }))
    }

    pub fn is_core(&self) -> bool {
        (0..self.vertex_count).all(|v| self.valence(v) >= 2)
    }

    /// Repeatedly delete valence-1 vertices together with their edges.
    pub fn core(&self) -> Result<(Graph, Embedding)> {
        let rank = self.rank()?;
        if rank == 0 {
            return Err(Error::RankTooSmall(0));
        }
        let mut alive_v = vec![true; self.vertex_count];
        let mut alive_e = vec![true; self.edge_count()];
        let mut valence: Vec<usize> = (0..self.vertex_count).map(|v| self.valence(v)).collect();
        let mut stack: Vec<usize> = (0..self.vertex_count).filter(|&v| valence[v] == 1).collect();
        while let Some(v) = stack.pop() {
            if !alive_v[v] || valence[v] != 1 {
                continue;
            }
            let e = *self.star[v].iter().find(|&&e| alive_e[unoriented(e)]).expect("one live edge");
            alive_v[v] = false;
            alive_e[unoriented(e)] = false;
            let w = self.terminus(e);
            valence[w] -= 1;
            if valence[w] == 1 {
                stack.push(w);
            }
        }
        Ok(self.induced(&alive_v, &alive_e))
    }

    /// The subgraph on live vertices and edges.
    pub(crate) fn induced(&self, alive_v: &[bool], alive_e: &[bool]) -> (Graph, Embedding) {
        let mut new_v = vec![usize::MAX; self.vertex_count];
        let mut vertices = Vec::new();
        for v in 0..self.vertex_count {
            if alive_v[v] {
                new_v[v] = vertices.len();
                vertices.push(v);
            }
        }
        let mut origin = Vec::new();
        let mut edges = Vec::new();
        for k in 0..self.edge_count() {
            if alive_e[k] {
                origin.push(new_v[self.origin[2 * k]]);
                origin.push(new_v[self.origin[2 * k + 1]]);
                edges.push(2 * k);
                edges.push(2 * k + 1);
            }
        }
        (Graph::from_origins(vertices.len(), origin), Embedding { vertices, edges })
    }

    /// Vertices of valence at least 3 (valence is never 1 in a core graph).
    pub fn natural_vertices(&self) -> Result<Vec<usize>> {
        self.check_natural()?;
        Ok((0..self.vertex_count).filter(|&v| self.valence(v) >= 3).collect())
    }

    fn check_natural(&self) -> Result<()> {
        let rank = self.rank()?;
        if !self.is_core() {
            return Err(Error::NotCore);
        }
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        Ok(())
    }

    /// Maximal edge paths whose interior vertices all have valence 2, one
    /// per natural edge. Each is listed in the orientation starting with the
    /// smaller of its two possible first edge ids.
    pub fn natural_edges(&self) -> Result<Vec<EdgePath>> {
        self.check_natural()?;
        let mut covered = vec![false; self.origin.len()];
        let mut arcs = Vec::new();
        for e in 0..self.origin.len() {
            if covered[e] || self.valence(self.origin(e)) < 3 {
                continue;
            }
            let mut edges = vec![e];
            let mut cur = e;
            while self.valence(self.terminus(cur)) == 2 {
                let w = self.terminus(cur);
                cur = *self.star[w].iter().find(|&&x| x != bar(cur)).expect("valence 2");
                edges.push(cur);
            }
            for &x in &edges {
                covered[x] = true;
                covered[bar(x)] = true;
            }
            arcs.push(EdgePath { start: self.origin(e), edges });
        }
        Ok(arcs)
    }

    /// Absorb every valence-2 vertex: the result has one edge per natural
    /// edge (natural edge `k` becomes oriented edge `2k`).
    pub fn natural_graph(&self) -> Result<(Graph, NaturalStructure)> {
        let natural = self.natural_vertices()?;
        let arcs = self.natural_edges()?;
        let mut new_v = vec![usize::MAX; self.vertex_count];
        for (i, &v) in natural.iter().enumerate() {
            new_v[v] = i;
        }
        let mut origin = Vec::with_capacity(2 * arcs.len());
        let mut position = vec![(0usize, 0usize); self.origin.len()];
        for (k, arc) in arcs.iter().enumerate() {
            origin.push(new_v[arc.start]);
            origin.push(new_v[arc.end(self)]);
            let n = arc.edges.len();
            for (i, &e) in arc.edges.iter().enumerate() {
                position[e] = (2 * k, i);
                position[bar(e)] = (2 * k + 1, n - 1 - i);
            }
        }
        let graph = Graph::from_origins(natural.len(), origin);
        Ok((graph, NaturalStructure { vertices: natural, arcs, position }))
    }

    /// Replace unoriented edge `k` by a path of `pieces` edges. The first
    /// piece keeps id `k`; the others and the new vertices are appended.
    /// Returns the new graph and, for each old oriented edge, its image path.
    pub fn subdivide(&self, k: usize, pieces: usize) -> Result<(Graph, Vec<Vec<usize>>)> {
        self.check_edge(2 * k)?;
        if pieces == 0 {
            return Err(Error::MalformedGraph("cannot subdivide into zero pieces".into()));
        }
        let mut origin = self.origin.clone();
        let from = self.origin[2 * k];
        let to = self.origin[2 * k + 1];
        let mut vertex_count = self.vertex_count;
        let mut chain = vec![2 * k];
        let mut prev = from;
        for i in 0..pieces {
            let next = if i + 1 == pieces {
                to
            } else {
                vertex_count += 1;
                vertex_count - 1
            };
            if i == 0 {
                origin[2 * k + 1] = next;
            } else {
                chain.push(origin.len());
                origin.push(prev);
                origin.push(next);
            }
            prev = next;
        }
        let mut image: Vec<Vec<usize>> = (0..self.origin.len()).map(|e| vec![e]).collect();
        image[2 * k] = chain.clone();
        image[2 * k + 1] = chain.iter().rev().map(|&e| bar(e)).collect();
        Ok((Graph::from_origins(vertex_count, origin), image))
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: (0..self.vertex_count).map(|v| Value::from(v as u64)).collect(),
            edges: self
                .edge_list()
                .into_iter()
                .enumerate()
                .map(|(k, (from, to))| EdgeDoc {
                    id: Value::from(k as u64),
                    from: Value::from(from as u64),
                    to: Value::from(to as u64),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<(Graph, Names)> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::MalformedGraph(e.to_string()))?;
        Self::from_doc(&doc)
    }

    /// Map arbitrary JSON ids to dense indices, keeping the original names.
    pub fn from_doc(doc: &GraphDoc) -> Result<(Graph, Names)> {
        let vertices: Vec<String> = doc.vertices.iter().map(id_string).collect::<Result<_>>()?;
        let mut distinct = BTreeSet::new();
        for v in &vertices {
            if !distinct.insert(v.clone()) {
                return Err(Error::MalformedGraph(format!("duplicate vertex id {v}")));
            }
        }
        let lookup = |id: &Value| -> Result<usize> {
            let s = id_string(id)?;
            vertices
                .iter()
                .position(|v| *v == s)
                .ok_or_else(|| Error::MalformedGraph(format!("unknown vertex {s}")))
        };
        let mut pairs = Vec::new();
        let mut edges = Vec::new();
        let mut seen = BTreeSet::new();
        for edge in &doc.edges {
            let id = id_string(&edge.id)?;
            if !seen.insert(id.clone()) {
                return Err(Error::MalformedGraph(format!("duplicate edge id {id}")));
            }
            pairs.push((lookup(&edge.from)?, lookup(&edge.to)?));
            edges.push(id);
        }
        let graph = Graph::new(vertices.len(), &pairs)?;
        Ok((graph, Names { vertices, edges }))
    }

    /// Graphviz source. Each unoriented edge is drawn once, in its positive
    /// orientation, labelled by `label(k)`.
    pub fn to_dot_with(&self, name: &str, label: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        for v in 0..self.vertex_count {
            let _ = writeln!(out, "  v{v} [label=\"{v}\"];");
        }
        for (k, (from, to)) in self.edge_list().into_iter().enumerate() {
            let _ = writeln!(out, "  v{from} -> v{to} [label=\"{}\"];", label(k));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_dot(&self) -> String {
        self.to_dot_with("G", |k| format!("e{k}"))
    }
}

fn id_string(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::MalformedGraph(format!("ids must be strings or numbers, got {other}"))),
    }
}

/// JSON form of a graph: one entry per unoriented edge, oriented
/// `from -> to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<Value>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: Value,
    pub from: Value,
    pub to: Value,
}

/// Original JSON ids of the dense vertex and unoriented edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Names {
    pub vertices: Vec<String>,
    pub edges: Vec<String>,
}

/// Record of a forest collapse: every old vertex goes to a new vertex, and
/// every surviving old oriented edge to a new oriented edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseMap {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<Option<usize>>,
}

/// A subgraph's vertex and oriented edge ids in the ambient graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Correspondence between a core graph and its natural cell structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalStructure {
    /// Old ids of the natural vertices, indexed by new id.
    pub vertices: Vec<usize>,
    /// Natural edge `k` as an edge path in the old graph.
    pub arcs: Vec<EdgePath>,
    /// For each old oriented edge: the new oriented edge containing it and
    /// its position along that edge.
    pub position: Vec<(usize, usize)>,
}

/// A finite edge path. The start vertex is kept so that empty paths still
/// know where they sit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePath {
    pub start: usize,
    pub edges: Vec<usize>,
}

impl EdgePath {
    pub fn new(graph: &Graph, start: usize, edges: Vec<usize>) -> Result<Self> {
        graph.check_vertex(start)?;
        let mut at = start;
        for (i, &e) in edges.iter().enumerate() {
            graph.check_edge(e)?;
            if graph.origin(e) != at {
                return Err(Error::NotComposable(i));
            }
            at = graph.terminus(e);
        }
        Ok(EdgePath { start, edges })
    }

    pub fn trivial(start: usize) -> Self {
        EdgePath { start, edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end(&self, graph: &Graph) -> usize {
        self.edges.last().map_or(self.start, |&e| graph.terminus(e))
    }

    pub fn is_tight(&self) -> bool {
        self.edges.windows(2).all(|w| w[1] != bar(w[0]))
    }

    pub fn reverse(&self, graph: &Graph) -> EdgePath {
        EdgePath {
            start: self.end(graph),
            edges: self.edges.iter().rev().map(|&e| bar(e)).collect(),
        }
    }

    /// Cancel backtracks `e bar(e)`; the result is unique.
    pub fn tighten(&self) -> EdgePath {
        EdgePath { start: self.start, edges: tighten_edges(&self.edges) }
    }
}

pub fn tighten_edges(edges: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(edges.len());
    for &e in edges {
        if out.last() == Some(&bar(e)) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    out
}

/// Whether `edges`, read cyclically, is a closed tight path.
pub fn is_cyclically_tight(graph: &Graph, edges: &[usize]) -> bool {
    let n = edges.len();
    n > 0
        && (0..n).all(|i| {
            let (a, b) = (edges[i], edges[(i + 1) % n]);
            graph.terminus(a) == graph.origin(b) && b != bar(a)
        })
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge the classes of `a` and `b`, keeping the smaller representative.
    /// Returns false if they were already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
