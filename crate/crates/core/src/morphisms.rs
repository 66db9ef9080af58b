//! Tight maps between graphs, foldable maps, and Stallings fold
//! factorizations.
//!
//! Folding is carried out on the edgelet subdivision of the domain: every
//! edgelet maps to a single oriented edge of the codomain, so a fold is an
//! identification of two equal-label edgelet chains and the number of
//! edgelets is an exact termination measure.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{bar, tighten_edges, unoriented, Graph, GraphDoc, UnionFind};
use crate::subgroups;
use crate::words::{Endomorphism, Letter};

/// A map taking vertices to vertices and each oriented edge to an edge path
/// (possibly empty) in the codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMap {
    domain: Graph,
    codomain: Graph,
    vertex_map: Vec<usize>,
    edge_map: Vec<Vec<usize>>,
}

impl GraphMap {
    /// `images[k]` is the image of oriented edge `2k`; the reverse
    /// orientation gets the reversed path.
    pub fn new(domain: Graph, codomain: Graph, vertex_map: Vec<usize>, images: Vec<Vec<usize>>) -> Result<Self> {
        if vertex_map.len() != domain.vertex_count() {
            return Err(Error::MalformedMap("vertex map has the wrong length".into()));
        }
        if images.len() != domain.edge_count() {
            return Err(Error::MalformedMap("one image per edge is required".into()));
        }
        if let Some(&w) = vertex_map.iter().find(|&&w| w >= codomain.vertex_count()) {
            return Err(Error::NoSuchVertex(w));
        }
        let mut edge_map = Vec::with_capacity(2 * images.len());
        for (k, image) in images.into_iter().enumerate() {
            let start = vertex_map[domain.origin(2 * k)];
            let end = vertex_map[domain.terminus(2 * k)];
            let mut at = start;
            for &e in &image {
                codomain.check_edge(e)?;
                if codomain.origin(e) != at {
                    return Err(Error::MalformedMap(format!("image of edge {k} is not a path")));
                }
                at = codomain.terminus(e);
            }
            if at != end {
                return Err(Error::MalformedMap(format!("image of edge {k} has the wrong endpoints")));
            }
            let reversed = image.iter().rev().map(|&e| bar(e)).collect();
            edge_map.push(image);
            edge_map.push(reversed);
        }
        Ok(GraphMap { domain, codomain, vertex_map, edge_map })
    }

    /// The self-map of the rose sending petal `i` along the word `images[i]`.
    pub fn from_endomorphism(e: &Endomorphism) -> Self {
        let rose = Graph::rose(e.rank()).expect("rank is positive");
        let images = e.images().iter().map(|w| w.letters().iter().map(|l| l.key()).collect()).collect();
        GraphMap::new(rose.clone(), rose, vec![0], images).expect("word paths are closed at the rose vertex")
    }

    pub fn domain(&self) -> &Graph {
        &self.domain
    }

    pub fn codomain(&self) -> &Graph {
        &self.codomain
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    pub fn edge_image(&self, e: usize) -> &[usize] {
        &self.edge_map[e]
    }

    pub fn is_tight(&self) -> bool {
        self.edge_map.iter().all(|p| p.windows(2).all(|w| w[1] != bar(w[0])))
    }

    /// Tighten every edge image.
    pub fn tighten(&self) -> GraphMap {
        let images = (0..self.domain.edge_count()).map(|k| tighten_edges(&self.edge_map[2 * k])).collect();
        GraphMap::new(self.domain.clone(), self.codomain.clone(), self.vertex_map.clone(), images)
            .expect("tightening preserves endpoints")
    }

    /// Directions at `v` grouped by the first edge of their image, in order
    /// of first appearance.
    pub fn gates(&self, v: usize) -> Result<GatePartition> {
        self.domain.check_vertex(v)?;
        let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
        for &d in self.domain.star(v) {
            let Some(&first) = self.edge_map[d].first() else {
                return Err(Error::Degenerate(v));
            };
            match blocks.iter_mut().find(|(l, _)| *l == first) {
                Some((_, b)) => b.push(d),
                None => blocks.push((first, vec![d])),
            }
        }
        Ok(GatePartition { vertex: v, blocks: blocks.into_iter().map(|(_, b)| b).collect() })
    }

    /// Subdivide the domain so that every edge maps to a single codomain
    /// edge. Fails if some edge is collapsed.
    pub fn to_edgelets(&self) -> Result<EdgeletMap> {
        let sub = Subdivision::of(self);
        if let Some(k) = sub.label.iter().position(|l| l.is_none()) {
            return Err(Error::Degenerate(sub.graph.origin(k)));
        }
        let vertex_map = sub.vertex_map.clone();
        let label = sub.label.iter().map(|l| l.expect("checked")).collect();
        let cell = (0..sub.graph.vertex_count()).map(|v| v < self.domain.vertex_count()).collect();
        EdgeletMap::new(sub.graph, self.codomain.clone(), vertex_map, label, cell)
    }
}

/// The gates of a map at one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatePartition {
    pub vertex: usize,
    pub blocks: Vec<Vec<usize>>,
}

/// The edgelet subdivision of a map's domain. Edges with empty image become
/// a single unlabelled edgelet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdivision {
    pub graph: Graph,
    /// For each original oriented edge, its chain of oriented edgelets.
    pub chains: Vec<Vec<usize>>,
    pub label: Vec<Option<usize>>,
    pub vertex_map: Vec<usize>,
}

impl Subdivision {
    pub fn of(f: &GraphMap) -> Self {
        let g = &f.domain;
        let mut vertex_count = g.vertex_count();
        let mut vertex_map = f.vertex_map.clone();
        let mut origin = Vec::new();
        let mut label = Vec::new();
        let mut chains = vec![Vec::new(); g.oriented_edge_count()];
        for k in 0..g.edge_count() {
            let image = &f.edge_map[2 * k];
            let (from, to) = (g.origin(2 * k), g.terminus(2 * k));
            let mut chain = Vec::new();
            if image.is_empty() {
                chain.push(origin.len());
                origin.extend([from, to]);
                label.extend([None, None]);
            } else {
                let mut prev = from;
                for (i, &c) in image.iter().enumerate() {
                    let next = if i + 1 == image.len() {
                        to
                    } else {
                        vertex_map.push(f.codomain.terminus(c));
                        vertex_count += 1;
                        vertex_count - 1
                    };
                    chain.push(origin.len());
                    origin.extend([prev, next]);
                    label.extend([Some(c), Some(bar(c))]);
                    prev = next;
                }
            }
            chains[2 * k + 1] = chain.iter().rev().map(|&e| bar(e)).collect();
            chains[2 * k] = chain;
        }
        Subdivision { graph: Graph::from_origins(vertex_count, origin), chains, label, vertex_map }
    }
}

/// A nondegenerate map sending each edgelet of `graph` to one oriented edge
/// of `codomain`. Cell vertices are the vertices of the coarser cell
/// structure; every other vertex is an interior point of a cell edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeletMap {
    graph: Graph,
    codomain: Graph,
    vertex_map: Vec<usize>,
    label: Vec<usize>,
    cell: Vec<bool>,
}

/// The four kinds of fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldClass {
    Bigon,
    Partial,
    ImproperFull,
    ProperFull,
}

/// A fold of the first `segment_len` edgelets along two directions at
/// `vertex` that carry the same label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldEvent {
    pub vertex: usize,
    pub directions: (usize, usize),
    pub segment_len: usize,
    pub class: FoldClass,
    /// Whether each folded segment is the whole cell edge.
    pub full: (bool, bool),
}

/// The two folded edgelet chains of a fold.
struct Walk {
    first: Vec<usize>,
    second: Vec<usize>,
}

impl EdgeletMap {
    pub fn new(graph: Graph, codomain: Graph, vertex_map: Vec<usize>, label: Vec<usize>, cell: Vec<bool>) -> Result<Self> {
        if vertex_map.len() != graph.vertex_count() || cell.len() != graph.vertex_count() {
            return Err(Error::MalformedMap("per-vertex data has the wrong length".into()));
        }
        if label.len() != graph.oriented_edge_count() {
            return Err(Error::MalformedMap("one label per oriented edgelet is required".into()));
        }
        for e in 0..label.len() {
            codomain.check_edge(label[e])?;
            if label[bar(e)] != bar(label[e]) {
                return Err(Error::MalformedMap(format!("labels of edgelet {e} and its reverse disagree")));
            }
            if vertex_map[graph.origin(e)] != codomain.origin(label[e]) {
                return Err(Error::MalformedMap(format!("edgelet {e} starts over the wrong vertex")));
            }
        }
        for v in 0..graph.vertex_count() {
            if !cell[v] && graph.valence(v) != 2 {
                return Err(Error::MalformedMap(format!("interior point {v} must have valence 2")));
            }
        }
        Ok(EdgeletMap { graph, codomain, vertex_map, label, cell })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn codomain(&self) -> &Graph {
        &self.codomain
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    pub fn label(&self, e: usize) -> usize {
        self.label[e]
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    pub fn is_cell(&self, v: usize) -> bool {
        self.cell[v]
    }

    /// Number of unoriented edgelets.
    pub fn edgelet_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn gates(&self, v: usize) -> Vec<Vec<usize>> {
        let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
        for &d in self.graph.star(v) {
            let l = self.label[d];
            match blocks.iter_mut().find(|(x, _)| *x == l) {
                Some((_, b)) => b.push(d),
                None => blocks.push((l, vec![d])),
            }
        }
        blocks.into_iter().map(|(_, b)| b).collect()
    }

    fn first_same_gate_pair(&self, v: usize) -> Option<(usize, usize)> {
        let star = self.graph.star(v);
        for (i, &d) in star.iter().enumerate() {
            for &d2 in &star[i + 1..] {
                if self.label[d] == self.label[d2] {
                    return Some((d, d2));
                }
            }
        }
        None
    }

    /// First vertex (in id order) at which the map is not locally injective.
    pub fn non_injective_vertex(&self) -> Option<usize> {
        (0..self.graph.vertex_count()).find(|&v| self.first_same_gate_pair(v).is_some())
    }

    pub fn is_locally_injective(&self) -> bool {
        self.non_injective_vertex().is_none()
    }

    /// First vertex with fewer than two gates.
    pub fn unfoldable_vertex(&self) -> Option<usize> {
        (0..self.graph.vertex_count()).find(|&v| self.gates(v).len() < 2)
    }

    pub fn is_foldable(&self) -> bool {
        self.unfoldable_vertex().is_none()
    }

    /// The other edgelet at an interior point, continuing `e`.
    fn continue_through(&self, e: usize) -> Option<usize> {
        let x = self.graph.terminus(e);
        if self.cell[x] {
            return None;
        }
        self.graph.star(x).iter().copied().find(|&n| n != bar(e))
    }

    /// Walk both directions in parallel while labels agree, up to `limit`
    /// edgelets, stopping at cell vertices or where the walks meet.
    fn walk(&self, d: usize, d2: usize, limit: usize) -> Walk {
        let mut walk = Walk { first: vec![d], second: vec![d2] };
        while walk.first.len() < limit {
            let (a, b) = (*walk.first.last().unwrap(), *walk.second.last().unwrap());
            if self.graph.terminus(a) == self.graph.terminus(b) {
                break;
            }
            match (self.continue_through(a), self.continue_through(b)) {
                (Some(na), Some(nb)) if self.label[na] == self.label[nb] => {
                    walk.first.push(na);
                    walk.second.push(nb);
                }
                _ => break,
            }
        }
        walk
    }

    fn classify(&self, walk: &Walk, vertex: usize) -> FoldEvent {
        let (a, b) = (*walk.first.last().unwrap(), *walk.second.last().unwrap());
        let (x, y) = (self.graph.terminus(a), self.graph.terminus(b));
        let full = (self.cell[x], self.cell[y]);
        let class = match full {
            (true, true) if x == y => FoldClass::Bigon,
            (true, true) => FoldClass::ImproperFull,
            (false, false) => FoldClass::Partial,
            _ => FoldClass::ProperFull,
        };
        FoldEvent {
            vertex,
            directions: (walk.first[0], walk.second[0]),
            segment_len: walk.first.len(),
            class,
            full,
        }
    }

    /// The maximal fold at the first same-gate pair of directions, scanning
    /// vertices and then directions in id order. `None` iff the map is
    /// locally injective.
    pub fn find_fold(&self) -> Result<Option<FoldEvent>> {
        if let Some(v) = self.unfoldable_vertex() {
            return Err(Error::NotFoldable(v));
        }
        let Some(v) = self.non_injective_vertex() else { return Ok(None) };
        let (d, d2) = self.first_same_gate_pair(v).expect("non-injective vertex");
        let walk = self.walk(d, d2, usize::MAX);
        Ok(Some(self.classify(&walk, v)))
    }

    /// Fold the two segments of `ev` together. Returns the fold map and the
    /// induced map on the quotient.
    pub fn apply_fold(&self, ev: &FoldEvent) -> Result<FoldStep> {
        let (d, d2) = ev.directions;
        self.graph.check_edge(d)?;
        self.graph.check_edge(d2)?;
        if d == d2 || self.graph.origin(d) != ev.vertex || self.graph.origin(d2) != ev.vertex {
            return Err(Error::InvalidFold("directions must be distinct and start at the fold vertex".into()));
        }
        if self.label[d] != self.label[d2] {
            return Err(Error::InvalidFold("directions are in different gates".into()));
        }
        if ev.segment_len == 0 {
            return Err(Error::InvalidFold("empty segment".into()));
        }
        let walk = self.walk(d, d2, ev.segment_len);
        if walk.first.len() != ev.segment_len {
            return Err(Error::InvalidFold(format!(
                "segments of length {} are not folded by the map",
                ev.segment_len
            )));
        }
        let expected = self.classify(&walk, ev.vertex);
        if expected != *ev {
            return Err(Error::InvalidFold("event does not match the map".into()));
        }

        let n = self.graph.vertex_count();
        let mut uf = UnionFind::new(n);
        let mut target: Vec<usize> = (0..self.graph.oriented_edge_count()).collect();
        let mut removed = vec![false; self.graph.edge_count()];
        for (&a, &b) in walk.first.iter().zip(&walk.second) {
            uf.union(self.graph.terminus(a), self.graph.terminus(b));
            target[b] = a;
            target[bar(b)] = bar(a);
            removed[unoriented(b)] = true;
        }
        let fold_point = self.graph.terminus(*walk.first.last().unwrap());

        let (vertex_ids, new_vertex_count) = dense_classes(&mut uf, n);
        let mut cell = vec![false; new_vertex_count];
        let mut vertex_map = vec![0; new_vertex_count];
        for v in 0..n {
            let nv = vertex_ids[v];
            cell[nv] |= self.cell[v];
            vertex_map[nv] = self.vertex_map[v];
        }
        cell[vertex_ids[fold_point]] = true;

        let mut edge_ids = vec![usize::MAX; self.graph.oriented_edge_count()];
        let mut origin = Vec::new();
        let mut label = Vec::new();
        for k in 0..self.graph.edge_count() {
            if removed[k] {
                continue;
            }
            edge_ids[2 * k] = origin.len();
            edge_ids[2 * k + 1] = origin.len() + 1;
            origin.push(vertex_ids[self.graph.origin(2 * k)]);
            origin.push(vertex_ids[self.graph.terminus(2 * k)]);
            label.push(self.label[2 * k]);
            label.push(self.label[2 * k + 1]);
        }
        let edge_map = target.iter().map(|&t| edge_ids[t]).collect();
        let result = EdgeletMap::new(
            Graph::from_origins(new_vertex_count, origin),
            self.codomain.clone(),
            vertex_map,
            label,
            cell,
        )?;
        Ok(FoldStep { event: ev.clone(), vertex_map: vertex_ids, edge_map, result })
    }

    /// The coarse cell structure: cell vertices, and cell edges as maximal
    /// edgelet chains between them.
    pub fn cell_structure(&self) -> CellStructure {
        let mut new_id = vec![usize::MAX; self.graph.vertex_count()];
        let mut vertices = Vec::new();
        for v in 0..self.graph.vertex_count() {
            if self.cell[v] {
                new_id[v] = vertices.len();
                vertices.push(v);
            }
        }
        let mut covered = vec![false; self.graph.oriented_edge_count()];
        let mut chains = Vec::new();
        let mut origin = Vec::new();
        for e in 0..self.graph.oriented_edge_count() {
            if covered[e] || !self.cell[self.graph.origin(e)] {
                continue;
            }
            let mut chain = vec![e];
            let mut cur = e;
            while let Some(next) = self.continue_through(cur) {
                chain.push(next);
                cur = next;
            }
            for &x in &chain {
                covered[x] = true;
                covered[bar(x)] = true;
            }
            origin.push(new_id[self.graph.origin(e)]);
            origin.push(new_id[self.graph.terminus(cur)]);
            chains.push(chain);
        }
        let images = chains.iter().map(|c| c.iter().map(|&e| self.label[e]).collect()).collect();
        CellStructure { graph: Graph::from_origins(vertices.len(), origin), vertices, chains, images }
    }

    /// The map on the coarse cell structure.
    pub fn to_graph_map(&self) -> GraphMap {
        let cells = self.cell_structure();
        let vertex_map = cells.vertices.iter().map(|&v| self.vertex_map[v]).collect();
        GraphMap::new(cells.graph, self.codomain.clone(), vertex_map, cells.images)
            .expect("edgelet chains are paths")
    }
}

/// Number the union-find classes densely, in order of their least member.
fn dense_classes(uf: &mut UnionFind, n: usize) -> (Vec<usize>, usize) {
    let mut root_id = vec![usize::MAX; n];
    let mut ids = vec![0; n];
    let mut count = 0;
    for v in 0..n {
        let r = uf.find(v);
        if root_id[r] == usize::MAX {
            root_id[r] = count;
            count += 1;
        }
        ids[v] = root_id[r];
    }
    (ids, count)
}

/// Cell edges of an [`EdgeletMap`]: cell edge `k` is the chain
/// `chains[k]`, oriented as `2k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellStructure {
    pub graph: Graph,
    /// Edgelet-graph id of each cell vertex.
    pub vertices: Vec<usize>,
    pub chains: Vec<Vec<usize>>,
    /// Codomain path of each cell edge.
    pub images: Vec<Vec<usize>>,
}

/// One fold: the fold map on vertices and oriented edgelets, and the
/// induced map on the folded graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldStep {
    pub event: FoldEvent,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
    pub result: EdgeletMap,
}

/// Result of collapsing a tight map down to a foldable one.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum MakeFoldable {
    Foldable(FoldableQuotient),
    /// The whole domain collapses: the map is trivial on `pi_1`.
    PiOneTrivial { subdivision: Subdivision, collapsed: BTreeSet<usize> },
}

/// `f ≃ map ∘ q` where `q` collapses each component of `collapsed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldableQuotient {
    pub subdivision: Subdivision,
    /// Unoriented edgelets of the subdivision that are collapsed.
    pub collapsed: BTreeSet<usize>,
    pub collapsed_is_forest: bool,
    /// `q` on subdivision vertices.
    pub vertex_map: Vec<usize>,
    /// `q` on subdivision oriented edgelets (`None` if collapsed).
    pub edge_map: Vec<Option<usize>>,
    pub map: EdgeletMap,
}

/// Collapse constant edgelets, then repeatedly collapse the star of any
/// vertex with a single gate.
pub fn make_foldable(f: &GraphMap) -> Result<MakeFoldable> {
    if !f.is_tight() {
        return Err(Error::MalformedMap("map must be tight".into()));
    }
    let sub = Subdivision::of(f);
    let g = &sub.graph;
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    let mut alive = vec![true; g.edge_count()];
    let mut image = sub.vertex_map.clone();
    let mut cell: Vec<bool> = (0..n).map(|v| v < f.domain.vertex_count()).collect();
    let mut collapsed = BTreeSet::new();

    for k in 0..g.edge_count() {
        if sub.label[2 * k].is_none() {
            uf.union(g.origin(2 * k), g.terminus(2 * k));
            alive[k] = false;
            collapsed.insert(k);
        }
    }
    for v in 0..n {
        let r = uf.find(v);
        if r != v {
            cell[r] = true;
        }
    }

    loop {
        let mut star: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in 0..g.oriented_edge_count() {
            if alive[unoriented(e)] {
                star[uf.find(g.origin(e))].push(e);
            }
        }
        if alive.iter().all(|&a| !a) {
            return Ok(MakeFoldable::PiOneTrivial { subdivision: sub, collapsed });
        }
        let one_gate = (0..n).find(|&v| {
            uf.find(v) == v
                && !star[v].is_empty()
                && star[v].iter().all(|&e| sub.label[e] == sub.label[star[v][0]])
        });
        let Some(v) = one_gate else { break };
        let eta = sub.label[star[v][0]].expect("live edgelets are labelled");
        let u = f.codomain.terminus(eta);
        for &e in &star[v] {
            let w = g.terminus(e);
            uf.union(v, w);
            alive[unoriented(e)] = false;
            collapsed.insert(unoriented(e));
        }
        let r = uf.find(v);
        image[r] = u;
        cell[r] = true;
    }

    let (vertex_ids, count) = dense_classes(&mut uf, n);
    let mut new_image = vec![0; count];
    let mut new_cell = vec![false; count];
    for v in 0..n {
        let r = uf.find(v);
        new_image[vertex_ids[v]] = image[r];
        new_cell[vertex_ids[v]] |= cell[r];
    }
    let mut edge_map = vec![None; g.oriented_edge_count()];
    let mut origin = Vec::new();
    let mut label = Vec::new();
    for k in 0..g.edge_count() {
        if !alive[k] {
            continue;
        }
        edge_map[2 * k] = Some(origin.len());
        edge_map[2 * k + 1] = Some(origin.len() + 1);
        origin.push(vertex_ids[g.origin(2 * k)]);
        origin.push(vertex_ids[g.terminus(2 * k)]);
        label.push(sub.label[2 * k].expect("live"));
        label.push(sub.label[2 * k + 1].expect("live"));
    }
    let map = EdgeletMap::new(Graph::from_origins(count, origin), f.codomain.clone(), new_image, label, new_cell)?;
    let collapsed_is_forest = g.is_forest(&collapsed);
    Ok(MakeFoldable::Foldable(FoldableQuotient {
        subdivision: sub,
        collapsed,
        collapsed_is_forest,
        vertex_map: vertex_ids,
        edge_map,
        map,
    }))
}

/// A sequence of maximal folds ending in a locally injective map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldFactorization {
    pub initial: EdgeletMap,
    pub steps: Vec<FoldStep>,
}

impl FoldFactorization {
    pub fn terminal(&self) -> &EdgeletMap {
        self.steps.last().map_or(&self.initial, |s| &s.result)
    }

    pub fn map_at(&self, i: usize) -> &EdgeletMap {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].result
        }
    }

    pub fn has_bigon(&self) -> bool {
        self.steps.iter().any(|s| s.event.class == FoldClass::Bigon)
    }

    /// Composite of the fold maps from stage `i` to stage `j` on oriented
    /// edgelets.
    pub fn composite_edge_map(&self, i: usize, j: usize) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.map_at(i).graph().oriented_edge_count()).collect();
        for step in &self.steps[i..j] {
            for x in m.iter_mut() {
                *x = step.edge_map[*x];
            }
        }
        m
    }

    pub fn composite_vertex_map(&self, i: usize, j: usize) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.map_at(i).graph().vertex_count()).collect();
        for step in &self.steps[i..j] {
            for x in m.iter_mut() {
                *x = step.vertex_map[*x];
            }
        }
        m
    }

    /// Whether the composite `G_i -> G_j` has at least two gates at every
    /// vertex of `G_i`.
    pub fn composite_is_foldable(&self, i: usize, j: usize) -> bool {
        let edges = self.composite_edge_map(i, j);
        let g = self.map_at(i).graph();
        (0..g.vertex_count()).all(|v| {
            let images: BTreeSet<usize> = g.star(v).iter().map(|&d| edges[d]).collect();
            images.len() >= 2
        })
    }
}

/// Fold repeatedly until the map is locally injective.
pub fn fold_factorize(f: &EdgeletMap) -> Result<FoldFactorization> {
    if let Some(v) = f.unfoldable_vertex() {
        return Err(Error::NotFoldable(v));
    }
    let mut steps: Vec<FoldStep> = Vec::new();
    loop {
        let current = steps.last().map_or(f, |s| &s.result);
        let Some(ev) = current.find_fold()? else { break };
        let step = current.apply_fold(&ev)?;
        debug_assert!(step.result.edgelet_count() < current.edgelet_count());
        steps.push(step);
    }
    Ok(FoldFactorization { initial: f.clone(), steps })
}

/// How a locally injective map between core graphs sits over its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "degree")]
pub enum TerminalClass {
    /// Not locally surjective somewhere: the image has infinite index.
    NotCoveringInfiniteIndex,
    Covering(usize),
    Homeomorphism,
}

pub fn classify_terminal(f: &EdgeletMap) -> Result<TerminalClass> {
    if let Some(v) = f.non_injective_vertex() {
        return Err(Error::NotLocallyInjective(v));
    }
    if !f.graph().is_connected() || !f.graph().is_core() || !f.codomain().is_connected() || !f.codomain().is_core() {
        return Err(Error::NotCore);
    }
    let g = f.graph();
    let covering = (0..g.vertex_count()).all(|x| g.valence(x) == f.codomain().valence(f.vertex_image(x)));
    if !covering {
        return Ok(TerminalClass::NotCoveringInfiniteIndex);
    }
    let degree = (0..g.vertex_count()).filter(|&x| f.vertex_image(x) == 0).count();
    Ok(if degree == 1 { TerminalClass::Homeomorphism } else { TerminalClass::Covering(degree) })
}

/// Verdicts for an endomorphism of `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoClass {
    pub injective: bool,
    pub surjective: bool,
    pub automorphism: bool,
    pub pi1_trivial: bool,
}

/// Everything computed while classifying an endomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoAnalysis {
    pub map: GraphMap,
    pub foldable: MakeFoldable,
    pub factorization: Option<FoldFactorization>,
    pub terminal: Option<TerminalClass>,
    pub class: EndoClass,
}

pub fn analyze_endomorphism(e: &Endomorphism) -> Result<EndoAnalysis> {
    let map = GraphMap::from_endomorphism(e);
    let foldable = make_foldable(&map)?;
    let surjective = subgroups::is_surjective(e.images(), e.rank())?;
    let (factorization, terminal, class) = match &foldable {
        MakeFoldable::PiOneTrivial { .. } => (
            None,
            None,
            EndoClass { injective: false, surjective, automorphism: false, pi1_trivial: true },
        ),
        MakeFoldable::Foldable(q) => {
            let fact = fold_factorize(&q.map)?;
            let terminal = classify_terminal(fact.terminal())?;
            let injective = q.collapsed_is_forest && !fact.has_bigon();
            let automorphism = injective && terminal == TerminalClass::Homeomorphism;
            (Some(fact), Some(terminal), EndoClass { injective, surjective, automorphism, pi1_trivial: false })
        }
    };
    Ok(EndoAnalysis { map, foldable, factorization, terminal, class })
}

pub fn classify_endomorphism(e: &Endomorphism) -> Result<EndoClass> {
    Ok(analyze_endomorphism(e)?.class)
}

/// Text form of a codomain edge: a letter when the codomain is a rose.
pub fn edge_label(codomain: &Graph, e: usize) -> String {
    if codomain.vertex_count() == 1 && e / 2 < 26 {
        Letter::from_key(e).to_string()
    } else {
        format!("e{e}")
    }
}

pub fn path_label(codomain: &Graph, path: &[usize]) -> String {
    let rose = codomain.vertex_count() == 1 && path.iter().all(|&e| e / 2 < 26);
    if rose {
        path.iter().map(|&e| Letter::from_key(e).to_string()).collect()
    } else {
        path.iter().map(|e| format!("e{e}")).collect::<Vec<_>>().join(".")
    }
}

/// A stage of a fold sequence in coarse cell form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    pub graph: GraphDoc,
    /// Image of each cell edge, oriented `from -> to`.
    pub images: Vec<String>,
}

impl StageDoc {
    pub fn of(map: &EdgeletMap) -> Self {
        let cells = map.cell_structure();
        StageDoc {
            graph: cells.graph.to_doc(),
            images: cells.images.iter().map(|p| path_label(map.codomain(), p)).collect(),
        }
    }

    pub fn to_dot(map: &EdgeletMap, name: &str) -> String {
        let cells = map.cell_structure();
        cells
            .graph
            .to_dot_with(name, |k| format!("e{k}: {}", path_label(map.codomain(), &cells.images[k])))
    }
}

/// One entry of a fold trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldTraceStep {
    pub step: usize,
    pub fold_class: FoldClass,
    pub vertex: usize,
    pub directions: [usize; 2],
    pub direction_labels: [String; 2],
    pub segment_len: usize,
    pub segment: String,
    pub resulting_graph: StageDoc,
}

pub fn fold_trace(fact: &FoldFactorization) -> Vec<FoldTraceStep> {
    fact.steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let before = fact.map_at(i);
            let ev = &s.event;
            let (d, d2) = ev.directions;
            let mut segment = Vec::new();
            let mut cur = d;
            for k in 0..ev.segment_len {
                segment.push(before.label(cur));
                if k + 1 < ev.segment_len {
                    cur = before.continue_through(cur).expect("segment validated");
                }
            }
            FoldTraceStep {
                step: i + 1,
                fold_class: ev.class,
                vertex: ev.vertex,
                directions: [d, d2],
                direction_labels: [
                    edge_label(before.codomain(), before.label(d)),
                    edge_label(before.codomain(), before.label(d2)),
                ],
                segment_len: ev.segment_len,
                segment: path_label(before.codomain(), &segment),
                resulting_graph: StageDoc::of(&s.result),
            }
        })
        .collect()
}
