//! Normalized edge-length structures on natural core graphs: circuit
//! lengths, systoles and face collapses.

use std::collections::BTreeSet;
use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Num, Signed};

use crate::error::{Error, Result};
use crate::graphs::{bar, is_cyclically_tight, unoriented, Graph};
use crate::words::least_rotation;

/// Number types usable as edge lengths.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync {
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Whether `self` counts as equal to `other` (exact for rationals).
    fn approx_eq(&self, other: &Self) -> bool;
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-9
    }
}

impl Scalar for f32 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f32 / denom as f32
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-5
    }
}

impl<T> Scalar for Ratio<T>
where
    T: num_integer::Integer + Signed + Clone + Debug + Display + Send + Sync + From<i32> + TryFrom<i64>,
{
    fn from_ratio(numer: i64, denom: i64) -> Self {
        let convert = |x: i64| T::try_from(x).unwrap_or_else(|_| panic!("{x} does not fit the integer type"));
        Ratio::new(convert(numer), convert(denom))
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

/// A nonnegative length on each edge of a natural core graph, summing to
/// one, whose zero-length edges form a forest.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthStructure<S> {
    graph: Graph,
    lengths: Vec<S>,
}

impl<S: Scalar> LengthStructure<S> {
    pub fn new(graph: Graph, lengths: Vec<S>) -> Result<Self> {
        if !graph.is_connected() || graph.rank()? < 2 {
            return Err(Error::InvalidLengths("graph must be connected of rank at least 2".into()));
        }
        if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.valence(v) < 3) {
            return Err(Error::InvalidLengths(format!("vertex {v} is not natural")));
        }
        if lengths.len() != graph.edge_count() {
            return Err(Error::InvalidLengths(format!(
                "expected {} lengths, got {}",
                graph.edge_count(),
                lengths.len()
            )));
        }
        if let Some(k) = lengths.iter().position(|l| l.is_negative()) {
            return Err(Error::InvalidLengths(format!("edge {k} has negative length")));
        }
        let sum = lengths.iter().fold(S::zero(), |acc, l| acc + l.clone());
        if !sum.approx_eq(&S::one()) {
            return Err(Error::InvalidLengths(format!("lengths sum to {sum}, not 1")));
        }
        let s = LengthStructure { graph, lengths };
        if !s.graph.is_forest(&s.zero_set()) {
            return Err(Error::InvalidLengths("zero-length edges contain a circuit".into()));
        }
        Ok(s)
    }

    /// Every edge gets the same length.
    pub fn barycenter(graph: Graph) -> Result<Self> {
        let n = graph.edge_count() as i64;
        let lengths = vec![S::from_ratio(1, n.max(1)); graph.edge_count()];
        Self::new(graph, lengths)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }

    /// Length of the unoriented edge underlying oriented edge `e`.
    pub fn edge_length(&self, e: usize) -> &S {
        &self.lengths[unoriented(e)]
    }

    /// Unoriented edges of length zero.
    pub fn zero_set(&self) -> BTreeSet<usize> {
        self.lengths.iter().enumerate().filter(|(_, l)| l.is_zero()).map(|(k, _)| k).collect()
    }

    /// Total length of the edges crossed by a circuit, with multiplicity.
    pub fn circuit_length(&self, circuit: &[usize]) -> Result<S> {
        if circuit.iter().any(|&e| e >= self.graph.oriented_edge_count()) {
            return Err(Error::NotACircuit("unknown edge".into()));
        }
        if !is_cyclically_tight(&self.graph, circuit) {
            return Err(Error::NotACircuit("not a closed tight path".into()));
        }
        Ok(circuit.iter().fold(S::zero(), |acc, &e| acc + self.edge_length(e).clone()))
    }

    /// Least length of an embedded circle, with the lexicographically least
    /// witness among those realizing it.
    pub fn systole(&self) -> (S, Vec<usize>) {
        let mut best: Option<(S, Vec<usize>)> = None;
        for c in embedded_circles(&self.graph) {
            let len = c.iter().fold(S::zero(), |acc, &e| acc + self.edge_length(e).clone());
            let better = match &best {
                None => true,
                Some((b, w)) => len < *b || (len == *b && c < *w),
            };
            if better {
                best = Some((len, c));
            }
        }
        best.expect("a graph of rank at least 2 has embedded circles")
    }

    /// Collapse the zero-length forest, carrying the surviving lengths.
    pub fn face_collapse(&self) -> Result<LengthStructure<S>> {
        let zeros = self.zero_set();
        if zeros.is_empty() {
            return Err(Error::NoZeroEdges);
        }
        let (graph, map) = self.graph.collapse_forest(&zeros)?;
        let mut lengths = vec![S::zero(); graph.edge_count()];
        for k in 0..self.graph.edge_count() {
            if let Some(ne) = map.edge_map[2 * k] {
                lengths[ne / 2] = self.lengths[k].clone();
            }
        }
        LengthStructure::new(graph, lengths)
    }
}

/// All embedded circles, each listed once in its canonical form: the
/// least rotation of either orientation.
pub fn embedded_circles(graph: &Graph) -> Vec<Vec<usize>> {
    let mut found = BTreeSet::new();
    for start in 0..graph.vertex_count() {
        let mut path = Vec::new();
        let mut visited = vec![false; graph.vertex_count()];
        visited[start] = true;
        extend_circles(graph, start, start, &mut visited, &mut path, &mut found);
    }
    found.into_iter().collect()
}

fn extend_circles(
    graph: &Graph,
    start: usize,
    at: usize,
    visited: &mut [bool],
    path: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<usize>>,
) {
    for &e in graph.star(at) {
        if path.last().is_some_and(|&last| e == bar(last)) {
            continue;
        }
        let to = graph.terminus(e);
        if to == start {
            path.push(e);
            found.insert(canonical_circle(path));
            path.pop();
        } else if to > start && !visited[to] {
            visited[to] = true;
            path.push(e);
            extend_circles(graph, start, to, visited, path, found);
            path.pop();
            visited[to] = false;
        }
    }
}

fn canonical_circle(c: &[usize]) -> Vec<usize> {
    let rotate = |c: &[usize]| {
        let r = least_rotation(c);
        let mut out = c[r..].to_vec();
        out.extend_from_slice(&c[..r]);
        out
    };
    let reversed: Vec<usize> = c.iter().rev().map(|&e| bar(e)).collect();
    rotate(c).min(rotate(&reversed))
}
