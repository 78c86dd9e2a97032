//! Simple undirected graphs on the vertex set `0..n`.
//!
//! A [`Graph`] is immutable once built. Growth operations such as
//! [`Graph::with_added_vertex`] return a new value and leave the input alone,
//! so graphs can be shared freely across worker threads.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An undirected, unweighted simple graph on vertices `0..vertex_count`.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted and
/// deduplicated. Two graphs compare equal iff they have the same vertex
/// count and the same edge set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            vertex_count: n,
            edges: Vec::new(),
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an arbitrary list of vertex pairs. Duplicates and
    /// reversed pairs collapse onto a single edge.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidEdge { u, v, n });
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_canonical(n, edges))
    }

    /// `edges` must already be canonical, sorted and deduplicated.
    pub(crate) fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph {
            vertex_count: n,
            edges,
            neighbors,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted, each pair with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count && self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Returns a new graph with one extra vertex (index `vertex_count`)
    /// joined to every vertex in `neighbors`.
    pub fn with_added_vertex<I>(&self, neighbors: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let n = self.vertex_count;
        let mut attach: Vec<usize> = neighbors.into_iter().collect();
        if let Some(&bad) = attach.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidEdge {
                u: bad,
                v: n,
                n: n + 1,
            });
        }
        attach.sort_unstable();
        attach.dedup();

        let mut edges = self.edges.clone();
        edges.extend(attach.iter().map(|&v| (v, n)));
        edges.sort_unstable();
        Ok(Self::from_canonical(n + 1, edges))
    }

    /// Subgraph induced on the first `k` vertices.
    pub fn induced_prefix(&self, k: usize) -> Graph {
        let k = k.min(self.vertex_count);
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(_, v)| v < k)
            .collect();
        Self::from_canonical(k, edges)
    }

    /// The same edges on a larger vertex set; the extra vertices are isolated.
    pub fn padded_to(&self, n: usize) -> Graph {
        if n <= self.vertex_count {
            return self.clone();
        }
        Self::from_canonical(n, self.edges.clone())
    }

    /// Connected components with each vertex labelled by the smallest vertex
    /// id in its component.
    pub fn components(&self) -> ComponentLabeling {
        let n = self.vertex_count;
        let mut labels = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if labels[root] != usize::MAX {
                continue;
            }
            count += 1;
            labels[root] = root;
            queue.push_back(root);
            while let Some(x) = queue.pop_front() {
                for &y in &self.neighbors[x] {
                    if labels[y] == usize::MAX {
                        labels[y] = root;
                        queue.push_back(y);
                    }
                }
            }
        }
        ComponentLabeling { labels, count }
    }

    pub fn is_connected(&self) -> bool {
        self.components().count() <= 1
    }

    /// Combinatorial Laplacian `D - A`. Entries are small integers, so the
    /// `f64` representation is exact.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.vertex_count;
        let mut l = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            l[(u, v)] = -1.0;
            l[(v, u)] = -1.0;
            l[(u, u)] += 1.0;
            l[(v, v)] += 1.0;
        }
        l
    }

    /// Reads the plain edge-list format: a header line `n m`, then `m` lines
    /// `u v`. Blank lines and lines starting with `#` are skipped.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
        let mut header: Option<(usize, usize)> = None;
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let a = parse_field(fields.next(), lineno)?;
            let b = parse_field(fields.next(), lineno)?;
            if fields.next().is_some() {
                return Err(Error::parse(lineno, "expected exactly two fields"));
            }
            match header {
                None => header = Some((a, b)),
                Some(_) => pairs.push((a, b)),
            }
        }
        let (n, m) = header.ok_or_else(|| Error::parse(0, "missing `n m` header"))?;
        if pairs.len() != m {
            return Err(Error::parse(
                0,
                format!("header declares {m} edges, found {}", pairs.len()),
            ));
        }
        Graph::from_edges(n, pairs)
    }

    pub fn write_edge_list<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_edge_list_string().as_bytes())?;
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.edges.len());
        let _ = writeln!(out, "{} {}", self.vertex_count, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn parse_field(field: Option<&str>, line: usize) -> Result<usize> {
    let field = field.ok_or_else(|| Error::parse(line, "expected two fields"))?;
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("not a vertex index: {field:?}")))
}

/// Assignment of vertices to connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    labels: Vec<usize>,
    count: usize,
}

impl ComponentLabeling {
    pub(crate) fn from_parts(labels: Vec<usize>, count: usize) -> Self {
        ComponentLabeling { labels, count }
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of components; zero for the empty graph.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn same_component(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Vertex lists per component, ordered by label, each list ascending.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; self.labels.len()];
        let mut groups: Vec<Vec<usize>> = Vec::with_capacity(self.count);
        for (v, &label) in self.labels.iter().enumerate() {
            if slot[label] == usize::MAX {
                slot[label] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[label]].push(v);
        }
        groups
    }

    pub(crate) fn with_isolated_vertex(&self) -> Self {
        let mut labels = self.labels.clone();
        labels.push(labels.len());
        ComponentLabeling {
            labels,
            count: self.count + 1,
        }
    }

    /// Merges the components containing `a` and `b`; the merged component
    /// keeps the smaller of the two labels.
    pub(crate) fn merged(&self, a: usize, b: usize) -> Self {
        let (la, lb) = (self.labels[a], self.labels[b]);
        if la == lb {
            return self.clone();
        }
        let (keep, drop) = (la.min(lb), la.max(lb));
        let labels = self
            .labels
            .iter()
            .map(|&l| if l == drop { keep } else { l })
            .collect();
        ComponentLabeling {
            labels,
            count: self.count - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn builds_path() {
        let g = path3();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn collapses_reversed_duplicates() {
        let g = Graph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn rejects_self_loop_and_out_of_range() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 0)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(Error::InvalidEdge { .. })
        ));
    }

    #[test]
    fn added_vertex() {
        let p3 = path3();
        let g = p3.with_added_vertex([]).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges(), p3.edges());
        assert_eq!(p3.vertex_count(), 3);

        let edge = Graph::from_edges(2, [(0, 1)]).unwrap();
        let tri = edge.with_added_vertex([0, 1]).unwrap();
        assert_eq!(tri, Graph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap());

        let single = Graph::empty(1).with_added_vertex([0]).unwrap();
        assert_eq!(single, Graph::from_edges(2, [(0, 1)]).unwrap());

        assert!(edge.with_added_vertex([2]).is_err());
    }

    #[test]
    fn added_vertex_keeps_edges_sorted() {
        let g = Graph::from_edges(4, [(0, 3), (1, 2)]).unwrap();
        let h = g.with_added_vertex([0, 2]).unwrap();
        assert_eq!(h.edges(), &[(0, 3), (0, 4), (1, 2), (2, 4)]);
    }

    #[test]
    fn component_counts() {
        assert_eq!(path3().components().count(), 1);
        let two = Graph::empty(2).components();
        assert_eq!(two.count(), 2);
        assert_eq!(two.labels(), &[0, 1]);
        assert_eq!(Graph::empty(0).components().count(), 0);
    }

    #[test]
    fn component_labels_use_smallest_id() {
        let g = Graph::from_edges(5, [(3, 1), (4, 2)]).unwrap();
        assert_eq!(g.components().labels(), &[0, 1, 2, 1, 2]);
        assert_eq!(g.components().groups(), vec![vec![0], vec![1, 3], vec![2, 4]]);
    }

    #[test]
    fn laplacians() {
        let edge = Graph::from_edges(2, [(0, 1)]).unwrap().laplacian();
        assert_eq!(edge, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let tri = Graph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap().laplacian();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri[(i, j)], if i == j { 2.0 } else { -1.0 });
            }
        }

        let iso = path3().with_added_vertex([]).unwrap().laplacian();
        assert!(iso.row(3).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn edge_list_round_trip_and_comments() {
        let text = "# a comment\n3 2\n1 0\n\n# another\n1 2\n";
        let g = Graph::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g, path3());
        assert_eq!(g.to_edge_list_string(), "3 2\n0 1\n1 2\n");
    }

    #[test]
    fn edge_list_errors() {
        assert!(Graph::read_edge_list("".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 1\n0 x\n".as_bytes()).is_err());
        assert!(matches!(
            Graph::read_edge_list("3 1\n0 3\n".as_bytes()),
            Err(Error::InvalidEdge { .. })
        ));
    }
}
