//! Effective resistance and the resistance-based graph distances.
//!
//! Every edge is a unit resistor. For two vertices in the same connected
//! component the effective resistance is
//! `R(u, v) = L⁺(u, u) + L⁺(v, v) - 2 L⁺(u, v)`, where `L⁺` is the
//! pseudoinverse of the component Laplacian. Vertices in different
//! components are [`Resistance::Disconnected`]; that sentinel is never stored
//! as an in-band float, and [`renormalize`] is the only place that turns it
//! into a number.
//!
//! Per component the pseudoinverse is obtained from the Cholesky inverse of
//! `L + J/s` (with `J` the all-ones matrix and `s` the component size). That
//! matrix is `L⁺ + J/s`, and the `J/s` term cancels in the resistance
//! formula.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{Cholesky, DMatrix};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{ComponentLabeling, Graph};

/// Effective resistance between two vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resistance {
    Finite(f64),
    Disconnected,
}

impl Resistance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Resistance::Finite(r) => Some(r),
            Resistance::Disconnected => None,
        }
    }

    pub fn is_disconnected(self) -> bool {
        matches!(self, Resistance::Disconnected)
    }
}

/// Parameters of the renormalized resistance `R / (R + beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceParams {
    beta: f64,
}

impl DistanceParams {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(DistanceParams { beta })
        } else {
            Err(Error::InvalidParameter(format!(
                "beta must be positive and finite, got {beta}"
            )))
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams { beta: 1.0 }
    }
}

/// Pairwise effective resistances of a graph, with its component labeling.
#[derive(Clone, Debug)]
pub struct ResistanceMatrix {
    // Entries for pairs in different components are meaningless and never
    // read; `labeling` decides connectivity.
    values: DMatrix<f64>,
    labeling: ComponentLabeling,
}

impl ResistanceMatrix {
    pub fn size(&self) -> usize {
        self.labeling.len()
    }

    pub fn labeling(&self) -> &ComponentLabeling {
        &self.labeling
    }

    pub fn get(&self, u: usize, v: usize) -> Resistance {
        if self.labeling.same_component(u, v) {
            Resistance::Finite(self.values[(u, v)])
        } else {
            Resistance::Disconnected
        }
    }

    /// Renormalized resistance. Indices at or beyond [`size`](Self::size)
    /// are treated as isolated padding vertices.
    pub fn renormalized(&self, u: usize, v: usize, params: DistanceParams) -> f64 {
        if u == v {
            return 0.0;
        }
        let n = self.size();
        if u >= n || v >= n || !self.labeling.same_component(u, v) {
            return 1.0;
        }
        let r = self.values[(u, v)];
        r / (r + params.beta)
    }

    /// The same resistances with one extra isolated vertex appended.
    pub fn with_isolated_vertex(&self) -> ResistanceMatrix {
        let n = self.size();
        let values = self.values.clone().resize(n + 1, n + 1, 0.0);
        ResistanceMatrix {
            values,
            labeling: self.labeling.with_isolated_vertex(),
        }
    }

    /// Resistances after adding the edge `{a, b}`, which must not already be
    /// present in the underlying graph.
    pub fn update_add_edge(&self, a: usize, b: usize) -> Result<ResistanceMatrix> {
        let mut out = self.clone();
        out.add_edge_in_place(a, b)?;
        Ok(out)
    }

    /// Resistances of the graph obtained by appending a vertex joined to
    /// `neighbors`, computed by successive single-edge updates.
    pub fn extend_with_vertex(&self, neighbors: &[usize]) -> Result<ResistanceMatrix> {
        let mut out = self.with_isolated_vertex();
        let new = self.size();
        for &w in neighbors {
            out.add_edge_in_place(w, new)?;
        }
        Ok(out)
    }

    fn add_edge_in_place(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.size();
        if a == b || a >= n || b >= n {
            return Err(Error::InvalidEdge { u: a, v: b, n });
        }
        let (la, lb) = (self.labeling.label(a), self.labeling.label(b));
        let labels = self.labeling.labels();

        if la == lb {
            let members: Vec<usize> = (0..n).filter(|&x| labels[x] == la).collect();
            let denom = 4.0 * (1.0 + self.values[(a, b)]);
            let w: Vec<f64> = members
                .iter()
                .map(|&x| self.values[(x, b)] - self.values[(x, a)])
                .collect();
            for (i, &u) in members.iter().enumerate() {
                for (j, &v) in members.iter().enumerate().skip(i + 1) {
                    let d = w[i] - w[j];
                    let r = self.values[(u, v)] - d * d / denom;
                    self.values[(u, v)] = r;
                    self.values[(v, u)] = r;
                }
            }
        } else {
            // Bridge: resistances inside each side are unchanged, and any
            // path across goes through the new edge in series.
            let side_a: Vec<usize> = (0..n).filter(|&x| labels[x] == la).collect();
            let side_b: Vec<usize> = (0..n).filter(|&y| labels[y] == lb).collect();
            for &x in &side_a {
                let rxa = self.values[(x, a)];
                for &y in &side_b {
                    let r = rxa + 1.0 + self.values[(b, y)];
                    self.values[(x, y)] = r;
                    self.values[(y, x)] = r;
                }
            }
            self.labeling = self.labeling.merged(a, b);
        }
        Ok(())
    }

    /// CSV dump, one row per vertex. Disconnected pairs are written as `inf`.
    pub fn to_csv_string(&self) -> String {
        let n = self.size();
        let mut out = String::new();
        for u in 0..n {
            for v in 0..n {
                if v > 0 {
                    out.push(',');
                }
                match self.get(u, v) {
                    Resistance::Finite(r) => {
                        let _ = write!(out, "{r}");
                    }
                    Resistance::Disconnected => out.push_str("inf"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    /// Reads the CSV dump back. Component structure is recovered from the
    /// pattern of `inf` entries and must be consistent.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<ResistanceMatrix> {
        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| match tok.trim() {
                    "inf" => Ok(None),
                    t => t
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite() && *x >= 0.0)
                        .map(Some)
                        .ok_or_else(|| Error::parse(idx + 1, format!("bad entry {t:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::parse(0, "resistance matrix is not square"));
        }
        let mut labels = vec![0; n];
        let mut values = DMatrix::zeros(n, n);
        for v in 0..n {
            labels[v] = (0..=v).find(|&u| rows[u][v].is_some()).unwrap_or(v);
            for u in 0..n {
                values[(u, v)] = rows[u][v].unwrap_or(0.0);
            }
        }
        for u in 0..n {
            if rows[u][u] != Some(0.0) {
                return Err(Error::parse(u + 1, "diagonal entry must be 0"));
            }
            for v in 0..n {
                let same = labels[u] == labels[v];
                if same != rows[u][v].is_some() || rows[u][v] != rows[v][u] {
                    return Err(Error::parse(u + 1, "inconsistent component structure"));
                }
            }
        }
        let count = (0..n).filter(|&v| labels[v] == v).count();
        Ok(ResistanceMatrix {
            values,
            labeling: ComponentLabeling::from_parts(labels, count),
        })
    }
}

/// All pairwise effective resistances of `g`.
pub fn resistance_matrix(g: &Graph) -> ResistanceMatrix {
    let n = g.vertex_count();
    let labeling = g.components();
    let mut values = DMatrix::zeros(n, n);
    for group in labeling.groups() {
        let s = group.len();
        if s < 2 {
            continue;
        }
        let mut index = vec![usize::MAX; n];
        for (i, &v) in group.iter().enumerate() {
            index[v] = i;
        }
        let shift = 1.0 / s as f64;
        let mut m = DMatrix::from_element(s, s, shift);
        for &v in &group {
            let i = index[v];
            m[(i, i)] += g.degree(v) as f64;
            for &w in g.neighbors(v) {
                m[(i, index[w])] -= 1.0;
            }
        }
        let inv = Cholesky::new(m)
            .expect("shifted Laplacian of a connected component is positive definite")
            .inverse();
        for i in 0..s {
            for j in (i + 1)..s {
                let r = inv[(i, i)] + inv[(j, j)] - 2.0 * inv[(i, j)];
                values[(group[i], group[j])] = r;
                values[(group[j], group[i])] = r;
            }
        }
    }
    ResistanceMatrix { values, labeling }
}

/// Effective resistance by the matrix-tree route, in exact integer
/// arithmetic: the number of spanning 2-forests separating `u` from `v`
/// divided by the number of spanning trees, both on the component of `u`.
///
/// Cost grows quickly with component size; intended for small graphs.
pub fn oracle_resistance(g: &Graph, u: usize, v: usize) -> Resistance {
    match oracle_resistance_ratio(g, u, v) {
        None => Resistance::Disconnected,
        Some((forests, trees)) => {
            let num = forests.to_f64().unwrap_or(f64::NAN);
            let den = trees.to_f64().unwrap_or(f64::NAN);
            Resistance::Finite(num / den)
        }
    }
}

/// `(separating 2-forests, spanning trees)` for the pair, or `None` when
/// the vertices lie in different components.
pub fn oracle_resistance_ratio(g: &Graph, u: usize, v: usize) -> Option<(BigInt, BigInt)> {
    let labeling = g.components();
    if !labeling.same_component(u, v) {
        return None;
    }
    let group: Vec<usize> = (0..g.vertex_count())
        .filter(|&x| labeling.same_component(x, u))
        .collect();
    let trees = reduced_laplacian_det(g, &group, &[u]);
    if u == v {
        return Some((BigInt::zero(), trees));
    }
    let forests = reduced_laplacian_det(g, &group, &[u, v]);
    Some((forests, trees))
}

/// Determinant of the Laplacian restricted to `group`, with the rows and
/// columns of `removed` deleted.
fn reduced_laplacian_det(g: &Graph, group: &[usize], removed: &[usize]) -> BigInt {
    let kept: Vec<usize> = group
        .iter()
        .copied()
        .filter(|x| !removed.contains(x))
        .collect();
    let k = kept.len();
    let mut m: Vec<Vec<BigInt>> = kept
        .iter()
        .map(|&a| {
            kept.iter()
                .map(|&b| {
                    if a == b {
                        BigInt::from(g.degree(a))
                    } else if g.has_edge(a, b) {
                        BigInt::from(-1)
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    bareiss_det(&mut m, k)
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_det(m: &mut [Vec<BigInt>], k: usize) -> BigInt {
    if k == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for p in 0..k - 1 {
        if m[p][p].is_zero() {
            match (p + 1..k).find(|&r| !m[r][p].is_zero()) {
                Some(r) => {
                    m.swap(p, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                let t = &m[i][j] * &m[p][p] - &m[i][p] * &m[p][j];
                m[i][j] = t / &prev;
            }
        }
        prev = m[p][p].clone();
    }
    sign * m[k - 1][k - 1].clone()
}

/// `R / (R + beta)` for connected pairs, 1 for disconnected ones.
pub fn renormalize(r: Resistance, params: DistanceParams) -> Result<f64> {
    match r {
        Resistance::Disconnected => Ok(1.0),
        Resistance::Finite(x) if x >= 0.0 && x.is_finite() => Ok(x / (x + params.beta)),
        Resistance::Finite(x) => Err(Error::InvalidResistance(x)),
    }
}

/// Element-wise `p`-norm of the difference of the two resistance matrices,
/// over ordered pairs. `p = f64::INFINITY` gives the max-norm. Both graphs
/// must be connected and share the vertex count.
pub fn rp_distance(g1: &Graph, g2: &Graph, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p-norm needs p >= 1, got {p}")));
    }
    if g1.vertex_count() != g2.vertex_count() {
        return Err(Error::PreconditionViolation(format!(
            "vertex counts differ ({} vs {}); use rd_distance",
            g1.vertex_count(),
            g2.vertex_count()
        )));
    }
    if !g1.is_connected() || !g2.is_connected() {
        return Err(Error::PreconditionViolation(
            "both graphs must be connected; use rd_distance".into(),
        ));
    }
    let r1 = resistance_matrix(g1);
    let r2 = resistance_matrix(g2);
    let n = g1.vertex_count();
    let diffs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
        (r1.values[(i, j)] - r2.values[(i, j)]).abs()
    });
    if p.is_infinite() {
        return Ok(diffs.fold(0.0, f64::max));
    }
    Ok(diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Renormalized resistance distance. The smaller graph is padded with
/// isolated vertices so both live on the same vertex set; vertex `i` of one
/// graph is identified with vertex `i` of the other.
pub fn rd_distance(g1: &Graph, g2: &Graph, params: DistanceParams) -> f64 {
    rd_distance_matrices(&resistance_matrix(g1), &resistance_matrix(g2), params)
}

/// [`rd_distance`] on precomputed resistance matrices.
pub fn rd_distance_matrices(
    r1: &ResistanceMatrix,
    r2: &ResistanceMatrix,
    params: DistanceParams,
) -> f64 {
    let n = r1.size().max(r2.size());
    let mut total = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            total += (r1.renormalized(u, v, params) - r2.renormalized(u, v, params)).abs();
        }
    }
    total
}
