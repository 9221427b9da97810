//! Finite semi-metric spaces, shortest-path metrics and power transforms.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative slack used when checking the triangle inequality on float data.
const TRIANGLE_TOL: f64 = 1e-12;

/// A labeled finite set with a symmetric distance matrix, zero on the
/// diagonal and strictly positive off it.
///
/// `is_metric` records whether the triangle inequality was verified. It is
/// never a reason to reject a space.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Scalar>>,
    is_metric: bool,
}

impl SemiMetricSpace {
    pub fn from_matrix(
        labels: Vec<String>,
        matrix: Vec<Vec<Scalar>>,
        check_triangle: bool,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if matrix.len() != n {
            return Err(Error::DimensionMismatch { rows: matrix.len(), labels: n });
        }
        for (row, entries) in matrix.iter().enumerate() {
            if entries.len() != n {
                return Err(Error::NotSquare { row, len: entries.len(), expected: n });
            }
        }
        let mut seen = HashMap::new();
        for (i, label) in labels.iter().enumerate() {
            if let Some(&first) = seen.get(label.as_str()) {
                return Err(Error::DuplicateLabel { label: label.clone(), first, second: i });
            }
            seen.insert(label.as_str(), i);
        }
        for i in 0..n {
            if !matrix[i][i].is_zero() {
                return Err(Error::NonzeroDiagonal { i });
            }
            for j in 0..n {
                let v = &matrix[i][j];
                if v.is_negative() {
                    return Err(Error::NegativeEntry { i, j });
                }
                if !v.to_f64().is_finite() {
                    return Err(Error::Domain(format!("non-finite distance at ({i},{j})")));
                }
                if i != j && v.is_zero() {
                    return Err(Error::ZeroOffDiagonal { i, j });
                }
                if j > i && matrix[j][i] != *v {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        let mut space = SemiMetricSpace { labels, dist: matrix, is_metric: false };
        if check_triangle {
            space.is_metric = space.triangle_violation().is_none();
        }
        Ok(space)
    }

    /// Shortest-path metric of a connected weighted graph.
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        let n = g.vertices.len();
        let mut d: Vec<Vec<Option<Scalar>>> = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(Scalar::zero());
        }
        for &(u, v, ref w) in &g.adjacency {
            let better = match &d[u][v] {
                Some(cur) => w < cur,
                None => true,
            };
            if better {
                d[u][v] = Some(w.clone());
                d[v][u] = Some(w.clone());
            }
        }
        // Floyd–Warshall.
        for k in 0..n {
            for i in 0..n {
                let Some(dik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    let Some(dkj) = &d[k][j] else { continue };
                    let through = &dik + dkj;
                    let better = match &d[i][j] {
                        Some(cur) => through < *cur,
                        None => true,
                    };
                    if better {
                        d[i][j] = Some(through);
                    }
                }
            }
        }
        if d[0].iter().any(Option::is_none) {
            return Err(Error::Disconnected { components: g.components() });
        }
        let matrix = d
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.expect("connected")).collect())
            .collect();
        let mut space = SemiMetricSpace::from_matrix(g.vertices.clone(), matrix, false)?;
        space.is_metric = true;
        Ok(space)
    }

    /// The space `(X, d^c)`.
    pub fn power_transform(&self, c: &Scalar) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Domain(format!("power transform exponent must be > 0, got {c}")));
        }
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|x| x.pow(c)).collect())
            .collect();
        let mut out = SemiMetricSpace { labels: self.labels.clone(), dist, is_metric: false };
        out.is_metric = if *c <= Scalar::one() {
            self.is_metric
        } else {
            out.triangle_violation().is_none()
        };
        Ok(out)
    }

    /// Every distance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Scalar) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::Domain(format!("scale factor must be > 0, got {factor}")));
        }
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|x| x * factor).collect())
            .collect();
        Ok(SemiMetricSpace { labels: self.labels.clone(), dist, is_metric: self.is_metric })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, i: usize, j: usize) -> &Scalar {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Scalar>] {
        &self.dist
    }

    pub fn is_metric(&self) -> bool {
        self.is_metric
    }

    /// True when every distance is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.dist.iter().flatten().all(Scalar::is_exact)
    }

    /// `d(i,j)^p`, with `d(i,i)^p = 0` for every `p` including `p = 0`.
    pub fn dist_pow(&self, i: usize, j: usize, p: &Scalar) -> Scalar {
        if i == j {
            Scalar::zero()
        } else {
            self.dist[i][j].pow(p)
        }
    }

    /// The matrix `M_ij = d(x_i, x_j)^p` as floats.
    pub fn power_matrix(&self, p: f64) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.dist[i][j].to_f64().powf(p) })
    }

    /// The matrix `M_ij = d(x_i, x_j)^p` as scalars; `None` unless every entry is exact.
    pub fn exact_power_matrix(&self, p: &Scalar) -> Option<Vec<Vec<Scalar>>> {
        let n = self.len();
        let m: Vec<Vec<Scalar>> =
            (0..n).map(|i| (0..n).map(|j| self.dist_pow(i, j, p)).collect()).collect();
        m.iter().flatten().all(Scalar::is_exact).then_some(m)
    }

    /// First triple `(i, j, k)` with `d(i,k) > d(i,j) + d(j,k)`, if any.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = &self.dist[i][k];
                    let rhs = &self.dist[i][j] + &self.dist[j][k];
                    let violated = match (lhs, &rhs) {
                        (Scalar::Exact(a), Scalar::Exact(b)) => a > b,
                        _ => lhs.to_f64() > rhs.to_f64() * (1.0 + TRIANGLE_TOL),
                    };
                    if violated {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn min_nonzero_distance(&self) -> Result<Scalar> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: n });
        }
        Ok(self.off_diagonal().fold(self.dist[0][1].clone(), |m, x| m.min(x.clone())))
    }

    /// Largest distance; zero for a single point.
    pub fn diameter(&self) -> Scalar {
        self.off_diagonal().fold(Scalar::zero(), |m, x| m.max(x.clone()))
    }

    fn off_diagonal(&self) -> impl Iterator<Item = &Scalar> {
        self.dist
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, x)| x))
    }
}

/// An undirected graph with positive edge lengths.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    edges: Vec<(String, String, Scalar)>,
    adjacency: Vec<(usize, usize, Scalar)>,
}

impl WeightedGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(String, String, Scalar)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if let Some(&first) = index.get(v.as_str()) {
                return Err(Error::DuplicateLabel { label: v.clone(), first, second: i });
            }
            index.insert(v.as_str(), i);
        }
        let mut adjacency = Vec::with_capacity(edges.len());
        for (u, v, w) in &edges {
            let ui = *index.get(u.as_str()).ok_or_else(|| Error::UnknownLabel(u.clone()))?;
            let vi = *index.get(v.as_str()).ok_or_else(|| Error::UnknownLabel(v.clone()))?;
            if ui == vi {
                return Err(Error::InvalidGraph(format!("self-loop at {u:?}")));
            }
            if !w.is_positive() {
                return Err(Error::InvalidGraph(format!("edge {u:?}-{v:?} has length {w}, must be > 0")));
            }
            adjacency.push((ui, vi, w.clone()));
        }
        Ok(WeightedGraph { vertices, edges, adjacency })
    }

    /// Convenience constructor for graphs with unit edge lengths.
    pub fn unit(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        WeightedGraph::new(
            vertices.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|(u, v)| (u.to_string(), v.to_string(), Scalar::one())).collect(),
        )
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(String, String, Scalar)] {
        &self.edges
    }

    /// Connected components as label lists, in vertex order.
    pub fn components(&self) -> Vec<Vec<String>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for &(u, v, _) in &self.adjacency {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
        let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            match groups.iter_mut().find(|(root, _)| *root == r) {
                Some((_, members)) => members.push(self.vertices[i].clone()),
                None => groups.push((r, vec![self.vertices[i].clone()])),
            }
        }
        groups.into_iter().map(|(_, m)| m).collect()
    }

    /// Connected with exactly `|V| - 1` edges.
    pub fn is_tree(&self) -> bool {
        self.adjacency.len() + 1 == self.vertices.len() && self.components().len() == 1
    }
}
