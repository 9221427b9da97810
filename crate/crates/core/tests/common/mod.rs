#![allow(dead_code)]

use negtype::combine::{Component, GluePlan, GlueStep};
use negtype::{Scalar, SemiMetricSpace, WeightedGraph, WeightedSimplex};
use rand::Rng;

pub fn unit_graph(vertices: &[&str], edges: &[(&str, &str)]) -> SemiMetricSpace {
    SemiMetricSpace::from_graph(&WeightedGraph::unit(vertices, edges).unwrap()).unwrap()
}

pub fn cycle5() -> SemiMetricSpace {
    unit_graph(&["x", "v2", "v3", "v4", "v5"], &[("x", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v5"), ("v5", "x")])
}

/// Star with center `v6`; `v9` is the leaf glued onto the cycle.
pub fn star() -> SemiMetricSpace {
    unit_graph(&["v6", "v7", "v8", "v9"], &[("v9", "v6"), ("v6", "v7"), ("v6", "v8")])
}

pub fn g() -> SemiMetricSpace {
    unit_graph(
        &["x", "v2", "v3", "v4", "v5", "v6", "v7", "v8"],
        &[("x", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v5"), ("v5", "x"), ("x", "v6"), ("v6", "v7"), ("v6", "v8")],
    )
}

pub fn g_plan() -> GluePlan {
    GluePlan::additive(
        vec![Component { name: "cycle".into(), space: cycle5() }, Component { name: "star".into(), space: star() }],
        vec![step("cycle", "x", "star", "v9")],
    )
}

pub fn step(l: &str, ll: &str, r: &str, rl: &str) -> GlueStep {
    GlueStep { left: l.into(), left_label: ll.into(), right: r.into(), right_label: rl.into() }
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Random metric with distances in `{8/8, 9/8, ..., 16/8}`; any such
/// matrix satisfies the triangle inequality.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> SemiMetricSpace {
    let mut m = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = Scalar::ratio(rng.random_range(8..=16), 8);
            m[i][j] = d.clone();
            m[j][i] = d;
        }
    }
    SemiMetricSpace::from_matrix(labels(n), m, true).unwrap()
}

/// Random shortest-path metric of a connected graph with integer edge
/// lengths in `1..=3`.
pub fn random_graph_metric<R: Rng>(rng: &mut R, n: usize) -> SemiMetricSpace {
    let names = labels(n);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((names[u].clone(), names[v].clone(), Scalar::int(rng.random_range(1..=3))));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.3) && !edges.iter().any(|e| e.0 == names[u] && e.1 == names[v]) {
                edges.push((names[u].clone(), names[v].clone(), Scalar::int(rng.random_range(1..=3))));
            }
        }
    }
    SemiMetricSpace::from_graph(&WeightedGraph::new(names, edges).unwrap()).unwrap()
}

fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<i64> {
    (0..k).map(|_| rng.random_range(0..=12)).collect()
}

/// Random balanced simplex with exact weights on a space of `n` points.
/// Points may repeat within and across teams.
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> WeightedSimplex {
    loop {
        let ka = rng.random_range(1..=n.min(4) + 1);
        let kb = rng.random_range(1..=n.min(4) + 1);
        let wa = random_weights(rng, ka);
        let wb = random_weights(rng, kb);
        let (sa, sb): (i64, i64) = (wa.iter().sum(), wb.iter().sum());
        if sa == 0 || sb == 0 {
            continue;
        }
        // Scale each team to the common total sa * sb, then divide by a random denominator.
        let den = rng.random_range(1..=7);
        let team = |w: &[i64], other: i64, rng: &mut R| -> Vec<(usize, Scalar)> {
            w.iter().map(|&x| (rng.random_range(0..n), Scalar::ratio(x * other, den))).collect()
        };
        let a = team(&wa, sb, rng);
        let b = team(&wb, sa, rng);
        return WeightedSimplex::new(a, b).unwrap();
    }
}

/// Random glue plan with `k` components of 2 to `max_points` points each and
/// distances from [`random_metric`]. Every component uses labels `p0, p1, ...`
/// so most glued labels collide and get renamed.
pub fn random_plan<R: Rng>(rng: &mut R, k: usize, max_points: usize) -> GluePlan {
    let components: Vec<Component> = (0..k)
        .map(|c| {
            let n = rng.random_range(2..=max_points);
            Component { name: format!("c{c}"), space: random_metric(rng, n) }
        })
        .collect();
    let steps = random_steps(rng, &components);
    GluePlan::additive(components, steps)
}

/// A random valid sequence of glue steps over `components` in index order.
pub fn random_steps<R: Rng>(rng: &mut R, components: &[Component]) -> Vec<GlueStep> {
    (1..components.len())
        .map(|r| {
            let l = rng.random_range(0..r);
            let (lc, rc) = (&components[l], &components[r]);
            GlueStep {
                left: lc.name.clone(),
                left_label: lc.space.label(rng.random_range(0..lc.space.len())).to_string(),
                right: rc.name.clone(),
                right_label: rc.space.label(rng.random_range(0..rc.space.len())).to_string(),
            }
        })
        .collect()
}
