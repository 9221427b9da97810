//! Additive and p-additive combinations of semi-metric spaces glued at single
//! points, the decomposition of simplices into component simplices, and the
//! gap composition formula with its extremal simplex.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{Entry, Team, WeightedSimplex};
use crate::space::{SemiMetricSpace, WeightedGraph};

#[derive(Clone, Debug)]
pub struct Component {
    pub name: String,
    pub space: SemiMetricSpace,
}

/// Glue `right_label` of component `right` onto `left_label` of component
/// `left`. The left component must already be part of the construction and
/// the right one must not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlueStep {
    pub left: String,
    pub left_label: String,
    pub right: String,
    pub right_label: String,
}

#[derive(Clone, Debug)]
pub struct GluePlan {
    /// Joining exponent; `1` gives the plain additive combination.
    pub p: Scalar,
    pub components: Vec<Component>,
    pub steps: Vec<GlueStep>,
}

impl GluePlan {
    pub fn additive(components: Vec<Component>, steps: Vec<GlueStep>) -> Self {
        GluePlan { p: Scalar::one(), components, steps }
    }
}

/// Where a point of the combination came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Origin {
    pub component: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluePoint {
    /// Index of the glue-point in the combined space.
    pub index: usize,
    pub label: String,
    /// Label the right operand used for this point, kept as an alias.
    pub alias: Origin,
}

/// A point label changed to avoid a clash with an existing label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Renamed {
    pub component: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug)]
struct Join {
    glue: usize,
    right: usize,
}

#[derive(Clone, Debug)]
pub struct CombinationSpace {
    pub space: SemiMetricSpace,
    pub p: Scalar,
    pub components: Vec<Component>,
    /// Component points of every combined point (several for glue-points).
    pub provenance: Vec<Vec<Origin>>,
    pub glue_points: Vec<GluePoint>,
    pub renamed: Vec<Renamed>,
    /// `index_maps[c][i]` is the combined index of point `i` of component `c`.
    pub index_maps: Vec<Vec<usize>>,
    /// Component indices in construction order.
    order: Vec<usize>,
    joins: Vec<Join>,
}

impl CombinationSpace {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Component indices in the order they entered the construction.
    pub fn construction_order(&self) -> &[usize] {
        &self.order
    }

    /// Maps a simplex on component `c` into the combined space.
    pub fn lift(&self, c: usize, d: &WeightedSimplex) -> Result<WeightedSimplex> {
        let map = &self.index_maps[c];
        d.check_indices(map.len())?;
        let lift = |t: &[Entry]| t.iter().map(|(i, w)| (map[*i], w.clone())).collect();
        WeightedSimplex::new(lift(d.a_team()), lift(d.b_team()))
    }
}

fn component_index(plan: &GluePlan, name: &str) -> Result<usize> {
    plan.components
        .iter()
        .position(|c| c.name == name)
        .ok_or_else(|| Error::Plan(format!("unknown component '{name}'")))
}

fn local_index(c: &Component, label: &str) -> Result<usize> {
    c.space
        .index_of(label)
        .ok_or_else(|| Error::UnknownLabel(format!("{}.{}", c.name, label)))
}

/// Glues the components of `plan` step by step. Distances are combined in
/// the `p`-th power: `d(y,z)^p = d(y,x)^p + d(x,z)^p` across a glue-point
/// `x`.
pub fn build_combination(plan: &GluePlan) -> Result<CombinationSpace> {
    if !plan.p.is_positive() {
        return Err(Error::Domain(format!("joining exponent must be > 0, got {}", plan.p)));
    }
    let k = plan.components.len();
    if k == 0 {
        return Err(Error::Plan("plan has no components".into()));
    }
    let mut names = HashSet::new();
    for c in &plan.components {
        if !names.insert(c.name.as_str()) {
            return Err(Error::Plan(format!("duplicate component name '{}'", c.name)));
        }
    }
    if plan.steps.len() != k - 1 {
        return Err(Error::Plan(format!(
            "{k} components need {} glue steps, got {}",
            k - 1,
            plan.steps.len()
        )));
    }
    let unit = plan.p == Scalar::one();
    let powered: Vec<Vec<Vec<Scalar>>> = plan
        .components
        .iter()
        .map(|c| {
            let m = c.space.matrix();
            if unit {
                m.to_vec()
            } else {
                m.iter().map(|row| row.iter().map(|x| x.pow(&plan.p)).collect()).collect()
            }
        })
        .collect();

    let first = match plan.steps.first() {
        Some(step) => component_index(plan, &step.left)?,
        None => 0,
    };
    let mut labels: Vec<String> = plan.components[first].space.labels().to_vec();
    let mut taken: HashSet<String> = labels.iter().cloned().collect();
    let mut e: Vec<Vec<Scalar>> = powered[first].clone();
    let mut provenance: Vec<Vec<Origin>> = labels
        .iter()
        .map(|l| vec![Origin { component: plan.components[first].name.clone(), label: l.clone() }])
        .collect();
    let mut index_maps: Vec<Vec<usize>> = vec![Vec::new(); k];
    index_maps[first] = (0..labels.len()).collect();
    let mut built = vec![false; k];
    built[first] = true;
    let mut order = vec![first];
    let mut joins = Vec::new();
    let mut glue_points = Vec::new();
    let mut renamed = Vec::new();

    for (n, step) in plan.steps.iter().enumerate() {
        let l = component_index(plan, &step.left)?;
        let r = component_index(plan, &step.right)?;
        if !built[l] {
            return Err(Error::Plan(format!(
                "step {n} glues onto '{}' before it is part of the construction",
                step.left
            )));
        }
        if built[r] {
            return Err(Error::Plan(format!("step {n}: component '{}' is already glued", step.right)));
        }
        let x = index_maps[l][local_index(&plan.components[l], &step.left_label)?];
        let comp = &plan.components[r];
        let xr = local_index(comp, &step.right_label)?;
        let rm = &powered[r];
        let old = labels.len();

        let mut map = vec![usize::MAX; comp.space.len()];
        map[xr] = x;
        for z in 0..comp.space.len() {
            if z == xr {
                continue;
            }
            map[z] = labels.len();
            let label = comp.space.label(z);
            let mut fresh = label.to_string();
            if taken.contains(&fresh) {
                fresh = format!("{}.{}", comp.name, label);
                let mut bump = 2;
                while taken.contains(&fresh) {
                    fresh = format!("{}.{}#{}", comp.name, label, bump);
                    bump += 1;
                }
                renamed.push(Renamed { component: comp.name.clone(), from: label.to_string(), to: fresh.clone() });
            }
            taken.insert(fresh.clone());
            labels.push(fresh);
            provenance.push(vec![Origin { component: comp.name.clone(), label: label.to_string() }]);
        }
        let origin = Origin { component: comp.name.clone(), label: step.right_label.clone() };
        provenance[x].push(origin.clone());
        glue_points.push(GluePoint { index: x, label: labels[x].clone(), alias: origin });

        let total = labels.len();
        for row in e.iter_mut() {
            row.resize(total, Scalar::zero());
        }
        e.resize(total, vec![Scalar::zero(); total]);
        for z in (0..comp.space.len()).filter(|&z| z != xr) {
            let gz = map[z];
            for y in 0..old {
                let v = &e[y][x] + &rm[xr][z];
                e[y][gz] = v.clone();
                e[gz][y] = v;
            }
            for w in (0..comp.space.len()).filter(|&w| w != xr) {
                e[gz][map[w]] = rm[z][w].clone();
            }
        }
        index_maps[r] = map;
        built[r] = true;
        order.push(r);
        joins.push(Join { glue: x, right: r });
    }

    let matrix = if unit {
        e
    } else {
        let inv = plan.p.recip()?;
        e.iter().map(|row| row.iter().map(|x| x.pow(&inv)).collect()).collect()
    };
    let space = SemiMetricSpace::from_matrix(labels, matrix, true)?;
    Ok(CombinationSpace {
        space,
        p: plan.p.clone(),
        components: plan.components.clone(),
        provenance,
        glue_points,
        renamed,
        index_maps,
        order,
        joins,
    })
}

/// Replaces every entry outside `keep` by the glue-point `x` with the same
/// team and weight.
fn substitute(d: &WeightedSimplex, keep: &[bool], x: usize) -> WeightedSimplex {
    let sub = |t: &[Entry]| t.iter().map(|(i, w)| (if keep[*i] { *i } else { x }, w.clone())).collect();
    WeightedSimplex::new(sub(d.a_team()), sub(d.b_team())).expect("substitution keeps weights")
}

/// Splits a simplex on the combined space into one simplex per component,
/// in component order and indexed by component points. Outputs are not
/// refined; weights of points on other components land on glue-points.
pub fn simplex_components(c: &CombinationSpace, d: &WeightedSimplex) -> Result<Vec<WeightedSimplex>> {
    let n = c.space.len();
    d.check_indices(n)?;
    let mut out = vec![WeightedSimplex::empty(); c.components.len()];
    let mut rest = d.clone();
    for join in c.joins.iter().rev() {
        let mut in_right = vec![false; n];
        for &g in &c.index_maps[join.right] {
            in_right[g] = true;
        }
        let mut in_left: Vec<bool> = in_right.iter().map(|b| !b).collect();
        in_left[join.glue] = true;
        let right = substitute(&rest, &in_right, join.glue);
        rest = substitute(&rest, &in_left, join.glue);
        out[join.right] = right;
    }
    out[c.order[0]] = rest;
    for (k, s) in out.iter_mut().enumerate() {
        let map = &c.index_maps[k];
        let local = |t: &[Entry]| -> Vec<Entry> {
            t.iter()
                .map(|(g, w)| (map.iter().position(|m| m == g).expect("point in component"), w.clone()))
                .collect()
        };
        *s = WeightedSimplex::new(local(s.a_team()), local(s.b_team()))?;
    }
    Ok(out)
}

/// `(Σ Γᵢ⁻¹)⁻¹`, the gap of any combination of spaces with gaps `Γᵢ > 0`.
pub fn compose_gaps(gaps: &[Scalar]) -> Result<Scalar> {
    if gaps.is_empty() {
        return Err(Error::Domain("no gaps to compose".into()));
    }
    let mut total = Scalar::zero();
    for (index, g) in gaps.iter().enumerate() {
        if !g.is_positive() {
            return Err(Error::NonPositiveGap { index, value: g.to_string() });
        }
        total = total + g.recip()?;
    }
    total.recip()
}

/// 1-negative type gap of a weighted tree: `(Σ_e |e|⁻¹)⁻¹`.
pub fn tree_gap(g: &WeightedGraph) -> Result<Scalar> {
    if !g.is_tree() {
        return Err(Error::NotATree(format!(
            "{} vertices, {} edges, {} components",
            g.vertices().len(),
            g.edges().len(),
            g.components().len()
        )));
    }
    if g.edges().is_empty() {
        return Err(Error::TooFewPoints { needed: 2, got: g.vertices().len() });
    }
    let lengths: Vec<Scalar> = g.edges().iter().map(|e| e.2.clone()).collect();
    compose_gaps(&lengths)
}

fn is_normalized(d: &WeightedSimplex) -> bool {
    let load = d.load();
    if load.is_exact() {
        load == Scalar::one()
    } else {
        (load.to_f64() - 1.0).abs() <= 1e-9
    }
}

fn on_team(d: &WeightedSimplex, team: Team, x: usize) -> bool {
    d.team(team).iter().any(|(i, w)| *i == x && !w.is_zero())
}

/// Builds a normalized simplex on the combination from normalized
/// (near-)extremal simplices of the components, given with their gaps in
/// component order. Components are joined pairwise in construction order with
/// weights `λ₁ = Γ₂/(Γ₁+Γ₂)`, `λ₂ = Γ₁/(Γ₁+Γ₂)` after orienting each side so the
/// glue-point is not on its b-team. Returns the canonical refinement.
pub fn extremal_simplex(c: &CombinationSpace, witnesses: &[(WeightedSimplex, Scalar)]) -> Result<WeightedSimplex> {
    if witnesses.len() != c.components.len() {
        return Err(Error::Plan(format!(
            "expected {} component witnesses, got {}",
            c.components.len(),
            witnesses.len()
        )));
    }
    for (k, (d, g)) in witnesses.iter().enumerate() {
        if !is_normalized(d) {
            return Err(Error::NotNormalized(format!("witness for '{}' has weight {}", c.components[k].name, d.load())));
        }
        if !g.is_positive() {
            return Err(Error::NonPositiveGap { index: k, value: g.to_string() });
        }
    }
    let first = c.order[0];
    let mut acc = c.lift(first, &witnesses[first].0)?.refine().simplex;
    let mut acc_gap = witnesses[first].1.clone();
    for join in &c.joins {
        let (d2, g2) = &witnesses[join.right];
        let mut right = c.lift(join.right, d2)?.refine().simplex;
        let x = join.glue;
        if on_team(&acc, Team::B, x) {
            acc = acc.swap_teams();
        }
        if on_team(&right, Team::B, x) {
            right = right.swap_teams();
        }
        let total = &acc_gap + g2;
        let l1 = g2 / &total;
        let l2 = &acc_gap / &total;
        let left = acc.scale(&l1)?;
        let right = right.scale(&l2)?;
        let a: Vec<Entry> = left.a_team().iter().chain(right.a_team()).cloned().collect();
        let b: Vec<Entry> = left.b_team().iter().chain(right.b_team()).cloned().collect();
        acc = WeightedSimplex::new(a, b)?.refine().simplex;
        acc_gap = &acc_gap * g2 / total;
    }
    Ok(acc)
}
