//! The p-negative type gap: the minimum of the simplex gap function over
//! normalized simplices.
//!
//! A normalized simplex with net coefficients `α` (a-team positive, b-team
//! negative) satisfies `Σα = 0`, `Σ|α| = 2` and `γ^p = -½ αᵀMα` with
//! `M_ij = d(x_i,x_j)^p`. Fixing which points may sit on which team turns the
//! search into a quadratic program over a product of two probability
//! simplices. Every such sign pattern is searched with projected gradient
//! descent (exact line search along the projected direction) and the active
//! support of each candidate is polished by solving its KKT system. When the
//! space has p-negative type every pattern is convex, so a single start per
//! pattern suffices and the Frank–Wolfe gaps give a certified lower bound;
//! otherwise each pattern gets seeded random restarts.
//!
//! The best candidate's support is finally re-solved in exact rational
//! arithmetic when the distance powers are rational.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{solve_exact, solve_f64};
use crate::scalar::Scalar;
use crate::simplex::{gamma, WeightedSimplex};
use crate::space::SemiMetricSpace;
use crate::verdict::{has_negative_type, DEFAULT_EIG_TOL};

/// Tolerated drift between the float optimum and its exact KKT recovery,
/// relative to `max(1, ‖M‖_∞)`.
const EXACT_MATCH_TOL: f64 = 1e-9;
/// Number of random sign patterns tried above the exhaustive cutoff.
const SAMPLED_PATTERNS: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct GapOptions {
    /// Enumerate every sign pattern up to this many points.
    pub exact_cutoff: usize,
    /// Starts per sign pattern when the problem is not convex.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Frank–Wolfe gap at which a descent stops, relative to `max(1, ‖M‖_∞)`.
    pub conv_tol: f64,
    /// Relative eigenvalue threshold for the negative type test.
    pub eig_tol: f64,
    /// Attempt exact rational recovery of the optimum.
    pub exact_kkt: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            exact_cutoff: 12,
            restarts: 32,
            seed: 0,
            max_iter: 20_000,
            conv_tol: 1e-13,
            eig_tol: DEFAULT_EIG_TOL,
            exact_kkt: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    Formula,
    Optimizer,
    Oracle,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapResult {
    pub p: Scalar,
    /// `gamma(space, witness, p)`.
    pub gap: Scalar,
    /// Normalized simplex attaining `gap`.
    pub witness: WeightedSimplex,
    pub method: GapMethod,
    /// The true gap lies in `[gap - certified_tol, gap]`. Only a certificate
    /// when `has_type` and `exhaustive` hold; otherwise the local
    /// Frank–Wolfe gap of the best candidate.
    pub certified_tol: f64,
    /// Outcome of the negative type test at `p`. When false the gap is
    /// typically negative.
    pub has_type: bool,
    pub exact: bool,
    /// Every sign pattern was searched.
    pub exhaustive: bool,
    pub patterns: usize,
}

/// Dense row-major float matrix with the few operations the descent needs.
struct Form {
    n: usize,
    m: Vec<f64>,
    scale: f64,
}

impl Form {
    fn new(s: &SemiMetricSpace, p: f64) -> Self {
        let n = s.len();
        let mat = s.power_matrix(p);
        let m: Vec<f64> = (0..n * n).map(|k| mat[(k / n, k % n)]).collect();
        let inf = (0..n).map(|i| m[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        Form { n, m, scale: inf.max(1.0) }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.m[i * self.n..(i + 1) * self.n]
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn quad(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).sum()
    }
}

/// Team assignment of every point: `true` for the a-team.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Pattern {
    in_a: Vec<bool>,
}

impl Pattern {
    fn from_mask(mask: u64, n: usize) -> Self {
        Pattern { in_a: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    fn sign(&self, i: usize) -> f64 {
        if self.in_a[i] {
            1.0
        } else {
            -1.0
        }
    }

    fn is_proper(&self) -> bool {
        self.in_a.iter().any(|&x| x) && self.in_a.iter().any(|&x| !x)
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    /// Weights per point (a- and b-team simplices each sum to one).
    w: Vec<f64>,
    value: f64,
    fw_gap: f64,
}

/// Euclidean projection of the entries of `y` listed in `idx` onto the
/// probability simplex.
fn project_simplex(y: &mut [f64], idx: &[usize]) {
    let mut sorted: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    for &i in idx {
        y[i] = (y[i] - theta).max(0.0);
    }
}

struct PatternProblem<'a> {
    form: &'a Form,
    pattern: &'a Pattern,
    a_idx: Vec<usize>,
    b_idx: Vec<usize>,
}

impl<'a> PatternProblem<'a> {
    fn new(form: &'a Form, pattern: &'a Pattern) -> Self {
        let a_idx = (0..form.n).filter(|&i| pattern.in_a[i]).collect();
        let b_idx = (0..form.n).filter(|&i| !pattern.in_a[i]).collect();
        PatternProblem { form, pattern, a_idx, b_idx }
    }

    fn alpha(&self, w: &[f64]) -> Vec<f64> {
        w.iter().enumerate().map(|(i, x)| self.pattern.sign(i) * x).collect()
    }

    fn value(&self, w: &[f64]) -> f64 {
        -0.5 * self.form.quad(&self.alpha(w))
    }

    /// Gradient of the objective in weight coordinates.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let alpha = self.alpha(w);
        let mut g = vec![0.0; self.form.n];
        self.form.apply(&alpha, &mut g);
        g.iter().enumerate().map(|(i, x)| -self.pattern.sign(i) * x).collect()
    }

    fn fw_gap(&self, w: &[f64], h: &[f64]) -> f64 {
        let team = |idx: &[usize]| {
            let dot: f64 = idx.iter().map(|&i| h[i] * w[i]).sum();
            let min = idx.iter().map(|&i| h[i]).fold(f64::INFINITY, f64::min);
            dot - min
        };
        (team(&self.a_idx) + team(&self.b_idx)).max(0.0)
    }

    fn start_point(&self, rng: Option<&mut ChaCha8Rng>) -> Vec<f64> {
        let mut w = vec![0.0; self.form.n];
        match rng {
            None => {
                for idx in [&self.a_idx, &self.b_idx] {
                    for &i in idx.iter() {
                        w[i] = 1.0 / idx.len() as f64;
                    }
                }
            }
            Some(rng) => {
                for idx in [&self.a_idx, &self.b_idx] {
                    let draws: Vec<f64> = idx.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                    let total: f64 = draws.iter().sum();
                    for (&i, d) in idx.iter().zip(draws) {
                        w[i] = d / total;
                    }
                }
            }
        }
        w
    }

    /// Solves the equality-constrained problem on the support of `w`.
    fn kkt_polish(&self, w: &[f64]) -> Option<Vec<f64>> {
        let support: Vec<usize> = (0..self.form.n).filter(|&i| w[i] > 0.0).collect();
        let k = support.len();
        let mut a = vec![vec![0.0; k + 2]; k + 2];
        let mut rhs = vec![0.0; k + 2];
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                a[r][c] = -self.pattern.sign(i) * self.pattern.sign(j) * self.form.row(i)[j];
            }
            let col = if self.pattern.in_a[i] { k } else { k + 1 };
            a[r][col] = -1.0;
            a[col][r] = 1.0;
        }
        rhs[k] = 1.0;
        rhs[k + 1] = 1.0;
        let x = solve_f64(a, rhs)?;
        let mut out = vec![0.0; self.form.n];
        for (r, &i) in support.iter().enumerate() {
            if !(x[r] > 0.0) {
                return None;
            }
            out[i] = x[r];
        }
        Some(out)
    }

    fn descend(&self, mut w: Vec<f64>, opts: &GapOptions) -> Candidate {
        let tol = opts.conv_tol * self.form.scale;
        let step = 1.0 / self.form.scale;
        let mut support_age = 0usize;
        let mut last_support: Vec<bool> = w.iter().map(|&x| x > 0.0).collect();
        for _ in 0..opts.max_iter {
            let h = self.gradient(&w);
            if self.fw_gap(&w, &h) <= tol {
                break;
            }
            let mut y: Vec<f64> = w.iter().zip(&h).map(|(x, g)| x - step * g).collect();
            project_simplex(&mut y, &self.a_idx);
            project_simplex(&mut y, &self.b_idx);
            let d: Vec<f64> = y.iter().zip(&w).map(|(a, b)| a - b).collect();
            let slope: f64 = h.iter().zip(&d).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                break;
            }
            let curvature = -self.form.quad(&self.alpha(&d));
            let s = if curvature > 0.0 { (-slope / curvature).min(1.0) } else { 1.0 };
            for (x, dx) in w.iter_mut().zip(&d) {
                *x = (*x + s * dx).max(0.0);
            }

            let support: Vec<bool> = w.iter().map(|&x| x > 0.0).collect();
            if support == last_support {
                support_age += 1;
            } else {
                support_age = 0;
                last_support = support;
            }
            if support_age == 3 {
                if let Some(polished) = self.kkt_polish(&w) {
                    let hp = self.gradient(&polished);
                    if self.fw_gap(&polished, &hp) <= tol && self.value(&polished) <= self.value(&w) + tol {
                        w = polished;
                        break;
                    }
                }
            }
        }
        let h = self.gradient(&w);
        Candidate { value: self.value(&w), fw_gap: self.fw_gap(&w, &h), w }
    }
}

fn enumerate_patterns(n: usize) -> Vec<Pattern> {
    // The last point is pinned to the b-team; team swaps are equivalent.
    (1u64..(1u64 << (n - 1))).map(|mask| Pattern::from_mask(mask, n)).collect()
}

fn sample_patterns(s: &SemiMetricSpace, p: f64, seed: u64) -> Vec<Pattern> {
    use nalgebra::SymmetricEigen;
    let n = s.len();
    let mut out: Vec<Pattern> = Vec::new();
    let m = s.power_matrix(p);
    let basis = crate::verdict::zero_sum_basis(n);
    let eig = SymmetricEigen::new(basis.transpose() * &m * &basis);
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    for &k in order.iter().take(4) {
        let v = &basis * eig.eigenvectors.column(k);
        let mut pattern = Pattern { in_a: v.iter().map(|x| *x > 0.0).collect() };
        if pattern.in_a[n - 1] {
            pattern.in_a.iter_mut().for_each(|x| *x = !*x);
        }
        if pattern.is_proper() && !out.contains(&pattern) {
            out.push(pattern);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5a4d);
    while out.len() < SAMPLED_PATTERNS {
        let mut in_a: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        in_a[n - 1] = false;
        let pattern = Pattern { in_a };
        if pattern.is_proper() && !out.contains(&pattern) {
            out.push(pattern);
        }
    }
    out
}

fn pattern_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Minimizes the simplex gap function over normalized simplices.
pub fn gap(s: &SemiMetricSpace, p: &Scalar, opts: &GapOptions) -> Result<GapResult> {
    let n = s.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if p.is_negative() {
        return Err(Error::Domain(format!("exponent must be >= 0, got {p}")));
    }
    let pf = p.to_f64();
    let verdict = has_negative_type(s, pf, opts.eig_tol)?;
    let convex = verdict.has_type;
    let form = Form::new(s, pf);

    let exhaustive = n <= opts.exact_cutoff && n <= 63;
    let patterns = if exhaustive {
        enumerate_patterns(n)
    } else {
        sample_patterns(s, pf, opts.seed)
    };
    let starts = if convex { 1 } else { opts.restarts.max(1) };

    let per_pattern: Vec<(Candidate, f64)> = patterns
        .par_iter()
        .enumerate()
        .map(|(k, pattern)| {
            let problem = PatternProblem::new(&form, pattern);
            let mut rng = ChaCha8Rng::seed_from_u64(pattern_seed(opts.seed, k));
            let mut best = problem.descend(problem.start_point(None), opts);
            for _ in 1..starts {
                let c = problem.descend(problem.start_point(Some(&mut rng)), opts);
                if c.value < best.value {
                    best = c;
                }
            }
            let lower = best.value - best.fw_gap;
            (best, lower)
        })
        .collect();

    let (best_k, (best, _)) = per_pattern
        .iter()
        .enumerate()
        .min_by(|(i, x), (j, y)| x.0.value.total_cmp(&y.0.value).then(i.cmp(j)))
        .expect("at least one sign pattern");
    let lower = if convex && exhaustive {
        per_pattern.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min)
    } else {
        best.value - best.fw_gap
    };

    let pattern = &patterns[best_k];
    if opts.exact_kkt {
        if let Some(result) = exact_recovery(s, p, &form, pattern, best, lower, convex, exhaustive, patterns.len())? {
            return Ok(result);
        }
    }

    let to_team = |team_a: bool| -> Vec<(usize, Scalar)> {
        (0..n)
            .filter(|&i| pattern.in_a[i] == team_a && best.w[i] > 0.0)
            .map(|i| (i, Scalar::float(best.w[i])))
            .collect()
    };
    let witness = WeightedSimplex::new(to_team(true), to_team(false))?;
    let value = gamma(s, &witness, &p.to_float())?;
    let certified_tol = (value.to_f64() - lower).max(0.0);
    Ok(GapResult {
        p: p.clone(),
        gap: value,
        witness,
        method: GapMethod::Optimizer,
        certified_tol,
        has_type: verdict.has_type,
        exact: false,
        exhaustive,
        patterns: patterns.len(),
    })
}

/// Re-solves the best candidate's support exactly. Returns `None` when the
/// distance powers are not rational or the exact solution does not confirm
/// the float optimum.
#[allow(clippy::too_many_arguments)]
fn exact_recovery(
    s: &SemiMetricSpace,
    p: &Scalar,
    form: &Form,
    pattern: &Pattern,
    best: &Candidate,
    lower: f64,
    convex: bool,
    exhaustive: bool,
    pattern_count: usize,
) -> Result<Option<GapResult>> {
    let Some(m) = s.exact_power_matrix(p) else { return Ok(None) };
    let support: Vec<usize> = (0..form.n).filter(|&i| best.w[i] > 0.0).collect();
    let k = support.len();
    let sign = |i: usize| if pattern.in_a[i] { 1 } else { -1 };
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let mut a = vec![vec![zero.clone(); k + 2]; k + 2];
    let mut rhs = vec![zero.clone(); k + 2];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            let mij = m[i][j].as_rational().expect("exact matrix").clone();
            a[r][c] = if sign(i) * sign(j) > 0 { -mij } else { mij };
        }
        let col = if pattern.in_a[i] { k } else { k + 1 };
        a[r][col] = -one.clone();
        a[col][r] = one.clone();
    }
    rhs[k] = one.clone();
    rhs[k + 1] = one.clone();
    let Some(x) = solve_exact(a, rhs) else { return Ok(None) };
    if x[..k].iter().any(|v| !v.is_positive()) {
        return Ok(None);
    }
    let team = |team_a: bool| -> Vec<(usize, Scalar)> {
        support
            .iter()
            .zip(&x)
            .filter(|(&i, _)| pattern.in_a[i] == team_a)
            .map(|(&i, v)| (i, Scalar::Exact(v.clone())))
            .collect()
    };
    let witness = WeightedSimplex::new(team(true), team(false))?;
    let value = gamma(s, &witness, p)?;
    if !value.is_exact() || (value.to_f64() - best.value).abs() > EXACT_MATCH_TOL * form.scale {
        return Ok(None);
    }
    // The exact point must still satisfy first-order optimality.
    let problem = PatternProblem::new(form, pattern);
    let mut w = vec![0.0; form.n];
    for (&i, v) in support.iter().zip(&x) {
        w[i] = Scalar::Exact(v.clone()).to_f64();
    }
    let fw = problem.fw_gap(&w, &problem.gradient(&w));
    if fw > EXACT_MATCH_TOL * form.scale {
        return Ok(None);
    }
    let certified_tol = if convex && exhaustive { (value.to_f64() - lower).max(0.0) } else { fw };
    Ok(Some(GapResult {
        p: p.clone(),
        gap: value,
        witness,
        method: GapMethod::Optimizer,
        certified_tol,
        has_type: convex,
        exact: true,
        exhaustive,
        patterns: pattern_count,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WeightedGraph;

    fn graph(vertices: &[&str], edges: &[(&str, &str)]) -> SemiMetricSpace {
        SemiMetricSpace::from_graph(&WeightedGraph::unit(vertices, edges).unwrap()).unwrap()
    }

    fn cycle5() -> SemiMetricSpace {
        graph(&["x", "v2", "v3", "v4", "v5"], &[("x", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v5"), ("v5", "x")])
    }

    #[test]
    fn projection_lands_on_simplex() {
        let mut y = vec![0.9, -0.2, 0.7, 5.0];
        project_simplex(&mut y, &[0, 1, 2]);
        assert!((y[0] + y[1] + y[2] - 1.0).abs() < 1e-15);
        assert!(y.iter().take(3).all(|&v| v >= 0.0));
        assert_eq!(y[3], 5.0);
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn single_edge_gap_is_length() {
        let s = SemiMetricSpace::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![Scalar::zero(), Scalar::ratio(7, 3)], vec![Scalar::ratio(7, 3), Scalar::zero()]],
            true,
        )
        .unwrap();
        let r = gap(&s, &Scalar::one(), &GapOptions::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.gap, Scalar::ratio(7, 3));
    }

    #[test]
    fn cycle_of_five() {
        let s = cycle5();
        let r = gap(&s, &Scalar::one(), &GapOptions::default()).unwrap();
        assert!(r.exact && r.exhaustive && r.has_type);
        assert_eq!(r.gap, Scalar::ratio(5, 28));
        assert!(r.certified_tol < 1e-9);
        let weights: Vec<Scalar> = r.witness.a_team().iter().chain(r.witness.b_team()).map(|e| e.1.clone()).collect();
        let mut sorted: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
        sorted.sort();
        assert_eq!(sorted, ["1/2", "1/2", "3/14", "3/14", "4/7"]);
    }

    #[test]
    fn star_gap() {
        let s = graph(&["v6", "x", "v7", "v8"], &[("v6", "x"), ("v6", "v7"), ("v6", "v8")]);
        let r = gap(&s, &Scalar::one(), &GapOptions::default()).unwrap();
        assert_eq!(r.gap, Scalar::ratio(1, 3));
    }

    #[test]
    fn glued_graph_gap() {
        let s = graph(
            &["x", "v2", "v3", "v4", "v5", "v6", "v7", "v8"],
            &[
                ("x", "v2"),
                ("v2", "v3"),
                ("v3", "v4"),
                ("v4", "v5"),
                ("v5", "x"),
                ("x", "v6"),
                ("v6", "v7"),
                ("v6", "v8"),
            ],
        );
        let r = gap(&s, &Scalar::one(), &GapOptions::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.gap, Scalar::ratio(5, 43));
        let r2 = gap(&s, &Scalar::int(2), &GapOptions::default()).unwrap();
        assert!(!r2.has_type);
        assert!(r2.gap.is_negative());
    }

    #[test]
    fn float_exponent_matches_evaluation() {
        let s = cycle5();
        let p = Scalar::float(0.7);
        let r = gap(&s, &p, &GapOptions::default()).unwrap();
        assert!(!r.exact);
        let again = gamma(&s, &r.witness, &p).unwrap();
        assert!((again.to_f64() - r.gap.to_f64()).abs() < 1e-12);
        assert!(r.gap.is_positive());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = cycle5();
        let opts = GapOptions { exact_kkt: false, ..GapOptions::default() };
        let a = gap(&s, &Scalar::float(1.8), &opts).unwrap();
        let b = gap(&s, &Scalar::float(1.8), &opts).unwrap();
        assert_eq!(a.gap.to_f64().to_bits(), b.gap.to_f64().to_bits());
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn rejects_negative_exponent() {
        assert!(gap(&cycle5(), &Scalar::int(-1), &GapOptions::default()).is_err());
    }
}
