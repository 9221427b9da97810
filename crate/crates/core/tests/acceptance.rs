//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p negtype --test acceptance -- --nocapture` to see
//! the lines.

mod common;

use std::time::{Duration, Instant};

use negtype::bounds::{c_of_n, lower_bound_direct};
use negtype::combine::{build_combination, compose_gaps, extremal_simplex, simplex_components, tree_gap, Component};
use negtype::verdict::{supremal_p, Supremal, DEFAULT_BISECTION_TOL};
use negtype::{gamma, gap, gap_oracle, GapOptions, Scalar, SemiMetricSpace, Team, WeightedGraph, WeightedSimplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// Float agreement for optimizer values at p = 1 golden cases.
const GOLDEN_TOL: f64 = 1e-6;
const DIRECT_BOUND: f64 = 1.0274;
const DIRECT_BOUND_TOL: f64 = 1e-3;
const SUPREMAL_G: f64 = 1.36;
const SUPREMAL_G_TOL: f64 = 0.01;
/// Oracle agreement: the oracle is an upper bound found by grid + descent,
/// the optimizer must not be above it and the oracle must come within this.
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_GRID: usize = 12;
const ADDITIVITY_TOL: f64 = 1e-5;
const SCALING_GAP_TOL: f64 = 1e-6;
const SUPREMAL_SCALING_TOL: f64 = 2.0 * DEFAULT_BISECTION_TOL;

fn criterion(id: u32, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:?}, limit {limit:?}")),
        (o, _) => o,
    };
    match outcome {
        Ok(detail) => println!("acceptance {id:02} PASS {title}: {detail} [{elapsed:.2?}]"),
        Err(detail) => {
            println!("acceptance {id:02} FAIL {title}: {detail} [{elapsed:.2?}]");
            panic!("criterion {id} failed: {detail}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn w(label: &str, num: i64, den: i64) -> (&str, Scalar) {
    (label, Scalar::ratio(num, den))
}

#[test]
fn criterion_01_edge_gap() {
    criterion(1, "edge gap equals edge length", Some(Duration::from_secs(1)), || {
        for len in [Scalar::int(1), Scalar::int(3), Scalar::ratio(7, 2)] {
            let s = SemiMetricSpace::from_matrix(
                vec!["a".into(), "b".into()],
                vec![vec![Scalar::zero(), len.clone()], vec![len.clone(), Scalar::zero()]],
                true,
            )
            .map_err(|e| e.to_string())?;
            let r = gap(&s, &Scalar::one(), &GapOptions::default()).map_err(|e| e.to_string())?;
            ensure(r.exact && r.gap == len, || format!("edge {len}: got {} (exact {})", r.gap, r.exact))?;
        }
        Ok("1, 3, 7/2 exact".into())
    });
}

#[test]
fn criterion_02_star() {
    criterion(2, "star tree gap", None, || {
        let g = WeightedGraph::unit(&["c", "l1", "l2", "l3"], &[("c", "l1"), ("c", "l2"), ("c", "l3")]).unwrap();
        let formula = tree_gap(&g).map_err(|e| e.to_string())?;
        ensure(formula == Scalar::ratio(1, 3), || format!("tree formula gave {formula}"))?;
        let r = gap(&SemiMetricSpace::from_graph(&g).unwrap(), &Scalar::one(), &GapOptions::default()).unwrap();
        let diff = (r.gap.to_f64() - 1.0 / 3.0).abs();
        ensure(diff <= GOLDEN_TOL, || format!("optimizer gave {} ({diff:e} off)", r.gap))?;
        Ok(format!("formula 1/3, optimizer {}", r.gap))
    });
}

/// Dihedral relabelings of the 5-cycle `x, v2, v3, v4, v5` (indices 0..5).
fn cycle_symmetries() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for shift in 0..5 {
        out.push((0..5).map(|i| (i + shift) % 5).collect());
        out.push((0..5).map(|i| (5 - i + shift) % 5).collect());
    }
    out
}

fn relabel(d: &WeightedSimplex, sigma: &[usize]) -> WeightedSimplex {
    let map = |t: &[(usize, Scalar)]| t.iter().map(|(i, w)| (sigma[*i], w.clone())).collect();
    WeightedSimplex::new(map(d.a_team()), map(d.b_team())).unwrap()
}

#[test]
fn criterion_03_cycle() {
    criterion(3, "five-cycle gap and witness", Some(Duration::from_secs(10)), || {
        let s = cycle5();
        let r = gap(&s, &Scalar::one(), &GapOptions::default()).map_err(|e| e.to_string())?;
        let diff = (r.gap.to_f64() - 5.0 / 28.0).abs();
        ensure(diff <= GOLDEN_TOL, || format!("float gap off by {diff:e}"))?;
        ensure(r.exact && r.gap == Scalar::ratio(5, 28), || format!("exact recovery gave {} (exact {})", r.gap, r.exact))?;
        let expected = WeightedSimplex::from_labels(
            &s,
            &[w("x", 4, 7), w("v3", 3, 14), w("v4", 3, 14)],
            &[w("v2", 1, 2), w("v5", 1, 2)],
        )
        .unwrap()
        .refine()
        .simplex;
        let matched = cycle_symmetries().iter().any(|sigma| relabel(&r.witness, sigma).refine().simplex == expected);
        ensure(matched, || format!("witness {} is not a symmetric image", r.witness.display(&s)))?;
        Ok(format!("5/28 exact, witness {}", r.witness.display(&s)))
    });
}

#[test]
fn criterion_04_composition() {
    criterion(4, "gap composition on G", None, || {
        let composed = compose_gaps(&[Scalar::ratio(5, 28), Scalar::ratio(1, 3)]).map_err(|e| e.to_string())?;
        ensure(composed == Scalar::ratio(5, 43), || format!("composed {composed}"))?;
        let r = gap(&g(), &Scalar::one(), &GapOptions::default()).map_err(|e| e.to_string())?;
        let diff = (r.gap.to_f64() - 5.0 / 43.0).abs();
        ensure(diff <= GOLDEN_TOL, || format!("optimizer gave {} ({diff:e} off)", r.gap))?;
        Ok(format!("formula 5/43, optimizer {}", r.gap))
    });
}

#[test]
fn criterion_05_extremal_witness() {
    criterion(5, "extremal simplex on G", None, || {
        let c = build_combination(&g_plan()).map_err(|e| e.to_string())?;
        let w1 = WeightedSimplex::from_labels(
            &c.components[0].space,
            &[w("x", 4, 7), w("v3", 3, 14), w("v4", 3, 14)],
            &[w("v2", 1, 2), w("v5", 1, 2)],
        )
        .unwrap();
        let w2 = WeightedSimplex::from_labels(
            &c.components[1].space,
            &[w("v9", 1, 3), w("v7", 1, 3), w("v8", 1, 3)],
            &[w("v6", 1, 1)],
        )
        .unwrap();
        let d = extremal_simplex(&c, &[(w1, Scalar::ratio(5, 28)), (w2, Scalar::ratio(1, 3))]).map_err(|e| e.to_string())?;
        let value = gamma(&c.space, &d, &Scalar::one()).unwrap();
        ensure(value == Scalar::ratio(5, 43), || format!("gamma {value}"))?;
        let expected = WeightedSimplex::from_labels(
            &c.space,
            &[w("x", 21, 43), w("v3", 6, 43), w("v4", 6, 43), w("v7", 5, 43), w("v8", 5, 43)],
            &[w("v2", 14, 43), w("v5", 14, 43), w("v6", 15, 43)],
        )
        .unwrap()
        .refine()
        .simplex;
        ensure(d == expected, || format!("got {}", d.display(&c.space)))?;
        Ok(format!("{} with gamma 5/43", d.display(&c.space)))
    });
}

#[test]
fn criterion_06_component_decomposition() {
    criterion(6, "simplex components on G", None, || {
        let c = build_combination(&g_plan()).map_err(|e| e.to_string())?;
        let d = WeightedSimplex::from_labels(
            &c.space,
            &[w("x", 3, 10), w("v3", 2, 10), w("v4", 2, 10), w("v8", 3, 10)],
            &[w("v6", 4, 10), w("v2", 5, 10), w("v5", 1, 10)],
        )
        .unwrap();
        let parts = simplex_components(&c, &d).map_err(|e| e.to_string())?;
        let (r1, r2) = (parts[0].refine(), parts[1].refine());
        let d1 = WeightedSimplex::from_labels(
            &c.components[0].space,
            &[w("x", 2, 10), w("v3", 2, 10), w("v4", 2, 10)],
            &[w("v2", 5, 10), w("v5", 1, 10)],
        )
        .unwrap()
        .refine();
        let d2 = WeightedSimplex::from_labels(&c.components[1].space, &[w("v9", 1, 10), w("v8", 3, 10)], &[w("v6", 4, 10)])
            .unwrap()
            .refine();
        ensure(r1 == d1 && r2 == d2, || "component refinements differ".into())?;
        ensure(r1.weight == Scalar::ratio(3, 5) && r2.weight == Scalar::ratio(2, 5), || {
            format!("weights {} and {}", r1.weight, r2.weight)
        })?;

        let e = WeightedSimplex::from_labels(&c.space, &[w("v5", 4, 10), w("v7", 6, 10)], &[w("v2", 6, 10), w("v8", 4, 10)])
            .unwrap();
        let parts = simplex_components(&c, &e).map_err(|e| e.to_string())?;
        let total = parts[0].refine().weight + parts[1].refine().weight;
        ensure(total == Scalar::ratio(6, 5), || format!("second example total weight {total}"))?;
        Ok("refinements exact; weights 3/5 + 2/5 and 3/5 + 3/5 = 6/5".into())
    });
}

#[test]
fn criterion_07_direct_bound() {
    criterion(7, "direct bound on G", None, || {
        ensure(c_of_n(8).unwrap() == Scalar::ratio(3, 4), || "c(8) != 3/4".into())?;
        let r = lower_bound_direct(&g(), &Scalar::one(), &Scalar::ratio(5, 43)).map_err(|e| e.to_string())?;
        ensure(r.scaled_diameter == Scalar::int(4), || format!("scaled diameter {}", r.scaled_diameter))?;
        ensure((r.lower_bound - DIRECT_BOUND).abs() <= DIRECT_BOUND_TOL, || format!("bound {}", r.lower_bound))?;
        Ok(format!("{:.6}", r.lower_bound))
    });
}

#[test]
fn criterion_08_supremal() {
    criterion(8, "supremal p-negative type of G", None, || {
        let sup = supremal_p(&g(), 4.0, 1e-6).map_err(|e| e.to_string())?;
        let Supremal::Finite(v) = sup else { return Err("expected a finite value".into()) };
        ensure((v - SUPREMAL_G).abs() <= SUPREMAL_G_TOL, || format!("supremal {v}"))?;
        let bound = lower_bound_direct(&g(), &Scalar::one(), &Scalar::ratio(5, 43)).unwrap().lower_bound;
        ensure(bound <= v, || format!("bound {bound} exceeds supremal {v}"))?;
        Ok(format!("{v:.6} >= bound {bound:.6}"))
    });
}

#[test]
fn criterion_09_oracle_equivalence() {
    criterion(9, "optimizer agrees with brute-force oracle", Some(Duration::from_secs(120)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let n = rng.random_range(2..=5);
            let s = if k % 2 == 0 { random_metric(&mut rng, n) } else { random_graph_metric(&mut rng, n) };
            for p in [1i64, 2] {
                let r = gap(&s, &Scalar::int(p), &GapOptions::default()).map_err(|e| e.to_string())?;
                let oracle = gap_oracle(&s, p as f64, ORACLE_GRID).map_err(|e| e.to_string())?;
                let opt = r.gap.to_f64();
                let scale = s.diameter().to_f64().powi(p as i32).max(1.0);
                ensure(opt <= oracle + 1e-9 * scale, || format!("space {k}, p = {p}: optimizer {opt} above oracle {oracle}"))?;
                ensure(oracle - opt <= ORACLE_TOL * scale, || format!("space {k}, p = {p}: oracle {oracle} vs {opt}"))?;
                worst = worst.max((oracle - opt) / scale);
            }
        }
        Ok(format!("100 comparisons, worst relative gap {worst:.2e}"))
    });
}

fn gap_value(s: &SemiMetricSpace) -> f64 {
    gap(s, &Scalar::one(), &GapOptions::default()).unwrap().gap.to_f64()
}

#[test]
fn criterion_10_additivity() {
    criterion(10, "additivity over random glue plans", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut worst: f64 = 0.0;
        let mut plans = 0;
        while plans < 100 {
            let k = rng.random_range(2..=4);
            let max_points = if k == 4 { 3 } else { 4 };
            let plan = random_plan(&mut rng, k, max_points);
            let component_gaps: Vec<f64> = plan.components.iter().map(|c| gap_value(&c.space)).collect();
            // Near-zero component gaps make the comparison ill-conditioned.
            if component_gaps.iter().any(|&g| g < 1e-3) {
                continue;
            }
            plans += 1;
            let c = build_combination(&plan).map_err(|e| e.to_string())?;
            let expected_len: usize = plan.components.iter().map(|c| c.space.len()).sum::<usize>() + 1 - k;
            ensure(c.space.len() == expected_len, || format!("plan {plans}: cardinality {}", c.space.len()))?;

            for _ in 0..5 {
                let d = random_simplex(&mut rng, c.space.len());
                let parts = simplex_components(&c, &d).map_err(|e| e.to_string())?;
                let total: Scalar = parts
                    .iter()
                    .zip(&c.components)
                    .map(|(di, comp)| gamma(&comp.space, di, &Scalar::one()).unwrap())
                    .sum();
                let whole = gamma(&c.space, &d, &Scalar::one()).unwrap();
                ensure(total == whole, || format!("plan {plans}: gamma {whole} vs component sum {total}"))?;
                let lambda = d.refine().weight;
                if !lambda.is_zero() {
                    let sum: Scalar = parts.iter().map(|di| di.refine().weight).sum();
                    ensure(sum >= lambda, || format!("plan {plans}: component weights {sum} < {lambda}"))?;
                }
            }

            let composed = compose_gaps(&component_gaps.iter().map(|&g| Scalar::float(g)).collect::<Vec<_>>()).unwrap();
            let combined = gap_value(&c.space);
            let diff = (composed.to_f64() - combined).abs();
            ensure(diff <= ADDITIVITY_TOL, || format!("plan {plans}: composed {composed} vs optimizer {combined}"))?;

            let mut other = plan.clone();
            other.steps = random_steps(&mut rng, &other.components);
            let reglued = gap_value(&build_combination(&other).map_err(|e| e.to_string())?.space);
            let diff2 = (reglued - combined).abs();
            ensure(diff2 <= ADDITIVITY_TOL, || format!("plan {plans}: regluing changed gap {combined} -> {reglued}"))?;
            worst = worst.max(diff).max(diff2);
        }
        Ok(format!("100 plans, 500 simplices exact, worst gap deviation {worst:.2e}"))
    });
}

#[test]
fn criterion_11_scaling() {
    criterion(11, "power transform scaling identities", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let exponents = [Scalar::ratio(1, 2), Scalar::ratio(2, 3), Scalar::ratio(3, 4), Scalar::ratio(5, 4), Scalar::ratio(3, 2), Scalar::int(2)];
        let mut finite = 0;
        let mut worst_gap: f64 = 0.0;
        for k in 0..30 {
            let n = rng.random_range(3..=6);
            let s = if k % 3 == 0 { random_metric(&mut rng, n) } else { random_graph_metric(&mut rng, n) };
            let c = exponents[rng.random_range(0..exponents.len())].clone();
            let q = if rng.random_bool(0.5) { Scalar::one() } else { Scalar::ratio(1, 2) };
            let sc = s.power_transform(&c).map_err(|e| e.to_string())?;
            let lhs = gap(&sc, &q, &GapOptions::default()).unwrap().gap.to_f64();
            let rhs = gap(&s, &(&q * &c), &GapOptions::default()).unwrap().gap.to_f64();
            ensure((lhs - rhs).abs() <= SCALING_GAP_TOL, || format!("space {k}, c = {c}, q = {q}: {lhs} vs {rhs}"))?;
            worst_gap = worst_gap.max((lhs - rhs).abs());

            let cf = c.to_f64();
            let sup = supremal_p(&s, 8.0, DEFAULT_BISECTION_TOL).unwrap();
            let sup_c = supremal_p(&sc, 8.0 / cf, DEFAULT_BISECTION_TOL).unwrap();
            match (sup, sup_c) {
                (Supremal::Finite(a), Supremal::Finite(b)) => {
                    finite += 1;
                    ensure((b - a / cf).abs() <= SUPREMAL_SCALING_TOL, || format!("space {k}, c = {c}: {b} vs {a}/{cf}"))?;
                }
                (Supremal::Infinite, Supremal::Infinite) => {}
                (a, b) => return Err(format!("space {k}, c = {c}: {a} vs {b}")),
            }
        }
        ensure(finite >= 10, || format!("only {finite} finite supremal values sampled"))?;
        Ok(format!("30 spaces, {finite} finite supremal values, worst gap deviation {worst_gap:.2e}"))
    });
}

/// Applies one random applicable procedure or its inverse.
fn random_procedure<R: Rng>(rng: &mut R, d: &WeightedSimplex, n: usize) -> WeightedSimplex {
    let team = if rng.random_bool(0.5) { Team::A } else { Team::B };
    let len = d.team(team).len();
    loop {
        let out = match rng.random_range(0..8) {
            0 => Ok(d.swap_teams()),
            1 => {
                let mut perm: Vec<usize> = (0..len).collect();
                for i in (1..len).rev() {
                    perm.swap(i, rng.random_range(0..=i));
                }
                d.reorder(team, &perm)
            }
            2 if len >= 2 => {
                let t = d.team(team);
                let pairs: Vec<(usize, usize)> =
                    (0..len).flat_map(|i| (0..len).map(move |j| (i, j))).filter(|&(i, j)| i != j && t[i].0 == t[j].0).collect();
                if pairs.is_empty() {
                    continue;
                }
                let (i, j) = pairs[rng.random_range(0..pairs.len())];
                d.merge(team, i, j)
            }
            3 if len >= 1 => {
                let i = rng.random_range(0..len);
                let part = &d.team(team)[i].1 * &Scalar::ratio(rng.random_range(0..=5), 5);
                d.split(team, i, &part)
            }
            4 => {
                let pairs: Vec<(usize, usize)> = (0..d.a_team().len())
                    .flat_map(|i| (0..d.b_team().len()).map(move |j| (i, j)))
                    .filter(|&(i, j)| d.a_team()[i].0 == d.b_team()[j].0)
                    .collect();
                if pairs.is_empty() {
                    continue;
                }
                let (i, j) = pairs[rng.random_range(0..pairs.len())];
                d.cancel(i, j)
            }
            5 if len >= 1 => d.uncancel(team, rng.random_range(0..len), &Scalar::ratio(rng.random_range(0..=6), 3)),
            6 => {
                let zeros: Vec<usize> = (0..len).filter(|&i| d.team(team)[i].1.is_zero()).collect();
                if zeros.is_empty() {
                    continue;
                }
                d.drop_zero(team, zeros[rng.random_range(0..zeros.len())])
            }
            7 => Ok(d.insert_zero(team, rng.random_range(0..n))),
            _ => continue,
        };
        return out.expect("procedure preconditions were checked");
    }
}

#[test]
fn criterion_12_equivalence_invariance() {
    criterion(12, "procedures preserve gamma exactly", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let powers = [Scalar::int(1), Scalar::int(2), Scalar::int(3)];
        let mut applied = 0;
        while applied < 500 {
            let n = rng.random_range(2..=6);
            let s = random_metric(&mut rng, n);
            let mut d = random_simplex(&mut rng, n);
            let reference: Vec<Scalar> = powers.iter().map(|p| gamma(&s, &d, p).unwrap()).collect();
            for _ in 0..10 {
                d = random_procedure(&mut rng, &d, n);
                applied += 1;
                let sa: Scalar = d.a_team().iter().map(|e| &e.1).sum();
                let sb: Scalar = d.b_team().iter().map(|e| &e.1).sum();
                ensure(sa == sb, || format!("balance lost: {sa} vs {sb}"))?;
                for (p, r) in powers.iter().zip(&reference) {
                    let v = gamma(&s, &d, p).unwrap();
                    ensure(v.is_exact() && v == *r, || format!("p = {p}: {v} vs {r}"))?;
                }
            }
        }
        Ok(format!("{applied} applications exact at p = 1, 2, 3"))
    });
}

#[test]
fn component_order_is_irrelevant_for_g() {
    // Gluing the star first and the cycle second produces an isometric copy of G.
    let plan = negtype::GluePlan::additive(
        vec![Component { name: "star".into(), space: star() }, Component { name: "cycle".into(), space: cycle5() }],
        vec![step("star", "v9", "cycle", "x")],
    );
    let c = build_combination(&plan).unwrap();
    let r = gap(&c.space, &Scalar::one(), &GapOptions::default()).unwrap();
    assert_eq!(r.gap, Scalar::ratio(5, 43));
}
