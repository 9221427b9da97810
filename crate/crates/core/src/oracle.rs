//! Brute-force estimate of the p-negative type gap, used to cross-check
//! [`crate::gap::gap`]. It shares no code with the optimizer: every team
//! split is scanned on a regular grid of weights, and the best grid points
//! plus a few random points are refined by pairwise weight transfers within
//! a team. Values are evaluated through the cross-team/within-team form of
//! the simplex gap function.
//!
//! The result is the gap function of an actual normalized simplex, hence an
//! upper bound on the true gap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::SemiMetricSpace;

const RANDOM_STARTS: usize = 8;
const GRID_SEEDS: usize = 4;
const MAX_SWEEPS: usize = 5_000;

struct TeamForm {
    d: Vec<Vec<f64>>,
}

impl TeamForm {
    fn gamma(&self, a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
        let mut cross = 0.0;
        for &(i, m) in a {
            for &(j, n) in b {
                cross += m * n * self.d[i][j];
            }
        }
        let within = |t: &[(usize, f64)]| {
            let mut s = 0.0;
            for (k, &(i, m)) in t.iter().enumerate() {
                for &(j, n) in &t[k + 1..] {
                    s += m * n * self.d[i][j];
                }
            }
            s
        };
        cross - within(a) - within(b)
    }
}

/// All ways to write `total` as an ordered sum of `parts` non-negative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn local_descent(form: &TeamForm, mut a: Vec<(usize, f64)>, mut b: Vec<(usize, f64)>) -> f64 {
    let mut value = form.gamma(&a, &b);
    for _ in 0..MAX_SWEEPS {
        let before = value;
        for team_a in [true, false] {
            let len = if team_a { a.len() } else { b.len() };
            for i in 0..len {
                for j in 0..len {
                    if i == j {
                        continue;
                    }
                    // Move delta from entry j to entry i, delta in [-w_i, w_j].
                    let (wi, wj) = if team_a { (a[i].1, a[j].1) } else { (b[i].1, b[j].1) };
                    let eval = |delta: f64, a: &mut Vec<(usize, f64)>, b: &mut Vec<(usize, f64)>| {
                        let t = if team_a { &mut *a } else { &mut *b };
                        t[i].1 = wi + delta;
                        t[j].1 = wj - delta;
                        let v = form.gamma(a, b);
                        let t = if team_a { &mut *a } else { &mut *b };
                        t[i].1 = wi;
                        t[j].1 = wj;
                        v
                    };
                    let (lo, hi) = (-wi, wj);
                    if hi - lo <= 0.0 {
                        continue;
                    }
                    let f_lo = eval(lo, &mut a, &mut b);
                    let f_hi = eval(hi, &mut a, &mut b);
                    let mid = 0.5 * (lo + hi);
                    let f_mid = eval(mid, &mut a, &mut b);
                    // Parabola through the three samples.
                    let h = 0.5 * (hi - lo);
                    let curv = (f_lo - 2.0 * f_mid + f_hi) / (h * h);
                    let mut options = vec![(lo, f_lo), (hi, f_hi), (mid, f_mid), (0.0, value)];
                    if curv > 0.0 {
                        let slope = (f_hi - f_lo) / (2.0 * h);
                        let vertex = (mid - slope / curv).clamp(lo, hi);
                        options.push((vertex, eval(vertex, &mut a, &mut b)));
                    }
                    let (delta, v) = options.into_iter().fold((0.0, value), |best, o| if o.1 < best.1 { o } else { best });
                    if v < value {
                        let t = if team_a { &mut a } else { &mut b };
                        t[i].1 = (wi + delta).max(0.0);
                        t[j].1 = (wj - delta).max(0.0);
                        value = form.gamma(&a, &b);
                    }
                }
            }
        }
        if before - value <= 1e-16 * before.abs().max(1.0) {
            break;
        }
    }
    value
}

/// Upper bound on the p-negative type gap from a grid with `grid_steps`
/// subdivisions per team followed by local descent.
pub fn gap_oracle(s: &SemiMetricSpace, p: f64, grid_steps: usize) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if grid_steps == 0 {
        return Err(Error::Domain("grid needs at least one step".into()));
    }
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { s.dist(i, j).to_f64().powf(p) }).collect())
        .collect();
    let form = TeamForm { d };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0_7ac1e);
    let mut best = f64::INFINITY;

    // Point 0 always on the a-team.
    for mask in 0u64..(1u64 << (n - 1)) {
        let a_pts: Vec<usize> = std::iter::once(0).chain((1..n).filter(|i| mask >> (i - 1) & 1 == 1)).collect();
        let b_pts: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 0).collect();
        if b_pts.is_empty() {
            continue;
        }
        let weights = |pts: &[usize], c: &[usize]| -> Vec<(usize, f64)> {
            pts.iter().zip(c).map(|(&i, &k)| (i, k as f64 / grid_steps as f64)).collect()
        };
        let a_grid = compositions(grid_steps, a_pts.len());
        let b_grid = compositions(grid_steps, b_pts.len());
        let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(a_grid.len() * b_grid.len());
        for (ia, ca) in a_grid.iter().enumerate() {
            let a = weights(&a_pts, ca);
            for (ib, cb) in b_grid.iter().enumerate() {
                scored.push((form.gamma(&a, &weights(&b_pts, cb)), ia, ib));
            }
        }
        scored.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(v, ia, ib) in scored.iter().take(GRID_SEEDS) {
            best = best.min(v);
            let refined = local_descent(&form, weights(&a_pts, &a_grid[ia]), weights(&b_pts, &b_grid[ib]));
            best = best.min(refined);
        }
        for _ in 0..RANDOM_STARTS {
            let random_team = |pts: &[usize], rng: &mut ChaCha8Rng| -> Vec<(usize, f64)> {
                let raw: Vec<f64> = pts.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                pts.iter().zip(raw).map(|(&i, r)| (i, r / total)).collect()
            };
            let a = random_team(&a_pts, &mut rng);
            let b = random_team(&b_pts, &mut rng);
            best = best.min(local_descent(&form, a, b));
        }
    }
    Ok(best)
}
