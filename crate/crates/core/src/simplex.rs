//! Weighted two-team simplices and the simplex gap function.
//!
//! A simplex `[a_i(m_i); b_j(n_j)]` pairs an a-team and a b-team of (point,
//! weight) entries with equal team totals. Points may repeat inside a team
//! and across teams. The methods [`WeightedSimplex::swap_teams`],
//! [`WeightedSimplex::reorder`], [`WeightedSimplex::merge`],
//! [`WeightedSimplex::cancel`], [`WeightedSimplex::drop_zero`] and their
//! inverses ([`WeightedSimplex::split`], [`WeightedSimplex::uncancel`],
//! [`WeightedSimplex::insert_zero`]) generate the equivalence relation under
//! which `gamma` is invariant.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::SemiMetricSpace;

/// Team balance tolerance for float weights, relative to `max(1, Σm)`.
pub const BALANCE_TOL: f64 = 1e-12;

/// Net weights at or below this (relative) size are treated as cancelled.
const FLOAT_ZERO_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    A,
    B,
}

pub type Entry = (usize, Scalar);

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct WeightedSimplex {
    a: Vec<Entry>,
    b: Vec<Entry>,
}

impl WeightedSimplex {
    pub fn new(a: Vec<Entry>, b: Vec<Entry>) -> Result<Self> {
        for (_, w) in a.iter().chain(&b) {
            if w.is_negative() {
                return Err(Error::NegativeWeight(w.to_string()));
            }
        }
        let s = WeightedSimplex { a, b };
        s.check_balance()?;
        Ok(s)
    }

    /// Builds from `(label, weight)` pairs resolved against `space`.
    pub fn from_labels(
        space: &SemiMetricSpace,
        a: &[(&str, Scalar)],
        b: &[(&str, Scalar)],
    ) -> Result<Self> {
        let resolve = |team: &[(&str, Scalar)]| -> Result<Vec<Entry>> {
            team.iter()
                .map(|(l, w)| {
                    space
                        .index_of(l)
                        .map(|i| (i, w.clone()))
                        .ok_or_else(|| Error::UnknownLabel(l.to_string()))
                })
                .collect()
        };
        WeightedSimplex::new(resolve(a)?, resolve(b)?)
    }

    /// The empty simplex.
    pub fn empty() -> Self {
        WeightedSimplex { a: Vec::new(), b: Vec::new() }
    }

    fn check_balance(&self) -> Result<()> {
        let sa: Scalar = self.a.iter().map(|(_, w)| w).sum();
        let sb: Scalar = self.b.iter().map(|(_, w)| w).sum();
        let ok = match (&sa, &sb) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            _ => {
                let scale = sa.to_f64().abs().max(1.0);
                (sa.to_f64() - sb.to_f64()).abs() <= BALANCE_TOL * scale
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unbalanced { a: sa.to_string(), b: sb.to_string() })
        }
    }

    pub fn a_team(&self) -> &[Entry] {
        &self.a
    }

    pub fn b_team(&self) -> &[Entry] {
        &self.b
    }

    pub fn team(&self, team: Team) -> &[Entry] {
        match team {
            Team::A => &self.a,
            Team::B => &self.b,
        }
    }

    fn team_mut(&mut self, team: Team) -> &mut Vec<Entry> {
        match team {
            Team::A => &mut self.a,
            Team::B => &mut self.b,
        }
    }

    /// Sum of a-team weights (equal to the b-team sum).
    pub fn load(&self) -> Scalar {
        self.a.iter().map(|(_, w)| w).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.a.iter().chain(&self.b).all(|(_, w)| w.is_exact())
    }

    pub fn check_indices(&self, len: usize) -> Result<()> {
        match self.a.iter().chain(&self.b).find(|(i, _)| *i >= len) {
            Some(&(index, _)) => Err(Error::IndexOutOfRange { index, len }),
            None => Ok(()),
        }
    }

    /// Multiplies every weight by `t`; `gamma` scales by `t²`.
    pub fn scale(&self, t: &Scalar) -> Result<Self> {
        if t.is_negative() {
            return Err(Error::Domain(format!("scale factor must be >= 0, got {t}")));
        }
        let f = |team: &[Entry]| team.iter().map(|(i, w)| (*i, w * t)).collect();
        Ok(WeightedSimplex { a: f(&self.a), b: f(&self.b) })
    }

    /// Copy with weights divided by the simplex weight, giving weight one.
    pub fn normalize(&self) -> Result<Self> {
        let lambda = self.refine().weight;
        if lambda.is_zero() {
            return Err(Error::Degenerate);
        }
        self.scale(&lambda.recip()?)
    }

    /// Net coefficient vector: a-team weights positive, b-team negative.
    pub fn coefficients(&self, len: usize) -> Vec<Scalar> {
        let mut alpha = vec![Scalar::zero(); len];
        for (i, w) in &self.a {
            alpha[*i] = &alpha[*i] + w;
        }
        for (i, w) in &self.b {
            alpha[*i] = &alpha[*i] - w;
        }
        alpha
    }

    /// The simplex whose net coefficients are `alpha` (positive entries form
    /// the a-team). `alpha` must sum to zero.
    pub fn from_coefficients(alpha: &[Scalar]) -> Result<Self> {
        let a = alpha
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_positive())
            .map(|(i, x)| (i, x.clone()))
            .collect();
        let b = alpha
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_negative())
            .map(|(i, x)| (i, -x))
            .collect();
        WeightedSimplex::new(a, b)
    }

    // Procedure (i).

    pub fn swap_teams(&self) -> Self {
        WeightedSimplex { a: self.b.clone(), b: self.a.clone() }
    }

    /// Re-indexes one team: entry `k` of the result is entry `perm[k]`.
    pub fn reorder(&self, team: Team, perm: &[usize]) -> Result<Self> {
        let src = self.team(team);
        let mut seen = vec![false; src.len()];
        if perm.len() != src.len() || perm.iter().any(|&k| k >= src.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Domain("not a permutation of the team".into()));
        }
        let mut out = self.clone();
        *out.team_mut(team) = perm.iter().map(|&k| src[k].clone()).collect();
        Ok(out)
    }

    // Procedure (ii) and its inverse.

    /// Merges entries `i` and `j` of one team, which must name the same point.
    pub fn merge(&self, team: Team, i: usize, j: usize) -> Result<Self> {
        let entries = self.team(team);
        if i == j || i >= entries.len() || j >= entries.len() || entries[i].0 != entries[j].0 {
            return Err(Error::Domain("merge needs two entries with the same point".into()));
        }
        let mut out = self.clone();
        let t = out.team_mut(team);
        let w = &t[i].1 + &t[j].1;
        t[i].1 = w;
        t.remove(j);
        Ok(out)
    }

    /// Splits `part` off entry `i` into a new entry for the same point.
    pub fn split(&self, team: Team, i: usize, part: &Scalar) -> Result<Self> {
        let entries = self.team(team);
        if i >= entries.len() || part.is_negative() || *part > entries[i].1 {
            return Err(Error::Domain("split part must lie in [0, weight]".into()));
        }
        let mut out = self.clone();
        let t = out.team_mut(team);
        let point = t[i].0;
        t[i].1 = &t[i].1 - part;
        t.push((point, part.clone()));
        Ok(out)
    }

    // Procedure (iii) and its inverse.

    /// Cancels a-entry `i` against b-entry `j` (same point): the smaller weight
    /// is subtracted from the larger and the smaller entry removed.
    pub fn cancel(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.a.len() || j >= self.b.len() || self.a[i].0 != self.b[j].0 {
            return Err(Error::Domain("cancel needs the same point on both teams".into()));
        }
        let mut out = self.clone();
        let (m, n) = (out.a[i].1.clone(), out.b[j].1.clone());
        if m >= n {
            out.a[i].1 = m - n;
            out.b.remove(j);
        } else {
            out.b[j].1 = n - m;
            out.a.remove(i);
        }
        Ok(out)
    }

    /// Adds `w` to entry `i` of `team` and a matching entry of weight `w` for
    /// the same point on the other team.
    pub fn uncancel(&self, team: Team, i: usize, w: &Scalar) -> Result<Self> {
        if i >= self.team(team).len() || w.is_negative() {
            return Err(Error::Domain("uncancel needs a valid entry and w >= 0".into()));
        }
        let mut out = self.clone();
        let point = out.team(team)[i].0;
        let t = out.team_mut(team);
        t[i].1 = &t[i].1 + w;
        let other = match team {
            Team::A => Team::B,
            Team::B => Team::A,
        };
        out.team_mut(other).push((point, w.clone()));
        Ok(out)
    }

    // Procedure (iv) and its inverse.

    pub fn drop_zero(&self, team: Team, i: usize) -> Result<Self> {
        if i >= self.team(team).len() || !self.team(team)[i].1.is_zero() {
            return Err(Error::Domain("only zero-weight entries can be dropped".into()));
        }
        let mut out = self.clone();
        out.team_mut(team).remove(i);
        Ok(out)
    }

    pub fn insert_zero(&self, team: Team, point: usize) -> Self {
        let mut out = self.clone();
        out.team_mut(team).push((point, Scalar::zero()));
        out
    }

    /// Canonical refinement: same-team duplicates merged, cross-team
    /// duplicates cancelled, zero weights dropped, points sorted by index and
    /// the team with the lexicographically smaller index list placed first.
    pub fn refine(&self) -> RefinedSimplex {
        let len = self.a.iter().chain(&self.b).map(|(i, _)| i + 1).max().unwrap_or(0);
        let mut net = self.coefficients(len);
        if !self.is_exact() {
            let total = self.load().to_f64().abs().max(1.0);
            for x in net.iter_mut() {
                if x.to_f64().abs() <= FLOAT_ZERO_TOL * total {
                    *x = Scalar::zero();
                }
            }
        }
        let mut a: Vec<Entry> = Vec::new();
        let mut b: Vec<Entry> = Vec::new();
        for (i, x) in net.into_iter().enumerate() {
            if x.is_positive() {
                a.push((i, x));
            } else if x.is_negative() {
                b.push((i, -x));
            }
        }
        if a.is_empty() || b.is_empty() {
            return RefinedSimplex { simplex: WeightedSimplex::empty(), weight: Scalar::zero() };
        }
        let a_idx: Vec<usize> = a.iter().map(|e| e.0).collect();
        let b_idx: Vec<usize> = b.iter().map(|e| e.0).collect();
        if b_idx < a_idx {
            std::mem::swap(&mut a, &mut b);
        }
        let weight = a.iter().map(|(_, w)| w).sum();
        RefinedSimplex { simplex: WeightedSimplex { a, b }, weight }
    }

    pub fn is_degenerate(&self) -> bool {
        self.refine().weight.is_zero()
    }

    pub fn equivalent(&self, other: &WeightedSimplex) -> bool {
        let (x, y) = (self.refine(), other.refine());
        let same_team = |s: &[Entry], t: &[Entry]| {
            s.len() == t.len()
                && s.iter().zip(t).all(|((i, v), (j, w))| i == j && v.approx_eq(w, BALANCE_TOL))
        };
        same_team(x.simplex.a_team(), y.simplex.a_team())
            && same_team(x.simplex.b_team(), y.simplex.b_team())
    }

    pub fn display<'a>(&'a self, space: &'a SemiMetricSpace) -> SimplexDisplay<'a> {
        SimplexDisplay { simplex: self, space }
    }
}

/// A refinement together with its weight `λ`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RefinedSimplex {
    pub simplex: WeightedSimplex,
    pub weight: Scalar,
}

impl RefinedSimplex {
    pub fn is_degenerate(&self) -> bool {
        self.weight.is_zero()
    }
}

/// `Σ_{i,j} m_i n_j d(a_i, b_j)^p`.
pub fn cross_team_sum(space: &SemiMetricSpace, d: &WeightedSimplex, p: &Scalar) -> Result<Scalar> {
    d.check_indices(space.len())?;
    let mut total = Scalar::zero();
    for (ai, m) in &d.a {
        for (bj, n) in &d.b {
            total = total + m * n * space.dist_pow(*ai, *bj, p);
        }
    }
    Ok(total)
}

/// Within-team pair sums `Σ_{i<i'} m m d^p + Σ_{j<j'} n n d^p`.
pub fn within_team_sum(space: &SemiMetricSpace, d: &WeightedSimplex, p: &Scalar) -> Result<Scalar> {
    d.check_indices(space.len())?;
    let pairs = |team: &[Entry]| -> Scalar {
        let mut total = Scalar::zero();
        for (k, (x, v)) in team.iter().enumerate() {
            for (y, w) in &team[k + 1..] {
                total = total + v * w * space.dist_pow(*x, *y, p);
            }
        }
        total
    };
    Ok(pairs(&d.a) + pairs(&d.b))
}

/// The simplex gap function: cross-team sum minus within-team sums.
pub fn gamma(space: &SemiMetricSpace, d: &WeightedSimplex, p: &Scalar) -> Result<Scalar> {
    if p.is_negative() {
        return Err(Error::Domain(format!("exponent must be >= 0, got {p}")));
    }
    Ok(cross_team_sum(space, d, p)? - within_team_sum(space, d, p)?)
}

pub struct SimplexDisplay<'a> {
    simplex: &'a WeightedSimplex,
    space: &'a SemiMetricSpace,
}

impl fmt::Display for SimplexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let team = |entries: &[Entry]| {
            entries
                .iter()
                .map(|(i, w)| format!("{}({})", self.space.label(*i), w))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "[{}; {}]", team(&self.simplex.a), team(&self.simplex.b))
    }
}
