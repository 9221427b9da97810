//! Lower bounds on the supremal p-negative type from a positive p-negative
//! type gap.

use serde::Serialize;

use crate::combine::compose_gaps;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::SemiMetricSpace;

/// `c(n) = 1 - (1/⌊n/2⌋ + 1/⌈n/2⌉)/2`.
pub fn c_of_n(n: usize) -> Result<Scalar> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let lo = Scalar::int((n / 2) as i64);
    let hi = Scalar::int(n.div_ceil(2) as i64);
    Ok(Scalar::one() - Scalar::ratio(1, 2) * (lo.recip()? + hi.recip()?))
}

/// Diameter over minimum nonzero distance.
pub fn scaled_diameter(s: &SemiMetricSpace) -> Result<Scalar> {
    let min = s.min_nonzero_distance()?;
    Ok(s.diameter() / min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Direct,
    Combined,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentInput {
    pub points: usize,
    pub diameter: Scalar,
    pub gap: Scalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub p: Scalar,
    /// Gap after rescaling to unit minimum distance.
    pub gap_used: Scalar,
    /// For the combined bound, the pessimistic `(Σ diamᵢ^p)^{1/p}`.
    pub scaled_diameter: Scalar,
    pub n: usize,
    pub c_n: Scalar,
    pub lower_bound: f64,
    pub which: BoundKind,
    /// Factor every distance was divided by before evaluating the bound.
    pub rescaled_by: Scalar,
    pub inputs: Vec<ComponentInput>,
}

fn check_exponent(p: &Scalar) -> Result<()> {
    if p.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent must be > 0, got {p}")))
    }
}

/// `p + ln(1 + Γ/(𝔇^p c(n))) / ln 𝔇` for a space with p-negative type gap
/// `gap > 0`. The space is rescaled internally to unit minimum distance.
pub fn lower_bound_direct(s: &SemiMetricSpace, p: &Scalar, gap: &Scalar) -> Result<BoundReport> {
    check_exponent(p)?;
    if !gap.is_positive() {
        return Err(Error::NonPositiveGap { index: 0, value: gap.to_string() });
    }
    let n = s.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let min = s.min_nonzero_distance()?;
    let big_d = s.diameter() / &min;
    if big_d == Scalar::one() {
        return Err(Error::BoundInapplicable("all nonzero distances are equal".into()));
    }
    let gap_used = gap / &min.pow(p);
    let c_n = c_of_n(n)?;
    let ratio = &gap_used / &(big_d.pow(p) * &c_n);
    let lower_bound = p.to_f64() + ratio.to_f64().ln_1p() / big_d.to_f64().ln();
    Ok(BoundReport {
        p: p.clone(),
        gap_used,
        scaled_diameter: big_d,
        n,
        c_n,
        lower_bound,
        which: BoundKind::Direct,
        rescaled_by: min,
        inputs: Vec::new(),
    })
}

/// Bound valid for every p-additive combination of the given components
/// (each with minimum distance 1 and p-negative type gap > 0):
/// `p + p·ln(1 + Γ/(S·c(N))) / ln S` with `S = Σ diamᵢ^p`, `Γ` the composed
/// gap and `N = Σ|Xᵢ| - n + 1`. This is the direct bound with the diameter
/// replaced by its upper bound `S^{1/p}`.
pub fn lower_bound_combined(components: &[(SemiMetricSpace, Scalar)], p: &Scalar) -> Result<BoundReport> {
    check_exponent(p)?;
    if components.is_empty() {
        return Err(Error::Domain("no components".into()));
    }
    let mut inputs = Vec::with_capacity(components.len());
    for (k, (s, g)) in components.iter().enumerate() {
        let min = s.min_nonzero_distance()?;
        if min != Scalar::one() {
            return Err(Error::MinDistanceNotOne { component: k, min: min.to_string() });
        }
        if !g.is_positive() {
            return Err(Error::NonPositiveGap { index: k, value: g.to_string() });
        }
        inputs.push(ComponentInput { points: s.len(), diameter: s.diameter(), gap: g.clone() });
    }
    let gaps: Vec<Scalar> = inputs.iter().map(|c| c.gap.clone()).collect();
    let gap_used = compose_gaps(&gaps)?;
    let n: usize = inputs.iter().map(|c| c.points).sum::<usize>() + 1 - inputs.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let s_sum: Scalar = inputs.iter().map(|c| c.diameter.pow(p)).sum();
    if s_sum == Scalar::one() {
        return Err(Error::BoundInapplicable("all nonzero distances are equal".into()));
    }
    let c_n = c_of_n(n)?;
    let ratio = &gap_used / &(&s_sum * &c_n);
    let pf = p.to_f64();
    let lower_bound = pf + pf * ratio.to_f64().ln_1p() / s_sum.to_f64().ln();
    Ok(BoundReport {
        p: p.clone(),
        gap_used,
        scaled_diameter: s_sum.pow(&p.recip()?),
        n,
        c_n,
        lower_bound,
        which: BoundKind::Combined,
        rescaled_by: Scalar::one(),
        inputs,
    })
}
