//! Deciding p-negative type via the spectrum of the distance-power matrix on
//! the zero-sum hyperplane, and bisection for the supremal p-negative type.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::SemiMetricSpace;

/// Default relative eigenvalue threshold.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;
pub const DEFAULT_P_MAX: f64 = 8.0;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeCertificate {
    /// Largest eigenvalue of the quadratic form on the zero-sum hyperplane.
    MaxEigenvalue { value: f64, threshold: f64 },
    /// Zero-sum coefficients (scaled to `Σ|α| = 2`) with `αᵀMα = value > 0`.
    Violation { alpha: Vec<f64>, value: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeVerdict {
    pub p: f64,
    pub has_type: bool,
    pub strict: bool,
    /// `|λ_max|` is within the threshold: the verdict sits on the boundary.
    pub marginal: bool,
    pub max_eigenvalue: f64,
    pub threshold: f64,
    pub certificate: TypeCertificate,
}

/// Orthonormal (Helmert) basis of `{α : Σα = 0}` as the columns of an
/// `n × (n-1)` matrix.
pub fn zero_sum_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = 1.0 / norm;
        }
        b[(k, k - 1)] = -(k as f64) / norm;
    }
    b
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Tests `Σ d(x_i,x_j)^p α_i α_j <= 0` for all zero-sum `α`.
///
/// The form is restricted to the zero-sum hyperplane and its largest
/// eigenvalue compared against `tol · ‖M‖_∞`.
pub fn has_negative_type(s: &SemiMetricSpace, p: f64, tol: f64) -> Result<TypeVerdict> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent must be >= 0, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let n = s.len();
    let m = s.power_matrix(p);
    let threshold = tol * inf_norm(&m).max(f64::MIN_POSITIVE);
    if n < 2 {
        return Ok(TypeVerdict {
            p,
            has_type: true,
            strict: true,
            marginal: false,
            max_eigenvalue: f64::NEG_INFINITY,
            threshold,
            certificate: TypeCertificate::MaxEigenvalue { value: f64::NEG_INFINITY, threshold },
        });
    }
    let basis = zero_sum_basis(n);
    let reduced = basis.transpose() * &m * &basis;
    let eig = SymmetricEigen::new(reduced);
    let (top, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let has_type = lambda <= threshold;
    let strict = lambda < -threshold;
    let certificate = if has_type {
        TypeCertificate::MaxEigenvalue { value: lambda, threshold }
    } else {
        let mut alpha: DVector<f64> = &basis * eig.eigenvectors.column(top);
        let l1: f64 = alpha.iter().map(|x| x.abs()).sum();
        alpha *= 2.0 / l1;
        let value = (alpha.transpose() * &m * &alpha)[(0, 0)];
        TypeCertificate::Violation { alpha: alpha.iter().copied().collect(), value }
    };
    Ok(TypeVerdict {
        p,
        has_type,
        strict,
        marginal: lambda.abs() <= threshold,
        max_eigenvalue: lambda,
        threshold,
        certificate,
    })
}

/// Supremal p-negative type: a finite value or the `+∞` sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Supremal {
    Finite(f64),
    Infinite,
}

impl Supremal {
    pub fn finite(self) -> Option<f64> {
        match self {
            Supremal::Finite(x) => Some(x),
            Supremal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Supremal::Infinite)
    }
}

impl std::fmt::Display for Supremal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Supremal::Finite(x) => write!(f, "{x}"),
            Supremal::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for Supremal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Supremal::Finite(x) => serializer.serialize_f64(*x),
            Supremal::Infinite => serializer.serialize_str("infinity"),
        }
    }
}

/// Bisection for `sup {p : s has p-negative type}` on `[0, p_max]`.
///
/// Returns the largest exponent verified to have negative type once the
/// bracket is narrower than `tol`, or [`Supremal::Infinite`] when the space
/// already has `p_max`-negative type.
pub fn supremal_p(s: &SemiMetricSpace, p_max: f64, tol: f64) -> Result<Supremal> {
    supremal_p_with(s, p_max, tol, DEFAULT_EIG_TOL)
}

pub fn supremal_p_with(s: &SemiMetricSpace, p_max: f64, tol: f64, eig_tol: f64) -> Result<Supremal> {
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::Domain(format!("p_max must be > 0, got {p_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    if has_negative_type(s, p_max, eig_tol)?.has_type {
        return Ok(Supremal::Infinite);
    }
    // Every space has 0-negative type.
    let (mut lo, mut hi) = (0.0, p_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if has_negative_type(s, mid, eig_tol)?.has_type {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Supremal::Finite(lo))
}
