//! Closed-form compatibility tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{jordan_grid, max_commutator_norm, JointCandidate, Observable, QubitDichotomic};
use crate::operator::{BlochVector, HermitianOperator, PSD_TOL};

pub const ANALYTIC_TOL: f64 = 1e-12;
pub const COMMUTE_TOL: f64 = 1e-9;
pub const LUDERS_TOL: f64 = 1e-8;

fn same_dim(a: &Observable, b: &Observable) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `|a + b| + |a - b| - 2`; the unbiased pair is compatible iff this is `<= 0`.
pub fn busch_slack(a: &BlochVector, b: &BlochVector) -> f64 {
    let (a, b) = (a.components(), b.components());
    let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let diff = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    crate::operator::norm3(sum) + crate::operator::norm3(diff) - 2.0
}

/// Unbiased qubit criterion `|a + b| + |a - b| <= 2`.
pub fn busch_compatible(a: &BlochVector, b: &BlochVector) -> bool {
    busch_slack(a, b) <= ANALYTIC_TOL
}

/// `s(alpha, a) = (sqrt((1 + alpha)^2 - a^2) + sqrt((1 - alpha)^2 - a^2)) / 2`.
pub fn sharpness_s(alpha: f64, a_norm: f64) -> Result<f64> {
    if !alpha.is_finite() || !a_norm.is_finite() || a_norm < 0.0 || alpha.abs() > 1.0 - a_norm + ANALYTIC_TOL {
        return Err(Error::InvalidQubitParams {
            bias: alpha,
            norm: a_norm,
        });
    }
    let root = |x: f64| (x * x - a_norm * a_norm).max(0.0).sqrt();
    Ok(0.5 * (root(1.0 + alpha) + root(1.0 - alpha)))
}

/// Left side minus right side of the biased qubit condition; compatible iff `<= 0`.
/// `None` when a sharpness value vanishes and the quotient is undefined.
pub fn ylo_slack(q1: &QubitDichotomic, q2: &QubitDichotomic) -> Result<Option<f64>> {
    let sa = sharpness_s(q1.bias, q1.bloch.norm())?;
    let sb = sharpness_s(q2.bias, q2.bloch.norm())?;
    if sa <= ANALYTIC_TOL || sb <= ANALYTIC_TOL {
        return Ok(None);
    }
    let (sa2, sb2) = (sa * sa, sb * sb);
    let lhs = (1.0 - sa2 - sb2) * (1.0 - q1.bias * q1.bias / sa2 - q2.bias * q2.bias / sb2);
    let rhs = (q1.bloch.dot(&q2.bloch) - q1.bias * q2.bias).powi(2);
    Ok(Some(lhs - rhs))
}

/// Biased qubit criterion. A vanishing sharpness value means a sharp
/// observable, which is compatible with another one iff the two commute.
pub fn ylo_compatible(q1: &QubitDichotomic, q2: &QubitDichotomic) -> Result<bool> {
    match ylo_slack(q1, q2)? {
        Some(slack) => Ok(slack <= ANALYTIC_TOL),
        None => commute_check(&q1.observable(), &q2.observable()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum JordanVerdict {
    Holds,
    /// Cell with the most negative eigenvalue.
    Fails { x: usize, y: usize, eigenvalue: f64 },
}

impl JordanVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, JordanVerdict::Holds)
    }
}

/// Tests positivity of the grid `J(x, y) = A(x) o B(y) / 2`.
pub fn jordan_criterion(a: &Observable, b: &Observable) -> Result<JordanVerdict> {
    Ok(jordan_check(a, b)?.0)
}

/// Jordan verdict together with its grid, which is a joint observable when
/// the criterion holds.
pub fn jordan_check(a: &Observable, b: &Observable) -> Result<(JordanVerdict, JointCandidate)> {
    same_dim(a, b)?;
    let grid = jordan_grid(&[a.clone(), b.clone()])?;
    let (idx, eigenvalue) = grid.min_cell_eigenvalue();
    let verdict = if eigenvalue >= -PSD_TOL {
        JordanVerdict::Holds
    } else {
        JordanVerdict::Fails {
            x: idx[0],
            y: idx[1],
            eigenvalue,
        }
    };
    Ok((verdict, grid))
}

/// Whether every pair of effects commutes (spectral norm `<= 1e-9`).
pub fn commute_check(a: &Observable, b: &Observable) -> Result<bool> {
    same_dim(a, b)?;
    Ok(max_commutator_norm(a, b)? <= COMMUTE_TOL)
}

/// Largest entry deviation `|sum_x A(x)^1/2 B(y) A(x)^1/2 - B(y)|` over `y`.
pub fn luders_disturbance(a: &Observable, b: &Observable) -> Result<f64> {
    same_dim(a, b)?;
    let roots = a.effects().iter().map(|e| e.sqrt_psd()).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for eb in b.effects() {
        let mut out = HermitianOperator::zeros(a.dim());
        for r in &roots {
            out.add_scaled(&eb.conjugate_by(r.matrix())?, 1.0);
        }
        worst = worst.max(out.max_abs_diff(eb));
    }
    Ok(worst)
}

/// Whether the Lüders channel of `a` leaves every effect of `b` unchanged.
pub fn luders_nondisturbing(a: &Observable, b: &Observable) -> Result<bool> {
    Ok(luders_disturbance(a, b)? <= LUDERS_TOL)
}

/// Minimal eigenvalues of `G`, `A(1) - G`, `B(1) - G` and `1 + G - A(1) - B(1)`,
/// the cells of the 2x2 grid determined by `G`.
pub fn dichotomic_four_operators(a: &Observable, b: &Observable, g: &HermitianOperator) -> Result<[f64; 4]> {
    for o in [a, b] {
        if !o.is_dichotomic() {
            return Err(Error::NotDichotomic(o.outcomes()));
        }
    }
    same_dim(a, b)?;
    if g.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: g.dim(),
        });
    }
    let (a1, b1) = (a.effect(0), b.effect(0));
    let mut last = g - a1;
    last.add_scaled(b1, -1.0);
    last.shift_diagonal(1.0);
    Ok([
        g.min_eigenvalue(),
        (a1 - g).min_eigenvalue(),
        (b1 - g).min_eigenvalue(),
        last.min_eigenvalue(),
    ])
}
