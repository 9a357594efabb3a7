//! Entanglement-side counterparts of the compatibility tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Side, C64, PSD_TOL};

pub const PURITY_TOL: f64 = 1e-9;

/// Smallest eigenvalue of the partial transpose of a two-qubit state.
pub fn partial_transpose_min_eigenvalue(omega: &DensityOperator) -> Result<f64> {
    if omega.dim() != 4 {
        return Err(Error::UnsupportedDimension(format!(
            "two-qubit test needs dimension 4, got {}",
            omega.dim()
        )));
    }
    Ok(omega.op().partial_transpose((2, 2), Side::Second)?.min_eigenvalue())
}

/// PPT test, exact in 2 x 2: entangled iff the partial transpose has an
/// eigenvalue below `-1e-9`.
pub fn ppt_entangled_2qubit(omega: &DensityOperator) -> Result<bool> {
    Ok(partial_transpose_min_eigenvalue(omega)? < -PSD_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialStateReport {
    /// Either marginal is pure, which forces separability.
    pub pure_marginal: bool,
    /// Trace-norm distance between the state and the product of its marginals.
    pub product_distance: f64,
    pub purity_first: f64,
    pub purity_second: f64,
}

pub fn partial_state_checks(omega: &DensityOperator, dims: (usize, usize)) -> Result<PartialStateReport> {
    let first = omega.partial_trace(dims, Side::Second)?;
    let second = omega.partial_trace(dims, Side::First)?;
    let product = first.tensor(&second);
    let purity_first = first.purity();
    let purity_second = second.purity();
    Ok(PartialStateReport {
        pure_marginal: purity_first >= 1.0 - PURITY_TOL || purity_second >= 1.0 - PURITY_TOL,
        product_distance: (omega.op() - product.op()).trace_norm(),
        purity_first,
        purity_second,
    })
}

/// `|GHZ><GHZ|` with `|GHZ> = (|000> + |111>)/sqrt 2`.
pub fn ghz_state() -> DensityOperator {
    let mut v = vec![C64::new(0.0, 0.0); 8];
    v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[7] = v[0];
    DensityOperator::pure(&v).expect("unit vector")
}

/// `(|00> + |11>)/sqrt 2` as a density operator.
pub fn bell_state() -> DensityOperator {
    let mut v = vec![C64::new(0.0, 0.0); 4];
    v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[3] = v[0];
    DensityOperator::pure(&v).expect("unit vector")
}

/// The three two-qubit reductions of a three-qubit state, in the order
/// "drop qubit 3", "drop qubit 2", "drop qubit 1".
pub fn three_qubit_reductions(omega: &DensityOperator) -> Result<[DensityOperator; 3]> {
    if omega.dim() != 8 {
        return Err(Error::UnsupportedDimension(format!(
            "three-qubit reductions need dimension 8, got {}",
            omega.dim()
        )));
    }
    let drop3 = omega.partial_trace((4, 2), Side::Second)?;
    let drop1 = omega.partial_trace((2, 4), Side::First)?;
    // move qubit 2 to the end by a basis permutation, then drop it
    let perm = |i: usize| {
        let (a, b, c) = (i >> 2 & 1, i >> 1 & 1, i & 1);
        a << 2 | c << 1 | b
    };
    let m = omega.op().matrix();
    let swapped = crate::operator::CMatrix::from_fn(8, 8, |r, c| m[(perm(r), perm(c))]);
    let swapped = DensityOperator::new(crate::operator::HermitianOperator::new(swapped)?)?;
    let drop2 = swapped.partial_trace((4, 2), Side::Second)?;
    Ok([drop3, drop2, drop1])
}
