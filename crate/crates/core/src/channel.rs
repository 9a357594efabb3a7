//! Channels in Kraus form.

use crate::error::{Error, Result};
use crate::measurement::Observable;
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, Side, C64, PSD_TOL};
use crate::sdp::{compat_margin, MarginReport, SolverConfig};

pub const TRACE_PRESERVING_TOL: f64 = 1e-9;
/// Spectral weights below this are dropped when building Kraus operators.
const KRAUS_CUTOFF: f64 = 1e-15;

/// Completely positive trace-preserving map `rho -> sum_k K rho K^dagger`.
#[derive(Clone, Debug)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl Channel {
    /// Validates shapes and `sum_k K^dagger K = 1`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 || kraus.is_empty() {
            return Err(Error::Empty);
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let ch = Self { dim_in, dim_out, kraus };
        let dev = ch.trace_preservation_error();
        if dev > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// Replacement channel `rho -> tr[rho] sigma`.
    pub fn constant(dim_in: usize, sigma: &DensityOperator) -> Self {
        let trivial = Observable::new(vec![HermitianOperator::identity(dim_in)]).expect("identity is an observable");
        measure_and_prepare(&trivial, std::slice::from_ref(sigma)).expect("shapes agree")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Largest entry of `sum_k K^dagger K - 1`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        sum -= CMatrix::identity(self.dim_in, self.dim_in);
        sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_input(&self, dim: usize) -> Result<()> {
        if dim != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: dim,
            });
        }
        Ok(())
    }

    /// Action on an arbitrary operator of the input space.
    pub fn apply_operator(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        self.check_input(x.dim())?;
        let mut out = HermitianOperator::zeros(self.dim_out);
        for k in &self.kraus {
            out.add_scaled(&x.conjugate_by(k)?, 1.0);
        }
        Ok(out)
    }

    /// Heisenberg action `sum_k K^dagger x K` on an output-space operator.
    pub fn dual_operator(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                found: x.dim(),
            });
        }
        let mut out = HermitianOperator::zeros(self.dim_in);
        for k in &self.kraus {
            out.add_scaled(&x.conjugate_by(&k.adjoint())?, 1.0);
        }
        Ok(out)
    }

    /// Normalized Choi state `(1/d_in) sum_ij |i><j| (x) L(|i><j|)`.
    pub fn choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        let mut m = CMatrix::zeros(n, n);
        for k in &self.kraus {
            // |K>> = sum_i |i> (x) K|i>
            let v = CMatrix::from_fn(n, 1, |r, _| k[(r % dout, r / dout)]);
            m += &v * v.adjoint();
        }
        m /= C64::new(din as f64, 0.0);
        ChoiMatrix {
            dim_in: din,
            dim_out: dout,
            op: HermitianOperator::from_raw(m),
        }
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                found: next.dim_in,
            });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(Channel {
            dim_in: self.dim_in,
            dim_out: next.dim_out,
            kraus,
        })
    }
}

/// Choi matrix of a channel, normalized to unit trace.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub op: HermitianOperator,
}

impl ChoiMatrix {
    /// Recovers the channel action `L(x) = d_in tr_1[(x^T (x) 1) C]`.
    pub fn apply_operator(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: x.dim(),
            });
        }
        let (din, dout) = (self.dim_in, self.dim_out);
        let c = self.op.matrix();
        let out = CMatrix::from_fn(dout, dout, |o1, o2| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..din {
                for j in 0..din {
                    // (x^T)_{ji} = x_{ij}
                    acc += x.entry(i, j) * c[(i * dout + o1, j * dout + o2)];
                }
            }
            acc * din as f64
        });
        Ok(HermitianOperator::from_raw(out))
    }

    /// Smallest eigenvalue of the partial transpose on the output factor.
    pub fn partial_transpose_min_eigenvalue(&self) -> f64 {
        self.op
            .partial_transpose((self.dim_in, self.dim_out), Side::Second)
            .expect("Choi dimensions factorize")
            .min_eigenvalue()
    }
}

/// Schrödinger action on states.
pub fn apply(ch: &Channel, rho: &DensityOperator) -> Result<DensityOperator> {
    DensityOperator::new(ch.apply_operator(rho.op())?)
}

/// Effect-wise Heisenberg dual `x -> L*(A(x))`.
pub fn heisenberg_dual(ch: &Channel, a: &Observable) -> Result<Observable> {
    let effects = a
        .effects()
        .iter()
        .map(|e| ch.dual_operator(e))
        .collect::<Result<Vec<_>>>()?;
    Observable::new(effects)
}

/// `rho -> t rho + (1 - t) tr[rho] 1/d`, with Kraus operators `sqrt(t) 1`
/// and `sqrt((1 - t)/d) |i><j|`.
pub fn depolarizing(t: f64, d: usize) -> Result<Channel> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("depolarizing weight {t} outside [0, 1]")));
    }
    if d == 0 {
        return Err(Error::Empty);
    }
    let mut kraus = Vec::new();
    if t > 0.0 {
        kraus.push(CMatrix::identity(d, d) * C64::new(t.sqrt(), 0.0));
    }
    if t < 1.0 {
        let w = ((1.0 - t) / d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = C64::new(w, 0.0);
                kraus.push(k);
            }
        }
    }
    Channel::new(d, d, kraus)
}

/// `rho -> sum_x tr[rho M(x)] sigma_x`. Kraus operators are
/// `sqrt(l mu) |v><u|` over eigenpairs `(mu, u)` of `M(x)` and `(l, v)` of `sigma_x`.
pub fn measure_and_prepare(m: &Observable, states: &[DensityOperator]) -> Result<Channel> {
    if states.len() != m.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "{} states for {} outcomes",
            states.len(),
            m.outcomes()
        )));
    }
    let dim_out = states[0].dim();
    if let Some(bad) = states.iter().find(|s| s.dim() != dim_out) {
        return Err(Error::DimensionMismatch {
            expected: dim_out,
            found: bad.dim(),
        });
    }
    let mut kraus = Vec::new();
    for (e, sigma) in m.effects().iter().zip(states) {
        let se = e.eigh();
        let ss = sigma.op().eigh();
        for (k, &mu) in se.values.iter().enumerate() {
            if mu <= KRAUS_CUTOFF {
                continue;
            }
            let u = se.vectors.column(k);
            for (l, &lambda) in ss.values.iter().enumerate() {
                if lambda <= KRAUS_CUTOFF {
                    continue;
                }
                let v = ss.vectors.column(l);
                kraus.push(v * u.adjoint() * C64::new((lambda * mu).sqrt(), 0.0));
            }
        }
    }
    Channel::new(m.dim(), dim_out, kraus)
}

fn require_qubit(ch: &Channel) -> Result<()> {
    if ch.dim_in != 2 || ch.dim_out != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "entanglement breaking test needs a qubit channel, got {} -> {}",
            ch.dim_in, ch.dim_out
        )));
    }
    Ok(())
}

/// PPT test of the Choi matrix, exact for qubit channels.
pub fn is_entanglement_breaking_qubit(ch: &Channel) -> Result<bool> {
    require_qubit(ch)?;
    Ok(ch.choi().partial_transpose_min_eigenvalue() >= -PSD_TOL)
}

/// Compatibility of the dual images `L*(A_1), ..., L*(A_r)`.
pub fn breaks_incompatibility_of(ch: &Channel, obs: &[Observable], cfg: &SolverConfig) -> Result<MarginReport> {
    let images = obs.iter().map(|a| heisenberg_dual(ch, a)).collect::<Result<Vec<_>>>()?;
    compat_margin(&images, cfg)
}

/// Bracket `(lo, hi)` on the largest `t` for which `family(t)` is entanglement
/// breaking, assuming the property is monotone in `t` on `[0, 1]`.
pub fn entanglement_breaking_threshold(family: impl Fn(f64) -> Result<Channel>, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bisection tolerance {tol}")));
    }
    if is_entanglement_breaking_qubit(&family(1.0)?)? {
        return Ok((1.0, 1.0));
    }
    if !is_entanglement_breaking_qubit(&family(0.0)?)? {
        return Ok((0.0, 0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let t = 0.5 * (lo + hi);
        if is_entanglement_breaking_qubit(&family(t)?)? {
            lo = t;
        } else {
            hi = t;
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::QubitDichotomic;
    use crate::operator::{pauli, BlochVector};
    use crate::sdp::Status;

    fn state(r: [f64; 3]) -> DensityOperator {
        DensityOperator::from_bloch(BlochVector::new(r).unwrap())
    }

    #[test]
    fn apply_examples() {
        let rho = state([0.2, -0.5, 0.3]);
        assert!(apply(&Channel::identity(2), &rho).unwrap().op().approx_eq(rho.op(), 1e-15));
        let out = apply(&depolarizing(0.0, 2).unwrap(), &rho).unwrap();
        assert!(out.op().approx_eq(&HermitianOperator::identity(2).scale(0.5), 1e-15));
        let out = apply(&depolarizing(0.4, 2).unwrap(), &rho).unwrap();
        let r = out.bloch().unwrap();
        for (got, want) in r.iter().zip([0.08, -0.2, 0.12]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn depolarizing_examples() {
        let id = depolarizing(1.0, 3).unwrap();
        assert_eq!(id.kraus().len(), 1);
        assert!(depolarizing(1.2, 2).is_err());
        let half = depolarizing(0.5, 2).unwrap();
        assert!(half.trace_preservation_error() < 1e-12);
        for k in 1..=3 {
            let out = apply(&half, &DensityOperator::from_bloch(BlochVector::axis(k, 1.0).unwrap())).unwrap();
            assert!((out.bloch().unwrap()[k - 1] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn dual_examples() {
        let q = QubitDichotomic::from_parts(0.1, [0.3, 0.4, -0.2]).unwrap();
        let a = q.observable();
        assert!(heisenberg_dual(&Channel::identity(2), &a).unwrap().approx_eq(&a, 1e-15));
        let contracted = QubitDichotomic::from_parts(0.1, [0.18, 0.24, -0.12]).unwrap().observable();
        let got = heisenberg_dual(&depolarizing(0.6, 2).unwrap(), &a).unwrap();
        assert!(got.approx_eq(&contracted, 1e-14));
    }

    #[test]
    fn measure_and_prepare_examples() {
        let sigma = state([0.1, 0.2, 0.3]);
        let ch = Channel::constant(2, &sigma);
        let out = apply(&ch, &state([0.0, 0.9, 0.0])).unwrap();
        assert!(out.op().approx_eq(sigma.op(), 1e-14));

        let sz = QubitDichotomic::from_parts(0.0, [0.0, 0.0, 1.0]).unwrap().observable();
        let dephase = measure_and_prepare(&sz, &[state([0.0, 0.0, 1.0]), state([0.0, 0.0, -1.0])]).unwrap();
        let out = apply(&dephase, &state([0.5, -0.3, 0.4])).unwrap();
        let r = out.bloch().unwrap();
        assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14 && (r[2] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn choi_round_trip_and_eb() {
        let ch = depolarizing(0.3, 2).unwrap();
        let choi = ch.choi();
        assert!((choi.op.trace() - 1.0).abs() < 1e-14);
        let x = pauli(2).scale(0.7);
        assert!(choi.apply_operator(&x).unwrap().approx_eq(&ch.apply_operator(&x).unwrap(), 1e-12));

        assert!(!is_entanglement_breaking_qubit(&Channel::identity(2)).unwrap());
        assert!((Channel::identity(2).choi().partial_transpose_min_eigenvalue() + 0.5).abs() < 1e-12);
        assert!(is_entanglement_breaking_qubit(&Channel::constant(2, &state([0.0, 0.0, 0.5]))).unwrap());
        assert!(is_entanglement_breaking_qubit(&Channel::identity(3)).is_err());
    }

    #[test]
    fn breaking_examples() {
        let sx = QubitDichotomic::from_parts(0.0, [1.0, 0.0, 0.0]).unwrap().observable();
        let sy = QubitDichotomic::from_parts(0.0, [0.0, 1.0, 0.0]).unwrap().observable();
        let pair = [sx, sy];
        let cfg = SolverConfig::decide();
        assert_eq!(breaks_incompatibility_of(&Channel::identity(2), &pair, &cfg).unwrap().status, Status::Incompatible);
        assert_eq!(breaks_incompatibility_of(&depolarizing(0.0, 2).unwrap(), &pair, &cfg).unwrap().status, Status::Compatible);
        assert_eq!(breaks_incompatibility_of(&depolarizing(0.5, 2).unwrap(), &pair, &cfg).unwrap().status, Status::Compatible);
    }
}
