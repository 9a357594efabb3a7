//! Observables (POVMs), their qubit parametrization, mixing, relabeling and
//! joint observables.
//!
//! Outcomes are indexed `0..m` in the API. Reports and the CLI print them
//! 1-based, with the qubit `+` outcome first.

use crate::error::{Error, Result};
use crate::operator::{qubit_operator, BlochVector, HermitianOperator};

/// Tolerance on positivity and normalization of observables and joint grids.
pub const OBSERVABLE_TOL: f64 = 1e-9;
/// Tolerance used when deciding that two effects commute.
pub const COMMUTE_TOL: f64 = 1e-9;

/// A finite-outcome positive operator valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    effects: Vec<HermitianOperator>,
}

fn check_dims(ops: &[HermitianOperator]) -> Result<usize> {
    let dim = ops.first().ok_or(Error::NoOutcomes)?.dim();
    if let Some(bad) = ops.iter().find(|op| op.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(dim)
}

fn sum_ops(dim: usize, ops: impl IntoIterator<Item = impl std::borrow::Borrow<HermitianOperator>>) -> HermitianOperator {
    let mut total = HermitianOperator::zeros(dim);
    for op in ops {
        total.add_scaled(op.borrow(), 1.0);
    }
    total
}

impl Observable {
    /// Validates positivity of every effect and normalization of their sum.
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let dim = check_dims(&effects)?;
        for (index, e) in effects.iter().enumerate() {
            let min_eig = e.min_eigenvalue();
            if min_eig < -OBSERVABLE_TOL {
                return Err(Error::NegativeEffect { index, min_eig });
            }
        }
        let dev = sum_ops(dim, &effects).max_abs_diff(&HermitianOperator::identity(dim));
        if dev > OBSERVABLE_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &HermitianOperator {
        &self.effects[x]
    }

    pub fn is_dichotomic(&self) -> bool {
        self.outcomes() == 2
    }

    /// True when every effect is a projection.
    pub fn is_sharp(&self, tol: f64) -> bool {
        self.effects.iter().all(|e| {
            let sq = HermitianOperator::from_raw(e.matrix() * e.matrix());
            sq.max_abs_diff(e) <= tol
        })
    }

    /// Probability of each outcome in the state `rho`.
    pub fn probabilities(&self, rho: &crate::operator::DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(self.effects.iter().map(|e| rho.expectation(e)).collect())
    }

    /// Largest per-entry deviation between corresponding effects.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.outcomes() != other.outcomes() || self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// Two-outcome qubit observable `(1/2)((1 +- bias) 1 +- a . sigma)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QubitDichotomic {
    pub bias: f64,
    pub bloch: BlochVector,
}

impl QubitDichotomic {
    pub const TOL: f64 = 1e-12;

    pub fn new(bias: f64, bloch: BlochVector) -> Result<Self> {
        let norm = bloch.norm();
        if !bias.is_finite() || bias.abs() > 1.0 - norm + Self::TOL {
            return Err(Error::InvalidQubitParams { bias, norm });
        }
        Ok(Self { bias, bloch })
    }

    pub fn unbiased(bloch: BlochVector) -> Self {
        Self { bias: 0.0, bloch }
    }

    /// Convenience for `(bias, [a1, a2, a3])` literals.
    pub fn from_parts(bias: f64, a: [f64; 3]) -> Result<Self> {
        Self::new(bias, BlochVector::new(a)?)
    }

    /// Effects `[+, -]`.
    pub fn observable(&self) -> Observable {
        let a = self.bloch.components();
        let plus = qubit_operator(0.5 * (1.0 + self.bias), a.map(|v| 0.5 * v));
        let minus = qubit_operator(0.5 * (1.0 - self.bias), a.map(|v| -0.5 * v));
        Observable {
            effects: vec![plus, minus],
        }
    }

    /// Recovers the parameters of a dichotomic qubit observable.
    pub fn from_observable(obs: &Observable) -> Result<Self> {
        if obs.dim() != 2 {
            return Err(Error::UnsupportedDimension(format!(
                "expected a qubit observable, found dimension {}",
                obs.dim()
            )));
        }
        if !obs.is_dichotomic() {
            return Err(Error::NotDichotomic(obs.outcomes()));
        }
        let e = obs.effect(0);
        let bias = e.trace() - 1.0;
        let a = [1, 2, 3].map(|k| e.inner(&crate::operator::pauli(k)));
        let bloch = BlochVector::new(a)?;
        // tolerate rounding of validated observables at the edge of the region
        let bias = bias.clamp(-(1.0 - bloch.norm()).max(0.0), (1.0 - bloch.norm()).max(0.0));
        Self::new(bias, bloch)
    }
}

/// `qubit_observable(q)`: the two-outcome POVM of a qubit parameter set.
pub fn qubit_observable(q: &QubitDichotomic) -> Observable {
    q.observable()
}

/// Validated probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub const TOL: f64 = 1e-12;

    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbabilities("empty".into()));
        }
        if let Some(bad) = p.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("entry {bad} is negative or not finite")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > Self::TOL {
            return Err(Error::InvalidProbabilities(format!("entries sum to {total}")));
        }
        Ok(Self(p))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Trivial observable with effects `p(x) * 1`.
pub fn trivial(dim: usize, p: &ProbabilityVector) -> Result<Observable> {
    if dim == 0 {
        return Err(Error::Empty);
    }
    let id = HermitianOperator::identity(dim);
    Ok(Observable {
        effects: p.as_slice().iter().map(|&v| id.scale(v)).collect(),
    })
}

/// Trivial observable with uniform outcome distribution.
pub fn uniform_trivial(dim: usize, m: usize) -> Observable {
    trivial(dim, &ProbabilityVector::uniform(m)).expect("uniform vector is valid")
}

fn check_same_shape(a: &Observable, b: &Observable) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.outcomes() != b.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "{} outcomes vs {} outcomes",
            a.outcomes(),
            b.outcomes()
        )));
    }
    Ok(())
}

fn check_weight(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("mixing weight {t} outside [0, 1]")));
    }
    Ok(())
}

/// Outcome-wise convex combination `t * a + (1 - t) * b`.
pub fn mix_observables(a: &Observable, b: &Observable, t: f64) -> Result<Observable> {
    check_same_shape(a, b)?;
    check_weight(t)?;
    let effects = a
        .effects
        .iter()
        .zip(&b.effects)
        .map(|(ea, eb)| {
            let mut e = ea.scale(t);
            e.add_scaled(eb, 1.0 - t);
            e
        })
        .collect();
    Ok(Observable { effects })
}

/// Componentwise mixture of two pairs.
pub fn mix_pairs(
    p1: (&Observable, &Observable),
    p2: (&Observable, &Observable),
    t: f64,
) -> Result<(Observable, Observable)> {
    Ok((mix_observables(p1.0, p2.0, t)?, mix_observables(p1.1, p2.1, t)?))
}

/// A deterministic relabeling `f: [k] -> [m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelabelMap {
    target_size: usize,
    map: Vec<usize>,
}

impl RelabelMap {
    pub fn new(map: Vec<usize>, target_size: usize) -> Result<Self> {
        if let Some(bad) = map.iter().find(|&&y| y >= target_size) {
            return Err(Error::RelabelMismatch(format!(
                "source outcome maps to {bad}, target has {target_size} outcomes"
            )));
        }
        Ok(Self { target_size, map })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            target_size: k,
            map: (0..k).collect(),
        }
    }

    pub fn constant(k: usize) -> Self {
        Self {
            target_size: 1,
            map: vec![0; k],
        }
    }

    /// Coordinate `axis` of the row-major product set with the given shape.
    pub fn coordinate(shape: &[usize], axis: usize) -> Self {
        let k: usize = shape.iter().product();
        let stride: usize = shape[axis + 1..].iter().product();
        Self {
            target_size: shape[axis],
            map: (0..k).map(|z| (z / stride) % shape[axis]).collect(),
        }
    }

    pub fn source_size(&self) -> usize {
        self.map.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn apply(&self, z: usize) -> usize {
        self.map[z]
    }
}

/// Coarse-grains `c`: target effect `x` sums the effects of its preimage.
pub fn relabel(c: &Observable, f: &RelabelMap) -> Result<Observable> {
    if f.source_size() != c.outcomes() {
        return Err(Error::RelabelMismatch(format!(
            "map has {} source outcomes, observable has {}",
            f.source_size(),
            c.outcomes()
        )));
    }
    let mut effects = vec![HermitianOperator::zeros(c.dim()); f.target_size()];
    for (z, e) in c.effects.iter().enumerate() {
        effects[f.apply(z)].add_scaled(e, 1.0);
    }
    Ok(Observable { effects })
}

/// Operator grid on a product outcome set, stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointCandidate {
    shape: Vec<usize>,
    cells: Vec<HermitianOperator>,
}

impl JointCandidate {
    /// Validates the shape and that the cells sum to the identity.
    pub fn new(shape: Vec<usize>, cells: Vec<HermitianOperator>) -> Result<Self> {
        let cand = Self::from_cells(shape, cells)?;
        let dim = cand.dim();
        let dev = sum_ops(dim, &cand.cells).max_abs_diff(&HermitianOperator::identity(dim));
        if dev > OBSERVABLE_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(cand)
    }

    /// Shape checks only; normalization is the caller's responsibility.
    pub(crate) fn from_cells(shape: Vec<usize>, cells: Vec<HermitianOperator>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if shape.is_empty() || n == 0 {
            return Err(Error::ShapeMismatch("empty joint grid".into()));
        }
        if cells.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "grid of shape {shape:?} needs {n} cells, got {}",
                cells.len()
            )));
        }
        check_dims(&cells)?;
        Ok(Self { shape, cells })
    }

    pub fn dim(&self) -> usize {
        self.cells[0].dim()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn cells(&self) -> &[HermitianOperator] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<HermitianOperator> {
        self.cells
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        flat_index(&self.shape, index)
    }

    pub fn cell(&self, index: &[usize]) -> &HermitianOperator {
        &self.cells[self.flat_index(index)]
    }

    /// Row-major multi-index of flat position `k`.
    pub fn multi_index(&self, k: usize) -> Vec<usize> {
        multi_index(&self.shape, k)
    }

    /// Sum of the cells whose coordinate `axis` equals `x`, for every `x`.
    pub fn marginal_effects(&self, axis: usize) -> Vec<HermitianOperator> {
        let mut out = vec![HermitianOperator::zeros(self.dim()); self.shape[axis]];
        let stride: usize = self.shape[axis + 1..].iter().product();
        for (k, cell) in self.cells.iter().enumerate() {
            out[(k / stride) % self.shape[axis]].add_scaled(cell, 1.0);
        }
        out
    }

    /// Smallest eigenvalue over all cells and the multi-index attaining it.
    pub fn min_cell_eigenvalue(&self) -> (Vec<usize>, f64) {
        let (k, v) = self
            .cells
            .iter()
            .map(|c| c.min_eigenvalue())
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
        (self.multi_index(k), v)
    }

    /// Marginal observables along every axis; requires positive cells.
    pub fn marginal_observables(&self) -> Result<Vec<Observable>> {
        let (cell, min_eig) = self.min_cell_eigenvalue();
        if min_eig < -OBSERVABLE_TOL {
            return Err(Error::NegativeCell { cell, min_eig });
        }
        (0..self.shape.len())
            .map(|axis| Observable::new(self.marginal_effects(axis)))
            .collect()
    }

    /// Row and column sums of a two-axis grid.
    pub fn marginals(&self) -> Result<(Observable, Observable)> {
        if self.shape.len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "pair marginals need a 2-axis grid, shape is {:?}",
                self.shape
            )));
        }
        let mut m = self.marginal_observables()?;
        let b = m.pop().expect("two marginals");
        let a = m.pop().expect("two marginals");
        Ok((a, b))
    }

    /// Largest per-entry deviation of the grid's marginals from `obs`.
    pub fn marginal_residual(&self, obs: &[Observable]) -> f64 {
        if obs.len() != self.shape.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (axis, o) in obs.iter().enumerate() {
            if o.outcomes() != self.shape[axis] || o.dim() != self.dim() {
                return f64::INFINITY;
            }
            for (m, e) in self.marginal_effects(axis).iter().zip(o.effects()) {
                worst = worst.max(m.max_abs_diff(e));
            }
        }
        worst
    }

    /// Cell-wise convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        check_weight(t)?;
        if self.shape != other.shape || self.dim() != other.dim() {
            return Err(Error::ShapeMismatch("joint grids differ in shape".into()));
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| {
                let mut c = a.scale(t);
                c.add_scaled(b, 1.0 - t);
                c
            })
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            cells,
        })
    }
}

pub(crate) fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    assert_eq!(shape.len(), index.len(), "index rank mismatch");
    index.iter().zip(shape).fold(0, |acc, (&i, &m)| {
        assert!(i < m, "index out of range");
        acc * m + i
    })
}

pub(crate) fn multi_index(shape: &[usize], mut k: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        idx[axis] = k % shape[axis];
        k /= shape[axis];
    }
    idx
}

/// Joint grid `G(x, y) = sum of C(z) over f(z) = x, g(z) = y`.
pub fn joint_from_relabelings(c: &Observable, f: &RelabelMap, g: &RelabelMap) -> Result<JointCandidate> {
    for map in [f, g] {
        if map.source_size() != c.outcomes() {
            return Err(Error::RelabelMismatch(format!(
                "map has {} source outcomes, observable has {}",
                map.source_size(),
                c.outcomes()
            )));
        }
    }
    let (m, n) = (f.target_size(), g.target_size());
    let mut cells = vec![HermitianOperator::zeros(c.dim()); m * n];
    for (z, e) in c.effects.iter().enumerate() {
        cells[f.apply(z) * n + g.apply(z)].add_scaled(e, 1.0);
    }
    JointCandidate::from_cells(vec![m, n], cells)
}

/// Largest commutator norm over all effect pairs.
pub fn max_commutator_norm(a: &Observable, b: &Observable) -> Result<f64> {
    let mut worst = 0.0f64;
    for ea in a.effects() {
        for eb in b.effects() {
            worst = worst.max(ea.commutator_norm(eb)?);
        }
    }
    Ok(worst)
}

/// Product grid `G(x, y) = A(x) B(y)` of a commuting pair.
pub fn product_joint(a: &Observable, b: &Observable) -> Result<JointCandidate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let comm = max_commutator_norm(a, b)?;
    if comm > COMMUTE_TOL {
        return Err(Error::NonCommuting(comm));
    }
    let cells = a
        .effects()
        .iter()
        .flat_map(|ea| {
            b.effects()
                .iter()
                .map(move |eb| HermitianOperator::from_raw(ea.matrix() * eb.matrix()))
        })
        .collect();
    JointCandidate::from_cells(vec![a.outcomes(), b.outcomes()], cells)
}

/// Nested Jordan-product grid `1/2 {A1(x1), 1/2 {A2(x2), ...}}`; for a pair
/// this is `1/2 A(x) o B(y)`. Marginals always reproduce the inputs, cells
/// need not be positive.
pub fn jordan_grid(obs: &[Observable]) -> Result<JointCandidate> {
    let dim = obs.first().ok_or(Error::NoOutcomes)?.dim();
    if let Some(bad) = obs.iter().find(|o| o.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let shape: Vec<usize> = obs.iter().map(|o| o.outcomes()).collect();
    let n: usize = shape.iter().product();
    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        let idx = multi_index(&shape, k);
        let last = obs.len() - 1;
        let mut acc = obs[last].effect(idx[last]).clone();
        for axis in (0..last).rev() {
            acc = obs[axis].effect(idx[axis]).jordan_product(&acc)?;
        }
        cells.push(acc);
    }
    JointCandidate::from_cells(shape, cells)
}

/// Quick positivity summary used by certificate checks.
pub fn cells_psd(joint: &JointCandidate, tol: f64) -> bool {
    joint.cells().iter().all(|c| c.is_psd(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;

    fn sharp(k: usize) -> Observable {
        QubitDichotomic::from_parts(0.0, {
            let mut a = [0.0; 3];
            a[k - 1] = 1.0;
            a
        })
        .unwrap()
        .observable()
    }

    fn four_outcome() -> Observable {
        // a coarse qubit POVM: four scaled projectors onto +-x and +-z
        let e = |c: f64, v: [f64; 3]| qubit_operator(c, v);
        Observable::new(vec![
            e(0.25, [0.25, 0.0, 0.0]),
            e(0.25, [-0.25, 0.0, 0.0]),
            e(0.25, [0.0, 0.0, 0.25]),
            e(0.25, [0.0, 0.0, -0.25]),
        ])
        .unwrap()
    }

    #[test]
    fn observable_validation() {
        assert!(matches!(Observable::new(vec![]), Err(Error::NoOutcomes)));
        let bad = vec![pauli(3), HermitianOperator::identity(2) - pauli(3)];
        assert!(matches!(Observable::new(bad), Err(Error::NegativeEffect { index: 0, .. })));
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!(matches!(Observable::new(vec![half.clone()]), Err(Error::NotNormalized(_))));
        let zero = HermitianOperator::zeros(2);
        assert!(Observable::new(vec![half.clone(), half, zero]).is_ok());
    }

    #[test]
    fn qubit_observable_examples() {
        let z = sharp(3);
        assert!(z.effect(0).approx_eq(&HermitianOperator::basis_projector(2, 0), 1e-15));
        assert!(z.effect(1).approx_eq(&HermitianOperator::basis_projector(2, 1), 1e-15));
        let u = QubitDichotomic::from_parts(0.0, [0.0; 3]).unwrap().observable();
        for e in u.effects() {
            assert!(e.approx_eq(&HermitianOperator::identity(2).scale(0.5), 1e-15));
        }
        let q = QubitDichotomic::from_parts(0.2, [0.5, 0.0, 0.0]).unwrap().observable();
        assert!((q.effect(0).trace() - 1.2).abs() < 1e-15);
        assert!((q.effect(1).trace() - 0.8).abs() < 1e-15);
        assert!(Observable::new(q.effects().to_vec()).is_ok());
        assert!(QubitDichotomic::from_parts(0.6, [0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn qubit_parameters_round_trip() {
        let q = QubitDichotomic::from_parts(-0.1, [0.2, -0.3, 0.4]).unwrap();
        let back = QubitDichotomic::from_observable(&q.observable()).unwrap();
        assert!((back.bias - q.bias).abs() < 1e-14);
        for (x, y) in back.bloch.components().iter().zip(q.bloch.components()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn mixing_examples() {
        let z = sharp(3);
        let u = uniform_trivial(2, 2);
        assert!(mix_observables(&z, &u, 1.0).unwrap().approx_eq(&z, 0.0));
        assert!(mix_observables(&z, &z, 0.37).unwrap().approx_eq(&z, 1e-15));
        let t = 0.3;
        let want = QubitDichotomic::from_parts(0.0, [0.0, 0.0, t]).unwrap().observable();
        assert!(mix_observables(&z, &u, t).unwrap().approx_eq(&want, 1e-15));
        assert!(mix_observables(&z, &uniform_trivial(2, 3), 0.5).is_err());
        assert!(mix_observables(&z, &u, 1.5).is_err());
    }

    #[test]
    fn pair_mixing_examples() {
        let (x, y) = (sharp(1), sharp(2));
        let u = uniform_trivial(2, 2);
        let (a, b) = mix_pairs((&x, &y), (&u, &u), 0.0).unwrap();
        assert!(a.approx_eq(&u, 0.0) && b.approx_eq(&u, 0.0));
        let t = 0.6;
        let (a, b) = mix_pairs((&x, &y), (&u, &u), t).unwrap();
        let wa = QubitDichotomic::from_parts(0.0, [t, 0.0, 0.0]).unwrap().observable();
        let wb = QubitDichotomic::from_parts(0.0, [0.0, t, 0.0]).unwrap().observable();
        assert!(a.approx_eq(&wa, 1e-15) && b.approx_eq(&wb, 1e-15));
    }

    #[test]
    fn relabel_examples() {
        let c = four_outcome();
        assert!(relabel(&c, &RelabelMap::identity(4)).unwrap().approx_eq(&c, 0.0));
        let one = relabel(&c, &RelabelMap::constant(4)).unwrap();
        assert_eq!(one.outcomes(), 1);
        assert!(one.effect(0).approx_eq(&HermitianOperator::identity(2), 1e-15));
        let first = relabel(&c, &RelabelMap::coordinate(&[2, 2], 0)).unwrap();
        assert!(first.effect(0).approx_eq(&(c.effect(0) + c.effect(1)), 1e-15));
        assert!(first.effect(1).approx_eq(&(c.effect(2) + c.effect(3)), 1e-15));
        assert!(relabel(&c, &RelabelMap::identity(3)).is_err());
        // empty preimage gives a zero effect
        let padded = relabel(&c, &RelabelMap::new(vec![0, 0, 2, 2], 3).unwrap()).unwrap();
        assert!(padded.effect(1).approx_eq(&HermitianOperator::zeros(2), 0.0));
    }

    #[test]
    fn joint_from_relabelings_examples() {
        let z = sharp(3);
        let g = joint_from_relabelings(&z, &RelabelMap::identity(2), &RelabelMap::identity(2)).unwrap();
        assert!(g.cell(&[0, 0]).approx_eq(z.effect(0), 0.0));
        assert!(g.cell(&[1, 1]).approx_eq(z.effect(1), 0.0));
        assert!(g.cell(&[0, 1]).approx_eq(&HermitianOperator::zeros(2), 0.0));
        let (a, b) = g.marginals().unwrap();
        assert!(a.approx_eq(&z, 0.0) && b.approx_eq(&z, 0.0));

        let c = four_outcome();
        let row = joint_from_relabelings(&c, &RelabelMap::constant(4), &RelabelMap::identity(4)).unwrap();
        assert_eq!(row.shape(), &[1, 4]);
        for y in 0..4 {
            assert!(row.cell(&[0, y]).approx_eq(c.effect(y), 0.0));
        }
        let grid = joint_from_relabelings(
            &c,
            &RelabelMap::coordinate(&[2, 2], 0),
            &RelabelMap::coordinate(&[2, 2], 1),
        )
        .unwrap();
        for z in 0..4 {
            assert!(grid.cells()[z].approx_eq(c.effect(z), 0.0));
        }
    }

    #[test]
    fn marginals_examples() {
        let u = JointCandidate::new(vec![2, 3], vec![HermitianOperator::identity(2).scale(1.0 / 6.0); 6]).unwrap();
        let (a, b) = u.marginals().unwrap();
        assert!(a.approx_eq(&uniform_trivial(2, 2), 1e-15));
        assert!(b.approx_eq(&uniform_trivial(2, 3), 1e-15));

        let bad = JointCandidate::new(
            vec![2, 2],
            vec![
                pauli(3).scale(0.1),
                HermitianOperator::identity(2).scale(0.5) - pauli(3).scale(0.1),
                HermitianOperator::zeros(2),
                HermitianOperator::identity(2).scale(0.5),
            ],
        )
        .unwrap();
        match bad.marginals() {
            Err(Error::NegativeCell { cell, .. }) => assert_eq!(cell, vec![0, 0]),
            other => panic!("expected a negative cell, got {other:?}"),
        }
    }

    #[test]
    fn trivial_examples() {
        let one = trivial(3, &ProbabilityVector::new(vec![1.0]).unwrap()).unwrap();
        assert!(one.effect(0).approx_eq(&HermitianOperator::identity(3), 0.0));
        let t = trivial(2, &ProbabilityVector::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert!(t.effect(0).approx_eq(&HermitianOperator::identity(2).scale(0.3), 0.0));
        assert!(t.effect(1).approx_eq(&HermitianOperator::identity(2).scale(0.7), 0.0));
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn product_joint_examples() {
        let z = sharp(3);
        let g = product_joint(&z, &z).unwrap();
        assert!(g.cell(&[0, 0]).approx_eq(z.effect(0), 1e-15));
        assert!(g.cell(&[0, 1]).approx_eq(&HermitianOperator::zeros(2), 1e-15));

        let u = uniform_trivial(2, 2);
        let q = QubitDichotomic::from_parts(0.1, [0.2, 0.3, 0.1]).unwrap().observable();
        let g = product_joint(&q, &u).unwrap();
        assert!(g.cell(&[1, 0]).approx_eq(&q.effect(1).scale(0.5), 1e-15));

        let a = Observable::new(vec![
            HermitianOperator::diagonal(&[0.2, 0.5, 1.0]),
            HermitianOperator::diagonal(&[0.8, 0.5, 0.0]),
        ])
        .unwrap();
        let b = Observable::new(vec![
            HermitianOperator::diagonal(&[0.1, 0.9, 0.4]),
            HermitianOperator::diagonal(&[0.9, 0.1, 0.6]),
        ])
        .unwrap();
        let g = product_joint(&a, &b).unwrap();
        assert!(g.cell(&[0, 1]).approx_eq(&HermitianOperator::diagonal(&[0.18, 0.05, 0.6]), 1e-15));
        let (ma, mb) = g.marginals().unwrap();
        assert!(ma.approx_eq(&a, 1e-15) && mb.approx_eq(&b, 1e-15));

        assert!(matches!(product_joint(&sharp(1), &sharp(2)), Err(Error::NonCommuting(_))));
    }

    #[test]
    fn jordan_grid_has_exact_marginals() {
        let obs = [sharp(1), sharp(2), sharp(3)];
        let g = jordan_grid(&obs).unwrap();
        assert_eq!(g.shape(), &[2, 2, 2]);
        assert!(g.marginal_residual(&obs) < 1e-15);
    }

    #[test]
    fn sharpness_detection() {
        assert!(sharp(2).is_sharp(1e-12));
        assert!(!uniform_trivial(2, 2).is_sharp(1e-12));
    }
}
