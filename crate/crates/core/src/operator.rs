//! Dense complex Hermitian operators on finite-dimensional Hilbert spaces.
//!
//! Everything in the crate is built from [`HermitianOperator`]: effects of
//! observables, cells of joint observables, density operators, Choi matrices.
//! Hermiticity is enforced once at construction; later algebra that is
//! Hermitian in exact arithmetic re-symmetrizes its result so rounding never
//! accumulates into a visible asymmetry.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest per-entry asymmetry `|m[i][j] - conj(m[j][i])|` accepted at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Default absolute tolerance on the minimum eigenvalue for positivity checks.
pub const PSD_TOL: f64 = 1e-9;
/// Minimum eigenvalue below which [`HermitianOperator::sqrt_psd`] refuses to clip.
pub const SQRT_CLIP_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Which factor of a bipartite space an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// A square complex matrix equal to its own adjoint.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator(dim={}) ", self.dim())?;
        f.debug_list()
            .entries(self.mat.row_iter().map(|row| {
                row.iter()
                    .map(|z| (z.re, z.im))
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(mut m: CMatrix) -> CMatrix {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

impl HermitianOperator {
    /// Validates `mat` and symmetrizes away asymmetry below [`HERMITICITY_TOL`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::Empty);
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
        }
        let asym = max_asymmetry(&mat);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self {
            mat: symmetrize(mat),
        })
    }

    /// For results that are Hermitian in exact arithmetic.
    pub(crate) fn from_raw(mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self {
            mat: symmetrize(mat),
        }
    }

    /// Builds from row-major rows of complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            mat: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    /// Rank-one projector onto the normalized span of `v`.
    pub fn projector(v: &[C64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if v.is_empty() || norm2 <= 0.0 {
            return Err(Error::InvalidParameter("projector onto the zero vector".into()));
        }
        let n = v.len();
        Ok(Self::from_raw(CMatrix::from_fn(n, n, |i, j| {
            v[i] * v[j].conj() / norm2
        })))
    }

    /// Basis projector `|i⟩⟨i|` in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut values = vec![0.0; dim];
        values[i] = 1.0;
        Self::diagonal(&values)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: &self.mat * C64::new(factor, 0.0),
        }
    }

    /// `self + factor * other`, in place.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add_scaled");
        let f = C64::new(factor, 0.0);
        self.mat.zip_apply(&other.mat, |a, b| *a += b * f);
    }

    /// `self + shift * 1`, in place.
    pub fn shift_diagonal(&mut self, shift: f64) {
        for i in 0..self.dim() {
            self.mat[(i, i)].re += shift;
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Real part of `tr[self * other]`, which is the full value for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner");
        self.mat
            .iter()
            .zip(other.mat.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest per-entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in max_abs_diff");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigh(&self) -> Spectrum {
        if self.dim() == 1 {
            return Spectrum {
                values: vec![self.mat[(0, 0)].re],
                vectors: CMatrix::identity(1, 1),
            };
        }
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Spectrum { values, vectors }
    }

    /// All eigenvalues, ascending.
    pub fn eigvals(&self) -> Vec<f64> {
        if let Some((lo, hi)) = self.qubit_eigvals() {
            return vec![lo, hi];
        }
        self.eigh().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigvals()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigvals().last().expect("dim >= 1")
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Bloch form `mu * 1 + n . sigma` of a 2x2 operator.
    fn qubit_form(&self) -> Option<(f64, [f64; 3])> {
        if self.dim() != 2 {
            return None;
        }
        let a = self.mat[(0, 0)].re;
        let c = self.mat[(1, 1)].re;
        let b = self.mat[(0, 1)];
        Some(((a + c) * 0.5, [b.re, -b.im, (a - c) * 0.5]))
    }

    fn qubit_eigvals(&self) -> Option<(f64, f64)> {
        let (mu, n) = self.qubit_form()?;
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        Some((mu - r, mu + r))
    }

    /// Projection onto `{X : X >= level * 1}` in Frobenius norm, together with
    /// the minimum eigenvalue of `self`.
    pub fn clip_below(&self, level: f64) -> (Self, f64) {
        if let Some((mu, n)) = self.qubit_form() {
            let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let lo = mu - r;
            if lo >= level {
                return (self.clone(), lo);
            }
            let hi = mu + r;
            if hi <= level || r == 0.0 {
                return (Self::identity(2).scale(level), lo);
            }
            let c = 0.5 * (hi + level);
            let k = 0.5 * (hi - level) / r;
            return (qubit_operator(c, [k * n[0], k * n[1], k * n[2]]), lo);
        }
        let spec = self.eigh();
        let lo = spec.values[0];
        if lo >= level {
            return (self.clone(), lo);
        }
        let mut out = self.mat.clone();
        let d = self.dim();
        for (k, &val) in spec.values.iter().enumerate() {
            if val >= level {
                break;
            }
            let lift = level - val;
            let v = spec.vectors.column(k);
            for i in 0..d {
                let vi = v[i] * lift;
                for j in 0..d {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        (Self::from_raw(out), lo)
    }

    /// Rebuilds `V diag(values) V^dagger`.
    pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> Self {
        let d = vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (k, &val) in values.iter().enumerate() {
            if val == 0.0 {
                continue;
            }
            let v = vectors.column(k);
            for i in 0..d {
                let vi = v[i] * val;
                for j in 0..d {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        Self::from_raw(out)
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let spec = self.eigh();
        let values: Vec<f64> = spec.values.iter().map(|&v| f(v)).collect();
        Self::from_spectrum(&values, &spec.vectors)
    }

    /// Positive square root; eigenvalues in `[-SQRT_CLIP_TOL, 0)` are clipped to zero.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let spec = self.eigh();
        if spec.values[0] < -SQRT_CLIP_TOL {
            return Err(Error::NotPsd(spec.values[0]));
        }
        let roots: Vec<f64> = spec.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        Ok(Self::from_spectrum(&roots, &spec.vectors))
    }

    /// Kronecker product, first factor major.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    fn check_bipartite(&self, dims: (usize, usize)) -> Result<()> {
        if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// Traces out the factor named by `side` of a `dims.0 x dims.1` bipartite operator.
    pub fn partial_trace(&self, dims: (usize, usize), side: Side) -> Result<Self> {
        self.check_bipartite(dims)?;
        let (da, db) = dims;
        let m = &self.mat;
        let out = match side {
            Side::Second => CMatrix::from_fn(da, da, |a, a2| {
                (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
            }),
            Side::First => CMatrix::from_fn(db, db, |b, b2| {
                (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
            }),
        };
        Ok(Self::from_raw(out))
    }

    /// Transposes the factor named by `side` of a bipartite operator.
    pub fn partial_transpose(&self, dims: (usize, usize), side: Side) -> Result<Self> {
        self.check_bipartite(dims)?;
        let (_, db) = dims;
        let m = &self.mat;
        let n = self.dim();
        let out = CMatrix::from_fn(n, n, |r, c| {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            match side {
                Side::Second => m[(a * db + b2, a2 * db + b)],
                Side::First => m[(a2 * db + b, a * db + b2)],
            }
        });
        Ok(Self::from_raw(out))
    }

    /// The Jordan product `(ab + ba) / 2`.
    pub fn jordan_product(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let ab = &self.mat * &other.mat;
        Ok(Self::from_raw((&ab + ab.adjoint()) * C64::new(0.5, 0.0)))
    }

    /// Spectral norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        let ab = &self.mat * &other.mat;
        // i[a, b] = i(ab - (ab)^dagger) is Hermitian with the same singular values.
        let comm = (&ab - ab.adjoint()) * C64::new(0.0, 1.0);
        let h = Self::from_raw(comm);
        let ev = h.eigvals();
        Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
    }

    /// `a * self * a^dagger` for a (not necessarily square) matrix `a`.
    pub fn conjugate_by(&self, a: &CMatrix) -> Result<Self> {
        if a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.ncols(),
            });
        }
        Ok(Self::from_raw(a * &self.mat * a.adjoint()))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigvals().iter().map(|v| v.abs()).sum()
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        HermitianOperator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in subtraction");
        HermitianOperator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: HermitianOperator) -> HermitianOperator {
        &self + &rhs
    }
}

impl Sub for HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: HermitianOperator) -> HermitianOperator {
        &self - &rhs
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Pauli matrices `sigma_1, sigma_2, sigma_3`.
pub fn pauli(k: usize) -> HermitianOperator {
    let i = C64::new(0.0, 1.0);
    let m = match k {
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index must be 1, 2 or 3"),
    };
    HermitianOperator { mat: m }
}

/// `c * 1 + v . sigma` on a qubit.
pub fn qubit_operator(c: f64, v: [f64; 3]) -> HermitianOperator {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c + v[2], 0.0),
            C64::new(v[0], -v[1]),
            C64::new(v[0], v[1]),
            C64::new(c - v[2], 0.0),
        ],
    );
    HermitianOperator { mat: m }
}

/// A real three-vector of norm at most one.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(components: [f64; 3]) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Bloch component".into()));
        }
        let v = Self(components);
        if v.norm() > 1.0 + Self::NORM_TOL {
            return Err(Error::InvalidBloch(v.norm()));
        }
        Ok(v)
    }

    pub fn zero() -> Self {
        Self([0.0; 3])
    }

    /// Unit vector along axis `k` (1, 2 or 3) scaled by `t`.
    pub fn axis(k: usize, t: f64) -> Result<Self> {
        let mut c = [0.0; 3];
        c[k - 1] = t;
        Self::new(c)
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(self.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(self.0, other.0)
    }

    /// `a . sigma`.
    pub fn dot_sigma(&self) -> HermitianOperator {
        qubit_operator(0.0, self.0)
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(c: [f64; 3]) -> Result<Self> {
        Self::new(c)
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.0
    }
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    dot3(v, v).sqrt()
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A positive semidefinite operator of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub const TRACE_TOL: f64 = 1e-9;

    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let lo = op.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(Error::NotPsd(lo));
        }
        Ok(Self { op })
    }

    /// Pure state `|v⟩⟨v|` after normalization.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Ok(Self {
            op: HermitianOperator::projector(v)?,
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Qubit state `(1 + r . sigma) / 2`.
    pub fn from_bloch(r: BlochVector) -> Self {
        let c = r.components();
        Self {
            op: qubit_operator(0.5, [0.5 * c[0], 0.5 * c[1], 0.5 * c[2]]),
        }
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::UnsupportedDimension(format!(
                "Bloch vector of a {}-dimensional state",
                self.dim()
            )));
        }
        Ok([1, 2, 3].map(|k| self.op.inner(&pauli(k))))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn purity(&self) -> f64 {
        self.op.inner(&self.op)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            op: self.op.tensor(&other.op),
        }
    }

    pub fn partial_trace(&self, dims: (usize, usize), side: Side) -> Result<Self> {
        Ok(Self {
            op: self.op.partial_trace(dims, side)?,
        })
    }

    /// Expectation `tr[self * effect]`.
    pub fn expectation(&self, effect: &HermitianOperator) -> f64 {
        self.op.inner(effect)
    }
}
