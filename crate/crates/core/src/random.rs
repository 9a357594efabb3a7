//! Seeded samplers for observables, states and channels.
//!
//! Random observables draw one Ginibre matrix `G_x` per outcome, set
//! `P_x = G_x G_x^dagger` and normalize the family as
//! `S^{-1/2} P_x S^{-1/2}` with `S = sum_x P_x`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::channel::{measure_and_prepare, Channel};
use crate::error::{Error, Result};
use crate::measurement::{Observable, QubitDichotomic};
use crate::operator::{BlochVector, CMatrix, DensityOperator, HermitianOperator, C64};

/// Reproducible generator used throughout the crate and the CLI.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

fn inverse_sqrt(s: &HermitianOperator) -> Result<HermitianOperator> {
    let min = s.min_eigenvalue();
    if !(min > 0.0) {
        return Err(Error::NotPsd(min));
    }
    Ok(s.map_spectrum(|v| 1.0 / v.sqrt()))
}

/// Normalizes positive operators `P_x` to the observable `S^{-1/2} P_x S^{-1/2}`.
fn normalize_family(parts: Vec<HermitianOperator>) -> Result<Observable> {
    let dim = parts[0].dim();
    let mut total = HermitianOperator::zeros(dim);
    for p in &parts {
        total.add_scaled(p, 1.0);
    }
    let root = inverse_sqrt(&total)?;
    let effects = parts
        .iter()
        .map(|p| p.conjugate_by(root.matrix()))
        .collect::<Result<Vec<_>>>()?;
    Observable::new(effects)
}

pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Observable> {
    if dim == 0 || outcomes == 0 {
        return Err(Error::Empty);
    }
    let parts = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, dim, dim);
            HermitianOperator::from_raw(&g * g.adjoint())
        })
        .collect();
    normalize_family(parts)
}

/// Projective observable whose effects project onto groups of columns of a
/// Haar unitary; every outcome gets at least one column.
pub fn random_sharp_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Observable> {
    if outcomes == 0 || outcomes > dim {
        return Err(Error::InvalidParameter(format!(
            "sharp observable with {outcomes} outcomes in dimension {dim}"
        )));
    }
    let u = haar_unitary(rng, dim);
    let mut label: Vec<usize> = (0..dim).map(|k| if k < outcomes { k } else { rng.gen_range(0..outcomes) }).collect();
    // shuffle so that the guaranteed columns are not always the first ones
    for i in (1..dim).rev() {
        let j = rng.gen_range(0..=i);
        label.swap(i, j);
    }
    let mut effects = vec![CMatrix::zeros(dim, dim); outcomes];
    for (k, &x) in label.iter().enumerate() {
        let col = u.column(k);
        effects[x] += col * col.adjoint();
    }
    Observable::new(effects.into_iter().map(HermitianOperator::from_raw).collect())
}

/// Hilbert-Schmidt random state `G G^dagger / tr`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<DensityOperator> {
    let g = ginibre(rng, dim, dim);
    let p = HermitianOperator::from_raw(&g * g.adjoint());
    let tr = p.trace();
    DensityOperator::new(p.scale(1.0 / tr))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<DensityOperator> {
    let g = ginibre(rng, dim, 1);
    let v: Vec<C64> = g.iter().copied().collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    DensityOperator::pure(&v.iter().map(|z| z / norm).collect::<Vec<_>>())
}

/// Uniform point of the ball of radius `radius`.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> BlochVector {
    let v: [f64; 3] = [0; 3].map(|_| rng.sample(StandardNormal));
    let n = crate::operator::norm3(v);
    let r = radius * rng.gen::<f64>().cbrt();
    BlochVector::new(v.map(|x| x / n * r)).expect("radius at most one")
}

pub fn random_unbiased_qubit<R: Rng + ?Sized>(rng: &mut R) -> QubitDichotomic {
    QubitDichotomic::unbiased(random_bloch(rng, 1.0))
}

/// Bloch vector uniform in the ball, bias uniform in the allowed interval.
pub fn random_qubit_dichotomic<R: Rng + ?Sized>(rng: &mut R) -> QubitDichotomic {
    let a = random_bloch(rng, 1.0);
    let room = 1.0 - a.norm();
    let bias = room * (2.0 * rng.gen::<f64>() - 1.0);
    QubitDichotomic::new(bias, a).expect("bias within range")
}

/// Channel with `rank` Ginibre Kraus operators normalized by `S^{-1/2}`,
/// `S = sum_k K^dagger K`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, rank: usize) -> Result<Channel> {
    if rank == 0 || rank * dim_out < dim_in {
        return Err(Error::InvalidParameter(format!(
            "{rank} Kraus operators of size {dim_out}x{dim_in} cannot be trace preserving"
        )));
    }
    let raw: Vec<CMatrix> = (0..rank).map(|_| ginibre(rng, dim_out, dim_in)).collect();
    let mut s = CMatrix::zeros(dim_in, dim_in);
    for k in &raw {
        s += k.adjoint() * k;
    }
    let root = inverse_sqrt(&HermitianOperator::from_raw(s))?;
    let kraus = raw.into_iter().map(|k| k * root.matrix()).collect();
    Channel::new(dim_in, dim_out, kraus)
}

pub fn random_measure_and_prepare<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    outcomes: usize,
) -> Result<Channel> {
    let m = random_observable(rng, dim_in, outcomes)?;
    let states = (0..outcomes)
        .map(|_| random_density(rng, dim_out))
        .collect::<Result<Vec<_>>>()?;
    measure_and_prepare(&m, &states)
}
