//! Projection machinery behind the margin problem
//!
//! ```text
//! maximize s  subject to  G(c) >= s 1 for every cell c,
//!                         sum_{c : c_i = x} G(c) = T_i(x) for every axis i, outcome x
//! ```
//!
//! optionally with free trivial-noise variables `p_i` entering the targets as
//! `T_i(x) = w A_i(x) + (1 - w) p_i(x) 1`, `p_i` a probability vector.
//!
//! Fixed-level feasibility is attacked by alternating projections between the
//! affine set of the marginal constraints and the product of shifted PSD
//! cones. Every affine iterate is a primal certificate (its smallest cell
//! eigenvalue bounds the optimum from below) and every gap vector between the
//! two sets yields a weak-duality upper bound, so verdicts outside the
//! decision band are certified both ways.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measurement::{multi_index, Observable};
use crate::operator::HermitianOperator;

use super::{Projection, SolverConfig};

/// Stored noise scalars below `-SCALAR_TOL` are not accepted in certificates.
const SCALAR_TOL: f64 = 1e-14;
/// Noise probabilities are stored as `NOISE_SCALE * p`. Making them cheap to
/// move in the projection metric speeds up alternating projections near the
/// robustness threshold by two orders of magnitude on qubit pairs.
const NOISE_SCALE: f64 = 0.01;

/// A grid of cells plus the free scalar variables (noise probabilities).
#[derive(Clone, Debug)]
pub(crate) struct Point {
    pub cells: Vec<HermitianOperator>,
    pub scalars: Vec<f64>,
}

impl Point {
    fn diff(&self, other: &Point) -> Point {
        Point {
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| a - b).collect(),
            scalars: self.scalars.iter().zip(&other.scalars).map(|(a, b)| a - b).collect(),
        }
    }

    fn add_assign(&mut self, other: &Point) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.add_scaled(b, 1.0);
        }
        for (a, b) in self.scalars.iter_mut().zip(&other.scalars) {
            *a += b;
        }
    }

    fn norm(&self) -> f64 {
        let cells: f64 = self.cells.iter().map(|c| c.inner(c)).sum();
        let scalars: f64 = self.scalars.iter().map(|v| v * v).sum();
        (cells + scalars).sqrt()
    }

    fn min_cell_eigenvalue(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    fn min_scalar(&self) -> f64 {
        self.scalars.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

struct FreeNoise {
    /// Offsets of each probability vector in the scalar block.
    offsets: Vec<usize>,
    kmat: DMatrix<f64>,
    rhs: DVector<f64>,
    /// `M^-1 K^T (K M^-1 K^T)^+`, the least-squares correction map.
    correction: DMatrix<f64>,
}

/// Marginal problem on a product outcome grid.
pub(crate) struct Problem {
    dim: usize,
    shape: Vec<usize>,
    strides: Vec<usize>,
    n_cells: usize,
    /// Full targets for fixed problems; traceless parts when noise is free.
    targets: Vec<Vec<HermitianOperator>>,
    /// Common sum of the targets of every axis (zero for the traceless part).
    total: HermitianOperator,
    noise: Option<FreeNoise>,
    /// Observables and weight of a free-noise problem, for reporting.
    noise_source: Option<(Vec<Observable>, f64)>,
}

impl Problem {
    /// Fixed targets; every axis must sum to the same operator.
    pub fn fixed(targets: Vec<Vec<HermitianOperator>>, grid_cap: usize) -> Result<Self> {
        let dim = targets
            .first()
            .and_then(|t| t.first())
            .ok_or(Error::NoOutcomes)?
            .dim();
        for t in targets.iter().flatten() {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
        }
        let shape: Vec<usize> = targets.iter().map(|t| t.len()).collect();
        if shape.contains(&0) {
            return Err(Error::NoOutcomes);
        }
        let n_cells = grid_size(&shape, grid_cap)?;
        let total = sum(dim, &targets[0]);
        for t in &targets[1..] {
            let dev = sum(dim, t).max_abs_diff(&total);
            if dev > 1e-9 {
                return Err(Error::ShapeMismatch(format!(
                    "marginal targets disagree on their total (deviation {dev:e})"
                )));
            }
        }
        Ok(Self {
            dim,
            strides: strides(&shape),
            shape,
            n_cells,
            targets,
            total,
            noise: None,
            noise_source: None,
        })
    }

    /// Targets `w A_i(x) + (1 - w) p_i(x) 1` with free probability vectors `p_i`.
    pub fn free_noise(obs: &[Observable], w: f64, grid_cap: usize) -> Result<Self> {
        let dim = obs.first().ok_or(Error::NoOutcomes)?.dim();
        let shape: Vec<usize> = obs.iter().map(|o| o.outcomes()).collect();
        let n_cells = grid_size(&shape, grid_cap)?;
        let d = dim as f64;
        let targets: Vec<Vec<HermitianOperator>> = obs
            .iter()
            .map(|o| {
                o.effects()
                    .iter()
                    .map(|e| {
                        let mut t = e.scale(w);
                        t.shift_diagonal(-w * e.trace() / d);
                        t
                    })
                    .collect()
            })
            .collect();

        let mut offsets = Vec::with_capacity(shape.len());
        let mut n_scalars = 0;
        for &m in &shape {
            offsets.push(n_scalars);
            n_scalars += m;
        }
        let n_vars = n_cells + n_scalars;
        let n_rows = n_scalars + shape.len();
        let st = strides(&shape);
        let mut kmat = DMatrix::<f64>::zeros(n_rows, n_vars);
        let mut rhs = DVector::<f64>::zeros(n_rows);
        for (axis, o) in obs.iter().enumerate() {
            for x in 0..shape[axis] {
                let row = offsets[axis] + x;
                kmat[(row, n_cells + offsets[axis] + x)] = -(1.0 - w) * d / NOISE_SCALE;
                rhs[row] = w * o.effect(x).trace();
            }
            let krow = n_scalars + axis;
            for x in 0..shape[axis] {
                kmat[(krow, n_cells + offsets[axis] + x)] = 1.0 / NOISE_SCALE;
            }
            rhs[krow] = 1.0;
        }
        for c in 0..n_cells {
            for axis in 0..shape.len() {
                let x = (c / st[axis]) % shape[axis];
                kmat[(offsets[axis] + x, c)] = 1.0;
            }
        }
        let minv = DVector::<f64>::from_fn(n_vars, |j, _| if j < n_cells { d } else { 1.0 });
        let kminv = DMatrix::<f64>::from_fn(n_rows, n_vars, |r, j| kmat[(r, j)] * minv[j]);
        let gram = &kminv * kmat.transpose();
        // the constraints are redundant, so the cutoff must scale with the matrix
        let cutoff = 1e-12 * gram.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n_rows as f64;
        let pinv = gram
            .pseudo_inverse(cutoff)
            .map_err(|e| Error::NoConvergence(format!("noise constraint system: {e}")))?;
        let correction = kminv.transpose() * pinv;

        Ok(Self {
            dim,
            strides: st,
            shape,
            n_cells,
            targets,
            total: HermitianOperator::zeros(dim),
            noise: Some(FreeNoise {
                offsets,
                kmat,
                rhs,
                correction,
            }),
            noise_source: Some((obs.to_vec(), w)),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn n_scalars(&self) -> usize {
        self.noise.as_ref().map_or(0, |_| self.shape.iter().sum())
    }

    /// Splits the scalar block into one probability vector per axis.
    pub fn noise_vectors(&self, pt: &Point) -> Option<Vec<Vec<f64>>> {
        let noise = self.noise.as_ref()?;
        Some(
            self.shape
                .iter()
                .zip(&noise.offsets)
                .map(|(&m, &off)| pt.scalars[off..off + m].iter().map(|v| v / NOISE_SCALE).collect())
                .collect(),
        )
    }

    /// The full marginal targets realised by `pt` (equal to the fixed targets
    /// when there is no free noise).
    pub fn realised_targets(&self, pt: &Point) -> Vec<Vec<HermitianOperator>> {
        match (&self.noise_source, self.noise_vectors(pt)) {
            (Some((obs, w)), Some(p)) => obs
                .iter()
                .zip(p)
                .map(|(o, pv)| {
                    o.effects()
                        .iter()
                        .zip(pv)
                        .map(|(e, px)| {
                            let mut t = e.scale(*w);
                            t.shift_diagonal((1.0 - w) * px);
                            t
                        })
                        .collect()
                })
                .collect(),
            _ => self.targets.clone(),
        }
    }

    /// Largest per-entry deviation of the grid's marginals from the targets.
    pub fn marginal_residual(&self, pt: &Point) -> f64 {
        let targets = self.realised_targets(pt);
        let mut worst = 0.0f64;
        for (axis, t) in targets.iter().enumerate() {
            let marg = self.marginals(&pt.cells, axis);
            for (m, e) in marg.iter().zip(t) {
                worst = worst.max(m.max_abs_diff(e));
            }
        }
        if let Some(p) = self.noise_vectors(pt) {
            for pv in p {
                worst = worst.max((pv.iter().sum::<f64>() - 1.0).abs());
            }
        }
        worst
    }

    fn marginals(&self, cells: &[HermitianOperator], axis: usize) -> Vec<HermitianOperator> {
        let mut out = vec![HermitianOperator::zeros(self.dim); self.shape[axis]];
        for (c, cell) in cells.iter().enumerate() {
            out[(c / self.strides[axis]) % self.shape[axis]].add_scaled(cell, 1.0);
        }
        out
    }

    /// Orthogonal correction of the cells onto prescribed marginals. The
    /// subtracted grid is additive over the axes, hence orthogonal to every
    /// grid with vanishing marginals.
    fn correct_cells(&self, cells: &mut [HermitianOperator], homogeneous: bool) {
        let k = self.shape.len() as f64;
        let n = self.n_cells as f64;
        let mut resid: Vec<Vec<HermitianOperator>> =
            (0..self.shape.len()).map(|axis| self.marginals(cells, axis)).collect();
        let mut excess = sum(self.dim, &resid[0]);
        if !homogeneous {
            excess.add_scaled(&self.total, -1.0);
            for (r, t) in resid.iter_mut().zip(&self.targets) {
                for (rx, tx) in r.iter_mut().zip(t) {
                    rx.add_scaled(tx, -1.0);
                }
            }
        }
        for (axis, r) in resid.iter_mut().enumerate() {
            let f = self.shape[axis] as f64 / n;
            for rx in r.iter_mut() {
                *rx = rx.scale(f);
            }
        }
        let excess = excess.scale((k - 1.0) / n);
        for (c, cell) in cells.iter_mut().enumerate() {
            for (axis, r) in resid.iter().enumerate() {
                cell.add_scaled(&r[(c / self.strides[axis]) % self.shape[axis]], -1.0);
            }
            cell.add_scaled(&excess, 1.0);
        }
    }

    /// Orthogonal projection onto the affine constraint set, or onto its
    /// linear part when `homogeneous`.
    pub fn project_affine(&self, pt: &mut Point, homogeneous: bool) {
        let Some(noise) = &self.noise else {
            self.correct_cells(&mut pt.cells, homogeneous);
            return;
        };
        let d = self.dim as f64;
        let n_vars = self.n_cells + pt.scalars.len();
        let mut z = DVector::<f64>::zeros(n_vars);
        for (c, cell) in pt.cells.iter_mut().enumerate() {
            let g = cell.trace();
            z[c] = g;
            cell.shift_diagonal(-g / d);
        }
        for (j, v) in pt.scalars.iter().enumerate() {
            z[self.n_cells + j] = *v;
        }
        self.correct_cells(&mut pt.cells, homogeneous);
        // a second pass removes the rounding left by the ill-conditioned system
        for _ in 0..2 {
            let mut r = &noise.kmat * &z;
            if !homogeneous {
                r -= &noise.rhs;
            }
            z -= &noise.correction * r;
        }
        for (c, cell) in pt.cells.iter_mut().enumerate() {
            cell.shift_diagonal(z[c] / d);
        }
        for (j, v) in pt.scalars.iter_mut().enumerate() {
            *v = z[self.n_cells + j];
        }
    }

    /// Projection onto `{cells >= level 1, scalars >= 0}` and the smallest cell
    /// eigenvalue of the input.
    fn project_cone(&self, pt: &Point, level: f64) -> (Point, f64) {
        let mut min_eig = f64::INFINITY;
        let cells = pt
            .cells
            .iter()
            .map(|c| {
                let (p, lo) = c.clip_below(level);
                min_eig = min_eig.min(lo);
                p
            })
            .collect();
        let scalars = pt.scalars.iter().map(|v| v.max(0.0)).collect();
        (Point { cells, scalars }, min_eig)
    }

    /// Weak-duality upper bound on the optimal level from a direction `u`
    /// (normally `P_cone(x) - x`) evaluated at an affine-feasible `x`.
    fn dual_bound(&self, x: &Point, u: &Point) -> Option<f64> {
        let mut kernel = u.clone();
        self.project_affine(&mut kernel, true);
        let mut s = u.diff(&kernel);
        let lo = s.min_cell_eigenvalue();
        if lo < 0.0 {
            for c in &mut s.cells {
                c.shift_diagonal(-lo);
            }
        }
        if let Some(noise) = &self.noise {
            for (axis, &off) in noise.offsets.iter().enumerate() {
                let block = &mut s.scalars[off..off + self.shape[axis]];
                let lo = block.iter().copied().fold(f64::INFINITY, f64::min);
                if lo < 0.0 {
                    block.iter_mut().for_each(|v| *v -= lo);
                }
            }
        }
        let den: f64 = s.cells.iter().map(|c| c.trace()).sum();
        if !(den > 1e-300) {
            return None;
        }
        let num: f64 = s.cells.iter().zip(&x.cells).map(|(a, b)| a.inner(b)).sum::<f64>()
            + s.scalars.iter().zip(&x.scalars).map(|(a, b)| a * b).sum::<f64>();
        Some(num / den)
    }

    /// Trivially valid upper bound on the optimal level.
    fn trivial_upper_bound(&self) -> f64 {
        let n = self.n_cells as f64;
        let trace_bound = self.total_trace() / (n * self.dim as f64);
        if self.noise.is_some() {
            return trace_bound;
        }
        let mut best = trace_bound;
        for (axis, t) in self.targets.iter().enumerate() {
            let f = self.shape[axis] as f64 / n;
            for tx in t {
                best = best.min(f * tx.min_eigenvalue());
            }
        }
        best
    }

    fn total_trace(&self) -> f64 {
        match &self.noise {
            Some(_) => self.dim as f64,
            None => self.total.trace(),
        }
    }

    /// Starting points: a nested Jordan product of the targets and the
    /// minimum-norm grid, both projected onto the affine set.
    fn seeds(&self) -> Vec<Point> {
        let n_scalars = self.n_scalars();
        let scale = if self.noise.is_some() { NOISE_SCALE } else { 1.0 };
        let uniform: Vec<f64> = self
            .shape
            .iter()
            .flat_map(|&m| std::iter::repeat_n(scale / m as f64, m))
            .collect();
        let mut seeds = Vec::new();

        let full_targets = match &self.noise_source {
            Some((obs, w)) => obs
                .iter()
                .map(|o| {
                    let m = o.outcomes() as f64;
                    o.effects()
                        .iter()
                        .map(|e| {
                            let mut t = e.scale(*w);
                            t.shift_diagonal((1.0 - w) / m);
                            t
                        })
                        .collect()
                })
                .collect(),
            None => self.targets.clone(),
        };
        let tau = self.total_trace() / self.dim as f64;
        if tau > 1e-12 {
            let k = self.shape.len();
            let scale = tau.powi(1 - k as i32);
            let cells = (0..self.n_cells)
                .map(|c| {
                    let idx = multi_index(&self.shape, c);
                    let mut acc = full_targets[k - 1][idx[k - 1]].clone();
                    for axis in (0..k - 1).rev() {
                        acc = full_targets[axis][idx[axis]]
                            .jordan_product(&acc)
                            .expect("targets share a dimension");
                    }
                    acc.scale(scale)
                })
                .collect();
            let mut pt = Point {
                cells,
                scalars: uniform.clone(),
            };
            self.project_affine(&mut pt, false);
            seeds.push(pt);
        }

        let mut pt = Point {
            cells: vec![HermitianOperator::zeros(self.dim); self.n_cells],
            scalars: if n_scalars > 0 { uniform } else { Vec::new() },
        };
        self.project_affine(&mut pt, false);
        seeds.push(pt);
        seeds
    }
}

fn sum(dim: usize, ops: &[HermitianOperator]) -> HermitianOperator {
    let mut total = HermitianOperator::zeros(dim);
    for op in ops {
        total.add_scaled(op, 1.0);
    }
    total
}

fn strides(shape: &[usize]) -> Vec<usize> {
    (0..shape.len()).map(|axis| shape[axis + 1..].iter().product()).collect()
}

fn grid_size(shape: &[usize], cap: usize) -> Result<usize> {
    let mut cells: usize = 1;
    for &m in shape {
        cells = cells.saturating_mul(m);
    }
    if cells > cap {
        return Err(Error::GridTooLarge { cells, cap });
    }
    Ok(cells)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ProbeOutcome {
    Accepted,
    Rejected { certified: bool },
    Exhausted,
}

/// Solver state shared across feasibility probes: the running primal
/// certificate and the certified/heuristic upper bounds.
pub(crate) struct Engine<'a> {
    pub problem: &'a Problem,
    cfg: &'a SolverConfig,
    current: Point,
    pub best: Point,
    pub lower: f64,
    /// Certified by a dual bound.
    pub upper_certified: f64,
    /// Includes levels rejected by the plateau or iteration heuristics.
    pub upper: f64,
    pub iterations: usize,
}

impl<'a> Engine<'a> {
    pub fn new(problem: &'a Problem, cfg: &'a SolverConfig) -> Self {
        let mut seeds = problem.seeds();
        let mut best_idx = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, s) in seeds.iter().enumerate() {
            let v = certificate_value(s);
            if v > best_val {
                best_val = v;
                best_idx = i;
            }
        }
        let best = seeds.swap_remove(best_idx);
        let ub = problem.trivial_upper_bound();
        Self {
            problem,
            cfg,
            current: best.clone(),
            best,
            lower: best_val,
            upper_certified: ub,
            upper: ub,
            iterations: 0,
        }
    }

    pub fn budget_left(&self) -> bool {
        self.iterations < self.cfg.max_total_iter
    }

    fn record(&mut self, x: &Point, min_eig: f64) {
        if min_eig > self.lower && x.min_scalar() >= -SCALAR_TOL {
            self.lower = min_eig;
            self.best = x.clone();
        }
    }

    /// Runs projections towards `target` until the certified lower bound
    /// reaches `accept` or the upper bound drops below `reject`.
    pub fn probe(&mut self, accept: f64, reject: f64, mut target: f64, budget: usize) -> ProbeOutcome {
        if self.lower >= accept {
            return ProbeOutcome::Accepted;
        }
        if self.upper_certified < reject {
            return ProbeOutcome::Rejected { certified: true };
        }
        let problem = self.problem;
        let mut x = std::mem::replace(&mut self.current, self.best.clone());
        let dykstra = self.cfg.projection == Projection::Dykstra;
        let mut increment: Option<Point> = None;
        let mut window_start = f64::INFINITY;
        let budget = budget.min(self.cfg.max_total_iter.saturating_sub(self.iterations));
        let mut outcome = ProbeOutcome::Exhausted;

        for it in 0..budget {
            self.iterations += 1;
            let (y_plain, min_eig) = problem.project_cone(&x, target);
            self.record(&x, min_eig);
            if self.lower >= accept {
                outcome = ProbeOutcome::Accepted;
                break;
            }
            let residual = y_plain.diff(&x).norm();
            if residual <= self.cfg.feasible_residual && min_eig >= accept - self.cfg.feasible_residual {
                // converged onto the cone within the residual tolerance
                outcome = ProbeOutcome::Accepted;
                if self.lower < accept {
                    self.lower = accept;
                    self.best = x.clone();
                }
                break;
            }
            if it % self.cfg.dual_every == 0 {
                if let Some(ub) = problem.dual_bound(&x, &y_plain.diff(&x)) {
                    self.upper_certified = self.upper_certified.min(ub);
                    self.upper = self.upper.min(ub);
                }
                if self.upper_certified < reject {
                    outcome = ProbeOutcome::Rejected { certified: true };
                    break;
                }
                if self.upper_certified < target {
                    target = 0.5 * (accept + self.upper_certified).max(accept);
                }
            }
            if it > 0 && it % self.cfg.plateau_window == 0 {
                if window_start.is_finite() && window_start - residual < self.cfg.plateau_rel * window_start {
                    outcome = ProbeOutcome::Rejected { certified: false };
                    break;
                }
                window_start = residual;
            } else if it == 0 {
                window_start = residual;
            }

            let y = if dykstra {
                let inc = increment.get_or_insert_with(|| zero_like(&x));
                let mut shifted = x.clone();
                shifted.add_assign(inc);
                let (y, _) = problem.project_cone(&shifted, target);
                *inc = shifted.diff(&y);
                y
            } else {
                y_plain
            };
            x = y;
            problem.project_affine(&mut x, false);
        }
        if let ProbeOutcome::Rejected { certified: false } | ProbeOutcome::Exhausted = outcome {
            // heuristic: treat the level as infeasible
            self.upper = self.upper.min(accept.max(self.lower));
        }
        self.current = x;
        outcome
    }
}

fn zero_like(pt: &Point) -> Point {
    Point {
        cells: vec![HermitianOperator::zeros(pt.cells[0].dim()); pt.cells.len()],
        scalars: vec![0.0; pt.scalars.len()],
    }
}

fn certificate_value(pt: &Point) -> f64 {
    if pt.min_scalar() < -SCALAR_TOL {
        return f64::NEG_INFINITY;
    }
    pt.min_cell_eigenvalue()
}
