//! Finite-difference discretization of
//! `H = (Ω/2)(−d²/dx² − 1) − iΓ₀ + V(x)` on a symmetric uniform grid with
//! Dirichlet walls, and its lowest eigenpairs.
//!
//! The hermitian mode uses Sturm bisection with inverse iteration on the real
//! symmetric tridiagonal matrix. The full mode projects the non-Hermitian
//! matrix onto the lowest hermitian eigenvectors, diagonalizes the projection
//! densely and then refines every Ritz pair on the full tridiagonal matrix
//! with complex-symmetric Rayleigh quotient iteration.

use std::cmp::Ordering;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, SolveError};
use crate::model::{ComplexEnergy, Mode, ModelParams};
use crate::tridiag::{self, TridiagLu};

pub const DEFAULT_X_MAX: f64 = 15.0;
pub const DEFAULT_N_POINTS: usize = 100_001;

/// Energy margin between the top requested level and the wall potential.
const CONTAINMENT_MARGIN: f64 = 5.0;
/// Hermitian eigenvalues closer than this (in units of Ω) are solved as a cluster.
const CLUSTER_GAP: f64 = 1e-3;
/// Extra hermitian vectors in the projection basis of the full mode.
const RITZ_EXTRA: usize = 30;
/// Eigenvalues with real parts closer than this are ordered by imaginary part.
const TIE_TOLERANCE: f64 = 1e-9;

/// Uniform grid on `[−x_max, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x_min: -DEFAULT_X_MAX,
            x_max: DEFAULT_X_MAX,
            n_points: DEFAULT_N_POINTS,
        }
    }
}

impl Grid {
    pub fn new(x_max: f64, n_points: usize) -> Result<Self, GridError> {
        if !(x_max.is_finite() && x_max > 0.0) || n_points < 3 {
            return Err(GridError::Degenerate { x_max, n_points });
        }
        Ok(Self {
            x_min: -x_max,
            x_max,
            n_points,
        })
    }

    /// Grid with the given half-width and (approximately) the given spacing.
    pub fn with_spacing(x_max: f64, h: f64) -> Result<Self, GridError> {
        let intervals = (2.0 * x_max / h).round().max(2.0) as usize;
        Self::new(x_max, intervals + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Coordinate of point `i`; mirror points `i` and `n−1−i` are exact negatives.
    pub fn x(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.n_points - 1) as f64;
        (i as f64 - mid) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Largest spacing that keeps 20 points per period of `e^{iηx}`.
    pub fn max_spacing(eta: f64) -> f64 {
        std::f64::consts::TAU / (20.0 * eta.max(1.0))
    }

    pub fn check_resolution(&self, eta: f64) -> Result<(), GridError> {
        let h = self.spacing();
        let max_h = Self::max_spacing(eta);
        if h > max_h {
            return Err(GridError::GridTooCoarse { h, max_h });
        }
        Ok(())
    }

    /// Whether the harmonic wall at `x_max` lies at least 5Ω above `energy`.
    pub fn check_containment(&self, p: &ModelParams, energy: f64) -> Result<(), GridError> {
        if 0.5 * p.omega * self.x_max * self.x_max < energy + CONTAINMENT_MARGIN * p.omega {
            return Err(GridError::DomainTooSmall {
                x_max: self.x_max,
                energy,
            });
        }
        Ok(())
    }

    /// Containment check that can be made before solving: the `k`-th
    /// eigenvalue is at least `(k−1)Ω − Γ₀` because `V' ≥ Ωx²/2 − Γ₀`.
    pub fn check_window(&self, p: &ModelParams, k: usize) -> Result<(), GridError> {
        let bound = (k.saturating_sub(1)) as f64 * p.omega - p.gamma0;
        self.check_containment(p, bound)
    }
}

/// Complex symmetric tridiagonal matrix of the discretized Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub grid: Grid,
    pub params: ModelParams,
    pub mode: Mode,
    /// Diagonal `d_i = Ω/h² − Ω/2 + V(x_i) (− iΓ₀)`.
    pub diagonal: Vec<C64>,
    /// Constant off-diagonal `e = −Ω/(2h²)`.
    pub off_diagonal: f64,
    /// Non-kinetic part of the diagonal, `d_i − Ω/h²`.
    pub onsite: Vec<C64>,
}

impl HamiltonianMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn kinetic(&self) -> f64 {
        -self.off_diagonal
    }
}

pub fn build_hamiltonian(grid: &Grid, p: &ModelParams, mode: Mode) -> Result<HamiltonianMatrix, SolveError> {
    p.validate()?;
    grid.check_resolution(p.eta)?;
    let h = grid.spacing();
    let kinetic = p.omega / (2.0 * h * h);
    let onsite: Vec<C64> = grid
        .points()
        .into_iter()
        .map(|x| match mode {
            Mode::Hermitian => C64::new(p.potential_hermitian(x) - 0.5 * p.omega, 0.0),
            Mode::Full => p.potential_full(x) - C64::new(0.5 * p.omega, p.gamma0),
        })
        .collect();
    let diagonal = onsite.iter().map(|w| w + 2.0 * kinetic).collect();
    Ok(HamiltonianMatrix {
        grid: *grid,
        params: *p,
        mode,
        diagonal,
        off_diagonal: -kinetic,
        onsite,
    })
}

/// Lowest eigenpairs of a discretized Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<ComplexEnergy>,
    /// Grid vectors normalized to `Σ|ψ_i|² h = 1`, largest component real positive.
    pub eigenvectors: Vec<Vec<C64>>,
    pub grid: Grid,
    pub params: ModelParams,
    pub mode: Mode,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn density(&self, index: usize) -> Vec<f64> {
        self.eigenvectors[index].iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.re).collect()
    }

    pub fn centroid(&self, index: usize) -> f64 {
        let h = self.grid.spacing();
        self.eigenvectors[index]
            .iter()
            .enumerate()
            .map(|(i, z)| self.grid.x(i) * z.norm_sqr() * h)
            .sum()
    }
}

/// The `k` eigenpairs with smallest real part.
pub fn solve_spectrum(hm: &HamiltonianMatrix, k: usize) -> Result<SpectrumResult, SolveError> {
    hm.grid.check_window(&hm.params, k)?;
    let result = solve_unchecked(hm, k)?;
    if let Some(top) = result.eigenvalues.last() {
        hm.grid.check_containment(&hm.params, top.re)?;
    }
    Ok(result)
}

/// Builds and solves in one step.
pub fn solve(p: &ModelParams, grid: &Grid, mode: Mode, k: usize) -> Result<SpectrumResult, SolveError> {
    solve_spectrum(&build_hamiltonian(grid, p, mode)?, k)
}

fn residual_tolerance(e: f64) -> f64 {
    1e-6 * (1.0 + e.abs())
}

fn solve_unchecked(hm: &HamiltonianMatrix, k: usize) -> Result<SpectrumResult, SolveError> {
    let dim = hm.dimension();
    if k > dim {
        return Err(SolveError::TooManyRequested { k, dim });
    }
    let (values, vectors) = match hm.mode {
        Mode::Hermitian => solve_hermitian(hm, k)?,
        Mode::Full => solve_full(hm, k)?,
    };
    Ok(finish(hm, values, vectors))
}

fn solve_hermitian(hm: &HamiltonianMatrix, k: usize) -> Result<(Vec<C64>, Vec<Vec<C64>>), SolveError> {
    let w: Vec<f64> = hm.onsite.iter().map(|z| z.re).collect();
    let pairs = tridiag::symmetric_lowest(hm.kinetic(), &w, k, CLUSTER_GAP);
    for (index, (&r, &e)) in pairs.residuals.iter().zip(&pairs.values).enumerate() {
        if !(r <= residual_tolerance(e)) {
            return Err(SolveError::ConvergenceFailure { index });
        }
    }
    let values = pairs.values.iter().map(|&e| C64::new(e, 0.0)).collect();
    let vectors = pairs
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| C64::new(x, 0.0)).collect())
        .collect();
    Ok((values, vectors))
}

fn solve_full(hm: &HamiltonianMatrix, k: usize) -> Result<(Vec<C64>, Vec<Vec<C64>>), SolveError> {
    let n = hm.dimension();
    let kinetic = hm.kinetic();
    let w_re: Vec<f64> = hm.onsite.iter().map(|z| z.re).collect();
    let w_im: Vec<f64> = hm.onsite.iter().map(|z| z.im).collect();
    let m = (k + RITZ_EXTRA).min(n);
    let basis = tridiag::symmetric_lowest(kinetic, &w_re, m, CLUSTER_GAP);

    // projection M = diag(ε) + i Φᵀ diag(Im w) Φ
    let phi = DMatrix::from_fn(n, m, |i, j| basis.vectors[j][i]);
    let weighted = DMatrix::from_fn(n, m, |i, j| w_im[i] * phi[(i, j)]);
    let coupling = phi.transpose() * weighted;
    let proj = DMatrix::from_fn(m, m, |p, q| {
        let diag = if p == q { basis.values[p] } else { 0.0 };
        C64::new(diag, 0.5 * (coupling[(p, q)] + coupling[(q, p)]))
    });
    let schur = Schur::new(proj.clone());
    let ritz = schur.eigenvalues().ok_or(SolveError::ConvergenceFailure { index: 0 })?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ritz[a].re.total_cmp(&ritz[b].re));

    let onsite = &hm.onsite;
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(k);
    for (index, &r) in order.iter().take(k).enumerate() {
        let theta = ritz[r];
        let coef = small_eigenvector(&proj, theta);
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (j, c) in coef.iter().enumerate() {
            for (ui, &b) in u.iter_mut().zip(&basis.vectors[j]) {
                *ui += c * b;
            }
        }
        let (sigma, u) = refine_complex(kinetic, onsite, u, theta).ok_or(SolveError::ConvergenceFailure { index })?;
        values.push(sigma);
        vectors.push(u);
    }

    for a in 0..values.len() {
        for b in a + 1..values.len() {
            if (values[a] - values[b]).norm() < 1e-8 * (1.0 + values[a].norm()) {
                let overlap: f64 = vectors[a].iter().zip(&vectors[b]).map(|(x, y)| x.conj() * y).sum::<C64>().norm();
                if overlap > 0.5 {
                    return Err(SolveError::ConvergenceFailure { index: b });
                }
            }
        }
    }
    Ok((values, vectors))
}

/// Eigenvector of a small dense matrix for a known eigenvalue.
fn small_eigenvector(a: &DMatrix<C64>, theta: C64) -> Vec<C64> {
    let m = a.nrows();
    let shift = theta + C64::new(1e-10 * (1.0 + theta.norm()), 1e-10 * (1.0 + theta.norm()));
    let shifted = a - DMatrix::from_diagonal_element(m, m, shift);
    let lu = shifted.lu();
    let mut v = nalgebra::DVector::from_fn(m, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.3));
    for _ in 0..3 {
        if let Some(sol) = lu.solve(&v) {
            let norm = sol.norm();
            v = sol / C64::new(norm, 0.0);
        }
    }
    v.iter().copied().collect()
}

fn sym_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclid_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex-symmetric Rayleigh quotient iteration on the full tridiagonal matrix.
fn refine_complex(kinetic: f64, onsite: &[C64], mut u: Vec<C64>, start: C64) -> Option<(C64, Vec<C64>)> {
    let norm = euclid_norm(&u);
    u.iter_mut().for_each(|z| *z /= norm);
    let mut sigma = start;
    for iter in 0..40 {
        let quotient = tridiag::bilinear(kinetic, onsite, &u, &u) / sym_dot(&u, &u);
        if quotient.is_finite() {
            sigma = quotient;
        }
        let res = tridiag::residual(kinetic, onsite, &u, sigma);
        if res < 1e-9 * (1.0 + sigma.norm()) || (iter >= 2 && res < residual_tolerance(sigma.norm()) * 1e-2) {
            return Some((sigma, u));
        }
        let nudge = 8.0 * f64::EPSILON * (4.0 * kinetic + sigma.norm());
        let lu = TridiagLu::new(kinetic, onsite, sigma + C64::new(nudge, nudge));
        lu.solve_in_place(&mut u);
        let norm = euclid_norm(&u);
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        u.iter_mut().for_each(|z| *z /= norm);
    }
    let res = tridiag::residual(kinetic, onsite, &u, sigma);
    (res < residual_tolerance(sigma.norm())).then_some((sigma, u))
}

fn finish(hm: &HamiltonianMatrix, values: Vec<C64>, vectors: Vec<Vec<C64>>) -> SpectrumResult {
    let h = hm.grid.spacing();
    let scale = 1.0 / h.sqrt();
    let vectors: Vec<Vec<C64>> = vectors
        .into_iter()
        .map(|v| {
            let norm = euclid_norm(&v);
            let pivot = v
                .iter()
                .copied()
                .fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
            let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
            let factor = phase * (scale / norm);
            v.into_iter().map(|z| z * factor).collect()
        })
        .collect();

    let grid = hm.grid;
    let centroid = |v: &Vec<C64>| -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, z)| grid.x(i) * z.norm_sqr() * h)
            .sum()
    };
    let mut items: Vec<(C64, f64, Vec<C64>)> = values
        .into_iter()
        .zip(vectors)
        .map(|(e, v)| {
            let e = if hm.mode == Mode::Hermitian { C64::new(e.re, 0.0) } else { e };
            let c = centroid(&v);
            (e, c, v)
        })
        .collect();
    sort_spectrum(&mut items);

    SpectrumResult {
        eigenvalues: items.iter().map(|(e, _, _)| ComplexEnergy::from(*e)).collect(),
        eigenvectors: items.into_iter().map(|(_, _, v)| v).collect(),
        grid: hm.grid,
        params: hm.params,
        mode: hm.mode,
    }
}

/// Ascending real part; near-equal real parts ordered by imaginary part, then centroid.
fn sort_spectrum<V>(items: &mut [(C64, f64, V)]) {
    items.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    let mut start = 0;
    while start < items.len() {
        let mut end = start + 1;
        while end < items.len() && items[end].0.re - items[end - 1].0.re < TIE_TOLERANCE {
            end += 1;
        }
        items[start..end].sort_by(|a, b| match a.0.im.total_cmp(&b.0.im) {
            Ordering::Equal => a.1.total_cmp(&b.1),
            o => o,
        });
        start = end;
    }
}

/// Per-eigenvalue result of a grid refinement study.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub index: usize,
    /// Eigenvalues on the grids with spacing `h`, `h/2`, `h/4`.
    pub values: [ComplexEnergy; 3],
    /// Richardson estimate `|E(h/2) − E(h/4)|/3` of the error on the finest grid.
    pub richardson_error: f64,
    /// `|E(h/2) − E(h)| / |E(h/4) − E(h/2)|`, close to 4 for a second-order scheme.
    pub refinement_ratio: f64,
    /// Change of the eigenvalue when the domain grows by 2 on each side.
    pub domain_shift: f64,
    pub contained: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub params: ModelParams,
    pub mode: Mode,
    /// Finest grid of the study.
    pub grid: Grid,
    pub tolerance: f64,
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn unconverged(&self) -> Vec<usize> {
        self.entries.iter().filter(|e| !e.converged).map(|e| e.index).collect()
    }
}

/// Solves on grids with spacing `4h`, `2h`, `h` (where `h` belongs to `fine`)
/// and on a domain enlarged by 2, and flags eigenvalues not converged to `1e−4 Ω`.
pub fn convergence_study(p: &ModelParams, mode: Mode, k: usize, fine: &Grid) -> Result<ConvergenceReport, SolveError> {
    const TOLERANCE: f64 = 1e-4;
    let h = fine.spacing();
    let grids = [
        Grid::with_spacing(fine.x_max, 4.0 * h)?,
        Grid::with_spacing(fine.x_max, 2.0 * h)?,
        *fine,
    ];
    let wide = Grid::with_spacing(fine.x_max + 2.0, h)?;

    let solve_one = |g: &Grid| -> Result<SpectrumResult, SolveError> { solve_unchecked(&build_hamiltonian(g, p, mode)?, k) };
    let runs: Vec<SpectrumResult> = grids.iter().map(solve_one).collect::<Result<_, _>>()?;
    let wide_run = solve_one(&wide)?;

    let entries = (0..k.min(runs[2].len()))
        .map(|index| {
            let e: [C64; 3] = [
                runs[0].eigenvalues[index].to_c64(),
                runs[1].eigenvalues[index].to_c64(),
                runs[2].eigenvalues[index].to_c64(),
            ];
            let coarse_diff = (e[1] - e[0]).norm();
            let fine_diff = (e[2] - e[1]).norm();
            let richardson_error = fine_diff / 3.0;
            let refinement_ratio = if fine_diff > 0.0 { coarse_diff / fine_diff } else { f64::INFINITY };
            let domain_shift = (wide_run.eigenvalues[index].to_c64() - e[2]).norm();
            let contained = fine.check_containment(p, e[2].re).is_ok();
            ConvergenceEntry {
                index,
                values: [e[0].into(), e[1].into(), e[2].into()],
                richardson_error,
                refinement_ratio,
                domain_shift,
                contained,
                converged: contained && richardson_error < TOLERANCE && domain_shift < TOLERANCE,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        params: *p,
        mode,
        grid: *fine,
        tolerance: TOLERANCE,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_grid() -> Grid {
        Grid::new(12.0, 4801).unwrap()
    }

    #[test]
    fn grid_is_mirror_symmetric() {
        let g = Grid::new(15.0, 3001).unwrap();
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        for i in 0..g.n_points {
            assert_eq!(g.x(i), -g.x(g.n_points - 1 - i));
        }
        assert_eq!(g.x(0), -15.0);
        assert_eq!(g.x(1500), 0.0);
    }

    #[test]
    fn grid_invariants_are_enforced() {
        let coarse = Grid::new(15.0, 201).unwrap();
        let p = ModelParams::reference(4.0, 3.0);
        assert!(matches!(
            build_hamiltonian(&coarse, &p, Mode::Hermitian),
            Err(SolveError::Grid(GridError::GridTooCoarse { .. }))
        ));
        let narrow = Grid::new(5.0, 2001).unwrap();
        assert!(matches!(
            solve(&p, &narrow, Mode::Hermitian, 20),
            Err(SolveError::Grid(GridError::DomainTooSmall { .. }))
        ));
        assert!(Grid::new(0.0, 10).is_err());
        assert!(Grid::new(3.0, 2).is_err());
    }

    #[test]
    fn assembly_matches_definition() {
        let g = Grid::new(6.0, 601).unwrap();
        let p = ModelParams::reference(4.0, 2.0);
        let hm = build_hamiltonian(&g, &p, Mode::Full).unwrap();
        let h = g.spacing();
        assert!((hm.off_diagonal + 0.5 / (h * h)).abs() < 1e-9);
        for i in [0, 123, 300, 600] {
            let x = g.x(i);
            let expected = C64::new(1.0 / (h * h) - 0.5 + 0.5 * x * x + 4.0 * (2.0 * x).cos(), 4.0 * (2.0 * x).sin() - 4.0);
            assert!((hm.diagonal[i] - expected).norm() < 1e-8);
        }
        let herm = build_hamiltonian(&g, &p, Mode::Hermitian).unwrap();
        assert!(herm.diagonal.iter().all(|d| d.im == 0.0));
    }

    #[test]
    fn oscillator_ladder() {
        let p = ModelParams::reference(0.0, 0.0);
        let s = solve(&p, &small_grid(), Mode::Hermitian, 6).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            // second-order error (h²/24)<p⁴> stays below 1e-4 at h = 0.005
            assert!((e.re - n as f64).abs() < 1e-4, "E_{n} = {}", e.re);
            assert_eq!(e.im, 0.0);
        }
    }

    #[test]
    fn full_mode_shifts_ladder_by_loss() {
        let p = ModelParams::reference(4.0, 0.0);
        let h = solve(&p, &small_grid(), Mode::Hermitian, 6).unwrap();
        let f = solve(&p, &small_grid(), Mode::Full, 6).unwrap();
        for (a, b) in h.eigenvalues.iter().zip(&f.eigenvalues) {
            assert!((a.re - b.re).abs() < 1e-9);
            assert!((b.im + 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvectors_are_normalized_and_phase_fixed() {
        let p = ModelParams::reference(4.0, 2.0);
        let s = solve(&p, &small_grid(), Mode::Full, 8).unwrap();
        let h = s.grid.spacing();
        for v in &s.eigenvectors {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
            assert!((norm - 1.0).abs() < 1e-12);
            let pivot = v.iter().copied().fold(C64::new(0.0, 0.0), |b, z| if z.norm() > b.norm() { z } else { b });
            assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
        }
    }

    #[test]
    fn full_mode_eigenpairs_have_small_residual() {
        let p = ModelParams::reference(4.0, 2.0);
        let hm = build_hamiltonian(&small_grid(), &p, Mode::Full).unwrap();
        let s = solve_spectrum(&hm, 10).unwrap();
        for (e, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
            let r = tridiag::residual(hm.kinetic(), &hm.onsite, v, e.to_c64()) / euclid_norm(v);
            assert!(r < 1e-6, "residual {r}");
            assert!(e.im <= 1e-9 && e.im >= -8.0 - 1e-9);
        }
    }

    #[test]
    fn sorting_breaks_ties_by_imaginary_part_then_centroid() {
        let mut items = vec![
            (C64::new(1.0, -0.5), 0.0, 'a'),
            (C64::new(1.0 + 1e-12, -0.7), 0.0, 'b'),
            (C64::new(0.5, 0.0), 3.0, 'c'),
            (C64::new(2.0, -1.0), 1.0, 'd'),
            (C64::new(2.0, -1.0), -1.0, 'e'),
        ];
        sort_spectrum(&mut items);
        let order: String = items.iter().map(|t| t.2).collect();
        assert_eq!(order, "cbaed");
    }

    #[test]
    fn convergence_is_second_order_for_the_oscillator() {
        let p = ModelParams::reference(0.0, 0.0);
        let fine = Grid::new(10.0, 4001).unwrap();
        let report = convergence_study(&p, Mode::Hermitian, 10, &fine).unwrap();
        for e in report.entries.iter().skip(1) {
            assert!((3.5..=4.5).contains(&e.refinement_ratio), "ratio {} at {}", e.refinement_ratio, e.index);
        }
    }

    #[test]
    fn convergence_flags_uncontained_levels() {
        let p = ModelParams::reference(0.0, 0.0);
        let fine = Grid::new(4.0, 801).unwrap();
        let report = convergence_study(&p, Mode::Hermitian, 6, &fine).unwrap();
        assert!(report.entries[0].contained);
        assert!(!report.entries[5].contained && !report.entries[5].converged);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn pt_shifted_spectrum_is_conjugation_closed(eta in 0.3f64..3.0) {
            let p = ModelParams::reference(4.0, eta);
            let g = Grid::new(10.0, 4001).unwrap();
            let s = solve(&p, &g, Mode::Full, 8).unwrap();
            let shifted: Vec<C64> = s.eigenvalues.iter().map(|e| e.to_c64() + C64::new(0.0, 4.0)).collect();
            // the top of the window may lose its partner to the cut
            for (i, z) in shifted.iter().enumerate().take(6) {
                let best = shifted.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-8, "eigenvalue {} at eta {}: {}", i, eta, best);
            }
        }

        #[test]
        fn hermitian_states_have_zero_centroid(eta in 0.0f64..1.0, g0 in 0.0f64..4.0) {
            let p = ModelParams::reference(g0, eta);
            let s = solve(&p, &Grid::new(10.0, 4001).unwrap(), Mode::Hermitian, 6).unwrap();
            for i in 0..s.len() {
                prop_assert!(s.centroid(i).abs() < 1e-8);
            }
        }
    }
}
