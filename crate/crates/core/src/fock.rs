//! The vibrational Hamiltonian in a truncated phonon Fock basis.
//!
//! Independent of the real-space grid: the coupling `e^{iηx̂}` is built by
//! exponentiating the position matrix `X_{n,n+1} = √(n+1)/√2` in its own
//! eigenbasis. Used as an oracle for the finite-difference solver and to check
//! that the symmetric vibration mode decouples.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::FockError;
use crate::model::{ComplexEnergy, Mode, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockConfig {
    /// Number of retained phonon levels.
    pub n_max: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self { n_max: 200 }
    }
}

impl FockConfig {
    pub fn new(n_max: usize) -> Result<Self, FockError> {
        if n_max < 2 {
            return Err(FockError::Truncation(n_max));
        }
        Ok(Self { n_max })
    }

    /// Number of eigenvalues considered free of truncation error.
    pub fn reliable_count(&self) -> usize {
        self.n_max / 4
    }
}

/// `x̂ = (a + a†)/√2` in the first `n` Fock states.
pub fn position_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// `exp(iηA)` for a real symmetric `A`, through its spectral decomposition.
fn exp_i_symmetric(a: DMatrix<f64>, eta: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(a);
    let u = eig.eigenvectors.map(|v| C64::new(v, 0.0));
    let n = u.nrows();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, eta * eig.eigenvalues[i])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &u * phases * u.transpose()
}

/// Truncated displacement operator `exp(iηx̂)`.
pub fn displacement_matrix(eta: f64, cfg: &FockConfig) -> DMatrix<C64> {
    exp_i_symmetric(position_matrix(cfg.n_max), eta)
}

fn coupling(p: &ModelParams) -> C64 {
    C64::new(0.0, -p.gamma0 * p.branch.sign()) * C64::from_polar(1.0, p.phi)
}

/// Adds the coupling term built from the displacement `d` to `h`.
fn add_coupling(h: &mut DMatrix<C64>, d: &DMatrix<C64>, p: &ModelParams, mode: Mode) {
    let c = coupling(p);
    let n = h.nrows();
    match mode {
        Mode::Full => {
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] += c * d[(i, j)];
                }
                h[(i, i)] -= C64::new(0.0, p.gamma0);
            }
        }
        Mode::Hermitian => {
            // (cD + (cD)†)/2, assembled entrywise so the result is exactly Hermitian
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (c * d[(i, j)] + (c * d[(j, i)]).conj());
                    h[(i, j)] += v;
                    if i != j {
                        h[(j, i)] += v.conj();
                    }
                }
            }
        }
    }
}

/// Single-mode Hamiltonian of the relative vibration in the Fock basis.
pub fn build_fock_hamiltonian(p: &ModelParams, cfg: &FockConfig, mode: Mode) -> DMatrix<C64> {
    let n = cfg.n_max;
    let mut h = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(p.omega * i as f64, 0.0) } else { C64::new(0.0, 0.0) });
    add_coupling(&mut h, &displacement_matrix(p.eta, cfg), p, mode);
    h
}

/// Eigenvalues of a dense matrix ordered by real part, then imaginary part.
fn sorted_eigenvalues(h: DMatrix<C64>, mode: Mode) -> Vec<ComplexEnergy> {
    let mut values: Vec<C64> = match mode {
        Mode::Hermitian => SymmetricEigen::new(h).eigenvalues.iter().map(|&e| C64::new(e, 0.0)).collect(),
        Mode::Full => Schur::new(h).eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default(),
    };
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    values.into_iter().map(ComplexEnergy::from).collect()
}

/// Lowest `n_max/4` eigenvalues of the Fock-basis Hamiltonian.
pub fn fock_spectrum(p: &ModelParams, cfg: &FockConfig, mode: Mode) -> Vec<ComplexEnergy> {
    let mut values = sorted_eigenvalues(build_fock_hamiltonian(p, cfg, mode), mode);
    values.truncate(cfg.reliable_count());
    values
}

/// Greedy nearest-neighbour assignment of each value in `a` to a distinct
/// value in `b`, processed in the order of `a`. Returns `(i, j, |a_i − b_j|)`.
pub fn match_spectra(a: &[ComplexEnergy], b: &[ComplexEnergy]) -> Vec<(usize, usize, f64)> {
    let mut used = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len());
    for (i, ea) in a.iter().enumerate() {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, eb)| (j, (ea.to_c64() - eb.to_c64()).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((j, d)) = best {
            used[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

/// Largest deviation when the first `count` values of `a` are matched into the
/// first `count + 5` values of `b`.
pub fn max_spectral_deviation(a: &[ComplexEnergy], b: &[ComplexEnergy], count: usize) -> f64 {
    let a = &a[..count.min(a.len())];
    let b = &b[..(count + 5).min(b.len())];
    if b.len() < a.len() {
        return f64::INFINITY;
    }
    match_spectra(a, b).iter().map(|m| m.2).fold(0.0, f64::max)
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Two-mode Hamiltonian `Ω a_s†a_s + Ω a_d†a_d − iΓ₀(1 + s e^{iφ} e^{iηx̂_d})`
/// on the product basis `s ⊗ d`, with `x̂_d` exponentiated in the full product space.
pub fn two_mode_hamiltonian(p: &ModelParams, cfg: &FockConfig, mode: Mode) -> Result<DMatrix<C64>, FockError> {
    let n = cfg.n_max;
    if !(2..=30).contains(&n) {
        return Err(FockError::TwoModeTooLarge(n));
    }
    let eye = DMatrix::<C64>::identity(n, n);
    let number = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
    let x = position_matrix(n).map(|v| C64::new(v, 0.0));
    let x_d = kron(&eye, &x).map(|z| z.re);
    let mut h = (kron(&number, &eye) + kron(&eye, &number)) * C64::new(p.omega, 0.0);
    add_coupling(&mut h, &exp_i_symmetric(x_d, p.eta), p, mode);
    Ok(h)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub n_max: usize,
    /// Number of two-mode eigenvalues compared (lowest quarter by real part).
    pub compared: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

/// Compares the spectrum of a two-mode matrix against `{mΩ + E_d}`.
pub fn check_decoupling(
    two_mode: DMatrix<C64>,
    p: &ModelParams,
    cfg: &FockConfig,
    mode: Mode,
    tolerance: f64,
) -> Result<DecouplingReport, FockError> {
    let n = cfg.n_max;
    let d_sector = sorted_eigenvalues(build_fock_hamiltonian(p, cfg, mode), mode);
    let mut expected: Vec<ComplexEnergy> = (0..n)
        .flat_map(|m| {
            d_sector
                .iter()
                .map(move |e| ComplexEnergy::new(e.re + m as f64 * p.omega, e.im))
        })
        .collect();
    expected.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let actual = sorted_eigenvalues(two_mode, mode);
    let compared = (n * n) / 4;
    let max_deviation = match_spectra(&actual[..compared], &expected)
        .iter()
        .map(|m| m.2)
        .fold(0.0, f64::max);
    if !(max_deviation <= tolerance) {
        return Err(FockError::DecouplingViolation { max_deviation });
    }
    Ok(DecouplingReport {
        n_max: n,
        compared,
        max_deviation,
        tolerance,
    })
}

/// Verifies that the symmetric vibration mode only adds the ladder `mΩ`.
pub fn smode_decoupling_check(p: &ModelParams, cfg_small: &FockConfig) -> Result<DecouplingReport, FockError> {
    let h = two_mode_hamiltonian(p, cfg_small, Mode::Full)?;
    check_decoupling(h, p, cfg_small, Mode::Full, 1e-6 * (p.omega + p.gamma0))
}
