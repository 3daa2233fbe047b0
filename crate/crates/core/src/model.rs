//! Physical parameters and the optomechanical potential of the relative
//! vibration coordinate.
//!
//! Energies are measured in the same units as `omega`; with `omega = 1` they
//! are directly `E/Ω`. The coordinate `x` is the antisymmetric displacement in
//! units of `√2·u₀`.
//!
//! The complex potential is
//!
//! ```text
//! V(x) = Ω x²/2 − i Γ₀ s e^{iφ} e^{iηx},   s = ±1 for the |±⟩ excitation
//! ```
//!
//! which at `φ = π/2`, `s = +1` reduces to `Ω x²/2 + Γ₀ cos ηx + i Γ₀ sin ηx`.
//! The constant `−Ω/2 − iΓ₀` of the Hamiltonian is not part of `V`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Symmetric (`|+⟩`) or antisymmetric (`|−⟩`) single-atom excitation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" | "symmetric" => Ok(Branch::Plus),
            "minus" | "-" | "antisymmetric" => Ok(Branch::Minus),
            other => Err(format!("unknown branch `{other}` (expected plus or minus)")),
        }
    }
}

/// Whether the anti-Hermitian (dissipative) part of the Hamiltonian is kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Potential replaced by its real part, `−iΓ₀` dropped.
    #[default]
    Hermitian,
    /// Full non-Hermitian Hamiltonian.
    Full,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Hermitian => "hermitian",
            Mode::Full => "full",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hermitian" => Ok(Mode::Hermitian),
            "full" => Ok(Mode::Full),
            other => Err(format!("unknown mode `{other}` (expected hermitian or full)")),
        }
    }
}

/// Parameter set of the two-atom model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Vibration quantum Ω.
    pub omega: f64,
    /// Single-atom radiative decay rate Γ₀.
    pub gamma0: f64,
    /// Propagation phase φ = q|z₁ − z₂|, radians in `[0, 2π)`.
    pub phi: f64,
    /// Optomechanical coupling η = 2qu₀.
    pub eta: f64,
    pub branch: Branch,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            gamma0: 4.0,
            phi: FRAC_PI_2,
            eta: 2.0,
            branch: Branch::Plus,
        }
    }
}

impl ModelParams {
    /// Reference parameters (`Ω = 1`, `φ = π/2`, branch `+`) with the given
    /// `Γ₀` and `η`.
    pub fn reference(gamma0: f64, eta: f64) -> Self {
        Self {
            gamma0,
            eta,
            ..Self::default()
        }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let finite = [self.omega, self.gamma0, self.phi, self.eta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ParamError::NonFinite);
        }
        if self.omega <= 0.0 {
            return Err(ParamError::NonPositiveOmega(self.omega));
        }
        if self.gamma0 < 0.0 {
            return Err(ParamError::NegativeGamma0(self.gamma0));
        }
        if self.eta < 0.0 {
            return Err(ParamError::NegativeEta(self.eta));
        }
        if !(0.0..TAU).contains(&self.phi) {
            return Err(ParamError::PhiOutOfRange(self.phi));
        }
        Ok(())
    }

    /// `φ = π/2`, where the potential is 𝒫𝒯 symmetric and its real part is even.
    pub fn is_quarter_wave(&self) -> bool {
        (self.phi - FRAC_PI_2).abs() < 1e-12
    }

    /// Complex amplitude `c` of the coupling term, `V = Ωx²/2 + c e^{iηx}`.
    fn coupling(&self) -> C64 {
        // −i Γ₀ s e^{iφ}
        C64::new(0.0, -self.gamma0 * self.branch.sign()) * C64::from_polar(1.0, self.phi)
    }

    /// Full complex potential `V(x)`.
    pub fn potential_full(&self, x: f64) -> C64 {
        0.5 * self.omega * x * x + self.coupling() * C64::from_polar(1.0, self.eta * x)
    }

    /// Hermitian truncation `V'(x) = Re V(x)`.
    pub fn potential_hermitian(&self, x: f64) -> f64 {
        self.potential_full(x).re
    }

    /// `Im V(x)`.
    pub fn potential_imag(&self, x: f64) -> f64 {
        self.potential_full(x).im
    }

    /// `V'(x)` with its first and second derivatives.
    pub fn hermitian_derivatives(&self, x: f64) -> (f64, f64, f64) {
        // Re V = Ωx²/2 + Γ₀ s sin(φ + ηx)
        let g = self.gamma0 * self.branch.sign();
        let arg = self.phi + self.eta * x;
        let (s, c) = arg.sin_cos();
        (
            0.5 * self.omega * x * x + g * s,
            self.omega * x + g * self.eta * c,
            self.omega - g * self.eta * self.eta * s,
        )
    }

    /// Classical energy of the potential `V'` corresponding to an eigenvalue of
    /// the Hamiltonian, which carries the constant `−Ω/2`.
    pub fn classical_energy(&self, eigenvalue: f64) -> f64 {
        eigenvalue + 0.5 * self.omega
    }
}

/// Free-function form of [`ModelParams::potential_full`].
pub fn potential_full(x: f64, p: &ModelParams) -> C64 {
    p.potential_full(x)
}

/// Free-function form of [`ModelParams::potential_hermitian`].
pub fn potential_hermitian(x: f64, p: &ModelParams) -> f64 {
    p.potential_hermitian(x)
}

/// Complex eigenenergy, in units of Ω when `omega = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re, self.im)
    }
}

impl From<C64> for ComplexEnergy {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexEnergy> for C64 {
    fn from(e: ComplexEnergy) -> Self {
        e.to_c64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_value_is_gamma0() {
        for eta in [0.0, 0.7, 2.0, 5.5] {
            let p = ModelParams::reference(4.0, eta);
            let v = p.potential_full(0.0);
            assert!((v.re - 4.0).abs() < 1e-15);
            assert!(v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_is_shifted_parabola() {
        let p = ModelParams::reference(4.0, 0.0);
        for x in [-3.0, -0.5, 0.0, 1.25, 7.0] {
            let v = p.potential_full(x);
            assert!((v.re - (0.5 * x * x + 4.0)).abs() < 1e-13);
            assert!(v.im.abs() < 1e-15);
            assert_eq!(p.potential_hermitian(x), v.re);
        }
    }

    #[test]
    fn half_period_point() {
        let p = ModelParams::reference(4.0, 2.0);
        let v = p.potential_full(PI / 2.0);
        assert!((v.re - (PI * PI / 8.0 - 4.0)).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn hermitian_value_at_two() {
        // 2 + 4 cos 4, evaluated independently
        let p = ModelParams::reference(4.0, 2.0);
        let expected = 2.0 + 4.0 * 4.0f64.cos();
        assert!((p.potential_hermitian(2.0) - expected).abs() < 1e-14);
        assert!((expected - (-0.614_574_483_454_448)).abs() < 1e-12);
    }

    #[test]
    fn imaginary_part_is_gamma0_sin() {
        let p = ModelParams::reference(4.0, 2.0);
        for x in [-2.0, 0.3, 1.49, 4.43] {
            assert!((p.potential_imag(x) - 4.0 * (2.0 * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = ModelParams {
            phi: 1.1,
            branch: Branch::Minus,
            ..ModelParams::reference(3.0, 1.7)
        };
        let h = 1e-5;
        for x in [-2.3, 0.0, 0.8, 4.1] {
            let (v, d1, d2) = p.hermitian_derivatives(x);
            assert!((v - p.potential_hermitian(x)).abs() < 1e-13);
            let fd1 = (p.potential_hermitian(x + h) - p.potential_hermitian(x - h)) / (2.0 * h);
            let fd2 = (p.potential_hermitian(x + h) - 2.0 * v + p.potential_hermitian(x - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-7, "{d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-3, "{d2} vs {fd2}");
        }
    }

    #[test]
    fn validation_rejects_bad_params() {
        let ok = ModelParams::default();
        assert!(ok.validate().is_ok());
        assert!(ModelParams { omega: 0.0, ..ok }.validate().is_err());
        assert!(ModelParams { gamma0: -1.0, ..ok }.validate().is_err());
        assert!(ModelParams { eta: -0.1, ..ok }.validate().is_err());
        assert!(ModelParams { phi: TAU, ..ok }.validate().is_err());
        assert!(ModelParams { eta: f64::NAN, ..ok }.validate().is_err());
    }

    proptest! {
        #[test]
        fn pt_symmetry_at_quarter_wave(x in -20.0f64..20.0, eta in 0.0f64..6.0, g in 0.0f64..8.0) {
            let p = ModelParams::reference(g, eta);
            let lhs = p.potential_full(-x);
            let rhs = p.potential_full(x).conj();
            prop_assert!((lhs - rhs).norm() < 1e-14 * (p.omega + g) * (1.0 + x * x));
        }

        #[test]
        fn minus_branch_is_plus_branch_shifted_by_pi(x in -20.0f64..20.0, eta in 0.0f64..6.0, phi in 0.0f64..PI) {
            let minus = ModelParams { phi, branch: Branch::Minus, ..ModelParams::reference(4.0, eta) };
            let plus = ModelParams { phi: phi + PI, branch: Branch::Plus, ..minus };
            prop_assert!((minus.potential_full(x) - plus.potential_full(x)).norm() < 1e-12 * (1.0 + x * x));
        }

        #[test]
        fn hermitian_is_exact_real_part(x in -20.0f64..20.0, eta in 0.0f64..6.0, phi in 0.0f64..TAU) {
            let p = ModelParams { phi, ..ModelParams::reference(4.0, eta) };
            prop_assert_eq!(p.potential_hermitian(x), p.potential_full(x).re);
        }
    }
}
