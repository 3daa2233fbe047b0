//! Self-checks of the solvers: cross-oracle agreement, symmetric-mode
//! decoupling, grid convergence and the structural invariants of each module.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, occupied_sites};
use crate::fd::{self, Grid};
use crate::fock::{self, FockConfig};
use crate::model::{Branch, Mode, ModelParams};
use crate::quasi::{self, QuasiPotential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Parameters of the system-specific checks (the oracle lattice is fixed).
    pub params: ModelParams,
    pub grid: Grid,
    pub fock: FockConfig,
    pub k: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            grid: Grid::default(),
            fock: FockConfig::default(),
            k: 30,
        }
    }
}

fn check(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: metric <= tolerance,
        metric,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &str, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        metric: f64::INFINITY,
        tolerance,
        detail: detail.into(),
    }
}

/// Runs every check; individual solver failures become failed checks.
pub fn run_all(cfg: &ValidationConfig) -> ValidationReport {
    let checks: Vec<fn(&ValidationConfig) -> CheckResult> = vec![
        potential_symmetries,
        ladder_limits,
        second_order_accuracy,
        hermitian_parity,
        conjugation_closure,
        loss_bounds,
        convergence,
        oracle_equivalence,
        fock_truncation_stability,
        fock_hermitian_exact,
        smode_decoupling,
        free_phase_linearity,
        phase_monotonicity,
        threshold_identities,
        minima_count,
        hermitian_full_regression,
        broken_pair_structure,
        localized_count,
    ];
    ValidationReport {
        checks: checks.iter().map(|c| c(cfg)).collect(),
    }
}

pub fn potential_symmetries(cfg: &ValidationConfig) -> CheckResult {
    let p = ModelParams {
        phi: FRAC_PI_2,
        branch: Branch::Plus,
        ..cfg.params
    };
    let scale = p.omega + p.gamma0;
    let mut worst: f64 = 0.0;
    for i in 0..=400 {
        let x = -20.0 + 0.1 * i as f64;
        // 𝒫𝒯 relation, relative to the local magnitude of the potential
        let pt = (p.potential_full(-x) - p.potential_full(x).conj()).norm() / (scale * (1.0 + x * x));
        let minus = ModelParams {
            branch: Branch::Minus,
            phi: 0.3,
            ..p
        };
        let plus = ModelParams {
            branch: Branch::Plus,
            phi: 0.3 + PI,
            ..p
        };
        let branch = (minus.potential_full(x) - plus.potential_full(x)).norm() / (scale * (1.0 + x * x));
        let exact = if p.potential_hermitian(x) == p.potential_full(x).re { 0.0 } else { 1.0 };
        worst = worst.max(pt).max(branch * 1e-2).max(exact);
    }
    check("potential_symmetries", worst, 1e-14, "PT relation, branch sign absorption, exact real part")
}

pub fn ladder_limits(cfg: &ValidationConfig) -> CheckResult {
    let cases = [
        (ModelParams::reference(0.0, 0.0), Mode::Hermitian, C64::new(0.0, 0.0)),
        (ModelParams::reference(4.0, 0.0), Mode::Hermitian, C64::new(4.0, 0.0)),
        (ModelParams::reference(4.0, 0.0), Mode::Full, C64::new(4.0, -4.0)),
    ];
    let mut worst: f64 = 0.0;
    for (p, mode, offset) in cases {
        match fd::solve(&p, &cfg.grid, mode, 10) {
            Ok(s) => {
                for (n, e) in s.eigenvalues.iter().enumerate() {
                    worst = worst.max((e.to_c64() - offset - n as f64).norm());
                }
            }
            Err(e) => return failed("ladder_limits", 1e-6, format!("solve: {e}")),
        }
    }
    check("ladder_limits", worst, 1e-6, "lowest 10 levels of the zero-coupling ladders")
}

pub fn second_order_accuracy(_: &ValidationConfig) -> CheckResult {
    let p = ModelParams::reference(0.0, 0.0);
    let solve = |n| fd::solve(&p, &Grid::new(12.0, n).unwrap(), Mode::Hermitian, 11);
    let (Ok(a), Ok(b)) = (solve(1201), solve(2401)) else {
        return failed("second_order_accuracy", 0.5, "solve failed");
    };
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let ratio = (a.eigenvalues[n].re - n as f64) / (b.eigenvalues[n].re - n as f64);
        worst = worst.max((ratio - 4.0).abs());
    }
    check("second_order_accuracy", worst, 0.5, "error ratio under h-halving stays within 4 ± 0.5")
}

pub fn hermitian_parity(cfg: &ValidationConfig) -> CheckResult {
    let s = match fd::solve(&ModelParams { phi: FRAC_PI_2, ..cfg.params }, &cfg.grid, Mode::Hermitian, cfg.k) {
        Ok(s) => s,
        Err(e) => return failed("hermitian_parity", 1e-8, format!("solve: {e}")),
    };
    let re = s.real_parts();
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        let below = if i > 0 { re[i] - re[i - 1] } else { f64::INFINITY };
        let above = if i + 1 < re.len() { re[i + 1] - re[i] } else { f64::INFINITY };
        if below.min(above) > 1e-6 {
            worst = worst.max(s.centroid(i).abs());
        }
    }
    check("hermitian_parity", worst, 1e-8, "centroid of non-degenerate hermitian states")
}

pub fn conjugation_closure(cfg: &ValidationConfig) -> CheckResult {
    let p = ModelParams { phi: FRAC_PI_2, ..cfg.params };
    let report = fd::solve(&p, &cfg.grid, Mode::Full, cfg.k)
        .map_err(|e| e.to_string())
        .and_then(|s| analysis::detect_pt_breaking(&s, &p, None).map_err(|e| e.to_string()));
    match report {
        Ok(r) => check(
            "conjugation_closure",
            r.max_conjugation_error,
            1e-8,
            format!("{} broken pairs, {} exempt at window top", r.broken_pairs.len(), r.exempt.len()),
        ),
        Err(e) => failed("conjugation_closure", 1e-8, e),
    }
}

pub fn loss_bounds(cfg: &ValidationConfig) -> CheckResult {
    let p = cfg.params;
    match fd::solve(&p, &cfg.grid, Mode::Full, cfg.k) {
        Ok(s) => {
            let worst = s
                .eigenvalues
                .iter()
                .map(|e| (e.im).max(-2.0 * p.gamma0 - e.im).max(0.0))
                .fold(0.0, f64::max);
            check("loss_bounds", worst, 1e-9, "Im E within [-2 gamma0, 0]")
        }
        Err(e) => failed("loss_bounds", 1e-9, format!("solve: {e}")),
    }
}

pub fn convergence(cfg: &ValidationConfig) -> CheckResult {
    match fd::convergence_study(&cfg.params, Mode::Full, cfg.k, &cfg.grid) {
        Ok(r) => {
            let worst = r
                .entries
                .iter()
                .map(|e| if e.contained { e.richardson_error.max(e.domain_shift) } else { f64::INFINITY })
                .fold(0.0, f64::max);
            check(
                "convergence",
                worst,
                r.tolerance,
                format!("unconverged indices: {:?}", r.unconverged()),
            )
        }
        Err(e) => failed("convergence", 1e-4, format!("solve: {e}")),
    }
}

pub fn oracle_equivalence(cfg: &ValidationConfig) -> CheckResult {
    const COUNT: usize = 15;
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for gamma0 in [1.0, 4.0] {
        for eta in [0.0, 0.5, 1.0, 2.0, 3.0] {
            for mode in [Mode::Hermitian, Mode::Full] {
                let p = ModelParams::reference(gamma0, eta);
                let fd_values = match fd::solve(&p, &cfg.grid, mode, COUNT) {
                    Ok(s) => s.eigenvalues,
                    Err(e) => return failed("oracle_equivalence", 1e-3, format!("solve: {e}")),
                };
                let fock_values = fock::fock_spectrum(&p, &cfg.fock, mode);
                let dev = fock::max_spectral_deviation(&fd_values, &fock_values, COUNT);
                if dev > worst {
                    worst = dev;
                    at = format!("worst at gamma0={gamma0}, eta={eta}, {mode}");
                }
            }
        }
    }
    let mut detail = at;
    if worst > 1e-3 && cfg.fock.reliable_count() < COUNT + 5 {
        detail = format!(
            "{detail}; truncation: n_max = {} keeps only {} reliable levels, {} needed",
            cfg.fock.n_max,
            cfg.fock.reliable_count(),
            COUNT + 5
        );
    }
    check("oracle_equivalence", worst, 1e-3, detail)
}

pub fn fock_truncation_stability(_: &ValidationConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for eta in [1.0, 3.0] {
        let p = ModelParams::reference(4.0, eta);
        let a = fock::fock_spectrum(&p, &FockConfig { n_max: 150 }, Mode::Hermitian);
        let b = fock::fock_spectrum(&p, &FockConfig { n_max: 250 }, Mode::Hermitian);
        for i in 0..15 {
            worst = worst.max((a[i].re - b[i].re).abs());
        }
    }
    check("fock_truncation_stability", worst, 1e-6, "n_max 150 vs 250, lowest 15 levels")
}

pub fn fock_hermitian_exact(cfg: &ValidationConfig) -> CheckResult {
    let h = fock::build_fock_hamiltonian(&cfg.params, &FockConfig { n_max: 60 }, Mode::Hermitian);
    let dev = (h.clone() - h.adjoint()).norm();
    check("fock_hermitian_exact", dev, 0.0, "hermitian-mode Fock matrix equals its adjoint")
}

pub fn smode_decoupling(cfg: &ValidationConfig) -> CheckResult {
    let p = ModelParams { eta: 1.0, ..cfg.params };
    match fock::smode_decoupling_check(&p, &FockConfig { n_max: 20 }) {
        Ok(r) => check("smode_decoupling", r.max_deviation, r.tolerance, format!("{} levels compared", r.compared)),
        Err(e) => failed("smode_decoupling", 1e-6, e.to_string()),
    }
}

pub fn free_phase_linearity(_: &ValidationConfig) -> CheckResult {
    let p = ModelParams::reference(0.0, 1.0);
    let qp = QuasiPotential::new(&p);
    let worst = (0..=78)
        .map(|i| {
            let e = 1.0 + 0.5 * i as f64;
            qp.bs_phase(e).map_or(f64::INFINITY, |n| (n - (e - 0.5)).abs())
        })
        .fold(0.0, f64::max);
    check("free_phase_linearity", worst, 1e-6, "n(E) = E - 1/2 without coupling")
}

pub fn phase_monotonicity(cfg: &ValidationConfig) -> CheckResult {
    let mut violations = 0usize;
    for eta in [0.5, 1.0, 2.0, 3.0, 4.5] {
        let qp = QuasiPotential::new(&cfg.params.with_eta(eta));
        let mut prev: Option<(f64, usize)> = None;
        for i in 0..=450 {
            let e = -5.0 + 0.1 * i as f64;
            let cur = qp.phase_with_segment(e).ok();
            if let (Some((n0, s0)), Some((n1, s1))) = (prev, cur) {
                if s0 == s1 && n1 < n0 - 1e-9 {
                    violations += 1;
                }
            }
            prev = cur;
        }
    }
    check("phase_monotonicity", violations as f64, 0.0, "phase decreases between ridges")
}

pub fn threshold_identities(cfg: &ValidationConfig) -> CheckResult {
    let p = cfg.params;
    let table = match quasi::thresholds(&p, 6) {
        Ok(t) => t,
        Err(e) => return failed("threshold_identities", 1e-9, e.to_string()),
    };
    // each residual is measured in units of its own tolerance
    let mut worst: f64 = 0.0;
    for r in &table.rows {
        let defining = (p.gamma0 * r.eta_n * r.eta_n * r.a_n.cos() - p.omega).abs() / p.omega / 1e-12;
        let inflection = quasi::localized_energy(r.n, r.eta_n, &p)
            .map_or(f64::INFINITY, |e| ((e - r.e_n) / r.e_n).abs() / 1e-9);
        let root = if r.n > 0 { (r.a_n - quasi::approximate_tan_root(r.n)).abs() / 2e-3 } else { 0.0 };
        worst = worst.max(defining).max(inflection).max(root);
    }
    check(
        "threshold_identities",
        worst,
        1.0,
        "defining relation (1e-12), inflection energy at threshold (1e-9), root approximation (2e-3)",
    )
}

pub fn minima_count(cfg: &ValidationConfig) -> CheckResult {
    let p = cfg.params;
    let Ok(table) = quasi::thresholds(&p, 5) else {
        return failed("minima_count", 0.0, "thresholds need gamma0 > 0");
    };
    let mut mismatches = 0usize;
    for r in &table.rows {
        for (eta, expected) in [(r.eta_n - 1e-3, r.n), (r.eta_n + 1e-3, r.n + 1)] {
            let got = quasi::side_minima_pairs(&quasi::minima_structure(&p.with_eta(eta)));
            if got != expected {
                mismatches += 1;
            }
        }
    }
    check("minima_count", mismatches as f64, 0.0, "side minima pairs step at each threshold")
}

/// Real parts of both modes agree on unbroken spectra in the weak-loss regime.
pub fn hermitian_full_regression(cfg: &ValidationConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut used = Vec::new();
    for eta in [0.25, 0.5, 0.75, 1.0] {
        let p = ModelParams::reference(1.0, eta);
        let (Ok(h), Ok(f)) = (
            fd::solve(&p, &cfg.grid, Mode::Hermitian, 10),
            fd::solve(&p, &cfg.grid, Mode::Full, 10),
        ) else {
            return failed("hermitian_full_regression", 0.2, "solve failed");
        };
        match analysis::detect_pt_breaking(&f, &p, None) {
            Ok(r) if r.broken_pairs.is_empty() => {}
            _ => continue,
        }
        used.push(eta);
        for (a, b) in h.eigenvalues.iter().zip(&f.eigenvalues) {
            worst = worst.max((a.re - b.re).abs());
        }
    }
    if used.is_empty() {
        return failed("hermitian_full_regression", 0.2, "every eta point is PT-broken");
    }
    check(
        "hermitian_full_regression",
        worst,
        0.2,
        format!("real parts, lowest 10, gamma0 = 1, unbroken eta {used:?}"),
    )
}

pub fn broken_pair_structure(cfg: &ValidationConfig) -> CheckResult {
    let p = ModelParams::reference(4.0, 2.0);
    let report = fd::solve(&p, &cfg.grid, Mode::Full, cfg.k)
        .map_err(|e| e.to_string())
        .and_then(|s| analysis::detect_pt_breaking(&s, &p, None).map_err(|e| e.to_string()));
    match report {
        Ok(r) if !r.broken_pairs.is_empty() => {
            let worst = r
                .broken_pairs
                .iter()
                .map(|bp| {
                    let re = (bp.shifted_a.re - bp.shifted_b.re).abs() / 1e-3;
                    let im = (bp.shifted_a.im + bp.shifted_b.im).abs() / 1e-8;
                    re.max(im)
                })
                .fold(0.0, f64::max);
            check(
                "broken_pair_structure",
                worst,
                1.0,
                format!("{} pairs; |dRe| < 1e-3 and Im symmetric to 1e-8 (metric in units of tolerance)", r.broken_pairs.len()),
            )
        }
        Ok(_) => failed("broken_pair_structure", 1.0, "no broken pairs at eta = 2"),
        Err(e) => failed("broken_pair_structure", 1.0, e),
    }
}

pub fn localized_count(cfg: &ValidationConfig) -> CheckResult {
    let p = ModelParams::reference(4.0, 0.0);
    let table = quasi::thresholds(&p, 8).expect("gamma0 > 0");
    let mut mismatches = 0usize;
    let mut detail = Vec::new();
    for eta in [0.75, 1.6, 2.5] {
        let pe = p.with_eta(eta);
        match fd::solve(&pe, &cfg.grid, Mode::Hermitian, 45) {
            Ok(s) => {
                let got = occupied_sites(&analysis::classify_modes(&s, &pe), 40.0);
                let expected = table.crossed(eta);
                detail.push(format!("eta {eta}: {got}/{expected}"));
                if got != expected {
                    mismatches += 1;
                }
            }
            Err(e) => return failed("localized_count", 0.0, format!("solve: {e}")),
        }
    }
    check("localized_count", mismatches as f64, 0.0, detail.join(", "))
}
