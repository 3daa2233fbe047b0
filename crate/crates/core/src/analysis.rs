//! Classification of eigenstates, 𝒫𝒯-breaking detection and coupling sweeps.
//!
//! A state is localized when at least half of its density sits in one *site*:
//! a basin of `V'` between consecutive local maxima on the positive half-axis
//! together with its mirror image, excluding the central basin that contains
//! the origin. Its real energy must also lie no more than `Ω` above the lowest
//! barrier bounding the site. Site `j` is the basin of the side minimum that
//! appears at the threshold `η_j`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, SolveError};
use crate::fd::{self, Grid, SpectrumResult};
use crate::model::{ComplexEnergy, Mode, ModelParams};
use crate::quasi::{self, StationaryKind, ThresholdTable};

/// Minimum density fraction inside a site for a localized state.
pub const SITE_WEIGHT: f64 = 0.5;
/// Real-energy window for pairing, in units of Ω.
pub const PAIR_ENERGY_GAP: f64 = 0.1;
/// Maximum `∫|ρ_a(x) − ρ_b(−x)| dx` for two states to count as mirror partners.
pub const PAIR_MIRROR_DISTANCE: f64 = 0.5;

const ORIGIN_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub index: usize,
    pub energy: ComplexEnergy,
    pub centroid: f64,
    pub spread: f64,
    pub participation_ratio: f64,
    pub localized: bool,
    /// Site with the largest density fraction, if any site exists.
    pub site: Option<usize>,
    pub site_weight: f64,
    /// Density-weighted `|x|` inside the site.
    pub site_position: f64,
    pub pair_id: Option<usize>,
    pub pt_broken: bool,
}

/// Mirror-symmetric region `lo ≤ |x| < hi` (or its asymmetric generalization)
/// bounded by local maxima of `V'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub index: usize,
    /// Positive-side interval `[pos_lo, pos_hi)`.
    pub pos_lo: f64,
    pub pos_hi: f64,
    /// Negative-side interval `(neg_lo, neg_hi]`.
    pub neg_lo: f64,
    pub neg_hi: f64,
    /// Lowest value of `V'` on the maxima bounding the site.
    pub barrier: f64,
}

impl Site {
    pub fn contains(&self, x: f64) -> bool {
        (x >= self.pos_lo && x < self.pos_hi && x > 0.0) || (x > self.neg_lo && x <= self.neg_hi && x < 0.0)
    }
}

/// Sites of `V'`, ordered outward from the origin.
pub fn sites(p: &ModelParams) -> Vec<Site> {
    let points = quasi::minima_structure(p);
    let maxima: Vec<f64> = points
        .iter()
        .filter(|s| s.kind == StationaryKind::Maximum)
        .map(|s| s.x)
        .collect();
    let origin_is_max = maxima.iter().any(|x| x.abs() < ORIGIN_EPS);
    let pos: Vec<f64> = maxima.iter().copied().filter(|&x| x > ORIGIN_EPS).collect();
    // distances of the negative-side maxima from the origin, ascending
    let mut neg: Vec<f64> = maxima.iter().filter(|&&x| x < -ORIGIN_EPS).map(|x| -x).collect();
    neg.reverse();

    // interval [lo, hi) in |x| of basin j on one side; empty when the side has fewer basins
    let bounds = |side: &[f64], j: usize| -> (f64, f64) {
        if j > side.len() {
            return (f64::INFINITY, f64::INFINITY);
        }
        let lo = if j == 0 { 0.0 } else { side[j - 1] };
        (lo, side.get(j).copied().unwrap_or(f64::INFINITY))
    };
    let count = pos.len().max(neg.len()) + 1;
    let first = if origin_is_max { 0 } else { 1 };
    (first..count)
        .map(|j| {
            let (pos_lo, pos_hi) = bounds(&pos, j);
            let (abs_lo, abs_hi) = bounds(&neg, j);
            let mut barrier = f64::INFINITY;
            for x in [pos_lo, pos_hi, -abs_lo, -abs_hi] {
                if x.is_finite() && (x.abs() > ORIGIN_EPS || origin_is_max) {
                    barrier = barrier.min(p.potential_hermitian(x));
                }
            }
            Site {
                index: j,
                pos_lo,
                pos_hi,
                neg_lo: -abs_hi,
                neg_hi: -abs_lo,
                barrier,
            }
        })
        .collect()
}

fn mirror_distance(s: &SpectrumResult, a: usize, b: usize) -> f64 {
    let h = s.grid.spacing();
    let n = s.grid.n_points;
    let (va, vb) = (&s.eigenvectors[a], &s.eigenvectors[b]);
    (0..n)
        .map(|i| (va[i].norm_sqr() - vb[n - 1 - i].norm_sqr()).abs())
        .sum::<f64>()
        * h
}

/// Moments, site membership and pairing of every state.
pub fn classify_modes(s: &SpectrumResult, p: &ModelParams) -> Vec<ModeReport> {
    let h = s.grid.spacing();
    let xs = s.grid.points();
    let site_list = sites(p);

    let mut reports: Vec<ModeReport> = (0..s.len())
        .map(|index| {
            let rho = s.density(index);
            let mean: f64 = rho.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>() * h;
            let second: f64 = rho.iter().zip(&xs).map(|(r, x)| r * x * x).sum::<f64>() * h;
            let fourth: f64 = rho.iter().map(|r| r * r).sum::<f64>() * h;

            let mut best: Option<(usize, f64, f64)> = None;
            for site in &site_list {
                let (mut weight, mut moment) = (0.0, 0.0);
                for (r, &x) in rho.iter().zip(&xs) {
                    if site.contains(x) {
                        weight += r;
                        moment += r * x.abs();
                    }
                }
                weight *= h;
                moment *= h;
                if best.is_none_or(|b| weight > b.1) {
                    best = Some((site.index, weight, if weight > 0.0 { moment / weight } else { 0.0 }));
                }
            }
            let energy = s.eigenvalues[index];
            let localized = best.is_some_and(|(j, w, _)| {
                let site = site_list.iter().find(|st| st.index == j).unwrap();
                w >= SITE_WEIGHT && energy.re <= site.barrier + p.omega
            });
            ModeReport {
                index,
                energy,
                centroid: mean,
                spread: (second - mean * mean).max(0.0).sqrt(),
                participation_ratio: 1.0 / fourth,
                localized,
                site: best.map(|b| b.0),
                site_weight: best.map_or(0.0, |b| b.1),
                site_position: best.map_or(0.0, |b| b.2),
                pair_id: None,
                pt_broken: false,
            }
        })
        .collect();

    for site in &site_list {
        let members: Vec<usize> = reports
            .iter()
            .filter(|r| r.localized && r.site == Some(site.index))
            .map(|r| r.index)
            .collect();
        let mut i = 0;
        while i + 1 < members.len() {
            let (a, b) = (members[i], members[i + 1]);
            let close = (reports[a].energy.re - reports[b].energy.re).abs() < PAIR_ENERGY_GAP * p.omega;
            if close && mirror_distance(s, a, b) < PAIR_MIRROR_DISTANCE {
                reports[a].pair_id = Some(b);
                reports[b].pair_id = Some(a);
                i += 2;
            } else {
                i += 1;
            }
        }
    }
    reports
}

/// Pairs of localized states, `(lower index, higher index)`.
pub fn localized_pairs(reports: &[ModeReport]) -> Vec<(usize, usize)> {
    reports
        .iter()
        .filter_map(|r| r.pair_id.filter(|&q| q > r.index).map(|q| (r.index, q)))
        .collect()
}

/// Number of sites holding at least one localized state with `Re E` below `cap`.
pub fn occupied_sites(reports: &[ModeReport], cap: f64) -> usize {
    let mut found: Vec<usize> = reports
        .iter()
        .filter(|r| r.localized && r.energy.re < cap)
        .filter_map(|r| r.site)
        .collect();
    found.sort_unstable();
    found.dedup();
    found.len()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrokenPair {
    pub a: usize,
    pub b: usize,
    /// `E + iΓ₀` of each member.
    pub shifted_a: ComplexEnergy,
    pub shifted_b: ComplexEnergy,
    pub centroid_a: f64,
    pub centroid_b: f64,
    /// `max_i ||ψ_a(x_i)| − |ψ_b(−x_i)||`.
    pub mirror_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtReport {
    pub tol_im: f64,
    pub broken_pairs: Vec<BrokenPair>,
    /// States with `|Im(E + iΓ₀)| < tol_im`.
    pub unbroken: Vec<usize>,
    /// Complex states at the top of the window whose partner lies above it.
    pub exempt: Vec<usize>,
    /// Largest distance from a shifted eigenvalue to the nearest conjugate, over non-exempt states.
    pub max_conjugation_error: f64,
    /// Largest `||ψ(x)| − |ψ(−x)||` over unbroken states.
    pub max_unbroken_asymmetry: f64,
}

impl PtReport {
    pub fn is_broken(&self, index: usize) -> bool {
        self.broken_pairs.iter().any(|p| p.a == index || p.b == index)
    }
}

fn mirror_modulus_deviation(s: &SpectrumResult, a: usize, b: usize) -> f64 {
    let n = s.grid.n_points;
    let (va, vb) = (&s.eigenvectors[a], &s.eigenvectors[b]);
    (0..n)
        .map(|i| (va[i].norm() - vb[n - 1 - i].norm()).abs())
        .fold(0.0, f64::max)
}

/// Finds pairs of complex-conjugate eigenvalues of `H + iΓ₀` and checks that
/// their eigenfunctions are mirror images. `tol_im` defaults to `1e−4 Γ₀`.
pub fn detect_pt_breaking(s: &SpectrumResult, p: &ModelParams, tol_im: Option<f64>) -> Result<PtReport, AnalysisError> {
    const CONJUGATE_TOL: f64 = 1e-6;
    if s.mode != Mode::Full {
        return Err(AnalysisError::NotFullMode);
    }
    if !p.is_quarter_wave() {
        return Err(AnalysisError::NotQuarterWave(p.phi));
    }
    let tol_im = tol_im.unwrap_or(1e-4 * p.gamma0);
    let shifted: Vec<C64> = s.eigenvalues.iter().map(|e| e.to_c64() + C64::new(0.0, p.gamma0)).collect();
    let top = shifted.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    let nearest_conjugate = |i: usize, exclude_self: bool| -> Option<(usize, f64)> {
        shifted
            .iter()
            .enumerate()
            .filter(|(j, _)| !exclude_self || *j != i)
            .map(|(j, z)| (j, (shifted[i] - z.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    };

    let mut broken_pairs = Vec::new();
    let mut unbroken = Vec::new();
    let mut exempt = Vec::new();
    let mut max_conjugation_error: f64 = 0.0;
    for i in 0..shifted.len() {
        let z = shifted[i];
        let at_top = top - z.re < CONJUGATE_TOL;
        let closure = nearest_conjugate(i, false).map_or(f64::INFINITY, |m| m.1);
        if z.im.abs() <= tol_im {
            unbroken.push(i);
            max_conjugation_error = max_conjugation_error.max(closure);
            continue;
        }
        match nearest_conjugate(i, true) {
            Some((j, d)) if d < CONJUGATE_TOL => {
                max_conjugation_error = max_conjugation_error.max(d);
                if i < j {
                    let deviation = mirror_modulus_deviation(s, i, j);
                    if deviation >= 1e-3 {
                        return Err(AnalysisError::MirrorMismatch { a: i, b: j, deviation });
                    }
                    broken_pairs.push(BrokenPair {
                        a: i,
                        b: j,
                        shifted_a: z.into(),
                        shifted_b: shifted[j].into(),
                        centroid_a: s.centroid(i),
                        centroid_b: s.centroid(j),
                        mirror_deviation: deviation,
                    });
                }
            }
            _ if at_top => exempt.push(i),
            _ => return Err(AnalysisError::UnpairedComplexEigenvalue { index: i, im: z.im }),
        }
    }
    let max_unbroken_asymmetry = unbroken
        .iter()
        .map(|&i| mirror_modulus_deviation(s, i, i))
        .fold(0.0, f64::max);
    Ok(PtReport {
        tol_im,
        broken_pairs,
        unbroken,
        exempt,
        max_conjugation_error,
        max_unbroken_asymmetry,
    })
}

/// Classification plus 𝒫𝒯 flags where they apply.
pub fn analyze_spectrum(s: &SpectrumResult, p: &ModelParams) -> (Vec<ModeReport>, Option<Result<PtReport, AnalysisError>>) {
    let mut reports = classify_modes(s, p);
    let pt = (s.mode == Mode::Full && p.is_quarter_wave()).then(|| detect_pt_breaking(s, p, None));
    if let Some(Ok(report)) = &pt {
        for r in &mut reports {
            r.pt_broken = report.is_broken(r.index);
        }
    }
    (reports, pt)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub reports: Vec<ModeReport>,
    /// Solver or 𝒫𝒯-analysis failure at this coupling, if any.
    pub error: Option<String>,
}

impl SweepPoint {
    /// Real energies of the two lowest localized states of a site, when the
    /// site holds at least two.
    pub fn site_pair(&self, site: usize) -> Option<(f64, f64)> {
        let mut e = self
            .reports
            .iter()
            .filter(|r| r.localized && r.site == Some(site))
            .map(|r| r.energy.re);
        Some((e.next()?, e.next()?))
    }
}

/// Appearance of localized pairs in one site across the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAppearance {
    pub site: usize,
    /// Smallest swept η with a pair in the site.
    pub first_eta: f64,
    /// Smallest η from which the pair exists at every larger swept η; `None`
    /// when the pair is missing at the largest swept η.
    pub persistent_from: Option<f64>,
    /// Mean real energy of the pair at `first_eta`.
    pub first_energy: f64,
    pub threshold_eta: Option<f64>,
    pub threshold_energy: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub params: ModelParams,
    pub grid: Grid,
    pub mode: Mode,
    pub k: usize,
    pub points: Vec<SweepPoint>,
    pub thresholds: Option<ThresholdTable>,
}

impl SweepResult {
    pub fn etas(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.eta).collect()
    }

    /// Sub-sweep with `lo ≤ η ≤ hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> SweepResult {
        SweepResult {
            points: self
                .points
                .iter()
                .filter(|pt| pt.eta >= lo - 1e-12 && pt.eta <= hi + 1e-12)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    pub fn failures(&self) -> Vec<(f64, String)> {
        self.points
            .iter()
            .filter_map(|pt| pt.error.clone().map(|e| (pt.eta, e)))
            .collect()
    }

    pub fn appearances(&self) -> Vec<PairAppearance> {
        let max_site = self
            .points
            .iter()
            .flat_map(|pt| pt.reports.iter().filter_map(|r| r.site))
            .max();
        let Some(max_site) = max_site else {
            return Vec::new();
        };
        (0..=max_site)
            .filter_map(|site| {
                let present: Vec<Option<(f64, f64)>> = self.points.iter().map(|pt| pt.site_pair(site)).collect();
                let first = present.iter().position(|x| x.is_some())?;
                let last_missing = present.iter().rposition(|x| x.is_none());
                let persistent = match last_missing {
                    Some(m) if m + 1 < present.len() => Some(m + 1),
                    Some(_) => None,
                    None => Some(0),
                };
                let (e1, e2) = present[first].unwrap();
                let row = self.thresholds.as_ref().and_then(|t| t.rows.get(site));
                Some(PairAppearance {
                    site,
                    first_eta: self.points[first].eta,
                    persistent_from: persistent.map(|i| self.points[i].eta),
                    first_energy: 0.5 * (e1 + e2),
                    threshold_eta: row.map(|r| r.eta_n),
                    threshold_energy: row.map(|r| r.e_n),
                })
            })
            .collect()
    }
}

/// Solves at every η (in parallel), classifies the states and annotates thresholds.
/// Per-η failures are recorded without aborting the sweep.
pub fn sweep_eta(eta_list: &[f64], p: &ModelParams, grid: &Grid, mode: Mode, k: usize) -> Result<SweepResult, SolveError> {
    p.validate()?;
    let points: Vec<SweepPoint> = eta_list
        .par_iter()
        .map(|&eta| {
            let pe = p.with_eta(eta);
            match fd::solve(&pe, grid, mode, k) {
                Ok(s) => {
                    let (reports, pt) = analyze_spectrum(&s, &pe);
                    let error = match pt {
                        Some(Err(e)) => Some(format!("pt analysis: {e}")),
                        _ => None,
                    };
                    SweepPoint { eta, reports, error }
                }
                Err(e) => SweepPoint {
                    eta,
                    reports: Vec::new(),
                    error: Some(format!("solve: {e}")),
                },
            }
        })
        .collect();
    Ok(SweepResult {
        params: *p,
        grid: *grid,
        mode,
        k,
        points,
        thresholds: quasi::thresholds(p, 8).ok(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub eta: f64,
    /// Mean real energy of the pair.
    pub energy: f64,
    /// `a/η² + b` at this η.
    pub fitted: f64,
    /// Inflection-point estimate `Ē_n(η)` shifted to eigenvalue convention, when defined.
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackFit {
    pub site: usize,
    pub points: Vec<TrackPoint>,
    pub a: f64,
    pub b: f64,
    /// Root-mean-square fit residual divided by the mean energy magnitude.
    pub relative_residual: f64,
    /// Mean `|E + Ω/2 − Ē_n(η)|` over points where `Ē_n` is defined.
    pub mean_abs_deviation: f64,
}

/// Least-squares fit `E(η) = a/η² + b` of the pair in `site` over its existence range.
pub fn localized_energy_track(sweep: &SweepResult, site: usize) -> Result<TrackFit, AnalysisError> {
    let raw: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .filter_map(|pt| pt.site_pair(site).map(|(a, b)| (pt.eta, 0.5 * (a + b))))
        .collect();
    if raw.len() < 5 {
        return Err(AnalysisError::InsufficientTrack { points: raw.len() });
    }
    let n = raw.len() as f64;
    let (mut su, mut suu, mut se, mut sue) = (0.0, 0.0, 0.0, 0.0);
    for &(eta, e) in &raw {
        let u = 1.0 / (eta * eta);
        su += u;
        suu += u * u;
        se += e;
        sue += u * e;
    }
    let det = n * suu - su * su;
    let a = (n * sue - su * se) / det;
    let b = (se - a * su) / n;
    let p = &sweep.params;
    let points: Vec<TrackPoint> = raw
        .iter()
        .map(|&(eta, energy)| TrackPoint {
            eta,
            energy,
            fitted: a / (eta * eta) + b,
            reference: quasi::localized_energy(site, eta, &p.with_eta(eta))
                .ok()
                .map(|e| e - 0.5 * p.omega),
        })
        .collect();
    let rms = (points.iter().map(|t| (t.energy - t.fitted).powi(2)).sum::<f64>() / n).sqrt();
    let mean = (se / n).abs();
    let deviations: Vec<f64> = points
        .iter()
        .filter_map(|t| t.reference.map(|r| (t.energy - r).abs()))
        .collect();
    let mean_abs_deviation = if deviations.is_empty() {
        f64::NAN
    } else {
        deviations.iter().sum::<f64>() / deviations.len() as f64
    };
    Ok(TrackFit {
        site,
        points,
        a,
        b,
        relative_residual: rms / mean,
        mean_abs_deviation,
    })
}

/// Fits for every site that holds a pair at five or more swept couplings.
pub fn all_tracks(sweep: &SweepResult) -> Vec<TrackFit> {
    sweep
        .appearances()
        .iter()
        .filter_map(|ap| localized_energy_track(sweep, ap.site).ok())
        .collect()
}
