//! The five subcommands. Every command validates the whole configuration
//! before touching the output directory.

use std::io;

use optovib::analysis::{self, ModeReport, PtReport, SweepResult, TrackFit};
use optovib::fd::{self, SpectrumResult};
use optovib::quasi::{self, PhaseMap, RidgeKind, ThresholdTable};
use optovib::validate::{self, ValidationConfig, ValidationReport};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Format, RunConfig};
use crate::output::{num, opt_int, opt_num, OutputDir};
use crate::svg::Plot;

const THRESHOLD_COUNT: usize = 8;
/// Largest coupling in the fixed cross-oracle lattice of `validate`.
const ORACLE_MAX_ETA: f64 = 3.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{stage}: {message}")]
    Solver { stage: &'static str, message: String },
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
    #[error("{failed} of {total} validation checks failed")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Solver { .. } | CliError::Io(_) => 3,
        }
    }
}

fn solver<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Solver {
        stage,
        message: e.to_string(),
    }
}

fn bool_str(b: bool) -> String {
    b.to_string()
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_common()?;
    cfg.check_resolution(&[cfg.eta])?;
    if let Some(&i) = cfg.indices.iter().find(|&&i| i >= cfg.k) {
        return Err(ConfigError::Invalid(format!("eigenvector index {i} is not below k = {}", cfg.k)).into());
    }
    let p = cfg.params();
    let grid = cfg.grid().map_err(ConfigError::from)?;
    let s = fd::solve(&p, &grid, cfg.mode, cfg.k).map_err(solver("solve"))?;
    let (reports, pt) = analysis::analyze_spectrum(&s, &p);
    let pt = pt.transpose().map_err(solver("pt analysis"))?;

    let mut out = OutputDir::create(&cfg.out)?;
    let omega = p.omega;
    if cfg.wants(Format::Csv) {
        out.csv(
            "eigenvalues.csv",
            &["index", "re_E_over_omega", "im_E_over_omega", "centroid", "pr", "localized", "pair_id", "pt_broken"],
            reports.iter().map(|r| {
                vec![
                    r.index.to_string(),
                    num(r.energy.re / omega),
                    num(r.energy.im / omega),
                    num(r.centroid),
                    num(r.participation_ratio),
                    bool_str(r.localized),
                    opt_int(r.pair_id),
                    bool_str(r.pt_broken),
                ]
            }),
        )?;
        let densities: Vec<Vec<f64>> = cfg.indices.iter().map(|&i| s.density(i)).collect();
        let mut header = vec!["x".to_string()];
        header.extend(cfg.indices.iter().map(|i| format!("psi2_{i}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv(
            "eigenvectors.csv",
            &header,
            (0..grid.n_points).step_by(cfg.stride).map(|j| {
                let mut row = vec![num(grid.x(j))];
                row.extend(densities.iter().map(|d| num(d[j])));
                row
            }),
        )?;
        out.csv(
            "potential.csv",
            &["x", "re_V_over_omega", "im_V_over_omega"],
            (0..grid.n_points).step_by(cfg.stride).map(|j| {
                let v = p.potential_full(grid.x(j));
                vec![num(grid.x(j)), num(v.re / omega), num(v.im / omega)]
            }),
        )?;
    }
    if cfg.wants(Format::Json) {
        #[derive(Serialize)]
        struct Doc<'a> {
            spectrum: &'a SpectrumSummary,
            modes: &'a [ModeReport],
            pt: Option<&'a PtReport>,
        }
        let summary = SpectrumSummary::new(&s);
        out.json(
            "spectrum.json",
            &Doc {
                spectrum: &summary,
                modes: &reports,
                pt: pt.as_ref(),
            },
        )?;
    }
    if cfg.wants(Format::Svg) {
        out.text("spectrum.svg", &spectrum_svg(cfg, &s))?;
    }
    out.metadata("spectrum", cfg)?;
    Ok(())
}

/// Eigenvalues in units of Ω, without the eigenvectors.
#[derive(Serialize)]
struct SpectrumSummary {
    mode: optovib::Mode,
    x_max: f64,
    n_points: usize,
    re_e_over_omega: Vec<f64>,
    im_e_over_omega: Vec<f64>,
}

impl SpectrumSummary {
    fn new(s: &SpectrumResult) -> Self {
        let omega = s.params.omega;
        Self {
            mode: s.mode,
            x_max: s.grid.x_max,
            n_points: s.grid.n_points,
            re_e_over_omega: s.eigenvalues.iter().map(|e| e.re / omega).collect(),
            im_e_over_omega: s.eigenvalues.iter().map(|e| e.im / omega).collect(),
        }
    }
}

fn spectrum_svg(cfg: &RunConfig, s: &SpectrumResult) -> String {
    let p = &s.params;
    let omega = p.omega;
    let levels: Vec<f64> = s.eigenvalues.iter().map(|e| e.re / omega).collect();
    let lo = levels.first().copied().unwrap_or(0.0) - 2.0;
    let hi = levels.last().copied().unwrap_or(1.0) + 2.0;
    let x_lim = s.grid.x_max;
    let mut plot = Plot::new((-x_lim, x_lim), (lo, hi));
    let xs: Vec<usize> = (0..s.grid.n_points).step_by(cfg.stride).collect();
    let potential: Vec<(f64, f64)> = xs
        .iter()
        .map(|&j| {
            let x = s.grid.x(j);
            (x, p.potential_full(x).re / omega - 0.5)
        })
        .collect();
    plot.polyline(&potential, "green", 1.5);
    for &i in &cfg.indices {
        let d = s.density(i);
        let peak = d.iter().copied().fold(0.0, f64::max).max(1e-300);
        let line: Vec<(f64, f64)> = xs.iter().map(|&j| (s.grid.x(j), levels[i] + 0.8 * d[j] / peak)).collect();
        plot.polyline(&[(-x_lim, levels[i]), (x_lim, levels[i])], "gray", 0.5);
        plot.polyline(&line, "black", 1.0);
    }
    plot.finish("x", "E / Omega")
}

fn sweep_rows(sweep: &SweepResult) -> Vec<Vec<String>> {
    let omega = sweep.params.omega;
    sweep
        .points
        .iter()
        .flat_map(|pt| {
            pt.reports.iter().map(move |r| {
                vec![
                    num(pt.eta),
                    r.index.to_string(),
                    num(r.energy.re / omega),
                    num(r.energy.im / omega),
                    num(r.centroid),
                    num(r.participation_ratio),
                    bool_str(r.localized),
                    opt_int(r.pair_id),
                ]
            })
        })
        .collect()
}

fn threshold_rows(table: Option<&ThresholdTable>, omega: f64) -> Vec<Vec<String>> {
    table
        .map(|t| {
            t.rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.a_n),
                        num(r.eta_n),
                        num(r.e_n / omega),
                        num(r.approx_eta_n),
                        num(r.approx_e_n / omega),
                    ]
                })
                .collect()
        })
        .unwrap_or_default()
}

const THRESHOLD_HEADER: [&str; 6] = ["n", "A_n", "eta_n", "E_n", "approx_eta_n", "approx_E_n"];

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_common()?;
    let etas = cfg.etas()?;
    cfg.check_resolution(&etas)?;
    let p = cfg.params();
    let grid = cfg.grid().map_err(ConfigError::from)?;
    let result = analysis::sweep_eta(&etas, &p, &grid, cfg.mode, cfg.k).map_err(solver("sweep"))?;
    let tracks = analysis::all_tracks(&result);
    let omega = p.omega;

    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        out.csv(
            "sweep.csv",
            &["eta", "mode_index", "re_E", "im_E", "centroid", "pr", "localized", "pair_id"],
            sweep_rows(&result),
        )?;
        out.csv("thresholds.csv", &THRESHOLD_HEADER, threshold_rows(result.thresholds.as_ref(), omega))?;
        out.csv(
            "tracks.csv",
            &["n", "eta", "E", "fit_E", "Ebar_n"],
            tracks.iter().flat_map(|t| {
                t.points.iter().map(move |pt| {
                    vec![
                        t.site.to_string(),
                        num(pt.eta),
                        num(pt.energy / omega),
                        num(pt.fitted / omega),
                        opt_num(pt.reference.map(|r| r / omega)),
                    ]
                })
            }),
        )?;
        out.csv(
            "failures.csv",
            &["eta", "error"],
            result.failures().into_iter().map(|(eta, e)| vec![num(eta), e]),
        )?;
    }
    if cfg.wants(Format::Json) {
        #[derive(Serialize)]
        struct Doc<'a> {
            sweep: &'a SweepResult,
            appearances: Vec<analysis::PairAppearance>,
            tracks: &'a [TrackFit],
        }
        out.json(
            "sweep.json",
            &Doc {
                sweep: &result,
                appearances: result.appearances(),
                tracks: &tracks,
            },
        )?;
    }
    if cfg.wants(Format::Svg) {
        out.text("sweep.svg", &sweep_svg(&result, &tracks))?;
    }
    out.metadata("sweep", cfg)?;
    Ok(())
}

fn sweep_svg(result: &SweepResult, tracks: &[TrackFit]) -> String {
    let omega = result.params.omega;
    let etas = result.etas();
    let energies: Vec<f64> = result
        .points
        .iter()
        .flat_map(|pt| pt.reports.iter().map(|r| r.energy.re / omega))
        .collect();
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let mut plot = Plot::new(
        (etas.first().copied().unwrap_or(0.0), etas.last().copied().unwrap_or(1.0)),
        (lo, hi),
    );
    for pt in &result.points {
        for r in &pt.reports {
            let color = if r.localized { "red" } else { "black" };
            plot.marker(pt.eta, r.energy.re / omega, color, if r.localized { 2.0 } else { 1.2 });
        }
    }
    for t in tracks {
        let line: Vec<(f64, f64)> = t.points.iter().filter_map(|pt| pt.reference.map(|r| (pt.eta, r / omega))).collect();
        plot.polyline(&line, "blue", 1.5);
    }
    plot.finish("eta", "Re E / Omega")
}

pub fn phasemap(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_common()?;
    let (etas, energies) = cfg.lattice()?;
    let p = cfg.params();
    let omega = p.omega;
    let scaled: Vec<f64> = energies.iter().map(|e| e * omega).collect();
    let map = quasi::phase_map(&etas, &scaled, &p);

    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        let mut rows = Vec::with_capacity(etas.len() * energies.len());
        for (i, &eta) in etas.iter().enumerate() {
            for (j, &e) in energies.iter().enumerate() {
                let k = map.index(i, j);
                rows.push(vec![num(eta), num(e), num(map.values[k]), bool_str(map.masked[k])]);
            }
        }
        out.csv("phasemap.csv", &["eta", "E", "frac_n", "masked"], rows)?;
        out.csv(
            "ridges.csv",
            &["eta", "E", "kind", "jump"],
            map.ridges.iter().map(|r| {
                let kind = match r.kind {
                    RidgeKind::LevelCrossing => "level_crossing",
                    RidgeKind::BranchCut => "branch_cut",
                };
                vec![num(r.eta), num(r.energy / omega), kind.to_string(), num(r.jump)]
            }),
        )?;
    }
    if cfg.wants(Format::Json) {
        out.json("phasemap.json", &map)?;
    }
    if cfg.wants(Format::Svg) {
        out.text("heatmap.svg", &heatmap_svg(&map, &etas, &energies))?;
    }
    out.metadata("phasemap", cfg)?;
    Ok(())
}

fn heatmap_svg(map: &PhaseMap, etas: &[f64], energies: &[f64]) -> String {
    let step = |axis: &[f64]| (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    let (de, dy) = (step(etas), step(energies));
    let mut plot = Plot::new(
        (etas[0] - 0.5 * de, etas[etas.len() - 1] + 0.5 * de),
        (energies[0] - 0.5 * dy, energies[energies.len() - 1] + 0.5 * dy),
    );
    for (i, &eta) in etas.iter().enumerate() {
        for (j, &e) in energies.iter().enumerate() {
            if let Some(v) = map.value(i, j) {
                plot.cell(eta, e, de, dy, v);
            }
        }
    }
    plot.finish("eta", "E / Omega")
}

pub fn thresholds(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_common()?;
    let p = cfg.params();
    let table = quasi::thresholds(&p, THRESHOLD_COUNT).map_err(solver("thresholds"))?;
    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        out.csv("thresholds.csv", &THRESHOLD_HEADER, threshold_rows(Some(&table), p.omega))?;
    }
    if cfg.wants(Format::Json) {
        out.json("thresholds.json", &table)?;
    }
    out.metadata("thresholds", cfg)?;
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    cfg.validate_common()?;
    cfg.check_resolution(&[cfg.eta, ORACLE_MAX_ETA])?;
    let vcfg = ValidationConfig {
        params: cfg.params(),
        grid: cfg.grid().map_err(ConfigError::from)?,
        fock: cfg.fock()?,
        k: cfg.k,
    };
    let report = validate::run_all(&vcfg);
    let mut out = OutputDir::create(&cfg.out)?;
    out.json("validate.json", &report)?;
    out.metadata("validate", cfg)?;
    Ok(report)
}
