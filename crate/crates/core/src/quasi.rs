//! Quasiclassical description of the hermitian potential `V'(x)`.
//!
//! Energies here are classical energies of `V'`; an eigenvalue `E` of the
//! Hamiltonian corresponds to the classical energy `E + Ω/2`
//! (see [`ModelParams::classical_energy`]).

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::QuasiError;
use crate::model::ModelParams;

/// Stationary points closer than this to the origin count as the origin.
const ORIGIN_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Inflection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub x: f64,
    /// `V'(x)`.
    pub value: f64,
    /// `d²V'/dx²` at the point.
    pub curvature: f64,
    pub kind: StationaryKind,
}

fn scan_step(eta: f64) -> f64 {
    if eta > 0.0 {
        0.01f64.min(PI / (50.0 * eta))
    } else {
        0.01
    }
}

/// Bisection of a bracketed sign change down to an interval of 1e−12.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Roots of `f` on `[a, b]` located by sign changes on a uniform scan.
fn scan_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    if f0 == 0.0 {
        roots.push(a);
    }
    for i in 1..=n {
        let x1 = if i == n { b } else { a + i as f64 * h };
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            roots.push(bisect(&f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Stationary points of `V'` (roots of `Ωx + Γ₀sη cos(φ + ηx)`), ascending in `x`.
///
/// All roots satisfy `|x| ≤ Γ₀η/Ω`, so the scan covers that interval plus a margin.
pub fn minima_structure(p: &ModelParams) -> Vec<StationaryPoint> {
    let reach = p.gamma0 * p.eta / p.omega + 0.1;
    let step = scan_step(p.eta).min(2e-3);
    let slope = |x: f64| p.hermitian_derivatives(x).1;
    let mut points: Vec<StationaryPoint> = scan_roots(slope, -reach, reach, step)
        .into_iter()
        .map(|x| {
            let (value, _, curvature) = p.hermitian_derivatives(x);
            let scale = p.omega + p.gamma0 * p.eta * p.eta;
            let kind = if curvature > 1e-9 * scale {
                StationaryKind::Minimum
            } else if curvature < -1e-9 * scale {
                StationaryKind::Maximum
            } else {
                StationaryKind::Inflection
            };
            StationaryPoint { x, value, curvature, kind }
        })
        .collect();
    points.dedup_by(|a, b| (a.x - b.x).abs() < 1e-10);
    points
}

/// Number of minima at `x > 0`, i.e. pairs of side minima when `φ = π/2`.
pub fn side_minima_pairs(points: &[StationaryPoint]) -> usize {
    points
        .iter()
        .filter(|s| s.kind == StationaryKind::Minimum && s.x > ORIGIN_EPS)
        .count()
}

/// `V'` together with its stationary points, reused across many energies.
#[derive(Clone, Debug)]
pub struct QuasiPotential {
    params: ModelParams,
    stationary: Vec<StationaryPoint>,
    minimum: f64,
    step: f64,
}

impl QuasiPotential {
    pub fn new(p: &ModelParams) -> Self {
        let stationary = minima_structure(p);
        let minimum = stationary
            .iter()
            .map(|s| s.value)
            .fold(f64::INFINITY, f64::min)
            .min(p.potential_hermitian(0.0));
        Self {
            params: *p,
            stationary,
            minimum,
            step: scan_step(p.eta),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn stationary_points(&self) -> &[StationaryPoint] {
        &self.stationary
    }

    pub fn global_minimum(&self) -> f64 {
        self.minimum
    }

    fn reach(&self, e: f64) -> f64 {
        (2.0 * (e + self.params.gamma0).max(0.0) / self.params.omega).sqrt() + 1.0
    }

    /// First root of `V' = E` met when walking away from the origin in
    /// direction `dir` (±1), or `None` if there is none.
    fn first_root(&self, e: f64, dir: f64) -> Option<f64> {
        let p = &self.params;
        let f = |x: f64| p.potential_hermitian(x) - e;
        let limit = self.reach(e);
        let n = (limit / self.step).ceil() as usize;
        let mut i0 = 0;
        let mut f0 = f(0.0);
        if f0 == 0.0 {
            i0 = 1;
            f0 = f(dir * self.step);
        }
        for i in i0 + 1..=n {
            let x1 = dir * i as f64 * self.step;
            let f1 = f(x1);
            if f1 == 0.0 {
                return Some(x1.abs());
            }
            if (f0 < 0.0) != (f1 < 0.0) {
                let x0 = dir * (i - 1) as f64 * self.step;
                return Some(bisect(f, x0, x1).abs());
            }
            f0 = f1;
        }
        None
    }

    fn check_region(&self, e: f64) -> Result<(), QuasiError> {
        if e < self.minimum {
            return Err(QuasiError::NoClassicalRegion {
                energy: e,
                minimum: self.minimum,
            });
        }
        Ok(())
    }

    /// Turning points nearest to the origin on either side, `(x_left, x_right)`
    /// with `x_left ≤ 0 ≤ x_right`. A side without a root contributes 0.
    pub fn turning_points(&self, e: f64) -> Result<(f64, f64), QuasiError> {
        self.check_region(e)?;
        let right = self.first_root(e, 1.0);
        let left = if self.params.is_quarter_wave() { right } else { self.first_root(e, -1.0) };
        match (left, right) {
            (None, None) => Err(QuasiError::NoClassicalRegion {
                energy: e,
                minimum: self.minimum,
            }),
            (l, r) => Ok((-l.unwrap_or(0.0), r.unwrap_or(0.0))),
        }
    }

    /// Smallest positive root of `V'(x) = E`.
    pub fn turning_point(&self, e: f64) -> Result<f64, QuasiError> {
        self.check_region(e)?;
        self.first_root(e, 1.0).ok_or(QuasiError::NoClassicalRegion {
            energy: e,
            minimum: self.minimum,
        })
    }

    /// Number of stationary points strictly between the origin and `x > 0`.
    pub fn segment_index(&self, x: f64) -> usize {
        self.stationary
            .iter()
            .filter(|s| s.x > ORIGIN_EPS && s.x < x)
            .count()
    }

    /// `(1/π)∫ √(max(0, 2(E − V')/Ω)) dx − 1/2` between the innermost turning points.
    pub fn bs_phase(&self, e: f64) -> Result<f64, QuasiError> {
        let (a, b) = self.turning_points(e)?;
        Ok(self.action(e, a, b) / PI - 0.5)
    }

    /// Bohr–Sommerfeld phase together with the segment index of the right turning point.
    pub fn phase_with_segment(&self, e: f64) -> Result<(f64, usize), QuasiError> {
        let (a, b) = self.turning_points(e)?;
        Ok((self.action(e, a, b) / PI - 0.5, self.segment_index(b)))
    }

    fn action(&self, e: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let p = self.params;
        let f = move |x: f64| p.potential_hermitian(x) - e;
        let mut cuts = vec![a];
        cuts.extend(scan_roots(f, a, b, self.step).into_iter().filter(|&x| x > a + 1e-12 && x < b - 1e-12));
        cuts.push(b);
        let momentum = move |x: f64| (2.0 * (e - p.potential_hermitian(x)) / p.omega).max(0.0).sqrt();
        cuts.windows(2)
            .filter(|w| w[1] > w[0] && f(0.5 * (w[0] + w[1])) < 0.0)
            .map(|w| quadrature::double_exponential::integrate(momentum, w[0], w[1], 1e-10).integral)
            .sum()
    }
}

/// Smallest positive root of `V'(x) = E`.
pub fn turning_point(e: f64, p: &ModelParams) -> Result<f64, QuasiError> {
    QuasiPotential::new(p).turning_point(e)
}

/// Bohr–Sommerfeld phase `n(E)` with the smallest-|x̃| turning-point rule.
pub fn bs_phase(e: f64, p: &ModelParams) -> Result<f64, QuasiError> {
    QuasiPotential::new(p).bs_phase(e)
}

/// Energies in `[e_lo, e_hi]` where the phase crosses an integer without a
/// change of turning-point segment, refined by bisection.
pub fn integer_crossings(p: &ModelParams, e_lo: f64, e_hi: f64, de: f64) -> Vec<f64> {
    let qp = QuasiPotential::new(p);
    let n = ((e_hi - e_lo) / de).ceil().max(1.0) as usize;
    let samples: Vec<(f64, Option<(f64, usize)>)> = (0..=n)
        .map(|i| {
            let e = e_lo + (e_hi - e_lo) * i as f64 / n as f64;
            (e, qp.phase_with_segment(e).ok())
        })
        .collect();
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let ((e0, Some((n0, s0))), (e1, Some((n1, s1)))) = (w[0], w[1]) else {
            continue;
        };
        if s0 != s1 || n0.floor() == n1.floor() {
            continue;
        }
        for k in (n0.floor() as i64 + 1)..=(n1.floor() as i64) {
            let target = k as f64;
            let g = |e: f64| qp.bs_phase(e).map(|v| v - target).unwrap_or(-1.0);
            out.push(bisect(g, e0, e1));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeKind {
    /// The phase passes an integer; these track the quantized levels.
    LevelCrossing,
    /// The innermost turning point jumps to another segment of `V'`.
    BranchCut,
}

/// Discontinuity of the fractional phase between two energy-adjacent cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub kind: RidgeKind,
    pub eta_index: usize,
    /// Index of the lower of the two cells.
    pub energy_index: usize,
    pub eta: f64,
    pub energy: f64,
    /// Change of the raw phase across the ridge.
    pub jump: f64,
}

/// Branch-cut ridges linked across neighbouring η columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCut {
    /// `(η, E)` points ordered by η.
    pub points: Vec<(f64, f64)>,
}

impl BranchCut {
    /// Point of smallest η, where the cut emerges.
    pub fn endpoint(&self) -> (f64, f64) {
        self.points[0]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseMap {
    pub eta_axis: Vec<f64>,
    pub energy_axis: Vec<f64>,
    /// Fractional phase `{n}` in `[0, 1)`, row-major by η; NaN where masked.
    pub values: Vec<f64>,
    /// Raw phase `n`, NaN where masked.
    pub raw: Vec<f64>,
    pub masked: Vec<bool>,
    /// Segment index of the innermost turning point.
    pub segment: Vec<usize>,
    pub ridges: Vec<Ridge>,
    pub branch_cuts: Vec<BranchCut>,
}

impl PhaseMap {
    pub fn index(&self, eta_index: usize, energy_index: usize) -> usize {
        eta_index * self.energy_axis.len() + energy_index
    }

    pub fn value(&self, eta_index: usize, energy_index: usize) -> Option<f64> {
        let i = self.index(eta_index, energy_index);
        (!self.masked[i]).then_some(self.values[i])
    }
}

fn fractional(n: f64) -> f64 {
    let f = n - n.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional Bohr–Sommerfeld phase on an `(η, E)` lattice with its ridges.
pub fn phase_map(eta_axis: &[f64], energy_axis: &[f64], p: &ModelParams) -> PhaseMap {
    let ne = energy_axis.len();
    let columns: Vec<Vec<Option<(f64, usize)>>> = eta_axis
        .par_iter()
        .map(|&eta| {
            let qp = QuasiPotential::new(&p.with_eta(eta));
            energy_axis.iter().map(|&e| qp.phase_with_segment(e).ok()).collect()
        })
        .collect();

    let mut values = Vec::with_capacity(eta_axis.len() * ne);
    let mut raw = Vec::with_capacity(eta_axis.len() * ne);
    let mut masked = Vec::with_capacity(eta_axis.len() * ne);
    let mut segment = Vec::with_capacity(eta_axis.len() * ne);
    for col in &columns {
        for cell in col {
            match cell {
                Some((n, s)) => {
                    values.push(fractional(*n));
                    raw.push(*n);
                    masked.push(false);
                    segment.push(*s);
                }
                None => {
                    values.push(f64::NAN);
                    raw.push(f64::NAN);
                    masked.push(true);
                    segment.push(0);
                }
            }
        }
    }

    let mut ridges = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        for j in 0..ne.saturating_sub(1) {
            let (Some((n0, s0)), Some((n1, s1))) = (col[j], col[j + 1]) else {
                continue;
            };
            let (e0, e1) = (energy_axis[j], energy_axis[j + 1]);
            let jump = n1 - n0;
            if s0 != s1 {
                ridges.push(Ridge {
                    kind: RidgeKind::BranchCut,
                    eta_index: i,
                    energy_index: j,
                    eta: eta_axis[i],
                    energy: 0.5 * (e0 + e1),
                    jump,
                });
            } else if n0.floor() != n1.floor() {
                let k = n0.floor().max(n1.floor());
                let t = if jump != 0.0 { ((k - n0) / jump).clamp(0.0, 1.0) } else { 0.5 };
                ridges.push(Ridge {
                    kind: RidgeKind::LevelCrossing,
                    eta_index: i,
                    energy_index: j,
                    eta: eta_axis[i],
                    energy: e0 + t * (e1 - e0),
                    jump,
                });
            }
        }
    }
    let branch_cuts = link_branch_cuts(&ridges, eta_axis.len(), p.omega);

    PhaseMap {
        eta_axis: eta_axis.to_vec(),
        energy_axis: energy_axis.to_vec(),
        values,
        raw,
        masked,
        segment,
        ridges,
        branch_cuts,
    }
}

/// Chains branch-cut ridges of consecutive η columns whose energies differ by
/// less than `Ω`, nearest first.
fn link_branch_cuts(ridges: &[Ridge], columns: usize, omega: f64) -> Vec<BranchCut> {
    let mut by_column: Vec<Vec<&Ridge>> = vec![Vec::new(); columns];
    for r in ridges.iter().filter(|r| r.kind == RidgeKind::BranchCut) {
        by_column[r.eta_index].push(r);
    }
    let mut cuts: Vec<BranchCut> = Vec::new();
    // open cuts: (index into cuts, last energy)
    let mut open: Vec<(usize, f64)> = Vec::new();
    for col in by_column {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ri, r) in col.iter().enumerate() {
            for (oi, &(_, e)) in open.iter().enumerate() {
                let d = (r.energy - e).abs();
                if d < omega {
                    pairs.push((d, ri, oi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ridge_taken = vec![false; col.len()];
        let mut open_taken = vec![false; open.len()];
        let mut next_open = Vec::new();
        for (_, ri, oi) in pairs {
            if ridge_taken[ri] || open_taken[oi] {
                continue;
            }
            ridge_taken[ri] = true;
            open_taken[oi] = true;
            let cut = open[oi].0;
            cuts[cut].points.push((col[ri].eta, col[ri].energy));
            next_open.push((cut, col[ri].energy));
        }
        for (ri, r) in col.iter().enumerate() {
            if !ridge_taken[ri] {
                cuts.push(BranchCut {
                    points: vec![(r.eta, r.energy)],
                });
                next_open.push((cuts.len() - 1, r.energy));
            }
        }
        open = next_open;
    }
    cuts
}

/// Roots of `tan A = A` with `cos A > 0`: `A_0 = 0` and one root in each
/// interval `(2πn, 2πn + π/2)`.
pub fn tan_roots(count: usize) -> Vec<f64> {
    (0..count)
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let mut a = approximate_tan_root(n);
            // Newton on sin A − A cos A, which has no poles
            for _ in 0..50 {
                let (s, c) = a.sin_cos();
                let step = (s - a * c) / (a * s);
                a -= step;
                if step.abs() < 1e-15 * a {
                    break;
                }
            }
            assert!(a.cos() > 0.0, "root {a} has cos A <= 0");
            a
        })
        .collect()
}

/// Closed-form estimate `2πn + π/2 − 1/(2πn + π/2)` of the `n`-th root.
pub fn approximate_tan_root(n: usize) -> f64 {
    let s = TAU * n as f64 + 0.5 * PI;
    s - 1.0 / s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub a_n: f64,
    /// Coupling at which the `n`-th pair of side minima appears.
    pub eta_n: f64,
    /// Classical energy of the inflection point at `η_n`.
    pub e_n: f64,
    pub approx_eta_n: f64,
    pub approx_e_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    /// Number of thresholds with `η_n ≤ η`.
    pub fn crossed(&self, eta: f64) -> usize {
        self.rows.iter().filter(|r| r.eta_n <= eta).count()
    }
}

/// Thresholds `η_n = √(Ω/(Γ₀ cos A_n))` and energies `E_n = Γ₀ cos A_n (1 + A_n²/2)`.
pub fn thresholds(p: &ModelParams, count: usize) -> Result<ThresholdTable, QuasiError> {
    if !(p.gamma0 > 0.0) {
        return Err(QuasiError::ZeroCoupling);
    }
    let rows = tan_roots(count)
        .into_iter()
        .enumerate()
        .map(|(n, a)| {
            let c = a.cos();
            let quarter = n as f64 + 0.25;
            ThresholdRow {
                n,
                a_n: a,
                eta_n: (p.omega / (p.gamma0 * c)).sqrt(),
                e_n: p.gamma0 * c * (1.0 + 0.5 * a * a),
                approx_eta_n: (TAU * p.omega * quarter / p.gamma0).sqrt(),
                approx_e_n: PI * p.gamma0 * quarter,
            }
        })
        .collect();
    Ok(ThresholdTable { rows })
}

/// Energy `Ē_n(η) = (Ω/2η²)[(2πn + arccos(Ω/Γ₀η²))² + 2]` of the inflection
/// point bounding the `n`-th side minimum.
pub fn localized_energy(n: usize, eta: f64, p: &ModelParams) -> Result<f64, QuasiError> {
    let table = thresholds(p, n + 1)?;
    let threshold = table.rows[n].eta_n;
    if eta < threshold * (1.0 - 1e-12) {
        return Err(QuasiError::BelowThreshold { n, eta, threshold });
    }
    let ratio = (p.omega / (p.gamma0 * eta * eta)).clamp(-1.0, 1.0);
    let phase = TAU * n as f64 + ratio.acos();
    Ok(p.omega / (2.0 * eta * eta) * (phase * phase + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference(eta: f64) -> ModelParams {
        ModelParams::reference(4.0, eta)
    }

    /// Composite Gauss–Legendre (5 nodes) over `panels` equal panels.
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let mid = a + (k as f64 + 0.5) * h;
                nodes.iter().map(|(t, w)| w * f(mid + 0.5 * h * t)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    fn plain_bisection(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) < 0.0) == (f(a) < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn turning_points_of_parabolas() {
        let free = ModelParams::reference(0.0, 2.0);
        for e in [0.5, 3.0, 12.0] {
            assert!((turning_point(e, &free).unwrap() - (2.0 * e).sqrt()).abs() < 1e-11);
        }
        let shifted = ModelParams::reference(4.0, 0.0);
        for e in [4.5, 9.0] {
            assert!((turning_point(e, &shifted).unwrap() - (2.0 * (e - 4.0)).sqrt()).abs() < 1e-11);
        }
    }

    #[test]
    fn turning_point_at_central_value() {
        // x²/2 + 4cos2x − 4 is negative on (0, 2] and has a single sign change in (2, 3)
        let got = turning_point(4.0, &reference(2.0)).unwrap();
        let oracle = plain_bisection(|x| 0.5 * x * x + 4.0 * (2.0 * x).cos() - 4.0, 2.0, 3.0);
        assert!((got - oracle).abs() < 1e-11);
        assert!((got - 2.474_576_787_369_829).abs() < 1e-11, "{got}");
    }

    #[test]
    fn no_classical_region_below_minimum() {
        let qp = QuasiPotential::new(&reference(2.0));
        let err = qp.turning_point(qp.global_minimum() - 0.1).unwrap_err();
        assert!(matches!(err, QuasiError::NoClassicalRegion { .. }));
        assert!(qp.bs_phase(qp.global_minimum() + 0.01).is_ok());
    }

    #[test]
    fn oscillator_phase_is_integer_at_levels() {
        let free = ModelParams::reference(0.0, 1.0);
        for m in 0..8 {
            let e = m as f64 + 0.5;
            assert!((bs_phase(e, &free).unwrap() - m as f64).abs() < 1e-5);
        }
        let shifted = ModelParams::reference(4.0, 0.0);
        for m in 0..5 {
            let e = m as f64 + 4.5;
            assert!((bs_phase(e, &shifted).unwrap() - m as f64).abs() < 1e-5);
        }
    }

    #[test]
    fn phase_matches_gauss_legendre_oracle() {
        let p = reference(2.0);
        let e = 20.0;
        let xt = turning_point(e, &p).unwrap();
        let integrand = |x: f64| (2.0 * (e - p.potential_hermitian(x))).max(0.0).sqrt();
        let oracle = gauss_legendre(integrand, -xt, xt, 10_000) / PI - 0.5;
        let got = bs_phase(e, &p).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
        assert!((got - 19.144_299_914_710_708).abs() < 1e-6, "{got}");
    }

    #[test]
    fn tan_roots_match_bisection() {
        let roots = tan_roots(6);
        assert_eq!(roots[0], 0.0);
        let a1 = plain_bisection(|a| a.tan() - a, TAU, TAU + 0.5 * PI - 1e-6);
        assert!((roots[1] - a1).abs() < 1e-10);
        assert!((roots[1] - 7.725_251_836_937_707).abs() < 1e-12);
        for n in 1..6 {
            assert!((roots[n].tan() - roots[n]).abs() < 1e-12 * roots[n] * 10.0);
            assert!((roots[n] - approximate_tan_root(n)).abs() < 2e-3);
            assert!(roots[n] > roots[n - 1] && roots[n].cos() > 0.0);
        }
        assert_eq!(tan_roots(1), vec![0.0]);
    }

    #[test]
    fn reference_thresholds() {
        let t = thresholds(&reference(2.0), 5).unwrap();
        assert!((t.rows[0].eta_n - 0.5).abs() < 1e-15);
        assert!((t.rows[0].e_n - 4.0).abs() < 1e-15);
        assert!((t.rows[1].eta_n - 1.395).abs() < 0.005);
        assert!((t.rows[1].e_n - 15.8).abs() < 0.2);
        for r in &t.rows[1..] {
            assert!(((r.approx_eta_n - r.eta_n) / r.eta_n).abs() < 0.01);
            assert!(((r.approx_e_n - r.e_n) / r.e_n).abs() < 0.01);
            let lhs = 4.0 * r.eta_n * r.eta_n * r.a_n.cos();
            assert!((lhs - 1.0).abs() < 1e-12);
        }
        assert!(matches!(thresholds(&ModelParams::reference(0.0, 1.0), 3), Err(QuasiError::ZeroCoupling)));
    }

    #[test]
    fn inflection_energy_meets_thresholds() {
        let p = reference(1.0);
        let t = thresholds(&p, 6).unwrap();
        for r in &t.rows {
            let e = localized_energy(r.n, r.eta_n, &p).unwrap();
            assert!(((e - r.e_n) / r.e_n).abs() < 1e-9, "n = {}", r.n);
        }
        let e1 = localized_energy(1, 2.0, &p).unwrap();
        let expected = ((TAU + (1.0f64 / 16.0).acos()).powi(2) + 2.0) / 8.0;
        assert!((e1 - expected).abs() < 1e-12);
        assert!((e1 - 7.9).abs() < 0.1);
        assert!(matches!(localized_energy(1, 1.2, &p), Err(QuasiError::BelowThreshold { .. })));
    }

    #[test]
    fn minima_structure_follows_thresholds() {
        let below = minima_structure(&reference(0.3));
        assert_eq!(below.len(), 1);
        assert_eq!(below[0].kind, StationaryKind::Minimum);
        assert!(below[0].x.abs() < 1e-9);

        let two = minima_structure(&reference(2.0));
        let origin = two.iter().find(|s| s.x.abs() < 1e-9).unwrap();
        assert_eq!(origin.kind, StationaryKind::Maximum);
        assert_eq!(side_minima_pairs(&two), 3);

        let table = thresholds(&reference(1.0), 6).unwrap();
        for r in &table.rows[..4] {
            for (eta, expected) in [(r.eta_n - 1e-3, r.n), (r.eta_n + 1e-3, r.n + 1)] {
                let got = side_minima_pairs(&minima_structure(&reference(eta)));
                assert_eq!(got, expected, "eta = {eta}");
            }
        }
    }

    #[test]
    fn free_phase_map_is_striped() {
        let p = ModelParams::reference(0.0, 1.0);
        let etas = [0.0, 1.0, 2.0, 3.0];
        let energies: Vec<f64> = (0..60).map(|i| 0.3 + 0.1 * i as f64).collect();
        let map = phase_map(&etas, &energies, &p);
        for j in 0..energies.len() {
            let v0 = map.value(0, j).unwrap();
            for i in 1..etas.len() {
                assert!((map.value(i, j).unwrap() - v0).abs() < 1e-6);
            }
        }
        assert!(map.branch_cuts.is_empty());
        for r in &map.ridges {
            let nearest = (r.energy - 0.5).round() + 0.5;
            assert!((r.energy - nearest).abs() < 0.01, "ridge at {}", r.energy);
        }
    }

    #[test]
    fn branch_cut_emerges_at_first_threshold() {
        let p = reference(1.0);
        let etas: Vec<f64> = (0..41).map(|i| 1.2 + 0.01 * i as f64).collect();
        let energies: Vec<f64> = (0..121).map(|i| 13.0 + 0.05 * i as f64).collect();
        let map = phase_map(&etas, &energies, &p);
        let t = thresholds(&p, 2).unwrap().rows[1];
        let hit = map.branch_cuts.iter().any(|c| {
            let (eta, e) = c.endpoint();
            (eta - t.eta_n).abs() < 0.1 && (e - t.e_n).abs() < 0.5
        });
        assert!(hit, "{:?}", map.branch_cuts.iter().map(|c| c.endpoint()).collect::<Vec<_>>());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn free_phase_is_linear(e in 1.0f64..40.0) {
            let p = ModelParams::reference(0.0, 1.5);
            prop_assert!((bs_phase(e, &p).unwrap() - (e - 0.5)).abs() < 1e-6);
        }

        #[test]
        fn phase_grows_within_a_segment(eta in 0.0f64..5.0, e0 in -3.0f64..35.0) {
            let qp = QuasiPotential::new(&reference(eta));
            let e1 = e0 + 0.05;
            if let (Ok((n0, s0)), Ok((n1, s1))) = (qp.phase_with_segment(e0), qp.phase_with_segment(e1)) {
                if s0 == s1 {
                    prop_assert!(n1 >= n0 - 1e-9);
                }
            }
        }

        #[test]
        fn stationary_points_are_roots(eta in 0.0f64..6.0) {
            let p = reference(eta);
            for s in minima_structure(&p) {
                prop_assert!(p.hermitian_derivatives(s.x).1.abs() < 1e-8 * (1.0 + 4.0 * eta));
            }
        }

        #[test]
        fn minima_pairs_never_decrease(eta in 0.0f64..5.9) {
            let a = side_minima_pairs(&minima_structure(&reference(eta)));
            let b = side_minima_pairs(&minima_structure(&reference(eta + 0.1)));
            prop_assert!(b >= a);
        }
    }
}
