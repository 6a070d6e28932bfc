//! Parameter sweeps and (γ, t1) phase-diagram grids.
//!
//! Grid points are independent; they run on a rayon pool and come back in
//! grid order. A point whose computation fails keeps its slot with the
//! failing quantities left empty and the error recorded.

use crate::error::{Error, Result};
use crate::gbz::{gbz_contour, non_bloch_winding_with, WindingGauge};
use crate::invariants::{analytic_bp, gap_closing_scan, obc_gap_closings, pbc_ep_locations};
use crate::model::{d_vector, pbc_energy, ModelSpec, Variant};
use crate::realspace::{
    biorthogonal_polarization, biorthogonal_spectrum, build_obc, classify_modes, default_window,
    expected_edge_energy, select_edge_modes, ModeKind, Termination, DEFAULT_THRESHOLD,
};
use crate::scalar::{re, Real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    T1,
    Gamma,
    /// ky for the x-open model, kx for the y-open ones.
    TransverseK,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::T1 => "t1",
            SweepParameter::Gamma => "gamma",
            SweepParameter::TransverseK => "transverse_k",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "t1" => Some(SweepParameter::T1),
            "gamma" => Some(SweepParameter::Gamma),
            "transverse_k" => Some(SweepParameter::TransverseK),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis<T> {
    pub parameter: SweepParameter,
    pub start: T,
    pub stop: T,
    pub n_points: usize,
}

impl<T: Real> SweepAxis<T> {
    pub fn new(parameter: SweepParameter, start: T, stop: T, n_points: usize) -> Result<Self> {
        let a = SweepAxis {
            parameter,
            start,
            stop,
            n_points,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(format!("n_points = {} < 2", self.n_points)));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "axis needs finite start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<T> {
        linspace(self.start, self.stop, self.n_points)
    }

    pub fn step(&self) -> T {
        (self.stop - self.start) / T::from_usize_lossy(self.n_points - 1)
    }
}

pub fn linspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![start];
    }
    let h = (stop - start) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| if i + 1 == n { stop } else { start + h * T::from_usize_lossy(i) })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions<T> {
    pub n_obc: usize,
    pub n_p: usize,
    pub gbz_resolution: usize,
    /// Momentum samples for the periodic spectrum.
    pub pbc_grid: usize,
    /// Held fixed when the axis is t1 or γ on a 2d variant.
    pub transverse_k: Option<T>,
    pub obc_termination: Termination,
    /// None: max(3, N/20).
    pub window_cells: Option<usize>,
    pub threshold: T,
    /// None: available parallelism.
    pub workers: Option<usize>,
    /// Force the diagonalization path for P even when t3 = 0.
    pub numeric_p: bool,
}

impl<T: Real> SweepOptions<T> {
    pub fn new(n_obc: usize, n_p: usize, gbz_resolution: usize) -> Self {
        SweepOptions {
            n_obc,
            n_p,
            gbz_resolution,
            pbc_grid: 512,
            transverse_k: None,
            obc_termination: Termination::FullCells,
            window_cells: None,
            threshold: T::lit(DEFAULT_THRESHOLD),
            workers: None,
            numeric_p: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObcMode<T> {
    pub abs_energy: T,
    pub re: T,
    pub im: T,
    pub kind: ModeKind,
    pub boundary_weight: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpFlags<T> {
    /// min |E| of the periodic band over the momentum grid.
    pub pbc_min_abs_energy: T,
    /// A closed-form PBC EP lies within half a grid step (x-open, t3 = 0,
    /// transverse-k sweeps only).
    pub pbc_ep_nearby: Option<bool>,
    /// The OBC bands touch zero on the GBZ.
    pub obc_gap_closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub quantity: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Analytic,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub value: T,
    pub obc_modes: Vec<ObcMode<T>>,
    pub pbc_abs_energies: Vec<T>,
    pub p: Option<T>,
    pub p_method: Option<PMethod>,
    pub nu_tot: Option<T>,
    pub nu_tot_right_only: Option<T>,
    pub nu_imaginary: Option<T>,
    pub ep_flags: Option<EpFlags<T>>,
    pub failures: Vec<PointFailure>,
}

impl<T: Real> SweepPoint<T> {
    pub fn obc_abs_energies(&self) -> Vec<T> {
        self.obc_modes.iter().map(|m| m.abs_energy).collect()
    }

    pub fn edge_energies(&self) -> Vec<T> {
        self.obc_modes
            .iter()
            .filter(|m| m.kind.is_edge())
            .map(|m| m.abs_energy)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult<T> {
    pub spec: ModelSpec<T>,
    pub axis: SweepAxis<T>,
    pub options: SweepOptions<T>,
    pub points: Vec<SweepPoint<T>>,
}

impl<T: Real> SweepResult<T> {
    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn p_series(&self) -> Vec<Option<T>> {
        self.points.iter().map(|p| p.p).collect()
    }

    pub fn nu_series(&self) -> Vec<Option<T>> {
        self.points.iter().map(|p| p.nu_tot).collect()
    }

    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| !p.failures.is_empty()).count()
    }
}

fn check_axis<T: Real>(spec: &ModelSpec<T>, axis: &SweepAxis<T>, opts: &SweepOptions<T>) -> Result<()> {
    axis.validate()?;
    spec.validate()?;
    let two_d = spec.variant.is_2d();
    match axis.parameter {
        SweepParameter::TransverseK if !two_d => {
            return Err(Error::UnexpectedTransverseMomentum(spec.variant.name()))
        }
        SweepParameter::T1 | SweepParameter::Gamma if two_d && opts.transverse_k.is_none() => {
            return Err(Error::MissingTransverseMomentum(spec.variant.name()))
        }
        _ => {}
    }
    if opts.n_obc < crate::realspace::MIN_CELLS {
        return Err(Error::TooFewCells(opts.n_obc));
    }
    if opts.n_p < crate::realspace::MIN_CELLS {
        return Err(Error::TooFewCells(opts.n_p));
    }
    if opts.pbc_grid < 2 {
        return Err(Error::InvalidParameter("pbc_grid < 2".into()));
    }
    Ok(())
}

fn at_point<T: Real>(spec: &ModelSpec<T>, axis: &SweepAxis<T>, v: T, fixed_k: Option<T>) -> (ModelSpec<T>, Option<T>) {
    let mut s = spec.clone();
    let mut k = if spec.variant.is_2d() { fixed_k } else { None };
    match axis.parameter {
        SweepParameter::T1 => s.t1 = v,
        SweepParameter::Gamma => s.gamma = v,
        SweepParameter::TransverseK => k = Some(v),
    }
    (s, k)
}

pub fn sweep<T: Real>(
    spec: &ModelSpec<T>,
    axis: &SweepAxis<T>,
    opts: &SweepOptions<T>,
) -> Result<SweepResult<T>> {
    check_axis(spec, axis, opts)?;
    let values = axis.values();
    let eps = match (spec.variant, spec.t3 == T::zero(), axis.parameter) {
        (Variant::ChernXObc, true, SweepParameter::TransverseK) => pbc_ep_locations(spec).ok(),
        _ => None,
    };
    let half_step = axis.step() * T::lit(0.5);
    let run = || {
        values
            .par_iter()
            .map(|&v| {
                let (s, k) = at_point(spec, axis, v, opts.transverse_k);
                let near = eps.as_ref().map(|list| {
                    list.iter().any(|(_, ky)| (*ky - v).abs() <= half_step)
                });
                sweep_point(&s, k, v, opts, near)
            })
            .collect::<Vec<_>>()
    };
    let points = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult {
        spec: spec.clone(),
        axis: *axis,
        options: opts.clone(),
        points,
    })
}

fn fail(failures: &mut Vec<PointFailure>, quantity: &str, e: Error) {
    failures.push(PointFailure {
        quantity: quantity.to_string(),
        message: e.to_string(),
    });
}

/// Everything recorded at one grid point.
pub fn sweep_point<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    value: T,
    opts: &SweepOptions<T>,
    pbc_ep_nearby: Option<bool>,
) -> SweepPoint<T> {
    let mut failures = Vec::new();

    let pbc_abs_energies = match pbc_abs_energies(spec, transverse_k, opts.pbc_grid) {
        Ok(e) => e,
        Err(e) => {
            fail(&mut failures, "pbc", e);
            Vec::new()
        }
    };

    let obc_modes = match obc_modes(spec, transverse_k, opts) {
        Ok(m) => m,
        Err(e) => {
            fail(&mut failures, "obc", e);
            Vec::new()
        }
    };

    let (p, p_method) = match polarization(spec, transverse_k, opts) {
        Ok((p, m)) => (Some(p), Some(m)),
        Err(e) => {
            fail(&mut failures, "p", e);
            (None, None)
        }
    };

    let mut gap_closed = false;
    let (mut nu, mut nu_r, mut nu_im) = (None, None, None);
    match gbz_contour(spec, transverse_k, opts.gbz_resolution) {
        Ok(g) => {
            match non_bloch_winding_with(spec, &g, transverse_k, WindingGauge::Biorthogonal) {
                Ok(w) => {
                    nu = Some(w.nu_total);
                    nu_im = Some(w.imaginary_part);
                }
                Err(e) => {
                    gap_closed = matches!(e, Error::GapClosed { .. });
                    fail(&mut failures, "nu_tot", e);
                }
            }
            if let Ok(w) = non_bloch_winding_with(spec, &g, transverse_k, WindingGauge::RightOnly) {
                nu_r = Some(w.nu_total);
            }
        }
        Err(e) => fail(&mut failures, "gbz", e),
    }

    let ep_flags = pbc_abs_energies
        .iter()
        .cloned()
        .reduce(T::min)
        .map(|m| EpFlags {
            pbc_min_abs_energy: m,
            pbc_ep_nearby,
            obc_gap_closed: gap_closed,
        });

    SweepPoint {
        value,
        obc_modes,
        pbc_abs_energies,
        p,
        p_method,
        nu_tot: nu,
        nu_tot_right_only: nu_r,
        nu_imaginary: nu_im,
        ep_flags,
        failures,
    }
}

/// |E(k)| of the periodic band on a uniform grid along the open direction.
/// Both bands share |E|, so one value per k.
pub fn pbc_abs_energies<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>, n: usize) -> Result<Vec<T>> {
    let two_pi = T::PI() + T::PI();
    (0..n)
        .map(|i| {
            let k = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            Ok(pbc_energy(&d_vector(spec, re(k), transverse_k)?).norm())
        })
        .collect()
}

fn obc_modes<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>, opts: &SweepOptions<T>) -> Result<Vec<ObcMode<T>>> {
    let h = build_obc(spec, opts.n_obc, transverse_k, opts.obc_termination)?;
    let b = biorthogonal_spectrum(&h)?;
    let w = opts.window_cells.unwrap_or_else(|| default_window(opts.n_obc));
    let labels = classify_modes(&b, w, opts.threshold);
    Ok(b.eigenvalues
        .iter()
        .zip(&labels)
        .map(|(e, l)| ObcMode {
            abs_energy: e.norm(),
            re: e.re,
            im: e.im,
            kind: l.kind,
            boundary_weight: l.boundary_weight,
        })
        .collect())
}

/// Closed form when t3 = 0 on the x-open chains, otherwise diagonalization
/// of the broken-cell chain. An empty edge selection counts as P = 0.
pub fn polarization<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    opts: &SweepOptions<T>,
) -> Result<(T, PMethod)> {
    let solvable = matches!(spec.variant, Variant::Ssh1d | Variant::ChernXObc) && spec.t3 == T::zero();
    if solvable && !opts.numeric_p {
        let ky = transverse_k.unwrap_or_else(T::zero);
        return analytic_bp(spec, ky, opts.n_p).map(|p| (p, PMethod::Analytic));
    }
    numeric_polarization(spec, transverse_k, opts.n_p, opts.window_cells, opts.threshold).map(|p| (p, PMethod::Numeric))
}

pub fn numeric_polarization<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    n_cells: usize,
    window_cells: Option<usize>,
    threshold: T,
) -> Result<T> {
    let h = build_obc(spec, n_cells, transverse_k, Termination::BrokenCellAatBothEnds)?;
    let b = biorthogonal_spectrum(&h)?;
    let w = window_cells.unwrap_or_else(|| default_window(n_cells));
    let labels = classify_modes(&b, w, threshold);
    let expected = expected_edge_energy(spec, transverse_k);
    let tol = T::lit(1e-6) * b.matrix_norm.max(T::one());
    let sel = select_edge_modes(&b, &labels, expected, tol);
    match biorthogonal_polarization(&b, &sel, n_cells) {
        Err(Error::NoModesSelected) => Ok(T::zero()),
        r => r,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump<T> {
    /// Indices of the two grid points straddling the jump.
    pub left: usize,
    pub right: usize,
    pub location: T,
    pub size: T,
}

/// Adjacent (non-gap) grid points whose series differs by more than 0.5.
pub fn detect_jumps<T: Real>(values: &[T], series: &[Option<T>]) -> Vec<Jump<T>> {
    let idx: Vec<usize> = (0..series.len()).filter(|&i| series[i].is_some()).collect();
    idx.windows(2)
        .filter_map(|w| {
            let (a, b) = (series[w[0]].unwrap(), series[w[1]].unwrap());
            ((b - a).abs() > T::lit(0.5)).then(|| Jump {
                left: w[0],
                right: w[1],
                location: (values[w[0]] + values[w[1]]) * T::lit(0.5),
                size: b - a,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramKind {
    /// 1 where the periodic spectrum has EPs.
    PbcEp,
    /// Number of ky where the edge mode merges with the OBC bulk.
    ObcGapClosings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramGrid<T> {
    pub kind: DiagramKind,
    pub delta_stagger: T,
    pub delta_onsite: T,
    pub gamma: Vec<T>,
    pub t1: Vec<T>,
    /// labels[i][j] at (gamma[i], t1[j]).
    pub labels: Vec<Vec<u8>>,
}

impl<T: Real> PhaseDiagramGrid<T> {
    pub fn allowed(&self) -> &'static [u8] {
        match self.kind {
            DiagramKind::PbcEp => &[0, 1],
            DiagramKind::ObcGapClosings => &[0, 2, 4, 6],
        }
    }

    pub fn label_at(&self, i_gamma: usize, j_t1: usize) -> u8 {
        self.labels[i_gamma][j_t1]
    }

    /// Cells with a differently labelled 4-neighbour.
    pub fn boundary_cells(&self) -> Vec<(usize, usize)> {
        let (ng, nt) = (self.gamma.len(), self.t1.len());
        let mut out = Vec::new();
        for i in 0..ng {
            for j in 0..nt {
                let l = self.labels[i][j];
                let nb = [
                    (i.wrapping_sub(1), j),
                    (i + 1, j),
                    (i, j.wrapping_sub(1)),
                    (i, j + 1),
                ];
                if nb.iter().any(|&(a, b)| a < ng && b < nt && self.labels[a][b] != l) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

fn base_spec<T: Real>(delta_stagger: T, delta_onsite: T, gamma: T, t1: T) -> ModelSpec<T> {
    ModelSpec::chern(Variant::ChernXObc, t1, T::zero(), gamma, delta_onsite, delta_stagger)
}

fn grid_map<T: Real>(gamma: &[T], t1: &[T], f: impl Fn(T, T) -> Result<u8> + Sync) -> Result<Vec<Vec<u8>>> {
    if gamma.is_empty() || t1.is_empty() {
        return Err(Error::InvalidParameter("empty phase-diagram grid".into()));
    }
    gamma
        .par_iter()
        .map(|&g| t1.iter().map(|&t| f(g, t)).collect::<Result<Vec<u8>>>())
        .collect()
}

pub fn phase_diagram_pbc<T: Real>(
    delta_stagger: T,
    delta_onsite: T,
    gamma_grid: &[T],
    t1_grid: &[T],
) -> Result<PhaseDiagramGrid<T>> {
    let labels = grid_map(gamma_grid, t1_grid, |g, t| {
        let s = base_spec(delta_stagger, delta_onsite, g, t);
        Ok(u8::from(!pbc_ep_locations(&s)?.is_empty()))
    })?;
    Ok(PhaseDiagramGrid {
        kind: DiagramKind::PbcEp,
        delta_stagger,
        delta_onsite,
        gamma: gamma_grid.to_vec(),
        t1: t1_grid.to_vec(),
        labels,
    })
}

pub fn phase_diagram_obc<T: Real>(
    delta_stagger: T,
    delta_onsite: T,
    gamma_grid: &[T],
    t1_grid: &[T],
) -> Result<PhaseDiagramGrid<T>> {
    let labels = grid_map(gamma_grid, t1_grid, |g, t| {
        let s = base_spec(delta_stagger, delta_onsite, g, t);
        Ok(obc_gap_closings(&s)?.len() as u8)
    })?;
    Ok(PhaseDiagramGrid {
        kind: DiagramKind::ObcGapClosings,
        delta_stagger,
        delta_onsite,
        gamma: gamma_grid.to_vec(),
        t1: t1_grid.to_vec(),
        labels,
    })
}

/// Sign-change count of |r_L* r_R| − 1 over `n_scan` ky values: the
/// arbiter for OBC labels.
pub fn brute_force_obc_label<T: Real>(
    delta_stagger: T,
    delta_onsite: T,
    gamma: T,
    t1: T,
    n_scan: usize,
) -> Result<u8> {
    let s = base_spec(delta_stagger, delta_onsite, gamma, t1);
    Ok(gap_closing_scan(&s, n_scan)? as u8)
}

/// EP existence from a dense (kx, ky) scan of |E_PBC|²: a sign change of
/// Re E² together with a small |Im E²| along kx ∈ {0, π}.
pub fn brute_force_pbc_label<T: Real>(
    delta_stagger: T,
    delta_onsite: T,
    gamma: T,
    t1: T,
    n_scan: usize,
) -> Result<u8> {
    let s = base_spec(delta_stagger, delta_onsite, gamma, t1);
    let two_pi = T::PI() + T::PI();
    for kx in [T::zero(), T::PI()] {
        let mut prev: Option<T> = None;
        for i in 0..=n_scan {
            let ky = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n_scan);
            let d = crate::model::d_chern_x(&s, re(kx), ky)?;
            let e2 = d.square();
            if let Some(p) = prev {
                if (p <= T::zero()) != (e2.re <= T::zero()) {
                    return Ok(1);
                }
            }
            prev = Some(e2.re);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn axis_validation() {
        assert!(SweepAxis::new(SweepParameter::T1, 0.0, 1.0, 1).is_err());
        assert!(SweepAxis::new(SweepParameter::T1, 1.0, 0.0, 5).is_err());
        let a = SweepAxis::new(SweepParameter::T1, 0.0, 1.0, 5).unwrap();
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let s = ModelSpec::ssh(1.0, 1.0, 0.0, 3.0, 0.0);
        let k = SweepAxis::new(SweepParameter::TransverseK, 0.0, 1.0, 5).unwrap();
        let o = SweepOptions::new(10, 10, 128);
        assert!(matches!(sweep(&s, &k, &o), Err(Error::UnexpectedTransverseMomentum(_))));
        let c = ModelSpec::chern(Variant::ChernXObc, 1.0, 0.0, 3.0, 1.0, 1.0);
        assert!(matches!(sweep(&c, &a, &o), Err(Error::MissingTransverseMomentum(_))));
    }

    #[test]
    fn jumps_skip_gaps() {
        let v = [0.0f64, 1.0, 2.0, 3.0, 4.0];
        let s = [Some(0.0), Some(0.01), None, Some(1.0), Some(0.99)];
        let j = detect_jumps(&v, &s);
        assert_eq!(j.len(), 1);
        assert_eq!((j[0].left, j[0].right), (1, 3));
        assert!((j[0].size - 0.99).abs() < 1e-12);
    }

    #[test]
    fn small_ssh_sweep() {
        let s = ModelSpec::ssh(1.0, 1.0, 0.0, 3.0, 0.0);
        let a = SweepAxis::new(SweepParameter::T1, 0.55, 2.45, 20).unwrap();
        let mut o = SweepOptions::new(20, 400, 256);
        o.workers = Some(2);
        let r = sweep(&s, &a, &o).unwrap();
        assert_eq!(r.points.len(), 20);
        for p in &r.points {
            assert_eq!(p.obc_modes.len(), 40);
            assert_eq!(p.pbc_abs_energies.len(), 512);
            assert_eq!(p.p_method, Some(PMethod::Analytic));
        }
        let jumps = detect_jumps(&r.values(), &r.p_series());
        assert_eq!(jumps.len(), 2);
        let nu_jumps = detect_jumps(&r.values(), &r.nu_series());
        assert_eq!(nu_jumps.len(), 2);
        for (a, b) in jumps.iter().zip(&nu_jumps) {
            assert_eq!(a.left, b.left);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = ModelSpec::ssh(1.0, 1.0, 0.2, 4.0 / 3.0, 0.0);
        let a = SweepAxis::new(SweepParameter::T1, 0.2, 2.0, 6).unwrap();
        let mut o = SweepOptions::new(12, 12, 128);
        o.workers = Some(1);
        let r1 = sweep(&s, &a, &o).unwrap();
        o.workers = Some(3);
        let r3 = sweep(&s, &a, &o).unwrap();
        assert_eq!(r1.points, r3.points);
    }

    #[test]
    fn pbc_diagram_oracles() {
        let g = [0.0, 3.0];
        let t = [0.5, 1.0];
        let d = phase_diagram_pbc(1.0, 1.0, &g, &t).unwrap();
        assert_eq!(d.labels[0], vec![0, 0]);
        assert_eq!(d.label_at(1, 1), 1);
        assert!(phase_diagram_pbc(1.0, 0.0, &g, &t).is_err());
    }

    #[test]
    fn obc_diagram_oracles() {
        let d = phase_diagram_obc(1.0, 1.0, &[3.0], &[1.0]).unwrap();
        assert_eq!(d.labels, vec![vec![6]]);
        // γ²/(16δt1) > 1 and γ²/8 < t1²
        let d = phase_diagram_obc(1.0, 1.0, &[4.5], &[1.2]).unwrap();
        assert_eq!(d.labels, vec![vec![0]]);
        assert_eq!(brute_force_obc_label(1.0, 1.0, 4.5, 1.2, 10_000).unwrap(), 0);
        assert_eq!(brute_force_obc_label(1.0, 1.0, 3.0, 1.0, 10_000).unwrap(), 6);
    }

    #[test]
    fn brute_force_pbc_matches_closed_form() {
        for (g, t) in [(3.0, 1.0), (0.5, 1.0), (5.0, 0.3), (2.0, 2.0), (4.4, 1.0)] {
            let a = phase_diagram_pbc(1.0, 1.0, &[g], &[t]).unwrap().labels[0][0];
            let b = brute_force_pbc_label(1.0, 1.0, g, t, 4096).unwrap();
            assert_eq!(a, b, "γ={g}, t1={t}");
        }
    }

    #[test]
    fn ky_sweep_flags_eps() {
        let s = ModelSpec::chern(Variant::ChernXObc, 1.0, 0.0, 3.0, 1.0, 1.0);
        let a = SweepAxis::new(SweepParameter::TransverseK, 0.01, 2.0 * PI - 0.01, 40).unwrap();
        let o = SweepOptions::new(10, 200, 128);
        let r = sweep(&s, &a, &o).unwrap();
        let flagged = r
            .points
            .iter()
            .filter(|p| p.ep_flags.and_then(|f| f.pbc_ep_nearby) == Some(true))
            .count();
        assert!((4..=8).contains(&flagged), "{flagged}");
    }
}
