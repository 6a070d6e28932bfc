//! Finite open chains: assembly, biorthogonal spectra, edge/bulk
//! classification and the numerically evaluated biorthogonal polarization.
//!
//! Under the skin effect right eigenvectors grow like |β|ⁿ across the chain,
//! which wrecks a dense eigensolver long before N = 100. The spectrum is
//! therefore computed for the similar matrix D⁻¹HD with D = diag(sⁿ), s the
//! mean GBZ radius. Biorthogonal densities conj(L)·R are invariant under
//! that similarity, so classification and P never leave the scaled frame.

use crate::error::{Error, Result};
use crate::linalg::{band, eigen, inner, invert, CMatrix};
use crate::model::{bloch_matrix, laurent, BlochMatrix, ModelSpec, Variant};
use crate::scalar::{cis, norm2, re, to_c64, Real, C};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FullCells,
    /// A1, B1, …, B_{N−1}, A_N: 2N−1 sites, an A site at both ends.
    BrokenCellAatBothEnds,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::FullCells => "full_cells",
            Termination::BrokenCellAatBothEnds => "broken_cell",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full_cells" => Some(Termination::FullCells),
            "broken_cell" => Some(Termination::BrokenCellAatBothEnds),
            _ => None,
        }
    }
}

pub const MIN_CELLS: usize = 2;

#[derive(Clone, Debug)]
pub struct ObcHamiltonian<T> {
    pub n_cells: usize,
    pub matrix: CMatrix<T>,
    pub termination: Termination,
    blocks: [BlochMatrix<T>; 3],
    /// Skin radius estimate used as the default similarity scale.
    pub skin_scale: T,
}

impl<T: Real> ObcHamiltonian<T> {
    pub fn dim(&self) -> usize {
        site_count(self.n_cells, self.termination)
    }

    /// 1-based cell of every basis site.
    pub fn site_cells(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| i / 2 + 1).collect()
    }

    /// D⁻¹HD for D = diag(sⁿ): the upper block picks up s, the lower 1/s.
    pub fn scaled_matrix(&self, s: T) -> CMatrix<T> {
        let [lower, constant, upper] = &self.blocks;
        assemble(self.n_cells, self.termination, lower, constant, upper, s)
    }
}

fn site_count(n_cells: usize, termination: Termination) -> usize {
    match termination {
        Termination::FullCells => 2 * n_cells,
        Termination::BrokenCellAatBothEnds => 2 * n_cells - 1,
    }
}

fn assemble<T: Real>(
    n_cells: usize,
    termination: Termination,
    lower: &BlochMatrix<T>,
    constant: &BlochMatrix<T>,
    upper: &BlochMatrix<T>,
    s: T,
) -> CMatrix<T> {
    let dim = site_count(n_cells, termination);
    let mut m = CMatrix::zeros(dim, dim);
    let inv = T::one() / s;
    for n in 0..n_cells {
        for a in 0..2 {
            for b in 0..2 {
                let (i, j) = (2 * n + a, 2 * n + b);
                if i < dim && j < dim {
                    m[(i, j)] = constant.0[a][b];
                }
                let (i, j) = (2 * n + a, 2 * (n + 1) + b);
                if i < dim && j < dim {
                    m[(i, j)] = upper.0[a][b] * s;
                }
                let (i, j) = (2 * (n + 1) + a, 2 * n + b);
                if i < dim && j < dim {
                    m[(i, j)] = lower.0[a][b] * inv;
                }
            }
        }
    }
    m
}

pub fn build_obc<T: Real>(
    spec: &ModelSpec<T>,
    n_cells: usize,
    transverse_k: Option<T>,
    termination: Termination,
) -> Result<ObcHamiltonian<T>> {
    if n_cells < MIN_CELLS {
        return Err(Error::TooFewCells(n_cells));
    }
    let l = laurent(spec, transverse_k)?;
    let blocks = [
        bloch_matrix(&l.lower),
        bloch_matrix(&l.constant),
        bloch_matrix(&l.upper),
    ];
    let matrix = assemble(n_cells, termination, &blocks[0], &blocks[1], &blocks[2], T::one());
    Ok(ObcHamiltonian {
        n_cells,
        matrix,
        termination,
        blocks,
        skin_scale: skin_scale(spec, transverse_k),
    })
}

/// Mean GBZ radius, clamped away from 0 and ∞. Closed form when t3 = 0 on
/// the x-open chains, otherwise from a coarse GBZ.
pub fn skin_scale<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>) -> T {
    let lo = T::lit(1e-3);
    let hi = T::one() / lo;
    let direct = match spec.variant {
        Variant::Ssh1d | Variant::ChernXObc if spec.t3 == T::zero() => {
            crate::invariants::gbz_radius(spec, transverse_k.unwrap_or_else(T::zero)).ok()
        }
        _ => None,
    };
    let r = direct.or_else(|| {
        crate::gbz::gbz_contour(spec, transverse_k, 128)
            .ok()
            .map(|g| g.geometric_mean_radius())
    });
    match r {
        Some(r) if r.is_finite() => r.max(lo).min(hi),
        _ => T::one(),
    }
}

#[derive(Clone, Debug)]
pub struct BiorthogonalSpectrum<T> {
    pub eigenvalues: Vec<C<T>>,
    /// Right vectors of the scaled matrix, one column each, unit norm.
    right: CMatrix<T>,
    /// Left vectors of the scaled matrix with ⟨L_i|R_i⟩ = 1.
    left: CMatrix<T>,
    pub cell_scale: T,
    pub n_cells: usize,
    site_cells: Vec<usize>,
    /// Largest left-eigenvector residual ‖H†l − λ̄l‖ over ‖H‖.
    pub pairing_residual: T,
    /// 1/‖L_i‖ for unit R_i: the inverse eigenvalue condition number.
    pub overlaps: Vec<T>,
    pub matrix_norm: T,
    scaled: CMatrix<T>,
}

impl<T: Real> BiorthogonalSpectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn scaled_right(&self, i: usize) -> Vec<C<T>> {
        self.right.column(i)
    }

    pub fn scaled_left(&self, i: usize) -> Vec<C<T>> {
        self.left.column(i)
    }

    /// The matrix actually diagonalized.
    pub fn scaled_matrix(&self) -> &CMatrix<T> {
        &self.scaled
    }

    /// Right eigenvector of the original H (may span many decades).
    pub fn right_vector(&self, i: usize) -> Vec<C<T>> {
        let s = self.cell_scale;
        self.right
            .column(i)
            .into_iter()
            .zip(&self.site_cells)
            .map(|(z, &n)| z * s.powi(n as i32 - 1))
            .collect()
    }

    pub fn left_vector(&self, i: usize) -> Vec<C<T>> {
        let s = self.cell_scale;
        self.left
            .column(i)
            .into_iter()
            .zip(&self.site_cells)
            .map(|(z, &n)| z * s.powi(1 - n as i32))
            .collect()
    }

    /// conj(L)·R per site.
    pub fn site_density(&self, i: usize) -> Vec<C<T>> {
        (0..self.site_cells.len())
            .map(|k| self.left[(k, i)].conj() * self.right[(k, i)])
            .collect()
    }

    /// Biorthogonal density summed over the sublattices of each cell.
    pub fn cell_density(&self, i: usize) -> Vec<C<T>> {
        let mut out = vec![C::zero(); self.n_cells];
        for (k, &n) in self.site_cells.iter().enumerate() {
            out[n - 1] = out[n - 1] + self.left[(k, i)].conj() * self.right[(k, i)];
        }
        out
    }

    /// Σ_sites |L|·|R| per cell.
    pub fn cell_abs_density(&self, i: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_cells];
        for (k, &n) in self.site_cells.iter().enumerate() {
            out[n - 1] = out[n - 1] + self.left[(k, i)].norm() * self.right[(k, i)].norm();
        }
        out
    }

    /// max_{i≠j} |⟨L_i|R_j⟩| and max_i |⟨L_i|R_i⟩ − 1|; O(n³).
    pub fn biorthogonality_defect(&self) -> (T, T) {
        let g = self.left.adjoint().matmul(&self.right);
        let n = self.len();
        let (mut off, mut diag) = (T::zero(), T::zero());
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag = diag.max((g[(i, i)] - re(T::one())).norm());
                } else {
                    off = off.max(g[(i, j)].norm());
                }
            }
        }
        (off, diag)
    }

    /// Largest ‖H'R − ER‖ and ‖H'†L − E*L‖ over all modes, relative to ‖H'‖.
    pub fn residuals(&self) -> (T, T) {
        let adj = self.scaled.adjoint();
        let (mut rr, mut rl) = (T::zero(), T::zero());
        for i in 0..self.len() {
            let e = self.eigenvalues[i];
            let r = self.right.column(i);
            let hr = self.scaled.matvec(&r);
            let d: Vec<_> = hr.iter().zip(&r).map(|(a, b)| a - e * b).collect();
            rr = rr.max(norm2(&d) / norm2(&r));
            let l = self.left.column(i);
            let hl = adj.matvec(&l);
            let d: Vec<_> = hl.iter().zip(&l).map(|(a, b)| a - e.conj() * b).collect();
            rl = rl.max(norm2(&d) / norm2(&l));
        }
        (rr / self.matrix_norm, rl / self.matrix_norm)
    }
}

fn one_norm<T: Real>(m: &CMatrix<T>) -> T {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).fold(T::zero(), |a, i| a + m[(i, j)].norm()))
        .fold(T::zero(), T::max)
}

/// Spectrum with the automatic skin scale.
pub fn biorthogonal_spectrum<T: Real>(h: &ObcHamiltonian<T>) -> Result<BiorthogonalSpectrum<T>> {
    biorthogonal_spectrum_scaled(h, h.skin_scale)
}

pub fn biorthogonal_spectrum_scaled<T: Real>(
    h: &ObcHamiltonian<T>,
    scale: T,
) -> Result<BiorthogonalSpectrum<T>> {
    if !(scale.is_finite() && scale > T::zero()) {
        return Err(Error::InvalidParameter("cell scale must be positive".into()));
    }
    let hs = h.scaled_matrix(scale);
    let mut out = biorthogonal_decomposition(&hs)?;
    out.cell_scale = scale;
    out.n_cells = h.n_cells;
    out.site_cells = h.site_cells();
    Ok(out)
}

/// Left/right decomposition of an arbitrary square matrix; every site is its
/// own cell and no scaling is applied.
pub fn biorthogonal_decomposition<T: Real>(h: &CMatrix<T>) -> Result<BiorthogonalSpectrum<T>> {
    if let Some(b) = banded_decomposition(h)? {
        return Ok(b);
    }
    dense_decomposition(h)
}

/// Eigenvalues from QR, then both eigenvectors of each eigenvalue from one
/// banded LU of H − λI. `None` sends the caller to the dense path: wide
/// band, clustered eigenvalues, or an inverse iteration that did not settle.
fn banded_decomposition<T: Real>(h: &CMatrix<T>) -> Result<Option<BiorthogonalSpectrum<T>>> {
    let n = h.nrows();
    let (kl, ku) = band::bandwidths(h);
    if n < 16 || 4 * (kl + ku) > n {
        return Ok(None);
    }
    let hnorm = one_norm(h).max(T::min_positive_value());
    let values = eigen::eigenvalues(h)?;
    let tol = T::lit(1e-6) * hnorm;
    if clusters(&values, tol).iter().any(|c| c.len() > 1) {
        return Ok(None);
    }
    let tiny = T::epsilon() * hnorm;
    let accept = T::lit(1e-10) * hnorm;
    // fixed, structureless start vector
    let start: Vec<C<T>> = (0..n)
        .map(|j| cis(T::lit(2.399963229728653) * T::from_usize_lossy(j)))
        .collect();
    let mut rmat = CMatrix::zeros(n, n);
    let mut lmat = CMatrix::zeros(n, n);
    let mut worst = T::zero();
    for (i, &lam) in values.iter().enumerate() {
        let lu = band::BandLu::new(h, kl, ku, lam, tiny);
        let mut r = start.clone();
        let mut l = start.clone();
        for _ in 0..2 {
            r = unit(lu.solve(&r));
            l = unit(lu.solve_adjoint(&l));
        }
        let rr = residual(h, (kl, ku), &r, lam, false);
        let rl = residual(h, (kl, ku), &l, lam, true);
        if !(rr <= accept && rl <= accept) {
            return Ok(None);
        }
        worst = worst.max(rl / hnorm);
        let g = inner(&l, &r);
        if g.norm() < T::lit(1e-14) {
            return Err(Error::NearExceptionalPoint {
                cluster: vec![to_c64(lam)],
            });
        }
        let f = g.conj().inv();
        for k in 0..n {
            rmat[(k, i)] = r[k];
            lmat[(k, i)] = l[k] * f;
        }
    }
    let overlaps = (0..n)
        .map(|i| T::one() / norm2(&lmat.column(i)))
        .collect();
    Ok(Some(BiorthogonalSpectrum {
        eigenvalues: values,
        right: rmat,
        left: lmat,
        cell_scale: T::one(),
        n_cells: n,
        site_cells: (1..=n).collect(),
        pairing_residual: worst,
        overlaps,
        matrix_norm: hnorm,
        scaled: h.clone(),
    }))
}

fn unit<T: Real>(mut v: Vec<C<T>>) -> Vec<C<T>> {
    let nv = norm2(&v);
    if nv > T::zero() && nv.is_finite() {
        for x in v.iter_mut() {
            *x = *x / nv;
        }
    }
    v
}

/// ‖Hv − λv‖ (right) or ‖H†v − λ̄v‖ (left) for unit v, touching the band only.
fn residual<T: Real>(h: &CMatrix<T>, band: (usize, usize), v: &[C<T>], lam: C<T>, left: bool) -> T {
    let n = v.len();
    let (kl, ku) = band;
    let mut r = vec![C::<T>::zero(); n];
    if left {
        for i in 0..n {
            let row = h.row(i);
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                r[j] = r[j] + row[j].conj() * v[i];
            }
        }
        for (x, y) in r.iter_mut().zip(v) {
            *x = *x - lam.conj() * y;
        }
    } else {
        for i in 0..n {
            let row = h.row(i);
            let mut acc = -(lam * v[i]);
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                acc = acc + row[j] * v[j];
            }
            r[i] = acc;
        }
    }
    let out = norm2(&r);
    if out.is_finite() {
        out
    } else {
        T::infinity()
    }
}

/// Both eigenvector sets from the Schur form of H.
fn dense_decomposition<T: Real>(h: &CMatrix<T>) -> Result<BiorthogonalSpectrum<T>> {
    let n = h.nrows();
    let hnorm = one_norm(h).max(T::min_positive_value());
    let eigen::EigenPair { values, right: mut rmat, left: mut lmat } = eigen::eig_both(h)?;
    let tol = T::lit(1e-6) * hnorm;
    let ha = h.adjoint();
    let mut worst = T::zero();
    for i in 0..n {
        let l = lmat.column(i);
        let r: Vec<C<T>> = ha.matvec(&l).iter().zip(&l).map(|(x, y)| *x - values[i].conj() * y).collect();
        worst = worst.max(norm2(&r));
    }

    for cluster in clusters(&values, tol) {
        biorthonormalize(&mut rmat, &mut lmat, &cluster, &values)?;
    }
    let overlaps = (0..n)
        .map(|i| T::one() / norm2(&lmat.column(i)))
        .collect();
    Ok(BiorthogonalSpectrum {
        eigenvalues: values,
        right: rmat,
        left: lmat,
        cell_scale: T::one(),
        n_cells: n,
        site_cells: (1..=n).collect(),
        pairing_residual: worst / hnorm,
        overlaps,
        matrix_norm: hnorm,
        scaled: h.clone(),
    })
}

/// Single-linkage groups of eigenvalues closer than `tol`.
fn clusters<T: Real>(values: &[C<T>], tol: T) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].re.partial_cmp(&values[b].re).unwrap());
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if values[j].re - values[i].re > tol {
                break;
            }
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Makes L_c†R_c = I inside a cluster via L_c ← L_c G^{−†}. If the raw
/// vectors are too close to parallel (degenerate eigenvalues), both sides
/// are first replaced by orthonormal bases of their spans.
fn biorthonormalize<T: Real>(
    r: &mut CMatrix<T>,
    l: &mut CMatrix<T>,
    idx: &[usize],
    values: &[C<T>],
) -> Result<()> {
    let near_ep = || Error::NearExceptionalPoint {
        cluster: idx.iter().map(|&i| to_c64(values[i])).collect(),
    };
    if idx.len() == 1 {
        let i = idx[0];
        let g = inner(&l.column(i), &r.column(i));
        if g.norm() < T::lit(1e-14) {
            return Err(near_ep());
        }
        let f = g.conj().inv();
        for k in 0..l.nrows() {
            l[(k, i)] = l[(k, i)] * f;
        }
        return Ok(());
    }
    let tol = T::lit(1e-10);
    let gram = |r: &CMatrix<T>, l: &CMatrix<T>| {
        CMatrix::from_fn(idx.len(), idx.len(), |a, b| inner(&l.column(idx[a]), &r.column(idx[b])))
    };
    let mut g = gram(r, l);
    let ginv = match invert(&g, tol) {
        Some(x) => x,
        None => {
            orthonormalize(r, idx).ok_or_else(near_ep)?;
            orthonormalize(l, idx).ok_or_else(near_ep)?;
            g = gram(r, l);
            invert(&g, tol).ok_or_else(near_ep)?
        }
    };
    // L_c ← L_c (G^{−1})†
    let lc: Vec<Vec<C<T>>> = idx.iter().map(|&i| l.column(i)).collect();
    for (b, &ib) in idx.iter().enumerate() {
        let mut col = vec![C::zero(); l.nrows()];
        for (a, la) in lc.iter().enumerate() {
            let f = ginv[(b, a)].conj();
            for (c, x) in col.iter_mut().zip(la) {
                *c = *c + *x * f;
            }
        }
        l.set_column(ib, &col);
    }
    Ok(())
}

/// Modified Gram-Schmidt on the listed columns; `None` if rank-deficient.
fn orthonormalize<T: Real>(m: &mut CMatrix<T>, idx: &[usize]) -> Option<()> {
    let mut done: Vec<Vec<C<T>>> = Vec::new();
    for &i in idx {
        let mut v = m.column(i);
        for _ in 0..2 {
            for q in &done {
                let p = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x = *x - p * y;
                }
            }
        }
        let nv = norm2(&v);
        if nv < T::lit(1e-8) {
            return None;
        }
        for x in v.iter_mut() {
            *x = *x / nv;
        }
        m.set_column(i, &v);
        done.push(v);
    }
    Some(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Bulk,
    EdgeLeft,
    EdgeRight,
}

impl ModeKind {
    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Bulk => "bulk",
            ModeKind::EdgeLeft => "edge_left",
            ModeKind::EdgeRight => "edge_right",
        }
    }

    pub fn is_edge(self) -> bool {
        self != ModeKind::Bulk
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeLabel<T> {
    pub kind: ModeKind,
    /// max(left_weight, right_weight)
    pub boundary_weight: T,
    pub left_weight: T,
    pub right_weight: T,
}

pub fn default_window(n_cells: usize) -> usize {
    (n_cells / 20).max(3)
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

pub fn classify_modes<T: Real>(
    spectrum: &BiorthogonalSpectrum<T>,
    window_cells: usize,
    threshold: T,
) -> Vec<ModeLabel<T>> {
    let n = spectrum.n_cells;
    let w = window_cells.max(1).min(n);
    (0..spectrum.len())
        .map(|i| {
            let rho = spectrum.cell_abs_density(i);
            label_from_density(&rho, w, threshold)
        })
        .collect()
}

/// Classifier on a per-cell density |L|·|R|.
pub fn label_from_density<T: Real>(rho: &[T], window_cells: usize, threshold: T) -> ModeLabel<T> {
    let n = rho.len();
    let w = window_cells.min(n);
    let total = rho.iter().fold(T::zero(), |a, b| a + *b);
    let (lw, rw) = if total > T::zero() {
        let l = rho[..w].iter().fold(T::zero(), |a, b| a + *b) / total;
        let r = rho[n - w..].iter().fold(T::zero(), |a, b| a + *b) / total;
        (l, r)
    } else {
        (T::zero(), T::zero())
    };
    let kind = if lw >= threshold && lw >= rw {
        ModeKind::EdgeLeft
    } else if rw >= threshold {
        ModeKind::EdgeRight
    } else {
        ModeKind::Bulk
    };
    ModeLabel {
        kind,
        boundary_weight: lw.max(rw),
        left_weight: lw,
        right_weight: rw,
    }
}

/// P = Σ_α [1 − (1/N) Re(Σ_n n ρ_α(n) / Σ_n ρ_α(n))] over the selected modes.
pub fn biorthogonal_polarization<T: Real>(
    spectrum: &BiorthogonalSpectrum<T>,
    selected_modes: &[usize],
    n_cells: usize,
) -> Result<T> {
    if selected_modes.is_empty() {
        return Err(Error::NoModesSelected);
    }
    if n_cells != spectrum.n_cells {
        return Err(Error::InvalidParameter(format!(
            "spectrum has {} cells, asked for {n_cells}",
            spectrum.n_cells
        )));
    }
    let mut p = T::zero();
    for &a in selected_modes {
        if a >= spectrum.len() {
            return Err(Error::InvalidParameter(format!("mode index {a} out of range")));
        }
        if spectrum.overlaps[a] < T::lit(1e-12) {
            return Err(Error::BiorthogonalBreakdown {
                overlap: spectrum.overlaps[a].as_f64(),
            });
        }
        p = p + mode_polarization(&spectrum.cell_density(a));
    }
    Ok(p)
}

/// 1 − (1/N) Re(Σ n ρ(n) / Σ ρ(n)) for one mode's cell density.
pub fn mode_polarization<T: Real>(rho: &[C<T>]) -> T {
    let n = rho.len();
    let mut num = C::<T>::zero();
    let mut den = C::<T>::zero();
    for (k, r) in rho.iter().enumerate() {
        num = num + *r * T::from_usize_lossy(k + 1);
        den = den + *r;
    }
    T::one() - (num / den).re / T::from_usize_lossy(n)
}

/// Energy the isolated A-sublattice mode sits at: dz of the open chain.
/// Only the x-open chains have one.
pub fn expected_edge_energy<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>) -> Option<C<T>> {
    match spec.variant {
        Variant::Ssh1d => Some(re(-spec.delta_onsite)),
        Variant::ChernXObc => transverse_k.map(|ky| re(-spec.delta_onsite * crate::scalar::sin_cos(ky).1)),
        _ => None,
    }
}

/// All edge-labelled modes, plus the mode nearest `expected` when no
/// selected mode sits within `tol` of it.
pub fn select_edge_modes<T: Real>(
    spectrum: &BiorthogonalSpectrum<T>,
    labels: &[ModeLabel<T>],
    expected: Option<C<T>>,
    tol: T,
) -> Vec<usize> {
    let mut sel: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].kind.is_edge()).collect();
    if let Some(e) = expected {
        let near = sel.iter().any(|&i| (spectrum.eigenvalues[i] - e).norm() <= tol);
        if !near {
            let best = (0..spectrum.len()).min_by(|&a, &b| {
                let da = (spectrum.eigenvalues[a] - e).norm();
                let db = (spectrum.eigenvalues[b] - e).norm();
                da.partial_cmp(&db).unwrap()
            });
            if let Some(b) = best {
                if !sel.contains(&b) {
                    sel.push(b);
                    sel.sort_unstable();
                }
            }
        }
    }
    sel
}
