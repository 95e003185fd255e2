//! Uniform grids and cell-average fields with ghost layers.
//!
//! Storage is a flat row-major buffer with ghost padding on every side.
//! In 2D the x index `i` is the slow axis and the y index `j` the fast one;
//! interior indices are offset-based so stencils read shifted slices.

use crate::error::{Error, Result};

/// Spatial dimensionality of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

/// Boundary condition applied when filling ghost cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet(f64),
}

/// A uniform grid of `n` cells per axis with `ghost` padding cells.
///
/// The cell width `h` is identical on both axes in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: Dim,
    n: usize,
    lo: f64,
    hi: f64,
    h: f64,
    ghost: usize,
}

impl Grid {
    pub fn new_1d(n: usize, bounds: (f64, f64), ghost: usize) -> Result<Self> {
        Self::new(Dim::One, n, bounds, ghost)
    }

    pub fn new_2d(n: usize, bounds: (f64, f64), ghost: usize) -> Result<Self> {
        Self::new(Dim::Two, n, bounds, ghost)
    }

    pub fn new(dim: Dim, n: usize, bounds: (f64, f64), ghost: usize) -> Result<Self> {
        let (lo, hi) = bounds;
        if n == 0 || !(hi > lo) {
            return Err(Error::InvalidConfig(format!(
                "grid needs n > 0 and hi > lo, got n = {n}, bounds = [{lo}, {hi}]"
            )));
        }
        Ok(Grid {
            dim,
            n,
            lo,
            hi,
            h: (hi - lo) / n as f64,
            ghost,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Interior cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Domain extent per axis.
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn ghost(&self) -> usize {
        self.ghost
    }

    /// Total cells per axis including ghosts.
    pub fn n_tot(&self) -> usize {
        self.n + 2 * self.ghost
    }

    /// Total storage length of a field on this grid.
    pub fn storage_len(&self) -> usize {
        match self.dim {
            Dim::One => self.n_tot(),
            Dim::Two => self.n_tot() * self.n_tot(),
        }
    }

    /// Number of interior cells (`N` in 1D, `N x N` in 2D).
    pub fn interior_len(&self) -> usize {
        match self.dim {
            Dim::One => self.n,
            Dim::Two => self.n * self.n,
        }
    }

    /// Center coordinate of interior cell `i` along one axis.
    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h
    }

    /// Center coordinate allowing ghost indices.
    pub fn center_at(&self, i: isize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h
    }

    /// Face coordinate `x_{i+1/2}` along one axis (`i` may be -1 for the
    /// left boundary face).
    pub fn face(&self, i: isize) -> f64 {
        self.lo + (i as f64 + 1.0) * self.h
    }

    /// Storage index of interior-relative cell `i` (1D). Ghosts use
    /// negative `i` or `i >= n`.
    #[inline]
    pub fn idx1(&self, i: isize) -> usize {
        (i + self.ghost as isize) as usize
    }

    /// Storage index of interior-relative cell `(i, j)` (2D).
    #[inline]
    pub fn idx2(&self, i: isize, j: isize) -> usize {
        let g = self.ghost as isize;
        ((i + g) * self.n_tot() as isize + (j + g)) as usize
    }

    /// Grid with the same extent but a different ghost width.
    pub fn with_ghost(&self, ghost: usize) -> Grid {
        Grid { ghost, ..self.clone() }
    }

    pub fn same_extent(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.lo == other.lo && self.hi == other.hi
    }
}

/// Cell-average field over a [`Grid`], including ghost storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid,
    data: Vec<f64>,
    /// Simulation time the averages correspond to.
    pub time: f64,
}

impl CellField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.storage_len();
        CellField {
            grid,
            data: vec![0.0; len],
            time: 0.0,
        }
    }

    /// Builds a 1D field from interior values.
    pub fn from_interior_1d(grid: Grid, interior: &[f64]) -> Result<Self> {
        if grid.dim() != Dim::One || interior.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "expected {} interior values for a 1D field, got {}",
                grid.n(),
                interior.len()
            )));
        }
        let mut f = CellField::zeros(grid);
        for (i, v) in interior.iter().enumerate() {
            let ix = f.grid.idx1(i as isize);
            f.data[ix] = *v;
        }
        Ok(f)
    }

    /// Builds a 2D field from interior values in i-major order.
    pub fn from_interior_2d(grid: Grid, interior: &[f64]) -> Result<Self> {
        if grid.dim() != Dim::Two || interior.len() != grid.n() * grid.n() {
            return Err(Error::GridMismatch(format!(
                "expected {} interior values for a 2D field, got {}",
                grid.n() * grid.n(),
                interior.len()
            )));
        }
        let mut f = CellField::zeros(grid);
        let n = f.grid.n();
        for i in 0..n {
            for j in 0..n {
                let ix = f.grid.idx2(i as isize, j as isize);
                f.data[ix] = interior[i * n + j];
            }
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get1(&self, i: isize) -> f64 {
        self.data[self.grid.idx1(i)]
    }

    #[inline]
    pub fn get2(&self, i: isize, j: isize) -> f64 {
        self.data[self.grid.idx2(i, j)]
    }

    #[inline]
    pub fn set1(&mut self, i: isize, v: f64) {
        let ix = self.grid.idx1(i);
        self.data[ix] = v;
    }

    #[inline]
    pub fn set2(&mut self, i: isize, j: isize, v: f64) {
        let ix = self.grid.idx2(i, j);
        self.data[ix] = v;
    }

    /// Interior values in i-major order.
    pub fn interior_values(&self) -> Vec<f64> {
        let n = self.grid.n();
        match self.grid.dim() {
            Dim::One => (0..n).map(|i| self.get1(i as isize)).collect(),
            Dim::Two => {
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        out.push(self.get2(i as isize, j as isize));
                    }
                }
                out
            }
        }
    }

    /// Applies `f` to every interior value.
    pub fn for_each_interior(&self, mut f: impl FnMut(f64)) {
        let n = self.grid.n() as isize;
        match self.grid.dim() {
            Dim::One => {
                for i in 0..n {
                    f(self.get1(i));
                }
            }
            Dim::Two => {
                for i in 0..n {
                    for j in 0..n {
                        f(self.get2(i, j));
                    }
                }
            }
        }
    }

    /// Minimum and maximum over interior cells.
    pub fn interior_min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        self.for_each_interior(|v| {
            lo = lo.min(v);
            hi = hi.max(v);
        });
        (lo, hi)
    }

    pub fn interior_is_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_interior(|v| ok &= v.is_finite());
        ok
    }

    /// `h^d` times the sum of interior values; ghosts never contribute.
    pub fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_interior(|v| s += v);
        let h = self.grid.h();
        match self.grid.dim() {
            Dim::One => h * s,
            Dim::Two => h * h * s,
        }
    }

    /// Fills the ghost layer according to `bc`.
    ///
    /// In 2D the two axes are filled by sequential 1D passes (x then y), so
    /// corner ghosts end up consistent for both boundary kinds.
    pub fn fill_ghosts(&mut self, bc: BoundaryCondition) {
        let grid = self.grid.clone();
        fill_ghosts_raw(&grid, &mut self.data, bc);
    }

    /// `self + scale * other` over the whole storage (interior and ghosts).
    pub fn axpy(&self, scale: f64, other: &CellField) -> CellField {
        debug_assert_eq!(self.data.len(), other.data.len());
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(other.data.iter()) {
            *o += scale * v;
        }
        out
    }

    pub fn axpy_in_place(&mut self, scale: f64, other: &CellField) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (o, v) in self.data.iter_mut().zip(other.data.iter()) {
            *o += scale * v;
        }
    }
}

/// Ghost fill on a raw buffer in the layout of `grid`; also used for
/// auxiliary per-cell arrays (limiter factors, troubled masks) that wrap
/// like the solution. For those, Dirichlet problems fill with the given
/// constant rather than the boundary value.
pub(crate) fn fill_ghosts_raw(grid: &Grid, data: &mut [f64], bc: BoundaryCondition) {
    let g = grid.ghost();
    if g == 0 {
        return;
    }
    let n = grid.n() as isize;
    let gi = g as isize;
    match grid.dim() {
        Dim::One => match bc {
            BoundaryCondition::Periodic => {
                for k in 0..gi {
                    data[grid.idx1(-gi + k)] = data[grid.idx1(n - gi + k)];
                    data[grid.idx1(n + k)] = data[grid.idx1(k)];
                }
            }
            BoundaryCondition::Dirichlet(c) => {
                for k in 0..gi {
                    data[grid.idx1(-gi + k)] = c;
                    data[grid.idx1(n + k)] = c;
                }
            }
        },
        Dim::Two => {
            let n_tot = grid.n_tot() as isize;
            // Pass 1: x-direction ghosts, every row.
            for j in -gi..n_tot - gi {
                for k in 0..gi {
                    match bc {
                        BoundaryCondition::Periodic => {
                            data[grid.idx2(-gi + k, j)] = data[grid.idx2(n - gi + k, j)];
                            data[grid.idx2(n + k, j)] = data[grid.idx2(k, j)];
                        }
                        BoundaryCondition::Dirichlet(c) => {
                            data[grid.idx2(-gi + k, j)] = c;
                            data[grid.idx2(n + k, j)] = c;
                        }
                    }
                }
            }
            // Pass 2: y-direction ghosts, every column (corners pick up the
            // pass-1 values).
            for i in -gi..n_tot - gi {
                for k in 0..gi {
                    match bc {
                        BoundaryCondition::Periodic => {
                            data[grid.idx2(i, -gi + k)] = data[grid.idx2(i, n - gi + k)];
                            data[grid.idx2(i, n + k)] = data[grid.idx2(i, k)];
                        }
                        BoundaryCondition::Dirichlet(c) => {
                            data[grid.idx2(i, -gi + k)] = c;
                            data[grid.idx2(i, n + k)] = c;
                        }
                    }
                }
            }
        }
    }
}

/// Applies a 1D stencil along a flat buffer: `dst[c] = sum_k w[k] * src[c + first + k]`.
///
/// Cells whose kernel would leave the buffer are set to zero; callers size
/// the ghost layer so every consumed cell is valid.
pub(crate) fn apply_stencil_1d(src: &[f64], dst: &mut [f64], first: isize, w: &[f64]) {
    let len = src.len() as isize;
    let last = first + w.len() as isize - 1;
    let lo = (-first).max(0);
    let hi = (len - last.max(0)).min(len);
    dst[..lo as usize].fill(0.0);
    dst[hi.max(lo) as usize..].fill(0.0);
    for c in lo..hi {
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            acc += wk * src[(c + first) as usize + k];
        }
        dst[c as usize] = acc;
    }
}

/// Applies a 1D stencil along one axis of a square 2D buffer
/// (`axis` 0 = slow/x index, 1 = fast/y index).
pub(crate) fn apply_stencil_2d(
    src: &[f64],
    dst: &mut [f64],
    n_tot: usize,
    axis: usize,
    first: isize,
    w: &[f64],
) {
    let nt = n_tot as isize;
    let last = first + w.len() as isize - 1;
    let lo = (-first).max(0) as usize;
    let hi = ((nt - last.max(0)).min(nt)).max(lo as isize) as usize;
    dst.fill(0.0);
    match axis {
        0 => {
            for i in lo..hi {
                let row = i * n_tot;
                for (k, wk) in w.iter().enumerate() {
                    let srow = ((i as isize + first) as usize + k) * n_tot;
                    let (d, s) = (&mut dst[row..row + n_tot], &src[srow..srow + n_tot]);
                    for (dv, sv) in d.iter_mut().zip(s.iter()) {
                        *dv += wk * sv;
                    }
                }
            }
        }
        1 => {
            for i in 0..n_tot {
                let row = i * n_tot;
                for c in lo..hi {
                    let mut acc = 0.0;
                    for (k, wk) in w.iter().enumerate() {
                        acc += wk * src[row + (c as isize + first) as usize + k];
                    }
                    dst[row + c] = acc;
                }
            }
        }
        _ => unreachable!("axis must be 0 or 1"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_1d(n: usize, g: usize, vals: &[f64]) -> CellField {
        let grid = Grid::new_1d(n, (0.0, 1.0), g).unwrap();
        CellField::from_interior_1d(grid, vals).unwrap()
    }

    #[test]
    fn periodic_ghosts_1d() {
        let mut f = field_1d(4, 2, &[1.0, 2.0, 3.0, 4.0]);
        f.fill_ghosts(BoundaryCondition::Periodic);
        assert_eq!(f.get1(-2), 3.0);
        assert_eq!(f.get1(-1), 4.0);
        assert_eq!(f.get1(4), 1.0);
        assert_eq!(f.get1(5), 2.0);
    }

    #[test]
    fn dirichlet_ghosts_are_constant() {
        let mut f = field_1d(4, 2, &[1.0, 2.0, 3.0, 4.0]);
        f.fill_ghosts(BoundaryCondition::Dirichlet(0.0));
        for i in [-2, -1, 4, 5] {
            assert_eq!(f.get1(i), 0.0);
        }
    }

    #[test]
    fn periodic_corner_ghosts_2d() {
        let n = 4;
        let grid = Grid::new_2d(n, (0.0, 1.0), 2).unwrap();
        let vals: Vec<f64> = (0..n * n).map(|k| k as f64).collect();
        let mut f = CellField::from_interior_2d(grid, &vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        // Corner ghost (-1,-1) equals interior (N-1,N-1).
        assert_eq!(f.get2(-1, -1), f.get2(3, 3));
        assert_eq!(f.get2(-2, 4), f.get2(2, 0));
        assert_eq!(f.get2(5, 5), f.get2(1, 1));
    }

    #[test]
    fn fill_ghosts_is_idempotent() {
        let n = 4;
        let grid = Grid::new_2d(n, (0.0, 1.0), 2).unwrap();
        let vals: Vec<f64> = (0..n * n).map(|k| (k as f64).sin()).collect();
        let mut f = CellField::from_interior_2d(grid, &vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let once = f.clone();
        f.fill_ghosts(BoundaryCondition::Periodic);
        assert_eq!(once, f);
    }

    #[test]
    fn total_mass_constant_fields() {
        let f = field_1d(4, 1, &[1.0; 4]);
        assert_eq!(f.total_mass(), 1.0);

        let grid = Grid::new_2d(2, (0.0, 1.0), 1).unwrap();
        let f = CellField::from_interior_2d(grid, &[2.0; 4]).unwrap();
        assert!((f.total_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn total_mass_ignores_ghosts() {
        let mut f = field_1d(4, 2, &[1.0, 2.0, 3.0, 4.0]);
        let before = f.total_mass();
        f.fill_ghosts(BoundaryCondition::Dirichlet(100.0));
        assert_eq!(f.total_mass(), before);
    }

    #[test]
    fn stencil_application_matches_direct_sum() {
        let src = [1.0, 2.0, 4.0, 8.0, 16.0];
        let mut dst = [0.0; 5];
        apply_stencil_1d(&src, &mut dst, -1, &[0.25, 0.5, 0.25]);
        assert_eq!(dst[0], 0.0);
        assert_eq!(dst[4], 0.0);
        assert_eq!(dst[1], 0.25 * 1.0 + 0.5 * 2.0 + 0.25 * 4.0);
        assert_eq!(dst[2], 0.25 * 2.0 + 0.5 * 4.0 + 0.25 * 8.0);
    }

    #[test]
    fn stencil_2d_axes_are_consistent() {
        let n_tot = 6;
        let src: Vec<f64> = (0..n_tot * n_tot).map(|k| (k as f64) * 0.5).collect();
        let w = [1.0, -2.0, 1.0];
        let mut along_i = vec![0.0; src.len()];
        let mut along_j = vec![0.0; src.len()];
        apply_stencil_2d(&src, &mut along_i, n_tot, 0, -1, &w);
        apply_stencil_2d(&src, &mut along_j, n_tot, 1, -1, &w);
        // interior check against direct indexing
        for i in 1..n_tot - 1 {
            for j in 1..n_tot - 1 {
                let d = |ii: usize, jj: usize| src[ii * n_tot + jj];
                let ei = d(i - 1, j) - 2.0 * d(i, j) + d(i + 1, j);
                let ej = d(i, j - 1) - 2.0 * d(i, j) + d(i, j + 1);
                assert!((along_i[i * n_tot + j] - ei).abs() < 1e-14);
                assert!((along_j[i * n_tot + j] - ej).abs() < 1e-14);
            }
        }
    }
}
