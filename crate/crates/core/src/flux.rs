//! Numerical flux function, face-flux evaluation, and the semi-discrete
//! spatial operator in one and two dimensions.
//!
//! Face integrals are stored pre-divided by the cell width (face-averaged
//! fluxes), so the divergence uses a single `1/h` in both dimensions.

use crate::error::{Error, Result};
use crate::mesh::{apply_stencil_1d, apply_stencil_2d, CellField, Dim, Grid};
use crate::stencil::{
    check_degree, gauss_legendre_rule, gauss_lobatto_rule, gauss_point_node_stencils,
    left_face_stencil, lobatto_point_node_stencils, midpoint_stencil, transverse_integral_stencil,
    QuadratureRule, Stencil,
};

/// Advection velocity: uniform, or the rigid-rotation field of the slotted
/// cylinder test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityField {
    Constant { vx: f64, vy: f64 },
    /// `(v_x, v_y) = (-y, x)`.
    Rotation,
}

impl VelocityField {
    pub fn constant_1d(a: f64) -> Self {
        VelocityField::Constant { vx: a, vy: 0.0 }
    }

    #[inline]
    pub fn at(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            VelocityField::Constant { vx, vy } => (*vx, *vy),
            VelocityField::Rotation => (-y, x),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, VelocityField::Constant { .. })
    }

    /// Upper bound of |v_axis| over the closed domain.
    pub fn axis_speed_bound(&self, grid: &Grid, axis: usize) -> f64 {
        match self {
            VelocityField::Constant { vx, vy } => {
                if axis == 0 {
                    vx.abs()
                } else {
                    vy.abs()
                }
            }
            VelocityField::Rotation => {
                // |v_x| = |y|, |v_y| = |x|; both bounded by the extent.
                let _ = axis;
                let (lo, hi) = grid.bounds();
                lo.abs().max(hi.abs())
            }
        }
    }

    /// Upper bound of `|v_x| + |v_y|` over the domain, which sets the
    /// time step `dt = C h / speed`.
    pub fn speed_sum_bound(&self, grid: &Grid) -> f64 {
        match grid.dim() {
            Dim::One => self.axis_speed_bound(grid, 0),
            Dim::Two => self.axis_speed_bound(grid, 0) + self.axis_speed_bound(grid, 1),
        }
    }
}

/// Dissipation coefficient choice for the flux of a spatially varying
/// velocity: the face-local |v| (exact upwinding) or the per-axis global
/// bound (the strict Lax-Friedrichs form).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMode {
    Local,
    Global,
}

/// Flux function `f(u) = v u` for linear advection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxFunction {
    pub velocity: VelocityField,
    pub alpha_mode: AlphaMode,
}

impl FluxFunction {
    pub fn advection_1d(a: f64) -> Self {
        FluxFunction {
            velocity: VelocityField::constant_1d(a),
            alpha_mode: AlphaMode::Local,
        }
    }

    pub fn advection_2d(vx: f64, vy: f64) -> Self {
        FluxFunction {
            velocity: VelocityField::Constant { vx, vy },
            alpha_mode: AlphaMode::Local,
        }
    }

    pub fn rotation() -> Self {
        FluxFunction {
            velocity: VelocityField::Rotation,
            alpha_mode: AlphaMode::Local,
        }
    }
}

/// Monotone flux `F(uL, uR) = 1/2 [f(uL) + f(uR) - alpha (uR - uL)]` for
/// `f(u) = v u`. With `alpha = |v|` this is the upwind flux.
#[inline]
pub fn numerical_flux(u_left: f64, u_right: f64, v: f64, alpha: f64) -> f64 {
    0.5 * (v * (u_left + u_right) - alpha * (u_right - u_left))
}

/// All reconstruction stencils and quadrature rules for one degree,
/// precomputed at scheme assembly.
#[derive(Debug, Clone)]
pub struct DegreeKernel {
    pub p: usize,
    /// Node at the left face, `P_i(-1/2)`.
    pub left: Stencil,
    /// Node at the right face (reversed left stencil).
    pub right: Stencil,
    pub midpoint: Stencil,
    pub transverse_integral: Stencil,
    pub gauss: QuadratureRule,
    /// Node stencils at each Gauss-Legendre point, in point order.
    pub gauss_nodes: Vec<Stencil>,
    pub lobatto: QuadratureRule,
    /// Node stencils at each Gauss-Lobatto point, in point order.
    pub lobatto_nodes: Vec<Stencil>,
    /// Reduced CFL factor (minimum Gauss-Lobatto weight).
    pub c_mpp: f64,
}

impl DegreeKernel {
    pub fn new(p: usize) -> Result<Self> {
        check_degree(p)?;
        let left = left_face_stencil(p);
        let right = left.reversed();
        let (lobatto, c_mpp) = gauss_lobatto_rule(p);
        Ok(DegreeKernel {
            p,
            right,
            midpoint: midpoint_stencil(p),
            transverse_integral: transverse_integral_stencil(p),
            gauss: gauss_legendre_rule(p),
            gauss_nodes: gauss_point_node_stencils(p),
            lobatto,
            lobatto_nodes: lobatto_point_node_stencils(p),
            c_mpp,
            left,
        })
    }

    /// Reach of the face-node reconstruction stencils.
    pub fn node_reach(&self) -> usize {
        self.left.reach()
    }
}

fn stencil_params(s: &Stencil) -> (isize, &[f64]) {
    (s.first_offset() as isize, s.weights())
}

// ---------------------------------------------------------------------------
// Face-flux storage
// ---------------------------------------------------------------------------

/// Face-averaged numerical fluxes bounding each cell.
///
/// Arrays use the same ghost-padded layout as cell fields: the x entry at
/// cell `(i, j)` is the flux through face `(i+1/2, j)`, the y entry the flux
/// through `(i, j+1/2)`. In 1D only `x` is populated.
#[derive(Debug, Clone)]
pub struct FaceFluxField {
    grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FaceFluxField {
    pub fn zeros(grid: &Grid) -> Self {
        let len = grid.storage_len();
        FaceFluxField {
            grid: grid.clone(),
            x: vec![0.0; len],
            y: match grid.dim() {
                Dim::One => Vec::new(),
                Dim::Two => vec![0.0; len],
            },
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Flux through 1D face `i+1/2` (`i` from -1 to n-1).
    pub fn face_1d(&self, i: isize) -> f64 {
        self.x[self.grid.idx1(i)]
    }

    /// Flux through x-face `(i+1/2, j)`.
    pub fn x_face(&self, i: isize, j: isize) -> f64 {
        self.x[self.grid.idx2(i, j)]
    }

    /// Flux through y-face `(i, j+1/2)`.
    pub fn y_face(&self, i: isize, j: isize) -> f64 {
        self.y[self.grid.idx2(i, j)]
    }
}

/// `L = -(1/h) * (flux differences)` over interior cells.
pub fn residual_from_faces(faces: &FaceFluxField) -> CellField {
    let grid = faces.grid.clone();
    let h = grid.h();
    let n = grid.n() as isize;
    let mut out = CellField::zeros(grid.clone());
    match grid.dim() {
        Dim::One => {
            for i in 0..n {
                let d = faces.x[grid.idx1(i)] - faces.x[grid.idx1(i - 1)];
                out.set1(i, -d / h);
            }
        }
        Dim::Two => {
            for i in 0..n {
                for j in 0..n {
                    let dx = faces.x[grid.idx2(i, j)] - faces.x[grid.idx2(i - 1, j)];
                    let dy = faces.y[grid.idx2(i, j)] - faces.y[grid.idx2(i, j - 1)];
                    out.set2(i, j, -(dx + dy) / h);
                }
            }
        }
    }
    out
}

/// Spec alias: 2D semi-discrete operator from assembled face integrals.
pub fn residual_2d(faces: &FaceFluxField) -> CellField {
    residual_from_faces(faces)
}

// ---------------------------------------------------------------------------
// Node reconstruction
// ---------------------------------------------------------------------------

/// Reconstructed node values of a 1D field, ghost-padded layout.
#[derive(Debug, Clone)]
pub struct Nodes1d {
    /// `P_i(-1/2)` per cell.
    pub left: Vec<f64>,
    /// `P_i(+1/2)` per cell.
    pub right: Vec<f64>,
    /// Centroid values (centroid limiter node set).
    pub midpoint: Option<Vec<f64>>,
    /// Values at interior Gauss-Lobatto points (full Zhang-Shu node set).
    pub lobatto: Option<Vec<Vec<f64>>>,
}

/// Which extra node values (beyond the flux nodes) a reconstruction carries
/// for the limiter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaNodes {
    None,
    Centroid,
    GaussLobatto,
}

pub fn reconstruct_nodes_1d(field: &CellField, kern: &DegreeKernel, extras: ThetaNodes) -> Nodes1d {
    let src = field.raw();
    let mut left = vec![0.0; src.len()];
    let mut right = vec![0.0; src.len()];
    let (f, w) = stencil_params(&kern.left);
    apply_stencil_1d(src, &mut left, f, w);
    let (f, w) = stencil_params(&kern.right);
    apply_stencil_1d(src, &mut right, f, w);
    let midpoint = matches!(extras, ThetaNodes::Centroid).then(|| {
        let mut m = vec![0.0; src.len()];
        let (f, w) = stencil_params(&kern.midpoint);
        apply_stencil_1d(src, &mut m, f, w);
        m
    });
    let lobatto = matches!(extras, ThetaNodes::GaussLobatto).then(|| {
        kern.lobatto_nodes
            .iter()
            .map(|s| {
                let mut m = vec![0.0; src.len()];
                let (f, w) = stencil_params(s);
                apply_stencil_1d(src, &mut m, f, w);
                m
            })
            .collect()
    });
    Nodes1d {
        left,
        right,
        midpoint,
        lobatto,
    }
}

/// Reconstructed face-node values of a 2D field.
///
/// `x_minus[k]` holds `P_{i,j}(-1/2, eta_k)` per cell — the trace on the
/// cell's own left x-face at transverse quadrature point `eta_k` — and
/// `x_plus[k]` the right-face trace; `y_*` mirror this along y. For the
/// transverse method there is a single midpoint node per face (`k = 0`).
#[derive(Debug, Clone)]
pub struct FaceNodes2d {
    pub x_minus: Vec<Vec<f64>>,
    pub x_plus: Vec<Vec<f64>>,
    pub y_minus: Vec<Vec<f64>>,
    pub y_plus: Vec<Vec<f64>>,
    pub centroid: Option<Vec<f64>>,
    /// Gauss-Lobatto trace values per direction (full node set): for each of
    /// the K flux traces, values at every Lobatto point along the trace.
    pub lobatto_traces: Option<Vec<Vec<f64>>>,
}

impl FaceNodes2d {
    /// All node arrays, for extrema scans and limiting.
    pub fn all_arrays_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut v: Vec<&mut Vec<f64>> = Vec::new();
        v.extend(self.x_minus.iter_mut());
        v.extend(self.x_plus.iter_mut());
        v.extend(self.y_minus.iter_mut());
        v.extend(self.y_plus.iter_mut());
        if let Some(c) = self.centroid.as_mut() {
            v.push(c);
        }
        if let Some(t) = self.lobatto_traces.as_mut() {
            v.extend(t.iter_mut());
        }
        v
    }

    pub fn all_arrays(&self) -> Vec<&Vec<f64>> {
        let mut v: Vec<&Vec<f64>> = Vec::new();
        v.extend(self.x_minus.iter());
        v.extend(self.x_plus.iter());
        v.extend(self.y_minus.iter());
        v.extend(self.y_plus.iter());
        if let Some(c) = self.centroid.as_ref() {
            v.push(c);
        }
        if let Some(t) = self.lobatto_traces.as_ref() {
            v.extend(t.iter());
        }
        v
    }
}

/// 2D face-integration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxReconstruction {
    GaussLegendre,
    Transverse,
}

/// Two-stage tensor reconstruction of all face nodes: a line-average pass
/// along the face-normal axis, then a node pass along the face.
pub fn reconstruct_face_nodes_2d(
    field: &CellField,
    kern: &DegreeKernel,
    method: FluxReconstruction,
    extras: ThetaNodes,
) -> FaceNodes2d {
    let grid = field.grid();
    let nt = grid.n_tot();
    let src = field.raw();
    let len = src.len();
    let mut line_m = vec![0.0; len];
    let mut line_p = vec![0.0; len];
    let (lf, lw) = stencil_params(&kern.left);
    let (rf, rw) = stencil_params(&kern.right);

    let node_pass = |line: &[f64], out: &mut Vec<Vec<f64>>, axis: usize| match method {
        FluxReconstruction::GaussLegendre => {
            for s in &kern.gauss_nodes {
                let mut buf = vec![0.0; len];
                let (f, w) = stencil_params(s);
                apply_stencil_2d(line, &mut buf, nt, axis, f, w);
                out.push(buf);
            }
        }
        FluxReconstruction::Transverse => {
            let mut buf = vec![0.0; len];
            let (f, w) = stencil_params(&kern.midpoint);
            apply_stencil_2d(line, &mut buf, nt, axis, f, w);
            out.push(buf);
        }
    };

    let mut x_minus = Vec::new();
    let mut x_plus = Vec::new();
    apply_stencil_2d(src, &mut line_m, nt, 0, lf, lw);
    apply_stencil_2d(src, &mut line_p, nt, 0, rf, rw);
    node_pass(&line_m, &mut x_minus, 1);
    node_pass(&line_p, &mut x_plus, 1);

    let mut lobatto_traces = matches!(extras, ThetaNodes::GaussLobatto).then(Vec::new);
    if let Some(traces) = lobatto_traces.as_mut() {
        // Lobatto nodes along every x-direction flux trace (lines y = eta_k):
        // a y-node pass at eta_k, then x-node passes at each Lobatto point.
        lobatto_trace_pass(src, kern, nt, 0, traces);
    }

    apply_stencil_2d(src, &mut line_m, nt, 1, lf, lw);
    apply_stencil_2d(src, &mut line_p, nt, 1, rf, rw);
    let mut y_minus = Vec::new();
    let mut y_plus = Vec::new();
    node_pass(&line_m, &mut y_minus, 0);
    node_pass(&line_p, &mut y_plus, 0);
    if let Some(traces) = lobatto_traces.as_mut() {
        lobatto_trace_pass(src, kern, nt, 1, traces);
    }

    let centroid = matches!(extras, ThetaNodes::Centroid | ThetaNodes::GaussLobatto).then(|| {
        let mut tmp = vec![0.0; len];
        let mut out = vec![0.0; len];
        let (f, w) = stencil_params(&kern.midpoint);
        apply_stencil_2d(src, &mut tmp, nt, 0, f, w);
        apply_stencil_2d(&tmp, &mut out, nt, 1, f, w);
        out
    });

    FaceNodes2d {
        x_minus,
        x_plus,
        y_minus,
        y_plus,
        centroid,
        lobatto_traces,
    }
}

/// Values at every (Lobatto point) x (flux trace) combination for one trace
/// direction; interior evaluation points only (faces are already flux nodes).
fn lobatto_trace_pass(
    src: &[f64],
    kern: &DegreeKernel,
    nt: usize,
    trace_axis: usize,
    out: &mut Vec<Vec<f64>>,
) {
    let other = 1 - trace_axis;
    for gs in &kern.gauss_nodes {
        let mut line = vec![0.0; src.len()];
        let (f, w) = stencil_params(gs);
        apply_stencil_2d(src, &mut line, nt, other, f, w);
        for (ls, pt) in kern.lobatto_nodes.iter().zip(kern.lobatto.points.iter()) {
            if (pt.abs() - 0.5).abs() < 1e-14 {
                continue; // face nodes already covered by the flux set
            }
            let mut buf = vec![0.0; src.len()];
            let (f, w) = stencil_params(ls);
            apply_stencil_2d(&line, &mut buf, nt, trace_axis, f, w);
            out.push(buf);
        }
    }
}

// ---------------------------------------------------------------------------
// Face-flux assembly
// ---------------------------------------------------------------------------

#[inline]
fn face_alpha(flux: &FluxFunction, grid: &Grid, axis: usize, v: f64) -> f64 {
    match flux.alpha_mode {
        AlphaMode::Local => v.abs(),
        AlphaMode::Global => flux.velocity.axis_speed_bound(grid, axis),
    }
}

/// 1D face fluxes from reconstructed (possibly limited) node values.
pub fn face_fluxes_1d(nodes: &Nodes1d, grid: &Grid, flux: &FluxFunction) -> FaceFluxField {
    let mut out = FaceFluxField::zeros(grid);
    let (vx, _) = flux.velocity.at(0.0, 0.0);
    let alpha = face_alpha(flux, grid, 0, vx);
    let n = grid.n() as isize;
    for i in -1..n {
        let ul = nodes.right[grid.idx1(i)];
        let ur = nodes.left[grid.idx1(i + 1)];
        out.x[grid.idx1(i)] = numerical_flux(ul, ur, vx, alpha);
    }
    out
}

/// Gauss-Legendre face integrals: K Riemann solves per face combined with
/// the quadrature weights.
pub fn face_integrals_gauss_legendre_2d(
    nodes: &FaceNodes2d,
    kern: &DegreeKernel,
    grid: &Grid,
    flux: &FluxFunction,
) -> FaceFluxField {
    let mut out = FaceFluxField::zeros(grid);
    let n = grid.n() as isize;
    let h = grid.h();
    for axis in 0..2 {
        let (own, neigh) = if axis == 0 {
            (&nodes.x_plus, &nodes.x_minus)
        } else {
            (&nodes.y_plus, &nodes.y_minus)
        };
        let dst = if axis == 0 { &mut out.x } else { &mut out.y };
        for (k, wq) in kern.gauss.weights.iter().enumerate() {
            let eta = kern.gauss.points[k];
            for a in -1..n {
                for b in 0..n {
                    let (i, j) = if axis == 0 { (a, b) } else { (b, a) };
                    let (ni, nj) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
                    let ul = own[k][grid.idx2(i, j)];
                    let ur = neigh[k][grid.idx2(ni, nj)];
                    let (x, y) = if axis == 0 {
                        (grid.face(i), grid.center(j as usize) + eta * h)
                    } else {
                        (grid.center(i as usize) + eta * h, grid.face(j))
                    };
                    let vv = flux.velocity.at(x, y);
                    let v = if axis == 0 { vv.0 } else { vv.1 };
                    let alpha = face_alpha(flux, grid, axis, v);
                    dst[grid.idx2(i, j)] += wq * numerical_flux(ul, ur, v, alpha);
                }
            }
        }
    }
    out
}

/// Transverse face integrals: one midpoint Riemann solve per face, then the
/// cell-integral stencil applied across transversely neighboring fluxes.
pub fn face_integrals_transverse_2d(
    nodes: &FaceNodes2d,
    kern: &DegreeKernel,
    grid: &Grid,
    flux: &FluxFunction,
) -> FaceFluxField {
    let mut out = FaceFluxField::zeros(grid);
    let nt = grid.n_tot();
    let len = grid.storage_len();
    let band = kern.transverse_integral.reach() as isize;
    let n = grid.n() as isize;
    let h = grid.h();
    let mut point_flux = vec![0.0; len];
    for axis in 0..2 {
        let (own, neigh) = if axis == 0 {
            (&nodes.x_plus[0], &nodes.x_minus[0])
        } else {
            (&nodes.y_plus[0], &nodes.y_minus[0])
        };
        point_flux.fill(0.0);
        for a in -1..n {
            for b in -band..n + band {
                let (i, j) = if axis == 0 { (a, b) } else { (b, a) };
                let (ni, nj) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
                let ul = own[grid.idx2(i, j)];
                let ur = neigh[grid.idx2(ni, nj)];
                let (x, y) = if axis == 0 {
                    (grid.face(i), grid.bounds().0 + (j as f64 + 0.5) * h)
                } else {
                    (grid.bounds().0 + (i as f64 + 0.5) * h, grid.face(j))
                };
                let vv = flux.velocity.at(x, y);
                let v = if axis == 0 { vv.0 } else { vv.1 };
                let alpha = face_alpha(flux, grid, axis, v);
                point_flux[grid.idx2(i, j)] = numerical_flux(ul, ur, v, alpha);
            }
        }
        let dst = if axis == 0 { &mut out.x } else { &mut out.y };
        let (f, w) = stencil_params(&kern.transverse_integral);
        apply_stencil_2d(&point_flux, dst, nt, 1 - axis, f, w);
    }
    out
}

// ---------------------------------------------------------------------------
// Convenience residual entry points
// ---------------------------------------------------------------------------

fn require_ghosts(grid: &Grid, need: usize) -> Result<()> {
    if grid.ghost() < need {
        return Err(Error::InsufficientGhosts {
            have: grid.ghost(),
            need,
        });
    }
    Ok(())
}

/// Unlimited 1D semi-discrete operator `L_p`; expects filled ghosts.
pub fn residual_1d(field: &CellField, p: usize, flux: &FluxFunction) -> Result<CellField> {
    let kern = DegreeKernel::new(p)?;
    require_ghosts(field.grid(), kern.node_reach() + 1)?;
    let nodes = reconstruct_nodes_1d(field, &kern, ThetaNodes::None);
    let faces = face_fluxes_1d(&nodes, field.grid(), flux);
    Ok(residual_from_faces(&faces))
}

/// Unlimited 2D semi-discrete operator; expects filled ghosts.
pub fn residual_2d_of(
    field: &CellField,
    p: usize,
    flux: &FluxFunction,
    method: FluxReconstruction,
) -> Result<CellField> {
    let kern = DegreeKernel::new(p)?;
    require_ghosts(field.grid(), ghost_width_2d(&kern, method))?;
    let nodes = reconstruct_face_nodes_2d(field, &kern, method, ThetaNodes::None);
    let faces = match method {
        FluxReconstruction::GaussLegendre => {
            face_integrals_gauss_legendre_2d(&nodes, &kern, field.grid(), flux)
        }
        FluxReconstruction::Transverse => {
            face_integrals_transverse_2d(&nodes, &kern, field.grid(), flux)
        }
    };
    Ok(residual_from_faces(&faces))
}

/// Ghost width required by the reconstruction alone in 2D (the scheme layer
/// takes the maximum over limiter and detection passes as well).
pub fn ghost_width_2d(kern: &DegreeKernel, method: FluxReconstruction) -> usize {
    let node = kern.node_reach() + 1;
    match method {
        FluxReconstruction::GaussLegendre => node,
        FluxReconstruction::Transverse => node.max(
            kern.transverse_integral.reach() + kern.midpoint.reach() + 1,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryCondition;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn numerical_flux_upwind_algebra() {
        // a = 1: F(2, 5) = a*uL; a = -1: F(2, 5) = a*uR.
        assert_eq!(numerical_flux(2.0, 5.0, 1.0, 1.0), 2.0);
        assert_eq!(numerical_flux(2.0, 5.0, -1.0, 1.0), -5.0);
        for u in [-3.0, 0.0, 7.5] {
            assert_eq!(numerical_flux(u, u, 2.0, 2.0), 2.0 * u);
        }
    }

    proptest! {
        #[test]
        fn flux_is_consistent_and_monotone(
            ul in -10.0f64..10.0,
            ur in -10.0f64..10.0,
            du in 0.0f64..5.0,
            v in -3.0f64..3.0,
        ) {
            let alpha = v.abs() + 0.5;
            // consistency
            let f = numerical_flux(ul, ul, v, alpha);
            prop_assert!((f - v * ul).abs() < 1e-12);
            // non-decreasing in uL, non-increasing in uR
            prop_assert!(numerical_flux(ul + du, ur, v, alpha) >= numerical_flux(ul, ur, v, alpha) - 1e-12);
            prop_assert!(numerical_flux(ul, ur + du, v, alpha) <= numerical_flux(ul, ur, v, alpha) + 1e-12);
        }
    }

    fn field_1d(n: usize, g: usize, vals: &[f64]) -> CellField {
        let grid = Grid::new_1d(n, (0.0, 1.0), g).unwrap();
        let mut f = CellField::from_interior_1d(grid, vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        f
    }

    #[test]
    fn residual_1d_p0_hand_oracle() {
        // p=0 upwind, a=1, h=0.25, [1,0,0,0] -> [-4, 4, 0, 0]
        let f = field_1d(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let r = residual_1d(&f, 0, &FluxFunction::advection_1d(1.0)).unwrap();
        assert_eq!(r.interior_values(), vec![-4.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_field_has_zero_residual_for_every_degree() {
        for p in 0..=7 {
            let g = p / 2 + 2;
            let f = field_1d(12, g, &[3.25; 12]);
            let r = residual_1d(&f, p, &FluxFunction::advection_1d(1.3)).unwrap();
            for v in r.interior_values() {
                assert!(v.abs() < 1e-13, "p={p}");
            }
        }
    }

    /// Exact cell averages of sin(2 pi x) on [0,1].
    fn sine_avgs(n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let pi2 = 2.0 * std::f64::consts::PI;
        (0..n)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i as f64 + 1.0) * h);
                ((pi2 * a).cos() - (pi2 * b).cos()) / (pi2 * h)
            })
            .collect()
    }

    #[test]
    fn residual_1d_p1_second_order_on_sine() {
        let err = |n: usize| -> f64 {
            let f = field_1d(n, 2, &sine_avgs(n));
            let r = residual_1d(&f, 1, &FluxFunction::advection_1d(1.0)).unwrap();
            let h = 1.0 / n as f64;
            let pi2 = 2.0 * std::f64::consts::PI;
            // exact cell averages of -u_x
            (0..n)
                .map(|i| {
                    let (a, b) = (i as f64 * h, (i as f64 + 1.0) * h);
                    let exact = -((pi2 * b).sin() - (pi2 * a).sin()) / h;
                    (r.interior_values()[i] - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let slope = (err(32) / err(64)).log2();
        assert!((slope - 2.0).abs() < 0.2, "observed slope {slope}");
    }

    fn field_2d_from(
        n: usize,
        g: usize,
        avg: impl Fn(f64, f64, f64) -> f64, // (x_lo, y_lo, h) -> cell average
    ) -> CellField {
        let grid = Grid::new_2d(n, (0.0, 1.0), g).unwrap();
        let h = grid.h();
        let mut f = CellField::zeros(grid);
        let nt = f.grid().n_tot() as isize;
        let gi = g as isize;
        for i in -gi..nt - gi {
            for j in -gi..nt - gi {
                let v = avg(i as f64 * h, j as f64 * h, h);
                f.set2(i, j, v);
            }
        }
        f
    }

    #[test]
    fn gl_face_integrals_constant_field() {
        let grid = Grid::new_2d(4, (0.0, 1.0), 3).unwrap();
        let mut f = CellField::from_interior_2d(grid, &[2.5; 16]).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let kern = DegreeKernel::new(2).unwrap();
        let nodes = reconstruct_face_nodes_2d(&f, &kern, FluxReconstruction::GaussLegendre, ThetaNodes::None);
        let flux = FluxFunction::advection_2d(2.0, 1.0);
        let faces = face_integrals_gauss_legendre_2d(&nodes, &kern, f.grid(), &flux);
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(faces.x_face(i, j), 5.0, epsilon = 1e-13);
                assert_relative_eq!(faces.y_face(i, j), 2.5, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gl_face_integrals_exact_on_bicubic() {
        // p=4 face integrals on cell averages of x^a y^b (a,b <= 3) are
        // exact: compare against the analytic face average of the flux.
        let n = 8;
        let kern = DegreeKernel::new(4).unwrap();
        let flux = FluxFunction::advection_2d(2.0, 1.0);
        for a in 0..=3u32 {
            for b in 0..=3u32 {
                let pint = |lo: f64, h: f64, k: u32| {
                    ((lo + h).powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / ((k as f64 + 1.0) * h)
                };
                let f = field_2d_from(n, 4, |x, y, h| pint(x, h, a) * pint(y, h, b));
                let nodes = reconstruct_face_nodes_2d(
                    &f,
                    &kern,
                    FluxReconstruction::GaussLegendre,
                    ThetaNodes::None,
                );
                let faces = face_integrals_gauss_legendre_2d(&nodes, &kern, f.grid(), &flux);
                let grid = f.grid();
                let h = grid.h();
                for i in 0..n as isize {
                    for j in 0..n as isize {
                        let xf = grid.face(i);
                        let exact = 2.0 * xf.powi(a as i32) * pint(j as f64 * h, h, b);
                        assert!(
                            (faces.x_face(i, j) - exact).abs() <= 1e-12,
                            "a={a} b={b} i={i} j={j}: {} vs {exact}",
                            faces.x_face(i, j)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn transverse_matches_gl_on_quadratics() {
        // p=2: both methods are exact for u = x^2 + y^2, v = (1, 0).
        let n = 8;
        let kern = DegreeKernel::new(2).unwrap();
        let flux = FluxFunction::advection_2d(1.0, 0.0);
        let pint = |lo: f64, h: f64| ((lo + h).powi(3) - lo.powi(3)) / (3.0 * h);
        let f = field_2d_from(n, 3, |x, y, h| pint(x, h) + pint(y, h));
        let gl_nodes =
            reconstruct_face_nodes_2d(&f, &kern, FluxReconstruction::GaussLegendre, ThetaNodes::None);
        let tv_nodes =
            reconstruct_face_nodes_2d(&f, &kern, FluxReconstruction::Transverse, ThetaNodes::None);
        let gl = face_integrals_gauss_legendre_2d(&gl_nodes, &kern, f.grid(), &flux);
        let tv = face_integrals_transverse_2d(&tv_nodes, &kern, f.grid(), &flux);
        for i in 0..n as isize {
            for j in 0..n as isize {
                assert!(
                    (gl.x_face(i, j) - tv.x_face(i, j)).abs() <= 1e-13,
                    "({i},{j}): {} vs {}",
                    gl.x_face(i, j),
                    tv.x_face(i, j)
                );
            }
        }
    }

    #[test]
    fn transverse_close_to_gl_on_smooth_field_at_high_order() {
        // p=3 on a smooth sine: L1 difference between the two face-integral
        // methods refines at fourth order.
        let diff = |n: usize| -> f64 {
            let kern = DegreeKernel::new(3).unwrap();
            let flux = FluxFunction::advection_2d(1.0, 0.5);
            let pi2 = 2.0 * std::f64::consts::PI;
            let f = field_2d_from(n, 4, |x, y, h| {
                // averages of sin(2 pi (x+y))
                -((pi2 * (x + h + y + h)).sin() - (pi2 * (x + h + y)).sin()
                    - (pi2 * (x + y + h)).sin()
                    + (pi2 * (x + y)).sin())
                    / (pi2 * pi2 * h * h)
            });
            let gl_nodes = reconstruct_face_nodes_2d(
                &f,
                &kern,
                FluxReconstruction::GaussLegendre,
                ThetaNodes::None,
            );
            let tv_nodes =
                reconstruct_face_nodes_2d(&f, &kern, FluxReconstruction::Transverse, ThetaNodes::None);
            let gl = face_integrals_gauss_legendre_2d(&gl_nodes, &kern, f.grid(), &flux);
            let tv = face_integrals_transverse_2d(&tv_nodes, &kern, f.grid(), &flux);
            let mut acc = 0.0;
            for i in 0..n as isize {
                for j in 0..n as isize {
                    acc += (gl.x_face(i, j) - tv.x_face(i, j)).abs();
                }
            }
            acc / (n * n) as f64
        };
        let slope = (diff(16) / diff(32)).log2();
        assert!((slope - 4.0).abs() < 0.4, "observed slope {slope}");
    }

    #[test]
    fn residual_2d_uniform_faces_and_telescoping() {
        let grid = Grid::new_2d(4, (0.0, 1.0), 1).unwrap();
        let mut faces = FaceFluxField::zeros(&grid);
        faces.x.fill(3.0);
        faces.y.fill(-1.5);
        let r = residual_from_faces(&faces);
        for v in r.interior_values() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn residual_2d_periodic_sum_is_zero() {
        let n = 8;
        let vals: Vec<f64> = (0..n * n).map(|k| ((k * 37 % 101) as f64) * 0.01).collect();
        let grid = Grid::new_2d(n, (0.0, 1.0), 3).unwrap();
        let mut f = CellField::from_interior_2d(grid, &vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        for method in [FluxReconstruction::GaussLegendre, FluxReconstruction::Transverse] {
            let r = residual_2d_of(&f, 2, &FluxFunction::advection_2d(2.0, 1.0), method).unwrap();
            let total: f64 = r.interior_values().iter().sum();
            assert!(total.abs() < 1e-12, "{method:?}: {total}");
        }
    }

    #[test]
    fn residual_2d_p0_single_cell_upwind_oracle() {
        // p=0, v=(2,1): update of the hot cell is two 1D upwind differences.
        let n = 4;
        let mut vals = vec![0.0; n * n];
        vals[1 * n + 1] = 1.0;
        let grid = Grid::new_2d(n, (0.0, 1.0), 1).unwrap();
        let mut f = CellField::from_interior_2d(grid, &vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let r = residual_2d_of(
            &f,
            0,
            &FluxFunction::advection_2d(2.0, 1.0),
            FluxReconstruction::Transverse,
        )
        .unwrap();
        let h = f.grid().h();
        assert_relative_eq!(r.get2(1, 1), -(2.0 + 1.0) / h, epsilon = 1e-12);
        assert_relative_eq!(r.get2(2, 1), 2.0 / h, epsilon = 1e-12);
        assert_relative_eq!(r.get2(1, 2), 1.0 / h, epsilon = 1e-12);
        assert_eq!(r.get2(2, 2), 0.0);
    }

    #[test]
    fn insufficient_ghosts_is_an_error() {
        let f = field_1d(8, 1, &[0.0; 8]);
        let err = residual_1d(&f, 5, &FluxFunction::advection_1d(1.0));
        assert!(matches!(err, Err(Error::InsufficientGhosts { .. })));
    }
}
