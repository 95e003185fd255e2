//! Zhang-Shu maximum-principle node limiting: the per-cell factor theta
//! scales every reconstructed node value toward the cell average, keeping
//! the average itself untouched.

use crate::flux::{FaceNodes2d, Nodes1d};
use crate::mesh::{CellField, Dim, Grid};

/// Node set over which the reconstruction extrema `M'`, `m'` are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSet {
    /// Face nodes used by the flux method plus the cell centroid.
    Centroid,
    /// All Gauss-Lobatto points (in 2D: along every flux-quadrature trace).
    GaussLobatto,
}

/// Degenerate-denominator cutoff: at `|M' - ubar| < EPS_DEGENERATE` the
/// limiter ratio is 0/0 on constant data and its limit is 1.
pub const EPS_DEGENERATE: f64 = 1e-14;

/// Per-cell limiter factor with its ingredients (ghost-padded layout,
/// interior entries valid; callers wrap the ghost ring).
#[derive(Debug, Clone)]
pub struct ThetaField {
    pub theta: Vec<f64>,
    /// Extrema of the reconstruction over the node set.
    pub node_max: Vec<f64>,
    pub node_min: Vec<f64>,
    /// Extrema of the cell average over the face-neighbor set.
    pub nbhd_max: Vec<f64>,
    pub nbhd_min: Vec<f64>,
}

fn theta_ratio(num: f64, den: f64) -> f64 {
    if den.abs() < EPS_DEGENERATE {
        1.0
    } else {
        num.abs() / den.abs()
    }
}

fn theta_from_extrema(
    u: f64,
    node_max: f64,
    node_min: f64,
    nbhd_max: f64,
    nbhd_min: f64,
) -> f64 {
    let hi = theta_ratio(nbhd_max - u, node_max - u);
    let lo = theta_ratio(nbhd_min - u, node_min - u);
    hi.min(lo).min(1.0)
}

fn extrema_over<'a>(arrays: impl Iterator<Item = &'a Vec<f64>>, c: usize) -> (f64, f64) {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for a in arrays {
        let v = a[c];
        hi = hi.max(v);
        lo = lo.min(v);
    }
    (hi, lo)
}

/// Limiter factor for a 1D field from its reconstructed nodes. The node set
/// is whatever `nodes` carries: face nodes plus midpoint (centroid set) or
/// the full Gauss-Lobatto values.
pub fn compute_theta_1d(field: &CellField, nodes: &Nodes1d) -> ThetaField {
    let grid = field.grid();
    let u = field.raw();
    let len = u.len();
    let mut out = ThetaField {
        theta: vec![1.0; len],
        node_max: vec![f64::NEG_INFINITY; len],
        node_min: vec![f64::INFINITY; len],
        nbhd_max: vec![0.0; len],
        nbhd_min: vec![0.0; len],
    };
    let mut arrays: Vec<&Vec<f64>> = vec![&nodes.left, &nodes.right];
    if let Some(m) = nodes.midpoint.as_ref() {
        arrays.push(m);
    }
    if let Some(l) = nodes.lobatto.as_ref() {
        arrays.extend(l.iter());
    }
    for i in 0..grid.n() as isize {
        let c = grid.idx1(i);
        let (node_max, node_min) = extrema_over(arrays.iter().copied(), c);
        let nbhd_max = u[c - 1].max(u[c]).max(u[c + 1]);
        let nbhd_min = u[c - 1].min(u[c]).min(u[c + 1]);
        out.node_max[c] = node_max;
        out.node_min[c] = node_min;
        out.nbhd_max[c] = nbhd_max;
        out.nbhd_min[c] = nbhd_min;
        out.theta[c] = theta_from_extrema(u[c], node_max, node_min, nbhd_max, nbhd_min);
    }
    out
}

/// Limiter factor for a 2D field. The neighborhood extrema use the four
/// face neighbors plus the cell itself.
pub fn compute_theta_2d(field: &CellField, nodes: &FaceNodes2d) -> ThetaField {
    let grid = field.grid();
    let u = field.raw();
    let len = u.len();
    let nt = grid.n_tot();
    let mut out = ThetaField {
        theta: vec![1.0; len],
        node_max: vec![f64::NEG_INFINITY; len],
        node_min: vec![f64::INFINITY; len],
        nbhd_max: vec![0.0; len],
        nbhd_min: vec![0.0; len],
    };
    let arrays = nodes.all_arrays();
    let n = grid.n() as isize;
    for i in 0..n {
        for j in 0..n {
            let c = grid.idx2(i, j);
            let (node_max, node_min) = extrema_over(arrays.iter().copied(), c);
            let nbhd_max = u[c]
                .max(u[c - 1])
                .max(u[c + 1])
                .max(u[c - nt])
                .max(u[c + nt]);
            let nbhd_min = u[c]
                .min(u[c - 1])
                .min(u[c + 1])
                .min(u[c - nt])
                .min(u[c + nt]);
            out.node_max[c] = node_max;
            out.node_min[c] = node_min;
            out.nbhd_max[c] = nbhd_max;
            out.nbhd_min[c] = nbhd_min;
            out.theta[c] = theta_from_extrema(u[c], node_max, node_min, nbhd_max, nbhd_min);
        }
    }
    out
}

fn limit_array(values: &mut [f64], theta: &[f64], u: &[f64]) {
    for ((v, t), ub) in values.iter_mut().zip(theta.iter()).zip(u.iter()) {
        // theta = 1 must be the exact identity (no round trip through the
        // subtraction), so an unlimited step is bit-identical.
        if *t != 1.0 {
            *v = t * (*v - ub) + ub;
        }
    }
}

/// Scales every 1D node value toward the cell average: `v <- theta (v - u) + u`.
/// The cell average itself is untouched, so limiting conserves mass.
pub fn limit_nodes_1d(nodes: &mut Nodes1d, theta: &[f64], field: &CellField) {
    let u = field.raw();
    limit_array(&mut nodes.left, theta, u);
    limit_array(&mut nodes.right, theta, u);
    if let Some(m) = nodes.midpoint.as_mut() {
        limit_array(m, theta, u);
    }
    if let Some(l) = nodes.lobatto.as_mut() {
        for a in l.iter_mut() {
            limit_array(a, theta, u);
        }
    }
}

/// 2D counterpart of [`limit_nodes_1d`].
pub fn limit_nodes_2d(nodes: &mut FaceNodes2d, theta: &[f64], field: &CellField) {
    let u = field.raw();
    for a in nodes.all_arrays_mut() {
        limit_array(a, theta, u);
    }
}

/// Ghost width the limiter itself needs beyond the reconstruction: the
/// neighborhood extrema read one ring of the averages.
pub fn ghost_width(grid: &Grid) -> usize {
    match grid.dim() {
        Dim::One | Dim::Two => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{reconstruct_nodes_1d, DegreeKernel, ThetaNodes};
    use crate::mesh::{BoundaryCondition, Grid};
    use proptest::prelude::*;

    fn theta_for(vals: &[f64], p: usize) -> (ThetaField, CellField) {
        let grid = Grid::new_1d(vals.len(), (0.0, 1.0), 3).unwrap();
        let mut f = CellField::from_interior_1d(grid, vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let kern = DegreeKernel::new(p).unwrap();
        let nodes = reconstruct_nodes_1d(&f, &kern, ThetaNodes::Centroid);
        (compute_theta_1d(&f, &nodes), f)
    }

    #[test]
    fn linear_data_is_unlimited() {
        let (tf, f) = theta_for(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 2);
        // interior away from the periodic wrap
        for i in 2..6 {
            let c = f.grid().idx1(i);
            assert_eq!(tf.theta[c], 1.0, "cell {i}");
        }
    }

    #[test]
    fn isolated_spike_is_fully_limited() {
        // [0,1,0] at p=2, centroid set: midpoint overshoots (13/12) while
        // the neighborhood maximum equals the average, so theta = 0.
        let (tf, f) = theta_for(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 2);
        let c = f.grid().idx1(3);
        assert_eq!(tf.node_max[c], 13.0 / 12.0);
        assert_eq!(tf.node_min[c], 5.0 / 6.0);
        assert_eq!(tf.theta[c], 0.0);
    }

    #[test]
    fn constant_field_hits_degenerate_branch() {
        let (tf, f) = theta_for(&[2.0; 8], 3);
        for i in 0..8 {
            assert_eq!(tf.theta[f.grid().idx1(i)], 1.0);
        }
    }

    #[test]
    fn limiting_preserves_cell_averages_and_endpoints() {
        let vals = [0.0, 0.3, 1.0, 0.2, 0.9, 0.1, 0.5, 0.4];
        let grid = Grid::new_1d(8, (0.0, 1.0), 3).unwrap();
        let mut f = CellField::from_interior_1d(grid, &vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let kern = DegreeKernel::new(2).unwrap();
        let mut nodes = reconstruct_nodes_1d(&f, &kern, ThetaNodes::Centroid);
        let tf = compute_theta_1d(&f, &nodes);
        limit_nodes_1d(&mut nodes, &tf.theta, &f);
        // theta = 1 is the identity; theta = 0 collapses to the average
        for i in 0..8 {
            let c = f.grid().idx1(i);
            let t = tf.theta[c];
            if t == 1.0 {
                continue;
            }
            if t == 0.0 {
                assert_eq!(nodes.left[c], vals[i as usize]);
                assert_eq!(nodes.right[c], vals[i as usize]);
            }
        }
    }

    #[test]
    fn affine_scaling_examples() {
        // theta = 0.5, ubar = 2, node 4 -> 3
        let mut v = [4.0];
        limit_array(&mut v, &[0.5], &[2.0]);
        assert_eq!(v[0], 3.0);
    }

    #[test]
    fn spike_amplitude_monotonically_tightens_theta() {
        let mut last = f64::INFINITY;
        for amp in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let (tf, f) = theta_for(&[0.0, 0.0, 0.0, amp, 0.0, 0.0, 0.0, 0.0], 4);
            let t = tf.theta[f.grid().idx1(3)];
            assert!(t <= last + 1e-15, "amp {amp}: {t} > {last}");
            last = t;
        }
    }

    proptest! {
        /// Limited node values always land inside the neighborhood bounds
        /// whenever the raw node lies inside the reconstruction extrema.
        #[test]
        fn limited_nodes_stay_in_neighborhood_bounds(
            vals in proptest::collection::vec(-5.0f64..5.0, 8),
        ) {
            let (tf, f) = theta_for(&vals, 3);
            let kern = DegreeKernel::new(3).unwrap();
            let mut nodes = reconstruct_nodes_1d(&f, &kern, ThetaNodes::Centroid);
            limit_nodes_1d(&mut nodes, &tf.theta, &f);
            for i in 0..8 {
                let c = f.grid().idx1(i);
                let slack = 1e-12;
                prop_assert!(nodes.left[c] >= tf.nbhd_min[c] - slack);
                prop_assert!(nodes.left[c] <= tf.nbhd_max[c] + slack);
                prop_assert!(nodes.right[c] >= tf.nbhd_min[c] - slack);
                prop_assert!(nodes.right[c] <= tf.nbhd_max[c] + slack);
            }
        }
    }
}
