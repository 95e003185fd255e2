//! Smooth extrema detection: second-difference smoothness indicators and
//! the override logic that disables limiting at resolved smooth extrema.

use crate::mesh::{CellField, Dim, Grid};

/// Tolerance on the global bounds check inside the override algorithms.
pub const EPS_M: f64 = 1e-10;

/// Per-cell smoothness indicators, one array per axis (ghost-padded layout,
/// `y` empty in 1D). Values are clamped to [0, 1]; exactly-linear data gives
/// exactly 1 through the `min(1, ...)` clamps.
#[derive(Debug, Clone)]
pub struct AlphaField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// First differences are taken without the conventional 1/(2h): the
/// indicator is a ratio, so the factor cancels.
fn alpha_pass(src: &[f64], dst: &mut [f64], stride: usize) {
    let len = src.len();
    dst.fill(1.0);
    let du = |c: usize| src[c + stride] - src[c - stride];
    for c in 2 * stride..len.saturating_sub(2 * stride) {
        let sc = 0.5 * (du(c + stride) - du(c - stride));
        let sl = du(c) - du(c - stride);
        let sr = du(c + stride) - du(c);
        let branch = |s: f64| -> f64 {
            if sc < 0.0 {
                1f64.min((2.0 * s).min(0.0) / sc)
            } else if sc > 0.0 {
                1f64.min((2.0 * s).max(0.0) / sc)
            } else {
                1.0
            }
        };
        dst[c] = branch(sl).min(branch(sr));
    }
}

/// Smoothness indicator per cell and axis.
pub fn smoothness_alpha(field: &CellField) -> AlphaField {
    let src = field.raw();
    match field.grid().dim() {
        Dim::One => {
            let mut x = vec![1.0; src.len()];
            alpha_pass(src, &mut x, 1);
            AlphaField { x, y: Vec::new() }
        }
        Dim::Two => {
            let nt = field.grid().n_tot();
            let mut x = vec![1.0; src.len()];
            let mut y = vec![1.0; src.len()];
            alpha_pass(src, &mut x, nt);
            alpha_pass(src, &mut y, 1);
            AlphaField { x, y }
        }
    }
}

/// Window test: a cell is a smooth extremum only when all three indicators
/// along each axis are exactly 1 (a single non-smooth neighbor blocks the
/// override). Valid over interior cells; false elsewhere.
pub fn smooth_window(grid: &Grid, alpha: &AlphaField) -> Vec<bool> {
    let mut out = vec![false; grid.storage_len()];
    let n = grid.n() as isize;
    match grid.dim() {
        Dim::One => {
            for i in 0..n {
                let c = grid.idx1(i);
                out[c] = alpha.x[c - 1] == 1.0 && alpha.x[c] == 1.0 && alpha.x[c + 1] == 1.0;
            }
        }
        Dim::Two => {
            let nt = grid.n_tot();
            for i in 0..n {
                for j in 0..n {
                    let c = grid.idx2(i, j);
                    let wx =
                        alpha.x[c - nt] == 1.0 && alpha.x[c] == 1.0 && alpha.x[c + nt] == 1.0;
                    let wy = alpha.y[c - 1] == 1.0 && alpha.y[c] == 1.0 && alpha.y[c + 1] == 1.0;
                    out[c] = wx && wy;
                }
            }
        }
    }
    out
}

/// Override for the a priori limiter: wherever the smooth-extremum window
/// holds, reset theta to 1 — unless the cell's reconstructed node range
/// already pokes beyond the global bounds by more than [`EPS_M`] (that
/// branch is skipped entirely when `skip_bounds_check` is set, as in the
/// smooth convergence runs).
#[allow(clippy::too_many_arguments)]
pub fn sed_override_apriori(
    theta: &mut [f64],
    window: &[bool],
    node_max: &[f64],
    node_min: &[f64],
    grid: &Grid,
    bounds: (f64, f64),
    eps_m: f64,
    skip_bounds_check: bool,
) {
    let (m, big_m) = bounds;
    let n = grid.n() as isize;
    let mut visit = |c: usize| {
        if !window[c] {
            return;
        }
        if !skip_bounds_check && (node_max[c] > big_m + eps_m || node_min[c] < m - eps_m) {
            return;
        }
        theta[c] = 1.0;
    };
    match grid.dim() {
        Dim::One => {
            for i in 0..n {
                visit(grid.idx1(i));
            }
        }
        Dim::Two => {
            for i in 0..n {
                for j in 0..n {
                    visit(grid.idx2(i, j));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryCondition, CellField, Grid};

    fn alpha_of(vals: &[f64]) -> Vec<f64> {
        let grid = Grid::new_1d(vals.len(), (0.0, 1.0), 0).unwrap();
        let f = CellField::from_interior_1d(grid, vals).unwrap();
        smoothness_alpha(&f).x
    }

    #[test]
    fn linear_data_is_all_smooth() {
        let vals: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let a = alpha_of(&vals);
        assert!(a.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn parabola_is_smooth() {
        // u_i = i^2: first differences 4i, all second-difference slopes
        // equal, so the ratio clamps at 1.
        let vals: Vec<f64> = (0..12).map(|i| (i * i) as f64).collect();
        let a = alpha_of(&vals);
        for v in &a[2..10] {
            assert_eq!(*v, 1.0);
        }
    }

    #[test]
    fn step_function_flags_the_jump() {
        let vals = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let a = alpha_of(&vals);
        // cells flanking the jump are non-smooth
        assert!(a[3] < 1.0);
        assert!(a[4] < 1.0);
    }

    #[test]
    fn alpha_is_translation_and_scale_invariant() {
        let base = [0.3, 0.1, 0.8, 1.9, 0.2, -0.4, 0.9, 1.4, 0.6, 0.05];
        let a0 = alpha_of(&base);
        let shifted: Vec<f64> = base.iter().map(|v| 2.5 * v + 7.0).collect();
        let a1 = alpha_of(&shifted);
        for (x, y) in a0.iter().zip(a1.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn window_requires_all_three_cells() {
        let grid = Grid::new_1d(8, (0.0, 1.0), 3).unwrap();
        let mut f =
            CellField::from_interior_1d(grid, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        let alpha = smoothness_alpha(&f);
        let w = smooth_window(f.grid(), &alpha);
        let g = f.grid().clone();
        // a cell adjacent to a flagged one is blocked even if itself smooth
        assert!(!w[g.idx1(2)]);
        assert!(!w[g.idx1(3)]);
    }

    #[test]
    fn override_respects_global_bounds_branch() {
        let grid = Grid::new_1d(4, (0.0, 1.0), 0).unwrap();
        let mut theta = vec![0.5; 4];
        let window = vec![true; 4];
        let node_max = vec![1.0, 1.2, 1.0, 1.0]; // cell 1 overshoots M = 1
        let node_min = vec![0.0; 4];
        sed_override_apriori(
            &mut theta,
            &window,
            &node_max,
            &node_min,
            &grid,
            (0.0, 1.0),
            EPS_M,
            false,
        );
        assert_eq!(theta, vec![1.0, 0.5, 1.0, 1.0]);

        // with the bounds check skipped, everything in a smooth window opens up
        let mut theta = vec![0.5; 4];
        sed_override_apriori(
            &mut theta,
            &window,
            &node_max,
            &node_min,
            &grid,
            (0.0, 1.0),
            EPS_M,
            true,
        );
        assert_eq!(theta, vec![1.0; 4]);
    }
}
