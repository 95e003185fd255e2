//! Run diagnostics: the maximum-principle violation metric, L1 errors,
//! empirical convergence orders, and kernel throughput.

use std::time::Duration;

use crate::error::{Error, Result};
use crate::mesh::CellField;

/// Running minima of the distance to the initial bounds, over all accepted
/// steps of a run. `delta = min(delta_minus, delta_plus)`; negative values
/// mean the maximum principle was violated.
#[derive(Debug, Clone)]
pub struct ViolationTracker {
    pub m: f64,
    pub big_m: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
}

impl ViolationTracker {
    pub fn new(bounds: (f64, f64)) -> Self {
        ViolationTracker {
            m: bounds.0,
            big_m: bounds.1,
            delta_minus: f64::INFINITY,
            delta_plus: f64::INFINITY,
        }
    }

    /// Folds one accepted state into the running minima (interior only).
    pub fn update(&mut self, field: &CellField) {
        let (lo, hi) = field.interior_min_max();
        self.delta_minus = self.delta_minus.min(lo - self.m);
        self.delta_plus = self.delta_plus.min(self.big_m - hi);
    }

    pub fn delta(&self) -> f64 {
        self.delta_minus.min(self.delta_plus)
    }
}

/// `h^d` times the summed absolute difference over interior cells.
pub fn l1_error(a: &CellField, b: &CellField) -> Result<f64> {
    if !a.grid().same_extent(b.grid()) {
        return Err(Error::GridMismatch(
            "L1 error needs fields on the same grid".into(),
        ));
    }
    let av = a.interior_values();
    let bv = b.interior_values();
    let sum: f64 = av.iter().zip(bv.iter()).map(|(x, y)| (x - y).abs()).sum();
    let h = a.grid().h();
    Ok(match a.grid().dim() {
        crate::mesh::Dim::One => h * sum,
        crate::mesh::Dim::Two => h * h * sum,
    })
}

/// Empirical order of convergence under refinement by two.
pub fn eoc(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if e_coarse <= 0.0 || e_fine <= 0.0 {
        return Err(Error::Diagnostics(
            "EOC needs strictly positive errors".into(),
        ));
    }
    Ok((e_coarse / e_fine).log2())
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ErrorRecord {
    pub n: usize,
    pub p: usize,
    pub cfl: f64,
    pub integrator: String,
    pub e1: f64,
    /// Defined only when a previous-N record exists.
    pub eoc: Option<f64>,
}

/// Cells updated per Runge-Kutta stage per second, averaged over the ten
/// steps following the warm-up step.
pub fn throughput(step_times: &[Duration], cells: usize, stages: usize) -> Result<f64> {
    if step_times.len() < 11 {
        return Err(Error::Diagnostics(format!(
            "throughput needs at least 11 timed steps (warm-up plus ten), got {}",
            step_times.len()
        )));
    }
    let window = &step_times[1..11];
    let secs: f64 = window.iter().map(|d| d.as_secs_f64()).sum();
    Ok((cells * stages * window.len()) as f64 / secs)
}

/// Diagnostics of one completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scheme: String,
    pub p: usize,
    pub n: usize,
    pub integrator: String,
    pub t_end: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub delta: f64,
    /// L1 error against the exact solution, when one is available.
    pub e1: Option<f64>,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub steps: usize,
    pub retries: u64,
    pub cells_per_stage_per_second: Option<f64>,
}

impl RunReport {
    /// Mass drift normalized by the initial L1 mass scale (the raw mass can
    /// legitimately be zero, e.g. for a sine wave).
    pub fn relative_mass_drift(&self, mass_scale: f64) -> f64 {
        (self.mass_final - self.mass_initial).abs() / mass_scale.abs().max(1e-300)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CellField, Grid};

    fn field(vals: &[f64]) -> CellField {
        let grid = Grid::new_1d(vals.len(), (0.0, 1.0), 0).unwrap();
        CellField::from_interior_1d(grid, vals).unwrap()
    }

    #[test]
    fn tracker_direct_formula() {
        let mut t = ViolationTracker::new((0.0, 1.0));
        t.update(&field(&[0.2, 0.8]));
        assert!(t.delta() >= 0.0);
        t.update(&field(&[-0.01, 0.5]));
        assert_eq!(t.delta(), -0.01);
        // monotone: a later clean state cannot shrink the violation
        t.update(&field(&[0.5, 0.5]));
        assert_eq!(t.delta(), -0.01);
    }

    #[test]
    fn l1_error_basic_values() {
        let a = field(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(l1_error(&a, &a).unwrap(), 0.0);
        let b = field(&[2.0, 3.0, 4.0, 5.0]);
        assert!((l1_error(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        // symmetry
        assert_eq!(l1_error(&a, &b).unwrap(), l1_error(&b, &a).unwrap());
    }

    #[test]
    fn l1_error_triangle_inequality() {
        let a = field(&[0.0, 1.0, -2.0, 0.5]);
        let b = field(&[1.0, -1.0, 0.0, 2.5]);
        let c = field(&[0.3, 0.3, 0.3, 0.3]);
        let ab = l1_error(&a, &b).unwrap();
        let ac = l1_error(&a, &c).unwrap();
        let cb = l1_error(&c, &b).unwrap();
        assert!(ab <= ac + cb + 1e-15);
    }

    #[test]
    fn eoc_values() {
        assert_eq!(eoc(4e-3, 1e-3).unwrap(), 2.0);
        assert_eq!(eoc(1e-3, 1e-3).unwrap(), 0.0);
        assert!(eoc(0.0, 1e-3).is_err());
    }

    #[test]
    fn throughput_arithmetic() {
        // 64^2 cells, 3 stages, 10 timed steps in 1 s -> 122880 cell-stages/s
        let times: Vec<Duration> = std::iter::once(Duration::from_secs_f64(0.5))
            .chain(std::iter::repeat(Duration::from_secs_f64(0.1)).take(10))
            .collect();
        let rate = throughput(&times, 64 * 64, 3).unwrap();
        assert!((rate - 122880.0).abs() < 1e-6);
        assert!(throughput(&times[..5], 64, 1).is_err());
    }
}
