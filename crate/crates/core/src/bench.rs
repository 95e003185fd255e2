//! Benchmark problems (initial conditions with exact or high-order cell
//! averaging) and the experiment runners behind the violation, convergence,
//! and timing tables.

use rayon::prelude::*;

use crate::diagnostics::{eoc, l1_error, RunReport};
use crate::error::{Error, Result};
use crate::flux::{FluxFunction, FluxReconstruction};
use crate::mesh::{BoundaryCondition, CellField, Dim, Grid};
use crate::solver::{advance, assemble, AdvanceOptions, RunEnv, SchemeConfig, SchemeName};
use crate::stencil::gauss_legendre_rule_k;
use crate::timestepping::ButcherTableau;

/// Solutions with `delta` above this threshold count as approximately MPP.
pub const MPP_THRESHOLD: f64 = -1e-10;

/// The benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// 1D advection of the four-feature composite profile, `a = 1`,
    /// periodic on [0, 1].
    Composite1d,
    /// 2D advection of `sin(2 pi (x + y))` with `v = (2, 1)`, periodic.
    Sine2d,
    /// 2D advection of the unit square indicator with `v = (2, 1)`, periodic.
    Square2d,
    /// Rigid rotation of the slotted disk on [-1, 1]^2 with Dirichlet 0.
    SlottedCylinder,
}

impl Problem {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "composite_1d" | "composite" => Some(Self::Composite1d),
            "sine_2d" | "sine" => Some(Self::Sine2d),
            "square_2d" | "square" => Some(Self::Square2d),
            "slotted_cylinder" | "slotted" => Some(Self::SlottedCylinder),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Composite1d => "composite_1d",
            Self::Sine2d => "sine_2d",
            Self::Square2d => "square_2d",
            Self::SlottedCylinder => "slotted_cylinder",
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Self::Composite1d => Dim::One,
            _ => Dim::Two,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::SlottedCylinder => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn bc(&self) -> BoundaryCondition {
        match self {
            Self::SlottedCylinder => BoundaryCondition::Dirichlet(0.0),
            _ => BoundaryCondition::Periodic,
        }
    }

    pub fn flux(&self) -> FluxFunction {
        match self {
            Self::Composite1d => FluxFunction::advection_1d(1.0),
            Self::Sine2d | Self::Square2d => FluxFunction::advection_2d(2.0, 1.0),
            Self::SlottedCylinder => FluxFunction::rotation(),
        }
    }

    pub fn env(&self) -> RunEnv {
        RunEnv {
            flux: self.flux(),
            bc: self.bc(),
        }
    }

    /// Duration of one advection period (or one full rotation).
    pub fn period(&self) -> f64 {
        match self {
            Self::SlottedCylinder => 2.0 * std::f64::consts::PI,
            _ => 1.0,
        }
    }

    /// Whether the exact solution after an integer number of periods is the
    /// initial condition itself.
    pub fn exact_period_translation(&self) -> bool {
        !matches!(self, Self::SlottedCylinder)
    }

    pub fn grid(&self, n: usize, ghost: usize) -> Result<Grid> {
        Grid::new(self.dim(), n, self.bounds(), ghost)
    }

    /// Cell averages of the initial condition (exact where the geometry is
    /// axis-aligned or analytic, fixed subcell quadrature across the
    /// circular arc).
    pub fn initialize(&self, grid: &Grid) -> Result<CellField> {
        if grid.dim() != self.dim() || grid.bounds() != self.bounds() {
            return Err(Error::GridMismatch(format!(
                "grid does not match the {} domain",
                self.name()
            )));
        }
        match self {
            Self::Composite1d => Ok(composite_averages(grid)),
            Self::Sine2d => Ok(sine_averages(grid)),
            Self::Square2d => Ok(square_averages(grid)),
            Self::SlottedCylinder => Ok(slotted_cylinder_averages(grid)),
        }
    }

    /// `h^d· sum |u0|`: the scale against which mass drift is measured.
    pub fn mass_scale(&self, ic: &CellField) -> f64 {
        let h = ic.grid().h();
        let mut s = 0.0;
        ic.for_each_interior(|v| s += v.abs());
        match ic.grid().dim() {
            Dim::One => h * s,
            Dim::Two => h * h * s,
        }
    }
}

// ---------------------------------------------------------------------------
// Initial conditions
// ---------------------------------------------------------------------------

/// Four-feature profile (Gaussian, square, sharp triangle, half-ellipse) on
/// [-1, 1], following the classical advection benchmark definition.
fn composite_profile(xi: f64) -> f64 {
    let (a, z, delta, alpha) = (0.5, -0.7, 0.005, 10.0);
    let beta = 2f64.ln() / (36.0 * delta * delta);
    let g = |x: f64, c: f64| (-beta * (x - c) * (x - c)).exp();
    let f = |x: f64, c: f64| (1.0 - alpha * alpha * (x - c) * (x - c)).max(0.0).sqrt();
    if (-0.8..=-0.6).contains(&xi) {
        (g(xi, z - delta) + g(xi, z + delta) + 4.0 * g(xi, z)) / 6.0
    } else if (-0.4..=-0.2).contains(&xi) {
        1.0
    } else if (0.0..=0.2).contains(&xi) {
        1.0 - (10.0 * (xi - 0.1)).abs()
    } else if (0.4..=0.6).contains(&xi) {
        (f(xi, a - delta) + f(xi, a + delta) + 4.0 * f(xi, a)) / 6.0
    } else {
        0.0
    }
}

/// Composite profile mapped onto [0, 1], averaged per cell with a fixed
/// 20-point Gauss-Legendre rule.
fn composite_averages(grid: &Grid) -> CellField {
    let rule = gauss_legendre_rule_k(20);
    let h = grid.h();
    let mut f = CellField::zeros(grid.clone());
    for i in 0..grid.n() {
        let xc = grid.center(i);
        let avg: f64 = rule
            .points
            .iter()
            .zip(rule.weights.iter())
            .map(|(q, w)| w * composite_profile(2.0 * (xc + q * h) - 1.0))
            .sum();
        f.set1(i as isize, avg);
    }
    f
}

/// Exact cell averages of `sin(2 pi (x + y))`.
fn sine_averages(grid: &Grid) -> CellField {
    let h = grid.h();
    let two_pi = 2.0 * std::f64::consts::PI;
    let s = |t: f64| (two_pi * t).sin();
    let mut f = CellField::zeros(grid.clone());
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            let (xl, yl) = (i as f64 * h, j as f64 * h);
            let (xr, yr) = (xl + h, yl + h);
            let v = -(s(xr + yr) - s(xr + yl) - s(xl + yr) + s(xl + yl))
                / (two_pi * two_pi * h * h);
            f.set2(i as isize, j as isize, v);
        }
    }
    f
}

/// Exact area fractions of the square `0.25 < x, y < 0.75`.
fn square_averages(grid: &Grid) -> CellField {
    let h = grid.h();
    let overlap = |lo: f64| -> f64 { ((lo + h).min(0.75) - lo.max(0.25)).max(0.0) / h };
    let mut f = CellField::zeros(grid.clone());
    for i in 0..grid.n() {
        let fx = overlap(i as f64 * h);
        if fx == 0.0 {
            continue;
        }
        for j in 0..grid.n() {
            let fy = overlap(j as f64 * h);
            f.set2(i as isize, j as isize, fx * fy);
        }
    }
    f
}

/// Slotted disk of radius 0.3 centered at (0, 0.5): the slot `|x| <= 0.025`
/// is removed below `y = 0.7`. Cells crossing the circular arc are averaged
/// with a 5x5 Gauss-Legendre subcell rule; the axis-aligned slot is handled
/// by exact rectangle overlap inside the disk.
fn slotted_cylinder_averages(grid: &Grid) -> CellField {
    const R2: f64 = 0.09;
    const CX: f64 = 0.0;
    const CY: f64 = 0.5;
    const SLOT_HALF_WIDTH: f64 = 0.025;
    const SLOT_TOP: f64 = 0.7;
    let inside = |x: f64, y: f64| -> f64 {
        let d2 = (x - CX) * (x - CX) + (y - CY) * (y - CY);
        if d2 < R2 && (x.abs() > SLOT_HALF_WIDTH || y > SLOT_TOP) {
            1.0
        } else {
            0.0
        }
    };
    let rule = gauss_legendre_rule_k(5);
    let h = grid.h();
    let (lo, _) = grid.bounds();
    let mut f = CellField::zeros(grid.clone());
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            let (xl, yl) = (lo + i as f64 * h, lo + j as f64 * h);
            let (xr, yr) = (xl + h, yl + h);
            // squared distance range from the disk center over the cell
            let dx_min = if xl > CX {
                xl - CX
            } else if xr < CX {
                CX - xr
            } else {
                0.0
            };
            let dy_min = if yl > CY {
                yl - CY
            } else if yr < CY {
                CY - yr
            } else {
                0.0
            };
            let d2_min = dx_min * dx_min + dy_min * dy_min;
            let dx_max = (xl - CX).abs().max((xr - CX).abs());
            let dy_max = (yl - CY).abs().max((yr - CY).abs());
            let d2_max = dx_max * dx_max + dy_max * dy_max;
            let v = if d2_min >= R2 {
                0.0
            } else if d2_max <= R2 {
                // fully inside the disk: subtract the exact slot overlap
                let ox = (xr.min(SLOT_HALF_WIDTH) - xl.max(-SLOT_HALF_WIDTH)).max(0.0);
                let oy = (yr.min(SLOT_TOP) - yl).max(0.0);
                1.0 - ox * oy / (h * h)
            } else {
                let (xc, yc) = (xl + 0.5 * h, yl + 0.5 * h);
                let mut acc = 0.0;
                for (qx, wx) in rule.points.iter().zip(rule.weights.iter()) {
                    for (qy, wy) in rule.points.iter().zip(rule.weights.iter()) {
                        acc += wx * wy * inside(xc + qx * h, yc + qy * h);
                    }
                }
                acc
            };
            f.set2(i as isize, j as isize, v);
        }
    }
    f
}

// ---------------------------------------------------------------------------
// Experiment plans and runners
// ---------------------------------------------------------------------------

/// One planned experiment batch.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub problem: Problem,
    pub schemes: Vec<SchemeName>,
    pub degrees: Vec<usize>,
    /// Integrator names; empty means "use the standard pairing per degree".
    pub integrators: Vec<String>,
    pub resolutions: Vec<usize>,
    pub t_end: f64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        for name in &self.integrators {
            if ButcherTableau::by_name(name).is_none() {
                return Err(Error::InvalidConfig(format!("unknown integrator {name}")));
            }
        }
        if self.resolutions.is_empty() || self.degrees.is_empty() {
            return Err(Error::InvalidConfig(
                "a plan needs at least one resolution and one degree".into(),
            ));
        }
        Ok(())
    }
}

/// Degree/integrator pairs of the violation tables: SSPRK2 at p = 1,
/// SSPRK3 at p = 2, and both SSPRK3 and RK4 from p = 3 up.
pub fn violation_pairings(degrees: &[usize]) -> Vec<(usize, ButcherTableau)> {
    let mut out = Vec::new();
    for &p in degrees {
        match p {
            0 => out.push((0, ButcherTableau::euler())),
            1 => out.push((1, ButcherTableau::ssprk2())),
            2 => out.push((2, ButcherTableau::ssprk3())),
            _ => {
                out.push((p, ButcherTableau::ssprk3()));
                out.push((p, ButcherTableau::rk4()));
            }
        }
    }
    out
}

/// Integrator whose order covers the spatial order, as used in the
/// convergence study (RK6 from p = 4 on).
pub fn convergence_integrator(p: usize) -> ButcherTableau {
    match p {
        0 => ButcherTableau::euler(),
        1 => ButcherTableau::ssprk2(),
        2 => ButcherTableau::ssprk3(),
        3 => ButcherTableau::rk4(),
        _ => ButcherTableau::rk6(),
    }
}

/// CFL schedule synthesizing higher temporal order by shrinking the step:
/// `C = 0.8 (h/L)^((p-q)/(q+1))` for `p > q`, with `q` the polynomial
/// degree of the time discretization.
pub fn cfl_schedule(p: usize, integrator_order: usize, n: usize) -> f64 {
    let q = integrator_order.saturating_sub(1);
    if p > q {
        0.8 * (1.0 / n as f64).powf((p - q) as f64 / (q as f64 + 1.0))
    } else {
        0.8
    }
}

/// One row of a violation table.
#[derive(Debug, Clone)]
pub struct ViolationRow {
    pub problem: &'static str,
    pub scheme: &'static str,
    pub p: usize,
    pub integrator: &'static str,
    pub n: usize,
    pub report: RunReport,
}

impl ViolationRow {
    pub fn passes_mpp(&self) -> bool {
        self.report.delta > MPP_THRESHOLD
    }
}

fn run_one(
    problem: Problem,
    scheme_name: SchemeName,
    p: usize,
    tableau: ButcherTableau,
    n: usize,
    t_end: f64,
    timing: bool,
) -> Result<(ViolationRow, CellField, CellField)> {
    let cfg = SchemeConfig::named(scheme_name, p, problem.dim(), tableau);
    run_one_with(problem, cfg, n, t_end, timing)
}

fn run_one_with(
    problem: Problem,
    cfg: SchemeConfig,
    n: usize,
    t_end: f64,
    timing: bool,
) -> Result<(ViolationRow, CellField, CellField)> {
    let scheme = assemble(cfg)?;
    let grid = problem.grid(n, scheme.ghost_width())?;
    let ic = problem.initialize(&grid)?;
    let env = problem.env();
    let opts = AdvanceOptions {
        t_end,
        snapshot_times: Vec::new(),
        timing,
    };
    let (fin, mut report, _) = advance(&scheme, &env, &ic, &opts)?;
    if problem.exact_period_translation() && (t_end / problem.period()).fract().abs() < 1e-12 {
        report.e1 = Some(l1_error(&fin, &ic)?);
    }
    Ok((
        ViolationRow {
            problem: problem.name(),
            scheme: scheme.config().name.as_str(),
            p: scheme.config().p,
            integrator: scheme.config().tableau.name,
            n,
            report,
        },
        fin,
        ic,
    ))
}

/// Violation table: `delta` per (p, integrator, scheme) on one problem.
pub fn run_violation_table(plan: &ExperimentPlan) -> Result<Vec<ViolationRow>> {
    plan.validate()?;
    let n = plan.resolutions[0];
    let pairings: Vec<(usize, ButcherTableau)> = if plan.integrators.is_empty() {
        violation_pairings(&plan.degrees)
    } else {
        plan.degrees
            .iter()
            .flat_map(|&p| {
                plan.integrators
                    .iter()
                    .map(move |name| (p, ButcherTableau::by_name(name).unwrap()))
            })
            .collect()
    };
    let mut jobs = Vec::new();
    for scheme in &plan.schemes {
        for (p, tab) in &pairings {
            jobs.push((*scheme, *p, tab.clone()));
        }
    }
    let mut rows: Vec<ViolationRow> = jobs
        .into_par_iter()
        .map(|(scheme, p, tab)| {
            run_one(plan.problem, scheme, p, tab, n, plan.t_end, false).map(|(row, _, _)| row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.p, r.integrator, r.scheme));
    Ok(rows)
}

/// One row of the convergence table: both flux reconstructions at one
/// (p, N) with the degree-matched integrator and CFL schedule.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub p: usize,
    pub integrator: &'static str,
    pub n: usize,
    pub cfl: f64,
    pub e1_gauss_legendre: f64,
    pub eoc_gauss_legendre: Option<f64>,
    pub e1_transverse: f64,
    pub eoc_transverse: Option<f64>,
}

/// Smooth-sine convergence study: the a priori scheme with adaptive
/// stepping disabled, the CFL schedule, and the overshoot check of the
/// smooth-extrema override skipped.
pub fn run_convergence_table(plan: &ExperimentPlan) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    if plan.problem != Problem::Sine2d {
        return Err(Error::InvalidConfig(
            "the convergence table runs on sine_2d".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = plan
        .degrees
        .iter()
        .flat_map(|&p| plan.resolutions.iter().map(move |&n| (p, n)))
        .collect();
    let results: Vec<(usize, usize, f64, &'static str, f64, f64)> = jobs
        .into_par_iter()
        .map(|(p, n)| {
            let tableau = convergence_integrator(p);
            let cfl = cfl_schedule(p, tableau.order, n);
            let mut e1 = [0.0; 2];
            for (slot, (name, method)) in [
                (SchemeName::APrioriMpp, FluxReconstruction::GaussLegendre),
                (SchemeName::APrioriT, FluxReconstruction::Transverse),
            ]
            .iter()
            .enumerate()
            {
                let mut cfg = SchemeConfig::named(*name, p, Dim::Two, tableau.clone());
                cfg.adaptive_dt = false;
                cfg.cfl = cfl;
                cfg.flux_reconstruction = *method;
                cfg.sed_skip_bounds_check = true;
                let (row, _, _) = run_one_with(plan.problem, cfg, n, plan.t_end, false)?;
                e1[slot] = row.report.e1.ok_or_else(|| {
                    Error::Diagnostics("convergence run must end on a full period".into())
                })?;
            }
            Ok((p, n, cfl, tableau.name, e1[0], e1[1]))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &p in &plan.degrees {
        let mut prev: Option<(f64, f64)> = None;
        let mut per_p: Vec<_> = results.iter().filter(|r| r.0 == p).collect();
        per_p.sort_by_key(|r| r.1);
        for (_, n, cfl, name, e_gl, e_tv) in per_p {
            let (eoc_gl, eoc_tv) = match prev {
                Some((pg, pt)) => (eoc(pg, *e_gl).ok(), eoc(pt, *e_tv).ok()),
                None => (None, None),
            };
            prev = Some((*e_gl, *e_tv));
            rows.push(ConvergenceRow {
                p,
                integrator: name,
                n: *n,
                cfl: *cfl,
                e1_gauss_legendre: *e_gl,
                eoc_gauss_legendre: eoc_gl,
                e1_transverse: *e_tv,
                eoc_transverse: eoc_tv,
            });
        }
    }
    Ok(rows)
}

/// One row of the timing table.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub scheme: &'static str,
    pub p: usize,
    pub n: usize,
    pub integrator: &'static str,
    pub cells_per_stage_per_second: f64,
}

/// Timing harness on the 2D square: adaptive stepping off, RK6 above p = 3,
/// speed averaged over the ten steps after warm-up.
pub fn run_timing(plan: &ExperimentPlan) -> Result<Vec<TimingRow>> {
    plan.validate()?;
    if plan.problem != Problem::Square2d {
        return Err(Error::InvalidConfig("the timing table runs on square_2d".into()));
    }
    let schemes = if plan.schemes.is_empty() {
        vec![SchemeName::APrioriMpp, SchemeName::APosterioriB]
    } else {
        plan.schemes.clone()
    };
    // Timing runs stay serial: concurrent runs would contend for cores.
    let mut rows = Vec::new();
    for &scheme_name in &schemes {
        for &p in &plan.degrees {
            for &n in &plan.resolutions {
                let tableau = if p > 3 {
                    ButcherTableau::rk6()
                } else {
                    convergence_integrator(p)
                };
                let mut cfg =
                    SchemeConfig::named(scheme_name, p, Dim::Two, tableau.clone());
                cfg.adaptive_dt = false;
                // twelve steps: warm-up plus the ten-step window, plus slack
                let h = 1.0 / n as f64;
                let speed = 3.0;
                let t_end = 12.5 * cfg.cfl * h / speed;
                let (row, _, _) = run_one_with(plan.problem, cfg, n, t_end, true)?;
                let rate = row.report.cells_per_stage_per_second.ok_or_else(|| {
                    Error::Diagnostics("timing run produced no throughput".into())
                })?;
                rows.push(TimingRow {
                    scheme: row.scheme,
                    p,
                    n,
                    integrator: tableau.name,
                    cells_per_stage_per_second: rate,
                });
            }
        }
    }
    Ok(rows)
}

/// Full single run used by the CLI `run` subcommand.
pub fn run_problem(
    problem: Problem,
    cfg: SchemeConfig,
    n: usize,
    t_end: f64,
    snapshot_times: Vec<f64>,
) -> Result<(RunReport, Vec<crate::solver::Snapshot>, CellField)> {
    let scheme = assemble(cfg)?;
    let grid = problem.grid(n, scheme.ghost_width())?;
    let ic = problem.initialize(&grid)?;
    let env = problem.env();
    let opts = AdvanceOptions {
        t_end,
        snapshot_times,
        timing: true,
    };
    let (fin, mut report, snaps) = advance(&scheme, &env, &ic, &opts)?;
    if problem.exact_period_translation() && (t_end / problem.period()).fract().abs() < 1e-12 {
        report.e1 = Some(l1_error(&fin, &ic)?);
    }
    Ok((report, snaps, fin))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_mass_is_exact_for_odd_and_even_n() {
        for n in [16, 17, 32, 33, 64] {
            let grid = Grid::new_2d(n, (0.0, 1.0), 0).unwrap();
            let f = square_averages(&grid);
            assert!(
                (f.total_mass() - 0.25).abs() <= 1e-14,
                "N = {n}: {}",
                f.total_mass()
            );
        }
    }

    #[test]
    fn square_half_covered_cell() {
        // N = 10: cell [0.2, 0.3] is split in half by the x = 0.25 edge.
        let grid = Grid::new_2d(10, (0.0, 1.0), 0).unwrap();
        let f = square_averages(&grid);
        // x-fraction 0.5, y-range fully inside for j = 4 ([0.4, 0.5])
        assert!((f.get2(2, 4) - 0.5).abs() < 1e-14);
        // fully inside and fully outside cells
        assert!((f.get2(4, 4) - 1.0).abs() < 1e-15);
        assert_eq!(f.get2(0, 0), 0.0);
    }

    #[test]
    fn sine_total_mass_is_zero() {
        let grid = Grid::new_2d(32, (0.0, 1.0), 0).unwrap();
        let f = sine_averages(&grid);
        assert!(f.total_mass().abs() < 1e-13);
    }

    #[test]
    fn composite_profile_stays_in_unit_range() {
        let grid = Grid::new_1d(256, (0.0, 1.0), 0).unwrap();
        let f = composite_averages(&grid);
        let (lo, hi) = f.interior_min_max();
        assert!(lo >= 0.0 && hi <= 1.0 + 1e-12, "range [{lo}, {hi}]");
        assert!(hi > 0.999, "square feature should reach 1");
    }

    #[test]
    fn slotted_cylinder_geometry() {
        let n = 128;
        let grid = Grid::new_2d(n, (-1.0, 1.0), 0).unwrap();
        let f = slotted_cylinder_averages(&grid);
        let h = grid.h();
        let at = |x: f64, y: f64| {
            let i = ((x + 1.0) / h) as isize;
            let j = ((y + 1.0) / h) as isize;
            f.get2(i, j)
        };
        assert_eq!(at(-0.15, 0.5), 1.0); // deep inside the disk, left of slot
        assert_eq!(at(0.0, 0.55), 0.0); // inside the slot
        assert_eq!(at(0.0, 0.75), 1.0); // above the slot, inside the disk
        assert_eq!(at(0.5, -0.5), 0.0); // far outside
        // mass close to the analytic area: pi r^2 - slot area inside disk
        let r: f64 = 0.3;
        let y_top: f64 = 0.7 - 0.5;
        let x_s: f64 = 0.025;
        // slot spans y in [0.5 - sqrt(r^2 - x^2), 0.7] for |x| <= 0.025
        let slot_area = 2.0 * x_s * y_top
            + (x_s * (r * r - x_s * x_s).sqrt() + r * r * (x_s / r).asin());
        let exact = std::f64::consts::PI * r * r - slot_area;
        assert!(
            (f.total_mass() - exact).abs() < 2e-4,
            "mass {} vs {exact}",
            f.total_mass()
        );
    }

    #[test]
    fn cfl_schedule_matches_tabulated_values() {
        // p = 6 with RK6 (q = 5)
        assert!((cfl_schedule(6, 6, 32) - 0.45).abs() < 0.01);
        assert!((cfl_schedule(6, 6, 64) - 0.40).abs() < 0.01);
        assert!((cfl_schedule(6, 6, 128) - 0.36).abs() < 0.01);
        assert!((cfl_schedule(7, 6, 64) - 0.20).abs() < 0.01);
        // no reduction needed when the integrator covers the degree
        assert_eq!(cfl_schedule(3, 4, 64), 0.8);
    }

    #[test]
    fn violation_pairings_follow_the_table_layout() {
        let pairs = violation_pairings(&[1, 2, 3]);
        let names: Vec<(usize, &str)> = pairs.iter().map(|(p, t)| (*p, t.name)).collect();
        assert_eq!(
            names,
            vec![(1, "SSPRK2"), (2, "SSPRK3"), (3, "SSPRK3"), (3, "RK4")]
        );
    }
}
