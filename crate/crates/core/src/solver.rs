//! Named scheme assembly and the time-advance driver.

use std::time::{Duration, Instant};

use crate::diagnostics::{RunReport, ViolationTracker};
use crate::error::{Error, Result};
use crate::flux::{
    face_fluxes_1d, face_integrals_gauss_legendre_2d, face_integrals_transverse_2d,
    reconstruct_face_nodes_2d, reconstruct_nodes_1d, residual_from_faces, AlphaMode, DegreeKernel,
    FaceFluxField, FluxFunction, FluxReconstruction, ThetaNodes,
};
use crate::limiter_aposteriori::{
    aux_bc, blend_coefficients, detect_troubled, fallback_fluxes, muscl_interface_values,
    FallbackLimiterKind, NAD_EPS,
};
use crate::limiter_apriori::{
    compute_theta_1d, compute_theta_2d, limit_nodes_1d, limit_nodes_2d, NodeSet,
};
use crate::mesh::{fill_ghosts_raw, BoundaryCondition, CellField, Dim};
use crate::sed::{sed_override_apriori, smooth_window, smoothness_alpha, EPS_M};
use crate::timestepping::{adaptive_mpp_step, rk_step, ButcherTableau, StageInfo};

/// The named schemes of the benchmark matrix, plus the unlimited baseline
/// and the second-order reference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeName {
    APrioriMpp,
    APrioriT,
    APosteriori,
    APosterioriB,
    MusclHancock,
    Unlimited,
}

impl SchemeName {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "apriorimpp" => Some(Self::APrioriMpp),
            "apriorit" => Some(Self::APrioriT),
            "aposteriori" => Some(Self::APosteriori),
            "aposteriorib" => Some(Self::APosterioriB),
            "muscl-hancock" | "musclhancock" => Some(Self::MusclHancock),
            "unlimited" => Some(Self::Unlimited),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::APrioriMpp => "aPrioriMPP",
            Self::APrioriT => "aPrioriT",
            Self::APosteriori => "aPosteriori",
            Self::APosterioriB => "aPosterioriB",
            Self::MusclHancock => "MUSCL-Hancock",
            Self::Unlimited => "unlimited",
        }
    }
}

/// Full specification of one scheme: degree, limiting paradigm, flux
/// reconstruction, CFL policy, fallback limiter, blending, and integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub name: SchemeName,
    pub p: usize,
    pub dim: Dim,
    /// 2D face-integration strategy (ignored in 1D).
    pub flux_reconstruction: FluxReconstruction,
    /// Node set for the a priori limiter factor.
    pub theta_node_set: NodeSet,
    pub cfl: f64,
    pub adaptive_dt: bool,
    pub fallback_limiter: FallbackLimiterKind,
    pub blending: bool,
    pub sed: bool,
    /// Skip the global-bounds branch of the smooth-extrema override
    /// (smooth convergence runs only).
    pub sed_skip_bounds_check: bool,
    pub alpha_mode: AlphaMode,
    pub tableau: ButcherTableau,
}

impl SchemeConfig {
    /// Defaults of the named scheme rows.
    pub fn named(name: SchemeName, p: usize, dim: Dim, tableau: ButcherTableau) -> Self {
        let fallback = match dim {
            Dim::One => FallbackLimiterKind::Moncen,
            Dim::Two => FallbackLimiterKind::Pp,
        };
        let mut cfg = SchemeConfig {
            name,
            p,
            dim,
            flux_reconstruction: FluxReconstruction::GaussLegendre,
            theta_node_set: NodeSet::Centroid,
            cfl: 0.8,
            adaptive_dt: false,
            fallback_limiter: fallback,
            blending: false,
            sed: true,
            sed_skip_bounds_check: false,
            alpha_mode: AlphaMode::Local,
            tableau,
        };
        match name {
            SchemeName::APrioriMpp => {
                cfg.adaptive_dt = true;
            }
            SchemeName::APrioriT => {
                cfg.flux_reconstruction = FluxReconstruction::Transverse;
            }
            SchemeName::APosteriori | SchemeName::APosterioriB => {
                cfg.flux_reconstruction = FluxReconstruction::Transverse;
                cfg.blending = name == SchemeName::APosterioriB;
            }
            SchemeName::MusclHancock | SchemeName::Unlimited => {}
        }
        cfg
    }

    pub fn paradigm(&self) -> Paradigm {
        match self.name {
            SchemeName::APrioriMpp | SchemeName::APrioriT => Paradigm::APriori,
            SchemeName::APosteriori | SchemeName::APosterioriB => Paradigm::APosteriori,
            SchemeName::MusclHancock => Paradigm::MusclHancock,
            SchemeName::Unlimited => Paradigm::Unlimited,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::stencil::check_degree(self.p)?;
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "CFL factor must be positive, got {}",
                self.cfl
            )));
        }
        if self.dim == Dim::One && self.fallback_limiter == FallbackLimiterKind::Pp {
            return Err(Error::InvalidConfig(
                "the PP fallback limiter is only defined in 2D".into(),
            ));
        }
        if self.name == SchemeName::APrioriT && self.dim == Dim::One {
            return Err(Error::InvalidConfig(
                "aPrioriT selects a 2D flux reconstruction; it has no 1D form".into(),
            ));
        }
        if self.theta_node_set == NodeSet::GaussLobatto
            && self.dim == Dim::Two
            && self.flux_reconstruction == FluxReconstruction::Transverse
        {
            return Err(Error::InvalidConfig(
                "the Gauss-Lobatto node set pairs only with Gauss-Legendre fluxes in 2D".into(),
            ));
        }
        Ok(())
    }

    /// Non-fatal configuration smells, surfaced by the CLI.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.tableau.name == "SSPRK2" && self.p >= 2 {
            out.push(format!(
                "SSPRK2 with p = {} sits slightly outside the linear stability region at C = 1",
                self.p
            ));
        }
        if self.tableau.order < self.p.min(6) && !self.adaptive_dt {
            out.push(format!(
                "integrator order {} is below the spatial order {}; expect the temporal error to dominate",
                self.tableau.order,
                self.p + 1
            ));
        }
        out
    }
}

/// Limiting paradigm a scheme runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Paradigm {
    Unlimited,
    APriori,
    APosteriori,
    MusclHancock,
}

/// Velocity and boundary condition of one run.
#[derive(Debug, Clone)]
pub struct RunEnv {
    pub flux: FluxFunction,
    pub bc: BoundaryCondition,
}

/// An assembled scheme: configuration plus precomputed stencils.
#[derive(Debug, Clone)]
pub struct Scheme {
    cfg: SchemeConfig,
    kern: DegreeKernel,
    ghost: usize,
}

/// Builds the stepping machinery for a validated configuration.
pub fn assemble(cfg: SchemeConfig) -> Result<Scheme> {
    cfg.validate()?;
    let mut cfg = cfg;
    if cfg.dim == Dim::One {
        cfg.flux_reconstruction = FluxReconstruction::GaussLegendre;
    }
    let kern = DegreeKernel::new(cfg.p)?;
    let ghost = required_ghost(&cfg, &kern);
    Ok(Scheme { cfg, kern, ghost })
}

/// Ghost width fixed at assembly: the maximum reach over every active
/// stencil pass (reconstruction, transverse integration, detection windows).
fn required_ghost(cfg: &SchemeConfig, kern: &DegreeKernel) -> usize {
    let node = kern.node_reach() + 1;
    let transverse = kern.midpoint.reach() + kern.transverse_integral.reach();
    let base = match (cfg.dim, cfg.flux_reconstruction) {
        (Dim::One, _) => node,
        (Dim::Two, FluxReconstruction::GaussLegendre) => node,
        (Dim::Two, FluxReconstruction::Transverse) => node.max(transverse),
    };
    // (p+1)/2 rounded up, plus one: the documented lower bound.
    let documented = (cfg.p + 2) / 2 + 1;
    base.max(documented).max(3)
}

impl Scheme {
    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &DegreeKernel {
        &self.kern
    }

    pub fn ghost_width(&self) -> usize {
        self.ghost
    }

    /// Reduced CFL factor of the degree (minimum Gauss-Lobatto weight).
    pub fn c_mpp(&self) -> f64 {
        self.kern.c_mpp
    }

    fn theta_extras(&self) -> ThetaNodes {
        match (self.cfg.paradigm(), self.cfg.theta_node_set) {
            (Paradigm::APriori, NodeSet::Centroid) => ThetaNodes::Centroid,
            (Paradigm::APriori, NodeSet::GaussLobatto) => ThetaNodes::GaussLobatto,
            _ => ThetaNodes::None,
        }
    }

    /// High-order (possibly theta-limited) face fluxes of a stage state.
    fn high_order_faces(&self, y: &CellField, env: &RunEnv, bounds: (f64, f64)) -> FaceFluxField {
        let grid = y.grid();
        match self.cfg.dim {
            Dim::One => {
                let mut nodes = reconstruct_nodes_1d(y, &self.kern, self.theta_extras());
                if self.cfg.paradigm() == Paradigm::APriori {
                    let mut tf = compute_theta_1d(y, &nodes);
                    if self.cfg.sed {
                        let alpha = smoothness_alpha(y);
                        let window = smooth_window(grid, &alpha);
                        sed_override_apriori(
                            &mut tf.theta,
                            &window,
                            &tf.node_max,
                            &tf.node_min,
                            grid,
                            bounds,
                            EPS_M,
                            self.cfg.sed_skip_bounds_check,
                        );
                    }
                    fill_ghosts_raw(grid, &mut tf.theta, aux_bc(env.bc, 1.0));
                    limit_nodes_1d(&mut nodes, &tf.theta, y);
                }
                face_fluxes_1d(&nodes, grid, &env.flux)
            }
            Dim::Two => {
                let mut nodes =
                    reconstruct_face_nodes_2d(y, &self.kern, self.cfg.flux_reconstruction, self.theta_extras());
                if self.cfg.paradigm() == Paradigm::APriori {
                    let mut tf = compute_theta_2d(y, &nodes);
                    if self.cfg.sed {
                        let alpha = smoothness_alpha(y);
                        let window = smooth_window(grid, &alpha);
                        sed_override_apriori(
                            &mut tf.theta,
                            &window,
                            &tf.node_max,
                            &tf.node_min,
                            grid,
                            bounds,
                            EPS_M,
                            self.cfg.sed_skip_bounds_check,
                        );
                    }
                    fill_ghosts_raw(grid, &mut tf.theta, aux_bc(env.bc, 1.0));
                    limit_nodes_2d(&mut nodes, &tf.theta, y);
                }
                match self.cfg.flux_reconstruction {
                    FluxReconstruction::GaussLegendre => {
                        face_integrals_gauss_legendre_2d(&nodes, &self.kern, grid, &env.flux)
                    }
                    FluxReconstruction::Transverse => {
                        face_integrals_transverse_2d(&nodes, &self.kern, grid, &env.flux)
                    }
                }
            }
        }
    }

    /// One stage residual; ghost cells of `y` are refilled here.
    fn stage_residual(
        &self,
        y: &mut CellField,
        info: StageInfo,
        env: &RunEnv,
        bounds: (f64, f64),
    ) -> CellField {
        y.fill_ghosts(env.bc);
        let high = self.high_order_faces(y, env, bounds);
        if self.cfg.paradigm() != Paradigm::APosteriori {
            return residual_from_faces(&high);
        }
        // A posteriori revision: screen a full-step Euler candidate of this
        // stage state — the Euler building block of the SSP convex
        // combination — and blend fallback fluxes where it is inadmissible.
        let high_residual = residual_from_faces(&high);
        let mut candidate = y.axpy(info.dt, &high_residual);
        candidate.fill_ghosts(env.bc);
        let mask = detect_troubled(&candidate, y, bounds, NAD_EPS, self.cfg.sed);
        if !mask.any() {
            return high_residual;
        }
        let iv = muscl_interface_values(y, self.cfg.fallback_limiter)
            .expect("fallback limiter validated at assembly");
        let fb = fallback_fluxes(&iv, y.grid(), &env.flux);
        let phi = blend_coefficients(&mask, y.grid(), self.cfg.blending, env.bc);
        let revised = crate::limiter_aposteriori::revise_face_fluxes(&high, &fb, &phi, y.grid());
        residual_from_faces(&revised)
    }

    /// One step of size `dt` (no adaptivity).
    pub fn step_once(
        &self,
        state: &CellField,
        dt: f64,
        env: &RunEnv,
        bounds: (f64, f64),
    ) -> CellField {
        if self.cfg.paradigm() == Paradigm::MusclHancock {
            let mut s = state.clone();
            s.fill_ghosts(env.bc);
            return muscl_hancock_step(&s, dt, self.cfg.fallback_limiter, &env.flux);
        }
        rk_step(state, dt, &self.cfg.tableau, |y, info| {
            self.stage_residual(y, info, env, bounds)
        })
    }
}

/// Second-order MUSCL-Hancock reference step: interface values advanced a
/// half step by the local flux difference, then one Riemann solve per face.
/// Expects filled ghosts.
pub fn muscl_hancock_step(
    state: &CellField,
    dt: f64,
    limiter: FallbackLimiterKind,
    flux: &FluxFunction,
) -> CellField {
    let grid = state.grid().clone();
    let mut iv = muscl_interface_values(state, limiter).expect("limiter valid for this dimension");
    let h = grid.h();
    let half = 0.5 * dt / h;
    let n = grid.n() as isize;
    match grid.dim() {
        Dim::One => {
            let (v, _) = flux.velocity.at(0.0, 0.0);
            for i in -1..=n {
                let c = grid.idx1(i);
                let shift = half * v * (iv.x_plus[c] - iv.x_minus[c]);
                iv.x_plus[c] -= shift;
                iv.x_minus[c] -= shift;
            }
        }
        Dim::Two => {
            for i in -1..=n {
                for j in -1..=n {
                    let c = grid.idx2(i, j);
                    let (x, y) = (grid.center_at(i), grid.center_at(j));
                    let (vx, vy) = flux.velocity.at(x, y);
                    let shift = half
                        * (vx * (iv.x_plus[c] - iv.x_minus[c]) + vy * (iv.y_plus[c] - iv.y_minus[c]));
                    iv.x_plus[c] -= shift;
                    iv.x_minus[c] -= shift;
                    iv.y_plus[c] -= shift;
                    iv.y_minus[c] -= shift;
                }
            }
        }
    }
    let faces = fallback_fluxes(&iv, &grid, flux);
    let residual = residual_from_faces(&faces);
    let mut out = state.axpy(dt, &residual);
    out.time = state.time + dt;
    out
}

/// A stored copy of the state at a requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub scheme: String,
    pub field: CellField,
}

/// Options for [`advance`].
#[derive(Debug, Clone, Default)]
pub struct AdvanceOptions {
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Record per-step kernel wall times (diagnostics excluded).
    pub timing: bool,
}

/// Advances `ic` to `t_end`, clipping the step to land exactly on snapshot
/// times and the final time, and accumulating the violation metric over
/// every accepted step.
pub fn advance(
    scheme: &Scheme,
    env: &RunEnv,
    ic: &CellField,
    opts: &AdvanceOptions,
) -> Result<(CellField, RunReport, Vec<Snapshot>)> {
    let ghost = scheme.ghost_width().max(ic.grid().ghost());
    let grid = ic.grid().with_ghost(ghost);
    let mut state = match grid.dim() {
        Dim::One => CellField::from_interior_1d(grid.clone(), &ic.interior_values())?,
        Dim::Two => CellField::from_interior_2d(grid.clone(), &ic.interior_values())?,
    };
    state.time = ic.time;

    let bounds = state.interior_min_max();
    let mut tracker = ViolationTracker::new(bounds);
    let mass_initial = state.total_mass();

    let speed = env.flux.velocity.speed_sum_bound(&grid);
    let h = grid.h();
    let mut events: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|t| *t > state.time && *t <= opts.t_end)
        .collect();
    events.push(opts.t_end);
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup();

    let mut snapshots = Vec::new();
    let mut steps = 0usize;
    let mut retries = 0u64;
    let mut timings: Vec<Duration> = Vec::new();

    if speed == 0.0 {
        // Stationary problem: the averages never change.
        state.time = opts.t_end;
        for t in &events {
            if opts.snapshot_times.contains(t) {
                snapshots.push(Snapshot {
                    time: *t,
                    step: 0,
                    scheme: scheme.cfg.name.as_str().into(),
                    field: state.clone(),
                });
            }
        }
        let report = RunReport {
            scheme: scheme.cfg.name.as_str().into(),
            p: scheme.cfg.p,
            n: grid.n(),
            integrator: scheme.cfg.tableau.name.into(),
            t_end: opts.t_end,
            delta_minus: 0.0,
            delta_plus: 0.0,
            delta: 0.0,
            e1: None,
            mass_initial,
            mass_final: state.total_mass(),
            steps: 0,
            retries: 0,
            cells_per_stage_per_second: None,
        };
        return Ok((state, report, snapshots));
    }

    let dt_base = scheme.cfg.cfl * h / speed;
    let dt_floor = scheme.c_mpp() * h / speed;
    let eps_t = 1e-12 * opts.t_end.max(1.0);

    for &event in &events {
        while state.time < event - eps_t {
            let dt_try = dt_base.min(event - state.time);
            let started = Instant::now();
            let (next, step_retries) = if scheme.cfg.adaptive_dt {
                let out = adaptive_mpp_step(dt_try, dt_floor.min(dt_try), bounds, |dt| {
                    scheme.step_once(&state, dt, env, bounds)
                });
                (out.state, out.retries)
            } else {
                (scheme.step_once(&state, dt_try, env, bounds), 0)
            };
            if opts.timing {
                timings.push(started.elapsed());
            }
            steps += 1;
            retries += step_retries as u64;
            if !next.interior_is_finite() {
                return Err(Error::NonFinite {
                    step: steps,
                    time: state.time,
                });
            }
            state = next;
            tracker.update(&state);
        }
        state.time = event;
        if event < opts.t_end || opts.snapshot_times.contains(&event) {
            snapshots.push(Snapshot {
                time: event,
                step: steps,
                scheme: scheme.cfg.name.as_str().into(),
                field: state.clone(),
            });
        }
    }

    let stages = match scheme.cfg.paradigm() {
        Paradigm::MusclHancock => 1,
        _ => scheme.cfg.tableau.stages(),
    };
    let throughput = if opts.timing && timings.len() >= 11 {
        crate::diagnostics::throughput(&timings, grid.interior_len(), stages).ok()
    } else {
        None
    };

    let report = RunReport {
        scheme: scheme.cfg.name.as_str().into(),
        p: scheme.cfg.p,
        n: grid.n(),
        integrator: scheme.cfg.tableau.name.into(),
        t_end: opts.t_end,
        delta_minus: tracker.delta_minus,
        delta_plus: tracker.delta_plus,
        delta: tracker.delta(),
        e1: None,
        mass_initial,
        mass_final: state.total_mass(),
        steps,
        retries,
        cells_per_stage_per_second: throughput,
    };
    Ok((state, report, snapshots))
}
