//! Explicit Runge-Kutta integration, the adaptive maximum-principle
//! time-step wrapper, and linear-stability utilities.

use num_complex::Complex64;

use crate::mesh::CellField;
use crate::stencil::left_face_stencil;

/// Butcher tableau of an explicit Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: &'static str,
    pub order: usize,
    /// Whether the method is a convex combination of Euler steps.
    pub ssp: bool,
    /// Strictly lower-triangular stage matrix, row i holding a[i][0..i].
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn euler() -> Self {
        ButcherTableau {
            name: "Euler",
            order: 1,
            ssp: true,
            a: vec![vec![]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    pub fn ssprk2() -> Self {
        ButcherTableau {
            name: "SSPRK2",
            order: 2,
            ssp: true,
            a: vec![vec![], vec![1.0]],
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
        }
    }

    pub fn ssprk3() -> Self {
        ButcherTableau {
            name: "SSPRK3",
            order: 3,
            ssp: true,
            a: vec![vec![], vec![1.0], vec![0.25, 0.25]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
        }
    }

    pub fn rk4() -> Self {
        ButcherTableau {
            name: "RK4",
            order: 4,
            ssp: false,
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    /// Seven-stage sixth-order method; the irrational entries are built
    /// from sqrt(21) at full precision.
    pub fn rk6() -> Self {
        let s = 21.0_f64.sqrt();
        ButcherTableau {
            name: "RK6",
            order: 6,
            ssp: false,
            a: vec![
                vec![],
                vec![1.0],
                vec![3.0 / 8.0, 1.0 / 8.0],
                vec![8.0 / 27.0, 2.0 / 27.0, 8.0 / 27.0],
                vec![
                    3.0 * (3.0 * s - 7.0) / 392.0,
                    (s - 7.0) / 49.0,
                    6.0 * (7.0 - s) / 49.0,
                    -3.0 * (21.0 - s) / 392.0,
                ],
                vec![
                    (-231.0 - 51.0 * s) / 392.0,
                    (-7.0 - s) / 49.0,
                    -8.0 * s / 49.0,
                    3.0 * (21.0 + 121.0 * s) / 1960.0,
                    49.0 * (6.0 + s) / 245.0,
                ],
                vec![
                    (22.0 + 7.0 * s) / 12.0,
                    2.0 / 3.0,
                    2.0 * (7.0 * s - 5.0) / 9.0,
                    -63.0 * (3.0 * s - 2.0) / 180.0,
                    -7.0 * (49.0 + 9.0 * s) / 90.0,
                    7.0 * (7.0 - s) / 18.0,
                ],
            ],
            b: vec![
                1.0 / 20.0,
                0.0,
                16.0 / 45.0,
                0.0,
                49.0 / 180.0,
                49.0 / 180.0,
                1.0 / 20.0,
            ],
            c: vec![
                0.0,
                1.0,
                0.5,
                2.0 / 3.0,
                (7.0 - s) / 14.0,
                (7.0 + s) / 14.0,
                1.0,
            ],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "euler" => Some(Self::euler()),
            "ssprk2" => Some(Self::ssprk2()),
            "ssprk3" => Some(Self::ssprk3()),
            "rk4" => Some(Self::rk4()),
            "rk6" => Some(Self::rk6()),
            _ => None,
        }
    }

    pub fn all() -> Vec<Self> {
        vec![
            Self::euler(),
            Self::ssprk2(),
            Self::ssprk3(),
            Self::rk4(),
            Self::rk6(),
        ]
    }

    /// Largest consistency defect over `|c_i - sum_j a_ij|` and
    /// `|1 - sum b_i|`.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst: f64 = (1.0 - self.b.iter().sum::<f64>()).abs();
        for (i, row) in self.a.iter().enumerate() {
            worst = worst.max((self.c[i] - row.iter().sum::<f64>()).abs());
        }
        worst
    }
}

/// Per-stage context handed to the stage residual closure.
#[derive(Debug, Clone, Copy)]
pub struct StageInfo {
    pub index: usize,
    pub c: f64,
    pub dt: f64,
}

/// One explicit Runge-Kutta step.
///
/// `stage_residual` receives each stage state (mutably, so it can fill
/// ghosts) together with the stage context, and returns `k_i`. Any per-stage
/// flux revision — the a posteriori limiter — lives inside that closure; the
/// integrator never inspects limiter state.
pub fn rk_step<F>(
    state: &CellField,
    dt: f64,
    tableau: &ButcherTableau,
    mut stage_residual: F,
) -> CellField
where
    F: FnMut(&mut CellField, StageInfo) -> CellField,
{
    let stages = tableau.stages();
    let mut ks: Vec<CellField> = Vec::with_capacity(stages);
    for i in 0..stages {
        let mut y = state.clone();
        for (j, aij) in tableau.a[i].iter().enumerate() {
            if *aij != 0.0 {
                y.axpy_in_place(dt * aij, &ks[j]);
            }
        }
        y.time = state.time + tableau.c[i] * dt;
        let info = StageInfo {
            index: i,
            c: tableau.c[i],
            dt,
        };
        ks.push(stage_residual(&mut y, info));
    }
    let mut out = state.clone();
    for (bi, ki) in tableau.b.iter().zip(ks.iter()) {
        if *bi != 0.0 {
            out.axpy_in_place(dt * bi, ki);
        }
    }
    out.time = state.time + dt;
    out
}

/// Result of one adaptive maximum-principle step.
#[derive(Debug)]
pub struct AdaptiveOutcome {
    pub state: CellField,
    pub dt_used: f64,
    pub retries: u32,
}

/// Slack absorbing round-off when checking the global bounds; much tighter
/// than the -1e-10 reporting threshold so retries stay honest.
pub const MPP_CHECK_SLACK: f64 = 1e-13;

/// Attempts a step of `dt_init`, halving the step while the result leaves
/// `[m - slack, M + slack]`. Once `dt` reaches `dt_floor` (the reduced-CFL
/// step) the result is accepted unconditionally.
pub fn adaptive_mpp_step<S>(
    dt_init: f64,
    dt_floor: f64,
    bounds: (f64, f64),
    mut step: S,
) -> AdaptiveOutcome
where
    S: FnMut(f64) -> CellField,
{
    let (m, big_m) = bounds;
    let mut dt = dt_init;
    let mut retries = 0;
    loop {
        let candidate = step(dt);
        let (lo, hi) = candidate.interior_min_max();
        let ok = lo >= m - MPP_CHECK_SLACK && hi <= big_m + MPP_CHECK_SLACK;
        if ok || dt <= dt_floor * (1.0 + 1e-12) {
            return AdaptiveOutcome {
                state: candidate,
                dt_used: dt,
                retries,
            };
        }
        dt = (dt / 2.0).max(dt_floor);
        retries += 1;
    }
}

/// Dahlquist stability function `R(z) = 1 + z b^T (I - zA)^{-1} 1`,
/// evaluated via the stage recursion.
pub fn stability_function(tableau: &ButcherTableau, z: Complex64) -> Complex64 {
    let stages = tableau.stages();
    // Stage increments K_i = z * u_i with u_i = 1 + sum_j a_ij K_j.
    let mut k = vec![Complex64::new(0.0, 0.0); stages];
    for i in 0..stages {
        let mut y = Complex64::new(1.0, 0.0);
        for (j, aij) in tableau.a[i].iter().enumerate() {
            y += aij * k[j];
        }
        k[i] = z * y;
    }
    let mut r = Complex64::new(1.0, 0.0);
    for (bi, ki) in tableau.b.iter().zip(k.iter()) {
        r += bi * ki;
    }
    r
}

/// Fourier symbol of the upwind operator of degree `p` (unit velocity),
/// scaled by the CFL factor: `z(k) = -C (1 - e^{-ik}) S(k)` where `S` is the
/// transform of the right-face reconstruction stencil.
pub fn modified_wavenumber(p: usize, k: f64, cfl: f64) -> Complex64 {
    let right = left_face_stencil(p).reversed();
    let mut s = Complex64::new(0.0, 0.0);
    for (o, w) in right.offsets().iter().zip(right.weights().iter()) {
        s += w * Complex64::new(0.0, k * *o as f64).exp();
    }
    -cfl * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -k).exp()) * s
}

/// Samples the eigenvalue track `z(k)` for `k` in `[0, pi]`.
pub fn eigenvalue_track(p: usize, cfl: f64, samples: usize) -> Vec<(f64, Complex64)> {
    (0..=samples)
        .map(|i| {
            let k = std::f64::consts::PI * i as f64 / samples as f64;
            (k, modified_wavenumber(p, k, cfl))
        })
        .collect()
}
