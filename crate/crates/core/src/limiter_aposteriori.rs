//! A posteriori limiting: troubled-cell detection on a candidate update,
//! MUSCL fallback fluxes, and convex blending of revised and high-order
//! fluxes around troubled cells.

use crate::error::{Error, Result};
use crate::flux::{numerical_flux, AlphaMode, FaceFluxField, FluxFunction};
use crate::mesh::{fill_ghosts_raw, BoundaryCondition, CellField, Dim, Grid};
use crate::sed::{smooth_window, smoothness_alpha, EPS_M};

/// Relaxation of the local bounds in the admissibility test.
pub const NAD_EPS: f64 = 1e-5;

/// Slope limiter of the MUSCL fallback scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackLimiterKind {
    Minmod,
    Moncen,
    /// Positivity-preserving 3x3 limiter; 2D only.
    Pp,
}

impl FallbackLimiterKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minmod" => Some(Self::Minmod),
            "moncen" => Some(Self::Moncen),
            "pp" => Some(Self::Pp),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Minmod => "minmod",
            Self::Moncen => "moncen",
            Self::Pp => "pp",
        }
    }
}

/// Boundary treatment for auxiliary per-cell arrays (masks, blend factors):
/// periodic wraps, Dirichlet pads with the given constant.
pub(crate) fn aux_bc(bc: BoundaryCondition, pad: f64) -> BoundaryCondition {
    match bc {
        BoundaryCondition::Periodic => BoundaryCondition::Periodic,
        BoundaryCondition::Dirichlet(_) => BoundaryCondition::Dirichlet(pad),
    }
}

/// Per-cell troubled flags (1.0 / 0.0 in ghost-padded layout so the mask
/// can wrap like a field). Defined over interior cells.
#[derive(Debug, Clone)]
pub struct TroubledMask {
    pub flags: Vec<f64>,
}

impl TroubledMask {
    pub fn any(&self) -> bool {
        self.flags.iter().any(|f| *f != 0.0)
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f != 0.0).count()
    }
}

/// Numerical admissibility detection on a stage candidate, with the smooth
/// extrema override: a cell is troubled when the candidate leaves the
/// relaxed local bounds of the parent state; candidates beyond the global
/// bounds stay troubled regardless, while cells sitting in an all-smooth
/// window are unflagged.
pub fn detect_troubled(
    candidate: &CellField,
    parent: &CellField,
    bounds: (f64, f64),
    eps: f64,
    use_sed: bool,
) -> TroubledMask {
    let grid = parent.grid();
    let (m, big_m) = bounds;
    let relax = eps * (big_m - m);
    let u = parent.raw();
    let star = candidate.raw();
    let mut flags = vec![0.0; grid.storage_len()];
    let window = if use_sed {
        let alpha = smoothness_alpha(candidate);
        Some(smooth_window(grid, &alpha))
    } else {
        None
    };
    let n = grid.n() as isize;
    let nt = grid.n_tot();
    let mut visit = |c: usize, lo: f64, hi: f64| {
        let mut troubled = !(star[c] >= lo - relax && star[c] <= hi + relax);
        if let Some(w) = window.as_ref() {
            if star[c] > big_m + EPS_M || star[c] < m - EPS_M {
                troubled = true;
            } else if w[c] {
                troubled = false;
            }
        }
        flags[c] = if troubled { 1.0 } else { 0.0 };
    };
    match grid.dim() {
        Dim::One => {
            for i in 0..n {
                let c = grid.idx1(i);
                let hi = u[c - 1].max(u[c]).max(u[c + 1]);
                let lo = u[c - 1].min(u[c]).min(u[c + 1]);
                visit(c, lo, hi);
            }
        }
        Dim::Two => {
            for i in 0..n {
                for j in 0..n {
                    let c = grid.idx2(i, j);
                    let hi = u[c]
                        .max(u[c - 1])
                        .max(u[c + 1])
                        .max(u[c - nt])
                        .max(u[c + nt]);
                    let lo = u[c]
                        .min(u[c - 1])
                        .min(u[c + 1])
                        .min(u[c - nt])
                        .min(u[c + nt]);
                    visit(c, lo, hi);
                }
            }
        }
    }
    TroubledMask { flags }
}

/// MUSCL interface values per cell: `u_face = ubar -/+ S/2` along each axis
/// (ghost-padded layout, valid over interior plus one ring).
#[derive(Debug, Clone)]
pub struct InterfaceValues {
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
    pub y_plus: Vec<f64>,
}

fn minmod_slope(sl: f64, sr: f64) -> f64 {
    if sl * sr <= 0.0 {
        0.0
    } else {
        sl.signum() * sl.abs().min(sr.abs())
    }
}

fn moncen_slope(sl: f64, sr: f64) -> f64 {
    if sl * sr <= 0.0 {
        0.0
    } else {
        let sc = 0.5 * (sl + sr);
        sc.signum() * (2.0 * sl.abs()).min(sc.abs()).min(2.0 * sr.abs())
    }
}

/// Interface values of the fallback reconstruction; PP needs the full 3x3
/// neighborhood and exists only in 2D.
pub fn muscl_interface_values(
    field: &CellField,
    limiter: FallbackLimiterKind,
) -> Result<InterfaceValues> {
    let grid = field.grid();
    let u = field.raw();
    let len = u.len();
    let mut iv = InterfaceValues {
        x_minus: vec![0.0; len],
        x_plus: vec![0.0; len],
        y_minus: Vec::new(),
        y_plus: Vec::new(),
    };
    match grid.dim() {
        Dim::One => {
            if limiter == FallbackLimiterKind::Pp {
                return Err(Error::InvalidConfig(
                    "the PP fallback limiter is only defined in 2D".into(),
                ));
            }
            let n = grid.n() as isize;
            for i in -1..=n {
                let c = grid.idx1(i);
                let (sl, sr) = (u[c] - u[c - 1], u[c + 1] - u[c]);
                let s = match limiter {
                    FallbackLimiterKind::Minmod => minmod_slope(sl, sr),
                    FallbackLimiterKind::Moncen => moncen_slope(sl, sr),
                    FallbackLimiterKind::Pp => unreachable!(),
                };
                iv.x_minus[c] = u[c] - 0.5 * s;
                iv.x_plus[c] = u[c] + 0.5 * s;
            }
        }
        Dim::Two => {
            iv.y_minus = vec![0.0; len];
            iv.y_plus = vec![0.0; len];
            let n = grid.n() as isize;
            let nt = grid.n_tot();
            for i in -1..=n {
                for j in -1..=n {
                    let c = grid.idx2(i, j);
                    let (sx, sy) = match limiter {
                        FallbackLimiterKind::Minmod => (
                            minmod_slope(u[c] - u[c - nt], u[c + nt] - u[c]),
                            minmod_slope(u[c] - u[c - 1], u[c + 1] - u[c]),
                        ),
                        FallbackLimiterKind::Moncen => (
                            moncen_slope(u[c] - u[c - nt], u[c + nt] - u[c]),
                            moncen_slope(u[c] - u[c - 1], u[c + 1] - u[c]),
                        ),
                        FallbackLimiterKind::Pp => pp_slopes(u, c, nt),
                    };
                    iv.x_minus[c] = u[c] - 0.5 * sx;
                    iv.x_plus[c] = u[c] + 0.5 * sx;
                    iv.y_minus[c] = u[c] - 0.5 * sy;
                    iv.y_plus[c] = u[c] + 0.5 * sy;
                }
            }
        }
    }
    Ok(iv)
}

/// Positivity-preserving slopes from the 3x3 neighbor differences.
fn pp_slopes(u: &[f64], c: usize, nt: usize) -> (f64, f64) {
    const EPS_PP: f64 = 1e-20;
    let mut v_min = -EPS_PP;
    let mut v_max = EPS_PP;
    for di in [-1isize, 0, 1] {
        for dj in [-1isize, 0, 1] {
            if di == 0 && dj == 0 {
                continue;
            }
            let d = u[(c as isize + di * nt as isize + dj) as usize] - u[c];
            v_min = v_min.min(d);
            v_max = v_max.max(d);
        }
    }
    let cx = 0.5 * (u[c + nt] - u[c - nt]);
    let cy = 0.5 * (u[c + 1] - u[c - 1]);
    let denom = 2.0 * cx.abs() + 2.0 * cy.abs();
    let lim = if denom == 0.0 {
        0.0
    } else {
        (4.0 * v_min.abs().min(v_max.abs()) / denom).min(1.0)
    };
    (lim * cx, lim * cy)
}

/// One midpoint Riemann flux per face from the MUSCL interface values; the
/// midpoint is already a second-order face integral.
pub fn fallback_fluxes(
    iv: &InterfaceValues,
    grid: &Grid,
    flux: &FluxFunction,
) -> FaceFluxField {
    let mut out = FaceFluxField::zeros(grid);
    let n = grid.n() as isize;
    match grid.dim() {
        Dim::One => {
            let (v, _) = flux.velocity.at(0.0, 0.0);
            let alpha = match flux.alpha_mode {
                AlphaMode::Local => v.abs(),
                AlphaMode::Global => flux.velocity.axis_speed_bound(grid, 0),
            };
            for i in -1..n {
                let c = grid.idx1(i);
                out.x[c] = numerical_flux(iv.x_plus[c], iv.x_minus[c + 1], v, alpha);
            }
        }
        Dim::Two => {
            let nt = grid.n_tot();
            for axis in 0..2 {
                let (own, neigh, stride) = if axis == 0 {
                    (&iv.x_plus, &iv.x_minus, nt)
                } else {
                    (&iv.y_plus, &iv.y_minus, 1)
                };
                for a in -1..n {
                    for b in 0..n {
                        let (i, j) = if axis == 0 { (a, b) } else { (b, a) };
                        let c = grid.idx2(i, j);
                        let (x, y) = if axis == 0 {
                            (grid.face(i), grid.center(j as usize))
                        } else {
                            (grid.center(i as usize), grid.face(j))
                        };
                        let vv = flux.velocity.at(x, y);
                        let v = if axis == 0 { vv.0 } else { vv.1 };
                        let alpha = match flux.alpha_mode {
                            AlphaMode::Local => v.abs(),
                            AlphaMode::Global => flux.velocity.axis_speed_bound(grid, axis),
                        };
                        let dst = if axis == 0 { &mut out.x } else { &mut out.y };
                        dst[c] = numerical_flux(own[c], neigh[c + stride], v, alpha);
                    }
                }
            }
        }
    }
    out
}

/// Per-cell convex blending factor around troubled cells.
#[derive(Debug, Clone)]
pub struct BlendField {
    pub phi: Vec<f64>,
}

/// Blend factors from a troubled mask. Without blending the factor is the
/// mask itself (wholesale flux replacement at troubled-cell faces). With
/// blending, neighbors take 3/4 (face), 1/2 (corner, 2D only), and 1/4
/// (two cells away); overlaps resolve by the maximum over sources.
pub fn blend_coefficients(
    mask: &TroubledMask,
    grid: &Grid,
    blending: bool,
    bc: BoundaryCondition,
) -> BlendField {
    let mut flags = mask.flags.clone();
    fill_ghosts_raw(grid, &mut flags, aux_bc(bc, 0.0));
    let mut phi = vec![0.0; flags.len()];
    let n = grid.n() as isize;
    match grid.dim() {
        Dim::One => {
            for i in 0..n {
                let c = grid.idx1(i);
                let mut v: f64 = flags[c];
                if blending {
                    v = v.max(0.75 * flags[c - 1].max(flags[c + 1]));
                    v = v.max(0.25 * flags[c - 2].max(flags[c + 2]));
                }
                phi[c] = v;
            }
        }
        Dim::Two => {
            let nt = grid.n_tot() as isize;
            for i in 0..n {
                for j in 0..n {
                    let c = grid.idx2(i, j);
                    let at = |di: isize, dj: isize| flags[(c as isize + di * nt + dj) as usize];
                    let mut v: f64 = flags[c];
                    if blending {
                        let face = at(-1, 0).max(at(1, 0)).max(at(0, -1)).max(at(0, 1));
                        let corner = at(-1, -1).max(at(-1, 1)).max(at(1, -1)).max(at(1, 1));
                        let two = at(-2, 0).max(at(2, 0)).max(at(0, -2)).max(at(0, 2));
                        v = v.max(0.75 * face).max(0.5 * corner).max(0.25 * two);
                    }
                    phi[c] = v;
                }
            }
        }
    }
    fill_ghosts_raw(grid, &mut phi, aux_bc(bc, 0.0));
    BlendField { phi }
}

/// Convex combination per face: `f <- max(phi_L, phi_R) (f_fallback - f) + f`
/// with the two abutting cells' factors.
pub fn revise_face_fluxes(
    high: &FaceFluxField,
    fallback: &FaceFluxField,
    phi: &BlendField,
    grid: &Grid,
) -> FaceFluxField {
    let mut out = high.clone();
    let n = grid.n() as isize;
    match grid.dim() {
        Dim::One => {
            for i in -1..n {
                let c = grid.idx1(i);
                let w = phi.phi[c].max(phi.phi[c + 1]);
                if w != 0.0 {
                    out.x[c] = w * (fallback.x[c] - high.x[c]) + high.x[c];
                }
            }
        }
        Dim::Two => {
            let nt = grid.n_tot();
            for a in -1..n {
                for b in 0..n {
                    let cx = grid.idx2(a, b);
                    let w = phi.phi[cx].max(phi.phi[cx + nt]);
                    if w != 0.0 {
                        out.x[cx] = w * (fallback.x[cx] - high.x[cx]) + high.x[cx];
                    }
                    let cy = grid.idx2(b, a);
                    let w = phi.phi[cy].max(phi.phi[cy + 1]);
                    if w != 0.0 {
                        out.y[cy] = w * (fallback.y[cy] - high.y[cy]) + high.y[cy];
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryCondition, CellField, Grid};
    use proptest::prelude::*;

    fn field_1d(vals: &[f64], g: usize) -> CellField {
        let grid = Grid::new_1d(vals.len(), (0.0, 1.0), g).unwrap();
        let mut f = CellField::from_interior_1d(grid, vals).unwrap();
        f.fill_ghosts(BoundaryCondition::Periodic);
        f
    }

    #[test]
    fn nad_threshold_arithmetic() {
        // M_i = 1, m_i = 0, M - m = 1: candidate 1 + 2e-5 is troubled,
        // 1 + 0.9e-5 is not.
        let parent = field_1d(&[0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0], 3);
        let mut cand = parent.clone();
        cand.set1(2, 1.0 + 2e-5);
        cand.fill_ghosts(BoundaryCondition::Periodic);
        let mask = detect_troubled(&cand, &parent, (0.0, 1.0), NAD_EPS, false);
        assert_eq!(mask.flags[parent.grid().idx1(2)], 1.0);

        cand.set1(2, 1.0 + 0.9e-5);
        cand.fill_ghosts(BoundaryCondition::Periodic);
        let mask = detect_troubled(&cand, &parent, (0.0, 1.0), NAD_EPS, false);
        assert_eq!(mask.flags[parent.grid().idx1(2)], 0.0);
    }

    #[test]
    fn constant_candidate_has_no_troubled_cells() {
        let parent = field_1d(&[0.7; 8], 3);
        let mask = detect_troubled(&parent.clone(), &parent, (0.0, 1.0), NAD_EPS, true);
        assert!(!mask.any());
    }

    #[test]
    fn beyond_global_bounds_stays_troubled_even_in_smooth_window() {
        // Smooth parabola-like bump, but candidate exceeds the global max.
        let parent = field_1d(&[0.0, 0.1, 0.4, 0.9, 1.0, 0.9, 0.4, 0.1], 3);
        let mut cand = parent.clone();
        cand.set1(4, 1.0 + 1e-8);
        cand.fill_ghosts(BoundaryCondition::Periodic);
        let mask = detect_troubled(&cand, &parent, (0.0, 1.0), NAD_EPS, true);
        assert_eq!(mask.flags[parent.grid().idx1(4)], 1.0);
    }

    #[test]
    fn minmod_and_moncen_slope_examples() {
        assert_eq!(minmod_slope(1.0, 3.0), 1.0);
        assert_eq!(minmod_slope(-1.0, 2.0), 0.0);
        assert_eq!(moncen_slope(1.0, 3.0), 2.0);
        assert_eq!(moncen_slope(-1.0, 2.0), 0.0);
    }

    #[test]
    fn minmod_interface_values_on_ramp() {
        let f = field_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 2);
        let iv = muscl_interface_values(&f, FallbackLimiterKind::Minmod).unwrap();
        let c = f.grid().idx1(2);
        assert_eq!(iv.x_minus[c], 1.5);
        assert_eq!(iv.x_plus[c], 2.5);
    }

    #[test]
    fn fallback_flux_on_monotone_ramp() {
        // a = 1, interior slopes 1: flux at face 3/2 is u_1 + 1/2.
        let f = field_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 2);
        let iv = muscl_interface_values(&f, FallbackLimiterKind::Minmod).unwrap();
        let faces = fallback_fluxes(&iv, f.grid(), &FluxFunction::advection_1d(1.0));
        assert_eq!(faces.face_1d(1), 1.5);
    }

    #[test]
    fn pp_limiter_rejected_in_1d_and_flat_in_2d() {
        let f = field_1d(&[0.0; 8], 2);
        assert!(muscl_interface_values(&f, FallbackLimiterKind::Pp).is_err());

        let grid = Grid::new_2d(4, (0.0, 1.0), 2).unwrap();
        let mut f2 = CellField::from_interior_2d(grid, &[3.0; 16]).unwrap();
        f2.fill_ghosts(BoundaryCondition::Periodic);
        let iv = muscl_interface_values(&f2, FallbackLimiterKind::Pp).unwrap();
        let c = f2.grid().idx2(1, 1);
        assert_eq!(iv.x_minus[c], 3.0);
        assert_eq!(iv.y_plus[c], 3.0);
    }

    #[test]
    fn blend_pattern_1d_single_troubled_cell() {
        let grid = Grid::new_1d(7, (0.0, 1.0), 3).unwrap();
        let mut flags = vec![0.0; grid.storage_len()];
        flags[grid.idx1(3)] = 1.0;
        let mask = TroubledMask { flags };
        let phi = blend_coefficients(&mask, &grid, true, BoundaryCondition::Dirichlet(0.0));
        let got: Vec<f64> = (0..7).map(|i| phi.phi[grid.idx1(i)]).collect();
        assert_eq!(got, vec![0.0, 0.25, 0.75, 1.0, 0.75, 0.25, 0.0]);
    }

    #[test]
    fn blend_pattern_2d_distances() {
        let grid = Grid::new_2d(7, (0.0, 1.0), 3).unwrap();
        let mut flags = vec![0.0; grid.storage_len()];
        flags[grid.idx2(3, 3)] = 1.0;
        let mask = TroubledMask { flags };
        let phi = blend_coefficients(&mask, &grid, true, BoundaryCondition::Dirichlet(0.0));
        assert_eq!(phi.phi[grid.idx2(3, 3)], 1.0);
        assert_eq!(phi.phi[grid.idx2(4, 3)], 0.75);
        assert_eq!(phi.phi[grid.idx2(4, 4)], 0.5); // corner
        assert_eq!(phi.phi[grid.idx2(5, 3)], 0.25); // distance 2
        assert_eq!(phi.phi[grid.idx2(5, 4)], 0.0); // distance sqrt(5) > 2
        assert_eq!(phi.phi[grid.idx2(5, 5)], 0.0);
    }

    #[test]
    fn empty_mask_gives_zero_phi_and_identity_revision() {
        let grid = Grid::new_1d(6, (0.0, 1.0), 3).unwrap();
        let mask = TroubledMask {
            flags: vec![0.0; grid.storage_len()],
        };
        let phi = blend_coefficients(&mask, &grid, true, BoundaryCondition::Periodic);
        assert!(phi.phi.iter().all(|v| *v == 0.0));

        let mut high = FaceFluxField::zeros(&grid);
        for (k, v) in high.x.iter_mut().enumerate() {
            *v = k as f64;
        }
        let mut fallback = FaceFluxField::zeros(&grid);
        fallback.x.fill(-7.0);
        let revised = revise_face_fluxes(&high, &fallback, &phi, &grid);
        assert_eq!(revised.x, high.x);
    }

    #[test]
    fn revision_formula_spot_value() {
        // phi_L = 1/4, phi_R = 3/4, high = 2, fallback = 0 -> 0.5
        let grid = Grid::new_1d(2, (0.0, 1.0), 1).unwrap();
        let mut phi = BlendField {
            phi: vec![0.0; grid.storage_len()],
        };
        phi.phi[grid.idx1(0)] = 0.25;
        phi.phi[grid.idx1(1)] = 0.75;
        let mut high = FaceFluxField::zeros(&grid);
        high.x[grid.idx1(0)] = 2.0;
        let fallback = FaceFluxField::zeros(&grid);
        let revised = revise_face_fluxes(&high, &fallback, &phi, &grid);
        assert_eq!(revised.x[grid.idx1(0)], 0.5);
    }

    proptest! {
        /// The revised flux lies between the high-order and fallback values.
        #[test]
        fn revision_is_convex(
            fh in -10.0f64..10.0,
            fb in -10.0f64..10.0,
            pl in 0.0f64..1.0,
            pr in 0.0f64..1.0,
        ) {
            let grid = Grid::new_1d(2, (0.0, 1.0), 1).unwrap();
            let mut phi = BlendField { phi: vec![0.0; grid.storage_len()] };
            phi.phi[grid.idx1(0)] = pl;
            phi.phi[grid.idx1(1)] = pr;
            let mut high = FaceFluxField::zeros(&grid);
            high.x[grid.idx1(0)] = fh;
            let mut fallback = FaceFluxField::zeros(&grid);
            fallback.x[grid.idx1(0)] = fb;
            let revised = revise_face_fluxes(&high, &fallback, &phi, &grid);
            let v = revised.x[grid.idx1(0)];
            prop_assert!(v >= fh.min(fb) - 1e-12 && v <= fh.max(fb) + 1e-12);
        }

        /// 1D MUSCL interface values are bounded by the neighbor averages.
        #[test]
        fn interface_values_bounded_by_neighbors(
            vals in proptest::collection::vec(-5.0f64..5.0, 8),
            use_moncen in proptest::bool::ANY,
        ) {
            let f = field_1d(&vals, 2);
            let kind = if use_moncen { FallbackLimiterKind::Moncen } else { FallbackLimiterKind::Minmod };
            let iv = muscl_interface_values(&f, kind).unwrap();
            let u = f.raw();
            for i in 0..8 {
                let c = f.grid().idx1(i);
                let lo = u[c - 1].min(u[c]).min(u[c + 1]) - 1e-12;
                let hi = u[c - 1].max(u[c]).max(u[c + 1]) + 1e-12;
                prop_assert!(iv.x_minus[c] >= lo && iv.x_minus[c] <= hi);
                prop_assert!(iv.x_plus[c] >= lo && iv.x_plus[c] <= hi);
            }
        }
    }
}
