//! Exact-rational generation of conservative reconstruction stencils and
//! Gauss quadrature rules.
//!
//! Stencils are not hard-coded: each one is the solution of the linear
//! system "cell averages of the reconstruction polynomial match the stored
//! averages of the kernel; evaluate at the target", solved in exact rational
//! arithmetic. Irrational evaluation points (Gauss nodes) are carried as
//! 60-digit rational approximations and rounded to `f64` once, when the
//! kernel weights are built.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Maximum reconstruction degree the tabulated verification covers.
pub const MAX_DEGREE: usize = 7;

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// What a stencil evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum StencilTarget {
    /// Point value of the reconstruction at a reference-cell coordinate in
    /// [-1/2, 1/2].
    Node(f64),
    /// Point value at the cell centroid.
    Midpoint,
    /// Integral average along a cell, reconstructed from midpoint values.
    FaceIntegral,
}

/// One reconstruction rule: exact coefficients over consecutive offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    offsets: Vec<i32>,
    coefficients: Vec<BigRational>,
    weights: Vec<f64>,
    target: StencilTarget,
}

impl Stencil {
    fn new(first: i32, coefficients: Vec<BigRational>, target: StencilTarget) -> Self {
        let mut s = Stencil {
            offsets: (0..coefficients.len() as i32).map(|k| first + k).collect(),
            weights: coefficients.iter().map(|c| rational_to_f64(c)).collect(),
            coefficients,
            target,
        };
        s.trim_zeros();
        s
    }

    /// Drops exactly-zero coefficients at either end of the kernel.
    fn trim_zeros(&mut self) {
        while self.coefficients.len() > 1 && self.coefficients[0].is_zero() {
            self.coefficients.remove(0);
            self.offsets.remove(0);
            self.weights.remove(0);
        }
        while self.coefficients.len() > 1 && self.coefficients.last().unwrap().is_zero() {
            self.coefficients.pop();
            self.offsets.pop();
            self.weights.pop();
        }
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    /// Exact coefficients (rational approximations when the target node is
    /// irrational).
    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    /// 64-bit weights used by the kernels.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn target(&self) -> &StencilTarget {
        &self.target
    }

    pub fn first_offset(&self) -> i32 {
        self.offsets[0]
    }

    /// Largest |offset| the stencil reads.
    pub fn reach(&self) -> usize {
        self.offsets
            .iter()
            .map(|o| o.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Consistency: coefficients sum to one, exactly.
    pub fn sums_to_one(&self) -> bool {
        let s: BigRational = self.coefficients.iter().cloned().sum();
        s.is_one()
    }

    /// Stencil with the order of coefficients reversed (evaluates the
    /// mirrored node, e.g. the right face from the left-face stencil).
    pub fn reversed(&self) -> Stencil {
        let first = -self.offsets.last().unwrap();
        let coefficients: Vec<BigRational> = self.coefficients.iter().rev().cloned().collect();
        let target = match &self.target {
            StencilTarget::Node(x) => StencilTarget::Node(-x),
            t => t.clone(),
        };
        Stencil::new(first, coefficients, target)
    }

    /// Applies the stencil to a slice of values indexed by offset.
    pub fn apply(&self, value_at: impl Fn(i32) -> f64) -> f64 {
        self.offsets
            .iter()
            .zip(self.weights.iter())
            .map(|(o, w)| w * value_at(*o))
            .sum()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational representable as f64")
}

// ---------------------------------------------------------------------------
// Exact linear algebra
// ---------------------------------------------------------------------------

/// Solves `A x = b` by Gaussian elimination with exact rational arithmetic.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("moment matrix is nonsingular");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &a[col][c] * &f;
                a[r][c] -= v;
            }
            let v = &b[col] * &f;
            b[r] -= v;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for c in row + 1..n {
            acc -= &a[row][c] * &x[c];
        }
        x[row] = acc / &a[row][row];
    }
    x
}

/// Moment matrix of the primitive-interpolation conditions:
/// `M[j][m] = integral of x^m over reference cell j`.
fn moment_matrix(offsets: &[i32], p: usize) -> Vec<Vec<BigRational>> {
    offsets
        .iter()
        .map(|&j| {
            (0..=p)
                .map(|m| {
                    let a = ratio(2 * j as i64 - 1, 2);
                    let b = ratio(2 * j as i64 + 1, 2);
                    (b.pow(m as i32 + 1) - a.pow(m as i32 + 1)) / big(m as i64 + 1)
                })
                .collect()
        })
        .collect()
}

fn transpose(m: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let rows = m.len();
    let cols = m[0].len();
    (0..cols)
        .map(|c| (0..rows).map(|r| m[r][c].clone()).collect())
        .collect()
}

/// Weights w with `w . ubar = P(x_eval)` for the conservative polynomial on
/// the given kernel: solves `M^T w = phi(x_eval)`.
fn node_weights(offsets: &[i32], p: usize, x_eval: &BigRational) -> Vec<BigRational> {
    let m = moment_matrix(offsets, p);
    let phi: Vec<BigRational> = (0..=p as i32).map(|k| x_eval.pow(k)).collect();
    solve_exact(transpose(&m), phi)
}

// ---------------------------------------------------------------------------
// Stencil generators
// ---------------------------------------------------------------------------

/// Conservative reconstruction evaluated at `x_eval` (reference-cell
/// coordinates). Even degrees use the symmetric kernel of `p + 1` cells; odd
/// degrees average the left- and right-biased kernels.
pub fn conservative_node_stencil(p: usize, x_eval: &BigRational) -> Stencil {
    let target = StencilTarget::Node(rational_to_f64(x_eval));
    if p % 2 == 0 {
        let r = (p / 2) as i32;
        let offsets: Vec<i32> = (-r..=r).collect();
        Stencil::new(-r, node_weights(&offsets, p, x_eval), target)
    } else {
        let r = ((p + 1) / 2) as i32;
        let left: Vec<i32> = (-r..r).collect();
        let right: Vec<i32> = (-r + 1..=r).collect();
        let wl = node_weights(&left, p, x_eval);
        let wr = node_weights(&right, p, x_eval);
        let half = ratio(1, 2);
        let mut avg = vec![BigRational::zero(); (2 * r + 1) as usize];
        for (k, w) in wl.iter().enumerate() {
            avg[k] += w * &half;
        }
        for (k, w) in wr.iter().enumerate() {
            avg[k + 1] += w * &half;
        }
        Stencil::new(-r, avg, target)
    }
}

/// Node stencil at the left cell face `x = -1/2` (Table-of-nodes row for
/// degree `p`); the right face uses [`Stencil::reversed`].
pub fn left_face_stencil(p: usize) -> Stencil {
    conservative_node_stencil(p, &ratio(-1, 2))
}

/// Centroid-value stencil. Even/odd degree pairs share a kernel: the biased
/// averaging for odd `p` cancels the outermost coefficients exactly.
pub fn midpoint_stencil(p: usize) -> Stencil {
    let mut s = conservative_node_stencil(p, &BigRational::zero());
    s.target = StencilTarget::Midpoint;
    s
}

/// Cell-integral stencil over midpoint values: integrates the Lagrange
/// polynomial through `p + 1` uniformly spaced point values across one cell.
pub fn transverse_integral_stencil(p: usize) -> Stencil {
    let build = |offsets: &[i32]| -> Vec<BigRational> {
        offsets
            .iter()
            .map(|&j| {
                // Lagrange basis for node j over the kernel, integrated on
                // [-1/2, 1/2].
                let mut poly = vec![BigRational::one()];
                let mut denom = BigRational::one();
                for &k in offsets {
                    if k == j {
                        continue;
                    }
                    poly = poly_mul_linear(&poly, &big(-(k as i64)));
                    denom *= big(j as i64 - k as i64);
                }
                poly_integrate_ref_cell(&poly) / denom
            })
            .collect()
    };
    if p % 2 == 0 {
        let r = (p / 2) as i32;
        let offsets: Vec<i32> = (-r..=r).collect();
        Stencil::new(-r, build(&offsets), StencilTarget::FaceIntegral)
    } else {
        let r = ((p + 1) / 2) as i32;
        let left: Vec<i32> = (-r..r).collect();
        let right: Vec<i32> = (-r + 1..=r).collect();
        let wl = build(&left);
        let wr = build(&right);
        let half = ratio(1, 2);
        let mut avg = vec![BigRational::zero(); (2 * r + 1) as usize];
        for (k, w) in wl.iter().enumerate() {
            avg[k] += w * &half;
        }
        for (k, w) in wr.iter().enumerate() {
            avg[k + 1] += w * &half;
        }
        Stencil::new(-r, avg, StencilTarget::FaceIntegral)
    }
}

/// Multiplies `poly` by `(x + c)`.
fn poly_mul_linear(poly: &[BigRational], c: &BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); poly.len() + 1];
    for (k, a) in poly.iter().enumerate() {
        out[k] += a * c;
        out[k + 1] += a;
    }
    out
}

/// Integral of `poly` over the reference cell [-1/2, 1/2].
fn poly_integrate_ref_cell(poly: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (m, a) in poly.iter().enumerate() {
        let hi = ratio(1, 2).pow(m as i32 + 1);
        let lo = ratio(-1, 2).pow(m as i32 + 1);
        acc += a * (hi - lo) / big(m as i64 + 1);
    }
    acc
}

// ---------------------------------------------------------------------------
// Quadrature rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussLegendre,
    GaussLobatto,
}

/// Quadrature rule on the reference cell [-1/2, 1/2] with weights summing
/// to one, points symmetric about zero and sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Legendre polynomial coefficients (ascending powers, exact rationals).
fn legendre(n: usize) -> Vec<BigRational> {
    let mut p0 = vec![BigRational::one()];
    if n == 0 {
        return p0;
    }
    let mut p1 = vec![BigRational::zero(), BigRational::one()];
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = vec![BigRational::zero(); p1.len() + 1];
        for (m, a) in p1.iter().enumerate() {
            next[m + 1] += a * big(2 * k as i64 + 1);
        }
        for (m, a) in p0.iter().enumerate() {
            next[m] -= a * big(k as i64);
        }
        for a in next.iter_mut() {
            *a /= big(k as i64 + 1);
        }
        p0 = std::mem::replace(&mut p1, next);
    }
    p1
}

fn poly_derivative(poly: &[BigRational]) -> Vec<BigRational> {
    if poly.len() <= 1 {
        return vec![BigRational::zero()];
    }
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(m, a)| a * big(m as i64))
        .collect()
}

fn poly_eval_rational(poly: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for a in poly.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

fn poly_eval_f64(poly: &[BigRational], x: f64) -> f64 {
    let mut acc = 0.0;
    for a in poly.iter().rev() {
        acc = acc * x + rational_to_f64(a);
    }
    acc
}

/// Rounds a rational to a fixed 10^digits denominator to cap coefficient
/// growth during exact solves.
fn round_to_digits(x: &BigRational, digits: u32) -> BigRational {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * BigRational::from_integer(scale.clone());
    let half = ratio(1, 2) * if x.is_negative() { big(-1) } else { big(1) };
    let rounded = (scaled + half).trunc();
    rounded / BigRational::from_integer(scale)
}

/// Positive roots of `poly` on (0, 1), refined to ~60 significant digits by
/// rational Newton iteration seeded from an f64 scan.
fn refined_positive_roots(poly: &[BigRational]) -> Vec<BigRational> {
    let dpoly = poly_derivative(poly);
    let mut seeds = Vec::new();
    let samples = 4000;
    let mut prev = poly_eval_f64(poly, 1e-9);
    for k in 1..=samples {
        let x = k as f64 / samples as f64;
        let v = poly_eval_f64(poly, x.min(1.0 - 1e-12));
        if prev == 0.0 {
            prev = v;
            continue;
        }
        if v == 0.0 || prev.signum() != v.signum() {
            seeds.push(x - 0.5 / samples as f64);
        }
        prev = v;
    }
    seeds
        .into_iter()
        .map(|seed| {
            // f64 Newton to machine precision
            let mut x = seed;
            for _ in 0..60 {
                let f = poly_eval_f64(poly, x);
                let d = poly_eval_f64(&dpoly, x);
                let step = f / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            // rational Newton: each iteration roughly doubles the digits
            let mut xr = BigRational::from_float(x).expect("finite seed");
            for _ in 0..3 {
                let f = poly_eval_rational(poly, &xr);
                let d = poly_eval_rational(&dpoly, &xr);
                xr -= f / d;
                xr = round_to_digits(&xr, 70);
            }
            round_to_digits(&xr, 60)
        })
        .collect()
}

/// High-precision Gauss-Legendre points on [-1/2, 1/2] for degree `p`
/// (rational approximations of the irrational nodes), sorted ascending.
pub(crate) fn gauss_legendre_points_refined(p: usize) -> Vec<BigRational> {
    legendre_points_refined_k(((p + 2) / 2).max(1))
}

fn legendre_points_refined_k(k: usize) -> Vec<BigRational> {
    let poly = legendre(k);
    let mut pts: Vec<BigRational> = Vec::new();
    if k % 2 == 1 {
        pts.push(BigRational::zero());
    }
    for r in refined_positive_roots(&poly) {
        pts.push(r.clone() / big(2));
        pts.push(-r / big(2));
    }
    pts.sort();
    pts
}

/// K-point Gauss-Legendre rule on [-1/2, 1/2]; K is the smallest integer
/// with `2K - 1 >= p`.
pub fn gauss_legendre_rule(p: usize) -> QuadratureRule {
    gauss_legendre_rule_k(((p + 2) / 2).max(1))
}

/// Gauss-Legendre rule with an explicit point count (also used for the
/// fixed high-order averaging of initial conditions).
pub fn gauss_legendre_rule_k(k: usize) -> QuadratureRule {
    let poly = legendre(k);
    let dpoly = poly_derivative(&poly);
    let refined = legendre_points_refined_k(k);
    let mut points = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for x_half in &refined {
        let x = x_half * big(2); // back on [-1, 1]
        // w = 2 / ((1 - x^2) P_K'(x)^2), halved for the unit-sum convention
        let d = poly_eval_rational(&dpoly, &x);
        let w = big(2) / ((BigRational::one() - x.pow(2)) * d.pow(2));
        points.push(rational_to_f64(x_half));
        weights.push(rational_to_f64(&(w / big(2))));
    }
    QuadratureRule {
        points,
        weights,
        kind: QuadratureKind::GaussLegendre,
    }
}

/// High-precision Gauss-Lobatto points on [-1/2, 1/2] for degree `p`.
pub(crate) fn gauss_lobatto_points_refined(p: usize) -> Vec<BigRational> {
    let l = ((p + 4) / 2).max(2); // smallest L with 2L - 3 >= p
    let dpoly = poly_derivative(&legendre(l - 1));
    let mut pts = vec![ratio(-1, 2), ratio(1, 2)];
    if (l - 2) % 2 == 1 {
        pts.push(BigRational::zero());
    }
    for r in refined_positive_roots(&dpoly) {
        pts.push(r.clone() / big(2));
        pts.push(-r / big(2));
    }
    pts.sort();
    pts
}

/// L-point Gauss-Lobatto rule on [-1/2, 1/2] plus the reduced CFL factor
/// `C_MPP = min weight`; L is the smallest integer with `2L - 3 >= p`.
pub fn gauss_lobatto_rule(p: usize) -> (QuadratureRule, f64) {
    let l = ((p + 4) / 2).max(2);
    let pl1 = legendre(l - 1);
    let refined = gauss_lobatto_points_refined(p);
    let mut points = Vec::with_capacity(l);
    let mut weights = Vec::with_capacity(l);
    let ll1 = big((l * (l - 1)) as i64);
    for x_half in &refined {
        let x = x_half * big(2);
        // w = 2 / (L(L-1) P_{L-1}(x)^2), halved for the unit-sum convention
        let v = poly_eval_rational(&pl1, &x);
        let w = big(2) / (&ll1 * v.pow(2));
        points.push(rational_to_f64(x_half));
        weights.push(rational_to_f64(&(w / big(2))));
    }
    let c_mpp = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    (
        QuadratureRule {
            points,
            weights,
            kind: QuadratureKind::GaussLobatto,
        },
        c_mpp,
    )
}

/// Node stencils at every Gauss-Legendre point of degree `p`, in point order.
pub fn gauss_point_node_stencils(p: usize) -> Vec<Stencil> {
    gauss_legendre_points_refined(p)
        .iter()
        .map(|x| conservative_node_stencil(p, x))
        .collect()
}

/// Node stencils at every Gauss-Lobatto point of degree `p`, in point order
/// (used by the full Zhang-Shu limiter node set).
pub fn lobatto_point_node_stencils(p: usize) -> Vec<Stencil> {
    gauss_lobatto_points_refined(p)
        .iter()
        .map(|x| conservative_node_stencil(p, x))
        .collect()
}

/// Validates that a degree is within the tabulated range.
pub fn check_degree(p: usize) -> Result<()> {
    if p > MAX_DEGREE {
        return Err(Error::InvalidConfig(format!(
            "degree p = {p} exceeds the verified range 0..={MAX_DEGREE}"
        )));
    }
    Ok(())
}
