//! Quadrature on the unit sphere and 1-D minimization.
//!
//! Every sphere integrand in this crate depends on the point λ only through
//! the polar coordinate `u = λ·x` and the sign of `λ·y` (densities and
//! outcome indicators of the sphere-valued hidden-variable models). In the
//! frame with polar axis `x` and azimuth `ψ` measured from the `x`–`y` plane,
//!
//! `λ·y = u·cos φ + √(1−u²)·sin φ·cos ψ`,
//!
//! so at fixed `u` the set `{ψ : λ·y > 0}` is an arc whose length is known in
//! closed form. The azimuth integral is therefore done exactly, and only the
//! polar integral is numerical. That integral has kinks at `u = 0` (outcome
//! boundary) and square-root kinks at `u = ±sin φ` (where the arc saturates),
//! so the domain is split into panels at those points and the inner panels are
//! mapped by `u = sin φ · sin t`, which flattens the square-root behavior.
//! Gauss–Legendre on each panel then converges spectrally: order 64 reaches
//! ~1e-12 on all densities used here, versus ~1e-3 for a naive product rule
//! on the same integrands (whose azimuthal sign discontinuity defeats smooth
//! quadrature).

use crate::error::{Error, Result};
use crate::geometry::{orthonormal_frame, UnitVector3};

/// Default Gauss–Legendre order per panel.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes via Newton iteration on Pₙ from the Chebyshev initial guess.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("quadrature order must be positive".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Evaluate Pₙ(x) and P′ₙ(x) by the three-term recurrence.
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// ∫ₐᵇ f, by affine transplant of the `[−1,1]` rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// Fraction-free arc length `|{ψ : u·cos φ + √(1−u²)·sin φ·cos ψ > 0}|`.
fn positive_arc(u: f64, cos_phi: f64, sin_phi: f64) -> f64 {
    let a = u * cos_phi;
    let b = (1.0 - u * u).max(0.0).sqrt() * sin_phi;
    if b < 1e-300 {
        // λ·y keeps one sign over the whole circle; sign(0) counts as +.
        return if a >= 0.0 { 2.0 * std::f64::consts::PI } else { 0.0 };
    }
    let c = (-a / b).clamp(-1.0, 1.0);
    2.0 * c.acos()
}

/// Sphere-quadrature engine of a fixed panel order.
#[derive(Debug, Clone)]
pub struct SphereRule {
    order: usize,
    gl: GaussLegendre,
}

impl SphereRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput(format!(
                "sphere quadrature order must be at least 2, got {order}"
            )));
        }
        Ok(Self { order, gl: GaussLegendre::new(order)? })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// ∫_{S²} g(λ·x, sign(λ·y)) dΩ for directions at angle `phi = ∠(x,y)`.
    ///
    /// `g(u, s)` is the integrand value at polar coordinate `u` on the region
    /// where `sign(λ·y) = s`; it must be smooth in `u` away from `u = 0`.
    pub fn integrate_signed<G: Fn(f64, i8) -> f64>(&self, phi: f64, g: G) -> f64 {
        let (sin_phi, cos_phi) = phi.sin_cos();
        let sin_phi = sin_phi.max(0.0); // φ ∈ [0, π]
        let two_pi = 2.0 * std::f64::consts::PI;

        let band = |u: f64| {
            let arc = positive_arc(u, cos_phi, sin_phi);
            g(u, 1) * arc + g(u, -1) * (two_pi - arc)
        };

        // Degenerate geometry (φ ∈ {0, π}): every arc is saturated; only the
        // split at u = 0 is needed, for |u|-type integrands and indicators.
        if sin_phi <= 1e-15 {
            return self.gl.integrate(-1.0, 0.0, band) + self.gl.integrate(0.0, 1.0, band);
        }

        let mut total = 0.0;
        // Outer panels: the arc is saturated (0 or 2π), integrand smooth in u.
        if sin_phi < 1.0 - 1e-15 {
            total += self.gl.integrate(-1.0, -sin_phi, band);
            total += self.gl.integrate(sin_phi, 1.0, band);
        }
        // Inner panels: u = sin φ · sin t removes the arccos square-root kink
        // at |u| = sin φ. Split at t = 0 (u = 0) where outcome indicators and
        // |u| factors kink.
        let half_pi = 0.5 * std::f64::consts::PI;
        let sub = |t: f64| {
            let u = sin_phi * t.sin();
            band(u) * sin_phi * t.cos()
        };
        total += self.gl.integrate(-half_pi, 0.0, sub);
        total += self.gl.integrate(0.0, half_pi, sub);
        total
    }

    /// ∫_{S²} h(λ·x) dΩ for azimuth-free integrands, split at `u = 0`.
    pub fn integrate_polar<H: Fn(f64) -> f64>(&self, h: H) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        two_pi * (self.gl.integrate(-1.0, 0.0, &h) + self.gl.integrate(0.0, 1.0, &h))
    }

    /// Black-box product rule (order × 2·order nodes) in the frame with polar
    /// axis `pole` and azimuth measured from the plane of `pole` and
    /// `toward`. Slowly convergent on discontinuous integrands; kept as an
    /// independent cross-check of the arc-based scheme.
    pub fn integrate_product<F: Fn(&UnitVector3) -> f64>(
        &self,
        pole: &UnitVector3,
        toward: Option<&UnitVector3>,
        f: F,
    ) -> f64 {
        let (e1, e2) = orthonormal_frame(pole, toward);
        let m = 2 * self.order;
        let dpsi = 2.0 * std::f64::consts::PI / m as f64;
        let mut total = 0.0;
        for (u, w) in self.gl.nodes.iter().zip(&self.gl.weights) {
            let r = (1.0 - u * u).max(0.0).sqrt();
            let mut ring = 0.0;
            for j in 0..m {
                let psi = dpsi * (j as f64 + 0.5);
                let (sp, cp) = psi.sin_cos();
                let p = [
                    r * (cp * e1.x() + sp * e2.x()) + u * pole.x(),
                    r * (cp * e1.y() + sp * e2.y()) + u * pole.y(),
                    r * (cp * e1.z() + sp * e2.z()) + u * pole.z(),
                ];
                let lambda = UnitVector3::normalized(p[0], p[1], p[2])
                    .expect("frame combination has unit norm");
                ring += f(&lambda);
            }
            total += w * ring * dpsi;
        }
        total
    }
}

/// Golden-section minimum of a unimodal function on `[a, b]`.
///
/// Returns `(argmin, min)` once the bracket is narrower than `xtol`; errors
/// after `max_iter` shrink steps.
pub fn golden_section_min<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    // `a >= b` alone would wave NaN bounds through.
    if a.is_nan() || b.is_nan() || a >= b || xtol <= 0.0 {
        return Err(Error::InvalidInput("golden section needs b > a and xtol > 0".into()));
    }
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo < xtol {
            let (xm, fm) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
            return Ok((xm, fm));
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    Err(Error::Numerical(format!(
        "golden-section minimizer did not reach xtol {xtol:e} within {max_iter} iterations"
    )))
}

/// Coarse grid scan followed by golden-section refinement between the
/// neighbors of the best grid point. Robust when unimodality of `f` is only
/// empirical.
pub fn scan_then_golden<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    scan_points: usize,
    xtol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let n = scan_points.max(3);
    let mut best_i = 0;
    let mut best_f = f64::INFINITY;
    let grid: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v < best_f {
            best_f = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(n)];
    if hi - lo < xtol {
        return Ok((grid[best_i], best_f));
    }
    golden_section_min(f, lo, hi, xtol, max_iter)
}
