//! The three explicit local deterministic hidden-variable models of the
//! two-qubit singlet state, due to Brans, to Degorre–Laplante–Roland, and to
//! Hall. Each trades away measurement independence — the λ-distribution
//! depends on the chosen directions — in exchange for locality and
//! determinism, and each reproduces the singlet joint probabilities
//! `p(a,b|x,y) = (1 − ab·x·y)/4` exactly.
//!
//! Conventions: `sign(0) := +1` everywhere, so outcome rules are total and
//! tests are deterministic; the affected sets have measure zero.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Rotation, UnitVector3};
use crate::pair::PairDistribution;
use crate::quad::SphereRule;

/// Normalization drift beyond this aborts `exact_joint` with diagnostics.
pub const NORMALIZATION_GUARD: f64 = 1e-5;

/// Rejection-sampler proposal budget; exhausting it indicates an envelope bug.
pub const MAX_REJECTION_PROPOSALS: u64 = 1_000_000;

/// Sign with the fixed tie-break `sign(0) := +1`.
pub fn sign_pm(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Hidden variable of the Brans model: a pair of independent signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignPair {
    lambda1: i8,
    lambda2: i8,
}

impl SignPair {
    pub fn new(lambda1: i8, lambda2: i8) -> Result<Self> {
        if (lambda1 != 1 && lambda1 != -1) || (lambda2 != 1 && lambda2 != -1) {
            return Err(Error::InvalidInput(format!(
                "sign pair entries must be ±1, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(Self { lambda1, lambda2 })
    }

    pub fn lambda1(&self) -> i8 {
        self.lambda1
    }

    pub fn lambda2(&self) -> i8 {
        self.lambda2
    }

    /// The four sign pairs in canonical order `(+,+), (+,−), (−,+), (−,−)`.
    pub fn all() -> [SignPair; 4] {
        [
            Self { lambda1: 1, lambda2: 1 },
            Self { lambda1: 1, lambda2: -1 },
            Self { lambda1: -1, lambda2: 1 },
            Self { lambda1: -1, lambda2: -1 },
        ]
    }
}

/// Hidden variable of the sphere models: a point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub direction: UnitVector3,
}

/// A sampled hidden variable from any of the three models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenVariable {
    Signs(SignPair),
    Point(SpherePoint),
}

/// Selector for the three singlet models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletModelKind {
    /// λ = (λ₁, λ₂) ∈ {±1}², weight `(1 − λ₁λ₂·x·y)/4`, outcomes (λ₁, λ₂).
    Brans,
    /// λ on the sphere with density `|λ·x|/(2π)`, correlated with one side only.
    Degorre,
    /// λ on the sphere with a density biased only through `sign((λ·x)(λ·y))`.
    Hall,
}

impl SingletModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Brans => "brans",
            Self::Degorre => "degorre",
            Self::Hall => "hall",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brans" => Ok(Self::Brans),
            "degorre" => Ok(Self::Degorre),
            "hall" => Ok(Self::Hall),
            other => Err(Error::InvalidInput(format!(
                "unknown singlet model {other:?} (expected brans, degorre, or hall)"
            ))),
        }
    }
}

/// Brans-model weight `p(λ|x,y) = (1 − λ₁λ₂·x·y)/4`.
pub fn brans_weight(lambda: SignPair, x: &UnitVector3, y: &UnitVector3) -> f64 {
    (1.0 - (lambda.lambda1 as f64) * (lambda.lambda2 as f64) * x.dot(y)) / 4.0
}

/// Brans-model outcome rule: the hidden variable is the outcome pair.
pub fn brans_outcome(lambda: SignPair) -> (i8, i8) {
    (lambda.lambda1, lambda.lambda2)
}

/// Degorre-model λ-density per unit solid angle, `|λ·x|/(2π)`. Depends on
/// Alice's direction only.
pub fn degorre_density(lambda: &SpherePoint, x: &UnitVector3) -> f64 {
    lambda.direction.dot(x).abs() / (2.0 * std::f64::consts::PI)
}

/// Value of the Hall density on the sign branch `s = sign((λ·x)(λ·y))`, for
/// directions at angle `phi`. Where the denominator vanishes (φ ∈ {0, π} with
/// the conflicting branch) the numerator vanishes too and the density is
/// defined as 0.
pub fn hall_branch_density(phi: f64, s: i8) -> f64 {
    let s = s as f64;
    let num = 1.0 + phi.cos() * s;
    let den = 1.0 + (1.0 - 2.0 * phi / std::f64::consts::PI) * s;
    if den.abs() < 1e-12 {
        return 0.0;
    }
    num / den / (4.0 * std::f64::consts::PI)
}

/// Hall-model λ-density per unit solid angle,
/// `(1 + (x·y)·s) / (4π·(1 + (1 − 2φ/π)·s))` with `s = sign((λ·x)(λ·y))`.
pub fn hall_density(lambda: &SpherePoint, x: &UnitVector3, y: &UnitVector3) -> f64 {
    let s = sign_pm(lambda.direction.dot(x)) * sign_pm(lambda.direction.dot(y));
    hall_branch_density(x.angle_to(y), s)
}

/// Shared outcome rule of the sphere models:
/// `a = sign(λ·x)`, `b = −sign(λ·y)`.
pub fn local_outcomes(lambda: &SpherePoint, x: &UnitVector3, y: &UnitVector3) -> (i8, i8) {
    (sign_pm(lambda.direction.dot(x)), -sign_pm(lambda.direction.dot(y)))
}

/// Exact joint outcome distribution `p(a,b|x,y)` implied by a model: a 4-term
/// sum for the Brans model, sphere quadrature for the other two. The result
/// matches the singlet formula within 1e-12 (Brans) and ~1e-9 (sphere models
/// at the default quadrature order).
pub fn exact_joint(
    kind: SingletModelKind,
    x: &UnitVector3,
    y: &UnitVector3,
    rule: &SphereRule,
) -> Result<PairDistribution> {
    let joint = match kind {
        SingletModelKind::Brans => PairDistribution::from_fn(|a, b| {
            SignPair::all()
                .iter()
                .filter(|l| brans_outcome(**l) == (a, b))
                .map(|l| brans_weight(*l, x, y))
                .sum()
        }),
        SingletModelKind::Degorre => {
            let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
            let phi = x.angle_to(y);
            PairDistribution::from_fn(|a, b| {
                // a = sign(u), b = −s_y; integrate the density over that region.
                rule.integrate_signed(phi, |u, sy| {
                    if sign_pm(u) == a && -sy == b {
                        u.abs() * inv_2pi
                    } else {
                        0.0
                    }
                })
            })
        }
        SingletModelKind::Hall => {
            let phi = x.angle_to(y);
            PairDistribution::from_fn(|a, b| {
                rule.integrate_signed(phi, |u, sy| {
                    if sign_pm(u) == a && -sy == b {
                        hall_branch_density(phi, sign_pm(u) * sy)
                    } else {
                        0.0
                    }
                })
            })
        }
    };
    let total = joint.sum();
    if (total - 1.0).abs() > NORMALIZATION_GUARD {
        return Err(Error::Numerical(format!(
            "{} joint distribution integrates to {total:.12} (order {}, x·y = {:.6}); \
             quadrature did not converge",
            kind.name(),
            rule.order(),
            x.dot(y)
        )));
    }
    Ok(joint)
}

/// A uniformly random point on the sphere.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    let u: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let psi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let r = (1.0 - u * u).max(0.0).sqrt();
    let (sp, cp) = psi.sin_cos();
    UnitVector3::normalized(r * cp, r * sp, u).expect("spherical coordinates are unit")
}

/// A seed-determined list of uniformly random direction pairs, for
/// reproducible reproduction checks.
pub fn random_direction_pairs(seed: u64, n: usize) -> Vec<(UnitVector3, UnitVector3)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (uniform_direction(&mut rng), uniform_direction(&mut rng))).collect()
}

/// Draws a hidden variable from the model's λ-distribution at settings (x, y).
///
/// Brans: 4-way categorical. Degorre: exact inverse transform (`cos θ = ±√v`
/// about the pole `x`). Hall: rejection against the uniform sphere with the
/// analytic two-branch envelope.
pub fn sample_hidden<R: Rng + ?Sized>(
    kind: SingletModelKind,
    x: &UnitVector3,
    y: &UnitVector3,
    rng: &mut R,
) -> Result<HiddenVariable> {
    match kind {
        SingletModelKind::Brans => {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let all = SignPair::all();
            for l in &all {
                acc += brans_weight(*l, x, y);
                if r < acc {
                    return Ok(HiddenVariable::Signs(*l));
                }
            }
            // r landed in the rounding sliver at the top; the weights sum to 1.
            Ok(HiddenVariable::Signs(all[3]))
        }
        SingletModelKind::Degorre => {
            let v: f64 = rng.gen();
            let s = if rng.gen::<f64>() < 0.5 { 1.0 } else { -1.0 };
            let psi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let u = s * v.sqrt();
            let r = (1.0 - u * u).max(0.0).sqrt();
            let (sp, cp) = psi.sin_cos();
            let local = [r * cp, r * sp, u];
            let global = Rotation::align_z_to(x).apply(local);
            let direction = UnitVector3::normalized(global[0], global[1], global[2])
                .expect("rotation preserves the unit norm");
            Ok(HiddenVariable::Point(SpherePoint { direction }))
        }
        SingletModelKind::Hall => {
            let phi = x.angle_to(y);
            // Envelope over the two branch values of 4π·density.
            let m_plus = 4.0 * std::f64::consts::PI * hall_branch_density(phi, 1);
            let m_minus = 4.0 * std::f64::consts::PI * hall_branch_density(phi, -1);
            let envelope = m_plus.max(m_minus);
            if envelope <= 0.0 {
                return Err(Error::Internal(
                    "hall density envelope is zero; density cannot be normalized".into(),
                ));
            }
            for _ in 0..MAX_REJECTION_PROPOSALS {
                let direction = uniform_direction(rng);
                let s = sign_pm(direction.dot(x)) * sign_pm(direction.dot(y));
                let value = 4.0 * std::f64::consts::PI * hall_branch_density(phi, s);
                if rng.gen::<f64>() * envelope <= value {
                    return Ok(HiddenVariable::Point(SpherePoint { direction }));
                }
            }
            Err(Error::Sampler(format!(
                "hall rejection sampler exhausted {MAX_REJECTION_PROPOSALS} proposals \
                 (φ = {phi:.6}, envelope = {envelope:.6}); the envelope bound is broken"
            )))
        }
    }
}

/// Draws an outcome pair by sampling λ and applying the model's outcome rule.
pub fn sample_outcome<R: Rng + ?Sized>(
    kind: SingletModelKind,
    x: &UnitVector3,
    y: &UnitVector3,
    rng: &mut R,
) -> Result<(i8, i8)> {
    match sample_hidden(kind, x, y, rng)? {
        HiddenVariable::Signs(l) => Ok(brans_outcome(l)),
        HiddenVariable::Point(p) => Ok(local_outcomes(&p, x, y)),
    }
}

/// Quadrature normalization `∫ p(λ|x,y) dΩ` of a sphere model's density.
pub fn density_normalization(
    kind: SingletModelKind,
    x: &UnitVector3,
    y: &UnitVector3,
    rule: &SphereRule,
) -> Result<f64> {
    match kind {
        SingletModelKind::Brans => Ok(SignPair::all().iter().map(|l| brans_weight(*l, x, y)).sum()),
        SingletModelKind::Degorre => {
            let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
            Ok(rule.integrate_polar(|u| u.abs() * inv_2pi))
        }
        SingletModelKind::Hall => {
            let phi = x.angle_to(y);
            Ok(rule.integrate_signed(phi, |u, sy| hall_branch_density(phi, sign_pm(u) * sy)))
        }
    }
}
