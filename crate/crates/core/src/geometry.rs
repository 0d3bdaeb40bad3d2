//! Directions on the unit sphere and the small amount of 3-vector algebra the
//! hidden-variable models need (dot products, angles, axis rotations).

use crate::error::{Error, Result};

/// Constructor tolerance on `‖v‖ − 1` for [`UnitVector3`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A measurement direction: a point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    c: [f64; 3],
}

impl UnitVector3 {
    /// Validates that `(x, y, z)` already has unit norm (within [`UNIT_NORM_TOL`]).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Validation("unit vector has non-finite component".into()));
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Validation(format!(
                "unit vector norm {norm:.17} deviates from 1 by more than {UNIT_NORM_TOL:e}"
            )));
        }
        Ok(Self { c: [x, y, z] })
    }

    /// Rescales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Validation("vector has non-finite component".into()));
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if norm < 1e-300 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        Ok(Self { c: [x / norm, y / norm, z / norm] })
    }

    /// Direction with polar angle `theta` (from +z) and azimuth `phi` (from +x).
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { c: [st * cp, st * sp, ct] }
    }

    /// Direction in the x–z plane at angle `theta` from +z. Convenient for
    /// coplanar CHSH settings, where only angle differences matter.
    pub fn in_xz_plane(theta: f64) -> Self {
        Self { c: [theta.sin(), 0.0, theta.cos()] }
    }

    pub fn x_axis() -> Self {
        Self { c: [1.0, 0.0, 0.0] }
    }

    pub fn y_axis() -> Self {
        Self { c: [0.0, 1.0, 0.0] }
    }

    pub fn z_axis() -> Self {
        Self { c: [0.0, 0.0, 1.0] }
    }

    pub fn x(&self) -> f64 {
        self.c[0]
    }

    pub fn y(&self) -> f64 {
        self.c[1]
    }

    pub fn z(&self) -> f64 {
        self.c[2]
    }

    pub fn components(&self) -> [f64; 3] {
        self.c
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.c[0] * other.c[0] + self.c[1] * other.c[1] + self.c[2] * other.c[2]
    }

    pub fn negated(&self) -> Self {
        Self { c: [-self.c[0], -self.c[1], -self.c[2]] }
    }

    /// Angle between the two directions, in `[0, π]`.
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// An orthonormal frame `(e1, e2, pole)`. When `toward` is given and not
/// (anti)parallel to `pole`, `e1` lies in the `pole`–`toward` plane on the
/// `toward` side, so `toward = cos φ · pole + sin φ · e1` with `φ ≥ 0`.
pub fn orthonormal_frame(
    pole: &UnitVector3,
    toward: Option<&UnitVector3>,
) -> (UnitVector3, UnitVector3) {
    let p = pole.components();
    let mut e1 = toward.and_then(|t| {
        let d = pole.dot(t);
        let r = [t.x() - d * p[0], t.y() - d * p[1], t.z() - d * p[2]];
        UnitVector3::normalized(r[0], r[1], r[2]).ok()
    });
    if e1.is_none() {
        // Any direction orthogonal to the pole will do: cross with the axis
        // least aligned with it.
        let axis = if p[0].abs() <= p[1].abs() && p[0].abs() <= p[2].abs() {
            [1.0, 0.0, 0.0]
        } else if p[1].abs() <= p[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let r = cross(p, axis);
        e1 = Some(
            UnitVector3::normalized(r[0], r[1], r[2]).expect("pole is unit, axis not parallel"),
        );
    }
    let e1 = e1.expect("set above");
    let e2c = cross(p, e1.components());
    let e2 = UnitVector3::normalized(e2c[0], e2c[1], e2c[2]).expect("cross of orthonormal pair");
    (e1, e2)
}

/// A proper rotation of 3-space, stored as a 3×3 matrix.
#[derive(Debug, Clone, Copy)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// The rotation taking +z onto `target`, about the axis `ẑ × target`
    /// (Rodrigues form). The antipodal case `target ≈ −ẑ` has no unique axis;
    /// there a rotation by π about x̂ is used.
    pub fn align_z_to(target: &UnitVector3) -> Self {
        let t = target.components();
        let cos_t = t[2];
        if cos_t >= 1.0 - 1e-15 {
            return Self::identity();
        }
        if cos_t <= -1.0 + 1e-15 {
            return Self { m: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]] };
        }
        let sin_t = (t[0] * t[0] + t[1] * t[1]).sqrt();
        let k = [-t[1] / sin_t, t[0] / sin_t, 0.0]; // ẑ × target, normalized
        let one_c = 1.0 - cos_t;
        let (kx, ky, kz) = (k[0], k[1], k[2]);
        Self {
            m: [
                [
                    cos_t + kx * kx * one_c,
                    kx * ky * one_c - kz * sin_t,
                    kx * kz * one_c + ky * sin_t,
                ],
                [
                    ky * kx * one_c + kz * sin_t,
                    cos_t + ky * ky * one_c,
                    ky * kz * one_c - kx * sin_t,
                ],
                [
                    kz * kx * one_c - ky * sin_t,
                    kz * ky * one_c + kx * sin_t,
                    cos_t + kz * kz * one_c,
                ],
            ],
        }
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Rotates a unit vector; the result is renormalized to keep the
    /// [`UNIT_NORM_TOL`] invariant safe from rounding drift.
    pub fn apply_unit(&self, v: &UnitVector3) -> UnitVector3 {
        let r = self.apply(v.components());
        UnitVector3::normalized(r[0], r[1], r[2]).expect("rotation preserves norm")
    }
}
