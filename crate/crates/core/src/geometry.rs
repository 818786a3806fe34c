//! Bloch-sphere vectors and uniform sampling of directions and frames.
//!
//! Every point a party cares about (the prepared state, a measurement axis,
//! a hidden vector) is a [`UnitVec3`]. Hidden variables come in right-handed
//! orthonormal triplets, drawn by rotating the canonical basis with a
//! Haar-random rotation.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for every unit-norm and orthogonality invariant.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("vector ({0}, {1}, {2}) is not unit length (norm {3})")]
    NotUnit(f64, f64, f64, f64),
    #[error("cannot normalize a zero or non-finite vector")]
    Degenerate,
    #[error("triplet is not an orthonormal right-handed frame: {0}")]
    NotOrthonormal(String),
}

/// A plain 3-vector. Used for POVM elements, which are not unit length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A point on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(into = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> Self {
        v.0.to_array()
    }
}

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVec3 = UnitVec3(Vec3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, 1.0));

    /// Accepts components that already have unit norm within [`INVARIANT_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let n = Vec3::new(x, y, z).norm();
        if (n - 1.0).abs() > INVARIANT_TOL || !n.is_finite() {
            return Err(GeometryError::NotUnit(x, y, z, n));
        }
        Ok(UnitVec3(Vec3::new(x, y, z)))
    }

    /// Scales an arbitrary nonzero vector onto the sphere.
    pub fn normalize(v: Vec3) -> Result<Self, GeometryError> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::Degenerate);
        }
        Ok(UnitVec3(v * (1.0 / n)))
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn as_vec3(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, other: UnitVec3) -> f64 {
        self.0.dot(other.0)
    }

    pub fn dot_vec(self, other: Vec3) -> f64 {
        self.0.dot(other)
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl<'de> Deserialize<'de> for UnitVec3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        UnitVec3::new(x, y, z).map_err(serde::de::Error::custom)
    }
}

/// Euclidean inner product of two Bloch vectors.
pub fn dot(a: UnitVec3, b: UnitVec3) -> f64 {
    a.dot(b)
}

/// Right-handed orthonormal frame `(lambda, mu, nu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrthoTriplet {
    pub lambda: UnitVec3,
    pub mu: UnitVec3,
    pub nu: UnitVec3,
}

impl OrthoTriplet {
    pub const CANONICAL: OrthoTriplet = OrthoTriplet {
        lambda: UnitVec3::X,
        mu: UnitVec3::Y,
        nu: UnitVec3::Z,
    };

    pub fn new(lambda: UnitVec3, mu: UnitVec3, nu: UnitVec3) -> Result<Self, GeometryError> {
        let t = OrthoTriplet { lambda, mu, nu };
        let worst = t.max_pairwise_dot();
        if worst >= INVARIANT_TOL {
            return Err(GeometryError::NotOrthonormal(format!(
                "pairwise dot product {worst:e}"
            )));
        }
        let det = t.determinant();
        if (det - 1.0).abs() > INVARIANT_TOL {
            return Err(GeometryError::NotOrthonormal(format!("determinant {det}")));
        }
        Ok(t)
    }

    pub fn max_pairwise_dot(&self) -> f64 {
        self.lambda
            .dot(self.mu)
            .abs()
            .max(self.lambda.dot(self.nu).abs())
            .max(self.mu.dot(self.nu).abs())
    }

    /// det[λ μ ν] = λ · (μ × ν).
    pub fn determinant(&self) -> f64 {
        self.lambda
            .as_vec3()
            .dot(self.mu.as_vec3().cross(self.nu.as_vec3()))
    }
}

fn normal_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform point on the unit sphere from a normalized 3D Gaussian draw.
pub fn sample_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVec3 {
    loop {
        let v = Vec3::new(normal_draw(rng), normal_draw(rng), normal_draw(rng));
        if let Ok(u) = UnitVec3::normalize(v) {
            return u;
        }
    }
}

/// Haar-random frame: a uniform unit quaternion turned into a rotation and
/// applied to the canonical basis.
pub fn sample_triplet<R: Rng + ?Sized>(rng: &mut R) -> OrthoTriplet {
    let (w, x, y, z) = loop {
        let q = [
            normal_draw(rng),
            normal_draw(rng),
            normal_draw(rng),
            normal_draw(rng),
        ];
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.0 && n.is_finite() {
            break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    };
    // Columns of the rotation matrix of q are the images of x̂, ŷ, ẑ.
    let c0 = Vec3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y + w * z),
        2.0 * (x * z - w * y),
    );
    let c1 = Vec3::new(
        2.0 * (x * y - w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z + w * x),
    );
    let c2 = Vec3::new(
        2.0 * (x * z + w * y),
        2.0 * (y * z - w * x),
        1.0 - 2.0 * (x * x + y * y),
    );
    OrthoTriplet {
        lambda: UnitVec3(c0),
        mu: UnitVec3(c1),
        nu: UnitVec3(c2),
    }
}
