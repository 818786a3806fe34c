use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{UnitVec3, Vec3};

/// Tolerance for the completeness conditions.
pub const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PovmError {
    #[error("POVM needs at least 2 elements, got {0}")]
    TooFewElements(usize),
    #[error("element {index} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, expected 2")]
    WeightSum { sum: f64 },
    #[error("vector sum nonzero: ({0}, {1}, {2})")]
    VectorSum(f64, f64, f64),
}

/// `B_j = (|b_j| 1 + b_j·σ)/2`, stored as the vector `b_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PovmElement {
    pub bvec: Vec3,
}

impl PovmElement {
    pub fn new(bvec: Vec3) -> Self {
        PovmElement { bvec }
    }

    pub fn weight(&self) -> f64 {
        self.bvec.norm()
    }
}

/// A rank-one POVM on a qubit. Constructed only through validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

/// Checks `Σ|b_j| = 2`, `Σ b_j = 0`, positive weights and at least two elements.
pub fn validate_povm(elements: &[PovmElement]) -> Result<(), PovmError> {
    if elements.len() < 2 {
        return Err(PovmError::TooFewElements(elements.len()));
    }
    let mut weight_sum = 0.0;
    let mut vec_sum = Vec3::ZERO;
    for (index, e) in elements.iter().enumerate() {
        let weight = e.weight();
        if !weight.is_finite() || weight <= 0.0 {
            return Err(PovmError::NonPositiveWeight { index, weight });
        }
        weight_sum += weight;
        vec_sum = vec_sum + e.bvec;
    }
    if (weight_sum - 2.0).abs() > COMPLETENESS_TOL {
        return Err(PovmError::WeightSum { sum: weight_sum });
    }
    if vec_sum.max_abs() > COMPLETENESS_TOL {
        return Err(PovmError::VectorSum(vec_sum.x, vec_sum.y, vec_sum.z));
    }
    Ok(())
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self, PovmError> {
        validate_povm(&elements)?;
        Ok(Povm { elements })
    }

    pub fn from_vectors(vectors: &[Vec3]) -> Result<Self, PovmError> {
        Povm::new(vectors.iter().copied().map(PovmElement::new).collect())
    }

    /// Parses a JSON array of 3-vectors, e.g. `[[0,0,1],[0,0,-1]]`.
    pub fn from_json(text: &str) -> Result<Self, PovmLoadError> {
        let raw: Vec<[f64; 3]> = serde_json::from_str(text)?;
        let vectors: Vec<Vec3> = raw.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect();
        Ok(Povm::from_vectors(&vectors)?)
    }

    /// The projective measurement `{+b, -b}` with unit weights.
    pub fn projective(b: UnitVec3) -> Self {
        Povm::from_vectors(&[b.as_vec3(), -b.as_vec3()]).expect("±b is complete")
    }

    /// Three coplanar elements of weight 2/3 at 120°, the first along `first`
    /// and the plane spanned with `in_plane`. `in_plane` must not be parallel
    /// to `first`.
    pub fn trine(first: UnitVec3, in_plane: UnitVec3) -> Self {
        let f = first.as_vec3();
        let p = in_plane.as_vec3();
        let perp = UnitVec3::normalize(p - f * f.dot(p))
            .expect("in_plane parallel to first")
            .as_vec3();
        let vectors: Vec<Vec3> = (0..3)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / 3.0;
                (f * th.cos() + perp * th.sin()) * (2.0 / 3.0)
            })
            .collect();
        Povm::from_vectors(&vectors).expect("trine is complete")
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Quantum probabilities `(|b_j| + a·b_j)/2` for the state `a`.
    pub fn expected_probabilities(&self, a: UnitVec3) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| (e.weight() + a.dot_vec(e.bvec)) / 2.0)
            .collect()
    }

    /// Index `j` drawn with probability `|b_j|/2`.
    pub fn draw_candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let target = rng.random::<f64>() * 2.0;
        let mut acc = 0.0;
        for (j, e) in self.elements.iter().enumerate() {
            acc += e.weight();
            if target < acc {
                return j;
            }
        }
        self.elements.len() - 1
    }
}

#[derive(Debug, Error)]
pub enum PovmLoadError {
    #[error("malformed POVM file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid POVM: {0}")]
    Invalid(#[from] PovmError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trine_is_valid() {
        let t = Povm::trine(UnitVec3::Z, UnitVec3::X);
        assert_eq!(t.len(), 3);
        for e in t.elements() {
            assert!((e.weight() - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projective_is_valid() {
        let p = Povm::from_vectors(&[Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)]);
        assert!(p.is_ok());
    }

    #[test]
    fn nonzero_vector_sum_rejected() {
        let err =
            Povm::from_vectors(&[Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, PovmError::VectorSum(..)));
        assert!(err.to_string().contains("vector sum nonzero"));
    }

    #[test]
    fn weight_sum_and_size_checks() {
        assert_eq!(
            Povm::from_vectors(&[Vec3::new(0.0, 0.0, 1.0)]).unwrap_err(),
            PovmError::TooFewElements(1)
        );
        let err =
            Povm::from_vectors(&[Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.0, 0.0, -0.5)]).unwrap_err();
        assert!(matches!(err, PovmError::WeightSum { .. }));
        let err = Povm::from_vectors(&[
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ])
        .unwrap_err();
        assert!(matches!(err, PovmError::NonPositiveWeight { index: 0, .. }));
    }

    #[test]
    fn trine_expected_probabilities() {
        let t = Povm::trine(UnitVec3::Z, UnitVec3::X);
        let p = t.expected_probabilities(UnitVec3::Z);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((p[2] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn json_loading() {
        let p = Povm::from_json("[[0,0,1],[0,0,-1]]").unwrap();
        assert_eq!(p.len(), 2);
        assert!(matches!(
            Povm::from_json("[[0,0,1],[1,0,0]]"),
            Err(PovmLoadError::Invalid(PovmError::VectorSum(..)))
        ));
        assert!(matches!(
            Povm::from_json("[[0,0]]"),
            Err(PovmLoadError::Parse(_))
        ));
    }

    #[test]
    fn candidate_draw_frequencies() {
        let p = Povm::from_vectors(&[
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(0.0, 0.0, -1.0),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[p.draw_candidate(&mut rng)] += 1;
        }
        let f: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert!((f[0] - 0.25).abs() < 0.005);
        assert!((f[1] - 0.25).abs() < 0.005);
        assert!((f[2] - 0.5).abs() < 0.005);
    }

    #[test]
    fn expected_probabilities_sum_to_one() {
        let t = Povm::trine(UnitVec3::X, UnitVec3::Y);
        let a = UnitVec3::normalize(Vec3::new(0.3, -0.2, 0.9)).unwrap();
        let s: f64 = t.expected_probabilities(a).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}
