//! Points of the phase space ℝ^{2d} = ℝ^d_x × ℝ^d_ξ.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    /// # Panics
    /// If position and momentum have different lengths.
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        assert_eq!(x.len(), xi.len(), "position and momentum dimensions differ");
        Self { x, xi }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.x, &self.x) + dot(&self.xi, &self.xi)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.x.iter().map(|v| v * s).collect(),
            self.xi.iter().map(|v| v * s).collect(),
        )
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let dx: f64 = self.x.iter().zip(&other.x).map(|(a, b)| (a - b).powi(2)).sum();
        let dxi: f64 = self.xi.iter().zip(&other.xi).map(|(a, b)| (a - b).powi(2)).sum();
        (dx + dxi).sqrt()
    }

    /// Flattened `(x, ξ)` vector.
    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(&self.xi).copied().collect()
    }

    pub fn from_slice(z: &[f64]) -> Self {
        let d = z.len() / 2;
        Self::new(z[..d].to_vec(), z[d..].to_vec())
    }
}

/// Standard symplectic form ω(u, v) = ⟨Ju, v⟩ with J = [[0, I], [−I, 0]].
pub fn symplectic_form(u: &PhasePoint, v: &PhasePoint) -> f64 {
    dot(&u.xi, &v.x) - dot(&u.x, &v.xi)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}
