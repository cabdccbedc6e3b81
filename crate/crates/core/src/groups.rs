//! Supported compact symmetry groups: generators, characters, Haar
//! integration of class functions, stabilizers and the multiplicity of the
//! trivial representation in a restricted irreducible one.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Unit, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, QuadTolerance};
use crate::phase::PhasePoint;

/// Below this class angle the SO(3) character uses its Taylor series.
const SO3_SERIES_CUTOFF: f64 = 1e-4;
/// Tolerance on ⟪A_i, A_j⟫ = δ_ij.
pub const GENERATOR_ORTHONORMALITY_TOL: f64 = 1e-12;
/// Tolerance for rounding a Haar average to an integer multiplicity.
pub const MULTIPLICITY_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupKind {
    /// Rotations of the plane, d = 2.
    So2Planar,
    /// Rotations of space, d = 3.
    So3,
    /// Rotations of space about the vertical axis, d = 3.
    So2Axial,
    /// Cyclic rotation group of order N acting on the plane, d = 2.
    Cyclic(u32),
}

impl GroupKind {
    pub fn config_dim(self) -> usize {
        match self {
            GroupKind::So2Planar | GroupKind::Cyclic(_) => 2,
            GroupKind::So3 | GroupKind::So2Axial => 3,
        }
    }

    pub fn lie_dim(self) -> usize {
        match self {
            GroupKind::So2Planar | GroupKind::So2Axial => 1,
            GroupKind::So3 => 3,
            GroupKind::Cyclic(_) => 0,
        }
    }

    pub fn is_abelian(self) -> bool {
        !matches!(self, GroupKind::So3)
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::So2Planar => write!(f, "so2"),
            GroupKind::So3 => write!(f, "so3"),
            GroupKind::So2Axial => write!(f, "so2_axial"),
            GroupKind::Cyclic(n) => write!(f, "cyclic:{n}"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "so2" => Ok(GroupKind::So2Planar),
            "so3" => Ok(GroupKind::So3),
            "so2_axial" => Ok(GroupKind::So2Axial),
            other => {
                let order = other
                    .strip_prefix("cyclic:")
                    .and_then(|n| n.parse::<u32>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| {
                        Error::config(
                            "group",
                            format!("unknown group `{other}` (expected so2, so3, so2_axial or cyclic:N)"),
                        )
                    })?;
                Ok(GroupKind::Cyclic(order))
            }
        }
    }
}

impl TryFrom<String> for GroupKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupKind> for String {
    fn from(g: GroupKind) -> String {
        g.to_string()
    }
}

/// A compact linear group with an orthonormal basis of its Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    kind: GroupKind,
    generators: Vec<DMatrix<f64>>,
}

/// `(A)_{jk} = ε_{ijk} / √2`, so that `xᵀ A_i ξ = (x × ξ)_i / √2`.
fn so3_generator(i: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(3, 3);
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    a[(j, k)] = 1.0 / SQRT_2;
    a[(k, j)] = -1.0 / SQRT_2;
    a
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Self {
        let generators = match kind {
            GroupKind::So2Planar => vec![DMatrix::from_row_slice(
                2,
                2,
                &[0.0, 1.0 / SQRT_2, -1.0 / SQRT_2, 0.0],
            )],
            GroupKind::So3 => (0..3).map(so3_generator).collect(),
            GroupKind::So2Axial => vec![so3_generator(2)],
            GroupKind::Cyclic(_) => Vec::new(),
        };
        Self { kind, generators }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn config_dim(&self) -> usize {
        self.kind.config_dim()
    }

    pub fn lie_dim(&self) -> usize {
        self.generators.len()
    }

    /// Orthonormal basis of the Lie algebra for ⟪A, B⟫ = Tr(AᵀB).
    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// Common dimension k₀ of the group orbits on the regular part of Ω₀.
    pub fn orbit_dimension(&self) -> usize {
        match self.kind {
            GroupKind::So2Planar | GroupKind::So2Axial => 1,
            GroupKind::So3 => 2,
            GroupKind::Cyclic(_) => 0,
        }
    }

    pub fn character(&self, n: i64) -> Result<IrreducibleCharacter> {
        IrreducibleCharacter::new(self.kind, n)
    }

    /// Rotation by `angle` (about the vertical axis for the axial group, by a
    /// multiple of 2π/N for cyclic groups).
    pub fn rotation(&self, angle: f64) -> GroupElement {
        let (c, s) = (angle.cos(), angle.sin());
        let matrix = match self.kind {
            GroupKind::So2Planar | GroupKind::Cyclic(_) => DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            GroupKind::So3 | GroupKind::So2Axial => {
                DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
            }
        };
        GroupElement {
            matrix,
            class_angle: angle.rem_euclid(2.0 * PI),
        }
    }

    /// The element `k` of a cyclic group, i.e. rotation by 2πk/N.
    pub fn cyclic_element(&self, k: i64) -> Result<GroupElement> {
        match self.kind {
            GroupKind::Cyclic(order) => Ok(self.rotation(2.0 * PI * k as f64 / order as f64)),
            _ => Err(Error::Unsupported("cyclic_element on a continuous group".into())),
        }
    }

    /// Rotation about `axis` by `angle`; only for SO(3).
    pub fn axis_rotation(&self, axis: [f64; 3], angle: f64) -> Result<GroupElement> {
        if self.kind != GroupKind::So3 {
            return Err(Error::Unsupported("axis rotations need SO(3)".into()));
        }
        let axis = Unit::try_new(Vector3::from(axis), 1e-300)
            .ok_or_else(|| Error::InvalidArgument("rotation axis is zero".into()))?;
        let r = nalgebra::Rotation3::from_axis_angle(&axis, angle);
        let matrix = DMatrix::from_iterator(3, 3, r.matrix().iter().copied());
        let class = angle.rem_euclid(2.0 * PI);
        Ok(GroupElement {
            matrix,
            class_angle: class,
        })
    }

    /// Haar-distributed random element.
    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self.kind {
            GroupKind::So2Planar | GroupKind::So2Axial => self.rotation(rng.random_range(0.0..2.0 * PI)),
            GroupKind::Cyclic(order) => self.rotation(2.0 * PI * rng.random_range(0..order) as f64 / order as f64),
            GroupKind::So3 => {
                // uniform unit quaternion
                let q = loop {
                    let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                    let n2: f64 = v.iter().map(|a| a * a).sum();
                    if n2 > 1e-6 && n2 <= 1.0 {
                        let n = n2.sqrt();
                        break v.map(|a| a / n);
                    }
                };
                let uq = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                    q[0], q[1], q[2], q[3],
                ));
                let rot = uq.to_rotation_matrix();
                let matrix = DMatrix::from_iterator(3, 3, rot.matrix().iter().copied());
                let class_angle = uq.angle();
                GroupElement { matrix, class_angle }
            }
        }
    }

    pub fn identity(&self) -> GroupElement {
        let d = self.config_dim();
        GroupElement {
            matrix: DMatrix::identity(d, d),
            class_angle: 0.0,
        }
    }

    /// ∫_G f(g) dg for a class function given through its class angle θ.
    pub fn haar_average<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        haar_average_kind(self.kind, f)
    }

    /// Stabilizer of `z` (up to conjugacy).
    pub fn stabilizer_of(&self, z: &PhasePoint) -> Result<StabilizerModel> {
        check_dim(self, z)?;
        let scale = z.norm();
        if scale == 0.0 {
            return Err(Error::Stratum("the origin is fixed by the whole group".into()));
        }
        let tol = 1e-12 * scale * scale;
        let stabilizer = match self.kind {
            GroupKind::So2Planar | GroupKind::Cyclic(_) => StabilizerKind::Trivial,
            GroupKind::So2Axial => {
                let perp = z.x[0].powi(2) + z.x[1].powi(2) + z.xi[0].powi(2) + z.xi[1].powi(2);
                if perp <= tol {
                    return Err(Error::Stratum(
                        "point lies on the symmetry axis, where the stabilizer is the whole group".into(),
                    ));
                }
                StabilizerKind::Trivial
            }
            GroupKind::So3 => {
                let x = Vector3::from_column_slice(&z.x);
                let xi = Vector3::from_column_slice(&z.xi);
                if x.cross(&xi).norm_squared() <= tol * tol {
                    StabilizerKind::So2Axis
                } else {
                    StabilizerKind::Trivial
                }
            }
        };
        Ok(StabilizerModel {
            kind: stabilizer,
            ambient: self.kind,
        })
    }
}

fn check_dim(group: &GroupModel, z: &PhasePoint) -> Result<()> {
    if z.dim() != group.config_dim() {
        return Err(Error::InvalidArgument(format!(
            "phase point has dimension {} but {} acts on ℝ^{}",
            z.dim(),
            group.kind,
            group.config_dim()
        )));
    }
    Ok(())
}

fn haar_average_kind<F>(kind: GroupKind, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let tol = QuadTolerance::absolute(1e-10);
    match kind {
        GroupKind::So2Planar | GroupKind::So2Axial => {
            let re = integrate(|t| f(t).re, 0.0, 2.0 * PI, tol)?;
            let im = integrate(|t| f(t).im, 0.0, 2.0 * PI, tol)?;
            Ok(Complex64::new(re.value, im.value) / (2.0 * PI))
        }
        GroupKind::So3 => {
            // Weyl integration formula: class density (1/π)·2 sin²(θ/2) on [0, π].
            let weight = |t: f64| 2.0 * (0.5 * t).sin().powi(2) / PI;
            let re = integrate(|t| f(t).re * weight(t), 0.0, PI, tol)?;
            let im = integrate(|t| f(t).im * weight(t), 0.0, PI, tol)?;
            Ok(Complex64::new(re.value, im.value))
        }
        GroupKind::Cyclic(order) => {
            let sum: Complex64 = (0..order).map(|k| f(2.0 * PI * k as f64 / order as f64)).sum();
            Ok(sum / order as f64)
        }
    }
}

/// An element of one of the catalog groups, stored as its d×d matrix
/// together with its conjugacy-class angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
    pub class_angle: f64,
}

impl GroupElement {
    /// Symplectic action M(g)(x, ξ) = (g x, ᵗg⁻¹ ξ).
    pub fn apply_symplectic(&self, z: &PhasePoint) -> PhasePoint {
        let x = &self.matrix * DVector::from_column_slice(&z.x);
        let inv_t = self
            .matrix
            .clone()
            .try_inverse()
            .expect("group elements are invertible")
            .transpose();
        let xi = inv_t * DVector::from_column_slice(&z.xi);
        PhasePoint::new(x.iter().copied().collect(), xi.iter().copied().collect())
    }

    /// Configuration-space action x ↦ g x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).iter().copied().collect()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.matrix.transpose(),
            class_angle: (2.0 * PI - self.class_angle).rem_euclid(2.0 * PI),
        }
    }
}

/// Irreducible character χ_n of a catalog group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibleCharacter {
    pub kind: GroupKind,
    pub n: i64,
}

impl IrreducibleCharacter {
    pub fn new(kind: GroupKind, n: i64) -> Result<Self> {
        match kind {
            GroupKind::So3 if n < 0 => Err(Error::config("sector", "SO(3) sectors are labelled by n ≥ 0")),
            GroupKind::Cyclic(order) => Ok(Self {
                kind,
                n: n.rem_euclid(order as i64),
            }),
            _ => Ok(Self { kind, n }),
        }
    }

    /// d_χ = χ(e).
    pub fn degree(&self) -> usize {
        match self.kind {
            GroupKind::So3 => 2 * self.n as usize + 1,
            _ => 1,
        }
    }

    /// χ evaluated on the conjugacy class of rotation angle `theta`.
    pub fn value(&self, theta: f64) -> Complex64 {
        match self.kind {
            GroupKind::So3 => Complex64::new(so3_character(self.n, theta), 0.0),
            _ => Complex64::from_polar(1.0, self.n as f64 * theta),
        }
    }

    pub fn conj_value(&self, theta: f64) -> Complex64 {
        self.value(theta).conj()
    }
}

/// χ_n(θ) = sin((2n+1)θ/2) / sin(θ/2), with the removable singularity at
/// θ = 0 (mod 2π) handled by its Taylor series.
fn so3_character(n: i64, theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    // χ_n(θ) = χ_n(2π − θ): fold onto [0, π]
    let t = if t > PI { 2.0 * PI - t } else { t };
    let m = (2 * n + 1) as f64;
    if t < SO3_SERIES_CUTOFF {
        // Σ_{k=-n}^{n} cos kθ = m − θ² Σk² + θ⁴ Σk⁴ / 12 − …
        let nf = n as f64;
        let s2 = nf * (nf + 1.0) * m / 6.0;
        let s4 = nf * (nf + 1.0) * m * (3.0 * nf * nf + 3.0 * nf - 1.0) / 30.0;
        m - t * t * s2 + t.powi(4) * s4 / 12.0
    } else {
        (0.5 * m * t).sin() / (0.5 * t).sin()
    }
}

/// Convenience wrapper mirroring [`IrreducibleCharacter::value`].
pub fn character_value(chi: &IrreducibleCharacter, theta: f64) -> Complex64 {
    chi.value(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilizerKind {
    Trivial,
    /// Rotations about a fixed axis, inside SO(3).
    So2Axis,
    FullGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerModel {
    pub kind: StabilizerKind,
    pub ambient: GroupKind,
}

impl StabilizerModel {
    pub fn new(kind: StabilizerKind, ambient: GroupKind) -> Self {
        Self { kind, ambient }
    }

    /// Normalised Haar average over the stabilizer of a class function of
    /// the ambient group.
    pub fn haar_average<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        match self.kind {
            StabilizerKind::Trivial => Ok(f(0.0)),
            StabilizerKind::So2Axis => haar_average_kind(GroupKind::So2Planar, f),
            StabilizerKind::FullGroup => haar_average_kind(self.ambient, f),
        }
    }
}

/// [ρ_χ|_{H₀} : 𝟙] = ∫_{H₀} χ̄(h) dh, rounded to the nearest integer.
pub fn trivial_multiplicity(chi: &IrreducibleCharacter, stabilizer: &StabilizerModel) -> Result<usize> {
    if chi.kind != stabilizer.ambient {
        return Err(Error::InvalidArgument(format!(
            "character of {} restricted to a stabilizer in {}",
            chi.kind, stabilizer.ambient
        )));
    }
    let avg = stabilizer.haar_average(|t| chi.conj_value(t))?;
    let rounded = avg.re.round();
    let residual = (avg - Complex64::new(rounded, 0.0)).norm();
    if residual >= MULTIPLICITY_RESIDUAL_TOL || rounded < 0.0 {
        return Err(Error::NonIntegerMultiplicity {
            value: avg.re,
            residual,
        });
    }
    Ok(rounded as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::symplectic_form;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ALL: [GroupKind; 4] = [
        GroupKind::So2Planar,
        GroupKind::So3,
        GroupKind::So2Axial,
        GroupKind::Cyclic(5),
    ];

    fn pt(x: &[f64], xi: &[f64]) -> PhasePoint {
        PhasePoint::new(x.to_vec(), xi.to_vec())
    }

    #[test]
    fn generators_are_antisymmetric_and_orthonormal() {
        for kind in ALL {
            let g = GroupModel::new(kind);
            assert_eq!(g.lie_dim(), kind.lie_dim());
            for (i, a) in g.generators().iter().enumerate() {
                assert!((a + a.transpose()).norm() == 0.0);
                for (j, b) in g.generators().iter().enumerate() {
                    let ip = (a.transpose() * b).trace();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expected).abs() < GENERATOR_ORTHONORMALITY_TOL);
                }
            }
        }
        assert_eq!(GroupModel::new(GroupKind::So3).lie_dim(), 3);
    }

    #[test]
    fn character_examples() {
        let so3 = IrreducibleCharacter::new(GroupKind::So3, 1).unwrap();
        assert!((so3.value(0.0).re - 3.0).abs() < 1e-15);
        assert!((so3.value(PI).re + 1.0).abs() < 1e-14);
        for kind in ALL {
            let chi0 = IrreducibleCharacter::new(kind, 0).unwrap();
            for t in [0.0, 0.3, 2.0, 5.9] {
                assert!((chi0.value(t) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn so3_character_is_continuous_through_series_cutoff() {
        for n in 0..8 {
            let below = so3_character(n, SO3_SERIES_CUTOFF * 0.999_999);
            let above = so3_character(n, SO3_SERIES_CUTOFF * 1.000_001);
            assert!((below - above).abs() < 1e-9, "n={n}: {below} vs {above}");
            // explicit sum as oracle
            let t = 3e-5;
            let direct: f64 = (-n..=n).map(|k| (k as f64 * t).cos()).sum();
            assert!((so3_character(n, t) - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn degrees() {
        assert_eq!(IrreducibleCharacter::new(GroupKind::So3, 4).unwrap().degree(), 9);
        assert_eq!(IrreducibleCharacter::new(GroupKind::So2Planar, -3).unwrap().degree(), 1);
        assert!(IrreducibleCharacter::new(GroupKind::So3, -1).is_err());
    }

    #[test]
    fn character_orthonormality() {
        for kind in ALL {
            let g = GroupModel::new(kind);
            let range: Vec<i64> = match kind {
                GroupKind::So3 => (0..=10).collect(),
                GroupKind::Cyclic(_) => (0..5).collect(),
                _ => (-10..=10).collect(),
            };
            for &m in &range {
                for &n in &range {
                    let cm = g.character(m).unwrap();
                    let cn = g.character(n).unwrap();
                    let avg = g.haar_average(|t| cm.value(t) * cn.conj_value(t)).unwrap();
                    let expected = if m == n { 1.0 } else { 0.0 };
                    assert!(
                        (avg - Complex64::new(expected, 0.0)).norm() < 1e-8,
                        "{kind} m={m} n={n}: {avg}"
                    );
                }
            }
            let one = g.haar_average(|_| Complex64::new(1.0, 0.0)).unwrap();
            assert!((one.re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stabilizer_examples() {
        let so3 = GroupModel::new(GroupKind::So3);
        let s = so3.stabilizer_of(&pt(&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0])).unwrap();
        assert_eq!(s.kind, StabilizerKind::So2Axis);
        let planar = GroupModel::new(GroupKind::So2Planar);
        let s = planar.stabilizer_of(&pt(&[1.0, 0.0], &[2.0, 0.0])).unwrap();
        assert_eq!(s.kind, StabilizerKind::Trivial);
        let axial = GroupModel::new(GroupKind::So2Axial);
        assert!(matches!(
            axial.stabilizer_of(&pt(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0])),
            Err(Error::Stratum(_))
        ));
        assert!(matches!(so3.stabilizer_of(&PhasePoint::zeros(3)), Err(Error::Stratum(_))));
    }

    #[test]
    fn stabilizer_constant_along_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let so3 = GroupModel::new(GroupKind::So3);
        let z = pt(&[0.3, -1.0, 0.5], &[0.6, -2.0, 1.0]);
        let base = so3.stabilizer_of(&z).unwrap();
        for _ in 0..50 {
            let g = so3.sample_element(&mut rng);
            assert_eq!(so3.stabilizer_of(&g.apply_symplectic(&z)).unwrap(), base);
        }
    }

    #[test]
    fn multiplicity_examples() {
        for n in 0..8 {
            let chi = IrreducibleCharacter::new(GroupKind::So3, n).unwrap();
            let axis = StabilizerModel::new(StabilizerKind::So2Axis, GroupKind::So3);
            assert_eq!(trivial_multiplicity(&chi, &axis).unwrap(), 1);
            let trivial = StabilizerModel::new(StabilizerKind::Trivial, GroupKind::So3);
            assert_eq!(trivial_multiplicity(&chi, &trivial).unwrap(), chi.degree());
            let full = StabilizerModel::new(StabilizerKind::FullGroup, GroupKind::So3);
            assert_eq!(trivial_multiplicity(&chi, &full).unwrap(), usize::from(n == 0));
        }
        for kind in ALL {
            let chi0 = IrreducibleCharacter::new(kind, 0).unwrap();
            for sk in [StabilizerKind::Trivial, StabilizerKind::FullGroup] {
                assert_eq!(trivial_multiplicity(&chi0, &StabilizerModel::new(sk, kind)).unwrap(), 1);
            }
        }
    }

    #[test]
    fn apply_symplectic_examples() {
        let g = GroupModel::new(GroupKind::So2Planar);
        let z = pt(&[1.0, 0.0], &[0.0, 1.0]);
        let w = g.rotation(PI / 2.0).apply_symplectic(&z);
        assert!(w.distance(&pt(&[0.0, 1.0], &[-1.0, 0.0])) < 1e-15);
        assert_eq!(g.identity().apply_symplectic(&z), z);
    }

    #[test]
    fn action_is_symplectic_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in ALL {
            let g = GroupModel::new(kind);
            let d = g.config_dim();
            for _ in 0..40 {
                let mut rand_pt = || {
                    PhasePoint::new(
                        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
                        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    )
                };
                let (u, v) = (rand_pt(), rand_pt());
                let el = g.sample_element(&mut rng);
                let (gu, gv) = (el.apply_symplectic(&u), el.apply_symplectic(&v));
                assert!((symplectic_form(&gu, &gv) - symplectic_form(&u, &v)).abs() < 1e-12);
                assert!((gu.norm() - u.norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parses_group_keys() {
        assert_eq!("cyclic:6".parse::<GroupKind>().unwrap(), GroupKind::Cyclic(6));
        assert_eq!("so2_axial".parse::<GroupKind>().unwrap(), GroupKind::So2Axial);
        let err = "so4".parse::<GroupKind>().unwrap_err();
        assert!(err.to_string().contains("group"));
        assert!("cyclic:0".parse::<GroupKind>().is_err());
    }
}
