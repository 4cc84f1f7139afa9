//! 3D affine transform algebra.
//!
//! Matrices are stored row-major and act on column vectors (`M * p`). Every
//! constructor here returns an affine matrix whose bottom row is exactly
//! `(0, 0, 0, 1)`.

use std::fmt;
use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default comparison tolerance for approximate matrix and vector equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Determinants with absolute value below this are treated as singular.
pub const SINGULAR_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular matrix (|det| = {0:e})")]
    SingularMatrix(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3::new(0.0, 0.0, 0.0);
    pub const ONE: Vector3 = Vector3::new(1.0, 1.0, 1.0);
    pub const X: Vector3 = Vector3::new(1.0, 0.0, 0.0);
    pub const Y: Vector3 = Vector3::new(0.0, 1.0, 0.0);
    pub const Z: Vector3 = Vector3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, o: Vector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vector3) -> Vector3 {
        Vector3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Returns the unit vector in the same direction, or `None` for a zero
    /// or non-finite vector.
    pub fn normalized(self) -> Option<Vector3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn mul_elem(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min_elem(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_elem(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn max_abs_diff(self, o: Vector3) -> f64 {
        (self.x - o.x)
            .abs()
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
    }

    pub fn approx_eq(self, o: Vector3, tol: f64) -> bool {
        self.max_abs_diff(o) <= tol
    }
}

impl From<[f64; 3]> for Vector3 {
    fn from(a: [f64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }
}

impl From<Vector3> for [f64; 3] {
    fn from(v: Vector3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vector3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vector3 index {i} out of range"),
        }
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vector3 {
    type Output = Vector3;
    fn div(self, s: f64) -> Vector3 {
        Vector3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl fmt::Display for Vector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A 4x4 affine transform, row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Matrix4 {
    m: [f64; 16],
}

impl fmt::Debug for Matrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix4 [")?;
        for r in 0..4 {
            writeln!(
                f,
                "  {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                self.get(r, 0),
                self.get(r, 1),
                self.get(r, 2),
                self.get(r, 3)
            )?;
        }
        write!(f, "]")
    }
}

impl Default for Matrix4 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl From<Matrix4> for Vec<f64> {
    fn from(m: Matrix4) -> Self {
        m.m.to_vec()
    }
}

impl TryFrom<Vec<f64>> for Matrix4 {
    type Error = TransformError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        let m: [f64; 16] = v.try_into().map_err(|v: Vec<f64>| {
            TransformError::InvalidArgument(format!("expected 16 matrix entries, got {}", v.len()))
        })?;
        Matrix4::from_row_major(m)
    }
}

impl Matrix4 {
    #[rustfmt::skip]
    pub const IDENTITY: Matrix4 = Matrix4 {
        m: [
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ],
    };

    /// Builds a matrix from 16 row-major entries. The bottom row must be
    /// exactly `(0, 0, 0, 1)` and all entries finite.
    pub fn from_row_major(m: [f64; 16]) -> Result<Self, TransformError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(TransformError::InvalidArgument("non-finite matrix entry".into()));
        }
        if m[12..] != [0.0, 0.0, 0.0, 1.0] {
            return Err(TransformError::InvalidArgument(
                "bottom row of an affine matrix must be (0, 0, 0, 1)".into(),
            ));
        }
        Ok(Matrix4 { m })
    }

    /// Builds an affine matrix from a 3x3 linear part and a translation.
    pub fn from_linear_translation(linear: [[f64; 3]; 3], t: Vector3) -> Self {
        #[rustfmt::skip]
        let m = [
            linear[0][0], linear[0][1], linear[0][2], t.x,
            linear[1][0], linear[1][1], linear[1][2], t.y,
            linear[2][0], linear[2][1], linear[2][2], t.z,
            0.0, 0.0, 0.0, 1.0,
        ];
        Matrix4 { m }
    }

    pub fn as_row_major(&self) -> &[f64; 16] {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[row * 4 + col]
    }

    pub fn linear(&self) -> [[f64; 3]; 3] {
        let mut l = [[0.0; 3]; 3];
        for (r, row) in l.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.get(r, c);
            }
        }
        l
    }

    pub fn translation(&self) -> Vector3 {
        Vector3::new(self.m[3], self.m[7], self.m[11])
    }

    /// Row `r` of the 3x3 linear part.
    pub fn linear_row(&self, r: usize) -> Vector3 {
        Vector3::new(self.get(r, 0), self.get(r, 1), self.get(r, 2))
    }

    pub fn is_affine(&self) -> bool {
        self.m[12..] == [0.0, 0.0, 0.0, 1.0]
    }

    /// Standard matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix4) -> Matrix4 {
        let mut m = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += self.m[r * 4 + k] * rhs.m[k * 4 + c];
                }
                m[r * 4 + c] = acc;
            }
        }
        // Affine inputs produce an affine product; pin the last row so
        // rounding can never leak into it.
        m[12] = 0.0;
        m[13] = 0.0;
        m[14] = 0.0;
        m[15] = 1.0;
        Matrix4 { m }
    }

    /// Homogeneous transform of a point (w = 1).
    pub fn apply_point(&self, p: Vector3) -> Vector3 {
        let m = &self.m;
        Vector3::new(
            m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
            m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
            m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11],
        )
    }

    /// Transform of a direction (w = 0); translation is ignored.
    pub fn apply_vector(&self, v: Vector3) -> Vector3 {
        let m = &self.m;
        Vector3::new(
            m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[4] * v.x + m[5] * v.y + m[6] * v.z,
            m[8] * v.x + m[9] * v.y + m[10] * v.z,
        )
    }

    /// Multiplies a vector by the transpose of the linear part. Used for
    /// mapping normals through an inverse transform.
    pub fn apply_transpose_vector(&self, v: Vector3) -> Vector3 {
        let m = &self.m;
        Vector3::new(
            m[0] * v.x + m[4] * v.y + m[8] * v.z,
            m[1] * v.x + m[5] * v.y + m[9] * v.z,
            m[2] * v.x + m[6] * v.y + m[10] * v.z,
        )
    }

    /// Determinant of the 3x3 linear part.
    pub fn linear_determinant(&self) -> f64 {
        let l = self.linear();
        l[0][0] * (l[1][1] * l[2][2] - l[1][2] * l[2][1])
            - l[0][1] * (l[1][0] * l[2][2] - l[1][2] * l[2][0])
            + l[0][2] * (l[1][0] * l[2][1] - l[1][1] * l[2][0])
    }

    /// Inverse of an affine matrix via the adjugate of its linear part.
    pub fn invert(&self) -> Result<Matrix4, TransformError> {
        let det = self.linear_determinant();
        if det.abs() <= SINGULAR_EPSILON || !det.is_finite() {
            return Err(TransformError::SingularMatrix(det.abs()));
        }
        let l = self.linear();
        let inv_det = 1.0 / det;
        let mut inv = [[0.0; 3]; 3];
        for (r, inv_row) in inv.iter_mut().enumerate() {
            for (c, v) in inv_row.iter_mut().enumerate() {
                // inv[r][c] = cofactor(c, r) / det
                let (r0, r1) = others(c);
                let (c0, c1) = others(r);
                let minor = l[r0][c0] * l[r1][c1] - l[r0][c1] * l[r1][c0];
                let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                *v = sign * minor * inv_det;
            }
        }
        let t = self.translation();
        let it = Vector3::new(
            -(inv[0][0] * t.x + inv[0][1] * t.y + inv[0][2] * t.z),
            -(inv[1][0] * t.x + inv[1][1] * t.y + inv[1][2] * t.z),
            -(inv[2][0] * t.x + inv[2][1] * t.y + inv[2][2] * t.z),
        );
        Ok(Matrix4::from_linear_translation(inv, it))
    }

    pub fn max_abs_diff(&self, o: &Matrix4) -> f64 {
        self.m
            .iter()
            .zip(o.m.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &Matrix4, tol: f64) -> bool {
        self.max_abs_diff(o) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Matrix4::IDENTITY, tol)
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        self.matmul(&rhs)
    }
}

impl Mul<Vector3> for Matrix4 {
    type Output = Vector3;
    fn mul(self, p: Vector3) -> Vector3 {
        self.apply_point(p)
    }
}

fn require_finite(name: &str, v: Vector3) -> Result<(), TransformError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(TransformError::InvalidArgument(format!("{name} must be finite, got {v}")))
    }
}

fn require_unit(name: &str, v: Vector3) -> Result<Vector3, TransformError> {
    require_finite(name, v)?;
    v.normalized()
        .ok_or_else(|| TransformError::InvalidArgument(format!("{name} must have nonzero length")))
}

/// Translation by `offset`.
pub fn translate(offset: Vector3) -> Result<Matrix4, TransformError> {
    require_finite("translation offset", offset)?;
    Ok(Matrix4::from_linear_translation(
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        offset,
    ))
}

/// Right-handed rotation by `angle` radians about the axis through `point`
/// with direction `direction`. The direction need not be unit length.
pub fn rotate(angle: f64, direction: Vector3, point: Vector3) -> Result<Matrix4, TransformError> {
    if !angle.is_finite() {
        return Err(TransformError::InvalidArgument("rotation angle must be finite".into()));
    }
    require_finite("rotation pivot", point)?;
    let a = require_unit("rotation axis", direction)?;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    #[rustfmt::skip]
    let r = [
        [t * a.x * a.x + c,       t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
        [t * a.x * a.y + s * a.z, t * a.y * a.y + c,       t * a.y * a.z - s * a.x],
        [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
    ];
    Ok(about_point(r, point))
}

/// Per-axis scaling about `origin`. Every factor must be nonzero.
pub fn scale(factors: Vector3, origin: Vector3) -> Result<Matrix4, TransformError> {
    require_finite("scale factors", factors)?;
    require_finite("scale origin", origin)?;
    if factors.x == 0.0 || factors.y == 0.0 || factors.z == 0.0 {
        return Err(TransformError::InvalidArgument(format!(
            "scale factors must be nonzero, got {factors}"
        )));
    }
    let d = [
        [factors.x, 0.0, 0.0],
        [0.0, factors.y, 0.0],
        [0.0, 0.0, factors.z],
    ];
    Ok(about_point(d, origin))
}

/// Reflection across the plane through `point` with normal `normal`.
pub fn reflect(normal: Vector3, point: Vector3) -> Result<Matrix4, TransformError> {
    require_finite("reflection point", point)?;
    let n = require_unit("reflection normal", normal)?;
    let nv = n.to_array();
    let mut h = [[0.0; 3]; 3];
    for (r, row) in h.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let delta = if r == c { 1.0 } else { 0.0 };
            *v = delta - 2.0 * nv[r] * nv[c];
        }
    }
    Ok(about_point(h, point))
}

/// `T(p) * L * T(-p)` expressed directly: translation column is `p - L p`.
fn about_point(l: [[f64; 3]; 3], p: Vector3) -> Matrix4 {
    let lp = Vector3::new(
        l[0][0] * p.x + l[0][1] * p.y + l[0][2] * p.z,
        l[1][0] * p.x + l[1][1] * p.y + l[1][2] * p.z,
        l[2][0] * p.x + l[2][1] * p.y + l[2][2] * p.z,
    );
    Matrix4::from_linear_translation(l, p - lp)
}
