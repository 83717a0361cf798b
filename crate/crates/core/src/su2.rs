//! Closed-form SU(2) algebra for single nuclear-spin propagators.
//!
//! A [`Unitary2`] is stored through its Cayley-Klein pair `(a, b)`,
//!
//! ```text
//!     U = [  a    b  ]
//!         [ -b*   a* ]      with |a|^2 + |b|^2 = 1,
//! ```
//!
//! so every value is special-unitary by construction and products never
//! leave the group beyond rounding. Global phases are dropped when a
//! general unitary is imported with [`Unitary2::from_matrix`].

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::error::{DdError, Result};

/// Angles this close to 0 or 2π have no meaningful rotation axis.
pub const DEGENERATE_ANGLE: f64 = 1e-9;

/// Tolerance used by [`axes_dot`] when checking that both branches share an angle.
pub const BRANCH_ANGLE_TOL: f64 = 1e-6;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    a: C64,
    b: C64,
}

impl Default for Unitary2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Unitary2 {
    pub const fn identity() -> Self {
        Unitary2 {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    /// Builds from Cayley-Klein parameters, renormalizing `|a|^2 + |b|^2` to one.
    pub fn from_cayley_klein(a: C64, b: C64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(DdError::NotUnitary(f64::NAN));
        }
        Ok(Unitary2 {
            a: a / norm,
            b: b / norm,
        })
    }

    /// Imports an arbitrary 2×2 unitary, dividing out `sqrt(det U)`.
    ///
    /// The sign ambiguity of the square root is harmless: `U` and `-U` are
    /// the same physical rotation and every comparison in the crate is
    /// phase-insensitive.
    pub fn from_matrix(m: [[C64; 2]; 2]) -> Result<Self> {
        let dev = unitarity_deviation(&m);
        if !(dev <= 1e-8) {
            return Err(DdError::NotUnitary(dev));
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let root = det.sqrt();
        let a = m[0][0] / root;
        let b = m[0][1] / root;
        // The lower row of an SU(2) matrix is fixed by the upper one; average
        // both representations to spread rounding evenly.
        let a2 = (m[1][1] / root).conj();
        let b2 = -(m[1][0] / root).conj();
        Self::from_cayley_klein((a + a2) * 0.5, (b + b2) * 0.5)
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    /// Always real for SU(2).
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn det(&self) -> C64 {
        C64::new(self.a.norm_sqr() + self.b.norm_sqr(), 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Unitary2 {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn neg(&self) -> Self {
        Unitary2 {
            a: -self.a,
            b: -self.b,
        }
    }

    /// Binary exponentiation.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = base * acc;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }

    /// Entrywise distance minimized over the SU(2) sign `±1`.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        self.max_abs_diff(other)
            .min(self.max_abs_diff(&other.neg()))
    }

    /// Rotation angle in `[0, 2π]` and the unnormalized axis `sin(φ/2)·n`.
    fn angle_and_scaled_axis(&self) -> (f64, Vec3) {
        let v = [-self.b.im, -self.b.re, -self.a.im];
        let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let half = s.atan2(self.a.re);
        (2.0 * half, v)
    }

    /// Lenient decomposition used inside sweeps: never fails, flags `φ ≈ 0, 2π`.
    pub fn rotation(&self) -> AxisAngle {
        let (angle, v) = self.angle_and_scaled_axis();
        let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let degenerate =
            !(DEGENERATE_ANGLE..=2.0 * PI - DEGENERATE_ANGLE).contains(&angle) || s == 0.0;
        let axis = if s == 0.0 || degenerate && s < 1e-300 {
            [0.0, 0.0, 1.0]
        } else if degenerate {
            // Direction is numerically unreliable here; report +z.
            [0.0, 0.0, 1.0]
        } else {
            [v[0] / s, v[1] / s, v[2] / s]
        };
        AxisAngle {
            axis,
            angle: if angle >= 2.0 * PI { 2.0 * PI } else { angle },
            degenerate,
        }
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2 {
            a: self.a * rhs.a - self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }
}

impl Mul for &Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: &Unitary2) -> Unitary2 {
        *self * *rhs
    }
}

fn unitarity_deviation(m: &[[C64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..2 {
                s += m[k][i].conj() * m[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((s - target).norm());
        }
    }
    if dev.is_nan() {
        f64::INFINITY
    } else {
        dev
    }
}

/// Rotation axis and angle of `U = exp(-i (angle/2) σ·axis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vec3,
    /// Radians in `[0, 2π]`, with `sin(angle/2) >= 0`.
    pub angle: f64,
    /// Set when the angle sits within [`DEGENERATE_ANGLE`] of 0 or 2π; the
    /// axis is then the +z placeholder.
    pub degenerate: bool,
}

impl AxisAngle {
    pub fn to_unitary(&self) -> Unitary2 {
        su2_exp(self.axis, self.angle).unwrap_or_default()
    }
}

/// `exp(-i (angle/2) σ·n̂)` with `n̂ = axis/|axis|`.
pub fn su2_exp(axis: Vec3, angle: f64) -> Result<Unitary2> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        if angle == 0.0 {
            return Ok(Unitary2::identity());
        }
        return Err(DdError::DegenerateAxis);
    }
    let (s, c) = (0.5 * angle).sin_cos();
    let n = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    Ok(Unitary2 {
        a: C64::new(c, -s * n[2]),
        b: C64::new(-s * n[1], -s * n[0]),
    })
}

/// Axis-angle decomposition of a special-unitary matrix.
pub fn axis_angle(u: &Unitary2) -> Result<AxisAngle> {
    let det_dev = (u.a.norm_sqr() + u.b.norm_sqr() - 1.0).abs();
    if !(det_dev <= 1e-8) {
        return Err(DdError::NotUnitary(det_dev));
    }
    Ok(u.rotation())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxesDot {
    pub dot: f64,
    pub angle: f64,
}

/// Dot product of the two branch rotation axes and their shared angle.
pub fn axes_dot(u0: &Unitary2, u1: &Unitary2) -> Result<AxesDot> {
    let r0 = axis_angle(u0)?;
    let r1 = axis_angle(u1)?;
    if (r0.angle - r1.angle).abs() > BRANCH_ANGLE_TOL {
        return Err(DdError::BranchAngleMismatch(r0.angle, r1.angle));
    }
    if r0.degenerate || r1.degenerate {
        return Err(DdError::InvalidParameter(
            "degenerate rotation angle: axes undefined".into(),
        ));
    }
    Ok(AxesDot {
        dot: dot3(&r0.axis, &r1.axis).clamp(-1.0, 1.0),
        angle: 0.5 * (r0.angle + r1.angle),
    })
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
