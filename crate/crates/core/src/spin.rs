//! Hyperfine parameters, Larmor field and the two electron-branch generators.
//!
//! Everything internal is an angular frequency in rad/s. Generators are
//! stored as field vectors `b` with `h = b·I = b·σ/2`, which is all the
//! closed-form exponential in [`crate::su2`] needs.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use crate::error::{DdError, Result};
use crate::su2::Vec3;

/// rad/s per kHz of ordinary frequency.
pub const KHZ: f64 = 2.0 * PI * 1e3;

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Electron gyromagnetic ratio magnitude, rad/s/T.
pub const GAMMA_E: f64 = 1.760_859_630_23e11;
/// 13C gyromagnetic ratio, rad/s/T.
pub const GAMMA_C13: f64 = 6.728_284e7;

pub fn khz_to_rad(f_khz: f64) -> f64 {
    f_khz * KHZ
}

pub fn rad_to_khz(w: f64) -> f64 {
    w / KHZ
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineParams {
    pub a_par: f64,
    pub a_perp: f64,
    pub label: String,
}

impl HyperfineParams {
    pub fn new(label: impl Into<String>, a_par: f64, a_perp: f64) -> Result<Self> {
        if !a_par.is_finite() || !a_perp.is_finite() {
            return Err(DdError::InvalidParameter(
                "hyperfine values must be finite".into(),
            ));
        }
        if a_perp < 0.0 {
            return Err(DdError::InvalidParameter(format!(
                "A_perp must be non-negative (got {a_perp})"
            )));
        }
        Ok(HyperfineParams {
            a_par,
            a_perp,
            label: label.into(),
        })
    }

    pub fn from_khz(label: impl Into<String>, a_par_khz: f64, a_perp_khz: f64) -> Result<Self> {
        Self::new(label, khz_to_rad(a_par_khz), khz_to_rad(a_perp_khz))
    }

    /// Total hyperfine strength `sqrt(A∥² + A⊥²)`.
    pub fn omega_h(&self) -> f64 {
        self.a_par.hypot(self.a_perp)
    }

    /// Polar angle with `A∥ = ω_h cos θ`, `A⊥ = ω_h sin θ`.
    pub fn theta(&self) -> f64 {
        self.a_perp.atan2(self.a_par)
    }

    pub fn scaled(&self, c: f64) -> Self {
        HyperfineParams {
            a_par: self.a_par * c,
            a_perp: self.a_perp * c,
            label: self.label.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub omega_l: f64,
}

impl FieldConfig {
    pub fn new(omega_l: f64) -> Result<Self> {
        if !(omega_l > 0.0 && omega_l.is_finite()) {
            return Err(DdError::InvalidParameter(format!(
                "Larmor frequency must be positive (got {omega_l})"
            )));
        }
        Ok(FieldConfig { omega_l })
    }

    pub fn from_khz(f_khz: f64) -> Result<Self> {
        Self::new(khz_to_rad(f_khz))
    }

    /// Analytic resonance formulas assume `ω_L` well above both couplings.
    pub fn is_weak_for(&self, p: &HyperfineParams) -> bool {
        self.omega_l < 2.0 * p.a_par.abs().max(p.a_perp)
    }
}

/// `h0 = ω_L Iz` and `h1 = (ω_L − A∥) Iz − A⊥ Ix` as field vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchHamiltonians {
    pub h0: Vec3,
    pub h1: Vec3,
}

impl BranchHamiltonians {
    /// Eigenvalue gap of a generator; equals the field magnitude.
    pub fn splitting(b: &Vec3) -> f64 {
        (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt()
    }

    /// Dense 2×2 form of `b·σ/2`.
    pub fn matrix(b: &Vec3) -> [[C64; 2]; 2] {
        [
            [C64::new(0.5 * b[2], 0.0), C64::new(0.5 * b[0], -0.5 * b[1])],
            [C64::new(0.5 * b[0], 0.5 * b[1]), C64::new(-0.5 * b[2], 0.0)],
        ]
    }

    pub fn get(&self, branch: usize) -> &Vec3 {
        if branch == 0 {
            &self.h0
        } else {
            &self.h1
        }
    }
}

pub fn branch_hamiltonians(p: &HyperfineParams, f: &FieldConfig) -> BranchHamiltonians {
    BranchHamiltonians {
        h0: [0.0, 0.0, f.omega_l],
        h1: [-p.a_perp, 0.0, f.omega_l - p.a_par],
    }
}

/// Dipolar coupling of a point electron and nucleus separated by `r` (m).
///
/// Only the `Sz` row of the dipolar tensor survives the secular
/// reduction; its transverse part is rotated onto x, so `A⊥` is the norm
/// of `(A_zx, A_zy)`. `ħ` converts the interaction energy to rad/s.
pub fn hyperfine_from_geometry(r: Vec3, gamma_e: f64, gamma_n: f64) -> Result<HyperfineParams> {
    let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !(d > 0.0 && d.is_finite()) {
        return Err(DdError::SingularGeometry);
    }
    let pre = MU0 * gamma_e * gamma_n * HBAR / (4.0 * PI * d.powi(3));
    let u = [r[0] / d, r[1] / d, r[2] / d];
    let a_zx = -3.0 * pre * u[2] * u[0];
    let a_zy = -3.0 * pre * u[2] * u[1];
    let a_zz = pre * (1.0 - 3.0 * u[2] * u[2]);
    HyperfineParams::new("geometry", a_zz, a_zx.hypot(a_zy))
}

/// Reads `label,apar_khz,aperp_khz` rows.
pub fn read_register<R: Read>(reader: R) -> Result<Vec<HyperfineParams>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["label", "apar_khz", "aperp_khz"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(DdError::Parse(format!(
            "register header must be `label,apar_khz,aperp_khz`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let label = rec[0].to_string();
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| {
                DdError::Parse(format!("row {}: column {}: {e}", line + 2, expected[i]))
            })
        };
        if !seen.insert(label.clone()) {
            return Err(DdError::Parse(format!("duplicate label `{label}`")));
        }
        out.push(HyperfineParams::from_khz(label, num(1)?, num(2)?)?);
    }
    Ok(out)
}

pub fn write_register<W: Write>(writer: W, spins: &[HyperfineParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["label", "apar_khz", "aperp_khz"])?;
    for s in spins {
        w.write_record([
            s.label.clone(),
            crate::io::fmt_num(rad_to_khz(s.a_par)),
            crate::io::fmt_num(rad_to_khz(s.a_perp)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
