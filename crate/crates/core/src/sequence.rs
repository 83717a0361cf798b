//! Pulse schedules and exact conditional evolution of one nuclear spin.
//!
//! A unit of duration `t` with fractional π-pulse positions `δ_1 < … < δ_m`
//! is split into `m + 1` free segments `(δ_{j+1} − δ_j)·t` (with `δ_0 = 0`,
//! `δ_{m+1} = 1`). The nuclear spin sees `h0` or `h1` depending on the
//! electron state, which flips at every pulse, so the branch that starts in
//! `|0⟩` gives `u0` and the one that starts in `|1⟩` gives `u1`.
//!
//! Units with an odd pulse count leave the electron flipped; they are only
//! evolved in pairs, `u0 = B·A` and `u1 = A·B`, where `A` starts in branch
//! 0 and `B` in branch 1.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{DdError, Result};
use crate::spin::{branch_hamiltonians, BranchHamiltonians, FieldConfig, HyperfineParams};
use crate::su2::{su2_exp, Unitary2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Cpmg,
    /// UDDn with `n` pulses per unit.
    Udd(u32),
    /// `n_cpmg` CPMG units followed by `n_udd` UDD units of the given order.
    Hybrid {
        n_cpmg: u32,
        order: u32,
        n_udd: u32,
    },
}

impl Protocol {
    /// Fractions of one unit; for hybrids, of the whole composite block.
    pub fn unit_fractions(&self) -> Vec<f64> {
        match *self {
            Protocol::Cpmg => cpmg_fractions(1).expect("N = 1"),
            Protocol::Udd(n) => udd_fractions(n),
            Protocol::Hybrid {
                n_cpmg,
                order,
                n_udd,
            } => hybrid_fractions(n_cpmg, order, n_udd),
        }
    }

    pub fn pulses_per_unit(&self) -> u32 {
        match *self {
            Protocol::Cpmg => 2,
            Protocol::Udd(n) => n,
            Protocol::Hybrid {
                n_cpmg,
                order,
                n_udd,
            } => 2 * n_cpmg + order * n_udd,
        }
    }

    /// Smallest admissible iteration count (2 for odd-pulse units).
    pub fn min_iterations(&self) -> u32 {
        if self.pulses_per_unit() % 2 == 1 {
            2
        } else {
            1
        }
    }

    pub fn validate_iterations(&self, n: u32) -> Result<()> {
        if n == 0 {
            return Err(DdError::InvalidParameter(
                "iteration count must be positive".into(),
            ));
        }
        if let Protocol::Hybrid { order, n_udd, .. } = *self {
            if order == 0 {
                return Err(DdError::InvalidParameter(
                    "UDD order must be positive".into(),
                ));
            }
            if order % 2 == 1 && n_udd % 2 == 1 {
                return Err(DdError::OddUddIteration(n_udd));
            }
        } else if self.pulses_per_unit() % 2 == 1 && n % 2 == 1 {
            return Err(DdError::OddUddIteration(n));
        }
        if let Protocol::Udd(0) = self {
            return Err(DdError::InvalidParameter(
                "UDD order must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Cpmg => write!(f, "cpmg"),
            Protocol::Udd(n) => write!(f, "udd{n}"),
            Protocol::Hybrid {
                n_cpmg,
                order,
                n_udd,
            } => write!(f, "hybrid:{n_cpmg}:{order}:{n_udd}"),
        }
    }
}

impl FromStr for Protocol {
    type Err = DdError;

    /// Accepts `cpmg`, `uddN` and `hybrid:N_cpmg:order:N_udd`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "cpmg" {
            return Ok(Protocol::Cpmg);
        }
        if let Some(n) = s.strip_prefix("udd") {
            return n
                .parse::<u32>()
                .ok()
                .filter(|&n| n >= 1)
                .map(Protocol::Udd)
                .ok_or_else(|| DdError::Parse(format!("bad UDD order in `{s}`")));
        }
        if let Some(rest) = s.strip_prefix("hybrid:") {
            let parts: Vec<_> = rest.split(':').map(str::parse::<u32>).collect();
            if let [Ok(a), Ok(b), Ok(c)] = parts[..] {
                return Ok(Protocol::Hybrid {
                    n_cpmg: a,
                    order: b,
                    n_udd: c,
                });
            }
        }
        Err(DdError::Parse(format!("unknown protocol `{s}`")))
    }
}

/// `(j − ½)/(2N)` for `j = 1..2N`.
pub fn cpmg_fractions(n: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(DdError::InvalidParameter("CPMG needs N >= 1".into()));
    }
    let m = 2 * n;
    Ok((1..=m).map(|j| (j as f64 - 0.5) / m as f64).collect())
}

/// `sin²(πj/(2n+2))` for `j = 1..n`; `n = 0` gives the empty (free decay) schedule.
pub fn udd_fractions(n: u32) -> Vec<f64> {
    let den = 2.0 * n as f64 + 2.0;
    (1..=n)
        .map(|j| (PI * j as f64 / den).sin().powi(2))
        .collect()
}

/// `N` back-to-back copies of `unit`, rescaled into `(0, 1)`.
pub fn iterated_fractions(unit: &[f64], n: u32) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .flat_map(|l| unit.iter().map(move |d| (l as f64 + d) / nf))
        .collect()
}

/// CPMG block first, then the UDD block, on a common `(0, 1)` axis.
pub fn hybrid_fractions(n_cpmg: u32, order: u32, n_udd: u32) -> Vec<f64> {
    let total = (n_cpmg + n_udd) as f64;
    if total == 0.0 {
        return Vec::new();
    }
    let mut out: Vec<f64> = (1..=2 * n_cpmg)
        .map(|j| (j as f64 - 0.5) / (2.0 * total))
        .collect();
    let unit = udd_fractions(order);
    for l in 0..n_udd {
        let off = (l + n_cpmg) as f64;
        out.extend(unit.iter().map(|d| (off + d) / total));
    }
    out
}

/// `Δ_j(n)` for `j = 0..n`: UDD segment lengths in units of the first one.
pub fn delta_weights(n: u32) -> Vec<f64> {
    let den = 2.0 * n as f64 + 2.0;
    let s2 = |j: u32| (PI * j as f64 / den).sin().powi(2);
    let first = s2(1);
    (0..=n).map(|j| (s2(j + 1) - s2(j)) / first).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub fractions: Vec<f64>,
    pub unit_time: f64,
    pub iterations: u32,
    pub protocol: Protocol,
}

impl PulseSchedule {
    pub fn new(protocol: Protocol, unit_time: f64, iterations: u32) -> Result<Self> {
        if !(unit_time > 0.0 && unit_time.is_finite()) {
            return Err(DdError::InvalidParameter(format!(
                "unit time must be positive (got {unit_time})"
            )));
        }
        protocol.validate_iterations(iterations)?;
        Ok(PulseSchedule {
            fractions: protocol.unit_fractions(),
            unit_time,
            iterations,
            protocol,
        })
    }

    /// Pulse positions over the whole `N·t` window as fractions of it.
    pub fn full_fractions(&self) -> Vec<f64> {
        iterated_fractions(&self.fractions, self.iterations)
    }

    pub fn total_time(&self) -> f64 {
        self.unit_time * self.iterations as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPair {
    pub u0: Unitary2,
    pub u1: Unitary2,
    pub total_time: f64,
}

impl BranchPair {
    pub fn identity() -> Self {
        BranchPair {
            u0: Unitary2::identity(),
            u1: Unitary2::identity(),
            total_time: 0.0,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        BranchPair {
            u0: self.u0.pow(n),
            u1: self.u1.pow(n),
            total_time: self.total_time * n as f64,
        }
    }

    /// `later · self`: run `self` first.
    pub fn then(&self, later: &BranchPair) -> Self {
        BranchPair {
            u0: later.u0 * self.u0,
            u1: later.u1 * self.u1,
            total_time: self.total_time + later.total_time,
        }
    }
}

/// Propagator of one pass over `fractions`, starting in `start_branch`.
pub fn unit_propagator(
    h: &BranchHamiltonians,
    fractions: &[f64],
    t: f64,
    start_branch: usize,
) -> Unitary2 {
    let mut u = Unitary2::identity();
    let mut branch = start_branch;
    let mut prev = 0.0;
    for &d in fractions.iter().chain(std::iter::once(&1.0)) {
        let dt = (d - prev) * t;
        let b = h.get(branch);
        let w = BranchHamiltonians::splitting(b);
        if w > 0.0 {
            u = su2_exp(*b, w * dt).expect("nonzero field") * u;
        }
        branch ^= 1;
        prev = d;
    }
    u
}

/// Branch pair of one admissible block: the unit itself for even pulse
/// counts, the doubled unit otherwise.
pub fn block_pair(h: &BranchHamiltonians, fractions: &[f64], t: f64) -> (BranchPair, u32) {
    let a = unit_propagator(h, fractions, t, 0);
    let b = unit_propagator(h, fractions, t, 1);
    if fractions.len().is_multiple_of(2) {
        (
            BranchPair {
                u0: a,
                u1: b,
                total_time: t,
            },
            1,
        )
    } else {
        (
            BranchPair {
                u0: b * a,
                u1: a * b,
                total_time: 2.0 * t,
            },
            2,
        )
    }
}

fn repeated(h: &BranchHamiltonians, fractions: &[f64], t: f64, n: u32) -> BranchPair {
    if n == 0 {
        return BranchPair::identity();
    }
    let (block, per) = block_pair(h, fractions, t);
    block.pow(n / per)
}

/// `U = U_udd^{N_udd} · U_cpmg^{N_cpmg}`, each block at its own unit time.
pub fn hybrid_evolution(
    p: &HyperfineParams,
    f: &FieldConfig,
    order: u32,
    t_cpmg: f64,
    n_cpmg: u32,
    t_udd: f64,
    n_udd: u32,
) -> Result<BranchPair> {
    if order == 0 {
        return Err(DdError::InvalidParameter(
            "UDD order must be positive".into(),
        ));
    }
    if order % 2 == 1 && n_udd % 2 == 1 {
        return Err(DdError::OddUddIteration(n_udd));
    }
    for t in [t_cpmg, t_udd] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(DdError::InvalidParameter(format!(
                "unit time must be positive (got {t})"
            )));
        }
    }
    let h = branch_hamiltonians(p, f);
    let c = repeated(&h, &[0.25, 0.75], t_cpmg, n_cpmg);
    let u = repeated(&h, &udd_fractions(order), t_udd, n_udd);
    Ok(c.then(&u))
}

/// Exact `(u0, u1)` after `N` units of `protocol` with unit time `t`.
///
/// For a hybrid tag both blocks share `t` and `N` repeats the whole
/// composite block.
pub fn conditional_evolution(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    t: f64,
    n: u32,
) -> Result<BranchPair> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(DdError::InvalidParameter(format!(
            "unit time must be positive (got {t})"
        )));
    }
    protocol.validate_iterations(n)?;
    match protocol {
        Protocol::Hybrid {
            n_cpmg,
            order,
            n_udd,
        } => Ok(hybrid_evolution(p, f, order, t, n_cpmg, t, n_udd)?.pow(n)),
        _ => {
            let h = branch_hamiltonians(p, f);
            Ok(repeated(&h, &protocol.unit_fractions(), t, n))
        }
    }
}
