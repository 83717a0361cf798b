//! Electron coherence `Px = (1 + L)/2` for registers of independent nuclei.
//!
//! With every nucleus maximally mixed and no nuclear-nuclear coupling the
//! coherence factorizes, `L = ∏_k M_k` with `M = Re Tr(u0 u1†)/2`.

use std::collections::HashSet;

use crate::error::{DdError, Result};
use crate::exec::Exec;
use crate::optimize::linspace;
use crate::resonance::{refine_resonance, seed_point, RefineOptions};
use crate::sequence::{conditional_evolution, BranchPair, Protocol};
use crate::spin::{FieldConfig, HyperfineParams};

pub fn single_spin_m(bp: &BranchPair) -> f64 {
    0.5 * (bp.u0 * bp.u1.adjoint()).trace()
}

/// `1 − (1 − n0·n1) sin²(φ/2)`; equals [`single_spin_m`] whenever both
/// branches share the rotation angle.
pub fn m_from_axes(dot: f64, phi: f64) -> f64 {
    1.0 - (1.0 - dot) * (0.5 * phi).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinRegister {
    pub spins: Vec<HyperfineParams>,
    pub field: FieldConfig,
}

impl SpinRegister {
    pub fn new(spins: Vec<HyperfineParams>, field: FieldConfig) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &spins {
            if !seen.insert(s.label.as_str()) {
                return Err(DdError::InvalidParameter(format!(
                    "duplicate spin label `{}`",
                    s.label
                )));
            }
        }
        Ok(SpinRegister { spins, field })
    }

    pub fn get(&self, label: &str) -> Option<&HyperfineParams> {
        self.spins.iter().find(|s| s.label == label)
    }
}

/// `Px` of the electron with only `p` present.
pub fn spin_px(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    t: f64,
    n: u32,
) -> Result<f64> {
    let bp = conditional_evolution(p, f, protocol, t, n)?;
    Ok(0.5 * (1.0 + single_spin_m(&bp)))
}

pub fn register_px(reg: &SpinRegister, protocol: Protocol, t: f64, n: u32) -> Result<f64> {
    protocol.validate_iterations(n)?;
    let mut l = 1.0;
    for s in &reg.spins {
        l *= single_spin_m(&conditional_evolution(s, &reg.field, protocol, t, n)?);
    }
    Ok(0.5 * (1.0 + l))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NSchedule {
    Fixed(u32),
    /// N bringing the target spin's `Px` closest to 0.5 at its own refined resonance.
    EntangleMaximal {
        target: String,
        n_max: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    pub t_grid: Vec<f64>,
    pub px: Vec<f64>,
    pub per_spin_px: Vec<(String, Vec<f64>)>,
    pub iterations: u32,
    /// Refined resonance of the entangled spin, when one was computed.
    pub t_resonance: Option<f64>,
}

/// Refined order-`k` resonance of `p` and the first admissible `N` at which
/// `|Px − 0.5|` reaches a local minimum, i.e. the shortest sequence that
/// entangles maximally. Falls back to the global minimum below `n_max`.
pub fn entangle_maximal_n(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    k: u32,
    n_max: u32,
    opts: &RefineOptions,
) -> Result<(u32, f64)> {
    let seed = seed_point(protocol, k, p, f)?;
    let step = protocol.min_iterations();
    let t = refine_resonance(&seed, p, f, step, opts)?.best_time();
    let ns: Vec<u32> = (1..=n_max / step).map(|i| i * step).collect();
    if ns.is_empty() {
        return Err(DdError::InvalidParameter(
            "n_max admits no iteration count".into(),
        ));
    }
    let dist = opts
        .exec
        .map(&ns, |&n| {
            spin_px(p, f, protocol, t, n).map(|px| (px - 0.5).abs())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let first_dip = (0..dist.len().saturating_sub(1))
        .find(|&i| (i == 0 || dist[i] <= dist[i - 1]) && dist[i] < dist[i + 1]);
    let best = first_dip.unwrap_or_else(|| crate::optimize::argmin(&dist).unwrap_or(0));
    Ok((ns[best], t))
}

/// Joint and per-spin `Px` over a grid of unit times.
pub fn selectivity_scan(
    reg: &SpinRegister,
    protocol: Protocol,
    k: u32,
    t_range: (f64, f64),
    points: usize,
    schedule: &NSchedule,
    opts: &RefineOptions,
) -> Result<CoherenceCurve> {
    let (a, b) = t_range;
    if !(a > 0.0 && b > a) || points < 2 {
        return Err(DdError::InvalidParameter(
            "scan needs 0 < t_min < t_max and >= 2 points".into(),
        ));
    }
    let (n, t_res) = match schedule {
        NSchedule::Fixed(n) => (*n, None),
        NSchedule::EntangleMaximal { target, n_max } => {
            let p = reg
                .get(target)
                .ok_or_else(|| DdError::InvalidParameter(format!("no spin labelled `{target}`")))?;
            let (n, t) = entangle_maximal_n(p, &reg.field, protocol, k, *n_max, opts)?;
            (n, Some(t))
        }
    };
    protocol.validate_iterations(n)?;
    let grid = linspace(a, b, points);
    let rows = opts
        .exec
        .map(&grid, |&t| {
            reg.spins
                .iter()
                .map(|s| {
                    conditional_evolution(s, &reg.field, protocol, t, n)
                        .map(|bp| single_spin_m(&bp))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let px = rows
        .iter()
        .map(|ms| 0.5 * (1.0 + ms.iter().product::<f64>()))
        .collect();
    let per_spin_px = reg
        .spins
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (
                s.label.clone(),
                rows.iter().map(|ms| 0.5 * (1.0 + ms[i])).collect(),
            )
        })
        .collect();
    Ok(CoherenceCurve {
        t_grid: grid,
        px,
        per_spin_px,
        iterations: n,
        t_resonance: t_res,
    })
}

/// Convenience for sequential callers.
pub fn selectivity_scan_seq(
    reg: &SpinRegister,
    protocol: Protocol,
    k: u32,
    t_range: (f64, f64),
    points: usize,
    schedule: &NSchedule,
) -> Result<CoherenceCurve> {
    let opts = RefineOptions {
        exec: Exec::Sequential,
        ..RefineOptions::default()
    };
    selectivity_scan(reg, protocol, k, t_range, points, schedule, &opts)
}
