//! Resonance conditions: closed-form seeds, numeric refinement, sweeps and dip widths.
//!
//! All analytic times use `D = 2ω_L − A∥` and angles `W = ω_L − A∥`.
//! Analytic angles are folded into `[0, 2π]` (`φ > 2π → 4π − φ`,
//! `φ < 0 → −φ`) so they compare directly with the decomposed angles.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::error::{DdError, Result};
use crate::exec::Exec;
use crate::optimize::{argmin, bisect, golden_section, linspace};
use crate::sequence::{conditional_evolution, Protocol};
use crate::spin::{FieldConfig, HyperfineParams};
use crate::su2::{dot3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResonanceKind {
    /// `n0·n1 = −1`; for UDD4 this is the first set.
    Conditional,
    /// Common axis along x.
    Unconditional,
    /// Second conditional set of UDD4, at twice the CPMG time.
    Udd4Set2,
}

impl fmt::Display for ResonanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResonanceKind::Conditional => "conditional",
            ResonanceKind::Unconditional => "unconditional",
            ResonanceKind::Udd4Set2 => "udd4-set2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonancePoint {
    pub protocol: Protocol,
    pub order_k: u32,
    pub kind: ResonanceKind,
    /// Closed-form time, or the numeric seed when no closed form exists.
    pub t_analytic: f64,
    /// `None` for protocols without a closed form (UDD5 and up, hybrids).
    pub phi_analytic: Option<f64>,
    pub t_refined: Option<f64>,
    pub phi_refined: Option<f64>,
    pub dot_refined: Option<f64>,
    /// `ω_L < 2·max(|A∥|, A⊥)`: the closed forms are unreliable.
    pub weak_field: bool,
}

impl ResonancePoint {
    /// Refined time if available, else the seed.
    pub fn best_time(&self) -> f64 {
        self.t_refined.unwrap_or(self.t_analytic)
    }
}

/// Axes and shared angle of the branch pair at one unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSample {
    pub t: f64,
    pub dot: f64,
    /// Rotation angle of `u0`.
    pub phi: f64,
    /// Rotation angle of `u1`; equal to `phi` except for even UDD orders ≥ 4
    /// away from the strong-field limit.
    pub phi1: f64,
    pub n0: Vec3,
    pub n1: Vec3,
}

/// Never fails on degenerate angles; both axes then read +z and `dot = 1`.
pub fn sample_axes(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    t: f64,
    n: u32,
) -> Result<AxisSample> {
    let bp = conditional_evolution(p, f, protocol, t, n)?;
    let r0 = bp.u0.rotation();
    let r1 = bp.u1.rotation();
    Ok(AxisSample {
        t,
        dot: dot3(&r0.axis, &r1.axis).clamp(-1.0, 1.0),
        phi: r0.angle,
        phi1: r1.angle,
        n0: r0.axis,
        n1: r1.axis,
    })
}

fn fold_angle(phi: f64) -> f64 {
    let tau = 2.0 * PI;
    let mut x = phi.rem_euclid(2.0 * tau);
    if x > tau {
        x = 2.0 * tau - x;
    }
    x
}

/// Closed-form resonance of order `k` (CPMG, UDD2, UDD3, UDD4).
pub fn analytic_resonance(
    protocol: Protocol,
    kind: ResonanceKind,
    k: u32,
    p: &HyperfineParams,
    f: &FieldConfig,
) -> Result<ResonancePoint> {
    if k == 0 {
        return Err(DdError::InvalidParameter(
            "resonance order k must be >= 1".into(),
        ));
    }
    let wl = f.omega_l;
    let (apar, aperp) = (p.a_par, p.a_perp);
    let w = wl - apar;
    if w <= 0.0 {
        return Err(DdError::InvalidParameter(
            "closed-form resonances need omega_L > A_par".into(),
        ));
    }
    let d = 2.0 * wl - apar;
    let kf = k as f64;
    let odd = 2.0 * kf - 1.0;
    let unsupported = || {
        Err(DdError::UnsupportedResonance(format!(
            "no closed form for {protocol} {kind}"
        )))
    };
    let (t, phi) = match (protocol, kind) {
        (Protocol::Cpmg | Protocol::Udd(2), ResonanceKind::Conditional) => {
            (4.0 * odd * PI / d, 2.0 * PI - 2.0 * aperp / w)
        }
        (Protocol::Cpmg | Protocol::Udd(2), ResonanceKind::Unconditional) => {
            (8.0 * kf * PI / d, kf * PI * aperp * apar / (w * w))
        }
        (Protocol::Udd(3), ResonanceKind::Conditional) => (
            2.0 * odd * PI / d,
            2.0 * PI - 2.0 * aperp * (1.0 - 2.0 * (odd * PI / (2.0 * SQRT_2)).cos()) / w,
        ),
        (Protocol::Udd(3), ResonanceKind::Unconditional) => {
            let s2 = SQRT_2;
            let a = PI
                * PI
                * apar
                * apar
                * kf
                * kf
                * ((s2 * PI * kf).cos() + 2.0 * s2 * (PI * kf / s2).cos() + 2.0);
            let b = (2.0 * s2 + 3.0)
                * aperp
                * aperp
                * (PI * kf + (s2 * PI * kf).sin() - 2.0 * (PI * kf / s2).sin()).powi(2);
            (
                4.0 * kf * PI / d,
                2.0 * aperp / ((2.0 * s2 + 2.0) * w * w) * (a + b).max(0.0).sqrt(),
            )
        }
        (Protocol::Udd(4), ResonanceKind::Conditional) => (
            4.0 * odd * PI / d,
            2.0 * PI - 2.0 * SQRT_2 * aperp * (odd * 5f64.sqrt() * PI / 4.0).cos() / w,
        ),
        (Protocol::Udd(4), ResonanceKind::Udd4Set2) => (
            8.0 * odd * PI / d,
            4.0 * aperp * (odd * 5f64.sqrt() * PI / 2.0).cos() / w,
        ),
        (Protocol::Udd(4), ResonanceKind::Unconditional) => {
            let c = (kf * 5f64.sqrt() * PI).cos();
            (
                16.0 * kf * PI / d,
                2.0 * kf * aperp * PI * (aperp * aperp + apar * apar * c * c).sqrt() / (w * w),
            )
        }
        _ => return unsupported(),
    };
    Ok(ResonancePoint {
        protocol,
        order_k: k,
        kind,
        t_analytic: t,
        phi_analytic: Some(fold_angle(phi)),
        t_refined: None,
        phi_refined: None,
        dot_refined: None,
        weak_field: f.is_weak_for(p),
    })
}

/// Conditional seed for any protocol: the closed form when one exists,
/// otherwise the CPMG time `4(2k−1)π/D` (even pulse counts and hybrids)
/// or `2(2k−1)π/D` (odd pulse counts).
pub fn seed_point(
    protocol: Protocol,
    k: u32,
    p: &HyperfineParams,
    f: &FieldConfig,
) -> Result<ResonancePoint> {
    match analytic_resonance(protocol, ResonanceKind::Conditional, k, p, f) {
        Ok(pt) => Ok(pt),
        Err(DdError::UnsupportedResonance(_)) => {
            if k == 0 {
                return Err(DdError::InvalidParameter(
                    "resonance order k must be >= 1".into(),
                ));
            }
            let d = 2.0 * f.omega_l - p.a_par;
            if d <= 0.0 {
                return Err(DdError::InvalidParameter(
                    "2 omega_L - A_par must be positive".into(),
                ));
            }
            let base = match protocol {
                Protocol::Udd(n) if n % 2 == 1 => 2.0,
                _ => 4.0,
            };
            Ok(ResonancePoint {
                protocol,
                order_k: k,
                kind: ResonanceKind::Conditional,
                t_analytic: base * (2.0 * k as f64 - 1.0) * PI / d,
                phi_analytic: None,
                t_refined: None,
                phi_refined: None,
                dot_refined: None,
                weak_field: f.is_weak_for(p),
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Half-width of the search window as a fraction of the seed time.
    pub window: f64,
    pub grid_points: usize,
    /// Relative tolerance of the golden-section stage.
    pub tol_rel: f64,
    pub exec: Exec,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            window: 0.02,
            grid_points: 2001,
            tol_rel: 1e-10,
            exec: Exec::default(),
        }
    }
}

/// Grid scan over `t_analytic·(1 ± window)` followed by golden section.
///
/// Conditional kinds minimize `n0·n1`; the unconditional kind maximizes
/// the mean x-projection `|n0_x + n1_x|/2`.
pub fn refine_resonance(
    point: &ResonancePoint,
    p: &HyperfineParams,
    f: &FieldConfig,
    n_probe: u32,
    opts: &RefineOptions,
) -> Result<ResonancePoint> {
    point.protocol.validate_iterations(n_probe)?;
    if !(opts.window > 0.0 && opts.window < 1.0) || opts.grid_points < 3 {
        return Err(DdError::InvalidParameter(
            "refinement window must be in (0, 1) with >= 3 points".into(),
        ));
    }
    let unconditional = point.kind == ResonanceKind::Unconditional;
    if !unconditional && p.a_perp == 0.0 {
        return Err(DdError::NoResonanceInWindow);
    }
    let objective = |t: f64| -> f64 {
        match sample_axes(p, f, point.protocol, t, n_probe) {
            Ok(s) if unconditional => -0.5 * (s.n0[0] + s.n1[0]).abs(),
            Ok(s) => s.dot,
            Err(_) => f64::INFINITY,
        }
    };
    let t0 = point.t_analytic;
    let grid = linspace(
        t0 * (1.0 - opts.window),
        t0 * (1.0 + opts.window),
        opts.grid_points,
    );
    let vals = opts.exec.map(&grid, |&t| objective(t));
    let i = argmin(&vals).ok_or(DdError::NoResonanceInWindow)?;
    let i = i.clamp(1, grid.len() - 2);
    let (t_best, _) = golden_section(objective, grid[i - 1], grid[i + 1], opts.tol_rel);
    // golden section only samples interior points; keep the grid winner if it was better
    let t_best = if objective(t_best) <= vals[i] {
        t_best
    } else {
        grid[i]
    };
    let s = sample_axes(p, f, point.protocol, t_best, n_probe)?;
    let found = if unconditional {
        0.5 * (s.n0[0] + s.n1[0]).abs() >= 0.5
    } else {
        s.dot <= 0.0
    };
    if !found {
        return Err(DdError::NoResonanceInWindow);
    }
    Ok(ResonancePoint {
        t_refined: Some(t_best),
        phi_refined: Some(s.phi),
        dot_refined: Some(s.dot),
        ..point.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub dot: f64,
    pub phi: f64,
    pub n0x: f64,
    pub n1x: f64,
}

pub fn sweep(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    n: u32,
    t_range: (f64, f64),
    points: usize,
    exec: Exec,
) -> Result<Vec<SweepRow>> {
    protocol.validate_iterations(n)?;
    let (a, b) = t_range;
    if !(a > 0.0 && b > a) || points < 2 {
        return Err(DdError::InvalidParameter(
            "sweep needs 0 < t_min < t_max and >= 2 points".into(),
        ));
    }
    let grid = linspace(a, b, points);
    exec.map(&grid, |&t| {
        sample_axes(p, f, protocol, t, n).map(|s| SweepRow {
            t,
            dot: s.dot,
            phi: s.phi,
            n0x: s.n0[0],
            n1x: s.n1[0],
        })
    })
    .into_iter()
    .collect()
}

/// Width of the `n0·n1 ≤ −0.5` region around `t_ref`.
pub fn dip_fwhm(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    n: u32,
    t_ref: f64,
) -> Result<f64> {
    let g = |t: f64| {
        sample_axes(p, f, protocol, t, n)
            .map(|s| s.dot + 0.5)
            .unwrap_or(1.5)
    };
    let g0 = g(t_ref);
    if g0 >= 0.0 {
        return Err(DdError::DipTooShallow(g0 - 0.5));
    }
    let tol = (1e-9f64).min(1e-7 * t_ref);
    let edge = |dir: f64| -> Result<f64> {
        let mut inside = t_ref;
        let mut h = 1e-6 * t_ref;
        while h < t_ref {
            let out = t_ref + dir * h;
            if g(out) >= 0.0 {
                return Ok(bisect(g, inside, out, tol));
            }
            inside = out;
            h *= 2.0;
        }
        Err(DdError::InvalidParameter(
            "dip does not close within the unit time".into(),
        ))
    };
    Ok(edge(1.0)? - edge(-1.0)?)
}

/// FWHM of the order-`k` conditional dip after refinement.
pub fn selectivity_fwhm(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: Protocol,
    k: u32,
    n: u32,
    opts: &RefineOptions,
) -> Result<f64> {
    if p.a_perp == 0.0 {
        return Err(DdError::DipTooShallow(1.0));
    }
    let seed = seed_point(protocol, k, p, f)?;
    let pt = match refine_resonance(&seed, p, f, n, opts) {
        Ok(pt) => pt,
        Err(DdError::NoResonanceInWindow) => return Err(DdError::DipTooShallow(1.0)),
        Err(e) => return Err(e),
    };
    dip_fwhm(p, f, protocol, n, pt.best_time())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessTarget {
    pub protocol: Protocol,
    pub kind: ResonanceKind,
    pub k: u32,
}

impl fmt::Display for RobustnessTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ResonanceKind::Udd4Set2 => write!(f, "{}_set2_k{}", self.protocol, self.k),
            _ => write!(f, "{}_k{}", self.protocol, self.k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCurve {
    pub target: RobustnessTarget,
    pub t_ref: f64,
    pub fwhm: f64,
    pub dt: Vec<f64>,
    pub dot: Vec<f64>,
}

/// `n0·n1` against a timing error `Δt ∈ [−half_width, half_width]` around each refined resonance.
pub fn timing_robustness(
    p: &HyperfineParams,
    f: &FieldConfig,
    targets: &[RobustnessTarget],
    half_width: f64,
    points: usize,
    opts: &RefineOptions,
) -> Result<Vec<RobustnessCurve>> {
    if !(half_width > 0.0) || points < 2 {
        return Err(DdError::InvalidParameter(
            "robustness grid needs a positive width and >= 2 points".into(),
        ));
    }
    let dts = linspace(-half_width, half_width, points);
    targets
        .iter()
        .map(|tg| {
            if tg.kind == ResonanceKind::Unconditional {
                return Err(DdError::UnsupportedResonance(
                    "timing robustness is defined for conditional dips".into(),
                ));
            }
            let seed = match tg.kind {
                ResonanceKind::Udd4Set2 => analytic_resonance(tg.protocol, tg.kind, tg.k, p, f)?,
                _ => seed_point(tg.protocol, tg.k, p, f)?,
            };
            let n = tg.protocol.min_iterations();
            let t_ref = refine_resonance(&seed, p, f, n, opts)?.best_time();
            let dot = opts
                .exec
                .map(&dts, |&dt| {
                    sample_axes(p, f, tg.protocol, t_ref + dt, n).map(|s| s.dot)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            Ok(RobustnessCurve {
                target: *tg,
                t_ref,
                fwhm: dip_fwhm(p, f, tg.protocol, n, t_ref)?,
                dt: dts.clone(),
                dot,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::khz_to_rad;
    use approx::assert_abs_diff_eq;

    fn fig2() -> (HyperfineParams, FieldConfig) {
        (
            HyperfineParams::from_khz("c", 30.6, 25.7).unwrap(),
            FieldConfig::from_khz(314.0).unwrap(),
        )
    }

    fn fig3() -> (HyperfineParams, FieldConfig) {
        let wl = khz_to_rad(1000.0);
        (
            HyperfineParams::new("c", 0.1 * wl, 0.1 * wl).unwrap(),
            FieldConfig::new(wl).unwrap(),
        )
    }

    #[test]
    fn cpmg_closed_forms_fig2() {
        let (p, f) = fig2();
        let c = analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        assert_abs_diff_eq!(c.t_analytic * 1e6, 3.348, epsilon = 1e-3);
        let eps = 2.0 * 25.7 / (314.0 - 30.6);
        assert_abs_diff_eq!(c.phi_analytic.unwrap(), 2.0 * PI - eps, epsilon = 1e-12);
        assert_abs_diff_eq!(eps, 0.1814, epsilon = 1e-4);
        let u =
            analytic_resonance(Protocol::Cpmg, ResonanceKind::Unconditional, 1, &p, &f).unwrap();
        assert_abs_diff_eq!(u.t_analytic * 1e6, 6.70, epsilon = 5e-3);
        assert_abs_diff_eq!(u.phi_analytic.unwrap(), 0.0308, epsilon = 1e-4);
        assert!(!c.weak_field);
    }

    #[test]
    fn udd4_second_set_is_twice_cpmg() {
        let (p, f) = fig2();
        let c = analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        let s2 = analytic_resonance(Protocol::Udd(4), ResonanceKind::Udd4Set2, 1, &p, &f).unwrap();
        assert_eq!(s2.t_analytic, 2.0 * c.t_analytic);
    }

    #[test]
    fn unsupported_pairs() {
        let (p, f) = fig2();
        for (proto, kind) in [
            (Protocol::Cpmg, ResonanceKind::Udd4Set2),
            (Protocol::Udd(6), ResonanceKind::Conditional),
            (Protocol::Udd(5), ResonanceKind::Unconditional),
        ] {
            assert!(matches!(
                analytic_resonance(proto, kind, 1, &p, &f),
                Err(DdError::UnsupportedResonance(_))
            ));
        }
        let s = seed_point(Protocol::Udd(6), 2, &p, &f).unwrap();
        assert!(s.phi_analytic.is_none());
    }

    #[test]
    fn weak_field_is_flagged_not_rejected() {
        let p = HyperfineParams::from_khz("w", 170.0, 70.0).unwrap();
        let f = FieldConfig::from_khz(300.0).unwrap();
        let r = analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        assert!(r.weak_field);
    }

    #[test]
    fn fold_branch() {
        assert_abs_diff_eq!(fold_angle(2.0 * PI + 0.1), 2.0 * PI - 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fold_angle(-0.2), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fold_angle(1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn refine_fig2_first_dip() {
        let (p, f) = fig2();
        let seed =
            analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        let r = refine_resonance(&seed, &p, &f, 1, &RefineOptions::default()).unwrap();
        assert!(r.dot_refined.unwrap() <= -0.999);
        let rel = (r.t_refined.unwrap() - seed.t_analytic).abs() / seed.t_analytic;
        assert!(rel < 0.02);
    }

    #[test]
    fn refine_without_transverse_coupling_fails() {
        let p = HyperfineParams::from_khz("z", 30.6, 0.0).unwrap();
        let f = FieldConfig::from_khz(314.0).unwrap();
        let seed =
            analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        assert_eq!(
            refine_resonance(&seed, &p, &f, 1, &RefineOptions::default()),
            Err(DdError::NoResonanceInWindow)
        );
        assert!(matches!(
            selectivity_fwhm(&p, &f, Protocol::Cpmg, 1, 1, &RefineOptions::default()),
            Err(DdError::DipTooShallow(_))
        ));
    }

    #[test]
    fn strong_field_convergence() {
        let wl = khz_to_rad(1000.0);
        let p = HyperfineParams::new("s", wl / 100.0, wl / 100.0).unwrap();
        let f = FieldConfig::new(wl).unwrap();
        let seed =
            analytic_resonance(Protocol::Cpmg, ResonanceKind::Conditional, 1, &p, &f).unwrap();
        let r = refine_resonance(&seed, &p, &f, 1, &RefineOptions::default()).unwrap();
        assert!((r.t_refined.unwrap() - seed.t_analytic).abs() / seed.t_analytic < 1e-3);
    }

    #[test]
    fn sweep_plateau_and_udd2_identity() {
        let (p, f) = fig2();
        let a = sweep(
            &p,
            &f,
            Protocol::Cpmg,
            1,
            (0.2e-6, 15e-6),
            301,
            Exec::Sequential,
        )
        .unwrap();
        let b = sweep(
            &p,
            &f,
            Protocol::Udd(2),
            1,
            (0.2e-6, 15e-6),
            301,
            Exec::Parallel,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.dot - y.dot).abs() <= 1e-10);
            assert!((x.phi - y.phi).abs() <= 1e-10);
        }
        let min = a.iter().map(|r| r.dot).fold(f64::INFINITY, f64::min);
        assert!(min < -0.5);
        // far from any resonance the axes stay parallel
        let plateau = sample_axes(&p, &f, Protocol::Cpmg, 0.05e-6, 1).unwrap();
        assert!((plateau.dot - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fwhm_ordering_fig3() {
        let (p, f) = fig3();
        let o = RefineOptions::default();
        let c = selectivity_fwhm(&p, &f, Protocol::Cpmg, 1, 1, &o).unwrap();
        let u4 = selectivity_fwhm(&p, &f, Protocol::Udd(4), 1, 1, &o).unwrap();
        let u6 = selectivity_fwhm(&p, &f, Protocol::Udd(6), 1, 1, &o).unwrap();
        assert!(u6 < u4 && u4 < c, "{u6} {u4} {c}");
    }

    #[test]
    fn fwhm_does_not_depend_on_n() {
        // U^N shares the rotation axes of U, so the dot curve is unchanged.
        let (p, f) = fig3();
        let o = RefineOptions::default();
        let w1 = selectivity_fwhm(&p, &f, Protocol::Cpmg, 1, 1, &o).unwrap();
        for n in [2, 4, 8] {
            let w = selectivity_fwhm(&p, &f, Protocol::Cpmg, 1, n, &o).unwrap();
            assert!((w - w1).abs() / w1 < 1e-4, "N = {n}: {w} vs {w1}");
        }
    }

    #[test]
    fn robustness_anchor_and_symmetry() {
        let p = HyperfineParams::from_khz("r", 25.0, 25.0).unwrap();
        let f = FieldConfig::from_khz(5000.0).unwrap();
        let targets = [
            RobustnessTarget {
                protocol: Protocol::Cpmg,
                kind: ResonanceKind::Conditional,
                k: 1,
            },
            RobustnessTarget {
                protocol: Protocol::Udd(4),
                kind: ResonanceKind::Udd4Set2,
                k: 1,
            },
        ];
        let curves =
            timing_robustness(&p, &f, &targets, 2e-9, 41, &RefineOptions::default()).unwrap();
        for c in &curves {
            assert!(c.dot[20] <= -0.999);
            for i in 0..5 {
                let (l, r) = (c.dot[20 - i - 1] + 1.0, c.dot[20 + i + 1] + 1.0);
                assert!(
                    (l - r).abs() <= 0.05 * l.max(r) + 1e-9,
                    "{} {l} {r}",
                    c.target
                );
            }
        }
        assert!(curves[1].fwhm > curves[0].fwhm);
    }
}
