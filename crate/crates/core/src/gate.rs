//! Two-qubit gates from branch pairs, fidelity scoring and gate synthesis.
//!
//! Basis index of the 4×4 electron ⊗ nucleus operators is `2e + n`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{DdError, Result};
use crate::exec::Exec;
use crate::resonance::{
    analytic_resonance, refine_resonance, seed_point, RefineOptions, ResonanceKind,
};
use crate::sequence::{block_pair, conditional_evolution, udd_fractions, BranchPair, Protocol};
use crate::spin::{branch_hamiltonians, FieldConfig, HyperfineParams};
use crate::su2::{su2_exp, Unitary2};

pub type CMatrix = DMatrix<C64>;

/// Ties in fidelity closer than this go to the shorter gate.
pub const FIDELITY_TIE: f64 = 1e-9;

pub fn su2_matrix(u: &Unitary2) -> CMatrix {
    let e = u.entries();
    DMatrix::from_fn(2, 2, |i, j| e[i][j])
}

pub fn rx(theta: f64) -> Unitary2 {
    su2_exp([1.0, 0.0, 0.0], theta).expect("unit axis")
}

/// `[Tr(U†U) + |Tr(U0†U)|²] / (n(n+1))`.
pub fn average_fidelity(u: &CMatrix, target: &CMatrix) -> Result<f64> {
    if u.nrows() != u.ncols() || target.nrows() != target.ncols() {
        return Err(DdError::DimensionMismatch(u.nrows(), u.ncols()));
    }
    if u.nrows() != target.nrows() {
        return Err(DdError::DimensionMismatch(u.nrows(), target.nrows()));
    }
    let n = u.nrows() as f64;
    let uu = (u.adjoint() * u).trace().re;
    let overlap = (target.adjoint() * u).trace().norm_sqr();
    Ok(((uu + overlap) / (n * (n + 1.0))).clamp(0.0, 1.0))
}

/// `|0⟩⟨0| ⊗ u0 + |1⟩⟨1| ⊗ u1`.
pub fn two_qubit_gate(bp: &BranchPair) -> CMatrix {
    block_diag(&bp.u0, &bp.u1)
}

fn block_diag(a: &Unitary2, b: &Unitary2) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    let (ea, eb) = (a.entries(), b.entries());
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = ea[i][j];
            m[(2 + i, 2 + j)] = eb[i][j];
        }
    }
    m
}

/// `|0⟩⟨0| ⊗ Rx(θ) + |1⟩⟨1| ⊗ R−x(θ)`.
pub fn crx_target(theta: f64) -> CMatrix {
    block_diag(&rx(theta), &rx(-theta))
}

/// `1 ⊗ Rx(θ)`.
pub fn rx_unconditional_target(theta: f64) -> CMatrix {
    block_diag(&rx(theta), &rx(theta))
}

/// `e^{iπ/4} (Rz_e(π/2) ⊗ Rx_n(π/2)) · CNOT`.
pub fn decorated_cnot() -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let cnot = DMatrix::from_row_slice(4, 4, &[o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z]);
    let rz = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from_polar(1.0, -FRAC_PI_4),
            z,
            z,
            C64::from_polar(1.0, FRAC_PI_4),
        ],
    );
    let local = rz.kronecker(&su2_matrix(&rx(FRAC_PI_2)));
    (local * cnot) * C64::from_polar(1.0, FRAC_PI_4)
}

/// Frobenius distance to [`decorated_cnot`], minimized over a global phase:
/// `D² = ‖A‖² + ‖B‖² − 2|Tr(B†A)|`.
pub fn cnot_equivalence_check(crx: &CMatrix) -> Result<f64> {
    if crx.nrows() != 4 || crx.ncols() != 4 {
        return Err(DdError::DimensionMismatch(crx.nrows(), 4));
    }
    let b = decorated_cnot();
    let d2 = crx.norm_squared() + b.norm_squared() - 2.0 * (b.adjoint() * crx).trace().norm();
    Ok(d2.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthProtocol {
    Cpmg,
    /// CPMG block followed by UDD units of this order.
    Hybrid {
        order: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Crx,
    RxUnconditional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub refine: RefineOptions,
    /// Resonance order used for every block.
    pub k: u32,
    pub n_cap: u32,
    /// Upper end of the UDD iteration search.
    pub max_udd: u32,
    /// Half-width of the N search around the first-pass estimate.
    pub polish: u32,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            refine: RefineOptions::default(),
            k: 1,
            n_cap: 500,
            max_udd: 6,
            polish: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateFlags {
    pub low_fidelity: bool,
    pub n_cap_exceeded: bool,
    pub weak_field: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub kind: GateKind,
    pub protocol: Protocol,
    pub target_angle: f64,
    /// CPMG unit time.
    pub unit_time: f64,
    /// UDD unit time when a UDD block is present (each block sits at its own resonance).
    pub udd_unit_time: Option<f64>,
    pub n_cpmg: u32,
    pub n_udd: u32,
    pub udd_order: u32,
    pub total_time: f64,
    pub fidelity: f64,
    pub achieved_unitary: CMatrix,
    pub flags: GateFlags,
}

impl GateReport {
    pub const CSV_HEADER: [&'static str; 6] = [
        "protocol",
        "t_us",
        "n_cpmg",
        "n_udd",
        "total_time_us",
        "fidelity",
    ];

    pub fn protocol_label(&self) -> String {
        let base = match (self.n_udd, self.udd_order) {
            (_, 0) => "cpmg".to_string(),
            (_, n) => format!("hybrid-udd{n}"),
        };
        match self.kind {
            GateKind::Crx => base,
            GateKind::RxUnconditional => format!("rx-{base}"),
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        use crate::io::fmt_num;
        vec![
            self.protocol_label(),
            fmt_num(self.unit_time * 1e6),
            self.n_cpmg.to_string(),
            self.n_udd.to_string(),
            fmt_num(self.total_time * 1e6),
            fmt_num(self.fidelity),
        ]
    }

    /// Flat `key=value` lines.
    pub fn kv_record(&self) -> String {
        use crate::io::fmt_num;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "gate={}",
            match self.kind {
                GateKind::Crx => "crx",
                GateKind::RxUnconditional => "rx",
            }
        );
        let _ = writeln!(s, "protocol={}", self.protocol_label());
        let _ = writeln!(s, "target_angle_rad={}", fmt_num(self.target_angle));
        let _ = writeln!(s, "t_us={}", fmt_num(self.unit_time * 1e6));
        if let Some(tu) = self.udd_unit_time {
            let _ = writeln!(s, "t_udd_us={}", fmt_num(tu * 1e6));
        }
        let _ = writeln!(s, "n_cpmg={}", self.n_cpmg);
        let _ = writeln!(s, "n_udd={}", self.n_udd);
        let _ = writeln!(s, "udd_order={}", self.udd_order);
        let _ = writeln!(s, "total_time_us={}", fmt_num(self.total_time * 1e6));
        let _ = writeln!(s, "fidelity={}", fmt_num(self.fidelity));
        let _ = writeln!(s, "infidelity={}", fmt_num(1.0 - self.fidelity));
        let _ = writeln!(s, "flag_low_fidelity={}", self.flags.low_fidelity);
        let _ = writeln!(s, "flag_n_cap_exceeded={}", self.flags.n_cap_exceeded);
        let _ = writeln!(s, "flag_weak_field={}", self.flags.weak_field);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub n_cpmg: u32,
    pub n_udd: u32,
    pub total_time: f64,
    pub fidelity: f64,
}

/// Highest fidelity; near-ties go to the shortest gate, then fewer UDD units.
pub fn select_best(cands: &[Candidate]) -> Option<Candidate> {
    let fmax = cands
        .iter()
        .map(|c| c.fidelity)
        .fold(f64::NEG_INFINITY, f64::max);
    cands
        .iter()
        .filter(|c| c.fidelity >= fmax - FIDELITY_TIE)
        .min_by(|a, b| {
            a.total_time
                .total_cmp(&b.total_time)
                .then(a.n_udd.cmp(&b.n_udd))
                .then(a.n_cpmg.cmp(&b.n_cpmg))
        })
        .copied()
}

/// Signed effective rotation about +x: the angle wrapped into `(−π, π]`
/// times the sign of the axis x-component.
fn signed_angle(angle: f64, x_sign: f64) -> f64 {
    let w = if angle > PI { angle - 2.0 * PI } else { angle };
    w * if x_sign < 0.0 { -1.0 } else { 1.0 }
}

/// First-pass iteration estimate reaching `target` with steps of `theta`.
fn first_pass_n(theta: f64, target: f64) -> Option<u32> {
    if theta == 0.0 || !theta.is_finite() {
        return None;
    }
    let needed = if theta > 0.0 {
        target
    } else {
        2.0 * PI - target
    };
    Some((needed / theta.abs()).round().max(1.0).min(u32::MAX as f64) as u32)
}

/// Refined CPMG block at resonance order `k` and its first-pass N.
struct CpmgStage {
    t: f64,
    pair: BranchPair,
    n0: u32,
    capped: bool,
    weak: bool,
}

fn cpmg_stage(
    p: &HyperfineParams,
    f: &FieldConfig,
    target: f64,
    opts: &SynthOptions,
) -> Result<CpmgStage> {
    let seed = seed_point(Protocol::Cpmg, opts.k, p, f)?;
    let pt = refine_resonance(&seed, p, f, 1, &opts.refine)?;
    let t = pt.best_time();
    let pair = conditional_evolution(p, f, Protocol::Cpmg, t, 1)?;
    let r = pair.u0.rotation();
    let n0 = first_pass_n(signed_angle(r.angle, r.axis[0]), target).unwrap_or(opts.n_cap);
    Ok(CpmgStage {
        t,
        pair,
        n0: n0.min(opts.n_cap),
        capped: n0 > opts.n_cap,
        weak: seed.weak_field,
    })
}

fn check_target(target: f64) -> Result<()> {
    if !(0.0..2.0 * PI).contains(&target) {
        return Err(DdError::InvalidParameter(format!(
            "target angle must lie in [0, 2π) (got {target})"
        )));
    }
    Ok(())
}

/// Every `(N_cpmg, N_udd)` pair in the recipe's search space with its fidelity.
///
/// `N_cpmg` spans `N0 ± polish` around the first-pass CPMG estimate and
/// `N_udd` spans `0..=max_udd` (even values only for odd orders). Each UDD
/// unit runs at its own refined resonance time.
pub fn hybrid_candidates(
    p: &HyperfineParams,
    f: &FieldConfig,
    order: u32,
    target: f64,
    opts: &SynthOptions,
) -> Result<(Vec<Candidate>, f64, Option<f64>)> {
    let (cands, stage, udd) = hybrid_search(p, f, order, target, opts)?;
    Ok((cands, stage.t, udd.map(|u| u.0)))
}

#[allow(clippy::type_complexity)]
fn hybrid_search(
    p: &HyperfineParams,
    f: &FieldConfig,
    order: u32,
    target: f64,
    opts: &SynthOptions,
) -> Result<(Vec<Candidate>, CpmgStage, Option<(f64, BranchPair, u32)>)> {
    if p.a_perp == 0.0 {
        return Err(DdError::NoConditionalCoupling);
    }
    check_target(target)?;
    if order == 0 {
        return Err(DdError::InvalidParameter(
            "UDD order must be positive".into(),
        ));
    }
    let stage = cpmg_stage(p, f, target, opts)?;
    let udd = if opts.max_udd > 0 {
        let proto = Protocol::Udd(order);
        let seed = seed_point(proto, opts.k, p, f)?;
        let tu = refine_resonance(&seed, p, f, proto.min_iterations(), &opts.refine)?.best_time();
        let (block, per) = block_pair(&branch_hamiltonians(p, f), &udd_fractions(order), tu);
        Some((tu, block, per))
    } else {
        None
    };
    let lo = stage.n0.saturating_sub(opts.polish);
    let hi = stage.n0 + opts.polish;
    let step = if order % 2 == 1 { 2 } else { 1 };
    let mut grid = Vec::new();
    for nc in lo..=hi {
        let mut nu = 0;
        while nu <= opts.max_udd {
            if nc + nu > 0 && (nc > 0 || udd.is_some()) {
                grid.push((nc, nu));
            }
            nu += step;
            if udd.is_none() {
                break;
            }
        }
    }
    let tgt = crx_target(target);
    let cands = opts.refine.exec.map(&grid, |&(nc, nu)| {
        let mut pair = stage.pair.pow(nc);
        if let Some((_, block, per)) = &udd {
            pair = pair.then(&block.pow(nu / per));
        }
        Candidate {
            n_cpmg: nc,
            n_udd: nu,
            total_time: pair.total_time,
            fidelity: average_fidelity(&two_qubit_gate(&pair), &tgt).unwrap_or(0.0),
        }
    });
    Ok((cands, stage, udd))
}

/// Conditional `CRx(target)` from CPMG or a CPMG+UDD hybrid.
pub fn synthesize_crx(
    p: &HyperfineParams,
    f: &FieldConfig,
    protocol: SynthProtocol,
    target: f64,
    opts: &SynthOptions,
) -> Result<GateReport> {
    let (order, search) = match protocol {
        SynthProtocol::Cpmg => (
            2,
            SynthOptions {
                max_udd: 0,
                ..*opts
            },
        ),
        SynthProtocol::Hybrid { order } => (order, *opts),
    };
    let (cands, stage, udd) = hybrid_search(p, f, order, target, &search)?;
    let best = select_best(&cands).ok_or(DdError::NoResonanceInWindow)?;
    let mut pair = stage.pair.pow(best.n_cpmg);
    if let Some((_, block, per)) = &udd {
        pair = pair.then(&block.pow(best.n_udd / per));
    }
    let with_udd = matches!(protocol, SynthProtocol::Hybrid { .. });
    let report_protocol = if with_udd {
        Protocol::Hybrid {
            n_cpmg: best.n_cpmg,
            order,
            n_udd: best.n_udd,
        }
    } else {
        Protocol::Cpmg
    };
    Ok(GateReport {
        kind: GateKind::Crx,
        protocol: report_protocol,
        target_angle: target,
        unit_time: stage.t,
        udd_unit_time: if with_udd { udd.map(|u| u.0) } else { None },
        n_cpmg: best.n_cpmg,
        n_udd: best.n_udd,
        udd_order: if with_udd { order } else { 0 },
        total_time: pair.total_time,
        fidelity: best.fidelity,
        achieved_unitary: two_qubit_gate(&pair),
        flags: GateFlags {
            low_fidelity: best.fidelity < 0.5,
            n_cap_exceeded: stage.capped,
            weak_field: stage.weak,
        },
    })
}

/// Unconditional nuclear `Rx(target)` from CPMG at the off-resonant time `t̃_k`.
pub fn synthesize_rx_unconditional(
    p: &HyperfineParams,
    f: &FieldConfig,
    target: f64,
    opts: &SynthOptions,
) -> Result<GateReport> {
    if p.a_par == 0.0 || p.a_perp == 0.0 {
        return Err(DdError::VanishingUnconditionalAngle);
    }
    check_target(target)?;
    let seed = analytic_resonance(Protocol::Cpmg, ResonanceKind::Unconditional, opts.k, p, f)?;
    let tgt = rx_unconditional_target(target);
    let mut report = GateReport {
        kind: GateKind::RxUnconditional,
        protocol: Protocol::Cpmg,
        target_angle: target,
        unit_time: seed.t_analytic,
        udd_unit_time: None,
        n_cpmg: 0,
        n_udd: 0,
        udd_order: 0,
        total_time: 0.0,
        fidelity: 1.0,
        achieved_unitary: two_qubit_gate(&BranchPair::identity()),
        flags: GateFlags {
            weak_field: seed.weak_field,
            ..GateFlags::default()
        },
    };
    if target == 0.0 {
        return Ok(report);
    }
    let pt = refine_resonance(&seed, p, f, 1, &opts.refine)?;
    let t = pt.best_time();
    let unit = conditional_evolution(p, f, Protocol::Cpmg, t, 1)?;
    let (r0, r1) = (unit.u0.rotation(), unit.u1.rotation());
    let theta = signed_angle(r0.angle, r0.axis[0] + r1.axis[0]);
    let n0 = first_pass_n(theta, target).ok_or(DdError::VanishingUnconditionalAngle)?;
    let capped = n0 > opts.n_cap;
    let n0 = n0.min(opts.n_cap);
    let grid: Vec<u32> = (n0.saturating_sub(opts.polish).max(1)..=n0 + opts.polish).collect();
    let cands = opts.refine.exec.map(&grid, |&n| {
        let pair = unit.pow(n);
        Candidate {
            n_cpmg: n,
            n_udd: 0,
            total_time: pair.total_time,
            fidelity: average_fidelity(&two_qubit_gate(&pair), &tgt).unwrap_or(0.0),
        }
    });
    let best = select_best(&cands).ok_or(DdError::NoResonanceInWindow)?;
    let pair = unit.pow(best.n_cpmg);
    report.unit_time = t;
    report.n_cpmg = best.n_cpmg;
    report.total_time = pair.total_time;
    report.fidelity = best.fidelity;
    report.achieved_unitary = two_qubit_gate(&pair);
    report.flags.low_fidelity = best.fidelity < 0.5;
    report.flags.n_cap_exceeded = capped;
    Ok(report)
}

/// Default options with a caller-chosen grid backend.
pub fn synth_options(exec: Exec) -> SynthOptions {
    SynthOptions {
        refine: RefineOptions {
            exec,
            ..RefineOptions::default()
        },
        ..SynthOptions::default()
    }
}
