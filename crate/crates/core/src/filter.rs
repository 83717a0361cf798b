//! Decoupling filter functions and the coherence exponent χ(T).
//!
//! For `m` instantaneous π-pulses at fractions `δ_j` of the total time,
//!
//! ```text
//! F(x) = |1 + (−1)^{m+1} e^{ix} + 2 Σ_j (−1)^j e^{i δ_j x}|²,   x = ωT.
//! ```
//!
//! Direct summation loses everything below `x ≈ 1e-3` because `F` falls
//! like `x^{2n+2}` for UDDn. For `x ≤ 1` the sum is expanded in moments
//! `c_p = (−1)^{m+1} + 2 Σ_j (−1)^j δ_j^p`, and moments that cancel to
//! rounding level are set to exactly zero.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{DdError, Result};
use crate::exec::Exec;
use crate::sequence::{cpmg_fractions, hybrid_fractions, iterated_fractions, udd_fractions};
use crate::spin::KHZ;

const SERIES_TERMS: usize = 48;
const SERIES_LIMIT: f64 = 1.0;

/// A filter function with its low-frequency moments precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterFn {
    fractions: Vec<f64>,
    moments: Vec<f64>,
}

impl FilterFn {
    pub fn new(fractions: &[f64]) -> Self {
        let m = fractions.len();
        let end = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
        let mut moments = vec![0.0; SERIES_TERMS];
        let mut pow: Vec<f64> = vec![1.0; m];
        for slot in moments.iter_mut().skip(1) {
            let mut s = end;
            let mut scale = 1.0;
            for (j, (pw, d)) in pow.iter_mut().zip(fractions).enumerate() {
                *pw *= d;
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                s += 2.0 * sign * *pw;
                scale += 2.0 * pw.abs();
            }
            *slot = if s.abs() <= 32.0 * f64::EPSILON * (m as f64 + 1.0) * scale {
                0.0
            } else {
                s
            };
        }
        FilterFn {
            fractions: fractions.to_vec(),
            moments,
        }
    }

    pub fn pulses(&self) -> usize {
        self.fractions.len()
    }

    /// First moment `c_1`; `F(x)/x² → c_1²` as `x → 0`.
    pub fn first_moment(&self) -> f64 {
        self.moments[1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= SERIES_LIMIT {
            self.eval_series(x)
        } else {
            self.eval_direct(x)
        }
    }

    fn eval_direct(&self, x: f64) -> f64 {
        let m = self.fractions.len();
        let end = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
        let mut s = C64::new(1.0, 0.0) + C64::from_polar(end, x);
        for (j, d) in self.fractions.iter().enumerate() {
            let sign = if j % 2 == 0 { -2.0 } else { 2.0 };
            s += C64::from_polar(sign, d * x);
        }
        s.norm_sqr()
    }

    fn eval_series(&self, x: f64) -> f64 {
        // Σ_p (ix)^p c_p / p!
        let mut s = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for (p, c) in self.moments.iter().enumerate().skip(1) {
            term *= C64::new(0.0, x / p as f64);
            if *c != 0.0 {
                s += term * *c;
            }
        }
        s.norm_sqr()
    }
}

/// Squared modulus of the pulse sum at `x = ωT`.
pub fn filter_general(fractions: &[f64], omega_t: f64) -> f64 {
    FilterFn::new(fractions).eval(omega_t)
}

/// `16 sec²(x/4N) sin²(x/2) sin⁴(x/8N)`, continued through the removable poles.
pub fn filter_cpmg_closed(n: u32, omega_t: f64) -> f64 {
    if n == 0 {
        return filter_general(&[], omega_t);
    }
    let nf = n as f64;
    let c = (omega_t / (4.0 * nf)).cos();
    if c.abs() < 1e-6 {
        return filter_general(&cpmg_fractions(n).expect("n >= 1"), omega_t);
    }
    16.0 / (c * c) * (0.5 * omega_t).sin().powi(2) * (omega_t / (8.0 * nf)).sin().powi(4)
}

pub fn filter_uddn(order: u32, n: u32, omega_t: f64) -> f64 {
    filter_general(&iterated_fractions(&udd_fractions(order), n), omega_t)
}

pub fn filter_hybrid(n_cpmg: u32, order: u32, n_udd: u32, omega_t: f64) -> f64 {
    filter_general(&hybrid_fractions(n_cpmg, order, n_udd), omega_t)
}

/// `sin²(x/2)`. The empty pulse sum gives four times this; the free-decay
/// curve is kept in this normalization for comparison plots.
pub fn filter_fid(omega_t: f64) -> f64 {
    (0.5 * omega_t).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    Cpmg { n: u32 },
    Udd { order: u32, n: u32 },
    Hybrid { n_cpmg: u32, order: u32, n_udd: u32 },
    Fid,
    Custom(Vec<f64>),
}

impl SequenceSpec {
    pub fn fractions(&self) -> Vec<f64> {
        match self {
            SequenceSpec::Cpmg { n } => cpmg_fractions((*n).max(1)).expect("n >= 1"),
            SequenceSpec::Udd { order, n } => iterated_fractions(&udd_fractions(*order), *n),
            SequenceSpec::Hybrid {
                n_cpmg,
                order,
                n_udd,
            } => hybrid_fractions(*n_cpmg, *order, *n_udd),
            SequenceSpec::Fid => Vec::new(),
            SequenceSpec::Custom(v) => v.clone(),
        }
    }

    /// Evaluator honoring the closed forms for CPMG and free decay.
    pub fn evaluator(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            SequenceSpec::Cpmg { n } => {
                let n = *n;
                let general = FilterFn::new(&self.fractions());
                Box::new(move |x| {
                    if x.abs() <= SERIES_LIMIT {
                        general.eval(x)
                    } else {
                        filter_cpmg_closed(n, x)
                    }
                })
            }
            SequenceSpec::Fid => Box::new(filter_fid),
            _ => {
                let f = FilterFn::new(&self.fractions());
                Box::new(move |x| f.eval(x))
            }
        }
    }

    /// `F(x)/x²` as `x → 0`.
    pub fn low_limit(&self) -> f64 {
        match self {
            SequenceSpec::Fid => 0.25,
            _ => FilterFn::new(&self.fractions()).first_moment().powi(2),
        }
    }

    pub fn column(&self) -> &'static str {
        match self {
            SequenceSpec::Cpmg { .. } => "F_cpmg",
            SequenceSpec::Udd { .. } => "F_udd",
            SequenceSpec::Hybrid { .. } => "F_hybrid",
            SequenceSpec::Fid => "F_fid",
            SequenceSpec::Custom(_) => "F_custom",
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Cpmg { n } => write!(f, "cpmg:{n}"),
            SequenceSpec::Udd { order, n } => write!(f, "udd{order}:{n}"),
            SequenceSpec::Hybrid {
                n_cpmg,
                order,
                n_udd,
            } => write!(f, "hybrid:{n_cpmg}:{order}:{n_udd}"),
            SequenceSpec::Fid => write!(f, "fid"),
            SequenceSpec::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

impl FromStr for SequenceSpec {
    type Err = DdError;

    /// `cpmg:N`, `uddn:N`, `hybrid:N_cpmg:n:N_udd` or `fid`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || DdError::Parse(format!("bad sequence spec `{s}`"));
        let nums = |rest: &str| -> Result<Vec<u32>> {
            rest.split(':')
                .map(|x| x.parse::<u32>().map_err(|_| bad()))
                .collect()
        };
        if s == "fid" {
            return Ok(SequenceSpec::Fid);
        }
        if let Some(rest) = s.strip_prefix("cpmg:") {
            if let [n] = nums(rest)?[..] {
                if n >= 1 {
                    return Ok(SequenceSpec::Cpmg { n });
                }
            }
        } else if let Some(rest) = s.strip_prefix("hybrid:") {
            if let [n_cpmg, order, n_udd] = nums(rest)?[..] {
                if order >= 1 {
                    return Ok(SequenceSpec::Hybrid {
                        n_cpmg,
                        order,
                        n_udd,
                    });
                }
            }
        } else if let Some(rest) = s.strip_prefix("udd") {
            if let [order, n] = nums(rest)?[..] {
                if order >= 1 && n >= 1 {
                    return Ok(SequenceSpec::Udd { order, n });
                }
            }
        }
        Err(bad())
    }
}

/// Filter values at one absolute frequency `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterRow {
    pub omega: f64,
    pub cpmg: Option<f64>,
    pub udd: Option<f64>,
    pub hybrid: Option<f64>,
    pub fid: Option<f64>,
    /// Second listed sequence over the first.
    pub quotient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterTable {
    pub rows: Vec<FilterRow>,
}

/// Evaluates each `(sequence, T)` at `x = ωT` over a shared absolute
/// frequency grid. At most one sequence per family.
pub fn filter_table(
    entries: &[(SequenceSpec, f64)],
    omegas: &[f64],
    exec: Exec,
) -> Result<FilterTable> {
    if entries.is_empty() {
        return Err(DdError::InvalidParameter("no sequences to compare".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for (spec, t) in entries {
        if !(*t > 0.0) {
            return Err(DdError::InvalidParameter(format!(
                "total time for {spec} must be positive"
            )));
        }
        if matches!(spec, SequenceSpec::Custom(_)) || !seen.insert(spec.column()) {
            return Err(DdError::InvalidParameter(format!(
                "one sequence per column; `{spec}` clashes"
            )));
        }
    }
    let evals: Vec<_> = entries
        .iter()
        .map(|(s, t)| (s.column(), s.evaluator(), *t))
        .collect();
    let rows = exec.map(omegas, |&w| {
        let mut row = FilterRow {
            omega: w,
            ..FilterRow::default()
        };
        let vals: Vec<f64> = evals.iter().map(|(_, f, t)| f(w * t)).collect();
        for ((col, _, _), v) in evals.iter().zip(&vals) {
            let slot = match *col {
                "F_cpmg" => &mut row.cpmg,
                "F_udd" => &mut row.udd,
                "F_hybrid" => &mut row.hybrid,
                _ => &mut row.fid,
            };
            *slot = Some(*v);
        }
        if vals.len() >= 2 {
            row.quotient = Some(if vals[0] == 0.0 {
                f64::NAN
            } else {
                vals[1] / vals[0]
            });
        }
        row
    });
    Ok(FilterTable { rows })
}

/// Tabulated noise spectrum `S(ω)` on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    omega: Vec<f64>,
    s: Vec<f64>,
}

impl SpectrumTable {
    pub fn new(omega: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if omega.len() != s.len() || omega.is_empty() {
            return Err(DdError::Spectrum(
                "omega and S must be non-empty and of equal length".into(),
            ));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) || omega[0] < 0.0 {
            return Err(DdError::Spectrum(
                "omega must be non-negative and strictly increasing".into(),
            ));
        }
        if let Some(i) = s.iter().position(|v| !(*v >= 0.0)) {
            return Err(DdError::NegativeSpectrum(omega[i]));
        }
        Ok(SpectrumTable { omega, s })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    /// Linear interpolation; flat below the first node, zero above the last.
    pub fn at(&self, w: f64) -> f64 {
        let om = &self.omega;
        if w <= om[0] {
            return self.s[0];
        }
        if w > *om.last().unwrap() {
            return 0.0;
        }
        let i = om.partition_point(|&x| x < w);
        let (w0, w1) = (om[i - 1], om[i]);
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        s0 + (s1 - s0) * (w - w0) / (w1 - w0)
    }

    /// Grid density over the positive part of the table.
    pub fn points_per_decade(&self) -> f64 {
        let pos: Vec<f64> = self.omega.iter().copied().filter(|&w| w > 0.0).collect();
        if pos.len() < 2 {
            return 0.0;
        }
        let decades = (pos[pos.len() - 1] / pos[0]).log10();
        if decades <= 0.0 {
            return f64::INFINITY;
        }
        pos.len() as f64 / decades
    }

    /// Reads `omega_over_2pi_khz,s_value`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let h = rdr.headers()?.clone();
        if h.len() != 2 || &h[0] != "omega_over_2pi_khz" || &h[1] != "s_value" {
            return Err(DdError::Parse(
                "spectrum header must be `omega_over_2pi_khz,s_value`".into(),
            ));
        }
        let mut omega = Vec::new();
        let mut s = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| DdError::Parse(format!("spectrum row {}: {e}", i + 2)))
            };
            omega.push(num(0)? * KHZ);
            s.push(num(1)?);
        }
        Self::new(omega, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiResult {
    pub chi: f64,
    pub coherence: f64,
    /// The spectrum grid has fewer than 50 points per decade.
    pub coarse_grid: bool,
    pub nodes: usize,
}

/// Minimum points per decade before [`ChiResult::coarse_grid`] is raised.
pub const MIN_POINTS_PER_DECADE: f64 = 50.0;

/// `χ(T) = (2/π) ∫_0^{ω_max} S(ω) F(ωT)/ω² dω` by the trapezoid rule.
///
/// The spectrum grid is refined so no step exceeds `(2π/T)/32`, with extra
/// log-spaced nodes below the first tabulated frequency; the `ω = 0`
/// endpoint uses the analytic limit `S(0)·T²·c_1²`.
pub fn chi_integral(
    spectrum: &SpectrumTable,
    seq: &SequenceSpec,
    total_time: f64,
    omega_max: f64,
    exec: Exec,
) -> Result<ChiResult> {
    if !(total_time > 0.0) || !(omega_max > 0.0) {
        return Err(DdError::InvalidParameter(
            "T and omega_max must be positive".into(),
        ));
    }
    let h = 2.0 * PI / total_time / 32.0;
    let mut knots: Vec<f64> = spectrum
        .omega()
        .iter()
        .copied()
        .filter(|&w| w > 0.0 && w < omega_max)
        .collect();
    knots.push(omega_max);
    let first = knots[0];
    let mut nodes = vec![0.0];
    let lo = (first * 1e-6).max(1e-12);
    let n_log = 64;
    for i in 0..n_log {
        let w = lo * (first / lo).powf(i as f64 / n_log as f64);
        if w < first {
            nodes.push(w);
        }
    }
    let mut prev = *nodes.last().unwrap();
    for &k in &knots {
        let pieces = ((k - prev) / h).ceil().max(1.0) as usize;
        for j in 1..=pieces {
            nodes.push(prev + (k - prev) * j as f64 / pieces as f64);
        }
        prev = k;
    }
    let f = seq.evaluator();
    let s0 = spectrum.at(0.0);
    let limit = seq.low_limit() * total_time * total_time;
    let g = exec.map(&nodes, |&w| {
        if w == 0.0 {
            s0 * limit
        } else {
            spectrum.at(w) * f(w * total_time) / (w * w)
        }
    });
    let mut integral = 0.0;
    for i in 1..nodes.len() {
        integral += 0.5 * (g[i] + g[i - 1]) * (nodes[i] - nodes[i - 1]);
    }
    let chi = (2.0 / PI * integral).max(0.0);
    Ok(ChiResult {
        chi,
        coherence: (-chi).exp(),
        coarse_grid: spectrum.points_per_decade() < MIN_POINTS_PER_DECADE,
        nodes: nodes.len(),
    })
}
