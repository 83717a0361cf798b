//! CSV output. Times are written in μs, frequencies as ω/2π in kHz,
//! angles in radians, all numbers with 12 significant digits.

use std::io::Write;

use crate::coherence::CoherenceCurve;
use crate::error::Result;
use crate::filter::FilterTable;
use crate::gate::GateReport;
use crate::resonance::{ResonancePoint, RobustnessCurve, SweepRow};
use crate::spin::rad_to_khz;

pub const SWEEP_HEADER: [&str; 5] = ["t_us", "dot", "phi_rad", "n0x", "n1x"];
pub const FILTER_HEADER: [&str; 6] = [
    "omega_over_2pi_khz",
    "F_cpmg",
    "F_udd",
    "F_hybrid",
    "F_fid",
    "quotient",
];
pub const RESONANCE_HEADER: [&str; 9] = [
    "protocol",
    "kind",
    "k",
    "t_analytic_us",
    "phi_analytic_rad",
    "t_refined_us",
    "phi_refined_rad",
    "dot_refined",
    "weak_field",
];
pub const ROBUSTNESS_HEADER: [&str; 5] = ["target", "t_ref_us", "fwhm_us", "dt_us", "dot"];
pub const CHI_HEADER: [&str; 5] = ["sequence", "t_us", "chi", "coherence", "coarse_grid"];

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    fmt_num(x.unwrap_or(f64::NAN))
}

fn write_table<W, I, R>(writer: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    write_table(
        writer,
        &SWEEP_HEADER,
        rows.iter()
            .map(|r| [r.t * 1e6, r.dot, r.phi, r.n0x, r.n1x].map(fmt_num)),
    )
}

pub fn curve_header(curve: &CoherenceCurve) -> Vec<String> {
    let mut h = vec!["t_us".to_string(), "px_joint".to_string()];
    h.extend(curve.per_spin_px.iter().map(|(l, _)| format!("px_{l}")));
    h
}

pub fn write_curve<W: Write>(writer: W, curve: &CoherenceCurve) -> Result<()> {
    let header = curve_header(curve);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        writer,
        &header,
        curve.t_grid.iter().enumerate().map(|(i, t)| {
            let mut row = vec![fmt_num(t * 1e6), fmt_num(curve.px[i])];
            row.extend(curve.per_spin_px.iter().map(|(_, v)| fmt_num(v[i])));
            row
        }),
    )
}

pub fn write_filter<W: Write>(writer: W, table: &FilterTable) -> Result<()> {
    write_table(
        writer,
        &FILTER_HEADER,
        table.rows.iter().map(|r| {
            [
                fmt_num(rad_to_khz(r.omega)),
                fmt_opt(r.cpmg),
                fmt_opt(r.udd),
                fmt_opt(r.hybrid),
                fmt_opt(r.fid),
                fmt_opt(r.quotient),
            ]
        }),
    )
}

pub fn write_resonances<W: Write>(writer: W, points: &[ResonancePoint]) -> Result<()> {
    write_table(
        writer,
        &RESONANCE_HEADER,
        points.iter().map(|p| {
            [
                p.protocol.to_string(),
                p.kind.to_string(),
                p.order_k.to_string(),
                fmt_num(p.t_analytic * 1e6),
                fmt_opt(p.phi_analytic),
                fmt_opt(p.t_refined.map(|t| t * 1e6)),
                fmt_opt(p.phi_refined),
                fmt_opt(p.dot_refined),
                p.weak_field.to_string(),
            ]
        }),
    )
}

pub fn write_robustness<W: Write>(writer: W, curves: &[RobustnessCurve]) -> Result<()> {
    write_table(
        writer,
        &ROBUSTNESS_HEADER,
        curves.iter().flat_map(|c| {
            c.dt.iter().zip(&c.dot).map(move |(dt, d)| {
                [
                    c.target.to_string(),
                    fmt_num(c.t_ref * 1e6),
                    fmt_num(c.fwhm * 1e6),
                    fmt_num(dt * 1e6),
                    fmt_num(*d),
                ]
            })
        }),
    )
}

pub fn write_gates<W: Write>(writer: W, reports: &[GateReport]) -> Result<()> {
    write_table(
        writer,
        &GateReport::CSV_HEADER,
        reports.iter().map(GateReport::csv_row),
    )
}

/// Gate maps over `(A∥, A⊥)` in kHz; failed cells are written as `none`/`nan`.
pub fn write_gate_grid<W: Write>(
    writer: W,
    cells: &[((f64, f64), Option<GateReport>)],
) -> Result<()> {
    let mut header = vec!["apar_khz", "aperp_khz"];
    header.extend(GateReport::CSV_HEADER);
    write_table(
        writer,
        &header,
        cells.iter().map(|((apar, aperp), rep)| {
            let mut row = vec![fmt_num(*apar), fmt_num(*aperp)];
            match rep {
                Some(r) => row.extend(r.csv_row()),
                None => row.extend(["none", "nan", "0", "0", "nan", "nan"].map(String::from)),
            }
            row
        }),
    )
}

/// One row per `(sequence, T)` pair.
pub struct ChiRow {
    pub sequence: String,
    pub total_time: f64,
    pub chi: f64,
    pub coherence: f64,
    pub coarse_grid: bool,
}

pub fn write_chi<W: Write>(writer: W, rows: &[ChiRow]) -> Result<()> {
    write_table(
        writer,
        &CHI_HEADER,
        rows.iter().map(|r| {
            [
                r.sequence.clone(),
                fmt_num(r.total_time * 1e6),
                fmt_num(r.chi),
                fmt_num(r.coherence),
                r.coarse_grid.to_string(),
            ]
        }),
    )
}
