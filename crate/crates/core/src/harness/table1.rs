//! Loss-probability table for `b = 1` and egalitarian rates `c_i = 1/i`.
//!
//! Three columns per row: the SRL loss of the egalitarian system, the FCFD
//! zero-inflated loss with `alpha = 1` (exponential lengths) and with
//! `alpha = 0.5, mu = 0.5`. Each computed cell sits beside its reference
//! value, which is printed to three decimals.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{egalitarian_loss, zero_inflated_fcfd_probs, ServiceRateProfile};
use crate::stochastic::ArrivalRates;
use crate::Result;

/// Cells further than this from the reference value are flagged.
pub const DEVIATION_THRESHOLD: f64 = 0.0015;

/// `(row, n, lambda, [col1, col2, col3])` as printed in the reference table.
pub const REFERENCE: [(u32, usize, f64, [f64; 3]); 26] = [
    (1, 1, 0.1, [0.095, 0.091, 0.083]),
    (2, 1, 0.2, [0.181, 0.167, 0.143]),
    (3, 1, 0.3, [0.259, 0.231, 0.188]),
    (4, 1, 0.4, [0.330, 0.286, 0.222]),
    (5, 1, 0.5, [0.393, 0.333, 0.250]),
    (6, 1, 0.6, [0.451, 0.375, 0.272]),
    (7, 1, 0.7, [0.503, 0.412, 0.292]),
    (8, 1, 0.8, [0.551, 0.444, 0.292]),
    (9, 1, 0.9, [0.593, 0.474, 0.321]),
    (10, 1, 1.0, [0.632, 0.500, 0.333]),
    (11, 1, 1.5, [0.777, 0.600, 0.375]),
    (12, 1, 2.0, [0.865, 0.667, 0.400]),
    (13, 2, 0.2, [0.037, 0.032, 0.024]),
    (14, 2, 0.4, [0.132, 0.103, 0.068]),
    (15, 2, 0.6, [0.259, 0.184, 0.123]),
    (16, 2, 0.8, [0.395, 0.262, 0.165]),
    (17, 2, 1.0, [0.523, 0.333, 0.200]),
    (18, 2, 1.2, [0.634, 0.396, 0.229]),
    (19, 2, 1.4, [0.725, 0.427, 0.251]),
    (20, 2, 1.6, [0.797, 0.496, 0.275]),
    (21, 2, 1.8, [0.851, 0.536, 0.292]),
    (22, 2, 2.0, [0.892, 0.571, 0.308]),
    (23, 5, 0.5, [0.026, 0.016, 0.011]),
    (24, 5, 1.0, [0.390, 0.167, 0.091]),
    (25, 5, 1.5, [0.820, 0.371, 0.128]),
    (26, 5, 2.0, [0.964, 0.508, 0.262]),
];

/// `(n, lambda)` pairs of the supplementary SRL loss table.
pub const SUPPLEMENTARY: [(usize, f64); 11] = [
    (1, 1.0),
    (2, 1.0),
    (5, 1.0),
    (1, 1.2),
    (2, 1.2),
    (10, 1.2),
    (10, 1.4),
    (2, 1.6),
    (1, 2.0),
    (2, 2.0),
    (5, 2.0),
];

const COLUMN_TITLES: [&str; 3] = [
    "SRL loss",
    "FCFD, exponential",
    "FCFD, zero-inflated (0.5, 0.5)",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub row: u32,
    pub n: usize,
    pub lambda: f64,
    pub computed: [f64; 3],
    pub reference: [f64; 3],
    pub abs_dev: [f64; 3],
    pub flags: [bool; 3],
}

/// One CSV record: a single cell of the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub row: u32,
    pub n: usize,
    pub lambda: f64,
    pub col: u8,
    pub computed: f64,
    pub reference: f64,
    pub abs_dev: f64,
    pub flag: bool,
}

/// Computes the three columns for one `(n, lambda)`.
pub fn columns(n: usize, lambda: f64) -> Result<[f64; 3]> {
    let profile = ServiceRateProfile::egalitarian(n)?;
    let rates = ArrivalRates::constant(n, lambda)?;
    Ok([
        egalitarian_loss(n, lambda, 1.0)?,
        zero_inflated_fcfd_probs(n, &rates, 1.0, 1.0, &profile)?.loss(),
        zero_inflated_fcfd_probs(n, &rates, 0.5, 0.5, &profile)?.loss(),
    ])
}

pub fn compute() -> Result<Vec<Table1Row>> {
    REFERENCE
        .iter()
        .map(|&(row, n, lambda, reference)| {
            let computed = columns(n, lambda)?;
            let abs_dev = std::array::from_fn(|k| (computed[k] - reference[k]).abs());
            let flags = abs_dev.map(|d| d > DEVIATION_THRESHOLD);
            Ok(Table1Row {
                row,
                n,
                lambda,
                computed,
                reference,
                abs_dev,
                flags,
            })
        })
        .collect()
}

pub fn cells(rows: &[Table1Row]) -> Vec<Table1Cell> {
    rows.iter()
        .flat_map(|r| {
            (0..3).map(move |k| Table1Cell {
                row: r.row,
                n: r.n,
                lambda: r.lambda,
                col: k as u8 + 1,
                computed: r.computed[k],
                reference: r.reference[k],
                abs_dev: r.abs_dev[k],
                flag: r.flags[k],
            })
        })
        .collect()
}

pub fn to_csv(cells: &[Table1Cell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<Table1Cell>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

pub fn write_csv(path: &Path, cells: &[Table1Cell]) -> Result<()> {
    std::fs::write(path, to_csv(cells)?)?;
    Ok(())
}

pub fn render(rows: &[Table1Row]) -> String {
    let mut out = String::new();
    out.push_str("Loss probabilities, b = 1, egalitarian rates c_i = 1/i.\n");
    out.push_str(
        "The reference table's caption states c_i = 1; its printed values are reproduced\n\
         only with c_i = 1/i, so that reading is used throughout.\n",
    );
    for (k, t) in COLUMN_TITLES.iter().enumerate() {
        let _ = writeln!(out, "  col{}: {t}", k + 1);
    }
    let _ = writeln!(
        out,
        "Cells with |computed - reference| > {DEVIATION_THRESHOLD} are marked '*'.\n"
    );
    let _ = writeln!(
        out,
        "{:>3} {:>2} {:>4} | {:>7} {:>7} | {:>7} {:>7} | {:>7} {:>7}",
        "No", "n", "lam", "col1", "ref", "col2", "ref", "col3", "ref"
    );
    for r in rows {
        let _ = write!(out, "{:>3} {:>2} {:>4.1}", r.row, r.n, r.lambda);
        for k in 0..3 {
            let mark = if r.flags[k] { '*' } else { ' ' };
            let _ = write!(
                out,
                " | {:>6.3}{mark} {:>7.3}",
                r.computed[k], r.reference[k]
            );
        }
        out.push('\n');
    }
    let flagged = rows.iter().flat_map(|r| r.flags).filter(|f| *f).count();
    let _ = writeln!(out, "\n{} of {} cells flagged.", flagged, rows.len() * 3);
    out
}

/// SRL loss for the supplementary `(n, lambda)` pairs.
pub fn supplementary() -> Result<Vec<(usize, f64, f64)>> {
    SUPPLEMENTARY
        .iter()
        .map(|&(n, l)| Ok((n, l, egalitarian_loss(n, l, 1.0)?)))
        .collect()
}

pub fn render_supplementary(values: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("\nSupplementary SRL loss, b = 1, c_i = 1/i:\n");
    let _ = writeln!(out, "{:>3} {:>4} {:>8}", "n", "lam", "loss");
    for (n, l, p) in values {
        let _ = writeln!(out, "{n:>3} {l:>4.1} {p:>8.4}");
    }
    out
}
