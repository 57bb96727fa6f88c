//! Property checks over experiment tables, used by the CLI's `--check`.

use std::collections::BTreeMap;
use std::fmt;

use super::experiments::{slope_per_doubling, NearFarReport, OFDM_INTF, SC_INTF};
use super::experiments::sweet_spot_band;
use super::table::{Cell, ResultTable};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

pub const SLOPE_RANGE: (f64, f64) = (2.5, 3.5);

fn text(c: &Cell) -> String {
    c.to_string()
}

/// `(code label, n, value)` triples for one numeric column.
fn series(table: &ResultTable, column: &str) -> Result<Vec<(String, usize, f64)>> {
    let codes = table.column("code")?;
    let ns = table.column_f64("n")?;
    let vals = table.column_f64(column)?;
    Ok(codes
        .into_iter()
        .zip(ns)
        .zip(vals)
        .map(|((c, n), v)| (text(c), n as usize, v))
        .collect())
}

fn by_code(rows: &[(String, usize, f64)]) -> BTreeMap<String, Vec<(usize, f64)>> {
    let mut out: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (c, n, v) in rows {
        out.entry(c.clone()).or_default().push((*n, *v));
    }
    out
}

fn slope_checks(table: &ResultTable, column: &str, out: &mut Vec<CheckOutcome>) -> Result<()> {
    for (code, pts) in by_code(&series(table, column)?) {
        if pts.len() < 2 {
            continue;
        }
        let (ns, db): (Vec<usize>, Vec<f64>) = pts.into_iter().unzip();
        let s = slope_per_doubling(&ns, &db)?;
        let pass = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s);
        out.push(outcome(format!("slope {column} {code}"), pass, format!("{s:.3} dB per doubling")));
    }
    Ok(())
}

/// Slopes, the uncoded QPSK level at N = 1024 and the Polar/LDPC gap.
pub fn check_pslr(table: &ResultTable) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    slope_checks(table, "median_pslr_db", &mut out)?;
    let rows = series(table, "median_pslr_db")?;
    for (code, n, v) in &rows {
        if code.starts_with("uncoded-") && code.contains("-qpsk-") && *n == 1024 {
            out.push(outcome(
                "uncoded QPSK median PSLR at N=1024",
                (v - 25.0).abs() <= 2.0,
                format!("{v:.2} dB, expected 25 ± 2"),
            ));
        }
    }
    for (code, n, v) in &rows {
        if let Some(rest) = code.strip_prefix("polar-") {
            let twin = format!("ldpc-{rest}");
            if let Some((_, _, w)) = rows.iter().find(|(c, m, _)| *c == twin && m == n) {
                let gap = (v - w).abs();
                out.push(outcome(
                    format!("polar vs ldpc {rest} N={n}"),
                    gap < 0.5,
                    format!("gap {gap:.3} dB"),
                ));
            }
        }
    }
    Ok(out)
}

pub fn check_suppression(table: &ResultTable) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    slope_checks(table, "median_cross_db", &mut out)?;
    slope_checks(table, "median_ofdm_db", &mut out)?;
    Ok(out)
}

/// Interleaved Polar tracks uncoded; low-rate non-interleaved is worse at
/// the shortest block length.
pub fn check_interleaver(table: &ResultTable) -> Result<Vec<CheckOutcome>> {
    let rows = series(table, "median_pslr_db")?;
    let mut out = Vec::new();
    let uncoded = |constellation: &str, n: usize| {
        rows.iter()
            .find(|(c, m, _)| c.starts_with("uncoded-") && c.contains(&format!("-{constellation}-")) && *m == n)
            .map(|r| r.2)
    };
    let n_min = rows.iter().map(|r| r.1).min().unwrap_or(0);
    for (code, n, v) in &rows {
        let parts: Vec<&str> = code.split('-').collect();
        if parts.len() != 4 || parts[0] != "polar" {
            continue;
        }
        let (rate, constellation, il) = (parts[1], parts[2], parts[3]);
        if il == "il" {
            if let Some(u) = uncoded(constellation, *n) {
                let gap = (v - u).abs();
                out.push(outcome(format!("interleaved {code} vs uncoded N={n}"), gap <= 0.5, format!("gap {gap:.3} dB")));
            }
        } else if *n == n_min && rate.parse::<crate::coding::CodeRate>().map(|r| r.value() < 0.5).unwrap_or(false) {
            let twin = format!("polar-{rate}-{constellation}-il");
            if let Some((_, _, w)) = rows.iter().find(|(c, m, _)| *c == twin && m == n) {
                out.push(outcome(
                    format!("non-interleaved {code} below interleaved at N={n}"),
                    v < w,
                    format!("{v:.2} vs {w:.2} dB"),
                ));
            }
        }
    }
    Ok(out)
}

pub fn check_tail_bounds(table: &ResultTable) -> Result<Vec<CheckOutcome>> {
    let pass = table.column("pass")?;
    let failures = pass.iter().filter(|c| **c == &Cell::Bool(false)).count();
    Ok(vec![outcome(
        "tail bounds",
        failures == 0,
        format!("{failures} of {} comparisons violated", pass.len()),
    )])
}

pub fn check_near_far(report: &NearFarReport) -> Vec<CheckOutcome> {
    [SC_INTF, OFDM_INTF]
        .iter()
        .map(|label| match sweet_spot_band(&report.roc, label) {
            Some((lo, hi)) => outcome(format!("sweet spot {label}"), true, format!("eta in [{lo:.4e}, {hi:.4e}]")),
            None => outcome(format!("sweet spot {label}"), false, "no threshold with Pd = 1 and Pf = 0"),
        })
        .collect()
}
