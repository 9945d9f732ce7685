use std::cmp::Ordering;
use std::fmt;
use std::io;

use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate_baseline_point, evaluate_strategy, OperatingPoint, RateMatchError, Strategy};
use crate::model::InfoBudget;

pub const CSV_HEADER: [&str; 11] = [
    "t_ch", "t_total", "strategy", "v_mod", "xi_art", "snr", "i_ab", "b", "chi", "r", "status",
];

const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    BelowThreshold,
    Infeasible,
}

impl RowStatus {
    fn from_error(err: &RateMatchError) -> Self {
        match err {
            RateMatchError::BelowThreshold { .. } => RowStatus::BelowThreshold,
            _ => RowStatus::Infeasible,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::BelowThreshold => "below_threshold",
            RowStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t_ch: f64,
    pub t_total: f64,
    pub strategy: &'static str,
    pub v_mod: f64,
    /// `None` unless `status` is `Ok`.
    pub xi_art: Option<f64>,
    pub budget: Option<InfoBudget>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows of one strategy, in table order.
    pub fn rows_for<'a>(&'a self, strategy: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.strategy == strategy)
    }

    /// Writes the table as CSV with a header row. Numbers carry 12
    /// significant digits; unavailable values are left empty.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
            let b = row.budget.as_ref();
            w.write_record([
                format_sig(row.t_ch),
                format_sig(row.t_total),
                row.strategy.to_string(),
                format_sig(row.v_mod),
                opt(row.xi_art),
                opt(b.map(InfoBudget::snr)),
                opt(b.map(InfoBudget::i_ab)),
                opt(b.map(InfoBudget::b)),
                opt(b.map(InfoBudget::chi)),
                opt(b.map(InfoBudget::r)),
                row.status.to_string(),
            ])?;
        }
        w.flush()
    }
}

fn make_row(
    op: &OperatingPoint,
    t_ch: f64,
    strategy: &'static str,
    outcome: Result<super::StrategyResult, RateMatchError>,
) -> SweepRow {
    let t_total = t_ch * op.params().t_rec;
    let v_mod = op.params().v_mod;
    match outcome {
        Ok(res) => SweepRow {
            t_ch: res.params.t_ch,
            t_total: res.params.total_transmittance(),
            strategy,
            v_mod,
            xi_art: Some(res.params.xi_art),
            budget: Some(res.budget),
            status: RowStatus::Ok,
        },
        Err(err) => SweepRow {
            t_ch,
            t_total,
            strategy,
            v_mod,
            xi_art: None,
            budget: None,
            status: RowStatus::from_error(&err),
        },
    }
}

/// Keeps the modulation and noises of `op` and varies only the channel
/// transmittance over `grid`.
///
/// Internal strategies produce one row per grid value; an external baseline
/// produces one row per supplied point, at that point's own transmittance.
/// Rows are ordered by ascending `t_ch`, then by position in `strategies`.
/// Failing evaluations become rows with a non-`ok` status.
pub fn sweep_transmittance(
    op: &OperatingPoint,
    grid: &[f64],
    strategies: &[Strategy],
) -> SweepTable {
    let code = op.code();
    let base = op.params().with_xi_art(0.0);

    let mut keyed: Vec<(f64, usize, SweepRow)> = grid
        .par_iter()
        .map(|&t_ch| {
            let p = base.with_t_ch(t_ch);
            strategies
                .iter()
                .enumerate()
                .filter(|(_, s)| !matches!(s, Strategy::ExternalBaseline(_)))
                .map(|(idx, s)| {
                    let row = make_row(op, t_ch, s.name(), evaluate_strategy(s, &p, code));
                    (t_ch, idx, row)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();

    for (idx, s) in strategies.iter().enumerate() {
        if let Strategy::ExternalBaseline(points) = s {
            for pt in points {
                let t_ch = pt.t_total / base.t_rec;
                let row = make_row(op, t_ch, s.name(), evaluate_baseline_point(pt, &base));
                keyed.push((t_ch, idx, row));
            }
        }
    }

    keyed.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.cmp(&b.1),
        other => other,
    });
    SweepTable {
        rows: keyed.into_iter().map(|(_, _, row)| row).collect(),
    }
}

/// Formats `x` with 12 significant digits in the style of C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    format_g(x, SIG_DIGITS)
}

fn format_g(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
