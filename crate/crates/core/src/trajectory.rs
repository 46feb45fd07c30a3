use std::io::{self, Write};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "step,loss,step_size,grad_norm_sq,dist_to_opt_sq,full_objective";

/// One optimizer step.
///
/// Record `t ≥ 1` describes the update `w_{t-1} → w_t`: `loss`, `step_size`
/// and `grad_norm_sq` are the batch quantities evaluated at `w_{t-1}`, while
/// `dist_to_opt_sq`, `full_objective` and `averaged_objective` describe the
/// new iterate `w_t`. Record `0` describes `w_0` itself, with full-objective
/// values in the batch fields and a zero step-size.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub sample_indices: Vec<usize>,
    pub loss: f64,
    pub step_size: f64,
    pub grad_norm_sq: f64,
    pub dist_to_opt_sq: Option<f64>,
    pub full_objective: Option<f64>,
    /// `f` at the running average of `w_0, …, w_t`, when tracked.
    pub averaged_objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// The step budget was exhausted.
    Completed,
    /// The full objective fell to the configured threshold at `step`.
    ThresholdReached { step: usize },
    /// Step `step` failed; the trajectory holds every record before it.
    Failed { step: usize, error: Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn failed(&self) -> bool {
        matches!(self.termination, Termination::Failed { .. })
    }

    /// Last logged full objective.
    pub fn final_objective(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.full_objective)
    }

    /// `(step, f(w_step))` for every record where the objective was logged.
    pub fn objectives(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.records.iter().filter_map(|r| r.full_objective.map(|f| (r.step, f)))
    }

    /// First logged step whose objective is strictly below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.objectives().find(|&(_, f)| f < threshold).map(|(s, _)| s)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.step,
                fmt_f64(r.loss),
                fmt_f64(r.step_size),
                fmt_f64(r.grad_norm_sq),
                r.dist_to_opt_sq.map(fmt_f64).unwrap_or_default(),
                r.full_objective.map(fmt_f64).unwrap_or_default(),
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// 17 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One parsed row of a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub step: usize,
    pub loss: f64,
    pub step_size: f64,
    pub grad_norm_sq: f64,
    pub dist_to_opt_sq: Option<f64>,
    pub full_objective: Option<f64>,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let bad = |line: usize, msg: &str| Error::Fixture { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, "missing trajectory header")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(n, "expected 6 fields"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(n, "bad number"));
        let opt = |s: &str| if s.trim().is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(CsvRow {
            step: fields[0].trim().parse().map_err(|_| bad(n, "bad step"))?,
            loss: num(fields[1])?,
            step_size: num(fields[2])?,
            grad_norm_sq: num(fields[3])?,
            dist_to_opt_sq: opt(fields[4])?,
            full_objective: opt(fields[5])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(step: usize, loss: f64, dist: Option<f64>, full: Option<f64>) -> StepRecord {
        StepRecord {
            step,
            sample_indices: vec![],
            loss,
            step_size: 0.5,
            grad_norm_sq: 2.0,
            dist_to_opt_sq: dist,
            full_objective: full,
            averaged_objective: None,
        }
    }

    #[test]
    fn missing_optionals_are_empty_fields() {
        let t = Trajectory { records: vec![record(0, 1.0, None, None)], termination: Termination::Completed };
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.ends_with(",,"), "{row}");
        assert_eq!(lines.next(), None);
    }

    proptest! {
        #[test]
        fn csv_keeps_full_precision(
            loss in 0.0f64..1e6,
            dist in prop::option::of(0.0f64..1e3),
            full in prop::option::of(0.0f64..1e-3),
        ) {
            let t = Trajectory {
                records: vec![record(0, loss, dist, full), record(1, loss / 3.0, None, full)],
                termination: Termination::Completed,
            };
            let rows = parse_csv(&t.to_csv()).unwrap();
            prop_assert_eq!(rows.len(), 2);
            prop_assert_eq!(rows[0].loss.to_bits(), loss.to_bits());
            prop_assert_eq!(rows[1].loss.to_bits(), (loss / 3.0).to_bits());
            prop_assert_eq!(rows[0].dist_to_opt_sq.map(f64::to_bits), dist.map(f64::to_bits));
            prop_assert_eq!(rows[1].full_objective.map(f64::to_bits), full.map(f64::to_bits));
        }
    }
}
