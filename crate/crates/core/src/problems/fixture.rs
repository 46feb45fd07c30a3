//! Plain-text problem fixtures.
//!
//! The first line is `kind,dims,eps,seed`. The remaining lines hold
//! whitespace-separated numbers whose layout depends on the kind:
//!
//! | kind                 | rows                                                   |
//! |----------------------|--------------------------------------------------------|
//! | `rsi_scalar`         | none                                                   |
//! | `least_squares`      | `w⋆`, then one `a_i… b_i` row per sample               |
//! | `quadratic_ensemble` | `α β`, `w⋆`, `w₀`, then one `c_i A_i…` row per sample  |
//! | `hinge_ensemble`     | `w⋆`, then one `y_i x_i…` row per sample               |
//! | `tiny_mlp`           | teacher `θ`, `θ₀`, then one `x_i… t_i` row per sample  |
//!
//! Matrices are row-major. Numbers are written in shortest round-trip form, so
//! reading a fixture back reproduces the problem bit for bit.

use std::fmt::Write;

use super::quadratic::QuadraticEnsembleProblem;
use super::{
    mlp, BuiltinProblem, Dims, HingeEnsembleProblem, LeastSquaresProblem, ProblemKind, RsiScalarProblem,
    TinyMlpProblem,
};
use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub kind: ProblemKind,
    pub dims: Dims,
    pub eps: f64,
    pub seed: u64,
    pub problem: BuiltinProblem,
}

fn push_row(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

fn dims_of(problem: &BuiltinProblem) -> Dims {
    match problem {
        BuiltinProblem::TinyMlp(p) => Dims::with_hidden(p.num_samples(), p.input_dim(), p.hidden()),
        other => Dims::new(other.num_samples(), other.dim()),
    }
}

/// Serializes a problem. `seed` is recorded in the header for provenance.
pub fn write_fixture(problem: &BuiltinProblem, seed: u64) -> String {
    let eps = problem.meta().interp_tolerance_eps.unwrap_or(0.0);
    let mut out = format!("{},{},{eps:e},{seed}\n", problem.kind(), dims_of(problem));
    let minimizer = problem.meta().minimizer.as_ref().map(|m| m.as_slice().to_vec()).unwrap_or_default();
    match problem {
        BuiltinProblem::RsiScalar(_) => {}
        BuiltinProblem::LeastSquares(p) => {
            push_row(&mut out, &minimizer);
            for (a, b) in p.rows().zip(p.targets()) {
                let mut row = a.to_vec();
                row.push(*b);
                push_row(&mut out, &row);
            }
        }
        BuiltinProblem::QuadraticEnsemble(p) => {
            push_row(&mut out, &[p.alpha(), p.beta()]);
            push_row(&mut out, &minimizer);
            push_row(&mut out, &p.initial_point());
            for (z, c) in p.offsets().iter().enumerate() {
                let mut row = vec![*c];
                row.extend_from_slice(p.matrix(z));
                push_row(&mut out, &row);
            }
        }
        BuiltinProblem::HingeEnsemble(p) => {
            push_row(&mut out, &minimizer);
            for (z, y) in p.labels().iter().enumerate() {
                let mut row = vec![*y];
                row.extend_from_slice(p.input(z));
                push_row(&mut out, &row);
            }
        }
        BuiltinProblem::TinyMlp(p) => {
            push_row(&mut out, &minimizer);
            push_row(&mut out, &p.initial_point());
            let d = p.input_dim();
            for (x, t) in p.inputs().chunks(d).zip(p.targets()) {
                let mut row = x.to_vec();
                row.push(*t);
                push_row(&mut out, &row);
            }
        }
    }
    out
}

struct Rows<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl Rows<'_> {
    fn next_row(&mut self, expected: usize) -> Result<Vec<f64>> {
        let (idx, line) = self
            .lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or(Error::Fixture { line: 0, msg: "unexpected end of fixture".into() })?;
        let line_no = idx + 1;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Fixture { line: line_no, msg: e.to_string() })?;
        if values.len() != expected {
            return Err(Error::Fixture {
                line: line_no,
                msg: format!("expected {expected} values, found {}", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Fixture { line: line_no, msg: "non-finite value".into() });
        }
        Ok(values)
    }

    fn finish(mut self) -> Result<()> {
        match self.lines.find(|(_, l)| !l.trim().is_empty()) {
            Some((idx, _)) => Err(Error::Fixture { line: idx + 1, msg: "trailing data".into() }),
            None => Ok(()),
        }
    }
}

fn header_error(msg: impl Into<String>) -> Error {
    Error::Fixture { line: 1, msg: msg.into() }
}

pub fn read_fixture(text: &str) -> Result<Fixture> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| header_error("empty fixture"))?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    let [kind, dims, eps, seed] = fields.as_slice() else {
        return Err(header_error("header must be kind,dims,eps,seed"));
    };
    let kind: ProblemKind = kind.parse().map_err(|e: Error| header_error(e.to_string()))?;
    let dims: Dims = dims.parse().map_err(|e: Error| header_error(e.to_string()))?;
    let eps: f64 = eps.trim().parse().map_err(|_| header_error("bad eps"))?;
    let seed: u64 = seed.trim().parse().map_err(|_| header_error("bad seed"))?;
    let mut rows = Rows { lines };
    let (n, d) = (dims.samples, dims.dim);

    let problem = match kind {
        ProblemKind::RsiScalar => BuiltinProblem::RsiScalar(RsiScalarProblem::new()),
        ProblemKind::LeastSquares => {
            let w_star = rows.next_row(d)?;
            let mut a = Vec::with_capacity(n * d);
            let mut b = Vec::with_capacity(n);
            for _ in 0..n {
                let mut row = rows.next_row(d + 1)?;
                b.push(row.pop().unwrap());
                a.extend(row);
            }
            BuiltinProblem::LeastSquares(LeastSquaresProblem::from_parts(d, a, b, w_star, eps)?)
        }
        ProblemKind::QuadraticEnsemble => {
            let ab = rows.next_row(2)?;
            let w_star = rows.next_row(d)?;
            let start = rows.next_row(d)?;
            let mut offsets = Vec::with_capacity(n);
            let mut matrices = Vec::with_capacity(n * d * d);
            for _ in 0..n {
                let row = rows.next_row(1 + d * d)?;
                offsets.push(row[0]);
                matrices.extend_from_slice(&row[1..]);
            }
            BuiltinProblem::QuadraticEnsemble(QuadraticEnsembleProblem::from_parts(
                d, ab[0], ab[1], matrices, offsets, w_star, start, eps,
            )?)
        }
        ProblemKind::HingeEnsemble => {
            let w_star = rows.next_row(d)?;
            let mut labels = Vec::with_capacity(n);
            let mut inputs = Vec::with_capacity(n * d);
            for _ in 0..n {
                let row = rows.next_row(1 + d)?;
                labels.push(row[0]);
                inputs.extend_from_slice(&row[1..]);
            }
            BuiltinProblem::HingeEnsemble(HingeEnsembleProblem::from_parts(d, inputs, labels, w_star)?)
        }
        ProblemKind::TinyMlp => {
            let h = dims.hidden.ok_or_else(|| header_error("tiny_mlp dims need a hidden width"))?;
            let p = mlp::param_count(d, h);
            let teacher = rows.next_row(p)?;
            let start = rows.next_row(p)?;
            let mut inputs = Vec::with_capacity(n * d);
            let mut targets = Vec::with_capacity(n);
            for _ in 0..n {
                let mut row = rows.next_row(d + 1)?;
                targets.push(row.pop().unwrap());
                inputs.extend(row);
            }
            BuiltinProblem::TinyMlp(TinyMlpProblem::from_parts(d, h, inputs, targets, teacher, start)?)
        }
    };
    rows.finish()?;
    Ok(Fixture { kind, dims, eps, seed, problem })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    #[test]
    fn header_errors_are_reported() {
        assert!(read_fixture("").is_err());
        assert!(read_fixture("least_squares,3x2,0\n").is_err());
        assert!(read_fixture("cubic,3x2,0,1\n").is_err());
        let err = read_fixture("least_squares,1x2,0,1\n1 2\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Fixture { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn trailing_rows_rejected() {
        let p = make_problem(ProblemKind::RsiScalar, Dims::new(1, 1), 0.0, 0).unwrap();
        let mut text = write_fixture(&p, 0);
        assert!(read_fixture(&text).is_ok());
        text.push_str("1 2 3\n");
        assert!(read_fixture(&text).is_err());
    }
}
