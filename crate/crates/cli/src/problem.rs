//! Problem files: one JSON document for plain and fractional problems.
//!
//! ```json
//! {"n": 1, "sense": "max",
//!  "objective": {"numerator": {"n": 1, "terms": [{"exp": [1], "c": 1}]},
//!                "denominator": {"n": 1, "terms": [{"exp": [0], "c": 1}, {"exp": [2], "c": 1}]}},
//!  "constraints": [{"n": 1, "terms": [{"exp": [1], "c": 2}, {"exp": [2], "c": -1}]}],
//!  "options": {"order": 2}}
//! ```

use fracpoly::lasserre::Sense;
use fracpoly::polycore::{Polynomial, PolynomialDoc};
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    pub order: Option<usize>,
    pub eps: Option<f64>,
    pub feas_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub max_outer: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Objective {
    Poly(Polynomial<f64>),
    Fraction {
        numerator: Polynomial<f64>,
        denominator: Polynomial<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub n: usize,
    pub sense: Option<Sense>,
    pub objective: Objective,
    pub constraints: Vec<Polynomial<f64>>,
    pub options: FileOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile<'a> {
    n: usize,
    #[serde(default)]
    sense: Option<Sense>,
    #[serde(borrow)]
    objective: &'a RawValue,
    #[serde(borrow, default)]
    constraints: Vec<&'a RawValue>,
    #[serde(default)]
    options: FileOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObjective<'a> {
    n: Option<usize>,
    terms: Option<serde::de::IgnoredAny>,
    #[serde(borrow)]
    numerator: Option<&'a RawValue>,
    #[serde(borrow)]
    denominator: Option<&'a RawValue>,
}

/// Line and column (1-based) of byte `offset` in `text`.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

struct Source<'a> {
    path: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn offset_of(&self, raw: &RawValue) -> usize {
        raw.get().as_ptr() as usize - self.text.as_ptr() as usize
    }

    fn at(&self, offset: usize, message: String) -> CliError {
        let (line, column) = line_col(self.text, offset);
        CliError::Schema {
            path: self.path.to_string(),
            line,
            column,
            message,
        }
    }

    fn at_raw(&self, raw: &RawValue, message: String) -> CliError {
        self.at(self.offset_of(raw), message)
    }

    /// Parses `raw`, mapping serde positions back into the whole file.
    fn parse<'t, T: Deserialize<'t>>(&self, raw: &'t RawValue) -> Result<T, CliError> {
        serde_json::from_str(raw.get()).map_err(|e| {
            let base = self.offset_of(raw);
            let inner = raw.get();
            // serde reports 1-based line/column inside the fragment
            let mut off = 0;
            for _ in 1..e.line() {
                off += inner[off..].find('\n').map_or(inner.len() - off, |i| i + 1);
            }
            off += e.column().saturating_sub(1);
            self.at(base + off.min(inner.len()), strip_position(&e))
        })
    }

    fn polynomial(&self, raw: &RawValue, n: usize, what: &str) -> Result<Polynomial<f64>, CliError> {
        let doc: PolynomialDoc = self.parse(raw)?;
        let p = doc
            .to_polynomial()
            .map_err(|e| self.at_raw(raw, format!("{what}: {e}")))?;
        if p.n() != n {
            return Err(self.at_raw(raw, format!("{what}: dimension {} but the problem has n = {n}", p.n())));
        }
        Ok(p)
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

pub fn parse_problem(path: &str, text: &str) -> Result<ProblemFile, CliError> {
    let src = Source { path, text };
    let raw: RawFile = serde_json::from_str(text).map_err(|e| CliError::Schema {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e),
    })?;
    if raw.n == 0 {
        return Err(src.at(0, "n must be at least 1".into()));
    }
    let obj: RawObjective = src.parse(raw.objective)?;
    let objective = match (obj.numerator, obj.denominator) {
        (Some(num), Some(den)) => {
            if obj.n.is_some() || obj.terms.is_some() {
                return Err(src.at_raw(
                    raw.objective,
                    "objective mixes a polynomial with numerator/denominator".into(),
                ));
            }
            let numerator = src.polynomial(num, raw.n, "objective.numerator")?;
            let denominator = src.polynomial(den, raw.n, "objective.denominator")?;
            if denominator.is_zero() {
                return Err(src.at_raw(den, "objective.denominator is identically zero".into()));
            }
            Objective::Fraction {
                numerator,
                denominator,
            }
        }
        (None, None) => Objective::Poly(src.polynomial(raw.objective, raw.n, "objective")?),
        _ => {
            return Err(src.at_raw(
                raw.objective,
                "objective needs both numerator and denominator".into(),
            ))
        }
    };
    let constraints = raw
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| src.polynomial(c, raw.n, &format!("constraints[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemFile {
        n: raw.n,
        sense: raw.sense,
        objective,
        constraints,
        options: raw.options,
    })
}
