//! JSON run reports and their validator.

use fracpoly::dinkelbach::DinkelbachTrace;
use fracpoly::lasserre::{cost_with_basis, estimate_cost};
use fracpoly::polycore::basis_size;
use fracpoly::sosdual::SosCertificateDoc;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TOOL: &str = "fracpoly";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Basis size printed for the EE problem at `n = 2`, `d = 6`.
pub const QUOTED_EE_BASIS: u64 = 15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: Option<String>,
    pub options: RunOptions,
    pub status: RunStatus,
    pub result: RunResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    pub order: Option<usize>,
    pub eps: Option<f64>,
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_outer: Option<usize>,
    pub oracle: bool,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Certified,
    Uncertified,
}

impl RunStatus {
    pub fn from_flag(certified: bool) -> Self {
        if certified {
            RunStatus::Certified
        } else {
            RunStatus::Uncertified
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Certified => 0,
            RunStatus::Uncertified => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunResult {
    Poly(PolyResult),
    Fractional(FracResult),
    Ee(EeResult),
    Sos(SosResult),
    Example1(Example1Result),
}

impl RunResult {
    pub fn certified(&self) -> bool {
        match self {
            RunResult::Poly(r) => r.certified,
            RunResult::Fractional(r) => r.certified,
            RunResult::Ee(r) => r.certified,
            RunResult::Sos(r) => r.sos,
            RunResult::Example1(r) => r.certified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDoc {
    pub status: String,
    pub iterations: usize,
    pub duality_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityDoc {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// `s_{n,d}`.
    pub s: u64,
    pub operations: u64,
    /// Basis size quoted for this instance in the published estimate, if any.
    pub quoted_s: Option<u64>,
    pub quoted_operations: Option<u64>,
    pub note: Option<String>,
}

fn saturate(v: u128) -> u64 {
    u64::try_from(v).unwrap_or(u64::MAX)
}

impl ComplexityDoc {
    pub fn new(n: usize, m: usize, d: usize) -> Self {
        ComplexityDoc {
            n,
            m,
            d,
            s: basis_size(n, d).unwrap_or(u64::MAX),
            operations: saturate(estimate_cost(n, m, d)),
            quoted_s: None,
            quoted_operations: None,
            note: None,
        }
    }

    /// Adds the published `s = C(6,4) = 15` figure next to `s_{2,6} = 28`.
    pub fn with_quoted(mut self, quoted_s: u64) -> Self {
        self.quoted_s = Some(quoted_s);
        self.quoted_operations = Some(saturate(cost_with_basis(self.n, self.m, quoted_s as u128)));
        self.note = Some(format!(
            "s_{{{},{}}} = C({},{}) = {}, while the published estimate uses s = {}; operation counts \
             n^2*m*s^3 + n*m*s^4 are {} and {}",
            self.n,
            self.d,
            self.n + self.d,
            self.d,
            self.s,
            quoted_s,
            self.operations,
            self.quoted_operations.unwrap()
        ));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyResult {
    pub sense: String,
    pub n: usize,
    pub order: usize,
    pub bound: f64,
    pub point: Vec<f64>,
    /// `true` when `point` came from rank-one extraction rather than the
    /// first-order moments.
    pub extracted: bool,
    pub value_at_point: f64,
    pub rank_ratio: f64,
    pub certified: bool,
    pub solver: SolverDoc,
    pub complexity: ComplexityDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSummary {
    pub iterations: usize,
    pub outer_status: String,
    pub lambda_first: f64,
    pub lambda_last: f64,
    pub final_f: f64,
    pub uncertified_iterations: usize,
    pub diverging_bounds: usize,
}

impl TraceSummary {
    pub fn new(trace: &DinkelbachTrace) -> Self {
        let recs = &trace.records;
        TraceSummary {
            iterations: recs.len(),
            outer_status: format!("{:?}", trace.status),
            lambda_first: recs.first().map_or(f64::NAN, |r| r.lambda),
            lambda_last: recs.last().map_or(f64::NAN, |r| r.lambda),
            final_f: recs.last().map_or(f64::NAN, |r| r.f_value),
            uncertified_iterations: recs.iter().filter(|r| !r.certified).count(),
            diverging_bounds: recs.iter().filter(|r| r.bound_diverges).count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracResult {
    pub n: usize,
    pub order: usize,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub numerator_at_x: f64,
    pub denominator_at_x: f64,
    pub certified: bool,
    pub trace: TraceSummary,
    pub complexity: ComplexityDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "EE")]
    pub ee: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EeResult {
    pub order: usize,
    pub source: Option<String>,
    pub continuous: PointDoc,
    pub nearest: [i64; 2],
    pub nearest_feasible: bool,
    pub rounded: Option<PointDoc>,
    pub lambda: f64,
    pub certified: bool,
    pub trace: TraceSummary,
    pub oracle: Option<PointDoc>,
    pub epsilon: Option<f64>,
    /// `ε_k = 1 − ratio_k/EE*` per outer iteration.
    pub epsilon_trace: Option<Vec<f64>>,
    pub complexity: ComplexityDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosResult {
    pub n: usize,
    pub degree: usize,
    pub sos: bool,
    pub reason: Option<String>,
    pub certificate: Option<SosCertificateDoc>,
    pub squares: Option<usize>,
    pub reconstruction_error: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    /// Smallest value over `samples` seeded points in `[-3, 3]^n`.
    pub sampled_min: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Result {
    pub basis: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    pub moment_matrix: Vec<Vec<String>>,
    pub order: usize,
    pub bound: f64,
    pub bound_exact: String,
    pub point: Vec<f64>,
    pub point_exact: [String; 2],
    pub certified: bool,
    pub erratum: Vec<String>,
}

impl Report {
    pub fn new(command: &str, input: Option<&str>, options: RunOptions, result: RunResult) -> Self {
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            input: input.map(str::to_string),
            options,
            status: RunStatus::from_flag(result.certified()),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parses a report, checks its invariants and that it round-trips unchanged.
pub fn validate_report(path: &str, text: &str) -> Result<Report, CliError> {
    let schema = |line: usize, column: usize, message: String| CliError::Schema {
        path: path.to_string(),
        line,
        column,
        message,
    };
    let report: Report = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rfind(" at line ").map_or(msg.clone(), |i| msg[..i].to_string());
        schema(e.line(), e.column(), msg)
    })?;
    if report.tool != TOOL {
        return Err(schema(1, 1, format!("tool is {:?}, expected {TOOL:?}", report.tool)));
    }
    if report.status != RunStatus::from_flag(report.result.certified()) {
        return Err(schema(1, 1, "status disagrees with the result's certified flag".into()));
    }
    let original: serde_json::Value = serde_json::from_str(text).expect("parsed above");
    let again = serde_json::to_value(&report).expect("report serializes");
    if original != again {
        return Err(schema(1, 1, "report does not round-trip through the schema".into()));
    }
    Ok(report)
}
