//! Energy-efficiency dimensioning: choose users per cell `K` and antennas
//! `M` to maximize a ratio of cubic polynomials under the two SINR
//! feasibility constraints.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dinkelbach::{self, DinkelbachError, DinkelbachOptions, DinkelbachResult, FractionalProblem};
use crate::polycore::{MultiIndex, Polynomial};

pub const NUMERATOR_SUPPORT: [(u32, u32); 5] = [(1, 0), (2, 0), (1, 1), (2, 1), (3, 0)];
pub const DENOMINATOR_SUPPORT: [(u32, u32); 9] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (2, 1),
    (1, 2),
    (3, 0),
];

pub const DEFAULT_M_MAX: u32 = 1024;
pub const DEFAULT_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EeError {
    #[error("invalid parameter {name} = {value}: {rule}")]
    Param {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },
    #[error("unknown snr_unit {0:?} (expected \"dB\" or \"linear\")")]
    SnrUnit(String),
    #[error("bad monomial key {0:?} (expected \"(i,j)\")")]
    BadKey(String),
    #[error("{which}: monomial {key} is outside the supported set")]
    Unsupported { which: &'static str, key: String },
    #[error("{which}: coefficient {key} is not finite")]
    NonFinite { which: &'static str, key: String },
    #[error("{0}: all coefficients missing or zero")]
    Missing(&'static str),
    #[error("denominator is {value} at feasible grid point (K, M) = ({k}, {m})")]
    NonPositiveDenominator { k: u32, m: u32, value: f64 },
    #[error("grid range is empty")]
    EmptyRange,
    #[error("no feasible integer point in the grid")]
    EmptyFeasibleGrid,
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error(transparent)]
    Solver(#[from] DinkelbachError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnrUnit {
    #[serde(rename = "dB")]
    Db,
    #[serde(rename = "linear")]
    Linear,
}

/// Physical parameters; `snr` is linear.
#[derive(Clone, Debug, PartialEq)]
pub struct EEParams {
    pub gamma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub snr: f64,
    pub bandwidth_hz: Option<f64>,
    pub bs_density: Option<f64>,
}

impl EEParams {
    pub fn new(gamma: f64, tau: f64, alpha: f64, snr: f64) -> Result<Self, EeError> {
        let p = EEParams {
            gamma,
            tau,
            alpha,
            snr,
            bandwidth_hz: None,
            bs_density: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EeError> {
        let check = |ok: bool, name: &'static str, value: f64, rule: &'static str| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(EeError::Param { name, value, rule })
            }
        };
        check(self.gamma > 0.0, "gamma", self.gamma, "must be > 0")?;
        check(self.tau >= 1.0, "tau", self.tau, "must be >= 1")?;
        check(self.alpha > 2.0, "alpha", self.alpha, "must be > 2")?;
        check(self.snr > 0.0, "snr", self.snr, "must be > 0 (linear)")
    }
}

pub fn snr_to_linear(value: f64, unit: SnrUnit) -> f64 {
    match unit {
        SnrUnit::Db => 10f64.powf(value / 10.0),
        SnrUnit::Linear => value,
    }
}

/// `h₁(K, M)` and `h₂(K, M)` from the closed-form coefficient table.
pub fn constraint_coeffs(p: &EEParams) -> Result<(Polynomial<f64>, Polynomial<f64>), EeError> {
    p.validate()?;
    let (g, tau, a, snr) = (p.gamma, p.tau, p.alpha, p.snr);
    let c = 1.0 + 2.0 / (a - 2.0);
    let q = 4.0 / (a - 2.0).powi(2) + 1.0 / (a - 1.0) + 2.0 / (a - 2.0);
    let h1 = Polynomial::from_pairs(
        2,
        &[
            (&[0, 0], -g * tau * c),
            (&[1, 0], -(g / snr) * (2.0 / (a - 2.0)) - g * tau * c * (1.0 + 1.0 / snr)),
            (&[0, 1], tau),
            (&[1, 1], -g / (a - 1.0)),
            (&[2, 0], -g * q),
        ],
    )
    .expect("two variables");
    let h2 = Polynomial::from_pairs(
        2,
        &[
            (&[0, 0], (g / snr) * (2.0 / (a - 2.0) + 1.0 + 1.0 / snr)),
            (&[1, 0], g * q + g * c * (1.0 + 1.0 / snr)),
            (&[0, 1], g * (1.0 / (a - 1.0) - 1.0)),
        ],
    )
    .expect("two variables");
    Ok((h1, h2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub gamma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub snr: f64,
    pub snr_unit: SnrUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_density: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub f: BTreeMap<String, f64>,
    pub g: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    #[serde(rename = "K_max", default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(rename = "M_max", default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u32>,
}

/// On-disk EE config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EeConfig {
    pub params: ParamsDoc,
    pub objective: ObjectiveDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
    /// Provenance note for externally sourced coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl EeConfig {
    pub fn parse(text: &str) -> Result<Self, EeError> {
        serde_json::from_str(text).map_err(|e| EeError::Malformed(e.to_string()))
    }
}

/// Maximize `f(K, M)/g(K, M)` s.t. `h₁ ≥ 0`, `h₂ ≥ 0`, `1 ≤ K ≤ K_max`,
/// `1 ≤ M ≤ M_max`.
#[derive(Clone, Debug)]
pub struct EEProblem {
    pub params: EEParams,
    pub f: Polynomial<f64>,
    pub g: Polynomial<f64>,
    pub h1: Polynomial<f64>,
    pub h2: Polynomial<f64>,
    pub k_max: u32,
    pub m_max: u32,
    pub source: Option<String>,
}

fn parse_key(key: &str) -> Result<(u32, u32), EeError> {
    let bad = || EeError::BadKey(key.to_string());
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let mut parts = inner.split(',');
    let i = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let j = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((i, j))
}

fn coefficient_poly(
    which: &'static str,
    map: &BTreeMap<String, f64>,
    support: &[(u32, u32)],
) -> Result<Polynomial<f64>, EeError> {
    let mut terms = Vec::new();
    for (key, &c) in map {
        let (i, j) = parse_key(key)?;
        if !support.contains(&(i, j)) {
            return Err(EeError::Unsupported {
                which,
                key: key.clone(),
            });
        }
        if !c.is_finite() {
            return Err(EeError::NonFinite {
                which,
                key: key.clone(),
            });
        }
        terms.push((MultiIndex::new(vec![i, j]), c));
    }
    let p = Polynomial::from_terms(2, terms).expect("two variables");
    if p.is_zero() {
        return Err(EeError::Missing(which));
    }
    Ok(p)
}

impl EEProblem {
    pub fn new(
        params: EEParams,
        f: Polynomial<f64>,
        g: Polynomial<f64>,
        k_max: u32,
        m_max: u32,
    ) -> Result<Self, EeError> {
        let (h1, h2) = constraint_coeffs(&params)?;
        if k_max == 0 || m_max == 0 {
            return Err(EeError::EmptyRange);
        }
        let prob = EEProblem {
            params,
            f,
            g,
            h1,
            h2,
            k_max,
            m_max,
            source: None,
        };
        prob.check_denominator()?;
        Ok(prob)
    }

    pub fn is_feasible(&self, k: f64, m: f64) -> bool {
        let x = [k, m];
        k >= 1.0
            && m >= 1.0
            && k <= self.k_max as f64
            && m <= self.m_max as f64
            && self.h1.eval(&x).unwrap() >= 0.0
            && self.h2.eval(&x).unwrap() >= 0.0
    }

    pub fn ee(&self, k: f64, m: f64) -> f64 {
        let x = [k, m];
        self.f.eval(&x).unwrap() / self.g.eval(&x).unwrap()
    }

    fn check_denominator(&self) -> Result<(), EeError> {
        let bad = (1..=self.k_max).into_par_iter().find_map_first(|k| {
            (1..=self.m_max).find_map(|m| {
                let (kf, mf) = (k as f64, m as f64);
                if !self.is_feasible(kf, mf) {
                    return None;
                }
                let v = self.g.eval(&[kf, mf]).unwrap();
                (v <= 0.0).then_some((k, m, v))
            })
        });
        match bad {
            Some((k, m, value)) => Err(EeError::NonPositiveDenominator { k, m, value }),
            None => Ok(()),
        }
    }

    /// Affine map `(K, M) = shift + factor ∘ u` taking `[-1, 1]²` onto the grid box.
    pub fn variable_map(&self) -> ([f64; 2], [f64; 2]) {
        let half = |hi: u32| {
            let hi = hi as f64;
            ((1.0 + hi) / 2.0, ((hi - 1.0) / 2.0).max(0.5))
        };
        let (ck, rk) = half(self.k_max);
        let (cm, rm) = half(self.m_max);
        ([ck, cm], [rk, rm])
    }

    pub fn to_original(&self, u: &[f64]) -> (f64, f64) {
        let (c, r) = self.variable_map();
        (c[0] + r[0] * u[0], c[1] + r[1] * u[1])
    }

    /// The problem in `u ∈ [-1, 1]²` (see [`EEProblem::variable_map`]) with
    /// `1 − u_i² ≥ 0` as explicit constraints. Every polynomial is divided by
    /// a positive constant, so the ratio and the feasible set are unchanged.
    pub fn scaled_fractional(&self) -> FractionalProblem<f64> {
        let (shift, factor) = self.variable_map();
        let max_coef = |p: &Polynomial<f64>| p.terms().fold(0.0f64, |a, (_, c)| a.max(c.abs()));
        let normalize = |p: Polynomial<f64>| {
            let m = max_coef(&p);
            p.scale(1.0 / m)
        };
        let sub = |p: &Polynomial<f64>| p.affine_substitute(&shift, &factor).unwrap();
        let fs = sub(&self.f);
        let gs = sub(&self.g);
        let gmax = max_coef(&gs);
        let one = Polynomial::constant(2, 1.0);
        let box_h = |i: usize| {
            let u = Polynomial::var(2, i);
            &one - &(&u * &u)
        };
        let constraints = vec![normalize(sub(&self.h1)), normalize(sub(&self.h2)), box_h(0), box_h(1)];
        FractionalProblem::new(fs.scale(1.0 / gmax), gs.scale(1.0 / gmax), constraints)
            .expect("nonzero denominator")
    }
}

pub fn load_objective(cfg: &EeConfig) -> Result<EEProblem, EeError> {
    let p = &cfg.params;
    let mut params = EEParams {
        gamma: p.gamma,
        tau: p.tau,
        alpha: p.alpha,
        snr: snr_to_linear(p.snr, p.snr_unit),
        bandwidth_hz: p.bandwidth_hz,
        bs_density: p.bs_density,
    };
    params.validate()?;
    let f = coefficient_poly("f", &cfg.objective.f, &NUMERATOR_SUPPORT)?;
    let g = coefficient_poly("g", &cfg.objective.g, &DENOMINATOR_SUPPORT)?;
    let grid = cfg.grid.clone().unwrap_or(GridDoc {
        k_max: None,
        m_max: None,
    });
    let k_max = grid.k_max.unwrap_or(params.tau.floor() as u32);
    let m_max = grid.m_max.unwrap_or(DEFAULT_M_MAX);
    params.bandwidth_hz = p.bandwidth_hz;
    let mut prob = EEProblem::new(params, f, g, k_max, m_max)?;
    prob.source = cfg.source.clone();
    Ok(prob)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "EE")]
    pub ee: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearch {
    pub best: GridPoint,
    /// Every evaluated point, ordered by `K` then `M`.
    pub points: Vec<GridPoint>,
}

/// Integer maximizer over the ranges; ties go to the smallest `K`, then `M`.
pub fn exhaustive_search(
    prob: &EEProblem,
    k_range: RangeInclusive<u32>,
    m_range: RangeInclusive<u32>,
) -> Result<GridSearch, EeError> {
    if k_range.is_empty() || m_range.is_empty() {
        return Err(EeError::EmptyRange);
    }
    let points: Vec<GridPoint> = k_range
        .into_par_iter()
        .flat_map_iter(|k| {
            m_range.clone().map(move |m| {
                let (kf, mf) = (k as f64, m as f64);
                GridPoint {
                    k,
                    m,
                    ee: prob.ee(kf, mf),
                    feasible: prob.is_feasible(kf, mf),
                }
            })
        })
        .collect();
    let mut best: Option<GridPoint> = None;
    for p in points.iter().filter(|p| p.feasible) {
        if best.is_none_or(|b| p.ee > b.ee) {
            best = Some(*p);
        }
    }
    let best = best.ok_or(EeError::EmptyFeasibleGrid)?;
    Ok(GridSearch { best, points })
}

#[derive(Clone, Debug)]
pub struct EeOptions {
    pub d: usize,
    pub dinkelbach: DinkelbachOptions,
    /// Run the exhaustive grid oracle and report `ε`.
    pub oracle: bool,
}

impl Default for EeOptions {
    fn default() -> Self {
        EeOptions {
            d: DEFAULT_ORDER,
            dinkelbach: DinkelbachOptions::default(),
            oracle: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rounding {
    /// Coordinate-wise nearest integer.
    pub nearest: (i64, i64),
    pub nearest_feasible: bool,
    /// `nearest` if feasible, else the best feasible axis neighbour.
    pub chosen: Option<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct EeSolution {
    /// `(K̂, M̂)` in original units.
    pub continuous: (f64, f64),
    pub ee_continuous: f64,
    pub rounding: Rounding,
    pub ee_rounded: Option<f64>,
    pub dinkelbach: DinkelbachResult<f64>,
    pub oracle: Option<GridSearch>,
    /// `1 − EE(rounded)/EE(grid optimum)`.
    pub epsilon: Option<f64>,
}

impl EeSolution {
    pub fn certified(&self) -> bool {
        self.dinkelbach.certified && self.rounding.chosen.is_some()
    }
}

pub fn round_solution(prob: &EEProblem, k: f64, m: f64) -> Rounding {
    let nearest = (k.round() as i64, m.round() as i64);
    let feasible = |(a, b): (i64, i64)| {
        a >= 1
            && b >= 1
            && a <= prob.k_max as i64
            && b <= prob.m_max as i64
            && prob.is_feasible(a as f64, b as f64)
    };
    let nearest_feasible = feasible(nearest);
    let chosen = if nearest_feasible {
        Some(nearest)
    } else {
        let (a, b) = nearest;
        let mut best: Option<((i64, i64), f64)> = None;
        for cand in [(a - 1, b), (a, b - 1), (a, b + 1), (a + 1, b)] {
            if !feasible(cand) {
                continue;
            }
            let v = prob.ee(cand.0 as f64, cand.1 as f64);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((cand, v));
            }
        }
        best.map(|(c, _)| c)
    };
    Rounding {
        nearest,
        nearest_feasible,
        chosen: chosen.map(|(a, b)| (a as u32, b as u32)),
    }
}

pub fn solve_ee(prob: &EEProblem, opts: &EeOptions) -> Result<EeSolution, EeError> {
    let frac = prob.scaled_fractional();
    let dopts = DinkelbachOptions {
        d: Some(opts.d),
        ..opts.dinkelbach.clone()
    };
    let res = dinkelbach::solve(&frac, &dopts)?;
    let (k, m) = prob.to_original(&res.x);
    let rounding = round_solution(prob, k, m);
    let ee_rounded = rounding.chosen.map(|(a, b)| prob.ee(a as f64, b as f64));
    let oracle = if opts.oracle {
        Some(exhaustive_search(prob, 1..=prob.k_max, 1..=prob.m_max)?)
    } else {
        None
    };
    let epsilon = match (&oracle, ee_rounded) {
        (Some(o), Some(v)) => Some(1.0 - v / o.best.ee),
        _ => None,
    };
    Ok(EeSolution {
        continuous: (k, m),
        ee_continuous: prob.ee(k, m),
        rounding,
        ee_rounded,
        dinkelbach: res,
        oracle,
        epsilon,
    })
}
