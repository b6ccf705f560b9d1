//! Problem descriptions read from JSON or assembled from flags.

use std::f64::consts::PI;

use qdirac::{BoundarySpec, HahnParams, Polynomial, Potentials, RealFunction};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL_SERIES: f64 = 1e-12;
pub const DEFAULT_TOL_PICARD: f64 = 1e-10;
pub const DEFAULT_TOL_ROOT: f64 = 1e-10;
pub const DEFAULT_N_MAX: usize = 4;

/// A real number, or the literal `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealOrPi", into = "f64")]
pub struct Real(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum RealOrPi {
    Num(f64),
    Text(String),
}

impl TryFrom<RealOrPi> for Real {
    type Error = String;

    fn try_from(v: RealOrPi) -> Result<Self, String> {
        match v {
            RealOrPi::Num(x) => Ok(Real(x)),
            RealOrPi::Text(s) => parse_real(&s).map(Real),
        }
    }
}

impl From<Real> for f64 {
    fn from(r: Real) -> f64 {
        r.0
    }
}

/// Parses a float; `pi` (any case) expands to the full-precision constant.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "pi" | "π" => Ok(PI),
        "-pi" | "-π" => Ok(-PI),
        _ => t.parse::<f64>().map_err(|e| format!("`{s}` is not a real number: {e}")),
    }
}

/// A potential: a constant or a polynomial in ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant(f64),
    Poly(Vec<f64>),
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Constant(0.0)
    }
}

impl PotentialSpec {
    /// `0.3` is a constant; `0.3,-0.1,0.02` lists ascending coefficients.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s.split(',').map(parse_real).collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [] => Err("empty potential".into()),
            [c] => Ok(PotentialSpec::Constant(*c)),
            _ => Ok(PotentialSpec::Poly(parts)),
        }
    }

    pub fn to_function(&self, omega0: f64) -> Result<RealFunction, String> {
        match self {
            PotentialSpec::Constant(c) if c.is_finite() => Ok(RealFunction::constant(*c)),
            PotentialSpec::Poly(cs) if !cs.is_empty() && cs.iter().all(|c| c.is_finite()) => {
                Ok(Polynomial::new(cs.clone()).to_function(omega0))
            }
            other => Err(format!("invalid potential {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsConfig {
    #[serde(default)]
    pub p: PotentialSpec,
    #[serde(default)]
    pub r: PotentialSpec,
}

impl PotentialsConfig {
    pub fn build(&self, params: &HahnParams) -> Result<Potentials, String> {
        Ok(Potentials::new(
            self.p.to_function(params.omega0())?,
            self.r.to_function(params.omega0())?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_series")]
    pub series: f64,
    #[serde(default = "default_picard")]
    pub picard: f64,
    #[serde(default = "default_root")]
    pub root: f64,
}

fn default_series() -> f64 {
    DEFAULT_TOL_SERIES
}

fn default_picard() -> f64 {
    DEFAULT_TOL_PICARD
}

fn default_root() -> f64 {
    DEFAULT_TOL_ROOT
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            series: DEFAULT_TOL_SERIES,
            picard: DEFAULT_TOL_PICARD,
            root: DEFAULT_TOL_ROOT,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), String> {
        for (name, v) in [("series", self.series), ("picard", self.picard), ("root", self.root)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} tolerance must be a positive number, got {v}"));
            }
        }
        Ok(())
    }
}

/// A complete boundary-value problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub q: f64,
    pub omega: f64,
    pub a: Real,
    /// `[k11, k12, k21, k22]`.
    pub bc: [f64; 4],
    #[serde(default)]
    pub potentials: PotentialsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

/// Everything a spectrum run needs, validated.
pub struct Problem {
    pub params: HahnParams,
    pub bc: BoundarySpec,
    pub potentials: Potentials,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid problem config: {e}"))
    }

    pub fn build(&self) -> Result<Problem, String> {
        self.tolerances.validate()?;
        if self.n_max == 0 {
            return Err("n_max must be >= 1".into());
        }
        let params = HahnParams::new(self.q, self.omega).map_err(|e| e.to_string())?;
        let [k11, k12, k21, k22] = self.bc;
        let bc = BoundarySpec::new(k11, k12, k21, k22, self.a.0, &params).map_err(|e| e.to_string())?;
        let potentials = self.potentials.build(&params)?;
        Ok(Problem { params, bc, potentials })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_is_accepted_literally() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real(" PI ").unwrap(), PI);
        assert_eq!(parse_real("2.75").unwrap(), 2.75);
        assert!(parse_real("three").is_err());
    }

    #[test]
    fn parses_full_config() {
        let cfg = ProblemConfig::from_json(
            r#"{"q": 0.5, "omega": 0.5, "a": "pi", "bc": [1, 0, 0, 1],
                "potentials": {"p": {"constant": 0.25}, "r": {"poly": [0.1, -0.05]}},
                "tolerances": {"root": 1e-11}, "n_max": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.a.0, PI);
        assert_eq!(cfg.tolerances.series, DEFAULT_TOL_SERIES);
        assert_eq!(cfg.tolerances.root, 1e-11);
        assert_eq!(cfg.potentials.r, PotentialSpec::Poly(vec![0.1, -0.05]));
        let problem = cfg.build().unwrap();
        assert_eq!(problem.potentials.p.eval(7.0), 0.25);
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ProblemConfig::from_json(r#"{"q": 0.5, "omega": 1, "a": 5, "bc": [0, 1, 0, 1]}"#).unwrap();
        assert_eq!(cfg.n_max, DEFAULT_N_MAX);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.potentials, PotentialsConfig::default());
    }

    #[test]
    fn rejects_invalid_problems() {
        let bad_q = ProblemConfig::from_json(r#"{"q": 1.5, "omega": 1, "a": 5, "bc": [0, 1, 0, 1]}"#).unwrap();
        assert!(bad_q.build().err().unwrap().contains("(0,1)"));
        let bad_bc = ProblemConfig::from_json(r#"{"q": 0.5, "omega": 1, "a": 5, "bc": [0, 0, 0, 1]}"#).unwrap();
        assert!(bad_bc.build().is_err());
        assert!(ProblemConfig::from_json(r#"{"q": 0.5}"#).is_err());
        assert!(ProblemConfig::from_json(r#"{"q": 0.5, "omega": 1, "a": "tau", "bc": [0, 1, 0, 1]}"#).is_err());
    }

    #[test]
    fn potential_flags() {
        assert_eq!(PotentialSpec::parse("0").unwrap(), PotentialSpec::Constant(0.0));
        assert_eq!(
            PotentialSpec::parse("1,2").unwrap(),
            PotentialSpec::Poly(vec![1.0, 2.0])
        );
        assert!(PotentialSpec::parse("1,x").is_err());
    }
}
