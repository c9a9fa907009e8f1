//! Run configuration: a JSON file, command-line flags, or both (flags win).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use sphere_su2::families::Sign;
use sphere_su2::Scalar;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// SU(2) check, metric and class flags of a natural structure
    Classify,
    /// Induced metric, complex structures and preservation flags
    Metric,
    /// Type I structure from a point (X, Y, A, B) of the parameter surface
    SolveType1,
    /// Type I nearly-hypo structure from (b0, b1, b2)
    SolveType1Nh,
    /// Sasaki-Einstein family member at K = 9 s^2
    SolveSe,
    /// Type II double-hypo structure
    SolveType2,
    /// Closed-form flat evolution and its SU(3) lift
    EvolveFlat,
    /// RK4 integration of the evolution flow with constant P
    EvolveNumeric,
    /// Coordinate oracle on the flat model: structure equations
    VerifyOracle,
    /// Coordinate oracle on the flat model: closed SU(3) lift
    VerifySu3,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Metric => "metric",
            Command::SolveType1 => "solve-type1",
            Command::SolveType1Nh => "solve-type1-nh",
            Command::SolveSe => "solve-se",
            Command::SolveType2 => "solve-type2",
            Command::EvolveFlat => "evolve-flat",
            Command::EvolveNumeric => "evolve-numeric",
            Command::VerifyOracle => "verify-oracle",
            Command::VerifySu3 => "verify-su3",
        }
    }

    /// Config keys the command accepts besides `command`, `tol` and `out`.
    pub fn fields(self) -> &'static [&'static str] {
        const STRUCTURE: &[&str] = &["p", "a", "b", "c", "K", "s", "s2"];
        match self {
            Command::Classify | Command::Metric => STRUCTURE,
            Command::SolveType1 => &["X", "Y", "A", "B", "K", "s", "s2"],
            Command::SolveType1Nh => &["b0", "b1", "b2", "K", "s", "s2"],
            Command::SolveSe => &["b2", "sign_q", "s", "s2"],
            Command::SolveType2 => &["a0", "a2", "a3", "p", "b0", "sign_b1", "K", "s", "s2"],
            Command::EvolveFlat => {
                &["p", "a4", "b0", "c0", "b4", "c4", "b5", "c5", "s", "s2", "t0", "t_end", "step", "csv"]
            }
            Command::EvolveNumeric => {
                &["p", "a3", "b0", "b1", "b2", "c0", "c1", "c2", "K", "s", "s2", "t0", "t_end", "step", "csv"]
            }
            Command::VerifyOracle | Command::VerifySu3 => &["samples", "seed"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Four coefficients (q0, q1, q2, q3) of α0, α1, α2, dθ.
#[derive(Clone, Debug, PartialEq)]
pub struct Quad4(pub [Scalar; 4]);

impl FromStr for Quad4 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 comma-separated coefficients, got {}", parts.len()));
        }
        let mut out = Vec::with_capacity(4);
        for p in parts {
            out.push(p.parse::<Scalar>().map_err(|e| e.to_string())?);
        }
        Ok(Quad4(out.try_into().expect("four entries")))
    }
}

impl Serialize for Quad4 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Quad4 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            List(Box<[Scalar; 4]>),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::List(q) => Ok(Quad4(*q)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Everything one invocation needs. Every field is optional so that a
/// config file and flags can be merged; the selected command decides which
/// fields are required.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Command to run
    #[arg(value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,

    /// RNG seed for sampling commands
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of oracle sample points
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Absolute tolerance for float comparisons
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Write the trajectory of an evolve command as CSV
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,

    /// Contact coefficient p (θ̃ = -2pθ)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Scalar>,
    /// Coefficients of ω1 as "a0,a1,a2,a3"
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Quad4>,
    /// Coefficients of ω2 as "b0,b1,b2,b3"
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Quad4>,
    /// Coefficients of ω3 as "c0,c1,c2,c3"
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Quad4>,
    /// Sectional curvature of the base
    #[arg(long = "K", allow_hyphen_values = true)]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<Scalar>,
    /// Sphere radius
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Scalar>,
    /// Squared sphere radius (alternative to s)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<Scalar>,

    /// Type I surface coordinate X
    #[arg(long = "X", allow_hyphen_values = true)]
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub x_param: Option<Scalar>,
    /// Type I surface coordinate Y
    #[arg(long = "Y", allow_hyphen_values = true)]
    #[serde(rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y_param: Option<Scalar>,
    /// Type I surface coordinate A
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a_param: Option<Scalar>,
    /// Type I surface coordinate B (> 0)
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b_param: Option<Scalar>,

    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a3: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a4: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b4: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b5: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c4: Option<Scalar>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c5: Option<Scalar>,
    /// Sign of Q in the Sasaki-Einstein family (+ or -)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_q: Option<Sign>,
    /// Sign of b1 in the type II solver (+ or -)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_b1: Option<Sign>,

    /// Start time of an evolve command
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// End time of an evolve command
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// RK4 step size
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Field-wise overlay: every field set in `flags` replaces the one here.
    pub fn merged(&self, flags: &RunConfig) -> Result<Self, CliError> {
        let mut base = match self.to_value() {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        if let Value::Object(top) = flags.to_value() {
            base.extend(top);
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks the payload against the selected command before dispatch.
    pub fn validate(&self) -> Result<Command, CliError> {
        let cmd = self.command.ok_or_else(|| CliError::Config("no command given".into()))?;
        let allowed = cmd.fields();
        if let Value::Object(m) = self.to_value() {
            for key in m.keys() {
                if !matches!(key.as_str(), "command" | "tol" | "out") && !allowed.contains(&key.as_str()) {
                    return Err(CliError::Config(format!("field {key:?} is not used by {cmd}")));
                }
            }
        }
        if self.s.is_some() && self.s2.is_some() {
            return Err(CliError::Config("give s or s2, not both".into()));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Config(format!("tol must be a finite non-negative number (got {t})")));
            }
        }
        Ok(cmd)
    }
}
