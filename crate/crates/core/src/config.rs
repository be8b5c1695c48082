//! Benchmark configuration: a TOML document with strict keys and resolved
//! defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::benchmark::CircuitClass;
use crate::circuit::{GateName, PauliOperator, PauliString, Target};
use crate::error::{Error, Result};
use crate::mitigation::{CdrConfig, ZneConfig};
use crate::sim::{NoiseModel, MAX_IDEAL_QUBITS, MAX_NOISY_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    Zne,
    Cdr,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Zne => "zne",
            Method::Cdr => "cdr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Finite shots drawn from the noisy distribution.
    #[default]
    Sampled,
    /// Exact noisy expectation values.
    InfiniteShot,
}

/// `"global_z"` or an explicit Pauli string such as `"ZIZ"`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ObservableSpec {
    #[default]
    GlobalZ,
    Pauli(PauliString),
}

impl ObservableSpec {
    pub fn resolve(&self, n: usize) -> Result<PauliOperator> {
        match self {
            ObservableSpec::GlobalZ => Ok(PauliOperator::global_z(n)),
            ObservableSpec::Pauli(p) if p.len() == n => Ok(PauliOperator::single(p.clone())),
            ObservableSpec::Pauli(p) => Err(Error::Validation {
                key: "observable".into(),
                message: format!("Pauli string {p} has width {} but the grid has width {n}", p.len()),
            }),
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableSpec::GlobalZ => f.write_str("global_z"),
            ObservableSpec::Pauli(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for ObservableSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "global_z" {
            Ok(ObservableSpec::GlobalZ)
        } else {
            Ok(ObservableSpec::Pauli(s.parse()?))
        }
    }
}

impl Serialize for ObservableSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObservableSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTarget {
    /// All-to-all coupling with `{CX, Rz, SX, X}`.
    AllToAll,
    /// Seven-qubit heavy-hex coupling with `{CX, Rz, SX, X}`.
    Lagos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTarget {
    /// Undirected edges; empty means all-to-all.
    #[serde(default)]
    pub coupling: Vec<[usize; 2]>,
    pub native_gates: Vec<GateName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(NamedTarget),
    Custom(CustomTarget),
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::Named(NamedTarget::AllToAll)
    }
}

impl TargetSpec {
    pub fn resolve(&self) -> Result<Target> {
        match self {
            TargetSpec::Named(NamedTarget::AllToAll) => Ok(Target::all_to_all(Target::ibm_native())),
            TargetSpec::Named(NamedTarget::Lagos) => Ok(Target::lagos()),
            TargetSpec::Custom(c) if c.coupling.is_empty() => Ok(Target::all_to_all(c.native_gates.iter().copied())),
            TargetSpec::Custom(c) => Target::new(
                c.coupling.iter().map(|e| (e[0], e[1])),
                c.native_gates.iter().copied(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Shots per circuit for each mitigation method.
    #[serde(default = "Budgets::default_mitigated")]
    pub mitigated: u64,
    /// Shots per circuit for the unmitigated estimate.
    #[serde(default = "Budgets::default_unmitigated")]
    pub unmitigated: u64,
    /// Multiplier applied to both budgets.
    #[serde(default = "Budgets::default_scale")]
    pub scale: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            mitigated: Self::default_mitigated(),
            unmitigated: Self::default_unmitigated(),
            scale: Self::default_scale(),
        }
    }
}

impl Budgets {
    fn default_mitigated() -> u64 {
        500_000
    }

    fn default_unmitigated() -> u64 {
        100_000
    }

    fn default_scale() -> f64 {
        1.0
    }

    fn scaled(v: u64, scale: f64) -> u64 {
        ((v as f64 * scale).round() as u64).max(1)
    }

    pub fn effective_mitigated(&self) -> u64 {
        Self::scaled(self.mitigated, self.scale)
    }

    pub fn effective_unmitigated(&self) -> u64 {
        Self::scaled(self.unmitigated, self.scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub seed: u64,
    /// Cells as `[n, d]` pairs.
    pub grid: Vec<[usize; 2]>,
    #[serde(default = "BenchmarkConfig::default_circuits")]
    pub circuits_per_cell: usize,
    #[serde(default)]
    pub observable: ObservableSpec,
    #[serde(default = "BenchmarkConfig::default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub evaluation: Evaluation,
    /// Accepted range of the ideal `|⟨O⟩|` for unmirrored circuits.
    #[serde(default = "BenchmarkConfig::default_filter")]
    pub filter_range: [f64; 2],
    /// Candidate draws allowed per requested circuit.
    #[serde(default = "BenchmarkConfig::default_attempts")]
    pub max_attempts: usize,
    /// `λ` of the ratio normality check attached to every record.
    #[serde(default = "BenchmarkConfig::default_normality")]
    pub normality_threshold: f64,
    pub class: CircuitClass,
    pub noise: NoiseModel,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub zne: ZneConfig,
    #[serde(default)]
    pub cdr: CdrConfig,
}

impl BenchmarkConfig {
    fn default_circuits() -> usize {
        10
    }

    fn default_methods() -> Vec<Method> {
        vec![Method::None, Method::Zne, Method::Cdr]
    }

    fn default_filter() -> [f64; 2] {
        [0.4, 0.6]
    }

    fn default_attempts() -> usize {
        10_000
    }

    fn default_normality() -> f64 {
        crate::oracles::DEFAULT_NORMALITY_THRESHOLD
    }

    /// Parse and validate a TOML document.
    pub fn from_toml(text: &str) -> Result<BenchmarkConfig> {
        let cfg: BenchmarkConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn target(&self) -> Result<Target> {
        self.target.resolve()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Err(Error::Validation { key: key.into(), message });
        if self.grid.is_empty() {
            return bad("grid", "at least one cell is required".into());
        }
        let noisy = self.noise.is_noisy();
        let limit = if noisy { MAX_NOISY_QUBITS } else { MAX_IDEAL_QUBITS };
        let target = self.target().map_err(|e| Error::Validation {
            key: "target".into(),
            message: e.to_string(),
        })?;
        let device = if target.is_all_to_all() { usize::MAX } else { target.vertices().len() };
        for (i, &[n, d]) in self.grid.iter().enumerate() {
            let key = format!("grid[{i}]");
            if n < 2 || d < 1 {
                return bad(&key, format!("need n ≥ 2 and d ≥ 1, got [{n}, {d}]"));
            }
            if n > limit {
                let what = if noisy { "noisy" } else { "ideal" };
                return bad(&key, format!("width {n} exceeds the {what} simulation limit of {limit} qubits"));
            }
            if n > device {
                return bad(&key, format!("width {n} exceeds the {device} target qubits"));
            }
            if self.class.mirrored && d % 2 == 1 {
                return bad(&key, format!("mirrored circuits need an even depth, got {d}"));
            }
            self.observable.resolve(n)?;
        }
        for (key, seed) in [("seed", self.seed), ("zne.seed", self.zne.seed), ("cdr.seed", self.cdr.seed)] {
            if seed > i64::MAX as u64 {
                return bad(key, format!("seed {seed} exceeds 2^63 − 1"));
            }
        }
        if self.circuits_per_cell == 0 {
            return bad("circuits_per_cell", "must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("methods", "at least one method is required".into());
        }
        let [lo, hi] = self.filter_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return bad("filter_range", format!("need 0 ≤ lo ≤ hi ≤ 1, got [{lo}, {hi}]"));
        }
        if self.max_attempts == 0 {
            return bad("max_attempts", "must be positive".into());
        }
        if !(self.normality_threshold > 0.0 && self.normality_threshold < 1.0) {
            return bad("normality_threshold", "must lie in (0, 1)".into());
        }
        let b = &self.budgets;
        if !(b.scale > 0.0 && b.scale.is_finite()) {
            return bad("budgets.scale", "must be positive".into());
        }
        if self.evaluation == Evaluation::Sampled && (b.mitigated == 0 || b.unmitigated == 0) {
            return bad("budgets", "budgets must be positive for sampled evaluation".into());
        }
        let max_n = self.grid.iter().map(|c| c[0]).max().unwrap_or(0);
        self.noise.validate(max_n)?;
        if self.methods.contains(&Method::Zne) {
            self.zne.validate()?;
            if b.effective_mitigated() < self.zne.lambdas.len() as u64 {
                return bad("budgets.mitigated", "smaller than the number of noise scales".into());
            }
        }
        if self.methods.contains(&Method::Cdr) {
            self.cdr.validate()?;
            if b.effective_mitigated() < self.cdr.n_training as u64 + 1 {
                return bad("budgets.mitigated", "smaller than cdr.n_training + 1".into());
            }
        }
        Ok(())
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, column)
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<BenchmarkConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BenchmarkConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::CircuitKind;
    use crate::mitigation::FitModel;

    const MINIMAL: &str = r#"
grid = [[2, 2], [3, 2]]

[class]
kind = "random_su4"

[noise]
mode = "local"
p1 = 0.001
p2 = 0.01
"#;

    #[test]
    fn minimal_defaults() {
        let c = BenchmarkConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.zne.lambdas, vec![1, 3, 5, 7, 9]);
        assert_eq!(c.zne.fit, FitModel::Exponential);
        assert_eq!((c.cdr.n_non_clifford, c.cdr.n_pairs, c.cdr.n_training), (10, 1, 20));
        assert_eq!(c.filter_range, [0.4, 0.6]);
        assert_eq!(c.class.kind, CircuitKind::RandomSu4);
        assert_eq!(c.observable, ObservableSpec::GlobalZ);
        assert_eq!(c.budgets.effective_mitigated(), 500_000);
    }

    #[test]
    fn round_trip() {
        let c = BenchmarkConfig::from_toml(MINIMAL).unwrap();
        let again = BenchmarkConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        let custom = MINIMAL.replace("grid", "observable = \"ZX\"\ntarget = { coupling = [[0, 1], [1, 2]], native_gates = [\"CX\", \"Rz\", \"SX\"] }\ngrid").replace("[3, 2]", "[2, 4]");
        let c = BenchmarkConfig::from_toml(&custom).unwrap();
        assert_eq!(c, BenchmarkConfig::from_toml(&c.to_toml().unwrap()).unwrap());
    }

    #[test]
    fn width_limit_named() {
        let e = BenchmarkConfig::from_toml(&MINIMAL.replace("[3, 2]", "[9, 2]")).unwrap_err();
        match e {
            Error::Validation { key, message } => {
                assert_eq!(key, "grid[1]");
                assert!(message.contains("limit of 7"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_named() {
        let e = BenchmarkConfig::from_toml(&format!("shotz = 5\n{MINIMAL}")).unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert!(message.contains("shotz"), "{message}");
                assert_eq!(line, 1);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let e = BenchmarkConfig::from_toml("grid = [[2, 2]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1 | 2, .. }), "{e}");
    }
}
