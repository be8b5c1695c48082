use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Ideal,
    /// `(1−p)ρ + p·I/2ⁿ` on the whole register after every gate.
    GlobalDepolarising,
    /// Depolarising on the gate's qubits, then optional thermal relaxation.
    Local,
}

/// Amplitude damping plus dephasing applied to each qubit a gate touches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thermal {
    /// T1 per qubit in µs; a single entry applies to every qubit.
    pub t1: Vec<f64>,
    /// T2 per qubit in µs; a single entry applies to every qubit.
    pub t2: Vec<f64>,
    /// Single-qubit gate duration in µs.
    #[serde(default = "Thermal::default_dur1")]
    pub dur1: f64,
    /// Two-qubit gate duration in µs.
    #[serde(default = "Thermal::default_dur2")]
    pub dur2: f64,
}

impl Thermal {
    fn default_dur1() -> f64 {
        0.035
    }

    fn default_dur2() -> f64 {
        0.3
    }

    pub fn new(t1: Vec<f64>, t2: Vec<f64>) -> Thermal {
        Thermal {
            t1,
            t2,
            dur1: Self::default_dur1(),
            dur2: Self::default_dur2(),
        }
    }

    pub(crate) fn times(&self, q: usize) -> (f64, f64) {
        let pick = |v: &[f64]| if v.len() == 1 { v[0] } else { v[q] };
        (pick(&self.t1), pick(&self.t2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub mode: NoiseMode,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<Thermal>,
    /// Per-qubit confusion matrices, `readout[q][read][true]`; columns sum to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<Vec<[[f64; 2]; 2]>>,
}

impl NoiseModel {
    pub fn ideal() -> NoiseModel {
        NoiseModel {
            mode: NoiseMode::Ideal,
            p1: 0.0,
            p2: 0.0,
            thermal: None,
            readout: None,
        }
    }

    pub fn global(p1: f64, p2: f64) -> NoiseModel {
        NoiseModel {
            mode: NoiseMode::GlobalDepolarising,
            p1,
            p2,
            ..Self::ideal()
        }
    }

    pub fn local(p1: f64, p2: f64) -> NoiseModel {
        NoiseModel {
            mode: NoiseMode::Local,
            p1,
            p2,
            ..Self::ideal()
        }
    }

    pub fn with_thermal(mut self, thermal: Thermal) -> NoiseModel {
        self.thermal = Some(thermal);
        self
    }

    pub fn with_readout(mut self, readout: Vec<[[f64; 2]; 2]>) -> NoiseModel {
        self.readout = Some(readout);
        self
    }

    /// Whether gate noise is present (readout alone does not count).
    pub fn is_noisy(&self) -> bool {
        self.mode != NoiseMode::Ideal
    }

    /// Check the model for a register of `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation {
                    key: format!("noise.{name}"),
                    message: format!("probability {p} outside [0, 1]"),
                });
            }
        }
        if let Some(th) = &self.thermal {
            if self.mode != NoiseMode::Local {
                return Err(Error::Validation {
                    key: "noise.thermal".into(),
                    message: "thermal relaxation is only supported in local mode".into(),
                });
            }
            for (name, v) in [("t1", &th.t1), ("t2", &th.t2)] {
                if v.len() != 1 && v.len() < n {
                    return Err(Error::Validation {
                        key: format!("noise.thermal.{name}"),
                        message: format!("need 1 or at least {n} entries, got {}", v.len()),
                    });
                }
                if v.iter().any(|&t| !(t > 0.0)) {
                    return Err(Error::Validation {
                        key: format!("noise.thermal.{name}"),
                        message: "times must be positive".into(),
                    });
                }
            }
            for q in 0..n {
                let (t1, t2) = th.times(q);
                if t2 > 2.0 * t1 {
                    return Err(Error::Validation {
                        key: "noise.thermal.t2".into(),
                        message: format!("qubit {q}: t2 = {t2} exceeds 2·t1 = {}", 2.0 * t1),
                    });
                }
            }
            if !(th.dur1 >= 0.0 && th.dur2 >= 0.0) {
                return Err(Error::Validation {
                    key: "noise.thermal".into(),
                    message: "gate durations must be non-negative".into(),
                });
            }
        }
        if let Some(ro) = &self.readout {
            if ro.len() < n {
                return Err(Error::Validation {
                    key: "noise.readout".into(),
                    message: format!("need at least {n} confusion matrices, got {}", ro.len()),
                });
            }
            for (q, m) in ro.iter().enumerate() {
                for t in 0..2 {
                    let col = m[0][t] + m[1][t];
                    if (col - 1.0).abs() > 1e-9 || m[0][t] < 0.0 || m[1][t] < 0.0 {
                        return Err(Error::Validation {
                            key: format!("noise.readout[{q}]"),
                            message: format!("column {t} is not a probability vector"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
