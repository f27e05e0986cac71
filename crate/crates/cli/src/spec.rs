//! The JSON run specification.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zenerwave::inversion::QuadratureConfig;
use zenerwave::modulus::log_grid;
use zenerwave::params::DEFAULT_TD1_TOL;
use zenerwave::{BoundarySignal, MaterialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Modulus,
    Kernel,
    Simulate,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either explicit points or `count` points from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        let v = match self {
            Grid::Points(v) => v.clone(),
            Grid::Range { start, stop, count, spacing } => {
                let (a, b, n) = (*start, *stop, *count);
                if n == 0 || !(a.is_finite() && b.is_finite()) {
                    return Err(format!("bad range {a}..{b} with {n} points"));
                }
                match spacing {
                    Spacing::Log if a > 0.0 && b > 0.0 => log_grid(a, b, n),
                    Spacing::Log => return Err("log spacing needs positive bounds".into()),
                    Spacing::Linear if n == 1 => vec![a],
                    Spacing::Linear => (0..n)
                        .map(|k| {
                            if k + 1 == n {
                                b
                            } else {
                                a + (b - a) * k as f64 / (n - 1) as f64
                            }
                        })
                        .collect(),
                }
            }
        };
        if v.is_empty() {
            return Err("grid is empty".into());
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("grid must be strictly increasing".into());
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindingBlock {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub samples: usize,
}

impl Default for WindingBlock {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            r: 1e3,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulusBlock {
    pub omega: Grid,
    pub winding: WindingBlock,
}

impl Default for ModulusBlock {
    fn default() -> Self {
        Self {
            omega: Grid::Range {
                start: 1e-3,
                stop: 1e3,
                count: 600,
                spacing: Spacing::Log,
            },
            winding: WindingBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub xs: Grid,
    pub ts: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleBlock {
    pub dt: f64,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self { dt: 1e-3 }
    }
}

fn default_td1_tol() -> f64 {
    DEFAULT_TD1_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    pub params: MaterialParams,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Echoed into the manifest; every computation here is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_td1_tol")]
    pub td1_tol: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub modulus: ModulusBlock,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub signal: Option<BoundarySignal>,
    #[serde(default)]
    pub oracle: OracleBlock,
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
