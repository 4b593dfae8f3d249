//! Sweep configuration files.
//!
//! A config is TOML describing one labeled curve: the sweep axis plus the
//! same fields a [`SweepTemplate`] carries. Example:
//!
//! ```toml
//! label = "corrected_r5"
//! trials = 50
//! seed = 7
//! axis = { start = 1, end = 57, step = 4 }
//!
//! [matrix]
//! rows = 128
//! kind = "extended"
//! data_cols = 256
//! normalize = true
//!
//! [signal]
//! block_sparsity = ["axis"]
//! error_sparsity = 5
//!
//! [decoder]
//! algorithm = "lgga"
//! block_weights = [1.0, 1.7]
//! ```
//!
//! `greedy` and `solver` tables are optional and default to the standard
//! decoder knobs; sparsity entries accept a number, the string `"axis"`,
//! `{ axis_minus = c }` or `{ const_minus_axis = c }`.

use super::SweepTemplate;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_step() -> usize {
    1
}

/// Grid of swept values: either an inclusive range with a step, or an
/// explicit list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Range {
        start: usize,
        end: usize,
        #[serde(default = "default_step")]
        step: usize,
    },
    List(Vec<usize>),
}

impl AxisSpec {
    pub fn points(&self) -> Result<Vec<usize>> {
        match self {
            AxisSpec::Range { start, end, step } => {
                if *step == 0 {
                    return Err(Error::config("axis step must be positive"));
                }
                if end < start {
                    return Err(Error::config(format!("axis range {start}..{end} is empty")));
                }
                Ok((*start..=*end).step_by(*step).collect())
            }
            AxisSpec::List(points) => {
                if points.is_empty() {
                    return Err(Error::config("axis list is empty"));
                }
                Ok(points.clone())
            }
        }
    }
}

/// One labeled sweep: what to run and where along the axis.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub label: String,
    pub axis: AxisSpec,
    #[serde(flatten)]
    pub template: SweepTemplate,
}

impl SweepConfig {
    /// Grid points, validated together with the template at each point.
    pub fn validated_points(&self) -> Result<Vec<usize>> {
        let points = self.axis.points()?;
        for &k in &points {
            self.template.resolve(k).map_err(|e| {
                Error::config(format!(
                    "config {:?} fails at axis value {k}: {e}",
                    self.label
                ))
            })?;
        }
        Ok(points)
    }
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let config: SweepConfig =
        toml::from_str(text).map_err(|e| Error::config(format!("sweep config: {e}")))?;
    if config.label.is_empty() {
        return Err(Error::config("sweep label must be nonempty"));
    }
    if config
        .label
        .chars()
        .any(|c| !(c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')))
    {
        return Err(Error::config(format!(
            "label {:?} may only use letters, digits, '_', '-' and '.' (it names the output file)",
            config.label
        )));
    }
    Ok(config)
}

pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    parse_sweep_config(&std::fs::read_to_string(path)?)
}
