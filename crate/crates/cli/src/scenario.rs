//! Scenario files: one JSON object describing an initial configuration and
//! an optional scheduler. Coordinates are `[ring, pos]`.

use serde::{Deserialize, Serialize};
use torus_gathering::sim::SimState;
use torus_gathering::torus::{Coord, TorusDims};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dims {
    pub ell: u16,
    #[serde(rename = "L")]
    pub big_l: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchedulerSpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bound")]
    pub fairness_bound: u64,
}

fn default_kind() -> String {
    "random".into()
}

fn default_bound() -> u64 {
    3
}

impl Default for SchedulerSpec {
    fn default() -> Self {
        SchedulerSpec { kind: default_kind(), seed: 0, fairness_bound: default_bound() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default)]
    pub strict_dims: bool,
    #[serde(default)]
    pub hooks: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub dims: Dims,
    pub robots: Vec<[u16; 2]>,
    #[serde(default)]
    pub scheduler: Option<SchedulerSpec>,
    #[serde(default)]
    pub flags: Option<Flags>,
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn dims(&self) -> anyhow::Result<TorusDims> {
        let strict = self.flags.as_ref().map(|f| f.strict_dims).unwrap_or(false);
        TorusDims::new(self.dims.ell, self.dims.big_l, strict)
            .map_err(|e| anyhow::anyhow!("invalid dims: {e}"))
    }

    pub fn positions(&self) -> Vec<Coord> {
        self.robots.iter().map(|&[r, p]| Coord::new(r, p)).collect()
    }

    pub fn state(&self) -> anyhow::Result<SimState> {
        let dims = self.dims()?;
        SimState::new(dims, &self.positions()).map_err(|e| anyhow::anyhow!("{e}"))
    }
}
