//! Run manifests.
//!
//! A manifest is a TOML file naming every input of a run. Relative paths are
//! resolved against the manifest's own directory.
//!
//! ```toml
//! mode = "risk-events"            # features | risk-events | risk-simulate
//! domain = "risk"                 # risk | numeric-delta (default risk)
//! schema = "../schema.txt"
//! ontology = "../ontology.txt"
//! rules = "../rules/default.rules"
//! config = "../engine.toml"       # optional, defaults apply
//! board = "../board.txt"          # risk modes, optional, classic map
//! input = "conquest.events"       # features and risk-events modes; "-" reads stdin
//! output_dir = "out/conquest"
//! seed = 7                        # risk-simulate only
//! steps = 1000                    # risk-simulate only
//! players = ["blue", "red"]       # risk-simulate only, optional
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Features,
    RiskEvents,
    RiskSimulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    #[default]
    Risk,
    NumericDelta,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub mode: Mode,
    #[serde(default)]
    pub domain: Domain,
    pub schema: PathBuf,
    pub ontology: PathBuf,
    pub rules: PathBuf,
    pub config: Option<PathBuf>,
    pub board: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub players: Option<Vec<String>>,
}

pub const STDIN: &str = "-";

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    /// Rewrites every relative path against `base`.
    pub fn resolve(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && p.as_os_str() != STDIN {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.schema, &mut self.ontology, &mut self.rules, &mut self.output_dir] {
            fix(p);
        }
        for p in [&mut self.config, &mut self.board, &mut self.input].into_iter().flatten() {
            fix(p);
        }
        self
    }
}
