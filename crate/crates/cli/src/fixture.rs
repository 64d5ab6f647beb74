//! Resolves fixture names and property sources into library objects.

use std::path::Path;

use lcrl::automata::{builtin_automaton, load_automaton, translate_fragment, Ldba};
use lcrl::env::{load_grid, load_pacman, pacman_fixture, region_fixture, GridEnv, LabeledEnv, PacmanEnv};
use lcrl::ltl::parse_ltl;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PropertySource};
use crate::error::CliError;

pub const FIXTURE_NAMES: [&str; 6] = ["region1", "region2", "region3", "five_by_five", "pacman_small", "pacman_large"];

pub enum Fixture {
    Grid(GridEnv),
    Pacman(PacmanEnv),
}

impl Fixture {
    pub fn env(&self) -> &dyn LabeledEnv {
        match self {
            Fixture::Grid(g) => g,
            Fixture::Pacman(p) => p,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// A builtin name or a path to a `.grid` / `.maze` file.
pub fn load_fixture(name: &str, region_size: Option<usize>) -> Result<Fixture, CliError> {
    let env = match name {
        "region1" | "region2" => Fixture::Grid(region_fixture(name, region_size.unwrap_or(40))?),
        "region3" => Fixture::Grid(lcrl::env::region3_fixture()),
        "five_by_five" => Fixture::Grid(lcrl::env::five_by_five_fixture()),
        "pacman_small" => Fixture::Pacman(pacman_fixture("small")?),
        "pacman_large" => Fixture::Pacman(pacman_fixture("large")?),
        path if path.ends_with(".grid") => Fixture::Grid(GridEnv::new(load_grid(&read_text(Path::new(path))?)?)?),
        path if path.ends_with(".maze") => Fixture::Pacman(PacmanEnv::new(load_pacman(&read_text(Path::new(path))?)?)?),
        other => {
            return Err(CliError::Config {
                field: "fixture".into(),
                message: format!("`{other}` is neither one of {FIXTURE_NAMES:?} nor a .grid/.maze file"),
            })
        }
    };
    Ok(env)
}

/// LTL formulas are read over the fixture's atoms.
pub fn load_property(source: &PropertySource, env: &dyn LabeledEnv) -> Result<Ldba, CliError> {
    Ok(match source {
        PropertySource::Ltl(text) => translate_fragment(&parse_ltl(text, env.alphabet())?, env.alphabet())?,
        PropertySource::Builtin(name) => builtin_automaton(name)?,
        PropertySource::File(path) => load_automaton(&read_text(path)?)?,
    })
}

/// What a set of artifacts was computed from; compare refuses to mix runs
/// and oracle reports with different provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub fixture: String,
    pub region_size: Option<usize>,
    pub property: String,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let property = match cfg.property()? {
            PropertySource::Ltl(f) => format!("ltl:{f}"),
            PropertySource::Builtin(n) => format!("automaton:{n}"),
            PropertySource::File(p) => format!("automaton_file:{}", p.display()),
        };
        Ok(Provenance {
            fixture: cfg.fixture()?.to_string(),
            region_size: cfg.region_size,
            property,
        })
    }

    /// Back to config keys, so that a run can be replayed.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        cfg.fixture = Some(self.fixture.clone());
        cfg.region_size = self.region_size;
        let (key, value) = self.property.split_once(':').ok_or_else(|| CliError::Config {
            field: "property".into(),
            message: format!("malformed property `{}`", self.property),
        })?;
        cfg.set(key, value)
    }
}
