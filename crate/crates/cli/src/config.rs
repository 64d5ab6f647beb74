//! Flat `key = value` experiment configuration.

use std::path::PathBuf;

use lcrl::learner::LearnParams;

use crate::error::CliError;

/// Every key a config file may set. Command-line flags override file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub fixture: Option<String>,
    pub region_size: Option<usize>,
    pub ltl: Option<String>,
    pub automaton: Option<String>,
    pub automaton_file: Option<PathBuf>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub rp: Option<f64>,
    pub episodes: Option<usize>,
    pub it_threshold: Option<usize>,
    pub epsilon0: Option<f64>,
    pub tau: Option<f64>,
    pub stop_on_convergence: Option<bool>,
    pub seeds: Option<Vec<u64>>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Where the property comes from; a config names exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertySource {
    Ltl(String),
    Builtin(String),
    File(PathBuf),
}

fn bad(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| bad(key, format!("cannot parse `{value}`: {e}")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("config", format!("line {}: expected `key = value`", idx + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "fixture" => self.fixture = Some(value.to_string()),
            "region_size" => self.region_size = Some(parse_value(key, value)?),
            "ltl" => self.ltl = Some(value.to_string()),
            "automaton" => self.automaton = Some(value.to_string()),
            "automaton_file" => self.automaton_file = Some(PathBuf::from(value)),
            "mu" => self.mu = Some(parse_value(key, value)?),
            "gamma" => self.gamma = Some(parse_value(key, value)?),
            "rp" => self.rp = Some(parse_value(key, value)?),
            "episodes" => self.episodes = Some(parse_value(key, value)?),
            "it_threshold" => self.it_threshold = Some(parse_value(key, value)?),
            "epsilon0" => self.epsilon0 = Some(parse_value(key, value)?),
            "tau" => self.tau = Some(parse_value(key, value)?),
            "stop_on_convergence" => self.stop_on_convergence = Some(parse_value(key, value)?),
            "seeds" => {
                let seeds = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_value(key, s))
                    .collect::<Result<Vec<u64>, _>>()?;
                if seeds.is_empty() {
                    return Err(bad(key, "no seeds listed"));
                }
                self.seeds = Some(seeds);
            }
            "tol" => self.tol = Some(parse_value(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(bad(other, "unknown config key")),
        }
        Ok(())
    }

    /// Fills every field still unset from `fallback`.
    pub fn or(self, fallback: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            fixture: self.fixture.or(fallback.fixture),
            region_size: self.region_size.or(fallback.region_size),
            ltl: self.ltl.or(fallback.ltl),
            automaton: self.automaton.or(fallback.automaton),
            automaton_file: self.automaton_file.or(fallback.automaton_file),
            mu: self.mu.or(fallback.mu),
            gamma: self.gamma.or(fallback.gamma),
            rp: self.rp.or(fallback.rp),
            episodes: self.episodes.or(fallback.episodes),
            it_threshold: self.it_threshold.or(fallback.it_threshold),
            epsilon0: self.epsilon0.or(fallback.epsilon0),
            tau: self.tau.or(fallback.tau),
            stop_on_convergence: self.stop_on_convergence.or(fallback.stop_on_convergence),
            seeds: self.seeds.or(fallback.seeds),
            tol: self.tol.or(fallback.tol),
            out: self.out.or(fallback.out),
        }
    }

    pub fn fixture(&self) -> Result<&str, CliError> {
        self.fixture.as_deref().ok_or_else(|| bad("fixture", "no fixture given"))
    }

    pub fn property(&self) -> Result<PropertySource, CliError> {
        let mut found = Vec::new();
        if let Some(f) = &self.ltl {
            found.push(PropertySource::Ltl(f.clone()));
        }
        if let Some(n) = &self.automaton {
            found.push(PropertySource::Builtin(n.clone()));
        }
        if let Some(p) = &self.automaton_file {
            found.push(PropertySource::File(p.clone()));
        }
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err(bad("property", "set one of ltl, automaton, automaton_file")),
            _ => Err(bad("property", "ltl, automaton and automaton_file are exclusive")),
        }
    }

    /// Learning parameters; unset keys take the library defaults, except that
    /// early stopping is off so that runs last exactly `episodes`.
    pub fn learn_params(&self) -> Result<LearnParams, CliError> {
        let d = LearnParams::default();
        let p = LearnParams {
            mu: self.mu.unwrap_or(d.mu),
            gamma: self.gamma.unwrap_or(d.gamma),
            r_p: self.rp.unwrap_or(d.r_p),
            episodes: self.episodes.unwrap_or(d.episodes),
            it_threshold: self.it_threshold.unwrap_or(d.it_threshold),
            epsilon0: self.epsilon0.unwrap_or(d.epsilon0),
            tau: self.tau.or(d.tau),
            stop_on_convergence: self.stop_on_convergence.unwrap_or(false),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![0])
    }

    pub fn tol(&self) -> Result<f64, CliError> {
        match self.tol {
            None => Ok(1e-10),
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(bad("tol", format!("{t} is not positive"))),
        }
    }

    pub fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = ExperimentConfig::parse("# region3 run\nfixture = region3\nltl = F G t\nseeds = 1, 2 3\nmu = 0.5\n").unwrap();
        assert_eq!(cfg.fixture.as_deref(), Some("region3"));
        assert_eq!(cfg.property().unwrap(), PropertySource::Ltl("F G t".into()));
        assert_eq!(cfg.seeds(), vec![1, 2, 3]);
        assert_eq!(cfg.learn_params().unwrap().mu, 0.5);
    }

    #[test]
    fn flags_win_over_file() {
        let file = ExperimentConfig::parse("mu = 0.5\nepisodes = 7").unwrap();
        let flags = ExperimentConfig {
            mu: Some(0.2),
            ..Default::default()
        };
        let cfg = flags.or(file);
        assert_eq!(cfg.mu, Some(0.2));
        assert_eq!(cfg.episodes, Some(7));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentConfig::parse("speed = 3"), Err(CliError::Config { .. })));
        assert!(matches!(ExperimentConfig::parse("mu 3"), Err(CliError::Config { .. })));
        assert!(matches!(ExperimentConfig::parse("episodes = -1"), Err(CliError::Config { .. })));
        let two = ExperimentConfig::parse("ltl = F t\nautomaton = fig4_fg_t").unwrap();
        assert!(two.property().is_err());
        let mu = ExperimentConfig::parse("mu = 1.5").unwrap();
        match mu.learn_params() {
            Err(e) => assert!(e.to_string().contains("mu")),
            Ok(_) => panic!("mu 1.5 accepted"),
        }
    }
}
