//! The subcommands. Every artifact is a pure function of the config and seed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lcrl::automata::{find_sinks, load_automaton, save_automaton, translate_fragment, validate_ldba, Ldba};
use lcrl::env::{explicit_mdp, LabeledEnv};
use lcrl::label::Alphabet;
use lcrl::learner::{LearnParams, Learner, RunLog};
use lcrl::ltl::parse_ltl;
use lcrl::oracle::{build_product, chain_analysis, solve, OracleReport, PolicyEntry, StateValue};
use lcrl::product::{ProductAction, ProductKey};
use lcrl::psp::psp_fixed_point;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::fixture::{load_fixture, load_property, read_text, Provenance};

pub const CSV_VERSION: &str = "# lcrl-csv v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mu: f64,
    pub gamma: f64,
    pub rp: f64,
    pub episodes: usize,
    pub it_threshold: usize,
    pub epsilon0: f64,
    pub tau: f64,
    pub stop_on_convergence: bool,
}

impl From<&LearnParams> for ParamsRecord {
    fn from(p: &LearnParams) -> Self {
        ParamsRecord {
            mu: p.mu,
            gamma: p.gamma,
            rp: p.r_p,
            episodes: p.episodes,
            it_threshold: p.it_threshold,
            epsilon0: p.epsilon0,
            tau: p.tau(),
            stop_on_convergence: p.stop_on_convergence,
        }
    }
}

impl ParamsRecord {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.mu = Some(self.mu);
        cfg.gamma = Some(self.gamma);
        cfg.rp = Some(self.rp);
        cfg.episodes = Some(self.episodes);
        cfg.it_threshold = Some(self.it_threshold);
        cfg.epsilon0 = Some(self.epsilon0);
        cfg.tau = Some(self.tau);
        cfg.stop_on_convergence = Some(self.stop_on_convergence);
    }
}

/// `run.json`: enough to replay a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub seed: u64,
    pub params: ParamsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QSummary {
    pub episodes_run: usize,
    pub states: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_bound: f64,
    pub q_initial: f64,
    pub psp_initial: f64,
    pub converged_at: Option<usize>,
}

#[derive(Serialize)]
struct OracleFileOut<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    #[serde(flatten)]
    report: &'a OracleReport,
}

#[derive(Debug, Deserialize)]
struct OracleFileIn {
    #[serde(flatten)]
    provenance: Provenance,
    value_at_initial: f64,
    values: Vec<ValueRow>,
}

#[derive(Debug, Deserialize)]
struct ValueRow {
    env_state: usize,
    aut_state: String,
    value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSummary {
    pub episodes: usize,
    pub initial_max_error: f64,
    pub final_max_error: f64,
    pub oracle_value: f64,
    pub policy_probability: f64,
    pub policy_gap: f64,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    write(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn runlog_csv(log: &RunLog) -> String {
    let mut out = format!("{CSV_VERSION}\nepisode,iterations,reward,terminal,steps,psp0\n");
    for r in &log.records {
        let steps = r.steps.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.episode,
            r.iterations,
            r.reward,
            r.terminal.as_str(),
            steps,
            r.psp0
        );
    }
    out
}

fn action_name(env: &dyn LabeledEnv, a: ProductAction) -> String {
    match a {
        ProductAction::Env(x) => env.action_name(x),
        other => other.to_string(),
    }
}

fn policy_entries(learner: &Learner<'_, dyn LabeledEnv + '_>, ldba: &Ldba) -> Vec<PolicyEntry> {
    let env = learner.product().env();
    let policy = learner.greedy_policy();
    learner
        .keys
        .iter()
        .filter_map(|&k| {
            policy.action(k).map(|a| PolicyEntry {
                env_state: k.obs,
                aut_state: ldba.name(k.aut).to_string(),
                action: action_name(env, a),
            })
        })
        .collect()
}

fn value_entries(keys: &[ProductKey], values: &[f64], ldba: &Ldba) -> Vec<StateValue> {
    keys.iter()
        .zip(values)
        .map(|(k, &value)| StateValue {
            env_state: k.obs,
            aut_state: ldba.name(k.aut).to_string(),
            value,
        })
        .collect()
}

fn q_summary(learner: &Learner<'_, dyn LabeledEnv + '_>) -> QSummary {
    let log = learner.log();
    let i = learner.initial_index();
    QSummary {
        episodes_run: learner.episodes_run(),
        states: learner.keys.len(),
        q_min: log.q_min,
        q_max: log.q_max,
        q_bound: learner.params().q_bound(),
        q_initial: learner.q[i].iter().copied().fold(0.0, f64::max),
        psp_initial: learner.psp.get(i),
        converged_at: log.converged_at,
    }
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

/// Trains once per seed and writes `run.json`, `runlog.csv`, `policy.json`,
/// `psp.json` and `q_summary.json`; with `fixpoint` also `psp_fixpoint.json`.
pub fn cmd_train(cfg: &ExperimentConfig, fixpoint: bool) -> Result<Vec<PathBuf>, CliError> {
    let provenance = Provenance::of(cfg)?;
    let params = cfg.learn_params()?;
    let tol = cfg.tol()?;
    let fixture = load_fixture(cfg.fixture()?, cfg.region_size)?;
    let env = fixture.env();
    let ldba = load_property(&cfg.property()?, env)?;
    let mut dirs = Vec::new();
    for seed in cfg.seeds() {
        let dir = seed_dir(&cfg.out(), seed);
        create_dir(&dir)?;
        let mut learner = Learner::new(env, &ldba, params.clone(), seed)?;
        learner.train()?;
        let meta = RunMeta {
            provenance: provenance.clone(),
            seed,
            params: ParamsRecord::from(&params),
        };
        write_json(&dir.join("run.json"), &meta)?;
        write(&dir.join("runlog.csv"), &runlog_csv(learner.log()))?;
        write_json(&dir.join("policy.json"), &policy_entries(&learner, &ldba))?;
        write_json(&dir.join("psp.json"), &value_entries(&learner.keys, &learner.psp.values, &ldba))?;
        let summary = q_summary(&learner);
        write_json(&dir.join("q_summary.json"), &summary)?;
        let mut line = format!(
            "seed {seed}: {} episodes, {} states, psp0 {:.6}",
            summary.episodes_run, summary.states, summary.psp_initial
        );
        if fixpoint {
            let model = learner
                .counts
                .estimated_model(learner.acceptance_bits(), ldba.num_acceptance_sets());
            let values = psp_fixed_point(&model, &learner.psp.pinned, tol)?;
            write_json(&dir.join("psp_fixpoint.json"), &value_entries(&learner.keys, &values, &ldba))?;
            let _ = write!(line, ", fixpoint {:.6}", values[learner.initial_index()]);
        }
        println!("{line}");
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Solves the explicit product and writes `oracle.json`.
pub fn cmd_oracle(cfg: &ExperimentConfig) -> Result<OracleReport, CliError> {
    let provenance = Provenance::of(cfg)?;
    let tol = cfg.tol()?;
    let fixture = load_fixture(cfg.fixture()?, cfg.region_size)?;
    let env = fixture.env();
    let ldba = load_property(&cfg.property()?, env)?;
    let mdp = explicit_mdp(env)?;
    let solution = solve(build_product(&mdp, &ldba)?, tol)?;
    let report = solution.report(&mdp, &ldba);
    let out = cfg.out();
    create_dir(&out)?;
    write_json(
        &out.join("oracle.json"),
        &OracleFileOut {
            provenance: &provenance,
            report: &report,
        },
    )?;
    println!(
        "value_at_initial {:.6}, product_states {}, mecs {}, amecs {}",
        report.value_at_initial, report.product_states, report.mec_count, report.amec_count
    );
    Ok(report)
}

fn check_same(what: &'static str, run: String, oracle: String) -> Result<(), CliError> {
    if run == oracle {
        Ok(())
    } else {
        Err(CliError::MismatchedFixture { what, run, oracle })
    }
}

/// Replays the run in `run_dir` and measures its PSP against the oracle
/// values episode by episode. Writes `compare.csv` and `compare.json`.
pub fn cmd_compare(run_dir: &Path, oracle_path: &Path, out: Option<&Path>) -> Result<CompareSummary, CliError> {
    let meta: RunMeta = read_json(&run_dir.join("run.json"))?;
    let oracle: OracleFileIn = read_json(oracle_path)?;
    check_same("fixture", meta.provenance.fixture.clone(), oracle.provenance.fixture.clone())?;
    check_same(
        "region_size",
        format!("{:?}", meta.provenance.region_size),
        format!("{:?}", oracle.provenance.region_size),
    )?;
    check_same("property", meta.provenance.property.clone(), oracle.provenance.property.clone())?;

    let mut cfg = ExperimentConfig::default();
    meta.provenance.apply(&mut cfg)?;
    meta.params.apply(&mut cfg);
    let params = cfg.learn_params()?;
    let fixture = load_fixture(cfg.fixture()?, cfg.region_size)?;
    let env = fixture.env();
    let ldba = load_property(&cfg.property()?, env)?;
    let mdp = explicit_mdp(env)?;
    if mdp.observations != mdp.env_ids {
        return Err(CliError::Config {
            field: "fixture".into(),
            message: "compare needs a fixture whose observation is the full state".into(),
        });
    }
    let truth: HashMap<(usize, &str), f64> = oracle
        .values
        .iter()
        .map(|r| ((r.env_state, r.aut_state.as_str()), r.value))
        .collect();

    let mut learner = Learner::new(env, &ldba, params.clone(), meta.seed)?;
    let max_error = |l: &Learner<'_, dyn LabeledEnv + '_>| -> Result<f64, CliError> {
        let mut worst: f64 = 0.0;
        for (i, k) in l.keys.iter().enumerate() {
            let exact = if k.aut >= ldba.num_states() {
                0.0
            } else {
                *truth.get(&(k.obs, ldba.name(k.aut))).ok_or_else(|| {
                    CliError::Runtime(format!(
                        "oracle report has no value for env state {} with automaton state {}",
                        k.obs,
                        ldba.name(k.aut)
                    ))
                })?
            };
            worst = worst.max((l.psp.get(i) - exact).abs());
        }
        Ok(worst)
    };
    let mut series = vec![max_error(&learner)?];
    while learner.episodes_run() < params.episodes {
        learner.run_episode()?;
        series.push(max_error(&learner)?);
        if params.stop_on_convergence && learner.converged() {
            break;
        }
    }
    let stored = read_text(&run_dir.join("runlog.csv"))?;
    if stored != runlog_csv(learner.log()) {
        return Err(CliError::Runtime(format!(
            "{}: runlog does not match a replay of the recorded config",
            run_dir.display()
        )));
    }

    let product = build_product(&mdp, &ldba)?;
    let policy = learner.greedy_policy();
    let induced = product.policy_from_keys(|k| policy.action(k));
    let probability = chain_analysis(&induced, &product.mdp, product.initial).probability;
    let summary = CompareSummary {
        episodes: learner.episodes_run(),
        initial_max_error: series[0],
        final_max_error: *series.last().unwrap(),
        oracle_value: oracle.value_at_initial,
        policy_probability: probability,
        policy_gap: oracle.value_at_initial - probability,
    };

    let dir = out.unwrap_or(run_dir);
    create_dir(dir)?;
    let mut csv = format!("{CSV_VERSION}\nepisode,max_error\n");
    for (e, err) in series.iter().enumerate() {
        let _ = writeln!(csv, "{e},{err}");
    }
    write(&dir.join("compare.csv"), &csv)?;
    write_json(&dir.join("compare.json"), &summary)?;
    println!(
        "final max error {:.6}, policy probability {:.6}, oracle {:.6}",
        summary.final_max_error, summary.policy_probability, summary.oracle_value
    );
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct AutomatonSummary {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub part_n: Vec<String>,
    pub part_d: Vec<String>,
    pub reachable_d: Vec<String>,
    pub acceptance: Vec<Vec<String>>,
    pub sinks: Vec<String>,
}

pub fn summarize(a: &Ldba) -> Result<AutomatonSummary, CliError> {
    let report = validate_ldba(a)?;
    let names = |qs: &[usize]| qs.iter().map(|&q| a.name(q).to_string()).collect::<Vec<_>>();
    Ok(AutomatonSummary {
        alphabet: a.alphabet().names().to_vec(),
        states: a.names().to_vec(),
        initial: a.name(a.initial()).to_string(),
        part_n: names(&report.q_n),
        part_d: names(&report.q_d),
        reachable_d: names(&report.reachable_d),
        acceptance: a.acceptance().iter().map(|s| names(s)).collect(),
        sinks: names(&find_sinks(a)),
    })
}

pub fn cmd_automaton_check(path: &Path) -> Result<AutomatonSummary, CliError> {
    let a = load_automaton(&read_text(path)?)?;
    let summary = summarize(&a)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("plain data serializes"));
    Ok(summary)
}

pub fn cmd_automaton_translate(formula: &str, atoms: &str, out: Option<&Path>) -> Result<String, CliError> {
    let alphabet = Alphabet::new(atoms.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()))
        .map_err(|e| CliError::Config {
            field: "alphabet".into(),
            message: e.to_string(),
        })?;
    let ldba = translate_fragment(&parse_ltl(formula, &alphabet)?, &alphabet)?;
    let text = save_automaton(&ldba);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(text)
}
