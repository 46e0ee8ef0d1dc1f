//! Run configuration: algorithm/environment ids, seeds, and every
//! hyperparameter with per-algorithm defaults. Explicit keys in the config
//! document override the defaults; unknown keys are rejected. Environment
//! variables prefixed `LAB_` override file values (`LAB_BATCH_SIZE=500`),
//! and CLI flags override both.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("unknown algorithm id `{0}`")]
    UnknownAlgo(String),
    #[error("unknown environment id `{0}`")]
    UnknownEnv(String),
    #[error("`{key}` out of range: {message}")]
    OutOfRange { key: &'static str, message: String },
    #[error("environment override {0}={1} is not valid TOML")]
    BadEnvOverride(String, String),
}

/// Every implemented update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoId {
    Pg,
    Ppo,
    PpoLag,
    CppoPid,
    Focops,
    Cup,
    Npg,
    Trpo,
    TrpoLag,
    Rcpo,
    Cpo,
    Pcpo,
    Mappo,
    MappoLag,
    Happo,
    Macpo,
}

impl AlgoId {
    pub const ALL: [AlgoId; 16] = [
        AlgoId::Pg,
        AlgoId::Ppo,
        AlgoId::PpoLag,
        AlgoId::CppoPid,
        AlgoId::Focops,
        AlgoId::Cup,
        AlgoId::Npg,
        AlgoId::Trpo,
        AlgoId::TrpoLag,
        AlgoId::Rcpo,
        AlgoId::Cpo,
        AlgoId::Pcpo,
        AlgoId::Mappo,
        AlgoId::MappoLag,
        AlgoId::Happo,
        AlgoId::Macpo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgoId::Pg => "pg",
            AlgoId::Ppo => "ppo",
            AlgoId::PpoLag => "ppo_lag",
            AlgoId::CppoPid => "cppo_pid",
            AlgoId::Focops => "focops",
            AlgoId::Cup => "cup",
            AlgoId::Npg => "npg",
            AlgoId::Trpo => "trpo",
            AlgoId::TrpoLag => "trpo_lag",
            AlgoId::Rcpo => "rcpo",
            AlgoId::Cpo => "cpo",
            AlgoId::Pcpo => "pcpo",
            AlgoId::Mappo => "mappo",
            AlgoId::MappoLag => "mappo_lag",
            AlgoId::Happo => "happo",
            AlgoId::Macpo => "macpo",
        }
    }

    pub fn is_multi_agent(&self) -> bool {
        matches!(self, AlgoId::Mappo | AlgoId::MappoLag | AlgoId::Happo | AlgoId::Macpo)
    }

    pub fn is_second_order(&self) -> bool {
        matches!(
            self,
            AlgoId::Npg
                | AlgoId::Trpo
                | AlgoId::TrpoLag
                | AlgoId::Rcpo
                | AlgoId::Cpo
                | AlgoId::Pcpo
                | AlgoId::Macpo
        )
    }
}

impl FromStr for AlgoId {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgoId::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| ConfigError::UnknownAlgo(s.to_string()))
    }
}

impl fmt::Display for AlgoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw config document. Every field optional so per-algorithm defaults can
/// fill the gaps; unknown keys are an error.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    algo: Option<String>,
    env: Option<String>,
    seed: Option<u64>,
    total_steps: Option<u64>,
    batch_size: Option<usize>,
    cost_limit: Option<f64>,
    cost_mode: Option<String>,
    out_dir: Option<String>,
    hidden: Option<Vec<usize>>,
    activation: Option<String>,
    max_episode_steps: Option<usize>,
    checkpoint_every: Option<u64>,
    eval_episodes: Option<usize>,
    gamma: Option<f64>,
    gae_lambda: Option<f64>,
    cost_gae_lambda: Option<f64>,
    target_kl: Option<f64>,
    clip: Option<f64>,
    epochs: Option<usize>,
    critic_epochs: Option<usize>,
    minibatch: Option<usize>,
    actor_lr: Option<f64>,
    critic_lr: Option<f64>,
    lambda_init: Option<f64>,
    lambda_lr: Option<f64>,
    lambda_optimizer: Option<String>,
    pid_kp: Option<f64>,
    pid_ki: Option<f64>,
    pid_kd: Option<f64>,
    cg_iters: Option<usize>,
    cg_damping: Option<f64>,
    cg_tol: Option<f64>,
    search_steps: Option<usize>,
    step_fraction: Option<f64>,
    focops_lam: Option<f64>,
    nu_max: Option<f64>,
    nu_lr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaOptimizer {
    Sgd,
    Adam,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: AlgoId,
    pub env: String,
    pub seed: u64,
    pub total_steps: u64,
    pub batch_size: usize,
    pub cost_limit: f64,
    pub binary_cost: bool,
    pub out_dir: PathBuf,
    pub hidden: Vec<usize>,
    pub tanh_activation: bool,
    pub max_episode_steps: Option<usize>,
    pub checkpoint_every: u64,
    pub eval_episodes: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub cost_gae_lambda: f64,
    pub target_kl: f64,
    pub clip: f64,
    pub epochs: usize,
    pub critic_epochs: usize,
    pub minibatch: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub lambda_init: f64,
    pub lambda_lr: f64,
    pub lambda_optimizer: LambdaOptimizer,
    pub pid_kp: f64,
    pub pid_ki: f64,
    pub pid_kd: f64,
    pub cg_iters: usize,
    pub cg_damping: f64,
    pub cg_tol: f64,
    pub search_steps: usize,
    pub step_fraction: f64,
    pub focops_lam: f64,
    pub nu_max: f64,
    pub nu_lr: f64,
}

/// Table defaults per algorithm family.
fn defaults_for(algo: AlgoId) -> RunConfig {
    let mut cfg = RunConfig {
        algo,
        env: "PointGoal1".to_string(),
        seed: 0,
        total_steps: 200_000,
        batch_size: 20_000,
        cost_limit: 25.0,
        binary_cost: true,
        out_dir: PathBuf::new(), // filled after overrides
        hidden: vec![64, 64],
        tanh_activation: true,
        max_episode_steps: None,
        checkpoint_every: 10,
        eval_episodes: 10,
        gamma: 0.99,
        gae_lambda: 0.95,
        cost_gae_lambda: 0.95,
        target_kl: 0.02,
        clip: 0.2,
        epochs: 40,
        critic_epochs: 40,
        minibatch: 64,
        actor_lr: 3e-4,
        critic_lr: 3e-4,
        lambda_init: 0.001,
        lambda_lr: 0.035,
        lambda_optimizer: LambdaOptimizer::Adam,
        pid_kp: 0.10,
        pid_ki: 0.01,
        pid_kd: 0.01,
        cg_iters: 15,
        cg_damping: 0.1,
        cg_tol: 1e-8,
        search_steps: 15,
        step_fraction: 0.8,
        focops_lam: 1.5,
        nu_max: 2.0,
        nu_lr: 0.035,
    };
    if algo.is_second_order() {
        cfg.target_kl = 0.01;
        cfg.epochs = 10;
        cfg.critic_epochs = 10;
        cfg.critic_lr = 1e-3;
    }
    match algo {
        AlgoId::Pcpo => cfg.search_steps = 200,
        AlgoId::Macpo => {
            cfg.cg_iters = 10;
            cfg.search_steps = 10;
            cfg.step_fraction = 0.5;
            cfg.epochs = 15;
            cfg.critic_epochs = 15;
        }
        _ => {}
    }
    if algo.is_multi_agent() {
        cfg.env = "CoopMassVel".to_string();
        cfg.batch_size = 10_000;
        cfg.hidden = vec![128, 128];
        cfg.tanh_activation = false;
        cfg.lambda_init = 1e-5;
        cfg.lambda_lr = 0.78;
        cfg.lambda_optimizer = LambdaOptimizer::Sgd;
        if !algo.is_second_order() {
            cfg.target_kl = 0.016;
            cfg.epochs = 5;
            cfg.critic_epochs = 5;
            cfg.actor_lr = 5e-4;
        }
        cfg.critic_lr = 5e-4;
    }
    cfg
}

fn check_range(cfg: &RunConfig) -> Result<(), ConfigError> {
    let bad = |key: &'static str, message: String| Err(ConfigError::OutOfRange { key, message });
    if !(0.0..=1.0).contains(&cfg.gamma) {
        return bad("gamma", format!("{} not in [0, 1]", cfg.gamma));
    }
    if !(0.0..=1.0).contains(&cfg.gae_lambda) || !(0.0..=1.0).contains(&cfg.cost_gae_lambda) {
        return bad("gae_lambda", "must lie in [0, 1]".to_string());
    }
    if cfg.cost_limit <= 0.0 {
        return bad("cost_limit", format!("{} must be positive", cfg.cost_limit));
    }
    if cfg.target_kl <= 0.0 {
        return bad("target_kl", "must be positive".to_string());
    }
    if cfg.clip <= 0.0 || cfg.clip >= 1.0 {
        return bad("clip", format!("{} not in (0, 1)", cfg.clip));
    }
    if cfg.batch_size < 2 {
        return bad("batch_size", "need at least 2 steps per batch".to_string());
    }
    if cfg.epochs == 0 || cfg.cg_iters == 0 || cfg.minibatch == 0 {
        return bad("epochs", "epochs, cg_iters and minibatch must be positive".to_string());
    }
    if !(cfg.step_fraction > 0.0 && cfg.step_fraction <= 1.0) {
        return bad("step_fraction", "must lie in (0, 1]".to_string());
    }
    if cfg.hidden.is_empty() || cfg.hidden.iter().any(|&h| h == 0) {
        return bad("hidden", "hidden widths must be positive".to_string());
    }
    if cfg.lambda_init < 0.0 || cfg.nu_max < 0.0 {
        return bad("lambda_init", "multiplier values must be nonnegative".to_string());
    }
    Ok(())
}

fn known_env(id: &str) -> bool {
    saferl_core::envs::registered_env_ids().iter().any(|e| e == id)
        || saferl_core::envs::registered_cmg_ids().iter().any(|e| e == id)
}

/// Overrides from `LAB_*` environment variables, mapped to config keys.
pub fn env_overrides() -> Vec<(String, String)> {
    std::env::vars()
        .filter_map(|(k, v)| {
            k.strip_prefix("LAB_").map(|rest| (rest.to_ascii_lowercase(), v))
        })
        .collect()
}

/// Parse a config document (TOML key-value text), apply the given
/// overrides (key, TOML value text), fill per-algorithm defaults, and
/// validate.
pub fn load_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text)?;
    for (key, value) in overrides {
        // values arrive as bare text; parse numerics/booleans/arrays as
        // TOML, fall back to a plain string
        let parsed = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
            Ok(mut t) => t.remove("v").unwrap(),
            Err(_) => toml::Value::String(value.clone()),
        };
        table.insert(key.clone(), parsed);
    }
    let raw: RawConfig = toml::Table::try_into(table)?;

    let algo_name = raw.algo.ok_or(ConfigError::Missing("algo"))?;
    let algo = AlgoId::from_str(&algo_name)?;
    let mut cfg = defaults_for(algo);

    if let Some(env) = raw.env {
        cfg.env = env;
    }
    if !known_env(&cfg.env) {
        return Err(ConfigError::UnknownEnv(cfg.env));
    }
    let multi_env = saferl_core::envs::registered_cmg_ids().iter().any(|e| *e == cfg.env);
    if multi_env != algo.is_multi_agent() {
        return Err(ConfigError::OutOfRange {
            key: "env",
            message: format!(
                "`{}` is a {}-agent environment but `{}` is a {}-agent algorithm",
                cfg.env,
                if multi_env { "multi" } else { "single" },
                algo,
                if algo.is_multi_agent() { "multi" } else { "single" },
            ),
        });
    }

    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = raw.$field {
                cfg.$field = v;
            }
        };
    }
    take!(seed);
    take!(total_steps);
    take!(batch_size);
    take!(cost_limit);
    take!(hidden);
    if raw.max_episode_steps.is_some() {
        cfg.max_episode_steps = raw.max_episode_steps;
    }
    take!(checkpoint_every);
    take!(eval_episodes);
    take!(gamma);
    take!(gae_lambda);
    take!(cost_gae_lambda);
    take!(target_kl);
    take!(clip);
    take!(epochs);
    take!(critic_epochs);
    take!(minibatch);
    take!(actor_lr);
    take!(critic_lr);
    take!(lambda_init);
    take!(lambda_lr);
    take!(pid_kp);
    take!(pid_ki);
    take!(pid_kd);
    take!(cg_iters);
    take!(cg_damping);
    take!(cg_tol);
    take!(search_steps);
    take!(step_fraction);
    take!(focops_lam);
    take!(nu_max);
    take!(nu_lr);

    if let Some(mode) = raw.cost_mode {
        cfg.binary_cost = match mode.as_str() {
            "binary" => true,
            "continuous" => false,
            other => {
                return Err(ConfigError::OutOfRange {
                    key: "cost_mode",
                    message: format!("`{other}` is not `binary` or `continuous`"),
                })
            }
        };
    }
    if let Some(act) = raw.activation {
        cfg.tanh_activation = match act.as_str() {
            "tanh" => true,
            "relu" => false,
            other => {
                return Err(ConfigError::OutOfRange {
                    key: "activation",
                    message: format!("`{other}` is not `tanh` or `relu`"),
                })
            }
        };
    }
    if let Some(opt) = raw.lambda_optimizer {
        cfg.lambda_optimizer = match opt.as_str() {
            "sgd" => LambdaOptimizer::Sgd,
            "adam" => LambdaOptimizer::Adam,
            other => {
                return Err(ConfigError::OutOfRange {
                    key: "lambda_optimizer",
                    message: format!("`{other}` is not `sgd` or `adam`"),
                })
            }
        };
    }
    cfg.out_dir = match raw.out_dir {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(format!("runs/{}_{}_s{}", algo, cfg.env, cfg.seed)),
    };

    check_range(&cfg)?;
    Ok(cfg)
}

/// Parse a config document with `LAB_*` environment overrides applied.
pub fn load_config(text: &str) -> Result<RunConfig, ConfigError> {
    load_config_with_overrides(text, &env_overrides())
}

impl RunConfig {
    /// Programmatic construction used by the benchmark suites and tests.
    pub fn for_algo(algo: AlgoId) -> RunConfig {
        let mut cfg = defaults_for(algo);
        cfg.out_dir = PathBuf::from(format!("runs/{}_{}_s{}", algo, cfg.env, cfg.seed));
        cfg
    }

    /// Serialize back to the config document format. Parsing the result
    /// yields a semantically identical configuration.
    pub fn to_document(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("algo", toml::Value::String(self.algo.name().to_string()));
        map.insert("env", toml::Value::String(self.env.clone()));
        map.insert("seed", toml::Value::Integer(self.seed as i64));
        map.insert("total_steps", toml::Value::Integer(self.total_steps as i64));
        map.insert("batch_size", toml::Value::Integer(self.batch_size as i64));
        map.insert("cost_limit", toml::Value::Float(self.cost_limit));
        map.insert(
            "cost_mode",
            toml::Value::String(if self.binary_cost { "binary" } else { "continuous" }.into()),
        );
        map.insert("out_dir", toml::Value::String(self.out_dir.display().to_string()));
        map.insert(
            "hidden",
            toml::Value::Array(
                self.hidden.iter().map(|&h| toml::Value::Integer(h as i64)).collect(),
            ),
        );
        map.insert(
            "activation",
            toml::Value::String(if self.tanh_activation { "tanh" } else { "relu" }.into()),
        );
        if let Some(limit) = self.max_episode_steps {
            map.insert("max_episode_steps", toml::Value::Integer(limit as i64));
        }
        map.insert("checkpoint_every", toml::Value::Integer(self.checkpoint_every as i64));
        map.insert("eval_episodes", toml::Value::Integer(self.eval_episodes as i64));
        map.insert("gamma", toml::Value::Float(self.gamma));
        map.insert("gae_lambda", toml::Value::Float(self.gae_lambda));
        map.insert("cost_gae_lambda", toml::Value::Float(self.cost_gae_lambda));
        map.insert("target_kl", toml::Value::Float(self.target_kl));
        map.insert("clip", toml::Value::Float(self.clip));
        map.insert("epochs", toml::Value::Integer(self.epochs as i64));
        map.insert("critic_epochs", toml::Value::Integer(self.critic_epochs as i64));
        map.insert("minibatch", toml::Value::Integer(self.minibatch as i64));
        map.insert("actor_lr", toml::Value::Float(self.actor_lr));
        map.insert("critic_lr", toml::Value::Float(self.critic_lr));
        map.insert("lambda_init", toml::Value::Float(self.lambda_init));
        map.insert("lambda_lr", toml::Value::Float(self.lambda_lr));
        map.insert(
            "lambda_optimizer",
            toml::Value::String(
                match self.lambda_optimizer {
                    LambdaOptimizer::Sgd => "sgd",
                    LambdaOptimizer::Adam => "adam",
                }
                .into(),
            ),
        );
        map.insert("pid_kp", toml::Value::Float(self.pid_kp));
        map.insert("pid_ki", toml::Value::Float(self.pid_ki));
        map.insert("pid_kd", toml::Value::Float(self.pid_kd));
        map.insert("cg_iters", toml::Value::Integer(self.cg_iters as i64));
        map.insert("cg_damping", toml::Value::Float(self.cg_damping));
        map.insert("cg_tol", toml::Value::Float(self.cg_tol));
        map.insert("search_steps", toml::Value::Integer(self.search_steps as i64));
        map.insert("step_fraction", toml::Value::Float(self.step_fraction));
        map.insert("focops_lam", toml::Value::Float(self.focops_lam));
        map.insert("nu_max", toml::Value::Float(self.nu_max));
        map.insert("nu_lr", toml::Value::Float(self.nu_lr));
        let mut out = String::new();
        for (k, v) in map {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppo_lag_defaults_follow_the_tables() {
        let cfg =
            load_config_with_overrides("algo = \"ppo_lag\"\nenv = \"PointGoal1\"\n", &[]).unwrap();
        assert_eq!(cfg.cost_limit, 25.0);
        assert_eq!(cfg.clip, 0.2);
        assert_eq!(cfg.lambda_init, 0.001);
        assert_eq!(cfg.lambda_lr, 0.035);
        assert_eq!(cfg.lambda_optimizer, LambdaOptimizer::Adam);
        assert_eq!(cfg.epochs, 40);
        assert_eq!(cfg.target_kl, 0.02);
        assert_eq!(cfg.batch_size, 20_000);
        assert_eq!(cfg.gamma, 0.99);
        assert_eq!(cfg.gae_lambda, 0.95);
        assert_eq!(cfg.actor_lr, 3e-4);
        assert_eq!(cfg.hidden, vec![64, 64]);
        assert!(cfg.tanh_activation);
    }

    #[test]
    fn macpo_defaults_follow_the_tables() {
        let cfg = load_config_with_overrides("algo = \"macpo\"\n", &[]).unwrap();
        assert_eq!(cfg.cg_iters, 10);
        assert_eq!(cfg.step_fraction, 0.5);
        assert_eq!(cfg.search_steps, 10);
        assert_eq!(cfg.target_kl, 0.01);
        assert_eq!(cfg.batch_size, 10_000);
        assert_eq!(cfg.critic_lr, 5e-4);
        assert_eq!(cfg.hidden, vec![128, 128]);
        assert!(!cfg.tanh_activation);
        assert_eq!(cfg.env, "CoopMassVel");
    }

    #[test]
    fn trpo_and_cpo_defaults() {
        let trpo = load_config_with_overrides("algo = \"trpo\"\n", &[]).unwrap();
        assert_eq!(trpo.target_kl, 0.01);
        assert_eq!(trpo.critic_epochs, 10);
        assert_eq!(trpo.critic_lr, 1e-3);
        assert_eq!(trpo.cg_iters, 15);
        let cpo = load_config_with_overrides("algo = \"cpo\"\n", &[]).unwrap();
        assert_eq!(cpo.search_steps, 15);
        assert_eq!(cpo.step_fraction, 0.8);
        let pcpo = load_config_with_overrides("algo = \"pcpo\"\n", &[]).unwrap();
        assert_eq!(pcpo.search_steps, 200);
        let mappo = load_config_with_overrides("algo = \"mappo_lag\"\n", &[]).unwrap();
        assert_eq!(mappo.lambda_init, 1e-5);
        assert_eq!(mappo.lambda_lr, 0.78);
        assert_eq!(mappo.lambda_optimizer, LambdaOptimizer::Sgd);
        assert_eq!(mappo.target_kl, 0.016);
        assert_eq!(mappo.epochs, 5);
        let focops = load_config_with_overrides("algo = \"focops\"\n", &[]).unwrap();
        assert_eq!(focops.focops_lam, 1.5);
        assert_eq!(focops.nu_max, 2.0);
        let pid = load_config_with_overrides("algo = \"cppo_pid\"\n", &[]).unwrap();
        assert_eq!((pid.pid_kp, pid.pid_ki, pid.pid_kd), (0.10, 0.01, 0.01));
    }

    #[test]
    fn missing_algo_is_an_error() {
        assert!(matches!(
            load_config_with_overrides("env = \"PointGoal1\"\n", &[]),
            Err(ConfigError::Missing("algo"))
        ));
    }

    #[test]
    fn unknown_keys_and_ids_are_rejected() {
        assert!(load_config_with_overrides("algo = \"ppo\"\nfancy_knob = 3\n", &[]).is_err());
        assert!(matches!(
            load_config_with_overrides("algo = \"dqn\"\n", &[]),
            Err(ConfigError::UnknownAlgo(_))
        ));
        assert!(matches!(
            load_config_with_overrides("algo = \"ppo\"\nenv = \"PointFly9\"\n", &[]),
            Err(ConfigError::UnknownEnv(_))
        ));
        assert!(matches!(
            load_config_with_overrides("algo = \"ppo\"\ngamma = 1.5\n", &[]),
            Err(ConfigError::OutOfRange { key: "gamma", .. })
        ));
        // type mismatch
        assert!(load_config_with_overrides("algo = \"ppo\"\nseed = \"abc\"\n", &[]).is_err());
    }

    #[test]
    fn explicit_keys_override_defaults() {
        let cfg = load_config_with_overrides(
            "algo = \"ppo\"\nenv = \"MassVel\"\nbatch_size = 500\ntarget_kl = 0.05\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.batch_size, 500);
        assert_eq!(cfg.target_kl, 0.05);
        assert_eq!(cfg.env, "MassVel");
    }

    #[test]
    fn overrides_take_precedence_over_file_values() {
        let cfg = load_config_with_overrides(
            "algo = \"ppo\"\nseed = 1\n",
            &[("seed".to_string(), "42".to_string())],
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn round_trip_is_semantically_idempotent() {
        let cfg = load_config_with_overrides(
            "algo = \"cpo\"\nenv = \"PointCircle1\"\nseed = 7\nbatch_size = 444\n",
            &[],
        )
        .unwrap();
        let doc = cfg.to_document();
        let reparsed = load_config_with_overrides(&doc, &[]).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn mismatched_agent_count_is_an_error() {
        assert!(load_config_with_overrides("algo = \"ppo\"\nenv = \"CoopMassVel\"\n", &[]).is_err());
        assert!(load_config_with_overrides("algo = \"mappo\"\nenv = \"MassVel\"\n", &[]).is_err());
    }
}
