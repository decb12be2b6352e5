//! Run configuration: a JSON file whose keys mirror the command-line flags,
//! resolved in a fixed order so a run is reproducible from the single
//! `run_config.json` it writes back out.
//!
//! Precedence, lowest to highest: built-in defaults, the `--config` file,
//! `--set key=value` overrides, the `--scale` preset, then the dedicated
//! flags (`--horizon`, `--seeds`, ...).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use clucb::environment::{generate_instance, GenerateConfig, ProblemInstance};
use clucb::harness::{PolicySpec, SimParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Safety levels swept when a config does not pin its own grid.
pub const DEFAULT_ALPHAS: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.5];

/// Environment variable consulted for the output directory when neither the
/// flag nor the config names one.
pub const OUT_DIR_ENV: &str = "CBL_OUT";

/// Preset pairs of horizon and run count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// 10,000 rounds, 100 runs: minutes on a laptop.
    Desk,
    /// 40,000 rounds, 1,000 runs: the full study.
    Paper,
}

impl Scale {
    pub fn horizon(self) -> usize {
        match self {
            Scale::Desk => 10_000,
            Scale::Paper => 40_000,
        }
    }

    pub fn seeds(self) -> u64 {
        match self {
            Scale::Desk => 100,
            Scale::Paper => 1_000,
        }
    }
}

/// Where the problem instance comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Load a previously saved instance file.
    Path(PathBuf),
    /// Generate one from these parameters.
    Generate(GenerateConfig),
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<ProblemInstance> {
        match self {
            InstanceSource::Path(p) => ProblemInstance::load(p)
                .with_context(|| format!("loading instance from {}", p.display())),
            InstanceSource::Generate(cfg) => {
                generate_instance(cfg).context("field `instance.generate`")
            }
        }
    }
}

/// Policy selector as it appears in configs and output files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Lucb,
    Clucb,
    Clucb2,
    Oracle,
    Baseline,
}

impl PolicyName {
    pub fn label(self) -> &'static str {
        match self {
            PolicyName::Lucb => "lucb",
            PolicyName::Clucb => "clucb",
            PolicyName::Clucb2 => "clucb2",
            PolicyName::Oracle => "oracle",
            PolicyName::Baseline => "baseline",
        }
    }

    /// The harness spec for this policy at one safety level.
    pub fn spec(self, alpha: f64, strict_nested: bool) -> PolicySpec {
        match self {
            PolicyName::Lucb => PolicySpec::Lucb,
            PolicyName::Clucb => PolicySpec::Clucb { alpha },
            PolicyName::Clucb2 => PolicySpec::Clucb2 {
                alpha,
                strict_nested,
            },
            PolicyName::Oracle => PolicySpec::Oracle,
            PolicyName::Baseline => PolicySpec::Baseline,
        }
    }
}

/// One policy and the safety levels it is swept over. The unconstrained
/// policies ignore `alphas` when acting, but each level still produces its
/// own run because the constraint columns are judged at that level.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub policy: PolicyName,
    #[serde(default)]
    pub alphas: Vec<f64>,
}

fn default_instance() -> InstanceSource {
    InstanceSource::Generate(reference_generate_config())
}

fn default_policies() -> Vec<PolicyEntry> {
    vec![
        PolicyEntry {
            policy: PolicyName::Lucb,
            alphas: DEFAULT_ALPHAS.to_vec(),
        },
        PolicyEntry {
            policy: PolicyName::Clucb,
            alphas: DEFAULT_ALPHAS.to_vec(),
        },
    ]
}

fn default_horizon() -> usize {
    Scale::Desk.horizon()
}

fn default_seeds() -> u64 {
    Scale::Desk.seeds()
}

fn default_master_seed() -> u64 {
    101
}

fn default_lambda() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.001
}

fn default_thinning() -> usize {
    clucb::harness::DEFAULT_REPORT_STRIDE
}

/// The generation recipe of the reference study instance: four dimensions,
/// one hundred arms, unit noise, baseline at the tenth-best arm.
pub fn reference_generate_config() -> GenerateConfig {
    GenerateConfig {
        d: 4,
        k: 100,
        sigma: 1.0,
        baseline_rank: 10,
        seed: 2024,
    }
}

/// Everything a run needs, serializable so the resolved form can be written
/// next to its outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_instance")]
    pub instance: InstanceSource,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyEntry>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Number of independent runs.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Base seed of the per-run noise streams.
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Aggregate-grid stride above round 1,000; 1 keeps every round.
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    /// Clip confidence-set centers back into the declared parameter ball.
    #[serde(default)]
    pub strict_nested: bool,
    /// When set, overrides `horizon` and `seeds` with the preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Cap on worker threads; defaults to all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: default_instance(),
            policies: default_policies(),
            horizon: default_horizon(),
            seeds: default_seeds(),
            master_seed: default_master_seed(),
            lambda: default_lambda(),
            delta: default_delta(),
            thinning: default_thinning(),
            strict_nested: false,
            scale: None,
            out_dir: None,
            threads: None,
        }
    }
}

/// Flag values shared by `simulate` and `reproduce`; `None` means "not
/// given".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
    pub horizon: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub scale: Option<Scale>,
    pub threads: Option<usize>,
    pub strict_nested: bool,
}

impl RunConfig {
    /// Loads the file (when given), applies `--set` overrides onto the raw
    /// JSON, then the flag overrides, then validates.
    pub fn resolve(
        config_path: Option<&Path>,
        sets: &[String],
        overrides: &Overrides,
    ) -> Result<RunConfig> {
        let mut value = match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
        };
        for spec in sets {
            apply_set(&mut value, spec)?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(value).context("interpreting the configuration")?;

        if let Some(scale) = overrides.scale {
            cfg.scale = Some(scale);
        }
        if let Some(scale) = cfg.scale {
            cfg.horizon = scale.horizon();
            cfg.seeds = scale.seeds();
        }
        if let Some(h) = overrides.horizon {
            cfg.horizon = h;
        }
        if let Some(n) = overrides.seeds {
            cfg.seeds = n;
        }
        if let Some(s) = overrides.seed {
            cfg.master_seed = s;
        }
        if let Some(alphas) = &overrides.alpha {
            for entry in &mut cfg.policies {
                entry.alphas = alphas.clone();
            }
        }
        if let Some(dir) = &overrides.out {
            cfg.out_dir = Some(dir.clone());
        }
        if let Some(n) = overrides.threads {
            cfg.threads = Some(n);
        }
        if overrides.strict_nested {
            cfg.strict_nested = true;
        }

        for entry in &mut cfg.policies {
            if entry.alphas.is_empty() {
                entry.alphas = DEFAULT_ALPHAS.to_vec();
            }
        }

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            bail!("field `horizon`: must be at least 1");
        }
        if self.seeds == 0 {
            bail!("field `seeds`: must be at least 1");
        }
        if self.policies.is_empty() {
            bail!("field `policies`: at least one policy required");
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            bail!("field `lambda`: must be positive and finite, got {}", self.lambda);
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("field `delta`: must lie in (0, 1), got {}", self.delta);
        }
        if self.thinning == 0 {
            bail!("field `thinning`: must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("field `threads`: must be at least 1");
        }
        for (i, entry) in self.policies.iter().enumerate() {
            for (j, &a) in entry.alphas.iter().enumerate() {
                if !(a > 0.0 && a < 1.0) {
                    bail!(
                        "field `policies[{i}].alphas[{j}]`: alpha must lie in (0, 1), got {a}"
                    );
                }
            }
        }
        Ok(())
    }

    /// Simulation parameters with the constraint judged at `alpha`.
    pub fn params(&self, alpha: f64) -> SimParams {
        SimParams {
            lambda: self.lambda,
            delta: self.delta,
            horizon: self.horizon,
            constraint_alpha: alpha,
        }
    }

    /// Output directory: the resolved config's, else `$CBL_OUT`, else `out`.
    pub fn out_dir(&self) -> PathBuf {
        resolve_out_dir(self.out_dir.as_deref())
    }
}

/// Output directory resolution shared by all commands.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("out"),
    }
}

/// Applies one `key=value` override onto the raw JSON config. Dotted keys
/// descend through objects; integer segments index arrays. The value is
/// parsed as JSON when possible and taken as a string otherwise.
fn apply_set(root: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .with_context(|| format!("--set expects KEY=VALUE, got `{spec}`"))?;
    if path.is_empty() {
        bail!("--set expects a non-empty key, got `{spec}`");
    }
    let leaf: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();

    let mut cur = root;
    for (i, seg) in segments[..segments.len() - 1].iter().enumerate() {
        let prefix = || segments[..=i].join(".");
        cur = if let Ok(idx) = seg.parse::<usize>() {
            cur.as_array_mut()
                .with_context(|| format!("config key `{}`: parent is not an array", prefix()))?
                .get_mut(idx)
                .with_context(|| format!("config key `{}`: index out of range", prefix()))?
        } else {
            cur.as_object_mut()
                .with_context(|| format!("config key `{}`: parent is not an object", prefix()))?
                .entry(seg.to_string())
                .or_insert_with(|| Value::Object(Default::default()))
        };
    }

    let last = segments[segments.len() - 1];
    if let Ok(idx) = last.parse::<usize>() {
        let slot = cur
            .as_array_mut()
            .with_context(|| format!("config key `{path}`: parent is not an array"))?
            .get_mut(idx)
            .with_context(|| format!("config key `{path}`: index out of range"))?;
        *slot = leaf;
    } else {
        cur.as_object_mut()
            .with_context(|| format!("config key `{path}`: parent is not an object"))?
            .insert(last.to_string(), leaf);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(sets: &[&str], overrides: &Overrides) -> Result<RunConfig> {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        RunConfig::resolve(None, &sets, overrides)
    }

    #[test]
    fn default_config_is_valid_and_desk_sized() {
        let cfg = resolve(&[], &Overrides::default()).unwrap();
        assert_eq!(cfg.horizon, 10_000);
        assert_eq!(cfg.seeds, 100);
        assert_eq!(cfg.policies.len(), 2);
        assert_eq!(cfg.policies[0].alphas, DEFAULT_ALPHAS.to_vec());
    }

    #[test]
    fn set_overrides_nested_keys_and_parses_json_values() {
        let cfg = resolve(
            &[
                "horizon=2000",
                "instance.generate.k=50",
                "policies.1.alphas=[0.1,0.2]",
            ],
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.horizon, 2000);
        match cfg.instance {
            InstanceSource::Generate(g) => assert_eq!(g.k, 50),
            other => panic!("unexpected instance source {other:?}"),
        }
        assert_eq!(cfg.policies[1].alphas, vec![0.1, 0.2]);
    }

    #[test]
    fn set_can_replace_whole_subtrees() {
        let cfg = resolve(
            &["instance={\"path\":\"inst.json\"}", "policies=[{\"policy\":\"lucb\"}]"],
            &Overrides::default(),
        )
        .unwrap();
        match cfg.instance {
            InstanceSource::Path(p) => assert_eq!(p, PathBuf::from("inst.json")),
            other => panic!("unexpected instance source {other:?}"),
        }
        assert_eq!(cfg.policies.len(), 1);
        assert_eq!(cfg.policies[0].alphas, DEFAULT_ALPHAS.to_vec());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = resolve(&["horizont=99"], &Overrides::default()).unwrap_err();
        assert!(format!("{err:#}").contains("horizont"), "{err:#}");
    }

    #[test]
    fn malformed_set_specs_are_rejected() {
        for bad in ["horizon", "=5", "policies.9.alphas=[0.1]"] {
            let err = resolve(&[bad], &Overrides::default()).unwrap_err();
            let msg = format!("{err:#}");
            assert!(!msg.is_empty(), "no message for `{bad}`");
        }
    }

    #[test]
    fn alpha_out_of_range_is_named_in_the_error() {
        let overrides = Overrides {
            alpha: Some(vec![0.1, 1.5]),
            ..Overrides::default()
        };
        let err = resolve(&[], &overrides).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("alphas[1]") && msg.contains("1.5"), "{msg}");
    }

    #[test]
    fn scale_preset_sets_horizon_and_seeds_but_explicit_flags_win() {
        let overrides = Overrides {
            scale: Some(Scale::Paper),
            horizon: Some(1234),
            ..Overrides::default()
        };
        let cfg = resolve(&[], &overrides).unwrap();
        assert_eq!(cfg.horizon, 1234);
        assert_eq!(cfg.seeds, 1000);
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let cfg = resolve(&["horizon=777"], &Overrides::default()).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.horizon, 777);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }

    #[test]
    fn zero_thinning_is_rejected() {
        let err = resolve(&["thinning=0"], &Overrides::default()).unwrap_err();
        assert!(format!("{err:#}").contains("thinning"));
    }
}
