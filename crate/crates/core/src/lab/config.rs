use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::disorder::DisorderDistribution;
use crate::eig::EnergyInterval;
use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;
use crate::mc::{BinGrid, McPlan};
use crate::model::{BackgroundPotential, ModelSpec, SiteProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Wegner,
    SsfBound,
    DosVsSsf,
    BirmanSolomyak,
    RankBound,
    ThermoLimit,
    Ssd,
    SpectralAveraging,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Wegner => "wegner",
            ExperimentKind::SsfBound => "ssf-bound",
            ExperimentKind::DosVsSsf => "dos-vs-ssf",
            ExperimentKind::BirmanSolomyak => "birman-solomyak",
            ExperimentKind::RankBound => "rank-bound",
            ExperimentKind::ThermoLimit => "thermo-limit",
            ExperimentKind::Ssd => "ssd",
            ExperimentKind::SpectralAveraging => "spectral-averaging",
        }
    }
}

/// `"delta"`, `{ plateau = [..] }` (1D, offsets 0, 1, ..) or explicit offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileConfig {
    Named(String),
    Plateau { plateau: Vec<f64> },
    Explicit { offsets: Vec<Vec<i64>>, values: Vec<f64> },
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig::Named("delta".into())
    }
}

/// A constant or `{ period, values }` (row-major over the period cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BackgroundConfig {
    Constant(f64),
    Periodic { period: usize, values: Vec<f64> },
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        BackgroundConfig::Constant(0.0)
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one_usize")]
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default = "uniform")]
    pub disorder: DisorderDistribution,
}

fn uniform() -> DisorderDistribution {
    DisorderDistribution::Uniform01
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        let geometry = BoxGeometry::new(self.d, self.l)?;
        let profile = match &self.profile {
            ProfileConfig::Named(name) if name == "delta" => SiteProfile::delta(self.d),
            ProfileConfig::Named(name) => {
                return Err(Error::param("model.profile", format!("unknown profile {name:?}")));
            }
            ProfileConfig::Plateau { plateau } => {
                if self.d != 1 {
                    return Err(Error::param("model.profile", "plateau profiles are one-dimensional"));
                }
                SiteProfile::plateau_1d(plateau)?
            }
            ProfileConfig::Explicit { offsets, values } => SiteProfile::new(self.d, offsets.clone(), values.clone())?,
        };
        let background = match &self.background {
            BackgroundConfig::Constant(c) if *c == 0.0 => BackgroundPotential::zero(),
            BackgroundConfig::Constant(c) => BackgroundPotential::constant(*c),
            BackgroundConfig::Periodic { period, values } => {
                BackgroundPotential::periodic(self.d, *period, values.clone())?
            }
        };
        ModelSpec::new(geometry, background, profile, self.lambda, self.disorder.clone())
    }
}

fn default_workers() -> usize {
    0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(rename = "M")]
    pub m: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub e_min: Option<f64>,
    #[serde(default)]
    pub e_max: Option<f64>,
    #[serde(default)]
    pub bins: Option<usize>,
}

impl PlanConfig {
    /// Grid defaults to 20 bins over the guaranteed spectral range of `model`.
    pub fn build(&self, model: &ModelSpec) -> Result<McPlan> {
        let (lo, hi) = crate::mc::spectral_bounds(model);
        let grid = BinGrid::new(
            self.e_min.unwrap_or(lo),
            self.e_max.unwrap_or(hi),
            self.bins.unwrap_or(20),
        )?;
        McPlan::new(self.m, self.seed, self.workers, grid).map_err(|e| rename_param(e, "M", "plan.M"))
    }
}

fn rename_param(e: Error, from: &str, to: &str) -> Error {
    match e {
        Error::Parameter { name, reason } if name == from => Error::Parameter {
            name: to.to_string(),
            reason,
        },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerConfig {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub eps: Vec<f64>,
    /// Largest accepted relative residual of the through-origin fit.
    #[serde(default = "ten_percent")]
    pub max_fit_residual: f64,
}

fn ten_percent() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SsfBoundConfig {
    /// Second box side for the stability comparison.
    #[serde(default, rename = "compare_L")]
    pub compare_l: Option<usize>,
    #[serde(default = "three")]
    pub k_sigma: f64,
}

fn three() -> f64 {
    3.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosVsSsfConfig {
    #[serde(default = "three")]
    pub k_sigma: f64,
    #[serde(default = "ninety_percent")]
    pub min_fraction: f64,
}

impl Default for DosVsSsfConfig {
    fn default() -> Self {
        DosVsSsfConfig {
            k_sigma: 3.0,
            min_fraction: 0.9,
        }
    }
}

fn ninety_percent() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirmanSolomyakConfig {
    #[serde(default = "half")]
    pub window_width: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for BirmanSolomyakConfig {
    fn default() -> Self {
        BirmanSolomyakConfig {
            window_width: 0.5,
            tol: 1e-4,
        }
    }
}

fn half() -> f64 {
    0.5
}

fn default_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankBoundConfig {
    #[serde(default = "five")]
    pub max_rank: usize,
    #[serde(default = "two")]
    pub max_weight: f64,
}

impl Default for RankBoundConfig {
    fn default() -> Self {
        RankBoundConfig {
            max_rank: 5,
            max_weight: 2.0,
        }
    }
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoConfig {
    #[serde(rename = "inner_L")]
    pub inner_l: Vec<usize>,
    #[serde(default = "four")]
    pub outer_factor: usize,
    pub window: [f64; 2],
    #[serde(default = "unit_times")]
    pub t: Vec<f64>,
    #[serde(default = "two")]
    pub k_sigma: f64,
}

fn four() -> usize {
    4
}

fn unit_times() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsdConfig {
    #[serde(rename = "inner_L")]
    pub inner_l: Vec<usize>,
    #[serde(rename = "outer_L")]
    pub outer_l: usize,
    #[serde(default = "two")]
    pub k_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralAveragingConfig {
    #[serde(default = "three_usize")]
    pub max_rank: usize,
    #[serde(default = "half")]
    pub window_width: f64,
    #[serde(default = "fine_tol")]
    pub tol: f64,
}

impl Default for SpectralAveragingConfig {
    fn default() -> Self {
        SpectralAveragingConfig {
            max_rank: 3,
            window_width: 0.5,
            tol: 1e-5,
        }
    }
}

fn three_usize() -> usize {
    3
}

fn fine_tol() -> f64 {
    1e-5
}

fn default_output() -> String {
    "ssf-lab-out".into()
}

/// One experiment run. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_output")]
    pub output_dir: String,
    /// Use the on-disk eigenvalue cache.
    #[serde(default)]
    pub cache: bool,
    /// Evaluate the experiment's acceptance check; a failure exits with status 2.
    #[serde(default)]
    pub check: bool,
    pub model: ModelConfig,
    pub plan: PlanConfig,
    #[serde(default)]
    pub wegner: Option<WegnerConfig>,
    #[serde(default)]
    pub ssf_bound: Option<SsfBoundConfig>,
    #[serde(default)]
    pub dos_vs_ssf: Option<DosVsSsfConfig>,
    #[serde(default)]
    pub birman_solomyak: Option<BirmanSolomyakConfig>,
    #[serde(default)]
    pub rank_bound: Option<RankBoundConfig>,
    #[serde(default)]
    pub thermo: Option<ThermoConfig>,
    #[serde(default)]
    pub ssd: Option<SsdConfig>,
    #[serde(default)]
    pub spectral_averaging: Option<SpectralAveragingConfig>,
}

impl ExperimentConfig {
    /// Cross-field checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        self.plan.build(&model)?;
        let missing = |section: &str| {
            Error::Config(format!(
                "experiment {} needs a [{section}] section",
                self.experiment.name()
            ))
        };
        match self.experiment {
            ExperimentKind::Wegner => {
                let w = self.wegner.as_ref().ok_or_else(|| missing("wegner"))?;
                if let Some(e) = w.eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
                    return Err(Error::param("wegner.eps", format!("must lie in (0, 1] (got {e})")));
                }
            }
            ExperimentKind::ThermoLimit => {
                let t = self.thermo.as_ref().ok_or_else(|| missing("thermo"))?;
                EnergyInterval::new(t.window[0], t.window[1])?;
                if t.outer_factor == 0 {
                    return Err(Error::param("thermo.outer_factor", "must be at least 1"));
                }
                for &l in &t.inner_l {
                    BoxGeometry::new(self.model.d, l)?;
                }
            }
            ExperimentKind::Ssd => {
                let s = self.ssd.as_ref().ok_or_else(|| missing("ssd"))?;
                BoxGeometry::new(self.model.d, s.outer_l)?;
                if let Some(l) = s.inner_l.iter().find(|&&l| l >= s.outer_l) {
                    return Err(Error::param(
                        "ssd.inner_L",
                        format!("inner side {l} must be smaller than outer_L = {}", s.outer_l),
                    ));
                }
            }
            ExperimentKind::BirmanSolomyak => {
                let b = self.birman_solomyak.clone().unwrap_or_default();
                if !(b.window_width > 0.0) || !(b.tol > 0.0) {
                    return Err(Error::param("birman_solomyak", "window_width and tol must be positive"));
                }
            }
            ExperimentKind::SpectralAveraging => {
                let s = self.spectral_averaging.clone().unwrap_or_default();
                if !(s.window_width > 0.0) || !(s.tol > 0.0) || s.max_rank == 0 {
                    return Err(Error::param(
                        "spectral_averaging",
                        "window_width, tol and max_rank must be positive",
                    ));
                }
            }
            ExperimentKind::RankBound => {
                let r = self.rank_bound.clone().unwrap_or_default();
                if r.max_rank == 0 || !(r.max_weight > 0.0) {
                    return Err(Error::param("rank_bound", "max_rank and max_weight must be positive"));
                }
            }
            ExperimentKind::SsfBound | ExperimentKind::DosVsSsf => {}
        }
        Ok(())
    }
}

/// Sets `dotted.key = value` in `table`, creating intermediate tables. The value
/// is read as a TOML value when possible (`10`, `1.5`, `[1, 2]`, `true`) and as a
/// bare string otherwise.
pub fn apply_override(table: &mut Table, key: &str, raw: &str) -> Result<()> {
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(Error::Config(format!("override {key:?}: {p:?} is not a section"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses config text, applies `(key, value)` overrides and validates. Also
/// returns the effective table, which is what the manifest records.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<(ExperimentConfig, Table)> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string().trim_end().to_string()))?;
    for (k, v) in overrides {
        apply_override(&mut table, k, v)?;
    }
    let config: ExperimentConfig = Table::try_into(table.clone())
        .map_err(|e: toml::de::Error| Error::Config(e.to_string().trim_end().to_string()))?;
    config.validate()?;
    Ok((config, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEGNER: &str = r#"
experiment = "wegner"
output_dir = "out"

[model]
d = 1
L = 50

[plan]
M = 20
seed = 7

[wegner]
E0 = 2.0
eps = [0.05, 0.1]
"#;

    #[test]
    fn parses_minimal_config() {
        let (c, _) = parse_config(WEGNER, &[]).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Wegner);
        assert_eq!(c.model.l, 50);
        assert_eq!(c.plan.m, 20);
        assert!(!c.cache && !c.check);
        let model = c.model.build().unwrap();
        assert_eq!(model.profile().rank(), 1);
        let plan = c.plan.build(&model).unwrap();
        assert_eq!(plan.grid().len(), 20);
    }

    #[test]
    fn overrides_are_applied() {
        let o = vec![
            ("plan.M".to_string(), "10".to_string()),
            ("wegner.eps".into(), "[0.2]".into()),
            ("output_dir".into(), "elsewhere/x".into()),
        ];
        let (c, table) = parse_config(WEGNER, &o).unwrap();
        assert_eq!(c.plan.m, 10);
        assert_eq!(c.wegner.unwrap().eps, vec![0.2]);
        assert_eq!(c.output_dir, "elsewhere/x");
        assert_eq!(table["plan"]["M"].as_integer(), Some(10));
    }

    #[test]
    fn invalid_side_names_constraint() {
        let err = parse_config(WEGNER, &[("model.L".into(), "2".into())]).unwrap_err();
        assert!(err.to_string().contains("at least 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = WEGNER.replace("seed = 7", "seed = 7\nsamples = 3");
        let err = parse_config(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("samples"), "{err}");
        let err = parse_config(WEGNER, &[("model.size".into(), "3".into())]).unwrap_err();
        assert!(err.to_string().contains("size"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_config("experiment = \n[model", &[]).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn range_checks_name_the_parameter() {
        let err = parse_config(WEGNER, &[("wegner.eps".into(), "[1.5]".into())]).unwrap_err();
        assert!(err.to_string().contains("wegner.eps"), "{err}");
        let err = parse_config(WEGNER, &[("plan.M".into(), "0".into())]).unwrap_err();
        assert!(err.to_string().contains("plan.M"), "{err}");
    }

    #[test]
    fn profiles_and_backgrounds() {
        let text = WEGNER.replace(
            "L = 50",
            "L = 50\nprofile = { plateau = [1.0, 0.5] }\nbackground = { period = 2, values = [0.0, 0.5] }\ndisorder = { kind = \"piecewise_constant\", lo = 0.0, hi = 2.0, masses = [0.5, 0.5] }",
        );
        let (c, _) = parse_config(&text, &[]).unwrap();
        let m = c.model.build().unwrap();
        assert_eq!(m.profile().rank(), 2);
        assert_eq!(m.background().period(), 2);
        let bad = WEGNER.replace("L = 50", "L = 50\nprofile = \"gaussian\"");
        assert!(parse_config(&bad, &[]).is_err());
    }
}
