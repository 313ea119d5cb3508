//! Experiment drivers, config files and CSV output.
//!
//! Config files are flat UTF-8 `key = value` lines with `#` comments. Keys
//! are the scenario / experiment field names:
//!
//! | key               | default                         | range / format               |
//! |-------------------|---------------------------------|------------------------------|
//! | `experiment`      | required                        | fig1, fig2, fig3, sweep      |
//! | `M`               | required                        | >= 1                         |
//! | `K`               | 1                               | >= 1                         |
//! | `p`               | 1                               | > 0                          |
//! | `sigma2`          | 1                               | > 0                          |
//! | `alpha`           | 1/3                             | >= 0                         |
//! | `boff_db`         | 7 (0 for fig1)                  | >= 0                         |
//! | `kappa`           | 0.99                            | [0,1]                        |
//! | `combiner`        | DA-MMSE                         | MR, DA-MR, DA-MMSE           |
//! | `distortion_mode` | full                            | full, diagonal               |
//! | `diag_scope`      | both                            | both, sinr_only              |
//! | `trials`          | 2000                            | >= 1                         |
//! | `seed`            | 1                               | u64                          |
//! | `path_loss`       | all ones                        | comma list, K entries        |
//! | `K_grid`          | 1..20                           | `a..b` or comma list         |
//! | `combiners`       | fig3: DA-MMSE,DA-MR; sweep: all | comma list                   |
//! | `output_path`     | none                            | path                         |
//! | `alpha_list`      | 0,1/3,0.1340                    | comma list (fig1)            |
//! | `n_points`        | 101                             | >= 2 (fig1)                  |

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::channel::ScenarioConfig;
use crate::closedform::{lemma2_correlated, lemma2_uncorrelated, ue_distortion_moment};
use crate::combining::CombinerKind;
use crate::hardware::DistortionMode;
use crate::numerics::{db, from_db, mean_and_stderr};
use crate::parallel::Execution;
use crate::se::{distortion_moments_mc, ergodic_se_cells, Cell, DiagScope};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Fig3,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" => Some(Self::Fig1),
            "fig2" => Some(Self::Fig2),
            "fig3" => Some(Self::Fig3),
            "sweep" => Some(Self::Sweep),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub base: ScenarioConfig,
    pub k_grid: Vec<usize>,
    pub combiners: Vec<CombinerKind>,
    pub diag_scope: DiagScope,
    pub output_path: Option<PathBuf>,
    pub alpha_list: Vec<f64>,
    pub n_points: usize,
}

pub const GAN_ALPHA: f64 = 0.1340;
pub const WORST_CASE_ALPHA: f64 = 1.0 / 3.0;

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind, base: ScenarioConfig) -> Self {
        let combiners = match experiment {
            ExperimentKind::Sweep => vec![CombinerKind::Mr, CombinerKind::DaMr, CombinerKind::DaMmse],
            _ => vec![CombinerKind::DaMmse, CombinerKind::DaMr],
        };
        let diag_scope = base.diag_scope;
        Self {
            experiment,
            base,
            k_grid: (1..=20).collect(),
            combiners,
            diag_scope,
            output_path: None,
            alpha_list: vec![0.0, WORST_CASE_ALPHA, GAN_ALPHA],
            n_points: 101,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(Error::invalid("K_grid", "[]", "non-empty list"));
        }
        if self.k_grid[0] < 1 || self.k_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("K_grid", format!("{:?}", self.k_grid), "strictly increasing values >= 1"));
        }
        if self.combiners.is_empty() {
            return Err(Error::invalid("combiners", "[]", "non-empty list"));
        }
        if self.alpha_list.is_empty() || self.alpha_list.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::invalid("alpha_list", format!("{:?}", self.alpha_list), "non-empty list of values >= 0"));
        }
        if self.n_points < 2 {
            return Err(Error::invalid("n_points", self.n_points, ">= 2"));
        }
        if let Some(beta) = &self.base.path_loss {
            if self.experiment != ExperimentKind::Fig1 && self.k_grid.iter().any(|&k| k != beta.len()) {
                return Err(Error::invalid("path_loss", format!("{} entries", beta.len()), "one entry per UE for every K in K_grid"));
            }
        }
        self.base.validate()
    }

    /// Scenario for one grid point.
    pub fn scenario_for(&self, k: usize) -> ScenarioConfig {
        ScenarioConfig {
            k,
            diag_scope: self.diag_scope,
            ..self.base.clone()
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "M",
    "K",
    "p",
    "sigma2",
    "alpha",
    "boff_db",
    "kappa",
    "combiner",
    "distortion_mode",
    "diag_scope",
    "trials",
    "seed",
    "path_loss",
    "K_grid",
    "combiners",
    "output_path",
    "alpha_list",
    "n_points",
];
const REQUIRED_KEYS: &[&str] = &["experiment", "M"];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.parse().map_err(|_| Error::invalid(key, value, expected))
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    // accept simple fractions such as 1/3
    if let Some((n, d)) = value.split_once('/') {
        let n: f64 = parse_num(key, n.trim(), "a number")?;
        let d: f64 = parse_num(key, d.trim(), "a number")?;
        return Ok(n / d);
    }
    parse_num(key, value, "a number")
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).map_err(|_| Error::invalid(key, value, "comma-separated list")))
        .collect()
}

fn parse_k_grid(value: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: usize = parse_num("K_grid", lo.trim(), "`a..b` or a comma list")?;
        let hi: usize = parse_num("K_grid", hi.trim().trim_start_matches('='), "`a..b` or a comma list")?;
        return Ok((lo..=hi).collect());
    }
    parse_list("K_grid", value, |s| parse_num("K_grid", s, "integer"))
}

/// Parses and validates a config file's text.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    let mut entries: HashMap<String, String> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Syntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::UnknownKey {
                key: key.to_string(),
                line: line_no,
            });
        }
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Syntax {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| !entries.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }

    let experiment = ExperimentKind::parse(&entries["experiment"])
        .ok_or_else(|| Error::invalid("experiment", &entries["experiment"], "one of fig1, fig2, fig3, sweep"))?;
    let mut base = ScenarioConfig::default();
    if experiment == ExperimentKind::Fig1 {
        base.boff_db = 0.0;
    }
    let mut spec_fields: Vec<(&str, &String)> = entries.iter().map(|(k, v)| (k.as_str(), v)).collect();
    spec_fields.sort();

    let mut spec = ExperimentSpec::new(experiment, base);
    for (key, value) in spec_fields {
        let v = value.as_str();
        let b = &mut spec.base;
        match key {
            "experiment" => {}
            "M" => b.m = parse_num(key, v, "integer >= 1")?,
            "K" => b.k = parse_num(key, v, "integer >= 1")?,
            "p" => b.p = parse_real(key, v)?,
            "sigma2" => b.sigma2 = parse_real(key, v)?,
            "alpha" => b.alpha = parse_real(key, v)?,
            "boff_db" => b.boff_db = parse_real(key, v)?,
            "kappa" => b.kappa = parse_real(key, v)?,
            "combiner" => {
                b.combiner = CombinerKind::parse(v).ok_or_else(|| Error::invalid(key, v, "MR, DA-MR or DA-MMSE"))?
            }
            "distortion_mode" => {
                b.distortion_mode = DistortionMode::parse(v).ok_or_else(|| Error::invalid(key, v, "full or diagonal"))?
            }
            "diag_scope" => {
                let scope = DiagScope::parse(v).ok_or_else(|| Error::invalid(key, v, "both or sinr_only"))?;
                b.diag_scope = scope;
                spec.diag_scope = scope;
            }
            "trials" => b.trials = parse_num(key, v, "integer >= 1")?,
            "seed" => b.seed = parse_num(key, v, "unsigned 64-bit integer")?,
            "path_loss" => b.path_loss = Some(parse_list(key, v, |s| parse_real(key, s))?),
            "K_grid" => spec.k_grid = parse_k_grid(v)?,
            "combiners" => {
                spec.combiners = parse_list(key, v, |s| CombinerKind::parse(s).ok_or_else(|| Error::invalid(key, s, "combiner name")))?
            }
            "output_path" => spec.output_path = Some(PathBuf::from(v)),
            "alpha_list" => spec.alpha_list = parse_list(key, v, |s| parse_real(key, s))?,
            "n_points" => spec.n_points = parse_num(key, v, "integer >= 2")?,
            _ => unreachable!("key list and match arms disagree: {key}"),
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Output-amplitude curve of one amplifier.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplifierCurve {
    pub alpha: f64,
    /// `(input amplitude, output amplitude)` pairs on `[0, 1]`.
    pub points: Vec<(f64, f64)>,
}

/// `|g(u)| = u·|1 − a·u²|` on `n_points` evenly spaced amplitudes in
/// `[0, 1]`, with input power normalized to one so `a = α / b_off`.
pub fn run_fig1(alpha_list: &[f64], boff_db: f64, n_points: usize) -> Result<Vec<AmplifierCurve>> {
    if n_points < 2 {
        return Err(Error::invalid("n_points", n_points, ">= 2"));
    }
    let b = from_db(boff_db);
    alpha_list
        .iter()
        .map(|&alpha| {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::invalid("alpha_list", alpha, "values >= 0"));
            }
            let a = alpha / b;
            let points = (0..n_points)
                .map(|i| {
                    let u = i as f64 / (n_points - 1) as f64;
                    (u, u * (1.0 - a * u * u).abs())
                })
                .collect();
            Ok(AmplifierCurve { alpha, points })
        })
        .collect()
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub k: Option<usize>,
    pub combiner: String,
    pub mode: String,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    #[allow(clippy::too_many_arguments)]
    fn new(experiment: ExperimentKind, k: usize, combiner: &str, mode: &str, metric: &str, value: f64, stderr: Option<f64>, seed: u64) -> Self {
        Self {
            experiment: experiment.name(),
            k: Some(k),
            combiner: combiner.to_string(),
            mode: mode.to_string(),
            metric: metric.to_string(),
            value,
            stderr,
            seed,
        }
    }
}

/// Distortion powers versus K (normalized by σ²), closed form and Monte Carlo.
pub fn run_fig2(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_fig2_with(spec, Execution::default())
}

pub fn run_fig2_with(spec: &ExperimentSpec, exec: Execution) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let kind = ExperimentKind::Fig2;
    let mut rows = Vec::new();
    for (group, &k) in spec.k_grid.iter().enumerate() {
        let cfg = spec.scenario_for(k);
        let s2 = cfg.sigma2;
        let seed = cfg.seed;
        let ue_scale = cfg.p * (1.0 - cfg.kappa) / s2;
        let corr = lemma2_correlated(cfg.alpha, cfg.boff_db, cfg.p, cfg.m, k) / s2;
        let uncorr = lemma2_uncorrelated(cfg.alpha, cfg.boff_db, cfg.p, k) / s2;
        let ue = ue_scale * ue_distortion_moment(cfg.alpha, cfg.boff_db, cfg.m, k);
        let mc = distortion_moments_mc(&cfg, cfg.trials.max(2), group as u32, exec)?;
        let mut push = |mode: &str, metric: &str, value: f64, stderr: Option<f64>| {
            rows.push(ResultRow::new(kind, k, "MR", mode, metric, value, stderr, seed));
        };
        push("full", "bs_distortion_corr", corr, None);
        push("full", "bs_distortion_corr_db", db(corr), None);
        push("full", "bs_distortion_corr_mc", mc.correlated.mean / s2, Some(mc.correlated.stderr / s2));
        push("diagonal", "bs_distortion_uncorr", uncorr, None);
        push("diagonal", "bs_distortion_uncorr_db", db(uncorr), None);
        push("diagonal", "bs_distortion_uncorr_mc", mc.uncorrelated.mean / s2, Some(mc.uncorrelated.stderr / s2));
        push("none", "ue_distortion", ue, None);
        push("none", "ue_distortion_db", db(ue), None);
        push("none", "ue_distortion_mc", ue_scale * mc.ue_moment.mean, Some(ue_scale * mc.ue_moment.stderr));
        push("none", "corr_uncorr_gap_db", db(corr) - db(uncorr), None);
    }
    Ok(rows)
}

fn se_rows(kind: ExperimentKind, spec: &ExperimentSpec, modes: &[DistortionMode], exec: Execution) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cells: Vec<Cell> = spec
        .combiners
        .iter()
        .flat_map(|&combiner| modes.iter().map(move |&mode| Cell { combiner, mode }))
        .collect();
    let mut rows = Vec::new();
    for (group, &k) in spec.k_grid.iter().enumerate() {
        let cfg = spec.scenario_for(k);
        let results = ergodic_se_cells(&cfg, &cells, group as u32, exec)?;
        for &combiner in &spec.combiners {
            let name = combiner.name();
            let pick = |mode| results.iter().find(|r| r.cell == Cell { combiner, mode });
            for &mode in modes {
                let r = pick(mode).expect("cell evaluated");
                let (mean, se) = r.se_per_ue();
                let metric = if r.approx { "se_per_ue_approx" } else { "se_per_ue" };
                rows.push(ResultRow::new(kind, k, name, mode.name(), metric, mean, Some(se), cfg.seed));
            }
            if let (Some(full), Some(diag)) = (pick(DistortionMode::Full), pick(DistortionMode::Diagonal)) {
                let (full_mean, _) = full.se_per_ue();
                let diffs: Vec<f64> = diag
                    .trial_means()
                    .iter()
                    .zip(full.trial_means())
                    .map(|(d, f)| d - f)
                    .collect();
                let (diff_mean, diff_se) = mean_and_stderr(&diffs);
                rows.push(ResultRow::new(
                    kind,
                    k,
                    name,
                    "diagonal",
                    "se_rel_gap_pct",
                    100.0 * diff_mean / full_mean,
                    Some(100.0 * diff_se / full_mean),
                    cfg.seed,
                ));
            }
        }
    }
    Ok(rows)
}

/// Ergodic SE per UE versus K for each combiner, with the exact and the
/// diagonal distortion covariance, plus their relative gap.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_fig3_with(spec, Execution::default())
}

pub fn run_fig3_with(spec: &ExperimentSpec, exec: Execution) -> Result<Vec<ResultRow>> {
    se_rows(ExperimentKind::Fig3, spec, &[DistortionMode::Full, DistortionMode::Diagonal], exec)
}

/// Ergodic SE per UE versus K for each combiner using the configured
/// distortion mode only.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    se_rows(ExperimentKind::Sweep, spec, &[spec.base.distortion_mode], Execution::default())
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    Curves(Vec<AmplifierCurve>),
    Rows(Vec<ResultRow>),
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    match spec.experiment {
        ExperimentKind::Fig1 => {
            spec.validate()?;
            Ok(ExperimentOutput::Curves(run_fig1(&spec.alpha_list, spec.base.boff_db, spec.n_points)?))
        }
        ExperimentKind::Fig2 => Ok(ExperimentOutput::Rows(run_fig2(spec)?)),
        ExperimentKind::Fig3 => Ok(ExperimentOutput::Rows(run_fig3(spec)?)),
        ExperimentKind::Sweep => Ok(ExperimentOutput::Rows(run_sweep(spec)?)),
    }
}

pub const ROW_HEADER: [&str; 8] = ["experiment", "K", "combiner", "mode", "metric", "value", "stderr", "seed"];
pub const CURVE_HEADER: [&str; 3] = ["alpha", "input_amplitude", "output_amplitude"];

fn csv_error(e: csv::Error) -> Error {
    Error::Domain(format!("CSV encoding failed: {e}"))
}

/// CSV body (header row plus data) without the timestamp line.
pub fn render_csv(output: &ExperimentOutput) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match output {
        ExperimentOutput::Rows(rows) => {
            w.write_record(ROW_HEADER).map_err(csv_error)?;
            for r in rows {
                w.write_record([
                    r.experiment.to_string(),
                    r.k.map(|k| k.to_string()).unwrap_or_default(),
                    r.combiner.clone(),
                    r.mode.clone(),
                    r.metric.clone(),
                    r.value.to_string(),
                    r.stderr.map(|s| s.to_string()).unwrap_or_default(),
                    r.seed.to_string(),
                ])
                .map_err(csv_error)?;
            }
        }
        ExperimentOutput::Curves(curves) => {
            w.write_record(CURVE_HEADER).map_err(csv_error)?;
            for c in curves {
                for (u, out) in &c.points {
                    w.write_record([c.alpha.to_string(), u.to_string(), out.to_string()]).map_err(csv_error)?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Writes `# mimodist <experiment> generated_unix=<secs>` followed by the CSV body.
pub fn write_output(path: &Path, experiment: ExperimentKind, output: &ExperimentOutput) -> Result<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let body = render_csv(output)?;
    let text = format!("# mimodist {} generated_unix={stamp}\n{body}", experiment.name());
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minimal_fig3_config_uses_defaults() {
        let spec = parse_config_str("experiment = fig3\nM = 200\n").unwrap();
        assert_eq!(spec.experiment, ExperimentKind::Fig3);
        assert_eq!(spec.base.m, 200);
        assert_eq!(spec.base.kappa, 0.99);
        assert_relative_eq!(spec.base.alpha, 1.0 / 3.0);
        assert_eq!(spec.base.boff_db, 7.0);
        assert_eq!(db(spec.base.p / spec.base.sigma2), 0.0);
        assert_eq!(spec.base.trials, 2000);
        assert_eq!(spec.k_grid, (1..=20).collect::<Vec<_>>());
        assert_eq!(spec.combiners, vec![CombinerKind::DaMmse, CombinerKind::DaMr]);
        assert_eq!(spec.diag_scope, DiagScope::Both);
    }

    #[test]
    fn kappa_out_of_range() {
        let msg = parse_config_str("experiment = fig3\nM = 200\nkappa = 1.5\n").unwrap_err().to_string();
        assert!(msg.contains("kappa") && msg.contains("[0,1]"), "{msg}");
    }

    #[test]
    fn empty_file_lists_required_keys() {
        match parse_config_str("# nothing here\n\n") {
            Err(Error::MissingKeys(keys)) => assert_eq!(keys, vec!["experiment", "M"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_malformed_lines() {
        assert!(matches!(
            parse_config_str("experiment = fig2\nM = 8\nantennas = 3\n"),
            Err(Error::UnknownKey { line: 3, .. })
        ));
        assert!(matches!(parse_config_str("experiment fig2\n"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_config_str("M = 2\nM = 3\nexperiment = fig2"), Err(Error::Syntax { line: 2, .. })));
        let msg = parse_config_str("experiment = fig2\nM = many\n").unwrap_err().to_string();
        assert!(msg.contains("`M`"), "{msg}");
        let msg = parse_config_str("experiment = fig2\nM = 4\nK_grid = 3,2\n").unwrap_err().to_string();
        assert!(msg.contains("K_grid"), "{msg}");
    }

    #[test]
    fn full_config_round() {
        let text = "\
# scenario
experiment = sweep
M = 16
K = 2
p = 2
sigma2 = 0.5
alpha = 1/3      # worst case
boff_db = 3
kappa = 1
combiner = DA-MR
distortion_mode = diagonal
diag_scope = sinr_only
trials = 10
seed = 99
K_grid = 1, 2, 4
combiners = MR, DA-MMSE
output_path = out.csv
";
        let spec = parse_config_str(text).unwrap();
        assert_eq!(spec.experiment, ExperimentKind::Sweep);
        assert_eq!(spec.base.combiner, CombinerKind::DaMr);
        assert_eq!(spec.base.distortion_mode, DistortionMode::Diagonal);
        assert_eq!(spec.diag_scope, DiagScope::SinrOnly);
        assert_eq!(spec.k_grid, vec![1, 2, 4]);
        assert_eq!(spec.combiners, vec![CombinerKind::Mr, CombinerKind::DaMmse]);
        assert_eq!(spec.base.seed, 99);
        assert_eq!(spec.output_path, Some(PathBuf::from("out.csv")));
        let range = parse_config_str("experiment = fig2\nM = 4\nK_grid = 2..5\n").unwrap();
        assert_eq!(range.k_grid, vec![2, 3, 4, 5]);
    }

    #[test]
    fn fig1_curves() {
        let curves = run_fig1(&[0.0, WORST_CASE_ALPHA, GAN_ALPHA], 0.0, 11).unwrap();
        assert_eq!(curves.len(), 3);
        for (u, out) in &curves[0].points {
            assert_eq!(u, out);
        }
        let (u, out) = *curves[1].points.last().unwrap();
        assert_eq!(u, 1.0);
        assert_relative_eq!(out, 2.0 / 3.0, max_relative = 1e-15);
        let (_, out) = *curves[2].points.last().unwrap();
        assert_relative_eq!(out, 0.866, max_relative = 1e-12);
        let spec = parse_config_str("experiment = fig1\nM = 1\n").unwrap();
        assert_eq!(spec.base.boff_db, 0.0);
    }

    #[test]
    fn fig2_rows_small() {
        let mut spec = parse_config_str("experiment = fig2\nM = 8\nK_grid = 1,2\ntrials = 4000\n").unwrap();
        spec.base.seed = 3;
        let rows = run_fig2(&spec).unwrap();
        assert_eq!(rows.len(), 20);
        for k in [1usize, 2] {
            let get = |m: &str| rows.iter().find(|r| r.k == Some(k) && r.metric == m).unwrap();
            let cf = get("bs_distortion_corr").value;
            let mc = get("bs_distortion_corr_mc");
            assert!((mc.value - cf).abs() < 4.0 * mc.stderr.unwrap(), "K={k}");
            let gap = get("corr_uncorr_gap_db").value;
            assert_relative_eq!(gap, db(crate::closedform::distortion_ratio(8, k)), max_relative = 1e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![ResultRow::new(ExperimentKind::Fig3, 4, "DA-MMSE", "full", "se_per_ue", 5.5, Some(0.01), 7)];
        let text = render_csv(&ExperimentOutput::Rows(rows)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "experiment,K,combiner,mode,metric,value,stderr,seed");
        assert_eq!(lines.next().unwrap(), "fig3,4,DA-MMSE,full,se_per_ue,5.5,0.01,7");
    }
}
