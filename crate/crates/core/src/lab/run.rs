use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde_json::{json, Value};

use super::config::{parse_config, ExperimentConfig, ExperimentKind};
use crate::cache::{DiskCache, NoCache, SpectrumStore};
use crate::disorder::{realization_seed, sample_disorder, stream_rng};
use crate::eig::EnergyInterval;
use crate::error::{Error, Result};
use crate::mc::{
    dos_ssf_identity_report, expected_ssf_bins, map_indexed, spectral_bounds, ssd_scan, thermo_error_scan, wegner_scan,
    McPlan,
};
use crate::model::{assemble_hamiltonian, build_free_hamiltonian, random_potential, ModelSpec};
use crate::report::{write_atomic, Table};
use crate::ssf::{birman_solomyak_residual, rank_bound_report, spectral_averaging_value, RankNPerturbation};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_CHECK_FAILED: u8 = 2;

/// Separates the random draws of instance-type experiments (windows, rank-N
/// directions) from the coupling streams.
const INSTANCE_STREAM_TAG: u64 = 0x696E_7374_616E_6365;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// `Some` when the config requested the check.
    pub check: Option<CheckResult>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        match &self.check {
            Some(c) if !c.passed => EXIT_CHECK_FAILED,
            _ => EXIT_OK,
        }
    }
}

struct Produced {
    table: Table,
    extra: Vec<(&'static str, Table)>,
    check: CheckResult,
}

fn check(passed: bool, detail: String) -> CheckResult {
    CheckResult { passed, detail }
}

fn instance_rng(plan: &McPlan, i: u64) -> rand_chacha::ChaCha8Rng {
    stream_rng(realization_seed(plan.master_seed() ^ INSTANCE_STREAM_TAG, i))
}

fn run_experiment(
    cfg: &ExperimentConfig,
    model: &ModelSpec,
    plan: &McPlan,
    store: &dyn SpectrumStore,
) -> Result<Produced> {
    match cfg.experiment {
        ExperimentKind::Wegner => {
            let w = cfg.wegner.as_ref().expect("validated");
            let r = wegner_scan(model, w.e0, &w.eps, plan, store)?;
            let monotone = r.points.windows(2).all(|p| p[1].count_per_site >= p[0].count_per_site);
            let fit = r.max_fit_residual();
            Ok(Produced {
                table: r.table(),
                extra: vec![],
                check: check(
                    monotone && fit <= w.max_fit_residual,
                    format!(
                        "C_W = {}, worst fit residual {fit} (limit {})",
                        r.c_w, w.max_fit_residual
                    ),
                ),
            })
        }
        ExperimentKind::SsfBound => {
            let s = cfg.ssf_bound.clone().unwrap_or_default();
            let est = expected_ssf_bins(model, plan, store)?;
            let rank = model.profile().rank() as f64;
            let mut in_range = est.mean.iter().all(|&x| (0.0..=rank).contains(&x));
            let mut detail = format!("bin means within [0, {rank}]: {in_range}");
            let mut table = est.table();
            if let Some(l2) = s.compare_l {
                let other_model =
                    model.with_geometry(crate::geometry::BoxGeometry::new(model.geometry().dim(), l2)?)?;
                let other = expected_ssf_bins(&other_model, plan, store)?;
                in_range &= other.mean.iter().all(|&x| (0.0..=rank).contains(&x));
                let unstable = (0..est.mean.len())
                    .filter(|&k| (est.mean[k] - other.mean[k]).abs() > s.k_sigma * est.stderr[k].hypot(other.stderr[k]))
                    .count();
                detail = format!(
                    "{detail}; {unstable} bins differ by more than {} stderr between L = {} and L = {l2}",
                    s.k_sigma,
                    model.geometry().side()
                );
                let mut t = Table::new([
                    "bin_start",
                    "bin_end",
                    "mean",
                    "stderr",
                    "compare_mean",
                    "compare_stderr",
                ]);
                for (k, row) in table.rows().iter().enumerate() {
                    t.push(vec![row[0], row[1], row[2], row[3], other.mean[k], other.stderr[k]])?;
                }
                table = t;
                in_range &= unstable == 0;
            }
            Ok(Produced {
                table,
                extra: vec![],
                check: check(in_range, detail),
            })
        }
        ExperimentKind::DosVsSsf => {
            let d = cfg.dos_vs_ssf.clone().unwrap_or_default();
            let r = dos_ssf_identity_report(model, plan, store)?;
            let frac = r.agreement_fraction(d.k_sigma);
            let gap = r.max_kappa_nu_gap.unwrap_or(0.0);
            let is_delta = model.profile().rank() == 1 && model.profile().total() == 1.0 && model.coupling() == 1.0;
            let slack = 1e-10 * model.geometry().site_count() as f64;
            let gap_ok = !is_delta || gap <= slack;
            Ok(Produced {
                table: r.table(),
                extra: vec![],
                check: check(
                    frac >= d.min_fraction && gap_ok,
                    format!(
                        "{:.1}% of bins within {} stderr (need {:.1}%), max per-realization |kappa - nu| {gap:e}",
                        100.0 * frac,
                        d.k_sigma,
                        100.0 * d.min_fraction
                    ),
                ),
            })
        }
        ExperimentKind::BirmanSolomyak => {
            let b = cfg.birman_solomyak.clone().unwrap_or_default();
            let h0 = build_free_hamiltonian(model.geometry(), model.background())?;
            let (lo, hi) = spectral_bounds(model);
            let rows = map_indexed(plan, |i| {
                let s = sample_disorder(model.disorder(), model.geometry(), plan.master_seed(), i);
                let v = random_potential(model, &s)?;
                let a = instance_rng(plan, i).random_range(lo..(hi - b.window_width).max(lo + 1e-12));
                let c = birman_solomyak_residual(&h0, &v, &EnergyInterval::new(a, a + b.window_width)?, b.tol)?;
                Ok(vec![
                    i as f64,
                    a,
                    a + b.window_width,
                    c.lhs,
                    c.rhs,
                    c.residual,
                    c.nodes as f64,
                ])
            })?;
            let mut table = Table::new([
                "instance",
                "window_start",
                "window_end",
                "lhs",
                "rhs",
                "residual",
                "evaluations",
            ]);
            for r in rows {
                table.push(r)?;
            }
            let worst = table.column("residual").unwrap().into_iter().fold(0.0, f64::max);
            let bound = b.tol.max(1e-6);
            Ok(Produced {
                table,
                extra: vec![],
                check: check(worst <= bound, format!("max residual {worst:e} (limit {bound:e})")),
            })
        }
        ExperimentKind::RankBound => {
            let r = cfg.rank_bound.clone().unwrap_or_default();
            let rows = map_indexed(plan, |i| {
                let s = sample_disorder(model.disorder(), model.geometry(), plan.master_seed(), i);
                let h0 = assemble_hamiltonian(model, &s)?;
                let mut rng = instance_rng(plan, i);
                let rank = rng.random_range(1..=r.max_rank.min(h0.dim()));
                let b = RankNPerturbation::random(h0.dim(), rank, r.max_weight, &mut rng)?;
                let rep = rank_bound_report(&h0, &b)?;
                Ok(vec![
                    i as f64,
                    rep.rank as f64,
                    rep.min as f64,
                    rep.sup as f64,
                    rep.pass as u8 as f64,
                ])
            })?;
            let mut table = Table::new(["instance", "rank", "min_xi", "max_xi", "pass"]);
            for row in rows {
                table.push(row)?;
            }
            let failures = table.column("pass").unwrap().iter().filter(|&&p| p == 0.0).count();
            Ok(Produced {
                table,
                extra: vec![],
                check: check(
                    failures == 0,
                    format!("{failures} of {} instances violate 0 <= xi <= rank", plan.samples()),
                ),
            })
        }
        ExperimentKind::ThermoLimit => {
            let t = cfg.thermo.as_ref().expect("validated");
            let r = thermo_error_scan(
                model,
                &t.inner_l,
                t.outer_factor,
                &EnergyInterval::new(t.window[0], t.window[1])?,
                &t.t,
                plan,
            )?;
            let err_ok = r.error_nonincreasing(t.k_sigma);
            let lap_ok = (0..t.t.len()).all(|k| r.laplace_nonincreasing(k, t.k_sigma));
            Ok(Produced {
                table: r.table(),
                extra: vec![],
                check: check(
                    err_ok && lap_ok,
                    format!(
                        "|error| nonincreasing within {} stderr: {err_ok}; Laplace proxy: {lap_ok}",
                        t.k_sigma
                    ),
                ),
            })
        }
        ExperimentKind::Ssd => {
            let s = cfg.ssd.as_ref().expect("validated");
            let r = ssd_scan(model, &s.inner_l, s.outer_l, plan, store)?;
            let ok = r.sup_gap_nonincreasing(s.k_sigma);
            Ok(Produced {
                table: r.table(),
                extra: vec![("sup_gap.csv", r.gap_table())],
                check: check(
                    ok,
                    format!(
                        "sup-gap {:?} nonincreasing within {} stderr: {ok}",
                        r.sup_gap, s.k_sigma
                    ),
                ),
            })
        }
        ExperimentKind::SpectralAveraging => {
            let s = cfg.spectral_averaging.clone().unwrap_or_default();
            let (lo, hi) = spectral_bounds(model);
            let rows = map_indexed(plan, |i| {
                let sample = sample_disorder(model.disorder(), model.geometry(), plan.master_seed(), i);
                let h0 = assemble_hamiltonian(model, &sample)?;
                let n = h0.dim();
                let mut rng = instance_rng(plan, i);
                let rank = rng.random_range(1..=s.max_rank.min(n));
                let b = RankNPerturbation::random(n, rank, 1.0, &mut rng)?;
                let mut phi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
                phi.iter_mut().for_each(|x| *x /= norm);
                let a = rng.random_range(lo..(hi - s.window_width).max(lo + 1e-12));
                let r = spectral_averaging_value(&h0, &b, &phi, &EnergyInterval::new(a, a + s.window_width)?, s.tol)?;
                Ok(vec![
                    i as f64,
                    rank as f64,
                    a,
                    a + s.window_width,
                    r.value,
                    r.psi_norm_sq,
                    r.bound,
                ])
            })?;
            let mut table = Table::new([
                "instance",
                "rank",
                "window_start",
                "window_end",
                "value",
                "psi_norm_sq",
                "bound",
            ]);
            for r in rows {
                table.push(r)?;
            }
            let excess = table
                .rows()
                .iter()
                .map(|r| r[4] - r[6])
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Produced {
                table,
                extra: vec![],
                check: check(excess <= 1e-4, format!("max value - bound {excess:e} (limit 1e-4)")),
            })
        }
    }
}

/// Runs a parsed config and writes `report.csv`, `summary.json` and
/// `manifest.json` (plus experiment-specific extras) into its output directory.
pub fn run_config(
    cfg: &ExperimentConfig,
    effective: &toml::Table,
    config_path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<RunOutcome> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let model = cfg.model.build()?;
    let plan = cfg.plan.build(&model)?;

    let disk = if cfg.cache {
        Some(DiskCache::open(DiskCache::default_dir())?)
    } else {
        None
    };
    let store: &dyn SpectrumStore = match &disk {
        Some(d) => d,
        None => &NoCache,
    };
    log::info!(
        "running {} on d = {} L = {} with M = {}",
        cfg.experiment.name(),
        model.geometry().dim(),
        model.geometry().side(),
        plan.samples()
    );
    let produced = run_experiment(cfg, &model, &plan, store)?;

    let out = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&out)?;
    let mut files = Vec::new();
    let mut write = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = out.join(name);
        write_atomic(&p, bytes)?;
        files.push(p);
        Ok(())
    };
    write("report.csv", produced.table.to_csv().as_bytes())?;
    let plan_json = serde_json::to_value(plan)?;
    let summary = produced
        .table
        .summary(cfg.experiment.name(), model.hash(), plan_json.clone());
    write("summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    for (name, table) in &produced.extra {
        write(name, table.to_csv().as_bytes())?;
    }

    let check = cfg.check.then(|| produced.check.clone());
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "config_path": config_path.map(|p| p.display().to_string()),
        "overrides": overrides.iter().map(|(k, v)| format!("--{k}={v}")).collect::<Vec<_>>(),
        "config": serde_json::to_value(effective)?,
        "config_toml": toml::to_string(effective).map_err(|e| Error::Config(e.to_string()))?,
        "model": serde_json::from_str::<Value>(&model.canonical_json())?,
        "model_hash": format!("{:016x}", model.hash()),
        "plan": plan_json,
        "seeding": "realization i uses ChaCha8 seeded with splitmix64(seed ^ rotl(i * 0x9E3779B97F4A7C15, 17))",
        "started_unix": started_unix,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "cache": disk.as_ref().map(|d| json!({
            "dir": d.dir().display().to_string(),
            "hits": d.hits(),
            "misses": d.misses(),
        })),
        "check": check.as_ref().map(|c| json!({"passed": c.passed, "detail": c.detail})),
        "check_summary": produced.check.detail,
    });
    write("manifest.json", serde_json::to_string_pretty(&manifest)?.as_bytes())?;

    Ok(RunOutcome {
        output_dir: out,
        files,
        check,
    })
}

/// Reads, overrides, validates and runs a config file.
pub fn run_file(path: &Path, overrides: &[(String, String)]) -> Result<RunOutcome> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let (cfg, effective) = parse_config(&text, overrides).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    run_config(&cfg, &effective, Some(path), overrides)
}
