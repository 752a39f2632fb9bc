//! Fast built-in checks of the exact identities and small Monte Carlo facts
//! the library relies on. Each case is independent and deterministic.

use std::f64::consts::PI;

use crate::cache::{CacheKey, DiskCache, NoCache, SpectrumStore};
use crate::disorder::DisorderDistribution;
use crate::eig::{eigen_decompose, EnergyInterval, Spectrum};
use crate::error::Result;
use crate::geometry::BoxGeometry;
use crate::mc::{
    dos_bins, expected_ssf_bins, kappa_bins, run_indexed, run_realizations, ssd_scan, thermo_error_scan, wegner_scan,
    BinGrid, McPlan,
};
use crate::model::{
    assemble_hamiltonian, build_free_hamiltonian, translate_sample, with_site_coupling, BackgroundPotential, ModelSpec,
    SiteProfile,
};
use crate::operator::SymmetricOperator;
use crate::sample_disorder;
use crate::ssf::{
    birman_solomyak_residual, rank_bound_report, spectral_averaging_value, ssf_from_spectra, trace_formula_residual,
    RankNPerturbation, TestFunction,
};

pub struct SelftestCase {
    pub name: &'static str,
    pub run: fn() -> Result<bool>,
}

fn line(l: usize) -> BoxGeometry {
    BoxGeometry::new(1, l).expect("valid side")
}

fn delta(l: usize) -> ModelSpec {
    ModelSpec::anderson(line(l), SiteProfile::delta(1)).expect("valid model")
}

fn free(l: usize) -> ModelSpec {
    ModelSpec::new(
        line(l),
        BackgroundPotential::zero(),
        SiteProfile::delta(1),
        0.0,
        DisorderDistribution::Uniform01,
    )
    .expect("valid model")
}

fn plan(m: u64, lo: f64, hi: f64, bins: usize) -> Result<McPlan> {
    McPlan::new(m, 2024, 0, BinGrid::new(lo, hi, bins)?)
}

fn free_chain_spectrum() -> Result<bool> {
    let l = 16;
    let spec = eigen_decompose(&build_free_hamiltonian(&line(l), &BackgroundPotential::zero())?, false)?;
    let mut exact: Vec<f64> = (0..l)
        .map(|q| 2.0 - 2.0 * (2.0 * PI * q as f64 / l as f64).cos())
        .collect();
    exact.sort_by(f64::total_cmp);
    Ok(spec.values().iter().zip(&exact).all(|(a, b)| (a - b).abs() < 1e-12))
}

fn three_level_curve() -> Result<bool> {
    let c = ssf_from_spectra(
        &Spectrum::from_eigenvalues(vec![0.0, 1.0, 2.0]),
        &Spectrum::from_eigenvalues(vec![0.5, 1.5, 2.5]),
    )?;
    Ok(c.breakpoints() == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] && c.values() == [0, 1, 0, 1, 0, 1, 0])
}

fn krein_and_trace_formula() -> Result<bool> {
    let m = delta(30);
    let s = sample_disorder(m.disorder(), m.geometry(), 1, 0);
    let h0 = assemble_hamiltonian(&m, &s)?;
    let h1 = assemble_hamiltonian(&m, &with_site_coupling(&s, 4, s.couplings()[4] + 0.7))?;
    let (s0, s1) = (eigen_decompose(&h0, false)?, eigen_decompose(&h1, false)?);
    let krein = (ssf_from_spectra(&s0, &s1)?.total_integral() - 0.7).abs() < 1e-9 * 30.0 * 5.0;
    let tf = trace_formula_residual(&s0, &s1, &TestFunction::for_spectra(&s0, &s1))?.residual < 1e-10 * 30.0 * 5.0;
    Ok(krein && tf)
}

fn rank_one_bound() -> Result<bool> {
    let m = ModelSpec::anderson(BoxGeometry::new(2, 6)?, SiteProfile::delta(2))?;
    for i in 0..20 {
        let s = sample_disorder(m.disorder(), m.geometry(), 3, i);
        let j = (7 * i as usize) % 36;
        let c = ssf_from_spectra(
            &eigen_decompose(&assemble_hamiltonian(&m, &with_site_coupling(&s, j, 0.0))?, false)?,
            &eigen_decompose(&assemble_hamiltonian(&m, &with_site_coupling(&s, j, 1.0))?, false)?,
        )?;
        if c.min_value() < 0 || c.max_value() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn finite_rank_bound() -> Result<bool> {
    let h0 = assemble_hamiltonian(
        &delta(20),
        &sample_disorder(&DisorderDistribution::Uniform01, &line(20), 4, 0),
    )?;
    let mut rng = crate::disorder::stream_rng(4);
    for rank in 1..=4 {
        if !rank_bound_report(&h0, &RankNPerturbation::random(20, rank, 3.0, &mut rng)?)?.pass {
            return Ok(false);
        }
    }
    Ok(true)
}

fn birman_solomyak_one_by_one() -> Result<bool> {
    let c = birman_solomyak_residual(
        &SymmetricOperator::from_diagonal(&[0.0]),
        &[1.0],
        &EnergyInterval::new(-0.5, 0.5)?,
        1e-8,
    )?;
    Ok((c.rhs - 0.5).abs() < 1e-15 && c.residual < 1e-8)
}

fn spectral_averaging_one_by_one() -> Result<bool> {
    let b = RankNPerturbation::new(vec![vec![1.0]], vec![1.0])?;
    let r = spectral_averaging_value(
        &SymmetricOperator::from_diagonal(&[0.0]),
        &b,
        &[1.0],
        &EnergyInterval::new(0.0, 0.25)?,
        1e-8,
    )?;
    Ok((r.value - 0.25).abs() < 1e-8 && r.value <= r.bound + 1e-8)
}

fn translation_covariance() -> Result<bool> {
    let m = delta(12);
    let g = *m.geometry();
    let s = sample_disorder(m.disorder(), &g, 5, 0);
    let shift = [5, 0, 0];
    let curve = |sample: &crate::DisorderSample, j: usize| -> Result<crate::SsfCurve> {
        ssf_from_spectra(
            &eigen_decompose(&assemble_hamiltonian(&m, &with_site_coupling(sample, j, 0.0))?, false)?,
            &eigen_decompose(&assemble_hamiltonian(&m, &with_site_coupling(sample, j, 1.0))?, false)?,
        )
    };
    let a = curve(&s, 3)?;
    let b = curve(&translate_sample(&s, &shift), g.shifted(3, &shift))?;
    Ok(a.values() == b.values()
        && a.breakpoints().len() == b.breakpoints().len()
        && a.breakpoints()
            .iter()
            .zip(b.breakpoints())
            .all(|(x, y)| (x - y).abs() <= 1e-9))
}

fn engine_constant_and_determinism() -> Result<bool> {
    let p = plan(25, 0.0, 1.0, 1)?;
    let c = run_indexed(&p, |_| Ok(vec![0.3]))?;
    let m = delta(10);
    let k = |s: &crate::DisorderSample| Ok(eigen_decompose(&assemble_hamiltonian(&m, s)?, false)?.values().to_vec());
    let a = run_realizations(&m, &p.with_workers(1), k)?;
    let b = run_realizations(&m, &p.with_workers(4), k)?;
    Ok(c.mean == [0.3] && c.stderr == [0.0] && a == b)
}

fn uniform_mean() -> Result<bool> {
    let m = delta(3);
    let agg = run_realizations(&m, &plan(20_000, 0.0, 1.0, 1)?, |s| Ok(vec![s.couplings()[0]]))?;
    Ok((agg.mean[0] - 0.5).abs() <= 3.0 * agg.stderr[0])
}

fn wegner_gap() -> Result<bool> {
    let r = wegner_scan(&free(20), -1.0, &[0.2, 0.5], &plan(3, 0.0, 1.0, 1)?, &NoCache)?;
    Ok(r.points.iter().all(|p| p.count_per_site == 0.0 && p.probability == 0.0))
}

fn dos_mass_and_kappa() -> Result<bool> {
    let m = delta(16);
    let p = plan(10, -0.5, 5.5, 12)?;
    let d = dos_bins(&m, &p, &NoCache)?;
    let k = kappa_bins(&m, &p)?;
    let same = d
        .mean
        .iter()
        .zip(&k.measure.mean)
        .all(|(a, b)| (a - b).abs() <= 1e-10 * 16.0);
    Ok((d.total_mass() - 1.0).abs() < 1e-12 && same && k.bound_holds)
}

fn expected_ssf_mass() -> Result<bool> {
    let e = expected_ssf_bins(&delta(16), &plan(10, -0.5, 5.5, 12)?, &NoCache)?;
    Ok(e.mean.iter().all(|&x| (0.0..=1.0).contains(&x)) && (e.total_mass() - 1.0).abs() < 1e-10)
}

fn thermo_identical_boxes() -> Result<bool> {
    let r = thermo_error_scan(
        &delta(8),
        &[8],
        1,
        &EnergyInterval::new(1.5, 2.5)?,
        &[1.0],
        &plan(4, 0.0, 1.0, 1)?,
    )?;
    Ok(r.rows[0].error == 0.0 && r.rows[0].laplace == [0.0])
}

fn ssd_zero_disorder() -> Result<bool> {
    let r = ssd_scan(&free(24), &[8, 12], 24, &plan(2, -0.5, 4.5, 10)?, &NoCache)?;
    Ok(r.curves.iter().flatten().chain(&r.reference).all(|&x| x == 0.0))
}

fn cache_roundtrip() -> Result<bool> {
    let dir = tempfile::tempdir()?;
    let cache = DiskCache::open(dir.path())?;
    let m = delta(10);
    let s = sample_disorder(m.disorder(), m.geometry(), 6, 0);
    let key = CacheKey::new(&m, &s, "H");
    let h = assemble_hamiltonian(&m, &s)?;
    let produce = || eigen_decompose(&h, false);
    let a = cache.get_or_compute(key, &produce)?;
    let b = cache.get_or_compute(key, &produce)?;
    let path = cache.path_for(key);
    let bytes = std::fs::read(&path)?;
    std::fs::write(&path, &bytes[..bytes.len() - 3])?;
    let c = cache.get_or_compute(key, &produce)?;
    let bits = |s: &Spectrum| s.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    Ok(bits(&a) == bits(&b) && bits(&a) == bits(&c) && cache.hits() == 1 && cache.misses() == 2)
}

pub const CASES: &[SelftestCase] = &[
    SelftestCase {
        name: "free chain spectrum is the circulant spectrum",
        run: free_chain_spectrum,
    },
    SelftestCase {
        name: "hand-computed three-level SSF curve",
        run: three_level_curve,
    },
    SelftestCase {
        name: "Krein normalization and trace formula",
        run: krein_and_trace_formula,
    },
    SelftestCase {
        name: "rank-one perturbation gives 0 <= xi <= 1",
        run: rank_one_bound,
    },
    SelftestCase {
        name: "rank-N perturbation gives 0 <= xi <= N",
        run: finite_rank_bound,
    },
    SelftestCase {
        name: "Birman-Solomyak on a 1x1 pair",
        run: birman_solomyak_one_by_one,
    },
    SelftestCase {
        name: "spectral averaging on a 1x1 pair",
        run: spectral_averaging_one_by_one,
    },
    SelftestCase {
        name: "translation covariance of site SSFs",
        run: translation_covariance,
    },
    SelftestCase {
        name: "engine: constant kernel and worker independence",
        run: engine_constant_and_determinism,
    },
    SelftestCase {
        name: "engine: U[0,1] coupling mean within 3 stderr",
        run: uniform_mean,
    },
    SelftestCase {
        name: "Wegner counts vanish in a spectral gap",
        run: wegner_gap,
    },
    SelftestCase {
        name: "DOS has unit mass and equals kappa for the delta profile",
        run: dos_mass_and_kappa,
    },
    SelftestCase {
        name: "averaged SSF bins lie in [0, 1] with unit mass",
        run: expected_ssf_mass,
    },
    SelftestCase {
        name: "thermodynamic error vanishes for identical boxes",
        run: thermo_identical_boxes,
    },
    SelftestCase {
        name: "spectral shift density vanishes without disorder",
        run: ssd_zero_disorder,
    },
    SelftestCase {
        name: "cache miss, hit and corrupt-file recompute",
        run: cache_roundtrip,
    },
];

/// Runs every case, printing one line each. Returns the number of failures.
pub fn selftest(out: &mut dyn std::io::Write) -> std::io::Result<usize> {
    let mut failed = 0;
    for case in CASES {
        let (tag, extra) = match (case.run)() {
            Ok(true) => ("ok", String::new()),
            Ok(false) => ("FAIL", String::new()),
            Err(e) => ("FAIL", format!(": {e}")),
        };
        if tag != "ok" {
            failed += 1;
        }
        writeln!(out, "{tag:>4}  {}{extra}", case.name)?;
    }
    writeln!(out, "{} of {} checks passed", CASES.len() - failed, CASES.len())?;
    Ok(failed)
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_cases_pass() {
        let mut buf = Vec::new();
        let failed = super::selftest(&mut buf).unwrap();
        assert_eq!(failed, 0, "{}", String::from_utf8_lossy(&buf));
    }
}
