//! Binned expected spectral shift next to the density of states and the
//! per-realization weighted measure.

use ssf_lab::cache::NoCache;
use ssf_lab::mc::{dos_ssf_identity_report, kappa_bins, BinGrid, McPlan};
use ssf_lab::{BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(1, 256)?, SiteProfile::delta(1))?;
    let plan = McPlan::new(100, 7, 0, BinGrid::new(0.0, 5.0, 20)?)?;
    let report = dos_ssf_identity_report(&model, &plan, &NoCache)?;
    print!("{}", report.table().to_csv());
    println!(
        "bins agreeing within 3 stderr: {:.0}%",
        100.0 * report.agreement_fraction(3.0)
    );

    let plateau = ModelSpec::anderson(BoxGeometry::new(1, 64)?, SiteProfile::plateau_1d(&[1.0, 0.5])?)?;
    let k = kappa_bins(&plateau, &plan.with_samples(50)?)?;
    println!(
        "plateau profile: C0 = {}, bound holds = {} (max excess {:.1e})",
        k.c0, k.bound_holds, k.max_bound_excess
    );
    Ok(())
}
