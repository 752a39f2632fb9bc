//! Eigenvalue counts of nested boxes: the per-site difference shrinks as the inner box grows.

use ssf_lab::eig::EnergyInterval;
use ssf_lab::mc::{thermo_error_scan, BinGrid, McPlan};
use ssf_lab::{BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(1, 16)?, SiteProfile::delta(1))?;
    let plan = McPlan::new(300, 9, 0, BinGrid::new(0.0, 1.0, 1)?)?;
    let report = thermo_error_scan(&model, &[16, 32, 64], 4, &EnergyInterval::new(1.5, 2.5)?, &[1.0], &plan)?;
    print!("{}", report.table().to_csv());
    println!(
        "error non-increasing within 2 stderr: {}",
        report.error_nonincreasing(2.0)
    );
    Ok(())
}
