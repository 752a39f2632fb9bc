//! Embedded boxes: the averaged shift curve approaches its large-box reference.

use ssf_lab::cache::NoCache;
use ssf_lab::mc::{ssd_scan, BinGrid, McPlan};
use ssf_lab::{BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(1, 16)?, SiteProfile::delta(1))?;
    let plan = McPlan::new(40, 5, 0, BinGrid::new(-0.5, 5.5, 30)?)?;
    let report = ssd_scan(&model, &[16, 32, 64], 256, &plan, &NoCache)?;
    print!("{}", report.gap_table().to_csv());
    println!(
        "sup-gap non-increasing within 2 stderr: {}",
        report.sup_gap_nonincreasing(2.0)
    );
    Ok(())
}
