//! Expected eigenvalue counts in shrinking windows and the fitted Wegner constant.
//!
//!     cargo run --release --example wegner_scan -- 500

use ssf_lab::cache::NoCache;
use ssf_lab::mc::{wegner_scan, BinGrid, McPlan};
use ssf_lab::{BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let m: u64 = std::env::args().nth(1).map_or(500, |a| a.parse().expect("integer M"));
    let model = ModelSpec::anderson(BoxGeometry::new(1, 200)?, SiteProfile::delta(1))?;
    let plan = McPlan::new(m, 2024, 0, BinGrid::new(0.0, 1.0, 1)?)?;
    let report = wegner_scan(&model, 2.0, &[0.02, 0.05, 0.1, 0.2], &plan, &NoCache)?;
    print!("{}", report.table().to_csv());
    println!(
        "C_W = {:.4}, worst relative fit residual {:.3}",
        report.c_w,
        report.max_fit_residual()
    );
    Ok(())
}
