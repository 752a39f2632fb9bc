//! The same Monte Carlo run twice through the on-disk spectrum cache.

use std::time::Instant;

use ssf_lab::cache::DiskCache;
use ssf_lab::mc::{dos_bins, BinGrid, McPlan};
use ssf_lab::{BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let dir = tempfile::tempdir()?;
    let cache = DiskCache::open(dir.path())?;
    let model = ModelSpec::anderson(BoxGeometry::new(2, 14)?, SiteProfile::delta(2))?;
    let plan = McPlan::new(100, 1, 0, BinGrid::new(-0.5, 9.5, 20)?)?;
    for pass in ["cold", "warm"] {
        let t = Instant::now();
        let d = dos_bins(&model, &plan, &cache)?;
        println!(
            "{pass}: mass {:.12}, hits {}, misses {} ({:.2?})",
            d.total_mass(),
            cache.hits(),
            cache.misses(),
            t.elapsed()
        );
    }
    let stats = cache.stats()?;
    println!("{} files, {} bytes", stats.files, stats.bytes);
    Ok(())
}
