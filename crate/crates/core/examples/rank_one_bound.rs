//! Exact spectral shift of a single-site bump: a step function with values in {0, 1}.
//!
//!     cargo run --release --example rank_one_bound -- 80

use ssf_lab::model::with_site_coupling;
use ssf_lab::ssf::ssf_from_spectra;
use ssf_lab::{assemble_hamiltonian, eigen_decompose, sample_disorder, BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let l: usize = std::env::args().nth(1).map_or(80, |a| a.parse().expect("integer L"));
    let model = ModelSpec::anderson(BoxGeometry::new(1, l)?, SiteProfile::delta(1))?;
    let sample = sample_disorder(model.disorder(), model.geometry(), 1, 0);
    let j = l / 2;
    let h0 = assemble_hamiltonian(&model, &with_site_coupling(&sample, j, 0.0))?;
    let h1 = assemble_hamiltonian(&model, &with_site_coupling(&sample, j, 1.0))?;
    let curve = ssf_from_spectra(&eigen_decompose(&h0, false)?, &eigen_decompose(&h1, false)?)?;
    println!(
        "site {j} of L={l}: {} pieces, values in [{}, {}], integral {:.12}",
        curve.values().len(),
        curve.min_value(),
        curve.max_value(),
        curve.total_integral()
    );
    for (a, b, v) in curve.pieces().filter(|p| p.2 != 0).take(8) {
        println!("  xi = {v} on [{a:.6}, {b:.6})");
    }
    Ok(())
}
