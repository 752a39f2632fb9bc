//! Spectrum of the free periodic Laplacian and of one Anderson realization.
//!
//!     cargo run --release --example free_spectrum -- 1 64

use std::time::Instant;

use ssf_lab::model::BackgroundPotential;
use ssf_lab::{
    assemble_hamiltonian, build_free_hamiltonian, eigen_decompose, sample_disorder, BoxGeometry, ModelSpec, SiteProfile,
};

fn main() -> ssf_lab::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let d = args.first().copied().unwrap_or(1);
    let l = args.get(1).copied().unwrap_or(64);
    let geom = BoxGeometry::new(d, l)?;

    let h0 = build_free_hamiltonian(&geom, &BackgroundPotential::zero())?;
    let t = Instant::now();
    let free = eigen_decompose(&h0, false)?;
    println!(
        "free box d={d} L={l}: n={} spectrum [{:.6}, {:.6}], max multiplicity {} ({:.2?})",
        free.len(),
        free.min().unwrap(),
        free.max().unwrap(),
        free.max_multiplicity(),
        t.elapsed()
    );

    let model = ModelSpec::anderson(geom, SiteProfile::delta(d))?;
    let sample = sample_disorder(model.disorder(), &geom, 7, 0);
    let h = assemble_hamiltonian(&model, &sample)?;
    let t = Instant::now();
    let spec = eigen_decompose(&h, true)?;
    println!(
        "anderson realization: spectrum [{:.6}, {:.6}], residual {:.2e}, orthonormality {:.2e} ({:.2?})",
        spec.min().unwrap(),
        spec.max().unwrap(),
        spec.max_residual(&h)?,
        spec.orthonormality_defect()?,
        t.elapsed()
    );
    Ok(())
}
