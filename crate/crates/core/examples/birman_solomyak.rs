//! Coupling-constant average of a weighted spectral projector against the integrated shift.

use ssf_lab::eig::EnergyInterval;
use ssf_lab::ssf::birman_solomyak_residual;
use ssf_lab::{build_free_hamiltonian, random_potential, sample_disorder, BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(1, 40)?, SiteProfile::delta(1))?;
    let h0 = build_free_hamiltonian(model.geometry(), model.background())?;
    for i in 0..5u64 {
        let v = random_potential(&model, &sample_disorder(model.disorder(), model.geometry(), 3, i))?;
        let a = 0.5 + i as f64;
        let window = EnergyInterval::new(a, a + 0.5)?;
        let c = birman_solomyak_residual(&h0, &v, &window, 1e-4)?;
        println!(
            "[{a:.1}, {:.1}): average {:.10}, integrated shift {:.10}, residual {:.1e}, {} evaluations",
            a + 0.5,
            c.lhs,
            c.rhs,
            c.residual,
            c.nodes
        );
    }
    Ok(())
}
