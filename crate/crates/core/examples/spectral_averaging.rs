//! Averaged spectral measure of a rank-n perturbation, compared with min(||B^1/2 phi||^2, |I|).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssf_lab::eig::EnergyInterval;
use ssf_lab::ssf::{spectral_averaging_value, RankNPerturbation};
use ssf_lab::{assemble_hamiltonian, sample_disorder, BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(1, 30)?, SiteProfile::delta(1))?;
    let h0 = assemble_hamiltonian(&model, &sample_disorder(model.disorder(), model.geometry(), 9, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b = RankNPerturbation::random(h0.dim(), 3, 1.0, &mut rng)?;
    let mut phi = vec![0.0; h0.dim()];
    phi[15] = 1.0;
    for a in [0.0, 1.0, 2.0, 3.0] {
        let window = EnergyInterval::new(a, a + 0.5)?;
        let r = spectral_averaging_value(&h0, &b, &phi, &window, 1e-5)?;
        println!(
            "[{a:.1}, {:.1}): value {:.8} <= bound {:.8} ({} evaluations)",
            a + 0.5,
            r.value,
            r.bound,
            r.nodes
        );
    }
    Ok(())
}
