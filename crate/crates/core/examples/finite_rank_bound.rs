//! Random rank-n nonnegative perturbations: the shift stays within [0, n].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssf_lab::ssf::{rank_bound_report, RankNPerturbation};
use ssf_lab::{assemble_hamiltonian, sample_disorder, BoxGeometry, ModelSpec, SiteProfile};

fn main() -> ssf_lab::Result<()> {
    let model = ModelSpec::anderson(BoxGeometry::new(2, 8)?, SiteProfile::delta(2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..10u64 {
        let h0 = assemble_hamiltonian(&model, &sample_disorder(model.disorder(), model.geometry(), 5, i))?;
        let rank = 1 + (i as usize % 5);
        let b = RankNPerturbation::random(h0.dim(), rank, 2.0, &mut rng)?;
        let r = rank_bound_report(&h0, &b)?;
        println!(
            "rank {rank}: xi in [{}, {}] -> {}",
            r.min,
            r.sup,
            if r.pass { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
