//! Krein's trace formula on a random symmetric pair, checked with a Gaussian test function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssf_lab::ssf::{trace_formula_residual, TestFunction};
use ssf_lab::{eigen_decompose, SymmetricOperator};

fn main() -> ssf_lab::Result<()> {
    let n = 150;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut h0 = SymmetricOperator::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            h0.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    let mut h1 = h0.clone();
    for i in 0..n {
        h1.set(i, i, h0.get(i, i) + rng.random_range(0.0..0.5));
    }
    let (s0, s1) = (eigen_decompose(&h0, false)?, eigen_decompose(&h1, false)?);
    for f in [
        TestFunction::for_spectra(&s0, &s1),
        TestFunction::gaussian(0.0, 1.0)?,
        TestFunction::gaussian(3.0, 0.2)?,
    ] {
        let c = trace_formula_residual(&s0, &s1, &f)?;
        println!(
            "f centred {:+.3} width {:.3}: trace {:+.12e}, ssf {:+.12e}, residual {:.2e}",
            f.center(),
            f.width(),
            c.trace_side,
            c.ssf_side,
            c.residual
        );
    }
    Ok(())
}
