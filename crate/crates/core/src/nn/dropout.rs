//! Inverted dropout. Training mode zeroes each element with the given
//! probability and scales survivors by 1/(1-rate); inference is identity.
//! The mask depends only on the seeded generator, never on the values, so a
//! fixed seed gives a fixed mask.

use super::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Infer,
}

/// Returns the output and the survivor mask (empty in inference mode).
pub fn dropout_forward<F: Scalar>(
    x: &[F],
    rate: f64,
    mode: DropoutMode,
    seed: u64,
) -> (Vec<F>, Vec<bool>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
    if mode == DropoutMode::Infer || rate == 0.0 {
        return (x.to_vec(), Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = F::from_f64(1.0 / (1.0 - rate));
    let mut out = Vec::with_capacity(x.len());
    let mut mask = Vec::with_capacity(x.len());
    for &v in x {
        let keep = rng.gen_range(0.0..1.0) >= rate;
        mask.push(keep);
        out.push(if keep { v * scale } else { F::ZERO });
    }
    (out, mask)
}

pub fn dropout_backward<F: Scalar>(dout: &[F], mask: &[bool], rate: f64) -> Vec<F> {
    if mask.is_empty() {
        return dout.to_vec();
    }
    let scale = F::from_f64(1.0 / (1.0 - rate));
    dout.iter()
        .zip(mask)
        .map(|(d, keep)| if *keep { *d * scale } else { F::ZERO })
        .collect()
}
