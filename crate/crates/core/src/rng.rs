//! Seeded random streams.
//!
//! All randomness flows from a `u64` seed through ChaCha8, which is portable
//! and bit-reproducible across platforms. Independent streams (trials,
//! stages) are derived by stream index rather than by drawing from a shared
//! generator, so results do not depend on execution order.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Row-major `rows x cols` matrix of standard normal draws.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Array2::from_shape_vec((rows, cols), values).expect("length matches shape")
}
