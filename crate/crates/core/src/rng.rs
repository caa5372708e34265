//! Seeded random sources. Every random draw in the crate comes from a
//! ChaCha stream keyed by `(seed, stream)`, so results do not depend on
//! evaluation order or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

/// Independent stream `stream` of the master seed `seed`.
pub fn stream(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent uniform real and imaginary parts in `[-spread, spread]`.
pub fn complex<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Complex64 {
    Complex64::new(
        rng.gen_range(-spread..=spread),
        rng.gen_range(-spread..=spread),
    )
}
