//! Seeded random streams.
//!
//! Every sweep derives one independent ChaCha stream per trial index from the
//! run seed, so results never depend on scheduling or thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for a labelled sub-task; the label keeps unrelated sweeps sharing a
/// seed from reusing the same numbers.
pub fn labelled(seed: u64, label: &str, index: u64) -> StreamRng {
    let mut tag: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        tag ^= u64::from(b);
        tag = tag.wrapping_mul(0x0100_0000_01b3);
    }
    substream(seed ^ tag, index)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian (E|z|^2 = 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * gaussian(rng), s * gaussian(rng))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

/// Uniform point on the unit sphere of C^len.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    loop {
        let v = complex_vector(rng, len);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
