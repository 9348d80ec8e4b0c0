#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgap::linalg::SymmetricMatrix;
use specgap::synth::gaussian;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense_symmetric(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(n, n.saturating_sub(1));
    for i in 0..n {
        for j in 0..=i {
            m.set(i, j, gaussian(rng));
        }
    }
    m
}

pub fn tridiagonal(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let e: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymmetricMatrix::tridiagonal(&d, &e).unwrap()
}
