//! Seeded inputs shared by the benchmarks.

use heraldsim_core::{CMatrix, Complex64, ModeUnitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in the unit square.
pub fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    let data = (0..n * n)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    CMatrix::new(n, data).expect("square data")
}

/// Gram-Schmidt on a random matrix.
pub fn random_unitary(n: usize, seed: u64) -> ModeUnitary {
    let m = random_matrix(n, seed);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| m.get(i, j)).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    ModeUnitary::new(CMatrix::from_fn(n, |i, j| cols[j][i])).expect("orthonormal columns")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        assert!(random_unitary(6, 1).matrix().unitarity_deviation() < 1e-12);
    }
}
