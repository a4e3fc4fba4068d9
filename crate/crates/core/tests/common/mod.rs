#![allow(dead_code)]

use heraldsim_core::{CMatrix, Complex64, ModeUnitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng) -> f64 {
    let u1: f64 = r.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, r: &mut impl Rng) -> ModeUnitary {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| Complex64::new(gaussian(r), gaussian(r))).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    ModeUnitary::new(CMatrix::from_fn(n, |i, j| cols[j][i])).unwrap()
}

/// Entries drawn uniformly from the unit disk.
pub fn random_matrix(n: usize, r: &mut impl Rng) -> CMatrix {
    let mut data = Vec::with_capacity(n * n);
    while data.len() < n * n {
        let z = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            data.push(z);
        }
    }
    CMatrix::new(n, data).unwrap()
}
