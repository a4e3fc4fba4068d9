//! Brute-force reference implementations, kept algorithmically separate from
//! the fast paths they check: a permutation-sum permanent, a Fock-space
//! propagator built by multinomial expansion of the creation operators, and a
//! double-double Glynn permanent for re-checking amplitudes near the noise
//! floor.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis_with_limit, CutoffPolicy, FockBasis, FockState, StateVector};
use crate::matrix::{CMatrix, ModeUnitary};

/// Largest dimension accepted by [`naive_permanent`].
pub const NAIVE_PERMANENT_LIMIT: usize = 9;

/// Largest basis accepted by [`dense_evolve`].
pub const DENSE_BASIS_LIMIT: usize = 4096;

/// Permanent as an explicit sum over all `n!` permutations.
pub fn naive_permanent(m: &CMatrix) -> Result<Complex64> {
    let n = m.dim();
    if n > NAIVE_PERMANENT_LIMIT {
        return Err(Error::ResourceLimit {
            what: "naive permanent dimension",
            requested: n,
            limit: NAIVE_PERMANENT_LIMIT,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(m, &mut perm, 0, &mut total);
    Ok(total)
}

fn permute(m: &CMatrix, perm: &mut Vec<usize>, k: usize, total: &mut Complex64) {
    if k == perm.len() {
        *total += perm
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (r, &c)| acc * m.get(r, c));
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(m, perm, k + 1, total);
        perm.swap(k, i);
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdComplex {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

impl DdComplex {
    pub fn zero() -> Self {
        DdComplex {
            re: TwoFloat::from(0.0),
            im: TwoFloat::from(0.0),
        }
    }

    pub fn one() -> Self {
        DdComplex {
            re: TwoFloat::from(1.0),
            im: TwoFloat::from(0.0),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(f64::from(self.re), f64::from(self.im))
    }

    pub fn norm(self) -> f64 {
        let sq = self.re * self.re + self.im * self.im;
        f64::from(sq.sqrt())
    }

    pub fn scale(self, k: TwoFloat) -> Self {
        DdComplex {
            re: self.re * k,
            im: self.im * k,
        }
    }
}

impl From<Complex64> for DdComplex {
    fn from(z: Complex64) -> Self {
        DdComplex {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    fn sub(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Neg for DdComplex {
    type Output = DdComplex;
    fn neg(self) -> DdComplex {
        DdComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Glynn's formula in double-double arithmetic with Gray-code sign flips:
/// `perm(A) = 2^{1-n} Σ_δ (Π_k δ_k) Π_j Σ_i δ_i a_ij`, `δ_0 = +1`.
pub fn glynn_permanent_dd(m: &CMatrix) -> DdComplex {
    let n = m.dim();
    if n == 0 {
        return DdComplex::one();
    }
    let a: Vec<DdComplex> = m.data().iter().map(|&z| DdComplex::from(z)).collect();
    let mut col_sums: Vec<DdComplex> = (0..n)
        .map(|j| (0..n).fold(DdComplex::zero(), |acc, i| acc + a[i * n + j]))
        .collect();
    let mut delta = vec![1i8; n];
    let mut sign = 1i8;
    let product = |sums: &[DdComplex]| sums.iter().fold(DdComplex::one(), |acc, &s| acc * s);
    let mut total = product(&col_sums);
    for k in 1u64..(1u64 << (n - 1)) {
        let row = k.trailing_zeros() as usize + 1;
        delta[row] = -delta[row];
        sign = -sign;
        let two = TwoFloat::from(2.0 * f64::from(delta[row]));
        for (j, s) in col_sums.iter_mut().enumerate() {
            *s = *s + a[row * n + j].scale(two);
        }
        let p = product(&col_sums);
        total = if sign > 0 { total + p } else { total - p };
    }
    total.scale(TwoFloat::from(2.0).powi(1 - n as i32))
}

/// Glynn permanent rounded to double precision.
pub fn glynn_permanent(m: &CMatrix) -> Complex64 {
    glynn_permanent_dd(m).to_c64()
}

fn factorial_product_dd(key: &FockState) -> TwoFloat {
    let mut acc = TwoFloat::from(1.0);
    for &n in key.occupations() {
        for k in 2..=n {
            acc *= TwoFloat::from(f64::from(k));
        }
    }
    acc
}

fn magnitude_bound(m: &CMatrix) -> f64 {
    let n = m.dim();
    let rows: f64 = (0..n).map(|i| (0..n).map(|j| m.get(i, j).norm()).sum::<f64>()).product();
    let cols: f64 = (0..n).map(|j| (0..n).map(|i| m.get(i, j).norm()).sum::<f64>()).product();
    rows.min(cols)
}

/// Full Fock-space propagator over a truncated basis.
#[derive(Debug, Clone)]
pub struct DenseFockOperator {
    basis: FockBasis,
    /// `matrix[out][in]`.
    matrix: CMatrix,
}

impl DenseFockOperator {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn element(&self, output: &FockState, input: &FockState) -> Option<Complex64> {
        let r = self.basis.index_of(output)?;
        let c = self.basis.index_of(input)?;
        Some(self.matrix.get(r, c))
    }

    /// Applies the operator to a state whose terms lie in the basis.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.basis.len()];
        for (key, amp) in s.terms() {
            let c = self.basis.index_of(key).ok_or_else(|| {
                Error::InvalidState(format!("term {key} lies outside the dense basis"))
            })?;
            for (r, slot) in out.iter_mut().enumerate() {
                *slot += self.matrix.get(r, c) * amp;
            }
        }
        let terms = self
            .basis
            .states()
            .iter()
            .cloned()
            .zip(out)
            .collect::<Vec<_>>();
        Ok(StateVector::new(s.modes(), terms, s.cutoff())?
            .with_truncation_deficit(s.truncation_deficit()))
    }

    /// Worst `|B B^† − I|` entry over the fixed-photon-number blocks.
    pub fn block_unitarity_deviation(&self) -> f64 {
        let mut by_sector: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, s) in self.basis.states().iter().enumerate() {
            by_sector.entry(s.total()).or_default().push(i);
        }
        let mut worst: f64 = 0.0;
        for idx in by_sector.values() {
            let block = self.matrix.select(idx, idx);
            worst = worst.max(block.unitarity_deviation());
        }
        worst
    }
}

/// Builds the Fock-space matrix of `u` by expanding
/// `Π_j (Σ_i U[i][j] a_i^†)^{n_j}` monomial by monomial for every basis input.
pub fn dense_evolve(u: &ModeUnitary, cutoff: CutoffPolicy) -> Result<DenseFockOperator> {
    let modes = u.dim();
    let states = enumerate_basis_with_limit(modes, cutoff.max_total_photons, DENSE_BASIS_LIMIT)?;
    let basis = FockBasis::from_states(states);
    let mut matrix = CMatrix::zeros(basis.len());

    for (c, input) in basis.states().iter().enumerate() {
        let mut poly: HashMap<Vec<u32>, Complex64> = HashMap::new();
        poly.insert(vec![0; modes], Complex64::new(1.0, 0.0));
        for (j, &n_j) in input.occupations().iter().enumerate() {
            for _ in 0..n_j {
                let mut next: HashMap<Vec<u32>, Complex64> = HashMap::with_capacity(poly.len() * modes);
                for (mono, coeff) in &poly {
                    for i in 0..modes {
                        let w = u.get(i, j);
                        if w == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut m = mono.clone();
                        m[i] += 1;
                        *next.entry(m).or_default() += coeff * w;
                    }
                }
                poly = next;
            }
        }
        let in_norm = input.factorial_product().sqrt();
        for (mono, coeff) in poly {
            let out = FockState::new(mono);
            // (a^†)^k |0⟩ = √k! |k⟩
            let amp = coeff * out.factorial_product().sqrt() / in_norm;
            let r = basis
                .index_of(&out)
                .expect("photon number is conserved, so the output lies in the basis");
            matrix.set(r, c, amp);
        }
    }
    Ok(DenseFockOperator { basis, matrix })
}

/// An amplitude recomputed in double-double arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedAmplitude {
    pub value: DdComplex,
    /// `Σ |c_in| B(U[out, in]) / norm`, with `B` the smaller of the products of
    /// absolute row sums and column sums. `B ≥ Per(|A|)` and bounds every
    /// term of the Glynn and Ryser sums, so rounding error is relative to it.
    pub scale: f64,
}

/// `⟨output| U |s⟩` with every permanent evaluated by the double-double Glynn formula.
pub fn extended_amplitude(
    u: &ModeUnitary,
    s: &StateVector,
    output: &FockState,
) -> Result<ExtendedAmplitude> {
    if s.modes() != u.dim() {
        return Err(Error::ModeMismatch {
            expected: s.modes(),
            found: u.dim(),
        });
    }
    let terms: Vec<(FockState, DdComplex)> = s
        .terms()
        .map(|(k, a)| (k.clone(), DdComplex::from(*a)))
        .collect();
    extended_amplitude_dd(u, &terms, output)
}

/// As [`extended_amplitude`], for input amplitudes already held in double-double.
pub fn extended_amplitude_dd(
    u: &ModeUnitary,
    terms: &[(FockState, DdComplex)],
    output: &FockState,
) -> Result<ExtendedAmplitude> {
    if output.modes() != u.dim() {
        return Err(Error::ModeMismatch {
            expected: u.dim(),
            found: output.modes(),
        });
    }
    let rows = output.mode_list();
    let out_fact = factorial_product_dd(output);
    let mut value = DdComplex::zero();
    let mut scale = 0.0;
    for (input, amp) in terms {
        if input.modes() != u.dim() {
            return Err(Error::ModeMismatch {
                expected: u.dim(),
                found: input.modes(),
            });
        }
        if input.total() != output.total() {
            continue;
        }
        let sub = u.matrix().select(&rows, &input.mode_list());
        let perm = glynn_permanent_dd(&sub);
        let norm = (factorial_product_dd(input) * out_fact).sqrt();
        value = value + (*amp * perm).scale(norm.recip());
        scale += amp.norm() * magnitude_bound(&sub) / f64::from(norm);
    }
    Ok(ExtendedAmplitude { value, scale })
}
