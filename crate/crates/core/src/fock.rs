//! Fock basis labels, basis enumeration under a photon-number cutoff, and a
//! sparse state-vector type.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes below this magnitude are not stored.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-12;

/// Default bound on the number of basis states any single enumeration may produce.
pub const DEFAULT_BASIS_LIMIT: usize = 5_000_000;

/// Squared norm may exceed one by at most this much.
const NORM_SLACK: f64 = 1e-9;

/// Occupation-number vector: photons per mode.
///
/// Ordered graded-lexicographically: first by total photon number, then
/// lexicographically by occupations.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        FockState(occupations)
    }

    pub fn vacuum(modes: usize) -> Self {
        FockState(vec![0; modes])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Concatenation `|self⟩|other⟩`.
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut occ = Vec::with_capacity(self.0.len() + other.0.len());
        occ.extend_from_slice(&self.0);
        occ.extend_from_slice(&other.0);
        FockState(occ)
    }

    /// Keeps only the listed modes, in the listed order.
    pub fn select(&self, modes: &[usize]) -> FockState {
        FockState(modes.iter().map(|&m| self.0[m]).collect())
    }

    /// `∏ n_i!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }

    /// Expands occupations into a list of mode indices, each repeated by its occupation.
    pub fn mode_list(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for (mode, &n) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(mode, n as usize));
        }
        out
    }
}

impl From<Vec<u32>> for FockState {
    fn from(v: Vec<u32>) -> Self {
        FockState(v)
    }
}

impl From<&[u32]> for FockState {
    fn from(v: &[u32]) -> Self {
        FockState(v.to_vec())
    }
}

impl Ord for FockState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FockState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        if self.0.iter().all(|&n| n < 10) {
            for n in &self.0 {
                write!(f, "{n}")?;
            }
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join(","))?;
        }
        write!(f, "⟩")
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Truncation and zero-threshold settings carried by every state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub max_total_photons: u32,
    pub zero_threshold: f64,
}

impl CutoffPolicy {
    pub fn new(max_total_photons: u32) -> Self {
        CutoffPolicy {
            max_total_photons,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
        }
    }

    pub fn with_zero_threshold(mut self, zero_threshold: f64) -> Self {
        self.zero_threshold = zero_threshold;
        self
    }
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::new(8)
    }
}

/// Number of `modes`-mode occupation vectors with total at most `max_total`,
/// i.e. `C(max_total + modes, modes)`. Saturates at `usize::MAX`.
pub fn basis_size(modes: usize, max_total: u32) -> usize {
    let mut acc: u128 = 1;
    let n = max_total as u128 + modes as u128;
    for k in 1..=modes as u128 {
        acc = acc * (n - modes as u128 + k) / k;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Number of occupation vectors with exactly `n` photons in `modes` modes.
pub fn sector_size(modes: usize, n: u32) -> usize {
    if modes == 0 {
        return usize::from(n == 0);
    }
    basis_size(modes - 1, n)
}

/// All occupation vectors with exactly `n` photons, lexicographically ascending.
pub fn enumerate_sector(modes: usize, n: u32) -> Vec<FockState> {
    let mut out = Vec::with_capacity(sector_size(modes, n));
    if modes == 0 {
        if n == 0 {
            out.push(FockState(Vec::new()));
        }
        return out;
    }
    let mut current = vec![0u32; modes];
    fill_sector(&mut current, 0, n, &mut out);
    out
}

fn fill_sector(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<FockState>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(FockState(current.to_vec()));
        return;
    }
    for k in 0..=remaining {
        current[pos] = k;
        fill_sector(current, pos + 1, remaining - k, out);
    }
    current[pos] = 0;
}

/// All occupation vectors with total at most `max_total`, in graded lexicographic order.
pub fn enumerate_basis(modes: usize, max_total: u32) -> Result<Vec<FockState>> {
    enumerate_basis_with_limit(modes, max_total, DEFAULT_BASIS_LIMIT)
}

pub fn enumerate_basis_with_limit(
    modes: usize,
    max_total: u32,
    limit: usize,
) -> Result<Vec<FockState>> {
    if modes == 0 {
        return Err(Error::Domain {
            name: "modes",
            value: 0.0,
            domain: ">= 1",
        });
    }
    let size = basis_size(modes, max_total);
    if size > limit {
        return Err(Error::ResourceLimit {
            what: "basis size",
            requested: size,
            limit,
        });
    }
    let mut out = Vec::with_capacity(size);
    for n in 0..=max_total {
        out.extend(enumerate_sector(modes, n));
    }
    Ok(out)
}

/// An enumerated basis with a reverse index.
#[derive(Debug, Clone)]
pub struct FockBasis {
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockBasis {
    pub fn new(modes: usize, max_total: u32) -> Result<Self> {
        Ok(Self::from_states(enumerate_basis(modes, max_total)?))
    }

    pub fn from_states(states: Vec<FockState>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        FockBasis { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &FockState {
        &self.states[index]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }
}

/// Serialized form of a single state-vector term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub occupations: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Sparse pure state (possibly sub-normalized) over a fixed number of modes.
///
/// Terms are kept in canonical (graded lexicographic) order. A state carries
/// the weight lost to truncation when it was built, so downstream
/// probabilities can quote an explicit error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    modes: usize,
    terms: BTreeMap<FockState, Complex64>,
    cutoff: CutoffPolicy,
    truncation_deficit: f64,
}

impl StateVector {
    /// Builds a state from `(key, amplitude)` pairs. Repeated keys are summed;
    /// amplitudes at or below the zero threshold are dropped.
    pub fn new<I>(modes: usize, terms: I, cutoff: CutoffPolicy) -> Result<Self>
    where
        I: IntoIterator<Item = (FockState, Complex64)>,
    {
        let mut map: BTreeMap<FockState, Complex64> = BTreeMap::new();
        for (key, amp) in terms {
            if key.modes() != modes {
                return Err(Error::ModeMismatch {
                    expected: modes,
                    found: key.modes(),
                });
            }
            if key.total() > cutoff.max_total_photons {
                return Err(Error::InvalidState(format!(
                    "term {key} exceeds the photon cutoff {}",
                    cutoff.max_total_photons
                )));
            }
            *map.entry(key).or_default() += amp;
        }
        map.retain(|_, a| a.norm() > cutoff.zero_threshold);
        let state = StateVector {
            modes,
            terms: map,
            cutoff,
            truncation_deficit: 0.0,
        };
        let norm = state.norm_sqr();
        if !norm.is_finite() || norm > 1.0 + NORM_SLACK {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} exceeds 1"
            )));
        }
        Ok(state)
    }

    pub fn empty(modes: usize, cutoff: CutoffPolicy) -> Self {
        StateVector {
            modes,
            terms: BTreeMap::new(),
            cutoff,
            truncation_deficit: 0.0,
        }
    }

    /// Builds a state from a map whose keys are already known to be valid.
    pub(crate) fn from_map_unchecked(
        modes: usize,
        mut terms: BTreeMap<FockState, Complex64>,
        cutoff: CutoffPolicy,
        truncation_deficit: f64,
    ) -> Self {
        terms.retain(|_, a| a.norm() > cutoff.zero_threshold);
        StateVector {
            modes,
            terms,
            cutoff,
            truncation_deficit,
        }
    }

    pub fn with_truncation_deficit(mut self, deficit: f64) -> Self {
        self.truncation_deficit = deficit.max(0.0);
        self
    }

    pub fn from_records(modes: usize, records: &[StateRecord], cutoff: CutoffPolicy) -> Result<Self> {
        StateVector::new(
            modes,
            records.iter().map(|r| {
                (
                    FockState::new(r.occupations.clone()),
                    Complex64::new(r.re, r.im),
                )
            }),
            cutoff,
        )
    }

    pub fn to_records(&self) -> Vec<StateRecord> {
        self.terms
            .iter()
            .map(|(k, a)| StateRecord {
                occupations: k.occupations().to_vec(),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> CutoffPolicy {
        self.cutoff
    }

    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> + '_ {
        self.terms.iter()
    }

    pub fn term_map(&self) -> &BTreeMap<FockState, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, key: &FockState) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(FockState::total).max().unwrap_or(0)
    }

    /// Rescales to unit norm. Errors on the zero vector.
    pub fn normalized(&self) -> Result<StateVector> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroProbability);
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), a / norm))
            .collect();
        Ok(StateVector::from_map_unchecked(
            self.modes,
            terms,
            self.cutoff,
            self.truncation_deficit,
        ))
    }

    /// Drops every term above `max_total` photons; the dropped weight is added
    /// to the truncation deficit.
    pub fn truncate(&self, max_total: u32) -> StateVector {
        let mut dropped = 0.0;
        let mut terms = BTreeMap::new();
        for (k, a) in &self.terms {
            if k.total() <= max_total {
                terms.insert(k.clone(), *a);
            } else {
                dropped += a.norm_sqr();
            }
        }
        let cutoff = CutoffPolicy {
            max_total_photons: max_total.min(self.cutoff.max_total_photons),
            ..self.cutoff
        };
        StateVector::from_map_unchecked(self.modes, terms, cutoff, self.truncation_deficit + dropped)
    }

    /// Reorders modes: mode `i` of the result is mode `order[i]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<StateVector> {
        check_permutation(order, self.modes)?;
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.select(order), *a))
            .collect();
        Ok(StateVector::from_map_unchecked(
            self.modes,
            terms,
            self.cutoff,
            self.truncation_deficit,
        ))
    }

    pub fn with_cutoff(mut self, cutoff: CutoffPolicy) -> StateVector {
        self.cutoff = cutoff;
        self.terms.retain(|_, a| a.norm() > cutoff.zero_threshold);
        self
    }
}

fn check_permutation(order: &[usize], modes: usize) -> Result<()> {
    if order.len() != modes {
        return Err(Error::ModeMismatch {
            expected: modes,
            found: order.len(),
        });
    }
    let mut seen = vec![false; modes];
    for &m in order {
        if m >= modes {
            return Err(Error::ModeIndex { index: m, modes });
        }
        if seen[m] {
            return Err(Error::DuplicateMode(m));
        }
        seen[m] = true;
    }
    Ok(())
}

/// `|a⟩ ⊗ |b⟩` with `a`'s modes first.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let cutoff = CutoffPolicy {
        max_total_photons: a.cutoff.max_total_photons + b.cutoff.max_total_photons,
        zero_threshold: a.cutoff.zero_threshold.min(b.cutoff.zero_threshold),
    };
    let mut terms = BTreeMap::new();
    for (ka, aa) in &a.terms {
        for (kb, ab) in &b.terms {
            terms.insert(ka.concat(kb), aa * ab);
        }
    }
    let deficit = 1.0 - (1.0 - a.truncation_deficit) * (1.0 - b.truncation_deficit);
    StateVector::from_map_unchecked(a.modes + b.modes, terms, cutoff, deficit)
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.modes != b.modes {
        return Err(Error::ModeMismatch {
            expected: a.modes,
            found: b.modes,
        });
    }
    let (small, large, conj_small) = if a.len() <= b.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, x) in &small.terms {
        if let Some(y) = large.terms.get(k) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    Ok(acc)
}

/// Total photon numbers present in `s` above its zero threshold.
pub fn photon_number_support(s: &StateVector) -> BTreeSet<u32> {
    s.terms
        .iter()
        .filter(|(_, a)| a.norm() > s.cutoff.zero_threshold)
        .map(|(k, _)| k.total())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fs(v: &[u32]) -> FockState {
        FockState::from(v)
    }

    #[test]
    fn basis_single_mode_vacuum_only() {
        assert_eq!(enumerate_basis(1, 0).unwrap(), vec![fs(&[0])]);
    }

    #[test]
    fn basis_two_modes_one_photon() {
        let b = enumerate_basis(2, 1).unwrap();
        assert_eq!(b, vec![fs(&[0, 0]), fs(&[0, 1]), fs(&[1, 0])]);
    }

    #[test]
    fn basis_four_modes_four_photons_matches_brute_force() {
        // brute force over the 5^4 box
        let mut brute = 0;
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                for c in 0..=4u32 {
                    for d in 0..=4u32 {
                        if a + b + c + d <= 4 {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(brute, 70);
        assert_eq!(enumerate_basis(4, 4).unwrap().len(), 70);
        assert_eq!(basis_size(4, 4), 70);
    }

    #[test]
    fn basis_is_sorted_and_unique() {
        let b = enumerate_basis(3, 5).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn basis_limit_is_enforced() {
        let err = enumerate_basis_with_limit(8, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
        assert!(enumerate_basis(0, 2).is_err());
    }

    #[test]
    fn state_rejects_wrong_key_length() {
        let err = StateVector::new(2, [(fs(&[1]), c(1.0))], CutoffPolicy::new(4)).unwrap_err();
        assert_eq!(err, Error::ModeMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn state_drops_tiny_amplitudes() {
        let s = StateVector::new(
            1,
            [(fs(&[0]), c(1.0)), (fs(&[1]), c(1e-14))],
            CutoffPolicy::new(2),
        )
        .unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn state_rejects_overnormalized() {
        let err = StateVector::new(
            1,
            [(fs(&[0]), c(1.0)), (fs(&[1]), c(0.5))],
            CutoffPolicy::new(2),
        );
        assert!(err.is_err());
    }

    #[test]
    fn tensor_of_vacua() {
        let v = StateVector::new(1, [(fs(&[0]), c(1.0))], CutoffPolicy::new(2)).unwrap();
        let t = tensor_product(&v, &v);
        assert_eq!(t.modes(), 2);
        assert_eq!(t.amplitude(&fs(&[0, 0])), c(1.0));
    }

    #[test]
    fn tensor_concatenates_keys() {
        let s0 = 0.8;
        let s1 = 0.6;
        let a = StateVector::new(2, [(fs(&[0, 0]), c(s0)), (fs(&[1, 1]), c(s1))], CutoffPolicy::new(2))
            .unwrap();
        let b = StateVector::new(1, [(fs(&[1]), c(1.0))], CutoffPolicy::new(1)).unwrap();
        let t = tensor_product(&a, &b);
        assert_eq!(t.amplitude(&fs(&[0, 0, 1])), c(s0));
        assert_eq!(t.amplitude(&fs(&[1, 1, 1])), c(s1));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn inner_products() {
        let cut = CutoffPolicy::new(2);
        let v00 = StateVector::new(2, [(fs(&[0, 0]), c(1.0))], cut).unwrap();
        let v10 = StateVector::new(2, [(fs(&[1, 0]), c(1.0))], cut).unwrap();
        let v01 = StateVector::new(2, [(fs(&[0, 1]), c(1.0))], cut).unwrap();
        assert_eq!(inner_product(&v00, &v00).unwrap(), c(1.0));
        assert_eq!(inner_product(&v10, &v01).unwrap(), c(0.0));
        let h = 0.5f64.sqrt();
        let hom = StateVector::new(2, [(fs(&[2, 0]), c(h)), (fs(&[0, 2]), c(-h))], cut).unwrap();
        assert!((inner_product(&hom, &hom).unwrap() - c(1.0)).norm() < 1e-15);
        let one = StateVector::new(1, [(fs(&[0]), c(1.0))], cut).unwrap();
        assert!(inner_product(&one, &v00).is_err());
    }

    #[test]
    fn inner_product_conjugates_first_argument() {
        let cut = CutoffPolicy::new(1);
        let a = StateVector::new(1, [(fs(&[1]), Complex64::new(0.0, 1.0))], cut).unwrap();
        let b = StateVector::new(1, [(fs(&[1]), c(1.0))], cut).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(inner_product(&b, &a).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn support_of_ghz_like_state() {
        let eps: f64 = 0.01;
        let norm = (1.0 + eps).sqrt();
        let s = StateVector::new(
            4,
            [
                (fs(&[0, 0, 0, 0]), c(1.0 / norm)),
                (fs(&[1, 1, 1, 1]), c(eps.sqrt() / norm)),
            ],
            CutoffPolicy::new(4),
        )
        .unwrap();
        assert_eq!(photon_number_support(&s), BTreeSet::from([0, 4]));
    }

    #[test]
    fn truncate_moves_weight_to_deficit() {
        let s = StateVector::new(
            1,
            [(fs(&[0]), c(0.8)), (fs(&[2]), c(0.6))],
            CutoffPolicy::new(2),
        )
        .unwrap();
        let t = s.truncate(1);
        assert_eq!(t.len(), 1);
        assert!((t.truncation_deficit() - 0.36).abs() < 1e-15);
    }

    #[test]
    fn records_round_trip() {
        let s = StateVector::new(
            2,
            [(fs(&[1, 0]), Complex64::new(0.6, 0.0)), (fs(&[0, 1]), Complex64::new(0.0, -0.8))],
            CutoffPolicy::new(1),
        )
        .unwrap();
        let back = StateVector::from_records(2, &s.to_records(), s.cutoff()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn display_formats() {
        assert_eq!(fs(&[0, 2, 1, 1]).to_string(), "|0211⟩");
        assert_eq!(fs(&[10, 1]).to_string(), "|10,1⟩");
    }
}
