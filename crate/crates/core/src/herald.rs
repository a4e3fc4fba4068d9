//! Conditioning on photon-number-resolved detection patterns.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{inner_product, CutoffPolicy, FockState, StateVector};
use crate::interferometer::apply_projected;
use crate::matrix::{check_targets, ModeUnitary};

/// Photon counts required on a set of detected modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldPattern {
    modes: Vec<usize>,
    counts: Vec<u32>,
}

impl HeraldPattern {
    pub fn new(modes: Vec<usize>, counts: Vec<u32>) -> Result<Self> {
        if modes.len() != counts.len() {
            return Err(Error::ModeMismatch {
                expected: modes.len(),
                found: counts.len(),
            });
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        Ok(HeraldPattern { modes, counts })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        check_targets(&self.modes, width)
    }

    /// Undetected modes of a `width`-mode system, ascending.
    pub fn output_modes(&self, width: usize) -> Vec<usize> {
        (0..width).filter(|m| !self.modes.contains(m)).collect()
    }

    pub fn matches(&self, key: &FockState) -> bool {
        self.modes
            .iter()
            .zip(&self.counts)
            .all(|(&m, &c)| key.get(m) == c)
    }
}

/// Outcome of heralding.
///
/// `amplitude_table` holds the unnormalized branch amplitudes keyed on the
/// undetected modes in ascending original-mode order (`output_modes`).
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldResult {
    pub conditional_state: StateVector,
    pub success_probability: f64,
    pub amplitude_table: BTreeMap<FockState, Complex64>,
    /// Additive uncertainty on `success_probability` from photon-number truncation.
    pub truncation_bound: f64,
    pub output_modes: Vec<usize>,
}

impl HeraldResult {
    /// True when the pattern never fires (to within the zero threshold).
    pub fn is_zero(&self) -> bool {
        self.conditional_state.is_empty()
    }

    pub fn amplitude(&self, key: &FockState) -> Complex64 {
        self.amplitude_table.get(key).copied().unwrap_or_default()
    }
}

/// Projects `s` onto `p` and drops the detected modes.
pub fn herald(s: &StateVector, p: &HeraldPattern) -> Result<HeraldResult> {
    p.validate(s.modes())?;
    let output_modes = p.output_modes(s.modes());
    let cutoff = s.cutoff();

    let mut table = BTreeMap::new();
    for (key, amp) in s.terms() {
        if p.matches(key) {
            table.insert(key.select(&output_modes), *amp);
        }
    }
    let success_probability: f64 = table.values().map(Complex64::norm_sqr).sum();

    let out_cutoff = CutoffPolicy {
        max_total_photons: cutoff.max_total_photons.saturating_sub(p.total()),
        ..cutoff
    };
    let conditional_state = if success_probability > cutoff.zero_threshold {
        let norm = success_probability.sqrt();
        StateVector::from_map_unchecked(
            output_modes.len(),
            table.iter().map(|(k, a)| (k.clone(), a / norm)).collect(),
            out_cutoff,
            0.0,
        )
    } else {
        StateVector::empty(output_modes.len(), out_cutoff)
    };

    Ok(HeraldResult {
        conditional_state,
        success_probability,
        amplitude_table: table,
        truncation_bound: s.truncation_deficit(),
        output_modes,
    })
}

/// Applies `u` to `s` and heralds on `p`, evaluating only outputs that match `p`.
pub fn herald_through(u: &ModeUnitary, s: &StateVector, p: &HeraldPattern) -> Result<HeraldResult> {
    p.validate(s.modes())?;
    let evolved = apply_projected(u, s, p.modes(), p.counts())?;
    herald(&evolved, p)
}

/// `|⟨target|s⟩|²`.
pub fn fidelity(s: &StateVector, target: &StateVector) -> Result<f64> {
    Ok(inner_product(target, s)?.norm_sqr().min(1.0))
}

/// `|x_target|² / P_succ`.
pub fn epsilon_ratio(result: &HeraldResult, target_key: &FockState) -> Result<f64> {
    if result.success_probability <= 0.0 || result.is_zero() {
        return Err(Error::ZeroProbability);
    }
    Ok(result.amplitude(target_key).norm_sqr() / result.success_probability)
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

    fn ghz_like(eps: f64) -> StateVector {
        let norm = (1.0 + eps).sqrt();
        StateVector::new(
            4,
            [
                (fs(&[0, 0, 0, 0]), c(1.0 / norm)),
                (fs(&[1, 1, 1, 1]), c(eps.sqrt() / norm)),
            ],
            CutoffPolicy::new(4),
        )
        .unwrap()
    }

    #[test]
    fn herald_projects_and_renormalizes() {
        let eps = 0.01;
        let s = ghz_like(eps);
        let p = HeraldPattern::new(vec![2, 3], vec![1, 1]).unwrap();
        let r = herald(&s, &p).unwrap();
        assert!((r.success_probability - eps / (1.0 + eps)).abs() < 1e-15);
        assert_eq!(r.conditional_state.len(), 1);
        assert!((r.conditional_state.amplitude(&fs(&[1, 1])) - c(1.0)).norm() < 1e-15);
        assert_eq!(r.output_modes, vec![0, 1]);
    }

    #[test]
    fn herald_beyond_support_is_zero() {
        let s = ghz_like(0.01);
        let p = HeraldPattern::new(vec![0, 1], vec![3, 3]).unwrap();
        let r = herald(&s, &p).unwrap();
        assert_eq!(r.success_probability, 0.0);
        assert!(r.is_zero());
        assert!(matches!(
            epsilon_ratio(&r, &fs(&[0, 0])),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn pattern_validation() {
        assert!(HeraldPattern::new(vec![0, 0], vec![1, 1]).is_err());
        assert!(HeraldPattern::new(vec![0], vec![1, 1]).is_err());
        let p = HeraldPattern::new(vec![5], vec![1]).unwrap();
        assert!(herald(&ghz_like(0.1), &p).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let s = ghz_like(0.2);
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-15);
        let a = crate::sources::fock(&[1, 0]);
        let b = crate::sources::fock(&[0, 1]);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert!(fidelity(&a, &s).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let h = 0.5f64.sqrt();
        let s = StateVector::new(
            2,
            [(fs(&[0, 0]), c(h)), (fs(&[1, 1]), c(h))],
            CutoffPolicy::new(2),
        )
        .unwrap();
        let p = HeraldPattern::new(vec![], vec![]).unwrap();
        let r = herald(&s, &p).unwrap();
        assert!((epsilon_ratio(&r, &fs(&[1, 1])).unwrap() - 0.5).abs() < 1e-15);
        let only = crate::sources::fock(&[1, 1]);
        let r = herald(&only, &p).unwrap();
        assert!((epsilon_ratio(&r, &fs(&[1, 1])).unwrap() - 1.0).abs() < 1e-15);
    }
}
