//! Fock-basis expansions of the input states: two-mode and single-mode
//! squeezed vacuum, the two-photon state `√b|20⟩ − √(1−b)|02⟩`, and plain
//! Fock states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{tensor_product, CutoffPolicy, FockState, StateVector};
use crate::matrix::check_targets;

/// Squeezing strength, stored as `r`; `λ = tanh r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    r: f64,
}

impl SqueezeParams {
    pub fn from_r(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain {
                name: "r",
                value: r,
                domain: "[0, ∞)",
            });
        }
        Ok(SqueezeParams { r })
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain {
                name: "lambda",
                value: lambda,
                domain: "[0, 1)",
            });
        }
        Ok(SqueezeParams { r: lambda.atanh() })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.r.tanh()
    }
}

/// Two-mode squeezed vacuum coefficient `s_n = √(1−λ²) λⁿ`.
pub fn tmss_coefficient(lambda: f64, n: u32) -> f64 {
    (1.0 - lambda * lambda).sqrt() * lambda.powi(n as i32)
}

/// `Σ_n s_n |nn⟩` for `2n ≤ max_total_photons`, real positive coefficients.
///
/// The weight of the dropped tail, `λ^{2(N+1)}`, is recorded as the
/// truncation deficit.
pub fn tmss(p: SqueezeParams, cutoff: CutoffPolicy) -> StateVector {
    let lambda = p.lambda();
    let n_max = cutoff.max_total_photons / 2;
    let terms = (0..=n_max).map(|n| {
        (
            FockState::new(vec![n, n]),
            Complex64::new(tmss_coefficient(lambda, n), 0.0),
        )
    });
    let deficit = lambda.powi(2 * (n_max as i32 + 1));
    StateVector::new(2, terms, cutoff)
        .expect("tmss terms are within the cutoff")
        .with_truncation_deficit(deficit)
}

/// Single-mode squeezed vacuum
/// `c_{2n} = (sech r)^{1/2} (tanh r)ⁿ √((2n)!) / (2ⁿ n!)`.
///
/// Coefficients are real and positive. With this convention, two copies
/// with a quarter-wave phase on the second mode followed by
/// `beamsplitter_r(1/2)` give exactly `tmss(λ = tanh r)`.
pub fn smsv(p: SqueezeParams, cutoff: CutoffPolicy) -> StateVector {
    let lambda = p.lambda();
    let n_max = cutoff.max_total_photons / 2;
    let mut coeff = p.r.cosh().recip().sqrt();
    let mut terms = Vec::with_capacity(n_max as usize + 1);
    let mut kept = 0.0;
    for n in 0..=n_max {
        terms.push((FockState::new(vec![2 * n]), Complex64::new(coeff, 0.0)));
        kept += coeff * coeff;
        // c_{2n+2} / c_{2n} = λ √((2n+1)/(2n+2))
        let k = f64::from(n);
        coeff *= lambda * ((2.0 * k + 1.0) / (2.0 * k + 2.0)).sqrt();
    }
    StateVector::new(1, terms, cutoff)
        .expect("smsv terms are within the cutoff")
        .with_truncation_deficit((1.0 - kept).max(0.0))
}

/// `√b|20⟩ − √(1−b)|02⟩`.
pub fn chi(b: f64) -> Result<StateVector> {
    check_unit_interval("b", b)?;
    StateVector::new(
        2,
        [
            (FockState::new(vec![2, 0]), Complex64::new(b.sqrt(), 0.0)),
            (FockState::new(vec![0, 2]), Complex64::new(-(1.0 - b).sqrt(), 0.0)),
        ],
        CutoffPolicy::new(2),
    )
}

/// The single Fock state with the given occupations.
pub fn fock(occupations: &[u32]) -> StateVector {
    let key = FockState::from(occupations);
    let cutoff = CutoffPolicy::new(key.total());
    StateVector::new(occupations.len(), [(key, Complex64::new(1.0, 0.0))], cutoff)
        .expect("single unit term")
}

pub fn vacuum(modes: usize) -> StateVector {
    fock(&vec![0; modes])
}

/// A source description, independent of where it sits in a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Tmss { lambda: f64 },
    Smsv { r: f64 },
    Chi { b: f64 },
    Fock { occupations: Vec<u32> },
    Vacuum,
}

impl Source {
    /// Number of modes the source occupies; `None` for vacuum, which fills any count.
    pub fn width(&self) -> Option<usize> {
        match self {
            Source::Tmss { .. } | Source::Chi { .. } => Some(2),
            Source::Smsv { .. } => Some(1),
            Source::Fock { occupations } => Some(occupations.len()),
            Source::Vacuum => None,
        }
    }

    pub fn state(&self, modes: usize, cutoff: CutoffPolicy) -> Result<StateVector> {
        if let Some(w) = self.width() {
            if w != modes {
                return Err(Error::ModeMismatch {
                    expected: w,
                    found: modes,
                });
            }
        }
        let s = match self {
            Source::Tmss { lambda } => tmss(SqueezeParams::from_lambda(*lambda)?, cutoff),
            Source::Smsv { r } => smsv(SqueezeParams::from_r(*r)?, cutoff),
            Source::Chi { b } => chi(*b)?,
            Source::Fock { occupations } => fock(occupations),
            Source::Vacuum => vacuum(modes),
        };
        Ok(s.with_cutoff(cutoff))
    }
}

/// A source attached to circuit modes, in the source's own mode order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedSource {
    pub source: Source,
    pub modes: Vec<usize>,
}

impl PlacedSource {
    pub fn new(source: Source, modes: Vec<usize>) -> Self {
        PlacedSource { source, modes }
    }
}

/// Tensor product of the placed sources on a `modes`-wide register, truncated
/// to `cutoff`. Modes not covered by any source start in vacuum.
pub fn prepare_input(modes: usize, sources: &[PlacedSource], cutoff: CutoffPolicy) -> Result<StateVector> {
    let mut position_of = vec![None; modes];
    let mut state = StateVector::new(0, [(FockState::new(vec![]), Complex64::new(1.0, 0.0))], cutoff)?;
    let mut width = 0;
    for p in sources {
        check_targets(&p.modes, modes)?;
        for &m in &p.modes {
            if position_of[m].is_some() {
                return Err(Error::DuplicateMode(m));
            }
            position_of[m] = Some(width);
            width += 1;
        }
        let part = p.source.state(p.modes.len(), cutoff)?;
        state = tensor_product(&state, &part).truncate(cutoff.max_total_photons);
    }
    let mut order = Vec::with_capacity(modes);
    let mut spare = width;
    for slot in position_of {
        match slot {
            Some(k) => order.push(k),
            None => {
                order.push(spare);
                spare += 1;
            }
        }
    }
    if spare > width {
        state = tensor_product(&state, &vacuum(spare - width));
    }
    Ok(state.permute_modes(&order)?.with_cutoff(cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::photon_number_support;
    use std::collections::BTreeSet;

    fn fs(v: &[u32]) -> FockState {
        FockState::from(v)
    }

    #[test]
    fn tmss_at_half_squeezing() {
        let p = SqueezeParams::from_lambda(0.5f64.sqrt()).unwrap();
        let s = tmss(p, CutoffPolicy::new(4));
        assert!((s.amplitude(&fs(&[0, 0])).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.amplitude(&fs(&[1, 1])).norm_sqr() - 0.25).abs() < 1e-15);
        assert!((s.amplitude(&fs(&[2, 2])).norm_sqr() - 0.125).abs() < 1e-15);
        assert!((s.truncation_deficit() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn tmss_zero_squeezing_is_vacuum() {
        let s = tmss(SqueezeParams::from_lambda(0.0).unwrap(), CutoffPolicy::new(6));
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&fs(&[0, 0])), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tmss_weights_are_geometric() {
        let s = tmss(SqueezeParams::from_lambda(0.3).unwrap(), CutoffPolicy::new(8));
        for n in 0..4u32 {
            let w0 = s.amplitude(&fs(&[n, n])).norm_sqr();
            let w1 = s.amplitude(&fs(&[n + 1, n + 1])).norm_sqr();
            assert!((w1 / w0 - 0.09).abs() < 1e-12);
        }
    }

    #[test]
    fn tmss_support_is_even() {
        let s = tmss(SqueezeParams::from_lambda(0.5).unwrap(), CutoffPolicy::new(6));
        assert_eq!(photon_number_support(&s), BTreeSet::from([0, 2, 4, 6]));
    }

    #[test]
    fn tmss_truncated_norm_matches_geometric_sum() {
        for &lambda in &[0.1, 0.5, 0.8] {
            for cut in [0u32, 3, 6, 11] {
                let s = tmss(SqueezeParams::from_lambda(lambda).unwrap(), CutoffPolicy::new(cut));
                let n_max = cut / 2;
                let closed: f64 = (0..=n_max)
                    .map(|n| (1.0 - lambda * lambda) * lambda.powi(2 * n as i32))
                    .sum();
                assert!((s.norm_sqr() - closed).abs() < 1e-14);
                assert!((s.norm_sqr() + s.truncation_deficit() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smsv_zero_is_vacuum() {
        let s = smsv(SqueezeParams::from_r(0.0).unwrap(), CutoffPolicy::new(8));
        assert_eq!(s.len(), 1);
        assert!((s.amplitude(&fs(&[0])) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn smsv_has_only_even_terms() {
        for cut in 0..12u32 {
            let s = smsv(SqueezeParams::from_r(0.7849).unwrap(), CutoffPolicy::new(cut));
            assert!(s.terms().all(|(k, _)| k.get(0) % 2 == 0));
        }
    }

    #[test]
    fn smsv_matches_closed_form_coefficients() {
        let r: f64 = 0.9350;
        let s = smsv(SqueezeParams::from_r(r).unwrap(), CutoffPolicy::new(10));
        for n in 0..=5u32 {
            let fact = |k: u32| -> f64 { (1..=k).map(f64::from).product() };
            let expected = (1.0 / r.cosh()).sqrt() * r.tanh().powi(n as i32) * fact(2 * n).sqrt()
                / (2f64.powi(n as i32) * fact(n));
            assert!((s.amplitude(&fs(&[2 * n])).re - expected).abs() < 1e-14);
        }
        assert!((s.norm_sqr() + s.truncation_deficit() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn squeeze_params_domain() {
        assert!(SqueezeParams::from_lambda(1.0).is_err());
        assert!(SqueezeParams::from_lambda(-0.1).is_err());
        assert!(SqueezeParams::from_r(-1.0).is_err());
        let p = SqueezeParams::from_r(0.3403).unwrap();
        let q = SqueezeParams::from_lambda(p.lambda()).unwrap();
        assert!((q.r() - 0.3403).abs() < 1e-14);
    }

    #[test]
    fn chi_examples() {
        let h = 0.5f64.sqrt();
        let s = chi(0.5).unwrap();
        assert!((s.amplitude(&fs(&[2, 0])).re - h).abs() < 1e-15);
        assert!((s.amplitude(&fs(&[0, 2])).re + h).abs() < 1e-15);
        let s = chi(1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&fs(&[2, 0])), Complex64::new(1.0, 0.0));
        let s = chi(2.0 / 3.0).unwrap();
        assert!((s.amplitude(&fs(&[2, 0])).re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.amplitude(&fs(&[0, 2])).re + (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(chi(1.5).is_err());
        assert!(chi(-0.5).is_err());
    }

    #[test]
    fn prepare_input_places_sources() {
        let sources = [
            PlacedSource::new(Source::Tmss { lambda: 0.5 }, vec![1, 3]),
            PlacedSource::new(Source::Fock { occupations: vec![2] }, vec![0]),
        ];
        let s = prepare_input(5, &sources, CutoffPolicy::new(4)).unwrap();
        assert_eq!(s.modes(), 5);
        let s0 = tmss_coefficient(0.5, 0);
        let s1 = tmss_coefficient(0.5, 1);
        assert!((s.amplitude(&fs(&[2, 0, 0, 0, 0])).re - s0).abs() < 1e-15);
        assert!((s.amplitude(&fs(&[2, 1, 0, 1, 0])).re - s1).abs() < 1e-15);
        assert_eq!(s.len(), 2);
        assert!(s.truncation_deficit() > 0.0);
        let clash = [
            PlacedSource::new(Source::Vacuum, vec![0, 1]),
            PlacedSource::new(Source::Smsv { r: 0.1 }, vec![1]),
        ];
        assert!(matches!(
            prepare_input(2, &clash, CutoffPolicy::new(2)),
            Err(Error::DuplicateMode(1))
        ));
        let bad_width = [PlacedSource::new(Source::Chi { b: 0.5 }, vec![0])];
        assert!(prepare_input(2, &bad_width, CutoffPolicy::new(2)).is_err());
    }

    #[test]
    fn fock_examples() {
        for occ in [&[1u32, 1][..], &[0, 0], &[2, 0, 1]] {
            let s = fock(occ);
            assert_eq!(s.len(), 1);
            assert_eq!(s.amplitude(&FockState::from(occ)), Complex64::new(1.0, 0.0));
        }
    }
}
