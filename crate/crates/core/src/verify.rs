//! Gray-zone audit of small heralded amplitudes.
//!
//! Every branch amplitude whose magnitude falls in `[lower, upper]` is
//! recomputed in double-double arithmetic, with the squeezed-vacuum input
//! coefficients rebuilt at that precision as well. The two values are then
//! compared against their respective rounding floors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::fock::{FockState, StateVector};
use crate::herald::{HeraldPattern, HeraldResult};
use crate::matrix::ModeUnitary;
use crate::oracle::{extended_amplitude_dd, DdComplex, ExtendedAmplitude};
use crate::sources::SqueezeParams;

/// Upper edge of the gray zone.
pub const GRAY_ZONE_UPPER: f64 = 1e-4;

/// Unit roundoff of double-double arithmetic, `2^-104`.
const DD_EPSILON: f64 = 4.930380657631324e-32;

/// Required ratio between a real amplitude and the larger of the two floors.
pub const REAL_MARGIN: f64 = 10.0;

/// Relative rounding floors for an `n`-photon amplitude: double precision and
/// double-double. Both permanent formulas sum `2^(n-1)` or more terms.
pub fn rounding_floors(photons: u32) -> (f64, f64) {
    let growth = 16.0 * 2f64.powi(photons as i32);
    (growth * f64::EPSILON, growth * DD_EPSILON)
}

/// Relative precision limit set by the supplied unitary: `n · max|UU† − I|`.
pub fn unitary_precision(u: &ModeUnitary, photons: u32) -> f64 {
    f64::from(photons.max(1)) * u.matrix().unitarity_deviation()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The extended value clears both the double-precision floor and the
    /// precision of the supplied unitary by [`REAL_MARGIN`].
    Real,
    /// The extended value lies below the precision of the supplied unitary or
    /// the double-double floor.
    Noise,
    Inconclusive,
}

/// Input amplitudes held in double-double.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedInput {
    modes: usize,
    terms: Vec<(FockState, DdComplex)>,
}

impl ExtendedInput {
    /// Promotes a double-precision state; its rounding is carried along.
    pub fn from_state(s: &StateVector) -> Self {
        ExtendedInput {
            modes: s.modes(),
            terms: s
                .terms()
                .map(|(k, a)| (k.clone(), DdComplex::from(*a)))
                .collect(),
        }
    }

    /// Squeezed vacua on the first modes and vacuum ancillae after, truncated
    /// at `max_total` photons. Coefficients follow
    /// `c_{2n} = (1−λ²)^{1/4} λⁿ √((2n)!)/(2ⁿ n!)` with `λ` as a double.
    pub fn smsv_product(squeeze: &[SqueezeParams], ancillae: usize, max_total: u32) -> Self {
        let per_mode: Vec<Vec<TwoFloat>> = squeeze
            .iter()
            .map(|p| smsv_coefficients_dd(p.lambda(), max_total / 2))
            .collect();
        let modes = squeeze.len() + ancillae;
        let mut terms = Vec::new();
        let mut occ = vec![0u32; modes];
        product_terms(&per_mode, 0, max_total, TwoFloat::from(1.0), &mut occ, &mut terms);
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        ExtendedInput { modes, terms }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[(FockState, DdComplex)] {
        &self.terms
    }
}

fn smsv_coefficients_dd(lambda: f64, n_max: u32) -> Vec<TwoFloat> {
    let l = TwoFloat::from(lambda);
    let one = TwoFloat::from(1.0);
    let mut c = (one - l * l).sqrt().sqrt();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        out.push(c);
        let k = f64::from(n);
        let ratio = TwoFloat::from(2.0 * k + 1.0) / TwoFloat::from(2.0 * k + 2.0);
        c = c * l * ratio.sqrt();
    }
    out
}

fn product_terms(
    per_mode: &[Vec<TwoFloat>],
    mode: usize,
    budget: u32,
    acc: TwoFloat,
    occ: &mut Vec<u32>,
    out: &mut Vec<(FockState, DdComplex)>,
) {
    if mode == per_mode.len() {
        if acc != TwoFloat::from(0.0) {
            out.push((
                FockState::new(occ.clone()),
                DdComplex {
                    re: acc,
                    im: TwoFloat::from(0.0),
                },
            ));
        }
        return;
    }
    for (n, &c) in per_mode[mode].iter().enumerate() {
        let photons = 2 * n as u32;
        if photons > budget {
            break;
        }
        occ[mode] = photons;
        product_terms(per_mode, mode + 1, budget - photons, acc * c, occ, out);
    }
    occ[mode] = 0;
}

/// Re-inserts the herald counts into an output-mode key.
pub fn full_key(pattern: &HeraldPattern, width: usize, key: &FockState) -> Result<FockState> {
    let outputs = pattern.output_modes(width);
    if outputs.len() != key.modes() {
        return Err(Error::ModeMismatch {
            expected: outputs.len(),
            found: key.modes(),
        });
    }
    let mut occ = vec![0u32; width];
    for (k, &m) in outputs.iter().enumerate() {
        occ[m] = key.get(k);
    }
    for (&m, &c) in pattern.modes().iter().zip(pattern.counts()) {
        occ[m] = c;
    }
    Ok(FockState::new(occ))
}

/// Classifies an extended recomputation of an `photons`-photon amplitude.
/// `precision` is the relative precision of the unitary, see [`unitary_precision`].
pub fn classify(ext: &ExtendedAmplitude, photons: u32, precision: f64) -> Verdict {
    let e = ext.value.norm();
    let (double_floor, dd_floor) = rounding_floors(photons);
    let noise = precision.max(dd_floor) * ext.scale;
    if e <= noise {
        return Verdict::Noise;
    }
    if e > REAL_MARGIN * precision.max(double_floor) * ext.scale {
        Verdict::Real
    } else {
        Verdict::Inconclusive
    }
}

/// One audited amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayZoneEntry {
    /// Key on the undetected modes.
    pub key: FockState,
    /// Key including the detected modes.
    pub full_key: FockState,
    pub double: Complex64,
    pub extended: Complex64,
    pub scale: f64,
    pub verdict: Verdict,
}

/// Audits every table entry with `lower ≤ |amplitude| ≤ upper`.
pub fn audit_gray_zone(
    u: &ModeUnitary,
    input: &ExtendedInput,
    result: &HeraldResult,
    pattern: &HeraldPattern,
    lower: f64,
    upper: f64,
) -> Result<Vec<GrayZoneEntry>> {
    if input.modes() != u.dim() {
        return Err(Error::ModeMismatch {
            expected: u.dim(),
            found: input.modes(),
        });
    }
    let mut entries = Vec::new();
    let photons_of = |k: &FockState| k.total() + pattern.total();
    for (key, &double) in &result.amplitude_table {
        let m = double.norm();
        if m < lower || m > upper {
            continue;
        }
        let full = full_key(pattern, u.dim(), key)?;
        let ext = extended_amplitude_dd(u, input.terms(), &full)?;
        entries.push(GrayZoneEntry {
            key: key.clone(),
            full_key: full,
            double,
            extended: ext.value.to_c64(),
            scale: ext.scale,
            verdict: classify(&ext, photons_of(key), unitary_precision(u, photons_of(key))),
        });
    }
    Ok(entries)
}
