//! Passive linear-optical circuits and exact Fock-space scattering.
//!
//! A unitary `U` acts on creation operators as `a_j^† → Σ_i U[i][j] a_i^†`,
//! so the transition amplitude between Fock states is
//! `⟨out|U|in⟩ = Per(U[out, in]) / sqrt(Π in_j! Π out_i!)`, where the
//! submatrix repeats row `i` `out_i` times and column `j` `in_j` times.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{enumerate_sector, sector_size, FockState, StateVector, DEFAULT_BASIS_LIMIT};
use crate::matrix::{check_targets, CMatrix, ModeUnitary, INTERNAL_UNITARITY_TOL};
use crate::permanent::{ryser, DEFAULT_PERMANENT_LIMIT};

/// The real two-mode beamsplitter `[[√a, √(1−a)], [√(1−a), −√a]]`.
///
/// `a` is the intensity transmission from each input port to the output port
/// with the same index. The matrix is symmetric and squares to the identity.
pub fn beamsplitter_r(a: f64) -> Result<ModeUnitary> {
    check_unit_interval("a", a)?;
    let t = a.sqrt();
    let r = (1.0 - a).sqrt();
    let m = CMatrix::from_rows(&[
        vec![Complex64::new(t, 0.0), Complex64::new(r, 0.0)],
        vec![Complex64::new(r, 0.0), Complex64::new(-t, 0.0)],
    ])?;
    ModeUnitary::new(m)
}

/// [`beamsplitter_r`] parameterised by angle, with `a = cos²θ`.
pub fn beamsplitter_angle(theta: f64) -> ModeUnitary {
    let a = theta.cos().powi(2).clamp(0.0, 1.0);
    beamsplitter_r(a).expect("cos² lies in [0, 1]")
}

/// Single-mode phase shift `e^{iφ}`.
pub fn phase_shift(phi: f64) -> ModeUnitary {
    ModeUnitary::new(CMatrix::from_fn(1, |_, _| Complex64::from_polar(1.0, phi)))
        .expect("unit-modulus scalar is unitary")
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitElement {
    /// [`beamsplitter_r`]`(a)` with `modes[0]` as port 1 and `modes[1]` as port 2.
    Beamsplitter { modes: [usize; 2], a: f64 },
    Phase { mode: usize, phi: f64 },
    General { modes: Vec<usize>, unitary: ModeUnitary },
}

impl CircuitElement {
    pub fn beamsplitter(port1: usize, port2: usize, a: f64) -> Self {
        CircuitElement::Beamsplitter {
            modes: [port1, port2],
            a,
        }
    }

    pub fn target_modes(&self) -> Vec<usize> {
        match self {
            CircuitElement::Beamsplitter { modes, .. } => modes.to_vec(),
            CircuitElement::Phase { mode, .. } => vec![*mode],
            CircuitElement::General { modes, .. } => modes.clone(),
        }
    }

    pub fn local_unitary(&self) -> Result<ModeUnitary> {
        match self {
            CircuitElement::Beamsplitter { a, .. } => beamsplitter_r(*a),
            CircuitElement::Phase { phi, .. } => Ok(phase_shift(*phi)),
            CircuitElement::General { unitary, .. } => Ok(unitary.clone()),
        }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        let targets = self.target_modes();
        check_targets(&targets, modes)?;
        let local = self.local_unitary()?;
        if local.dim() != targets.len() {
            return Err(Error::ModeMismatch {
                expected: targets.len(),
                found: local.dim(),
            });
        }
        Ok(())
    }
}

/// Ordered sequence of elements; the first element acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    modes: usize,
    elements: Vec<CircuitElement>,
}

impl Circuit {
    pub fn new(modes: usize) -> Self {
        Circuit {
            modes,
            elements: Vec::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn push(&mut self, element: CircuitElement) -> Result<&mut Self> {
        element.validate(self.modes)?;
        self.elements.push(element);
        Ok(self)
    }

    pub fn with(mut self, element: CircuitElement) -> Result<Self> {
        self.push(element)?;
        Ok(self)
    }

    /// Full `modes × modes` unitary of the circuit.
    pub fn compose(&self) -> Result<ModeUnitary> {
        compose(self)
    }
}

pub fn compose(c: &Circuit) -> Result<ModeUnitary> {
    let mut total = ModeUnitary::identity(c.modes);
    // Externally supplied elements may carry their own deviation; it adds up.
    let mut inherited = 0.0;
    for e in &c.elements {
        let local = e.local_unitary()?;
        inherited += local.matrix().unitarity_deviation();
        let full = local.embed(&e.target_modes(), c.modes)?;
        total = full.then_after(&total);
    }
    ModeUnitary::with_tolerance(total.matrix().clone(), INTERNAL_UNITARITY_TOL + 3.0 * inherited)
}

/// `⟨output| U |input⟩`. Zero when photon numbers differ.
pub fn scattering_amplitude(
    input: &FockState,
    output: &FockState,
    u: &ModeUnitary,
) -> Result<Complex64> {
    if input.modes() != u.dim() || output.modes() != u.dim() {
        return Err(Error::ModeMismatch {
            expected: u.dim(),
            found: if input.modes() != u.dim() {
                input.modes()
            } else {
                output.modes()
            },
        });
    }
    let n = input.total();
    if n != output.total() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if n as usize > DEFAULT_PERMANENT_LIMIT {
        return Err(Error::ResourceLimit {
            what: "photon number",
            requested: n as usize,
            limit: DEFAULT_PERMANENT_LIMIT,
        });
    }
    let sub = u.matrix().select(&output.mode_list(), &input.mode_list());
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(ryser(sub.dim(), sub.data()) / norm)
}

/// Evolves `s` through `u`. Every reachable output with the same photon
/// number as some input term is evaluated.
pub fn apply(u: &ModeUnitary, s: &StateVector) -> Result<StateVector> {
    evolve(u, s, None)
}

/// Evolves `s` through `u`, keeping only outputs that show `counts` photons on
/// `detected_modes`. Cheaper than [`apply`] followed by projection.
pub fn apply_projected(
    u: &ModeUnitary,
    s: &StateVector,
    detected_modes: &[usize],
    counts: &[u32],
) -> Result<StateVector> {
    if detected_modes.len() != counts.len() {
        return Err(Error::ModeMismatch {
            expected: detected_modes.len(),
            found: counts.len(),
        });
    }
    check_targets(detected_modes, s.modes())?;
    evolve(u, s, Some((detected_modes, counts)))
}

struct PreparedInput {
    amplitude: Complex64,
    columns: Vec<usize>,
    norm: f64,
}

fn evolve(
    u: &ModeUnitary,
    s: &StateVector,
    fixed: Option<(&[usize], &[u32])>,
) -> Result<StateVector> {
    let modes = s.modes();
    if u.dim() != modes {
        return Err(Error::ModeMismatch {
            expected: modes,
            found: u.dim(),
        });
    }

    let mut sectors: BTreeMap<u32, Vec<PreparedInput>> = BTreeMap::new();
    for (key, amp) in s.terms() {
        sectors.entry(key.total()).or_default().push(PreparedInput {
            amplitude: *amp,
            columns: key.mode_list(),
            norm: key.factorial_product().sqrt(),
        });
    }

    let free_modes: Vec<usize> = match fixed {
        Some((detected, _)) => (0..modes).filter(|m| !detected.contains(m)).collect(),
        None => (0..modes).collect(),
    };
    let fixed_total: u32 = fixed.map_or(0, |(_, c)| c.iter().sum());

    let mut out_terms = BTreeMap::new();
    for (&n, inputs) in &sectors {
        if n < fixed_total {
            continue;
        }
        if n as usize > DEFAULT_PERMANENT_LIMIT {
            return Err(Error::ResourceLimit {
                what: "photon number",
                requested: n as usize,
                limit: DEFAULT_PERMANENT_LIMIT,
            });
        }
        let size = sector_size(free_modes.len(), n - fixed_total);
        if size > DEFAULT_BASIS_LIMIT {
            return Err(Error::ResourceLimit {
                what: "output sector size",
                requested: size,
                limit: DEFAULT_BASIS_LIMIT,
            });
        }
        let outputs: Vec<FockState> = enumerate_sector(free_modes.len(), n - fixed_total)
            .into_iter()
            .map(|free| {
                let mut occ = vec![0u32; modes];
                for (k, &m) in free_modes.iter().enumerate() {
                    occ[m] = free.get(k);
                }
                if let Some((detected, counts)) = fixed {
                    for (&m, &c) in detected.iter().zip(counts) {
                        occ[m] = c;
                    }
                }
                FockState::new(occ)
            })
            .collect();

        let amplitudes: Vec<Complex64> = outputs
            .par_iter()
            .map(|out| {
                let rows = out.mode_list();
                let out_norm = out.factorial_product().sqrt();
                let mut acc = Complex64::new(0.0, 0.0);
                let mut sub = vec![Complex64::new(0.0, 0.0); rows.len() * rows.len()];
                for input in inputs {
                    let k = rows.len();
                    for (r, &row) in rows.iter().enumerate() {
                        for (c, &col) in input.columns.iter().enumerate() {
                            sub[r * k + c] = u.get(row, col);
                        }
                    }
                    acc += input.amplitude * ryser(k, &sub) / (input.norm * out_norm);
                }
                acc
            })
            .collect();

        for (out, amp) in outputs.into_iter().zip(amplitudes) {
            out_terms.insert(out, amp);
        }
    }
    Ok(StateVector::from_map_unchecked(
        modes,
        out_terms,
        s.cutoff(),
        s.truncation_deficit(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{photon_number_support, CutoffPolicy};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fs(v: &[u32]) -> FockState {
        FockState::from(v)
    }

    #[test]
    fn beamsplitter_endpoints() {
        let u = beamsplitter_r(1.0).unwrap();
        assert_eq!(u.get(0, 0), c(1.0));
        assert_eq!(u.get(1, 1), c(-1.0));
        assert_eq!(u.get(0, 1), c(0.0));
        let h = beamsplitter_r(0.5).unwrap();
        let s = 0.5f64.sqrt();
        assert!((h.get(0, 0) - c(s)).norm() < 1e-15);
        assert!((h.get(1, 1) + c(s)).norm() < 1e-15);
        assert!(beamsplitter_r(1.2).is_err());
        assert!(beamsplitter_r(-0.1).is_err());
    }

    #[test]
    fn angle_wrapper_matches_intensity_form() {
        let theta = 0.3f64;
        let a = theta.cos().powi(2);
        assert!(beamsplitter_angle(theta)
            .matrix()
            .max_abs_diff(beamsplitter_r(a).unwrap().matrix())
            < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        let u = beamsplitter_r(0.5).unwrap();
        let input = fs(&[1, 1]);
        let h = 0.5f64.sqrt();
        assert!((scattering_amplitude(&input, &fs(&[2, 0]), &u).unwrap() - c(h)).norm() < 1e-15);
        assert!((scattering_amplitude(&input, &fs(&[0, 2]), &u).unwrap() + c(h)).norm() < 1e-15);
        assert!(scattering_amplitude(&input, &fs(&[1, 1]), &u).unwrap().norm() < 1e-15);
    }

    #[test]
    fn vacuum_to_vacuum_is_one() {
        let u = beamsplitter_r(0.3).unwrap();
        assert_eq!(scattering_amplitude(&fs(&[0, 0]), &fs(&[0, 0]), &u).unwrap(), c(1.0));
    }

    #[test]
    fn photon_number_mismatch_is_zero() {
        let u = beamsplitter_r(0.3).unwrap();
        assert_eq!(scattering_amplitude(&fs(&[1, 0]), &fs(&[1, 1]), &u).unwrap(), c(0.0));
        assert!(scattering_amplitude(&fs(&[1, 0, 0]), &fs(&[1, 0]), &u).is_err());
    }

    #[test]
    fn compose_empty_is_identity() {
        let u = Circuit::new(3).compose().unwrap();
        assert_eq!(u, ModeUnitary::identity(3));
    }

    #[test]
    fn compose_single_balanced_beamsplitter() {
        let circuit = Circuit::new(2)
            .with(CircuitElement::beamsplitter(0, 1, 0.5))
            .unwrap();
        let u = circuit.compose().unwrap();
        assert!(u.matrix().max_abs_diff(beamsplitter_r(0.5).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn r_is_an_involution() {
        for a in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            let circuit = Circuit::new(2)
                .with(CircuitElement::beamsplitter(0, 1, a))
                .unwrap()
                .with(CircuitElement::beamsplitter(0, 1, a))
                .unwrap();
            let u = circuit.compose().unwrap();
            assert!(u.matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14, "a = {a}");
        }
    }

    #[test]
    fn compose_applies_first_element_first() {
        // phase on mode 1, then a balanced splitter: column 1 carries the phase
        let circuit = Circuit::new(2)
            .with(CircuitElement::Phase { mode: 1, phi: std::f64::consts::FRAC_PI_2 })
            .unwrap()
            .with(CircuitElement::beamsplitter(0, 1, 0.5))
            .unwrap();
        let u = circuit.compose().unwrap();
        let h = 0.5f64.sqrt();
        assert!((u.get(0, 1) - Complex64::new(0.0, h)).norm() < 1e-15);
        assert!((u.get(1, 1) - Complex64::new(0.0, -h)).norm() < 1e-15);
        assert!((u.get(0, 0) - c(h)).norm() < 1e-15);
    }

    #[test]
    fn circuit_rejects_bad_targets() {
        let mut circuit = Circuit::new(2);
        assert!(circuit.push(CircuitElement::beamsplitter(0, 2, 0.5)).is_err());
        assert!(circuit.push(CircuitElement::beamsplitter(1, 1, 0.5)).is_err());
        assert!(circuit.push(CircuitElement::beamsplitter(0, 1, 1.5)).is_err());
    }

    #[test]
    fn apply_hom_on_state() {
        let s = StateVector::new(2, [(fs(&[1, 1]), c(1.0))], CutoffPolicy::new(2)).unwrap();
        let out = apply(&beamsplitter_r(0.5).unwrap(), &s).unwrap();
        let h = 0.5f64.sqrt();
        assert_eq!(out.len(), 2);
        assert!((out.amplitude(&fs(&[2, 0])) - c(h)).norm() < 1e-15);
        assert!((out.amplitude(&fs(&[0, 2])) + c(h)).norm() < 1e-15);
    }

    #[test]
    fn apply_identity_keeps_state() {
        let s = StateVector::new(
            2,
            [(fs(&[0, 0]), c(0.6)), (fs(&[2, 1]), Complex64::new(0.0, 0.8))],
            CutoffPolicy::new(3),
        )
        .unwrap();
        let out = apply(&ModeUnitary::identity(2), &s).unwrap();
        assert_eq!(out.len(), s.len());
        for (k, a) in s.terms() {
            assert!((out.amplitude(k) - a).norm() < 1e-15);
        }
        assert_eq!(photon_number_support(&out), photon_number_support(&s));
    }

    #[test]
    fn projected_apply_matches_full_apply() {
        let s = StateVector::new(
            3,
            [(fs(&[1, 1, 0]), c(0.6)), (fs(&[2, 0, 1]), c(0.8))],
            CutoffPolicy::new(3),
        )
        .unwrap();
        let circuit = Circuit::new(3)
            .with(CircuitElement::beamsplitter(0, 1, 0.3))
            .unwrap()
            .with(CircuitElement::beamsplitter(1, 2, 0.6))
            .unwrap();
        let u = circuit.compose().unwrap();
        let full = apply(&u, &s).unwrap();
        let projected = apply_projected(&u, &s, &[2], &[1]).unwrap();
        for (k, a) in projected.terms() {
            assert_eq!(k.get(2), 1);
            assert!((full.amplitude(k) - a).norm() < 1e-14);
        }
        let expected: usize = full.terms().filter(|(k, _)| k.get(2) == 1).count();
        assert_eq!(projected.len(), expected);
    }
}
