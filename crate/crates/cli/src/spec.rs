//! Circuit JSON.
//!
//! Mode indices are 1-based here and 0-based in the library; this module is
//! the only place that converts between the two.

use heraldsim_core::circuits::CircuitRecipe;
use heraldsim_core::matrix::EXTERNAL_UNITARITY_TOL;
use heraldsim_core::sources::{PlacedSource, Source};
use heraldsim_core::{
    CMatrix, Circuit, CircuitElement, CutoffPolicy, FockState, HeraldPattern, ModeUnitary,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub modes: usize,
    /// Maximum total photon number kept in the simulation.
    pub cutoff: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_threshold: Option<f64>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub herald: HeraldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_labels: Option<Vec<String>>,
    /// Output key whose weight ratio `|x_key|² / P_succ` is reported as ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_key: Option<Vec<u32>>,
    /// Parameters of the four-mode generator; adds a closed-form comparison
    /// to the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Tmss { modes: [usize; 2], lambda: f64 },
    Smsv { mode: usize, r: f64 },
    Chi { modes: [usize; 2], b: f64 },
    Fock { modes: Vec<usize>, occupations: Vec<u32> },
    Vacuum { modes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ElementSpec {
    /// `R(a)` with `modes[0]` as port 1.
    Beamsplitter { modes: [usize; 2], a: f64 },
    Phase { mode: usize, phi: f64 },
    /// Row-major `[re, im]` pairs, `a_j† → Σ_i U[i][j] a_i†`.
    General { modes: Vec<usize>, unitary: CMatrix },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldSpec {
    pub modes: Vec<usize>,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormSpec {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

/// Converts a 1-based mode to 0-based, checking it against `modes`.
pub fn zero_based(m: usize, modes: usize, location: &str) -> CliResult<usize> {
    if m == 0 || m > modes {
        return Err(CliError::schema(
            location,
            format!("mode {m} is outside 1..={modes} (modes are 1-based)"),
        ));
    }
    Ok(m - 1)
}

fn zero_based_all(ms: &[usize], modes: usize, location: &str) -> CliResult<Vec<usize>> {
    let out = ms
        .iter()
        .map(|&m| zero_based(m, modes, location))
        .collect::<CliResult<Vec<_>>>()?;
    for (i, m) in out.iter().enumerate() {
        if out[..i].contains(m) {
            return Err(CliError::schema(
                location,
                format!("mode {} listed more than once", m + 1),
            ));
        }
    }
    Ok(out)
}

fn one_based(ms: &[usize]) -> Vec<usize> {
    ms.iter().map(|m| m + 1).collect()
}

impl CircuitSpec {
    pub fn cutoff_policy(&self) -> CutoffPolicy {
        let c = CutoffPolicy::new(self.cutoff);
        match self.zero_threshold {
            Some(z) => c.with_zero_threshold(z),
            None => c,
        }
    }

    pub fn to_recipe(&self) -> CliResult<CircuitRecipe> {
        let n = self.modes;
        if n == 0 {
            return Err(CliError::schema("modes", "a circuit needs at least one mode"));
        }
        if let Some(z) = self.zero_threshold {
            if !(z >= 0.0) {
                return Err(CliError::schema("zero_threshold", "must be non-negative"));
            }
        }

        let mut covered = vec![None; n];
        let mut sources = Vec::with_capacity(self.sources.len());
        for (i, s) in self.sources.iter().enumerate() {
            let loc = format!("sources[{i}].modes");
            let (source, modes) = match s {
                SourceSpec::Tmss { modes, lambda } => (Source::Tmss { lambda: *lambda }, modes.to_vec()),
                SourceSpec::Smsv { mode, r } => (Source::Smsv { r: *r }, vec![*mode]),
                SourceSpec::Chi { modes, b } => (Source::Chi { b: *b }, modes.to_vec()),
                SourceSpec::Fock { modes, occupations } => {
                    if modes.len() != occupations.len() {
                        return Err(CliError::schema(
                            format!("sources[{i}].occupations"),
                            format!("{} occupations for {} modes", occupations.len(), modes.len()),
                        ));
                    }
                    (
                        Source::Fock {
                            occupations: occupations.clone(),
                        },
                        modes.clone(),
                    )
                }
                SourceSpec::Vacuum { modes } => (Source::Vacuum, modes.clone()),
            };
            let modes = zero_based_all(&modes, n, &loc)?;
            for &m in &modes {
                if let Some(j) = covered[m] {
                    return Err(CliError::schema(
                        loc,
                        format!("mode {} is already covered by sources[{j}]", m + 1),
                    ));
                }
                covered[m] = Some(i);
            }
            sources.push(PlacedSource::new(source, modes));
        }

        let mut circuit = Circuit::new(n);
        for (i, e) in self.elements.iter().enumerate() {
            let loc = format!("elements[{i}]");
            let element = match e {
                ElementSpec::Beamsplitter { modes, a } => {
                    let m = zero_based_all(modes, n, &format!("{loc}.modes"))?;
                    CircuitElement::beamsplitter(m[0], m[1], *a)
                }
                ElementSpec::Phase { mode, phi } => CircuitElement::Phase {
                    mode: zero_based(*mode, n, &format!("{loc}.mode"))?,
                    phi: *phi,
                },
                ElementSpec::General { modes, unitary } => {
                    let m = zero_based_all(modes, n, &format!("{loc}.modes"))?;
                    if unitary.dim() != m.len() {
                        return Err(CliError::schema(
                            format!("{loc}.unitary"),
                            format!("{}x{} matrix for {} modes", unitary.dim(), unitary.dim(), m.len()),
                        ));
                    }
                    CircuitElement::General {
                        modes: m,
                        unitary: ModeUnitary::with_tolerance(unitary.clone(), EXTERNAL_UNITARITY_TOL)?,
                    }
                }
            };
            circuit.push(element)?;
        }

        if self.herald.modes.len() != self.herald.counts.len() {
            return Err(CliError::schema(
                "herald.counts",
                format!(
                    "{} counts for {} herald modes",
                    self.herald.counts.len(),
                    self.herald.modes.len()
                ),
            ));
        }
        let herald_modes = zero_based_all(&self.herald.modes, n, "herald.modes")?;
        let pattern = HeraldPattern::new(herald_modes, self.herald.counts.clone())?;
        let outputs = pattern.output_modes(n);
        let labels = match &self.output_labels {
            Some(l) if l.len() != outputs.len() => {
                return Err(CliError::schema(
                    "output_labels",
                    format!("{} labels for {} undetected modes", l.len(), outputs.len()),
                ))
            }
            Some(l) => l.clone(),
            None => outputs.iter().map(|m| format!("mode{}", m + 1)).collect(),
        };
        if let Some(k) = &self.epsilon_key {
            if k.len() != outputs.len() {
                return Err(CliError::schema(
                    "epsilon_key",
                    format!("key has {} entries for {} undetected modes", k.len(), outputs.len()),
                ));
            }
        }
        Ok(CircuitRecipe::new(circuit, sources, self.cutoff_policy(), pattern, labels)?)
    }

    pub fn epsilon_state(&self) -> Option<FockState> {
        self.epsilon_key.clone().map(FockState::new)
    }

    /// Spec reproducing `recipe` exactly.
    pub fn from_recipe(recipe: &CircuitRecipe) -> CircuitSpec {
        let sources = recipe
            .sources
            .iter()
            .map(|p| {
                let m = one_based(&p.modes);
                match &p.source {
                    Source::Tmss { lambda } => SourceSpec::Tmss {
                        modes: [m[0], m[1]],
                        lambda: *lambda,
                    },
                    Source::Smsv { r } => SourceSpec::Smsv { mode: m[0], r: *r },
                    Source::Chi { b } => SourceSpec::Chi {
                        modes: [m[0], m[1]],
                        b: *b,
                    },
                    Source::Fock { occupations } => SourceSpec::Fock {
                        modes: m,
                        occupations: occupations.clone(),
                    },
                    Source::Vacuum => SourceSpec::Vacuum { modes: m },
                }
            })
            .collect();
        let elements = recipe
            .circuit
            .elements()
            .iter()
            .map(|e| match e {
                CircuitElement::Beamsplitter { modes, a } => ElementSpec::Beamsplitter {
                    modes: [modes[0] + 1, modes[1] + 1],
                    a: *a,
                },
                CircuitElement::Phase { mode, phi } => ElementSpec::Phase {
                    mode: mode + 1,
                    phi: *phi,
                },
                CircuitElement::General { modes, unitary } => ElementSpec::General {
                    modes: one_based(modes),
                    unitary: unitary.matrix().clone(),
                },
            })
            .collect();
        CircuitSpec {
            modes: recipe.circuit.modes(),
            cutoff: recipe.cutoff.max_total_photons,
            zero_threshold: Some(recipe.cutoff.zero_threshold),
            sources,
            elements,
            herald: HeraldSpec {
                modes: one_based(recipe.herald_pattern.modes()),
                counts: recipe.herald_pattern.counts().to_vec(),
            },
            output_labels: Some(recipe.output_mode_labels.clone()),
            epsilon_key: None,
            closed_form: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use heraldsim_core::circuits::{fig2_recipe, fig3_recipe};

    #[test]
    fn recipe_round_trip() {
        let r = fig3_recipe(0.4, 0.7, 0.6).unwrap();
        let spec = CircuitSpec::from_recipe(&r);
        assert_eq!(spec.herald.modes, [5, 6]);
        assert_eq!(spec.to_recipe().unwrap(), r);

        let u = ModeUnitary::identity(3);
        let r = fig2_recipe(&u, 0.3).unwrap();
        assert_eq!(CircuitSpec::from_recipe(&r).to_recipe().unwrap(), r);
    }

    #[test]
    fn rejects_zero_and_out_of_range_modes() {
        let mut spec = CircuitSpec::from_recipe(&fig3_recipe(0.4, 0.7, 0.6).unwrap());
        spec.herald.modes = vec![0, 6];
        let e = spec.to_recipe().unwrap_err();
        assert!(e.to_string().contains("herald.modes"), "{e}");
        spec.herald.modes = vec![5, 7];
        assert!(spec.to_recipe().is_err());
    }

    #[test]
    fn rejects_overlapping_sources() {
        let json = r#"{"modes": 2, "cutoff": 2, "sources": [
            {"kind": "smsv", "mode": 1, "r": 0.1},
            {"kind": "vacuum", "modes": [1, 2]}]}"#;
        let spec: CircuitSpec = serde_json::from_str(json).unwrap();
        let e = spec.to_recipe().unwrap_err();
        assert!(e.to_string().contains("sources[1].modes"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = r#"{"modes": 2, "cutoff": 2, "sorces": []}"#;
        assert!(serde_json::from_str::<CircuitSpec>(json).is_err());
        let json = r#"{"modes": 2, "cutoff": 2, "sources": [{"kind": "tmss", "modes": [1, 2], "lamda": 0.1}]}"#;
        assert!(serde_json::from_str::<CircuitSpec>(json).is_err());
    }
}
