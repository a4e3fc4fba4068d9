//! Machine-readable reports.

use std::collections::BTreeMap;

use heraldsim_core::circuits::{closed_forms, table_deviation};
use heraldsim_core::herald::HeraldResult;
use heraldsim_core::verify::{GrayZoneEntry, Verdict};
use heraldsim_core::{epsilon_ratio, photon_number_support, FockState, StateRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::spec::{ClosedFormSpec, HeraldSpec};

pub const TOOL: &str = "heraldsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Every reported amplitude is also recomputed in double-double.
    Extended,
}

/// `sha256:<hex>` of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialize");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_digest: String,
    pub precision: Precision,
    pub modes: usize,
    pub cutoff: u32,
    pub zero_threshold: f64,
    pub herald: HeraldSpec,
    /// Undetected modes, 1-based, in key order.
    pub output_modes: Vec<usize>,
    pub output_labels: Vec<String>,
    pub success_probability: f64,
    /// Additive bound on `success_probability` from photon-number truncation.
    pub truncation_bound: f64,
    pub photon_number_support: Vec<u32>,
    pub epsilon: Option<EpsilonBlock>,
    /// Unnormalized branch amplitudes in canonical key order.
    pub amplitudes: Vec<AmplitudeEntry>,
    /// Normalized heralded state; empty when the pattern never fires.
    pub conditional_state: Vec<StateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBlock {
    pub key: Vec<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    /// Occupations of the undetected modes, in `output_modes` order.
    pub occupations: Vec<u32>,
    /// The same occupations sorted ascending, for label-independent matching.
    pub sorted: Vec<u32>,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormBlock {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub x_0000: f64,
    pub x_1111: f64,
    pub p_succ_closed_form: f64,
    pub epsilon_closed_form: f64,
    /// Worst deviation from the printed table and the key where it occurs.
    pub table_deviation: f64,
    pub table_worst_key: Option<Vec<u32>>,
    /// Worst deviation from the table with the `|0202⟩`-type entries at `β₋/√2`.
    pub consistent_table_deviation: f64,
    pub consistent_table_worst_key: Option<Vec<u32>>,
    pub p_succ_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalBlock {
    pub squeezing: Vec<f64>,
    pub ancillae: usize,
    pub unitarity_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditBlock {
    pub lower: f64,
    pub upper: f64,
    pub entries: Vec<AuditEntry>,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub occupations: Vec<u32>,
    /// Occupations of every mode, detected ones included.
    pub full_occupations: Vec<u32>,
    pub double: [f64; 2],
    pub extended: [f64; 2],
    pub scale: f64,
    pub verdict: Verdict,
}

impl AuditBlock {
    pub fn new(lower: f64, upper: f64, entries: &[GrayZoneEntry]) -> Self {
        let mut counts = BTreeMap::new();
        for v in [Verdict::Real, Verdict::Noise, Verdict::Inconclusive] {
            counts.insert(verdict_name(v).to_string(), 0);
        }
        let entries = entries
            .iter()
            .map(|e| {
                *counts.entry(verdict_name(e.verdict).to_string()).or_default() += 1;
                AuditEntry {
                    occupations: e.key.occupations().to_vec(),
                    full_occupations: e.full_key.occupations().to_vec(),
                    double: [e.double.re, e.double.im],
                    extended: [e.extended.re, e.extended.im],
                    scale: e.scale,
                    verdict: e.verdict,
                }
            })
            .collect();
        AuditBlock {
            lower,
            upper,
            entries,
            counts,
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Real => "real",
        Verdict::Noise => "noise",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Everything a report needs besides the herald result.
pub struct ReportContext<'a> {
    pub command: &'a str,
    pub input_digest: String,
    pub precision: Precision,
    pub modes: usize,
    pub cutoff: u32,
    pub zero_threshold: f64,
    pub herald: HeraldSpec,
    pub output_labels: Vec<String>,
    pub epsilon_key: Option<FockState>,
    pub closed_form: Option<ClosedFormSpec>,
}

pub fn build_report(ctx: ReportContext<'_>, result: &HeraldResult) -> CliResult<Report> {
    let amplitudes = result
        .amplitude_table
        .iter()
        .map(|(k, a)| {
            let mut sorted = k.occupations().to_vec();
            sorted.sort_unstable();
            AmplitudeEntry {
                occupations: k.occupations().to_vec(),
                sorted,
                re: a.re,
                im: a.im,
                magnitude: a.norm(),
            }
        })
        .collect();
    let epsilon = match &ctx.epsilon_key {
        Some(k) if !result.is_zero() => Some(EpsilonBlock {
            key: k.occupations().to_vec(),
            value: epsilon_ratio(result, k)?,
        }),
        _ => None,
    };
    let closed_form = match ctx.closed_form {
        Some(cf) => Some(closed_form_block(cf, result)?),
        None => None,
    };
    Ok(Report {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        command: ctx.command.to_string(),
        input_digest: ctx.input_digest,
        precision: ctx.precision,
        modes: ctx.modes,
        cutoff: ctx.cutoff,
        zero_threshold: ctx.zero_threshold,
        herald: ctx.herald,
        output_modes: result.output_modes.iter().map(|m| m + 1).collect(),
        output_labels: ctx.output_labels,
        success_probability: result.success_probability,
        truncation_bound: result.truncation_bound,
        photon_number_support: photon_number_support(&result.conditional_state)
            .into_iter()
            .collect(),
        epsilon,
        amplitudes,
        conditional_state: result.conditional_state.to_records(),
        closed_form,
        external: None,
        audit: None,
    })
}

fn closed_form_block(cf: ClosedFormSpec, result: &HeraldResult) -> CliResult<ClosedFormBlock> {
    if result.output_modes.len() != 4 {
        return Err(CliError::schema(
            "closed_form",
            format!(
                "the closed forms describe four undetected modes, this circuit has {}",
                result.output_modes.len()
            ),
        ));
    }
    let r = closed_forms(cf.a, cf.b, cf.lambda)?;
    let key = |k: Option<FockState>| k.map(|k| k.occupations().to_vec());
    let (dev, worst) = table_deviation(&result.amplitude_table, &r.table());
    let (cdev, cworst) = table_deviation(&result.amplitude_table, &r.consistent_table());
    Ok(ClosedFormBlock {
        a: cf.a,
        b: cf.b,
        lambda: cf.lambda,
        beta_plus: r.beta_plus,
        beta_minus: r.beta_minus,
        x_0000: r.x_0000,
        x_1111: r.x_1111,
        p_succ_closed_form: r.p_succ,
        epsilon_closed_form: r.epsilon,
        table_deviation: dev,
        table_worst_key: key(worst),
        consistent_table_deviation: cdev,
        consistent_table_worst_key: key(cworst),
        p_succ_deviation: (result.success_probability - r.p_succ).abs(),
    })
}
