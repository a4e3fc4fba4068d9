//! The four subcommands, as library functions returning serializable results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use heraldsim_core::circuits::{
    build_fig2, build_fig3, chi_prep_damping, chi_prep_herald_interference, solve_cancellation,
    verify_external, DEFAULT_CHI_LAMBDA,
};
use heraldsim_core::matrix::EXTERNAL_UNITARITY_TOL;
use heraldsim_core::verify::{audit_gray_zone, ExtendedInput, GRAY_ZONE_UPPER};
use heraldsim_core::{
    herald_through, CMatrix, Error as CoreError, HeraldPattern, ModeUnitary, SqueezeParams,
    fock::DEFAULT_ZERO_THRESHOLD,
};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::report::{
    build_report, digest, to_json, AuditBlock, ExternalBlock, Precision, Report, ReportContext,
    TOOL, VERSION,
};
use crate::spec::{zero_based, CircuitSpec, ClosedFormSpec, HeraldSpec};
use crate::template::{parameters, substitute, Bindings, Range};

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn schema_error(path: String, e: serde_json::Error) -> CliError {
    let location = if e.line() > 0 {
        format!("{path} (line {}, column {})", e.line(), e.column())
    } else {
        path
    };
    CliError::schema(location, e.to_string())
}

/// Deserializes JSON bytes, reporting the failing field path and position.
pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let v = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| schema_error(e.path().to_string(), e.into_inner()))?;
    de.end().map_err(|e| schema_error(".".to_string(), e))?;
    Ok(v)
}

fn from_value<T: DeserializeOwned>(v: Value) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| schema_error(e.path().to_string(), e.into_inner()))
}

/// Parses a circuit spec, resolving template parameters from `bindings`.
pub fn load_spec(bytes: &[u8], bindings: &Bindings) -> CliResult<CircuitSpec> {
    let mut value: Value = parse_json(bytes)?;
    if substitute(&mut value, bindings)? == 0 {
        // No templating: parse the original bytes so errors carry positions.
        return parse_json(bytes);
    }
    from_value(value)
}

fn spec_from_template(template: &Value, bindings: &Bindings) -> CliResult<CircuitSpec> {
    let mut value = template.clone();
    substitute(&mut value, bindings)?;
    from_value(value)
}

#[derive(Serialize)]
struct SimulateInput<'a> {
    command: &'a str,
    spec: &'a CircuitSpec,
    precision: Precision,
}

/// Runs a resolved spec. The digest covers the spec and the precision mode.
pub fn simulate_spec(spec: &CircuitSpec, precision: Precision) -> CliResult<Report> {
    let recipe = spec.to_recipe()?;
    let u = recipe.unitary()?;
    let result = herald_through(&u, &recipe.input, &recipe.herald_pattern)?;
    let input_digest = digest(&to_json(&SimulateInput {
        command: "simulate",
        spec,
        precision,
    }));
    let ctx = ReportContext {
        command: "simulate",
        input_digest,
        precision,
        modes: spec.modes,
        cutoff: spec.cutoff,
        zero_threshold: recipe.cutoff.zero_threshold,
        herald: spec.herald.clone(),
        output_labels: recipe.output_mode_labels.clone(),
        epsilon_key: spec.epsilon_state(),
        closed_form: spec.closed_form,
    };
    let mut report = build_report(ctx, &result)?;
    if precision == Precision::Extended {
        let input = ExtendedInput::from_state(&recipe.input);
        let entries = audit_gray_zone(&u, &input, &result, &recipe.herald_pattern, 0.0, f64::MAX)?;
        report.audit = Some(AuditBlock::new(0.0, f64::MAX, &entries));
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub spec: PathBuf,
    pub set: Vec<(String, f64)>,
    pub cutoff: Option<u32>,
    pub zero_threshold: Option<f64>,
    pub precision: Precision,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<Report> {
    let bytes = read_file(&args.spec)?;
    let bindings: Bindings = args.set.iter().cloned().collect();
    let mut spec = load_spec(&bytes, &bindings)?;
    if let Some(c) = args.cutoff {
        spec.cutoff = c;
    }
    if let Some(z) = args.zero_threshold {
        spec.zero_threshold = Some(z);
    }
    simulate_spec(&spec, args.precision)
}

#[derive(Debug, Clone)]
pub struct ScanArgs {
    pub spec: PathBuf,
    pub ranges: Vec<Range>,
    pub set: Vec<(String, f64)>,
    pub target: Option<f64>,
    /// Stop bisecting once `|ε − target|` is at most this.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_digest: String,
    pub parameters: Vec<String>,
    pub fixed: Bindings,
    pub points: Vec<ScanPoint>,
    /// Only for one-parameter scans.
    pub trade_off: Option<TradeOff>,
    pub target: Option<TargetSolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub parameters: Bindings,
    pub epsilon: Option<f64>,
    pub success_probability: f64,
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeOff {
    /// ε changes in the same direction between every pair of neighbours.
    pub epsilon_monotone: bool,
    /// Between every pair of neighbours, a rise in ε comes with a fall in
    /// success probability.
    pub success_falls_as_epsilon_rises: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSolution {
    pub target: f64,
    pub parameter: String,
    pub value: f64,
    pub epsilon: f64,
    pub success_probability: f64,
    pub bisection_steps: usize,
    pub report: Report,
}

#[derive(Serialize)]
struct ScanInput<'a> {
    template: &'a Value,
    ranges: Vec<(String, f64, f64, f64)>,
    fixed: &'a Bindings,
    target: Option<f64>,
    tolerance: f64,
}

fn evaluate(template: &Value, bindings: &Bindings) -> CliResult<Report> {
    simulate_spec(&spec_from_template(template, bindings)?, Precision::Double)
}

fn grid(ranges: &[Range], fixed: &Bindings) -> Vec<Bindings> {
    let mut points = vec![fixed.clone()];
    for r in ranges {
        let values = r.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.insert(r.name.clone(), v);
                    q
                })
            })
            .collect();
    }
    points
}

pub fn cmd_scan(args: &ScanArgs) -> CliResult<ScanReport> {
    let bytes = read_file(&args.spec)?;
    let template: Value = parse_json(&bytes)?;
    let fixed: Bindings = args.set.iter().cloned().collect();
    let referenced = parameters(&template);
    for r in &args.ranges {
        if !referenced.contains(&r.name) {
            return Err(CliError::schema(
                format!("--param {}", r.name),
                "parameter does not appear in the template",
            ));
        }
        if fixed.contains_key(&r.name) {
            return Err(CliError::schema(
                format!("--param {}", r.name),
                "parameter is both scanned and fixed",
            ));
        }
    }
    for name in &referenced {
        if !fixed.contains_key(name) && !args.ranges.iter().any(|r| &r.name == name) {
            return Err(CliError::schema(
                format!("${name}"),
                "template parameter has neither --param nor --set",
            ));
        }
    }
    if args.target.is_some() && args.ranges.len() != 1 {
        return Err(CliError::schema(
            "--target",
            "a target scan takes exactly one --param",
        ));
    }

    let input_digest = digest(&to_json(&ScanInput {
        template: &template,
        ranges: args
            .ranges
            .iter()
            .map(|r| (r.name.clone(), r.lo, r.hi, r.step))
            .collect(),
        fixed: &fixed,
        target: args.target,
        tolerance: args.tolerance,
    }));

    let points: Vec<ScanPoint> = grid(&args.ranges, &fixed)
        .into_par_iter()
        .map(|b| {
            let r = evaluate(&template, &b)?;
            Ok(ScanPoint {
                parameters: b,
                epsilon: r.epsilon.map(|e| e.value),
                success_probability: r.success_probability,
                truncation_bound: r.truncation_bound,
            })
        })
        .collect::<CliResult<_>>()?;

    let trade_off = (args.ranges.len() == 1 && points.len() > 1).then(|| trade_off(&points));
    let target = match args.target {
        Some(t) if !points.is_empty() => {
            if spec_from_template(&template, &points[0].parameters)?.epsilon_key.is_none() {
                return Err(CliError::schema("epsilon_key", "a target scan needs an epsilon_key"));
            }
            Some(solve_target(&template, &args.ranges[0].name, &points, t, args.tolerance)?)
        }
        _ => None,
    };

    Ok(ScanReport {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        command: "scan".to_string(),
        input_digest,
        parameters: args.ranges.iter().map(|r| r.name.clone()).collect(),
        fixed,
        points,
        trade_off,
        target,
    })
}

fn trade_off(points: &[ScanPoint]) -> TradeOff {
    let pairs: Vec<(f64, f64)> = points
        .windows(2)
        .filter_map(|w| {
            let de = w[1].epsilon? - w[0].epsilon?;
            Some((de, w[1].success_probability - w[0].success_probability))
        })
        .collect();
    TradeOff {
        epsilon_monotone: pairs.iter().all(|p| p.0 > 0.0) || pairs.iter().all(|p| p.0 < 0.0),
        success_falls_as_epsilon_rises: pairs.iter().all(|&(de, dp)| de * dp < 0.0),
    }
}

fn solve_target(
    template: &Value,
    knob: &str,
    points: &[ScanPoint],
    target: f64,
    tolerance: f64,
) -> CliResult<TargetSolution> {
    let at = |x: f64| -> CliResult<(Report, f64)> {
        let mut b = points[0].parameters.clone();
        b.insert(knob.to_string(), x);
        let r = evaluate(template, &b)?;
        let e = r.epsilon.as_ref().map_or(f64::NAN, |e| e.value);
        Ok((r, e))
    };
    let solution = |x: f64, steps: usize| -> CliResult<TargetSolution> {
        let (report, eps) = at(x)?;
        Ok(TargetSolution {
            target,
            parameter: knob.to_string(),
            value: x,
            epsilon: eps,
            success_probability: report.success_probability,
            bisection_steps: steps,
            report,
        })
    };

    let grid: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| Some((p.parameters[knob], p.epsilon?)))
        .collect();
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &(_, e)| (l.min(e), h.max(e)));
    if let Some(&(x, _)) = grid.iter().find(|&&(_, e)| (e - target).abs() <= tolerance) {
        return solution(x, 0);
    }
    let bracket = grid
        .windows(2)
        .find(|w| (w[0].1 - target) * (w[1].1 - target) < 0.0);
    let Some(w) = bracket else {
        return Err(CoreError::Unachievable {
            target,
            min: lo,
            max: hi,
        }
        .into());
    };
    let (mut x_lo, mut x_hi) = (w[0].0, w[1].0);
    let below_at_lo = w[0].1 < target;
    let mut best = if (w[0].1 - target).abs() <= (w[1].1 - target).abs() {
        (x_lo, w[0].1)
    } else {
        (x_hi, w[1].1)
    };
    let mut steps = 0;
    while steps < 200 {
        let mid = 0.5 * (x_lo + x_hi);
        if mid <= x_lo || mid >= x_hi {
            break;
        }
        steps += 1;
        let (_, e) = at(mid)?;
        if (e - target).abs() < (best.1 - target).abs() {
            best = (mid, e);
        }
        if (e - target).abs() <= tolerance {
            break;
        }
        if (e < target) == below_at_lo {
            x_lo = mid;
        } else {
            x_hi = mid;
        }
    }
    solution(best.0, steps)
}

/// Plot data: one row per scan point, parameter columns then ε and P_succ.
pub fn plot_data(report: &ScanReport) -> String {
    let mut out = String::from("#");
    for p in &report.parameters {
        out.push_str(&format!(" {p}"));
    }
    out.push_str(" epsilon p_succ\n");
    for pt in &report.points {
        let mut cols: Vec<String> = report
            .parameters
            .iter()
            .map(|p| format!("{:.17e}", pt.parameters[p]))
            .collect();
        cols.push(pt.epsilon.map_or("nan".to_string(), |e| format!("{e:.17e}")));
        cols.push(format!("{:.17e}", pt.success_probability));
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub unitary: PathBuf,
    /// Squeezing `r` per squeezed mode; the remaining modes are vacuum ancillae.
    pub squeezing: Vec<f64>,
    /// `(mode, count)`, 1-based.
    pub herald: Vec<(usize, u32)>,
    pub cutoff: u32,
    pub zero_threshold: f64,
    pub precision: Precision,
}

impl VerifyArgs {
    pub fn new(unitary: PathBuf, squeezing: Vec<f64>, herald: Vec<(usize, u32)>, cutoff: u32) -> Self {
        VerifyArgs {
            unitary,
            squeezing,
            herald,
            cutoff,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            precision: Precision::Double,
        }
    }
}

#[derive(Serialize)]
struct VerifyInput<'a> {
    command: &'a str,
    unitary: &'a CMatrix,
    squeezing: &'a [f64],
    herald: &'a HeraldSpec,
    cutoff: u32,
    zero_threshold: f64,
    precision: Precision,
}

/// Loads a unitary file, checking unitarity at the external tolerance.
pub fn load_unitary(path: &Path) -> CliResult<ModeUnitary> {
    let m: CMatrix = parse_json(&read_file(path)?)?;
    Ok(ModeUnitary::with_tolerance(m, EXTERNAL_UNITARITY_TOL)?)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<Report> {
    let u = load_unitary(&args.unitary)?;
    let n = u.dim();
    if args.squeezing.len() > n {
        return Err(CliError::schema(
            "--squeezing",
            format!("{} squeezed modes for a {n}-mode unitary", args.squeezing.len()),
        ));
    }
    if !(args.zero_threshold >= 0.0) {
        return Err(CliError::schema("--zero-threshold", "must be non-negative"));
    }
    let squeeze = args
        .squeezing
        .iter()
        .map(|&r| SqueezeParams::from_r(r))
        .collect::<Result<Vec<_>, _>>()?;
    let ancillae = n - squeeze.len();
    let herald = HeraldSpec {
        modes: args.herald.iter().map(|h| h.0).collect(),
        counts: args.herald.iter().map(|h| h.1).collect(),
    };
    let modes = herald
        .modes
        .iter()
        .map(|&m| zero_based(m, n, "--herald"))
        .collect::<CliResult<Vec<_>>>()?;
    let pattern = HeraldPattern::new(modes, herald.counts.clone())?;
    let cutoff = heraldsim_core::CutoffPolicy::new(args.cutoff).with_zero_threshold(args.zero_threshold);

    let result = verify_external(&u, &squeeze, ancillae, &pattern, cutoff)?;
    let input_digest = digest(&to_json(&VerifyInput {
        command: "verify",
        unitary: u.matrix(),
        squeezing: &args.squeezing,
        herald: &herald,
        cutoff: args.cutoff,
        zero_threshold: args.zero_threshold,
        precision: args.precision,
    }));
    let labels = result.output_modes.iter().map(|m| format!("mode{}", m + 1)).collect();
    let ctx = ReportContext {
        command: "verify",
        input_digest,
        precision: args.precision,
        modes: n,
        cutoff: args.cutoff,
        zero_threshold: args.zero_threshold,
        herald,
        output_labels: labels,
        epsilon_key: None,
        closed_form: None,
    };
    let mut report = build_report(ctx, &result)?;
    let (lower, upper) = match args.precision {
        Precision::Double => (args.zero_threshold, GRAY_ZONE_UPPER),
        Precision::Extended => (0.0, f64::MAX),
    };
    let input = ExtendedInput::smsv_product(&squeeze, ancillae, args.cutoff);
    let entries = audit_gray_zone(&u, &input, &result, &pattern, lower, upper)?;
    report.audit = Some(AuditBlock::new(lower, upper, &entries));
    report.external = Some(ExternalBlock {
        squeezing: args.squeezing.clone(),
        ancillae,
        unitarity_deviation: u.matrix().unitarity_deviation(),
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RecipeName {
    /// Parity circuit: TMSS, a `|11⟩` pair and a three-mode unitary.
    Fig2,
    /// Four-mode generator with closed-form comparison and ε key.
    Fig3,
    ChiDamping,
    ChiInterference,
}

#[derive(Debug, Clone)]
pub struct ExportArgs {
    pub name: RecipeName,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    /// Three-mode unitary for the parity circuit; identity when absent.
    pub unitary: Option<PathBuf>,
}

impl ExportArgs {
    pub fn new(name: RecipeName) -> Self {
        ExportArgs {
            name,
            a: None,
            b: None,
            lambda: None,
            unitary: None,
        }
    }
}

/// Builds a gated recipe and returns its circuit JSON.
pub fn cmd_export(args: &ExportArgs) -> CliResult<CircuitSpec> {
    match args.name {
        RecipeName::Fig2 => {
            let u = match &args.unitary {
                Some(p) => load_unitary(p)?,
                None => ModeUnitary::identity(3),
            };
            let recipe = build_fig2(&u, args.lambda.unwrap_or(0.5))?;
            Ok(CircuitSpec::from_recipe(&recipe))
        }
        RecipeName::Fig3 => {
            let b = args.b.unwrap_or(2.0 / 3.0);
            let a = match args.a {
                Some(a) => a,
                None => solve_cancellation(b)?,
            };
            let lambda = args.lambda.unwrap_or(DEFAULT_CHI_LAMBDA);
            let recipe = build_fig3(a, b, lambda)?;
            let mut spec = CircuitSpec::from_recipe(&recipe);
            spec.epsilon_key = Some(vec![1, 1, 1, 1]);
            spec.closed_form = Some(ClosedFormSpec { a, b, lambda });
            Ok(spec)
        }
        RecipeName::ChiDamping | RecipeName::ChiInterference => {
            let b = args.b.unwrap_or(0.75);
            let lambda = args.lambda.unwrap_or(DEFAULT_CHI_LAMBDA);
            let prep = if args.name == RecipeName::ChiDamping {
                chi_prep_damping(b, lambda)?
            } else {
                chi_prep_herald_interference(b, lambda)?
            };
            Ok(CircuitSpec::from_recipe(&prep.recipe))
        }
    }
}

/// Parses `mode:count` pairs separated by commas. An empty string is an empty pattern.
pub fn parse_herald(s: &str) -> Result<Vec<(usize, u32)>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (m, c) = item
                .split_once(':')
                .ok_or_else(|| format!("expected mode:count, got `{item}`"))?;
            let m: usize = m.trim().parse().map_err(|_| format!("bad mode `{m}`"))?;
            let c: u32 = c.trim().parse().map_err(|_| format!("bad count `{c}`"))?;
            Ok((m, c))
        })
        .collect()
}

/// Occurrences of each verdict in a report's audit block.
pub fn verdict_counts(report: &Report) -> BTreeMap<String, usize> {
    report.audit.as_ref().map(|a| a.counts.clone()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herald_parsing() {
        assert_eq!(parse_herald("3:1, 4:0").unwrap(), [(3, 1), (4, 0)]);
        assert!(parse_herald("").unwrap().is_empty());
        assert!(parse_herald("3").is_err());
        assert!(parse_herald("x:1").is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = load_spec(b"{\"modes\": 2,\n \"cutoff\": }", &Bindings::new()).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::SCHEMA);
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn wrong_field_type_reports_path() {
        let e = load_spec(br#"{"modes": 2, "cutoff": 2, "herald": {"modes": [1], "counts": ["x"]}}"#, &Bindings::new())
            .unwrap_err();
        assert!(e.to_string().contains("herald.counts[0]"), "{e}");
    }

    #[test]
    fn trade_off_flags() {
        let pt = |e: f64, p: f64| ScanPoint {
            parameters: Bindings::new(),
            epsilon: Some(e),
            success_probability: p,
            truncation_bound: 0.0,
        };
        let t = trade_off(&[pt(0.3, 0.1), pt(0.2, 0.2), pt(0.1, 0.3)]);
        assert!(t.epsilon_monotone && t.success_falls_as_epsilon_rises);
        let t = trade_off(&[pt(0.3, 0.1), pt(0.2, 0.05), pt(0.1, 0.3)]);
        assert!(t.epsilon_monotone && !t.success_falls_as_epsilon_rises);
    }
}
