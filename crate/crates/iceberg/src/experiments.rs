//! Numerical experiments: repeated error correction, CNOT rounds, ancilla
//! factory overhead, fault-order histograms, code-capacity sweeps and the
//! closed-form budget helpers.

use crate::circuit::NoiseModel;
use crate::code::PauliKind;
use crate::decoder::{code_capacity_sample, exact_series_check, FaultCountReport};
use crate::effects::{minimal_fault_subset, Outcome, SparseSampler};
use crate::error::{Error, Result};
use crate::gadgets::{decoder_tables, Assembly};
use crate::parallel::derive_seed;
use crate::program::Program;
use crate::stats::RatesReport;
use crate::synth::{all_plus, verified_fragment, Fragment, Source};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RepeatedEc,
    TransversalCnot,
    TeleportedCnot,
    CodeCapacity,
    FactoryOverhead,
    FaultHistogram,
    IcebergDetection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderMode {
    #[default]
    Lookup,
    CorrelatedExtension,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactoryMode {
    OneStage,
    TwoStage,
}

macro_rules! kebab_enum {
    ($t:ty, $($name:literal => $v:expr),+ $(,)?) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($v),)+
                    other => Err(Error::InvalidArgument(format!("unknown {} `{other}`", stringify!($t)))),
                }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = match self { $(x if *x == $v => $name,)+ _ => unreachable!() };
                f.write_str(s)
            }
        }
    };
}

kebab_enum!(ExperimentKind,
    "repeated-ec" => ExperimentKind::RepeatedEc,
    "transversal-cnot" => ExperimentKind::TransversalCnot,
    "teleported-cnot" => ExperimentKind::TeleportedCnot,
    "code-capacity" => ExperimentKind::CodeCapacity,
    "factory-overhead" => ExperimentKind::FactoryOverhead,
    "fault-histogram" => ExperimentKind::FaultHistogram,
    "iceberg-detection" => ExperimentKind::IcebergDetection,
);
kebab_enum!(DecoderMode, "lookup" => DecoderMode::Lookup, "correlated-extension" => DecoderMode::CorrelatedExtension);
kebab_enum!(FactoryMode, "one-stage" => FactoryMode::OneStage, "two-stage" => FactoryMode::TwoStage);

fn default_rounds() -> u32 {
    10
}

fn default_shots() -> u64 {
    100_000
}

/// One experiment over a grid of noise rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub kind: ExperimentKind,
    pub code: String,
    pub p: Vec<f64>,
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub decoder: DecoderMode,
    /// Preparation pipeline; towers with a staged recipe default to two stages.
    #[serde(default)]
    pub factory: Option<FactoryMode>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, code: &str, p: Vec<f64>) -> Self {
        ExperimentSpec {
            name: String::new(),
            kind,
            code: code.to_string(),
            p,
            rounds: default_rounds(),
            shots: default_shots(),
            seed: 0,
            decoder: DecoderMode::Lookup,
            factory: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        if self.p.is_empty() {
            return Err(Error::InvalidArgument("empty p grid".into()));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("p={p} outside [0,1]")));
        }
        if self.decoder == DecoderMode::CorrelatedExtension {
            return Err(Error::Unsupported("the correlated decoder needs a user-supplied pattern table".into()));
        }
        Ok(())
    }

    pub fn source(&self) -> Result<Source> {
        source_for(&self.code, self.factory)
    }

    /// Label of the experiment in output rows.
    pub fn descriptor(&self) -> String {
        if self.name.is_empty() {
            format!("{}-{}", self.kind, self.code)
        } else {
            self.name.clone()
        }
    }
}

/// Source of the blocks of `code`: two-stage for towers built from verified
/// inner blocks unless `mode` asks otherwise.
pub fn source_for(code: &str, mode: Option<FactoryMode>) -> Result<Source> {
    match mode {
        Some(FactoryMode::OneStage) => Source::one_stage(code),
        Some(FactoryMode::TwoStage) => Source::two_stage(code),
        None => Source::two_stage(code).or_else(|_| Source::one_stage(code)),
    }
}

fn parse_grid(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad p value `{x}`"))))
        .collect()
}

/// Parses a spec file: JSON (one object or an array) or key-value text where
/// `[name]` headers start new experiments and `#` starts a comment.
pub fn parse_specs(text: &str) -> Result<Vec<ExperimentSpec>> {
    let trimmed = text.trim_start();
    let specs = if trimmed.starts_with('{') || trimmed.starts_with('[') && trimmed[1..].trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let parse = |v: serde_json::Value| {
            serde_json::from_value::<ExperimentSpec>(v).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
        };
        match v {
            serde_json::Value::Array(a) => a.into_iter().map(parse).collect::<Result<Vec<_>>>()?,
            o => vec![parse(o)?],
        }
    } else {
        parse_key_value(text)?
    };
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

fn parse_key_value(text: &str) -> Result<Vec<ExperimentSpec>> {
    let mut blocks: Vec<(String, usize, BTreeMap<String, (usize, String)>)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            blocks.push((name.trim().to_string(), ln + 1, BTreeMap::new()));
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or(Error::Parse { line: ln + 1, msg: format!("expected `key = value`, got `{line}`") })?;
        if blocks.is_empty() {
            blocks.push((String::new(), ln + 1, BTreeMap::new()));
        }
        blocks.last_mut().unwrap().2.insert(k.trim().to_string(), (ln + 1, v.trim().to_string()));
    }
    blocks
        .into_iter()
        .map(|(name, start, mut kv)| {
            let mut take = |key: &str| kv.remove(key);
            let need = |v: Option<(usize, String)>, key: &str| {
                v.ok_or(Error::Parse { line: start, msg: format!("missing `{key}`") })
            };
            let at = |line: usize| move |e: Error| Error::Parse { line, msg: e.to_string() };
            let (l, kind) = need(take("kind"), "kind")?;
            let kind = kind.parse::<ExperimentKind>().map_err(at(l))?;
            let (_, code) = need(take("code"), "code")?;
            let (l, p) = need(take("p"), "p")?;
            let mut spec = ExperimentSpec::new(kind, &code, parse_grid(&p).map_err(at(l))?);
            spec.name = name;
            let num = |(l, v): (usize, String)| v.parse::<u64>().map_err(|_| Error::Parse { line: l, msg: format!("bad number `{v}`") });
            if let Some(v) = take("rounds") {
                spec.rounds = num(v)? as u32;
            }
            if let Some(v) = take("shots") {
                spec.shots = num(v)?;
            }
            if let Some(v) = take("seed") {
                spec.seed = num(v)?;
            }
            if let Some((l, v)) = take("decoder") {
                spec.decoder = v.parse().map_err(at(l))?;
            }
            if let Some((l, v)) = take("factory") {
                spec.factory = Some(v.parse().map_err(at(l))?);
            }
            if let Some((k, (l, _))) = kv.into_iter().next() {
                return Err(Error::Parse { line: l, msg: format!("unknown key `{k}`") });
            }
            Ok(spec)
        })
        .collect()
}

/// Verified `|0^k⟩`, `rounds` Steane correction rounds, transversal Z
/// measurement and ideal decoding of the logical X frame.
pub fn repeated_ec_program(src: &Source, rounds: u32) -> Result<Program> {
    let mut asm = Assembly::new(src.clone())?;
    let mut data = asm.prepare(0)?;
    for _ in 0..rounds {
        data = asm.steane_ec(&data)?;
    }
    asm.measure_final(&data, PauliKind::X);
    Ok(asm.finish(format!("repeated-ec-{}", src.code().name), rounds))
}

/// Perfect inputs, one leading correction layer on both blocks, then `rounds`
/// of (transversal CNOT, correction on both blocks), and ideal decoding of
/// every residual logical error.
pub fn transversal_cnot_program(src: &Source, rounds: u32) -> Result<Program> {
    let mut asm = Assembly::new(src.clone())?;
    let mut a = asm.prepare_ideal(0)?;
    let mut b = asm.prepare_ideal(0)?;
    a = asm.steane_ec(&a)?;
    b = asm.steane_ec(&b)?;
    for _ in 0..rounds {
        asm.transversal_cnot(&a, &b);
        a = asm.steane_ec(&a)?;
        b = asm.steane_ec(&b)?;
    }
    asm.decode_frame(&a);
    asm.decode_frame(&b);
    Ok(asm.finish(format!("transversal-cnot-{}", src.code().name), rounds))
}

/// Like [`transversal_cnot_program`] with each CNOT teleported through a Bell
/// pair, followed by Z correction on the control and X correction on the target.
pub fn teleported_cnot_program(src: &Source, rounds: u32) -> Result<Program> {
    let mut asm = Assembly::new(src.clone())?;
    let mut a = asm.prepare_ideal(0)?;
    let mut b = asm.prepare_ideal(0)?;
    a = asm.steane_ec(&a)?;
    b = asm.steane_ec(&b)?;
    for _ in 0..rounds {
        let (c, t) = asm.teleported_cnot(&a, &b)?;
        a = asm.z_ec(&c)?;
        b = asm.x_ec(&t)?;
    }
    asm.decode_frame(&a);
    asm.decode_frame(&b);
    Ok(asm.finish(format!("teleported-cnot-{}", src.code().name), rounds))
}

/// Verified `|0^k⟩` of an Iceberg code, `rounds` flagged detection rounds and
/// a final transversal Z measurement.
pub fn iceberg_detection_program(code: &str, rounds: u32) -> Result<Program> {
    let src = Source::one_stage(code)?;
    let mut asm = Assembly::new(src)?;
    let data = asm.prepare(0)?;
    for _ in 0..rounds {
        asm.detect(&data)?;
    }
    asm.measure_final(&data, PauliKind::X);
    Ok(asm.finish(format!("iceberg-detection-{code}"), rounds))
}

/// Program of a rate-type experiment.
pub fn build_program(spec: &ExperimentSpec) -> Result<Program> {
    match spec.kind {
        ExperimentKind::RepeatedEc | ExperimentKind::FaultHistogram => repeated_ec_program(&spec.source()?, spec.rounds),
        ExperimentKind::TransversalCnot => transversal_cnot_program(&spec.source()?, spec.rounds),
        ExperimentKind::TeleportedCnot => teleported_cnot_program(&spec.source()?, spec.rounds),
        ExperimentKind::IcebergDetection => iceberg_detection_program(&spec.code, spec.rounds),
        k => Err(Error::InvalidArgument(format!("{k} does not build a circuit program"))),
    }
}

/// A sampler whose noise rate can be changed between grid points.
pub fn sampler_for(program: &Program) -> Result<SparseSampler> {
    SparseSampler::new(program, NoiseModel::new(1e-3)?)
}

fn sample_point(sampler: &mut SparseSampler, p: f64, shots: u64, seed: u64) -> crate::effects::SampleSummary {
    sampler.noise.p = p;
    sampler.sample(shots, seed)
}

/// Samples a program over the p grid of `spec`; one report per point.
pub fn run_rates(spec: &ExperimentSpec, program: &Program) -> Result<Vec<RatesReport>> {
    spec.validate()?;
    let mut sampler = sampler_for(program)?;
    let hash = program.recipe_hash();
    Ok(spec
        .p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let seed = derive_seed(spec.seed, i as u64);
            let s = sample_point(&mut sampler, p, spec.shots, seed);
            RatesReport::new(spec.descriptor(), &spec.code, p, program.rounds, s.shots, s.accepted, s.errors, seed)
                .with_recipe_hash(&hash)
        })
        .collect())
}

pub fn run_repeated_ec(spec: &ExperimentSpec) -> Result<Vec<RatesReport>> {
    run_rates(spec, &repeated_ec_program(&spec.source()?, spec.rounds)?)
}

pub fn run_transversal_cnot(spec: &ExperimentSpec) -> Result<Vec<RatesReport>> {
    run_rates(spec, &transversal_cnot_program(&spec.source()?, spec.rounds)?)
}

pub fn run_teleported_cnot(spec: &ExperimentSpec) -> Result<Vec<RatesReport>> {
    run_rates(spec, &teleported_cnot_program(&spec.source()?, spec.rounds)?)
}

pub fn run_iceberg_detection(spec: &ExperimentSpec) -> Result<Vec<RatesReport>> {
    run_rates(spec, &iceberg_detection_program(&spec.code, spec.rounds)?)
}

/// Memory noise on one block: independent bit flips decoded by the X table.
pub fn run_code_capacity(spec: &ExperimentSpec) -> Result<Vec<RatesReport>> {
    spec.validate()?;
    let code = crate::factory::catalog(&spec.code)?;
    let (tx, _) = decoder_tables(&code)?;
    spec.p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let seed = derive_seed(spec.seed, i as u64);
            let mut r = code_capacity_sample(&tx, p, spec.shots, seed)?;
            r.descriptor = spec.descriptor();
            r.code = spec.code.clone();
            Ok(r)
        })
        .collect()
}

/// Acceptance and cost of producing one accepted encoded ancilla.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverheadReport {
    pub code: String,
    pub mode: FactoryMode,
    pub state: String,
    pub p: f64,
    pub shots: u64,
    /// Acceptance of each stage; the last stage is conditioned on accepted inputs.
    pub acceptance: Vec<f64>,
    pub expected_cnots: f64,
    /// CNOTs of one attempt with no retries.
    pub attempt_cnots: u64,
}

/// The preparation fragment of `state` as a standalone program; its own checks
/// reject, nested verified blocks retry.
pub fn fragment_program(frag: &Fragment) -> Program {
    Program { name: frag.name.clone(), circuit: frag.circuit.clone(), decodes: vec![], rounds: 1 }
}

pub fn factory_overhead(code: &str, p: f64, mode: FactoryMode, state: u32, shots: u64, seed: u64) -> Result<OverheadReport> {
    let src = source_for(code, Some(mode))?;
    let frag = verified_fragment(&src, state)?;
    overhead_of(&frag, code, mode, state, p, shots, seed)
}

/// Overhead of an explicit fragment.
pub fn overhead_of(frag: &Fragment, code: &str, mode: FactoryMode, state: u32, p: f64, shots: u64, seed: u64) -> Result<OverheadReport> {
    let program = fragment_program(frag);
    let mut sampler = sampler_for(&program)?;
    let s = sample_point(&mut sampler, p, shots, seed);
    if s.accepted == 0 {
        return Err(Error::InvalidArgument(format!("no accepted preparations at p={p} in {shots} shots")));
    }
    let children = program.circuit.children(0);
    let mut acceptance = Vec::new();
    if mode == FactoryMode::TwoStage && !children.is_empty() {
        let runs: u64 = children.iter().map(|&g| s.executions[g as usize]).sum();
        acceptance.push((s.shots * children.len() as u64) as f64 / runs as f64);
    }
    acceptance.push(s.accepted as f64 / s.shots as f64);
    Ok(OverheadReport {
        code: code.to_string(),
        mode,
        state: crate::synth::state_label(state, crate::factory::catalog(code)?.k),
        p,
        shots,
        acceptance,
        expected_cnots: sampler.expected_cnots(&s),
        attempt_cnots: sampler.group_cnots.iter().sum(),
    })
}

/// Histogram of minimal fault-subset sizes by outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaultOrderHistogram {
    pub code: String,
    pub p: f64,
    pub samples: u64,
    /// `logical[s]` shots whose logical error is reproduced by `s` faults.
    pub logical: Vec<u64>,
    pub rejection: Vec<u64>,
    /// Shots minimized greedily rather than exhaustively.
    pub greedy: u64,
}

impl FaultOrderHistogram {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("histogram serializes")
    }

    pub fn mode(v: &[u64]) -> Option<usize> {
        v.iter().enumerate().filter(|(_, &c)| c > 0).max_by_key(|(i, &c)| (c, std::cmp::Reverse(*i))).map(|(i, _)| i)
    }
}

/// Minimal fault orders of up to `keep` failed or rejected shots of `program`.
pub fn fault_histogram_of(program: &Program, code: &str, p: f64, shots: u64, seed: u64, keep: usize) -> Result<FaultOrderHistogram> {
    let mut sampler = sampler_for(program)?;
    sampler.noise.p = p;
    let s = sampler.sample_with_records(shots, seed, keep);
    let mut h = FaultOrderHistogram { code: code.to_string(), p, samples: s.shots, logical: vec![], rejection: vec![], greedy: 0 };
    for (outcome, rec) in s.records.iter().take(keep) {
        let (sub, exact) = minimal_fault_subset(&sampler, rec, *outcome);
        if !exact {
            h.greedy += 1;
        }
        let v = match outcome {
            Outcome::LogicalError => &mut h.logical,
            Outcome::Reject => &mut h.rejection,
            _ => continue,
        };
        if v.len() <= sub.len() {
            v.resize(sub.len() + 1, 0);
        }
        v[sub.len()] += 1;
    }
    Ok(h)
}

pub fn fault_order_histogram(spec: &ExperimentSpec, keep: usize) -> Result<Vec<FaultOrderHistogram>> {
    spec.validate()?;
    let program = build_program(spec)?;
    spec.p
        .iter()
        .enumerate()
        .map(|(i, &p)| fault_histogram_of(&program, &spec.code, p, spec.shots, derive_seed(spec.seed, i as u64), keep))
        .collect()
}

/// Critical `p_R/p_L` above which the acceptance floor, not the error
/// target, limits the number of operations.
pub fn postselection_budget(pl_star: f64, acceptance_floor: f64) -> Result<f64> {
    if !(pl_star > 0.0 && pl_star < 1.0) || !(acceptance_floor > 0.0 && acceptance_floor < 1.0) {
        return Err(Error::InvalidArgument("both arguments must lie in (0, 1)".into()));
    }
    Ok(-acceptance_floor.ln() / pl_star)
}

/// Largest operation count meeting both the error target and the acceptance floor.
pub fn max_operations(pl_star: f64, acceptance_floor: f64, p_l: f64, p_r: f64) -> Result<f64> {
    postselection_budget(pl_star, acceptance_floor)?;
    if p_l < 0.0 || p_r < 0.0 {
        return Err(Error::InvalidArgument("rates must be nonnegative".into()));
    }
    let by_error = if p_l > 0.0 { pl_star / p_l } else { f64::INFINITY };
    let by_accept = if p_r > 0.0 { -acceptance_floor.ln() / p_r } else { f64::INFINITY };
    Ok(by_error.min(by_accept))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcStyle {
    Steane,
    Knill,
}

kebab_enum!(EcStyle, "steane" => EcStyle::Steane, "knill" => EcStyle::Knill);

/// Effective steady-state error rate of a data qubit. For Knill-style
/// correction the first rate is that of the Bell pair.
pub fn steady_state_estimate(r_prep0: f64, r_prep_plus: f64, r_cnot: f64, r_meas: f64, style: EcStyle) -> Result<f64> {
    if [r_prep0, r_prep_plus, r_cnot, r_meas].iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidArgument("rates must be nonnegative".into()));
    }
    Ok(match style {
        EcStyle::Steane => r_prep0 + 2.0 * r_prep_plus + 3.0 * r_cnot + r_meas,
        EcStyle::Knill => r_prep0 + r_cnot + r_meas,
    })
}

/// Exact code-capacity counts of `code` under bit flips with the leading
/// coefficients `(c, c')`.
pub fn exact_series(code: &str, max_weight: usize) -> Result<(FaultCountReport, u64, u64)> {
    let c = crate::factory::catalog(code)?;
    let d = c.d_known.ok_or_else(|| Error::InvalidArgument(format!("{code} has no known distance")))?;
    let (tx, _) = decoder_tables(&c)?;
    exact_series_check(&tx, d, max_weight)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Output of one experiment.
#[derive(Clone, Debug)]
pub enum ExperimentOutput {
    Rates(Vec<RatesReport>),
    Overhead(Vec<OverheadReport>),
    Histograms(Vec<FaultOrderHistogram>),
}

/// Runs any experiment kind.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    Ok(match spec.kind {
        ExperimentKind::RepeatedEc => ExperimentOutput::Rates(run_repeated_ec(spec)?),
        ExperimentKind::TransversalCnot => ExperimentOutput::Rates(run_transversal_cnot(spec)?),
        ExperimentKind::TeleportedCnot => ExperimentOutput::Rates(run_teleported_cnot(spec)?),
        ExperimentKind::IcebergDetection => ExperimentOutput::Rates(run_iceberg_detection(spec)?),
        ExperimentKind::CodeCapacity => ExperimentOutput::Rates(run_code_capacity(spec)?),
        ExperimentKind::FaultHistogram => ExperimentOutput::Histograms(fault_order_histogram(spec, 2000)?),
        ExperimentKind::FactoryOverhead => {
            let mode = spec.factory.unwrap_or(FactoryMode::OneStage);
            let k = crate::factory::catalog(&spec.code)?.k;
            let mut out = Vec::new();
            for (i, &p) in spec.p.iter().enumerate() {
                for (j, state) in [0, all_plus(k)].into_iter().enumerate() {
                    let seed = derive_seed(spec.seed, (2 * i + j) as u64);
                    out.push(factory_overhead(&spec.code, p, mode, state, spec.shots, seed)?);
                }
            }
            ExperimentOutput::Overhead(out)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_specs() {
        let text = "# demo\n[a]\nkind = repeated-ec\ncode = c1224\np = 0.001, 0.002\nshots = 10\n\n[b]\nkind = code-capacity\ncode = c422\np = 0.1\n";
        let specs = parse_specs(text).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].p, vec![0.001, 0.002]);
        assert_eq!(specs[0].rounds, 10);
        assert_eq!(specs[1].kind, ExperimentKind::CodeCapacity);
        assert!(parse_specs("kind = repeated-ec\ncode = c422\np = 2\n").is_err());
        assert!(parse_specs("kind = repeated-ec\ncode = c422\np = 0.1\nbogus = 1\n").is_err());
    }

    #[test]
    fn json_specs() {
        let s = parse_specs(r#"{"kind": "teleported-cnot", "code": "c2026", "p": [0.001], "rounds": 3}"#).unwrap();
        assert_eq!(s[0].rounds, 3);
        assert_eq!(s[0].shots, default_shots());
    }

    #[test]
    fn budget_values() {
        assert_eq!(postselection_budget(0.01, 0.05).unwrap().round(), 300.0);
        assert!(postselection_budget(0.0, 0.5).is_err());
        assert_eq!(steady_state_estimate(1.0, 1.0, 1.0, 1.0, EcStyle::Steane).unwrap(), 7.0);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&x: &f64| (x, 3.0 * x.powi(3))).collect();
        assert!((log_log_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
    }
}
