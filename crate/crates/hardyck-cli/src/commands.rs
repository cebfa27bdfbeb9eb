//! The four subcommands.

use hardyck::hardy_core::{b_profile, compute_b, sandwich_check, HardyOptions};
use hardyck::inequalities::{
    check_ckn, check_critical_hardy, check_hardy_sobolev, check_hls, check_uncertainty, critical_hardy_b2, validate,
    CheckOptions, InputFamily,
};
use hardyck::{
    BReport, HardyProblem64, InequalityKind, InequalitySpec64, KernelBound64, KernelVariant, QuadValue, RatioReport,
    RatioVerdict, Verdict,
};
use rayon::prelude::*;

use crate::config::{resolve, ExperimentConfig, ProblemConfig, Resolved};
use crate::report::{stem, Entries, Record, Report, Row, SweepRow};
use crate::CliError;

/// Flags shared by the subcommands.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub expect_unbounded: bool,
    pub allow_inadmissible: bool,
}

/// Report and the exit code it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

fn outcome(cfg: &ExperimentConfig, command: &str, records: Vec<Record>) -> Outcome {
    let report = Report { command: command.into(), seed: cfg.seed, records: Entries::Records(records) };
    let exit_code = if report.all_ok() { 0 } else { 1 };
    Outcome { report, exit_code }
}

/// Maps every problem in input order; work runs on the current rayon pool.
fn map_problems<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<Record>, CliError>
where
    F: Fn(&ProblemConfig, Resolved) -> Result<Record, CliError> + Sync,
{
    cfg.problems.par_iter().map(|pb| f(pb, resolve(cfg, pb)?)).collect()
}

fn kind_name(kind: &InequalityKind<f64>) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(String::from))
        .unwrap_or_default()
}

fn hardy_admissible(pb: &HardyProblem64) -> bool {
    pb.p > 1.0 && pb.q > 1.0 && pb.p.is_finite() && pb.q.is_finite()
}

fn value_cell(v: &QuadValue<f64>) -> String {
    match v {
        QuadValue::Finite(x) => format!("{x}"),
        QuadValue::Divergent(_) => "divergent".into(),
    }
}

fn snake<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn error_record(name: &str, kind: String, admissible: Option<bool>, e: impl std::fmt::Display) -> Record {
    Record {
        row: Row { name: name.into(), kind, admissible, verdict: "error".into(), ok: false, ..Row::default() },
        error: Some(e.to_string()),
        ..Record::default()
    }
}

/// Admissibility of every problem. Exit 0 iff all admissible or `allow_inadmissible`.
pub fn cmd_validate(cfg: &ExperimentConfig, run: &RunOptions) -> Result<Outcome, CliError> {
    let records = map_problems(cfg, |pb, resolved| {
        let (kind, admissible, derived, violations) = match resolved {
            Resolved::Hardy { problem, .. } => {
                let ok = hardy_admissible(&problem);
                let violations = if ok { vec![] } else { vec!["1 < p, q < ∞".to_string()] };
                let mut derived = std::collections::BTreeMap::new();
                if ok {
                    derived.insert("p_conj".into(), problem.p_conj());
                    derived.insert("sandwich_factor".into(), problem.sandwich_factor());
                    if let Some(g) = problem.gamma() {
                        derived.insert("gamma".into(), g);
                    }
                }
                ("hardy".to_string(), ok, derived, violations)
            }
            Resolved::Inequality { spec, .. } => {
                let v = validate(&spec);
                (kind_name(&spec.kind), v.admissible, v.derived, v.violations)
            }
        };
        Ok(Record {
            row: Row {
                name: pb.name().into(),
                kind,
                admissible: Some(admissible),
                verdict: if admissible { "admissible" } else { "inadmissible" }.into(),
                ok: admissible || run.allow_inadmissible,
                ..Row::default()
            },
            derived,
            violations,
            ..Record::default()
        })
    })?;
    Ok(outcome(cfg, "validate", records))
}

fn b_record(name: &str, kind: String, admissible: bool, b: &BReport<f64>) -> Record {
    Record {
        row: Row {
            name: name.into(),
            kind,
            admissible: Some(admissible),
            which: Some(b.which.to_string()),
            value: Some(value_cell(&b.value)),
            argmax: b.argmax,
            sandwich_upper: b.sandwich_upper,
            verdict: match b.value {
                QuadValue::Finite(_) => "finite".into(),
                QuadValue::Divergent(_) => "divergent".into(),
            },
            ok: true,
            ..Row::default()
        },
        ..Record::default()
    }
}

/// `log10 R` offsets of the `B(R)` curve around the argmax.
const PROFILE_DECADES: f64 = 3.0;
const PROFILE_POINTS: usize = 49;

fn profile(pb: &HardyProblem64, b: &BReport<f64>, opts: &HardyOptions<f64>) -> Vec<(f64, f64)> {
    let Some(arg) = b.argmax else { return vec![] };
    (0..PROFILE_POINTS)
        .map(|i| {
            let t = -PROFILE_DECADES + 2.0 * PROFILE_DECADES * i as f64 / (PROFILE_POINTS - 1) as f64;
            let r = arg * 10f64.powf(t);
            (r, b_profile(pb, r, opts).unwrap_or(f64::NAN))
        })
        .filter(|(_, v)| v.is_finite())
        .collect()
}

fn c_prime(kernel: &Option<KernelBound64>) -> f64 {
    match kernel.map(|k| k.variant) {
        Some(KernelVariant::Noncompact { c_prime, .. }) => c_prime,
        _ => 1.0,
    }
}

/// Characterizing constants of every Hardy problem and the critical Hardy B2.
pub fn cmd_bconst(cfg: &ExperimentConfig, _run: &RunOptions) -> Result<Outcome, CliError> {
    let opts = cfg.tolerances.hardy_options();
    let records = map_problems(cfg, |pb, resolved| {
        let name = pb.name();
        Ok(match resolved {
            Resolved::Hardy { problem, .. } => {
                let adm = hardy_admissible(&problem);
                match compute_b(&problem, &opts) {
                    Ok(b) => {
                        let mut rec = b_record(name, "hardy".into(), adm, &b);
                        rec.plots = vec![(stem(name, "b_profile"), profile(&problem, &b, &opts))];
                        rec.plots.retain(|p| !p.1.is_empty());
                        rec
                    }
                    Err(e) => error_record(name, "hardy".into(), Some(adm), e),
                }
            }
            Resolved::Inequality { spec, kernel, .. } => {
                let kind = kind_name(&spec.kind);
                let adm = validate(&spec).admissible;
                if !matches!(spec.kind, InequalityKind::CriticalHardy { .. }) {
                    Record {
                        row: Row { name: name.into(), kind, admissible: Some(adm), verdict: "no_b_constant".into(), ok: true, ..Row::default() },
                        ..Record::default()
                    }
                } else {
                    match critical_hardy_b2(&spec, c_prime(&kernel), &opts) {
                        Ok(b) => b_record(name, kind, adm, &b),
                        Err(e) => error_record(name, kind, Some(adm), e),
                    }
                }
            }
        })
    })?;
    Ok(outcome(cfg, "bconst", records))
}

fn trend_plot(name: &str, trend: &[f64]) -> (String, Vec<(f64, f64)>) {
    (stem(name, "trend"), trend.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect())
}

fn default_inputs(admissible: bool) -> Vec<InputFamily<f64>> {
    if admissible {
        vec![InputFamily::bump(0.0, 1.0), InputFamily::Gaussian { center: 0.5, width: 0.5 }]
    } else {
        vec![InputFamily::concentrating(1.0)]
    }
}

fn ratio_verdict(v: RatioVerdict) -> &'static str {
    match v {
        RatioVerdict::Bounded => "bounded",
        RatioVerdict::Unbounded => "unbounded",
        RatioVerdict::Inconclusive => "inconclusive",
    }
}

fn check_inequality(
    spec: &InequalitySpec64,
    kernel: &KernelBound64,
    inputs: &[InputFamily<f64>],
    opts: &CheckOptions<f64>,
) -> Result<(RatioReport<f64>, bool), CliError> {
    let run = |e: hardyck::inequalities::CheckError| CliError::Run(e.to_string());
    Ok(match spec.kind {
        InequalityKind::HardySobolev { .. } | InequalityKind::Hardy { .. } => {
            (check_hardy_sobolev(spec, inputs, kernel, opts).map_err(run)?, true)
        }
        InequalityKind::CriticalHardy { .. } => (check_critical_hardy(spec, inputs, kernel, opts).map_err(run)?, true),
        InequalityKind::Ckn { .. } | InequalityKind::Gn { .. } => {
            let r = check_ckn(spec, inputs, kernel, opts).map_err(run)?;
            let holder = r.holder.iter().all(|h| h.pass);
            (r.ratio, holder)
        }
        InequalityKind::Hls { .. } => {
            let g = inputs.get(1).unwrap_or(&inputs[0]);
            (check_hls(spec, &inputs[0], g, kernel, opts).map_err(run)?, true)
        }
        InequalityKind::Uncertainty { .. } | InequalityKind::UncertaintyCritical { .. } => {
            let grid = opts.grid(1).map_err(|e| CliError::Run(e.to_string()))?;
            let mut kappas = Vec::new();
            let mut pass = true;
            for input in inputs {
                let u = check_uncertainty(spec, input, kernel, &grid).map_err(run)?;
                kappas.push(u.kappa);
                pass &= u.pass;
            }
            let mut rep = RatioReport::from_trend(kappas.clone(), kappas);
            rep.verdict = if pass { RatioVerdict::Bounded } else { RatioVerdict::Inconclusive };
            (rep, pass)
        }
        InequalityKind::CriticalCkn { .. } => unreachable!("handled by the caller"),
    })
}

/// Sandwich checks and grid ratio checks. Exit 0 iff every verdict is as expected.
pub fn cmd_check(cfg: &ExperimentConfig, run: &RunOptions) -> Result<Outcome, CliError> {
    let opts = cfg.tolerances.hardy_options();
    let grid = cfg.grid.check_options();
    let records = map_problems(cfg, |pb, resolved| {
        let name = pb.name();
        match resolved {
            Resolved::Hardy { problem, family } => {
                let adm = hardy_admissible(&problem);
                let rep = match sandwich_check(&problem, &family, &opts) {
                    Ok(r) => r,
                    Err(e) => return Ok(error_record(name, "hardy".into(), Some(adm), e)),
                };
                let ok = match rep.verdict {
                    Verdict::Pass => true,
                    Verdict::DivergenceConfirmed => run.expect_unbounded,
                    Verdict::Fail | Verdict::DivergenceUnconfirmed => false,
                };
                let mut rec = b_record(name, "hardy".into(), adm, &rep.b);
                rec.row.max_ratio = Some(rep.max_ratio);
                rec.row.verdict = snake(&rep.verdict);
                rec.row.ok = ok;
                rec.ratios = rep.ratios;
                rec.fk_ratios = rep.fk_ratios;
                rec.near_extremizer_ratio = rep.near_extremizer_ratio;
                let curve = profile(&problem, &rep.b, &opts);
                if !curve.is_empty() {
                    rec.plots.push((stem(name, "b_profile"), curve));
                }
                Ok(rec)
            }
            Resolved::Inequality { spec, kernel, inputs } => {
                let kind = kind_name(&spec.kind);
                let v = validate(&spec);
                let mut rec = Record {
                    row: Row { name: name.into(), kind: kind.clone(), admissible: Some(v.admissible), ..Row::default() },
                    derived: v.derived,
                    violations: v.violations,
                    ..Record::default()
                };
                if matches!(spec.kind, InequalityKind::CriticalCkn { .. }) {
                    rec.row.verdict = "validated_only".into();
                    rec.row.ok = v.admissible || run.allow_inadmissible;
                    return Ok(rec);
                }
                let kernel = kernel.ok_or_else(|| CliError::Config(format!("problem `{name}` needs a `kernel` table")))?;
                kernel.validate().map_err(|e| CliError::Config(format!("problem `{name}`: {e}")))?;
                let inputs = if inputs.is_empty() { default_inputs(v.admissible) } else { inputs };
                let (ratio, holder) = match check_inequality(&spec, &kernel, &inputs, &grid) {
                    Ok(r) => r,
                    Err(CliError::Run(e)) => return Ok(error_record(name, kind, Some(v.admissible), e)),
                    Err(e) => return Err(e),
                };
                let expected =
                    if !v.admissible && run.expect_unbounded { RatioVerdict::Unbounded } else { RatioVerdict::Bounded };
                rec.row.max_ratio = Some(ratio.max_ratio);
                rec.row.verdict = ratio_verdict(ratio.verdict).into();
                rec.row.ok = ratio.verdict == expected && holder;
                rec.plots.push(trend_plot(name, &ratio.refinement_trend));
                rec.ratios = ratio.ratios;
                rec.refinement_trend = ratio.refinement_trend;
                Ok(rec)
            }
        }
    })?;
    Ok(outcome(cfg, "check", records))
}

fn set_path(v: &mut serde_json::Value, path: &str, x: f64) -> Result<(), CliError> {
    let mut cur = v;
    for key in path.split('.') {
        cur = cur.get_mut(key).ok_or_else(|| CliError::Config(format!("sweep axis `{path}` does not exist")))?;
    }
    if !cur.is_number() {
        return Err(CliError::Config(format!("sweep axis `{path}` is not numeric")));
    }
    *cur = serde_json::Value::from(x);
    Ok(())
}

/// Problem with `axis` set to `x`.
fn with_axis(pb: &ProblemConfig, axis: &str, x: f64) -> Result<ProblemConfig, CliError> {
    let mut v = serde_json::to_value(pb).map_err(|e| CliError::Config(e.to_string()))?;
    set_path(&mut v, axis, x)?;
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("sweep axis `{axis}`: {e}")))
}

/// Verdict of one sweep sample: admissibility plus B where one applies.
fn sweep_sample(cfg: &ExperimentConfig, pb: &ProblemConfig, opts: &HardyOptions<f64>) -> Result<(Option<bool>, Option<String>, String), CliError> {
    Ok(match resolve(cfg, pb)? {
        Resolved::Hardy { problem, .. } => {
            let adm = hardy_admissible(&problem);
            if !adm {
                (Some(false), None, "inadmissible".into())
            } else {
                match compute_b(&problem, opts) {
                    Ok(b) => (Some(true), Some(value_cell(&b.value)), b_status(&b.value).into()),
                    Err(e) => (Some(true), None, format!("error: {e}")),
                }
            }
        }
        Resolved::Inequality { spec, kernel, .. } => {
            let adm = validate(&spec).admissible;
            if matches!(spec.kind, InequalityKind::CriticalHardy { .. }) {
                match critical_hardy_b2(&spec, c_prime(&kernel), opts) {
                    Ok(b) => (Some(adm), Some(value_cell(&b.value)), b_status(&b.value).into()),
                    Err(e) => (Some(adm), None, format!("error: {e}")),
                }
            } else {
                (Some(adm), None, if adm { "admissible" } else { "inadmissible" }.into())
            }
        }
    })
}

fn b_status(v: &QuadValue<f64>) -> &'static str {
    match v {
        QuadValue::Finite(_) => "finite",
        QuadValue::Divergent(_) => "divergent",
    }
}

/// Verdict against one numeric parameter. Always exits 0 once the config is valid.
pub fn cmd_sweep(cfg: &ExperimentConfig, _run: &RunOptions) -> Result<Outcome, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("missing `[sweep]` table".into()))?;
    let base = cfg
        .problems
        .iter()
        .find(|p| p.name() == sweep.problem)
        .ok_or_else(|| CliError::Config(format!("sweep refers to unknown problem `{}`", sweep.problem)))?;
    let opts = cfg.tolerances.hardy_options();
    let samples: Vec<(f64, ProblemConfig)> =
        sweep.values().into_iter().map(|x| Ok((x, with_axis(base, &sweep.axis, x)?))).collect::<Result<_, CliError>>()?;
    let results: Vec<_> = samples
        .par_iter()
        .map(|(x, pb)| sweep_sample(cfg, pb, &opts).map(|r| (*x, r)))
        .collect::<Result<_, CliError>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut prev: Option<String> = None;
    for (value, (admissible, b_value, verdict)) in results {
        let transition = if prev.as_ref().is_some_and(|p| *p != verdict) { "*" } else { "" };
        prev = Some(verdict.clone());
        rows.push(SweepRow {
            problem: sweep.problem.clone(),
            axis: sweep.axis.clone(),
            value,
            admissible,
            b_value,
            verdict,
            transition: transition.into(),
        });
    }
    let report = Report { command: "sweep".into(), seed: cfg.seed, records: Entries::Sweep(rows) };
    Ok(Outcome { report, exit_code: 0 })
}
