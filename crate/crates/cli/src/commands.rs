use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use uqbench::coodgen::{
    filter_pool, raw_classes_from_log, read_pool_table, severity_profile, split_pool, ClassPool,
    LevelManifest, DEFAULT_LEVELS,
};
use uqbench::kappa::{fit_temperature, score_log, KappaSpec};
use uqbench::metrics::{aurc, auroc, ece, rc_curve, spearman, MetricConfig};
use uqbench::oracle;
use uqbench::predlog::{load_log_with, stratified_split, LabelPolicy, LogFormat, LogKind, PredictionLog};
use uqbench::report::{evaluate, MetricReport, MetricValue, Provenance};
use uqbench::Error;

use crate::args::{
    CalibrateArgs, CompareArgs, CoodArgs, EvalArgs, InputFormat, KappaArgs, MetricArgs, OracleArgs,
};
use crate::CliError;

type CliResult<T> = Result<T, CliError>;

/// What a command produced: the primary JSON document for stdout, and
/// whether some metric came out undefined.
pub struct Outcome {
    pub document: Value,
    pub undefined: Vec<String>,
}

fn config_echo<T: Serialize>(command: &str, args: &T) -> Value {
    json!({ "command": command, "args": args })
}

fn log_format(path: &Path, format: InputFormat) -> LogFormat {
    match format {
        InputFormat::Auto => LogFormat::from_path(path),
        InputFormat::Csv => LogFormat::Csv,
        InputFormat::Uql1 => LogFormat::Uql1,
    }
}

fn load(path: &Path, format: InputFormat, policy: LabelPolicy) -> CliResult<PredictionLog> {
    Ok(load_log_with(path, log_format(path, format), policy)?)
}

fn kappa_spec(args: &KappaArgs) -> KappaSpec {
    KappaSpec::parse(&args.kappa).with_temperature(args.temperature)
}

fn metric_config(args: &MetricArgs) -> CliResult<MetricConfig> {
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    if args.coverages.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
        return Err(CliError::Usage("--coverages must lie in (0, 1]".into()));
    }
    if args.sac.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CliError::Usage("--sac targets must lie in [0, 1]".into()));
    }
    Ok(MetricConfig {
        bins: args.bins,
        sac_targets: args.sac.clone(),
        coverages: args.coverages.clone(),
    })
}

fn model_id(explicit: &Option<String>, path: &Path) -> String {
    explicit.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    })
}

fn prepare_out(out: &Option<PathBuf>) -> CliResult<Option<&PathBuf>> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(out.as_ref())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
}

fn to_pretty<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Core(e.into()))
}

fn build_report(
    log: &PredictionLog,
    path: &Path,
    model: String,
    kappa: &KappaSpec,
    config: &MetricConfig,
    echo: &Value,
) -> CliResult<(MetricReport, uqbench::metrics::RcCurve)> {
    let eval = evaluate(log, kappa, config)?;
    let report = MetricReport::from_outcomes(model, kappa.clone(), log.len(), config.clone(), eval.outcomes)
        .with_config(echo.clone())
        .with_provenance(Provenance::new(vec![path.display().to_string()]));
    Ok((report, eval.curve))
}

fn undefined_of(report: &MetricReport) -> Vec<String> {
    report
        .undefined_metrics()
        .into_iter()
        .map(|m| format!("{}:{m}", report.model))
        .collect()
}

pub fn eval(args: &EvalArgs) -> CliResult<Outcome> {
    let echo = config_echo("eval", args);
    let config = metric_config(&args.metrics)?;
    let kappa = kappa_spec(&args.kappa);
    let log = load(&args.log, args.format, LabelPolicy::InDistribution)?;
    let (report, curve) = build_report(&log, &args.log, model_id(&args.model, &args.log), &kappa, &config, &echo)?;
    if let Some(dir) = prepare_out(&args.out)? {
        write_file(dir, "report.json", report.to_json()?.as_bytes())?;
        let mut csv = Vec::new();
        curve.write_csv(&mut csv)?;
        write_file(dir, "rc_curve.csv", &csv)?;
    }
    Ok(Outcome {
        undefined: undefined_of(&report),
        document: serde_json::to_value(&report).map_err(|e| CliError::Core(e.into()))?,
    })
}

pub fn calibrate(args: &CalibrateArgs) -> CliResult<Outcome> {
    let echo = config_echo("calibrate", args);
    let config = metric_config(&args.metrics)?;
    let log = load(&args.log, args.format, LabelPolicy::InDistribution)?;
    if log.kind() != LogKind::Logits || log.passes() != 1 {
        return Err(Error::IncompatibleKind {
            op: "calibrate (needs single-pass logits)",
            kind: log.kind(),
        }
        .into());
    }
    let split = stratified_split(&log, args.calib_size, args.seed)?;
    let fit = fit_temperature(&log, &split)?;
    let test = log.subset(&split.test)?;
    let model = model_id(&args.model, &args.log);
    let base = KappaSpec::parse(&args.kappa.kappa);
    let before_kappa = base.clone().with_temperature(1.0);
    let after_kappa = base.with_temperature(fit.temperature);
    let (before, _) = build_report(&test, &args.log, format!("{model}@T=1"), &before_kappa, &config, &echo)?;
    let (after, curve) = build_report(&test, &args.log, format!("{model}@T=fit"), &after_kappa, &config, &echo)?;
    let deltas: serde_json::Map<String, Value> = before
        .metrics
        .iter()
        .map(|(id, b)| {
            let d = match (b.value(), after.get(id)) {
                (Some(x), Some(y)) => MetricValue::from_f64(y - x),
                _ => MetricValue::undefined("undefined before or after scaling"),
            };
            (id.clone(), serde_json::to_value(d).expect("serializable"))
        })
        .collect();
    let document = json!({
        "fit": fit,
        "before": before,
        "after": after,
        "deltas": deltas,
    });
    if let Some(dir) = prepare_out(&args.out)? {
        write_file(dir, "temperature.json", to_pretty(&fit)?.as_bytes())?;
        write_file(dir, "report_before.json", before.to_json()?.as_bytes())?;
        write_file(dir, "report_after.json", after.to_json()?.as_bytes())?;
        write_file(dir, "calibration.json", to_pretty(&document)?.as_bytes())?;
        let mut csv = Vec::new();
        curve.write_csv(&mut csv)?;
        write_file(dir, "rc_curve_after.csv", &csv)?;
    }
    let mut undefined = undefined_of(&before);
    undefined.extend(undefined_of(&after));
    Ok(Outcome { document, undefined })
}

fn load_pool(args: &CoodArgs, id_kappa: &KappaSpec) -> CliResult<ClassPool> {
    let pool_kappa = args
        .pool_kappa
        .as_deref()
        .map(KappaSpec::parse)
        .unwrap_or_else(|| id_kappa.clone());
    let exclusion: BTreeSet<u32> = args.exclude.iter().copied().collect();
    let is_table = LogFormat::from_path(&args.pool) == LogFormat::Csv;
    if is_table {
        let file = fs::File::open(&args.pool).map_err(|e| CliError::io(&args.pool, e))?;
        let classes = read_pool_table(file)?
            .into_iter()
            .filter(|c| !exclusion.contains(&c.class_id))
            .collect();
        Ok(ClassPool::new(classes, pool_kappa, args.est_size, args.test_size, !exclusion.is_empty())?)
    } else {
        if args.pool_kappa.is_some() && pool_kappa != *id_kappa {
            return Err(Error::KappaMismatch {
                pool: pool_kappa.to_string(),
                id: id_kappa.to_string(),
            }
            .into());
        }
        let log = load_log_with(&args.pool, LogFormat::Uql1, LabelPolicy::PoolClassId)?;
        let raw = raw_classes_from_log(&log, id_kappa)?;
        let target = args.est_size + args.test_size;
        let filtered = filter_pool(raw, &exclusion, args.min_samples.max(target), target, args.seed)?;
        Ok(split_pool(filtered, id_kappa.clone(), args.est_size, args.test_size, args.seed, !exclusion.is_empty())?)
    }
}

pub fn cood(args: &CoodArgs) -> CliResult<Outcome> {
    let kappa = kappa_spec(&args.kappa);
    let id_log = load(&args.log, args.format, LabelPolicy::InDistribution)?;
    let window = match args.window {
        Some(w) => w,
        None if id_log.kind() == LogKind::ScoreOnly => {
            return Err(CliError::Usage("--window is required for score-only ID logs".into()))
        }
        None => id_log.num_classes(),
    };
    let pool = load_pool(args, &kappa)?;
    let id_scores = score_log(&id_log, &kappa)?;
    let (levels, profile) = severity_profile(&id_scores, &kappa, &pool, window)?;
    let manifest = LevelManifest::new(&levels, &kappa, args.seed);
    let manifest_json = manifest.to_json()?;
    if let Some(dir) = prepare_out(&args.out)? {
        write_file(dir, "levels.json", manifest_json.as_bytes())?;
        let mut csv = Vec::new();
        profile.write_csv(&mut csv)?;
        write_file(dir, "profile.csv", &csv)?;
    }
    let document = json!({
        "config": config_echo("cood", args),
        "pool_classes": pool.len(),
        "windows": levels.num_windows,
        "levels": DEFAULT_LEVELS,
        "manifest": manifest,
        "profile": profile,
    });
    Ok(Outcome {
        document,
        undefined: Vec::new(),
    })
}

fn parse_pair(p: &str) -> CliResult<(String, String)> {
    match p.split_once(':') {
        Some((b, v)) if !b.is_empty() && !v.is_empty() => Ok((b.to_string(), v.to_string())),
        _ => Err(CliError::Usage(format!("--pair expects baseline:variant, got '{p}'"))),
    }
}

pub fn compare(args: &CompareArgs) -> CliResult<Outcome> {
    let echo = config_echo("compare", args);
    let config = metric_config(&args.metrics)?;
    let kappa = kappa_spec(&args.kappa);
    let pairs = args.pair.iter().map(|p| parse_pair(p)).collect::<CliResult<Vec<_>>>()?;
    let evaluated: Vec<MetricReport> = args
        .log
        .par_iter()
        .map(|path| {
            let log = load(path, args.format, LabelPolicy::InDistribution)?;
            Ok(build_report(&log, path, model_id(&None, path), &kappa, &config, &echo)?.0)
        })
        .collect::<CliResult<_>>()?;
    let mut rows = evaluated;
    for path in &args.report {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        rows.push(MetricReport::from_json(&text)?);
    }
    let table = uqbench::report::ComparisonTable::build(rows, &pairs)?;
    if let Some(dir) = prepare_out(&args.out)? {
        write_file(dir, "comparison.json", to_pretty(&table)?.as_bytes())?;
        let mut buf = Vec::new();
        table.write_table_csv(&mut buf)?;
        write_file(dir, "table.csv", &buf)?;
        buf.clear();
        table.write_correlations_csv(&mut buf)?;
        write_file(dir, "correlations.csv", &buf)?;
        buf.clear();
        table.write_improvements_csv(&mut buf)?;
        write_file(dir, "improvements.csv", &buf)?;
    }
    Ok(Outcome {
        document: serde_json::to_value(&table).map_err(|e| CliError::Core(e.into()))?,
        undefined: Vec::new(),
    })
}

#[derive(Serialize)]
struct Check {
    engine: MetricValue,
    oracle: MetricValue,
    abs_diff: MetricValue,
}

fn check(engine: uqbench::Result<f64>, oracle: uqbench::Result<f64>) -> Check {
    let as_value = |r: &uqbench::Result<f64>| match r {
        Ok(v) => MetricValue::from_f64(*v),
        Err(e) => MetricValue::undefined(e.to_string()),
    };
    let abs_diff = match (&engine, &oracle) {
        (Ok(a), Ok(b)) => MetricValue::from_f64((a - b).abs()),
        _ => MetricValue::undefined("one side undefined"),
    };
    Check {
        engine: as_value(&engine),
        oracle: as_value(&oracle),
        abs_diff,
    }
}

pub fn oracle_cmd(args: &OracleArgs) -> CliResult<Outcome> {
    let kappa = kappa_spec(&args.kappa);
    let log = load(&args.log, args.format, LabelPolicy::InDistribution)?;
    let sv = score_log(&log, &kappa)?;
    let distinct: BTreeSet<u64> = sv.scores.iter().map(|s| s.to_bits()).collect();
    let tie_free = distinct.len() == sv.len();
    let curve = rc_curve(&sv)?;
    let aurc_oracle = if tie_free {
        oracle::aurc_threshold_enumeration(&sv)
    } else {
        oracle::aurc_expected_risk(&sv)
    };
    let correctness: Vec<f64> = sv.correct.iter().map(|&c| f64::from(u8::from(c))).collect();
    let mut checks = serde_json::Map::new();
    let mut put = |k: &str, c: Check| {
        checks.insert(k.into(), serde_json::to_value(c).expect("serializable"));
    };
    put("auroc", check(auroc(&sv), oracle::auroc_pairs(&sv)));
    put("aurc", check(Ok(aurc(&curve)), aurc_oracle));
    put("ece", check(ece(&sv, args.bins), oracle::ece_two_pass(&sv, args.bins)));
    put(
        "spearman_kappa_correct",
        check(spearman(&sv.scores, &correctness), oracle::spearman_naive(&sv.scores, &correctness)),
    );
    let document = json!({
        "config": config_echo("oracle", args),
        "instances": sv.len(),
        "tie_free": tie_free,
        "checks": checks,
    });
    if let Some(dir) = prepare_out(&args.out)? {
        write_file(dir, "oracle.json", to_pretty(&document)?.as_bytes())?;
    }
    Ok(Outcome {
        document,
        undefined: Vec::new(),
    })
}

pub fn print_document<W: Write>(out: &mut W, doc: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("serializable");
    writeln!(out, "{text}")
}
