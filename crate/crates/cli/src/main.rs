mod args;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use num_complex::Complex64;
use qzeros::numlin::{match_spectra, ZeroSet};
use qzeros::report::VerificationReport;
use qzeros::sampling::SplitMix64;
use qzeros::suite::{self, SuiteOptions};
use qzeros::tolerances::Tolerances;
use qzeros::zeroflow::{self, FlowState, PerturbationState};
use qzeros::{awspec, racahspec, AWParams, Error, Params, RacahParams};
use serde_json::{json, Value};

use args::{Cli, Command, Common, FamilyArg, Format};
use output::{complex_list, family_name, params_json, Table};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_CONFIGURATION: u8 = 3;
const EXIT_USAGE: u8 = 4;

/// Environment variable holding a factor applied to every tolerance.
const TOL_SCALE_VAR: &str = "QZ_TOL_SCALE";

enum Failure {
    Usage(String),
    Configuration(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameters(_) | Error::LengthMismatch { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Configuration(e.to_string()),
        }
    }
}

/// What a command produced, and whether its checks passed.
struct Rendered {
    json: Value,
    table: Table,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Usage(msg)) => {
            eprintln!("qz: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Configuration(msg)) => {
            eprintln!("qz: {msg}");
            ExitCode::from(EXIT_CONFIGURATION)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let (common, result) = match &cli.command {
        Command::Zeros(c) => (c, zeros(c)),
        Command::Matrix(c) => (c, matrix(c)),
        Command::Spectrum(c) => (c, spectrum(c)),
        Command::Verify(c) => (c, verify(c, start)),
        Command::Flow { common, epsilon, t_end, dt_max } => (common, flow(common, *epsilon, *t_end, *dt_max)),
        Command::Sweep { common, count } => (common, sweep(common, *count, start)),
    };
    let (rendered, deferred) = match result {
        Ok(r) => (r, None),
        // a degenerate point may still have something worth printing
        Err((Some(r), f)) => (r, Some(f)),
        Err((None, f)) => return Err(f),
    };
    emit(common, &rendered)?;
    match deferred {
        Some(f) => Err(f),
        None => Ok(rendered.pass),
    }
}

type CommandResult = Result<Rendered, (Option<Rendered>, Failure)>;

fn plain<T>(r: Result<T, Error>) -> Result<T, (Option<Rendered>, Failure)> {
    r.map_err(|e| (None, e.into()))
}

fn emit(common: &Common, r: &Rendered) -> Result<(), Failure> {
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&r.json).expect("json values always serialize");
            s.push('\n');
            s
        }
        Format::Csv => r.table.render().map_err(|e| Failure::Configuration(format!("csv: {e}")))?,
    };
    match &common.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Configuration(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Configuration(format!("cannot write output: {e}"))),
    }
}

fn tolerances(common: &Common) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var(TOL_SCALE_VAR) {
        let factor: f64 =
            raw.trim().parse().map_err(|_| Failure::Usage(format!("{TOL_SCALE_VAR}=`{raw}` is not a number")))?;
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Failure::Usage(format!("{TOL_SCALE_VAR} must be positive and finite")));
        }
        tol = tol.scaled(factor);
    }
    for (name, value) in &common.tol {
        tol.set(name, *value).map_err(Failure::Usage)?;
    }
    Ok(tol)
}

fn require(v: Option<Complex64>, flag: &str, family: &str) -> Result<Complex64, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{flag} is required for --family {family}")))
}

fn params(common: &Common) -> Result<Params, Failure> {
    match common.family {
        FamilyArg::Aw => {
            let p = AWParams {
                a: require(common.a, "-a", "aw")?,
                b: require(common.b, "-b", "aw")?,
                c: require(common.c, "-c", "aw")?,
                d: require(common.d, "-d", "aw")?,
                q: common.q,
                n: common.n,
            };
            Ok(Params::AskeyWilson(p))
        }
        FamilyArg::Racah => {
            let p = RacahParams {
                alpha: require(common.alpha, "--alpha", "racah")?,
                beta: require(common.beta, "--beta", "racah")?,
                gamma: require(common.gamma, "--gamma", "racah")?,
                delta: require(common.delta, "--delta", "racah")?,
                q: common.q,
                n: common.n,
            };
            Ok(Params::QRacah(p))
        }
    }
}

/// Parameters for single-point commands: degree at least one and admissible.
fn point(common: &Common) -> Result<Params, (Option<Rendered>, Failure)> {
    let p = params(common).map_err(|f| (None, f))?;
    if common.n == 0 {
        return Err((None, Failure::Usage("degree N must be at least 1".into())));
    }
    plain(match &p {
        Params::AskeyWilson(a) => a.validate(),
        Params::QRacah(r) => r.validate(),
    })?;
    Ok(p)
}

fn header(p: &Params) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("family".into(), json!(family_name(p)));
    m.insert("params".into(), params_json(p));
    m.insert("N".into(), json!(p.degree()));
    m
}

fn zeros(common: &Common) -> CommandResult {
    let p = point(common)?;
    let zs = plain(ZeroSet::compute(&p))?;
    let mut doc = header(&p);
    doc.insert("zbar".into(), complex_list(&zs.zbar));
    doc.insert("xbar".into(), complex_list(&zs.xbar));
    doc.insert("residuals".into(), json!(zs.residuals));
    doc.insert("min_separation".into(), json!(zs.min_separation));
    Ok(Rendered { table: output::zeros_table(&zs), json: Value::Object(doc), pass: true })
}

fn matrix(common: &Common) -> CommandResult {
    let p = point(common)?;
    let (_, m) = plain(suite::zeros_and_matrix(&p))?;
    let mut doc = header(&p);
    doc.insert("label".into(), json!(format!("{:?}", m.label)));
    doc.insert("entries".into(), output::matrix_json(&m.entries));
    doc.insert("predicted".into(), complex_list(&m.predicted));
    Ok(Rendered { table: output::matrix_table(&m.entries), json: Value::Object(doc), pass: true })
}

fn predicted(p: &Params) -> Vec<Complex64> {
    match p {
        Params::AskeyWilson(a) => awspec::predicted_mu(a),
        Params::QRacah(r) => racahspec::predicted_lambda(r),
    }
}

fn spectrum(common: &Common) -> CommandResult {
    let tol = tolerances(common).map_err(|f| (None, f))?;
    let p = params(common).map_err(|f| (None, f))?;
    if common.n == 0 {
        return Err((None, Failure::Usage("degree N must be at least 1".into())));
    }
    let predicted = predicted(&p);
    let mut doc = header(&p);
    doc.insert("predicted".into(), complex_list(&predicted));
    doc.insert("tolerance".into(), json!(tol.spectrum));

    let computed = match &p {
        Params::AskeyWilson(a) => a.validate(),
        Params::QRacah(r) => r.validate(),
    }
    .and_then(|_| suite::zeros_and_matrix(&p))
    .and_then(|(_, m)| {
        let ev = m.eigenvalues()?;
        let matched = match_spectra(&ev, &predicted)?;
        Ok((ev, matched))
    });
    match computed {
        Ok((ev, matched)) => {
            let ordered: Vec<Complex64> = matched.pairing.iter().map(|&k| ev[k]).collect();
            let pass = matched.max_rel_gap <= tol.spectrum;
            doc.insert("computed".into(), complex_list(&ordered));
            doc.insert("max_abs_gap".into(), json!(matched.max_abs_gap));
            doc.insert("max_rel_gap".into(), json!(matched.max_rel_gap));
            doc.insert("pass".into(), json!(pass));
            Ok(Rendered { table: output::spectrum_table(&predicted, Some(&ordered)), json: Value::Object(doc), pass })
        }
        Err(e) => {
            // the closed-form spectrum exists even when the zeros do not
            doc.insert("computed".into(), Value::Null);
            doc.insert("error".into(), json!(e.to_string()));
            doc.insert("pass".into(), json!(false));
            let r = Rendered { table: output::spectrum_table(&predicted, None), json: Value::Object(doc), pass: false };
            Err((Some(r), e.into()))
        }
    }
}

fn elapsed_ms(common: &Common, start: Instant) -> u64 {
    if common.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn report_doc(family: &str, params: Value, n: usize, report: &VerificationReport, seed: u64, elapsed_ms: u64) -> Value {
    json!({
        "family": family,
        "params": params,
        "N": n,
        "checks": output::checks_json(&report.checks),
        "pass": report.pass(),
        "seed": seed,
        "elapsed_ms": elapsed_ms,
    })
}

fn print_notes(report: &VerificationReport) {
    for n in &report.notes {
        eprintln!("note: {n}");
    }
}

fn verify(common: &Common, start: Instant) -> CommandResult {
    let tol = tolerances(common).map_err(|f| (None, f))?;
    let p = point(common)?;
    let opts = SuiteOptions { tolerances: tol, seed: common.seed, ..Default::default() };
    let report = plain(suite::verify(&p, &opts))?;
    print_notes(&report);
    let doc = report_doc(family_name(&p), params_json(&p), p.degree(), &report, common.seed, elapsed_ms(common, start));
    Ok(Rendered { table: output::checks_table(&report.checks), json: doc, pass: report.pass() })
}

fn flow(common: &Common, epsilon: f64, t_end: Option<f64>, dt_max: Option<f64>) -> CommandResult {
    let p = point(common)?;
    let (zs, m) = plain(suite::zeros_and_matrix(&p))?;
    let t_end = t_end.unwrap_or_else(|| zeroflow::short_time(&m.entries));
    let dt_max = dt_max.unwrap_or(t_end / 20.0);
    if !(t_end > 0.0 && t_end.is_finite() && dt_max > 0.0 && dt_max.is_finite()) {
        return Err((None, Failure::Usage("--t-end and --dt-max must be positive".into())));
    }
    let mut rng = SplitMix64::new(common.seed);
    let dir = rng.direction(zs.len());
    let pert = plain(PerturbationState::new(zs.clone(), epsilon, dir))?;
    let initial = FlowState { family: p.family(), positions: pert.initial_positions(), time: 0.0 };
    let traj = zeroflow::integrate_flow(|x| zeroflow::velocity(&zs, x), initial, t_end, dt_max);

    let mut doc = header(&p);
    doc.insert("seed".into(), json!(common.seed));
    doc.insert("epsilon".into(), json!(epsilon));
    doc.insert("t_end".into(), json!(t_end));
    doc.insert("trajectory".into(), output::trajectory_json(&traj));
    doc.insert("stopped".into(), traj.stopped.as_ref().map_or(Value::Null, |e| json!(e.to_string())));
    let rendered = Rendered { table: output::trajectory_table(&traj), json: Value::Object(doc), pass: true };
    match traj.stopped {
        Some(e) => Err((Some(rendered), e.into())),
        None => Ok(rendered),
    }
}

fn sweep(common: &Common, count: usize, start: Instant) -> CommandResult {
    let tol = tolerances(common).map_err(|f| (None, f))?;
    if common.n == 0 {
        return Err((None, Failure::Usage("maximum degree N must be at least 1".into())));
    }
    let family = match common.family {
        FamilyArg::Aw => "aw",
        FamilyArg::Racah => "racah",
    };
    let mut rng = SplitMix64::new(common.seed);
    let mut report = VerificationReport::new();
    let mut sets = Vec::with_capacity(count);
    for i in 0..count {
        let n = i % common.n + 1;
        let drawn = match common.family {
            FamilyArg::Aw => rng.aw_params(common.q, n).map(Params::AskeyWilson),
            FamilyArg::Racah => rng.racah_params(common.q, n).map(Params::QRacah),
        };
        let prefix = format!("set{}", i + 1);
        let point_seed = common.seed.wrapping_add(i as u64 + 1);
        match drawn {
            Ok(p) => {
                let mut entry = params_json(&p);
                entry["N"] = json!(n);
                sets.push(entry);
                let opts = SuiteOptions { tolerances: tol, seed: point_seed, jacobian: n <= 6, ..Default::default() };
                match suite::verify(&p, &opts) {
                    Ok(r) => {
                        print_notes(&r);
                        report.extend_prefixed(&prefix, r);
                    }
                    Err(e) => report.failed(format!("{prefix}/build"), 0.0, &[], e.to_string()),
                }
            }
            Err(e) => {
                sets.push(Value::Null);
                report.failed(format!("{prefix}/build"), 0.0, &[], e.to_string());
            }
        }
    }
    let doc = report_doc(family, Value::Array(sets), common.n, &report, common.seed, elapsed_ms(common, start));
    Ok(Rendered { table: output::checks_table(&report.checks), json: doc, pass: report.pass() })
}
