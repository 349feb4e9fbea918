//! Dispatch of resolved configurations to the library.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};

use kamjet::arithmetic::{
    bruno_diagnostic, density_estimate, flow_and_shortest, lattice_basis, lemma_eps_t, sigma, sigma_exact,
    strip_analysis, DecaySequence, DensitySpec, Descriptor, FrequencyVector, IndexNorm, MapDescriptor, SigmaOptions,
};
use kamjet::birkhoff::{birkhoff_normalize, BirkhoffOptions, CoordinateMode, EllipticHamiltonian, SolveOrder};
use kamjet::jets::{parse_jet, JetJson};
use kamjet::kamengine::{
    extended_scenario_staged, kam_iterate, split_morse, verify_conjugacy, ActionIdeal, IdealCertificate, KamProblem,
};
use kamjet::poisson::quadratic_model;
use kamjet::torusverify::{fraction_trend, torus_scan, TorusOptions, CONVENTION};
use kamjet::{CQSqrt5, ComplexScalar, Jet, QSqrt5, RealScalar, Scalar};

use crate::config::{read_text, Command, ExperimentConfig, JetSource, Mode, ProblemFile};
use crate::error::CliError;

pub enum Output {
    /// One JSON document `{config, result}`.
    Document(Value),
    /// JSON-lines: a `{config}` header, records, then `{result}`.
    Lines(Vec<Value>),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Document(v) => format!("{}\n", serde_json::to_string_pretty(v).expect("json values serialize")),
            Output::Lines(vs) => vs.iter().map(|v| format!("{v}\n")).collect(),
        }
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let header = serde_json::to_value(cfg).expect("configs serialize");
    let result = match &cfg.command {
        Command::Sigma { alpha, k_max, norm } => sigma_cmd(cfg.mode, alpha, *k_max, *norm)?,
        Command::Bruno { alpha, k_max } => bruno_cmd(alpha, *k_max)?,
        Command::Lattice { alpha, t, lemma, coeff_bound } => lattice_cmd(alpha, *t, *lemma, *coeff_bound)?,
        Command::Density { map, x0, a, rho, r, samples, k_max, csv } => {
            let csv = cfg.out_dir.join(csv);
            density_cmd(map, x0, a.as_ref(), rho, r, *samples, *k_max, cfg.seed, &csv)?
        }
        Command::Strips { alpha, a, rho, r, k_max } => strips_cmd(alpha, a.as_ref(), rho, *r, *k_max)?,
        Command::Birkhoff { input, order, coords, solve } => match cfg.mode {
            Mode::Rational => birkhoff_cmd::<CQSqrt5>(input, *order, *coords, *solve)?,
            Mode::Float => birkhoff_cmd::<Complex64>(input, *order, *coords, *solve)?,
        },
        Command::Kam { problem, stages } => {
            let text = read_text(problem)?;
            let pf: ProblemFile = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
            let base = problem.parent().unwrap_or(Path::new("."));
            let mut lines = vec![json!({ "config": header })];
            match cfg.mode {
                Mode::Rational => kam_cmd::<QSqrt5>(&pf, base, *stages, &mut lines)?,
                Mode::Float => kam_cmd::<f64>(&pf, base, *stages, &mut lines)?,
            }
            return Ok(Output::Lines(lines));
        }
        Command::Torus { hamiltonian, r, samples, options, csv_prefix } => {
            torus_cmd(hamiltonian, r, *samples, cfg.seed, options, &cfg.out_dir, csv_prefix)?
        }
        Command::Report { inputs } => report_cmd(inputs)?,
    };
    Ok(Output::Document(json!({ "config": header, "result": result })))
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn parse_scalars<C: Scalar>(xs: &[String]) -> Result<Vec<C>, CliError> {
    xs.iter().map(|s| C::parse_str(s).map_err(|e| schema(e.to_string()))).collect()
}

fn texts<C: Scalar>(xs: &[C]) -> Vec<String> {
    xs.iter().map(|x| x.to_text()).collect()
}

fn load_jet<C: Scalar>(path: &Path) -> Result<Jet<C>, CliError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let j: JetJson = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
        Ok(j.to_jet()?)
    } else {
        Ok(parse_jet(&text)?)
    }
}

fn load_source<C: Scalar>(src: &JetSource, base: &Path) -> Result<Jet<C>, CliError> {
    match src {
        JetSource::Path(p) => load_jet(&if p.is_relative() { base.join(p) } else { p.clone() }),
        JetSource::Inline(j) => Ok(j.to_jet()?),
    }
}

fn float_alpha(alpha: &[String]) -> Result<(Vec<f64>, FrequencyVector), CliError> {
    let a: Vec<f64> = parse_scalars(alpha)?;
    let fv = FrequencyVector::new(a.clone())?;
    Ok((a, fv))
}

fn decay_or_sigma(a: Option<&Descriptor>, point: &[f64], k_max: u32) -> Result<DecaySequence, CliError> {
    Ok(match a {
        Some(d) => DecaySequence::from_descriptor(d.clone(), k_max as usize)?,
        None => sigma(&FrequencyVector::new(point.to_vec())?, k_max, SigmaOptions::default())?.to_decay()?,
    })
}

fn sigma_cmd(mode: Mode, alpha: &[String], k_max: u32, norm: IndexNorm) -> Result<Value, CliError> {
    let opts = SigmaOptions { norm, ..SigmaOptions::default() };
    Ok(match mode {
        Mode::Rational => {
            let a: Vec<QSqrt5> = parse_scalars(alpha)?;
            let s = sigma_exact(&a, k_max, opts)?;
            json!({
                "alpha": texts(&a),
                "k_max": k_max,
                "norm": norm,
                "sequence": texts(&s.values),
                "approx": s.values.iter().map(|v| v.to_f64()).collect::<Vec<_>>(),
                "witnesses": s.witnesses,
            })
        }
        Mode::Float => {
            let (a, fv) = float_alpha(alpha)?;
            let s = sigma(&fv, k_max, opts)?;
            json!({ "alpha": a, "k_max": k_max, "norm": norm, "sequence": s.values, "witnesses": s.witnesses })
        }
    })
}

fn bruno_cmd(alpha: &[String], k_max: u32) -> Result<Value, CliError> {
    let (a, fv) = float_alpha(alpha)?;
    let s = sigma(&fv, k_max, SigmaOptions::default())?;
    let rep = bruno_diagnostic(&s.to_decay()?, k_max as usize)?;
    Ok(json!({ "alpha": a, "k_max": k_max, "sequence": s.values, "bruno": rep }))
}

fn lattice_cmd(alpha: &[String], t: Option<f64>, lemma: Option<(f64, f64)>, bound: i64) -> Result<Value, CliError> {
    let (a, fv) = float_alpha(alpha)?;
    let (eps, t) = match (t, lemma) {
        (Some(t), _) => (None, t),
        (None, Some((a, norm))) => {
            let (e, t) = lemma_eps_t(a, norm)?;
            (Some(e), t)
        }
        (None, None) => return Err(schema("lattice needs a flow time or (a, |i|)")),
    };
    let sv = flow_and_shortest(&lattice_basis(&fv), t, bound)?;
    let within = eps.map(|e| sv.delta_estimate <= e);
    Ok(json!({ "alpha": a, "t": t, "eps": eps, "coeff_bound": bound, "shortest": sv, "within_eps": within }))
}

#[allow(clippy::too_many_arguments)]
fn density_cmd(
    map: &MapDescriptor,
    x0: &[f64],
    a: Option<&Descriptor>,
    rho: &Descriptor,
    rs: &[f64],
    samples: u64,
    k_max: u32,
    seed: u64,
    csv_path: &Path,
) -> Result<Value, CliError> {
    if rs.is_empty() {
        return Err(schema("density needs at least one radius"));
    }
    let y0 = map.image(x0)?;
    let a_seq = decay_or_sigma(a, &y0, k_max)?;
    let rho_seq = DecaySequence::from_descriptor(rho.clone(), k_max as usize)?;
    let mut reports = Vec::with_capacity(rs.len());
    for &r in rs {
        let spec = DensitySpec {
            map: map.clone(),
            x0: x0.to_vec(),
            a: a_seq.clone(),
            rho: rho_seq.clone(),
            r,
            samples,
            k_max,
            seed,
            sigma: SigmaOptions::default(),
        };
        reports.push(density_estimate(&spec)?);
    }
    let mut w = csv_writer(csv_path)?;
    let io = |e: csv::Error| io_error(csv_path, e);
    w.write_record(["r", "samples", "fraction", "k_max", "seed"]).map_err(io)?;
    for rep in &reports {
        w.write_record([
            rep.radius.to_string(),
            rep.sample_count.to_string(),
            rep.fraction_in_class.to_string(),
            rep.k_max.to_string(),
            rep.rng_seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: csv_path.to_path_buf(), source: e })?;
    Ok(json!({
        "alpha": y0,
        "k_max": k_max,
        "seed": seed,
        "fractions": reports.iter().map(|r| r.fraction_in_class).collect::<Vec<_>>(),
        "reports": reports,
        "csv": csv_path,
    }))
}

fn strips_cmd(alpha: &[String], a: Option<&Descriptor>, rho: &Descriptor, r: f64, k_max: u32) -> Result<Value, CliError> {
    let (av, fv) = float_alpha(alpha)?;
    let a_seq = decay_or_sigma(a, &av, k_max)?;
    let rho_seq = DecaySequence::from_descriptor(rho.clone(), k_max as usize)?;
    let strips = strip_analysis(&fv, &a_seq, &rho_seq, r, k_max, SigmaOptions::default())?;
    Ok(json!({
        "alpha": av,
        "r": r,
        "k_max": k_max,
        "count": strips.len(),
        "intersecting": strips.iter().filter(|s| s.intersects_ball).count(),
        "exact_intersecting": strips.iter().filter(|s| s.exact_intersects).count(),
        "strips": strips,
    }))
}

fn birkhoff_cmd<K: ComplexScalar>(
    input: &Path,
    order: u32,
    coords: CoordinateMode,
    solve: SolveOrder,
) -> Result<Value, CliError> {
    if order < 2 || order % 2 != 0 {
        return Err(schema(format!("order must be an even integer ≥ 2, got {order}")));
    }
    let h: Jet<K> = load_jet(input)?;
    let eh = EllipticHamiltonian::new(h, coords)?;
    let opts = BirkhoffOptions { order: solve, ..BirkhoffOptions::default() };
    let res = birkhoff_normalize(&eh, order / 2, opts)?;
    Ok(json!({
        "coords": coords,
        "order": order,
        "alpha": texts(&res.morse.alpha),
        "a": JetJson::from_jet(&res.a),
        "a_real": res.a_real.as_ref().map(JetJson::from_jet),
        "generators": res.generators.iter().map(|g| JetJson::from_jet(&g.generator)).collect::<Vec<_>>(),
        "residual_order": res.residual.ord(),
        "achieved_order": res.achieved_order,
        "min_divisor": res.min_divisor,
    }))
}

fn certificate_json(c: &IdealCertificate) -> Value {
    serde_json::to_value(c).expect("certificates serialize")
}

fn kam_cmd<C: Scalar>(pf: &ProblemFile, base: &Path, stages: Option<usize>, lines: &mut Vec<Value>) -> Result<(), CliError> {
    let h: Jet<C> = load_source(&pf.hamiltonian, base)?;
    let result = match &pf.basis {
        None => {
            let (alpha, r) = split_morse(&h)?;
            let sh = h.shape();
            let model = quadratic_model(sh, h.trunc(), &alpha);
            let mut problem = KamProblem::new(alpha.clone(), model.clone(), r, ActionIdeal::fiber(sh)?);
            problem.schedule = pf.schedule;
            if let Some(s) = stages {
                problem.max_stage = s;
            }
            let run = kam_iterate(&problem)?;
            lines.extend(run.trace.iter().map(|s| serde_json::to_value(s.summary()).expect("summaries serialize")));
            let certificate = if run.converged { Some(certificate_json(&verify_conjugacy(&problem, &run)?)) } else { None };
            json!({
                "scenario": "fiber",
                "alpha": texts(&alpha),
                "converged": run.converged,
                "stages": run.trace.len(),
                "ord_b": run.trace.iter().map(|s| s.ord_b).collect::<Vec<_>>(),
                "certificate": certificate,
                "absorbed": JetJson::from_jet(&run.absorbed(&model)),
                "remainder": JetJson::from_jet(&run.remainder),
            })
        }
        Some(basis) => {
            let basis: Vec<Vec<C>> = basis.iter().map(|e| parse_scalars(e)).collect::<Result<_, _>>()?;
            let rep = extended_scenario_staged(&h, &basis, pf.schedule, stages)?;
            lines.extend(rep.run.trace.iter().map(|s| serde_json::to_value(s.summary()).expect("summaries serialize")));
            json!({
                "scenario": "extended",
                "alpha": texts(&rep.alpha),
                "basis": rep.basis.iter().map(|e| texts(e)).collect::<Vec<_>>(),
                "converged": rep.run.converged,
                "stages": rep.run.trace.len(),
                "ord_b": rep.run.trace.iter().map(|s| s.ord_b).collect::<Vec<_>>(),
                "certificate": certificate_json(&rep.certificate),
                "corrections": rep.corrections.iter().map(JetJson::from_jet).collect::<Vec<_>>(),
                "frequency": rep.frequency.iter().map(JetJson::from_jet).collect::<Vec<_>>(),
                "frequency_through": rep.frequency_through,
            })
        }
    };
    lines.push(json!({ "result": result }));
    Ok(())
}

fn io_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    csv::Writer::from_path(path).map_err(|e| io_error(path, e))
}

fn torus_cmd(
    hamiltonian: &Path,
    rs: &[f64],
    samples: usize,
    seed: u64,
    opts: &TorusOptions,
    out_dir: &Path,
    prefix: &str,
) -> Result<Value, CliError> {
    if rs.is_empty() {
        return Err(schema("torus scan needs at least one radius"));
    }
    let h: Jet<f64> = load_jet(hamiltonian)?;
    let mut reports = Vec::with_capacity(rs.len());
    for &r in rs {
        reports.push(torus_scan(&h, r, samples, seed, opts)?);
    }
    let mut scans = Vec::new();
    for rep in &reports {
        let path = out_dir.join(format!("{prefix}_r{}.csv", rep.r));
        let mut w = csv_writer(&path)?;
        let io = |e: csv::Error| io_error(&path, e);
        w.write_record(["x0", "drift", "stability", "class"]).map_err(io)?;
        for rec in &rep.records {
            let x0: Vec<String> = rec.x0.iter().map(|x| x.to_string()).collect();
            let stab = rec.stability.map_or_else(String::new, |s| s.to_string());
            w.write_record([x0.join(" "), rec.energy_drift.to_string(), stab, rec.class.label().to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        scans.push(json!({
            "r": rep.r,
            "samples": rep.samples,
            "seed": rep.seed,
            "fraction": rep.fraction,
            "std_error": rep.std_error,
            "torus_like": rep.torus_like,
            "chaotic_or_escaping": rep.chaotic_or_escaping,
            "undecided": rep.undecided,
            "csv": path,
        }));
    }
    Ok(json!({
        "convention": CONVENTION,
        "options": opts,
        "fractions": reports.iter().map(|r| r.fraction).collect::<Vec<_>>(),
        "scans": scans,
        "trend": fraction_trend(&reports),
    }))
}

/// First and last JSON values of a document or JSON-lines artifact.
fn artifact_values(text: &str) -> Option<(Value, Value)> {
    if let Ok(v) = serde_json::from_str::<Value>(text) {
        return Some((v.clone(), v));
    }
    let mut vals = text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str::<Value>);
    let first = vals.next()?.ok()?;
    let last = vals.last().and_then(Result::ok).unwrap_or_else(|| first.clone());
    Some((first, last))
}

/// Scalars and arrays of scalars.
fn is_flat(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(xs) => xs.iter().all(|x| !x.is_object() && !x.is_array()),
        _ => true,
    }
}

fn report_cmd(inputs: &[PathBuf]) -> Result<Value, CliError> {
    if inputs.is_empty() {
        return Err(schema("report needs at least one artifact"));
    }
    let mut rows = Vec::new();
    for path in inputs {
        let text = read_text(path)?;
        let (head, tail) =
            artifact_values(&text).ok_or_else(|| schema(format!("{}: not a JSON artifact", path.display())))?;
        let config = &head["config"];
        if config.is_null() {
            return Err(schema(format!("{}: no config header", path.display())));
        }
        let summary: serde_json::Map<String, Value> = tail["result"]
            .as_object()
            .map(|m| m.iter().filter(|(_, v)| is_flat(v)).map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default();
        rows.push(json!({
            "file": path,
            "command": config["command"]["kind"],
            "mode": config["mode"],
            "seed": config["seed"],
            "summary": summary,
        }));
    }
    Ok(json!({ "artifacts": rows }))
}
