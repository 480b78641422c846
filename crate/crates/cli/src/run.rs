use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ckn_core::solver::minimize_rho;
use ckn_core::{
    derive_exponents, first_eigenvalue, map_to_general_form, parameter_sweep, validate_ckn, verify_inequality,
    CknParams, RadialFunction, RadialGrid,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    match config.command {
        Command::Validate => validate(config),
        Command::Exponents => exponents(config),
        Command::Solve => solve(config),
        Command::Verify => verify(config),
        Command::Eigen => eigen(config),
        Command::Sweep => sweep(config),
    }
}

fn io_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Malformed(format!("{}: {err}", path.display()))
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    let mut w = open_output(config.out.as_deref())?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Malformed(format!("writing output: {e}")))
}

fn emit_json(config: &RunConfig, mut doc: Value) -> Result<(), CliError> {
    if let Value::Object(map) = &mut doc {
        map.insert("schema_version".to_owned(), json!(SCHEMA_VERSION));
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    emit(config, &text)
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("result types always serialize")
}

/// Number formatting for CSV: 17 significant digits, empty for missing values.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn json_only(config: &RunConfig) -> Result<(), CliError> {
    match config.format {
        Some(Format::Csv) => Err(CliError::Malformed(format!(
            "{} writes JSON; profiles go to --profile as CSV",
            config.command.name()
        ))),
        _ => Ok(()),
    }
}

fn grid_json(grid: &RadialGrid) -> Value {
    json!({
        "tau_min": grid.tau_min(),
        "tau_max": grid.tau_max(),
        "n": grid.len(),
        "h": grid.h(),
        "solid_angle": grid.solid_angle(),
        "N": grid.dim(),
    })
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    let params = config.params()?;
    let report = validate_ckn(&params);
    match config.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(
            config,
            json!({ "command": "validate", "params": params, "report": report }),
        )?,
        Format::Csv => {
            let mut text = String::from("check,relation,residual,satisfied,satisfied_non_strict\n");
            for c in &report.checks {
                let relation = to_value(c.relation);
                text.push_str(&format!(
                    "\"{}\",{},{},{},{}\n",
                    c.name,
                    relation.as_str().unwrap_or_default(),
                    num(c.residual),
                    c.satisfied,
                    c.satisfied_non_strict
                ));
            }
            emit(config, &text)?;
        }
    }
    if report.valid {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "parameters fail validation: {}",
            report.failed().collect::<Vec<_>>().join(", ")
        )))
    }
}

fn exponents(config: &RunConfig) -> Result<(), CliError> {
    let params = config.params()?;
    let ex = derive_exponents(&params)?;
    let general = map_to_general_form(&params)?;
    match config.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(
            config,
            json!({
                "command": "exponents",
                "params": params,
                "exponents": ex,
                "general_form": general,
            }),
        ),
        Format::Csv => {
            let mut text = String::from("name,value\n");
            for (prefix, value) in [("", to_value(ex)), ("general_form.", to_value(general))] {
                if let Value::Object(map) = value {
                    for (k, v) in map {
                        let cell = v.as_f64().map(num).unwrap_or_default();
                        text.push_str(&format!("{prefix}{k},{cell}\n"));
                    }
                }
            }
            emit(config, &text)
        }
    }
}

/// `--profile`, or `<out>.profile.csv` next to the JSON output.
fn profile_path(config: &RunConfig) -> Option<PathBuf> {
    config.profile.clone().or_else(|| {
        config.out.as_ref().map(|out| {
            let stem = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.with_file_name(format!("{stem}.profile.csv"))
        })
    })
}

fn write_profile(path: &Path, profile: &RadialFunction) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    profile.write_csv(BufWriter::new(file)).map_err(|e| io_error(path, e))
}

fn strip_trace(mut value: Value, keep: bool) -> Value {
    if !keep {
        if let Value::Object(map) = &mut value {
            map.remove("energy_trace");
        }
    }
    value
}

fn not_converged(what: &str) -> CliError {
    CliError::Failed(format!(
        "{what} did not converge; results were written but are not reliable"
    ))
}

fn solve(config: &RunConfig) -> Result<(), CliError> {
    json_only(config)?;
    let params = config.params()?;
    validate_ckn(&params).into_result()?;
    let grid = config.grid(params.dim)?;
    let res = minimize_rho(&params, &grid, &config.solver)?;
    let profile = profile_path(config);
    if let Some(path) = &profile {
        write_profile(path, &res.profile)?;
    }
    let mut result = strip_trace(to_value(&res), config.trace);
    if let Value::Object(map) = &mut result {
        map.remove("params");
    }
    emit_json(
        config,
        json!({
            "command": "solve",
            "params": params,
            "grid": grid_json(&grid),
            "options": config.solver,
            "result": result,
            "minimizer": "radial local minimizer candidate",
            "profile": profile,
        }),
    )?;
    if res.converged {
        Ok(())
    } else {
        Err(not_converged("minimization"))
    }
}

fn verify(config: &RunConfig) -> Result<(), CliError> {
    json_only(config)?;
    let params = config.params()?;
    validate_ckn(&params).into_result()?;
    let grid = config.grid(params.dim)?;
    let (c, solved) = match config.c {
        Some(c) => (c, None),
        None => {
            let res = minimize_rho(&params, &grid, &config.solver)?;
            if !res.converged {
                return Err(not_converged("minimization for the candidate constant"));
            }
            (res.c_sharp, Some(json!({ "rho": res.rho, "c_sharp": res.c_sharp })))
        }
    };
    let report = verify_inequality(&params, &grid, c, config.samples, config.solver.seed)?;
    emit_json(
        config,
        json!({
            "command": "verify",
            "params": params,
            "grid": grid_json(&grid),
            "seed": config.solver.seed,
            "c_source": if solved.is_some() { "solve" } else { "flag" },
            "solve": solved,
            "report": report,
        }),
    )?;
    if report.violations == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} of {} samples exceed C = {c}",
            report.violations, report.samples
        )))
    }
}

fn eigen(config: &RunConfig) -> Result<(), CliError> {
    json_only(config)?;
    let problem = config.eigen_problem()?;
    problem.validate().into_result()?;
    let n = config.eigen_nodes();
    let grid = problem.grid(n)?;
    let res = first_eigenvalue(&problem, n, &config.solver)?;
    let profile = profile_path(config);
    if let Some(path) = &profile {
        write_profile(path, &res.phi1)?;
    }
    let mut result = strip_trace(to_value(&res), config.trace);
    if let Value::Object(map) = &mut result {
        map.remove("problem");
    }
    emit_json(
        config,
        json!({
            "command": "eigen",
            "problem": problem,
            "grid": grid_json(&grid),
            "options": config.solver,
            "result": result,
            "profile": profile,
        }),
    )?;
    if res.converged {
        Ok(())
    } else {
        Err(not_converged("eigenvalue minimization"))
    }
}

fn sweep(config: &RunConfig) -> Result<(), CliError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Malformed("sweep needs --input with a JSON array of tuples".to_owned()))?;
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let tuples: Vec<CknParams> = serde_json::from_str(&text).map_err(|e| io_error(path, e))?;
    let grid = config.grid(config.sweep_dim())?;
    let results = parameter_sweep(&tuples, &grid, &config.solver);
    let failures = results
        .iter()
        .filter(|r| !r.as_ref().is_ok_and(|r| r.converged))
        .count();

    match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(open_output(config.out.as_deref())?);
            let write = |w: &mut csv::Writer<Box<dyn Write>>| -> csv::Result<()> {
                w.write_record([
                    "index",
                    "N",
                    "p",
                    "q",
                    "r",
                    "mu",
                    "sigma",
                    "s",
                    "rho",
                    "c_sharp",
                    "lagrange",
                    "el_residual",
                    "balance_residual",
                    "iterations",
                    "converged",
                    "error",
                ])?;
                for (i, (params, res)) in tuples.iter().zip(&results).enumerate() {
                    let mut row = vec![
                        i.to_string(),
                        params.dim.to_string(),
                        num(params.p),
                        num(params.q),
                        num(params.r),
                        num(params.mu),
                        num(params.sigma),
                        num(params.s),
                    ];
                    match res {
                        Ok(r) => row.extend([
                            num(r.rho),
                            num(r.c_sharp),
                            num(r.lagrange),
                            opt_num(r.el_residual),
                            num(r.balance_residual),
                            r.iterations.to_string(),
                            r.converged.to_string(),
                            String::new(),
                        ]),
                        Err(e) => {
                            row.extend(std::iter::repeat_n(String::new(), 6));
                            row.extend(["false".to_owned(), e.to_string()]);
                        }
                    }
                    w.write_record(&row)?;
                }
                w.flush()?;
                Ok(())
            };
            write(&mut w).map_err(|e| CliError::Malformed(format!("writing sweep table: {e}")))?;
        }
        Format::Json => {
            let rows: Vec<Value> = tuples
                .iter()
                .zip(&results)
                .map(|(params, res)| match res {
                    Ok(r) => {
                        let mut v = strip_trace(to_value(r), config.trace);
                        if let Value::Object(map) = &mut v {
                            map.insert("error".to_owned(), Value::Null);
                        }
                        v
                    }
                    Err(e) => json!({ "params": params, "error": e.to_string() }),
                })
                .collect();
            emit_json(
                config,
                json!({ "command": "sweep", "grid": grid_json(&grid), "options": config.solver, "results": rows }),
            )?;
        }
    }
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{failures} of {} tuples failed or did not converge",
            tuples.len()
        )))
    }
}
