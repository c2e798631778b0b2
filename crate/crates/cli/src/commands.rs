use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use snh_core::analysis::{
    crossings, detect_extrema, fit_bifurcation, fit_large_b, log_grid, mass_energy,
    newton_potential_check, omega_range_check, pohozaev_report, profile_grid, sweep_omega_b,
    FitReport, SweepRecord, IDENTITY_TOLERANCE,
};
use snh_core::shooting::{find_excited_state, find_ground_state, ShootResult};
use snh_core::singular::{find_singular_state, fit_omega_inf_law};
use snh_core::ProblemSpec;

use crate::args::{Command, Common, DimRange, FitKind, Format};
use crate::error::CliError;
use crate::output::{
    downsample, provenance, read_csv, write_columns, write_csv, write_json, StateDocument,
    Thresholds, MAX_PROFILE_POINTS, TOOL, VERSION,
};

/// Radii used by the Newton potential cross-check.
const NEWTON_GRID: usize = 50;
/// Extrema rising less than this above both neighbours are ignored.
const EXTREMUM_PROMINENCE: f64 = 1e-8;

pub fn run(command: &Command) -> Result<(), CliError> {
    let config = serde_json::to_value(command).expect("command serializes");
    match command {
        Command::Ground { d, b, common } => state(*d, *b, None, common, &config),
        Command::Excited { d, b, n, common } => state(*d, *b, Some(*n), common, &config),
        Command::Singular { d, common } => singular(*d, common, &config),
        Command::Sweep {
            d,
            b_lo,
            b_hi,
            points,
            log,
            common,
        } => sweep(*d, (*b_lo, *b_hi, *points, *log), common, &config),
        Command::Verify { file } => verify(file),
        Command::Fit {
            model,
            input,
            d,
            omega_inf,
            out,
        } => fit(*model, input, *d, *omega_inf, out, &config),
    }
}

fn regular_spec(d: u32, common: &Common) -> Result<ProblemSpec, CliError> {
    let base = ProblemSpec::regular(d).map_err(|e| CliError::Usage(e.to_string()))?;
    tolerances(base, common)
}

fn tolerances(base: ProblemSpec, common: &Common) -> Result<ProblemSpec, CliError> {
    let (rtol, atol) = (common.rtol.unwrap_or(base.rtol), common.atol.unwrap_or(base.atol));
    if !(common.c_tol > 0.0) {
        return Err(CliError::Usage(format!("--c-tol must be positive, got {}", common.c_tol)));
    }
    base.with_tolerances(rtol, atol).map_err(|e| CliError::Usage(e.to_string()))
}

fn fmt_name(x: f64) -> String {
    x.to_string()
}

fn state(d: u32, b: f64, n: Option<usize>, common: &Common, config: &serde_json::Value) -> Result<(), CliError> {
    if common.format == Format::Csv {
        return Err(CliError::Usage("state results are JSON documents; drop --format csv".into()));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(CliError::Usage(format!("--b must be positive, got {b}")));
    }
    let spec = regular_spec(d, common)?;
    let res = match n {
        None => find_ground_state(b, &spec, common.c_tol)?,
        Some(n) => find_excited_state(b, n, &spec, common.c_tol)?,
    };
    let doc = document(res, spec, config)?;
    let name = match n {
        None => format!("ground_d{d}_b{}.json", fmt_name(b)),
        Some(n) => format!("excited_d{d}_b{}_n{n}.json", fmt_name(b)),
    };
    let path = common.out.join(name);
    write_json(&path, &doc)?;
    println!(
        "d={d} b={b} n={} omega={} c_star={} max_identity_residual={:.3e} newton={:.3e} -> {}",
        doc.result.n,
        doc.result.omega,
        doc.result.c_star,
        doc.identities.max_residual(),
        doc.newton_deviation,
        path.display()
    );
    check(&doc)
}

fn document(res: ShootResult, spec: ProblemSpec, config: &serde_json::Value) -> Result<StateDocument, CliError> {
    let identities = pohozaev_report(&res)?;
    let newton_deviation = newton_potential_check(&res, &profile_grid(&res, NEWTON_GRID))?;
    let mass_energy = mass_energy(&res)?;
    let range = (res.n == 0).then(|| omega_range_check(&res));
    let mut result = res;
    result.profile = downsample(&result.profile, MAX_PROFILE_POINTS);
    Ok(StateDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        config: config.clone(),
        spec,
        result,
        identities,
        newton_deviation,
        mass_energy,
        range,
        thresholds: Thresholds {
            identity: IDENTITY_TOLERANCE,
            newton: IDENTITY_TOLERANCE,
        },
    })
}

fn check(doc: &StateDocument) -> Result<(), CliError> {
    let mut failures = Vec::new();
    for (name, r) in &doc.identities.residuals {
        if !(*r <= doc.thresholds.identity) {
            failures.push(format!("{name} = {r:e}"));
        }
    }
    if !(doc.newton_deviation <= doc.thresholds.newton) {
        failures.push(format!("newton = {:e}", doc.newton_deviation));
    }
    if let Some(range) = &doc.range {
        if !range.pass {
            failures.push(format!(
                "omega = {} outside [{}, {}]",
                range.omega, range.lower, range.upper
            ));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Identity(failures.join(", ")))
    }
}

fn verify(file: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    let stored: StateDocument = serde_json::from_str(&text).map_err(|e| CliError::Data {
        path: file.to_path_buf(),
        reason: e.to_string(),
    })?;
    let res = &stored.result;
    let identities = pohozaev_report(res).map_err(|e| CliError::Identity(e.to_string()))?;
    let newton_deviation = newton_potential_check(res, &profile_grid(res, NEWTON_GRID))
        .map_err(|e| CliError::Identity(e.to_string()))?;
    let fresh = StateDocument {
        identities,
        newton_deviation,
        range: stored.range.map(|_| omega_range_check(res)),
        ..stored.clone()
    };
    println!(
        "{}: max identity residual {:.3e}, newton {:.3e} (thresholds {:e}, {:e})",
        file.display(),
        fresh.identities.max_residual(),
        fresh.newton_deviation,
        fresh.thresholds.identity,
        fresh.thresholds.newton
    );
    check(&fresh)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularRow {
    pub d: u32,
    pub omega_inf: f64,
    pub c_star: f64,
    pub bracket_width: f64,
    pub r_reliable: f64,
    /// Reduced field `|f r^2 / 2(d-4)|` at `r_reliable`.
    pub tail_residual: f64,
}

#[derive(Serialize)]
struct SingularDocument<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a serde_json::Value,
    spec: &'a ProblemSpec,
    rows: &'a [SingularRow],
    fit: Option<FitReport>,
}

fn singular(range: DimRange, common: &Common, config: &serde_json::Value) -> Result<(), CliError> {
    let spec = tolerances(
        ProblemSpec::singular(range.lo).map_err(|e| CliError::Usage(e.to_string()))?,
        common,
    )?;
    let results: Vec<_> = range
        .dims()
        .into_par_iter()
        .map(|d| find_singular_state(d, 0, &spec, common.c_tol))
        .collect();
    let rows = results
        .into_iter()
        .map(|r| {
            r.map(|r| SingularRow {
                d: r.d,
                omega_inf: r.omega_inf,
                c_star: r.c_star,
                bracket_width: r.bracket_width,
                r_reliable: r.r_reliable,
                tail_residual: (1.0 + r.profile.last().f).abs(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let table: Vec<(u32, f64)> = rows.iter().map(|r| (r.d, r.omega_inf)).collect();
    let fit = (table.len() >= 3).then(|| fit_omega_inf_law(&table)).transpose()?;
    for r in &rows {
        println!("d={} omega_inf={:.7} c_star={:.12}", r.d, r.omega_inf, r.c_star);
    }
    if let Some(fit) = &fit {
        println!("fit d - omega_inf = A exp(-gamma d): A={:.5} gamma={:.5}", fit.params["A"], fit.params["gamma"]);
    }
    let stem = format!("singular_d{}-{}", range.lo, range.hi);
    match common.format {
        Format::Json => write_json(
            &common.out.join(format!("{stem}.json")),
            &SingularDocument {
                tool: TOOL,
                version: VERSION,
                config,
                spec: &spec,
                rows: &rows,
                fit,
            },
        ),
        Format::Csv => {
            let head = provenance(config, Some(&spec));
            write_csv(&common.out.join(format!("{stem}.csv")), &head, &rows)?;
            if let Some(fit) = fit {
                write_csv(&common.out.join(format!("{stem}_fit.csv")), &head, &fit_rows(&fit))?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FitRow<'a> {
    model: String,
    parameter: &'a str,
    value: f64,
    residual: f64,
    window_lo: f64,
    window_hi: f64,
}

fn fit_rows(fit: &FitReport) -> Vec<FitRow<'_>> {
    let model = serde_json::to_value(fit.model)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    fit.params
        .iter()
        .map(|(k, v)| FitRow {
            model: model.clone(),
            parameter: k,
            value: *v,
            residual: fit.residual,
            window_lo: fit.window.0,
            window_hi: fit.window.1,
        })
        .collect()
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a serde_json::Value,
    spec: &'a ProblemSpec,
    records: &'a [SweepRecord],
}

fn sweep(
    d: u32,
    (lo, hi, points, log): (f64, f64, usize, bool),
    common: &Common,
    config: &serde_json::Value,
) -> Result<(), CliError> {
    let spec = regular_spec(d, common)?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(CliError::Usage(format!(
            "need 0 < b-lo < b-hi and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    let records = sweep_omega_b(d, &log_grid(lo, hi, points, log), &spec, common.c_tol)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    let extrema = detect_extrema(&records, EXTREMUM_PROMINENCE);
    let stem = common.out.join(format!("sweep_d{d}"));
    let head = provenance(config, Some(&spec));
    match common.format {
        Format::Json => write_json(
            &with_ext(&stem, "json"),
            &SweepDocument {
                tool: TOOL,
                version: VERSION,
                config,
                spec: &spec,
                records: &records,
            },
        )?,
        Format::Csv => write_csv(&with_ext(&stem, "csv"), &head, &records)?,
    }
    let curve: Vec<Vec<f64>> = records
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| vec![r.b, r.omega])
        .collect();
    write_columns(&with_ext(&stem, "plot.dat"), &head, "b omega", &curve)?;
    let marks: Vec<Vec<f64>> = extrema.iter().map(|e| vec![e.b, e.omega]).collect();
    write_columns(&with_ext(&stem, "extrema.dat"), &head, "b omega", &marks)?;
    println!(
        "d={d}: {} points, {failed} failed, {} extrema -> {}.*",
        records.len(),
        extrema.len(),
        stem.display()
    );
    if failed > 0 {
        return Err(CliError::Solver(snh_core::SolverError::NotDecayed(format!(
            "{failed} of {} sweep points failed; see the error column",
            records.len()
        ))));
    }
    Ok(())
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct FitDocument<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a serde_json::Value,
    input: &'a Path,
    fit: FitReport,
    /// Crossings of `omega_inf` by the curve (large-b model only).
    crossings: Option<Vec<f64>>,
}

fn fit(
    model: FitKind,
    input: &Path,
    d: Option<u32>,
    omega_inf: Option<f64>,
    out: &Path,
    config: &serde_json::Value,
) -> Result<(), CliError> {
    let need_d = || d.ok_or_else(|| CliError::Usage("--d is required for this model".into()));
    let (report, cross) = match model {
        FitKind::OmegaInf => {
            let rows: Vec<SingularRow> = read_csv(input)?;
            let table: Vec<(u32, f64)> = rows.iter().map(|r| (r.d, r.omega_inf)).collect();
            (fit_omega_inf_law(&table)?, None)
        }
        FitKind::Bifurcation => (fit_bifurcation(&read_csv::<SweepRecord>(input)?, need_d()?)?, None),
        FitKind::LargeB => {
            let w = omega_inf.ok_or_else(|| CliError::Usage("--omega-inf is required for large-b".into()))?;
            let curve: Vec<SweepRecord> = read_csv(input)?;
            (fit_large_b(&curve, need_d()?, w)?, Some(crossings(&curve, w)))
        }
    };
    let name = match model {
        FitKind::OmegaInf => "fit_omega_inf.json",
        FitKind::Bifurcation => "fit_bifurcation.json",
        FitKind::LargeB => "fit_large_b.json",
    };
    for (k, v) in &report.params {
        println!("{k} = {v}");
    }
    println!("residual = {:e} on [{}, {}]", report.residual, report.window.0, report.window.1);
    write_json(
        &out.join(name),
        &FitDocument {
            tool: TOOL,
            version: VERSION,
            config,
            input,
            fit: report,
            crossings: cross,
        },
    )
}
