//! Running a parsed command: thread pool, output files and metadata.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::cli::{effective_bits, execute, Cli, Report};
use crate::error::CliError;
use crate::format::write_table;

/// `<output>.meta.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Runs `cli` inside its own thread pool and returns the report with the
/// wall time in seconds.
pub fn compute(cli: &Cli) -> Result<(Report, f64), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    let start = Instant::now();
    let report = pool.install(|| execute(cli))?;
    Ok((report, start.elapsed().as_secs_f64()))
}

pub fn metadata(cli: &Cli, report: &Report, wall: f64) -> Value {
    let bits = effective_bits(cli);
    let mut m = json!({
        "command": cli.command.name(),
        "parameters": cli,
        "precision_bits": bits,
        "requested_precision_bits": cli.common.precision_bits,
        "decimal_digits": fibspec_core::PrecisionContext::new(bits).map(|c| c.decimal_digits()).unwrap_or(0),
        "library_version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": wall,
        "columns": report.table.columns,
        "rows": report.table.rows.len(),
        "not_found": report.not_found,
    });
    let obj = m.as_object_mut().unwrap();
    for (k, v) in &report.extra {
        obj.insert(k.clone(), v.clone());
    }
    m
}

/// Computes, writes the data (and sidecar when writing to a file), and
/// returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fibspec: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<i32, CliError> {
    let (report, wall) = compute(cli)?;
    match &cli.common.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_table(&report.table, cli.common.format, &mut out)?;
            out.flush()?;
            let mut side = BufWriter::new(File::create(sidecar_path(path))?);
            serde_json::to_writer_pretty(&mut side, &metadata(cli, &report, wall)).map_err(|e| CliError::Io(e.into()))?;
            side.write_all(b"\n")?;
            side.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            write_table(&report.table, cli.common.format, stdout.lock())?;
        }
    }
    Ok(match &report.not_found {
        Some(msg) => {
            let e = CliError::NotFound(msg.clone());
            eprintln!("fibspec: {e}");
            e.exit_code()
        }
        None => 0,
    })
}
