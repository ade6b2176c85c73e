//! CSV emission.
//!
//! The first line is a `#` comment identifying the run (version, seed,
//! scenario, and the full flag echo); the second is the column header;
//! then one row per (sweep point, method). Numbers are printed with 12
//! significant digits so reruns can be compared byte for byte.

use std::io::{self, Write};
use std::path::Path;

use irs_cf_core::{MethodId, SweepTable, SweepValue};

use crate::config::RunConfig;

/// Scientific notation with 12 significant digits; enough to
/// round-trip the interesting part of an f64 while keeping files
/// diffable across platforms.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn sweep_columns(value: &SweepValue) -> (&'static str, String) {
    match value {
        SweepValue::NumIrsElements(m) => ("m", m.to_string()),
        SweepValue::SnrDb(s) => ("snr_db", format_sig12(*s)),
    }
}

/// Starting points counted for one method's `num_inits` column: how
/// many candidate phase vectors the reported number was taken over.
fn num_inits_for(method: MethodId, config: &RunConfig) -> usize {
    match method {
        MethodId::NoIrs => 1,
        MethodId::AoAvg | MethodId::AoMax => config.inits,
        MethodId::RndPhzAvg | MethodId::RndPhzMax => {
            if config.shared_draws {
                config.inits
            } else {
                config.random_samples
            }
        }
    }
}

/// Write the whole result table to `out`.
pub fn write_csv(
    table: &SweepTable,
    config: &RunConfig,
    out: &mut impl Write,
) -> io::Result<()> {
    writeln!(
        out,
        "# irs-cf-sim v{} seed={} k={} a={} direct_link={} args: {}",
        env!("CARGO_PKG_VERSION"),
        config.seed,
        config.users,
        config.coeffs,
        config.direct_link,
        config.flags_echo(),
    )?;
    writeln!(
        out,
        "sweep_var,sweep_value,method,mean_rate_bits,stderr_bits,num_realizations,num_inits"
    )?;
    for row in &table.rows {
        let (var, value) = sweep_columns(&row.value);
        let mut stats = row.stats.clone();
        stats.sort_by_key(|s| s.method);
        for s in &stats {
            writeln!(
                out,
                "{var},{value},{},{},{},{},{}",
                s.method.name(),
                format_sig12(s.mean_bits),
                format_sig12(s.stderr_bits),
                s.num_realizations,
                num_inits_for(s.method, config),
            )?;
        }
    }
    Ok(())
}

/// Write the table to `config.out_path`, atomically: the content lands
/// in a temporary file first and is renamed into place, so an
/// interrupted run never leaves a truncated CSV behind.
pub fn write_csv_file(table: &SweepTable, config: &RunConfig) -> io::Result<()> {
    let path = &config.out_path;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write_csv(table, config, tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
