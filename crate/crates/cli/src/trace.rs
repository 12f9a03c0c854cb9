//! CSV serialization of flow traces.
//!
//! Plain RFC-4180 output, no quoting required: integer columns as-is,
//! boolean as `true`/`false`, floating point in scientific notation with 17
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use mengerflow_core::TraceRow;

pub const TRACE_HEADER: &str =
    "iter,energy,grad_norm_J,tau,feas_violation,newton_iters,isotopy_pass,wall_ms";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 128);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e}",
            r.iter,
            r.energy,
            r.grad_norm_j,
            r.tau,
            r.feas_violation,
            r.newton_iters,
            r.isotopy_pass,
            r.wall_ms
        )
        .expect("string write");
    }
    out
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> std::io::Result<()> {
    std::fs::write(path, trace_csv(rows))
}
