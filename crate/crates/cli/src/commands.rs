//! Subcommand implementations: curve generation, flow runs with trace and
//! frame export, energy evaluation, and diagnostics reports.

use std::fmt::Write as _;
use std::path::Path;

use mengerflow_core::constraints::{barycenter_jacobian, log_strain_jacobian};
use mengerflow_core::energy::{energy_differential, total_energy};
use mengerflow_core::flow::run_flow_with_observer;
use mengerflow_core::geometry::{
    add_vertex_noise, generate_square_knot, generate_torus_knot, GeometryDiagnostics,
};
use mengerflow_core::metric::{assemble_gagliardo, discrete_seminorm};
use mengerflow_core::nalgebra::DVector;
use mengerflow_core::saddle::assemble_saddle;
use mengerflow_core::{FlowResult, Polyline};

use crate::config::{CurveSpec, RunConfig};
use crate::obj::{read_obj, write_obj};
use crate::trace::write_trace;
use crate::CliError;

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Build the initial curve from the configured spec, applying vertex noise
/// when requested.
pub fn build_curve(cfg: &RunConfig) -> Result<Polyline, CliError> {
    let base = match &cfg.curve {
        CurveSpec::Torus { a, b } => {
            generate_torus_knot(*a, *b, cfg.n_edges, cfg.radius_major, cfg.radius_minor)?
        }
        CurveSpec::SquareKnot => generate_square_knot(cfg.n_edges)?,
        CurveSpec::File(path) => read_obj(path)?,
    };
    if cfg.noise > 0.0 {
        Ok(add_vertex_noise(&base, cfg.noise, cfg.seed)?)
    } else {
        Ok(base)
    }
}

/// Write the configured initial curve to `cfg.out` as OBJ.
pub fn cmd_generate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let curve = build_curve(cfg)?;
    if let Some(dir) = cfg.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_obj(&cfg.out, &curve)?;
    println!("wrote {} ({} vertices)", cfg.out.display(), curve.len());
    Ok(())
}

/// Run the flow; write trace.csv, numbered frames and final.obj into the
/// output directory.
pub fn cmd_flow(cfg: &RunConfig) -> Result<FlowResult, CliError> {
    cfg.validate()?;
    let params = cfg.energy_params()?;
    let curve = build_curve(cfg)?;
    std::fs::create_dir_all(&cfg.out)?;

    let mut frame_error: Option<CliError> = None;
    let result = run_flow_with_observer(&curve, &params, &cfg.flow, |p, row| {
        if cfg.formats.obj && cfg.frame_every > 0 && row.iter % cfg.frame_every == 0 {
            let path = cfg.out.join(format!("frame_{:06}.obj", row.iter));
            if let Err(e) = write_obj(&path, p) {
                frame_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = frame_error {
        return Err(e);
    }

    if cfg.formats.csv {
        write_trace(&cfg.out.join("trace.csv"), &result.trace)?;
    }
    if cfg.formats.obj {
        write_obj(&cfg.out.join("final.obj"), &result.polyline)?;
    }

    let last = result.trace.last().expect("trace never empty");
    println!("stop: {}", result.stop);
    println!("accepted_steps: {}", last.iter);
    println!("energy: {}", fmt_float(last.energy));
    println!("grad_norm_J: {}", fmt_float(last.grad_norm_j));
    println!("out: {}", cfg.out.display());
    Ok(result)
}

/// Print the energy (and differential norm) of the configured curve.
pub fn cmd_energy(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.validate()?;
    let params = cfg.energy_params()?;
    let curve = build_curve(cfg)?;
    let report = energy_differential(&curve, &params)?;
    println!("energy: {}", fmt_float(report.value));
    println!("triple_count: {}", report.triple_count);
    println!(
        "differential_norm: {}",
        fmt_float(report.differential.norm())
    );
    Ok(report.value)
}

/// Diagnostics report for a curve file, as labeled `key: value` lines.
pub fn diagnose_report(path: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let params = cfg.energy_params()?;
    let curve = read_obj(path)?;

    let geo = GeometryDiagnostics::compute(&curve)?;
    let report = energy_differential(&curve, &params)?;
    let gagliardo = assemble_gagliardo(&curve, &params)?;
    let position_field = DVector::from_column_slice(curve.points_flat());
    let seminorm = discrete_seminorm(&gagliardo, &position_field)?;

    let strain_jac = log_strain_jacobian(&curve)?;
    let bary_jac = barycenter_jacobian(curve.partition(), curve.dim());
    let mut sys = assemble_saddle(&gagliardo, &strain_jac, &bary_jac)?;
    sys.factorize()?;
    let (g, _, _) = sys.solve_projected_gradient(&report.differential)?;
    let grad_norm_j = report.differential.dot(&g).max(0.0).sqrt();

    let mut out = String::new();
    let mut line = |k: &str, v: String| writeln!(out, "{k}: {v}").expect("string write");
    line("vertices", curve.len().to_string());
    line("energy", fmt_float(report.value));
    line("seminorm", fmt_float(seminorm));
    line("bilipschitz", fmt_float(geo.bilipschitz));
    line("min_edge_length", fmt_float(geo.min_edge_length));
    line("max_edge_length", fmt_float(geo.max_edge_length));
    line("max_turning_angle", fmt_float(geo.max_turning_angle));
    line(
        "barycenter",
        geo.barycenter
            .iter()
            .map(|x| fmt_float(*x))
            .collect::<Vec<_>>()
            .join(" "),
    );
    line("theta_min_eigenvalue", fmt_float(geo.theta_min_eigenvalue));
    line("total_length", fmt_float(geo.total_length));
    line("differential_norm", fmt_float(report.differential.norm()));
    line("grad_norm_J", fmt_float(grad_norm_j));
    Ok(out)
}

pub fn cmd_diagnose(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    print!("{}", diagnose_report(path, cfg)?);
    Ok(())
}

/// Evaluate the total energy of a curve file with the configured exponent;
/// shared by tests.
pub fn energy_of_file(path: &Path, cfg: &RunConfig) -> Result<f64, CliError> {
    let params = cfg.energy_params()?;
    Ok(total_energy(&read_obj(path)?, &params)?)
}
