//! Command implementations. Each returns the text destined for stdout and
//! writes any files itself.

use std::path::{Path, PathBuf};

use calabi::gradient::{admissible_times, gradient_geodesic};
use calabi::{
    boundary_sequence, conjugate_point_scan, diameter_sequence, distance, distance_matrix, exp_map,
    geodesic_cauchy, geodesic_dirichlet, karcher_mean, log_map, ConformalFactor, DensitySet,
};
use serde::Serialize;

use crate::config::{Header, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self, csv_row, field_output, to_json, TangentFile};

fn curve_csv(cfg: &RunConfig, rows: &[(f64, Vec<f64>)]) -> String {
    let n = rows.first().map_or(0, |r| r.1.len());
    let mut out = cfg.csv_header();
    out.push('\n');
    out.push('t');
    for i in 0..n {
        out.push_str(&format!(",node_{i}"));
    }
    out.push('\n');
    for (t, u) in rows {
        out.push_str(&csv_row(std::iter::once(*t).chain(u.iter().copied())));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest {
    header: Header,
    t0: f64,
    d: f64,
    frames: Vec<FrameEntry>,
    curve: String,
}

#[derive(Debug, Serialize)]
struct FrameEntry {
    file: String,
    t: f64,
    mass: f64,
}

/// Samples the geodesic between two densities at `frames` uniform times in
/// `[0, t0]`. Writes one CSV of `e^u` per frame, `curve.csv` with the `u`
/// values, and `manifest.json`.
pub fn interpolate(
    u0: &ConformalFactor,
    u1: &ConformalFactor,
    frames: usize,
    out_dir: &Path,
    cfg: &RunConfig,
) -> CliResult<String> {
    if frames < 2 {
        return Err(CliError::Input(format!(
            "--frames must be at least 2, got {frames}"
        )));
    }
    let (seg, t0) = geodesic_dirichlet(u0, u1)?;
    let d = distance(u0, u1)?.d;
    let dom = u0.domain();
    let mut rows = Vec::with_capacity(frames);
    let mut entries = Vec::with_capacity(frames);
    for k in 0..frames {
        let t = t0 * k as f64 / (frames - 1) as f64;
        // endpoints are the inputs themselves
        let u = if k == 0 {
            u0.clone()
        } else if k + 1 == frames {
            u1.clone()
        } else {
            seg.evaluate(t)?
        };
        let density = u.density();
        let name = format!("frame_{k:04}.csv");
        let mut csv = cfg.csv_header();
        csv.push_str("\nnode,weight,density\n");
        for (i, (w, e)) in dom.weights().iter().zip(&density).enumerate() {
            csv.push_str(&format!("{i},{w},{e}\n"));
        }
        io::write_file(&out_dir.join(&name), &csv)?;
        entries.push(FrameEntry {
            file: name,
            t,
            mass: dom.integrate(&density)?,
        });
        rows.push((t, u.values().to_vec()));
    }
    io::write_file(&out_dir.join("curve.csv"), &curve_csv(cfg, &rows))?;
    let manifest = Manifest {
        header: cfg.header(),
        t0,
        d,
        frames: entries,
        curve: "curve.csv".into(),
    };
    let text = to_json(&manifest);
    io::write_file(&out_dir.join("manifest.json"), &text)?;
    Ok(text)
}

#[derive(Debug, Serialize)]
struct MatrixOutput {
    header: Header,
    inputs: Vec<String>,
    distances: Vec<Vec<f64>>,
}

pub fn distance_cmd(
    points: Vec<ConformalFactor>,
    names: &[PathBuf],
    json: bool,
    cfg: &RunConfig,
) -> CliResult<String> {
    let m = distance_matrix(&DensitySet::new(points)?)?;
    if json {
        return Ok(to_json(&MatrixOutput {
            header: cfg.header(),
            inputs: names.iter().map(|p| p.display().to_string()).collect(),
            distances: m,
        }));
    }
    let mut out = cfg.csv_header();
    out.push('\n');
    for row in m {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct MeanOutput {
    #[serde(flatten)]
    field: io::FieldOutput,
    iterations: usize,
    residual: f64,
}

pub fn mean_cmd(
    points: Vec<ConformalFactor>,
    weights: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
    cfg: &RunConfig,
) -> CliResult<String> {
    let set = match weights {
        Some(w) => DensitySet::weighted(points, w)?,
        None => DensitySet::new(points)?,
    };
    let res = karcher_mean(&set, tol, max_iter)?;
    Ok(to_json(&MeanOutput {
        field: field_output(&res.mean, cfg),
        iterations: res.iterations,
        residual: res.residual,
    }))
}

/// Samples the Cauchy geodesic at `frames` uniform times in `[0, t_end]`;
/// `t_end` defaults to one, clipped to 99% of the existence interval.
pub fn geodesic_cmd(
    u0: &ConformalFactor,
    v0: &calabi::TangentVector,
    frames: usize,
    t_end: Option<f64>,
    cfg: &RunConfig,
) -> CliResult<String> {
    if frames < 2 {
        return Err(CliError::Input(format!(
            "--frames must be at least 2, got {frames}"
        )));
    }
    let seg = geodesic_cauchy(u0, v0)?;
    let end = match t_end {
        Some(t) => t,
        None => 1.0f64.min(0.99 * seg.t_max()),
    };
    let rows = (0..frames)
        .map(|k| {
            let t = end * k as f64 / (frames - 1) as f64;
            Ok((t, seg.evaluate(t)?.values().to_vec()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(curve_csv(cfg, &rows))
}

pub fn exp_cmd(
    u0: &ConformalFactor,
    v0: &calabi::TangentVector,
    cfg: &RunConfig,
) -> CliResult<String> {
    Ok(to_json(&field_output(&exp_map(u0, v0)?, cfg)))
}

pub fn log_cmd(u0: &ConformalFactor, u1: &ConformalFactor, cfg: &RunConfig) -> CliResult<String> {
    Ok(to_json(&TangentFile {
        header: Some(cfg.header()),
        v: log_map(u0, u1)?.into_values(),
    }))
}

#[derive(Debug, Serialize)]
struct JacobiOutput {
    header: Header,
    #[serde(flatten)]
    report: calabi::ConjugateReport,
}

pub fn jacobi_cmd(
    u0: &ConformalFactor,
    v0: &calabi::TangentVector,
    cfg: &RunConfig,
) -> CliResult<String> {
    let report = conjugate_point_scan(&geodesic_cauchy(u0, v0)?)?;
    Ok(to_json(&JacobiOutput {
        header: cfg.header(),
        report,
    }))
}

/// Diameter and boundary sequences from the uniform point of the domain.
pub fn sequences_cmd(
    domain: std::sync::Arc<calabi::QuadratureDomain>,
    k_max: u32,
    cfg: &RunConfig,
) -> CliResult<String> {
    let u = ConformalFactor::zero(domain);
    let dia = diameter_sequence(&u, k_max)?;
    let bnd = boundary_sequence(&u, k_max)?;
    let mut out = cfg.csv_header();
    out.push_str("\nk,diameter,boundary\n");
    for ((k, d), (_, b)) in dia.iter().zip(&bnd) {
        out.push_str(&format!("{k},{d},{b}\n"));
    }
    Ok(out)
}

/// Quadratic geodesic of the gradient metric sampled at `frames` uniform
/// times in `[0, t_end]`.
pub fn grid_geodesic_cmd(
    potential: &Path,
    velocity: &Path,
    frames: usize,
    t_end: f64,
    cfg: &RunConfig,
) -> CliResult<String> {
    if frames < 2 {
        return Err(CliError::Input(format!(
            "--frames must be at least 2, got {frames}"
        )));
    }
    let phi = io::load_grid_potential(potential)?;
    let psi = io::load_grid_tangent(velocity, &phi)?;
    let (lo, hi) = admissible_times(&phi, &psi)?;
    if !(t_end > lo && t_end < hi) {
        return Err(CliError::Input(format!(
            "--t-end {t_end} leaves the admissible interval ({lo}, {hi})"
        )));
    }
    let rows = (0..frames)
        .map(|k| {
            let t = t_end * k as f64 / (frames - 1) as f64;
            Ok((t, gradient_geodesic(&phi, &psi, t)?.values().to_vec()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(curve_csv(cfg, &rows))
}
