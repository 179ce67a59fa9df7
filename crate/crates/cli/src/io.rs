//! Loading inputs and writing outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use calabi::gradient::GridPotentialFile;
use calabi::{ConformalFactor, DensityFieldFile, DomainRef, QuadratureDomain, TangentVector};
use serde::{Deserialize, Serialize};

use crate::config::{Header, RunConfig};
use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn domain_from_file(path: &Path) -> CliResult<QuadratureDomain> {
    let file = parse(path, &read(path)?)?;
    QuadratureDomain::from_file(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `--domain` accepts either a node count (uniform domain of volume 1/4) or
/// a path to a domain JSON file.
pub fn domain_spec(spec: &str) -> CliResult<QuadratureDomain> {
    match spec.parse::<usize>() {
        Ok(n) => Ok(QuadratureDomain::normalized(n)?),
        Err(_) => domain_from_file(Path::new(spec)),
    }
}

fn finish_domain(d: QuadratureDomain, cfg: &RunConfig) -> Arc<QuadratureDomain> {
    if cfg.normalize {
        Arc::new(d.rescaled_to_normalized())
    } else {
        Arc::new(d)
    }
}

/// Domain for commands that take no density inputs.
pub fn load_domain(
    spec: Option<&str>,
    default: &str,
    cfg: &RunConfig,
) -> CliResult<Arc<QuadratureDomain>> {
    Ok(finish_domain(domain_spec(spec.unwrap_or(default))?, cfg))
}

/// Loads density files onto one shared domain. `--domain` overrides the
/// files' own domain references; otherwise every file must resolve to the
/// same domain.
pub fn load_points(
    paths: &[PathBuf],
    domain: Option<&str>,
    cfg: &RunConfig,
) -> CliResult<Vec<ConformalFactor>> {
    if paths.is_empty() {
        return Err(CliError::Input(
            "at least one density file is required".into(),
        ));
    }
    let mut files = Vec::with_capacity(paths.len());
    let mut resolved: Option<QuadratureDomain> = match domain {
        Some(spec) => Some(domain_spec(spec)?),
        None => None,
    };
    for path in paths {
        let file: DensityFieldFile = parse(path, &read(path)?)?;
        if domain.is_none() {
            let d = match &file.domain {
                DomainRef::Inline(inline) => QuadratureDomain::from_file(inline.clone())
                    .map_err(|e| CliError::Input(format!("{}: domain: {e}", path.display())))?,
                DomainRef::Path(rel) => {
                    let base = path.parent().unwrap_or(Path::new("."));
                    domain_from_file(&base.join(rel))?
                }
            };
            match &resolved {
                None => resolved = Some(d),
                Some(prev) if *prev != d => {
                    return Err(CliError::Input(format!(
                        "{}: domain differs from the first input's domain",
                        path.display()
                    )))
                }
                Some(_) => {}
            }
        }
        files.push(file);
    }
    let shared = finish_domain(resolved.expect("at least one input"), cfg);
    files
        .into_iter()
        .zip(paths)
        .map(|(f, p)| {
            f.into_point(shared.clone(), cfg.constraint_eps)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Tangent vector file: `{ "v": [..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    pub v: Vec<f64>,
}

pub fn load_tangent(
    path: &Path,
    base: &ConformalFactor,
    cfg: &RunConfig,
) -> CliResult<TangentVector> {
    let file: TangentFile = parse(path, &read(path)?)?;
    TangentVector::with_tolerance(base, file.v, cfg.constraint_eps)
        .map_err(|e| CliError::Input(format!("{}: field \"v\": {e}", path.display())))
}

pub fn load_grid_potential(path: &Path) -> CliResult<calabi::GridPotential> {
    let file: GridPotentialFile = parse(path, &read(path)?)?;
    file.into_potential()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Grid tangent file: `{ "psi": [..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridTangentFile {
    pub psi: Vec<f64>,
}

pub fn load_grid_tangent(
    path: &Path,
    phi: &calabi::GridPotential,
) -> CliResult<calabi::GridTangent> {
    let file: GridTangentFile = parse(path, &read(path)?)?;
    calabi::GridTangent::new(phi, file.psi)
        .map_err(|e| CliError::Input(format!("{}: field \"psi\": {e}", path.display())))
}

/// Density field output with a header: the mean and exp commands emit this.
#[derive(Debug, Clone, Serialize)]
pub struct FieldOutput {
    pub header: Header,
    #[serde(flatten)]
    pub field: DensityFieldFile,
}

pub fn field_output(u: &ConformalFactor, cfg: &RunConfig) -> FieldOutput {
    FieldOutput {
        header: cfg.header(),
        field: u.to_field_file(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Joins floats with commas using the shortest round-trip representation.
pub fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
