//! Plain-text experiment configuration and the serialization formats of the
//! benchmark CLI: snapshot CSVs, run-report JSON, table CSVs, and the run
//! manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use fvlim_core::bench::{ConvergenceRow, ExperimentPlan, Problem, TimingRow, ViolationRow};
use fvlim_core::diagnostics::RunReport;
use fvlim_core::flux::{AlphaMode, FluxReconstruction};
use fvlim_core::limiter_aposteriori::FallbackLimiterKind;
use fvlim_core::limiter_apriori::NodeSet;
use fvlim_core::mesh::{CellField, Dim};
use fvlim_core::solver::{SchemeConfig, SchemeName, Snapshot};
use fvlim_core::timestepping::ButcherTableau;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("config key `{key}`: {message}")]
    Key { key: String, message: String },
    #[error(transparent)]
    Core(#[from] fvlim_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn key_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Key {
        key: key.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Flat key-value configuration
// ---------------------------------------------------------------------------

/// A parsed experiment configuration. Every knob of the scheme matrix is one
/// key; list-valued keys (comma separated) turn the document into a plan
/// over the cross product.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigDoc {
    pub problem: Option<Problem>,
    pub dims: Option<Dim>,
    pub schemes: Vec<SchemeName>,
    pub degrees: Vec<usize>,
    pub integrators: Vec<String>,
    pub resolutions: Vec<usize>,
    pub t_end: Option<f64>,
    pub cfl: Option<f64>,
    pub adaptive: Option<bool>,
    pub flux_reconstruction: Option<FluxReconstruction>,
    pub theta_set: Option<NodeSet>,
    pub fallback: Option<FallbackLimiterKind>,
    pub blending: Option<bool>,
    pub sed: Option<bool>,
    pub sed_skip_bounds: Option<bool>,
    pub alpha: Option<AlphaMode>,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(key_err(key, format!("expected a boolean, got `{v}`"))),
    }
}

impl ConfigDoc {
    /// Parses whitespace/newline separated `key=value` tokens. Lines
    /// starting with `#` are comments. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<ConfigDoc> {
        let mut doc = ConfigDoc::default();
        let mut seen_any = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for token in line.split_whitespace() {
                seen_any = true;
                let (key, value) = token.split_once('=').ok_or_else(|| {
                    CliError::Config(format!(
                        "line {}: expected key=value, got `{token}`",
                        lineno + 1
                    ))
                })?;
                doc.apply(key, value)?;
            }
        }
        if !seen_any {
            return Err(CliError::Config("empty configuration".into()));
        }
        doc.check_consistency()?;
        Ok(doc)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => {
                self.problem = Some(
                    Problem::parse(value)
                        .ok_or_else(|| key_err(key, format!("unknown problem `{value}`")))?,
                );
            }
            "dims" => {
                self.dims = Some(match value {
                    "1" => Dim::One,
                    "2" => Dim::Two,
                    _ => return Err(key_err(key, format!("expected 1 or 2, got `{value}`"))),
                });
            }
            "scheme" => {
                for v in value.split(',') {
                    self.schemes.push(
                        SchemeName::parse(v)
                            .ok_or_else(|| key_err(key, format!("unknown scheme `{v}`")))?,
                    );
                }
            }
            "p" => {
                for v in value.split(',') {
                    let p: usize = v
                        .parse()
                        .map_err(|_| key_err(key, format!("expected an integer, got `{v}`")))?;
                    self.degrees.push(p);
                }
            }
            "integrator" => {
                for v in value.split(',') {
                    let t = ButcherTableau::by_name(v)
                        .ok_or_else(|| key_err(key, format!("unknown integrator `{v}`")))?;
                    self.integrators.push(t.name.to_string());
                }
            }
            "N" | "n" => {
                for v in value.split(',') {
                    let n: usize = v
                        .parse()
                        .map_err(|_| key_err(key, format!("expected an integer, got `{v}`")))?;
                    self.resolutions.push(n);
                }
            }
            "t_end" => {
                self.t_end = Some(
                    value
                        .parse()
                        .map_err(|_| key_err(key, format!("expected a number, got `{value}`")))?,
                );
            }
            "C" | "cfl" => {
                self.cfl = Some(
                    value
                        .parse()
                        .map_err(|_| key_err(key, format!("expected a number, got `{value}`")))?,
                );
            }
            "adaptive" => self.adaptive = Some(parse_bool(key, value)?),
            "flux" => {
                self.flux_reconstruction = Some(match value {
                    "gauss_legendre" | "gl" => FluxReconstruction::GaussLegendre,
                    "transverse" => FluxReconstruction::Transverse,
                    _ => {
                        return Err(key_err(
                            key,
                            format!("expected gauss_legendre or transverse, got `{value}`"),
                        ))
                    }
                });
            }
            "theta_set" => {
                self.theta_set = Some(match value {
                    "centroid" => NodeSet::Centroid,
                    "gauss_lobatto" => NodeSet::GaussLobatto,
                    _ => {
                        return Err(key_err(
                            key,
                            format!("expected centroid or gauss_lobatto, got `{value}`"),
                        ))
                    }
                });
            }
            "fallback" => {
                self.fallback = Some(
                    FallbackLimiterKind::parse(value)
                        .ok_or_else(|| key_err(key, format!("unknown fallback `{value}`")))?,
                );
            }
            "blending" => self.blending = Some(parse_bool(key, value)?),
            "sed" => self.sed = Some(parse_bool(key, value)?),
            "sed_skip_bounds" => self.sed_skip_bounds = Some(parse_bool(key, value)?),
            "alpha" => {
                self.alpha = Some(match value {
                    "local" => AlphaMode::Local,
                    "global" => AlphaMode::Global,
                    _ => return Err(key_err(key, format!("expected local or global, got `{value}`"))),
                });
            }
            _ => return Err(key_err(key, "unknown key")),
        }
        Ok(())
    }

    fn check_consistency(&self) -> Result<()> {
        if let (Some(problem), Some(dims)) = (self.problem, self.dims) {
            if problem.dim() != dims {
                return Err(key_err(
                    "dims",
                    format!("problem {} is {}-dimensional", problem.name(), problem.dim().as_usize()),
                ));
            }
        }
        Ok(())
    }

    /// Dimensionality from the problem or the explicit `dims` key.
    pub fn effective_dim(&self) -> Result<Dim> {
        self.problem
            .map(|p| p.dim())
            .or(self.dims)
            .ok_or_else(|| CliError::Config("missing required key: problem (or dims)".into()))
    }

    /// A document with single-valued lists describes one run.
    pub fn is_single_run(&self) -> bool {
        self.schemes.len() == 1
            && self.degrees.len() == 1
            && self.resolutions.len() == 1
            && self.integrators.len() <= 1
    }

    /// Builds the scheme configuration for one (scheme, p, integrator)
    /// choice: named-scheme defaults first, explicit keys on top.
    pub fn scheme_config(
        &self,
        scheme: SchemeName,
        p: usize,
        integrator: &ButcherTableau,
    ) -> Result<SchemeConfig> {
        let dim = self.effective_dim()?;
        let mut cfg = SchemeConfig::named(scheme, p, dim, integrator.clone());
        if let Some(c) = self.cfl {
            cfg.cfl = c;
        }
        if let Some(a) = self.adaptive {
            cfg.adaptive_dt = a;
        }
        if let Some(f) = self.flux_reconstruction {
            cfg.flux_reconstruction = f;
        }
        if let Some(t) = self.theta_set {
            cfg.theta_node_set = t;
        }
        if let Some(f) = self.fallback {
            cfg.fallback_limiter = f;
        }
        if let Some(b) = self.blending {
            cfg.blending = b;
        }
        if let Some(s) = self.sed {
            cfg.sed = s;
        }
        if let Some(s) = self.sed_skip_bounds {
            cfg.sed_skip_bounds_check = s;
        }
        if let Some(a) = self.alpha {
            cfg.alpha_mode = a;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates every (scheme, p, integrator) combination in the document.
    pub fn validate_schemes(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(CliError::Config("missing required key: scheme".into()));
        }
        if self.degrees.is_empty() {
            return Err(CliError::Config("missing required key: p".into()));
        }
        let integrators = self.tableaus()?;
        for &scheme in &self.schemes {
            for &p in &self.degrees {
                for t in &integrators {
                    self.scheme_config(scheme, p, t)?;
                }
            }
        }
        Ok(())
    }

    pub fn tableaus(&self) -> Result<Vec<ButcherTableau>> {
        if self.integrators.is_empty() {
            // degree-matched default
            Ok(self
                .degrees
                .iter()
                .map(|&p| fvlim_core::bench::convergence_integrator(p))
                .collect())
        } else {
            Ok(self
                .integrators
                .iter()
                .map(|n| ButcherTableau::by_name(n).expect("validated at parse"))
                .collect())
        }
    }

    pub fn to_plan(&self) -> Result<ExperimentPlan> {
        let problem = self
            .problem
            .ok_or_else(|| CliError::Config("missing required key: problem".into()))?;
        let plan = ExperimentPlan {
            problem,
            schemes: self.schemes.clone(),
            degrees: self.degrees.clone(),
            integrators: self.integrators.clone(),
            resolutions: self.resolutions.clone(),
            t_end: self.t_end.unwrap_or(1.0),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Renders the document back to key=value text; `parse(render(x)) == x`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let join = |xs: &[String]| xs.join(",");
        if let Some(p) = self.problem {
            let _ = writeln!(out, "problem={}", p.name());
        }
        if let Some(d) = self.dims {
            let _ = writeln!(out, "dims={}", d.as_usize());
        }
        if !self.schemes.is_empty() {
            let names: Vec<String> = self.schemes.iter().map(|s| s.as_str().into()).collect();
            let _ = writeln!(out, "scheme={}", join(&names));
        }
        if !self.degrees.is_empty() {
            let ds: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "p={}", join(&ds));
        }
        if !self.integrators.is_empty() {
            let _ = writeln!(out, "integrator={}", join(&self.integrators));
        }
        if !self.resolutions.is_empty() {
            let ns: Vec<String> = self.resolutions.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(out, "N={}", join(&ns));
        }
        if let Some(t) = self.t_end {
            let _ = writeln!(out, "t_end={t}");
        }
        if let Some(c) = self.cfl {
            let _ = writeln!(out, "C={c}");
        }
        if let Some(a) = self.adaptive {
            let _ = writeln!(out, "adaptive={a}");
        }
        if let Some(f) = self.flux_reconstruction {
            let name = match f {
                FluxReconstruction::GaussLegendre => "gauss_legendre",
                FluxReconstruction::Transverse => "transverse",
            };
            let _ = writeln!(out, "flux={name}");
        }
        if let Some(t) = self.theta_set {
            let name = match t {
                NodeSet::Centroid => "centroid",
                NodeSet::GaussLobatto => "gauss_lobatto",
            };
            let _ = writeln!(out, "theta_set={name}");
        }
        if let Some(f) = self.fallback {
            let _ = writeln!(out, "fallback={}", f.name());
        }
        if let Some(b) = self.blending {
            let _ = writeln!(out, "blending={b}");
        }
        if let Some(s) = self.sed {
            let _ = writeln!(out, "sed={s}");
        }
        if let Some(s) = self.sed_skip_bounds {
            let _ = writeln!(out, "sed_skip_bounds={s}");
        }
        if let Some(a) = self.alpha {
            let name = match a {
                AlphaMode::Local => "local",
                AlphaMode::Global => "global",
            };
            let _ = writeln!(out, "alpha={name}");
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Serialization: snapshots, reports, tables, manifest
// ---------------------------------------------------------------------------

/// Field snapshot as CSV. Numbers use the shortest representation that
/// round-trips a 64-bit float exactly. 1D columns: `i,x_center,u`; 2D
/// columns: `i,j,x_center,y_center,u`, rows in i-major order.
pub fn write_snapshot_csv(field: &CellField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut out = String::new();
    match grid.dim() {
        Dim::One => {
            out.push_str("i,x_center,u\n");
            for i in 0..grid.n() {
                let _ = writeln!(out, "{i},{},{}", grid.center(i), field.get1(i as isize));
            }
        }
        Dim::Two => {
            out.push_str("i,j,x_center,y_center,u\n");
            for i in 0..grid.n() {
                for j in 0..grid.n() {
                    let _ = writeln!(
                        out,
                        "{i},{j},{},{},{}",
                        grid.center(i),
                        grid.center(j),
                        field.get2(i as isize, j as isize)
                    );
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads back the `u` column of a snapshot CSV (row order is canonical).
pub fn read_snapshot_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for line in text.lines().skip(1) {
        let u = line
            .rsplit(',')
            .next()
            .ok_or_else(|| CliError::Config(format!("malformed snapshot row `{line}`")))?;
        values.push(
            u.parse()
                .map_err(|_| CliError::Config(format!("bad float `{u}`")))?,
        );
    }
    Ok(values)
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    scheme: &'a str,
    p: usize,
    #[serde(rename = "N")]
    n: usize,
    integrator: &'a str,
    t_end: f64,
    delta_minus: f64,
    delta_plus: f64,
    delta: f64,
    e1: Option<f64>,
    mass_initial: f64,
    mass_final: f64,
    steps: usize,
    retries: u64,
    cells_per_stage_per_second: Option<f64>,
}

/// Run diagnostics as JSON.
pub fn write_report_json(report: &RunReport, path: &Path) -> Result<()> {
    let doc = ReportJson {
        scheme: &report.scheme,
        p: report.p,
        n: report.n,
        integrator: &report.integrator,
        t_end: report.t_end,
        delta_minus: report.delta_minus,
        delta_plus: report.delta_plus,
        delta: report.delta,
        e1: report.e1,
        mass_initial: report.mass_initial,
        mass_final: report.mass_final,
        steps: report.steps,
        retries: report.retries,
        cells_per_stage_per_second: report.cells_per_stage_per_second,
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn write_violation_csv(rows: &[ViolationRow], path: &Path) -> Result<()> {
    let mut out = String::from("problem,scheme,p,integrator,N,delta_minus,delta_plus,delta,approximately_mpp\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.problem,
            r.scheme,
            r.p,
            r.integrator,
            r.n,
            r.report.delta_minus,
            r.report.delta_plus,
            r.report.delta,
            r.passes_mpp()
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    let mut out =
        String::from("p,integrator,N,C,e1_gauss_legendre,eoc_gauss_legendre,e1_transverse,eoc_transverse\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.p,
            r.integrator,
            r.n,
            r.cfl,
            r.e1_gauss_legendre,
            opt(r.eoc_gauss_legendre),
            r.e1_transverse,
            opt(r.eoc_transverse)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_timing_csv(rows: &[TimingRow], path: &Path) -> Result<()> {
    let mut out = String::from("scheme,p,N,integrator,cells_per_stage_per_second\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.scheme, r.p, r.n, r.integrator, r.cells_per_stage_per_second
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Stability track samples, one file per (method, degree):
/// columns `k,re_z,im_z,abs_r`.
pub fn write_stability_csv(
    tableau: &ButcherTableau,
    p: usize,
    samples: usize,
    path: &Path,
) -> Result<()> {
    let mut out = String::from("k,re_z,im_z,abs_r\n");
    for (k, z) in fvlim_core::timestepping::eigenvalue_track(p, 1.0, samples) {
        let r = fvlim_core::timestepping::stability_function(tableau, z).norm();
        let _ = writeln!(out, "{k},{},{},{r}", z.re, z.im);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Machine-readable record of one CLI invocation.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: String,
    pub version: &'static str,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(config: String) -> Self {
        RunManifest {
            config,
            version: env!("CARGO_PKG_VERSION"),
            started: chrono::Utc::now().to_rfc3339(),
            finished: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.finished = chrono::Utc::now().to_rfc3339();
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self)?)?;
        Ok(())
    }
}

/// Output directory resolution: explicit flag, else `FVLIM_OUT_DIR`,
/// else `./out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("FVLIM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes one run's outputs (report, snapshots, final state) into `dir`,
/// returning the written paths.
pub fn write_run_outputs(
    dir: &Path,
    tag: &str,
    report: &RunReport,
    snapshots: &[Snapshot],
    final_state: &CellField,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report_path = dir.join(format!("{tag}_report.json"));
    write_report_json(report, &report_path)?;
    written.push(report_path);
    for snap in snapshots {
        let path = dir.join(format!("{tag}_t{}.csv", snap.time));
        write_snapshot_csv(&snap.field, &path)?;
        written.push(path);
    }
    let final_path = dir.join(format!("{tag}_final.csv"));
    write_snapshot_csv(final_state, &final_path)?;
    written.push(final_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fvlim_core::mesh::Grid;

    #[test]
    fn parses_the_scheme_matrix_row() {
        let doc = ConfigDoc::parse(
            "scheme=aPrioriMPP p=3 dims=2 integrator=SSPRK3 problem=square_2d N=64 t_end=1",
        )
        .unwrap();
        assert!(doc.is_single_run());
        assert_eq!(doc.schemes, vec![SchemeName::APrioriMpp]);
        let cfg = doc
            .scheme_config(SchemeName::APrioriMpp, 3, &ButcherTableau::ssprk3())
            .unwrap();
        // Table-row defaults: Gauss-Legendre fluxes, centroid set, adaptive
        assert_eq!(cfg.flux_reconstruction, FluxReconstruction::GaussLegendre);
        assert_eq!(cfg.theta_node_set, NodeSet::Centroid);
        assert!(cfg.adaptive_dt);
        assert_eq!(cfg.cfl, 0.8);
    }

    #[test]
    fn rejects_pp_fallback_in_1d() {
        let doc = ConfigDoc::parse("scheme=aPosteriori fallback=pp dims=1 p=2 N=32").unwrap();
        let err = doc.validate_schemes().unwrap_err();
        assert!(err.to_string().contains("PP"), "{err}");
    }

    #[test]
    fn rejects_empty_and_unknown() {
        assert!(ConfigDoc::parse("").is_err());
        assert!(ConfigDoc::parse("   \n# comment only\n").is_err());
        let err = ConfigDoc::parse("schem=aPrioriMPP").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        let err = ConfigDoc::parse("dims=3").unwrap_err();
        assert!(err.to_string().contains("dims"), "{err}");
    }

    #[test]
    fn render_parse_round_trip() {
        let doc = ConfigDoc::parse(
            "problem=square_2d scheme=aPosterioriB,aPrioriMPP p=2,3 integrator=SSPRK3,RK4 N=32,64 t_end=2 C=0.4 blending=true alpha=global",
        )
        .unwrap();
        let again = ConfigDoc::parse(&doc.render()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn snapshot_csv_matches_the_1d_format_example() {
        let grid = Grid::new_1d(2, (0.0, 1.0), 0).unwrap();
        let f = CellField::from_interior_1d(grid, &[0.5, 1.5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot_csv(&f, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "i,x_center,u\n0,0.25,0.5\n1,0.75,1.5\n");
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let grid = Grid::new_2d(2, (0.0, 1.0), 0).unwrap();
        let vals = [0.1 + 0.2, std::f64::consts::PI, -1.0 / 3.0, 5e-324];
        let f = CellField::from_interior_2d(grid, &vals).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot_csv(&f, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // 4 data rows in i-major order
        assert_eq!(text.lines().count(), 5);
        let back = read_snapshot_values(&path).unwrap();
        assert_eq!(back, vals.to_vec());
    }

    #[test]
    fn report_json_nullable_fields() {
        let report = RunReport {
            scheme: "unlimited".into(),
            p: 2,
            n: 16,
            integrator: "SSPRK3".into(),
            t_end: 1.0,
            delta_minus: 0.0,
            delta_plus: 0.0,
            delta: 0.0,
            e1: None,
            mass_initial: 1.0,
            mass_final: 1.0,
            steps: 10,
            retries: 0,
            cells_per_stage_per_second: Some(1e6),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report_json(&report, &path).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert!(value["e1"].is_null());
        assert_eq!(value["N"], 16);
        assert_eq!(value["cells_per_stage_per_second"], 1e6);
    }
}
