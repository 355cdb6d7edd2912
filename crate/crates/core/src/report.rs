//! Commands behind the `evcharge` binary: scenario evaluation, the four
//! approximation-error tables, success-probability sweeps over `M`, and
//! simulation runs, written as CSV or JSON.
//!
//! CSV headers are fixed:
//!
//! | command    | header |
//! |------------|--------|
//! | `eval`     | `method,E_Z,E_Q,P_s,RE_E_Z_pct,RE_P_s_pct,error` |
//! | `tables`   | `table,lambda_mult,K,max_rel_error_pct,argmax_M` |
//! | `sweep`    | `M,M_over_K,exact,upper,lower_erlang_a,lower_full_lot,modified_lower,fluid_modified,diffusion_overloaded` |
//! | `simulate` | `E_Q,E_Z,P_s,P_block,hw_E_Q,hw_E_Z,hw_P_s,hw_P_block,var_Q,var_Z,cov_ZQ,reps` |
//! | `converge` | `n,statistic,limit,error` |
//!
//! Floats are printed with six significant digits; missing values are
//! empty cells.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{expected_occupancy, full_lot_mean_at, success_bounds};
use crate::diffusion::{overloaded_mean_approx, smallnu_approx, OccupancyBasis};
use crate::error::{Error, Result, ValidationError};
use crate::exact::{exact_metrics, relative_error};
use crate::fluid::{fluid_fixed_point, fluid_success_prob, modified_fluid_fixed_point};
use crate::params::{ModelParams, Spaces};
use crate::sim::{simulate_model, ConvergenceRow, SimConfig, SimEstimate};

/// Directory used for output files when no explicit path is given.
pub const OUT_DIR_ENV: &str = "EVCHARGE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Bounds,
    Fluid,
    FluidModified,
    DiffusionOverloaded,
    DiffusionSmallnu,
    Simulate,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Exact,
        Method::Bounds,
        Method::Fluid,
        Method::FluidModified,
        Method::DiffusionOverloaded,
        Method::DiffusionSmallnu,
        Method::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Bounds => "bounds",
            Method::Fluid => "fluid",
            Method::FluidModified => "fluid_modified",
            Method::DiffusionOverloaded => "diffusion_overloaded",
            Method::DiffusionSmallnu => "diffusion_smallnu",
            Method::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| ValidationError::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ValidationError::Config(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A JSON-configurable evaluation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: ModelParams,
    #[serde(default)]
    pub methods: Vec<Method>,
    /// Settings for the `simulate` method.
    #[serde(default)]
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(ValidationError::Config("select at least one method".into()).into());
        }
        self.params.validate()?;
        if let Some(cfg) = &self.simulation {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// Parameter values given on the command line; they win over a config file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamOverrides {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub k: Option<Spaces>,
    pub m: Option<f64>,
}

impl ParamOverrides {
    /// Merges onto `base`. Without a base, `lambda`, `K` and `M` are
    /// required and `mu`, `nu` default to 1.
    pub fn apply(&self, base: Option<ModelParams>) -> Result<ModelParams> {
        let missing = |name: &str| ValidationError::Config(format!("missing parameter --{name}"));
        let p = match base {
            Some(b) => ModelParams {
                lambda: self.lambda.unwrap_or(b.lambda),
                mu: self.mu.unwrap_or(b.mu),
                nu: self.nu.unwrap_or(b.nu),
                k: self.k.unwrap_or(b.k),
                m: self.m.unwrap_or(b.m),
            },
            None => ModelParams {
                lambda: self.lambda.ok_or_else(|| missing("lambda"))?,
                mu: self.mu.unwrap_or(1.0),
                nu: self.nu.unwrap_or(1.0),
                k: self.k.ok_or_else(|| missing("K"))?,
                m: self.m.ok_or_else(|| missing("M"))?,
            },
        };
        Ok(p.validate()?)
    }
}

/// Default settings for the `simulate` method.
pub fn default_sim_config() -> SimConfig {
    SimConfig::new(2e4, 1e3, 20, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub method: String,
    pub e_z: Option<f64>,
    pub e_q: Option<f64>,
    pub p_success: Option<f64>,
    /// Percent relative errors against the exact row, when present.
    pub re_e_z: Option<f64>,
    pub re_p_success: Option<f64>,
    pub error: Option<String>,
}

impl EvalRow {
    fn values(method: &str, e_z: Option<f64>, e_q: Option<f64>, p_success: Option<f64>) -> Self {
        EvalRow { method: method.to_string(), e_z, e_q, p_success, re_e_z: None, re_p_success: None, error: None }
    }
}

fn eval_method(method: Method, p: &ModelParams, sim: &SimConfig) -> Result<Vec<EvalRow>> {
    let name = method.name();
    Ok(match method {
        Method::Exact => {
            let m = exact_metrics(p)?;
            vec![EvalRow::values(name, Some(m.e_z), Some(m.e_q), m.p_success)]
        }
        Method::Bounds => {
            let b = success_bounds(p)?;
            [
                ("bounds_upper", b.upper),
                ("bounds_lower_erlang_a", b.lower_erlang_a),
                ("bounds_lower_full_lot", b.lower_full_lot),
                ("bounds_modified_lower", b.modified_lower),
            ]
            .into_iter()
            .map(|(n, v)| EvalRow::values(n, None, None, Some(v)))
            .collect()
        }
        Method::Fluid | Method::FluidModified => {
            let r = if method == Method::Fluid { fluid_fixed_point(p)? } else { modified_fluid_fixed_point(p)? };
            vec![EvalRow::values(name, Some(r.z_star), None, Some(fluid_success_prob(&r, p)?))]
        }
        Method::DiffusionOverloaded => {
            let e_z = overloaded_mean_approx(p, OccupancyBasis::Expected)?;
            let e_q = expected_occupancy(p)?;
            vec![EvalRow::values(name, Some(e_z), Some(e_q), Some(1.0 - e_z / e_q))]
        }
        Method::DiffusionSmallnu => {
            let a = smallnu_approx(p)?;
            vec![EvalRow::values(name, Some(a.e_z), Some(a.e_q), Some(1.0 - a.e_z / a.e_q))]
        }
        Method::Simulate => {
            let e = simulate_model(p, sim)?;
            vec![EvalRow::values(name, Some(e.e_z), Some(e.e_q), e.p_success)]
        }
    })
}

/// One row per method (four for `bounds`). Methods that fail get a row with
/// the error text; the call fails only when every method fails.
pub fn cmd_eval(scenario: &Scenario) -> Result<Vec<EvalRow>> {
    scenario.validate()?;
    let sim = scenario.simulation.unwrap_or_else(default_sim_config);
    let mut methods = scenario.methods.clone();
    let mut seen = std::collections::HashSet::new();
    methods.retain(|m| seen.insert(*m));

    let mut rows = Vec::new();
    let mut first_error = None;
    let mut successes = 0;
    for &m in &methods {
        match eval_method(m, &scenario.params, &sim) {
            Ok(r) => {
                successes += 1;
                rows.extend(r);
            }
            Err(e) => {
                rows.push(EvalRow { error: Some(e.to_string()), ..EvalRow::values(m.name(), None, None, None) });
                first_error.get_or_insert(e);
            }
        }
    }
    if successes == 0 {
        return Err(first_error.expect("at least one method"));
    }
    if let Some(exact) = rows.iter().find(|r| r.method == "exact").cloned() {
        for r in rows.iter_mut().filter(|r| r.method != "exact") {
            r.re_e_z = match (exact.e_z, r.e_z) {
                (Some(x), Some(a)) => relative_error(x, a).ok(),
                _ => None,
            };
            r.re_p_success = match (exact.p_success, r.p_success) {
                (Some(x), Some(a)) => relative_error(x, a).ok(),
                _ => None,
            };
        }
    }
    Ok(rows)
}

/// Lot sizes of the error tables.
pub const TABLE_KS: [u32; 5] = [10, 20, 30, 40, 50];

/// Arrival-rate multipliers `lambda / K` of each table's rows.
pub fn table_lambda_mults(id: u8) -> Result<&'static [f64]> {
    match id {
        1 => Ok(&[1.0, 1.2]),
        2..=4 => Ok(&[0.8, 1.0, 1.2]),
        other => Err(ValidationError::Config(format!("unknown table id {other} (expected 1-4)")).into()),
    }
}

/// Power levels the table maximum runs over: `M = jK/10` for `j = 2..=10`.
pub fn table_m_grid(k: u32) -> Vec<f64> {
    (2..=10).map(|j| j as f64 * k as f64 / 10.0).collect()
}

/// Approximate `E[Z]` compared in table `id`: original fluid, modified
/// fluid, full lot at the expected occupancy, overloaded diffusion.
pub fn table_approximation(id: u8, p: &ModelParams) -> Result<f64> {
    match id {
        1 => Ok(fluid_fixed_point(p)?.z_star),
        2 => Ok(modified_fluid_fixed_point(p)?.z_star),
        3 => {
            let k = p.finite_k("the full-lot table")?;
            full_lot_mean_at(expected_occupancy(p)?, k, p.mu, p.nu, p.m)
        }
        4 => overloaded_mean_approx(p, OccupancyBasis::Expected),
        other => Err(ValidationError::Config(format!("unknown table id {other} (expected 1-4)")).into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableCell {
    pub table: u8,
    pub lambda_mult: f64,
    pub k: u32,
    pub max_rel_error_pct: f64,
    pub argmax_m: f64,
}

/// Largest percent relative error of `E[Z]` over [`table_m_grid`], with
/// `nu = mu = 1`.
pub fn table_cell(id: u8, lambda_mult: f64, k: u32) -> Result<TableCell> {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for m in table_m_grid(k) {
        let p = ModelParams::new(lambda_mult * k as f64, 1.0, 1.0, k, m)?;
        let exact = exact_metrics(&p)?.e_z;
        let err = relative_error(exact, table_approximation(id, &p)?)?;
        if err > best.0 {
            best = (err, m);
        }
    }
    Ok(TableCell { table: id, lambda_mult, k, max_rel_error_pct: best.0, argmax_m: best.1 })
}

/// All cells of table `id`, row by row.
pub fn cmd_tables(id: u8) -> Result<Vec<TableCell>> {
    let cells: Vec<(f64, u32)> =
        table_lambda_mults(id)?.iter().flat_map(|&l| TABLE_KS.iter().map(move |&k| (l, k))).collect();
    cells.par_iter().map(|&(l, k)| table_cell(id, l, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: f64,
    pub m_over_k: f64,
    pub exact: Option<f64>,
    pub upper: f64,
    pub lower_erlang_a: f64,
    pub lower_full_lot: f64,
    pub modified_lower: f64,
    pub fluid_modified: f64,
    pub diffusion_overloaded: f64,
}

/// Success probability against `M` for `lambda = lambda_mult K`. The grid
/// defaults to `M = 1..=K`.
pub fn cmd_sweep(k: u32, lambda_mult: f64, nu: f64, mu: f64, grid: Option<&[f64]>) -> Result<Vec<SweepRow>> {
    let grid: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => (1..=k).map(f64::from).collect(),
    };
    grid.par_iter()
        .map(|&m| {
            let p = ModelParams::new(lambda_mult * k as f64, mu, nu, k, m)?;
            let bounds = success_bounds(&p)?;
            let fluid = modified_fluid_fixed_point(&p)?;
            let e_q = expected_occupancy(&p)?;
            let diffusion = 1.0 - overloaded_mean_approx(&p, OccupancyBasis::Expected)? / e_q;
            Ok(SweepRow {
                m,
                m_over_k: m / k as f64,
                exact: exact_metrics(&p)?.p_success,
                upper: bounds.upper,
                lower_erlang_a: bounds.lower_erlang_a,
                lower_full_lot: bounds.lower_full_lot,
                modified_lower: bounds.modified_lower,
                fluid_modified: fluid_success_prob(&fluid, &p)?,
                diffusion_overloaded: diffusion,
            })
        })
        .collect()
}

/// A row type with a fixed CSV layout.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Six significant digits; empty for `None`.
pub fn fmt_sig(x: Option<f64>) -> String {
    let Some(x) = x else { return String::new() };
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded = format!("{x:.5e}");
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return rounded;
    }
    // shortest round-trip form of the rounded value
    rounded.parse::<f64>().map(|r| r.to_string()).unwrap_or(rounded)
}

fn f(x: f64) -> String {
    fmt_sig(Some(x))
}

impl Record for EvalRow {
    const HEADER: &'static [&'static str] = &["method", "E_Z", "E_Q", "P_s", "RE_E_Z_pct", "RE_P_s_pct", "error"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            fmt_sig(self.e_z),
            fmt_sig(self.e_q),
            fmt_sig(self.p_success),
            fmt_sig(self.re_e_z),
            fmt_sig(self.re_p_success),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl Record for TableCell {
    const HEADER: &'static [&'static str] = &["table", "lambda_mult", "K", "max_rel_error_pct", "argmax_M"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.table.to_string(),
            f(self.lambda_mult),
            self.k.to_string(),
            f(self.max_rel_error_pct),
            f(self.argmax_m),
        ]
    }
}

impl Record for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "M",
        "M_over_K",
        "exact",
        "upper",
        "lower_erlang_a",
        "lower_full_lot",
        "modified_lower",
        "fluid_modified",
        "diffusion_overloaded",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            f(self.m),
            f(self.m_over_k),
            fmt_sig(self.exact),
            f(self.upper),
            f(self.lower_erlang_a),
            f(self.lower_full_lot),
            f(self.modified_lower),
            f(self.fluid_modified),
            f(self.diffusion_overloaded),
        ]
    }
}

impl Record for SimEstimate {
    const HEADER: &'static [&'static str] = &[
        "E_Q",
        "E_Z",
        "P_s",
        "P_block",
        "hw_E_Q",
        "hw_E_Z",
        "hw_P_s",
        "hw_P_block",
        "var_Q",
        "var_Z",
        "cov_ZQ",
        "reps",
    ];
    fn fields(&self) -> Vec<String> {
        let h = &self.half_widths;
        vec![
            f(self.e_q),
            f(self.e_z),
            fmt_sig(self.p_success),
            f(self.p_block),
            f(h.e_q),
            f(h.e_z),
            f(h.p_success),
            f(h.p_block),
            f(self.var_q),
            f(self.var_z),
            f(self.cov_zq),
            self.reps_used.to_string(),
        ]
    }
}

impl Record for ConvergenceRow {
    const HEADER: &'static [&'static str] = &["n", "statistic", "limit", "error"];
    fn fields(&self) -> Vec<String> {
        vec![self.n.to_string(), f(self.statistic), f(self.limit), f(self.error)]
    }
}

pub fn write_records<R: Record>(rows: &[R], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(R::HEADER).map_err(csv_err)?;
            for r in rows {
                w.write_record(r.fields()).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// `explicit`, else `default_name` inside `$EVCHARGE_OUT_DIR`, else stdout.
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()).map(|d| PathBuf::from(d).join(default_name))
    })
}

/// Writes to `path` (creating parent directories) or to stdout.
pub fn emit<R: Record>(rows: &[R], format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut file = std::io::BufWriter::new(std::fs::File::create(p)?);
            write_records(rows, format, &mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write_records(rows, format, &mut std::io::stdout().lock()),
    }
}

/// 0 on success, 2 for bad input, 3 for numerical failures.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_validation() => 2,
        Err(Error::Json(_) | Error::Io(_)) => 2,
        Err(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(methods: Vec<Method>, p: ModelParams) -> Scenario {
        Scenario { params: p, methods, simulation: None, output: OutputSpec::default() }
    }

    #[test]
    fn eval_three_state() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1, 1.0).unwrap();
        let rows = cmd_eval(&scenario(vec![Method::Exact], p)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].p_success.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eval_relative_errors() {
        let p = ModelParams::new(10.0, 1.0, 1.0, 10, 5.0).unwrap();
        let rows = cmd_eval(&scenario(vec![Method::FluidModified, Method::Exact], p)).unwrap();
        let fluid = rows.iter().find(|r| r.method == "fluid_modified").unwrap();
        let exact = rows.iter().find(|r| r.method == "exact").unwrap();
        let re = fluid.re_e_z.unwrap();
        assert!((re - relative_error(exact.e_z.unwrap(), fluid.e_z.unwrap()).unwrap()).abs() < 1e-12);
        assert!(fluid.re_p_success.is_some());
    }

    #[test]
    fn eval_errors() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1, 1.0).unwrap();
        assert!(cmd_eval(&scenario(vec![], p)).unwrap_err().is_validation());
        // the small-nu method needs lambda > mu M; the row fails but exact survives
        let rows = cmd_eval(&scenario(vec![Method::Exact, Method::DiffusionSmallnu], p)).unwrap();
        assert!(rows[1].error.is_some());
        // every method infeasible on an unbounded lot
        let inf = p.with_unbounded_spaces();
        assert!(cmd_eval(&scenario(vec![Method::Exact, Method::Bounds], inf)).is_err());
    }

    #[test]
    fn bounds_rows_and_dedupe() {
        let p = ModelParams::new(8.0, 1.0, 1.0, 10, 3.0).unwrap();
        let rows = cmd_eval(&scenario(vec![Method::Bounds, Method::Bounds, Method::Fluid], p)).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].method, "bounds_upper");
        assert_eq!(rows[0].p_success, Some(0.5));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("fluid-modified".parse::<Method>().unwrap(), Method::FluidModified);
        assert_eq!("EXACT".parse::<Method>().unwrap(), Method::Exact);
        assert!("magic".parse::<Method>().is_err());
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn overrides() {
        let o = ParamOverrides { lambda: Some(2.0), k: Some(Spaces::Finite(4)), m: Some(1.5), ..Default::default() };
        let p = o.apply(None).unwrap();
        assert_eq!((p.mu, p.nu), (1.0, 1.0));
        let base = ModelParams::new(1.0, 3.0, 2.0, 9, 9.0).unwrap();
        let q = ParamOverrides { m: Some(2.0), ..Default::default() }.apply(Some(base)).unwrap();
        assert_eq!(q, base.with_power(2.0));
        assert!(ParamOverrides::default().apply(None).unwrap_err().is_validation());
    }

    #[test]
    fn sig_digits() {
        assert_eq!(fmt_sig(Some(39.656912345)), "39.6569");
        assert_eq!(fmt_sig(Some(0.5)), "0.5");
        assert_eq!(fmt_sig(Some(1234567.0)), "1234570");
        assert_eq!(fmt_sig(Some(0.000123456789)), "0.000123457");
        assert_eq!(fmt_sig(Some(1e-9)), "1.00000e-9");
        assert_eq!(fmt_sig(None), "");
        assert_eq!(fmt_sig(Some(2.0)), "2");
    }

    #[test]
    fn table_grid_and_ids() {
        assert_eq!(table_m_grid(10), vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        assert!(table_lambda_mults(5).is_err());
        assert_eq!(table_lambda_mults(1).unwrap().len(), 2);
    }

    #[test]
    fn sweep_columns() {
        let rows = cmd_sweep(10, 0.8, 1.0, 1.0, None).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert_eq!(r.upper, 0.5);
            for v in [r.exact.unwrap(), r.lower_erlang_a, r.lower_full_lot, r.modified_lower, r.fluid_modified] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let cell = TableCell { table: 1, lambda_mult: 1.0, k: 10, max_rel_error_pct: 39.656912, argmax_m: 2.0 };
        let mut buf = Vec::new();
        write_records(&[cell], Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "table,lambda_mult,K,max_rel_error_pct,argmax_M\n1,1,10,39.6569,2\n"
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(())), 0);
        assert_eq!(exit_code(&Err(ValidationError::NoSpaces.into())), 2);
        assert_eq!(exit_code(&Err(Error::Numerical { residual: 1.0, tolerance: 0.0 })), 3);
    }
}
