use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use crate::config::SimConfig;
use crate::output::write_atomic;
use crate::simulate::run_simulate;
use crate::CliError;

pub const MAX_CELLS: usize = 10_000;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParameter {
    /// Dotted path into the base config, e.g. `damping.amplitude`.
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Either an inline configuration or a path to one.
    pub base: Value,
    pub parameters: Vec<SweepParameter>,
    #[serde(default)]
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub index: usize,
    pub params: Vec<f64>,
    pub status: String,
    pub final_h1_distance: Option<f64>,
    pub total_dissipation: Option<f64>,
    pub tail_last: Option<f64>,
    pub error: Option<String>,
}

fn set_path(root: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("parameters.path: {path:?} does not address an object field")))?;
        if i + 1 == parts.len() {
            if !obj.contains_key(*key) {
                return Err(CliError::Config(format!("parameters.path: {path:?} is not present in the base config")));
            }
            obj.insert((*key).to_string(), Value::from(value));
            return Ok(());
        }
        node = obj
            .get_mut(*key)
            .ok_or_else(|| CliError::Config(format!("parameters.path: {path:?} is not present in the base config")))?;
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: SweepConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Value::String(base) = &cfg.base {
            let base_path = path.parent().unwrap_or(Path::new(".")).join(base);
            let text = std::fs::read_to_string(&base_path)
                .map_err(|e| CliError::Config(format!("base: {}: {e}", base_path.display())))?;
            cfg.base = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("base: {e}")))?;
        }
        Ok(cfg)
    }

    /// Every parameter combination, the first parameter varying slowest.
    pub fn cells(&self) -> Result<Vec<Vec<f64>>, CliError> {
        if self.parameters.is_empty() || self.parameters.len() > 2 {
            return Err(CliError::Config("parameters: a sweep takes one or two parameters".into()));
        }
        let mut count: usize = 1;
        for p in &self.parameters {
            if p.values.is_empty() {
                return Err(CliError::Config(format!("parameters.values: {:?} has no values", p.path)));
            }
            count = count.saturating_mul(p.values.len());
        }
        if count > MAX_CELLS {
            return Err(CliError::Config(format!("parameters: {count} cells exceed the limit of {MAX_CELLS}")));
        }
        let mut cells = vec![vec![]];
        for p in &self.parameters {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    p.values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        Ok(cells)
    }

    fn cell_config(&self, params: &[f64], dir: PathBuf) -> Result<SimConfig, CliError> {
        let mut v = self.base.clone();
        for (p, &x) in self.parameters.iter().zip(params) {
            set_path(&mut v, &p.path, x)?;
        }
        v["output_dir"] = Value::from(dir.to_string_lossy().into_owned());
        SimConfig::from_value(v)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn summary_csv(cfg: &SweepConfig, rows: &[CellResult]) -> String {
    let mut out = String::from("cell");
    for p in &cfg.parameters {
        out.push(',');
        out.push_str(&p.path);
    }
    out.push_str(",status,final_h1_distance,total_dissipation,tail_last,error\n");
    for r in rows {
        out.push_str(&r.index.to_string());
        for v in &r.params {
            out.push_str(&format!(",{v:.16e}"));
        }
        let err = r.error.as_deref().unwrap_or("").replace(['"', '\n'], "'");
        out.push_str(&format!(
            ",{},{},{},{},\"{}\"\n",
            r.status,
            opt(r.final_h1_distance),
            opt(r.total_dissipation),
            opt(r.tail_last),
            err
        ));
    }
    out
}

/// Runs every cell on a bounded worker pool. Cell failures are recorded in
/// the summary rather than aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<Vec<CellResult>, CliError> {
    let cells = cfg.cells()?;
    // validate every cell up front so config mistakes fail fast with exit 2
    for (i, params) in cells.iter().enumerate() {
        let c = cfg.cell_config(params, out_dir.join(format!("cell_{i:04}")))?;
        if let Err(CliError::Config(m)) = c.prepare() {
            return Err(CliError::Config(format!("cell {i}: {m}")));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let rows: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, params)| {
                let dir = out_dir.join(format!("cell_{i:04}"));
                let outcome = cfg.cell_config(params, dir.clone()).and_then(|c| run_simulate(&c, &dir));
                match outcome {
                    Ok(report) => CellResult {
                        index: i,
                        params: params.clone(),
                        status: "ok".into(),
                        final_h1_distance: report.final_h1_distance,
                        total_dissipation: report.total_dissipation,
                        tail_last: report.tail.map(|t| t.last),
                        error: None,
                    },
                    Err(e) => CellResult {
                        index: i,
                        params: params.clone(),
                        status: "failed".into(),
                        final_h1_distance: None,
                        total_dissipation: None,
                        tail_last: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let csv = summary_csv(cfg, &rows);
    write_atomic(&out_dir.join("summary.csv"), |w| {
        w.write_all(csv.as_bytes()).map_err(|e| CliError::io(out_dir, e))
    })?;
    Ok(rows)
}
