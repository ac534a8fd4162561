//! Single solves, sweeps and convergence studies, plus their CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use nanoplate::analysis::PlateModel;
use nanoplate::modal::frequency_ratio;
use rayon::prelude::*;

use crate::config::{AnalysisConfig, Bc, SweepConfig};
use crate::error::CliError;

pub const CSV_HEADER: [&str; 10] = [
    "a_b_ratio",
    "a_h_ratio",
    "n",
    "mu",
    "bc",
    "mode",
    "omega_nd",
    "freq_ratio",
    "dofs",
    "wall_ms",
];

pub const CONVERGE_HEADER: [&str; 5] = ["n_u", "n_v", "dofs", "omega_nd", "rel_change"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub a_b_ratio: f64,
    pub a_h_ratio: f64,
    pub n: f64,
    pub mu: f64,
    pub bc: Bc,
    /// 1-based.
    pub mode: usize,
    pub omega_nd: f64,
    pub freq_ratio: Option<f64>,
    pub dofs: usize,
    pub wall_ms: f64,
    /// Relative eigen residual of this mode (not written to CSV).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub n_u: usize,
    pub n_v: usize,
    pub dofs: usize,
    pub omega_nd: f64,
    /// Relative change from the previous (coarser) net.
    pub rel_change: Option<f64>,
    pub residual: f64,
}

/// Rows of a sweep plus the configurations that failed.
#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<(AnalysisConfig, String)>,
}

impl SweepOutput {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Solve one plate for several `mu` values, reusing the assembly. The local
/// (`mu = 0`) spectrum is always computed so every row carries its ratio.
pub fn solve_mu_family(config: &AnalysisConfig, mus: &[f64], modes: usize) -> Result<Vec<Vec<ResultRow>>, CliError> {
    let start = Instant::now();
    let model = PlateModel::build(config.plate_spec()?)?;
    let build_ms = ms(start);
    let local = model.solve(0.0, modes)?;
    let local_ms = ms(start) - build_ms;
    let mut out = Vec::with_capacity(mus.len());
    for &mu in mus {
        let t = Instant::now();
        let res = if mu == 0.0 { local.clone() } else { model.solve(mu, modes)? };
        let solve_ms = if mu == 0.0 { local_ms } else { ms(t) };
        let rows = res
            .omega_nd
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                Ok(ResultRow {
                    a_b_ratio: config.a_b_ratio(),
                    a_h_ratio: config.a_h_ratio(),
                    n: config.material.gradient_index,
                    mu,
                    bc: config.bc,
                    mode: i + 1,
                    omega_nd: w,
                    freq_ratio: Some(frequency_ratio(w, local.omega_nd[i])?),
                    dofs: res.dofs,
                    wall_ms: build_ms + solve_ms,
                    residual: res.modal.residuals[i],
                })
            })
            .collect::<Result<Vec<_>, nanoplate::Error>>()?;
        out.push(rows);
    }
    Ok(out)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Requested modes of one configuration.
pub fn run_solve(config: &AnalysisConfig) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = solve_mu_family(config, &[config.nonlocal.mu], config.modes)?;
    Ok(rows.remove(0))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Input("--workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Solve(e.to_string()))
}

/// Cartesian sweep. Configurations that differ only in `mu` share one
/// assembly; groups run concurrently and rows come back in grid order.
pub fn run_sweep(sweep: &SweepConfig, workers: Option<usize>) -> Result<SweepOutput, CliError> {
    let configs = sweep.expand()?;
    let modes = sweep.base.modes;

    // group index -> (representative config, [(row index, mu)])
    let mut groups: Vec<(AnalysisConfig, Vec<(usize, f64)>)> = Vec::new();
    let mut lookup: BTreeMap<String, usize> = BTreeMap::new();
    for (i, c) in configs.iter().enumerate() {
        let mut key_cfg = c.clone();
        key_cfg.nonlocal.mu = 0.0;
        let key = key_cfg.to_toml();
        let g = *lookup.entry(key).or_insert_with(|| {
            groups.push((key_cfg, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push((i, c.nonlocal.mu));
    }

    let results: Vec<Result<Vec<Vec<ResultRow>>, CliError>> = pool(workers)?.install(|| {
        groups
            .par_iter()
            .map(|(cfg, members)| {
                let mus: Vec<f64> = members.iter().map(|m| m.1).collect();
                solve_mu_family(cfg, &mus, modes)
            })
            .collect()
    });

    let mut per_config: Vec<Option<Result<Vec<ResultRow>, String>>> = vec![None; configs.len()];
    for ((_, members), res) in groups.iter().zip(results) {
        match res {
            Ok(rows) => {
                for ((idx, _), r) in members.iter().zip(rows) {
                    per_config[*idx] = Some(Ok(r));
                }
            }
            Err(e) => {
                for (idx, _) in members {
                    per_config[*idx] = Some(Err(e.to_string()));
                }
            }
        }
    }
    let mut out = SweepOutput::default();
    for (cfg, r) in configs.into_iter().zip(per_config) {
        match r.expect("every configuration belongs to a group") {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => {
                log::error!("a/b={} a/h={} n={} mu={} {}: {e}", cfg.a_b_ratio(), cfg.a_h_ratio(), cfg.material.gradient_index, cfg.nonlocal.mu, cfg.bc);
                out.failures.push((cfg, e));
            }
        }
    }
    Ok(out)
}

/// Fundamental frequency on each net in `nets` (ascending, square nets).
pub fn run_converge(config: &AnalysisConfig, nets: &[usize]) -> Result<Vec<ConvergeRow>, CliError> {
    if nets.is_empty() {
        return Err(CliError::Input("at least one net size is required".into()));
    }
    if nets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Input(format!("net sizes must be strictly ascending, got {nets:?}")));
    }
    let mut rows: Vec<ConvergeRow> = Vec::with_capacity(nets.len());
    for &net in nets {
        let mut c = config.clone();
        c.discretization.n_u = net;
        c.discretization.n_v = net;
        let model = PlateModel::build(c.plate_spec()?)?;
        let res = model.solve(c.nonlocal.mu, 1)?;
        let w = res.omega_nd[0];
        let rel_change = rows.last().map(|p| (w - p.omega_nd) / p.omega_nd);
        rows.push(ConvergeRow {
            n_u: net,
            n_v: net,
            dofs: res.dofs,
            omega_nd: w,
            rel_change,
            residual: res.modal.residuals[0],
        });
    }
    Ok(rows)
}

/// `x` with six significant digits, in plain decimal notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow], with_wall_time: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.a_b_ratio.to_string(),
            r.a_h_ratio.to_string(),
            r.n.to_string(),
            r.mu.to_string(),
            r.bc.to_string(),
            r.mode.to_string(),
            sig6(r.omega_nd),
            r.freq_ratio.map(sig6).unwrap_or_default(),
            r.dofs.to_string(),
            if with_wall_time { format!("{:.1}", r.wall_ms) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_converge<W: Write>(out: W, rows: &[ConvergeRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGE_HEADER)?;
    for r in rows {
        w.write_record([
            r.n_u.to_string(),
            r.n_v.to_string(),
            r.dofs.to_string(),
            sig6(r.omega_nd),
            r.rel_change.map(|d| format!("{d:.3e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
