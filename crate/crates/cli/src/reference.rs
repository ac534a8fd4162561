//! Embedded reference tables and the `validate` suite.

use std::collections::BTreeMap;
use std::io::Write;

use nanoplate::analysis::{PlateModel, PlateSpec};
use nanoplate::assembly::BoundaryCondition;
use nanoplate::material::{ConstituentPair, FgmProfile, DEFAULT_SHEAR_CORRECTION};
use nanoplate::modal::RESIDUAL_TOLERANCE;
use nanoplate::navier::{degenerate_groups, nonlocal_ratio, subspace_correlation, NavierMode};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Bc;
use crate::error::CliError;
use crate::runner::sig6;

pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");
pub const TABLE3_CSV: &str = include_str!("../data/table3.csv");

pub const TABLE2_TOLERANCE: f64 = 0.01;
pub const TABLE3_TOLERANCE: f64 = 0.02;
pub const RATIO_TOLERANCE: f64 = 0.005;

/// Correlation with a sine mode above which a computed mode counts as that
/// flexural mode.
const FLEXURAL_CORRELATION: f64 = 0.99;

/// Gradient index of the graded table.
const TABLE3_GRADIENT_INDEX: f64 = 5.0;

#[derive(Debug, Clone, Deserialize)]
pub struct Table2Entry {
    pub a_b_ratio: f64,
    pub a_h_ratio: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub mu: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table3Entry {
    pub a_b_ratio: f64,
    pub a_h_ratio: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub mu: f64,
    pub bc: Bc,
    pub mode: usize,
    pub omega: f64,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CliError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn table2() -> Result<Vec<Table2Entry>, CliError> {
    parse(TABLE2_CSV)
}

pub fn table3() -> Result<Vec<Table3Entry>, CliError> {
    parse(TABLE3_CSV)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Table2,
    Table3,
    Table3Ratio,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Table2 => "table2",
            Suite::Table3 => "table3",
            Suite::Table3Ratio => "table3_ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub case: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    /// Largest eigen residual behind `computed`.
    pub residual: f64,
}

impl Check {
    pub fn rel_error(&self) -> f64 {
        (self.computed - self.expected).abs() / self.expected.abs()
    }

    pub fn passed(&self) -> bool {
        self.rel_error() <= self.tolerance && self.residual <= RESIDUAL_TOLERANCE
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn suite(&self, suite: Suite) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.suite == suite)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// One CSV line per check.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "case", "expected", "computed", "rel_error", "tolerance", "residual", "status"])?;
        for c in &self.checks {
            w.write_record([
                c.suite.name().to_string(),
                c.case.clone(),
                c.expected.to_string(),
                sig6(c.computed),
                format!("{:.3e}", c.rel_error()),
                c.tolerance.to_string(),
                format!("{:.1e}", c.residual),
                if c.passed() { "pass" } else { "FAIL" }.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-suite pass counts, e.g. `table2 12/12`.
    pub fn summary(&self) -> Vec<(Suite, usize, usize)> {
        let mut m: BTreeMap<Suite, (usize, usize)> = BTreeMap::new();
        for c in &self.checks {
            let e = m.entry(c.suite).or_default();
            e.1 += 1;
            if c.passed() {
                e.0 += 1;
            }
        }
        m.into_iter().map(|(s, (p, t))| (s, p, t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub kappa: f64,
    pub net: usize,
    pub workers: Option<usize>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_SHEAR_CORRECTION,
            net: 13,
            workers: None,
        }
    }
}

/// One plate solved for several `mu` values.
#[derive(Debug, Clone)]
struct Family {
    a: f64,
    b: f64,
    h: f64,
    graded: bool,
    bc: BoundaryCondition,
    mus: Vec<f64>,
}

#[derive(Debug, Clone)]
struct FamilyResult {
    /// Per mu: nondimensional frequencies and residuals.
    omega: Vec<Vec<f64>>,
    residual: Vec<Vec<f64>>,
    /// Per local mode: the flexural half-wave pair it was identified as.
    flexural: Vec<Option<(u32, u32)>>,
}

fn solve_family(f: &Family, modes: usize, opts: &ValidateOptions) -> Result<FamilyResult, CliError> {
    let profile = if f.graded {
        FgmProfile::new(ConstituentPair::si3n4_sus304(), TABLE3_GRADIENT_INDEX, f.h, Some(0.3))?
    } else {
        FgmProfile::isotropic(30e6, 0.3, 1.0, f.h)?
    };
    let model = PlateModel::build(PlateSpec {
        a: f.a,
        b: f.b,
        profile,
        kappa: opts.kappa,
        degree: 3,
        net: (opts.net, opts.net),
        bc: f.bc,
    })?;
    let mut omega = Vec::new();
    let mut residual = Vec::new();
    let mut flexural = vec![None; modes];
    for &mu in &f.mus {
        let res = model.solve(mu, modes)?;
        if mu == 0.0 && f.bc == BoundaryCondition::Ssss {
            let groups = degenerate_groups(f.a, f.b, modes + 3)?;
            for (i, slot) in flexural.iter_mut().enumerate() {
                let w = model.deflection(&res.modal, i)?;
                for g in &groups {
                    if subspace_correlation(&model.patch, &w, g)? > FLEXURAL_CORRELATION {
                        *slot = Some((g[0].m, g[0].n));
                    }
                }
            }
        }
        omega.push(res.omega_nd);
        residual.push(res.modal.residuals);
    }
    Ok(FamilyResult { omega, residual, flexural })
}

fn key(a: f64, b: f64, h: f64, bc: Bc) -> String {
    format!("{a}|{b}|{h}|{bc}")
}

/// Check both embedded tables and the SSSS ratio oracle.
pub fn run_validate(opts: &ValidateOptions) -> Result<ValidationReport, CliError> {
    run_tables(opts, true, true)
}

/// Only the isotropic table.
pub fn run_table2(opts: &ValidateOptions) -> Result<ValidationReport, CliError> {
    run_tables(opts, true, false)
}

/// Only the graded table and its ratio checks.
pub fn run_table3(opts: &ValidateOptions) -> Result<ValidationReport, CliError> {
    run_tables(opts, false, true)
}

fn run_tables(opts: &ValidateOptions, with2: bool, with3: bool) -> Result<ValidationReport, CliError> {
    let t2 = if with2 { table2()? } else { Vec::new() };
    let t3 = if with3 { table3()? } else { Vec::new() };

    // mu = 0 is always part of a family: the ratio check needs it.
    let mut families: BTreeMap<(bool, String), Family> = BTreeMap::new();
    let mut add = |graded: bool, a: f64, b: f64, h: f64, bc: Bc, mu: f64| {
        let f = families.entry((graded, key(a, b, h, bc))).or_insert_with(|| Family {
            a,
            b,
            h,
            graded,
            bc: bc.into(),
            mus: vec![0.0],
        });
        if !f.mus.contains(&mu) {
            f.mus.push(mu);
        }
    };
    for e in &t2 {
        add(false, e.a, e.b, e.h, Bc::Ssss, e.mu);
    }
    for e in &t3 {
        add(true, e.a, e.b, e.h, e.bc, e.mu);
    }
    let keys: Vec<(bool, String)> = families.keys().cloned().collect();
    let modes = 3;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Solve(e.to_string()))?;
    let solved: Vec<Result<FamilyResult, CliError>> =
        pool.install(|| keys.par_iter().map(|k| solve_family(&families[k], modes, opts)).collect());
    let mut results = BTreeMap::new();
    for (k, r) in keys.iter().zip(solved) {
        results.insert(k.clone(), r?);
    }
    let lookup = |graded: bool, k: String, mu: f64| {
        let fam = &families[&(graded, k.clone())];
        let idx = fam.mus.iter().position(|&m| m == mu).expect("mu registered");
        (&results[&(graded, k)], idx)
    };

    let mut report = ValidationReport::default();
    for e in &t2 {
        let (r, i) = lookup(false, key(e.a, e.b, e.h, Bc::Ssss), e.mu);
        report.checks.push(Check {
            suite: Suite::Table2,
            case: format!("a/b={} a/h={} mu={}", e.a_b_ratio, e.a_h_ratio, e.mu),
            expected: e.omega,
            computed: r.omega[i][0],
            tolerance: TABLE2_TOLERANCE,
            residual: r.residual[i][0],
        });
    }
    for e in &t3 {
        let (r, i) = lookup(true, key(e.a, e.b, e.h, e.bc), e.mu);
        let m = e.mode - 1;
        report.checks.push(Check {
            suite: Suite::Table3,
            case: format!("{} a/b={} a/h={} mu={} mode={}", e.bc, e.a_b_ratio, e.a_h_ratio, e.mu, e.mode),
            expected: e.omega,
            computed: r.omega[i][m],
            tolerance: TABLE3_TOLERANCE,
            residual: r.residual[i][m],
        });
        if e.bc == Bc::Ssss && e.mu > 0.0 {
            if let Some((hm, hn)) = r.flexural[m] {
                let mode = NavierMode::new(hm, hn, e.a, e.b)?;
                report.checks.push(Check {
                    suite: Suite::Table3Ratio,
                    case: format!("a/b={} a/h={} mu={} mode={} ({hm},{hn})", e.a_b_ratio, e.a_h_ratio, e.mu, e.mode),
                    expected: nonlocal_ratio(&mode, e.mu)?,
                    computed: r.omega[i][m] / r.omega[0][m],
                    tolerance: RATIO_TOLERANCE,
                    residual: r.residual[i][m].max(r.residual[0][m]),
                });
            }
        }
    }
    Ok(report)
}
