//! Generalized symmetric eigenproblem `K x = w^2 M x` and frequency scaling.
//!
//! Two routes share one contract (lowest pairs, M-orthonormal vectors,
//! relative residual below tolerance):
//!
//! * dense: Cholesky-factor `M`, reduce to a standard symmetric problem
//!   and diagonalize it completely;
//! * subspace: Bathe's subspace iteration with a Cholesky factor of `K`
//!   and Rayleigh-Ritz on a block slightly larger than the request.
//!
//! Dense results whose residual misses the bound are polished by a few
//! subspace iterations started from the dense vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::GlobalSystem;
use crate::error::{Error, Result};

/// Relative residual bound `|K x - l M x| / |K x|` for every returned pair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const ZERO_EIGENVALUE_FRACTION: f64 = 1e-12;

/// Above this many dofs `Auto` switches from the dense to the subspace route.
pub const DENSE_DOF_LIMIT: usize = 1200;

const SUBSPACE_SEED: u64 = 0x6e61_6e6f_706c_6174;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    Dense,
    Subspace,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: EigenMethod,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: EigenMethod::Auto,
            tolerance: RESIDUAL_TOLERANCE,
            max_iterations: 300,
        }
    }
}

/// Lowest eigenpairs of `K x = l M x`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// One M-normalized vector per column.
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    /// Subspace iterations used (0 for a pure dense solve).
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ModalResult {
    /// Squared angular frequencies, ascending.
    pub eigenvalues: Vec<f64>,
    /// Angular frequencies in the unit system of the inputs.
    pub omegas: Vec<f64>,
    /// Mode shapes over the free dofs, one per column.
    pub modes: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub mu: f64,
    pub iterations: usize,
}

impl ModalResult {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `Omega = omega h sqrt(rho_c / G_c)` for every mode.
    pub fn nondimensional(&self, h: f64, rho_c: f64, g_c: f64) -> Result<Vec<f64>> {
        self.omegas.iter().map(|&w| nondimensionalize(w, h, rho_c, g_c)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Lowest `count` modes of a constrained system.
pub fn solve_modes(system: &GlobalSystem, count: usize) -> Result<ModalResult> {
    solve_modes_with(system, count, &SolveOptions::default())
}

pub fn solve_modes_with(system: &GlobalSystem, count: usize, opts: &SolveOptions) -> Result<ModalResult> {
    let pairs = solve_generalized(&system.stiffness, &system.mass, count, opts)?;
    Ok(ModalResult {
        omegas: pairs.values.iter().map(|l| l.sqrt()).collect(),
        eigenvalues: pairs.values,
        modes: pairs.vectors,
        residuals: pairs.residuals,
        mu: system.mu,
        iterations: pairs.iterations,
    })
}

/// Lowest `count` eigenpairs of the symmetric-definite pencil `(K, M)`.
pub fn solve_generalized(k: &DMatrix<f64>, m: &DMatrix<f64>, count: usize, opts: &SolveOptions) -> Result<Eigenpairs> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Validation("stiffness and mass must be square and of equal size".into()));
    }
    if count == 0 || count > n {
        return Err(Error::Validation(format!("cannot extract {count} modes from {n} dofs")));
    }
    let method = match opts.method {
        EigenMethod::Auto if n <= DENSE_DOF_LIMIT => EigenMethod::Dense,
        EigenMethod::Auto => EigenMethod::Subspace,
        other => other,
    };
    let mut pairs = match method {
        EigenMethod::Dense => {
            let dense = dense_pairs(k, m, count)?;
            if dense.residuals.iter().all(|&r| r <= opts.tolerance) {
                dense
            } else {
                log::debug!("polishing dense eigenpairs (worst residual {:e})", worst(&dense.residuals));
                subspace_pairs(k, m, count, Some(&dense.vectors), opts)?
            }
        }
        _ => subspace_pairs(k, m, count, None, opts)?,
    };
    order_degenerate(&mut pairs);
    Ok(pairs)
}

fn worst(r: &[f64]) -> f64 {
    r.iter().copied().fold(0.0, f64::max)
}

fn check_positive(values: &[f64], max_abs: f64) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value > ZERO_EIGENVALUE_FRACTION * max_abs) {
            return Err(Error::NonPositiveEigenvalue {
                index,
                value,
                max: max_abs,
            });
        }
    }
    Ok(())
}

/// Ascending eigenpairs of the full pencil via `L^-1 K L^-T`.
fn full_dense(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m.clone().cholesky().ok_or(Error::IndefiniteMass)?;
    let l = chol.l();
    let lk = l.solve_lower_triangular(k).ok_or(Error::IndefiniteMass)?;
    let c = l.solve_lower_triangular(&lk.transpose()).ok_or(Error::IndefiniteMass)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = eig.eigenvectors.select_columns(&order);
    let x = l.tr_solve_lower_triangular(&y).ok_or(Error::IndefiniteMass)?;
    Ok((values, x))
}

fn dense_pairs(k: &DMatrix<f64>, m: &DMatrix<f64>, count: usize) -> Result<Eigenpairs> {
    let (values, vectors) = full_dense(k, m)?;
    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let values: Vec<f64> = values[..count].to_vec();
    check_positive(&values, max_abs)?;
    let vectors = vectors.columns(0, count).into_owned();
    let residuals = residuals(k, m, &values, &vectors);
    Ok(Eigenpairs {
        values,
        vectors,
        residuals,
        iterations: 0,
    })
}

/// `|K x - l M x| / |K x|` per column.
pub fn residuals(k: &DMatrix<f64>, m: &DMatrix<f64>, values: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    let kx = k * vectors;
    let mx = m * vectors;
    values
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let kxj = kx.column(j);
            let r = kxj - mx.column(j) * l;
            r.norm() / kxj.norm().max(f64::MIN_POSITIVE)
        })
        .collect()
}

fn subspace_pairs(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    count: usize,
    start: Option<&DMatrix<f64>>,
    opts: &SolveOptions,
) -> Result<Eigenpairs> {
    let n = k.nrows();
    let q = n.min((2 * count).max(count + 8));
    let k_chol = k.clone().cholesky().ok_or(Error::IndefiniteStiffness)?;

    let mut rng = ChaCha8Rng::seed_from_u64(SUBSPACE_SEED);
    let mut x = DMatrix::from_fn(n, q, |_, _| rng.random_range(-1.0..1.0));
    if let Some(s) = start {
        let c = s.ncols().min(q);
        x.columns_mut(0, c).copy_from(&s.columns(0, c));
    }

    let target = opts.tolerance * 1e-3;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for iteration in 1..=opts.max_iterations {
        let y = k_chol.solve(&(m * &x));
        let kr = y.transpose() * k * &y;
        let mr = y.transpose() * m * &y;
        let kr = (&kr + kr.transpose()) * 0.5;
        let mr = (&mr + mr.transpose()) * 0.5;
        let (values, q_small) = full_dense(&kr, &mr)?;
        x = &y * q_small;

        let lowest = values[..count].to_vec();
        let vectors = x.columns(0, count).into_owned();
        let res = residuals(k, m, &lowest, &vectors);
        let w = worst(&res);
        if w < 0.5 * best {
            best = w;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let converged = w <= target || (stalled >= 5 && w <= opts.tolerance);
        if converged || iteration == opts.max_iterations {
            if w > opts.tolerance {
                return Err(Error::NoConvergence {
                    iterations: iteration,
                    residual: w,
                    target: opts.tolerance,
                });
            }
            let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            check_positive(&lowest, max_abs)?;
            return Ok(Eigenpairs {
                values: lowest,
                vectors,
                residuals: res,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: best,
        target: opts.tolerance,
    })
}

/// Within clusters of numerically equal eigenvalues, order modes by the dof
/// index of their peak amplitude.
fn order_degenerate(pairs: &mut Eigenpairs) {
    let n = pairs.values.len();
    let peak = |v: &DMatrix<f64>, j: usize| v.column(j).iamax();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs.values[end] - pairs.values[start]).abs() <= 1e-9 * pairs.values[start].abs() {
            end += 1;
        }
        perm[start..end].sort_by_key(|&j| peak(&pairs.vectors, j));
        start = end;
    }
    if perm.iter().enumerate().any(|(i, &p)| i != p) {
        pairs.values = perm.iter().map(|&j| pairs.values[j]).collect();
        pairs.residuals = perm.iter().map(|&j| pairs.residuals[j]).collect();
        pairs.vectors = pairs.vectors.select_columns(&perm);
    }
}

/// `Omega = omega h sqrt(rho_c / G_c)`.
pub fn nondimensionalize(omega: f64, h: f64, rho_c: f64, g_c: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Validation(format!("frequency must be non-negative, got {omega}")));
    }
    if !(h > 0.0 && rho_c > 0.0 && g_c > 0.0) {
        return Err(Error::Validation("thickness, density and shear modulus must be positive".into()));
    }
    Ok(omega * h * (rho_c / g_c).sqrt())
}

/// `Omega_NL / Omega_L`.
pub fn frequency_ratio(omega_nonlocal: f64, omega_local: f64) -> Result<f64> {
    if omega_local == 0.0 {
        return Err(Error::DivisionByZero("local frequency is zero"));
    }
    if !(omega_local > 0.0 && omega_nonlocal >= 0.0) {
        return Err(Error::Validation("frequencies must be positive".into()));
    }
    Ok(omega_nonlocal / omega_local)
}

/// M-orthonormality defect `max |X^T M X - I|`.
pub fn orthonormality_defect(m: &DMatrix<f64>, modes: &DMatrix<f64>) -> f64 {
    let g = modes.transpose() * m * modes;
    (g - DMatrix::identity(modes.ncols(), modes.ncols())).abs().max()
}

/// Rayleigh quotient `x^T K x / x^T M x`.
pub fn rayleigh_quotient(k: &DMatrix<f64>, m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(k * x)) / x.dot(&(m * x))
}
