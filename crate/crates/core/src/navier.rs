//! Closed-form checks for simply supported rectangular plates.
//!
//! With `w ~ sin(a x) sin(b y)` and matching sine/cosine fields the FSDT
//! equations reduce, per half-wave pair, to a 5x5 pencil. The nonlocal
//! operator acts on each such mode as `1 + mu (a^2 + b^2)`, which only
//! rescales the mass.

use std::f64::consts::PI;

use nalgebra::{Matrix5, SymmetricEigen};

use crate::error::{Error, Result};
use crate::material::SectionProperties;
use crate::nurbs::PatchMesh;

/// Half-wave numbers `(m, n)` on an `a x b` plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavierMode {
    pub m: u32,
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

impl NavierMode {
    pub fn new(m: u32, n: u32, a: f64, b: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Validation(format!("half-wave numbers must be >= 1, got ({m}, {n})")));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Validation("plate dimensions must be positive".into()));
        }
        Ok(Self { m, n, a, b })
    }

    pub fn alpha(&self) -> f64 {
        self.m as f64 * PI / self.a
    }

    pub fn beta(&self) -> f64 {
        self.n as f64 * PI / self.b
    }

    /// `alpha^2 + beta^2`, the eigenvalue of `-lap` on this mode.
    pub fn wavenumber_sq(&self) -> f64 {
        self.alpha().powi(2) + self.beta().powi(2)
    }
}

/// `1 / sqrt(1 + mu (alpha^2 + beta^2))`.
pub fn nonlocal_ratio(mode: &NavierMode, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::Validation(format!("nonlocal parameter must be >= 0, got {mu}")));
    }
    Ok(1.0 / (1.0 + mu * mode.wavenumber_sq()).sqrt())
}

/// Per-mode stiffness and mass on `(U, V, W, X, Y)` amplitudes.
pub fn navier_matrices(mode: &NavierMode, section: &SectionProperties) -> (Matrix5<f64>, Matrix5<f64>) {
    let (al, be) = (mode.alpha(), mode.beta());
    let (a, b, d) = (&section.a, &section.b, &section.d);
    let (s44, s55) = (section.shear[(1, 1)], section.shear[(0, 0)]);
    let mut k = Matrix5::zeros();
    k[(0, 0)] = a[(0, 0)] * al * al + a[(2, 2)] * be * be;
    k[(0, 1)] = (a[(0, 1)] + a[(2, 2)]) * al * be;
    k[(0, 3)] = b[(0, 0)] * al * al + b[(2, 2)] * be * be;
    k[(0, 4)] = (b[(0, 1)] + b[(2, 2)]) * al * be;
    k[(1, 1)] = a[(2, 2)] * al * al + a[(1, 1)] * be * be;
    k[(1, 3)] = (b[(0, 1)] + b[(2, 2)]) * al * be;
    k[(1, 4)] = b[(2, 2)] * al * al + b[(1, 1)] * be * be;
    k[(2, 2)] = s55 * al * al + s44 * be * be;
    k[(2, 3)] = s55 * al;
    k[(2, 4)] = s44 * be;
    k[(3, 3)] = d[(0, 0)] * al * al + d[(2, 2)] * be * be + s55;
    k[(3, 4)] = (d[(0, 1)] + d[(2, 2)]) * al * be;
    k[(4, 4)] = d[(2, 2)] * al * al + d[(1, 1)] * be * be + s44;
    for i in 0..5 {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    (k, section.inertia_matrix())
}

/// All five local angular frequencies of one mode, ascending.
pub fn navier_spectrum(mode: &NavierMode, section: &SectionProperties) -> Result<[f64; 5]> {
    let (k, m) = navier_matrices(mode, section);
    let chol = m.cholesky().ok_or(Error::IndefiniteMass)?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(Error::IndefiniteMass)?;
    let c = linv * k * linv.transpose();
    let c = (c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    if !(ev[0] > 0.0) {
        return Err(Error::Validation(format!(
            "per-mode stiffness is singular for ({}, {})",
            mode.m, mode.n
        )));
    }
    Ok([ev[0].sqrt(), ev[1].sqrt(), ev[2].sqrt(), ev[3].sqrt(), ev[4].sqrt()])
}

/// Lowest (flexural) local angular frequency of mode `(m, n)`.
pub fn navier_local_fsdt(mode: &NavierMode, section: &SectionProperties) -> Result<f64> {
    Ok(navier_spectrum(mode, section)?[0])
}

/// Nonlocal flexural frequency: local value times the exact ratio.
pub fn navier_nonlocal_fsdt(mode: &NavierMode, section: &SectionProperties, mu: f64) -> Result<f64> {
    Ok(navier_local_fsdt(mode, section)? * nonlocal_ratio(mode, mu)?)
}

/// Thin-plate limit `omega = (alpha^2 + beta^2) sqrt(D / (rho h))`.
pub fn kirchhoff_frequency(mode: &NavierMode, bending_stiffness: f64, mass_per_area: f64) -> f64 {
    mode.wavenumber_sq() * (bending_stiffness / mass_per_area).sqrt()
}

/// Half-wave pairs ordered by `alpha^2 + beta^2`, ties broken by `(m, n)`.
pub fn lowest_modes(a: f64, b: f64, count: usize) -> Result<Vec<NavierMode>> {
    let reach = count as u32 + 1;
    let mut all = Vec::new();
    for m in 1..=reach {
        for n in 1..=reach {
            all.push(NavierMode::new(m, n, a, b)?);
        }
    }
    all.sort_by(|x, y| x.wavenumber_sq().total_cmp(&y.wavenumber_sq()).then((x.m, x.n).cmp(&(y.m, y.n))));
    all.truncate(count);
    Ok(all)
}

/// Normalized correlation between the deflection field given by `w_coeffs`
/// (one per control point) and `sin(alpha x) sin(beta y)`, sampled on an
/// interior grid. Values near 1 identify the half-wave pair of a mode.
pub fn mode_correlation(patch: &PatchMesh, w_coeffs: &[f64], mode: &NavierMode) -> Result<f64> {
    const SAMPLES: usize = 24;
    let (mut dot, mut ww, mut ss) = (0.0, 0.0, 0.0);
    for j in 0..SAMPLES {
        for i in 0..SAMPLES {
            let xi = (i as f64 + 0.5) / SAMPLES as f64;
            let eta = (j as f64 + 0.5) / SAMPLES as f64;
            let w = patch.interpolate(w_coeffs, xi, eta)?;
            let x = patch.point(xi, eta)?;
            let s = (mode.alpha() * x.x).sin() * (mode.beta() * x.y).sin();
            dot += w * s;
            ww += w * w;
            ss += s * s;
        }
    }
    if ww == 0.0 {
        return Ok(0.0);
    }
    Ok(dot.abs() / (ww * ss).sqrt())
}

/// Correlation of the deflection with the span of several sine modes, for
/// degenerate pairs such as (1, 2) and (2, 1) on a square plate. The sampled
/// sine products are mutually orthogonal, so this is the root sum of squares
/// of the individual correlations.
pub fn subspace_correlation(patch: &PatchMesh, w_coeffs: &[f64], modes: &[NavierMode]) -> Result<f64> {
    let mut sum = 0.0;
    for m in modes {
        sum += mode_correlation(patch, w_coeffs, m)?.powi(2);
    }
    Ok(sum.sqrt().min(1.0))
}

/// Groups of half-wave pairs sharing one wavenumber, in ascending order.
pub fn degenerate_groups(a: f64, b: f64, count: usize) -> Result<Vec<Vec<NavierMode>>> {
    let mut groups: Vec<Vec<NavierMode>> = Vec::new();
    for m in lowest_modes(a, b, count)? {
        match groups.last_mut() {
            Some(g) if (g[0].wavenumber_sq() - m.wavenumber_sq()).abs() <= 1e-9 * m.wavenumber_sq() => g.push(m),
            _ => groups.push(vec![m]),
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{section_constants, FgmProfile};
    use approx::assert_relative_eq;

    fn iso(h: f64) -> (SectionProperties, f64, f64) {
        let (e, nu, rho) = (30e6, 0.3, 1.0);
        let s = section_constants(&FgmProfile::isotropic(e, nu, rho, h).unwrap(), 5.0 / 6.0).unwrap();
        (s, rho, e / (2.0 * (1.0 + nu)))
    }

    fn omega_nd(a: f64, b: f64, h: f64, mu: f64) -> f64 {
        let (s, rho, g) = iso(h);
        let mode = NavierMode::new(1, 1, a, b).unwrap();
        navier_nonlocal_fsdt(&mode, &s, mu).unwrap() * h * (rho / g).sqrt()
    }

    #[test]
    fn ratio_examples() {
        let sq = NavierMode::new(1, 1, 10.0, 10.0).unwrap();
        assert_eq!(nonlocal_ratio(&sq, 0.0).unwrap(), 1.0);
        let r = nonlocal_ratio(&sq, 1.0).unwrap();
        assert_relative_eq!(r, 1.0 / (1.0 + 0.2 * PI * PI / 10.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(r, 0.9138, epsilon = 1e-4);
        assert_relative_eq!(0.0930 * r, 0.0850, epsilon = 5e-5);
        assert_relative_eq!(nonlocal_ratio(&sq, 5.0).unwrap(), 0.7094, epsilon = 1e-4);
        let rect = NavierMode::new(1, 1, 20.0, 10.0).unwrap();
        let r = nonlocal_ratio(&rect, 5.0).unwrap();
        assert_relative_eq!(r, 0.7864, epsilon = 5e-5);
        assert_relative_eq!(0.0589 * r, 0.0463, epsilon = 1e-4);
        assert!(nonlocal_ratio(&sq, -1.0).is_err());
    }

    #[test]
    fn local_isotropic_reference_values() {
        assert_relative_eq!(omega_nd(10.0, 10.0, 1.0, 0.0), 0.0930, max_relative = 0.005);
        assert_relative_eq!(omega_nd(10.0, 10.0, 0.5, 0.0), 0.0239, max_relative = 0.005);
    }

    #[test]
    fn thin_plate_limit() {
        let (a, h) = (10.0, 0.01);
        let (s, _, _) = iso(h);
        let mode = NavierMode::new(1, 1, a, a).unwrap();
        let fsdt = navier_local_fsdt(&mode, &s).unwrap();
        let kirchhoff = kirchhoff_frequency(&mode, s.d[(0, 0)], s.i11);
        assert_relative_eq!(fsdt, kirchhoff, max_relative = 0.002);
        assert!(fsdt < kirchhoff);
    }

    #[test]
    fn shear_correction_lowers_frequency() {
        let mode = NavierMode::new(1, 1, 10.0, 10.0).unwrap();
        let p = FgmProfile::isotropic(30e6, 0.3, 1.0, 1.0).unwrap();
        let w = |k| navier_local_fsdt(&mode, &section_constants(&p, k).unwrap()).unwrap();
        assert!(w(0.7) < w(5.0 / 6.0));
    }

    #[test]
    fn mode_ordering() {
        let m = lowest_modes(10.0, 5.0, 3).unwrap();
        let pairs: Vec<(u32, u32)> = m.iter().map(|x| (x.m, x.n)).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 1), (3, 1)]);
        let m = lowest_modes(10.0, 10.0, 3).unwrap();
        let pairs: Vec<(u32, u32)> = m.iter().map(|x| (x.m, x.n)).collect();
        assert_eq!(pairs, vec![(1, 1), (1, 2), (2, 1)]);
        assert!(NavierMode::new(0, 1, 1.0, 1.0).is_err());
        let g = degenerate_groups(10.0, 10.0, 4).unwrap();
        assert_eq!(g.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2, 1]);
    }
}
