//! TOML analysis and sweep configuration.
//!
//! ```toml
//! bc = "SSSS"
//! modes = 3
//! kappa = 0.8333333333333334
//!
//! [geometry]
//! a = 10.0
//! b = 10.0
//! h = 1.0
//!
//! [material]
//! e_c = 348.43e9
//! e_m = 201.04e9
//! nu_c = 0.3
//! nu_m = 0.3
//! rho_c = 2370.0
//! rho_m = 8166.0
//! gradient_index = 5.0
//! nu_override = 0.3
//!
//! [nonlocal]
//! mu = 0.0
//!
//! [discretization]
//! degree = 3
//! n_u = 13
//! n_v = 13
//! ```

use std::fmt;
use std::path::Path;

use nanoplate::analysis::PlateSpec;
use nanoplate::assembly::BoundaryCondition;
use nanoplate::material::{ConstituentPair, FgmProfile, DEFAULT_SHEAR_CORRECTION};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bc {
    #[serde(rename = "SSSS", alias = "ssss")]
    Ssss,
    #[serde(rename = "CCCC", alias = "cccc")]
    Cccc,
}

impl From<Bc> for BoundaryCondition {
    fn from(bc: Bc) -> Self {
        match bc {
            Bc::Ssss => BoundaryCondition::Ssss,
            Bc::Cccc => BoundaryCondition::Cccc,
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        BoundaryCondition::from(*self).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub e_c: f64,
    pub e_m: f64,
    pub nu_c: f64,
    pub nu_m: f64,
    pub rho_c: f64,
    pub rho_m: f64,
    pub gradient_index: f64,
    /// Constant Poisson ratio through the thickness; omit for Mori-Tanaka nu(z).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_override: Option<f64>,
}

impl Default for Material {
    fn default() -> Self {
        let p = ConstituentPair::si3n4_sus304();
        Self {
            e_c: p.e_c,
            e_m: p.e_m,
            nu_c: p.nu_c,
            nu_m: p.nu_m,
            rho_c: p.rho_c,
            rho_m: p.rho_m,
            gradient_index: 5.0,
            nu_override: Some(0.3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlocal {
    /// `(e0 a)^2` in nm^2.
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub degree: usize,
    pub n_u: usize,
    pub n_v: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bc: Bc,
    pub modes: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub geometry: Geometry,
    pub material: Material,
    pub nonlocal: Nonlocal,
    pub discretization: Discretization,
}

fn default_kappa() -> f64 {
    DEFAULT_SHEAR_CORRECTION
}

impl Default for AnalysisConfig {
    /// Square FG plate, a/h = 10, n = 5, local, SSSS, 13x13 cubic net.
    fn default() -> Self {
        Self {
            bc: Bc::Ssss,
            modes: 3,
            kappa: DEFAULT_SHEAR_CORRECTION,
            geometry: Geometry { a: 10.0, b: 10.0, h: 1.0 },
            material: Material::default(),
            nonlocal: Nonlocal { mu: 0.0 },
            discretization: Discretization { degree: 3, n_u: 13, n_v: 13 },
        }
    }
}

fn invalid(path: &str, msg: impl fmt::Display) -> CliError {
    CliError::Input(format!("{path}: {msg}"))
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

impl AnalysisConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_toml(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Field-level checks, reported with the offending path.
    pub fn validate(&self) -> Result<(), CliError> {
        positive("geometry.a", self.geometry.a)?;
        positive("geometry.b", self.geometry.b)?;
        positive("geometry.h", self.geometry.h)?;
        let m = &self.material;
        positive("material.e_c", m.e_c)?;
        positive("material.e_m", m.e_m)?;
        positive("material.rho_c", m.rho_c)?;
        positive("material.rho_m", m.rho_m)?;
        for (path, nu) in [("material.nu_c", m.nu_c), ("material.nu_m", m.nu_m)] {
            if !(nu > 0.0 && nu < 0.5) {
                return Err(invalid(path, format!("must lie in (0, 0.5), got {nu}")));
            }
        }
        if let Some(nu) = m.nu_override {
            if !(nu > 0.0 && nu < 0.5) {
                return Err(invalid("material.nu_override", format!("must lie in (0, 0.5), got {nu}")));
            }
        }
        if !(m.gradient_index >= 0.0 && m.gradient_index.is_finite()) {
            return Err(invalid("material.gradient_index", format!("must be >= 0, got {}", m.gradient_index)));
        }
        if !(self.nonlocal.mu >= 0.0 && self.nonlocal.mu.is_finite()) {
            return Err(invalid("nonlocal.mu", format!("must be >= 0, got {}", self.nonlocal.mu)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(invalid("kappa", format!("must lie in (0, 1], got {}", self.kappa)));
        }
        if self.modes == 0 {
            return Err(invalid("modes", "must be at least 1"));
        }
        let d = &self.discretization;
        if d.degree == 0 {
            return Err(invalid("discretization.degree", "must be at least 1"));
        }
        for (path, n) in [("discretization.n_u", d.n_u), ("discretization.n_v", d.n_v)] {
            if n < d.degree + 1 {
                return Err(invalid(path, format!("needs at least degree + 1 = {} control points, got {n}", d.degree + 1)));
            }
        }
        Ok(())
    }

    pub fn constituents(&self) -> Result<ConstituentPair, CliError> {
        let m = &self.material;
        ConstituentPair::new(m.e_c, m.e_m, m.nu_c, m.nu_m, m.rho_c, m.rho_m).map_err(|e| invalid("material", e))
    }

    pub fn plate_spec(&self) -> Result<PlateSpec, CliError> {
        self.validate()?;
        let profile = FgmProfile::new(
            self.constituents()?,
            self.material.gradient_index,
            self.geometry.h,
            self.material.nu_override,
        )
        .map_err(|e| invalid("material", e))?;
        Ok(PlateSpec {
            a: self.geometry.a,
            b: self.geometry.b,
            profile,
            kappa: self.kappa,
            degree: self.discretization.degree,
            net: (self.discretization.n_u, self.discretization.n_v),
            bc: self.bc.into(),
        })
    }

    pub fn a_b_ratio(&self) -> f64 {
        self.geometry.a / self.geometry.b
    }

    pub fn a_h_ratio(&self) -> f64 {
        self.geometry.a / self.geometry.h
    }
}

/// Axes of a parameter sweep. Empty axes fall back to the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub gradient_index: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<f64>,
    #[serde(default)]
    pub a_b_ratio: Vec<f64>,
    #[serde(default)]
    pub a_h_ratio: Vec<f64>,
    #[serde(default)]
    pub bc: Vec<Bc>,
}

/// `[base]` holds a full analysis config; `[grid]` the swept axes. The edge
/// `a` stays fixed, `b = a / (a/b)` and `h = a / (a/h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: AnalysisConfig,
    #[serde(default)]
    pub grid: Grid,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        cfg.base.validate().map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("base.{m}")),
            other => other,
        })?;
        for (path, values) in [("grid.a_b_ratio", &cfg.grid.a_b_ratio), ("grid.a_h_ratio", &cfg.grid.a_h_ratio)] {
            for &v in values.iter() {
                positive(path, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_toml(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Cartesian product in lexicographic order over
    /// (gradient index, mu, a/b, a/h, bc).
    pub fn expand(&self) -> Result<Vec<AnalysisConfig>, CliError> {
        let base = &self.base;
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let ns = or(&self.grid.gradient_index, base.material.gradient_index);
        let mus = or(&self.grid.mu, base.nonlocal.mu);
        // geometry axes left empty keep the base dimensions untouched
        let opt = |v: &Vec<f64>| if v.is_empty() { vec![None] } else { v.iter().map(|&x| Some(x)).collect() };
        let abs = opt(&self.grid.a_b_ratio);
        let ahs = opt(&self.grid.a_h_ratio);
        let bcs = if self.grid.bc.is_empty() { vec![base.bc] } else { self.grid.bc.clone() };
        let mut out = Vec::with_capacity(ns.len() * mus.len() * abs.len() * ahs.len() * bcs.len());
        for &n in &ns {
            for &mu in &mus {
                for &ab in &abs {
                    for &ah in &ahs {
                        for &bc in &bcs {
                            let mut c = base.clone();
                            c.material.gradient_index = n;
                            c.nonlocal.mu = mu;
                            if let Some(ab) = ab {
                                c.geometry.b = c.geometry.a / ab;
                            }
                            if let Some(ah) = ah {
                                c.geometry.h = c.geometry.a / ah;
                            }
                            c.bc = bc;
                            c.validate()?;
                            out.push(c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
