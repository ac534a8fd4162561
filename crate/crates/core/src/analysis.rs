//! End-to-end pipeline for one rectangular plate: patch, section, assembly,
//! constraints and eigen solve.

use crate::assembly::{apply_bcs, assemble, BoundaryCondition, DofMap, Field, GlobalSystem, NonlocalParams};
use crate::error::{Error, Result};
use crate::material::{section_constants, FgmProfile, SectionProperties};
use crate::modal::{solve_modes_with, ModalResult, SolveOptions};
use crate::nurbs::{make_patch, PatchMesh};

/// Plate geometry and discretization, independent of the nonlocal parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSpec {
    pub a: f64,
    pub b: f64,
    pub profile: FgmProfile,
    pub kappa: f64,
    pub degree: usize,
    pub net: (usize, usize),
    pub bc: BoundaryCondition,
}

/// A plate with its assembled, constrained local and gradient mass parts.
///
/// The nonlocal parameter only enters through `M = M0 + mu Mg`, so one model
/// serves any number of `mu` values.
#[derive(Debug, Clone)]
pub struct PlateModel {
    pub spec: PlateSpec,
    pub patch: PatchMesh,
    pub section: SectionProperties,
    pub system: GlobalSystem,
}

/// Frequencies of one solve, with the nondimensional values attached.
#[derive(Debug, Clone)]
pub struct PlateModes {
    pub modal: ModalResult,
    pub omega_nd: Vec<f64>,
    pub dofs: usize,
}

impl PlateModel {
    pub fn build(spec: PlateSpec) -> Result<Self> {
        if !(spec.a > 0.0 && spec.b > 0.0) {
            return Err(Error::Validation(format!("plate dimensions must be positive, got {} x {}", spec.a, spec.b)));
        }
        let patch = make_patch(spec.a, spec.b, spec.degree, spec.net.0, spec.net.1)?;
        let section = section_constants(&spec.profile, spec.kappa)?;
        let full = assemble(&patch, &section, NonlocalParams::local())?;
        let system = apply_bcs(&full, spec.bc)?;
        Ok(Self { spec, patch, section, system })
    }

    pub fn num_dofs(&self) -> usize {
        self.system.num_dofs()
    }

    /// Reference scale `h sqrt(rho_c / G_c)` used for nondimensional output.
    pub fn reference(&self) -> (f64, f64, f64) {
        let c = &self.spec.profile.constituents;
        (self.spec.profile.thickness, c.rho_c, c.g_c())
    }

    pub fn solve(&self, mu: f64, count: usize) -> Result<PlateModes> {
        self.solve_with(mu, count, &SolveOptions::default())
    }

    pub fn solve_with(&self, mu: f64, count: usize, opts: &SolveOptions) -> Result<PlateModes> {
        let system = self.system.with_nonlocal(NonlocalParams::new(mu)?);
        let modal = solve_modes_with(&system, count, opts)?;
        let (h, rho_c, g_c) = self.reference();
        let omega_nd = modal.nondimensional(h, rho_c, g_c)?;
        Ok(PlateModes { modal, omega_nd, dofs: system.num_dofs() })
    }

    /// Transverse deflection coefficients (one per control point) of a mode.
    pub fn deflection(&self, modes: &ModalResult, index: usize) -> Result<Vec<f64>> {
        if index >= modes.modes.ncols() {
            return Err(Error::Validation(format!("mode {index} not computed")));
        }
        let col: Vec<f64> = modes.modes.column(index).iter().copied().collect();
        let full = self.system.dof_map.expand(&col)?;
        Ok(DofMap::field_coefficients(&full, Field::W0))
    }
}
