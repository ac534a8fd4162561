//! Element and global matrices of the nonlocal FSDT plate.
//!
//! Five fields per control point, ordered `(u0, v0, w0, theta_x, theta_y)`.
//! The nonlocal operator `(1 - mu lap)` lands on the inertia terms; after
//! integration by parts it contributes the gradient mass
//! `mu * int grad(N)^T I grad(N)`, so `M = M0 + mu * Mg` with `K` unchanged.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix5, Matrix6};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::material::SectionProperties;
use crate::nurbs::{BasisEval, PatchMesh};
use crate::quadrature::gauss_legendre;

pub const DOFS_PER_POINT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    U0 = 0,
    V0 = 1,
    W0 = 2,
    ThetaX = 3,
    ThetaY = 4,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::U0, Field::V0, Field::W0, Field::ThetaX, Field::ThetaY];
}

/// Nonlocal parameter `mu = (e0 a)^2`, in squared length units of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NonlocalParams {
    pub mu: f64,
}

impl NonlocalParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Validation(format!("nonlocal parameter must be >= 0, got {mu}")));
        }
        Ok(Self { mu })
    }

    /// From the material constant `e0` and internal length `a`.
    pub fn from_internal_length(e0: f64, a: f64) -> Result<Self> {
        Self::new((e0 * a).powi(2))
    }

    pub fn local() -> Self {
        Self { mu: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// All edges simply supported.
    Ssss,
    /// All edges clamped.
    Cccc,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Ssss => "SSSS",
            BoundaryCondition::Cccc => "CCCC",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SSSS" => Ok(Self::Ssss),
            "CCCC" => Ok(Self::Cccc),
            _ => Err(Error::Validation(format!("unknown boundary condition '{s}' (expected SSSS or CCCC)"))),
        }
    }
}

impl BoundaryCondition {
    /// Fields fixed on the `x = 0, a` edges and on the `y = 0, b` edges.
    pub fn edge_fields(&self) -> (&'static [Field], &'static [Field]) {
        match self {
            BoundaryCondition::Ssss => (
                &[Field::U0, Field::W0, Field::ThetaY],
                &[Field::V0, Field::W0, Field::ThetaX],
            ),
            BoundaryCondition::Cccc => (&Field::ALL, &Field::ALL),
        }
    }
}

/// Global dof numbering (`5 * point + field`) and the free/constrained split.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    grid: (usize, usize),
    free: Vec<usize>,
    constrained: Vec<usize>,
}

impl DofMap {
    pub fn unconstrained(grid: (usize, usize)) -> Self {
        Self {
            grid,
            free: (0..grid.0 * grid.1 * DOFS_PER_POINT).collect(),
            constrained: Vec::new(),
        }
    }

    /// Control net `(n_u, n_v)` the numbering refers to.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn total(&self) -> usize {
        self.grid.0 * self.grid.1 * DOFS_PER_POINT
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn dof(point: usize, field: Field) -> usize {
        DOFS_PER_POINT * point + field as usize
    }

    /// Scatter a free-dof vector into the full numbering (constrained dofs zero).
    pub fn expand(&self, reduced: &[f64]) -> Result<DVector<f64>> {
        if reduced.len() != self.free.len() {
            return Err(Error::Validation(format!(
                "vector has {} entries, dof map has {} free dofs",
                reduced.len(),
                self.free.len()
            )));
        }
        let mut full = DVector::zeros(self.total());
        for (&g, &v) in self.free.iter().zip(reduced) {
            full[g] = v;
        }
        Ok(full)
    }

    /// Per-control-point coefficients of one field from a full vector.
    pub fn field_coefficients(full: &DVector<f64>, field: Field) -> Vec<f64> {
        full.iter().skip(field as usize).step_by(DOFS_PER_POINT).copied().collect()
    }
}

/// Constrained global dofs of a `(n_u, n_v)` net under `bc`.
pub fn constrained_dofs(grid: (usize, usize), bc: BoundaryCondition) -> BTreeSet<usize> {
    let (nu, nv) = grid;
    let (x_fields, y_fields) = bc.edge_fields();
    let mut set = BTreeSet::new();
    for j in 0..nv {
        for i in 0..nu {
            let pt = i + j * nu;
            if i == 0 || i == nu - 1 {
                set.extend(x_fields.iter().map(|&f| DofMap::dof(pt, f)));
            }
            if j == 0 || j == nv - 1 {
                set.extend(y_fields.iter().map(|&f| DofMap::dof(pt, f)));
            }
        }
    }
    set
}

/// Strain-displacement operators at one evaluation point. Column
/// `5 * a + f` belongs to field `f` of the `a`-th supported function.
#[derive(Debug, Clone)]
pub struct StrainOperators {
    /// Field values, 5 rows.
    pub shape: DMatrix<f64>,
    /// Membrane strains `(u,x; v,y; u,y + v,x)`.
    pub membrane: DMatrix<f64>,
    /// Curvatures `(tx,x; ty,y; tx,y + ty,x)`.
    pub bending: DMatrix<f64>,
    /// Transverse shear `(tx + w,x; ty + w,y)`.
    pub shear: DMatrix<f64>,
    /// Row `2 f + d`: derivative of field `f` along direction `d`.
    pub gradient: DMatrix<f64>,
}

pub fn strain_operators(basis: &BasisEval) -> StrainOperators {
    let nd = DOFS_PER_POINT * basis.len();
    let mut shape = DMatrix::zeros(5, nd);
    let mut membrane = DMatrix::zeros(3, nd);
    let mut bending = DMatrix::zeros(3, nd);
    let mut shear = DMatrix::zeros(2, nd);
    let mut gradient = DMatrix::zeros(10, nd);
    for (a, (&n, g)) in basis.values.iter().zip(&basis.grad).enumerate() {
        let c = DOFS_PER_POINT * a;
        let (u, v, w, tx, ty) = (c, c + 1, c + 2, c + 3, c + 4);
        let [nx, ny] = *g;
        for f in 0..5 {
            shape[(f, c + f)] = n;
            gradient[(2 * f, c + f)] = nx;
            gradient[(2 * f + 1, c + f)] = ny;
        }
        membrane[(0, u)] = nx;
        membrane[(1, v)] = ny;
        membrane[(2, u)] = ny;
        membrane[(2, v)] = nx;

        bending[(0, tx)] = nx;
        bending[(1, ty)] = ny;
        bending[(2, tx)] = ny;
        bending[(2, ty)] = nx;

        shear[(0, tx)] = n;
        shear[(0, w)] = nx;
        shear[(1, ty)] = n;
        shear[(1, w)] = ny;
    }
    StrainOperators {
        shape,
        membrane,
        bending,
        shear,
        gradient,
    }
}

/// Element stiffness and the two mass contributions, before `mu` is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub stiffness: DMatrix<f64>,
    /// Consistent local mass `int N^T I N`.
    pub mass_local: DMatrix<f64>,
    /// Gradient mass `int Bg^T I~ Bg`.
    pub mass_gradient: DMatrix<f64>,
}

impl ElementMatrices {
    pub fn mass(&self, mu: f64) -> DMatrix<f64> {
        &self.mass_local + &self.mass_gradient * mu
    }
}

/// Element matrices with the default `(p+1) x (q+1)` Gauss rule.
pub fn element_parts(patch: &PatchMesh, element: usize, section: &SectionProperties) -> Result<ElementMatrices> {
    let (p, q) = (patch.knot_u().degree(), patch.knot_v().degree());
    element_parts_with_rule(patch, element, section, (p + 1, q + 1))
}

/// `(Ke, Me)` for a given nonlocal parameter.
pub fn element_matrices(
    patch: &PatchMesh,
    element: usize,
    section: &SectionProperties,
    nl: NonlocalParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let parts = element_parts(patch, element, section)?;
    let mass = parts.mass(nl.mu);
    Ok((parts.stiffness, mass))
}

pub fn element_parts_with_rule(
    patch: &PatchMesh,
    element: usize,
    section: &SectionProperties,
    rule: (usize, usize),
) -> Result<ElementMatrices> {
    let el = patch
        .elements()
        .get(element)
        .ok_or_else(|| Error::Assembly(format!("element {element} out of range")))?;
    let nen = el.connectivity.len();
    let nd = DOFS_PER_POINT * nen;
    let (gx, gwx) = gauss_legendre(rule.0);
    let (gy, gwy) = gauss_legendre(rule.1);
    let scale = 0.25 * el.parametric_area();

    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&section.a);
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&section.b);
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&section.b);
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&section.d);
    let c = DMatrix::from_column_slice(6, 6, c.as_slice());
    let es = DMatrix::from_column_slice(2, 2, section.shear.as_slice());

    let mut stiffness = DMatrix::zeros(nd, nd);
    let mut m_nn = DMatrix::zeros(nen, nen);
    let mut m_gg = DMatrix::zeros(nen, nen);
    for (&s, &ws) in gy.iter().zip(&gwy) {
        for (&r, &wr) in gx.iter().zip(&gwx) {
            let (xi, eta) = el.from_reference(r, s);
            let basis = patch.eval_basis(element, xi, eta)?;
            if basis.det_j <= 0.0 {
                return Err(Error::DegenerateGeometry {
                    det_j: basis.det_j,
                    xi,
                    eta,
                });
            }
            let da = basis.det_j * scale * wr * ws;
            let ops = strain_operators(&basis);
            let mut bpb = DMatrix::zeros(6, nd);
            bpb.rows_mut(0, 3).copy_from(&ops.membrane);
            bpb.rows_mut(3, 3).copy_from(&ops.bending);
            let cb = &c * &bpb;
            stiffness.gemm_tr(da, &bpb, &cb, 1.0);
            let sb = &es * &ops.shear;
            stiffness.gemm_tr(da, &ops.shear, &sb, 1.0);

            for a in 0..nen {
                let (na, ga) = (basis.values[a], basis.grad[a]);
                for b in 0..nen {
                    let (nb, gb) = (basis.values[b], basis.grad[b]);
                    m_nn[(a, b)] += na * nb * da;
                    m_gg[(a, b)] += (ga[0] * gb[0] + ga[1] * gb[1]) * da;
                }
            }
        }
    }

    let inertia = section.inertia_matrix();
    Ok(ElementMatrices {
        stiffness: symmetrize(stiffness),
        mass_local: expand_scalar_kernel(&m_nn, &inertia),
        mass_gradient: expand_scalar_kernel(&m_gg, &inertia),
    })
}

/// `out[5a + f, 5b + g] = inertia[f, g] * kernel[a, b]`
fn expand_scalar_kernel(kernel: &DMatrix<f64>, inertia: &Matrix5<f64>) -> DMatrix<f64> {
    let nen = kernel.nrows();
    DMatrix::from_fn(DOFS_PER_POINT * nen, DOFS_PER_POINT * nen, |i, j| {
        inertia[(i % DOFS_PER_POINT, j % DOFS_PER_POINT)] * kernel[(i / DOFS_PER_POINT, j / DOFS_PER_POINT)]
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Assembled stiffness and mass over the dofs listed in `dof_map.free()`.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: DMatrix<f64>,
    pub mass_local: DMatrix<f64>,
    pub mass_gradient: DMatrix<f64>,
    /// `mass_local + mu * mass_gradient`
    pub mass: DMatrix<f64>,
    pub mu: f64,
    pub dof_map: DofMap,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.stiffness.nrows()
    }

    /// Same stiffness with the mass rebuilt for another nonlocal parameter.
    pub fn with_nonlocal(&self, nl: NonlocalParams) -> Self {
        Self {
            mass: &self.mass_local + &self.mass_gradient * nl.mu,
            mu: nl.mu,
            ..self.clone()
        }
    }
}

/// Scatter-add of all element matrices (element work runs in parallel).
pub fn assemble(patch: &PatchMesh, section: &SectionProperties, nl: NonlocalParams) -> Result<GlobalSystem> {
    let (p, q) = (patch.knot_u().degree(), patch.knot_v().degree());
    assemble_with_rule(patch, section, nl, (p + 1, q + 1))
}

pub fn assemble_with_rule(
    patch: &PatchMesh,
    section: &SectionProperties,
    nl: NonlocalParams,
    rule: (usize, usize),
) -> Result<GlobalSystem> {
    let nl = NonlocalParams::new(nl.mu)?;
    let n_pts = patch.num_control_points();
    let per_element = patch.functions_per_element();
    for (e, el) in patch.elements().iter().enumerate() {
        if el.connectivity.len() != per_element || el.connectivity.iter().any(|&i| i >= n_pts) {
            return Err(Error::Assembly(format!("element {e} has inconsistent connectivity")));
        }
    }
    let parts: Vec<ElementMatrices> = (0..patch.elements().len())
        .into_par_iter()
        .map(|e| element_parts_with_rule(patch, e, section, rule))
        .collect::<Result<_>>()?;

    let n = n_pts * DOFS_PER_POINT;
    let mut k = DMatrix::zeros(n, n);
    let mut m0 = DMatrix::zeros(n, n);
    let mut mg = DMatrix::zeros(n, n);
    for (el, em) in patch.elements().iter().zip(&parts) {
        let dofs: Vec<usize> = el
            .connectivity
            .iter()
            .flat_map(|&pt| (0..DOFS_PER_POINT).map(move |f| DOFS_PER_POINT * pt + f))
            .collect();
        for (li, &gi) in dofs.iter().enumerate() {
            for (lj, &gj) in dofs.iter().enumerate() {
                k[(gi, gj)] += em.stiffness[(li, lj)];
                m0[(gi, gj)] += em.mass_local[(li, lj)];
                mg[(gi, gj)] += em.mass_gradient[(li, lj)];
            }
        }
    }
    let mass = &m0 + &mg * nl.mu;
    Ok(GlobalSystem {
        stiffness: k,
        mass_local: m0,
        mass_gradient: mg,
        mass,
        mu: nl.mu,
        dof_map: DofMap::unconstrained(patch.grid_size()),
    })
}

/// Eliminate the rows and columns of dofs fixed by `bc`.
pub fn apply_bcs(system: &GlobalSystem, bc: BoundaryCondition) -> Result<GlobalSystem> {
    if !system.dof_map.constrained.is_empty() {
        return Err(Error::Validation("boundary conditions already applied".into()));
    }
    let grid = system.dof_map.grid;
    let constrained = constrained_dofs(grid, bc);
    let free: Vec<usize> = (0..system.dof_map.total()).filter(|d| !constrained.contains(d)).collect();
    if free.is_empty() {
        return Err(Error::OverConstrained);
    }
    let reduce = |m: &DMatrix<f64>| m.select_rows(&free).select_columns(&free);
    Ok(GlobalSystem {
        stiffness: reduce(&system.stiffness),
        mass_local: reduce(&system.mass_local),
        mass_gradient: reduce(&system.mass_gradient),
        mass: reduce(&system.mass),
        mu: system.mu,
        dof_map: DofMap {
            grid,
            free,
            constrained: constrained.into_iter().collect(),
        },
    })
}
