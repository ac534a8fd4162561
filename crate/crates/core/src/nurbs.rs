//! Tensor-product NURBS bases and rectangular plate patches.
//!
//! A [`PatchMesh`] couples two open knot vectors with a control net and
//! weights. Elements are the nonzero knot-span rectangles; every
//! evaluation works on the `(p+1)(q+1)` functions supported on one
//! element, never on the full basis.

use nalgebra::{DMatrix, Matrix2, Point2};

use crate::error::{Error, Result};

/// Open (clamped) knot vector of degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::Validation(format!(
                "knot vector of length {} too short for degree {p}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::Validation("knot values must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Validation("knot vector must be non-decreasing".into()));
        }
        let last = knots.len() - 1;
        let (first_val, last_val) = (knots[0], knots[last]);
        if first_val == last_val {
            return Err(Error::Validation("knot vector spans an empty interval".into()));
        }
        let clamped_start = knots[..=p].iter().all(|&k| k == first_val) && knots[p + 1] > first_val;
        let clamped_end = knots[last - p..].iter().all(|&k| k == last_val) && knots[last - p - 1] < last_val;
        if !clamped_start || !clamped_end {
            return Err(Error::Validation(format!(
                "end knots must each repeat exactly {} times",
                p + 1
            )));
        }
        Ok(Self { knots, degree })
    }

    /// Open knot vector on [0, 1] with `n_basis` functions and equally
    /// spaced interior knots.
    pub fn open_uniform(degree: usize, n_basis: usize) -> Result<Self> {
        if n_basis < degree + 1 {
            return Err(Error::InsufficientControlPoints {
                count: n_basis,
                degree,
            });
        }
        let n_spans = n_basis - degree;
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..n_spans).map(|i| i as f64 / n_spans as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Indices `s` with `knots[s] < knots[s+1]`, in ascending order.
    pub fn nonzero_spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis())
            .filter(|&s| self.knots[s] < self.knots[s + 1])
            .collect()
    }

    /// Span containing `xi`; the last knot maps to the final nonzero span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        if !(lo..=hi).contains(&xi) {
            return Err(Error::Domain {
                what: "xi",
                value: xi,
                lo,
                hi,
            });
        }
        let n = self.num_basis();
        if xi == hi {
            return Ok(n - 1);
        }
        // first index with knots[i] > xi, minus one
        let upper = self.knots[..=n].partition_point(|&k| k <= xi);
        Ok((upper - 1).clamp(self.degree, n - 1))
    }

    fn check_span(&self, span: usize, xi: f64) -> Result<()> {
        let n = self.num_basis();
        if span < self.degree || span >= n || self.knots[span] >= self.knots[span + 1] {
            return Err(Error::Validation(format!("span {span} is not a nonzero knot span")));
        }
        let (lo, hi) = (self.knots[span], self.knots[span + 1]);
        if !(lo..=hi).contains(&xi) {
            return Err(Error::Domain {
                what: "xi",
                value: xi,
                lo,
                hi,
            });
        }
        Ok(())
    }

    /// Greville abscissae: the control-point parameters that make the
    /// geometry map affine.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.num_basis())
                .map(|i| 0.5 * (self.knots[i] + self.knots[i + 1]))
                .collect();
        }
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }
}

/// Nonzero B-spline values `N_{span-p..=span, p}(xi)`.
pub fn bspline_basis(kv: &KnotVector, span: usize, xi: f64) -> Result<Vec<f64>> {
    kv.check_span(span, xi)?;
    Ok(basis_unchecked(&kv.knots, kv.degree, span, xi))
}

fn basis_unchecked(knots: &[f64], p: usize, span: usize, xi: f64) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = xi - knots[span + 1 - j];
        right[j] = knots[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Values and derivatives up to order `k` of the `p+1` functions
/// supported on `span`: entry `(i, d)` is `d^d N_{span-p+i} / dxi^d`.
pub fn bspline_basis_derivs(kv: &KnotVector, span: usize, xi: f64, k: usize) -> Result<DMatrix<f64>> {
    if k > kv.degree {
        return Err(Error::UnsupportedDerivativeOrder {
            order: k,
            degree: kv.degree,
        });
    }
    kv.check_span(span, xi)?;
    let ders = derivs_unchecked(&kv.knots, kv.degree, span, xi, k);
    Ok(DMatrix::from_fn(kv.degree + 1, k + 1, |i, d| ders[d][i]))
}

fn derivs_unchecked(knots: &[f64], p: usize, span: usize, xi: f64, k: usize) -> Vec<Vec<f64>> {
    // ndu holds basis functions (upper triangle) and knot differences (lower)
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = xi - knots[span + 1 - j];
        right[j] = knots[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; k + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for kk in 1..=k {
            let mut d = 0.0;
            let rk = r as isize - kk as isize;
            let pk = p - kk;
            if r >= kk {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r <= pk + 1 { kk - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                d += a[s2][kk] * ndu[r][pk];
            }
            ders[kk][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for (kk, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= fac;
        }
        fac *= (p - kk) as f64;
    }
    ders
}

/// One knot-span rectangle of a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub span_u: usize,
    pub span_v: usize,
    pub xi_range: (f64, f64),
    pub eta_range: (f64, f64),
    /// Control-point indices of the supported functions, `u` running fastest.
    pub connectivity: Vec<usize>,
}

impl Element {
    /// Parametric area `dxi * deta`.
    pub fn parametric_area(&self) -> f64 {
        (self.xi_range.1 - self.xi_range.0) * (self.eta_range.1 - self.eta_range.0)
    }

    /// Map a point of the reference square `[-1, 1]^2` into the element.
    pub fn from_reference(&self, r: f64, s: f64) -> (f64, f64) {
        let (a, b) = self.xi_range;
        let (c, d) = self.eta_range;
        (0.5 * (a + b) + 0.5 * (b - a) * r, 0.5 * (c + d) + 0.5 * (d - c) * s)
    }
}

/// Rational basis evaluated at one parametric point of one element.
#[derive(Debug, Clone)]
pub struct BasisEval {
    /// Control-point indices, aligned with every per-function vector below.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Parametric derivatives `(dR/dxi, dR/deta)`.
    pub grad_param: Vec<[f64; 2]>,
    /// Physical derivatives `(dR/dx, dR/dy)`.
    pub grad: Vec<[f64; 2]>,
    /// `[[dx/dxi, dx/deta], [dy/dxi, dy/deta]]`
    pub jacobian: Matrix2<f64>,
    pub det_j: f64,
}

impl BasisEval {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Single tensor-product NURBS patch. Control points are stored with the
/// `u` index running fastest: `index = i + j * n_u`.
#[derive(Debug, Clone)]
pub struct PatchMesh {
    knot_u: KnotVector,
    knot_v: KnotVector,
    control_points: Vec<Point2<f64>>,
    weights: Vec<f64>,
    elements: Vec<Element>,
}

impl PatchMesh {
    pub fn new(
        knot_u: KnotVector,
        knot_v: KnotVector,
        control_points: Vec<Point2<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let (nu, nv) = (knot_u.num_basis(), knot_v.num_basis());
        if control_points.len() != nu * nv {
            return Err(Error::Validation(format!(
                "control net has {} points, basis needs {nu} x {nv}",
                control_points.len()
            )));
        }
        if weights.len() != control_points.len() {
            return Err(Error::Validation("one weight per control point required".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Validation("weights must be strictly positive".into()));
        }
        let (p, q) = (knot_u.degree(), knot_v.degree());
        let mut elements = Vec::new();
        for &sv in &knot_v.nonzero_spans() {
            for &su in &knot_u.nonzero_spans() {
                let connectivity = (0..=q)
                    .flat_map(|b| (0..=p).map(move |a| (su - p + a) + (sv - q + b) * nu))
                    .collect();
                elements.push(Element {
                    span_u: su,
                    span_v: sv,
                    xi_range: (knot_u.knots[su], knot_u.knots[su + 1]),
                    eta_range: (knot_v.knots[sv], knot_v.knots[sv + 1]),
                    connectivity,
                });
            }
        }
        Ok(Self {
            knot_u,
            knot_v,
            control_points,
            weights,
            elements,
        })
    }

    pub fn knot_u(&self) -> &KnotVector {
        &self.knot_u
    }

    pub fn knot_v(&self) -> &KnotVector {
        &self.knot_v
    }

    pub fn control_points(&self) -> &[Point2<f64>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Control-net dimensions `(n_u, n_v)`.
    pub fn grid_size(&self) -> (usize, usize) {
        (self.knot_u.num_basis(), self.knot_v.num_basis())
    }

    pub fn num_control_points(&self) -> usize {
        self.control_points.len()
    }

    /// Functions per element, `(p+1)(q+1)`.
    pub fn functions_per_element(&self) -> usize {
        (self.knot_u.degree() + 1) * (self.knot_v.degree() + 1)
    }

    /// Index of the element containing `(xi, eta)`.
    pub fn locate(&self, xi: f64, eta: f64) -> Result<usize> {
        let su = self.knot_u.find_span(xi)?;
        let sv = self.knot_v.find_span(eta)?;
        self.elements
            .iter()
            .position(|e| e.span_u == su && e.span_v == sv)
            .ok_or_else(|| Error::Validation(format!("no element for spans ({su}, {sv})")))
    }

    /// Rational basis, parametric and physical gradients at `(xi, eta)`
    /// inside `element`.
    pub fn eval_basis(&self, element: usize, xi: f64, eta: f64) -> Result<BasisEval> {
        let el = self
            .elements
            .get(element)
            .ok_or_else(|| Error::Validation(format!("element {element} out of range")))?;
        let (p, q) = (self.knot_u.degree(), self.knot_v.degree());
        self.knot_u.check_span(el.span_u, xi)?;
        self.knot_v.check_span(el.span_v, eta)?;
        let du = derivs_unchecked(&self.knot_u.knots, p, el.span_u, xi, p.min(1));
        let dv = derivs_unchecked(&self.knot_v.knots, q, el.span_v, eta, q.min(1));
        let du1 = |a: usize| if p > 0 { du[1][a] } else { 0.0 };
        let dv1 = |b: usize| if q > 0 { dv[1][b] } else { 0.0 };

        let n_fun = (p + 1) * (q + 1);
        let mut weighted = Vec::with_capacity(n_fun);
        let (mut w_sum, mut w_xi, mut w_eta) = (0.0, 0.0, 0.0);
        for b in 0..=q {
            for a in 0..=p {
                let w = self.weights[el.connectivity[a + b * (p + 1)]];
                let n = du[0][a] * dv[0][b] * w;
                let n_xi = du1(a) * dv[0][b] * w;
                let n_eta = du[0][a] * dv1(b) * w;
                w_sum += n;
                w_xi += n_xi;
                w_eta += n_eta;
                weighted.push((n, n_xi, n_eta));
            }
        }

        let mut values = Vec::with_capacity(n_fun);
        let mut grad_param = Vec::with_capacity(n_fun);
        let mut jac: Matrix2<f64> = Matrix2::zeros();
        for (k, &(n, n_xi, n_eta)) in weighted.iter().enumerate() {
            let r = n / w_sum;
            let r_xi = (n_xi - r * w_xi) / w_sum;
            let r_eta = (n_eta - r * w_eta) / w_sum;
            let cp = &self.control_points[el.connectivity[k]];
            jac[(0, 0)] += cp.x * r_xi;
            jac[(0, 1)] += cp.x * r_eta;
            jac[(1, 0)] += cp.y * r_xi;
            jac[(1, 1)] += cp.y * r_eta;
            values.push(r);
            grad_param.push([r_xi, r_eta]);
        }

        let det_j = jac.determinant();
        if !(det_j > 1e-14 * jac.norm_squared().max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateGeometry { det_j, xi, eta });
        }
        // [dR/dx, dR/dy] = J^{-T} [dR/dxi, dR/deta]
        let inv_t = jac.try_inverse().ok_or(Error::DegenerateGeometry { det_j, xi, eta })?.transpose();
        let grad = grad_param
            .iter()
            .map(|g| {
                [
                    inv_t[(0, 0)] * g[0] + inv_t[(0, 1)] * g[1],
                    inv_t[(1, 0)] * g[0] + inv_t[(1, 1)] * g[1],
                ]
            })
            .collect();

        Ok(BasisEval {
            indices: el.connectivity.clone(),
            values,
            grad_param,
            grad,
            jacobian: jac,
            det_j,
        })
    }

    /// Physical position of parametric point `(xi, eta)`.
    pub fn point(&self, xi: f64, eta: f64) -> Result<Point2<f64>> {
        let e = self.locate(xi, eta)?;
        let basis = self.eval_basis(e, xi, eta)?;
        Ok(basis
            .indices
            .iter()
            .zip(&basis.values)
            .fold(Point2::origin(), |acc, (&i, &r)| acc + self.control_points[i].coords * r))
    }

    /// Interpolate a scalar field given by one coefficient per control point.
    pub fn interpolate(&self, coeffs: &[f64], xi: f64, eta: f64) -> Result<f64> {
        if coeffs.len() != self.num_control_points() {
            return Err(Error::Validation("one coefficient per control point required".into()));
        }
        let e = self.locate(xi, eta)?;
        let basis = self.eval_basis(e, xi, eta)?;
        Ok(basis.indices.iter().zip(&basis.values).map(|(&i, &r)| coeffs[i] * r).sum())
    }

    /// Control indices lying on the patch boundary, split by edge family:
    /// `(on xi = const edges, on eta = const edges)`.
    pub fn boundary_points(&self) -> (Vec<usize>, Vec<usize>) {
        let (nu, nv) = self.grid_size();
        let xi_edges = (0..nv).flat_map(|j| [j * nu, nu - 1 + j * nu]).collect();
        let eta_edges = (0..nu).flat_map(|i| [i, i + (nv - 1) * nu]).collect();
        (xi_edges, eta_edges)
    }
}

/// Rectangular `[0, a] x [0, b]` patch with open uniform knots, control
/// points at the Greville abscissae and unit weights. The geometry map is
/// affine: `x = a * xi`, `y = b * eta`.
pub fn make_patch(a: f64, b: f64, degree: usize, n_u: usize, n_v: usize) -> Result<PatchMesh> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Validation(format!("plate dimensions must be positive, got {a} x {b}")));
    }
    for n in [n_u, n_v] {
        if n < degree + 1 {
            return Err(Error::InsufficientControlPoints { count: n, degree });
        }
    }
    let ku = KnotVector::open_uniform(degree, n_u)?;
    let kv = KnotVector::open_uniform(degree, n_v)?;
    let (gu, gv) = (ku.greville(), kv.greville());
    let control_points = gv
        .iter()
        .flat_map(|&y| gu.iter().map(move |&x| Point2::new(a * x, b * y)))
        .collect();
    PatchMesh::new(ku, kv, control_points, vec![1.0; n_u * n_v])
}
