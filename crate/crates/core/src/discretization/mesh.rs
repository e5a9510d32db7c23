use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};

use super::shape::{q1_shape, q2_shape, quadratic_1d, EDGE_NODES};
use crate::error::{Error, Result};

/// Nine Q2 node ids and four Q1 (pressure) ids of one quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub q2: [usize; 9],
    pub q1: [usize; 4],
}

/// One element side lying on the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub element: usize,
    /// Local side index, 0..4 (bottom, right, top, left).
    pub side: usize,
    /// Q2 node ids (start, mid, end) in counter-clockwise order.
    pub q2: [usize; 3],
    /// Q1 ids of the two end points.
    pub q1: [usize; 2],
}

/// Isoparametric map evaluated at a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMap {
    /// `jacobian[(i, j)] = ∂x_i/∂ξ_j`.
    pub jacobian: Matrix2<f64>,
    pub det: f64,
    pub inverse: Matrix2<f64>,
    pub point: Vector2<f64>,
}

/// Everything the element kernels need at one quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointKinematics {
    pub element: usize,
    pub xi: [f64; 2],
    /// Quadrature weight times the current mapping determinant.
    pub dv: f64,
    pub n2: [f64; 9],
    /// Q2 gradients with respect to the current coordinates x.
    pub grad2: [[f64; 2]; 9],
    /// Q2 gradients with respect to the initial coordinates X.
    pub grad2_material: [[f64; 2]; 9],
    pub n1: [f64; 4],
    pub grad1: [[f64; 2]; 4],
}

/// Value and gradients of a nodal field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    /// One entry per field component.
    pub value: Vec<f64>,
    /// `spatial_gradient[c] = ∇_x` of component c.
    pub spatial_gradient: Vec<[f64; 2]>,
    /// `material_gradient[c] = ∇_X` of component c.
    pub material_gradient: Vec<[f64; 2]>,
}

/// A nodal field in one of the two numberings.
#[derive(Debug, Clone, Copy)]
pub enum NodalField<'a> {
    /// Two components per Q2 node, interleaved `[u_x0, u_y0, u_x1, ...]`.
    Q2Vector(&'a [f64]),
    /// One value per Q1 node.
    Q1Scalar(&'a [f64]),
}

/// Structured quadrilateral mesh carrying both the initial and the current
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    initial: Vec<Vector2<f64>>,
    current: Vec<Vector2<f64>>,
    elements: Vec<Element>,
    pressure_nodes: Vec<usize>,
    regions: BTreeMap<String, Vec<BoundaryEdge>>,
}

fn invert_2x2(j: &Matrix2<f64>, det: f64) -> Matrix2<f64> {
    Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det
}

/// Rectangular `lx × ly` domain split into `nx × ny` biquadratic elements,
/// with regions `left`, `right`, `bottom`, `top`.
pub fn build_structured_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!(
            "element counts must be positive, got {nx} x {ny}"
        )));
    }
    if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
        return Err(Error::InvalidInput(format!(
            "domain lengths must be positive, got {lx} x {ly}"
        )));
    }
    let row = 2 * nx + 1;
    let node = |i: usize, j: usize| j * row + i;
    let mut initial = Vec::with_capacity(row * (2 * ny + 1));
    for j in 0..=2 * ny {
        for i in 0..=2 * nx {
            initial.push(Vector2::new(
                lx * i as f64 / (2 * nx) as f64,
                ly * j as f64 / (2 * ny) as f64,
            ));
        }
    }
    let mut pressure_nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            pressure_nodes.push(node(2 * i, 2 * j));
        }
    }
    let q1 = |i: usize, j: usize| j * (nx + 1) + i;

    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let (i, j) = (2 * ex, 2 * ey);
            elements.push(Element {
                q2: [
                    node(i, j),
                    node(i + 2, j),
                    node(i + 2, j + 2),
                    node(i, j + 2),
                    node(i + 1, j),
                    node(i + 2, j + 1),
                    node(i + 1, j + 2),
                    node(i, j + 1),
                    node(i + 1, j + 1),
                ],
                q1: [q1(ex, ey), q1(ex + 1, ey), q1(ex + 1, ey + 1), q1(ex, ey + 1)],
            });
        }
    }

    let edge = |e: usize, side: usize| {
        let el = &elements[e];
        let [a, m, b] = EDGE_NODES[side];
        BoundaryEdge {
            element: e,
            side,
            q2: [el.q2[a], el.q2[m], el.q2[b]],
            q1: [el.q1[a], el.q1[b]],
        }
    };
    let mut regions = BTreeMap::new();
    regions.insert(
        "bottom".to_string(),
        (0..nx).map(|ex| edge(ex, 0)).collect::<Vec<_>>(),
    );
    regions.insert(
        "right".to_string(),
        (0..ny).map(|ey| edge(ey * nx + nx - 1, 1)).collect(),
    );
    regions.insert(
        "top".to_string(),
        (0..nx).map(|ex| edge((ny - 1) * nx + ex, 2)).collect(),
    );
    regions.insert(
        "left".to_string(),
        (0..ny).map(|ey| edge(ey * nx, 3)).collect(),
    );

    Ok(Mesh2D {
        current: initial.clone(),
        initial,
        elements,
        pressure_nodes,
        regions,
    })
}

impl Mesh2D {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_q2_nodes(&self) -> usize {
        self.initial.len()
    }

    pub fn n_q1_nodes(&self) -> usize {
        self.pressure_nodes.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.elements[e]
    }

    pub fn initial_coords(&self) -> &[Vector2<f64>] {
        &self.initial
    }

    pub fn current_coords(&self) -> &[Vector2<f64>] {
        &self.current
    }

    /// Q2 node id of each Q1 node.
    pub fn pressure_nodes(&self) -> &[usize] {
        &self.pressure_nodes
    }

    pub fn region(&self, name: &str) -> Result<&[BoundaryEdge]> {
        self.regions
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("unknown boundary region `{name}`")))
    }

    pub fn region_names(&self) -> impl Iterator<Item = &str> {
        self.regions.keys().map(String::as_str)
    }

    /// Splits `source` into two new regions by the initial-configuration
    /// x-coordinate of each edge midpoint. `source` itself is kept.
    pub fn split_region_at_x(
        &mut self,
        source: &str,
        x_split: f64,
        below: &str,
        above: &str,
    ) -> Result<()> {
        let edges = self.region(source)?.to_vec();
        let (lo, hi): (Vec<_>, Vec<_>) = edges
            .into_iter()
            .partition(|e| self.initial[e.q2[1]].x < x_split);
        self.regions.insert(below.to_string(), lo);
        self.regions.insert(above.to_string(), hi);
        Ok(())
    }

    /// Q2 node ids touched by a region, sorted and deduplicated.
    pub fn region_q2_nodes(&self, name: &str) -> Result<Vec<usize>> {
        let mut ids: Vec<usize> = self.region(name)?.iter().flat_map(|e| e.q2).collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    /// Q1 ids touched by a region, sorted and deduplicated.
    pub fn region_q1_nodes(&self, name: &str) -> Result<Vec<usize>> {
        let mut ids: Vec<usize> = self.region(name)?.iter().flat_map(|e| e.q1).collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    pub fn map_element(&self, e: usize, xi: [f64; 2]) -> Result<ElementMap> {
        self.map_with(&self.current, e, xi)
    }

    /// The same map in the initial configuration.
    pub fn map_element_initial(&self, e: usize, xi: [f64; 2]) -> Result<ElementMap> {
        self.map_with(&self.initial, e, xi)
    }

    fn map_with(&self, coords: &[Vector2<f64>], e: usize, xi: [f64; 2]) -> Result<ElementMap> {
        let el = self
            .elements
            .get(e)
            .ok_or_else(|| Error::InvalidInput(format!("element {e} out of range")))?;
        let s = q2_shape(xi);
        let mut jac = Matrix2::zeros();
        let mut point = Vector2::zeros();
        for (a, &n) in el.q2.iter().enumerate() {
            let x = coords[n];
            point += x * s.values[a];
            for i in 0..2 {
                for j in 0..2 {
                    jac[(i, j)] += x[i] * s.gradients[a][j];
                }
            }
        }
        let det = jac[(0, 0)] * jac[(1, 1)] - jac[(0, 1)] * jac[(1, 0)];
        if !(det > 0.0) {
            return Err(Error::InvertedElement {
                element: e,
                det,
                xi: xi[0],
                eta: xi[1],
            });
        }
        Ok(ElementMap {
            jacobian: jac,
            det,
            inverse: invert_2x2(&jac, det),
            point,
        })
    }

    /// Shape functions and both gradient flavours at `xi`; `weight` is the
    /// reference quadrature weight.
    pub fn kinematics(&self, e: usize, xi: [f64; 2], weight: f64) -> Result<PointKinematics> {
        let cur = self.map_element(e, xi)?;
        let init = self.map_element_initial(e, xi)?;
        let s2 = q2_shape(xi);
        let s1 = q1_shape(xi);
        let push = |g: [f64; 2], inv: &Matrix2<f64>| {
            // ∂N/∂x_j = ∂N/∂ξ_k ∂ξ_k/∂x_j
            [
                g[0] * inv[(0, 0)] + g[1] * inv[(1, 0)],
                g[0] * inv[(0, 1)] + g[1] * inv[(1, 1)],
            ]
        };
        let mut grad2 = [[0.0; 2]; 9];
        let mut grad2_material = [[0.0; 2]; 9];
        for a in 0..9 {
            grad2[a] = push(s2.gradients[a], &cur.inverse);
            grad2_material[a] = push(s2.gradients[a], &init.inverse);
        }
        let mut grad1 = [[0.0; 2]; 4];
        for a in 0..4 {
            grad1[a] = push(s1.gradients[a], &cur.inverse);
        }
        Ok(PointKinematics {
            element: e,
            xi,
            dv: weight * cur.det,
            n2: s2.values,
            grad2,
            grad2_material,
            n1: s1.values,
            grad1,
        })
    }

    /// Samples a nodal field (value, ∇_x, ∇_X) inside element `e`.
    pub fn recover_gradients(
        &self,
        field: NodalField<'_>,
        e: usize,
        xi: [f64; 2],
    ) -> Result<FieldSample> {
        match field {
            NodalField::Q2Vector(u) => {
                check_len(u.len(), 2 * self.n_q2_nodes())?;
            }
            NodalField::Q1Scalar(p) => {
                check_len(p.len(), self.n_q1_nodes())?;
            }
        }
        let k = self.kinematics(e, xi, 1.0)?;
        let el = &self.elements[e];
        Ok(match field {
            NodalField::Q2Vector(u) => {
                let mut value = vec![0.0; 2];
                let mut gx = vec![[0.0; 2]; 2];
                let mut gm = vec![[0.0; 2]; 2];
                for (a, &n) in el.q2.iter().enumerate() {
                    for c in 0..2 {
                        let un = u[2 * n + c];
                        value[c] += k.n2[a] * un;
                        for d in 0..2 {
                            gx[c][d] += k.grad2[a][d] * un;
                            gm[c][d] += k.grad2_material[a][d] * un;
                        }
                    }
                }
                FieldSample {
                    value,
                    spatial_gradient: gx,
                    material_gradient: gm,
                }
            }
            NodalField::Q1Scalar(p) => {
                let init = self.map_element_initial(e, xi)?;
                let s1 = q1_shape(xi);
                let mut value = 0.0;
                let mut gx = [0.0; 2];
                let mut gm = [0.0; 2];
                for (a, &n) in el.q1.iter().enumerate() {
                    value += k.n1[a] * p[n];
                    let g = s1.gradients[a];
                    for d in 0..2 {
                        gx[d] += k.grad1[a][d] * p[n];
                        gm[d] += (g[0] * init.inverse[(0, d)] + g[1] * init.inverse[(1, d)]) * p[n];
                    }
                }
                FieldSample {
                    value: vec![value],
                    spatial_gradient: vec![gx],
                    material_gradient: vec![gm],
                }
            }
        })
    }

    /// Translates the current nodes by `delta_u`; the initial configuration
    /// is untouched. Fails if any element inverts.
    pub fn update_coordinates(&self, delta_u: &[f64]) -> Result<Mesh2D> {
        check_len(delta_u.len(), 2 * self.n_q2_nodes())?;
        let mut next = self.clone();
        for (n, x) in next.current.iter_mut().enumerate() {
            x.x += delta_u[2 * n];
            x.y += delta_u[2 * n + 1];
        }
        next.check_orientation()?;
        Ok(next)
    }

    /// Snapshot whose current configuration is `X + u_total`.
    pub fn with_displacement(&self, u_total: &[f64]) -> Result<Mesh2D> {
        check_len(u_total.len(), 2 * self.n_q2_nodes())?;
        let mut next = self.clone();
        for (n, x) in next.current.iter_mut().enumerate() {
            let x0 = self.initial[n];
            *x = Vector2::new(x0.x + u_total[2 * n], x0.y + u_total[2 * n + 1]);
        }
        next.check_orientation()?;
        Ok(next)
    }

    /// Total displacement `x - X` of every Q2 node, interleaved.
    pub fn displacement(&self) -> Vec<f64> {
        self.current
            .iter()
            .zip(&self.initial)
            .flat_map(|(x, x0)| [x.x - x0.x, x.y - x0.y])
            .collect()
    }

    /// Verifies a positive mapping determinant at every 3×3 Gauss point and
    /// at the element nodes.
    pub fn check_orientation(&self) -> Result<()> {
        let rule = super::QuadratureRule::volume_default();
        for e in 0..self.elements.len() {
            for xi in rule.points.iter().chain(super::shape::Q2_NODES.iter()) {
                self.map_element(e, *xi)?;
            }
        }
        Ok(())
    }

    /// Current-configuration geometry of a boundary edge at parameter
    /// `s ∈ [-1, 1]`: shape values of the three edge nodes, the physical
    /// point, the length element `|dx/ds|` and the outward unit normal.
    pub fn edge_geometry(&self, edge: &BoundaryEdge, s: f64) -> EdgePoint {
        let (n, dn) = quadratic_1d(s);
        let mut point = Vector2::zeros();
        let mut tangent = Vector2::zeros();
        for k in 0..3 {
            let x = self.current[edge.q2[k]];
            point += x * n[k];
            tangent += x * dn[k];
        }
        let jac = tangent.norm();
        EdgePoint {
            shape: n,
            pressure_shape: [0.5 * (1.0 - s), 0.5 * (1.0 + s)],
            point,
            jacobian: jac,
            normal: Vector2::new(tangent.y, -tangent.x) / jac,
        }
    }

    /// First element whose initial-configuration footprint contains `p`,
    /// with the reference coordinates of `p` in it.
    pub fn locate_initial(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let target = Vector2::new(p[0], p[1]);
        let tol = 1e-10;
        for e in 0..self.elements.len() {
            // Newton iteration on the isoparametric map; exact in one step for
            // affine elements.
            let mut xi = [0.0, 0.0];
            for _ in 0..20 {
                let Ok(m) = self.map_element_initial(e, xi) else {
                    break;
                };
                let r = target - m.point;
                let d = m.inverse * r;
                xi[0] += d[0];
                xi[1] += d[1];
                if d.norm() < 1e-14 {
                    break;
                }
            }
            if xi.iter().all(|v| v.abs() <= 1.0 + tol) {
                let xi = [xi[0].clamp(-1.0, 1.0), xi[1].clamp(-1.0, 1.0)];
                return Some((e, xi));
            }
        }
        None
    }

    /// Q2 node closest to `p` in the initial configuration.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let target = Vector2::new(p[0], p[1]);
        let mut best = (0, f64::INFINITY);
        for (n, x) in self.initial.iter().enumerate() {
            let d = (x - target).norm_squared();
            if d < best.1 {
                best = (n, d);
            }
        }
        best.0
    }

    /// Current area of the whole mesh.
    pub fn area(&self) -> Result<f64> {
        let rule = super::QuadratureRule::volume_default();
        let mut total = 0.0;
        for e in 0..self.elements.len() {
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                total += w * self.map_element(e, *xi)?.det;
            }
        }
        Ok(total)
    }

    /// Q1 field extended to every Q2 node by bilinear interpolation.
    pub fn pressure_at_q2_nodes(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(p.len(), self.n_q1_nodes())?;
        let mut out = vec![0.0; self.n_q2_nodes()];
        for el in &self.elements {
            for (a, &n) in el.q2.iter().enumerate() {
                let s = q1_shape(super::shape::Q2_NODES[a]);
                out[n] = el.q1.iter().zip(s.values).map(|(&q, v)| v * p[q]).sum();
            }
        }
        Ok(out)
    }
}

/// See [`Mesh2D::edge_geometry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub shape: [f64; 3],
    pub pressure_shape: [f64; 2],
    pub point: Vector2<f64>,
    pub jacobian: f64,
    pub normal: Vector2<f64>,
}

fn check_len(actual: usize, expected: usize) -> Result<()> {
    if actual != expected {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(())
}
