//! Lagrange bases on the reference square.
//!
//! Local node order (both bases share the corners):
//!
//! ```text
//!  3 --- 6 --- 2
//!  |           |
//!  7     8     5
//!  |           |
//!  0 --- 4 --- 1
//! ```

/// Reference coordinates of the nine Q2 nodes.
pub const Q2_NODES: [[f64; 2]; 9] = [
    [-1.0, -1.0],
    [1.0, -1.0],
    [1.0, 1.0],
    [-1.0, 1.0],
    [0.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [-1.0, 0.0],
    [0.0, 0.0],
];

/// Reference coordinates of the four Q1 nodes (the Q2 corners).
pub const Q1_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Per-axis 1D node index (0 → -1, 1 → 0, 2 → +1) of each Q2 node.
const Q2_AXIS_INDEX: [[usize; 2]; 9] = [
    [0, 0],
    [2, 0],
    [2, 2],
    [0, 2],
    [1, 0],
    [2, 1],
    [1, 2],
    [0, 1],
    [1, 1],
];

/// Local Q2 node triples (start, mid, end) of the four edges, traversed
/// counter-clockwise: bottom, right, top, left.
pub const EDGE_NODES: [[usize; 3]; 4] = [[0, 4, 1], [1, 5, 2], [2, 6, 3], [3, 7, 0]];

/// Shape values and reference gradients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval<const N: usize> {
    pub values: [f64; N],
    /// `gradients[a] = [∂N_a/∂ξ, ∂N_a/∂η]`.
    pub gradients: [[f64; 2]; N],
}

/// 1D quadratic Lagrange basis at nodes -1, 0, 1 and its derivative.
pub fn quadratic_1d(s: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)],
        [s - 0.5, -2.0 * s, s + 0.5],
    )
}

pub fn q2_shape(xi: [f64; 2]) -> ShapeEval<9> {
    let (lx, dx) = quadratic_1d(xi[0]);
    let (ly, dy) = quadratic_1d(xi[1]);
    let mut values = [0.0; 9];
    let mut gradients = [[0.0; 2]; 9];
    for (a, &[i, j]) in Q2_AXIS_INDEX.iter().enumerate() {
        values[a] = lx[i] * ly[j];
        gradients[a] = [dx[i] * ly[j], lx[i] * dy[j]];
    }
    ShapeEval { values, gradients }
}

pub fn q1_shape(xi: [f64; 2]) -> ShapeEval<4> {
    let mut values = [0.0; 4];
    let mut gradients = [[0.0; 2]; 4];
    for (a, node) in Q1_NODES.iter().enumerate() {
        let fx = 1.0 + xi[0] * node[0];
        let fy = 1.0 + xi[1] * node[1];
        values[a] = 0.25 * fx * fy;
        gradients[a] = [0.25 * node[0] * fy, 0.25 * fx * node[1]];
    }
    ShapeEval { values, gradients }
}
