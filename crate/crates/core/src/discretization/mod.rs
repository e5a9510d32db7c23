//! Mesh, Taylor-Hood bases and quadrature.

mod mesh;
mod quadrature;
pub mod shape;

pub use mesh::{
    build_structured_grid, BoundaryEdge, EdgePoint, Element, ElementMap, FieldSample, Mesh2D,
    NodalField, PointKinematics,
};
pub use quadrature::{LineRule, QuadratureRule};
