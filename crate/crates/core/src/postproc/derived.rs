use nalgebra::Matrix3;

use crate::assembly::Assembler;
use crate::discretization::Mesh2D;
use crate::error::Result;

/// Darcy seepage velocity `−K(∇p − ρ_f(f − ü))`.
pub fn seepage_velocity(
    k: &Matrix3<f64>,
    rho_f: f64,
    grad_p: [f64; 2],
    accel: [f64; 2],
    fluid_force: [f64; 2],
) -> [f64; 2] {
    let d = [
        grad_p[0] - rho_f * (fluid_force[0] - accel[0]),
        grad_p[1] - rho_f * (fluid_force[1] - accel[1]),
    ];
    [
        -(k[(0, 0)] * d[0] + k[(0, 1)] * d[1]),
        -(k[(1, 0)] * d[0] + k[(1, 1)] * d[1]),
    ]
}

/// Post-processed fields on one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    /// Element-averaged volume ratio `J`.
    pub volume_ratio: Vec<f64>,
    /// Element-averaged stored energy density, J/m³.
    pub energy: Vec<f64>,
    /// Total pressure at the Q1 nodes, Pa.
    pub pressure: Vec<f64>,
    /// Seepage velocity at element centres, m/s.
    pub seepage: Vec<[f64; 2]>,
    /// Global dissipation `∫K∇p·∇p`, W.
    pub dissipation: f64,
}

impl DerivedFields {
    /// Evaluates all fields on the mesh's current configuration.
    pub fn compute(
        assembler: &Assembler,
        mesh: &Mesh2D,
        p: &[f64],
        accel: &[f64],
        fluid_force: [f64; 2],
    ) -> Result<Self> {
        let el = assembler.element_fields(mesh, p)?;
        Ok(Self {
            seepage: assembler.element_seepage(mesh, p, accel, fluid_force)?,
            dissipation: el.dissipation.iter().sum(),
            volume_ratio: el.volume_ratio,
            energy: el.energy,
            pressure: p.to_vec(),
        })
    }

    pub fn seepage_magnitude(&self) -> Vec<f64> {
        self.seepage.iter().map(|w| w[0].hypot(w[1])).collect()
    }
}

/// Dissipation `∫K∇p·∇p` on the mesh's current configuration.
pub fn dissipation(assembler: &Assembler, mesh: &Mesh2D, p: &[f64]) -> Result<f64> {
    Ok(assembler.element_fields(mesh, p)?.dissipation.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{FluidParams, SolidParams};
    use crate::discretization::build_structured_grid;

    fn assembler(mesh: &Mesh2D) -> Assembler {
        let solid = SolidParams {
            lambda: 29e6,
            mu: 7e6,
            rho_s0: 2700.0,
            phi_s0: 0.58,
        };
        let fluid = FluidParams {
            rho_f0: 1000.0,
            kappa_f: 22e9,
            p0: 0.0,
            k0: 2e-5,
            varkappa: 0.8,
        };
        Assembler::new(mesh, solid, fluid).unwrap()
    }

    #[test]
    fn dissipation_of_linear_pressure() {
        let mesh = build_structured_grid(2, 3, 1.0, 1.0).unwrap();
        let asm = assembler(&mesh);
        let ys: Vec<f64> = mesh.pressure_nodes().iter().map(|&n| mesh.initial_coords()[n].y).collect();
        let c = 300.0;
        let p: Vec<f64> = ys.iter().map(|y| c * y).collect();
        let psi = dissipation(&asm, &mesh, &p).unwrap();
        assert!((psi - 2e-5 * c * c).abs() < 1e-12 * psi);
        let p2: Vec<f64> = p.iter().map(|v| 2.0 * v).collect();
        assert!((dissipation(&asm, &mesh, &p2).unwrap() - 4.0 * psi).abs() < 1e-12 * psi);
        let uniform = vec![5e3; p.len()];
        assert!(dissipation(&asm, &mesh, &uniform).unwrap().abs() < 1e-14);
    }

    #[test]
    fn fields_at_rest() {
        let mesh = build_structured_grid(2, 2, 1.0, 1.0).unwrap();
        let asm = assembler(&mesh);
        let f = DerivedFields::compute(&asm, &mesh, &[0.0; 9], &vec![0.0; 50], [0.0; 2]).unwrap();
        assert!(f.volume_ratio.iter().all(|&j| (j - 1.0).abs() < 1e-14));
        assert!(f.energy.iter().all(|&w| w.abs() < 1e-9));
        assert!(f.seepage_magnitude().iter().all(|&w| w == 0.0));
        assert_eq!(f.dissipation, 0.0);
    }

    #[test]
    fn seepage_cases() {
        let k0 = 1.019e-5;
        let k = Matrix3::identity() * k0;
        assert_eq!(seepage_velocity(&k, 1000.0, [0.0; 2], [0.0; 2], [0.0; 2]), [0.0, 0.0]);
        let w = seepage_velocity(&k, 1000.0, [0.0, 250.0], [0.0; 2], [0.0; 2]);
        assert_eq!(w, [-0.0, -k0 * 250.0]);
        // hydrostatic balance: ∇p = ρ_f f gives no flow
        let w = seepage_velocity(&k, 1000.0, [0.0, -9810.0], [0.0; 2], [0.0, -9.81]);
        assert!(w[1].abs() < 1e-15);
    }
}
