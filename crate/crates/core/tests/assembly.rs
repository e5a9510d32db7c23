mod common;

use common::*;
use porosim::assembly::*;
use porosim::discretization::build_structured_grid;
use porosim::reference::{LinearBiotSystem, LinearState};
use proptest::prelude::*;


proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn tangent_matches_residual_differences(seed in any::<u64>()) {
        let (solid_err, fluid_err) = tangent_check(seed);
        prop_assert!(solid_err <= 1e-4, "solid block {solid_err:e}");
        prop_assert!(fluid_err <= 1e-4, "fluid block {fluid_err:e}");
    }
}

#[test]
fn predictor_at_rest_equals_linear_backward_difference() {
    let mesh = build_structured_grid(2, 3, 2.0, 3.0).unwrap();
    let asm = Assembler::new(&mesh, solid(), fluid()).unwrap();
    let loads = top_load(1e5, LoadProfile::Heaviside);
    let bc = oedometer_bc(&mesh);
    let (z, zp) = rest(&asm);
    let inc = Increments {
        du: &z,
        du_prev: &z,
        dp: &zp,
    };
    let dt = 0.01;
    let nl = asm.assemble_predictor(&mesh, &zp, &inc, &loads, 0, dt).unwrap();
    let lin = LinearBiotSystem::assemble(&mesh, &solid(), &fluid(), &loads, &bc).unwrap();
    let state = LinearState {
        k: 0,
        u: z.clone(),
        p: zp.clone(),
        du: z.clone(),
        du_prev: z.clone(),
        velocity: z.clone(),
        accel: z,
    };
    let bd = lin.bd_system(&state, dt);
    for (name, a, b) in [
        ("mass", &nl.muu, &bd.muu),
        ("stiffness", &nl.auu, &bd.auu),
        ("coupling", &nl.bup, &bd.bup),
        ("divergence", &nl.cpu, &bd.cpu),
        ("dynamic darcy", &nl.npu, &bd.npu),
        ("permeability", &nl.kpp, &bd.kpp),
        ("compressibility", &nl.dpp, &bd.dpp),
    ] {
        let rel = a.frobenius_distance(b) / b.frobenius_norm();
        assert!(rel <= 1e-10, "{name}: {rel:e}");
    }
    assert!(rel_err(&nl.f, &bd.f) <= 1e-12);
    assert!(norm(&nl.g) == 0.0 && norm(&bd.g) == 0.0);
}

#[test]
fn single_element_stiffness_is_symmetric_with_rigid_modes() {
    let mesh = build_structured_grid(1, 1, 1.0, 1.0).unwrap();
    let asm = Assembler::new(&mesh, solid(), fluid()).unwrap();
    let (z, zp) = rest(&asm);
    let inc = Increments {
        du: &z,
        du_prev: &z,
        dp: &zp,
    };
    let sys = asm.assemble_predictor(&mesh, &zp, &inc, &LoadCase::default(), 0, 1.0).unwrap();
    assert!(sys.auu.asymmetry() <= 1e-12 * sys.auu.frobenius_norm());
    let coords = mesh.initial_coords();
    let translation: Vec<f64> = coords.iter().flat_map(|_| [1.0, 0.0]).collect();
    let rotation: Vec<f64> = coords.iter().flat_map(|x| [-x.y, x.x]).collect();
    for mode in [translation, rotation] {
        let r = sys.auu.mul_vec(&mode);
        assert!(norm(&r) <= 1e-8 * sys.auu.frobenius_norm());
    }
}

#[test]
fn uniform_traction_gives_uniform_strain() {
    let strains = patch_strains(1e5);
    let dev = strain_spread(&strains);
    assert!(dev <= 1e-10, "strain deviation {dev:e}");
    let expected = uniaxial_strain(1e5);
    assert!((strains[0][1] - expected).abs() <= 1e-10 * expected.abs());
}

#[test]
fn initial_system_balances_momentum() {
    let mesh = build_structured_grid(1, 4, 1.0, 4.0).unwrap();
    let asm = Assembler::new(&mesh, solid(), fluid()).unwrap();
    let (z, zp) = rest(&asm);
    let init = asm.assemble_initial(&mesh, &z, &zp, &top_load(5e4, LoadProfile::Heaviside)).unwrap();
    let fy: f64 = init.accel_rhs.iter().skip(1).step_by(2).sum();
    assert!((fy + 5e4).abs() <= 1e-9 * 5e4);
    let total_mass: f64 = init.mass.values().iter().sum::<f64>() / 2.0;
    let s = solid();
    let rho = s.phi_s0 * s.rho_s0 + (1.0 - s.phi_s0) * fluid().rho_f0;
    assert!((total_mass - 4.0 * rho).abs() <= 1e-10 * total_mass);
}

