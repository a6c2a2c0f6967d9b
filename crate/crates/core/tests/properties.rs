use proptest::prelude::*;

use qedft_maps::hilbert::{FermionSector, PhotonSpace};
use qedft_maps::maps::{
    format_float, invert_map, linspace, plateau_width, polarizability, trapezoid, xc_potential, InversionOptions,
    Profile,
};
use qedft_maps::model::{build_hamiltonian, build_transformed, Frame, ModelParams};
use qedft_maps::observables::photon_number_defect;
use qedft_maps::solver::{
    dense_ground_state, lanczos_ground_state, mf_branches, solve_exact, SolverOptions,
};

fn model() -> impl Strategy<Value = ModelParams> {
    (0usize..3, 0.0..6.0f64, 0.0..2.0f64, -4.0..4.0f64, -4.0..4.0f64).prop_map(|(kind, u0, lambda, v, j)| {
        let base = match kind {
            0 => ModelParams::two_site(1, 0),
            1 => ModelParams::two_site(1, 1),
            _ => ModelParams::four_site(),
        };
        base.with_u0(u0).with_lambda(lambda).with_external(v, j)
    })
}

fn two_site() -> impl Strategy<Value = ModelParams> {
    (prop::bool::ANY, 0.0..6.0f64, 0.0..2.0f64).prop_map(|(two, u0, lambda)| {
        let base = if two { ModelParams::two_site(1, 1) } else { ModelParams::two_site(1, 0) };
        base.with_u0(u0).with_lambda(lambda)
    })
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonians_are_hermitian(p in model(), cutoff in 1usize..8) {
        let p = p.with_cutoff(cutoff);
        let h = build_hamiltonian(&p).unwrap();
        let ht = build_transformed(&p).unwrap();
        prop_assert!(h.is_hermitian() && h.hermitian_defect() < 1e-12);
        prop_assert!(ht.is_hermitian() && ht.hermitian_defect() < 1e-12);
    }

    #[test]
    fn bilinears_conserve_number_and_are_adjoint_pairs(sites in prop::sample::select(vec![2usize, 4]), n_up in 0usize..3, n_down in 0usize..3, a in 0usize..8, b in 0usize..8) {
        let n_up = n_up.min(sites);
        let n_down = n_down.min(sites);
        let s = FermionSector::new(sites, n_up, n_down).unwrap();
        let (a, b) = (a % s.n_modes(), b % s.n_modes());
        let ab = s.bilinear(a, b).unwrap();
        let ba = s.bilinear(b, a).unwrap();
        let comm = ab.commutator(&s.total_number()).unwrap();
        prop_assert!(comm.max_abs() < 1e-12);
        prop_assert!(ab.adjoint().sub(&ba).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn quadratures_are_tridiagonal(cutoff in 1usize..40, omega in 0.2..3.0f64) {
        let ph = PhotonSpace::new(cutoff, omega).unwrap();
        let l = ph.ladder();
        for (r, c, x) in l.q.iter() {
            prop_assert!(x == 0.0 || r.abs_diff(c) == 1);
        }
        for (r, c, x) in l.p.iter() {
            prop_assert!(x.norm() == 0.0 || r.abs_diff(c) == 1);
        }
    }

    #[test]
    fn dense_and_lanczos_agree(p in model(), cutoff in 2usize..10) {
        let h = build_hamiltonian(&p.with_cutoff(cutoff)).unwrap();
        let e1 = dense_ground_state(&h, &opts()).unwrap().energy;
        let e2 = lanczos_ground_state(&h, &opts(), None).unwrap().energy;
        prop_assert!((e1 - e2).abs() < 1e-10, "{} vs {}", e1, e2);
    }

    #[test]
    fn photon_constraint_and_number_identity(p in model()) {
        let pt = solve_exact(&p, &SolverOptions { frame: Frame::Direct, ..opts() }).unwrap();
        let o = &pt.observables;
        let w = p.omega;
        prop_assert!((o.q - p.lambda / w * o.d + p.j_ext / w.powi(3)).abs() < 1e-8);
        prop_assert!(photon_number_defect(o, w).abs() < 1e-8 * (1.0 + o.n_photon));
        prop_assert!(o.d.abs() <= p.max_dipole() + 1e-12);
        prop_assert!(o.rdm_eigs.iter().all(|&n| n > -1e-10));
    }

    #[test]
    fn polaritonic_collapse(p in model()) {
        let direct = SolverOptions { frame: Frame::Direct, ..opts() };
        let a = solve_exact(&p, &direct).unwrap().observables.d;
        let p0 = p.clone().with_external(p.v_tilde(), 0.0);
        let b = solve_exact(&p0, &direct).unwrap().observables.d;
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn dipole_is_odd_in_the_potential(p in model()) {
        let v = p.v_ext;
        let p = p.with_external(v, 0.0);
        let plus = solve_exact(&p, &opts()).unwrap().observables;
        let minus = solve_exact(&p.clone().with_external(-p.v_ext, 0.0), &opts()).unwrap().observables;
        prop_assert!((plus.d + minus.d).abs() < 1e-9);
        prop_assert!((plus.q + minus.q).abs() < 1e-9);
    }

    #[test]
    fn mean_field_is_an_upper_bound(p in model()) {
        let exact = solve_exact(&p, &opts()).unwrap().observables.energy;
        let mf = mf_branches(&p, &[], &opts()).unwrap();
        prop_assert!(mf.selected.energy >= exact - 1e-10, "{} < {}", mf.selected.energy, exact);
    }

    #[test]
    fn uncoupled_xc_energy_vanishes(p in model()) {
        let o = solve_exact(&p.with_lambda(0.0), &opts()).unwrap().observables;
        prop_assert!(o.e_xc.abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inversion_round_trip(p in two_site(), frac in -0.95..0.95f64, q in -2.0..2.0f64) {
        let d = frac * p.max_dipole();
        let inv = InversionOptions::default();
        let r = invert_map(&p, d, q, &opts(), &inv).unwrap();
        prop_assume!(!r.root.resolution_limited);
        let o = solve_exact(&p.clone().with_external(r.v_ext, r.j_ext), &opts()).unwrap().observables;
        prop_assert!((o.d - d).abs() < 1e-8, "d {} vs {}", o.d, d);
        prop_assert!((o.q - q).abs() < 1e-8, "q {} vs {}", o.q, q);
    }

    #[test]
    fn floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn polarizability_integrates_to_endpoint_difference(ys in prop::collection::vec(-3.0..3.0f64, 3..60), lo in -5.0..0.0f64, width in 0.5..10.0f64) {
        let x = linspace(lo, lo + width, ys.len());
        let prof = Profile::new(x.clone(), ys.clone()).unwrap();
        let a = polarizability(&prof).unwrap();
        let n = ys.len();
        prop_assert!((trapezoid(&x, &a) - (ys[n - 1] - ys[0])).abs() < 1e-9);
        let w = plateau_width(&prof, 0.0, 0.5);
        prop_assert!((0.0..=width + 1e-12).contains(&w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn xc_potential_is_odd(p in two_site(), frac in 0.05..0.9f64, q in -1.0..1.0f64) {
        let d = frac * p.max_dipole();
        let inv = InversionOptions::default();
        let a = xc_potential(&p, d, q, &opts(), &inv).unwrap();
        let b = xc_potential(&p, -d, -q, &opts(), &inv).unwrap();
        prop_assume!(!a.lambda_inversion.root.resolution_limited && !b.lambda_inversion.root.resolution_limited);
        prop_assert!((a.v_xc + b.v_xc).abs() < 1e-9, "{} vs {}", a.v_xc, b.v_xc);
    }
}

#[test]
fn self_energy_is_a_constant_for_one_electron() {
    for lambda in [0.3, 1.0, 2.0] {
        let p = ModelParams::two_site(1, 0).with_lambda(lambda).with_external(0.7, -0.4);
        let off = solve_exact(&p.clone().with_self_energy(false), &opts()).unwrap().observables;
        let on = solve_exact(&p.clone().with_self_energy(true), &opts()).unwrap().observables;
        assert!((on.energy - off.energy - lambda * lambda / 2.0).abs() < 1e-10);
        assert!((on.d - off.d).abs() < 1e-10);
        assert!((on.q - off.q).abs() < 1e-10);
        assert!((on.n_photon - off.n_photon).abs() < 1e-10);
    }
}

#[test]
fn parity_symmetric_point() {
    for p in [
        ModelParams::two_site(1, 0).with_lambda(1.0),
        ModelParams::two_site(1, 1).with_u0(5.0).with_lambda(1.0),
        ModelParams::four_site().with_u0(2.0).with_lambda(1.0),
    ] {
        let o = solve_exact(&p, &opts()).unwrap().observables;
        assert!(o.d.abs() < 1e-10 && o.q.abs() < 1e-10, "{} {}", o.d, o.q);
    }
}

#[test]
fn single_determinant_has_zero_entropy() {
    let o = solve_exact(&ModelParams::two_site(1, 0).with_external(1.3, 2.0), &opts()).unwrap().observables;
    assert!(o.s_corr.abs() < 1e-10);
    assert!(o.rdm_eigs.iter().all(|&n| n.abs() < 1e-8 || (n - 1.0).abs() < 1e-8));
}
