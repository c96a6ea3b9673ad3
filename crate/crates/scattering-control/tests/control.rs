use grid_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scattering_control::*;
use wave_solver::energy;

/// Speeds (1, 2, 0.5) with interfaces at 1 and 2, `Θ = [−0.5, 4.5]`, `T = 2`.
fn two_interface(cells: usize) -> (Setup64, Cauchy64) {
    let g = Grid::new_1d(cells + 1, 12.0 / cells as f64, -5.0).unwrap();
    let m = Medium::from_layered(g, Layered::new(vec![1.0, 2.0], vec![1.0, 2.0, 0.5]).unwrap());
    let s = setup(g, &m);
    let h0 = rightward_pulse(s.prop(), -0.1, 0.35);
    (s, h0)
}

fn constant(cells: usize) -> (Setup64, Cauchy64) {
    let g = Grid::new_1d(cells + 1, 14.0 / cells as f64, -5.0).unwrap();
    let m = Medium::constant(g, 1.0).unwrap();
    let s = setup(g, &m);
    let h0 = rightward_pulse(s.prop(), -0.1, 0.35);
    (s, h0)
}

fn setup(g: Grid64, m: &Medium64) -> Setup64 {
    let theta = Region::interval(-0.5, 4.5);
    let omega = Region::interval(0.25, 4.5);
    let nest = DomainNest::new(g, omega, omega, omega, theta, 2.0).unwrap();
    ControlSetup::new(m, &nest, 0.5, 1e-12, 50_000).unwrap()
}

fn random_data(grid: Grid64, seed: u64) -> Cauchy64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
    let u1 = ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
    CauchyData::with_dirichlet(u0, u1).unwrap()
}

#[test]
fn constant_medium_is_a_fixed_point_at_k_zero() {
    let (s, h0) = constant(600);
    let mut opts = IterationOptions::new(10);
    opts.stop_when_stabilized = true;
    let trace = scattering_control_iterate(&s, &h0, &opts).unwrap();
    assert_eq!(trace.rows.len(), 1);
    assert_eq!(trace.stabilized_at, Some(0));
    let e0 = s.energy(&h0);
    let row = trace.rows[0];
    assert!(row.step_norm < 1e-6 * trace.h0_norm);
    assert!(((row.recovered_e - e0) / e0).abs() < 1e-8);
    // An equipartitioned travelling pulse: half its energy is kinetic.
    assert!(((row.recovered_ke - 0.5 * e0) / e0).abs() < 1e-3, "{}", row.recovered_ke / e0);
}

#[test]
fn almost_direct_transmission_in_simple_cases() {
    let (s, h0) = constant(600);
    let adt = almost_direct_transmission(&s, &h0).unwrap();
    let e0 = s.energy(&h0);
    assert!(((adt.energy - e0) / e0).abs() < 1e-6);
    let zero = almost_direct_transmission(&s, &CauchyData::zeros(*h0.grid())).unwrap();
    assert_eq!(zero.energy, 0.0);
    assert_eq!(zero.h_dt.max_abs(), 0.0);
}

#[test]
fn transmitted_energy_approaches_the_flux_product() {
    // Flux transmission (1 − r²) with r = 1/3 and r = −3/5.
    let target = 128.0 / 225.0;
    let errs: Vec<f64> = [800, 1600]
        .iter()
        .map(|&cells| {
            let (s, h0) = two_interface(cells);
            let adt = almost_direct_transmission(&s, &h0).unwrap();
            assert!(adt.extension_energy < 1e-8 * adt.energy);
            (adt.energy / s.energy(&h0) - target).abs() / target
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < 0.01, "{errs:?}");
}

#[test]
fn data_outside_theta_are_rejected() {
    let (s, _) = two_interface(400);
    let outside = rightward_pulse(s.prop(), -2.0, 0.3);
    assert!(matches!(almost_direct_transmission(&s, &outside), Err(ControlError::Support { .. })));
    let opts = IterationOptions::new(2);
    assert!(scattering_control_iterate(&s, &outside, &opts).is_err());
}

#[test]
fn two_interface_iteration_isolates_the_direct_transmission() {
    let (s, h0) = two_interface(800);
    let adt = almost_direct_transmission(&s, &h0).unwrap();
    let mut opts = IterationOptions::new(30);
    opts.oracle = Some(&adt);
    let trace = scattering_control_iterate(&s, &h0, &opts).unwrap();
    let n0 = trace.h0_norm;
    for w in trace.rows.windows(2) {
        assert!(w[1].inside_norm <= w[0].inside_norm + 1e-6 * n0, "inside norm rose at k = {}", w[1].k);
    }
    for r in &trace.rows {
        assert!(r.pi_bar_violation.unwrap() < 1e-8 * n0);
        assert!(r.norm_pstar_r_pstar_r <= r.norm_pstar_r + 1e-8 * n0);
        assert!(r.norm_pstar_r <= r.norm_h + 1e-8 * n0);
    }
    let mis = |k: usize| trace.rows[k].interior_mismatch.unwrap();
    assert!(mis(0) > mis(10));
    assert!(mis(30) < 1e-2, "mismatch {}", mis(30));
    assert!(trace.converged());

    let last = trace.rows.last().unwrap();
    assert!(((last.recovered_e - adt.energy) / adt.energy).abs() < 0.05);
    assert!(((last.recovered_ke - adt.kinetic_energy) / adt.kinetic_energy).abs() < 0.05);
    assert_eq!(recover_energy(&trace).len(), trace.rows.len());
    assert_eq!(recover_kinetic_energy(&trace).len(), trace.rows.len());

    let at_t = mis(30);
    for sv in [0.0, 1.0, 2.0] {
        let rec = interior_field_recovery(&s, &trace, sv).unwrap();
        let rel = s.norm(&rec.minus(&adt.h_dt)) / s.norm(&adt.h_dt);
        assert!(rel <= 2.0 * at_t + 1e-12, "s = {sv}: {rel:e} vs {at_t:e}");
    }
    assert!(matches!(interior_field_recovery(&s, &trace, 2.5), Err(ControlError::RecoveryTime { .. })));

    let hs = hstar_membership_residuals(&s, &trace.tail()).unwrap();
    assert!(hs.max() < 1e-4 * n0, "{hs:?}");
}

#[test]
fn outside_wavefield_converges_to_the_direct_transmission_field() {
    let (s, h0) = two_interface(800);
    let adt = almost_direct_transmission(&s, &h0).unwrap();
    let outside = s.nest().theta_mask.complement();
    let misfit = |k: usize, t: f64, w: &Mask| {
        let trace = scattering_control_iterate(&s, &h0, &IterationOptions::new(k)).unwrap();
        let rec = wavefield_recovery_outside(&s, &trace, t).unwrap();
        let reference = s.propagate(&adt.h_dt, t - 2.0).unwrap();
        energy(s.prop(), &rec.minus(&reference), w).sqrt() / s.norm(&adt.h_dt)
    };
    let full = Mask::full(s.prop().grid());
    let (m0, m8) = (misfit(0, 3.0, &full), misfit(8, 3.0, &full));
    assert!(m8 < 1e-2 * m0 && m8 < 1e-2, "{m0:e} -> {m8:e}");
    let outside_misfits: Vec<f64> = [0, 2, 8].iter().map(|&k| misfit(k, 4.0, &outside)).collect();
    assert!(outside_misfits.windows(2).all(|w| w[1] < w[0]), "{outside_misfits:?}");
}

#[test]
fn zero_data_give_zero_diagnostics() {
    let (s, _) = two_interface(300);
    let z = CauchyData::zeros(*s.prop().grid());
    let trace = scattering_control_iterate(&s, &z, &IterationOptions::new(2)).unwrap();
    assert!(trace.rows.iter().all(|r| r.recovered_e == 0.0 && r.recovered_ke == 0.0));
    assert_eq!(wavefield_recovery_outside(&s, &trace, 1.0).unwrap().max_abs(), 0.0);
    let hs = hstar_membership_residuals(&s, &z).unwrap();
    assert_eq!(hs.max(), 0.0);
}

#[test]
fn data_inside_theta_maximally_violate_hstar() {
    let (s, h0) = two_interface(400);
    let hs = hstar_membership_residuals(&s, &h0).unwrap();
    assert!((hs.inside - s.norm(&h0)).abs() < 1e-9 * s.norm(&h0));
}

#[test]
fn reflection_operator_factorizes() {
    let (s, _) = two_interface(300);
    for seed in 0..3 {
        let h = random_data(*s.prop().grid(), seed);
        let r = factorization_residual(&s, &h).unwrap();
        assert!(r < 1e-9 * s.norm(&h), "{r:e}");
    }
}

#[test]
fn minimal_norm_series_matches_pseudoinverse() {
    use nalgebra::{DMatrix, DVector};
    let zero = minimal_norm_neumann_check(&DMatrix::zeros(3, 3), &DVector::from_vec(vec![1.0, 2.0, 3.0]), 1e-14, 10).unwrap();
    assert_eq!(zero.series, zero.pseudoinverse);

    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5]));
    let c = minimal_norm_neumann_check(&a, &DVector::from_vec(vec![0.0, 1.0]), 1e-15, 1000).unwrap();
    assert!((c.series[1] - 4.0 / 3.0).abs() < 1e-12 && c.series[0] == 0.0);
    assert!(c.difference < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let q = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let mut lambda: Vec<f64> = (0..8).map(|_| rng.gen_range(-0.95..0.95)).collect();
        lambda[0] = 1.0;
        let a = &q * DMatrix::from_diagonal(&DVector::from_vec(lambda)) * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        // Remove the component along the unit eigenvalue so x ∈ range(I − A²).
        let mut x = DVector::from_fn(8, |_, _| rng.gen_range(-1.0..1.0));
        let v = q.column(0).into_owned();
        x -= &v * v.dot(&x);
        let c = minimal_norm_neumann_check(&a, &x, 1e-14, 100_000).unwrap();
        assert!(c.difference < 1e-8, "{:e}", c.difference);
    }

    let big = DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 0.0]));
    assert!(matches!(
        minimal_norm_neumann_check(&big, &DVector::from_vec(vec![1.0, 1.0]), 1e-12, 10),
        Err(ControlError::NotContraction { .. })
    ));
}
