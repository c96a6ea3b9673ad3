use geometry_depth::{depth_from_region, Side};
use grid_core::*;
use projections::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wave_solver::{inner, Propagator};

fn line(cells: usize, lo: f64, hi: f64) -> Grid64 {
    Grid::new_1d(cells + 1, (hi - lo) / cells as f64, lo).unwrap()
}

fn random_data(grid: Grid64, seed: u64) -> Cauchy64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
    let u1 = ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
    CauchyData::with_dirichlet(u0, u1).unwrap()
}

fn setup_1d(cells: usize) -> (Propagator<f64>, Projector64) {
    let g = line(cells, -3.0, 4.0);
    let m = Medium::from_layered(g, Layered::new(vec![1.0, 2.0], vec![1.0, 2.0, 0.5]).unwrap());
    let p = Propagator::new(&m, 0.5, 1.0).unwrap();
    let d = depth_from_region(&Region::interval(-0.5, 3.0), &m).unwrap();
    let proj = Projector::new(&p, &d, 1e-12, 20_000);
    (p, proj)
}

fn setup_2d() -> (Propagator<f64>, Projector64) {
    let g = Grid::new_2d(41, 41, 0.1, [-2.0, -2.0]).unwrap();
    let m = Medium::constant(g, 1.0).unwrap();
    let p = Propagator::new(&m, 0.5, 0.5).unwrap();
    let d = depth_from_region(&Region::new([-2.0, -0.6], [2.0, 0.6]), &m).unwrap();
    let proj = Projector::new(&p, &d, 1e-12, 20_000);
    (p, proj)
}

#[test]
fn one_dimensional_extension_is_affine_away_from_the_junction() {
    // Θ_0 = [-0.5, 3]; put a = 1 at its left edge and check the left gap.
    let (p, proj) = setup_1d(700);
    let g = *p.grid();
    let u0 = ScalarField::from_fn(g, |x| if x[0] >= -0.5 - 1e-9 { 1.0 } else { 0.0 });
    let h = CauchyData::with_dirichlet(u0, ScalarField::zeros(g)).unwrap();
    let out = proj.pi_bar(&h).unwrap();
    let edge = (0..g.len()).find(|&i| g.position(i)[0] >= -0.5 - 1e-9).unwrap();
    let x_edge = g.position(edge)[0];
    let mut worst_far = 0.0f64;
    let mut worst_near = 0.0f64;
    for i in 0..edge {
        let x = g.position(i)[0];
        let affine = (x + 3.0) / (x_edge + 3.0);
        let err = (out.u0.values()[i] - affine).abs();
        if edge - i > 6 {
            worst_far = worst_far.max(err);
        } else {
            worst_near = worst_near.max(err);
        }
    }
    // The dt² term of the energy form leaves an alternating layer that decays
    // by a factor of about 14 per cell, and shifts the slope slightly.
    assert!(worst_far < 1e-3, "far {worst_far:e}");
    let u = out.u0.values();
    for i in 1..edge - 6 {
        let second = u[i + 1] - 2.0 * u[i] + u[i - 1];
        assert!(second.abs() < 1e-10, "kink at node {i}: {second:e}");
    }
    assert!(worst_near < 0.05, "near {worst_near:e}");
    assert!(out.u1.values()[..edge].iter().all(|&v| v == 0.0));
}

#[test]
fn decomposition_is_orthogonal_and_idempotent() {
    let (p, proj) = setup_1d(400);
    for seed in 0..20 {
        let h = random_data(*p.grid(), seed);
        let inside = proj.pi_bar(&h).unwrap();
        let outside = proj.pi_star(&h).unwrap();
        let e = inner(&p, &h, &h);
        let cross = inner(&p, &inside, &outside);
        assert!(cross.abs() < 1e-9 * e, "seed {seed}: cross term {cross:e}");
        let pyth = inner(&p, &inside, &inside) + inner(&p, &outside, &outside);
        assert!(((pyth - e) / e).abs() < 1e-9);
        let twice = proj.pi_bar(&inside).unwrap();
        assert!(twice.minus(&inside).max_abs() < 1e-9);
        assert!(proj.pi_star(&outside).unwrap().minus(&outside).max_abs() < 1e-9);
    }
}

#[test]
fn projections_are_self_adjoint() {
    let (p, proj) = setup_1d(400);
    for seed in 0..20 {
        let f = random_data(*p.grid(), 100 + seed);
        let g = random_data(*p.grid(), 200 + seed);
        let a = inner(&p, &proj.pi_bar(&f).unwrap(), &g);
        let b = inner(&p, &f, &proj.pi_bar(&g).unwrap());
        let scale = inner(&p, &f, &f).sqrt() * inner(&p, &g, &g).sqrt();
        assert!((a - b).abs() < 1e-9 * scale, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn inside_part_is_stationary_harmonic_outside_the_level_set() {
    let (p, proj) = setup_1d(400);
    for t in [0.0, 0.5, -1.0] {
        let h = random_data(*p.grid(), 7);
        let inside = proj.project_inside(&h, t).unwrap();
        let w = proj.depth().level_mask(t, Side::Outside);
        let r = stationary_harmonic_residual(&p, &inside, &w);
        let scale = stationary_harmonic_residual(&p, &h, &Mask::full(p.grid()));
        assert!(r < 1e-8 * scale, "t = {t}: {r:e}");
    }
}

#[test]
fn harmonic_residual_of_reference_fields() {
    let g = line(400, -3.0, 4.0);
    let p = Propagator::new(&Medium::constant(g, 1.5).unwrap(), 0.5, 1.0).unwrap();
    let w = Mask::from_fn(&g, |i| (-2.5..=3.5).contains(&g.position(i)[0]));
    let zero = ScalarField::zeros(g);
    let affine = CauchyData { u0: ScalarField::from_fn(g, |x| 3.0 * x[0] - 1.0), u1: zero.clone() };
    assert!(stationary_harmonic_residual(&p, &affine, &w) < 1e-9);
    let square = CauchyData { u0: ScalarField::from_fn(g, |x| x[0] * x[0]), u1: zero };
    let r = stationary_harmonic_residual(&p, &square, &w);
    assert!((r - 2.0).abs() < 1e-8, "{r}");
}

#[test]
fn two_dimensional_decomposition_is_orthogonal() {
    let (p, proj) = setup_2d();
    for seed in 0..3 {
        let h = random_data(*p.grid(), 50 + seed);
        let inside = proj.project_inside(&h, 0.2).unwrap();
        let outside = h.minus(&inside);
        let e = inner(&p, &h, &h);
        assert!(inner(&p, &inside, &outside).abs() < 1e-9 * e);
        let w = proj.depth().level_mask(0.2, Side::Outside);
        let scale = stationary_harmonic_residual(&p, &h, &Mask::full(p.grid()));
        assert!(stationary_harmonic_residual(&p, &inside, &w) < 1e-8 * scale);
    }
}

#[test]
fn zero_trace_gives_zero_extension() {
    let (p, proj) = setup_1d(200);
    let g = *p.grid();
    let u0 = ScalarField::from_fn(g, |x| if x[0] < -1.0 { (x[0] + 3.0) * (x[0] + 1.0) } else { 0.0 });
    let h = CauchyData::with_dirichlet(u0, ScalarField::zeros(g)).unwrap();
    let inside = proj.pi_bar(&h).unwrap();
    assert_eq!(inside.max_abs(), 0.0);
}
