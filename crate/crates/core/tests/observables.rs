use paraxial::cone::{offsurface_field, self_similar_y, surface_field_sc};
use paraxial::geometry::{Profile, WaveParams};
use paraxial::kernels::{KernelEvaluator, SpacePoint};
use paraxial::observables::*;
use paraxial::volterra::{incident_rhs, solve_marching, AxialGrid, ModalSurfaceField};
use paraxial::{Complex64 as C64, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spindle() -> Profile {
    Profile::spindle(0.05, 0.0, 10.0).unwrap()
}

fn real_k(k: f64, theta: f64) -> WaveParams {
    WaveParams::new(C64::new(k, 0.0), theta).unwrap()
}

fn solved_axial(p: &Profile, w: &WaveParams, intervals: usize) -> ModalSurfaceField {
    let g = AxialGrid::uniform(p.x_start(), p.x_end(), intervals).unwrap();
    let ke = KernelEvaluator::modal(*p, *w, 0);
    solve_marching(&ke, &incident_rhs(w, p, 0, &g), &g, 0).unwrap().0
}

fn random_fields(seed: u64, modes: std::ops::RangeInclusive<i32>, nodes: usize) -> Vec<ModalSurfaceField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = AxialGrid::uniform(0.0, 10.0, nodes).unwrap();
    modes
        .map(|n| ModalSurfaceField {
            mode: n,
            grid: g.clone(),
            values: (0..=nodes).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        })
        .collect()
}

fn cone_surface(w: &WaveParams, alpha: f64, y_max: f64, intervals: usize) -> (Profile, Vec<ModalSurfaceField>) {
    let g = AxialGrid::uniform_in_y(w, alpha, 0.0, y_max, intervals).unwrap();
    let values = g.nodes().iter().map(|&x| 1.0 + surface_field_sc(self_similar_y(w, alpha, x)).unwrap().value).collect();
    (Profile::cone(alpha).unwrap(), vec![ModalSurfaceField { mode: 0, grid: g, values }])
}

#[test]
fn zero_surface_field_scatters_nothing() {
    let p = spindle();
    let w = real_k(50.0, 0.01);
    let g = AxialGrid::uniform(0.0, 10.0, 40).unwrap();
    let fields: Vec<_> = (-2..=2).map(|n| ModalSurfaceField::zeros(n, g.clone())).collect();
    let target = SpacePoint::new(12.0, 0.3, 0.7).unwrap();
    assert_eq!(reconstruct_point(&fields, &p, &w, &target).unwrap(), C64::new(0.0, 0.0));
    assert_eq!(reconstruct_total(&fields, &p, &w, &target).unwrap(), incident_field(&w, &target));
    assert_eq!(directivity(&fields, &p, &w, 0.03, 0.4).unwrap().value, C64::new(0.0, 0.0));
    let ot = optical_theorem(&fields, &p, &w, 12.0, &PlaneOptions::default()).unwrap();
    assert_eq!(ot.residual, 0.0);
}

#[test]
fn directivity_series_matches_quadrature_for_arbitrary_fields() {
    let p = spindle();
    let w = real_k(80.0, 0.02);
    let fields = random_fields(7, -3..=3, 30);
    for (th, ph) in [(0.0, 0.0), (0.01, 0.3), (0.05, 2.0), (0.12, -1.0)] {
        let (_, chk) = directivity_checked(&fields, &p, &w, th, ph).unwrap();
        assert!(chk.relative_difference < 1e-10, "θ* = {th}: {chk:?}");
    }
}

#[test]
fn forward_directivity_is_axisymmetric_for_axial_incidence() {
    let p = spindle();
    let w = real_k(100.0, 0.0);
    let fields = vec![solved_axial(&p, &w, 100)];
    let t0 = directivity(&fields, &p, &w, 0.02, 0.0).unwrap().value;
    for ph in [0.5, 1.7, 3.0, -2.2] {
        let t = directivity(&fields, &p, &w, 0.02, ph).unwrap().value;
        assert!((t - t0).norm() <= 1e-13 * t0.norm(), "{t} vs {t0}");
    }
}

#[test]
fn far_field_of_reconstruction_matches_directivity() {
    let p = spindle();
    let k = 50.0;
    let w = real_k(k, 0.0);
    let fields = vec![solved_axial(&p, &w, 100)];
    let far_error = |kl: f64, th: f64, ph: f64| {
        let l = kl / k;
        let t = directivity(&fields, &p, &w, th, ph).unwrap().value;
        let u = reconstruct_point(&fields, &p, &w, &SpacePoint::new(l, th * l, ph).unwrap()).unwrap();
        let far = u * C64::new(0.0, 2.0 * std::f64::consts::PI * l / k) * C64::new(0.0, -0.5 * k * l * th * th).exp();
        (far - t).norm() / t.norm()
    };
    for (th, ph) in [(0.0, 0.0), (0.02, 0.0), (0.05, 1.0)] {
        let e5 = far_error(1e5, th, ph);
        let e6 = far_error(1e6, th, ph);
        assert!(e5 <= 1e-2, "θ* = {th}: {e5}");
        // The neglected terms are O(x/L).
        assert!((e5 / e6 - 10.0).abs() < 0.5, "θ* = {th}: {e5} then {e6}");
    }
}

#[test]
fn cone_reconstruction_matches_closed_form_and_surface_limit() {
    let (k, alpha) = (100.0, 0.1);
    let w = real_k(k, 0.0);
    let (p, fields) = cone_surface(&w, alpha, 50.0, 500);
    let x = 50.0 / (k * alpha * alpha);
    let r = 1.5 * alpha * x;
    let rec = reconstruct_point(&fields, &p, &w, &SpacePoint::new(x, r, 0.0).unwrap()).unwrap();
    let exact = offsurface_field(&w, alpha, x, r).unwrap().value;
    assert!((rec - exact).norm() <= 1e-2 * exact.norm(), "{rec} vs {exact}");

    // Approach the surface at y = 25: the total field tends to U.
    let xb = 0.5 * x;
    let u = fields[0].interpolate(xb);
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let rb = alpha * xb * (1.0 + eps);
        let tot = reconstruct_total(&fields, &p, &w, &SpacePoint::new(xb, rb, 0.0).unwrap()).unwrap();
        let d = (tot - u).norm();
        assert!(d < prev, "ε = {eps}: {d} not below {prev}");
        prev = d;
    }
    assert!(prev < 1e-3, "surface limit {prev}");
}

#[test]
fn optical_theorem_balances_on_two_planes() {
    let p = spindle();
    let w = real_k(100.0, 0.0);
    let fields = vec![solved_axial(&p, &w, 100)];
    let opts = PlaneOptions::default();
    let a = optical_theorem(&fields, &p, &w, 15.0, &opts).unwrap();
    let b = optical_theorem(&fields, &p, &w, 20.0, &opts).unwrap();
    assert!(a.lhs.value > 0.0 && a.forward.re <= 0.0);
    assert!(a.residual < 5e-2 && b.residual < 5e-2, "{a:?} {b:?}");
    let spread = (a.lhs.value - b.lhs.value).abs() / a.lhs.value.max(b.lhs.value);
    assert!(spread < 1e-2, "{spread}");
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = spindle();
    let w = real_k(50.0, 0.0);
    let fields = random_fields(1, 0..=0, 20);
    let inside = SpacePoint::new(5.0, 0.1, 0.0).unwrap();
    assert!(matches!(reconstruct_point(&fields, &p, &w, &inside), Err(Error::Domain(_))));
    let before = SpacePoint::new(-1.0, 1.0, 0.0).unwrap();
    assert!(matches!(reconstruct_point(&fields, &p, &w, &before), Err(Error::Domain(_))));
    assert!(matches!(plane_flux(&fields, &p, &w, 9.0, &PlaneOptions::default()), Err(Error::Domain(_))));
    let cone = Profile::cone(0.1).unwrap();
    assert!(matches!(directivity(&fields, &cone, &w, 0.0, 0.0), Err(Error::Domain(_))));
    let damped = WaveParams::with_absorption(50.0, 1e-3, 0.0).unwrap();
    assert!(matches!(optical_theorem(&fields, &p, &damped, 12.0, &PlaneOptions::default()), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn observables_are_linear_in_the_surface_field(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64, x in 10.5..14.0f64, r in 0.0..1.0f64, th in 0.0..0.1f64) {
        let p = spindle();
        let w = real_k(40.0, 0.01);
        let f1 = random_fields(seed, -1..=1, 16);
        let f2 = random_fields(seed ^ 0x9e37, -1..=1, 16);
        let (ca, cb) = (C64::new(a, 0.3), C64::new(-0.2, b));
        let mix: Vec<ModalSurfaceField> = f1.iter().zip(&f2).map(|(u, v)| ModalSurfaceField {
            mode: u.mode,
            grid: u.grid.clone(),
            values: u.values.iter().zip(&v.values).map(|(s, t)| ca * s + cb * t).collect(),
        }).collect();
        let target = SpacePoint::new(x, r, 0.4).unwrap();
        let lin = |fs: &[ModalSurfaceField]| reconstruct_point(fs, &p, &w, &target).unwrap();
        let want = ca * lin(&f1) + cb * lin(&f2);
        let got = lin(&mix);
        prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
        let dir = |fs: &[ModalSurfaceField]| directivity(fs, &p, &w, th, 0.9).unwrap().value;
        let want = ca * dir(&f1) + cb * dir(&f2);
        prop_assert!((dir(&mix) - want).norm() <= 1e-10 * (1.0 + want.norm()));
    }
}
