use anyonvlasov::geometry::cell_fraction;
use anyonvlasov::kernels::{build_profile, gauge_field, kernel_gap_lp_norm, radial_kernel, Kernel, RadialGrid};
use anyonvlasov::{DensityField, Grid2D};
use proptest::prelude::*;
use std::f64::consts::PI;

fn disc_density(grid: Grid2D, a: f64) -> DensityField {
    let h = grid.spacing();
    let raw = DensityField::from_fn(grid, |x| cell_fraction([0.0, 0.0], a, x, h)).unwrap();
    let m = raw.mass();
    raw.scaled(1.0 / m).unwrap()
}

#[test]
fn unit_disc_field_outside_is_newtonian() {
    let grid = Grid2D::new(128, 4.0).unwrap();
    let a = 0.5;
    let rho = disc_density(grid, a);
    let profile = build_profile(8.0).unwrap();
    let kernels = [
        Kernel::Pointlike,
        Kernel::Smeared(radial_kernel(profile, 0.05, RadialGrid::default()).unwrap()),
    ];
    for kernel in &kernels {
        let field = gauge_field(&rho, kernel).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..grid.len() {
            let x = grid.point(k);
            let r = x[0].hypot(x[1]);
            if (r - 2.0 * a).abs() < 0.5 * grid.spacing() {
                let [ax, ay] = field.at(k);
                worst = worst.max((ax.hypot(ay) * r - 1.0).abs());
            }
        }
        assert!(worst < 1e-2, "R = {}: {worst}", kernel.radius());
    }
}

#[test]
fn radial_density_gives_azimuthal_field() {
    // Wide enough that the square box does not cut the Gaussian, fine enough
    // that the lattice sum resolves the bridge of the kernel.
    let grid = Grid2D::new(256, 6.5).unwrap();
    let rho = DensityField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1])).exp() / PI).unwrap();
    let kernel = Kernel::Smeared(radial_kernel(build_profile(8.0).unwrap(), 1.0, RadialGrid::default()).unwrap());
    let field = gauge_field(&rho, &kernel).unwrap();
    let worst = (0..grid.len())
        .map(|k| {
            let x = grid.point(k);
            let [ax, ay] = field.at(k);
            (x[0] * ax + x[1] * ay).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn gap_norm_halving_ratios() {
    let profile = build_profile(8.0).unwrap();
    for (p, expect) in [(1.0, 2.0), (4.0 / 3.0, 2f64.sqrt())] {
        let norms: Vec<f64> = (0..8).map(|k| kernel_gap_lp_norm(profile, 2f64.powi(-k), p).unwrap()).collect();
        for w in norms.windows(2) {
            assert!((w[0] / w[1] - expect).abs() < 1e-6, "p = {p}: {}", w[0] / w[1]);
        }
    }
}

#[test]
fn gap_norm_is_monotone_in_radius() {
    let profile = build_profile(8.0).unwrap();
    let rs = [1e-3, 3e-3, 0.01, 0.05, 0.2, 0.7, 1.5];
    let norms: Vec<f64> = rs.iter().map(|&r| kernel_gap_lp_norm(profile, r, 4.0 / 3.0).unwrap()).collect();
    assert!(norms.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(kernel_gap_lp_norm(profile, 0.0, 4.0 / 3.0).unwrap(), 0.0);
    assert!(kernel_gap_lp_norm(profile, 0.1, 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smeared_matches_pointlike_beyond_two_radii(log_r in -3.0f64..0.0, t in 1.0f64..20.0) {
        let r = 10f64.powf(log_r);
        let k = radial_kernel(build_profile(8.0).unwrap(), r, RadialGrid { points: 64, u_max: 40.0 * r }).unwrap();
        let u = 2.0 * r * t;
        prop_assert!((k.dw(u) * u - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grad_perp_is_orthogonal(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let k = Kernel::Smeared(radial_kernel(build_profile(8.0).unwrap(), 0.4, RadialGrid::default()).unwrap());
        let g = k.grad_perp([x, y]);
        prop_assert!((g[0] * x + g[1] * y).abs() < 1e-12);
    }
}
