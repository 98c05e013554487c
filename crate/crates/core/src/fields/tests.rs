use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn test_bounds() -> Aabb {
    Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0))
}

fn field_from_fn(res: usize, sigma: f64, f: impl Fn(Vec3) -> f64) -> OccupancyField {
    let grid = ScalarGrid::from_fn([res; 3], test_bounds(), f).unwrap();
    OccupancyField::new(grid, sigma).unwrap()
}

/// Independent erf oracle: Taylor series, converges quickly for |x| <= 2.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

#[test]
fn constant_grid_interpolates_to_constant() {
    let g = ScalarGrid::new([5, 7, 4], test_bounds(), 3.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let p = Vec3::new(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
        );
        assert!((g.value_at(p) - 3.25).abs() < 1e-12);
    }
}

#[test]
fn linear_ramp_reproduced_in_interior() {
    let g = ScalarGrid::from_fn([9, 9, 9], test_bounds(), |p| 0.7 * p.z - 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        // Stay one node spacing away from the boundary where clamping bends
        // the spline.
        let p = Vec3::new(
            rng.gen_range(-0.7..0.7),
            rng.gen_range(-0.7..0.7),
            rng.gen_range(-0.7..0.7),
        );
        assert!((g.value_at(p) - (0.7 * p.z - 0.2)).abs() < 1e-6);
    }
}

#[test]
fn out_of_bounds_clamps_to_boundary() {
    let g = ScalarGrid::from_fn([8, 8, 8], test_bounds(), |p| p.x + 2.0 * p.y - p.z).unwrap();
    let outside = Vec3::new(5.0, 0.3, -0.2);
    let clamped = Vec3::new(1.0, 0.3, -0.2);
    assert_eq!(g.value_at(outside), g.value_at(clamped));
}

#[test]
fn alpha_known_values() {
    let f = field_from_fn(4, 0.25, |_| 0.0);
    assert_eq!(f.alpha_of_mu(0.0), 0.5);
    assert!(f.alpha_of_mu(10.0 * 0.25) < 1e-20);
    // mu = -sqrt(2) sigma gives (1 + erf(1)) / 2.
    let expect = 0.5 * (1.0 + erf_series(1.0));
    let got = f.alpha_of_mu(-std::f64::consts::SQRT_2 * 0.25);
    assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
    assert!((expect - 0.9213504).abs() < 1e-6);
}

#[test]
fn alpha_monotone_decreasing_in_mu() {
    let f = field_from_fn(4, 0.3, |_| 0.0);
    let mut prev = f64::INFINITY;
    for i in -40..=40 {
        let a = f.alpha_of_mu(i as f64 * 0.05);
        assert!(a <= prev);
        assert!((0.0..=1.0).contains(&a));
        prev = a;
    }
}

#[test]
fn alpha_half_iff_mu_zero() {
    let f = field_from_fn(12, 0.2, |p| p.z * 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let p = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let mu = f.mu_at(p);
        let alpha = f.alpha_at(p);
        assert_eq!(mu.abs() < 1e-9, (alpha - 0.5).abs() < 1e-9 / f.sigma());
        assert_eq!(mu > 0.0, alpha < 0.5);
    }
}

#[test]
fn beta_follows_ramps() {
    let up = field_from_fn(8, 0.1, |p| p.z);
    assert!((up.beta_at(Vec3::ZERO).unwrap() - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9);
    let down = field_from_fn(8, 0.1, |p| -p.z);
    assert!((down.beta_at(Vec3::ZERO).unwrap() - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-9);
}

#[test]
fn beta_matches_distance_field_direction() {
    let c = Vec3::new(0.05, -0.04, 0.08);
    let f = field_from_fn(32, 0.1, |p| (p - c).norm() - 0.5);
    let h = f.mu.spacing().x;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 300 {
        let p = Vec3::new(
            rng.gen_range(-0.85..0.85),
            rng.gen_range(-0.85..0.85),
            rng.gen_range(-0.85..0.85),
        );
        if (p - c).norm() < 2.0 * h {
            continue;
        }
        let beta = f.beta_at(p).unwrap();
        assert!((beta.norm() - 1.0).abs() < 1e-9);
        let expect = (p - c).normalized();
        let angle = beta.dot(expect).clamp(-1.0, 1.0).acos().to_degrees();
        assert!(angle < 2.0, "angle {angle} at {p:?}");
        checked += 1;
    }
}

#[test]
fn degenerate_beta_on_constant_field() {
    let f = field_from_fn(8, 0.1, |_| 0.7);
    assert!(f.beta_at(Vec3::new(0.2, -0.1, 0.4)).is_none());
    assert_eq!(f.alpha_plus(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0)), 0.0);
}

#[test]
fn alpha_plus_facing_convention() {
    // Ramp rising along +z: beta = +z everywhere.
    let f = field_from_fn(8, 0.5, |p| p.z * 0.3);
    let x = Vec3::new(0.0, 0.0, -0.2);
    let alpha = f.alpha_at(x);
    assert!(alpha > 0.5);
    // Travelling along -z the surface faces the origin.
    assert_eq!(f.alpha_plus(x, Vec3::new(0.0, 0.0, -1.0)), alpha);
    // Travelling along +z it is back-facing and masked.
    assert_eq!(f.alpha_plus(x, Vec3::new(0.0, 0.0, 1.0)), 0.0);
}

#[test]
fn scatter_alpha_zero_is_noop() {
    let f = field_from_fn(6, 0.2, |p| p.z);
    let mut buf = GradientBuffer::for_field(&f, None);
    scatter_alpha_gradient(&mut buf, &f, Vec3::ZERO, 0.0).unwrap();
    assert!(buf.d_mu.iter().all(|&g| g == 0.0));
}

#[test]
fn scatter_alpha_rejects_non_finite() {
    let f = field_from_fn(6, 0.2, |p| p.z);
    let mut buf = GradientBuffer::for_field(&f, None);
    assert!(scatter_alpha_gradient(&mut buf, &f, Vec3::ZERO, f64::NAN).is_err());
    assert!(scatter_alpha_gradient(&mut buf, &f, Vec3::ZERO, f64::INFINITY).is_err());
}

#[test]
fn scatter_alpha_transpose_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..100 {
        let f = field_from_fn(7, 0.25, |p| {
            0.4 * p.z + 0.1 * (3.0 * p.x).sin() * (2.0 * p.y).cos()
        });
        let x = Vec3::new(
            rng.gen_range(-0.9..0.9),
            rng.gen_range(-0.9..0.9),
            rng.gen_range(-0.9..0.9),
        );
        let g: f64 = rng.gen_range(-2.0..2.0);
        let a: Vec<f64> = (0..f.mu.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut buf = GradientBuffer::for_field(&f, None);
        scatter_alpha_gradient(&mut buf, &f, x, g).unwrap();
        let rhs: f64 = buf.d_mu.iter().zip(&a).map(|(b, ai)| b * ai).sum();

        // Forward-mode perturbation: alpha is linear in the grid values
        // through the interpolated mu, so the exact directional derivative is
        // dalpha/dmu times the interpolation of the perturbation grid.
        let a_grid = ScalarGrid::from_values(f.mu.resolution(), f.mu.bounds, a).unwrap();
        let lhs = g * f.dalpha_dmu(f.mu_at(x)) * a_grid.value_at(x);

        let denom = lhs.abs().max(rhs.abs()).max(1e-30);
        assert!(
            (lhs - rhs).abs() / denom < 1e-6,
            "trial {trial}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn scatter_alpha_matches_finite_difference() {
    let mut f = field_from_fn(6, 0.25, |p| 0.3 * p.z + 0.05 * p.x);
    let x = Vec3::new(0.12, -0.2, 0.07);
    let mut buf = GradientBuffer::for_field(&f, None);
    scatter_alpha_gradient(&mut buf, &f, x, 1.0).unwrap();

    let node = f.mu.index(3, 2, 3);
    let h = 1e-4;
    let old = f.mu.values[node];
    f.mu.values[node] = old + h;
    let up = f.alpha_at(x);
    f.mu.values[node] = old - h;
    let down = f.alpha_at(x);
    f.mu.values[node] = old;
    let fd = (up - down) / (2.0 * h);
    assert!(fd.abs() > 1e-6, "node not in stencil, test is vacuous");
    assert!(
        ((buf.d_mu[node] - fd) / fd).abs() < 1e-4,
        "{} vs {}",
        buf.d_mu[node],
        fd
    );
}

#[test]
fn scatter_beta_radial_component_is_killed() {
    let f = field_from_fn(8, 0.2, |p| p.z);
    let x = Vec3::new(0.1, 0.05, -0.12);
    let beta = f.beta_at(x).unwrap();
    let mut buf = GradientBuffer::for_field(&f, None);
    scatter_beta_gradient(&mut buf, &f, x, beta * 2.5).unwrap();
    assert!(buf.d_mu.iter().all(|&g| g.abs() < 1e-12));

    scatter_beta_gradient(&mut buf, &f, x, Vec3::ZERO).unwrap();
    assert!(buf.d_mu.iter().all(|&g| g.abs() < 1e-12));
}

#[test]
fn scatter_beta_matches_finite_difference() {
    // Smooth ramp with mild curvature so the orientation varies.
    let mut f = field_from_fn(7, 0.2, |p| p.z + 0.2 * (p.x * 1.3).sin());
    let x = Vec3::new(0.1, -0.05, 0.15);
    let g = Vec3::new(0.8, -0.3, 0.2);
    let mut buf = GradientBuffer::for_field(&f, None);
    scatter_beta_gradient(&mut buf, &f, x, g).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for _ in 0..40 {
        let node = f.mu.index(
            rng.gen_range(1..6),
            rng.gen_range(1..6),
            rng.gen_range(1..6),
        );
        let h = 1e-5;
        let old = f.mu.values[node];
        f.mu.values[node] = old + h;
        let up = g.dot(f.beta_at(x).unwrap());
        f.mu.values[node] = old - h;
        let down = g.dot(f.beta_at(x).unwrap());
        f.mu.values[node] = old;
        let fd = (up - down) / (2.0 * h);
        if fd.abs() < 1e-4 {
            continue;
        }
        assert!(
            ((buf.d_mu[node] - fd) / fd).abs() < 1e-3,
            "node {node}: {} vs {fd}",
            buf.d_mu[node]
        );
        checked += 1;
    }
    assert!(checked > 3);
}

#[test]
fn scatter_beta_degenerate_is_noop() {
    let f = field_from_fn(6, 0.2, |_| 1.0);
    let mut buf = GradientBuffer::for_field(&f, None);
    scatter_beta_gradient(&mut buf, &f, Vec3::ZERO, Vec3::new(1.0, 2.0, 3.0)).unwrap();
    assert!(buf.d_mu.iter().all(|&g| g == 0.0));
}

#[test]
fn albedo_constant_and_clamp() {
    let grid = AlbedoGrid::new([4, 4, 4], test_bounds(), [0.25, 0.5, 0.75]).unwrap();
    assert_eq!(grid.albedo_at(Vec3::ZERO), [0.25, 0.5, 0.75]);
    // Out-of-bounds lookups clamp to the boundary.
    assert_eq!(
        grid.albedo_at(Vec3::new(9.0, 9.0, 9.0)),
        grid.albedo_at(Vec3::new(1.0, 1.0, 1.0))
    );
}

#[test]
fn albedo_scatter_transpose_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut grid = AlbedoGrid::new([5, 4, 6], test_bounds(), [0.5; 3]).unwrap();
    for v in &mut grid.values {
        *v = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
    }
    let f = field_from_fn(4, 0.2, |_| 0.0);
    for trial in 0..100 {
        let x = Vec3::new(
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
        );
        let g = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let a: Vec<[f64; 3]> = (0..grid.len())
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();

        let mut buf = GradientBuffer::for_field(&f, Some(&grid));
        scatter_albedo_gradient(&mut buf, &grid, x, g).unwrap();
        let rhs: f64 = buf
            .d_albedo
            .iter()
            .zip(&a)
            .map(|(b, ai)| b[0] * ai[0] + b[1] * ai[1] + b[2] * ai[2])
            .sum();

        let mut a_grid = grid.clone();
        a_grid.values = a;
        let interp = a_grid.albedo_at(x);
        let lhs: f64 = (0..3).map(|c| g[c] * interp[c]).sum();
        let denom = lhs.abs().max(rhs.abs()).max(1e-30);
        assert!((lhs - rhs).abs() / denom < 1e-6, "trial {trial}");
    }
}

#[test]
fn albedo_scatter_rejects_non_finite() {
    let grid = AlbedoGrid::new([4, 4, 4], test_bounds(), [0.5; 3]).unwrap();
    let f = field_from_fn(4, 0.2, |_| 0.0);
    let mut buf = GradientBuffer::for_field(&f, Some(&grid));
    assert!(scatter_albedo_gradient(&mut buf, &grid, Vec3::ZERO, [0.0, f64::NAN, 0.0]).is_err());
}

#[test]
fn checkpoint_roundtrip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.mwgrid");
    let f = field_from_fn(9, 0.17, |p| (p.norm() - 0.5) * 1.7);
    f.save(&path).unwrap();
    let loaded = OccupancyField::load(&path).unwrap();
    assert_eq!(loaded.mu.values, f.mu.values);
    assert_eq!(loaded.mu.resolution(), f.mu.resolution());
    assert_eq!(loaded.sigma(), f.sigma());
    // Sidecar exists and parses.
    let sidecar = std::fs::read_to_string(dir.path().join("field.mwgrid.json")).unwrap();
    let header: io::GridHeader = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(header.resolution, [9, 9, 9]);

    // Saving the loaded field reproduces the same bytes.
    let path2 = dir.path().join("field2.mwgrid");
    loaded.save(&path2).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&path2).unwrap()
    );
}

#[test]
fn uniform_mu_shift_decreases_alpha_everywhere() {
    let mut f = field_from_fn(6, 0.3, |p| 0.2 * p.x);
    let probe = Vec3::new(0.3, -0.2, 0.5);
    let before = f.alpha_at(probe);
    for v in &mut f.mu.values {
        *v += 0.1;
    }
    assert!(f.alpha_at(probe) < before);
}
