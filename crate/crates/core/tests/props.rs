use fbs_core::channel::{
    elevation_angle, excess_weight, free_space_loss, los_probability, mean_path_loss,
    nlos_probability, Environment,
};
use fbs_core::geometry::{
    discretize_edges, distance3, segment_intersects_box, BoxObstacle, Point3,
};
use fbs_core::scenario::{
    generate_obstacles, spawn_users, step_random_waypoint, MobilityClass, MobilityMix,
    ObstacleParams, Region, UserParams,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pt() -> impl Strategy<Value = Point3> {
    (-500.0..500.0f64, -500.0..500.0f64, 0.0..300.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn boxes() -> impl Strategy<Value = BoxObstacle> {
    (
        -200.0..200.0f64,
        -200.0..200.0f64,
        1.0..150.0f64,
        1.0..150.0f64,
        1.0..200.0f64,
    )
        .prop_map(|(x, y, w, d, h)| BoxObstacle::new(0, x, y, x + w, y + d, h).unwrap())
}

proptest! {
    #[test]
    fn triangle_inequality(a in pt(), b in pt(), c in pt()) {
        prop_assert!(distance3(&a, &c) <= distance3(&a, &b) + distance3(&b, &c) + 1e-9);
        prop_assert_eq!(distance3(&a, &b), distance3(&b, &a));
    }

    #[test]
    fn segment_test_is_symmetric(a in pt(), b in pt(), bx in boxes()) {
        prop_assert_eq!(segment_intersects_box(&a, &b, &bx), segment_intersects_box(&b, &a, &bx));
    }

    /// The exact test agrees with dense sampling whenever sampling finds an
    /// interior point.
    #[test]
    fn sampled_interior_implies_intersection(a in pt(), b in pt(), bx in boxes()) {
        let hit = (1..500).any(|k| bx.contains_interior(&a.lerp(&b, k as f64 / 500.0)));
        if hit {
            prop_assert!(segment_intersects_box(&a, &b, &bx));
        }
    }

    #[test]
    fn edge_points_lie_on_the_boundary(bx in boxes(), spacing in 1.0..80.0f64) {
        let pts = discretize_edges(&bx, spacing).unwrap();
        for p in &pts {
            prop_assert!(!bx.contains_interior(p));
            let on_x = p.x == bx.min.x || p.x == bx.max.x;
            let on_y = p.y == bx.min.y || p.y == bx.max.y;
            let on_top = p.z == bx.max.z;
            prop_assert!((on_x && on_y) || (on_top && (on_x || on_y)));
            prop_assert!(p.z >= 0.0 && p.z <= bx.max.z);
        }
        // Every corner of the footprint at ground and roof level is present.
        for &x in &[bx.min.x, bx.max.x] {
            for &y in &[bx.min.y, bx.max.y] {
                for &z in &[0.0, bx.max.z] {
                    prop_assert!(pts.contains(&Point3::new(x, y, z)));
                }
            }
        }
        let mut keys: Vec<[u64; 3]> = pts.iter().map(Point3::key).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), pts.len());
    }

    #[test]
    fn los_plus_nlos_is_one(theta in 1e-6..=90.0f64) {
        let env = Environment::default();
        let p = los_probability(theta, &env).unwrap();
        let q = nlos_probability(theta, &env).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p + q, 1.0);
    }

    #[test]
    fn channel_monotonicity(t1 in 1e-3..90.0f64, dt in 0.0..30.0f64, d in 1.0..5000.0f64, dd in 0.0..1000.0f64) {
        let env = Environment::default();
        let t2 = (t1 + dt).min(90.0);
        prop_assert!(los_probability(t2, &env).unwrap() >= los_probability(t1, &env).unwrap());
        prop_assert!(excess_weight(t2, &env).unwrap() <= excess_weight(t1, &env).unwrap());
        prop_assert!(free_space_loss(d + dd, &env).unwrap() >= free_space_loss(d, &env).unwrap());
        let m1 = mean_path_loss(d, t1, &env).unwrap();
        prop_assert!(mean_path_loss(d + dd, t1, &env).unwrap() >= m1);
        prop_assert!(mean_path_loss(d, t2, &env).unwrap() <= m1 + 1e-12);
        let fs = free_space_loss(d, &env).unwrap();
        prop_assert!(m1 >= fs + env.delta_los - 1e-9 && m1 <= fs + env.delta_nlos + 1e-9);
    }

    #[test]
    fn elevation_in_range(a in pt(), b in pt()) {
        match elevation_angle(&a, &b) {
            Ok(t) => prop_assert!(t > 0.0 && t <= 90.0 && a.z > b.z),
            Err(_) => prop_assert!(a.z <= b.z),
        }
    }

    #[test]
    fn users_stay_inside_and_move_at_most_v_dt(seed in any::<u64>(), dt in 0.5..400.0f64, steps in 1usize..6) {
        let region = Region { width: 800.0, height: 500.0 };
        let mix = MobilityMix::default();
        let params = UserParams { count: 30, ..UserParams::default() };
        let mut users = spawn_users(&region, &params, &mix, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..steps {
            let next = step_random_waypoint(&users, &region, &mix, dt, &mut rng).unwrap();
            for (u, n) in users.iter().zip(&next) {
                prop_assert!(region.contains(n.pos.x, n.pos.y));
                prop_assert_eq!(u.pos.z, n.pos.z);
                prop_assert_eq!(u.demand, n.demand);
                let moved = u.pos.horizontal_distance(&n.pos);
                prop_assert!(moved <= mix.speed(u.mobility_class) * dt + 1e-9);
                if u.mobility_class == MobilityClass::Stationary {
                    prop_assert_eq!(u.pos, n.pos);
                }
            }
            users = next;
        }
    }

    #[test]
    fn obstacles_are_disjoint_and_clear_of_base(seed in any::<u64>()) {
        let region = Region { width: 2000.0, height: 2000.0 };
        let params = ObstacleParams { count: 12, ..ObstacleParams::default() };
        let base = Point3::new(0.0, 0.0, 0.0);
        if let Ok(obs) = generate_obstacles(&region, &params, &base, seed) {
            for (i, a) in obs.iter().enumerate() {
                prop_assert!(a.min.x >= 0.0 && a.max.x <= region.width);
                prop_assert!(a.min.y >= 0.0 && a.max.y <= region.height);
                prop_assert!(!a.footprint_contains(base.x, base.y));
                for b in &obs[i + 1..] {
                    let overlap = a.min.x < b.max.x && b.min.x < a.max.x && a.min.y < b.max.y && b.min.y < a.max.y;
                    prop_assert!(!overlap);
                }
            }
        }
    }
}

#[test]
fn demand_mean_is_half_of_d_max() {
    let region = Region {
        width: 5000.0,
        height: 5000.0,
    };
    let params = UserParams {
        count: 100_000,
        ..UserParams::default()
    };
    let users = spawn_users(&region, &params, &MobilityMix::default(), 42).unwrap();
    let mean = users.iter().map(|u| u.demand).sum::<f64>() / users.len() as f64;
    assert!((mean - 3.0).abs() < 0.05, "{mean}");
    assert!(users.iter().all(|u| u.demand > 0.0 && u.demand <= 6.0));
    let moving = users
        .iter()
        .filter(|u| u.mobility_class != MobilityClass::Stationary)
        .count();
    assert_eq!(moving, 50_000);
}

#[test]
fn same_seed_same_users() {
    let region = Region::default();
    let p = UserParams::default();
    let m = MobilityMix::default();
    assert_eq!(
        spawn_users(&region, &p, &m, 9).unwrap(),
        spawn_users(&region, &p, &m, 9).unwrap()
    );
    assert_ne!(
        spawn_users(&region, &p, &m, 9).unwrap(),
        spawn_users(&region, &p, &m, 10).unwrap()
    );
}
