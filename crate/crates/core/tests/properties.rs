//! Randomized property tests for the grid, measure and region primitives.

use hankelops::analysis::in_local_region;
use hankelops::grid::{
    cube_measure, cube_of, integrate, lp_norm, weak_l1_profile, Axis, GridFunction, Order,
    WeightedGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn small_grid(lambda: f64) -> Arc<WeightedGrid> {
    let ax = Axis::geometric_uniform(0.05, 8.0, 8).unwrap();
    WeightedGrid::new(vec![ax], Order::new(vec![lambda]).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // the measure of a box [a,b] is (b^{2l+1} - a^{2l+1})/(2l+1): integrating
    // its indicator over the grid reproduces the closed form
    #[test]
    fn weighted_box_identity(
        lambda in -0.45f64..2.5,
        lo_i in 0usize..32,
        len in 1usize..24,
    ) {
        let grid = small_grid(lambda);
        let breaks = grid.axis(0).breakpoints().to_vec();
        let lo = breaks[lo_i % (breaks.len() - 1)];
        let hi = breaks[(lo_i % (breaks.len() - 1) + len).min(breaks.len() - 1)];
        prop_assume!(hi > lo);
        let chi = GridFunction::from_fn(grid.clone(), |x| {
            Complex64::new(if x[0] >= lo && x[0] <= hi { 1.0 } else { 0.0 }, 0.0)
        }).unwrap();
        let s = 2.0 * lambda + 1.0;
        let exact = (hi.powf(s) - lo.powf(s)) / s;
        let got = integrate(&chi).re;
        prop_assert!(
            (got - exact).abs() <= 1e-10 * exact.abs().max(1.0),
            "box [{lo},{hi}] lambda {lambda}: {got} vs {exact}"
        );
    }

    // gamma * m{|f| > gamma} is dominated by ||f||_1 and the superlevel
    // measure is monotone nonincreasing in gamma
    #[test]
    fn superlevel_monotonicity(
        lambda in -0.45f64..2.5,
        seed in 0u64..1000,
        scale in 0.1f64..10.0,
    ) {
        let grid = small_grid(lambda);
        let f = hankelops::inputs::random_smooth(grid.clone(), seed, 3).unwrap()
            .scale(Complex64::new(scale, 0.0));
        let top = f.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        prop_assume!(top > 0.0);
        let gammas: Vec<f64> = (1..=12).map(|j| top * 0.5f64.powi(j)).collect();
        let profile = weak_l1_profile(&f, &gammas).unwrap();
        let l1 = lp_norm(&f, 1.0).unwrap();
        let mut prev_measure = 0.0f64;
        for (k, &(gamma, gm)) in profile.iter().enumerate() {
            prop_assert!(gm <= l1 * (1.0 + 1e-12), "gamma*m = {gm} > l1 = {l1}");
            let measure = gm / gamma;
            if k > 0 {
                prop_assert!(measure >= prev_measure - 1e-12);
            }
            prev_measure = measure;
        }
    }

    // every positive point lies in exactly its dyadic cube, the cube lies in
    // its enlargement, and the cube measure matches the closed form
    #[test]
    fn dyadic_cube_partition(
        x in prop::collection::vec(1e-3f64..1e3, 1..=3),
        lambda in -0.45f64..2.5,
    ) {
        let cube = cube_of(&x).unwrap();
        prop_assert!(cube.contains(&x));
        prop_assert!(cube.enlarged_contains(&x));
        // neighbours in the first coordinate do not contain x
        let mut shifted = cube.j.clone();
        shifted[0] += 1;
        let neighbour = hankelops::grid::DyadicCube { j: shifted };
        prop_assert!(!neighbour.contains(&x));
        let order = Order::new(vec![lambda; x.len()]).unwrap();
        let m = cube_measure(&cube, &order).unwrap();
        let s = 2.0 * lambda + 1.0;
        let exact: f64 = cube
            .j
            .iter()
            .map(|&ji| (2f64.powi(ji + 1).powf(s) - 2f64.powi(ji).powf(s)) / s)
            .product();
        prop_assert!((m - exact).abs() <= 1e-10 * exact.abs());
    }

    // the local region is symmetric and excludes its boundary
    #[test]
    fn local_region_symmetry(
        x in prop::collection::vec(1e-2f64..1e2, 1..=3),
        factors in prop::collection::vec(0.4f64..2.6, 1..=3),
    ) {
        prop_assume!(x.len() == factors.len());
        let y: Vec<f64> = x.iter().zip(&factors).map(|(&a, &c)| a * c).collect();
        prop_assert_eq!(in_local_region(&x, &y), in_local_region(&y, &x));
        let boundary: Vec<f64> = x.iter().map(|&a| 2.0 * a).collect();
        prop_assert!(!in_local_region(&x, &boundary));
    }

    // transform linearity: h(af + bg) = a h(f) + b h(g) to machine precision
    #[test]
    fn transform_linearity(
        lambda in -0.45f64..2.5,
        a_re in -2.0f64..2.0,
        b_im in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let grid = small_grid(lambda);
        let plan = hankelops::hankel::TransformPlan::new(&grid).unwrap();
        let f = hankelops::inputs::random_smooth(grid.clone(), seed, 2).unwrap();
        let g = hankelops::inputs::random_smooth(grid.clone(), seed + 7, 2).unwrap();
        let a = Complex64::new(a_re, 0.5);
        let b = Complex64::new(1.0, b_im);
        let combo = f.scale(a).axpy(b, &g).unwrap();
        let lhs = plan.apply(&combo).unwrap();
        let rhs = plan.apply(&f).unwrap().scale(a)
            .axpy(b, &plan.apply(&g).unwrap()).unwrap();
        let denom = lp_norm(&lhs, f64::INFINITY).unwrap().max(1e-30);
        let diff = lp_norm(&lhs.axpy(Complex64::new(-1.0, 0.0), &rhs).unwrap(), f64::INFINITY)
            .unwrap();
        prop_assert!(diff / denom <= 1e-12);
    }
}
