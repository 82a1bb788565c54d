use mpctune::objective::*;
use mpctune::plant::PlantConfig;
use mpctune::sim::{campus_fixture, zero_fixture};
use mpctune::Error;
use proptest::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

fn random_grid(seed: u64, n: usize, m: usize) -> CostGrid {
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut knots = |k: usize| {
        let mut v: Vec<f64> = (0..k).map(|i| (i as f64 + 0.2 + 0.6 * next()) * 0.5 / k as f64).collect();
        v[0] = 0.0;
        v[k - 1] = 0.5;
        v
    };
    let (a, b) = (knots(n), knots(m));
    let costs = (0..n * m).map(|_| 100.0 + 50.0 * next()).collect();
    CostGrid::new(a, b, costs).unwrap()
}

/// Bilinear value by a direct scan for the enclosing cell.
fn bilinear_oracle(g: &CostGrid, x: f64, y: f64) -> f64 {
    let find = |k: &[f64], v: f64| (0..k.len() - 1).find(|&i| k[i] <= v && v <= k[i + 1]).unwrap();
    let (i, j) = (find(&g.knots_cw, x), find(&g.knots_hw, y));
    let (x0, x1, y0, y1) = (g.knots_cw[i], g.knots_cw[i + 1], g.knots_hw[j], g.knots_hw[j + 1]);
    let f = |a, b| g.value(a, b).unwrap();
    (f(i, j) * (x1 - x) * (y1 - y) + f(i + 1, j) * (x - x0) * (y1 - y) + f(i, j + 1) * (x1 - x) * (y - y0)
        + f(i + 1, j + 1) * (x - x0) * (y - y0))
        / ((x1 - x0) * (y1 - y0))
}

#[test]
fn knots_are_reproduced_exactly() {
    let g = random_grid(1, 9, 9);
    for (i, &a) in g.knots_cw.iter().enumerate() {
        for (j, &b) in g.knots_hw.iter().enumerate() {
            assert_eq!(g.interpolate(a, b).unwrap(), g.value(i, j).unwrap());
        }
    }
}

#[test]
fn cell_centers_average_the_corners() {
    let g = random_grid(2, 5, 4);
    for i in 0..4 {
        for j in 0..3 {
            let c = [g.value(i, j), g.value(i + 1, j), g.value(i, j + 1), g.value(i + 1, j + 1)];
            let avg = c.iter().flatten().sum::<f64>() / 4.0;
            let mid = g.interpolate(
                0.5 * (g.knots_cw[i] + g.knots_cw[i + 1]),
                0.5 * (g.knots_hw[j] + g.knots_hw[j + 1]),
            );
            assert!((mid.unwrap() - avg).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn matches_the_direct_formula(seed in any::<u64>(), x in 0.0f64..=0.5, y in 0.0f64..=0.5) {
        let g = random_grid(seed, 9, 7);
        prop_assert!((g.interpolate(x, y).unwrap() - bilinear_oracle(&g, x, y)).abs() < 1e-9);
    }

    #[test]
    fn continuous_across_cell_edges(seed in any::<u64>(), k in 1usize..8, t in 0.0f64..=0.5) {
        let g = random_grid(seed, 9, 9);
        let j = (0..8).find(|&j| g.knots_hw[j] <= t && t <= g.knots_hw[j + 1]).unwrap();
        let v = (t - g.knots_hw[j]) / (g.knots_hw[j + 1] - g.knots_hw[j]);
        let f = |i, u: f64| {
            let c = |a, b| g.value(a, b).unwrap();
            (1.0 - u) * (1.0 - v) * c(i, j) + u * (1.0 - v) * c(i + 1, j) + (1.0 - u) * v * c(i, j + 1) + u * v * c(i + 1, j + 1)
        };
        // Edge x = knots_cw[k] seen from the cell on each side.
        prop_assert!((f(k - 1, 1.0) - f(k, 0.0)).abs() < 1e-12);
        prop_assert!((g.interpolate(g.knots_cw[k], t).unwrap() - f(k, 0.0)).abs() < 1e-12);
    }
}

#[test]
fn extrema_sit_on_knots() {
    for seed in 0..5 {
        let g = random_grid(seed, 9, 9);
        let (knot_min, _, _) = g.min().unwrap();
        // A uniform lattice refined with the knot coordinates themselves.
        let axis = |knots: &[f64]| {
            let mut v: Vec<f64> = (0..=400).map(|i| i as f64 / 800.0).chain(knots.iter().copied()).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let mut dense = f64::INFINITY;
        for &a in &axis(&g.knots_cw) {
            for &b in &axis(&g.knots_hw) {
                dense = dense.min(g.interpolate(a, b).unwrap());
            }
        }
        assert!((dense - knot_min).abs() < 1e-9, "{dense} vs {knot_min}");
    }
}

#[test]
fn outside_the_hull_is_a_domain_error() {
    let g = CostGrid::new(vec![0.1, 0.4], vec![0.0, 0.5], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!(matches!(g.interpolate(0.05, 0.2), Err(Error::Domain(_))));
    assert!(matches!(g.interpolate(0.2, 0.6), Err(Error::Domain(_))));
    assert!(g.interpolate(0.1, 0.5).is_ok());
}

#[test]
fn dense_argmin_of_two_minima_is_the_documented_one() {
    let s = Surface::TwoMinima;
    let h = 0.5 / 200.0;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=200 {
        for j in 0..=200 {
            let x = [i as f64 * h, j as f64 * h];
            let v = s.eval(&x);
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    let (m, _) = s.minimum();
    assert!((best.1[0] - m[0]).abs() <= h && (best.1[1] - m[1]).abs() <= h, "{:?}", best.1);
    let (q, qv) = Surface::Quadratic.minimum();
    assert_eq!(synthetic_surface("quadratic", &q).unwrap(), qv);
    let (l, lv) = s.local_minimum().unwrap();
    assert!(s.eval(&l) == lv && lv > s.eval(&m));
}

#[test]
fn grid_counts_its_simulations() {
    for n in [2, 9] {
        let calls = AtomicUsize::new(0);
        let knots = uniform_knots(n);
        let g = grid_evaluate_with(&knots, &knots, None, |a, b| {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(a + 10.0 * b)
        })
        .unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), n * n);
        assert_eq!(g.shape(), (n, n));
        assert!(g.is_complete());
        assert_eq!(g.value(1, 0), Some(knots[1]));
    }
}

#[test]
fn zero_scenario_grid_is_all_zero() {
    let cfg = PlantConfig { horizon: 6, ..PlantConfig::default() };
    let series = zero_fixture(30);
    let knots = [0.0, 0.25];
    let g = grid_evaluate(&cfg, &series, &knots, &knots, 24).unwrap();
    assert_eq!(g.costs, vec![Some(0.0); 4]);
    assert_eq!(g.provenance, Some(Provenance::of(&cfg, &series, 24)));
}

#[test]
fn thread_count_does_not_change_the_grid() {
    let cfg = PlantConfig { horizon: 12, ..PlantConfig::default() };
    let series = campus_fixture(60, 3);
    let knots = [0.05, 0.2, 0.35];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| grid_evaluate(&cfg, &series, &knots, &knots, 48).unwrap())
    };
    assert_eq!(run(1).to_json().unwrap(), run(4).to_json().unwrap());
}

#[test]
fn failures_leave_a_marked_partial_grid() {
    let knots = uniform_knots(3);
    let f = grid_evaluate_with(&knots, &knots, None, |a, b| {
        if a == 0.25 && b == 0.5 {
            Err(Error::Solver("infeasible".into()))
        } else {
            Ok(1.0)
        }
    })
    .unwrap_err();
    assert_eq!(f.failures.len(), 1);
    assert!(!f.grid.is_complete());
    assert_eq!(f.grid.costs.iter().filter(|c| c.is_none()).count(), 1);
    assert!(matches!(f.grid.interpolate(0.1, 0.1), Err(Error::Objective(_))));
}

#[test]
fn json_round_trip_and_provenance_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PlantConfig::default();
    let series = campus_fixture(100, 1);
    let mut g = random_grid(7, 3, 3);
    g.provenance = Some(Provenance::of(&cfg, &series, 48));
    let path = dir.path().join("grid.json");
    g.write(&path).unwrap();
    let back = CostGrid::read(&path).unwrap();
    assert_eq!(back, g);
    assert!(check_provenance(&back, &Provenance::of(&cfg, &series, 48)).is_ok());
    assert!(check_provenance(&back, &Provenance::of(&cfg, &series, 24)).is_err());
    let other = PlantConfig { forecast_noise: 0.2, ..cfg };
    assert!(check_provenance(&back, &Provenance::of(&other, &series, 48)).is_err());

    g.write_csv(&dir.path().join("grid.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("beta_cw,beta_hw,cost"));
    assert_eq!(text.lines().count(), 10);

    let mut bad = g.clone();
    bad.version = 99;
    bad.write(&path).unwrap();
    assert!(CostGrid::read(&path).is_err());
}
