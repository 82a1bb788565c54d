use mpctune::lp::{solve, LpSolution, LpStatus};
use mpctune::plant::mpc::{peak_var, slot, var};
use mpctune::plant::*;
use mpctune::sim::{campus_fixture, ForecastGenerator};
use mpctune::Error;
use proptest::prelude::*;

fn flat(horizon: usize, e: f64, cw: f64, hw: f64, price: f64) -> ForecastWindow {
    ForecastWindow {
        load_e: vec![e; horizon],
        load_cw: vec![cw; horizon],
        load_hw: vec![hw; horizon],
        price_e: vec![price; horizon],
    }
}

fn solve_mpc(
    cfg: &PlantConfig,
    fw: &ForecastWindow,
    b: BackoffTerms,
) -> (mpctune::lp::LpProblem, LpSolution) {
    let state = PlantState::initial(cfg, b);
    let p = build_mpc_lp(cfg, &state, fw, b, 720.0).unwrap();
    let s = solve(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    (p, s)
}

#[test]
fn variable_count_is_twenty_per_hour_plus_peak() {
    for horizon in [1, 24, 48] {
        let cfg = PlantConfig { horizon, ..PlantConfig::default() };
        let b = BackoffTerms::new(0.1, 0.1).unwrap();
        let p = build_mpc_lp(&cfg, &PlantState::initial(&cfg, b), &flat(horizon, 1.0, 1.0, 1.0, 0.1), b, 1.0)
            .unwrap();
        assert_eq!(p.num_vars(), 20 * horizon + 1);
        assert_eq!(lp_size(horizon), 20 * horizon + 1);
        assert_eq!(p.var_names[peak_var(horizon)], "R");
    }
}

#[test]
fn zero_loads_and_prices_cost_nothing() {
    let cfg = PlantConfig { horizon: 1, ..PlantConfig::default() };
    let (p, s) = solve_mpc(&cfg, &flat(1, 0.0, 0.0, 0.0, 0.0), BackoffTerms::new(0.1, 0.1).unwrap());
    assert!(s.objective.abs() < 1e-12);
    let a = extract_first_action(&p, &s).unwrap();
    // With zero prices the automatic penalty is zero too, so storage flows
    // against free slack are not unique; production is.
    for u in [Unit::Cs, Unit::Hrc, Unit::Hwg, Unit::Ct, Unit::Hx] {
        assert!(a.load(u).abs() < 1e-9, "{u:?} = {}", a.load(u));
    }
}

#[test]
fn hand_solved_two_hour_cooling() {
    // Chilled tank starts at the bottom of its band, so the 100 kW load in
    // hour 0 must be produced. The chiller beats the heat-recovery chiller
    // (0.224 vs 0.3 kW electric per kW cooling) and slack is penalized at 1 $/kWh.
    let cfg = PlantConfig { horizon: 2, initial_soc: 0.1, ..PlantConfig::default() };
    let mut fw = flat(2, 0.0, 0.0, 0.0, 0.1);
    fw.load_cw[0] = 100.0;
    let (p, s) = solve_mpc(&cfg, &fw, BackoffTerms::new(0.1, 0.1).unwrap());
    let a = extract_first_action(&p, &s).unwrap();
    assert!((a.load(Unit::Cs) - 100.0).abs() < 1e-7);
    assert!((a.load(Unit::Ct) - 120.0).abs() < 1e-7);
    assert!(a.load(Unit::Hrc).abs() < 1e-7);
    assert!(a.load(Unit::Cw).abs() < 1e-7);
    let r_e = 0.2 * 100.0 + 0.02 * 120.0;
    assert!((s.x[var(0, slot::R_E)] - r_e).abs() < 1e-7);
    assert!((s.x[peak_var(2)] - r_e).abs() < 1e-7);
    let expected = 0.1 * r_e + 0.009 * 0.4 * 120.0 + 4.5 / 720.0 * r_e;
    assert!((s.objective - expected).abs() < 1e-9, "{} vs {expected}", s.objective);
}

#[test]
fn balances_hold_at_the_optimum() {
    let cfg = PlantConfig::default();
    let series = campus_fixture(200, 4);
    let fw = ForecastGenerator::new(0.1, 1).window(&series, 17, cfg.horizon).unwrap();
    let b = BackoffTerms::new(0.2, 0.1).unwrap();
    let (p, s) = solve_mpc(&cfg, &fw, b);
    assert!(p.max_violation(&s.x) < 1e-6);
    let x = |k, sl| s.x[var(k, sl)];
    let al = cfg.alpha;
    for k in 0..cfg.horizon {
        let chilled = x(k, slot::P_CS) + x(k, slot::P_HRC) + x(k, slot::P_CW) + x(k, slot::S_UN_CW)
            - x(k, slot::S_OV_CW);
        assert!((chilled - fw.load_cw[k]).abs() < 1e-6);
        let hot = al.h_hrc * x(k, slot::P_HRC) + x(k, slot::P_HWG) - x(k, slot::P_HX)
            + x(k, slot::P_HW)
            + x(k, slot::S_UN_HW)
            - x(k, slot::S_OV_HW);
        assert!((hot - fw.load_hw[k]).abs() < 1e-6);
        let (lo, hi) = BackoffTerms::band(b.cw, cfg.capacity_cw);
        assert!(x(k, slot::E_CW) >= lo - 1e-6 && x(k, slot::E_CW) <= hi + 1e-6);
        assert!(s.x[peak_var(cfg.horizon)] >= x(k, slot::R_E) - 1e-6);
    }
}

#[test]
fn prices_scale_the_objective() {
    let base = PlantConfig { horizon: 24, penalty_cw: Some(1.4), penalty_hw: Some(1.4), ..PlantConfig::default() };
    let series = campus_fixture(100, 2);
    let fw = ForecastGenerator::new(0.1, 9).window(&series, 5, 24).unwrap();
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    let (_, s1) = solve_mpc(&base, &fw, b);
    let c = 3.0;
    let scaled = PlantConfig {
        price_water: base.price_water * c,
        price_gas: base.price_gas * c,
        price_demand: base.price_demand * c,
        penalty_cw: Some(1.4 * c),
        penalty_hw: Some(1.4 * c),
        ..base.clone()
    };
    let mut fw2 = fw.clone();
    fw2.price_e.iter_mut().for_each(|p| *p *= c);
    let (_, s2) = solve_mpc(&scaled, &fw2, b);
    assert!((s2.objective - c * s1.objective).abs() <= 1e-9 * s2.objective.abs());
}

#[test]
fn rejects_bad_inputs() {
    let cfg = PlantConfig { horizon: 4, ..PlantConfig::default() };
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    let st = PlantState::initial(&cfg, b);
    let short = flat(3, 1.0, 1.0, 1.0, 0.1);
    assert!(matches!(build_mpc_lp(&cfg, &st, &short, b, 1.0), Err(Error::Dimension(_))));
    let neg = flat(4, 1.0, -1.0, 1.0, 0.1);
    assert!(matches!(build_mpc_lp(&cfg, &st, &neg, b, 1.0), Err(Error::Domain(_))));
    assert!(build_mpc_lp(&cfg, &st, &flat(4, 1.0, 1.0, 1.0, 0.1), b, 0.0).is_err());
    assert!(BackoffTerms::new(0.6, 0.1).is_err());
    assert!(BackoffTerms::new(0.1, -0.01).is_err());
    let p = build_mpc_lp(&cfg, &st, &flat(4, 1.0, 1.0, 1.0, 0.1), b, 1.0).unwrap();
    let bad = LpSolution { status: LpStatus::Infeasible, x: vec![], objective: f64::NAN, iterations: 0 };
    assert!(matches!(extract_first_action(&p, &bad), Err(Error::Solver(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Larger back-off only shrinks the feasible set of a single solve.
    #[test]
    fn objective_monotone_in_backoff(
        seed in 0u64..1000,
        t0 in 0usize..100,
        cw in 0.0f64..0.45, hw in 0.0f64..0.45,
        dcw in 0.0f64..0.05, dhw in 0.0f64..0.05,
    ) {
        let cfg = PlantConfig { horizon: 12, ..PlantConfig::default() };
        let series = campus_fixture(200, seed);
        let fw = ForecastGenerator::new(0.1, seed).window(&series, t0, 12).unwrap();
        let lo = BackoffTerms::new(cw, hw).unwrap();
        let hi = BackoffTerms::new(cw + dcw, hw + dhw).unwrap();
        // Same starting state for both, so only the bands differ.
        let state = PlantState::initial(&cfg, lo);
        let state_hi = PlantState { bounds_cw: PlantState::initial(&cfg, hi).bounds_cw,
            bounds_hw: PlantState::initial(&cfg, hi).bounds_hw, ..state.clone() };
        let a = solve(&build_mpc_lp(&cfg, &state, &fw, lo, 500.0).unwrap()).unwrap();
        let b = solve(&build_mpc_lp(&cfg, &state_hi, &fw, hi, 500.0).unwrap()).unwrap();
        prop_assert!(a.objective <= b.objective + 1e-9 * b.objective.abs().max(1.0),
            "{} > {}", a.objective, b.objective);
    }
}
