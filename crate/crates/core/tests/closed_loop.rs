mod support;

use mpctune::lp::{solve, LpBackend, LpProblem, LpSolution, LpStatus};
use mpctune::plant::mpc::{slot, var};
use mpctune::plant::*;
use mpctune::sim::*;
use mpctune::Error;
use proptest::prelude::*;
use support::matching_cases;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn backoff_cases_partition_the_line(
        frac in -0.5f64..1.5,
        beta in 0.0f64..=0.5,
        cap in 1.0f64..1e4,
        snap in 0usize..6,
    ) {
        // Hit the boundaries exactly part of the time.
        let e = match snap {
            0 => beta * cap,
            1 => (1.0 - beta) * cap,
            2 => cap,
            3 => 0.0,
            _ => frac * cap,
        };
        let m = matching_cases(e, beta, cap);
        prop_assert_eq!(m.len(), 1, "{:?}", m);
        let u = update_tank(e, beta, cap);
        prop_assert_eq!(u.case, m[0]);
        prop_assert!((0.0..=cap).contains(&u.soc));
        prop_assert!(0.0 <= u.bounds.lower && u.bounds.lower <= u.soc);
        prop_assert!(u.soc <= u.bounds.upper && u.bounds.upper <= cap);
        prop_assert_eq!(u.overflow, (e - cap).max(0.0));
        prop_assert_eq!(u.deficit, (-e).max(0.0));
        if (0.0..=cap).contains(&e) {
            let z = update_tank(e, 0.0, cap);
            prop_assert_eq!(z.soc, e);
            prop_assert_eq!((z.bounds.lower, z.bounds.upper), (0.0, cap));
        }
    }
}

#[test]
fn update_moves_clamped_energy_into_carryovers() {
    let cfg = PlantConfig::default();
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    let mut st = PlantState::initial(&cfg, b);
    let u = apply_backoff_update(&mut st, cfg.capacity_cw + 20.0, -7.5, b, &cfg);
    assert_eq!(u.cw.case, BackoffCase::Overflow);
    assert_eq!(u.hw.case, BackoffCase::DryUp);
    assert_eq!(st.soc_cw, cfg.capacity_cw);
    assert_eq!(st.soc_hw, 0.0);
    assert_eq!((st.ol_cw, st.ul_hw, st.ul_cw, st.ol_hw), (20.0, 7.5, 0.0, 0.0));
    assert_eq!(st.bounds_hw.lower, 0.0);
}

fn first_hour(cfg: &PlantConfig, series: &DisturbanceSeries, b: BackoffTerms) -> (PlantState, LpProblem, LpSolution) {
    let st = PlantState::initial(cfg, b);
    let fw = ForecastGenerator::perfect().window(series, 0, cfg.horizon).unwrap();
    let p = build_mpc_lp(cfg, &st, &fw, b, 700.0).unwrap();
    let s = solve(&p).unwrap();
    (st, p, s)
}

#[test]
fn exact_forecast_reproduces_the_predicted_storage() {
    let cfg = PlantConfig { horizon: 24, ..PlantConfig::default() };
    let series = campus_fixture(48, 5);
    let b = BackoffTerms::new(0.1, 0.2).unwrap();
    let (st, p, s) = first_hour(&cfg, &series, b);
    let action = extract_first_action(&p, &s).unwrap();
    let step = plant_step(&st, &action, &series.hour(0), &cfg);
    assert!((step.soc_next_cw - s.x[var(0, slot::E_CW)]).abs() < 1e-6);
    assert!((step.soc_next_hw - s.x[var(0, slot::E_HW)]).abs() < 1e-6);
    assert!((step.r_e - s.x[var(0, slot::R_E)]).abs() < 1e-6);
}

#[test]
fn extra_chilled_load_comes_out_of_the_tank() {
    let cfg = PlantConfig { horizon: 24, ..PlantConfig::default() };
    let series = campus_fixture(48, 5);
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    let (st, p, s) = first_hour(&cfg, &series, b);
    let action = extract_first_action(&p, &s).unwrap();
    let base = plant_step(&st, &action, &series.hour(0), &cfg);
    let mut hot = series.hour(0);
    hot.load_cw += 10.0;
    let more = plant_step(&st, &action, &hot, &cfg);
    assert!((base.soc_next_cw - more.soc_next_cw - 10.0).abs() < 1e-9);
    assert_eq!(base.soc_next_hw, more.soc_next_hw);
    assert_eq!(base.r_e, more.r_e);
}

#[test]
fn draining_past_empty_books_a_deficit() {
    let cfg = PlantConfig::default();
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    let mut st = PlantState::initial(&cfg, b);
    st.soc_cw = 50.0;
    let action = ControlAction::default();
    let realized = HourDisturbance { load_e: 0.0, load_cw: 80.0, load_hw: 0.0, price_e: 0.1 };
    let step = plant_step(&st, &action, &realized, &cfg);
    assert_eq!(step.soc_next_cw, -30.0);
    let u = apply_backoff_update(&mut st, step.soc_next_cw, step.soc_next_hw, b, &cfg);
    assert_eq!(u.cw.case, BackoffCase::DryUp);
    assert_eq!(st.ul_cw, 30.0);
    assert_eq!(st.soc_cw, 0.0);
}

#[test]
fn zero_scenario_costs_nothing() {
    let cfg = PlantConfig { horizon: 6, ..PlantConfig::default() };
    let r = simulate(&cfg, &zero_fixture(10), BackoffTerms::new(0.1, 0.1).unwrap(), 2).unwrap();
    assert_eq!(r.hours, 2);
    assert_eq!(r.total_cost, 0.0);
    assert!(r.violations.is_empty());
}

fn desk() -> (PlantConfig, DisturbanceSeries) {
    let cfg = PlantConfig { horizon: 24, ..PlantConfig::default() };
    (cfg, campus_fixture(400, 3))
}

#[test]
fn costs_add_up_and_weeks_sum_to_total() {
    let (cfg, series) = desk();
    let r = simulate(&cfg, &series, BackoffTerms::new(0.05, 0.05).unwrap(), 200).unwrap();
    let b = r.breakdown;
    let parts = b.electricity + b.demand + b.water + b.gas + b.slack_penalty;
    assert!((r.total_cost - parts).abs() <= 1e-6 * r.total_cost);
    assert_eq!(r.weekly_cost.len(), 2);
    let weekly: f64 = r.weekly_cost.iter().sum();
    assert!((weekly - r.total_cost).abs() <= 1e-6 * r.total_cost);
    let hourly: f64 = r.trajectory.iter().map(|h| h.cost).sum();
    assert!((hourly - r.total_cost).abs() <= 1e-6 * r.total_cost);
    assert!(b.electricity > 0.0 && b.demand > 0.0 && b.water > 0.0);
    for h in &r.trajectory {
        assert!(0.0 <= h.lower_cw && h.lower_cw <= h.soc_cw && h.soc_cw <= h.upper_cw);
        assert!(h.upper_cw <= cfg.capacity_cw && h.upper_hw <= cfg.capacity_hw);
        assert!(0.0 <= h.lower_hw && h.lower_hw <= h.soc_hw && h.soc_hw <= h.upper_hw);
    }
}

#[test]
fn simulation_is_deterministic() {
    let (cfg, series) = desk();
    let b = BackoffTerms::new(0.2, 0.1).unwrap();
    let a = simulate(&cfg, &series, b, 60).unwrap();
    let c = simulate(&cfg, &series, b, 60).unwrap();
    assert_eq!(a, c);
}

#[test]
fn perfect_forecasts_never_overflow_or_dry_up() {
    let (mut cfg, series) = desk();
    cfg.forecast_noise = 0.0;
    for (cw, hw) in [(0.0, 0.0), (0.1, 0.4), (0.5, 0.5)] {
        let r = simulate(&cfg, &series, BackoffTerms::new(cw, hw).unwrap(), 168).unwrap();
        assert!(r.violations.is_empty(), "β=({cw},{hw}): {:?}", &r.violations[..1]);
        assert!(r
            .trajectory
            .iter()
            .all(|h| !matches!(h.case_cw, BackoffCase::Overflow | BackoffCase::DryUp)));
    }
}

#[test]
fn without_uncertainty_backoff_only_costs() {
    let (mut cfg, series) = desk();
    cfg.forecast_noise = 0.0;
    let free = simulate(&cfg, &series, BackoffTerms::new(0.0, 0.0).unwrap(), 168).unwrap();
    let tight = simulate(&cfg, &series, BackoffTerms::new(0.2, 0.2).unwrap(), 168).unwrap();
    assert!(free.total_cost <= tight.total_cost, "{} > {}", free.total_cost, tight.total_cost);
}

#[test]
fn forecast_noise_causes_violations_without_backoff() {
    let (cfg, series) = desk();
    let r = simulate(&cfg, &series, BackoffTerms::new(0.0, 0.0).unwrap(), 168).unwrap();
    assert!(!r.violations.is_empty());
    assert!(r.breakdown.slack_penalty > 0.0);
}

#[test]
fn demand_is_billed_at_each_month_end_and_at_the_end_of_the_span() {
    let (mut cfg, series) = desk();
    cfg.month_hours = vec![24];
    let r = simulate(&cfg, &series, BackoffTerms::new(0.1, 0.1).unwrap(), 60).unwrap();
    let billed: Vec<usize> = r.trajectory.iter().filter(|h| h.demand_charge > 0.0).map(|h| h.hour).collect();
    assert_eq!(billed, [23, 47, 59]);
    // Each bill is the realized peak of its own month.
    let peak = |hours: std::ops::Range<usize>| hours.map(|t| r.trajectory[t].r_e).fold(0.0, f64::max);
    assert!((r.trajectory[23].demand_charge - cfg.price_demand * peak(0..24)).abs() < 1e-9);
    assert!((r.trajectory[47].demand_charge - cfg.price_demand * peak(24..48)).abs() < 1e-9);
    assert!((r.trajectory[59].demand_charge - cfg.price_demand * peak(48..60)).abs() < 1e-9);
}

#[test]
fn short_series_is_a_config_error() {
    let (cfg, series) = desk();
    let b = BackoffTerms::new(0.1, 0.1).unwrap();
    assert!(matches!(simulate(&cfg, &series, b, 390), Err(Error::Config(_))));
    assert!(matches!(simulate(&cfg, &series, b, 0), Err(Error::Config(_))));
}

struct FailsAt(usize, std::sync::atomic::AtomicUsize);

impl LpBackend for FailsAt {
    fn solve(&self, p: &LpProblem) -> mpctune::Result<LpSolution> {
        let n = self.1.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if n == self.0 {
            Ok(LpSolution { status: LpStatus::Infeasible, x: vec![], objective: f64::NAN, iterations: 0 })
        } else {
            solve(p)
        }
    }
}

#[test]
fn solver_failure_aborts_with_a_report() {
    let (cfg, series) = desk();
    let backend = FailsAt(3, Default::default());
    let opts = SimOptions { forecast: ForecastGenerator::perfect(), backend: &backend };
    let err = simulate_with(&cfg, &series, BackoffTerms::new(0.1, 0.1).unwrap(), 10, &opts).unwrap_err();
    match err {
        Error::Aborted(report) => {
            assert_eq!(report.hour, 3);
            assert_eq!(report.state.hour, 3);
            assert!(report.reason.contains("Infeasible"));
            assert_eq!(report.lp.unwrap().num_vars(), lp_size(cfg.horizon));
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn outputs_are_written_and_stable() {
    let (cfg, series) = desk();
    let r = simulate(&cfg, &series, BackoffTerms::new(0.0, 0.0).unwrap(), 30).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    r.write_outputs(d1.path()).unwrap();
    simulate(&cfg, &series, BackoffTerms::new(0.0, 0.0).unwrap(), 30)
        .unwrap()
        .write_outputs(d2.path())
        .unwrap();
    for f in ["result.json", "trajectory.csv", "weekly.csv", "violations.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        assert_eq!(a, std::fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
    let traj = std::fs::read_to_string(d1.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("hour,soc_cw,soc_hw,"));
    assert_eq!(traj.lines().count(), 31);
    let viol = std::fs::read_to_string(d1.path().join("violations.csv")).unwrap();
    let mut lines = viol.lines();
    assert_eq!(lines.next(), Some("hour,tank,kind,magnitude"));
    assert_eq!(lines.count(), r.violations.len());
    let back: ClosedLoopResult =
        serde_json::from_str(&std::fs::read_to_string(d1.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(back.total_cost, r.total_cost);
}
