use evodyn::analysis::claim_integrals;
use evodyn::game::faces;
use evodyn::rational::rat;
use evodyn::*;

#[test]
fn shapley_distance_decays_geometrically_at_events() {
    let g = build_game_66();
    let tri = shapley_triangle(&RpsSpec::Epsilon(rat(1, 5)), faces::g66_second(), &g).unwrap();
    let x0 = RationalPoint::from_integer_weights(&[3, 1, 4, 1, 5, 9]).unwrap();
    let sol = integrate_br(&g, &x0, 40.0, &BrOptions::default()).unwrap();
    // Once the off-face mass is negligible, distance is the |V| term.
    let late: Vec<_> = sol.events.iter().filter(|e| e.time > 10.0).collect();
    assert!(late.len() > 5);
    for w in late.windows(2) {
        let d0 = Scalar::to_f64(&distance_to_shapley(&g, &tri, &w[0].state));
        let d1 = Scalar::to_f64(&distance_to_shapley(&g, &tri, &w[1].state));
        let expected = (w[0].time - w[1].time).exp();
        assert!((d1 / d0 / expected - 1.0).abs() < 1e-6, "{} vs {}", d1 / d0, expected);
    }
}

#[test]
fn ratio_rate_matches_its_closed_form() {
    let g = build_game_77(&rat(1, 50)).unwrap();
    let x0 = FloatPoint::from_floats(vec![0.2, 0.1, 0.15, 0.1, 0.25, 0.12, 0.08]).unwrap();
    let opts = RepOptions { rtol: 1e-11, atol: 1e-14, ..Default::default() };
    let traj = integrate_rep(&g, &x0, 30.0, &opts).unwrap();
    let h = 1e-4;
    for k in 1..30 {
        let t = k as f64;
        let s = claim_integrals(&g, &traj, &[t - h, t, t + h]).unwrap();
        let fd = (s.ln_mu_over_lambda[2] - s.ln_mu_over_lambda[0]) / (2.0 * h);
        let rate = s.ln_mu_over_lambda_rate[1];
        assert!((fd - rate).abs() <= 1e-4 * rate.abs().max(1e-3), "t={t}: {fd} vs {rate}");
    }
}

#[test]
fn rescaled_times_split_the_clock() {
    let g = build_game_77(&rat(1, 50)).unwrap();
    let x0 = FloatPoint::from_floats(vec![0.2, 0.1, 0.15, 0.1, 0.25, 0.12, 0.08]).unwrap();
    let traj = integrate_rep(&g, &x0, 50.0, &RepOptions::default()).unwrap();
    let times: Vec<f64> = (0..=50).map(f64::from).collect();
    let s = claim_integrals(&g, &traj, &times).unwrap();
    for k in 1..times.len() {
        assert!(s.tau_bar[k] >= s.tau_bar[k - 1] && s.tau_hat[k] >= s.tau_hat[k - 1]);
        assert!(s.tau_bar[k] + s.tau_hat[k] < times[k]);
    }
}

#[test]
fn diverging_run_hands_the_mass_to_the_second_face() {
    let g = build_game_77(&rat(1, 50)).unwrap();
    let x0 = FloatPoint::from_floats(vec![0.332, 0.333, 0.334, 0.0005, 0.0002, 0.0001, 0.0002]).unwrap();
    let traj = integrate_rep(&g, &x0, 400.0, &RepOptions::default()).unwrap();
    let times: Vec<f64> = (0..=4000).map(|k| k as f64 / 10.0).collect();
    let s = claim_integrals(&g, &traj, &times).unwrap();
    let mu_max = times
        .iter()
        .map(|&t| traj.state_at(t).unwrap()[4..].iter().sum::<f64>())
        .fold(0.0, f64::max);
    assert!(mu_max > 1.0 / (1.0 + 1.0 / 50.0) - 0.01);
    // The claim integral cannot set records while the run sits near n123.
    assert!(s.claim_integral[10] < 0.0);
}
