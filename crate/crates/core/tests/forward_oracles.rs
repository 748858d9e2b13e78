use elastoinverse_core::experiments::{analytic_rod_response, POINT_A};
use elastoinverse_core::{LoadSignal, ModelConfig, PlateSetup, Point, Quantity};

const ROD_MODES: usize = 4000;

/// Leapfrog solution of the clamped–loaded rod sampled at `x1` every `dt`.
fn rod_finite_difference(load: &LoadSignal, x1: f64, dt: f64, t_end: f64) -> Vec<f64> {
    let nx = 2000;
    let dx = 1.0 / nx as f64;
    let ds = 0.5 * dx;
    let lam2 = (ds / dx).powi(2);
    let mut prev = vec![0.0; nx + 1];
    let mut cur = vec![0.0; nx + 1];
    let mut next = vec![0.0; nx + 1];
    let sub = (dt / ds).round() as usize;
    let n_out = (t_end / dt).round() as usize + 1;
    let probe = (x1 / dx).round() as usize;
    let mut out = vec![0.0];
    let mut t = 0.0;
    let mut first = true;
    while out.len() < n_out {
        for _ in 0..sub {
            let p = load.value(t);
            // ghost node from u_x(0) = −P
            let ghost = cur[1] + 2.0 * dx * p;
            let lap0 = ghost - 2.0 * cur[0] + cur[1];
            next[0] = if first { cur[0] + 0.5 * lam2 * lap0 } else { 2.0 * cur[0] - prev[0] + lam2 * lap0 };
            for i in 1..nx {
                let lap = cur[i - 1] - 2.0 * cur[i] + cur[i + 1];
                next[i] = if first { cur[i] + 0.5 * lam2 * lap } else { 2.0 * cur[i] - prev[i] + lam2 * lap };
            }
            next[nx] = 0.0;
            first = false;
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            t += ds;
        }
        out.push(cur[probe]);
    }
    out
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn rod_series(load: &LoadSignal, x1: f64, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| analytic_rod_response(x1, t, load, 1.0, ROD_MODES).0).collect()
}

#[test]
fn rod_series_agrees_with_finite_differences() {
    let times: Vec<f64> = (0..=80).map(|j| j as f64 * 0.1).collect();
    for load in [LoadSignal::heaviside(1.0), LoadSignal::periodic(1.0, 1.0)] {
        for x1 in [0.0, 0.5] {
            let fd = rod_finite_difference(&load, x1, 0.1, 8.0);
            let series = rod_series(&load, x1, &times);
            let e = rel_l2(&series, &fd);
            assert!(e < 5e-3, "{} at x={x1}: {e}", load.name());
        }
    }
}

fn plate_error(internal: Vec<Point>) -> f64 {
    let setup = PlateSetup::new(ModelConfig {
        internal_points: internal,
        t_end: 8.0,
        ..ModelConfig::default()
    })
    .unwrap();
    let load = LoadSignal::heaviside(1.0);
    let resp = setup.run_forward(&load).unwrap();
    let node = setup.model.locate(Point::new(POINT_A.0, POINT_A.1)).unwrap();
    let dof = setup.state_space.dof_of_node(node).unwrap();
    let plate = resp.series(dof, Quantity::Displacement);
    rel_l2(&plate, &rod_series(&load, 0.0, &resp.times))
}

fn interior_grid(n: usize) -> Vec<Point> {
    let h = 1.0 / (n + 1) as f64;
    (1..=n)
        .flat_map(|i| (1..=n).map(move |j| Point::new(i as f64 * h, j as f64 * h)))
        .collect()
}

#[test]
fn free_edge_response_converges_with_interior_points() {
    let errors: Vec<f64> = [1usize, 3, 5, 7].iter().map(|&n| plate_error(interior_grid(n))).collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "errors not decreasing: {errors:?}");
    }
    assert!(errors[3] < 0.05, "7×7 interior grid error {}", errors[3]);
}

#[test]
fn periodic_free_edge_amplitude() {
    let setup = PlateSetup::new(ModelConfig::default()).unwrap();
    let load = LoadSignal::periodic(1.0, 1.0);
    let resp = setup.run_forward(&load).unwrap();
    let node = setup.model.locate(Point::new(POINT_A.0, POINT_A.1)).unwrap();
    let dof = setup.state_space.dof_of_node(node).unwrap();
    let plate = resp.series(dof, Quantity::Displacement);
    let rod = rod_series(&load, 0.0, &resp.times);
    let peak = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ratio = peak(&plate) / peak(&rod);
    assert!((ratio - 1.0).abs() < 0.1, "peak ratio {ratio}");
}

#[test]
fn zero_load_zero_response() {
    let setup = PlateSetup::new(ModelConfig::default()).unwrap();
    let resp = setup.run_forward_samples(vec![0.0; setup.config.n_samples()]).unwrap();
    assert!(resp.displacement.iter().chain(&resp.velocity).all(|v| v.iter().all(|&x| x == 0.0)));
}
