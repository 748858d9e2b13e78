//! Synthetic experiments: analytic rod oracle, measurement noise, and the
//! forward and inverse pipelines on the plate.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drbem::PlateModel;
use crate::error::{Error, Result};
use crate::filter::{forward_sweep, AugmentedModel, EstimationResult, FilterWeights, GainSchedule, Quantity, Sensor};
use crate::lcurve::{l_curve_from_schedules, log_grid, LCurveSelection};
use crate::mesh::{build_square_plate, Point};
use crate::pim::{build_state_space, build_transition, simulate, StateSpaceModel, TransitionSet};

/// Default location of sensor A, the middle of the loaded edge.
pub const POINT_A: (f64, f64) = (0.0, 0.5);
/// Default location of sensor C, the internal collocation point.
pub const POINT_C: (f64, f64) = (0.5, 0.5);

/// Fraction of the record treated as the closing window.
pub const END_WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadKind {
    /// `P0` for `t ≥ 0`.
    Heaviside,
    /// `P0 sin(ω t)`.
    Periodic { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSignal {
    pub kind: LoadKind,
    pub amplitude: f64,
}

impl LoadSignal {
    pub fn heaviside(amplitude: f64) -> Self {
        LoadSignal {
            kind: LoadKind::Heaviside,
            amplitude,
        }
    }

    pub fn periodic(amplitude: f64, omega: f64) -> Self {
        LoadSignal {
            kind: LoadKind::Periodic { omega },
            amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!("load amplitude must be positive, got {}", self.amplitude)));
        }
        if let LoadKind::Periodic { omega } = self.kind {
            if !(omega > 0.0) || !omega.is_finite() {
                return Err(Error::InvalidArgument(format!("load frequency must be positive, got {omega}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            LoadKind::Heaviside => {
                if t >= 0.0 {
                    self.amplitude
                } else {
                    0.0
                }
            }
            LoadKind::Periodic { omega } => self.amplitude * (omega * t).sin(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LoadKind::Heaviside => "heaviside",
            LoadKind::Periodic { .. } => "periodic",
        }
    }
}

/// Modal series for the clamped–loaded rod `u_tt = c² u_xx`, `u(1, t) = 0`,
/// `u_x(0, t) = −P(t)`, starting from rest. Returns displacement and
/// velocity at `x1`.
///
/// Modes are `cos((2k−1)π x/2)` with `ω_k = (2k−1)πc/2`; each modal
/// amplitude obeys `a'' + ω_k² a = 2c² P(t)`. Use at least 50 modes.
pub fn analytic_rod_response(x1: f64, t: f64, load: &LoadSignal, c: f64, n_modes: usize) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    let p0 = load.amplitude;
    let mut u = 0.0;
    let mut v = 0.0;
    for k in 1..=n_modes {
        let lambda = (2 * k - 1) as f64 * PI / 2.0;
        let wk = lambda * c;
        let shape = (lambda * x1).cos();
        let force = 2.0 * c * c * p0;
        let (a, da) = match load.kind {
            LoadKind::Heaviside => {
                let (s, co) = (wk * t).sin_cos();
                (force / (wk * wk) * (1.0 - co), force / wk * s)
            }
            LoadKind::Periodic { omega } => {
                let (sk, ck) = (wk * t).sin_cos();
                let (sw, cw) = (omega * t).sin_cos();
                if ((wk - omega) / wk).abs() < 1e-9 {
                    // resonant mode
                    (
                        force / (2.0 * wk * wk) * (sk - wk * t * ck),
                        force / 2.0 * t * sk,
                    )
                } else {
                    let den = wk * wk - omega * omega;
                    (force / den * (sw - omega / wk * sk), force * omega / den * (cw - ck))
                }
            }
        };
        u += a * shape;
        v += da * shape;
    }
    (u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDistribution {
    /// `ε = P A (γ − 0.5)`, `γ ~ U[0, 1)`.
    #[default]
    Uniform,
    /// `ε = P A ξ`, `ξ ~ N(0, 1)`.
    Normal,
}

/// Generator for one measurement channel: ChaCha8 seeded through
/// `SeedableRng::seed_from_u64(seed)`, stream set to the channel index.
pub fn channel_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Peak absolute value of a series.
pub fn peak(series: &[f64]) -> f64 {
    series.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// `d_j = c_j + P A (γ_j − 0.5)`. The amplitude defaults to the peak of
/// `exact`.
pub fn add_noise(
    exact: &[f64],
    noise_pct: f64,
    amplitude: Option<f64>,
    seed: u64,
    stream: u64,
    distribution: NoiseDistribution,
) -> Result<Vec<f64>> {
    if !(noise_pct >= 0.0) || !noise_pct.is_finite() {
        return Err(Error::InvalidArgument(format!("noise level must be ≥ 0, got {noise_pct}")));
    }
    if noise_pct == 0.0 {
        return Ok(exact.to_vec());
    }
    let amp = amplitude.unwrap_or_else(|| peak(exact));
    if !(amp > 0.0) {
        return Err(Error::InvalidArgument(format!("noise amplitude must be positive, got {amp}")));
    }
    let scale = noise_pct * amp;
    let mut rng = channel_rng(seed, stream);
    Ok(exact
        .iter()
        .map(|c| {
            let e = match distribution {
                NoiseDistribution::Uniform => scale * (rng.random::<f64>() - 0.5),
                NoiseDistribution::Normal => {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    scale * xi
                }
            };
            c + e
        })
        .collect())
}

/// Geometry, material and time grid of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub element_length: f64,
    pub internal_points: Vec<Point>,
    pub wave_speed: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            element_length: 0.1,
            internal_points: vec![Point::new(POINT_C.0, POINT_C.1)],
            wave_speed: 1.0,
            dt: 0.1,
            t_end: 12.0,
        }
    }
}

impl ModelConfig {
    pub fn n_samples(&self) -> usize {
        (self.t_end / self.dt).round() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|j| j as f64 * self.dt).collect()
    }
}

/// Assembled model ready for forward and inverse runs.
#[derive(Debug, Clone)]
pub struct PlateSetup {
    pub config: ModelConfig,
    pub model: PlateModel,
    pub state_space: StateSpaceModel,
    pub transition: TransitionSet,
}

/// Full response histories on the reduced degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResponse {
    pub times: Vec<f64>,
    pub loads: Vec<f64>,
    pub displacement: Vec<DVector<f64>>,
    pub velocity: Vec<DVector<f64>>,
}

impl ForwardResponse {
    pub fn series(&self, dof: usize, quantity: Quantity) -> Vec<f64> {
        let src = match quantity {
            Quantity::Displacement => &self.displacement,
            Quantity::Velocity => &self.velocity,
        };
        src.iter().map(|v| v[dof]).collect()
    }
}

impl PlateSetup {
    pub fn new(config: ModelConfig) -> Result<Self> {
        if !(config.dt > 0.0) || !(config.t_end >= 10.0 * config.dt) {
            return Err(Error::InvalidArgument(format!(
                "need dt > 0 and t_end ≥ 10 dt, got dt = {}, t_end = {}",
                config.dt, config.t_end
            )));
        }
        let mesh = build_square_plate(config.element_length, &config.internal_points)?;
        let model = PlateModel::assemble(mesh, config.wave_speed)?;
        let state_space = build_state_space(&model.reduced)?;
        let transition = build_transition(&state_space, config.dt)?;
        Ok(PlateSetup {
            config,
            model,
            state_space,
            transition,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.state_space.n_dof
    }

    pub fn load_samples(&self, load: &LoadSignal) -> Vec<f64> {
        self.config.times().iter().map(|&t| load.value(t)).collect()
    }

    pub fn run_forward(&self, load: &LoadSignal) -> Result<ForwardResponse> {
        load.validate()?;
        let loads = self.load_samples(load);
        self.run_forward_samples(loads)
    }

    /// Forward run for arbitrary load samples on the time grid.
    pub fn run_forward_samples(&self, loads: Vec<f64>) -> Result<ForwardResponse> {
        if loads.len() != self.config.n_samples() {
            return Err(Error::DimensionMismatch(format!(
                "{} load samples for {} time points",
                loads.len(),
                self.config.n_samples()
            )));
        }
        let n = self.n_dof();
        let v0 = DVector::zeros(2 * n);
        let states = simulate(&self.transition, &self.state_space.force_map, &loads, &v0)?;
        Ok(ForwardResponse {
            times: self.config.times(),
            loads,
            displacement: states.iter().map(|v| v.rows(0, n).into_owned()).collect(),
            velocity: states.iter().map(|v| v.rows(n, n).into_owned()).collect(),
        })
    }

    /// Resolves sensor specifications to mesh nodes.
    pub fn sensors(&self, specs: &[SensorSpec]) -> Result<Vec<Sensor>> {
        specs
            .iter()
            .map(|s| {
                let node = self.model.locate(s.point)?;
                if self.state_space.dof_of_node(node).is_none() {
                    return Err(Error::UnknownSensor(node));
                }
                Ok(Sensor {
                    node,
                    quantity: s.quantity,
                })
            })
            .collect()
    }

    pub fn solver(&self, specs: &[SensorSpec]) -> Result<InverseSolver> {
        let sensors = self.sensors(specs)?;
        let aug = crate::filter::augment(&self.transition, &self.state_space, &sensors)?;
        let weights = FilterWeights::identity(sensors.len(), 1.0)?;
        Ok(InverseSolver {
            aug,
            sensors,
            weights,
            n_steps: self.config.n_samples(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Noisy measurements of `response` at the scenario sensors.
    pub fn measure(&self, response: &ForwardResponse, specs: &[SensorSpec], noise: &NoiseSpec) -> Result<MeasurementSet> {
        let sensors = self.sensors(specs)?;
        let mut channels = Vec::with_capacity(sensors.len());
        for (i, (spec, s)) in specs.iter().zip(&sensors).enumerate() {
            let dof = self.state_space.dof_of_node(s.node).ok_or(Error::UnknownSensor(s.node))?;
            let exact = response.series(dof, s.quantity);
            let amplitude = peak(&exact);
            let noisy = if noise.level == 0.0 || amplitude == 0.0 {
                exact.clone()
            } else {
                add_noise(&exact, noise.level, Some(amplitude), noise.seed, i as u64, noise.distribution)?
            };
            channels.push(MeasurementChannel {
                label: spec.label.clone(),
                node: s.node,
                quantity: s.quantity,
                amplitude,
                exact,
                noisy,
            });
        }
        Ok(MeasurementSet {
            channels,
            times: response.times.clone(),
            noise_pct: noise.level,
            seed: noise.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub label: String,
    pub point: Point,
    pub quantity: Quantity,
}

impl SensorSpec {
    pub fn new(label: &str, point: (f64, f64), quantity: Quantity) -> Self {
        SensorSpec {
            label: label.to_string(),
            point: Point::new(point.0, point.1),
            quantity,
        }
    }

    pub fn a(quantity: Quantity) -> Self {
        Self::new("A", POINT_A, quantity)
    }

    pub fn c(quantity: Quantity) -> Self {
        Self::new("C", POINT_C, quantity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Fraction of the channel peak, e.g. 0.1.
    pub level: f64,
    pub distribution: NoiseDistribution,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    pub label: String,
    pub node: usize,
    pub quantity: Quantity,
    /// Peak of the exact series, the noise reference amplitude.
    pub amplitude: f64,
    pub exact: Vec<f64>,
    pub noisy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub channels: Vec<MeasurementChannel>,
    pub times: Vec<f64>,
    pub noise_pct: f64,
    pub seed: u64,
}

impl MeasurementSet {
    /// Per-instant measurement vectors `d*_j`.
    pub fn vectors(&self) -> Vec<DVector<f64>> {
        (0..self.times.len())
            .map(|j| DVector::from_iterator(self.channels.len(), self.channels.iter().map(|c| c.noisy[j])))
            .collect()
    }

    /// CSV `t,channel,exact,noisy`, channel-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,channel,exact,noisy\n");
        for ch in &self.channels {
            let name = format!("{}_{}", ch.label, ch.quantity.as_str());
            for (j, t) in self.times.iter().enumerate() {
                writeln!(out, "{:.16e},{name},{:.16e},{:.16e}", t, ch.exact[j], ch.noisy[j]).unwrap();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regularization {
    Fixed(f64),
    LCurve(Vec<f64>),
}

/// Default L-curve grid: 25 points, 1e-3 to 1e3.
pub fn default_b_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 25)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub load: LoadSignal,
    pub sensors: Vec<SensorSpec>,
    pub noise: NoiseSpec,
    pub regularization: Regularization,
}

/// Error measures of a reconstructed load against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `‖r̂ − r‖ / ‖r‖` over the whole record.
    pub rel_l2_full: f64,
    /// Same, excluding the closing window.
    pub rel_l2_trunc: f64,
    /// RMS error in the closing window over RMS error before it.
    pub end_ratio: f64,
    pub sum_abs_error: f64,
    /// Pearson correlation of reconstruction and truth over the record.
    pub correlation: f64,
}

impl Metrics {
    pub fn compute(estimate: &[f64], truth: &[f64]) -> Self {
        let n = truth.len().min(estimate.len());
        let last = ((n as f64) * END_WINDOW_FRACTION).ceil() as usize;
        let trunc = n - last.min(n);
        let err: Vec<f64> = estimate.iter().zip(truth).map(|(a, b)| a - b).collect();
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let rel = |e: &[f64], r: &[f64]| {
            let den = sq(r).sqrt();
            if den > 0.0 {
                sq(e).sqrt() / den
            } else {
                sq(e).sqrt()
            }
        };
        let rms = |v: &[f64]| if v.is_empty() { 0.0 } else { (sq(v) / v.len() as f64).sqrt() };
        let head_rms = rms(&err[..trunc]);
        let end_ratio = if head_rms > 0.0 { rms(&err[trunc..n]) / head_rms } else { f64::INFINITY };
        Metrics {
            rel_l2_full: rel(&err[..n], &truth[..n]),
            rel_l2_trunc: rel(&err[..trunc], &truth[..trunc]),
            end_ratio,
            sum_abs_error: err.iter().map(|e| e.abs()).sum(),
            correlation: pearson(&estimate[..n], &truth[..n]),
        }
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Filter bound to one sensor layout; gain schedules are cached per `B`
/// so repeated records (seeds, noise levels) reuse them.
#[derive(Debug)]
pub struct InverseSolver {
    pub aug: AugmentedModel,
    pub sensors: Vec<Sensor>,
    pub weights: FilterWeights,
    pub n_steps: usize,
    cache: Mutex<HashMap<u64, Arc<GainSchedule>>>,
}

#[derive(Debug, Clone)]
pub struct InverseOutcome {
    pub times: Vec<f64>,
    pub true_load: Vec<f64>,
    pub measurements: MeasurementSet,
    pub estimate: EstimationResult,
    pub b: f64,
    pub lcurve: Option<LCurveSelection>,
    pub metrics: Metrics,
}

impl InverseOutcome {
    /// CSV `t,true_load,estimated_load`.
    pub fn load_csv(&self) -> String {
        let mut out = String::from("t,true_load,estimated_load\n");
        for (j, t) in self.times.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                t, self.true_load[j], self.estimate.load_history[j]
            )
            .unwrap();
        }
        out
    }
}

impl InverseSolver {
    pub fn schedule(&self, b: f64) -> Result<Arc<GainSchedule>> {
        if let Some(s) = self.cache.lock().unwrap().get(&b.to_bits()) {
            return Ok(Arc::clone(s));
        }
        let w = self.weights.with_b(b)?;
        let s = Arc::new(GainSchedule::compute(&self.aug, &w, self.n_steps)?);
        self.cache.lock().unwrap().insert(b.to_bits(), Arc::clone(&s));
        Ok(s)
    }

    pub fn schedules(&self, grid: &[f64]) -> Result<Vec<Arc<GainSchedule>>> {
        use rayon::prelude::*;
        let missing: Vec<f64> = {
            let cache = self.cache.lock().unwrap();
            grid.iter().copied().filter(|b| !cache.contains_key(&b.to_bits())).collect()
        };
        let built = missing
            .par_iter()
            .map(|&b| {
                let w = self.weights.with_b(b)?;
                GainSchedule::compute(&self.aug, &w, self.n_steps).map(|s| (b, Arc::new(s)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cache = self.cache.lock().unwrap();
        for (b, s) in built {
            cache.insert(b.to_bits(), s);
        }
        Ok(grid.iter().map(|b| Arc::clone(&cache[&b.to_bits()])).collect())
    }

    fn z0(&self) -> DVector<f64> {
        DVector::zeros(self.aug.n_aug())
    }

    /// Runs the filter at a fixed `B` on a measurement record.
    pub fn estimate(&self, b: f64, data: &[DVector<f64>]) -> Result<EstimationResult> {
        let sched = self.schedule(b)?;
        let pass = sched.backward(&self.aug, data)?;
        forward_sweep(&self.aug, &pass, &self.weights.with_b(b)?, data, &self.z0())
    }

    pub fn l_curve(&self, grid: &[f64], data: &[DVector<f64>]) -> Result<LCurveSelection> {
        let schedules = self.schedules(grid)?;
        l_curve_from_schedules(&self.aug, &self.weights, &schedules, data, &self.z0())
    }

    /// Estimates the load from `measurements` and scores it against `truth`.
    pub fn solve(
        &self,
        regularization: &Regularization,
        measurements: MeasurementSet,
        truth: Vec<f64>,
    ) -> Result<InverseOutcome> {
        let data = measurements.vectors();
        let (b, estimate, lcurve) = match regularization {
            Regularization::Fixed(b) => (*b, self.estimate(*b, &data)?, None),
            Regularization::LCurve(grid) => {
                let sel = self.l_curve(grid, &data)?;
                (sel.chosen_b, sel.estimate.clone(), Some(sel))
            }
        };
        let estimate = estimate.with_truth(&truth);
        let metrics = Metrics::compute(&estimate.load_history, &truth);
        Ok(InverseOutcome {
            times: measurements.times.clone(),
            true_load: truth,
            measurements,
            estimate,
            b,
            lcurve,
            metrics,
        })
    }
}

/// Forward-simulates the truth, contaminates it, and runs the filter.
pub fn run_inverse(setup: &PlateSetup, scenario: &Scenario) -> Result<InverseOutcome> {
    let solver = setup.solver(&scenario.sensors)?;
    run_inverse_with(setup, &solver, scenario)
}

/// As [`run_inverse`] with a solver already built for the scenario sensors.
pub fn run_inverse_with(setup: &PlateSetup, solver: &InverseSolver, scenario: &Scenario) -> Result<InverseOutcome> {
    let response = setup.run_forward(&scenario.load)?;
    let measurements = setup.measure(&response, &scenario.sensors, &scenario.noise)?;
    solver.solve(&scenario.regularization, measurements, response.loads)
}

/// The twelve-case experiment matrix: periodic load under several noise
/// levels and sensor layouts, then the Heaviside load at 20 % noise.
pub fn reference_scenarios(seed: u64, omega: f64, grid: &[f64]) -> Vec<Scenario> {
    use Quantity::{Displacement as D, Velocity as V};
    let periodic = LoadSignal::periodic(1.0, omega);
    let step = LoadSignal::heaviside(1.0);
    let cases: Vec<(&str, LoadSignal, Vec<SensorSpec>, f64)> = vec![
        ("periodic_vC_5", periodic, vec![SensorSpec::c(V)], 0.05),
        ("periodic_vAC_5", periodic, vec![SensorSpec::a(V), SensorSpec::c(V)], 0.05),
        ("periodic_vC_10", periodic, vec![SensorSpec::c(V)], 0.10),
        ("periodic_uC_10", periodic, vec![SensorSpec::c(D)], 0.10),
        ("periodic_vAC_10", periodic, vec![SensorSpec::a(V), SensorSpec::c(V)], 0.10),
        ("periodic_uA_vC_20", periodic, vec![SensorSpec::a(D), SensorSpec::c(V)], 0.20),
        ("periodic_uAC_20", periodic, vec![SensorSpec::a(D), SensorSpec::c(D)], 0.20),
        ("periodic_vAC_20", periodic, vec![SensorSpec::a(V), SensorSpec::c(V)], 0.20),
        ("periodic_vAC_40", periodic, vec![SensorSpec::a(V), SensorSpec::c(V)], 0.40),
        ("heaviside_vC_20", step, vec![SensorSpec::c(V)], 0.20),
        ("heaviside_uC_20", step, vec![SensorSpec::c(D)], 0.20),
        ("heaviside_uA_vC_20", step, vec![SensorSpec::a(D), SensorSpec::c(V)], 0.20),
    ];
    cases
        .into_iter()
        .map(|(name, load, sensors, level)| Scenario {
            name: name.to_string(),
            load,
            sensors,
            noise: NoiseSpec {
                level,
                distribution: NoiseDistribution::Uniform,
                seed,
            },
            regularization: Regularization::LCurve(grid.to_vec()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rod_initial_and_clamped_values() {
        let load = LoadSignal::periodic(1.0, 1.0);
        assert_eq!(analytic_rod_response(0.3, 0.0, &load, 1.0, 100), (0.0, 0.0));
        for &t in &[0.4, 1.7, 5.2] {
            let (u, _) = analytic_rod_response(1.0, t, &LoadSignal::heaviside(1.0), 1.0, 200);
            assert!(u.abs() < 1e-12);
        }
    }

    #[test]
    fn rod_heaviside_wavefront() {
        // Before the reflection returns, the loaded end moves at speed c P0.
        let load = LoadSignal::heaviside(1.0);
        let (u, v) = analytic_rod_response(0.0, 0.5, &load, 1.0, 20000);
        assert!((u - 0.5).abs() < 1e-3, "u = {u}");
        assert!((v - 1.0).abs() < 2e-2, "v = {v}");
    }

    #[test]
    fn rod_resonant_mode_is_continuous() {
        let w1 = PI / 2.0;
        let (u_res, _) = analytic_rod_response(0.2, 3.0, &LoadSignal::periodic(1.0, w1), 1.0, 60);
        let (u_near, _) = analytic_rod_response(0.2, 3.0, &LoadSignal::periodic(1.0, w1 * (1.0 + 1e-7)), 1.0, 60);
        assert!((u_res - u_near).abs() < 1e-5);
    }

    #[test]
    fn noise_free_is_identity() {
        let exact: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let out = add_noise(&exact, 0.0, None, 7, 0, NoiseDistribution::Uniform).unwrap();
        assert_eq!(out, exact);
    }

    #[test]
    fn noise_is_bounded_and_reproducible() {
        let exact: Vec<f64> = (0..500).map(|i| 3.0 * (i as f64 * 0.05).cos()).collect();
        let a = add_noise(&exact, 0.2, None, 42, 1, NoiseDistribution::Uniform).unwrap();
        let b = add_noise(&exact, 0.2, None, 42, 1, NoiseDistribution::Uniform).unwrap();
        let c = add_noise(&exact, 0.2, None, 42, 2, NoiseDistribution::Uniform).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = 0.5 * 0.2 * 3.0;
        assert!(a.iter().zip(&exact).all(|(d, e)| (d - e).abs() <= bound));
    }

    #[test]
    fn noise_rejects_bad_levels() {
        assert!(add_noise(&[1.0], -0.1, None, 0, 0, NoiseDistribution::Uniform).is_err());
        assert!(add_noise(&[0.0, 0.0], 0.1, None, 0, 0, NoiseDistribution::Uniform).is_err());
    }

    #[test]
    fn metrics_windows() {
        let truth = vec![1.0; 20];
        let mut est = truth.clone();
        est[19] = 3.0;
        est[0] = 0.5;
        let m = Metrics::compute(&est, &truth);
        assert!((m.rel_l2_trunc - 0.5 / 18f64.sqrt()).abs() < 1e-12);
        assert!((m.sum_abs_error - 2.5).abs() < 1e-12);
        // closing window is the last two samples
        let head = (0.25f64 / 18.0).sqrt();
        let tail = (4.0f64 / 2.0).sqrt();
        assert!((m.end_ratio - tail / head).abs() < 1e-12);
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&a, &[1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn load_validation() {
        assert!(LoadSignal::heaviside(0.0).validate().is_err());
        assert!(LoadSignal::periodic(1.0, 0.0).validate().is_err());
        assert_eq!(LoadSignal::heaviside(2.0).value(0.0), 2.0);
        assert_eq!(LoadSignal::heaviside(2.0).value(-1.0), 0.0);
    }

    #[test]
    fn setup_rejects_short_window() {
        let cfg = ModelConfig {
            t_end: 0.5,
            ..ModelConfig::default()
        };
        assert!(PlateSetup::new(cfg).is_err());
    }

    #[test]
    fn twelve_reference_cases() {
        let cases = reference_scenarios(3, 1.0, &default_b_grid());
        assert_eq!(cases.len(), 12);
        assert_eq!(cases.iter().filter(|c| c.load.kind == LoadKind::Heaviside).count(), 3);
    }
}
