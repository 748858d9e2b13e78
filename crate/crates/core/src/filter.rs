//! Dynamic programming filter with first-order Tikhonov regularization.
//!
//! The unknown load joins the state, `z = {v; r}`, and its increments
//! `q_j = r_{j+1} − r_j` become the controls of
//!
//! ```text
//! z_{j+1} = R z_j + G q_j,     d_j = Q z_j
//! ```
//!
//! The filter minimizes `Σ (Q z_j − d*_j)ᵀ A (Q z_j − d*_j) + Σ q_jᵀ B q_j`
//! over the increments. A backward sweep carries the quadratic cost-to-go
//! `zᵀ E_n z + s_nᵀ z`; a forward sweep then replays the optimal feedback
//! law from the known initial state.
//!
//! Indexing is zero-based: states and measurements `0 … N−1`, increments
//! `0 … N−2`. Stage `n` (for `n ≥ 1`) produces `q_{n−1}` from `z_{n−1}`.
//!
//! The stage recurrences are
//!
//! ```text
//! D_n     = (2B + 2 Gᵀ E_n G)⁻¹
//! F_n     = 2 Gᵀ E_n
//! E_{n−1} = Qᵀ A Q + Rᵀ (E_n − F_nᵀ D_n F_n / 2) R
//! s_{n−1} = −2 Qᵀ A d*_{n−1} + Rᵀ (I − F_nᵀ D_n Gᵀ) s_n
//! q_{n−1} = −D_n Gᵀ s_n − D_n F_n R z_{n−1}
//! ```
//!
//! with `E_{N−1} = Qᵀ A Q` and `s_{N−1} = −2 Qᵀ A d*_{N−1}`. These are the
//! shape-consistent forms; [`batch_qp_oracle`] minimizes the same cost
//! directly and the two must agree.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pim::{StateSpaceModel, TransitionSet};

/// Largest number of unknowns the dense oracle accepts.
pub const MAX_ORACLE_UNKNOWNS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Displacement,
    Velocity,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Displacement => "displacement",
            Quantity::Velocity => "velocity",
        }
    }
}

/// A measured quantity at a mesh node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sensor {
    pub node: usize,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    pub r: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub n_state: usize,
    pub n_load: usize,
}

impl AugmentedModel {
    /// Assembles `R = [[T, PΦ], [0, I]]`, `G = [[DΦ], [I]]` from the
    /// transition blocks already multiplied by the load map `Φ`.
    pub fn from_blocks(
        t: &DMatrix<f64>,
        p_phi: &DMatrix<f64>,
        d_phi: &DMatrix<f64>,
        q: DMatrix<f64>,
    ) -> Result<Self> {
        let n = t.nrows();
        let p = p_phi.ncols();
        if !t.is_square() || p_phi.nrows() != n || d_phi.shape() != (n, p) || q.ncols() != n + p {
            return Err(Error::DimensionMismatch(format!(
                "T {:?}, PΦ {:?}, DΦ {:?}, Q {:?}",
                t.shape(),
                p_phi.shape(),
                d_phi.shape(),
                q.shape()
            )));
        }
        let nz = n + p;
        let mut r = DMatrix::zeros(nz, nz);
        r.view_mut((0, 0), (n, n)).copy_from(t);
        r.view_mut((0, n), (n, p)).copy_from(p_phi);
        r.view_mut((n, n), (p, p)).fill_with_identity();
        let mut g = DMatrix::zeros(nz, p);
        g.view_mut((0, 0), (n, p)).copy_from(d_phi);
        g.view_mut((n, 0), (p, p)).fill_with_identity();
        Ok(AugmentedModel {
            r,
            g,
            q,
            n_state: n,
            n_load: p,
        })
    }

    pub fn n_aug(&self) -> usize {
        self.n_state + self.n_load
    }

    pub fn n_meas(&self) -> usize {
        self.q.nrows()
    }

    pub fn step(&self, z: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
        &self.r * z + &self.g * q
    }

    pub fn observe(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.q * z
    }
}

/// Builds the augmented model for a single scalar load acting through the
/// state-space force map, observed by `sensors`.
pub fn augment(trans: &TransitionSet, model: &StateSpaceModel, sensors: &[Sensor]) -> Result<AugmentedModel> {
    let n = model.n_state();
    if trans.n_state() != n {
        return Err(Error::DimensionMismatch("transition and state-space sizes differ".into()));
    }
    let phi = DMatrix::from_column_slice(n, 1, model.force_map.as_slice());
    let mut q = DMatrix::zeros(sensors.len(), n + 1);
    for (row, s) in sensors.iter().enumerate() {
        let dof = model.dof_of_node(s.node).ok_or(Error::UnknownSensor(s.node))?;
        let col = match s.quantity {
            Quantity::Displacement => dof,
            Quantity::Velocity => model.n_dof + dof,
        };
        q[(row, col)] = 1.0;
    }
    AugmentedModel::from_blocks(&trans.t, &(&trans.p * &phi), &(&trans.d * &phi), q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterWeights {
    pub a_meas: DMatrix<f64>,
    pub b_reg: f64,
}

impl FilterWeights {
    pub fn new(a_meas: DMatrix<f64>, b_reg: f64) -> Result<Self> {
        if !(b_reg >= 0.0) || !b_reg.is_finite() {
            return Err(Error::InvalidArgument(format!("regularization parameter must be ≥ 0, got {b_reg}")));
        }
        if !a_meas.is_square() {
            return Err(Error::DimensionMismatch("measurement weight must be square".into()));
        }
        let asym = (&a_meas - a_meas.transpose()).amax();
        if asym > 1e-12 * a_meas.amax().max(1.0) || a_meas.clone().cholesky().is_none() {
            return Err(Error::InvalidArgument("measurement weight must be symmetric positive definite".into()));
        }
        Ok(FilterWeights { a_meas, b_reg })
    }

    /// Identity measurement weight.
    pub fn identity(n_meas: usize, b_reg: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n_meas, n_meas), b_reg)
    }

    pub fn with_b(&self, b_reg: f64) -> Result<Self> {
        Self::new(self.a_meas.clone(), b_reg)
    }
}

/// Data-independent part of the backward sweep for one `(model, weights,
/// N)` triple. It can be shared by every measurement record of that length.
#[derive(Debug, Clone)]
pub struct GainSchedule {
    pub b_reg: f64,
    pub n_steps: usize,
    /// `D_n Gᵀ`, stage `n = 1 … N−1` at position `n − 1`.
    feedforward_gain: Vec<DMatrix<f64>>,
    /// `D_n F_n R`
    feedback_gain: Vec<DMatrix<f64>>,
    /// `F_n`
    f_gain: Vec<DMatrix<f64>>,
    /// `E_n` for `n = 0 … N−1`, kept on request.
    riccati: Vec<DMatrix<f64>>,
    /// `Qᵀ A`, reused for the data term of the `s` recurrence.
    qt_a: DMatrix<f64>,
}

impl GainSchedule {
    pub fn compute(aug: &AugmentedModel, weights: &FilterWeights, n_steps: usize) -> Result<Self> {
        Self::build(aug, weights, n_steps, false)
    }

    /// As [`compute`](Self::compute), additionally keeping every `E_n`.
    pub fn compute_with_history(aug: &AugmentedModel, weights: &FilterWeights, n_steps: usize) -> Result<Self> {
        Self::build(aug, weights, n_steps, true)
    }

    fn build(aug: &AugmentedModel, weights: &FilterWeights, n_steps: usize, keep: bool) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 measurements, got {n_steps}")));
        }
        if weights.a_meas.nrows() != aug.n_meas() {
            return Err(Error::DimensionMismatch(format!(
                "weight {:?} for {} measurement channels",
                weights.a_meas.shape(),
                aug.n_meas()
            )));
        }
        let p = aug.n_load;
        let qt_a = aug.q.transpose() * &weights.a_meas;
        let qaq = &qt_a * &aug.q;
        let gt = aug.g.transpose();
        let rt = aug.r.transpose();
        let b2 = DMatrix::identity(p, p) * (2.0 * weights.b_reg);

        let stages = n_steps - 1;
        let mut feedforward_gain = Vec::with_capacity(stages);
        let mut feedback_gain = Vec::with_capacity(stages);
        let mut f_gain = Vec::with_capacity(stages);
        let mut riccati = Vec::new();

        let mut e = qaq.clone();
        for n in (1..n_steps).rev() {
            if keep {
                riccati.push(e.clone());
            }
            let f = (&gt * &e) * 2.0;
            let lhs = &b2 + &f * &aug.g;
            let d = lhs.lu().try_inverse().ok_or(Error::SingularGain(n))?;
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularGain(n));
            }
            let dfr = &d * &f * &aug.r;
            feedforward_gain.push(&d * &gt);
            let inner = &e - f.transpose() * &d * &f * 0.5;
            let next = &qaq + &rt * inner * &aug.r;
            // keep E symmetric against round-off drift
            e = (&next + next.transpose()) * 0.5;
            feedback_gain.push(dfr);
            f_gain.push(f);
        }
        if keep {
            riccati.push(e);
            riccati.reverse();
        }
        feedforward_gain.reverse();
        feedback_gain.reverse();
        f_gain.reverse();
        Ok(GainSchedule {
            b_reg: weights.b_reg,
            n_steps,
            feedforward_gain,
            feedback_gain,
            f_gain,
            riccati,
            qt_a,
        })
    }

    /// `E_n`, available when built with history.
    pub fn riccati(&self) -> &[DMatrix<f64>] {
        &self.riccati
    }

    /// Data-dependent half of the backward sweep.
    pub fn backward(self: &Arc<Self>, aug: &AugmentedModel, measurements: &[DVector<f64>]) -> Result<BackwardPass> {
        let n_steps = self.n_steps;
        if measurements.len() != n_steps {
            return Err(Error::DimensionMismatch(format!(
                "schedule for {n_steps} measurements, got {}",
                measurements.len()
            )));
        }
        if let Some(bad) = measurements.iter().find(|d| d.len() != aug.n_meas()) {
            return Err(Error::DimensionMismatch(format!(
                "measurement of length {} for {} channels",
                bad.len(),
                aug.n_meas()
            )));
        }
        let rt = aug.r.transpose();
        let data_term = |d: &DVector<f64>| &self.qt_a * d * -2.0;

        let mut s = data_term(&measurements[n_steps - 1]);
        let s_terminal = s.clone();
        let mut feedforward = vec![DVector::zeros(aug.n_load); n_steps - 1];
        let mut s_history = vec![DVector::zeros(0); n_steps];
        s_history[n_steps - 1] = s.clone();
        for n in (1..n_steps).rev() {
            let ff = &self.feedforward_gain[n - 1] * &s;
            let w = &s - self.f_gain[n - 1].transpose() * &ff;
            s = data_term(&measurements[n - 1]) + &rt * w;
            feedforward[n - 1] = ff;
            s_history[n - 1] = s.clone();
        }
        Ok(BackwardPass {
            schedule: Arc::clone(self),
            feedforward,
            s_history,
            s_terminal,
        })
    }
}

/// Stored output of the backward sweep.
#[derive(Debug, Clone)]
pub struct BackwardPass {
    pub schedule: Arc<GainSchedule>,
    /// `D_n Gᵀ s_n` for stages `1 … N−1`.
    pub feedforward: Vec<DVector<f64>>,
    /// `s_n` for `n = 0 … N−1`.
    pub s_history: Vec<DVector<f64>>,
    pub s_terminal: DVector<f64>,
}

impl BackwardPass {
    pub fn n_steps(&self) -> usize {
        self.schedule.n_steps
    }

    /// `D_n F_n R` for stage `n ≥ 1`.
    pub fn feedback(&self, n: usize) -> &DMatrix<f64> {
        &self.schedule.feedback_gain[n - 1]
    }
}

pub fn backward_sweep(
    aug: &AugmentedModel,
    weights: &FilterWeights,
    measurements: &[DVector<f64>],
) -> Result<BackwardPass> {
    let schedule = Arc::new(GainSchedule::compute_with_history(aug, weights, measurements.len())?);
    schedule.backward(aug, measurements)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Reconstructed load magnitude (first load component) per instant.
    pub load_history: Vec<f64>,
    /// Dynamic part `v̂_j` of the augmented state.
    pub state_history: Vec<DVector<f64>>,
    /// Full augmented states `ẑ_j`.
    pub augmented: Vec<DVector<f64>>,
    /// Increments `q̂_0 … q̂_{N−2}`.
    pub increments: Vec<DVector<f64>>,
    /// `Σ (Q ẑ_j − d*_j)ᵀ A (Q ẑ_j − d*_j)`
    pub residual_norm: f64,
    /// `Σ q̂_jᵀ q̂_j`
    pub smoothness_norm: f64,
    /// `Σ |r̂_j − r_j|` against a known truth, when attached.
    pub sum_abs_error: Option<f64>,
}

impl EstimationResult {
    fn from_trajectory(
        aug: &AugmentedModel,
        a_meas: &DMatrix<f64>,
        measurements: &[DVector<f64>],
        augmented: Vec<DVector<f64>>,
        increments: Vec<DVector<f64>>,
    ) -> Self {
        let n = aug.n_state;
        let residual_norm = augmented
            .iter()
            .zip(measurements)
            .map(|(z, d)| {
                let e = aug.observe(z) - d;
                e.dot(&(a_meas * &e))
            })
            .sum();
        let smoothness_norm = increments.iter().map(|q| q.norm_squared()).sum();
        EstimationResult {
            load_history: augmented.iter().map(|z| z[n]).collect(),
            state_history: augmented.iter().map(|z| z.rows(0, n).into_owned()).collect(),
            augmented,
            increments,
            residual_norm,
            smoothness_norm,
            sum_abs_error: None,
        }
    }

    /// Value of the regularized cost for parameter `b`.
    pub fn objective(&self, b: f64) -> f64 {
        self.residual_norm + b * self.smoothness_norm
    }

    pub fn with_truth(mut self, truth: &[f64]) -> Self {
        self.sum_abs_error = Some(
            self.load_history
                .iter()
                .zip(truth)
                .map(|(a, b)| (a - b).abs())
                .sum(),
        );
        self
    }
}

pub fn forward_sweep(
    aug: &AugmentedModel,
    pass: &BackwardPass,
    weights: &FilterWeights,
    measurements: &[DVector<f64>],
    z0: &DVector<f64>,
) -> Result<EstimationResult> {
    let n_steps = pass.n_steps();
    if z0.len() != aug.n_aug() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of length {}, model has {}",
            z0.len(),
            aug.n_aug()
        )));
    }
    if measurements.len() != n_steps {
        return Err(Error::DimensionMismatch("measurement record differs from the backward pass".into()));
    }
    let mut z = z0.clone();
    let mut augmented = Vec::with_capacity(n_steps);
    let mut increments = Vec::with_capacity(n_steps - 1);
    augmented.push(z.clone());
    for n in 1..n_steps {
        let q = -(&pass.feedforward[n - 1] + pass.feedback(n) * &z);
        z = aug.step(&z, &q);
        augmented.push(z.clone());
        increments.push(q);
    }
    Ok(EstimationResult::from_trajectory(
        aug,
        &weights.a_meas,
        measurements,
        augmented,
        increments,
    ))
}

/// Backward and forward sweep in one call.
pub fn estimate(
    aug: &AugmentedModel,
    weights: &FilterWeights,
    measurements: &[DVector<f64>],
    z0: &DVector<f64>,
) -> Result<EstimationResult> {
    let pass = backward_sweep(aug, weights, measurements)?;
    forward_sweep(aug, &pass, weights, measurements, z0)
}

/// Direct minimizer of the regularized cost over all increments at once.
///
/// The trajectory is written as `d = c + Φ q` with `c` the free response
/// from `z0`; the weighted, regularized least-squares problem
/// `[Lᵀ Φ; √B I] q ≈ [Lᵀ (d* − c); 0]` (`A = L Lᵀ`) is solved densely.
pub fn batch_qp_oracle(
    aug: &AugmentedModel,
    weights: &FilterWeights,
    measurements: &[DVector<f64>],
    z0: &DVector<f64>,
) -> Result<EstimationResult> {
    let n_steps = measurements.len();
    if n_steps < 2 {
        return Err(Error::InvalidArgument("need at least 2 measurements".into()));
    }
    let p = aug.n_load;
    let m = aug.n_meas();
    let nz = aug.n_aug();
    let unknowns = p * (n_steps - 1);
    if unknowns > MAX_ORACLE_UNKNOWNS {
        return Err(Error::TooLarge(unknowns, MAX_ORACLE_UNKNOWNS));
    }
    if z0.len() != nz || weights.a_meas.nrows() != m {
        return Err(Error::DimensionMismatch("oracle inputs".into()));
    }
    let l = weights
        .a_meas
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("measurement weight not positive definite".into()))?
        .l();
    let lt = l.transpose();

    // Column block k of the response: Q R^{n−1−k} G for n > k.
    let mut phi = DMatrix::zeros(m * n_steps, unknowns);
    let mut free = DVector::zeros(m * n_steps);
    let mut z = z0.clone();
    for n in 0..n_steps {
        free.rows_mut(n * m, m).copy_from(&aug.observe(&z));
        z = &aug.r * z;
    }
    for k in 0..n_steps - 1 {
        let mut prop = aug.g.clone();
        for n in k + 1..n_steps {
            phi.view_mut((n * m, k * p), (m, p)).copy_from(&(&aug.q * &prop));
            prop = &aug.r * prop;
        }
    }

    let rows = m * n_steps + unknowns;
    let mut lhs = DMatrix::zeros(rows, unknowns);
    let mut rhs = DVector::zeros(rows);
    for n in 0..n_steps {
        let block = phi.view((n * m, 0), (m, unknowns));
        lhs.view_mut((n * m, 0), (m, unknowns)).copy_from(&(&lt * block));
        let resid = &measurements[n] - free.rows(n * m, m);
        rhs.rows_mut(n * m, m).copy_from(&(&lt * resid));
    }
    let sqrt_b = weights.b_reg.sqrt();
    for i in 0..unknowns {
        lhs[(m * n_steps + i, i)] = sqrt_b;
    }
    let svd = lhs.svd(true, true);
    let qvec = svd
        .solve(&rhs, 1e-14 * svd.singular_values.max())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut z = z0.clone();
    let mut augmented = vec![z.clone()];
    let mut increments = Vec::with_capacity(n_steps - 1);
    for k in 0..n_steps - 1 {
        let q = qvec.rows(k * p, p).into_owned();
        z = aug.step(&z, &q);
        augmented.push(z.clone());
        increments.push(q);
    }
    Ok(EstimationResult::from_trajectory(
        aug,
        &weights.a_meas,
        measurements,
        augmented,
        increments,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model() -> AugmentedModel {
        // one-dimensional state with load feeding straight through
        let t = DMatrix::from_element(1, 1, 0.9);
        let p = DMatrix::from_element(1, 1, 0.5);
        let d = DMatrix::from_element(1, 1, 0.2);
        let q = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        AugmentedModel::from_blocks(&t, &p, &d, q).unwrap()
    }

    #[test]
    fn block_layout() {
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let p = DMatrix::from_column_slice(2, 1, &[0.1, 0.2]);
        let d = DMatrix::from_column_slice(2, 1, &[0.3, 0.4]);
        let q = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]);
        let aug = AugmentedModel::from_blocks(&t, &p, &d, q).unwrap();
        assert_eq!(aug.r.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
        assert_eq!(aug.g.column(0).iter().copied().collect::<Vec<_>>(), vec![0.3, 0.4, 1.0]);
    }

    #[test]
    fn two_step_scalar_by_hand() {
        // E_1 = 1, s_1 = −2 d1; D = 1/(2B + 2 G E G), F = 2 G
        // E_0 = 1 + R (1 − F D F/2) R, s_0 = −2 d0 + R(1 − F D G) s_1
        let aug = scalar_model();
        let b = 0.7;
        let weights = FilterWeights::identity(1, b).unwrap();
        let data = vec![DVector::from_element(1, 0.3), DVector::from_element(1, -1.1)];
        let pass = backward_sweep(&aug, &weights, &data).unwrap();

        let r = &aug.r;
        let g = &aug.g;
        let qaq = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e1 = qaq.clone();
        let s1 = DVector::from_column_slice(&[-2.0 * -1.1, 0.0]);
        let dd = 1.0 / (2.0 * b + 2.0 * (g.transpose() * &e1 * g)[(0, 0)]);
        let f = g.transpose() * &e1 * 2.0;
        let e0 = &qaq + r.transpose() * (&e1 - f.transpose() * &f * (dd / 2.0)) * r;
        let proj = DMatrix::identity(2, 2) - f.transpose() * g.transpose() * dd;
        let s0 = DVector::from_column_slice(&[-2.0 * 0.3, 0.0]) + r.transpose() * proj * &s1;

        let hist = pass.schedule.riccati();
        assert!((&hist[0] - e0).amax() < 1e-14);
        assert!((&hist[1] - e1).amax() < 1e-14);
        assert!((&pass.s_history[0] - s0).amax() < 1e-14);
        assert!((&pass.s_terminal - s1).amax() < 1e-14);
    }

    #[test]
    fn two_step_scalar_least_squares() {
        // z1 = R z0 + G q with z0 = 0 → d1 = G_v q, so
        // q = G_v d1 / (G_v² + B).
        let aug = scalar_model();
        let b = 0.25;
        let weights = FilterWeights::identity(1, b).unwrap();
        let data = vec![DVector::from_element(1, 0.0), DVector::from_element(1, 2.0)];
        let z0 = DVector::zeros(2);
        let gv = aug.g[(0, 0)];
        let expected = gv * 2.0 / (gv * gv + b);
        let sweep = estimate(&aug, &weights, &data, &z0).unwrap();
        let oracle = batch_qp_oracle(&aug, &weights, &data, &z0).unwrap();
        assert!((sweep.increments[0][0] - expected).abs() < 1e-12);
        assert!((oracle.increments[0][0] - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_data_zero_estimate() {
        let aug = scalar_model();
        let weights = FilterWeights::identity(1, 1.0).unwrap();
        let data = vec![DVector::zeros(1); 6];
        let pass = backward_sweep(&aug, &weights, &data).unwrap();
        assert!(pass.s_history.iter().all(|s| s.amax() == 0.0));
        let est = forward_sweep(&aug, &pass, &weights, &data, &DVector::zeros(2)).unwrap();
        assert!(est.load_history.iter().all(|&v| v == 0.0));
        assert!(est.augmented.iter().all(|z| z.amax() == 0.0));
    }

    #[test]
    fn riccati_stays_symmetric() {
        let t = DMatrix::from_row_slice(2, 2, &[0.8, 0.3, -0.3, 0.8]);
        let p = DMatrix::from_column_slice(2, 1, &[0.1, 0.2]);
        let d = DMatrix::from_column_slice(2, 1, &[0.05, 0.1]);
        let q = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let aug = AugmentedModel::from_blocks(&t, &p, &d, q).unwrap();
        let weights = FilterWeights::identity(1, 0.1).unwrap();
        let sched = GainSchedule::compute_with_history(&aug, &weights, 30).unwrap();
        assert_eq!(sched.riccati().len(), 30);
        for e in sched.riccati() {
            assert!((e - e.transpose()).amax() <= 1e-10 * e.amax());
        }
    }

    #[test]
    fn errors() {
        let aug = scalar_model();
        assert!(FilterWeights::identity(1, -1.0).is_err());
        assert!(FilterWeights::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), 1.0).is_err());
        let w = FilterWeights::identity(1, 1.0).unwrap();
        assert!(backward_sweep(&aug, &w, &[DVector::zeros(1)]).is_err());
        let pass = backward_sweep(&aug, &w, &vec![DVector::zeros(1); 3]).unwrap();
        let err = forward_sweep(&aug, &pass, &w, &vec![DVector::zeros(1); 3], &DVector::zeros(5));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        // B = 0 with an unobservable increment makes the stage gain singular
        let q = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let blind = AugmentedModel::from_blocks(
            &DMatrix::from_element(1, 1, 1.0),
            &DMatrix::zeros(1, 1),
            &DMatrix::zeros(1, 1),
            q,
        )
        .unwrap();
        let w0 = FilterWeights::identity(1, 0.0).unwrap();
        assert!(matches!(
            backward_sweep(&blind, &w0, &vec![DVector::zeros(1); 3]),
            Err(Error::SingularGain(_))
        ));
    }
}
