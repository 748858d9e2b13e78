//! Precise time integration of `ẋ = A x + r(t)` with forcing linear inside
//! each step.
//!
//! The transition matrix `exp(A τ)` is built by scaling the step down by
//! `2^N`, summing four Taylor terms of the *increment* `exp(A τ/2^N) − I`,
//! and doubling back up with `T_a ← 2 T_a + T_a T_a`. Carrying the
//! increment instead of `I + T_a` keeps the tiny early terms from being
//! swamped by the identity.

use nalgebra::{DMatrix, DVector};

use crate::drbem::ReducedSystem;
use crate::error::{Error, Result};

/// Number of halvings used when none is given.
pub const DEFAULT_SQUARINGS: u32 = 20;

/// Relative tolerance of the build-time check that the compact stepping
/// form agrees with the closed-form linear-forcing solution.
const CONSISTENCY_TOL: f64 = 1e-9;

/// First-order realization `v = {u; u̇}`, `v̇ = A v + force_map · P(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    /// `[[0, I], [−m⁻¹k, 0]]`
    pub a: DMatrix<f64>,
    /// `{0; m⁻¹ load_map}`
    pub force_map: DVector<f64>,
    pub n_dof: usize,
    /// Mesh node of each displacement degree of freedom.
    pub nodes: Vec<usize>,
}

impl StateSpaceModel {
    pub fn n_state(&self) -> usize {
        2 * self.n_dof
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    /// Builds the model directly from `m`, `k` and the load vector.
    pub fn from_matrices(m: &DMatrix<f64>, k: &DMatrix<f64>, load_map: &DVector<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || k.shape() != (n, n) || load_map.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "m {:?}, k {:?}, load_map {}",
                m.shape(),
                k.shape(),
                load_map.len()
            )));
        }
        let lu = m.clone().lu();
        let m_inv_k = lu.solve(k).ok_or(Error::SingularMass)?;
        let m_inv_f = lu.solve(load_map).ok_or(Error::SingularMass)?;
        if m_inv_k.iter().chain(m_inv_f.iter()).any(|v| !v.is_finite()) {
            return Err(Error::SingularMass);
        }

        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).fill_with_identity();
        a.view_mut((n, 0), (n, n)).copy_from(&(-m_inv_k));
        let mut force_map = DVector::zeros(2 * n);
        force_map.rows_mut(n, n).copy_from(&m_inv_f);
        Ok(StateSpaceModel {
            a,
            force_map,
            n_dof: n,
            nodes: (0..n).collect(),
        })
    }
}

pub fn build_state_space(reduced: &ReducedSystem) -> Result<StateSpaceModel> {
    let mut model = StateSpaceModel::from_matrices(&reduced.m, &reduced.k, &reduced.load_map)?;
    model.nodes = reduced.dof_index.iter().map(|d| d.node).collect();
    Ok(model)
}

/// `exp(A τ)` by the doubling recurrence on the Taylor increment.
pub fn precise_expm(a: &DMatrix<f64>, tau: f64, n_squarings: u32) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("expm of {:?} matrix", a.shape())));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
    }
    let n = a.nrows();
    let dt = tau / 2f64.powi(n_squarings as i32);
    let x = a * dt;
    let eye = DMatrix::<f64>::identity(n, n);

    // x + x²/2 + x³/6 + x⁴/24, Horner form without the leading identity
    let inner = &eye / 6.0 + &x / 24.0;
    let inner = &eye / 2.0 + &x * inner;
    let inner = &eye + &x * inner;
    let mut ta = &x * inner;

    for _ in 0..n_squarings {
        let sq = &ta * &ta;
        ta *= 2.0;
        ta += sq;
    }
    if ta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(eye + ta)
}

/// One-step operators for `v_{j+1} = T v_j + P r_j + D (r_{j+1} − r_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSet {
    pub t: DMatrix<f64>,
    /// `(T − I) A⁻¹`
    pub p: DMatrix<f64>,
    /// `(P/τ − I) A⁻¹`
    pub d: DMatrix<f64>,
    pub tau: f64,
    pub a_inv: DMatrix<f64>,
    /// 2-norm condition number of `A`.
    pub a_condition: f64,
}

pub fn build_transition(model: &StateSpaceModel, tau: f64) -> Result<TransitionSet> {
    build_transition_with(&model.a, tau, DEFAULT_SQUARINGS)
}

pub fn build_transition_with(a: &DMatrix<f64>, tau: f64, n_squarings: u32) -> Result<TransitionSet> {
    let n = a.nrows();
    let t = precise_expm(a, tau, n_squarings)?;
    let a_inv = a.clone().lu().try_inverse().ok_or(Error::SingularA)?;
    if a_inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularA);
    }
    let sv = a.clone().singular_values();
    let a_condition = sv.max() / sv.min();
    let eye = DMatrix::<f64>::identity(n, n);
    let p = (&t - &eye) * &a_inv;
    let d = (&p / tau - &eye) * &a_inv;
    let trans = TransitionSet {
        t,
        p,
        d,
        tau,
        a_inv,
        a_condition,
    };

    // Deterministic probe of the compact form against the closed form.
    let probe = |phase: f64| DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * phase).sin());
    let (v, r0, r1) = (probe(0.37), probe(1.13), probe(2.71));
    let compact = trans.step(&v, &r0, &r1)?;
    let direct = trans.step_closed_form(&v, &r0, &r1)?;
    let scale = direct.norm().max(f64::MIN_POSITIVE);
    let err = (&compact - &direct).norm() / scale;
    if !(err <= CONSISTENCY_TOL) {
        return Err(Error::InvalidArgument(format!(
            "transition operators disagree with the closed-form step (relative error {err:e})"
        )));
    }
    Ok(trans)
}

impl TransitionSet {
    pub fn n_state(&self) -> usize {
        self.t.nrows()
    }

    fn check_dims(&self, vs: [&DVector<f64>; 3]) -> Result<()> {
        let n = self.n_state();
        if vs.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "state length {n}, got {:?}",
                vs.map(|v| v.len())
            )));
        }
        Ok(())
    }

    /// `T v_j + P r_j + D (r_next − r_j)`.
    pub fn step(&self, v: &DVector<f64>, r: &DVector<f64>, r_next: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dims([v, r, r_next])?;
        Ok(&self.t * v + &self.p * r + &self.d * (r_next - r))
    }

    /// `T [v + A⁻¹(r_j + A⁻¹ ṙ)] − A⁻¹ [r_next + A⁻¹ ṙ]` with
    /// `ṙ = (r_next − r_j)/τ`.
    pub fn step_closed_form(
        &self,
        v: &DVector<f64>,
        r: &DVector<f64>,
        r_next: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_dims([v, r, r_next])?;
        let slope = (r_next - r) / self.tau;
        let a_inv_slope = &self.a_inv * slope;
        let head = v + &self.a_inv * (r + &a_inv_slope);
        Ok(&self.t * head - &self.a_inv * (r_next + a_inv_slope))
    }
}

pub fn step_forward(
    trans: &TransitionSet,
    v: &DVector<f64>,
    r: &DVector<f64>,
    r_next: &DVector<f64>,
) -> Result<DVector<f64>> {
    trans.step(v, r, r_next)
}

/// States `v_0 … v_{n−1}` driven by the scalar load samples `loads`
/// through `force_map`.
pub fn simulate(
    trans: &TransitionSet,
    force_map: &DVector<f64>,
    loads: &[f64],
    v0: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    if force_map.len() != trans.n_state() || v0.len() != trans.n_state() {
        return Err(Error::DimensionMismatch("force map or initial state".into()));
    }
    let mut out = Vec::with_capacity(loads.len());
    if loads.is_empty() {
        return Ok(out);
    }
    let tp = &trans.p * force_map;
    let td = &trans.d * force_map;
    let mut v = v0.clone();
    out.push(v.clone());
    for w in loads.windows(2) {
        v = &trans.t * &v + &tp * w[0] + &td * (w[1] - w[0]);
        out.push(v.clone());
    }
    Ok(out)
}
