//! Dual reciprocity boundary element discretization of the scalar wave
//! equation `∇²u = ü / c²` on the plate.
//!
//! Collocating the boundary integral identity at every boundary node and
//! every internal point gives
//!
//! ```text
//! H u − G t = M ü,   M = (H Ψ − G Η) F⁻¹ / c²
//! ```
//!
//! where the domain inertia term has been expanded in the radial
//! coordinate functions `f = 1 + r` with particular solutions
//! `ψ = r²/4 + r³/9`. Partitioning on the boundary conditions then yields
//! the second-order system `m ü + k u = f_load · P(t)` on the free
//! displacement degrees of freedom.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{BcTag, BoundaryMesh, Point, TractionCondition};

/// Condition estimate above which the interpolation matrix is rejected.
pub const MAX_F_CONDITION: f64 = 1e14;

// 8-point Gauss–Legendre rule on [-1, 1].
const GAUSS_POINTS: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Collocated boundary integral matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrices {
    /// `(N+L) × (N+L)`, double-layer kernel plus free terms.
    pub h: DMatrix<f64>,
    /// `(N+L) × n_traction`, single-layer kernel.
    pub g: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualReciprocityBasis {
    /// `F[i][j] = 1 + r(x_i, x_j)`.
    pub f: DMatrix<f64>,
    /// `Ψ[i][j] = ψ_j(x_i)`.
    pub psi: DMatrix<f64>,
    /// `Η[t][j] = ∂ψ_j/∂n` at traction dof `t`, using that dof's normal.
    pub eta: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// 2-norm condition number of `F`.
    pub f_condition: f64,
}

/// A degree of freedom kept in the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedDof {
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub m: DMatrix<f64>,
    pub k: DMatrix<f64>,
    /// Forcing vector per unit load magnitude.
    pub load_map: DVector<f64>,
    pub dof_index: Vec<ReducedDof>,
    pub wave_speed: f64,
}

impl ReducedSystem {
    pub fn n_dof(&self) -> usize {
        self.dof_index.len()
    }

    /// Position of a mesh node among the reduced unknowns.
    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_index.iter().position(|d| d.node == node)
    }

    /// Static response `k⁻¹ · load_map · p`.
    pub fn static_response(&self, p: f64) -> Result<DVector<f64>> {
        self.k
            .clone()
            .lu()
            .solve(&(&self.load_map * p))
            .ok_or(Error::SingularBlock)
    }
}

/// `u* = ln(1/r) / 2π`.
pub fn fundamental_solution(r: f64) -> f64 {
    -r.ln() / (2.0 * PI)
}

/// Coordinate function `f = 1 + r`.
pub fn coordinate_function(r: f64) -> f64 {
    1.0 + r
}

/// Particular solution with `∇²ψ = 1 + r`.
pub fn particular_solution(r: f64) -> f64 {
    r * r / 4.0 + r * r * r / 9.0
}

/// Normal derivative of [`particular_solution`] for the offset
/// `d = x − x_j` and unit normal `n`: `(1/2 + r/3) (d · n)`.
pub fn particular_flux(d: &Vector2<f64>, n: &Vector2<f64>) -> f64 {
    (0.5 + d.norm() / 3.0) * d.dot(n)
}

/// Assembles `H` and `G` by collocation at every mesh node.
pub fn assemble_influence(mesh: &BoundaryMesh) -> Result<InfluenceMatrices> {
    if let Some((i, _)) = mesh.elements.iter().enumerate().find(|(_, e)| !(e.length > 0.0)) {
        return Err(Error::DegenerateElement(i));
    }
    let n_nodes = mesh.n_nodes();
    let n_traction = mesh.n_traction();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n_nodes)
        .into_par_iter()
        .map(|i| influence_row(mesh, i))
        .collect();

    let mut h = DMatrix::zeros(n_nodes, n_nodes);
    let mut g = DMatrix::zeros(n_nodes, n_traction);
    for (i, (hr, gr)) in rows.into_iter().enumerate() {
        for j in 0..n_nodes {
            h[(i, j)] = hr[j];
        }
        for j in 0..n_traction {
            g[(i, j)] = gr[j];
        }
    }
    Ok(InfluenceMatrices { h, g })
}

fn influence_row(mesh: &BoundaryMesh, i: usize) -> (Vec<f64>, Vec<f64>) {
    let n_nodes = mesh.n_nodes();
    let source = mesh.nodes[i];
    let mut h = vec![0.0; n_nodes];
    let mut g = vec![0.0; mesh.n_traction()];

    for el in &mesh.elements {
        let a = mesh.nodes[el.start];
        let b = mesh.nodes[el.end];
        let len = el.length;
        let [ta, tb] = el.traction_dofs;
        if i == el.start || i == el.end {
            // Source on the element: the double layer vanishes on a straight
            // segment and the log singularity integrates in closed form.
            let near = len / (2.0 * PI) * (0.75 - 0.5 * len.ln());
            let far = len / (2.0 * PI) * (0.25 - 0.5 * len.ln());
            if i == el.start {
                g[ta] += near;
                g[tb] += far;
            } else {
                g[ta] += far;
                g[tb] += near;
            }
            continue;
        }
        let jac = len / 2.0;
        for (&xi, &w) in GAUSS_POINTS.iter().zip(&GAUSS_WEIGHTS) {
            let n1 = 0.5 * (1.0 - xi);
            let n2 = 0.5 * (1.0 + xi);
            let x = a * n1 + b * n2;
            let d = x - source;
            let r2 = d.norm_squared();
            let u_star = -0.5 * r2.ln() / (2.0 * PI);
            let q_star = -d.dot(&el.normal) / (2.0 * PI * r2);
            let wj = w * jac;
            g[ta] += u_star * n1 * wj;
            g[tb] += u_star * n2 * wj;
            h[el.start] += q_star * n1 * wj;
            h[el.end] += q_star * n2 * wj;
        }
    }

    if mesh.is_internal(i) {
        h[i] = 1.0;
    } else {
        // Free term plus the principal value, from the constant-potential
        // state: every row of H annihilates a uniform boundary field.
        let off: f64 = (0..mesh.n_boundary).filter(|&j| j != i).map(|j| h[j]).sum();
        h[i] = -off;
    }
    (h, g)
}

/// Builds the coordinate-function matrices and the mass matrix.
pub fn assemble_dual_reciprocity(
    mesh: &BoundaryMesh,
    infl: &InfluenceMatrices,
    wave_speed: f64,
) -> Result<DualReciprocityBasis> {
    if !(wave_speed > 0.0) {
        return Err(Error::InvalidArgument(format!("wave speed must be positive, got {wave_speed}")));
    }
    let n = mesh.n_nodes();
    if infl.h.nrows() != n || infl.h.ncols() != n || infl.g.ncols() != mesh.n_traction() {
        return Err(Error::DimensionMismatch("influence matrices do not match mesh".into()));
    }
    let dist = |i: usize, j: usize| (mesh.nodes[i] - mesh.nodes[j]).norm();
    let f = DMatrix::from_fn(n, n, |i, j| coordinate_function(dist(i, j)));
    let psi = DMatrix::from_fn(n, n, |i, j| particular_solution(dist(i, j)));
    let eta = DMatrix::from_fn(mesh.n_traction(), n, |t, j| {
        let dof = &mesh.traction_dofs[t];
        particular_flux(&(mesh.nodes[dof.node] - mesh.nodes[j]), &dof.normal)
    });

    let sv = f.clone().singular_values();
    let f_condition = sv.max() / sv.min();
    if !f_condition.is_finite() || f_condition > MAX_F_CONDITION {
        return Err(Error::SingularF(f_condition));
    }
    // mass = S F⁻¹  ⇔  Fᵀ massᵀ = Sᵀ
    let s = (&infl.h * &psi - &infl.g * &eta) / (wave_speed * wave_speed);
    let mass_t = f
        .transpose()
        .lu()
        .solve(&s.transpose())
        .ok_or(Error::SingularF(f_condition))?;
    Ok(DualReciprocityBasis {
        f,
        psi,
        eta,
        mass: mass_t.transpose(),
        f_condition,
    })
}

/// Eliminates prescribed displacements and the reaction tractions on the
/// clamped edge, leaving `m ü + k u = load_map · P(t)`.
///
/// The collocation rows of the clamped nodes fix the reactions; the
/// remaining rows give the dynamics after substitution.
pub fn reduce_system(
    mesh: &BoundaryMesh,
    infl: &InfluenceMatrices,
    basis: &DualReciprocityBasis,
    wave_speed: f64,
) -> Result<ReducedSystem> {
    let n = mesh.n_nodes();
    let is_fixed = |node: usize| matches!(mesh.bc_tags.get(node), Some(BcTag::Dirichlet(_)));
    let free: Vec<usize> = (0..n).filter(|&i| !is_fixed(i)).collect();
    let fixed: Vec<usize> = (0..n).filter(|&i| is_fixed(i)).collect();
    let mut reaction = Vec::new();
    let mut load = Vec::new();
    let mut known = Vec::new();
    for (t, dof) in mesh.traction_dofs.iter().enumerate() {
        match dof.condition {
            TractionCondition::Unknown => reaction.push(t),
            TractionCondition::Load => load.push(t),
            TractionCondition::Known(v) => known.push((t, v)),
        }
    }
    if reaction.len() != fixed.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reaction tractions for {} clamped nodes",
            reaction.len(),
            fixed.len()
        )));
    }
    if known.iter().any(|&(_, v)| v != 0.0) {
        return Err(Error::InvalidArgument("only homogeneous prescribed tractions are supported".into()));
    }
    for &node in &fixed {
        if let Some(BcTag::Dirichlet(v)) = mesh.bc_tags.get(node) {
            if *v != 0.0 {
                return Err(Error::InvalidArgument("only homogeneous prescribed displacements are supported".into()));
            }
        }
    }

    let pick = |m: &DMatrix<f64>, rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let g_load_col = |rows: &[usize]| {
        DVector::from_fn(rows.len(), |i, _| load.iter().map(|&t| infl.g[(rows[i], t)]).sum())
    };

    // rows a: clamped nodes, rows b: everything else
    let g_ax = pick(&infl.g, &fixed, &reaction);
    let g_bx = pick(&infl.g, &free, &reaction);
    // S = G_bx G_ax⁻¹ via G_axᵀ Sᵀ = G_bxᵀ
    let s = g_ax
        .transpose()
        .lu()
        .solve(&g_bx.transpose())
        .ok_or(Error::SingularBlock)?
        .transpose();

    let m_af = pick(&basis.mass, &fixed, &free);
    let m_bf = pick(&basis.mass, &free, &free);
    let h_af = pick(&infl.h, &fixed, &free);
    let h_bf = pick(&infl.h, &free, &free);

    // M ü − H u = −G t on every row; eliminate the reactions.
    let m = &m_bf - &s * &m_af;
    let k = -(&h_bf - &s * &h_af);
    let load_map = -(g_load_col(&free) - &s * g_load_col(&fixed));

    Ok(ReducedSystem {
        m,
        k,
        load_map,
        dof_index: free.iter().map(|&node| ReducedDof { node }).collect(),
        wave_speed,
    })
}

/// Mesh, matrices and reduced system assembled in one go.
#[derive(Debug, Clone)]
pub struct PlateModel {
    pub mesh: BoundaryMesh,
    pub influence: InfluenceMatrices,
    pub basis: DualReciprocityBasis,
    pub reduced: ReducedSystem,
}

impl PlateModel {
    pub fn assemble(mesh: BoundaryMesh, wave_speed: f64) -> Result<Self> {
        let influence = assemble_influence(&mesh)?;
        let basis = assemble_dual_reciprocity(&mesh, &influence, wave_speed)?;
        let reduced = reduce_system(&mesh, &influence, &basis, wave_speed)?;
        Ok(PlateModel {
            mesh,
            influence,
            basis,
            reduced,
        })
    }

    pub fn locate(&self, p: Point) -> Result<usize> {
        self.mesh.locate_node(p)
    }
}
