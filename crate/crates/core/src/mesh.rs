//! Boundary discretization of the unit square plate.
//!
//! Boundary nodes run counterclockwise from the corner (0, 0); internal
//! collocation points are appended after them. Elements are straight
//! two-node segments between consecutive boundary nodes.
//!
//! Displacement is continuous along the contour (one value per node) while
//! traction is stored per element side: a smooth node carries one traction
//! degree of freedom shared by its two elements, a corner carries two.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Tolerance used by [`BoundaryMesh::locate_node`].
pub const LOCATE_TOLERANCE: f64 = 1e-9;

const GEOMETRY_TOLERANCE: f64 = 1e-12;

/// Value prescribed on a Neumann node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeumannValue {
    Value(f64),
    /// The time-dependent applied traction `P(t)`.
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcTag {
    Dirichlet(f64),
    Neumann(NeumannValue),
}

/// Which side of the square an element lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    /// x2 = 0
    Bottom,
    /// x1 = 1, clamped
    Right,
    /// x2 = 1
    Top,
    /// x1 = 0, loaded
    Left,
}

/// Condition on a traction degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TractionCondition {
    /// Prescribed traction value.
    Known(f64),
    /// Scales with the applied load magnitude.
    Load,
    /// Reaction on the clamped edge, solved for.
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub start: usize,
    pub end: usize,
    pub normal: Vector2<f64>,
    pub length: f64,
    pub edge: Edge,
    /// Traction degrees of freedom at the start and end of the element.
    pub traction_dofs: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TractionDof {
    pub node: usize,
    pub normal: Vector2<f64>,
    pub condition: TractionCondition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<Element>,
    /// One tag per boundary node.
    pub bc_tags: Vec<BcTag>,
    pub traction_dofs: Vec<TractionDof>,
    pub n_boundary: usize,
    pub n_internal: usize,
}

/// Builds the unit square plate with uniform linear elements of length
/// `element_length` and the given internal collocation points.
pub fn build_square_plate(element_length: f64, internal_points: &[Point]) -> Result<BoundaryMesh> {
    if !(element_length > 0.0) || !element_length.is_finite() {
        return Err(Error::NonDivisibleLength(element_length));
    }
    let per_edge_f = 1.0 / element_length;
    let per_edge = per_edge_f.round();
    if per_edge < 1.0 || (per_edge * element_length - 1.0).abs() > GEOMETRY_TOLERANCE {
        return Err(Error::NonDivisibleLength(element_length));
    }
    let n = per_edge as usize;

    // Integer arithmetic keeps corner coordinates exact.
    let frac = |k: usize| k as f64 / n as f64;
    let mut boundary = Vec::with_capacity(4 * n);
    for k in 0..n {
        boundary.push(Point::new(frac(k), 0.0));
    }
    for k in 0..n {
        boundary.push(Point::new(1.0, frac(k)));
    }
    for k in 0..n {
        boundary.push(Point::new(frac(n - k), 1.0));
    }
    for k in 0..n {
        boundary.push(Point::new(0.0, frac(n - k)));
    }
    BoundaryMesh::from_contour(boundary, internal_points)
}

impl BoundaryMesh {
    /// Builds a mesh of the unit square from an explicit counterclockwise
    /// node loop. Any starting node is accepted, which makes relabelled
    /// meshes available for invariance checks.
    pub fn from_contour(boundary: Vec<Point>, internal_points: &[Point]) -> Result<Self> {
        for p in internal_points {
            let inside = p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
            if !inside || !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::PointOutside(p.x, p.y));
            }
        }
        let n_boundary = boundary.len();
        let mut elements = Vec::with_capacity(n_boundary);
        for i in 0..n_boundary {
            let j = (i + 1) % n_boundary;
            let d = boundary[j] - boundary[i];
            let length = d.norm();
            if length <= GEOMETRY_TOLERANCE {
                return Err(Error::DegenerateElement(i));
            }
            let tangent = d / length;
            let normal = Vector2::new(tangent.y, -tangent.x);
            elements.push(Element {
                start: i,
                end: j,
                normal,
                length,
                edge: classify_edge(&normal),
                traction_dofs: [0, 0],
            });
        }

        // A smooth node owns one traction dof shared by both of its elements;
        // a corner gets a separate dof on each side.
        let incoming = |node: usize| (node + n_boundary - 1) % n_boundary;
        let is_corner: Vec<bool> = (0..n_boundary)
            .map(|i| (elements[incoming(i)].normal - elements[i].normal).norm() > GEOMETRY_TOLERANCE)
            .collect();
        let mut traction_dofs: Vec<TractionDof> = Vec::with_capacity(n_boundary + 4);
        let mut shared: Vec<Option<usize>> = vec![None; n_boundary];
        for e in 0..n_boundary {
            let mut dofs = [0usize; 2];
            for (k, node) in [elements[e].start, elements[e].end].into_iter().enumerate() {
                let existing = if is_corner[node] { None } else { shared[node] };
                dofs[k] = match existing {
                    Some(d) => d,
                    None => {
                        traction_dofs.push(TractionDof {
                            node,
                            normal: elements[e].normal,
                            condition: traction_condition(elements[e].edge),
                        });
                        let d = traction_dofs.len() - 1;
                        if !is_corner[node] {
                            shared[node] = Some(d);
                        }
                        d
                    }
                };
            }
            elements[e].traction_dofs = dofs;
        }

        let bc_tags = boundary.iter().map(node_tag).collect();
        let mut nodes = boundary;
        nodes.extend_from_slice(internal_points);
        Ok(BoundaryMesh {
            nodes,
            elements,
            bc_tags,
            traction_dofs,
            n_boundary,
            n_internal: internal_points.len(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_traction(&self) -> usize {
        self.traction_dofs.len()
    }

    pub fn is_internal(&self, node: usize) -> bool {
        node >= self.n_boundary
    }

    /// Index of the unique node within [`LOCATE_TOLERANCE`] of `point`.
    pub fn locate_node(&self, point: Point) -> Result<usize> {
        let (idx, dist) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - point).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if dist <= LOCATE_TOLERANCE {
            Ok(idx)
        } else {
            Err(Error::NoNode(point.x, point.y))
        }
    }

    /// Plain-text export: a node table `index x1 x2 tag value` followed by an
    /// element block `e start end nx ny`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.nodes.iter().enumerate() {
            let (tag, value) = match self.bc_tags.get(i) {
                Some(BcTag::Dirichlet(v)) => ("DIRICHLET", fmt_num(*v)),
                Some(BcTag::Neumann(NeumannValue::Value(v))) => ("NEUMANN", fmt_num(*v)),
                Some(BcTag::Neumann(NeumannValue::Load)) => ("NEUMANN", "LOAD".to_string()),
                None => ("INTERNAL", "-".to_string()),
            };
            writeln!(out, "{i} {} {} {tag} {value}", fmt_num(p.x), fmt_num(p.y)).unwrap();
        }
        for el in &self.elements {
            writeln!(
                out,
                "e {} {} {} {}",
                el.start,
                el.end,
                fmt_num(el.normal.x),
                fmt_num(el.normal.y)
            )
            .unwrap();
        }
        out
    }
}

fn fmt_num(v: f64) -> String {
    // Normalise negative zero so the export is stable.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn classify_edge(normal: &Vector2<f64>) -> Edge {
    if normal.x > 0.5 {
        Edge::Right
    } else if normal.x < -0.5 {
        Edge::Left
    } else if normal.y < -0.5 {
        Edge::Bottom
    } else {
        Edge::Top
    }
}

fn traction_condition(edge: Edge) -> TractionCondition {
    match edge {
        Edge::Right => TractionCondition::Unknown,
        Edge::Left => TractionCondition::Load,
        Edge::Bottom | Edge::Top => TractionCondition::Known(0.0),
    }
}

fn node_tag(p: &Point) -> BcTag {
    if (p.x - 1.0).abs() <= GEOMETRY_TOLERANCE {
        BcTag::Dirichlet(0.0)
    } else if p.x.abs() <= GEOMETRY_TOLERANCE {
        BcTag::Neumann(NeumannValue::Load)
    } else {
        BcTag::Neumann(NeumannValue::Value(0.0))
    }
}
