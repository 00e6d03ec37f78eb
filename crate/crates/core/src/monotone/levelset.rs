//! Level sets `{u = t}` of a discrete exterior field.
//!
//! When every θ-column of the grid crosses the level exactly once the curve
//! is a graph over θ and is integrated with Simpson's rule in θ; otherwise
//! it is traced by marching squares and integrated along the polyline.

use std::collections::HashMap;

use crate::fields::Jet2;
use crate::scalar::sphere_area;
use crate::solver::{ExteriorField, NodeJet};

use super::MonotoneError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMode {
    Graph,
    MarchingSquares,
}

/// One quadrature point on a level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPoint {
    pub theta: f64,
    /// `(z, ρ)` in the meridian half-plane.
    pub position: [f64; 2],
    /// Field jet interpolated from the neighbouring nodes.
    pub jet: NodeJet,
    /// Area weight including the rotation factor `|S^{n−2}| ρ^{n−2}`.
    pub weight: f64,
}

impl LevelPoint {
    pub fn grad_norm(&self) -> f64 {
        self.jet.grad_norm()
    }

    pub fn cartesian(&self, n: usize) -> Jet2<f64> {
        self.jet.to_jet(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetCurve {
    pub t: f64,
    pub dim: usize,
    pub mode: ExtractionMode,
    /// Points ordered from the axis at θ = 0 to the axis at θ = π.
    pub points: Vec<LevelPoint>,
}

impl LevelSetCurve {
    pub fn integrate(&self, f: impl Fn(&LevelPoint) -> f64) -> f64 {
        let terms: Vec<f64> = self.points.iter().map(|p| p.weight * f(p)).collect();
        crate::scalar::pairwise_sum(&terms)
    }

    pub fn area(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// Smallest and largest `|x|` on the curve.
    pub fn radius_range(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.jet.r), hi.max(p.jet.r)))
    }

    pub fn min_gradient(&self) -> f64 {
        self.points.iter().map(LevelPoint::grad_norm).fold(f64::INFINITY, f64::min)
    }
}

/// Default `τ_grad`.
pub const DEFAULT_TAU_GRAD: f64 = 1e-8;

pub fn extract_levelset(field: &ExteriorField, t: f64) -> Result<LevelSetCurve, MonotoneError> {
    extract_levelset_with(field, t, DEFAULT_TAU_GRAD)
}

pub fn extract_levelset_with(field: &ExteriorField, t: f64, tau_grad: f64) -> Result<LevelSetCurve, MonotoneError> {
    let g = &field.grid;
    let out_of_range = |reason: &str| MonotoneError::LevelOutOfRange { t, reason: reason.into() };
    if !(t > -1.0) {
        return Err(out_of_range("at or below the boundary value -1"));
    }
    if (0..=g.nth).any(|j| !(field.value(g.ns, j) > t)) {
        return Err(out_of_range("at or above the truncation-sphere value"));
    }
    let crossings: Vec<Vec<usize>> = (0..=g.nth)
        .map(|j| (0..g.ns).filter(|&i| (field.value(i, j) > t) != (field.value(i + 1, j) > t)).collect())
        .collect();
    let curve = if crossings.iter().all(|c| c.len() == 1) {
        let cells: Vec<usize> = crossings.iter().map(|c| c[0]).collect();
        if cells.iter().any(|&i| i == 0) {
            return Err(out_of_range("within one cell of the boundary"));
        }
        if cells.iter().any(|&i| i + 1 == g.ns) {
            return Err(out_of_range("within one cell of the truncation sphere"));
        }
        graph_curve(field, t, &cells)
    } else {
        marching_squares(field, t)?
    };
    for p in &curve.points {
        let grad = p.grad_norm();
        if !(grad >= tau_grad) {
            return Err(MonotoneError::CriticalPointOnLevel { t, theta: p.theta, grad });
        }
    }
    Ok(curve)
}

fn lerp_jet(a: &NodeJet, b: &NodeJet, lam: f64) -> NodeJet {
    let mix = |x: f64, y: f64| x + lam * (y - x);
    NodeJet {
        r: mix(a.r, b.r),
        theta: mix(a.theta, b.theta),
        u: mix(a.u, b.u),
        u_l: mix(a.u_l, b.u_l),
        u_t: mix(a.u_t, b.u_t),
        hhat: [0, 1, 2, 3].map(|q| mix(a.hhat[q], b.hhat[q])),
    }
}

fn fraction(ua: f64, ub: f64, t: f64) -> f64 {
    ((t - ua) / (ub - ua)).clamp(0.0, 1.0)
}

fn graph_curve(field: &ExteriorField, t: f64, cells: &[usize]) -> LevelSetCurve {
    let g = &field.grid;
    let n = g.dim();
    let orbit: f64 = sphere_area(n - 2);
    let simpson = crate::scalar::simpson_weights::<f64>(g.nth, g.hth());
    let points = cells
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let (a, b) = (g.jet(&field.u, i, j), g.jet(&field.u, i + 1, j));
            let lam = fraction(a.u, b.u, t);
            let theta = g.theta(j);
            let mut jet = lerp_jet(&a, &b, lam);
            jet.r = g.log_r_at((i as f64 + lam) * g.hs(), theta).exp();
            jet.theta = theta;
            jet.u = t;
            let (s, c) = theta.sin_cos();
            let slope = jet.u_t / jet.u_l;
            let line = jet.r * (1.0 + slope * slope).sqrt();
            let weight = simpson[j] * orbit * (jet.r * s).abs().powi(n as i32 - 2) * line;
            LevelPoint { theta, position: [jet.r * c, jet.r * s], jet, weight }
        })
        .collect();
    LevelSetCurve { t, dim: n, mode: ExtractionMode::Graph, points }
}

/// Edge of the `(s, θ)` grid: `(0, i, j)` joins `(i, j)–(i+1, j)`, `(1, i, j)`
/// joins `(i, j)–(i, j+1)`.
type Edge = (u8, usize, usize);

fn marching_squares(field: &ExteriorField, t: f64) -> Result<LevelSetCurve, MonotoneError> {
    let g = &field.grid;
    let n = g.dim();
    let above = |i: usize, j: usize| field.value(i, j) > t;
    let crosses = |e: Edge| match e {
        (0, i, j) => above(i, j) != above(i + 1, j),
        (_, i, j) => above(i, j) != above(i, j + 1),
    };
    let mut links: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for i in 0..g.ns {
        for j in 0..g.nth {
            // corners a=(i,j) b=(i+1,j) c=(i+1,j+1) d=(i,j+1)
            let edges: [Edge; 4] = [(0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)];
            let hit: Vec<Edge> = edges.iter().copied().filter(|&e| crosses(e)).collect();
            match hit.len() {
                2 => link(hit[0], hit[1]),
                4 => {
                    let centre = 0.25
                        * (field.value(i, j) + field.value(i + 1, j) + field.value(i + 1, j + 1) + field.value(i, j + 1));
                    if (centre > t) == above(i, j) {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }
    let open = || MonotoneError::OpenContour { t };
    let start = (0..g.ns).map(|i| (0u8, i, 0usize)).find(|e| links.contains_key(e)).ok_or_else(open)?;
    let mut path = vec![start];
    let mut prev: Option<Edge> = None;
    let mut cur = start;
    while !(cur.0 == 0 && cur.2 == g.nth) {
        let next = links[&cur].iter().copied().find(|&e| Some(e) != prev).ok_or_else(open)?;
        if path.len() > links.len() {
            return Err(open());
        }
        prev = Some(cur);
        cur = next;
        path.push(cur);
    }
    for &(kind, i, _) in &path {
        if kind == 0 && i == 0 {
            return Err(MonotoneError::LevelOutOfRange { t, reason: "within one cell of the boundary".into() });
        }
        if kind == 0 && i + 1 == g.ns {
            return Err(MonotoneError::LevelOutOfRange { t, reason: "within one cell of the truncation sphere".into() });
        }
    }
    let mut pts: Vec<(NodeJet, [f64; 2])> = path
        .iter()
        .map(|&(kind, i, j)| {
            let (ib, jb) = if kind == 0 { (i + 1, j) } else { (i, j + 1) };
            let (a, b) = (g.jet(&field.u, i, j), g.jet(&field.u, ib, jb));
            let lam = fraction(a.u, b.u, t);
            let mut jet = lerp_jet(&a, &b, lam);
            let (s, theta) = if kind == 0 {
                ((i as f64 + lam) * g.hs(), g.theta(j))
            } else {
                (g.s(i), g.theta(j) + lam * g.hth())
            };
            jet.r = g.log_r_at(s, theta).exp();
            jet.theta = theta;
            jet.u = t;
            let (sn, cs) = theta.sin_cos();
            (jet, [jet.r * cs, jet.r * sn])
        })
        .collect();
    // coincident points (level through a node) carry no length
    pts.dedup_by(|b, a| (a.1[0] - b.1[0]).hypot(a.1[1] - b.1[1]) == 0.0);
    let orbit: f64 = sphere_area(n - 2);
    let seg: Vec<f64> = pts.windows(2).map(|w| (w[1].1[0] - w[0].1[0]).hypot(w[1].1[1] - w[0].1[1])).collect();
    let points = pts
        .iter()
        .enumerate()
        .map(|(m, &(jet, position))| {
            let left = if m > 0 { seg[m - 1] } else { 0.0 };
            let right = seg.get(m).copied().unwrap_or(0.0);
            let weight = 0.5 * (left + right) * orbit * position[1].abs().powi(n as i32 - 2);
            LevelPoint { theta: jet.theta, position, jet, weight }
        })
        .collect();
    Ok(LevelSetCurve { t, dim: n, mode: ExtractionMode::MarchingSquares, points })
}

/// Forces the marching-squares path; exposed for cross-checking the two modes.
pub fn extract_levelset_contour(field: &ExteriorField, t: f64) -> Result<LevelSetCurve, MonotoneError> {
    if !(t > -1.0) {
        return Err(MonotoneError::LevelOutOfRange { t, reason: "at or below the boundary value -1".into() });
    }
    marching_squares(field, t)
}
