//! Closed axisymmetric star-shaped hypersurfaces in R^n.
//!
//! A body is described by its polar profile `r = γ(θ)`, θ ∈ [0, π] measured
//! from the rotation axis; rotating the meridian curve `(γ cos θ, γ sin θ)`
//! about the axis through the `S^{n-2}` orbits closes the surface. The
//! profile is stored as samples on a uniform θ-grid and interpolated by its
//! even (cosine) trigonometric series, which keeps `γ'(0) = γ'(π) = 0` and
//! gives spectrally accurate derivatives for smooth bodies.
//!
//! Principal curvatures are the meridian curvature `κ_m` and the rotational
//! curvature `κ_r = ν_ρ / ρ` (multiplicity `n − 2`), oriented so that a round
//! sphere of radius `R` has all curvatures `1/R`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::{binomial, pairwise_sum, simpson_weights, sphere_area, Real};
use crate::symfunc::sigma_slice;

/// Strict convexity margin on sampled curvatures.
pub const CONVEXITY_MARGIN: f64 = 1e-12;

const POLE_PROBE: f64 = 1e-4;
const POLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("star-shapedness fails at θ = {theta}: <x,ν> = {support:e}")]
    StarShapeViolation { theta: f64, support: f64 },
    #[error("rotational curvature does not converge to the meridian curvature at θ = {theta}")]
    PoleSingularity { theta: f64 },
    #[error("body is not strictly convex: curvature {curvature:e} at θ = {theta}")]
    NotConvex { theta: f64, curvature: f64 },
    #[error("curvature order {k} invalid for n = {n}")]
    InvalidOrder { k: usize, n: usize },
    #[error("profile file: {0}")]
    Parse(String),
}

/// Axisymmetric star-shaped body `{ r < γ(θ) }` in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionBody<T> {
    n: usize,
    samples: Vec<T>,
    coeffs: Vec<T>,
    panels: usize,
}

impl<T: Real> RevolutionBody<T> {
    /// Builds a body from γ sampled at `θ_j = jπ/M`, `j = 0..=M`.
    pub fn from_samples(n: usize, samples: Vec<T>) -> Result<Self, SurfaceError> {
        if n < 3 {
            return Err(SurfaceError::InvalidProfile(format!("ambient dimension {n} < 3")));
        }
        if samples.len() < 3 {
            return Err(SurfaceError::InvalidProfile("need at least 3 profile samples".into()));
        }
        if let Some(j) = samples.iter().position(|g| !(g.is_finite() && *g > T::zero())) {
            return Err(SurfaceError::InvalidProfile(format!("γ must be positive and finite (sample {j})")));
        }
        let m = samples.len() - 1;
        let coeffs = cosine_coefficients(&samples);
        let panels = if m % 2 == 0 { m } else { m + 1 };
        Ok(Self { n, samples, coeffs, panels })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(T) -> T) -> Result<Self, SurfaceError> {
        let h = T::PI() / T::from_usize_lossy(m);
        Self::from_samples(n, (0..=m).map(|j| f(h * T::from_usize_lossy(j))).collect())
    }

    pub fn sphere(n: usize, radius: T, m: usize) -> Result<Self, SurfaceError> {
        Self::from_fn(n, m, |_| radius)
    }

    /// Spheroid with semi-axis `polar` along the rotation axis and `equatorial` across it.
    pub fn spheroid(n: usize, polar: T, equatorial: T, m: usize) -> Result<Self, SurfaceError> {
        Self::from_fn(n, m, |th| {
            let (s, c) = th.sin_cos();
            polar * equatorial / (equatorial * equatorial * c * c + polar * polar * s * s).sqrt()
        })
    }

    /// `γ(θ) = r0 + amp·cos(mode·θ)`.
    pub fn cos_perturbed(n: usize, r0: T, amp: T, mode: usize, m: usize) -> Result<Self, SurfaceError> {
        let mode = T::from_usize_lossy(mode);
        Self::from_fn(n, m, |th| r0 + amp * (mode * th).cos())
    }

    /// Replaces the quadrature resolution (number of Simpson panels, even).
    pub fn with_panels(mut self, panels: usize) -> Self {
        assert!(panels >= 2 && panels % 2 == 0, "panel count must be even");
        self.panels = panels;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_thetas(&self) -> Vec<T> {
        let m = self.samples.len() - 1;
        let h = T::PI() / T::from_usize_lossy(m);
        (0..=m).map(|j| h * T::from_usize_lossy(j)).collect()
    }

    /// `(γ, γ', γ'')` at θ.
    pub fn profile_at(&self, theta: T) -> (T, T, T) {
        let (c1, s1) = (theta.cos(), theta.sin());
        let (mut cm, mut sm) = (T::one(), T::zero());
        let (mut g, mut dg, mut d2g) = (T::zero(), T::zero(), T::zero());
        for (m, &a) in self.coeffs.iter().enumerate() {
            let mf = T::from_usize_lossy(m);
            g = g + a * cm;
            dg = dg - a * mf * sm;
            d2g = d2g - a * mf * mf * cm;
            let next_c = cm * c1 - sm * s1;
            sm = sm * c1 + cm * s1;
            cm = next_c;
        }
        (g, dg, d2g)
    }

    pub fn radius_at(&self, theta: T) -> T {
        self.profile_at(theta).0
    }

    pub fn max_radius(&self) -> T {
        self.samples.iter().copied().fold(T::zero(), T::max)
    }

    pub fn min_radius(&self) -> T {
        self.samples.iter().copied().fold(T::infinity(), T::min)
    }

    /// Largest relative deviation of γ from its sample mean.
    pub fn radius_deviation(&self) -> T {
        let mean = self.samples.iter().copied().sum::<T>() / T::from_usize_lossy(self.samples.len());
        self.samples
            .iter()
            .map(|&g| (g - mean).abs() / mean)
            .fold(T::zero(), T::max)
    }

    /// Differential geometry at θ; `weight` holds the area density per dθ.
    pub fn geometry_at(&self, theta: T) -> Result<SurfaceSample<T>, SurfaceError> {
        let (g, dg, d2g) = self.profile_at(theta);
        let (s, c) = theta.sin_cos();
        let w = (g * g + dg * dg).sqrt();
        let position = [g * c, g * s];
        let normal = [(dg * s + g * c) / w, (g * s - dg * c) / w];
        let support = g * g / w;
        let kappa_m = (g * g + T::lit(2.0) * dg * dg - g * d2g) / (w * w * w);
        let rho = g * s;
        let on_axis = s.abs() <= T::epsilon() * T::lit(16.0);
        let kappa_r = if on_axis {
            let probe = if c > T::zero() { T::lit(POLE_PROBE) } else { T::PI() - T::lit(POLE_PROBE) };
            let near = self.rotational_curvature(probe);
            if (near - kappa_m).abs() > T::lit(POLE_TOL) * kappa_m.abs().max(T::one() / g) {
                return Err(SurfaceError::PoleSingularity { theta: theta.to_f64().unwrap_or(f64::NAN) });
            }
            kappa_m
        } else {
            normal[1] / rho
        };
        if !(support > T::zero()) {
            return Err(SurfaceError::StarShapeViolation {
                theta: theta.to_f64().unwrap_or(f64::NAN),
                support: support.to_f64().unwrap_or(f64::NAN),
            });
        }
        let orbit = sphere_area::<T>(self.n - 2);
        let weight = orbit * rho.abs().powi(self.n as i32 - 2) * w;
        Ok(SurfaceSample { theta, position, normal, kappa_m, kappa_r, support, weight })
    }

    fn rotational_curvature(&self, theta: T) -> T {
        let (g, dg, _) = self.profile_at(theta);
        let (s, c) = theta.sin_cos();
        let w = (g * g + dg * dg).sqrt();
        (g * s - dg * c) / (w * g * s)
    }

    /// Uniform quadrature nodes on [0, π] with their Simpson weights.
    pub fn quadrature_nodes(&self, panels: usize) -> Vec<(T, T)> {
        let h = T::PI() / T::from_usize_lossy(panels);
        simpson_weights(panels, h)
            .into_iter()
            .enumerate()
            .map(|(j, w)| (h * T::from_usize_lossy(j), w))
            .collect()
    }
}

/// Cosine-series coefficients of the even periodic extension (DCT-I).
fn cosine_coefficients<T: Real>(samples: &[T]) -> Vec<T> {
    let m = samples.len() - 1;
    let mf = T::from_usize_lossy(m);
    let half = T::lit(0.5);
    let mut coeffs: Vec<T> = (0..=m)
        .map(|q| {
            let mut acc = Vec::with_capacity(m + 1);
            for (j, &g) in samples.iter().enumerate() {
                let w = if j == 0 || j == m { half } else { T::one() };
                // reduce the angle index exactly before converting
                let idx = (q * j) % (2 * m);
                let ang = T::PI() * T::from_usize_lossy(idx) / mf;
                acc.push(w * g * ang.cos());
            }
            T::lit(2.0) / mf * pairwise_sum(&acc)
        })
        .collect();
    coeffs[0] = coeffs[0] * half;
    coeffs[m] = coeffs[m] * half;
    let peak = coeffs.iter().map(|c| c.abs()).fold(T::zero(), T::max);
    let floor = peak * T::epsilon() * T::lit(8.0);
    let keep = coeffs.iter().rposition(|c| c.abs() > floor).map_or(1, |i| i + 1);
    coeffs.truncate(keep);
    coeffs
}

/// Geometry at one profile point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample<T> {
    pub theta: T,
    /// `(z, ρ)` in the meridian half-plane.
    pub position: [T; 2],
    /// Outward unit normal `(ν_z, ν_ρ)`.
    pub normal: [T; 2],
    pub kappa_m: T,
    /// Rotational curvature; multiplicity `n − 2`.
    pub kappa_r: T,
    /// `<x, ν>`.
    pub support: T,
    /// Area weight (density per dθ from `geometry_at`, quadrature weight in
    /// `curvature_samples`).
    pub weight: T,
}

impl<T: Real> SurfaceSample<T> {
    /// `H_k = S_k(κ_m, κ_r, …, κ_r)`.
    pub fn hk(&self, n: usize, k: usize) -> T {
        if k == 0 {
            return T::one();
        }
        if k > n - 1 {
            return T::zero();
        }
        let m = n - 2;
        binomial::<T>(m, k) * self.kappa_r.powi(k as i32)
            + binomial::<T>(m, k - 1) * self.kappa_m * self.kappa_r.powi(k as i32 - 1)
    }

    /// Full principal-curvature vector of length `n − 1`.
    pub fn principal_curvatures(&self, n: usize) -> Vec<T> {
        let mut v = vec![self.kappa_r; n - 1];
        v[0] = self.kappa_m;
        v
    }
}

/// Samples on the body's Simpson grid, weights including the rotation factor.
pub fn curvature_samples<T: Real>(body: &RevolutionBody<T>) -> Result<Vec<SurfaceSample<T>>, SurfaceError> {
    curvature_samples_on(body, body.panels())
}

pub fn curvature_samples_on<T: Real>(
    body: &RevolutionBody<T>,
    panels: usize,
) -> Result<Vec<SurfaceSample<T>>, SurfaceError> {
    body.quadrature_nodes(panels)
        .into_iter()
        .map(|(theta, w)| {
            let mut s = body.geometry_at(theta)?;
            s.weight = s.weight * w;
            Ok(s)
        })
        .collect()
}

fn integrate<T: Real>(samples: &[SurfaceSample<T>], f: impl Fn(&SurfaceSample<T>) -> T) -> T {
    let terms: Vec<T> = samples.iter().map(|s| s.weight * f(s)).collect();
    pairwise_sum(&terms)
}

fn check_order<T: Real>(body: &RevolutionBody<T>, k: usize, min: usize) -> Result<(), SurfaceError> {
    if k < min || k > body.dim() - 1 {
        return Err(SurfaceError::InvalidOrder { k, n: body.dim() });
    }
    Ok(())
}

/// `∫_Σ H_k dσ`.
pub fn quermass<T: Real>(body: &RevolutionBody<T>, k: usize) -> Result<T, SurfaceError> {
    check_order(body, k, 0)?;
    let n = body.dim();
    let s = curvature_samples(body)?;
    Ok(integrate(&s, |p| p.hk(n, k)))
}

/// `|∂Ω|`.
pub fn area<T: Real>(body: &RevolutionBody<T>) -> Result<T, SurfaceError> {
    quermass(body, 0)
}

/// `∫ <x,ν> H_k − ((n−k)/k) ∫ H_{k−1}`.
pub fn minkowski_residual<T: Real>(body: &RevolutionBody<T>, k: usize) -> Result<T, SurfaceError> {
    check_order(body, k, 1)?;
    let n = body.dim();
    let s = curvature_samples(body)?;
    let lhs = integrate(&s, |p| p.support * p.hk(n, k));
    let rhs = T::from_usize_lossy(n - k) / T::from_usize_lossy(k) * integrate(&s, |p| p.hk(n, k - 1));
    Ok(lhs - rhs)
}

/// Enclosed volume `(1/n) ∫ <x,ν> dσ`.
pub fn volume<T: Real>(body: &RevolutionBody<T>) -> Result<T, SurfaceError> {
    let s = curvature_samples(body)?;
    Ok(integrate(&s, |p| p.support) / T::from_usize_lossy(body.dim()))
}

/// Fails with `NotConvex` unless every sampled curvature exceeds the margin.
pub fn check_convex<T: Real>(samples: &[SurfaceSample<T>]) -> Result<(), SurfaceError> {
    let margin = T::lit(CONVEXITY_MARGIN);
    for s in samples {
        let worst = s.kappa_m.min(s.kappa_r);
        if !(worst > margin) {
            return Err(SurfaceError::NotConvex {
                theta: s.theta.to_f64().unwrap_or(f64::NAN),
                curvature: worst.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Both sides of the quadratic curvature-integral inequality at order k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfSides<T> {
    /// `(n−k)(k−1) (∫H_{k−1})²`.
    pub lhs: T,
    /// `(n−k+1) k ∫H_k ∫H_{k−2}`.
    pub rhs: T,
}

impl<T: Real> AfSides<T> {
    pub fn gap(&self) -> T {
        self.lhs - self.rhs
    }
}

pub fn af_sides<T: Real>(body: &RevolutionBody<T>, k: usize) -> Result<AfSides<T>, SurfaceError> {
    if k < 2 || k > body.dim() - 1 {
        return Err(SurfaceError::InvalidOrder { k, n: body.dim() });
    }
    let n = body.dim();
    let s = curvature_samples(body)?;
    check_convex(&s)?;
    let q = |j: usize| integrate(&s, |p| p.hk(n, j));
    let (qk, qk1, qk2) = (q(k), q(k - 1), q(k - 2));
    let lhs = T::from_usize_lossy((n - k) * (k - 1)) * qk1 * qk1;
    let rhs = T::from_usize_lossy((n - k + 1) * k) * qk * qk2;
    Ok(AfSides { lhs, rhs })
}

/// `(n−k)(k−1)(∫H_{k−1})² − (n−k+1)k ∫H_k ∫H_{k−2}`; non-negative on convex bodies.
pub fn af_gap<T: Real>(body: &RevolutionBody<T>, k: usize) -> Result<T, SurfaceError> {
    Ok(af_sides(body, k)?.gap())
}

/// Both sides of `|Ω| ∫H_1 ≤ (n−1)/n |∂Ω|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QiuXiaSides<T> {
    /// `(n−1)/n |∂Ω|²`.
    pub area_term: T,
    /// `|Ω| ∫ H_1`.
    pub volume_term: T,
}

pub fn qiu_xia_sides<T: Real>(body: &RevolutionBody<T>) -> Result<QiuXiaSides<T>, SurfaceError> {
    let n = body.dim();
    let s = curvature_samples(body)?;
    check_convex(&s)?;
    let area = integrate(&s, |_| T::one());
    let vol = integrate(&s, |p| p.support) / T::from_usize_lossy(n);
    let h1 = integrate(&s, |p| p.hk(n, 1));
    Ok(QiuXiaSides {
        area_term: T::from_usize_lossy(n - 1) / T::from_usize_lossy(n) * area * area,
        volume_term: vol * h1,
    })
}

/// `(n−1)/n |∂Ω|² − |Ω| ∫H_1`.
pub fn qiu_xia_gap<T: Real>(body: &RevolutionBody<T>) -> Result<T, SurfaceError> {
    let s = qiu_xia_sides(body)?;
    Ok(s.area_term - s.volume_term)
}

/// `H_k` of an explicit principal-curvature vector.
pub fn hk_of<T: Real>(kappa: &[T], k: usize) -> T {
    sigma_slice(kappa, k)
}

pub const PROFILE_HEADER: &str = "# revolution-profile v1";

/// Two-column `θ γ` text with a versioned header.
pub fn write_profile<T: Real>(body: &RevolutionBody<T>) -> String {
    let mut out = format!("{PROFILE_HEADER} n={}\n", body.dim());
    for (th, g) in body.sample_thetas().iter().zip(body.samples()) {
        let _ = writeln!(out, "{:.17e} {:.17e}", th.to_f64().unwrap(), g.to_f64().unwrap());
    }
    out
}

pub fn parse_profile<T: Real>(text: &str) -> Result<RevolutionBody<T>, SurfaceError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| SurfaceError::Parse("empty file".into()))?;
    let rest = header
        .strip_prefix(PROFILE_HEADER)
        .ok_or_else(|| SurfaceError::Parse(format!("missing `{PROFILE_HEADER}` header")))?;
    let n: usize = rest
        .trim()
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| SurfaceError::Parse("header must carry n=<dim>".into()))?;
    let mut thetas = Vec::new();
    let mut radii = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let mut next = || -> Result<f64, SurfaceError> {
            cols.next()
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| SurfaceError::Parse(format!("line {}: expected two numbers", lineno + 2)))
        };
        thetas.push(next()?);
        radii.push(T::lit(next()?));
    }
    if thetas.len() < 3 {
        return Err(SurfaceError::Parse("need at least 3 samples".into()));
    }
    let m = thetas.len() - 1;
    let h = std::f64::consts::PI / m as f64;
    for (j, &th) in thetas.iter().enumerate() {
        if (th - h * j as f64).abs() > 1e-9 {
            return Err(SurfaceError::Parse(format!("θ grid must be uniform on [0, π]; sample {j} is {th}")));
        }
    }
    RevolutionBody::from_samples(n, radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s4() -> f64 {
        8.0 * PI * PI / 3.0
    }

    #[test]
    fn interpolant_reproduces_samples_and_derivatives() {
        let body = RevolutionBody::<f64>::cos_perturbed(3, 1.0, 0.2, 2, 64).unwrap();
        for j in 0..=64 {
            let th = PI * j as f64 / 64.0;
            let (g, dg, d2g) = body.profile_at(th);
            assert!((g - (1.0 + 0.2 * (2.0 * th).cos())).abs() < 1e-14);
            assert!((dg + 0.4 * (2.0 * th).sin()).abs() < 1e-13);
            assert!((d2g + 0.8 * (2.0 * th).cos()).abs() < 1e-12);
        }
        let sph = RevolutionBody::<f64>::spheroid(3, 1.5, 1.0, 256).unwrap();
        let th = 0.3117;
        let (g, _, _) = sph.profile_at(th);
        let exact = 1.5 / (th.cos().powi(2) + 2.25 * th.sin().powi(2)).sqrt();
        assert!((g - exact).abs() < 1e-13);
    }

    #[test]
    fn sphere_curvatures_are_constant() {
        let body = RevolutionBody::<f64>::sphere(3, 2.0, 64).unwrap();
        for s in curvature_samples(&body).unwrap() {
            assert!((s.kappa_m - 0.5).abs() < 1e-10);
            assert!((s.kappa_r - 0.5).abs() < 1e-10);
        }
        let unit5 = RevolutionBody::<f64>::sphere(5, 1.0, 32).unwrap();
        for s in curvature_samples(&unit5).unwrap() {
            assert!((s.hk(5, 2) - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spheroid_pole_curvature() {
        let body = RevolutionBody::<f64>::spheroid(3, 1.5, 1.0, 512).unwrap();
        let pole = body.geometry_at(0.0).unwrap();
        assert!((pole.kappa_m - 1.5).abs() < 1e-10);
        assert!((pole.kappa_r - 1.5).abs() < 1e-10);
        let eq = body.geometry_at(PI / 2.0).unwrap();
        // meridian curvature at the equator b/a², rotational 1/b
        assert!((eq.kappa_m - 1.0 / 2.25).abs() < 1e-10);
        assert!((eq.kappa_r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quermass_examples() {
        for &r in &[0.5, 1.0, 3.0] {
            let b = RevolutionBody::<f64>::sphere(3, r, 1024).unwrap();
            assert!((quermass(&b, 0).unwrap() - 4.0 * PI * r * r).abs() < 1e-9 * r * r);
            assert!((quermass(&b, 1).unwrap() - 8.0 * PI * r).abs() < 1e-9 * r);
        }
        let b5 = RevolutionBody::<f64>::sphere(5, 1.0, 1024).unwrap();
        assert!((quermass(&b5, 1).unwrap() - 4.0 * s4()).abs() < 1e-9);
        assert!((4.0 * s4() - 105.276).abs() < 1e-3);
        assert!(quermass(&b5, 5).is_err());
    }

    #[test]
    fn quermass_sphere_closed_form() {
        for n in 3..=8 {
            let r = 1.7;
            let b = RevolutionBody::<f64>::sphere(n, r, 512).unwrap();
            for k in 0..n {
                let exact = binomial::<f64>(n - 1, k) * r.powi(-(k as i32)) * sphere_area::<f64>(n - 1) * r.powi(n as i32 - 1);
                let got = quermass(&b, k).unwrap();
                assert!((got - exact).abs() <= 1e-9 * exact, "n={n} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn volume_examples() {
        let b = RevolutionBody::<f64>::sphere(3, 1.0, 1024).unwrap();
        assert!((volume(&b).unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
        let b = RevolutionBody::<f64>::sphere(3, 2.0, 1024).unwrap();
        assert!((volume(&b).unwrap() - 32.0 * PI / 3.0).abs() < 1e-9);
        let sph = RevolutionBody::<f64>::spheroid(3, 1.5, 1.0, 1024).unwrap();
        assert!((volume(&sph).unwrap() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn minkowski_examples() {
        let b = RevolutionBody::<f64>::sphere(3, 1.0, 1024).unwrap();
        assert!(minkowski_residual(&b, 1).unwrap().abs() < 1e-12);
        let b5 = RevolutionBody::<f64>::sphere(5, 1.0, 1024).unwrap();
        assert!(minkowski_residual(&b5, 2).unwrap().abs() < 1e-10);
        let sph = RevolutionBody::<f64>::spheroid(3, 1.5, 1.0, 2048).unwrap();
        assert!(minkowski_residual(&sph, 1).unwrap().abs() < 1e-8);
        assert!(minkowski_residual(&sph, 0).is_err());
    }

    #[test]
    fn af_and_qiu_xia() {
        let s5 = RevolutionBody::<f64>::sphere(5, 1.0, 1024).unwrap();
        let sides = af_sides(&s5, 2).unwrap();
        assert!((sides.lhs - 48.0 * s4() * s4()).abs() < 1e-8 * sides.lhs);
        assert!(sides.gap().abs() < 1e-9 * sides.lhs);

        let oblong = RevolutionBody::<f64>::spheroid(5, 1.5, 1.0, 512).unwrap();
        assert!(af_gap(&oblong, 2).unwrap() > 0.0);

        let s3 = RevolutionBody::<f64>::sphere(3, 1.0, 1024).unwrap();
        let qx = qiu_xia_sides(&s3).unwrap();
        assert!((qx.area_term - 32.0 * PI * PI / 3.0).abs() < 1e-9);
        assert!(qiu_xia_gap(&s3).unwrap().abs() < 1e-9);
        let sph = RevolutionBody::<f64>::spheroid(3, 1.5, 1.0, 512).unwrap();
        assert!(qiu_xia_gap(&sph).unwrap() > 1e-3);

        let dented = RevolutionBody::<f64>::cos_perturbed(3, 1.0, 0.6, 2, 128).unwrap();
        assert!(matches!(qiu_xia_gap(&dented), Err(SurfaceError::NotConvex { .. })));
    }

    #[test]
    fn invalid_profiles() {
        assert!(RevolutionBody::<f64>::sphere(2, 1.0, 8).is_err());
        assert!(RevolutionBody::<f64>::from_samples(3, vec![1.0, -1.0, 1.0]).is_err());
        assert!(RevolutionBody::<f64>::from_samples(3, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn profile_text_round_trip() {
        let body = RevolutionBody::<f64>::spheroid(5, 1.5, 1.0, 16).unwrap();
        let text = write_profile(&body);
        assert!(text.starts_with("# revolution-profile v1 n=5\n"));
        let back: RevolutionBody<f64> = parse_profile(&text).unwrap();
        assert_eq!(back.dim(), 5);
        for (a, b) in back.samples().iter().zip(body.samples()) {
            assert_eq!(a, b);
        }
        assert!(parse_profile::<f64>("# wrong\n0 1\n").is_err());
        assert!(parse_profile::<f64>("# revolution-profile v1 n=3\n0 1\n0.5 1\n3.14159 1\n").is_err());
    }
}
