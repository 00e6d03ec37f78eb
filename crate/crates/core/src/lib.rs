//! Numerical laboratory for the exterior homogeneous k-Hessian Dirichlet problem.

pub mod battery;
pub mod fields;
pub mod identities;
pub mod monotone;
pub mod radial;
pub mod scalar;
pub mod solver;
pub mod surfaces;
pub mod symfunc;

pub use scalar::Real;

/// Double-precision instantiations.
pub mod f64s {
    pub type SymVec = crate::symfunc::SymVec<f64>;
    pub type SymMat = crate::symfunc::SymMat<f64>;
    pub type Jet2 = crate::fields::Jet2<f64>;
    pub type RevolutionBody = crate::surfaces::RevolutionBody<f64>;
    pub type SurfaceSample = crate::surfaces::SurfaceSample<f64>;
    pub type RadialSolution = crate::radial::RadialSolution<f64>;
    pub type ProblemSpec = crate::monotone::ProblemSpec<f64>;
}

/// Single-precision instantiations of the scalar-generic parts.
pub mod f32s {
    pub type SymVec = crate::symfunc::SymVec<f32>;
    pub type SymMat = crate::symfunc::SymMat<f32>;
    pub type Jet2 = crate::fields::Jet2<f32>;
    pub type RevolutionBody = crate::surfaces::RevolutionBody<f32>;
    pub type SurfaceSample = crate::surfaces::SurfaceSample<f32>;
    pub type RadialSolution = crate::radial::RadialSolution<f32>;
    pub type ProblemSpec = crate::monotone::ProblemSpec<f32>;
}
