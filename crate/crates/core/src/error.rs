use crate::numerics::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (defect {defect:.3e} > tol {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("matrix is numerically singular (rcond {rcond:.3e})")]
    SingularMatrix { rcond: f64 },

    #[error("block A is numerically singular (rcond {rcond:.3e}); 0 must lie in the resolvent set of A")]
    SingularA { rcond: f64 },
    #[error("block A is not Hermitian (defect {defect:.3e})")]
    NonHermitianA { defect: f64 },
    #[error("block B is not Hermitian (defect {defect:.3e})")]
    NonHermitianB { defect: f64 },
    #[error("z = {z} lies in the spectrum of A (rcond {rcond:.3e})")]
    ZInSpectrumA { z: C64, rcond: f64 },
    #[error("inertia of {which} is ambiguous: eigenvalue {value:.3e} within tolerance of zero")]
    DegenerateInertia { which: String, value: f64 },
    #[error("no roots of det T(z) found in the search region")]
    NoRootsInRegion,
    #[error("L - iy is numerically singular at y = {y}")]
    ResolventSingular { y: f64 },
    #[error("T(z) is numerically singular at z = {z}")]
    TSingular { z: C64 },

    #[error("parameter outside symbol domain: {0}")]
    DomainViolation(String),
    #[error("invalid symbol parameters: {0}")]
    InvalidSymbolParams(String),
    #[error("denominator vanishes near lambda = {lambda}")]
    DivisionNearZero { lambda: f64 },
    #[error("positivity condition ab - |c|^2 >= 0 fails at lambda = {lambda}")]
    PositivityViolated { lambda: f64 },
    #[error("symbol L(lambda) - z is singular at lambda = {lambda}")]
    SymbolSingular { lambda: f64 },

    #[error("weight {0} is not strictly positive")]
    NonPositiveWeight(f64),
    #[error("block eigenvalues coincide; spectral projector undefined")]
    DegenerateEigenvalues,
    #[error("z^2 = {z2} coincides with a weight")]
    ZSquaredInSpectrum { z2: C64 },
    #[error("operation requires the {expected} rule")]
    WrongRule { expected: &'static str },
    #[error("weights must be strictly increasing")]
    WeightsNotIncreasing,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("velocity nu = {nu} must satisfy 0 < |nu| < 1")]
    NuOutOfRange { nu: f64 },
    #[error("H_V has an eigenvalue {eigenvalue:.3e} too close to zero; perturb V to restore 0 in the resolvent set")]
    SingularHV { eigenvalue: f64 },
    #[error("factor nu*D -/+ y is singular (rcond {rcond:.3e})")]
    SingularFactor { rcond: f64 },
    #[error("potential does not decay near the interval ends (outer max {outer:.3e} > {tol:.3e})")]
    PotentialNotDecaying { outer: f64, tol: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
}
