//! Error types shared by all modules.

/// Errors raised by curve/body constructors and geometric queries.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The support function produces a non-convex curve: rho = h + h'' dips
    /// to `min_rho` at `theta`.
    #[error("convexity violation: rho({theta:.6}) = {min_rho:.6} <= 0")]
    ConvexityViolation { theta: f64, min_rho: f64 },

    /// Operation requires a constant-width curve but harmonic `n` is even.
    #[error("curve is not constant width: even harmonic n = {n}")]
    NotConstantWidth { n: u32 },

    /// A ray query failed to produce a forward boundary crossing.
    #[error("ray misses the body: {reason}")]
    RayMisses { reason: String },

    /// A point handed to a boundary query is too far from the boundary.
    #[error("point is not on the boundary: gap {gap:.3e}")]
    NotOnBoundary { gap: f64 },

    /// Phase point too close to tangency for finite differencing.
    #[error("degenerate phase point: |p| = {p_abs:.6} too close to 1")]
    DegeneratePhase { p_abs: f64 },

    /// Leading quadratic coefficient vanishes; the linear root is attached
    /// when the linear term survives.
    #[error("degenerate quadratic: |A| = {a_abs:.3e} < 1e-14 (linear root {linear_root:?})")]
    DegenerateQuadratic { a_abs: f64, linear_root: Option<f64> },

    /// Geodesic integration step leaves the frame orthonormality budget.
    #[error("integration step too large: orthonormality drift {drift:.3e} > {limit:.1e}")]
    StepTooLarge { drift: f64, limit: f64 },

    /// Catch-all for invalid arguments with a field-level message.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
