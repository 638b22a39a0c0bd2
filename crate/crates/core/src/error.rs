use crate::geometry::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no grid node lies in the ball centered at {center:?} with radius {radius}")]
    EmptyBall { center: Point, radius: f64 },

    #[error("negative weight {value} at node {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weight is not strictly positive at node {index} (value {value})")]
    ZeroWeightNode { index: usize, value: f64 },

    #[error("annulus around {center:?} with inner radius {radius} contains no grid node")]
    UnresolvedAnnulus { center: Point, radius: f64 },

    #[error("critical radius is not positive at {point:?} (value {value})")]
    NonPositiveRho { point: Point, value: f64 },

    #[error("no (C0, k0) lattice point fits; worst pair {x:?} / {y:?} needs C0 = {required_c0}")]
    NoFit { x: Point, y: Point, required_c0: f64 },

    #[error("mu(B(x, r)) / r^(d-2) never crosses 1 in [{r_min}, {r_max}] at {point:?}")]
    NoBracket { point: Point, r_min: f64, r_max: f64 },

    #[error("no path between grid nodes {from} and {to}")]
    Disconnected { from: usize, to: usize },

    #[error("growth conditions cannot be certified: {reason} (worst triple x={x:?}, r={r}, R={big_r})")]
    CannotCertify { reason: String, x: Point, r: f64, big_r: f64 },

    #[error("excluded singular shell contributes {fraction:.3} of the integral (limit 0.1)")]
    SingularityUnresolved { fraction: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("the ball family is empty")]
    EmptyFamily,

    #[error("ball B(0, {radius}) does not fit in the box of half-width {half_width}")]
    DomainTooSmall { radius: f64, half_width: f64 },

    #[error("no reverse Hölder exponent on the lattice gives a finite constant")]
    NoEta,

    #[error("parameter relation violated: {0}")]
    ParameterRelationViolated(String),

    #[error("operator norm estimate is zero")]
    NormEstimateZero,

    #[error("weight out of range: {0}")]
    WeightOutOfRange(String),

    #[error("points coincide: {0:?}")]
    CoincidentPoints(Point),

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("quadrature failed: estimated remainder {remainder:e} for value {value:e}")]
    QuadratureFailure { value: f64, remainder: f64 },

    #[error("kernel bound violated at x={x:?}, y={y:?}: {detail}")]
    ViolationWitness { x: Point, y: Point, detail: String },

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error("malformed kernel table: {0}")]
    KernelTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
