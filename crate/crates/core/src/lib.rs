//! Extreme-value laws of noncolliding diffusion ensembles.
//!
//! Four families of one-dimensional diffusion systems conditioned to stay
//! ordered over a finite window `[0, T]` are covered: the bridge ensemble
//! (pinned at the origin at both ends), the free-end motion ensemble, the
//! positive bridge ensemble (pinned and reflected-wall positive), and the
//! positive free-end (meander) ensemble.  The running minimum `L`, maximum
//! `R`, width `W = R - L`, and height `H` of these systems have exact
//! distribution functions built from Hermite-weighted theta series,
//! determinants, and pfaffians; this crate evaluates them and also provides
//! an independent Monte Carlo rejection sampler for validation.
//!
//! Modules mirror the layering of the computation:
//!
//! * [`specfun`] — Hermite polynomials, Hermite-theta lattice sums, error
//!   function integrals, Riemann xi.
//! * [`matalg`] — dense determinants and pfaffians of the small matrices the
//!   distribution formulas assemble.
//! * [`quad`] — adaptive Gauss–Kronrod quadrature on intervals and the
//!   ordered 2-simplex.
//! * [`kernels`] — heat kernels with absorbing walls, Karlin–McGregor
//!   determinants, and survival pfaffians.
//! * [`extremes`] — the distribution functions themselves.
//! * [`mc_oracle`] — rejection-sampled empirical CDFs with confidence bands.
//! * [`reference`] — brute-force reference implementations used by the test
//!   suites and the `self-test` command; independent of the fast paths.
//!
//! All numerical code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases for the main value types are exported at the crate
//! root.

pub mod extremes;
pub mod kernels;
pub mod matalg;
pub mod mc_oracle;
pub mod quad;
pub mod reference;
pub mod specfun;

mod real;

pub use real::Real;

/// Absolute tolerance shared by series summation and quadrature.
///
/// Defaults to `1e-12`; every operation that truncates a series or subdivides
/// an integral accepts one of these so callers can trade accuracy for speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<R>(pub R);

impl<R: Real> Default for Tolerance<R> {
    fn default() -> Self {
        Tolerance(R::of(1e-12))
    }
}

impl<R: Real> Tolerance<R> {
    pub fn new(tol: R) -> Self {
        assert!(tol > R::zero(), "tolerance must be positive");
        Tolerance(tol)
    }

    pub fn value(self) -> R {
        self.0
    }
}

/// Errors shared across the crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("series period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("argument outside the function domain: {0}")]
    Domain(String),
    #[error("pfaffian needs even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric (relative deviation {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("quadrature stalled at error {estimate:.3e} (tolerance {tol:.3e}, {panels} panels)")]
    ToleranceNotMet {
        tol: f64,
        estimate: f64,
        panels: usize,
    },
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("point {0} lies on or outside the absorbing interval ({1}, {2})")]
    OutOfInterval(f64, f64, f64),
    #[error("configurations have mismatched chambers or sizes")]
    ChamberMismatch,
    #[error("time {0} outside the window [0, {1}]")]
    OutOfWindow(f64, f64),
    #[error("operation supports N <= {limit}, got {n}")]
    DimensionTooLarge { n: usize, limit: usize },
    #[error("acceptance rate {rate:.3e} below 1e-6 after {attempts} attempts")]
    AcceptanceTooLow { rate: f64, attempts: u64 },
    #[error("statistic {0} is undefined for this ensemble")]
    StatisticUndefined(&'static str),
    #[error("assembled distribution value {0:.6e} lies outside the plausible range")]
    CdfOutOfRange(f64),
    #[error("coordinates must be strictly increasing{0}")]
    NotOrdered(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use extremes::{CdfEvaluation, CdfParams, ProcessKind};
pub use kernels::{Chamber, IntervalGeometry, KernelKind, OrderedConfiguration};
pub use matalg::{AntisymmetricMatrix, SquareMatrix};
pub use mc_oracle::{EmpiricalCdf, McConfig, PathEnsemble, Statistic};
pub use quad::QuadResult;
pub use specfun::SeriesValue;

/// Concrete `f64` aliases for the main value types.
pub type SeriesValue64 = specfun::SeriesValue<f64>;
pub type QuadResult64 = quad::QuadResult<f64>;
pub type OrderedConfiguration64 = kernels::OrderedConfiguration<f64>;
pub type IntervalGeometry64 = kernels::IntervalGeometry<f64>;
pub type CdfEvaluation64 = extremes::CdfEvaluation<f64>;
pub type ProcessKind64 = extremes::ProcessKind<f64>;
pub type Tolerance64 = Tolerance<f64>;

/// Concrete `f32` aliases; the algorithms run unchanged at single precision
/// with correspondingly looser attainable tolerances.
pub type SeriesValue32 = specfun::SeriesValue<f32>;
pub type QuadResult32 = quad::QuadResult<f32>;
pub type Tolerance32 = Tolerance<f32>;
