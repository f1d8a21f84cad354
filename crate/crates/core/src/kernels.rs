//! Transition kernels and Karlin–McGregor determinants: the free heat
//! kernel, half-line and interval absorbing kernels, ordered-configuration
//! determinants, and the survival pfaffians of ordered systems.

use crate::matalg::{self, SquareMatrix};
use crate::specfun::{psi, psi2};
use crate::{Error, Real, Result};

/// Which ordered region a configuration lives in: plain ordering (`TypeA`)
/// or ordering with all coordinates positive (`TypeC`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chamber {
    TypeA,
    TypeC,
}

/// Strictly increasing coordinate vector tagged with its chamber.
#[derive(Clone, Debug)]
pub struct OrderedConfiguration<R> {
    chamber: Chamber,
    coords: Vec<R>,
}

impl<R: Real> OrderedConfiguration<R> {
    pub fn type_a(coords: Vec<R>) -> Result<Self> {
        Self::new(Chamber::TypeA, coords)
    }

    pub fn type_c(coords: Vec<R>) -> Result<Self> {
        Self::new(Chamber::TypeC, coords)
    }

    pub fn new(chamber: Chamber, coords: Vec<R>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::NotOrdered(" (empty configuration)"));
        }
        if coords.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::NotOrdered(""));
        }
        if chamber == Chamber::TypeC && !(coords[0] > R::zero()) {
            return Err(Error::NotOrdered(" and positive for a walled chamber"));
        }
        Ok(OrderedConfiguration { chamber, coords })
    }

    pub fn chamber(&self) -> Chamber {
        self.chamber
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self) -> &[R] {
        &self.coords
    }

    /// Diffusive rescaling `x -> x / sqrt(2s)`, used by the survival
    /// pfaffians.
    pub fn scaled(&self, s: R) -> Vec<R> {
        let denom = (R::two() * s).sqrt();
        self.coords.iter().map(|&x| x / denom).collect()
    }
}

/// An absorbing interval `(left, right)` together with the window length of
/// the process it constrains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalGeometry<R> {
    pub left: R,
    pub right: R,
    pub duration: R,
}

impl<R: Real> IntervalGeometry<R> {
    pub fn new(left: R, right: R, duration: R) -> Result<Self> {
        if !(left < right) {
            return Err(Error::Domain(format!(
                "interval must have left < right, got ({}, {})",
                left.as_f64(),
                right.as_f64()
            )));
        }
        if !(duration > R::zero()) {
            return Err(Error::NonPositiveTime(duration.as_f64()));
        }
        Ok(IntervalGeometry {
            left,
            right,
            duration,
        })
    }

    pub fn width(&self) -> R {
        self.right - self.left
    }
}

/// One-particle kernel selector for [`km_determinant`].
#[derive(Clone, Copy, Debug)]
pub enum KernelKind<R> {
    /// Free heat kernel on the line.
    Free,
    /// Absorbing wall at the origin (positive half-line).
    WallAtOrigin,
    /// Absorbing wall above, at `position`.
    WallAbove { position: R },
    /// Two absorbing walls.
    Interval { left: R, right: R },
}

/// Gaussian transition density `exp(-(x-y)^2/(2t)) / sqrt(2 pi t)`.
pub fn heat_kernel<R: Real>(t: R, y: R, x: R) -> Result<R> {
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    let d = x - y;
    Ok((-(d * d) / (R::two() * t)).exp() / (R::two() * R::pi() * t).sqrt())
}

/// Absorbed-at-the-origin transition density `p(t,y|x) - p(t,y|-x)` for
/// `x, y > 0`.
pub fn absorbing_halfline<R: Real>(t: R, y: R, x: R) -> Result<R> {
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(x > R::zero()) || !(y > R::zero()) {
        return Err(Error::Domain(format!(
            "half-line kernel needs positive endpoints, got x={} y={}",
            x.as_f64(),
            y.as_f64()
        )));
    }
    let v = heat_kernel(t, y, x)? - heat_kernel(t, y, -x)?;
    Ok(v.max(R::zero()))
}

/// Reflection of the half-line kernel: absorbing wall above at `b`, for
/// `x, y < b`.
fn absorbing_above<R: Real>(t: R, y: R, x: R, b: R) -> Result<R> {
    if !(x < b) || !(y < b) {
        return Err(Error::OutOfInterval(
            x.max(y).as_f64(),
            f64::NEG_INFINITY,
            b.as_f64(),
        ));
    }
    let v = heat_kernel(t, y, x)? - heat_kernel(t, y, R::two() * b - x)?;
    Ok(v.max(R::zero()))
}

/// Transition density between two absorbing walls, by whichever of the two
/// classical series converges faster at this `t`: the spectral sine series
/// for `t >= t* = width^2/pi^2`, the method-of-images reflection series
/// below.  Both are truncated far past machine precision; each serves as
/// the other's oracle in the tests.
pub fn absorbing_interval<R: Real>(
    t: R,
    y: R,
    x: R,
    geom: &IntervalGeometry<R>,
) -> Result<R> {
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    for &p in &[x, y] {
        if !(p > geom.left) || !(p < geom.right) {
            return Err(Error::OutOfInterval(
                p.as_f64(),
                geom.left.as_f64(),
                geom.right.as_f64(),
            ));
        }
    }
    let w = geom.width();
    let t_star = w * w / (R::pi() * R::pi());
    let v = if t >= t_star {
        interval_spectral(t, y, x, geom.left, w)
    } else {
        interval_images(t, y, x, geom.left, w)
    };
    Ok(v.max(R::zero()))
}

/// Spectral branch, exposed for the dual-representation tests.
pub fn interval_spectral<R: Real>(t: R, y: R, x: R, left: R, w: R) -> R {
    let decay = R::pi() * R::pi() * t / (R::two() * w * w);
    // e^{-decay n^2} below 1e-20 relative to the 2/w prefactor ends the sum
    let n_max = ((R::of(46.0) / decay).sqrt().as_f64().ceil() as usize).max(3);
    let fx = R::pi() * (x - left) / w;
    let fy = R::pi() * (y - left) / w;
    let mut sum = R::zero();
    for n in (1..=n_max).rev() {
        let nf = R::of_usize(n);
        sum = sum + (-(decay * nf * nf)).exp() * (fx * nf).sin() * (fy * nf).sin();
    }
    R::two() / w * sum
}

/// Method-of-images branch: alternating reflections in both walls.
pub fn interval_images<R: Real>(t: R, y: R, x: R, left: R, w: R) -> R {
    let phi = |z: R| (-(z * z) / (R::two() * t)).exp() / (R::two() * R::pi() * t).sqrt();
    // images live at x + 2nw and 2*left - x + 2nw; Gaussian reach sqrt(2t * 46)
    let reach = (R::of(92.0) * t).sqrt() + (x - y).abs() + w;
    let n_max = ((reach / (R::two() * w)).as_f64().ceil() as i64).max(1) + 1;
    let mut sum = R::zero();
    for n in -n_max..=n_max {
        let shift = R::two() * R::of(n as f64) * w;
        sum = sum + phi(y - x - shift) - phi(y + x - R::two() * left - shift);
    }
    sum
}

fn eval_kernel<R: Real>(kind: &KernelKind<R>, t: R, y: R, x: R) -> Result<R> {
    match kind {
        KernelKind::Free => heat_kernel(t, y, x),
        KernelKind::WallAtOrigin => absorbing_halfline(t, y, x),
        KernelKind::WallAbove { position } => absorbing_above(t, y, x, *position),
        KernelKind::Interval { left, right } => {
            let geom = IntervalGeometry::new(*left, *right, t)?;
            absorbing_interval(t, y, x, &geom)
        }
    }
}

/// Karlin–McGregor determinant `det[k(t, to_i | from_j)]` for two
/// same-chamber configurations.  Nonnegative when both configurations are
/// ordered (asserted in debug builds with a `-1e-13` slack).
pub fn km_determinant<R: Real>(
    t: R,
    to: &OrderedConfiguration<R>,
    from: &OrderedConfiguration<R>,
    kernel: &KernelKind<R>,
) -> Result<R> {
    let (sign, ln) = km_log_determinant(t, to, from, kernel)?;
    if sign == 0 {
        return Ok(R::zero());
    }
    let v = R::of(sign as f64) * ln.exp();
    debug_assert!(
        v >= -R::of(1e-13),
        "ordered-configuration determinant should be nonnegative, got {v:?}"
    );
    Ok(v)
}

/// `(sign, ln |det|)` variant, for ratios of nearly degenerate
/// determinants.
pub fn km_log_determinant<R: Real>(
    t: R,
    to: &OrderedConfiguration<R>,
    from: &OrderedConfiguration<R>,
    kernel: &KernelKind<R>,
) -> Result<(i8, R)> {
    if to.chamber() != from.chamber() || to.len() != from.len() {
        return Err(Error::ChamberMismatch);
    }
    let n = to.len();
    let mut entries = Vec::with_capacity(n * n);
    for &yi in to.coords() {
        for &xj in from.coords() {
            entries.push(eval_kernel(kernel, t, yi, xj)?);
        }
    }
    let m = SquareMatrix::from_fn(n, |i, j| entries[i * n + j]);
    Ok(matalg::log_determinant(&m))
}

/// Probability that an ordered free ensemble started at `x` is still ordered
/// at time `s`: the pfaffian of the error-function difference matrix with a
/// unit border when the particle count is odd.
pub fn survival_a<R: Real>(s: R, x: &OrderedConfiguration<R>) -> Result<R> {
    if !(s > R::zero()) {
        return Err(Error::NonPositiveTime(s.as_f64()));
    }
    if x.chamber() != Chamber::TypeA {
        return Err(Error::ChamberMismatch);
    }
    let y = x.scaled(s);
    let n = x.len();
    let core = SquareMatrix::from_fn(n, |i, j| psi(y[j] - y[i]));
    let padded = matalg::pad_skew(&core, &vec![R::one(); n])?;
    let pf = matalg::pfaffian(&padded)?;
    debug_assert!(pf >= -R::of(1e-13) && pf <= R::one() + R::of(1e-13));
    Ok(pf.max(R::zero()).min(R::one()))
}

/// Survival probability of the ordered positive ensemble: pfaffian with the
/// two-argument error integral core and single-argument border.
pub fn survival_c<R: Real>(s: R, x: &OrderedConfiguration<R>) -> Result<R> {
    if !(s > R::zero()) {
        return Err(Error::NonPositiveTime(s.as_f64()));
    }
    if x.chamber() != Chamber::TypeC {
        return Err(Error::ChamberMismatch);
    }
    let y = x.scaled(s);
    let n = x.len();
    let mut core = SquareMatrix::from_fn(n, |_, _| R::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = psi2(y[i], y[j]);
            core.set(i, j, v);
            core.set(j, i, -v);
        }
    }
    let border: Vec<R> = y.iter().map(|&u| psi(u)).collect();
    let padded = matalg::pad_skew(&core, &border)?;
    let pf = matalg::pfaffian(&padded)?;
    debug_assert!(pf >= -R::of(1e-13) && pf <= R::one() + R::of(1e-13));
    Ok(pf.max(R::zero()).min(R::one()))
}
