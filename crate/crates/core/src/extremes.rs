//! Distribution functions of the running extremes of noncolliding
//! ensembles: the joint minimum/maximum law of the pinned-bridge and
//! free-end systems, the height law of the positive systems, the
//! general-endpoint ratio formulas, the width law, reference eigenvalue
//! densities, and the single-particle height moments.
//!
//! Everything is a pure function; grid sweeps may fan the calls out across
//! threads freely.

use std::sync::Once;

use crate::kernels::{
    self, Chamber, IntervalGeometry, KernelKind, OrderedConfiguration,
};
use crate::matalg::{self, AntisymmetricMatrix, SquareMatrix};
use crate::quad;
use crate::specfun::{ln_gamma, riemann_xi, theta};
use crate::{Error, Real, Result, Tolerance};

/// Largest particle count accepted by the closed theorem formulas.
pub const MAX_PARTICLES: usize = 10;
/// Largest particle count for the free-end ratio formulas, whose chamber
/// integral is evaluated by quadrature.
pub const MAX_CHAMBER_INTEGRAL: usize = 3;

/// Which conditioned ensemble a distribution refers to.
///
/// The four unit variants are the origin-limit processes; the `*Between` /
/// `*From` variants carry explicit endpoint configurations and are evaluated
/// through the exact restricted-kernel ratio formulas.
#[derive(Clone, Debug)]
pub enum ProcessKind<R> {
    /// Ordered ensemble pinned at the origin at both ends.
    Bridge,
    /// Ordered ensemble started at the origin, free right end.
    Motion,
    /// Positive ordered ensemble pinned at the origin at both ends.
    BesselBridge,
    /// Positive ordered ensemble started at the origin, free right end.
    Meander,
    /// Ordered ensemble pinned at `start` and `end`.
    BridgeBetween {
        start: OrderedConfiguration<R>,
        end: OrderedConfiguration<R>,
    },
    /// Ordered ensemble from `start` with a free right end.
    MotionFrom { start: OrderedConfiguration<R> },
    /// Positive ensemble pinned at `start` and `end`.
    BesselBetween {
        start: OrderedConfiguration<R>,
        end: OrderedConfiguration<R>,
    },
    /// Positive ensemble from `start` with a free right end.
    MeanderFrom { start: OrderedConfiguration<R> },
}

impl<R: Real> ProcessKind<R> {
    /// Chamber the ensemble lives in.
    pub fn chamber(&self) -> Chamber {
        match self {
            ProcessKind::Bridge
            | ProcessKind::Motion
            | ProcessKind::BridgeBetween { .. }
            | ProcessKind::MotionFrom { .. } => Chamber::TypeA,
            _ => Chamber::TypeC,
        }
    }

    pub fn is_pinned(&self) -> bool {
        matches!(
            self,
            ProcessKind::Bridge
                | ProcessKind::BesselBridge
                | ProcessKind::BridgeBetween { .. }
                | ProcessKind::BesselBetween { .. }
        )
    }
}

/// Assembly metadata attached to a distribution value.
#[derive(Clone, Copy, Debug)]
pub struct CdfParams<R> {
    pub n: usize,
    pub t: R,
    pub geometry: IntervalGeometry<R>,
}

/// A probability with its unclamped raw value and an error estimate
/// propagated from series tails and quadrature.
#[derive(Clone, Copy, Debug)]
pub struct CdfEvaluation<R> {
    pub value: R,
    pub raw: R,
    pub error_estimate: R,
    pub params: CdfParams<R>,
}

/// Clamps `raw` into `[0, 1]`; a raw value outside the range by more than
/// `1e-6` plus the error estimate means an assembly bug, not noise, and is
/// reported as an error.
fn assemble<R: Real>(raw: R, err: R, params: CdfParams<R>) -> Result<CdfEvaluation<R>> {
    if !raw.is_finite() {
        return Err(Error::CdfOutOfRange(raw.as_f64()));
    }
    let slack = R::of(1e-6) + err;
    if raw < -slack || raw > R::one() + slack {
        return Err(Error::CdfOutOfRange(raw.as_f64()));
    }
    Ok(CdfEvaluation {
        value: raw.max(R::zero()).min(R::one()),
        raw,
        error_estimate: err,
        params,
    })
}

fn check_particle_count(n: usize, limit: usize) -> Result<()> {
    if n == 0 || n > limit {
        return Err(Error::DimensionTooLarge { n, limit });
    }
    Ok(())
}

/// Standard deviation profile `sqrt(t (1 - t/T))` of a pinned path.
pub fn sigma_bridge<R: Real>(t: R, total: R) -> Result<R> {
    if !(total > R::zero()) {
        return Err(Error::NonPositiveTime(total.as_f64()));
    }
    if t < R::zero() || t > total {
        return Err(Error::OutOfWindow(t.as_f64(), total.as_f64()));
    }
    Ok((t * (R::one() - t / total)).sqrt())
}

/// Eigenvalue density of the Gaussian unitary ensemble at variance
/// `sigma2`, evaluated on an ordered configuration.
pub fn gue_density<R: Real>(x: &OrderedConfiguration<R>, sigma2: R) -> Result<R> {
    if !(sigma2 > R::zero()) {
        return Err(Error::Domain(format!(
            "variance must be positive, got {}",
            sigma2.as_f64()
        )));
    }
    if x.chamber() != Chamber::TypeA {
        return Err(Error::ChamberMismatch);
    }
    let n = x.len();
    let sigma = sigma2.sqrt();
    let nf = R::of_usize(n);
    let mut ln = -nf * nf * sigma.ln() - nf * R::half() * (R::two() * R::pi()).ln();
    for k in 1..=n {
        ln = ln - ln_gamma(R::of_usize(k));
    }
    let mut norm2 = R::zero();
    let mut vandermonde = R::one();
    let c = x.coords();
    for i in 0..n {
        norm2 = norm2 + c[i] * c[i];
        for j in (i + 1)..n {
            vandermonde = vandermonde * (c[j] - c[i]);
        }
    }
    Ok(ln.exp() * (-(norm2) / (R::two() * sigma2)).exp() * vandermonde * vandermonde)
}

/// Eigenvalue density of the positive (class C) Gaussian ensemble at
/// variance `sigma2`.
pub fn class_c_density<R: Real>(x: &OrderedConfiguration<R>, sigma2: R) -> Result<R> {
    if !(sigma2 > R::zero()) {
        return Err(Error::Domain(format!(
            "variance must be positive, got {}",
            sigma2.as_f64()
        )));
    }
    if x.chamber() != Chamber::TypeC {
        return Err(Error::ChamberMismatch);
    }
    let n = x.len();
    let sigma = sigma2.sqrt();
    let nf = R::of_usize(n);
    let mut ln = -nf * (R::two() * nf + R::one()) * sigma.ln()
        - nf * R::half() * (R::pi() * R::half()).ln();
    for k in 1..=n {
        ln = ln - ln_gamma(R::of_usize(2 * k));
    }
    let c = x.coords();
    let mut norm2 = R::zero();
    let mut squares = R::one();
    let mut vandermonde = R::one();
    for i in 0..n {
        norm2 = norm2 + c[i] * c[i];
        squares = squares * c[i] * c[i];
        for j in (i + 1)..n {
            let d = c[j] * c[j] - c[i] * c[i];
            vandermonde = vandermonde * d;
        }
    }
    Ok(ln.exp() * (-(norm2) / (R::two() * sigma2)).exp() * vandermonde * vandermonde * squares)
}

// ---------------------------------------------------------------------------
// determinant-route laws (pinned ensembles)
// ---------------------------------------------------------------------------

/// First-order relative perturbation bound `sum |M^{-1}_{ji}| d_{ij}` of a
/// determinant with entrywise error bounds `d`.
fn det_relative_error<R: Real>(m: &SquareMatrix<R>, entry_err: &SquareMatrix<R>) -> R {
    let n = m.dim();
    if let Some(inv) = matalg::invert(m) {
        let mut rel = R::zero();
        for i in 0..n {
            for j in 0..n {
                rel = rel + inv.get(j, i).abs() * entry_err.get(i, j);
            }
        }
        if rel.is_finite() {
            return rel + R::of_usize(n * n) * R::of(100.0) * R::epsilon();
        }
    }
    R::one() // singular to working precision: the value itself is noise
}

/// Crude log-space bound `ln(sum d_ij) + ln (n-1)! + (n-1) ln max|M|` on the
/// absolute determinant error, for the fully cancelled case.
fn det_absolute_error_ln<R: Real>(m: &SquareMatrix<R>, entry_err: &SquareMatrix<R>) -> R {
    let n = m.dim();
    let mut max_entry = R::zero();
    let mut err_sum = R::zero();
    for i in 0..n {
        for j in 0..n {
            max_entry = max_entry.max(m.get(i, j).abs());
            err_sum = err_sum + entry_err.get(i, j);
        }
    }
    err_sum.max(R::min_positive_value()).ln()
        + ln_gamma(R::of_usize(n))
        + R::of_usize(n - 1) * max_entry.max(R::min_positive_value()).ln()
}

fn bridge_raw<R: Real>(n: usize, t: R, ell: R, r: R, tol: Tolerance<R>) -> Result<(R, R)> {
    let sqrt2t = (R::two() * t).sqrt();
    let u = R::two() * (ell + r) / sqrt2t;
    let v0 = R::two() * ell / sqrt2t;
    let mut shifted = Vec::with_capacity(2 * n - 1);
    let mut centered = Vec::with_capacity(2 * n - 1);
    for k in 0..=(2 * n - 2) {
        shifted.push(theta(k, u, v0, tol)?);
        centered.push(theta(k, u, R::zero(), tol)?);
    }
    let m = SquareMatrix::from_fn(n, |i, j| {
        let k = i + j;
        let sign = if (j + 1) % 2 == 0 { R::one() } else { -R::one() };
        shifted[k].value + sign * centered[k].value
    });
    let entry_err = SquareMatrix::from_fn(n, |i, j| {
        let k = i + j;
        shifted[k].tail_bound + centered[k].tail_bound
    });

    let (sign_det, ln_det) = matalg::log_determinant(&m);
    let nf = R::of_usize(n);
    let mut ln_pref = nf * (nf - R::one()) * R::half() * R::of(std::f64::consts::LN_2);
    for k in 1..=n {
        ln_pref = ln_pref + ln_gamma(R::of_usize(k));
    }
    let sign_front = if n % 2 == 0 { R::one() } else { -R::one() };
    if sign_det == 0 {
        let ln_err = det_absolute_error_ln(&m, &entry_err);
        return Ok((R::zero(), (ln_err - ln_pref).exp()));
    }
    let raw = sign_front * R::of(sign_det as f64) * (ln_det - ln_pref).exp();
    let rel = det_relative_error(&m, &entry_err);
    Ok((raw, raw.abs() * rel + R::of_usize(n * n) * R::epsilon()))
}

fn bessel_raw<R: Real>(n: usize, t: R, h: R, tol: Tolerance<R>) -> Result<(R, R)> {
    let u = R::two() * h / (R::two() * t).sqrt();
    // theta indices 2(i+j-1) for 1-based i, j run over 2, 4, ..., 2(2n-1)
    let mut values = Vec::with_capacity(2 * n);
    for idx in 1..=(2 * n - 1) {
        values.push(theta(2 * idx, u, R::zero(), tol)?);
    }
    let m = SquareMatrix::from_fn(n, |i, j| values[i + j].value);
    let entry_err = SquareMatrix::from_fn(n, |i, j| values[i + j].tail_bound);

    let (sign_det, ln_det) = matalg::log_determinant(&m);
    let nf = R::of_usize(n);
    let mut ln_pref = nf * nf * R::of(std::f64::consts::LN_2);
    for k in 1..=n {
        ln_pref = ln_pref + ln_gamma(R::of_usize(2 * k));
    }
    let sign_front = if n % 2 == 0 { R::one() } else { -R::one() };
    if sign_det == 0 {
        let ln_err = det_absolute_error_ln(&m, &entry_err);
        return Ok((R::zero(), (ln_err - ln_pref).exp()));
    }
    let raw = sign_front * R::of(sign_det as f64) * (ln_det - ln_pref).exp();
    let rel = det_relative_error(&m, &entry_err);
    Ok((raw, raw.abs() * rel + R::of_usize(n * n) * R::epsilon()))
}

// ---------------------------------------------------------------------------
// pfaffian-route laws (free-end ensembles)
// ---------------------------------------------------------------------------

/// First-order relative perturbation bound of a pfaffian with entrywise
/// error bounds on the strict upper triangle.
fn pf_relative_error<R: Real>(a: &AntisymmetricMatrix<R>, entry_err: &SquareMatrix<R>) -> R {
    let n = a.dim();
    if let Some(inv) = matalg::invert(a.as_matrix()) {
        let mut rel = R::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                rel = rel + inv.get(i, j).abs() * entry_err.get(i, j);
            }
        }
        if rel.is_finite() {
            return rel + R::of_usize(n * n) * R::of(100.0) * R::epsilon();
        }
    }
    R::one()
}

/// Bordered pfaffian of pairwise ordered-simplex integrals `I_ij` and single
/// integrals `I_i` of a family of row functions, with its first-order error.
/// This integral-to-pfaffian reduction is shared by every free-end law.
fn de_bruijn_pfaffian<R: Real>(
    rows: &[Box<dyn Fn(R) -> R + '_>],
    lo: R,
    hi: R,
    quad_tol: R,
    bias_per_eval: R,
) -> Result<(R, R)> {
    let n = rows.len();
    let mut singles = Vec::with_capacity(n);
    let mut single_err = Vec::with_capacity(n);
    for z in rows {
        let q = quad::integrate_1d(|x| z(x), lo, hi, quad_tol)?;
        singles.push(q.value);
        single_err.push(q.error_estimate + (hi - lo) * bias_per_eval);
    }
    let mut pair = SquareMatrix::from_fn(n.max(1), |_, _| R::zero());
    let mut pair_err = SquareMatrix::from_fn(n.max(1), |_, _| R::zero());
    let area = (hi - lo) * (hi - lo) * R::half();
    for i in 0..n {
        for j in (i + 1)..n {
            let zi = &rows[i];
            let zj = &rows[j];
            let q = quad::integrate_ordered_2d(
                |x1, x2| zi(x1) * zj(x2) - zi(x2) * zj(x1),
                lo,
                hi,
                quad_tol,
            )?;
            pair.set(i, j, q.value);
            pair.set(j, i, -q.value);
            let e = q.error_estimate + area * bias_per_eval * R::of(4.0);
            pair_err.set(i, j, e);
            pair_err.set(j, i, e);
        }
    }
    let padded = matalg::pad_skew(&pair, &singles)?;
    let dim = padded.dim();
    let mut err = SquareMatrix::from_fn(dim, |_, _| R::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            err.set(i, j, pair_err.get(i, j));
        }
        if dim > n {
            err.set(i, n, single_err[i]);
        }
    }
    let pf = matalg::pfaffian(&padded)?;
    let rel = pf_relative_error(&padded, &err);
    Ok((pf, pf.abs() * rel))
}

fn motion_raw<R: Real>(n: usize, t: R, ell: R, r: R, tol: Tolerance<R>) -> Result<(R, R)> {
    let sqrt2t = (R::two() * t).sqrt();
    let u = R::two() * (ell + r) / sqrt2t;
    let v0 = R::two() * ell / sqrt2t;
    let lo = -ell / sqrt2t;
    let hi = r / sqrt2t;
    let rows: Vec<Box<dyn Fn(R) -> R>> = (1..=n)
        .map(|i| {
            let sign = if i % 2 == 0 { R::one() } else { -R::one() };
            let f: Box<dyn Fn(R) -> R> = Box::new(move |x: R| {
                let a = theta(i - 1, u, v0 + x, tol).expect("positive period");
                let b = theta(i - 1, u, x, tol).expect("positive period");
                a.value + sign * b.value
            });
            f
        })
        .collect();
    let (pf, pf_err) = de_bruijn_pfaffian(&rows, lo, hi, tol.value(), tol.value())?;

    let nf = R::of_usize(n);
    let mut ln_pref = nf * (nf - R::one()) / R::of(4.0) * R::of(std::f64::consts::LN_2);
    for k in 1..=n {
        ln_pref = ln_pref + ln_gamma(R::of_usize(k) * R::half());
    }
    let sign_front = if (n * (n + 1) / 2) % 2 == 0 {
        R::one()
    } else {
        -R::one()
    };
    let scale = (-ln_pref).exp();
    Ok((sign_front * pf * scale, pf_err * scale))
}

fn meander_raw<R: Real>(n: usize, t: R, h: R, tol: Tolerance<R>) -> Result<(R, R)> {
    let sqrt2t = (R::two() * t).sqrt();
    let u = R::two() * h / sqrt2t;
    let hi = h / sqrt2t;
    let rows: Vec<Box<dyn Fn(R) -> R>> = (1..=n)
        .map(|i| {
            let f: Box<dyn Fn(R) -> R> =
                Box::new(move |x: R| theta(2 * i - 1, u, x, tol).expect("positive period").value);
            f
        })
        .collect();
    let (pf, pf_err) = de_bruijn_pfaffian(&rows, R::zero(), hi, tol.value(), tol.value())?;

    let nf = R::of_usize(n);
    let mut ln_pref = nf * (nf - R::one()) * R::half() * R::of(std::f64::consts::LN_2);
    for k in 1..=n {
        ln_pref = ln_pref + ln_gamma(R::of_usize(k));
    }
    let scale = (-ln_pref).exp();
    Ok((pf * scale, pf_err * scale))
}

// ---------------------------------------------------------------------------
// public theorem-formula laws
// ---------------------------------------------------------------------------

/// One-time orientation check: the assembled laws must come out at 1 when
/// the walls are far away.  Catches any mismatch between the pfaffian or
/// determinant sign conventions and the closed-form prefactors.
fn sign_convention_check() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        let tol = Tolerance(1e-12_f64);
        for n in [1usize, 2] {
            let (b, _) = bridge_raw(n, 1.0, 8.0, 8.0, tol).expect("bridge check");
            assert!(
                (b - 1.0).abs() < 1e-8,
                "bridge law orientation broken at n={n}: {b}"
            );
            let (h, _) = bessel_raw(n, 1.0, 8.0, tol).expect("height check");
            assert!(
                (h - 1.0).abs() < 1e-8,
                "height law orientation broken at n={n}: {h}"
            );
        }
        let (m, _) = motion_raw(1, 1.0, 8.0, 8.0, tol).expect("motion check");
        assert!((m - 1.0).abs() < 1e-8, "free-end law orientation broken: {m}");
        let (w, _) = meander_raw(1, 1.0, 8.0, tol).expect("meander check");
        assert!(
            (w - 1.0).abs() < 1e-8,
            "positive free-end law orientation broken: {w}"
        );
    });
}

/// Joint law `P(-ell < L, R < r)` of the running minimum and maximum of the
/// pinned bridge ensemble, as a determinant of Hermite-theta values.
pub fn cdf_bridge_joint_lr<R: Real>(
    n: usize,
    t: R,
    ell: R,
    r: R,
    tol: Tolerance<R>,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(ell > R::zero()) || !(r > R::zero()) {
        return Err(Error::Domain(
            "both interval arms must be positive".to_string(),
        ));
    }
    sign_convention_check();
    let (raw, err) = bridge_raw(n, t, ell, r, tol)?;
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: IntervalGeometry::new(-ell, r, t)?,
        },
    )
}

/// Joint law `P(-ell < L, R < r)` for the free-end ensemble, as a bordered
/// pfaffian of integrated theta rows.
pub fn cdf_motion_joint_lr<R: Real>(
    n: usize,
    t: R,
    ell: R,
    r: R,
    tol: Tolerance<R>,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(ell > R::zero()) || !(r > R::zero()) {
        return Err(Error::Domain(
            "both interval arms must be positive".to_string(),
        ));
    }
    sign_convention_check();
    let (raw, err) = motion_raw(n, t, ell, r, tol)?;
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: IntervalGeometry::new(-ell, r, t)?,
        },
    )
}

/// Height law `P(H < h)` of the positive pinned ensemble, as a determinant
/// of even-index theta values.
pub fn cdf_bessel_h<R: Real>(
    n: usize,
    t: R,
    h: R,
    tol: Tolerance<R>,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(h > R::zero()) {
        return Err(Error::Domain("height bound must be positive".to_string()));
    }
    sign_convention_check();
    let (raw, err) = bessel_raw(n, t, h, tol)?;
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: IntervalGeometry::new(R::zero(), h, t)?,
        },
    )
}

/// Height law `P(H < h)` of the positive free-end ensemble, as a bordered
/// pfaffian of integrated odd-index theta rows.
pub fn cdf_meander_h<R: Real>(
    n: usize,
    t: R,
    h: R,
    tol: Tolerance<R>,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(h > R::zero()) {
        return Err(Error::Domain("height bound must be positive".to_string()));
    }
    sign_convention_check();
    let (raw, err) = meander_raw(n, t, h, tol)?;
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: IntervalGeometry::new(R::zero(), h, t)?,
        },
    )
}

// ---------------------------------------------------------------------------
// general-endpoint ratio formulas
// ---------------------------------------------------------------------------

fn require_inside<R: Real>(
    cfg: &OrderedConfiguration<R>,
    geom: &IntervalGeometry<R>,
) -> Result<()> {
    for &c in cfg.coords() {
        if !(c > geom.left) || !(c < geom.right) {
            return Err(Error::OutOfInterval(
                c.as_f64(),
                geom.left.as_f64(),
                geom.right.as_f64(),
            ));
        }
    }
    Ok(())
}

fn require_wall_at_origin<R: Real>(geometry: &IntervalGeometry<R>) -> Result<()> {
    if geometry.left != R::zero() {
        return Err(Error::Domain(
            "positive-chamber laws need the lower wall at the origin".to_string(),
        ));
    }
    Ok(())
}

/// Exit law of an ensemble with explicit endpoints, or the origin-limit laws
/// when a limit variant is passed.
///
/// Pinned variants evaluate the restricted-over-free determinant ratio; the
/// free-end variants integrate the restricted determinant over the ordered
/// chamber (through the bordered-pfaffian reduction of the ordered-simplex
/// integral) and divide by the survival pfaffian.  Free-end variants accept
/// `n <= 3`.
pub fn cdf_general<R: Real>(
    kind: &ProcessKind<R>,
    geometry: &IntervalGeometry<R>,
    n: usize,
    tol: Tolerance<R>,
) -> Result<CdfEvaluation<R>> {
    let t = geometry.duration;
    match kind {
        ProcessKind::Bridge => cdf_bridge_joint_lr(n, t, -geometry.left, geometry.right, tol),
        ProcessKind::Motion => cdf_motion_joint_lr(n, t, -geometry.left, geometry.right, tol),
        ProcessKind::BesselBridge => {
            require_wall_at_origin(geometry)?;
            cdf_bessel_h(n, t, geometry.right, tol)
        }
        ProcessKind::Meander => {
            require_wall_at_origin(geometry)?;
            cdf_meander_h(n, t, geometry.right, tol)
        }
        ProcessKind::BridgeBetween { start, end } => {
            ratio_pinned(start, end, geometry, n, KernelKind::Free)
        }
        ProcessKind::BesselBetween { start, end } => {
            require_wall_at_origin(geometry)?;
            ratio_pinned(start, end, geometry, n, KernelKind::WallAtOrigin)
        }
        ProcessKind::MotionFrom { start } => ratio_free_end(start, geometry, n, tol, false),
        ProcessKind::MeanderFrom { start } => {
            require_wall_at_origin(geometry)?;
            ratio_free_end(start, geometry, n, tol, true)
        }
    }
}

/// Pinned-endpoint ratio: restricted Karlin–McGregor determinant over the
/// free one.
fn ratio_pinned<R: Real>(
    start: &OrderedConfiguration<R>,
    end: &OrderedConfiguration<R>,
    geometry: &IntervalGeometry<R>,
    n: usize,
    free_kernel: KernelKind<R>,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if start.len() != n || end.len() != n {
        return Err(Error::ChamberMismatch);
    }
    require_inside(start, geometry)?;
    require_inside(end, geometry)?;
    let t = geometry.duration;
    let restricted = KernelKind::Interval {
        left: geometry.left,
        right: geometry.right,
    };
    let (s_num, ln_num) = kernels::km_log_determinant(t, end, start, &restricted)?;
    let (s_den, ln_den) = kernels::km_log_determinant(t, end, start, &free_kernel)?;
    if s_den == 0 {
        return Err(Error::CdfOutOfRange(f64::NAN));
    }
    let raw = if s_num == 0 {
        R::zero()
    } else {
        R::of((s_num * s_den) as f64) * (ln_num - ln_den).exp()
    };
    // the two determinants share the cancellation structure of the endpoint
    // separations; what remains is elimination rounding plus series cutoffs
    let err = raw.abs() * R::of_usize(n * n * n) * R::epsilon() * R::of(1e2) + R::of(1e-13);
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: *geometry,
        },
    )
}

/// Free-right-end ratio: ordered-chamber integral of the restricted
/// determinant over the survival probability of the start configuration.
fn ratio_free_end<R: Real>(
    start: &OrderedConfiguration<R>,
    geometry: &IntervalGeometry<R>,
    n: usize,
    tol: Tolerance<R>,
    positive: bool,
) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_CHAMBER_INTEGRAL)?;
    if start.len() != n {
        return Err(Error::ChamberMismatch);
    }
    require_inside(start, geometry)?;
    let t = geometry.duration;
    let geom = IntervalGeometry::new(geometry.left, geometry.right, t)?;
    let margin = R::of(1e-12) * geom.width();
    let lo = geom.left + margin;
    let hi = geom.right - margin;
    let starts = start.coords().to_vec();
    let rows: Vec<Box<dyn Fn(R) -> R>> = starts
        .iter()
        .map(|&a| {
            let f: Box<dyn Fn(R) -> R> = Box::new(move |b: R| {
                kernels::absorbing_interval(t, b, a, &geom).expect("interior point")
            });
            f
        })
        .collect();
    let quad_tol = tol.value().max(R::of(1e-13));
    let (num, num_err) = de_bruijn_pfaffian(&rows, lo, hi, quad_tol, R::of(1e-15))?;
    let den = if positive {
        kernels::survival_c(t, start)?
    } else {
        kernels::survival_a(t, start)?
    };
    if den <= R::zero() {
        return Err(Error::CdfOutOfRange(f64::NAN));
    }
    let raw = num / den;
    let err = num_err / den + R::of(1e-12);
    assemble(
        raw,
        err,
        CdfParams {
            n,
            t,
            geometry: *geometry,
        },
    )
}

// ---------------------------------------------------------------------------
// width law
// ---------------------------------------------------------------------------

/// Partial derivative of the bridge joint law in its lower arm, by central
/// differences with two Richardson stages; the step starts at `1e-3 sqrt(T)`
/// and shrinks near the domain edge.
fn bridge_joint_dl<R: Real>(n: usize, t: R, ell: R, r: R, tol: Tolerance<R>) -> Result<(R, R)> {
    let h0 = R::of(1e-3) * t.sqrt();
    let h = h0.min(ell * R::of(0.45));
    let f = |l: R| -> Result<R> { Ok(bridge_raw(n, t, l, r, tol)?.0) };
    let d = |step: R| -> Result<R> { Ok((f(ell + step)? - f(ell - step)?) / (R::two() * step)) };
    let d1 = d(h)?;
    let d2 = d(h * R::half())?;
    let d4 = d(h * R::of(0.25))?;
    let four = R::of(4.0);
    let r1 = (four * d2 - d1) / R::of(3.0);
    let r2 = (four * d4 - d2) / R::of(3.0);
    let rich = (R::of(16.0) * r2 - r1) / R::of(15.0);
    let err = (rich - r2).abs() + R::of(1e-12) / h;
    Ok((rich, err))
}

/// Width law `P(R - L < w)` of the pinned bridge ensemble, integrating the
/// lower-arm derivative of the joint law along the anti-diagonal
/// `ell + r = w`.
pub fn cdf_width<R: Real>(n: usize, t: R, w: R, tol: Tolerance<R>) -> Result<CdfEvaluation<R>> {
    check_particle_count(n, MAX_PARTICLES)?;
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    if !(w > R::zero()) {
        return Err(Error::Domain("width bound must be positive".to_string()));
    }
    sign_convention_check();
    let stencil_tol = 1e-6_f64;
    let worst = std::sync::atomic::AtomicU64::new(0);
    let integrand = |l: R| -> R {
        let (v, e) = bridge_joint_dl(n, t, l, w - l, tol).unwrap_or((R::zero(), R::one()));
        let bits = e.as_f64().to_bits();
        worst.fetch_max(bits, std::sync::atomic::Ordering::Relaxed);
        v
    };
    let quad_tol = tol.value().max(R::of(1e-8)) * w.max(R::one());
    let q = quad::integrate_1d_lenient(integrand, R::zero(), w, quad_tol);
    let worst_err = f64::from_bits(worst.load(std::sync::atomic::Ordering::Relaxed));
    if worst_err > stencil_tol {
        return Err(Error::ToleranceNotMet {
            tol: stencil_tol,
            estimate: worst_err,
            panels: 0,
        });
    }
    let err = q.error_estimate + R::of(worst_err) * w;
    assemble(
        q.value,
        err,
        CdfParams {
            n,
            t,
            geometry: IntervalGeometry::new(R::zero(), w, t)?,
        },
    )
}

// ---------------------------------------------------------------------------
// single-particle height moments
// ---------------------------------------------------------------------------

/// Closed-form moment `E[H^m] = 2 (pi T / 2)^{m/2} xi(m)` of the height of
/// the single positive pinned path.
pub fn height_moment_n1<R: Real>(m: R, t: R) -> Result<R> {
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    let xi = riemann_xi(m)?;
    Ok(R::two() * (R::pi() * t * R::half()).powf(m * R::half()) * xi)
}

/// The same moment by Stieltjes integration of the height law,
/// `int m h^{m-1} (1 - F(h)) dh`; the independent route used to cross-check
/// [`height_moment_n1`].
pub fn height_moment_n1_from_cdf<R: Real>(m: R, t: R, tol: Tolerance<R>) -> Result<R> {
    if !(m > R::one()) {
        return Err(Error::Domain(format!(
            "moment order must exceed 1, got {}",
            m.as_f64()
        )));
    }
    if !(t > R::zero()) {
        return Err(Error::NonPositiveTime(t.as_f64()));
    }
    let hi = R::of(8.5) * t.sqrt();
    let q = quad::integrate_1d(
        |h: R| {
            let f = cdf_bessel_h(1, t, h.max(R::of(1e-8) * t.sqrt()), tol)
                .map(|e| e.value)
                .unwrap_or(R::zero());
            m * h.powf(m - R::one()) * (R::one() - f)
        },
        R::zero(),
        hi,
        R::of(1e-9) * (R::one() + t.powf(m * R::half())),
    )?;
    Ok(q.value)
}
