//! Brute-force reference implementations used by the test suites and the
//! `self-test` command.  These deliberately avoid the fast paths: direct
//! factorial sums, wide fixed summation windows, cofactor expansion, pairing
//! enumeration, and dense Riemann grids.  Slow and simple on purpose.

use crate::matalg::{AntisymmetricMatrix, SquareMatrix};
use crate::Real;

/// Hermite polynomial through the explicit factorial sum
/// `k! sum_m (-1)^m (2x)^{k-2m} / (m! (k-2m)!)`.
pub fn hermite_factorial_sum(k: usize, x: f64) -> f64 {
    let fact = |n: usize| -> f64 {
        (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
    };
    let mut sum = 0.0;
    for m in 0..=(k / 2) {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (2.0 * x).powi((k - 2 * m) as i32) / (fact(m) * fact(k - 2 * m));
    }
    fact(k) * sum
}

/// Hermite-theta sum over a fixed wide window `|n| <= window`, compensated
/// (Kahan) accumulation.
pub fn theta_direct(k: usize, u: f64, v: f64, window: i64) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for n in -window..=window {
        let x = u * n as f64 + v;
        let term = hermite_factorial_term(k, x);
        let y = term - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn hermite_factorial_term(k: usize, x: f64) -> f64 {
    crate::specfun::hermite(k, x) * (-x * x).exp()
}

/// Midpoint Riemann value of the two-argument error integral on a dense
/// `cells x cells` grid per rectangle.
pub fn psi2_riemann(u1: f64, u2: f64, cells: usize) -> f64 {
    let integrand = |v1: f64, v2: f64| (-(v1 * v1) - (v1 - v2) * (v1 - v2)).exp();
    let rect = |a1: f64, b1: f64, a2: f64, b2: f64| {
        let (h1, h2) = ((b1 - a1) / cells as f64, (b2 - a2) / cells as f64);
        let mut s = 0.0;
        for i in 0..cells {
            let v1 = a1 + (i as f64 + 0.5) * h1;
            let mut row = 0.0;
            for j in 0..cells {
                let v2 = a2 + (j as f64 + 0.5) * h2;
                row += integrand(v1, v2);
            }
            s += row * h2;
        }
        s * h1
    };
    let first = rect(0.0, u1, u1 - u2, u2 - u1);
    let second = rect(u1, u2, u2 - u1, u1 + u2);
    2.0 / std::f64::consts::PI * (first - second)
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant_cofactor<R: Real>(m: &SquareMatrix<R>) -> R {
    let n = m.dim();
    if n == 1 {
        return m.get(0, 0);
    }
    let mut det = R::zero();
    for j in 0..n {
        let minor = SquareMatrix::from_fn(n - 1, |r, c| {
            m.get(r + 1, if c < j { c } else { c + 1 })
        });
        let cof = determinant_cofactor(&minor);
        let signed = if j % 2 == 0 { cof } else { -cof };
        det = det + m.get(0, j) * signed;
    }
    det
}

/// Pfaffian by direct enumeration of perfect pairings: pair the lowest free
/// index with each remaining one, sign `(-1)^{position-1}`.
pub fn pfaffian_enumeration<R: Real>(a: &AntisymmetricMatrix<R>) -> R {
    fn go<R: Real>(a: &AntisymmetricMatrix<R>, free: &[usize]) -> R {
        if free.is_empty() {
            return R::one();
        }
        let first = free[0];
        let mut total = R::zero();
        for (pos, &partner) in free.iter().enumerate().skip(1) {
            let rest: Vec<usize> = free[1..]
                .iter()
                .copied()
                .filter(|&i| i != partner)
                .collect();
            let sign = if pos % 2 == 1 { R::one() } else { -R::one() };
            total = total + sign * a.get(first, partner) * go(a, &rest);
        }
        total
    }
    let indices: Vec<usize> = (0..a.dim()).collect();
    go(a, &indices)
}

/// Trapezoid rule on a uniform grid of `n` intervals.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Midpoint rule over the ordered simplex `a < x1 < x2 < b` on an
/// `cells x cells` subdivision of the bounding square, keeping cells whose
/// midpoints satisfy the ordering.
pub fn simplex_riemann<G: Fn(f64, f64) -> f64>(g: G, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut s = 0.0;
    for i in 0..cells {
        let x1 = a + (i as f64 + 0.5) * h;
        for j in (i + 1)..cells {
            let x2 = a + (j as f64 + 0.5) * h;
            s += g(x1, x2);
        }
    }
    s * h * h
}

/// Nested adaptive quadrature of `f` over the ordered region
/// `lo < x_1 < ... < x_n < hi`, for `n <= 3`.
pub fn ordered_integral(
    n: usize,
    lo: f64,
    hi: f64,
    f: &dyn Fn(&[f64]) -> f64,
    tol: f64,
) -> f64 {
    match n {
        1 => crate::quad::integrate_1d_lenient(|x| f(&[x]), lo, hi, tol).value,
        2 => {
            crate::quad::integrate_1d_lenient(
                |x2| crate::quad::integrate_1d_lenient(|x1| f(&[x1, x2]), lo, x2, tol * 0.2).value,
                lo,
                hi,
                tol,
            )
            .value
        }
        3 => {
            crate::quad::integrate_1d_lenient(
                |x3| {
                    crate::quad::integrate_1d_lenient(
                        |x2| {
                            crate::quad::integrate_1d_lenient(
                                |x1| f(&[x1, x2, x3]),
                                lo,
                                x2,
                                tol * 0.05,
                            )
                            .value
                        },
                        lo,
                        x3,
                        tol * 0.2,
                    )
                    .value
                },
                lo,
                hi,
                tol,
            )
            .value
        }
        _ => panic!("ordered_integral supports n <= 3, got {n}"),
    }
}

/// Height distribution of the single positive pinned path: the closed-form
/// series `sum_n (1 - 4 h^2 n^2 / T) exp(-2 h^2 n^2 / T)`.
pub fn single_bessel_height_cdf(t_total: f64, h: f64) -> f64 {
    let q = 2.0 * h * h / t_total;
    let mut sum = 1.0;
    let mut n = 1.0_f64;
    loop {
        let term = 2.0 * (1.0 - 2.0 * q * n * n) * (-q * n * n).exp();
        sum += term;
        n += 1.0;
        if term.abs() < 1e-18 || n > 1e4 {
            break;
        }
    }
    sum
}

/// Two-sided exit law of the single pinned path on `(-l, r)`: the image
/// series `sum_n [e^{-2 n^2 (l+r)^2 / T} - e^{-(2l + 2n(l+r))^2/(2T)}]`.
pub fn single_bridge_exit_cdf(t_total: f64, l: f64, r: f64) -> f64 {
    let w = l + r;
    let mut sum = 0.0;
    for n in -200i64..=200 {
        let nf = n as f64;
        sum += (-2.0 * nf * nf * w * w / t_total).exp()
            - (-(2.0 * l + 2.0 * nf * w).powi(2) / (2.0 * t_total)).exp();
    }
    sum
}
