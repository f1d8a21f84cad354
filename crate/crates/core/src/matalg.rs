//! Dense determinant and pfaffian evaluation for the small matrices the
//! distribution formulas assemble.

use crate::{Error, Real, Result};

/// Row-major dense square matrix.
#[derive(Clone, Debug)]
pub struct SquareMatrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: Real> SquareMatrix<R> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must be square");
        SquareMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.n {
            self.data.swap(i * self.n + a, i * self.n + b);
        }
    }
}

/// Determinant via partially pivoted elimination, with a compensated
/// (fused-multiply-add) fast path at dimension 2 where the assembled
/// matrices cancel most severely.
pub fn determinant<R: Real>(m: &SquareMatrix<R>) -> R {
    let (sign, ln) = log_determinant(m);
    if sign == 0 {
        return R::zero();
    }
    R::of(sign as f64) * ln.exp()
}

/// Determinant split as `(sign, ln |det|)`, with rows pre-scaled to unit
/// max-abs so widely ranged kernel matrices stay in floating-point range.
pub fn log_determinant<R: Real>(m: &SquareMatrix<R>) -> (i8, R) {
    let n = m.dim();
    if n == 2 {
        let d = det2_compensated(m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        return if d == R::zero() {
            (0, R::neg_infinity())
        } else if d > R::zero() {
            (1, d.ln())
        } else {
            (-1, (-d).ln())
        };
    }
    let mut a = m.clone();
    let mut ln_scale = R::zero();
    for i in 0..n {
        let mut row_max = R::zero();
        for j in 0..n {
            row_max = row_max.max(a.get(i, j).abs());
        }
        if row_max == R::zero() {
            return (0, R::neg_infinity());
        }
        for j in 0..n {
            a.set(i, j, a.get(i, j) / row_max);
        }
        ln_scale = ln_scale + row_max.ln();
    }

    let mut sign = 1i8;
    let mut ln_det = ln_scale;
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a.get(col, col).abs();
        for r in (col + 1)..n {
            let v = a.get(r, col).abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs == R::zero() {
            return (0, R::neg_infinity());
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
            sign = -sign;
        }
        let pivot = a.get(col, col);
        if pivot < R::zero() {
            sign = -sign;
        }
        ln_det = ln_det + pivot.abs().ln();
        for r in (col + 1)..n {
            let factor = a.get(r, col) / pivot;
            if factor == R::zero() {
                continue;
            }
            for j in col..n {
                let v = a.get(r, j) - factor * a.get(col, j);
                a.set(r, j, v);
            }
        }
    }
    (sign, ln_det)
}

/// `ad - bc` with the product error recovered through fused multiply-adds,
/// accurate to a few ulp of the result even under heavy cancellation.
fn det2_compensated<R: Real>(a: R, b: R, c: R, d: R) -> R {
    let w = b * c;
    let e = b.mul_add(c, -w);
    let f = a.mul_add(d, -w);
    f - e
}

/// Inverse via Gauss–Jordan with partial pivoting; `None` when singular to
/// working precision.  Used for first-order perturbation bounds.
pub fn invert<R: Real>(m: &SquareMatrix<R>) -> Option<SquareMatrix<R>> {
    let n = m.dim();
    let mut a = m.clone();
    let mut inv = SquareMatrix::from_fn(n, |i, j| if i == j { R::one() } else { R::zero() });
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a.get(col, col).abs();
        for r in (col + 1)..n {
            let v = a.get(r, col).abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs == R::zero() || !pivot_abs.is_finite() {
            return None;
        }
        a.swap_rows(pivot_row, col);
        inv.swap_rows(pivot_row, col);
        let pivot = a.get(col, col);
        for j in 0..n {
            a.set(col, j, a.get(col, j) / pivot);
            inv.set(col, j, inv.get(col, j) / pivot);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a.get(r, col);
            if factor == R::zero() {
                continue;
            }
            for j in 0..n {
                a.set(r, j, a.get(r, j) - factor * a.get(col, j));
                inv.set(r, j, inv.get(r, j) - factor * inv.get(col, j));
            }
        }
    }
    Some(inv)
}

/// Square real matrix constrained to `A = -A^T`.
///
/// Construction enforces antisymmetry to within `1e-14` relative, then
/// exactly antisymmetrizes by `(A - A^T)/2` so downstream algorithms can
/// rely on the identity holding bit-exactly.
#[derive(Clone, Debug)]
pub struct AntisymmetricMatrix<R> {
    inner: SquareMatrix<R>,
}

impl<R: Real> AntisymmetricMatrix<R> {
    pub fn new(m: SquareMatrix<R>) -> Result<Self> {
        let n = m.dim();
        let mut scale = R::zero();
        let mut dev = R::zero();
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(m.get(i, j).abs());
                dev = dev.max((m.get(i, j) + m.get(j, i)).abs());
            }
        }
        if scale > R::zero() && dev > R::of(1e-14) * scale {
            return Err(Error::NotAntisymmetric((dev / scale).as_f64()));
        }
        let mut out = m;
        for i in 0..n {
            out.set(i, i, R::zero());
            for j in (i + 1)..n {
                let v = (out.get(i, j) - out.get(j, i)) * R::half();
                out.set(i, j, v);
                out.set(j, i, -v);
            }
        }
        Ok(AntisymmetricMatrix { inner: out })
    }

    /// Builds from the strict upper triangle; antisymmetric by construction.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut m = SquareMatrix::from_fn(n, |_, _| R::zero());
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                m.set(i, j, v);
                m.set(j, i, -v);
            }
        }
        AntisymmetricMatrix { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix<R> {
        &self.inner
    }
}

/// Pads an antisymmetric core with a border row/column when its dimension is
/// odd: the returned matrix has last column `border`, last row `-border`,
/// and a zero corner.  Even cores pass through unchanged.
pub fn pad_skew<R: Real>(core: &SquareMatrix<R>, border: &[R]) -> Result<AntisymmetricMatrix<R>> {
    let n = core.dim();
    assert_eq!(border.len(), n, "border length must match the core");
    let checked = AntisymmetricMatrix::new(core.clone())?;
    if n % 2 == 0 {
        return Ok(checked);
    }
    let m = SquareMatrix::from_fn(n + 1, |i, j| {
        if i < n && j < n {
            checked.get(i, j)
        } else if i < n && j == n {
            border[i]
        } else if i == n && j < n {
            -border[j]
        } else {
            R::zero()
        }
    });
    Ok(AntisymmetricMatrix { inner: m })
}

/// Pfaffian via skew-symmetric tridiagonalization (Parlett–Reid with
/// pivoting); the sign convention is the permutation-sum definition,
/// `Pf [[0, a], [-a, 0]] = a`.
pub fn pfaffian<R: Real>(a: &AntisymmetricMatrix<R>) -> Result<R> {
    let n = a.dim();
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    // Symmetric rescaling D A D keeps entries near unit size; the pfaffian
    // picks up the product of the scales once per index.
    let mut scale = vec![R::one(); n];
    let mut ln_scale = R::zero();
    for i in 0..n {
        let mut row_max = R::zero();
        for j in 0..n {
            row_max = row_max.max(a.get(i, j).abs());
        }
        if row_max > R::zero() {
            scale[i] = row_max.sqrt().recip();
            ln_scale = ln_scale - scale[i].ln();
        }
    }
    let mut m = SquareMatrix::from_fn(n, |i, j| a.get(i, j) * scale[i] * scale[j]);

    // Congruence transforms leave the pfaffian fixed up to the swap signs;
    // the result is tridiagonal with Pf = prod of even super-diagonal
    // entries.
    let mut sign = R::one();
    for j in 0..n.saturating_sub(2) {
        let mut best = j + 1;
        let mut best_abs = m.get(j + 1, j).abs();
        for i in (j + 2)..n {
            let v = m.get(i, j).abs();
            if v > best_abs {
                best_abs = v;
                best = i;
            }
        }
        if best_abs == R::zero() {
            if j % 2 == 0 {
                // zero super-diagonal entry at a pfaffian position
                return Ok(R::zero());
            }
            continue; // nothing below an odd pivot: already reduced here
        }
        if best != j + 1 {
            m.swap_rows(best, j + 1);
            m.swap_cols(best, j + 1);
            sign = -sign;
        }
        let pivot = m.get(j + 1, j);
        for i in (j + 2)..n {
            let factor = m.get(i, j) / pivot;
            if factor == R::zero() {
                continue;
            }
            for c in 0..n {
                let v = m.get(i, c) - factor * m.get(j + 1, c);
                m.set(i, c, v);
            }
            for r in 0..n {
                let v = m.get(r, i) - factor * m.get(r, j + 1);
                m.set(r, i, v);
            }
        }
    }
    let mut ln_mag = ln_scale;
    for j in (0..n).step_by(2) {
        let t = m.get(j, j + 1);
        if t == R::zero() {
            return Ok(R::zero());
        }
        ln_mag = ln_mag + t.abs().ln();
        if t < R::zero() {
            sign = -sign;
        }
    }
    Ok(sign * ln_mag.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn identity_determinant() {
        let id = SquareMatrix::from_fn(5, |i, j| if i == j { 1.0_f64 } else { 0.0 });
        assert!((determinant(&id) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vandermonde_determinant() {
        // det[a_i^{j-1}] = prod_{i<j} (a_j - a_i) for a = (1, 2, 3)
        let a = [1.0_f64, 2.0, 3.0];
        let m = SquareMatrix::from_fn(3, |i, j| a[i].powi(j as i32));
        assert!((determinant(&m) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn determinant_matches_cofactor_oracle() {
        let mut seed = 0x1234_5678_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for _ in 0..5 {
            let m = SquareMatrix::from_fn(6, |_, _| next());
            let fast = determinant(&m);
            let slow = reference::determinant_cofactor(&m);
            assert!(
                (fast - slow).abs() <= 1e-10 * slow.abs().max(1e-3),
                "{fast} vs {slow}"
            );
        }
    }

    #[test]
    fn pfaffian_two_by_two() {
        let a = AntisymmetricMatrix::from_upper(2, |_, _| 3.25_f64);
        assert!((pfaffian(&a).unwrap() - 3.25).abs() < 1e-14);
    }

    #[test]
    fn pfaffian_four_by_four_hand_value() {
        // a12=1 a13=2 a14=3 a23=4 a24=5 a34=6 -> 1*6 - 2*5 + 3*4 = 8
        let vals: [[f64; 4]; 3] =
            [[0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 4.0, 5.0], [0.0, 0.0, 0.0, 6.0]];
        let a = AntisymmetricMatrix::from_upper(4, |i, j| vals[i][j]);
        assert!((pfaffian(&a).unwrap() - 8.0).abs() < 1e-13);
        assert!((reference::pfaffian_enumeration(&a) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn pfaffian_matches_enumeration() {
        let mut seed = 0xdead_beef_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for dim in [2usize, 4, 6, 8] {
            let a = AntisymmetricMatrix::from_upper(dim, |_, _| next());
            let fast = pfaffian(&a).unwrap();
            let slow = reference::pfaffian_enumeration(&a);
            assert!(
                (fast - slow).abs() <= 1e-10 * slow.abs().max(1e-6),
                "dim {dim}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let mut seed = 0x0bad_cafe_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for dim in [2usize, 4, 6, 8, 10, 12] {
            let a = AntisymmetricMatrix::from_upper(dim, |_, _| 2.0 * next());
            let pf = pfaffian(&a).unwrap();
            let det = determinant(a.as_matrix());
            assert!(
                (pf * pf - det).abs() <= 1e-10 * det.abs().max(1e-8),
                "dim {dim}"
            );
        }
    }

    #[test]
    fn pfaffian_of_block_diagonal_is_product() {
        let blocks = [1.5_f64, -0.75, 2.0];
        let a = AntisymmetricMatrix::from_upper(6, |i, j| {
            if j == i + 1 && i % 2 == 0 {
                blocks[i / 2]
            } else {
                0.0
            }
        });
        let expected: f64 = blocks.iter().product();
        assert!((pfaffian(&a).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn pfaffian_rejects_odd_dimension() {
        let a = AntisymmetricMatrix::from_upper(3, |_, _| 1.0_f64);
        assert!(matches!(pfaffian(&a), Err(Error::OddDimension(3))));
    }

    #[test]
    fn pad_skew_even_core_passes_through() {
        let core = SquareMatrix::from_rows(vec![vec![0.0_f64, 2.0], vec![-2.0, 0.0]]);
        let padded = pad_skew(&core, &[9.0, 9.0]).unwrap();
        assert_eq!(padded.dim(), 2);
        assert!((pfaffian(&padded).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pad_skew_single_entry_reduces_to_border() {
        let core = SquareMatrix::from_rows(vec![vec![0.0_f64]]);
        let padded = pad_skew(&core, &[4.5]).unwrap();
        assert_eq!(padded.dim(), 2);
        assert!((pfaffian(&padded).unwrap() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn pad_skew_three_core_matches_enumeration() {
        let core = SquareMatrix::from_rows(vec![
            vec![0.0_f64, 1.2, -0.4],
            vec![-1.2, 0.0, 0.9],
            vec![0.4, -0.9, 0.0],
        ]);
        let padded = pad_skew(&core, &[0.3, -1.1, 0.8]).unwrap();
        assert_eq!(padded.dim(), 4);
        let fast = pfaffian(&padded).unwrap();
        let slow = reference::pfaffian_enumeration(&padded);
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn pad_skew_rejects_non_antisymmetric_core() {
        let core = SquareMatrix::from_rows(vec![vec![0.0_f64, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(
            pad_skew(&core, &[1.0, 1.0]),
            Err(Error::NotAntisymmetric(_))
        ));
    }

    #[test]
    fn determinant_is_multiplicative() {
        let mut seed = 0x5151_5151_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for dim in [2usize, 4, 8] {
            let a = SquareMatrix::from_fn(dim, |_, _| next());
            let b = SquareMatrix::from_fn(dim, |_, _| next());
            let ab = SquareMatrix::from_fn(dim, |i, j| {
                (0..dim).map(|k| a.get(i, k) * b.get(k, j)).fold(0.0, |s, v| s + v)
            });
            let lhs = determinant(&ab);
            let rhs = determinant(&a) * determinant(&b);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-6),
                "dim {dim}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = SquareMatrix::from_rows(vec![
            vec![2.0_f64, 1.0, 0.5],
            vec![-1.0, 3.0, 0.0],
            vec![0.25, 0.0, 1.5],
        ]);
        let inv = invert(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }
}
