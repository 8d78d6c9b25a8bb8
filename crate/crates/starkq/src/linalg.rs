//! Exact integer/rational and high-precision float linear algebra.

use rug::ops::NegAssign;
use rug::{Complex, Float, Integer, Rational};

pub type IMat = Vec<Vec<Integer>>;

pub fn imat_from_i64(rows: &[Vec<i64>]) -> IMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
        .collect()
}

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| Integer::from(u8::from(i == j))).collect())
        .collect()
}

pub fn imat_mul(a: &IMat, b: &IMat) -> IMat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = Integer::new();
                    for k in 0..inner {
                        if row[k] != 0 && b[k][j] != 0 {
                            s += Integer::from(&row[k] * &b[k][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn imat_vec(a: &IMat, v: &[Integer]) -> Vec<Integer> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Integer::new(), |acc, (x, y)| acc + Integer::from(x * y))
        })
        .collect()
}

/// Exact determinant over Q by Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::from(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r][c] != 0) else {
            return Rational::new();
        };
        if p != c {
            m.swap(p, c);
            det.neg_assign();
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c] == 0 {
                continue;
            }
            let f = Rational::from(&m[r][c] / &piv);
            for k in c..n {
                let t = Rational::from(&f * &m[c][k]);
                m[r][k] -= t;
            }
        }
    }
    det
}

/// Exact integer determinant (fraction-free Bareiss elimination).
pub fn det_integer(a: &IMat) -> Integer {
    let n = a.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut m = a.clone();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Integer::new();
            };
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = v.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Smith normal form `U * A * V = D` with unimodular `U`, `V`.
#[derive(Clone, Debug)]
pub struct Smith {
    /// Nonzero diagonal entries d_1 | d_2 | ... (positive).
    pub diag: Vec<Integer>,
    pub u: IMat,
    pub v: IMat,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// Columns of V spanning the integer kernel of A.
    pub fn kernel_basis(&self) -> Vec<Vec<Integer>> {
        (self.rank()..self.cols)
            .map(|j| self.v.iter().map(|row| row[j].clone()).collect())
            .collect()
    }
}

fn row_combine(m: &mut IMat, i: usize, j: usize, a: &Integer, b: &Integer, c: &Integer, d: &Integer) {
    // (row_i, row_j) <- (a row_i + b row_j, c row_i + d row_j)
    for k in 0..m[i].len() {
        let x = m[i][k].clone();
        let y = m[j][k].clone();
        m[i][k] = Integer::from(a * &x) + Integer::from(b * &y);
        m[j][k] = Integer::from(c * &x) + Integer::from(d * &y);
    }
}

fn col_combine(m: &mut IMat, i: usize, j: usize, a: &Integer, b: &Integer, c: &Integer, d: &Integer) {
    for row in m.iter_mut() {
        let x = row[i].clone();
        let y = row[j].clone();
        row[i] = Integer::from(a * &x) + Integer::from(b * &y);
        row[j] = Integer::from(c * &x) + Integer::from(d * &y);
    }
}

/// `(g, s, c)` with `s a + c b = g`; plain elimination when `a | b`, so a
/// pivot is never swapped away.
fn bezout(a: &Integer, b: &Integer) -> (Integer, Integer, Integer) {
    if b.is_divisible(a) {
        let sign = Integer::from(a.signum_ref());
        (Integer::from(a.abs_ref()), sign, Integer::new())
    } else {
        a.extended_gcd_ref(b).into()
    }
}

/// Smith normal form with transforms.
pub fn smith(a: &IMat) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero |entry| in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].cmp_abs(&m[bi][bj]).is_lt()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if m[i][t] == 0 {
                    continue;
                }
                let (g, s, c) = bezout(&m[t][t], &m[i][t]);
                let a_t = Integer::from(m[t][t].div_exact_ref(&g));
                let a_i = Integer::from(m[i][t].div_exact_ref(&g));
                let neg_ai = Integer::from(-&a_i);
                row_combine(&mut m, t, i, &s, &c, &neg_ai, &a_t);
                row_combine(&mut u, t, i, &s, &c, &neg_ai, &a_t);
                changed = true;
            }
            for j in t + 1..cols {
                if m[t][j] == 0 {
                    continue;
                }
                let (g, s, c) = bezout(&m[t][t], &m[t][j]);
                let a_t = Integer::from(m[t][t].div_exact_ref(&g));
                let a_j = Integer::from(m[t][j].div_exact_ref(&g));
                let neg_aj = Integer::from(-&a_j);
                col_combine(&mut m, t, j, &s, &c, &neg_aj, &a_t);
                col_combine(&mut v, t, j, &s, &c, &neg_aj, &a_t);
                changed = true;
            }
            if !changed {
                break;
            }
        }
        // divisibility: if some entry is not a multiple of the pivot, fold its row in and redo
        let mut fixup = None;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if !m[i][j].is_divisible(&m[t][t]) {
                    fixup = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = fixup {
            let one = Integer::from(1);
            let zero = Integer::new();
            row_combine(&mut m, t, i, &one, &one, &zero, &one);
            row_combine(&mut u, t, i, &one, &one, &zero, &one);
            continue;
        }
        if m[t][t] < 0 {
            for k in 0..cols {
                m[t][k].neg_assign();
            }
            for k in 0..rows {
                u[t][k].neg_assign();
            }
        }
        t += 1;
    }
    let diag = (0..t).map(|i| m[i][i].clone()).collect();
    Smith { diag, u, v, rows, cols }
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(a: &IMat) -> Option<IMat> {
    let n = a.len();
    let q: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(Rational::from).collect()).collect();
    let inv = inverse_rational(&q)?;
    let mut out = Vec::with_capacity(n);
    for row in inv {
        let mut r = Vec::with_capacity(n);
        for x in row {
            if *x.denom() != 1 {
                return None;
            }
            r.push(x.numer().clone());
        }
        out.push(r);
    }
    Some(out)
}

pub fn inverse_rational(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| Rational::from(u8::from(i == j))));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| m[r][c] != 0)?;
        m.swap(p, c);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x /= &piv;
        }
        for r in 0..n {
            if r == c || m[r][c] == 0 {
                continue;
            }
            let f = m[r][c].clone();
            for k in 0..2 * n {
                let t = Rational::from(&f * &m[c][k]);
                m[r][k] -= t;
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `A x = b` at the precision of the entries (partial pivoting).
pub fn solve_float(a: &[Vec<Float>], b: &[Float]) -> Option<Vec<Float>> {
    let n = a.len();
    let prec = b.first().map_or(64, Float::prec);
    let mut m: Vec<Vec<Float>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].cmp_abs(&m[j][c]).unwrap_or(std::cmp::Ordering::Equal))?;
        if m[p][c].is_zero() {
            return None;
        }
        m.swap(p, c);
        for r in c + 1..n {
            let f = Float::with_val(prec, &m[r][c] / &m[c][c]);
            for k in c..=n {
                let t = Float::with_val(prec, &f * &m[c][k]);
                m[r][k] -= t;
            }
        }
    }
    let mut x = vec![Float::new(prec); n];
    for r in (0..n).rev() {
        let mut s = m[r][n].clone();
        for k in r + 1..n {
            s -= Float::with_val(prec, &m[r][k] * &x[k]);
        }
        x[r] = s / &m[r][r];
    }
    Some(x)
}

pub fn det_float(a: &[Vec<Float>], prec: u32) -> Float {
    let n = a.len();
    let mut m: Vec<Vec<Float>> = a.to_vec();
    let mut det = Float::with_val(prec, 1);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].cmp_abs(&m[j][c]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if m[p][c].is_zero() {
            return Float::new(prec);
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = Float::with_val(prec, &m[r][c] / &m[c][c]);
            for k in c..n {
                let t = Float::with_val(prec, &f * &m[c][k]);
                m[r][k] -= t;
            }
        }
    }
    det
}

pub fn det_complex(a: &[Vec<Complex>], prec: u32) -> Complex {
    let n = a.len();
    let mut m: Vec<Vec<Complex>> = a.to_vec();
    let mut det = Complex::with_val(prec, 1);
    let abs = |z: &Complex| Float::with_val(prec, z.abs_ref());
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| {
                abs(&m[i][c])
                    .partial_cmp(&abs(&m[j][c]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[p][c].is_zero() {
            return Complex::new(prec);
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = Complex::with_val(prec, &m[r][c] / &m[c][c]);
            for k in c..n {
                let t = Complex::with_val(prec, &f * &m[c][k]);
                m[r][k] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_smith(a: &IMat) -> Smith {
        let s = smith(a);
        let d = imat_mul(&imat_mul(&s.u, a), &s.v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j && i < s.rank() {
                    assert_eq!(*x, s.diag[i]);
                } else {
                    assert_eq!(*x, 0);
                }
            }
        }
        for w in s.diag.windows(2) {
            assert!(w[1].is_divisible(&w[0]));
        }
        assert_eq!(det_integer(&s.u).abs(), 1);
        assert_eq!(det_integer(&s.v).abs(), 1);
        s
    }

    #[test]
    fn smith_small() {
        let a = imat_from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = check_smith(&a);
        assert_eq!(s.diag, vec![Integer::from(2), Integer::from(6), Integer::from(12)]);
    }

    #[test]
    fn smith_equal_entries_terminate() {
        let a = imat_from_i64(&[vec![1, -1, 0, 0], vec![0, 0, -4, 2], vec![1, 1, 2, -2]]);
        let s = check_smith(&a);
        assert_eq!(s.rank(), 3);
        let b = imat_from_i64(&[vec![3, 3], vec![3, 3], vec![-3, 3]]);
        check_smith(&b);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let a = imat_from_i64(&[vec![1, 2, 3], vec![4, 5, 6]]);
        let s = check_smith(&a);
        let k = s.kernel_basis();
        assert_eq!(k.len(), 1);
        let img = imat_vec(&a, &k[0]);
        assert!(img.iter().all(|x| *x == 0));
        let g = k[0].iter().fold(Integer::new(), |g, x| g.gcd(x));
        assert_eq!(g, 1);
    }

    #[test]
    fn determinants_agree() {
        let a = imat_from_i64(&[vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5]]);
        let q: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(Rational::from).collect()).collect();
        assert_eq!(det_integer(&a), -90);
        assert_eq!(det_rational(q), -90);
        let f: Vec<Vec<Float>> = a
            .iter()
            .map(|r| r.iter().map(|x| Float::with_val(128, x)).collect())
            .collect();
        assert!((det_float(&f, 128) + 90u32).abs() < 1e-30);
    }

    #[test]
    fn float_solve() {
        let a: Vec<Vec<Float>> = vec![
            vec![Float::with_val(128, 2), Float::with_val(128, 1)],
            vec![Float::with_val(128, 1), Float::with_val(128, 3)],
        ];
        let b = vec![Float::with_val(128, 3), Float::with_val(128, 5)];
        let x = solve_float(&a, &b).unwrap();
        assert!((x[0].clone() - Rational::from((4, 5))).abs() < 1e-30);
        assert!((x[1].clone() - Rational::from((7, 5))).abs() < 1e-30);
    }
}
