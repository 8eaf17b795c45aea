//! Integer lattices: Hermite and Smith normal forms and integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMat = Vec<Vec<BigInt>>;

fn identity(n: usize) -> IntMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Replace rows (a, b) by (x·a + y·b, −(b_c/g)·a + (a_c/g)·b) where g = gcd at
/// column c. The transform has determinant 1.
fn combine(rows: &mut [Vec<BigInt>], a: usize, b: usize, c: usize) {
    let ea = rows[a][c].extended_gcd(&rows[b][c]);
    let (g, x, y) = (ea.gcd, ea.x, ea.y);
    let pa = &rows[a][c] / &g;
    let pb = &rows[b][c] / &g;
    let ra = rows[a].clone();
    let rb = rows[b].clone();
    rows[a] = ra.iter().zip(&rb).map(|(u, v)| &x * u + &y * v).collect();
    rows[b] = ra.iter().zip(&rb).map(|(u, v)| -&pb * u + &pa * v).collect();
}

/// Row Hermite normal form H = U·A with U unimodular. Pivots are positive and
/// entries above a pivot are reduced into [0, pivot). Zero rows come last.
pub fn hnf_with_transform(a: &IntMat) -> (IntMat, IntMat) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    // work on [A | I] so the transform rides along
    let mut rows: IntMat = a
        .iter()
        .zip(identity(m))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        for i in r + 1..m {
            if !rows[i][c].is_zero() {
                if rows[r][c].is_zero() {
                    rows.swap(r, i);
                } else {
                    combine(&mut rows, r, i, c);
                }
            }
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            rows[r] = rows[r].iter().map(|x| -x).collect();
        }
        for i in 0..r {
            let q = rows[i][c].div_floor(&rows[r][c]);
            if !q.is_zero() {
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
        r += 1;
    }
    let h = rows.iter().map(|row| row[..n].to_vec()).collect();
    let u = rows.iter().map(|row| row[n..].to_vec()).collect();
    (h, u)
}

pub fn hnf(a: &IntMat) -> IntMat {
    hnf_with_transform(a).0
}

/// Z-basis (HNF rows) of the lattice spanned by the given rows.
pub fn lattice_basis(rows: &IntMat) -> IntMat {
    hnf(rows).into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect()
}

/// Z-basis of the left kernel {x ∈ Z^m : x·A = 0}.
pub fn left_kernel(a: &IntMat) -> IntMat {
    let (h, u) = hnf_with_transform(a);
    let kernel: IntMat = h
        .iter()
        .zip(u)
        .filter(|(row, _)| row.iter().all(|x| x.is_zero()))
        .map(|(_, t)| t)
        .collect();
    lattice_basis(&kernel)
}

/// Z-basis of the right kernel {x ∈ Z^n : A·x = 0}.
pub fn right_kernel(a: &IntMat) -> IntMat {
    left_kernel(&transpose(a))
}

pub fn transpose(a: &IntMat) -> IntMat {
    let n = a.first().map_or(0, |r| r.len());
    (0..n).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Nonzero invariant factors d_1 | d_2 | … of the Smith normal form.
pub fn smith_invariants(a: &IntMat) -> Vec<BigInt> {
    let mut m: IntMat = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let pos = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !m[i][j].is_zero())
            .min_by_key(|&(i, j)| m[i][j].abs());
        let Some((pi, pj)) = pos else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if !m[i][t].is_zero() {
                    let q = m[i][t].div_floor(&m[t][t]);
                    let pr = m[t].clone();
                    for (x, y) in m[i].iter_mut().zip(&pr) {
                        *x -= &q * y;
                    }
                    if !m[i][t].is_zero() {
                        m.swap(t, i);
                        changed = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !m[t][j].is_zero() {
                    let q = m[t][j].div_floor(&m[t][t]);
                    for row in m.iter_mut() {
                        let y = row[t].clone();
                        row[j] -= &q * y;
                    }
                    if !m[t][j].is_zero() {
                        for row in m.iter_mut() {
                            row.swap(t, j);
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                // divisibility condition
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&m[i][j] % &m[t][t]).is_zero());
                match bad {
                    Some((i, _)) => {
                        let ri = m[i].clone();
                        for (x, y) in m[t].iter_mut().zip(&ri) {
                            *x += y;
                        }
                    }
                    None => break,
                }
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out
}

/// Coordinates of `v` in the lattice with independent basis rows `basis`,
/// if `v` lies in it.
pub fn lattice_coords(basis: &IntMat, v: &[BigInt]) -> Option<Vec<BigInt>> {
    use crate::arith::rational::int;
    use crate::linalg::MatQ;
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero()).then(Vec::new);
    }
    let m = MatQ::from_integer_rows(basis).transpose();
    let x = m.solve(&v.iter().cloned().map(int).collect::<Vec<_>>())?;
    if m.mul_vec(&x) != v.iter().cloned().map(int).collect::<Vec<_>>() {
        return None;
    }
    x.iter().map(|q| q.is_integer().then(|| q.numer().clone())).collect()
}

pub fn to_int_mat(rows: &[&[i64]]) -> IntMat {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
        a.iter()
            .map(|r| {
                (0..b[0].len())
                    .map(|j| r.iter().zip(b).fold(BigInt::zero(), |acc, (x, row)| acc + x * &row[j]))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn hnf_transform_is_consistent() {
        let a = to_int_mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (h, u) = hnf_with_transform(&a);
        assert_eq!(mat_mul(&u, &a), h);
        assert_eq!(h[0][0], BigInt::from(2));
    }

    #[test]
    fn kernels() {
        // x·[1;2;3] = 0 in Z^3 has rank 2
        let a = to_int_mat(&[&[1], &[2], &[3]]);
        let k = left_kernel(&a);
        assert_eq!(k.len(), 2);
        for row in &k {
            let s: BigInt = row.iter().zip([1, 2, 3]).map(|(x, c)| x * BigInt::from(c)).sum();
            assert!(s.is_zero());
        }
        // norm map (1, 1) mod sign: x + y = 0
        let r = right_kernel(&to_int_mat(&[&[1, 1]]));
        assert_eq!(r, to_int_mat(&[&[1, -1]]));
    }

    #[test]
    fn smith_of_known_matrix() {
        let a = to_int_mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        assert_eq!(
            smith_invariants(&a),
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
    }

    #[test]
    fn coords_in_lattice() {
        let b = to_int_mat(&[&[2, 0], &[0, 3]]);
        assert_eq!(
            lattice_coords(&b, &[BigInt::from(4), BigInt::from(-3)]),
            Some(vec![BigInt::from(2), BigInt::from(-1)])
        );
        assert_eq!(lattice_coords(&b, &[BigInt::from(1), BigInt::from(0)]), None);
    }
}
