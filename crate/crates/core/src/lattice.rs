//! Integer row lattices in Hermite normal form.
//!
//! Rows are the prime-exponent vectors of a group's generators. Reduction
//! keeps the unimodular transform, so every basis row is also known as an
//! integer combination of the original generators and the trailing rows of
//! the transform span the relation module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    /// Nonzero rows of the Hermite normal form, in echelon order.
    pub basis: Vec<Vec<BigInt>>,
    /// Pivot column of each basis row.
    pub pivots: Vec<usize>,
    /// `basis[i] = Σ_j basis_in_rows[i][j] · rows[j]`.
    pub basis_in_rows: Vec<Vec<BigInt>>,
    /// Integer relations among the input rows (a basis of the kernel).
    pub relations: Vec<Vec<BigInt>>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Computes the Hermite normal form of the row span of `rows`, each of
    /// length `width`.
    pub fn new(rows: &[Vec<BigInt>], width: usize) -> Hnf {
        let m = rows.len();
        let mut a: Vec<Vec<BigInt>> = rows.to_vec();
        let mut u: Vec<Vec<BigInt>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..width {
            if r == m {
                break;
            }
            loop {
                // smallest nonzero |entry| in column c at or below row r
                let best = (r..m)
                    .filter(|&i| !a[i][c].is_zero())
                    .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
                let Some(best) = best else { break };
                a.swap(r, best);
                u.swap(r, best);
                let mut done = true;
                for i in (r + 1)..m {
                    if a[i][c].is_zero() {
                        continue;
                    }
                    let q = a[i][c].div_floor(&a[r][c]);
                    row_sub(&mut a, i, r, &q);
                    row_sub(&mut u, i, r, &q);
                    if !a[i][c].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if a[r][c].is_zero() {
                continue;
            }
            if a[r][c].is_negative() {
                negate_row(&mut a[r]);
                negate_row(&mut u[r]);
            }
            for i in 0..r {
                let q = a[i][c].div_floor(&a[r][c]);
                if !q.is_zero() {
                    row_sub(&mut a, i, r, &q);
                    row_sub(&mut u, i, r, &q);
                }
            }
            pivots.push(c);
            r += 1;
        }
        let basis = a[..r].to_vec();
        let basis_in_rows = u[..r].to_vec();
        let relations = u[r..].to_vec();
        Hnf { basis, pivots, basis_in_rows, relations }
    }

    /// Coordinates of `v` in the rational span of the basis, if it lies there.
    pub fn solve_rational(&self, v: &[BigRational]) -> Option<Vec<BigRational>> {
        let mut rest: Vec<BigRational> = v.to_vec();
        let mut coords = Vec::with_capacity(self.basis.len());
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            let x = &rest[c] / BigRational::from_integer(row[c].clone());
            for (k, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    rest[k] -= &x * BigRational::from_integer(e.clone());
                }
            }
            coords.push(x);
        }
        if rest.iter().all(|e| e.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    /// Integer coordinates of `v` in the basis, if `v` is a lattice vector.
    pub fn solve_integer(&self, v: &[BigRational]) -> Option<Vec<BigInt>> {
        let coords = self.solve_rational(v)?;
        coords.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
    }

    /// Converts basis coordinates into coefficients on the original rows.
    pub fn to_row_coords(&self, coords: &[BigInt]) -> Vec<BigInt> {
        let m = self.basis_in_rows.first().map_or(0, |r| r.len());
        let mut out = vec![BigInt::zero(); m];
        for (x, urow) in coords.iter().zip(&self.basis_in_rows) {
            for (o, u) in out.iter_mut().zip(urow) {
                *o += x * u;
            }
        }
        out
    }
}

fn row_sub(a: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    let src_row = a[src].clone();
    for (t, s) in a[target].iter_mut().zip(&src_row) {
        *t -= q * s;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for e in row.iter_mut() {
        *e = -&*e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn gcd_of_single_column() {
        let h = Hnf::new(&rows(&[&[2], &[3]]), 1);
        assert_eq!(h.basis, rows(&[&[1]]));
        assert_eq!(h.rank(), 1);
        assert_eq!(h.relations.len(), 1);
        // the relation combines 2 and 3 to zero
        let rel = &h.relations[0];
        assert_eq!(&rel[0] * 2 + &rel[1] * 3, BigInt::zero());
    }

    #[test]
    fn transform_reproduces_basis() {
        let input = rows(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1], &[2, 2, 2]]);
        let h = Hnf::new(&input, 3);
        assert_eq!(h.rank(), 3);
        for (b, u) in h.basis.iter().zip(&h.basis_in_rows) {
            let mut acc = vec![BigInt::zero(); 3];
            for (coef, row) in u.iter().zip(&input) {
                for (a, x) in acc.iter_mut().zip(row) {
                    *a += coef * x;
                }
            }
            assert_eq!(&acc, b);
        }
        // (1,1,0)+(1,0,1)+(0,1,1) = (2,2,2)
        assert_eq!(h.relations.len(), 1);
        assert!(h.solve_integer(&q(&[2, 0, 0])).is_some());
        assert!(h.solve_integer(&q(&[1, 0, 0])).is_none());
        assert!(h.solve_rational(&q(&[1, 0, 0])).is_some());
    }

    #[test]
    fn rational_membership_requires_span() {
        let h = Hnf::new(&rows(&[&[1, 0]]), 2);
        assert!(h.solve_rational(&q(&[0, 1])).is_none());
        let half = vec![BigRational::new(1.into(), 2.into()), BigRational::zero()];
        assert!(h.solve_rational(&half).is_some());
        assert!(h.solve_integer(&half).is_none());
    }
}
