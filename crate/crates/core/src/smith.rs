//! Integer diagonalisation `P·A·Q = D` with unimodular `P`, `Q`, used to solve
//! linear systems `A·x ≡ r (mod 1)` over turns.
//!
//! The divisibility chain of the full Smith normal form is not needed for
//! solving, so the reduction stops once the matrix is diagonal.

use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::phases::Turn;

/// Result of diagonalising an `rows × cols` integer matrix.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    rows: usize,
    cols: usize,
    left: Vec<Vec<i128>>,
    right: Vec<Vec<i128>>,
    diag: Vec<i128>,
}

fn checked(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow("integer diagonalisation"))
}

impl Diagonalization {
    /// Diagonalise a dense integer matrix given as rows.
    pub fn new(a: &[Vec<i64>], cols: usize) -> Result<Diagonalization> {
        let rows = a.len();
        let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mut p: Vec<Vec<i128>> = identity(rows);
        let mut q: Vec<Vec<i128>> = identity(cols);
        let mut diag = Vec::new();
        let mut t = 0;
        while t < rows.min(cols) {
            let Some((pi, pj)) = min_entry(&m, t, t, rows, cols) else { break };
            m.swap(t, pi);
            p.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut q, t, pj);
            loop {
                let piv = m[t][t];
                let mut clean = true;
                for i in t + 1..rows {
                    if m[i][t] != 0 {
                        let f = Integer::div_floor(&m[i][t], &piv);
                        row_sub(&mut m, i, t, f)?;
                        row_sub(&mut p, i, t, f)?;
                        clean &= m[i][t] == 0;
                    }
                }
                for j in t + 1..cols {
                    if m[t][j] != 0 {
                        let f = Integer::div_floor(&m[t][j], &piv);
                        col_sub(&mut m, j, t, f)?;
                        col_sub(&mut q, j, t, f)?;
                        clean &= m[t][j] == 0;
                    }
                }
                if clean {
                    break;
                }
                // move the smallest remainder in row/column t onto the pivot
                let mut best = (m[t][t].abs(), None);
                for (i, row) in m.iter().enumerate().take(rows).skip(t + 1) {
                    if row[t] != 0 && row[t].abs() < best.0 {
                        best = (row[t].abs(), Some((true, i)));
                    }
                }
                for (j, &x) in m[t].iter().enumerate().take(cols).skip(t + 1) {
                    if x != 0 && x.abs() < best.0 {
                        best = (x.abs(), Some((false, j)));
                    }
                }
                match best.1 {
                    Some((true, i)) => {
                        m.swap(t, i);
                        p.swap(t, i);
                    }
                    Some((false, j)) => {
                        swap_cols(&mut m, t, j);
                        swap_cols(&mut q, t, j);
                    }
                    None => unreachable!("remainders are smaller than the pivot"),
                }
            }
            if m[t][t] < 0 {
                for x in m[t].iter_mut().chain(p[t].iter_mut()) {
                    *x = -*x;
                }
            }
            diag.push(m[t][t]);
            t += 1;
        }
        Ok(Diagonalization { rows, cols, left: p, right: q, diag })
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[i128] {
        &self.diag
    }

    /// Solve `A·x ≡ num/den (mod 1)` exactly; `None` when inconsistent.
    pub fn solve_mod_one(&self, num: &[i128], den: i128) -> Result<Option<Vec<Turn>>> {
        assert_eq!(num.len(), self.rows);
        let mut rt = vec![0i128; self.rows];
        for (i, row) in self.left.iter().enumerate() {
            let mut acc = 0i128;
            for (&pij, &nj) in row.iter().zip(num) {
                if pij != 0 && nj != 0 {
                    acc = checked(acc.checked_add(checked(pij.checked_mul(nj))?))?;
                }
            }
            rt[i] = acc;
        }
        if rt[self.rank()..].iter().any(|r| r.rem_euclid(den) != 0) {
            return Ok(None);
        }
        let l = self.diag.iter().fold(1i128, |acc, s| acc.lcm(s));
        let y: Vec<i128> =
            self.diag.iter().zip(&rt).map(|(s, r)| checked(r.checked_mul(l / s))).collect::<Result<_>>()?;
        let total = checked(den.checked_mul(l))?;
        let total_u = u64::try_from(total).map_err(|_| Error::Overflow("turn denominator"))?;
        let mut x = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let mut acc = 0i128;
            for (i, &yi) in y.iter().enumerate() {
                let qji = self.right[j][i];
                if qji != 0 && yi != 0 {
                    let term = checked(qji.checked_mul(yi))?.rem_euclid(total);
                    acc = (acc + term).rem_euclid(total);
                }
            }
            x.push(Turn::new(acc, total_u)?);
        }
        Ok(Some(x))
    }

    /// Floating-point variant of [`Self::solve_mod_one`] for real turns.
    pub fn solve_mod_one_f64(&self, r: &[f64], tol: f64) -> Option<Vec<f64>> {
        assert_eq!(r.len(), self.rows);
        let rt: Vec<(f64, f64)> = self
            .left
            .iter()
            .map(|row| {
                let v: f64 = row.iter().zip(r).map(|(&p, &x)| p as f64 * x).sum();
                let mag: f64 = row.iter().map(|&p| (p as f64).abs()).sum();
                (v, mag.max(1.0))
            })
            .collect();
        for &(v, mag) in &rt[self.rank()..] {
            if (v - libm::round(v)).abs() > tol * mag {
                return None;
            }
        }
        let y: Vec<f64> = self.diag.iter().zip(&rt).map(|(&s, &(v, _))| v / s as f64).collect();
        Some(
            (0..self.cols)
                .map(|j| {
                    let v: f64 = y.iter().enumerate().map(|(i, yi)| self.right[j][i] as f64 * yi).sum();
                    v - libm::floor(v)
                })
                .collect(),
        )
    }
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect()
}

fn min_entry(m: &[Vec<i128>], r0: usize, c0: usize, rows: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for (i, row) in m.iter().enumerate().take(rows).skip(r0) {
        for (j, &x) in row.iter().enumerate().take(cols).skip(c0) {
            if x != 0 && best.is_none_or(|(b, _, _)| x.abs() < b) {
                best = Some((x.abs(), i, j));
                if x.abs() == 1 {
                    return Some((i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

fn row_sub(m: &mut [Vec<i128>], target: usize, src: usize, f: i128) -> Result<()> {
    let s = m[src].clone();
    for (x, &y) in m[target].iter_mut().zip(&s) {
        if y != 0 {
            *x = checked(x.checked_sub(checked(y.checked_mul(f))?))?;
        }
    }
    Ok(())
}

fn col_sub(m: &mut [Vec<i128>], target: usize, src: usize, f: i128) -> Result<()> {
    for row in m.iter_mut() {
        if row[src] != 0 {
            row[target] = checked(row[target].checked_sub(checked(row[src].checked_mul(f))?))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let n = b[0].len();
        a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
    }

    #[test]
    fn reproduces_diagonal() {
        let a = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let dz = Diagonalization::new(&a, 3).unwrap();
        let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let d = mul(&mul(&dz.left, &a128), &dz.right);
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i != j {
                    assert_eq!(x, 0);
                }
            }
        }
        let det: i128 = dz.diagonal().iter().product();
        assert_eq!(det.abs(), 144);
    }

    #[test]
    fn modular_solve() {
        // 2x ≡ 1/2 (mod 1) → x = 1/4 (or 3/4)
        let dz = Diagonalization::new(&[vec![2]], 1).unwrap();
        let x = dz.solve_mod_one(&[1], 2).unwrap().unwrap();
        assert_eq!(x[0].scale(2), Turn::new(1, 2).unwrap());
        // x + y ≡ 0, x + y ≡ 1/3 is inconsistent
        let dz = Diagonalization::new(&[vec![1, 1], vec![1, 1]], 2).unwrap();
        assert!(dz.solve_mod_one(&[0, 1], 3).unwrap().is_none());
        assert!(dz.solve_mod_one(&[1, 1], 3).unwrap().is_some());
        assert!(dz.solve_mod_one_f64(&[0.2, 1.2], 1e-12).is_some());
        assert!(dz.solve_mod_one_f64(&[0.2, 0.7], 1e-12).is_none());
    }
}
