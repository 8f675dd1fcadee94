//! Band LU factorization with partial pivoting (the `gbtrf`/`gbtrs` scheme).

use crate::fock::C64;

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// `kl` extra super-diagonals for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            return C64::new(0.0, 0.0);
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` at (i, j); (i, j) must lie within kl/ku of the diagonal.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Factors in place. A zero pivot is replaced by `tiny`, which keeps
    /// inverse iteration well defined on exactly singular shifts.
    pub fn factor(mut self, tiny: f64) -> BandLu {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| self.get(a, k).norm().total_cmp(&self.get(b, k).norm()))
                .unwrap_or(k);
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (sa, sb) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(sa, sb);
                }
            }
            let sk = self.slot(k, k);
            if self.data[sk].norm() == 0.0 {
                self.data[sk] = C64::new(tiny, 0.0);
            }
            let pivot = self.data[sk];
            for i in k + 1..=last_row {
                let si = self.slot(i, k);
                let l = self.data[si] / pivot;
                self.data[si] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = self.data[self.slot(k, j)];
                    let s = self.slot(i, j);
                    self.data[s] -= l * u;
                }
            }
        }
        BandLu { band: self, piv }
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    band: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    /// Overwrites `b` with A⁻¹b.
    pub fn solve(&self, b: &mut [C64]) {
        let a = &self.band;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        assert_eq!(b.len(), n, "right-hand side length");
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                b[i] -= a.data[a.slot(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= a.data[a.slot(k, j)] * b[j];
            }
            b[k] = acc / a.data[a.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn solves_like_dense() {
        let n = 9;
        let (kl, ku) = (2, 1);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces pivoting
                let v = if i == j {
                    C64::new(1e-3 * (i + 1) as f64, 0.1)
                } else {
                    C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, 0.5 * j as f64)
                };
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let rhs: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut x = rhs.clone();
        band.factor(1e-300).solve(&mut x);
        let back = &dense * DVector::from_vec(x);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
