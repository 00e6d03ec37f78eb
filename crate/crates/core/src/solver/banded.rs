//! Banded LU factorization without pivoting.
//!
//! The discretized operators are elliptic and close to diagonally dominant,
//! so Gaussian elimination in natural order is stable in practice; a pivot
//! that collapses relative to its row is reported instead of silently
//! producing garbage.

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored row-major.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku, "({r},{c}) outside band");
        r * self.width + c + self.kl - r
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c + self.kl < r || c > r + self.ku {
            return 0.0;
        }
        self.data[self.slot(r, c)]
    }

    /// Row `r` of the band as a mutable slice, plus the first column it covers.
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.width;
        &mut self.data[r * w..(r + 1) * w]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let c0 = r.saturating_sub(self.kl);
                let c1 = (r + self.ku).min(self.n - 1);
                (c0..=c1).map(|c| self.data[self.slot(r, c)] * x[c]).sum()
            })
            .collect()
    }

    /// In-place LU; fails with the offending row if a pivot collapses.
    pub fn factor(mut self) -> Result<BandLu, usize> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        let row_scale: Vec<f64> = (0..n)
            .map(|r| self.data[r * w..(r + 1) * w].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for p in 0..n {
            let piv = self.data[p * w + kl];
            if !(piv.abs() > 1e-13 * row_scale[p]) || !piv.is_finite() {
                return Err(p);
            }
            let cend = (p + ku).min(n - 1);
            let rend = (p + kl).min(n - 1);
            let len = cend - p;
            for r in p + 1..=rend {
                let (head, tail) = self.data.split_at_mut(r * w);
                let prow = &head[p * w + kl + 1..p * w + kl + 1 + len];
                let rrow = &mut tail[..w];
                let off = p + kl - r;
                let l = rrow[off] / piv;
                if l == 0.0 {
                    continue;
                }
                rrow[off] = l;
                for (dst, src) in rrow[off + 1..off + 1 + len].iter_mut().zip(prow) {
                    *dst -= l * src;
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, ku, width: w, ref data } = self.m;
        for r in 0..n {
            let c0 = r.saturating_sub(kl);
            let row = &data[r * w..];
            let mut acc = b[r];
            for c in c0..r {
                acc -= row[c + kl - r] * b[c];
            }
            b[r] = acc;
        }
        for r in (0..n).rev() {
            let c1 = (r + ku).min(n - 1);
            let row = &data[r * w..];
            let mut acc = b[r];
            for c in r + 1..=c1 {
                acc -= row[c + kl - r] * b[c];
            }
            b[r] = acc / row[kl];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_diagonally_dominant_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (200, 7, 5);
        let mut m = BandMatrix::zeros(n, kl, ku);
        for r in 0..n {
            let mut sum = 0.0;
            for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                if c != r {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m.add(r, c, v);
                    sum += v.abs();
                }
            }
            m.add(r, r, sum + 0.5);
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = m.matvec(&x);
        let lu = m.clone().factor().unwrap();
        lu.solve(&mut b);
        let err = b.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn reports_zero_pivot() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(2, 2, 1.0);
        assert_eq!(m.factor().unwrap_err(), 0);
    }
}
