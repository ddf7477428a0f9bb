//! Dense box-shaped probability arrays over coefficient space.

use std::collections::BTreeMap;

use crate::colors::ColorPoint;

/// Row-major dense array over the integer box `lo .. lo + ext`.
#[derive(Clone, Debug)]
pub(crate) struct Grid {
    pub lo: Vec<i64>,
    pub ext: Vec<usize>,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(lo: Vec<i64>, ext: Vec<usize>) -> Self {
        let cells = ext.iter().product();
        Grid { lo, ext, data: vec![0.0; cells] }
    }

    pub fn point(c: &ColorPoint, w: f64) -> Self {
        let mut g = Grid::zeros(c.0.clone(), vec![1; c.dim()]);
        g.data[0] = w;
        g
    }

    pub fn from_entries<'a>(dim: usize, entries: impl Iterator<Item = (&'a ColorPoint, f64)> + Clone) -> Self {
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for (c, _) in entries.clone() {
            for i in 0..dim {
                lo[i] = lo[i].min(c.0[i]);
                hi[i] = hi[i].max(c.0[i]);
            }
        }
        let ext = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut g = Grid::zeros(lo, ext);
        for (c, p) in entries {
            let idx = g.index_of(&c.0);
            g.data[idx] += p;
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cells(&self) -> usize {
        self.data.len()
    }

    fn strides(ext: &[usize]) -> Vec<usize> {
        let d = ext.len();
        let mut s = vec![1; d];
        for i in (0..d.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * ext[i + 1];
        }
        s
    }

    pub fn index_of(&self, c: &[i64]) -> usize {
        let s = Self::strides(&self.ext);
        c.iter().zip(&self.lo).zip(&s).map(|((v, l), st)| (v - l) as usize * st).sum()
    }

    pub fn coords_of(&self, mut idx: usize) -> Vec<i64> {
        let s = Self::strides(&self.ext);
        let mut c = vec![0; self.dim()];
        for i in 0..self.dim() {
            c[i] = self.lo[i] + (idx / s[i]) as i64;
            idx %= s[i];
        }
        c
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn nonzero(&self) -> usize {
        self.data.iter().filter(|&&p| p != 0.0).count()
    }

    /// Convolution with a sparse kernel `(offset, weight)`.
    pub fn convolve(&self, kernel: &[(Vec<i64>, f64)]) -> Grid {
        let d = self.dim();
        let mut klo = vec![i64::MAX; d];
        let mut khi = vec![i64::MIN; d];
        for (k, _) in kernel {
            for i in 0..d {
                klo[i] = klo[i].min(k[i]);
                khi[i] = khi[i].max(k[i]);
            }
        }
        let out_lo: Vec<i64> = self.lo.iter().zip(&klo).map(|(a, b)| a + b).collect();
        let out_ext: Vec<usize> = (0..d).map(|i| self.ext[i] + (khi[i] - klo[i]) as usize).collect();
        let mut out = Grid::zeros(out_lo, out_ext);
        let out_strides = Self::strides(&out.ext);
        let row_len = self.ext[d - 1];
        let rows = self.cells() / row_len;
        // out index of the first cell of every input row
        let in_strides = Self::strides(&self.ext);
        let row_starts: Vec<usize> = (0..rows)
            .map(|r| {
                let mut rem = r * row_len;
                let mut idx = 0;
                for i in 0..d - 1 {
                    idx += (rem / in_strides[i]) * out_strides[i];
                    rem %= in_strides[i];
                }
                idx
            })
            .collect();
        for (k, w) in kernel {
            let off: usize = (0..d).map(|i| (k[i] - klo[i]) as usize * out_strides[i]).sum();
            for (r, &start) in row_starts.iter().enumerate() {
                let src = &self.data[r * row_len..(r + 1) * row_len];
                let dst = &mut out.data[start + off..start + off + row_len];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        out
    }

    /// Shrinks the box to the bounding box of non-zero cells.
    pub fn trim(&mut self) {
        let d = self.dim();
        let strides = Self::strides(&self.ext);
        let mut lo_off = self.ext.clone();
        let mut hi_off = vec![0usize; d];
        let mut any = false;
        for (idx, &p) in self.data.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            any = true;
            let mut rem = idx;
            for i in 0..d {
                let c = rem / strides[i];
                rem %= strides[i];
                lo_off[i] = lo_off[i].min(c);
                hi_off[i] = hi_off[i].max(c);
            }
        }
        if !any {
            *self = Grid::zeros(self.lo.clone(), vec![0; d]);
            return;
        }
        let new_ext: Vec<usize> = (0..d).map(|i| hi_off[i] - lo_off[i] + 1).collect();
        if new_ext == self.ext {
            return;
        }
        let new_lo: Vec<i64> = (0..d).map(|i| self.lo[i] + lo_off[i] as i64).collect();
        let mut out = Grid::zeros(new_lo, new_ext);
        let out_strides = Self::strides(&out.ext);
        for (idx, &p) in self.data.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut rem = idx;
            let mut o = 0;
            for i in 0..d {
                let c = rem / strides[i];
                rem %= strides[i];
                o += (c - lo_off[i]) * out_strides[i];
            }
            out.data[o] = p;
        }
        *self = out;
    }

    /// Non-zero cells as a sorted map.
    pub fn to_entries(&self) -> BTreeMap<ColorPoint, f64> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (ColorPoint(self.coords_of(i)), p))
            .collect()
    }

    /// Non-zero cells as a kernel list.
    pub fn to_kernel(&self) -> Vec<(Vec<i64>, f64)> {
        self.data.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(i, &p)| (self.coords_of(i), p)).collect()
    }

    /// Adds `w * other` into `self`; `self` must contain `other`'s box.
    pub fn add_scaled(&mut self, other: &Grid, w: f64) {
        for (i, &p) in other.data.iter().enumerate() {
            if p != 0.0 {
                let c = other.coords_of(i);
                let idx = self.index_of(&c);
                self.data[idx] += w * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_in_two_dimensions() {
        let g = Grid::point(&ColorPoint(vec![2, -1]), 1.0);
        let k = vec![(vec![1, 0], 0.5), (vec![0, -1], 0.25), (vec![-1, 3], 0.25)];
        let out = g.convolve(&k);
        let e = out.to_entries();
        assert_eq!(e.len(), 3);
        assert_eq!(e[&ColorPoint(vec![3, -1])], 0.5);
        assert_eq!(e[&ColorPoint(vec![2, -2])], 0.25);
        assert_eq!(e[&ColorPoint(vec![1, 2])], 0.25);
        let twice = out.convolve(&k);
        assert!((twice.sum() - 1.0).abs() < 1e-15);
        assert_eq!(twice.nonzero(), 6);
    }

    #[test]
    fn trim_keeps_entries() {
        let mut g = Grid::zeros(vec![-3, -3], vec![7, 7]);
        let i = g.index_of(&[0, 1]);
        g.data[i] = 0.5;
        let j = g.index_of(&[1, -2]);
        g.data[j] = 0.5;
        let before = g.to_entries();
        g.trim();
        assert_eq!(g.ext, vec![2, 4]);
        assert_eq!(g.lo, vec![0, -2]);
        assert_eq!(g.to_entries(), before);
    }
}
