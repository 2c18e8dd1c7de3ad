//! Dense tables over subsequence intervals.

/// Packed index over intervals `[i, j]`, `1 <= i <= j <= n`, span-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    n: usize,
}

impl Triangle {
    pub fn new(n: usize) -> Self {
        Triangle { n }
    }

    pub fn len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Offset of `[i, i + d]`: intervals of span `d` occupy a contiguous block.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i <= j && j <= self.n, "interval [{i},{j}] outside 1..={}", self.n);
        let d = j - i;
        // blocks for spans 0..d hold n, n-1, ..., n-d+1 entries
        d * self.n - d * (d.saturating_sub(1)) / 2 + (i - 1)
    }
}

/// 4D table `Q[i, j; h, l]` over pairs of intervals of R (length `n`) and S (length `m`).
#[derive(Clone, Debug)]
pub struct Tensor4 {
    tri_r: Triangle,
    tri_s: Triangle,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize, m: usize) -> Self {
        let (tri_r, tri_s) = (Triangle::new(n), Triangle::new(m));
        Tensor4 { tri_r, tri_s, data: vec![0.0; tri_r.len() * tri_s.len()] }
    }

    pub fn cells(n: usize, m: usize) -> usize {
        Triangle::new(n).len() * Triangle::new(m).len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.tri_r.n, self.tri_s.n)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, h: usize, l: usize) -> usize {
        self.tri_r.index(i, j) * self.tri_s.len() + self.tri_s.index(h, l)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, h: usize, l: usize) -> f64 {
        self.data[self.offset(i, j, h, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, h: usize, l: usize, v: f64) {
        let o = self.offset(i, j, h, l);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, h: usize, l: usize, v: f64) {
        let o = self.offset(i, j, h, l);
        self.data[o] += v;
    }

    pub fn bytes(&self) -> usize {
        self.data.capacity() * std::mem::size_of::<f64>()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// 2D table over intervals `[a, b]` with `1 <= a <= b + 1`, `b <= n`; `b = a - 1` is the empty interval.
#[derive(Clone, Debug)]
pub struct Mat2 {
    n: usize,
    data: Vec<f64>,
}

impl Mat2 {
    pub fn zeros(n: usize) -> Self {
        Mat2 { n, data: vec![0.0; (n + 2) * (n + 1)] }
    }

    #[inline]
    fn offset(&self, a: usize, b: usize) -> usize {
        debug_assert!(a >= 1 && a <= b + 1 && b <= self.n, "interval [{a},{b}] outside 1..={}", self.n);
        a * (self.n + 1) + b
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[self.offset(a, b)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        let o = self.offset(a, b);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, a: usize, b: usize, v: f64) {
        let o = self.offset(a, b);
        self.data[o] += v;
    }

    pub fn bytes(&self) -> usize {
        self.data.capacity() * std::mem::size_of::<f64>()
    }

    pub fn len_bytes(n: usize) -> usize {
        (n + 2) * (n + 1) * std::mem::size_of::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_index_is_a_bijection() {
        for n in 1..9 {
            let t = Triangle::new(n);
            let mut seen = vec![false; t.len()];
            for i in 1..=n {
                for j in i..=n {
                    let k = t.index(i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn tensor_roundtrip() {
        let mut t = Tensor4::zeros(4, 3);
        t.set(2, 4, 1, 3, 1.5);
        t.add(2, 4, 1, 3, 1.0);
        assert_eq!(t.get(2, 4, 1, 3), 2.5);
        assert_eq!(t.get(1, 4, 1, 3), 0.0);
        assert_eq!(Tensor4::cells(4, 3), 10 * 6);
    }

    #[test]
    fn mat2_allows_empty_intervals() {
        let mut m = Mat2::zeros(3);
        m.set(4, 3, 1.0);
        m.set(1, 0, 2.0);
        assert_eq!(m.get(4, 3), 1.0);
        assert_eq!(m.get(1, 0), 2.0);
    }
}
