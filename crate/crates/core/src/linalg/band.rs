use num_complex::Complex64;

/// Complex Hermitian band matrix, lower band storage: `lower[i][d]` is the
/// entry at row `i`, column `i - d`.
///
/// Eigenvalues are located by bisection on inertia counts. The count of
/// eigenvalues below `σ` is the number of negative pivots in the `LDL*`
/// factorization of `A − σ`, which by Sylvester's law of inertia does not
/// depend on the congruence used.
#[derive(Clone, Debug)]
pub struct HermitianBand {
    n: usize,
    bandwidth: usize,
    lower: Vec<Vec<Complex64>>,
}

impl HermitianBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let lower = (0..n).map(|i| vec![Complex64::new(0.0, 0.0); bandwidth.min(i) + 1]).collect();
        Self { n, bandwidth, lower }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Sets `(i, j)` and its conjugate. Diagonal entries keep only the real part.
    ///
    /// # Panics
    /// If `|i - j|` exceeds the bandwidth.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        let (r, c, v) = if i >= j { (i, j, value) } else { (j, i, value.conj()) };
        let d = r - c;
        assert!(d <= self.bandwidth, "entry ({i},{j}) outside bandwidth");
        self.lower[r][d] = if d == 0 { Complex64::new(v.re, 0.0) } else { v };
    }

    pub fn add(&mut self, i: usize, j: usize, value: Complex64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + value);
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (r, c, conj) = if i >= j { (i, j, false) } else { (j, i, true) };
        let d = r - c;
        if d > self.bandwidth || d >= self.lower[r].len() {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.lower[r][d];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for (r, row) in self.lower.iter().enumerate() {
            for (d, v) in row.iter().enumerate().skip(1) {
                radius[r] += v.norm();
                radius[r - d] += v.norm();
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (r, row) in self.lower.iter().enumerate() {
            lo = lo.min(row[0].re - radius[r]);
            hi = hi.max(row[0].re + radius[r]);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let b = self.bandwidth;
        let w = b + 1;
        let tiny = f64::EPSILON * f64::EPSILON * self.scale();
        let zero = Complex64::new(0.0, 0.0);
        // l[j * w + (j - k)] holds L[j][k] for the band below the diagonal
        let mut pivots = vec![0.0f64; self.n];
        let mut l = vec![zero; self.n * w];
        let mut count = 0;
        for j in 0..self.n {
            let lo = j.saturating_sub(b);
            for k in lo..j {
                let mut s = self.lower[j][j - k];
                for m in k.saturating_sub(b).max(lo)..k {
                    s -= l[j * w + (j - m)] * l[k * w + (k - m)].conj() * pivots[m];
                }
                l[j * w + (j - k)] = s / pivots[k];
            }
            let mut dj = self.lower[j][0].re - sigma;
            for k in lo..j {
                dj -= l[j * w + (j - k)].norm_sqr() * pivots[k];
            }
            if dj.abs() < tiny {
                dj = -tiny;
            }
            if dj < 0.0 {
                count += 1;
            }
            pivots[j] = dj;
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection to absolute
    /// tolerance `atol`.
    pub fn eigenvalue(&self, k: usize, atol: f64) -> f64 {
        let (lo, hi) = self.padded_bounds();
        self.bisect(k, lo, hi, atol)
    }

    fn padded_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.gershgorin();
        let pad = 4.0 * f64::EPSILON * self.scale();
        (lo - pad, hi + pad)
    }

    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64, atol: f64) -> f64 {
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= atol || mid <= lo || mid >= hi {
                return mid;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// The `count` smallest eigenvalues.
    pub fn lowest_eigenvalues(&self, count: usize, atol: f64) -> Vec<f64> {
        self.lowest_eigenvalues_below(count, atol, f64::INFINITY)
    }

    /// The `count` smallest eigenvalues, given a value `hint` believed to lie
    /// above all of them. A wrong hint only costs time.
    pub fn lowest_eigenvalues_below(&self, count: usize, atol: f64, hint: f64) -> Vec<f64> {
        let count = count.min(self.n);
        if count == 0 {
            return Vec::new();
        }
        let (glo, ghi) = self.padded_bounds();
        let mut top = ghi;
        if hint < ghi && hint > glo && self.count_below(hint) >= count {
            top = hint;
        }
        // Every count narrows the brackets of all indices at once.
        let mut lo = vec![glo; count];
        let mut hi = vec![top; count];
        for k in 0..count {
            loop {
                let mid = 0.5 * (lo[k] + hi[k]);
                if hi[k] - lo[k] <= atol || mid <= lo[k] || mid >= hi[k] {
                    break;
                }
                let c = self.count_below(mid);
                for i in k..count {
                    if c > i {
                        hi[i] = hi[i].min(mid);
                    } else {
                        lo[i] = lo[i].max(mid);
                    }
                }
            }
            if k + 1 < count {
                lo[k + 1] = lo[k + 1].max(lo[k]);
            }
        }
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// Ordering that folds a ring of `n` nodes onto a line so that ring
/// neighbours at distance `≤ b` land at band distance `≤ 2b`:
/// `0, 1, n−1, 2, n−2, …`. Returns the position of each ring node.
pub fn fold_ring(n: usize) -> Vec<usize> {
    let mut pos = vec![0usize; n];
    let mut next = 1;
    let mut k = 1;
    while next < n {
        pos[k] = next;
        next += 1;
        if next < n && n - k != k {
            pos[n - k] = next;
            next += 1;
        }
        k += 1;
    }
    pos
}
