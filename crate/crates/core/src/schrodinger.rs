//! Finite-difference Schrödinger operators `−Δ + V` on boxes tiled by
//! cubes of side `G`, and equidistributed sets of small balls.
//!
//! Grid vectors are stored in symmetric coordinates `y_i = √w_i · u_i`, with
//! `w_i` the trapezoid weight of node `i`. In these coordinates the discrete
//! operator is a symmetric matrix and the Euclidean norm of `y` equals the
//! discrete L² norm of `u`.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

const LATTICE_TOL: f64 = 1e-9;

fn integer_ratio(x: f64, unit: f64) -> Option<usize> {
    let r = x / unit;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= LATTICE_TOL * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

/// Box `∏ (αᵢ, βᵢ)` whose side lengths are positive integer multiples of `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    g: f64,
}

impl AdmissibleDomain {
    pub fn new(lower: &[f64], upper: &[f64], g: f64) -> Result<Self> {
        Self::with_truncation(lower, upper, g, None)
    }

    /// Like [`new`](Self::new), but infinite endpoints are replaced by a box
    /// of side `truncation`: a half-line `(α, ∞)` becomes `(α, α + T)` and
    /// the full line becomes `(−T/2, T/2)`.
    pub fn with_truncation(lower: &[f64], upper: &[f64], g: f64, truncation: Option<f64>) -> Result<Self> {
        let d = lower.len();
        if !(1..=2).contains(&d) {
            return Err(Error::InvalidParameter { name: "dimension", reason: format!("{d} not in {{1, 2}}") });
        }
        if upper.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: upper.len() });
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter { name: "G", reason: format!("{g} must be positive") });
        }
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for i in 0..d {
            if lo[i].is_infinite() || hi[i].is_infinite() {
                let t = truncation.ok_or_else(|| Error::InvalidParameter {
                    name: "truncation",
                    reason: format!("axis {i} is unbounded and no truncation length is set"),
                })?;
                match (lo[i].is_finite(), hi[i].is_finite()) {
                    (true, false) => hi[i] = lo[i] + t,
                    (false, true) => lo[i] = hi[i] - t,
                    _ => {
                        lo[i] = -0.5 * t;
                        hi[i] = 0.5 * t;
                    }
                }
            }
            if lo[i].is_nan() || hi[i].is_nan() {
                return Err(Error::InvalidParameter { name: "extent", reason: "NaN endpoint".into() });
            }
            let len = hi[i] - lo[i];
            if len < g * (1.0 - LATTICE_TOL) {
                return Err(Error::InvalidParameter {
                    name: "extent",
                    reason: format!("axis {i} has length {len} < G = {g}"),
                });
            }
            if integer_ratio(len, g).is_none() {
                return Err(Error::InvalidParameter {
                    name: "extent",
                    reason: format!("axis {i} length {len} is not an integer multiple of G = {g}"),
                });
            }
        }
        Ok(Self { lower: lo, upper: hi, g })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.length(i)).product()
    }

    /// Cells per axis.
    pub fn cells_per_axis(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| integer_ratio(self.length(i), self.g).unwrap_or(1)).collect()
    }

    /// Lower corner of every cell, axis 0 varying fastest.
    pub fn cell_corners(&self) -> Vec<Vec<f64>> {
        let counts = self.cells_per_axis();
        let total: usize = counts.iter().product();
        (0..total)
            .map(|mut flat| {
                (0..self.dim())
                    .map(|ax| {
                        let j = flat % counts[ax];
                        flat /= counts[ax];
                        self.lower[ax] + j as f64 * self.g
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

/// Uniform mesh of an admissible domain.
///
/// Dirichlet grids carry the interior nodes only; Neumann grids include the
/// boundary nodes, whose trapezoid weight is halved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    h: f64,
    boundary: Boundary,
    lower: Vec<f64>,
    counts: Vec<usize>,
    first: usize,
}

impl Grid {
    pub fn new(dom: &AdmissibleDomain, h: f64, boundary: Boundary) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter { name: "h", reason: format!("{h} must be positive") });
        }
        if integer_ratio(dom.g(), h).is_none() {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("mesh width {h} does not divide G = {}", dom.g()),
            });
        }
        let mut counts = Vec::with_capacity(dom.dim());
        for ax in 0..dom.dim() {
            let m = integer_ratio(dom.length(ax), h).unwrap_or(0);
            let nodes = match boundary {
                Boundary::Dirichlet => m.saturating_sub(1),
                Boundary::Neumann => m + 1,
            };
            if nodes < 3 {
                return Err(Error::CoarseResolution(format!("axis {ax} has {nodes} nodes, need at least 3")));
            }
            counts.push(nodes);
        }
        let first = match boundary {
            Boundary::Dirichlet => 1,
            Boundary::Neumann => 0,
        };
        Ok(Self { h, boundary, lower: dom.lower().to_vec(), counts, first })
    }

    /// Grid with `points_per_unit` mesh cells per unit length.
    pub fn with_resolution(dom: &AdmissibleDomain, points_per_unit: usize, boundary: Boundary) -> Result<Self> {
        Self::new(dom, 1.0 / points_per_unit as f64, boundary)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis node indices of the flat index `k` (axis 0 fastest).
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        self.counts
            .iter()
            .map(|&c| {
                let i = k % c;
                k /= c;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        let mut stride = 1;
        for (ax, &i) in idx.iter().enumerate() {
            k += i * stride;
            stride *= self.counts[ax];
        }
        k
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i + self.first) as f64 * self.h
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        self.multi_index(k).iter().enumerate().map(|(ax, &i)| self.axis_coord(ax, i)).collect()
    }

    fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        match self.boundary {
            Boundary::Neumann if i == 0 || i + 1 == self.counts[axis] => 0.5 * self.h,
            _ => self.h,
        }
    }

    /// Trapezoid weight of node `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.multi_index(k).iter().enumerate().map(|(ax, &i)| self.axis_weight(ax, i)).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.weight(k)).collect()
    }

    /// Samples `u` to symmetric coordinates `y = √w u`.
    pub fn from_samples(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        Ok(u.iter().enumerate().map(|(k, x)| x * self.weight(k).sqrt()).collect())
    }

    /// Inverse of [`from_samples`](Self::from_samples).
    pub fn to_samples(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok(y.iter().enumerate().map(|(k, x)| x / self.weight(k).sqrt()).collect())
    }

    /// Evaluates `f` at every node and returns the symmetric-coordinate vector.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(&self.coords(k)) * self.weight(k).sqrt()).collect()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::GridMismatch(format!("vector of length {n} on a grid of {} nodes", self.len())));
        }
        Ok(())
    }

    fn axis_stencil(&self, axis: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.counts[axis];
        let h2 = self.h * self.h;
        let diag = vec![2.0 / h2; n];
        let mut off = vec![-1.0 / h2; n - 1];
        if self.boundary == Boundary::Neumann {
            // mirrored ghost node, symmetrized with the half boundary weight
            off[0] = -std::f64::consts::SQRT_2 / h2;
            off[n - 2] = -std::f64::consts::SQRT_2 / h2;
        }
        (diag, off)
    }

    /// Discrete `−Δ` in symmetric coordinates.
    pub fn laplacian(&self) -> SymmetricMatrix {
        if self.dim() == 1 {
            let (d, o) = self.axis_stencil(0);
            let mut m = SymmetricMatrix::zeros(d.len(), 1);
            for (i, v) in d.iter().enumerate() {
                m.set(i, i, *v);
            }
            for (i, v) in o.iter().enumerate() {
                m.set(i + 1, i, *v);
            }
            return m;
        }
        let (nx, ny) = (self.counts[0], self.counts[1]);
        let (dx, ox) = self.axis_stencil(0);
        let (dy, oy) = self.axis_stencil(1);
        let mut m = SymmetricMatrix::zeros(nx * ny, nx);
        for j in 0..ny {
            for i in 0..nx {
                let k = i + nx * j;
                m.set(k, k, dx[i] + dy[j]);
                if i + 1 < nx {
                    m.set(k + 1, k, ox[i]);
                }
                if j + 1 < ny {
                    m.set(k + nx, k, oy[j]);
                }
            }
        }
        m
    }

    /// Discrete Dirichlet energy `∫ |∇u|²` of a symmetric-coordinate vector,
    /// summed over grid edges.
    pub fn gradient_energy(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y.len())?;
        Ok(self.laplacian().quadratic_form(y))
    }
}

/// Real potential sampled on the nodes of a grid, with cached statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    values: Vec<f64>,
    stats: PotentialStats,
}

/// `min V`, `max V` and `‖V‖_∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialStats {
    pub min: f64,
    pub max: f64,
    pub sup: f64,
}

impl PotentialStats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { min: 0.0, max: 0.0, sup: 0.0 };
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max, sup: min.abs().max(max.abs()) }
    }

    pub fn constant(c: f64) -> Self {
        Self { min: c, max: c, sup: c.abs() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        let (min, max) = (self.min + c, self.max + c);
        Self { min, max, sup: min.abs().max(max.abs()) }
    }

    /// `‖V − λ‖_∞`
    pub fn deviation(&self, lambda: f64) -> f64 {
        (lambda - self.min).max(self.max - lambda).max(0.0)
    }
}

impl PotentialField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "potential", reason: "non-finite value".into() });
        }
        let stats = PotentialStats::of(&values);
        Ok(Self { values, stats })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..grid.len()).map(|k| f(&grid.coords(k))).collect())
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self { values: vec![c; grid.len()], stats: PotentialStats::constant(c) }
    }

    /// `a · Σᵢ cos(2π xᵢ / period + φ)`.
    pub fn cosine(grid: &Grid, amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter { name: "period", reason: format!("{period}") });
        }
        let k = 2.0 * std::f64::consts::PI / period;
        Self::from_fn(grid, |x| amplitude * x.iter().map(|xi| (k * xi + phase).cos()).sum::<f64>())
    }

    /// Independent uniform value in `[−amplitude, amplitude]` on each `G`-cell.
    pub fn piecewise_random(dom: &AdmissibleDomain, grid: &Grid, amplitude: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = dom.cells_per_axis();
        let total: usize = counts.iter().product();
        let cell_values: Vec<f64> = (0..total).map(|_| rng.gen_range(-1.0..=1.0) * amplitude).collect();
        Self::from_fn(grid, |x| {
            let mut flat = 0;
            let mut stride = 1;
            for ax in 0..dom.dim() {
                let j = ((x[ax] - dom.lower()[ax]) / dom.g()).floor().clamp(0.0, (counts[ax] - 1) as f64) as usize;
                flat += j * stride;
                stride *= counts[ax];
            }
            cell_values[flat]
        })
    }

    /// Reads rows `i[, j], value` addressed by grid node index. Every node
    /// must be assigned; a leading header row is skipped.
    pub fn from_csv_reader(grid: &Grid, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let d = grid.dim();
        let mut values = vec![f64::NAN; grid.len()];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::Config(format!("potential csv line {}: expected {} columns", line + 1, d + 1)));
            }
            let idx: std::result::Result<Vec<usize>, _> = (0..d).map(|a| rec[a].parse::<usize>()).collect();
            let idx = match idx {
                Ok(i) => i,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Config(format!("potential csv line {}: {e}", line + 1))),
            };
            let v: f64 = rec[d]
                .parse()
                .map_err(|e| Error::Config(format!("potential csv line {}: {e}", line + 1)))?;
            if idx.iter().zip(grid.counts()).any(|(i, c)| i >= c) {
                return Err(Error::GridMismatch(format!("potential csv line {}: node {idx:?} out of range", line + 1)));
            }
            values[grid.flat_index(&idx)] = v;
        }
        if let Some(k) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::GridMismatch(format!("potential csv misses node {:?}", grid.multi_index(k))));
        }
        Self::new(values)
    }

    pub fn from_csv(grid: &Grid, path: &Path) -> Result<Self> {
        Self::from_csv_reader(grid, std::fs::File::open(path)?)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stats(&self) -> PotentialStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, other: &PotentialField) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// Multiplication operator as a diagonal matrix.
    pub fn as_operator(&self) -> SymmetricMatrix {
        SymmetricMatrix::diagonal(&self.values)
    }
}

/// `H = −Δ + V` on the grid, in symmetric coordinates.
pub fn build_hamiltonian(dom: &AdmissibleDomain, grid: &Grid, v: &PotentialField) -> Result<SymmetricMatrix> {
    if dom.dim() != grid.dim() || dom.lower() != grid.lower.as_slice() {
        return Err(Error::GridMismatch("grid was built for a different domain".into()));
    }
    grid.check_len(v.len())?;
    let mut h = grid.laplacian();
    for (k, val) in v.values().iter().enumerate() {
        h.set(k, k, h.get(k, k) + val);
    }
    Ok(h)
}

/// One ball `B(z_j, δ)` per `G`-cell, each contained in its cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistributedSet {
    g: f64,
    delta: f64,
    centers: Vec<Vec<f64>>,
    cells: Vec<Vec<f64>>,
}

impl EquidistributedSet {
    /// Explicit centers; `centers[j]` must lie in the cell with lower corner
    /// `dom.cell_corners()[j]`, at distance at least `δ` from its faces.
    pub fn from_centers(dom: &AdmissibleDomain, delta: f64, centers: Vec<Vec<f64>>) -> Result<Self> {
        check_delta(dom.g(), delta)?;
        let cells = dom.cell_corners();
        if centers.len() != cells.len() {
            return Err(Error::DimensionMismatch { expected: cells.len(), found: centers.len() });
        }
        let slack = 1e-12 * dom.g();
        for (z, c) in centers.iter().zip(&cells) {
            if z.len() != dom.dim() {
                return Err(Error::DimensionMismatch { expected: dom.dim(), found: z.len() });
            }
            for ax in 0..dom.dim() {
                if z[ax] < c[ax] + delta - slack || z[ax] > c[ax] + dom.g() - delta + slack {
                    return Err(Error::InvalidParameter {
                        name: "centers",
                        reason: format!("ball around {z:?} leaves its cell"),
                    });
                }
            }
        }
        Ok(Self { g: dom.g(), delta, centers, cells })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn cell_corners(&self) -> &[Vec<f64>] {
        &self.cells
    }

    /// Same centers with a different radius; the new balls must still fit.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        check_delta(self.g, delta)?;
        for (z, c) in self.centers.iter().zip(&self.cells) {
            for ax in 0..z.len() {
                let lo = z[ax] - c[ax];
                let hi = c[ax] + self.g - z[ax];
                if lo.min(hi) < delta * (1.0 - 1e-12) {
                    return Err(Error::InvalidParameter { name: "delta", reason: "ball leaves its cell".into() });
                }
            }
        }
        Ok(Self { delta, ..self.clone() })
    }

    /// Membership of each grid node: 1 inside a ball, ½ on its boundary
    /// sphere, 0 outside. The half weight turns sums over the mask into the
    /// trapezoid rule on intervals whose endpoints are nodes.
    pub fn mask(&self, grid: &Grid) -> Mask {
        let tol = 1e-9 * grid.h();
        let values = (0..grid.len())
            .map(|k| {
                let x = grid.coords(k);
                let mut m: f64 = 0.0;
                for z in &self.centers {
                    let r = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if r < self.delta - tol {
                        m = 1.0;
                        break;
                    } else if r <= self.delta + tol {
                        m = m.max(0.5);
                    }
                }
                m
            })
            .collect();
        Mask { values }
    }
}

fn check_delta(g: f64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5 * g) {
        return Err(Error::InvalidParameter { name: "delta", reason: format!("{delta} not in (0, G/2) with G = {g}") });
    }
    Ok(())
}

/// Node weights of `S_{δ,Z}` on a particular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    values: Vec<f64>,
}

impl Mask {
    /// Mask equal to one on every node.
    pub fn full(n: usize) -> Self {
        Self { values: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn covered_nodes(&self) -> usize {
        self.values.iter().filter(|&&m| m > 0.0).count()
    }

    /// `ϑ · 1_S` as a diagonal operator.
    pub fn as_operator(&self, theta: f64) -> SymmetricMatrix {
        SymmetricMatrix::diagonal(&self.values.iter().map(|m| theta * m).collect::<Vec<_>>())
    }
}

/// Centers drawn uniformly from each cell shrunk by `δ` on every side.
pub fn sample_equidistributed(dom: &AdmissibleDomain, delta: f64, seed: u64) -> Result<EquidistributedSet> {
    check_delta(dom.g(), delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = dom.g() - 2.0 * delta;
    let centers = dom
        .cell_corners()
        .iter()
        .map(|c| c.iter().map(|&lo| lo + delta + rng.gen::<f64>() * slack).collect())
        .collect();
    EquidistributedSet::from_centers(dom, delta, centers)
}

/// `Σ_{nodes in S} w |u|²` for a symmetric-coordinate vector.
pub fn restricted_mass(psi: &[f64], mask: &Mask) -> Result<f64> {
    if psi.len() != mask.len() {
        return Err(Error::GridMismatch(format!("vector of length {} vs mask of {}", psi.len(), mask.len())));
    }
    Ok(psi.iter().zip(mask.values()).map(|(y, m)| m * y * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigendecompose, eigenvalues};
    use std::f64::consts::PI;

    fn unit_interval() -> AdmissibleDomain {
        AdmissibleDomain::new(&[0.0], &[1.0], 1.0).unwrap()
    }

    #[test]
    fn domain_validation() {
        assert!(AdmissibleDomain::new(&[0.0], &[0.5], 1.0).is_err());
        assert!(AdmissibleDomain::new(&[0.0], &[2.5], 1.0).is_err());
        assert!(AdmissibleDomain::new(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 1.0).is_err());
        let d = AdmissibleDomain::new(&[0.0, -1.0], &[3.0, 1.0], 1.0).unwrap();
        assert_eq!(d.cells_per_axis(), vec![3, 2]);
        assert_eq!(d.cell_corners().len(), 6);
    }

    #[test]
    fn truncation_knob() {
        assert!(AdmissibleDomain::new(&[0.0], &[f64::INFINITY], 1.0).is_err());
        let d = AdmissibleDomain::with_truncation(&[0.0], &[f64::INFINITY], 1.0, Some(6.0)).unwrap();
        assert_eq!(d.upper(), &[6.0]);
        let d = AdmissibleDomain::with_truncation(&[f64::NEG_INFINITY], &[f64::INFINITY], 1.0, Some(4.0)).unwrap();
        assert_eq!((d.lower()[0], d.upper()[0]), (-2.0, 2.0));
    }

    #[test]
    fn coarse_grid_rejected() {
        let dom = unit_interval();
        assert!(matches!(Grid::new(&dom, 0.5, Boundary::Dirichlet), Err(Error::CoarseResolution(_))));
        assert!(Grid::new(&dom, 0.25, Boundary::Dirichlet).is_ok());
        assert!(Grid::new(&dom, 0.3, Boundary::Dirichlet).is_err());
    }

    #[test]
    fn dirichlet_ground_state() {
        let dom = unit_interval();
        let grid = Grid::with_resolution(&dom, 512, Boundary::Dirichlet).unwrap();
        let h = build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap();
        let ev = eigenvalues(&h).unwrap();
        assert!((ev[0] - PI * PI).abs() / (PI * PI) < 1e-4);
    }

    #[test]
    fn neumann_zero_mode_is_constant() {
        let dom = unit_interval();
        let grid = Grid::with_resolution(&dom, 64, Boundary::Neumann).unwrap();
        let h = build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap();
        let dec = eigendecompose(&h).unwrap();
        assert!(dec.eigenvalue(0).abs() < 1e-10);
        let u = grid.to_samples(&dec.eigenvector(0)).unwrap();
        let spread = u.iter().fold(0.0f64, |m, x| m.max((x - u[0]).abs()));
        assert!(spread < 1e-10);
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let dom = AdmissibleDomain::new(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        let grid = Grid::with_resolution(&dom, 8, Boundary::Dirichlet).unwrap();
        let e0 = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap()).unwrap();
        let e1 = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::constant(&grid, 3.5)).unwrap()).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert!((b - a - 3.5).abs() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_dirichlet_ground_state() {
        // separable: λ₁ on the unit square is 2λ₁ of the interval
        let dom = AdmissibleDomain::new(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        let grid = Grid::with_resolution(&dom, 16, Boundary::Dirichlet).unwrap();
        let e2 = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap()).unwrap();
        let dom1 = unit_interval();
        let g1 = Grid::with_resolution(&dom1, 16, Boundary::Dirichlet).unwrap();
        let e1 = eigenvalues(&build_hamiltonian(&dom1, &g1, &PotentialField::zero(&g1)).unwrap()).unwrap();
        assert!((e2[0] - 2.0 * e1[0]).abs() < 1e-9);
    }

    #[test]
    fn sampled_centers_stay_in_shrunk_cells() {
        let dom = AdmissibleDomain::new(&[0.0], &[8.0], 1.0).unwrap();
        let s = sample_equidistributed(&dom, 0.2, 7).unwrap();
        assert_eq!(s.centers().len(), 8);
        for (j, z) in s.centers().iter().enumerate() {
            assert!(z[0] >= j as f64 + 0.2 && z[0] <= j as f64 + 0.8);
        }
        let again = sample_equidistributed(&dom, 0.2, 7).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn near_half_cell_radius_forces_centers() {
        let dom = AdmissibleDomain::new(&[0.0], &[3.0], 1.0).unwrap();
        let s = sample_equidistributed(&dom, 0.5 - 1e-13, 1).unwrap();
        for (j, z) in s.centers().iter().enumerate() {
            assert!((z[0] - (j as f64 + 0.5)).abs() < 1e-12);
        }
        assert!(sample_equidistributed(&dom, 0.5, 1).is_err());
        assert!(sample_equidistributed(&dom, 0.0, 1).is_err());
    }

    #[test]
    fn restricted_mass_of_sine_on_middle_quarter() {
        let dom = unit_interval();
        let grid = Grid::with_resolution(&dom, 512, Boundary::Dirichlet).unwrap();
        let psi = grid.sample(|x| 2f64.sqrt() * (PI * x[0]).sin());
        let s = EquidistributedSet::from_centers(&dom, 0.125, vec![vec![0.5]]).unwrap();
        let mass = restricted_mass(&psi, &s.mask(&grid)).unwrap();
        let exact = |x: f64| x - (2.0 * PI * x).sin() / (2.0 * PI);
        let reference = exact(0.625) - exact(0.375);
        assert!((reference - 0.47508).abs() < 1e-5);
        assert!((mass - reference).abs() < 1e-5, "{mass} vs {reference}");
    }

    #[test]
    fn full_and_empty_masks() {
        let dom = unit_interval();
        let grid = Grid::with_resolution(&dom, 64, Boundary::Dirichlet).unwrap();
        let psi = grid.sample(|x| (3.0 * x[0]).cos());
        let total: f64 = psi.iter().map(|v| v * v).sum();
        assert_eq!(restricted_mass(&psi, &Mask::full(grid.len())).unwrap(), total);
        let s = EquidistributedSet::from_centers(&dom, 0.1, vec![vec![0.5]]).unwrap();
        let outside = grid.sample(|x| if (x[0] - 0.5).abs() > 0.2 { 1.0 } else { 0.0 });
        assert_eq!(restricted_mass(&outside, &s.mask(&grid)).unwrap(), 0.0);
        assert!(restricted_mass(&psi[1..], &s.mask(&grid)).is_err());
    }

    #[test]
    fn csv_potential_roundtrip() {
        let dom = AdmissibleDomain::new(&[0.0], &[1.0], 1.0).unwrap();
        let grid = Grid::with_resolution(&dom, 4, Boundary::Dirichlet).unwrap();
        let v = PotentialField::from_csv_reader(&grid, "i,value\n0,1.5\n1,-2\n2,0.25\n".as_bytes()).unwrap();
        assert_eq!(v.values(), &[1.5, -2.0, 0.25]);
        assert_eq!(v.stats().sup, 2.0);
        assert!(PotentialField::from_csv_reader(&grid, "0,1\n1,2\n".as_bytes()).is_err());
        assert!(PotentialField::from_csv_reader(&grid, "0,1\n1,2\n5,3\n".as_bytes()).is_err());
    }

    #[test]
    fn gradient_energy_of_linear_function() {
        // u = x on a Neumann grid: ∫₀¹ |u'|² = 1 exactly
        let dom = unit_interval();
        let grid = Grid::with_resolution(&dom, 16, Boundary::Neumann).unwrap();
        let y = grid.sample(|x| x[0]);
        assert!((grid.gradient_energy(&y).unwrap() - 1.0).abs() < 1e-12);
    }
}
