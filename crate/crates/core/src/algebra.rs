//! 2×2×2 hypermatrices, SL(2,C) factors and the ε-contraction engine.
//!
//! Index convention: `ε^{01} = +1`, `ε^{10} = -1`, diagonal zero. Every
//! contraction in the crate goes through [`epsilon_contract`], which only
//! visits the 2⁶ index assignments where all six ε factors are nonzero.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::fano::Qubit;
use crate::rng;

/// Relative tolerance on `det g = 1` accepted by [`Sl2::new`].
pub const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),
    #[error("matrix is not unimodular: det = {0}")]
    NotUnimodular(Complex64),
    #[error("invalid contraction pattern: {0}")]
    InvalidPattern(String),
    #[error("not a permutation of the three axes")]
    InvalidPermutation,
    #[error("no kernel witness found after {restarts} restarts (best residual {best_residual:e})")]
    NotFound { restarts: usize, best_residual: f64 },
}

/// One of the three tensor axes of a hypermatrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    First,
    Second,
    Third,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::First, Axis::Second, Axis::Third];

    pub const fn index(self) -> usize {
        match self {
            Axis::First => 0,
            Axis::Second => 1,
            Axis::Third => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    /// Bit weight of this axis in the flat binary index `4i + 2j + k`.
    const fn weight(self) -> usize {
        4 >> self.index()
    }
}

/// Coefficient tensor `a_{ijk}` of a three-qubit state, stored in binary
/// order 000, 001, ..., 111.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypermatrix {
    entries: [Complex64; 8],
}

impl Default for Hypermatrix {
    fn default() -> Self {
        Self::zero()
    }
}

impl Hypermatrix {
    pub fn new(entries: [Complex64; 8]) -> Result<Self, AlgebraError> {
        if let Some(i) = entries.iter().position(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite(i));
        }
        Ok(Self { entries })
    }

    pub fn from_real(entries: [f64; 8]) -> Result<Self, AlgebraError> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub const fn zero() -> Self {
        Self {
            entries: [Complex64::new(0.0, 0.0); 8],
        }
    }

    /// Tensor with a single unit entry at `(i, j, k)`.
    pub fn basis(i: usize, j: usize, k: usize) -> Self {
        let mut out = Self::zero();
        out.entries[flat(i, j, k)] = Complex64::new(1.0, 0.0);
        out
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Self {
        Self {
            entries: std::array::from_fn(|_| rng::complex(rng, spread)),
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.entries[flat(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        self.entries[flat(i, j, k)] = value;
    }

    pub fn entries(&self) -> &[Complex64; 8] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64; 8] {
        &mut self.entries
    }

    /// Largest component magnitude.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.map(|c| c * factor),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// True when every imaginary part is at most `tol` in magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        self.entries.iter().all(|c| c.im.abs() <= tol)
    }
}

#[inline]
const fn flat(i: usize, j: usize, k: usize) -> usize {
    (i << 2) | (j << 1) | k
}

/// The example states of the three-qubit classification.
pub mod states {
    use super::Hypermatrix;

    /// `(|000⟩ + |111⟩)/√2`.
    pub fn ghz() -> Hypermatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Hypermatrix::from_real([s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, s]).expect("finite")
    }

    /// `(|100⟩ + |010⟩ + |001⟩)/√3`.
    pub fn w() -> Hypermatrix {
        let s = 1.0 / 3f64.sqrt();
        Hypermatrix::from_real([0.0, s, s, 0.0, s, 0.0, 0.0, 0.0]).expect("finite")
    }

    /// `(-|000⟩ + |011⟩ + |101⟩ + |110⟩)/2`, hyperdeterminant −1/4.
    pub fn ghz_negative() -> Hypermatrix {
        Hypermatrix::from_real([-0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0]).expect("finite")
    }

    /// `(|000⟩ + |011⟩ + |101⟩ + |110⟩)/2`, hyperdeterminant +1/4.
    pub fn ghz_positive() -> Hypermatrix {
        Hypermatrix::from_real([0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0]).expect("finite")
    }

    /// `|000⟩`.
    pub fn separable() -> Hypermatrix {
        Hypermatrix::basis(0, 0, 0)
    }
}

/// A unimodular 2×2 complex matrix, acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2 {
    m: [[Complex64; 2]; 2],
}

impl Sl2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self, AlgebraError> {
        let det = det2(&m);
        let scale = m
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .max(1.0);
        if !det.is_finite() || (det - 1.0).norm() > UNIMODULAR_TOL * scale {
            return Err(AlgebraError::NotUnimodular(det));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    /// `diag(λ, 1/λ)`.
    pub fn diagonal(lambda: Complex64) -> Result<Self, AlgebraError> {
        let zero = Complex64::new(0.0, 0.0);
        Self::new([[lambda, zero], [zero, lambda.inv()]])
    }

    /// Rescales an arbitrary invertible matrix by `det^{-1/2}`.
    pub fn normalized(m: [[Complex64; 2]; 2]) -> Result<Self, AlgebraError> {
        let det = det2(&m);
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(AlgebraError::NotUnimodular(det));
        }
        let s = det.sqrt().inv();
        let mut out = m;
        for row in out.iter_mut() {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
        // Renormalising once more removes the rounding left by the square root.
        let s2 = det2(&out).sqrt().inv();
        for row in out.iter_mut() {
            for c in row.iter_mut() {
                *c *= s2;
            }
        }
        Self::new(out)
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn det(&self) -> Complex64 {
        det2(&self.m)
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Sl2) -> Sl2 {
        let a = &self.m;
        let b = &rhs.m;
        Sl2 {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
            }),
        }
    }

    pub fn inverse(&self) -> Sl2 {
        let [[a, b], [c, d]] = self.m;
        Sl2 {
            m: [[d, -b], [-c, a]],
        }
    }
}

fn det2(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// One index position in a four-tensor product: tensor `tensor` (0..4),
/// axis `axis`, carrying qubit `label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub tensor: usize,
    pub axis: Axis,
    pub label: Qubit,
}

impl Slot {
    pub const fn new(tensor: usize, axis: Axis, label: Qubit) -> Self {
        Self {
            tensor,
            axis,
            label,
        }
    }
}

/// A perfect matching of the twelve slots of four hypermatrices, each pair
/// contracted with `ε^{first second}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPattern {
    slots: Vec<Slot>,
    pairs: Vec<(usize, usize)>,
    // Nonzero terms of the contraction: flat index into each tensor, and the sign.
    terms: Vec<([u8; 4], f64)>,
}

impl ContractionPattern {
    /// `pairs` index into `slots`; the first element of a pair is the upper
    /// ε index, so swapping it flips the sign of the result.
    pub fn new(slots: Vec<Slot>, pairs: Vec<(usize, usize)>) -> Result<Self, AlgebraError> {
        let invalid = |msg: String| Err(AlgebraError::InvalidPattern(msg));
        if slots.len() != 12 {
            return invalid(format!("expected 12 slots, got {}", slots.len()));
        }
        let mut seen = [[false; 3]; 4];
        for s in &slots {
            if s.tensor >= 4 {
                return invalid(format!("tensor position {} out of range", s.tensor));
            }
            if std::mem::replace(&mut seen[s.tensor][s.axis.index()], true) {
                return invalid(format!("slot ({}, {:?}) listed twice", s.tensor, s.axis));
            }
        }
        let mut used = [false; 12];
        for &(x, y) in &pairs {
            if x >= 12 || y >= 12 || x == y {
                return invalid(format!("bad pair ({x}, {y})"));
            }
            for z in [x, y] {
                if std::mem::replace(&mut used[z], true) {
                    return invalid(format!("slot {z} appears in two pairs"));
                }
            }
            if slots[x].label != slots[y].label {
                return invalid(format!(
                    "pair ({x}, {y}) joins labels {} and {}",
                    slots[x].label, slots[y].label
                ));
            }
        }
        if used.iter().any(|u| !u) {
            return invalid("matching is not perfect".into());
        }

        let mut terms = Vec::with_capacity(1 << pairs.len());
        for mask in 0u32..(1 << pairs.len()) {
            let mut idx = [0u8; 4];
            let mut sign = 1.0;
            for (p, &(x, y)) in pairs.iter().enumerate() {
                // bit 0: (first, second) = (0, 1), ε = +1; bit 1: (1, 0), ε = -1
                let (hot, s) = if mask >> p & 1 == 0 {
                    (y, 1.0)
                } else {
                    (x, -1.0)
                };
                sign *= s;
                let slot = slots[hot];
                idx[slot.tensor] |= slot.axis.weight() as u8;
            }
            terms.push((idx, sign));
        }
        Ok(Self {
            slots,
            pairs,
            terms,
        })
    }

    /// The hyperdeterminant contraction on one line with labels `labels`:
    /// the first two axes contracted within the pairs (1,2) and (3,4), the
    /// third across them as `ε^{X₁X₄} ε^{X₂X₃}`.
    pub fn hyperdeterminant(labels: [Qubit; 3]) -> Self {
        let slots: Vec<Slot> = (0..4)
            .flat_map(|t| Axis::ALL.map(|ax| Slot::new(t, ax, labels[ax.index()])))
            .collect();
        let at = |t: usize, ax: usize| 3 * t + ax;
        let pairs = vec![
            (at(0, 0), at(1, 0)),
            (at(0, 1), at(1, 1)),
            (at(2, 0), at(3, 0)),
            (at(2, 1), at(3, 1)),
            (at(0, 2), at(3, 2)),
            (at(1, 2), at(2, 2)),
        ];
        Self::new(slots, pairs).expect("hyperdeterminant pattern is valid")
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Slot pairs as `(first, second)` references.
    pub fn slot_pairs(&self) -> impl Iterator<Item = (Slot, Slot)> + '_ {
        self.pairs
            .iter()
            .map(|&(x, y)| (self.slots[x], self.slots[y]))
    }
}

impl fmt::Display for ContractionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, y)) in self.slot_pairs().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(
                f,
                "ε^{{{}{}{}{}}}",
                x.label,
                x.tensor + 1,
                y.label,
                y.tensor + 1
            )?;
        }
        Ok(())
    }
}

/// Full ε-contraction of four hypermatrices according to `pattern`.
pub fn epsilon_contract(tensors: [&Hypermatrix; 4], pattern: &ContractionPattern) -> Complex64 {
    let [t0, t1, t2, t3] = tensors.map(|t| &t.entries);
    pattern
        .terms
        .iter()
        .map(|&([i0, i1, i2, i3], sign)| {
            t0[i0 as usize] * t1[i1 as usize] * t2[i2 as usize] * t3[i3 as usize] * sign
        })
        .sum()
}

/// Partial derivatives of [`epsilon_contract`] with respect to every entry
/// of every tensor position: `out[k][i] = ∂ / ∂ tensors[k].entries[i]`.
pub fn epsilon_contract_partials(
    tensors: [&Hypermatrix; 4],
    pattern: &ContractionPattern,
) -> [[Complex64; 8]; 4] {
    let [t0, t1, t2, t3] = tensors.map(|t| &t.entries);
    let mut out = [[Complex64::new(0.0, 0.0); 8]; 4];
    for &([i0, i1, i2, i3], sign) in &pattern.terms {
        let (i0, i1, i2, i3) = (i0 as usize, i1 as usize, i2 as usize, i3 as usize);
        let (x0, x1, x2, x3) = (t0[i0], t1[i1], t2[i2], t3[i3]);
        let front = x0 * x1;
        let back = x2 * x3;
        out[0][i0] += x1 * back * sign;
        out[1][i1] += x0 * back * sign;
        out[2][i2] += front * x3 * sign;
        out[3][i3] += front * x2 * sign;
    }
    out
}

/// Cayley's hyperdeterminant by its explicit twelve-monomial expansion.
pub fn cayley_det(a: &Hypermatrix) -> Complex64 {
    let [a000, a001, a010, a011, a100, a101, a110, a111] = a.entries;
    let squares = a000 * a000 * a111 * a111
        + a001 * a001 * a110 * a110
        + a010 * a010 * a101 * a101
        + a100 * a100 * a011 * a011;
    let doubles = a000 * a001 * a110 * a111
        + a000 * a010 * a101 * a111
        + a000 * a100 * a011 * a111
        + a001 * a010 * a101 * a110
        + a001 * a100 * a011 * a110
        + a010 * a100 * a011 * a101;
    let quads = a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111;
    squares - doubles * 2.0 + quads * 4.0
}

/// The hyperdeterminant through the contraction engine, `-½ ε⁶ a a a a`.
pub fn cayley_det_contracted(a: &Hypermatrix) -> Complex64 {
    use std::sync::OnceLock;
    static PATTERN: OnceLock<ContractionPattern> = OnceLock::new();
    let pattern = PATTERN
        .get_or_init(|| ContractionPattern::hyperdeterminant([Qubit::A, Qubit::B, Qubit::D]));
    epsilon_contract([a; 4], pattern) * -0.5
}

/// Three-tangle `4 |Det a|`.
pub fn tangle3(a: &Hypermatrix) -> f64 {
    4.0 * cayley_det(a).norm()
}

/// `a'_{i..} = Σ_j g_{ij} a_{j..}` along `axis`.
pub fn apply_sl2(a: &Hypermatrix, g: &Sl2, axis: Axis) -> Hypermatrix {
    let w = axis.weight();
    let mut out = Hypermatrix::zero();
    for base in (0..8).filter(|i| i & w == 0) {
        let (lo, hi) = (a.entries[base], a.entries[base | w]);
        out.entries[base] = g.m[0][0] * lo + g.m[0][1] * hi;
        out.entries[base | w] = g.m[1][0] * lo + g.m[1][1] * hi;
    }
    out
}

/// Reorders axes: axis `k` of the result is axis `perm[k]` of `a`.
pub fn triality_permute(a: &Hypermatrix, perm: [Axis; 3]) -> Result<Hypermatrix, AlgebraError> {
    let mut hit = [false; 3];
    for ax in perm {
        hit[ax.index()] = true;
    }
    if hit.iter().any(|h| !h) {
        return Err(AlgebraError::InvalidPermutation);
    }
    Ok(permute_axes(a, perm))
}

pub(crate) fn permute_axes(a: &Hypermatrix, perm: [Axis; 3]) -> Hypermatrix {
    let mut out = Hypermatrix::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let new = [i, j, k];
                let mut old = [0usize; 3];
                for (pos, ax) in perm.iter().enumerate() {
                    old[ax.index()] = new[pos];
                }
                out.set(i, j, k, a.get(old[0], old[1], old[2]));
            }
        }
    }
    out
}

/// The six permutations of three axes, identity first.
pub fn axis_permutations() -> [[Axis; 3]; 6] {
    use Axis::*;
    [
        [First, Second, Third],
        [Second, First, Third],
        [First, Third, Second],
        [Third, Second, First],
        [Second, Third, First],
        [Third, First, Second],
    ]
}

/// A solution `(p, q, r)` of the bilinear system `a p q = a p r = a q r = 0`.
///
/// Each pair is normalized so its largest-magnitude component equals 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelWitness {
    pub p: [Complex64; 2],
    pub q: [Complex64; 2],
    pub r: [Complex64; 2],
    /// `max |residual| / scale(a)`.
    pub residual: f64,
}

/// Seed used by [`kernel_witness`].
pub const WITNESS_SEED: u64 = 0x5eed_0001;

/// Searches for a kernel witness of `a` with the default seed.
///
/// `NotFound` does not prove `Det a ≠ 0`; it only reports that the search
/// failed.
pub fn kernel_witness(
    a: &Hypermatrix,
    max_restarts: usize,
    tol: f64,
) -> Result<KernelWitness, AlgebraError> {
    kernel_witness_seeded(a, max_restarts, tol, WITNESS_SEED)
}

pub fn kernel_witness_seeded(
    a: &Hypermatrix,
    max_restarts: usize,
    tol: f64,
    seed: u64,
) -> Result<KernelWitness, AlgebraError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let scale = a.scale();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if scale == 0.0 {
        return Ok(KernelWitness {
            p: [zero, one],
            q: [zero, one],
            r: [zero, one],
            residual: 0.0,
        });
    }
    let a = a.scaled(Complex64::new(1.0 / scale, 0.0));
    let mut best = f64::INFINITY;

    // Basis-vector corners first; (0,1)³ leads.
    for mask in 0..8u32 {
        let pick = |bit: u32| {
            if mask >> bit & 1 == 0 {
                [zero, one]
            } else {
                [one, zero]
            }
        };
        let x = [pick(0), pick(1), pick(2)];
        let res = max_residual(&a, &x);
        best = best.min(res);
        if res <= tol {
            return Ok(witness(x, res));
        }
    }

    let mut rng = rng::stream(seed, 0);
    for _ in 0..max_restarts {
        let mut x: [[Complex64; 2]; 3] = std::array::from_fn(|_| {
            normalize_pair([rng::complex(&mut rng, 1.0), rng::complex(&mut rng, 1.0)])
        });
        let res = refine(&a, &mut x, tol);
        best = best.min(res);
        if res <= tol {
            return Ok(witness(x, res));
        }
    }
    Err(AlgebraError::NotFound {
        restarts: max_restarts,
        best_residual: best,
    })
}

fn witness(x: [[Complex64; 2]; 3], residual: f64) -> KernelWitness {
    KernelWitness {
        p: x[0],
        q: x[1],
        r: x[2],
        residual,
    }
}

/// The six bilinear images: `a p q` (free third index), `a p r`, `a q r`.
fn bilinear_images(a: &Hypermatrix, x: &[[Complex64; 2]; 3]) -> [Complex64; 6] {
    let [p, q, r] = x;
    let mut f = [Complex64::new(0.0, 0.0); 6];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let v = a.get(i, j, k);
                f[k] += v * p[i] * q[j];
                f[2 + j] += v * p[i] * r[k];
                f[4 + i] += v * q[j] * r[k];
            }
        }
    }
    f
}

fn max_residual(a: &Hypermatrix, x: &[[Complex64; 2]; 3]) -> f64 {
    bilinear_images(a, x)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

fn normalize_pair(v: [Complex64; 2]) -> [Complex64; 2] {
    let big = if v[0].norm() >= v[1].norm() {
        v[0]
    } else {
        v[1]
    };
    if big.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    }
    [v[0] / big, v[1] / big]
}

/// Damped Gauss-Newton on the three free components; returns the final
/// residual and leaves the iterate in `x`.
fn refine(a: &Hypermatrix, x: &mut [[Complex64; 2]; 3], tol: f64) -> f64 {
    const MAX_ITER: usize = 200;
    let sum_sq = |f: &[Complex64; 6]| f.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let mut f = bilinear_images(a, x);
    let mut cost = sum_sq(&f);
    let mut mu = 1e-3;
    for _ in 0..MAX_ITER {
        if max_residual(a, x) <= tol {
            break;
        }
        // The free component of each pair is the smaller one.
        let free: [usize; 3] =
            std::array::from_fn(|n| usize::from(x[n][0].norm() >= x[n][1].norm()));
        let jac = jacobian(a, x, free);
        // Normal equations (JᴴJ + μ diag) δ = -Jᴴ f.
        let mut lhs = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut rhs = [Complex64::new(0.0, 0.0); 3];
        for row in 0..6 {
            for c1 in 0..3 {
                rhs[c1] -= jac[row][c1].conj() * f[row];
                for c2 in 0..3 {
                    lhs[c1][c2] += jac[row][c1].conj() * jac[row][c2];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = lhs;
            for (d, row) in damped.iter_mut().enumerate() {
                row[d] += mu * (1.0 + lhs[d][d].re);
            }
            let Some(step) = solve3(damped, rhs) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = *x;
            for n in 0..3 {
                trial[n][free[n]] += step[n];
                trial[n] = normalize_pair(trial[n]);
            }
            let f_trial = bilinear_images(a, &trial);
            let c_trial = sum_sq(&f_trial);
            if c_trial < cost {
                *x = trial;
                f = f_trial;
                cost = c_trial;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    max_residual(a, x)
}

fn jacobian(a: &Hypermatrix, x: &[[Complex64; 2]; 3], free: [usize; 3]) -> [[Complex64; 3]; 6] {
    let [p, q, r] = x;
    let mut jac = [[Complex64::new(0.0, 0.0); 3]; 6];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let v = a.get(i, j, k);
                if i == free[0] {
                    jac[k][0] += v * q[j];
                    jac[2 + j][0] += v * r[k];
                }
                if j == free[1] {
                    jac[k][1] += v * p[i];
                    jac[4 + i][1] += v * r[k];
                }
                if k == free[2] {
                    jac[2 + j][2] += v * p[i];
                    jac[4 + i][2] += v * q[j];
                }
            }
        }
    }
    jac
}

/// Gaussian elimination with partial pivoting on a 3×3 complex system.
fn solve3(mut m: [[Complex64; 3]; 3], mut b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&r1, &r2| m[r1][col].norm().total_cmp(&m[r2][col].norm()))?;
        if m[piv][col].norm() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for c in col..3 {
                let sub = factor * m[col][c];
                m[row][c] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in row + 1..3 {
            acc -= m[row][c] * out[c];
        }
        out[row] = acc / m[row][row];
    }
    out.iter().all(|c| c.is_finite()).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::states::*;
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-15;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Sum over all 2¹² index assignments, evaluating every ε factor: the
    /// independent oracle for the engine.
    fn brute_force_contract(tensors: [&Hypermatrix; 4], pattern: &ContractionPattern) -> Complex64 {
        let eps = |x: usize, y: usize| match (x, y) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        };
        let slots = pattern.slots();
        let mut total = Complex64::new(0.0, 0.0);
        for assign in 0u32..4096 {
            let value = |s: usize| (assign >> s & 1) as usize;
            let mut weight = 1.0;
            for &(x, y) in pattern.pairs() {
                weight *= eps(value(x), value(y));
            }
            if weight == 0.0 {
                continue;
            }
            let mut idx = [[0usize; 3]; 4];
            for (s, slot) in slots.iter().enumerate() {
                idx[slot.tensor][slot.axis.index()] = value(s);
            }
            let mut prod = Complex64::new(weight, 0.0);
            for t in 0..4 {
                prod *= tensors[t].get(idx[t][0], idx[t][1], idx[t][2]);
            }
            total += prod;
        }
        total
    }

    /// Contraction template of the four-line loop omitting George.
    fn loop_pattern_without_g() -> ContractionPattern {
        use Qubit::*;
        let lines = [[A, B, D], [B, C, E], [C, D, F], [E, F, A]];
        let slots: Vec<Slot> = lines
            .iter()
            .enumerate()
            .flat_map(|(t, l)| Axis::ALL.map(|ax| Slot::new(t, ax, l[ax.index()])))
            .collect();
        let mut pairs = Vec::new();
        for q in [A, B, C, D, E, F] {
            let occ: Vec<usize> = (0..12).filter(|&s| slots[s].label == q).collect();
            pairs.push((occ[0], occ[1]));
        }
        ContractionPattern::new(slots, pairs).unwrap()
    }

    fn random_tensor(seed: u64) -> Hypermatrix {
        Hypermatrix::random(&mut rng::stream(seed, 0), 1.0)
    }

    fn rel_close(x: Complex64, y: Complex64, rel: f64, scale4: f64) -> bool {
        (x - y).norm() <= rel * scale4.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn hyperdeterminant_pattern_on_ghz() {
        let g = ghz();
        let pat = ContractionPattern::hyperdeterminant([Qubit::A, Qubit::B, Qubit::D]);
        let v = epsilon_contract([&g; 4], &pat);
        let expected = c(-0.5);
        assert!((v - expected).norm() < TOL, "{v}");
        assert!((cayley_det(&g) * -2.0 - v).norm() < TOL);
    }

    #[test]
    fn within_pair_pattern_vanishes() {
        // All three labels contracted inside (1,2) and (3,4): antisymmetric in
        // each pair of identical tensors, hence zero.
        let slots: Vec<Slot> = (0..4)
            .flat_map(|t| {
                Axis::ALL.map(|ax| Slot::new(t, ax, [Qubit::A, Qubit::B, Qubit::D][ax.index()]))
            })
            .collect();
        let pairs = vec![(0, 3), (1, 4), (2, 5), (6, 9), (7, 10), (8, 11)];
        let pat = ContractionPattern::new(slots, pairs).unwrap();
        for seed in 0..20 {
            let a = random_tensor(seed);
            assert!(epsilon_contract([&a; 4], &pat).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_tensors_contract_to_zero() {
        let z = Hypermatrix::zero();
        let pat = loop_pattern_without_g();
        assert_eq!(epsilon_contract([&z; 4], &pat), c(0.0));
    }

    #[test]
    fn engine_matches_brute_force_on_w() {
        let w = w();
        let pat = loop_pattern_without_g();
        let fast = epsilon_contract([&w; 4], &pat);
        let slow = brute_force_contract([&w; 4], &pat);
        assert!((fast - slow).norm() < TOL);
    }

    #[test]
    fn engine_matches_brute_force_on_random_tensors() {
        let patterns = [
            loop_pattern_without_g(),
            ContractionPattern::hyperdeterminant([Qubit::A, Qubit::B, Qubit::D]),
        ];
        for seed in 0..50u64 {
            let ts: [Hypermatrix; 4] = std::array::from_fn(|k| random_tensor(seed * 4 + k as u64));
            for pat in &patterns {
                let r = [&ts[0], &ts[1], &ts[2], &ts[3]];
                let fast = epsilon_contract(r, pat);
                let slow = brute_force_contract(r, pat);
                assert!((fast - slow).norm() < 1e-13 * slow.norm().max(1.0));
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        // A quartic restricted to a line is a degree-4 polynomial in t, so the
        // five-point stencil is exact up to rounding.
        let pat = loop_pattern_without_g();
        let ts: [Hypermatrix; 4] = std::array::from_fn(|k| random_tensor(100 + k as u64));
        let grads = epsilon_contract_partials([&ts[0], &ts[1], &ts[2], &ts[3]], &pat);
        for k in 0..4 {
            for i in 0..8 {
                let at = |h: f64| {
                    let mut moved = ts;
                    moved[k].entries[i] += h;
                    epsilon_contract([&moved[0], &moved[1], &moved[2], &moved[3]], &pat)
                };
                let h = 0.5;
                let fd = ((at(h) - at(-h)) * 8.0 - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
                assert!((fd - grads[k][i]).norm() < 1e-12, "{k} {i}");
            }
        }
    }

    #[test]
    fn invalid_patterns_rejected() {
        let slots: Vec<Slot> = (0..4)
            .flat_map(|t| {
                Axis::ALL.map(|ax| Slot::new(t, ax, [Qubit::A, Qubit::B, Qubit::D][ax.index()]))
            })
            .collect();
        // labels mismatch: A with B
        let bad = vec![(0, 1), (3, 4), (2, 5), (6, 9), (7, 10), (8, 11)];
        assert!(matches!(
            ContractionPattern::new(slots.clone(), bad),
            Err(AlgebraError::InvalidPattern(_))
        ));
        // not perfect
        let short = vec![(0, 3), (1, 4), (2, 5), (6, 9), (7, 10)];
        assert!(ContractionPattern::new(slots.clone(), short).is_err());
        // slot reused
        let reuse = vec![(0, 3), (0, 9), (2, 5), (6, 9), (7, 10), (8, 11)];
        assert!(ContractionPattern::new(slots, reuse).is_err());
    }

    #[test]
    fn determinant_fixtures() {
        assert!((cayley_det(&ghz()) - c(0.25)).norm() < TOL);
        assert!((cayley_det(&ghz_negative()) - c(-0.25)).norm() < TOL);
        assert!((cayley_det(&ghz_positive()) - c(0.25)).norm() < TOL);
        assert!(cayley_det(&w()).norm() < TOL);
        assert_eq!(cayley_det(&Hypermatrix::zero()), c(0.0));
    }

    #[test]
    fn tangle_fixtures() {
        assert!((tangle3(&ghz()) - 1.0).abs() < TOL);
        assert!(tangle3(&w()).abs() < TOL);
        assert_eq!(tangle3(&Hypermatrix::zero()), 0.0);
    }

    #[test]
    fn diagonal_sl2_on_ghz() {
        let g = Sl2::diagonal(c(2.0)).unwrap();
        let a = apply_sl2(&ghz(), &g, Axis::First);
        assert!((a.get(0, 0, 0) - c(2.0 / 2f64.sqrt())).norm() < TOL);
        assert!((a.get(1, 1, 1) - c(1.0 / (2.0 * 2f64.sqrt()))).norm() < TOL);
        assert!((cayley_det(&a) - c(0.25)).norm() < TOL);
    }

    #[test]
    fn identity_sl2_is_noop() {
        let a = random_tensor(3);
        for ax in Axis::ALL {
            assert_eq!(apply_sl2(&a, &Sl2::identity(), ax), a);
        }
    }

    #[test]
    fn sl2_constructor_checks_determinant() {
        let m = [[c(2.0), c(0.0)], [c(0.0), c(1.0)]];
        assert!(matches!(Sl2::new(m), Err(AlgebraError::NotUnimodular(_))));
        let n = Sl2::normalized(m).unwrap();
        assert!((n.det() - 1.0).norm() < 1e-15);
        let prod = n.compose(&n.inverse());
        assert!((prod.get(0, 0) - 1.0).norm() < 1e-15 && prod.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn triality_swap_moves_entry() {
        let a = Hypermatrix::basis(0, 1, 0);
        let b = triality_permute(&a, [Axis::Second, Axis::First, Axis::Third]).unwrap();
        assert_eq!(b, Hypermatrix::basis(1, 0, 0));
        let id = triality_permute(&a, [Axis::First, Axis::Second, Axis::Third]).unwrap();
        assert_eq!(id, a);
        assert_eq!(
            triality_permute(&a, [Axis::First, Axis::First, Axis::Third]),
            Err(AlgebraError::InvalidPermutation)
        );
    }

    #[test]
    fn non_finite_rejected() {
        let mut e = [c(0.0); 8];
        e[5] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(Hypermatrix::new(e), Err(AlgebraError::NonFinite(5)));
    }

    #[test]
    fn witness_for_w() {
        let w = kernel_witness(&w(), 64, 1e-10).unwrap();
        assert!(w.residual <= 1e-10);
        for pair in [w.p, w.q, w.r] {
            assert!(pair[0].norm() < 1e-8, "{pair:?}");
            assert!((pair[1] - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn witness_for_separable() {
        let w = kernel_witness(&separable(), 64, 1e-10).unwrap();
        let zero_one = [c(0.0), c(1.0)];
        assert_eq!([w.p, w.q, w.r], [zero_one; 3]);
        assert_eq!(w.residual, 0.0);
    }

    #[test]
    fn no_witness_for_ghz() {
        match kernel_witness(&ghz(), 64, 1e-10) {
            Err(AlgebraError::NotFound {
                restarts,
                best_residual,
            }) => {
                assert_eq!(restarts, 64);
                assert!(best_residual > 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn witness_for_zero_tensor() {
        let w = kernel_witness(&Hypermatrix::zero(), 1, 1e-10).unwrap();
        assert_eq!(w.residual, 0.0);
    }

    #[test]
    fn witness_found_on_random_degenerate_orbit() {
        // Tensors supported on {000, 001, 010, 100} have kernel (0,1)³;
        // a random [SL(2)]³ image moves the witness to a generic point.
        for seed in 0..20u64 {
            let mut r = rng::stream(seed, 7);
            let mut b = Hypermatrix::zero();
            for (i, j, k) in [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)] {
                b.set(i, j, k, rng::complex(&mut r, 1.0));
            }
            let mut a = b;
            for ax in Axis::ALL {
                let g = Sl2::normalized(std::array::from_fn(|_| {
                    std::array::from_fn(|_| rng::complex(&mut r, 1.0))
                }))
                .unwrap();
                a = apply_sl2(&a, &g, ax);
            }
            let s4 = a.scale().powi(4);
            assert!(cayley_det(&a).norm() < 1e-12 * s4);
            let w = kernel_witness(&a, 64, 1e-10).expect("degenerate tensor has a witness");
            assert!(w.residual <= 1e-10);
            assert!(cayley_det(&a).norm() <= 10.0 * 1e-10 * s4);
        }
    }

    fn arb_tensor() -> impl Strategy<Value = Hypermatrix> {
        proptest::array::uniform8((-1.0f64..1.0, -1.0f64..1.0))
            .prop_map(|e| Hypermatrix::new(e.map(|(re, im)| Complex64::new(re, im))).unwrap())
    }

    fn arb_sl2() -> impl Strategy<Value = Sl2> {
        proptest::array::uniform4((-1.0f64..1.0, -1.0f64..1.0)).prop_filter_map(
            "near singular",
            |e| {
                let m = [
                    [
                        Complex64::new(e[0].0, e[0].1),
                        Complex64::new(e[1].0, e[1].1),
                    ],
                    [
                        Complex64::new(e[2].0, e[2].1),
                        Complex64::new(e[3].0, e[3].1),
                    ],
                ];
                (det2(&m).norm() > 1e-3)
                    .then(|| Sl2::normalized(m).ok())
                    .flatten()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn polynomial_and_contraction_agree(a in arb_tensor()) {
            let s4 = a.scale().powi(4);
            prop_assert!(rel_close(cayley_det(&a), cayley_det_contracted(&a), 1e-13, s4));
        }

        #[test]
        fn determinant_is_sl2_invariant(a in arb_tensor(), g in arb_sl2(), ax in 0usize..3) {
            let b = apply_sl2(&a, &g, Axis::from_index(ax).unwrap());
            let s4 = b.scale().max(a.scale()).powi(4);
            prop_assert!(rel_close(cayley_det(&a), cayley_det(&b), 1e-10, s4));
        }

        #[test]
        fn determinant_is_triality_invariant(a in arb_tensor()) {
            let d = cayley_det(&a);
            for perm in axis_permutations() {
                let b = triality_permute(&a, perm).unwrap();
                prop_assert!((cayley_det(&b) - d).norm() <= 1e-12 * d.norm().max(a.scale().powi(4)));
            }
        }

        #[test]
        fn contraction_is_multilinear(ts in proptest::array::uniform4(arb_tensor()),
                                      k in 0usize..4, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let pat = loop_pattern_without_g();
            let factor = Complex64::new(re, im);
            let base = epsilon_contract([&ts[0], &ts[1], &ts[2], &ts[3]], &pat);
            let mut scaled = ts;
            scaled[k] = ts[k].scaled(factor);
            let v = epsilon_contract([&scaled[0], &scaled[1], &scaled[2], &scaled[3]], &pat);
            prop_assert!((v - base * factor).norm() <= 1e-12 * (base * factor).norm().max(1e-12));
        }

        #[test]
        fn normalized_tangle_in_unit_interval(a in arb_tensor()) {
            prop_assume!(a.norm_sqr() > 1e-6);
            let n = a.scaled(Complex64::new(1.0 / a.norm_sqr().sqrt(), 0.0));
            let t = tangle3(&n);
            prop_assert!((0.0..=1.0 + 1e-9).contains(&t));
        }
    }
}
