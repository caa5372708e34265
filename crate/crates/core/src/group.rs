//! The `[SL(2,C)]⁷` action, Fano-plane relabelings and the randomized
//! invariance harness.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{apply_sl2, cayley_det, permute_axes, AlgebraError, Axis, Sl2};
use crate::fano::{Line, Qubit, SevenQubitState};
use crate::invariant::TermCatalog;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("random SL(2) draw stayed near-singular for {0} attempts")]
    Degenerate(usize),
    #[error("permutation does not map lines to lines: {0}")]
    NotAutomorphism(String),
    #[error("invariance violated: sample {sample} (seed {seed}), {check} residual {residual:e} > tol {tol:e}")]
    InvarianceViolated {
        seed: u64,
        sample: usize,
        check: CheckKind,
        residual: f64,
        tol: f64,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Redraw budget of [`random_sl2`].
pub const MAX_DRAWS: usize = 100;

/// A deterministic random unimodular matrix for `seed`.
pub fn random_sl2(seed: u64, spread: f64) -> Result<Sl2, GroupError> {
    random_sl2_from(&mut rng::stream(seed, 0), spread)
}

/// Draws entries uniformly in the box of half-width `spread`, rejects
/// `|det| < 1e-6`, and rescales by `det^{-1/2}`.
pub fn random_sl2_from<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Result<Sl2, GroupError> {
    assert!(spread > 0.0, "spread must be positive");
    for _ in 0..MAX_DRAWS {
        let m: [[Complex64; 2]; 2] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng::complex(rng, spread)));
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.norm() < 1e-6 {
            continue;
        }
        return Ok(Sl2::normalized(m)?);
    }
    Err(GroupError::Degenerate(MAX_DRAWS))
}

/// One `SL(2,C)` factor per qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Tuple {
    elements: [Sl2; 7],
}

impl Default for Sl2Tuple {
    fn default() -> Self {
        Self::identity()
    }
}

impl Sl2Tuple {
    pub fn new(elements: [Sl2; 7]) -> Self {
        Self { elements }
    }

    pub fn identity() -> Self {
        Self {
            elements: [Sl2::identity(); 7],
        }
    }

    /// Identity everywhere except `g` on qubit `q`.
    pub fn single(q: Qubit, g: Sl2) -> Self {
        let mut t = Self::identity();
        t.elements[q.index()] = g;
        t
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Result<Self, GroupError> {
        let mut elements = [Sl2::identity(); 7];
        for e in elements.iter_mut() {
            *e = random_sl2_from(rng, spread)?;
        }
        Ok(Self { elements })
    }

    pub fn get(&self, q: Qubit) -> &Sl2 {
        &self.elements[q.index()]
    }

    /// `(self ∘ inner)[X] = self[X] · inner[X]`, i.e. apply `inner` first.
    pub fn after(&self, inner: &Sl2Tuple) -> Sl2Tuple {
        Sl2Tuple {
            elements: std::array::from_fn(|i| self.elements[i].compose(&inner.elements[i])),
        }
    }
}

/// Applies `g[X]` on the `X` axis of every line through `X`.
pub fn act(psi: &SevenQubitState, g: &Sl2Tuple) -> SevenQubitState {
    let mut out = *psi;
    for line in Line::ALL {
        let mut a = *psi.line(line);
        for (axis, q) in Axis::ALL.into_iter().zip(line.points()) {
            a = apply_sl2(&a, g.get(q), axis);
        }
        out.set_line(line, a);
    }
    out
}

/// A point permutation carrying lines to lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FanoAutomorphism {
    map: [Qubit; 7],
}

impl FanoAutomorphism {
    pub fn new(map: [Qubit; 7]) -> Result<Self, GroupError> {
        let mut hit = [false; 7];
        for q in map {
            hit[q.index()] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(GroupError::NotAutomorphism("not a permutation".into()));
        }
        let sigma = Self { map };
        for l in Line::ALL {
            if Line::with_points(l.points().map(|q| sigma.apply(q))).is_none() {
                return Err(GroupError::NotAutomorphism(format!("line {l} is broken")));
            }
        }
        Ok(sigma)
    }

    pub fn identity() -> Self {
        Self { map: Qubit::ALL }
    }

    /// `A → B → ... → G → A`.
    pub fn shift() -> Self {
        Self::from_numbering(|i| i + 1)
    }

    /// Label `i ↦ 2i mod 7` (numbering A = 1, ..., G = 7).
    pub fn doubling() -> Self {
        Self::from_numbering(|i| 2 * i)
    }

    fn from_numbering(f: impl Fn(usize) -> usize) -> Self {
        let map = std::array::from_fn(|i| {
            let n = (f(i + 1) + 6) % 7; // back to 0-based, with 7 ≡ 0 mapped to G
            Qubit::ALL[n]
        });
        Self::new(map).expect("affine maps preserve the line system")
    }

    pub fn apply(&self, q: Qubit) -> Qubit {
        self.map[q.index()]
    }

    pub fn map(&self) -> &[Qubit; 7] {
        &self.map
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &FanoAutomorphism) -> FanoAutomorphism {
        FanoAutomorphism {
            map: std::array::from_fn(|i| self.apply(inner.map[i])),
        }
    }

    pub fn inverse(&self) -> FanoAutomorphism {
        let mut map = Qubit::ALL;
        for q in Qubit::ALL {
            map[self.apply(q).index()] = q;
        }
        FanoAutomorphism { map }
    }

    pub fn power(&self, k: usize) -> FanoAutomorphism {
        (0..k).fold(Self::identity(), |acc, _| self.after(&acc))
    }

    /// Image of `line` and the axis permutation taking the source tensor to
    /// the image line's canonical point order.
    pub fn image(&self, line: Line) -> (Line, [Axis; 3]) {
        let img = line.points().map(|q| self.apply(q));
        let target = Line::with_points(img).expect("validated automorphism");
        let perm = target.points().map(|p| {
            let j = img.iter().position(|&q| q == p).expect("same point set");
            Axis::ALL[j]
        });
        (target, perm)
    }

    /// The order-21 group generated by the shift and doubling maps.
    pub fn shift_doubling_group() -> Vec<FanoAutomorphism> {
        let mut group = vec![Self::identity()];
        let generators = [Self::shift(), Self::doubling()];
        let mut frontier = group.clone();
        while let Some(g) = frontier.pop() {
            for s in &generators {
                let h = s.after(&g);
                if !group.contains(&h) {
                    group.push(h);
                    frontier.push(h);
                }
            }
        }
        group
    }

    /// All 168 collineations, by brute force over the 7! permutations.
    pub fn all() -> Vec<FanoAutomorphism> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..7).collect();
        permutations(&mut perm, 0, &mut |p| {
            if let Ok(a) = Self::new(std::array::from_fn(|i| Qubit::ALL[p[i]])) {
                out.push(a);
            }
        });
        out
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Moves each line's tensor to the image line, reordering axes to the
/// image's canonical point order.
pub fn relabel(psi: &SevenQubitState, sigma: &FanoAutomorphism) -> SevenQubitState {
    let mut out = SevenQubitState::zero();
    for line in Line::ALL {
        let (target, perm) = sigma.image(line);
        out.set_line(target, permute_axes(psi.line(line), perm));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// `I₄(g·ψ) = I₄(ψ)`.
    Sl2Action,
    /// `I₄(σ·ψ) = I₄(ψ)`.
    Relabel,
    /// `Det(g·a) = Det(a)` on every line.
    LineDeterminant,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Sl2Action => "sl2",
            CheckKind::Relabel => "relabel",
            CheckKind::LineDeterminant => "line-det",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckResult {
    pub sample: usize,
    pub kind: CheckKind,
    /// `|Δ| / scale⁴`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<CheckResult>,
}

impl InvarianceReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn max_residual_of(&self, kind: CheckKind) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks
            .iter()
            .find(|c| c.residual.is_nan() || c.residual > self.tol)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn into_result(self) -> Result<InvarianceReport, GroupError> {
        match self.first_failure() {
            None => Ok(self),
            Some(c) => Err(GroupError::InvarianceViolated {
                seed: self.seed,
                sample: c.sample,
                check: c.kind,
                residual: c.residual,
                tol: self.tol,
            }),
        }
    }
}

impl fmt::Display for InvarianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "sample={} check={} residual={:e}",
                c.sample, c.kind, c.residual
            )?;
        }
        write!(
            f,
            "max_residual={:e} status={}",
            self.max_residual(),
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

/// Runs the invariance checks on the canonical catalog and fails on the
/// first violation.
pub fn invariance_suite(
    seed: u64,
    samples: usize,
    tol: f64,
) -> Result<InvarianceReport, GroupError> {
    run_invariance_checks(TermCatalog::canonical(), seed, samples, tol)?.into_result()
}

/// Per sample: a random 56-component state, a random `[SL(2)]⁷` element and
/// a random shift/doubling automorphism. Sample `i` draws from stream `i` of
/// `seed`, so the report is independent of scheduling.
pub fn run_invariance_checks(
    catalog: &TermCatalog,
    seed: u64,
    samples: usize,
    tol: f64,
) -> Result<InvarianceReport, GroupError> {
    assert!(samples >= 1, "need at least one sample");
    let group = FanoAutomorphism::shift_doubling_group();
    let per_sample: Result<Vec<Vec<CheckResult>>, GroupError> = (0..samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = rng::stream(seed, sample as u64);
            let psi = SevenQubitState::random(&mut rng, &Line::ALL, 1.0);
            let g = Sl2Tuple::random(&mut rng, 1.0)?;
            let sigma = group[rng.gen_range(0..group.len())];
            Ok(sample_checks(catalog, sample, &psi, &g, &sigma))
        })
        .collect();
    Ok(InvarianceReport {
        seed,
        tol,
        checks: per_sample?.into_iter().flatten().collect(),
    })
}

pub(crate) fn sample_checks(
    catalog: &TermCatalog,
    sample: usize,
    psi: &SevenQubitState,
    g: &Sl2Tuple,
    sigma: &FanoAutomorphism,
) -> Vec<CheckResult> {
    let base = catalog.i4(psi);
    let moved = act(psi, g);
    let relabeled = relabel(psi, sigma);
    let s4 = |a: f64, b: f64| a.max(b).powi(4).max(f64::MIN_POSITIVE);

    let sl2 = (catalog.i4(&moved) - base).norm() / s4(psi.scale(), moved.scale());
    let rel = (catalog.i4(&relabeled) - base).norm() / s4(psi.scale(), relabeled.scale());
    let det = Line::ALL
        .into_iter()
        .map(|l| {
            let (a, b) = (psi.line(l), moved.line(l));
            (cayley_det(a) - cayley_det(b)).norm() / s4(a.scale(), b.scale())
        })
        .fold(0.0, f64::max);
    vec![
        CheckResult {
            sample,
            kind: CheckKind::Sl2Action,
            residual: sl2,
        },
        CheckResult {
            sample,
            kind: CheckKind::Relabel,
            residual: rel,
        },
        CheckResult {
            sample,
            kind: CheckKind::LineDeterminant,
            residual: det,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::i4_fano;
    use Qubit::*;

    fn line(name: &str) -> Line {
        name.parse().unwrap()
    }

    #[test]
    fn random_sl2_is_deterministic_and_unimodular() {
        assert_eq!(random_sl2(9, 1.0).unwrap(), random_sl2(9, 1.0).unwrap());
        assert_ne!(random_sl2(9, 1.0).unwrap(), random_sl2(10, 1.0).unwrap());
        for seed in 0..1000 {
            let g = random_sl2(seed, 1.0).expect("no degenerate draws at spread 1");
            assert!((g.det() - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn identity_tuple_acts_trivially() {
        let psi = SevenQubitState::random(&mut rng::stream(2, 0), &Line::ALL, 1.0);
        assert_eq!(act(&psi, &Sl2Tuple::identity()), psi);
    }

    #[test]
    fn factor_on_a_touches_only_lines_through_a() {
        let psi = SevenQubitState::random(&mut rng::stream(3, 0), &Line::ALL, 1.0);
        let g = Sl2Tuple::single(A, random_sl2(5, 1.0).unwrap());
        let moved = act(&psi, &g);
        let changed: Vec<String> = Line::ALL
            .into_iter()
            .filter(|&l| moved.line(l) != psi.line(l))
            .map(|l| l.name())
            .collect();
        assert_eq!(changed, ["ABD", "EFA", "GAC"]);
    }

    #[test]
    fn action_composes() {
        let mut r = rng::stream(4, 0);
        let psi = SevenQubitState::random(&mut r, &Line::ALL, 1.0);
        let g = Sl2Tuple::random(&mut r, 1.0).unwrap();
        let h = Sl2Tuple::random(&mut r, 1.0).unwrap();
        let two_step = act(&act(&psi, &g), &h);
        let one_step = act(&psi, &h.after(&g));
        let diff = two_step
            .components()
            .zip(one_step.components())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-12 * two_step.scale().max(1.0), "{diff}");
    }

    #[test]
    fn shift_maps_abd_to_bce() {
        let s = FanoAutomorphism::shift();
        assert_eq!(s.image(line("ABD")).0, line("BCE"));
        for l in Line::ALL {
            let (img, perm) = s.image(l);
            assert_eq!(img.index(), (l.index() + 1) % 7);
            assert_eq!(perm, Axis::ALL, "shift keeps orientation");
        }
    }

    #[test]
    fn doubling_preserves_lines() {
        let d = FanoAutomorphism::doubling();
        assert_eq!(d.map(), &[B, D, F, A, C, E, G]);
        let (img, perm) = d.image(line("ABD"));
        assert_eq!(img, line("ABD"));
        assert_ne!(perm, Axis::ALL);
    }

    #[test]
    fn non_automorphism_rejected() {
        let mut map = Qubit::ALL;
        map.swap(0, 2); // A <-> C breaks ABD
        assert!(matches!(
            FanoAutomorphism::new(map),
            Err(GroupError::NotAutomorphism(_))
        ));
        assert!(FanoAutomorphism::new([A; 7]).is_err());
    }

    #[test]
    fn group_sizes() {
        let g = FanoAutomorphism::shift_doubling_group();
        assert_eq!(g.len(), 21);
        // orbit on ordered lines has at least 21 elements
        let mut orbit = std::collections::HashSet::new();
        for s in &g {
            orbit.insert(line("ABD").points().map(|q| s.apply(q)));
        }
        assert!(orbit.len() >= 21);
        assert_eq!(FanoAutomorphism::all().len(), 168);
    }

    #[test]
    fn relabel_identity_and_isometry() {
        let psi = SevenQubitState::random(&mut rng::stream(6, 0), &Line::ALL, 1.0);
        assert_eq!(relabel(&psi, &FanoAutomorphism::identity()), psi);
        for s in FanoAutomorphism::all() {
            let r = relabel(&psi, &s);
            assert!((r.norm() - psi.norm()).abs() <= 1e-14);
            let back = relabel(&r, &s.inverse());
            assert_eq!(back, psi);
        }
    }

    #[test]
    fn identity_checks_have_zero_residual() {
        let psi = SevenQubitState::random(&mut rng::stream(8, 0), &Line::ALL, 1.0);
        let checks = sample_checks(
            TermCatalog::canonical(),
            0,
            &psi,
            &Sl2Tuple::identity(),
            &FanoAutomorphism::identity(),
        );
        assert!(checks.iter().all(|c| c.residual == 0.0));
    }

    #[test]
    fn suite_passes_on_canonical_catalog() {
        let report = invariance_suite(42, 100, 1e-9).unwrap();
        assert_eq!(report.checks.len(), 300);
        assert!(report.to_string().ends_with("status=pass"));
    }

    #[test]
    fn negated_cross_coefficient_is_caught() {
        let mut bad = TermCatalog::canonical().clone();
        let idx = bad.cross_indices()[3];
        bad.negate(idx);
        let report = run_invariance_checks(&bad, 42, 20, 1e-9).unwrap();
        assert!(report.max_residual_of(CheckKind::Relabel) > 1e-9);
        assert!(matches!(
            report.into_result(),
            Err(GroupError::InvarianceViolated {
                check: CheckKind::Relabel,
                ..
            })
        ));
    }

    #[test]
    fn i4_under_single_factor() {
        let psi = SevenQubitState::random(&mut rng::stream(11, 0), &Line::ALL, 1.0);
        for q in Qubit::ALL {
            let g = Sl2Tuple::single(q, random_sl2(q.index() as u64, 1.5).unwrap());
            let moved = act(&psi, &g);
            let s4 = moved.scale().max(psi.scale()).powi(4);
            assert!((i4_fano(&moved) - i4_fano(&psi)).norm() <= 1e-9 * s4);
        }
    }
}
