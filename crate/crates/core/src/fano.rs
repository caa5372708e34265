//! The Fano plane: seven qubits, seven oriented lines, the octonion table,
//! and the 56-component state that lives on the lines.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::algebra::{Axis, Hypermatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanoError {
    #[error("points must be distinct")]
    SamePoint,
    #[error("octonion product of a unit with itself is not tabulated")]
    DiagonalUndefined,
    #[error("incidence structure broken: {0}")]
    StructureBroken(String),
    #[error("cannot normalize the zero state")]
    ZeroState,
    #[error("unknown qubit label {0:?}")]
    UnknownQubit(String),
    #[error("unknown line name {0:?}")]
    UnknownLine(String),
}

/// One of the seven qubits, numbered 1..7 in alphabetical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Qubit {
    pub const ALL: [Qubit; 7] = [
        Qubit::A,
        Qubit::B,
        Qubit::C,
        Qubit::D,
        Qubit::E,
        Qubit::F,
        Qubit::G,
    ];

    /// Zero-based index (A = 0).
    pub const fn index(self) -> usize {
        self as usize
    }

    /// One-based number (A = 1, ..., G = 7).
    pub const fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Option<Qubit> {
        Qubit::ALL.get(i).copied()
    }

    pub const fn letter(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl TryFrom<char> for Qubit {
    type Error = FanoError;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        match c {
            'A'..='G' => Ok(Qubit::ALL[(c as u8 - b'A') as usize]),
            _ => Err(FanoError::UnknownQubit(c.to_string())),
        }
    }
}

use Qubit::*;

/// The seven oriented lines; the letter order fixes tensor axis order.
const LINE_TABLE: [[Qubit; 3]; 7] = [
    [A, B, D],
    [B, C, E],
    [C, D, F],
    [D, E, G],
    [E, F, A],
    [F, G, B],
    [G, A, C],
];

/// One of the seven canonical lines, indexed 0..7 in the order
/// ABD, BCE, CDF, DEG, EFA, FGB, GAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line(u8);

impl Line {
    pub const ALL: [Line; 7] = [
        Line(0),
        Line(1),
        Line(2),
        Line(3),
        Line(4),
        Line(5),
        Line(6),
    ];

    pub fn from_index(i: usize) -> Option<Line> {
        Line::ALL.get(i).copied()
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn points(self) -> [Qubit; 3] {
        LINE_TABLE[self.0 as usize]
    }

    pub fn contains(self, q: Qubit) -> bool {
        self.points().contains(&q)
    }

    /// Axis of the line's tensor that belongs to `q`.
    pub fn axis_of(self, q: Qubit) -> Option<Axis> {
        self.points()
            .iter()
            .position(|&p| p == q)
            .and_then(Axis::from_index)
    }

    pub fn name(self) -> String {
        self.points().iter().map(|q| q.letter()).collect()
    }

    /// The canonical line whose point set equals `points`.
    pub fn with_points(points: [Qubit; 3]) -> Option<Line> {
        Line::ALL
            .into_iter()
            .find(|l| points.iter().all(|&p| l.contains(p)))
    }

    /// The three canonical lines through `q`, in canonical order.
    pub fn through(q: Qubit) -> [Line; 3] {
        let v: Vec<Line> = Line::ALL.into_iter().filter(|l| l.contains(q)).collect();
        [v[0], v[1], v[2]]
    }

    /// The point shared with another line.
    pub fn meet(self, other: Line) -> Option<Qubit> {
        if self == other {
            return None;
        }
        self.points().into_iter().find(|&p| other.contains(p))
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in self.points() {
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

impl FromStr for Line {
    type Err = FanoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Line::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| FanoError::UnknownLine(s.to_string()))
    }
}

/// The unique canonical line through two distinct points.
pub fn line_through(x: Qubit, y: Qubit) -> Result<Line, FanoError> {
    if x == y {
        return Err(FanoError::SamePoint);
    }
    Line::ALL
        .into_iter()
        .find(|l| l.contains(x) && l.contains(y))
        .ok_or_else(|| FanoError::StructureBroken(format!("no line through {x}{y}")))
}

/// Incidence counts of a seven-line system, verified against the values a
/// projective plane of order two must have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceReport {
    /// Number of unordered line pairs meeting in exactly one point (21).
    pub line_pairs_meeting_once: usize,
    /// Lines through each point (3 each).
    pub lines_per_point: [usize; 7],
    /// Lines avoiding each point (4 each).
    pub exclusions_per_point: [usize; 7],
    /// Smallest and largest number of lines avoiding a pair of points (2, 2).
    pub pair_exclusions: (usize, usize),
    /// Lines avoiding a collinear triple: always 0.
    pub collinear_triple_exclusions: usize,
    /// Lines avoiding a non-collinear triple: always 1.
    pub noncollinear_triple_exclusions: usize,
    /// Number of non-collinear triples (28).
    pub noncollinear_triples: usize,
}

impl IncidenceReport {
    /// The triple-exclusion property as it holds for the plane: every
    /// non-collinear triple is avoided by exactly one line, so the claim that
    /// three individuals are never jointly excluded is true only for the 7
    /// collinear triples. This flags that discrepancy.
    pub fn property_four_discrepancy(&self) -> bool {
        self.noncollinear_triple_exclusions != 0
    }
}

pub fn incidence_report() -> Result<IncidenceReport, FanoError> {
    incidence_report_for(&LINE_TABLE)
}

/// Brute-force incidence counts on an arbitrary seven-line system.
pub fn incidence_report_for(lines: &[[Qubit; 3]; 7]) -> Result<IncidenceReport, FanoError> {
    let broken = |m: String| Err(FanoError::StructureBroken(m));
    let has = |l: &[Qubit; 3], q: Qubit| l.contains(&q);

    let mut meeting_once = 0;
    for i in 0..7 {
        for j in i + 1..7 {
            let shared = lines[i].iter().filter(|&&q| has(&lines[j], q)).count();
            if shared != 1 {
                return broken(format!("lines {i} and {j} share {shared} points"));
            }
            meeting_once += 1;
        }
    }

    let mut lines_per_point = [0; 7];
    let mut exclusions_per_point = [0; 7];
    for q in Qubit::ALL {
        let on = lines.iter().filter(|l| has(l, q)).count();
        lines_per_point[q.index()] = on;
        exclusions_per_point[q.index()] = 7 - on;
        if on != 3 {
            return broken(format!("point {q} lies on {on} lines"));
        }
    }

    let mut pair_min = usize::MAX;
    let mut pair_max = 0;
    for (x, y) in pairs() {
        let avoid = lines.iter().filter(|l| !has(l, x) && !has(l, y)).count();
        pair_min = pair_min.min(avoid);
        pair_max = pair_max.max(avoid);
    }
    if (pair_min, pair_max) != (2, 2) {
        return broken(format!("pair exclusions range {pair_min}..={pair_max}"));
    }

    let mut collinear_max = 0;
    let mut noncollinear = Vec::new();
    for t in triples() {
        let avoid = lines
            .iter()
            .filter(|l| t.iter().all(|&q| !has(l, q)))
            .count();
        let collinear = lines.iter().any(|l| t.iter().all(|&q| has(l, q)));
        if collinear {
            collinear_max = collinear_max.max(avoid);
        } else {
            noncollinear.push(avoid);
        }
    }
    if collinear_max != 0 {
        return broken("a collinear triple is avoided by some line".into());
    }
    if noncollinear.len() != 28 || noncollinear.iter().any(|&n| n != 1) {
        return broken("non-collinear triples are not each avoided by exactly one line".into());
    }

    Ok(IncidenceReport {
        line_pairs_meeting_once: meeting_once,
        lines_per_point,
        exclusions_per_point,
        pair_exclusions: (pair_min, pair_max),
        collinear_triple_exclusions: collinear_max,
        noncollinear_triple_exclusions: 1,
        noncollinear_triples: noncollinear.len(),
    })
}

fn pairs() -> impl Iterator<Item = (Qubit, Qubit)> {
    (0..7).flat_map(|i| (i + 1..7).map(move |j| (Qubit::ALL[i], Qubit::ALL[j])))
}

fn triples() -> impl Iterator<Item = [Qubit; 3]> {
    (0..7).flat_map(|i| {
        (i + 1..7).flat_map(move |j| {
            (j + 1..7).map(move |k| [Qubit::ALL[i], Qubit::ALL[j], Qubit::ALL[k]])
        })
    })
}

/// `±` a qubit label, the value of an imaginary-octonion product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedQubit {
    pub negative: bool,
    pub unit: Qubit,
}

impl SignedQubit {
    pub const fn plus(unit: Qubit) -> Self {
        Self {
            negative: false,
            unit,
        }
    }

    pub const fn minus(unit: Qubit) -> Self {
        Self {
            negative: true,
            unit,
        }
    }

    pub const fn negated(self) -> Self {
        Self {
            negative: !self.negative,
            unit: self.unit,
        }
    }
}

impl fmt::Display for SignedQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { "-" } else { "+" }, self.unit)
    }
}

/// Row `X`, column `Y` holds `X·Y` as a signed 1-based label; 0 = blank.
const OCTONION_TABLE: [[i8; 7]; 7] = [
    //  A   B   C   D   E   F   G
    [0, 4, 7, -2, 6, -5, -3], // A
    [-4, 0, 5, 1, -3, 7, -6], // B
    [-7, -5, 0, 6, 2, -4, 1], // C
    [2, -1, -6, 0, 7, 3, -5], // D
    [-6, 3, -2, -7, 0, 1, 4], // E
    [5, -7, 4, -3, -1, 0, 2], // F
    [3, 6, -1, 5, -4, -2, 0], // G
];

/// Product of two distinct imaginary octonion units, read from the table.
pub fn octonion_product(x: Qubit, y: Qubit) -> Result<SignedQubit, FanoError> {
    octonion_entry(&OCTONION_TABLE, x, y)
}

fn octonion_entry(table: &[[i8; 7]; 7], x: Qubit, y: Qubit) -> Result<SignedQubit, FanoError> {
    if x == y {
        return Err(FanoError::DiagonalUndefined);
    }
    let v = table[x.index()][y.index()];
    let unit = Qubit::from_index(v.unsigned_abs() as usize - 1)
        .ok_or_else(|| FanoError::StructureBroken(format!("table entry {v}")))?;
    Ok(SignedQubit {
        negative: v < 0,
        unit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OctonionReport {
    /// Cyclic relations `XY = Z`, `YZ = X`, `ZX = Y` checked over all lines (21).
    pub line_relations: usize,
    /// Off-diagonal pairs with `XY = -YX` (42).
    pub antisymmetric_entries: usize,
    /// Rows and columns that are signed permutations of the other six units (14).
    pub signed_permutation_lines: usize,
}

pub fn octonion_report() -> Result<OctonionReport, FanoError> {
    octonion_report_for(&OCTONION_TABLE, &LINE_TABLE)
}

/// Validates an octonion table against the orientation of a line system.
pub fn octonion_report_for(
    table: &[[i8; 7]; 7],
    lines: &[[Qubit; 3]; 7],
) -> Result<OctonionReport, FanoError> {
    let broken = |m: String| Err(FanoError::StructureBroken(m));
    let mut line_relations = 0;
    for l in lines {
        for r in 0..3 {
            let (x, y, z) = (l[r], l[(r + 1) % 3], l[(r + 2) % 3]);
            if octonion_entry(table, x, y)? != SignedQubit::plus(z) {
                return broken(format!("{x}{y} != +{z}"));
            }
            line_relations += 1;
        }
    }
    let mut antisymmetric = 0;
    for x in Qubit::ALL {
        for y in Qubit::ALL.into_iter().filter(|&y| y != x) {
            if octonion_entry(table, x, y)? != octonion_entry(table, y, x)?.negated() {
                return broken(format!("{x}{y} is not antisymmetric"));
            }
            antisymmetric += 1;
        }
    }
    let mut signed_perms = 0;
    for x in Qubit::ALL {
        let others = || Qubit::ALL.into_iter().filter(move |&y| y != x);
        let row: Result<Vec<Qubit>, _> = others()
            .map(|y| octonion_entry(table, x, y).map(|s| s.unit))
            .collect();
        let col: Result<Vec<Qubit>, _> = others()
            .map(|y| octonion_entry(table, y, x).map(|s| s.unit))
            .collect();
        for units in [row?, col?] {
            let mut sorted = units.clone();
            sorted.sort();
            if sorted != others().collect::<Vec<_>>() {
                return broken(format!("row/column {x} is not a signed permutation"));
            }
            signed_perms += 1;
        }
    }
    Ok(OctonionReport {
        line_relations,
        antisymmetric_entries: antisymmetric,
        signed_permutation_lines: signed_perms,
    })
}

/// The 56 amplitudes of the seven-line state, one hypermatrix per line with
/// axes in the line's point order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SevenQubitState {
    lines: [Hypermatrix; 7],
}

impl SevenQubitState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(lines: [Hypermatrix; 7]) -> Self {
        Self { lines }
    }

    /// State populated only on `line`.
    pub fn single(line: Line, a: Hypermatrix) -> Self {
        let mut s = Self::zero();
        s.lines[line.index()] = a;
        s
    }

    /// Random amplitudes on `lines`; every other line is zero.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, lines: &[Line], spread: f64) -> Self {
        let mut s = Self::zero();
        for &l in lines {
            s.lines[l.index()] = Hypermatrix::random(rng, spread);
        }
        s
    }

    pub fn line(&self, line: Line) -> &Hypermatrix {
        &self.lines[line.index()]
    }

    pub fn line_mut(&mut self, line: Line) -> &mut Hypermatrix {
        &mut self.lines[line.index()]
    }

    pub fn set_line(&mut self, line: Line, a: Hypermatrix) {
        self.lines[line.index()] = a;
    }

    pub fn lines(&self) -> &[Hypermatrix; 7] {
        &self.lines
    }

    /// All 56 components, line by line.
    pub fn components(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.lines.iter().flat_map(|a| a.entries().iter().copied())
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        self.components().collect()
    }

    /// Inverse of [`SevenQubitState::to_vec`]; requires 56 finite values.
    pub fn from_slice(v: &[Complex64]) -> Option<Self> {
        if v.len() != 56 {
            return None;
        }
        let mut s = Self::zero();
        for (k, chunk) in v.chunks(8).enumerate() {
            s.lines[k] = Hypermatrix::new(chunk.try_into().ok()?).ok()?;
        }
        Some(s)
    }

    /// Largest component magnitude.
    pub fn scale(&self) -> f64 {
        self.lines
            .iter()
            .map(Hypermatrix::scale)
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.lines
            .iter()
            .map(Hypermatrix::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&self) -> Result<Self, FanoError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(FanoError::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            lines: self.lines.map(|a| a.scaled(factor)),
        }
    }

    /// Lines carrying a nonzero tensor.
    pub fn support(&self) -> Vec<Line> {
        Line::ALL
            .into_iter()
            .filter(|l| !self.lines[l.index()].is_zero())
            .collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.lines.iter().all(|a| a.is_real(tol))
    }
}

/// One stratum of the seven-qutrit decomposition: `k` doublets and `7-k`
/// singlets, occurring `multiplicity` times with dimension `2^k` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QutritStratum {
    pub doublets: usize,
    pub multiplicity: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QutritCounts {
    pub strata: Vec<QutritStratum>,
    /// `Σ multiplicity · dimension`, which must equal 3⁷.
    pub total_dimension: usize,
    /// Every canonical line, read as a doublet pattern, is a three-doublet term.
    pub lines_in_three_doublet_stratum: bool,
    /// The seven listed `(2,2,1,2,1,1,1)`-type patterns are exactly the lines.
    pub listed_patterns_match_lines: bool,
}

/// Doublet/singlet patterns of the 56 as listed in the branching result.
pub const LINE_PATTERNS: [[u8; 7]; 7] = [
    [2, 2, 1, 2, 1, 1, 1],
    [1, 2, 2, 1, 2, 1, 1],
    [1, 1, 2, 2, 1, 2, 1],
    [1, 1, 1, 2, 2, 1, 2],
    [2, 1, 1, 1, 2, 2, 1],
    [1, 2, 1, 1, 1, 2, 2],
    [2, 1, 2, 1, 1, 1, 2],
];

/// The `(2,..,2,1,..,1)` strata of `(3,3,3,3,3,3,3)` under `[SL(3)]⁷ → [SL(2)]⁷`,
/// enumerated over all 2⁷ doublet/singlet choices.
pub fn qutrit_embedding_counts() -> QutritCounts {
    let mut multiplicity = [0usize; 8];
    for mask in 0u32..128 {
        multiplicity[mask.count_ones() as usize] += 1;
    }
    let strata: Vec<QutritStratum> = (0..8)
        .rev()
        .map(|k| QutritStratum {
            doublets: k,
            multiplicity: multiplicity[k],
            dimension: 1 << k,
        })
        .collect();
    let total_dimension = strata.iter().map(|s| s.multiplicity * s.dimension).sum();
    let pattern_of = |l: Line| -> [u8; 7] {
        std::array::from_fn(|i| if l.contains(Qubit::ALL[i]) { 2 } else { 1 })
    };
    let lines_in_three_doublet_stratum = Line::ALL
        .into_iter()
        .all(|l| pattern_of(l).iter().filter(|&&d| d == 2).count() == 3);
    let listed_patterns_match_lines = Line::ALL
        .into_iter()
        .all(|l| LINE_PATTERNS[l.index()] == pattern_of(l));
    QutritCounts {
        strata,
        total_dimension,
        lines_in_three_doublet_stratum,
        listed_patterns_match_lines,
    }
}
