//! Reductions of the 56: three lines through one point (24 amplitudes)
//! and a single line (8 amplitudes).

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{cayley_det, Hypermatrix};
use crate::fano::{Line, Qubit, SevenQubitState};
use crate::group::{relabel, FanoAutomorphism};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsectorError {
    #[error("line {line} does not pass through apex {apex}")]
    WrongApex { apex: Qubit, line: Line },
}

/// A state supported on the three lines through `apex`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N4State {
    apex: Qubit,
    /// Tensors on `Line::through(apex)`, in canonical line order.
    tensors: [Hypermatrix; 3],
}

impl N4State {
    pub fn new(apex: Qubit, tensors: [Hypermatrix; 3]) -> Self {
        Self { apex, tensors }
    }

    /// Restricts `psi` to the lines through `apex`; any amplitude elsewhere
    /// is an error.
    pub fn from_state(psi: &SevenQubitState, apex: Qubit) -> Result<Self, SubsectorError> {
        if let Some(line) = psi.support().into_iter().find(|l| !l.contains(apex)) {
            return Err(SubsectorError::WrongApex { apex, line });
        }
        Ok(Self {
            apex,
            tensors: Line::through(apex).map(|l| *psi.line(l)),
        })
    }

    pub fn apex(&self) -> Qubit {
        self.apex
    }

    pub fn lines(&self) -> [Line; 3] {
        Line::through(self.apex)
    }

    pub fn tensors(&self) -> &[Hypermatrix; 3] {
        &self.tensors
    }

    pub fn to_state(&self) -> SevenQubitState {
        let mut psi = SevenQubitState::zero();
        for (l, a) in self.lines().into_iter().zip(self.tensors) {
            psi.set_line(l, a);
        }
        psi
    }
}

/// A 2×2 block indexed by the two non-apex qubits of one line, in line order.
pub type Block = [[Complex64; 2]; 2];

/// The 12-vectors `P` (apex index 0) and `Q` (apex index 1), as three blocks
/// for the lines ABD, EFA, GAC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqVector {
    pub p: [Block; 3],
    pub q: [Block; 3],
}

impl PqVector {
    /// `x·y = Σ_blocks ε^{i₁i₂} ε^{j₁j₂} x_{i₁j₁} y_{i₂j₂}`.
    pub fn dot(x: &[Block; 3], y: &[Block; 3]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| block_pairing(a, b)).sum()
    }

    pub fn p_sqr(&self) -> Complex64 {
        Self::dot(&self.p, &self.p)
    }

    pub fn q_sqr(&self) -> Complex64 {
        Self::dot(&self.q, &self.q)
    }

    pub fn p_dot_q(&self) -> Complex64 {
        Self::dot(&self.p, &self.q)
    }

    /// `P²Q² - (P·Q)²`.
    pub fn quartic(&self) -> Complex64 {
        let pq = self.p_dot_q();
        self.p_sqr() * self.q_sqr() - pq * pq
    }
}

fn block_pairing(x: &Block, y: &Block) -> Complex64 {
    x[0][0] * y[1][1] - x[0][1] * y[1][0] - x[1][0] * y[0][1] + x[1][1] * y[0][0]
}

/// Splits each line's tensor along the apex axis into its `P` and `Q` slices.
/// Apexes other than A are first carried to A by a power of the shift.
pub fn pq_split(s: &N4State) -> PqVector {
    let at_a = if s.apex == Qubit::A {
        *s
    } else {
        // shift^k sends the apex to A, preserving line orientation
        let k = (7 - s.apex.index()) % 7;
        let sigma = FanoAutomorphism::shift().power(k);
        let moved = relabel(&s.to_state(), &sigma);
        N4State::from_state(&moved, Qubit::A)
            .expect("shift maps lines through the apex to lines through A")
    };
    let mut p = [[[Complex64::new(0.0, 0.0); 2]; 2]; 3];
    let mut q = p;
    for (k, (line, a)) in at_a.lines().into_iter().zip(at_a.tensors).enumerate() {
        let apex_axis = line.axis_of(Qubit::A).expect("line through A").index();
        for idx in 0..8usize {
            let bits = [idx >> 2 & 1, idx >> 1 & 1, idx & 1];
            let rest: Vec<usize> = (0..3)
                .filter(|&ax| ax != apex_axis)
                .map(|ax| bits[ax])
                .collect();
            let target = if bits[apex_axis] == 0 { &mut p } else { &mut q };
            target[k][rest[0]][rest[1]] = a.entries()[idx];
        }
    }
    PqVector { p, q }
}

/// The three-line quartic `P²Q² - (P·Q)²`.
pub fn i4_n4(s: &N4State) -> Complex64 {
    pq_split(s).quartic()
}

/// The one-line quartic, `-Det a`.
pub fn i4_n2(a: &Hypermatrix) -> Complex64 {
    -cayley_det(a)
}
