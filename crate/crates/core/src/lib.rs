//! Tripartite entanglement of seven qubits arranged on the Fano plane.
//!
//! The 56 amplitudes of a seven-qubit state split into seven 2×2×2
//! hypermatrices, one per oriented Fano line. Each block carries Cayley's
//! hyperdeterminant; the whole state carries Cartan's quartic E7 invariant,
//! assembled here from 35 ε-contractions indexed by the plane.
//!
//! Modules:
//! - [`algebra`]: hypermatrices, the ε-contraction engine, the hyperdeterminant.
//! - [`fano`]: points, lines, the octonion table and the 56-component state.
//! - [`invariant`]: the term catalog, I₄ in its several forms, classification.
//! - [`group`]: the [SL(2,C)]⁷ action, plane automorphisms, invariance checks.
//! - [`subsectors`]: the three-line and one-line reductions.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod fano;
pub mod group;
pub mod invariant;
pub mod rng;
pub mod subsectors;

pub use num_complex::Complex64;

pub use algebra::{
    apply_sl2, cayley_det, cayley_det_contracted, epsilon_contract, kernel_witness, tangle3,
    triality_permute, AlgebraError, Axis, ContractionPattern, Hypermatrix, KernelWitness, Sl2,
    Slot,
};
pub use fano::{Line, Qubit, SevenQubitState};
pub use group::{act, relabel, FanoAutomorphism, Sl2Tuple};
pub use invariant::{
    classify, entropy, i4_canonical, i4_eigen, i4_fano, tangle7, CanonicalCharges, Classification,
    NormalForm, TermCatalog,
};
pub use subsectors::{i4_n2, i4_n4, pq_split, N4State, PqVector};
