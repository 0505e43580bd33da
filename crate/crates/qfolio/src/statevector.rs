//! Dense state-vector simulation.
//!
//! Amplitudes are indexed with qubit 0 in the most significant bit, matching
//! the ket-label orientation used for bitstrings elsewhere in the crate.
//! Rotation conventions are half-angle: `RX(theta) = exp(-i theta X / 2)`,
//! `RZ(theta) = exp(-i theta Z / 2)`, `ZZ(theta) = exp(-i (theta/2) Z Z)`.
//! `DiagPhase` multiplies each amplitude by `exp(-i gamma E[idx])`, the fast
//! path for a diagonal cost unitary.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::seed::stream_rng;

pub const MAX_QUBITS: usize = 24;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error)]
pub enum StateVectorError {
    #[error("too many qubits: {0} > {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit index {0} out of range for {1} qubits")]
    IndexOutOfRange(usize, usize),
    #[error("control and target coincide on qubit {0}")]
    SelfControlledGate(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// One gate application. Qubit indices are 0-based, most significant first.
#[derive(Debug, Clone)]
pub enum GateOp {
    X(usize),
    Z(usize),
    H(usize),
    RX { target: usize, theta: f64 },
    RZ { target: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    ZZ { a: usize, b: usize, theta: f64 },
    DiagPhase { gamma: f64, energies: Arc<Vec<f64>> },
}

impl GateOp {
    /// The inverse gate; applying a gate then its adjoint restores the state.
    pub fn adjoint(&self) -> GateOp {
        match self {
            GateOp::X(q) => GateOp::X(*q),
            GateOp::Z(q) => GateOp::Z(*q),
            GateOp::H(q) => GateOp::H(*q),
            GateOp::RX { target, theta } => GateOp::RX {
                target: *target,
                theta: -theta,
            },
            GateOp::RZ { target, theta } => GateOp::RZ {
                target: *target,
                theta: -theta,
            },
            GateOp::Cnot { control, target } => GateOp::Cnot {
                control: *control,
                target: *target,
            },
            GateOp::ZZ { a, b, theta } => GateOp::ZZ {
                a: *a,
                b: *b,
                theta: -theta,
            },
            GateOp::DiagPhase { gamma, energies } => GateOp::DiagPhase {
                gamma: -gamma,
                energies: Arc::clone(energies),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn init_zero(n: usize) -> Result<Self, StateVectorError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(StateVectorError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    fn bit_pos(&self, qubit: usize) -> Result<usize, StateVectorError> {
        if qubit >= self.n {
            return Err(StateVectorError::IndexOutOfRange(qubit, self.n));
        }
        Ok(self.n - 1 - qubit)
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<(), StateVectorError> {
        match gate {
            GateOp::X(q) => {
                let b = self.bit_pos(*q)?;
                self.for_each_pair(b, |amps, i0, i1| amps.swap(i0, i1));
            }
            GateOp::Z(q) => {
                let b = self.bit_pos(*q)?;
                self.for_each_pair(b, |amps, _i0, i1| amps[i1] = -amps[i1]);
            }
            GateOp::H(q) => {
                let b = self.bit_pos(*q)?;
                self.for_each_pair(b, |amps, i0, i1| {
                    let (a0, a1) = (amps[i0], amps[i1]);
                    amps[i0] = (a0 + a1) * FRAC_1_SQRT_2;
                    amps[i1] = (a0 - a1) * FRAC_1_SQRT_2;
                });
            }
            GateOp::RX { target, theta } => {
                let b = self.bit_pos(*target)?;
                let c = (theta / 2.0).cos();
                let s = (theta / 2.0).sin();
                let mis = Complex64::new(0.0, -s);
                self.for_each_pair(b, |amps, i0, i1| {
                    let (a0, a1) = (amps[i0], amps[i1]);
                    amps[i0] = a0 * c + a1 * mis;
                    amps[i1] = a0 * mis + a1 * c;
                });
            }
            GateOp::RZ { target, theta } => {
                let b = self.bit_pos(*target)?;
                let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
                let phase1 = Complex64::from_polar(1.0, theta / 2.0);
                self.for_each_pair(b, |amps, i0, i1| {
                    amps[i0] *= phase0;
                    amps[i1] *= phase1;
                });
            }
            GateOp::Cnot { control, target } => {
                if control == target {
                    return Err(StateVectorError::SelfControlledGate(*control));
                }
                let bc = self.bit_pos(*control)?;
                let bt = self.bit_pos(*target)?;
                for idx in 0..self.amps.len() {
                    if (idx >> bc) & 1 == 1 && (idx >> bt) & 1 == 0 {
                        self.amps.swap(idx, idx | (1 << bt));
                    }
                }
            }
            GateOp::ZZ { a, b, theta } => {
                if a == b {
                    return Err(StateVectorError::SelfControlledGate(*a));
                }
                let ba = self.bit_pos(*a)?;
                let bb = self.bit_pos(*b)?;
                let same = Complex64::from_polar(1.0, -theta / 2.0);
                let diff = Complex64::from_polar(1.0, theta / 2.0);
                for (idx, amp) in self.amps.iter_mut().enumerate() {
                    if ((idx >> ba) ^ (idx >> bb)) & 1 == 0 {
                        *amp *= same;
                    } else {
                        *amp *= diff;
                    }
                }
            }
            GateOp::DiagPhase { gamma, energies } => {
                if energies.len() != self.amps.len() {
                    return Err(StateVectorError::DimensionMismatch(
                        energies.len(),
                        self.amps.len(),
                    ));
                }
                for (amp, &e) in self.amps.iter_mut().zip(energies.iter()) {
                    *amp *= Complex64::from_polar(1.0, -gamma * e);
                }
            }
        }
        Ok(())
    }

    fn for_each_pair(&mut self, bit: usize, mut f: impl FnMut(&mut [Complex64], usize, usize)) {
        let step = 1 << bit;
        let size = self.amps.len();
        let mut base = 0;
        while base < size {
            for offset in base..base + step {
                f(&mut self.amps, offset, offset + step);
            }
            base += 2 * step;
        }
    }

    /// `<psi| diag(E) |psi>`; real because the operator is diagonal real.
    pub fn expectation_diagonal(&self, energies: &[f64]) -> Result<f64, StateVectorError> {
        if energies.len() != self.amps.len() {
            return Err(StateVectorError::DimensionMismatch(
                energies.len(),
                self.amps.len(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(energies)
            .map(|(a, &e)| a.norm_sqr() * e)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// `<self|other>`, for global-phase-insensitive equality checks.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multinomial measurement emulation: per-state counts, deterministic
    /// per seed.
    pub fn sample(&self, shots: u64, seed: u64) -> Vec<u64> {
        let probs = self.probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut counts = vec![0u64; probs.len()];
        let mut rng = stream_rng(seed, 0);
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c < u).min(counts.len() - 1);
            counts[idx] += 1;
        }
        counts
    }
}
