//! Dense statevector simulation.
//!
//! Qubit `q` of an `n`-qubit register lives at bit `n - 1 - q` of the basis
//! index, so qubit 0 is the most significant bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gates::{Circuit, GateInstance, GateKind, Mat2};

pub const MAX_QUBITS: usize = 24;

/// Branches with less probability than this cannot be collapsed onto.
pub const COLLAPSE_THRESHOLD: f64 = 1e-15;

/// Registers at least this wide use the data-parallel kernels.
#[cfg(feature = "parallel")]
pub const PARALLEL_MIN_QUBITS: usize = 14;

/// Bit mask of qubit `q` in an `n`-qubit index.
#[inline]
pub fn qubit_mask(num_qubits: usize, q: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

/// Value of qubit `q` in basis index `idx`.
#[inline]
pub fn qubit_bit(num_qubits: usize, idx: usize, q: usize) -> bool {
    idx & qubit_mask(num_qubits, q) != 0
}

/// Binary label of `idx`, qubit 0 first.
pub fn bit_label(num_qubits: usize, idx: usize) -> String {
    (0..num_qubits)
        .map(|q| if qubit_bit(num_qubits, idx, q) { '1' } else { '0' })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// Per-gate control test: `(idx & mask) == value`.
#[derive(Debug, Clone, Copy)]
struct ControlMask {
    mask: usize,
    value: usize,
}

impl ControlMask {
    fn of(gate: &GateInstance, n: usize) -> Self {
        let mut mask = 0;
        let mut value = 0;
        for c in &gate.controls {
            let m = qubit_mask(n, c.qubit);
            mask |= m;
            if c.on_one {
                value |= m;
            }
        }
        ControlMask { mask, value }
    }

    #[inline]
    fn hit(&self, idx: usize) -> bool {
        idx & self.mask == self.value
    }
}

#[inline]
fn mix(m: &Mat2, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
}

fn kernel_1q_seq(amps: &mut [Complex64], stride: usize, m: &Mat2, cm: ControlMask) {
    kernel_1q_span(amps, 0, stride, m, cm);
}

/// Apply to a slice that starts at global index `offset` and holds whole
/// `2·stride` blocks.
fn kernel_1q_span(amps: &mut [Complex64], offset: usize, stride: usize, m: &Mat2, cm: ControlMask) {
    for (block, chunk) in amps.chunks_mut(2 * stride).enumerate() {
        let base = offset + block * 2 * stride;
        let (lo, hi) = chunk.split_at_mut(stride);
        kernel_pairs(lo, hi, base, m, cm);
    }
}

#[inline]
fn kernel_pairs(lo: &mut [Complex64], hi: &mut [Complex64], base: usize, m: &Mat2, cm: ControlMask) {
    for (off, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
        if cm.hit(base + off) {
            (*a, *b) = mix(m, *a, *b);
        }
    }
}

/// Amplitudes per rayon task.
#[cfg(feature = "parallel")]
const PAR_CHUNK: usize = 1 << 13;

#[cfg(feature = "parallel")]
fn kernel_1q_par(amps: &mut [Complex64], stride: usize, m: &Mat2, cm: ControlMask) {
    use rayon::prelude::*;
    if 2 * stride <= PAR_CHUNK {
        // Many small blocks: hand each task a run of whole blocks.
        amps.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(i, chunk)| kernel_1q_span(chunk, i * PAR_CHUNK, stride, m, cm));
    } else {
        // Few large blocks: split the two halves of each block in step.
        let half = PAR_CHUNK / 2;
        for (block, chunk) in amps.chunks_mut(2 * stride).enumerate() {
            let base = block * 2 * stride;
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_chunks_mut(half)
                .zip(hi.par_chunks_mut(half))
                .enumerate()
                .for_each(|(i, (l, h))| kernel_pairs(l, h, base + i * half, m, cm));
        }
    }
}

fn kernel_swap(amps: &mut [Complex64], ma: usize, mb: usize, cm: ControlMask) {
    for i in 0..amps.len() {
        if i & ma != 0 && i & mb == 0 && cm.hit(i) {
            amps.swap(i, i ^ ma ^ mb);
        }
    }
}

impl StateVector {
    pub fn new_zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|idx⟩`.
    pub fn basis(num_qubits: usize, idx: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::SizeOutOfRange(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if idx >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {idx} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two. No normalization
    /// is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidArgument(format!(
                "{len} amplitudes is not a register size"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::SizeOutOfRange(num_qubits));
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, idx: usize) -> Complex64 {
        self.amps[idx]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probability(&self, idx: usize) -> f64 {
        self.amps[idx].norm_sqr()
    }

    /// Probability of reading `outcome` on `qubit`.
    pub fn qubit_probability(&self, qubit: usize, outcome: bool) -> Result<f64> {
        self.check_qubit(qubit)?;
        let m = qubit_mask(self.num_qubits, qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & m != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Apply one gate, choosing the parallel kernel on wide registers.
    pub fn apply_gate(&mut self, gate: &GateInstance) -> Result<()> {
        #[cfg(feature = "parallel")]
        if self.num_qubits >= PARALLEL_MIN_QUBITS {
            return self.apply_gate_par(gate);
        }
        self.apply_gate_seq(gate)
    }

    pub fn apply_gate_seq(&mut self, gate: &GateInstance) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let n = self.num_qubits;
        let cm = ControlMask::of(gate, n);
        match gate.kind.matrix() {
            Some(m) => kernel_1q_seq(&mut self.amps, qubit_mask(n, gate.targets[0]), &m, cm),
            None => kernel_swap(
                &mut self.amps,
                qubit_mask(n, gate.targets[0]),
                qubit_mask(n, gate.targets[1]),
                cm,
            ),
        }
        Ok(())
    }

    /// Data-parallel kernel; bit-identical to [`Self::apply_gate_seq`].
    #[cfg(feature = "parallel")]
    pub fn apply_gate_par(&mut self, gate: &GateInstance) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let n = self.num_qubits;
        let cm = ControlMask::of(gate, n);
        match gate.kind.matrix() {
            Some(m) => kernel_1q_par(&mut self.amps, qubit_mask(n, gate.targets[0]), &m, cm),
            None => kernel_swap(
                &mut self.amps,
                qubit_mask(n, gate.targets[0]),
                qubit_mask(n, gate.targets[1]),
                cm,
            ),
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "{}-qubit circuit on a {}-qubit state",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        circuit.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Project `qubit` onto `outcome` and renormalize. Returns the branch
    /// probability.
    pub fn project(&mut self, qubit: usize, outcome: bool) -> Result<f64> {
        let p = self.qubit_probability(qubit, outcome)?;
        if p < COLLAPSE_THRESHOLD {
            return Err(Error::ZeroNormBranch(p));
        }
        let m = qubit_mask(self.num_qubits, qubit);
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & m != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Projective measurement with collapse.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<bool> {
        let p1 = self.qubit_probability(qubit, true)?;
        let outcome = rng.random::<f64>() < p1;
        self.project(qubit, outcome)?;
        Ok(outcome)
    }

    /// Marginal distribution over `qubits`, indexed by the bits of `qubits`
    /// in the given order (first listed qubit is the high bit).
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let k = qubits.len();
        let mut out = vec![0.0; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            out[sub_index(self.num_qubits, i, qubits)] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Sample `shots` readouts of `qubits` without disturbing the state.
    /// Keys are bit strings in the order of `qubits`.
    pub fn sample_counts(
        &self,
        qubits: &[usize],
        shots: u64,
        seed: u64,
    ) -> Result<BTreeMap<String, u64>> {
        let probs = self.marginal(qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = sample_distribution(&probs, shots, &mut rng);
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(i, c)| (bit_label(qubits.len(), i), c))
            .collect())
    }
}

/// Index of the sub-register `qubits` inside the full index `idx`.
pub fn sub_index(num_qubits: usize, idx: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | qubit_bit(num_qubits, idx, q) as usize)
}

/// Draw `shots` samples from a (possibly slightly unnormalized) distribution
/// and return per-outcome counts.
pub fn sample_distribution<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let total: f64 = probs.iter().sum();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p / total;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[i] += 1;
    }
    counts
}

/// Rates of the stochastic Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub depolarizing_1q: f64,
    pub depolarizing_2q: f64,
    pub readout_flip: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams {
        depolarizing_1q: 0.0,
        depolarizing_2q: 0.0,
        readout_flip: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("depolarizing_1q", self.depolarizing_1q),
            ("depolarizing_2q", self.depolarizing_2q),
            ("readout_flip", self.readout_flip),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        *self == Self::NONE
    }
}

impl Default for NoiseParams {
    /// Median CNOT and readout error of a 27-qubit superconducting device;
    /// single-qubit gates are taken ten times cleaner than CNOTs.
    fn default() -> Self {
        NoiseParams {
            depolarizing_1q: 8.636e-4,
            depolarizing_2q: 8.636e-3,
            readout_flip: 1.410e-2,
        }
    }
}

const PAULIS: [GateKind; 3] = [GateKind::X, GateKind::Y, GateKind::Z];

/// Apply `gate`, then with the gate's error rate a uniformly random Pauli
/// (identity included) on each qubit it touched.
pub fn apply_noisy_gate<R: Rng + ?Sized>(
    state: &mut StateVector,
    gate: &GateInstance,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<()> {
    state.apply_gate(gate)?;
    let p = if gate.arity() >= 2 {
        noise.depolarizing_2q
    } else {
        noise.depolarizing_1q
    };
    if p <= 0.0 {
        return Ok(());
    }
    for q in gate.qubits().collect::<Vec<_>>() {
        if rng.random::<f64>() < p {
            let which = rng.random_range(0..4usize);
            if which > 0 {
                state.apply_gate(&GateInstance::single(PAULIS[which - 1], q))?;
            }
        }
    }
    Ok(())
}

/// Push a readout distribution through independent bit flips on every
/// measured bit. Exact, not sampled.
pub fn apply_readout_flips(probs: &[f64], num_bits: usize, flip: f64) -> Vec<f64> {
    let mut cur = probs.to_vec();
    if flip <= 0.0 {
        return cur;
    }
    for b in 0..num_bits {
        let m = 1 << b;
        let mut next = vec![0.0; cur.len()];
        for (i, p) in cur.iter().enumerate() {
            next[i] += (1.0 - flip) * p;
            next[i ^ m] += flip * p;
        }
        cur = next;
    }
    cur
}
