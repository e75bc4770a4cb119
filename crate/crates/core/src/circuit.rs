//! Gate-level construction and density-matrix execution of the
//! ancilla-mediated pump circuits.
//!
//! Each pump is the three-step sequence: (i) map the stabilizer eigenvalue
//! into a fresh ancilla with CNOTs (conjugated by Hadamards for X-type
//! stabilizers), (ii) rotate the flip qubit with an ancilla-controlled
//! RX whose flip probability is `sin^2(theta)`, (iii) reverse the mapping.
//! Ancilla bit 0 targets the +1 eigenspace, bit 1 the -1 eigenspace.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::FlipAxis;
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace_raw, qubit_bit, CMatrix, DensityMatrix, C64};
use crate::noise::{build_confusion, depolarize_raw, NoiseModel};
use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    /// `RX(theta)` on `target` when `control` is set; flip probability
    /// `sin^2(theta / 2)`.
    Crx { control: usize, target: usize, theta: f64 },
    /// Computational-basis dephasing of one qubit; actual outcome draws
    /// happen in [`Circuit::sample`].
    Measure(usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::Measure(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz { a, b } => vec![a, b],
            Gate::Crx { control, target, .. } => vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }
}

fn h_matrix() -> [[C64; 2]; 2] {
    let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

fn x_matrix() -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [[z, one], [one, z]]
}

fn z_matrix() -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [[one, z], [z, -one]]
}

fn rx_matrix(theta: f64) -> [[C64; 2]; 2] {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

/// `rho -> (U (x) 1) rho`, for a single-qubit `u` on qubit `q`, restricted to
/// rows where `control` (if any) is set.
fn mix_rows(mat: &mut CMatrix, n: usize, q: usize, u: &[[C64; 2]; 2], control: Option<usize>) {
    let dim = 1usize << n;
    let mask = 1usize << (n - 1 - q);
    for i0 in 0..dim {
        if i0 & mask != 0 {
            continue;
        }
        if let Some(c) = control {
            if qubit_bit(i0, c, n) == 0 {
                continue;
            }
        }
        let i1 = i0 | mask;
        for j in 0..dim {
            let a = mat[[i0, j]];
            let b = mat[[i1, j]];
            mat[[i0, j]] = u[0][0] * a + u[0][1] * b;
            mat[[i1, j]] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// `rho -> rho (U (x) 1)^dag`, column counterpart of [`mix_rows`].
fn mix_cols(mat: &mut CMatrix, n: usize, q: usize, u: &[[C64; 2]; 2], control: Option<usize>) {
    let dim = 1usize << n;
    let mask = 1usize << (n - 1 - q);
    for j0 in 0..dim {
        if j0 & mask != 0 {
            continue;
        }
        if let Some(c) = control {
            if qubit_bit(j0, c, n) == 0 {
                continue;
            }
        }
        let j1 = j0 | mask;
        for i in 0..dim {
            let a = mat[[i, j0]];
            let b = mat[[i, j1]];
            mat[[i, j0]] = a * u[0][0].conj() + b * u[0][1].conj();
            mat[[i, j1]] = a * u[1][0].conj() + b * u[1][1].conj();
        }
    }
}

fn apply_unitary(mat: &mut CMatrix, n: usize, q: usize, u: &[[C64; 2]; 2], control: Option<usize>) {
    mix_rows(mat, n, q, u, control);
    mix_cols(mat, n, q, u, control);
}

fn apply_gate(mat: &mut CMatrix, n: usize, gate: &Gate) {
    match *gate {
        Gate::H(q) => apply_unitary(mat, n, q, &h_matrix(), None),
        Gate::X(q) => apply_unitary(mat, n, q, &x_matrix(), None),
        Gate::Z(q) => apply_unitary(mat, n, q, &z_matrix(), None),
        Gate::Cnot { control, target } => {
            apply_unitary(mat, n, target, &x_matrix(), Some(control))
        }
        Gate::Cz { a, b } => apply_unitary(mat, n, b, &z_matrix(), Some(a)),
        Gate::Crx { control, target, theta } => {
            apply_unitary(mat, n, target, &rx_matrix(theta), Some(control))
        }
        Gate::Measure(q) => {
            let dim = 1usize << n;
            for i in 0..dim {
                for j in 0..dim {
                    if qubit_bit(i, q, n) != qubit_bit(j, q, n) {
                        mat[[i, j]] = C64::new(0.0, 0.0);
                    }
                }
            }
        }
    }
}

/// A gate sequence over a system register followed by ancilla qubits.
#[derive(Debug, Clone)]
pub struct Circuit {
    n_system: usize,
    ancilla_init: Vec<u8>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_system: usize, ancilla_init: Vec<u8>) -> Result<Self> {
        if n_system == 0 || n_system + ancilla_init.len() > crate::linalg::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "register of {} system + {} ancilla qubits exceeds the 8-qubit cap",
                n_system,
                ancilla_init.len()
            )));
        }
        if ancilla_init.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("ancilla bits must be 0 or 1".into()));
        }
        Ok(Self {
            n_system,
            ancilla_init,
            gates: Vec::new(),
        })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancilla(&self) -> usize {
        self.ancilla_init.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_system + self.ancilla_init.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.qubits().iter().any(|&q| q >= self.n_total()) {
            return Err(Error::InvalidArgument(format!(
                "gate {gate:?} addresses a qubit outside the {}-qubit register",
                self.n_total()
            )));
        }
        if let Gate::Crx { theta, .. } = gate {
            if !theta.is_finite() {
                return Err(Error::InvalidArgument("non-finite rotation angle".into()));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends one three-step pump block using the ancilla at
    /// `n_system + ancilla_slot` as the environment qubit. The ancilla's
    /// initialization bit selects the target eigenspace sign.
    pub fn append_pump(
        &mut self,
        stab: &PauliString,
        flip_qubit: usize,
        flip_axis: FlipAxis,
        theta: f64,
        ancilla_slot: usize,
    ) -> Result<()> {
        if stab.n_qubits() != self.n_system {
            return Err(Error::DimensionMismatch(format!(
                "stabilizer {stab} does not act on the {}-qubit system",
                self.n_system
            )));
        }
        let x_type = stab.is_x_string();
        if !x_type && !stab.is_z_string() {
            return Err(Error::Construction(format!(
                "unsupported stabilizer {stab}: only pure Z- or X-strings are pumped"
            )));
        }
        match (x_type, flip_axis) {
            (false, FlipAxis::X) | (true, FlipAxis::Z) => {}
            _ => {
                return Err(Error::Construction(format!(
                    "flip {flip_axis:?} commutes with stabilizer {stab}"
                )))
            }
        }
        let support = stab.support();
        if !support.contains(&flip_qubit) {
            return Err(Error::Construction(format!(
                "flip qubit {flip_qubit} is outside the support of {stab}"
            )));
        }
        if ancilla_slot >= self.n_ancilla() {
            return Err(Error::InvalidArgument(format!(
                "ancilla slot {ancilla_slot} out of range"
            )));
        }
        let ancilla = self.n_system + ancilla_slot;
        if x_type {
            for &q in &support {
                self.push(Gate::H(q))?;
            }
        }
        for &q in &support {
            self.push(Gate::Cnot { control: q, target: ancilla })?;
        }
        self.push(Gate::Crx {
            control: ancilla,
            target: flip_qubit,
            theta: 2.0 * theta,
        })?;
        for &q in support.iter().rev() {
            self.push(Gate::Cnot { control: q, target: ancilla })?;
        }
        if x_type {
            for &q in support.iter().rev() {
                self.push(Gate::H(q))?;
            }
        }
        Ok(())
    }

    /// Runs the circuit on a raw system matrix: extend with ancillas, apply
    /// gates (with interleaved depolarizing noise if given), trace ancillas.
    pub fn run_density_raw(&self, sys: &CMatrix, noise: Option<&NoiseModel>) -> Result<CMatrix> {
        let dim_sys = 1usize << self.n_system;
        if sys.dim() != (dim_sys, dim_sys) {
            return Err(Error::DimensionMismatch(format!(
                "input dim {:?}, circuit system dim {dim_sys}",
                sys.dim()
            )));
        }
        let n = self.n_total();
        let mut full = if self.n_ancilla() == 0 {
            sys.clone()
        } else {
            let dim_anc = 1usize << self.n_ancilla();
            let anc_index = self
                .ancilla_init
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | b as usize);
            let mut anc = CMatrix::zeros((dim_anc, dim_anc));
            anc[[anc_index, anc_index]] = C64::new(1.0, 0.0);
            kron(sys, &anc)
        };
        for gate in &self.gates {
            apply_gate(&mut full, n, gate);
            if let Some(model) = noise {
                let lambda = if gate.is_two_qubit() {
                    model.depolarizing_2q
                } else {
                    model.depolarizing_1q
                };
                if lambda > 0.0 && !matches!(gate, Gate::Measure(_)) {
                    full = depolarize_raw(&full, n, &gate.qubits(), lambda)?;
                }
            }
        }
        if self.n_ancilla() == 0 {
            Ok(full)
        } else {
            let keep: Vec<usize> = (0..self.n_system).collect();
            partial_trace_raw(&full, n, &keep)
        }
    }

    /// Validated execution on a density matrix.
    pub fn run_density(
        &self,
        rho0: &DensityMatrix,
        noise: Option<&NoiseModel>,
    ) -> Result<DensityMatrix> {
        if rho0.n_qubits() != self.n_system {
            return Err(Error::DimensionMismatch(format!(
                "state has {} qubits, circuit system has {}",
                rho0.n_qubits(),
                self.n_system
            )));
        }
        let out = self.run_density_raw(rho0.matrix(), noise)?;
        DensityMatrix::from_matrix(crate::linalg::hermitize(&out))
    }

    /// Shot-based computational-basis readout of the system register.
    ///
    /// Draws a multinomial sample from the diagonal of the executed state,
    /// with the noise model's readout flips folded in. Deterministic for a
    /// fixed seed.
    pub fn sample(
        &self,
        rho0: &DensityMatrix,
        shots: u64,
        noise: Option<&NoiseModel>,
        seed: u64,
    ) -> Result<BTreeMap<String, u64>> {
        if shots == 0 {
            return Err(Error::InvalidArgument("need at least one shot".into()));
        }
        let out = self.run_density(rho0, noise)?;
        let dim = out.dim();
        let mut probs: Vec<f64> = (0..dim).map(|i| out.matrix()[[i, i]].re.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        if let Some(model) = noise {
            if model.has_readout_error() {
                let confusion = build_confusion(model, self.n_system)?;
                probs = confusion.apply(&probs)?;
            }
        }
        let mut cdf = vec![0.0; dim];
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            cdf[i] = acc;
        }
        cdf[dim - 1] = 1.0;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c < r).min(dim - 1);
            let bits = format!("{:0n$b}", idx, n = self.n_system);
            *counts.entry(bits).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

/// Single-map pump circuit: one stabilizer, one ancilla.
pub fn pump_circuit(
    stab: &PauliString,
    flip_qubit: usize,
    flip_axis: FlipAxis,
    theta: f64,
    ancilla_bit: u8,
) -> Result<Circuit> {
    let mut c = Circuit::new(stab.n_qubits(), vec![ancilla_bit])?;
    c.append_pump(stab, flip_qubit, flip_axis, theta, 0)?;
    Ok(c)
}

/// The composite Bell cooling circuit: ZZ pump then XX pump, 2 system + 2
/// ancilla qubits. Ancilla bits select the target per the sign table.
pub fn bell_cooling_circuit(a_zz: u8, a_xx: u8, theta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(2, vec![a_zz, a_xx])?;
    c.append_pump(&"ZZ".parse().unwrap(), 0, FlipAxis::X, theta, 0)?;
    c.append_pump(&"XX".parse().unwrap(), 0, FlipAxis::Z, theta, 1)?;
    Ok(c)
}

/// The GHZ cooling circuit: `E_z1z2, E_z2z3, E_z3z4, E_xxxx` with one fresh
/// ancilla per map, 4 system + 4 ancilla qubits. Each ZZ link flips its
/// higher-index qubit so a p=1 sweep propagates qubit 1 down the chain.
pub fn ghz_cooling_circuit(bits: [u8; 4], theta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(4, bits.to_vec())?;
    let stabs = crate::pauli::ghz_stabilizers();
    c.append_pump(&stabs[0], 1, FlipAxis::X, theta, 0)?;
    c.append_pump(&stabs[1], 2, FlipAxis::X, theta, 1)?;
    c.append_pump(&stabs[2], 3, FlipAxis::X, theta, 2)?;
    c.append_pump(&stabs[3], 0, FlipAxis::Z, theta, 3)?;
    Ok(c)
}
