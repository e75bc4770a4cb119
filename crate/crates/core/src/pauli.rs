//! Pauli strings, stabilizer projectors, and the brute-force
//! simultaneous-eigenstate oracle that canonicalizes the ancilla-pattern to
//! target-state tables.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMatrix, PureState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            Pauli::I => ndarray::array![[one, z], [z, one]],
            Pauli::X => ndarray::array![[z, one], [one, z]],
            Pauli::Y => ndarray::array![[z, -C64::i()], [C64::i(), z]],
            Pauli::Z => ndarray::array![[one, z], [z, -one]],
        }
    }

    pub fn anticommutes_with(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

/// A tensor product of single-qubit Pauli operators, e.g. `ZZ` or `XIXZ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() || letters.len() > crate::linalg::MAX_QUBITS {
            return Err(Error::InvalidArgument(
                "Pauli string length must be 1..=8".into(),
            ));
        }
        Ok(Self { letters })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    /// Qubits on which the string acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn is_z_string(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I || p == Pauli::Z)
    }

    pub fn is_x_string(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I || p == Pauli::X)
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = self.letters[0].matrix();
        for &p in &self.letters[1..] {
            m = kron(&m, &p.matrix());
        }
        m
    }

    /// Pauli strings commute iff they differ at an even number of
    /// non-identity positions.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.letters
            .iter()
            .zip(other.letters.iter())
            .filter(|(&a, &b)| a.anticommutes_with(b))
            .count()
            % 2
            == 0
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!(
                    "invalid Pauli letter '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A +-1 eigenvalue label. Ancilla bit 0 selects `Plus`, bit 1 `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_bit(bit: u8) -> Sign {
        if bit == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

/// `(I + sign * S) / 2`, the projector onto the `sign` eigenspace of `S`.
pub fn stabilizer_projector(stab: &PauliString, sign: Sign) -> CMatrix {
    let dim = 1usize << stab.n_qubits();
    let s = stab.matrix().mapv(|z| z * (0.5 * sign.value()));
    identity(dim).mapv(|z| z * 0.5) + s
}

/// The unique state with `S_i |psi> = sign_i |psi>` for all i, found by
/// multiplying the eigenspace projectors and extracting the rank-1 range.
/// The first nonzero amplitude is made real positive.
pub fn simultaneous_eigenstate(stabs: &[PauliString], signs: &[Sign]) -> Result<PureState> {
    if stabs.is_empty() || stabs.len() != signs.len() {
        return Err(Error::InvalidArgument(
            "need equally many stabilizers and signs, at least one".into(),
        ));
    }
    let n = stabs[0].n_qubits();
    if stabs.iter().any(|s| s.n_qubits() != n) {
        return Err(Error::DimensionMismatch(
            "stabilizers act on different register sizes".into(),
        ));
    }
    for i in 0..stabs.len() {
        for j in (i + 1)..stabs.len() {
            if !stabs[i].commutes_with(&stabs[j]) {
                return Err(Error::NonCommuting);
            }
        }
    }
    let dim = 1usize << n;
    let mut proj = identity(dim);
    for (stab, &sign) in stabs.iter().zip(signs.iter()) {
        proj = proj.dot(&stabilizer_projector(stab, sign));
    }
    let trace: f64 = proj.diag().iter().map(|z| z.re).sum();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::DegenerateEigenspace(trace));
    }
    // Rank-1 projector: its largest column is the state up to scale.
    let (col, _) = (0..dim)
        .map(|j| {
            (
                j,
                proj.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>(),
            )
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let mut amps = proj.column(col).to_owned();
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.mapv_inplace(|z| z / norm);
    let first = amps
        .iter()
        .find(|z| z.norm() > 1e-9)
        .copied()
        .ok_or_else(|| Error::Numeric("projector range extraction found zero vector".into()))?;
    let phase = first / first.norm();
    amps.mapv_inplace(|z| z * phase.conj());
    PureState::new(amps)
}

/// The Bell stabilizers `Z1 Z2` and `X1 X2`.
pub fn bell_stabilizers() -> Vec<PauliString> {
    vec!["ZZ".parse().unwrap(), "XX".parse().unwrap()]
}

/// The GHZ-family stabilizers `Z1 Z2`, `Z2 Z3`, `Z3 Z4`, `X1 X2 X3 X4`.
pub fn ghz_stabilizers() -> Vec<PauliString> {
    vec![
        "ZZII".parse().unwrap(),
        "IZZI".parse().unwrap(),
        "IIZZ".parse().unwrap(),
        "XXXX".parse().unwrap(),
    ]
}

/// Human-readable label for a two-branch superposition state, e.g.
/// `0000+1111`. Errors if the state is not of that shape.
pub fn branch_label(state: &PureState) -> Result<String> {
    let n = state.n_qubits();
    let nonzero: Vec<(usize, C64)> = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-9)
        .map(|(i, z)| (i, *z))
        .collect();
    if nonzero.len() != 2 {
        return Err(Error::InvalidArgument(
            "state is not a two-branch superposition".into(),
        ));
    }
    let (a, za) = nonzero[0];
    let (b, zb) = nonzero[1];
    let rel = zb / za;
    let sign = if rel.re > 0.0 { '+' } else { '-' };
    Ok(format!("{:0n$b}{sign}{:0n$b}", a, b, n = n))
}
