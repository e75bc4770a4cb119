//! Dense complex linear algebra over multi-qubit Hilbert spaces.
//!
//! Kets are written `|q1 q2 .. qn>` with qubit 1 leftmost; the basis index of
//! a bitstring is its big-endian value, so `|01>` is index 1 on two qubits.
//! Everything is dense and capped at 8 qubits (256 x 256), which covers the
//! largest register used here (4 system + 4 ancilla qubits).

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

/// Absolute tolerance for ideal algebra (Hermiticity, trace, norms).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Eigenvalue floor for the numerical positive-semidefiniteness check.
pub const PSD_TOL: f64 = 1e-10;
/// Largest supported register.
pub const MAX_QUBITS: usize = 8;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::eye(dim)
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// `(m + m^dag) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMatrix::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let scaled = b.mapv(|z| z * a[[i, j]]);
            out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .assign(&scaled);
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Bit of qubit `q` (0-based, leftmost = 0) in basis index `i` of an
/// `n`-qubit register.
#[inline]
pub fn qubit_bit(i: usize, q: usize, n: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

fn assemble_index(n: usize, kept: &[usize], a: usize, traced: &[usize], e: usize) -> usize {
    let mut idx = 0usize;
    for (m, &q) in kept.iter().enumerate() {
        let bit = (a >> (kept.len() - 1 - m)) & 1;
        idx |= bit << (n - 1 - q);
    }
    for (m, &q) in traced.iter().enumerate() {
        let bit = (e >> (traced.len() - 1 - m)) & 1;
        idx |= bit << (n - 1 - q);
    }
    idx
}

/// Partial trace over the complement of `keep`, on a raw matrix.
///
/// `keep` must be sorted, deduplicated, nonempty, and in range; the kept
/// qubits retain their relative order.
pub fn partial_trace_raw(mat: &CMatrix, n_qubits: usize, keep: &[usize]) -> Result<CMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set must be nonempty".into()));
    }
    for &q in keep {
        if q >= n_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range for {n_qubits}-qubit register"
            )));
        }
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let mut out = CMatrix::zeros((dk, dk));
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..dt {
                let i = assemble_index(n_qubits, &kept, a, &traced, e);
                let j = assemble_index(n_qubits, &kept, b, &traced, e);
                acc += mat[[i, j]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

/// Cholesky-based check that `mat + shift*I` is positive definite, i.e. that
/// the minimum eigenvalue of the Hermitian `mat` is above `-shift`.
pub fn is_psd(mat: &CMatrix, shift: f64) -> bool {
    let n = mat.nrows();
    let mut l = CMatrix::zeros((n, n));
    for j in 0..n {
        let mut d = mat[[j, j]].re + shift;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d < -1e-13 {
            return false;
        }
        let d = d.max(1e-300).sqrt();
        l[[j, j]] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut v = mat[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = v / d;
        }
    }
    true
}

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    pub fn new(amps: CVector) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim > (1 << MAX_QUBITS) {
            return Err(Error::InvalidArgument(format!(
                "state dimension {dim} is not a power of two within the 8-qubit cap"
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} deviates from 1 beyond 1e-12"
            )));
        }
        Ok(Self { amps })
    }

    /// Computational basis state `|index>` on `n_qubits`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Equal superposition `(|a> + sign*|b>) / sqrt(2)`.
    pub fn superposition(n_qubits: usize, a: usize, b: usize, sign: f64) -> Self {
        let dim = 1usize << n_qubits;
        assert!(a < dim && b < dim && a != b);
        let mut amps = CVector::zeros(dim);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        amps[a] = C64::new(r, 0.0);
        amps[b] = C64::new(sign * r, 0.0);
        Self { amps }
    }

    pub fn phi_plus() -> Self {
        Self::superposition(2, 0b00, 0b11, 1.0)
    }
    pub fn phi_minus() -> Self {
        Self::superposition(2, 0b00, 0b11, -1.0)
    }
    pub fn psi_plus() -> Self {
        Self::superposition(2, 0b01, 0b10, 1.0)
    }
    pub fn psi_minus() -> Self {
        Self::superposition(2, 0b01, 0b10, -1.0)
    }

    /// `(|00..0> + |11..1>) / sqrt(2)` on `n_qubits`.
    pub fn ghz(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self::superposition(n_qubits, 0, dim - 1, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                out[[i, j]] = self.amps[i] * self.amps[j].conj();
            }
        }
        out
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// A trace-one, Hermitian, positive-semidefinite operator on `n` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12), and numerical
    /// positive semidefiniteness (min eigenvalue >= -1e-10).
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let dim = mat.nrows();
        if dim != mat.ncols() || !dim.is_power_of_two() || dim > (1 << MAX_QUBITS) {
            return Err(Error::InvalidArgument(format!(
                "density matrix shape {:?} is not square power-of-two within the 8-qubit cap",
                mat.dim()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("non-finite density matrix entry".into()));
        }
        let herm = max_abs_diff(&mat, &dagger(&mat));
        if herm > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "Hermiticity violation {herm:.3e} exceeds 1e-12"
            )));
        }
        let tr: C64 = (0..dim).map(|i| mat[[i, i]]).sum();
        if (tr.re - 1.0).abs() > ALGEBRA_TOL || tr.im.abs() > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "trace {tr} deviates from 1 beyond 1e-12"
            )));
        }
        if !is_psd(&mat, PSD_TOL) {
            return Err(Error::InvalidArgument(
                "matrix has an eigenvalue below -1e-10".into(),
            ));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            mat,
        })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            n_qubits: psi.n_qubits(),
            mat: psi.projector(),
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        Self::from_pure(&PureState::basis(n_qubits, index))
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            mat: identity(dim).mapv(|z| z / dim as f64),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[[i, i]].re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.mat, &dagger(&self.mat))
    }

    pub fn purity(&self) -> f64 {
        self.mat.dot(&self.mat).diag().iter().map(|z| z.re).sum()
    }

    /// Reduced density matrix on the kept qubits; trace is preserved.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let reduced = partial_trace_raw(&self.mat, self.n_qubits, keep)?;
        DensityMatrix::from_matrix(reduced)
    }

    /// `<psi| rho |psi>`, clipped into `[0, 1]` when within 1e-10 outside.
    pub fn population(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs density matrix dim {}",
                psi.dim(),
                self.dim()
            )));
        }
        let amps = psi.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += amps[i].conj() * self.mat[[i, j]] * amps[j];
            }
        }
        if acc.im.abs() > 1e-9 {
            return Err(Error::Numeric(format!(
                "population has imaginary part {:.3e}",
                acc.im
            )));
        }
        let p = acc.re;
        if !(-1e-8..=1.0 + 1e-8).contains(&p) {
            return Err(Error::Numeric(format!("population {p} far outside [0,1]")));
        }
        Ok(p.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        ndarray::array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ]
    }

    fn pauli_z() -> CMatrix {
        ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        ]
    }

    #[test]
    fn kron_identities() {
        let i2 = identity(2);
        assert_eq!(kron(&i2, &i2), identity(4));
    }

    #[test]
    fn kron_zz_sign_pattern() {
        let zz = kron(&pauli_z(), &pauli_z());
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, &e) in expect.iter().enumerate() {
            assert!((zz[[i, i]].re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn kron_xx_flips_both_bits() {
        let xx = kron(&pauli_x(), &pauli_x());
        let v00 = PureState::basis(2, 0b00);
        let out = xx.dot(v00.amplitudes());
        assert!((out[0b11].re - 1.0).abs() < 1e-15);
        assert!(out.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0 < 1e-15);
    }

    #[test]
    fn partial_trace_product_state_factorizes() {
        let bell = DensityMatrix::from_pure(&PureState::phi_plus());
        let anc = DensityMatrix::basis(1, 0);
        let joint = DensityMatrix::from_matrix(kron(bell.matrix(), anc.matrix())).unwrap();
        let reduced = joint.partial_trace(&[0, 1]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), bell.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let bell = DensityMatrix::from_pure(&PureState::phi_plus());
        let reduced = bell.partial_trace(&[0]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_loop_oracle() {
        // Random-ish 3-qubit density matrix vs an independent contraction that
        // keeps qubit order conventions spelled out digit by digit.
        let mut m = CMatrix::zeros((8, 8));
        let mut x = 0.123_f64;
        for i in 0..8 {
            for j in 0..8 {
                x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
                let y = (x * 7.3).sin();
                m[[i, j]] = C64::new(x - 0.5, y - y.sin());
            }
        }
        let h = hermitize(&m.dot(&dagger(&m)));
        let tr: f64 = h.diag().iter().map(|z| z.re).sum();
        let rho = DensityMatrix::from_matrix(h.mapv(|z| z / tr)).unwrap();

        // trace out qubit 2 (last, least significant bit), keep {0, 1}
        let reduced = rho.partial_trace(&[0, 1]).unwrap();
        let mut oracle = CMatrix::zeros((4, 4));
        for a in 0..4 {
            for b in 0..4 {
                for e in 0..2 {
                    oracle[[a, b]] += rho.matrix()[[a * 2 + e, b * 2 + e]];
                }
            }
        }
        assert!(max_abs_diff(reduced.matrix(), &oracle) < 1e-12);
        assert!((reduced.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_invalid_index_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(rho.partial_trace(&[2]).is_err());
        assert!(rho.partial_trace(&[]).is_err());
    }

    #[test]
    fn population_examples() {
        let bell = DensityMatrix::from_pure(&PureState::phi_plus());
        assert!((bell.population(&PureState::phi_plus()).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((mixed.population(&PureState::phi_plus()).unwrap() - 0.25).abs() < 1e-12);
        let mixed4 = DensityMatrix::maximally_mixed(4);
        assert!((mixed4.population(&PureState::ghz(4)).unwrap() - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn population_dim_mismatch_errors() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(mixed.population(&PureState::ghz(4)).is_err());
    }

    #[test]
    fn psd_check_rejects_negative_eigenvalue() {
        let mut m = identity(2).mapv(|z| z * 0.5);
        m[[1, 1]] = C64::new(-0.01, 0.0);
        assert!(!is_psd(&m, PSD_TOL));
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn pure_state_norm_enforced() {
        let amps = CVector::from(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        assert!(PureState::new(amps).is_err());
    }
}
