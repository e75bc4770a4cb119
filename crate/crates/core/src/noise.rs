//! Gate depolarizing noise, readout flip errors, and calibration-matrix
//! readout mitigation.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace_raw, qubit_bit, CMatrix, DensityMatrix, C64, MAX_QUBITS};

/// Per-gate depolarizing strengths plus per-qubit readout flip probabilities
/// `(e01, e10)`: probability of reading 1 given 0 and of reading 0 given 1.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub depolarizing_1q: f64,
    pub depolarizing_2q: f64,
    pub readout_flip: Vec<(f64, f64)>,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            depolarizing_1q: 0.0,
            depolarizing_2q: 0.0,
            readout_flip: vec![(0.0, 0.0); MAX_QUBITS],
        }
    }

    /// Default imperfect-device preset: lambda1 = 0.001, lambda2 = 0.01,
    /// symmetric 3% readout flips.
    pub fn hardware_like() -> Self {
        Self {
            depolarizing_1q: 0.001,
            depolarizing_2q: 0.01,
            readout_flip: vec![(0.03, 0.03); MAX_QUBITS],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ideal" => Some(Self::ideal()),
            "hardware-like" => Some(Self::hardware_like()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (0.0..=1.0).contains(&x);
        if !in_range(self.depolarizing_1q) || !in_range(self.depolarizing_2q) {
            return Err(Error::InvalidArgument(
                "depolarizing strengths must lie in [0, 1]".into(),
            ));
        }
        if self
            .readout_flip
            .iter()
            .any(|&(a, b)| !in_range(a) || !in_range(b))
        {
            return Err(Error::InvalidArgument(
                "readout flip probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.depolarizing_1q > 0.0 || self.depolarizing_2q > 0.0
    }

    pub fn has_readout_error(&self) -> bool {
        self.readout_flip.iter().any(|&(a, b)| a > 0.0 || b > 0.0)
    }

    fn flip_for(&self, q: usize) -> Result<(f64, f64)> {
        self.readout_flip.get(q).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("no readout flip entry for qubit {q}"))
        })
    }
}

/// `rho -> (1 - lambda) rho + lambda (I/2^k on `qubits`) (x) Tr_qubits(rho)`,
/// on a raw matrix.
pub fn depolarize_raw(
    mat: &CMatrix,
    n_qubits: usize,
    qubits: &[usize],
    lambda: f64,
) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing strength {lambda} outside [0, 1]"
        )));
    }
    let mut hit = qubits.to_vec();
    hit.sort_unstable();
    hit.dedup();
    if hit.iter().any(|&q| q >= n_qubits) {
        return Err(Error::InvalidArgument("depolarize qubit out of range".into()));
    }
    if lambda == 0.0 || hit.is_empty() {
        return Ok(mat.clone());
    }
    let rest: Vec<usize> = (0..n_qubits).filter(|q| !hit.contains(q)).collect();
    let k = hit.len();
    let dim = 1usize << n_qubits;
    let scale = 1.0 / (1usize << k) as f64;

    let reduced = if rest.is_empty() {
        let tr: C64 = mat.diag().iter().sum();
        CMatrix::from_elem((1, 1), tr)
    } else {
        partial_trace_raw(mat, n_qubits, &rest)?
    };
    // interleave "maximally mixed on hit" with "reduced on rest"
    let rest_index = |i: usize| -> usize {
        let mut r = 0;
        for (m, &q) in rest.iter().enumerate() {
            r |= qubit_bit(i, q, n_qubits) << (rest.len() - 1 - m);
        }
        r
    };
    let hit_bits = |i: usize| -> usize {
        let mut h = 0;
        for (m, &q) in hit.iter().enumerate() {
            h |= qubit_bit(i, q, n_qubits) << (k - 1 - m);
        }
        h
    };
    let mut mixed = CMatrix::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            if hit_bits(i) == hit_bits(j) {
                mixed[[i, j]] = reduced[[rest_index(i), rest_index(j)]] * scale;
            }
        }
    }
    Ok(mat.mapv(|z| z * (1.0 - lambda)) + mixed.mapv(|z| z * lambda))
}

/// Validated wrapper of [`depolarize_raw`] for density matrices.
pub fn depolarize(rho: &DensityMatrix, qubits: &[usize], lambda: f64) -> Result<DensityMatrix> {
    let out = depolarize_raw(rho.matrix(), rho.n_qubits(), qubits, lambda)?;
    DensityMatrix::from_matrix(out)
}

/// Column-stochastic matrix of `P(measured | true)` over bitstrings.
#[derive(Debug, Clone)]
pub struct ConfusionMatrix {
    mat: Array2<f64>,
}

impl ConfusionMatrix {
    pub fn new(mat: Array2<f64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(
                "confusion matrix must be square with power-of-two dimension".into(),
            ));
        }
        if mat.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidArgument(
                "confusion matrix entries must be non-negative".into(),
            ));
        }
        for j in 0..dim {
            let col: f64 = mat.column(j).sum();
            if (col - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "confusion matrix column {j} sums to {col}, expected 1"
                )));
            }
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.mat
    }

    /// `p_measured = M p_true`.
    pub fn apply(&self, probs: &[f64]) -> Result<Vec<f64>> {
        if probs.len() != self.dim() {
            return Err(Error::DimensionMismatch(
                "probability vector length does not match confusion matrix".into(),
            ));
        }
        Ok((0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.mat[[i, j]] * probs[j]).sum())
            .collect())
    }
}

/// Tensor product of the per-qubit flip matrices
/// `[[1 - e01, e10], [e01, 1 - e10]]`.
pub fn build_confusion(noise: &NoiseModel, n_qubits: usize) -> Result<ConfusionMatrix> {
    noise.validate()?;
    let dim = 1usize << n_qubits;
    let mut mat = Array2::<f64>::ones((1, 1));
    for q in 0..n_qubits {
        let (e01, e10) = noise.flip_for(q)?;
        let single = ndarray::array![[1.0 - e01, e10], [e01, 1.0 - e10]];
        let (r, c) = mat.dim();
        let mut next = Array2::<f64>::zeros((r * 2, c * 2));
        for i in 0..r {
            for j in 0..c {
                for a in 0..2 {
                    for b in 0..2 {
                        next[[i * 2 + a, j * 2 + b]] = mat[[i, j]] * single[[a, b]];
                    }
                }
            }
        }
        mat = next;
    }
    let _ = dim;
    ConfusionMatrix::new(mat)
}

/// Raw and clipped results of calibration-matrix inversion.
#[derive(Debug, Clone)]
pub struct Mitigated {
    /// `M^-1 p_measured`; may contain negative entries.
    pub quasi: Vec<f64>,
    /// Negative entries clipped to zero and renormalized to sum 1.
    pub distribution: Vec<f64>,
}

/// Inverts the calibration matrix and applies it to the measured
/// distribution. Errors if the matrix's 1-norm condition number exceeds 1e6.
pub fn mitigate(measured: &[f64], m: &ConfusionMatrix) -> Result<Mitigated> {
    let dim = m.dim();
    if measured.len() != dim {
        return Err(Error::DimensionMismatch(
            "measured vector length does not match confusion matrix".into(),
        ));
    }
    let inv = invert(m.matrix())
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let cond = norm1(m.matrix()) * norm1(&inv);
    if cond >= 1e6 {
        return Err(Error::IllConditioned(cond));
    }
    let quasi: Vec<f64> = (0..dim)
        .map(|i| (0..dim).map(|j| inv[[i, j]] * measured[j]).sum())
        .collect();
    let clipped: Vec<f64> = quasi.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numeric("clipped distribution sums to zero".into()));
    }
    let distribution = clipped.iter().map(|&x| x / total).collect();
    Ok(Mitigated { quasi, distribution })
}

/// Normalized probability vector from a bitstring histogram.
pub fn counts_to_probs(counts: &BTreeMap<String, u64>, n_qubits: usize) -> Result<Vec<f64>> {
    let dim = 1usize << n_qubits;
    let mut probs = vec![0.0; dim];
    let mut total = 0u64;
    for (bits, &c) in counts {
        if bits.len() != n_qubits || bits.chars().any(|ch| ch != '0' && ch != '1') {
            return Err(Error::InvalidArgument(format!("bad bitstring key `{bits}`")));
        }
        let idx = usize::from_str_radix(bits, 2).expect("validated");
        probs[idx] += c as f64;
        total += c;
    }
    if total == 0 {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    for p in &mut probs {
        *p /= total as f64;
    }
    Ok(probs)
}

fn norm1(m: &Array2<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan inversion with partial pivoting.
fn invert(m: &Array2<f64>) -> Option<Array2<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
            .unwrap();
        if a[[pivot, col]].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap([pivot, j], [col, j]);
                inv.swap([pivot, j], [col, j]);
            }
        }
        let d = a[[col, col]];
        for j in 0..n {
            a[[col, j]] /= d;
            inv[[col, j]] /= d;
        }
        for i in 0..n {
            if i != col && a[[i, col]] != 0.0 {
                let f = a[[i, col]];
                for j in 0..n {
                    a[[i, j]] -= f * a[[col, j]];
                    inv[[i, j]] -= f * inv[[col, j]];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, DensityMatrix, PureState};

    #[test]
    fn depolarize_identity_at_zero() {
        let rho = DensityMatrix::from_pure(&PureState::phi_plus());
        let out = depolarize(&rho, &[0], 0.0).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_depolarize_single_qubit() {
        let rho = DensityMatrix::basis(1, 0);
        let out = depolarize(&rho, &[0], 1.0).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
    }

    #[test]
    fn depolarize_preserves_trace() {
        let rho = DensityMatrix::from_pure(&PureState::ghz(3));
        let out = depolarize(&rho, &[1], 0.3).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        // other marginals untouched
        let before = rho.partial_trace(&[0, 2]).unwrap();
        let after = out.partial_trace(&[0, 2]).unwrap();
        assert!(max_abs_diff(before.matrix(), after.matrix()) < 1e-12);
    }

    #[test]
    fn depolarize_strictly_decreases_purity() {
        let rho = DensityMatrix::from_pure(&PureState::phi_plus());
        let out = depolarize(&rho, &[0, 1], 0.4).unwrap();
        assert!(out.purity() < rho.purity() - 1e-6);
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = depolarize(&mixed, &[0, 1], 0.4).unwrap();
        assert!((out.purity() - mixed.purity()).abs() < 1e-12);
    }

    #[test]
    fn depolarize_rejects_bad_lambda() {
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(depolarize(&rho, &[0], 1.5).is_err());
    }

    #[test]
    fn confusion_identity_when_clean() {
        let m = build_confusion(&NoiseModel::ideal(), 2).unwrap();
        assert!((m.matrix() - &Array2::<f64>::eye(4)).iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn confusion_single_qubit_entries() {
        let mut noise = NoiseModel::ideal();
        noise.readout_flip[0] = (0.03, 0.03);
        let m = build_confusion(&noise, 1).unwrap();
        assert!((m.matrix()[[0, 0]] - 0.97).abs() < 1e-15);
        assert!((m.matrix()[[1, 0]] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn confusion_columns_sum_to_one() {
        let m = build_confusion(&NoiseModel::hardware_like(), 2).unwrap();
        for j in 0..4 {
            assert!((m.matrix().column(j).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mitigate_identity_matrix_is_noop() {
        let m = build_confusion(&NoiseModel::ideal(), 2).unwrap();
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let out = mitigate(&p, &m).unwrap();
        for (a, b) in out.distribution.iter().zip(p.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mitigate_recovers_exact_delta() {
        let m = build_confusion(&NoiseModel::hardware_like(), 2).unwrap();
        let truth = vec![1.0, 0.0, 0.0, 0.0];
        let measured = m.apply(&truth).unwrap();
        let out = mitigate(&measured, &m).unwrap();
        for (a, b) in out.distribution.iter().zip(truth.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mitigate_round_trip_random_distribution() {
        let m = build_confusion(&NoiseModel::hardware_like(), 3).unwrap();
        let mut q: Vec<f64> = (0..8).map(|i| ((i * 37 + 11) % 17) as f64 + 1.0).collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= s);
        let out = mitigate(&m.apply(&q).unwrap(), &m).unwrap();
        for (a, b) in out.distribution.iter().zip(q.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mitigate_clips_out_of_simplex_vectors() {
        let m = build_confusion(&NoiseModel::hardware_like(), 1).unwrap();
        // all weight on "0" is outside M * simplex when e01 > 0
        let out = mitigate(&[1.0, 0.0], &m).unwrap();
        assert!(out.quasi[1] < 0.0);
        assert!(out.distribution.iter().all(|&x| x >= 0.0));
        assert!((out.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mitigate_rejects_singular_matrix() {
        let mut noise = NoiseModel::ideal();
        noise.readout_flip[0] = (0.5, 0.5);
        let m = build_confusion(&noise, 1).unwrap();
        assert!(matches!(
            mitigate(&[0.5, 0.5], &m),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn counts_round_trip() {
        let mut counts = BTreeMap::new();
        counts.insert("00".to_string(), 3u64);
        counts.insert("11".to_string(), 1u64);
        let probs = counts_to_probs(&counts, 2).unwrap();
        assert_eq!(probs, vec![0.75, 0.0, 0.0, 0.25]);
        counts.insert("2x".to_string(), 1);
        assert!(counts_to_probs(&counts, 2).is_err());
    }
}
