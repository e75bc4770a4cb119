//! Kraus maps and the two-operator stabilizer pump channels.
//!
//! A pump map transfers population from the wrong eigenspace of a stabilizer
//! into the target eigenspace with probability `p` while leaving the target
//! eigenspace invariant:
//!
//! ```text
//! E1 = sqrt(p) * F * P_wrong
//! E2 = P_right + sqrt(1 - p) * P_wrong
//! ```
//!
//! where `P_right/P_wrong` project onto the target/wrong eigenspaces and `F`
//! is a single-qubit flip that anticommutes with the stabilizer on the flip
//! qubit (so it maps one eigenspace onto the other).

use crate::error::{Error, Result};
use crate::linalg::{dagger, identity, max_abs_diff, CMatrix, DensityMatrix};
use crate::pauli::{Pauli, PauliString, Sign};

/// Axis of the single-qubit flip used by a pump map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipAxis {
    X,
    Z,
}

impl FlipAxis {
    pub fn pauli(self) -> Pauli {
        match self {
            FlipAxis::X => Pauli::X,
            FlipAxis::Z => Pauli::Z,
        }
    }
}

/// An ordered list of Kraus operators `{E_k}` on `n` qubits.
#[derive(Debug, Clone)]
pub struct KrausMap {
    n_qubits: usize,
    ops: Vec<CMatrix>,
}

impl KrausMap {
    /// Builds a map from explicit operators. Dimensions are validated here;
    /// trace preservation is checked separately by [`KrausMap::is_cptp`].
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let dim = ops
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus operator list".into()))?
            .nrows();
        if !dim.is_power_of_two() || dim > (1 << crate::linalg::MAX_QUBITS) {
            return Err(Error::InvalidArgument(format!(
                "Kraus operator dimension {dim} is not a power of two within the 8-qubit cap"
            )));
        }
        if ops.iter().any(|e| e.dim() != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators have inconsistent dimensions".into(),
            ));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            ops,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: vec![identity(1 << n_qubits)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `max |sum_k E_k^dag E_k - I| <= tol`.
    pub fn is_cptp(&self, tol: f64) -> bool {
        let dim = self.dim();
        let mut sum = CMatrix::zeros((dim, dim));
        for e in &self.ops {
            sum = sum + dagger(e).dot(e);
        }
        max_abs_diff(&sum, &identity(dim)) <= tol
    }

    /// `sum_k E_k m E_k^dag` on a raw matrix (no state validation).
    pub fn apply_raw(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.dim() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "matrix dim {:?} vs channel dim {}",
                m.dim(),
                self.dim()
            )));
        }
        let mut out = CMatrix::zeros(m.dim());
        for e in &self.ops {
            out = out + e.dot(m).dot(&dagger(e));
        }
        Ok(out)
    }

    /// Applies the channel to a density matrix; trace and Hermiticity are
    /// preserved and re-validated on the output.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_raw(rho.matrix())?;
        DensityMatrix::from_matrix(out)
    }

    /// The channel `rho -> outer(inner(rho))`, as the all-products operator
    /// list `{O_i I_j}`.
    pub fn compose(outer: &KrausMap, inner: &KrausMap) -> Result<KrausMap> {
        if outer.n_qubits != inner.n_qubits {
            return Err(Error::DimensionMismatch(
                "composed channels act on different register sizes".into(),
            ));
        }
        let mut ops = Vec::with_capacity(outer.ops.len() * inner.ops.len());
        for o in &outer.ops {
            for i in &inner.ops {
                ops.push(o.dot(i));
            }
        }
        KrausMap::new(ops)
    }
}

/// The two-operator pump into the `target_sign` eigenspace of `stab`, with
/// transfer probability `p` and flip `flip_axis` on `flip_qubit`.
pub fn pump_map(
    stab: &PauliString,
    flip_qubit: usize,
    flip_axis: FlipAxis,
    p: f64,
    target_sign: Sign,
) -> Result<KrausMap> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "pump probability {p} outside [0, 1]"
        )));
    }
    let n = stab.n_qubits();
    if flip_qubit >= n {
        return Err(Error::InvalidArgument(format!(
            "flip qubit {flip_qubit} out of range for {n}-qubit stabilizer"
        )));
    }
    if !flip_axis.pauli().anticommutes_with(stab.letter(flip_qubit)) {
        return Err(Error::Construction(format!(
            "flip {:?} on qubit {flip_qubit} commutes with stabilizer {stab}; \
             the pump would not transfer population",
            flip_axis
        )));
    }
    let wrong_sign = match target_sign {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    };
    let p_right = crate::pauli::stabilizer_projector(stab, target_sign);
    let p_wrong = crate::pauli::stabilizer_projector(stab, wrong_sign);
    let flip_letters: Vec<Pauli> = (0..n)
        .map(|q| if q == flip_qubit { flip_axis.pauli() } else { Pauli::I })
        .collect();
    let flip = PauliString::new(flip_letters)?.matrix();

    let e1 = flip.dot(&p_wrong).mapv(|z| z * p.sqrt());
    let e2 = p_right + p_wrong.mapv(|z| z * (1.0 - p).sqrt());
    KrausMap::new(vec![e1, e2])
}

/// `E_zz(p)` pumping into the `sign` eigenspace of `Z1 Z2` (flip `X` on q1).
pub fn bell_zz_pump(p: f64, sign: Sign) -> KrausMap {
    pump_map(&"ZZ".parse().unwrap(), 0, FlipAxis::X, p, sign).expect("static construction")
}

/// `E_xx(p)` pumping into the `sign` eigenspace of `X1 X2` (flip `Z` on q1).
pub fn bell_xx_pump(p: f64, sign: Sign) -> KrausMap {
    pump_map(&"XX".parse().unwrap(), 0, FlipAxis::Z, p, sign).expect("static construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DensityMatrix, PureState};

    #[test]
    fn deterministic_flip_of_wrong_eigenspace_state() {
        let map = bell_zz_pump(1.0, Sign::Plus);
        let rho = DensityMatrix::basis(2, 0b01);
        let out = map.apply(&rho).unwrap();
        // |01> is in the -1 eigenspace; X on q1 sends it to |11>.
        assert!((out.population(&PureState::basis(2, 0b11)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p_zero_is_identity_channel() {
        let map = bell_zz_pump(0.0, Sign::Plus);
        let rho = DensityMatrix::from_pure(&PureState::psi_minus());
        let out = map.apply(&rho).unwrap();
        assert!(crate::linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn xx_pump_sends_phi_minus_to_phi_plus() {
        // Z1 |phi-> = |phi+>, so the p=1 XX pump moves all of phi- onto phi+.
        let map = bell_xx_pump(1.0, Sign::Plus);
        let out = map
            .apply(&DensityMatrix::from_pure(&PureState::phi_minus()))
            .unwrap();
        assert!((out.population(&PureState::phi_plus()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_map_preserves_state() {
        let map = KrausMap::identity(2);
        let rho = DensityMatrix::from_pure(&PureState::psi_plus());
        let out = map.apply(&rho).unwrap();
        assert!(crate::linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn zz_pump_on_mixed_state_gives_half_plus_half_p() {
        for p in [0.0, 0.25, 0.37, 1.0] {
            let map = bell_zz_pump(p, Sign::Plus);
            let out = map.apply(&DensityMatrix::maximally_mixed(2)).unwrap();
            let plus_pop = out.population(&PureState::phi_plus()).unwrap()
                + out.population(&PureState::phi_minus()).unwrap();
            assert!((plus_pop - (1.0 + p) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composed_bell_pumps_reach_closed_form() {
        for p in [0.0, 0.3, 0.5, 1.0] {
            let composed =
                KrausMap::compose(&bell_xx_pump(p, Sign::Plus), &bell_zz_pump(p, Sign::Plus))
                    .unwrap();
            let out = composed.apply(&DensityMatrix::maximally_mixed(2)).unwrap();
            let pop = out.population(&PureState::phi_plus()).unwrap();
            assert!((pop - (1.0 + p).powi(2) / 4.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn cptp_checks() {
        assert!(pump_map(&"ZZ".parse().unwrap(), 0, FlipAxis::X, 0.37, Sign::Plus)
            .unwrap()
            .is_cptp(1e-12));
        // A lone sqrt(1/2)*I sums to I/2.
        let half = KrausMap::new(vec![identity(4).mapv(|z| z * 0.5f64.sqrt())]).unwrap();
        assert!(!half.is_cptp(1e-12));
        // Discarding E2 of a p=0.5 pump breaks completeness.
        let pump = bell_zz_pump(0.5, Sign::Plus);
        let only_e1 = KrausMap::new(vec![pump.operators()[0].clone()]).unwrap();
        assert!(!only_e1.is_cptp(1e-12));
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = bell_xx_pump(0.42, Sign::Minus);
        let b = bell_zz_pump(0.77, Sign::Plus);
        let composed = KrausMap::compose(&a, &b).unwrap();
        assert!(composed.is_cptp(1e-12));
        for idx in 0..4 {
            let rho = DensityMatrix::basis(2, idx);
            let seq = a.apply(&b.apply(&rho).unwrap()).unwrap();
            let one = composed.apply(&rho).unwrap();
            assert!(crate::linalg::max_abs_diff(seq.matrix(), one.matrix()) < 1e-12);
        }
    }

    #[test]
    fn p1_composite_pumps_every_basis_state_to_phi_plus() {
        let composed =
            KrausMap::compose(&bell_xx_pump(1.0, Sign::Plus), &bell_zz_pump(1.0, Sign::Plus))
                .unwrap();
        for idx in 0..4 {
            let out = composed.apply(&DensityMatrix::basis(2, idx)).unwrap();
            assert!((out.population(&PureState::phi_plus()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn target_eigenspace_is_invariant() {
        for p in [0.1, 0.6, 1.0] {
            let map = bell_zz_pump(p, Sign::Plus);
            for target in [PureState::phi_plus(), PureState::phi_minus()] {
                let rho = DensityMatrix::from_pure(&target);
                let out = map.apply(&rho).unwrap();
                assert!(crate::linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_eigenspace_decays_geometrically() {
        let p = 0.35;
        let map = bell_zz_pump(p, Sign::Plus);
        let mut rho = DensityMatrix::maximally_mixed(2);
        for m in 1..=6 {
            rho = map.apply(&rho).unwrap();
            let wrong = rho.population(&PureState::psi_plus()).unwrap()
                + rho.population(&PureState::psi_minus()).unwrap();
            assert!((wrong - (1.0 - p).powi(m) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn commuting_flip_rejected() {
        let err = pump_map(&"ZZ".parse().unwrap(), 0, FlipAxis::Z, 0.5, Sign::Plus);
        assert!(matches!(err, Err(Error::Construction(_))));
        assert!(pump_map(&"ZZ".parse().unwrap(), 0, FlipAxis::X, 1.5, Sign::Plus).is_err());
    }
}
