//! Time integration of the Markovian master equation
//! `d rho/dt = -i[H, rho] + sum_k gamma_k (c_k rho c_k' - {c_k' c_k, rho}/2)`
//! with stabilizer-pump jump operators, plus the small-`p` correspondence
//! between repeated Kraus pumping and continuous dissipative evolution.

use crate::channel::{bell_xx_pump, bell_zz_pump, FlipAxis, KrausMap};
use crate::error::{Error, Result};
use crate::linalg::{dagger, hermitize, max_abs_diff, CMatrix, DensityMatrix, PureState, C64};
use crate::pauli::{stabilizer_projector, Pauli, PauliString, Sign};

/// Largest allowed `dt * gamma * |c'c|` for the fixed-step RK4 integrator.
pub const STABILITY_LIMIT: f64 = 0.1;

/// `F * (I - sign*S) / 2`: annihilates the `sign` eigenspace of `S` and maps
/// the opposite eigenspace into it.
pub fn jump_operator(
    stab: &PauliString,
    flip_qubit: usize,
    flip_axis: FlipAxis,
    sign: Sign,
) -> Result<CMatrix> {
    let n = stab.n_qubits();
    if flip_qubit >= n {
        return Err(Error::InvalidArgument(format!(
            "flip qubit {flip_qubit} out of range for {n}-qubit stabilizer"
        )));
    }
    if !flip_axis.pauli().anticommutes_with(stab.letter(flip_qubit)) {
        return Err(Error::Construction(format!(
            "flip {flip_axis:?} commutes with stabilizer {stab} on qubit {flip_qubit}"
        )));
    }
    let wrong = match sign {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    };
    let letters: Vec<Pauli> = (0..n)
        .map(|q| if q == flip_qubit { flip_axis.pauli() } else { Pauli::I })
        .collect();
    let flip = PauliString::new(letters)?.matrix();
    Ok(flip.dot(&stabilizer_projector(stab, wrong)))
}

/// The Bell-cooling jump pair `c1 = X1 (1 - s_zz ZZ)/2`, `c2 = Z1 (1 - s_xx XX)/2`.
pub fn bell_jump_operators(sign_zz: Sign, sign_xx: Sign) -> Vec<CMatrix> {
    vec![
        jump_operator(&"ZZ".parse().unwrap(), 0, FlipAxis::X, sign_zz).unwrap(),
        jump_operator(&"XX".parse().unwrap(), 0, FlipAxis::Z, sign_xx).unwrap(),
    ]
}

/// The four GHZ-family jump operators, flipping the higher-index qubit of
/// each ZZ link and `Z` on qubit 1 for the X-type stabilizer.
pub fn ghz_jump_operators(signs: [Sign; 4]) -> Vec<CMatrix> {
    let stabs = crate::pauli::ghz_stabilizers();
    vec![
        jump_operator(&stabs[0], 1, FlipAxis::X, signs[0]).unwrap(),
        jump_operator(&stabs[1], 2, FlipAxis::X, signs[1]).unwrap(),
        jump_operator(&stabs[2], 3, FlipAxis::X, signs[2]).unwrap(),
        jump_operator(&stabs[3], 0, FlipAxis::Z, signs[3]).unwrap(),
    ]
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
    rates: Vec<f64>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>, rates: Vec<f64>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(
                "Hamiltonian must be square with power-of-two dimension".into(),
            ));
        }
        if max_abs_diff(&hamiltonian, &dagger(&hamiltonian)) > 1e-12 {
            return Err(Error::InvalidArgument("Hamiltonian is not Hermitian".into()));
        }
        if jumps.len() != rates.len() {
            return Err(Error::InvalidArgument(
                "need one rate per jump operator".into(),
            ));
        }
        if rates.iter().any(|&g| g < 0.0 || !g.is_finite()) {
            return Err(Error::InvalidArgument("rates must be non-negative".into()));
        }
        if jumps.iter().any(|c| c.dim() != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "jump operator dimension does not match Hamiltonian".into(),
            ));
        }
        Ok(Self {
            hamiltonian,
            jumps,
            rates,
        })
    }

    /// `H = 0`, unit rates.
    pub fn pure_dissipative(jumps: Vec<CMatrix>) -> Self {
        let dim = jumps.first().map(|c| c.nrows()).unwrap_or(1);
        let rates = vec![1.0; jumps.len()];
        Self::new(CMatrix::zeros((dim, dim)), jumps, rates).expect("zero Hamiltonian is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let i = C64::i();
        let h = &self.hamiltonian;
        let mut out = (h.dot(rho) - rho.dot(h)).mapv(|z| z * (-i));
        for (c, &g) in self.jumps.iter().zip(self.rates.iter()) {
            let cd = dagger(c);
            let cdc = cd.dot(c);
            let gain = c.dot(rho).dot(&cd);
            let loss = (cdc.dot(rho) + rho.dot(&cdc)).mapv(|z| z * 0.5);
            out = out + (gain - loss).mapv(|z| z * g);
        }
        out
    }

    fn check_stability(&self, dt: f64) -> Result<()> {
        let mut worst: f64 = 0.0;
        for (c, &g) in self.jumps.iter().zip(self.rates.iter()) {
            let cdc = dagger(c).dot(c);
            // infinity norm upper-bounds the spectral norm of c'c
            let norm = cdc
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            worst = worst.max(dt * g * norm);
        }
        if worst > STABILITY_LIMIT {
            return Err(Error::Unstable(worst));
        }
        Ok(())
    }

    fn rk4_step(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1.mapv(|z| z * (dt / 2.0))));
        let k3 = self.rhs(&(rho + &k2.mapv(|z| z * (dt / 2.0))));
        let k4 = self.rhs(&(rho + &k3.mapv(|z| z * dt)));
        let incr = (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (dt / 6.0));
        hermitize(&(rho + &incr))
    }

    /// Fixed-step RK4 integration to `t_final`. The step is shortened on the
    /// final step so the endpoint is hit exactly.
    pub fn evolve(&self, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
        if dt <= 0.0 || t_final < 0.0 || dt > t_final.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < dt <= t_final, got dt = {dt}, t_final = {t_final}"
            )));
        }
        if rho0.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs model dim {}",
                rho0.dim(),
                self.dim()
            )));
        }
        self.check_stability(dt)?;
        let mut rho = rho0.matrix().clone();
        let mut t = 0.0;
        while t < t_final - 1e-12 {
            let step = dt.min(t_final - t);
            rho = self.rk4_step(&rho, step);
            if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Numeric("non-finite state during integration".into()));
            }
            t += step;
        }
        let tr: f64 = rho.diag().iter().map(|z| z.re).sum();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::Numeric(format!("trace drift {:.3e}", tr - 1.0)));
        }
        DensityMatrix::from_matrix(rho)
    }

    /// Raw trajectory sampled every `sample_every` steps (including t = 0).
    pub fn evolve_sampled(
        &self,
        rho0: &DensityMatrix,
        dt: f64,
        steps: usize,
        sample_every: usize,
    ) -> Result<Vec<CMatrix>> {
        self.check_stability(dt)?;
        let mut rho = rho0.matrix().clone();
        let mut out = vec![rho.clone()];
        for s in 1..=steps {
            rho = self.rk4_step(&rho, dt);
            if s % sample_every == 0 {
                out.push(rho.clone());
            }
        }
        Ok(out)
    }

    /// Dark-state test: every jump annihilates `psi` and `psi` is an
    /// eigenstate of the Hamiltonian, both to `tol`.
    pub fn is_dark_state(&self, psi: &PureState, tol: f64) -> bool {
        if psi.dim() != self.dim() {
            return false;
        }
        let amps = psi.amplitudes();
        for c in &self.jumps {
            let out = c.dot(amps);
            let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > tol {
                return false;
            }
        }
        let h_psi = self.hamiltonian.dot(amps);
        let energy: C64 = amps.iter().zip(h_psi.iter()).map(|(a, b)| a.conj() * b).sum();
        let resid: f64 = h_psi
            .iter()
            .zip(amps.iter())
            .map(|(a, b)| (a - b * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        resid <= tol
    }
}

/// Outcome of comparing repeated small-`p` Kraus pumping against the
/// continuous Lindblad evolution with `gamma * dt_cycle = p`.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub p: f64,
    pub cycles: usize,
    /// Max absolute difference of any Bell-state population over the
    /// trajectory.
    pub max_divergence: f64,
}

/// Runs `cycles` applications of the composite Bell pump `E_xx(E_zz(.))` at
/// probability `p` from the maximally mixed state, and in parallel integrates
/// the Bell Lindblad model (unit rates) to the matching times `t = m * p`.
pub fn kraus_lindblad_consistency(p: f64, cycles: usize) -> Result<DivergenceReport> {
    if !(0.0..=0.05).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "correspondence requires p <= 0.05, got {p}"
        )));
    }
    let bell_states = [
        PureState::phi_plus(),
        PureState::phi_minus(),
        PureState::psi_plus(),
        PureState::psi_minus(),
    ];
    let pump = KrausMap::compose(&bell_xx_pump(p, Sign::Plus), &bell_zz_pump(p, Sign::Plus))?;
    let model = LindbladModel::pure_dissipative(bell_jump_operators(Sign::Plus, Sign::Plus));

    let mut kraus_rho = DensityMatrix::maximally_mixed(2);
    let mut lind_rho = DensityMatrix::maximally_mixed(2);
    let mut max_div: f64 = 0.0;
    for _ in 0..cycles {
        kraus_rho = pump.apply(&kraus_rho)?;
        lind_rho = if p > 0.0 {
            // two RK4 substeps per cycle keep the integrator error well below
            // the O(p) map-vs-generator gap being measured
            model.evolve(&lind_rho, p, p / 2.0)?
        } else {
            lind_rho
        };
        for psi in &bell_states {
            let d = (kraus_rho.population(psi)? - lind_rho.population(psi)?).abs();
            max_div = max_div.max(d);
        }
    }
    Ok(DivergenceReport {
        p,
        cycles,
        max_divergence: max_div,
    })
}
