//! Experiment orchestration: p-sweeps of the cooling circuits with
//! maximally-mixed-state emulation by basis-state averaging, exact or
//! shot-based readout, optional noise and mitigation, and CSV/JSON output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FlipAxis;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, PureState};
use crate::noise::{build_confusion, counts_to_probs, mitigate, NoiseModel};
use crate::pauli::{branch_label, simultaneous_eigenstate, PauliString, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Bell,
    Ghz,
}

impl System {
    pub fn n_qubits(self) -> usize {
        match self {
            System::Bell => 2,
            System::Ghz => 4,
        }
    }
}

/// One pump map selectable in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Zz,
    Xx,
    Z12,
    Z23,
    Z34,
    Xxxx,
}

impl MapKind {
    pub fn system(self) -> System {
        match self {
            MapKind::Zz | MapKind::Xx => System::Bell,
            _ => System::Ghz,
        }
    }

    pub fn stabilizer(self) -> PauliString {
        match self {
            MapKind::Zz => "ZZ".parse().unwrap(),
            MapKind::Xx => "XX".parse().unwrap(),
            MapKind::Z12 => "ZZII".parse().unwrap(),
            MapKind::Z23 => "IZZI".parse().unwrap(),
            MapKind::Z34 => "IIZZ".parse().unwrap(),
            MapKind::Xxxx => "XXXX".parse().unwrap(),
        }
    }

    /// Flip qubit and axis: ZZ links flip their higher-index qubit with X,
    /// X-type stabilizers flip qubit 1 with Z.
    pub fn flip(self) -> (usize, FlipAxis) {
        match self {
            MapKind::Zz => (0, FlipAxis::X),
            MapKind::Xx => (0, FlipAxis::Z),
            MapKind::Z12 => (1, FlipAxis::X),
            MapKind::Z23 => (2, FlipAxis::X),
            MapKind::Z34 => (3, FlipAxis::X),
            MapKind::Xxxx => (0, FlipAxis::Z),
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zz" => Ok(MapKind::Zz),
            "xx" => Ok(MapKind::Xx),
            "z12" => Ok(MapKind::Z12),
            "z23" => Ok(MapKind::Z23),
            "z34" => Ok(MapKind::Z34),
            "xxxx" => Ok(MapKind::Xxxx),
            other => Err(Error::Config {
                field: "maps".into(),
                message: format!("unknown map `{other}`"),
            }),
        }
    }
}

/// Per-parameter overrides on top of a named noise preset. Readout overrides
/// apply uniformly to all qubits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depolarizing_1q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depolarizing_2q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_flip: Option<(f64, f64)>,
}

impl NoiseOverrides {
    pub fn is_empty(&self) -> bool {
        *self == NoiseOverrides::default()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: System,
    pub maps: Vec<MapKind>,
    pub ancilla_bits: Vec<u8>,
    pub p_grid: Vec<f64>,
    /// `None` runs in exact (density-matrix diagonal) mode.
    pub shots: Option<u64>,
    /// Noise preset name: "ideal" or "hardware-like".
    pub noise: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_overrides: Option<NoiseOverrides>,
    #[serde(default)]
    pub mitigate: bool,
    pub seed: u64,
}

impl ExperimentConfig {
    /// 21 uniform grid points on [0, 1].
    pub fn default_p_grid() -> Vec<f64> {
        (0..21).map(|i| i as f64 / 20.0).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::Config {
                field: "maps".into(),
                message: "at least one map is required".into(),
            });
        }
        for m in &self.maps {
            if m.system() != self.system {
                return Err(Error::Config {
                    field: "maps".into(),
                    message: format!("map {m:?} does not belong to system {:?}", self.system),
                });
            }
        }
        if self.ancilla_bits.len() != self.maps.len() {
            return Err(Error::Config {
                field: "ancilla_bits".into(),
                message: format!(
                    "expected {} bits (one per map), got {}",
                    self.maps.len(),
                    self.ancilla_bits.len()
                ),
            });
        }
        if self.ancilla_bits.iter().any(|&b| b > 1) {
            return Err(Error::Config {
                field: "ancilla_bits".into(),
                message: "entries must be 0 or 1".into(),
            });
        }
        if self.p_grid.is_empty() {
            return Err(Error::Config {
                field: "p_grid".into(),
                message: "grid must be nonempty".into(),
            });
        }
        if let Some(&bad) = self
            .p_grid
            .iter()
            .find(|p| !(0.0..=1.0).contains(*p) || !p.is_finite())
        {
            return Err(Error::Config {
                field: "p_grid".into(),
                message: format!("value {bad} outside [0, 1]"),
            });
        }
        if self.shots == Some(0) {
            return Err(Error::Config {
                field: "shots".into(),
                message: "shot count must be at least 1".into(),
            });
        }
        self.noise_model()?;
        Ok(())
    }

    /// Resolves the preset plus overrides into a concrete noise model.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let mut model = NoiseModel::preset(&self.noise).ok_or_else(|| Error::Config {
            field: "noise".into(),
            message: format!("unknown preset `{}`", self.noise),
        })?;
        if let Some(ov) = &self.noise_overrides {
            if let Some(l1) = ov.depolarizing_1q {
                model.depolarizing_1q = l1;
            }
            if let Some(l2) = ov.depolarizing_2q {
                model.depolarizing_2q = l2;
            }
            if let Some(flip) = ov.readout_flip {
                model.readout_flip = vec![flip; crate::linalg::MAX_QUBITS];
            }
        }
        model.validate().map_err(|e| Error::Config {
            field: "noise_overrides".into(),
            message: e.to_string(),
        })?;
        Ok(model)
    }

    pub fn n_system(&self) -> usize {
        self.system.n_qubits()
    }

    /// The tracked-state basis: the four Bell states, or the sixteen
    /// GHZ-family stabilizer eigenstates ordered by ancilla pattern.
    pub fn tracked_states(system: System) -> Vec<(String, PureState)> {
        match system {
            System::Bell => vec![
                ("phi+".into(), PureState::phi_plus()),
                ("phi-".into(), PureState::phi_minus()),
                ("psi+".into(), PureState::psi_plus()),
                ("psi-".into(), PureState::psi_minus()),
            ],
            System::Ghz => {
                let stabs = crate::pauli::ghz_stabilizers();
                (0..16u8)
                    .map(|pattern| {
                        let signs: Vec<Sign> = (0..4)
                            .map(|i| Sign::from_bit((pattern >> (3 - i)) & 1))
                            .collect();
                        let psi = simultaneous_eigenstate(&stabs, &signs)
                            .expect("GHZ family is nondegenerate");
                        let label = branch_label(&psi).expect("two-branch state");
                        (label, psi)
                    })
                    .collect()
            }
        }
    }

    /// The cooling circuit at pump probability `p` (`theta = asin(sqrt(p))`).
    pub fn build_circuit(&self, p: f64) -> Result<Circuit> {
        let theta = p.sqrt().asin();
        let mut c = Circuit::new(self.n_system(), self.ancilla_bits.clone())?;
        for (slot, map) in self.maps.iter().enumerate() {
            let (flip_qubit, axis) = map.flip();
            c.append_pump(&map.stabilizer(), flip_qubit, axis, theta, slot)?;
        }
        Ok(c)
    }
}

/// Basis rotation appended before shot-based readout, mapping each tracked
/// state onto a distinct computational basis state.
pub fn measurement_rotation(system: System) -> Vec<Gate> {
    match system {
        System::Bell => vec![Gate::Cnot { control: 0, target: 1 }, Gate::H(0)],
        System::Ghz => vec![
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 0, target: 2 },
            Gate::Cnot { control: 0, target: 3 },
            Gate::H(0),
        ],
    }
}

/// Tracked-state index of a measured bitstring after the rotation of
/// [`measurement_rotation`].
pub fn measured_index_to_tracked(system: System, measured: usize) -> usize {
    match system {
        System::Bell => {
            // |00>=phi+, |01>=psi+, |10>=phi-, |11>=psi-
            let sign = (measured >> 1) & 1;
            let parity = measured & 1;
            match (parity, sign) {
                (0, 0) => 0,
                (0, 1) => 1,
                (1, 0) => 2,
                _ => 3,
            }
        }
        System::Ghz => {
            let m0 = (measured >> 3) & 1;
            let m1 = (measured >> 2) & 1;
            let m2 = (measured >> 1) & 1;
            let m3 = measured & 1;
            // ZZ-link ancilla bits of the representative |0 m1 m2 m3>
            ((m1) << 3) | ((m1 ^ m2) << 2) | ((m2 ^ m3) << 1) | m0
        }
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 of (seed ^ golden * stream); independent per-task streams
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn exact_populations(
    circuit: &Circuit,
    rho0: &DensityMatrix,
    noise: Option<&NoiseModel>,
    tracked: &[(String, PureState)],
) -> Result<Vec<f64>> {
    let out = circuit.run_density(rho0, noise)?;
    tracked.iter().map(|(_, psi)| out.population(psi)).collect()
}

/// Populations at a single grid point, averaged over all computational basis
/// initial states (the statistical-mixing emulation of the maximally mixed
/// input).
///
/// In exact mode the average is also cross-checked against running the
/// maximally mixed density matrix directly; the two agree by linearity.
pub fn averaged_mixed_run(config: &ExperimentConfig, p: f64, point_seed: u64) -> Result<Vec<f64>> {
    let n = config.n_system();
    let dim = 1usize << n;
    let tracked = ExperimentConfig::tracked_states(config.system);
    let noise_model = config.noise_model()?;
    let noise = if noise_model.has_gate_noise() || noise_model.has_readout_error() {
        Some(&noise_model)
    } else {
        None
    };
    let circuit = config.build_circuit(p)?;

    let populations = match config.shots {
        None => {
            let mut avg = vec![0.0; tracked.len()];
            for idx in 0..dim {
                let pops = exact_populations(&circuit, &DensityMatrix::basis(n, idx), noise, &tracked)?;
                for (a, p) in avg.iter_mut().zip(pops.iter()) {
                    *a += p / dim as f64;
                }
            }
            let direct = exact_populations(
                &circuit,
                &DensityMatrix::maximally_mixed(n),
                noise,
                &tracked,
            )?;
            let max_gap = avg
                .iter()
                .zip(direct.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if max_gap > 1e-9 {
                return Err(Error::Numeric(format!(
                    "basis averaging disagrees with direct mixed input by {max_gap:.3e}"
                )));
            }
            avg
        }
        Some(shots) => {
            let mut measured = circuit.clone();
            for gate in measurement_rotation(config.system) {
                measured.push(gate)?;
            }
            let confusion = if config.mitigate {
                Some(build_confusion(&noise_model, n)?)
            } else {
                None
            };
            let mut avg = vec![0.0; tracked.len()];
            for idx in 0..dim {
                let counts = measured.sample(
                    &DensityMatrix::basis(n, idx),
                    shots,
                    noise,
                    derive_seed(point_seed, idx as u64),
                )?;
                let probs = counts_to_probs(&counts, n)?;
                let probs = match &confusion {
                    Some(m) => mitigate(&probs, m)?.distribution,
                    None => probs,
                };
                for (m, &pr) in probs.iter().enumerate() {
                    avg[measured_index_to_tracked(config.system, m)] += pr / dim as f64;
                }
            }
            avg
        }
    };
    let total: f64 = populations.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::Numeric(format!(
            "tracked populations sum to {total} > 1"
        )));
    }
    Ok(populations)
}

/// Sampled population curve over a `p` grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopulationCurve {
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub p_values: Vec<f64>,
    /// One row per grid point, one column per tracked state.
    pub populations: Vec<Vec<f64>>,
    pub seed: u64,
    pub timestamp: String,
    pub version: String,
}

/// Runs [`averaged_mixed_run`] at every grid point. Grid points execute in
/// parallel; each derives its own seed stream, so the result is independent
/// of the thread count.
pub fn sweep(config: &ExperimentConfig) -> Result<PopulationCurve> {
    config.validate()?;
    let labels: Vec<String> = ExperimentConfig::tracked_states(config.system)
        .into_iter()
        .map(|(label, _)| label)
        .collect();
    let populations: Vec<Vec<f64>> = config
        .p_grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| averaged_mixed_run(config, p, derive_seed(config.seed, 1 + i as u64)))
        .collect::<Result<_>>()?;
    Ok(PopulationCurve {
        config: config.clone(),
        labels,
        p_values: config.p_grid.clone(),
        populations,
        seed: config.seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

impl PopulationCurve {
    /// CSV with header `p,<label>,...` and populations to 12 decimal digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (p, row) in self.p_values.iter().zip(self.populations.iter()) {
            out.push_str(&format!("{p:.12}"));
            for v in row {
                out.push_str(&format!(",{v:.12}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.labels.iter().position(|l| l == label)?;
        Some(self.populations.iter().map(|row| row[idx]).collect())
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let config: ExperimentConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// Runs a sweep and writes `populations.csv` and `report.json` (config echo,
/// curves, and run manifest) into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let curve = sweep(config)?;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("populations.csv");
    fs::write(&csv_path, curve.to_csv())?;
    let json_path = out_dir.join("report.json");
    fs::write(&json_path, serde_json::to_string_pretty(&curve)? + "\n")?;
    Ok(RunArtifacts { csv_path, json_path })
}
