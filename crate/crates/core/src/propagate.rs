//! Truncated Schrödinger propagation for piecewise-constant fields.
//!
//! Every sample holds the Hamiltonian constant, so each step is the exact
//! unitary exp(-i dt (H0 + u_m H1)) taken through an eigendecomposition of the
//! real-symmetric step generator. There is no splitting or integration error,
//! only linear-algebra roundoff.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ControlField;
use crate::linalg::{dense_sym_eigendecomposition, EigenDecomp};
use crate::system::{QuantumSystem, StepOperator};

/// Complex amplitude vector in the H0 eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Basis state at 0-based storage position.
    pub fn basis_state(dim: usize, position: usize) -> Self {
        assert!(position < dim, "basis position {position} out of range for dim {dim}");
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[position] = Complex64::ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= n);
        }
        self
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn conjugated(&self) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|c| c.conj()).collect() }
    }

    /// Pad with zeros up to `dim` (embedding into a larger truncation).
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim());
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(dim, Complex64::ZERO);
        Self { amplitudes }
    }

    /// The first `dim` components (projection onto a smaller truncation).
    pub fn projected(&self, dim: usize) -> Self {
        Self { amplitudes: self.amplitudes[..dim].to_vec() }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Time-indexed record of a propagation run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub populations: Vec<Vec<f64>>,
    pub h0_expect: Vec<f64>,
    /// Physical index of the first retained level, for labeling outputs.
    pub first_index: i64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Largest deviation of Σ|c|² from 1 over all recorded states.
    pub fn worst_norm_error(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with one row per recorded time: t, per-level populations, ⟨H0⟩.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.states.first().map_or(0, StateVector::dim);
        writeln!(
            w,
            "# truncated Schrödinger trajectory; populations per level, energies in atomic units"
        )?;
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..dim).map(|p| format!("pop_{}", self.first_index + p as i64)))
            .chain(std::iter::once("h0_expect".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = Vec::with_capacity(dim + 2);
            row.push(t.to_string());
            row.extend(self.populations[i].iter().map(f64::to_string));
            row.push(self.h0_expect[i].to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Per-level maximum population over the whole recorded dynamics.
pub fn leakage_profile(traj: &Trajectory) -> Vec<f64> {
    let dim = traj.states.first().map_or(0, StateVector::dim);
    let mut maxima = vec![0.0f64; dim];
    for pops in &traj.populations {
        for (m, p) in maxima.iter_mut().zip(pops) {
            *m = m.max(*p);
        }
    }
    maxima
}

pub fn write_leakage_csv<W: Write>(profile: &[f64], first_index: i64, mut w: W) -> Result<()> {
    writeln!(w, "# per-level maximum population over the whole dynamics")?;
    writeln!(w, "level,max_pop")?;
    for (p, m) in profile.iter().enumerate() {
        writeln!(w, "{},{}", first_index + p as i64, m)?;
    }
    Ok(())
}

/// Both distance conventions to a target state at the final time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FidelityReport {
    /// |⟨target|ψ(T)⟩|
    pub overlap_abs: f64,
    /// 1 − |⟨target|ψ(T)⟩|
    pub distance: f64,
    /// 1 − |⟨target|ψ(T)⟩|²
    pub distance_squared_overlap: f64,
}

pub fn fidelity(traj: &Trajectory, target: &StateVector) -> Result<FidelityReport> {
    let fin = traj.final_state();
    if fin.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: fin.dim(), got: target.dim() });
    }
    let o = target.overlap(fin).norm();
    Ok(FidelityReport {
        overlap_abs: o,
        distance: 1.0 - o,
        distance_squared_overlap: 1.0 - o * o,
    })
}

/// Summary block written next to trajectory outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub system: String,
    pub dim: usize,
    #[serde(rename = "K")]
    pub k_l1: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub final_norm_error: f64,
    pub fidelity: Option<FidelityReport>,
}

/// Caching eigendecomposition store keyed by the exact sample value.
/// Quantized fields re-use decompositions across steps; fully free fields
/// miss every time, which is just the price of the exact exponential.
struct DecompCache {
    map: HashMap<u64, EigenDecomp>,
}

const CACHE_CAP: usize = 4096;

impl DecompCache {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn get(&mut self, system: &QuantumSystem, dim: usize, u: f64) -> Result<&EigenDecomp> {
        let key = u.to_bits();
        if !self.map.contains_key(&key) {
            if self.map.len() >= CACHE_CAP {
                self.map.clear();
            }
            let dec = match system.step_operator(dim, u)? {
                StepOperator::Tridiag(t) => t.eigendecomposition()?,
                StepOperator::Dense(h) => dense_sym_eigendecomposition(&h),
            };
            self.map.insert(key, dec);
        }
        Ok(self.map.get(&key).unwrap())
    }
}

/// Integrate the truncated dynamics from `psi0`, recording every
/// `record_stride`-th step (the initial and final states are always kept).
pub fn propagate(
    system: &QuantumSystem,
    dim: usize,
    field: &ControlField,
    psi0: &StateVector,
    record_stride: usize,
) -> Result<Trajectory> {
    if dim < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: dim });
    }
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi0.dim() });
    }
    let stride = record_stride.max(1);
    let energies = system.h0_diag(dim)?;
    let dt = field.dt();

    let mut cache = DecompCache::new();
    let mut amps = psi0.amplitudes.clone();
    let steps = field.len();

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps / stride + 2),
        states: Vec::with_capacity(steps / stride + 2),
        populations: Vec::with_capacity(steps / stride + 2),
        h0_expect: Vec::with_capacity(steps / stride + 2),
        first_index: system.spectrum.first_index,
    };
    record(&mut traj, 0.0, &amps, &energies);

    for (m, &u) in field.samples().iter().enumerate() {
        let dec = cache.get(system, dim, u)?;
        dec.apply_exp(dt, &mut amps);
        let step = m + 1;
        if step % stride == 0 || step == steps {
            record(&mut traj, step as f64 * dt, &amps, &energies);
        }
    }
    Ok(traj)
}

fn record(traj: &mut Trajectory, t: f64, amps: &[Complex64], energies: &[f64]) {
    let pops: Vec<f64> = amps.iter().map(|c| c.norm_sqr()).collect();
    let h0: f64 = pops.iter().zip(energies).map(|(p, e)| p * e).sum();
    traj.times.push(t);
    traj.states.push(StateVector::new(amps.to_vec()));
    traj.populations.push(pops);
    traj.h0_expect.push(h0);
}

/// Compare the finite-difference derivative of ⟨H0⟩ against
/// -i·u·⟨ψ|[H0,H1]|ψ⟩ on a stride-1 trajectory; returns the worst residual.
/// The field jumps at sample boundaries, so the central difference is matched
/// against the mean of the adjacent sample values.
pub fn h0_derivative_check(
    traj: &Trajectory,
    field: &ControlField,
    system: &QuantumSystem,
) -> Result<f64> {
    let steps = field.len();
    if traj.times.len() != steps + 1 {
        return Err(Error::DimensionMismatch { expected: steps + 1, got: traj.times.len() });
    }
    let dt = field.dt();
    let dim = traj.states[0].dim();
    let energies = system.h0_diag(dim)?;
    let mut h1_psi = vec![Complex64::ZERO; dim];
    let mut worst = 0.0f64;
    for k in 1..steps {
        let fd = (traj.h0_expect[k + 1] - traj.h0_expect[k - 1]) / (2.0 * dt);
        let u_avg = 0.5 * (field.samples()[k - 1] + field.samples()[k]);
        let psi = &traj.states[k].amplitudes;
        system.apply_h1(psi, &mut h1_psi)?;
        // -i·u·⟨ψ|[H0,H1]|ψ⟩ = 2u·Σ_p E_p·Im(ψ_p* (H1ψ)_p)
        let comm: f64 = energies
            .iter()
            .zip(psi.iter().zip(&h1_psi))
            .map(|(e, (p, y))| e * (p.conj() * y).im)
            .sum();
        let rhs = 2.0 * u_avg * comm;
        worst = worst.max((fd - rhs).abs());
    }
    Ok(worst)
}
