//! Quantum systems given by a discrete spectrum and a real symmetric coupling,
//! plus the weak-coupling certificate that the bound calculators rely on.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

/// Discrete spectrum of the field-free Hamiltonian. Levels are addressed
/// either by 0-based storage position or by physical index
/// `j = first_index + position` (the rotor counts from 1, the oscillator
/// from 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub kind: SpectrumKind,
    pub first_index: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// E_j = j², j = 1, 2, … (odd-sine subspace of the planar rotor).
    Rotor,
    /// E_n = n + 1/2, n = 0, 1, …
    Oscillator,
    Tabulated(Vec<f64>),
}

impl SpectrumModel {
    pub fn rotor() -> Self {
        Self { kind: SpectrumKind::Rotor, first_index: 1 }
    }

    pub fn oscillator() -> Self {
        Self { kind: SpectrumKind::Oscillator, first_index: 0 }
    }

    pub fn tabulated(energies: Vec<f64>, first_index: i64) -> Self {
        Self { kind: SpectrumKind::Tabulated(energies), first_index }
    }

    /// Number of levels that can be produced, None when unbounded.
    pub fn available_levels(&self) -> Option<usize> {
        match &self.kind {
            SpectrumKind::Tabulated(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn energy_at_position(&self, position: usize) -> Result<f64> {
        match &self.kind {
            SpectrumKind::Rotor => {
                let j = (self.first_index + position as i64) as f64;
                Ok(j * j)
            }
            SpectrumKind::Oscillator => {
                let n = (self.first_index + position as i64) as f64;
                Ok(n + 0.5)
            }
            SpectrumKind::Tabulated(t) => t.get(position).copied().ok_or(
                Error::SpectrumExhausted { needed: position + 1, available: t.len() },
            ),
        }
    }

    /// Energy indexed the way the bound formulas are written (physical index).
    pub fn energy_at_physical(&self, j: i64) -> Result<f64> {
        let position = j - self.first_index;
        if position < 0 {
            return Err(Error::Schema(format!(
                "physical level {j} precedes first_index {}",
                self.first_index
            )));
        }
        self.energy_at_position(position as usize)
    }

    fn validate(&self, min_levels: usize) -> Result<()> {
        if let SpectrumKind::Tabulated(t) = &self.kind {
            if t.len() < min_levels {
                return Err(Error::Schema(format!(
                    "tabulated spectrum holds {} levels, certificate needs {}",
                    t.len(),
                    min_levels
                )));
            }
            for (i, pair) in t.windows(2).enumerate() {
                if pair[1] < pair[0] {
                    return Err(Error::Schema(format!(
                        "energies must be nondecreasing, violated at position {}",
                        i + 1
                    )));
                }
            }
            if t.first().is_some_and(|&e| e < 0.0) {
                return Err(Error::Schema("energies must be nonnegative".into()));
            }
        }
        // Both closed forms are strictly increasing and unbounded by
        // construction; nothing to scan.
        Ok(())
    }
}

/// Interaction operator in the H0 eigenbasis; real symmetric.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingModel {
    Tridiagonal(SuperDiag),
    /// Diagonals at the given offsets; offset 0 is the main diagonal.
    Banded(Vec<BandSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SuperDiag {
    /// b = 1/2 on every superdiagonal entry.
    Rotor,
    /// b_{n+1,n} = √n, with n the physical index of the lower level.
    Oscillator,
    Tabulated(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub offset: usize,
    pub values: Vec<f64>,
}

impl CouplingModel {
    pub fn is_tridiagonal(&self) -> bool {
        matches!(self, CouplingModel::Tridiagonal(_))
    }

    /// Superdiagonal entry coupling storage positions p and p+1.
    pub fn superdiag_at(&self, position: usize, first_index: i64) -> Result<f64> {
        match self {
            CouplingModel::Tridiagonal(s) => match s {
                SuperDiag::Rotor => Ok(0.5),
                SuperDiag::Oscillator => {
                    let n = (first_index + position as i64) as f64;
                    Ok(n.sqrt())
                }
                SuperDiag::Tabulated(t) => t.get(position).copied().ok_or(
                    Error::SpectrumExhausted { needed: position + 1, available: t.len() },
                ),
            },
            CouplingModel::Banded(_) => Err(Error::NonTridiagonal),
        }
    }
}

/// The (k, C, d) constants certifying weak coupling, together with how many
/// levels the tridiagonal growth criterion was checked on.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakCouplingCertificate {
    pub power_k: u32,
    pub growth_c: f64,
    pub domination_d: f64,
    pub verified_up_to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    pub name: String,
    pub spectrum: SpectrumModel,
    pub coupling: CouplingModel,
    pub certificate: WeakCouplingCertificate,
}

/// Planar rotor, odd-sine subspace: E_j = j², b = 1/2, certificate (1, 3/2, 1).
pub fn builtin_rotor() -> QuantumSystem {
    QuantumSystem {
        name: "rotor".into(),
        spectrum: SpectrumModel::rotor(),
        coupling: CouplingModel::Tridiagonal(SuperDiag::Rotor),
        certificate: WeakCouplingCertificate {
            power_k: 1,
            growth_c: 1.5,
            domination_d: 1.0,
            verified_up_to: 1000,
        },
    }
}

/// Harmonic oscillator: E_n = n + 1/2, b_{n+1,n} = √n, certificate (2, 8, 1).
pub fn builtin_oscillator() -> QuantumSystem {
    QuantumSystem {
        name: "oscillator".into(),
        spectrum: SpectrumModel::oscillator(),
        coupling: CouplingModel::Tridiagonal(SuperDiag::Oscillator),
        certificate: WeakCouplingCertificate {
            power_k: 2,
            growth_c: 8.0,
            domination_d: 1.0,
            verified_up_to: 1000,
        },
    }
}

impl QuantumSystem {
    /// Largest value of |b_{j+1,j}|(E_{j+1}^k − E_j^k)/E_j^k over the first
    /// `levels` levels — the smallest C the growth criterion admits there.
    pub fn verify_eq9(&self, k: u32, levels: usize) -> Result<f64> {
        if levels < 2 {
            return Err(Error::Schema("growth check needs at least 2 levels".into()));
        }
        if !self.coupling.is_tridiagonal() {
            return Err(Error::NonTridiagonal);
        }
        let mut worst = 0.0f64;
        for p in 0..levels - 1 {
            let e_lo = self.spectrum.energy_at_position(p)?;
            let e_hi = self.spectrum.energy_at_position(p + 1)?;
            if e_lo <= 0.0 {
                return Err(Error::DegenerateSpectrum {
                    level: self.spectrum.first_index + p as i64,
                    energy: e_lo,
                });
            }
            let b = self.coupling.superdiag_at(p, self.spectrum.first_index)?;
            let ratio = b.abs() * (e_hi.powi(k as i32) - e_lo.powi(k as i32))
                / e_lo.powi(k as i32);
            worst = worst.max(ratio);
        }
        Ok(worst)
    }

    /// Diagonal of the truncated H0 over the first `dim` levels.
    pub fn h0_diag(&self, dim: usize) -> Result<Vec<f64>> {
        (0..dim).map(|p| self.spectrum.energy_at_position(p)).collect()
    }

    /// Superdiagonal of the truncated H1 (tridiagonal couplings only).
    pub fn h1_superdiag(&self, dim: usize) -> Result<Vec<f64>> {
        (0..dim.saturating_sub(1))
            .map(|p| self.coupling.superdiag_at(p, self.spectrum.first_index))
            .collect()
    }

    /// sup |b| over the first `dim` levels; the `c` entering the tail bound.
    pub fn max_coupling(&self, dim: usize) -> Result<f64> {
        Ok(self
            .h1_superdiag(dim)?
            .iter()
            .fold(0.0f64, |acc, b| acc.max(b.abs())))
    }

    /// The step generator H0 + u·H1 truncated to `dim` levels.
    pub fn step_operator(&self, dim: usize, u: f64) -> Result<StepOperator> {
        let diag = self.h0_diag(dim)?;
        match &self.coupling {
            CouplingModel::Tridiagonal(_) => {
                let offdiag: Vec<f64> =
                    self.h1_superdiag(dim)?.iter().map(|b| u * b).collect();
                Ok(StepOperator::Tridiag(SymTridiag::new(diag, offdiag)))
            }
            CouplingModel::Banded(bands) => {
                let mut h = DMatrix::zeros(dim, dim);
                for (i, d) in diag.iter().enumerate() {
                    h[(i, i)] = *d;
                }
                for band in bands {
                    for (p, v) in band.values.iter().enumerate() {
                        let (r, c) = (p, p + band.offset);
                        if c >= dim {
                            break;
                        }
                        h[(r, c)] += u * v;
                        if band.offset > 0 {
                            h[(c, r)] += u * v;
                        }
                    }
                }
                Ok(StepOperator::Dense(h))
            }
        }
    }

    /// y ← H1 x on the first `dim` levels.
    pub fn apply_h1(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        let dim = x.len();
        debug_assert_eq!(y.len(), dim);
        match &self.coupling {
            CouplingModel::Tridiagonal(_) => {
                let b = self.h1_superdiag(dim)?;
                for i in 0..dim {
                    let mut acc = Complex64::ZERO;
                    if i > 0 {
                        acc += x[i - 1] * b[i - 1];
                    }
                    if i + 1 < dim {
                        acc += x[i + 1] * b[i];
                    }
                    y[i] = acc;
                }
                Ok(())
            }
            CouplingModel::Banded(bands) => {
                y.fill(Complex64::ZERO);
                for band in bands {
                    for (p, v) in band.values.iter().enumerate() {
                        let (r, c) = (p, p + band.offset);
                        if c >= dim {
                            break;
                        }
                        y[r] += x[c] * *v;
                        if band.offset > 0 {
                            y[c] += x[r] * *v;
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

pub enum StepOperator {
    Tridiag(SymTridiag),
    Dense(DMatrix<f64>),
}

// ---------------------------------------------------------------------------
// JSON loading

#[derive(Deserialize)]
struct RawSystem {
    name: String,
    spectrum: RawSpectrum,
    coupling: RawCoupling,
    certificate: RawCertificate,
}

#[derive(Deserialize)]
struct RawSpectrum {
    kind: String,
    energies: Option<Vec<f64>>,
    first_index: Option<i64>,
}

#[derive(Deserialize)]
struct RawCoupling {
    kind: String,
    #[serde(rename = "super")]
    superdiag: serde_json::Value,
}

#[derive(Deserialize)]
struct RawCertificate {
    k: u32,
    #[serde(rename = "C")]
    c: f64,
    d: f64,
    verified_up_to: usize,
}

/// Build a system from its JSON description, rejecting anything that breaks
/// the spectrum invariants or the stored certificate.
pub fn load_system(json: &str) -> Result<QuantumSystem> {
    let raw: RawSystem =
        serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;

    let spectrum = match raw.spectrum.kind.as_str() {
        "rotor" => {
            if raw.spectrum.first_index.is_some_and(|f| f != 1) {
                return Err(Error::Schema("rotor levels are indexed from 1".into()));
            }
            SpectrumModel::rotor()
        }
        "oscillator" => {
            if raw.spectrum.first_index.is_some_and(|f| f != 0) {
                return Err(Error::Schema("oscillator levels are indexed from 0".into()));
            }
            SpectrumModel::oscillator()
        }
        "table" => {
            let energies = raw
                .spectrum
                .energies
                .ok_or_else(|| Error::Schema("tabulated spectrum needs energies".into()))?;
            SpectrumModel::tabulated(energies, raw.spectrum.first_index.unwrap_or(0))
        }
        other => return Err(Error::Schema(format!("unknown spectrum kind {other:?}"))),
    };

    if raw.coupling.kind != "tridiagonal" {
        return Err(Error::Schema(format!(
            "unknown coupling kind {:?} (config files support tridiagonal couplings)",
            raw.coupling.kind
        )));
    }
    let superdiag = match &raw.coupling.superdiag {
        serde_json::Value::String(s) => match s.as_str() {
            "closed:rotor" => SuperDiag::Rotor,
            "closed:oscillator" => SuperDiag::Oscillator,
            other => return Err(Error::Schema(format!("unknown coupling form {other:?}"))),
        },
        serde_json::Value::Array(values) => {
            let parsed: Option<Vec<f64>> = values.iter().map(|v| v.as_f64()).collect();
            SuperDiag::Tabulated(
                parsed.ok_or_else(|| Error::Schema("coupling table must be numeric".into()))?,
            )
        }
        _ => return Err(Error::Schema("coupling `super` must be a string or array".into())),
    };

    let certificate = WeakCouplingCertificate {
        power_k: raw.certificate.k,
        growth_c: raw.certificate.c,
        domination_d: raw.certificate.d,
        verified_up_to: raw.certificate.verified_up_to,
    };
    if certificate.power_k == 0 {
        return Err(Error::Schema("certificate k must be a positive integer".into()));
    }
    if !(certificate.growth_c > 0.0) || !(certificate.domination_d > 0.0) {
        return Err(Error::Schema("certificate C and d must be positive".into()));
    }
    if certificate.verified_up_to < 2 {
        return Err(Error::Schema("verified_up_to must be at least 2".into()));
    }

    spectrum.validate(certificate.verified_up_to)?;
    if let SuperDiag::Tabulated(t) = &superdiag {
        if t.len() + 1 < certificate.verified_up_to {
            return Err(Error::Schema(format!(
                "coupling table holds {} entries, certificate needs {}",
                t.len(),
                certificate.verified_up_to - 1
            )));
        }
    }

    let system = QuantumSystem {
        name: raw.name,
        spectrum,
        coupling: CouplingModel::Tridiagonal(superdiag),
        certificate,
    };
    check_certificate(&system)?;
    Ok(system)
}

/// Growth and domination checks over the finite verified range. A finite scan
/// cannot certify the infinite claim; it can only refute a bad certificate.
fn check_certificate(system: &QuantumSystem) -> Result<()> {
    let cert = &system.certificate;
    let levels = cert.verified_up_to;
    const SLACK: f64 = 1.0 + 1e-12;

    // Eq-9-style growth constant, reported with the offending physical level.
    for p in 0..levels - 1 {
        let e_lo = system.spectrum.energy_at_position(p)?;
        let e_hi = system.spectrum.energy_at_position(p + 1)?;
        if e_lo <= 0.0 {
            return Err(Error::DegenerateSpectrum {
                level: system.spectrum.first_index + p as i64,
                energy: e_lo,
            });
        }
        let b = system.coupling.superdiag_at(p, system.spectrum.first_index)?;
        let k = cert.power_k as i32;
        let ratio = b.abs() * (e_hi.powi(k) - e_lo.powi(k)) / e_lo.powi(k);
        if ratio > cert.growth_c * SLACK {
            return Err(Error::CertificateViolation {
                level: system.spectrum.first_index + p as i64,
                ratio,
                limit: cert.growth_c,
            });
        }
    }

    // Domination constant d over the same range.
    if cert.power_k == 1 {
        // bounded-H1 case: row-sum surrogate for the operator norm
        let max_b = system.max_coupling(levels)?;
        if 2.0 * max_b > cert.domination_d * SLACK {
            return Err(Error::CertificateViolation {
                level: system.spectrum.first_index,
                ratio: 2.0 * max_b,
                limit: cert.domination_d,
            });
        }
    } else {
        for p in 0..levels {
            let below = if p > 0 {
                system.coupling.superdiag_at(p - 1, system.spectrum.first_index)?
            } else {
                0.0
            };
            let above = if p + 1 < levels {
                system.coupling.superdiag_at(p, system.spectrum.first_index)?
            } else {
                0.0
            };
            let col_norm = below.hypot(above);
            let e = system.spectrum.energy_at_position(p)?;
            if e <= 0.0 {
                continue;
            }
            let ratio = col_norm / e.powf((cert.power_k as f64 - 1.0) / 2.0);
            if ratio > cert.domination_d * SLACK {
                return Err(Error::CertificateViolation {
                    level: system.spectrum.first_index + p as i64,
                    ratio,
                    limit: cert.domination_d,
                });
            }
        }
    }
    Ok(())
}
