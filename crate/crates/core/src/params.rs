//! Chain configuration and unit conventions.
//!
//! Everything is measured in units of the single-emitter waveguide decay
//! rate: rates and detunings in γ₀, lengths and times in γ₀⁻¹, with
//! `ħ = v_g = 1`. The dispersion is linear, so a photon at detuning Δ has
//! wavenumber `k = Ω + Δ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

/// How the inter-qubit propagation phase `kL` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Full phase `(Ω + Δ)L`.
    General,
    /// Superradiant condition `ΩL = nπ` imposed: `e^{ikL} = (-1)^n e^{iΔL}`.
    /// This is the `Ω → ∞` envelope; `omega` is not consulted.
    SrCondition,
    /// Linearized phase `kL ≈ ΩL`, independent of Δ.
    Markovian,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::General => "general",
            Mode::SrCondition => "sr-condition",
            Mode::Markovian => "markovian",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = SsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Mode::General),
            "sr" | "sr-condition" => Ok(Mode::SrCondition),
            "markovian" => Ok(Mode::Markovian),
            other => Err(SsrError::Domain(format!("unknown mode '{other}'"))),
        }
    }
}

/// Physical configuration of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_qubits: usize,
    /// Qubit transition frequency Ω [γ₀].
    pub omega: f64,
    /// Nearest-neighbour separation L [γ₀⁻¹].
    pub separation: f64,
    /// Integer n of the superradiant condition `ΩL = nπ`.
    pub sr_index: i64,
    pub mode: Mode,
}

/// Below this Ω the rotating-wave assumption γ₀/Ω ≪ 1 is questionable.
pub const OMEGA_WARN_THRESHOLD: f64 = 10.0;

impl ChainParams {
    pub fn new(
        n_qubits: usize,
        omega: f64,
        separation: f64,
        sr_index: i64,
        mode: Mode,
    ) -> Result<Self> {
        let params = ChainParams {
            n_qubits,
            omega,
            separation,
            sr_index,
            mode,
        };
        params.validate()?;
        if mode != Mode::SrCondition && omega < OMEGA_WARN_THRESHOLD {
            log::warn!(
                "omega = {omega} is not much larger than gamma_0; rotating-wave results may be inaccurate"
            );
        }
        Ok(params)
    }

    /// Superradiant-condition chain with `n = 1`. Ω is not consulted in this mode.
    pub fn sr(n_qubits: usize, separation: f64) -> Result<Self> {
        Self::new(n_qubits, 50.0, separation, 1, Mode::SrCondition)
    }

    pub fn general(n_qubits: usize, omega: f64, separation: f64) -> Result<Self> {
        Self::new(n_qubits, omega, separation, 1, Mode::General)
    }

    pub fn markovian(n_qubits: usize, omega: f64, separation: f64) -> Result<Self> {
        Self::new(n_qubits, omega, separation, 1, Mode::Markovian)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(SsrError::Domain("n_qubits must be at least 1".into()));
        }
        if !(self.separation >= 0.0) || !self.separation.is_finite() {
            return Err(SsrError::Domain(format!(
                "separation must be finite and non-negative, got {}",
                self.separation
            )));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(SsrError::Domain(format!(
                "omega must be finite and positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn with_separation(&self, separation: f64) -> Self {
        ChainParams {
            separation,
            ..*self
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        ChainParams { mode, ..*self }
    }

    /// For a general-mode chain with `ΩL` within rounding of `nπ`, the
    /// identical chain expressed under the superradiant condition.
    pub fn sr_equivalent(&self) -> Option<ChainParams> {
        if self.mode != Mode::General {
            return None;
        }
        let phi = self.omega * self.separation;
        let k = (phi / PI).round();
        if (phi - k * PI).abs() > 1e-12 * phi.max(1.0) {
            return None;
        }
        Some(ChainParams {
            sr_index: k as i64,
            mode: Mode::SrCondition,
            ..*self
        })
    }

    /// `(-1)^n` for the superradiant index.
    pub fn sr_sign(&self) -> f64 {
        if self.sr_index.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// The propagation phase `kL` at detuning `delta` for this mode.
    pub fn phase(&self, delta: Complex64) -> Phase {
        let l = self.separation;
        match self.mode {
            Mode::General => Phase {
                sign: 1.0,
                theta: (delta + self.omega) * l,
            },
            Mode::SrCondition => Phase {
                sign: self.sr_sign(),
                theta: delta * l,
            },
            Mode::Markovian => markovian_phase(self.omega * l),
        }
    }
}

/// Frequency that satisfies `ΩL = nπ` for the given separation.
pub fn omega_for_sr(separation: f64, sr_index: i64) -> f64 {
    sr_index as f64 * PI / separation
}

/// A propagation phase stored as `φ = θ + (π if sign < 0)`, so that the
/// superradiant half-turns are carried exactly instead of through
/// floating-point multiples of π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub sign: f64,
    pub theta: Complex64,
}

impl Phase {
    pub fn from_value(phi: Complex64) -> Self {
        Phase {
            sign: 1.0,
            theta: phi,
        }
    }

    /// `e^{iφ}`
    pub fn exp_pos(&self) -> Complex64 {
        (Complex64::i() * self.theta).exp() * self.sign
    }

    /// `e^{-iφ}`
    pub fn exp_neg(&self) -> Complex64 {
        (-Complex64::i() * self.theta).exp() * self.sign
    }

    pub fn cos(&self) -> Complex64 {
        self.theta.cos() * self.sign
    }

    pub fn sin(&self) -> Complex64 {
        self.theta.sin() * self.sign
    }
}

/// The linearized phase `ΩL`, snapped onto an exact multiple of π when it is
/// within rounding of one so that the Dicke zero modes stay exactly at the origin.
fn markovian_phase(phi: f64) -> Phase {
    let k = (phi / PI).round();
    if (phi - k * PI).abs() <= 1e-12 * phi.abs().max(1.0) {
        let sign = if (k as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        Phase {
            sign,
            theta: Complex64::new(0.0, 0.0),
        }
    } else {
        Phase::from_value(Complex64::new(phi, 0.0))
    }
}
