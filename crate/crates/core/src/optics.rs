//! Passive linear optics on truncated Fock states.
//!
//! A beam splitter on modes `(j, j+1)` is the real rotation
//!
//! ```text
//! a_j†     -> sinθ a_j† + cosθ a_{j+1}†
//! a_{j+1}† -> -cosθ a_j† + sinθ a_{j+1}†
//! ```
//!
//! so a photon entering mode `j` stays there with amplitude `sinθ`
//! (reflectivity) and moves on with amplitude `cosθ` (transmissivity). A phase
//! shifter multiplies each ket by `exp(-iφ n_j)`. Modes are 0-based.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockError, FockSpace, FockState, MixedState, OccupationVector, NORM_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("optics: element {index} ({element}) does not fit a {modes}-mode network")]
    ModeOutOfRange {
        index: usize,
        element: String,
        modes: usize,
    },
    #[error("optics: non-finite angle in element {0}")]
    NonFiniteAngle(usize),
    #[error("optics: network has {network} modes but the state has {state}")]
    ModeMismatch { network: usize, state: usize },
    #[error("optics: W-state coefficients are not normalized (sum |c|^2 = {0})")]
    NotNormalized(f64),
    #[error("optics: W-state needs at least one coefficient")]
    EmptySpec,
    #[error("optics: residual amplitude underflow at mode {mode}: remaining product {product:e}, |c| = {coeff:e}")]
    ResidualUnderflow { mode: usize, product: f64, coeff: f64 },
    #[error("optics: inconsistent W-state coefficients at mode {mode} (arcsin argument {ratio})")]
    InconsistentSpec { mode: usize, ratio: f64 },
    #[error("optics: expected {expected} phases, got {got}")]
    PhaseCount { expected: usize, got: usize },
    #[error("optics: internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = OpticsError> = std::result::Result<T, E>;

/// A single passive element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Element {
    /// Rotation on modes `(mode, mode + 1)`.
    #[serde(rename = "bs")]
    BeamSplitter {
        mode: usize,
        #[serde(serialize_with = "ser_angle")]
        theta: f64,
    },
    #[serde(rename = "ps")]
    PhaseShifter {
        mode: usize,
        #[serde(serialize_with = "ser_angle")]
        phi: f64,
    },
}

fn ser_angle<S: serde::Serializer>(angle: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(angle.rem_euclid(TAU))
}

impl Element {
    pub fn beam_splitter(mode: usize, theta: f64) -> Self {
        Self::BeamSplitter { mode, theta }
    }

    pub fn phase_shifter(mode: usize, phi: f64) -> Self {
        Self::PhaseShifter { mode, phi }
    }

    /// The element undoing this one: `B(π - θ)` is the transpose of `B(θ)`.
    pub fn inverse(&self) -> Self {
        match *self {
            Self::BeamSplitter { mode, theta } => Self::BeamSplitter {
                mode,
                theta: PI - theta,
            },
            Self::PhaseShifter { mode, phi } => Self::PhaseShifter { mode, phi: -phi },
        }
    }

    fn highest_mode(&self) -> usize {
        match *self {
            Self::BeamSplitter { mode, .. } => mode + 1,
            Self::PhaseShifter { mode, .. } => mode,
        }
    }

    fn angle(&self) -> f64 {
        match *self {
            Self::BeamSplitter { theta, .. } => theta,
            Self::PhaseShifter { phi, .. } => phi,
        }
    }

    /// Action on the single-excitation amplitudes (an `N×N` matrix multiply).
    pub fn apply_single_excitation(&self, amps: &mut [Complex64]) {
        match *self {
            Self::BeamSplitter { mode, theta } => {
                let (s, c) = theta.sin_cos();
                let (x, y) = (amps[mode], amps[mode + 1]);
                amps[mode] = x * s - y * c;
                amps[mode + 1] = x * c + y * s;
            }
            Self::PhaseShifter { mode, phi } => {
                amps[mode] *= Complex64::from_polar(1.0, -phi);
            }
        }
    }

    /// Applies the element to a pure state.
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let modes = state.modes();
        if self.highest_mode() >= modes {
            return Err(OpticsError::ModeOutOfRange {
                index: 0,
                element: format!("{self:?}"),
                modes,
            });
        }
        match *self {
            Self::PhaseShifter { mode, phi } => {
                let mut out = state.clone();
                let basis = state.space().basis();
                for (amp, occ) in out.amps_mut().iter_mut().zip(basis) {
                    let n = occ.counts()[mode];
                    if n > 0 {
                        *amp *= Complex64::from_polar(1.0, -phi * f64::from(n));
                    }
                }
                Ok(out)
            }
            Self::BeamSplitter { mode, theta } => beam_splitter(state, mode, theta),
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

// Expands (a_j†)^n (a_{j+1}†)^m / sqrt(n! m!) under the mode substitution and
// recollects the result on normalized kets.
fn beam_splitter(state: &FockState, j: usize, theta: f64) -> Result<FockState> {
    let (s, c) = theta.sin_cos();
    let space = state.space();
    let mut out = FockState::zero(space);
    for (occ, amp) in state.terms() {
        let n = occ.counts()[j];
        let m = occ.counts()[j + 1];
        if n == 0 && m == 0 {
            let idx = space.index_of(occ).expect("ket of own space");
            out.amps_mut()[idx] += amp;
            continue;
        }
        let norm = (factorial(n) * factorial(m)).sqrt();
        let mut counts = occ.counts().to_vec();
        for p in 0..=n {
            // p photons of mode j stay in j, n - p move to j + 1
            let from_j = binomial(n, p) * s.powi(p as i32) * c.powi((n - p) as i32);
            for q in 0..=m {
                // q photons of mode j + 1 move to j, m - q stay
                let from_k = binomial(m, q) * (-c).powi(q as i32) * s.powi((m - q) as i32);
                let out_j = p + q;
                let out_k = n + m - out_j;
                let weight = from_j * from_k * (factorial(out_j) * factorial(out_k)).sqrt() / norm;
                if weight == 0.0 {
                    continue;
                }
                counts[j] = out_j;
                counts[j + 1] = out_k;
                let idx = space
                    .index_of(&OccupationVector::from(counts.as_slice()))
                    .ok_or_else(|| OpticsError::Internal("passive element raised the photon number".into()))?;
                out.amps_mut()[idx] += amp * weight;
            }
        }
    }
    Ok(out)
}

/// Elements applied left to right on `modes` modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    modes: usize,
    elements: Vec<Element>,
}

impl Network {
    pub fn new(modes: usize, elements: Vec<Element>) -> Result<Self> {
        for (index, e) in elements.iter().enumerate() {
            if e.highest_mode() >= modes {
                return Err(OpticsError::ModeOutOfRange {
                    index,
                    element: format!("{e:?}"),
                    modes,
                });
            }
            if !e.angle().is_finite() {
                return Err(OpticsError::NonFiniteAngle(index));
            }
        }
        Ok(Self { modes, elements })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            elements: Vec::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: &Network) -> Result<Self> {
        if next.modes != self.modes {
            return Err(OpticsError::ModeMismatch {
                network: next.modes,
                state: self.modes,
            });
        }
        self.elements.extend_from_slice(&next.elements);
        Ok(self)
    }

    /// Elements reversed, each replaced by its inverse.
    pub fn inverse(&self) -> Self {
        Self {
            modes: self.modes,
            elements: self.elements.iter().rev().map(Element::inverse).collect(),
        }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        if state.modes() != self.modes {
            return Err(OpticsError::ModeMismatch {
                network: self.modes,
                state: state.modes(),
            });
        }
        let mut cur = state.clone();
        for e in &self.elements {
            cur = e.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Component-wise action on an ensemble.
    pub fn apply_mixed(&self, rho: &MixedState) -> Result<MixedState> {
        rho.try_map(|s| self.apply(s))
    }

    /// Action on a single-excitation amplitude vector.
    pub fn apply_single_excitation(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = amps.to_vec();
        for e in &self.elements {
            e.apply_single_excitation(&mut out);
        }
        out
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            modes: usize,
            elements: Vec<Element>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Network::new(raw.modes, raw.elements).map_err(serde::de::Error::custom)
    }
}

/// Reverses a network and inverts each element.
pub fn invert_network(net: &Network) -> Network {
    net.inverse()
}

/// A layer of one phase shifter per mode.
pub fn local_phase_layer(phases: &[f64]) -> Result<Network> {
    Network::new(
        phases.len(),
        phases
            .iter()
            .enumerate()
            .map(|(mode, &phi)| Element::phase_shifter(mode, phi))
            .collect(),
    )
}

/// Coefficients `c̃_j` of a single-excitation (W-class) state.
#[derive(Debug, Clone, PartialEq)]
pub struct WStateSpec {
    coeffs: Vec<Complex64>,
}

impl WStateSpec {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(OpticsError::EmptySpec);
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL || !norm.is_finite() {
            return Err(OpticsError::NotNormalized(norm));
        }
        Ok(Self { coeffs })
    }

    /// Scales `coeffs` to unit norm and reports the original `|Σ|c|² - 1|`.
    pub fn normalized(coeffs: Vec<Complex64>) -> Result<(Self, f64)> {
        if coeffs.is_empty() {
            return Err(OpticsError::EmptySpec);
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(OpticsError::NotNormalized(norm));
        }
        let s = norm.sqrt().recip();
        let spec = Self::new(coeffs.into_iter().map(|c| c * s).collect())?;
        Ok((spec, (norm - 1.0).abs()))
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `1/√N` on every mode.
    pub fn symmetric(modes: usize) -> Self {
        let a = Complex64::new((modes as f64).sqrt().recip(), 0.0);
        Self {
            coeffs: vec![a; modes],
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `Σ_i conj(a_i) b_i`.
    pub fn overlap(&self, other: &WStateSpec) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The same spec with every coefficient multiplied by `exp(-iφ_j)`.
    pub fn with_local_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.modes() {
            return Err(OpticsError::PhaseCount {
                expected: self.modes(),
                got: phases.len(),
            });
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(phases)
                .map(|(c, &p)| c * Complex64::from_polar(1.0, -p))
                .collect(),
        })
    }

    pub fn is_symmetric_up_to_phases(&self, tol: f64) -> bool {
        let target = 1.0 / self.modes() as f64;
        self.coeffs.iter().all(|c| (c.norm_sqr() - target).abs() <= tol)
    }

    /// The W state in an `N`-mode space with the given cap.
    pub fn to_state(&self, cap: u32) -> Result<FockState> {
        let space = FockSpace::new(self.modes(), cap)?;
        self.to_state_in(&space)
    }

    pub fn to_state_in(&self, space: &FockSpace) -> Result<FockState> {
        Ok(FockState::single_excitation(space, &self.coeffs)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    coeffs: Vec<ComplexJson>,
}

impl Serialize for WStateSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| ComplexJson { re: c.re, im: c.im })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WStateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SpecJson::deserialize(deserializer)?;
        WStateSpec::new(raw.coeffs.into_iter().map(|c| Complex64::new(c.re, c.im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

const ARCSIN_CLAMP: f64 = 1e-12;
const UNDERFLOW_PRODUCT: f64 = 1e-12;
const UNDERFLOW_COEFF: f64 = 1e-9;

/// Beam-splitter cascade mapping `|1,0,...,0⟩` to the spec's W state.
///
/// Splitter `j` gets `θ_j = arcsin(|c̃_j| / Π_{i<j} cosθ_i)`; a trailing
/// phase shifter on mode `j` carries `-arg c̃_j` whenever it is nonzero.
pub fn synthesize_w_network(spec: &WStateSpec) -> Result<Network> {
    let n = spec.modes();
    let mut elements = Vec::with_capacity(2 * n);
    let mut product = 1.0;
    for (j, c) in spec.coeffs().iter().enumerate().take(n.saturating_sub(1)) {
        let mag = c.norm();
        let theta = if product < UNDERFLOW_PRODUCT {
            if mag > UNDERFLOW_COEFF {
                return Err(OpticsError::ResidualUnderflow {
                    mode: j,
                    product,
                    coeff: mag,
                });
            }
            0.0
        } else {
            let mut ratio = mag / product;
            if ratio > 1.0 {
                if ratio - 1.0 > ARCSIN_CLAMP {
                    return Err(OpticsError::InconsistentSpec { mode: j, ratio });
                }
                ratio = 1.0;
            }
            ratio.asin()
        };
        product *= theta.cos();
        elements.push(Element::beam_splitter(j, theta));
    }
    for (j, c) in spec.coeffs().iter().enumerate() {
        let phase = c.arg();
        if phase != 0.0 && c.norm() > 0.0 {
            elements.push(Element::phase_shifter(j, -phase));
        }
    }
    Network::new(n, elements)
}
