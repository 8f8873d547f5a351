//! Truncated multimode bosonic Fock space.
//!
//! States live in the span of occupation-number kets `|n_1, ..., n_N⟩` whose
//! total photon number does not exceed a configurable cap. Pure states are
//! dense amplitude vectors over that basis; mixed states are weighted
//! ensembles of pure states.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for every normalization and weight-sum check.
pub const NORM_TOL: f64 = 1e-12;

/// Photon cap used when none is given explicitly.
pub const DEFAULT_CAP: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("fock: invalid space: {0}")]
    InvalidSpace(String),
    #[error("fock: wrong mode count: expected {expected}, got {got}")]
    ModeCount { expected: usize, got: usize },
    #[error("fock: cap exceeded: {total} quanta > cap {cap}")]
    CapExceeded { total: u32, cap: u32 },
    #[error("fock: dimension mismatch: ({0}) vs ({1})")]
    SpaceMismatch(String, String),
    #[error("fock: state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("fock: zero-norm state cannot be renormalized")]
    ZeroNorm,
    #[error("fock: invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("fock: invalid mode permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
}

pub type Result<T, E = FockError> = std::result::Result<T, E>;

/// Photon counts per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// A single photon in `mode`, vacuum elsewhere.
    pub fn single(modes: usize, mode: usize) -> Self {
        let mut counts = vec![0; modes];
        counts[mode] = 1;
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl From<&[u32]> for OccupationVector {
    fn from(counts: &[u32]) -> Self {
        Self(counts.to_vec())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Debug)]
struct SpaceInner {
    modes: usize,
    cap: u32,
    basis: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

/// An `N`-mode Fock space truncated at `cap` total quanta.
///
/// The basis is ordered first by total photon number and then
/// lexicographically, so iteration and serialization are reproducible.
/// Cloning is cheap; spaces compare equal when mode count and cap agree.
#[derive(Debug, Clone)]
pub struct FockSpace(Arc<SpaceInner>);

impl PartialEq for FockSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.modes == other.0.modes && self.0.cap == other.0.cap)
    }
}

impl Eq for FockSpace {}

impl FockSpace {
    pub fn new(modes: usize, cap: u32) -> Result<Self> {
        if modes == 0 {
            return Err(FockError::InvalidSpace("mode count must be at least 1".into()));
        }
        let mut basis = Vec::new();
        for total in 0..=cap {
            let mut prefix = Vec::with_capacity(modes);
            compositions(total, modes, &mut prefix, &mut basis);
        }
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, occ)| (occ.clone(), i))
            .collect();
        Ok(Self(Arc::new(SpaceInner {
            modes,
            cap,
            basis,
            index,
        })))
    }

    /// Space with the default photon cap of two.
    pub fn with_default_cap(modes: usize) -> Result<Self> {
        Self::new(modes, DEFAULT_CAP)
    }

    pub fn modes(&self) -> usize {
        self.0.modes
    }

    pub fn cap(&self) -> u32 {
        self.0.cap
    }

    pub fn dim(&self) -> usize {
        self.0.basis.len()
    }

    pub fn basis(&self) -> &[OccupationVector] {
        &self.0.basis
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.0.index.get(occ).copied()
    }

    /// Checks that `occ` is a valid ket of this space.
    pub fn validate(&self, occ: &OccupationVector) -> Result<usize> {
        if occ.modes() != self.modes() {
            return Err(FockError::ModeCount {
                expected: self.modes(),
                got: occ.modes(),
            });
        }
        let total = occ.total();
        if total > self.cap() {
            return Err(FockError::CapExceeded {
                total,
                cap: self.cap(),
            });
        }
        Ok(self.0.index[occ])
    }

    fn ensure_same(&self, other: &FockSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FockError::SpaceMismatch(self.describe(), other.describe()))
        }
    }

    fn describe(&self) -> String {
        format!("modes {}, cap {}", self.modes(), self.cap())
    }
}

// Ascending lexicographic compositions of `total` into `parts` non-negative parts.
fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<OccupationVector>) {
    if parts == 1 {
        prefix.push(total);
        out.push(OccupationVector(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// A pure state: one complex amplitude per basis ket of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amps: Vec<Complex64>,
}

impl FockState {
    /// The basis ket `|occ⟩` with unit amplitude.
    pub fn basis(space: &FockSpace, occ: &OccupationVector) -> Result<Self> {
        let idx = space.validate(occ)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amps,
        })
    }

    pub fn vacuum(space: &FockSpace) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self {
            space: space.clone(),
            amps,
        }
    }

    pub fn zero(space: &FockSpace) -> Self {
        Self {
            space: space.clone(),
            amps: vec![Complex64::new(0.0, 0.0); space.dim()],
        }
    }

    /// Builds a state from `(ket, amplitude)` pairs; repeated kets add up.
    /// No normalization is applied.
    pub fn from_terms<I>(space: &FockSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut state = Self::zero(space);
        for (occ, amp) in terms {
            let idx = space.validate(&occ)?;
            state.amps[idx] += amp;
        }
        Ok(state)
    }

    /// Dense constructor; `amps` must follow the space's basis order.
    pub fn from_dense(space: &FockSpace, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(FockError::InvalidSpace(format!(
                "expected {} amplitudes, got {}",
                space.dim(),
                amps.len()
            )));
        }
        Ok(Self {
            space: space.clone(),
            amps,
        })
    }

    /// `Σ_i c_i |0..1_i..0⟩` over the single-excitation sector.
    pub fn single_excitation(space: &FockSpace, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != space.modes() {
            return Err(FockError::ModeCount {
                expected: space.modes(),
                got: coeffs.len(),
            });
        }
        if space.cap() < 1 {
            return Err(FockError::CapExceeded { total: 1, cap: 0 });
        }
        let n = space.modes();
        Self::from_terms(
            space,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (OccupationVector::single(n, i), *c)),
        )
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn modes(&self) -> usize {
        self.space.modes()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.space
            .index_of(occ)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amps[i])
    }

    /// Amplitudes of the kets `|0..1_i..0⟩`, indexed by mode.
    pub fn single_excitation_amplitudes(&self) -> Vec<Complex64> {
        let n = self.modes();
        if self.space.cap() == 0 {
            return vec![Complex64::new(0.0, 0.0); n];
        }
        // Sector 1 follows the vacuum and is stored in ascending
        // lexicographic order, i.e. the photon in the last mode comes first.
        (0..n).map(|i| self.amps[n - i]).collect()
    }

    /// Nonzero terms in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, Complex64)> + '_ {
        self.space
            .basis()
            .iter()
            .zip(self.amps.iter().copied())
            .filter(|(_, a)| a.norm_sqr() > 0.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() <= NORM_TOL {
            Ok(())
        } else {
            Err(FockError::NotNormalized(n))
        }
    }

    /// Explicit renormalization; fails on the zero vector.
    pub fn renormalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(FockError::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        Ok(self)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.amps.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        self.space.ensure_same(&other.space)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sqr(&self, other: &FockState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `self ⊗ other` in a space whose cap is the larger of the two caps.
    pub fn tensor(&self, other: &FockState) -> Result<Self> {
        let cap = self.space.cap().max(other.space.cap());
        self.tensor_with_cap(other, cap)
    }

    /// `self ⊗ other` in the `(N_a + N_b)`-mode space with the given cap.
    /// Any nonzero cross term above the cap is an error.
    pub fn tensor_with_cap(&self, other: &FockState, cap: u32) -> Result<Self> {
        let space = FockSpace::new(self.modes() + other.modes(), cap)?;
        let mut out = Self::zero(&space);
        for (occ_a, a) in self.terms() {
            for (occ_b, b) in other.terms() {
                let mut counts = occ_a.counts().to_vec();
                counts.extend_from_slice(occ_b.counts());
                let idx = space.validate(&OccupationVector(counts))?;
                out.amps[idx] += a * b;
            }
        }
        Ok(out)
    }

    /// Reorders modes: mode `p` of the result is mode `order[p]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let n = self.modes();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&m| m >= n || std::mem::replace(&mut seen[m], true)) {
            return Err(FockError::InvalidPermutation(order.to_vec()));
        }
        let mut out = Self::zero(&self.space);
        for (occ, amp) in self.terms() {
            let counts: Vec<u32> = order.iter().map(|&m| occ.counts()[m]).collect();
            let idx = self.space.0.index[&OccupationVector(counts)];
            out.amps[idx] = amp;
        }
        Ok(out)
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

/// Weighted ensemble of pure states sharing one space.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, FockState)>,
}

impl MixedState {
    /// Validates weights (non-negative, summing to one) and component
    /// normalization. Zero-weight components are dropped.
    pub fn new(components: Vec<(f64, FockState)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(FockError::InvalidMixture("no components".into()));
        };
        let space = first.space().clone();
        let mut total = 0.0;
        for (w, state) in &components {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(FockError::InvalidMixture(format!("weight {w} is not a probability")));
            }
            space.ensure_same(state.space())?;
            state.ensure_normalized()?;
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(FockError::InvalidMixture(format!("weights sum to {total}")));
        }
        let components: Vec<_> = components.into_iter().filter(|(w, _)| *w > 0.0).collect();
        Ok(Self { components })
    }

    pub fn pure(state: FockState) -> Result<Self> {
        Self::new(vec![(1.0, state)])
    }

    pub fn components(&self) -> &[(f64, FockState)] {
        &self.components
    }

    pub fn space(&self) -> &FockSpace {
        self.components[0].1.space()
    }

    pub fn modes(&self) -> usize {
        self.space().modes()
    }

    /// Applies `f` to every component, keeping the weights.
    pub fn try_map<E, F>(&self, mut f: F) -> Result<Self, E>
    where
        F: FnMut(&FockState) -> Result<FockState, E>,
    {
        let components = self
            .components
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Self { components })
    }

    /// `⟨ψ|ρ|ψ⟩ = Σ_j w_j |⟨ψ|ψ_j⟩|²`.
    pub fn fidelity_to_pure(&self, psi: &FockState) -> Result<f64> {
        let mut f = 0.0;
        for (w, s) in &self.components {
            f += w * psi.overlap_sqr(s)?;
        }
        Ok(f.clamp(0.0, 1.0))
    }

    /// Joint photon-number distribution `p(n) = Σ_j w_j |⟨n|ψ_j⟩|²`.
    pub fn photon_number_distribution(&self) -> PhotonDistribution {
        let space = self.space().clone();
        let mut probs = vec![0.0; space.dim()];
        for (w, s) in &self.components {
            for (p, a) in probs.iter_mut().zip(s.amplitudes()) {
                *p += w * a.norm_sqr();
            }
        }
        PhotonDistribution { space, probs }
    }
}

/// Probability for every ket of a space, in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    space: FockSpace,
    probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn get(&self, occ: &OccupationVector) -> f64 {
        self.space.index_of(occ).map_or(0.0, |i| self.probs[i])
    }

    /// All kets with their probabilities, including zeros.
    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, f64)> + '_ {
        self.space.basis().iter().zip(self.probs.iter().copied())
    }

    /// Kets carrying nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = (&OccupationVector, f64)> + '_ {
        self.iter().filter(|(_, p)| *p > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability that the total photon number is at most `quanta`.
    pub fn total_at_most(&self, quanta: u32) -> f64 {
        self.iter()
            .filter(|(occ, _)| occ.total() <= quanta)
            .map(|(_, p)| p)
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct AmplitudeJson {
    occ: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    modes: usize,
    cap: u32,
    amplitudes: Vec<AmplitudeJson>,
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    weight: f64,
    amplitudes: Vec<AmplitudeJson>,
}

#[derive(Serialize, Deserialize)]
struct MixedJson {
    modes: usize,
    cap: u32,
    components: Vec<ComponentJson>,
}

fn amplitudes_json(state: &FockState) -> Vec<AmplitudeJson> {
    state
        .terms()
        .map(|(occ, a)| AmplitudeJson {
            occ: occ.counts().to_vec(),
            re: a.re,
            im: a.im,
        })
        .collect()
}

fn state_from_json(space: &FockSpace, amps: Vec<AmplitudeJson>) -> Result<FockState> {
    FockState::from_terms(
        space,
        amps.into_iter()
            .map(|a| (OccupationVector(a.occ), Complex64::new(a.re, a.im))),
    )
}

impl Serialize for FockState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            modes: self.modes(),
            cap: self.space.cap(),
            amplitudes: amplitudes_json(self),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(deserializer)?;
        let space = FockSpace::new(raw.modes, raw.cap).map_err(serde::de::Error::custom)?;
        state_from_json(&space, raw.amplitudes).map_err(serde::de::Error::custom)
    }
}

impl Serialize for MixedState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MixedJson {
            modes: self.modes(),
            cap: self.space().cap(),
            components: self
                .components
                .iter()
                .map(|(w, s)| ComponentJson {
                    weight: *w,
                    amplitudes: amplitudes_json(s),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixedState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MixedJson::deserialize(deserializer)?;
        let space = FockSpace::new(raw.modes, raw.cap).map_err(serde::de::Error::custom)?;
        let components = raw
            .components
            .into_iter()
            .map(|c| Ok((c.weight, state_from_json(&space, c.amplitudes)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        MixedState::new(components).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::from(v)
    }

    fn w3() -> FockState {
        let s = FockSpace::new(3, 2).unwrap();
        let a = c(1.0 / 3f64.sqrt());
        FockState::single_excitation(&s, &[a, a, a]).unwrap()
    }

    #[test]
    fn basis_order_is_total_then_lexicographic() {
        let s = FockSpace::new(2, 2).unwrap();
        let got: Vec<_> = s.basis().iter().map(|o| o.counts().to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(FockSpace::new(10, 2).unwrap().dim(), 66);
    }

    #[test]
    fn make_basis_state() {
        let s = FockSpace::new(3, 2).unwrap();
        let k = FockState::basis(&s, &occ(&[1, 0, 0])).unwrap();
        assert_eq!(k.amplitude(&occ(&[1, 0, 0])), c(1.0));
        assert_eq!(k.terms().count(), 1);

        let s2 = FockSpace::new(2, 2).unwrap();
        let vac = FockState::basis(&s2, &occ(&[0, 0])).unwrap();
        assert_eq!(vac, FockState::vacuum(&s2));

        assert_eq!(
            FockState::basis(&s2, &occ(&[2, 1])).unwrap_err(),
            FockError::CapExceeded { total: 3, cap: 2 }
        );
        assert!(matches!(
            FockState::basis(&s2, &occ(&[1, 0, 0])),
            Err(FockError::ModeCount { expected: 2, got: 3 })
        ));
        assert!(FockSpace::new(0, 2).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let s = FockSpace::new(3, 2).unwrap();
        let a = FockState::basis(&s, &occ(&[1, 0, 0])).unwrap();
        let b = FockState::basis(&s, &occ(&[0, 1, 0])).unwrap();
        assert_eq!(a.inner(&b).unwrap(), c(0.0));

        let wa = FockState::single_excitation(&s, &[c(0.5), c(0.5), c(0.5f64.sqrt())]).unwrap();
        let ip = w3().inner(&wa).unwrap();
        assert_abs_diff_eq!(ip.re, (1.0 + 0.5f64.sqrt()) / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ip.re, 0.985_598_56, epsilon = 1e-8);
        // |.|² reconciles with 12 - 8√2 = (2/3) / |⟨W_s|W_a⟩|²
        assert_abs_diff_eq!((2.0 / 3.0) / ip.norm_sqr(), 12.0 - 8.0 * 2f64.sqrt(), epsilon = 1e-14);

        assert_abs_diff_eq!(wa.inner(&wa).unwrap().re, 1.0, epsilon = 1e-15);

        let other = FockSpace::new(3, 1).unwrap();
        assert!(matches!(
            a.inner(&FockState::vacuum(&other)),
            Err(FockError::SpaceMismatch(..))
        ));
    }

    #[test]
    fn tensor_product_examples() {
        let s1 = FockSpace::new(1, 2).unwrap();
        let s2 = FockSpace::new(2, 2).unwrap();
        let one = FockState::basis(&s1, &occ(&[1])).unwrap();
        let t = one.tensor(&FockState::vacuum(&s2)).unwrap();
        assert_eq!(t.modes(), 3);
        assert_eq!(t.amplitude(&occ(&[1, 0, 0])), c(1.0));
        assert_eq!(t.terms().count(), 1);

        let th = 0.3f64;
        let a = FockState::from_terms(&s1, [(occ(&[0]), c(th.cos())), (occ(&[1]), c(th.sin()))]).unwrap();
        let t = a.tensor(&FockState::vacuum(&s1)).unwrap();
        assert_eq!(t.amplitude(&occ(&[0, 0])), c(th.cos()));
        assert_eq!(t.amplitude(&occ(&[1, 0])), c(th.sin()));

        let h = c(0.5f64.sqrt());
        let w2 = FockState::single_excitation(&s2, &[h, h]).unwrap();
        let t = w2.tensor(&w2).unwrap();
        assert_eq!(t.modes(), 4);
        let terms: Vec<_> = t.terms().collect();
        assert_eq!(terms.len(), 4);
        for (o, amp) in terms {
            assert_eq!(o.total(), 2);
            assert_abs_diff_eq!(amp.re, 0.5, epsilon = 1e-15);
        }

        let two = FockState::basis(&s1, &occ(&[2])).unwrap();
        assert!(matches!(two.tensor(&one), Err(FockError::CapExceeded { total: 3, cap: 2 })));
    }

    #[test]
    fn fidelity_examples() {
        let s = FockSpace::new(3, 2).unwrap();
        let rho = MixedState::new(vec![(0.8, w3()), (0.2, FockState::vacuum(&s))]).unwrap();
        assert_abs_diff_eq!(rho.fidelity_to_pure(&w3()).unwrap(), 0.8, epsilon = 1e-15);

        let pure = MixedState::pure(w3()).unwrap();
        assert_abs_diff_eq!(pure.fidelity_to_pure(&w3()).unwrap(), 1.0, epsilon = 1e-15);

        // biseparable mixture of Bell pairs with the third mode empty
        let h = c(0.5f64.sqrt());
        let bell = |i: usize, j: usize| {
            FockState::from_terms(&s, [(OccupationVector::single(3, i), h), (OccupationVector::single(3, j), h)]).unwrap()
        };
        let third = 1.0 / 3.0;
        let rho123 = MixedState::new(vec![(third, bell(0, 1)), (third, bell(1, 2)), (third, bell(2, 0))]).unwrap();
        assert_abs_diff_eq!(rho123.fidelity_to_pure(&w3()).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn photon_number_distribution_examples() {
        let s = FockSpace::new(2, 2).unwrap();
        let k = FockState::basis(&s, &occ(&[1, 0])).unwrap();
        let d = MixedState::pure(k).unwrap().photon_number_distribution();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(&occ(&[1, 0]), 1.0)]);

        let d = MixedState::pure(w3()).unwrap().photon_number_distribution();
        for i in 0..3 {
            assert_abs_diff_eq!(d.get(&OccupationVector::single(3, i)), 1.0 / 3.0, epsilon = 1e-15);
        }

        let h = 0.5f64.sqrt();
        let hom = FockState::from_terms(&s, [(occ(&[2, 0]), c(-h)), (occ(&[0, 2]), c(h))]).unwrap();
        let d = MixedState::pure(hom).unwrap().photon_number_distribution();
        assert_abs_diff_eq!(d.get(&occ(&[2, 0])), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(&occ(&[0, 2])), 0.5, epsilon = 1e-15);
        assert_eq!(d.get(&occ(&[1, 1])), 0.0);
    }

    #[test]
    fn mixture_validation() {
        let s = FockSpace::new(2, 2).unwrap();
        let v = FockState::vacuum(&s);
        assert!(MixedState::new(vec![]).is_err());
        assert!(MixedState::new(vec![(0.5, v.clone())]).is_err());
        assert!(MixedState::new(vec![(1.5, v.clone()), (-0.5, v.clone())]).is_err());
        let unnormalized = v.clone().scaled(c(2.0));
        assert!(matches!(MixedState::pure(unnormalized.clone()), Err(FockError::NotNormalized(_))));
        assert!(MixedState::pure(unnormalized.renormalized().unwrap()).is_ok());
        assert_eq!(FockState::zero(&s).renormalized().unwrap_err(), FockError::ZeroNorm);
        let other = FockState::vacuum(&FockSpace::new(3, 2).unwrap());
        assert!(MixedState::new(vec![(0.5, v), (0.5, other)]).is_err());
    }

    #[test]
    fn permute_modes_moves_photons() {
        let s = FockSpace::new(3, 2).unwrap();
        let k = FockState::basis(&s, &occ(&[2, 0, 0])).unwrap();
        let p = k.permute_modes(&[1, 2, 0]).unwrap();
        assert_eq!(p.amplitude(&occ(&[0, 0, 2])), c(1.0));
        assert!(k.permute_modes(&[0, 0, 1]).is_err());
        assert!(k.permute_modes(&[0, 1]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = FockSpace::new(3, 2).unwrap();
        let rho = MixedState::new(vec![(0.75, w3()), (0.25, FockState::vacuum(&s))]).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.starts_with(r#"{"modes":3,"cap":2,"components":[{"weight":0.75"#));
        let back: MixedState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);

        let text = serde_json::to_string(&w3()).unwrap();
        let back: FockState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w3());
        assert!(serde_json::from_str::<FockState>(r#"{"modes":2,"cap":2,"amplitudes":[{"occ":[2,1],"re":1,"im":0}]}"#).is_err());
    }

    fn arb_state(modes: usize) -> impl Strategy<Value = FockState> {
        let dim = FockSpace::new(modes, 2).unwrap().dim();
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(move |v| {
                let s = FockSpace::new(modes, 2).unwrap();
                let amps = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                FockState::from_dense(&s, amps).unwrap().renormalized().unwrap()
            })
    }

    proptest! {
        #[test]
        fn inner_is_conjugate_symmetric(a in arb_state(3), b in arb_state(3)) {
            let ab = a.inner(&b).unwrap();
            let ba = b.inner(&a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-14);
        }

        #[test]
        fn distribution_sums_to_one(a in arb_state(3), b in arb_state(3), w in 0.0f64..1.0) {
            let rho = MixedState::new(vec![(w, a), (1.0 - w, b)]).unwrap();
            prop_assert!((rho.photon_number_distribution().total() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn fidelity_is_linear_in_weights(a in arb_state(2), b in arb_state(2), psi in arb_state(2), w in 0.0f64..1.0) {
            let mix = MixedState::new(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
            let fa = MixedState::pure(a).unwrap().fidelity_to_pure(&psi).unwrap();
            let fb = MixedState::pure(b).unwrap().fidelity_to_pure(&psi).unwrap();
            prop_assert!((mix.fidelity_to_pure(&psi).unwrap() - (w * fa + (1.0 - w) * fb)).abs() < 1e-14);
        }

        #[test]
        fn tensor_factorizes_inner_products(
            a in arb_state(1), b in arb_state(2), x in arb_state(1), y in arb_state(2)
        ) {
            // cap 4 so that every cross term of two cap-2 factors fits
            let ab = a.tensor_with_cap(&b, 4).unwrap();
            let xy = x.tensor_with_cap(&y, 4).unwrap();
            let lhs = ab.inner(&xy).unwrap();
            let rhs = a.inner(&x).unwrap() * b.inner(&y).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-14);
        }
    }
}
