//! Simulated experiments: imperfect single-photon source, synthesis and
//! disentangling networks, lossy photodetection and witness verdicts.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockError, FockSpace, FockState, MixedState, OccupationVector, DEFAULT_CAP};
use crate::optics::{local_phase_layer, synthesize_w_network, Network, OpticsError, WStateSpec};
use crate::simplex::NelderMead;
use crate::witness::{
    alpha_w, reference_ratio, validate_beta, AnsatzSearch, IdentityTerm, ModifiedWitness, WitnessError,
    WitnessReport, DEFAULT_ENUMERATION_BOUND,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("experiment: {name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("experiment: dark counts are not modeled")]
    DarkCounts,
    #[error("experiment: click pattern has {got} modes, state has {expected}")]
    PatternModes { expected: usize, got: usize },
    #[error("experiment: click/no-click detection only reports 0 or 1 per mode, got {0}")]
    ThresholdPattern(OccupationVector),
    #[error("experiment: the modified scheme needs N >= 3 modes, got {0}")]
    TooFewModes(usize),
    #[error("experiment: invalid mode range {min}..={max} (need 3 <= min <= max <= {bound})")]
    ModeRange { min: usize, max: usize, bound: usize },
    #[error("experiment: phase scan needs at least 2 grid points, got {0}")]
    Grid(usize),
    #[error("experiment: shot sampling needs at least one shot")]
    NoShots,
    #[error("experiment: {0}")]
    Config(String),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

fn probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ExperimentError::NotProbability { name, value })
    }
}

/// Heralded single-photon source firing with probability `p_success`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceModel {
    p_success: f64,
}

impl SourceModel {
    pub fn new(p_success: f64) -> Result<Self> {
        Ok(Self {
            p_success: probability("p_success", p_success)?,
        })
    }

    pub fn p_success(&self) -> f64 {
        self.p_success
    }
}

/// Photodetectors with a common per-photon efficiency.
///
/// Loss is independent Bernoulli thinning of each photon ahead of ideal
/// detection. Without number resolution a detector only reports click or
/// no click.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    efficiency: f64,
    number_resolving: bool,
    dark_counts: bool,
}

impl DetectorModel {
    pub fn new(efficiency: f64) -> Result<Self> {
        Ok(Self {
            efficiency: probability("efficiency", efficiency)?,
            number_resolving: true,
            dark_counts: false,
        })
    }

    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            number_resolving: true,
            dark_counts: false,
        }
    }

    pub fn with_number_resolving(mut self, number_resolving: bool) -> Self {
        self.number_resolving = number_resolving;
        self
    }

    /// Reserved; any model with dark counts is rejected when used.
    pub fn with_dark_counts(mut self, dark_counts: bool) -> Self {
        self.dark_counts = dark_counts;
        self
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn number_resolving(&self) -> bool {
        self.number_resolving
    }

    fn check(&self) -> Result<()> {
        if self.dark_counts {
            return Err(ExperimentError::DarkCounts);
        }
        Ok(())
    }

    // P(pattern m | n photons arrive), per mode product.
    fn conditional(&self, arrived: &[u32], pattern: &[u32]) -> f64 {
        let eta = self.efficiency;
        arrived
            .iter()
            .zip(pattern)
            .map(|(&n, &m)| {
                let lost = (1.0 - eta).powi(n as i32);
                if self.number_resolving {
                    if m > n {
                        0.0
                    } else {
                        binomial(n, m) * eta.powi(m as i32) * (1.0 - eta).powi((n - m) as i32)
                    }
                } else if m == 0 {
                    lost
                } else {
                    1.0 - lost
                }
            })
            .product()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `ρ = p_S |W⟩⟨W| + (1 − p_S) |0⟩⟨0|`.
pub fn prepare_mixed_w(spec: &WStateSpec, src: &SourceModel) -> Result<MixedState> {
    prepare_mixed_w_in(spec, src, &FockSpace::new(spec.modes(), DEFAULT_CAP)?)
}

pub fn prepare_mixed_w_in(spec: &WStateSpec, src: &SourceModel, space: &FockSpace) -> Result<MixedState> {
    let p = src.p_success();
    Ok(MixedState::new(vec![
        (p, spec.to_state_in(space)?),
        (1.0 - p, FockState::vacuum(space)),
    ])?)
}

/// Probability that the detectors report `pattern`.
pub fn click_pattern_probability(rho: &MixedState, det: &DetectorModel, pattern: &OccupationVector) -> Result<f64> {
    det.check()?;
    if pattern.modes() != rho.modes() {
        return Err(ExperimentError::PatternModes {
            expected: rho.modes(),
            got: pattern.modes(),
        });
    }
    if !det.number_resolving() && pattern.counts().iter().any(|&m| m > 1) {
        return Err(ExperimentError::ThresholdPattern(pattern.clone()));
    }
    Ok(rho
        .photon_number_distribution()
        .support()
        .map(|(n, p)| p * det.conditional(n.counts(), pattern.counts()))
        .sum())
}

/// Outcomes below this probability are roundoff from interference and are
/// left out of click distributions.
pub const CLICK_FLOOR: f64 = 1e-15;

/// Every detector outcome with probability above [`CLICK_FLOOR`], ordered
/// by total count and then lexicographically.
pub fn click_distribution(rho: &MixedState, det: &DetectorModel) -> Result<Vec<(OccupationVector, f64)>> {
    det.check()?;
    let mut out: Vec<(OccupationVector, f64)> = Vec::new();
    let mut index: std::collections::HashMap<OccupationVector, usize> = std::collections::HashMap::new();
    for (n, p) in rho.photon_number_distribution().support() {
        for m in sub_patterns(n.counts(), det.number_resolving()) {
            let q = p * det.conditional(n.counts(), &m);
            if q == 0.0 {
                continue;
            }
            let key = OccupationVector::new(m);
            match index.get(&key) {
                Some(&i) => out[i].1 += q,
                None => {
                    index.insert(key.clone(), out.len());
                    out.push((key, q));
                }
            }
        }
    }
    out.retain(|(_, p)| *p > CLICK_FLOOR);
    out.sort_by(|a, b| a.0.total().cmp(&b.0.total()).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

// All m with m_i <= n_i (or m_i <= min(n_i, 1) for click detectors).
fn sub_patterns(n: &[u32], resolving: bool) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(n.len())];
    for &ni in n {
        let top = if resolving { ni } else { ni.min(1) };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=top).map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m);
                    p
                })
            })
            .collect();
    }
    out
}

/// Draws `shots` detector outcomes from a click distribution and returns
/// the empirical frequencies.
pub fn sample_clicks(
    dist: &[(OccupationVector, f64)],
    shots: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(OccupationVector, f64)>> {
    if shots == 0 {
        return Err(ExperimentError::NoShots);
    }
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    let mut counts = vec![0usize; dist.len()];
    for _ in 0..shots {
        let mut u = rng.random::<f64>() * total;
        let mut pick = dist.len() - 1;
        for (i, (_, p)) in dist.iter().enumerate() {
            if u < *p {
                pick = i;
                break;
            }
            u -= p;
        }
        counts[pick] += 1;
    }
    Ok(dist
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|((o, _), c)| (o.clone(), c as f64 / shots as f64))
        .collect())
}

/// One detection configuration.
///
/// The input modes are first wired in the order given by `routing`
/// (position `p` receives input mode `routing[p]`), then pass through
/// `network`, and the setting accepts when the detectors read
/// `accept_pattern`. Passthrough modes bypass the network and are listed by
/// their input index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub label: String,
    pub routing: Vec<usize>,
    pub network: Network,
    pub accept_pattern: OccupationVector,
    pub passthrough_modes: Vec<usize>,
}

impl MeasurementSetting {
    /// Disentangler for a single-setting scheme with the given reference.
    pub fn disentangler(label: impl Into<String>, reference: &WStateSpec) -> Result<Self> {
        let n = reference.modes();
        Ok(Self {
            label: label.into(),
            routing: (0..n).collect(),
            network: synthesize_w_network(reference)?.inverse(),
            accept_pattern: OccupationVector::single(n, 0),
            passthrough_modes: Vec::new(),
        })
    }

    /// State in front of the detectors.
    pub fn output_state(&self, rho: &MixedState) -> Result<MixedState> {
        let routed = rho.try_map(|s| s.permute_modes(&self.routing))?;
        Ok(self.network.apply_mixed(&routed)?)
    }

    pub fn accept_probability(&self, rho: &MixedState, det: &DetectorModel) -> Result<f64> {
        click_pattern_probability(&self.output_state(rho)?, det, &self.accept_pattern)
    }

    pub fn measure(&self, rho: &MixedState, det: &DetectorModel, estimation: &Estimation, index: u64) -> Result<SettingOutcome> {
        let out = self.output_state(rho)?;
        let exact = click_distribution(&out, det)?;
        let clicks = match *estimation {
            Estimation::Exact => exact,
            Estimation::Shots { shots, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
                sample_clicks(&exact, shots, &mut rng)?
            }
        };
        let accept_probability = clicks
            .iter()
            .find(|(o, _)| *o == self.accept_pattern)
            .map_or(0.0, |(_, p)| *p);
        Ok(SettingOutcome {
            label: self.label.clone(),
            accept_pattern: self.accept_pattern.clone(),
            accept_probability,
            clicks: clicks
                .into_iter()
                .map(|(pattern, probability)| ClickProbability { pattern, probability })
                .collect(),
        })
    }
}

/// The `N + 1` settings of the modified scheme.
///
/// Setting 0 disentangles the symmetric `W_N` and accepts one photon in
/// the first detector. Setting `i + 1` sends mode `i` straight to its
/// detector and the other modes, in ascending order, through the inverse
/// `W_{N−1}` cascade; it accepts one photon at the first of those modes and
/// none anywhere else.
pub fn settings_plan_modified(n: usize) -> Result<Vec<MeasurementSetting>> {
    if n < 3 {
        return Err(ExperimentError::TooFewModes(n));
    }
    let mut plan = vec![MeasurementSetting::disentangler("W", &WStateSpec::symmetric(n))?];
    let sub = synthesize_w_network(&WStateSpec::symmetric(n - 1))?.inverse();
    let network = Network::new(n, sub.elements().to_vec())?;
    for i in 0..n {
        let mut routing: Vec<usize> = (0..n).filter(|&m| m != i).collect();
        routing.push(i);
        plan.push(MeasurementSetting {
            label: format!("BS{}", i + 1),
            routing,
            network: network.clone(),
            accept_pattern: OccupationVector::single(n, 0),
            passthrough_modes: vec![i],
        });
    }
    Ok(plan)
}

/// Exact probabilities, or empirical frequencies from seeded shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Estimation {
    #[default]
    Exact,
    Shots { shots: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SchemeOptions {
    pub estimation: Estimation,
    pub search: AnsatzSearch,
    pub identity: IdentityTerm,
    /// Estimate `tr{ρI₂}` from detected counts in setting 0 instead of the
    /// lossless photon distribution. Losses only lower counts, so this
    /// overestimates it.
    pub lossy_identity_estimate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Detected,
    NotDetected,
}

impl Verdict {
    /// Strictly negative witness values certify entanglement; values within
    /// `VERDICT_TOL` of zero count as a tie.
    pub fn from_value(value: f64) -> Self {
        if value < -VERDICT_TOL {
            Self::Detected
        } else {
            Self::NotDetected
        }
    }

    pub fn is_detected(&self) -> bool {
        matches!(self, Self::Detected)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Detected => "detected",
            Self::NotDetected => "not detected",
        })
    }
}

pub const VERDICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Single,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClickProbability {
    pub pattern: OccupationVector,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingOutcome {
    pub label: String,
    pub accept_pattern: OccupationVector,
    pub accept_probability: f64,
    pub clicks: Vec<ClickProbability>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub modes: usize,
    pub efficiency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub number_resolving: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityEstimates {
    pub w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_weight: Option<f64>,
}

/// Outcome of one simulated run of either scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scheme: Scheme,
    pub parameters: Parameters,
    pub settings: Vec<SettingOutcome>,
    pub fidelities: FidelityEstimates,
    pub witness: WitnessReport,
    pub witness_value: f64,
    /// Overall efficiency `ηp_S` the run must exceed (`α′/|⟨W|W′⟩|²` or `e_c`),
    /// known when the state came from a source model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall_efficiency: Option<f64>,
    pub verdict: Verdict,
}

/// Single-setting scheme on an arbitrary state: disentangle with the
/// inverse of `reference`'s synthesis network and read `P_{10…0}`.
pub fn run_single_setting_on(
    rho: &MixedState,
    det: &DetectorModel,
    reference: &WStateSpec,
    options: &SchemeOptions,
) -> Result<ExperimentReport> {
    if reference.modes() != rho.modes() {
        return Err(ExperimentError::PatternModes {
            expected: rho.modes(),
            got: reference.modes(),
        });
    }
    let setting = MeasurementSetting::disentangler("W", reference)?;
    let outcome = setting.measure(rho, det, &options.estimation, 0)?;
    let alpha = alpha_w(reference);
    let fidelity = outcome.accept_probability;
    let value = alpha - fidelity;
    Ok(ExperimentReport {
        scheme: Scheme::Single,
        parameters: Parameters {
            modes: rho.modes(),
            efficiency: det.efficiency(),
            p_success: None,
            beta: None,
            number_resolving: det.number_resolving(),
        },
        settings: vec![outcome],
        fidelities: FidelityEstimates {
            w: fidelity,
            bs: None,
            identity_weight: None,
        },
        witness: crate::witness::WitnessReport {
            kind: crate::witness::WitnessKind::Basic,
            alpha,
            beta: None,
            ansatz: None,
            optimizer: None,
        },
        witness_value: value,
        threshold: None,
        overall_efficiency: None,
        verdict: Verdict::from_value(value),
    })
}

/// Single-setting scheme on the lossy W state produced by `src`.
pub fn run_single_setting_scheme(
    spec: &WStateSpec,
    src: &SourceModel,
    det: &DetectorModel,
    reference: &WStateSpec,
    options: &SchemeOptions,
) -> Result<ExperimentReport> {
    let threshold = reference_ratio(spec, reference)?;
    let rho = prepare_mixed_w(spec, src)?;
    let mut report = run_single_setting_on(&rho, det, reference, options)?;
    report.parameters.p_success = Some(src.p_success());
    report.threshold = Some(threshold);
    report.overall_efficiency = Some(det.efficiency() * src.p_success());
    Ok(report)
}

/// Modified scheme on an arbitrary `N`-mode state.
pub fn run_modified_on(
    rho: &MixedState,
    det: &DetectorModel,
    beta: f64,
    options: &SchemeOptions,
) -> Result<ExperimentReport> {
    let n = rho.modes();
    if n < 3 {
        return Err(ExperimentError::TooFewModes(n));
    }
    validate_beta(n, beta)?;
    let witness = ModifiedWitness::new(n, beta, &options.search)?.with_identity(options.identity);
    run_modified_with(rho, det, &witness, options)
}

/// Modified scheme with a precomputed witness.
pub fn run_modified_with(
    rho: &MixedState,
    det: &DetectorModel,
    witness: &ModifiedWitness,
    options: &SchemeOptions,
) -> Result<ExperimentReport> {
    let n = rho.modes();
    if witness.modes() != n {
        return Err(ExperimentError::PatternModes {
            expected: n,
            got: witness.modes(),
        });
    }
    let plan = settings_plan_modified(n)?;
    let outcomes = plan
        .iter()
        .enumerate()
        .map(|(i, s)| s.measure(rho, det, &options.estimation, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let identity_weight = match witness.identity() {
        IdentityTerm::Full => 1.0,
        IdentityTerm::UpToTwoQuanta if options.lossy_identity_estimate => outcomes[0]
            .clicks
            .iter()
            .filter(|c| c.pattern.total() <= 2)
            .map(|c| c.probability)
            .sum(),
        IdentityTerm::UpToTwoQuanta => rho.photon_number_distribution().total_at_most(2),
    };
    let fidelity_w = outcomes[0].accept_probability;
    let fidelities_bs: Vec<f64> = outcomes[1..].iter().map(|o| o.accept_probability).collect();
    let value = witness.combine(identity_weight, fidelity_w, &fidelities_bs);
    Ok(ExperimentReport {
        scheme: Scheme::Modified,
        parameters: Parameters {
            modes: n,
            efficiency: det.efficiency(),
            p_success: None,
            beta: Some(witness.beta()),
            number_resolving: det.number_resolving(),
        },
        settings: outcomes,
        fidelities: FidelityEstimates {
            w: fidelity_w,
            bs: Some(fidelities_bs),
            identity_weight: Some(identity_weight),
        },
        witness: witness.report(),
        witness_value: value,
        threshold: None,
        overall_efficiency: None,
        verdict: Verdict::from_value(value),
    })
}

/// Modified scheme on the lossy W state produced by `src`; the witness
/// reference is always the symmetric `W_N`.
pub fn run_modified_scheme(
    spec: &WStateSpec,
    src: &SourceModel,
    det: &DetectorModel,
    beta: f64,
    options: &SchemeOptions,
) -> Result<ExperimentReport> {
    let rho = prepare_mixed_w(spec, src)?;
    let mut report = run_modified_on(&rho, det, beta, options)?;
    let n = spec.modes();
    report.parameters.p_success = Some(src.p_success());
    report.threshold = Some(crate::witness::critical_efficiency_from_alpha(n, beta, report.witness.alpha));
    report.overall_efficiency = Some(det.efficiency() * src.p_success());
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseScanOptions {
    /// Grid points per scanned mode on `[0, 2π)`.
    pub grid: usize,
    /// Polish the best grid point with a simplex search.
    pub refine: bool,
}

impl Default for PhaseScanOptions {
    fn default() -> Self {
        Self { grid: 24, refine: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseScan {
    /// Compensating phase per mode; mode 0 stays at zero.
    pub phases: Vec<f64>,
    pub fidelity: f64,
    /// Accept probability with no compensation.
    pub uncompensated: f64,
    pub evaluations: usize,
}

/// Scans a local phase layer in front of the disentangler for `reference`
/// and keeps the compensation maximizing the accept probability.
///
/// The grid has `grid^(N−1)` points, so exhaustive scans are practical up
/// to about six modes.
pub fn phase_scan(
    rho: &MixedState,
    reference: &WStateSpec,
    det: &DetectorModel,
    options: &PhaseScanOptions,
) -> Result<PhaseScan> {
    if options.grid < 2 {
        return Err(ExperimentError::Grid(options.grid));
    }
    let n = rho.modes();
    if reference.modes() != n {
        return Err(ExperimentError::PatternModes {
            expected: n,
            got: reference.modes(),
        });
    }
    let disentangler = synthesize_w_network(reference)?.inverse();
    let accept = OccupationVector::single(n, 0);
    let evaluate = |phases: &[f64]| -> Result<f64> {
        let net = local_phase_layer(phases)?.then(&disentangler)?;
        click_pattern_probability(&net.apply_mixed(rho)?, det, &accept)
    };

    let uncompensated = evaluate(&vec![0.0; n])?;
    let step = TAU / options.grid as f64;
    let mut index = vec![0usize; n.saturating_sub(1)];
    let mut best = (vec![0.0; n], uncompensated);
    let mut evaluations = 1;
    loop {
        let mut phases = vec![0.0; n];
        for (p, &i) in phases[1..].iter_mut().zip(&index) {
            *p = i as f64 * step;
        }
        let f = evaluate(&phases)?;
        evaluations += 1;
        if f > best.1 {
            best = (phases, f);
        }
        // odometer increment
        let mut d = 0;
        while d < index.len() {
            index[d] += 1;
            if index[d] < options.grid {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == index.len() {
            break;
        }
    }

    if options.refine && n > 1 {
        let nm = NelderMead {
            initial_step: step / 2.0,
            ..NelderMead::default()
        };
        let mut failure = None;
        let m = nm.minimize(
            |x| {
                let mut phases = vec![0.0];
                phases.extend_from_slice(x);
                match evaluate(&phases) {
                    Ok(v) => -v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                }
            },
            &best.0[1..],
        );
        if let Some(e) = failure {
            return Err(e);
        }
        evaluations += m.evals;
        if -m.value > best.1 {
            let mut phases = vec![0.0];
            phases.extend(m.x.iter().map(|p| p.rem_euclid(TAU)));
            best = (phases, -m.value);
        }
    }

    Ok(PhaseScan {
        phases: best.0,
        fidelity: best.1,
        uncompensated,
        evaluations,
    })
}

/// How `β` is chosen for each `N` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    /// `(N−1)β = 1 − gap`.
    NearOne { gap: f64 },
    Fixed(f64),
}

impl Default for BetaRule {
    fn default() -> Self {
        Self::NearOne { gap: 1e-3 }
    }
}

impl BetaRule {
    pub fn beta(&self, n: usize) -> f64 {
        match *self {
            Self::NearOne { gap } => (1.0 - gap) / (n - 1) as f64,
            Self::Fixed(beta) => beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub e_c: f64,
    pub baseline: f64,
}

/// Critical efficiency of the modified scheme next to the single-setting
/// baseline `1 − 1/N` for every `N` in range. Rows are computed in
/// parallel and returned in ascending `N`.
pub fn sweep_critical_efficiency(
    n_min: usize,
    n_max: usize,
    rule: BetaRule,
    search: &AnsatzSearch,
) -> Result<Vec<SweepRow>> {
    if !(3 <= n_min && n_min <= n_max && n_max <= DEFAULT_ENUMERATION_BOUND) {
        return Err(ExperimentError::ModeRange {
            min: n_min,
            max: n_max,
            bound: DEFAULT_ENUMERATION_BOUND,
        });
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let beta = rule.beta(n);
            let a = crate::witness::alpha_modified(n, beta, search)?;
            Ok(SweepRow {
                n,
                beta,
                alpha: a.alpha,
                e_c: crate::witness::critical_efficiency_from_alpha(n, beta, a.alpha),
                baseline: 1.0 - 1.0 / n as f64,
            })
        })
        .collect()
}

/// Input file for a simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: WStateSpec,
    pub p_success: f64,
    pub efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<WStateSpec>,
}

impl ExperimentConfig {
    pub fn run(&self, det: DetectorModel, options: &SchemeOptions) -> Result<ExperimentReport> {
        let src = SourceModel::new(self.p_success)?;
        let det = DetectorModel::new(self.efficiency)?.with_number_resolving(det.number_resolving());
        match self.scheme {
            Scheme::Single => {
                let reference = self.reference.as_ref().unwrap_or(&self.spec);
                run_single_setting_scheme(&self.spec, &src, &det, reference, options)
            }
            Scheme::Modified => {
                let beta = self
                    .beta
                    .ok_or_else(|| ExperimentError::Config("the modified scheme needs beta".into()))?;
                run_modified_scheme(&self.spec, &src, &det, beta, options)
            }
        }
    }
}
