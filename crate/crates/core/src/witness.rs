//! Witness constants and expectation values for W-class targets.
//!
//! Two witnesses are supported:
//!
//! * the basic projector witness `α·I − |Ψ⟩⟨Ψ|`, with `α` the largest
//!   squared overlap of `|Ψ⟩` with a biseparable pure state;
//! * the modified witness `α·I₂ − Q` with
//!   `Q = |W_N⟩⟨W_N| − β Σ_i |BS_i⟩⟨BS_i|`, where `BS_i` is the symmetric
//!   `W_{N−1}` on every mode but `i` and `α` maximizes `⟨Q⟩` over a
//!   biseparable ansatz.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{FockError, FockSpace, FockState, MixedState, OccupationVector};
use crate::optics::{OpticsError, WStateSpec};
use crate::simplex::NelderMead;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error("witness: {modes} modes exceed the bipartition enumeration bound {bound}")]
    TooManyModes { modes: usize, bound: usize },
    #[error("witness: a bipartition needs at least two modes")]
    TooFewModes,
    #[error("witness: zero overlap between target and reference")]
    ZeroOverlap,
    #[error("witness: mode index {index} out of range for {modes} modes")]
    ModeIndex { index: usize, modes: usize },
    #[error("witness: invalid beta {beta} for {modes} modes (need beta >= 0 and (N-1)*beta < 1)")]
    InvalidBeta { beta: f64, modes: usize },
    #[error("witness: the modified witness needs N >= 3 modes, got {0}")]
    ModifiedModes(usize),
    #[error("witness: state has {got} modes, witness expects {expected}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("witness: alpha {0} is outside [0, 1]")]
    InvalidAlpha(f64),
}

pub type Result<T, E = WitnessError> = std::result::Result<T, E>;

pub const DEFAULT_ENUMERATION_BOUND: usize = 15;

/// `α = 1 − min_i |c̃_i|²`.
pub fn alpha_w(spec: &WStateSpec) -> f64 {
    let min = spec
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    1.0 - min
}

/// A bipartition and the largest Schmidt coefficient across it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtSplit {
    /// `true` for modes on the side containing mode 0.
    pub partition: Vec<bool>,
    pub lambda_max: f64,
}

/// `α` of a pure state as the squared largest Schmidt coefficient over all
/// bipartitions of its modes.
pub fn max_schmidt_alpha(psi: &FockState) -> Result<(f64, SchmidtSplit)> {
    max_schmidt_alpha_bounded(psi, DEFAULT_ENUMERATION_BOUND)
}

pub fn max_schmidt_alpha_bounded(psi: &FockState, bound: usize) -> Result<(f64, SchmidtSplit)> {
    let n = psi.modes();
    if n > bound {
        return Err(WitnessError::TooManyModes { modes: n, bound });
    }
    if n < 2 {
        return Err(WitnessError::TooFewModes);
    }
    psi.ensure_normalized()?;
    let mut best: Option<SchmidtSplit> = None;
    // mode 0 always sits in the first part; the all-ones mask is the trivial cut
    for mask in 0..(1usize << (n - 1)) - 1 {
        let partition: Vec<bool> = (0..n).map(|m| m == 0 || mask >> (m - 1) & 1 == 1).collect();
        let lambda_max = largest_schmidt_coefficient(psi, &partition);
        if best.as_ref().is_none_or(|b| lambda_max > b.lambda_max) {
            best = Some(SchmidtSplit {
                partition,
                lambda_max,
            });
        }
    }
    let split = best.expect("at least one bipartition");
    Ok(((split.lambda_max * split.lambda_max).min(1.0), split))
}

/// Largest singular value of the coefficient matrix `C_ij` of `psi` across
/// the cut `partition`.
pub fn largest_schmidt_coefficient(psi: &FockState, partition: &[bool]) -> f64 {
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut cols: Vec<Vec<u32>> = Vec::new();
    let mut entries = Vec::new();
    for (occ, amp) in psi.terms() {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (n, &side) in occ.counts().iter().zip(partition) {
            if side {
                left.push(*n);
            } else {
                right.push(*n);
            }
        }
        let r = position_or_push(&mut rows, left);
        let c = position_or_push(&mut cols, right);
        entries.push((r, c, amp));
    }
    if entries.is_empty() {
        return 0.0;
    }
    let mut c = vec![vec![Complex64::new(0.0, 0.0); cols.len()]; rows.len()];
    for (r, col, amp) in entries {
        c[r][col] = amp;
    }
    // Gram matrix on the smaller side
    let gram = if rows.len() <= cols.len() {
        gram(&c)
    } else {
        gram(&transpose_conj(&c))
    };
    hermitian_max_eigenvalue(&gram).max(0.0).sqrt()
}

fn position_or_push(keys: &mut Vec<Vec<u32>>, key: Vec<u32>) -> usize {
    match keys.iter().position(|k| *k == key) {
        Some(i) => i,
        None => {
            keys.push(key);
            keys.len() - 1
        }
    }
}

fn transpose_conj(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let cols = m[0].len();
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].conj()).collect())
        .collect()
}

// M·M†
fn gram(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    m.iter()
        .map(|a| {
            m.iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y.conj()).sum())
                .collect()
        })
        .collect()
}

const JACOBI_TOL: f64 = 1e-13;

/// Largest eigenvalue of a Hermitian matrix via its real symmetric embedding
/// `[[Re, −Im], [Im, Re]]` and cyclic Jacobi rotations.
pub fn hermitian_max_eigenvalue(h: &[Vec<Complex64>]) -> f64 {
    let n = h.len();
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[i][j];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    symmetric_eigenvalues(a)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// `α·I − |Ψ⟩⟨Ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicWitness {
    alpha: f64,
    reference: FockState,
}

impl BasicWitness {
    pub fn new(alpha: f64, reference: FockState) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(WitnessError::InvalidAlpha(alpha));
        }
        reference.ensure_normalized()?;
        Ok(Self { alpha, reference })
    }

    /// Witness for a W-class target using the closed-form `α`.
    pub fn for_w_state(spec: &WStateSpec, space: &FockSpace) -> Result<Self> {
        Self::new(alpha_w(spec), spec.to_state_in(space)?)
    }

    /// Witness for an arbitrary pure target, `α` from Schmidt maxima.
    pub fn for_state(reference: FockState) -> Result<Self> {
        let (alpha, _) = max_schmidt_alpha(&reference)?;
        Self::new(alpha, reference)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn reference(&self) -> &FockState {
        &self.reference
    }

    /// `tr{ρW} = α − ⟨Ψ|ρ|Ψ⟩`; negative values certify genuine
    /// multipartite entanglement.
    pub fn value(&self, rho: &MixedState) -> Result<f64> {
        Ok(self.alpha - rho.fidelity_to_pure(&self.reference)?)
    }

    pub fn report(&self) -> WitnessReport {
        WitnessReport {
            kind: WitnessKind::Basic,
            alpha: self.alpha,
            beta: None,
            ansatz: None,
            optimizer: None,
        }
    }
}

pub fn basic_witness_value(rho: &MixedState, w: &BasicWitness) -> Result<f64> {
    w.value(rho)
}

/// `α(candidate) / |⟨target|candidate⟩|²`: the overall efficiency a single
/// setting needs when `candidate` is the witness reference.
pub fn reference_ratio(target: &WStateSpec, candidate: &WStateSpec) -> Result<f64> {
    if target.modes() != candidate.modes() {
        return Err(WitnessError::ModeMismatch {
            expected: target.modes(),
            got: candidate.modes(),
        });
    }
    let overlap = target.overlap(candidate).norm_sqr();
    if overlap <= 1e-300 {
        return Err(WitnessError::ZeroOverlap);
    }
    Ok(alpha_w(candidate) / overlap)
}

/// Seed and start count for the randomized multi-start optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OptimizerInfo {
    pub starts: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum {
    pub candidate: WStateSpec,
    pub ratio: f64,
    pub optimizer: OptimizerInfo,
}

pub const DEFAULT_SEED: u64 = 20_070_101;

#[derive(Debug, Clone, Copy)]
pub struct ReferenceSearch {
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for ReferenceSearch {
    fn default() -> Self {
        Self {
            random_starts: 20,
            seed: DEFAULT_SEED,
        }
    }
}

/// Minimizes [`reference_ratio`] over candidates whose squared magnitudes
/// range over the probability simplex and whose phases equal the target's.
///
/// Candidates are parameterized by `x ∈ ℝ^N` with `|c_i| = |x_i| / ‖x‖`.
/// Starts: the symmetric vector, the target's magnitudes, and
/// `random_starts` seeded random points.
pub fn optimize_reference(target: &WStateSpec, search: &ReferenceSearch) -> ReferenceOptimum {
    let n = target.modes();
    let mags: Vec<f64> = target.coeffs().iter().map(|c| c.norm()).collect();
    let phases: Vec<Complex64> = target
        .coeffs()
        .iter()
        .map(|c| if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) })
        .collect();

    let objective = |x: &[f64]| -> f64 {
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        let mut overlap = 0.0;
        let mut min_p = f64::INFINITY;
        for (xi, ti) in x.iter().zip(&mags) {
            let a = xi.abs() / norm;
            overlap += ti * a;
            min_p = min_p.min(a * a);
        }
        if overlap <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 - min_p) / (overlap * overlap)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut starts = vec![vec![1.0; n], mags.clone()];
    for _ in 0..search.random_starts {
        starts.push((0..n).map(|_| rng.random::<f64>() + 1e-3).collect());
    }

    let nm = NelderMead {
        initial_step: 0.2,
        f_tol: 1e-15,
        x_tol: 1e-12,
        max_evals: 40_000,
        restarts: 6,
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = true;
    let n_starts = starts.len();
    for start in starts {
        let m = nm.minimize(objective, &start);
        converged &= m.converged;
        if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (x, ratio) = best.expect("at least one start");
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let coeffs = x
        .iter()
        .zip(&phases)
        .map(|(xi, ph)| ph * (xi.abs() / norm))
        .collect();
    let candidate = WStateSpec::normalized(coeffs)
        .map(|(s, _)| s)
        .expect("nonzero optimizer output");
    ReferenceOptimum {
        candidate,
        ratio,
        optimizer: OptimizerInfo {
            starts: n_starts,
            converged,
            seed: search.seed,
        },
    }
}

/// `|0_i⟩ ⊗ |W_{N−1}⟩`: the symmetric W state on every mode except `i`.
pub fn bs_state(i: usize, space: &FockSpace) -> Result<FockState> {
    let n = space.modes();
    if i >= n || n < 2 {
        return Err(WitnessError::ModeIndex { index: i, modes: n });
    }
    let a = Complex64::new(((n - 1) as f64).sqrt().recip(), 0.0);
    let coeffs: Vec<Complex64> = (0..n)
        .map(|m| if m == i { Complex64::new(0.0, 0.0) } else { a })
        .collect();
    Ok(FockState::single_excitation(space, &coeffs)?)
}

/// `⟨φ|Q|φ⟩` from the single-excitation amplitudes of `φ`; `Q` does not
/// see any other sector.
pub fn q_from_single_excitation(amps: &[Complex64], beta: f64) -> f64 {
    let n = amps.len();
    let total: Complex64 = amps.iter().sum();
    let w = total.norm_sqr() / n as f64;
    let bs: f64 = amps.iter().map(|a| (total - a).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    w - beta * bs
}

/// `|⟨W_N|φ⟩|² − β Σ_i |⟨BS_i|φ⟩|²`.
pub fn q_value(phi: &FockState, beta: f64) -> Result<f64> {
    if phi.modes() < 2 {
        return Err(WitnessError::TooFewModes);
    }
    Ok(q_from_single_excitation(&phi.single_excitation_amplitudes(), beta))
}

/// Product `|a⟩|b⟩` with `|a⟩ = cosθ₁|0⟩_k + sinθ₁|W_k⟩` on the first `k`
/// modes and `|b⟩ = cosθ₂|0⟩_{N−k} + sinθ₂|W_{N−k}⟩` on the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiseparableAnsatz {
    pub k: usize,
    pub theta1: f64,
    pub theta2: f64,
}

impl BiseparableAnsatz {
    /// Closed-form single-excitation amplitudes of the product state.
    pub fn single_excitation_amplitudes(&self, n: usize) -> Vec<Complex64> {
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        let left = s1 * c2 / (self.k as f64).sqrt();
        let right = c1 * s2 / ((n - self.k) as f64).sqrt();
        (0..n)
            .map(|m| Complex64::new(if m < self.k { left } else { right }, 0.0))
            .collect()
    }

    /// The full product state, built by tensoring the two factors.
    pub fn state(&self, n: usize, cap: u32) -> Result<FockState> {
        let factor = |modes: usize, theta: f64| -> Result<FockState> {
            let space = FockSpace::new(modes, 1)?;
            let w = Complex64::new(theta.sin() / (modes as f64).sqrt(), 0.0);
            let mut coeffs = vec![(OccupationVector::vacuum(modes), Complex64::new(theta.cos(), 0.0))];
            coeffs.extend((0..modes).map(|m| (OccupationVector::single(modes, m), w)));
            Ok(FockState::from_terms(&space, coeffs)?)
        };
        let a = factor(self.k, self.theta1)?;
        let b = factor(n - self.k, self.theta2)?;
        Ok(a.tensor_with_cap(&b, cap.max(2))?)
    }

    pub fn q_value(&self, n: usize, beta: f64) -> f64 {
        q_from_single_excitation(&self.single_excitation_amplitudes(n), beta)
    }
}

pub fn validate_beta(n: usize, beta: f64) -> Result<()> {
    if n < 3 {
        return Err(WitnessError::ModifiedModes(n));
    }
    if !(beta.is_finite() && beta >= 0.0 && (n - 1) as f64 * beta < 1.0) {
        return Err(WitnessError::InvalidBeta { beta, modes: n });
    }
    Ok(())
}

/// Grid and multi-start settings for the ansatz maximization.
#[derive(Debug, Clone, Copy)]
pub struct AnsatzSearch {
    /// Points per angle on `[0, π]`.
    pub grid: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for AnsatzSearch {
    fn default() -> Self {
        Self {
            grid: 181,
            random_starts: 4,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedAlpha {
    pub alpha: f64,
    pub ansatz: BiseparableAnsatz,
    pub optimizer: OptimizerInfo,
}

/// `α = max ⟨Q⟩` over the biseparable ansatz: exhaustive over
/// `k ∈ 1..=⌊N/2⌋`, a `grid × grid` scan of `(θ₁, θ₂) ∈ [0, π]²`, then
/// simplex refinement from the best grid cell and from seeded random points.
pub fn alpha_modified(n: usize, beta: f64, search: &AnsatzSearch) -> Result<ModifiedAlpha> {
    validate_beta(n, beta)?;
    let grid = search.grid.max(2);
    let step = PI / (grid - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let nm = NelderMead {
        initial_step: step,
        f_tol: 1e-15,
        x_tol: 1e-11,
        max_evals: 10_000,
        restarts: 4,
    };

    let mut best = BiseparableAnsatz {
        k: 1,
        theta1: 0.0,
        theta2: 0.0,
    };
    let mut best_q = best.q_value(n, beta);
    let mut converged = true;
    let mut starts = 0;
    for k in 1..=n / 2 {
        let q = |t1: f64, t2: f64| {
            BiseparableAnsatz {
                k,
                theta1: t1,
                theta2: t2,
            }
            .q_value(n, beta)
        };
        let mut cell = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..grid {
            for j in 0..grid {
                let (t1, t2) = (i as f64 * step, j as f64 * step);
                let v = q(t1, t2);
                if v > cell.2 {
                    cell = (t1, t2, v);
                }
            }
        }
        let mut seeds = vec![[cell.0, cell.1]];
        for _ in 0..search.random_starts {
            seeds.push([rng.random::<f64>() * PI, rng.random::<f64>() * PI]);
        }
        for s in seeds {
            starts += 1;
            let m = nm.minimize(|x| -q(x[0], x[1]), &s);
            converged &= m.converged;
            let candidates = [(m.x[0], m.x[1], -m.value), (cell.0, cell.1, cell.2)];
            for (t1, t2, v) in candidates {
                if v > best_q {
                    best_q = v;
                    best = BiseparableAnsatz {
                        k,
                        theta1: t1,
                        theta2: t2,
                    };
                }
            }
        }
    }
    Ok(ModifiedAlpha {
        alpha: best_q,
        ansatz: best,
        optimizer: OptimizerInfo {
            starts,
            converged,
            seed: search.seed,
        },
    })
}

/// `e_c = α / (1 − (N−1)β)`, the overall efficiency above which the
/// modified witness fires on a lossy symmetric W state.
pub fn critical_efficiency(n: usize, beta: f64, search: &AnsatzSearch) -> Result<f64> {
    let a = alpha_modified(n, beta, search)?;
    Ok(critical_efficiency_from_alpha(n, beta, a.alpha))
}

pub fn critical_efficiency_from_alpha(n: usize, beta: f64, alpha: f64) -> f64 {
    alpha / (1.0 - (n - 1) as f64 * beta)
}

/// Which identity the modified witness's `α` multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityTerm {
    /// Projector onto total photon number at most two.
    #[default]
    UpToTwoQuanta,
    Full,
}

/// `α·I₂ − Q` for the symmetric `W_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedWitness {
    modes: usize,
    beta: f64,
    alpha: f64,
    identity: IdentityTerm,
    ansatz: Option<BiseparableAnsatz>,
    optimizer: Option<OptimizerInfo>,
}

impl ModifiedWitness {
    /// Computes `α` by ansatz maximization.
    pub fn new(modes: usize, beta: f64, search: &AnsatzSearch) -> Result<Self> {
        let a = alpha_modified(modes, beta, search)?;
        Ok(Self {
            modes,
            beta,
            alpha: a.alpha,
            identity: IdentityTerm::default(),
            ansatz: Some(a.ansatz),
            optimizer: Some(a.optimizer),
        })
    }

    /// Uses a precomputed `α`.
    pub fn with_alpha(modes: usize, beta: f64, alpha: f64) -> Result<Self> {
        validate_beta(modes, beta)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(WitnessError::InvalidAlpha(alpha));
        }
        Ok(Self {
            modes,
            beta,
            alpha,
            identity: IdentityTerm::default(),
            ansatz: None,
            optimizer: None,
        })
    }

    pub fn with_identity(mut self, identity: IdentityTerm) -> Self {
        self.identity = identity;
        self
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn identity(&self) -> IdentityTerm {
        self.identity
    }

    pub fn critical_efficiency(&self) -> f64 {
        critical_efficiency_from_alpha(self.modes, self.beta, self.alpha)
    }

    /// Combines the measurable quantities into `tr{ρW′}`.
    pub fn combine(&self, identity_weight: f64, fidelity_w: f64, fidelities_bs: &[f64]) -> f64 {
        self.alpha * identity_weight - fidelity_w + self.beta * fidelities_bs.iter().sum::<f64>()
    }

    /// `α·tr{ρI₂} − ⟨W_N|ρ|W_N⟩ + β Σ_i ⟨BS_i|ρ|BS_i⟩`.
    pub fn value(&self, rho: &MixedState) -> Result<f64> {
        if rho.modes() != self.modes {
            return Err(WitnessError::ModeMismatch {
                expected: self.modes,
                got: rho.modes(),
            });
        }
        let space = rho.space();
        let identity_weight = match self.identity {
            IdentityTerm::UpToTwoQuanta => rho.photon_number_distribution().total_at_most(2),
            IdentityTerm::Full => 1.0,
        };
        let w = WStateSpec::symmetric(self.modes).to_state_in(space)?;
        let fidelity_w = rho.fidelity_to_pure(&w)?;
        let fidelities_bs = (0..self.modes)
            .map(|i| Ok(rho.fidelity_to_pure(&bs_state(i, space)?)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.combine(identity_weight, fidelity_w, &fidelities_bs))
    }

    pub fn report(&self) -> WitnessReport {
        WitnessReport {
            kind: WitnessKind::Modified,
            alpha: self.alpha,
            beta: Some(self.beta),
            ansatz: self.ansatz,
            optimizer: self.optimizer,
        }
    }
}

pub fn modified_witness_value(rho: &MixedState, w: &ModifiedWitness) -> Result<f64> {
    w.value(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Basic,
    Modified,
}

/// Serializable summary of a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    #[serde(rename = "type")]
    pub kind: WitnessKind,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<BiseparableAnsatz>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerInfo>,
}

/// Outcome of sampling random biseparable product states against `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardReport {
    pub samples: usize,
    pub alpha: f64,
    pub max_q: f64,
    /// Samples with `⟨Q⟩ > α + margin`.
    pub breaches: usize,
    /// Single-excitation amplitudes of the largest sample.
    pub worst: Vec<Complex64>,
}

/// Draws `samples` product states `|a⟩|b⟩` across uniformly chosen
/// bipartitions, each factor a random complex vector in the span of its
/// vacuum and single-excitation kets, and compares `⟨Q⟩` with `alpha`.
pub fn biseparable_guard(
    n: usize,
    beta: f64,
    alpha: f64,
    samples: usize,
    margin: f64,
    seed: u64,
) -> Result<GuardReport> {
    validate_beta(n, beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cuts = (1usize << (n - 1)) - 1;
    let mut report = GuardReport {
        samples,
        alpha,
        max_q: f64::NEG_INFINITY,
        breaches: 0,
        worst: Vec::new(),
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..samples {
        let mask = rng.random_range(0..cuts);
        let side = |m: usize| m == 0 || mask >> (m - 1) & 1 == 1;
        let a = random_unit_vector(&mut rng, 1 + (0..n).filter(|&m| side(m)).count());
        let b = random_unit_vector(&mut rng, 1 + (0..n).filter(|&m| !side(m)).count());
        let (mut ia, mut ib) = (1, 1);
        for (m, slot) in amps.iter_mut().enumerate() {
            // a photon on one side times vacuum on the other
            if side(m) {
                *slot = a[ia] * b[0];
                ia += 1;
            } else {
                *slot = a[0] * b[ib];
                ib += 1;
            }
        }
        let q = q_from_single_excitation(&amps, beta);
        if q > alpha + margin {
            report.breaches += 1;
        }
        if q > report.max_q {
            report.max_q = q;
            report.worst = amps.clone();
        }
    }
    Ok(report)
}

fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}
