//! Second-order perturbative ground state of `H(s*)` around the rotated
//! initial Hamiltonian, for large systems where exact diagonalization is out
//! of reach.
//!
//! Dividing `H(s*)` by `1 − s*` gives `H̃₀ + ε·H_f` with `ε = s*/(1−s*)`.
//! The state is expanded on the symmetric excitation states
//!
//! ```text
//! |Φ_k⟩ = C(n,k)^{−1/2} Σ_{|S|=k} ⊗_{l∈S} |e_l⟩ ⊗_{l∉S} |g_l⟩,   k = 0…4,
//! ```
//!
//! where `|g_l⟩ = (√((1+sin θ_l)/2), √((1−sin θ_l)/2))` is the single-site
//! ground state and `|e_l⟩ = (−√((1−sin θ_l)/2), √((1+sin θ_l)/2))` the
//! orthogonal excited state. Coefficients depend on the instance only through
//! `Σ h_l` and `Σ J_lm`; for large `n` these are sampled from Gaussians.
//!
//! Overlaps with a basis state are evaluated in `O(n)` from the product
//! structure: `⟨σ|Φ_k⟩·√C(n,k)` is the degree-`k` coefficient of
//! `Π_l (g_l(σ_l) + x·e_l(σ_l))`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::anneal::{hamiltonian_at, AnnealPath};
use crate::error::{Error, Result};
use crate::linalg::{check_qubits, eigh, spin_of, Levels, StateVector, DEFAULT_QUBIT_CAP};
use crate::models::{gen_ising, ising_hamiltonian, IsingInstance};
use crate::rng::{derive_seed, seeded};
use crate::steering::{site_excited, site_ground, ThetaVector};

/// Highest excitation order in the expansion.
pub const K_MAX: usize = 4;

/// `ε = s*/(1−s*)`.
pub fn epsilon_of_s(s_star: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s_star) {
        return Err(Error::invalid(format!(
            "s* must lie in [0, 1), got {s_star}"
        )));
    }
    Ok(s_star / (1.0 - s_star))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gaussian model of `Σ h_l` and `Σ J_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSumStats {
    pub mean_j: f64,
    pub sigma_j: f64,
    pub mean_h: f64,
    pub sigma_h: f64,
}

impl GaussianSumStats {
    /// Reference sum statistics for `n = 35` spin-glass draws.
    pub fn spin_glass_defaults() -> Self {
        GaussianSumStats {
            mean_j: -0.007,
            sigma_j: 14.0,
            mean_h: 1.22,
            sigma_h: 0.08,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.mean_j, self.sigma_j, self.mean_h, self.sigma_h];
        if all.iter().any(|v| !v.is_finite()) || self.sigma_j < 0.0 || self.sigma_h < 0.0 {
            return Err(Error::invalid(format!("invalid sum statistics {self:?}")));
        }
        Ok(())
    }
}

/// Independent normal draws `(Σh, ΣJ)`, `Σh` first.
pub fn clt_sample_sums(stats: &GaussianSumStats, seed: u64) -> Result<(f64, f64)> {
    let mut r = seeded(seed);
    sample_sums(stats, &mut r)
}

fn sample_sums(stats: &GaussianSumStats, r: &mut crate::rng::Rng) -> Result<(f64, f64)> {
    stats.validate()?;
    let h = Normal::new(stats.mean_h, stats.sigma_h).map_err(|e| Error::invalid(e.to_string()))?;
    let j = Normal::new(stats.mean_j, stats.sigma_j).map_err(|e| Error::invalid(e.to_string()))?;
    let sum_h = h.sample(r);
    let sum_j = j.sample(r);
    Ok((sum_h, sum_j))
}

/// Empirical mean and sample standard deviation of `Σh`, `ΣJ` over freshly
/// generated instances; instance `i` uses `derive_seed(seed, i)`.
pub fn fit_sum_stats(
    n: usize,
    h_mean: f64,
    w: f64,
    j_s: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GaussianSumStats> {
    if n_samples < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    let mut hs = Vec::with_capacity(n_samples);
    let mut js = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let inst = gen_ising(n, h_mean, w, j_s, derive_seed(seed, i as u64))?;
        hs.push(inst.sum_h());
        js.push(inst.sum_j());
    }
    let (mean_h, sigma_h) = mean_std(&hs);
    let (mean_j, sigma_j) = mean_std(&js);
    Ok(GaussianSumStats {
        mean_j,
        sigma_j,
        mean_h,
        sigma_h,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub n: usize,
    pub s_star: f64,
    /// Level spacing `ϵ` of the unperturbed Hamiltonian.
    pub level_spacing: f64,
    pub sum_h: f64,
    pub sum_j: f64,
    /// Overrides for `Γ₃ = 1/√C(n,3)` and `Γ₄ = 1/√C(n,4)`.
    pub gamma3: Option<f64>,
    pub gamma4: Option<f64>,
    pub order: Order,
}

impl PerturbationParams {
    pub fn new(n: usize, s_star: f64, sum_h: f64, sum_j: f64) -> Self {
        PerturbationParams {
            n,
            s_star,
            level_spacing: 1.0,
            sum_h,
            sum_j,
            gamma3: None,
            gamma4: None,
            order: Order::Second,
        }
    }

    pub fn eps(&self) -> Result<f64> {
        epsilon_of_s(self.s_star)
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma3.unwrap_or_else(|| inv_sqrt(binomial(self.n, 3)))
    }

    pub fn gamma4(&self) -> f64 {
        self.gamma4.unwrap_or_else(|| inv_sqrt(binomial(self.n, 4)))
    }
}

fn inv_sqrt(c: f64) -> f64 {
    if c > 0.0 {
        c.sqrt().recip()
    } else {
        0.0
    }
}

/// First- and second-order amplitudes before they are summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub a1: [f64; 3],
    pub a2: [f64; 5],
}

pub fn amplitudes(p: &PerturbationParams) -> Result<Amplitudes> {
    if p.n < 2 {
        return Err(Error::invalid(format!(
            "perturbative expansion needs n >= 2, got {}",
            p.n
        )));
    }
    if !(p.level_spacing > 0.0 && p.level_spacing.is_finite()) {
        return Err(Error::invalid("level spacing must be positive"));
    }
    let eps = p.eps()?;
    let n = p.n as f64;
    let (h, j, e) = (p.sum_h, p.sum_j, p.level_spacing);
    let pairs = 2.0 * n * (n - 1.0);
    let e2 = eps * eps / (e * e);
    let a1 = [0.0, eps * h / (e * n.sqrt()), eps * j / (e * pairs.sqrt())];
    let a2 = [
        -e2 / (2.0 * n) * (h * h + j * j / pairs),
        e2 * h * j / n.sqrt() * (4.0 - 1.0 / n.sqrt()),
        e2 * (h * h * (n - 1.0).sqrt() / ((2.0 * n).sqrt() * n)
            - 2.0 * j * j / (n * (n * (n - 1.0)).sqrt())),
        e2 * h
            * j
            * p.gamma3()
            * (1.0 - 2.0 * 2f64.sqrt() * (n - 2.0) / (3.0 * n * (n * (n - 1.0)).sqrt())),
        e2 * 3.0 * p.gamma4() * j * j,
    ];
    Ok(Amplitudes { a1, a2 })
}

/// Coefficients on `|Φ₀⟩…|Φ₄⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeState {
    pub coefficients: [f64; K_MAX + 1],
    pub normalized: bool,
}

impl PerturbativeState {
    pub fn unperturbed() -> Self {
        PerturbativeState {
            coefficients: [1.0, 0.0, 0.0, 0.0, 0.0],
            normalized: true,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Coefficients `(1 + A⁽²⁾₀, A⁽¹⁾₁ + A⁽²⁾₁, A⁽¹⁾₂ + A⁽²⁾₂, A⁽²⁾₃, A⁽²⁾₄)`,
/// normalized. Orders above `n` do not exist and get zero weight.
pub fn perturbative_coefficients(p: &PerturbationParams) -> Result<PerturbativeState> {
    let a = amplitudes(p)?;
    let second = if p.order == Order::Second { 1.0 } else { 0.0 };
    let mut c = [
        1.0 + second * a.a2[0],
        a.a1[1] + second * a.a2[1],
        a.a1[2] + second * a.a2[2],
        second * a.a2[3],
        second * a.a2[4],
    ];
    for (k, v) in c.iter_mut().enumerate() {
        if k > p.n {
            *v = 0.0;
        }
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid(
            "perturbative coefficients vanish or overflow",
        ));
    }
    c.iter_mut().for_each(|v| *v /= norm);
    Ok(PerturbativeState {
        coefficients: c,
        normalized: true,
    })
}

/// `⟨σ|Φ_k⟩` for `k = 0…4`, `σ` given as spins in `{+1, −1}`.
pub fn excitation_overlaps(theta: &ThetaVector, spins: &[i8]) -> Result<[f64; K_MAX + 1]> {
    let n = theta.n();
    if spins.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: spins.len(),
        });
    }
    let mut poly = [1.0, 0.0, 0.0, 0.0, 0.0];
    for (&t, &s) in theta.angles().iter().zip(spins) {
        let idx = match s {
            1 => 0,
            -1 => 1,
            _ => {
                return Err(Error::invalid(format!(
                    "spin values must be +1 or -1, got {s}"
                )))
            }
        };
        let g = site_ground(t)[idx];
        let e = site_excited(t)[idx];
        for k in (0..=K_MAX).rev() {
            poly[k] = poly[k] * g + if k > 0 { poly[k - 1] * e } else { 0.0 };
        }
    }
    for (k, v) in poly.iter_mut().enumerate() {
        *v *= inv_sqrt(binomial(n, k));
    }
    Ok(poly)
}

/// `|⟨σ|Φ̃₀⟩|²` for the target basis state `σ`.
pub fn target_overlap(
    theta: &ThetaVector,
    state: &PerturbativeState,
    solution: &[i8],
) -> Result<f64> {
    let ov = excitation_overlaps(theta, solution)?;
    let amp: f64 = ov.iter().zip(&state.coefficients).map(|(o, c)| o * c).sum();
    Ok(amp * amp)
}

/// Dense `|Φ₀⟩…|Φ_{min(n,4)}⟩`.
pub fn excitation_basis_dense(theta: &ThetaVector) -> Result<Vec<StateVector>> {
    let n = theta.n();
    let dim = check_qubits(n, DEFAULT_QUBIT_CAP)?;
    let kmax = K_MAX.min(n);
    let mut cols = vec![Vec::with_capacity(dim); kmax + 1];
    for b in 0..dim {
        let spins: Vec<i8> = (0..n).map(|q| spin_of(b, q, n)).collect();
        let ov = excitation_overlaps(theta, &spins)?;
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(ov[k].into());
        }
    }
    cols.into_iter().map(StateVector::new).collect()
}

/// `Σ_k c_k |Φ_k⟩` as a dense state.
pub fn analytic_state_dense(theta: &ThetaVector, state: &PerturbativeState) -> Result<StateVector> {
    let basis = excitation_basis_dense(theta)?;
    let dim = basis[0].dim();
    let amps = (0..dim)
        .map(|i| {
            basis
                .iter()
                .zip(&state.coefficients)
                .map(|(v, c)| v.amplitudes()[i] * *c)
                .sum()
        })
        .collect();
    StateVector::normalized(amps)
}

/// `|⟨Φ̃₀^{analytic}|Φ̃₀^{exact}⟩|` at `s*`, using the instance's own sums.
pub fn validate_against_exact(
    inst: &IsingInstance,
    theta: &ThetaVector,
    s_star: f64,
    order: Order,
) -> Result<f64> {
    let mut p = PerturbationParams::new(inst.n(), s_star, 0.0, 0.0);
    p.order = order;
    validate_against_exact_with(inst, theta, &p)
}

/// As [`validate_against_exact`] with every expansion setting taken from
/// `params`; its `n`, `sum_h` and `sum_j` are replaced by the instance's.
pub fn validate_against_exact_with(
    inst: &IsingInstance,
    theta: &ThetaVector,
    params: &PerturbationParams,
) -> Result<f64> {
    let n = inst.n();
    check_qubits(n, 8)?;
    let p = PerturbationParams {
        n,
        sum_h: inst.sum_h(),
        sum_j: inst.sum_j(),
        ..*params
    };
    let analytic = analytic_state_dense(theta, &perturbative_coefficients(&p)?)?;
    let path = AnnealPath::steered(&ising_hamiltonian(inst), theta)?;
    let exact = eigh(&hamiltonian_at(&path, p.s_star)?, Levels::Lowest(1))?.ground_state();
    Ok(analytic.overlap(&exact))
}

/// One Monte-Carlo draw of the large-`n` setting: a random target spin
/// pattern, a random site order (guesses take its first `L_g` entries, errors
/// the first ones of those) and sampled sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub solution: Vec<i8>,
    pub order: Vec<usize>,
    pub sum_h: f64,
    pub sum_j: f64,
}

pub fn draw(n: usize, stats: &GaussianSumStats, seed: u64) -> Result<Draw> {
    let mut r = seeded(seed);
    let solution = (0..n)
        .map(|_| if r.random_bool(0.5) { 1 } else { -1 })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let (sum_h, sum_j) = sample_sums(stats, &mut r)?;
    Ok(Draw {
        solution,
        order,
        sum_h,
        sum_j,
    })
}

impl Draw {
    /// Rotation angles for a guess of length `guess_len` with `n_errors`
    /// flipped entries at steering angle `theta` (radians).
    pub fn theta_vector(
        &self,
        guess_len: usize,
        n_errors: usize,
        theta: f64,
    ) -> Result<ThetaVector> {
        let n = self.solution.len();
        if n_errors > guess_len || guess_len > n {
            return Err(Error::invalid(format!(
                "need 0 <= n_errors ({n_errors}) <= L_g ({guess_len}) <= n ({n})"
            )));
        }
        let mut t = vec![0.0; n];
        for (rank, &q) in self.order[..guess_len].iter().enumerate() {
            let s = f64::from(self.solution[q]);
            t[q] = if rank < n_errors {
                -theta * s
            } else {
                theta * s
            };
        }
        ThetaVector::new(t)
    }
}
