//! Steering information and the rotated initial Hamiltonian.
//!
//! A guess vector `ψ ∈ {−1, 0, +1}ⁿ` marks assumed spin orientations of the
//! target ground state. With a global angle `Θ` each qubit is rotated by
//! `θ_i = Θ·sgn(ψ_i)` and the anneal starts from
//!
//! ```text
//! H̃₀ = Σ_i −(cos θ_i σˣ_i + sin θ_i σᶻ_i)
//! ```
//!
//! which reduces to the direct-anneal `−Σ σˣ_i` at `Θ = 0`. Its ground state
//! is the product of single-site states `√((1+sin θ)/2)|↑⟩ + √((1−sin θ)/2)|↓⟩`.
//! `Θ > 0` recommends the guessed orientations, `Θ < 0` disrecommends them.
//! Angles are naturally measured in units of `Ω = arccos(2^{−n/2})`, the
//! angle between the uniform superposition and any basis state.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_qubits, spin_of, HermitianOperator, StateVector, DEFAULT_QUBIT_CAP};
use crate::models::IsingInstance;
use crate::rng;

/// `Ω(n) = arccos(2^{−n/2})`.
pub fn omega(n: usize) -> f64 {
    (-(n as f64) / 2.0).exp2().acos()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct GuessVector {
    psi: Vec<i8>,
}

impl TryFrom<Vec<i8>> for GuessVector {
    type Error = Error;

    fn try_from(psi: Vec<i8>) -> Result<Self> {
        GuessVector::new(psi)
    }
}

impl From<GuessVector> for Vec<i8> {
    fn from(g: GuessVector) -> Self {
        g.psi
    }
}

impl GuessVector {
    pub fn new(psi: Vec<i8>) -> Result<Self> {
        if let Some(v) = psi.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::invalid(format!(
                "guess entries must be -1, 0 or +1, got {v}"
            )));
        }
        Ok(GuessVector { psi })
    }

    /// No information on any of the `n` qubits.
    pub fn empty(n: usize) -> Self {
        GuessVector { psi: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    pub fn entries(&self) -> &[i8] {
        &self.psi
    }

    /// `L_g`, the number of guessed qubits.
    pub fn guess_len(&self) -> usize {
        self.psi.iter().filter(|&&v| v != 0).count()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.psi
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| i)
    }

    pub fn negated(&self) -> Self {
        GuessVector {
            psi: self.psi.iter().map(|v| -v).collect(),
        }
    }
}

/// Global steering angle `Θ` in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SteeringAngle(f64);

impl SteeringAngle {
    pub fn from_radians(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid(format!(
                "steering angle must be finite, got {theta}"
            )));
        }
        Ok(SteeringAngle(theta))
    }

    /// `Θ = units·Ω(n)`.
    pub fn in_omega_units(units: f64, n: usize) -> Result<Self> {
        Self::from_radians(units * omega(n))
    }

    pub fn zero() -> Self {
        SteeringAngle(0.0)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn omega_units(self, n: usize) -> f64 {
        self.0 / omega(n)
    }
}

/// Per-qubit rotation angles `θ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("rotation angles must be finite"));
        }
        Ok(ThetaVector(theta))
    }

    pub fn zeros(n: usize) -> Self {
        ThetaVector(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }
}

/// `θ_i = Θ·sgn(ψ_i)`.
pub fn theta_vector(psi: &GuessVector, theta: SteeringAngle) -> ThetaVector {
    ThetaVector(psi.psi.iter().map(|&p| theta.0 * f64::from(p)).collect())
}

/// Direct-anneal initial Hamiltonian `−Σ_i σˣ_i`.
pub fn direct_initial_hamiltonian(n: usize) -> Result<HermitianOperator> {
    let dim = check_qubits(n, DEFAULT_QUBIT_CAP)?;
    HermitianOperator::transverse(vec![-1.0; n], vec![0.0; dim])
}

pub fn rotated_initial_hamiltonian(theta: &ThetaVector) -> Result<HermitianOperator> {
    let n = theta.n();
    let dim = check_qubits(n, DEFAULT_QUBIT_CAP)?;
    let x = theta.0.iter().map(|t| -t.cos()).collect();
    let sines: Vec<f64> = theta.0.iter().map(|t| t.sin()).collect();
    let diag = (0..dim)
        .map(|b| {
            sines
                .iter()
                .enumerate()
                .map(|(q, s)| -s * f64::from(spin_of(b, q, n)))
                .sum()
        })
        .collect();
    HermitianOperator::transverse(x, diag)
}

/// Single-site ground state `(⟨↑|g⟩, ⟨↓|g⟩)` of `−(cos θ σˣ + sin θ σᶻ)`.
pub fn site_ground(theta: f64) -> [f64; 2] {
    let s = theta.sin();
    [
        ((1.0 + s) / 2.0).sqrt(),
        ((1.0 - s) / 2.0).sqrt().copysign(theta.cos()),
    ]
}

/// Single-site excited state `(⟨↑|e⟩, ⟨↓|e⟩)`, orthogonal to
/// [`site_ground`], with eigenvalue +1.
pub fn site_excited(theta: f64) -> [f64; 2] {
    let [a, b] = site_ground(theta);
    [-b, a]
}

/// Ground state of [`rotated_initial_hamiltonian`], built as a product state.
pub fn rotated_initial_ground_state(theta: &ThetaVector) -> Result<StateVector> {
    let n = theta.n();
    let dim = check_qubits(n, DEFAULT_QUBIT_CAP)?;
    let sites: Vec<[f64; 2]> = theta.0.iter().map(|&t| site_ground(t)).collect();
    let amps = (0..dim)
        .map(|b| {
            let amp: f64 = sites
                .iter()
                .enumerate()
                .map(|(q, g)| if spin_of(b, q, n) > 0 { g[0] } else { g[1] })
                .product();
            amp.into()
        })
        .collect();
    StateVector::new(amps)
}

/// Guesses the spin with the largest `|h_i|` to point along the orientation
/// that minimizes `h_i σᶻ_i`, i.e. `ψ_i = −sgn(h_i)`. Ties go to the lowest
/// index.
pub fn highest_field_guess(inst: &IsingInstance) -> Result<GuessVector> {
    let h = inst.h();
    let (best, hmax) = h.iter().enumerate().fold((0, 0.0_f64), |(bi, bv), (i, v)| {
        if v.abs() > bv {
            (i, v.abs())
        } else {
            (bi, bv)
        }
    });
    if hmax == 0.0 {
        return Err(Error::invalid(
            "all local fields are zero; no orientation is favoured",
        ));
    }
    let mut psi = vec![0; h.len()];
    psi[best] = if h[best] > 0.0 { -1 } else { 1 };
    Ok(GuessVector { psi })
}

/// Guess of length `guess_len` drawn from a known solution: the support is a
/// uniformly random subset, `n_errors` of its entries (again uniformly
/// chosen) are flipped against the solution.
pub fn guess_from_solution(
    solution: usize,
    n: usize,
    guess_len: usize,
    n_errors: usize,
    seed: u64,
) -> Result<GuessVector> {
    if n == 0 || solution >= 1usize << n {
        return Err(Error::invalid(format!(
            "solution index {solution} out of range for n = {n}"
        )));
    }
    if n_errors > guess_len || guess_len > n {
        return Err(Error::invalid(format!(
            "need 0 <= n_errors ({n_errors}) <= L_g ({guess_len}) <= n ({n})"
        )));
    }
    let mut r = rng::seeded(seed);
    let mut support = sample(&mut r, n, guess_len).into_vec();
    support.sort_unstable();
    let wrong = sample(&mut r, guess_len, n_errors).into_vec();
    let mut psi = vec![0; n];
    for (k, &q) in support.iter().enumerate() {
        let s = spin_of(solution, q, n);
        psi[q] = if wrong.contains(&k) { -s } else { s };
    }
    Ok(GuessVector { psi })
}

/// `(correct, wrong)` counts of a guess against a solution over its support.
pub fn guess_accuracy(psi: &GuessVector, solution: usize) -> (usize, usize) {
    let n = psi.n();
    psi.support().fold((0, 0), |(c, w), q| {
        if psi.psi[q] == spin_of(solution, q, n) {
            (c + 1, w)
        } else {
            (c, w + 1)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, eigh, Levels};
    use crate::models::{gen_ising, ising_hamiltonian};
    use rand::Rng as _;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn omega_values() {
        assert!((omega(1) - FRAC_PI_4).abs() < 1e-15);
        assert!((omega(8) - (1.0f64 / 16.0).acos()).abs() < 1e-15);
        assert!((omega(8) - 1.508_255_6).abs() < 1e-6);
        let mut prev = 0.0;
        for n in 1..60 {
            let w = omega(n);
            assert!(w > prev && w < FRAC_PI_2);
            prev = w;
        }
    }

    #[test]
    fn theta_vector_examples() {
        let mut psi = vec![0; 8];
        psi[2] = 1;
        psi[3] = -1;
        let g = GuessVector::new(psi).unwrap();
        let t = theta_vector(&g, SteeringAngle::from_radians(0.3).unwrap());
        assert_eq!(t.angles(), &[0.0, 0.0, 0.3, -0.3, 0.0, 0.0, 0.0, 0.0]);
        assert!(theta_vector(&g, SteeringAngle::zero())
            .angles()
            .iter()
            .all(|&v| v == 0.0));
        let one = GuessVector::new(vec![1, 0, 0]).unwrap();
        let ang = SteeringAngle::in_omega_units(-0.6, 3).unwrap();
        assert_eq!(theta_vector(&one, ang).angles()[0], -0.6 * omega(3));
        assert!((ang.omega_units(3) + 0.6).abs() < 1e-15);
        assert!(GuessVector::new(vec![2]).is_err());
    }

    #[test]
    fn zero_angle_is_the_direct_anneal() {
        for n in 1..=6 {
            let psi = GuessVector::new((0..n).map(|q| [1, -1, 0][q % 3]).collect()).unwrap();
            let h =
                rotated_initial_hamiltonian(&theta_vector(&psi, SteeringAngle::zero())).unwrap();
            let direct = direct_initial_hamiltonian(n).unwrap();
            let d = 1 << n;
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(h.entry(i, j), direct.entry(i, j));
                }
            }
        }
    }

    #[test]
    fn full_rotation_single_qubit() {
        let h = rotated_initial_hamiltonian(&ThetaVector::new(vec![FRAC_PI_2]).unwrap()).unwrap();
        assert!((h.entry(0, 0).re + 1.0).abs() < 1e-15);
        assert!((h.entry(1, 1).re - 1.0).abs() < 1e-15);
        assert!(h.entry(0, 1).re.abs() < 1e-15);
        let g = rotated_initial_ground_state(&ThetaVector::new(vec![FRAC_PI_2]).unwrap()).unwrap();
        assert!((g.probability(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn site_states_beyond_quarter_turn() {
        for theta in [2.0, 3.0, -2.5, -3.1] {
            let (c, s) = (f64::cos(theta), f64::sin(theta));
            let [a, b] = site_ground(theta);
            // −(cσx + sσz)·g = −g
            assert!((-(s * a + c * b) + a).abs() < 1e-15, "{theta}");
            assert!((-(c * a - s * b) + b).abs() < 1e-15, "{theta}");
            let [ea, eb] = site_excited(theta);
            assert!((a * ea + b * eb).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_angle_ground_state_is_uniform() {
        let g = rotated_initial_ground_state(&ThetaVector::zeros(4)).unwrap();
        for a in g.amplitudes() {
            assert!((a.re - 0.25).abs() < 1e-15 && a.im == 0.0);
        }
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn spectrum_is_binomial_ladder() {
        let mut r = rng::seeded(5);
        for n in 1..=8 {
            let theta =
                ThetaVector::new((0..n).map(|_| r.random_range(-1.5..1.5)).collect()).unwrap();
            let ev = eigenvalues(&rotated_initial_hamiltonian(&theta).unwrap()).unwrap();
            let mut pos = 0;
            for k in 0..=n {
                let level = -(n as f64) + 2.0 * k as f64;
                for _ in 0..binomial(n, k) {
                    assert!((ev[pos] - level).abs() < 1e-10, "n={n} k={k}: {}", ev[pos]);
                    pos += 1;
                }
            }
        }
        let ev =
            eigenvalues(&rotated_initial_hamiltonian(&ThetaVector::zeros(2)).unwrap()).unwrap();
        for (a, b) in ev.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_ground_state_matches_diagonalization() {
        let mut r = rng::seeded(17);
        for draw in 0..50 {
            let n = 2 + draw % 7;
            let psi = GuessVector::new((0..n).map(|_| r.random_range(-1..=1)).collect()).unwrap();
            let units: f64 = r.random_range(-1.0..1.0);
            let theta = theta_vector(&psi, SteeringAngle::in_omega_units(units, n).unwrap());
            let exact = eigh(
                &rotated_initial_hamiltonian(&theta).unwrap(),
                Levels::Lowest(1),
            )
            .unwrap()
            .ground_state();
            let analytic = rotated_initial_ground_state(&theta).unwrap();
            assert!((analytic.overlap(&exact) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn negated_guess_is_conjugated_by_global_x_flip() {
        let mut r = rng::seeded(23);
        for n in 1..=4 {
            let psi = GuessVector::new((0..n).map(|_| r.random_range(-1..=1)).collect()).unwrap();
            let ang = SteeringAngle::from_radians(0.7).unwrap();
            let h = rotated_initial_hamiltonian(&theta_vector(&psi, ang)).unwrap();
            let hn = rotated_initial_hamiltonian(&theta_vector(&psi.negated(), ang)).unwrap();
            let full = (1 << n) - 1;
            for i in 0..=full {
                for j in 0..=full {
                    assert_eq!(hn.entry(i, j), h.entry(i ^ full, j ^ full));
                }
            }
        }
    }

    #[test]
    fn highest_field_examples() {
        let inst = IsingInstance::new(vec![0.2, -0.7, 0.05], &[], None).unwrap();
        assert_eq!(highest_field_guess(&inst).unwrap().entries(), &[0, 1, 0]);
        let one = IsingInstance::new(vec![0.5], &[], None).unwrap();
        assert_eq!(highest_field_guess(&one).unwrap().entries(), &[-1]);
        let tie = IsingInstance::new(vec![0.3, -0.3], &[], None).unwrap();
        assert_eq!(highest_field_guess(&tie).unwrap().entries(), &[-1, 0]);
        let zero = IsingInstance::new(vec![0.0, 0.0], &[(0, 1, 1.0)], None).unwrap();
        assert!(highest_field_guess(&zero).is_err());
    }

    #[test]
    fn guess_minimizes_its_own_field_term() {
        for seed in 0..50 {
            let inst = gen_ising(6, 0.01, 0.05, 1.0, seed).unwrap();
            let g = highest_field_guess(&inst).unwrap();
            let q = g.support().next().unwrap();
            assert!(inst.h()[q] * f64::from(g.entries()[q]) < 0.0);
            let _ = ising_hamiltonian(&inst);
        }
    }

    #[test]
    fn guesses_from_solution() {
        let n = 8;
        let solution = 0b1011_0010;
        let full = guess_from_solution(solution, n, n, 0, 1).unwrap();
        assert_eq!(
            full.entries(),
            crate::linalg::spins_of(solution, n).as_slice()
        );
        let inverted = guess_from_solution(solution, n, 3, 3, 2).unwrap();
        assert_eq!(guess_accuracy(&inverted, solution), (0, 3));
        let one_wrong = guess_from_solution(solution, n, 3, 1, 3).unwrap();
        assert_eq!(guess_accuracy(&one_wrong, solution), (2, 1));
        let g = guess_from_solution(solution, n, 7, 2, 4).unwrap();
        assert_eq!(guess_accuracy(&g, solution), (5, 2));
        assert_eq!(g.guess_len(), 7);
        assert_eq!(guess_from_solution(solution, n, 7, 2, 4).unwrap(), g);
        assert_eq!(guess_accuracy(&GuessVector::empty(n), solution), (0, 0));
        assert!(guess_from_solution(solution, n, 3, 4, 0).is_err());
        assert!(guess_from_solution(solution, n, 9, 0, 0).is_err());
    }
}
