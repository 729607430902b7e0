//! Dense complex state vectors and generalized measurement rules.
//!
//! Basis convention: qubit 0 is the most significant bit of the basis index,
//! so on `n` qubits qubit `q` lives at bit position `n - 1 - q`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Tolerance on the 2-norm for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 26;

/// Bit mask of qubit `q` inside an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(num_qubits: usize, q: usize) -> usize {
    1usize << (num_qubits - 1 - q)
}

/// Value of qubit `q` in basis index `index`.
#[inline]
pub fn bit_of(index: usize, num_qubits: usize, q: usize) -> bool {
    index & qubit_mask(num_qubits, q) != 0
}

/// Seeded PRNG for one independent stream. Streams with different ids never
/// overlap, so parallel and serial consumers draw identical numbers.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
    normalized: bool,
}

impl StateVector {
    /// |0...0> on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state |index>.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::validation(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amps,
            normalized: true,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two (at least 2)
    /// and every entry finite. The normalized flag is computed, not assumed.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::validation(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::validation("non-finite amplitude"));
        }
        let normalized = (norm_sqr_of(&amps) - 1.0).abs() <= NORM_TOLERANCE;
        Ok(Self {
            num_qubits,
            amps,
            normalized,
        })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&r| Amplitude::new(r, 0.0)).collect())
    }

    /// Internal constructor for simulator output; callers guarantee the
    /// length invariant.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Amplitude>) -> Result<Self> {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::validation("simulation produced a non-finite amplitude"));
        }
        let normalized = (norm_sqr_of(&amps) - 1.0).abs() <= NORM_TOLERANCE;
        Ok(Self {
            num_qubits,
            amps,
            normalized,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Squared 2-norm, summed in index order.
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr_of(&self.amps)
    }

    /// Rescales to unit 2-norm.
    pub fn normalize(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroMass);
        }
        let scale = 1.0 / n2.sqrt();
        let amps = self.amps.into_iter().map(|a| a * scale).collect();
        Self::from_raw(self.num_qubits, amps)
    }

    /// Standard-rule probabilities |amp|^2, unnormalized if the state is.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Kronecker product; `self` occupies the leading (more significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector::from_amplitudes(amps)
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::validation(format!(
            "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn norm_sqr_of(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Measurement exponent: outcome `z` is drawn with weight |amp_z|^p.
/// `p = 2` is the standard Born rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FantasyRule {
    p: f64,
}

impl FantasyRule {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Domain(format!(
                "measurement exponent must be finite and >= 0, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn born() -> Self {
        Self { p: 2.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_born(&self) -> bool {
        self.p == 2.0
    }

    /// |amp|^p for one amplitude. A zero amplitude carries zero mass for
    /// every exponent, including p = 0.
    #[inline]
    pub fn weight(&self, amp: Amplitude) -> f64 {
        self.weight_of_modulus(amp.norm())
    }

    #[inline]
    pub fn weight_of_modulus(&self, modulus: f64) -> f64 {
        if modulus == 0.0 {
            0.0
        } else if self.p == 2.0 {
            modulus * modulus
        } else {
            modulus.powf(self.p)
        }
    }
}

/// |<+|phi>| for a normalized one-qubit state.
pub fn overlap_plus(state: &StateVector) -> Result<f64> {
    if state.num_qubits() != 1 {
        return Err(Error::validation(format!(
            "overlap with |+> needs a 1-qubit state, got {} qubits",
            state.num_qubits()
        )));
    }
    if !state.is_normalized() {
        return Err(Error::validation("overlap with |+> needs a normalized state"));
    }
    let a = state.amplitudes();
    let inner = (a[0] + a[1]) * std::f64::consts::FRAC_1_SQRT_2;
    Ok(inner.norm().min(1.0))
}

/// Unnormalized mass sum of |amp_z|^p over basis indices selected by `subset`.
pub fn p_mass<F>(state: &StateVector, rule: FantasyRule, subset: F) -> f64
where
    F: Fn(usize) -> bool,
{
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(z, _)| subset(z))
        .map(|(_, &a)| rule.weight(a))
        .sum()
}

/// Draws one basis index with probability |amp_z|^p / sum_y |amp_y|^p.
pub fn sample_measurement(state: &StateVector, rule: FantasyRule, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(state, rule, &mut rng)
}

pub fn sample_with_rng<R: Rng + ?Sized>(
    state: &StateVector,
    rule: FantasyRule,
    rng: &mut R,
) -> Result<usize> {
    let weights: Vec<f64> = state.amplitudes().iter().map(|&a| rule.weight(a)).collect();
    sample_weights(&weights, rng)
}

/// Inverse-CDF draw from nonnegative weights.
pub fn sample_weights<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroMass);
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (z, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_nonzero = z;
            if target < acc {
                return Ok(z);
            }
        }
    }
    // Rounding can leave `target` a hair above the running sum.
    Ok(last_nonzero)
}
