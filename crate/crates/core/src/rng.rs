//! Deterministic seeded random streams and the uniform sampling semantics.
//!
//! Every iteration of an ensemble draws from its own [`RngStream`], derived
//! from the master seed and the iteration index without generating any
//! intervening values. The generator is SplitMix64, so the byte-for-byte
//! output of an expansion depends only on (program text, seed, iteration) and
//! is identical on every platform.
//!
//! Range conventions: integer sampling is over the *inclusive* range
//! `[low, high]`; float sampling is over the *half-open* range `[low, high)`.

use thiserror::Error;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 state. A value type: copy it to fork deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

/// One application of the published SplitMix64 `next()` function to `x`:
/// advance by the golden-ratio increment, then finalize.
fn splitmix64_mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    /// Stream starting at a raw state. Mostly useful in tests; expansion
    /// always goes through [`derive_stream`].
    pub fn from_state(state: u64) -> Self {
        RngStream { state }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Next float in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }
}

/// Derives the independent stream for one iteration:
/// `state = mix(master_seed ^ mix(iteration ^ GOLDEN))` where `mix` is one
/// SplitMix64 `next()` application. Streams for distinct iterations are
/// computed directly, never by fast-forwarding through earlier draws.
pub fn derive_stream(master_seed: u64, iteration: u64) -> RngStream {
    RngStream {
        state: splitmix64_mix(master_seed ^ splitmix64_mix(iteration ^ GOLDEN)),
    }
}

/// A dense row-major tensor of runtime values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<u64>,
    pub data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn new(shape: Vec<u64>, data: Vec<T>) -> Self {
        debug_assert_eq!(shape.iter().product::<u64>() as usize, data.len());
        Tensor { shape, data }
    }

    /// Row-major flat offset for multi-dimensional `indices`, or `None` when
    /// the rank mismatches or any index is out of bounds.
    pub fn flat_index(shape: &[u64], indices: &[i64]) -> Option<usize> {
        if indices.len() != shape.len() {
            return None;
        }
        let mut flat: u64 = 0;
        for (&idx, &dim) in indices.iter().zip(shape) {
            if idx < 0 || idx as u64 >= dim {
                return None;
            }
            flat = flat * dim + idx as u64;
        }
        Some(flat as usize)
    }
}

pub type IntTensor = Tensor<i64>;
pub type FloatTensor = Tensor<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum RngError {
    #[error("empty integer range: low {low} > high {high}")]
    EmptyIntRange { low: i64, high: i64 },
    #[error("invalid float range [{low}, {high}): bounds must be finite with low < high")]
    InvalidFloatRange { low: f64, high: f64 },
}

/// Fills a tensor with integers uniform over the inclusive range
/// `[low, high]`, in row-major order, using unbiased rejection sampling:
/// a draw `u` is accepted when `u < 2^64 - (2^64 mod range)` and mapped to
/// `low + (u mod range)`.
pub fn sample_int_uniform(
    stream: &mut RngStream,
    low: i64,
    high: i64,
    shape: &[u64],
) -> Result<IntTensor, RngError> {
    if low > high {
        return Err(RngError::EmptyIntRange { low, high });
    }
    let range = (high as i128 - low as i128 + 1) as u128;
    let threshold = (1u128 << 64) - ((1u128 << 64) % range);
    let n = shape.iter().product::<u64>() as usize;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let u = stream.next_u64() as u128;
            if u < threshold {
                data.push((low as i128 + (u % range) as i128) as i64);
                break;
            }
        }
    }
    Ok(Tensor::new(shape.to_vec(), data))
}

/// Fills a tensor with floats uniform over the half-open range `[low, high)`,
/// in row-major order: `value = low + u * (high - low)` with `u` the 53-bit
/// unit draw. Rounding at the top of a very narrow range can land exactly on
/// `high`; such values clamp to the largest float below `high` so the
/// half-open containment always holds.
pub fn sample_float_uniform(
    stream: &mut RngStream,
    low: f64,
    high: f64,
    shape: &[u64],
) -> Result<FloatTensor, RngError> {
    if low >= high || !low.is_finite() || !high.is_finite() {
        return Err(RngError::InvalidFloatRange { low, high });
    }
    let n = shape.iter().product::<u64>() as usize;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = low + stream.next_f64() * (high - low);
        if v >= high {
            v = high.next_down();
        }
        data.push(v);
    }
    Ok(Tensor::new(shape.to_vec(), data))
}
