//! Working-precision descriptor.
//!
//! Every value carries its precision explicitly; there is no ambient
//! process-wide precision state. Binary operations between operands of
//! different precision round to the coarser of the two.

use crate::error::{Error, Result};

/// Mantissa length in bits for arbitrary-precision values.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    /// Smallest supported mantissa length.
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::PrecisionTooLow { got: bits, min: Self::MIN_BITS });
        }
        Ok(Precision { bits })
    }

    /// Panicking constructor for statically known-good widths.
    pub fn bits_unchecked(bits: u32) -> Self {
        debug_assert!(bits >= Self::MIN_BITS);
        Precision { bits }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Default precision for a spectral solve of degree `n`:
    /// `max(128, ceil(2.2 n) + 64)`. The additive floor absorbs the
    /// exponential growth of the basis-to-monomial conversion entries.
    pub fn for_degree(n: usize) -> Self {
        let n = n as u64;
        let ceil_22n = (11 * n).div_ceil(5);
        let bits = (ceil_22n + 64).max(128);
        Precision { bits: bits.min(u32::MAX as u64) as u32 }
    }

    /// Widened copy, used for internal guard digits.
    pub fn plus(self, extra: u32) -> Self {
        Precision { bits: self.bits.saturating_add(extra) }
    }

    pub fn min(self, other: Self) -> Self {
        if self.bits <= other.bits {
            self
        } else {
            other
        }
    }
}
