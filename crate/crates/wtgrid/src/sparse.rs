//! Sparse bit sequences: `m` set positions out of a universe `[0, u)`,
//! stored as a high/low split (upper bits unary over a plain bitmap,
//! lower bits fixed width). Costs about `m log2(u/m) + 2m` bits plus
//! directory overhead; see [`SparseBits::size_bits`].

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// Documented constant for the space test: measured size stays within
/// `SPACE_FACTOR` times `m log2(u/m) + 2m` bits once `m >= 256` and
/// `m/u <= 1/8`.
pub const SPACE_FACTOR: f64 = 1.3;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseBits {
    universe: u64,
    m: u64,
    low_width: u32,
    /// Packed `low_width`-bit lower parts, element-major.
    lows: Vec<u64>,
    /// Unary-coded upper parts: one set bit per element at `high_i + i`.
    highs: BitVec,
}

impl SparseBits {
    /// Builds from strictly increasing set positions within `[0, universe)`.
    pub fn from_positions(positions: &[u64], universe: u64) -> Self {
        let m = positions.len() as u64;
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(positions.last().map_or(true, |&p| p < universe.max(1)));
        let low_width = if m == 0 {
            0
        } else {
            (64 - (universe / m).leading_zeros()).saturating_sub(1)
        };
        let mut lows = vec![0u64; ((m * low_width as u64 + 63) / 64) as usize];
        let high_len = if m == 0 { 1 } else { m + (universe >> low_width) + 1 };
        let mut high_bools = vec![false; high_len as usize];
        for (i, &p) in positions.iter().enumerate() {
            if low_width > 0 {
                let low = p & ((1u64 << low_width) - 1);
                set_packed(&mut lows, i as u64, low_width, low);
            }
            high_bools[(p >> low_width) as usize + i] = true;
        }
        SparseBits {
            universe,
            m,
            low_width,
            lows,
            highs: BitVec::from_bools(&high_bools),
        }
    }

    pub fn len(&self) -> u64 {
        self.universe
    }

    pub fn count_ones(&self) -> u64 {
        self.m
    }

    /// The `i`-th smallest set position (0-based element index).
    pub fn position(&self, i: u64) -> u64 {
        debug_assert!(i < self.m);
        let p = self.highs.select_unchecked(true, i + 1) as u64;
        let high = p - i;
        (high << self.low_width) | self.get_low(i)
    }

    /// Number of set positions `< x` (`x` may equal the universe size).
    pub fn count_lt(&self, x: u64) -> u64 {
        if self.m == 0 {
            return 0;
        }
        let x = x.min(self.universe);
        let high = x >> self.low_width;
        // Elements with smaller high part all precede the `high`-th zero.
        let mut idx = if high == 0 {
            0
        } else if high > self.highs.count(false) {
            return self.m;
        } else {
            let z = self.highs.select_unchecked(false, high) as u64;
            z - (high - 1)
        };
        let target_low = x & low_mask(self.low_width);
        while idx < self.m {
            let p = self.highs.select_unchecked(true, idx + 1) as u64;
            if p - idx != high {
                break;
            }
            if self.get_low(idx) >= target_low {
                break;
            }
            idx += 1;
        }
        idx
    }

    /// Contract rank over the conceptual length-`u` bitmap.
    pub fn rank(&self, bit: bool, i: i64) -> Result<u64> {
        if i < -1 || i >= self.universe as i64 {
            if i == -1 {
                return Ok(0);
            }
            return Err(Error::OutOfRange { index: i, len: self.universe });
        }
        if i == -1 {
            return Ok(0);
        }
        let ones = self.count_lt(i as u64 + 1);
        Ok(if bit { ones } else { (i + 1) as u64 - ones })
    }

    /// Contract select over the conceptual bitmap; `k = 0` gives -1.
    pub fn select(&self, bit: bool, k: u64) -> Result<i64> {
        if k == 0 {
            return Ok(-1);
        }
        let total = if bit { self.m } else { self.universe - self.m };
        if k > total {
            return Err(Error::SelectNotFound { bit: bit as u8, k, total });
        }
        if bit {
            return Ok(self.position(k - 1) as i64);
        }
        // Binary search the monotone zero-rank for the k-th clear position.
        let (mut lo, mut hi) = (0u64, self.universe - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let zeros = (mid + 1) - self.count_lt(mid + 1);
            if zeros < k {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo as i64)
    }

    pub fn contains(&self, pos: u64) -> bool {
        pos < self.universe && self.count_lt(pos + 1) > self.count_lt(pos)
    }

    fn get_low(&self, i: u64) -> u64 {
        if self.low_width == 0 {
            0
        } else {
            get_packed(&self.lows, i, self.low_width)
        }
    }

    /// Measured encoding size in bits (payload plus rank directories).
    pub fn size_bits(&self) -> u64 {
        self.lows.len() as u64 * 64 + self.highs.size_bits()
    }

    pub(crate) fn parts(&self) -> (u64, u64, u32, &[u64], &BitVec) {
        (self.universe, self.m, self.low_width, &self.lows, &self.highs)
    }

    pub(crate) fn from_parts(
        universe: u64,
        m: u64,
        low_width: u32,
        lows: Vec<u64>,
        highs: BitVec,
    ) -> Self {
        SparseBits { universe, m, low_width, lows, highs }
    }
}

#[inline]
fn low_mask(width: u32) -> u64 {
    if width == 0 {
        0
    } else {
        (1u64 << width) - 1
    }
}

fn set_packed(words: &mut [u64], i: u64, width: u32, value: u64) {
    let bit = i * width as u64;
    let (w, off) = ((bit / 64) as usize, (bit % 64) as u32);
    words[w] |= value << off;
    if off + width > 64 {
        words[w + 1] |= value >> (64 - off);
    }
}

fn get_packed(words: &[u64], i: u64, width: u32) -> u64 {
    let bit = i * width as u64;
    let (w, off) = ((bit / 64) as usize, (bit % 64) as u32);
    let mut v = words[w] >> off;
    if off + width > 64 {
        v |= words[w + 1] << (64 - off);
    }
    v & low_mask(width)
}

/// Non-negative integers `v_0..v_{k-1}` coded in unary (`v_i` zeros then a
/// one), so that prefix sums reduce to select on the set positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnaryPartialSums {
    k: u64,
    bits: SparseBits,
}

/// Builders reject value sequences whose conceptual unary expansion
/// exceeds 2^60 bits. (The expansion is never materialized — the sparse
/// encoding grows with the number of values, not the universe — so this
/// cap only guards position arithmetic.)
pub const MAX_UNARY_BITS: u64 = 1 << 60;

impl UnaryPartialSums {
    pub fn from_values(values: &[u64]) -> Self {
        let k = values.len() as u64;
        let mut ones = Vec::with_capacity(values.len());
        let mut acc: u64 = 0;
        for (i, &v) in values.iter().enumerate() {
            acc += v;
            ones.push(acc + i as u64);
        }
        let total_len = acc + k;
        assert!(total_len <= MAX_UNARY_BITS, "unary expansion too large");
        UnaryPartialSums { k, bits: SparseBits::from_positions(&ones, total_len) }
    }

    pub fn len(&self) -> u64 {
        self.k
    }

    /// `prefix_sum(i) = v_0 + ... + v_i`; `i = -1` gives 0.
    pub fn prefix_sum(&self, i: i64) -> Result<u64> {
        if i < -1 || i >= self.k as i64 {
            if i == -1 {
                return Ok(0);
            }
            return Err(Error::OutOfRange { index: i, len: self.k });
        }
        if i == -1 {
            return Ok(0);
        }
        // select(1, i+1) is the position of the (i+1)-th one; subtracting the
        // i ones before it leaves the zeros, i.e. the sum.
        Ok(self.bits.position(i as u64) - i as u64)
    }

    pub fn size_bits(&self) -> u64 {
        self.bits.size_bits()
    }

    pub(crate) fn parts(&self) -> (u64, &SparseBits) {
        (self.k, &self.bits)
    }

    pub(crate) fn from_parts(k: u64, bits: SparseBits) -> Self {
        UnaryPartialSums { k, bits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn positions_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5a5e_0001);
        for _ in 0..200 {
            let u = rng.gen_range(1..=1u64 << 20);
            let m = rng.gen_range(0..=u.min(2000));
            let mut set = std::collections::BTreeSet::new();
            while (set.len() as u64) < m {
                set.insert(rng.gen_range(0..u));
            }
            let pos: Vec<u64> = set.into_iter().collect();
            let sb = SparseBits::from_positions(&pos, u);
            for (i, &p) in pos.iter().enumerate() {
                assert_eq!(sb.position(i as u64), p);
                assert!(sb.contains(p));
            }
            for _ in 0..50 {
                let x = rng.gen_range(0..=u);
                let expect = pos.iter().filter(|&&p| p < x).count() as u64;
                assert_eq!(sb.count_lt(x), expect, "u={u} m={m} x={x}");
            }
        }
    }

    #[test]
    fn conceptual_rank_select() {
        let pos = [1u64, 3, 4, 9];
        let sb = SparseBits::from_positions(&pos, 12);
        assert_eq!(sb.rank(true, 4).unwrap(), 3);
        assert_eq!(sb.rank(false, 4).unwrap(), 2);
        assert_eq!(sb.rank(true, -1).unwrap(), 0);
        assert_eq!(sb.select(true, 2).unwrap(), 3);
        assert_eq!(sb.select(false, 1).unwrap(), 0);
        assert_eq!(sb.select(false, 3).unwrap(), 5);
        assert_eq!(sb.select(true, 0).unwrap(), -1);
        assert!(sb.select(true, 5).is_err());
        assert!(sb.rank(true, 12).is_err());
    }

    #[test]
    fn space_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xef_5ace);
        for &(m, u) in &[(256u64, 4096u64), (1024, 1 << 16), (4096, 1 << 20)] {
            let mut set = std::collections::BTreeSet::new();
            while (set.len() as u64) < m {
                set.insert(rng.gen_range(0..u));
            }
            let pos: Vec<u64> = set.into_iter().collect();
            let sb = SparseBits::from_positions(&pos, u);
            let analytic = m as f64 * ((u as f64 / m as f64).log2() + 2.0);
            assert!(
                (sb.size_bits() as f64) <= SPACE_FACTOR * analytic,
                "m={m} u={u}: measured {} > {} ",
                sb.size_bits(),
                SPACE_FACTOR * analytic
            );
        }
    }

    #[test]
    fn unary_prefix_sums() {
        let ps = UnaryPartialSums::from_values(&[5, 2, 7, 2]);
        assert_eq!(ps.prefix_sum(2).unwrap(), 14);
        assert_eq!(ps.prefix_sum(-1).unwrap(), 0);
        assert_eq!(ps.prefix_sum(3).unwrap(), 16);
        assert!(ps.prefix_sum(4).is_err());

        let zeros = UnaryPartialSums::from_values(&[0, 0, 0]);
        assert_eq!(zeros.prefix_sum(2).unwrap(), 0);
    }

    #[test]
    fn unary_matches_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b5eed);
        for &vmax in &[2u64, 256, 1 << 20] {
            for _ in 0..30 {
                let k = rng.gen_range(1..=300);
                let values: Vec<u64> = (0..k).map(|_| rng.gen_range(0..vmax)).collect();
                let ps = UnaryPartialSums::from_values(&values);
                let mut acc = 0u64;
                for i in 0..k {
                    acc += values[i];
                    assert_eq!(ps.prefix_sum(i as i64).unwrap(), acc);
                }
            }
        }
    }
}
