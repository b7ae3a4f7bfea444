//! Plain bit sequences with constant-time rank and sampled select.
//!
//! Positions are 0-based, `rank(b, i)` counts occurrences of `b` in `[0, i]`
//! with `rank(b, -1) = 0`, and `select(b, k)` is 1-based with
//! `select(b, 0) = -1`.

use crate::error::{Error, Result};

const WORD: usize = 64;
/// Words per rank sub-block (512 bits).
const BLOCK_WORDS: usize = 8;
/// Sub-blocks per superblock (4096 bits).
const SUPER_BLOCKS: usize = 8;
const SUPER_BITS: usize = BLOCK_WORDS * SUPER_BLOCKS * WORD;

/// Immutable bit sequence with a two-level rank directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
    /// Cumulative ones before each superblock.
    supers: Vec<u64>,
    /// Ones before each 512-bit block, relative to its superblock.
    blocks: Vec<u16>,
    ones: u64,
}

impl BitVec {
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut words = vec![0u64; (bits.len() + WORD - 1) / WORD];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / WORD] |= 1u64 << (i % WORD);
            }
        }
        Self::from_words(words, bits.len())
    }

    /// Takes ownership of packed little-endian words holding `len` bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate((len + WORD - 1) / WORD);
        words.resize((len + WORD - 1) / WORD, 0);
        // Mask stray bits beyond `len` so popcounts stay honest.
        if len % WORD != 0 {
            if let Some(w) = words.last_mut() {
                *w &= (1u64 << (len % WORD)) - 1;
            }
        }
        let n_blocks = (words.len() + BLOCK_WORDS - 1) / BLOCK_WORDS;
        let n_supers = (len + SUPER_BITS - 1) / SUPER_BITS;
        let mut supers = Vec::with_capacity(n_supers + 1);
        let mut blocks = Vec::with_capacity(n_blocks);
        let mut total: u64 = 0;
        let mut in_super: u64 = 0;
        for b in 0..n_blocks {
            if b % SUPER_BLOCKS == 0 {
                supers.push(total);
                in_super = 0;
            }
            blocks.push(in_super as u16);
            let lo = b * BLOCK_WORDS;
            let hi = (lo + BLOCK_WORDS).min(words.len());
            let cnt: u64 = words[lo..hi].iter().map(|w| w.count_ones() as u64).sum();
            total += cnt;
            in_super += cnt;
        }
        if supers.is_empty() {
            supers.push(0);
        }
        BitVec { words, len, supers, blocks, ones: total }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn count(&self, bit: bool) -> u64 {
        if bit {
            self.ones
        } else {
            self.len as u64 - self.ones
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    /// Number of ones in `[0, end)`.
    pub fn rank1_prefix(&self, end: usize) -> u64 {
        debug_assert!(end <= self.len);
        if end == 0 {
            return 0;
        }
        let block = (end - 1) / (BLOCK_WORDS * WORD);
        let mut r = self.supers[block / SUPER_BLOCKS] + self.blocks[block] as u64;
        let word_lo = block * BLOCK_WORDS;
        let last_word = (end - 1) / WORD;
        for w in word_lo..last_word {
            r += self.words[w].count_ones() as u64;
        }
        let tail = end - last_word * WORD;
        let mask = if tail == WORD { !0u64 } else { (1u64 << tail) - 1 };
        r + (self.words[last_word] & mask).count_ones() as u64
    }

    /// Number of `bit` occurrences in `[0, end)`.
    #[inline]
    pub fn rank_prefix(&self, bit: bool, end: usize) -> u64 {
        let ones = self.rank1_prefix(end);
        if bit {
            ones
        } else {
            end as u64 - ones
        }
    }

    /// Contract rank: occurrences of `bit` in `[0, i]`, `i = -1` allowed.
    pub fn rank(&self, bit: bool, i: i64) -> Result<u64> {
        if i < -1 || i >= self.len as i64 {
            if i == -1 {
                return Ok(0);
            }
            return Err(Error::OutOfRange { index: i, len: self.len as u64 });
        }
        Ok(self.rank_prefix(bit, (i + 1) as usize))
    }

    /// Position of the `k`-th occurrence of `bit` (1-based); `k = 0` gives -1.
    pub fn select(&self, bit: bool, k: u64) -> Result<i64> {
        if k == 0 {
            return Ok(-1);
        }
        let total = self.count(bit);
        if k > total {
            return Err(Error::SelectNotFound { bit: bit as u8, k, total });
        }
        Ok(self.select_unchecked(bit, k) as i64)
    }

    /// `k` is 1-based and must not exceed the total count of `bit`.
    pub fn select_unchecked(&self, bit: bool, k: u64) -> usize {
        debug_assert!(k >= 1 && k <= self.count(bit));
        // Superblock search.
        let occ_before = |s: usize| -> u64 {
            let ones = self.supers[s];
            if bit {
                ones
            } else {
                (s * SUPER_BITS) as u64 - ones
            }
        };
        let (mut lo, mut hi) = (0usize, self.supers.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if occ_before(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sup = lo;
        let mut remaining = k - occ_before(sup);
        // Block scan inside the superblock.
        let first_block = sup * SUPER_BLOCKS;
        let last_block = (first_block + SUPER_BLOCKS).min(self.blocks.len());
        let mut block = first_block;
        for b in (first_block + 1)..last_block {
            let occ = if bit {
                self.blocks[b] as u64
            } else {
                ((b - first_block) * BLOCK_WORDS * WORD) as u64 - self.blocks[b] as u64
            };
            if occ < remaining {
                block = b;
            } else {
                break;
            }
        }
        let occ_block = if bit {
            self.blocks[block] as u64
        } else {
            ((block - first_block) * BLOCK_WORDS * WORD) as u64 - self.blocks[block] as u64
        };
        remaining -= occ_block;
        // Word scan.
        let word_lo = block * BLOCK_WORDS;
        for w in word_lo..self.words.len() {
            let word = if bit { self.words[w] } else { !self.words[w] };
            let cnt = word.count_ones() as u64;
            if cnt >= remaining {
                return w * WORD + select_in_word(word, remaining as u32);
            }
            remaining -= cnt;
        }
        unreachable!("select target verified against total count");
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Measured storage in bits, directories included.
    pub fn size_bits(&self) -> u64 {
        (self.words.len() * 64 + self.supers.len() * 64 + self.blocks.len() * 16 + 128) as u64
    }
}

/// Position (0..63) of the `k`-th set bit of `word`, `k` 1-based.
#[inline]
fn select_in_word(mut word: u64, k: u32) -> usize {
    debug_assert!(k >= 1 && word.count_ones() >= k);
    for _ in 1..k {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}
