//! Versioned on-disk container for the static index.
//!
//! Layout (all integers little-endian, fixed width):
//!
//! ```text
//! magic "WTGR" | version u16 | params | section count u32
//! per section: tag [u8;4] | payload offset u64 | payload length u64 | checksum u64
//! payload blobs (offsets relative to the end of the table)
//! ```
//!
//! Checksums are 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime
//! 0x100000001b3); test vectors live in the test module. Unknown section
//! tags are skipped with a warning; a version mismatch refuses to load;
//! builds are byte-deterministic for identical inputs and flags.

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::grid::{Point, RankGrid, WeightedPointSet};
use crate::majority::{CandTree, FixedMajorityIndex, ValueGrid};
use crate::rmq::Rmq;
use crate::sparse::{SparseBits, UnaryPartialSums};
use crate::stats::{MinMaxAugmentation, SumAugmentation};
use crate::valuewt::ValueWaveletTree;
use crate::wavelet::WaveletTree;

pub const MAGIC: &[u8; 4] = b"WTGR";
pub const VERSION: u16 = 1;

const TAG_GRID: &[u8; 4] = b"GRID";
const TAG_STAT: &[u8; 4] = b"STAT";
const TAG_MAJQ: &[u8; 4] = b"MAJQ";
const TAG_VALW: &[u8; 4] = b"VALW";

/// 64-bit FNV-1a.
pub fn checksum64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Build parameters recorded in the container header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    pub t: u32,
    pub ell: u64,
    pub alpha: Option<f64>,
    pub universe: u64,
    pub weight_bound: u64,
    pub n: u64,
}

/// The full static index: grid, aligned statistics, value tree, and the
/// optional fixed-alpha majority section.
#[derive(Debug, Clone)]
pub struct StaticIndex {
    pub params: BuildParams,
    pub grid: RankGrid,
    pub sums: SumAugmentation,
    pub minmax: MinMaxAugmentation,
    pub values: ValueWaveletTree,
    pub majority: Option<FixedMajorityIndex>,
}

impl StaticIndex {
    /// Builds every section from raw points. `universe`/`weight_bound`
    /// default to `max + 1`; a fixed-alpha majority section is built
    /// only when `alpha` is given.
    pub fn build(
        points: Vec<Point>,
        t: u32,
        ell: u64,
        alpha: Option<f64>,
        universe: Option<u64>,
        weight_bound: Option<u64>,
    ) -> Result<Self> {
        let u = universe
            .unwrap_or_else(|| points.iter().map(|p| p.x.max(p.y) + 1).max().unwrap_or(1));
        let w = weight_bound.unwrap_or_else(|| points.iter().map(|p| p.w + 1).max().unwrap_or(1));
        let ps = WeightedPointSet::new(points, u, w)?;
        let (grid, wb) = RankGrid::build_full(&ps);
        let sums = SumAugmentation::build(&wb, grid.weights(), t);
        let minmax = MinMaxAugmentation::build(&wb, grid.weights(), t);
        let values = ValueWaveletTree::build(&grid, ell);
        let majority = alpha.map(|a| FixedMajorityIndex::build(&grid, &wb, t, a));
        let params = BuildParams {
            t,
            ell,
            alpha,
            universe: u,
            weight_bound: w,
            n: grid.len(),
        };
        Ok(StaticIndex { params, grid, sums, minmax, values, majority })
    }

    pub fn save(&self) -> Vec<u8> {
        let mut sections: Vec<([u8; 4], Vec<u8>)> = Vec::new();
        sections.push((*TAG_GRID, enc_grid(&self.grid)));
        sections.push((*TAG_STAT, enc_stats(&self.sums, &self.minmax)));
        if let Some(m) = &self.majority {
            sections.push((*TAG_MAJQ, enc_majority(m)));
        }
        sections.push((*TAG_VALW, enc_values(&self.values)));
        assemble(&self.params, &sections)
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let (params, sections) = disassemble(bytes)?;
        let mut grid = None;
        let mut stats = None;
        let mut majority = None;
        let mut values = None;
        for (tag, payload) in sections {
            match &tag {
                TAG_GRID => grid = Some(dec_grid(&mut Reader::new(payload))?),
                TAG_STAT => stats = Some(dec_stats(&mut Reader::new(payload))?),
                TAG_MAJQ => majority = Some(dec_majority(&mut Reader::new(payload))?),
                TAG_VALW => values = Some(dec_values(&mut Reader::new(payload))?),
                other => {
                    eprintln!(
                        "warning: skipping unknown section {:?}",
                        String::from_utf8_lossy(other)
                    );
                }
            }
        }
        let grid = grid.ok_or_else(|| Error::Format("missing grid section".into()))?;
        let (sums, minmax) =
            stats.ok_or_else(|| Error::Format("missing aligned-stats section".into()))?;
        let values = values.ok_or_else(|| Error::Format("missing valuewt section".into()))?;
        Ok(StaticIndex { params, grid, sums, minmax, values, majority })
    }

    /// Test hook: flips a single bit in the permutation-tree bitmap so the
    /// verification harness can prove it detects corrupted structures.
    /// Returns `false` when the index is too small to hold any bitmap bit.
    #[doc(hidden)]
    pub fn debug_flip_bit(&mut self) -> bool {
        let (n, universe, weight_bound, wt, xmap, ymap, weights) = {
            let (n, universe, weight_bound, wt, xmap, ymap, weights) = self.grid.parts();
            let (sigma, wn, depth, levels) = wt.parts();
            let Some(first) = levels.first().filter(|b| b.len() > 0) else { return false };
            let mut words = first.words().to_vec();
            words[0] ^= 1;
            let mut new_levels = vec![crate::bits::BitVec::from_words(words, first.len())];
            new_levels.extend_from_slice(&levels[1..]);
            let wt = crate::wavelet::WaveletTree::from_parts(sigma, wn, depth, new_levels);
            (n, universe, weight_bound, wt, xmap.clone(), ymap.clone(), weights.to_vec())
        };
        self.grid = RankGrid::from_parts(n, universe, weight_bound, wt, xmap, ymap, weights);
        true
    }
}

pub(crate) fn assemble(params: &BuildParams, sections: &[([u8; 4], Vec<u8>)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&params.t.to_le_bytes());
    out.extend_from_slice(&params.ell.to_le_bytes());
    out.push(params.alpha.is_some() as u8);
    out.extend_from_slice(&params.alpha.unwrap_or(0.0).to_bits().to_le_bytes());
    out.extend_from_slice(&params.universe.to_le_bytes());
    out.extend_from_slice(&params.weight_bound.to_le_bytes());
    out.extend_from_slice(&params.n.to_le_bytes());
    out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
    let mut offset = 0u64;
    for (tag, payload) in sections {
        out.extend_from_slice(tag);
        out.extend_from_slice(&offset.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&checksum64(payload).to_le_bytes());
        offset += payload.len() as u64;
    }
    for (_, payload) in sections {
        out.extend_from_slice(payload);
    }
    out
}

#[allow(clippy::type_complexity)]
fn disassemble(bytes: &[u8]) -> Result<(BuildParams, Vec<([u8; 4], &[u8])>)> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Version { found: version, expected: VERSION });
    }
    let t = r.u32()?;
    let ell = r.u64()?;
    let has_alpha = r.u8()? != 0;
    let alpha_bits = r.u64()?;
    let alpha = has_alpha.then(|| f64::from_bits(alpha_bits));
    let universe = r.u64()?;
    let weight_bound = r.u64()?;
    let n = r.u64()?;
    let count = r.u32()? as usize;
    let mut table = Vec::with_capacity(count);
    for _ in 0..count {
        let tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
        let offset = r.u64()? as usize;
        let len = r.u64()? as usize;
        let sum = r.u64()?;
        table.push((tag, offset, len, sum));
    }
    let payload = r.rest();
    let mut sections = Vec::with_capacity(count);
    for (tag, offset, len, sum) in table {
        let blob = payload
            .get(offset..offset + len)
            .ok_or_else(|| Error::Format("section out of bounds".into()))?;
        if checksum64(blob) != sum {
            return Err(Error::Checksum(format!(
                "section {:?} checksum mismatch",
                String::from_utf8_lossy(&tag)
            )));
        }
        sections.push((tag, blob));
    }
    Ok((BuildParams { t, ell, alpha, universe, weight_bound, n }, sections))
}

// ---------------------------------------------------------------------------
// Primitive readers/writers
// ---------------------------------------------------------------------------

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("truncated container".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn rest(self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u64s(&mut self) -> Result<Vec<u64>> {
        let n = self.u64()? as usize;
        (0..n).map(|_| self.u64()).collect()
    }

    fn u16s(&mut self) -> Result<Vec<u16>> {
        let n = self.u64()? as usize;
        (0..n).map(|_| self.u16()).collect()
    }

    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.u64()? as usize;
        (0..n).map(|_| self.u32()).collect()
    }
}

fn w_u64s(out: &mut Vec<u8>, v: &[u64]) {
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for &x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn w_u16s(out: &mut Vec<u8>, v: &[u16]) {
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for &x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn w_u32s(out: &mut Vec<u8>, v: &[u32]) {
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for &x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn w_bitvec(out: &mut Vec<u8>, b: &BitVec) {
    out.extend_from_slice(&(b.len() as u64).to_le_bytes());
    w_u64s(out, b.words());
}

fn r_bitvec(r: &mut Reader) -> Result<BitVec> {
    let len = r.u64()? as usize;
    let words = r.u64s()?;
    Ok(BitVec::from_words(words, len))
}

fn w_sparse(out: &mut Vec<u8>, s: &SparseBits) {
    let (universe, m, low_width, lows, highs) = s.parts();
    out.extend_from_slice(&universe.to_le_bytes());
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&low_width.to_le_bytes());
    w_u64s(out, lows);
    w_bitvec(out, highs);
}

fn r_sparse(r: &mut Reader) -> Result<SparseBits> {
    let universe = r.u64()?;
    let m = r.u64()?;
    let low_width = r.u32()?;
    let lows = r.u64s()?;
    let highs = r_bitvec(r)?;
    Ok(SparseBits::from_parts(universe, m, low_width, lows, highs))
}

fn w_wavelet(out: &mut Vec<u8>, wt: &WaveletTree) {
    let (sigma, n, depth, levels) = wt.parts();
    out.extend_from_slice(&sigma.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&depth.to_le_bytes());
    out.extend_from_slice(&(levels.len() as u64).to_le_bytes());
    for b in levels {
        w_bitvec(out, b);
    }
}

fn r_wavelet(r: &mut Reader) -> Result<WaveletTree> {
    let sigma = r.u64()?;
    let n = r.u64()?;
    let depth = r.u32()?;
    let count = r.u64()? as usize;
    let levels = (0..count).map(|_| r_bitvec(r)).collect::<Result<Vec<_>>>()?;
    Ok(WaveletTree::from_parts(sigma, n, depth, levels))
}

fn w_unary(out: &mut Vec<u8>, u: &UnaryPartialSums) {
    let (k, bits) = u.parts();
    out.extend_from_slice(&k.to_le_bytes());
    w_sparse(out, bits);
}

fn r_unary(r: &mut Reader) -> Result<UnaryPartialSums> {
    let k = r.u64()?;
    let bits = r_sparse(r)?;
    Ok(UnaryPartialSums::from_parts(k, bits))
}

fn w_rmq(out: &mut Vec<u8>, q: &Rmq) {
    let (n, size, bits) = q.parts();
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&size.to_le_bytes());
    w_bitvec(out, bits);
}

fn r_rmq(r: &mut Reader) -> Result<Rmq> {
    let n = r.u64()?;
    let size = r.u64()?;
    let bits = r_bitvec(r)?;
    Ok(Rmq::from_parts(n, size, bits))
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

fn enc_grid(g: &RankGrid) -> Vec<u8> {
    let (n, universe, weight_bound, wt, xmap, ymap, weights) = g.parts();
    let mut out = Vec::new();
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&universe.to_le_bytes());
    out.extend_from_slice(&weight_bound.to_le_bytes());
    w_wavelet(&mut out, wt);
    w_sparse(&mut out, xmap);
    w_sparse(&mut out, ymap);
    w_u64s(&mut out, weights);
    out
}

fn dec_grid(r: &mut Reader) -> Result<RankGrid> {
    let n = r.u64()?;
    let universe = r.u64()?;
    let weight_bound = r.u64()?;
    let wt = r_wavelet(r)?;
    let xmap = r_sparse(r)?;
    let ymap = r_sparse(r)?;
    let weights = r.u64s()?;
    Ok(RankGrid::from_parts(n, universe, weight_bound, wt, xmap, ymap, weights))
}

fn enc_stats(sums: &SumAugmentation, minmax: &MinMaxAugmentation) -> Vec<u8> {
    let mut out = Vec::new();
    let (tau, s, sq) = sums.parts();
    out.extend_from_slice(&tau.to_le_bytes());
    out.extend_from_slice(&(s.len() as u64).to_le_bytes());
    for u in s.iter().chain(sq) {
        w_unary(&mut out, u);
    }
    let (tau, mins, min_off, maxs, max_off) = minmax.parts();
    out.extend_from_slice(&tau.to_le_bytes());
    out.extend_from_slice(&(mins.len() as u64).to_le_bytes());
    for q in mins.iter().chain(maxs) {
        w_rmq(&mut out, q);
    }
    for v in min_off.iter().chain(max_off) {
        w_u16s(&mut out, v);
    }
    out
}

fn dec_stats(r: &mut Reader) -> Result<(SumAugmentation, MinMaxAugmentation)> {
    let tau = r.u64()?;
    let levels = r.u64()? as usize;
    let mut all = (0..2 * levels).map(|_| r_unary(r)).collect::<Result<Vec<_>>>()?;
    let sq = all.split_off(levels);
    let sums = SumAugmentation::from_parts(tau, all, sq);
    let tau = r.u64()?;
    let levels = r.u64()? as usize;
    let mut rmqs = (0..2 * levels).map(|_| r_rmq(r)).collect::<Result<Vec<_>>>()?;
    let maxs = rmqs.split_off(levels);
    let mut offs = (0..2 * levels).map(|_| r.u16s()).collect::<Result<Vec<_>>>()?;
    let max_off = offs.split_off(levels);
    Ok((sums, MinMaxAugmentation::from_parts(tau, rmqs, offs, maxs, max_off)))
}

fn enc_values(v: &ValueWaveletTree) -> Vec<u8> {
    let (m, ell, step, depth, v_bits, x_tree, y_tree, grids) = v.parts();
    let mut out = Vec::new();
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&ell.to_le_bytes());
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&depth.to_le_bytes());
    w_sparse(&mut out, v_bits);
    w_wavelet(&mut out, x_tree);
    w_wavelet(&mut out, y_tree);
    out.extend_from_slice(&(grids.len() as u64).to_le_bytes());
    for g in grids {
        out.push(g.is_some() as u8);
        if let Some(g) = g {
            w_wavelet(&mut out, g);
        }
    }
    out
}

fn dec_values(r: &mut Reader) -> Result<ValueWaveletTree> {
    let m = r.u64()?;
    let ell = r.u64()?;
    let step = r.u32()?;
    let depth = r.u32()?;
    let v_bits = r_sparse(r)?;
    let x_tree = r_wavelet(r)?;
    let y_tree = r_wavelet(r)?;
    let count = r.u64()? as usize;
    let mut grids = Vec::with_capacity(count);
    for _ in 0..count {
        if r.u8()? != 0 {
            grids.push(Some(r_wavelet(r)?));
        } else {
            grids.push(None);
        }
    }
    Ok(ValueWaveletTree::from_parts(m, ell, step, depth, v_bits, x_tree, y_tree, grids))
}

fn enc_majority(m: &FixedMajorityIndex) -> Vec<u8> {
    let (alpha, t, block, mm, v_bits, per_value, trees) = m.parts();
    let mut out = Vec::new();
    out.extend_from_slice(&alpha.to_bits().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&mm.to_le_bytes());
    w_sparse(&mut out, v_bits);
    out.extend_from_slice(&(per_value.len() as u64).to_le_bytes());
    for vg in per_value {
        w_sparse(&mut out, &vg.xs);
        w_sparse(&mut out, &vg.ys);
        w_wavelet(&mut out, &vg.perm);
    }
    out.extend_from_slice(&(trees.len() as u64).to_le_bytes());
    for level in trees {
        out.extend_from_slice(&(level.len() as u64).to_le_bytes());
        for (offset, tree) in level {
            out.extend_from_slice(&offset.to_le_bytes());
            out.extend_from_slice(&tree.nb.to_le_bytes());
            out.extend_from_slice(&tree.size.to_le_bytes());
            out.extend_from_slice(&(tree.lists.len() as u64).to_le_bytes());
            for l in &tree.lists {
                w_u32s(&mut out, l);
            }
        }
    }
    out
}

fn dec_majority(r: &mut Reader) -> Result<FixedMajorityIndex> {
    let alpha = f64::from_bits(r.u64()?);
    let t = r.u32()?;
    let block = r.u64()?;
    let m = r.u64()?;
    let v_bits = r_sparse(r)?;
    let pv_count = r.u64()? as usize;
    let mut per_value = Vec::with_capacity(pv_count);
    for _ in 0..pv_count {
        let xs = r_sparse(r)?;
        let ys = r_sparse(r)?;
        let perm = r_wavelet(r)?;
        per_value.push(ValueGrid { xs, ys, perm });
    }
    let levels = r.u64()? as usize;
    let mut trees = Vec::with_capacity(levels);
    for _ in 0..levels {
        let count = r.u64()? as usize;
        let mut level = Vec::with_capacity(count);
        for _ in 0..count {
            let offset = r.u64()?;
            let nb = r.u64()?;
            let size = r.u64()?;
            let nlists = r.u64()? as usize;
            let lists = (0..nlists).map(|_| r.u32s()).collect::<Result<Vec<_>>>()?;
            level.push((offset, CandTree { nb, size, lists }));
        }
        trees.push(level);
    }
    Ok(FixedMajorityIndex::from_parts(alpha, t, block, m, v_bits, per_value, trees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RectQuery;
    use crate::stats;
    use crate::work::Work;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn checksum_test_vectors() {
        // Pinned FNV-1a 64 vectors.
        assert_eq!(checksum64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(checksum64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(checksum64(b"foobar"), 0x85944171f73967e8);
    }

    fn sample(seed: u64, n: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Point::new(rng.gen_range(0..1024), rng.gen_range(0..1024), rng.gen_range(0..256))
            })
            .collect()
    }

    #[test]
    fn roundtrip_preserves_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0_47);
        for seed in 0..8 {
            let pts = sample(seed, 80 + seed * 31);
            let idx =
                StaticIndex::build(pts, 1 + (seed as u32 % 3), 4, Some(0.25), None, None).unwrap();
            let bytes = idx.save();
            let back = StaticIndex::load(&bytes).unwrap();
            assert_eq!(idx.params, back.params);
            let mut w = Work::new();
            for _ in 0..6 {
                let (a, b) = (rng.gen_range(0..1024u64), rng.gen_range(0..1024u64));
                let (c, d) = (rng.gen_range(0..1024u64), rng.gen_range(0..1024u64));
                let q = RectQuery::new(a.min(b), a.max(b), c.min(d), c.max(d));
                assert_eq!(idx.grid.count(&q), back.grid.count(&q));
                assert_eq!(idx.grid.report(&q), back.grid.report(&q));
                assert_eq!(
                    stats::range_sum(&idx.grid, &idx.sums, &q),
                    stats::range_sum(&back.grid, &back.sums, &q)
                );
                assert_eq!(
                    stats::range_min(&idx.grid, &idx.minmax, &q),
                    stats::range_min(&back.grid, &back.minmax, &q)
                );
                let total = idx.grid.count(&q);
                if total > 0 {
                    let k = rng.gen_range(1..=total);
                    assert_eq!(
                        idx.values.quantile(&idx.grid, &q, k, &mut w).unwrap(),
                        back.values.quantile(&back.grid, &q, k, &mut w).unwrap()
                    );
                }
                assert_eq!(
                    idx.majority.as_ref().unwrap().majority(&idx.grid, &q, &mut w),
                    back.majority.as_ref().unwrap().majority(&back.grid, &q, &mut w)
                );
            }
        }
    }

    #[test]
    fn builds_are_byte_deterministic() {
        let pts = sample(7, 200);
        let a = StaticIndex::build(pts.clone(), 2, 4, Some(0.5), None, None).unwrap().save();
        let b = StaticIndex::build(pts, 2, 4, Some(0.5), None, None).unwrap().save();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_checksum_is_rejected() {
        let pts = sample(11, 60);
        let idx = StaticIndex::build(pts, 1, 2, None, None, None).unwrap();
        let mut bytes = idx.save();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        match StaticIndex::load(&bytes) {
            Err(Error::Checksum(_)) => {}
            other => panic!("expected checksum rejection, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_refuses_load() {
        let pts = sample(13, 10);
        let mut bytes = StaticIndex::build(pts, 1, 2, None, None, None).unwrap().save();
        bytes[4] = 0xfe;
        assert!(matches!(StaticIndex::load(&bytes), Err(Error::Version { .. })));
    }

    #[test]
    fn unknown_sections_are_skipped() {
        let pts = sample(17, 40);
        let idx = StaticIndex::build(pts, 1, 2, None, None, None).unwrap();
        let mut sections: Vec<([u8; 4], Vec<u8>)> = vec![
            (*b"XTRA", vec![1, 2, 3, 4]),
            (*TAG_GRID, enc_grid(&idx.grid)),
            (*TAG_STAT, enc_stats(&idx.sums, &idx.minmax)),
            (*TAG_VALW, enc_values(&idx.values)),
        ];
        sections.rotate_left(0);
        let bytes = assemble(&idx.params, &sections);
        let back = StaticIndex::load(&bytes).unwrap();
        let q = RectQuery::new(0, 1023, 0, 1023);
        assert_eq!(idx.grid.count(&q), back.grid.count(&q));
    }

    #[test]
    fn empty_index_roundtrips() {
        let idx = StaticIndex::build(Vec::new(), 1, 2, Some(0.5), Some(64), Some(8)).unwrap();
        let back = StaticIndex::load(&idx.save()).unwrap();
        assert_eq!(back.params.n, 0);
        assert_eq!(back.grid.count(&RectQuery::new(0, 63, 0, 63)), 0);
    }
}
