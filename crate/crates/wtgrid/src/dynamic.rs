//! Dynamic variants on a fixed `U x U` universe: dynamic bitmaps, a
//! dynamic rank-grid, per-node dynamic aggregates (sum / squared sum /
//! min / max), and a dynamic value-domain tree for quantile, majority,
//! successor and predecessor. Supports point insert/delete and value
//! update (delete + reinsert).
//!
//! Costs are O(log n) per bitmap operation (balanced block tree); the
//! advertised complexities therefore carry an extra log factor over the
//! best known bitmap constructions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::Corner;
use crate::grid::{Point, RectQuery};
use crate::stats::Rational;
use crate::wavelet::depth_for;

/// Leaf capacity of the dynamic bitmap, in bits.
const LEAF_CAP: u32 = 512;

// ---------------------------------------------------------------------------
// Dynamic bitmap: balanced (AVL) tree over bit blocks with subtree
// bit- and one-counts.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Node {
    Leaf { words: Vec<u64>, len: u32, ones: u32 },
    Int { len: u64, ones: u64, height: u8, l: Box<Node>, r: Box<Node> },
}

impl Node {
    fn len(&self) -> u64 {
        match self {
            Node::Leaf { len, .. } => *len as u64,
            Node::Int { len, .. } => *len,
        }
    }

    fn ones(&self) -> u64 {
        match self {
            Node::Leaf { ones, .. } => *ones as u64,
            Node::Int { ones, .. } => *ones,
        }
    }

    fn height(&self) -> u8 {
        match self {
            Node::Leaf { .. } => 1,
            Node::Int { height, .. } => *height,
        }
    }
}

fn mk(l: Box<Node>, r: Box<Node>) -> Box<Node> {
    Box::new(Node::Int {
        len: l.len() + r.len(),
        ones: l.ones() + r.ones(),
        height: l.height().max(r.height()) + 1,
        l,
        r,
    })
}

fn children(node: Box<Node>) -> (Box<Node>, Box<Node>) {
    match *node {
        Node::Int { l, r, .. } => (l, r),
        Node::Leaf { .. } => unreachable!("leaf has no children"),
    }
}

/// Standard AVL rebalance of two subtrees whose heights differ by at
/// most two.
fn balance(l: Box<Node>, r: Box<Node>) -> Box<Node> {
    if l.height() > r.height() + 1 {
        let (ll, lr) = children(l);
        if lr.height() > ll.height() {
            let (lrl, lrr) = children(lr);
            mk(mk(ll, lrl), mk(lrr, r))
        } else {
            mk(ll, mk(lr, r))
        }
    } else if r.height() > l.height() + 1 {
        let (rl, rr) = children(r);
        if rl.height() > rr.height() {
            let (rll, rlr) = children(rl);
            mk(mk(l, rll), mk(rlr, rr))
        } else {
            mk(mk(l, rl), rr)
        }
    } else {
        mk(l, r)
    }
}

fn leaf_get(words: &[u64], pos: u32) -> bool {
    words[(pos / 64) as usize] >> (pos % 64) & 1 == 1
}

fn leaf_insert(words: &mut Vec<u64>, len: u32, pos: u32, bit: bool) {
    if ((len + 1).div_ceil(64) as usize) > words.len() {
        words.push(0);
    }
    let wi = (pos / 64) as usize;
    let off = pos % 64;
    let mut carry = words[wi] >> 63;
    let low_mask = if off == 0 { 0 } else { (1u64 << off) - 1 };
    let low = words[wi] & low_mask;
    let high = (words[wi] & !low_mask) << 1;
    words[wi] = low | high | ((bit as u64) << off);
    for w in words[wi + 1..].iter_mut() {
        let c = *w >> 63;
        *w = (*w << 1) | carry;
        carry = c;
    }
}

fn leaf_remove(words: &mut [u64], pos: u32) -> bool {
    let wi = (pos / 64) as usize;
    let off = pos % 64;
    let bit = leaf_get(words, pos);
    let low_mask = if off == 0 { 0 } else { (1u64 << off) - 1 };
    let low = words[wi] & low_mask;
    let high = if off == 63 { 0 } else { (words[wi] >> (off + 1)) << off };
    words[wi] = low | high;
    for j in wi + 1..words.len() {
        let b = words[j] & 1;
        words[j - 1] |= b << 63;
        words[j] >>= 1;
    }
    bit
}

/// Count of `bit` among the first `pos` bits.
fn leaf_rank(words: &[u64], pos: u32, bit: bool) -> u32 {
    let mut ones = 0u32;
    let full = (pos / 64) as usize;
    for w in &words[..full] {
        ones += w.count_ones();
    }
    if pos % 64 != 0 {
        ones += (words[full] & ((1u64 << (pos % 64)) - 1)).count_ones();
    }
    if bit {
        ones
    } else {
        pos - ones
    }
}

/// Position of the `k`-th (0-based) occurrence of `bit`.
fn leaf_select(words: &[u64], len: u32, k: u32, bit: bool) -> u32 {
    let mut seen = 0u32;
    for pos in 0..len {
        if leaf_get(words, pos) == bit {
            if seen == k {
                return pos;
            }
            seen += 1;
        }
    }
    unreachable!("select out of range in leaf")
}

fn leaf_split(words: &[u64], len: u32) -> Box<Node> {
    let mid = len / 2;
    let cut = |from: u32, to: u32| {
        let mut out = vec![0u64; ((to - from).div_ceil(64).max(1)) as usize];
        let mut ones = 0u32;
        for (i, pos) in (from..to).enumerate() {
            if leaf_get(words, pos) {
                out[i / 64] |= 1 << (i % 64);
                ones += 1;
            }
        }
        Box::new(Node::Leaf { words: out, len: to - from, ones })
    };
    mk(cut(0, mid), cut(mid, len))
}

fn node_insert(node: Box<Node>, pos: u64, bit: bool, touched: &mut u64) -> Box<Node> {
    *touched += 1;
    match *node {
        Node::Leaf { mut words, len, ones } => {
            leaf_insert(&mut words, len, pos as u32, bit);
            let (len, ones) = (len + 1, ones + bit as u32);
            if len > LEAF_CAP {
                leaf_split(&words, len)
            } else {
                Box::new(Node::Leaf { words, len, ones })
            }
        }
        Node::Int { l, r, .. } => {
            if pos <= l.len() {
                balance(node_insert(l, pos, bit, touched), r)
            } else {
                let off = l.len();
                balance(l, node_insert(r, pos - off, bit, touched))
            }
        }
    }
}

fn node_remove(node: Box<Node>, pos: u64, touched: &mut u64) -> (Option<Box<Node>>, bool) {
    *touched += 1;
    match *node {
        Node::Leaf { mut words, len, ones } => {
            let bit = leaf_remove(&mut words, pos as u32);
            let (len, ones) = (len - 1, ones - bit as u32);
            if len == 0 {
                (None, bit)
            } else {
                (Some(Box::new(Node::Leaf { words, len, ones })), bit)
            }
        }
        Node::Int { l, r, .. } => {
            if pos < l.len() {
                let (nl, bit) = node_remove(l, pos, touched);
                let node = match nl {
                    None => r,
                    Some(nl) => balance(nl, r),
                };
                (Some(node), bit)
            } else {
                let off = l.len();
                let (nr, bit) = node_remove(r, pos - off, touched);
                let node = match nr {
                    None => l,
                    Some(nr) => balance(l, nr),
                };
                (Some(node), bit)
            }
        }
    }
}

/// Dynamic bitmap with insert/delete at arbitrary positions and
/// rank/select over the current contents.
#[derive(Debug, Clone, Default)]
pub struct DynamicBits {
    root: Option<Box<Node>>,
}

impl DynamicBits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.root.as_ref().map_or(0, |n| n.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count_ones(&self) -> u64 {
        self.root.as_ref().map_or(0, |n| n.ones())
    }

    /// Inserts `bit` at `pos`, shifting subsequent positions up by one.
    /// Returns the number of tree nodes touched.
    pub fn insert(&mut self, pos: u64, bit: bool) -> u64 {
        assert!(pos <= self.len(), "insert position out of range");
        let mut touched = 0;
        self.root = Some(match self.root.take() {
            None => Box::new(Node::Leaf { words: vec![bit as u64], len: 1, ones: bit as u32 }),
            Some(root) => node_insert(root, pos, bit, &mut touched),
        });
        touched.max(1)
    }

    /// Removes the bit at `pos`; returns `(bit, touched-node count)`.
    pub fn remove(&mut self, pos: u64) -> (bool, u64) {
        assert!(pos < self.len(), "remove position out of range");
        let mut touched = 0;
        let (root, bit) = node_remove(self.root.take().expect("non-empty"), pos, &mut touched);
        self.root = root;
        (bit, touched.max(1))
    }

    pub fn get(&self, pos: u64) -> bool {
        let mut node = self.root.as_deref().expect("position out of range");
        let mut pos = pos;
        loop {
            match node {
                Node::Leaf { words, .. } => return leaf_get(words, pos as u32),
                Node::Int { l, r, .. } => {
                    if pos < l.len() {
                        node = l;
                    } else {
                        pos -= l.len();
                        node = r;
                    }
                }
            }
        }
    }

    /// Count of `bit` among the first `pos` bits (half-open).
    pub fn rank(&self, bit: bool, pos: u64) -> u64 {
        debug_assert!(pos <= self.len());
        let mut acc = 0u64;
        let mut pos = pos;
        let mut cur = match self.root.as_deref() {
            None => return 0,
            Some(n) => n,
        };
        loop {
            match cur {
                Node::Leaf { words, .. } => {
                    return acc + leaf_rank(words, pos as u32, bit) as u64;
                }
                Node::Int { l, r, .. } => {
                    if pos <= l.len() {
                        cur = l;
                    } else {
                        acc += if bit { l.ones() } else { l.len() - l.ones() };
                        pos -= l.len();
                        cur = r;
                    }
                }
            }
        }
    }

    /// Position of the `k`-th (0-based) occurrence of `bit`.
    pub fn select(&self, bit: bool, k: u64) -> u64 {
        let mut off = 0u64;
        let mut k = k;
        let mut cur = self.root.as_deref().expect("select on empty bitmap");
        loop {
            match cur {
                Node::Leaf { words, len, .. } => {
                    return off + leaf_select(words, *len, k as u32, bit) as u64;
                }
                Node::Int { l, r, .. } => {
                    let in_left = if bit { l.ones() } else { l.len() - l.ones() };
                    if k < in_left {
                        cur = l;
                    } else {
                        k -= in_left;
                        off += l.len();
                        cur = r;
                    }
                }
            }
        }
    }

    /// Re-verifies cached subtree counts bottom-up (structural audit).
    pub fn audit(&self) {
        fn rec(node: &Node) -> (u64, u64) {
            match node {
                Node::Leaf { words, len, ones } => {
                    let counted: u32 =
                        (0..*len).map(|p| leaf_get(words, p) as u32).sum();
                    assert_eq!(counted, *ones, "leaf one-count drift");
                    (*len as u64, *ones as u64)
                }
                Node::Int { len, ones, height, l, r } => {
                    let (ll, lo) = rec(l);
                    let (rl, ro) = rec(r);
                    assert_eq!(ll + rl, *len, "subtree bit-count drift");
                    assert_eq!(lo + ro, *ones, "subtree one-count drift");
                    assert_eq!(*height, l.height().max(r.height()) + 1);
                    assert!(l.height().abs_diff(r.height()) <= 1, "AVL imbalance");
                    (*len, *ones)
                }
            }
        }
        if let Some(root) = &self.root {
            rec(root);
        }
    }
}

// ---------------------------------------------------------------------------
// Per-node dynamic aggregates: variable-length blocks with cached
// sum / squared sum / min / max. Blocks never split or merge wholesale:
// empty blocks are created/removed and single values migrate between
// neighbors, keeping every block at most 2*tau and every adjacent pair
// at least tau.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct Blk {
    vals: Vec<u64>,
    sum: u128,
    sq: u128,
    min: u64,
    max: u64,
}

impl Blk {
    fn recompute(&mut self) {
        self.sum = self.vals.iter().map(|&v| v as u128).sum();
        self.sq = self.vals.iter().map(|&v| (v as u128) * (v as u128)).sum();
        self.min = self.vals.iter().copied().min().unwrap_or(u64::MAX);
        self.max = self.vals.iter().copied().max().unwrap_or(0);
    }
}

#[derive(Debug, Clone)]
struct AggBlocks {
    tau: usize,
    blocks: Vec<Blk>,
}

impl AggBlocks {
    fn new(tau: u64) -> Self {
        AggBlocks { tau: tau.max(1) as usize, blocks: Vec::new() }
    }

    fn locate(&self, pos: u64) -> (usize, usize) {
        let mut pos = pos as usize;
        for (bi, b) in self.blocks.iter().enumerate() {
            if pos <= b.vals.len() && (pos < b.vals.len() || bi + 1 == self.blocks.len()) {
                return (bi, pos);
            }
            pos -= b.vals.len();
        }
        (self.blocks.len(), pos)
    }

    fn insert(&mut self, pos: u64, w: u64) {
        if self.blocks.is_empty() {
            self.blocks.push(Blk::default());
        }
        let (bi, off) = self.locate(pos);
        let bi = bi.min(self.blocks.len() - 1);
        self.blocks[bi].vals.insert(off, w);
        self.blocks[bi].recompute();
        self.repair(bi);
    }

    fn remove(&mut self, pos: u64) -> u64 {
        let (bi, off) = self.locate(pos);
        let w = self.blocks[bi].vals.remove(off);
        self.blocks[bi].recompute();
        self.repair(bi);
        w
    }

    /// Restores the block-length discipline around block `bi` by single
    /// value migrations and empty-block creation/removal.
    fn repair(&mut self, bi: usize) {
        // Overflow: peel single values into a (possibly fresh) right
        // neighbor until within 2*tau.
        let mut bi = bi;
        while self.blocks[bi].vals.len() > 2 * self.tau {
            if bi + 1 == self.blocks.len() || self.blocks[bi + 1].vals.len() >= 2 * self.tau {
                self.blocks.insert(bi + 1, Blk::default());
            }
            let v = self.blocks[bi].vals.pop().expect("overfull block");
            self.blocks[bi + 1].vals.insert(0, v);
            self.blocks[bi].recompute();
            self.blocks[bi + 1].recompute();
        }
        // Underflow: fold a too-small pair together one value at a time,
        // then drop the emptied block.
        loop {
            if self.blocks.len() > 1 && self.blocks[bi].vals.is_empty() {
                self.blocks.remove(bi);
                bi = bi.saturating_sub(1);
                continue;
            }
            let pair = (bi > 0
                && self.blocks[bi - 1].vals.len() + self.blocks[bi].vals.len() < self.tau)
                .then(|| bi - 1)
                .or_else(|| {
                    (bi + 1 < self.blocks.len()
                        && self.blocks[bi].vals.len() + self.blocks[bi + 1].vals.len() < self.tau)
                        .then_some(bi)
                });
            let Some(left) = pair else { break };
            let mut moved = std::mem::take(&mut self.blocks[left + 1].vals);
            self.blocks[left].vals.append(&mut moved);
            self.blocks.remove(left + 1);
            self.blocks[left].recompute();
            bi = left;
        }
        if self.blocks.len() == 1 && self.blocks[0].vals.is_empty() {
            self.blocks.clear();
        }
    }

    fn len(&self) -> u64 {
        self.blocks.iter().map(|b| b.vals.len() as u64).sum()
    }

    fn get(&self, pos: u64) -> u64 {
        let (bi, off) = self.locate(pos);
        self.blocks[bi].vals[off]
    }

    /// `(count, sum, squared sum)` over positions `[lo, hi)`.
    fn moments(&self, lo: u64, hi: u64) -> (u64, u128, u128) {
        let (mut sum, mut sq) = (0u128, 0u128);
        let mut base = 0u64;
        for b in &self.blocks {
            let blen = b.vals.len() as u64;
            let (s, e) = (lo.max(base), hi.min(base + blen));
            if s < e {
                if s == base && e == base + blen {
                    sum += b.sum;
                    sq += b.sq;
                } else {
                    for &v in &b.vals[(s - base) as usize..(e - base) as usize] {
                        sum += v as u128;
                        sq += (v as u128) * (v as u128);
                    }
                }
            }
            base += blen;
        }
        (hi.saturating_sub(lo), sum, sq)
    }

    /// Extreme value over `[lo, hi)` with the smallest position among
    /// ties; `largest` flips min to max.
    fn extreme(&self, lo: u64, hi: u64, largest: bool) -> Option<(u64, u64)> {
        if lo >= hi {
            return None;
        }
        let better = |a: u64, b: u64| if largest { a > b } else { a < b };
        let mut best: Option<(u64, u64)> = None;
        let mut base = 0u64;
        for b in &self.blocks {
            let blen = b.vals.len() as u64;
            let (s, e) = (lo.max(base), hi.min(base + blen));
            if s < e {
                let whole = s == base && e == base + blen;
                let block_best = if largest { b.max } else { b.min };
                if whole && best.is_some_and(|(v, _)| !better(block_best, v)) {
                    base += blen;
                    continue;
                }
                for off in (s - base)..(e - base) {
                    let v = b.vals[off as usize];
                    if best.is_none_or(|(bv, _)| better(v, bv)) {
                        best = Some((v, base + off));
                    }
                }
            }
            base += blen;
        }
        best
    }

    fn audit(&self) {
        for b in &self.blocks {
            assert!(b.vals.len() <= 2 * self.tau, "block over capacity");
            assert!(!b.vals.is_empty(), "empty block retained");
            let mut fresh = b.clone();
            fresh.recompute();
            assert_eq!((fresh.sum, fresh.sq, fresh.min, fresh.max), (b.sum, b.sq, b.min, b.max));
        }
        for pair in self.blocks.windows(2) {
            assert!(pair[0].vals.len() + pair[1].vals.len() >= self.tau, "pair under tau");
        }
    }
}

// ---------------------------------------------------------------------------
// Order-statistic structure over x in [0, U): Fenwick tree of counts.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct XCounts {
    tree: Vec<u64>,
}

impl XCounts {
    fn new(universe: u64) -> Self {
        XCounts { tree: vec![0; universe as usize + 1] }
    }

    fn add(&mut self, x: u64, delta: i64) {
        let mut i = x as usize + 1;
        while i < self.tree.len() {
            self.tree[i] = (self.tree[i] as i64 + delta) as u64;
            i += i & i.wrapping_neg();
        }
    }

    /// Points with x-coordinate `< x`.
    fn count_lt(&self, x: u64) -> u64 {
        let mut i = (x as usize).min(self.tree.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// The x-coordinate of the `k`-th (0-based) point in x-order.
    fn select(&self, k: u64) -> u64 {
        let mut pos = 0usize;
        let mut rem = k;
        let mut mask = self.tree.len().next_power_of_two() >> 1;
        while mask > 0 {
            let next = pos + mask;
            if next < self.tree.len() && self.tree[next] <= rem {
                rem -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos as u64
    }
}

// ---------------------------------------------------------------------------
// Dynamic grid
// ---------------------------------------------------------------------------

/// Wavelet tree of depth `ceil(log2 U)` over y, one dynamic bitmap per
/// internal node, an order-statistic structure over x, and (optionally)
/// per-node aggregates over the weights. The element order at every node
/// is by `(x, y, arrival)`, matching the static rank convention.
#[derive(Debug, Clone)]
pub struct DynamicGrid {
    universe: u64,
    depth: u32,
    /// Bitmaps keyed by heap id (`2^d + j` for the node at depth `d`
    /// covering the `j`-th symbol range); internal depths only.
    bits: BTreeMap<u64, DynamicBits>,
    xs: XCounts,
    /// Aggregates per node (all depths, including leaves), or empty when
    /// the grid only serves counting.
    aggs: BTreeMap<u64, AggBlocks>,
    with_aggs: bool,
    tau: u64,
    n: u64,
    /// Tree nodes touched by the most recent update.
    last_touched: u64,
}

impl DynamicGrid {
    pub fn new(universe: u64, with_aggs: bool, tau: u64) -> Self {
        let universe = universe.max(1);
        DynamicGrid {
            universe,
            depth: depth_for(universe),
            bits: BTreeMap::new(),
            xs: XCounts::new(universe),
            aggs: BTreeMap::new(),
            with_aggs,
            tau: tau.max(1),
            n: 0,
            last_touched: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn last_touched(&self) -> u64 {
        self.last_touched
    }

    fn clamp(&self, q: &RectQuery) -> Option<(u64, u64, u64, u64)> {
        let x1 = q.x1.min(self.universe - 1);
        let y1 = q.y1.min(self.universe - 1);
        (q.x0 <= x1 && q.y0 <= y1).then_some((q.x0, x1, q.y0, y1))
    }

    /// Root position where `(x, y)` inserts: after every point ordered
    /// before it by `(x, y, arrival)`.
    fn insert_pos(&self, x: u64, y: u64) -> u64 {
        self.xs.count_lt(x) + self.count(&RectQuery::new(x, x, 0, y))
    }

    /// Inserts the point, threading it down the wavelet tree.
    pub fn insert(&mut self, x: u64, y: u64, w: u64) -> Result<()> {
        if x >= self.universe || y >= self.universe {
            return Err(Error::UniverseExceeded { value: x.max(y), bound: self.universe });
        }
        let mut touched = 0u64;
        let mut pos = self.insert_pos(x, y);
        self.xs.add(x, 1);
        touched += self.depth as u64; // Fenwick path
        let mut id = 1u64;
        for d in 0..self.depth {
            let shift = self.depth - d - 1;
            let bit = y >> shift & 1 == 1;
            if self.with_aggs {
                self.agg_entry(id).insert(pos, w);
            }
            let bm = self.bits.entry(id).or_default();
            let child_pos = bm.rank(bit, pos);
            touched += bm.insert(pos, bit);
            pos = child_pos;
            id = 2 * id + bit as u64;
        }
        if self.with_aggs {
            self.agg_entry(id).insert(pos, w);
        }
        self.n += 1;
        self.last_touched = touched;
        Ok(())
    }

    fn agg_entry(&mut self, id: u64) -> &mut AggBlocks {
        let tau = self.tau;
        self.aggs.entry(id).or_insert_with(|| AggBlocks::new(tau))
    }

    /// Removes the last copy (in `(x, y, arrival)` order) of the point;
    /// returns its weight (0 when aggregates are off).
    pub fn remove_last(&mut self, x: u64, y: u64) -> Result<u64> {
        let copies = self.count(&RectQuery::new(x, x, y, y));
        if copies == 0 {
            return Err(Error::PointNotFound { x, y });
        }
        let below = self.count(&RectQuery::new(x, x, 0, y)) - copies;
        let mut pos = self.xs.count_lt(x) + below + copies - 1;
        let mut touched = 0u64;
        self.xs.add(x, -1);
        touched += self.depth as u64;
        let mut id = 1u64;
        let mut w = 0u64;
        for _ in 0..self.depth {
            if self.with_aggs {
                w = self.aggs.get_mut(&id).expect("aggregates on path").remove(pos);
            }
            let bm = self.bits.get_mut(&id).expect("bitmap on path");
            let child_pos = bm.rank(bm.get(pos), pos);
            let (bit, t) = bm.remove(pos);
            touched += t;
            pos = child_pos;
            id = 2 * id + bit as u64;
        }
        if self.with_aggs {
            w = self.aggs.get_mut(&id).expect("leaf aggregates").remove(pos);
        }
        self.n -= 1;
        self.last_touched = touched;
        Ok(w)
    }

    /// The point at root position `p` (x-order).
    fn point_at(&self, p: u64) -> Point {
        let x = self.xs.select(p);
        let mut id = 1u64;
        let mut pos = p;
        let mut y = 0u64;
        for _ in 0..self.depth {
            let bm = &self.bits[&id];
            let bit = bm.get(pos);
            pos = bm.rank(bit, pos);
            y = y << 1 | bit as u64;
            id = 2 * id + bit as u64;
        }
        let w = if self.with_aggs { self.aggs[&id].get(pos) } else { 0 };
        Point::new(x, y, w)
    }

    /// Canonical decomposition of the y-range with the remapped x-range
    /// `[lo, hi)` per covered node; `f(id, depth, sym, lo, hi)`.
    fn decompose<F: FnMut(u64, u32, u64, u64, u64)>(&self, q: &RectQuery, f: &mut F) {
        let Some((x0, x1, y0, y1)) = self.clamp(q) else { return };
        let lo = self.xs.count_lt(x0);
        let hi = self.xs.count_lt(x1 + 1);
        if lo < hi {
            self.dec_rec(1, 0, 0, y0, y1, lo, hi, f);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dec_rec<F: FnMut(u64, u32, u64, u64, u64)>(
        &self,
        id: u64,
        d: u32,
        sym: u64,
        y0: u64,
        y1: u64,
        lo: u64,
        hi: u64,
        f: &mut F,
    ) {
        if lo >= hi {
            return;
        }
        let width = 1u64 << (self.depth - d);
        let (slo, shi) = (sym * width, sym * width + width - 1);
        if y1 < slo || shi < y0 {
            return;
        }
        if y0 <= slo && shi <= y1 {
            f(id, d, sym, lo, hi);
            return;
        }
        let bm = match self.bits.get(&id) {
            Some(b) => b,
            None => return,
        };
        self.dec_rec(2 * id, d + 1, 2 * sym, y0, y1, bm.rank(false, lo), bm.rank(false, hi), f);
        self.dec_rec(
            2 * id + 1,
            d + 1,
            2 * sym + 1,
            y0,
            y1,
            bm.rank(true, lo),
            bm.rank(true, hi),
            f,
        );
    }

    pub fn count(&self, q: &RectQuery) -> u64 {
        let mut c = 0;
        self.decompose(q, &mut |_, _, _, lo, hi| c += hi - lo);
        c
    }

    /// Points in the rectangle, in decreasing `(y, x, arrival)` order
    /// (the static report order).
    pub fn report(&self, q: &RectQuery) -> Vec<Point> {
        let Some((x0, x1, y0, y1)) = self.clamp(q) else { return Vec::new() };
        let lo = self.xs.count_lt(x0);
        let hi = self.xs.count_lt(x1 + 1);
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.report_rec(1, 0, 0, y0, y1, lo, hi, &mut path, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn report_rec(
        &self,
        id: u64,
        d: u32,
        sym: u64,
        y0: u64,
        y1: u64,
        lo: u64,
        hi: u64,
        path: &mut Vec<(u64, bool)>,
        out: &mut Vec<Point>,
    ) {
        if lo >= hi {
            return;
        }
        let width = 1u64 << (self.depth - d);
        let (slo, shi) = (sym * width, sym * width + width - 1);
        if y1 < slo || shi < y0 {
            return;
        }
        if d == self.depth {
            for p in (lo..hi).rev() {
                out.push(self.point_at(self.unreduce(path, p)));
            }
            return;
        }
        let bm = match self.bits.get(&id) {
            Some(b) => b,
            None => return,
        };
        // Descending y: one-child first.
        path.push((id, true));
        self.report_rec(
            2 * id + 1,
            d + 1,
            2 * sym + 1,
            y0,
            y1,
            bm.rank(true, lo),
            bm.rank(true, hi),
            path,
            out,
        );
        path.pop();
        path.push((id, false));
        self.report_rec(
            2 * id,
            d + 1,
            2 * sym,
            y0,
            y1,
            bm.rank(false, lo),
            bm.rank(false, hi),
            path,
            out,
        );
        path.pop();
    }

    /// Maps a node-local position back to a root position along `path`.
    fn unreduce(&self, path: &[(u64, bool)], pos: u64) -> u64 {
        let mut pos = pos;
        for &(id, bit) in path.iter().rev() {
            pos = self.bits[&id].select(bit, pos);
        }
        pos
    }

    pub fn sum(&self, q: &RectQuery) -> (u64, u128, u128) {
        assert!(self.with_aggs, "grid built without aggregates");
        let (mut c, mut s, mut s2) = (0u64, 0u128, 0u128);
        self.decompose(q, &mut |id, _, _, lo, hi| {
            let (cc, ss, qq) = self.aggs[&id].moments(lo, hi);
            c += cc;
            s += ss;
            s2 += qq;
        });
        (c, s, s2)
    }

    pub fn avg(&self, q: &RectQuery) -> Option<Rational> {
        let (c, s, _) = self.sum(q);
        (c > 0).then(|| Rational::new(s as i128, c as i128))
    }

    pub fn var(&self, q: &RectQuery) -> Option<Rational> {
        let (c, s, s2) = self.sum(q);
        (c > 0).then(|| {
            let (c, s, s2) = (c as i128, s as i128, s2 as i128);
            Rational::new(c * s2 - s * s, c * c)
        })
    }

    /// Minimum (or maximum) weight with its witness point; among equal
    /// weights the smallest x-rank wins, as in the static index.
    pub fn extreme(&self, q: &RectQuery, largest: bool) -> Option<(u64, Point)> {
        assert!(self.with_aggs, "grid built without aggregates");
        let Some((x0, x1, y0, y1)) = self.clamp(q) else { return None };
        let lo = self.xs.count_lt(x0);
        let hi = self.xs.count_lt(x1 + 1);
        let mut path = Vec::new();
        let mut best: Option<(u64, u64)> = None;
        self.extreme_rec(1, 0, 0, y0, y1, lo, hi, largest, &mut path, &mut best);
        best.map(|(w, p)| (w, self.point_at(p)))
    }

    #[allow(clippy::too_many_arguments)]
    fn extreme_rec(
        &self,
        id: u64,
        d: u32,
        sym: u64,
        y0: u64,
        y1: u64,
        lo: u64,
        hi: u64,
        largest: bool,
        path: &mut Vec<(u64, bool)>,
        best: &mut Option<(u64, u64)>,
    ) {
        if lo >= hi {
            return;
        }
        let width = 1u64 << (self.depth - d);
        let (slo, shi) = (sym * width, sym * width + width - 1);
        if y1 < slo || shi < y0 {
            return;
        }
        if y0 <= slo && shi <= y1 {
            if let Some((w, local)) = self.aggs[&id].extreme(lo, hi, largest) {
                let root = self.unreduce(path, local);
                let replace = match best {
                    None => true,
                    Some((bw, bp)) => {
                        if largest {
                            w > *bw || (w == *bw && root < *bp)
                        } else {
                            w < *bw || (w == *bw && root < *bp)
                        }
                    }
                };
                if replace {
                    *best = Some((w, root));
                }
            }
            return;
        }
        let bm = match self.bits.get(&id) {
            Some(b) => b,
            None => return,
        };
        path.push((id, false));
        self.extreme_rec(
            2 * id,
            d + 1,
            2 * sym,
            y0,
            y1,
            bm.rank(false, lo),
            bm.rank(false, hi),
            largest,
            path,
            best,
        );
        path.pop();
        path.push((id, true));
        self.extreme_rec(
            2 * id + 1,
            d + 1,
            2 * sym + 1,
            y0,
            y1,
            bm.rank(true, lo),
            bm.rank(true, hi),
            largest,
            path,
            best,
        );
        path.pop();
    }

    /// Maximal points (no other point dominates in both coordinates),
    /// in decreasing y order. At a shared y only the largest-x copy can
    /// be maximal.
    pub fn dominance(&self, q: &RectQuery) -> Vec<Point> {
        let Some((x0, x1, y0, y1)) = self.clamp(q) else { return Vec::new() };
        let lo = self.xs.count_lt(x0);
        let hi = self.xs.count_lt(x1 + 1);
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.stair(1, 0, 0, y0, y1, lo as i64 - 1, hi as i64 - 1, false, false, &mut path, &mut out);
        out.iter().map(|&p| self.point_at(p)).collect()
    }

    /// Staircase DFS with a moving x bound in interval form `(a, b]`;
    /// returns the local position of the last reported element.
    #[allow(clippy::too_many_arguments)]
    fn stair(
        &self,
        id: u64,
        d: u32,
        sym: u64,
        y0: u64,
        y1: u64,
        a: i64,
        b: i64,
        ascending: bool,
        upper: bool,
        path: &mut Vec<(u64, bool)>,
        out: &mut Vec<u64>,
    ) -> Option<i64> {
        if b <= a {
            return None;
        }
        let width = 1u64 << (self.depth - d);
        let (slo, shi) = (sym * width, sym * width + width - 1);
        if y1 < slo || shi < y0 {
            return None;
        }
        if d == self.depth {
            // All leaf elements share y = sym; only the one nearest the
            // moving bound can be on the staircase.
            let pos = if upper { a + 1 } else { b };
            out.push(self.unreduce(path, pos as u64));
            return Some(pos);
        }
        let bm = self.bits.get(&id)?;
        let reduce = |bit: bool, i: i64| {
            if i < 0 {
                -1
            } else {
                bm.rank(bit, i as u64 + 1) as i64 - 1
            }
        };
        let order = if ascending { [false, true] } else { [true, false] };
        let (mut a, mut b) = (a, b);
        let mut last = None;
        for bit in order {
            path.push((id, bit));
            let child = self.stair(
                2 * id + bit as u64,
                d + 1,
                2 * sym + bit as u64,
                y0,
                y1,
                reduce(bit, a),
                reduce(bit, b),
                ascending,
                upper,
                path,
                out,
            );
            path.pop();
            if let Some(cp) = child {
                let pos = bm.select(bit, cp as u64) as i64;
                if upper {
                    b = pos - 1;
                } else {
                    a = pos;
                }
                last = Some(pos);
            }
        }
        last
    }

    /// Points visible from `(qx, qy)` toward `dir`, sorted by
    /// `(x, y, w)`. A point is visible when the closed rectangle it spans
    /// with the query corner contains no other point.
    pub fn visibility(&self, qx: u64, qy: u64, dir: Corner) -> Vec<Point> {
        let hi = self.universe - 1;
        let (rect, ascending, upper) = match dir {
            Corner::SouthWest => (RectQuery::new(0, qx, 0, qy), false, false),
            Corner::NorthEast => (RectQuery::new(qx, hi, qy, hi), true, true),
            Corner::NorthWest => (RectQuery::new(0, qx, qy, hi), true, false),
            Corner::SouthEast => (RectQuery::new(qx, hi, 0, qy), false, true),
        };
        let Some((x0, x1, y0, y1)) = self.clamp(&rect) else { return Vec::new() };
        let lo = self.xs.count_lt(x0);
        let hhi = self.xs.count_lt(x1 + 1);
        let mut cand = Vec::new();
        let mut path = Vec::new();
        self.stair(
            1,
            0,
            0,
            y0,
            y1,
            lo as i64 - 1,
            hhi as i64 - 1,
            ascending,
            upper,
            &mut path,
            &mut cand,
        );
        let mut out: Vec<Point> = cand
            .into_iter()
            .map(|p| self.point_at(p))
            .filter(|p| {
                let span =
                    RectQuery::new(p.x.min(qx), p.x.max(qx), p.y.min(qy), p.y.max(qy));
                self.count(&span) == 1
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Structural audit: bitmap counters, level consistency, aggregate
    /// caches and block discipline re-verified.
    pub fn audit(&self) {
        let root_len = self.bits.get(&1).map_or(if self.depth == 0 { self.n } else { 0 }, |b| b.len());
        if self.depth > 0 {
            assert_eq!(root_len, self.n, "root length drift");
        }
        for (&id, bm) in &self.bits {
            bm.audit();
            let zeros = bm.len() - bm.count_ones();
            let child_len = |cid: u64| {
                self.bits
                    .get(&cid)
                    .map(|b| b.len())
                    .or_else(|| self.aggs.get(&cid).map(|a| a.len()))
            };
            if let Some(l) = child_len(2 * id) {
                assert_eq!(l, zeros, "zero-child length drift at {id}");
            }
            if let Some(l) = child_len(2 * id + 1) {
                assert_eq!(l, bm.count_ones(), "one-child length drift at {id}");
            }
            if self.with_aggs {
                assert_eq!(self.aggs[&id].len(), bm.len(), "aggregate length drift at {id}");
            }
        }
        for agg in self.aggs.values() {
            agg.audit();
        }
    }
}

// ---------------------------------------------------------------------------
// Dynamic value tree
// ---------------------------------------------------------------------------

/// Value-domain tree over raw `[0, W)` (no rank mapping); sampled nodes
/// (every `ceil(log2 ell)` levels, plus every leaf) carry a dynamic grid
/// of their points on the global universe.
#[derive(Debug, Clone)]
pub struct DynamicValueTree {
    weight_bound: u64,
    universe: u64,
    depth: u32,
    step: u32,
    grids: BTreeMap<u64, DynamicGrid>,
}

impl DynamicValueTree {
    pub fn new(universe: u64, weight_bound: u64, ell: u64) -> Self {
        let weight_bound = weight_bound.max(1);
        DynamicValueTree {
            weight_bound,
            universe,
            depth: depth_for(weight_bound),
            step: depth_for(ell.max(2)).max(1),
            grids: BTreeMap::new(),
        }
    }

    fn sampled(&self, d: u32) -> bool {
        d > 0 && (d % self.step == 0 || d == self.depth)
    }

    fn path_ids(&self, w: u64) -> Vec<u64> {
        (1..=self.depth)
            .filter(|&d| self.sampled(d))
            .map(|d| (1u64 << d) + (w >> (self.depth - d)))
            .collect()
    }

    pub fn insert(&mut self, x: u64, y: u64, w: u64) -> Result<()> {
        if w >= self.weight_bound {
            return Err(Error::UniverseExceeded { value: w, bound: self.weight_bound });
        }
        for id in self.path_ids(w) {
            let universe = self.universe;
            self.grids
                .entry(id)
                .or_insert_with(|| DynamicGrid::new(universe, false, 1))
                .insert(x, y, 0)?;
        }
        Ok(())
    }

    pub fn remove(&mut self, x: u64, y: u64, w: u64) -> Result<()> {
        for id in self.path_ids(w) {
            self.grids.get_mut(&id).ok_or(Error::PointNotFound { x, y })?.remove_last(x, y)?;
        }
        Ok(())
    }

    /// Points of the node `(d, j)` inside the rectangle; `total` is the
    /// whole-rectangle count (used for the root).
    fn node_count(&self, d: u32, j: u64, q: &RectQuery, total: u64) -> u64 {
        if d == 0 {
            return total;
        }
        if self.sampled(d) {
            return self.grids.get(&((1u64 << d) + j)).map_or(0, |g| g.count(q));
        }
        self.node_count(d + 1, 2 * j, q, total) + self.node_count(d + 1, 2 * j + 1, q, total)
    }

    /// The `k`-th smallest weight in the rectangle (1-based) with its
    /// frequency; `total` must be the rectangle count.
    pub fn quantile(&self, q: &RectQuery, k: u64, total: u64) -> Result<(u64, u64)> {
        if k == 0 || k > total {
            return Err(Error::RankOutOfRange { k, max: total });
        }
        if self.depth == 0 {
            return Ok((0, total));
        }
        let (mut d, mut j, mut k) = (0u32, 0u64, k);
        loop {
            let dn = (d + self.step).min(self.depth);
            let fan = 1u64 << (dn - d);
            let mut advanced = false;
            for t in 0..fan {
                let c = self.node_count(dn, j * fan + t, q, total);
                if k <= c {
                    if dn == self.depth {
                        return Ok((j * fan + t, c));
                    }
                    (d, j) = (dn, j * fan + t);
                    advanced = true;
                    break;
                }
                k -= c;
            }
            assert!(advanced, "k was validated against the total");
        }
    }

    pub fn count_value(&self, q: &RectQuery, w: u64) -> u64 {
        if w >= self.weight_bound {
            return 0;
        }
        if self.depth == 0 {
            // Single possible weight: the caller's total is not threaded
            // here, so count via the (absent) leaf grid convention.
            unreachable!("depth-0 value tree is special-cased by the caller");
        }
        self.grids.get(&((1u64 << self.depth) + w)).map_or(0, |g| g.count(q))
    }

    /// Smallest present weight `>= w` within the rectangle.
    pub fn successor(&self, q: &RectQuery, w: u64, total: u64) -> Option<u64> {
        if w >= self.weight_bound {
            return None;
        }
        if self.depth == 0 {
            return (total > 0).then_some(0);
        }
        self.scan(0, 0, q, w, true, total)
    }

    /// Largest present weight `<= w` within the rectangle.
    pub fn predecessor(&self, q: &RectQuery, w: u64, total: u64) -> Option<u64> {
        let w = w.min(self.weight_bound - 1);
        if self.depth == 0 {
            return (total > 0).then_some(0);
        }
        self.scan(0, 0, q, w, false, total)
    }

    fn scan(&self, d: u32, j: u64, q: &RectQuery, bound: u64, ascending: bool, total: u64) -> Option<u64> {
        let width = 1u64 << (self.depth - d);
        let (slo, shi) = (j * width, j * width + width - 1);
        if ascending && shi < bound || !ascending && slo > bound {
            return None;
        }
        if (d == 0 || self.sampled(d)) && self.node_count(d, j, q, total) == 0 {
            return None;
        }
        if d == self.depth {
            return Some(j);
        }
        let order = if ascending { [0, 1] } else { [1, 0] };
        order
            .into_iter()
            .find_map(|b| self.scan(d + 1, 2 * j + b, q, bound, ascending, total))
    }

    /// Exact alpha-majorities (weight, count), value-ascending, via
    /// quantile probing and leaf verification.
    pub fn majority_alpha(&self, q: &RectQuery, alpha: f64, total: u64) -> Vec<(u64, u64)> {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        if total == 0 {
            return Vec::new();
        }
        if self.depth == 0 {
            return if (total as f64) > alpha * total as f64 { vec![(0, total)] } else { Vec::new() };
        }
        let rounds = (1.0 / alpha).ceil() as u64;
        let mut cands = Vec::new();
        for i in 1..=rounds {
            let pos = (i as f64 * alpha * total as f64).ceil() as u64;
            if pos >= 1 && pos <= total {
                let (v, _) = self.quantile(q, pos, total).expect("position within count");
                cands.push(v);
            }
        }
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .filter_map(|v| {
                let f = self.count_value(q, v);
                ((f as f64) > alpha * total as f64).then_some((v, f))
            })
            .collect()
    }

    pub fn audit(&self) {
        for g in self.grids.values() {
            g.audit();
        }
    }
}

// ---------------------------------------------------------------------------
// Facade combining the main grid and the value tree
// ---------------------------------------------------------------------------

/// Dynamic index over a fixed `U x U` universe and weight bound `W`:
/// the aggregate-carrying main grid plus the value tree, kept in sync
/// under insert/delete/update.
#[derive(Debug, Clone)]
pub struct DynamicIndex {
    grid: DynamicGrid,
    vtree: DynamicValueTree,
    weight_bound: u64,
    ops: u64,
    audit_every: u64,
}

impl DynamicIndex {
    pub fn new(universe: u64, weight_bound: u64, t: u32, ell: u64) -> Self {
        let universe = universe.max(1);
        let weight_bound = weight_bound.max(1);
        let tau = (t.max(1) as u64) * depth_for(universe).max(1) as u64;
        DynamicIndex {
            grid: DynamicGrid::new(universe, true, tau),
            vtree: DynamicValueTree::new(universe, weight_bound, ell),
            weight_bound,
            ops: 0,
            audit_every: 64,
        }
    }

    pub fn len(&self) -> u64 {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn universe(&self) -> u64 {
        self.grid.universe()
    }

    pub fn weight_bound(&self) -> u64 {
        self.weight_bound
    }

    /// Tree nodes touched by the main grid during the last update.
    pub fn last_touched(&self) -> u64 {
        self.grid.last_touched()
    }

    fn after_op(&mut self) {
        self.ops += 1;
        if cfg!(debug_assertions) && self.ops % self.audit_every == 0 {
            self.audit();
        }
    }

    pub fn insert(&mut self, p: Point) -> Result<()> {
        if p.w >= self.weight_bound {
            return Err(Error::UniverseExceeded { value: p.w, bound: self.weight_bound });
        }
        self.grid.insert(p.x, p.y, p.w)?;
        self.vtree.insert(p.x, p.y, p.w)?;
        self.after_op();
        Ok(())
    }

    /// Deletes the most recently inserted copy of `(x, y)`; returns its
    /// weight.
    pub fn delete(&mut self, x: u64, y: u64) -> Result<u64> {
        let w = self.grid.remove_last(x, y)?;
        self.vtree.remove(x, y, w)?;
        self.after_op();
        Ok(w)
    }

    /// Value update: delete + reinsert with the new weight.
    pub fn update(&mut self, x: u64, y: u64, w: u64) -> Result<()> {
        if w >= self.weight_bound {
            return Err(Error::UniverseExceeded { value: w, bound: self.weight_bound });
        }
        let old = self.delete(x, y)?;
        let _ = old;
        self.insert(Point::new(x, y, w))
    }

    pub fn count(&self, q: &RectQuery) -> u64 {
        self.grid.count(q)
    }

    pub fn report(&self, q: &RectQuery) -> Vec<Point> {
        self.grid.report(q)
    }

    pub fn dominance(&self, q: &RectQuery) -> Vec<Point> {
        self.grid.dominance(q)
    }

    pub fn visibility(&self, qx: u64, qy: u64, dir: Corner) -> Vec<Point> {
        self.grid.visibility(qx, qy, dir)
    }

    pub fn sum(&self, q: &RectQuery) -> u128 {
        self.grid.sum(q).1
    }

    pub fn sum_sq(&self, q: &RectQuery) -> u128 {
        self.grid.sum(q).2
    }

    pub fn avg(&self, q: &RectQuery) -> Option<Rational> {
        self.grid.avg(q)
    }

    pub fn var(&self, q: &RectQuery) -> Option<Rational> {
        self.grid.var(q)
    }

    pub fn min(&self, q: &RectQuery) -> Option<(u64, Point)> {
        self.grid.extreme(q, false)
    }

    pub fn max(&self, q: &RectQuery) -> Option<(u64, Point)> {
        self.grid.extreme(q, true)
    }

    pub fn quantile(&self, q: &RectQuery, k: u64) -> Result<(u64, u64)> {
        self.vtree.quantile(q, k, self.count(q))
    }

    pub fn majority_alpha(&self, q: &RectQuery, alpha: f64) -> Vec<(u64, u64)> {
        self.vtree.majority_alpha(q, alpha, self.count(q))
    }

    pub fn successor(&self, q: &RectQuery, w: u64) -> Option<u64> {
        self.vtree.successor(q, w, self.count(q))
    }

    pub fn predecessor(&self, q: &RectQuery, w: u64) -> Option<u64> {
        self.vtree.predecessor(q, w, self.count(q))
    }

    pub fn count_value(&self, q: &RectQuery, w: u64) -> u64 {
        if self.vtree.depth == 0 {
            return if w == 0 { self.count(q) } else { 0 };
        }
        self.vtree.count_value(q, w)
    }

    /// Full structural audit of every component.
    pub fn audit(&self) {
        self.grid.audit();
        self.vtree.audit();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dynamic_bits_against_vec_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd1b1_75);
        let mut bits = DynamicBits::new();
        let mut oracle: Vec<bool> = Vec::new();
        for _ in 0..6000 {
            let op = rng.gen_range(0..10);
            if op < 6 || oracle.is_empty() {
                let pos = rng.gen_range(0..=oracle.len() as u64);
                let bit = rng.gen_bool(0.5);
                bits.insert(pos, bit);
                oracle.insert(pos as usize, bit);
            } else {
                let pos = rng.gen_range(0..oracle.len() as u64);
                let (bit, _) = bits.remove(pos);
                assert_eq!(bit, oracle.remove(pos as usize));
            }
            assert_eq!(bits.len(), oracle.len() as u64);
            let pos = rng.gen_range(0..=oracle.len() as u64);
            let want = oracle[..pos as usize].iter().filter(|&&b| b).count() as u64;
            assert_eq!(bits.rank(true, pos), want);
            assert_eq!(bits.rank(false, pos), pos - want);
            if !oracle.is_empty() {
                let p = rng.gen_range(0..oracle.len() as u64);
                assert_eq!(bits.get(p), oracle[p as usize]);
                let ones = bits.count_ones();
                if ones > 0 {
                    let k = rng.gen_range(0..ones);
                    let want = oracle
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b)
                        .nth(k as usize)
                        .unwrap()
                        .0 as u64;
                    assert_eq!(bits.select(true, k), want);
                }
            }
        }
        bits.audit();
    }

    #[test]
    fn trivial_examples() {
        let mut idx = DynamicIndex::new(16, 16, 1, 2);
        let full = RectQuery::new(0, 15, 0, 15);
        assert_eq!(idx.count(&full), 0);
        assert!(idx.report(&full).is_empty());
        assert_eq!(idx.min(&full), None);
        idx.insert(Point::new(3, 1, 5)).unwrap();
        assert_eq!(idx.count(&full), 1);
        idx.insert(Point::new(5, 4, 2)).unwrap();
        assert_eq!(idx.sum(&full), 7);
        // Chain: the top point dominates.
        idx.insert(Point::new(7, 9, 1)).unwrap();
        let dom = idx.dominance(&full);
        assert_eq!(dom, vec![Point::new(7, 9, 1)]);
        // Delete restores the previous state.
        idx.delete(7, 9).unwrap();
        assert_eq!(idx.count(&full), 2);
        assert!(idx.delete(7, 9).unwrap_err().to_string().contains("not found"));
        // Value update is visible to successor.
        let mut one = DynamicIndex::new(8, 16, 1, 2);
        one.insert(Point::new(2, 2, 3)).unwrap();
        assert_eq!(one.successor(&RectQuery::new(0, 7, 0, 7), 0), Some(3));
        one.update(2, 2, 9).unwrap();
        assert_eq!(one.successor(&RectQuery::new(0, 7, 0, 7), 0), Some(9));
        assert_eq!(one.successor(&RectQuery::new(0, 7, 0, 7), 10), None);
        // Quantile on {5, 2, 7, 2}.
        let mut q4 = DynamicIndex::new(64, 16, 1, 2);
        for p in [(10, 30, 5), (25, 12, 2), (40, 5, 7), (60, 20, 2)] {
            q4.insert(Point::new(p.0, p.1, p.2)).unwrap();
        }
        let f = RectQuery::new(0, 63, 0, 63);
        assert_eq!(q4.quantile(&f, 2).unwrap(), (2, 2));
        assert_eq!(q4.majority_alpha(&f, 0.4), vec![(2, 2)]);
        idx.audit();
    }

    #[test]
    fn replay_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd1b1_76);
        for round in 0..8 {
            let u = [16u64, 64, 1 << 10][round % 3];
            let wb = [4u64, 16, 64][round % 3];
            let mut idx = DynamicIndex::new(u, wb, 1, [2u64, 4, 16][round % 3]);
            let mut pts: Vec<Point> = Vec::new();
            for step in 0..260 {
                let op = rng.gen_range(0..10);
                if op < 5 || pts.is_empty() {
                    let p =
                        Point::new(rng.gen_range(0..u), rng.gen_range(0..u), rng.gen_range(0..wb));
                    idx.insert(p).unwrap();
                    pts.push(p);
                } else if op < 8 {
                    let i = rng.gen_range(0..pts.len());
                    let (x, y) = (pts[i].x, pts[i].y);
                    let w = idx.delete(x, y).unwrap();
                    let last = pts.iter().rposition(|p| p.x == x && p.y == y).unwrap();
                    assert_eq!(w, pts[last].w);
                    pts.remove(last);
                } else {
                    let i = rng.gen_range(0..pts.len());
                    let (x, y) = (pts[i].x, pts[i].y);
                    let w = rng.gen_range(0..wb);
                    idx.update(x, y, w).unwrap();
                    let last = pts.iter().rposition(|p| p.x == x && p.y == y).unwrap();
                    pts.remove(last);
                    pts.push(Point::new(x, y, w));
                }
                if step % 7 != 0 {
                    continue;
                }
                let o = Oracle::new(pts.clone());
                for _ in 0..3 {
                    let (a, b) = (rng.gen_range(0..u), rng.gen_range(0..u));
                    let (c, d) = (rng.gen_range(0..u), rng.gen_range(0..u));
                    let q = RectQuery::new(a.min(b), a.max(b), c.min(d), c.max(d));
                    assert_eq!(idx.count(&q), o.count(&q));
                    assert_eq!(idx.report(&q), o.report(&q));
                    assert_eq!(idx.dominance(&q), o.dominance(&q));
                    let (qx, qy) = (rng.gen_range(0..u), rng.gen_range(0..u));
                    for dir in Corner::ALL {
                        assert_eq!(idx.visibility(qx, qy, dir), o.visibility(qx, qy, dir));
                    }
                    assert_eq!(idx.sum(&q), o.sum(&q));
                    assert_eq!(idx.min(&q), o.min(&q));
                    assert_eq!(idx.max(&q), o.max(&q));
                    let total = o.count(&q);
                    if total > 0 {
                        let k = rng.gen_range(1..=total);
                        let (v, f) = idx.quantile(&q, k).unwrap();
                        assert_eq!(Some(v), o.quantile(&q, k));
                        assert_eq!(f, o.count_value(&q, v));
                    } else {
                        assert!(idx.quantile(&q, 1).is_err());
                    }
                    for alpha in [0.6, 0.3] {
                        assert_eq!(idx.majority_alpha(&q, alpha), o.majority(&q, alpha));
                    }
                    let probe = rng.gen_range(0..wb + 2);
                    assert_eq!(idx.successor(&q, probe), o.successor(&q, probe).map(|(v, _)| v));
                    assert_eq!(
                        idx.predecessor(&q, probe),
                        o.predecessor(&q, probe).map(|(v, _)| v)
                    );
                }
            }
            idx.audit();
        }
    }

    #[test]
    fn touched_nodes_stay_logarithmic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd1b1_77);
        let u = 1u64 << 12;
        let mut idx = DynamicIndex::new(u, 1 << 10, 1, 4);
        let logu = (u as f64).log2();
        for _ in 0..800 {
            let p = Point::new(rng.gen_range(0..u), rng.gen_range(0..u), rng.gen_range(0..1 << 10));
            idx.insert(p).unwrap();
            // One bitmap per level, O(log) touched nodes in each, plus
            // the order-statistic path.
            assert!(
                (idx.last_touched() as f64) <= 4.0 * logu * logu,
                "touched {} nodes",
                idx.last_touched()
            );
        }
    }

    #[test]
    fn empty_and_degenerate() {
        let idx = DynamicIndex::new(8, 4, 1, 2);
        let q = RectQuery::new(2, 1, 0, 7);
        assert_eq!(idx.count(&q), 0);
        assert!(idx.report(&RectQuery::new(0, 7, 0, 7)).is_empty());
        assert!(idx.dominance(&RectQuery::new(0, 7, 0, 7)).is_empty());
        assert_eq!(idx.avg(&RectQuery::new(0, 7, 0, 7)), None);
        assert!(idx.majority_alpha(&RectQuery::new(0, 7, 0, 7), 0.5).is_empty());
        // W = 1: every weight is zero.
        let mut w1 = DynamicIndex::new(8, 1, 1, 2);
        w1.insert(Point::new(1, 1, 0)).unwrap();
        let full = RectQuery::new(0, 7, 0, 7);
        assert_eq!(w1.quantile(&full, 1).unwrap(), (0, 1));
        assert_eq!(w1.successor(&full, 0), Some(0));
        assert_eq!(w1.count_value(&full, 0), 1);
    }
}
