//! Limit-set approximation by depth-first search over reduced words.
//!
//! A node is a word `W` together with the letters allowed to follow it. Its
//! branch seeds are the attracting fixed points of those letters; the node is
//! pruned once their images under `W` have chordal diameter below `ε`, and the
//! images are emitted. Letters fixing ∞ (`c = 0`) are grouped into runs whose
//! elements are enumerated once each, so commuting parabolics at ∞ do not
//! multiply the tree.

use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::path::Path;

use kiddo::{KdTree, SquaredEuclidean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::GenCircle;
use crate::error::{Error, Result};
use crate::group::{Letter, MarkedGroup};
use crate::moebius::{FixedPoints, MapClass, Mobius, RiemannPoint};

/// Depth-first enumeration of reduced words of one length.
#[derive(Debug, Clone)]
pub struct ReducedWords {
    alphabet: usize,
    length: usize,
    stack: Vec<usize>,
    done: bool,
}

/// Reduced words of `length` over `n_gens` generators and their inverses, in
/// alphabet order `g₀, g₀⁻¹, g₁, …`.
pub fn reduced_words(n_gens: usize, length: usize) -> ReducedWords {
    ReducedWords {
        alphabet: 2 * n_gens,
        length,
        stack: Vec::new(),
        done: n_gens == 0 && length > 0,
    }
}

/// `2n(2n - 1)^(length - 1)`, or 1 for the empty word.
pub fn reduced_word_count(n_gens: usize, length: usize) -> u128 {
    if length == 0 {
        return 1;
    }
    let a = 2 * n_gens as u128;
    a * (a.saturating_sub(1)).pow(length as u32 - 1)
}

fn cancels(a: usize, b: usize) -> bool {
    a ^ 1 == b
}

impl ReducedWords {
    /// Smallest letter `≥ from` that does not cancel `prev`.
    fn next_letter(&self, prev: Option<usize>, from: usize) -> Option<usize> {
        (from..self.alphabet).find(|&l| prev.map_or(true, |p| !cancels(p, l)))
    }

    fn descend(&mut self) -> bool {
        while self.stack.len() < self.length {
            match self.next_letter(self.stack.last().copied(), 0) {
                Some(l) => self.stack.push(l),
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        while let Some(top) = self.stack.pop() {
            let prev = self.stack.last().copied();
            if let Some(l) = self.next_letter(prev, top + 1) {
                self.stack.push(l);
                if self.descend() {
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for ReducedWords {
    type Item = Vec<Letter>;

    fn next(&mut self) -> Option<Vec<Letter>> {
        if self.done {
            return None;
        }
        let found = if self.stack.is_empty() && self.length > 0 {
            self.descend()
        } else if self.length == 0 {
            self.done = true;
            return Some(Vec::new());
        } else {
            self.advance()
        };
        if !found {
            self.done = true;
            return None;
        }
        Some(self.stack.iter().map(|&l| Letter::from_alphabet_index(l)).collect())
    }
}

/// Parameters of one exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationPolicy {
    pub max_word_length: usize,
    /// Chordal size below which a subtree is replaced by its seed images.
    pub prune_radius: f64,
    /// Points emitted at pruned nodes; empty means generator fixed points.
    #[serde(default)]
    pub seed_points: Vec<RiemannPoint>,
    pub max_points: usize,
}

impl Default for ExplorationPolicy {
    fn default() -> Self {
        ExplorationPolicy {
            max_word_length: 60,
            prune_radius: 1e-3,
            seed_points: Vec::new(),
            max_points: 5_000_000,
        }
    }
}

impl ExplorationPolicy {
    pub fn new(max_word_length: usize, prune_radius: f64) -> Self {
        ExplorationPolicy {
            max_word_length,
            prune_radius,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prune_radius > 0.0 && self.prune_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prune radius must be positive, got {}",
                self.prune_radius
            )));
        }
        if self.max_word_length == 0 {
            return Err(Error::InvalidParameter("max word length must be at least 1".into()));
        }
        if self.max_points == 0 {
            return Err(Error::InvalidParameter("max points must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters collected during exploration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudStats {
    pub nodes_visited: u64,
    pub pruned: u64,
    pub depth_capped: u64,
    /// The point budget was exhausted.
    pub truncated: bool,
    /// Every generator fixes ∞; runs of those letters are the whole tree.
    pub common_fixed_point: bool,
}

impl CloudStats {
    fn merge(&mut self, o: &CloudStats) {
        self.nodes_visited += o.nodes_visited;
        self.pruned += o.pruned;
        self.depth_capped += o.depth_capped;
        self.truncated |= o.truncated;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetCloud {
    pub points: Vec<RiemannPoint>,
    pub policy: ExplorationPolicy,
    pub stats: CloudStats,
}

impl LimitSetCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of finite points inside `[xmin, xmax] × [ymin, ymax]`.
    pub fn count_in_box(&self, bbox: [f64; 4]) -> usize {
        self.points
            .iter()
            .filter_map(RiemannPoint::finite)
            .filter(|z| z.re >= bbox[0] && z.re <= bbox[1] && z.im >= bbox[2] && z.im <= bbox[3])
            .count()
    }

    /// Little-endian `(re, im)` f64 pairs, 16 bytes per point; ∞ is `(inf, inf)`.
    pub fn to_binary(&self) -> Vec<u8> {
        encode_points(&self.points)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_binary()).map_err(|e| Error::io(path, e))
    }
}

pub fn encode_points(points: &[RiemannPoint]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * points.len());
    for p in points {
        let (x, y) = match p {
            RiemannPoint::Finite(z) => (z.re, z.im),
            RiemannPoint::Infinity => (f64::INFINITY, f64::INFINITY),
        };
        out.extend_from_slice(&x.to_le_bytes());
        out.extend_from_slice(&y.to_le_bytes());
    }
    out
}

pub fn decode_points(bytes: &[u8]) -> Result<Vec<RiemannPoint>> {
    if bytes.len() % 16 != 0 {
        return Err(Error::InvalidParameter(format!(
            "point data length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|r| {
            let x = f64::from_le_bytes(r[..8].try_into().expect("8 bytes"));
            let y = f64::from_le_bytes(r[8..].try_into().expect("8 bytes"));
            if x.is_infinite() || y.is_infinite() {
                RiemannPoint::Infinity
            } else {
                RiemannPoint::Finite(crate::moebius::c(x, y))
            }
        })
        .collect())
}

fn is_affine(m: &Mobius) -> bool {
    m.c.norm() <= 1e-14 * m.a.norm().max(m.d.norm()).max(1.0)
}

/// Points whose orbit under `m`'s positive powers accumulates: the attracting
/// fixed point of a loxodromic, the fixed point of a parabolic, both fixed
/// points of an elliptic.
fn forward_points(m: &Mobius) -> Vec<RiemannPoint> {
    let Ok(fp) = m.fixed_points() else {
        return Vec::new();
    };
    match (m.class(), fp) {
        (MapClass::Loxodromic, FixedPoints::Pair(p, q)) => {
            let derivative_at = |z: &RiemannPoint| match z {
                RiemannPoint::Finite(z) => (m.c * z + m.d).norm(),
                RiemannPoint::Infinity => 1.0 / m.a.norm().max(f64::MIN_POSITIVE),
            };
            // |m'(z)| = 1/|cz + d|²; attracting where |cz + d| > 1
            if derivative_at(&p) >= derivative_at(&q) {
                vec![p]
            } else {
                vec![q]
            }
        }
        (_, fp) => fp.to_vec(),
    }
}

fn push_unique(v: &mut Vec<RiemannPoint>, p: RiemannPoint) {
    if !v.iter().any(|q| q.chordal_distance(&p) <= 1e-12) {
        v.push(p);
    }
}

fn chordal_diameter(pts: &[RiemannPoint]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.chordal_distance(q));
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Last {
    Start,
    Letter(usize),
    Run,
}

struct Engine {
    letters: Vec<Mobius>,
    cusp: Vec<usize>,
    free: Vec<usize>,
    /// Branch seeds after each letter and after a run: the first level is
    /// emitted, the second level measures the subtree.
    emit_letter: Vec<Vec<RiemannPoint>>,
    emit_run: Vec<RiemannPoint>,
    test_letter: Vec<Vec<RiemannPoint>>,
    test_run: Vec<RiemannPoint>,
    custom: Vec<RiemannPoint>,
    eps: f64,
    max_len: usize,
    max_points: usize,
}

#[derive(Default)]
struct Acc {
    points: Vec<RiemannPoint>,
    stats: CloudStats,
}

/// One child of a node: the word's map, what it ended with, its length.
type Child = (Mobius, Last, usize);

type Key = [i64; 4];

fn affine_key(m: &Mobius) -> Key {
    let q = |x: f64| (x * 1e9).round() as i64;
    let (a, b) = (m.a / m.d, m.b / m.d);
    [q(a.re), q(a.im), q(b.re), q(b.im)]
}

impl Engine {
    fn new(g: &MarkedGroup, p: &ExplorationPolicy) -> Engine {
        let letters = g.alphabet();
        let (cusp, free): (Vec<usize>, Vec<usize>) = (0..letters.len()).partition(|&i| is_affine(&letters[i]));
        let forward: Vec<Vec<RiemannPoint>> = letters.iter().map(forward_points).collect();
        let mut cusp_points = Vec::new();
        for &i in &cusp {
            for &p in &forward[i] {
                push_unique(&mut cusp_points, p);
            }
        }
        // first level: attracting points of the letters allowed next
        let level1 = |l: Option<usize>| {
            let mut s = Vec::new();
            for &n in free.iter().filter(|&&n| l.map_or(true, |l| !cancels(l, n))) {
                for &p in &forward[n] {
                    push_unique(&mut s, p);
                }
            }
            s
        };
        let first: Vec<Vec<RiemannPoint>> = (0..letters.len()).map(|l| level1(Some(l))).collect();
        let run_first = level1(None);
        // second level: images of the first level under each allowed letter
        let widen = |allowed: Vec<usize>, run: bool| {
            let mut s = Vec::new();
            for n in allowed {
                let next = if cusp.contains(&n) { &run_first } else { &first[n] };
                for p in forward[n].iter().chain(next) {
                    push_unique(&mut s, letters[n].apply(*p));
                }
            }
            if !run {
                for &p in &cusp_points {
                    push_unique(&mut s, p);
                }
            }
            s
        };
        let with_cusp = |mut s: Vec<RiemannPoint>| {
            for &p in &cusp_points {
                push_unique(&mut s, p);
            }
            s
        };
        let test_letter = (0..letters.len())
            .map(|l| {
                let allowed = free
                    .iter()
                    .copied()
                    .filter(|&n| !cancels(l, n))
                    .chain(cusp.iter().copied());
                widen(allowed.collect(), false)
            })
            .collect();
        let emit_letter = first.iter().cloned().map(with_cusp).collect();
        let (emit_run, test_run) = if free.is_empty() {
            (cusp_points.clone(), cusp_points.clone())
        } else {
            (run_first.clone(), widen(free.clone(), true))
        };
        Engine {
            letters,
            cusp,
            free,
            emit_letter,
            emit_run,
            test_letter,
            test_run,
            custom: p.seed_points.clone(),
            eps: p.prune_radius,
            max_len: p.max_word_length,
            max_points: p.max_points,
        }
    }

    fn seeds(&self, last: Last) -> (&[RiemannPoint], &[RiemannPoint]) {
        match last {
            Last::Letter(l) => (&self.emit_letter[l], &self.test_letter[l]),
            Last::Run => (&self.emit_run, &self.test_run),
            Last::Start => (&[], &[]),
        }
    }

    /// Whether a node is a leaf, and the points it emits if so.
    fn leaf(&self, w: &Mobius, last: Last, depth: usize, stats: &mut CloudStats) -> Option<Vec<RiemannPoint>> {
        let (emit, test) = self.seeds(last);
        let capped = depth >= self.max_len;
        let small = !capped && chordal_diameter(&test.iter().map(|&s| w.apply(s)).collect::<Vec<_>>()) < self.eps;
        if !(capped || small) {
            return None;
        }
        if small {
            stats.pruned += 1;
        } else {
            stats.depth_capped += 1;
        }
        let seeds = if self.custom.is_empty() { emit } else { &self.custom[..] };
        Some(seeds.iter().map(|&s| w.apply(s)).collect())
    }

    /// Children in search order: free letters, then run elements by
    /// breadth-first order of the run.
    fn children(&self, w: &Mobius, last: Last, depth: usize) -> Vec<Child> {
        let mut out = Vec::new();
        if depth >= self.max_len {
            return out;
        }
        for &n in &self.free {
            if let Last::Letter(l) = last {
                if cancels(l, n) {
                    continue;
                }
            }
            out.push((w.compose(&self.letters[n]), Last::Letter(n), depth + 1));
        }
        if last != Last::Run && !self.cusp.is_empty() {
            let mut seen: HashSet<Key> = HashSet::new();
            seen.insert(affine_key(&Mobius::IDENTITY));
            let mut queue = VecDeque::from([(Mobius::IDENTITY, 0usize)]);
            let cusp_point = w.apply(RiemannPoint::Infinity);
            while let Some((g, len)) = queue.pop_front() {
                if depth + len >= self.max_len {
                    continue;
                }
                for &a in &self.cusp {
                    let h = g.compose(&self.letters[a]);
                    if !seen.insert(affine_key(&h)) {
                        continue;
                    }
                    let node = w.compose(&h);
                    out.push((node, Last::Run, depth + len + 1));
                    // the run continues until its pieces are within ε of the
                    // parabolic point w(∞) they accumulate at
                    let near_cusp = self
                        .test_run
                        .iter()
                        .all(|&s| node.apply(s).chordal_distance(&cusp_point) < self.eps);
                    if !near_cusp {
                        queue.push_back((h, len + 1));
                    }
                }
            }
        }
        out
    }

    fn explore(&self, w: Mobius, last: Last, depth: usize, acc: &mut Acc) {
        acc.stats.nodes_visited += 1;
        if acc.points.len() >= self.max_points {
            acc.stats.truncated = true;
            return;
        }
        if let Some(points) = self.leaf(&w, last, depth, &mut acc.stats) {
            acc.points.extend(points);
            return;
        }
        for (m, l, d) in self.children(&w, last, depth) {
            self.explore(m, l, d, acc);
        }
    }

    fn run(&self, parallel: bool) -> (Vec<RiemannPoint>, CloudStats) {
        let mut root = CloudStats::default();
        let kids = self.children(&Mobius::IDENTITY, Last::Start, 0);
        let one = |&(m, l, d): &Child| {
            let mut acc = Acc::default();
            self.explore(m, l, d, &mut acc);
            acc.points.truncate(self.max_points);
            acc
        };
        let parts: Vec<Acc> = if parallel {
            kids.par_iter().map(one).collect()
        } else {
            kids.iter().map(one).collect()
        };
        let mut points = Vec::new();
        for part in parts {
            root.merge(&part.stats);
            if points.len() < self.max_points {
                points.extend(part.points);
            } else if !part.points.is_empty() {
                root.truncated = true;
            }
        }
        if points.len() > self.max_points {
            points.truncate(self.max_points);
            root.truncated = true;
        }
        root.common_fixed_point = self.free.is_empty() && !self.cusp.is_empty();
        (points, root)
    }
}

fn limit_set_with(g: &MarkedGroup, p: &ExplorationPolicy, parallel: bool) -> Result<LimitSetCloud> {
    p.validate()?;
    if g.is_empty() {
        return Err(Error::InvalidParameter("group has no generators".into()));
    }
    let (points, stats) = Engine::new(g, p).run(parallel);
    Ok(LimitSetCloud {
        points,
        policy: p.clone(),
        stats,
    })
}

/// Explores the first-level subtrees concurrently; the merge keeps
/// sequential order, so the result does not depend on scheduling.
pub fn limit_set(g: &MarkedGroup, p: &ExplorationPolicy) -> Result<LimitSetCloud> {
    limit_set_with(g, p, true)
}

pub fn limit_set_sequential(g: &MarkedGroup, p: &ExplorationPolicy) -> Result<LimitSetCloud> {
    limit_set_with(g, p, false)
}

/// Seed for [`invariance_defect`]'s sampler.
pub const DEFECT_SEED: u64 = 0x5eed;

/// Max over `sample` random (letter, point) pairs of the chordal distance from
/// the image of the point to the nearest cloud point.
pub fn invariance_defect(cloud: &LimitSetCloud, g: &MarkedGroup, sample: usize) -> Result<f64> {
    invariance_defect_seeded(cloud, g, sample, DEFECT_SEED)
}

pub fn invariance_defect_seeded(cloud: &LimitSetCloud, g: &MarkedGroup, sample: usize, seed: u64) -> Result<f64> {
    if cloud.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if g.is_empty() {
        return Err(Error::InvalidParameter("group has no generators".into()));
    }
    let index = SphereIndex::new(&cloud.points);
    let letters = g.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..sample {
        let m = &letters[rng.gen_range(0..letters.len())];
        let p = cloud.points[rng.gen_range(0..cloud.points.len())];
        worst = worst.max(index.nearest(m.apply(p)));
    }
    Ok(worst)
}

/// Nearest-neighbour queries in the chordal metric, via unit-sphere coordinates.
pub struct SphereIndex {
    tree: KdTree<f64, 3>,
}

impl SphereIndex {
    pub fn new(points: &[RiemannPoint]) -> SphereIndex {
        // the tree rejects too many identical coordinates, so duplicates are dropped
        let mut seen = HashSet::new();
        let mut tree: KdTree<f64, 3> = KdTree::new();
        for (i, p) in points.iter().enumerate() {
            let s = p.to_sphere();
            let key = s.map(|x| (x * 1e13).round() as i64);
            if seen.insert(key) {
                tree.add(&s, i as u64);
            }
        }
        SphereIndex { tree }
    }

    /// Chordal distance to the nearest indexed point.
    pub fn nearest(&self, p: RiemannPoint) -> f64 {
        self.tree
            .nearest_one::<SquaredEuclidean>(&p.to_sphere())
            .distance
            .sqrt()
    }
}

/// Isometric circles of all reduced words of length `1..=max_len` with
/// `c ≠ 0`, deduplicated.
pub fn isometric_circle_overlay(g: &MarkedGroup, max_len: usize) -> Result<Vec<GenCircle>> {
    if max_len == 0 {
        return Err(Error::InvalidParameter("max_len must be at least 1".into()));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for len in 1..=max_len {
        for word in reduced_words(g.len(), len) {
            let m = g.evaluate(&word)?;
            if is_affine(&m) {
                continue;
            }
            let Ok((circle, _)) = m.isometric_circles() else {
                continue;
            };
            let (z, r) = circle.center_radius()?;
            let q = |x: f64| (x * 1e9).round() as i64;
            if seen.insert([q(z.re), q(z.im), q(r)]) {
                out.push(circle);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{c, re, symmetric_loxodromic};
    use crate::varieties::cb_group;
    use proptest::prelude::*;

    fn cyclic(m: Mobius) -> MarkedGroup {
        MarkedGroup::new([("A", m)]).unwrap()
    }

    #[test]
    fn word_counts() {
        assert_eq!(reduced_words(2, 1).count(), 4);
        assert_eq!(reduced_words(2, 2).count(), 12);
        for k in 1..6 {
            assert_eq!(reduced_words(1, k).count(), 2);
        }
        assert_eq!(reduced_words(3, 0).count(), 1);
        assert_eq!(reduced_words(3, 4).count() as u128, reduced_word_count(3, 4));
    }

    #[test]
    fn words_are_reduced_and_ordered() {
        let words: Vec<_> = reduced_words(2, 3).collect();
        for w in &words {
            for pair in w.windows(2) {
                assert_ne!(pair[0], pair[1].inverted());
            }
        }
        let keys: Vec<Vec<usize>> = words
            .iter()
            .map(|w| w.iter().map(|l| l.alphabet_index()).collect())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        sorted.dedup();
        assert_eq!(sorted.len(), 36);
    }

    #[test]
    fn parabolic_cloud_is_infinity() {
        let g = cyclic(Mobius::raw(re(1.0), re(2.0), re(0.0), re(1.0)));
        let cloud = limit_set(&g, &ExplorationPolicy::new(10, 1e-3)).unwrap();
        assert!(!cloud.is_empty());
        assert!(cloud.points.iter().all(RiemannPoint::is_infinite));
        assert!(cloud.stats.common_fixed_point);
        assert_eq!(invariance_defect(&cloud, &g, 100).unwrap(), 0.0);
    }

    #[test]
    fn loxodromic_cloud_is_fixed_pair() {
        let g = cyclic(symmetric_loxodromic(re(3.0)));
        let cloud = limit_set(&g, &ExplorationPolicy::new(20, 1e-6)).unwrap();
        let r = 8f64.sqrt();
        for p in &cloud.points {
            let z = p.finite().unwrap();
            assert!((z - re(r)).norm().min((z + re(r)).norm()) < 1e-6, "{z}");
        }
        assert!(invariance_defect(&cloud, &g, 200).unwrap() <= 1e-6);
    }

    #[test]
    fn empty_cloud_defect_errors() {
        let g = cyclic(symmetric_loxodromic(re(3.0)));
        let cloud = LimitSetCloud {
            points: Vec::new(),
            policy: ExplorationPolicy::default(),
            stats: CloudStats::default(),
        };
        assert!(matches!(invariance_defect(&cloud, &g, 10), Err(Error::EmptyCloud)));
    }

    #[test]
    fn invalid_policies() {
        let g = cyclic(symmetric_loxodromic(re(3.0)));
        assert!(limit_set(&g, &ExplorationPolicy::new(0, 1e-3)).is_err());
        assert!(limit_set(&g, &ExplorationPolicy::new(5, 0.0)).is_err());
        assert!(limit_set(&g, &ExplorationPolicy::new(5, f64::NAN)).is_err());
    }

    fn small_cb() -> MarkedGroup {
        cb_group(c(2.5, 0.2), c(0.5, 4.2), c(0.09, 0.85)).unwrap()
    }

    #[test]
    fn deterministic_and_parallel_equivalent() {
        let g = small_cb();
        let p = ExplorationPolicy::new(12, 2e-2);
        let a = limit_set(&g, &p).unwrap();
        let b = limit_set(&g, &p).unwrap();
        assert_eq!(a, b);
        let s = limit_set_sequential(&g, &p).unwrap();
        assert_eq!(a.points, s.points);
        assert_eq!(a.stats, s.stats);
    }

    #[test]
    fn monotone_in_policy() {
        let g = small_cb();
        let mut prev = 0;
        for eps in [1e-1, 5e-2, 2e-2] {
            let n = limit_set(&g, &ExplorationPolicy::new(12, eps)).unwrap().len();
            assert!(n >= prev, "{eps}: {n} < {prev}");
            prev = n;
        }
        let mut prev = 0;
        for depth in [2, 4, 6, 8] {
            let n = limit_set(&g, &ExplorationPolicy::new(depth, 2e-2)).unwrap().len();
            assert!(n >= prev, "{depth}: {n} < {prev}");
            prev = n;
        }
    }

    #[test]
    fn points_are_orbit_points() {
        // every emitted point is a word image of a generator fixed point, hence
        // fixed by a conjugate; check a sample by re-deriving it under inverses
        let g = small_cb();
        let cloud = limit_set(&g, &ExplorationPolicy::new(8, 5e-2)).unwrap();
        assert!(cloud.len() > 10);
        let d = invariance_defect(&cloud, &g, 500).unwrap();
        assert!(d < 0.5, "{d}");
    }

    #[test]
    fn truncation_is_flagged() {
        let g = small_cb();
        let mut p = ExplorationPolicy::new(12, 1e-2);
        p.max_points = 50;
        let cloud = limit_set(&g, &p).unwrap();
        assert_eq!(cloud.len(), 50);
        assert!(cloud.stats.truncated);
    }

    #[test]
    fn custom_seeds_are_used() {
        let g = cyclic(symmetric_loxodromic(re(3.0)));
        let mut p = ExplorationPolicy::new(3, 1e-9);
        p.seed_points = vec![RiemannPoint::Finite(re(0.0))];
        let cloud = limit_set(&g, &p).unwrap();
        // a single branch seed has diameter 0, so both first-level nodes are leaves
        let m = symmetric_loxodromic(re(3.0));
        let zero = RiemannPoint::Finite(re(0.0));
        assert_eq!(cloud.points, vec![m.apply(zero), m.inverse().apply(zero)]);
        assert_eq!(cloud.stats.pruned, 2);
    }

    #[test]
    fn binary_round_trip() {
        let pts = vec![RiemannPoint::Finite(c(1.5, -2.0)), RiemannPoint::Infinity];
        let bytes = encode_points(&pts);
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &f64::INFINITY.to_le_bytes());
        assert_eq!(decode_points(&bytes).unwrap(), pts);
        assert!(decode_points(&bytes[..20]).is_err());
    }

    #[test]
    fn overlay_examples() {
        let j = Mobius::raw(re(3.0), c(0.0, -2.0), c(0.0, 4.0), re(3.0));
        let circles = isometric_circle_overlay(&cyclic(j), 1).unwrap();
        assert_eq!(circles.len(), 2);
        let mut centers: Vec<f64> = circles.iter().map(|g| g.center_radius().unwrap().0.im).collect();
        centers.sort_by(f64::total_cmp);
        assert!((centers[0] + 0.75).abs() < 1e-12 && (centers[1] - 0.75).abs() < 1e-12);
        for g in &circles {
            assert!((g.center_radius().unwrap().1 - 0.25).abs() < 1e-12);
        }
        let x = Mobius::raw(re(1.0), re(2.0), re(0.0), re(1.0));
        assert!(isometric_circle_overlay(&cyclic(x), 3).unwrap().is_empty());
        let b = crate::koebe::assemble_b().unwrap().group().unwrap();
        assert_eq!(isometric_circle_overlay(&b, 1).unwrap().len(), 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reduced_counts_match_formula(n in 1usize..4, len in 0usize..5) {
            prop_assert_eq!(reduced_words(n, len).count() as u128, reduced_word_count(n, len));
        }

        #[test]
        fn loxodromic_limit_sets(re_l in 1.5f64..4.0, im_l in -1.0f64..1.0) {
            let lambda = c(re_l, im_l);
            let g = cyclic(symmetric_loxodromic(lambda));
            let cloud = limit_set(&g, &ExplorationPolicy::new(30, 1e-7)).unwrap();
            let t = (lambda * lambda - 1.0).sqrt();
            for p in &cloud.points {
                let z = p.finite().unwrap();
                prop_assert!((z - t).norm().min((z + t).norm()) < 1e-6);
            }
        }
    }
}
