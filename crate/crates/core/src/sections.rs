//! Cylinder cross-sections for graph geodesic flows and their exact checks.
//!
//! A geodesic is a bi-infinite non-backtracking edge sequence; a section fixes
//! one directed edge, a position on it, and finitely many edges before and
//! after. Constraints are compared as cylinders in a common frame.

use std::collections::{BTreeMap, BTreeSet};

use crate::coding::{ConditionResult, PredicateReport};
use crate::error::{Error, Result};
use crate::graph::{edge_shift, systole, Length, MetricGraph};
use crate::sft::{TransitionMatrix, Word};

/// `edges[i]` at frame index `lo + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    pub lo: isize,
    pub edges: Word,
}

impl Cylinder {
    pub fn hi(&self) -> isize {
        self.lo + self.edges.len() as isize
    }

    pub fn get(&self, i: isize) -> Option<usize> {
        (i >= self.lo && i < self.hi()).then(|| self.edges[(i - self.lo) as usize])
    }

    pub fn shifted(&self, k: isize) -> Self {
        Self { lo: self.lo + k, edges: self.edges.clone() }
    }

    /// Constraints at frame indices in [lo, hi).
    pub fn restrict(&self, lo: isize, hi: isize) -> Self {
        let lo = lo.max(self.lo);
        let hi = hi.min(self.hi()).max(lo);
        Self { lo, edges: (lo..hi).map(|i| self.get(i).expect("in range")).collect() }
    }

    /// Union of two constraints; None when they conflict or leave a gap.
    pub fn merge(&self, other: &Self, a: &TransitionMatrix) -> Option<Self> {
        if other.edges.is_empty() {
            return Some(self.clone());
        }
        if self.edges.is_empty() {
            return Some(other.clone());
        }
        if other.lo > self.hi() || self.lo > other.hi() {
            return None;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut edges = Vec::with_capacity((hi - lo) as usize);
        for i in lo..hi {
            match (self.get(i), other.get(i)) {
                (Some(x), Some(y)) if x != y => return None,
                (Some(x), _) | (None, Some(x)) => edges.push(x),
                (None, None) => unreachable!("contiguous"),
            }
        }
        edges.windows(2).all(|w| a.get(w[0], w[1])).then_some(Self { lo, edges })
    }

    /// Every geodesic meeting `self` meets `other`.
    pub fn implies(&self, other: &Self) -> bool {
        other.lo >= self.lo && other.hi() <= self.hi() && (other.lo..other.hi()).all(|i| self.get(i) == other.get(i))
    }

    fn extensions(&self, a: &TransitionMatrix, left: bool) -> Vec<Self> {
        if left {
            a.predecessors(self.edges[0])
                .iter()
                .map(|&p| {
                    let mut edges = vec![p];
                    edges.extend_from_slice(&self.edges);
                    Self { lo: self.lo - 1, edges }
                })
                .collect()
        } else {
            a.successors(*self.edges.last().expect("nonempty"))
                .iter()
                .map(|&s| {
                    let mut edges = self.edges.clone();
                    edges.push(s);
                    Self { lo: self.lo, edges }
                })
                .collect()
        }
    }
}

impl std::fmt::Display for Cylinder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}@{}", self.edges, self.lo)
    }
}

/// Geodesics through `position` on `edge` whose neighbouring edges are `past`
/// (oldest first) and `future`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSection {
    pub edge: usize,
    pub position: Length,
    pub past: Word,
    pub future: Word,
}

impl GraphSection {
    pub fn bare(edge: usize, position: Length) -> Self {
        Self { edge, position, past: Vec::new(), future: Vec::new() }
    }

    pub fn cylinder(&self) -> Cylinder {
        let mut edges = self.past.clone();
        edges.push(self.edge);
        edges.extend_from_slice(&self.future);
        Cylinder { lo: -(self.past.len() as isize), edges }
    }

    pub fn past_span(&self, g: &MetricGraph) -> Length {
        self.position + g.word_length(&self.past)
    }

    pub fn future_span(&self, g: &MetricGraph) -> Length {
        g.length(self.edge) - self.position + g.word_length(&self.future)
    }

    /// Diameter in the geodesic-flow metric: two geodesics agreeing on
    /// [−T₋, T₊] and branching at both ends are (e^{−2T₋} + e^{−2T₊})/2 apart.
    pub fn diameter(&self, g: &MetricGraph) -> f64 {
        let p = self.past_span(g).to_f64();
        let f = self.future_span(g).to_f64();
        0.5 * ((-2.0 * p).exp() + (-2.0 * f).exp())
    }

    fn validate(&self, g: &MetricGraph, a: &TransitionMatrix) -> Result<()> {
        if self.edge >= g.directed_count() {
            return Err(Error::InvalidArgument(format!("no directed edge {}", self.edge)));
        }
        if !(Length::zero().lt(self.position) && self.position.lt(g.length(self.edge))) {
            return Err(Error::InvalidArgument(format!(
                "position {} is not interior to edge {}",
                self.position, self.edge
            )));
        }
        let w = self.cylinder().edges;
        if !a.is_admissible(&w) {
            return Err(Error::InadmissibleWord(w));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionPair {
    pub b: GraphSection,
    pub d: GraphSection,
}

/// Pairs (B_i, D_i) at scale α.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFamily {
    pub alpha: Length,
    pub pairs: Vec<SectionPair>,
}

impl GraphFamily {
    pub fn new(g: &MetricGraph, alpha: Length, pairs: Vec<SectionPair>) -> Result<Self> {
        let a = edge_shift(g);
        if !alpha.is_positive() {
            return Err(Error::InvalidArgument("alpha must be positive".into()));
        }
        for (i, p) in pairs.iter().enumerate() {
            p.b.validate(g, &a)?;
            p.d.validate(g, &a)?;
            if p.b.edge != p.d.edge || !p.b.position.eq_len(p.d.position) || !p.b.cylinder().implies(&p.d.cylinder()) {
                return Err(Error::InvalidArgument(format!("B_{i} is not contained in D_{i}")));
            }
        }
        Ok(Self { alpha, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    B,
    D,
}

/// Interval of flow times with open or closed ends.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub lo: Length,
    pub hi: Length,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Window {
    pub fn closed(lo: Length, hi: Length) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn open(lo: Length, hi: Length) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    pub fn contains(&self, t: Length) -> bool {
        let above = if self.lo_open { self.lo.lt(t) } else { self.lo.le(t) };
        let below = if self.hi_open { t.lt(self.hi) } else { t.le(self.hi) };
        above && below
    }
}

/// Some geodesic of the source meets the target section after flowing `time`;
/// `cylinder` is the joint constraint in the source frame and the target's
/// reference edge sits at frame index `shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub target: usize,
    pub time: Length,
    pub shift: isize,
    pub cylinder: Cylinder,
}

/// Piece of a section on which the first hit is determined.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub cylinder: Cylinder,
    pub hit: Option<Alignment>,
}

/// Point of the graph flow: a finite window of a geodesic with the current
/// edge at `index` and `offset` ∈ [0, length).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPoint {
    pub edges: Word,
    pub index: usize,
    pub offset: Length,
}

impl GraphPoint {
    pub fn edge(&self) -> usize {
        self.edges[self.index]
    }
}

/// Graph, edge shift and family with per-edge lookup.
#[derive(Debug, Clone)]
pub struct GraphSystem {
    pub graph: MetricGraph,
    pub shift: TransitionMatrix,
    pub family: GraphFamily,
    by_edge: [Vec<Vec<usize>>; 2],
}

impl GraphSystem {
    pub fn new(graph: MetricGraph, family: GraphFamily) -> Self {
        let shift = edge_shift(&graph);
        let mut by_edge = [vec![Vec::new(); graph.directed_count()], vec![Vec::new(); graph.directed_count()]];
        for (layer, lists) in by_edge.iter_mut().enumerate() {
            for (i, p) in family.pairs.iter().enumerate() {
                let s = if layer == 0 { &p.b } else { &p.d };
                lists[s.edge].push(i);
            }
            for list in lists.iter_mut() {
                list.sort_by(|&x, &y| {
                    let sx = if layer == 0 { &family.pairs[x].b } else { &family.pairs[x].d };
                    let sy = if layer == 0 { &family.pairs[y].b } else { &family.pairs[y].d };
                    sx.position.compare(sy.position).then(x.cmp(&y))
                });
            }
        }
        Self { graph, shift, family, by_edge }
    }

    pub fn section(&self, layer: Layer, i: usize) -> &GraphSection {
        match layer {
            Layer::B => &self.family.pairs[i].b,
            Layer::D => &self.family.pairs[i].d,
        }
    }

    fn on_edge(&self, layer: Layer, e: usize) -> &[usize] {
        &self.by_edge[if layer == Layer::B { 0 } else { 1 }][e]
    }

    fn alpha(&self) -> Length {
        self.family.alpha
    }

    /// All ways a geodesic in `src` (at `position` on its frame-0 edge) meets a
    /// section of `layer` at a time in `window`.
    pub fn alignments(&self, src: &Cylinder, position: Length, layer: Layer, window: Window) -> Vec<Alignment> {
        let mut out = Vec::new();
        let e0 = src.get(0).expect("frame edge");
        let mut path = vec![e0];
        self.forward(src, &mut path, -position, layer, window, &mut out);
        let mut back = vec![e0];
        self.backward(src, &mut back, -position, layer, window, &mut out);
        out.sort_by(|x, y| x.time.compare(y.time).then(x.target.cmp(&y.target)));
        out
    }

    fn try_align(
        &self,
        src: &Cylinder,
        path: &Cylinder,
        layer: Layer,
        j: usize,
        k: isize,
        time: Length,
        out: &mut Vec<Alignment>,
    ) {
        let target = self.section(layer, j).cylinder().shifted(k);
        if let Some(c) = src.merge(path, &self.shift).and_then(|c| c.merge(&target, &self.shift)) {
            out.push(Alignment { target: j, time, shift: k, cylinder: c });
        }
    }

    fn forward(
        &self,
        src: &Cylinder,
        path: &mut Word,
        start: Length,
        layer: Layer,
        w: Window,
        out: &mut Vec<Alignment>,
    ) {
        let k = path.len() - 1;
        let e = path[k];
        let pc = Cylinder { lo: 0, edges: path.clone() };
        for &j in self.on_edge(layer, e) {
            let t = start + self.section(layer, j).position;
            if w.contains(t) {
                self.try_align(src, &pc, layer, j, k as isize, t, out);
            }
        }
        let next = start + self.graph.length(e);
        if !next.lt(w.hi) {
            return;
        }
        let forced = src.get(k as isize + 1);
        for &f in self.shift.successors(e) {
            if forced.is_none_or(|x| x == f) {
                path.push(f);
                self.forward(src, path, next, layer, w, out);
                path.pop();
            }
        }
    }

    fn backward(
        &self,
        src: &Cylinder,
        back: &mut Word,
        end: Length,
        layer: Layer,
        w: Window,
        out: &mut Vec<Alignment>,
    ) {
        let m = back.len() as isize;
        let forced = src.get(-m);
        let prev = *back.last().expect("nonempty");
        for &p in self.shift.predecessors(prev) {
            if forced.is_some_and(|x| x != p) {
                continue;
            }
            back.push(p);
            let start = end - self.graph.length(p);
            let pc = Cylinder { lo: -m, edges: back.iter().rev().copied().collect() };
            for &j in self.on_edge(layer, p) {
                let t = start + self.section(layer, j).position;
                if w.contains(t) {
                    self.try_align(src, &pc, layer, j, -m, t, out);
                }
            }
            if w.lo.lt(start) {
                self.backward(src, back, start, layer, w, out);
            }
            back.pop();
        }
    }

    /// Ok when every geodesic in `base` meets one of `parts`; otherwise an uncovered cylinder.
    pub fn cover(&self, base: &Cylinder, parts: &[&Cylinder]) -> std::result::Result<(), Cylinder> {
        let compatible: Vec<&Cylinder> =
            parts.iter().copied().filter(|p| base.merge(p, &self.shift).is_some()).collect();
        let Some(first) = compatible.first() else { return Err(base.clone()) };
        if compatible.iter().any(|p| base.implies(p)) {
            return Ok(());
        }
        for c in base.extensions(&self.shift, first.lo < base.lo) {
            self.cover(&c, &compatible)?;
        }
        Ok(())
    }

    /// Splits `base` until the first alignment in time order is forced.
    pub fn partition(&self, base: &Cylinder, aligns: &[&Alignment], out: &mut Vec<Piece>) {
        let compatible: Vec<&Alignment> =
            aligns.iter().copied().filter(|al| base.merge(&al.cylinder, &self.shift).is_some()).collect();
        let Some(first) = compatible.first() else {
            out.push(Piece { cylinder: base.clone(), hit: None });
            return;
        };
        if base.implies(&first.cylinder) {
            out.push(Piece { cylinder: base.clone(), hit: Some((*first).clone()) });
            return;
        }
        for c in base.extensions(&self.shift, first.cylinder.lo < base.lo) {
            self.partition(&c, &compatible, out);
        }
    }

    /// First-hit pieces of B_i going forward (or backward) within 4α.
    pub fn first_hits(&self, i: usize, forward: bool) -> Vec<Piece> {
        let s = self.section(Layer::B, i);
        let four = Length::int(4) * self.alpha();
        let window = if forward {
            Window { lo: Length::zero(), hi: four, lo_open: true, hi_open: false }
        } else {
            Window { lo: -four, hi: Length::zero(), lo_open: false, hi_open: true }
        };
        let mut aligns = self.alignments(&s.cylinder(), s.position, Layer::B, window);
        if !forward {
            aligns.reverse();
        }
        let refs: Vec<&Alignment> = aligns.iter().collect();
        let mut out = Vec::new();
        self.partition(&s.cylinder(), &refs, &mut out);
        out
    }

    /// Definition of a proper family: diameters, open coverage, one-sided returns.
    pub fn check_proper(&self) -> PredicateReport {
        let alpha = self.alpha();
        let mut diam = ConditionResult::new("diameter");
        for (i, p) in self.family.pairs.iter().enumerate() {
            let d = p.d.diameter(&self.graph);
            diam.observe(d / alpha.to_f64());
            if !(d < alpha.to_f64()) {
                diam.fail(format!("diam(D_{i}) = {d} >= alpha"));
            }
        }

        let mut cover = ConditionResult::new("coverage");
        let window = Window::open(Length::zero(), alpha);
        let starts = (0..self.graph.directed_count())
            .map(|e| (format!("start of edge {e}"), Cylinder { lo: 0, edges: vec![e] }, Length::zero()));
        let sections =
            self.family.pairs.iter().enumerate().map(|(i, p)| (format!("B_{i}"), p.b.cylinder(), p.b.position));
        for (name, cyl, pos) in starts.chain(sections) {
            let aligns = self.alignments(&cyl, pos, Layer::B, window);
            let parts: Vec<&Cylinder> = aligns.iter().map(|a| &a.cylinder).collect();
            cover.checked += 1;
            if let Err(w) = self.cover(&cyl, &parts) {
                cover.fail(format!("from {name}: geodesic {w} meets no B within (0, alpha)"));
            }
        }

        let mut returns = ConditionResult::new("one_sided_returns");
        let four = Length::int(4) * alpha;
        for (i, p) in self.family.pairs.iter().enumerate() {
            let aligns = self.alignments(&p.d.cylinder(), p.d.position, Layer::D, Window::closed(-four, four));
            let mut signs: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
            for al in aligns.iter().filter(|al| al.target != i) {
                let e = signs.entry(al.target).or_default();
                e.0 |= Length::zero().le(al.time);
                e.1 |= al.time.le(Length::zero());
            }
            returns.checked += 1;
            for (j, (pos, neg)) in signs {
                if pos && neg {
                    returns.fail(format!("D_{i} meets D_{j} both forward and backward within 4 alpha"));
                }
            }
        }
        PredicateReport { conditions: vec![diam, cover, returns] }
    }

    /// Pre-Markov containment B_i ⊆ φ_{[−3α,3α]} D_j for every pair meeting within 2α.
    pub fn check_pre_markov(&self) -> PredicateReport {
        let alpha = self.alpha();
        let two = Length::int(2) * alpha;
        let three = Length::int(3) * alpha;
        let mut res = ConditionResult::new("pre_markov");
        for (i, p) in self.family.pairs.iter().enumerate() {
            let cyl = p.b.cylinder();
            let near: BTreeSet<usize> = self
                .alignments(&cyl, p.b.position, Layer::B, Window::closed(-two, two))
                .into_iter()
                .map(|al| al.target)
                .collect();
            let d_aligns = self.alignments(&cyl, p.b.position, Layer::D, Window::closed(-three, three));
            for j in near {
                let parts: Vec<&Cylinder> =
                    d_aligns.iter().filter(|al| al.target == j).map(|al| &al.cylinder).collect();
                res.checked += 1;
                if let Err(w) = self.cover(&cyl, &parts) {
                    res.fail(format!("B_{i} meets B_{j} within 2 alpha but geodesic {w} misses D_{j}"));
                }
            }
        }
        PredicateReport { conditions: vec![res] }
    }

    /// Forward: same future implies same next section; backward: same past, same previous.
    pub fn check_markov(&self) -> PredicateReport {
        let mut fwd = ConditionResult::new("markov_forward");
        let mut bwd = ConditionResult::new("markov_backward");
        for i in 0..self.family.len() {
            for (forward, res) in [(true, &mut fwd), (false, &mut bwd)] {
                let pieces = self.first_hits(i, forward);
                res.checked += 1;
                if let Some(w) = self.markov_witness(&pieces, forward) {
                    res.fail(format!("B_{i}: {w}"));
                }
            }
        }
        PredicateReport { conditions: vec![fwd, bwd] }
    }

    fn markov_witness(&self, pieces: &[Piece], forward: bool) -> Option<String> {
        let half = |c: &Cylinder| if forward { c.restrict(0, c.hi()) } else { c.restrict(c.lo, 1) };
        for (x, p) in pieces.iter().enumerate() {
            for q in &pieces[x + 1..] {
                let tp = p.hit.as_ref().map(|h| h.target);
                let tq = q.hit.as_ref().map(|h| h.target);
                if tp == tq {
                    continue;
                }
                if let Some(shared) = half(&p.cylinder).merge(&half(&q.cylinder), &self.shift) {
                    let xw = p.cylinder.merge(&shared, &self.shift);
                    let zw = q.cylinder.merge(&shared, &self.shift);
                    if let (Some(xw), Some(zw)) = (xw, zw) {
                        let side = if forward { "future" } else { "past" };
                        return Some(format!("geodesics {xw} and {zw} share their {side} but hit {tp:?} and {tq:?}"));
                    }
                }
            }
        }
        None
    }

    /// Exact flow of a graph point.
    pub fn flow(&self, p: &GraphPoint, t: Length) -> Result<GraphPoint> {
        let mut index = p.index;
        let mut offset = p.offset + t;
        while !offset.lt(self.graph.length(p.edges[index])) {
            offset = offset - self.graph.length(p.edges[index]);
            index += 1;
            if index >= p.edges.len() {
                return Err(Error::WindowExhausted(t.to_f64()));
            }
        }
        while offset.lt(Length::zero()) {
            if index == 0 {
                return Err(Error::WindowExhausted(t.to_f64()));
            }
            index -= 1;
            offset = offset + self.graph.length(p.edges[index]);
        }
        Ok(GraphPoint { edges: p.edges.clone(), index, offset })
    }

    /// Whether the window around `p`, read at frame `k`, satisfies a section's cylinder.
    fn window_matches(&self, p: &GraphPoint, k: isize, s: &GraphSection, t: Length) -> Result<bool> {
        let c = s.cylinder();
        for i in c.lo..c.hi() {
            let at = k + i;
            if at < 0 || at >= p.edges.len() as isize {
                return Err(Error::WindowExhausted(t.to_f64()));
            }
            if p.edges[at as usize] != c.get(i).expect("in range") {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// First B section strictly ahead of the point and the time to reach it.
    pub fn poincare(&self, p: &GraphPoint) -> Result<(usize, Length)> {
        let mut start = -p.offset;
        for k in p.index..p.edges.len() {
            for &j in self.on_edge(Layer::B, p.edges[k]) {
                let s = self.section(Layer::B, j);
                let t = start + s.position;
                if t.is_positive() && self.window_matches(p, k as isize, s, t)? {
                    return Ok((j, t));
                }
            }
            start = start + self.graph.length(p.edges[k]);
        }
        Err(Error::WindowExhausted(start.to_f64()))
    }

    /// Sections of `layer` that contain the point (time 0 hits).
    pub fn sections_at(&self, p: &GraphPoint, layer: Layer) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &j in self.on_edge(layer, p.edge()) {
            let s = self.section(layer, j);
            if s.position.eq_len(p.offset) && self.window_matches(p, p.index as isize, s, Length::zero())? {
                out.push(j);
            }
        }
        Ok(out)
    }

    /// Last B section at or behind the point, with the (nonpositive) time to it.
    pub fn last_hit(&self, p: &GraphPoint) -> Result<(usize, Length)> {
        let mut end = self.graph.length(p.edge()) - p.offset;
        for k in (0..=p.index).rev() {
            let e = p.edges[k];
            let start = end - self.graph.length(e);
            for &j in self.on_edge(Layer::B, e).iter().rev() {
                let s = self.section(Layer::B, j);
                let t = start + s.position;
                if t.le(Length::zero()) && self.window_matches(p, k as isize, s, t)? {
                    return Ok((j, t));
                }
            }
            end = start;
        }
        Err(Error::WindowExhausted(end.to_f64()))
    }
}

/// Builds the cylinder section family at scale α.
///
/// Every directed edge gets K evenly spaced base positions with spacing at most
/// α(1 − 10⁻⁶); counts are raised on low-index edges until hit counts along
/// closed geodesics have gcd 1. At each position the B sections are the
/// cylinders whose past and future spans first exceed θ_B, and each B sits in
/// the coarser D cylinder with spans exceeding θ_D = ½log(1/α), which keeps
/// diam(D) < α. Sections sharing a position are pushed apart by distinct
/// offsets below δ = 10⁻⁷α so that the D's are disjoint.
pub fn build_sections(g: &MetricGraph, alpha: Length) -> Result<GraphFamily> {
    let limit = systole(g) * Length::ratio(1, 8);
    if !alpha.lt(limit) || !alpha.is_positive() {
        return Err(Error::AlphaTooLarge { alpha: alpha.to_f64(), limit: limit.to_f64() });
    }
    let a = edge_shift(g);
    let af = alpha.to_f64();
    let delta = alpha * Length::ratio(1, 10_000_000);
    let theta_d = (0.5 * (1.0 / af).ln()).max(0.0) + delta.to_f64();
    let theta_b = theta_d + 3.0 * af + delta.to_f64();
    let max_spacing = alpha * Length::ratio(999_999, 1_000_000);

    let mut counts: Vec<i128> = (0..g.directed_count())
        .map(|e| {
            let len = g.length(e);
            let mut k = (len.to_f64() / max_spacing.to_f64()).ceil().max(1.0) as i128;
            while !(len * Length::ratio(1, k)).le(max_spacing) {
                k += 1;
            }
            k
        })
        .collect();
    let mut bump = 0;
    let edges = counts.len();
    while a.weighted_period(|i, _| counts[i] as u64)? != 1 {
        counts[bump % edges] += 1;
        bump += 1;
    }

    let mut pairs = Vec::new();
    for e in 0..g.directed_count() {
        let len = g.length(e);
        let k_e = counts[e];
        for k in 0..k_e {
            let u = len * Length::ratio(2 * k + 1, 2 * k_e);
            let pasts = grow(g, &a, e, u, theta_b, true);
            let futures = grow(g, &a, e, len - u, theta_b, false);
            let n = (pasts.len() * futures.len()) as i128;
            let mut leaf = 0;
            for past in &pasts {
                for future in &futures {
                    let pos = u + delta * Length::ratio(leaf, n);
                    leaf += 1;
                    let b = GraphSection { edge: e, position: pos, past: past.clone(), future: future.clone() };
                    let d = GraphSection {
                        edge: e,
                        position: pos,
                        past: truncate(g, past, u.to_f64(), theta_d, true),
                        future: truncate(g, future, (len - u).to_f64(), theta_d, false),
                    };
                    pairs.push(SectionPair { b, d });
                }
            }
        }
    }
    GraphFamily::new(g, alpha, pairs)
}

/// All past (or future) words whose span first exceeds θ.
fn grow(g: &MetricGraph, a: &TransitionMatrix, e: usize, base: Length, theta: f64, past: bool) -> Vec<Word> {
    let mut out = Vec::new();
    let mut word = Vec::new();
    grow_rec(g, a, e, base.to_f64(), theta, past, &mut word, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn grow_rec(
    g: &MetricGraph,
    a: &TransitionMatrix,
    e: usize,
    span: f64,
    theta: f64,
    past: bool,
    word: &mut Word,
    out: &mut Vec<Word>,
) {
    if span > theta {
        let mut w = word.clone();
        if past {
            w.reverse();
        }
        out.push(w);
        return;
    }
    let last = *word.last().unwrap_or(&e);
    let next = if past { a.predecessors(last) } else { a.successors(last) };
    for &f in next {
        word.push(f);
        grow_rec(g, a, e, span + g.length(f).to_f64(), theta, past, word, out);
        word.pop();
    }
}

/// Shortest part of a past (or future) word next to the edge whose span exceeds θ.
fn truncate(g: &MetricGraph, word: &[usize], base: f64, theta: f64, past: bool) -> Word {
    let mut span = base;
    let mut take = 0;
    let ordered: Vec<usize> = if past { word.iter().rev().copied().collect() } else { word.to_vec() };
    while span <= theta && take < ordered.len() {
        span += g.length(ordered[take]).to_f64();
        take += 1;
    }
    let mut out = ordered[..take].to_vec();
    if past {
        out.reverse();
    }
    out
}
