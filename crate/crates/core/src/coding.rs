//! Section-family predicates and the symbolic coding Σ(R).
//!
//! Graph families are checked exactly through cylinder arithmetic; other
//! backends fall back to sampling with per-sample ChaCha8 streams.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{closed_geodesics, Length};
use crate::sections::{GraphPoint, GraphSystem, Layer, Window};
use crate::sft::{canonical_rotation, is_primitive, TransitionMatrix, Word};
use crate::suspension::{RoofFunction, SuspensionFlow};
use crate::thermo::LocallyConstantPotential;

const MAX_WITNESSES: usize = 8;
/// Hits closer to time 0 than this count as the starting section itself.
const HIT_RESOLUTION: f64 = 1e-9;

/// Outcome of one named condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub name: String,
    pub pass: bool,
    pub checked: usize,
    /// Largest observed ratio to the bound, when the condition has one.
    pub worst: f64,
    pub witnesses: Vec<String>,
}

impl ConditionResult {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), pass: true, checked: 0, worst: 0.0, witnesses: Vec::new() }
    }

    pub fn observe(&mut self, ratio: f64) {
        self.checked += 1;
        if ratio > self.worst || ratio.is_nan() {
            self.worst = ratio;
        }
    }

    pub fn fail(&mut self, witness: String) {
        self.pass = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredicateReport {
    pub conditions: Vec<ConditionResult>,
}

impl PredicateReport {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

/// Σ(R) with the return time of each allowed transition.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingResult {
    pub matrix: TransitionMatrix,
    pub returns: BTreeMap<(usize, usize), f64>,
    /// Number of sampled points certifying each transition; empty when exact.
    pub certificates: BTreeMap<(usize, usize), usize>,
}

impl CodingResult {
    /// Roof ρ(x₀x₁) = return time from B_{x₀} to B_{x₁}.
    pub fn roof(&self) -> Result<RoofFunction> {
        let rho = LocallyConstantPotential::new(&self.matrix, 2, |w| self.returns[&(w[0], w[1])])?;
        RoofFunction::new(rho)
    }

    pub fn flow(&self) -> Result<SuspensionFlow> {
        SuspensionFlow::new(self.matrix.clone(), self.roof()?)
    }
}

/// Flow on a phase space with a section family, as needed by the predicates.
pub trait FlowBackend: Sync {
    type Point: Clone + std::fmt::Debug + Send + Sync;

    fn family_size(&self) -> usize;
    fn alpha(&self) -> f64;
    fn flow(&self, p: &Self::Point, t: f64) -> Result<Self::Point>;
    fn distance(&self, p: &Self::Point, q: &Self::Point) -> f64;
    fn sample_phase_point(&self, rng: &mut ChaCha8Rng) -> Result<Self::Point>;
    fn sample_section_point(&self, layer: Layer, i: usize, rng: &mut ChaCha8Rng) -> Result<Self::Point>;
    /// Times t in [lo, hi] with φ_t(p) in section i of the layer.
    fn hit_times(&self, layer: Layer, i: usize, p: &Self::Point, lo: f64, hi: f64) -> Result<Vec<f64>>;
    /// Another point of B_i with the same future (forward) or past, if one can be drawn.
    fn stable_partner(
        &self,
        i: usize,
        p: &Self::Point,
        forward: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<Self::Point>>;

    fn exact_proper(&self) -> Option<PredicateReport> {
        None
    }
    fn exact_pre_markov(&self) -> Option<PredicateReport> {
        None
    }
    fn exact_markov(&self) -> Option<PredicateReport> {
        None
    }
    fn exact_sigma(&self) -> Option<Result<CodingResult>> {
        None
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Next section of the B layer strictly ahead (or behind) within 4α.
fn first_hit<F: FlowBackend>(backend: &F, p: &F::Point, forward: bool) -> Result<Option<(usize, f64)>> {
    let a4 = 4.0 * backend.alpha();
    let (lo, hi) = if forward { (0.0, a4) } else { (-a4, 0.0) };
    let mut best: Option<(usize, f64)> = None;
    for j in 0..backend.family_size() {
        for t in backend.hit_times(Layer::B, j, p, lo, hi)? {
            if t.abs() <= HIT_RESOLUTION {
                continue;
            }
            let better = best.is_none_or(|(_, b)| if forward { t < b } else { t > b });
            if better {
                best = Some((j, t));
            }
        }
    }
    Ok(best)
}

/// Conditions (1)–(3) of a proper family.
pub fn check_proper_family<F: FlowBackend>(backend: &F, samples: usize, seed: u64) -> Result<PredicateReport> {
    if let Some(r) = backend.exact_proper() {
        return Ok(r);
    }
    let n = backend.family_size();
    let alpha = backend.alpha();
    let mut diam = ConditionResult::new("diameter");
    let per = samples.max(2);
    for i in 0..n {
        let pts: Vec<F::Point> = (0..per)
            .map(|k| backend.sample_section_point(Layer::D, i, &mut stream(seed, (i * per + k) as u64)))
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for x in 0..pts.len() {
            for y in x + 1..pts.len() {
                worst = worst.max(backend.distance(&pts[x], &pts[y]));
            }
        }
        diam.observe(worst / alpha);
        if worst >= alpha {
            diam.fail(format!("sampled diam(D_{i}) = {worst}"));
        }
    }

    let mut cover = ConditionResult::new("coverage");
    let covered: Vec<Result<bool>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let p = backend.sample_phase_point(&mut stream(seed ^ 0xC0, k as u64))?;
            for j in 0..n {
                if backend.hit_times(Layer::B, j, &p, 0.0, alpha)?.iter().any(|&t| t > 0.0 && t < alpha) {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect();
    for (k, c) in covered.into_iter().enumerate() {
        cover.checked += 1;
        if !c? {
            cover.fail(format!("phase sample {k} meets no B within (0, alpha)"));
        }
    }

    let mut returns = ConditionResult::new("one_sided_returns");
    let a4 = 4.0 * alpha;
    for i in 0..n {
        let mut signs = vec![(false, false); n];
        for k in 0..per {
            let x = backend.sample_section_point(Layer::D, i, &mut stream(seed ^ 0xD3, (i * per + k) as u64))?;
            for (j, s) in signs.iter_mut().enumerate().filter(|(j, _)| *j != i) {
                for t in backend.hit_times(Layer::D, j, &x, -a4, a4)? {
                    s.0 |= t >= 0.0;
                    s.1 |= t <= 0.0;
                }
            }
        }
        returns.checked += 1;
        for (j, s) in signs.iter().enumerate() {
            if s.0 && s.1 {
                returns.fail(format!("D_{i} meets D_{j} in both time directions"));
            }
        }
    }
    Ok(PredicateReport { conditions: vec![diam, cover, returns] })
}

/// B_i ⊆ φ_{[−3α,3α]} D_j whenever B_i meets φ_{[−2α,2α]} B_j.
pub fn check_pre_markov<F: FlowBackend>(backend: &F, samples: usize, seed: u64) -> Result<PredicateReport> {
    if let Some(r) = backend.exact_pre_markov() {
        return Ok(r);
    }
    let n = backend.family_size();
    let alpha = backend.alpha();
    let mut res = ConditionResult::new("pre_markov");
    for i in 0..n {
        let pts: Vec<F::Point> = (0..samples.max(1))
            .map(|k| backend.sample_section_point(Layer::B, i, &mut stream(seed ^ 0x9E, (i * samples + k) as u64)))
            .collect::<Result<_>>()?;
        let mut near = BTreeSet::new();
        for p in &pts {
            for j in 0..n {
                if !backend.hit_times(Layer::B, j, p, -2.0 * alpha, 2.0 * alpha)?.is_empty() {
                    near.insert(j);
                }
            }
        }
        for j in near {
            res.checked += 1;
            for (k, p) in pts.iter().enumerate() {
                if backend.hit_times(Layer::D, j, p, -3.0 * alpha, 3.0 * alpha)?.is_empty() {
                    res.fail(format!("sample {k} of B_{i} misses D_{j}"));
                    break;
                }
            }
        }
    }
    Ok(PredicateReport { conditions: vec![res] })
}

/// Same stable (unstable) data implies the same next (previous) section.
pub fn check_markov_property<F: FlowBackend>(backend: &F, samples: usize, seed: u64) -> Result<PredicateReport> {
    if let Some(r) = backend.exact_markov() {
        return Ok(r);
    }
    let mut fwd = ConditionResult::new("markov_forward");
    let mut bwd = ConditionResult::new("markov_backward");
    for i in 0..backend.family_size() {
        for k in 0..samples {
            let mut rng = stream(seed ^ 0x3A, (i * samples + k) as u64);
            let x = backend.sample_section_point(Layer::B, i, &mut rng)?;
            for (forward, res) in [(true, &mut fwd), (false, &mut bwd)] {
                let Some(z) = backend.stable_partner(i, &x, forward, &mut rng)? else { continue };
                res.checked += 1;
                let hx = first_hit(backend, &x, forward)?.map(|h| h.0);
                let hz = first_hit(backend, &z, forward)?.map(|h| h.0);
                if hx != hz {
                    res.fail(format!("B_{i}: {x:?} -> {hx:?} but {z:?} -> {hz:?}"));
                }
            }
        }
    }
    Ok(PredicateReport { conditions: vec![fwd, bwd] })
}

/// Σ(R): i → j iff some point of B_i first returns to B_j.
pub fn build_sigma<F: FlowBackend>(backend: &F, samples: usize, seed: u64) -> Result<CodingResult> {
    if let Some(r) = backend.exact_sigma() {
        return r;
    }
    let n = backend.family_size();
    let mut returns: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut certificates: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..n {
        for k in 0..samples {
            let p = backend.sample_section_point(Layer::B, i, &mut stream(seed ^ 0x51, (i * samples + k) as u64))?;
            match first_hit(backend, &p, true)? {
                Some((j, t)) => {
                    let r = returns.entry((i, j)).or_insert(t);
                    *r = r.min(t);
                    *certificates.entry((i, j)).or_insert(0) += 1;
                }
                None => return Err(Error::UncertifiedTransition { from: i, to: i }),
            }
        }
    }
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in returns.keys() {
        succ[i].push(j);
    }
    let matrix = TransitionMatrix::from_successors(succ)?;
    Ok(CodingResult { matrix, returns, certificates })
}

impl FlowBackend for GraphSystem {
    type Point = GraphPoint;

    fn family_size(&self) -> usize {
        self.family.len()
    }

    fn alpha(&self) -> f64 {
        self.family.alpha.to_f64()
    }

    fn flow(&self, p: &GraphPoint, t: f64) -> Result<GraphPoint> {
        GraphSystem::flow(self, p, Length::Real(t))
    }

    fn distance(&self, p: &GraphPoint, q: &GraphPoint) -> f64 {
        graph_distance(self, p, q)
    }

    fn sample_phase_point(&self, rng: &mut ChaCha8Rng) -> Result<GraphPoint> {
        let n = self.shift.size();
        let mut edges = vec![rng.gen_range(0..n)];
        for _ in 0..24 {
            let s = self.shift.successors(*edges.last().expect("nonempty"));
            edges.push(s[rng.gen_range(0..s.len())]);
        }
        let index = 12;
        let offset = self.graph.length(edges[index]) * Length::ratio(rng.gen_range(0..1000), 1000);
        Ok(GraphPoint { edges, index, offset })
    }

    fn sample_section_point(&self, layer: Layer, i: usize, rng: &mut ChaCha8Rng) -> Result<GraphPoint> {
        let s = self.section(layer, i);
        let c = s.cylinder();
        let mut edges = c.edges.clone();
        let mut index = (-c.lo) as usize;
        for _ in 0..12 {
            let p = self.shift.predecessors(edges[0]);
            edges.insert(0, p[rng.gen_range(0..p.len())]);
            index += 1;
            let f = self.shift.successors(*edges.last().expect("nonempty"));
            edges.push(f[rng.gen_range(0..f.len())]);
        }
        Ok(GraphPoint { edges, index, offset: s.position })
    }

    fn hit_times(&self, layer: Layer, i: usize, p: &GraphPoint, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let here = crate::sections::Cylinder { lo: -(p.index as isize), edges: p.edges.clone() };
        let w = Window::closed(Length::Real(lo), Length::Real(hi));
        Ok(self
            .alignments(&here, p.offset, layer, w)
            .into_iter()
            .filter(|al| al.target == i && here.implies(&al.cylinder))
            .map(|al| al.time.to_f64())
            .collect())
    }

    fn stable_partner(
        &self,
        i: usize,
        p: &GraphPoint,
        forward: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<GraphPoint>> {
        let c = self.section(Layer::B, i).cylinder();
        let mut q = p.clone();
        let keep = (-c.lo) as usize;
        if forward {
            let cut = p.index - keep;
            for k in (0..cut).rev() {
                let pr = self.shift.predecessors(q.edges[k + 1]);
                q.edges[k] = pr[rng.gen_range(0..pr.len())];
            }
        } else {
            let cut = p.index + (c.hi() as usize);
            for k in cut..q.edges.len() {
                let su = self.shift.successors(q.edges[k - 1]);
                q.edges[k] = su[rng.gen_range(0..su.len())];
            }
        }
        Ok(Some(q))
    }

    fn exact_proper(&self) -> Option<PredicateReport> {
        Some(self.check_proper())
    }

    fn exact_pre_markov(&self) -> Option<PredicateReport> {
        Some(self.check_pre_markov())
    }

    fn exact_markov(&self) -> Option<PredicateReport> {
        Some(self.check_markov())
    }

    fn exact_sigma(&self) -> Option<Result<CodingResult>> {
        Some(graph_coding(self).map(|g| g.result))
    }
}

/// Window-limited distance: |Δoffset| when the windows agree around the
/// current edge, otherwise the flow-metric bound from the agreement span.
pub fn graph_distance(sys: &GraphSystem, p: &GraphPoint, q: &GraphPoint) -> f64 {
    let back = p.index.min(q.index);
    let ahead = (p.edges.len() - p.index).min(q.edges.len() - q.index);
    let agree = |k: isize| p.edges[(p.index as isize + k) as usize] == q.edges[(q.index as isize + k) as usize];
    if p.edge() == q.edge() && (-(back as isize)..ahead as isize).all(agree) {
        return (p.offset - q.offset).to_f64().abs();
    }
    if p.edge() != q.edge() {
        return f64::INFINITY;
    }
    let mut before = 0usize;
    while before < back && agree(-(before as isize) - 1) {
        before += 1;
    }
    let mut after = 1usize;
    while after < ahead && agree(after as isize) {
        after += 1;
    }
    let g = &sys.graph;
    let past: f64 = p.offset.to_f64() + (1..=before).map(|k| g.length(p.edges[p.index - k]).to_f64()).sum::<f64>();
    let future: f64 = g.length(p.edge()).to_f64() - p.offset.to_f64()
        + (1..after).map(|k| g.length(p.edges[p.index + k]).to_f64()).sum::<f64>();
    0.5 * ((-2.0 * past).exp() + (-2.0 * future).exp()) + (p.offset - q.offset).to_f64().abs()
}

/// Exact coding of a graph family: return time and frame shift per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCoding {
    pub result: CodingResult,
    pub exact: BTreeMap<(usize, usize), (Length, isize)>,
}

pub fn graph_coding(sys: &GraphSystem) -> Result<GraphCoding> {
    let n = sys.family.len();
    let pieces: Vec<_> = (0..n).into_par_iter().map(|i| sys.first_hits(i, true)).collect();
    let mut exact: BTreeMap<(usize, usize), (Length, isize)> = BTreeMap::new();
    for (i, ps) in pieces.iter().enumerate() {
        for p in ps {
            let Some(hit) = &p.hit else {
                return Err(Error::NoReturn(format!("geodesic {} in B_{i} has no return within 4 alpha", p.cylinder)));
            };
            match exact.get(&(i, hit.target)) {
                Some(&(t, k)) if !t.eq_len(hit.time) || k != hit.shift => {
                    return Err(Error::InvalidArgument(format!(
                        "return time B_{i} -> B_{} is not constant: {t} vs {}",
                        hit.target, hit.time
                    )))
                }
                Some(_) => {}
                None => {
                    exact.insert((i, hit.target), (hit.time, hit.shift));
                }
            }
        }
    }
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in exact.keys() {
        succ[i].push(j);
    }
    let matrix = TransitionMatrix::from_successors(succ)?;
    let returns = exact.iter().map(|(&k, &(t, _))| (k, t.to_f64())).collect();
    Ok(GraphCoding { result: CodingResult { matrix, returns, certificates: BTreeMap::new() }, exact })
}

impl GraphCoding {
    /// Geodesic coded by `states` with B_{states[center]} at height `h`.
    pub fn project(&self, sys: &GraphSystem, states: &[usize], center: usize, h: Length) -> Result<GraphPoint> {
        let mut frame = vec![0isize; states.len()];
        for k in center + 1..states.len() {
            frame[k] = frame[k - 1] + self.step(states[k - 1], states[k])?.1;
        }
        for k in (0..center).rev() {
            frame[k] = frame[k + 1] - self.step(states[k], states[k + 1])?.1;
        }
        let mut cyl = sys.section(Layer::B, states[center]).cylinder();
        let order = (center + 1..states.len()).chain((0..center).rev());
        for k in order {
            let c = sys.section(Layer::B, states[k]).cylinder().shifted(frame[k]);
            cyl = cyl.merge(&c, &sys.shift).ok_or_else(|| Error::InadmissibleWord(states.to_vec()))?;
        }
        let p = GraphPoint {
            edges: cyl.edges.clone(),
            index: (-cyl.lo) as usize,
            offset: sys.section(Layer::B, states[center]).position,
        };
        sys.flow(&p, h)
    }

    fn step(&self, i: usize, j: usize) -> Result<(Length, isize)> {
        self.exact.get(&(i, j)).copied().ok_or_else(|| Error::InadmissibleWord(vec![i, j]))
    }

    /// Periods of primitive closed orbits of the coded suspension up to `l_max`, sorted.
    pub fn primitive_periods(&self, l_max: Length) -> Vec<Length> {
        let a = &self.result.matrix;
        let n = a.size();
        let starts: Vec<Vec<Length>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut out = Vec::new();
                let mut path = vec![s];
                self.cycles(s, Length::zero(), l_max, &mut path, &mut out);
                out
            })
            .collect();
        let mut all: Vec<Length> = starts.into_iter().flatten().collect();
        all.sort_by(|x, y| x.compare(*y));
        all
    }

    fn cycles(&self, start: usize, len: Length, l_max: Length, path: &mut Word, out: &mut Vec<Length>) {
        let a = &self.result.matrix;
        let last = *path.last().expect("nonempty");
        for &next in a.successors(last) {
            if next < start {
                continue;
            }
            let l = len + self.exact[&(last, next)].0;
            if !l.le(l_max) {
                continue;
            }
            if next == start && is_primitive(path) && canonical_rotation(path) == *path {
                out.push(l);
            }
            path.push(next);
            self.cycles(start, l, l_max, path, out);
            path.pop();
        }
    }
}

/// Sorted closed-geodesic lengths up to `l_max`.
pub fn geodesic_lengths(sys: &GraphSystem, l_max: Length) -> Vec<Length> {
    let mut v: Vec<Length> = closed_geodesics(&sys.graph, l_max).into_iter().map(|g| g.1).collect();
    v.sort_by(|x, y| x.compare(*y));
    v
}

/// Semiconjugacy checks for a graph coding.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiconjugacyReport {
    pub report: PredicateReport,
    /// Largest |π̂(f_t x) − φ_t(π̂ x)| observed.
    pub max_error: f64,
    pub max_multiplicity: usize,
}

/// Compares π̂∘f_t with φ_t∘π̂ on random coded points, and codes random phase points.
pub fn check_semiconjugacy(
    sys: &GraphSystem,
    coding: &GraphCoding,
    samples: usize,
    horizon: Length,
    seed: u64,
) -> Result<SemiconjugacyReport> {
    let a = &coding.result.matrix;
    let n = a.size();
    let min_return = coding.exact.values().map(|v| v.0).reduce(Length::min).expect("transitions");
    let steps = (horizon.to_f64() / min_return.to_f64()).ceil() as usize + 4;
    let margin = 64;
    let exact = sys.graph.all_rational();

    let results: Vec<Result<(f64, String)>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let mut states = vec![rng.gen_range(0..n)];
            for _ in 0..margin + steps + margin {
                let s = a.successors(*states.last().expect("nonempty"));
                states.push(s[rng.gen_range(0..s.len())]);
            }
            let center = margin;
            let rho0 = coding.step(states[center], states[center + 1])?.0;
            let h = rho0 * Length::ratio(rng.gen_range(0..1000), 1000);
            let t = horizon * Length::ratio(rng.gen_range(0..=1000), 1000);
            let base = coding.project(sys, &states, center, h)?;
            let right = sys.flow(&base, t)?;
            let (mut m, mut hh) = (center, h + t);
            loop {
                let r = coding.step(states[m], states[m + 1])?.0;
                if hh.lt(r) {
                    break;
                }
                hh = hh - r;
                m += 1;
            }
            let left = coding.project(sys, &states[m - margin / 2..], margin / 2, hh)?;
            let err = graph_distance(sys, &left, &right);
            Ok((err, format!("states from {} at t = {t}", states[center])))
        })
        .collect();
    let mut conj = ConditionResult::new("conjugacy");
    let mut max_error: f64 = 0.0;
    for r in results {
        let (err, what) = r?;
        conj.observe(err);
        max_error = max_error.max(err);
        let ok = if exact { err == 0.0 } else { err <= 1e-12 };
        if !ok {
            conj.fail(format!("{what}: error {err}"));
        }
    }

    let mut onto = ConditionResult::new("surjective");
    let mut finite = ConditionResult::new("finite_to_one");
    let mut max_multiplicity = 0;
    for k in 0..samples {
        let mut rng = stream(seed ^ 0x5eed, k as u64);
        let mut edges = vec![rng.gen_range(0..sys.shift.size())];
        let total = 2 * margin + 8;
        for _ in 0..total {
            let s = sys.shift.successors(*edges.last().expect("nonempty"));
            edges.push(s[rng.gen_range(0..s.len())]);
        }
        let target_index = total / 2;
        let y = GraphPoint {
            edges: edges.clone(),
            index: target_index,
            offset: sys.graph.length(edges[target_index]) * Length::ratio(rng.gen_range(0..1000), 1000),
        };
        let mut p = GraphPoint { edges, index: 8, offset: Length::zero() };
        let (mut j, t0) = sys.poincare(&p)?;
        p = sys.flow(&p, t0)?;
        let mut states = vec![j];
        let mut hit_points = vec![p.clone()];
        while p.index < target_index + 8 {
            let (next, t) = sys.poincare(&p)?;
            if coding.step(j, next).map(|s| s.0.eq_len(t)) != Ok(true) {
                onto.fail(format!("hit sequence B_{j} -> B_{next} after {t} is not a coded transition"));
                break;
            }
            p = sys.flow(&p, t)?;
            j = next;
            states.push(j);
            hit_points.push(p.clone());
        }
        let c = hit_points
            .iter()
            .rposition(|q| q.index < y.index || (q.index == y.index && q.offset.le(y.offset)))
            .unwrap_or(0);
        let hq = &hit_points[c];
        let lag = distance_along(sys, hq, &y);
        let img = coding.project(sys, &states, c, lag)?;
        let err = graph_distance(sys, &img, &y);
        onto.observe(err);
        if !(err == 0.0 || (!exact && err <= 1e-12)) {
            onto.fail(format!("phase sample {k} is {err} from its coded image"));
        }
        let mult = sys.sections_at(hq, Layer::B)?.len();
        max_multiplicity = max_multiplicity.max(mult);
        finite.observe(mult as f64);
        if mult == 0 || mult > sys.family.len() {
            finite.fail(format!("phase sample {k} has {mult} codings"));
        }
    }
    Ok(SemiconjugacyReport {
        report: PredicateReport { conditions: vec![conj, onto, finite] },
        max_error,
        max_multiplicity,
    })
}

/// Flow time from p forward to q on the same window.
fn distance_along(sys: &GraphSystem, p: &GraphPoint, q: &GraphPoint) -> Length {
    let mut t = -p.offset;
    for k in p.index..q.index {
        t = t + sys.graph.length(p.edges[k]);
    }
    t + q.offset
}

/// Regularity of the return time and of the flow projections.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub report: PredicateReport,
    /// Lipschitz constant of the return time on each transition piece.
    pub return_lipschitz: f64,
    /// Hölder exponent of the projections.
    pub projection_exponent: f64,
}

/// For graph families the return time is constant on every transition and
/// the projection is a translation along the flow.
pub fn regularity_report(sys: &GraphSystem, coding: &GraphCoding) -> RegularityReport {
    let mut ret = ConditionResult::new("return_time_constant");
    let mut worst: f64 = 0.0;
    for i in 0..sys.family.len() {
        for piece in sys.first_hits(i, true) {
            let Some(hit) = piece.hit else {
                ret.fail(format!("B_{i} has a piece without return"));
                continue;
            };
            let recorded = coding.exact.get(&(i, hit.target)).map(|v| v.0);
            let diff = recorded.map_or(f64::INFINITY, |r| (r - hit.time).to_f64().abs());
            ret.observe(diff);
            worst = worst.max(diff);
            if diff != 0.0 {
                ret.fail(format!("B_{i} -> B_{}: return {} differs from {:?}", hit.target, hit.time, recorded));
            }
        }
    }
    let mut proj = ConditionResult::new("projection_lipschitz");
    proj.observe(1.0);
    RegularityReport {
        report: PredicateReport { conditions: vec![ret, proj] },
        return_lipschitz: worst,
        projection_exponent: 1.0,
    }
}

/// Empirical autocorrelation of cylinder indicators along a stationary chain.
pub fn cylinder_correlations(
    measure: &crate::thermo::MarkovMeasure,
    symbols: &[usize],
    lag: usize,
    length: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = measure.sample_symbols(length, &mut rng);
    symbols
        .iter()
        .map(|&s| {
            let series: Vec<f64> = path.iter().map(|&x| if x == s { 1.0 } else { 0.0 }).collect();
            crate::suspension::autocorrelation(&series, lag)
        })
        .collect()
}
