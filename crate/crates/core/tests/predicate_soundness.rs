//! Each predicate must reject a family built to break it, and only that predicate.
//!
//! The toy flow translates x on a circle of length `len` and keeps three
//! transverse coordinates: y (future data, shared by stable partners), z (past
//! data, shared by unstable partners) and w (kept by both).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symflow::coding::{check_markov_property, check_pre_markov, check_proper_family, FlowBackend, PredicateReport};
use symflow::sections::Layer;
use symflow::Result;

type Slab = (f64, f64);
const FULL: Slab = (0.0, 1.0);

#[derive(Debug, Clone)]
struct Box3 {
    y: Slab,
    z: Slab,
    w: Slab,
}

impl Box3 {
    fn full() -> Self {
        Self { y: FULL, z: FULL, w: FULL }
    }

    fn contains(&self, p: &[f64; 4]) -> bool {
        let inside = |s: Slab, v: f64| v >= s.0 && v < s.1;
        inside(self.y, p[1]) && inside(self.z, p[2]) && inside(self.w, p[3])
    }

    fn sample(&self, x: f64, rng: &mut ChaCha8Rng) -> [f64; 4] {
        let mut draw = |s: Slab| rng.gen_range(s.0..s.1);
        [x, draw(self.y), draw(self.z), draw(self.w)]
    }
}

#[derive(Debug, Clone)]
struct Toy {
    len: f64,
    alpha: f64,
    eps: f64,
    /// (position, B, D)
    sections: Vec<(f64, Box3, Box3)>,
}

impl Toy {
    /// Full sections every 0.05 on a circle of length 1, α = 0.1.
    fn good() -> Self {
        let sections = (0..20).map(|k| (0.05 * k as f64, Box3::full(), Box3::full())).collect();
        Self { len: 1.0, alpha: 0.1, eps: 0.01, sections }
    }

    fn section(&self, layer: Layer, i: usize) -> &Box3 {
        match layer {
            Layer::B => &self.sections[i].1,
            Layer::D => &self.sections[i].2,
        }
    }
}

impl FlowBackend for Toy {
    type Point = [f64; 4];

    fn family_size(&self) -> usize {
        self.sections.len()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn flow(&self, p: &[f64; 4], t: f64) -> Result<[f64; 4]> {
        Ok([(p[0] + t).rem_euclid(self.len), p[1], p[2], p[3]])
    }

    fn distance(&self, p: &[f64; 4], q: &[f64; 4]) -> f64 {
        let dx = (p[0] - q[0]).rem_euclid(self.len);
        let transverse: f64 = (1..4).map(|k| (p[k] - q[k]).abs()).sum();
        dx.min(self.len - dx) + self.eps * transverse
    }

    fn sample_phase_point(&self, rng: &mut ChaCha8Rng) -> Result<[f64; 4]> {
        Ok(Box3::full().sample(rng.gen_range(0.0..self.len), rng))
    }

    fn sample_section_point(&self, layer: Layer, i: usize, rng: &mut ChaCha8Rng) -> Result<[f64; 4]> {
        Ok(self.section(layer, i).sample(self.sections[i].0, rng))
    }

    fn hit_times(&self, layer: Layer, i: usize, p: &[f64; 4], lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !self.section(layer, i).contains(p) {
            return Ok(Vec::new());
        }
        let t0 = (self.sections[i].0 - p[0]).rem_euclid(self.len);
        let k0 = ((lo - t0) / self.len).ceil() as i64;
        let k1 = ((hi - t0) / self.len).floor() as i64;
        Ok((k0..=k1).map(|k| t0 + k as f64 * self.len).collect())
    }

    fn stable_partner(&self, i: usize, p: &[f64; 4], forward: bool, rng: &mut ChaCha8Rng) -> Result<Option<[f64; 4]>> {
        let b = &self.sections[i].1;
        let mut q = b.sample(p[0], rng);
        q[3] = p[3];
        if forward {
            q[1] = p[1];
        } else {
            q[2] = p[2];
        }
        Ok(Some(q))
    }
}

fn failing(t: &Toy) -> Vec<String> {
    let reports: Vec<PredicateReport> = vec![
        check_proper_family(t, 400, 1).unwrap(),
        check_pre_markov(t, 60, 2).unwrap(),
        check_markov_property(t, 60, 3).unwrap(),
    ];
    reports.iter().flat_map(|r| r.failing().into_iter().map(String::from)).collect()
}

#[test]
fn good_family_passes() {
    assert!(failing(&Toy::good()).is_empty());
}

#[test]
fn wide_sections_break_diameter() {
    let t = Toy { eps: 1.0, ..Toy::good() };
    assert_eq!(failing(&t), ["diameter"]);
}

#[test]
fn gap_breaks_coverage() {
    let mut t = Toy::good();
    t.sections.retain(|s| (s.0 - 0.5).abs() > 1e-9 && (s.0 - 0.55).abs() > 1e-9);
    assert_eq!(failing(&t), ["coverage"]);
}

#[test]
fn short_circle_breaks_one_sided_returns() {
    let mut t = Toy::good();
    t.len = 0.6;
    t.sections.truncate(12);
    assert_eq!(failing(&t), ["one_sided_returns"]);
}

#[test]
fn neutral_split_breaks_pre_markov() {
    let mut t = Toy::good();
    let half = Box3 { w: (0.0, 0.5), ..Box3::full() };
    t.sections[5].1 = half.clone();
    t.sections[5].2 = half;
    assert_eq!(failing(&t), ["pre_markov"]);
}

#[test]
fn future_split_breaks_backward_markov() {
    let mut t = Toy::good();
    t.sections[5].1 = Box3 { y: (0.0, 0.5), ..Box3::full() };
    assert_eq!(failing(&t), ["markov_backward"]);
}

#[test]
fn past_split_breaks_forward_markov() {
    let mut t = Toy::good();
    t.sections[5].1 = Box3 { z: (0.0, 0.5), ..Box3::full() };
    assert_eq!(failing(&t), ["markov_forward"]);
}
