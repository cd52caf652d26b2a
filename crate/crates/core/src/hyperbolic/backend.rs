//! A sampled section family in GH²: good rectangles stacked along one geodesic.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rect::flow_box_time;
use super::{gx_distance, maximal_rectangle, rect_geodesic, Arc, Geodesic, GoodRectangle, GX_TOL};
use crate::coding::FlowBackend;
use crate::error::{Error, Result};
use crate::sections::Layer;

/// Pairs B_k ⊆ D_k of rectangles centered at g_{kα/2} c, all sharing the
/// same arcs (B uses the middle half of each D arc).
#[derive(Debug, Clone)]
pub struct HypFamily {
    alpha: f64,
    pairs: Vec<(GoodRectangle, GoodRectangle)>,
}

impl HypFamily {
    /// `n` sections along c; arcs are `shrink` times the largest admissible half-width.
    pub fn along(c: &Geodesic, tau: f64, alpha: f64, n: usize, shrink: f64, grid: usize) -> Result<Self> {
        if n == 0 || !(alpha > 0.0 && alpha < 1.0) || !(shrink > 0.0 && shrink <= 1.0) {
            return Err(Error::InvalidArgument("need n ≥ 1, 0 < alpha < 1, 0 < shrink ≤ 1".into()));
        }
        let centers: Vec<Geodesic> = (0..n).map(|k| c.flowed(0.5 * alpha * k as f64)).collect();
        let mut half = f64::INFINITY;
        for g in &centers {
            half = half.min(0.5 * maximal_rectangle(g, tau, grid)?.plus_arc().len);
        }
        half *= shrink;
        let mut pairs = Vec::with_capacity(n);
        for g in &centers {
            let d = super::make_rectangle(g, tau, Arc::centered(c.minus(), half), Arc::centered(c.plus(), half), grid)?;
            let b = d.with_arcs(Arc::centered(c.minus(), 0.5 * half), Arc::centered(c.plus(), 0.5 * half), grid)?;
            pairs.push((b, d));
        }
        Ok(Self { alpha, pairs })
    }

    pub fn rect(&self, layer: Layer, i: usize) -> &GoodRectangle {
        match layer {
            Layer::B => &self.pairs[i].0,
            Layer::D => &self.pairs[i].1,
        }
    }

    fn sample_in(&self, r: &GoodRectangle, rng: &mut ChaCha8Rng) -> Result<Geodesic> {
        rect_geodesic(r, r.minus_arc().at(rng.gen_range(0.0..=1.0)), r.plus_arc().at(rng.gen_range(0.0..=1.0)))
    }
}

impl FlowBackend for HypFamily {
    type Point = Geodesic;

    fn family_size(&self) -> usize {
        self.pairs.len()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn flow(&self, p: &Geodesic, t: f64) -> Result<Geodesic> {
        Ok(p.flowed(t))
    }

    fn distance(&self, p: &Geodesic, q: &Geodesic) -> f64 {
        gx_distance(p, q, GX_TOL)
    }

    /// Points of the tube swept by the B sections up to the last one.
    fn sample_phase_point(&self, rng: &mut ChaCha8Rng) -> Result<Geodesic> {
        let eta = self.sample_in(&self.pairs[0].0, rng)?;
        let span = 0.5 * self.alpha * (self.pairs.len() - 1) as f64;
        Ok(eta.flowed(rng.gen_range(0.0..=span.max(0.0))))
    }

    fn sample_section_point(&self, layer: Layer, i: usize, rng: &mut ChaCha8Rng) -> Result<Geodesic> {
        self.sample_in(self.rect(layer, i), rng)
    }

    fn hit_times(&self, layer: Layer, i: usize, p: &Geodesic, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let r = self.rect(layer, i);
        if !r.admits(p) {
            return Ok(Vec::new());
        }
        // The horocycle crossing is unique within ±1 of the point where B_c vanishes.
        let mid = 0.5 * (lo + hi);
        let reach = 0.5 * (hi - lo) + 1.0;
        match flow_box_time(r, &p.flowed(mid), reach) {
            Ok(t) if mid + t >= lo && mid + t <= hi => Ok(vec![mid + t]),
            Ok(_) | Err(Error::NotInFlowBox(_)) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    fn stable_partner(&self, i: usize, p: &Geodesic, forward: bool, rng: &mut ChaCha8Rng) -> Result<Option<Geodesic>> {
        let r = &self.pairs[i].0;
        let z = if forward {
            rect_geodesic(r, r.minus_arc().at(rng.gen_range(0.0..=1.0)), p.plus())
        } else {
            rect_geodesic(r, p.minus(), r.plus_arc().at(rng.gen_range(0.0..=1.0)))
        };
        Ok(z.ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{check_markov_property, check_pre_markov, check_proper_family};
    use rand::SeedableRng;

    #[test]
    fn tube_family_predicates() {
        let c = Geodesic::from_angles(3.3, 0.4, 0.0).unwrap();
        let fam = HypFamily::along(&c, 10.0, 0.5, 4, 0.1, 5).unwrap();
        let p = fam.sample_section_point(Layer::B, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let hits = fam.hit_times(Layer::B, 2, &p, 0.0, 2.0).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits[0] - 0.25).abs() < 0.05, "{hits:?}");

        let proper = check_proper_family(&fam, 40, 3).unwrap();
        assert!(proper.pass(), "{proper:?}");
        assert!(check_pre_markov(&fam, 20, 3).unwrap().pass());
        let m = check_markov_property(&fam, 20, 3).unwrap();
        assert!(m.pass(), "{m:?}");
    }
}
