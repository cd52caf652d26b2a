//! Sampled checks of the quantitative lemmas about rectangles and the metric
//! on geodesics. Each sample draws from its own ChaCha8 stream, so reports
//! are identical for a fixed seed regardless of thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::rect::{dist_pair, flow_box_time};
use super::{
    bracket, dist_to_geodesic, gx_distance_rel, make_rectangle, maximal_rectangle, proj_rect, rect_geodesic,
    return_time, stable_partner, unstable_partner, v_time, Arc, BoundaryPoint, Geodesic, GoodRectangle,
};
use crate::error::{Error, Result};

/// Sampling and tolerance knobs for [`verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifierConfig {
    pub samples: usize,
    pub seed: u64,
    pub tau: f64,
    /// Flow-box scale: projections search ±α, return times lie in [0, α].
    pub alpha: f64,
    /// Quadrature tolerance relative to the pair's separation.
    pub gx_rel: f64,
    /// Points per arc in the ∂(c, τ) grid check.
    pub grid: usize,
    /// Residual allowed in identities.
    pub tol: f64,
    /// T in the flow-Lipschitz bound.
    pub horizon: f64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self { samples: 1000, seed: 7, tau: 10.0, alpha: 0.5, gx_rel: 1e-8, grid: 9, tol: 1e-9, horizon: 3.0 }
    }
}

impl VerifierConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.tau, self.alpha, self.gx_rel, self.tol, self.horizon];
        if self.samples == 0 || self.grid < 2 || pos.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidArgument("verifier settings must be positive (grid ≥ 2)".into()));
        }
        if self.alpha >= 1.0 {
            return Err(Error::InvalidArgument(format!("alpha = {} must be below 1", self.alpha)));
        }
        if self.tau < 10.0 {
            return Err(Error::InvalidArgument(format!("tau = {} is below 10", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lemma {
    GxBound,
    DistanceBounds,
    BusemannWedge,
    Separation,
    ReturnLipschitz,
    ProjHolder,
    Contraction,
    FlowLipschitz,
    ShadowClose,
    Bracket,
}

impl Lemma {
    pub const ALL: [Lemma; 10] = [
        Lemma::GxBound,
        Lemma::DistanceBounds,
        Lemma::BusemannWedge,
        Lemma::Separation,
        Lemma::ReturnLipschitz,
        Lemma::ProjHolder,
        Lemma::Contraction,
        Lemma::FlowLipschitz,
        Lemma::ShadowClose,
        Lemma::Bracket,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Lemma::GxBound => "gx_bound",
            Lemma::DistanceBounds => "distance_bounds",
            Lemma::BusemannWedge => "busemann_wedge",
            Lemma::Separation => "separation",
            Lemma::ReturnLipschitz => "return_lipschitz",
            Lemma::ProjHolder => "proj_holder",
            Lemma::Contraction => "contraction",
            Lemma::FlowLipschitz => "flow_lipschitz",
            Lemma::ShadowClose => "shadow_close",
            Lemma::Bracket => "bracket",
        }
    }

    fn tag(&self) -> u64 {
        0x5EED_0000 + *self as u64
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .iter()
            .copied()
            .find(|l| l.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma '{s}'")))
    }
}

/// Outcome of one sampled check.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub samples: usize,
    /// Largest observed value of the checked quantity.
    pub worst_ratio: f64,
    /// The bound it is compared against (infinite when only finiteness is claimed).
    pub bound: f64,
    /// Empirical constants, in a fixed order.
    pub constants: Vec<(&'static str, f64)>,
    pub pass: bool,
    pub witness: Option<String>,
}

fn rng_for(seed: u64, tag: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag);
    rng.set_stream(k as u64);
    rng
}

fn random_center(rng: &mut ChaCha8Rng) -> Result<Geodesic> {
    let m = rng.gen_range(0.0..std::f64::consts::TAU);
    let p = m + std::f64::consts::PI + rng.gen_range(-1.2..1.2);
    Geodesic::from_angles(m, p, rng.gen_range(-1.0..1.0))
}

fn random_rect(rng: &mut ChaCha8Rng, cfg: &VerifierConfig) -> Result<GoodRectangle> {
    maximal_rectangle(&random_center(rng)?, cfg.tau, cfg.grid)
}

fn frac(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.25) {
        if rng.gen_bool(0.5) {
            0.0
        } else {
            1.0
        }
    } else {
        rng.gen_range(0.0..=1.0)
    }
}

fn random_in(rng: &mut ChaCha8Rng, r: &GoodRectangle) -> Result<Geodesic> {
    let (f, g) = (frac(rng), frac(rng));
    rect_geodesic(r, r.minus_arc().at(f), r.plus_arc().at(g))
}

/// Two geodesics of R whose endpoint fractions differ by at most h.
fn pair_in(rng: &mut ChaCha8Rng, r: &GoodRectangle, um: Arc, up: Arc, h: f64) -> Result<(Geodesic, Geodesic)> {
    let (f, g) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
    let f2 = (f + h * rng.gen_range(-1.0..=1.0f64)).clamp(0.0, 1.0);
    let g2 = (g + h * rng.gen_range(-1.0..=1.0f64)).clamp(0.0, 1.0);
    Ok((rect_geodesic(r, um.at(f), up.at(g))?, rect_geodesic(r, um.at(f2), up.at(g2))?))
}

fn scale(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(-4.0 * rng.gen_range(0.0..1.0))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

fn collect<T: Send, F>(cfg: &VerifierConfig, lemma: Lemma, n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(|k| f(&mut rng_for(cfg.seed, lemma.tag(), k), k)).collect()
}

fn fmax(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |m, x| if x > m || x.is_nan() { x } else { m })
}

/// Runs one lemma check. Checks that use L̂ estimate it first.
pub fn verify(lemma: Lemma, cfg: &VerifierConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    match lemma {
        Lemma::Separation | Lemma::ReturnLipschitz => {
            let l = gx_bound(cfg)?.constants[0].1;
            run(lemma, cfg, l)
        }
        _ => run(lemma, cfg, f64::NAN),
    }
}

/// All lemma checks in order, sharing one estimate of L̂.
pub fn verify_all(cfg: &VerifierConfig) -> Result<Vec<LemmaReport>> {
    cfg.validate()?;
    let first = gx_bound(cfg)?;
    let l = first.constants[0].1;
    let mut out = vec![first];
    for lemma in &Lemma::ALL[1..] {
        out.push(run(*lemma, cfg, l)?);
    }
    Ok(out)
}

fn run(lemma: Lemma, cfg: &VerifierConfig, l_hat: f64) -> Result<LemmaReport> {
    match lemma {
        Lemma::GxBound => gx_bound(cfg),
        Lemma::DistanceBounds => distance_bounds(cfg),
        Lemma::BusemannWedge => busemann_wedge(cfg),
        Lemma::Separation => separation(cfg, l_hat),
        Lemma::ReturnLipschitz => return_lipschitz(cfg, l_hat),
        Lemma::ProjHolder => proj_holder(cfg),
        Lemma::Contraction => contraction(cfg),
        Lemma::FlowLipschitz => flow_lipschitz(cfg),
        Lemma::ShadowClose => shadow_close(cfg),
        Lemma::Bracket => bracket_identities(cfg),
    }
}

/// d(c(0), c'(0)) ≤ L·d_GX(c, c') on flow-box pairs at scales down to 1e−4.
fn gx_bound(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let a = cfg.alpha;
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::GxBound, cfg.samples, |rng, _| {
        let r = random_rect(rng, cfg)?;
        let h = scale(rng);
        let (v, w) = pair_in(rng, &r, r.minus_arc(), r.plus_arc(), h)?;
        let s = rng.gen_range(-a..a);
        // Half of the pairs differ only in their endpoints.
        let s2 = if rng.gen_bool(0.5) { s } else { (s + h * a * rng.gen_range(-1.0..1.0)).clamp(-a, a) };
        let (x, y) = (v.flowed(s), w.flowed(s2));
        let dg = gx_distance_rel(&x, &y, cfg.gx_rel);
        Ok((h, if dg > 0.0 { dist_pair(&x, &y, 0.0) / dg } else { 0.0 }))
    })?;
    let l = fmax(obs.iter().map(|o| o.1));
    let fine = fmax(obs.iter().filter(|o| o.0 < 1e-2).map(|o| o.1));
    let coarse = fmax(obs.iter().filter(|o| o.0 >= 1e-2).map(|o| o.1));
    let pass = l.is_finite() && fine <= 2.0 * coarse;
    Ok(LemmaReport {
        lemma: Lemma::GxBound,
        samples: obs.len(),
        worst_ratio: l,
        bound: f64::INFINITY,
        constants: vec![("L", l), ("L_fine", fine), ("L_coarse", coarse)],
        pass,
        witness: (!pass).then(|| format!("ratio grows at fine scales: {fine} vs {coarse}")),
    })
}

/// d(c(0), η(0)) ≤ 2 and d(c(±τ), η(±τ)) < 4.
fn distance_bounds(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let tau = cfg.tau;
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::DistanceBounds, cfg.samples, |rng, _| {
        let r = random_rect(rng, cfg)?;
        let eta = random_in(rng, &r)?;
        let c = r.center();
        Ok((dist_pair(c, &eta, 0.0), dist_pair(c, &eta, tau).max(dist_pair(c, &eta, -tau))))
    })?;
    let d0 = fmax(obs.iter().map(|o| o.0));
    let dt = fmax(obs.iter().map(|o| o.1));
    let pass = d0 <= 2.0 && dt < 4.0;
    Ok(LemmaReport {
        lemma: Lemma::DistanceBounds,
        samples: obs.len(),
        worst_ratio: (d0 / 2.0).max(dt / 4.0),
        bound: 1.0,
        constants: vec![("max_d0", d0), ("max_dtau", dt)],
        pass,
        witness: (!pass).then(|| format!("d0 = {d0}, d_tau = {dt}")),
    })
}

/// −t ≤ B_c(η(t)) ≤ −t/2 on (0, τ), and the mirror inequality on (−τ, 0).
fn busemann_wedge(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let tau = cfg.tau;
    let tol = cfg.tol;
    let obs: Vec<(f64, Option<String>)> = collect(cfg, Lemma::BusemannWedge, cfg.samples, |rng, k| {
        let r = random_rect(rng, cfg)?;
        let eta = random_in(rng, &r)?;
        let c = r.center();
        let mut worst: f64 = 0.0;
        let mut bad = None;
        for i in 1..20 {
            for t in [tau * i as f64 / 20.0, -tau * i as f64 / 20.0] {
                let b = c.busemann_along(&eta, t);
                let (lo, hi) = if t > 0.0 { (-t, -0.5 * t) } else { (-0.5 * t, -t) };
                let ratio = b / -t;
                worst = worst.max(ratio).max(0.5 / ratio);
                if b < lo - tol || b > hi + tol {
                    bad = Some(format!("sample {k}: B_c(eta({t})) = {b}"));
                }
            }
        }
        Ok((worst, bad))
    })?;
    let witness = obs.iter().find_map(|o| o.1.clone());
    Ok(LemmaReport {
        lemma: Lemma::BusemannWedge,
        samples: obs.len(),
        worst_ratio: fmax(obs.iter().map(|o| o.0)),
        bound: 1.0,
        constants: vec![],
        pass: witness.is_none(),
        witness,
    })
}

/// g_t R₁ ∩ R₂ = ∅ for |t| > 2L̂ε: every x ∈ R₁ meets R₂ at a time |t_x| ≤ 2L̂ε.
fn separation(cfg: &VerifierConfig, l_hat: f64) -> Result<LemmaReport> {
    let n = cfg.samples.div_ceil(8).max(1);
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::Separation, n, |rng, _| {
        let r2 = random_rect(rng, cfg)?;
        let c1 = rect_geodesic(
            &r2,
            r2.minus_arc().at(rng.gen_range(0.25..0.75)),
            r2.plus_arc().at(rng.gen_range(0.25..0.75)),
        )?;
        let mut half = 0.125 * r2.plus_arc().len;
        let r1 = loop {
            match make_rectangle(
                &c1,
                cfg.tau,
                Arc::centered(c1.minus(), half),
                Arc::centered(c1.plus(), half),
                cfg.grid,
            ) {
                Ok(r) => break r,
                Err(Error::NotInPartial(_)) if half > 1e-12 => half *= 0.5,
                Err(e) => return Err(e),
            }
        };
        let mut members = Vec::new();
        for (f, g) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (0.5, 0.5)] {
            members.push(rect_geodesic(&r1, r1.minus_arc().at(f), r1.plus_arc().at(g))?);
        }
        for _ in 0..3 {
            members.push(random_in(rng, &r1)?);
        }
        let mut eps: f64 = 0.0;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                eps = eps.max(gx_distance_rel(&members[i], &members[j], cfg.gx_rel));
            }
        }
        let t = fmax(members.iter().map(|x| flow_box_time(&r2, x, 1.0).map(f64::abs).unwrap_or(f64::INFINITY)));
        Ok((t, eps))
    })?;
    let worst = fmax(obs.iter().map(|(t, eps)| t / (2.0 * l_hat * eps)));
    Ok(LemmaReport {
        lemma: Lemma::Separation,
        samples: obs.len() * 8,
        worst_ratio: worst,
        bound: 1.0,
        constants: vec![("L", l_hat), ("max_eps", fmax(obs.iter().map(|o| o.1)))],
        pass: worst <= 1.0,
        witness: (worst > 1.0).then(|| format!("|t_x|/(2 L eps) = {worst}")),
    })
}

/// |r(v) − r(w)| ≤ 2L̂Ĉ·d_GX(v, w) with Ĉ = e^α, for returns from R to R'.
fn return_lipschitz(cfg: &VerifierConfig, l_hat: f64) -> Result<LemmaReport> {
    let a = cfg.alpha;
    let c_hat = a.exp();
    let obs: Vec<f64> = collect(cfg, Lemma::ReturnLipschitz, cfg.samples, |rng, _| {
        let r = random_rect(rng, cfg)?;
        let hat =
            rect_geodesic(&r, r.minus_arc().at(rng.gen_range(0.3..0.7)), r.plus_arc().at(rng.gen_range(0.3..0.7)))?;
        let r2 = maximal_rectangle(&hat.flowed(0.5 * a), cfg.tau, cfg.grid)?;
        let um = r.minus_arc().intersect(&r2.minus_arc()).ok_or_else(|| Error::NoReturn("disjoint arcs".into()))?;
        let up = r.plus_arc().intersect(&r2.plus_arc()).ok_or_else(|| Error::NoReturn("disjoint arcs".into()))?;
        let h = scale(rng);
        let (v, w) = pair_in(rng, &r, um, up, h)?;
        let dr = (return_time(&r2, &v, a)? - return_time(&r2, &w, a)?).abs();
        let d = gx_distance_rel(&v, &w, cfg.gx_rel);
        Ok(if d > 0.0 { dr / d } else { 0.0 })
    })?;
    let worst = fmax(obs.iter().copied());
    let bound = 2.0 * l_hat * c_hat;
    Ok(LemmaReport {
        lemma: Lemma::ReturnLipschitz,
        samples: obs.len(),
        worst_ratio: worst,
        bound,
        constants: vec![("L", l_hat), ("C", c_hat)],
        pass: worst <= bound,
        witness: (worst > bound).then(|| format!("ratio {worst} exceeds {bound}")),
    })
}

/// d_GX(Proj x, Proj y) ≤ K d_GX(x, y)^{1/2}; exponent fitted by log–log regression.
fn proj_holder(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let a = cfg.alpha;
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::ProjHolder, cfg.samples, |rng, _| {
        let r = random_rect(rng, cfg)?;
        let h = scale(rng);
        let (v, w) = pair_in(rng, &r, r.minus_arc(), r.plus_arc(), h)?;
        let s = rng.gen_range(-0.5 * a..0.5 * a);
        let s2 = s + 0.5 * a * h * rng.gen_range(-1.0..1.0);
        let (x, y) = (v.flowed(s), w.flowed(s2));
        let (px, py) = (proj_rect(&r, &x, a)?, proj_rect(&r, &y, a)?);
        Ok((gx_distance_rel(&x, &y, cfg.gx_rel), gx_distance_rel(&px, &py, cfg.gx_rel)))
    })?;
    let pts: Vec<(f64, f64)> = obs.iter().filter(|o| o.0 > 0.0 && o.1 > 0.0).map(|o| (o.0.ln(), o.1.ln())).collect();
    let beta = slope(&pts);
    let k = fmax(obs.iter().filter(|o| o.0 > 0.0).map(|o| o.1 / o.0.sqrt()));
    let pass = beta >= 0.45 && k.is_finite();
    Ok(LemmaReport {
        lemma: Lemma::ProjHolder,
        samples: obs.len(),
        worst_ratio: k,
        bound: f64::INFINITY,
        constants: vec![("K", k), ("exponent", beta)],
        pass,
        witness: (!pass).then(|| format!("exponent {beta}, K {k}")),
    })
}

/// Strong stable (unstable) pairs contract at rate e^{−|t|} in d_GX, with
/// constant 1 + K̂ where K̂ is the pointwise comparison constant.
fn contraction(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::Contraction, cfg.samples, |rng, _| {
        let c = random_center(rng)?;
        let mut sign = || if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (e1, e2) = (0.05 * sign(), 0.05 * sign());
        let s = stable_partner(&c, BoundaryPoint::new(c.minus().angle() + e1 * rng.gen_range(0.2..1.0)))?;
        let u = unstable_partner(&c, BoundaryPoint::new(c.plus().angle() + e2 * rng.gen_range(0.2..1.0)))?;
        let (ds, du) = (dist_pair(&c, &s, 0.0), dist_pair(&c, &u, 0.0));
        let (gs, gu) = (gx_distance_rel(&c, &s, cfg.gx_rel), gx_distance_rel(&c, &u, cfg.gx_rel));
        let mut k_hat: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        for i in 1..=10 {
            let t = i as f64;
            let e = t.exp();
            k_hat = k_hat.max(dist_pair(&c, &s, t) * e / ds).max(dist_pair(&c, &u, -t) * e / du);
            let fs = gx_distance_rel(&c.flowed(t), &s.flowed(t), cfg.gx_rel) * e / gs;
            let fu = gx_distance_rel(&c.flowed(-t), &u.flowed(-t), cfg.gx_rel) * e / gu;
            ratio = ratio.max(fs).max(fu);
        }
        Ok((k_hat, ratio))
    })?;
    let k_hat = fmax(obs.iter().map(|o| o.0));
    let worst = fmax(obs.iter().map(|o| o.1));
    let bound = 1.0 + k_hat;
    Ok(LemmaReport {
        lemma: Lemma::Contraction,
        samples: obs.len(),
        worst_ratio: worst,
        bound,
        constants: vec![("K", k_hat), ("lambda", 1.0)],
        pass: worst <= bound,
        witness: (worst > bound).then(|| format!("e^t d_t / d_0 = {worst}")),
    })
}

/// d_GX(g_t x, g_t y) < e^{2T} d_GX(x, y) for t ∈ [0, T].
fn flow_lipschitz(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let a = cfg.alpha;
    let big_t = cfg.horizon;
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::FlowLipschitz, cfg.samples, |rng, _| {
        let r = random_rect(rng, cfg)?;
        let h = scale(rng);
        let (v, w) = pair_in(rng, &r, r.minus_arc(), r.plus_arc(), h)?;
        let s = rng.gen_range(-a..a);
        let (x, y) = (v.flowed(s), w.flowed(s + a * h * rng.gen_range(-1.0..1.0)));
        let d0 = gx_distance_rel(&x, &y, cfg.gx_rel);
        let (mut worst, mut local): (f64, f64) = (0.0, 0.0);
        for i in 0..=12 {
            let t = big_t * i as f64 / 12.0;
            let q = gx_distance_rel(&x.flowed(t), &y.flowed(t), cfg.gx_rel) / d0;
            worst = worst.max(q);
            local = local.max(q / (2.0 * t).exp());
        }
        Ok((worst, local))
    })?;
    let worst = fmax(obs.iter().map(|o| o.0));
    let bound = (2.0 * big_t).exp();
    Ok(LemmaReport {
        lemma: Lemma::FlowLipschitz,
        samples: obs.len(),
        worst_ratio: worst,
        bound,
        constants: vec![("max_ratio_over_e2t", fmax(obs.iter().map(|o| o.1)))],
        pass: worst < bound,
        witness: (worst >= bound).then(|| format!("stretch {worst}")),
    })
}

/// Orbits that stay δ-close on [−T, T] are Ce^{−λT}δ-close at time 0 after a
/// small time shift; λ is fitted across T ∈ {2, 4, 6, 8}.
fn shadow_close(cfg: &VerifierConfig) -> Result<LemmaReport> {
    const HORIZONS: [f64; 4] = [2.0, 4.0, 6.0, 8.0];
    let obs: Vec<(f64, f64)> = collect(cfg, Lemma::ShadowClose, cfg.samples, |rng, k| {
        let big_t = HORIZONS[k % HORIZONS.len()];
        let x = random_center(rng)?;
        let eps = 0.05 * (-big_t).exp();
        let mut pert = || eps * rng.gen_range(0.2..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (e1, e2) = (pert(), pert());
        let y0 = Geodesic::from_angles(x.minus().angle() + e1, x.plus().angle() + e2, 0.0)?;
        let y = y0.flowed(dist_to_geodesic(&y0, x.point(0.0))?.1);
        let steps = (4.0 * big_t) as usize;
        let mut delta: f64 = 0.0;
        for i in 0..=steps {
            let t = -big_t + 2.0 * big_t * i as f64 / steps as f64;
            delta = delta.max(gx_distance_rel(&x.flowed(t), &y.flowed(t), cfg.gx_rel));
        }
        let best = golden_min(|v| gx_distance_rel(&x, &y.flowed(v), cfg.gx_rel), -0.5, 0.5);
        Ok((big_t, best / delta))
    })?;
    let pts: Vec<(f64, f64)> = obs.iter().map(|o| (o.0, o.1.ln())).collect();
    let lambda = -slope(&pts);
    let c = fmax(obs.iter().map(|o| o.1 * o.0.exp()));
    let pass = lambda >= 0.9 && c.is_finite();
    Ok(LemmaReport {
        lemma: Lemma::ShadowClose,
        samples: obs.len(),
        worst_ratio: c,
        bound: f64::INFINITY,
        constants: vec![("C", c), ("lambda", lambda)],
        pass,
        witness: (!pass).then(|| format!("fitted lambda {lambda}")),
    })
}

/// ⟨x,x⟩ = x, ⟨⟨x,y⟩,z⟩ = ⟨x,z⟩, ⟨x,⟨y,z⟩⟩ = ⟨x,z⟩, flow equivariance and the
/// horocycle levels defining ⟨x,y⟩ and v(x,y).
fn bracket_identities(cfg: &VerifierConfig) -> Result<LemmaReport> {
    let obs: Vec<(f64, Option<String>)> = collect(cfg, Lemma::Bracket, cfg.samples, |rng, k| {
        let x = random_center(rng)?;
        let mut near = |g: &Geodesic| {
            let mut e = || 0.05 * rng.gen_range(-1.0..1.0);
            Geodesic::from_angles(g.minus().angle() + e(), g.plus().angle() + e(), g.shift() + e())
        };
        let (y, z) = (near(&x)?, near(&x)?);
        let t = rng.gen_range(-1.0..1.0);
        let mut res: f64 = 0.0;
        let mut bad = None;
        let mut same = |name: &str, a: &Geodesic, b: &Geodesic, res: &mut f64| {
            if !a.same_endpoints(b) {
                bad = Some(format!("sample {k}: {name} endpoints differ"));
            }
            *res = res.max((a.shift() - b.shift()).abs());
        };
        let xz = bracket(&x, &z)?;
        let xy = bracket(&x, &y)?;
        same("(a)", &bracket(&x, &x)?, &x, &mut res);
        same("(b)", &bracket(&xy, &z)?, &xz, &mut res);
        same("(c)", &bracket(&x, &bracket(&y, &z)?)?, &xz, &mut res);
        same("(d)", &bracket(&x.flowed(t), &y.flowed(t))?, &xy.flowed(t), &mut res);
        let v = v_time(&x, &y)?;
        let q = xy.point(0.0);
        res = res.max(x.flowed(v).busemann_back(q)?.abs()).max(y.busemann(q)?.abs());
        if xy.minus() != x.minus() || xy.plus() != y.plus() {
            bad = Some(format!("sample {k}: bracket endpoints"));
        }
        Ok((res, bad))
    })?;
    let worst = fmax(obs.iter().map(|o| o.0));
    let witness = obs.iter().find_map(|o| o.1.clone());
    let pass = witness.is_none() && worst <= cfg.tol;
    Ok(LemmaReport {
        lemma: Lemma::Bracket,
        samples: obs.len(),
        worst_ratio: worst,
        bound: cfg.tol,
        constants: vec![],
        pass,
        witness: witness.or_else(|| (!pass).then(|| format!("residual {worst}"))),
    })
}
