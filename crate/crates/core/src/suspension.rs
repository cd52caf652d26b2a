//! Suspension flows over shifts of finite type.
//!
//! A point of Y^ρ is a base sequence with a height in [0, ρ(x)); flowing past
//! the roof moves to (σx, 0).

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sft::{PeriodicOrbit, TransitionMatrix, Word};
use crate::thermo::{cyclic_birkhoff_sum, equilibrium, pressure, recode, LocallyConstantPotential, MarkovMeasure};

/// Default tolerance on the log-tail for the zeta convergence flag.
pub const ZETA_TAIL_TOL: f64 = 1e-2;
/// Default resolution of the weak-mixing scan.
pub const WEAK_MIXING_TOL: f64 = 1e-9;
const ENTROPY_TOL: f64 = 1e-13;

/// Strictly positive locally constant roof.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofFunction(LocallyConstantPotential);

impl RoofFunction {
    pub fn new(rho: LocallyConstantPotential) -> Result<Self> {
        if rho.min_value() <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "roof must be strictly positive, minimum is {}",
                rho.min_value()
            )));
        }
        Ok(Self(rho))
    }

    pub fn constant(a: &TransitionMatrix, c: f64) -> Result<Self> {
        Self::new(LocallyConstantPotential::constant(a, c)?)
    }

    pub fn potential(&self) -> &LocallyConstantPotential {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    pub fn min(&self) -> f64 {
        self.0.min_value()
    }

    pub fn max(&self) -> f64 {
        self.0.max_value()
    }
}

/// Base SFT with a roof function.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionFlow {
    base: TransitionMatrix,
    roof: RoofFunction,
}

/// Base sequence of a flow point; coordinate 0 sits at `index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasePoint {
    /// The bi-infinite repetition of `word`.
    Periodic { word: Word, index: usize },
    /// A finite window; symbols outside it are unknown.
    Window { word: Word, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub base: BasePoint,
    pub height: f64,
}

impl FlowPoint {
    pub fn periodic(word: Word, index: usize, height: f64) -> Self {
        Self { base: BasePoint::Periodic { word, index }, height }
    }

    pub fn window(word: Word, index: usize, height: f64) -> Self {
        Self { base: BasePoint::Window { word, index }, height }
    }

    /// Symbol at coordinate 0.
    pub fn symbol(&self) -> usize {
        match &self.base {
            BasePoint::Periodic { word, index } | BasePoint::Window { word, index } => word[*index],
        }
    }
}

impl SuspensionFlow {
    pub fn new(base: TransitionMatrix, roof: RoofFunction) -> Result<Self> {
        if roof.potential().words().iter().any(|w| !base.is_admissible(w)) {
            return Err(Error::InvalidArgument("roof is not defined over this base".into()));
        }
        Ok(Self { base, roof })
    }

    pub fn base(&self) -> &TransitionMatrix {
        &self.base
    }

    pub fn roof(&self) -> &RoofFunction {
        &self.roof
    }

    /// Roof at the base point shifted by `offset` coordinates.
    fn roof_at(&self, base: &BasePoint, offset: isize, shift: f64) -> Result<f64> {
        let k = self.roof.depth();
        let mut buf = Vec::with_capacity(k);
        match base {
            BasePoint::Periodic { word, index } => {
                let n = word.len() as isize;
                for j in 0..k as isize {
                    buf.push(word[(*index as isize + offset + j).rem_euclid(n) as usize]);
                }
            }
            BasePoint::Window { word, index } => {
                let start = *index as isize + offset;
                if start < 0 || start + k as isize > word.len() as isize {
                    return Err(Error::WindowExhausted(shift));
                }
                buf.extend_from_slice(&word[start as usize..start as usize + k]);
            }
        }
        self.roof.potential().value(&buf).ok_or_else(|| Error::InadmissibleWord(buf.clone()))
    }

    /// Flows the point for time s.
    pub fn evolve(&self, point: &FlowPoint, s: f64) -> Result<FlowPoint> {
        let mut height = point.height + s;
        let mut offset: isize = 0;
        let mut roof = self.roof_at(&point.base, 0, s)?;
        if let BasePoint::Periodic { word, .. } = &point.base {
            let period = self.word_period(word)?;
            let laps = (height / period).floor();
            if laps.abs() >= 1.0 {
                height -= laps * period;
            }
        }
        while height >= roof {
            height -= roof;
            offset += 1;
            roof = self.roof_at(&point.base, offset, s)?;
        }
        while height < 0.0 {
            offset -= 1;
            roof = self.roof_at(&point.base, offset, s)?;
            height += roof;
        }
        let base = match &point.base {
            BasePoint::Periodic { word, index } => BasePoint::Periodic {
                word: word.clone(),
                index: (*index as isize + offset).rem_euclid(word.len() as isize) as usize,
            },
            BasePoint::Window { word, index } => {
                BasePoint::Window { word: word.clone(), index: (*index as isize + offset) as usize }
            }
        };
        Ok(FlowPoint { base, height })
    }

    fn word_period(&self, word: &[usize]) -> Result<f64> {
        cyclic_birkhoff_sum(self.roof.potential(), word)
    }

    /// Period of a closed orbit: the cyclic Birkhoff sum of the roof.
    pub fn orbit_period(&self, orbit: &PeriodicOrbit) -> Result<f64> {
        self.word_period(orbit.word())
    }

    /// P(−sρ).
    pub fn roof_pressure(&self, s: f64) -> Result<f64> {
        pressure(&self.base, &self.roof.potential().affine(-s, 0.0))
    }

    fn entropy_bracket(&self) -> Result<(f64, f64)> {
        let top = self.roof_pressure(0.0)?;
        Ok((0.0, top.max(0.0) / self.roof.min() + 1.0))
    }

    /// Topological entropy h: the root of s ↦ P(−sρ).
    pub fn flow_entropy(&self) -> Result<f64> {
        let (lo, hi) = self.pressure_root(ENTROPY_TOL)?;
        Ok(0.5 * (lo + hi))
    }

    /// Bisection bracket [lo, hi] of width ≤ tol around the root of P(−sρ).
    pub fn pressure_root(&self, tol: f64) -> Result<(f64, f64)> {
        let (mut lo, mut hi) = self.entropy_bracket()?;
        let mut prev = f64::INFINITY;
        for i in 0..=8 {
            let s = lo + (hi - lo) * i as f64 / 8.0;
            let p = self.roof_pressure(s)?;
            if p > prev {
                return Err(Error::BracketFailure(format!("P(-s rho) increases near s = {s}")));
            }
            prev = p;
        }
        let p_lo = self.roof_pressure(lo)?;
        if p_lo < 0.0 || self.roof_pressure(hi)? > 0.0 {
            return Err(Error::BracketFailure("no sign change of P(-s rho)".into()));
        }
        if p_lo == 0.0 {
            return Ok((lo, lo));
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.roof_pressure(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    }

    /// Stationary product measure (μ_φ × Leb)/∫ρ dμ_φ.
    pub fn flow_measure(&self, phi: &LocallyConstantPotential) -> Result<FlowMeasure> {
        let base = equilibrium(&self.base, phi)?;
        let normalizer = base.integrate(self.roof.potential())?;
        Ok(FlowMeasure { base, roof: self.roof.clone(), normalizer })
    }
}

/// Normalized product measure on the suspension.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMeasure {
    pub base: MarkovMeasure,
    roof: RoofFunction,
    /// ∫ρ dμ.
    pub normalizer: f64,
}

impl FlowMeasure {
    /// μ^ρ([word] × [a, b]).
    pub fn mass(&self, word: &[usize], a: f64, b: f64) -> Result<f64> {
        let k = self.roof.depth();
        let pot = self.roof.potential();
        let overlap = |r: f64| (b.min(r) - a.max(0.0)).max(0.0);
        if word.len() >= k {
            let r = pot.value(&word[..k]).ok_or_else(|| Error::InadmissibleWord(word.to_vec()))?;
            return Ok(self.base.cylinder(word)? * overlap(r) / self.normalizer);
        }
        let mut total = 0.0;
        for (w, &r) in pot.words().iter().zip(pot.values()) {
            if w.starts_with(word) {
                total += self.base.cylinder(w)? * overlap(r);
            }
        }
        Ok(total / self.normalizer)
    }

    /// Mass of the whole phase space.
    pub fn total(&self) -> Result<f64> {
        self.mass(&[], 0.0, f64::INFINITY)
    }
}

/// Counts of periodic points grouped by how often each roof value occurs.
#[derive(Debug, Clone)]
pub struct OrbitSpectrum {
    flow: SuspensionFlow,
    l_max: f64,
    states: usize,
    /// (n, period, number of points with σⁿx = x and this roof pattern).
    points: Vec<(usize, f64, u128)>,
    /// (least period n, period, number of primitive orbits).
    primitive: Vec<(usize, f64, u128)>,
}

/// One evaluation of the truncated zeta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub s: Complex64,
    /// exp of the truncated orbit sum.
    pub value: Complex64,
    /// Product over primitive orbits of their truncated Euler factors.
    pub euler: Complex64,
    /// Π (1 − e^{−sℓ})^{−1} over primitive orbits with ℓ ≤ L_max.
    pub euler_untruncated: Complex64,
    /// Bound on |ζ(s) − value|; infinite when Re(s) ≤ h.
    pub tail_bound: f64,
    /// Bound on the neglected part of log ζ.
    pub log_tail_bound: f64,
    pub converged: bool,
}

impl OrbitSpectrum {
    pub fn new(flow: &SuspensionFlow, l_max: f64) -> Result<Self> {
        if !(l_max > 0.0) {
            return Err(Error::InvalidArgument("L_max must be positive".into()));
        }
        let (a, rho) = recode(flow.base(), flow.roof().potential())?;
        let mut distinct: Vec<f64> = rho.values().to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let class: Vec<usize> = (0..a.size())
            .map(|i| {
                let v = rho.value(&[i]).expect("state");
                distinct.iter().position(|&d| d == v).expect("present")
            })
            .collect();
        let limit = l_max * (1.0 + 1e-12);
        let period_of = |key: &[u16]| -> f64 { key.iter().zip(&distinct).map(|(&c, &v)| c as f64 * v).sum() };
        let mut census: BTreeMap<(usize, Vec<u16>), u128> = BTreeMap::new();
        for start in 0..a.size() {
            let mut layer: BTreeMap<(usize, Vec<u16>), u128> = BTreeMap::new();
            layer.insert((start, vec![0; distinct.len()]), 1);
            let mut n = 0;
            while !layer.is_empty() {
                n += 1;
                let mut next: BTreeMap<(usize, Vec<u16>), u128> = BTreeMap::new();
                for ((u, key), c) in layer {
                    let mut key = key;
                    key[class[u]] += 1;
                    if period_of(&key) > limit {
                        continue;
                    }
                    for &v in a.successors(u) {
                        let slot = next.entry((v, key.clone())).or_insert(0);
                        *slot = slot.checked_add(c).ok_or(Error::Overflow("counting orbits"))?;
                    }
                }
                for ((v, key), c) in next.iter() {
                    if *v == start {
                        *census.entry((n, key.clone())).or_insert(0) += c;
                    }
                }
                layer = next;
            }
        }
        let mut points = Vec::new();
        let mut primitive = Vec::new();
        for ((n, key), &count) in &census {
            points.push((*n, period_of(key), count));
            let mut prim: i128 = 0;
            for d in (1..=*n).filter(|d| n % d == 0) {
                let mu = mobius(n / d);
                if mu == 0 || key.iter().any(|&c| !(c as usize * d).is_multiple_of(*n)) {
                    continue;
                }
                let sub: Vec<u16> = key.iter().map(|&c| (c as usize * d / n) as u16).collect();
                let cd = census.get(&(d, sub)).copied().unwrap_or(0) as i128;
                prim += mu as i128 * cd;
            }
            if prim > 0 {
                debug_assert_eq!(prim % *n as i128, 0);
                primitive.push((*n, period_of(key), (prim / *n as i128) as u128));
            }
        }
        Ok(Self { flow: flow.clone(), l_max, states: a.size(), points, primitive })
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// (least period, orbit period, count) for every class of primitive orbits.
    pub fn primitive_classes(&self) -> &[(usize, f64, u128)] {
        &self.primitive
    }

    /// Sorted periods of all primitive orbits, with multiplicity.
    pub fn primitive_periods(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &(_, ell, count) in &self.primitive {
            out.extend(std::iter::repeat_n(ell, count as usize));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Truncated zeta at s with the default tail tolerance.
    pub fn zeta(&self, s: Complex64) -> Result<ZetaValue> {
        self.zeta_with_tol(s, ZETA_TAIL_TOL)
    }

    pub fn zeta_with_tol(&self, s: Complex64, tail_tol: f64) -> Result<ZetaValue> {
        let mut log_sum = Complex64::new(0.0, 0.0);
        for &(n, ell, count) in &self.points {
            log_sum += (-s * ell).exp() * (count as f64 / n as f64);
        }
        let mut euler = Complex64::new(1.0, 0.0);
        let mut untruncated = Complex64::new(1.0, 0.0);
        for &(_, ell, count) in &self.primitive {
            let x = (-s * ell).exp();
            let mut factor_log = Complex64::new(0.0, 0.0);
            let mut m = 1usize;
            while m as f64 * ell <= self.l_max * (1.0 + 1e-12) {
                factor_log += x.powu(m as u32) / m as f64;
                m += 1;
            }
            euler *= (factor_log * count as f64).exp();
            untruncated *= (Complex64::new(1.0, 0.0) - x).powf(-(count as f64));
        }
        let value = log_sum.exp();
        let q = self.flow.roof_pressure(s.re)?.exp();
        let n0 = (self.l_max / self.flow.roof().max()).floor() + 1.0;
        let log_tail_bound = if q < 1.0 { self.states as f64 * q.powf(n0) / (n0 * (1.0 - q)) } else { f64::INFINITY };
        let tail_bound = value.norm() * log_tail_bound.exp_m1();
        Ok(ZetaValue {
            s,
            value,
            euler,
            euler_untruncated: untruncated,
            tail_bound,
            log_tail_bound,
            converged: q < 1.0 && log_tail_bound <= tail_tol,
        })
    }
}

fn mobius(mut n: usize) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Truncated zeta function of the flow at s.
pub fn zeta(flow: &SuspensionFlow, s: Complex64, l_max: f64) -> Result<ZetaValue> {
    OrbitSpectrum::new(flow, l_max)?.zeta(s)
}

/// Largest c > tol with every period within tol of a multiple of c.
///
/// Candidates are p_min/q for q up to (p_min/tol)^{1/3}, capped at 10⁶; larger
/// denominators would accept almost any data at this resolution.
pub fn weak_mixing_test(periods: &[f64], tol: f64) -> Result<Option<f64>> {
    if periods.len() < 2 {
        return Err(Error::InvalidArgument("need at least two periods".into()));
    }
    if periods.iter().any(|&p| !(p > 0.0) || !p.is_finite()) || tol < 0.0 {
        return Err(Error::InvalidArgument("periods must be positive and tol nonnegative".into()));
    }
    let p_min = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = if tol > 0.0 { (p_min / tol).cbrt().floor().min(1e6) as u64 } else { 1_000_000 };
    for q in 1..=q_max.max(1) {
        let c = p_min / q as f64;
        if c <= tol {
            break;
        }
        if periods.iter().all(|&p| (p - (p / c).round() * c).abs() <= tol) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Normalized time integrals (∫₀ᵀ ψ(f_t x)dt − T∫ψ dμ^ρ)/√T for points drawn from μ^ρ.
///
/// ψ is a function of the base constant along fibres. Sample i uses ChaCha8
/// stream i of the seed.
pub fn clt_samples(
    flow: &SuspensionFlow,
    phi: &LocallyConstantPotential,
    psi: &LocallyConstantPotential,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let measure = flow.flow_measure(phi)?;
    let a = flow.base();
    let rho = flow.roof().potential();
    let depth = rho.depth().max(psi.depth());
    let psi_rho = LocallyConstantPotential::new(a, depth, |w| {
        psi.value(&w[..psi.depth()]).expect("admissible") * rho.value(&w[..rho.depth()]).expect("admissible")
    })?;
    let mean = measure.base.integrate(&psi_rho)? / measure.normalizer;
    let steps = ((horizon + flow.roof().max()) / flow.roof().min()).ceil() as usize + depth + 2;
    let rho_max = flow.roof().max();
    let out = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let path = loop {
                let path = measure.base.sample_symbols(steps, &mut rng);
                let r0 = rho.value(&path[..rho.depth()]).expect("admissible");
                if rng.gen::<f64>() * rho_max < r0 {
                    break path;
                }
            };
            let at =
                |pot: &LocallyConstantPotential, j: usize| pot.value(&path[j..j + pot.depth()]).expect("admissible");
            let mut h = rng.gen::<f64>() * at(rho, 0);
            let mut left = horizon;
            let mut acc = 0.0;
            let mut j = 0;
            while left > 0.0 {
                let piece = (at(rho, j) - h).min(left);
                acc += at(psi, j) * piece;
                left -= piece;
                h = 0.0;
                j += 1;
            }
            (acc - horizon * mean) / horizon.sqrt()
        })
        .collect();
    Ok(out)
}

/// Kolmogorov–Smirnov distance between a sample and Normal(mean, sd²).
pub fn ks_distance_normal(samples: &[f64], mean: f64, sd: f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let cdf = |x: f64| 0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2));
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Empirical autocorrelation of a series at the given lag.
pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag >= n {
        return f64::NAN;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let cov = (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum::<f64>() / (n - lag) as f64;
    cov / var
}

/// Number of periodic points of each base period found within L_max.
pub fn period_counts(spectrum: &OrbitSpectrum) -> HashMap<usize, u128> {
    let mut out = HashMap::new();
    for &(n, _, c) in &spectrum.points {
        *out.entry(n).or_insert(0) += c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![1, 1], vec![1, 1]]).unwrap()
    }

    fn unit_full() -> SuspensionFlow {
        let a = full();
        SuspensionFlow::new(a.clone(), RoofFunction::constant(&a, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn evolve_examples() {
        let f = unit_full();
        let p = FlowPoint::periodic(vec![0, 1], 0, 0.4);
        let q = f.evolve(&p, 0.3).unwrap();
        assert!((q.height - 0.7).abs() < 1e-15);
        assert_eq!(q.base, p.base);
        let q = f.evolve(&p, 0.6).unwrap();
        assert_eq!(q.height, 0.0);
        assert_eq!(q.base, BasePoint::Periodic { word: vec![0, 1], index: 1 });
    }

    #[test]
    fn evolve_full_period_returns() {
        let a = full();
        let rho = LocallyConstantPotential::new(&a, 1, |w| if w[0] == 0 { 1.0 } else { 2.0 }).unwrap();
        let f = SuspensionFlow::new(a, RoofFunction::new(rho).unwrap()).unwrap();
        let p = FlowPoint::periodic(vec![0, 1], 0, 0.0);
        assert_eq!(f.evolve(&p, 3.0).unwrap(), p);
        let orbit = PeriodicOrbit::new(f.base(), &[0, 1]).unwrap();
        assert_eq!(f.orbit_period(&orbit).unwrap(), 3.0);
    }

    #[test]
    fn window_exhaustion() {
        let f = unit_full();
        let p = FlowPoint::window(vec![0, 1, 0], 1, 0.5);
        assert!(f.evolve(&p, 1.0).is_ok());
        assert!(matches!(f.evolve(&p, 2.0), Err(Error::WindowExhausted(_))));
        assert!(matches!(f.evolve(&p, -2.0), Err(Error::WindowExhausted(_))));
    }

    #[test]
    fn entropy_of_constant_roofs() {
        let a = full();
        let f2 = SuspensionFlow::new(a.clone(), RoofFunction::constant(&a, 2.0).unwrap()).unwrap();
        assert!((f2.flow_entropy().unwrap() - 2f64.ln() / 2.0).abs() < 1e-10);
        assert!((unit_full().flow_entropy().unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn zeta_limits() {
        let f = unit_full();
        let z = zeta(&f, Complex64::new(2f64.ln(), 0.0), 30.0).unwrap();
        assert!(!z.converged);
        assert!(z.tail_bound.is_infinite());
        let big = zeta(&f, Complex64::new(40.0, 0.0), 30.0).unwrap();
        assert!((big.value - 1.0).norm() < 1e-15);
        let z = zeta(&f, Complex64::new(1.5, 0.0), 30.0).unwrap();
        let exact = 1.0 / (1.0 - 2.0 * (-1.5f64).exp());
        assert!((z.value.re - exact).abs() < 1e-9);
        assert!((z.value.re - exact).abs() <= z.tail_bound);
    }

    #[test]
    fn mobius_values() {
        let v: Vec<i32> = (1..=10).map(mobius).collect();
        assert_eq!(v, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn weak_mixing_examples() {
        assert_eq!(weak_mixing_test(&[2.0, 3.0, 5.0], 1e-9).unwrap(), Some(1.0));
        assert_eq!(weak_mixing_test(&[2.0, 4.0, 6.0], 1e-9).unwrap(), Some(2.0));
        assert_eq!(weak_mixing_test(&[1.0, 2f64.sqrt()], 1e-9).unwrap(), None);
    }

    #[test]
    fn flow_measure_masses() {
        let f = unit_full();
        let m = f.flow_measure(&LocallyConstantPotential::zero(f.base())).unwrap();
        assert!((m.mass(&[0], 0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((m.total().unwrap() - 1.0).abs() < 1e-14);
    }
}
