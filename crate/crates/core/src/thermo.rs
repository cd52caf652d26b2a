//! Thermodynamic formalism for locally constant potentials.
//!
//! A depth-k potential reads the window x₀…x_{k−1}. Its transfer matrix acts
//! on admissible (k−1)-words (symbols when k = 1), so pressure and the
//! equilibrium measure come straight out of Perron eigendata.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sft::{perron, PeriodicOrbit, TransitionMatrix, WeightedMatrix, Word};

/// Step of the centered first difference.
pub const FIRST_DIFF_STEP: f64 = 1e-5;
/// Step of the centered second difference.
pub const SECOND_DIFF_STEP: f64 = 1e-4;

/// Real table on the admissible k-words of a shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantPotential {
    depth: usize,
    words: Vec<Word>,
    values: Vec<f64>,
    index: HashMap<Word, usize>,
}

impl LocallyConstantPotential {
    /// Tabulates `f` on every admissible word of length `depth`.
    pub fn new(a: &TransitionMatrix, depth: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("potential depth must be at least 1".into()));
        }
        let words = a.words(depth);
        let values: Vec<f64> = words.iter().map(|w| f(w)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("potential value on {:?} is not finite", words[i])));
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self { depth, words, values, index })
    }

    pub fn zero(a: &TransitionMatrix) -> Self {
        Self::new(a, 1, |_| 0.0).expect("depth 1 is valid")
    }

    pub fn constant(a: &TransitionMatrix, c: f64) -> Result<Self> {
        Self::new(a, 1, |_| c)
    }

    /// Indicator of the cylinder [symbol] at coordinate 0.
    pub fn indicator(a: &TransitionMatrix, symbol: usize) -> Self {
        Self::new(a, 1, |w| if w[0] == symbol { 1.0 } else { 0.0 }).expect("depth 1 is valid")
    }

    /// Builds from explicit entries; admissible words without an entry get 0 and are returned.
    pub fn from_entries(a: &TransitionMatrix, depth: usize, entries: &[(Word, f64)]) -> Result<(Self, Vec<Word>)> {
        let mut table: HashMap<&[usize], f64> = HashMap::new();
        for (w, v) in entries {
            if w.len() != depth {
                return Err(Error::InvalidArgument(format!("word {w:?} has length {} but depth is {depth}", w.len())));
            }
            if !a.is_admissible(w) {
                return Err(Error::InadmissibleWord(w.clone()));
            }
            table.insert(w.as_slice(), *v);
        }
        let pot = Self::new(a, depth, |w| table.get(w).copied().unwrap_or(0.0))?;
        let missing = pot.words.iter().filter(|w| !table.contains_key(w.as_slice())).cloned().collect();
        Ok((pot, missing))
    }

    /// Parses lines "word value". The word is either whitespace-separated
    /// symbol indices, comma-separated indices, or (for at most 10 symbols) a
    /// digit string such as `01`. All words must share one length, which is
    /// the depth. Admissible words without a line are 0 and are returned.
    pub fn parse(a: &TransitionMatrix, text: &str) -> Result<(Self, Vec<Word>)> {
        let mut entries = Vec::new();
        let mut depth = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let col = |t: &str| line.find(t).unwrap_or(0) + 1;
            let err = |c: usize, msg: String| Error::Parse { line: i + 1, col: c, msg };
            if toks.len() < 2 {
                return Err(err(col(toks[0]), "expected: word value".into()));
            }
            let (word_toks, value) = toks.split_at(toks.len() - 1);
            let value: f64 = value[0].parse().map_err(|_| err(col(value[0]), format!("bad value {:?}", value[0])))?;
            let symbols: Vec<&str> = match word_toks {
                [w] if w.contains(',') => w.split(',').collect(),
                [w] if a.size() <= 10 && w.len() > 1 => (0..w.len()).map(|k| &w[k..k + 1]).collect(),
                ws => ws.to_vec(),
            };
            let word = symbols
                .iter()
                .map(|t| t.parse::<usize>().ok().filter(|&x| x < a.size()))
                .collect::<Option<Word>>()
                .ok_or_else(|| err(col(word_toks[0]), format!("bad word {:?}", word_toks.join(" "))))?;
            match depth {
                None => depth = Some(word.len()),
                Some(d) if d != word.len() => {
                    return Err(err(col(word_toks[0]), format!("word length {} differs from depth {d}", word.len())))
                }
                _ => {}
            }
            if !a.is_admissible(&word) {
                return Err(err(col(word_toks[0]), format!("word {word:?} is not admissible")));
            }
            entries.push((word, value));
        }
        let depth = depth.ok_or(Error::Parse { line: 1, col: 1, msg: "no entries".into() })?;
        Self::from_entries(a, depth, &entries)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, word: &[usize]) -> Option<f64> {
        self.index.get(word).map(|&i| self.values[i])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same function read at a larger depth.
    pub fn lift(&self, a: &TransitionMatrix, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::InvalidArgument("cannot lower potential depth".into()));
        }
        Self::new(a, depth, |w| self.value(&w[..self.depth]).expect("prefix of admissible word"))
    }

    /// Returns self + t·other.
    pub fn add_scaled(&self, a: &TransitionMatrix, other: &Self, t: f64) -> Result<Self> {
        let depth = self.depth.max(other.depth);
        Self::new(a, depth, |w| {
            self.value(&w[..self.depth]).expect("admissible") + t * other.value(&w[..other.depth]).expect("admissible")
        })
    }

    /// Returns c·self + shift.
    pub fn affine(&self, c: f64, shift: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = c * *v + shift);
        out
    }
}

/// Recodes a depth-k potential as a depth-1 potential on the k-block shift.
pub fn recode(
    a: &TransitionMatrix,
    phi: &LocallyConstantPotential,
) -> Result<(TransitionMatrix, LocallyConstantPotential)> {
    let k = phi.depth();
    if k == 1 {
        return Ok((a.clone(), phi.clone()));
    }
    let states = phi.words().to_vec();
    let by_prefix: HashMap<&[usize], Vec<usize>> = states.iter().enumerate().fold(HashMap::new(), |mut m, (i, w)| {
        m.entry(&w[..k - 1]).or_insert_with(Vec::new).push(i);
        m
    });
    let succ = states.iter().map(|w| by_prefix.get(&w[1..]).cloned().unwrap_or_default()).collect();
    let a2 = TransitionMatrix::from_successors(succ)?;
    let values = phi.values().to_vec();
    let phi2 = LocallyConstantPotential::new(&a2, 1, |w| values[w[0]])?;
    Ok((a2, phi2))
}

/// States (k−1)-words, or symbols for k = 1, with their transfer matrix.
struct Transfer {
    states: Vec<Word>,
    matrix: WeightedMatrix,
}

fn transfer(a: &TransitionMatrix, phi: &LocallyConstantPotential) -> Result<Transfer> {
    let k = phi.depth();
    if k == 1 {
        let rows = (0..a.size())
            .map(|i| {
                let w = phi.value(&[i]).expect("symbol").exp();
                a.successors(i).iter().map(|&j| (j, w)).collect()
            })
            .collect();
        return Ok(Transfer {
            states: (0..a.size()).map(|i| vec![i]).collect(),
            matrix: WeightedMatrix::from_rows(rows),
        });
    }
    let states = a.words(k - 1);
    let index: HashMap<&[usize], usize> = states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let mut rows = vec![Vec::new(); states.len()];
    for (w, &v) in phi.words().iter().zip(phi.values()) {
        let from = index[&w[..k - 1]];
        let to = index[&w[1..]];
        rows[from].push((to, v.exp()));
    }
    for r in rows.iter_mut() {
        r.sort_by_key(|&(j, _)| j);
    }
    Ok(Transfer { states, matrix: WeightedMatrix::from_rows(rows) })
}

/// Topological pressure log λ(L_φ).
pub fn pressure(a: &TransitionMatrix, phi: &LocallyConstantPotential) -> Result<f64> {
    if !a.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let t = transfer(a, phi)?;
    Ok(perron(&t.matrix)?.lambda.ln())
}

/// Stationary Markov measure on (k−1)-word states.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    states: Vec<Word>,
    index: HashMap<Word, usize>,
    stationary: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    cumulative: Vec<Vec<f64>>,
}

impl MarkovMeasure {
    /// Builds from explicit data.
    pub fn new(states: Vec<Word>, stationary: Vec<f64>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let index = states.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let cumulative = rows
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                r.iter()
                    .map(|&(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { states, index, stationary, rows, cumulative }
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn state_len(&self) -> usize {
        self.states[0].len()
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|&&(k, _)| k == j).map_or(0.0, |&(_, p)| p)
    }

    /// Max over states of |(pP)_j − p_j|.
    pub fn stationarity_residual(&self) -> f64 {
        let mut pp = vec![0.0; self.states.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                pp[j] += self.stationary[i] * p;
            }
        }
        pp.iter().zip(&self.stationary).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Measure of the cylinder [w₀…w_{n−1}] at coordinate 0.
    pub fn cylinder(&self, word: &[usize]) -> Result<f64> {
        let s = self.state_len();
        if word.is_empty() {
            return Ok(1.0);
        }
        if word.len() < s {
            let total: f64 =
                self.states.iter().zip(&self.stationary).filter(|(w, _)| w.starts_with(word)).map(|(_, p)| p).sum();
            return if total > 0.0 { Ok(total) } else { Err(Error::InadmissibleWord(word.to_vec())) };
        }
        let mut cur = *self.index.get(&word[..s]).ok_or_else(|| Error::InadmissibleWord(word.to_vec()))?;
        let mut mass = self.stationary[cur];
        for i in 1..=word.len() - s {
            let next = *self.index.get(&word[i..i + s]).ok_or_else(|| Error::InadmissibleWord(word.to_vec()))?;
            let p = self.transition(cur, next);
            if p == 0.0 {
                return Err(Error::InadmissibleWord(word.to_vec()));
            }
            mass *= p;
            cur = next;
        }
        Ok(mass)
    }

    /// ∫ψ dμ.
    pub fn integrate(&self, psi: &LocallyConstantPotential) -> Result<f64> {
        psi.words().iter().zip(psi.values()).try_fold(0.0, |acc, (w, v)| Ok(acc + v * self.cylinder(w)?))
    }

    pub fn sample_state(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.stationary.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.stationary.len() - 1
    }

    pub fn step(&self, state: usize, rng: &mut impl Rng) -> usize {
        let cum = &self.cumulative[state];
        let u: f64 = rng.gen::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.rows[state][k].0
    }

    /// Symbols x₀…x_{n−1} of a stationary sample path.
    pub fn sample_symbols(&self, n: usize, rng: &mut impl Rng) -> Word {
        let mut out = Vec::with_capacity(n);
        let mut s = self.sample_state(rng);
        while out.len() < n {
            out.push(self.states[s][0]);
            s = self.step(s, rng);
        }
        out
    }
}

/// Equilibrium state of φ: P_ij = L_ij r_j/(λ r_i), p_i = l_i r_i.
pub fn equilibrium(a: &TransitionMatrix, phi: &LocallyConstantPotential) -> Result<MarkovMeasure> {
    if !a.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let t = transfer(a, phi)?;
    let pf = perron(&t.matrix)?;
    let n = t.states.len();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            t.matrix.row(i).iter().map(|&(j, l)| (j, l * pf.right[j] / (pf.lambda * pf.right[i]))).collect::<Vec<_>>()
        })
        .map(|row: Vec<(usize, f64)>| {
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            row.into_iter().map(|(j, p)| (j, p / total)).collect()
        })
        .collect();
    let stationary: Vec<f64> = (0..n).map(|i| pf.left[i] * pf.right[i]).collect();
    Ok(MarkovMeasure::new(t.states, stationary, rows))
}

/// μ[w] for the measure; alias of [`MarkovMeasure::cylinder`].
pub fn cylinder_measure(mu: &MarkovMeasure, word: &[usize]) -> Result<f64> {
    mu.cylinder(word)
}

/// Σ φ over every full depth-k window of the word.
pub fn birkhoff_sum(phi: &LocallyConstantPotential, word: &[usize]) -> Result<f64> {
    let k = phi.depth();
    if word.len() < k {
        return Err(Error::WordTooShort { len: word.len(), depth: k });
    }
    word.windows(k)
        .try_fold(0.0, |acc, w| phi.value(w).map(|v| acc + v).ok_or_else(|| Error::InadmissibleWord(word.to_vec())))
}

/// Σ φ over every cyclic window of a periodic word.
pub fn cyclic_birkhoff_sum(phi: &LocallyConstantPotential, word: &[usize]) -> Result<f64> {
    let k = phi.depth();
    let n = word.len();
    if n == 0 {
        return Err(Error::WordTooShort { len: 0, depth: k });
    }
    let mut buf = Vec::with_capacity(k);
    let mut total = 0.0;
    for i in 0..n {
        buf.clear();
        buf.extend((0..k).map(|j| word[(i + j) % n]));
        total += phi.value(&buf).ok_or_else(|| Error::InadmissibleWord(word.to_vec()))?;
    }
    Ok(total)
}

/// Cyclic Birkhoff sum over a periodic orbit.
pub fn orbit_sum(phi: &LocallyConstantPotential, orbit: &PeriodicOrbit) -> Result<f64> {
    cyclic_birkhoff_sum(phi, orbit.word())
}

/// Gibbs ratio bounds μ[w]·exp(mP − S φ(w)) for the words of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsLevel {
    pub length: usize,
    pub words: usize,
    pub min: f64,
    pub max: f64,
    /// Bounds accumulated over all lengths up to this one.
    pub cumulative_min: f64,
    pub cumulative_max: f64,
}

impl GibbsLevel {
    pub fn cumulative_spread(&self) -> f64 {
        self.cumulative_max / self.cumulative_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsReport {
    pub c_low: f64,
    pub c_high: f64,
    pub levels: Vec<GibbsLevel>,
}

/// Gibbs ratios over every admissible word of length depth..=n_max.
///
/// A word of length n carries m = n − k + 1 full windows and is compared with
/// exp(−mP + Σφ); for depth 1 this is exp(−nP + S_nφ).
pub fn verify_gibbs(a: &TransitionMatrix, phi: &LocallyConstantPotential, n_max: usize) -> Result<GibbsReport> {
    if n_max > 14 {
        return Err(Error::InvalidArgument("n_max must not exceed 14".into()));
    }
    let p = pressure(a, phi)?;
    let mu = equilibrium(a, phi)?;
    let k = phi.depth();
    let mut levels = Vec::new();
    let (mut cmin, mut cmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in k..=n_max {
        let words = a.words(n);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for w in &words {
            let m = (n - k + 1) as f64;
            let ratio = mu.cylinder(w)? * (m * p - birkhoff_sum(phi, w)?).exp();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        cmin = cmin.min(lo);
        cmax = cmax.max(hi);
        levels.push(GibbsLevel {
            length: n,
            words: words.len(),
            min: lo,
            max: hi,
            cumulative_min: cmin,
            cumulative_max: cmax,
        });
    }
    Ok(GibbsReport { c_low: cmin, c_high: cmax, levels })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureDerivative {
    pub slope: f64,
    pub integral: f64,
}

/// Finite-difference slope of t ↦ P(φ + tψ) at 0 against ∫ψ dμ_φ.
pub fn pressure_derivative(
    a: &TransitionMatrix,
    phi: &LocallyConstantPotential,
    psi: &LocallyConstantPotential,
) -> Result<PressureDerivative> {
    let h = FIRST_DIFF_STEP;
    let up = pressure(a, &phi.add_scaled(a, psi, h)?)?;
    let down = pressure(a, &phi.add_scaled(a, psi, -h)?)?;
    let integral = equilibrium(a, phi)?.integrate(psi)?;
    Ok(PressureDerivative { slope: (up - down) / (2.0 * h), integral })
}

/// Asymptotic variance of ψ under μ_φ from the second difference of pressure.
pub fn variance(a: &TransitionMatrix, phi: &LocallyConstantPotential, psi: &LocallyConstantPotential) -> Result<f64> {
    let mean = equilibrium(a, phi)?.integrate(psi)?;
    let centered = psi.affine(1.0, -mean);
    let h = SECOND_DIFF_STEP;
    let up = pressure(a, &phi.add_scaled(a, &centered, h)?)?;
    let mid = pressure(a, phi)?;
    let down = pressure(a, &phi.add_scaled(a, &centered, -h)?)?;
    Ok(((up - 2.0 * mid + down) / (h * h)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![1, 1], vec![1, 1]]).unwrap()
    }

    fn golden() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn recode_state_counts() {
        let g = golden();
        let phi = LocallyConstantPotential::new(&g, 2, |_| 0.0).unwrap();
        let (a2, _) = recode(&g, &phi).unwrap();
        assert_eq!(a2.size(), 3);
        let f = full();
        let phi = LocallyConstantPotential::new(&f, 2, |_| 0.0).unwrap();
        let (a2, _) = recode(&f, &phi).unwrap();
        assert_eq!(a2.size(), 4);
        assert_eq!(a2.edge_count(), 8);
    }

    #[test]
    fn pressure_closed_forms() {
        let f = full();
        assert!((pressure(&f, &LocallyConstantPotential::zero(&f)).unwrap() - 2f64.ln()).abs() < 1e-13);
        let ind = LocallyConstantPotential::indicator(&f, 1);
        assert!((pressure(&f, &ind).unwrap() - (1.0 + 1f64.exp()).ln()).abs() < 1e-13);
        let g = golden();
        let gold = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pressure(&g, &LocallyConstantPotential::zero(&g)).unwrap() - gold.ln()).abs() < 1e-13);
    }

    #[test]
    fn bernoulli_equilibrium() {
        let f = full();
        let mu = equilibrium(&f, &LocallyConstantPotential::indicator(&f, 1)).unwrap();
        let e = 1f64.exp();
        assert!((mu.cylinder(&[1]).unwrap() - e / (1.0 + e)).abs() < 1e-13);
        let d = mu.transition(0, 1) - e / (1.0 + e);
        assert!(d.abs() < 1e-13, "{d}");
        let mu0 = equilibrium(&f, &LocallyConstantPotential::zero(&f)).unwrap();
        assert!((mu0.cylinder(&[0, 1]).unwrap() - 0.25).abs() < 1e-14);
        assert!((mu0.cylinder(&[0]).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn forbidden_cylinder() {
        let g = golden();
        let mu = equilibrium(&g, &LocallyConstantPotential::zero(&g)).unwrap();
        assert_eq!(mu.cylinder(&[1, 1]), Err(Error::InadmissibleWord(vec![1, 1])));
    }

    #[test]
    fn birkhoff_sums() {
        let f = full();
        let ind = LocallyConstantPotential::indicator(&f, 1);
        assert_eq!(birkhoff_sum(&ind, &[0, 1, 1, 0]).unwrap(), 2.0);
        let phi = LocallyConstantPotential::new(&f, 2, |w| match w {
            [0, 1] => 0.25,
            [1, 0] => 0.5,
            _ => 0.0,
        })
        .unwrap();
        assert_eq!(cyclic_birkhoff_sum(&phi, &[0, 1]).unwrap(), 0.75);
        assert_eq!(birkhoff_sum(&phi, &[0]), Err(Error::WordTooShort { len: 1, depth: 2 }));
    }

    #[test]
    fn derivative_and_variance_full_shift() {
        let f = full();
        let zero = LocallyConstantPotential::zero(&f);
        let ind = LocallyConstantPotential::indicator(&f, 1);
        let d = pressure_derivative(&f, &zero, &ind).unwrap();
        assert!((d.slope - 0.5).abs() < 1e-9);
        assert!((d.integral - 0.5).abs() < 1e-13);
        assert!((variance(&f, &zero, &ind).unwrap() - 0.25).abs() < 1e-6);
        let c = LocallyConstantPotential::constant(&f, 3.0).unwrap();
        assert!(variance(&f, &zero, &c).unwrap() < 1e-6);
    }

    #[test]
    fn entries_with_missing_words() {
        let g = golden();
        let (pot, missing) = LocallyConstantPotential::from_entries(&g, 2, &[(vec![0, 1], 1.5)]).unwrap();
        assert_eq!(pot.value(&[0, 1]), Some(1.5));
        assert_eq!(missing, vec![vec![0, 0], vec![1, 0]]);
        assert!(LocallyConstantPotential::from_entries(&g, 2, &[(vec![1, 1], 1.0)]).is_err());
    }

    #[test]
    fn parse_potential_text() {
        let g = golden();
        let (pot, missing) = LocallyConstantPotential::parse(&g, "01 1.5\n0,0 -1 # c\n").unwrap();
        assert_eq!(pot.depth(), 2);
        assert_eq!(pot.value(&[0, 1]), Some(1.5));
        assert_eq!(pot.value(&[0, 0]), Some(-1.0));
        assert_eq!(missing, vec![vec![1, 0]]);
        let (pot, _) = LocallyConstantPotential::parse(&g, "1 2\n").unwrap();
        assert_eq!(pot.value(&[1]), Some(2.0));
        assert!(matches!(LocallyConstantPotential::parse(&g, "11 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(LocallyConstantPotential::parse(&g, "0 1\n01 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(LocallyConstantPotential::parse(&g, "0 x\n"), Err(Error::Parse { line: 1, col: 3, .. })));
    }
}
