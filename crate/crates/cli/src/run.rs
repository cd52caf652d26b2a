use std::path::Path;

use num_complex::Complex64;
use symflow::coding::{
    build_sigma, check_markov_property, check_pre_markov, check_proper_family, check_semiconjugacy, graph_coding,
    regularity_report, CodingResult, FlowBackend, PredicateReport,
};
use symflow::graph::{arithmetic_check, bowen_margulis, closed_geodesics, code_flow, systole, Length, MetricGraph};
use symflow::hyperbolic::{
    make_rectangle, rect_geodesic, verify, verify_all, Arc, Geodesic, HypFamily, Lemma, VerifierConfig,
};
use symflow::sections::{build_sections, GraphPoint, GraphSystem, Layer};
use symflow::sft::{perron, sequence_distance, TransitionMatrix, Word};
use symflow::suspension::{
    clt_samples, ks_distance_normal, weak_mixing_test, BasePoint, FlowPoint, OrbitSpectrum, RoofFunction,
    SuspensionFlow, WEAK_MIXING_TOL, ZETA_TAIL_TOL,
};
use symflow::thermo::{
    birkhoff_sum, cylinder_measure, equilibrium, pressure, pressure_derivative, recode, variance, verify_gibbs,
    LocallyConstantPotential,
};
use symflow::Error;

use crate::report::{fmt_g, word, Cell, Report};
use crate::*;

pub enum Outcome {
    Pass,
    Fail,
}

pub enum Failure {
    /// Bad input or a violated precondition (exit 2).
    Input(String),
    /// A check ran and did not hold (exit 1).
    Verification(String),
}

type Run<T> = std::result::Result<T, Failure>;

/// Maps a library error raised inside `module`.
fn lib(module: &'static str) -> impl Fn(Error) -> Failure {
    move |e| match e {
        Error::Parse { .. } => Failure::Input(e.to_string()),
        Error::UncertifiedTransition { .. } | Error::NoReturn(_) => Failure::Verification(format!("{module}: {e}")),
        other => Failure::Input(format!("precondition violated in {module}: {other}")),
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// Tolerance knobs, overridable through the environment.
struct Knobs {
    values: Vec<(&'static str, f64)>,
}

const KNOBS: [(&str, f64); 6] = [
    ("SYMFLOW_ZETA_TAIL_TOL", ZETA_TAIL_TOL),
    ("SYMFLOW_WEAK_MIXING_TOL", WEAK_MIXING_TOL),
    ("SYMFLOW_POLE_TOL", 1e-9),
    ("SYMFLOW_DERIVATIVE_TOL", 1e-6),
    ("SYMFLOW_IDENTITY_TOL", 1e-9),
    ("SYMFLOW_GX_REL_TOL", 1e-8),
];

impl Knobs {
    fn from_env() -> Run<Self> {
        let mut values = Vec::new();
        for (name, default) in KNOBS {
            let v = match std::env::var(name) {
                Ok(s) => s.trim().parse::<f64>().map_err(|_| input(format!("{name}={s:?} is not a number")))?,
                Err(_) => default,
            };
            if !(v > 0.0 && v.is_finite()) {
                return Err(input(format!("{name} must be positive, got {v}")));
            }
            values.push((name, v));
        }
        Ok(Self { values })
    }

    fn get(&self, name: &str) -> f64 {
        self.values.iter().find(|(n, _)| *n == name).expect("known knob").1
    }
}

pub fn run(cli: &Cli) -> Run<Outcome> {
    let knobs = Knobs::from_env()?;
    let (mut report, outcome) = match &cli.command {
        Command::Sft(a) => sft(a)?,
        Command::Thermo(a) => thermo(a, &knobs)?,
        Command::Flow(a) => flow(a, &knobs)?,
        Command::Graph(a) => graph(a)?,
        Command::HypVerify(a) => hyp(a, &knobs)?,
        Command::Code(a) => code(a)?,
    };
    report.prepend_meta(knobs.values.iter().map(|(n, v)| (n.to_string(), fmt_g(*v))).collect());
    report.emit(cli.out.as_deref()).map_err(|e| input(format!("cannot write report: {e}")))?;
    Ok(outcome)
}

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Run<TransitionMatrix> {
    TransitionMatrix::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_potential(a: &TransitionMatrix, path: Option<&Path>) -> Run<LocallyConstantPotential> {
    let Some(path) = path else { return Ok(LocallyConstantPotential::zero(a)) };
    let (pot, missing) =
        LocallyConstantPotential::parse(a, &read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if !missing.is_empty() {
        eprintln!("warning: {}: {} admissible words default to 0", path.display(), missing.len());
    }
    Ok(pot)
}

fn load_graph(path: &Path) -> Run<MetricGraph> {
    MetricGraph::parse(&read(path)?).map_err(|e| match e {
        Error::Parse { .. } => input(format!("{}: {e}", path.display())),
        other => input(format!("precondition violated in graph_flow: {other}")),
    })
}

fn length(s: &str, what: &str) -> Run<Length> {
    Length::parse(s).map_err(|e| input(format!("{what}: {e}")))
}

/// Symbols separated by spaces or commas.
fn parse_word(s: &str) -> Run<Word> {
    s.split([' ', ','])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| input(format!("bad symbol {t:?} in word {s:?}"))))
        .collect()
}

fn seed(s: Option<u64>) -> Run<u64> {
    s.ok_or_else(|| input("--seed is required for sampled computations"))
}

fn quantity(rows: Vec<(&str, Cell)>) -> Report {
    let mut r = Report::new(&["quantity", "value"]);
    for (k, v) in rows {
        r.row(vec![k.into(), v]);
    }
    r
}

fn pass(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn sft(a: &SftArgs) -> Run<(Report, Outcome)> {
    let m = load_matrix(&a.matrix)?;
    let e = lib("sft_core");
    let r = match a.op {
        SftOp::Entropy => {
            let p = perron(&m.to_weighted()).map_err(&e)?;
            quantity(vec![("entropy", p.lambda.ln().into()), ("lambda", p.lambda.into())])
        }
        SftOp::Irreducibility => quantity(vec![("irreducible", m.is_irreducible().into())]),
        SftOp::Period => quantity(vec![("period", m.period().map_err(&e)?.into())]),
        SftOp::Orbits => {
            let mut r = Report::new(&["period", "points", "orbit"]);
            for n in 1..=a.n {
                let c = m.enumerate_periodic(n).map_err(&e)?;
                for o in &c.orbits {
                    r.row(vec![n.into(), c.census.into(), word(o.word()).into()]);
                }
            }
            r
        }
        SftOp::Words => {
            let mut r = Report::new(&["length", "words"]);
            for n in 1..=a.n {
                r.row(vec![n.into(), m.count_words(n).map_err(&e)?.into()]);
            }
            r
        }
        SftOp::Distance => {
            let (Some(x), Some(y)) = (&a.x, &a.y) else { return Err(input("distance needs --x and --y")) };
            let d = sequence_distance(&parse_word(x)?, &parse_word(y)?).map_err(&e)?;
            quantity(vec![("distance", d.value.into())])
        }
    };
    Ok((r, Outcome::Pass))
}

fn thermo(a: &ThermoArgs, knobs: &Knobs) -> Run<(Report, Outcome)> {
    let m = load_matrix(&a.matrix)?;
    let phi = load_potential(&m, a.phi.as_deref())?;
    let e = lib("thermo");
    let psi = || -> Run<LocallyConstantPotential> {
        let p = a.psi.as_deref().ok_or_else(|| input("--psi is required"))?;
        load_potential(&m, Some(p))
    };
    let mut outcome = Outcome::Pass;
    let r = match a.op {
        ThermoOp::Pressure => quantity(vec![("pressure", pressure(&m, &phi).map_err(&e)?.into())]),
        ThermoOp::Equilibrium => {
            let mu = equilibrium(&m, &phi).map_err(&e)?;
            let mut r = Report::new(&["state", "stationary", "successor", "probability"]);
            for (i, s) in mu.states().iter().enumerate() {
                for &(j, p) in mu.row(i) {
                    r.row(vec![word(s).into(), mu.stationary()[i].into(), word(&mu.states()[j]).into(), p.into()]);
                }
            }
            r
        }
        ThermoOp::Gibbs => {
            let g = verify_gibbs(&m, &phi, a.n_max).map_err(&e)?;
            let mut r = Report::new(&["length", "words", "min", "max", "cumulative_min", "cumulative_max"]);
            r.meta("c_low", fmt_g(g.c_low));
            r.meta("c_high", fmt_g(g.c_high));
            for l in &g.levels {
                r.row(vec![
                    l.length.into(),
                    l.words.into(),
                    l.min.into(),
                    l.max.into(),
                    l.cumulative_min.into(),
                    l.cumulative_max.into(),
                ]);
            }
            r
        }
        ThermoOp::Derivative => {
            let d = pressure_derivative(&m, &phi, &psi()?).map_err(&e)?;
            let gap = (d.slope - d.integral).abs();
            let ok = gap <= knobs.get("SYMFLOW_DERIVATIVE_TOL");
            outcome = pass(ok);
            let mut r = Report::new(&["slope", "integral", "difference", "pass"]);
            r.row(vec![d.slope.into(), d.integral.into(), gap.into(), ok.into()]);
            r
        }
        ThermoOp::Variance => quantity(vec![("variance", variance(&m, &phi, &psi()?).map_err(&e)?.into())]),
        ThermoOp::Cylinder => {
            let w = parse_word(a.word.as_deref().ok_or_else(|| input("--word is required"))?)?;
            let mu = equilibrium(&m, &phi).map_err(&e)?;
            let mut r = Report::new(&["word", "measure", "birkhoff_sum"]);
            let s = if w.len() >= phi.depth() { birkhoff_sum(&phi, &w).map_err(&e)?.into() } else { "".into() };
            r.row(vec![word(&w).into(), cylinder_measure(&mu, &w).map_err(&e)?.into(), s]);
            r
        }
        ThermoOp::Recode => {
            let (m2, phi2) = recode(&m, &phi).map_err(&e)?;
            if let Some(p) = &a.matrix_out {
                std::fs::write(p, matrix_text(&m2))
                    .map_err(|err| input(format!("cannot write {}: {err}", p.display())))?;
            }
            let mut r = Report::new(&["state", "word", "value"]);
            for (w, &v) in phi2.words().iter().zip(phi2.values()) {
                r.row(vec![w[0].into(), word(&phi.words()[w[0]]).into(), v.into()]);
            }
            r
        }
    };
    Ok((r, outcome))
}

fn matrix_text(m: &TransitionMatrix) -> String {
    let mut s = format!("{}\n", m.size());
    for row in m.to_dense() {
        s.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
        s.push('\n');
    }
    s
}

/// Roof table "i j value", readable as a depth-2 potential.
fn roof_text(rows: impl Iterator<Item = ((usize, usize), f64)>) -> String {
    rows.map(|((i, j), t)| format!("{i} {j} {}\n", fmt_g(t))).collect()
}

fn write_coding(m: &TransitionMatrix, rows: &[((usize, usize), f64)], mo: Option<&Path>, ro: Option<&Path>) -> Run<()> {
    let w = |p: &Path, s: String| std::fs::write(p, s).map_err(|e| input(format!("cannot write {}: {e}", p.display())));
    if let Some(p) = mo {
        w(p, matrix_text(m))?;
    }
    if let Some(p) = ro {
        w(p, roof_text(rows.iter().copied()))?;
    }
    Ok(())
}

fn load_flow(a: &FlowArgs) -> Run<SuspensionFlow> {
    let m = load_matrix(&a.matrix)?;
    let e = lib("suspension");
    let roof = match (&a.roof, a.roof_const) {
        (Some(p), _) => RoofFunction::new(load_potential(&m, Some(p))?).map_err(&e)?,
        (None, Some(c)) => RoofFunction::constant(&m, c).map_err(&e)?,
        (None, None) => return Err(input("one of --roof or --roof-const is required")),
    };
    SuspensionFlow::new(m, roof).map_err(&e)
}

fn flow(a: &FlowArgs, knobs: &Knobs) -> Run<(Report, Outcome)> {
    let f = load_flow(a)?;
    let m = f.base().clone();
    let e = lib("suspension");
    let r = match a.op {
        FlowOp::Entropy => {
            let (lo, hi) = f.pressure_root(knobs.get("SYMFLOW_POLE_TOL")).map_err(&e)?;
            quantity(vec![
                ("entropy", f.flow_entropy().map_err(&e)?.into()),
                ("pole_lo", lo.into()),
                ("pole_hi", hi.into()),
            ])
        }
        FlowOp::Zeta => {
            let spec = OrbitSpectrum::new(&f, a.l_max).map_err(&e)?;
            let (lo, hi) = f.pressure_root(knobs.get("SYMFLOW_POLE_TOL")).map_err(&e)?;
            let mut r = Report::new(&["re_s", "im_s", "re_zeta", "im_zeta", "tail_bound", "converged"]);
            r.meta("l_max", fmt_g(a.l_max));
            r.meta("pole_bracket", format!("{}:{}", fmt_g(lo), fmt_g(hi)));
            for &re in &a.re {
                for &im in &a.im {
                    let z =
                        spec.zeta_with_tol(Complex64::new(re, im), knobs.get("SYMFLOW_ZETA_TAIL_TOL")).map_err(&e)?;
                    r.row(vec![
                        re.into(),
                        im.into(),
                        z.value.re.into(),
                        z.value.im.into(),
                        z.tail_bound.into(),
                        z.converged.into(),
                    ]);
                }
            }
            r
        }
        FlowOp::Mixing => {
            let periods = OrbitSpectrum::new(&f, a.l_max).map_err(&e)?.primitive_periods();
            let c = weak_mixing_test(&periods, knobs.get("SYMFLOW_WEAK_MIXING_TOL")).map_err(&e)?;
            let mut r = Report::new(&["orbits", "lattice_step", "weakly_mixing"]);
            r.meta("l_max", fmt_g(a.l_max));
            r.row(vec![periods.len().into(), c.map_or(Cell::S(String::new()), Cell::F), c.is_none().into()]);
            r
        }
        FlowOp::Measure => {
            let phi = load_potential(&m, a.phi.as_deref())?;
            let mu = f.flow_measure(&phi).map_err(&e)?;
            let rho = f.roof().potential();
            let mut r = Report::new(&["word", "base_measure", "roof", "mass"]);
            r.meta("normalizer", fmt_g(mu.normalizer));
            for (w, &v) in rho.words().iter().zip(rho.values()) {
                let mass = mu.mass(w, 0.0, f64::INFINITY).map_err(&e)?;
                r.row(vec![word(w).into(), mu.base.cylinder(w).map_err(&e)?.into(), v.into(), mass.into()]);
            }
            r
        }
        FlowOp::Orbit => {
            let w = parse_word(a.word.as_deref().ok_or_else(|| input("--word is required"))?)?;
            let orbit = symflow::sft::PeriodicOrbit::new(&m, &w).map_err(&e)?;
            let period = f.orbit_period(&orbit).map_err(&e)?;
            let end = f.evolve(&FlowPoint::periodic(w.clone(), 0, a.height), a.time).map_err(&e)?;
            let BasePoint::Periodic { index, .. } = end.base else { unreachable!("periodic points stay periodic") };
            let mut r = Report::new(&["orbit", "period", "time", "index", "symbol", "height"]);
            r.row(vec![
                word(orbit.word()).into(),
                period.into(),
                a.time.into(),
                index.into(),
                end.symbol().into(),
                end.height.into(),
            ]);
            r
        }
        FlowOp::Clt => {
            let seed = seed(a.seed)?;
            let phi = load_potential(&m, a.phi.as_deref())?;
            let psi = load_potential(&m, Some(a.psi.as_deref().ok_or_else(|| input("--psi is required"))?))?;
            let xs = clt_samples(&f, &phi, &psi, a.horizon, a.samples, seed).map_err(&e)?;
            let sigma = flow_sigma(&f, &phi, &psi).map_err(&e)?;
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            let mut r = Report::new(&["samples", "horizon", "mean", "sd", "sigma", "ks_distance"]);
            r.meta("seed", seed);
            r.row(vec![
                xs.len().into(),
                a.horizon.into(),
                mean.into(),
                sd.into(),
                sigma.into(),
                ks_distance_normal(&xs, 0.0, sigma).into(),
            ]);
            r
        }
    };
    Ok((r, Outcome::Pass))
}

/// σ for the flow CLT: Var(ψρ − cρ)/∫ρ with c the flow mean of ψ.
fn flow_sigma(
    f: &SuspensionFlow,
    phi: &LocallyConstantPotential,
    psi: &LocallyConstantPotential,
) -> symflow::Result<f64> {
    let a = f.base();
    let rho = f.roof().potential();
    let mu = equilibrium(a, phi)?;
    let depth = rho.depth().max(psi.depth());
    let at = |p: &LocallyConstantPotential, w: &[usize]| p.value(&w[..p.depth()]).expect("admissible");
    let psi_rho = LocallyConstantPotential::new(a, depth, |w| at(psi, w) * at(rho, w))?;
    let norm = mu.integrate(rho)?;
    let c = mu.integrate(&psi_rho)? / norm;
    let g = LocallyConstantPotential::new(a, depth, |w| (at(psi, w) - c) * at(rho, w))?;
    Ok((variance(a, phi, &g)? / norm).sqrt())
}

fn graph_system(g: &MetricGraph, alpha_frac: &str) -> Run<GraphSystem> {
    let alpha = systole(g) * length(alpha_frac, "alpha fraction")?;
    let fam = build_sections(g, alpha).map_err(lib("coding"))?;
    Ok(GraphSystem::new(g.clone(), fam))
}

fn graph(a: &GraphArgs) -> Run<(Report, Outcome)> {
    let g = load_graph(&a.graph)?;
    let e = lib("graph_flow");
    let r = match a.op {
        GraphOp::Code => {
            let f = code_flow(&g);
            let m = f.base();
            let rho = f.roof().potential();
            let mut rows = Vec::new();
            for i in 0..m.size() {
                for &j in m.successors(i) {
                    let t = if rho.depth() == 1 { rho.value(&[i]) } else { rho.value(&[i, j]) };
                    rows.push(((i, j), t.expect("admissible")));
                }
            }
            write_coding(m, &rows, a.matrix_out.as_deref(), a.roof_out.as_deref())?;
            transitions(&rows, None)
        }
        GraphOp::Geodesics => {
            let mut r = Report::new(&["length", "exact", "orbit"]);
            for (o, l) in closed_geodesics(&g, length(&a.l_max, "--l-max")?) {
                r.row(vec![l.to_f64().into(), l.to_string().into(), word(o.word()).into()]);
            }
            r
        }
        GraphOp::Arithmetic => {
            let c = arithmetic_check(&g);
            let mut r = Report::new(&["lattice_step", "weakly_mixing"]);
            r.row(vec![c.map_or(Cell::S(String::new()), |c| c.to_string().into()), c.is_none().into()]);
            r
        }
        GraphOp::Bm => {
            let bm = bowen_margulis(&g).map_err(&e)?;
            let mut r = Report::new(&["state", "tail", "head", "mass"]);
            r.meta("entropy", fmt_g(bm.entropy));
            r.meta("edge_length", bm.edge_length);
            for d in 0..g.directed_count() {
                let mass = bm.measure.mass(&[d], 0.0, f64::INFINITY).map_err(&e)?;
                r.row(vec![d.into(), g.tail(d).into(), g.head(d).into(), mass.into()]);
            }
            r
        }
        GraphOp::Sections => {
            let sys = graph_system(&g, &a.alpha_frac)?;
            let mut r = Report::new(&["index", "layer", "edge", "position", "past", "future", "diameter"]);
            r.meta("alpha", sys.family.alpha);
            for i in 0..sys.family.len() {
                for layer in [Layer::B, Layer::D] {
                    let s = sys.section(layer, i);
                    r.row(vec![
                        i.into(),
                        format!("{layer:?}").into(),
                        s.edge.into(),
                        s.position.to_string().into(),
                        word(&s.past).into(),
                        word(&s.future).into(),
                        s.diameter(&g).into(),
                    ]);
                }
            }
            r
        }
        GraphOp::Poincare => {
            let sys = graph_system(&g, &a.alpha_frac)?;
            let edges = parse_word(a.window.as_deref().ok_or_else(|| input("--window is required"))?)?;
            if a.index >= edges.len() || !sys.shift.is_admissible(&edges) {
                return Err(input("--window must be a non-backtracking edge word containing --index"));
            }
            let p = GraphPoint { edges, index: a.index, offset: length(&a.offset, "--offset")? };
            let (j, t) = sys.poincare(&p).map_err(&e)?;
            let mut r = Report::new(&["section", "time", "exact_time"]);
            r.row(vec![j.into(), t.to_f64().into(), t.to_string().into()]);
            r
        }
    };
    Ok((r, Outcome::Pass))
}

fn transitions(
    rows: &[((usize, usize), f64)],
    certs: Option<&std::collections::BTreeMap<(usize, usize), usize>>,
) -> Report {
    let mut r = Report::new(&["from", "to", "return_time", "certificates"]);
    for &((i, j), t) in rows {
        let c = certs.and_then(|c| c.get(&(i, j))).map_or(Cell::S(String::new()), |&n| n.into());
        r.row(vec![i.into(), j.into(), t.into(), c]);
    }
    r
}

fn hyp(a: &HypArgs, knobs: &Knobs) -> Run<(Report, Outcome)> {
    let e = lib("hyperbolic");
    if let Some(path) = &a.rect {
        return rect(path, a.grid).map(|r| (r, Outcome::Pass));
    }
    let seed = seed(a.seed)?;
    let cfg = VerifierConfig {
        samples: a.samples,
        seed,
        tau: a.tau,
        alpha: a.alpha,
        gx_rel: knobs.get("SYMFLOW_GX_REL_TOL"),
        grid: a.grid,
        tol: knobs.get("SYMFLOW_IDENTITY_TOL"),
        horizon: a.horizon,
    };
    let which = a.lemma.as_deref().expect("clap group");
    let reports = if which == "all" {
        verify_all(&cfg).map_err(&e)?
    } else {
        let l: Lemma = which.parse().map_err(&e)?;
        vec![verify(l, &cfg).map_err(&e)?]
    };
    let mut r = Report::new(&["lemma_id", "samples", "worst_ratio", "bound", "estimated_constants", "pass"]);
    r.meta("seed", seed);
    r.meta("tau", fmt_g(a.tau));
    for rep in &reports {
        let constants = rep.constants.iter().map(|(k, v)| format!("{k}={}", fmt_g(*v))).collect::<Vec<_>>().join(";");
        r.row(vec![
            rep.lemma.id().into(),
            rep.samples.into(),
            rep.worst_ratio.into(),
            rep.bound.into(),
            constants.into(),
            rep.pass.into(),
        ]);
        if let Some(w) = &rep.witness {
            eprintln!("{}: {w}", rep.lemma.id());
        }
    }
    Ok((r, pass(reports.iter().all(|x| x.pass))))
}

/// Rectangle spec lines: `minus A`, `plus A`, `shift B`, `tau T`,
/// `minus_arc START LEN`, `plus_arc START LEN`.
fn rect(path: &Path, grid: usize) -> Run<Report> {
    let text = read(path)?;
    let mut vals: std::collections::HashMap<&str, Vec<f64>> = Default::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut toks = line.split_whitespace();
        let Some(key) = toks.next() else { continue };
        let err = |msg: String| input(format!("{}: parse error at line {}: {msg}", path.display(), i + 1));
        let want = match key {
            "minus" | "plus" | "shift" | "tau" => 1,
            "minus_arc" | "plus_arc" => 2,
            other => return Err(err(format!("unknown key {other:?}"))),
        };
        let nums =
            toks.map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number {t:?}")))).collect::<Run<Vec<_>>>()?;
        if nums.len() != want {
            return Err(err(format!("{key} takes {want} value(s)")));
        }
        vals.insert(key, nums);
    }
    let get = |k: &str| vals.get(k).cloned().ok_or_else(|| input(format!("{}: missing {k}", path.display())));
    let e = lib("hyperbolic");
    let c = Geodesic::from_angles(get("minus")?[0], get("plus")?[0], get("shift").map_or(0.0, |v| v[0])).map_err(&e)?;
    let (um, up) = (get("minus_arc")?, get("plus_arc")?);
    let r = make_rectangle(&c, get("tau")?[0], Arc::new(um[0], um[1]), Arc::new(up[0], up[1]), grid).map_err(&e)?;
    let mut out = Report::new(&["xi_minus", "xi_plus", "shift", "apex_re", "apex_im"]);
    for i in 0..3 {
        for j in 0..3 {
            let eta =
                rect_geodesic(&r, r.minus_arc().at(i as f64 / 2.0), r.plus_arc().at(j as f64 / 2.0)).map_err(&e)?;
            let p = eta.point(0.0);
            out.row(vec![
                eta.minus().angle().into(),
                eta.plus().angle().into(),
                eta.shift().into(),
                p.re.into(),
                p.im.into(),
            ]);
        }
    }
    Ok(out)
}

fn predicates<F: FlowBackend>(b: &F, samples: usize, seed: u64) -> Run<(Report, Outcome)> {
    let e = lib("coding");
    let reports: Vec<(&str, PredicateReport)> = vec![
        ("proper", check_proper_family(b, samples, seed).map_err(&e)?),
        ("pre_markov", check_pre_markov(b, samples, seed).map_err(&e)?),
        ("markov", check_markov_property(b, samples, seed).map_err(&e)?),
    ];
    let mut r = Report::new(&["predicate", "condition", "checked", "worst", "pass"]);
    for (name, rep) in &reports {
        for c in &rep.conditions {
            r.row(vec![(*name).into(), c.name.clone().into(), c.checked.into(), c.worst.into(), c.pass.into()]);
            for w in &c.witnesses {
                eprintln!("{name}/{}: {w}", c.name);
            }
        }
    }
    Ok((r, pass(reports.iter().all(|(_, x)| x.pass()))))
}

fn sigma_report(c: &CodingResult, a: &CodeArgs) -> Run<Report> {
    let rows: Vec<_> = c.returns.iter().map(|(&k, &t)| (k, t)).collect();
    write_coding(&c.matrix, &rows, a.matrix_out.as_deref(), a.roof_out.as_deref())?;
    let mut r = transitions(&rows, Some(&c.certificates));
    r.meta("states", c.matrix.size());
    Ok(r)
}

fn tube(spec: &str) -> Run<HypFamily> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || input(format!("--tube expects minus,plus,sections,shrink; got {spec:?}"));
    let [m, p, n, s] = parts[..] else { return Err(bad()) };
    let (m, p, s) = (m.parse().map_err(|_| bad())?, p.parse().map_err(|_| bad())?, s.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    let e = lib("coding");
    let c = Geodesic::from_angles(m, p, 0.0).map_err(&e)?;
    HypFamily::along(&c, 10.0, 0.5, n, s, 5).map_err(&e)
}

fn code(a: &CodeArgs) -> Run<(Report, Outcome)> {
    let e = lib("coding");
    if let Some(spec) = &a.tube {
        let fam = tube(spec)?;
        let seed = seed(a.seed)?;
        let (mut r, o) = match a.op {
            CodeOp::Predicates => predicates(&fam, a.samples, seed)?,
            CodeOp::Sigma => (sigma_report(&build_sigma(&fam, a.samples, seed).map_err(&e)?, a)?, Outcome::Pass),
            _ => return Err(input("semiconjugacy and regularity need an exact --graph family")),
        };
        r.meta("seed", seed);
        return Ok((r, o));
    }
    let g = load_graph(a.graph.as_deref().expect("clap requires graph or tube"))?;
    let sys = graph_system(&g, &a.alpha_frac)?;
    match a.op {
        CodeOp::Predicates => predicates(&sys, 0, 0),
        CodeOp::Sigma => Ok((sigma_report(&build_sigma(&sys, 0, 0).map_err(&e)?, a)?, Outcome::Pass)),
        CodeOp::Semiconjugacy => {
            let seed = seed(a.seed)?;
            let coding = graph_coding(&sys).map_err(&e)?;
            let s =
                check_semiconjugacy(&sys, &coding, a.samples, length(&a.horizon, "--horizon")?, seed).map_err(&e)?;
            let mut r = Report::new(&["condition", "checked", "worst", "pass"]);
            r.meta("seed", seed);
            r.meta("max_error", fmt_g(s.max_error));
            r.meta("max_multiplicity", s.max_multiplicity);
            for c in &s.report.conditions {
                r.row(vec![c.name.clone().into(), c.checked.into(), c.worst.into(), c.pass.into()]);
            }
            Ok((r, pass(s.report.pass())))
        }
        CodeOp::Regularity => {
            let coding = graph_coding(&sys).map_err(&e)?;
            let reg = regularity_report(&sys, &coding);
            let mut r = Report::new(&["condition", "checked", "worst", "pass"]);
            r.meta("return_lipschitz", fmt_g(reg.return_lipschitz));
            r.meta("projection_exponent", fmt_g(reg.projection_exponent));
            for c in &reg.report.conditions {
                r.row(vec![c.name.clone().into(), c.checked.into(), c.worst.into(), c.pass.into()]);
            }
            Ok((r, pass(reg.report.pass())))
        }
    }
}
