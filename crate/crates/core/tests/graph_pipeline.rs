use symflow::coding::{
    build_sigma, check_markov_property, check_pre_markov, check_proper_family, check_semiconjugacy, geodesic_lengths,
    graph_coding, regularity_report,
};
use symflow::graph::{closed_geodesics, code_flow, edge_shift, systole, Length, MetricGraph};
use symflow::sections::{build_sections, GraphSystem};
use symflow::Error;

fn system(g: &MetricGraph) -> GraphSystem {
    let alpha = systole(g) * Length::ratio(1, 10);
    GraphSystem::new(g.clone(), build_sections(g, alpha).unwrap())
}

fn closure(g: MetricGraph) {
    let sys = system(&g);
    for r in [
        check_proper_family(&sys, 0, 1).unwrap(),
        check_pre_markov(&sys, 0, 1).unwrap(),
        check_markov_property(&sys, 0, 1).unwrap(),
    ] {
        assert!(r.pass(), "{:?}", r.failing());
    }

    let sigma = build_sigma(&sys, 0, 1).unwrap();
    assert!(sigma.matrix.is_irreducible());
    assert_eq!(sigma.matrix.period().unwrap(), 1);
    let h = sigma.flow().unwrap().flow_entropy().unwrap();
    assert!((h - code_flow(&g).flow_entropy().unwrap()).abs() < 1e-9);

    let coding = graph_coding(&sys).unwrap();
    assert_eq!(coding.result, sigma);
    let semi = check_semiconjugacy(&sys, &coding, 200, Length::int(5), 3).unwrap();
    assert!(semi.report.pass(), "{:?}", semi.report.failing());
    assert_eq!(semi.max_error, 0.0);

    let coded = coding.primitive_periods(Length::int(8));
    assert!(!coded.is_empty());
    assert_eq!(coded, geodesic_lengths(&sys, Length::int(8)));

    assert!(regularity_report(&sys, &coding).report.pass());
}

#[test]
fn rose_closes() {
    closure(MetricGraph::rose(&[Length::int(1), Length::int(1)]).unwrap());
}

#[test]
fn theta_closes() {
    closure(MetricGraph::theta(&[Length::int(1), Length::int(1), Length::int(1)]).unwrap());
}

#[test]
fn mixed_rational_lengths_close() {
    closure(MetricGraph::theta(&[Length::int(1), Length::ratio(3, 2), Length::int(2)]).unwrap());
}

#[test]
fn coarse_alpha_is_rejected() {
    let g = MetricGraph::rose(&[Length::int(1), Length::int(1)]).unwrap();
    assert!(matches!(build_sections(&g, Length::ratio(1, 8)), Err(Error::AlphaTooLarge { .. })));
    assert!(build_sections(&g, Length::ratio(1, 9)).is_ok());
}

#[test]
fn periods_match_orbit_periods() {
    for g in [
        MetricGraph::rose(&[Length::int(1), Length::int(2)]).unwrap(),
        MetricGraph::theta(&[Length::int(1), Length::ratio(1, 2), Length::int(3)]).unwrap(),
    ] {
        let flow = code_flow(&g);
        let a = edge_shift(&g);
        let mut from_orbits = Vec::new();
        for n in 1..=16 {
            for o in a.enumerate_periodic(n).unwrap().orbits {
                let p = flow.orbit_period(&o).unwrap();
                if p <= 8.0 + 1e-12 {
                    from_orbits.push(p);
                }
            }
        }
        let mut lengths: Vec<f64> = closed_geodesics(&g, Length::int(8)).iter().map(|x| x.1.to_f64()).collect();
        from_orbits.sort_by(f64::total_cmp);
        lengths.sort_by(f64::total_cmp);
        assert_eq!(from_orbits.len(), lengths.len());
        for (x, y) in from_orbits.iter().zip(&lengths) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
