use num_complex::Complex64;
use proptest::prelude::*;
use symflow::hyperbolic::*;

fn geodesic() -> impl Strategy<Value = Geodesic> {
    (0.0..std::f64::consts::TAU, 0.3..5.9f64, -2.0..2.0f64)
        .prop_map(|(m, gap, b)| Geodesic::from_angles(m, m + gap, b).unwrap())
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

/// A geodesic whose endpoints and basepoint lie within `eps` of those of `g`.
fn near(g: &Geodesic, d: (f64, f64, f64)) -> Geodesic {
    Geodesic::from_angles(g.minus().angle() + d.0, g.plus().angle() + d.1, g.shift() + d.2).unwrap()
}

fn small() -> impl Strategy<Value = (f64, f64, f64)> {
    (-0.05..0.05f64, -0.05..0.05f64, -0.05..0.05f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_a_metric(p in disk_point(), q in disk_point(), r in disk_point()) {
        let (pq, qp) = (hyp_dist(p, q).unwrap(), hyp_dist(q, p).unwrap());
        prop_assert!((pq - qp).abs() <= 1e-12 * (1.0 + pq));
        prop_assert_eq!(hyp_dist(p, p).unwrap(), 0.0);
        prop_assert!(pq <= hyp_dist(p, r).unwrap() + hyp_dist(r, q).unwrap() + 1e-10);
    }

    #[test]
    fn geodesics_have_unit_speed(c in geodesic(), s in -4.0..4.0f64, t in -4.0..4.0f64) {
        prop_assert!((hyp_dist(c.point(s), c.point(t)).unwrap() - (s - t).abs()).abs() < 1e-9);
        prop_assert!((c.busemann(c.point(t)).unwrap() + t).abs() < 1e-10);
        prop_assert!((c.flowed(s).point(t) - c.point(s + t)).norm() < 1e-12);
    }

    #[test]
    fn busemann_is_one_lipschitz(c in geodesic(), p in disk_point(), q in disk_point()) {
        let gap = (c.busemann(p).unwrap() - c.busemann(q).unwrap()).abs();
        prop_assert!(gap <= hyp_dist(p, q).unwrap() + 1e-10);
    }

    #[test]
    fn busemann_is_convex_along_geodesics(c in geodesic(), eta in geodesic(), t in -3.0..3.0f64, h in 0.05..1.0f64) {
        let b = |s: f64| c.busemann(eta.point(s)).unwrap();
        prop_assert!(b(t - h) + b(t + h) - 2.0 * b(t) >= -1e-9);
    }

    #[test]
    fn bracket_identities(x in geodesic(), dy in small(), dz in small(), t in -1.0..1.0f64) {
        let (y, z) = (near(&x, dy), near(&x, dz));
        let xz = bracket(&x, &z).unwrap();
        let xy = bracket(&x, &y).unwrap();
        let lhs = [
            (bracket(&x, &x).unwrap(), x),
            (bracket(&xy, &z).unwrap(), xz),
            (bracket(&x, &bracket(&y, &z).unwrap()).unwrap(), xz),
            (bracket(&x.flowed(t), &y.flowed(t)).unwrap(), xy.flowed(t)),
        ];
        for (a, b) in lhs {
            prop_assert!(a.same_endpoints(&b));
            prop_assert!((a.shift() - b.shift()).abs() <= 1e-9);
        }
        // ⟨x,y⟩ is on the stable horocycle of y and the unstable horocycle of g_v x.
        let v = v_time(&x, &y).unwrap();
        prop_assert!(y.busemann(xy.point(0.0)).unwrap().abs() <= 1e-9);
        prop_assert!(x.flowed(v).busemann_back(xy.point(0.0)).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn v_time_vanishes_on_stable_partners(x in geodesic(), e in -0.1..0.1f64) {
        let s = stable_partner(&x, BoundaryPoint::new(x.minus().angle() + e)).unwrap();
        prop_assert!(v_time(&x, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn gx_distance_symmetric(x in geodesic(), d in small()) {
        let y = near(&x, d);
        let (a, b) = (gx_distance(&x, &y, GX_TOL), gx_distance(&y, &x, GX_TOL));
        prop_assert!((a - b).abs() <= 2.0 * GX_TOL);
    }

    #[test]
    fn gx_flow_lipschitz(x in geodesic(), d in small(), t in 0.0..3.0f64) {
        let y = near(&x, d);
        let d0 = gx_distance(&x, &y, 1e-10);
        let dt = gx_distance(&x.flowed(t), &y.flowed(t), 1e-10);
        prop_assert!(dt <= (2.0 * t).exp() * d0 + 1e-9);
    }
}

#[test]
fn v_time_continuity() {
    let x = Geodesic::from_angles(3.4, 0.3, 0.1).unwrap();
    let mut last = f64::INFINITY;
    for k in 1..8 {
        let e = 10f64.powi(-k);
        let y = Geodesic::from_angles(3.4 + e, 0.3 - e, 0.1 + e).unwrap();
        let v = v_time(&x, &y).unwrap().abs();
        let d = gx_distance(&x, &y, GX_TOL);
        assert!(v <= 10.0 * d + 1e-12, "{v} vs {d}");
        assert!(v < last);
        last = v;
    }
}

#[test]
fn rectangle_members_satisfy_lemmas() {
    let c = Geodesic::from_angles(1.0, 4.0, -0.3).unwrap();
    let r = maximal_rectangle(&c, 10.0, 9).unwrap();
    for i in 0..=4 {
        for j in 0..=4 {
            let eta = rect_geodesic(&r, r.minus_arc().at(i as f64 / 4.0), r.plus_arc().at(j as f64 / 4.0)).unwrap();
            assert!(c.busemann(eta.point(0.0)).unwrap().abs() <= 1e-10);
            assert!(hyp_dist(c.point(0.0), eta.point(0.0)).unwrap() <= 2.0);
            let (b1, b2) = r.balls();
            let (_, hi1) = ball_crossing(&eta, b1, 1.0).unwrap().unwrap();
            let (lo2, _) = ball_crossing(&eta, b2, 1.0).unwrap().unwrap();
            assert!(hi1 < 0.0 && lo2 > 0.0);
            let back = proj_rect(&r, &eta.flowed(0.1), 0.5).unwrap();
            assert!(gx_distance(&back, &eta, GX_TOL) < 1e-8);
        }
    }
}

#[test]
fn suite_passes_at_reduced_size() {
    let cfg = VerifierConfig { samples: 120, seed: 11, ..Default::default() };
    for r in verify_all(&cfg).unwrap() {
        assert!(r.pass, "{} failed: {:?}", r.lemma, r.witness);
    }
}

#[test]
fn suite_is_deterministic() {
    let cfg = VerifierConfig { samples: 30, seed: 5, ..Default::default() };
    for l in [Lemma::ProjHolder, Lemma::ShadowClose] {
        assert_eq!(verify(l, &cfg).unwrap(), verify(l, &cfg).unwrap());
    }
}
