//! Geodesics in the Poincaré disk and the metric on the space of geodesics.
//!
//! A geodesic is stored by its boundary endpoints and a shift `b`, so that
//! c(t) = M_a(e^{iψ} tanh((t + b)/2)) where a is the point of c closest to
//! the origin and M_a(w) = (w + a)/(1 + āw).

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

mod backend;
mod rect;
mod verify;

pub use backend::HypFamily;
pub use rect::{
    ball_crossing, dist_to_geodesic, make_rectangle, maximal_rectangle, proj_rect, rect_geodesic, return_time, Arc,
    GoodRectangle,
};
pub use verify::{verify, verify_all, Lemma, LemmaReport, VerifierConfig};

/// Residual accepted for Busemann levels in membership predicates.
pub const LEVEL_TOL: f64 = 1e-10;
/// Default absolute tolerance of [`gx_distance`].
pub const GX_TOL: f64 = 1e-8;

/// A point of the circle at infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BoundaryPoint {
    theta: f64,
}

impl BoundaryPoint {
    pub fn new(theta: f64) -> Self {
        Self { theta: norm_angle(theta) }
    }

    /// Angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        self.theta
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

pub(crate) fn norm_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn mobius(a: Complex64, w: Complex64) -> Complex64 {
    (w + a) / (Complex64::new(1.0, 0.0) + a.conj() * w)
}

fn mobius_inv(a: Complex64, w: Complex64) -> Complex64 {
    (w - a) / (Complex64::new(1.0, 0.0) - a.conj() * w)
}

fn check_disk(p: Complex64) -> Result<f64> {
    let h = 1.0 - p.norm_sqr();
    if h > 0.0 && p.re.is_finite() && p.im.is_finite() {
        Ok(h)
    } else {
        Err(Error::OutsideDisk(format!("{p}")))
    }
}

/// Distance from p to q given h = 1 − |z|² for each, computed without cancellation.
fn dist_h(p: Complex64, hp: f64, q: Complex64, hq: f64) -> f64 {
    let s = (p - q).norm_sqr() / (hp * hq);
    2.0 * s.sqrt().asinh()
}

/// Log of |ξ − q|²/(1 − |q|²), the Busemann function at ξ normalized at the origin.
fn b_origin(q: Complex64, hq: f64, xi: Complex64) -> f64 {
    (xi - q).norm_sqr().ln() - hq.ln()
}

/// Hyperbolic distance in the disk.
pub fn hyp_dist(p: Complex64, q: Complex64) -> Result<f64> {
    let hp = check_disk(p)?;
    let hq = check_disk(q)?;
    Ok(dist_h(p, hp, q, hq))
}

/// A unit-speed geodesic with a marked basepoint.
#[derive(Debug, Clone, Copy)]
pub struct Geodesic {
    minus: BoundaryPoint,
    plus: BoundaryPoint,
    shift: f64,
    a: Complex64,
    rot: Complex64,
}

impl Geodesic {
    pub fn new(minus: BoundaryPoint, plus: BoundaryPoint, shift: f64) -> Result<Self> {
        let delta = norm_angle(plus.theta - minus.theta);
        if delta == 0.0 {
            return Err(Error::DegenerateEndpoints);
        }
        let beta = 0.5 * delta;
        let a = Complex64::from_polar((FRAC_PI_4 - 0.5 * beta).tan(), minus.theta + beta);
        let r = mobius_inv(a, plus.to_complex());
        let rot = r / r.norm();
        Ok(Self { minus, plus, shift, a, rot })
    }

    pub fn from_angles(minus: f64, plus: f64, shift: f64) -> Result<Self> {
        Self::new(BoundaryPoint::new(minus), BoundaryPoint::new(plus), shift)
    }

    pub fn minus(&self) -> BoundaryPoint {
        self.minus
    }

    pub fn plus(&self) -> BoundaryPoint {
        self.plus
    }

    /// Basepoint parameter: c(0) sits at signed distance `shift` past the apex.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Point of the geodesic closest to the origin.
    pub fn apex(&self) -> Complex64 {
        self.a
    }

    /// g_s c.
    pub fn flowed(&self, s: f64) -> Self {
        Self { shift: self.shift + s, ..*self }
    }

    /// The same geodesic run backwards, t ↦ c(−t).
    pub fn reversed(&self) -> Self {
        let mut g = Self::new(self.plus, self.minus, 0.0).expect("endpoints already distinct");
        g.shift = -self.shift;
        g
    }

    pub fn same_endpoints(&self, other: &Geodesic) -> bool {
        self.minus == other.minus && self.plus == other.plus
    }

    pub fn point(&self, t: f64) -> Complex64 {
        self.point_h(t).0
    }

    /// c(t) together with 1 − |c(t)|² computed from the parametrization.
    fn point_h(&self, t: f64) -> (Complex64, f64) {
        let u = 0.5 * (t + self.shift);
        let w = self.rot * u.tanh();
        let den = Complex64::new(1.0, 0.0) + self.a.conj() * w;
        let z = (w + self.a) / den;
        let sech = 1.0 / u.cosh();
        let h = (1.0 - self.a.norm_sqr()) * sech * sech / den.norm_sqr();
        (z, h)
    }

    /// B_c(q): Busemann function centered at c(+∞), zero at c(0).
    pub fn busemann(&self, q: Complex64) -> Result<f64> {
        let h = check_disk(q)?;
        Ok(self.busemann_h(q, h))
    }

    fn busemann_h(&self, q: Complex64, h: f64) -> f64 {
        let xi = self.plus.to_complex();
        b_origin(q, h, xi) - b_origin(self.a, 1.0 - self.a.norm_sqr(), xi) + self.shift
    }

    /// B_{−c}(q): centered at c(−∞), zero at c(0); equals t at c(t).
    pub fn busemann_back(&self, q: Complex64) -> Result<f64> {
        let h = check_disk(q)?;
        Ok(self.busemann_back_h(q, h))
    }

    fn busemann_back_h(&self, q: Complex64, h: f64) -> f64 {
        let xi = self.minus.to_complex();
        b_origin(q, h, xi) - b_origin(self.a, 1.0 - self.a.norm_sqr(), xi) - self.shift
    }

    /// B_c along another geodesic, eta(t).
    fn busemann_along(&self, eta: &Geodesic, t: f64) -> f64 {
        let (q, h) = eta.point_h(t);
        self.busemann_h(q, h)
    }

    /// Time at which a point of this geodesic is reached.
    fn time_of(&self, q: Complex64, h: f64) -> f64 {
        -self.busemann_h(q, h)
    }

    /// d(c(s), c'(s)).
    pub fn dist_at(&self, other: &Geodesic, s: f64) -> f64 {
        let (p, hp) = self.point_h(s);
        let (q, hq) = other.point_h(s);
        dist_h(p, hp, q, hq)
    }
}

/// The geodesic through c(−∞) and c'(+∞) based on the horocycle B_{c'} = 0.
pub fn bracket(c: &Geodesic, c2: &Geodesic) -> Result<Geodesic> {
    let d0 = Geodesic::new(c.minus, c2.plus, 0.0)?;
    let k = c2.busemann_along(&d0, 0.0);
    Ok(d0.flowed(k))
}

/// v(c, c'): the time with ⟨c, c'⟩ on the unstable horocycle of g_v c.
pub fn v_time(c: &Geodesic, c2: &Geodesic) -> Result<f64> {
    let d = bracket(c, c2)?;
    let (q, h) = d.point_h(0.0);
    Ok(c.busemann_back_h(q, h))
}

/// The geodesic from `minus` to c(+∞) with basepoint on the stable horocycle of c.
pub fn stable_partner(c: &Geodesic, minus: BoundaryPoint) -> Result<Geodesic> {
    bracket(&Geodesic::new(minus, c.plus, 0.0)?, c)
}

/// The geodesic from c(−∞) to `plus` with basepoint on the unstable horocycle of c.
pub fn unstable_partner(c: &Geodesic, plus: BoundaryPoint) -> Result<Geodesic> {
    let d0 = Geodesic::new(c.minus, plus, 0.0)?;
    let (q, h) = d0.point_h(0.0);
    Ok(d0.flowed(-c.busemann_back_h(q, h)))
}

pub fn is_strong_stable(c: &Geodesic, c2: &Geodesic, delta: f64) -> bool {
    c.plus == c2.plus && c.busemann_along(c2, 0.0).abs() <= LEVEL_TOL && gx_distance(c, c2, GX_TOL) < delta
}

pub fn is_strong_unstable(c: &Geodesic, c2: &Geodesic, delta: f64) -> bool {
    let (q, h) = c2.point_h(0.0);
    c.minus == c2.minus && c.busemann_back_h(q, h).abs() <= LEVEL_TOL && gx_distance(c, c2, GX_TOL) < delta
}

/// Smallest S with e^{−2S}(d0 + 2S + 1) ≤ tol, the mass of both tails of the
/// d_GX integrand under d(c(s), c'(s)) ≤ d0 + 2|s|.
pub fn gx_truncation(d0: f64, tol: f64) -> f64 {
    let mut s = 0.0f64;
    for _ in 0..100 {
        let next = 0.5 * ((d0 + 2.0 * s + 1.0) / tol).ln();
        if next <= s + 1e-12 {
            break;
        }
        s = next;
    }
    s.max(0.0)
}

/// c' seen from c in the upper half-plane, where c(t) = i e^t. Distances
/// between c(s) and c'(s) are then free of the cancellation that affects two
/// nearby points close to the unit circle.
struct PairFrame {
    lo: f64,
    hi: f64,
    /// Offset with c'(t) = z(t + offset).
    offset: f64,
}

impl PairFrame {
    fn new(c: &Geodesic, c2: &Geodesic) -> Self {
        let to_frame = |z: Complex64| mobius_inv(c.a, z) / c.rot;
        let scale = (-c.shift).exp();
        let boundary = |xi: BoundaryPoint| {
            let w = to_frame(xi.to_complex());
            let cot = if w.re >= 0.0 { (1.0 + w.re) / w.im } else { w.im / (1.0 - w.re) };
            -cot * scale
        };
        let (lo, hi) = (boundary(c2.minus), boundary(c2.plus));
        let w = to_frame(c2.a);
        let apex = Complex64::new(0.0, 1.0) * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w) * scale;
        let mut f = Self { lo, hi, offset: 0.0 };
        f.offset = f.param_of(apex) + c2.shift;
        f
    }

    fn param_of(&self, z: Complex64) -> f64 {
        if self.hi.is_infinite() {
            return z.im.ln();
        }
        if self.lo.is_infinite() {
            return -z.im.ln();
        }
        let rho = 0.5 * (self.hi - self.lo).abs();
        let m = 0.5 * (self.hi + self.lo);
        let u = (rho / z.im).max(1.0).acosh();
        if (z.re - m) * (self.hi - self.lo) >= 0.0 {
            u
        } else {
            -u
        }
    }

    fn point(&self, u: f64) -> (f64, f64) {
        if self.hi.is_infinite() {
            return (self.lo, u.exp());
        }
        if self.lo.is_infinite() {
            return (self.hi, (-u).exp());
        }
        let rho = 0.5 * (self.hi - self.lo).abs();
        let sigma = (self.hi - self.lo).signum();
        let y = rho / u.cosh();
        if u < 0.0 {
            (self.lo + sigma * rho * 2.0 / (1.0 + (-2.0 * u).exp()), y)
        } else {
            (self.hi - sigma * rho * 2.0 / (1.0 + (2.0 * u).exp()), y)
        }
    }

    /// d(c(s), c'(s)).
    fn dist(&self, s: f64) -> f64 {
        let (x, y) = self.point(s + self.offset);
        let e = s.exp();
        let q = (x * x + (y - e) * (y - e)) / (4.0 * y * e);
        2.0 * q.sqrt().asinh()
    }
}

/// ∫ d(c(s), c'(s)) e^{−2|s|} ds to within `tol` (truncated to ±S plus certified tail).
pub fn gx_distance(c: &Geodesic, c2: &Geodesic, tol: f64) -> f64 {
    if c.same_endpoints(c2) {
        return (c.shift - c2.shift).abs();
    }
    let frame = PairFrame::new(c, c2);
    let d0 = frame.dist(0.0);
    let s_max = gx_truncation(d0, 0.5 * tol);
    let f = |s: f64| frame.dist(s) * (-2.0 * s.abs()).exp();
    simpson(&f, -s_max, 0.0, 0.25 * tol) + simpson(&f, 0.0, s_max, 0.25 * tol)
}

/// d_GX with a tolerance relative to the pair's local separation.
pub fn gx_distance_rel(c: &Geodesic, c2: &Geodesic, rel: f64) -> f64 {
    let frame = PairFrame::new(c, c2);
    let scale = [-1.0, 0.0, 1.0].iter().map(|&s| frame.dist(s)).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    gx_distance(c, c2, rel * scale.min(1.0))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let settled = delta.abs() <= 15.0 * tol || delta.abs() <= 1e-12 * (left.abs() + right.abs());
    if depth >= 30 || (depth >= 4 && settled) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Root of f on [lo, hi] given a sign change, bisected to machine resolution.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::BracketFailure(format!("f({lo}) = {flo}, f({hi}) = {fhi}")));
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Geodesic {
        Geodesic::from_angles(3.5, 0.7, 0.4).unwrap()
    }

    #[test]
    fn diameter_point_radius() {
        let c = Geodesic::from_angles(std::f64::consts::PI, 0.0, 0.0).unwrap();
        assert!((c.point(1.0).norm() - 0.5f64.tanh()).abs() < 1e-14);
        assert!((c.point(1.0).norm() - 0.46212).abs() < 1e-5);
        assert!(c.point(0.0).norm() < 1e-15);
    }

    #[test]
    fn unit_speed_and_busemann_ray() {
        let c = sample();
        assert!((hyp_dist(c.point(2.0), c.point(5.0)).unwrap() - 3.0).abs() < 1e-10);
        assert!((c.busemann(c.point(2.0)).unwrap() + 2.0).abs() < 1e-10);
        assert!(c.busemann(c.point(0.0)).unwrap().abs() < 1e-12);
        assert!((c.busemann_back(c.point(-1.5)).unwrap() + 1.5).abs() < 1e-10);
        let r = 0.5f64.tanh();
        assert!((hyp_dist(Complex64::new(0.0, 0.0), Complex64::new(r, 0.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!(hyp_dist(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_endpoints() {
        assert_eq!(Geodesic::from_angles(1.0, 1.0, 0.0).unwrap_err(), Error::DegenerateEndpoints);
        assert!(Geodesic::from_angles(1.0, 1.0 + TAU, 0.0).is_err());
    }

    #[test]
    fn frame_distance_matches_disk() {
        let c = sample();
        for other in [
            Geodesic::from_angles(3.4, 0.9, -0.3).unwrap(),
            Geodesic::from_angles(0.7, 3.5, 0.1).unwrap(),
            stable_partner(&c, BoundaryPoint::new(3.3)).unwrap(),
            unstable_partner(&c, BoundaryPoint::new(1.0)).unwrap(),
            c.flowed(0.25),
        ] {
            let f = PairFrame::new(&c, &other);
            for s in [-2.0, -0.5, 0.0, 0.3, 1.7] {
                assert!((f.dist(s) - c.dist_at(&other, s)).abs() < 1e-9, "{s}");
            }
        }
    }

    #[test]
    fn gx_flow_offset() {
        let c = sample();
        for s in [0.1, 0.3, 1.0] {
            assert!((gx_distance(&c, &c.flowed(s), GX_TOL) - s).abs() < 1e-6);
            // The same integral without the shared-endpoint shortcut.
            let twin = Geodesic::from_angles(c.minus().angle(), c.plus().angle() + 1e-15, c.shift() + s).unwrap();
            assert!((gx_distance(&c, &twin, GX_TOL) - s).abs() < 1e-6);
        }
        assert_eq!(gx_distance(&c, &c, GX_TOL), 0.0);
    }

    #[test]
    fn bracket_basics() {
        let c = sample();
        let d = bracket(&c, &c).unwrap();
        assert!(d.same_endpoints(&c));
        assert!((d.shift() - c.shift()).abs() < 1e-10);
        assert!(v_time(&c, &c).unwrap().abs() < 1e-10);
        let c2 = Geodesic::from_angles(3.6, 0.75, -0.2).unwrap();
        let b = bracket(&c, &c2).unwrap();
        assert!(c2.busemann(b.point(0.0)).unwrap().abs() < 1e-10);
        assert!(bracket(&c, &Geodesic::from_angles(0.1, 3.5, 0.0).unwrap()).is_err());
    }

    #[test]
    fn strong_stable_membership() {
        let c = sample();
        assert!(is_strong_stable(&c, &c, 1e-3));
        assert!(!is_strong_stable(&c, &c.flowed(0.2), 10.0));
        let s = stable_partner(&c, BoundaryPoint::new(3.52)).unwrap();
        assert!(is_strong_stable(&c, &s, 1.0));
        assert!(v_time(&c, &s).unwrap().abs() < 1e-10);
        let u = unstable_partner(&c, BoundaryPoint::new(0.72)).unwrap();
        assert!(is_strong_unstable(&c, &u, 1.0));
        assert!(!is_strong_unstable(&c, &s, 1.0));
    }

    #[test]
    fn reversed_runs_backwards() {
        let c = sample();
        let r = c.reversed();
        assert!((r.point(0.7) - c.point(-0.7)).norm() < 1e-12);
    }
}
