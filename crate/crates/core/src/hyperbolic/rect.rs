//! Good geometric rectangles: geodesics with endpoints in two boundary arcs,
//! based on the stable horocycle of a center geodesic.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use num_complex::Complex64;

use super::{bisect, dist_h, mobius, mobius_inv, norm_angle, BoundaryPoint, Geodesic};
use crate::error::{Error, Result};

const ANGLE_SLACK: f64 = 1e-14;

/// Closed arc of the boundary, from `start` counterclockwise through `len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Self {
        Self { start: norm_angle(start), len }
    }

    pub fn centered(center: BoundaryPoint, half: f64) -> Self {
        Self::new(center.angle() - half, 2.0 * half)
    }

    /// Membership up to angle rounding (1e−14).
    pub fn contains(&self, p: BoundaryPoint) -> bool {
        let off = norm_angle(p.angle() - self.start);
        off <= self.len + ANGLE_SLACK || off >= TAU - ANGLE_SLACK
    }

    /// The point at fraction `f` ∈ [0, 1] along the arc.
    pub fn at(&self, f: f64) -> BoundaryPoint {
        BoundaryPoint::new(self.start + f * self.len)
    }

    pub fn mid(&self) -> BoundaryPoint {
        self.at(0.5)
    }

    pub fn disjoint(&self, other: &Arc) -> bool {
        !self.contains(other.at(0.0)) && !other.contains(self.at(0.0))
    }

    pub fn intersect(&self, other: &Arc) -> Option<Arc> {
        if self.disjoint(other) {
            return None;
        }
        let (a, b) = if self.contains(other.at(0.0)) { (self, other) } else { (other, self) };
        let off = norm_angle(b.start - a.start);
        Some(Arc::new(b.start, (a.len - off).min(b.len)))
    }
}

/// Distance from p to the geodesic eta and the time of the foot point.
pub fn dist_to_geodesic(eta: &Geodesic, p: Complex64) -> Result<(f64, f64)> {
    super::check_disk(p)?;
    let em = mobius_inv(p, eta.minus().to_complex());
    let ep = mobius_inv(p, eta.plus().to_complex());
    let beta = 0.5 * norm_angle(ep.arg() - em.arg());
    let r = (FRAC_PI_4 - 0.5 * beta).tan();
    let apex = Complex64::from_polar(r, em.arg() + beta);
    let foot = mobius(p, apex);
    let hf = (1.0 - p.norm_sqr()) * (1.0 - r * r) / (Complex64::new(1.0, 0.0) + p.conj() * apex).norm_sqr();
    Ok((2.0 * r.abs().atanh(), eta.time_of(foot, hf)))
}

/// The open time interval during which eta is inside B(p, radius), if any.
pub fn ball_crossing(eta: &Geodesic, p: Complex64, radius: f64) -> Result<Option<(f64, f64)>> {
    let (h, t) = dist_to_geodesic(eta, p)?;
    if h >= radius {
        return Ok(None);
    }
    let w = (radius.cosh() / h.cosh()).acosh();
    Ok(Some((t - w, t + w)))
}

/// R(c, τ; U⁻, U⁺).
#[derive(Debug, Clone, Copy)]
pub struct GoodRectangle {
    center: Geodesic,
    tau: f64,
    minus_arc: Arc,
    plus_arc: Arc,
    b1: Complex64,
    b2: Complex64,
}

impl GoodRectangle {
    pub fn center(&self) -> &Geodesic {
        &self.center
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn minus_arc(&self) -> Arc {
        self.minus_arc
    }

    pub fn plus_arc(&self) -> Arc {
        self.plus_arc
    }

    /// Centers of the unit balls B₁ = B(c(−τ), 1) and B₂ = B(c(τ), 1).
    pub fn balls(&self) -> (Complex64, Complex64) {
        (self.b1, self.b2)
    }

    pub fn admits(&self, eta: &Geodesic) -> bool {
        self.minus_arc.contains(eta.minus()) && self.plus_arc.contains(eta.plus())
    }

    /// Same center and τ, other arcs (validated).
    pub fn with_arcs(&self, minus: Arc, plus: Arc, grid: usize) -> Result<Self> {
        make_rectangle(&self.center, self.tau, minus, plus, grid)
    }
}

fn in_partial(b1: Complex64, b2: Complex64, m: BoundaryPoint, p: BoundaryPoint) -> Result<bool> {
    let eta = Geodesic::new(m, p, 0.0)?;
    Ok(ball_crossing(&eta, b1, 1.0)?.is_some() && ball_crossing(&eta, b2, 1.0)?.is_some())
}

fn grid_check(c: &Geodesic, tau: f64, um: Arc, up: Arc, grid: usize) -> Result<Option<String>> {
    let (b1, b2) = (c.point(-tau), c.point(tau));
    let n = grid.max(2);
    for i in 0..n {
        let m = um.at(i as f64 / (n - 1) as f64);
        for j in 0..n {
            let p = up.at(j as f64 / (n - 1) as f64);
            if !in_partial(b1, b2, m, p)? {
                return Ok(Some(format!("({}, {}) misses B1 or B2", m.angle(), p.angle())));
            }
        }
    }
    Ok(None)
}

/// Validates U⁻ × U⁺ ⊆ ∂(c, τ) on a grid×grid sample of the arcs.
pub fn make_rectangle(c: &Geodesic, tau: f64, minus: Arc, plus: Arc, grid: usize) -> Result<GoodRectangle> {
    if !(tau >= 10.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} is below 10")));
    }
    if !(minus.len >= 0.0 && plus.len >= 0.0 && minus.len < FRAC_PI_2 && plus.len < FRAC_PI_2) {
        return Err(Error::InvalidArgument("arc lengths must lie in [0, π/2)".into()));
    }
    if !minus.disjoint(&plus) {
        return Err(Error::InvalidArgument("arcs U- and U+ intersect".into()));
    }
    if let Some(msg) = grid_check(c, tau, minus, plus, grid)? {
        return Err(Error::NotInPartial(msg));
    }
    Ok(GoodRectangle { center: *c, tau, minus_arc: minus, plus_arc: plus, b1: c.point(-tau), b2: c.point(tau) })
}

/// The symmetric rectangle with the largest δ, found by bisection, such that
/// arcs of half-width δ around c(∓∞) pass the grid check.
pub fn maximal_rectangle(c: &Geodesic, tau: f64, grid: usize) -> Result<GoodRectangle> {
    let ok = |d: f64| -> Result<bool> {
        let (um, up) = (Arc::centered(c.minus(), d), Arc::centered(c.plus(), d));
        Ok(um.disjoint(&up) && grid_check(c, tau, um, up, grid)?.is_none())
    };
    let (mut lo, mut hi) = (0.0, FRAC_PI_4);
    if ok(hi)? {
        lo = hi;
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    make_rectangle(c, tau, Arc::centered(c.minus(), lo), Arc::centered(c.plus(), lo), grid)
}

/// The geodesic of R with the given endpoints: B_c(η(0)) = 0 between the ball crossings.
pub fn rect_geodesic(r: &GoodRectangle, minus: BoundaryPoint, plus: BoundaryPoint) -> Result<Geodesic> {
    let eta = Geodesic::new(minus, plus, 0.0)?;
    if !r.admits(&eta) {
        return Err(Error::NotInPartial(format!("endpoints ({}, {}) outside the arcs", minus.angle(), plus.angle())));
    }
    let i1 = ball_crossing(&eta, r.b1, 1.0)?;
    let i2 = ball_crossing(&eta, r.b2, 1.0)?;
    let (Some(i1), Some(i2)) = (i1, i2) else {
        return Err(Error::NotInPartial(format!("({}, {}) misses B1 or B2", minus.angle(), plus.angle())));
    };
    let c = r.center;
    let t = bisect(|t| c.busemann_along(&eta, t), 0.5 * (i1.0 + i1.1), 0.5 * (i2.0 + i2.1))?;
    if !(i1.1 <= t && t <= i2.0) {
        return Err(Error::NotInPartial(format!("ball crossings ({i1:?}, {i2:?}) do not straddle {t}")));
    }
    Ok(eta.flowed(t))
}

/// The time t ∈ [−α, α] with g_t x ∈ R.
pub(crate) fn flow_box_time(r: &GoodRectangle, x: &Geodesic, alpha: f64) -> Result<f64> {
    if !r.admits(x) {
        return Err(Error::NotInFlowBox("endpoints outside the arcs".into()));
    }
    let c = r.center;
    let f = |t: f64| c.busemann_along(x, t);
    if !(f(-alpha) >= 0.0 && f(alpha) <= 0.0) {
        return Err(Error::NotInFlowBox(format!("no crossing of the horocycle within ±{alpha}")));
    }
    bisect(f, -alpha, alpha)
}

/// Proj_R(x) for x = g_t η, η ∈ R, |t| < α.
pub fn proj_rect(r: &GoodRectangle, x: &Geodesic, alpha: f64) -> Result<Geodesic> {
    Ok(x.flowed(flow_box_time(r, x, alpha)?))
}

/// The t ∈ [0, α] with g_t η ∈ R'.
pub fn return_time(r2: &GoodRectangle, eta: &Geodesic, alpha: f64) -> Result<f64> {
    if !r2.admits(eta) {
        return Err(Error::NoReturn("endpoints outside the target arcs".into()));
    }
    let c = r2.center;
    let f = |t: f64| c.busemann_along(eta, t);
    let f0 = f(0.0);
    if (-super::LEVEL_TOL..=0.0).contains(&f0) {
        return Ok(0.0);
    }
    if !(f0 >= 0.0 && f(alpha) <= 0.0) {
        return Err(Error::NoReturn(format!("B_c' does not change sign on [0, {alpha}]")));
    }
    bisect(f, 0.0, alpha)
}

/// d(c(t), η(t)).
pub(crate) fn dist_pair(c: &Geodesic, eta: &Geodesic, t: f64) -> f64 {
    let (p, hp) = c.point_h(t);
    let (q, hq) = eta.point_h(t);
    dist_h(p, hp, q, hq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{gx_distance, hyp_dist, GX_TOL};

    fn center() -> Geodesic {
        Geodesic::from_angles(3.3, 0.4, 0.2).unwrap()
    }

    #[test]
    fn arc_geometry() {
        let a = Arc::new(6.0, 0.5);
        assert!(a.contains(BoundaryPoint::new(0.1)));
        assert!(!a.contains(BoundaryPoint::new(0.3)));
        let b = Arc::new(0.0, 1.0);
        let i = a.intersect(&b).unwrap();
        assert!((i.start - 0.0).abs() < 1e-15 && (i.len - (6.5 - std::f64::consts::TAU)).abs() < 1e-12);
        assert!(Arc::new(1.0, 0.1).disjoint(&Arc::new(2.0, 0.1)));
    }

    #[test]
    fn ball_crossing_width() {
        let c = Geodesic::from_angles(std::f64::consts::PI, 0.0, 0.0).unwrap();
        let (lo, hi) = ball_crossing(&c, c.point(3.0), 1.0).unwrap().unwrap();
        assert!((lo - 2.0).abs() < 1e-9 && (hi - 4.0).abs() < 1e-9);
        let (h, t) = dist_to_geodesic(&c, Complex64::new(0.0, 0.3)).unwrap();
        assert!((h - hyp_dist(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.3)).unwrap()).abs() < 1e-12);
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn rectangles() {
        let c = center();
        let r = maximal_rectangle(&c, 10.0, 9).unwrap();
        let d = 0.5 * r.plus_arc().len;
        assert!(d > 1e-6 && d < 1e-2, "{d}");
        let eta = rect_geodesic(&r, c.minus(), c.plus()).unwrap();
        assert!(hyp_dist(eta.point(0.0), c.point(0.0)).unwrap() < 1e-9);
        let same = Arc::centered(c.plus(), d);
        assert!(matches!(make_rectangle(&c, 10.0, same, same, 9), Err(Error::InvalidArgument(_))));
        let wide = Arc::centered(c.plus(), 50.0 * d);
        assert!(matches!(make_rectangle(&c, 10.0, r.minus_arc(), wide, 9), Err(Error::NotInPartial(_))));
        let tiny = make_rectangle(&c, 10.0, Arc::centered(c.minus(), 1e-6), Arc::centered(c.plus(), 1e-6), 5);
        assert!(tiny.is_ok());
    }

    #[test]
    fn projection_and_return() {
        let c = center();
        let r = maximal_rectangle(&c, 10.0, 9).unwrap();
        let eta = rect_geodesic(&r, r.minus_arc().at(0.2), r.plus_arc().at(0.9)).unwrap();
        let p = proj_rect(&r, &eta.flowed(0.1), 0.5).unwrap();
        assert!(gx_distance(&p, &eta, GX_TOL) < 1e-8);
        let p0 = proj_rect(&r, &eta, 0.5).unwrap();
        assert!((p0.shift() - eta.shift()).abs() < 1e-12);

        let d = 0.25 * r.plus_arc().len;
        let (um, up) = (Arc::centered(c.minus(), d), Arc::centered(c.plus(), d));
        let r2 = make_rectangle(&c.flowed(0.05), 10.0, um, up, 9).unwrap();
        assert!((return_time(&r2, &c, 0.5).unwrap() - 0.05).abs() < 1e-10);
        assert!(return_time(&r, &eta, 0.5).unwrap().abs() < 1e-10);
        assert!(matches!(return_time(&r2, &c.flowed(1.0), 0.5), Err(Error::NoReturn(_))));
    }
}
