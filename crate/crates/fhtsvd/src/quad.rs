//! Quadrature engine for the cycle and Cauchy integrals.
//!
//! Every integrand in this crate lives on a real segment whose endpoints are
//! branch points of the radical, so a bare Gauss rule converges slowly.  The
//! engine applies the substitution `zeta = m + r cos(theta)` on finite
//! segments (the Jacobian absorbs both inverse-square-root endpoint factors)
//! and `zeta = c + 1/t` followed by the same cosine substitution on the two
//! unbounded rays.  Nodes carry exact distances to the segment endpoints so
//! that callers can evaluate `R` and `ln w` without cancellation next to a
//! branch point.

/// Gauss-Legendre rule on [-1, 1].
///
/// Nodes by Newton iteration on the Legendre polynomial with the Tricomi
/// initial guess; good to machine precision for any practical order.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "quadrature order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n {
            // initial guess for the k-th root (descending order)
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        nodes.reverse();
        weights.reverse();
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes on a finite segment `[lo, hi]` after the cosine substitution.
///
/// `dist_lo[i] = z[i] - lo` and `dist_hi[i] = hi - z[i]` are computed from the
/// substitution angle, so they stay accurate when a node lands within
/// rounding distance of an endpoint.
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub lo: f64,
    pub hi: f64,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub dist_lo: Vec<f64>,
    pub dist_hi: Vec<f64>,
}

impl SegmentRule {
    pub fn new(gl: &GaussLegendre, lo: f64, hi: f64) -> Self {
        let m = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let n = gl.nodes.len();
        let mut z = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        let mut dist_lo = Vec::with_capacity(n);
        let mut dist_hi = Vec::with_capacity(n);
        for i in 0..n {
            let theta = 0.5 * std::f64::consts::PI * (gl.nodes[i] + 1.0);
            let wt = 0.5 * std::f64::consts::PI * gl.weights[i];
            z.push(m - r * theta.cos());
            w.push(wt * r * theta.sin());
            let s = (0.5 * theta).sin();
            let c = (0.5 * theta).cos();
            dist_lo.push(2.0 * r * s * s);
            dist_hi.push(2.0 * r * c * c);
        }
        SegmentRule {
            lo,
            hi,
            z,
            w,
            dist_lo,
            dist_hi,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Which infinity an unbounded ray runs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayDirection {
    TowardMinusInf,
    TowardPlusInf,
}

/// Nodes on a ray from a finite branch point to infinity.
///
/// The map is `zeta = c + 1/t` with `c` strictly inside the interval hull, so
/// `t = 0` is the point at infinity; a cosine substitution in `t` then removes
/// the inverse-square-root factor at the finite end.  `dist_end[i]` is the
/// exact `|z[i] - endpoint|`.
#[derive(Debug, Clone)]
pub struct RayRule {
    pub endpoint: f64,
    pub direction: RayDirection,
    pub center: f64,
    pub z: Vec<f64>,
    /// weights for integration from the endpoint toward infinity
    pub w: Vec<f64>,
    pub dist_end: Vec<f64>,
}

impl RayRule {
    pub fn new(gl: &GaussLegendre, endpoint: f64, center: f64, direction: RayDirection) -> Self {
        let t1 = 1.0 / (endpoint - center);
        let n = gl.nodes.len();
        let mut z = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        let mut dist_end = Vec::with_capacity(n);
        for i in 0..n {
            let theta = 0.5 * std::f64::consts::PI * (gl.nodes[i] + 1.0);
            let wt = 0.5 * std::f64::consts::PI * gl.weights[i];
            // t runs from t1 (endpoint) at theta = pi to 0 (infinity) at theta = 0
            let t = 0.5 * t1 * (1.0 - theta.cos());
            let dt = 0.5 * t1.abs() * theta.sin() * wt;
            let zi = center + 1.0 / t;
            // |z - endpoint| = |t1 - t| / |t t1|;  t1 - t = t1 cos^2(theta/2)
            let c = (0.5 * theta).cos();
            let d = (t1 * c * c / (t * t1)).abs();
            z.push(zi);
            w.push(dt / (t * t));
            dist_end.push(d);
        }
        RayRule {
            endpoint,
            direction,
            center,
            z,
            w,
            dist_end,
        }
    }
}

/// Nodes on a partial segment `[lo, x]` whose left end `lo` is a branch point.
///
/// Substitution `zeta = lo + (x - lo) t^2` removes the inverse square root at
/// `lo`; the right end is an ordinary interior point.
#[derive(Debug, Clone)]
pub struct PartialRule {
    pub lo: f64,
    pub x: f64,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub dist_lo: Vec<f64>,
}

impl PartialRule {
    pub fn new(gl: &GaussLegendre, lo: f64, x: f64) -> Self {
        let len = x - lo;
        let n = gl.nodes.len();
        let mut z = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        let mut dist_lo = Vec::with_capacity(n);
        for i in 0..n {
            let t = 0.5 * (gl.nodes[i] + 1.0);
            let wt = 0.5 * gl.weights[i];
            z.push(lo + len * t * t);
            w.push(2.0 * len * t * wt);
            dist_lo.push(len * t * t);
        }
        PartialRule { lo, x, z, w, dist_lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is the highest exact degree for an 8-point rule
        let val: f64 = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn cosine_substitution_handles_chebyshev_weight() {
        // int_{-1}^{1} dz / sqrt(1 - z^2) = pi; the integrand is 1/sqrt((z+1)(1-z))
        let gl = GaussLegendre::new(64);
        let seg = SegmentRule::new(&gl, -1.0, 1.0);
        let mut total = 0.0;
        for i in 0..seg.len() {
            total += seg.w[i] / (seg.dist_lo[i] * seg.dist_hi[i]).sqrt();
        }
        assert!(
            (total - std::f64::consts::PI).abs() < 1e-12,
            "got {total}"
        );
    }

    #[test]
    fn ray_rule_integrates_decaying_tail() {
        // int_2^inf dz / (z^2 sqrt(z - 2)) = pi / (4 sqrt(2)), by z = 2 + u^2
        let gl = GaussLegendre::new(96);
        let ray = RayRule::new(&gl, 2.0, 0.0, RayDirection::TowardPlusInf);
        let mut total = 0.0;
        for i in 0..ray.z.len() {
            total += ray.w[i] / (ray.z[i] * ray.z[i] * ray.dist_end[i].sqrt());
        }
        let exact = std::f64::consts::PI / (4.0 * 2.0_f64.sqrt());
        assert!((total - exact).abs() < 1e-12, "got {total}, want {exact}");
    }

    #[test]
    fn partial_rule_matches_closed_form() {
        // int_0^1 dz/sqrt(z) = 2
        let gl = GaussLegendre::new(32);
        let p = PartialRule::new(&gl, 0.0, 1.0);
        let total: f64 = (0..p.z.len()).map(|i| p.w[i] / p.dist_lo[i].sqrt()).sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
