//! Interval geometry, the hyperelliptic radical and the period matrix.
//!
//! The operator lives on `2g+2` ordered real endpoints `a_1 < ... < a_{2g+2}`.
//! Segments `[a_{2j-1}, a_{2j}]` are the main arcs (branch cuts); the segments
//! between them are the gaps.  The radical `R(z)^2 = prod (z - a_j)` is fixed
//! by `R ~ z^{g+1}` at infinity.  All cycle integrals reduce to segment or ray
//! integrals with the substitutions from [`crate::quad`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, PartialRule, RayDirection, RayRule, SegmentRule};

/// Shore tag for boundary values on a branch cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shore {
    Above,
    Below,
}

/// Sheet of the two-sheeted cover; `Plus` carries `R`, `Minus` carries `-R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn signum(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }
}

/// A point on the surface: a complex coordinate plus a sheet choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub z: Complex64,
    pub sheet: Sheet,
}

impl SurfacePoint {
    pub fn new(z: Complex64, sheet: Sheet) -> Self {
        SurfacePoint { z, sheet }
    }

    pub fn real(x: f64, sheet: Sheet) -> Self {
        SurfacePoint {
            z: Complex64::new(x, 0.0),
            sheet,
        }
    }
}

/// The ordered endpoints and the derived arc decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalSystem {
    endpoints: Vec<f64>,
    genus: usize,
}

impl IntervalSystem {
    /// Validates and stores `2g+2` strictly increasing endpoints with `g >= 2`.
    pub fn new(endpoints: Vec<f64>) -> Result<Self> {
        let n = endpoints.len();
        if n < 6 || n % 2 != 0 {
            return Err(Error::InvalidEndpoints(format!(
                "need an even number of endpoints, at least 6; got {n}"
            )));
        }
        if endpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidEndpoints("endpoints must be finite".into()));
        }
        if endpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidEndpoints(
                "endpoints must be strictly increasing".into(),
            ));
        }
        Ok(IntervalSystem {
            genus: n / 2 - 1,
            endpoints,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    /// Endpoint `a_j`, 1-based as in the arc labelling.
    pub fn a(&self, j: usize) -> f64 {
        self.endpoints[j - 1]
    }

    /// Main arc `gamma_j = [a_{2j-1}, a_{2j}]`, `j = 1..=g+1`.
    pub fn main_arc(&self, j: usize) -> (f64, f64) {
        (self.a(2 * j - 1), self.a(2 * j))
    }

    pub fn main_arcs(&self) -> Vec<(f64, f64)> {
        (1..=self.genus + 1).map(|j| self.main_arc(j)).collect()
    }

    /// Finite gap `c_j`; `j = 1..=g-1` are the inner gaps `[a_{2j}, a_{2j+1}]`
    /// and `j = 0` is `[a_{2g}, a_{2g+1}]`.
    pub fn gap(&self, j: usize) -> (f64, f64) {
        if j == 0 {
            (self.a(2 * self.genus), self.a(2 * self.genus + 1))
        } else {
            (self.a(2 * j), self.a(2 * j + 1))
        }
    }

    /// Finite gaps in the column order used by the period matrices:
    /// `(c_1, ..., c_{g-1}, c_0)`.
    pub fn gaps_paper_order(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = (1..self.genus).map(|j| self.gap(j)).collect();
        v.push(self.gap(0));
        v
    }

    /// Arcs making up the interior support `I_i = gamma_2 u ... u gamma_g`.
    pub fn inner_arcs(&self) -> Vec<(f64, f64)> {
        (2..=self.genus).map(|j| self.main_arc(j)).collect()
    }

    /// Arcs making up the exterior support `I_e = gamma_1 u gamma_{g+1}`.
    pub fn exterior_arcs(&self) -> Vec<(f64, f64)> {
        vec![self.main_arc(1), self.main_arc(self.genus + 1)]
    }

    pub fn is_on_main_arc(&self, x: f64) -> bool {
        self.main_arcs().iter().any(|&(lo, hi)| lo < x && x < hi)
    }

    /// Number of endpoints strictly to the right of `x`.
    fn count_right(&self, x: f64) -> usize {
        self.endpoints.iter().filter(|&&a| a > x).count()
    }

    /// The radical with the branch fixed by `R(z) ~ z^{g+1}` at infinity.
    ///
    /// Principal logarithms of the individual factors realize exactly this
    /// branch: the product is analytic off the main arcs and positive for
    /// real `z > a_{2g+2}`.
    pub fn radical(&self, p: SurfacePoint, shore: Option<Shore>) -> Result<Complex64> {
        let z = p.z;
        if z.im == 0.0 && self.is_on_main_arc(z.re) {
            let shore = shore.ok_or(Error::MissingShore)?;
            let r = self.radical_boundary(z.re, shore);
            return Ok(p.sheet.signum() * r);
        }
        if z.im == 0.0 {
            if self.endpoints.iter().any(|&a| a == z.re) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            return Ok(p.sheet.signum() * Complex64::new(self.radical_real_axis(z.re), 0.0));
        }
        let mut s = Complex64::new(0.0, 0.0);
        for &a in &self.endpoints {
            s += (z - a).ln();
        }
        Ok(p.sheet.signum() * (0.5 * s).exp())
    }

    /// `R` on the real axis off the cuts; real with sign `(-1)^{N/2}` where
    /// `N` counts endpoints to the right.
    pub fn radical_real_axis(&self, x: f64) -> f64 {
        let mut prod = 1.0f64;
        for &a in &self.endpoints {
            prod *= (x - a).abs();
        }
        let n = self.count_right(x);
        debug_assert!(n % 2 == 0, "x must lie off the cuts");
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * prod.sqrt()
    }

    /// Boundary value `R_+` or `R_-` on a main arc; the argument of `R_+` is
    /// `N pi / 2` with `N` the number of endpoints to the right.
    pub fn radical_boundary(&self, x: f64, shore: Shore) -> Complex64 {
        let mut prod = 1.0f64;
        for &a in &self.endpoints {
            prod *= (x - a).abs();
        }
        let n = self.count_right(x);
        let phase = match shore {
            Shore::Above => 0.5 * std::f64::consts::PI * n as f64,
            Shore::Below => -0.5 * std::f64::consts::PI * n as f64,
        };
        Complex64::from_polar(prod.sqrt(), phase)
    }

    /// `R` at segment nodes, boundary value from above, using the rule's
    /// stable endpoint distances.
    pub fn radical_plus_nodes(&self, seg: &SegmentRule) -> Vec<Complex64> {
        let n = seg.len();
        let mut out = vec![Complex64::new(1.0, 0.0); n];
        for (j, &a) in self.endpoints.iter().enumerate() {
            let _ = j;
            for i in 0..n {
                let d = if a == seg.lo {
                    seg.dist_lo[i]
                } else if a == seg.hi {
                    -seg.dist_hi[i]
                } else {
                    seg.z[i] - a
                };
                let f = if d >= 0.0 {
                    Complex64::new(d.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, (-d).sqrt())
                };
                out[i] *= f;
            }
        }
        out
    }

    /// `R` at ray nodes (real there), with the stable distance to the finite
    /// endpoint.
    pub fn radical_ray_nodes(&self, ray: &RayRule) -> Vec<f64> {
        let n = ray.z.len();
        let mut out = vec![1.0f64; n];
        for &a in &self.endpoints {
            for i in 0..n {
                let d = if a == ray.endpoint {
                    ray.dist_end[i]
                } else {
                    (ray.z[i] - a).abs()
                };
                out[i] *= d;
            }
        }
        let n_right = match ray.direction {
            RayDirection::TowardMinusInf => self.endpoints.len(),
            RayDirection::TowardPlusInf => 0,
        };
        let sign = if (n_right / 2) % 2 == 0 { 1.0 } else { -1.0 };
        out.iter_mut().for_each(|v| *v = sign * v.sqrt());
        out
    }

    /// `R_+` at partial-rule nodes, where `rule.lo` is a branch point.
    pub fn radical_plus_partial_nodes(&self, rule: &PartialRule) -> Vec<Complex64> {
        let n = rule.z.len();
        let mut out = vec![Complex64::new(1.0, 0.0); n];
        for &a in &self.endpoints {
            for i in 0..n {
                let d = if a == rule.lo {
                    rule.dist_lo[i]
                } else {
                    rule.z[i] - a
                };
                let f = if d >= 0.0 {
                    Complex64::new(d.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, (-d).sqrt())
                };
                out[i] *= f;
            }
        }
        out
    }

    /// The inversion weight `w(z) = sqrt((a_{2g+2} - z)(z - a_1))`, positive
    /// on the open interval, branch cut on the two outer rays.
    pub fn weight_w(&self, z: Complex64) -> Complex64 {
        let a1 = self.endpoints[0];
        let a_last = *self.endpoints.last().unwrap();
        (0.5 * ((Complex64::new(a_last, 0.0) - z).ln() + (z - a1).ln())).exp()
    }

    /// `w` on the open interval `(a_1, a_{2g+2})`.
    pub fn weight_w_real(&self, x: f64) -> f64 {
        let a1 = self.endpoints[0];
        let a_last = *self.endpoints.last().unwrap();
        ((a_last - x) * (x - a1)).sqrt()
    }

    /// `ln w` at segment nodes with stable distances at the two outer
    /// endpoints.
    pub fn ln_w_nodes(&self, seg: &SegmentRule) -> Vec<f64> {
        let a1 = self.endpoints[0];
        let a_last = *self.endpoints.last().unwrap();
        (0..seg.len())
            .map(|i| {
                let d1 = if seg.lo == a1 {
                    seg.dist_lo[i]
                } else {
                    seg.z[i] - a1
                };
                let d2 = if seg.hi == a_last {
                    seg.dist_hi[i]
                } else {
                    a_last - seg.z[i]
                };
                0.5 * (d1.ln() + d2.ln())
            })
            .collect()
    }
}

/// Periods, differentials and the matrices `A`, `T`, `L`, `tau`.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub sys: IntervalSystem,
    /// quadrature order the data converged at
    pub order: usize,
    /// A-period moment matrix, row `j` = cycle `A_j`, column `i` = power `i-1`
    pub a_mat: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// row `j` holds the coefficients of `P_j` (constant term first)
    pub p_coeffs: DMatrix<f64>,
    pub tau: DMatrix<Complex64>,
    /// `tau_{11}` from the collapsed `B_1` loop
    pub tau11: Complex64,
    /// `tau_{11}` from the independent exterior-moment formula
    pub tau11_direct: Complex64,
    /// gap moment matrix, rows = powers, columns = `(c_1, ..., c_{g-1}, c_0)`
    pub t_mat: DMatrix<f64>,
    pub l_mat: DMatrix<i64>,
    /// cached node tables at the converged order
    pub(crate) arcs: Vec<SegmentRule>,
    pub(crate) gaps: Vec<SegmentRule>,
    pub(crate) ray_left: RayRule,
    pub(crate) ray_right: RayRule,
    pub(crate) gl: GaussLegendre,
    pub(crate) arc_r_plus: Vec<Vec<Complex64>>,
    pub(crate) gap_r: Vec<Vec<f64>>,
    pub(crate) ray_left_r: Vec<f64>,
    pub(crate) ray_right_r: Vec<f64>,
    /// rules at a node-disjoint order for principal-value kernels, so that
    /// evaluation points drawn from the primary tables never collide with
    /// the integration nodes
    pub(crate) pv_arcs: Vec<SegmentRule>,
    pub(crate) pv_gaps: Vec<SegmentRule>,
    pub(crate) pv_arc_r_plus: Vec<Vec<Complex64>>,
    pub(crate) pv_gap_r: Vec<Vec<f64>>,
}

/// One full pass of the period computation at a fixed order.
struct PeriodPass {
    a_mat: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    tau: DMatrix<Complex64>,
    tau11_direct: Complex64,
    t_mat: DMatrix<f64>,
    arcs: Vec<SegmentRule>,
    gaps: Vec<SegmentRule>,
    ray_left: RayRule,
    ray_right: RayRule,
    gl: GaussLegendre,
    arc_r_plus: Vec<Vec<Complex64>>,
    gap_r: Vec<Vec<f64>>,
    ray_left_r: Vec<f64>,
    ray_right_r: Vec<f64>,
    flipped: bool,
}

fn period_pass(sys: &IntervalSystem, order: usize) -> Result<PeriodPass> {
    let g = sys.genus();
    let gl = GaussLegendre::new(order);
    let arcs: Vec<SegmentRule> = sys
        .main_arcs()
        .iter()
        .map(|&(lo, hi)| SegmentRule::new(&gl, lo, hi))
        .collect();
    let gaps: Vec<SegmentRule> = sys
        .gaps_paper_order()
        .iter()
        .map(|&(lo, hi)| SegmentRule::new(&gl, lo, hi))
        .collect();
    let center = 0.5 * (sys.a(1) + sys.a(2 * g + 2));
    let ray_left = RayRule::new(&gl, sys.a(1), center, RayDirection::TowardMinusInf);
    let ray_right = RayRule::new(&gl, sys.a(2 * g + 2), center, RayDirection::TowardPlusInf);
    let arc_r_plus: Vec<Vec<Complex64>> = arcs.iter().map(|s| sys.radical_plus_nodes(s)).collect();
    let gap_r: Vec<Vec<f64>> = gaps
        .iter()
        .map(|s| sys.radical_plus_nodes(s).iter().map(|c| c.re).collect())
        .collect();
    let ray_left_r = sys.radical_ray_nodes(&ray_left);
    let ray_right_r = sys.radical_ray_nodes(&ray_right);

    // A-period moments: rows 1..g-1 are doubled inner-gap integrals, row g is
    // the doubled unbounded-gap integral traversed right to left.
    let mut a_mat = DMatrix::<f64>::zeros(g, g);
    for k in 1..g {
        let seg = &gaps[k - 1];
        let r = &gap_r[k - 1];
        for i in 0..g {
            let mut s = 0.0;
            for (idx, &z) in seg.z.iter().enumerate() {
                s += seg.w[idx] * z.powi(i as i32) / r[idx];
            }
            a_mat[(k - 1, i)] = 2.0 * s;
        }
    }
    for i in 0..g {
        // right-to-left: from a_1 toward -inf, then from +inf down to a_{2g+2}
        let mut s = 0.0;
        for (idx, &z) in ray_left.z.iter().enumerate() {
            s -= ray_left.w[idx] * z.powi(i as i32) / ray_left_r[idx];
        }
        for (idx, &z) in ray_right.z.iter().enumerate() {
            s -= ray_right.w[idx] * z.powi(i as i32) / ray_right_r[idx];
        }
        a_mat[(g - 1, i)] = 2.0 * s;
    }

    let a_inv = a_mat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMatrix("A-period matrix".into()))?;

    // omega_k at arc nodes (boundary values from above)
    let omega_arc =
        |arc_idx: usize, k: usize| -> Vec<Complex64> {
            let seg = &arcs[arc_idx];
            let r = &arc_r_plus[arc_idx];
            (0..seg.len())
                .map(|idx| {
                    let mut p = 0.0;
                    let mut zp = 1.0;
                    for i in 0..g {
                        p += a_inv[(i, k)] * zp;
                        zp *= seg.z[idx];
                    }
                    p / r[idx]
                })
                .collect()
        };

    // tau by collapsing the clockwise B loops onto the enclosed main arcs
    let mut tau = DMatrix::<Complex64>::zeros(g, g);
    for krow in 1..=g {
        for j in 0..g {
            let mut s = Complex64::new(0.0, 0.0);
            if krow <= g - 1 {
                for m in (krow + 1)..=g {
                    let om = omega_arc(m - 1, j);
                    for (idx, v) in om.iter().enumerate() {
                        s += arcs[m - 1].w[idx] * v;
                    }
                }
            } else {
                let om = omega_arc(g, j);
                for (idx, v) in om.iter().enumerate() {
                    s += arcs[g].w[idx] * v;
                }
            }
            tau[(krow - 1, j)] = 2.0 * s;
        }
    }

    // orientation: Riemann's theorem detects the correct global sign
    let mut flipped = false;
    let im_ok = |t: &DMatrix<Complex64>| {
        let im = t.map(|c| c.im);
        let sym = 0.5 * (&im + &im.transpose());
        nalgebra::SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .all(|&e| e > 0.0)
    };
    if !im_ok(&tau) {
        tau.iter_mut().for_each(|c| *c = -*c);
        flipped = true;
        if !im_ok(&tau) {
            return Err(Error::TauNotPositive);
        }
    }

    // independent tau_{11}: -2 sum_j (A^{-1})_{j1} int_{I_e} z^{j-1}/R_+
    let mut tau11_direct = Complex64::new(0.0, 0.0);
    for arc_idx in [0usize, g] {
        let om = omega_arc(arc_idx, 0);
        for (idx, v) in om.iter().enumerate() {
            tau11_direct -= 2.0 * arcs[arc_idx].w[idx] * v;
        }
    }
    if flipped {
        tau11_direct = -tau11_direct;
    }

    // gap moment matrix T, columns (c_1, ..., c_{g-1}, c_0)
    let mut t_mat = DMatrix::<f64>::zeros(g, g);
    for (col, seg) in gaps.iter().enumerate() {
        let r = &gap_r[col];
        for m in 0..g {
            let mut s = 0.0;
            for (idx, &z) in seg.z.iter().enumerate() {
                s += seg.w[idx] * z.powi(m as i32) / r[idx];
            }
            t_mat[(m, col)] = 2.0 * s;
        }
    }

    Ok(PeriodPass {
        a_mat,
        a_inv,
        tau,
        tau11_direct,
        t_mat,
        arcs,
        gaps,
        ray_left,
        ray_right,
        gl,
        arc_r_plus,
        gap_r,
        ray_left_r,
        ray_right_r,
        flipped,
    })
}

/// Builds all periods, doubling the quadrature order until every stored
/// quantity is stable to `1e-11` relative.
pub fn build_period_data(sys: &IntervalSystem, base_order: usize) -> Result<PeriodData> {
    let g = sys.genus();
    let mut order = base_order.max(32);
    let mut prev = period_pass(sys, order)?;
    loop {
        let next_order = order * 2;
        let next = period_pass(sys, next_order)?;
        let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
        let mut worst = 0.0f64;
        for i in 0..g {
            for j in 0..g {
                worst = worst.max(rel(prev.a_mat[(i, j)], next.a_mat[(i, j)]));
                worst = worst.max(
                    (prev.tau[(i, j)] - next.tau[(i, j)]).norm()
                        / (1.0 + next.tau[(i, j)].norm()),
                );
                worst = worst.max(rel(prev.t_mat[(i, j)], next.t_mat[(i, j)]));
            }
        }
        if worst < 1e-11 {
            prev = next;
            order = next_order;
            break;
        }
        if next_order >= 4096 {
            return Err(Error::QuadratureDiverged(format!(
                "periods did not stabilize at order {next_order} (rel change {worst:.3e})"
            )));
        }
        prev = next;
        order = next_order;
    }

    if prev.flipped {
        // the collapse convention already yields Im tau > 0 for ordered real
        // endpoints; a flip means the homology orientation disagrees
        return Err(Error::TauNotPositive);
    }

    let mut l_mat = DMatrix::<i64>::identity(g, g);
    for i in 0..g - 1 {
        l_mat[(i, g - 1)] = -1;
    }

    // P_j coefficients: column j of A^{-1}, stored as row j
    let p_coeffs = prev.a_inv.transpose();

    let tau11 = prev.tau[(0, 0)];
    if (tau11 - prev.tau11_direct).norm() > 1e-8 {
        return Err(Error::Invalid(format!(
            "tau11 loop/direct mismatch: {} vs {}",
            tau11, prev.tau11_direct
        )));
    }

    let pv_gl = GaussLegendre::new(order + 16);
    let pv_arcs: Vec<SegmentRule> = sys
        .main_arcs()
        .iter()
        .map(|&(lo, hi)| SegmentRule::new(&pv_gl, lo, hi))
        .collect();
    let pv_gaps: Vec<SegmentRule> = sys
        .gaps_paper_order()
        .iter()
        .map(|&(lo, hi)| SegmentRule::new(&pv_gl, lo, hi))
        .collect();
    let pv_arc_r_plus: Vec<Vec<Complex64>> =
        pv_arcs.iter().map(|s| sys.radical_plus_nodes(s)).collect();
    let pv_gap_r: Vec<Vec<f64>> = pv_gaps
        .iter()
        .map(|s| sys.radical_plus_nodes(s).iter().map(|c| c.re).collect())
        .collect();

    Ok(PeriodData {
        sys: sys.clone(),
        order,
        a_mat: prev.a_mat,
        a_inv: prev.a_inv,
        p_coeffs,
        tau: prev.tau,
        tau11,
        tau11_direct: prev.tau11_direct,
        t_mat: prev.t_mat,
        l_mat,
        arcs: prev.arcs,
        gaps: prev.gaps,
        ray_left: prev.ray_left,
        ray_right: prev.ray_right,
        gl: prev.gl,
        arc_r_plus: prev.arc_r_plus,
        gap_r: prev.gap_r,
        ray_left_r: prev.ray_left_r,
        ray_right_r: prev.ray_right_r,
        pv_arcs,
        pv_gaps,
        pv_arc_r_plus,
        pv_gap_r,
    })
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.sys.genus()
    }

    /// `P_k(x)` with the stored coefficients, `k` zero-based.
    pub fn p_poly(&self, k: usize, x: f64) -> f64 {
        let g = self.genus();
        let mut p = 0.0;
        let mut zp = 1.0;
        for i in 0..g {
            p += self.a_inv[(i, k)] * zp;
            zp *= x;
        }
        p
    }

    /// `omega_k(z)` on the first sheet, `k` zero-based, off the cuts.
    pub fn omega(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let g = self.genus();
        let r = self
            .sys
            .radical(SurfacePoint::new(z, Sheet::Plus), None)?;
        let mut p = Complex64::new(0.0, 0.0);
        let mut zp = Complex64::new(1.0, 0.0);
        for i in 0..g {
            p += self.a_inv[(i, k)] * zp;
            zp *= z;
        }
        Ok(p / r)
    }

    /// All `omega` components at a real point on a gap or ray (real values).
    pub fn omega_vec_real(&self, x: f64) -> DVector<f64> {
        let g = self.genus();
        let r = self.sys.radical_real_axis(x);
        DVector::from_fn(g, |k, _| self.p_poly(k, x) / r)
    }

    /// Boundary values `omega_{k,+}` on a main arc.
    pub fn omega_vec_plus(&self, x: f64) -> DVector<Complex64> {
        let g = self.genus();
        let r = self.sys.radical_boundary(x, Shore::Above);
        DVector::from_fn(g, |k, _| Complex64::new(self.p_poly(k, x), 0.0) / r)
    }

    /// One real root of `P_j` inside each gap `c_k`, `k != j` (1-based `j`,
    /// gap index `k = 1..=g` with `k = g` meaning the unbounded gap).
    ///
    /// Returns `(j, k, root)`; a root at infinity (degree drop of `P_1`) is
    /// reported as `f64::INFINITY`.
    pub fn differential_zero_locations(&self) -> Result<Vec<(usize, usize, f64)>> {
        let g = self.genus();
        let mut out = Vec::new();
        for j in 1..=g {
            for k in 1..=g {
                if k == j {
                    continue;
                }
                let root = if k < g {
                    let (lo, hi) = self.sys.gap(k);
                    bisect_root(|x| self.p_poly(j - 1, x), lo, hi)
                        .ok_or(Error::ZeroCountMismatch { j })?
                } else {
                    // unbounded gap: the root is real outside the hull, or at
                    // infinity when the leading coefficient vanishes
                    let lead = self.a_inv[(g - 1, j - 1)];
                    let scale = self
                        .sys
                        .endpoints()
                        .iter()
                        .fold(0.0f64, |m, &a| m.max(a.abs()))
                        * 2.0
                        + 1.0;
                    if lead.abs() < 1e-12 {
                        f64::INFINITY
                    } else {
                        let left = bisect_root(|x| self.p_poly(j - 1, x), -1e12, self.sys.a(1));
                        let right = bisect_root(
                            |x| self.p_poly(j - 1, x),
                            self.sys.a(2 * g + 2),
                            1e12,
                        );
                        let _ = scale;
                        left.or(right).ok_or(Error::ZeroCountMismatch { j })?
                    }
                };
                out.push((j, k, root));
            }
        }
        Ok(out)
    }

}

fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    // scan for a sign change, then bisect
    const SCAN: usize = 512;
    let mut a = lo;
    let mut fa = f(a);
    let step = (hi - lo) / SCAN as f64;
    for i in 1..=SCAN {
        let b = lo + step * i as f64;
        let fb = f(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fa * fb < 0.0 {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..200 {
                let xm = 0.5 * (x0 + x1);
                let fm = f(xm);
                if f0 * fm <= 0.0 {
                    x1 = xm;
                } else {
                    x0 = xm;
                    f0 = fm;
                }
                if (x1 - x0).abs() < 1e-14 * (1.0 + xm.abs()) {
                    break;
                }
            }
            return Some(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_system() -> IntervalSystem {
        IntervalSystem::new(vec![-5.0, -3.3, -2.0, 0.1, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn rejects_bad_endpoint_lists() {
        assert!(IntervalSystem::new(vec![0.0, 1.0, 2.0, 3.0]).is_err()); // g = 1
        assert!(IntervalSystem::new(vec![0.0, 1.0, 1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(IntervalSystem::new(vec![0.0, 2.0, 1.0, 3.0, 4.0, 5.0]).is_err());
        assert!(IntervalSystem::new(vec![0.0; 7]).is_err());
    }

    #[test]
    fn radical_at_real_point_right_of_hull() {
        let sys = fig1_system();
        // direct product evaluation: 8 * 6.3 * 5 * 2.9 * 2 * 1 = 1461.6
        let want = 1461.6f64.sqrt();
        let got = sys
            .radical(SurfacePoint::real(3.0, Sheet::Plus), None)
            .unwrap();
        assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-14);
    }

    #[test]
    fn radical_vanishes_at_branch_point() {
        let sys = fig1_system();
        let got = sys
            .radical(SurfacePoint::real(-5.0, Sheet::Plus), None)
            .unwrap();
        assert_eq!(got, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn radical_schwarz_symmetry() {
        let sys = fig1_system();
        let z = Complex64::new(0.5, 0.5);
        let a = sys.radical(SurfacePoint::new(z, Sheet::Plus), None).unwrap();
        let b = sys
            .radical(SurfacePoint::new(z.conj(), Sheet::Plus), None)
            .unwrap();
        assert!((a.conj() - b).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn radical_missing_shore_is_an_error() {
        let sys = fig1_system();
        let p = SurfacePoint::real(-4.0, Sheet::Plus); // on gamma_1
        assert!(matches!(sys.radical(p, None), Err(Error::MissingShore)));
    }

    #[test]
    fn radical_shore_values_are_conjugate_and_imaginary() {
        let sys = fig1_system();
        let up = sys.radical_boundary(-4.0, Shore::Above);
        let dn = sys.radical_boundary(-4.0, Shore::Below);
        assert!((up - dn.conj()).norm() < 1e-14 * up.norm());
        assert!(up.re.abs() < 1e-14 * up.norm()); // purely imaginary on arcs
    }

    #[test]
    fn weight_w_values() {
        let sys = fig1_system();
        assert!((sys.weight_w_real(-1.5) - 3.5).abs() < 1e-14); // midpoint
        assert_eq!(sys.weight_w_real(-5.0), 0.0);
        assert!((sys.weight_w_real(-2.0) - (4.0f64 * 3.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn period_data_golden_tau11() {
        let sys = fig1_system();
        let pd = build_period_data(&sys, 128).unwrap();
        // frozen from two independent adaptive-quadrature routes
        assert!((pd.tau11.im - 1.3997998877123532).abs() < 1e-10, "{}", pd.tau11);
        assert!(pd.tau11.re.abs() < 1e-12);
        assert!((pd.tau11 - pd.tau11_direct).norm() < 1e-10);
    }

    #[test]
    fn tau_symmetric_purely_imaginary_positive() {
        let sys = fig1_system();
        let pd = build_period_data(&sys, 128).unwrap();
        let g = pd.genus();
        for i in 0..g {
            for j in 0..g {
                assert!((pd.tau[(i, j)] - pd.tau[(j, i)]).norm() < 1e-9);
                assert!(pd.tau[(i, j)].re.abs() < 1e-9);
            }
        }
        let im = pd.tau.map(|c| c.im);
        let eig = nalgebra::SymmetricEigen::new(0.5 * (&im + &im.transpose()));
        assert!(eig.eigenvalues.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn tau11_invariant_under_reflection() {
        // reflecting a_j -> -a_{2g+3-j} mirrors every cycle integral
        let sys = fig1_system();
        let mut mirrored: Vec<f64> = sys.endpoints().iter().map(|&a| -a).collect();
        mirrored.reverse();
        let refl = IntervalSystem::new(mirrored).unwrap();
        let pd = build_period_data(&sys, 128).unwrap();
        let pd2 = build_period_data(&refl, 128).unwrap();
        assert!((pd.tau11 - pd2.tau11).norm() < 1e-11);
    }

    #[test]
    fn a_normalization_against_independent_quadrature() {
        // recompute the A-cycle integrals of the assembled omega at a higher,
        // unrelated order and check the Kronecker property
        let sys = fig1_system();
        let pd = build_period_data(&sys, 96).unwrap();
        let g = pd.genus();
        let gl = GaussLegendre::new(777);
        for j in 1..=g {
            for k in 0..g {
                let val = if j < g {
                    let (lo, hi) = sys.gap(j);
                    let seg = SegmentRule::new(&gl, lo, hi);
                    let r: Vec<f64> = sys
                        .radical_plus_nodes(&seg)
                        .iter()
                        .map(|c| c.re)
                        .collect();
                    let mut s = 0.0;
                    for idx in 0..seg.len() {
                        s += seg.w[idx] * pd.p_poly(k, seg.z[idx]) / r[idx];
                    }
                    2.0 * s
                } else {
                    let center = 0.5 * (sys.a(1) + sys.a(6));
                    let rl = RayRule::new(&gl, sys.a(1), center, RayDirection::TowardMinusInf);
                    let rr = RayRule::new(&gl, sys.a(6), center, RayDirection::TowardPlusInf);
                    let rlr = sys.radical_ray_nodes(&rl);
                    let rrr = sys.radical_ray_nodes(&rr);
                    let mut s = 0.0;
                    for idx in 0..rl.z.len() {
                        s -= rl.w[idx] * pd.p_poly(k, rl.z[idx]) / rlr[idx];
                    }
                    for idx in 0..rr.z.len() {
                        s -= rr.w[idx] * pd.p_poly(k, rr.z[idx]) / rrr[idx];
                    }
                    2.0 * s
                };
                let want = if j - 1 == k { 1.0 } else { 0.0 };
                assert!(
                    (val - want).abs() < 1e-8,
                    "A_{j} omega_{k}: {val} vs {want}"
                );
            }
        }
    }

    #[test]
    fn p_zeros_land_in_the_right_gaps() {
        let sys = fig1_system();
        let pd = build_period_data(&sys, 128).unwrap();
        let zeros = pd.differential_zero_locations().unwrap();
        // g = 2: P_1 has one zero in the unbounded gap (or at infinity),
        // P_2 has one zero in c_1 = [a_2, a_3]
        for (j, k, root) in zeros {
            match (j, k) {
                (1, 2) => {
                    assert!(
                        root.is_infinite() || root < sys.a(1) || root > sys.a(6),
                        "P_1 zero at {root}"
                    );
                }
                (2, 1) => {
                    let (lo, hi) = sys.gap(1);
                    assert!(lo < root && root < hi, "P_2 zero at {root}");
                    assert!(pd.p_poly(1, root).abs() < 1e-10);
                    // grid-scan oracle: exactly one sign change in the gap
                    let mut changes = 0;
                    let mut prev = pd.p_poly(1, lo + 1e-9);
                    for i in 1..10_000 {
                        let x = lo + (hi - lo) * i as f64 / 10_000.0 - 1e-12;
                        let v = pd.p_poly(1, x);
                        if prev * v < 0.0 {
                            changes += 1;
                        }
                        prev = v;
                    }
                    assert_eq!(changes, 1);
                }
                _ => panic!("unexpected (j,k) = ({j},{k})"),
            }
        }
    }

    #[test]
    fn omega1_sign_structure_on_arcs() {
        let sys = fig1_system();
        let pd = build_period_data(&sys, 128).unwrap();
        // Im omega_{1,+} < 0 on I_e, > 0 on I_i, checked at arc midpoints
        for (j, &(lo, hi)) in sys.main_arcs().iter().enumerate() {
            let mid = 0.5 * (lo + hi);
            let v = pd.omega_vec_plus(mid)[0];
            let inner = j + 1 >= 2 && j + 1 <= sys.genus();
            if inner {
                assert!(v.im > 0.0, "arc {} midpoint {mid}: {v}", j + 1);
            } else {
                assert!(v.im < 0.0, "arc {} midpoint {mid}: {v}", j + 1);
            }
        }
    }

    #[test]
    fn doubling_order_leaves_periods_fixed() {
        let sys = fig1_system();
        let lo = period_pass(&sys, 128).unwrap();
        let hi = period_pass(&sys, 256).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let rel = (lo.tau[(i, j)] - hi.tau[(i, j)]).norm()
                    / (1.0 + hi.tau[(i, j)].norm());
                assert!(rel < 1e-9);
            }
        }
    }

    #[test]
    fn t_equals_a_transpose_l() {
        let sys = fig1_system();
        let pd = build_period_data(&sys, 128).unwrap();
        let g = pd.genus();
        let l = pd.l_mat.map(|v| v as f64);
        let prod = pd.a_mat.transpose() * l;
        for i in 0..g {
            for j in 0..g {
                assert!((prod[(i, j)] - pd.t_mat[(i, j)]).abs() < 1e-9);
            }
        }
    }
}
