//! Approximate singular values as theta zeros on the spectral line, divisor
//! points, norm constants, asymptotic singular functions and the model
//! matrix.
//!
//! The value `kappa` is an approximate eigenvalue exactly when
//! `Theta(W(kappa) - W_0) = 0`.  Multiplying by the characteristic phase of
//! the half period `W_0` turns the restriction to the real line into a real
//! function whose simple sign changes are the roots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::abel::{abel_map_plus, abel_map_unbounded, spectral_line, AbelData};
use crate::error::{Error, Result};
use crate::gfun::{d_plus, g_plus, h_plus, h_prefactor, JumpData};
use crate::quad::SegmentRule;
use crate::surface::{PeriodData, Sheet, Shore, SurfacePoint};
use crate::theta::ThetaContext;

/// Everything the spectral operations need, bundled once.
pub struct SpectralContext<'a> {
    pub pd: &'a PeriodData,
    pub ad: &'a AbelData,
    pub jd: &'a JumpData,
    pub theta: &'a ThetaContext,
}

impl<'a> SpectralContext<'a> {
    pub fn new(
        pd: &'a PeriodData,
        ad: &'a AbelData,
        jd: &'a JumpData,
        theta: &'a ThetaContext,
    ) -> Self {
        SpectralContext { pd, ad, jd, theta }
    }

    pub fn genus(&self) -> usize {
        self.pd.genus()
    }

    /// `pi / Im tau_11`, the mean spacing of the approximate eigenvalues.
    pub fn kappa_period(&self) -> f64 {
        std::f64::consts::PI / self.pd.tau[(0, 0)].im
    }

    fn w_complex(&self, kappa: f64) -> DVector<Complex64> {
        spectral_line(self.pd, self.ad, kappa).map(|v| Complex64::new(v, 0.0))
    }
}

/// `Theta(W(kappa) - W_0)`.
pub fn theta_line(ctx: &SpectralContext, kappa: f64) -> Complex64 {
    let arg = ctx.w_complex(kappa) - &ctx.ad.w0;
    ctx.theta.theta(&arg)
}

/// The real-normalized line indicator.
///
/// `W_0 = (m + tau n)/2` with `n = e_1`, `m = -(e_1 + e_g)` is an odd
/// half-integer characteristic; the characteristic phase
/// `exp(i pi tau_11/4 - i pi W_1(kappa) - i pi / 2)` makes
/// `Theta(W(kappa) - W_0)` real for every real `kappa`.
pub fn real_line_indicator(ctx: &SpectralContext, kappa: f64) -> Result<f64> {
    let w = spectral_line(ctx.pd, ctx.ad, kappa);
    let theta_val = theta_line(ctx, kappa);
    let phase = Complex64::new(0.0, 1.0)
        * std::f64::consts::PI
        * (0.25 * ctx.pd.tau[(0, 0)] - Complex64::new(w[0], 0.0)
            - Complex64::new(0.5, 0.0));
    let v = phase.exp() * theta_val;
    let scale = v.norm().max(1.0);
    if v.im.abs() > 1e-6 * scale {
        return Err(Error::IndicatorNotReal {
            residual: v.im.abs() / scale,
        });
    }
    Ok(v.re)
}

/// Ascending simple zeros of the indicator in `[kappa_min, kappa_max]`.
///
/// Scan with step at most an eighth of the line period, bracket sign
/// changes, bisect; the window-count bound from the divisor geometry guards
/// against double roots inside one cell.
pub fn find_eigenvalues(
    ctx: &SpectralContext,
    kappa_min: f64,
    kappa_max: f64,
) -> Result<Vec<f64>> {
    if !(kappa_min >= 0.0) || !(kappa_max > kappa_min) {
        return Err(Error::Invalid("need 0 <= kappa_min < kappa_max".into()));
    }
    let period = ctx.kappa_period();
    let mut cells = (((kappa_max - kappa_min) / (period / 8.0)).ceil() as usize).max(8);
    loop {
        let roots = scan_roots(ctx, kappa_min, kappa_max, cells)?;
        if window_counts_ok(ctx, &roots, kappa_min, kappa_max) {
            return Ok(roots);
        }
        cells *= 2;
        if cells > 1 << 22 {
            return Err(Error::CountBoundViolation {
                count: roots.len(),
                lo: 0,
                hi: 0,
            });
        }
    }
}

fn scan_roots(
    ctx: &SpectralContext,
    kappa_min: f64,
    kappa_max: f64,
    cells: usize,
) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let step = (kappa_max - kappa_min) / cells as f64;
    let mut prev_k = kappa_min;
    let mut prev_v = real_line_indicator(ctx, prev_k)?;
    for i in 1..=cells {
        let k = kappa_min + step * i as f64;
        let v = real_line_indicator(ctx, k)?;
        if prev_v == 0.0 {
            roots.push(prev_k);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_k, k, prev_v);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = real_line_indicator(ctx, mid)?;
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_k = k;
        prev_v = v;
    }
    Ok(roots)
}

/// Counting bound: a window of length `N (g-1) pi / Im tau_11` contains
/// between `(N-1)(g-1)` and `(N+1)(g-1)` roots.
fn window_counts_ok(ctx: &SpectralContext, roots: &[f64], lo: f64, hi: f64) -> bool {
    let g = ctx.genus();
    let period = ctx.kappa_period();
    for n_windows in 1..=5usize {
        let len = n_windows as f64 * (g - 1) as f64 * period;
        let mut start = lo;
        while start + len <= hi {
            let count = roots
                .iter()
                .filter(|&&r| r >= start && r < start + len)
                .count();
            let lo_bound = (n_windows - 1) * (g - 1);
            let hi_bound = (n_windows + 1) * (g - 1);
            if count < lo_bound || count > hi_bound {
                return false;
            }
            start += 0.5 * len;
        }
    }
    true
}

/// A solved divisor point with its cycle parameter.
#[derive(Debug, Clone)]
pub struct DivisorPoint {
    pub z: f64,
    pub sheet: Sheet,
    /// cycle A_{l+1} the point lives on (1-based l)
    pub cycle: usize,
}

/// Divisor solve result for one root.
#[derive(Debug, Clone)]
pub struct DivisorSolution {
    pub points: Vec<DivisorPoint>,
    pub residual: f64,
}

/// Abel map of a point on the cycle `A_{cycle}` parametrized by
/// `t in [0, 2)`: the first half is the upper sheet, the second the lower.
fn cycle_point(pd: &PeriodData, cycle: usize, t: f64) -> (f64, Sheet) {
    let g = pd.genus();
    let tt = t.rem_euclid(2.0);
    let (s, sheet) = if tt < 1.0 {
        (tt, Sheet::Plus)
    } else {
        (2.0 - tt, Sheet::Minus)
    };
    if cycle < g {
        // finite gap c_cycle
        let (lo, hi) = pd.sys.gap(cycle);
        // cosine parametrization avoids square-root derivative blowup
        let z = 0.5 * (lo + hi) - 0.5 * (hi - lo) * (std::f64::consts::PI * s).cos();
        (z, sheet)
    } else {
        // unbounded gap through infinity, from a_{2g+2} to a_1 in the
        // reciprocal coordinate
        let a1 = pd.sys.a(1);
        let a_last = pd.sys.a(2 * g + 2);
        let center = 0.5 * (a1 + a_last);
        let v_hi = 1.0 / (a_last - center);
        let v_lo = 1.0 / (a1 - center);
        let v = v_hi + s * (v_lo - v_hi);
        let z = if v == 0.0 { f64::INFINITY } else { center + 1.0 / v };
        (z, sheet)
    }
}

fn cycle_abel(pd: &PeriodData, cycle: usize, t: f64) -> DVector<f64> {
    let g = pd.genus();
    let (z, sheet) = cycle_point(pd, cycle, t);
    let u = if cycle < g {
        abel_map_plus(pd, z).map(|c| c.re)
    } else if z.is_infinite() {
        crate::abel::abel_infinity(pd)
    } else {
        abel_map_unbounded(pd, z)
    };
    match sheet {
        Sheet::Plus => u,
        Sheet::Minus => -u,
    }
    .map(|v| if cycle < g { v } else { v })
}

fn torus_distance(v: &DVector<f64>) -> f64 {
    v.iter()
        .map(|x| {
            let d = x - x.round();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Solves for the `g-1` divisor points of a located root `kappa_n`.
///
/// The points live on the cycles `A_2, ..., A_g`; their Abel sums relative
/// to the prefactor divisor hit `W(kappa_n)` modulo the integer lattice.
/// `g = 2` is a one-dimensional search over the unbounded cycle; larger
/// genus uses coordinate relaxation from a scan seed.
pub fn solve_divisor(
    ctx: &SpectralContext,
    kappa_n: f64,
    seed: Option<&[f64]>,
) -> Result<DivisorSolution> {
    let g = ctx.genus();
    let pd = ctx.pd;
    let target = spectral_line(pd, ctx.ad, kappa_n);
    let jset = crate::gfun::index_set_j(g);
    // X(p) = sum_l [u(p_l) - u(a_{j_l})]; the branch values are half lattice
    // vectors, real parts -> the real torus offset
    let mut base = DVector::from_element(g, 0.0f64);
    for &j in &jset {
        let bv = &ctx.ad.branch_values[j - 1];
        for i in 0..g {
            base[i] -= bv[i].re;
        }
    }
    let npts = g - 1;
    let mut params: Vec<f64> = match seed {
        Some(s) if s.len() == npts => s.to_vec(),
        _ => vec![0.5; npts],
    };
    // the points live on the cycles A_{l+1} for l = 1..g-1, i.e. A_2..A_g
    let eval = |params: &[f64]| -> DVector<f64> {
        let mut x = base.clone();
        for (l, &t) in params.iter().enumerate() {
            x += cycle_abel(pd, l + 2, t);
        }
        x - &target
    };
    let dist = |params: &[f64]| torus_distance(&eval(params));

    // global scan on a coarse grid (seeded runs skip straight to refinement)
    if seed.is_none() {
        let grid = if npts == 1 { 1024 } else { 48 };
        let mut best = (f64::INFINITY, params.clone());
        let mut idx = vec![0usize; npts];
        loop {
            let cand: Vec<f64> = idx.iter().map(|&i| 2.0 * i as f64 / grid as f64).collect();
            let d = dist(&cand);
            if d < best.0 {
                best = (d, cand);
            }
            // odometer
            let mut k = 0;
            loop {
                if k == npts {
                    break;
                }
                idx[k] += 1;
                if idx[k] < grid {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == npts {
                break;
            }
        }
        params = best.1;
    }

    // cyclic coordinate refinement by golden-section
    let mut span = 0.1f64;
    for _round in 0..200 {
        let mut improved = false;
        for l in 0..npts {
            let d0 = dist(&params);
            let (mut lo, mut hi) = (params[l] - span, params[l] + span);
            for _ in 0..60 {
                let m1 = lo + 0.381_966 * (hi - lo);
                let m2 = hi - 0.381_966 * (hi - lo);
                let mut p1 = params.clone();
                p1[l] = m1;
                let mut p2 = params.clone();
                p2[l] = m2;
                if dist(&p1) < dist(&p2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let cand = 0.5 * (lo + hi);
            let mut p = params.clone();
            p[l] = cand;
            if dist(&p) < d0 {
                params = p;
                improved = true;
            }
        }
        let d = dist(&params);
        if d < 1e-11 {
            break;
        }
        if !improved {
            span *= 0.35;
            if span < 1e-14 {
                break;
            }
        }
    }
    let residual = dist(&params);
    if residual > 1e-5 {
        return Err(Error::DivisorStagnation {
            n: 0,
            residual,
        });
    }
    let points = params
        .iter()
        .enumerate()
        .map(|(l, &t)| {
            let (z, sheet) = cycle_point(pd, l + 2, t);
            DivisorPoint {
                z,
                sheet,
                cycle: l + 2,
            }
        })
        .collect();
    Ok(DivisorSolution {
        points,
        residual,
    })
}

/// Residue of the model matrix entry `(j, col)` at a root, up to the factor
/// `i pi / (tau_1 . grad Theta)` which cancels in normalized quantities.
fn res_psi_entry(
    ctx: &SpectralContext,
    w_n: &DVector<Complex64>,
    denom_dk: Complex64,
    u_plus_x: &DVector<Complex64>,
    hx: Complex64,
    j: usize,
    col: usize,
) -> Complex64 {
    let sgn_col = if col == 1 { 1.0 } else { -1.0 };
    let sgn_uinf = if j == 1 { -1.0 } else { 1.0 };
    let sgn_row = if j == 1 { 1.0 } else { -1.0 };
    let g = ctx.genus();
    let uinf = &ctx.ad.u_infinity;
    let num_arg = DVector::from_fn(g, |i, _| {
        sgn_col * u_plus_x[i] + Complex64::new(sgn_uinf * uinf[i], 0.0) - ctx.ad.w0[i] + w_n[i]
    });
    let den_arg = DVector::from_fn(g, |i, _| {
        sgn_col * u_plus_x[i] + Complex64::new(sgn_uinf * uinf[i], 0.0) - ctx.ad.w0[i]
    });
    sgn_row
        * Complex64::new(0.0, std::f64::consts::PI)
        * ctx.jd.c0
        * ctx.theta.theta(&num_arg)
        * hx
        / (denom_dk * ctx.theta.theta(&den_arg))
}

/// Norm constants `(N_1, N_2)` for a root, from the collapsed `B_1` contour
/// integral of the residue products, plus the closed-form magnitudes as a
/// consistency check.
pub fn norm_constants(ctx: &SpectralContext, kappa_n: f64) -> Result<(f64, f64)> {
    let pd = ctx.pd;
    let g = ctx.genus();
    let w_n = ctx.w_complex(kappa_n);
    let grad = ctx.theta.theta_gradient(&(w_n.clone() - &ctx.ad.w0));
    let mut denom_dk = Complex64::new(0.0, 0.0);
    for i in 0..g {
        denom_dk += pd.tau[(i, 0)] * grad[i];
    }
    if denom_dk.norm() < 1e-14 {
        return Err(Error::Invalid(
            "transversality failure: tau_1 . grad Theta = 0 at the root".into(),
        ));
    }
    let mut out = [0.0f64; 2];
    for j in [1usize, 2] {
        // B_1 collapses onto the interior arcs gamma_2 .. gamma_g
        let mut total = Complex64::new(0.0, 0.0);
        let quad_order = 48.max(pd.gl.nodes.len() / 4);
        let gl = crate::quad::GaussLegendre::new(quad_order);
        for m in 2..=g {
            let (lo, hi) = pd.sys.main_arc(m);
            let seg = SegmentRule::new(&gl, lo, hi);
            for idx in 0..seg.len() {
                let x = seg.z[idx];
                let up = abel_map_plus(pd, x);
                let hx = h_plus(pd, x);
                let r1 = res_psi_entry(ctx, &w_n, denom_dk, &up, hx, j, 1);
                let r2 = res_psi_entry(ctx, &w_n, denom_dk, &up, hx, j, 2);
                total += seg.w[idx] * r1 * r2;
            }
        }
        let nj = Complex64::new(0.0, -1.0) / (std::f64::consts::PI * std::f64::consts::PI)
            * 2.0
            * total;
        if nj.im.abs() > 1e-8 * nj.norm().max(1.0) {
            return Err(Error::Invalid(format!(
                "norm constant N_{j} is not real: {nj}"
            )));
        }
        out[j - 1] = nj.re;
    }
    if out[0].max(out[1]) <= 1e-10 {
        return Err(Error::DegenerateNormConstants);
    }
    // closed-form magnitude check (the phase depends on the lattice
    // representative; the contour value is canonical)
    for j in [1usize, 2] {
        let s = if j == 1 { -1.0 } else { 1.0 };
        let arg_f = DVector::from_fn(g, |i, _| {
            w_n[i] - ctx.ad.w0[i] + Complex64::new(2.0 * s * ctx.ad.u_infinity[i], 0.0)
        });
        let arg_w0 = DVector::from_fn(g, |i, _| {
            ctx.ad.w0[i] + Complex64::new(2.0 * s * ctx.ad.u_infinity[i], 0.0)
        });
        let closed = ctx.theta.theta(&arg_f) / ctx.theta.theta(&arg_w0) * ctx.jd.c0
            / (Complex64::new(0.0, 1.0) * denom_dk);
        let rel = (closed.norm() - out[j - 1].abs()).abs() / out[j - 1].abs().max(1e-300);
        if rel > 1e-6 {
            return Err(Error::Invalid(format!(
                "closed-form |N_{j}| deviates from the contour value by {rel:.3e}"
            )));
        }
    }
    Ok((out[0], out[1]))
}

/// Asymptotic singular functions at interior/exterior sample points.
///
/// `f_n(x) = sqrt(w) Im[2 Upsilon_+(x) e^{-i kappa_n Im g_+ - i Im d_+}]` on
/// `I_i`, `h_n(x) = sqrt(w) Re[...]` on `I_e`, built from whichever norm
/// constant is larger, overall sign fixed by a positive first `h` sample.
pub struct SingularFunctionData {
    pub f_samples: Vec<(f64, f64)>,
    pub h_samples: Vec<(f64, f64)>,
    /// branch `j` used for Upsilon
    pub branch: usize,
}

pub fn asymptotic_singular_functions(
    ctx: &SpectralContext,
    kappa_n: f64,
    xs_interior: &[f64],
    xs_exterior: &[f64],
    margin: f64,
) -> Result<SingularFunctionData> {
    let pd = ctx.pd;
    let g = ctx.genus();
    for &x in xs_interior.iter().chain(xs_exterior.iter()) {
        for j in 1..=2 * g + 2 {
            let a = pd.sys.a(j);
            let arcs = pd.sys.main_arcs();
            let scale = arcs
                .iter()
                .find(|&&(lo, hi)| lo <= x && x <= hi)
                .map(|&(lo, hi)| hi - lo)
                .unwrap_or(1.0);
            if (x - a).abs() < margin * scale {
                return Err(Error::Domain(format!(
                    "sample {x} is inside the endpoint margin at a_{j}"
                )));
            }
        }
    }
    let (n1, n2) = norm_constants(ctx, kappa_n)?;
    let branch = if n1.abs() >= n2.abs() { 1 } else { 2 };
    let nj = if branch == 1 { n1 } else { n2 };
    if nj <= 0.0 {
        return Err(Error::Invalid(format!(
            "norm constant N_{branch} = {nj} is not positive"
        )));
    }
    let w_n = ctx.w_complex(kappa_n);
    let grad = ctx.theta.theta_gradient(&(w_n.clone() - &ctx.ad.w0));
    let mut denom_dk = Complex64::new(0.0, 0.0);
    for i in 0..g {
        denom_dk += pd.tau[(i, 0)] * grad[i];
    }
    let sqrt_nj = nj.sqrt();
    let upsilon = |x: f64| -> Complex64 {
        let up = abel_map_plus(pd, x);
        let hx = h_plus(pd, x);
        let r1 = res_psi_entry(ctx, &w_n, denom_dk, &up, hx, branch, 1);
        r1 / (std::f64::consts::PI * sqrt_nj)
    };
    let phase = |x: f64| -> Complex64 {
        let im_g = g_plus(pd, x).im;
        let im_d = d_plus(pd, &ctx.jd.delta, x).im;
        Complex64::new(0.0, -(kappa_n * im_g + im_d)).exp()
    };
    let mut h_samples: Vec<(f64, f64)> = xs_exterior
        .iter()
        .map(|&x| {
            let v = 2.0 * upsilon(x) * phase(x);
            (x, pd.sys.weight_w_real(x).sqrt() * v.re)
        })
        .collect();
    let mut f_samples: Vec<(f64, f64)> = xs_interior
        .iter()
        .map(|&x| {
            let v = 2.0 * upsilon(x) * phase(x);
            (x, pd.sys.weight_w_real(x).sqrt() * v.im)
        })
        .collect();
    // sign convention: first exterior sample positive
    let flip = h_samples.first().map(|&(_, v)| v < 0.0).unwrap_or(false);
    if flip {
        for s in h_samples.iter_mut().chain(f_samples.iter_mut()) {
            s.1 = -s.1;
        }
    }
    Ok(SingularFunctionData {
        f_samples,
        h_samples,
        branch,
    })
}

/// The model matrix away from roots: theta quotients times the prefactor,
/// `det = 1`, identity at infinity.
pub fn build_model_psi(
    ctx: &SpectralContext,
    z: Complex64,
    kappa: f64,
    shore: Option<Shore>,
) -> Result<DMatrix<Complex64>> {
    let pd = ctx.pd;
    let g = ctx.genus();
    let theta_w = theta_line(ctx, kappa);
    if theta_w.norm() < 1e-8 {
        return Err(Error::Invalid(format!(
            "kappa = {kappa} is a root; the model matrix has a pole there"
        )));
    }
    let w = ctx.w_complex(kappa);
    let u = crate::abel::abel_map(pd, SurfacePoint::new(z, Sheet::Plus), shore)?;
    let h = h_prefactor(pd, z, shore)?;
    let uinf = &ctx.ad.u_infinity;
    let mut psi = DMatrix::<Complex64>::zeros(2, 2);
    for row in 1..=2usize {
        for col in 1..=2usize {
            let sgn_col = if col == 1 { 1.0 } else { -1.0 };
            let sgn_uinf = if row == 1 { -1.0 } else { 1.0 };
            let sgn_row = if row == 1 { 1.0 } else { -1.0 };
            let num_arg = DVector::from_fn(g, |i, _| {
                sgn_col * u[i] + Complex64::new(sgn_uinf * uinf[i], 0.0) - ctx.ad.w0[i] + w[i]
            });
            let den_arg = DVector::from_fn(g, |i, _| {
                sgn_col * u[i] + Complex64::new(sgn_uinf * uinf[i], 0.0) - ctx.ad.w0[i]
            });
            psi[(row - 1, col - 1)] = sgn_row * ctx.jd.c0 * ctx.theta.theta(&num_arg) * h
                / (theta_w * ctx.theta.theta(&den_arg));
        }
    }
    Ok(psi)
}

/// Per-root spectral record.
#[derive(Debug, Clone)]
pub struct SpectralRecord {
    pub kappa: f64,
    pub lambda: f64,
    pub divisor: Vec<DivisorPoint>,
    pub divisor_residual: f64,
    pub norm_constants: (f64, f64),
}

/// The assembled asymptotic spectrum over a kappa window.
#[derive(Debug, Clone)]
pub struct SpectralAsymptotics {
    pub records: Vec<SpectralRecord>,
    /// `pi / Im tau_11`
    pub slope: f64,
}

impl SpectralAsymptotics {
    pub fn kappas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.kappa).collect()
    }
}

/// Finds roots and solves the divisor for each, seeding each solve with the
/// previous solution.
pub fn build_spectral_asymptotics(
    ctx: &SpectralContext,
    kappa_min: f64,
    kappa_max: f64,
) -> Result<SpectralAsymptotics> {
    let roots = find_eigenvalues(ctx, kappa_min, kappa_max)?;
    let mut records = Vec::with_capacity(roots.len());
    let mut seed: Option<Vec<f64>> = None;
    for (i, &kappa) in roots.iter().enumerate() {
        let sol = match solve_divisor(ctx, kappa, seed.as_deref()) {
            Ok(s) => s,
            Err(_) => solve_divisor(ctx, kappa, None).map_err(|e| match e {
                Error::DivisorStagnation { residual, .. } => {
                    Error::DivisorStagnation { n: i, residual }
                }
                other => other,
            })?,
        };
        // continuation seed for the next root
        seed = Some(
            sol.points
                .iter()
                .map(|p| cycle_param(ctx.pd, p))
                .collect(),
        );
        let nc = norm_constants(ctx, kappa)?;
        records.push(SpectralRecord {
            kappa,
            lambda: (-kappa).exp(),
            divisor: sol.points,
            divisor_residual: sol.residual,
            norm_constants: nc,
        });
    }
    Ok(SpectralAsymptotics {
        records,
        slope: ctx.kappa_period(),
    })
}

fn cycle_param(pd: &PeriodData, p: &DivisorPoint) -> f64 {
    let g = pd.genus();
    let s = if p.cycle < g {
        let (lo, hi) = pd.sys.gap(p.cycle);
        let c = ((0.5 * (lo + hi) - p.z) / (0.5 * (hi - lo))).clamp(-1.0, 1.0);
        c.acos() / std::f64::consts::PI
    } else {
        let a1 = pd.sys.a(1);
        let a_last = pd.sys.a(2 * g + 2);
        let center = 0.5 * (a1 + a_last);
        let v_hi = 1.0 / (a_last - center);
        let v_lo = 1.0 / (a1 - center);
        let v = if p.z.is_infinite() { 0.0 } else { 1.0 / (p.z - center) };
        ((v - v_hi) / (v_lo - v_hi)).clamp(0.0, 1.0)
    };
    match p.sheet {
        Sheet::Plus => s,
        Sheet::Minus => 2.0 - s,
    }
}
