//! Abel map, its special values, Riemann constants and the spectral line.
//!
//! The base point is `a_1`; paths run along the real axis (upper shore on
//! the cuts) or along a straight segment into the half plane of the target.
//! Sheet exchange negates the map.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{PartialRule, SegmentRule};
use crate::surface::{PeriodData, Sheet, Shore, SurfacePoint};

/// Cached special values of the Abel map.
#[derive(Debug, Clone)]
pub struct AbelData {
    /// Abel map of infinity on the first sheet (real vector)
    pub u_infinity: DVector<f64>,
    /// closed-form `u(a_j)` on the upper shore, index 0 = `a_1`
    pub branch_values: Vec<DVector<Complex64>>,
    /// vector of Riemann constants, `K = sum_j u(a_{2j+1})`
    pub riemann_constants: DVector<Complex64>,
    /// `W_0 = tau_1/2 - (e_1 + e_g)/2`
    pub w0: DVector<Complex64>,
}

fn e_k(g: usize, k: usize) -> DVector<Complex64> {
    DVector::from_fn(g, |i, _| {
        if i == k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn tau_col(pd: &PeriodData, k: usize) -> DVector<Complex64> {
    DVector::from_fn(pd.genus(), |i, _| pd.tau[(i, k)])
}

/// Closed forms of the branch-point Abel values (upper shore).
pub fn branch_value(pd: &PeriodData, j: usize) -> DVector<Complex64> {
    let g = pd.genus();
    let half = Complex64::new(0.5, 0.0);
    let part_e = |upto: usize| -> DVector<Complex64> {
        let mut v = DVector::from_element(g, Complex64::new(0.0, 0.0));
        for l in 0..upto {
            v += e_k(g, l);
        }
        v * half
    };
    if j == 1 {
        return DVector::from_element(g, Complex64::new(0.0, 0.0));
    }
    if j == 2 * g + 2 {
        return e_k(g, g - 1) * half;
    }
    if j == 2 * g + 1 {
        return (e_k(g, g - 1) - tau_col(pd, g - 1)) * half;
    }
    if j == 2 * g {
        return part_e(g - 1) - tau_col(pd, g - 1) * half;
    }
    if j % 2 == 0 {
        let k = j / 2; // 1..=g-1
        part_e(k - 1) - (tau_col(pd, k - 1) + tau_col(pd, g - 1)) * half
    } else {
        let k = (j - 1) / 2; // 1..=g-1
        part_e(k) - (tau_col(pd, k - 1) + tau_col(pd, g - 1)) * half
    }
}

pub fn build_abel_data(pd: &PeriodData) -> Result<AbelData> {
    let g = pd.genus();
    let u_infinity = abel_infinity(pd);
    let branch_values: Vec<DVector<Complex64>> =
        (1..=2 * g + 2).map(|j| branch_value(pd, j)).collect();
    let mut k_vec = DVector::from_element(g, Complex64::new(0.0, 0.0));
    for j in 1..=g {
        k_vec += &branch_values[2 * j]; // u(a_{2j+1}), 0-based index 2j
    }
    // cross-check against the closed form for 2K
    let mut two_k = DVector::from_element(g, Complex64::new(0.0, 0.0));
    two_k -= tau_col(pd, g - 1) * Complex64::new(g as f64, 0.0);
    for k in 1..g {
        two_k -= tau_col(pd, k - 1);
    }
    two_k += e_k(g, g - 1);
    for l in 1..g {
        two_k += e_k(g, l - 1) * Complex64::new((g - l) as f64, 0.0);
    }
    let diff = lattice_reduce(pd, &(k_vec.clone() * Complex64::new(2.0, 0.0) - &two_k));
    if diff.iter().map(|c| c.norm()).fold(0.0, f64::max) > 1e-7 {
        return Err(Error::Invalid(format!(
            "Riemann constants mismatch between the sum and the closed form: {diff}"
        )));
    }
    let w0 = tau_col(pd, 0) * Complex64::new(0.5, 0.0)
        - (e_k(g, 0) + e_k(g, g - 1)) * Complex64::new(0.5, 0.0);
    Ok(AbelData {
        u_infinity,
        branch_values,
        riemann_constants: k_vec,
        w0,
    })
}

/// `u(inf)` on the first sheet: integral from `a_1` along the left ray.
pub fn abel_infinity(pd: &PeriodData) -> DVector<f64> {
    let g = pd.genus();
    let ray = &pd.ray_left;
    let r = &pd.ray_left_r;
    DVector::from_fn(g, |k, _| {
        let mut s = 0.0;
        for idx in 0..ray.z.len() {
            s -= ray.w[idx] * pd.p_poly(k, ray.z[idx]) / r[idx];
        }
        s
    })
}

/// Abel map on the upper shore for `x` in `[a_1, a_{2g+2}]`.
///
/// Full segments come from the cached node tables; the last partial segment
/// uses the square-root substitution at its left branch point.
pub fn abel_map_plus(pd: &PeriodData, x: f64) -> DVector<Complex64> {
    let g = pd.genus();
    let mut total = DVector::from_element(g, Complex64::new(0.0, 0.0));
    let segs = natural_segments(pd);
    for (seg, r_plus) in segs {
        if x >= seg.hi - 1e-14 * (1.0 + seg.hi.abs()) {
            for k in 0..g {
                let mut s = Complex64::new(0.0, 0.0);
                for idx in 0..seg.len() {
                    s += seg.w[idx] * pd.p_poly(k, seg.z[idx]) / r_plus[idx];
                }
                total[k] += s;
            }
        } else if x > seg.lo + 1e-14 * (1.0 + seg.lo.abs()) {
            let part = PartialRule::new(&pd.gl, seg.lo, x);
            let r = pd.sys.radical_plus_partial_nodes(&part);
            for k in 0..g {
                let mut s = Complex64::new(0.0, 0.0);
                for idx in 0..part.z.len() {
                    s += part.w[idx] * pd.p_poly(k, part.z[idx]) / r[idx];
                }
                total[k] += s;
            }
            break;
        } else {
            break;
        }
    }
    total
}

/// Natural left-to-right segment order with the matching `R_+` node values.
fn natural_segments<'a>(pd: &'a PeriodData) -> Vec<(&'a SegmentRule, Vec<Complex64>)> {
    let g = pd.genus();
    let mut out = Vec::with_capacity(2 * g + 1);
    for j in 0..=g {
        out.push((&pd.arcs[j], pd.arc_r_plus[j].clone()));
        if j < g {
            // gaps are stored in paper order (c_1 .. c_{g-1}, c_0) which is
            // also the natural left-to-right order
            out.push((
                &pd.gaps[j],
                pd.gap_r[j].iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            ));
        }
    }
    out
}

/// Abel map on the first sheet for real `x` outside `[a_1, a_{2g+2}]`.
pub fn abel_map_unbounded(pd: &PeriodData, x: f64) -> DVector<f64> {
    let g = pd.genus();
    let a1 = pd.sys.a(1);
    let a_last = pd.sys.a(2 * g + 2);
    let scale = a1.abs().max(a_last.abs()) + 1.0;
    // far out the leading differential term suffices:
    // omega_k ~ lead_k / z^2, so u(x) = u(inf) - lead_k / x + O(x^{-2})
    if !x.is_finite() || x.abs() > 1e8 * scale {
        let uinf = abel_infinity(pd);
        if !x.is_finite() {
            return uinf;
        }
        return DVector::from_fn(g, |k, _| uinf[k] - pd.a_inv[(g - 1, k)] / x);
    }
    let center = 0.5 * (a1 + a_last);
    if x < a1 {
        let t1 = 1.0 / (a1 - center);
        let tx = 1.0 / (x - center);
        ray_partial(pd, t1, tx, center, 0)
    } else {
        let t1 = 1.0 / (a_last - center);
        let tx = 1.0 / (x - center);
        let tail = ray_partial(pd, t1, tx, center, 2 * g + 1);
        DVector::from_fn(g, |k, _| if k == g - 1 { 0.5 } else { 0.0 }) + tail
    }
}

/// Integral of `omega` over a piece of an unbounded ray in the `t = 1/(z-c)`
/// coordinate, from `t_from` (a branch point) to `t_to`.
fn ray_partial(
    pd: &PeriodData,
    t_from: f64,
    t_to: f64,
    center: f64,
    endpoint_idx: usize,
) -> DVector<f64> {
    let g = pd.genus();
    if t_from == t_to {
        return DVector::from_element(g, 0.0);
    }
    let (lo, hi, sign) = if t_from < t_to {
        (t_from, t_to, 1.0)
    } else {
        (t_to, t_from, -1.0)
    };
    let seg = SegmentRule::new(&pd.gl, lo, hi);
    let a = pd.sys.endpoints();
    let n_right = if a[endpoint_idx] == pd.sys.a(1) {
        a.len()
    } else {
        0
    };
    let rsign = if (n_right / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = DVector::from_element(g, 0.0);
    for idx in 0..seg.len() {
        let t = seg.z[idx];
        let z = center + 1.0 / t;
        // |z - a_end| = |t_from - t| / |t t_from|, from the rule's stable
        // distance to whichever end is the branch point
        let dist_t = if t_from == lo {
            seg.dist_lo[idx]
        } else {
            seg.dist_hi[idx]
        };
        let mut prod = 1.0;
        for (j, &aj) in a.iter().enumerate() {
            let d = if j == endpoint_idx {
                (dist_t / (t * t_from)).abs()
            } else {
                (z - aj).abs()
            };
            prod *= d;
        }
        let r = rsign * prod.sqrt();
        // dz = -dt / t^2
        let jac = -seg.w[idx] / (t * t);
        for k in 0..g {
            out[k] += sign * jac * pd.p_poly(k, z) / r;
        }
    }
    out
}

/// Abel map of a surface point.  Real points on cuts need a shore; points on
/// the second sheet return the negated value.
pub fn abel_map(pd: &PeriodData, p: SurfacePoint, shore: Option<Shore>) -> Result<DVector<Complex64>> {
    let g = pd.genus();
    let z = p.z;
    let value = if z.im == 0.0 {
        let x = z.re;
        if x < pd.sys.a(1) || x > pd.sys.a(2 * g + 2) {
            abel_map_unbounded(pd, x).map(|v| Complex64::new(v, 0.0))
        } else if pd.sys.is_on_main_arc(x) {
            match shore.ok_or(Error::MissingShore)? {
                Shore::Above => abel_map_plus(pd, x),
                Shore::Below => abel_map_plus(pd, x).map(|c| c.conj()),
            }
        } else {
            // gaps carry the B-period jump, so the shore matters there too;
            // without a tag the upper value is the canonical one
            match shore {
                Some(Shore::Below) => abel_map_plus(pd, x).map(|c| c.conj()),
                _ => abel_map_plus(pd, x),
            }
        }
    } else {
        abel_map_offaxis(pd, z)
    };
    Ok(match p.sheet {
        Sheet::Plus => value,
        Sheet::Minus => -value,
    })
}

/// Abel map off the real axis: anchor at the real-axis value under `z` and
/// integrate up a vertical leg.
///
/// The leg's integrand is analytic in the half plane; nodes cluster at the
/// real end where the nearest branch point sets the resolution scale.  The
/// anchor uses the shore on the side of `z`, so the composition is the
/// analytic continuation of the boundary values.
fn abel_map_offaxis(pd: &PeriodData, z: Complex64) -> DVector<Complex64> {
    let g = pd.genus();
    let x0 = z.re;
    let a1 = pd.sys.a(1);
    let a_last = pd.sys.a(2 * g + 2);
    let anchor: DVector<Complex64> = if x0 < a1 || x0 > a_last {
        abel_map_unbounded(pd, x0).map(|v| Complex64::new(v, 0.0))
    } else if z.im > 0.0 {
        abel_map_plus(pd, x0)
    } else {
        abel_map_plus(pd, x0).map(|c| c.conj())
    };
    let height = Complex64::new(0.0, z.im);
    let a = pd.sys.endpoints();
    let mut leg = DVector::from_element(g, Complex64::new(0.0, 0.0));
    for idx in 0..pd.gl.nodes.len() {
        let t = 0.5 * (pd.gl.nodes[idx] + 1.0);
        let wt = 0.5 * pd.gl.weights[idx];
        let zeta = Complex64::new(x0, 0.0) + height * t * t;
        let jac = 2.0 * height * t * wt;
        let mut s = Complex64::new(0.0, 0.0);
        for &aj in a {
            s += (zeta - aj).ln();
        }
        let r = (0.5 * s).exp();
        for k in 0..g {
            let mut p = Complex64::new(0.0, 0.0);
            let mut zp = Complex64::new(1.0, 0.0);
            for i in 0..g {
                p += pd.a_inv[(i, k)] * zp;
                zp *= zeta;
            }
            leg[k] += jac * p / r;
        }
    }
    anchor + leg
}

/// Reduce a complex vector modulo the period lattice `Z^g + tau Z^g`.
///
/// For purely imaginary `tau` the real and imaginary parts decouple: the
/// integer column vector comes from `Im(tau)^{-1} Im v` and the integer part
/// from the remaining real component.
pub fn lattice_reduce(pd: &PeriodData, v: &DVector<Complex64>) -> DVector<Complex64> {
    let g = pd.genus();
    let y = pd.tau.map(|c| c.im);
    let lu = nalgebra::LU::new(y);
    let im: DVector<f64> = v.map(|c| c.im);
    let n = lu.solve(&im).expect("Im tau invertible").map(|x| x.round());
    let tau_n: DVector<Complex64> = &pd.tau * n.map(|x| Complex64::new(x, 0.0));
    let mut w = v - tau_n;
    for i in 0..g {
        w[i] = Complex64::new(w[i].re - w[i].re.round(), w[i].im);
    }
    w
}

/// The spectral line `W(kappa) = (kappa / i pi) tau_1 + 2 u(inf) + e_1 / 2`,
/// real for real `kappa` because `tau_1` is purely imaginary.
pub fn spectral_line(pd: &PeriodData, ad: &AbelData, kappa: f64) -> DVector<f64> {
    let g = pd.genus();
    DVector::from_fn(g, |i, _| {
        kappa / std::f64::consts::PI * pd.tau[(i, 0)].im
            + 2.0 * ad.u_infinity[i]
            + if i == 0 { 0.5 } else { 0.0 }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_period_data, IntervalSystem};

    fn setup() -> (PeriodData, AbelData) {
        let sys = IntervalSystem::new(vec![-5.0, -3.3, -2.0, 0.1, 1.0, 2.0]).unwrap();
        let pd = build_period_data(&sys, 128).unwrap();
        let ad = build_abel_data(&pd).unwrap();
        (pd, ad)
    }

    #[test]
    fn closed_forms_match_quadrature_at_all_branch_points() {
        let (pd, ad) = setup();
        let g = pd.genus();
        for j in 1..=2 * g + 2 {
            let num = abel_map_plus(&pd, pd.sys.a(j));
            let diff = lattice_reduce(&pd, &(num - &ad.branch_values[j - 1]));
            let err = diff.iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "branch point a_{j}: residual {err:.3e}");
        }
    }

    #[test]
    fn base_point_and_last_point() {
        let (pd, ad) = setup();
        assert!(ad.branch_values[0].iter().all(|c| c.norm() == 0.0));
        let last = &ad.branch_values[2 * pd.genus() + 1];
        assert!((last[0].norm()) < 1e-15);
        assert!((last[1] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn u_infinity_is_real_and_stable() {
        let sys = IntervalSystem::new(vec![-5.0, -3.3, -2.0, 0.1, 1.0, 2.0]).unwrap();
        let lo = build_period_data(&sys, 64).unwrap();
        let hi = build_period_data(&sys, 128).unwrap();
        let ulo = abel_infinity(&lo);
        let uhi = abel_infinity(&hi);
        for i in 0..2 {
            assert!((ulo[i] - uhi[i]).abs() < 1e-9);
        }
        // frozen from the adaptive-quadrature oracle
        assert!((uhi[0] - 0.1517646319926).abs() < 1e-9);
        assert!((uhi[1] - 0.1509891775063).abs() < 1e-9);
    }

    #[test]
    fn jump_relations_at_arc_and_gap_midpoints() {
        let (pd, _ad) = setup();
        let g = pd.genus();
        // u_+ + u_- on main arcs: 0 on gamma_1, sum e_l on interior arcs,
        // e_g on gamma_{g+1}; u_+ - u_- = -tau_k - tau_g on inner gaps,
        // -tau_g on c_0 (u_- is the conjugate of u_+)
        for j in 1..=g + 1 {
            let (lo, hi) = pd.sys.main_arc(j);
            let mid = 0.5 * (lo + hi);
            let up = abel_map_plus(&pd, mid);
            let sum = DVector::from_fn(g, |i, _| Complex64::new(2.0 * up[i].re, 0.0));
            let want: DVector<Complex64> = if j == 1 {
                DVector::from_element(g, Complex64::new(0.0, 0.0))
            } else if j == g + 1 {
                e_k(g, g - 1)
            } else {
                let mut v = DVector::from_element(g, Complex64::new(0.0, 0.0));
                for l in 0..j - 1 {
                    v += e_k(g, l);
                }
                v
            };
            let diff = lattice_reduce(&pd, &(sum - want));
            assert!(
                diff.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-8,
                "arc {j}"
            );
        }
        for k in 0..g {
            let (lo, hi) = pd.sys.gap(k);
            let mid = 0.5 * (lo + hi);
            let up = abel_map_plus(&pd, mid);
            let jump = DVector::from_fn(g, |i, _| Complex64::new(0.0, 2.0 * up[i].im));
            let want = if k == 0 {
                -tau_col(&pd, g - 1)
            } else {
                -tau_col(&pd, k - 1) - tau_col(&pd, g - 1)
            };
            let diff = lattice_reduce(&pd, &(jump - want));
            assert!(
                diff.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-8,
                "gap c_{k}"
            );
        }
    }

    #[test]
    fn shore_limits_match_epsilon_offsets() {
        // the epsilon-limit oracle for the boundary-value convention
        let (pd, _) = setup();
        let mid = 0.5 * (pd.sys.a(3) + pd.sys.a(4));
        let up = abel_map_plus(&pd, mid);
        let eps = 1e-7;
        let off = abel_map_offaxis(&pd, Complex64::new(mid, eps));
        for i in 0..2 {
            assert!((up[i] - off[i]).norm() < 1e-5, "{} vs {}", up[i], off[i]);
        }
    }

    #[test]
    fn unbounded_route_continuous_through_infinity() {
        let (pd, ad) = setup();
        let far_left = abel_map_unbounded(&pd, -1e8);
        let far_right = abel_map_unbounded(&pd, 1e8);
        for i in 0..2 {
            assert!((far_left[i] - ad.u_infinity[i]).abs() < 1e-6);
            assert!((far_right[i] - ad.u_infinity[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn spectral_line_is_real_with_the_right_slope_and_base() {
        let (pd, ad) = setup();
        let w0 = spectral_line(&pd, &ad, 0.0);
        for i in 0..2 {
            let want = 2.0 * ad.u_infinity[i] + if i == 0 { 0.5 } else { 0.0 };
            assert!((w0[i] - want).abs() < 1e-14);
        }
        // moving kappa by pi / Im tau_11 advances the first component by 1
        let period = std::f64::consts::PI / pd.tau[(0, 0)].im;
        let w1 = spectral_line(&pd, &ad, 5.0);
        let w2 = spectral_line(&pd, &ad, 5.0 + period);
        assert!((w2[0] - w1[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w0_structure() {
        let (pd, ad) = setup();
        assert!((ad.w0[0].re + 0.5).abs() < 1e-14);
        assert!((ad.w0[1].re + 0.5).abs() < 1e-14);
        for i in 0..2 {
            assert!((ad.w0[i].im - 0.5 * pd.tau[(i, 0)].im).abs() < 1e-14);
        }
    }

    #[test]
    fn sheet_exchange_negates() {
        let (pd, _) = setup();
        let z = Complex64::new(0.5, 0.8);
        let p1 = abel_map(&pd, SurfacePoint::new(z, Sheet::Plus), None).unwrap();
        let p2 = abel_map(&pd, SurfacePoint::new(z, Sheet::Minus), None).unwrap();
        for i in 0..2 {
            assert!((p1[i] + p2[i]).norm() < 1e-14);
        }
    }
}
