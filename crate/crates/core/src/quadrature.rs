//! Weighted circle, disk, annulus and improper radial integrals.
//!
//! Circle and angular rules use midpoint nodes `theta_i = (i + 1/2) * 2pi/n`
//! so quadrature never lands exactly on nodal rays; the radial direction uses
//! Gauss-Legendre. Characteristic-function integrands are only first-order
//! accurate at the jump, so callers flag them and the angular node count is
//! doubled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Point2;

/// Node counts and cutoff controlling every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Circle nodes (even, >= 16).
    pub circle_nodes: usize,
    /// Radial Gauss-Legendre nodes for disk integrals.
    pub disk_radial_nodes: usize,
    /// Angular nodes for disk integrals.
    pub disk_angular_nodes: usize,
    /// Improper integrals are resolved on [c_min * r, r] and the rest is a
    /// fitted power-law tail; c_min in (0, 0.1].
    pub cutoff_fraction: f64,
    /// Record tail fractions and fitted exponents.
    pub convergence_monitor: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            circle_nodes: 512,
            disk_radial_nodes: 64,
            disk_angular_nodes: 256,
            cutoff_fraction: 1e-3,
            convergence_monitor: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.circle_nodes < 16 || self.circle_nodes % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "circle nodes must be even and >= 16, got {}",
                self.circle_nodes
            )));
        }
        if self.disk_radial_nodes < 2 || self.disk_angular_nodes < 16 {
            return Err(Error::InvalidSpec("disk node counts too small".into()));
        }
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 0.1) {
            return Err(Error::InvalidSpec(format!(
                "cutoff fraction {} outside (0, 0.1]",
                self.cutoff_fraction
            )));
        }
        Ok(())
    }

    /// Spec with all node counts doubled (convergence studies).
    pub fn doubled(&self) -> Self {
        Self {
            circle_nodes: self.circle_nodes * 2,
            disk_radial_nodes: self.disk_radial_nodes * 2,
            disk_angular_nodes: self.disk_angular_nodes * 2,
            ..*self
        }
    }

    /// Reduced node counts for the inner integrals of nested quadrature.
    pub(crate) fn inner(&self) -> Self {
        Self {
            circle_nodes: (self.circle_nodes / 2).max(64),
            disk_radial_nodes: (self.disk_radial_nodes / 2).max(16),
            disk_angular_nodes: (self.disk_angular_nodes / 2).max(64),
            ..*self
        }
    }
}

/// Smoothness class of an integrand; jumps double the angular resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrandClass {
    #[default]
    Smooth,
    /// Contains a characteristic factor or another angular jump.
    Jump,
}

fn angular_count(base: usize, class: IntegrandClass) -> usize {
    match class {
        IntegrandClass::Smooth => base,
        IntegrandClass::Jump => base * 2,
    }
}

/// Line integral over the circle of radius `r` about `center`:
/// `r * sum g(center + r e(theta_i)) dtheta` on midpoint nodes.
pub fn circle_integral<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> f64 {
    circle_integral_with(g, center, r, spec, IntegrandClass::Smooth)
}

pub fn circle_integral_with<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
    class: IntegrandClass,
) -> f64 {
    let n = angular_count(spec.circle_nodes, class);
    let dt = 2.0 * PI / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let t = (i as f64 + 0.5) * dt;
        let (st, ct) = t.sin_cos();
        acc += g(Point2::new(center.x + r * ct, center.y + r * st));
    }
    acc * r * dt
}

/// Disk integral over `B_r(center)`: Gauss-Legendre in rho times midpoint in
/// theta, with the polar jacobian.
pub fn disk_integral<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> f64 {
    disk_integral_with(g, center, r, spec, IntegrandClass::Smooth)
}

pub fn disk_integral_with<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
    class: IntegrandClass,
) -> f64 {
    annulus_integral_with(g, center, 0.0, r, spec, class)
}

/// Integral over the annulus `r_inner <= |X - center| <= r_outer`.
pub fn annulus_integral<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r_inner: f64,
    r_outer: f64,
    spec: &QuadratureSpec,
) -> f64 {
    annulus_integral_with(g, center, r_inner, r_outer, spec, IntegrandClass::Smooth)
}

pub fn annulus_integral_with<G: Fn(Point2) -> f64>(
    g: G,
    center: Point2,
    r_inner: f64,
    r_outer: f64,
    spec: &QuadratureSpec,
    class: IntegrandClass,
) -> f64 {
    let ntheta = angular_count(spec.disk_angular_nodes, class);
    let dt = 2.0 * PI / ntheta as f64;
    let gl = gauss_legendre(spec.disk_radial_nodes);
    let trig: Vec<(f64, f64)> = (0..ntheta)
        .map(|i| ((i as f64 + 0.5) * dt).sin_cos())
        .collect();
    let mut acc = 0.0;
    for (xi, wi) in gl.iter() {
        // map [-1, 1] -> [r_inner, r_outer]
        let rho = 0.5 * (r_outer - r_inner) * xi + 0.5 * (r_outer + r_inner);
        let wr = 0.5 * (r_outer - r_inner) * wi * rho;
        let mut ring = 0.0;
        for (st, ct) in &trig {
            ring += g(Point2::new(center.x + rho * ct, center.y + rho * st));
        }
        acc += wr * ring;
    }
    acc * dt
}

/// Multi-accumulator disk pass: one traversal of the nodes, `eval` fills a
/// slice of integrand values per node and returns the phase indicator there.
/// Adjacent nodes with different indicators mark a jump; the jump angle is
/// located by bisection and the two affected cells are split at it, which
/// restores second-order accuracy for characteristic-function integrands.
/// Used by the functionals to share the expensive field evaluations.
pub(crate) fn disk_pass<E>(
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
    class: IntegrandClass,
    n_acc: usize,
    eval: E,
) -> Vec<f64>
where
    E: Fn(Point2, &mut [f64]) -> f64,
{
    let ntheta = angular_count(spec.disk_angular_nodes, class);
    let gl = gauss_legendre(spec.disk_radial_nodes);
    let mut acc = vec![0.0; n_acc];
    let mut ring = vec![0.0; n_acc];
    for (xi, wi) in gl.iter() {
        let rho = 0.5 * r * (xi + 1.0);
        let wr = 0.5 * r * wi * rho;
        angular_sweep(ntheta, &mut ring, |theta, out| {
            let (st, ct) = theta.sin_cos();
            eval(Point2::new(center.x + rho * ct, center.y + rho * st), out)
        });
        for (a, v) in acc.iter_mut().zip(&ring) {
            *a += wr * v;
        }
    }
    acc
}

/// Counterpart of [`disk_pass`] on the circle, with the outer normal.
pub(crate) fn circle_pass<E>(
    center: Point2,
    r: f64,
    spec: &QuadratureSpec,
    class: IntegrandClass,
    n_acc: usize,
    eval: E,
) -> Vec<f64>
where
    E: Fn(Point2, [f64; 2], &mut [f64]) -> f64,
{
    let n = angular_count(spec.circle_nodes, class);
    let mut acc = vec![0.0; n_acc];
    angular_sweep(n, &mut acc, |theta, out| {
        let (st, ct) = theta.sin_cos();
        eval(
            Point2::new(center.x + r * ct, center.y + r * st),
            [ct, st],
            out,
        )
    });
    for a in acc.iter_mut() {
        *a *= r;
    }
    acc
}

/// Jump-corrected midpoint sweep over one angular period. `out` receives
/// `int_0^{2pi} g(theta) dtheta` per accumulator.
fn angular_sweep<E>(n: usize, out: &mut [f64], eval: E)
where
    E: Fn(f64, &mut [f64]) -> f64,
{
    let dt = 2.0 * PI / n as f64;
    let n_acc = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut vals = vec![0.0; n_acc];
    let mut node_vals: Vec<f64> = Vec::with_capacity(n * n_acc);
    let mut chi = vec![false; n];
    for i in 0..n {
        let t = (i as f64 + 0.5) * dt;
        vals.iter_mut().for_each(|v| *v = 0.0);
        chi[i] = eval(t, &mut vals) > 0.5;
        node_vals.extend_from_slice(&vals);
        for (a, v) in out.iter_mut().zip(&vals) {
            *a += v;
        }
    }
    // locate indicator transitions between adjacent nodes (periodic)
    for i in 0..n {
        let j = (i + 1) % n;
        if chi[i] == chi[j] {
            continue;
        }
        let ti = (i as f64 + 0.5) * dt;
        let tj = ti + dt;
        // bisect the transition angle
        let (mut a, mut b) = (ti, tj);
        let chi_a = chi[i];
        for _ in 0..45 {
            let mid = 0.5 * (a + b);
            vals.iter_mut().for_each(|v| *v = 0.0);
            if (eval(mid, &mut vals) > 0.5) == chi_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        let t_star = 0.5 * (a + b);
        // split the two cells [ti - dt/2, tj + dt/2] at the located jump
        let lo = ti - 0.5 * dt;
        let hi = tj + 0.5 * dt;
        let wl = t_star - lo;
        let wr = hi - t_star;
        let mut left = vec![0.0; n_acc];
        eval(0.5 * (lo + t_star), &mut left);
        let mut right = vec![0.0; n_acc];
        eval(0.5 * (t_star + hi), &mut right);
        for m in 0..n_acc {
            let midpoint_part = node_vals[i * n_acc + m] + node_vals[j * n_acc + m];
            out[m] += (wl * left[m] + wr * right[m]) / dt - midpoint_part;
        }
    }
    for v in out.iter_mut() {
        *v *= dt;
    }
}

/// Result of an improper radial integral `int_0^r t^{-k} Q(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImproperResult {
    pub value: f64,
    /// |tail| / (|resolved| + |tail|); 0 when the tail is negligible.
    pub tail_fraction: f64,
    /// Fitted exponent p of the integrand `t^{-k} Q(t) ~ a t^p` near zero.
    pub fitted_exponent: f64,
    /// Set when the fitted exponent says the integrand is not integrable.
    pub integrability_warning: bool,
}

/// `int_0^r t^{-k} Q(t) dt` with `Q` evaluable on `(c_min * r, r]`: composite
/// Gauss-Legendre panels on a geometric subdivision of `[c_min r, r]`, plus a
/// power-law tail on `(0, c_min r)` fitted from the two smallest sampled
/// decades.
pub fn improper_radial_integral<Q: Fn(f64) -> f64>(
    q: Q,
    r: f64,
    k: u32,
    spec: &QuadratureSpec,
) -> ImproperResult {
    improper_radial_multi(|t| [q(t)], r, [k], spec)[0]
}

/// Batched improper integrals sharing one set of `Q` samples: component `m`
/// is `int_0^r t^{-ks[m]} Q(t)[m] dt`. The panel layout and tail treatment
/// match [`improper_radial_integral`].
pub(crate) fn improper_radial_multi<const M: usize, Q: Fn(f64) -> [f64; M]>(
    q: Q,
    r: f64,
    ks: [u32; M],
    spec: &QuadratureSpec,
) -> [ImproperResult; M] {
    let c = spec.cutoff_fraction;
    let lo = c * r;
    let decades = (1.0 / c).log10();
    let panels = (4.0 * decades).ceil() as usize;
    let ratio = (r / lo).powf(1.0 / panels as f64);
    let gl = gauss_legendre(8);

    let mut resolved = [0.0_f64; M];
    let mut a = lo;
    for _ in 0..panels {
        let b = (a * ratio).min(r);
        for (xi, wi) in gl.iter() {
            let t = 0.5 * (b - a) * xi + 0.5 * (b + a);
            let qv = q(t);
            for m in 0..M {
                resolved[m] += 0.5 * (b - a) * wi * qv[m] * t.powi(-(ks[m] as i32));
            }
        }
        a = b;
    }

    // Fit |integrand| ~ a t^p on the two smallest sampled decades.
    let fit_hi = lo * 100.0_f64.min(1.0 / c);
    let n_fit = 9;
    let mut samples = Vec::with_capacity(n_fit);
    for i in 0..n_fit {
        let t = lo * (fit_hi / lo).powf(i as f64 / (n_fit - 1) as f64);
        samples.push((t, q(t)));
    }

    std::array::from_fn(|m| {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|(t, qv)| (*t, qv[m] * t.powi(-(ks[m] as i32))))
            .collect();
        let scale = pts.iter().map(|(_, v)| v.abs()).fold(0.0_f64, f64::max);
        let (tail, exponent, warn) = if scale <= 1e-300 {
            // integrand vanishes near the origin
            (0.0, f64::INFINITY, false)
        } else {
            let fit: Vec<(f64, f64)> = pts
                .iter()
                .filter(|(_, v)| v.abs() > 1e-13 * scale)
                .map(|(t, v)| (t.ln(), v.abs().ln()))
                .collect();
            if fit.len() < 3 {
                (0.0, f64::INFINITY, false)
            } else {
                let (p, intercept) = least_squares_line(&fit);
                let rms = (fit
                    .iter()
                    .map(|(x, y)| (y - intercept - p * x).powi(2))
                    .sum::<f64>()
                    / fit.len() as f64)
                    .sqrt();
                // median sign over the fit window
                let mut signs: Vec<f64> = pts.iter().map(|(_, v)| v.signum()).collect();
                signs.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let sign = signs[signs.len() / 2];
                if rms > 0.5 {
                    // no power law in sight: samples are at the quadrature
                    // floor, treat the tail as numerically unresolved
                    (0.0, f64::NAN, false)
                } else if p <= -1.0 {
                    (0.0, p, true)
                } else {
                    let amp = intercept.exp();
                    (sign * amp * lo.powf(p + 1.0) / (p + 1.0), p, false)
                }
            }
        };
        let denom = resolved[m].abs() + tail.abs();
        ImproperResult {
            value: resolved[m] + tail,
            tail_fraction: if denom > 0.0 { tail.abs() / denom } else { 0.0 },
            fitted_exponent: exponent,
            integrability_warning: warn,
        }
    })
}

fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence; cached per node count.
pub fn gauss_legendre(n: usize) -> std::sync::Arc<Vec<(f64, f64)>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let computed = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, computed.clone());
    computed
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let m = n.div_ceil(2);
    let mut all = vec![(0.0, 0.0); n];
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        all[i] = (-x, w);
        all[n - 1 - i] = (x, w);
    }
    all
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_matches_reference() {
        let gl = gauss_legendre(5);
        let xs: Vec<f64> = gl.iter().map(|(x, _)| *x).collect();
        let ws: Vec<f64> = gl.iter().map(|(_, w)| *w).collect();
        let ref_x = [-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664];
        let ref_w = [0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366, 0.236926885056189];
        for i in 0..5 {
            assert_relative_eq!(xs[i], ref_x[i], epsilon = 1e-13);
            assert_relative_eq!(ws[i], ref_w[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_exact_on_high_degree_polynomials() {
        for n in [2usize, 8, 17, 64] {
            let gl = gauss_legendre(n);
            assert_eq!(gl.len(), n);
            let wsum: f64 = gl.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(wsum, 2.0, epsilon = 1e-13);
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let val: f64 = gl.iter().map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = 2.0 / deg as f64; // int x^{deg-1}, deg-1 even
            assert_relative_eq!(val, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn circle_circumference() {
        let spec = QuadratureSpec::default();
        let got = circle_integral(|_| 1.0, Point2::new(1.0, 0.0), 0.5, &spec);
        assert!((got - std::f64::consts::PI).abs() <= 1e-12);
    }

    #[test]
    fn circle_weighted_cubic() {
        // psi = x^2, g = psi^2 / x = x^3 on the circle about (1, 0), r = 1/4:
        // closed form 2 pi r (x0^3 + 1.5 x0 r^2).
        let spec = QuadratureSpec::default();
        let got = circle_integral(
            |p| p.x.powi(4) / p.x,
            Point2::new(1.0, 0.0),
            0.25,
            &spec,
        );
        let exact = 2.0 * PI * 0.25 * (1.0 + 1.5 * 0.25 * 0.25);
        assert_relative_eq!(got, exact, max_relative = 1e-12);
        assert!((exact - 1.7181).abs() < 1e-3);
    }

    #[test]
    fn disk_area_and_moment() {
        let spec = QuadratureSpec::default();
        let area = disk_integral(|_| 1.0, Point2::new(1.0, 0.0), 1.0, &spec);
        assert_relative_eq!(area, PI, max_relative = 1e-12);

        // int_{B_1} y+ dX = 2/3; the kink along y = 0 costs the spectral
        // rate, leaving the O(dtheta^2) midpoint error per smooth piece
        let m = disk_integral(|p| p.y.max(0.0), Point2::new(1.0, 0.0), 1.0, &spec);
        assert_relative_eq!(m, 2.0 / 3.0, max_relative = 1e-4);
    }

    #[test]
    fn disk_wedge_density() {
        // int_{B_1} y+ chi_{pi/6 < theta < 5pi/6} = sqrt(3)/3
        let spec = QuadratureSpec::default();
        let x0 = Point2::new(1.0, 0.0);
        let got = disk_integral_with(
            |p| {
                let theta = p.y.atan2(p.x - x0.x);
                if theta > PI / 6.0 && theta < 5.0 * PI / 6.0 {
                    p.y.max(0.0)
                } else {
                    0.0
                }
            },
            x0,
            1.0,
            &spec,
            IntegrandClass::Jump,
        );
        // plain rule is first order at the wedge jump
        assert_relative_eq!(got, 3.0_f64.sqrt() / 3.0, max_relative = 5e-3);
    }

    #[test]
    fn jump_integrand_first_order_convergence() {
        // indicator arc on the circle: closed form r * (pi - a)
        let x0 = Point2::new(1.0, 0.0);
        let a = 0.4321;
        let g = move |p: Point2| {
            let theta = p.y.atan2(p.x - x0.x);
            if theta > a {
                1.0
            } else {
                0.0
            }
        };
        let exact = 0.5 * (PI - a);
        let err = |n: usize| {
            let spec = QuadratureSpec { circle_nodes: n, ..Default::default() };
            (circle_integral(g, x0, 0.5, &spec) - exact).abs()
        };
        // averaged over a few node counts the jump error is O(1/n)
        let coarse = err(64) + err(96) + err(80);
        let fine = err(128) + err(192) + err(160);
        assert!(fine <= 0.75 * coarse, "coarse = {coarse}, fine = {fine}");
    }

    #[test]
    fn annulus_additivity() {
        let spec = QuadratureSpec::default();
        let c = Point2::new(1.0, 0.0);
        let g = |p: Point2| p.x * p.x + p.y;
        let whole = disk_integral(g, c, 0.8, &spec);
        let inner = disk_integral(g, c, 0.3, &spec);
        let ring = annulus_integral(g, c, 0.3, 0.8, &spec);
        assert_relative_eq!(whole, inner + ring, max_relative = 1e-12);
    }

    #[test]
    fn divergence_theorem_on_polynomials() {
        // v = (x^2 y, x - y^3): div v = 2xy - 3y^2
        let spec = QuadratureSpec::default();
        let c = Point2::new(1.2, 0.1);
        let r = 0.7;
        let lhs = disk_integral(|p| 2.0 * p.x * p.y - 3.0 * p.y * p.y, c, r, &spec);
        let rhs = {
            let n = spec.circle_nodes;
            let dt = 2.0 * PI / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let t = (i as f64 + 0.5) * dt;
                let (st, ct) = t.sin_cos();
                let p = Point2::new(c.x + r * ct, c.y + r * st);
                let v = [p.x * p.x * p.y, p.x - p.y * p.y * p.y];
                acc += (v[0] * ct + v[1] * st) * r * dt;
            }
            acc
        };
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
    }

    #[test]
    fn doubling_nodes_is_stable_on_smooth_integrands() {
        let spec = QuadratureSpec::default();
        let c = Point2::new(1.0, 0.0);
        let g = |p: Point2| (p.x * p.y).exp() / p.x;
        let a = disk_integral(g, c, 0.5, &spec);
        let b = disk_integral(g, c, 0.5, &spec.doubled());
        assert_relative_eq!(a, b, max_relative = 1e-10);
        let ca = circle_integral(g, c, 0.5, &spec);
        let cb = circle_integral(g, c, 0.5, &spec.doubled());
        assert_relative_eq!(ca, cb, max_relative = 1e-10);
    }

    #[test]
    fn improper_polynomial_cases() {
        let spec = QuadratureSpec::default();
        // Q(t) = t^5, k = 4: int_0^r t dt = r^2/2
        let r = 0.3;
        let got = improper_radial_integral(|t| t.powi(5), r, 4, &spec);
        assert_relative_eq!(got.value, r * r / 2.0, max_relative = 1e-9);
        assert!(!got.integrability_warning);

        // Q(t) = t^5 (1 + t): r^2/2 + r^3/3
        // the fitted power-law tail carries a small curvature bias
        let got = improper_radial_integral(|t| t.powi(5) * (1.0 + t), r, 4, &spec);
        assert_relative_eq!(got.value, r * r / 2.0 + r.powi(3) / 3.0, max_relative = 1e-8);
    }

    #[test]
    fn improper_zero_integrand() {
        let spec = QuadratureSpec::default();
        let got = improper_radial_integral(|_| 0.0, 0.5, 5, &spec);
        assert_eq!(got.value, 0.0);
        assert_eq!(got.tail_fraction, 0.0);
        assert!(!got.integrability_warning);
    }

    #[test]
    fn improper_divergent_tail_warns() {
        // Q(t) = t^2, k = 4: integrand t^-2, not integrable at 0
        let spec = QuadratureSpec::default();
        let got = improper_radial_integral(|t| t * t, 0.5, 4, &spec);
        assert!(got.integrability_warning);
        assert!(got.fitted_exponent <= -1.0);
    }

    #[test]
    fn linearity_and_sector_additivity() {
        let spec = QuadratureSpec::default();
        let c = Point2::new(1.0, 0.0);
        let g1 = |p: Point2| p.x;
        let g2 = |p: Point2| p.y * p.y;
        let lin = circle_integral(|p| 2.0 * g1(p) - 3.0 * g2(p), c, 0.4, &spec);
        let parts = 2.0 * circle_integral(g1, c, 0.4, &spec) - 3.0 * circle_integral(g2, c, 0.4, &spec);
        assert_relative_eq!(lin, parts, max_relative = 1e-12);

        // disjoint angular sectors add up to the full disk
        let upper = disk_integral_with(
            |p| if p.y > c.y { p.x } else { 0.0 },
            c,
            0.4,
            &spec,
            IntegrandClass::Jump,
        );
        let lower = disk_integral_with(
            |p| if p.y <= c.y { p.x } else { 0.0 },
            c,
            0.4,
            &spec,
            IntegrandClass::Jump,
        );
        let full = disk_integral(|p| p.x, c, 0.4, &spec);
        assert_relative_eq!(upper + lower, full, max_relative = 1e-10);
    }
}
