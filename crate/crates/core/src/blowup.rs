//! Blow-up rescalings, homogeneity estimation and limit-profile distances.
//!
//! The boundary-norm rescaling `phi_r(X) = psi(X0 + r X) / n(r)` with
//! `n(r)^2 = r^-1 int_{dB_r} psi^2/x` has unit weighted boundary norm by
//! construction; as `r -> 0` it approaches a homogeneous profile whose degree
//! is the frequency limit. Distances to candidate profiles are measured in
//! relative L2 on the annulus `1/4 <= |X| <= 3/4`, staying clear of both the
//! origin and the outer rim where the convergence degrades.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Point2, ScalarField2D, VorticitySource};
use crate::functionals::{
    extrapolate_zero_limit, AnalysisWindow, Ctx, DENOMINATOR_GUARD,
};
use crate::quadrature::{annulus_integral, circle_integral, QuadratureSpec};

/// Inner and outer annulus radii used for all profile comparisons.
pub const ANNULUS: (f64, f64) = (0.25, 0.75);

/// Weighted boundary norm `int_{dB_r(X0)} psi^2/x dH^1`.
pub fn weighted_boundary_norm(
    field: &ScalarField2D,
    x0: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> f64 {
    circle_integral(
        |p| {
            let v = field.value(p);
            v * v / p.x
        },
        x0,
        r,
        spec,
    )
}

/// A boundary-norm-normalized rescaling of the field at one scale.
#[derive(Clone)]
pub struct BlowupFrame {
    x0: Point2,
    scale: f64,
    normalization: f64,
    field: ScalarField2D,
}

impl std::fmt::Debug for BlowupFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BlowupFrame {{ x0: ({}, {}), scale: {}, normalization: {} }}",
            self.x0.x, self.x0.y, self.scale, self.normalization
        )
    }
}

impl BlowupFrame {
    pub fn x0(&self) -> Point2 {
        self.x0
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `phi_r(X)` for `|X| <= 1` (frame coordinates).
    pub fn eval(&self, x: Point2) -> f64 {
        self.field.value(Point2::new(
            self.x0.x + self.scale * x.x,
            self.x0.y + self.scale * x.y,
        )) / self.normalization
    }

    /// Frame-coordinate gradient `r grad psi(X0 + r X) / n(r)`.
    pub fn grad(&self, x: Point2) -> [f64; 2] {
        let g = self.field.gradient(Point2::new(
            self.x0.x + self.scale * x.x,
            self.x0.y + self.scale * x.y,
        ));
        [
            self.scale * g[0] / self.normalization,
            self.scale * g[1] / self.normalization,
        ]
    }
}

/// Boundary-norm rescaling at scale `r`.
pub fn rescale_phi(
    field: &ScalarField2D,
    x0: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<BlowupFrame> {
    field.window().require_ball(x0, r)?;
    let norm_sq = weighted_boundary_norm(field, x0, r, spec) / r;
    if norm_sq / r.powi(4) < DENOMINATOR_GUARD {
        return Err(Error::DegenerateDenominator { r, norm: norm_sq });
    }
    Ok(BlowupFrame {
        x0,
        scale: r,
        normalization: norm_sq.sqrt(),
        field: field.clone(),
    })
}

/// The 3/2-power rescaling `X -> psi(X0 + r X)/r^{3/2}` as a field on the
/// mapped window.
pub fn rescale_psi32(field: &ScalarField2D, x0: Point2, r: f64) -> Result<ScalarField2D> {
    field.window().require_ball(x0, r)?;
    let w = field.window();
    let mapped = crate::field::Window::new(
        (w.xmin - x0.x) / r,
        (w.xmax - x0.x) / r,
        (w.ymin - x0.y) / r,
        (w.ymax - x0.y) / r,
    )?;
    let inner = field.clone();
    let scale = r.powf(1.5);
    Ok(ScalarField2D::analytic(mapped, move |p| {
        inner.value(Point2::new(x0.x + r * p.x, x0.y + r * p.y)) / scale
    }))
}

/// How a homogeneity degree was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HomogeneityMethod {
    /// Slope of `log sqrt(int_{dB_r} psi^2/x)` vs `log r`, minus 1/2.
    BoundaryNormSlope,
    /// Zero-radius extrapolation of the frequency ratio `D(r)`.
    FrequencyPlateau,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HomogeneityEstimate {
    pub lambda: f64,
    /// Fit residual / extrapolation uncertainty of the estimate.
    pub residual: f64,
    pub method: HomogeneityMethod,
    pub radius_range: (f64, f64),
}

/// Both homogeneity estimates plus a cross-scale consistency check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HomogeneityFit {
    pub frequency: HomogeneityEstimate,
    pub boundary_norm: HomogeneityEstimate,
    /// Relative annulus distance between the frames at `r_max` and `r_max/2`;
    /// near zero only for (asymptotically) homogeneous fields.
    pub scale_consistency: f64,
    /// Methods agree and the field is scale-consistent.
    pub consistent: bool,
}

impl HomogeneityFit {
    /// The frequency-plateau estimate (ratio of same-quadrature integrals,
    /// cancels the leading quadrature bias).
    pub fn primary(&self) -> HomogeneityEstimate {
        self.frequency
    }
}

/// Estimate the homogeneity degree of the field about the window center.
pub fn fit_homogeneity(
    field: &ScalarField2D,
    window: &AnalysisWindow,
    spec: &QuadratureSpec,
) -> Result<HomogeneityFit> {
    let x0 = window.x0();
    let vort = VorticitySource::zero();
    let ctx = Ctx { field, vort: &vort, x0, spec };

    let mut norms: Vec<(f64, f64)> = Vec::new();
    let mut d_samples: Vec<(f64, f64)> = Vec::new();
    for &r in window.radii() {
        let eval = ctx.evaluate(r, spec);
        if eval.degenerate() {
            continue;
        }
        norms.push((r, eval.circ.psi2_w));
        d_samples.push((r, eval.d_pair().volume));
    }
    if norms.len() < 6 {
        return Err(Error::InsufficientData { need: 6, got: norms.len() });
    }
    let range = (
        norms.iter().map(|(r, _)| *r).fold(f64::INFINITY, f64::min),
        norms.iter().map(|(r, _)| *r).fold(0.0_f64, f64::max),
    );

    // boundary-norm slope over the whole grid
    let pts: Vec<(f64, f64)> = norms.iter().map(|(r, s)| (r.ln(), 0.5 * s.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let rms = (pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n)
        .sqrt();
    // int_{dB_r} psi^2/x ~ r^{2 lambda + 1}
    let boundary_norm = HomogeneityEstimate {
        lambda: slope - 0.5,
        residual: rms,
        method: HomogeneityMethod::BoundaryNormSlope,
        radius_range: range,
    };

    let (d0, sigma) = extrapolate_zero_limit(&d_samples)?;
    let frequency = HomogeneityEstimate {
        lambda: d0,
        residual: sigma,
        method: HomogeneityMethod::FrequencyPlateau,
        radius_range: range,
    };

    // frames half a scale apart coincide only for homogeneous fields
    let r_max = range.1;
    let fa = rescale_phi(field, x0, r_max, spec)?;
    let fb = rescale_phi(field, x0, 0.5 * r_max, spec)?;
    let scale_consistency = annulus_l2_distance(
        |p| fa.eval(p),
        |p| fb.eval(p),
        ANNULUS.0,
        ANNULUS.1,
        spec,
    );

    let consistent = (frequency.lambda - boundary_norm.lambda).abs()
        <= 0.1 * (1.0 + frequency.lambda.abs())
        && scale_consistency <= 0.02
        && frequency.residual <= 0.1 * (1.0 + frequency.lambda.abs());
    Ok(HomogeneityFit { frequency, boundary_norm, scale_consistency, consistent })
}

/// Relative L2 distance `|u - v| / |v|` over the annulus about the origin.
pub fn annulus_l2_distance<U, V>(u: U, v: V, inner: f64, outer: f64, spec: &QuadratureSpec) -> f64
where
    U: Fn(Point2) -> f64,
    V: Fn(Point2) -> f64,
{
    let origin = Point2::new(0.0, 0.0);
    let diff = annulus_integral(
        |p| {
            let d = u(p) - v(p);
            d * d
        },
        origin,
        inner,
        outer,
        spec,
    );
    let norm = annulus_integral(
        |p| {
            let w = v(p);
            w * w
        },
        origin,
        inner,
        outer,
        spec,
    );
    (diff / norm.max(1e-300)).sqrt()
}

/// Candidate limit profiles in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LimitProfile {
    /// The 3/2-homogeneous corner profile in the wedge `pi/6 < theta < 5pi/6`.
    Corner { x0: f64 },
    /// `sqrt(x0) rho^N |sin(N theta)|`, unit weighted boundary norm.
    FrequencyN { x0: f64, n: u32 },
}

impl LimitProfile {
    /// Profile value, normalized to unit weighted boundary norm
    /// `int_{dB_1} p^2 / x0 dH^1 = 1`.
    pub fn eval(&self, p: Point2) -> f64 {
        match *self {
            LimitProfile::Corner { x0 } => {
                let rho = p.x.hypot(p.y);
                let theta = p.y.atan2(p.x);
                if theta <= PI / 6.0 || theta >= 5.0 * PI / 6.0 {
                    return 0.0;
                }
                let c = (2.0_f64).sqrt() * x0 / 3.0;
                let raw = c * rho.powf(1.5) * (1.5 * (theta - PI / 2.0)).cos();
                // int_{dB_1} c^2 cos^2 / x0 = (2 x0 / 9)(pi / 3)
                raw / (2.0 * PI * x0 / 27.0).sqrt()
            }
            LimitProfile::FrequencyN { x0, n } => {
                if p.y <= 0.0 {
                    return 0.0;
                }
                let rho = p.x.hypot(p.y);
                let theta = p.y.atan2(p.x);
                x0.sqrt() * rho.powi(n as i32) * (f64::from(n) * theta).sin().abs()
                    / (PI / 2.0).sqrt()
            }
        }
    }
}

/// Relative L2 distance between a frame and a normalized candidate profile
/// on the comparison annulus.
pub fn limit_profile_distance(
    frame: &BlowupFrame,
    profile: LimitProfile,
    spec: &QuadratureSpec,
) -> f64 {
    annulus_l2_distance(
        |p| frame.eval(p),
        |p| profile.eval(p),
        ANNULUS.0,
        ANNULUS.1,
        spec,
    )
}

/// Degenerate-direction residual
/// `int_{annulus} (1/x0) |X|^-5 (grad phi . X - lambda phi)^2 dX`;
/// vanishes as the scale shrinks when the blow-up limit is
/// `lambda`-homogeneous.
pub fn directional_residual(
    frame: &BlowupFrame,
    lambda: f64,
    inner: f64,
    outer: f64,
    spec: &QuadratureSpec,
) -> f64 {
    let x0 = frame.x0().x;
    annulus_integral(
        |p| {
            let g = frame.grad(p);
            let phi = frame.eval(p);
            let rho2 = p.x * p.x + p.y * p.y;
            let dev = g[0] * p.x + g[1] * p.y - lambda * phi;
            dev * dev / (x0 * rho2.powf(2.5))
        },
        Point2::new(0.0, 0.0),
        inner,
        outer,
        spec,
    )
}

/// One-sided angular-derivative jump `g'(theta0+) - g'(theta0-)` by
/// second-order finite differences.
pub fn angular_derivative_jump<G: Fn(f64) -> f64>(g: G, theta0: f64, h: f64) -> f64 {
    let above = (-3.0 * g(theta0) + 4.0 * g(theta0 + h) - g(theta0 + 2.0 * h)) / (2.0 * h);
    let below = (3.0 * g(theta0) - 4.0 * g(theta0 - h) + g(theta0 - 2.0 * h)) / (2.0 * h);
    above - below
}

/// Angular-derivative jump density of `rho^N |sin(N theta)|` across an
/// interior nodal ray at `rho = 1`: the distributional Laplacian of the
/// profile concentrates on the rays with line density `2 N rho^{N-1}`, so a
/// nonzero return certifies the profile is not harmonic. Returns `~2N`.
pub fn nodal_ray_laplacian(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!(
            "nodal-ray profiles need N >= 2, got {n}"
        )));
    }
    let nf = f64::from(n);
    let ray = PI / nf;
    Ok(angular_derivative_jump(
        move |theta| (nf * theta).sin().abs(),
        ray,
        1e-5,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_synthetic, SyntheticProfileSpec};
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn degenerate(n: u32) -> ScalarField2D {
        make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n }).unwrap()
    }

    #[test]
    fn frame_has_unit_boundary_norm() {
        let f = degenerate(2);
        let x0 = Point2::new(1.0, 0.0);
        let frame = rescale_phi(&f, x0, 0.1, &spec()).unwrap();
        // int_{dB_1} phi^2 / (x0 + r x) dH^1 = 1 by construction
        let norm = circle_integral(
            |p| {
                let v = frame.eval(p);
                v * v / (1.0 + 0.1 * p.x)
            },
            Point2::new(0.0, 0.0),
            1.0,
            &spec(),
        );
        assert_relative_eq!(norm, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn frame_invariant_under_scaling() {
        let f = degenerate(3);
        let x0 = Point2::new(1.0, 0.0);
        let frame = rescale_phi(&f, x0, 0.05, &spec()).unwrap();
        let scaled = {
            let inner = f.clone();
            ScalarField2D::analytic(f.window(), move |p| 137.5 * inner.value(p))
        };
        let frame2 = rescale_phi(&scaled, x0, 0.05, &spec()).unwrap();
        for p in [Point2::new(0.3, 0.4), Point2::new(-0.5, 0.2), Point2::new(0.0, 0.9)] {
            assert_relative_eq!(frame.eval(p), frame2.eval(p), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_field_frame_is_degenerate_error() {
        let f = make_synthetic(&SyntheticProfileSpec::Zero { x0: 1.0 }).unwrap();
        assert!(matches!(
            rescale_phi(&f, Point2::new(1.0, 0.0), 0.1, &spec()),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn psi32_rescaling_corner_is_fixed_point() {
        // the corner profile is exactly 3/2-homogeneous, so the rescaled
        // field equals the profile for every scale
        let f = make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 1.0 }).unwrap();
        let x0 = Point2::new(1.0, 0.0);
        let r = 0.07;
        let rescaled = rescale_psi32(&f, x0, r).unwrap();
        let d = annulus_l2_distance(
            |p| rescaled.value(p),
            |p| f.value(Point2::new(1.0 + p.x, p.y)),
            ANNULUS.0,
            ANNULUS.1,
            &spec(),
        );
        assert!(d <= 1e-8, "distance = {d:.3e}");
    }

    #[test]
    fn psi32_rescaling_degenerate_vanishes() {
        // sup over B_1 of the rescaled degenerate profile is O(r^{N - 3/2})
        let f = degenerate(2);
        let x0 = Point2::new(1.0, 0.0);
        let sup = |r: f64| {
            let g = rescale_psi32(&f, x0, r).unwrap();
            let mut m = 0.0_f64;
            for i in 0..64 {
                for j in 0..64 {
                    let p = Point2::new(-1.0 + i as f64 / 32.0, -1.0 + j as f64 / 32.0);
                    if p.x * p.x + p.y * p.y <= 1.0 {
                        m = m.max(g.value(p).abs());
                    }
                }
            }
            m
        };
        let s1 = sup(0.1);
        let s2 = sup(0.01);
        // N = 2: sup ~ r^{1/2}, so a decade in r shrinks it by 10^{-1/2}
        let rate = s2 / s1;
        assert!(
            (rate - 0.1_f64.sqrt()).abs() <= 0.03,
            "sup rate {rate} is not ~r^{{1/2}}: {s1} -> {s2}"
        );
    }

    #[test]
    fn homogeneity_of_synthetic_profiles() {
        let x0 = 1.0;
        for (field, expected) in [
            (degenerate(2), 2.0),
            (degenerate(3), 3.0),
            (
                make_synthetic(&SyntheticProfileSpec::StokesCorner { x0 }).unwrap(),
                1.5,
            ),
        ] {
            let w = AnalysisWindow::on_axis(&field, x0, None, 0.8, 24).unwrap();
            let fit = fit_homogeneity(&field, &w, &spec()).unwrap();
            assert!(
                (fit.primary().lambda - expected).abs() <= 0.02,
                "frequency lambda = {} vs {expected}",
                fit.primary().lambda
            );
            assert!(
                (fit.boundary_norm.lambda - expected).abs() <= 0.02,
                "slope lambda = {} vs {expected}",
                fit.boundary_norm.lambda
            );
            assert!(fit.consistent);
        }
    }

    #[test]
    fn non_homogeneous_probe_is_flagged() {
        // x^2 about an interior point is not homogeneous at the sampled
        // scales: the cross-scale frames disagree
        let f = make_synthetic(&SyntheticProfileSpec::WeightedHarmonicX2 { x0: 1.0 }).unwrap();
        let w = AnalysisWindow::about(&f, Point2::new(1.0, 0.5), None, 0.8, 12).unwrap();
        let fit = fit_homogeneity(&f, &w, &spec()).unwrap();
        assert!(!fit.consistent, "fit = {fit:?}");
        assert!(fit.scale_consistency > 0.02);
    }

    #[test]
    fn frame_close_to_matching_profile() {
        for n in [2u32, 3] {
            let f = degenerate(n);
            let frame = rescale_phi(&f, Point2::new(1.0, 0.0), 0.01, &spec()).unwrap();
            let d = limit_profile_distance(&frame, LimitProfile::FrequencyN { x0: 1.0, n }, &spec());
            assert!(d <= 0.05, "distance = {d:.3e} for N = {n}");
        }
    }

    #[test]
    fn frame_far_from_mismatched_profile() {
        let f = degenerate(2);
        let frame = rescale_phi(&f, Point2::new(1.0, 0.0), 0.01, &spec()).unwrap();
        let d = limit_profile_distance(&frame, LimitProfile::FrequencyN { x0: 1.0, n: 3 }, &spec());
        assert!(d >= 0.5, "distance = {d:.3e}");
    }

    #[test]
    fn corner_frame_matches_corner_profile() {
        let f = make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 1.0 }).unwrap();
        let frame = rescale_phi(&f, Point2::new(1.0, 0.0), 0.05, &spec()).unwrap();
        let d = limit_profile_distance(&frame, LimitProfile::Corner { x0: 1.0 }, &spec());
        assert!(d <= 1e-2, "distance = {d:.3e}");
    }

    #[test]
    fn directional_residual_vanishes_for_homogeneous() {
        let f = degenerate(3);
        let frame = rescale_phi(&f, Point2::new(1.0, 0.0), 0.01, &spec()).unwrap();
        let res = directional_residual(&frame, 3.0, ANNULUS.0, ANNULUS.1, &spec());
        assert!(res <= 1e-3, "residual = {res:.3e}");
    }

    #[test]
    fn nodal_ray_jump_values() {
        assert_relative_eq!(nodal_ray_laplacian(2).unwrap(), 4.0, epsilon = 1e-6);
        assert_relative_eq!(nodal_ray_laplacian(3).unwrap(), 6.0, epsilon = 1e-6);
        assert_relative_eq!(nodal_ray_laplacian(4).unwrap(), 8.0, epsilon = 1e-6);
        assert!(nodal_ray_laplacian(1).is_err());
    }

    #[test]
    fn harmonic_control_has_no_jump() {
        // signed harmonic rho^N sin(N theta) is smooth across the ray
        let jump = angular_derivative_jump(|t| (2.0 * t).sin(), PI / 2.0, 1e-5);
        assert!(jump.abs() <= 1e-6, "jump = {jump:.3e}");
    }
}
