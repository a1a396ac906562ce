//! Closed-form profiles centered at a stagnation candidate (x0, 0).

use std::f64::consts::PI;
use std::sync::Arc;

use super::{Point2, ScalarField2D, Window};
use crate::error::{Error, Result};

/// Synthetic stream-function profiles.
///
/// All profiles are centered at `X0 = (x0, 0)` with `x0 > 0` and extended by
/// zero outside their positivity cone.
#[derive(Clone)]
pub enum SyntheticProfileSpec {
    /// 3/2-homogeneous corner profile supported in the wedge
    /// `pi/6 < theta < 5 pi/6`.
    StokesCorner { x0: f64 },
    /// N-homogeneous profile `sqrt(x0) rho^N |sin(N theta)|`, boundary-norm
    /// normalized, vanishing on `{y <= 0}`. Requires `n >= 2`.
    DegenerateN { x0: f64, n: u32 },
    /// psi = x^2: exact irrotational solution of the weighted equation.
    WeightedHarmonicX2 { x0: f64 },
    /// psi = x^2 y: exact irrotational solution with nonzero axis gradient.
    WeightedHarmonicX2Y { x0: f64 },
    /// Identically zero field.
    Zero { x0: f64 },
    /// rho^lambda g(theta) about X0, with optional angular derivative for the
    /// analytic gradient.
    CustomHomogeneous {
        x0: f64,
        lambda: f64,
        angular: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        angular_deriv: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    },
}

impl std::fmt::Debug for SyntheticProfileSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::StokesCorner { x0 } => write!(f, "stokes-corner(x0 = {x0})"),
            Self::DegenerateN { x0, n } => write!(f, "degenerate-{n}(x0 = {x0})"),
            Self::WeightedHarmonicX2 { x0 } => write!(f, "weighted-harmonic-x2(x0 = {x0})"),
            Self::WeightedHarmonicX2Y { x0 } => write!(f, "weighted-harmonic-x2y(x0 = {x0})"),
            Self::Zero { x0 } => write!(f, "zero(x0 = {x0})"),
            Self::CustomHomogeneous { x0, lambda, .. } => {
                write!(f, "custom-homogeneous(x0 = {x0}, lambda = {lambda})")
            }
        }
    }
}

impl SyntheticProfileSpec {
    pub fn x0(&self) -> f64 {
        match self {
            Self::StokesCorner { x0 }
            | Self::DegenerateN { x0, .. }
            | Self::WeightedHarmonicX2 { x0 }
            | Self::WeightedHarmonicX2Y { x0 }
            | Self::Zero { x0 }
            | Self::CustomHomogeneous { x0, .. } => *x0,
        }
    }

    /// Default window around the profile center: x in [x0/20, 2 x0],
    /// y in [-x0, x0].
    pub fn default_window(&self) -> Window {
        let x0 = self.x0();
        Window {
            xmin: x0 / 20.0,
            xmax: 2.0 * x0,
            ymin: -x0,
            ymax: x0,
        }
    }

    fn validate(&self) -> Result<()> {
        let x0 = self.x0();
        if !(x0 > 0.0) || !x0.is_finite() {
            return Err(Error::InvalidSpec(format!("profile center x0 = {x0} must be positive")));
        }
        if let Self::DegenerateN { n, .. } = self {
            if *n < 2 {
                return Err(Error::InvalidSpec(format!("degenerate profile needs N >= 2, got {n}")));
            }
        }
        Ok(())
    }
}

/// Polar coordinates about the profile center.
#[inline]
fn polar(p: Point2, x0: f64) -> (f64, f64) {
    let dx = p.x - x0;
    let dy = p.y;
    (dx.hypot(dy), dy.atan2(dx))
}

/// Build the analytic field for a profile spec.
pub fn make_synthetic(spec: &SyntheticProfileSpec) -> Result<ScalarField2D> {
    spec.validate()?;
    let window = spec.default_window();
    let x0 = spec.x0();

    let field = match spec {
        SyntheticProfileSpec::Zero { .. } => ScalarField2D::analytic(window, |_| 0.0)
            .with_gradient(|_| [0.0, 0.0])
            .with_effective_vorticity(|_| 0.0),

        SyntheticProfileSpec::WeightedHarmonicX2 { .. } => {
            ScalarField2D::analytic(window, |p| p.x * p.x)
                .with_gradient(|p| [2.0 * p.x, 0.0])
                .with_effective_vorticity(|_| 0.0)
        }

        SyntheticProfileSpec::WeightedHarmonicX2Y { .. } => {
            ScalarField2D::analytic(window, |p| p.x * p.x * p.y)
                .with_gradient(|p| [2.0 * p.x * p.y, p.x * p.x])
                .with_effective_vorticity(|_| 0.0)
        }

        SyntheticProfileSpec::StokesCorner { .. } => {
            let c = (2.0_f64).sqrt() * x0 / 3.0;
            let value = move |p: Point2| -> f64 {
                let (rho, theta) = polar(p, x0);
                if theta <= PI / 6.0 || theta >= 5.0 * PI / 6.0 {
                    return 0.0;
                }
                c * rho.powf(1.5) * (1.5 * (theta - PI / 2.0)).cos()
            };
            let grad = move |p: Point2| -> [f64; 2] {
                let (rho, theta) = polar(p, x0);
                if rho == 0.0 || theta <= PI / 6.0 || theta >= 5.0 * PI / 6.0 {
                    return [0.0, 0.0];
                }
                let arg = 1.5 * (theta - PI / 2.0);
                let dr = 1.5 * c * rho.sqrt() * arg.cos();
                let dt_over_rho = -1.5 * c * rho.sqrt() * arg.sin();
                polar_to_cartesian(dr, dt_over_rho, theta)
            };
            // the profile is harmonic inside the wedge, so
            // g = -div((1/x) grad psi)/x reduces to psi_x / x^3
            let veff_grad = grad;
            let veff = move |p: Point2| -> f64 { veff_grad(p)[0] / (p.x * p.x * p.x) };
            ScalarField2D::analytic(window, value)
                .with_gradient(grad)
                .with_effective_vorticity(veff)
        }

        SyntheticProfileSpec::DegenerateN { n, .. } => {
            let n = *n;
            let nf = f64::from(n);
            // unit weighted boundary norm: int_0^pi sin^2(N t) dt = pi/2
            let c = x0.sqrt() / (PI / 2.0).sqrt();
            let value = move |p: Point2| -> f64 {
                if p.y <= 0.0 {
                    return 0.0;
                }
                let (rho, theta) = polar(p, x0);
                c * rho.powi(n as i32) * (nf * theta).sin().abs()
            };
            let grad = move |p: Point2| -> [f64; 2] {
                if p.y < 0.0 {
                    return [0.0, 0.0];
                }
                let (rho, theta) = polar(p, x0);
                if rho == 0.0 {
                    return [0.0, 0.0];
                }
                let s = (nf * theta).sin();
                // one-sided limit from above on nodal rays
                let sign = if s >= 0.0 { 1.0 } else { -1.0 };
                let rp = rho.powi(n as i32 - 1);
                let dr = c * nf * rp * s.abs();
                let dt_over_rho = c * rp * nf * (nf * theta).cos() * sign;
                polar_to_cartesian(dr, dt_over_rho, theta)
            };
            let veff_grad = grad;
            let veff = move |p: Point2| -> f64 { veff_grad(p)[0] / (p.x * p.x * p.x) };
            ScalarField2D::analytic(window, value)
                .with_gradient(grad)
                .with_effective_vorticity(veff)
        }

        SyntheticProfileSpec::CustomHomogeneous {
            lambda,
            angular,
            angular_deriv,
            ..
        } => {
            let lambda = *lambda;
            let ang = angular.clone();
            let value = move |p: Point2| -> f64 {
                let (rho, theta) = polar(p, x0);
                x0.sqrt() * rho.powf(lambda) * ang(theta)
            };
            let base = ScalarField2D::analytic(window, value);
            match angular_deriv {
                Some(dang) => {
                    let ang = angular.clone();
                    let dang = dang.clone();
                    base.with_gradient(move |p: Point2| {
                        let (rho, theta) = polar(p, x0);
                        if rho == 0.0 {
                            return [0.0, 0.0];
                        }
                        let rp = x0.sqrt() * rho.powf(lambda - 1.0);
                        let dr = lambda * rp * ang(theta);
                        let dt_over_rho = rp * dang(theta);
                        polar_to_cartesian(dr, dt_over_rho, theta)
                    })
                }
                None => base,
            }
        }
    };
    Ok(field)
}

#[inline]
fn polar_to_cartesian(dr: f64, dt_over_rho: f64, theta: f64) -> [f64; 2] {
    let (st, ct) = theta.sin_cos();
    [dr * ct - dt_over_rho * st, dr * st + dt_over_rho * ct]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn corner_profile_values() {
        let f = make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 1.0 }).unwrap();
        // rho = 1 is outside the default window; evaluate unchecked
        let top = f.value(Point2::new(1.0, 1.0));
        assert_relative_eq!(top, (2.0_f64).sqrt() / 3.0, max_relative = 1e-14);
        // vanishes on the wedge edge theta = pi/6
        let edge = Point2::new(1.0 + 0.5 * (PI / 6.0).cos(), 0.5 * (PI / 6.0).sin());
        assert_eq!(f.value(edge), 0.0);
        // and strictly positive inside
        assert!(f.value(Point2::new(1.0, 0.5)) > 0.0);
        assert!(f.positivity_indicator(Point2::new(1.0, 0.5), 0.0).unwrap());
        assert!(!f.positivity_indicator(Point2::new(1.5, 0.0), 0.0).unwrap());
    }

    #[test]
    fn degenerate_profile_value_and_support() {
        let f = make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n: 2 }).unwrap();
        let p = Point2::new(1.0 + (PI / 4.0).cos() * 0.5, (PI / 4.0).sin() * 0.5);
        // rho = 0.5, theta = pi/4: N theta = pi/2
        let expected = 0.5_f64.powi(2) * (2.0 / PI).sqrt();
        assert_relative_eq!(f.value(p), expected, max_relative = 1e-14);
        // zero for y <= 0
        assert_eq!(f.value(Point2::new(0.4, -0.2)), 0.0);
        assert_eq!(f.value(Point2::new(0.4, 0.0)), 0.0);
        // nonnegative everywhere on a sample grid
        for i in 0..40 {
            for j in 0..40 {
                let p = Point2::new(0.1 + i as f64 * 0.045, -0.9 + j as f64 * 0.045);
                assert!(f.value(p) >= 0.0);
            }
        }
    }

    #[test]
    fn degenerate_gradient_matches_fd_off_rays() {
        let f = make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n: 3 }).unwrap();
        let p = Point2::new(1.05, 0.13);
        let g = f.gradient(p);
        let fd = f.fd_gradient(p, 1e-6);
        assert_relative_eq!(g[0], fd[0], max_relative = 1e-7);
        assert_relative_eq!(g[1], fd[1], max_relative = 1e-7);
    }

    #[test]
    fn corner_gradient_matches_fd_inside_wedge() {
        let f = make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 1.0 }).unwrap();
        let p = Point2::new(0.93, 0.21);
        let g = f.gradient(p);
        let fd = f.fd_gradient(p, 1e-6);
        assert_relative_eq!(g[0], fd[0], max_relative = 1e-6);
        assert_relative_eq!(g[1], fd[1], max_relative = 1e-6);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 0.0 }).is_err());
        assert!(make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: -1.0 }).is_err());
        assert!(make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n: 1 }).is_err());
    }

    #[test]
    fn zero_spec_is_zero() {
        let f = make_synthetic(&SyntheticProfileSpec::Zero { x0: 1.0 }).unwrap();
        assert_eq!(f.value(Point2::new(0.7, 0.3)), 0.0);
        assert_eq!(f.gradient(Point2::new(0.7, 0.3)), [0.0, 0.0]);
    }

    #[test]
    fn effective_vorticity_closed_form_matches_fd() {
        let f = make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n: 2 }).unwrap();
        let p = Point2::new(1.11, 0.17);
        let closed = f.effective_vorticity_raw(p, 1e-5);
        let fd = f.fd_effective_vorticity(p, 1e-5);
        assert_relative_eq!(closed, fd, epsilon = 1e-5);
    }
}
