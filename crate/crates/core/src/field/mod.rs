//! Stream-function fields on half-plane windows.
//!
//! A [`ScalarField2D`] is either an analytic closure (synthetic profiles,
//! rescalings) or a grid sampled on a uniform lattice with bicubic
//! interpolation. Fields are immutable after construction and all
//! evaluation paths are pure, so they can be shared across workers.

mod grid;
mod synthetic;

pub use grid::{load_grid, write_grid, GridField, GridFormat};
pub use synthetic::{make_synthetic, SyntheticProfileSpec};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the (x, y) half-plane, x horizontal (axis distance), y vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned evaluation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax)
            || !xmin.is_finite()
            || !xmax.is_finite()
            || !ymin.is_finite()
            || !ymax.is_finite()
        {
            return Err(Error::InvalidSpec(format!(
                "degenerate window [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Distance from an interior point to the window boundary.
    pub fn dist_to_boundary(&self, p: Point2) -> f64 {
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }

    /// Margin by which the closed ball `B_r(center)` stays inside the window.
    pub fn ball_margin(&self, center: Point2, r: f64) -> f64 {
        self.dist_to_boundary(center) - r
    }

    pub fn require_contains(&self, p: Point2) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                point: p,
                xmin: self.xmin,
                xmax: self.xmax,
                ymin: self.ymin,
                ymax: self.ymax,
            })
        }
    }

    pub fn require_ball(&self, center: Point2, r: f64) -> Result<()> {
        if r > 0.0 && self.ball_margin(center, r) >= 0.0 {
            Ok(())
        } else {
            Err(Error::BallExitsWindow { center, radius: r })
        }
    }
}

type ValueFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
enum FieldKind {
    Analytic {
        value: ValueFn,
        gradient: Option<GradFn>,
        /// Closed-form effective vorticity -div((1/x) grad psi)/x, when known.
        veff: Option<ValueFn>,
    },
    Grid(Arc<GridField>),
}

/// A scalar stream function with pointwise value and gradient access.
#[derive(Clone)]
pub struct ScalarField2D {
    window: Window,
    kind: FieldKind,
    /// Central-difference step for gradient fallback.
    fd_step: f64,
    /// Strict positivity cutoff for the phase indicator; 0 by default,
    /// raise it for noisy grid data.
    positivity_threshold: f64,
}

impl std::fmt::Debug for ScalarField2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.kind {
            FieldKind::Analytic { gradient, .. } => {
                if gradient.is_some() {
                    "analytic (analytic gradient)"
                } else {
                    "analytic (FD gradient)"
                }
            }
            FieldKind::Grid(_) => "grid",
        };
        write!(f, "ScalarField2D {{ {kind}, window: {:?} }}", self.window)
    }
}

impl ScalarField2D {
    /// Analytic field from a value closure; gradient falls back to central
    /// differences with the default step.
    pub fn analytic<F>(window: Window, value: F) -> Self
    where
        F: Fn(Point2) -> f64 + Send + Sync + 'static,
    {
        Self {
            window,
            kind: FieldKind::Analytic {
                value: Arc::new(value),
                gradient: None,
                veff: None,
            },
            fd_step: 1e-5,
            positivity_threshold: 0.0,
        }
    }

    /// Attach a closed-form gradient.
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(Point2) -> [f64; 2] + Send + Sync + 'static,
    {
        if let FieldKind::Analytic { gradient: slot, .. } = &mut self.kind {
            *slot = Some(Arc::new(gradient));
        }
        self
    }

    /// Attach a closed-form effective vorticity.
    pub fn with_effective_vorticity<V>(mut self, veff: V) -> Self
    where
        V: Fn(Point2) -> f64 + Send + Sync + 'static,
    {
        if let FieldKind::Analytic { veff: slot, .. } = &mut self.kind {
            *slot = Some(Arc::new(veff));
        }
        self
    }

    /// Override the central-difference step used by gradient/vorticity fallbacks.
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// Raise the positivity cutoff used by the phase indicator (noisy grids).
    pub fn with_positivity_threshold(mut self, threshold: f64) -> Self {
        self.positivity_threshold = threshold;
        self
    }

    pub fn positivity_threshold(&self) -> f64 {
        self.positivity_threshold
    }

    pub fn from_grid(grid: GridField) -> Self {
        let window = grid.window();
        let fd_step = (1e-5_f64).max(1e-3 * grid.spacing().0.min(grid.spacing().1));
        Self {
            window,
            kind: FieldKind::Grid(Arc::new(grid)),
            fd_step,
            positivity_threshold: 0.0,
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn has_analytic_gradient(&self) -> bool {
        match &self.kind {
            FieldKind::Analytic { gradient, .. } => gradient.is_some(),
            FieldKind::Grid(_) => false,
        }
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    /// Largest sample on the bottom edge; grids of physical solutions should
    /// vanish there. `None` for analytic fields.
    pub fn bottom_edge_max(&self) -> Option<f64> {
        match &self.kind {
            FieldKind::Grid(g) => Some(g.bottom_row_max()),
            FieldKind::Analytic { .. } => None,
        }
    }

    /// Checked evaluation; errors outside the window.
    pub fn eval(&self, p: Point2) -> Result<f64> {
        self.window.require_contains(p)?;
        Ok(self.value(p))
    }

    /// Unchecked evaluation. Analytic closures extend by their formula,
    /// grids clamp the interpolation stencil to the lattice. Callers that
    /// need the domain contract should go through [`eval`](Self::eval) or
    /// validate containment up front.
    pub fn value(&self, p: Point2) -> f64 {
        match &self.kind {
            FieldKind::Analytic { value, .. } => value(p),
            FieldKind::Grid(g) => g.interpolate(p),
        }
    }

    /// Checked gradient; FD mode needs margin `>= h` to the window boundary.
    pub fn grad(&self, p: Point2) -> Result<[f64; 2]> {
        self.window.require_contains(p)?;
        if !self.has_analytic_gradient() {
            let have = self.window.dist_to_boundary(p);
            if have < self.fd_step {
                return Err(Error::InsufficientMargin {
                    point: p,
                    need: self.fd_step,
                    have,
                });
            }
        }
        Ok(self.gradient(p))
    }

    /// Unchecked gradient: analytic when available, otherwise second-order
    /// central differences with step [`fd_step`](Self::fd_step).
    pub fn gradient(&self, p: Point2) -> [f64; 2] {
        match &self.kind {
            FieldKind::Analytic {
                gradient: Some(g), ..
            } => g(p),
            _ => self.fd_gradient(p, self.fd_step),
        }
    }

    /// Central-difference gradient with an explicit step.
    pub fn fd_gradient(&self, p: Point2, h: f64) -> [f64; 2] {
        let vx1 = self.value(Point2::new(p.x + h, p.y));
        let vx0 = self.value(Point2::new(p.x - h, p.y));
        let vy1 = self.value(Point2::new(p.x, p.y + h));
        let vy0 = self.value(Point2::new(p.x, p.y - h));
        [(vx1 - vx0) / (2.0 * h), (vy1 - vy0) / (2.0 * h)]
    }

    /// Positivity indicator of the fluid phase: 1 iff `psi(p) > threshold`.
    pub fn positivity_indicator(&self, p: Point2, threshold: f64) -> Result<bool> {
        self.window.require_contains(p)?;
        Ok(self.value(p) > threshold)
    }

    /// Indicator as a quadrature weight, at the field's stored threshold.
    pub(crate) fn indicator(&self, p: Point2) -> f64 {
        if self.value(p) > self.positivity_threshold {
            1.0
        } else {
            0.0
        }
    }

    /// Effective vorticity `g = -div((1/x) grad psi)/x` by second-order central
    /// differences; any smooth field solves the model equation with `f(psi)`
    /// replaced by `g`.
    pub fn effective_vorticity(&self, p: Point2, h: f64) -> Result<f64> {
        self.window.require_contains(p)?;
        let have = self.window.dist_to_boundary(p);
        if have < h || p.x <= h {
            return Err(Error::InsufficientMargin { point: p, need: h, have });
        }
        Ok(self.fd_effective_vorticity(p, h))
    }

    /// FD effective vorticity without the margin check.
    pub(crate) fn fd_effective_vorticity(&self, p: Point2, h: f64) -> f64 {
        // div((1/x) grad psi) = lap(psi)/x - psi_x/x^2
        let c = self.value(p);
        let xe = self.value(Point2::new(p.x + h, p.y));
        let xw = self.value(Point2::new(p.x - h, p.y));
        let yn = self.value(Point2::new(p.x, p.y + h));
        let ys = self.value(Point2::new(p.x, p.y - h));
        let lap = (xe + xw + yn + ys - 4.0 * c) / (h * h);
        let psi_x = (xe - xw) / (2.0 * h);
        -(lap / p.x - psi_x / (p.x * p.x)) / p.x
    }

    /// Effective vorticity for integrand use: closed form when the profile
    /// carries one, FD otherwise.
    pub(crate) fn effective_vorticity_raw(&self, p: Point2, h: f64) -> f64 {
        match &self.kind {
            FieldKind::Analytic { veff: Some(v), .. } => v(p),
            _ => self.fd_effective_vorticity(p, h),
        }
    }
}

/// Vorticity strength `f` with primitive `F` and the sampled growth bound
/// `|f(z)| <= C z` on `(0, z0)`.
pub struct VorticityModel {
    f: ValueScalarFn,
    big_f: ValueScalarFn,
    growth_c: f64,
    z0: f64,
}

type ValueScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

impl Clone for VorticityModel {
    fn clone(&self) -> Self {
        Self {
            f: self.f.clone(),
            big_f: self.big_f.clone(),
            growth_c: self.growth_c,
            z0: self.z0,
        }
    }
}

impl std::fmt::Debug for VorticityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VorticityModel {{ C: {}, z0: {} }}", self.growth_c, self.z0)
    }
}

impl VorticityModel {
    pub fn new<F, G>(f: F, big_f: G, growth_c: f64, z0: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if growth_c < 0.0 || z0 <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "vorticity growth constant {growth_c} and threshold {z0} must be nonnegative/positive"
            )));
        }
        let model = Self {
            f: Arc::new(f),
            big_f: Arc::new(big_f),
            growth_c,
            z0,
        };
        model.check_growth(256)?;
        Ok(model)
    }

    /// Irrotational flow: f = F = 0.
    pub fn zero() -> Self {
        Self {
            f: Arc::new(|_| 0.0),
            big_f: Arc::new(|_| 0.0),
            growth_c: 0.0,
            z0: f64::INFINITY,
        }
    }

    /// Linear vorticity f(z) = c z, F(z) = c z^2 / 2.
    pub fn linear(c: f64) -> Self {
        Self {
            f: Arc::new(move |z| c * z),
            big_f: Arc::new(move |z| 0.5 * c * z * z),
            growth_c: c.abs(),
            z0: f64::INFINITY,
        }
    }

    /// Piecewise-linear f through `(z_i, f_i)` samples; F by exact integration
    /// of the interpolant. Samples must have increasing nonnegative z.
    pub fn from_table(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData { need: 2, got: samples.len() });
        }
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidSpec("table z values must increase".into()));
            }
        }
        if samples[0].0 < 0.0 {
            return Err(Error::InvalidSpec("table z values must be nonnegative".into()));
        }
        let pts: Vec<(f64, f64)> = if samples[0].0 > 0.0 {
            // extend linearly to z = 0 so that F(0) = 0 is well defined
            let mut v = vec![(0.0, 0.0)];
            v.extend_from_slice(samples);
            v
        } else {
            samples.to_vec()
        };
        // cumulative trapezoid primitive at the nodes
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            let seg = 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
            cum.push(cum.last().unwrap() + seg);
        }
        let z0 = pts.last().unwrap().0;
        let growth_c = pts
            .iter()
            .filter(|(z, _)| *z > 0.0)
            .map(|(z, f)| (f / z).abs())
            .fold(0.0_f64, f64::max);
        let pts_f = pts.clone();
        let f = move |z: f64| -> f64 {
            let z = z.clamp(pts_f[0].0, pts_f[pts_f.len() - 1].0);
            let i = pts_f.partition_point(|(zi, _)| *zi <= z).clamp(1, pts_f.len() - 1);
            let (za, fa) = pts_f[i - 1];
            let (zb, fb) = pts_f[i];
            fa + (fb - fa) * (z - za) / (zb - za)
        };
        let pts_big = pts;
        let big_f = move |z: f64| -> f64 {
            let zc = z.clamp(pts_big[0].0, pts_big[pts_big.len() - 1].0);
            let i = pts_big.partition_point(|(zi, _)| *zi <= zc).clamp(1, pts_big.len() - 1);
            let (za, fa) = pts_big[i - 1];
            let (zb, fb) = pts_big[i];
            let fz = fa + (fb - fa) * (zc - za) / (zb - za);
            cum[i - 1] + 0.5 * (fa + fz) * (zc - za)
        };
        Ok(Self {
            f: Arc::new(f),
            big_f: Arc::new(big_f),
            growth_c,
            z0,
        })
    }

    pub fn f(&self, z: f64) -> f64 {
        (self.f)(z)
    }

    pub fn primitive(&self, z: f64) -> f64 {
        (self.big_f)(z)
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_c
    }

    pub fn threshold(&self) -> f64 {
        self.z0
    }

    /// Sampled check of `|f(z)| <= C z` on `(0, z0)` and `F(0) = 0`.
    pub fn check_growth(&self, samples: usize) -> Result<()> {
        if self.primitive(0.0).abs() > 1e-14 {
            return Err(Error::InvariantViolation(format!(
                "F(0) = {} should vanish",
                self.primitive(0.0)
            )));
        }
        let hi = if self.z0.is_finite() { self.z0 } else { 1.0 };
        for i in 1..=samples {
            let z = hi * i as f64 / samples as f64;
            let bound = self.growth_c * z * (1.0 + 1e-12) + 1e-300;
            if self.f(z).abs() > bound {
                return Err(Error::InvariantViolation(format!(
                    "|f({z})| = {} exceeds C z = {bound}",
                    self.f(z).abs()
                )));
            }
        }
        Ok(())
    }
}

/// Where the nonlinearity in the functionals comes from: a model `f(psi)`
/// or the effective vorticity of the field itself. The effective source
/// turns any smooth field into an exact solution, which is what the
/// identity checks need.
#[derive(Clone, Debug)]
pub enum VorticitySource {
    Model(VorticityModel),
    /// Field-derived g(p); `step` overrides the FD step (closed forms are
    /// used when the field carries one).
    Effective { step: Option<f64> },
}

impl VorticitySource {
    pub fn zero() -> Self {
        Self::Model(VorticityModel::zero())
    }

    pub fn effective() -> Self {
        Self::Effective { step: None }
    }

    /// Value of the nonlinearity at a point, given psi(p).
    pub fn f_at(&self, field: &ScalarField2D, p: Point2, psi: f64) -> f64 {
        match self {
            Self::Model(m) => m.f(psi),
            Self::Effective { step } => {
                let h = step.unwrap_or_else(|| field.fd_step());
                field.effective_vorticity_raw(p, h)
            }
        }
    }

    /// Primitive F(psi); only model sources carry one.
    pub fn primitive_at(&self, psi: f64) -> Option<f64> {
        match self {
            Self::Model(m) => Some(m.primitive(psi)),
            Self::Effective { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Model(m) => m.growth_c == 0.0,
            Self::Effective { .. } => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly_field() -> ScalarField2D {
        let w = Window::new(0.1, 3.0, -1.0, 1.0).unwrap();
        ScalarField2D::analytic(w, |p| p.x * p.x)
            .with_gradient(|p| [2.0 * p.x, 0.0])
            .with_effective_vorticity(|_| 0.0)
    }

    #[test]
    fn eval_zero_field_anywhere() {
        let w = Window::new(0.1, 2.0, -1.0, 1.0).unwrap();
        let f = ScalarField2D::analytic(w, |_| 0.0);
        assert_eq!(f.eval(Point2::new(1.0, 0.5)).unwrap(), 0.0);
        assert_eq!(f.eval(Point2::new(0.3, -0.9)).unwrap(), 0.0);
    }

    #[test]
    fn eval_x2_example() {
        let f = poly_field();
        assert_eq!(f.eval(Point2::new(2.0, 0.3)).unwrap(), 4.0);
    }

    #[test]
    fn eval_out_of_window_is_domain_error() {
        let f = poly_field();
        assert!(matches!(
            f.eval(Point2::new(5.0, 0.0)),
            Err(Error::OutOfWindow { .. })
        ));
    }

    #[test]
    fn grad_polynomials() {
        let f = poly_field();
        let g = f.grad(Point2::new(1.5, 0.0)).unwrap();
        assert_eq!(g, [3.0, 0.0]);

        let w = Window::new(0.1, 3.0, -3.0, 3.0).unwrap();
        let f2 = ScalarField2D::analytic(w, |p| p.x * p.x * p.y)
            .with_gradient(|p| [2.0 * p.x * p.y, p.x * p.x]);
        assert_eq!(f2.grad(Point2::new(1.0, 2.0)).unwrap(), [4.0, 1.0]);
    }

    #[test]
    fn fd_gradient_second_order() {
        let w = Window::new(0.1, 3.0, -3.0, 3.0).unwrap();
        let f = ScalarField2D::analytic(w, |p| p.x * p.x * p.y);
        let p = Point2::new(1.0, 2.0);
        let g = f.fd_gradient(p, 1e-4);
        assert!((g[0] - 4.0).abs() <= 1e-7);
        assert!((g[1] - 1.0).abs() <= 1e-7);

        // halving h cuts the x^4-type truncation error by ~4
        let f4 = ScalarField2D::analytic(w, |p| p.x.powi(4));
        let exact = 4.0 * 1.3_f64.powi(3);
        let e1 = (f4.fd_gradient(Point2::new(1.3, 0.0), 2e-3)[0] - exact).abs();
        let e2 = (f4.fd_gradient(Point2::new(1.3, 0.0), 1e-3)[0] - exact).abs();
        assert!(e1 / e2 >= 3.5, "e1 = {e1}, e2 = {e2}");
    }

    #[test]
    fn fd_margin_enforced() {
        let w = Window::new(0.1, 3.0, -1.0, 1.0).unwrap();
        let f = ScalarField2D::analytic(w, |p| p.x).with_fd_step(1e-2);
        assert!(matches!(
            f.grad(Point2::new(0.105, 0.0)),
            Err(Error::InsufficientMargin { .. })
        ));
    }

    #[test]
    fn effective_vorticity_exact_solutions() {
        let w = Window::new(0.2, 3.0, -1.0, 1.0).unwrap();
        let x2 = ScalarField2D::analytic(w, |p| p.x * p.x);
        let x2y = ScalarField2D::analytic(w, |p| p.x * p.x * p.y);
        for p in [Point2::new(1.0, 0.2), Point2::new(1.7, -0.4), Point2::new(0.8, 0.0)] {
            assert!(x2.effective_vorticity(p, 1e-4).unwrap().abs() <= 1e-6);
            assert!(x2y.effective_vorticity(p, 1e-4).unwrap().abs() <= 1e-6);
        }
    }

    #[test]
    fn effective_vorticity_y2() {
        // div((1/x) grad y^2) = 2/x, so g = -2/x^2 = -2 at x = 1.
        let w = Window::new(0.2, 3.0, -2.0, 2.0).unwrap();
        let f = ScalarField2D::analytic(w, |p| p.y * p.y);
        let g = f.effective_vorticity(Point2::new(1.0, 1.0), 1e-4).unwrap();
        assert!((g + 2.0).abs() <= 1e-6, "g = {g}");
    }

    #[test]
    fn positivity_indicator_basics() {
        let w = Window::new(0.1, 2.0, -1.0, 1.0).unwrap();
        let zero = ScalarField2D::analytic(w, |_| 0.0);
        assert!(!zero.positivity_indicator(Point2::new(1.0, 0.0), 0.0).unwrap());
        let f = poly_field();
        assert!(f.positivity_indicator(Point2::new(1.0, 0.0), 0.0).unwrap());
        assert!(!f.positivity_indicator(Point2::new(1.0, 0.0), 2.0).unwrap());
    }

    #[test]
    fn vorticity_linear_growth() {
        let m = VorticityModel::linear(1.0);
        assert_eq!(m.f(0.3), 0.3);
        assert_relative_eq!(m.primitive(0.4), 0.08);
        m.check_growth(64).unwrap();
    }

    #[test]
    fn vorticity_table_interpolates() {
        let m = VorticityModel::from_table(&[(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]).unwrap();
        assert_relative_eq!(m.f(0.5), 1.0);
        assert_relative_eq!(m.f(1.5), 1.0);
        assert_relative_eq!(m.primitive(1.0), 1.0); // trapezoid of the hat
        assert_relative_eq!(m.primitive(2.0), 2.0);
        assert_eq!(m.primitive(0.0), 0.0);
    }

    #[test]
    fn vorticity_growth_violation_detected() {
        let bad = VorticityModel::new(|z| z.sqrt(), |z| 2.0 / 3.0 * z.powf(1.5), 1.0, 1.0);
        assert!(bad.is_err());
    }
}
