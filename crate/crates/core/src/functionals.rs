//! Weiss-type and frequency-type functionals at a radius, and radial sweeps.
//!
//! About a stagnation candidate `X0 = (x0, 0)` and for `r` inside the
//! admissible radius, the core quantities are
//!
//! ```text
//! I(r)  = r^-3 int_{B_r} ( (1/x)|grad psi|^2 - x psi f(psi) + x y chi ) dX
//! J(r)  = r^-4 int_{dB_r} (1/x) psi^2 dH
//! K(r)  = r int_{dB_r} (2xF - x psi f) dH + int_{B_r} (2 x0 F - 6 x F) dX
//! I1(r) = -int_{B_r} ((x - x0)/x^2) |grad psi|^2 dX
//! I2(r) = int_{B_r} (x - x0) y chi dX
//! J1(r) = int_{dB_r} ((x - x0)/x^2) psi^2 dH
//! ```
//!
//! with `chi` the positivity indicator, plus the derived quantities
//! `Phi = I - (3/2) J`, the frequency `H = D - V`, and the improper radial
//! integrals feeding `V`, `M` and `Y`. When the nonlinearity is the field's
//! own effective vorticity, `K` is evaluated through the integration-by-parts
//! form `2 int x g (Z . grad psi) - r int x psi g` (identical to the primitive
//! form whenever `f` has one, and well defined when it does not).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Point2, ScalarField2D, VorticitySource};
use crate::quadrature::{self, ImproperResult, IntegrandClass, QuadratureSpec};

/// Ratios are refused when the boundary norm drops below this guard
/// (`J(r) < GUARD` means the field is numerically zero near the candidate).
pub const DENOMINATOR_GUARD: f64 = 1e-30;

pub const DEFAULT_GRID_RATIO: f64 = 0.8;
pub const DEFAULT_GRID_COUNT: usize = 40;

/// Admissible radius about a candidate: `min(x0, dist(X0, boundary)) / 2`.
pub fn admissible_radius(field: &ScalarField2D, x0: Point2) -> f64 {
    0.5 * x0.x.min(field.window().dist_to_boundary(x0))
}

/// A stagnation candidate with its admissible radius and geometric radius grid.
#[derive(Debug, Clone)]
pub struct AnalysisWindow {
    x0: Point2,
    delta: f64,
    radii: Vec<f64>,
}

impl AnalysisWindow {
    /// Window about an on-axis candidate `(x0, 0)`; `rmax` defaults to
    /// `delta / 2`, the grid is `r_j = rmax * q^j`, `j = 0..count`.
    pub fn on_axis(
        field: &ScalarField2D,
        x0: f64,
        rmax: Option<f64>,
        q: f64,
        count: usize,
    ) -> Result<Self> {
        Self::about(field, Point2::new(x0, 0.0), rmax, q, count)
    }

    /// General-center window (used by homogeneity probes; the density and
    /// frequency sweeps require an on-axis center).
    pub fn about(
        field: &ScalarField2D,
        x0: Point2,
        rmax: Option<f64>,
        q: f64,
        count: usize,
    ) -> Result<Self> {
        field.window().require_contains(x0)?;
        if !(x0.x > 0.0) {
            return Err(Error::InvalidSpec(format!("candidate x0 = {} must be positive", x0.x)));
        }
        let delta = admissible_radius(field, x0);
        if delta <= 0.0 {
            return Err(Error::BallExitsWindow { center: x0, radius: 0.0 });
        }
        let rmax = rmax.unwrap_or(0.5 * delta);
        if !(rmax > 0.0 && rmax <= delta) {
            return Err(Error::RadiusOutOfRange { r: rmax, delta });
        }
        if !(q > 0.0 && q < 1.0) || count == 0 {
            return Err(Error::InvalidSpec(format!("grid ratio q = {q} must lie in (0, 1), count >= 1")));
        }
        let radii = (0..count).map(|j| rmax * q.powi(j as i32)).collect();
        Ok(Self { x0, delta, radii })
    }

    pub fn x0(&self) -> Point2 {
        self.x0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Strictly decreasing radius grid.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn is_on_axis(&self) -> bool {
        self.x0.y == 0.0
    }
}

/// The six integral functionals at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreFunctionals {
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub i1: f64,
    pub i2: f64,
    pub j1: f64,
}

/// Volume- and boundary-form frequency numerators over the same weighted
/// boundary norm; the forms agree exactly on solutions (energy identity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyD {
    /// `r int_{B_r} ((1/x)|grad psi|^2 - x psi f) / int_{dB_r} (1/x) psi^2` (primary).
    pub volume: f64,
    /// `r int_{dB_r} (1/x) psi psi_nu / int_{dB_r} (1/x) psi^2`.
    pub boundary: f64,
}

impl FrequencyD {
    /// Relative energy-identity residual between the two forms.
    pub fn energy_residual(&self) -> f64 {
        (self.volume - self.boundary).abs() / (1.0 + self.volume.abs().max(self.boundary.abs()))
    }
}

pub(crate) struct Ctx<'a> {
    pub field: &'a ScalarField2D,
    pub vort: &'a VorticitySource,
    pub x0: Point2,
    pub spec: &'a QuadratureSpec,
}

/// Raw disk sums at one radius (integrals over `B_r(X0)`).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct DiskSums {
    pub dirichlet: f64,
    pub f_term: f64,
    pub xy_chi: f64,
    pub i1: f64,
    pub i2: f64,
    pub k_disk: f64,
    pub psi2_w: f64,
    pub v_density: f64,
    pub vtilde_num: f64,
    pub bx_chi: f64,
    pub z1_psi2: f64,
    pub rellich: f64,
}

/// Raw circle sums at one radius (integrals over `dB_r(X0)`).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CircleSums {
    pub psi2_w: f64,
    pub psi_dn_w: f64,
    pub dn2_w: f64,
    pub j1: f64,
    pub k_circle: f64,
    pub weiss_sq: f64,
}

/// Everything derivable from one pair of disk/circle passes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialEval {
    pub r: f64,
    pub disk: DiskSums,
    pub circ: CircleSums,
}

impl RadialEval {
    pub fn core(&self, r: f64) -> CoreFunctionals {
        CoreFunctionals {
            i: (self.disk.dirichlet - self.disk.f_term + self.disk.xy_chi) / r.powi(3),
            j: self.circ.psi2_w / r.powi(4),
            k: self.disk.k_disk + r * self.circ.k_circle,
            i1: self.disk.i1,
            i2: self.disk.i2,
            j1: self.circ.j1,
        }
    }

    pub fn boundary_norm(&self) -> f64 {
        self.circ.psi2_w
    }

    pub fn degenerate(&self) -> bool {
        self.circ.psi2_w / self.r.powi(4) < DENOMINATOR_GUARD
    }

    pub fn d_pair(&self) -> FrequencyD {
        FrequencyD {
            volume: self.r * (self.disk.dirichlet - self.disk.f_term) / self.circ.psi2_w,
            boundary: self.r * self.circ.psi_dn_w / self.circ.psi2_w,
        }
    }

    pub fn z(&self) -> f64 {
        self.circ.j1 / self.circ.psi2_w
    }

    pub fn vtilde(&self) -> f64 {
        self.r * self.disk.vtilde_num / self.circ.psi2_w
    }
}

impl<'a> Ctx<'a> {
    pub fn delta(&self) -> f64 {
        admissible_radius(self.field, self.x0)
    }

    pub fn require_radius(&self, r: f64) -> Result<()> {
        let delta = self.delta();
        if r > 0.0 && r < delta {
            Ok(())
        } else {
            Err(Error::RadiusOutOfRange { r, delta })
        }
    }

    /// One disk pass and one circle pass at radius `r`.
    pub fn evaluate(&self, r: f64, spec: &QuadratureSpec) -> RadialEval {
        let field = self.field;
        let vort = self.vort;
        let a = self.x0.x;
        let x0 = self.x0;
        let veff_step = field.fd_step();

        let disk_vals = quadrature::disk_pass(
            x0,
            r,
            spec,
            IntegrandClass::Jump,
            12,
            |p: Point2, out: &mut [f64]| {
                let psi = field.value(p);
                let grad = field.gradient(p);
                let w = 1.0 / p.x;
                let grad2 = grad[0] * grad[0] + grad[1] * grad[1];
                let chi = field.indicator(p);
                let yplus = p.y.max(0.0);
                let zx = p.x - a;
                let zy = p.y;
                let f = vort.f_at(field, p, psi);
                let dirichlet = w * grad2;
                let f_term = p.x * psi * f;
                out[0] = dirichlet;
                out[1] = f_term;
                out[2] = p.x * p.y * chi;
                out[3] = -(zx * w * w) * grad2;
                out[4] = zx * p.y * chi;
                out[5] = match vort.primitive_at(psi) {
                    Some(big_f) => (2.0 * a - 6.0 * p.x) * big_f,
                    // integration-by-parts form of the primitive terms
                    None => {
                        let g = field.effective_vorticity_raw(p, veff_step);
                        2.0 * p.x * g * (zx * grad[0] + zy * grad[1])
                    }
                };
                out[6] = w * psi * psi;
                out[7] = yplus * (a - p.x * chi);
                out[8] = a * yplus * (1.0 - chi);
                out[9] = zx * yplus * chi;
                out[10] = zx * w * w * psi * psi;
                out[11] = (dirichlet - f_term) * (r * r - (zx * zx + zy * zy));
                chi
            },
        );

        let circ_vals = quadrature::circle_pass(
            x0,
            r,
            spec,
            IntegrandClass::Jump,
            6,
            |p: Point2, nu: [f64; 2], out: &mut [f64]| {
                let psi = field.value(p);
                let grad = field.gradient(p);
                let w = 1.0 / p.x;
                let dn = grad[0] * nu[0] + grad[1] * nu[1];
                let zx = p.x - a;
                out[0] = w * psi * psi;
                out[1] = w * psi * dn;
                out[2] = w * dn * dn;
                out[3] = zx * w * w * psi * psi;
                out[4] = match vort.primitive_at(psi) {
                    Some(big_f) => 2.0 * p.x * big_f - p.x * psi * vort.f_at(field, p, psi),
                    None => {
                        let g = field.effective_vorticity_raw(p, veff_step);
                        -(p.x * psi * g)
                    }
                };
                let dev = dn - 1.5 * psi / r;
                out[5] = w * dev * dev;
                field.indicator(p)
            },
        );

        RadialEval {
            r,
            disk: DiskSums {
                dirichlet: disk_vals[0],
                f_term: disk_vals[1],
                xy_chi: disk_vals[2],
                i1: disk_vals[3],
                i2: disk_vals[4],
                k_disk: disk_vals[5],
                psi2_w: disk_vals[6],
                v_density: disk_vals[7],
                vtilde_num: disk_vals[8],
                bx_chi: disk_vals[9],
                z1_psi2: disk_vals[10],
                rellich: disk_vals[11],
            },
            circ: CircleSums {
                psi2_w: circ_vals[0],
                psi_dn_w: circ_vals[1],
                dn2_w: circ_vals[2],
                j1: circ_vals[3],
                k_circle: circ_vals[4],
                weiss_sq: circ_vals[5],
            },
        }
    }

    /// Inner sample for the improper radial integrals: `[I1(t), I2(t),
    /// J1(t), S(t)]` with `S(t) = int_{dB_t} (1/x) psi^2`.
    pub fn inner_sample(&self, t: f64) -> [f64; 4] {
        let spec = self.spec.inner();
        let field = self.field;
        let a = self.x0.x;

        let disk_vals = quadrature::disk_pass(
            self.x0,
            t,
            &spec,
            IntegrandClass::Jump,
            2,
            |p: Point2, out: &mut [f64]| {
                let grad = field.gradient(p);
                let w = 1.0 / p.x;
                let grad2 = grad[0] * grad[0] + grad[1] * grad[1];
                let chi = field.indicator(p);
                out[0] = -((p.x - a) * w * w) * grad2;
                out[1] = (p.x - a) * p.y * chi;
                chi
            },
        );
        let circ_vals = quadrature::circle_pass(
            self.x0,
            t,
            &spec,
            IntegrandClass::Smooth,
            2,
            |p: Point2, _nu, out: &mut [f64]| {
                let psi = field.value(p);
                let w = 1.0 / p.x;
                out[0] = (p.x - a) * w * w * psi * psi;
                out[1] = w * psi * psi;
                field.indicator(p)
            },
        );
        [disk_vals[0], disk_vals[1], circ_vals[0], circ_vals[1]]
    }

    /// The four improper integrals at radius `r`:
    /// `int t^-4 I1`, `int t^-4 I2`, `int t^-5 J1`, and `Y = int t^-3 S`.
    pub fn improper(&self, r: f64) -> [ImproperResult; 4] {
        quadrature::improper_radial_multi(|t| self.inner_sample(t), r, [4, 4, 5, 3], self.spec)
    }
}

/// The six core functionals at one radius.
pub fn core_functionals(
    field: &ScalarField2D,
    vort: &VorticitySource,
    x0: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<CoreFunctionals> {
    spec.validate()?;
    let ctx = Ctx { field, vort, x0, spec };
    ctx.require_radius(r)?;
    Ok(ctx.evaluate(r, spec).core(r))
}

/// Weiss boundary-adjusted energy `Phi = I - (3/2) J`.
pub fn weiss_energy(core: &CoreFunctionals) -> f64 {
    core.i - 1.5 * core.j
}

/// Frequency numerator in volume and boundary form.
pub fn frequency_d(
    field: &ScalarField2D,
    vort: &VorticitySource,
    x0: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<FrequencyD> {
    let ctx = Ctx { field, vort, x0, spec };
    ctx.require_radius(r)?;
    let eval = ctx.evaluate(r, spec);
    require_nondegenerate(&eval)?;
    Ok(eval.d_pair())
}

fn require_nondegenerate(eval: &RadialEval) -> Result<()> {
    if eval.degenerate() {
        Err(Error::DegenerateDenominator {
            r: eval.r,
            norm: eval.circ.psi2_w,
        })
    } else {
        Ok(())
    }
}

/// `V(r)`: positivity-deficit density plus the improper radial corrections,
/// over the weighted boundary norm.
pub fn v_of_r(field: &ScalarField2D, x0: Point2, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let vort = VorticitySource::zero();
    let ctx = Ctx { field, vort: &vort, x0, spec };
    ctx.require_radius(r)?;
    let eval = ctx.evaluate(r, spec);
    require_nondegenerate(&eval)?;
    let [p1, p2, p3, _] = ctx.improper(r);
    let num = r * eval.disk.v_density + r.powi(4) * (p1.value + p2.value + 1.5 * p3.value);
    Ok(num / eval.circ.psi2_w)
}

/// Nonnegative part of V: `r int x0 y+ (1 - chi) / int (1/x) psi^2`.
pub fn tilde_v(field: &ScalarField2D, x0: Point2, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let vort = VorticitySource::zero();
    let ctx = Ctx { field, vort: &vort, x0, spec };
    ctx.require_radius(r)?;
    let eval = ctx.evaluate(r, spec);
    require_nondegenerate(&eval)?;
    Ok(eval.vtilde())
}

/// `Z(r) = int ((x - x0)/x^2) psi^2 / int (1/x) psi^2` on the circle.
pub fn z_of_r(field: &ScalarField2D, x0: Point2, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let vort = VorticitySource::zero();
    let ctx = Ctx { field, vort: &vort, x0, spec };
    ctx.require_radius(r)?;
    let eval = ctx.evaluate(r, spec);
    require_nondegenerate(&eval)?;
    Ok(eval.z())
}

/// Frequency `H = D - V`.
pub fn h_of_r(d: f64, v: f64) -> f64 {
    d - v
}

/// `M(r) = I(r) - int t^-4 (I1 + I2) - (3/2) int t^-5 J1`.
pub fn m_of_r(
    field: &ScalarField2D,
    vort: &VorticitySource,
    x0: Point2,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let ctx = Ctx { field, vort, x0, spec };
    ctx.require_radius(r)?;
    let core = ctx.evaluate(r, spec).core(r);
    let [p1, p2, p3, _] = ctx.improper(r);
    Ok(core.i - p1.value - p2.value - 1.5 * p3.value)
}

/// `Y(r) = int_0^r t^-3 int_{dB_t} (1/x) psi^2 dH dt`.
pub fn y_of_r(field: &ScalarField2D, x0: Point2, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let vort = VorticitySource::zero();
    let ctx = Ctx { field, vort: &vort, x0, spec };
    ctx.require_radius(r)?;
    let [_, _, _, y] = ctx.improper(r);
    Ok(y.value)
}

/// Per-radius record of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RadialRecord {
    pub r: f64,
    #[serde(flatten)]
    pub core: CoreFunctionals,
    pub phi: f64,
    pub m: f64,
    pub y: f64,
    pub d: Option<f64>,
    pub d_boundary: Option<f64>,
    pub v: Option<f64>,
    pub v_tilde: Option<f64>,
    pub z: Option<f64>,
    pub h: Option<f64>,
    /// Relative disagreement between the two frequency forms.
    pub energy_residual: Option<f64>,
    /// Largest tail fraction among the improper integrals.
    pub tail_fraction: f64,
    pub integrability_warning: bool,
    /// Boundary norm below the denominator guard; ratio columns are absent.
    pub degenerate: bool,
}

/// Sweep of all functionals over the window's radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub x0: Point2,
    pub records: Vec<RadialRecord>,
}

impl RadialProfile {
    /// `(r, value)` pairs of a column, skipping radii where it is absent.
    pub fn column<F: Fn(&RadialRecord) -> Option<f64>>(&self, get: F) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|rec| get(rec).map(|v| (rec.r, v)))
            .collect()
    }
}

/// All functionals at every grid radius; radii are processed independently
/// (in parallel) and assembled in grid order.
pub fn profile_sweep(
    field: &ScalarField2D,
    vort: &VorticitySource,
    window: &AnalysisWindow,
    spec: &QuadratureSpec,
) -> Result<RadialProfile> {
    spec.validate()?;
    if !window.is_on_axis() {
        return Err(Error::OffAxis { y: window.x0().y });
    }
    let x0 = window.x0();
    let ctx = Ctx { field, vort, x0, spec };
    let records: Vec<RadialRecord> = window
        .radii()
        .par_iter()
        .map(|&r| {
            let eval = ctx.evaluate(r, spec);
            let core = eval.core(r);
            let [p1, p2, p3, yres] = ctx.improper(r);
            let phi = weiss_energy(&core);
            let m = core.i - p1.value - p2.value - 1.5 * p3.value;
            let tail_fraction = p1
                .tail_fraction
                .max(p2.tail_fraction)
                .max(p3.tail_fraction)
                .max(yres.tail_fraction);
            let warn = p1.integrability_warning
                || p2.integrability_warning
                || p3.integrability_warning
                || yres.integrability_warning;
            let degenerate = eval.degenerate();
            let (d, d_boundary, v, v_tilde, z, h, energy_residual);
            if degenerate {
                d = None;
                d_boundary = None;
                v = None;
                v_tilde = None;
                z = None;
                h = None;
                energy_residual = None;
            } else {
                let pair = eval.d_pair();
                let vnum =
                    r * eval.disk.v_density + r.powi(4) * (p1.value + p2.value + 1.5 * p3.value);
                let vv = vnum / eval.circ.psi2_w;
                d = Some(pair.volume);
                d_boundary = Some(pair.boundary);
                v = Some(vv);
                v_tilde = Some(eval.vtilde());
                z = Some(eval.z());
                h = Some(pair.volume - vv);
                energy_residual = Some(pair.energy_residual());
            }
            RadialRecord {
                r,
                core,
                phi,
                m,
                y: yres.value,
                d,
                d_boundary,
                v,
                v_tilde,
                z,
                h,
                energy_residual,
                tail_fraction,
                integrability_warning: warn,
                degenerate,
            }
        })
        .collect();
    Ok(RadialProfile { x0, records })
}

/// Least-squares zero-radius limit `a` of samples `v = a + b r` over the
/// smallest sampled decade; uncertainty is `max(fit rms, |b| r_min)`.
pub fn extrapolate_zero_limit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData { need: 4, got: samples.len() });
    }
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let r_min = sorted[0].0;
    let mut fit: Vec<(f64, f64)> = sorted
        .iter()
        .copied()
        .take_while(|(r, _)| *r <= 10.0 * r_min)
        .collect();
    if fit.len() < 4 {
        fit = sorted.iter().copied().take(4).collect();
    }
    let n = fit.len() as f64;
    let sr: f64 = fit.iter().map(|(r, _)| r).sum();
    let sv: f64 = fit.iter().map(|(_, v)| v).sum();
    let srr: f64 = fit.iter().map(|(r, _)| r * r).sum();
    let srv: f64 = fit.iter().map(|(r, v)| r * v).sum();
    let b = (n * srv - sr * sv) / (n * srr - sr * sr);
    let a = (sv - b * sr) / n;
    let rms = (fit.iter().map(|(r, v)| (v - a - b * r).powi(2)).sum::<f64>() / n).sqrt();
    Ok((a, rms.max(b.abs() * r_min)))
}
