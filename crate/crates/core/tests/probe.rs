use stagnation_core::*;
use stagnation_core::functionals::{profile_sweep, extrapolate_zero_limit};

#[test]
fn probe_corner_phi() {
    let f = make_synthetic(&SyntheticProfileSpec::StokesCorner { x0: 1.0 }).unwrap();
    let vort = VorticitySource::zero();
    let spec = QuadratureSpec::default();
    let w = AnalysisWindow::on_axis(&f, 1.0, None, 0.8, 40).unwrap();
    let t0 = std::time::Instant::now();
    let prof = profile_sweep(&f, &vort, &w, &spec).unwrap();
    eprintln!("sweep took {:?}", t0.elapsed());
    let phi = prof.column(|r| Some(r.phi));
    let (a, sigma) = extrapolate_zero_limit(&phi).unwrap();
    let target = 3.0f64.sqrt() / 3.0;
    eprintln!("phi0 = {a} +- {sigma}, target = {target}, err = {:.3e}", (a - target).abs());
    for rec in prof.records.iter().rev().take(4) {
        eprintln!("r = {:.4e}  phi = {:.8}  D = {:?}  V = {:?}  H = {:?}  tail = {:.2e}", rec.r, rec.phi, rec.d, rec.v, rec.h, rec.tail_fraction);
    }
    let d = prof.column(|r| r.d);
    let (d0, ds) = extrapolate_zero_limit(&d).unwrap();
    eprintln!("D0 = {d0} +- {ds}");
    let v = prof.column(|r| r.v);
    let (v0, vs) = extrapolate_zero_limit(&v).unwrap();
    eprintln!("V0 = {v0} +- {vs}  (predicted 9(2-sqrt3)/(2pi) = {})", 9.0*(2.0-3.0f64.sqrt())/(2.0*std::f64::consts::PI));
}

#[test]
fn probe_degenerate_phi_h() {
    let f = make_synthetic(&SyntheticProfileSpec::DegenerateN { x0: 1.0, n: 2 }).unwrap();
    let vort = VorticitySource::zero();
    let spec = QuadratureSpec::default();
    let w = AnalysisWindow::on_axis(&f, 1.0, None, 0.8, 40).unwrap();
    let t0 = std::time::Instant::now();
    let prof = profile_sweep(&f, &vort, &w, &spec).unwrap();
    eprintln!("sweep took {:?}", t0.elapsed());
    let (phi0, ps) = extrapolate_zero_limit(&prof.column(|r| Some(r.phi))).unwrap();
    eprintln!("phi0 = {phi0} +- {ps}, err vs 2/3 = {:.3e}", (phi0 - 2.0/3.0).abs());
    let (h0, hs) = extrapolate_zero_limit(&prof.column(|r| r.h)).unwrap();
    eprintln!("H0 = {h0} +- {hs}, err vs 2 = {:.3e}", (h0 - 2.0).abs());
    let (v0, vs) = extrapolate_zero_limit(&prof.column(|r| r.v)).unwrap();
    eprintln!("V0 = {v0} +- {vs}");
    for rec in prof.records.iter().rev().take(3) {
        eprintln!("r = {:.4e}  J = {:.6e}  V = {:?}  Z = {:?}  H = {:?} tail={:.2e} warn={}", rec.r, rec.core.j, rec.v, rec.z, rec.h, rec.tail_fraction, rec.integrability_warning);
    }
}
