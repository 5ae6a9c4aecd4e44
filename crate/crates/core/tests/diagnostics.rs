use adsmax_core::diagnostics::*;
use adsmax_core::laplace::assemble_operators;
use adsmax_core::qdiff::*;
use adsmax_core::surface::*;
use adsmax_core::Error;

fn setup() -> (DiscreteSurface, adsmax_core::laplace::LaplaceOperator, adsmax_core::ScalarField, Vec<usize>) {
    let s = build_genus2_surface(2).unwrap();
    let op = assemble_operators(&s).unwrap();
    let z = s.symmetric_simple_zeros().unwrap();
    let rho = synth_with_operator(&s, &op, &QDiffSpec::new(z.iter().map(|&v| (v, 1)).collect()))
        .unwrap()
        .rho;
    (s, op, rho, z)
}

#[test]
fn sweep_is_monotone_away_from_zeros() {
    let (s, op, rho, z) = setup();
    let sw = ray_sweep(&s, &op, &rho, &z, &[0.5, 1.0, 2.0, 4.0, 8.0], &SweepOptions::default(), None).unwrap();
    let f = &sw.report.flags;
    assert!(f.u_nondecreasing && f.phi_strictly_decreasing && f.lambda_strictly_increasing);
    assert!(f.lambda_below_one && f.brackets_ok && f.residuals_ok);
    assert!(f.sup_ratio_above_one && f.sup_ratio_strictly_decreasing);
    assert_eq!(f.entropy_nonincreasing, None);
    assert!(sw.report.max_u_decrease <= 1e-10);
    assert!(!sw.report.boundary_mode);
    for r in &sw.report.records {
        assert!(r.lambda_max < 1.0);
        assert!(r.sup_ratio.unwrap() > 1.0);
    }
}

#[test]
fn zero_t_record_has_no_gap() {
    let (s, op, rho, z) = setup();
    let sw = ray_sweep(&s, &op, &rho, &z, &[0.0, 1.0], &SweepOptions::default(), None).unwrap();
    let r0 = &sw.report.records[0];
    assert_eq!(r0.lambda_max, 0.0);
    assert_eq!(r0.min_phi, None);
    assert_eq!(r0.sup_ratio, None);
    assert_eq!(r0.width_bound, Some(WidthBound::Inapplicable));
    let csv = sw.report.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("t,lambda_max,"));
}

#[test]
fn induced_curvature_is_negative_where_lambda_is_small() {
    let (s, op, rho, z) = setup();
    let sw = ray_sweep(&s, &op, &rho, &z, &[2.0], &SweepOptions::default(), None).unwrap();
    let lam = principal_curvature(&rho, 2.0, &sw.solutions[0].u).unwrap();
    let k = induced_curvature(&lam);
    assert!(k.values.iter().all(|&x| x < 0.0));
}

#[test]
fn bad_inputs() {
    let (s, op, rho, z) = setup();
    let o = SweepOptions::default();
    assert!(matches!(ray_sweep(&s, &op, &rho, &z, &[], &o, None), Err(Error::Domain(_))));
    assert!(matches!(ray_sweep(&s, &op, &rho, &z, &[2.0, 1.0], &o, None), Err(Error::Domain(_))));
    let far = SweepOptions { exclusion_radius: 50.0, ..SweepOptions::default() };
    assert!(matches!(ray_sweep(&s, &op, &rho, &z, &[1.0], &far, None), Err(Error::EmptyDomain(_))));
    assert!(conformal_gap(&rho, 0.0, &sw_u(&s)).is_err());
}

fn sw_u(s: &DiscreteSurface) -> adsmax_core::ScalarField {
    adsmax_core::ScalarField::constant("u", s.vertex_count(), 0.0)
}

#[test]
fn width_bound_limits() {
    let w = |l: f64| width_lower_bound(l, 1.0, 0.5).unwrap().radians().unwrap();
    assert!((w(0.9) - 10f64.atan()).abs() < 1e-12);
    assert!(w(0.6) < w(0.9) && w(0.9) < w(0.999));
    assert!(std::f64::consts::FRAC_PI_2 - w(1.0 - 1e-12) < 1e-6);
    assert!(width_lower_bound(-0.1, 1.0, 0.5).is_err());
    assert!(width_lower_bound(0.9, 0.0, 0.5).is_err());
}
