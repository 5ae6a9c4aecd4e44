use adsmax_core::laplace::assemble_operators;
use adsmax_core::linalg::{pcg, CgOptions};
use adsmax_core::surface::{build_flat_torus, build_genus2_surface, validate_surface};
use std::f64::consts::PI;

#[test]
fn octagon_levels_validate() {
    for level in 0..=4 {
        let s = build_genus2_surface(level).unwrap();
        let report = validate_surface(&s);
        for c in &report.checks {
            assert!(c.pass, "level {level}: {c:?}");
        }
        assert!((s.total_area() - 4.0 * PI).abs() < 1e-9 * 4.0 * PI);
        let op = assemble_operators(&s).unwrap();
        assert!(op.min_weight() >= -1e-12, "level {level}: {}", op.min_weight());
        assert!(op.symmetry_defect() < 1e-14);
        assert!(op.max_row_sum() < 1e-12);
    }
}

#[test]
fn level_two_gauss_bonnet_defect() {
    let s = build_genus2_surface(2).unwrap();
    let r = validate_surface(&s);
    let gb = r.get("gauss_bonnet_defect").unwrap();
    assert!(gb.measured < 1e-6 * 4.0 * PI);
    println!("level 2: vertices {} gauss-bonnet defect {:.3e}", s.vertex_count(), gb.measured);
}

#[test]
fn forced_triangle_violation_is_flagged() {
    let mut s = build_genus2_surface(1).unwrap();
    s.mesh.edge_lengths[0] = 1e6;
    let r = validate_surface(&s);
    assert!(!r.get("triangle_inequality_margin").unwrap().pass);
    assert!(!r.all_pass());
}

#[test]
fn perturbed_generator_is_flagged() {
    let mut s = build_genus2_surface(1).unwrap();
    s.generators.as_mut().unwrap().generators[0].a += 1e-2;
    let r = validate_surface(&s);
    let rel = r.get("relation_residual").unwrap();
    assert!(!rel.pass);
    assert!(rel.measured > rel.tolerance);
}

#[test]
fn constants_are_the_whole_kernel() {
    let s = build_genus2_surface(2).unwrap();
    let op = assemble_operators(&s).unwrap();
    let n = s.vertex_count();
    let ones = vec![1.0; n];
    let mut out = vec![1.0; n];
    op.apply(&ones, &mut out);
    assert!(out.iter().all(|&x| x == 0.0));

    // solve -W x = b on the complement of constants and check the solution is unique
    let b: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let mean = b.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = b.iter().map(|x| x - mean).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        op.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    };
    let opts = CgOptions {
        project_constants: true,
        ..CgOptions::default()
    };
    let mut x1 = vec![0.0; n];
    let mut x2: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    pcg(apply, &op.degree, &b, &mut x1, opts).unwrap();
    pcg(apply, &op.degree, &b, &mut x2, opts).unwrap();
    let shift = x1[0] - x2[0];
    for i in 0..n {
        assert!((x1[i] - x2[i] - shift).abs() < 1e-9);
    }
}

#[test]
fn torus_validates() {
    for level in 0..=3 {
        let s = build_flat_torus(level).unwrap();
        assert!(validate_surface(&s).all_pass());
        assert_eq!(s.euler_characteristic(), 0);
    }
}
