mod common;

use approx::assert_abs_diff_eq;
use common::*;
use wgtransport_core::analysis::{error_report, project_qh_plus};
use wgtransport_core::problem::{builtin_problem, example1, example3, example4};
use wgtransport_core::{
    energy_norm, l2_error, recover_derivative, Discretization, MeshFamily, TraceDofs, Vec2,
};

#[test]
fn l2_error_of_projection_of_polynomial_vanishes() {
    let mesh = MeshFamily::Poly.build(2, 0).unwrap();
    for k in 0..=3 {
        let p = polynomial_problem(k, Vec2::new(1.0, 0.0), 1.0);
        let disc = Discretization::new(&mesh, &p, k).unwrap();
        let u = p.u_exact.clone().unwrap();
        let qhu = disc.project_qh(&|x| u(x)).unwrap();
        assert!(l2_error(&mesh, &|x| u(x), &qhu, disc.quad_degree()).unwrap() < 1e-12);
    }
}

#[test]
fn l2_error_of_x_squared_against_zero() {
    let mesh = single_element(&UNIT_SQUARE);
    let p = data_problem(|_| Vec2::new(1.0, 0.0), 0.0, 1.0, |_| 0.0, |_| 0.0);
    let disc = Discretization::new(&mesh, &p, 1).unwrap();
    let e = l2_error(&mesh, &|x| x.x * x.x, &disc.zero_function(), 5).unwrap();
    assert_abs_diff_eq!(e, 1.0 / 5f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn energy_norm_hand_example() {
    // β = (1, 0), α = 2, v⁰ ≡ 1, v^b ≡ 1 except 0 on the inflow boundary:
    // σ-term 2, inflow jump ½, outflow boundary ½.
    let p = data_problem(|_| Vec2::new(1.0, 0.0), 0.0, 2.0, |_| 0.0, |_| 0.0);
    for mesh in [single_element(&UNIT_SQUARE), MeshFamily::Tri.build(2, 0).unwrap()] {
        for k in 0..=2 {
            let disc = Discretization::new(&mesh, &p, k).unwrap();
            let mut v = disc.project_qh(&|_| 1.0).unwrap();
            for (t, vt) in disc.dofmap.traces.iter().zip(v.traces.iter_mut()) {
                if let (TraceDofs::Constrained(_), Some(c)) = (t, vt.as_mut()) {
                    c.fill(0.0);
                }
            }
            assert_abs_diff_eq!(energy_norm(&disc, &v), 3f64.sqrt(), epsilon = 1e-13);
            assert_eq!(energy_norm(&disc, &disc.zero_function()), 0.0);
        }
    }
}

#[test]
fn energy_norm_is_a_norm_on_samples() {
    let p = example3();
    let mesh = MeshFamily::Poly.build(2, 1).unwrap();
    let disc = Discretization::new(&mesh, &p, 2).unwrap();
    let mut r = rng(11);
    for _ in 0..10 {
        let v = random_homogeneous(&disc, &mut r);
        let w = random_homogeneous(&disc, &mut r);
        let (nv, nw) = (energy_norm(&disc, &v), energy_norm(&disc, &w));
        assert!(nv > 0.0);
        assert!(energy_norm(&disc, &v.add(&w)) <= (nv + nw) * (1.0 + 1e-14));
        for s in [-3.0, 0.25, 7.5] {
            assert_abs_diff_eq!(energy_norm(&disc, &v.scale(s)), s.abs() * nv, epsilon = 1e-12 * nv * s.abs());
        }
    }
}

#[test]
fn recovered_derivative_error_identity() {
    for id in 1..=3 {
        let p = builtin_problem(id).unwrap();
        let family = if id == 1 { MeshFamily::Tri } else { MeshFamily::Poly };
        let mesh = family.build(2, 0).unwrap();
        let disc = Discretization::new(&mesh, &p, 1).unwrap();
        let uh = disc.solve().unwrap();
        let rh = recover_derivative(&mesh, &p, &uh);
        let (u, grad) = (p.u_exact.clone().unwrap(), p.grad_u_exact.clone().unwrap());
        let div = p.div_beta.clone().unwrap();
        for e in 0..mesh.num_elements() {
            for (x, _) in disc.context(e).quad.iter() {
                let dbu = (p.beta)(x).dot(&grad(x));
                let c = (p.alpha)(x) + div(x);
                let lhs = dbu - rh.value(e, x);
                let rhs = -c * (u(x) - uh.eval_interior(&mesh, e, x));
                assert!((lhs - rhs).abs() < 1e-12, "{}: {lhs} vs {rhs}", p.name);
            }
        }
    }
}

#[test]
fn recovered_derivative_exact_for_polynomial_solutions() {
    let mesh = MeshFamily::Tri.build(2, 0).unwrap();
    let p = polynomial_problem(2, Vec2::new(1.0, 0.5), 1.5);
    let disc = Discretization::new(&mesh, &p, 2).unwrap();
    let uh = disc.solve().unwrap();
    let rh = recover_derivative(&mesh, &p, &uh);
    let grad = p.grad_u_exact.clone().unwrap();
    for e in 0..mesh.num_elements() {
        let x = mesh.element(e).centroid;
        assert_abs_diff_eq!(rh.value(e, x), Vec2::new(1.0, 0.5).dot(&grad(x)), epsilon = 1e-10);
    }
    let rep = error_report(&disc, &uh, true).unwrap();
    for v in [rep.l2_interior, rep.energy, rep.energy_plus.unwrap(), rep.recovery] {
        assert!(v <= 1e-10, "{rep:?}");
    }
}

#[test]
fn energy_error_dominates_sigma_weighted_l2() {
    for id in 1..=3 {
        let p = builtin_problem(id).unwrap();
        let mesh = MeshFamily::Poly.build(2, 0).unwrap();
        let disc = Discretization::new(&mesh, &p, 1).unwrap();
        let uh = disc.solve().unwrap();
        let u = p.u_exact.clone().unwrap();
        let eh = disc.project_qh(&|x| u(x)).unwrap().sub(&uh);
        let l2 = l2_error(&mesh, &|_| 0.0, &eh, disc.quad_degree()).unwrap();
        assert!(energy_norm(&disc, &eh) >= p.sigma0.sqrt() * l2);
    }
}

#[test]
fn every_error_column_decreases_under_refinement() {
    for id in 1..=3 {
        let p = builtin_problem(id).unwrap();
        let family = if id == 1 { MeshFamily::Tri } else { MeshFamily::Poly };
        let reports: Vec<_> = (1..=4)
            .map(|level| {
                let mesh = family.build(level, 0).unwrap();
                let disc = Discretization::new(&mesh, &p, 1).unwrap();
                let uh = disc.solve().unwrap();
                error_report(&disc, &uh, true).unwrap()
            })
            .collect();
        for w in reports.windows(2) {
            assert!(w[1].l2_interior < w[0].l2_interior, "{}", p.name);
            assert!(w[1].energy < w[0].energy, "{}", p.name);
            assert!(w[1].energy_plus.unwrap() < w[0].energy_plus.unwrap(), "{}", p.name);
            assert!(w[1].recovery < w[0].recovery, "{}", p.name);
        }
    }
}

#[test]
fn recovery_ratio_matches_reaction_coefficient() {
    let p = example1();
    let mesh = MeshFamily::Tri.build(3, 0).unwrap();
    for k in 0..=3 {
        let disc = Discretization::new(&mesh, &p, k).unwrap();
        let rep = error_report(&disc, &disc.solve().unwrap(), false).unwrap();
        assert!((rep.recovery / rep.l2_interior - 2.0).abs() < 1e-12);
        assert!(rep.energy_plus.is_none());
    }
}

#[test]
fn qh_plus_agrees_with_qh_on_polynomials() {
    let mesh = MeshFamily::Tri.build(2, 0).unwrap();
    let p = polynomial_problem(2, Vec2::new(1.0, 0.0), 1.0);
    let disc = Discretization::new(&mesh, &p, 2).unwrap();
    let u = p.u_exact.clone().unwrap();
    let a = disc.project_qh(&|x| u(x)).unwrap();
    let b = project_qh_plus(&disc, &|x| u(x)).unwrap();
    assert!(a.sub(&b).max_abs() < 1e-10);
}

#[test]
fn error_report_needs_exact_solution() {
    let p = example4();
    let mesh = MeshFamily::Slit.build(1, 0).unwrap();
    let disc = Discretization::new(&mesh, &p, 1).unwrap();
    let uh = disc.solve().unwrap();
    assert!(error_report(&disc, &uh, false).is_err());
}
