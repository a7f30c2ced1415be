use std::f64::consts::PI;

use proptest::prelude::*;
use ptwell::action::{action_at, action_fixed, action_integral, period_by_difference};
use ptwell::bs::{attach_shooting, solve_bs};
use ptwell::potential::{make_potential, PotentialSpec, Term, Window};
use ptwell::shooting::{certify, default_box_l, scan_with, ShootOptions, Shooter};
use ptwell::stokes::{initial_directions, LineKind, Tracer, TraceOptions};
use ptwell::turning::find_turning_pair;
use ptwell::wkb::{PhaseFunction, Side};
use ptwell::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn window() -> Window {
    Window::new([-8.0, 8.0], [-3.0, 3.0])
}

fn harmonic() -> PotentialSpec {
    make_potential(vec![Term::new(1.0, 2)], vec![Term::new(1.0, 1)], 1.0, window()).unwrap()
}

fn quartic() -> PotentialSpec {
    make_potential(vec![Term::new(1.0, 4)], vec![Term::new(1.0, 1)], 1.0, window()).unwrap()
}

fn mixed() -> PotentialSpec {
    make_potential(
        vec![Term::new(1.0, 2), Term::new(-0.05, 4), Term::new(0.2, 6)],
        vec![Term::new(1.0, 1), Term::new(0.3, 3)],
        1.0,
        window(),
    )
    .unwrap()
}

fn anharmonic() -> PotentialSpec {
    make_potential(vec![Term::new(1.0, 2), Term::new(0.1, 4)], vec![Term::new(1.0, 3)], 1.0, window()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pt_identity(re in -8.0f64..8.0, im in -3.0f64..3.0, which in 0usize..3) {
        let eps = [0.0, 0.1, 0.5][which];
        let s = mixed();
        let z = c(re, im);
        let v = s.eval(z, eps);
        let mirrored = s.eval(-z.conj(), eps).conj();
        prop_assert!((mirrored - v).norm() < 1e-13 * (1.0 + v.norm()));
    }

    #[test]
    fn parity_on_the_real_axis(x in -8.0f64..8.0) {
        let s = mixed();
        prop_assert!((s.v0_real(x) - s.v0_real(-x)).abs() <= 1e-14 * (1.0 + s.v0_real(x).abs()));
        prop_assert!((s.w_real(x) + s.w_real(-x)).abs() <= 1e-14 * (1.0 + s.w_real(x).abs()));
    }

    #[test]
    fn derivative_matches_central_difference(re in -4.0f64..4.0, im in -2.0f64..2.0, eps in 0.0f64..0.5) {
        let s = mixed();
        let z = c(re, im);
        let d = 1e-5;
        let fd = (s.eval(z + d, eps) - s.eval(z - d, eps)) / (2.0 * d);
        let exact = s.eval_d1(z, eps);
        prop_assert!((fd - exact).norm() < 1e-8 * (1.0 + exact.norm()), "{} vs {}", fd, exact);
    }

    #[test]
    fn turning_points_reflect_under_conjugated_energy(de in -0.2f64..0.2, im in -0.15f64..0.15, eps in 0.0f64..0.3) {
        let s = anharmonic();
        let e = c(1.0 + de, im);
        let tp = find_turning_pair(&s, e, eps, None).unwrap();
        let bar = find_turning_pair(&s, e.conj(), eps, None).unwrap();
        prop_assert!((bar.alpha + tp.beta.conj()).norm() < 1e-10);
        prop_assert!((bar.beta + tp.alpha.conj()).norm() < 1e-10);
    }
}

#[test]
fn turning_pairs_on_grid() {
    let s = anharmonic();
    for i in 0..10 {
        for j in 0..10 {
            let e = 0.8 + 0.4 * i as f64 / 9.0;
            let eps = 0.3 * j as f64 / 9.0;
            let tp = find_turning_pair(&s, c(e, 0.0), eps, None).unwrap();
            assert!(tp.residual_alpha < 1e-11 && tp.residual_beta < 1e-11);
            assert!(tp.slope_alpha.norm() > 1e-6 && tp.slope_beta.norm() > 1e-6);
            assert!((tp.beta + tp.alpha.conj()).norm() < 1e-10, "E={e} eps={eps}");
        }
    }
}

#[test]
fn turning_point_is_holomorphic_in_energy() {
    let s = anharmonic();
    let e0 = c(1.05, 0.02);
    let contour_derivative = |r: f64| {
        let mut sum = c(0.0, 0.0);
        for k in 0..4 {
            let w = Complex64::from_polar(1.0, PI / 2.0 * k as f64);
            sum += find_turning_pair(&s, e0 + w * r, 0.1, None).unwrap().alpha / w;
        }
        sum / (4.0 * r)
    };
    let (d1, d2) = (contour_derivative(0.01), contour_derivative(0.02));
    assert!((d1 - d2).norm() < 1e-6, "{d1} {d2}");
    let tp = find_turning_pair(&s, e0, 0.1, None).unwrap();
    assert!((d1 - 1.0 / tp.slope_alpha).norm() < 1e-6);
}

#[test]
fn action_schwarz_and_reality() {
    let s = anharmonic();
    for eps in [0.0, 0.1, 0.2] {
        for re in [0.85, 1.0, 1.15] {
            for im in [-0.1, 0.0, 0.1] {
                let e = c(re, im);
                let (a, _) = action_at(&s, e, eps, None).unwrap();
                let (b, _) = action_at(&s, e.conj(), eps, None).unwrap();
                assert!((b.action.conj() - a.action).norm() < 1e-9);
                if im == 0.0 {
                    assert!(a.action.im.abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn period_is_positive_and_consistent() {
    let s = anharmonic();
    let mut last = 0.0;
    for k in 0..9 {
        let e = 0.8 + 0.05 * k as f64;
        let (v, tp) = action_at(&s, c(e, 0.0), 0.0, None).unwrap();
        assert!(v.period.re > 0.0);
        assert!(v.action.re > last);
        last = v.action.re;
        let fd = period_by_difference(&s, &tp, 32, 1e-5).unwrap();
        assert!((fd - v.period).norm() < 1e-6);
    }
}

#[test]
fn node_doubling_converges_spectrally() {
    let s = mixed();
    let tp = find_turning_pair(&s, c(1.1, 0.05), 0.2, None).unwrap();
    let values: Vec<Complex64> = [4, 8, 16, 32, 64].iter().map(|n| action_fixed(&s, &tp, *n).unwrap().0).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    for w in diffs.windows(2) {
        if w[0] > 1e-13 {
            assert!(w[1] < 0.1 * w[0] || w[1] < 1e-13, "{diffs:?}");
        }
    }
    let converged = action_integral(&s, &tp, 4).unwrap();
    assert!(converged.converged);
}

#[test]
fn bs_levels_are_real_for_real_eps() {
    let s = harmonic();
    for eps in [0.0, 0.1, 0.2] {
        let records = solve_bs(&s, eps, 0.1, (0.05, 0.95)).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            assert!(r.im_abs < 1e-8);
            let exact = (2 * r.k + 1) as f64 * 0.1 + eps * eps / 4.0;
            assert!((r.e_bs.re - exact).abs() < 1e-9);
        }
    }
}

#[test]
fn bs_matches_shooting_within_h_squared() {
    let s = anharmonic();
    let h = 0.1;
    let mut records = solve_bs(&s, 0.0, h, (0.05, 1.2)).unwrap();
    attach_shooting(&s, 0.0, h, &mut records, ShootOptions::default()).unwrap();
    for pair in records.windows(2) {
        let gap = pair[1].e_bs.re - pair[0].e_bs.re;
        let tp = find_turning_pair(&s, pair[0].e_bs, 0.0, None).unwrap();
        let period = action_integral(&s, &tp, 32).unwrap().period.re;
        let predicted = 2.0 * PI * h / period;
        assert!((gap - predicted).abs() < 0.1 * predicted);
    }
    for r in &records {
        let shoot = r.e_shoot.expect("shooting eigenvalue");
        assert!((shoot - r.e_bs).norm() < 5.0 * h * h, "k={} {} {}", r.k, shoot, r.e_bs);
    }
}

#[test]
fn certification_across_families() {
    let cases = [
        (harmonic().with_e0(0.5), 0.1, Window::new([0.2, 0.8], [-0.1, 0.1])),
        (quartic(), 0.1, Window::new([0.02, 0.5], [-0.1, 0.1])),
    ];
    for (s, h, rect) in cases {
        for eps in [0.0, 0.1, 0.2] {
            let cert = certify(&s, eps, h, rect, 16, 64, ShootOptions::default()).unwrap();
            assert!(cert.matches, "eps={eps}: {cert:?}");
            assert!(cert.zero_count > 0);
        }
    }
}

#[test]
fn scanned_spacing_and_box_independence() {
    let s = quartic();
    let h = 0.1;
    let shooter = Shooter::new(&s, 0.1, h, ShootOptions::default()).unwrap();
    let levels = scan_with(&shooter, (0.02, 1.0), 96).unwrap();
    assert!(levels.len() >= 4);
    for pair in levels.windows(2).skip(1) {
        let mid = 0.5 * (pair[0] + pair[1]);
        let tp = find_turning_pair(&s, c(mid, 0.0), 0.1, None).unwrap();
        let period = action_integral(&s, &tp, 32).unwrap().period.re;
        let predicted = 2.0 * PI * h / period;
        assert!(((pair[1] - pair[0]) - predicted).abs() < 0.1 * predicted, "{levels:?} {predicted}");
    }
    let wider = Shooter::new(&s, 0.1, h, ShootOptions::default().with_box_l(default_box_l(&s, h).unwrap() + 1.0))
        .unwrap();
    let again = scan_with(&wider, (0.02, 1.0), 96).unwrap();
    assert_eq!(again.len(), levels.len());
    for (a, b) in levels.iter().zip(&again) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn eiconal_residual_on_both_sides() {
    let s = mixed();
    let tp = find_turning_pair(&s, c(1.05, 0.03), 0.1, None).unwrap();
    for side in [Side::Left, Side::Right] {
        let phase = PhaseFunction::new(&s, &tp, side);
        let sign = if side == Side::Right { 1.0 } else { -1.0 };
        for k in 0..100 {
            let z = c(sign * (1.5 + 0.04 * k as f64), 0.5 * ((k as f64) * 0.37).sin());
            let d = phase.derivative(z).unwrap();
            let residual = d * d + s.eval(z, tp.eps) - tp.energy;
            assert!(residual.norm() < 1e-10 * (1.0 + d.norm_sqr()));
        }
    }
}

#[test]
fn three_lines_of_each_kind_satisfy_their_definition() {
    let s = mixed();
    let e = c(1.0, 0.04);
    let tp = find_turning_pair(&s, e, 0.1, None).unwrap();
    let tracer = Tracer::new(&s, e, 0.1, Window::new([-3.0, 3.0], [-3.0, 3.0]), TraceOptions::default()).with_pair(&tp);
    for point in [tp.alpha, tp.beta] {
        for kind in [LineKind::Stokes, LineKind::AntiStokes] {
            let dirs = initial_directions(&s, 0.1, point, kind).unwrap();
            assert_eq!(dirs.len(), 3);
            for dir in dirs {
                let line = tracer.trace(point, dir, kind, 6.0).unwrap();
                assert!(line.max_defect < 1e-6 * line.length().max(1e-3), "{kind:?} {}", line.max_defect);
                let monotone = line.phase_along.windows(2).all(|w| w[1] >= w[0] - 1e-12)
                    || line.phase_along.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                assert!(monotone);
            }
        }
    }
}
