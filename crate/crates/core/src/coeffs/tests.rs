use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn mu(v: f64) -> ChemicalPotential {
    ChemicalPotential::new(v).unwrap()
}

fn eval_full(kind: CoeffKind, a: f64, m: f64, rep: Representation) -> CoeffResult {
    coeff(
        kind,
        a,
        mu(m),
        rep,
        &SeriesControl::default(),
        &QuadratureControl::default(),
    )
    .unwrap_or_else(|e| panic!("{kind} a={a} mu={m} {rep}: {e}"))
}

fn eval(kind: CoeffKind, a: f64, m: f64, rep: Representation) -> f64 {
    eval_full(kind, a, m, rep).value
}

// reference values from 30-digit evaluations of the Bessel and lattice series
const REFERENCE: [(CoeffKind, f64, f64, f64); 12] = [
    (CoeffKind::GammaFermiEntropy, -1.0, -1.0, 4.7738006292440053011),
    (CoeffKind::GammaFermiEntropy, 0.5, -1.0, 0.22971245530546316588),
    (CoeffKind::GammaFermiEntropy, 2.5, -0.3, 0.016872451471650705005),
    (CoeffKind::OmegaFermiEnergy, 0.5, -1.0, 0.041570157082929687226),
    (CoeffKind::OmegaFermiEnergy, 1.5, -0.5, -0.47922394763646751756),
    (CoeffKind::OmegaFermiEnergy, 2.5, -0.3, -17.392120196992892144),
    (CoeffKind::ChiBoseEntropy, 0.0, -2.0, 0.45844874336819036061),
    (CoeffKind::ChiBoseEntropy, 1.5, -0.5, 3.5364575031187731828),
    (CoeffKind::ChiBoseEntropy, 2.5, -0.3, 273.52627045171888961),
    (CoeffKind::KappaBoseEnergy, -1.0, -1.0, 4.1003491370105478587),
    (CoeffKind::KappaBoseEnergy, 0.5, -1.0, 0.281606389404523576),
    (CoeffKind::KappaBoseEnergy, 0.0, -2.0, 0.31303528549933130364),
];

#[test]
fn matches_high_precision_reference() {
    for (kind, a, m, want) in REFERENCE {
        for rep in [Representation::BesselSeries, Representation::PoissonSeries] {
            let got = eval_full(kind, a, m, rep);
            let tol = (1e-11 * want.abs()).max(got.est_error);
            assert!(
                (got.value - want).abs() <= tol,
                "{kind} a={a} mu={m} {rep}: {got:?} vs {want}"
            );
            assert!(got.est_error <= 1e-8 * want.abs().max(1.0));
        }
    }
}

#[test]
fn bessel_and_poisson_agree_on_grid() {
    for kind in CoeffKind::ALL {
        for m in [-0.5, -1.0, -2.0, -4.0] {
            for i in 0..=12 {
                let a = -3.0 + 0.5 * i as f64;
                let b = eval_full(kind, a, m, Representation::BesselSeries);
                let p = eval_full(kind, a, m, Representation::PoissonSeries);
                let diff = (b.value - p.value).abs();
                let allowed = b.est_error + p.est_error + 1e-14 * b.value.abs();
                assert!(diff <= allowed, "{kind} a={a} mu={m}: {b:?} vs {p:?}");
                assert!(diff <= 1e-6 * b.value.abs().max(1.0));
            }
        }
    }
}

#[test]
fn xi_series_matches_bessel_inside_radius() {
    for kind in CoeffKind::ALL {
        for m in [-0.1, -0.5, -1.5] {
            for a in [-2.5, -1.0, 0.0, 0.5, 1.0, 1.5, 2.25] {
                let b = eval(kind, a, m, Representation::BesselSeries);
                let x = eval(kind, a, m, Representation::XiSeries);
                assert!(
                    (b - x).abs() <= 1e-9 * b.abs().max(1.0),
                    "{kind} a={a} mu={m}: {b} vs {x}"
                );
            }
        }
    }
}

#[test]
fn xi_series_outside_radius_is_rejected() {
    let r = coeff(
        CoeffKind::GammaFermiEntropy,
        1.0,
        mu(-3.5),
        Representation::XiSeries,
        &SeriesControl::default(),
        &QuadratureControl::default(),
    );
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn weight_integral_matches_bessel() {
    for kind in CoeffKind::ALL {
        for m in [-0.5, -1.0, -2.0] {
            for a in [-1.5, -0.5, 0.0, 0.5, 1.0, 2.0] {
                let b = eval(kind, a, m, Representation::BesselSeries);
                let q = eval(kind, a, m, Representation::Quadrature);
                assert!(
                    (b - q).abs() <= 1e-9 * b.abs().max(1.0),
                    "{kind} a={a} mu={m}: {b} vs {q}"
                );
            }
        }
    }
}

#[test]
fn mellin_oracle_matches_bessel() {
    let qctl = QuadratureControl::default();
    for kind in CoeffKind::ALL {
        for m in [-0.5, -1.0, -2.0] {
            for a in [-2.0, -1.0, -0.5, -0.25] {
                let b = eval(kind, a, m, Representation::BesselSeries);
                let o = mellin_coeff_oracle(kind, a, mu(m), &qctl).unwrap();
                assert!(
                    (b - o).abs() <= 1e-7 * b.abs().max(1.0),
                    "{kind} a={a} mu={m}: {b} vs {o}"
                );
            }
        }
    }
    assert!(mellin_coeff_oracle(CoeffKind::GammaFermiEntropy, 0.0, mu(-1.0), &qctl).is_err());
}

#[test]
fn small_mu_falls_back_from_bessel() {
    let r = coeff(
        CoeffKind::GammaFermiEntropy,
        1.0,
        mu(-0.01),
        Representation::BesselSeries,
        &SeriesControl::default(),
        &QuadratureControl::default(),
    )
    .unwrap();
    assert_eq!(r.rep, Representation::PoissonSeries);
    assert_relative_eq!(
        r.value,
        eval(CoeffKind::GammaFermiEntropy, 1.0, -0.01, Representation::XiSeries),
        max_relative = 1e-10
    );
}

#[test]
fn fermi_coefficients_at_zero_mu_are_limits() {
    for a in [-1.5, -0.75, 0.25, 1.0, 2.0, 3.5] {
        let want = limit_coeff(CoeffKind::GammaFermiEntropy, a).unwrap();
        for rep in [Representation::PoissonSeries, Representation::XiSeries] {
            assert_relative_eq!(
                eval(CoeffKind::GammaFermiEntropy, a, 0.0, rep),
                want,
                max_relative = 1e-11
            );
        }
    }
    let got = eval(CoeffKind::OmegaFermiEnergy, -1.0, 0.0, Representation::PoissonSeries);
    assert_relative_eq!(
        got,
        limit_coeff(CoeffKind::OmegaFermiEnergy, -1.0).unwrap(),
        max_relative = 1e-11
    );
}

#[test]
fn bosonic_coefficients_reject_zero_mu() {
    for kind in [CoeffKind::ChiBoseEntropy, CoeffKind::KappaBoseEnergy] {
        for rep in Representation::ALL {
            let r = coeff(
                kind,
                1.0,
                mu(0.0),
                rep,
                &SeriesControl::default(),
                &QuadratureControl::default(),
            );
            assert!(r.is_err(), "{kind} {rep}");
        }
    }
}

#[test]
fn limit_functions_at_special_points() {
    let g0 = limit_coeff(CoeffKind::GammaFermiEntropy, 0.0).unwrap();
    assert_relative_eq!(g0, std::f64::consts::LN_2, max_relative = 1e-14);
    // Richardson from a = ±1e-7 as an independent route to γ(0)
    let h: f64 = 1e-7;
    let near = 0.5
        * (limit_coeff(CoeffKind::GammaFermiEntropy, h).unwrap()
            + limit_coeff(CoeffKind::GammaFermiEntropy, -h).unwrap());
    assert_relative_eq!(near, std::f64::consts::LN_2, max_relative = 1e-12);
    let g_half = limit_coeff(CoeffKind::GammaFermiEntropy, 0.5).unwrap();
    assert_relative_eq!(g_half, 0.5 / PI.sqrt(), max_relative = 1e-13);
    let c1 = limit_coeff(CoeffKind::ChiBoseEntropy, 1.0).unwrap();
    assert_relative_eq!(c1, 1.0 / 24.0, max_relative = 1e-13);
    assert!(matches!(
        limit_coeff(CoeffKind::OmegaFermiEnergy, 0.5),
        Err(Error::Pole { .. })
    ));
    assert!(matches!(
        limit_coeff(CoeffKind::KappaBoseEnergy, 0.5),
        Err(Error::Pole { .. })
    ));
    assert!(matches!(
        limit_coeff(CoeffKind::ChiBoseEntropy, 0.0),
        Err(Error::Pole { .. })
    ));
}

#[test]
fn limit_function_large_order_is_finite() {
    // the ξ terms at large k are evaluated in log space
    let (ln_mag, sign) = ln_limit_coeff(CoeffKind::GammaFermiEntropy, 300.0).unwrap();
    assert!(ln_mag.is_finite() && sign == 1.0);
}

#[test]
fn bessel_terms_differ_only_by_alternating_sign() {
    let qctl = QuadratureControl::default();
    let pairs = [
        (CoeffKind::GammaFermiEntropy, CoeffKind::ChiBoseEntropy),
        (CoeffKind::OmegaFermiEnergy, CoeffKind::KappaBoseEnergy),
    ];
    for (f, b) in pairs {
        let tf = bessel_series_terms(f, 0.7, mu(-1.3), 8, &qctl).unwrap();
        let tb = bessel_series_terms(b, 0.7, mu(-1.3), 8, &qctl).unwrap();
        for (n, (x, y)) in tf.iter().zip(&tb).enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(*x, sign * y, max_relative = 1e-15);
        }
    }
}

#[test]
fn singular_points_are_routed_through_the_limit() {
    // a = -1/2 is a pole of the individual Poisson pieces but not of γ_μ
    let b = eval(CoeffKind::GammaFermiEntropy, -0.5, -1.0, Representation::BesselSeries);
    let p = eval(CoeffKind::GammaFermiEntropy, -0.5, -1.0, Representation::PoissonSeries);
    assert_relative_eq!(b, p, max_relative = 1e-9);
    let b = eval(CoeffKind::ChiBoseEntropy, -1.0, -0.7, Representation::BesselSeries);
    let x = eval(CoeffKind::ChiBoseEntropy, -1.0, -0.7, Representation::XiSeries);
    assert_relative_eq!(b, x, max_relative = 1e-9);
}

#[test]
fn moments_match_reference_and_quadrature() {
    let sctl = SeriesControl::default();
    let qctl = QuadratureControl::default();
    let h0 = moment_closed(MomentKind::FermiEntropy, 0.0, mu(-1.0), &sctl).unwrap();
    assert_relative_eq!(h0, 1.4192212074810492954, max_relative = 1e-12);
    let k1 = moment_closed(MomentKind::BoseEntropy, 1.0, mu(-1.0), &sctl).unwrap();
    assert_relative_eq!(k1, 2.8459242800643699485, max_relative = 1e-12);
    for kind in [MomentKind::FermiEntropy, MomentKind::BoseEntropy] {
        for nu in [0.0, 1.0, 2.0, 3.0] {
            for m in [-0.5, -1.0, -2.0] {
                let c = moment_closed(kind, nu, mu(m), &sctl).unwrap();
                let q = moment_quadrature(kind, nu, mu(m), &qctl).unwrap().value;
                assert!((c - q).abs() <= 1e-8 * c.abs().max(1.0), "{kind:?} nu={nu} mu={m}");
            }
        }
    }
}

#[test]
fn moment_parts_sum_to_the_whole() {
    let sctl = SeriesControl::default();
    let lg = fermi_log_moment_closed(2.0, mu(-2.0), &sctl).unwrap();
    assert_relative_eq!(lg, 0.9983464283104489778, max_relative = 1e-12);
    let en = fermi_energy_moment_closed(2.0, mu(-2.0), &sctl).unwrap();
    assert_relative_eq!(en, 4.0673324693550659689, max_relative = 1e-12);
    let whole = moment_closed(MomentKind::FermiEntropy, 2.0, mu(-2.0), &sctl).unwrap();
    assert_relative_eq!(lg + en, whole, max_relative = 1e-13);
}

#[test]
fn moment_domain_errors() {
    let sctl = SeriesControl::default();
    assert!(moment_closed(MomentKind::FermiEntropy, -1.0, mu(-1.0), &sctl).is_err());
    assert!(moment_closed(MomentKind::BoseEntropy, 1.0, mu(0.0), &sctl).is_err());
}

#[test]
fn names_round_trip() {
    for k in CoeffKind::ALL {
        assert_eq!(k.name().parse::<CoeffKind>().unwrap(), k);
    }
    for r in Representation::ALL {
        assert_eq!(r.name().parse::<Representation>().unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fermi_gamma_is_positive(a in -2.0f64..3.0, m in 0.1f64..3.0) {
        let v = eval(CoeffKind::GammaFermiEntropy, a, -m, Representation::BesselSeries);
        prop_assert!(v > 0.0);
    }

    #[test]
    fn representations_agree(a in -2.0f64..2.5, m in 0.2f64..2.5, idx in 0usize..4) {
        let kind = CoeffKind::ALL[idx];
        let b = eval_full(kind, a, -m, Representation::BesselSeries);
        let p = eval_full(kind, a, -m, Representation::PoissonSeries);
        prop_assert!((b.value - p.value).abs() <= b.est_error + p.est_error + 1e-14 * b.value.abs());
    }
}
