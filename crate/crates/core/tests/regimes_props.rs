use fdlab::{classify, derive_params, tail_exponent, Error, RegimeLabel, Sign};
use proptest::prelude::*;

const DIMS: [u32; 5] = [3, 4, 5, 6, 10];

fn m_crit(n: u32) -> f64 {
    f64::from(n - 2) / f64::from(n)
}

/// `(n, m, β)` with `β` strictly above `β₀` (up to three times it).
fn above_beta0() -> impl Strategy<Value = (u32, f64, f64)> {
    (prop::sample::select(DIMS.to_vec()), 0.001f64..0.999, 1.0001f64..3.0).prop_map(|(n, mf, bf)| {
        let m = mf * m_crit(n);
        let p = derive_params(n, m, 1e9).unwrap();
        (n, m, p.beta_0 * bf)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn roots_solve_the_characteristic_polynomial((n, m, beta) in above_beta0()) {
        let p = derive_params(n, m, beta).unwrap();
        let (g1, g2) = (p.gamma_1.unwrap(), p.gamma_2.unwrap());
        let (a, b, c) = (1.0 - m, -p.a0, 2.0 * (f64::from(n) - 2.0 - f64::from(n) * m));
        for g in [g1, g2] {
            let scale = (a * g * g).abs() + (b * g).abs() + c.abs();
            prop_assert!((a * g * g + b * g + c).abs() < 1e-12 * scale);
        }
        prop_assert!((g1 + g2 - p.a0 / a).abs() < 1e-12 * (g1 + g2));
        prop_assert!((g1 * g2 - c / a).abs() < 1e-12 * g1 * g2);
        prop_assert!(g1 > 0.0 && g2 >= g1);
        prop_assert!(p.a1.unwrap() >= p.a2.unwrap());
        if g2 > g1 * (1.0 + 1e-9) {
            prop_assert!(p.a1.unwrap() > p.a2.unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn beta1_dominates_beta0(n in prop::sample::select(DIMS.to_vec()), mf in 0.001f64..0.999) {
        let m = mf * m_crit(n);
        let p = derive_params(n, m, 1e9).unwrap();
        prop_assert!(p.beta_1 >= p.beta_0 * (1.0 - 1e-12));
        let boundary = n > 4 && (m - f64::from(n - 4) / f64::from(n - 2)).abs() < 1e-6;
        if !boundary {
            prop_assert!(p.beta_1 > p.beta_0);
        }
    }

    #[test]
    fn a1_monotone_above_the_conformal_exponent(
        n in prop::sample::select(DIMS.to_vec()),
        t in 0.0f64..0.999,
        b1 in 1.0001f64..4.0,
        db in 0.001f64..1.0,
    ) {
        let nf = f64::from(n);
        let lo = (nf - 2.0) / (nf + 2.0);
        let m = lo + t * (m_crit(n) - lo);
        let beta_0 = derive_params(n, m, 1e9).unwrap().beta_0;
        let p = derive_params(n, m, beta_0 * b1).unwrap();
        let q = derive_params(n, m, beta_0 * (b1 + db)).unwrap();
        prop_assert!(q.a1.unwrap() > p.a1.unwrap());
        prop_assert!(q.a2.unwrap() < p.a2.unwrap());
    }
}

#[test]
fn at_beta1_exact_roots_and_boundary() {
    let p = derive_params(6, 0.5, 1.0).unwrap();
    assert_eq!(p.regime, RegimeLabel::Unsupported);
    assert!((p.beta_0 - p.beta_1).abs() < 1e-12);
    for n in DIMS {
        for k in 1..20 {
            let m = m_crit(n) * f64::from(k) / 20.0;
            let beta_1 = derive_params(n, m, 1e9).unwrap().beta_1;
            let p = derive_params(n, m, beta_1).unwrap();
            let d = f64::from(n) - 2.0 - f64::from(n) * m;
            let other = d / (1.0 - m);
            assert!(p.gamma_1 == Some(other.min(2.0)) && p.gamma_2 == Some(other.max(2.0)));
        }
    }
}

/// The case table against the sign of the computed `A₁`, on a dense grid.
#[test]
fn sign_table_matches_computed_a1() {
    for n in DIMS {
        for i in 1..200 {
            let m = m_crit(n) * f64::from(i) / 200.0;
            let base = derive_params(n, m, 1e9).unwrap();
            for j in 0..200 {
                let beta = base.beta_e * (0.5 + 3.0 * f64::from(j) / 200.0) + base.beta_1 * f64::from(j) / 200.0;
                match derive_params(n, m, beta) {
                    Err(Error::SubcriticalBeta { .. }) => assert!(beta < base.beta_e),
                    Err(e) => panic!("{e}"),
                    Ok(p) => {
                        let reg = classify(&p);
                        match reg.sign_a1 {
                            None => {
                                let on_line = n > 4 && (m - f64::from(n - 4) / f64::from(n - 2)).abs() < 1e-9;
                                assert!(beta <= p.beta_0 * (1.0 + 1e-12) || on_line);
                            }
                            Some(s) => {
                                assert!(beta > p.beta_0);
                                let a1 = p.a1.unwrap();
                                if a1.abs() > 1e-9 {
                                    assert_eq!(Sign::of(a1, 0.0), s, "n={n} m={m} beta={beta} a1={a1}");
                                }
                                assert!(p.a1_consistent());
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn tail_exponent_sign_follows_regime() {
    for (n, m, beta, positive) in
        [(3, 0.2, 3.0, true), (3, 0.2, 2.2, false), (3, 0.2, 2.5, false), (6, 0.3, 0.45, true)]
    {
        let p = derive_params(n, m, beta).unwrap();
        assert_eq!(tail_exponent(&p).unwrap() > 0.0, positive, "{n} {m} {beta}");
    }
    let unsupported = derive_params(3, 0.2, 1.9).unwrap();
    assert!(matches!(tail_exponent(&unsupported), Err(Error::UnsupportedRegime(_))));
}
