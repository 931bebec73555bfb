use frameless_mud::model::{binom, binomial_pmf, ln_binom, LnBinomialTable};
use frameless_mud::{degree_distribution, SystemParams};
use num_bigint::BigUint;
use proptest::prelude::*;

fn exact_binom(a: u64, b: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().unwrap()
}

#[test]
fn binom_matches_big_integers() {
    for (a, b) in [(200u64, 100u64), (100, 50), (64, 32), (65, 32), (300, 150), (1000, 3), (500, 250)] {
        let exact = big_to_f64(&exact_binom(a, b));
        let got = binom(a as i64, b as i64);
        let rel = ((got - exact) / exact).abs();
        assert!(rel <= 1e-12, "C({a},{b}): got {got:e}, exact {exact:e}, rel {rel:e}");
    }
}

#[test]
fn binom_small_values() {
    assert_eq!(binom(5, 2), 10.0);
    assert_eq!(binom(3, 5), 0.0);
    assert_eq!(binom(-1, 0), 0.0);
    assert_eq!(binom(4, -1), 0.0);
    assert_eq!(binom(0, 0), 1.0);
}

#[test]
fn pascal_identity() {
    for a in 1..=300i64 {
        for b in 1..a {
            let lhs = binom(a, b);
            let rhs = binom(a - 1, b - 1) + binom(a - 1, b);
            assert!(((lhs - rhs) / lhs).abs() <= 1e-12, "a={a} b={b}");
        }
    }
}

#[test]
fn log_table_agrees_with_direct() {
    let t = LnBinomialTable::new(1500);
    for a in [0i64, 1, 7, 64, 200, 1029, 1030, 1500] {
        for b in [0, 1, a / 3, a / 2, a] {
            let d = ln_binom(a, b);
            if d == f64::NEG_INFINITY {
                assert_eq!(t.ln(a, b), d);
                continue;
            }
            assert!((t.ln(a, b) - d).abs() <= 1e-9 * d.abs().max(1.0), "a={a} b={b}");
        }
    }
    assert_eq!(t.ln(5, 6), f64::NEG_INFINITY);
}

#[test]
fn degree_distribution_examples() {
    let om = degree_distribution(&SystemParams::new(1, 1, 1, 1.0).unwrap());
    assert_eq!(om.omega(), &[0.0, 1.0]);

    let om = degree_distribution(&SystemParams::new(4, 1, 1, 2.0).unwrap());
    for (got, want) in om.omega().iter().zip([1.0, 4.0, 6.0, 4.0, 1.0]) {
        assert!((got - want / 16.0).abs() < 1e-15);
    }

    let om = degree_distribution(&SystemParams::new(100, 1, 1, 3.7).unwrap());
    assert!((om.get(0) - (1.0f64 - 0.037).powi(100)).abs() < 1e-15);
}

#[test]
fn params_reject_invalid() {
    assert!(SystemParams::new(0, 1, 1, 1.0).is_err());
    assert!(SystemParams::new(5, 1, 0, 1.0).is_err());
    assert!(SystemParams::new(5, 1, 1, 0.0).is_err());
    assert!(SystemParams::new(5, 1, 1, 5.5).is_err());
    assert!(SystemParams::new(5, 0, 1, 5.0).is_ok());
}

proptest! {
    #[test]
    fn degree_distribution_sums_to_one(n in 1usize..=500, beta in 0.01f64..=8.0) {
        prop_assume!(beta <= n as f64);
        let om = degree_distribution(&SystemParams::new(n, 1, 1, beta).unwrap());
        let total: f64 = om.omega().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(om.omega().iter().all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn binomial_rows_are_probabilities(trials in 0usize..=400, p in 0.0f64..=1.0) {
        let row = binomial_pmf(trials, p);
        prop_assert_eq!(row.len(), trials + 1);
        let total: f64 = row.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}
