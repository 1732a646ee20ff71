use omm_core::norms::{NormError, NormSpec};
use proptest::prelude::*;

fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..8).prop_flat_map(|d| prop::collection::vec(-10.0f64..10.0, d)).prop_filter("nonzero", |v| {
        v.iter().map(|a| a.abs()).fold(0.0, f64::max) > 1e-3
    })
}

fn p_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), 1.1f64..6.0]
}

fn manual_lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

proptest! {
    #[test]
    fn norm_matches_definition(x in vec_strategy(), p in p_strategy()) {
        let n = NormSpec::lp(p).unwrap();
        let expect = manual_lp(&x, p);
        prop_assert!((n.norm(&x) - expect).abs() <= 1e-10 * expect);
        prop_assert!((n.dual_norm(&x) - manual_lp(&x, n.q())).abs() <= 1e-10 * expect.max(1.0));
        prop_assert!((1.0 / p + 1.0 / n.q() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_duality(x in vec_strategy(), p in p_strategy()) {
        let n = NormSpec::lp(p).unwrap();
        let g = n.grad_norm(&x).unwrap();
        let nx = n.norm(&x);
        prop_assert!((n.dual_norm(&g) - 1.0).abs() < 1e-9);
        let gx: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((gx - nx).abs() < 1e-9 * nx.max(1.0));
        let back = n.grad_dual_norm(&g).unwrap();
        for (b, xi) in back.iter().zip(&x) {
            prop_assert!((b - xi / nx).abs() < 1e-7);
        }
    }

    #[test]
    fn holder_and_triangle(x in vec_strategy(), p in p_strategy(), s in -3.0f64..3.0) {
        let n = NormSpec::lp(p).unwrap();
        let w: Vec<f64> = x.iter().rev().map(|a| a * 0.7 - 1.0).collect();
        let wx: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!(wx.abs() <= n.norm(&x) * n.dual_norm(&w) * (1.0 + 1e-12) + 1e-12);
        let sum: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + b).collect();
        prop_assert!(n.norm(&sum) <= n.norm(&x) + n.norm(&w) + 1e-9);
        let scaled: Vec<f64> = x.iter().map(|a| s * a).collect();
        prop_assert!((n.norm(&scaled) - s.abs() * n.norm(&x)).abs() < 1e-9 * n.norm(&x).max(1.0));
    }

    #[test]
    fn gradient_finite_difference(x in vec_strategy(), p in p_strategy()) {
        let n = NormSpec::lp(p).unwrap();
        // Coordinates near zero make ℓp non-smooth for p < 2; skip them.
        prop_assume!(x.iter().all(|a| a.abs() > 1e-2));
        let g = n.grad_norm(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (n.norm(&a) - n.norm(&b)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-5, "coordinate {i}: fd {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn invalid_exponents_and_zero_vectors() {
    for p in [1.0, 0.5, -2.0, f64::INFINITY, f64::NAN] {
        assert!(matches!(NormSpec::lp(p), Err(NormError::InvalidExponent(_))));
    }
    let n = NormSpec::l2();
    assert_eq!(n.grad_norm(&[0.0, 0.0]), Err(NormError::ZeroVector));
    assert_eq!(NormSpec::lp(3.0).unwrap().dual().p(), 1.5);
    assert!(NormSpec::default().is_l2());
}
