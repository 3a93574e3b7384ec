mod common;

use bettest_core::bet::{likelihood_ratio_bet, make_bet, Bet, ImpliedAlternative, Payoff};
use bettest_core::neyman_pearson::neyman_pearson_bet;
use bettest_core::{DistributionModel, Outcome};
use common::{discrete, mean_log, normalized, triple, weights};
use proptest::prelude::*;

fn payoff_table(values: Vec<f64>) -> Payoff {
    Payoff::new(move |y| values[y.as_real().unwrap() as usize])
}

fn values(bet: &Bet, k: usize) -> Vec<f64> {
    (0..k).map(|i| bet.payoff().value(&Outcome::Real(i as f64))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gibbs_inequality((p, q, r) in triple(8)) {
        let (pn, qn, rn) = (normalized(&p), normalized(&q), normalized(&r));
        let null: DistributionModel = discrete(&p).into();
        let s_q = likelihood_ratio_bet(&null, &discrete(&q).into()).unwrap();
        let s_r = likelihood_ratio_bet(&null, &discrete(&r).into()).unwrap();
        let k = p.len();
        let by_lr: Vec<f64> = qn.iter().zip(&pn).map(|(a, b)| a / b).collect();
        let by_r: Vec<f64> = rn.iter().zip(&pn).map(|(a, b)| a / b).collect();
        for (lib, oracle) in values(&s_q, k).iter().zip(&by_lr) {
            prop_assert!((lib - oracle).abs() <= 1e-12 * oracle);
        }
        let best = mean_log(&qn, &values(&s_q, k));
        let other = mean_log(&qn, &values(&s_r, k));
        prop_assert!((best - mean_log(&qn, &by_lr)).abs() < 1e-12);
        prop_assert!((other - mean_log(&qn, &by_r)).abs() < 1e-12);
        prop_assert!(best >= other - 1e-12, "{best} < {other}");
    }

    #[test]
    fn likelihood_ratio_is_log_optimal((p, q, raw) in triple(8), zero in 0usize..8) {
        let null: DistributionModel = discrete(&p).into();
        let lr = likelihood_ratio_bet(&null, &discrete(&q).into()).unwrap();
        let mut raw = raw;
        if zero < raw.len() && raw.len() > 2 {
            raw[zero] = 0.0;
        }
        let other = make_bet(payoff_table(raw.clone()), &null).unwrap();
        let qn = normalized(&q);
        let k = p.len();
        let best = mean_log(&qn, &values(&lr, k));
        let s = mean_log(&qn, &values(&other, k));
        prop_assert!(best >= s - 1e-12, "{best} < {s}");
        // the implied target of a bet is its own log-optimal growth
        let target = other.implied_target().unwrap();
        let ImpliedAlternative::Discrete(implied) = other.implied_alternative().unwrap() else {
            panic!("discrete null gives a discrete alternative")
        };
        let own = mean_log(implied.probabilities(), &values(&other, k));
        prop_assert!((target.ln() - own).abs() < 1e-9);
        prop_assert!(target >= 1.0 - 1e-9);
    }

    #[test]
    fn implied_alternative_is_a_distribution((p, raw, _r) in triple(8)) {
        let null: DistributionModel = discrete(&p).into();
        let bet = make_bet(payoff_table(raw), &null).unwrap();
        let ImpliedAlternative::Discrete(q) = bet.implied_alternative().unwrap() else {
            panic!("discrete null gives a discrete alternative")
        };
        let total: f64 = q.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for (i, (_, mass)) in q.iter().enumerate() {
            let want = discrete(&p).probabilities()[i] * bet.payoff().value(&Outcome::Real(i as f64));
            prop_assert!((mass - want).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_invariance(p in (2usize..8).prop_flat_map(weights), raw_seed in 0.1f64..5.0) {
        let null: DistributionModel = discrete(&p).into();
        let k = p.len();
        let raw: Vec<f64> = (0..k).map(|i| (raw_seed * (i as f64 + 1.0)).sin().abs() + 0.05).collect();
        let base = make_bet(payoff_table(raw.clone()), &null).unwrap();
        for c in [1e-6, 1.0, 1e6] {
            let scaled: Vec<f64> = raw.iter().map(|x| c * x).collect();
            let bet = make_bet(payoff_table(scaled), &null).unwrap();
            for (a, b) in values(&bet, k).iter().zip(values(&base, k)) {
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }
}

#[test]
fn scale_invariance_on_a_continuous_null() {
    let null = DistributionModel::normal(0.0, 10.0).unwrap();
    let raw = |c: f64| Payoff::new(move |y| c * (y.as_real().unwrap() / 50.0).exp());
    let base = make_bet(raw(1.0), &null).unwrap();
    for c in [1e-6, 1e6] {
        let bet = make_bet(raw(c), &null).unwrap();
        for i in -100..=100 {
            let y = Outcome::Real(i as f64);
            let (a, b) = (bet.payoff().value(&y), base.payoff().value(&y));
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}

#[test]
fn normal_implied_target_is_exp_kl() {
    for (m0, m1, sd) in [(0.0, 1.0, 10.0), (0.0, 37.0, 10.0), (0.0, 20.0, 10.0), (3.0, -1.0, 2.0)] {
        let bet = likelihood_ratio_bet(
            &DistributionModel::normal(m0, sd).unwrap(),
            &DistributionModel::normal(m1, sd).unwrap(),
        )
        .unwrap();
        let kl: f64 = (m1 - m0) * (m1 - m0) / (2.0 * sd * sd);
        let t = bet.implied_target().unwrap();
        assert!((t.ln() - kl).abs() < 1e-7 * kl.max(1.0), "{m0} {m1} {sd}: {t}");
    }
}

/// Score of the likelihood-ratio bet at the NP threshold never exceeds
/// `1/alpha`.
fn markov_holds(null: &DistributionModel, alt: &DistributionModel, alpha: f64) -> bool {
    let np = neyman_pearson_bet(null, alt, alpha).unwrap();
    let t = np.threshold().unwrap();
    let lr = likelihood_ratio_bet(null, alt).unwrap();
    lr.score(&Outcome::Real(t)).unwrap() <= 1.0 / alpha + 1e-9
}

#[test]
fn markov_footnote_on_the_examples() {
    let null = DistributionModel::normal(0.0, 10.0).unwrap();
    for mean in [1.0, 37.0, 20.0] {
        assert!(markov_holds(&null, &DistributionModel::normal(mean, 10.0).unwrap(), 0.05));
    }
}

#[test]
fn markov_footnote_on_random_normal_pairs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let sd = rng.random_range(0.5..20.0);
        let m0 = rng.random_range(-10.0..10.0);
        let shift: f64 = rng.random_range(0.05..4.0) * sd * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let alpha = rng.random_range(0.001..0.2);
        let null = DistributionModel::normal(m0, sd).unwrap();
        let alt = DistributionModel::normal(m0 + shift, sd).unwrap();
        assert!(markov_holds(&null, &alt, alpha), "{m0} {shift} {sd} {alpha}");
    }
}
