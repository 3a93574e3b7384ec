//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fail.

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use bettest_core::bet::{likelihood_ratio_bet, make_bet, Payoff};
use bettest_core::bounded::{
    measurement_capital_curve, measurement_grid, run_bounded, warranty_interval,
    HoeffdingStrategy, Side,
};
use bettest_core::calibration::{calibrated_alternative_tail, shrink_pvalue, PValueFunction};
use bettest_core::neyman_pearson::{neyman_pearson_bet, RejectionRegion};
use bettest_core::protocol::{run_protocol, ConditionalFn, StrategyFn};
use bettest_core::special::std_normal_upper_quantile;
use bettest_core::warranty::{confidence_to_warranty, linear_grid, warranty_set, WarrantyCurve};
use bettest_core::{DiscreteDistribution, DistributionModel, NormalModel, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn within(name: &str, got: f64, want: f64, tol: f64) -> Check {
    if (got - want).abs() <= tol {
        Ok(format!("{name} = {got:.6} (want {want} +- {tol})"))
    } else {
        Err(format!("{name} = {got:.6}, want {want} +- {tol}"))
    }
}

fn in_range(name: &str, got: f64, lo: f64, hi: f64) -> Check {
    if (lo..=hi).contains(&got) {
        Ok(format!("{name} = {got:.4e} in [{lo:e}, {hi:e}]"))
    } else {
        Err(format!("{name} = {got:.4e} outside [{lo:e}, {hi:e}]"))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let failed = parts.iter().any(Result::is_err);
    let lines: Vec<String> = parts
        .into_iter()
        .map(|p| match p {
            Ok(s) => s,
            Err(s) => format!("FAILED {s}"),
        })
        .collect();
    if failed {
        Err(lines.join("; "))
    } else {
        Ok(lines.join("; "))
    }
}

fn lib<T>(r: bettest_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn normal(m: f64, sd: f64) -> DistributionModel {
    DistributionModel::normal(m, sd).unwrap()
}

/// Score at `y`, implied target, upper tail at `y`, and NP power at 0.05 for
/// the normal examples with null N(0, 10).
fn normal_example(alt_mean: f64, y: f64) -> Result<[f64; 4], String> {
    let null = normal(0.0, 10.0);
    let alt = normal(alt_mean, 10.0);
    let bet = lib(likelihood_ratio_bet(&null, &alt))?;
    let np = lib(neyman_pearson_bet(&null, &alt, 0.05))?;
    Ok([
        lib(bet.score(&Outcome::Real(y)))?,
        lib(bet.implied_target())?,
        lib(null.upper_tail(y))?,
        lib(np.power(&alt))?,
    ])
}

fn example(alt_mean: f64, y: f64, want: [(f64, f64); 4]) -> Check {
    let got = normal_example(alt_mean, y)?;
    let names = ["score", "implied_target", "p", "np_power"];
    all((0..4).map(|i| within(names[i], got[i], want[i].0, want[i].1)).collect())
}

fn criterion_1() -> Check {
    example(1.0, 30.0, [
        ((59.0f64 / 200.0).exp(), 1e-3),
        (0.005f64.exp(), 1e-4),
        (0.00135, 2e-5),
        (0.0606, 5e-3),
    ])
}

fn criterion_2() -> Check {
    example(37.0, 16.5, [(0.4771, 1e-3), (938.9, 0.5), (0.0495, 5e-4), (0.980, 3e-3)])
}

fn criterion_3() -> Check {
    example(20.0, 5.0, [(0.3679, 1e-3), (7.389, 0.01), (0.3085, 5e-4), (0.639, 5e-3)])
}

fn criterion_4() -> Check {
    let rows = [
        (0.10, 2.2, 0.05),
        (0.05, 3.5, 0.05),
        (0.01, 9.0, 0.05),
        (0.005, 13.1, 0.05),
        (0.001, 30.6, 0.5),
        (1e-6, 999.0, 1.0),
    ];
    all(rows
        .iter()
        .map(|&(p, want, tol)| within(&format!("shrink({p})"), lib(shrink_pvalue(p))?, want, tol))
        .collect())
}

fn one_figure(x: f64) -> String {
    format!("{x:.0e}")
}

fn criterion_5() -> Check {
    let chi = lib(DistributionModel::chi_squared(11))?;
    let chi_p = lib(chi.upper_tail(40.748))?;
    let z = lib(PValueFunction::two_sided(NormalModel::new(0.0, 1.0).unwrap(), 0.0))?;
    let z_p = lib(z.pvalue(5.20))?;
    let chi_score = lib(PValueFunction::upper(chi).calibrated_score(40.748))?;
    let z_score = lib(z.calibrated_score(5.20))?;
    let weldon = lib(PValueFunction::two_sided(
        NormalModel::new(1.0 / 3.0, 0.00084).unwrap(),
        1.0 / 3.0,
    ))?;
    let tail = lib(calibrated_alternative_tail(&weldon, 0.0044))?;
    let rounds = |name: &str, x: f64, want: &str| {
        if one_figure(x) == want {
            Ok(format!("{name} {x:.1} rounds to {want}"))
        } else {
            Err(format!("{name} {x:.1} rounds to {}, want {want}", one_figure(x)))
        }
    };
    all(vec![
        in_range("chi2(11) tail at 40.748", chi_p, 2.7e-5, 3.3e-5),
        in_range("two-sided p at 5.20 sd", z_p, 1.9e-7, 2.1e-7),
        rounds("chi2 calibrated score", chi_score, "2e2"),
        rounds("normal calibrated score", z_score, "2e3"),
        in_range("calibrated alternative tail at 0.0044", tail, 0.7e-3, 1.4e-3),
    ])
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let strategy = lib(HoeffdingStrategy::for_horizon(100, 20.0, Side::TwoSided))?;
    let (mut checked, mut violations) = (0usize, 0usize);
    let mut worst_half = 0.0f64;
    for dataset in 0..100 {
        // alternate error laws so the band around the mean is not vacuous
        let spread = [1.0, 0.5, 0.3][dataset % 3];
        let ys: Vec<f64> = (0..100).map(|_| 2.0 + rng.random_range(-spread..=spread)).collect();
        let mean = ys.iter().sum::<f64>() / 100.0;
        let grid = lib(measurement_grid(&ys, 2001))?;
        let curve = lib(measurement_capital_curve(&ys, &strategy, &grid))?;
        for (mu, k) in curve.iter() {
            if (mean - mu).abs() > 0.272 {
                checked += 1;
                violations += usize::from(k < 20.0);
            }
        }
        let iv = lib(warranty_interval(&ys, 20.0))?;
        worst_half = worst_half.max((iv.width() / 2.0 - 0.272).abs());
    }
    let half = lib(warranty_interval(&vec![0.0; 100], 20.0))?.width() / 2.0;
    all(vec![
        if violations == 0 && checked > 0 {
            Ok(format!("0 of {checked} grid points beyond 0.272 below 20"))
        } else {
            Err(format!("{violations} of {checked} grid points beyond 0.272 below 20"))
        },
        within("half-width", half, 0.272, 2e-3),
        within("worst half-width error", worst_half, 0.0, 2e-3),
    ])
}

fn random_weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

fn on_indices(probs: &[f64]) -> DistributionModel {
    DiscreteDistribution::new((0..probs.len()).map(|i| Outcome::Real(i as f64)).collect(), probs.to_vec())
        .unwrap()
        .into()
}

fn values(bet: &bettest_core::Bet, k: usize) -> Vec<f64> {
    (0..k).map(|i| bet.payoff().value(&Outcome::Real(i as f64))).collect()
}

fn mean_log(q: &[f64], s: &[f64]) -> f64 {
    q.iter().zip(s).map(|(a, b)| a * b.ln()).sum()
}

fn gibbs() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut violations = 0;
    for _ in 0..1000 {
        let k = rng.random_range(2..=8);
        let (p, q, r) = (random_weights(&mut rng, k), random_weights(&mut rng, k), random_weights(&mut rng, k));
        let null = on_indices(&p);
        let s_q = values(&lib(likelihood_ratio_bet(&null, &on_indices(&q)))?, k);
        let s_r = values(&lib(likelihood_ratio_bet(&null, &on_indices(&r)))?, k);
        let oracle: f64 = (0..k).map(|i| q[i] * (q[i] / p[i]).ln()).sum();
        let best = mean_log(&q, &s_q);
        if (best - oracle).abs() > 1e-12 || best < mean_log(&q, &s_r) - 1e-12 {
            violations += 1;
        }
    }
    count("Gibbs", violations, 1000)
}

fn count(name: &str, violations: usize, cases: usize) -> Check {
    if violations == 0 {
        Ok(format!("{name}: 0 violations in {cases} cases"))
    } else {
        Err(format!("{name}: {violations} violations in {cases} cases"))
    }
}

/// Largest `Q(A)` over outcome sets with `P(A) <= size`.
fn best_region(p: &[f64], q: &[f64], size: f64) -> f64 {
    let k = p.len();
    (0u32..1 << k)
        .filter_map(|mask| {
            let (pa, qa) = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .fold((0.0, 0.0), |(a, b), i| (a + p[i], b + q[i]));
            (pa <= size * (1.0 + 1e-12)).then_some(qa)
        })
        .fold(0.0, f64::max)
}

fn neyman_pearson_lemma() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let (mut violations, mut below_alpha, mut cases) = (0, 0, 0);
    while cases < 200 {
        let k = rng.random_range(2..=6);
        let (p, q) = (random_weights(&mut rng, k), random_weights(&mut rng, k));
        let alpha = rng.random_range(0.01..0.6);
        let (null, alt) = (on_indices(&p), on_indices(&q));
        let Ok(np) = neyman_pearson_bet(&null, &alt, alpha) else {
            continue;
        };
        cases += 1;
        let RejectionRegion::Outcomes { outcomes } = &np.region else {
            return Err("discrete null gave a non-discrete region".into());
        };
        let idx: Vec<usize> = outcomes.iter().map(|o| o.as_real().unwrap() as usize).collect();
        let size: f64 = idx.iter().map(|&i| p[i]).sum();
        let power: f64 = idx.iter().map(|&i| q[i]).sum();
        let lib_power = lib(np.power(&alt))?;
        if (size - np.size).abs() > 1e-12
            || (lib_power - power).abs() > 1e-12
            || best_region(&p, &q, size) > power + 1e-12
        {
            violations += 1;
        }
        if best_region(&p, &q, alpha) > power + 1e-12 {
            below_alpha += 1;
        }
    }
    count("NP lemma at the region's size", violations, cases)
        .map(|s| format!("{s} (sets of size <= alpha beat it in {below_alpha} cases)"))
}

fn all_paths(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut paths = vec![vec![]];
    for _ in 0..n {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    paths
}

fn protocol_fairness() -> Check {
    type Table = HashMap<Vec<usize>, (Vec<f64>, Vec<f64>)>;
    let index = |y: &Outcome| y.as_real().unwrap() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=5);
        let n = rng.random_range(1..=4);
        let mut table = Table::new();
        for len in 0..n {
            for h in all_paths(k, len) {
                let probs = random_weights(&mut rng, k);
                let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
                table.insert(h, (probs, raw));
            }
        }
        let table = Arc::new(table);
        let t1 = Arc::clone(&table);
        let null = ConditionalFn(move |h: &[Outcome]| {
            let key: Vec<usize> = h.iter().map(index).collect();
            Ok(on_indices(&t1[&key].0))
        });
        let t2 = Arc::clone(&table);
        let strategy = StrategyFn(move |h: &[Outcome], capital: f64, _: &DistributionModel| {
            let key: Vec<usize> = h.iter().map(index).collect();
            let (probs, raw) = &t2[&key];
            let price: f64 = probs.iter().zip(raw).map(|(p, r)| p * r).sum();
            let payoff: Vec<f64> = raw.iter().map(|r| capital * r / price).collect();
            Ok(Payoff::new(move |y| payoff[index(y)]))
        });
        let mut expectation = 0.0;
        for path in all_paths(k, n) {
            let weight: f64 = (0..n).map(|j| table[&path[..j].to_vec()].0[path[j]]).product();
            let ys: Vec<Outcome> = path.iter().map(|&i| Outcome::Real(i as f64)).collect();
            expectation += weight * lib(run_protocol(&null, &strategy, &ys))?.final_capital();
        }
        worst = worst.max((expectation - 1.0).abs());
    }
    if worst <= 1e-9 {
        Ok(format!("fairness: max |E K_N - 1| = {worst:.1e} over 100 protocols"))
    } else {
        Err(format!("fairness: max |E K_N - 1| = {worst:.1e} over 100 protocols"))
    }
}

fn supermartingale() -> Check {
    let strategy = lib(HoeffdingStrategy::for_horizon(100, 20.0, Side::TwoSided))?;
    let truncated = normal(0.0, 0.6);
    let mut parts = Vec::new();
    for (law, seed) in [("uniform", 1u64), ("two-point", 2), ("truncated normal", 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(740 + seed);
        let runs = 100_000;
        let mut errors = vec![0.0; 100];
        let mut finals = Vec::with_capacity(runs);
        for _ in 0..runs {
            for e in errors.iter_mut() {
                *e = match law {
                    "uniform" => rng.random_range(-1.0..=1.0),
                    "two-point" => if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                    _ => loop {
                        let x = truncated.sample(&mut rng).as_real().unwrap();
                        if x.abs() <= 1.0 {
                            break x;
                        }
                    },
                };
            }
            finals.push(lib(run_bounded(&strategy, &errors))?.final_capital());
        }
        let mean = finals.iter().sum::<f64>() / runs as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let sd = (var / runs as f64).sqrt();
        let line = format!("{law}: mean {mean:.4} <= 1 + 3 * {sd:.4}");
        parts.push(if mean <= 1.0 + 3.0 * sd { Ok(line) } else { Err(line) });
    }
    all(parts)
}

fn warranty_nesting_and_embedding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    let mut nest_fail = 0;
    for _ in 0..300 {
        let n = rng.random_range(1..60);
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let capital: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..200.0)).collect();
        let curve = lib(WarrantyCurve::new(grid.clone(), capital.clone(), vec![]))?;
        let (a, b) = (rng.random_range(0.001..0.999), rng.random_range(0.001..0.999));
        let (big, small) = (f64::max(a, b), f64::min(a, b));
        let strict = lib(warranty_set(&curve, big))?;
        let loose = lib(warranty_set(&curve, small))?;
        let exact = grid.iter().zip(&capital).all(|(t, k)| {
            strict.contains(*t) == (*k < 1.0 / big) && loose.contains(*t) == (*k < 1.0 / small)
        });
        if !strict.is_subset_of(&loose) || !exact {
            nest_fail += 1;
        }
    }
    let grid = lib(linear_grid(-40.0, 40.0, 2001))?;
    let mut embed_fail = 0;
    let mut configs = 0;
    for alpha in [0.5, 0.2, 0.05, 0.01] {
        let half = 10.0 * lib(std_normal_upper_quantile(alpha / 2.0))?;
        for y in [0.0, 3.3, -12.0] {
            configs += 1;
            let curve = lib(confidence_to_warranty(
                &grid,
                |theta| DistributionModel::normal(theta, 10.0),
                move |theta| Ok(RejectionRegion::TwoSided { center: theta, half_width: half }),
                alpha,
                &Outcome::Real(y),
            ))?;
            let set = lib(warranty_set(&curve, alpha))?;
            let exact = curve.iter().all(|(theta, k)| {
                let accepted = (y - theta).abs() <= half;
                set.contains(theta) == accepted && k == if accepted { 0.0 } else { 1.0 / alpha }
            });
            embed_fail += usize::from(!exact);
        }
    }
    all(vec![count("nesting", nest_fail, 300), count("confidence embedding", embed_fail, configs)])
}

fn markov_footnote() -> Check {
    let holds = |null: &DistributionModel, alt: &DistributionModel, alpha: f64| -> Result<bool, String> {
        let np = lib(neyman_pearson_bet(null, alt, alpha))?;
        let t = np.threshold().ok_or("continuous NP bet has a threshold")?;
        let lr = lib(likelihood_ratio_bet(null, alt))?;
        Ok(lib(lr.score(&Outcome::Real(t)))? <= 1.0 / alpha + 1e-9)
    };
    let mut violations = 0;
    for mean in [1.0, 37.0, 20.0] {
        violations += usize::from(!holds(&normal(0.0, 10.0), &normal(mean, 10.0), 0.05)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(76);
    for _ in 0..100 {
        let sd = rng.random_range(0.5..20.0);
        let m0 = rng.random_range(-10.0..10.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let shift = sign * rng.random_range(0.05..4.0) * sd;
        let alpha = rng.random_range(0.001..0.2);
        violations += usize::from(!holds(&normal(m0, sd), &normal(m0 + shift, sd), alpha)?);
    }
    count("Markov footnote", violations, 103)
}

fn general_bets_stay_fair() -> Check {
    // make_bet prices arbitrary payoffs at exactly one unit
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut violations = 0;
    for _ in 0..200 {
        let k = rng.random_range(2..=6);
        let p = random_weights(&mut rng, k);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..5.0)).collect();
        let table = raw.clone();
        let bet = lib(make_bet(Payoff::new(move |y| table[y.as_real().unwrap() as usize]), &on_indices(&p)))?;
        let e: f64 = values(&bet, k).iter().zip(&p).map(|(s, pi)| s * pi).sum();
        violations += usize::from((e - 1.0).abs() > 1e-12);
    }
    count("unit price", violations, 200)
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("m.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: String = (0..100).map(|_| format!("{}\n", 1.0 + rng.random_range(-1.0..=1.0))).collect();
    std::fs::write(&data, format!("y\n{rows}")).map_err(|e| e.to_string())?;
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"null": "normal:0,1", "strategy": {"kind": "likelihood-ratio", "alternative": "normal:0.5,1"},
            "simulate": {"from": "normal:0.5,1", "rounds": 50}}"#,
    )
    .map_err(|e| e.to_string())?;
    let data = data.display().to_string();
    let scenario = scenario.display().to_string();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["test", "--null", "normal:0,10", "--alt", "normal:1,10", "--y", "30"],
        vec!["calibrate", "--table"],
        vec!["measure", "--data", &data, "--level", "20"],
        vec!["warranty", "--family", "normal-mean:1", "--strategy", "likelihood-ratio:0.5", "--data", &data, "--grid", "0,2,201"],
        vec!["protocol", "run", "--scenario", &scenario],
    ];
    let mut parts = Vec::new();
    for args in &invocations {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_bettest"))
                .args(args)
                .env_remove("BETTEST_SEED")
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        let line = format!("{} ({} bytes)", args[..2].join(" "), a.stdout.len());
        parts.push(if ok { Ok(line) } else { Err(format!("{line} differs or failed")) });
    }
    all(parts)
}

fn main() -> ExitCode {
    let checks: Vec<Criterion> = vec![
        ("1  normal example, alternative N(1, 10), y = 30", criterion_1),
        ("2  normal example, alternative N(37, 10), y = 16.5", criterion_2),
        ("3  normal example, alternative N(20, 10), y = 5", criterion_3),
        ("4  p-value calibration table", criterion_4),
        ("5  Weldon dice tails and calibrated scores", criterion_5),
        ("6  bounded-error warranty at level 20, n = 100", criterion_6),
        ("7a Gibbs inequality on random triples", gibbs),
        ("7b Neyman-Pearson lemma by brute force", neyman_pearson_lemma),
        ("7c protocol fairness by path enumeration", protocol_fairness),
        ("7d supermartingale Monte Carlo, three error laws", supermartingale),
        ("7e warranty nesting and confidence embedding", warranty_nesting_and_embedding),
        ("7f Markov footnote", markov_footnote),
        ("7g general bets are priced at one unit", general_bets_stay_fair),
        ("8  CLI reports are byte-identical across runs", criterion_8),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let (status, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{status} [{name}] {detail} ({:.1}s)", t.elapsed().as_secs_f64());
    }
    println!(
        "{} failed of 14 checks in {:.1}s",
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
