mod common;

use chernoff_dp::distributions::{log_density_ratio, Density};
use chernoff_dp::divergences::{bhattacharyya_alpha_form, chernoff_numeric, kl_numeric, AffinityForm};
use chernoff_dp::dp_bounds::{epsilon_dp_level, kl_bound_from_epsilon, EvalGrid};
use chernoff_dp::numeric::integrate;
use common::{lap, LaplaceMixture};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64) -> (LaplaceMixture, LaplaceMixture) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (LaplaceMixture::random(&mut rng, 3, 1.0, 1.0), LaplaceMixture::random(&mut rng, 2, 1.0, 1.0))
}

#[test]
fn mixture_is_normalized() {
    let (p, _) = pair(1);
    let r = p.effective_range();
    let mass = integrate(|x| p.eval(x), r.lo, r.hi, &p.kink_points(), 1e-12).unwrap();
    assert!((mass.value - 1.0).abs() < 1e-10);
}

#[test]
fn kl_matches_sample_average_of_log_ratio() {
    let (p, q) = pair(2);
    let exact = kl_numeric(&p, &q, 1e-10).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..n {
        let x = p.sample(&mut rng);
        let l = log_density_ratio(&p, &q, x).unwrap();
        sum += l;
        sq += l * l;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - exact).abs() < 5.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn dp_level_is_bounded_by_mean_spread() {
    for seed in 0..10 {
        let (p, q) = pair(seed);
        let eps = epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q));
        let spread = p
            .means
            .iter()
            .flat_map(|m| q.means.iter().map(move |n| (m - n).abs()))
            .fold(0.0, f64::max);
        assert!(eps.is_finite() && eps <= spread / p.b + 1e-12, "seed {seed}: {eps} > {spread}");
    }
}

#[test]
fn kl_respects_dp_level_bound() {
    for seed in 0..10 {
        let (p, q) = pair(seed);
        let eps = epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q));
        let kl = kl_numeric(&p, &q, 1e-10).unwrap().value;
        assert!(kl <= kl_bound_from_epsilon(eps).unwrap() + 1e-9, "seed {seed}");
    }
}

#[test]
fn affinity_forms_agree_on_mixtures() {
    let (p, q) = pair(3);
    for alpha in [0.2, 0.5, 0.9] {
        let d = bhattacharyya_alpha_form(&p, &q, alpha, AffinityForm::Direct, 1e-11).unwrap().0;
        for form in [AffinityForm::QBased, AffinityForm::PBased] {
            let v = bhattacharyya_alpha_form(&p, &q, alpha, form, 1e-11).unwrap().0;
            assert!((v - d).abs() < 1e-9);
        }
    }
}

#[test]
fn chernoff_below_kl_both_ways() {
    let (p, q) = pair(4);
    let c = chernoff_numeric(&p, &q, 1e-10).unwrap();
    assert!(c.value <= kl_numeric(&p, &q, 1e-10).unwrap().value + 1e-9);
    assert!(c.value <= kl_numeric(&q, &p, 1e-10).unwrap().value + 1e-9);
    let a = c.alpha_star.unwrap();
    assert!(a > 0.0 && a < 1.0);
}

#[test]
fn mixture_dp_level_against_plain_laplace() {
    // a one-component mixture is the Laplace law itself
    let p = LaplaceMixture::new(vec![1.0], vec![0.0], 2.0);
    let q = lap(1.0, 2.0);
    let eps = epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q));
    assert!((eps - 0.5).abs() < 1e-9);
    assert!((kl_numeric(&p, &q, 1e-10).unwrap().value - (0.5 - 1.0 + (-0.5f64).exp())).abs() < 1e-8);
}
