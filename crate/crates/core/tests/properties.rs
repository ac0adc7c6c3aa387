use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smallness_core::cover::{CoverPart, MAX_ENUMERATE};
use smallness_core::pipeline::{build_weighted_cover, GuardMode, PipelineInstance};
use smallness_core::random::{random_family, random_graph, random_weighted_graph};
use smallness_core::rational::{self, rat, Probability, Rational};
use smallness_core::singleton::{build_singleton_cover, SingletonInstance};
use smallness_core::solvers::{min_fractional_cost, min_integral_cost};
use smallness_core::star_forest::{good_thresholds, greedy_decompose, StarForestPart};
use smallness_core::{IncreasingFamily, Subset, WeightedGraph};

fn family(seed: u64, max_n: usize) -> IncreasingFamily {
    random_family(&mut ChaCha8Rng::seed_from_u64(seed), max_n)
}

fn weighted(seed: u64, max_n: usize) -> WeightedGraph {
    random_weighted_graph(&mut ChaCha8Rng::seed_from_u64(seed), 2, max_n)
}

fn probability() -> impl Strategy<Value = Probability> {
    (0i64..=64).prop_map(|k| Probability::ratio(k, 64).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_increases_with_p(seed in any::<u64>(), a in 1i64..63, d in 1i64..32) {
        let f = family(seed, 12);
        let b = (a + d).min(64);
        prop_assume!(b > a);
        let lo = f.mu_p_exact(&Probability::ratio(a, 64).unwrap()).unwrap();
        let hi = f.mu_p_exact(&Probability::ratio(b, 64).unwrap()).unwrap();
        prop_assert!(lo < hi);
    }

    #[test]
    fn upward_closed(seed in any::<u64>(), u in any::<u64>(), extra in any::<u64>()) {
        let f = family(seed, 12);
        let mask = Subset::full(f.n()).bits();
        let u = Subset(u & mask);
        let w = u.union(Subset(extra & mask));
        if f.contains(u) {
            prop_assert!(f.contains(w));
        }
    }

    #[test]
    fn boundary_expectation_identity(seed in any::<u64>(), p in probability()) {
        // E lambda(G[V_p]) = p E lambda(D(V_p)), by full enumeration.
        let g = weighted(seed, 10);
        let n = g.n();
        let (mut inside, mut boundary) = (Rational::zero(), Rational::zero());
        let q = Rational::one() - p.value();
        for bits in 0..1u64 << n {
            let u = Subset(bits);
            let k = u.len() as u64;
            let mu = rational::pow(p.value(), k) * rational::pow(&q, n as u64 - k);
            inside += &mu * g.induced_weight(u);
            boundary += &mu * g.boundary_weight(u);
        }
        prop_assert_eq!(inside, boundary * p.value());
    }

    #[test]
    fn dyadic_rounding_brackets(seed in any::<u64>()) {
        let g = weighted(seed, 12);
        let r = g.round_down_dyadic().unwrap();
        for bits in 0..1u64 << g.n() {
            let u = Subset(bits);
            let s = r.scaled.induced_weight(u);
            let l = r.rounded.induced_weight(u);
            prop_assert!(l <= s && s <= &l * rational::int(2));
        }
        // Each class weight adds back up to the rounded total.
        let ids: Vec<usize> = (0..g.edge_count()).collect();
        prop_assert_eq!(r.decomposition.weight_of(&ids), r.rounded.total_weight());
    }

    #[test]
    fn pipeline_split_identities(seed in any::<u64>(), u in any::<u64>(), den in 30i64..300) {
        let g = weighted(seed, 10);
        let inst = PipelineInstance::new(g, Probability::ratio(1, den).unwrap(), rational::int(32), GuardMode::Reduced).unwrap();
        let wc = build_weighted_cover(&inst).unwrap();
        prop_assert!(wc.column_halving);
        let u = Subset(u & Subset::full(inst.graph().n()).bits());
        let d = wc.diagnostics(u).unwrap();
        prop_assert!(d.split_l_ok && d.split_kl_ok);
        prop_assert!(d.claim_holds());
    }

    #[test]
    fn witnesses_are_members(seed in any::<u64>(), u in any::<u64>(), a in 1u64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random_graph(&mut rng, 9, 0.5));
        let n = g.n();
        let u = Subset(u & Subset::full(n).bits());
        let f = family(seed, 9);
        let parts = vec![
            CoverPart::explicit(f.minimal_sets().iter().copied()),
            CoverPart::prefix_binomial((0..n).rev().collect(), a, n as u64),
            CoverPart::StarForestFamily(StarForestPart::new(g.clone(), 2, 1, rational::int(4), Probability::ratio(1, 4).unwrap())),
        ];
        for part in &parts {
            if let Some(w) = part.find_member_inside(u) {
                prop_assert!(w.is_subset_of(u));
                prop_assert!(part.is_member(w));
            }
        }
    }

    #[test]
    fn implicit_costs_agree_with_enumeration(n in 1usize..=10, a in 1u64..4, p in probability(), seed in any::<u64>()) {
        let part = CoverPart::prefix_binomial((0..n).collect(), a, n as u64);
        let mut total = Rational::zero();
        for bits in 1..1u64 << n {
            if part.is_member(Subset(bits)) {
                total += rational::pow(p.value(), Subset(bits).len() as u64);
            }
        }
        prop_assert_eq!(part.cost(&p).exact, Some(total));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arc::new(random_graph(&mut rng, 8, 0.5));
        prop_assume!(g.n() <= MAX_ENUMERATE);
        let sf = StarForestPart::new(g, 2, 1, rational::int(4), p.clone());
        prop_assert!(sf.enumerated_cost(p.value()) <= sf.symmetric_bound(p.value()));
    }

    #[test]
    fn cost_grows_with_p(seed in any::<u64>(), a in 0i64..64, d in 0i64..64) {
        let f = family(seed, 8);
        let (p, q) = (Probability::ratio(a, 64).unwrap(), Probability::ratio((a + d).min(64), 64).unwrap());
        let parts = [
            CoverPart::explicit(f.minimal_sets().iter().copied()),
            CoverPart::prefix_binomial((0..f.n()).collect(), 2, f.n() as u64),
        ];
        for part in &parts {
            prop_assert!(part.cost(&p).best() <= part.cost(&q).best());
        }
    }

    #[test]
    fn equal_weights_permute_freely(n in 2usize..12, levels in 1i64..4, seed in any::<u64>(), r in 1i64..=16) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeta: Vec<Rational> = (0..n).map(|_| rational::int(rng.gen_range(1..=levels))).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Rational> = perm.iter().map(|&v| zeta[v].clone()).collect();
        let j = rational::int(8);
        let p = Probability::new(rat(r, 16) / &j).unwrap();
        let a = build_singleton_cover(&SingletonInstance::new(zeta, p.clone(), j.clone()).unwrap());
        let b = build_singleton_cover(&SingletonInstance::new(permuted, p, j).unwrap());
        prop_assert_eq!(a.cost.exact, b.cost.exact);
    }

    #[test]
    fn greedy_steps_are_good_stars(seed in any::<u64>(), u in any::<u64>(), jp in 1i64..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 12, 0.5);
        let u = Subset(u & Subset::full(g.n()).bits());
        let t = good_thresholds(&g, &rational::int(jp), &rat(1, 2));
        let dec = greedy_decompose(&g, &t, u);
        let mut used = Subset::EMPTY;
        let mut last = u64::MAX;
        for s in &dec.steps {
            let star = s.leaves.with(s.center);
            prop_assert!(star.is_subset_of(u));
            prop_assert!(star.intersection(used).is_empty());
            prop_assert!(s.leaves.is_subset_of(g.neighbors(s.center)));
            prop_assert!(s.d >= t[s.center] && s.d <= last);
            last = s.d;
            used = used.union(star);
        }
        prop_assert_eq!(dec.residual, u.difference(used));
        for v in dec.residual.iter() {
            prop_assert!((g.neighbors(v).intersection(dec.residual).len() as u64) < t[v]);
        }
    }

    #[test]
    fn integral_dominates_fractional(seed in any::<u64>(), p in probability()) {
        let f = family(seed, 6);
        let frac = min_fractional_cost(&f, &p).unwrap();
        let int = min_integral_cost(&f, &p).unwrap();
        prop_assert!(frac.optimum <= int.optimum);
        prop_assert_eq!(frac.certificate.verify(&f).unwrap(), frac.optimum.clone());
        prop_assert!(int.certificate.verify(&f).unwrap() >= frac.optimum);
    }
}

#[test]
fn montecarlo_within_five_standard_errors() {
    let mut hits = 0;
    let trials = 100;
    for seed in 0..trials {
        let f = family(1000 + seed, 12);
        let p = Probability::ratio(1 + (seed as i64 % 7), 8).unwrap();
        let exact = rational::to_f64(&f.mu_p_exact(&p).unwrap());
        let est = f.mu_p_montecarlo(&p, seed, 100_000);
        // A degenerate estimate has zero spread; allow the binomial floor.
        let se = est.std_error.max(1.0 / 100_000.0);
        if (est.mean - exact).abs() <= 5.0 * se {
            hits += 1;
        }
    }
    assert!(hits * 100 >= 99 * trials, "{hits}/{trials}");
}
