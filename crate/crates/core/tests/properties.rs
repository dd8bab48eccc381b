use fcgroup::abaut::{ab_closure, displacement, random_automorphism, AbelianPGroup};
use fcgroup::analysis::{
    chinum, decompose_22, gnum, maximal_abelians, neumann_profile, relative_subgroups, ProfileMode,
    Subgroup,
};
use fcgroup::combinat::{
    ad_convert, erdos_rado_bound, extract_tree, is_sunflower, random_family, random_uniform_family,
    sunflower, SetFamily, DEFAULT_EXHAUSTIVE_THRESHOLD,
};
use fcgroup::constructions::{
    chain_group, check_diagonal, diagonal_automorphism, dual_extension, family_group, free_nil2,
    random_scenario, tree_group, ChainKind,
};
use fcgroup::fpspace::all_vectors;
use fcgroup::{BilinearMap, FactorSystem, FormGroup, FpVec, GroupElement, Limits, Subspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn group_strategy() -> impl Strategy<Value = FormGroup> {
    (prop_oneof![Just(3u32), Just(5)], 1usize..=4, 0usize..=2).prop_flat_map(|(p, n, m)| {
        proptest::collection::vec(0..p, n * n * m).prop_map(move |raw| {
            let tau = BilinearMap::from_fn(p, n, m, |i, j| {
                FpVec::new(p, (0..m).map(|k| raw[(i * n + j) * m + k]).collect())
            });
            FormGroup::new(FactorSystem::new(tau)).unwrap()
        })
    })
}

fn element(g: &FormGroup, seed: u64) -> GroupElement {
    g.element_at(seed % g.order())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws(g in group_strategy(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (element(&g, a), element(&g, b), element(&g, c));
        let xy_z = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
        let x_yz = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        prop_assert_eq!(g.multiply(&x, &g.inverse(&x).unwrap()).unwrap(), g.identity());
        prop_assert_eq!(g.power(&x, g.p() as i64).unwrap(), g.identity());
        let comm = g.commutator(&x, &y).unwrap();
        prop_assert!(comm.v.is_zero());
        prop_assert_eq!(comm.w, g.skew().eval(&x.v, &y.v));
    }

    #[test]
    fn maximal_abelians_contain_the_center(g in group_strategy()) {
        let l = Limits::default();
        let z = Subgroup::pair(&g, g.center_gens(), Subspace::full(g.p(), g.cen_dim())).unwrap();
        for m in maximal_abelians(&g, &l).unwrap() {
            prop_assert!(m.is_abelian(&g));
            prop_assert!(z.is_subgroup_of(&m, &g));
        }
    }

    #[test]
    fn covering_numbers_are_ordered(g in group_strategy()) {
        let l = Limits::default();
        let gn = gnum(&g, &l).unwrap().count;
        prop_assert!(gn <= chinum(&g, &l).unwrap().count);
        if g.order() <= l.max_elements {
            let d = decompose_22(&g, &l).unwrap();
            prop_assert!(gn <= d.parts.len());
            prop_assert!(d.parts.iter().all(|h| h.is_abelian(&g)));
            let log_derived = g.derived_space().dim();
            prop_assert!(d.depth <= log_derived);
        }
    }

    #[test]
    fn profile_inequalities(g in group_strategy()) {
        let l = Limits { max_subgroup_order: u64::MAX, ..Limits::default() };
        let p = neumann_profile(&g, ProfileMode::Exact, &l).unwrap();
        prop_assert!(p.max_n <= p.max_c);
        prop_assert!(p.max_abelian_n <= p.max_n);
        prop_assert_eq!(p.max_c, p.gz);
    }

    #[test]
    fn overgroups_of_the_derived_subgroup_are_normal(g in group_strategy(), seed in any::<u64>()) {
        let axes = (0..g.gen_dim()).filter(|i| (seed >> i) & 1 == 1);
        let u = Subspace::coordinate(g.p(), g.gen_dim(), axes);
        let s = Subgroup::pair(&g, u, g.derived_space()).unwrap();
        prop_assert!(s.is_normal(&g));
        let r = relative_subgroups(&g, &s).unwrap();
        prop_assert_eq!(r.normalizer.order(), g.order());
        prop_assert_eq!(r.core.order(), s.order());
    }

    #[test]
    fn sunflower_premise_guarantees_success(k in 1usize..=3, extra in 0usize..10, seed in any::<u64>()) {
        let r = 3;
        let bound = erdos_rado_bound(k, r).unwrap() as usize;
        let f = random_uniform_family(12, k, bound + 1 + extra, seed).unwrap();
        let rep = sunflower(&f, r, DEFAULT_EXHAUSTIVE_THRESHOLD);
        prop_assert!(rep.premise_met);
        let s = rep.found.unwrap();
        prop_assert!(is_sunflower(&f, &s));
    }

    #[test]
    fn sunflowers_are_exact_even_without_premise(n in 3usize..8, count in 1usize..25, seed in any::<u64>()) {
        let f = random_family(n, count, seed);
        if let Some(s) = sunflower(&f, 3, DEFAULT_EXHAUSTIVE_THRESHOLD).found {
            prop_assert!(is_sunflower(&f, &s));
        }
    }

    #[test]
    fn ad_convert_is_almost_disjoint(h in 1usize..7, count in 1usize..20, seed in any::<u64>()) {
        let f = random_family(h, count, seed).canonical();
        let out = ad_convert(&f, h).unwrap();
        prop_assert_eq!(out.len(), f.len());
        prop_assert!(out.sets().iter().all(|s| s.len() == h));
        prop_assert!(!out.has_duplicates());
        prop_assert!(out.is_almost_disjoint(h));
    }

    #[test]
    fn displacement_is_subadditive(exps in proptest::collection::vec(1u32..=2, 1..=3), seed in any::<u64>()) {
        let a = AbelianPGroup::new(3, exps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_automorphism(&a, &mut rng);
        let g = random_automorphism(&a, &mut rng);
        let both = displacement(&f.then(&g)).subgroup;
        let gens: Vec<Vec<u64>> = displacement(&f).subgroup.members.iter()
            .chain(&displacement(&g).subgroup.members)
            .map(|&i| a.element(i))
            .collect();
        let sum = ab_closure(&a, &gens);
        prop_assert!(both.members.iter().all(|m| sum.members.binary_search(m).is_ok()));
    }

    #[test]
    fn diagonalization_passes_its_checker(seed in 0u64..200) {
        let t = tree_group(3, &[2, 3, 4, 5]).unwrap().with_fresh_central().unwrap();
        let (avoid, fix) = random_scenario(&t, 3, 3, seed).unwrap();
        let d = diagonal_automorphism(&t, &avoid, &fix).unwrap();
        prop_assert_eq!(check_diagonal(&t, &avoid, &fix, &d), Ok(()));
    }
}

#[test]
fn free_group_commutators_vanish_exactly_on_dependent_pairs() {
    for n in 1..=3 {
        let g = free_nil2(3, n).unwrap();
        for u in all_vectors(3, n) {
            for v in all_vectors(3, n) {
                let dependent = fcgroup::fpspace::span_reduce(3, n, &[u.clone(), v.clone()])
                    .unwrap()
                    .dim()
                    < 2;
                assert_eq!(g.skew().eval(&u, &v).is_zero(), dependent);
            }
        }
        let ma = maximal_abelians(&g, &Limits::default()).unwrap();
        assert_eq!(
            ma.len() as u64,
            if n == 1 {
                1
            } else {
                (3u64.pow(n as u32) - 1) / 2
            }
        );
    }
}

#[test]
fn paired_chain_witnesses_generate() {
    for p in [3u32, 5] {
        for n in 2..=5 {
            let g = chain_group(p, n, ChainKind::Paired).unwrap();
            let a0: Vec<FpVec> = (0..n)
                .map(|i| g.multiply(&g.generator(i), &g.generator(n + i)).unwrap().v)
                .collect();
            let a1: Vec<FpVec> = (0..n).map(|i| g.generator(n + i).v).collect();
            for s in [&a0, &a1] {
                assert!(s
                    .iter()
                    .all(|x| s.iter().all(|y| g.skew().eval(x, y).is_zero())));
            }
            let all: Vec<FpVec> = a0.iter().chain(&a1).cloned().collect();
            let span = fcgroup::fpspace::span_reduce(p, 2 * n, &all).unwrap();
            assert!(span.is_full());
            let commutators: Vec<FpVec> = a0
                .iter()
                .flat_map(|x| a1.iter().map(|y| g.skew().eval(x, y)))
                .collect();
            assert!(fcgroup::fpspace::span_reduce(p, 1, &commutators)
                .unwrap()
                .is_full());
        }
    }
}

#[test]
fn dual_extension_commutators() {
    let bases = [
        fcgroup::constructions::extraspecial(3, 1).unwrap(),
        free_nil2(3, 2).unwrap(),
        fcgroup::constructions::extraspecial(5, 1).unwrap(),
    ];
    for g in &bases {
        let p = g.p();
        for fresh in [false, true] {
            for l0 in all_vectors(p, g.gen_dim()) {
                let l1 = FpVec::new(p, l0.coords().iter().rev().copied().collect());
                let d = dual_extension(g, &[l0.clone(), l1.clone()], fresh).unwrap();
                let h = &d.group;
                for (i, l) in [&l0, &l1].into_iter().enumerate() {
                    for b in 0..d.base_gen_dim {
                        let c = h.commutator(&h.generator(b), &d.phi(i)).unwrap();
                        let want = h.power(&h.central(d.target), l.get(b) as i64).unwrap();
                        assert_eq!(c, want);
                    }
                }
            }
        }
    }
}

#[test]
fn family_round_trip_on_random_families() {
    for seed in 0..25 {
        let f = random_family(4, 1 + (seed as usize % 4), seed);
        let d = family_group(3, 2, &f).unwrap();
        let g = &d.group;
        let probes: Vec<GroupElement> = (0..4).map(|i| g.generator(i)).collect();
        let reps: Vec<GroupElement> = (0..f.len()).map(|i| d.phi(i)).collect();
        let x = extract_tree(g, &probes, &reps, d.target).unwrap();
        assert_eq!(x.family.canonical(), f.canonical());
    }
}

#[test]
fn extraction_counts_centralizer_cosets() {
    let l = Limits::default();
    for seed in 0..8 {
        let f = random_family(4, 3, seed);
        let d = family_group(3, 2, &f).unwrap();
        let g = &d.group;
        let probes: Vec<GroupElement> = (0..2).map(|i| g.generator(i)).collect();
        let span = Subspace::coordinate(3, g.gen_dim(), 0..2);
        let s = Subgroup::over_center(g, span);
        let c = relative_subgroups(g, &s).unwrap().centralizer;
        let reps: Vec<GroupElement> = (0..g.order())
            .step_by(37)
            .map(|i| g.element_at(i))
            .collect();
        let x = extract_tree(g, &probes, &reps, d.target).unwrap();
        let distinct: std::collections::BTreeSet<_> = x.functions.iter().collect();
        let gens: Vec<GroupElement> = reps.iter().cloned().chain(c.generators(g)).collect();
        let joined = fcgroup::analysis::closure(
            g,
            &gens,
            &Limits {
                max_elements: g.order(),
                ..l.clone()
            },
        )
        .unwrap();
        let cosets = joined.order() / c.order();
        let reached: std::collections::BTreeSet<_> = reps
            .iter()
            .map(|r| {
                probes
                    .iter()
                    .map(|u| g.commutator(u, r).unwrap().w)
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(distinct.len(), reached.len());
        assert!(distinct.len() as u64 <= cosets);
    }
}

/// Elements `b = sum m_i e_i` of the plain chain group over the sets of a
/// sunflower, with the same multiplicity pattern on every petal and the
/// root below all petals: for earlier `b` and later `c`, `[b, c]` is the
/// square of the petal multiplicity sum, so the `b` commute exactly when
/// that sum vanishes mod `p`.
#[test]
fn sunflower_multiplicity_obstruction() {
    let p = 3;
    let root = [0usize, 1];
    let petal_len = 2;
    let petals: Vec<Vec<usize>> = (0..4)
        .map(|k| (0..petal_len).map(|t| 2 + k * petal_len + t).collect())
        .collect();
    let sets: Vec<Vec<usize>> = petals
        .iter()
        .map(|pt| root.iter().chain(pt).copied().collect())
        .collect();
    let n = 2 + 4 * petal_len;
    let fam = SetFamily::new(n, sets).unwrap();
    let s = sunflower(&fam, 3, DEFAULT_EXHAUSTIVE_THRESHOLD)
        .found
        .unwrap();
    assert_eq!(s.root, root.to_vec());
    let g = chain_group(p, n, ChainKind::Plain).unwrap();
    for (root_m, petal_m) in [([1u32, 2], [1u32, 1]), ([2, 2], [1, 2]), ([1, 0], [2, 2])] {
        let b: Vec<FpVec> = s
            .members
            .iter()
            .map(|&mbr| {
                let mut v = FpVec::zero(p, n);
                for (t, &i) in root.iter().enumerate() {
                    v.set(i, root_m[t]);
                }
                for (t, &i) in fam.sets()[mbr][2..].iter().enumerate() {
                    v.set(i, petal_m[t]);
                }
                v
            })
            .collect();
        let sum: u32 = petal_m.iter().sum::<u32>() % p;
        for x in 0..b.len() {
            for y in x + 1..b.len() {
                assert_eq!(g.skew().eval(&b[x], &b[y]).get(0), sum * sum % p);
            }
        }
    }
}
