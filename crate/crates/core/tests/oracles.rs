use fcgroup::abaut::{ab_subgroups, abelian_p_groups, orbit_search, random_automorphisms};
use fcgroup::analysis::{
    chinum, gnum, neumann_profile, pnum, relative_subgroups, ProfileMode, Subgroup,
};
use fcgroup::constructions::corpus;
use fcgroup::oracle::{ab_orbit_oracle, ab_subgroups_by_joins, members_of, Table};
use fcgroup::Limits;

#[test]
fn covering_invariants_match_the_table() {
    let l = Limits::default();
    for (name, g) in corpus(243).unwrap() {
        let t = Table::from_group(&g, &l).unwrap();
        assert_eq!(gnum(&g, &l).unwrap().count, t.gnum(), "{name}: g");
        assert_eq!(chinum(&g, &l).unwrap().count, t.chinum(), "{name}: chi");
        assert_eq!(pnum(&g, &l).unwrap().size, t.pnum(), "{name}: pmax");
    }
}

#[test]
fn profile_matches_the_table() {
    let l = Limits::default();
    for (name, g) in corpus(81).unwrap() {
        let mine = neumann_profile(&g, ProfileMode::Exact, &l).unwrap();
        let theirs = Table::from_group(&g, &l).unwrap().profile();
        assert!(mine.exact);
        assert_eq!(
            (
                mine.gz,
                mine.max_n,
                mine.max_c,
                mine.max_core,
                mine.max_abelian_n
            ),
            (
                theirs.gz,
                theirs.max_n,
                theirs.max_c,
                theirs.max_core,
                theirs.max_abelian_n
            ),
            "{name}"
        );
    }
}

#[test]
fn relative_subgroups_match_the_table() {
    let l = Limits::default();
    for (name, g) in corpus(81).unwrap() {
        let t = Table::from_group(&g, &l).unwrap();
        let elements: Vec<_> = g.elements().collect();
        let normals = t.normal_subgroups();
        for s in t.subgroups() {
            let sub = Subgroup::Generated {
                elements: s.iter().map(|&i| elements[i].clone()).collect(),
            }
            .normalized(&g);
            assert_eq!(members_of(&g, &sub), s, "{name}");
            let r = relative_subgroups(&g, &sub).unwrap();
            assert_eq!(members_of(&g, &r.centralizer), t.centralizer(&s), "{name}");
            assert_eq!(members_of(&g, &r.normalizer), t.normalizer(&s), "{name}");
            let core = members_of(&g, &r.core);
            assert_eq!(core, t.core(&s), "{name}");
            assert!(normals.contains(&core));
            assert_eq!(sub.is_normal(&g), normals.contains(&s), "{name}");
        }
    }
}

#[test]
fn abelian_subgroup_enumerations_agree() {
    for p in [2, 3] {
        for a in abelian_p_groups(p, if p == 2 { 5 } else { 4 }).unwrap() {
            let layered = ab_subgroups(&a, a.order()).unwrap();
            let mut joins = ab_subgroups_by_joins(&a);
            joins.sort_by(|x, y| (x.order(), &x.members).cmp(&(y.order(), &y.members)));
            assert_eq!(layered, joins, "{:?}", a.exps());
        }
    }
}

#[test]
fn orbit_search_matches_its_oracle() {
    for (seed, a) in abelian_p_groups(3, 3).unwrap().into_iter().enumerate() {
        for count in 1..=3 {
            let phis = random_automorphisms(&a, count, seed as u64 * 10 + count as u64);
            let r = orbit_search(&a, &phis, a.order()).unwrap();
            let (size, best) = ab_orbit_oracle(&a, &phis);
            assert_eq!(r.orbit_size, size, "{:?}", a.exps());
            assert_eq!(r.best, best, "{:?}", a.exps());
        }
    }
}
