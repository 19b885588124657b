use ergolab::cross_section::greedy_net;
use ergolab::filtration::{
    dyadic_filtration, folner_stat, lift_filtration, random_dyadic, restrict_filtration, NestedPartition,
};
use ergolab::{Element, Error, GroupModel, QuadratureScheme, Region, Window};
use proptest::prelude::*;

/// A random chain of coarsenings of `{0, …, size-1}`.
fn nested(size: usize, merges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut levels = vec![(0..size).collect::<Vec<_>>()];
    for m in merges {
        let prev = levels.last().unwrap();
        levels.push(prev.iter().map(|&l| m[l % m.len()]).collect());
    }
    levels
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coarsenings_are_accepted(size in 2usize..30, merges in prop::collection::vec(prop::collection::vec(0usize..6, 1..8), 1..4)) {
        let labels = nested(size, &merges);
        let f = NestedPartition::new(labels).unwrap();
        for n in 0..f.levels() - 1 {
            for i in 0..f.size() {
                let fine = f.class_members(n, i);
                let coarse = f.class_members(n + 1, i);
                prop_assert!(fine.iter().all(|j| coarse.contains(j)));
            }
        }
    }

    #[test]
    fn lift_then_restrict_is_identity(merges in prop::collection::vec(prop::collection::vec(0usize..5, 1..6), 1..3)) {
        let net = greedy_net(&GroupModel::real_line(), &Window::interval(-20.0, 20.0).unwrap(), 2.0, 0.1).unwrap();
        let f = NestedPartition::new(nested(net.len(), &merges)).unwrap();
        let lifted = lift_filtration(&f, &net, QuadratureScheme::grid(20)).unwrap();
        prop_assert_eq!(restrict_filtration(&lifted).unwrap(), f);
    }

    #[test]
    fn random_dyadic_windows_are_nested(seed in any::<u64>(), dim in 1usize..=3) {
        let r = random_dyadic(seed, 12, dim).unwrap();
        for n in 0..12 {
            let (a, b) = (r.window::<f64>(n), r.window::<f64>(n + 1));
            prop_assert!(b.contains_window(&a));
            prop_assert_eq!(a.extent(0), (1u64 << n) as f64);
        }
        prop_assert_eq!(r, random_dyadic(seed, 12, dim).unwrap());
    }

    #[test]
    fn interval_folner_stat_closed_form(len in 2.5..200.0f64) {
        let m = GroupModel::<f64>::real_line();
        let s = Region::Box(Window::interval(0.0, len).unwrap());
        let k = Window::interval(-1.0, 1.0).unwrap();
        let v = folner_stat(&s, &k, &m, &QuadratureScheme::grid(4)).unwrap();
        prop_assert!((v - (len - 2.0) / len).abs() < 1e-12);
    }
}

#[test]
fn splitting_a_class_is_a_nesting_violation() {
    let r = NestedPartition::new(vec![vec![0, 0, 1], vec![0, 1, 1]]);
    assert!(matches!(r, Err(Error::NestingViolation(_))));
}

#[test]
fn dyadic_levels_double_and_contain_the_point() {
    let net = greedy_net(&GroupModel::real_line(), &Window::interval(-100.0, 100.0).unwrap(), 2.0, 0.1).unwrap();
    let filt = dyadic_filtration(&net, 5, QuadratureScheme::grid(50)).unwrap();
    let m = GroupModel::<f64>::real_line();
    let q = QuadratureScheme::grid(50);
    let x = Element::real(0.4);
    let mut prev = 0.0;
    for n in 0..=5 {
        let d = filt.displacement(n, &x).unwrap();
        assert!(d.contains(&m.identity()));
        let lam = d.measure(&m, &q).unwrap();
        assert!((lam - 2.0 * (1u64 << n) as f64).abs() < 1e-9, "level {n}: {lam}");
        assert!(lam > prev);
        prev = lam;
    }
}

#[test]
fn lattice_dyadic_sets_are_tight() {
    let z = GroupModel::<f64>::lattice(1).unwrap();
    let s = Region::Box(Window::interval(0.0, 15.0).unwrap());
    let k = Window::interval(-1.0, 1.0).unwrap();
    let v = folner_stat(&s, &k, &z, &QuadratureScheme::grid(2)).unwrap();
    assert!((v - 14.0 / 16.0).abs() < 1e-15);
}
