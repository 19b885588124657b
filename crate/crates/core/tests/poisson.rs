use ergolab::cocycle::{Bump, DensitySpec};
use ergolab::numerics::SampleStats;
use ergolab::poisson::{
    act, change_of_variables_mc, pi_apply, pull_back, rn_star, sample_config, upsilon_bound_check, Functional,
    PiTransform, PointConfiguration,
};
use ergolab::{Element, Error, GroupModel, Window};
use proptest::prelude::*;

fn step() -> DensitySpec<f64> {
    DensitySpec::plateau_box_1d(0.0, 2.0, 1.0).unwrap()
}

fn line() -> GroupModel<f64> {
    GroupModel::real_line()
}

fn win(a: f64, b: f64) -> Window<f64> {
    Window::interval(a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn act_and_pull_back_are_inverse(seed in any::<u64>(), g in -4.0..4.0f64) {
        let p = sample_config(&line(), &step(), &win(-5.0, 7.0), seed).unwrap();
        let g = Element::real(g);
        let back = pull_back(&g, &act(&g, &p).unwrap()).unwrap();
        prop_assert_eq!(back.len(), p.len());
        for (a, b) in back.points().iter().zip(p.points()) {
            prop_assert!((a.coord(0) - b.coord(0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rn_star_is_a_cocycle(seed in any::<u64>(), g in -2.0..2.0f64, h in -2.0..2.0f64) {
        let p = sample_config(&line(), &step(), &win(-8.0, 10.0), seed).unwrap();
        let (eg, eh) = (Element::real(g), Element::real(h));
        let hp = act(&eh, &p).unwrap();
        let lhs = rn_star(&Element::real(g + h), &p).unwrap();
        let rhs = rn_star(&eg, &hp).unwrap() * rn_star(&eh, &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(rhs));
    }

    #[test]
    fn upsilon_bounds_hold(seed in any::<u64>(), g in -3.0..3.0f64) {
        let d = DensitySpec::Plateau(Bump::Cosine { center: vec![1.0], radius: 2.0, height: 0.6 });
        let pi = PiTransform::equal_mass(d.clone(), -1.0, 3.0, vec![2, 0, 1]).unwrap();
        let p = sample_config(&line(), &d, &win(-8.0, 10.0), seed).unwrap();
        let r = upsilon_bound_check(&pi, &p, &Element::real(g), 0.5).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn sampler_is_deterministic_and_inside_the_window(seed in any::<u64>()) {
        let w = Window::cube(2, -1.0, 2.0).unwrap();
        let m = GroupModel::<f64>::euclidean(2).unwrap();
        let a = sample_config(&m, &DensitySpec::Constant(1.5), &w, seed).unwrap();
        prop_assert_eq!(&a, &sample_config(&m, &DensitySpec::Constant(1.5), &w, seed).unwrap());
        prop_assert!(a.points().iter().all(|x| w.contains(x)));
    }
}

fn counts(seeds: std::ops::Range<u64>, f: impl Fn(&PointConfiguration<f64>) -> (f64, f64) + Sync) -> Vec<(f64, f64)> {
    seeds.map(|s| f(&sample_config(&line(), &step(), &win(-2.0, 6.0), s).unwrap())).collect()
}

#[test]
fn disjoint_counts_are_uncorrelated() {
    let (a, b) = (win(0.5, 1.5), win(1.5, 4.0));
    let pairs = counts(0..20_000, |p| (p.count_in(&a).unwrap() as f64, p.count_in(&b).unwrap() as f64));
    let n = pairs.len() as f64;
    let (ma, mb) = (pairs.iter().map(|x| x.0).sum::<f64>() / n, pairs.iter().map(|x| x.1).sum::<f64>() / n);
    let cov = pairs.iter().map(|x| (x.0 - ma) * (x.1 - mb)).sum::<f64>() / (n - 1.0);
    // Var(N_A) = 2, Var(N_B) = 3; the sample covariance has standard error about √6/√n.
    assert!(cov.abs() <= 3.0 * (6.0f64).sqrt() / n.sqrt(), "cov {cov}");
    let sa = SampleStats::from_slice(&pairs.iter().map(|x| x.0).collect::<Vec<_>>());
    assert!(sa.z_score(2.0) <= 3.0, "{sa:?}");
}

#[test]
fn interval_exchanges_preserve_the_count_law() {
    let pi = PiTransform::from_pieces(step(), vec![(0.0, 1.0), (3.0, 5.0)], vec![1, 0]).unwrap();
    let a = win(0.0, 1.0);
    let pairs = counts(0..20_000, |p| {
        let moved = pi_apply(&pi, p).unwrap();
        (moved.count_in(&a).unwrap() as f64, p.count_in(&a).unwrap() as f64)
    });
    let moved = SampleStats::from_slice(&pairs.iter().map(|x| x.0).collect::<Vec<_>>());
    let orig = SampleStats::from_slice(&pairs.iter().map(|x| x.1).collect::<Vec<_>>());
    assert!(moved.z_score(2.0) <= 3.0, "{moved:?}");
    assert!(orig.z_score(2.0) <= 3.0, "{orig:?}");
    assert!(pairs.iter().any(|x| x.0 != x.1));
}

#[test]
fn change_of_variables_holds_for_a_step_density() {
    let seeds: Vec<u64> = (0..4000).collect();
    let f = Functional::MinCount(win(0.0, 3.0), 3);
    let r = change_of_variables_mc(&line(), &step(), &win(-6.0, 7.0), &Element::real(1.3), &f, &seeds).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn cauchy_and_lattice_are_rejected() {
    let p = sample_config(&line(), &DensitySpec::standard_cauchy(), &win(-3.0, 3.0), 1).unwrap();
    assert!(matches!(rn_star(&Element::real(1.0), &p), Err(Error::Margin(_))));
    let z = GroupModel::<f64>::lattice(1).unwrap();
    assert!(matches!(sample_config(&z, &step(), &win(0.0, 2.0), 0), Err(Error::SamplerInapplicable(_))));
}
