use ergolab::cocycle::{
    cocycle_residual, cond_exp_ratio, hopf_classify, HopfReport, NonsingularAction, TorusFlow, TranslationSystem,
};
use ergolab::cross_section::{build_e_u, greedy_net, selector_check, Net, TIE_TOL};
use ergolab::ergodic::{hopf_ergodicity_experiment, random_ratio_run, SuspensionErgodicityConfig};
use ergolab::filtration::{ball_absorbed, dyadic_filtration, folner_stat, random_dyadic};
use ergolab::numerics::{stream_rng, SampleStats};
use ergolab::poisson::{change_of_variables_mc, hopf_classify_suspension, sample_config, upsilon_bound_check};
use ergolab::{Element, GroupModel, Region, Window};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{ExperimentConfig, FunctionalBlock, PiBlock, TestFunctionBlock, WindowBlock};
use crate::output::{num, PlotSpec, Report};
use crate::Failure;

/// Top-level blocks each experiment reads; any other block is rejected.
pub fn blocks(experiment: &str) -> &'static [&'static str] {
    match experiment {
        "net" => &["group", "window", "params"],
        "voronoi" => &["group", "window", "quadrature", "seeds", "params"],
        "filtration" => &["group", "window", "quadrature", "seeds", "levels", "params"],
        "folner" => &["group", "quadrature", "params"],
        "cocycle" => &["group", "density", "window", "seeds", "params"],
        "condexp" => &["group", "density", "window", "quadrature", "seeds", "params"],
        "hopf" => &["group", "density", "window", "quadrature", "seeds", "params"],
        "poisson" => &["group", "density", "window", "seeds", "params"],
        "rnstar" => &["group", "density", "window", "seeds", "params"],
        "upsilon" => &["group", "density", "window", "seeds", "params"],
        "ergodic" => &["group", "quadrature", "seeds", "levels", "params"],
        "suspension-ergodicity" => &["density", "quadrature", "seeds", "levels", "params"],
        _ => &[],
    }
}

/// One line per experiment for `ergolab list`: name, CSV columns, summary.
pub const CATALOG: &[(&str, &str, &str)] = &[
    ("net", "index,c0,c1,nearest", "greedy r_pack-separated net of a window; packing and covering radii"),
    ("voronoi", "sample,c0,c1,owner,radius,ties", "orbit Voronoi allocation against a brute-force nearest point search"),
    (
        "filtration",
        "level,mean_measure,min_measure,identity_fraction,absorbed_fraction,nesting_violations",
        "dyadic filtration of a net: nesting, growth and ball absorption of displacement sets",
    ),
    ("folner", "measure_s,stat", "Følner statistic λ(g ∈ S : Kg ⊂ S)/λ(S) of a window S against K"),
    ("cocycle", "seed,index,residual,nabla", "cocycle identity residuals on random triples (g, h, x)"),
    ("condexp", "sample,c0,owner,value", "conditional expectation ratio on Voronoi tiles; spread within classes"),
    ("hopf", "radius,partial,volume,increment", "partial integrals of the cocycle over growing balls and the Hopf verdict"),
    (
        "poisson",
        "set,lo,hi,expected,mean,var,z_mean,z_var,empty_fraction,z_empty",
        "Poisson sampler count statistics against closed forms",
    ),
    ("rnstar", "g,lhs,rhs,lhs_se,rhs_se,z", "Monte Carlo change of variables for the suspension Radon-Nikodym derivative"),
    ("upsilon", "seed,g,count,upsilon,ratio,lower,upper,pass", "ratio bounds of the suspension cocycle under interval exchanges"),
    ("ergodic", "level,mean_value,l1_error,sup_error,folner_stat", "ratio averages of a torus flow along a random Følner sequence"),
    (
        "suspension-ergodicity",
        "level,mean_average,std_err,mean_denominator,min_denominator_ratio,mean_cross_term,sandwich_checks,sandwich_passes",
        "ratio averages on a Poisson suspension with interval-exchange perturbations",
    ),
];

pub fn run(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    match cfg.experiment.as_str() {
        "net" => net(cfg),
        "voronoi" => voronoi(cfg),
        "filtration" => filtration(cfg),
        "folner" => folner(cfg),
        "cocycle" => cocycle(cfg),
        "condexp" => condexp(cfg),
        "hopf" => hopf(cfg),
        "poisson" => poisson(cfg),
        "rnstar" => rnstar(cfg),
        "upsilon" => upsilon(cfg),
        "ergodic" => ergodic(cfg),
        "suspension-ergodicity" => suspension(cfg),
        other => Err(Failure::validation(format!("unknown experiment `{other}`"), Some("experiment".into()))),
    }
}

fn plot(title: &str, x: &str, ys: &[&str], log_y: bool) -> PlotSpec {
    PlotSpec { title: title.into(), x: x.into(), ys: ys.iter().map(|s| s.to_string()).collect(), log_y }
}

fn draws(model: &GroupModel<f64>, w: &Window<f64>, seed: u64, n: usize) -> Vec<Element<f64>> {
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| model.sample_chart(w, &mut rng)).collect()
}

fn chart2(g: &Element<f64>, dim: usize) -> [String; 2] {
    let c = g.chart();
    [num(c[0]), if dim > 1 { num(c[1]) } else { String::new() }]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetParams {
    r_pack: f64,
    scan_step: f64,
}

fn net(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let w = cfg.window()?;
    let p: NetParams = cfg.params()?;
    let net = greedy_net(&model, &w, p.r_pack, p.scan_step)?;
    let mut rep = Report::new("net", vec!["index", "c0", "c1", "nearest"], plot("net spacing", "index", &["nearest"], false));
    let pts = net.points();
    for (i, a) in pts.iter().enumerate() {
        let nearest = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, b)| model.orbit_distance(a, b).min(model.orbit_distance(b, a)))
            .fold(f64::INFINITY, f64::min);
        let [c0, c1] = chart2(a, model.dim());
        rep.row(vec![i.to_string(), c0, c1, num(nearest)]);
    }
    let sep = net.min_separation();
    rep.check("packing", sep >= net.r_pack() * (1.0 - 1e-12), format!("min separation {sep} vs r_pack {}", net.r_pack()));
    rep.check("covering", net.r_cover() >= net.r_pack(), format!("r_cover {} >= r_pack", net.r_cover()));
    rep.check("nonempty", !net.is_empty(), format!("{} points", net.len()));
    rep.put("points", net.len());
    rep.put("r_pack", net.r_pack());
    rep.put("r_cover", net.r_cover());
    rep.put("min_separation", sep);
    rep.put("lacunarity_radius", net.lacunarity_radius());
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VoronoiParams {
    r_pack: f64,
    scan_step: f64,
    probe: WindowBlock,
    samples: usize,
}

fn least_minimizer(net: &Net<f64>, x: &Element<f64>) -> (usize, f64) {
    let m = net.model();
    let d: Vec<f64> = net.points().iter().map(|w| m.orbit_distance(x, w)).collect();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * min.max(1.0);
    ((0..d.len()).find(|&i| d[i] - min <= tol).expect("nonempty net"), min)
}

fn voronoi(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let w = cfg.window()?;
    let q = cfg.quadrature()?;
    let seed = cfg.seeds()?[0];
    let p: VoronoiParams = cfg.params()?;
    let probe = p.probe.build("params.probe")?;
    let net = greedy_net(&model, &w, p.r_pack, p.scan_step)?;
    let samples = draws(&model, &probe, seed, p.samples);
    let mut rep = Report::new(
        "voronoi",
        vec!["sample", "c0", "c1", "owner", "radius", "ties"],
        plot("orbit distance to the net", "sample", &["radius"], false),
    );
    let (mut owner_ok, mut radius_ok, mut max_r) = (0, 0, 0.0f64);
    for (i, x) in samples.iter().enumerate() {
        let a = net.allocate(x)?;
        let (least, min) = least_minimizer(&net, x);
        owner_ok += usize::from(a.owner == least && (a.radius - min).abs() <= TIE_TOL * min.max(1.0));
        radius_ok += usize::from(a.radius <= net.r_cover() * (1.0 + 1e-12));
        max_r = max_r.max(a.radius);
        let [c0, c1] = chart2(x, model.dim());
        rep.row(vec![i.to_string(), c0, c1, a.owner.to_string(), num(a.radius), a.candidates.len().to_string()]);
    }
    let sel = selector_check(&build_e_u(&net, q), &samples)?;
    let n = samples.len();
    rep.check("owner_least_minimizer", owner_ok == n, format!("{owner_ok} of {n}"));
    rep.check("radius_within_cover", radius_ok == n, format!("max radius {max_r} vs r_cover {}", net.r_cover()));
    rep.check(
        "selector",
        sel.passed(),
        format!("{} of {} fixed, {} of {} pairs consistent", sel.selector_ok, sel.checked, sel.pairs_consistent, sel.pairs_checked),
    );
    rep.put("points", net.len());
    rep.put("r_cover", net.r_cover());
    rep.put("max_radius", max_r);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiltrationParams {
    r_pack: f64,
    scan_step: f64,
    probe: WindowBlock,
    samples: usize,
    ball_radius: f64,
}

fn filtration(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let w = cfg.window()?;
    let q = cfg.quadrature()?;
    let seed = cfg.seeds()?[0];
    let levels = cfg.levels()?;
    let p: FiltrationParams = cfg.params()?;
    let probe = p.probe.build("params.probe")?;
    let net = greedy_net(&model, &w, p.r_pack, p.scan_step)?;
    let filt = dyadic_filtration(&net, *levels.end(), q)?;
    let samples = draws(&model, &probe, seed, p.samples);
    let e = model.identity();
    // per level, per sample: (class, measure, contains e, absorbs the ball)
    let table: Vec<Vec<(u64, f64, bool, bool)>> = (0..=*levels.end())
        .map(|n| {
            samples
                .par_iter()
                .map(|x| {
                    let d = filt.displacement(n, x)?;
                    Ok((filt.class_of(n, x)?, d.measure(&model, &q)?, d.contains(&e), ball_absorbed(&d, &model, p.ball_radius)))
                })
                .collect::<ergolab::Result<Vec<_>>>()
        })
        .collect::<ergolab::Result<_>>()?;
    let mut rep = Report::new(
        "filtration",
        vec!["level", "mean_measure", "min_measure", "identity_fraction", "absorbed_fraction", "nesting_violations"],
        plot("displacement set measure", "level", &["mean_measure"], true),
    );
    let k = samples.len().max(1) as f64;
    let (mut violations, mut shrinking, mut missing_e) = (0usize, 0usize, 0usize);
    for n in levels.clone() {
        let row = &table[n];
        let mut v = 0;
        if n < *levels.end() {
            let next = &table[n + 1];
            for i in 0..row.len() {
                shrinking += usize::from(next[i].1 < row[i].1 * (1.0 - 1e-9));
                for j in i + 1..row.len() {
                    v += usize::from(row[i].0 == row[j].0 && next[i].0 != next[j].0);
                }
            }
        }
        violations += v;
        let meas: Vec<f64> = row.iter().map(|r| r.1).collect();
        let ident = row.iter().filter(|r| r.2).count();
        missing_e += row.len() - ident;
        let absorbed = row.iter().filter(|r| r.3).count();
        rep.row(vec![
            n.to_string(),
            num(meas.iter().sum::<f64>() / k),
            num(meas.iter().copied().fold(f64::INFINITY, f64::min)),
            num(ident as f64 / k),
            num(absorbed as f64 / k),
            v.to_string(),
        ]);
    }
    let last_absorbed = table[*levels.end()].iter().filter(|r| r.3).count();
    rep.check("nesting", violations == 0, format!("{violations} split classes"));
    rep.check("monotone_measure", shrinking == 0, format!("{shrinking} shrinking displacement sets"));
    rep.check("identity_in_displacement", missing_e == 0, format!("{missing_e} displacement sets miss e"));
    rep.check(
        "ball_absorbed",
        last_absorbed == samples.len(),
        format!("{last_absorbed} of {} absorb B(e, {}) at level {}", samples.len(), p.ball_radius, levels.end()),
    );
    rep.put("points", net.len());
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FolnerParams {
    s: WindowBlock,
    k: WindowBlock,
}

fn folner(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let q = cfg.quadrature()?;
    let p: FolnerParams = cfg.params()?;
    let s = Region::Box(p.s.build("params.s")?);
    let k = p.k.build("params.k")?;
    let lam = s.measure(&model, &q)?;
    let stat = folner_stat(&s, &k, &model, &q)?;
    let mut rep = Report::new("folner", vec!["measure_s", "stat"], plot("Følner statistic", "measure_s", &["stat"], false));
    rep.row(vec![num(lam), num(stat)]);
    rep.check("unit_interval", (0.0..=1.0).contains(&stat), format!("stat {stat}"));
    rep.put("stat", stat);
    rep.put("measure_s", lam);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CocycleParams {
    triples: usize,
    tolerance: f64,
}

fn cocycle(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let sys = TranslationSystem::new(model, cfg.density()?)?;
    let w = cfg.window()?;
    let p: CocycleParams = cfg.params()?;
    let mut rep = Report::new(
        "cocycle",
        vec!["seed", "index", "residual", "nabla"],
        plot("cocycle residual", "index", &["residual"], true),
    );
    let mut worst = 0.0f64;
    for seed in cfg.seeds()? {
        let pts = draws(&model, &w, seed, 3 * p.triples);
        for (i, t) in pts.chunks(3).enumerate() {
            let r = cocycle_residual(&sys, &t[0], &t[1], &t[2])?;
            let gh = model.mul(&t[0], &t[1])?;
            let nab = sys.nabla(&gh, &t[2])?;
            worst = worst.max(r / nab.max(1.0));
            rep.row(vec![seed.to_string(), i.to_string(), num(r), num(nab)]);
        }
    }
    rep.check("cocycle_identity", worst <= p.tolerance, format!("max relative residual {worst:e} vs {:e}", p.tolerance));
    rep.put("max_relative_residual", worst);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CondExpParams {
    r_pack: f64,
    scan_step: f64,
    probe: WindowBlock,
    samples: usize,
    function: TestFunctionBlock,
    tolerance: f64,
}

fn condexp(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let sys = TranslationSystem::new(model, cfg.density()?)?;
    let w = cfg.window()?;
    let q = cfg.quadrature()?;
    let seed = cfg.seeds()?[0];
    let p: CondExpParams = cfg.params()?;
    let probe = p.probe.build("params.probe")?;
    let net = greedy_net(&model, &w, p.r_pack, p.scan_step)?;
    let oer = build_e_u(&net, q);
    let f = p.function.on_element();
    let samples = draws(&model, &probe, seed, p.samples);
    let vals: Vec<(usize, f64)> = samples
        .par_iter()
        .map(|x| Ok((oer.owner_certain(x)?, cond_exp_ratio(&sys, &f, x, &oer, &q)?)))
        .collect::<ergolab::Result<_>>()?;
    let mut rep = Report::new(
        "condexp",
        vec!["sample", "c0", "owner", "value"],
        plot("conditional expectation", "c0", &["value"], false),
    );
    let mut range: std::collections::BTreeMap<usize, (f64, f64)> = Default::default();
    for (i, (x, &(owner, v))) in samples.iter().zip(&vals).enumerate() {
        let e = range.entry(owner).or_insert((v, v));
        *e = (e.0.min(v), e.1.max(v));
        rep.row(vec![i.to_string(), num(x.chart()[0]), owner.to_string(), num(v)]);
    }
    let spread = range.values().map(|(a, b)| b - a).fold(0.0, f64::max);
    rep.check("class_constant", spread <= p.tolerance, format!("max spread {spread:e} over {} classes", range.len()));
    rep.put("classes", range.len());
    rep.put("max_spread", spread);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum Carrier {
    Translation,
    Suspension,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HopfParams {
    carrier: Carrier,
    x: Vec<f64>,
    radii: Vec<f64>,
    expect: String,
}

fn hopf(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let density = cfg.density()?;
    let q = cfg.quadrature()?;
    let p: HopfParams = cfg.params()?;
    if !["conservative", "dissipative", "inconclusive", "any"].contains(&p.expect.as_str()) {
        return Err(Failure::validation(
            "expect must be conservative, dissipative, inconclusive or any".into(),
            Some("params.expect".into()),
        ));
    }
    let report: HopfReport<f64> = match p.carrier {
        Carrier::Translation => {
            let sys = TranslationSystem::new(model, density)?;
            let x = model.element(&p.x).map_err(|e| Failure::core(e).with_key("params.x"))?;
            hopf_classify(&sys, &x, &p.radii, &q)?
        }
        Carrier::Suspension => {
            let cfg_w = cfg.window()?;
            let conf = sample_config(&model, &density, &cfg_w, cfg.seeds()?[0])?;
            hopf_classify_suspension(&conf, &p.radii, &q)?
        }
    };
    let mut rep = Report::new(
        "hopf",
        vec!["radius", "partial", "volume", "increment"],
        plot("partial integrals of the cocycle", "radius", &["partial", "volume"], true),
    );
    for i in 0..report.radii.len() {
        rep.row(vec![num(report.radii[i]), num(report.partials[i]), num(report.volumes[i]), num(report.increments[i])]);
    }
    let verdict = report.verdict.name();
    rep.check("verdict", p.expect == "any" || p.expect == verdict, format!("{verdict}, expected {}", p.expect));
    rep.put("verdict", verdict);
    rep.put("compact_group", report.compact_group);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoissonParams {
    sets: Vec<WindowBlock>,
    z_max: f64,
}

fn poisson(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let density = cfg.density()?;
    let w = cfg.window()?;
    let seeds = cfg.seeds()?;
    let p: PoissonParams = cfg.params()?;
    let sets: Vec<Window<f64>> = p.sets.iter().map(|s| s.build("params.sets")).collect::<Result<_, _>>()?;
    if seeds.len() < 2 {
        return Err(Failure::validation("count statistics need at least two seeds".into(), Some("seeds".into())));
    }
    let counts: Vec<Vec<usize>> = seeds
        .par_iter()
        .map(|&s| {
            let c = sample_config(&model, &density, &w, s)?;
            sets.iter().map(|a| c.count_in(a)).collect()
        })
        .collect::<ergolab::Result<_>>()?;
    let mut rep = Report::new(
        "poisson",
        vec!["set", "lo", "hi", "expected", "mean", "var", "z_mean", "z_var", "empty_fraction", "z_empty"],
        plot("window counts", "set", &["expected", "mean", "var"], false),
    );
    let n = seeds.len() as f64;
    for (k, a) in sets.iter().enumerate() {
        let mu = density
            .mass_in_box(a.lo(), a.hi())
            .ok_or_else(|| Failure::validation("set and density dimensions differ".into(), Some("params.sets".into())))?;
        let xs: Vec<f64> = counts.iter().map(|c| c[k] as f64).collect();
        let st = SampleStats::from_slice(&xs);
        let z_mean = st.z_score(mu);
        let vse = SampleStats::var_std_err(&xs);
        let z_var = if vse > 0.0 { (st.var - mu).abs() / vse } else if st.var == mu { 0.0 } else { f64::INFINITY };
        let p0 = (-mu).exp();
        let empty = xs.iter().filter(|&&x| x == 0.0).count() as f64 / n;
        let se0 = (p0 * (1.0 - p0) / n).sqrt();
        let z_empty = if se0 > 0.0 { (empty - p0).abs() / se0 } else if empty == p0 { 0.0 } else { f64::INFINITY };
        let lo: Vec<String> = a.lo().iter().map(|v| num(*v)).collect();
        let hi: Vec<String> = a.hi().iter().map(|v| num(*v)).collect();
        rep.row(vec![
            k.to_string(),
            lo.join(" "),
            hi.join(" "),
            num(mu),
            num(st.mean),
            num(st.var),
            num(z_mean),
            num(z_var),
            num(empty),
            num(z_empty),
        ]);
        let ok = z_mean <= p.z_max && z_var <= p.z_max && z_empty <= p.z_max;
        rep.check(&format!("set_{k}"), ok, format!("z mean {z_mean:.3}, var {z_var:.3}, empty {z_empty:.3}"));
    }
    rep.put("seeds", seeds.len());
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RnStarParams {
    g: Vec<f64>,
    functional: FunctionalBlock,
    z_max: f64,
}

fn rnstar(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let density = cfg.density()?;
    let w = cfg.window()?;
    let seeds = cfg.seeds()?;
    let p: RnStarParams = cfg.params()?;
    let f = p.functional.build()?;
    let mut rep = Report::new(
        "rnstar",
        vec!["g", "lhs", "rhs", "lhs_se", "rhs_se", "z"],
        plot("change of variables", "g", &["lhs", "rhs"], false),
    );
    for &g in &p.g {
        let ge = model.element(&[g]).map_err(|e| Failure::core(e).with_key("params.g"))?;
        let r = change_of_variables_mc(&model, &density, &w, &ge, &f, &seeds)?;
        rep.row(vec![num(g), num(r.lhs), num(r.rhs), num(r.lhs_se), num(r.rhs_se), num(r.z)]);
        rep.check(&format!("g={g}"), r.z <= p.z_max, format!("z {:.3}", r.z));
    }
    rep.put("functional", f.name());
    rep.put("seeds", seeds.len());
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UpsilonParams {
    alpha: f64,
    pi: PiBlock,
    g: Vec<f64>,
}

fn upsilon(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let density = cfg.density()?;
    let w = cfg.window()?;
    let seeds = cfg.seeds()?;
    let p: UpsilonParams = cfg.params()?;
    if !(p.alpha > 0.0 && p.alpha < 1.0) || density.inf() < p.alpha || density.sup() > p.alpha.recip() {
        return Err(Failure::validation(
            format!(
                "alpha = {} must satisfy 0 < alpha < 1 and alpha <= inf density ({}) <= sup density ({}) <= 1/alpha",
                p.alpha,
                density.inf(),
                density.sup()
            ),
            Some("params.alpha".into()),
        ));
    }
    let pi = p.pi.build(&density)?;
    let rows: Vec<Vec<(u64, f64, ergolab::poisson::UpsilonReport<f64>)>> = seeds
        .par_iter()
        .map(|&s| {
            let conf = sample_config(&model, &density, &w, s)?;
            p.g.iter().map(|&g| Ok((s, g, upsilon_bound_check(&pi, &conf, &Element::real(g), p.alpha)?))).collect()
        })
        .collect::<ergolab::Result<_>>()?;
    let mut rep = Report::new(
        "upsilon",
        vec!["seed", "g", "count", "upsilon", "ratio", "lower", "upper", "pass"],
        plot("cocycle ratio under the exchange", "count", &["ratio", "lower", "upper"], true),
    );
    let (mut total, mut passed) = (0, 0);
    for (s, g, r) in rows.iter().flatten() {
        total += 1;
        passed += usize::from(r.pass);
        rep.row(vec![
            s.to_string(),
            num(*g),
            r.count.to_string(),
            num(r.upsilon),
            num(r.ratio),
            num(r.upsilon.powi(4)),
            num(r.upsilon.powi(-4)),
            r.pass.to_string(),
        ]);
    }
    rep.check("upsilon_bounds", passed == total, format!("{passed} of {total}"));
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ErgodicParams {
    slopes: Vec<f64>,
    frequencies: Vec<i32>,
    samples: usize,
    l1_tolerance: f64,
}

fn ergodic(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let model = cfg.group()?;
    let q = cfg.quadrature()?;
    let seed = cfg.seeds()?[0];
    let levels = cfg.levels()?;
    let p: ErgodicParams = cfg.params()?;
    if p.frequencies.len() != p.slopes.len() {
        return Err(Failure::validation(
            "one frequency per torus coordinate".into(),
            Some("params.frequencies".into()),
        ));
    }
    let flow = TorusFlow::new(model, p.slopes.clone()).map_err(|e| Failure::core(e).with_key("params.slopes"))?;
    let dim = flow.dim();
    let tau = std::f64::consts::TAU;
    let freq = p.frequencies.clone();
    let f = move |y: &[f64; 2]| (0..dim).map(|i| (tau * freq[i] as f64 * y[i]).cos()).product::<f64>();
    let target = if p.frequencies.iter().all(|&k| k == 0) { 1.0 } else { 0.0 };
    let torus = GroupModel::<f64>::euclidean(dim as u8)?;
    let unit = Window::cube(dim, 0.0, 1.0)?;
    let mut rng = stream_rng(seed, 1);
    let samples: Vec<[f64; 2]> = (0..p.samples)
        .map(|_| {
            let c = torus.sample_chart(&unit, &mut rng).chart();
            [c[0], if dim > 1 { c[1] } else { 0.0 }]
        })
        .collect();
    let filt = random_dyadic(seed, *levels.end(), 1)?;
    let r = random_ratio_run(&flow, &f, &filt, &samples, levels, target, &q)?;
    let mut rep = Report::new(
        "ergodic",
        vec!["level", "mean_value", "l1_error", "sup_error", "folner_stat"],
        plot("ratio average error", "level", &["l1_error", "sup_error"], true),
    );
    for row in &r.rows {
        rep.row(vec![row.level.to_string(), num(row.mean_value), num(row.l1_error), num(row.sup_error), num(row.folner_stat)]);
    }
    let last = r.rows.last().expect("levels are nonempty");
    rep.check(
        "l1_convergence",
        last.l1_error <= p.l1_tolerance,
        format!("L1 error {:e} at level {} vs {:e}", last.l1_error, last.level, p.l1_tolerance),
    );
    rep.put("target", target);
    rep.put("final_l1_error", last.l1_error);
    Ok(rep)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuspensionParams {
    alpha: f64,
    functional: FunctionalBlock,
    pis: Vec<PiBlock>,
}

fn suspension(cfg: &ExperimentConfig) -> Result<Report, Failure> {
    let density = cfg.density()?;
    let q = cfg.quadrature()?;
    let seeds = cfg.seeds()?;
    let levels = cfg.levels()?;
    let p: SuspensionParams = cfg.params()?;
    let pis = p.pis.iter().map(|b| b.build(&density)).collect::<Result<Vec<_>, _>>()?;
    let functional = p.functional.build()?;
    let r = hopf_ergodicity_experiment(&SuspensionErgodicityConfig {
        density,
        functional,
        pis,
        alpha: p.alpha,
        levels,
        seeds,
        quad: q,
    })?;
    let mut rep = Report::new(
        "suspension-ergodicity",
        vec![
            "level",
            "mean_average",
            "std_err",
            "mean_denominator",
            "min_denominator_ratio",
            "mean_cross_term",
            "sandwich_checks",
            "sandwich_passes",
        ],
        plot("cross term of the perturbed averages", "level", &["mean_cross_term", "std_err"], true),
    );
    for row in &r.rows {
        rep.row(vec![
            row.level.to_string(),
            num(row.mean_average),
            num(row.std_err),
            num(row.mean_denominator),
            row.min_denominator_ratio.map(num).unwrap_or_default(),
            num(row.mean_cross_term),
            row.sandwich_checks.to_string(),
            row.sandwich_passes.to_string(),
        ]);
    }
    rep.check("sandwich", r.sandwich_passes == r.sandwich_checks, format!("{} of {}", r.sandwich_passes, r.sandwich_checks));
    rep.check("target", r.target_z <= 3.0, format!("final mean {} vs E[phi] {} (z {:.3})", r.final_mean, r.target, r.target_z));
    for (k, pl) in r.perturbed.iter().enumerate() {
        rep.check(&format!("perturbed_limit_{k}"), pl.z <= 3.0, format!("mean {} (paired z {:.3})", pl.mean, pl.z));
    }
    rep.check("cross_term_decreasing", r.cross_term_decreasing, "last level <= first level".into());
    rep.check(
        "denominator_growth",
        !(r.min_denominator_ratio < 1.5),
        format!("min ratio of consecutive denominators {}", r.min_denominator_ratio),
    );
    rep.put("hopf_verdict", r.hopf_verdict.name());
    rep.put("target", r.target);
    rep.put("final_mean", r.final_mean);
    rep.put("final_std_err", r.final_std_err);
    rep.put("window", vec![r.window.0, r.window.1]);
    rep.put("ergodicity_consistent", r.ergodicity_consistent);
    Ok(rep)
}
