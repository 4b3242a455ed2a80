use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughkit::controlled::{compose_smooth, rough_integral, rough_integral_bound, ControlledPath};
use roughkit::lift::{
    brownian_lift_full, canonical_lift, fbm_sample, homogeneous_norm, lyons_extend, neo_classical_check,
    ExtendOptions, GaussianSimConfig, LiftMode,
};
use roughkit::path::{uniform_grid, FnGerm, SamplePath};
use roughkit::rde::{
    lyons_divergence_demo, lyons_divergence_terms, linear_rde_series, rde_solve, rogers_scan as scan, PicardOptions,
    RdeScheme, WongZakaiConfig, WongZakaiLevel,
};
use roughkit::sewing::sewing_bound_check;
use roughkit::stats::linear_fit;
use roughkit::tensor::{shuffle as shuffle_words, Word};
use roughkit::young::young_integral;
use roughkit::{RoughPath, SmoothMap, VectorField};
use serde::Serialize;
use serde_json::json;

use crate::util::{merge_config, num, read_text, require, usage, CliResult, Output};
use crate::{
    Common, ExtendParams, FbmParams, LiftParams, LinearRdeParams, LyonsParams, NeoParams, RdeParams, RogersParams,
    RoughIntParams, SewingParams, ShuffleParams, SignatureParams, WongZakaiParams, YoungParams,
};

fn parse<T: std::str::FromStr<Err = roughkit::RoughError>>(s: &str) -> CliResult<T> {
    Ok(s.parse::<T>()?)
}

fn start<P: Serialize + serde::de::DeserializeOwned>(common: &Common, p: &P) -> CliResult<(P, Output)> {
    let p = merge_config(p, common.config.as_deref())?;
    Ok((p, Output::new(&common.out)?))
}

/// Built-in vector fields `σ: R^m → L(R^d, R^m)`.
pub fn builtin_field(name: &str) -> CliResult<VectorField> {
    match name {
        "geometric" => Ok(VectorField::scalar_identity()),
        "rotation" => Ok(VectorField::linear(2, &[vec![0.0, 1.0, -1.0, 0.0], vec![0.5, 0.0, 0.0, -0.5]])?),
        "sine" => Ok(VectorField::new(1, 2, |y| vec![y[0].sin(), y[0].cos()])
            .with_derivative(|y| vec![y[0].cos(), -y[0].sin()])),
        other => Err(usage(format!("unknown field {other:?}; expected geometric, rotation or sine"))),
    }
}

fn smooth_driver(times: Vec<f64>, d: usize) -> CliResult<SamplePath> {
    Ok(SamplePath::from_fn(times, d, |t| {
        (0..d).map(|j| ((3.0 + j as f64) * t).sin() + 0.5 * t * (j as f64 + 1.0)).collect()
    })?)
}

fn tensor_rows(x: &roughkit::TruncatedTensor) -> Vec<Vec<String>> {
    (1..=x.depth())
        .flat_map(|n| (0..x.level(n).len()).map(move |k| (n, k)))
        .map(|(n, k)| vec![Word::from_index(x.dim(), n, k).to_string(), num(x.level(n)[k])])
        .collect()
}

pub fn simulate_fbm(common: &Common, p: &FbmParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = require(p.seed, "seed")?;
    let cfg = GaussianSimConfig {
        hurst: require(p.hurst, "hurst")?,
        times: uniform_grid(*p.horizon.get_or_insert(1.0), *p.grid_n.get_or_insert(256)),
        seed,
        dim: *p.dim.get_or_insert(1),
    };
    let path = fbm_sample(&cfg)?;
    out.write("fbm.csv", &path.to_csv())?;
    println!("fbm: {} points, dim {}, X_T = {:?}", path.len(), path.dim(), path.end());
    out.finish("simulate-fbm", &p, Some(seed))
}

pub fn lift(common: &Common, p: &LiftParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let source = p.source.get_or_insert_with(|| "brownian".into()).clone();
    let grid = uniform_grid(*p.horizon.get_or_insert(1.0), *p.grid_n.get_or_insert(256));
    let dim = *p.dim.get_or_insert(2);
    let alpha = *p.alpha.get_or_insert(0.45);
    let depth = *p.depth.get_or_insert(2);
    let (rough, seed) = match source.as_str() {
        "brownian" => {
            let seed = require(p.seed, "seed")?;
            let mode: LiftMode = parse(p.mode.get_or_insert_with(|| "strat".into()).as_str())?;
            let b = brownian_lift_full(&grid, *p.refinement.get_or_insert(64), mode, seed, dim, alpha)?;
            out.write("fine_path.csv", &b.fine.to_csv())?;
            (b.rough, Some(seed))
        }
        "fbm" => {
            let seed = require(p.seed, "seed")?;
            let cfg = GaussianSimConfig { hurst: require(p.hurst, "hurst")?, times: grid, seed, dim };
            let path = fbm_sample(&cfg)?;
            (canonical_lift(&path, depth, alpha)?, Some(seed))
        }
        "file" => {
            let input = require(p.input.clone(), "input")?;
            let path = SamplePath::from_csv(&read_text(&input)?)?;
            (canonical_lift(&path, depth, alpha)?, None)
        }
        other => return Err(usage(format!("unknown source {other:?}; expected brownian, fbm or file"))),
    };
    out.write("rough_path.csv", &rough.to_csv())?;
    let norm = homogeneous_norm(&rough, alpha);
    let chen = rough.chen_residual(20_000);
    out.json("summary.json", &json!({ "homogeneous_norm": norm, "chen_residual": chen }))?;
    println!("lift: {} cells, d = {}, N = {}, norm_alpha = {norm:.6}, chen residual = {chen:.3e}", rough.n_cells(), rough.dim(), rough.depth());
    out.finish("lift", &p, seed)
}

/// Planar arc `(cos 2πt, sin 2πt)` on `[0, 1]`.
fn arc(n: usize) -> CliResult<SamplePath> {
    Ok(SamplePath::from_fn(uniform_grid(1.0, n), 2, |t| vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()])?)
}

pub fn extend(common: &Common, p: &ExtendParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let depth = *p.depth.get_or_insert(3);
    let levels = *p.levels.get_or_insert(4);
    let x: RoughPath = match &p.input {
        Some(path) => RoughPath::from_csv(&read_text(path)?, require(p.alpha, "alpha")?)?,
        None => canonical_lift(&arc(*p.grid_n.get_or_insert(1 << 12))?, 2, *p.alpha.get_or_insert(1.0))?,
    };
    let ext = lyons_extend(&x, depth, &ExtendOptions { refinement_levels: levels })?;
    out.write("extended.csv", &ext.rough.to_csv())?;
    let alpha = x.alpha();
    let rows = ext.decay.level_sups.iter().enumerate().map(|(k, s)| {
        let n = k + 1;
        vec![n.to_string(), num(*s), num(ext.decay.bound(n, alpha))]
    });
    out.csv("decay.csv", &["n", "level_sup", "bound"], rows)?;
    let gaps = ext.cauchy_gaps.iter().enumerate().map(|(k, g)| vec![(x.depth() + 1 + k).to_string(), num(*g)]);
    out.csv("cauchy_gaps.csv", &["level", "max_gap"], gaps)?;
    println!(
        "extend: depth {} -> {depth} on {} cells; decay fit M = {:.6}, beta = {:.6}",
        x.depth(),
        ext.rough.n_cells(),
        ext.decay.m,
        ext.decay.beta
    );
    out.finish("extend", &p, None)
}

pub fn signature(common: &Common, p: &SignatureParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let path = SamplePath::from_csv(&read_text(&require(p.input.clone(), "input")?)?)?;
    let x = canonical_lift(&path, *p.depth.get_or_insert(3), 1.0)?;
    let sig = x.evaluate_idx(0, x.n_cells())?;
    out.csv("signature.csv", &["word", "coefficient"], tensor_rows(&sig))?;
    println!("signature: d = {}, N = {}, level-1 = {:?}", sig.dim(), sig.depth(), sig.level(1));
    out.finish("signature", &p, None)
}

pub fn shuffle(common: &Common, p: &ShuffleParams) -> CliResult<()> {
    let (p, mut out) = start(common, p)?;
    let u: Word = parse(&require(p.u.clone(), "u")?)?;
    let v: Word = parse(&require(p.v.clone(), "v")?)?;
    let s = shuffle_words(&u, &v);
    out.csv("shuffle.csv", &["word", "coefficient"], s.terms().map(|(w, c)| vec![w.to_string(), num(c)]))?;
    println!("{s}");
    out.finish("shuffle", &p, None)
}

pub fn young_int(common: &Common, p: &YoungParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let (f, g, exact) = match (&p.integrand, &p.integrator) {
        (Some(a), Some(b)) => (SamplePath::from_csv(&read_text(a)?)?, SamplePath::from_csv(&read_text(b)?)?, None),
        (None, None) => {
            let times = uniform_grid(PI / 2.0, *p.grid_n.get_or_insert(1 << 12));
            let f = SamplePath::from_fn(times.clone(), 1, |t| vec![t.cos()])?;
            let g = SamplePath::from_fn(times, 1, |t| vec![t.sin()])?;
            (f, g, Some(PI / 4.0))
        }
        _ => return Err(usage("give both --integrand and --integrator, or neither for the built-in example")),
    };
    let (s, t) = (g.times()[0], *g.times().last().expect("non-empty grid"));
    let res = young_integral(&f, &g, s, t)?;
    out.write("integral.csv", &res.path.to_csv())?;
    let rows = res.sewing.level_values.iter().enumerate().map(|(k, v)| {
        let gap = if k == 0 { 0.0 } else { res.sewing.gaps[k - 1] };
        let mut row = vec![k.to_string(), num(res.sewing.meshes[k]), num(gap)];
        row.extend(v.iter().map(|&x| num(x)));
        row
    });
    let mut header = vec!["level".to_string(), "mesh".into(), "gap".into()];
    header.extend((1..=res.value().len()).map(|i| format!("value_{i}")));
    out.csv("sewing_levels.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)?;
    match exact {
        Some(e) => println!("young-int: {:.12} (exact pi/4 = {e:.12}, error {:.3e})", res.value()[0], (res.value()[0] - e).abs()),
        None => println!("young-int: {:?}, cauchy gap {:.3e}", res.value(), res.cauchy_gap()),
    }
    out.finish("young-int", &p, None)
}

pub fn rough_int(common: &Common, p: &RoughIntParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = require(p.seed, "seed")?;
    let horizon = *p.horizon.get_or_insert(1.0);
    let d = *p.dim.get_or_insert(1);
    let mode: LiftMode = parse(p.mode.get_or_insert_with(|| "strat".into()).as_str())?;
    let grid = uniform_grid(horizon, *p.grid_n.get_or_insert(256));
    let x = brownian_lift_full(&grid, *p.refinement.get_or_insert(64), mode, seed, d, *p.alpha.get_or_insert(0.45))?.rough;
    let cp = ControlledPath::identity(x, &vec![0.0; d])?.outer_integrand()?;
    let res = rough_integral(&cp)?;
    out.write("integral.csv", &res.integral.y().to_csv())?;
    let b_end = cp.reference().level_one_path().end().to_vec();
    let shift = if mode == LiftMode::Ito { horizon / 2.0 } else { 0.0 };
    let rows = (0..d).map(|j| {
        let got = res.value()[j * d + j];
        let want = 0.5 * b_end[j] * b_end[j] - shift;
        vec![(j + 1).to_string(), num(got), num(want), num(got - want)]
    });
    out.csv("diagonal.csv", &["coordinate", "integral", "closed_form", "difference"], rows)?;
    println!("rough-int ({mode:?}): int B dB = {:?}, cauchy gap {:.3e}", res.value(), res.cauchy_gap());
    out.finish("rough-int", &p, Some(seed))
}

pub fn solve_rde(common: &Common, p: &RdeParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let field_name = p.field.get_or_insert_with(|| "geometric".into()).clone();
    let sigma = builtin_field(&field_name)?;
    let (m, d) = (sigma.state_dim(), sigma.driver_dim());
    let y0 = p.y0.get_or_insert_with(|| vec![1.0; m]).clone();
    let grid = uniform_grid(*p.horizon.get_or_insert(1.0), *p.grid_n.get_or_insert(1024));
    let scheme: RdeScheme = parse(p.scheme.get_or_insert_with(|| "davie".into()).as_str())?;
    let driver = p.driver.get_or_insert_with(|| "brownian".into()).clone();
    let (x, seed) = match driver.as_str() {
        "brownian" => {
            let seed = require(p.seed, "seed")?;
            let mode: LiftMode = parse(p.mode.get_or_insert_with(|| "strat".into()).as_str())?;
            (brownian_lift_full(&grid, *p.refinement.get_or_insert(64), mode, seed, d, 0.45)?.rough, Some(seed))
        }
        "smooth" => (canonical_lift(&smooth_driver(grid, d)?, 2, 1.0)?, None),
        other => return Err(usage(format!("unknown driver {other:?}; expected brownian or smooth"))),
    };
    let sol = rde_solve(&sigma, &x, &y0, scheme, &PicardOptions::default())?;
    out.write("solution.csv", &sol.y().to_csv())?;
    out.write("driver.csv", &x.level_one_path().to_csv())?;
    if let Some(diag) = &sol.picard {
        let rows = diag.windows.iter().map(|w| {
            let ratio = w.ratios.iter().copied().fold(0.0, f64::max);
            vec![w.start.to_string(), w.end.to_string(), w.iterations.to_string(), num(w.residual), num(ratio)]
        });
        out.csv("picard_windows.csv", &["start", "end", "iterations", "residual", "max_ratio"], rows)?;
        for w in &diag.warnings {
            eprintln!("warning: {w}");
        }
    }
    println!("solve-rde ({field_name}, {scheme:?}): Y_T = {:?}", sol.terminal());
    out.finish("solve-rde", &p, seed)
}

pub fn linear_rde(common: &Common, p: &LinearRdeParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let depth = *p.depth.get_or_insert(10);
    let y0 = p.y0.get_or_insert_with(|| vec![1.0, 1.0]).clone();
    let m = y0.len();
    let (mats, commuting_diag) = match (&p.matrices, &p.diag) {
        (Some(mats), None) => (mats.clone(), None),
        (None, diag) => {
            let diag = diag.clone().unwrap_or_else(|| {
                let mut v: Vec<f64> = (0..m).map(|i| 0.5 - 0.3 * i as f64).collect();
                v.extend((0..m).map(|i| 0.2 + 0.2 * i as f64));
                v
            });
            if diag.len() != 2 * m {
                return Err(usage(format!("--diag needs {} entries (A_1 then A_2 diagonals)", 2 * m)));
            }
            let mats = (0..2)
                .map(|a| {
                    let mut mat = vec![0.0; m * m];
                    (0..m).for_each(|i| mat[i * m + i] = diag[a * m + i]);
                    mat
                })
                .collect();
            (mats, Some(diag))
        }
        (Some(_), Some(_)) => return Err(usage("give either diag or matrices, not both")),
    };
    let levels = *p.levels.get_or_insert(4);
    let n = *p.grid_n.get_or_insert(256);
    let base = canonical_lift(&arc(n)?.scale(0.5), 2, 1.0)?;
    let ext = lyons_extend(&base, depth.max(3), &ExtendOptions { refinement_levels: levels })?;
    let series = linear_rde_series(&mats, &ext.rough, &y0, depth, &ext.decay)?;
    out.write("series.csv", &series.path.to_csv())?;
    out.csv(
        "level_terms.csv",
        &["n", "term_norm"],
        series.level_terms.iter().enumerate().map(|(k, t)| vec![k.to_string(), num(*t)]),
    )?;
    let mut summary = json!({ "tail_bound": series.tail_bound, "terminal": series.path.end() });
    if let Some(diag) = commuting_diag {
        let xt = ext.rough.level_one_path().increment_idx(0, ext.rough.n_cells());
        let exact: Vec<f64> = (0..m).map(|i| y0[i] * (diag[i] * xt[0] + diag[m + i] * xt[1]).exp()).collect();
        let err = series.path.end().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        summary["exact"] = json!(exact);
        summary["max_error"] = json!(err);
        println!("linear-rde: M = {depth}, |Y_T - exp| = {err:.3e}, tail bound {:.3e}", series.tail_bound);
    } else {
        println!("linear-rde: M = {depth}, Y_T = {:?}, tail bound {:.3e}", series.path.end(), series.tail_bound);
    }
    out.json("summary.json", &summary)?;
    out.finish("linear-rde", &p, None)
}

pub fn wong_zakai(common: &Common, p: &WongZakaiParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = require(p.seed, "seed")?;
    let field_name = p.field.get_or_insert_with(|| "geometric".into()).clone();
    let sigma = builtin_field(&field_name)?;
    let y0 = vec![1.0; sigma.state_dim()];
    let def = WongZakaiConfig::default();
    let cfg = WongZakaiConfig {
        master_level: *p.master_level.get_or_insert(def.master_level),
        levels: (*p.min_level.get_or_insert(4)..=*p.max_level.get_or_insert(9)).collect(),
        refinement: *p.refinement.get_or_insert(def.refinement),
        alpha: *p.alpha.get_or_insert(def.alpha),
        horizon: def.horizon,
    };
    let n_seeds = *p.seeds.get_or_insert(32) as u64;
    let seeds: Vec<u64> = (0..n_seeds).map(|k| seed.wrapping_add(k)).collect();
    let runs = roughkit::rde::wong_zakai_ensemble(&sigma, &y0, &cfg, &seeds)?;
    let run_rows = runs.iter().flat_map(|r| {
        r.rows.iter().map(move |row| {
            vec![
                r.seed.to_string(),
                row.level.to_string(),
                num(row.sup_error),
                num(row.holder_error),
                num(row.terminal_error),
                num(row.rho),
            ]
        })
    });
    let header = ["seed", "level", "sup_error", "holder_error", "terminal_error", "rho"];
    out.csv("runs.csv", &header, run_rows)?;
    let summary = WongZakaiLevel::summarize(&runs);
    let rows = summary.iter().map(|l| {
        vec![
            l.level.to_string(),
            num(l.sup_error),
            num(l.holder_error),
            num(l.terminal_error),
            num(l.rho),
        ]
    });
    out.csv("wong_zakai.csv", &header[1..], rows)?;
    for l in &summary {
        println!("level {}: median holder error {:.6}, rho {:.6}", l.level, l.holder_error, l.rho);
    }
    out.finish("wong-zakai", &p, Some(seed))
}

pub fn rogers_scan(common: &Common, p: &RogersParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = *p.seed.get_or_insert(0);
    let n_seeds = *p.seeds.get_or_insert(64) as u64;
    let seeds: Vec<u64> = (0..n_seeds).map(|k| seed.wrapping_add(k)).collect();
    let r = scan(require(p.hurst, "hurst")?, *p.p.get_or_insert(2.0), *p.levels.get_or_insert(10), &seeds)?;
    let rows = r.levels.iter().zip(&r.medians).map(|(n, m)| {
        vec![n.to_string(), num(*m), num(m.log2()), num(r.slope)]
    });
    out.csv("rogers.csv", &["level", "median", "log2_median", "slope"], rows)?;
    println!("rogers-scan: H = {}, p = {}, slope = {:.6}", r.hurst, r.p, r.slope);
    out.finish("rogers-scan", &p, Some(seed))
}

pub fn lyons_demo(common: &Common, p: &LyonsParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = require(p.seed, "seed")?;
    let n_max = *p.n_max.get_or_insert(10_000);
    let terms = lyons_divergence_terms(n_max, seed)?;
    let sums = lyons_divergence_demo(n_max, seed)?;
    let rows = terms.iter().zip(&sums).enumerate().map(|(k, (t, s))| vec![(k + 1).to_string(), num(*t), num(*s)]);
    out.csv("lyons.csv", &["n", "term", "partial_sum"], rows)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        sums.iter().enumerate().skip(9).map(|(k, s)| (((k + 1) as f64).ln(), *s)).unzip();
    if xs.len() >= 2 {
        println!("lyons-demo: S_N = {:.6}, slope in ln N = {:.6} (1/pi = {:.6})", sums[n_max - 1], linear_fit(&xs, &ys).slope, 1.0 / PI);
    } else {
        println!("lyons-demo: S_N = {:.6}", sums[n_max - 1]);
    }
    out.finish("lyons-demo", &p, Some(seed))
}

pub fn neo_classical(common: &Common, p: &NeoParams) -> CliResult<()> {
    let (p, mut out) = start(common, p)?;
    let tuples: Vec<(f64, usize, f64, f64)> = match p.samples {
        Some(count) => {
            let seed = require(p.seed, "seed")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let alpha = 1.0 - rng.random::<f64>();
                    let n = rng.random_range(1..=30);
                    let s = 10f64.powf(rng.random_range(-3.0..2.0));
                    let t = 10f64.powf(rng.random_range(-3.0..2.0));
                    (alpha, n, s, t)
                })
                .collect()
        }
        None => vec![(require(p.alpha, "alpha")?, require(p.n, "n")?, require(p.s, "s")?, require(p.t, "t")?)],
    };
    let mut rows = Vec::with_capacity(tuples.len());
    let mut failures = 0;
    for (alpha, n, s, t) in tuples {
        let c = neo_classical_check(alpha, n, s, t)?;
        failures += usize::from(!c.holds);
        rows.push(vec![num(alpha), n.to_string(), num(s), num(t), num(c.lhs), num(c.rhs), c.holds.to_string()]);
    }
    let total = rows.len();
    out.csv("neo_classical.csv", &["alpha", "n", "s", "t", "lhs", "rhs", "holds"], rows)?;
    println!("neo-classical: {} of {total} tuples satisfy the inequality", total - failures);
    out.finish("neo-classical", &p, p.samples.and(p.seed))
}

/// `φ(b) = (sin(b_1 + b_2), cos(b_1 - b_2))`.
fn wave_map() -> SmoothMap {
    SmoothMap::new(2, 2, |b| vec![(b[0] + b[1]).sin(), (b[0] - b[1]).cos()]).with_derivative(|b| {
        let (c, s) = ((b[0] + b[1]).cos(), (b[0] - b[1]).sin());
        vec![c, c, -s, s]
    })
}

pub fn sewing_check(common: &Common, p: &SewingParams) -> CliResult<()> {
    let (mut p, mut out) = start(common, p)?;
    let seed = require(p.seed, "seed")?;
    let germ = p.germ.get_or_insert_with(|| "young".into()).clone();
    let n = *p.grid_n.get_or_insert(128);
    let report = match germ.as_str() {
        "young" => {
            // Ξ_{u,v} = f(u) δg_{u,v} for random trigonometric f, g, so that
            // δΞ = -δf δg has exponent 2
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coef: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let times = uniform_grid(1.0, n);
            let f = |t: f64| (1..=4).map(|k| coef[k - 1] * (k as f64 * PI * t).sin()).sum::<f64>();
            let g = |t: f64| (1..=4).map(|k| coef[k + 3] * (k as f64 * PI * t).cos()).sum::<f64>();
            let fv: Vec<f64> = times.iter().map(|&t| f(t)).collect();
            let gv: Vec<f64> = times.iter().map(|&t| g(t)).collect();
            let xi = FnGerm::new(&times, 1, |i, j, o: &mut [f64]| o[0] = fv[i] * (gv[j] - gv[i]));
            sewing_bound_check(&xi, 2.0, 0, n)?
        }
        "brownian" => {
            let alpha = *p.alpha.get_or_insert(0.45);
            let x = brownian_lift_full(&uniform_grid(1.0, n), *p.refinement.get_or_insert(64), LiftMode::Strat, seed, 2, alpha)?.rough;
            let cp = ControlledPath::identity(x, &[0.0, 0.0])?;
            let y = compose_smooth(&wave_map(), &cp, alpha)?.path.inner_integrand()?;
            rough_integral_bound(&y, alpha)?.sewing
        }
        other => return Err(usage(format!("unknown germ {other:?}; expected young or brownian"))),
    };
    let row = vec![
        num(report.lhs),
        num(report.rhs),
        num(report.constant),
        num(report.delta_norm.value),
        report.holds.to_string(),
    ];
    out.csv("sewing.csv", &["lhs", "rhs", "constant", "delta_norm", "holds"], [row])?;
    println!("sewing-check ({germ}): lhs {:.6e} <= rhs {:.6e}: {}", report.lhs, report.rhs, report.holds);
    out.finish("sewing-check", &p, Some(seed))
}
