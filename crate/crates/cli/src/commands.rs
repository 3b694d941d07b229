//! Subcommand bodies. Each reads its settings, runs the library and writes
//! CSV files into the output directory; short summaries go to stdout.

use crate::config::{config_error, Settings};
use crate::render::{render_boundary, render_tiling, Style};
use anyhow::{bail, Context as _, Result};
use dimerflow::analysis::{
    discrepancy_report, erosion_scaling, fk_csv, fk_sums, fluctuation_moments, mixing_scaling, pyramid_drift_report,
    pyramid_erosion, variance_profile, volume_trace, DriftReport, ExactChain, FluctuationConfig, FluctuationSource,
};
use dimerflow::beads::Surface;
use dimerflow::dynamics::{run, Band, ChainState, DynamicsKind};
use dimerflow::exact::{
    asymptotic_kinv, build_torus_kasteleyn, characteristic_zeros, count_matchings, edge_probabilities, exact_sample,
    kasteleyn_count, kinv_integral, weights_for_slope, TorusEdge,
};
use dimerflow::lattice::{build_lattice, carve_domain, carve_free, Window};
use dimerflow::matching::{
    extremal_heights, flatten_to_plane, heights, heights_csv, matching_of, parse_matching, pyramid, write_matching,
};
use dimerflow::{Error, FiniteDomain, LatticeKind, Matching, Region};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub struct Context {
    pub out: PathBuf,
    pub jobs: usize,
}

impl Context {
    fn write(&self, name: &str, body: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn dispatch(name: &str, s: &mut Settings, ctx: &Context) -> Result<()> {
    match name {
        "count" => count(s, ctx),
        "sample" => sample(s, ctx),
        "mixtime" => mixtime(s, ctx),
        "drift" => drift(s, ctx),
        "kinv" => kinv(s, ctx),
        "fluctuations" => fluctuations(s, ctx),
        "erosion" => erosion(s, ctx),
        "fksums" => fksums(s, ctx),
        "render" => render(s, ctx),
        _ => unreachable!("clap only yields known subcommands"),
    }
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    match s {
        "square" => Ok(Region::Square),
        "disk" => Ok(Region::Disk),
        _ => {
            let body = s
                .strip_prefix("polygon:")
                .ok_or_else(|| "expected square, disk or polygon:x,y;x,y;...".to_string())?;
            let vs = body
                .split(';')
                .map(|p| {
                    let (x, y) = p.split_once(',').ok_or("vertex needs x,y")?;
                    Ok((
                        x.trim().parse().map_err(|e| format!("{e}"))?,
                        y.trim().parse().map_err(|e| format!("{e}"))?,
                    ))
                })
                .collect::<std::result::Result<Vec<(i64, i64)>, String>>()?;
            if vs.len() < 3 {
                return Err("polygon needs at least three vertices".into());
            }
            Ok(Region::Polygon(vs))
        }
    }
}

fn dynamics(s: &mut Settings, default: &str) -> Result<DynamicsKind> {
    Ok(s.or("dynamics", default.to_string())?
        .parse::<DynamicsKind>()
        .map_err(|e| config_error("dynamics", e.to_string()))?)
}

fn lattice(s: &mut Settings, default: Option<&str>) -> Result<LatticeKind> {
    let name: String = match default {
        Some(d) => s.or("lattice", d.to_string())?,
        None => s.req("lattice")?,
    };
    Ok(name.parse::<LatticeKind>().map_err(|e| config_error("lattice", e.to_string()))?)
}

struct Resolved {
    domain: FiniteDomain,
    /// Set for pyramid domains: the maximal state `p`.
    pyramid: Option<Matching>,
}

fn domain(s: &mut Settings) -> Result<Resolved> {
    let kind = lattice(s, None)?;
    let l: u32 = s.req("L")?;
    if l == 0 {
        return Err(config_error("L", "must be positive").into());
    }
    if s.flag("pyramid")? {
        let p = pyramid(kind, l);
        return Ok(Resolved {
            domain: p.domain,
            pyramid: Some(p.matching),
        });
    }
    let region = region(s)?;
    let spec = build_lattice(kind);
    let domain = match flat_slope(s)? {
        None => carve_free(&spec, &region, l)?,
        Some(slope) => carve_domain(&spec, &region, l, &flatten_to_plane(kind, slope, l)?)?,
    };
    Ok(Resolved { domain, pyramid: None })
}

fn region(s: &mut Settings) -> Result<Region> {
    let name: String = s.or("region", "square".to_string())?;
    Ok(parse_region(&name).map_err(|e| config_error("region", e))?)
}

/// `None` for a free boundary, the slope for `flat:sx,sy`.
fn flat_slope(s: &mut Settings) -> Result<Option<(f64, f64)>> {
    let boundary: String = s.or("boundary", "free".to_string())?;
    if boundary == "free" {
        return Ok(None);
    }
    let Some(slope) = boundary.strip_prefix("flat:") else {
        return Err(config_error("boundary", "expected free or flat:sx,sy").into());
    };
    let v: Vec<f64> = slope
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| config_error("boundary", e.to_string()))?;
    match v[..] {
        [sx, sy] => Ok(Some((sx, sy))),
        _ => Err(config_error("boundary", "flat needs two slopes").into()),
    }
}

/// What lies around a region too small to hold a face: the plane matching
/// for a flat boundary, nothing for a free one.
fn bare_boundary(s: &mut Settings) -> Result<Matching> {
    let kind = lattice(s, None)?;
    let l: u32 = s.req("L")?;
    let region = region(s)?;
    Ok(match flat_slope(s)? {
        Some(slope) => flatten_to_plane(kind, slope, l)?,
        None => {
            let spec = build_lattice(kind);
            let (lo, hi) = region.bounding_box(&spec, l);
            Matching::empty(Arc::new(Window::covering(&spec, lo, hi, 1)))
        }
    })
}

fn band(s: &mut Settings, d: &FiniteDomain) -> Result<Option<Band>> {
    Ok(s.get::<u32>("floor_ceiling")?.map(|h| Band::around_boundary(d, h)))
}

fn count(s: &mut Settings, ctx: &Context) -> Result<()> {
    let r = domain(s)?;
    let method: String = s.or("method", "kasteleyn".to_string())?;
    let n = match method.as_str() {
        "kasteleyn" => kasteleyn_count(&r.domain)?.to_string(),
        "enumerate" => count_matchings(&r.domain)?.to_string(),
        "both" => {
            let k = kasteleyn_count(&r.domain)?.to_string();
            let e = count_matchings(&r.domain)?.to_string();
            if k != e {
                bail!("determinant gives {k} but enumeration finds {e}");
            }
            k
        }
        _ => return Err(config_error("method", "expected kasteleyn, enumerate or both").into()),
    };
    println!("{n}");
    ctx.write("count.csv", &format!("count\n{n}\n"))
}

/// The state named by `start`: extremal heights (inside the band when one
/// is given) or the boundary matching.
fn start_state(which: &str, d: &FiniteDomain, band: Option<&Band>, field: &str) -> Result<Matching> {
    let (lo, hi) = extremal_heights(d)?;
    let pick = |mut h: dimerflow::HeightField, cap: Option<&Vec<i64>>| -> Result<Matching> {
        if let Some(c) = cap {
            h.values = c.clone();
        }
        Ok(matching_of(&h, d)?)
    };
    match which {
        "max" => pick(hi, band.map(|b| &b.ceiling)),
        "min" => pick(lo, band.map(|b| &b.floor)),
        "boundary" => Ok(d.boundary().clone()),
        _ => Err(config_error(field, "expected max, min or boundary").into()),
    }
}

fn sample(s: &mut Settings, ctx: &Context) -> Result<()> {
    let r = domain(s)?;
    let d = &r.domain;
    let seed: u64 = s.or("seed", 0)?;
    let which: String = s.or("dynamics", "exact".to_string())?;
    let dump_beads = s.flag("dump_beads")?;
    let f0 = d.reference_face();
    let m = if which == "exact" {
        exact_sample(d, &mut ChaCha8Rng::seed_from_u64(seed))?
    } else {
        let kind = which
            .parse::<DynamicsKind>()
            .map_err(|e| config_error("dynamics", e.to_string()))?;
        let horizon: f64 = s.or("horizon", 10.0)?;
        if horizon.is_nan() || horizon < 0.0 {
            return Err(config_error("horizon", "must be nonnegative").into());
        }
        let band = band(s, d)?;
        let start: String = s.or("start", "max".to_string())?;
        let checkpoints: usize = s.or("checkpoints", 0)?;
        let init = start_state(&start, d, band.as_ref(), "start")?;
        let mut state = ChainState::new(init, d, seed)?;
        for c in 1..=checkpoints {
            let t = horizon * c as f64 / checkpoints as f64;
            state = run(state, kind, t, d, band.as_ref())?;
            ctx.write(&format!("sample_{c:04}.matching"), &write_matching(&state.surface.matching, f0))?;
        }
        run(state, kind, horizon, d, band.as_ref())?.surface.matching
    };
    let h = heights(&m, d)?;
    let (lo, _) = extremal_heights(d)?;
    let above: i64 = h.values.iter().zip(&lo.values).map(|(a, b)| a - b).sum();
    ctx.write("sample.matching", &write_matching(&m, f0))?;
    ctx.write("sample_heights.csv", &heights_csv(&h))?;
    if dump_beads {
        ctx.write("beads.csv", &Surface::new(m.clone(), d)?.beads.to_csv())?;
    }
    println!(
        "{} dimers, {} interior faces, volume above h_min {above}",
        m.occupied_edges().count(),
        d.interior_faces().len()
    );
    Ok(())
}

fn mixtime(s: &mut Settings, ctx: &Context) -> Result<()> {
    let mode: String = s.or("mode", "scaling".to_string())?;
    let kind = dynamics(s, "sync")?;
    let seed: u64 = s.or("seed", 0)?;
    let max_events: u64 = s.or("max_events", 50_000_000)?;
    match mode.as_str() {
        "scaling" => {
            let lattice = lattice(s, None)?;
            let ls: Vec<u32> = s.list("Ls", "8,16,32")?;
            let h: Option<u32> = s.get("floor_ceiling")?;
            let replicas: usize = s.or("seeds", 50)?;
            let r = mixing_scaling(lattice, kind, &ls, h, replicas, seed, max_events, ctx.jobs)?;
            ctx.write("mixtime.csv", &r.to_csv())?;
            print!("{}", r.to_csv());
            println!(
                "slope {:.4} (95% bootstrap {:.4} to {:.4}); coalescence time bounds the TV mixing time from above",
                r.fit.slope, r.slope_ci.0, r.slope_ci.1
            );
        }
        "tv" => {
            let r = domain(s)?;
            let band = band(s, &r.domain)?;
            let chain = ExactChain::new(&r.domain, kind, band.as_ref())?;
            let t_mix = chain.mixing_time();
            let times: Vec<f64> = match s.get::<String>("times")? {
                Some(_) => s.list("times", "")?,
                None => (0..=30).map(|i| 3.0 * t_mix * i as f64 / 30.0).collect(),
            };
            let mut out = String::from("time,tv\n");
            let mut trunc = 0.0f64;
            for &t in &times {
                let (tv, e) = chain.tv(t);
                trunc = trunc.max(e);
                writeln!(out, "{t},{tv}")?;
            }
            ctx.write("tv.csv", &out)?;
            println!(
                "states {}, TV(0) = {}, t_mix {t_mix:.4}, truncation {trunc:.2e}",
                chain.len(),
                chain.initial_tv()
            );
        }
        "trace" => {
            let r = domain(s)?;
            let band = band(s, &r.domain)?;
            let every: u64 = s.or("every", 1)?;
            let t = volume_trace(&r.domain, kind, band, seed, every, max_events)?;
            ctx.write("trace.csv", &t.to_csv())?;
            let last = t.points.last().copied().unwrap_or((0.0, 0));
            println!(
                "{} after time {:.4} (volume {})",
                if t.coalesced { "coalesced" } else { "not coalesced" },
                last.0,
                last.1
            );
        }
        _ => return Err(config_error("mode", "expected scaling, tv or trace").into()),
    }
    Ok(())
}

fn drift(s: &mut Settings, ctx: &Context) -> Result<()> {
    let kind = dynamics(s, "sync")?;
    let samples: usize = s.or("samples", 10)?;
    let seed: u64 = s.or("seed", 0)?;
    let report = if s.flag("pyramid")? {
        let lattice = lattice(s, None)?;
        let l: u32 = s.req("L")?;
        pyramid_drift_report(lattice, l, kind, samples, seed)?
    } else {
        let r = domain(s)?;
        let d = &r.domain;
        let band = band(s, d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cases = Vec::new();
        for _ in 0..samples.max(1) {
            let m = exact_sample(d, &mut rng)?;
            let st = Surface::new(m, d)?;
            if let Some(b) = &band {
                if b.check(&st.heights).is_err() {
                    continue;
                }
            }
            cases.extend(discrepancy_report(&st, d, kind, band.as_ref())?.cases);
        }
        DriftReport { kind, cases }
    };
    let csv = report.to_csv();
    ctx.write("drift.csv", &csv)?;
    print!("{csv}");
    println!(
        "{} cases, all drifts <= 0: {}, nonzero drifts only within depth {}",
        report.cases.len(),
        report.all_nonpositive(),
        report.zero_radius()
    );
    Ok(())
}

/// `fd:dx:dy`.
struct EdgeSpec(TorusEdge);

impl FromStr for EdgeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [e, x, y] = parts[..] else {
            return Err("expected fd:dx:dy".into());
        };
        let n = |p: &str| p.trim().parse::<i64>().map_err(|e| e.to_string());
        Ok(EdgeSpec(TorusEdge {
            fd_edge: n(e)? as usize,
            translation: (n(x)?, n(y)?),
        }))
    }
}

fn kinv(s: &mut Settings, ctx: &Context) -> Result<()> {
    let lattice = lattice(s, None)?;
    let grid_n: usize = s.or("grid_n", 128)?;
    let tk = match s.get::<String>("slope")? {
        Some(_) => {
            let target = s.pair("slope", (0.0, 0.0))?;
            weights_for_slope(lattice, target, 1e-8, grid_n)?
        }
        None => build_torus_kasteleyn(lattice, s.pair("weights", (1.0, 1.0))?)?,
    };
    if s.get::<String>("edges")?.is_some() {
        let edges: Vec<EdgeSpec> = s.list("edges", "")?;
        let edges: Vec<TorusEdge> = edges.into_iter().map(|e| e.0).collect();
        for e in &edges {
            if e.fd_edge >= tk.edges.len() {
                return Err(config_error("edges", format!("fundamental domain has {} edges", tk.edges.len())).into());
            }
        }
        let (p, err) = edge_probabilities(&tk, &edges, grid_n)?;
        println!("{p:.12} ± {err:.1e}");
        return ctx.write("kinv.csv", &format!("probability,error\n{p},{err}\n"));
    }
    let (b, w): (usize, usize) = (s.or("b", 0)?, s.or("w", 0)?);
    let (x, y): (i64, i64) = (s.or("x", 0)?, s.or("y", 0)?);
    let n = tk.size();
    if b >= n || w >= n {
        return Err(config_error(if b >= n { "b" } else { "w" }, format!("fundamental domain has {n} vertices of each colour")).into());
    }
    let k = kinv_integral(&tk, b, w, x, y, grid_n)?;
    let lead = characteristic_zeros(&tk).map(|sd| asymptotic_kinv(&sd, b, w, x, y)).ok();
    println!("{:.12} {:+.12}i ± {:.1e}", k.value.re, k.value.im, k.error);
    if let Some(a) = lead {
        println!("leading asymptotic term {a:.12}");
    }
    let lead = lead.map_or(String::new(), |a| a.to_string());
    ctx.write(
        "kinv.csv",
        &format!("b,w,x,y,re,im,error,asymptotic\n{b},{w},{x},{y},{},{},{},{lead}\n", k.value.re, k.value.im, k.error),
    )
}

fn fluctuations(s: &mut Settings, ctx: &Context) -> Result<()> {
    let lattice = lattice(s, Some("hexagon"))?;
    let distance: u32 = s.or("distance", 32)?;
    let mut cfg = FluctuationConfig::new(lattice, distance, s.or("samples", 1000)?);
    cfg.weights = s.pair("weights", cfg.weights)?;
    let source: String = s.or("source", "exact".to_string())?;
    cfg.source = source
        .parse::<FluctuationSource>()
        .map_err(|e| config_error("source", e.to_string()))?;
    cfg.seed = s.or("seed", 0)?;
    cfg.max_order = s.or("max_order", cfg.max_order)?;
    cfg.tol = s.get("tol")?;
    cfg.grid_n = s.or("grid_n", cfg.grid_n)?;
    cfg.window = s.or("window", cfg.window)?;
    if s.get::<String>("profile")?.is_some() {
        let ds: Vec<u32> = s.list("profile", "")?;
        let (rows, fit) = variance_profile(lattice, cfg.weights, &ds, cfg.grid_n)?;
        let mut out = String::from("distance,variance\n");
        for (d, v) in &rows {
            writeln!(out, "{d},{v}")?;
        }
        ctx.write("fluctuations_profile.csv", &out)?;
        println!("variance slope against ln d: {:.5}", fit.slope);
    }
    let m = fluctuation_moments(&cfg)?;
    ctx.write("fluctuations.csv", &m.to_csv())?;
    print!("{}", m.to_csv());
    println!("mean {:.5}, variance {:.5}, {} samples", m.mean, m.variance, m.samples);
    Ok(())
}

fn erosion(s: &mut Settings, ctx: &Context) -> Result<()> {
    let lattice = lattice(s, None)?;
    let horizon: f64 = s.or("horizon", 2.0)?;
    let seed: u64 = s.or("seed", 0)?;
    if s.get::<String>("Ls")?.is_some() {
        let ls: Vec<u32> = s.list("Ls", "")?;
        let seeds: usize = s.or("seeds", 40)?;
        let fit = erosion_scaling(lattice, &ls, horizon, seeds, seed, ctx.jobs)?;
        let mut out = String::from("L,mean_rate\n");
        for (l, r) in &fit.points {
            writeln!(out, "{l},{r}")?;
        }
        ctx.write("erosion_scaling.csv", &out)?;
        print!("{out}");
        println!("log-log slope {:.4}", fit.slope);
        return Ok(());
    }
    let l: u32 = s.or("L", 16)?;
    let checkpoints: usize = s.or("checkpoints", 20)?;
    let e = pyramid_erosion(lattice, l, horizon, checkpoints, seed)?;
    ctx.write("erosion.csv", &e.to_csv())?;
    println!("initial rate {} (exact), fitted rate {:.4}", e.initial_rate, e.rate);
    Ok(())
}

fn fksums(s: &mut Settings, ctx: &Context) -> Result<()> {
    let k: u32 = s.or("k", 5)?;
    let ls: Vec<u32> = s.list("Ls", "25,50,100,200")?;
    let rows = fk_sums(k, &ls)?;
    let csv = fk_csv(&rows);
    ctx.write("fksums.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

fn render(s: &mut Settings, ctx: &Context) -> Result<()> {
    let scale: f64 = s.or("scale", 24.0)?;
    let shade = s.flag("heights")?;
    let (m, d) = match s.get::<String>("input")? {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| config_error("input", format!("{path}: {e}")))?;
            (parse_matching(&text)?.0, None)
        }
        None => match domain(s) {
            Err(e) if matches!(e.downcast_ref(), Some(Error::EmptyDomain)) => (bare_boundary(s)?, None),
            Err(e) => return Err(e),
            Ok(r) => {
                let default = if r.pyramid.is_some() { "boundary" } else { "exact" };
                let which: String = s.or("state", default.to_string())?;
                let m = match which.as_str() {
                    "exact" => exact_sample(&r.domain, &mut ChaCha8Rng::seed_from_u64(s.or("seed", 0)?))?,
                    other => match &r.pyramid {
                        Some(p) if other == "boundary" => p.clone(),
                        _ => start_state(other, &r.domain, None, "state")?,
                    },
                };
                (m, Some(r.domain))
            }
        },
    };
    // with no domain at all every tile is boundary
    let empty = d.is_none() && s.get::<String>("input")?.is_none();
    let heights = if shade {
        match &d {
            Some(d) => Some(heights(&m, d)?.values),
            None if m.occupied_edges().next().is_none() => None,
            None => Some(raw_heights_of(&m)?),
        }
    } else {
        None
    };
    let style = Style { heights, scale };
    let svg = if empty { render_boundary(&m, &style) } else { render_tiling(&m, d.as_ref(), &style) };
    ctx.write("render.svg", &svg)?;
    println!("{} dimers rendered", m.occupied_edges().count());
    Ok(())
}

/// Heights of a free-standing matching against the reference matching of
/// its window.
fn raw_heights_of(m: &Matching) -> Result<Vec<i64>> {
    let w = m.window();
    let reference = dimerflow::matching::reference_occupancy(w);
    Ok(dimerflow::matching::raw_heights(w, m.occupancy(), &reference, 0)?)
}
