use std::path::Path;

use homog::cell::{build_effective_table, CellOptions};
use homog::curvecut::{decompose_half, reassemble_half_time, PolyPath};
use homog::game::{anchor_point, conforming_transcript, trace_reduce, transcript_cost, Control, GameTranscript, Removal, StrategyParams};
use homog::hj_solver::{solve_oscillatory, InitialData, SolveOptions};
use homog::lab::{emit_report, run_rate_experiment, ExperimentConfig, RateStatus, ReportFormat};
use homog::metric::{metric_inequality_report, DiscreteActionMetric, DiscreteCell, InequalitySamples, MetricOptions, PeriodicGraphMetric};
use homog::model::{normalize_potential, HamiltonianModel, ModelLagrangian, PotentialField};
use homog::{Error, ExactScalar, Rational, Result};

use crate::options::{key, Key, Options};
use crate::svg::line_plot;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Options) -> Result<()>,
}

pub const COMMANDS: &[Command] = &[
    Command { name: "effh", about: "Tabulate the effective Hamiltonian on a covector grid", keys: EFFH, run: effh },
    Command { name: "solve", about: "Solve the oscillatory Cauchy problem", keys: SOLVE, run: solve },
    Command { name: "rate", about: "Measure the homogenization rate over an epsilon ladder", keys: RATE, run: rate },
    Command { name: "metric-report", about: "Inequality residuals of the discrete action metric", keys: METRIC, run: metric_report },
    Command { name: "stable-norm", about: "Stable norm and deviation sequence of a periodic metric", keys: STABLE, run: stable_norm },
    Command { name: "curvecut", about: "Half decomposition of a path by disjoint intervals", keys: CURVECUT, run: curvecut },
    Command { name: "reassemble", about: "Cut, shift and reassemble a minimizer into a half-time path", keys: REASSEMBLE, run: reassemble },
    Command { name: "game-demo", about: "Trace-back play of the double-well game and its cost certificate", keys: GAME, run: game_demo },
];

const EFFH: &[Key] = &[
    key("model", "quadratic", "quadratic, eikonal, double-well or truncated-eikonal"),
    key("potential", "cos1d", "potential or speed field, e.g. cos1d:2:-2, cos2d, bump, invcos, csv:FILE"),
    key("dim", "1", "space dimension, 1 or 2"),
    key("P", "2", "covector box radius"),
    key("steps", "16", "grid steps per axis across [-P, P]"),
    key("T", "50", "ergodic horizon"),
    key("cells", "", "cells per period (default 256 in 1D, 64 in 2D)"),
    key("tol", "0.01", "error estimate above which a node is flagged"),
    key("halving", "true", "add the extrapolated discretization error"),
    key("out", "effh.csv", "output CSV"),
];

const SOLVE: &[Key] = &[
    key("model", "quadratic", "Hamiltonian kind"),
    key("potential", "cos1d", "potential or speed field"),
    key("dim", "1", "space dimension"),
    key("eps", "1/16", "oscillation period 1/k"),
    key("g", "builtin:sin", "initial data: sin, cos, zero, constant:c, linear:p1[,p2]"),
    key("T", "1", "final time"),
    key("nx", "4096", "grid nodes per axis"),
    key("snapshots", "", "comma-separated snapshot times"),
    key("theta", "", "fixed viscosity"),
    key("out", "field.csv", "output CSV"),
    key("svg", "", "optional SVG of the 1D snapshots"),
];

const RATE: &[Key] = &[
    key("model", "", "Hamiltonian kind (quadratic)"),
    key("potential", "", "potential (cos1d)"),
    key("dim", "", "space dimension (1)"),
    key("initial", "", "initial data (sin)"),
    key("eps", "", "ladder of 1/k values (4, 8, 16, 32, 64)"),
    key("horizon", "", "final time (1)"),
    key("snapshots", "", "times compared against the effective solution (0.25, 0.5, 1)"),
    key("cells", "", "grid nodes per period (64)"),
    key("budget", "", "scheme error allowed relative to the measured error (0.1)"),
    key("route", "", "auto, pde or oc (auto)"),
    key("oc_cells", "", "lattice cells per period of the optimal-control route (8)"),
    key("oc_points", "", "evaluation points of the optimal-control route (16)"),
    key("table_steps", "", "covector steps of the discrete effective table (400)"),
    key("table_horizon", "", "ergodic horizon of the table (100)"),
    key("table_tol", "", "table tolerance (1e-4)"),
    key("csv", "", "rows as CSV"),
    key("svg", "", "log-log plot of the rows"),
    key("seed", "", "random seed (0)"),
];

const METRIC: &[Key] = &[
    key("model", "quadratic", "Hamiltonian kind"),
    key("potential", "cos2d", "potential"),
    key("dim", "2", "space dimension"),
    key("cells", "4", "lattice cells per unit length"),
    key("tau", "0.5", "time step"),
    key("stride", "3", "largest displacement per step, in cells"),
    key("t0", "4", "first ladder time"),
    key("ladder", "4", "number of doubling levels"),
    key("velocities", "0.25,0; 0.125,0.125; 0.5,0.25", "average velocities, separated by ';'"),
    key("shifts", "1,0; -1,2", "period translations, separated by ';'"),
    key("homogenized", "false", "also compare against the discrete homogenized metric"),
    key("out", "report.csv", "output CSV"),
];

const STABLE: &[Key] = &[
    key("a", "builtin:invcos", "speed field a(y) > 0"),
    key("dim", "2", "space dimension"),
    key("res", "8", "lattice nodes per unit length"),
    key("dir", "1,0", "integer direction"),
    key("lmax", "64", "largest lambda"),
    key("out", "dev.csv", "output CSV (lambda, distance, deviation)"),
    key("svg", "", "optional SVG of the deviations"),
];

const CURVECUT: &[Key] = &[
    key("demo", "random", "path family (random)"),
    key("m", "3", "dimension of the path"),
    key("seed", "7", "random seed"),
    key("vertices", "12", "vertices of the random path"),
    key("tol", "1e-10", "zero-finder tolerance"),
    key("out", "", "optional CSV of the path"),
];

const REASSEMBLE: &[Key] = &[
    key("model", "quadratic", "convex Hamiltonian kind"),
    key("potential", "cos2d", "potential"),
    key("dim", "2", "space dimension"),
    key("t", "16", "half-time horizon"),
    key("y", "8,0", "endpoint of the half-time path"),
    key("cells", "4", "lattice cells per unit length"),
    key("tau", "0.5", "time step"),
    key("stride", "3", "largest displacement per step, in cells"),
    key("tol", "1e-9", "zero-finder tolerance"),
    key("out", "reassemble.csv", "output CSV (path, s, coordinates)"),
    key("svg", "", "optional SVG of the first coordinate against time"),
];

const GAME: &[Key] = &[
    key("V", "builtin:cos1d:2", "potential"),
    key("dim", "1", "space dimension"),
    key("eps", "1/16", "oscillation period 1/k"),
    key("rounds", "400", "number of rounds"),
    key("seed", "3", "random seed"),
    key("p_one", "0.4", "probability that player II hands a round to player I"),
    key("grain", "8", "player II steps are multiples of 1/grain"),
    key("g", "builtin:sin", "terminal data"),
    key("out", "game", "prefix of the three output CSV files"),
];

fn model(o: &Options) -> Result<HamiltonianModel<f64>> {
    HamiltonianModel::from_spec(o.str("model")?, o.str("potential")?, o.parse("dim")?)
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn effh(o: &Options) -> Result<()> {
    let m = model(o)?;
    let mut cell = CellOptions::for_dim(m.dim());
    cell.horizon = o.parse("T")?;
    cell.tolerance = o.parse("tol")?;
    cell.halving = o.parse("halving")?;
    if let Some(c) = o.opt("cells")? {
        cell.cells = c;
    }
    let table = build_effective_table(&m, o.parse("P")?, o.parse("steps")?, &cell)?;
    let out = o.str("out")?;
    table.write_csv(out)?;
    println!("model {}: {} nodes, max error {:.3e}, flagged {}", m.id(), table.len(), table.max_error(), table.is_flagged());
    println!("wrote {out}");
    Ok(())
}

fn solve(o: &Options) -> Result<()> {
    let m = model(o)?;
    let g = InitialData::from_spec(o.str("g")?, m.dim())?;
    let opts = SolveOptions {
        theta: o.opt("theta")?,
        snapshot_times: if o.get("snapshots").is_some() { o.list("snapshots")? } else { Vec::new() },
        ..Default::default()
    };
    let k = o.eps_recip("eps")?;
    let f = solve_oscillatory(&m, k, &g, o.parse("T")?, o.parse("nx")?, &opts)?;
    let out = o.str("out")?;
    f.write_csv(out)?;
    let th = f.theta();
    println!("eps 1/{k}, nx {}, steps {}, dt {:.3e}, theta ({:.4}, {:.4})", f.nx(), f.steps(), f.dt(), th[0], th[1]);
    println!("wrote {out}");
    if let Some(svg) = o.get("svg") {
        if f.dim() != 1 {
            return Err(Error::invalid("snapshot plots are 1D only"));
        }
        let xs: Vec<f64> = f.nodes().iter().map(|x| x[0]).collect();
        let labels: Vec<String> = f.times().iter().map(|t| format!("t = {t}")).collect();
        let series: Vec<(&str, Vec<(f64, f64)>)> = (0..f.times().len())
            .map(|s| (labels[s].as_str(), xs.iter().copied().zip(f.snapshot(s).iter().copied()).collect()))
            .collect();
        line_plot(Path::new(svg), &format!("u, eps = 1/{k}"), "x", &series)?;
        println!("wrote {svg}");
    }
    Ok(())
}

fn rate(o: &Options) -> Result<()> {
    let cfg = ExperimentConfig::from_kv(o.kv())?;
    let rep = run_rate_experiment::<f64>(&cfg)?;
    println!("{:>10} {:>14} {:>14} {:>5}", "epsilon", "sup_error", "scheme_error", "pass");
    for r in &rep.rows {
        println!("{:>10} {:>14.6e} {:>14.6e} {:>5}", format!("1/{}", r.eps_recip), r.sup_error, r.scheme_error, r.pass);
    }
    match &rep.status {
        RateStatus::Fitted { slope, intercept, residual } => {
            println!("slope {slope:.4}, intercept {intercept:.4}, max log residual {residual:.4}")
        }
        RateStatus::Inconclusive { passing } => println!("inconclusive: {passing} rows within the budget"),
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
    if let Some(p) = &cfg.csv {
        emit_report(&rep, ReportFormat::Csv, p)?;
        println!("wrote {}", p.display());
    }
    if let Some(p) = &cfg.svg {
        for w in emit_report(&rep, ReportFormat::Svg, p)? {
            println!("wrote {}", w.display());
        }
    }
    Ok(())
}

fn metric_report(o: &Options) -> Result<()> {
    let m = model(o)?;
    let opts = MetricOptions { cells_per_unit: o.parse("cells")?, tau: o.parse("tau")?, max_stride: o.parse("stride")?, ..Default::default() };
    let metric = DiscreteActionMetric::new(&m, &opts)?;
    let t0: f64 = o.parse("t0")?;
    let levels: u32 = o.parse("ladder")?;
    let samples = InequalitySamples {
        ladder: (0..levels).map(|j| t0 * 2f64.powi(j as i32)).collect(),
        velocities: o.vectors("velocities")?,
        shifts: o.vectors("shifts")?,
    };
    let cell = DiscreteCell::new(&metric);
    let with_cell: bool = o.parse("homogenized")?;
    let rep = metric_inequality_report(&metric, with_cell.then_some(&cell), &samples)?;
    let out = o.str("out")?;
    rep.write_csv(out)?;
    println!("{}: subadditive {}, periodic {}, doubling bounded {}, superadditivity bounded {}", rep.metric, rep.subadditive_exact(), rep.periodic_exact(), rep.doubling_bounded(), rep.superadditivity_bounded());
    if let Some(d) = rep.deviation_bounded() {
        println!("deviation from the homogenized metric bounded {d}");
    }
    println!("{}", if rep.passes() { "PASS" } else { "FAIL" });
    println!("wrote {out}");
    Ok(())
}

fn stable_norm(o: &Options) -> Result<()> {
    let a = PotentialField::<f64>::from_spec(o.str("a")?, o.parse("dim")?)?;
    let g = PeriodicGraphMetric::new(&a, o.parse("res")?)?;
    let dir: Vec<i64> = o.list("dir")?;
    let lmax: usize = o.parse("lmax")?;
    let s = g.stable_norm_estimate(&dir, lmax)?;
    let out = Path::new(o.str("out")?);
    let mut w = writer(out)?;
    w.write_record(["lambda", "distance", "deviation"])?;
    for (j, (d, dev)) in s.distances.iter().zip(&s.deviations).enumerate() {
        w.write_record([(j + 1).to_string(), d.to_string(), dev.to_string()])?;
    }
    finish(w, out)?;
    println!("estimate {:.6}, max |deviation| up to {}: {:.4}, up to {lmax}: {:.4}", s.estimate, lmax / 2, s.max_deviation(lmax / 2), s.max_deviation(lmax));
    println!("wrote {}", out.display());
    if let Some(svg) = o.get("svg") {
        let pts = s.deviations.iter().enumerate().map(|(j, &d)| ((j + 1) as f64, d)).collect();
        line_plot(Path::new(svg), "deviation d(0, lambda x) - lambda |x|", "lambda", &[("deviation", pts)])?;
        println!("wrote {svg}");
    }
    Ok(())
}

fn curvecut(o: &Options) -> Result<()> {
    let demo = o.str("demo")?;
    if demo != "random" {
        return Err(Error::invalid(format!("unknown demo `{demo}` (random)")));
    }
    let path = PolyPath::<f64>::random(o.parse("m")?, o.parse("vertices")?, o.parse("seed")?)?;
    let d = decompose_half(&path, o.parse("tol")?)?;
    println!("{} interval(s), at most {} allowed", d.len(), homog::curvecut::IntervalDecomposition::<f64>::max_intervals(path.dim()));
    for iv in &d.intervals {
        println!("[{:.9}, {:.9}]", iv[0], iv[1]);
    }
    println!("residual {:.3e}", d.residual_norm());
    if let Some(out) = o.get("out") {
        path.write_csv(out)?;
        println!("wrote {out}");
    }
    Ok(())
}

fn reassemble(o: &Options) -> Result<()> {
    let m = model(o)?;
    let dim = m.dim();
    let opts = MetricOptions { cells_per_unit: o.parse("cells")?, tau: o.parse("tau")?, max_stride: o.parse("stride")?, ..Default::default() };
    let metric = DiscreteActionMetric::new(&m, &opts)?;
    let t: f64 = o.parse("t")?;
    let y: Vec<f64> = o.list("y")?;
    if y.len() != dim {
        return Err(Error::invalid(format!("y needs {dim} coordinates")));
    }
    let y2: Vec<f64> = y.iter().map(|c| 2.0 * c).collect();
    let path = metric.minimizer(metric.to_steps(2.0 * t)?, [0, 0], metric.to_lattice(&y2)?)?;
    let gamma = PolyPath::from_lattice(&path.nodes, dim, metric.h(), metric.tau())?;
    let speed = gamma.max_speed().max(1.0) * 8.0;
    let l = ModelLagrangian::new(&m, speed, None, None);
    let r = reassemble_half_time(&gamma, |y: &[f64], q: &[f64]| l.eval(y, q), o.parse("tol")?)?;
    let out = Path::new(o.str("out")?);
    let mut w = writer(out)?;
    let mut header = vec!["path".to_string(), "s".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (name, p) in [("gamma", &gamma), ("eta", &r.eta)] {
        for (s, v) in p.breaks().iter().zip(p.vertices()) {
            let mut rec = vec![name.to_string(), s.to_string()];
            rec.extend(v.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
    }
    finish(w, out)?;
    match &r.decomposition {
        Some(d) => println!("{} interval(s), residual {:.3e}, cheap unit interval {:?}", d.len(), d.residual_norm(), r.cheap_interval),
        None => println!("direct connector"),
    }
    println!("action gamma {:.6}, action eta {:.6}, C_meas {:.6}, max connector speed {:.4}", r.action_gamma, r.action_eta, r.c_meas, r.max_connector_speed());
    println!("wrote {}", out.display());
    if let Some(svg) = o.get("svg") {
        let series = |p: &PolyPath<f64>| p.breaks().iter().zip(p.vertices()).map(|(s, v)| (*s, v[0])).collect();
        line_plot(Path::new(svg), "first coordinate", "s", &[("gamma", series(&gamma)), ("eta", series(&r.eta))])?;
        println!("wrote {svg}");
    }
    Ok(())
}

fn game_demo(o: &Options) -> Result<()> {
    let dim: usize = o.parse("dim")?;
    let raw = PotentialField::<f64>::from_spec(o.str("V")?, dim)?;
    let norm = normalize_potential(&raw);
    let k = o.eps_recip("eps")?;
    let one = Rational::from_f64_exact(1.0).expect("finite");
    let delta = one / Rational::from_f64_exact(32.0 * k as f64).expect("finite");
    let anchor = anchor_point::<Rational>(&norm.field, k);
    let params = StrategyParams { rounds: o.parse("rounds")?, p_one: o.parse("p_one")?, grain: o.parse("grain")?, seed: o.parse("seed")? };
    let g = InitialData::from_spec(o.str("g")?, dim)?;
    let t = conforming_transcript(&norm.field, k, delta, anchor.clone(), &params)?;
    let red = trace_reduce(&t, &anchor, &g, norm.subtracted)?;
    let prefix = o.str("out")?;
    let original = format!("{prefix}_original.csv");
    let reduced = format!("{prefix}_reduced.csv");
    let certificate = format!("{prefix}_certificate.csv");
    write_transcript(Path::new(&original), &t, &(0..t.rounds().len()).collect::<Vec<_>>())?;
    write_transcript(Path::new(&reduced), &red.reduced, &red.kept)?;
    let path = Path::new(&certificate);
    let mut w = writer(path)?;
    w.write_record(["item", "kind", "rounds", "cost", "cost_f64"])?;
    for (j, r) in red.certificate.removals.iter().enumerate() {
        let (kind, rounds) = match r {
            Removal::StayPut { round, .. } => ("stay-put", round.to_string()),
            Removal::MirroredPair { forward, back, .. } => ("mirrored-pair", format!("{forward};{back}")),
        };
        w.write_record([j.to_string(), kind.into(), rounds, r.cost().to_string(), r.cost().to_f64_approx().to_string()])?;
    }
    let c = &red.certificate;
    for (name, v) in [("original", c.original_cost.clone()), ("reduced", c.reduced_cost.clone()), ("removed", c.removed_total()), ("balance", c.balance())] {
        w.write_record(["total".into(), name.into(), String::new(), v.to_string(), v.to_f64_approx().to_string()])?;
    }
    finish(w, path)?;
    println!(
        "potential normalized by {}; anchor {:?}; {} rounds kept of {}",
        norm.subtracted,
        anchor.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        red.kept.len(),
        t.rounds().len()
    );
    println!(
        "cost original {:.6} >= reduced {:.6}; {} removals, all nonnegative {}; balance {}",
        c.original_cost.to_f64_approx(),
        c.reduced_cost.to_f64_approx(),
        c.removals.len(),
        c.all_nonnegative(),
        c.balance()
    );
    println!("certificate {}", if c.holds() { "holds" } else { "FAILS" });
    println!("wrote {original}, {reduced}, {certificate}");
    Ok(())
}

fn write_transcript(path: &Path, t: &GameTranscript<Rational>, index: &[usize]) -> Result<()> {
    let g = InitialData::constant(t.dim(), 0.0);
    let mut w = writer(path)?;
    let dim = t.dim();
    let mut header = vec!["round".to_string(), "player".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend((1..=dim).map(|i| format!("v{i}")));
    header.push("cost".into());
    w.write_record(&header)?;
    let states = t.states();
    for (j, (r, c)) in t.rounds().iter().zip(t.round_costs()).enumerate() {
        let mut rec = vec![index[j].to_string(), if r.control == Control::One { "1" } else { "2" }.to_string()];
        rec.extend(states[j].iter().map(|x| x.to_string()));
        rec.extend(r.velocity().iter().map(|x| x.to_string()));
        rec.push(c.to_string());
        w.write_record(&rec)?;
    }
    let end = t.end();
    let mut rec = vec!["end".to_string(), String::new()];
    rec.extend(end.iter().map(|x| x.to_string()));
    rec.extend((0..dim).map(|_| String::new()));
    rec.push(transcript_cost(t, &g).to_string());
    w.write_record(&rec)?;
    finish(w, path)
}
