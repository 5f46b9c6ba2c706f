use std::sync::Arc;

use martin_core::apartment::{ApartmentPoint, CoreSpec, Schedule};
use martin_core::boundary::{furstenberg_limit, nu_shadow, nu_y_shadow, Stabilization};
use martin_core::hecke::{to_coords, HeckeContext};
use martin_core::spherical::Estimate;
use martin_core::walks::{bc_distinguished, bc_drift_diagnostic, limit_kernel_bottom, make_walk, GreenOptions, WalkContext, WalkOptions};
use martin_core::{RootDatum, RootType, Vector, Q};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::emit::{coords, decimal, float, rational, Table, EXACT};
use crate::CliError;

/// Result of one task: the CSV table plus manifest material.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    /// Exact values as `{"num", "den"}` records, for tasks that produce them.
    pub exact: Vec<Value>,
    /// Task-specific manifest entries (spectral radius, walk constants, ...).
    pub extra: Value,
    /// Largest error estimate over the rows; `None` when every row is exact.
    pub max_err: Option<f64>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, exact: Vec::new(), extra: json!({}), max_err: None }
    }

    fn note_err(&mut self, e: f64) {
        self.max_err = Some(self.max_err.map_or(e, |m| m.max(e)));
    }
}

fn compute<T>(r: martin_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Compute(e.to_string()))
}

fn invalid<T>(r: martin_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

pub fn datum(cfg: &RunConfig) -> Result<RootDatum, CliError> {
    let kind: RootType = invalid(cfg.datum.kind.parse())?;
    invalid(RootDatum::build(kind, cfg.datum.rank, &cfg.datum.q))
}

fn point(d: &RootDatum, c: &[i64], what: &str) -> Result<Vector, CliError> {
    if c.len() != d.rank {
        return Err(CliError::Config(format!("{} {:?} needs {} coordinates", what, c, d.rank)));
    }
    Ok(d.from_coweight_ints(c))
}

fn dominant(d: &RootDatum, c: &[i64], what: &str) -> Result<Vector, CliError> {
    let v = point(d, c, what)?;
    if !d.is_dominant(&v) {
        return Err(CliError::Config(format!("{} {:?} is not dominant", what, c)));
    }
    Ok(v)
}

fn required<'a>(list: &'a [Vec<i64>], name: &str) -> Result<&'a [Vec<i64>], CliError> {
    if list.is_empty() {
        return Err(CliError::Config(format!("params.{} is required for this task", name)));
    }
    Ok(list)
}

fn hecke(d: &RootDatum, cfg: &RunConfig) -> Arc<HeckeContext> {
    Arc::new(HeckeContext::from_datum(d, cfg.seed))
}

fn walk_context(d: &RootDatum, cfg: &RunConfig) -> Result<WalkContext, CliError> {
    let w = cfg.walk.as_ref().ok_or_else(|| CliError::Config("a [walk] table is required for this task".into()))?;
    let mut weights = Vec::with_capacity(w.generators.len());
    for g in &w.generators {
        weights.push((dominant(d, &g.lambda, "generator")?, g.weight.to_big()?));
    }
    let walk = invalid(make_walk(d, &weights, WalkOptions { lazy: w.lazy, eps: false }))?;
    compute(WalkContext::new(hecke(d, cfg), walk))
}

fn spec(d: &RootDatum, cfg: &RunConfig) -> Result<CoreSpec, CliError> {
    let s = cfg.spec.as_ref().ok_or_else(|| CliError::Config("a [spec] table is required for this task".into()))?;
    let schedule = match s.schedule.as_str() {
        "linear" => Schedule::Linear,
        "pow2" => Schedule::Pow2,
        other => return Err(CliError::Config(format!("unknown schedule `{}`", other))),
    };
    let c: Vec<Q> = s
        .c
        .iter()
        .map(|v| {
            let b = v.to_big()?;
            match (b.numer().to_i64(), b.denom().to_i64()) {
                (Some(n), Some(m)) => Ok(Q::new(n, m)),
                _ => Err(CliError::Config("c value out of range".into())),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut out = invalid(CoreSpec::new(d, &s.word, &s.j, &c, schedule))?;
    if let Some(u) = &s.u {
        out = invalid(out.with_direction(d, point(d, u, "u")?))?;
    }
    Ok(out)
}

fn zeta(cfg: &RunConfig, rho: f64) -> Result<f64, CliError> {
    let z = match (cfg.params.zeta, cfg.params.zeta_ratio) {
        (Some(z), None) => z,
        (None, Some(r)) => r * rho,
        (None, None) => return Err(CliError::Config("params.zeta or params.zeta_ratio is required".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("give only one of params.zeta and params.zeta_ratio".into())),
    };
    if !(z >= rho * (1.0 - 1e-12)) {
        return Err(CliError::Config(format!("zeta = {} lies below the spectral radius {}", z, rho)));
    }
    Ok(z)
}

fn green_options(cfg: &RunConfig) -> GreenOptions {
    let mut o = GreenOptions { tol: cfg.tolerances.tol, radius: cfg.params.radius, ..GreenOptions::default() };
    if let Some(m) = cfg.params.max_steps {
        o.max_steps = m;
    }
    o
}

/// Evaluate independent items on scoped threads; results keep the input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

fn estimate_row(out: &mut Outcome, mut row: Vec<String>, e: Estimate) {
    row.push(float(e.value));
    row.push(float(e.err));
    out.note_err(e.err);
    out.table.push(row);
}

fn exact_row(out: &mut Outcome, mut row: Vec<String>, v: &BigRational, input: Value) {
    row.push(decimal(v));
    row.push(EXACT.into());
    out.exact.push(json!({ "input": input, "value": rational(v) }));
    out.table.push(row);
}

pub fn run_task(task: Task, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = datum(cfg)?;
    match task {
        Task::Roots => roots(&d),
        Task::Nlambda => nlambda(&d, cfg),
        Task::Spherical => spherical(&d, cfg),
        Task::Green => green(&d, cfg),
        Task::Martin => martin(&d, cfg),
        Task::Limits => limits(&d, cfg),
        Task::Measure => measure(&d, cfg),
        Task::Furstenberg => furstenberg(&d, cfg),
        Task::BcWalk => bc_walk(&d),
    }
}

fn q_list(v: &[Q]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn roots(d: &RootDatum) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(Table::new(&["index", "root", "ambient", "height", "q_alpha", "err"]));
    for (k, a) in d.positive.iter().enumerate() {
        let rc = d.root_coords(a);
        let height = rc.iter().fold(Q::from_integer(0), |s, x| s + x);
        out.table.push(vec![
            (k + 1).to_string(),
            q_list(&rc),
            q_list(&a.0),
            height.to_string(),
            d.q_root(a).to_string(),
            EXACT.into(),
        ]);
    }
    Ok(out)
}

fn nlambda(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(Table::new(&["lambda", "value", "err"]));
    for l in required(&cfg.params.lambdas, "lambdas")? {
        let v = compute(d.n_lambda(&dominant(d, l, "lambda")?, false))?;
        exact_row(&mut out, vec![coords(l)], &v, json!({ "lambda": l }));
    }
    Ok(out)
}

fn spherical(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let h = hecke(d, cfg);
    let j = cfg.params.j.clone();
    if let Some(j) = &j {
        invalid(d.check_proper(j))?;
    }
    let j_label = j.as_ref().map(|j| j.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap_or_default();
    let mut out = Outcome::new(Table::new(&["lambda", "J", "value", "err"]));
    let lams = required(&cfg.params.lambdas, "lambdas")?;
    let vs: Vec<Vector> = lams.iter().map(|l| dominant(d, l, "lambda")).collect::<Result<_, _>>()?;
    let results = par_map(&vs, |v| h.sph.macdonald_zero(v, j.as_deref()));
    for (l, r) in lams.iter().zip(results) {
        estimate_row(&mut out, vec![coords(l), j_label.clone()], compute(r)?);
    }
    Ok(out)
}

fn walk_extra(wc: &WalkContext) -> Value {
    json!({ "rho": wc.rho.value, "rho_err": wc.rho.err, "lazy": wc.walk.lazy })
}

fn green(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let wc = walk_context(d, cfg)?;
    let z = zeta(cfg, wc.rho.value)?;
    let lams = required(&cfg.params.lambdas, "lambdas")?;
    let targets: Vec<Vector> = lams.iter().map(|l| dominant(d, l, "lambda")).collect::<Result<_, _>>()?;
    let vals = compute(wc.green_many(z, &targets, green_options(cfg)))?;
    let mut out = Outcome::new(Table::new(&["nu", "zeta", "value", "err", "steps", "radius", "tail"]));
    for (l, g) in lams.iter().zip(&vals) {
        out.note_err(g.err);
        out.table.push(vec![
            coords(l),
            float(z),
            float(g.value),
            float(g.err),
            g.steps.to_string(),
            g.radius.to_string(),
            float(g.tail),
        ]);
    }
    out.extra = walk_extra(&wc);
    Ok(out)
}

fn martin(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let wc = walk_context(d, cfg)?;
    let z = zeta(cfg, wc.rho.value)?;
    let xs_c = required(&cfg.params.xs, "xs")?;
    let ys_c = required(&cfg.params.ys, "ys")?;
    let xs: Vec<ApartmentPoint> = xs_c.iter().map(|c| point(d, c, "x").map(|v| ApartmentPoint::new(d, v))).collect::<Result<_, _>>()?;
    let ys: Vec<ApartmentPoint> = ys_c.iter().map(|c| point(d, c, "y").map(|v| ApartmentPoint::new(d, v))).collect::<Result<_, _>>()?;
    let opts = green_options(cfg);
    let results = par_map(&ys, |y| wc.martin_kernels(z, &xs, y, opts));
    let mut out = Outcome::new(Table::new(&["x", "y", "zeta", "value", "err"]));
    for (yc, r) in ys_c.iter().zip(results) {
        for (xc, e) in xs_c.iter().zip(compute(r)?) {
            estimate_row(&mut out, vec![coords(xc), coords(yc), float(z)], e);
        }
    }
    out.extra = walk_extra(&wc);
    Ok(out)
}

fn limits(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = spec(d, cfg)?;
    let xs_c = required(&cfg.params.xs, "xs")?;
    let xs: Vec<ApartmentPoint> = xs_c.iter().map(|c| point(d, c, "x").map(|v| ApartmentPoint::new(d, v))).collect::<Result<_, _>>()?;
    let bottom = cfg.params.zeta.is_none() && cfg.params.zeta_ratio.is_none_or(|r| r == 1.0);
    if !bottom && s.u.is_none() {
        return Err(CliError::Config("limits above the spectrum need spec.u".into()));
    }
    let mut out = Outcome::new(Table::new(&["x", "zeta_ratio", "value", "err"]));
    let (results, ratio) = if bottom && cfg.walk.is_none() {
        let h = hecke(d, cfg);
        (par_map(&xs, |x| limit_kernel_bottom(&h, x, &s)), 1.0)
    } else {
        let wc = walk_context(d, cfg)?;
        let z = zeta(cfg, wc.rho.value).or_else(|e| if bottom { Ok(wc.rho.value) } else { Err(e) })?;
        out.extra = walk_extra(&wc);
        let r = z / wc.rho.value;
        if bottom || (r - 1.0).abs() < 1e-12 {
            (par_map(&xs, |x| limit_kernel_bottom(&wc.hecke, x, &s)), 1.0)
        } else {
            (par_map(&xs, |x| wc.limit_kernel_above(z, x, &s)), r)
        }
    };
    for (xc, r) in xs_c.iter().zip(results) {
        estimate_row(&mut out, vec![coords(xc), float(ratio)], compute(r)?);
    }
    Ok(out)
}

fn measure(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let lams = required(&cfg.params.lambdas, "lambdas")?;
    let mut out = Outcome::new(Table::new(&["kind", "lambda", "mu", "value", "err"]));
    if cfg.params.mus.is_empty() {
        for l in lams {
            let v = compute(nu_shadow(d, &dominant(d, l, "lambda")?, false))?;
            exact_row(&mut out, vec!["shadow".into(), coords(l), String::new()], &v, json!({ "lambda": l }));
        }
        return Ok(out);
    }
    let mut pairs = Vec::new();
    for l in lams {
        for m in &cfg.params.mus {
            pairs.push((l, m, dominant(d, l, "lambda")?, dominant(d, m, "mu")?));
        }
    }
    let results = par_map(&pairs, |(_, _, l, m)| nu_y_shadow(d, l, m));
    for ((l, m, _, _), r) in pairs.iter().zip(results) {
        let v = compute(r)?.value;
        exact_row(&mut out, vec!["y-shadow".into(), coords(l), coords(m)], &v, json!({ "lambda": l, "mu": m }));
    }
    Ok(out)
}

fn certificate(c: Stabilization) -> &'static str {
    match c {
        Stabilization::Exact => "exact",
        Stabilization::Accelerated => "accelerated",
        Stabilization::Cauchy => "cauchy",
    }
}

fn furstenberg(d: &RootDatum, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = spec(d, cfg)?;
    let ys_c = required(&cfg.params.ys, "ys")?;
    let ys: Vec<ApartmentPoint> = ys_c.iter().map(|c| point(d, c, "y").map(|v| ApartmentPoint::new(d, v))).collect::<Result<_, _>>()?;
    let max_n = cfg.params.max_n.unwrap_or(30);
    let results = par_map(&ys, |y| furstenberg_limit(d, &s, y, max_n));
    let mut out = Outcome::new(Table::new(&["y", "value", "horizon", "certificate", "facade", "err"]));
    for (yc, r) in ys_c.iter().zip(results) {
        let lim = compute(r)?;
        let facade = lim.facade.as_ref().map(decimal).unwrap_or_default();
        out.table.push(vec![
            coords(yc),
            decimal(&lim.value),
            lim.horizon.to_string(),
            certificate(lim.certificate).into(),
            facade,
            EXACT.into(),
        ]);
        out.exact.push(json!({
            "input": { "y": yc },
            "value": rational(&lim.value),
            "facade": lim.facade.as_ref().map(rational),
            "horizon": lim.horizon,
            "certificate": certificate(lim.certificate),
        }));
    }
    Ok(out)
}

fn bc_walk(d: &RootDatum) -> Result<Outcome, CliError> {
    if d.kind != RootType::BC {
        return Err(CliError::Config("bc-walk needs a BC datum".into()));
    }
    let bd = compute(bc_distinguished(d))?;
    let mut out = Outcome::new(Table::new(&["class", "lambda", "weight", "err"]));
    for (class, dd, walk) in [("good", &bd.datum, &bd.walk), ("eps", &bd.eps_datum, &bd.walk_eps)] {
        for (l, w) in &walk.exact {
            let c = compute(to_coords(dd, l))?;
            exact_row(&mut out, vec![class.into(), coords(&c)], w, json!({ "class": class, "lambda": c }));
        }
    }
    let (model, closed) = compute(bc_drift_diagnostic(d))?;
    out.extra = json!({
        "n_0": rational(&bd.n_0),
        "n_r": rational(&bd.n_r),
        "i_prime": bd.i_prime,
        "drift": { "model": model, "closed_form": closed },
    });
    Ok(out)
}
