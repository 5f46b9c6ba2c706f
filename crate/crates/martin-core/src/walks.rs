//! Isotropic walks on good vertices: spectral radius, the exponential sum `kappa`, the
//! point `s_u`, Green functions, Martin kernels and their limits, and the distinguished
//! walk on special vertices of `BC_r`.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::apartment::{horocycle_h, sigma, ApartmentPoint, CoreSpec};
use crate::error::{Error, Result};
use crate::hecke::{from_coords, to_coords, Coords, HeckeContext, RadialEngine};
use crate::root_data::{RootDatum, RootType};
use crate::spherical::Estimate;
use crate::vector::{big_to_f64, q, q_to_f64, Vector, Q};

/// Isotropic finite-range walk `A = sum_k c_k A_{lambda_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicWalk {
    /// `(lambda_k, c_k)` in floating point, after the lazy transform.
    pub generators: Vec<(Vector, f64)>,
    /// The same weights, exact.
    pub exact: Vec<(Vector, BigRational)>,
    pub lazy: bool,
    /// Walk on the type-`r` special vertices of `BC_r` (the twisted class).
    pub eps: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WalkOptions {
    /// Apply `p -> (delta + p) / 2`; then `G_zeta = zeta/(zeta+1) * G~_{(zeta+1)/2}`.
    pub lazy: bool,
    pub eps: bool,
}

/// Size of the reachability window, in coweight coordinates.
const WINDOW: i64 = 2;

pub fn make_walk(d: &RootDatum, weights: &[(Vector, BigRational)], opts: WalkOptions) -> Result<IsotropicWalk> {
    if weights.is_empty() {
        return Err(Error::InvalidWalk("empty support".into()));
    }
    let mut merged: BTreeMap<Vector, BigRational> = BTreeMap::new();
    for (l, c) in weights {
        if !c.is_positive() {
            return Err(Error::InvalidWalk(format!("weight {} on {} is not positive", c, l)));
        }
        if !d.is_dominant(l) {
            return Err(Error::NotDominant(l.clone()));
        }
        if !d.in_coweight_lattice(l) {
            return Err(Error::NotInLattice(l.clone()));
        }
        *merged.entry(l.clone()).or_insert_with(BigRational::zero) += c;
    }
    let total = merged.values().fold(BigRational::zero(), |a, b| a + b);
    if !total.is_one() {
        return Err(Error::InvalidWalk(format!("weights sum to {}, not 1", total)));
    }
    if opts.eps && d.kind != RootType::BC {
        return Err(Error::InvalidWalk("the eps class exists only for BC".into()));
    }
    check_reachability(d, merged.keys())?;
    if opts.lazy {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        for v in merged.values_mut() {
            *v = v.clone() * half.clone();
        }
        *merged.entry(Vector::zero(d.dim)).or_insert_with(BigRational::zero) += half;
    }
    let exact: Vec<(Vector, BigRational)> = merged.into_iter().collect();
    let generators = exact.iter().map(|(l, c)| (l.clone(), big_to_f64(c))).collect();
    Ok(IsotropicWalk { generators, exact, lazy: opts.lazy, eps: opts.eps })
}

/// Closure of `{0}` under `nu -> dom(nu + w lambda)` must cover the window; these moves are
/// always realized inside one apartment.
fn check_reachability<'a>(d: &RootDatum, gens: impl Iterator<Item = &'a Vector>) -> Result<()> {
    let gens: Vec<&Vector> = gens.collect();
    let mut images: Vec<Vector> = Vec::new();
    let els = d.elements()?;
    for l in &gens {
        let mut seen = HashSet::new();
        for w in els {
            let v = w.apply(l);
            if seen.insert(v.clone()) {
                images.push(v);
            }
        }
    }
    let bound = 3 * WINDOW;
    let in_bound = |c: &Coords| c.iter().all(|&x| x <= bound);
    let mut seen: HashSet<Coords> = HashSet::new();
    let start = vec![0i64; d.rank];
    seen.insert(start.clone());
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        let v = from_coords(d, &c);
        for g in &images {
            let n = d.dominant(&(&v + g));
            let nc = to_coords(d, &n)?;
            if in_bound(&nc) && seen.insert(nc.clone()) {
                stack.push(nc);
            }
        }
    }
    let mut missing = Vec::new();
    let mut c = vec![0i64; d.rank];
    loop {
        if !seen.contains(&c) {
            missing.push(c.clone());
        }
        let mut i = 0;
        while i < d.rank {
            c[i] += 1;
            if c[i] <= WINDOW {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        if i == d.rank {
            break;
        }
    }
    if !missing.is_empty() {
        return Err(Error::InvalidWalk(format!("walk is reducible: {:?} not reached", missing[0])));
    }
    Ok(())
}

/// `kappa(s) = sum_v c_v e^{<s, v>}` with `kappa(0) = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct KappaExpansion {
    pub terms: Vec<(Vec<f64>, f64)>,
    #[serde(skip)]
    coweights: Vec<Vec<f64>>,
    #[serde(skip)]
    simple: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl KappaExpansion {
    pub fn eval(&self, s: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * dot(v, s).exp()).sum()
    }

    pub fn grad(&self, s: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; s.len()];
        for (v, c) in &self.terms {
            let e = c * dot(v, s).exp();
            for (gi, vi) in g.iter_mut().zip(v) {
                *gi += e * vi;
            }
        }
        g
    }

    pub fn hessian(&self, s: &[f64]) -> Vec<Vec<f64>> {
        let n = s.len();
        let mut h = vec![vec![0.0; n]; n];
        for (v, c) in &self.terms {
            let e = c * dot(v, s).exp();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += e * v[i] * v[j];
                }
            }
        }
        h
    }
}

/// Solution of `grad kappa(s) = t u`, `kappa(s) = level`.
#[derive(Clone, Debug, Serialize)]
pub struct SuSolution {
    pub s: Vec<f64>,
    pub t: f64,
    pub residual: f64,
}

/// A walk with its Hecke context, spectral radius and `kappa`.
#[derive(Debug)]
pub struct WalkContext {
    pub hecke: Arc<HeckeContext>,
    pub walk: IsotropicWalk,
    pub rho: Estimate,
    pub kappa: KappaExpansion,
}

/// Options for Green-function series.
#[derive(Clone, Copy, Debug)]
pub struct GreenOptions {
    pub tol: f64,
    /// Box radius in coweight coordinates; chosen from `zeta / rho` when `None`.
    pub radius: Option<usize>,
    pub max_steps: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions { tol: 1e-12, radius: None, max_steps: 200_000 }
    }
}

/// `G_zeta(nu)`, with `reduced = sum_n zeta^{-n} a_n(nu) chi^{-1/2}(nu)` kept for ratios.
#[derive(Clone, Debug, Serialize)]
pub struct GreenValue {
    pub nu: Coords,
    pub value: f64,
    pub reduced: f64,
    pub err: f64,
    pub steps: usize,
    pub radius: usize,
    pub tail: f64,
    pub fit_residual: Option<f64>,
    pub reachable: bool,
}

impl WalkContext {
    pub fn new(hecke: Arc<HeckeContext>, walk: IsotropicWalk) -> Result<Self> {
        let rho = spectral_radius(&hecke, &walk)?;
        let kappa = kappa(&hecke, &walk, rho.value)?;
        Ok(WalkContext { hecke, walk, rho, kappa })
    }

    pub fn datum(&self) -> &RootDatum {
        self.hecke.datum()
    }

    fn reach(&self) -> Result<i64> {
        let d = self.datum();
        Ok(self
            .walk
            .generators
            .iter()
            .map(|(l, _)| to_coords(d, l).map(|c| c.iter().sum::<i64>()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(1)
            .max(1))
    }

    fn at_bottom(&self, zeta: f64) -> bool {
        (zeta / self.rho.value - 1.0).abs() < 1e-12
    }

    /// Green function at several radial targets from one series run.
    pub fn green_many(&self, zeta: f64, targets: &[Vector], opts: GreenOptions) -> Result<Vec<GreenValue>> {
        let d = self.datum();
        if !(zeta > 0.0) || (zeta < self.rho.value && !self.at_bottom(zeta)) {
            return Err(Error::InvalidConfiguration(format!("zeta = {} lies below rho = {}", zeta, self.rho.value)));
        }
        let bottom = self.at_bottom(zeta);
        let zeta = if bottom { self.rho.value } else { zeta };
        let coords: Vec<Coords> = targets.iter().map(|t| to_coords(d, t)).collect::<Result<_>>()?;
        for (t, c) in targets.iter().zip(&coords) {
            if !d.is_dominant(t) || c.iter().any(|&x| x < 0) {
                return Err(Error::NotDominant(t.clone()));
            }
        }
        let far = coords.iter().map(|c| c.iter().sum::<i64>()).max().unwrap_or(0) as usize;
        let reach = self.reach()? as usize;
        let max_steps = opts.max_steps.max(1);
        let radius = match opts.radius {
            Some(r) => r,
            None => {
                let margin = if bottom {
                    4.0 * (max_steps as f64).sqrt()
                } else {
                    40.0 / (zeta / self.rho.value).acosh()
                };
                far + reach * (margin.ceil() as usize).min(4000)
            }
        };
        let mut eng = RadialEngine::new(&self.hecke, &self.walk, radius, zeta, true)?;
        let idx: Vec<Option<usize>> = coords.iter().map(|c| eng.index(c)).collect();
        let mut sums = vec![0.0f64; coords.len()];
        let mut comp = vec![0.0f64; coords.len()];
        let mut history: Vec<Vec<f64>> = vec![Vec::new(); coords.len()];
        let decay = if bottom { 1.0 } else { self.rho.value / zeta };
        let window = 6usize;
        let mut recent: Vec<std::collections::VecDeque<f64>> = vec![Default::default(); coords.len()];
        let mut steps = 0usize;
        loop {
            // accumulate the current term (compensated)
            for (k, ix) in idx.iter().enumerate() {
                let b = ix.map_or(0.0, |i| eng.values()[i]);
                let y = b - comp[k];
                let t = sums[k] + y;
                comp[k] = (t - sums[k]) - y;
                sums[k] = t;
                if bottom {
                    history[k].push(b);
                }
                recent[k].push_back(b);
                if recent[k].len() > window {
                    recent[k].pop_front();
                }
            }
            if steps >= max_steps {
                break;
            }
            if !bottom && steps > far / reach + window {
                let done = recent.iter().zip(&sums).all(|(r, s)| {
                    let inc: f64 = r.iter().sum();
                    inc / (1.0 - decay) <= 1e-3 * opts.tol * s.abs() || (*s == 0.0 && steps > 4 * far + 50)
                });
                if done {
                    break;
                }
            }
            eng.step();
            steps += 1;
        }
        let mut out = Vec::with_capacity(coords.len());
        for (k, c) in coords.iter().enumerate() {
            let nu = &targets[k];
            let mut reduced = sums[k];
            let err;
            let mut tail = 0.0;
            let mut fit_residual = None;
            if bottom {
                let (t, res) = power_tail(&history[k], window)?;
                tail = t;
                reduced += t;
                err = 0.5 * t.abs() + res * t.abs();
                fit_residual = Some(res);
            } else if steps >= max_steps {
                let inc: f64 = recent[k].iter().sum();
                err = inc / (1.0 - decay);
            } else {
                err = opts.tol * reduced.abs();
            }
            let wl = big_to_f64(&d.poincare_stabilizer(nu)?);
            let w = big_to_f64(&d.poincare_full()?);
            // chi^{1/2}(nu) / N_nu = W_nu(q^{-1}) / (W(q^{-1}) chi^{1/2}(nu))
            let f = wl / w * d.chi_pow(nu, -0.5);
            out.push(GreenValue {
                nu: c.clone(),
                value: f * reduced,
                reduced,
                err: f * err,
                steps,
                radius,
                tail,
                fit_residual,
                reachable: reduced != 0.0,
            });
        }
        Ok(out)
    }

    pub fn green(&self, zeta: f64, nu: &Vector, opts: GreenOptions) -> Result<GreenValue> {
        Ok(self.green_many(zeta, std::slice::from_ref(nu), opts)?.remove(0))
    }

    /// `K_zeta(x, y) = G(sigma(x, y)) / G(sigma(o, y))` for several `x`.
    pub fn martin_kernels(
        &self,
        zeta: f64,
        xs: &[ApartmentPoint],
        y: &ApartmentPoint,
        opts: GreenOptions,
    ) -> Result<Vec<Estimate>> {
        let d = self.datum();
        let o = ApartmentPoint::origin(d);
        let mut targets = vec![sigma(d, &o, y)?];
        for x in xs {
            targets.push(sigma(d, x, y)?);
        }
        let g = self.green_many(zeta, &targets, opts)?;
        let base = &g[0];
        let w0 = big_to_f64(&d.poincare_stabilizer(&targets[0])?);
        let mut out = Vec::with_capacity(xs.len());
        for (k, gv) in g.iter().enumerate().skip(1) {
            let wk = big_to_f64(&d.poincare_stabilizer(&targets[k])?);
            let f = wk / w0 * d.chi_pow(&(&targets[0] - &targets[k]), 0.5);
            let value = f * gv.reduced / base.reduced;
            let rel = gv.err / gv.value.abs().max(f64::MIN_POSITIVE) + base.err / base.value.abs().max(f64::MIN_POSITIVE);
            out.push(Estimate { value, err: value.abs() * rel });
        }
        Ok(out)
    }

    pub fn martin_kernel(&self, zeta: f64, x: &ApartmentPoint, y: &ApartmentPoint, opts: GreenOptions) -> Result<Estimate> {
        Ok(self.martin_kernels(zeta, std::slice::from_ref(x), y, opts)?.remove(0))
    }

    /// `s_u` for `zeta > rho`.
    pub fn solve_s_u(&self, zeta: f64, u: &[f64]) -> Result<SuSolution> {
        if zeta <= self.rho.value {
            return Err(Error::InvalidConfiguration(format!("zeta = {} must exceed rho = {}", zeta, self.rho.value)));
        }
        solve_s_u(&self.kappa, zeta / self.rho.value, u)
    }

    /// Limit kernel above the bottom of the spectrum.
    pub fn limit_kernel_above(&self, zeta: f64, x: &ApartmentPoint, spec: &CoreSpec) -> Result<Estimate> {
        let d = self.datum();
        let u = spec.u_unit().ok_or_else(|| Error::InvalidSpec("limit above the spectrum needs u".into()))?;
        let sol = self.solve_s_u(zeta, &u)?;
        let base = limit_kernel_bottom(&self.hecke, x, spec)?;
        let h = horocycle_h(&ApartmentPoint::origin(d), x, &spec.w)?;
        let e = dot(&sol.s, &h.to_f64()).exp();
        Ok(Estimate { value: base.value * e, err: base.err * e + base.value * e * sol.residual })
    }
}

/// Fit `b_n ~ C n^{-beta}` on the last decade of block means and integrate the tail.
fn power_tail(hist: &[f64], block: usize) -> Result<(f64, f64)> {
    let n = hist.len();
    if n < 20 * block {
        return Err(Error::InvalidConfiguration("too few steps for a tail fit".into()));
    }
    let lo = n / 10;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut start = lo;
    while start + block <= n {
        let m: f64 = hist[start..start + block].iter().sum::<f64>() / block as f64;
        if m > 0.0 {
            xs.push(((start + block / 2) as f64).ln());
            ys.push(m.ln());
        }
        start += block;
    }
    if xs.len() < 5 {
        return Ok((0.0, 0.0));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).abs()).fold(0.0, f64::max);
    let beta = -slope;
    if beta <= 1.05 {
        return Err(Error::InvalidConfiguration(format!("tail fit unstable: exponent {:.3}", beta)));
    }
    let c = icpt.exp();
    let from = n as f64 - 0.5;
    Ok((c * from.powf(1.0 - beta) / (beta - 1.0), res))
}

/// `rho = sum_k c_k P_{lambda_k}(0)`.
pub fn spectral_radius(h: &HeckeContext, walk: &IsotropicWalk) -> Result<Estimate> {
    let mut value = 0.0;
    let mut err = 0.0;
    for (l, c) in &walk.generators {
        if l.is_zero() {
            value += c;
            continue;
        }
        let e = h.sph.macdonald_zero(l, None)?;
        value += c * e.value;
        err += c * e.err;
    }
    Ok(Estimate { value, err })
}

/// `kappa(z) = rho^{-1} sum_k c_k P_{lambda_k}(z)` as an exponential sum.
pub fn kappa(h: &HeckeContext, walk: &IsotropicWalk, rho: f64) -> Result<KappaExpansion> {
    let d = h.datum();
    let mut acc: BTreeMap<Coords, f64> = BTreeMap::new();
    for (l, c) in &walk.generators {
        for (v, b) in h.laurent(l)? {
            *acc.entry(v).or_insert(0.0) += c * b / rho;
        }
    }
    let mut terms = Vec::new();
    for (v, c) in acc {
        if c < -1e-12 {
            return Err(Error::NegativeConstant { nu: from_coords(d, &v), value: c });
        }
        if c > 0.0 {
            terms.push((from_coords(d, &v).to_f64(), c));
        }
    }
    let k = KappaExpansion {
        terms,
        coweights: d.coweights.iter().map(|v| v.to_f64()).collect(),
        simple: d.simple.iter().map(|v| v.to_f64()).collect(),
    };
    let at0 = k.eval(&vec![0.0; d.dim]);
    if (at0 - 1.0).abs() > 1e-10 {
        return Err(Error::IllConditioned { residual: (at0 - 1.0).abs() });
    }
    Ok(k)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Damped Newton for `grad kappa(s) = t u`, `kappa(s) = level > 1`.
pub fn solve_s_u(k: &KappaExpansion, level: f64, u: &[f64]) -> Result<SuSolution> {
    if level <= 1.0 {
        return Err(Error::InvalidConfiguration("level must exceed 1".into()));
    }
    let r = k.coweights.len();
    let un: f64 = dot(u, u).sqrt();
    let u: Vec<f64> = u.iter().map(|x| x / un).collect();
    let basis = &k.coweights;
    let tests = &k.simple;
    let point = |x: &[f64]| -> Vec<f64> {
        let mut s = vec![0.0; u.len()];
        for (xi, b) in x.iter().zip(basis) {
            for (si, bi) in s.iter_mut().zip(b) {
                *si += xi * bi;
            }
        }
        s
    };
    let coords_of = |s: &[f64]| -> Vec<f64> { tests.iter().map(|a| dot(a, s)).collect() };
    let resid = |x: &[f64], t: f64| -> (Vec<f64>, f64) {
        let s = point(x);
        let g = k.grad(&s);
        let diff: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - t * ui).collect();
        let mut f: Vec<f64> = tests.iter().map(|a| dot(a, &diff)).collect();
        let lev = k.eval(&s) - level;
        f.push(lev);
        (f, dot(&diff, &diff).sqrt() + lev.abs())
    };
    // start on the ray through u
    let mut lo = 0.0;
    let mut hi = 1.0;
    while k.eval(&u.iter().map(|x| x * hi).collect::<Vec<_>>()) < level {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence("level set is unbounded along u".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k.eval(&u.iter().map(|x| x * mid).collect::<Vec<_>>()) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s0: Vec<f64> = u.iter().map(|x| x * hi).collect();
    let mut x = coords_of(&s0);
    let mut t = dot(&k.grad(&s0), &u);
    let (mut f, mut res) = resid(&x, t);
    for _ in 0..200 {
        if res <= 1e-13 {
            break;
        }
        let s = point(&x);
        let hs = k.hessian(&s);
        let g = k.grad(&s);
        let mut jac = vec![vec![0.0; r + 1]; r + 1];
        for i in 0..r {
            for j in 0..r {
                let hb: Vec<f64> = (0..u.len()).map(|m| dot(&hs[m], &basis[j])).collect();
                jac[i][j] = dot(&tests[i], &hb);
            }
            jac[i][r] = -dot(&tests[i], &u);
            jac[r][i] = dot(&g, &basis[i]);
        }
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = solve_dense(jac, neg).ok_or_else(|| Error::NoConvergence("singular Newton system".into()))?;
        let mut lam = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + lam * b).collect();
            let tn = t + lam * step[r];
            let (fnew, rn) = resid(&xn, tn);
            if rn < res || rn <= 1e-13 {
                x = xn;
                t = tn;
                f = fnew;
                res = rn;
                improved = true;
                break;
            }
            lam *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res > 1e-12 || t <= 0.0 {
        return Err(Error::NoConvergence(format!("s_u residual {:.3e}", res)));
    }
    Ok(SuSolution { s: point(&x), t, residual: res })
}

/// Façade component `P_J sigma(x, y_n)` once it stops changing.
pub fn facade_distance(d: &RootDatum, x: &ApartmentPoint, spec: &CoreSpec) -> Result<Vector> {
    let mut last: Option<Vector> = None;
    let mut streak = 0;
    let horizon = match spec.schedule {
        crate::apartment::Schedule::Linear => 200,
        crate::apartment::Schedule::Pow2 => 24,
    };
    for n in 1..=horizon {
        let y = spec.generate(d, n)?;
        let s = sigma(d, x, &y)?;
        let (pj, _) = d.proj_j(&spec.j, &s)?;
        if last.as_ref() == Some(&pj) {
            streak += 1;
            if streak >= 3 {
                return Ok(pj);
            }
        } else {
            streak = 0;
        }
        last = Some(pj);
    }
    Err(Error::InvalidSpec("the J-component of sigma(x, y_n) does not stabilize".into()))
}

/// Limit of `K_rho(x, y_n)` along a core sequence.
pub fn limit_kernel_bottom(h: &HeckeContext, x: &ApartmentPoint, spec: &CoreSpec) -> Result<Estimate> {
    let d = h.datum();
    let o = ApartmentPoint::origin(d);
    let hv = horocycle_h(&o, x, &spec.w)?;
    let in_j = d.sub_positive(&spec.j);
    // exact exponent per distinct tau, so W_J-related directions give bitwise equal values
    let mut exps: BTreeMap<BigRational, Q> = BTreeMap::new();
    for (a, t) in d.positive.iter().zip(&d.tau) {
        if !in_j.contains(a) {
            *exps.entry(t.clone()).or_insert_with(Q::zero) += hv.dot(a);
        }
    }
    let tau_part: f64 = exps.iter().map(|(t, e)| big_to_f64(t).powf(0.5 * q_to_f64(*e))).product();
    if spec.j.is_empty() {
        return Ok(Estimate { value: tau_part, err: 0.0 });
    }
    let mx = facade_distance(d, x, spec)?;
    let mo = facade_distance(d, &o, spec)?;
    let px = h.sph.ground_state(&mx, &spec.j)?;
    let po = h.sph.ground_state(&mo, &spec.j)?;
    let value = px.value / po.value * tau_part;
    let err = value * (px.err / px.value.abs() + po.err / po.value.abs());
    Ok(Estimate { value, err })
}

/// Aitken's delta-squared on the last three terms.
pub fn aitken(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len();
    let (a, b, c) = (xs[n - 3], xs[n - 2], xs[n - 1]);
    let den = (c - b) - (b - a);
    if den.abs() < 1e-300 {
        return Some(c);
    }
    Some(c - (c - b) * (c - b) / den)
}

/// Least-squares fit of `v_m = a_0 + a_1/m + ... + a_k/m^k`; returns `a_0` and the
/// largest fit residual.
pub fn extrapolate_inverse_powers(ms: &[f64], vals: &[f64], degree: usize) -> Result<Estimate> {
    if ms.len() != vals.len() || ms.len() < degree + 2 {
        return Err(Error::InvalidConfiguration("too few points for the extrapolation".into()));
    }
    // scale columns by the smallest m so the design matrix stays well conditioned
    let m0 = ms.iter().cloned().fold(f64::INFINITY, f64::min);
    let a = nalgebra::DMatrix::from_fn(ms.len(), degree + 1, |i, k| (m0 / ms[i]).powi(k as i32));
    let b = nalgebra::DVector::from_column_slice(vals);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|_| Error::IllConditioned { residual: f64::NAN })?;
    let r = &a * &x - &b;
    Ok(Estimate { value: x[0], err: r.amax() })
}

// ---- the distinguished walk on special vertices of BC_r ----

/// Two-step walks of the chamber walk between type-0 and type-`r` special vertices.
#[derive(Clone, Debug)]
pub struct BcDistinguished {
    /// Datum of the type-0 (good) vertices; the type-`r` vertices use the twisted one.
    pub datum: RootDatum,
    pub eps_datum: RootDatum,
    /// Type-`r` neighbours of a type-0 vertex.
    pub n_r: BigRational,
    /// Type-0 neighbours of a type-`r` vertex.
    pub n_0: BigRational,
    pub i_prime: Vec<usize>,
    pub walk: IsotropicWalk,
    pub walk_eps: IsotropicWalk,
}

fn bc_weights(d: &RootDatum, params: &[u64], twisted: bool, i_prime: &[usize]) -> Result<(BigRational, BigRational, Vec<(Vector, BigRational)>)> {
    let r = d.rank;
    let all: Vec<usize> = (1..=r).collect();
    let not_r: Vec<usize> = (1..r).collect();
    let tw: Vec<u64> = {
        let mut t = params.to_vec();
        t.swap(0, r);
        t
    };
    let w = d.poincare_parabolic_at_q(&all, params)?;
    let w_r = d.poincare_parabolic_at_q(&not_r, params)?;
    let w_aff = d.poincare_parabolic_at_q(&all, &tw)?;
    let n_r = w.clone() / w_r.clone();
    let n_0 = w_aff / w_r;
    let norm = BigRational::one() / (n_0.clone() * n_r.clone());
    let mut out = vec![(Vector::zero(d.dim), n_r.clone() * norm.clone())];
    for &j in i_prime {
        let not_j: Vec<usize> = all.iter().copied().filter(|&i| i != j).collect();
        let not_jr: Vec<usize> = not_j.iter().copied().filter(|&i| i != r).collect();
        let wj = d.poincare_parabolic_at_q(&not_j, params)?;
        let wjr = d.poincare_parabolic_at_q(&not_jr, params)?;
        let lj = d.coweight(j).clone();
        let nj = d.n_lambda(&lj, twisted)?;
        out.push((lj, norm.clone() * wj / wjr * nj));
    }
    Ok((n_r, n_0, out))
}

/// `I'`: indices `j` with `lambda_j` a dominant value of `lambda_r/2 + w(lambda_r/2)`.
pub fn bc_i_prime(d: &RootDatum) -> Result<Vec<usize>> {
    if d.kind != RootType::BC {
        return Err(Error::Unsupported("the distinguished walk needs a BC datum".into()));
    }
    let half = d.coweight(d.rank).scale(q(1, 2));
    let mut out = Vec::new();
    for w in d.elements()? {
        let v = &half + &w.apply(&half);
        if v.is_zero() || !d.is_dominant(&v) {
            continue;
        }
        if let Some(j) = (1..=d.rank).find(|&j| *d.coweight(j) == v) {
            if !out.contains(&j) {
                out.push(j);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn bc_distinguished(d: &RootDatum) -> Result<BcDistinguished> {
    let i_prime = bc_i_prime(d)?;
    let (n_r, n_0, weights) = bc_weights(d, &d.params.q, false, &i_prime)?;
    let (_, _, weights_eps) = bc_weights(d, &d.params.twisted().q, true, &i_prime)?;
    for ws in [&weights, &weights_eps] {
        let total = ws.iter().fold(BigRational::zero(), |a, (_, c)| a + c);
        if !total.is_one() {
            return Err(Error::InvalidWalk(format!("two-step weights sum to {}", total)));
        }
    }
    let eps_datum = RootDatum::build(RootType::BC, d.rank, &d.params.twisted().q)?;
    let walk = make_walk(d, &weights, WalkOptions::default())?;
    let walk_eps = make_walk(&eps_datum, &weights_eps, WalkOptions { lazy: false, eps: true })?;
    Ok(BcDistinguished { datum: d.clone(), eps_datum, n_r, n_0, i_prime, walk, walk_eps })
}

/// Kernel at a type-0 target from the two-step good kernel: `x` of type 0 reads `K~`
/// directly; `x` of type `r` averages `K~` over its `N_0` type-0 neighbours, one step of
/// the chamber walk contributing `zeta^{-1}`.
pub fn combine_good_target<T>(x_good: bool, direct: Option<T>, neighbours: &[T], n_0: &T, zeta_inv: &T) -> T
where
    T: Clone + num_traits::Num,
{
    if x_good {
        return direct.expect("type-0 x needs its own kernel value");
    }
    let s = neighbours.iter().cloned().fold(T::zero(), |a, b| a + b);
    zeta_inv.clone() * s / n_0.clone()
}

/// `K^eps(x, y)` at a type-`r` target: type-`r` `x` reads `K~^eps` directly, type-0 `x`
/// averages over its `N_r` type-`r` neighbours.
pub fn combine_eps_target<T>(x_eps: bool, direct: Option<T>, neighbours: &[T], n_r: &T, zeta_inv: &T) -> T
where
    T: Clone + num_traits::Num,
{
    if x_eps {
        return direct.expect("type-r x needs its own kernel value");
    }
    let s = neighbours.iter().cloned().fold(T::zero(), |a, b| a + b);
    zeta_inv.clone() * s / n_r.clone()
}

/// `K(x, y) = K^eps(x, y) / K^eps(o, y)`.
pub fn kernel_from_eps<T: Clone + num_traits::Num>(k_eps_xy: &T, k_eps_oy: &T) -> T {
    k_eps_xy.clone() / k_eps_oy.clone()
}

/// The weighted mean of `<h, alpha_r>` against `chi^{1/2}(h)` over the type-`r`
/// neighbours of a good vertex, with `h = eta/2`, `eta in {-1, 1}^r`; returns the model
/// value and the closed form `(sqrt q_0 - sqrt q_r) / (2 (sqrt q_0 + sqrt q_r))`.
pub fn bc_drift_diagnostic(d: &RootDatum) -> Result<(f64, f64)> {
    if d.kind != RootType::BC {
        return Err(Error::Unsupported("needs a BC datum".into()));
    }
    let r = d.rank;
    let half = d.coweight(r).scale(q(1, 2));
    // N_eta = q_w for the shortest w with w(lambda_r/2) = eta/2
    let mut counts: BTreeMap<Vector, BigRational> = BTreeMap::new();
    let mut lens: BTreeMap<Vector, usize> = BTreeMap::new();
    for w in d.elements()? {
        let v = w.apply(&half);
        let better = lens.get(&v).is_none_or(|&l| w.len() < l);
        if better {
            lens.insert(v.clone(), w.len());
            counts.insert(v, w.q_w(&d.params.q));
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut total = BigRational::zero();
    for (h, n) in &counts {
        let nf = big_to_f64(n);
        let c = d.chi_pow(h, 0.5);
        num += q_to_f64(h.dot(d.simple_root(r))) * c * nf;
        den += c * nf;
        total += n;
    }
    // sanity: the counts exhaust the N_r neighbours and obey N_(eta',-1) = q_r N_(eta',1)
    let all: Vec<usize> = (1..=r).collect();
    let not_r: Vec<usize> = (1..r).collect();
    let n_r = d.poincare_parabolic_at_q(&all, &d.params.q)? / d.poincare_parabolic_at_q(&not_r, &d.params.q)?;
    if total != n_r {
        return Err(Error::InvalidConfiguration(format!("neighbour counts sum to {}, expected {}", total, n_r)));
    }
    let qr = BigRational::from_integer(BigInt::from(d.params.q[r]));
    for (h, n) in &counts {
        if h.0[r - 1].is_positive() {
            let mut flipped = h.clone();
            flipped.0[r - 1] = -flipped.0[r - 1];
            if counts.get(&flipped) != Some(&(n.clone() * qr.clone())) {
                return Err(Error::InvalidConfiguration("ratio constraint fails".into()));
            }
        }
    }
    let s0 = (d.params.q[0] as f64).sqrt();
    let sr = (d.params.q[r] as f64).sqrt();
    Ok((num / den, 0.5 * (s0 - sr) / (s0 + sr)))
}
