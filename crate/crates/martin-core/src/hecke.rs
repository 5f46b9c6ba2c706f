//! Spherical Hecke algebra: orbit-sum expansions of Macdonald polynomials, structure
//! constants, and radial evolution of isotropic walks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::root_data::RootDatum;
use crate::spherical::SphericalContext;
use crate::vector::{big_to_f64, q_to_f64, qi, Vector};
use crate::walks::IsotropicWalk;

/// Integer coordinates in the fundamental coweight basis.
pub type Coords = Vec<i64>;

pub fn to_coords(d: &RootDatum, v: &Vector) -> Result<Coords> {
    d.coweight_coords(v)
        .iter()
        .map(|c| if c.is_integer() { Ok(c.to_integer()) } else { Err(Error::NotInLattice(v.clone())) })
        .collect()
}

pub fn from_coords(d: &RootDatum, c: &[i64]) -> Vector {
    d.from_coweight_ints(c)
}

/// Dominant `mu` with `lambda - mu` in the non-negative integer span of the positive
/// coroots, sorted by decreasing height.
pub fn saturation(d: &RootDatum, lambda: &Vector) -> Vec<Vector> {
    let mut gens: Vec<Vector> = d.simple.iter().map(|a| a.coroot()).collect();
    for a in &d.simple {
        let two = a.scale(qi(2));
        if d.is_root(&two) {
            gens.push(two.coroot());
        }
    }
    let rho = d.rho();
    let mut out: HashSet<Vector> = HashSet::new();
    let mut stack: Vec<(Vector, usize)> = vec![(lambda.clone(), 0)];
    while let Some((v, start)) = stack.pop() {
        if d.is_dominant(&v) {
            out.insert(v.clone());
        }
        for (k, g) in gens.iter().enumerate().skip(start) {
            let w = &v - g;
            // dominant vectors pair non-negatively with rho, and heights only decrease
            if w.dot(&rho) >= qi(0) {
                stack.push((w, k));
            }
        }
    }
    let mut v: Vec<Vector> = out.into_iter().collect();
    v.sort_by(|a, b| b.dot(&rho).cmp(&a.dot(&rho)).then(a.cmp(b)));
    v
}

/// All `W`-images of the saturation set.
pub fn saturated_weights(d: &RootDatum, lambda: &Vector) -> Result<Vec<Vector>> {
    let mut set: HashSet<Vector> = HashSet::new();
    for mu in saturation(d, lambda) {
        for w in d.elements()? {
            set.insert(w.apply(&mu));
        }
    }
    let mut v: Vec<Vector> = set.into_iter().collect();
    v.sort();
    Ok(v)
}

/// `P_lambda = sum_mu kappa_mu m_mu` with orbit sums `m_mu`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSumExpansion {
    pub lambda: Coords,
    /// `(mu, kappa_mu)` over the saturation set, decreasing height.
    pub coefficients: Vec<(Coords, f64)>,
    pub residual: f64,
}

impl OrbitSumExpansion {
    pub fn coefficient(&self, mu: &[i64]) -> f64 {
        self.coefficients.iter().find(|(m, _)| m.as_slice() == mu).map_or(0.0, |(_, c)| *c)
    }
}

fn key_seed(seed: u64, parts: &[&[i64]]) -> u64 {
    // FNV-1a over the key, so sampling does not depend on call order
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for p in parts {
        for &x in p.iter() {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Transitions `nu -> nu + gamma` with weights, for one wall class of `nu`.
pub type Transitions = Arc<Vec<(Coords, f64)>>;

/// Hecke-algebra computations over one root datum.
#[derive(Debug)]
pub struct HeckeContext {
    pub sph: Arc<SphericalContext>,
    pub seed: u64,
    expansions: RwLock<HashMap<Coords, Arc<OrbitSumExpansion>>>,
    classes: RwLock<HashMap<(Coords, Coords), Transitions>>,
    weights: RwLock<HashMap<Coords, Arc<Vec<Vector>>>>,
}

impl HeckeContext {
    pub fn new(sph: Arc<SphericalContext>, seed: u64) -> Self {
        HeckeContext {
            sph,
            seed,
            expansions: RwLock::new(HashMap::new()),
            classes: RwLock::new(HashMap::new()),
            weights: RwLock::new(HashMap::new()),
        }
    }

    pub fn from_datum(d: &RootDatum, seed: u64) -> Self {
        Self::new(Arc::new(SphericalContext::new(d)), seed)
    }

    pub fn datum(&self) -> &RootDatum {
        &self.sph.datum
    }

    /// Imaginary sample point `z = i theta`, `theta` uniform on the torus spanned by the
    /// simple roots, kept away from the singular hyperplanes.
    fn sample_z(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let d = self.datum();
        loop {
            let t: Vec<f64> = (0..d.rank).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let mut th = vec![0.0; d.dim];
            for (ti, a) in t.iter().zip(&d.simple) {
                for (x, y) in th.iter_mut().zip(a.to_f64()) {
                    *x += ti * y;
                }
            }
            let z: Vec<Complex64> = th.iter().map(|&x| Complex64::new(0.0, x)).collect();
            let ok = d.positive.iter().all(|a| {
                let x: f64 = a.coroot().to_f64().iter().zip(&th).map(|(p, q)| p * q).sum();
                let s = (x / 2.0).rem_euclid(std::f64::consts::PI);
                s.min(std::f64::consts::PI - s) > 0.05
            });
            if ok {
                return z;
            }
        }
    }

    fn pairing_exp(&self, v: &Vector, z: &[Complex64]) -> Complex64 {
        v.to_f64().iter().zip(z).fold(Complex64::zero(), |acc, (a, b)| acc + b * a).exp()
    }

    /// `m_mu(z) = sum_{nu in W mu} e^{<z, nu>}`.
    pub fn orbit_sum(&self, mu: &Vector, z: &[Complex64]) -> Result<Complex64> {
        let d = self.datum();
        let mut seen: HashSet<Vector> = HashSet::new();
        let mut acc = Complex64::zero();
        for w in d.elements()? {
            let nu = w.apply(mu);
            if seen.insert(nu.clone()) {
                acc += self.pairing_exp(&nu, z);
            }
        }
        Ok(acc)
    }

    /// Least-squares expansion of `P_lambda` in orbit sums.
    pub fn expand_orbit_sums(&self, lambda: &Vector) -> Result<Arc<OrbitSumExpansion>> {
        let d = self.datum();
        if !d.is_dominant(lambda) {
            return Err(Error::NotDominant(lambda.clone()));
        }
        let key = to_coords(d, lambda)?;
        if let Some(e) = self.expansions.read().unwrap().get(&key) {
            return Ok(e.clone());
        }
        let support = saturation(d, lambda);
        let mut rng = ChaCha8Rng::seed_from_u64(key_seed(self.seed, &[&key, &[1]]));
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _attempt in 0..2 {
            let k = 2 * support.len() + 8;
            let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(k);
            let mut rhs: Vec<Complex64> = Vec::with_capacity(k);
            for _ in 0..k {
                let z = self.sample_z(&mut rng);
                rhs.push(self.sph.macdonald(lambda, &z)?);
                rows.push(support.iter().map(|mu| self.orbit_sum(mu, &z)).collect::<Result<_>>()?);
            }
            let (x, res) = solve_real_lsq(&rows, &rhs)?;
            let done = res <= 1e-9;
            if best.as_ref().is_none_or(|b| res < b.1) {
                best = Some((x, res));
            }
            if done {
                break;
            }
        }
        let (x, res) = best.unwrap();
        if res > 1e-9 {
            return Err(Error::IllConditioned { residual: res });
        }
        let coefficients = support
            .iter()
            .zip(&x)
            .map(|(mu, &c)| Ok((to_coords(d, mu)?, if c.abs() < 1e-14 { 0.0 } else { c })))
            .collect::<Result<Vec<_>>>()?;
        let e = Arc::new(OrbitSumExpansion { lambda: key.clone(), coefficients, residual: res });
        self.expansions.write().unwrap().insert(key, e.clone());
        Ok(e)
    }

    /// Full Laurent expansion `P_lambda = sum_gamma b_gamma e^{<z, gamma>}`.
    pub fn laurent(&self, lambda: &Vector) -> Result<BTreeMap<Coords, f64>> {
        let d = self.datum();
        let e = self.expand_orbit_sums(lambda)?;
        let mut out = BTreeMap::new();
        for (mu, c) in &e.coefficients {
            if *c == 0.0 {
                continue;
            }
            let mv = from_coords(d, mu);
            let mut seen = HashSet::new();
            for w in d.elements()? {
                let nu = w.apply(&mv);
                if seen.insert(nu.clone()) {
                    out.insert(to_coords(d, &nu)?, *c);
                }
            }
        }
        Ok(out)
    }

    /// Structure constants `c_{lambda mu}^nu` by multiplying orbit-sum expansions and
    /// eliminating in dominance order.
    pub fn structure_constants(&self, lambda: &Vector, mu: &Vector) -> Result<Vec<(Coords, f64, f64)>> {
        let d = self.datum();
        let la = self.laurent(lambda)?;
        let lb = self.laurent(mu)?;
        let mut prod: HashMap<Coords, f64> = HashMap::new();
        for (a, ca) in &la {
            for (b, cb) in &lb {
                let s: Coords = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *prod.entry(s).or_insert(0.0) += ca * cb;
            }
        }
        // dominant part, sorted by decreasing height
        let rho = d.rho();
        let mut dom: Vec<(Coords, f64)> = prod.into_iter().filter(|(k, _)| k.iter().all(|&x| x >= 0)).collect();
        let height = |c: &Coords| q_to_f64(from_coords(d, c).dot(&rho));
        dom.sort_by(|a, b| height(&b.0).partial_cmp(&height(&a.0)).unwrap().then(a.0.cmp(&b.0)));
        let mut f: BTreeMap<Coords, f64> = dom.iter().cloned().collect();
        let mut out = Vec::new();
        let scale = f.values().fold(0.0f64, |m, v| m.max(v.abs()));
        for (nu, _) in &dom {
            let val = *f.get(nu).unwrap_or(&0.0);
            if val.abs() <= 1e-14 * scale.max(1.0) {
                continue;
            }
            let e = self.expand_orbit_sums(&from_coords(d, nu))?;
            let lead = e.coefficient(nu);
            let c = val / lead;
            for (m, k) in &e.coefficients {
                *f.entry(m.clone()).or_insert(0.0) -= c * k;
            }
            out.push((nu.clone(), c, e.residual));
        }
        let resid = f.values().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut cleaned = Vec::new();
        for (nu, c, r) in out {
            if c < -1e-9 {
                return Err(Error::NegativeConstant { nu: from_coords(d, &nu), value: c });
            }
            if c.abs() < 1e-12 {
                continue;
            }
            cleaned.push((nu, c.max(0.0), r.max(resid)));
        }
        cleaned.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(cleaned)
    }

    fn weights_of(&self, lambda: &Vector) -> Result<Arc<Vec<Vector>>> {
        let d = self.datum();
        let key = to_coords(d, lambda)?;
        if let Some(w) = self.weights.read().unwrap().get(&key) {
            return Ok(w.clone());
        }
        let w = Arc::new(saturated_weights(d, lambda)?);
        self.weights.write().unwrap().insert(key, w.clone());
        Ok(w)
    }

    /// Largest `|<gamma, alpha_i>|` over the saturated weights of `lambda`.
    pub fn wall_caps(&self, lambda: &Vector) -> Result<Vec<i64>> {
        let d = self.datum();
        let ws = self.weights_of(lambda)?;
        Ok((0..d.rank)
            .map(|i| ws.iter().map(|g| g.dot(&d.simple[i]).to_integer().abs()).max().unwrap_or(0))
            .collect())
    }

    /// Constants `c_{lambda nu}^{nu + gamma}` as `(gamma, c)`; they depend on `nu` only
    /// through its coordinates capped at the wall caps of `lambda`.
    pub fn transitions(&self, lambda: &Vector, nu: &[i64]) -> Result<Transitions> {
        let d = self.datum();
        let caps = self.wall_caps(lambda)?;
        let class: Coords = nu.iter().zip(&caps).map(|(&a, &c)| a.min(c)).collect();
        let lkey = to_coords(d, lambda)?;
        let key = (lkey.clone(), class.clone());
        if let Some(t) = self.classes.read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(self.solve_class(lambda, &class, &lkey)?);
        self.classes.write().unwrap().insert(key, t.clone());
        Ok(t)
    }

    fn solve_class(&self, lambda: &Vector, class: &[i64], lkey: &[i64]) -> Result<Vec<(Coords, f64)>> {
        let d = self.datum();
        if lambda.is_zero() {
            return Ok(vec![(vec![0; d.rank], 1.0)]);
        }
        let nu = from_coords(d, class);
        let ws = self.weights_of(lambda)?;
        let gammas: Vec<&Vector> = ws.iter().filter(|g| d.is_dominant(&(&nu + *g))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(key_seed(self.seed, &[lkey, class, &[2]]));
        let k = 3 * gammas.len() + 12;
        let mut rows = Vec::with_capacity(k);
        let mut rhs = Vec::with_capacity(k);
        for _ in 0..k {
            let z = self.sample_z(&mut rng);
            let pl = self.sph.macdonald(lambda, &z)?;
            let pn = self.sph.sym_poly(&nu, &z)?;
            rhs.push(pl * pn);
            rows.push(
                gammas
                    .iter()
                    .map(|g| self.sph.sym_poly(&(&nu + *g), &z))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let (x, res) = solve_real_lsq(&rows, &rhs)?;
        if res > 1e-8 {
            return Err(Error::IllConditioned { residual: res });
        }
        let mut out = Vec::new();
        for (g, dv) in gammas.iter().zip(&x) {
            let c = dv * d.chi_pow(g, 0.5);
            if c < -1e-9 {
                return Err(Error::NegativeConstant { nu: &nu + *g, value: c });
            }
            if c.abs() < 1e-12 {
                continue;
            }
            out.push((to_coords(d, g)?, c));
        }
        // the constants of a stochastic operator sum to one; remove round-off
        let total: f64 = out.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::IllConditioned { residual: (total - 1.0).abs() });
        }
        for p in out.iter_mut() {
            p.1 /= total;
        }
        Ok(out)
    }

    /// Walk transitions `nu -> nu + gamma` for the class of `nu`, summed over generators.
    pub fn walk_transitions(&self, walk: &IsotropicWalk, nu: &[i64]) -> Result<Vec<(Coords, f64)>> {
        let mut acc: BTreeMap<Coords, f64> = BTreeMap::new();
        for (lam, c) in &walk.generators {
            for (g, v) in self.transitions(lam, nu)?.iter() {
                *acc.entry(g.clone()).or_insert(0.0) += c * v;
            }
        }
        Ok(acc.into_iter().collect())
    }

    /// Caps of the wall classes for a walk.
    pub fn walk_caps(&self, walk: &IsotropicWalk) -> Result<Vec<i64>> {
        let d = self.datum();
        let mut caps = vec![0; d.rank];
        for (lam, _) in &walk.generators {
            for (c, x) in caps.iter_mut().zip(self.wall_caps(lam)?) {
                *c = (*c).max(x);
            }
        }
        Ok(caps)
    }

    /// `a_n` for the walk; `p_n(nu) = a_n(nu) / N_nu`.
    pub fn radial_power(&self, walk: &IsotropicWalk, n: usize) -> Result<RadialDistribution> {
        let reach = walk
            .generators
            .iter()
            .map(|(l, _)| to_coords(self.datum(), l).map(|c| c.iter().sum::<i64>()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        let radius = (reach.max(1) as usize) * n.max(1);
        let mut eng = RadialEngine::new(self, walk, radius, 1.0, false)?;
        for _ in 0..n {
            eng.step();
        }
        let mut masses = BTreeMap::new();
        for (c, v) in eng.entries() {
            if v != 0.0 {
                masses.insert(c, v);
            }
        }
        Ok(RadialDistribution { steps: n, masses })
    }

    /// `p(n; x, y)` for `sigma(x, y) = nu`.
    pub fn p_n(&self, walk: &IsotropicWalk, n: usize, nu: &Vector) -> Result<f64> {
        let d = self.datum();
        let dist = self.radial_power(walk, n)?;
        let c = to_coords(d, nu)?;
        let a = dist.masses.get(&c).copied().unwrap_or(0.0);
        Ok(a / big_to_f64(&d.n_lambda(nu, false)?))
    }
}

/// Real unknowns from complex equations: stack real and imaginary parts, solve by SVD.
/// Returns the solution and the largest relative residual.
pub fn solve_real_lsq(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if n == 0 {
        return Ok((Vec::new(), rhs.iter().fold(0.0f64, |a, b| a.max(b.norm()))));
    }
    let mut a = DMatrix::<f64>::zeros(2 * m, n);
    let mut b = DVector::<f64>::zeros(2 * m);
    for (i, (row, r)) in rows.iter().zip(rhs).enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(2 * i, j)] = v.re;
            a[(2 * i + 1, j)] = v.im;
        }
        b[2 * i] = r.re;
        b[2 * i + 1] = r.im;
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13).map_err(|_| Error::IllConditioned { residual: f64::NAN })?;
    let fit = &a * &x;
    let scale = b.iter().fold(1e-300f64, |s, v| s.max(v.abs()));
    let res = (fit - &b).iter().fold(0.0f64, |s, v| s.max(v.abs())) / scale.max(1.0);
    Ok((x.iter().copied().collect(), res))
}

/// Per-sphere masses `a_n(nu)`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialDistribution {
    pub steps: usize,
    pub masses: BTreeMap<Coords, f64>,
}

impl RadialDistribution {
    pub fn total(&self) -> f64 {
        // compensated summation
        let mut s = 0.0;
        let mut c = 0.0;
        for v in self.masses.values() {
            let y = v - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    }
}

/// Dense evolution of a radial distribution on the box `0 <= a_i <= radius`, optionally
/// tilted: `b_n(nu) = zeta^{-n} a_n(nu) chi^{-1/2}(nu)`. Mass leaving the box is dropped.
pub struct RadialEngine {
    rank: usize,
    radius: usize,
    side: usize,
    strides: Vec<usize>,
    cur: Vec<f64>,
    next: Vec<f64>,
    class_of: Vec<u32>,
    /// per class: (flat offset, weight)
    moves: Vec<Vec<(usize, f64)>>,
    pub steps: usize,
}

impl RadialEngine {
    pub fn new(h: &HeckeContext, walk: &IsotropicWalk, radius: usize, zeta: f64, tilt: bool) -> Result<Self> {
        let d = h.datum();
        let r = d.rank;
        let caps = h.walk_caps(walk)?;
        let pad = caps.iter().copied().max().unwrap_or(0) as usize + 1;
        let side = radius + pad + 1;
        let mut strides = vec![1usize; r];
        for i in 1..r {
            strides[i] = strides[i - 1] * side;
        }
        let cells = side.checked_pow(r as u32).ok_or(Error::SupportOverflow { cap: usize::MAX })?;
        if cells > 400_000_000 {
            return Err(Error::SupportOverflow { cap: 400_000_000 });
        }
        // classes indexed in mixed radix over capped coordinates
        let radix: Vec<usize> = caps.iter().map(|&c| c as usize + 1).collect();
        let nclasses: usize = radix.iter().product();
        let mut moves = Vec::with_capacity(nclasses);
        for id in 0..nclasses {
            let mut rem = id;
            let class: Coords = radix
                .iter()
                .map(|&b| {
                    let v = rem % b;
                    rem /= b;
                    v as i64
                })
                .collect();
            let tr = h.walk_transitions(walk, &class)?;
            let mut mv = Vec::with_capacity(tr.len());
            for (g, w) in tr {
                let mut off: i64 = 0;
                for i in 0..r {
                    off += g[i] * strides[i] as i64;
                }
                let weight = if tilt {
                    w / zeta * d.chi_pow(&from_coords(d, &g), -0.5)
                } else {
                    w / zeta
                };
                // offsets may be negative; stored as wrapping add
                mv.push((off as usize, weight));
            }
            moves.push(mv);
        }
        let mut class_of = vec![0u32; cells];
        let mut coords = vec![0usize; r];
        for (idx, slot) in class_of.iter_mut().enumerate() {
            let mut rem = idx;
            for i in 0..r {
                coords[i] = rem % side;
                rem /= side;
            }
            let mut id = 0usize;
            let mut mul = 1usize;
            for i in 0..r {
                id += coords[i].min(caps[i] as usize) * mul;
                mul *= radix[i];
            }
            *slot = id as u32;
        }
        let mut cur = vec![0.0; cells];
        cur[0] = 1.0;
        Ok(RadialEngine { rank: r, radius, side, strides, cur, next: vec![0.0; cells], class_of, moves, steps: 0 })
    }

    fn in_box(&self, idx: usize) -> bool {
        let mut rem = idx;
        for _ in 0..self.rank {
            if rem % self.side > self.radius {
                return false;
            }
            rem /= self.side;
        }
        true
    }

    pub fn step(&mut self) {
        for v in self.next.iter_mut() {
            *v = 0.0;
        }
        for idx in 0..self.cur.len() {
            let v = self.cur[idx];
            if v == 0.0 {
                continue;
            }
            for &(off, w) in &self.moves[self.class_of[idx] as usize] {
                let t = idx.wrapping_add(off);
                self.next[t] += v * w;
            }
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        // drop everything outside the box
        for idx in 0..self.cur.len() {
            if self.cur[idx] != 0.0 && !self.in_box(idx) {
                self.cur[idx] = 0.0;
            }
        }
        self.steps += 1;
    }

    pub fn index(&self, c: &[i64]) -> Option<usize> {
        if c.iter().any(|&x| x < 0 || x as usize > self.radius) {
            return None;
        }
        Some(c.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum())
    }

    pub fn value(&self, c: &[i64]) -> f64 {
        self.index(c).map_or(0.0, |i| self.cur[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.cur
    }

    pub fn entries(&self) -> Vec<(Coords, f64)> {
        let mut out = Vec::new();
        for idx in 0..self.cur.len() {
            if !self.in_box(idx) {
                continue;
            }
            let mut rem = idx;
            let mut c = Vec::with_capacity(self.rank);
            for _ in 0..self.rank {
                c.push((rem % self.side) as i64);
                rem /= self.side;
            }
            out.push((c, self.cur[idx]));
        }
        out
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// Exact constants for the `(q+1)`-regular tree: `A_1 A_n = q/(q+1) A_{n+1} + 1/(q+1) A_{n-1}`.
pub fn tree_constants(q: u64, n: usize) -> Vec<(usize, BigRational)> {
    let qb = BigRational::from_integer(BigInt::from(q));
    let one = BigRational::one();
    if n == 0 {
        return vec![(1, one)];
    }
    vec![(n - 1, one.clone() / (qb.clone() + one.clone())), (n + 1, qb.clone() / (qb + one))]
}

/// Exact `a_n` on the `(q+1)`-regular tree for the walk `sum_k c_k A_{k lambda_1}`, where
/// `weights[k]` is the weight of `A_k`.
pub fn tree_radial_exact(q: u64, weights: &[BigRational], n: usize) -> Vec<BigRational> {
    // express each A_k as a polynomial in A_1 acting on distributions
    let one_step = |a: &Vec<BigRational>| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len() + 1];
        for (m, v) in a.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for (t, c) in tree_constants(q, m) {
                out[t] += v * &c;
            }
        }
        out
    };
    // A_k applied to a distribution: A_k = (A_1 A_{k-1} - 1/(q+1) A_{k-2}) (q+1)/q
    let qb = BigRational::from_integer(BigInt::from(q));
    let one = BigRational::one();
    let apply_k = |a: &Vec<BigRational>, k: usize| -> Vec<BigRational> {
        // sphere operators satisfy the same recursion as their action on distributions
        let mut prev: Vec<BigRational> = a.clone();
        if k == 0 {
            return prev;
        }
        let mut cur = one_step(a);
        for _ in 2..=k {
            let mut nxt = one_step(&cur);
            for (m, v) in prev.iter().enumerate() {
                nxt[m] -= v * (one.clone() / (qb.clone() + one.clone()));
            }
            for v in nxt.iter_mut() {
                *v = v.clone() * (qb.clone() + one.clone()) / qb.clone();
            }
            prev = cur;
            cur = nxt;
        }
        cur
    };
    let mut a = vec![BigRational::one()];
    for _ in 0..n {
        let mut out: Vec<BigRational> = Vec::new();
        for (k, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let b = apply_k(&a, k);
            if out.len() < b.len() {
                out.resize(b.len(), BigRational::zero());
            }
            for (m, v) in b.iter().enumerate() {
                out[m] += v * w;
            }
        }
        while out.len() > 1 && out.last().is_some_and(|v| v.is_zero()) {
            out.pop();
        }
        a = out;
    }
    a
}

/// One CSV row of a structure-constant table.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantRow {
    pub lambda: String,
    pub mu: String,
    pub nu: String,
    pub value: f64,
    pub residual: f64,
}

pub fn constant_rows(lambda: &[i64], mu: &[i64], table: &[(Coords, f64, f64)]) -> Vec<ConstantRow> {
    let fmt = |c: &[i64]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    table
        .iter()
        .map(|(nu, v, r)| ConstantRow { lambda: fmt(lambda), mu: fmt(mu), nu: fmt(nu), value: *v, residual: *r })
        .collect()
}
