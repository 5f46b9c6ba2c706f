//! Harmonic measures on the maximal boundary: shadows, Radon-Nikodym derivatives,
//! wall-vector level sets, and Furstenberg limits.
//!
//! Everything here is exact. The reference engine is a count of minimal galleries from
//! the base chamber to the vertices of a deep sphere `V_Lambda(x)`, carried out in the
//! model apartment by tracking where `y` lands after each fold.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use crate::apartment::wall_panel_type;
use crate::apartment::{horocycle_h, ApartmentPoint, CoreSpec, VertexClass};
use crate::error::{Error, Result};
use crate::root_data::{RootDatum, WeylElement};
use crate::vector::{big_to_f64, q, qi, solve_exact, Vector, Q};

/// An exact boundary measure with the steps that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMeasureValue {
    pub value: BigRational,
    pub trace: Vec<String>,
}

impl BoundaryMeasureValue {
    fn new(value: BigRational, trace: Vec<String>) -> Self {
        BoundaryMeasureValue { value, trace }
    }
}

/// `nu_x(Omega(x, y)) = 1/N_lambda` for `sigma(x, y) = lambda`.
pub fn nu_shadow(d: &RootDatum, lambda: &Vector, twisted: bool) -> Result<BigRational> {
    Ok(d.n_lambda(lambda, twisted)?.recip())
}

// ---- Radon-Nikodym derivatives ----

/// `d nu_y / d nu_x` at the boundary point `omega_w`.
pub fn rn_derivative(d: &RootDatum, x: &ApartmentPoint, y: &ApartmentPoint, w: &WeylElement) -> Result<BigRational> {
    let h = horocycle_h(x, y, w)?;
    match (x.class(d), y.class(d)) {
        (VertexClass::Good, VertexClass::Good) | (VertexClass::EpsGood, VertexClass::EpsGood) => d.chi_exact(&h),
        (VertexClass::Good, VertexClass::EpsGood) => Ok(eps_factor(d)? * d.chi_exact(&(&h + &half_lambda_r(d)))?),
        (VertexClass::EpsGood, VertexClass::Good) => Ok(d.chi_exact(&(&h - &half_lambda_r(d)))? / eps_factor(d)?),
        (cx, cy) => Err(Error::InvalidConfiguration(format!(
            "Radon-Nikodym derivatives need good or eps-good vertices, got {:?} and {:?}",
            cx, cy
        ))),
    }
}

fn half_lambda_r(d: &RootDatum) -> Vector {
    d.coweight(d.rank).scale(q(1, 2))
}

/// `(W(q^-1)/W(q_eps^-1)) * q_{eps; w_0r} / q_{eps; w_0}`.
fn eps_factor(d: &RootDatum) -> Result<BigRational> {
    let tw = d.params.twisted().q;
    let ratio = d.poincare_full()? / d.poincare_full_with(&tw)?;
    let jr: Vec<usize> = (1..d.rank).collect();
    let w0r = d
        .parabolic(&jr)?
        .into_iter()
        .max_by_key(|w| w.len())
        .ok_or_else(|| Error::InvalidConfiguration("empty parabolic subgroup".into()))?;
    Ok(ratio * w0r.q_w(&tw) / d.weyl.longest.q_w(&tw))
}

// ---- walls and the gallery count ----

/// Spacing of the parallel walls orthogonal to the indivisible root `beta`.
fn level_step(d: &RootDatum, beta: &Vector) -> Q {
    if d.is_root(&beta.scale(qi(2))) {
        q(1, 2)
    } else {
        qi(1)
    }
}

/// Thickness `q_H` of the wall `<v, beta> = level`, `beta` indivisible.
pub fn wall_thickness(d: &RootDatum, beta: &Vector, level: Q) -> Result<u64> {
    let (root, k) = if d.is_positive(beta) { (beta.clone(), level) } else { (-beta.clone(), -level) };
    let i = if k.is_integer() {
        wall_panel_type(d, &root, k)?
    } else {
        wall_panel_type(d, &root.scale(qi(2)), k * qi(2))?
    };
    Ok(d.params.q[i])
}

/// Walls strictly separating `a` (generic) from `b`, in crossing order; `None` when the
/// segment meets two walls at once.
fn crossed_walls(d: &RootDatum, a: &Vector, b: &Vector) -> Option<Vec<(usize, Q)>> {
    let mut out: Vec<(Q, usize, Q)> = Vec::new();
    for (idx, beta) in d.indivisible.iter().enumerate() {
        let sa = a.dot(beta);
        let sb = b.dot(beta);
        if sa == sb {
            continue;
        }
        let st = level_step(d, beta);
        let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
        let jmin = (lo / st).floor().to_integer() + 1;
        let jmax = (hi / st).ceil().to_integer() - 1;
        for j in jmin..=jmax {
            let l = st * qi(j);
            out.push(((l - sa) / (sb - sa), idx, l));
        }
    }
    out.sort();
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    Some(out.into_iter().map(|(_, idx, l)| (idx, l)).collect())
}

/// Small generic offsets into the open alcove at `x` in the dominant direction.
fn generic_points(d: &RootDatum, x: &Vector) -> Vec<Vector> {
    const PRIMES: [i64; 12] = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157];
    let height: i64 = d.root_coords(&d.highest).iter().map(|c| c.to_integer()).sum();
    (0..4)
        .map(|shift| {
            let c: Vec<Q> = (0..d.rank).map(|i| q(1, 4 * height * PRIMES[(i + 3 * shift) % PRIMES.len()])).collect();
            x + &d.from_coweight_coords(&c)
        })
        .collect()
}

fn in_segment(t: Q, s: Q) -> bool {
    if s.is_negative() {
        t <= Q::zero() && t >= s
    } else {
        t >= Q::zero() && t <= s
    }
}

/// Whether `p` lies in `conv(x, z)` in the apartment.
fn in_conv(d: &RootDatum, x: &Vector, z: &Vector, p: &Vector) -> bool {
    d.indivisible.iter().all(|a| in_segment((p - x).dot(a), (z - x).dot(a)))
}

/// Default radius of the deep sphere used by [`region_measure`].
fn default_depth(d: &RootDatum, x: &Vector, pts: &[&Vector]) -> i64 {
    let span = pts
        .iter()
        .flat_map(|p| d.indivisible.iter().map(move |a| (*p - x).dot(a).abs()))
        .max()
        .unwrap_or_else(Q::zero);
    2 * span.ceil().to_integer() + 3
}

/// `nu_y({omega : region subset [x, omega]})` for a good vertex `x`, a good vertex `y`
/// and finitely many apartment points `region` (taken with their convex hull).
///
/// Sums `chi(Lambda - sigma(y, z'))/N_Lambda` over the vertices `z'` of the sphere of
/// radius `Lambda = depth * rho^vee` whose hull with `x` contains the region. `depth`
/// defaults to a value past the extent of the data.
pub fn region_measure(d: &RootDatum, x: &Vector, y: &Vector, region: &[Vector], depth: Option<i64>) -> Result<BigRational> {
    let mut pts: Vec<&Vector> = region.iter().collect();
    pts.push(y);
    let depth = depth.unwrap_or_else(|| default_depth(d, x, &pts));
    let big = d.rho_vee().scale(qi(depth));
    let n_big = d.n_lambda(&big, false)?;
    let mut thickness: HashMap<(usize, Q), u64> = HashMap::new();
    let mut chi_memo: BTreeMap<Vector, BigRational> = BTreeMap::new();
    let mut total = BigRational::zero();
    for w in d.elements()? {
        let zb = x + &w.apply(&big);
        if !region.iter().all(|p| in_conv(d, x, &zb, p)) {
            continue;
        }
        let (p0, walls) = generic_points(d, x)
            .into_iter()
            .find_map(|p0| crossed_walls(d, &p0, &zb).map(|ws| (p0, ws)))
            .ok_or_else(|| Error::InvalidConfiguration("no generic base point found".into()))?;
        let mut states: BTreeMap<Vector, BigInt> = BTreeMap::new();
        states.insert(y.clone(), BigInt::one());
        for (idx, level) in walls {
            let beta = &d.indivisible[idx];
            let near = (p0.dot(beta) - level).signum();
            let exit_ok = region.iter().all(|p| {
                let s = (p.dot(beta) - level).signum();
                s.is_zero() || s == near
            });
            if !exit_ok {
                continue;
            }
            let qh = match thickness.get(&(idx, level)) {
                Some(&v) => v,
                None => {
                    let v = wall_thickness(d, beta, level)?;
                    thickness.insert((idx, level), v);
                    v
                }
            };
            let exits = BigInt::from(qh - 1);
            let mut next: BTreeMap<Vector, BigInt> = BTreeMap::new();
            for (yh, c) in states {
                let s = (yh.dot(beta) - level).signum();
                let folded = if s == -near { yh.reflect(beta, level) } else { yh.clone() };
                *next.entry(folded).or_insert_with(BigInt::zero) += &c * &exits;
                *next.entry(yh).or_insert_with(BigInt::zero) += c;
            }
            states = next;
        }
        for (yh, c) in states {
            let arg = &big - &d.dominant(&(&zb - &yh));
            let chi = match chi_memo.get(&arg) {
                Some(v) => v.clone(),
                None => {
                    let v = d.chi_exact(&arg)?;
                    chi_memo.insert(arg, v.clone());
                    v
                }
            };
            total += BigRational::from_integer(c) * chi;
        }
    }
    Ok(total / n_big)
}

fn require_good(p: &ApartmentPoint) -> Result<()> {
    if p.good {
        Ok(())
    } else {
        Err(Error::InvalidConfiguration(format!("{} is not a good vertex", p.coords)))
    }
}

/// `nu_y(Omega(x, z))` for good vertices of the model apartment.
pub fn nu_y_shadow_points(d: &RootDatum, x: &ApartmentPoint, y: &ApartmentPoint, z: &ApartmentPoint) -> Result<BigRational> {
    require_good(x)?;
    require_good(y)?;
    require_good(z)?;
    region_measure(d, &x.coords, &y.coords, std::slice::from_ref(&z.coords), None)
}

// ---- level sets ----

/// A wall-vector level set `Omega(x, omega_w; n)`; `n` is indexed like `d.indivisible`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSetDescriptor {
    pub x: Vector,
    pub w: WeylElement,
    pub n: Vec<i64>,
}

type Constraint = (Vec<Q>, Q);

fn pairing_row(d: &RootDatum, a: &Vector) -> Vec<Q> {
    d.root_coords(a)
}

fn dot_row(a: &[Q], c: &[Q]) -> Q {
    a.iter().zip(c).map(|(x, y)| *x * *y).sum()
}

/// Vertices of a bounded polytope `{c : a.c <= b}` in `Q^r`.
fn polytope_vertices(rank: usize, cons: &[Constraint]) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    let mut pick = vec![0usize; rank];
    fn rec(k: usize, start: usize, rank: usize, cons: &[Constraint], pick: &mut Vec<usize>, out: &mut Vec<Vec<Q>>) {
        if k == rank {
            let a: Vec<Vec<Q>> = pick.iter().map(|&i| cons[i].0.clone()).collect();
            let b: Vec<Q> = pick.iter().map(|&i| cons[i].1).collect();
            if let Some(c) = solve_exact(&a, &b) {
                if cons.iter().all(|(row, rhs)| dot_row(row, &c) <= *rhs) && !out.contains(&c) {
                    out.push(c);
                }
            }
            return;
        }
        for i in start..cons.len() {
            pick[k] = i;
            rec(k + 1, i + 1, rank, cons, pick, out);
        }
    }
    rec(0, 0, rank, cons, &mut pick, &mut out);
    out
}

/// Affine dimension of a finite point set.
fn affine_dim(pts: &[Vec<Q>]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let mut rows: Vec<Vec<Q>> = pts[1..].iter().map(|p| p.iter().zip(&pts[0]).map(|(a, b)| *a - *b).collect()).collect();
    let cols = rows[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            rows.swap(rank, piv);
            let p = rows[rank][col];
            for r in 0..rows.len() {
                if r != rank && !rows[r][col].is_zero() {
                    let f = rows[r][col] / p;
                    for c in col..cols {
                        let v = rows[rank][c];
                        rows[r][c] -= f * v;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

impl LevelSetDescriptor {
    pub fn new(d: &RootDatum, x: &ApartmentPoint, w: WeylElement, n: Vec<i64>) -> Result<Self> {
        require_good(x)?;
        if n.len() != d.indivisible.len() {
            return Err(Error::InvalidConfiguration(format!(
                "wall vector has {} entries, expected {}",
                n.len(),
                d.indivisible.len()
            )));
        }
        if n.iter().any(|&v| v < 0) {
            return Err(Error::InvalidConfiguration("wall vector entries must be non-negative".into()));
        }
        Ok(LevelSetDescriptor { x: x.coords.clone(), w, n })
    }

    /// Level set at the origin in the fundamental sector.
    pub fn standard(d: &RootDatum, n: Vec<i64>) -> Result<Self> {
        Self::new(d, &ApartmentPoint::origin(d), WeylElement::identity(d.dim), n)
    }

    /// The consistent vector `n_alpha = <lambda, alpha>` of a shadow.
    pub fn consistent_vector(d: &RootDatum, lambda: &Vector) -> Result<Vec<i64>> {
        if !d.is_dominant(lambda) || !d.in_coweight_lattice(lambda) {
            return Err(Error::NotDominant(lambda.clone()));
        }
        Ok(d.indivisible.iter().map(|a| lambda.dot(a).to_integer()).collect())
    }

    fn with_n(&self, n: Vec<i64>) -> Self {
        LevelSetDescriptor { x: self.x.clone(), w: self.w.clone(), n }
    }

    fn simple_indices(d: &RootDatum) -> Vec<usize> {
        (1..=d.rank)
            .map(|i| d.indivisible.iter().position(|a| a == d.simple_root(i)).expect("simple roots are indivisible"))
            .collect()
    }

    /// Whether `n_alpha = sum_j n_{alpha_j} <alpha, lambda_j>` for every `alpha`.
    pub fn is_consistent(&self, d: &RootDatum) -> bool {
        let y = self.envelope_point(d);
        d.indivisible.iter().zip(&self.n).all(|(a, &v)| y.dot(a) == qi(v))
    }

    /// `sum_j n_{alpha_j} lambda_j` in sector coordinates.
    fn envelope_point(&self, d: &RootDatum) -> Vector {
        let c: Vec<Q> = Self::simple_indices(d).iter().map(|&i| qi(self.n[i])).collect();
        d.from_coweight_coords(&c)
    }

    /// The region `S_0 cap bigcap H^-_{alpha; n_alpha}` in coweight coordinates.
    fn region_constraints(&self, d: &RootDatum) -> Vec<Constraint> {
        let mut cons: Vec<Constraint> = (0..d.rank)
            .map(|i| {
                let mut row = vec![Q::zero(); d.rank];
                row[i] = -Q::one();
                (row, Q::zero())
            })
            .collect();
        for (a, &v) in d.indivisible.iter().zip(&self.n) {
            cons.push((pairing_row(d, a), qi(v)));
        }
        cons
    }

    fn vertex_coords(&self, d: &RootDatum) -> Vec<Vec<Q>> {
        polytope_vertices(d.rank, &self.region_constraints(d))
    }

    /// Vertices of `[x, omega_w] cap bigcap H^-_{alpha; n_alpha}` in the apartment.
    pub fn region_vertices(&self, d: &RootDatum) -> Vec<Vector> {
        self.vertex_coords(d)
            .iter()
            .map(|c| &self.x + &self.w.apply(&d.from_coweight_coords(c)))
            .collect()
    }

    /// The smallest wall vector describing the same region.
    pub fn tightened(&self, d: &RootDatum) -> Self {
        let verts = self.vertex_coords(d);
        let n = d
            .indivisible
            .iter()
            .map(|a| {
                let row = pairing_row(d, a);
                verts.iter().map(|c| dot_row(&row, c)).max().unwrap_or_else(Q::zero).ceil().to_integer()
            })
            .collect();
        self.with_n(n)
    }

    /// `beta` is active when dropping its half-apartment enlarges `bigcap H^-_{alpha; n_alpha}`.
    pub fn active(&self, d: &RootDatum, beta: usize) -> bool {
        let total: i64 = self.n.iter().sum();
        let bound = qi(1000 * (total + 1));
        let mut cons: Vec<Constraint> = Vec::new();
        for (k, (a, &v)) in d.indivisible.iter().zip(&self.n).enumerate() {
            let row = pairing_row(d, a);
            cons.push((row.clone(), if k == beta { bound } else { qi(v) }));
            cons.push((row.iter().map(|x| -*x).collect(), bound));
        }
        let row = pairing_row(d, &d.indivisible[beta]);
        polytope_vertices(d.rank, &cons).iter().any(|c| dot_row(&row, c) > qi(self.n[beta]))
    }

    pub fn active_walls(&self, d: &RootDatum) -> Vec<usize> {
        (0..self.n.len()).filter(|&b| self.active(d, b)).collect()
    }

    /// Active here or after lowering `n_beta` by one.
    pub fn supporting(&self, d: &RootDatum, beta: usize) -> bool {
        if self.active(d, beta) {
            return true;
        }
        if self.n[beta] == 0 {
            return false;
        }
        let mut n = self.n.clone();
        n[beta] -= 1;
        self.with_n(n).active(d, beta)
    }

    /// Thickness of the wall `H_{beta; level}` of the sector frame, read in the apartment.
    fn frame_wall_thickness(&self, d: &RootDatum, beta: usize, level: i64) -> Result<u64> {
        let root = self.w.apply(&d.indivisible[beta]);
        wall_thickness(d, &root, qi(level) + self.x.dot(&root))
    }

    /// One recursion step `n -> n - e_beta` is usable when the lowered region is a full
    /// chamber complex with a facet on the cutting wall.
    fn step_is_thick(&self, d: &RootDatum, beta: usize) -> bool {
        if self.n[beta] == 0 {
            return false;
        }
        let mut n = self.n.clone();
        n[beta] -= 1;
        let lower = self.with_n(n);
        if lower.tightened(d) != lower {
            return false;
        }
        let verts = lower.vertex_coords(d);
        if affine_dim(&verts) != d.rank {
            return false;
        }
        let row = pairing_row(d, &d.indivisible[beta]);
        let facet: Vec<Vec<Q>> = verts.into_iter().filter(|c| dot_row(&row, c) == qi(lower.n[beta])).collect();
        affine_dim(&facet) + 1 == d.rank
    }
}

/// `nu_x(Omega(x, omega_0; n))` via the gallery count.
pub fn level_measure_by_galleries(d: &RootDatum, desc: &LevelSetDescriptor) -> Result<BigRational> {
    region_measure(d, &desc.x, &desc.x, &desc.region_vertices(d), None)
}

/// `nu_x(Omega(x, omega_0; n))` by the recursion `nu(n - e_beta) = q_i nu(n)` from the
/// consistent envelope, trying walls in the given order. `None` when every route runs
/// into a thin step.
pub fn level_measure_by_recursion(
    d: &RootDatum,
    desc: &LevelSetDescriptor,
    reverse: bool,
) -> Result<Option<(BigRational, Vec<String>)>> {
    let target = desc.tightened(d);
    let env_point = target.envelope_point(d);
    let envelope = target.with_n(LevelSetDescriptor::consistent_vector(d, &env_point)?);
    let start = nu_shadow(d, &env_point, false)?;
    let mut trace = vec![format!("envelope {:?}: 1/N = {}", envelope.n, start)];
    let mut order: Vec<usize> = (0..desc.n.len()).collect();
    if reverse {
        order.reverse();
    }
    fn descend(
        d: &RootDatum,
        cur: &LevelSetDescriptor,
        target: &LevelSetDescriptor,
        order: &[usize],
        trace: &mut Vec<String>,
    ) -> Result<Option<BigRational>> {
        if cur.n == target.n {
            return Ok(Some(BigRational::one()));
        }
        for &b in order {
            if cur.n[b] > target.n[b] && cur.step_is_thick(d, b) {
                let qi_ = cur.frame_wall_thickness(d, b, cur.n[b] - 1)?;
                let mut n = cur.n.clone();
                n[b] -= 1;
                let next = cur.with_n(n);
                trace.push(format!("lower wall {} to {}: factor {}", b, next.n[b], qi_));
                if let Some(f) = descend(d, &next, target, order, trace)? {
                    return Ok(Some(f * BigRational::from_integer(BigInt::from(qi_))));
                }
                trace.pop();
            }
        }
        Ok(None)
    }
    match descend(d, &envelope, &target, &order, &mut trace)? {
        Some(f) => Ok(Some((start * f, trace))),
        None => Ok(None),
    }
}

/// `nu_x(Omega(x, omega_0; n))`: the recursion when every step is thick, otherwise the
/// gallery count.
pub fn level_measure(d: &RootDatum, desc: &LevelSetDescriptor) -> Result<BoundaryMeasureValue> {
    if let Some((v, mut trace)) = level_measure_by_recursion(d, desc, false)? {
        trace.push(format!("recursion value {}", v));
        return Ok(BoundaryMeasureValue::new(v, trace));
    }
    let v = level_measure_by_galleries(d, desc)?;
    Ok(BoundaryMeasureValue::new(v.clone(), vec![format!("thin region {:?}: gallery count {}", desc.tightened(d).n, v)]))
}

/// `nu_x(Theta(x, omega_0; n))` by inclusion-exclusion over the active walls.
pub fn theta_measure(d: &RootDatum, desc: &LevelSetDescriptor) -> Result<BoundaryMeasureValue> {
    let act = desc.active_walls(d);
    let mut total = BigRational::zero();
    let mut trace = vec![format!("active walls {:?}", act)];
    for mask in 0u64..(1u64 << act.len()) {
        let mut n = desc.n.clone();
        for (k, &b) in act.iter().enumerate() {
            if mask & (1 << k) != 0 {
                n[b] += 1;
            }
        }
        let v = level_measure(d, &desc.with_n(n.clone()))?.value;
        trace.push(format!("{} nu{:?} = {}", if mask.count_ones() % 2 == 0 { "+" } else { "-" }, n, v));
        if mask.count_ones() % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    Ok(BoundaryMeasureValue::new(total, trace))
}

/// The value `eta_n` of `h(x, y; .)` on `Theta(x, omega_0; n)`: fold `y` across the walls
/// of `bigcap H^-_{alpha; n_alpha}` that separate it from the region.
pub fn eta_fold(d: &RootDatum, desc: &LevelSetDescriptor, y: &Vector) -> Result<Vector> {
    let mut cur = desc.w.apply_inverse(&(y - &desc.x));
    let p0 = &generic_points(d, &Vector::zero(d.dim))[0];
    let rho = d.rho_vee();
    let mut walls: Vec<(Q, usize)> = d
        .indivisible
        .iter()
        .zip(&desc.n)
        .enumerate()
        .map(|(k, (a, &v))| ((qi(v) - p0.dot(a)) / rho.dot(a), k))
        .collect();
    walls.sort();
    let budget = 64 * walls.len().max(1);
    let mut folds = 0;
    loop {
        let mut changed = false;
        for &(_, k) in &walls {
            let a = &d.indivisible[k];
            let level = qi(desc.n[k]);
            if cur.dot(a) > level {
                cur = cur.reflect(a, level);
                changed = true;
                folds += 1;
                if folds > budget {
                    return Err(Error::InvalidConfiguration("folding did not terminate within the wall budget".into()));
                }
            }
        }
        if !changed {
            return Ok(cur);
        }
    }
}

/// `m_alpha = max(<lambda, alpha>, <mu, alpha>)`.
fn max_vector(d: &RootDatum, lambda: &Vector, mu: &Vector) -> Vec<i64> {
    d.indivisible.iter().map(|a| lambda.dot(a).max(mu.dot(a)).to_integer()).collect()
}

/// `nu_y(Omega(x, z))` as a function of `lambda = sigma(x, y)` and `mu = sigma(x, z)`,
/// realized with `x = o`, `y = lambda`, `z = mu` in the fundamental sector.
pub fn nu_y_shadow(d: &RootDatum, lambda: &Vector, mu: &Vector) -> Result<BoundaryMeasureValue> {
    for v in [lambda, mu] {
        if !d.is_dominant(v) || !d.in_coweight_lattice(v) {
            return Err(Error::NotDominant(v.clone()));
        }
    }
    let o = ApartmentPoint::origin(d);
    let m = max_vector(d, lambda, mu);
    let v = nu_y_shadow_points(d, &o, &ApartmentPoint::new(d, lambda.clone()), &ApartmentPoint::new(d, mu.clone()))?;
    let trace = vec![
        format!("lambda = {}, mu = {}, m = {:?}", lambda, mu, m),
        format!("gallery count {}", v),
    ];
    Ok(BoundaryMeasureValue::new(v, trace))
}

// ---- Furstenberg limits ----

/// How a Furstenberg limit was certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilization {
    /// The exact values agree over three consecutive horizons.
    Exact,
    /// Exact Shanks transforms of one order agree over three consecutive horizons.
    Accelerated,
    /// Successive values differ by less than the Cauchy tolerance.
    Cauchy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FurstenbergLimit {
    pub value: BigRational,
    pub horizon: u32,
    pub certificate: Stabilization,
    pub sequence: Vec<BigRational>,
    /// Harmonic measure of the shadow's trace on the facade, when defined.
    pub facade: Option<BigRational>,
}

/// Even columns of the exact Wynn epsilon table; column `k` holds the order-`k`
/// Shanks transforms, ending at the latest term. Columns stop at a zero difference.
fn shanks_columns(seq: &[BigRational], max_order: usize) -> Vec<Vec<BigRational>> {
    let mut prev: Vec<Option<BigRational>> = vec![Some(BigRational::zero()); seq.len() + 1];
    let mut cur: Vec<Option<BigRational>> = seq.iter().cloned().map(Some).collect();
    let mut out = Vec::new();
    for k in 1..=2 * max_order {
        if cur.len() < 2 {
            break;
        }
        let next: Vec<Option<BigRational>> = (0..cur.len() - 1)
            .map(|i| match (&prev[i + 1], &cur[i], &cur[i + 1]) {
                (Some(p), Some(a), Some(b)) if a != b => Some(p + (b - a).recip()),
                _ => None,
            })
            .collect();
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            out.push(cur.iter().rev().map_while(|x| x.clone()).collect::<Vec<_>>().into_iter().rev().collect());
        }
    }
    out
}

fn contracting(seq: &[BigRational], window: usize) -> bool {
    if seq.len() < window + 1 {
        return false;
    }
    let diffs: Vec<BigRational> = seq.windows(2).map(|w| (&w[1] - &w[0]).abs()).collect();
    diffs[diffs.len() - window..].windows(2).all(|w| w[1] < w[0])
}

/// `lim nu_{x_n}(Omega(o, y))` along the core sequence of `spec`, with `o` the origin.
pub fn furstenberg_limit(d: &RootDatum, spec: &CoreSpec, y: &ApartmentPoint, max_n: u32) -> Result<FurstenbergLimit> {
    if spec.eps {
        return Err(Error::Unsupported("Furstenberg limits along eps-good sequences".into()));
    }
    let o = ApartmentPoint::origin(d);
    let mut seq: Vec<BigRational> = Vec::new();
    let facade = facade_value(d, spec, y)?;
    for n in 1..=max_n {
        let xn = spec.generate(d, n)?;
        seq.push(nu_y_shadow_points(d, &o, &xn, y)?);
        let k = seq.len();
        if k >= 3 {
            if seq[k - 1] == seq[k - 2] && seq[k - 2] == seq[k - 3] {
                return Ok(FurstenbergLimit {
                    value: seq[k - 1].clone(),
                    horizon: n,
                    certificate: Stabilization::Exact,
                    sequence: seq,
                    facade,
                });
            }
            if contracting(&seq, 4) {
                for col in shanks_columns(&seq, 3) {
                    let c = col.len();
                    if c >= 3 && col[c - 1] == col[c - 2] && col[c - 2] == col[c - 3] {
                        return Ok(FurstenbergLimit {
                            value: col[c - 1].clone(),
                            horizon: n,
                            certificate: Stabilization::Accelerated,
                            sequence: seq,
                            facade,
                        });
                    }
                }
            }
        }
    }
    let k = seq.len();
    if k >= 2 && big_to_f64(&(&seq[k - 1] - &seq[k - 2]).abs()) < 1e-10 {
        return Ok(FurstenbergLimit {
            value: seq[k - 1].clone(),
            horizon: max_n,
            certificate: Stabilization::Cauchy,
            sequence: seq,
            facade,
        });
    }
    let est = if k >= 2 { big_to_f64(&(&seq[k - 1] - &seq[k - 2]).abs()) } else { f64::INFINITY };
    Err(Error::Extrapolation { estimate: est })
}

/// Harmonic measure, on the facade of the residue the sequence converges to, of the
/// trace of `Omega(o, y)`; `None` when the sub-datum is not irreducible.
pub fn facade_value(d: &RootDatum, spec: &CoreSpec, y: &ApartmentPoint) -> Result<Option<BigRational>> {
    let yl = spec.w.apply_inverse(&y.coords);
    let sub_pos = d.sub_positive(&spec.j);
    let meets = d.positive.iter().filter(|a| !sub_pos.contains(a)).all(|a| !yl.dot(a).is_negative());
    if !meets {
        return Ok(Some(BigRational::zero()));
    }
    if spec.j.is_empty() {
        return Ok(Some(BigRational::one()));
    }
    let sub = match d.sub_datum(&spec.j) {
        Ok(s) => s,
        Err(Error::Unsupported(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let yf = d.proj_j(&spec.j, &yl)?.0;
    let xf = d.proj_j(&spec.j, &spec.sigma_n(d, 1)?)?.0;
    let o = ApartmentPoint::origin(&sub);
    let v = nu_y_shadow_points(&sub, &o, &ApartmentPoint::new(&sub, xf), &ApartmentPoint::new(&sub, yf))?;
    Ok(Some(v))
}

/// `1/N^{(J)}` of the `W_J`-dominant representative of `P_J v`, in the sub-datum.
pub fn facade_shadow(d: &RootDatum, j: &[usize], v: &Vector) -> Result<BigRational> {
    let sub = d.sub_datum(j)?;
    let p = sub.dominant(&d.proj_j(j, v)?.0);
    nu_shadow(&sub, &p, false)
}
