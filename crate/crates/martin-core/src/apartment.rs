//! The model apartment: vertices and their types, vectorial distance, horocycles,
//! core and angular sequences, and visual (Busemann) limits.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root_data::{RootDatum, RootType, WeylElement};
use crate::vector::{q, q_to_f64, qi, Vector, Q};

/// Fold `x` into the closed fundamental alcove; returns the image and the number of
/// reflections used.
pub fn fold_to_alcove(d: &RootDatum, x: &Vector) -> (Vector, usize) {
    let mut cur = x.clone();
    let mut steps = 0;
    loop {
        if let Some(i) = (0..d.rank).find(|&i| cur.dot(&d.simple[i]).is_negative()) {
            cur = cur.reflect(&d.simple[i], Q::zero());
        } else if cur.dot(&d.highest) > Q::one() {
            cur = cur.reflect(&d.highest, Q::one());
        } else {
            return (cur, steps);
        }
        steps += 1;
    }
}

/// Type of a vertex of the affine Coxeter complex, `None` for non-vertices.
pub fn vertex_type(d: &RootDatum, x: &Vector) -> Option<usize> {
    if !d.in_span(x) {
        return None;
    }
    let (y, _) = fold_to_alcove(d, x);
    if y.is_zero() {
        return Some(0);
    }
    (1..=d.rank).find(|&i| y == d.coweight(i).scale(Q::one() / qi(d.marks[i - 1])))
}

/// Whether a wall parallel to every root direction passes through `x`.
pub fn is_special(d: &RootDatum, x: &Vector) -> bool {
    d.in_span(x)
        && d.indivisible.iter().all(|a| {
            let p = x.dot(a);
            if d.is_root(&a.scale(qi(2))) {
                (p * qi(2)).is_integer()
            } else {
                p.is_integer()
            }
        })
}

/// Type of the panels carried by the wall `<x, beta> = k`, up to types of equal
/// thickness.
pub fn wall_panel_type(d: &RootDatum, beta: &Vector, k: Q) -> Result<usize> {
    let pos = d.is_positive(beta) && d.is_root(beta);
    if !pos {
        return Err(Error::InvalidConfiguration(format!("{} is not a positive root", beta)));
    }
    // translations by P preserve thickness classes; bring k into (0, g] with g the
    // gcd of the pairings <lambda_j, beta>
    let k = if k.is_zero() {
        k
    } else {
        let g = d
            .root_coords(beta)
            .iter()
            .fold(0i64, |acc, c| num_integer::gcd(acc, c.to_integer()));
        let g = qi(g);
        k - g * ((k / g).ceil() - Q::one())
    };
    let base = beta.coroot().scale(k / qi(2));
    // walls carry panels of several (equal-thickness) types; take the panel met by a
    // small generic dominant displacement inside the wall
    let gen_c: Vec<Q> = (0..d.rank).map(|i| qi(1) + q(1 + i as i64, 97 + 7 * i as i64)).collect();
    let gen = d.from_coweight_coords(&gen_c);
    let tangent = &gen - &beta.scale(gen.dot(beta) / beta.norm_sq());
    let p = &base + &tangent.scale(q(1, 1000));
    let (img, _) = fold_to_alcove(d, &p);
    if img.dot(&d.highest) == Q::one() {
        return Ok(0);
    }
    (1..=d.rank)
        .find(|&i| img.dot(d.simple_root(i)).is_zero())
        .ok_or_else(|| Error::InvalidConfiguration("wall reduction did not reach an alcove face".into()))
}

/// Vertex class used for lattice checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexClass {
    Good,
    /// Special vertices of type `r` in `BC_r`.
    EpsGood,
    Special,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApartmentPoint {
    pub coords: Vector,
    pub vertex_type: Option<usize>,
    pub special: bool,
    pub good: bool,
}

impl ApartmentPoint {
    pub fn new(d: &RootDatum, coords: Vector) -> Self {
        let vertex_type = vertex_type(d, &coords);
        let special = vertex_type.is_some() && is_special(d, &coords);
        let good = special && vertex_type.is_some_and(|t| d.good_types.contains(&t));
        ApartmentPoint { coords, vertex_type, special, good }
    }

    pub fn origin(d: &RootDatum) -> Self {
        Self::new(d, Vector::zero(d.dim))
    }

    pub fn from_coweights(d: &RootDatum, c: &[i64]) -> Self {
        Self::new(d, d.from_coweight_ints(c))
    }

    pub fn class(&self, d: &RootDatum) -> VertexClass {
        if self.good {
            VertexClass::Good
        } else if self.special && d.kind == RootType::BC && self.vertex_type == Some(d.rank) {
            VertexClass::EpsGood
        } else if self.special {
            VertexClass::Special
        } else {
            VertexClass::Other
        }
    }
}

fn require_special(p: &ApartmentPoint) -> Result<()> {
    if p.special {
        Ok(())
    } else {
        Err(Error::NotSpecial(p.coords.clone()))
    }
}

/// Vectorial distance `sigma(x, y)`.
pub fn sigma(d: &RootDatum, x: &ApartmentPoint, y: &ApartmentPoint) -> Result<Vector> {
    require_special(x)?;
    require_special(y)?;
    let s = d.dominant(&(&y.coords - &x.coords));
    let ok = if x.good && y.good { d.in_coweight_lattice(&s) } else { d.in_half_lattice(&s) };
    if !ok {
        return Err(Error::NotInLattice(s));
    }
    Ok(s)
}

/// Horocycle `h(x, y; omega_w) = w^{-1}(y - x)`.
pub fn horocycle_h(x: &ApartmentPoint, y: &ApartmentPoint, w: &WeylElement) -> Result<Vector> {
    require_special(x)?;
    require_special(y)?;
    Ok(w.apply_inverse(&(&y.coords - &x.coords)))
}

/// Growth schedule `g(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Linear,
    Pow2,
}

impl Schedule {
    pub fn g(self, n: u32) -> i64 {
        match self {
            Schedule::Linear => n as i64,
            Schedule::Pow2 => 1i64 << n.min(62),
        }
    }
}

/// Core (and optionally angular) sequence data `(omega, J, c[, u])`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreSpec {
    pub w: WeylElement,
    pub j: Vec<usize>,
    /// `c_j` aligned with `j`.
    pub c: Vec<Q>,
    pub schedule: Schedule,
    /// Direction `u` (not necessarily normalized), present for angular specs.
    pub u: Option<Vector>,
    /// Sequence of type-`r` special vertices in `BC_r`.
    pub eps: bool,
}

impl CoreSpec {
    pub fn new(d: &RootDatum, word: &[usize], j: &[usize], c: &[Q], schedule: Schedule) -> Result<Self> {
        d.check_proper(j)?;
        if j.len() != c.len() {
            return Err(Error::InvalidSpec("J and c have different lengths".into()));
        }
        let mut pairs: Vec<(usize, Q)> = j.iter().copied().zip(c.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidSpec("repeated index in J".into()));
        }
        for &(_, cj) in &pairs {
            if cj.is_negative() || !cj.is_integer() {
                return Err(Error::InvalidSpec(format!("c = {} is not a non-negative integer", cj)));
            }
        }
        if word.iter().any(|&i| i == 0 || i > d.rank) {
            return Err(Error::InvalidSpec("direction word uses an invalid letter".into()));
        }
        let w = d.element_from_matrix(&d.element_from_word(word).matrix);
        Ok(CoreSpec {
            w,
            j: pairs.iter().map(|p| p.0).collect(),
            c: pairs.iter().map(|p| p.1).collect(),
            schedule,
            u: None,
            eps: false,
        })
    }

    /// Angular extension; `u` must be dominant, orthogonal to `alpha_j` (`j in J`) and
    /// strictly positive on the other simple roots.
    pub fn with_direction(mut self, d: &RootDatum, u: Vector) -> Result<Self> {
        for i in 1..=d.rank {
            let p = u.dot(d.simple_root(i));
            if self.j.contains(&i) {
                if !p.is_zero() {
                    return Err(Error::InvalidSpec(format!("u pairs nonzero with alpha_{} for {} in J", i, i)));
                }
            } else if !p.is_positive() {
                return Err(Error::InvalidSpec(format!("u must pair positively with alpha_{} outside J", i)));
            }
        }
        if !d.in_span(&u) {
            return Err(Error::InvalidSpec("u lies outside the apartment".into()));
        }
        self.u = Some(u);
        Ok(self)
    }

    /// Switch to sequences of type-`r` special vertices of `BC_r` (half-integral `c`).
    pub fn with_eps(mut self, d: &RootDatum, c: &[Q]) -> Result<Self> {
        if d.kind != RootType::BC {
            return Err(Error::InvalidSpec("the eps class exists only for BC".into()));
        }
        if c.len() != self.j.len() || c.iter().any(|x| x.is_negative() || !(x * qi(2)).is_integer()) {
            return Err(Error::InvalidSpec("eps c values must lie in 1/2 N_0".into()));
        }
        self.c = c.to_vec();
        self.eps = true;
        Ok(self)
    }

    /// Unit direction in floating point.
    pub fn u_unit(&self) -> Option<Vec<f64>> {
        self.u.as_ref().map(|u| {
            let n = u.norm_f64();
            u.to_f64().iter().map(|x| x / n).collect()
        })
    }

    /// The dominant vector `sigma(o, x_n)`.
    pub fn sigma_n(&self, d: &RootDatum, n: u32) -> Result<Vector> {
        let g = self.schedule.g(n);
        let mut coords = vec![Q::zero(); d.rank];
        for (k, &j) in self.j.iter().enumerate() {
            coords[j - 1] = self.c[k];
        }
        match &self.u {
            None => {
                for i in 1..=d.rank {
                    if !self.j.contains(&i) {
                        coords[i - 1] = qi(g);
                    }
                }
            }
            Some(u) => {
                let n2 = q_to_f64(u.norm_sq()).sqrt();
                for i in 1..=d.rank {
                    if !self.j.contains(&i) {
                        let a = q_to_f64(u.dot(d.simple_root(i))) / n2;
                        coords[i - 1] = qi(((g as f64) * a).round().max(1.0) as i64);
                    }
                }
            }
        }
        let mut s = d.from_coweight_coords(&coords);
        if self.eps {
            // shift off-J coordinates by 1/2 so the point is a type-r special vertex
            let half = d.coweight(d.rank).scale(q(1, 2));
            let adjusted = &s + &half;
            if is_special(d, &adjusted) && d.is_dominant(&adjusted) && self.pins_hold(d, &adjusted) {
                s = adjusted;
            } else if !is_special(d, &s) {
                return Err(Error::InvalidSpec("eps spec does not generate special vertices".into()));
            }
        }
        Ok(s)
    }

    fn pins_hold(&self, d: &RootDatum, s: &Vector) -> bool {
        self.j.iter().zip(&self.c).all(|(&j, c)| s.dot(d.simple_root(j)) == *c)
    }

    /// The `n`-th point `x_n = w sigma(o, x_n)`.
    pub fn generate(&self, d: &RootDatum, n: u32) -> Result<ApartmentPoint> {
        let s = self.sigma_n(d, n)?;
        let p = ApartmentPoint::new(d, self.w.apply(&s));
        if !p.special {
            return Err(Error::InvalidSpec(format!("generated point {} is not special", p.coords)));
        }
        Ok(p)
    }
}

/// Whether two specs give the same limit kernels: same `J`, same `c`, directions in the
/// same `W_J`-coset with the offset fixing the pinned part `sum_J c_j lambda_j` (so the
/// façade limit points agree), and (above the spectrum) the same `u`.
pub fn spec_equivalent(d: &RootDatum, s1: &CoreSpec, s2: &CoreSpec, above: bool) -> Result<bool> {
    if s1.eps != s2.eps {
        return Err(Error::InvalidSpec("specs mix vertex classes".into()));
    }
    if s1.j != s2.j || s1.c != s2.c {
        return Ok(false);
    }
    let rel = s1.w.inverse().matrix.mul(&s2.w.matrix);
    let fixed: Vector = (1..=d.rank)
        .filter(|k| !s1.j.contains(k))
        .fold(Vector::zero(d.dim), |acc, k| &acc + d.coweight(k));
    if rel.apply(&fixed) != fixed {
        return Ok(false);
    }
    let pinned = s1.j.iter().zip(&s1.c).fold(Vector::zero(d.dim), |acc, (&j, c)| &acc + &d.coweight(j).scale(*c));
    if rel.apply(&pinned) != pinned {
        return Ok(false);
    }
    if above {
        match (&s1.u, &s2.u) {
            (Some(a), Some(b)) => {
                // positive proportionality
                let ab = a.dot(b);
                if !(ab.is_positive() && ab * ab == a.norm_sq() * b.norm_sq()) {
                    return Ok(false);
                }
            }
            (None, None) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// `(f_{x_n}(y) - f_{x_n}(o), <u, h(o, y; omega)>)` with `f_x(y) = -|sigma(y, x)|`.
pub fn busemann(d: &RootDatum, y: &ApartmentPoint, spec: &CoreSpec, n: u32) -> Result<(f64, f64)> {
    require_special(y)?;
    let u = spec.u_unit().ok_or_else(|| Error::InvalidSpec("busemann needs an angular spec".into()))?;
    let x = spec.generate(d, n)?;
    let far = x.coords.norm_f64();
    let rel = (&x.coords - &y.coords).norm_f64();
    let h = horocycle_h(&ApartmentPoint::origin(d), y, &spec.w)?;
    let limit: f64 = h.to_f64().iter().zip(&u).map(|(a, b)| a * b).sum();
    Ok((far - rel, limit))
}

/// `sigma(x, y) - h(x, y; omega)` lies in the closed cone spanned by positive roots.
pub fn dominates(d: &RootDatum, sigma: &Vector, h: &Vector) -> bool {
    let diff = sigma - h;
    d.root_coords(&diff).iter().all(|c| !c.is_negative())
}
