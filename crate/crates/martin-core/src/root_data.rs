//! Finite irreducible root systems (reduced types and `BC_r`), their Weyl groups,
//! and the thickness parameters `q_i` of an affine building of that type.
//!
//! Vectors live in Bourbaki's ambient coordinates. Simple roots, coweights and
//! vertex types are indexed from 1 as `I_0 = {1, ..., r}`; index 0 is the affine node.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{big_from_u64, big_pow, q, q_to_f64, qi, solve_exact, Matrix, RationalJson, Vector, Q};

pub const DEFAULT_GROUP_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    BC,
}

impl FromStr for RootType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootType::A),
            "B" => Ok(RootType::B),
            "C" => Ok(RootType::C),
            "D" => Ok(RootType::D),
            "E" => Ok(RootType::E),
            "F" => Ok(RootType::F),
            "G" => Ok(RootType::G),
            "BC" => Ok(RootType::BC),
            other => Err(Error::UnknownType(other.to_string())),
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootType::A => "A",
            RootType::B => "B",
            RootType::C => "C",
            RootType::D => "D",
            RootType::E => "E",
            RootType::F => "F",
            RootType::G => "G",
            RootType::BC => "BC",
        };
        f.write_str(s)
    }
}

/// Order of the finite Weyl group of a classical label.
pub fn classical_order(kind: RootType, rank: usize) -> u128 {
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    match kind {
        RootType::A => fact(rank + 1),
        RootType::B | RootType::C | RootType::BC => (1u128 << rank) * fact(rank),
        RootType::D => (1u128 << (rank - 1)) * fact(rank),
        RootType::E => match rank {
            6 => 51_840,
            7 => 2_903_040,
            _ => 696_729_600,
        },
        RootType::F => 1152,
        RootType::G => 12,
    }
}

/// Classical number of positive roots (counting `2e_i` for `BC_r`).
pub fn classical_positive_count(kind: RootType, rank: usize) -> usize {
    match kind {
        RootType::A => rank * (rank + 1) / 2,
        RootType::B | RootType::C => rank * rank,
        RootType::BC => rank * rank + rank,
        RootType::D => rank * (rank - 1),
        RootType::E => match rank {
            6 => 36,
            7 => 63,
            _ => 120,
        },
        RootType::F => 24,
        RootType::G => 6,
    }
}

fn check_rank(kind: RootType, rank: usize) -> Result<()> {
    let ok = match kind {
        RootType::A | RootType::BC => rank >= 1,
        RootType::B | RootType::C => rank >= 2,
        RootType::D => rank >= 4,
        RootType::E => (6..=8).contains(&rank),
        RootType::F => rank == 4,
        RootType::G => rank == 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidRank { label: kind.to_string(), rank })
    }
}

/// Bourbaki simple roots and ambient dimension.
fn bourbaki_base(kind: RootType, r: usize) -> (usize, Vec<Vector>) {
    let e = |n: usize, i: usize| Vector::unit(n, i);
    match kind {
        RootType::A => {
            let n = r + 1;
            let s = (0..r).map(|i| &e(n, i) - &e(n, i + 1)).collect();
            (n, s)
        }
        RootType::B | RootType::C | RootType::BC => {
            let mut s: Vec<Vector> = (0..r - 1).map(|i| &e(r, i) - &e(r, i + 1)).collect();
            let last = if kind == RootType::C { e(r, r - 1).scale(qi(2)) } else { e(r, r - 1) };
            s.push(last);
            (r, s)
        }
        RootType::D => {
            let mut s: Vec<Vector> = (0..r - 1).map(|i| &e(r, i) - &e(r, i + 1)).collect();
            s.push(&e(r, r - 2) + &e(r, r - 1));
            (r, s)
        }
        RootType::G => {
            let n = 3;
            let a1 = &e(n, 0) - &e(n, 1);
            let a2 = Vector::from_ints(&[-2, 1, 1]);
            (n, vec![a1, a2])
        }
        RootType::F => {
            let n = 4;
            let a1 = &e(n, 1) - &e(n, 2);
            let a2 = &e(n, 2) - &e(n, 3);
            let a3 = e(n, 3);
            let a4 = Vector(vec![q(1, 2), q(-1, 2), q(-1, 2), q(-1, 2)]);
            (n, vec![a1, a2, a3, a4])
        }
        RootType::E => {
            let n = 8;
            let h = q(1, 2);
            let a1 = Vector(vec![h, -h, -h, -h, -h, -h, -h, h]);
            let a2 = &e(n, 0) + &e(n, 1);
            let mut s = vec![a1, a2];
            for i in 0..r - 2 {
                s.push(&e(n, i + 1) - &e(n, i));
            }
            (n, s)
        }
    }
}

/// Thickness parameters `q_0, ..., q_r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterSystem {
    pub q: Vec<u64>,
}

impl ParameterSystem {
    pub fn new(q: Vec<u64>) -> Self {
        ParameterSystem { q }
    }

    /// Parameters with the types `0` and `r` exchanged.
    pub fn twisted(&self) -> ParameterSystem {
        let mut q = self.q.clone();
        let r = q.len() - 1;
        q.swap(0, r);
        ParameterSystem { q }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    /// Reduced word `s_{i_1} ... s_{i_k}`, letters in `1..=r`.
    pub word: Vec<usize>,
    pub matrix: Matrix,
}

impl WeylElement {
    pub fn identity(dim: usize) -> Self {
        WeylElement { word: Vec::new(), matrix: Matrix::identity(dim) }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        self.matrix.apply(v)
    }

    /// `w^{-1} v`; elements are orthogonal.
    pub fn apply_inverse(&self, v: &Vector) -> Vector {
        self.matrix.transpose().apply(v)
    }

    pub fn inverse(&self) -> WeylElement {
        let mut word = self.word.clone();
        word.reverse();
        WeylElement { word, matrix: self.matrix.transpose() }
    }

    /// `q_w = q_{i_1} ... q_{i_k}` for the given parameters.
    pub fn q_w(&self, params: &[u64]) -> BigRational {
        self.word.iter().fold(BigRational::one(), |acc, &i| acc * big_from_u64(params[i]))
    }
}

#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub order: u128,
    /// All elements in shortlex order of their reduced words; `None` in lazy mode.
    pub elements: Option<Vec<WeylElement>>,
    pub longest: WeylElement,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub group_cap: usize,
    pub lazy: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { group_cap: DEFAULT_GROUP_CAP, lazy: false }
    }
}

/// Value of the multiplicative function `chi`.
#[derive(Clone, Debug, PartialEq)]
pub enum Chi {
    Exact(BigRational),
    Approx(f64),
}

impl Chi {
    pub fn to_f64(&self) -> f64 {
        match self {
            Chi::Exact(x) => crate::vector::big_to_f64(x),
            Chi::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Chi::Exact(x) => Some(x),
            Chi::Approx(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub kind: RootType,
    pub rank: usize,
    pub dim: usize,
    pub roots: Vec<Vector>,
    pub positive: Vec<Vector>,
    pub indivisible: Vec<Vector>,
    pub simple: Vec<Vector>,
    pub highest: Vector,
    pub marks: Vec<i64>,
    pub coweights: Vec<Vector>,
    pub good_types: Vec<usize>,
    pub reduced: bool,
    pub params: ParameterSystem,
    pub weyl: WeylGroup,
    /// `tau_alpha` for each positive root, aligned with `positive`.
    pub tau: Vec<BigRational>,
    root_index: HashMap<Vector, usize>,
    simple_matrices: Vec<Matrix>,
}

impl RootDatum {
    /// Build the datum for a classical label with default options.
    pub fn build(kind: RootType, rank: usize, q: &[u64]) -> Result<RootDatum> {
        Self::build_with(kind, rank, q, BuildOptions::default())
    }

    pub fn build_with(kind: RootType, rank: usize, q: &[u64], opts: BuildOptions) -> Result<RootDatum> {
        check_rank(kind, rank)?;
        let (dim, simple) = bourbaki_base(kind, rank);
        let order = classical_order(kind, rank);
        Self::from_base(kind, dim, simple, kind == RootType::BC, q, Some(order), opts)
    }

    /// Build from a base of simple roots. `doubled` adds `2 alpha_r` (type `BC`).
    pub fn from_base(
        kind: RootType,
        dim: usize,
        simple: Vec<Vector>,
        doubled: bool,
        q: &[u64],
        known_order: Option<u128>,
        opts: BuildOptions,
    ) -> Result<RootDatum> {
        let rank = simple.len();
        if q.len() != rank + 1 {
            return Err(Error::InvalidParameters(format!(
                "expected {} parameters q_0..q_{}, got {}",
                rank + 1,
                rank,
                q.len()
            )));
        }
        if let Some(&bad) = q.iter().find(|&&x| x < 2) {
            return Err(Error::InvalidParameters(format!("thickness parameter {} < 2", bad)));
        }
        let gram: Vec<Vec<Q>> = simple.iter().map(|a| simple.iter().map(|b| a.dot(b)).collect()).collect();
        let mut coweights = Vec::with_capacity(rank);
        for i in 0..rank {
            let rhs: Vec<Q> = (0..rank).map(|k| if k == i { Q::one() } else { Q::zero() }).collect();
            let c = solve_exact(&gram, &rhs).ok_or_else(|| Error::InvalidParameters("degenerate base".into()))?;
            let mut v = Vector::zero(dim);
            for (k, ck) in c.iter().enumerate() {
                v += &simple[k].scale(*ck);
            }
            coweights.push(v);
        }
        let simple_matrices: Vec<Matrix> = simple.iter().map(Matrix::reflection).collect();

        // reflection closure
        let mut seeds = simple.clone();
        if doubled {
            seeds.push(simple[rank - 1].scale(qi(2)));
        }
        let mut roots: Vec<Vector> = Vec::new();
        let mut seen: HashMap<Vector, usize> = HashMap::new();
        let mut queue: VecDeque<Vector> = seeds.into_iter().collect();
        while let Some(v) = queue.pop_front() {
            if seen.contains_key(&v) {
                continue;
            }
            seen.insert(v.clone(), roots.len());
            roots.push(v.clone());
            for m in &simple_matrices {
                let w = m.apply(&v);
                if !seen.contains_key(&w) {
                    queue.push_back(w);
                }
            }
        }
        let coeff = |a: &Vector| -> Vec<Q> { coweights.iter().map(|l| a.dot(l)).collect() };
        let mut positive: Vec<Vector> = roots
            .iter()
            .filter(|a| coeff(a).iter().all(|c| !c.is_negative()))
            .cloned()
            .collect();
        positive.sort_by_key(|a| {
            let h: Q = coeff(a).iter().sum();
            (h, coeff(a).iter().map(|c| -*c).collect::<Vec<_>>())
        });
        let highest = positive.last().cloned().expect("nonempty root system");
        let marks: Vec<i64> = coeff(&highest).iter().map(|c| c.to_integer()).collect();
        let root_set: std::collections::HashSet<&Vector> = roots.iter().collect();
        let half = crate::vector::q(1, 2);
        let indivisible: Vec<Vector> = positive.iter().filter(|a| !root_set.contains(&a.scale(half))).cloned().collect();
        let reduced = !roots.iter().any(|a| root_set.contains(&a.scale(qi(2))));
        let mut good_types = vec![0];
        good_types.extend((0..rank).filter(|&i| marks[i] == 1).map(|i| i + 1));

        let params = ParameterSystem::new(q.to_vec());
        let dummy_longest = WeylElement::identity(dim);
        let mut datum = RootDatum {
            kind,
            rank,
            dim,
            root_index: roots.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            roots,
            positive,
            indivisible,
            simple,
            highest,
            marks,
            coweights,
            good_types,
            reduced,
            params,
            weyl: WeylGroup { order: 0, elements: None, longest: dummy_longest },
            tau: Vec::new(),
            simple_matrices,
        };
        datum.validate_parameters()?;
        datum.tau = datum.positive.iter().map(|a| datum.tau_of_root(a)).collect();

        let order = match known_order {
            Some(o) => o,
            None => datum.count_group(opts.group_cap)?,
        };
        let elements = if order <= opts.group_cap as u128 {
            Some(datum.enumerate(&(1..=rank).collect::<Vec<_>>(), opts.group_cap)?)
        } else if opts.lazy {
            None
        } else {
            return Err(Error::GroupTooLarge { order, cap: opts.group_cap });
        };
        let anti: Vector = datum.coweights.iter().fold(Vector::zero(dim), |acc, l| &acc - l);
        let (_, longest) = datum.dominant_rep(&anti);
        datum.weyl = WeylGroup { order, elements, longest };
        Ok(datum)
    }

    fn count_group(&self, cap: usize) -> Result<u128> {
        let all: Vec<usize> = (1..=self.rank).collect();
        let els = self.enumerate(&all, cap.saturating_mul(100))?;
        Ok(els.len() as u128)
    }

    /// Same-orbit constraints on `q` and the `C_r` / `BC_r` selection rule.
    fn validate_parameters(&self) -> Result<()> {
        let q = &self.params.q;
        let r = self.rank;
        // simple roots of equal length are W-conjugate in an irreducible system
        for i in 0..r {
            for j in 0..r {
                if self.simple[i].norm_sq() == self.simple[j].norm_sq() && q[i + 1] != q[j + 1] {
                    return Err(Error::InvalidParameters(format!(
                        "q_{} != q_{} although alpha_{} and alpha_{} are W-conjugate",
                        i + 1,
                        j + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if self.reduced {
            let j = (0..r).find(|&j| self.simple[j].norm_sq() == self.highest.norm_sq()).expect("long simple root");
            if q[0] != q[j + 1] {
                let hint = if self.kind == RootType::C || r == 1 { " (use type BC for q_0 != q_r)" } else { "" };
                return Err(Error::InvalidParameters(format!(
                    "q_0 = {} must equal q_{} = {}{}",
                    q[0],
                    j + 1,
                    q[j + 1],
                    hint
                )));
            }
        } else if q[0] == q[r] {
            return Err(Error::InvalidParameters(format!(
                "type BC_{} requires q_0 != q_{}; equal parameters select type C",
                r, r
            )));
        }
        Ok(())
    }

    // ---- basic predicates ----

    pub fn is_root(&self, v: &Vector) -> bool {
        self.root_index.contains_key(v)
    }

    pub fn simple_root(&self, i: usize) -> &Vector {
        &self.simple[i - 1]
    }

    pub fn coweight(&self, i: usize) -> &Vector {
        &self.coweights[i - 1]
    }

    /// Coordinates in the fundamental coweight basis: `<v, alpha_i>`.
    pub fn coweight_coords(&self, v: &Vector) -> Vec<Q> {
        self.simple.iter().map(|a| v.dot(a)).collect()
    }

    /// Coefficients of `v` in the basis of simple roots: `<v, lambda_j>`.
    pub fn root_coords(&self, v: &Vector) -> Vec<Q> {
        self.coweights.iter().map(|l| v.dot(l)).collect()
    }

    pub fn from_coweight_coords(&self, c: &[Q]) -> Vector {
        c.iter()
            .zip(&self.coweights)
            .fold(Vector::zero(self.dim), |acc, (ci, l)| &acc + &l.scale(*ci))
    }

    pub fn from_coweight_ints(&self, c: &[i64]) -> Vector {
        self.from_coweight_coords(&c.iter().map(|&x| qi(x)).collect::<Vec<_>>())
    }

    /// Whether `v` lies in the real span of the roots.
    pub fn in_span(&self, v: &Vector) -> bool {
        self.from_coweight_coords(&self.coweight_coords(v)) == *v
    }

    pub fn is_dominant(&self, v: &Vector) -> bool {
        self.coweight_coords(v).iter().all(|c| !c.is_negative())
    }

    pub fn in_coweight_lattice(&self, v: &Vector) -> bool {
        self.in_span(v) && self.coweight_coords(v).iter().all(|c| c.is_integer())
    }

    pub fn in_half_lattice(&self, v: &Vector) -> bool {
        self.in_span(v) && self.coweight_coords(v).iter().all(|c| (c * qi(2)).is_integer())
    }

    /// `rho^vee`-like strongly dominant vector `lambda_1 + ... + lambda_r`.
    pub fn rho_vee(&self) -> Vector {
        self.coweights.iter().fold(Vector::zero(self.dim), |acc, l| &acc + l)
    }

    /// Half the sum of the indivisible positive roots.
    pub fn rho(&self) -> Vector {
        self.indivisible.iter().fold(Vector::zero(self.dim), |acc, a| &acc + a).scale(q(1, 2))
    }

    // ---- parameters ----

    /// `q_alpha` for a root, using the class of a simple root of the same length; doubled
    /// roots of `BC_r` carry `q_0`.
    pub fn q_root_with(&self, alpha: &Vector, params: &[u64]) -> u64 {
        let pos = if self.is_positive(alpha) { alpha.clone() } else { -alpha };
        if !self.reduced && self.is_root(&pos.scale(q(1, 2))) {
            return params[0];
        }
        let n = pos.norm_sq();
        let i = (0..self.rank).find(|&i| self.simple[i].norm_sq() == n).expect("root length of a simple root");
        params[i + 1]
    }

    pub fn q_root(&self, alpha: &Vector) -> u64 {
        self.q_root_with(alpha, &self.params.q)
    }

    pub fn is_positive(&self, v: &Vector) -> bool {
        let c = self.root_coords(v);
        c.iter().all(|x| !x.is_negative()) && c.iter().any(|x| x.is_positive())
    }

    fn tau_of_root(&self, alpha: &Vector) -> BigRational {
        let q = &self.params.q;
        let half = alpha.scale(crate::vector::q(1, 2));
        let double = alpha.scale(qi(2));
        if self.is_root(&half) {
            big_from_u64(q[0])
        } else if self.is_root(&double) {
            big_from_u64(self.q_root(alpha)) / big_from_u64(q[0])
        } else {
            big_from_u64(self.q_root(alpha))
        }
    }

    /// `tau_alpha`; equal to 1 off the root system.
    pub fn tau(&self, alpha: &Vector) -> BigRational {
        let pos = if self.is_positive(alpha) { alpha.clone() } else { -alpha };
        match self.positive.iter().position(|a| *a == pos) {
            Some(k) => self.tau[k].clone(),
            None => BigRational::one(),
        }
    }

    pub fn tau_f64(&self, alpha: &Vector) -> f64 {
        crate::vector::big_to_f64(&self.tau(alpha))
    }

    /// `chi(lambda) = prod_{alpha > 0} tau_alpha^{<lambda, alpha>}`.
    pub fn chi(&self, lambda: &Vector) -> Chi {
        let pairings: Vec<Q> = self.positive.iter().map(|a| lambda.dot(a)).collect();
        if pairings.iter().all(|p| p.is_integer()) {
            let mut acc = BigRational::one();
            for (p, t) in pairings.iter().zip(&self.tau) {
                acc *= big_pow(t, p.to_integer());
            }
            Chi::Exact(acc)
        } else {
            Chi::Approx(self.chi_pow(lambda, 1.0))
        }
    }

    /// `chi(lambda)^s` in floating point.
    pub fn chi_pow(&self, lambda: &Vector, s: f64) -> f64 {
        let log: f64 = self
            .positive
            .iter()
            .zip(&self.tau)
            .map(|(a, t)| q_to_f64(lambda.dot(a)) * crate::vector::big_to_f64(t).ln())
            .sum();
        (s * log).exp()
    }

    /// Exact `chi`, failing for non-integral exponents.
    pub fn chi_exact(&self, lambda: &Vector) -> Result<BigRational> {
        match self.chi(lambda) {
            Chi::Exact(x) => Ok(x),
            Chi::Approx(_) => Err(Error::NotInLattice(lambda.clone())),
        }
    }

    // ---- Weyl group ----

    pub fn simple_reflection(&self, i: usize) -> &Matrix {
        &self.simple_matrices[i - 1]
    }

    pub fn element_from_word(&self, word: &[usize]) -> WeylElement {
        let mut m = Matrix::identity(self.dim);
        for &i in word {
            m = m.mul(self.simple_reflection(i));
        }
        WeylElement { word: word.to_vec(), matrix: m }
    }

    /// Canonical element (lexicographically smallest reduced word) for a matrix in `W`.
    pub fn element_from_matrix(&self, m: &Matrix) -> WeylElement {
        let rho = self.rho_vee();
        let (_, w) = self.dominant_rep(&m.apply(&rho));
        w
    }

    pub fn compose(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.element_from_matrix(&a.matrix.mul(&b.matrix))
    }

    /// Subgroup generated by `{s_j : j in J}`, shortlex-ordered by reduced word.
    pub fn enumerate(&self, j: &[usize], cap: usize) -> Result<Vec<WeylElement>> {
        let mut gens: Vec<usize> = j.to_vec();
        gens.sort_unstable();
        gens.dedup();
        let mut seen: HashMap<Matrix, ()> = HashMap::new();
        let id = WeylElement::identity(self.dim);
        seen.insert(id.matrix.clone(), ());
        let mut out = vec![id];
        let mut frontier = 0;
        while frontier < out.len() {
            let end = out.len();
            for k in frontier..end {
                for &i in &gens {
                    let m = out[k].matrix.mul(self.simple_reflection(i));
                    if seen.contains_key(&m) {
                        continue;
                    }
                    seen.insert(m.clone(), ());
                    let mut word = out[k].word.clone();
                    word.push(i);
                    out.push(WeylElement { word, matrix: m });
                    if out.len() > cap {
                        return Err(Error::GroupTooLarge { order: out.len() as u128, cap });
                    }
                }
            }
            frontier = end;
        }
        Ok(out)
    }

    /// Parabolic subgroup `W_J`.
    pub fn parabolic(&self, j: &[usize]) -> Result<Vec<WeylElement>> {
        self.check_index_set(j)?;
        self.enumerate(j, DEFAULT_GROUP_CAP.max(self.weyl.order.min(u128::from(u32::MAX)) as usize))
    }

    pub fn elements(&self) -> Result<&[WeylElement]> {
        self.weyl
            .elements
            .as_deref()
            .ok_or(Error::GroupTooLarge { order: self.weyl.order, cap: DEFAULT_GROUP_CAP })
    }

    pub fn check_index_set(&self, j: &[usize]) -> Result<()> {
        if let Some(&bad) = j.iter().find(|&&i| i == 0 || i > self.rank) {
            return Err(Error::InvalidIndexSet(format!("index {} outside 1..={}", bad, self.rank)));
        }
        Ok(())
    }

    pub fn check_proper(&self, j: &[usize]) -> Result<()> {
        self.check_index_set(j)?;
        let mut s = j.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() == self.rank {
            return Err(Error::NotProperSubset);
        }
        Ok(())
    }

    /// Dominant representative `lambda` of `v` and the minimal `w` with `v = w lambda`;
    /// the reduced word of `w` is the lexicographically smallest one.
    pub fn dominant_rep(&self, v: &Vector) -> (Vector, WeylElement) {
        let mut cur = v.clone();
        let mut word = Vec::new();
        loop {
            let i = (0..self.rank).find(|&i| cur.dot(&self.simple[i]).is_negative());
            match i {
                Some(i) => {
                    cur = self.simple_matrices[i].apply(&cur);
                    word.push(i + 1);
                }
                None => break,
            }
        }
        (cur, self.element_from_word(&word))
    }

    pub fn dominant(&self, v: &Vector) -> Vector {
        self.dominant_rep(v).0
    }

    /// `J = {i : <lambda, alpha_i> = 0}` for dominant `lambda`.
    pub fn stabilizer_type(&self, lambda: &Vector) -> Vec<usize> {
        (1..=self.rank).filter(|&i| lambda.dot(self.simple_root(i)).is_zero()).collect()
    }

    // ---- Poincare sums and vertex counts ----

    /// `W_J(q^{-1})` for parameters `params`.
    pub fn poincare_parabolic_with(&self, j: &[usize], params: &[u64]) -> Result<BigRational> {
        self.check_index_set(j)?;
        if j.is_empty() {
            return Ok(BigRational::one());
        }
        match self.parabolic(j) {
            Ok(els) => Ok(els.iter().fold(BigRational::zero(), |acc, w| acc + w.q_w(params).recip())),
            Err(Error::GroupTooLarge { .. }) => self.poincare_by_heights(j, params),
            Err(e) => Err(e),
        }
    }

    /// `W_J(q) = sum_{w in W_J} q_w`.
    pub fn poincare_parabolic_at_q(&self, j: &[usize], params: &[u64]) -> Result<BigRational> {
        self.check_index_set(j)?;
        if j.is_empty() {
            return Ok(BigRational::one());
        }
        Ok(self.parabolic(j)?.iter().fold(BigRational::zero(), |acc, w| acc + w.q_w(params)))
    }

    pub fn poincare_parabolic(&self, j: &[usize]) -> Result<BigRational> {
        self.poincare_parabolic_with(j, &self.params.q)
    }

    /// `W(q^{-1})`.
    pub fn poincare_full_with(&self, params: &[u64]) -> Result<BigRational> {
        let all: Vec<usize> = (1..=self.rank).collect();
        self.poincare_parabolic_with(&all, params)
    }

    pub fn poincare_full(&self) -> Result<BigRational> {
        self.poincare_full_with(&self.params.q)
    }

    /// `W_lambda(q^{-1})` with `W_lambda = {w : w lambda = lambda}`.
    pub fn poincare_stabilizer_with(&self, lambda: &Vector, params: &[u64]) -> Result<BigRational> {
        if self.is_dominant(lambda) {
            return self.poincare_parabolic_with(&self.stabilizer_type(lambda), params);
        }
        let els = self.elements()?;
        Ok(els
            .iter()
            .filter(|w| w.apply(lambda) == *lambda)
            .fold(BigRational::zero(), |acc, w| acc + w.q_w(params).recip()))
    }

    pub fn poincare_stabilizer(&self, lambda: &Vector) -> Result<BigRational> {
        self.poincare_stabilizer_with(lambda, &self.params.q)
    }

    /// Equal-parameter product over positive roots of `Phi_J`, used when `W_J` is too
    /// large to enumerate.
    fn poincare_by_heights(&self, j: &[usize], params: &[u64]) -> Result<BigRational> {
        let qs: Vec<u64> = j.iter().map(|&i| params[i]).collect();
        if qs.iter().any(|&x| x != qs[0]) {
            return Err(Error::Unsupported("unequal parameters on a non-enumerable Weyl group".into()));
        }
        let t = big_from_u64(qs[0]).recip();
        let mut acc = BigRational::one();
        for a in self.sub_positive(j) {
            if !self.reduced && self.is_root(&a.scale(q(1, 2))) {
                continue;
            }
            let h: i64 = self.root_coords(&a).iter().map(|c| c.to_integer()).sum();
            let num = BigRational::one() - big_pow(&t, h + 1);
            let den = BigRational::one() - big_pow(&t, h);
            acc = acc * num / den;
        }
        Ok(acc)
    }

    /// `N_lambda`, or `N_{eps;lambda}` for the twisted class.
    pub fn n_lambda(&self, lambda: &Vector, twisted: bool) -> Result<BigRational> {
        if !self.is_dominant(lambda) {
            return Err(Error::NotDominant(lambda.clone()));
        }
        if !self.in_coweight_lattice(lambda) {
            return Err(Error::NotInLattice(lambda.clone()));
        }
        let params = if twisted { self.params.twisted().q } else { self.params.q.clone() };
        let w = self.poincare_full_with(&params)?;
        let wl = self.poincare_stabilizer_with(lambda, &params)?;
        Ok(w / wl * self.chi_exact(lambda)?)
    }

    // ---- projections and subsystems ----

    /// Positive roots of `Phi_J = {alpha : <alpha, lambda_k> = 0 for k not in J}`.
    pub fn sub_positive(&self, j: &[usize]) -> Vec<Vector> {
        self.positive
            .iter()
            .filter(|a| (1..=self.rank).filter(|k| !j.contains(k)).all(|k| a.dot(self.coweight(k)).is_zero()))
            .cloned()
            .collect()
    }

    /// `(P_J v, Q_J v)` with `P_J v = |W_J|^{-1} sum_{w in W_J} (v - w v)`.
    pub fn proj_j(&self, j: &[usize], v: &Vector) -> Result<(Vector, Vector)> {
        self.check_proper(j)?;
        let els = self.parabolic(j)?;
        let n = qi(els.len() as i64);
        let mut avg = Vector::zero(self.dim);
        for w in &els {
            avg += &w.apply(v);
        }
        let qv = avg.scale(Q::one() / n);
        let pv = v - &qv;
        Ok((pv, qv))
    }

    pub fn sub_system(&self, j: &[usize]) -> Result<SubSystem> {
        self.check_proper(j)?;
        let mut js = j.to_vec();
        js.sort_unstable();
        js.dedup();
        let positive = self.sub_positive(&js);
        let half = crate::vector::q(1, 2);
        let indivisible = positive.iter().filter(|a| !self.is_root(&a.scale(half))).cloned().collect();
        let elements = self.parabolic(&js)?;
        Ok(SubSystem { j: js, positive, indivisible, elements })
    }

    /// Irreducible `Phi_J` as a datum of its own, with parameters inherited from `self`.
    pub fn sub_datum(&self, j: &[usize]) -> Result<RootDatum> {
        let sub = self.sub_system(j)?;
        if sub.j.is_empty() {
            return Err(Error::InvalidIndexSet("empty subsystem".into()));
        }
        let simple: Vec<Vector> = sub.j.iter().map(|&i| self.simple_root(i).clone()).collect();
        // connectedness of the Dynkin subdiagram
        let mut comp = vec![0usize];
        let mut idx = 0;
        while idx < comp.len() {
            let a = &simple[comp[idx]];
            for (k, b) in simple.iter().enumerate() {
                if !comp.contains(&k) && !a.dot(b).is_zero() {
                    comp.push(k);
                }
            }
            idx += 1;
        }
        if comp.len() != simple.len() {
            return Err(Error::Unsupported("reducible subsystem".into()));
        }
        let doubled = sub.positive.iter().any(|a| self.is_root(&a.scale(qi(2))));
        let top = sub.positive.iter().max_by_key(|a| self.root_coords(a).iter().sum::<Q>()).unwrap().clone();
        let q0 = if doubled {
            self.params.q[0]
        } else {
            self.q_root(&top)
        };
        let mut qs = vec![q0];
        qs.extend(sub.j.iter().map(|&i| self.params.q[i]));
        let kind = classify(&simple, doubled);
        RootDatum::from_base(kind, self.dim, simple, doubled, &qs, None, BuildOptions::default())
    }

    // ---- serialization ----

    pub fn to_json(&self) -> RootDatumJson {
        RootDatumJson {
            type_label: self.kind.to_string(),
            rank: self.rank,
            q: self.params.q.clone(),
            roots: self.positive.iter().map(|a| a.0.iter().map(|&x| RationalJson::from(x)).collect()).collect(),
        }
    }

    pub fn from_json(doc: &RootDatumJson) -> Result<RootDatum> {
        let kind: RootType = doc.type_label.parse()?;
        let d = RootDatum::build(kind, doc.rank, &doc.q)?;
        let stored: Option<Vec<Vector>> = doc
            .roots
            .iter()
            .map(|r| r.iter().map(|x| x.to_q()).collect::<Option<Vec<Q>>>().map(Vector))
            .collect();
        if stored.as_ref() != Some(&d.positive) {
            return Err(Error::InvalidConfiguration("stored roots do not match the rebuilt datum".into()));
        }
        Ok(d)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.rank)
    }
}

/// Label of an irreducible system from its base.
fn classify(simple: &[Vector], doubled: bool) -> RootType {
    let r = simple.len();
    if doubled {
        return RootType::BC;
    }
    let norms: Vec<Q> = simple.iter().map(|a| a.norm_sq()).collect();
    let max = *norms.iter().max().unwrap();
    let min = *norms.iter().min().unwrap();
    if max == min {
        // simply laced: A, D or E by branch node
        let deg = |i: usize| (0..r).filter(|&k| k != i && !simple[i].dot(&simple[k]).is_zero()).count();
        let branch = (0..r).any(|i| deg(i) >= 3);
        if !branch {
            return RootType::A;
        }
        return if r >= 6 && (0..r).any(|i| deg(i) == 3) && is_e_shape(simple) { RootType::E } else { RootType::D };
    }
    if max / min == qi(3) {
        return RootType::G;
    }
    if r == 4 && norms.iter().filter(|&&n| n == max).count() == 2 {
        return RootType::F;
    }
    if norms.iter().filter(|&&n| n == max).count() == 1 {
        RootType::C
    } else {
        RootType::B
    }
}

fn is_e_shape(simple: &[Vector]) -> bool {
    let r = simple.len();
    let adj = |i: usize, k: usize| i != k && !simple[i].dot(&simple[k]).is_zero();
    let Some(b) = (0..r).find(|&i| (0..r).filter(|&k| adj(i, k)).count() == 3) else { return false };
    let mut arms = Vec::new();
    for start in (0..r).filter(|&k| adj(b, k)) {
        let (mut prev, mut cur, mut len) = (b, start, 1);
        loop {
            let next: Vec<usize> = (0..r).filter(|&k| k != prev && adj(cur, k)).collect();
            if next.len() != 1 {
                break;
            }
            prev = cur;
            cur = next[0];
            len += 1;
        }
        arms.push(len);
    }
    arms.sort_unstable();
    arms[0] == 1 && arms[1] == 2
}

/// The root subsystem `Phi_J` viewed inside the parent datum.
#[derive(Clone, Debug)]
pub struct SubSystem {
    pub j: Vec<usize>,
    pub positive: Vec<Vector>,
    pub indivisible: Vec<Vector>,
    pub elements: Vec<WeylElement>,
}

impl SubSystem {
    /// `W_J(q^{-1})`.
    pub fn poincare(&self, params: &[u64]) -> BigRational {
        self.elements.iter().fold(BigRational::zero(), |acc, w| acc + w.q_w(params).recip())
    }

    /// `chi_J(lambda)^s` over `Phi_J^+`, in floating point.
    pub fn chi_pow(&self, datum: &RootDatum, lambda: &Vector, s: f64) -> f64 {
        let log: f64 = self
            .positive
            .iter()
            .map(|a| q_to_f64(lambda.dot(a)) * datum.tau_f64(a).ln())
            .sum();
        (s * log).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootDatumJson {
    #[serde(rename = "type")]
    pub type_label: String,
    pub rank: usize,
    pub q: Vec<u64>,
    pub roots: Vec<Vec<RationalJson>>,
}
