//! c-function, Macdonald spherical functions and their values at the singular point
//! `z = 0`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::root_data::RootDatum;
use crate::vector::{big_to_f64, q, q_to_f64, Vector, Q};

/// A floating value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// How the removable singularity at `theta = 0` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitMethod {
    /// Mean over a circle `t = R e^{i phi}` in the complex line through a strongly dominant
    /// direction; exact up to aliasing for the analytic limit function.
    Contour { samples: usize },
    /// Richardson extrapolation from `t in {h, h/2, h/4, h/8}`.
    Richardson { h: f64 },
}

impl Default for LimitMethod {
    fn default() -> Self {
        LimitMethod::Contour { samples: 64 }
    }
}

#[derive(Clone, Debug)]
struct PosRoot {
    coroot: Vec<f64>,
    /// `tau_alpha^{-1} tau_{alpha/2}^{-1/2}`
    num: f64,
    /// `tau_{alpha/2}^{-1/2}`
    den: f64,
    /// root coordinates in the simple basis, for membership in `Phi_J`
    coords: Vec<Q>,
    indivisible: bool,
    tau: f64,
}

type Group = Arc<Vec<Vec<f64>>>;

/// Evaluation context: float copies of the root data plus the limit configuration.
#[derive(Debug)]
pub struct SphericalContext {
    pub datum: Arc<RootDatum>,
    dim: usize,
    roots: Vec<PosRoot>,
    pub theta0: Vec<f64>,
    pub method: LimitMethod,
    /// Singularity tolerance for `c_func`.
    pub singular_tol: f64,
    /// Relative tolerance of limit error estimates.
    pub tol: f64,
    groups: RwLock<HashMap<Vec<usize>, Group>>,
    /// `W(q^{-1})`, when the group is enumerable
    wq: Option<f64>,
}

impl Clone for SphericalContext {
    fn clone(&self) -> Self {
        SphericalContext {
            datum: self.datum.clone(),
            dim: self.dim,
            roots: self.roots.clone(),
            theta0: self.theta0.clone(),
            method: self.method,
            singular_tol: self.singular_tol,
            tol: self.tol,
            groups: RwLock::new(self.groups.read().unwrap().clone()),
            wq: self.wq,
        }
    }
}

fn dotc(a: &[Complex64], b: &[f64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::zero(), |acc, (x, y)| acc + x * y)
}

fn matc(m: &[f64], z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    (0..n)
        .map(|i| (0..n).fold(Complex64::zero(), |acc, j| acc + z[j] * m[i * n + j]))
        .collect()
}

fn mat_f64(m: &crate::vector::Matrix) -> Vec<f64> {
    m.data.iter().map(|&x| q_to_f64(x)).collect()
}

impl SphericalContext {
    pub fn new(d: &RootDatum) -> Self {
        Self::from_arc(Arc::new(d.clone()))
    }

    pub fn from_arc(datum: Arc<RootDatum>) -> Self {
        let d = &*datum;
        let half = q(1, 2);
        let roots = d
            .positive
            .iter()
            .zip(&d.tau)
            .map(|(a, t)| {
                let tau = big_to_f64(t);
                let h = a.scale(half);
                let tau_half = if d.is_root(&h) { d.tau_f64(&h) } else { 1.0 };
                PosRoot {
                    coroot: a.coroot().to_f64(),
                    num: 1.0 / (tau * tau_half.sqrt()),
                    den: 1.0 / tau_half.sqrt(),
                    coords: d.root_coords(a),
                    indivisible: !d.is_root(&h),
                    tau,
                }
            })
            .collect();
        // rho-vee direction with a fixed perturbation against accidental degeneracies
        let coords: Vec<Q> = (0..d.rank)
            .map(|i| Q::from_integer(1) + q(((i * 37 + 11) % 29) as i64, 1000))
            .collect();
        let t = d.from_coweight_coords(&coords);
        let n = t.norm_f64();
        let theta0 = t.to_f64().iter().map(|x| x / n).collect();
        SphericalContext {
            dim: d.dim,
            roots,
            theta0,
            method: LimitMethod::default(),
            singular_tol: 1e-12,
            tol: 1e-8,
            groups: RwLock::new(HashMap::new()),
            wq: d.poincare_full().ok().map(|x| big_to_f64(&x)),
            datum,
        }
    }

    fn wq(&self) -> Result<f64> {
        match self.wq {
            Some(x) => Ok(x),
            None => Ok(big_to_f64(&self.datum.poincare_full()?)),
        }
    }

    fn full_j(&self) -> Vec<usize> {
        (1..=self.datum.rank).collect()
    }

    fn in_j(&self, r: &PosRoot, j: &[usize]) -> bool {
        r.coords.iter().enumerate().all(|(k, c)| c.is_zero() || j.contains(&(k + 1)))
    }

    /// Float matrices of `W_J` (`J = I_0` gives `W`).
    fn group(&self, j: &[usize]) -> Result<Group> {
        let mut key = j.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(g) = self.groups.read().unwrap().get(&key) {
            return Ok(g.clone());
        }
        let d = &self.datum;
        let mats: Vec<Vec<f64>> = if key.len() == d.rank {
            d.elements()?.iter().map(|w| mat_f64(&w.matrix)).collect()
        } else {
            d.parabolic(&key)?.iter().map(|w| mat_f64(&w.matrix)).collect()
        };
        let g = Arc::new(mats);
        self.groups.write().unwrap().insert(key, g.clone());
        Ok(g)
    }

    /// Complex ambient vector from coordinates in the coweight basis.
    pub fn z_from_coweights(&self, c: &[Complex64]) -> Vec<Complex64> {
        let d = &self.datum;
        let mut z = vec![Complex64::zero(); self.dim];
        for (ci, l) in c.iter().zip(&d.coweights) {
            for (zk, lk) in z.iter_mut().zip(l.to_f64()) {
                *zk += ci * lk;
            }
        }
        z
    }

    /// Random point with coweight coordinates drawn from `[-scale, scale]` (real part and,
    /// optionally, imaginary part).
    pub fn random_z<R: Rng>(&self, rng: &mut R, scale: f64, real: bool, imag: bool) -> Vec<Complex64> {
        let c: Vec<Complex64> = (0..self.datum.rank)
            .map(|_| {
                let re = if real { rng.gen_range(-scale..scale) } else { 0.0 };
                let im = if imag { rng.gen_range(-scale..scale) } else { 0.0 };
                Complex64::new(re, im)
            })
            .collect();
        self.z_from_coweights(&c)
    }

    fn c_raw(&self, z: &[Complex64], j: &[usize]) -> (Complex64, f64) {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut min_den = f64::INFINITY;
        for r in &self.roots {
            if !self.in_j(r, j) {
                continue;
            }
            let e = (-dotc(z, &r.coroot)).exp();
            let den = Complex64::new(1.0, 0.0) - e * r.den;
            min_den = min_den.min(den.norm());
            acc *= (Complex64::new(1.0, 0.0) - e * r.num) / den;
        }
        (acc, min_den)
    }

    /// `c(z)`, or `c_J(z)` (product over `Phi_J^+`) when `j` is given.
    pub fn c_func(&self, z: &[Complex64], j: Option<&[usize]>) -> Result<Complex64> {
        let all = self.full_j();
        let j = j.unwrap_or(&all);
        for r in &self.roots {
            if !self.in_j(r, j) {
                continue;
            }
            let e = (-dotc(z, &r.coroot)).exp();
            let den = Complex64::new(1.0, 0.0) - e * r.den;
            if den.norm() < self.singular_tol {
                let k = self.roots.iter().position(|x| std::ptr::eq(x, r)).unwrap();
                return Err(Error::Singular { coroot: self.datum.positive[k].coroot() });
            }
        }
        Ok(self.c_raw(z, j).0)
    }

    /// `sum_{w in W_J} e^{<w z, lambda>} c_J(w z)` and the smallest denominator met.
    fn sym_sum(&self, lambda: &[f64], z: &[Complex64], j: &[usize], group: &[Vec<f64>]) -> (Complex64, f64) {
        let mut acc = Complex64::zero();
        let mut min_den = f64::INFINITY;
        for m in group {
            let wz = matc(m, z);
            let (c, md) = self.c_raw(&wz, j);
            min_den = min_den.min(md);
            acc += dotc(&wz, lambda).exp() * c;
        }
        (acc, min_den)
    }

    /// `chi^{-1/2}(lambda) / W(q^{-1})`.
    fn p_prefactor(&self, lambda: &Vector) -> Result<f64> {
        let d = &self.datum;
        Ok(d.chi_pow(lambda, -0.5) / self.wq()?)
    }

    /// Macdonald polynomial `P_lambda(z)`; near-singular `z` is handled by a contour mean.
    pub fn macdonald(&self, lambda: &Vector, z: &[Complex64]) -> Result<Complex64> {
        let d = &self.datum;
        if !d.is_dominant(lambda) {
            return Err(Error::NotDominant(lambda.clone()));
        }
        let all = self.full_j();
        let group = self.group(&all)?;
        let lf = lambda.to_f64();
        let pre = self.p_prefactor(lambda)?;
        let (s, min_den) = self.sym_sum(&lf, z, &all, &group);
        if min_den > 1e-4 {
            return Ok(s * pre);
        }
        // the symmetrized sum is entire in z: average it over a small circle around z
        let radius = self.safe_radius(&all, &lf);
        let est = self.contour_mean(&lf, z, &all, &group, radius, 64);
        Ok(est * pre)
    }

    /// `W(q^{-1})^{-1} sum_w c(w z) e^{<w z, lambda>}` for any coweight `lambda`, i.e.
    /// `chi^{1/2}(lambda) P_lambda(z)` without the dominance requirement.
    pub fn sym_poly(&self, lambda: &Vector, z: &[Complex64]) -> Result<Complex64> {
        let all = self.full_j();
        let group = self.group(&all)?;
        let lf = lambda.to_f64();
        let wq = self.wq()?;
        let (s, min_den) = self.sym_sum(&lf, z, &all, &group);
        if min_den > 1e-4 {
            return Ok(s / wq);
        }
        let radius = self.safe_radius(&all, &lf);
        Ok(self.contour_mean(&lf, z, &all, &group, radius, 64) / wq)
    }

    /// Radius for the contour mean: inside the nearest non-removable singularity along
    /// `theta0`, and small against the growth of `e^{<w theta, lambda>}`.
    fn safe_radius(&self, j: &[usize], lambda: &[f64]) -> f64 {
        let mut sing = f64::INFINITY;
        for r in &self.roots {
            if !self.in_j(r, j) {
                continue;
            }
            let x: f64 = r.coroot.iter().zip(&self.theta0).map(|(a, b)| a * b).sum::<f64>().abs();
            if x == 0.0 {
                continue;
            }
            // zeros of 1 - tau^{-1/2} e^{-t x}: t x = -ln(tau)/2 + 2 pi i k
            let shift = r.den.ln().abs();
            let nearest = if shift > 0.0 { shift } else { 2.0 * std::f64::consts::PI };
            sing = sing.min(nearest / x);
        }
        let growth: f64 = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut radius = 0.25 * sing;
        if growth > 0.0 {
            radius = radius.min(2.0 / growth);
        }
        radius.min(0.5)
    }

    fn contour_mean(
        &self,
        lambda: &[f64],
        center: &[Complex64],
        j: &[usize],
        group: &[Vec<f64>],
        radius: f64,
        samples: usize,
    ) -> Complex64 {
        let mut acc = Complex64::zero();
        for k in 0..samples {
            // offset by half a step so no node sits on the real axis
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / samples as f64;
            let t = Complex64::from_polar(radius, phi);
            let z: Vec<Complex64> = center.iter().zip(&self.theta0).map(|(c, th)| c + t * th).collect();
            acc += self.sym_sum(lambda, &z, j, group).0;
        }
        acc / samples as f64
    }

    /// `calP_J(mu) = lim_{theta -> 0} |W_J|^{-1} sum_{w in W_J} e^{<w theta, mu>} c_J(w theta)`;
    /// `None` means `J = I_0`.
    pub fn cal_p(&self, mu: &Vector, j: Option<&[usize]>) -> Result<Estimate> {
        let all = self.full_j();
        let j: Vec<usize> = j.map(|s| s.to_vec()).unwrap_or(all);
        self.datum.check_index_set(&j)?;
        if j.is_empty() {
            return Ok(Estimate { value: 1.0, err: 0.0 });
        }
        let group = self.group(&j)?;
        let n = group.len() as f64;
        let mf = mu.to_f64();
        let zero = vec![Complex64::zero(); self.dim];
        let est = match self.method {
            LimitMethod::Contour { samples } => {
                let radius = self.safe_radius(&j, &mf);
                let full = self.contour_mean(&mf, &zero, &j, &group, radius, samples).re / n;
                let half = self.contour_mean(&mf, &zero, &j, &group, radius, samples / 2).re / n;
                Estimate { value: full, err: (full - half).abs() }
            }
            LimitMethod::Richardson { h } => {
                let f = |t: f64| -> f64 {
                    let z: Vec<Complex64> = self.theta0.iter().map(|x| Complex64::new(t * x, 0.0)).collect();
                    self.sym_sum(&mf, &z, &j, &group).0.re / n
                };
                let mut table: Vec<f64> = (0..4).map(|k| f(h / f64::powi(2.0, k))).collect();
                let mut last_delta = 0.0;
                for order in 1..4 {
                    let fac = f64::powi(2.0, order);
                    let next: Vec<f64> = table.windows(2).map(|w| (fac * w[1] - w[0]) / (fac - 1.0)).collect();
                    last_delta = (next[next.len() - 1] - table[table.len() - 1]).abs();
                    table = next;
                }
                Estimate { value: table[0], err: last_delta }
            }
        };
        if !est.value.is_finite() || est.err > self.tol * est.value.abs().max(1.0) {
            return Err(Error::Extrapolation { estimate: est.err });
        }
        Ok(est)
    }

    /// `P_mu(0)` (no `J`), or the `J`-ground state `Phi_J(mu)` when `J` is given.
    pub fn macdonald_zero(&self, mu: &Vector, j: Option<&[usize]>) -> Result<Estimate> {
        match j {
            Some(j) if j.len() < self.datum.rank => self.ground_state(mu, j),
            _ => {
                let d = &self.datum;
                if !d.is_dominant(mu) {
                    return Err(Error::NotDominant(mu.clone()));
                }
                let p = self.cal_p(mu, None)?;
                let order = d.elements()?.len() as f64;
                let f = order / big_to_f64(&d.poincare_full()?) * d.chi_pow(mu, -0.5);
                Ok(Estimate { value: f * p.value, err: f * p.err })
            }
        }
    }

    /// `Phi_J(lambda) = |W_J| / W_J(q^{-1}) chi_J^{-1/2}(lambda) calP_J(lambda)`.
    pub fn ground_state(&self, lambda: &Vector, j: &[usize]) -> Result<Estimate> {
        let d = &self.datum;
        d.check_proper(j)?;
        if j.is_empty() {
            return Ok(Estimate { value: 1.0, err: 0.0 });
        }
        if j.iter().any(|&i| lambda.dot(d.simple_root(i)) < Q::zero()) {
            return Err(Error::NotDominant(lambda.clone()));
        }
        let p = self.cal_p(lambda, Some(j))?;
        let order = self.group(j)?.len() as f64;
        let wj = big_to_f64(&d.poincare_parabolic(j)?);
        let chi: f64 = self
            .roots
            .iter()
            .zip(&d.positive)
            .filter(|(r, _)| self.in_j(r, j))
            .map(|(r, a)| r.tau.powf(-0.5 * q_to_f64(lambda.dot(a))))
            .product();
        let f = order / wj * chi;
        Ok(Estimate { value: f * p.value, err: f * p.err })
    }

    /// `calP(gamma) / (prod_{alpha in Phi^{++} \ Phi_J} <gamma, alpha^vee> calP_J(gamma))`.
    pub fn ground_state_ratio(&self, gammas: &[Vector], j: &[usize]) -> Result<Vec<f64>> {
        let d = &self.datum;
        d.check_proper(j)?;
        let outside: Vec<&PosRoot> = self.roots.iter().filter(|r| r.indivisible && !self.in_j(r, j)).collect();
        let min_pair = |g: &Vector| -> f64 {
            outside
                .iter()
                .map(|r| r.coroot.iter().zip(g.to_f64()).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        };
        if let (Some(first), Some(last)) = (gammas.first(), gammas.last()) {
            if gammas.len() > 1 && min_pair(last) <= min_pair(first) {
                return Err(Error::InvalidConfiguration(
                    "sequence does not diverge off the J-subsystem".into(),
                ));
            }
        }
        let mut out = Vec::with_capacity(gammas.len());
        for g in gammas {
            if !d.is_dominant(g) {
                return Err(Error::NotDominant(g.clone()));
            }
            let prod: f64 = outside
                .iter()
                .map(|r| r.coroot.iter().zip(g.to_f64()).map(|(a, b)| a * b).sum::<f64>())
                .product();
            if prod <= 0.0 {
                return Err(Error::InvalidConfiguration(format!("{} lies on a wall outside Phi_J", g)));
            }
            let full = self.cal_p(g, None)?.value;
            let part = self.cal_p(g, Some(j))?.value;
            out.push(full / (prod * part));
        }
        Ok(out)
    }
}

/// Three-point Richardson extrapolation of `r_n = a + b/n + c/n^2 + ...` over consecutive
/// triples; the output has two fewer entries than the input.
pub fn richardson_inverse_n(ns: &[f64], rs: &[f64]) -> Vec<f64> {
    (0..rs.len().saturating_sub(2))
        .map(|k| {
            let x: Vec<f64> = ns[k..k + 3].iter().map(|n| 1.0 / n).collect();
            let y = &rs[k..k + 3];
            // Lagrange interpolation at x = 0
            (0..3)
                .map(|i| {
                    let w: f64 = (0..3).filter(|&m| m != i).map(|m| x[m] / (x[m] - x[i])).product();
                    w * y[i]
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_data::RootType;
    use crate::vector::qi;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tree_zero(q: f64, n: i64) -> f64 {
        q.powf(-(n as f64) / 2.0) * (1.0 + n as f64 * (q - 1.0) / (q + 1.0))
    }

    #[test]
    fn a1_c_function() {
        let d = RootDatum::build(RootType::A, 1, &[2, 2]).unwrap();
        let ctx = SphericalContext::new(&d);
        let z = ctx.z_from_coweights(&[Complex64::new(0.7, 0.2)]);
        let x = dotc(&z, &d.simple[0].coroot().to_f64());
        let expect = (1.0 - 0.5 * (-x).exp()) / (1.0 - (-x).exp());
        assert!((ctx.c_func(&z, None).unwrap() - expect).norm() < 1e-14);
        let zero = vec![Complex64::zero(); 2];
        assert!(matches!(ctx.c_func(&zero, None), Err(Error::Singular { .. })));
        let far = ctx.z_from_coweights(&[Complex64::new(80.0, 0.0)]);
        assert!((ctx.c_func(&far, None).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn tree_values_at_zero() {
        for qq in [2u64, 3] {
            let d = RootDatum::build(RootType::A, 1, &[qq, qq]).unwrap();
            let ctx = SphericalContext::new(&d);
            for n in 0..=20 {
                let v = ctx.macdonald_zero(&d.coweight(1).scale(qi(n)), None).unwrap().value;
                assert!((v - tree_zero(qq as f64, n)).abs() < 1e-10, "q={} n={} {}", qq, n, v);
            }
        }
    }

    #[test]
    fn richardson_agrees_for_small_weights() {
        let d = RootDatum::build(RootType::A, 1, &[2, 2]).unwrap();
        let mut ctx = SphericalContext::new(&d);
        ctx.method = LimitMethod::Richardson { h: 1e-2 };
        ctx.tol = 1e-5;
        let v = ctx.macdonald_zero(d.coweight(1), None).unwrap().value;
        assert!((v - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-6);
    }

    #[test]
    fn trivial_weight_is_one() {
        for (t, r, qv) in [(RootType::A, 2, vec![2, 2, 2]), (RootType::C, 2, vec![3, 2, 3]), (RootType::G, 2, vec![2, 2, 2])] {
            let d = RootDatum::build(t, r, &qv).unwrap();
            let ctx = SphericalContext::new(&d);
            let zero = Vector::zero(d.dim);
            let v = ctx.macdonald_zero(&zero, None).unwrap().value;
            assert!((v - 1.0).abs() < 1e-10);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let z = ctx.random_z(&mut rng, 1.0, true, true);
            assert!((ctx.macdonald(&zero, &z).unwrap() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn bc_trivial_weight_is_one() {
        let d = RootDatum::build(RootType::BC, 2, &[4, 2, 3]).unwrap();
        let ctx = SphericalContext::new(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = ctx.random_z(&mut rng, 1.0, true, true);
        assert!((ctx.macdonald(&Vector::zero(2), &z).unwrap() - 1.0).norm() < 1e-10);
        assert!((ctx.macdonald_zero(&Vector::zero(2), None).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weyl_invariance() {
        let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
        let ctx = SphericalContext::new(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lam = d.from_coweight_ints(&[2, 1]);
        for _ in 0..5 {
            let z = ctx.random_z(&mut rng, 1.0, true, true);
            let p = ctx.macdonald(&lam, &z).unwrap();
            for w in d.elements().unwrap() {
                let wz = matc(&mat_f64(&w.matrix), &z);
                assert!((ctx.macdonald(&lam, &wz).unwrap() - p).norm() < 1e-10 * p.norm().max(1.0));
            }
        }
    }

    #[test]
    fn ground_state_a2_matches_rank_one() {
        let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
        let ctx = SphericalContext::new(&d);
        let a1 = RootDatum::build(RootType::A, 1, &[2, 2]).unwrap();
        let c1 = SphericalContext::new(&a1);
        for k in 0..5 {
            let lam = d.from_coweight_ints(&[k, 3]);
            let g = ctx.ground_state(&lam, &[1]).unwrap().value;
            let r1 = c1.macdonald_zero(&a1.coweight(1).scale(qi(k)), None).unwrap().value;
            assert!((g - r1).abs() < 1e-10, "{} {}", g, r1);
            // invariance under shifts orthogonal to alpha_1
            let g2 = ctx.ground_state(&d.from_coweight_ints(&[k, 7]), &[1]).unwrap().value;
            assert!((g - g2).abs() < 1e-10);
        }
        assert_eq!(ctx.ground_state(d.coweight(1), &[]).unwrap().value, 1.0);
    }

    #[test]
    fn calp_empty_is_one() {
        let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
        let ctx = SphericalContext::new(&d);
        assert_eq!(ctx.cal_p(d.coweight(1), Some(&[])).unwrap().value, 1.0);
    }

    #[test]
    fn ground_state_ratio_stabilizes() {
        let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
        let ctx = SphericalContext::new(&d);
        let ns = [50.0, 100.0, 150.0, 200.0];
        let seq: Vec<Vector> = ns.iter().map(|&n| d.from_coweight_ints(&[2, n as i64])).collect();
        let r = ctx.ground_state_ratio(&seq, &[1]).unwrap();
        // raw ratios drift like 1/n
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        let acc = richardson_inverse_n(&ns, &r);
        assert!((acc[0] - acc[1]).abs() < 1e-5);
        assert!((acc[1] - 1.0 / 24.0).abs() < 1e-5);
    }
}
