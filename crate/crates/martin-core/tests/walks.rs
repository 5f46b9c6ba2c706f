use martin_core::apartment::*;
use martin_core::hecke::HeckeContext;
use martin_core::walks::*;
use martin_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn a1(q: u64) -> RootDatum {
    RootDatum::build(RootType::A, 1, &[q, q]).unwrap()
}

fn a2() -> RootDatum {
    RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap()
}

fn one_step(d: &RootDatum, i: usize) -> IsotropicWalk {
    make_walk(d, &[(d.coweight(i).clone(), BigRational::one())], WalkOptions::default()).unwrap()
}

fn context(d: &RootDatum, walk: IsotropicWalk) -> WalkContext {
    WalkContext::new(Arc::new(HeckeContext::from_datum(d, 4)), walk).unwrap()
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Green function of the nearest-neighbour walk on the `(q+1)`-regular tree at a vertex
/// at distance `d`, from the first-passage generating function.
fn tree_green(q: f64, zeta: f64, d: i32) -> f64 {
    let z = 1.0 / zeta;
    let p = q / (q + 1.0);
    let f = (1.0 - (1.0 - 4.0 * z * z * p * (1.0 - p)).sqrt()) / (2.0 * z * p);
    f.powi(d) / (1.0 - z * f)
}

#[test]
fn make_walk_examples() {
    let d = a1(2);
    let w = one_step(&d, 1);
    assert_eq!(w.generators.len(), 1);
    let d = a2();
    assert!(make_walk(&d, &[(d.coweight(1).clone(), BigRational::one())], WalkOptions::default()).is_ok());
    let half = rat(1, 2);
    let w = make_walk(&d, &[(d.coweight(1).clone(), half.clone()), (d.coweight(2).clone(), half.clone())], WalkOptions::default())
        .unwrap();
    let s = w.exact.iter().fold(BigRational::zero(), |a, (_, c)| a + c);
    assert!(s.is_one());
    assert!(make_walk(&d, &[(d.coweight(1).clone(), half.clone())], WalkOptions::default()).is_err());
    assert!(make_walk(&d, &[], WalkOptions::default()).is_err());
    assert!(make_walk(&d, &[(d.coweight(1).clone(), -BigRational::one())], WalkOptions::default()).is_err());
    let not_dominant = d.coweight(1).scale(Q::from_integer(-1));
    assert!(make_walk(&d, &[(not_dominant, BigRational::one())], WalkOptions::default()).is_err());
}

#[test]
fn spectral_radius_examples() {
    let d = a1(2);
    let h = HeckeContext::from_datum(&d, 0);
    let rho = spectral_radius(&h, &one_step(&d, 1)).unwrap().value;
    assert!((rho - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
    let lazy = make_walk(&d, &[(d.coweight(1).clone(), BigRational::one())], WalkOptions { lazy: true, eps: false }).unwrap();
    let r2 = spectral_radius(&h, &lazy).unwrap().value;
    assert!((r2 - (1.0 + rho) / 2.0).abs() < 1e-12);

    // root test on the tree return probabilities
    let n = 400;
    let p = h.p_n(&one_step(&d, 1), 2 * n, &Vector::zero(d.dim)).unwrap();
    let root = p.powf(1.0 / (2 * n) as f64);
    assert!((root - rho).abs() < 2e-2);
}

#[test]
fn kappa_examples() {
    let d = a1(3);
    let wc = context(&d, one_step(&d, 1));
    let l = d.coweight(1).to_f64();
    let n2 = dotf(&l, &l);
    for t in [-1.3, -0.2, 0.0, 0.4, 2.0] {
        let s: Vec<f64> = l.iter().map(|x| x * t / n2).collect();
        assert!((wc.kappa.eval(&s) - t.cosh()).abs() < 1e-10 * t.cosh());
    }

    let d = a2();
    let half = rat(1, 2);
    let w = make_walk(&d, &[(d.coweight(1).clone(), half.clone()), (d.coweight(2).clone(), half)], WalkOptions::default()).unwrap();
    let wc = context(&d, w);
    assert!((wc.kappa.eval(&vec![0.0; d.dim]) - 1.0).abs() < 1e-10);
    assert!(wc.kappa.terms.iter().all(|(_, c)| *c > 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let roots: Vec<Vec<f64>> = (1..=d.rank).map(|i| d.simple_root(i).to_f64()).collect();
    for _ in 0..20 {
        let coef: Vec<f64> = (0..d.rank).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let s: Vec<f64> = (0..d.dim).map(|k| roots.iter().zip(&coef).map(|(a, c)| a[k] * c).sum()).collect();
        let k0 = wc.kappa.eval(&s);
        for a in &roots {
            let f = 2.0 * dotf(&s, a) / dotf(a, a);
            let r: Vec<f64> = s.iter().zip(a).map(|(x, y)| x - f * y).collect();
            assert!((wc.kappa.eval(&r) - k0).abs() < 1e-12 * k0);
        }
        // convexity: Hessian quadratic form is non-negative
        let hs = wc.kappa.hessian(&s);
        let v: Vec<f64> = (0..d.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let form: f64 = (0..d.dim).map(|i| (0..d.dim).map(|j| v[i] * hs[i][j] * v[j]).sum::<f64>()).sum();
        assert!(form >= -1e-12);
    }
}

#[test]
fn s_u_examples() {
    let d = a1(2);
    let wc = context(&d, one_step(&d, 1));
    let l = d.coweight(1).to_f64();
    let u: Vec<f64> = {
        let n = dotf(&l, &l).sqrt();
        l.iter().map(|x| x / n).collect()
    };
    let sol = wc.solve_s_u(wc.rho.value * 1f64.cosh(), &u).unwrap();
    assert!((dotf(&sol.s, &l) - 1.0).abs() < 1e-12);
    assert!(sol.t > 0.0 && sol.residual <= 1e-12);

    let near = wc.solve_s_u(wc.rho.value * (1.0 + 1e-9), &u).unwrap();
    assert!(dotf(&near.s, &near.s).sqrt() < 1e-3);
    assert!(wc.solve_s_u(wc.rho.value, &u).is_err());
}

#[test]
fn s_u_maximizes_the_direction_on_the_level_set() {
    let d = a2();
    let half = rat(1, 2);
    let w = make_walk(&d, &[(d.coweight(1).clone(), half.clone()), (d.coweight(2).clone(), half)], WalkOptions::default()).unwrap();
    let wc = context(&d, w);
    let level = 1.4;
    let roots: Vec<Vec<f64>> = (1..=d.rank).map(|i| d.simple_root(i).to_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for u in [d.rho_vee(), d.coweight(1).clone(), &d.coweight(1).scale(Q::from_integer(2)) + d.coweight(2)] {
        let uf = u.to_f64();
        let n = dotf(&uf, &uf).sqrt();
        let uf: Vec<f64> = uf.iter().map(|x| x / n).collect();
        let sol = solve_s_u(&wc.kappa, level, &uf).unwrap();
        assert!(sol.residual <= 1e-12);
        assert!((wc.kappa.eval(&sol.s) - level).abs() < 1e-10);
        for a in &roots {
            assert!(dotf(&sol.s, a) >= -1e-10, "s_u left the dominant cone");
        }
        let best = dotf(&uf, &sol.s);
        // scan the level set by bisection along random directions
        for _ in 0..200 {
            let c: Vec<f64> = (0..d.rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dir: Vec<f64> = (0..d.dim).map(|k| roots.iter().zip(&c).map(|(a, x)| a[k] * x).sum()).collect();
            let (mut lo, mut hi) = (0.0, 1.0);
            while wc.kappa.eval(&dir.iter().map(|x| x * hi).collect::<Vec<_>>()) < level {
                hi *= 2.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if wc.kappa.eval(&dir.iter().map(|x| x * mid).collect::<Vec<_>>()) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let p: Vec<f64> = dir.iter().map(|x| x * lo).collect();
            assert!(dotf(&uf, &p) <= best + 1e-10);
        }
    }
}

#[test]
fn green_matches_the_tree() {
    let d = a1(2);
    let wc = context(&d, one_step(&d, 1));
    let zeta = 1.25 * wc.rho.value;
    let targets: Vec<Vector> = (0..=10).map(|k| d.coweight(1).scale(Q::from_integer(k))).collect();
    let g = wc.green_many(zeta, &targets, GreenOptions::default()).unwrap();
    for (k, gv) in g.iter().enumerate() {
        let want = tree_green(2.0, zeta, k as i32);
        assert!((gv.value - want).abs() < 1e-9 * want, "d={} {} {}", k, gv.value, want);
    }
    let far = d.coweight(1).scale(Q::from_integer(100_000));
    let gv = wc.green(zeta, &far, GreenOptions { tol: 1e-12, radius: Some(50), max_steps: 2000 }).unwrap();
    assert_eq!(gv.value, 0.0);
}

#[test]
fn green_decreases_in_zeta() {
    let d = a2();
    let half = rat(1, 2);
    let w = make_walk(&d, &[(d.coweight(1).clone(), half.clone()), (d.coweight(2).clone(), half)], WalkOptions::default()).unwrap();
    let wc = context(&d, w);
    for nu in [Vector::zero(d.dim), d.coweight(1).clone(), d.rho_vee()] {
        let vals: Vec<f64> = [1.1, 1.3, 1.6, 2.0]
            .iter()
            .map(|f| wc.green(f * wc.rho.value, &nu, GreenOptions::default()).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|p| p[0] > p[1]), "{:?}", vals);
    }
}

#[test]
fn martin_kernel_on_the_tree() {
    let d = a1(2);
    let wc = context(&d, one_step(&d, 1));
    let zeta = 1.25 * wc.rho.value;
    let o = ApartmentPoint::origin(&d);
    let y = ApartmentPoint::from_coweights(&d, &[12]);
    let k = wc.martin_kernel(zeta, &o, &y, GreenOptions::default()).unwrap();
    assert!((k.value - 1.0).abs() < 1e-12);
    for (x, dist) in [(3i64, 9), (-2, 14), (12, 0)] {
        let xp = ApartmentPoint::from_coweights(&d, &[x]);
        let k = wc.martin_kernel(zeta, &xp, &y, GreenOptions::default()).unwrap();
        let want = tree_green(2.0, zeta, dist) / tree_green(2.0, zeta, 12);
        assert!((k.value - want).abs() < 1e-9 * want);
    }
}

#[test]
fn limit_kernel_bottom_examples() {
    let d = a1(2);
    let h = HeckeContext::from_datum(&d, 0);
    let spec = CoreSpec::new(&d, &[], &[], &[], Schedule::Linear).unwrap();
    for k in -3i64..=4 {
        let x = ApartmentPoint::from_coweights(&d, &[k]);
        let v = limit_kernel_bottom(&h, &x, &spec).unwrap().value;
        assert!((v - 2f64.powf(k as f64 / 2.0)).abs() < 1e-12);
    }

    let d = a2();
    let h = HeckeContext::from_datum(&d, 0);
    let o = ApartmentPoint::origin(&d);
    for word in [vec![], vec![1], vec![2, 1]] {
        let spec = CoreSpec::new(&d, &word, &[], &[], Schedule::Linear).unwrap();
        assert!((limit_kernel_bottom(&h, &o, &spec).unwrap().value - 1.0).abs() < 1e-12);
        for c in [[1i64, 0], [0, 1], [2, -1], [-1, -1]] {
            let x = ApartmentPoint::from_coweights(&d, &c);
            let hv = horocycle_h(&o, &x, &spec.w).unwrap();
            let want = d.chi_pow(&hv, 0.5);
            assert!((limit_kernel_bottom(&h, &x, &spec).unwrap().value - want).abs() < 1e-10 * want);
        }
    }
    let spec = CoreSpec::new(&d, &[], &[1], &[Q::from_integer(1)], Schedule::Linear).unwrap();
    assert!((limit_kernel_bottom(&h, &o, &spec).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn limit_kernel_above_examples() {
    let d = a1(2);
    let wc = context(&d, one_step(&d, 1));
    let spec = CoreSpec::new(&d, &[], &[], &[], Schedule::Linear)
        .unwrap()
        .with_direction(&d, d.coweight(1).clone())
        .unwrap();
    let zeta = wc.rho.value * 1f64.cosh();
    let o = ApartmentPoint::origin(&d);
    assert!((wc.limit_kernel_above(zeta, &o, &spec).unwrap().value - 1.0).abs() < 1e-12);
    for k in -2i64..=3 {
        let x = ApartmentPoint::from_coweights(&d, &[k]);
        let v = wc.limit_kernel_above(zeta, &x, &spec).unwrap().value;
        let want = (2f64.sqrt() * std::f64::consts::E).powi(k as i32);
        assert!((v - want).abs() < 1e-10 * want);
    }

    let d = a2();
    let wc = context(&d, one_step(&d, 1));
    let spec = CoreSpec::new(&d, &[], &[1], &[Q::from_integer(1)], Schedule::Linear)
        .unwrap()
        .with_direction(&d, d.coweight(2).clone())
        .unwrap();
    for c in [[1i64, 0], [0, 1], [-1, 1]] {
        let x = ApartmentPoint::from_coweights(&d, &c);
        let above = wc.limit_kernel_above(wc.rho.value * (1.0 + 1e-10), &x, &spec).unwrap().value;
        let bottom = limit_kernel_bottom(&wc.hecke, &x, &spec).unwrap().value;
        assert!((above / bottom - 1.0).abs() < 1e-4);
    }
}

#[test]
fn equivalent_specs_give_equal_kernels() {
    let d = a2();
    let h = HeckeContext::from_datum(&d, 0);
    let (zero, one) = (Q::from_integer(0), Q::from_integer(1));
    let s1 = CoreSpec::new(&d, &[2], &[1], &[zero], Schedule::Linear).unwrap();
    let s2 = CoreSpec::new(&d, &[2, 1], &[1], &[zero], Schedule::Pow2).unwrap();
    let s3 = CoreSpec::new(&d, &[2], &[1], &[one], Schedule::Linear).unwrap();
    let s4 = CoreSpec::new(&d, &[1], &[1], &[zero], Schedule::Linear).unwrap();
    let s5 = CoreSpec::new(&d, &[2, 1], &[1], &[one], Schedule::Linear).unwrap();
    assert!(spec_equivalent(&d, &s1, &s2, false).unwrap());
    assert!(!spec_equivalent(&d, &s1, &s3, false).unwrap());
    assert!(!spec_equivalent(&d, &s1, &s4, false).unwrap());
    assert!(!spec_equivalent(&d, &s3, &s5, false).unwrap());
    let probes: Vec<ApartmentPoint> =
        [[1i64, 0], [0, 1], [2, -1], [-1, 2], [1, 1]].iter().map(|c| ApartmentPoint::from_coweights(&d, c)).collect();
    let values = |s: &CoreSpec| -> Vec<f64> { probes.iter().map(|x| limit_kernel_bottom(&h, x, s).unwrap().value).collect() };
    let (v1, v2, v3, v4, v5) = (values(&s1), values(&s2), values(&s3), values(&s4), values(&s5));
    assert_eq!(v1, v2);
    let differs = |a: &[f64], b: &[f64]| a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-8);
    assert!(differs(&v1, &v3));
    assert!(differs(&v1, &v4));
    assert!(differs(&v3, &v5));
}

#[test]
fn bc_distinguished_walk() {
    let d = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    assert_eq!(bc_i_prime(&d).unwrap(), vec![1]);
    let bc = bc_distinguished(&d).unwrap();
    for w in [&bc.walk, &bc.walk_eps] {
        let s = w.exact.iter().fold(BigRational::zero(), |a, (_, c)| a + c);
        assert!(s.is_one());
    }
    assert!(bc_distinguished(&a2()).is_err());

    let d2 = RootDatum::build(RootType::BC, 2, &[3, 2, 2]).unwrap();
    let bc2 = bc_distinguished(&d2).unwrap();
    assert!(!bc2.i_prime.is_empty());
    for w in [&bc2.walk, &bc2.walk_eps] {
        assert!(w.exact.iter().fold(BigRational::zero(), |a, (_, c)| a + c).is_one());
    }
}

#[test]
fn bc_combinators() {
    let r = |n: i64, d: i64| rat(n, d);
    let n0 = r(3, 1);
    let zi = r(2, 3);
    let nb = [r(1, 2), r(1, 3), r(1, 6)];
    assert_eq!(combine_good_target(true, Some(r(5, 7)), &nb, &n0, &zi), r(5, 7));
    assert_eq!(combine_good_target(false, None, &nb, &n0, &zi), r(2, 9));
    assert_eq!(combine_eps_target(false, None, &nb, &n0, &zi), r(2, 9));
    assert_eq!(combine_eps_target(true, Some(r(1, 4)), &nb, &n0, &zi), r(1, 4));
    // normalizing by the origin value makes the kernel one at the origin
    let k_oy = r(7, 5);
    assert!(kernel_from_eps(&k_oy, &k_oy).is_one());
    let k_xy = r(3, 5);
    let k = kernel_from_eps(&k_xy, &k_oy);
    assert_eq!(k * k_oy, k_xy);
}

#[test]
fn bc_drift_closed_form() {
    let d = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    let (model, closed) = bc_drift_diagnostic(&d).unwrap();
    assert!((closed - (1.5 - 2f64.sqrt())).abs() < 1e-14);
    assert!((model - closed).abs() < 1e-12, "{} {}", model, closed);
    let d = RootDatum::build(RootType::BC, 2, &[3, 2, 5]).unwrap();
    let (model, closed) = bc_drift_diagnostic(&d).unwrap();
    assert!((model - closed).abs() < 1e-12, "{} {}", model, closed);
}

#[test]
fn extrapolation_helpers() {
    let ms: Vec<f64> = (4..12).map(|m| m as f64).collect();
    let vals: Vec<f64> = ms.iter().map(|m| 2.5 + 1.0 / m - 3.0 / (m * m)).collect();
    let e = extrapolate_inverse_powers(&ms, &vals, 2).unwrap();
    assert!((e.value - 2.5).abs() < 1e-10);
    let geo: Vec<f64> = (0..6).map(|k| 1.0 + 0.5f64.powi(k)).collect();
    assert!((aitken(&geo).unwrap() - 1.0).abs() < 1e-12);
}
