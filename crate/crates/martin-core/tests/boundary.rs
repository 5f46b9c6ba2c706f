use martin_core::apartment::{ApartmentPoint, CoreSpec, Schedule};
use martin_core::boundary::*;
use martin_core::vector::{q, qi};
use martin_core::{RootDatum, RootType, Vector, WeylElement};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn a1() -> RootDatum {
    RootDatum::build(RootType::A, 1, &[2, 2]).unwrap()
}

fn a2() -> RootDatum {
    RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap()
}

fn c2() -> RootDatum {
    RootDatum::build(RootType::C, 2, &[3, 2, 3]).unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pt(d: &RootDatum, c: &[i64]) -> ApartmentPoint {
    ApartmentPoint::from_coweights(d, c)
}

/// Ends of the `(q+1)`-regular tree seen from `y`, counted on the sphere of radius
/// `radius`: the fraction whose ray from `x` passes through `z`. Points are positions on
/// a fixed line through `y = 0`.
fn tree_count(qv: usize, x: i64, z: i64, radius: usize) -> BigRational {
    // a vertex is the word of branch choices from y; the line uses branch 0 to the right
    // and branch 1 then 0s to the left
    fn line(p: i64) -> Vec<usize> {
        if p >= 0 {
            vec![0; p as usize]
        } else {
            let mut v = vec![1];
            v.extend(std::iter::repeat_n(0, (-p - 1) as usize));
            v
        }
    }
    fn dist(a: &[usize], b: &[usize]) -> usize {
        let l = a.iter().zip(b).take_while(|(u, v)| u == v).count();
        a.len() + b.len() - 2 * l
    }
    let (xv, zv) = (line(x), line(z));
    let dxz = dist(&xv, &zv);
    let mut hits: u64 = 0;
    let mut total: u64 = 0;
    let mut word = vec![0usize; radius];
    loop {
        total += 1;
        if dist(&xv, &zv) + dist(&zv, &word) == dist(&xv, &word) && dxz <= dist(&xv, &word) {
            hits += 1;
        }
        // next word: first letter in 0..=q, the rest in 0..q
        let mut k = radius;
        loop {
            if k == 0 {
                return r(hits as i64, total as i64);
            }
            k -= 1;
            let cap = if k == 0 { qv + 1 } else { qv };
            word[k] += 1;
            if word[k] < cap {
                break;
            }
            word[k] = 0;
        }
    }
}

#[test]
fn shadow_measures() {
    let d1 = a1();
    let d2 = a2();
    assert_eq!(nu_shadow(&d1, &Vector::zero(d1.dim), false).unwrap(), BigRational::one());
    assert_eq!(nu_shadow(&d1, d1.coweight(1), false).unwrap(), r(1, 3));
    assert_eq!(nu_shadow(&d2, d2.coweight(1), false).unwrap(), r(1, 7));
    let bc = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    // the twisted count swaps the end parameters
    assert_ne!(nu_shadow(&bc, bc.coweight(1), true).unwrap(), nu_shadow(&bc, bc.coweight(1), false).unwrap());
}

#[test]
fn shadows_agree_with_gallery_count() {
    for d in [a1(), a2(), c2(), RootDatum::build(RootType::G, 2, &[2, 2, 2]).unwrap()] {
        let o = ApartmentPoint::origin(&d);
        for c in [[0i64, 0], [1, 0], [0, 1], [1, 1], [2, 0], [2, 1]] {
            let y = pt(&d, &c[..d.rank]);
            assert_eq!(
                nu_y_shadow_points(&d, &o, &o, &y).unwrap(),
                nu_shadow(&d, &y.coords, false).unwrap(),
                "{:?} {:?}",
                d.kind,
                c
            );
        }
    }
}

#[test]
fn rn_derivative_values() {
    let d = a2();
    let o = ApartmentPoint::origin(&d);
    let id = WeylElement::identity(d.dim);
    assert_eq!(rn_derivative(&d, &o, &o, &id).unwrap(), BigRational::one());
    assert_eq!(rn_derivative(&d, &o, &pt(&d, &[1, 0]), &id).unwrap(), r(4, 1));
    let pts = [pt(&d, &[0, 0]), pt(&d, &[1, 0]), pt(&d, &[-1, 2]), pt(&d, &[3, -2])];
    for w in d.elements().unwrap() {
        for x in &pts {
            for y in &pts {
                for z in &pts {
                    let lhs = rn_derivative(&d, x, y, w).unwrap() * rn_derivative(&d, y, z, w).unwrap();
                    assert_eq!(lhs, rn_derivative(&d, x, z, w).unwrap());
                }
            }
        }
    }
}

#[test]
fn mixed_class_rn_on_the_biregular_tree() {
    // BC_1 with q = (4, 2): the good vertex o has 3 neighbours, the eps vertex y has 5
    let d = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    let o = ApartmentPoint::origin(&d);
    let y = ApartmentPoint::new(&d, d.coweight(1).scale(q(1, 2)));
    let (a, b) = (2i64, 4i64);
    let through = WeylElement::identity(d.dim);
    let away = d.element_from_word(&[1]);
    // ends through y: nu_o = 1/(a+1) per branch of o, nu_y = b/(b+1)
    assert_eq!(rn_derivative(&d, &o, &y, &through).unwrap(), r((a + 1) * b, b + 1));
    assert_eq!(rn_derivative(&d, &o, &y, &away).unwrap(), r(a + 1, a * (b + 1)));
    // reciprocity and the eps-eps case
    let y2 = ApartmentPoint::new(&d, d.coweight(1).scale(q(-1, 2)));
    for w in [&through, &away] {
        assert_eq!(rn_derivative(&d, &o, &y, w).unwrap() * rn_derivative(&d, &y, &o, w).unwrap(), BigRational::one());
        let chain = rn_derivative(&d, &y, &o, w).unwrap() * rn_derivative(&d, &o, &y2, w).unwrap();
        assert_eq!(chain, rn_derivative(&d, &y, &y2, w).unwrap());
    }
    let bad = ApartmentPoint::new(&d, d.coweight(1).scale(q(1, 4)));
    assert!(rn_derivative(&d, &o, &bad, &through).is_err());
}

#[test]
fn level_measure_examples() {
    let d = a1();
    for n in 1..6 {
        let desc = LevelSetDescriptor::standard(&d, vec![n]).unwrap();
        let v = level_measure(&d, &desc).unwrap().value;
        assert_eq!(v, r(1, 3) * r(1, 1 << (n - 1)));
    }
    let d = a2();
    for c in [[1i64, 0], [2, 1], [1, 3]] {
        let lam = d.from_coweight_ints(&c);
        let desc = LevelSetDescriptor::standard(&d, LevelSetDescriptor::consistent_vector(&d, &lam).unwrap()).unwrap();
        assert!(desc.is_consistent(&d));
        assert_eq!(level_measure(&d, &desc).unwrap().value, nu_shadow(&d, &lam, false).unwrap());
    }
}

fn grid(len: usize, top: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut n = vec![0i64; len];
    loop {
        out.push(n.clone());
        let mut k = 0;
        while k < len && n[k] == top {
            n[k] = 0;
            k += 1;
        }
        if k == len {
            return out;
        }
        n[k] += 1;
    }
}

#[test]
fn recursion_matches_gallery_count_and_is_path_independent() {
    for d in [a2(), c2()] {
        let mut checked = 0;
        for n in grid(d.indivisible.len(), 3) {
            let desc = LevelSetDescriptor::standard(&d, n.clone()).unwrap();
            let galleries = level_measure_by_galleries(&d, &desc).unwrap();
            if let Some((fwd, _)) = level_measure_by_recursion(&d, &desc, false).unwrap() {
                let (rev, _) = level_measure_by_recursion(&d, &desc, true).unwrap().unwrap();
                assert_eq!(fwd, rev, "{:?}", n);
                assert_eq!(fwd, galleries, "{:?}", n);
                checked += 1;
            }
        }
        assert!(checked > 50);
    }
}

#[test]
fn level_measure_is_antitone_and_a_probability() {
    let d = c2();
    for n in grid(d.indivisible.len(), 2) {
        let desc = LevelSetDescriptor::standard(&d, n.clone()).unwrap();
        let v = level_measure(&d, &desc).unwrap().value;
        assert!(v > BigRational::zero() && v <= BigRational::one());
        for b in 0..n.len() {
            let mut up = n.clone();
            up[b] += 1;
            let vu = level_measure(&d, &LevelSetDescriptor::standard(&d, up).unwrap()).unwrap().value;
            assert!(vu <= v);
        }
    }
}

#[test]
fn level_measure_at_other_frames() {
    // the measure depends on n only
    let d = a2();
    let n = vec![2, 1, 2];
    let base = level_measure(&d, &LevelSetDescriptor::standard(&d, n.clone()).unwrap()).unwrap().value;
    for w in d.elements().unwrap() {
        let x = pt(&d, &[1, -2]);
        let desc = LevelSetDescriptor::new(&d, &x, w.clone(), n.clone()).unwrap();
        assert_eq!(level_measure(&d, &desc).unwrap().value, base);
        assert_eq!(level_measure_by_galleries(&d, &desc).unwrap(), base);
    }
}

#[test]
fn active_and_supporting_walls() {
    let d = a2();
    // the consistent vector of lambda_1 + lambda_2: the long root is implied
    let desc = LevelSetDescriptor::standard(&d, vec![1, 1, 2]).unwrap();
    assert_eq!(desc.active_walls(&d), vec![0, 1]);
    // lowering the long root to 1 makes it cut, so it supports (1, 1, 2) but not (1, 1, 3)
    assert!(desc.supporting(&d, 2));
    assert!(!LevelSetDescriptor::standard(&d, vec![1, 1, 3]).unwrap().supporting(&d, 2));
    let cut = LevelSetDescriptor::standard(&d, vec![1, 1, 1]).unwrap();
    assert_eq!(cut.active_walls(&d), vec![0, 1, 2]);
    assert!(desc.tightened(&d) == desc);
    assert_eq!(LevelSetDescriptor::standard(&d, vec![1, 1, 5]).unwrap().tightened(&d).n, vec![1, 1, 2]);
}

#[test]
fn theta_measure_one_wall() {
    let d = a1();
    for n in 1..5 {
        let desc = LevelSetDescriptor::standard(&d, vec![n]).unwrap();
        let th = theta_measure(&d, &desc).unwrap().value;
        assert_eq!(th, r(1, 3) * r(1, 1 << n));
    }
}

#[test]
fn eta_fold_examples() {
    let d = a1();
    let a = d.simple_root(1).clone();
    let desc = LevelSetDescriptor::standard(&d, vec![2]).unwrap();
    let inside = d.from_coweight_ints(&[1]);
    assert_eq!(eta_fold(&d, &desc, &inside).unwrap(), inside);
    for h0 in 3..7 {
        let y = d.from_coweight_ints(&[h0]);
        let eta = eta_fold(&d, &desc, &y).unwrap();
        assert_eq!(eta.dot(&a), qi(2 * 2 - h0));
    }
    // the folded value depends on h(x, y; omega_0) and n only
    let d = a2();
    let lam = d.from_coweight_ints(&[3, 1]);
    let n = vec![1, 1, 2];
    let base = eta_fold(&d, &LevelSetDescriptor::standard(&d, n.clone()).unwrap(), &lam).unwrap();
    for w in d.elements().unwrap() {
        let x = pt(&d, &[2, -1]);
        let y = &x.coords + &w.apply(&lam);
        let desc = LevelSetDescriptor::new(&d, &x, w.clone(), n.clone()).unwrap();
        assert_eq!(eta_fold(&d, &desc, &y).unwrap(), base);
    }
}

#[test]
fn total_mass_is_one() {
    for d in [a1(), a2(), c2()] {
        let zero = Vector::zero(d.dim);
        for c in grid(d.rank, 3) {
            let lam = d.from_coweight_ints(&c);
            assert_eq!(nu_y_shadow(&d, &lam, &zero).unwrap().value, BigRational::one(), "{:?} {:?}", d.kind, c);
        }
    }
}

#[test]
fn nu_y_shadow_at_x() {
    let d = a2();
    let zero = Vector::zero(d.dim);
    for c in grid(2, 2) {
        let mu = d.from_coweight_ints(&c);
        assert_eq!(nu_y_shadow(&d, &zero, &mu).unwrap().value, nu_shadow(&d, &mu, false).unwrap());
    }
}

#[test]
fn shadow_measure_invariance() {
    let d = a2();
    let pairs = [([2i64, 1], [1i64, 0]), ([1, 2], [0, 2]), ([3, 0], [1, 1]), ([1, 1], [2, 2])];
    for (l, m) in pairs {
        let lam = d.from_coweight_ints(&l);
        let mu = d.from_coweight_ints(&m);
        let base = nu_y_shadow(&d, &lam, &mu).unwrap().value;
        for x in [[0i64, 0], [1, 0], [-2, 3]] {
            let xv = d.from_coweight_ints(&x);
            for w in d.elements().unwrap() {
                let y = ApartmentPoint::new(&d, &xv + &w.apply(&lam));
                let z = ApartmentPoint::new(&d, &xv + &w.apply(&mu));
                let v = nu_y_shadow_points(&d, &ApartmentPoint::new(&d, xv.clone()), &y, &z).unwrap();
                assert_eq!(v, base, "{:?} {:?} x {:?} w {:?}", l, m, x, w.word);
            }
        }
    }
    // a second y in the same sigma class, sharing a sector with z = lambda_1
    let lam = d.from_coweight_ints(&[2, 1]);
    let mu = d.from_coweight_ints(&[1, 0]);
    let s2 = d.element_from_word(&[2]);
    let o = ApartmentPoint::origin(&d);
    let y2 = ApartmentPoint::new(&d, s2.apply(&lam));
    assert_eq!(
        nu_y_shadow_points(&d, &o, &y2, &ApartmentPoint::new(&d, mu.clone())).unwrap(),
        nu_y_shadow(&d, &lam, &mu).unwrap().value
    );
}

#[test]
fn sphere_depth_does_not_matter() {
    let d = a2();
    let o = Vector::zero(d.dim);
    let lam = d.from_coweight_ints(&[3, 0]);
    let mu = d.from_coweight_ints(&[0, 1]);
    let vals: Vec<BigRational> = (0..3).map(|k| region_measure(&d, &o, &lam, std::slice::from_ref(&mu), Some(4 + 4 * k)).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn tree_end_counts() {
    let d = a1();
    // x, y, z as positions on a line through y = 0
    let cases = [(0i64, 1i64, 2i64), (-1, 0, 1), (0, 2, 1), (1, -1, 3), (-2, 0, -3), (0, 0, 3), (2, -1, -2)];
    for (x, y, z) in cases {
        let want = tree_count(2, x - y, z - y, 10);
        let got = nu_y_shadow_points(&d, &pt(&d, &[x]), &pt(&d, &[y]), &pt(&d, &[z])).unwrap();
        assert_eq!(got, want, "x {} y {} z {}", x, y, z);
    }
    let d3 = RootDatum::build(RootType::A, 1, &[3, 3]).unwrap();
    let got = nu_y_shadow_points(&d3, &pt(&d3, &[0]), &pt(&d3, &[1]), &pt(&d3, &[2])).unwrap();
    assert_eq!(got, tree_count(3, -1, 1, 7));
    // lambda = lambda_1, mu = 2 lambda_1, q = 2: a third of the ends from y pass z
    assert_eq!(nu_y_shadow(&d, d.coweight(1), &d.coweight(1).scale(qi(2))).unwrap().value, r(1, 3));
}

#[test]
fn furstenberg_whole_boundary_and_regular_specs() {
    let d = a2();
    let o = ApartmentPoint::origin(&d);
    let spec = CoreSpec::new(&d, &[], &[], &[], Schedule::Linear).unwrap();
    let whole = furstenberg_limit(&d, &spec, &o, 12).unwrap();
    assert!(whole.sequence.iter().all(|v| v.is_one()));
    assert_eq!(whole.certificate, Stabilization::Exact);
    // J empty: the limit is the point mass at omega
    let inside = furstenberg_limit(&d, &spec, &pt(&d, &[2, 1]), 30).unwrap();
    assert_eq!(inside.value, BigRational::one());
    let outside = furstenberg_limit(&d, &spec, &pt(&d, &[-1, 2]), 30).unwrap();
    assert_eq!(outside.value, BigRational::zero());
    assert_eq!(outside.facade, Some(BigRational::zero()));
}

#[test]
fn furstenberg_facade_a2() {
    let d = a2();
    let spec = CoreSpec::new(&d, &[], &[1], &[qi(1)], Schedule::Linear).unwrap();
    for (a, b) in [(2i64, 0i64), (3, 1), (0, 2), (1, 0)] {
        let y = pt(&d, &[a, b]);
        let lim = furstenberg_limit(&d, &spec, &y, 30).unwrap();
        assert_eq!(Some(lim.value.clone()), lim.facade, "({}, {})", a, b);
        if a >= 2 {
            let x1 = spec.sigma_n(&d, 1).unwrap();
            assert_eq!(lim.value, facade_shadow(&d, &[1], &(&y.coords - &x1)).unwrap());
        }
    }
}
