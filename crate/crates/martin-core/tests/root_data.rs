use martin_core::root_data::{classical_order, classical_positive_count};
use martin_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    rat(n, 1)
}

/// Degrees of the basic invariants.
const DEGREES: &[(RootType, usize, &[u64])] = &[
    (RootType::A, 1, &[2]),
    (RootType::A, 2, &[2, 3]),
    (RootType::A, 3, &[2, 3, 4]),
    (RootType::B, 2, &[2, 4]),
    (RootType::C, 2, &[2, 4]),
    (RootType::B, 3, &[2, 4, 6]),
    (RootType::C, 3, &[2, 4, 6]),
    (RootType::D, 4, &[2, 4, 4, 6]),
    (RootType::G, 2, &[2, 6]),
    (RootType::F, 4, &[2, 6, 8, 12]),
    (RootType::E, 6, &[2, 5, 6, 8, 9, 12]),
];

/// `prod (1 - t^d) / (1 - t)` at `t = 1/q`.
fn degree_poincare(degrees: &[u64], q: i64) -> BigRational {
    let t = rat(1, q);
    let mut acc = BigRational::one();
    for &d in degrees {
        let mut td = BigRational::one();
        for _ in 0..d {
            td *= &t;
        }
        acc = acc * (BigRational::one() - td) / (BigRational::one() - &t);
    }
    acc
}

#[test]
fn build_examples() {
    let a1 = RootDatum::build(RootType::A, 1, &[2, 2]).unwrap();
    assert_eq!(a1.positive, vec![a1.simple_root(1).clone()]);
    assert_eq!(a1.elements().unwrap().len(), 2);
    let a2 = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    assert_eq!((a2.positive.len(), a2.elements().unwrap().len()), (3, 6));
    let bc = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    assert_eq!(bc.positive, vec![Vector::from_ints(&[1]), Vector::from_ints(&[2])]);
    assert_eq!(bc.indivisible, vec![Vector::from_ints(&[1])]);
}

#[test]
fn counts_follow_the_degrees() {
    for &(kind, rank, degrees) in DEGREES {
        let d = RootDatum::build(kind, rank, &vec![2; rank + 1]).unwrap();
        let order: u64 = degrees.iter().product();
        let npos: u64 = degrees.iter().map(|x| x - 1).sum();
        assert_eq!(d.elements().unwrap().len() as u64, order, "{}", d.label());
        assert_eq!(classical_order(kind, rank), order as u128);
        assert_eq!(d.positive.len() as u64, npos, "{}", d.label());
        assert_eq!(classical_positive_count(kind, rank) as u64, npos);
        assert_eq!(d.weyl.longest.len() as u64, npos);
    }
}

#[test]
fn poincare_matches_the_degree_product() {
    for &(kind, rank, degrees) in DEGREES.iter().filter(|e| e.1 <= 3 || e.0 == RootType::F) {
        for q in [2u64, 3] {
            let d = RootDatum::build(kind, rank, &vec![q; rank + 1]).unwrap();
            assert_eq!(d.poincare_full().unwrap(), degree_poincare(degrees, q as i64), "{} q={}", d.label(), q);
        }
    }
}

#[test]
fn coweights_are_dual_to_simple_roots() {
    for &(kind, rank, _) in DEGREES {
        let d = RootDatum::build(kind, rank, &vec![2; rank + 1]).unwrap();
        for i in 1..=rank {
            for j in 1..=rank {
                let want = if i == j { Q::one() } else { Q::zero() };
                assert_eq!(d.coweight(i).dot(d.simple_root(j)), want, "{} {} {}", d.label(), i, j);
            }
        }
    }
}

#[test]
fn good_types_are_the_minuscule_marks() {
    for &(kind, rank, _) in DEGREES {
        let d = RootDatum::build(kind, rank, &vec![2; rank + 1]).unwrap();
        let mut want = vec![0];
        want.extend((1..=rank).filter(|&i| d.marks[i - 1] == 1));
        assert_eq!(d.good_types, want, "{}", d.label());
    }
}

#[test]
fn root_parameters_are_constant_on_orbits() {
    for (kind, rank, q) in [
        (RootType::C, 2, vec![3, 2, 3]),
        (RootType::B, 3, vec![2, 2, 2, 3]),
        (RootType::G, 2, vec![3, 2, 3]),
        (RootType::BC, 2, vec![4, 2, 3]),
    ] {
        let d = RootDatum::build(kind, rank, &q).unwrap();
        for a in &d.indivisible {
            for w in d.elements().unwrap() {
                let b = w.apply(a);
                let b = if d.is_positive(&b) { b } else { -&b };
                assert_eq!(d.q_root(&b), d.q_root(a), "{} {} {}", d.label(), a, b);
            }
        }
    }
}

#[test]
fn selection_rule_and_errors() {
    assert!(RootDatum::build(RootType::C, 2, &[2, 3, 3]).is_err());
    assert!(RootDatum::build(RootType::BC, 2, &[3, 2, 3]).is_err());
    assert!(RootDatum::build(RootType::A, 2, &[2, 1, 2]).is_err());
    assert!(RootDatum::build(RootType::A, 2, &[2, 2]).is_err());
    assert!(RootDatum::build(RootType::G, 3, &[2, 2, 2, 2]).is_err());
    assert!("X".parse::<RootType>().is_err());
}

#[test]
fn chi_examples() {
    let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    assert!(d.chi_exact(&Vector::zero(d.dim)).unwrap().is_one());
    assert_eq!(d.chi_exact(d.coweight(1)).unwrap(), int(4));
    let bc = RootDatum::build(RootType::BC, 1, &[4, 2]).unwrap();
    assert_eq!(bc.chi_exact(&Vector::from_ints(&[1])).unwrap(), int(8));
}

#[test]
fn vertex_counts_against_projective_geometry() {
    // tree spheres: (q + 1) q^{n-1}
    for q in [2u64, 3, 5] {
        let d = RootDatum::build(RootType::A, 1, &[q, q]).unwrap();
        for n in 1..6i64 {
            let want = int((q as i64 + 1) * (q as i64).pow(n as u32 - 1));
            assert_eq!(d.n_lambda(&d.from_coweight_ints(&[n]), false).unwrap(), want);
        }
    }
    // points of PG(r, q) and the Grassmannian of lines in PG(3, q)
    for q in [2i64, 3] {
        for r in 2..=3usize {
            let d = RootDatum::build(RootType::A, r, &vec![q as u64; r + 1]).unwrap();
            let points = (q.pow(r as u32 + 1) - 1) / (q - 1);
            assert_eq!(d.n_lambda(d.coweight(1), false).unwrap(), int(points));
            assert_eq!(d.n_lambda(d.coweight(r), false).unwrap(), int(points));
        }
        let d = RootDatum::build(RootType::A, 3, &[q as u64; 4]).unwrap();
        let lines = (q.pow(4) - 1) * (q.pow(3) - 1) / ((q * q - 1) * (q - 1));
        assert_eq!(d.n_lambda(d.coweight(2), false).unwrap(), int(lines));
    }
    let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    assert!(d.n_lambda(&Vector::zero(d.dim), false).unwrap().is_one());
    assert!(d.n_lambda(&d.from_coweight_ints(&[1, -1]), false).is_err());
}

#[test]
fn poincare_examples() {
    let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    assert!(d.poincare_parabolic(&[]).unwrap().is_one());
    // length profile (1, 2, 2, 1)
    assert_eq!(d.poincare_full().unwrap(), int(1) + int(2) * rat(1, 2) + int(2) * rat(1, 4) + rat(1, 8));
    assert_eq!(d.poincare_stabilizer(d.coweight(1)).unwrap(), rat(3, 2));
}

#[test]
fn dominant_rep_is_orbit_invariant() {
    let d = RootDatum::build(RootType::C, 2, &[3, 2, 3]).unwrap();
    for c in [[1, 0], [0, 1], [2, 3], [-1, 2], [-3, -1]] {
        let v = d.from_coweight_ints(&c);
        let (lam, w) = d.dominant_rep(&v);
        assert_eq!(w.apply(&lam), v);
        for u in d.elements().unwrap() {
            let (lam2, w2) = d.dominant_rep(&u.apply(&v));
            assert_eq!(lam2, lam);
            assert_eq!(w2.apply(&lam2), u.apply(&v));
        }
    }
    let a1 = RootDatum::build(RootType::A, 1, &[2, 2]).unwrap();
    let (lam, w) = a1.dominant_rep(&-a1.coweight(1));
    assert_eq!((&lam, w.word.as_slice()), (a1.coweight(1), &[1usize][..]));
    let a2 = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    let (lam, w) = a2.dominant_rep(a2.coweight(2));
    assert_eq!(&lam, a2.coweight(2));
    assert!(w.is_empty());
}

#[test]
fn projections_pair_like_the_input_on_j() {
    let d = RootDatum::build(RootType::B, 3, &[2, 2, 2, 3]).unwrap();
    for j in [vec![1], vec![2], vec![3], vec![1, 2], vec![2, 3], vec![1, 3]] {
        for c in [[1, 0, 0], [0, 1, 0], [2, -1, 3], [1, 1, 1]] {
            let v = d.from_coweight_ints(&c);
            let (p, qv) = d.proj_j(&j, &v).unwrap();
            for &k in &j {
                assert_eq!(p.dot(d.simple_root(k)), v.dot(d.simple_root(k)));
                assert!(qv.dot(d.simple_root(k)).is_zero());
            }
            let (pp, _) = d.proj_j(&j, &p).unwrap();
            assert_eq!(pp, p);
        }
    }
    assert!(d.proj_j(&[1, 2, 3], d.coweight(1)).is_err());
}

#[test]
fn subsystem_examples() {
    let d = RootDatum::build(RootType::A, 2, &[2, 2, 2]).unwrap();
    assert_eq!(d.sub_system(&[1]).unwrap().positive, vec![d.simple_root(1).clone()]);
    let empty = d.sub_system(&[]).unwrap();
    assert!(empty.positive.is_empty());
    assert_eq!(empty.elements.len(), 1);
    let bc = RootDatum::build(RootType::BC, 2, &[4, 2, 3]).unwrap();
    assert_eq!(bc.sub_system(&[2]).unwrap().positive, vec![Vector::from_ints(&[0, 1]), Vector::from_ints(&[0, 2])]);
}

#[test]
fn json_round_trip() {
    for (kind, rank, q) in [(RootType::A, 2, vec![2, 2, 2]), (RootType::BC, 2, vec![4, 2, 3]), (RootType::F, 4, vec![2; 5])] {
        let d = RootDatum::build(kind, rank, &q).unwrap();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        let back = RootDatum::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.positive, d.positive);
        assert_eq!(back.params.q, d.params.q);
    }
}
