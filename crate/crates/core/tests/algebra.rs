mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uag_core::algebra::{
    generate_subalgebra, graph_functional, is_homomorphism, Derivation, Elem, FiniteAlgebra,
    Product, Signature,
};
use uag_core::Error;

fn grp_product(names: &[&str]) -> Product {
    Product::new(sig("Grp"), names.iter().map(|n| alg(n)).collect()).unwrap()
}

#[test]
fn apply_op_examples() {
    assert_eq!(alg("Z2").apply_op("mul", &[1, 1]).unwrap(), 0);
    assert_eq!(alg("Z2").apply_op("e", &[]).unwrap(), 0);
    assert_eq!(alg("LZ2").apply_op("mul", &[0, 1]).unwrap(), 0);
}

#[test]
fn apply_op_errors_are_distinct() {
    let z2 = alg("Z2");
    assert!(matches!(z2.apply_op("pow", &[1]), Err(Error::UnknownSymbol(_))));
    assert!(matches!(
        z2.apply_op("mul", &[1]),
        Err(Error::ArityMismatch { expected: 2, found: 1, .. })
    ));
    assert!(matches!(
        z2.apply_op("mul", &[1, 2]),
        Err(Error::IndexOutOfRange { index: 2, size: 2 })
    ));
}

#[test]
fn construction_validates_tables() {
    let s = Arc::new(Signature::new("S", [("f", 1)]).unwrap());
    assert!(FiniteAlgebra::new(s.clone(), 2, vec![vec![0, 2]]).is_err());
    assert!(FiniteAlgebra::new(s.clone(), 2, vec![vec![0]]).is_err());
    assert!(FiniteAlgebra::new(s.clone(), 2, vec![]).is_err());
    assert!(FiniteAlgebra::new(s, 0, vec![vec![]]).is_err());
    assert!(Signature::new("D", [("f", 1), ("f", 2)]).is_err());
}

#[test]
fn homomorphism_examples() {
    assert!(is_homomorphism(&alg("Z2"), &alg("Z2"), &[0, 1]).unwrap());
    assert!(!is_homomorphism(&alg("Z2"), &alg("Z3"), &[0, 1]).unwrap());
    assert!(!is_homomorphism(&alg("LZ2"), &alg("RZ2"), &[0, 1]).unwrap());
    assert!(matches!(
        is_homomorphism(&alg("Z2"), &alg("LZ2"), &[0, 1]),
        Err(Error::SignatureMismatch { .. })
    ));
}

#[test]
fn product_algebra_is_componentwise() {
    let p = FiniteAlgebra::product(&[&alg("LZ2"), &alg("RZ2")]).unwrap();
    assert_eq!(&p, &*alg("LZ2xRZ2"));
}

#[test]
fn generation_examples() {
    let z2z2 = grp_product(&["Z2", "Z2"]);
    let sub = generate_subalgebra(&z2z2, &[vec![0, 1]]).unwrap();
    let elements: Vec<&[Elem]> = sub.elements().collect();
    assert_eq!(elements, vec![&[0, 1][..], &[0, 0][..]]);
    let sig = sig("Grp");
    let witnesses: Vec<String> = (0..sub.len())
        .map(|i| sub.witness(i).display(&sig).to_string())
        .collect();
    assert_eq!(witnesses, ["x1", "e"]);

    let z2 = grp_product(&["Z2"]);
    assert_eq!(generate_subalgebra(&z2, &[vec![0]]).unwrap().len(), 1);

    let z2z3 = grp_product(&["Z2", "Z3"]);
    let all = generate_subalgebra(&z2z3, &[vec![1, 1]]).unwrap();
    assert_eq!(all.len(), 6);
}

#[test]
fn generation_without_constants_or_generators_fails() {
    let p = Product::power(&alg("LZ2"), 2);
    assert!(matches!(generate_subalgebra(&p, &[]), Err(Error::EmptyGeneration)));
    let q = Product::power(&alg("Z2"), 2);
    assert_eq!(generate_subalgebra(&q, &[]).unwrap().len(), 1);
}

#[test]
fn generation_order_is_breadth_first() {
    let p = Product::power(&alg("Z3"), 1);
    let sub = generate_subalgebra(&p, &[vec![1]]).unwrap();
    let derivs: Vec<_> = (0..sub.len()).map(|i| sub.derivation(i).clone()).collect();
    assert_eq!(derivs[0], Derivation::Generator(0));
    // e is discovered in the constant round, before any application.
    assert_eq!(sub.element(1), &[0]);
    assert!(matches!(derivs[2], Derivation::Apply { .. }));
    assert_eq!(sub.element(2), &[2]);
}

#[test]
fn graph_functional_examples() {
    let a = grp_product(&["Z2"]);
    let b = grp_product(&["Z3"]);
    let v = graph_functional(&a, &b, &[(vec![1], vec![0])]).unwrap();
    let m = v.mapping().expect("functional");
    let pairs: BTreeSet<(Vec<Elem>, Vec<Elem>)> =
        m.iter().map(|(x, y)| (x.to_vec(), y.to_vec())).collect();
    assert_eq!(
        pairs,
        BTreeSet::from([(vec![0], vec![0]), (vec![1], vec![0])])
    );

    let v = graph_functional(&a, &b, &[(vec![1], vec![1])]).unwrap();
    let bad = v.violation().expect("not functional");
    assert_eq!(bad.first.len(), 1);
    assert_ne!(bad.first, bad.second);
    let z2 = alg("Z2");
    let z3 = alg("Z3");
    assert_eq!(bad.first_witness.eval(&z2, &[1]), bad.source[0]);
    assert_eq!(bad.second_witness.eval(&z2, &[1]), bad.source[0]);
    assert_eq!(bad.first_witness.eval(&z3, &[1]), bad.first[0]);
    assert_eq!(bad.second_witness.eval(&z3, &[1]), bad.second[0]);

    let s3 = grp_product(&["S3"]);
    let v = graph_functional(&s3, &s3, &[(vec![3], vec![3])]).unwrap();
    assert!(v.mapping().unwrap().iter().all(|(x, y)| x == y));
}

/// Brute force: is there a homomorphism from the subalgebra generated by the
/// seed sources into the target product that extends the seeds?
fn brute_force_functional(
    source: &Product,
    target: &Product,
    seeds: &[(Vec<Elem>, Vec<Elem>)],
) -> bool {
    let sources: Vec<Vec<Elem>> = seeds.iter().map(|s| s.0.clone()).collect();
    let sub = generate_subalgebra(source, &sources).unwrap();
    let domain: Vec<Vec<Elem>> = sub.elements().map(<[Elem]>::to_vec).collect();
    let sizes: Vec<usize> = target.factors().iter().map(|f| f.size()).collect();
    let codomain: Vec<Vec<Elem>> = {
        let mut all = vec![vec![]];
        for &n in &sizes {
            all = all
                .into_iter()
                .flat_map(|t| {
                    (0..n).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        all
    };
    let sig = source.signature();
    let n = domain.len();
    let mut choice = vec![0usize; n];
    loop {
        let image = |x: &[Elem]| &codomain[choice[domain.iter().position(|d| d == x).unwrap()]];
        let seeds_ok = seeds.iter().all(|(a, b)| image(a) == b);
        let hom_ok = seeds_ok
            && (0..sig.len()).all(|op| {
                let k = sig.arity(op);
                let mut args = vec![0usize; k];
                loop {
                    let xs: Vec<&[Elem]> = args.iter().map(|&i| domain[i].as_slice()).collect();
                    let lhs = image(&source.apply(op, &xs)).clone();
                    let ys: Vec<&[Elem]> = xs.iter().map(|x| image(x).as_slice()).collect();
                    if lhs != target.apply(op, &ys) {
                        return false;
                    }
                    let mut pos = k;
                    loop {
                        if pos == 0 {
                            return true;
                        }
                        pos -= 1;
                        args[pos] += 1;
                        if args[pos] < n {
                            break;
                        }
                        args[pos] = 0;
                    }
                }
            });
        if hom_ok {
            return true;
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < codomain.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

#[test]
fn graph_functional_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 150 {
        let sigs = signatures();
        let sig = sigs[rng.gen_range(0..sigs.len())].clone();
        let n = rng.gen_range(1..=3);
        let a = Arc::new(random_table_algebra(&mut rng, &sig, n));
        let n = rng.gen_range(1..=3);
        let b = Arc::new(random_table_algebra(&mut rng, &sig, n));
        let source = Product::new(sig.clone(), vec![a.clone()]).unwrap();
        let target = Product::new(sig.clone(), vec![b.clone()]).unwrap();
        let k = rng.gen_range(1..=2);
        let seeds: Vec<(Vec<Elem>, Vec<Elem>)> = (0..k)
            .map(|_| (vec![rng.gen_range(0..a.size())], vec![rng.gen_range(0..b.size())]))
            .collect();
        let sources: Vec<Vec<Elem>> = seeds.iter().map(|s| s.0.clone()).collect();
        if generate_subalgebra(&source, &sources).unwrap().len() > 6 {
            continue;
        }
        let verdict = graph_functional(&source, &target, &seeds).unwrap();
        assert_eq!(
            verdict.is_functional(),
            brute_force_functional(&source, &target, &seeds),
            "A={a:?} B={b:?} seeds={seeds:?}"
        );
        if let Some(m) = verdict.mapping() {
            // The mapping is a homomorphism on the generated part.
            for (x, y) in m.iter() {
                for (x2, y2) in m.iter() {
                    for op in 0..sig.len() {
                        match sig.arity(op) {
                            1 => assert_eq!(
                                m.get(&source.apply(op, &[x])).unwrap(),
                                target.apply(op, &[y]).as_slice()
                            ),
                            2 => assert_eq!(
                                m.get(&source.apply(op, &[x, x2])).unwrap(),
                                target.apply(op, &[y, y2]).as_slice()
                            ),
                            _ => {}
                        }
                    }
                }
            }
        }
        checked += 1;
    }
}

fn arb_instance() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generation_is_a_closure_operator((seed, width) in arb_instance()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigs = signatures();
        let sig = sigs[rng.gen_range(0..sigs.len())].clone();
        let n = rng.gen_range(1..=3);
        let h = Arc::new(random_table_algebra(&mut rng, &sig, n));
        let p = Product::power(&h, width);
        let tuple = |rng: &mut ChaCha8Rng| -> Vec<Elem> {
            (0..width).map(|_| rng.gen_range(0..h.size())).collect()
        };
        let small: Vec<Vec<Elem>> = (0..rng.gen_range(1..=2)).map(|_| tuple(&mut rng)).collect();
        let mut large = small.clone();
        large.push(tuple(&mut rng));

        let sub = generate_subalgebra(&p, &small).unwrap();
        for g in &small {
            prop_assert!(sub.contains(g));
        }
        // Closed under every operation.
        let elems: Vec<Vec<Elem>> = sub.elements().map(<[Elem]>::to_vec).collect();
        for op in 0..sig.len() {
            match sig.arity(op) {
                0 => prop_assert!(sub.contains(&p.apply(op, &[]))),
                1 => for x in &elems {
                    prop_assert!(sub.contains(&p.apply(op, &[x])));
                },
                _ => for x in &elems { for y in &elems {
                    prop_assert!(sub.contains(&p.apply(op, &[x, y])));
                }},
            }
        }
        // Idempotent and monotone.
        let again = generate_subalgebra(&p, &elems).unwrap();
        prop_assert_eq!(again.len(), sub.len());
        let bigger = generate_subalgebra(&p, &large).unwrap();
        for x in &elems {
            prop_assert!(bigger.contains(x));
        }
        // Witnesses evaluate to their elements componentwise.
        for i in 0..sub.len() {
            let w = sub.witness(i);
            for c in 0..width {
                let point: Vec<Elem> = small.iter().map(|g| g[c]).collect();
                prop_assert_eq!(w.eval(&h, &point), sub.element(i)[c]);
            }
        }
    }
}

#[test]
fn standalone_export_matches_componentwise_operations() {
    let p = Product::power(&alg("S3"), 2);
    let sub = generate_subalgebra(&p, &[vec![1, 3], vec![2, 2]]).unwrap();
    let a = sub.to_algebra();
    for x in 0..sub.len() {
        for y in 0..sub.len() {
            let expect = p.apply(2, &[sub.element(x), sub.element(y)]);
            assert_eq!(sub.element(a.apply(2, &[x, y])), expect.as_slice());
        }
    }
}
