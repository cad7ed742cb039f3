use mirror_morse::dg_model::{
    hom_dimension, monomial_basis, multiply_bases, MonomialClass, NormalizedBasis,
};
use mirror_morse::lagrangian::{hom_indices, FactorGeometry};
use mirror_morse::{compose, hom_space, LineObject, PosExact, ProductPolytope};
use proptest::prelude::*;

fn increasing_triple(max_gap: i64) -> impl Strategy<Value = (i64, i64, i64)> {
    (0i64..=2, 0..=max_gap, 0..=max_gap).prop_map(|(a, d1, d2)| (a, a + d1, a + d1 + d2))
}

fn pick(basis: &[NormalizedBasis], k: usize) -> &NormalizedBasis {
    &basis[k % basis.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dg_product_is_associative(
        n in 1usize..=3,
        a in 0i64..=1,
        gaps in (0i64..=2, 0i64..=2, 0i64..=2),
        picks in (any::<usize>(), any::<usize>(), any::<usize>()),
    ) {
        let dims = [n];
        let objs: Vec<LineObject> = [a, a + gaps.0, a + gaps.0 + gaps.1, a + gaps.0 + gaps.1 + gaps.2]
            .iter()
            .map(|&l| LineObject::single(l))
            .collect();
        let b01 = monomial_basis(&dims, &objs[0], &objs[1]);
        let b12 = monomial_basis(&dims, &objs[1], &objs[2]);
        let b23 = monomial_basis(&dims, &objs[2], &objs[3]);
        let (u, v, w) = (pick(&b01, picks.0), pick(&b12, picks.1), pick(&b23, picks.2));

        let (c_uv, uv) = multiply_bases(u, v).unwrap();
        let (c_uv_w, left) = multiply_bases(&NormalizedBasis::new(uv), w).unwrap();
        let (c_vw, vw) = multiply_bases(v, w).unwrap();
        let (c_u_vw, right) = multiply_bases(u, &NormalizedBasis::new(vw)).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(&c_uv * &c_uv_w, &c_vw * &c_u_vw);
        for c in [&c_uv, &c_uv_w, &c_vw, &c_u_vw] {
            prop_assert!(*c <= PosExact::one());
        }
    }

    #[test]
    fn composition_weight_is_at_most_one(
        n in 1usize..=3,
        (a, b, c) in increasing_triple(2),
        picks in (any::<usize>(), any::<usize>()),
    ) {
        let p = ProductPolytope::projective_space(n).unwrap();
        let (la, lb, lc) = (LineObject::single(a), LineObject::single(b), LineObject::single(c));
        let left = hom_space(&p, &la, &lb).unwrap();
        let right = hom_space(&p, &lb, &lc).unwrap();
        let g = &left.generators[picks.0 % left.rank()];
        let h = &right.generators[picks.1 % right.rank()];
        let out = compose(g, h).unwrap();
        prop_assert!(out.weight <= PosExact::one());
        prop_assert_eq!(out.generator.index(), &g.index() + &h.index());

        let same_point = match (&g.factors()[0].geometry, &h.factors()[0].geometry) {
            (FactorGeometry::Point(x), FactorGeometry::Point(y)) => x == y,
            _ => true,
        };
        prop_assert_eq!(out.weight.is_one(), same_point);
    }
}

#[test]
fn identities_compose_with_unit_weight() {
    for dims in [vec![1], vec![2], vec![3], vec![1, 1], vec![1, 2]] {
        let p = ProductPolytope::new(&dims).unwrap();
        let src = LineObject::new(vec![0; dims.len()]);
        let tgt = LineObject::new(vec![2; dims.len()]);
        let id_src = mirror_morse::HomGenerator::identity(&src, &dims);
        let id_tgt = mirror_morse::HomGenerator::identity(&tgt, &dims);
        for g in hom_space(&p, &src, &tgt).unwrap().generators {
            let l = compose(&id_src, &g).unwrap();
            let r = compose(&g, &id_tgt).unwrap();
            assert!(l.weight.is_one() && r.weight.is_one());
            assert_eq!(l.generator, g);
            assert_eq!(r.generator, g);
        }
        let unit = NormalizedBasis::new(MonomialClass::identity(&src, &dims));
        assert!(unit.constant.is_one());
        for u in monomial_basis(&dims, &src, &tgt) {
            let (c, class) = multiply_bases(&unit, &u).unwrap();
            assert!(c.is_one());
            assert_eq!(class, u.class);
        }
    }
}

#[test]
fn sectors_partition_the_hom_space() {
    for n in 1..=3 {
        for a in 0..=2 {
            for b in a..=a + 3 {
                let gens = hom_indices(a, b, n);
                assert_eq!(gens.len() as u64, hom_dimension(a, b, n));
                let p = ProductPolytope::projective_space(n).unwrap();
                let space = hom_space(&p, &LineObject::single(a), &LineObject::single(b)).unwrap();
                let total: usize = space.sectors().values().map(Vec::len).sum();
                assert_eq!(total, space.rank());
                for (index, members) in space.sectors() {
                    assert!(members.iter().all(|g| g.index() == index));
                }
            }
        }
    }
}
