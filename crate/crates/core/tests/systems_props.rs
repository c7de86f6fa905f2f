mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use oscstat::systems::{check_transitive, DynamicalSystem, Fixed, State, SymbolSequence};
use oscstat::Error;
use proptest::prelude::*;

use common::{catalog_case, CASE_KINDS};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn semigroup_law(kind in 0..CASE_KINDS, seed in any::<u64>(), a in 0u64..5000, b in 0u64..5000) {
        let (sys, x) = catalog_case(kind, seed);
        let direct = sys.iterate(&x, a + b).unwrap();
        let composed = sys.iterate(&sys.iterate(&x, a).unwrap(), b).unwrap();
        prop_assert_eq!(direct, composed);
    }

    #[test]
    fn cursor_agrees_with_iterate(kind in 0..CASE_KINDS, seed in any::<u64>(), steps in prop::collection::vec(0u64..300, 1..6)) {
        let (sys, x) = catalog_case(kind, seed);
        let mut cur = sys.cursor(x.clone()).unwrap();
        let mut total = 0;
        for k in steps {
            cur.advance(k).unwrap();
            total += k;
            prop_assert_eq!(cur.step_index(), total);
            prop_assert_eq!(cur.state(), &sys.iterate(&x, total).unwrap());
        }
    }

    #[test]
    fn doubling_is_conjugate_to_the_shift(seed in any::<u64>(), k in 0u32..64) {
        let x = State::symbolic(Arc::new(SymbolSequence::seeded_iid(vec![0.5, 0.5], seed, 1000).unwrap()));
        let start = x.as_symbolic().unwrap().dyadic().unwrap();
        let moved = DynamicalSystem::doubling().iterate(&x, k as u64).unwrap();
        let coded = moved.as_symbolic().unwrap().dyadic().unwrap();
        // fixed-point 2^k x mod 1 loses the bits shifted in from beyond 2^-64
        let doubled = start.0 << k;
        prop_assert!(coded.0.wrapping_sub(doubled) < 1u64 << k);
    }

    #[test]
    fn rotation_adds_multiples_of_the_angle(angle in any::<u64>(), x in any::<u64>(), k in 0u64..1_000_000_000) {
        let sys = DynamicalSystem::rotation(Fixed(angle));
        let got = sys.iterate(&State::Circle(Fixed(x)), k).unwrap();
        let modulus = BigUint::one() << 64u32;
        let expect = (BigUint::from(x) + BigUint::from(k) * BigUint::from(angle)) % modulus;
        prop_assert_eq!(got, State::Circle(Fixed(expect.to_u64().unwrap())));
    }
}

/// Strong connectivity by boolean matrix powers: `i` reaches `j` iff some
/// `A^l` with `1 <= l <= size` has a nonzero `(i, j)` entry.
fn transitive_oracle(rows: &[Vec<u8>]) -> bool {
    let n = rows.len();
    let mut power: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect();
    let mut reach = power.clone();
    for _ in 1..n {
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).any(|k| power[i][k] && rows[k][j] == 1);
            }
        }
        power = next;
        for i in 0..n {
            for j in 0..n {
                reach[i][j] |= power[i][j];
            }
        }
    }
    reach.iter().all(|r| r.iter().all(|&b| b))
}

fn valid_sft(rows: &[Vec<u8>]) -> bool {
    let n = rows.len();
    (0..n).all(|i| rows[i].iter().any(|&v| v == 1) && (0..n).any(|j| rows[j][i] == 1))
}

#[test]
fn transitivity_matches_reachability_oracle_up_to_size_four() {
    let mut checked = 0;
    for size in 1..=4usize {
        for bits in 0u32..(1 << (size * size)) {
            let rows: Vec<Vec<u8>> = (0..size)
                .map(|i| (0..size).map(|j| ((bits >> (i * size + j)) & 1) as u8).collect())
                .collect();
            if !valid_sft(&rows) {
                assert!(check_transitive(&rows).is_err());
                continue;
            }
            assert_eq!(check_transitive(&rows).unwrap(), transitive_oracle(&rows), "{rows:?}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn transitivity_examples() {
    assert!(check_transitive(&[vec![1, 1], vec![1, 1]]).unwrap());
    assert!(!check_transitive(&[vec![1, 0], vec![0, 1]]).unwrap());
    assert!(check_transitive(&[vec![0, 1], vec![1, 1]]).unwrap());
    assert!(check_transitive(&[]).is_err());
}

fn rational_doubling(x: &BigRational) -> BigRational {
    let y = x * BigRational::from_integer(2.into());
    if y >= BigRational::one() {
        y - BigRational::one()
    } else {
        y
    }
}

fn fixed_value(f: Fixed) -> BigRational {
    BigRational::new(f.0.into(), (BigUint::one() << 64u32).into())
}

#[test]
fn doubling_examples() {
    let sys = DynamicalSystem::doubling();
    let quarter = State::symbolic(Arc::new(SymbolSequence::eventually_periodic(2, vec![0, 1], vec![0]).unwrap()));
    let half = sys.iterate(&quarter, 1).unwrap();
    assert_eq!(half.as_symbolic().unwrap().dyadic().unwrap(), Fixed::HALF);

    // (01)^inf codes 1/3; compare each iterate with the exact rational orbit
    let third = State::symbolic(Arc::new(SymbolSequence::periodic(2, vec![0, 1]).unwrap()));
    let mut exact = BigRational::new(1.into(), 3.into());
    let ulp = BigRational::new(1.into(), (BigUint::one() << 64u32).into());
    for k in 0..6 {
        let coded = fixed_value(sys.iterate(&third, k).unwrap().as_symbolic().unwrap().dyadic().unwrap());
        let gap = &exact - &coded;
        assert!(gap >= BigRational::zero() && gap < ulp, "k = {k}");
        exact = rational_doubling(&exact);
    }
    assert!(sys.iterate(&third, 2).unwrap().same_point(&third));
    assert!(!sys.iterate(&third, 1).unwrap().same_point(&third));
}

#[test]
fn cat_map_fixes_the_origin() {
    let sys = DynamicalSystem::cat_map([[2, 1], [1, 1]]).unwrap();
    let origin = State::Torus(Fixed::ZERO, Fixed::ZERO);
    for k in [0, 1, 7, 1 << 40] {
        assert_eq!(sys.iterate(&origin, k).unwrap(), origin);
    }
    assert!(DynamicalSystem::cat_map([[2, 1], [1, 2]]).is_err());
}

#[test]
fn cat_map_is_linear_mod_one() {
    // A^k applied to a dyadic point equals the exact rational computation mod 1
    let sys = DynamicalSystem::cat_map([[2, 1], [1, 1]]).unwrap();
    let (x, y) = (Fixed(0x1234_5678_9ABC_DEF0), Fixed(0x0FED_CBA9_8765_4321));
    let mut exact = (BigUint::from(x.0), BigUint::from(y.0));
    let modulus = BigUint::one() << 64u32;
    for k in 1..=50u64 {
        exact = (
            (BigUint::from(2u32) * &exact.0 + &exact.1) % &modulus,
            (&exact.0 + &exact.1) % &modulus,
        );
        let got = sys.iterate(&State::Torus(x, y), k).unwrap();
        assert_eq!(got, State::Torus(Fixed(exact.0.to_u64().unwrap()), Fixed(exact.1.to_u64().unwrap())));
    }
}

#[test]
fn horizon_and_admissibility_errors() {
    let seq = Arc::new(SymbolSequence::seeded_iid(vec![0.5, 0.5], 3, 100).unwrap());
    let sys = DynamicalSystem::full_shift(2).unwrap();
    let x = State::symbolic(seq);
    assert!(sys.iterate(&x, 100).is_ok());
    assert!(sys.iterate(&x, 101).unwrap_err().is_range());

    let sft = DynamicalSystem::sft(common::golden_mean());
    let bad = State::symbolic(Arc::new(SymbolSequence::eventually_periodic(2, vec![1, 0, 0], vec![1]).unwrap()));
    assert!(sft.iterate(&bad, 1).is_ok());
    assert!(matches!(sft.iterate(&bad, 2), Err(Error::Inadmissible { from: 0, to: 0, index: 1 })));
}

#[test]
fn designed_point_blocks_are_recorded() {
    use oscstat::systems::{design_transitive_point, BlockKind, DesignItem, PointDesign, TypicalBlock};
    let design = PointDesign {
        alphabet: 2,
        items: vec![
            DesignItem::Block(TypicalBlock {
                label: "zero".into(),
                kind: BlockKind::Periodic { cycle: vec![0] },
                length: 1000,
            }),
            DesignItem::Dense { min_len: 1, max_len: 3 },
            DesignItem::Block(TypicalBlock {
                label: "fair".into(),
                kind: BlockKind::Iid { distribution: vec![0.5, 0.5] },
                length: 1000,
            }),
        ],
        tail: vec![0, 1],
        adjacency: None,
        seed: 11,
    };
    let p = design_transitive_point(&design).unwrap();
    assert_eq!(p.block("zero").unwrap().start, 0);
    assert!(p.sequence.word(0, 1000).unwrap().iter().all(|&s| s == 0));
    let fair = p.block("fair").unwrap();
    assert_eq!(fair.start, 1000 + 2 + 8 + 24);
    let block = p.sequence.word(fair.start, 1000).unwrap();
    let expect = SymbolSequence::seeded_iid(vec![0.5, 0.5], oscstat::systems::derive_seed(11, 2), 999)
        .unwrap()
        .word(0, 1000)
        .unwrap();
    assert_eq!(block, expect);
    let ones = block.iter().filter(|&&s| s == 1).count() as f64 / 1000.0;
    assert!((ones - 0.5).abs() < 0.05);
}
