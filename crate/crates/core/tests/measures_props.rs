mod common;

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;
use oscstat::measures::{
    birkhoff_average, empirical, invariance_defect, Measure, Observable, ReferenceMeasure, Trig,
};
use oscstat::systems::{DynamicalSystem, Fixed, State, StateSpace, SymbolSequence};
use oscstat::weakstar::{build_family, TestFamily};
use oscstat::{Exact, Scalar};
use proptest::prelude::*;

use common::{catalog_case, CASE_KINDS};

fn small_family(space: StateSpace) -> TestFamily {
    build_family(space, 3).unwrap()
}

fn some_observables(space: StateSpace) -> Vec<Observable> {
    match space {
        StateSpace::Shift { alphabet: 2 } => vec![
            Observable::cylinder(vec![0, 1]),
            Observable::Cylinder { word: vec![1], offset: 2 },
            Observable::cos(3),
            Observable::sin(1),
        ],
        StateSpace::Shift { .. } => vec![Observable::cylinder(vec![2]), Observable::cylinder(vec![0, 0])],
        StateSpace::Circle => vec![Observable::cos(2), Observable::sin(5)],
        StateSpace::Torus => vec![Observable::torus_mode(1, -2, Trig::Cos), Observable::torus_mode(0, 3, Trig::Sin)],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shift_identity(kind in 0..CASE_KINDS, seed in any::<u64>(), m in 0u64..20_000, n in 1u64..64) {
        let (sys, x) = catalog_case(kind, seed);
        let direct = empirical(&sys, &x, m, n).unwrap();
        let moved = empirical(&sys, &sys.iterate(&x, m).unwrap(), 0, n).unwrap();
        prop_assert_eq!(direct.atoms(), moved.atoms());
    }

    #[test]
    fn window_splicing(kind in 0..CASE_KINDS, seed in any::<u64>(), m in 0u64..5000, n1 in 1u64..40, n2 in 1u64..40) {
        let (sys, x) = catalog_case(kind, seed);
        let whole = empirical(&sys, &x, m, n1 + n2).unwrap();
        let left = empirical(&sys, &x, m, n1).unwrap();
        let right = empirical(&sys, &x, m + n1, n2).unwrap();
        let joined: Vec<State> = left.atoms().iter().chain(right.atoms()).cloned().collect();
        prop_assert_eq!(whole.atoms(), &joined[..]);
        for phi in some_observables(sys.space()) {
            let w: Exact = whole.integrate(&phi).unwrap();
            let l: Exact = left.integrate(&phi).unwrap();
            let r: Exact = right.integrate(&phi).unwrap();
            let total = Exact::from_u64(n1 + n2);
            prop_assert_eq!(w, l * Exact::from_u64(n1) / total.clone() + r * Exact::from_u64(n2) / total);
        }
    }

    #[test]
    fn defect_is_at_most_two_over_n(kind in 0..CASE_KINDS, seed in any::<u64>(), m in 0u64..5000, n in 1u64..48) {
        let (sys, x) = catalog_case(kind, seed);
        let mu = empirical(&sys, &x, m, n).unwrap();
        let fam = small_family(sys.space());
        let defect: Exact = invariance_defect(&mu, &sys, &fam).unwrap();
        prop_assert!(defect <= Exact::ratio(2, n));
        // and equals the largest telescoped difference
        let first = sys.iterate(&x, m).unwrap();
        let past = sys.iterate(&x, m + n).unwrap();
        let mut worst = Exact::from_u64(0);
        for phi in fam.observables() {
            let d = (Exact::from_f64(phi.eval(&first).unwrap()) - Exact::from_f64(phi.eval(&past).unwrap())).abs()
                / Exact::from_u64(n);
            if d > worst {
                worst = d;
            }
        }
        prop_assert_eq!(defect, worst);
    }

    #[test]
    fn integration_is_linear(kind in 0..CASE_KINDS, seed in any::<u64>(), m in 0u64..2000, n in 1u64..40,
                             a in -8i32..8, b in -8i32..8) {
        let (sys, x) = catalog_case(kind, seed);
        let mu = empirical(&sys, &x, m, n).unwrap();
        let obs = some_observables(sys.space());
        let (f, g) = (&obs[0], &obs[1]);
        // int (a f + b g) computed atom by atom against the combination of integrals
        let (a, b) = (Exact::from_f64(a as f64), Exact::from_f64(b as f64));
        let mut direct = Exact::from_u64(0);
        for atom in mu.atoms() {
            direct += a.clone() * Exact::from_f64(f.eval(atom).unwrap()) + b.clone() * Exact::from_f64(g.eval(atom).unwrap());
        }
        direct /= Exact::from_u64(n);
        let combined = a * mu.integrate::<Exact>(f).unwrap() + b * mu.integrate::<Exact>(g).unwrap();
        prop_assert_eq!(direct, combined);
    }

    #[test]
    fn birkhoff_average_is_the_empirical_integral(kind in 0..CASE_KINDS, seed in any::<u64>(), m in 0u64..2000, n in 1u64..40) {
        let (sys, x) = catalog_case(kind, seed);
        for phi in some_observables(sys.space()) {
            let avg: f64 = birkhoff_average(&sys, &x, m, n, &phi).unwrap();
            let int: f64 = empirical(&sys, &x, m, n).unwrap().integrate(&phi).unwrap();
            prop_assert_eq!(avg.to_bits(), int.to_bits());
        }
        let c = Observable::constant(0.375);
        prop_assert_eq!(birkhoff_average::<f64>(&sys, &x, m, n, &c).unwrap(), 0.375);
    }
}

fn third() -> State {
    State::symbolic(Arc::new(SymbolSequence::periodic(2, vec![0, 1]).unwrap()))
}

#[test]
fn empirical_examples() {
    let sys = DynamicalSystem::doubling();
    let x = third();
    let dirac = empirical(&sys, &x, 0, 1).unwrap();
    assert_eq!(dirac.atoms(), &[x.clone()]);
    let mu = empirical(&sys, &x, 1, 2).unwrap();
    assert_eq!(mu.atoms(), &[sys.iterate(&x, 1).unwrap(), sys.iterate(&x, 2).unwrap()]);
    assert!(empirical(&sys, &x, 0, 0).is_err());

    // atoms 1/3 and 2/3 (binary 0101... and 1010...)
    let mu = empirical(&sys, &x, 0, 2).unwrap();
    let coded: Vec<Fixed> = mu.atoms().iter().map(|a| a.as_symbolic().unwrap().dyadic().unwrap()).collect();
    assert_eq!(coded, vec![Fixed(0x5555_5555_5555_5555), Fixed(0xAAAA_AAAA_AAAA_AAAA)]);
    let v: f64 = mu.integrate(&Observable::cos(1)).unwrap();
    assert!((v + 0.5).abs() < 1e-15);
    let avg: f64 = birkhoff_average(&sys, &x, 0, 2, &Observable::cos(1)).unwrap();
    assert_eq!(avg, v);
    let single: f64 = birkhoff_average(&sys, &x, 5, 1, &Observable::cylinder(vec![1])).unwrap();
    assert_eq!(single, 1.0);
}

#[test]
fn integrate_examples() {
    let leb = ReferenceMeasure::lebesgue(StateSpace::Circle, "leb");
    assert_eq!(leb.integrate::<f64>(&Observable::cos(1)).unwrap(), 0.0);
    let fair = ReferenceMeasure::bernoulli(vec![0.5, 0.5], "fair").unwrap();
    assert_eq!(fair.integrate::<f64>(&Observable::cylinder(vec![0, 1])).unwrap(), 0.25);
    assert!(leb.integrate::<f64>(&Observable::cylinder(vec![0, 1])).is_err());
    let mu = empirical(&DynamicalSystem::doubling(), &third(), 0, 1).unwrap();
    assert!(mu.integrate::<f64>(&Observable::torus_mode(1, 1, Trig::Cos)).is_err());
}

#[test]
fn defect_examples() {
    let sys = DynamicalSystem::doubling();
    let fam = build_family(StateSpace::Shift { alphabet: 2 }, 4).unwrap();
    // the whole period-two orbit: f permutes the atoms
    let orbit = empirical(&sys, &third(), 0, 2).unwrap();
    assert_eq!(invariance_defect::<Exact>(&orbit, &sys, &fam).unwrap(), Exact::from_u64(0));

    // one atom: the defect is the single telescoped difference
    let x = State::symbolic(Arc::new(SymbolSequence::eventually_periodic(2, vec![1], vec![0]).unwrap()));
    let mu = empirical(&sys, &x, 0, 1).unwrap();
    let cyl = TestFamily::custom(sys.space(), vec![Observable::cylinder(vec![1])]).unwrap();
    assert_eq!(invariance_defect::<Exact>(&mu, &sys, &cyl).unwrap(), Exact::from_u64(1));
    // 1/2 -> 0 flips cos(2 pi x) from -1 to 1, reaching the bound 2/n
    let cos = TestFamily::custom(sys.space(), vec![Observable::cos(1)]).unwrap();
    assert_eq!(invariance_defect::<Exact>(&mu, &sys, &cos).unwrap(), Exact::from_u64(2));
}

#[test]
fn bernoulli_sampling_consistency() {
    let p = vec![0.3, 0.7];
    let n = 100_000u64;
    let x = State::symbolic(Arc::new(SymbolSequence::seeded_iid(p.clone(), 2024, n + 8).unwrap()));
    let sys = DynamicalSystem::full_shift(2).unwrap();
    let mu = empirical(&sys, &x, 0, n).unwrap();
    let reference = ReferenceMeasure::bernoulli(p, "skew").unwrap();
    let fam = build_family(sys.space(), 3).unwrap();
    for phi in fam.observables() {
        let got: f64 = mu.integrate(phi).unwrap();
        let want: f64 = reference.integrate(phi).unwrap();
        assert!((got - want).abs() < 0.02, "{phi:?}: {got} vs {want}");
    }
}

#[test]
fn exact_integrals_lift_f64_values() {
    let sys = DynamicalSystem::rotation(Fixed::GOLDEN);
    let mu = empirical(&sys, &State::Circle(Fixed::ZERO), 0, 10).unwrap();
    let exact: Exact = mu.integrate(&Observable::cos(1)).unwrap();
    let mut sum = BigRational::from_integer(0.into());
    for a in mu.atoms() {
        sum += Exact::from_f64(Observable::cos(1).eval(a).unwrap());
    }
    assert_eq!(exact, sum / Exact::from_u64(10));
    let rounded: f64 = mu.integrate(&Observable::cos(1)).unwrap();
    // the f64 path rounds the exact sum once, then divides
    assert!((rounded - exact.to_f64()).abs() <= 2.0 * f64::EPSILON);
}
