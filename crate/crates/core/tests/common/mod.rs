#![allow(dead_code)]

use std::sync::Arc;

use oscstat::systems::{
    design_transitive_point, Adjacency, DesignItem, DynamicalSystem, Fixed, PointDesign, State,
    SymbolSequence,
};

pub const CASE_KINDS: u8 = 6;

pub fn golden_mean() -> Adjacency {
    Adjacency::new(&[vec![0, 1], vec![1, 1]]).unwrap()
}

/// A system from the catalog with a point on it, picked by `kind` and
/// varied by `seed`.
pub fn catalog_case(kind: u8, seed: u64) -> (DynamicalSystem, State) {
    let word = |d: Vec<f64>| {
        State::symbolic(Arc::new(SymbolSequence::seeded_iid(d, seed, 1 << 24).unwrap()))
    };
    match kind % CASE_KINDS {
        0 => (DynamicalSystem::full_shift(2).unwrap(), word(vec![0.5, 0.5])),
        1 => (DynamicalSystem::full_shift(3).unwrap(), word(vec![0.2, 0.3, 0.5])),
        2 => {
            let design = PointDesign {
                alphabet: 2,
                items: vec![DesignItem::Dense { min_len: 1, max_len: 1 + (seed % 5) as usize }],
                tail: vec![1, 0],
                adjacency: Some(golden_mean()),
                seed,
            };
            let p = design_transitive_point(&design).unwrap();
            (DynamicalSystem::sft(golden_mean()), State::symbolic(p.sequence))
        }
        3 => (DynamicalSystem::doubling(), word(vec![0.5, 0.5])),
        4 => {
            let x = Fixed(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let y = Fixed(seed.rotate_left(17) ^ 0x5555_5555);
            (DynamicalSystem::cat_map([[2, 1], [1, 1]]).unwrap(), State::Torus(x, y))
        }
        _ => {
            let angle = Fixed(seed.wrapping_mul(0xD1B5_4A32_D192_ED03) | 1);
            (DynamicalSystem::rotation(angle), State::Circle(Fixed(seed.rotate_right(7))))
        }
    }
}
