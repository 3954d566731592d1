//! Constants re-derived independently with 50-digit arithmetic
//! (tests/oracles/bound_constants.py).

#![allow(clippy::excessive_precision)]

use wdlearn::bounds::{BoundConstants, DependenceKind, DependenceParams};

pub const NAMES: [&str; 9] = ["C1", "C2", "C4", "C5", "Cn1", "Cpn", "Cn2", "Cpn2", "An"];

// M=1.3 L1=0.7 L2=1.9 mu=2 C=1.1 nu=0.8 n=1000
// [C1, C2, C4, C5, Cn1, Cpn, Cn2, Cpn2, An]
pub const TABLE: [(DependenceKind, [f64; 9]); 4] = [
    (
        DependenceKind::Theta,
        [9.464, 79.04, 75.609097218695776151, 8.8856149238951781659, 0.14811717421557122323, 0.17683876264877080365, 172.88855724032899331, 713.66057962952650877, 4732.0],
    ),
    (
        DependenceKind::Eta,
        [9.464, 79.04, 75.609097218695776151, 8.8856149238951781659, 0.14811717421557122323, 0.17683876264877080365, 172.88855724032899331, 713.66057962952650877, 4732.0],
    ),
    (
        DependenceKind::Kappa,
        [4.732, 158.08, 63.824251825862456716, 8.8856149238951781659, 0.12495726428782941514, 0.14884745455053933313, 172.88855724032899331, 713.66057962952650877, 2366.0],
    ),
    (
        DependenceKind::Lambda,
        [7.098, 105.38666666666666667, 68.960343104421470242, 8.8856149238951781659, 0.13807240302257948902, 0.16465024338568548655, 172.88855724032899331, 713.66057962952650877, 3549.0],
    ),
];

/// Inputs behind [`TABLE`], evaluated at n = 1000.
pub fn table_inputs(kind: DependenceKind) -> (BoundConstants, DependenceParams) {
    (
        BoundConstants {
            m: 1.3,
            l: 1.0,
            c0: 1.0,
            d: 1.0,
            s: 1.0,
        },
        DependenceParams {
            kind,
            mu: 2.0,
            l1: 0.7,
            l2: 1.9,
            c: 1.1,
            nu: 0.8,
            ..Default::default()
        },
    )
}
