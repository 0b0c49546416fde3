//! Cross-checks the interval-count implementation of the Pareto score
//! sensitivity against a literal evaluation of its defining sets.
//!
//! The library counts `W - S - 1` over candidate boxes; this oracle instead
//! partitions the other candidates into current dominators and
//! non-dominators and applies the two set conditions directly, so the two
//! computations share no code path.

use privsel::pareto::ParetoDeltaEngine;
use privsel::sensitivity::Sensitivity;
use privsel::RandomSource;
use proptest::prelude::*;

/// Per-candidate sensitivity `base + t * step` for one objective.
struct GridSensitivity {
    base: Vec<f64>,
    step: Vec<f64>,
}

impl Sensitivity<(), usize> for GridSensitivity {
    fn eval(&self, _x: &(), t: u32, r: &usize) -> f64 {
        self.base[*r] + t as f64 * self.step[*r]
    }
}

/// `delta_PS(x,t,r)` straight from its definition: dominators of `r` that
/// could stop dominating within the accumulated movement budget, plus
/// non-dominators that could start.
fn literal_delta_ps(utils: &[Vec<f64>], cum: &[Vec<f64>], r: usize) -> f64 {
    let m = utils.len();
    let n = utils[0].len();
    let lo = |i: usize, q: usize| utils[i][q] - cum[i][q];
    let hi = |i: usize, q: usize| utils[i][q] + cum[i][q];
    let mut count = 0u32;
    for q in 0..n {
        if q == r {
            continue;
        }
        let dominates = (0..m).all(|i| utils[i][q] >= utils[i][r]);
        let moved = if dominates {
            (0..m).any(|i| lo(i, q) <= hi(i, r))
        } else {
            (0..m).all(|i| hi(i, q) >= lo(i, r))
        };
        if moved {
            count += 1;
        }
    }
    count as f64
}

/// Movement budgets accumulated independently of the engine.
fn accumulate(grids: &[GridSensitivity], n: usize, t: u32) -> Vec<Vec<f64>> {
    grids
        .iter()
        .map(|g| {
            (0..n)
                .map(|r| {
                    let mut sum = 0.0;
                    for j in 0..=t {
                        sum += g.eval(&(), j, &r);
                    }
                    sum
                })
                .collect()
        })
        .collect()
}

fn check_instance(utils: Vec<Vec<f64>>, grids: Vec<GridSensitivity>, t_max: u32) {
    let n = utils[0].len();
    let candidates: Vec<usize> = (0..n).collect();
    let refs: Vec<&dyn Sensitivity<(), usize>> = grids
        .iter()
        .map(|g| g as &dyn Sensitivity<(), usize>)
        .collect();
    let mut engine = ParetoDeltaEngine::new(&(), &candidates, &refs, utils.clone()).unwrap();
    for t in 0..=t_max {
        let cum = accumulate(&grids, n, t);
        for r in 0..n {
            let expected = literal_delta_ps(&utils, &cum, r);
            let got = engine.delta_at(r, t).unwrap();
            assert_eq!(got, expected, "candidate {r} at distance {t}");
        }
    }
}

proptest! {
    #[test]
    fn engine_matches_literal_sets(
        (utils, bases, steps) in (1usize..9, 1usize..4).prop_flat_map(|(n, m)| (
            proptest::collection::vec(
                proptest::collection::vec(-3i64..4, n), m),
            proptest::collection::vec(
                proptest::collection::vec(0u8..4, n), m),
            proptest::collection::vec(
                proptest::collection::vec(0u8..3, n), m),
        )),
    ) {
        let matrix: Vec<Vec<f64>> = utils
            .iter()
            .map(|row| row.iter().map(|&v| v as f64).collect())
            .collect();
        let grids: Vec<GridSensitivity> = bases
            .iter()
            .zip(&steps)
            .map(|(b, s)| GridSensitivity {
                base: b.iter().map(|&v| v as f64 / 2.0).collect(),
                step: s.iter().map(|&v| v as f64 / 2.0).collect(),
            })
            .collect();
        check_instance(matrix, grids, 4);
    }
}

#[test]
fn sweep_path_matches_literal_sets() {
    // 100 candidates forces the two-objective sweep; draw utilities and
    // widths from coarse grids so exact coordinate ties are common.
    let mut rng = RandomSource::new(97);
    let n = 100;
    let utils: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..n).map(|_| (rng.below(9) as f64 - 4.0) / 2.0).collect())
        .collect();
    let grids: Vec<GridSensitivity> = (0..2)
        .map(|_| GridSensitivity {
            base: (0..n).map(|_| rng.below(3) as f64 / 2.0).collect(),
            step: (0..n).map(|_| rng.below(2) as f64 / 2.0).collect(),
        })
        .collect();
    check_instance(utils, grids, 3);
}

#[test]
fn known_three_candidate_instance_both_layers() {
    // Equal objectives (1,3,5) with distance-0 widths (0.5, 1, 1.5) kept
    // constant across distances; the literal sets give (0,1,1) at t=0 and
    // (2,2,2) at t=1.
    let utils = vec![vec![1.0, 3.0, 5.0]; 2];
    let widths = vec![0.5, 1.0, 1.5];
    let grids: Vec<GridSensitivity> = (0..2)
        .map(|_| GridSensitivity {
            base: widths.clone(),
            step: vec![0.0; 3],
        })
        .collect();
    let cum0 = accumulate(&grids, 3, 0);
    assert_eq!(
        (0..3)
            .map(|r| literal_delta_ps(&utils, &cum0, r))
            .collect::<Vec<f64>>(),
        vec![0.0, 1.0, 1.0]
    );
    let cum1 = accumulate(&grids, 3, 1);
    assert_eq!(
        (0..3)
            .map(|r| literal_delta_ps(&utils, &cum1, r))
            .collect::<Vec<f64>>(),
        vec![2.0, 2.0, 2.0]
    );
    check_instance(utils, grids, 4);
}
