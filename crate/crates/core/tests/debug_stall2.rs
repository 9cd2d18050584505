use rdcp_core::corpus;
use rdcp_core::info::{DistortionSpec, DivergenceSpec};
use rdcp_core::solver::*;

#[test]
#[ignore]
fn stall_cell() {
    let mut rng = corpus::rng(0xacce_0003);
    use rand::prelude::*;
    // regenerate the same instance 3 (skip first three)
    let mut src = None;
    for i in 0..4 {
        let nx = rng.random_range(2..=3);
        let ny = rng.random_range(1..=2);
        let s = corpus::random_source(&mut rng, nx, ny, true);
        if i == 3 { src = Some(s); }
    }
    let src = src.unwrap();
    let xhat = ReconstructionSpace::from_source(&src);
    let dist = DistortionSpec::hamming(src.x_alphabet(), &xhat.labels);
    let mut cfg = SolverConfig::default();
    cfg.max_iterations = 400;
    // per-y: condition on y=0 and y=1 separately to see which stalls
    for y in 0..src.num_y() {
        let sub = src.condition_on_y(y).unwrap();
        let q = TradeoffQuery {
            distortion_bound: 0.3425,
            perception_bound: PerceptionBound::Level(0.3),
            mode: ConstraintMode::PerY,
            divergence: DivergenceSpec::TotalVariation,
        };
        match solve_rdcp(&sub, &xhat, &dist, &q, &cfg) {
            Ok(pt) => eprintln!("y={y}: rate {} gap {} iters {}", pt.rate_bits, pt.certified_gap_bits, pt.iterations),
            Err(e) => eprintln!("y={y}: {e}"),
        }
        eprintln!("cond = {:?}", sub.p_x());
    }
}
