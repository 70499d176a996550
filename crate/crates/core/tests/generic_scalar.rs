//! The kernels run in any scalar satisfying `Real`; a quick f32 pass keeps
//! the generic path honest (tolerances here are loose: f32 only).

use wpme::mesh::{assemble, BoundaryKind, Mesh1D};
use wpme::solver::{step, DtPolicy, SolverConfig};
use wpme::weights::WeightSpec;

#[test]
fn f32_stack_builds_and_steps() {
    let spec = WeightSpec::<f32>::power(1.0, 0.5, 1.0).unwrap();
    let mesh = Mesh1D::<f32>::build((0.0, 1.0), 24, 2.0).unwrap();
    let ops = assemble(&spec, &mesh, BoundaryKind::Neumann).unwrap();
    let mut cfg = SolverConfig::<f32>::new(2.0, DtPolicy::Fixed(1e-3)).unwrap();
    cfg.newton_tol = 1e-5;
    let u = mesh.sample(|x| 1.0 + 0.3 * (6.0 * x).sin());
    let mass0 = ops.mass(&u);
    let (next, stats) = step(&ops, &cfg, &u, 1e-3).unwrap();
    assert!(stats.newton_iters <= 10);
    let drift = (ops.mass(&next) - mass0).abs();
    assert!(drift <= 1e-5 * (1.0 + mass0.abs()), "drift {drift}");

    let range = spec.admissible_sigma().unwrap();
    assert!(range.upper.is_infinite());
}
