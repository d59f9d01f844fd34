//! Closed forms against numerical integration and known special values.

use darboux2l::closed_forms::{Case1Params, Case2Params, Case3Params};
use darboux2l::darboux::{ChainSpec, ChainStep};
use darboux2l::hypergeom::hyp2f1;
use darboux2l::numerics::{TimeGrid, Trajectory};
use darboux2l::seeds::{constant_seed, ConstantSeedParams, SeedFamily};
use darboux2l::system::{residual, PotentialSpec, TwoLevelSystem};
use darboux2l::{Complex64, Result, Spinor2};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn integrate_against(
    potential: PotentialSpec,
    eps: Complex64,
    grid: &TimeGrid,
    exact: impl Fn(f64) -> Result<Spinor2>,
) -> f64 {
    let exact = Trajectory::sample(grid, exact).unwrap();
    let sys = TwoLevelSystem::new(eps, potential).unwrap();
    let numeric = sys.integrate(exact.states[0], grid, 1e-11, 1e-13).unwrap();
    numeric.max_deviation(&exact) / exact.states.iter().map(|s| s.norm()).fold(1.0, f64::max)
}

#[test]
fn constant_seed_matches_integration() {
    let params = ConstantSeedParams::new(1.0, c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let grid = TimeGrid::uniform(0.0, 10.0, 201).unwrap();
    let gap = integrate_against(PotentialSpec::constant(1.0).unwrap(), params.epsilon, &grid, |t| {
        Ok(constant_seed(&params, t))
    });
    assert!(gap < 1e-9, "gap {gap}");
}

#[test]
fn transformed_solutions_match_integration() {
    let grid = TimeGrid::uniform(-4.0, 4.0, 161).unwrap();
    let eps = c(0.7, 0.0);
    let p1 = Case1Params::new(1.0, 0.3, 0.2).unwrap();
    let p2 = Case2Params::new(Case1Params::new(1.0, 0.3, 0.1).unwrap(), 2.0, -0.2).unwrap();
    let p3 = Case3Params::new(0.8, 0.3, 1.4, 2.5, 1.7).unwrap();
    let gaps = [
        integrate_against(PotentialSpec::Case1(p1), eps, &grid, |t| p1.transformed_spinor(eps, t)),
        integrate_against(PotentialSpec::Case2(p2), eps, &grid, |t| p2.transformed_spinor(eps, t)),
        integrate_against(PotentialSpec::Case3(p3), eps, &grid, |t| p3.transformed_spinor(eps, t)),
    ];
    for gap in gaps {
        assert!(gap < 1e-8, "gaps {gaps:?}");
    }
}

#[test]
fn three_step_chain_solves_its_equation() {
    let steps = vec![ChainStep::new(1.0, 0.2), ChainStep::new(1.8, -0.3), ChainStep::new(2.6, 0.1)];
    let chain = ChainSpec::new(SeedFamily::Constant { c0: 0.4 }, steps).unwrap();
    let grid = TimeGrid::uniform(-3.0, 3.0, 6001).unwrap();
    let eps = c(1.1, 0.0);
    let traj = Trajectory::sample(&grid, |t| chain.spinor(eps, t)).unwrap();
    let sys = TwoLevelSystem::new(eps, PotentialSpec::Chain(chain.clone())).unwrap();
    let r = residual(&traj, &sys).unwrap();
    assert!(r < 1e-7, "residual {r}");
}

#[test]
fn hypergeometric_special_values() {
    let one = c(1.0, 0.0);
    let poly = hyp2f1(c(-1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), 0.4).unwrap();
    assert!((poly - c(1.0 - 2.0 * 0.4 / 3.0, 0.0)).norm() < 1e-15);
    assert_eq!(hyp2f1(c(0.3, 1.0), c(-2.0, 0.5), c(1.5, 0.2), 0.0).unwrap(), one);
    for z in [0.3, 0.6, 0.9, 0.99] {
        let log = hyp2f1(one, one, c(2.0, 0.0), z).unwrap();
        let expected = -(1.0 - z).ln() / z;
        // c - a - b = 0 goes through the interpolated branch above z = 1/2
        assert!((log.re - expected).abs() < 1e-10 * expected && log.im.abs() < 1e-12, "z = {z}: {log} vs {expected}");
        let x: f64 = z.sqrt();
        let arcsin = hyp2f1(c(0.5, 0.0), c(0.5, 0.0), c(1.5, 0.0), z).unwrap();
        assert!((arcsin.re - x.asin() / x).abs() < 1e-12, "z = {z}");
    }
}
