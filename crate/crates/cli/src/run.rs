//! Executes a [`RunConfig`] and collects the tables and reports it produces.

use darboux2l::closed_forms::{Case1Params, Case2Params, Case3Params};
use darboux2l::darboux::{ChainSpec, ChainStep, DarbouxPair};
use darboux2l::numerics::{TimeGrid, Trajectory};
use darboux2l::seeds::{
    constant_seed, tanh_seed_general, tanh_seed_real, ConstantSeedParams, SeedFamily, TanhGeneralSeed, TanhSeedParams,
};
use darboux2l::system::{residual_profile, PotentialSpec, TwoLevelSystem};
use darboux2l::verify::{self, CheckReport, FamilyCase, CORRUPTION_LEVEL, SOLUTION_TOL};
use darboux2l::{Complex64, Result as LibResult, Spinor2};

use crate::config::{Command, Family, RunConfig, SeedKind};
use crate::CliError;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub table: Option<Table>,
    pub reports: Vec<CheckReport>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.command {
        Command::Potential => potential(cfg),
        Command::Seed => seed(cfg),
        Command::Transform => transform(cfg),
        Command::Chain => chain(cfg),
        Command::Verify => verify_preset(cfg),
    }
}

enum Case {
    One(Case1Params),
    Two(Case2Params),
    Three(Case3Params),
}

impl Case {
    fn potential(&self) -> PotentialSpec {
        match self {
            Case::One(p) => PotentialSpec::Case1(*p),
            Case::Two(p) => PotentialSpec::Case2(*p),
            Case::Three(p) => PotentialSpec::Case3(*p),
        }
    }

    fn base(&self) -> PotentialSpec {
        match self {
            Case::One(p) => p.base_potential(),
            Case::Two(p) => p.base_potential(),
            Case::Three(p) => p.base_potential(),
        }
    }

    fn pair(&self) -> DarbouxPair {
        match self {
            Case::One(p) => p.pair(),
            Case::Two(p) => p.pair(),
            Case::Three(p) => p.pair(),
        }
    }

    fn spinor(&self, eps: Complex64, t: f64) -> LibResult<Spinor2> {
        match self {
            Case::One(p) => p.transformed_spinor(eps, t),
            Case::Two(p) => p.transformed_spinor(eps, t),
            Case::Three(p) => p.transformed_spinor(eps, t),
        }
    }
}

fn case1(cfg: &RunConfig) -> Result<Case1Params, CliError> {
    Ok(Case1Params::new(cfg.require("R0")?, cfg.require("c0")?, cfg.param("gamma0").unwrap_or(0.0))?)
}

fn closed_form_case(cfg: &RunConfig) -> Result<Case, CliError> {
    match cfg.family {
        Some(Family::Case1) => Ok(Case::One(case1(cfg)?)),
        Some(Family::Case2) => Ok(Case::Two(Case2Params::new(
            case1(cfg)?,
            cfg.require("R1")?,
            cfg.param("gamma1").unwrap_or(0.0),
        )?)),
        Some(Family::Case3) => Ok(Case::Three(Case3Params::new(
            cfg.require("r0")?,
            cfg.require("r1")?,
            cfg.require("T")?,
            cfg.require("R")?,
            cfg.require("p")?,
        )?)),
        other => Err(CliError::Usage(format!(
            "{} needs family case1, case2 or case3, got {}",
            cfg.command.name(),
            other.map(Family::name).unwrap_or("none")
        ))),
    }
}

fn potential_spec(cfg: &RunConfig) -> Result<PotentialSpec, CliError> {
    Ok(match cfg.family {
        Some(Family::Constant) => PotentialSpec::constant(cfg.require("c0")?)?,
        Some(Family::Sech) => PotentialSpec::sech(cfg.require("r0")?, cfg.require("T")?)?,
        Some(Family::Tanh) => PotentialSpec::tanh_step(cfg.require("r0")?, cfg.require("r1")?, cfg.require("T")?)?,
        _ => closed_form_case(cfg)?.potential(),
    })
}

fn no_negative_control(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.negative_control {
        return Err(CliError::Usage(format!("--negative-control has no checks to corrupt in {}", cfg.command.name())));
    }
    Ok(())
}

fn potential(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    no_negative_control(cfg)?;
    let spec = potential_spec(cfg)?;
    let mut table = Table::new(vec!["t".into(), "f".into()]);
    for &t in cfg.grid.time_grid().samples() {
        table.rows.push(vec![t, spec.eval(t)?]);
    }
    Ok(RunOutput { table: Some(table), reports: Vec::new() })
}

fn spinor_columns(label: &str, suffix: &str) -> Vec<String> {
    [("re", 1), ("im", 1), ("re", 2), ("im", 2)]
        .iter()
        .map(|(part, k)| format!("{part}_{label}{k}{suffix}"))
        .collect()
}

fn push_spinor(row: &mut Vec<f64>, s: &Spinor2) {
    row.extend([s.psi1.re, s.psi1.im, s.psi2.re, s.psi2.im]);
}

fn single_epsilon(cfg: &RunConfig) -> Result<Complex64, CliError> {
    match (cfg.epsilons_given, cfg.epsilons.as_slice()) {
        (true, [e]) => Ok(*e),
        _ => Err(CliError::Usage("seed needs exactly one --eps".into())),
    }
}

/// Residual and integration cross-check of one trajectory.
fn solution_reports(traj: &Trajectory, sys: &TwoLevelSystem, cfg: &RunConfig, label: &str) -> Result<Vec<CheckReport>, CliError> {
    let grid = &traj.grid;
    let (max, worst_t) = residual_profile(traj, sys)?;
    let note = format!("epsilon = {}{:+}i", sys.epsilon.re, sys.epsilon.im);
    let residual = CheckReport::new(format!("{label}_residual"), grid, max, SOLUTION_TOL, worst_t).with_note(note.clone());

    let numeric = sys.integrate(traj.states[0], grid, cfg.rel_tol, cfg.abs_tol)?;
    let scale = traj.states.iter().map(Spinor2::norm).fold(1.0, f64::max);
    let (gap, gap_t) = numeric
        .states
        .iter()
        .zip(&traj.states)
        .zip(grid.samples())
        .map(|((a, b), &t)| ((*a - *b).norm() / scale, t))
        .fold((0.0, grid.t_start()), |acc, x| if x.0 > acc.0 { x } else { acc });
    let integration = CheckReport::new(format!("{label}_integration_gap"), grid, gap, SOLUTION_TOL, gap_t)
        .with_note(note)
        .with_note(format!("rel_tol = {:e}, abs_tol = {:e}", cfg.rel_tol, cfg.abs_tol));
    Ok(vec![residual, integration])
}

fn maybe_corrupt(traj: Trajectory, cfg: &RunConfig) -> Trajectory {
    if cfg.negative_control {
        verify::corrupt_trajectory(&traj, CORRUPTION_LEVEL)
    } else {
        traj
    }
}

fn seed(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let grid = cfg.grid.time_grid();
    let (traj, sys) = match cfg.family {
        Some(Family::Constant) => {
            let c0 = cfg.require("c0")?;
            let params = ConstantSeedParams::new(c0, single_epsilon(cfg)?, cfg.amplitude("p0", ONE), cfg.amplitude("q0", ONE))?;
            let traj = Trajectory::sample(&grid, |t| Ok(constant_seed(&params, t)))?;
            (traj, TwoLevelSystem::new(params.epsilon, PotentialSpec::constant(c0)?)?)
        }
        Some(Family::Tanh) => {
            let (r0, r1, t_scale) = (cfg.require("r0")?, cfg.require("r1")?, cfg.require("T")?);
            let base = PotentialSpec::tanh_step(r0, r1, t_scale)?;
            match cfg.param("R") {
                Some(radius) => {
                    if cfg.epsilons_given {
                        return Err(CliError::Usage("--eps conflicts with --R: the real tanh seed sits at -iR/T".into()));
                    }
                    let params = TanhSeedParams::new(r0, r1, t_scale, radius, cfg.param("p").unwrap_or(1.0))?;
                    let traj = Trajectory::sample(&grid, |t| tanh_seed_real(&params, t))?;
                    (traj, TwoLevelSystem::new(params.epsilon(), base)?)
                }
                None => {
                    let eps = single_epsilon(cfg)?;
                    let seed = TanhGeneralSeed::new(r0, r1, t_scale, eps, cfg.amplitude("c1", ONE), cfg.amplitude("c2", ONE))?;
                    let traj = Trajectory::sample(&grid, |t| tanh_seed_general(&seed, t))?;
                    (traj, TwoLevelSystem::new(eps, base)?)
                }
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "seed family must be constant or tanh, got {}",
                other.map(Family::name).unwrap_or("none")
            )))
        }
    };
    let traj = maybe_corrupt(traj, cfg);
    let mut table = Table::new(std::iter::once("t".to_string()).chain(spinor_columns("psi", "")).collect());
    for (&t, s) in grid.samples().iter().zip(&traj.states) {
        let mut row = vec![t];
        push_spinor(&mut row, s);
        table.rows.push(row);
    }
    let reports = solution_reports(&traj, &sys, cfg, "seed")?;
    Ok(RunOutput { table: Some(table), reports })
}

/// Wide table `t, f_0..f_n, <spinor columns per epsilon>` plus solution checks
/// of every spinor against the last potential.
fn sweep(
    cfg: &RunConfig,
    potential_names: Vec<String>,
    potentials: impl Fn(f64) -> LibResult<Vec<f64>>,
    spinor: impl Fn(Complex64, f64) -> LibResult<Spinor2>,
    transformed: PotentialSpec,
) -> Result<RunOutput, CliError> {
    let grid = cfg.grid.time_grid();
    let mut columns: Vec<String> = std::iter::once("t".to_string()).chain(potential_names).collect();
    for k in 0..cfg.epsilons.len() {
        columns.extend(spinor_columns("phi", &format!("_e{k}")));
    }
    let mut trajectories = Vec::new();
    let mut reports = Vec::new();
    for &eps in &cfg.epsilons {
        let traj = maybe_corrupt(Trajectory::sample(&grid, |t| spinor(eps, t))?, cfg);
        let sys = TwoLevelSystem::new(eps, transformed.clone())?;
        reports.extend(solution_reports(&traj, &sys, cfg, "solution")?);
        trajectories.push(traj);
    }
    let mut table = Table::new(columns);
    for (i, &t) in grid.samples().iter().enumerate() {
        let mut row = vec![t];
        row.extend(potentials(t)?);
        for traj in &trajectories {
            push_spinor(&mut row, &traj.states[i]);
        }
        table.rows.push(row);
    }
    Ok(RunOutput { table: Some(table), reports })
}

fn transform(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let case = closed_form_case(cfg)?;
    let (base, pair, new) = (case.base(), case.pair(), case.potential());
    sweep(
        cfg,
        ["f", "alpha", "beta", "f1"].map(String::from).to_vec(),
        |t| {
            let (a, b) = pair.alpha_beta(t)?;
            Ok(vec![base.eval(t)?, a, b, new.eval(t)?])
        },
        |eps, t| case.spinor(eps, t),
        new.clone(),
    )
}

fn chain(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    if cfg.radii.is_empty() {
        return Err(CliError::Usage("chain requires --radii".into()));
    }
    let seed = match cfg.seed.expect("checked by parse_config") {
        SeedKind::Constant => SeedFamily::Constant { c0: cfg.require("c0")? },
        SeedKind::Tanh => SeedFamily::TanhStep { r0: cfg.require("r0")?, r1: cfg.require("r1")?, t_scale: cfg.require("T")? },
    };
    let constants = match (cfg.constants.len(), seed) {
        (0, SeedFamily::Constant { .. }) => vec![0.0; cfg.radii.len()],
        (0, SeedFamily::TanhStep { .. }) => vec![1.0; cfg.radii.len()],
        (n, _) if n == cfg.radii.len() => cfg.constants.clone(),
        (n, _) => {
            return Err(CliError::Usage(format!(
                "--constants has {n} entries but --radii has {}",
                cfg.radii.len()
            )))
        }
    };
    let steps = cfg.radii.iter().zip(&constants).map(|(&r, &c)| ChainStep::new(r, c)).collect();
    let spec = ChainSpec::new(seed, steps)?;
    let names = (0..=cfg.radii.len()).map(|k| format!("f{k}")).collect();
    sweep(
        cfg,
        names,
        |t| Ok(spec.at(t, None)?.potentials),
        |eps, t| spec.spinor(eps, t),
        PotentialSpec::Chain(spec.clone()),
    )
}

fn verify_preset(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let case = closed_form_case(cfg)?;
    let grid: TimeGrid = cfg.grid.time_grid();
    let solutions = |eps: Complex64, t: f64| case.spinor(eps, t);
    let family = FamilyCase {
        name: cfg.family.map(Family::name).unwrap_or(""),
        pair: case.pair(),
        base: case.base(),
        transformed: case.potential(),
        solutions: &solutions,
    };
    let mut reports = verify::verify_family(&family, &grid, &cfg.epsilons)?;
    if cfg.negative_control {
        for mut r in verify::negative_controls(&family, &grid, &cfg.epsilons)? {
            r.check_name = format!("negative/{}", r.check_name);
            reports.push(r);
        }
    }
    Ok(RunOutput { table: None, reports })
}
