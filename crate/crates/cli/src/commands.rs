use std::path::{Path, PathBuf};
use std::sync::Arc;

use pdmsusy::susy::{map_state_first, subdomain_spectra, MappedState, MissingState, SubdomainSpectrum};
use pdmsusy::{
    auto_widened_grid, build_grid, confluent_transform, critical_d, discretize, first_order_transform,
    missing_state_first, missing_state_second, run_verify, second_order_nonconfluent, solve_spectrum,
    BoundaryCondition, FirstOrderTransform, Grid, LadderSystem, SampledFunction, SecondOrderTransform,
    Seed, SusyOptions, VerifyReport, VerifySetup,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, Resolved, Scaling};
use crate::error::CliError;
use crate::output::{Artifact, Columns};

#[derive(Debug, Serialize)]
struct GridInfo {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridInfo {
    fn of(g: &Grid) -> Self {
        Self {
            x_min: g.x_min(),
            x_max: g.x_max(),
            n_points: g.len(),
        }
    }
}

fn highest_index(r: &Resolved) -> usize {
    let seeds = r.raw.transform.seeds.iter().copied().max().unwrap_or(0);
    (r.raw.system.levels - 1).max(seeds)
}

fn run_grid(r: &Resolved, n_max: usize) -> Result<Arc<Grid>, CliError> {
    let g = &r.raw.grid;
    if g.auto {
        Ok(auto_widened_grid(&r.profile, &r.ladder, g.n_points, n_max, g.epsilon)?)
    } else {
        let (a, b) = (g.x_min.expect("validated"), g.x_max.expect("validated"));
        Ok(build_grid(a, b, g.n_points)?)
    }
}

fn system(r: &Resolved) -> Result<LadderSystem, CliError> {
    let grid = run_grid(r, highest_index(r))?;
    Ok(LadderSystem::build(&r.profile, &r.ladder, &grid)?)
}

fn options(r: &Resolved) -> SusyOptions {
    SusyOptions {
        seed_tolerance: r.tolerances.seed,
        mask_radius: r.mask_radius,
    }
}

fn states_csv(grid: &Grid, prefix: &str, functions: &[&SampledFunction]) -> Columns {
    functions
        .iter()
        .enumerate()
        .fold(Columns::new(grid.points()), |c, (i, f)| c.push(format!("{prefix}_{i}"), f.values()))
}

#[derive(Debug, Serialize)]
struct LadderSummary {
    profile: String,
    delta_e: f64,
    a: f64,
    hbar: f64,
    anchor: f64,
    grid: GridInfo,
    energies: Vec<f64>,
    bc_satisfied: Vec<bool>,
    bc_residuals: Vec<f64>,
}

pub fn ladder(r: &Resolved) -> Result<Vec<Artifact>, CliError> {
    let sys = system(r)?;
    let states = sys.states(r.raw.system.levels - 1)?;
    let grid = sys.grid();
    let summary = LadderSummary {
        profile: r.profile.label().to_owned(),
        delta_e: sys.delta_e(),
        a: sys.a(),
        hbar: sys.hbar(),
        anchor: sys.anchor(),
        grid: GridInfo::of(grid),
        energies: states.iter().map(|s| s.energy).collect(),
        bc_satisfied: states.iter().map(|s| s.satisfies_bc).collect(),
        bc_residuals: states.iter().map(|s| s.bc_residual).collect(),
    };
    let psi: Vec<&SampledFunction> = states.iter().map(|s| &s.wavefunction).collect();
    Ok(vec![
        Artifact::csv(
            "potential.csv",
            Columns::new(grid.points()).push("V", sys.potential().values()),
        ),
        Artifact::csv("states.csv", states_csv(grid, "psi", &psi)),
        Artifact::json("spectrum.json", &summary),
    ])
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    profile: String,
    grid: GridInfo,
    eigenvalues: Vec<f64>,
    node_counts: Vec<usize>,
    bc_residuals: Vec<f64>,
    /// Ladder energies of the states that satisfy the boundary conditions.
    ladder_energies: Vec<f64>,
    deviations: Vec<f64>,
    max_deviation: f64,
}

pub fn solve(r: &Resolved) -> Result<Vec<Artifact>, CliError> {
    let levels = r.raw.system.levels;
    let sys = system(r)?;
    let op = discretize(&r.profile, sys.potential(), BoundaryCondition::dirichlet(), sys.hbar())?;
    let report = solve_spectrum(&op, levels)?;
    let ladder_energies: Vec<f64> = sys
        .states(2 * levels - 1)?
        .into_iter()
        .filter(|s| s.satisfies_bc)
        .map(|s| s.energy)
        .take(levels)
        .collect();
    let deviations: Vec<f64> = report
        .eigenvalues
        .iter()
        .zip(&ladder_energies)
        .map(|(e, l)| e - l)
        .collect();
    let summary = SolveSummary {
        profile: r.profile.label().to_owned(),
        grid: GridInfo::of(sys.grid()),
        max_deviation: deviations.iter().fold(0.0, |a: f64, d| a.max(d.abs())),
        eigenvalues: report.eigenvalues.clone(),
        node_counts: report.node_counts.clone(),
        bc_residuals: report.bc_residuals.clone(),
        ladder_energies,
        deviations,
    };
    let phi: Vec<&SampledFunction> = report.eigenfunctions.iter().collect();
    Ok(vec![
        Artifact::csv("eigenfunctions.csv", states_csv(sys.grid(), "phi", &phi)),
        Artifact::json("spectrum.json", &summary),
    ])
}

fn ladder_seed(sys: &LadderSystem, index: usize, scaling: Scaling) -> Result<Seed, CliError> {
    let state = sys.nth_state(index)?;
    Ok(match scaling {
        Scaling::Raw => Seed::from_state_raw(&state),
        Scaling::Normalized => Seed::from_state(&state),
    })
}

/// Column `column` of a CSV whose first column must reproduce the grid.
fn file_seed(path: &Path, column: usize, energy: f64, grid: &Arc<Grid>) -> Result<Seed, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("bad number in column {i} on data line {}", line + 1)))
        };
        xs.push(num(0)?);
        us.push(num(column)?);
    }
    let pts = grid.points();
    let tol = 1e-9 * grid.spacing();
    if xs.len() != pts.len() || xs.iter().zip(pts).any(|(a, b)| (a - b).abs() > tol) {
        return Err(bad(format!(
            "x column does not match the run grid ({} points on [{}, {}])",
            grid.len(),
            grid.x_min(),
            grid.x_max()
        )));
    }
    Ok(Seed::from_samples(SampledFunction::new(Arc::clone(grid), us)?, energy)?)
}

fn first_seed(r: &Resolved, sys: &LadderSystem) -> Result<Seed, CliError> {
    let t = &r.raw.transform;
    match &r.seed_file {
        Some(p) => file_seed(p, t.seed_column, t.seed_energy.expect("validated"), sys.grid()),
        None => ladder_seed(sys, t.seeds[0], t.scaling),
    }
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    interval: (f64, f64),
    eigenvalues: Vec<f64>,
    node_counts: Vec<usize>,
}

fn spectra(list: Vec<SubdomainSpectrum>) -> Vec<SpectrumSummary> {
    list.into_iter()
        .map(|s| SpectrumSummary {
            interval: s.interval,
            eigenvalues: s.report.eigenvalues,
            node_counts: s.report.node_counts,
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct MappedSummary {
    index: usize,
    energy: f64,
    null: bool,
}

#[derive(Debug, Serialize)]
struct MissingSummary {
    energy: f64,
    residual: f64,
    normalizable: bool,
}

impl From<&MissingState> for MissingSummary {
    fn from(m: &MissingState) -> Self {
        Self {
            energy: m.energy,
            residual: m.residual,
            normalizable: m.normalizable,
        }
    }
}

#[derive(Debug, Serialize)]
struct FirstSummary {
    profile: String,
    grid: GridInfo,
    epsilon1: f64,
    seed_residual: f64,
    two_route: pdmsusy::susy::TwoRouteCheck,
    mapped: Vec<MappedSummary>,
    missing: MissingSummary,
    spectra: Vec<SpectrumSummary>,
}

fn map_all(
    sys: &LadderSystem,
    levels: usize,
    map: impl Fn(&Seed) -> pdmsusy::Result<MappedState>,
) -> Result<Vec<MappedState>, CliError> {
    (0..levels)
        .map(|n| Ok(map(&Seed::from_state(&sys.nth_state(n)?))?))
        .collect()
}

fn mapped_summaries(m: &[MappedState]) -> Vec<MappedSummary> {
    m.iter()
        .enumerate()
        .map(|(index, s)| MappedSummary {
            index,
            energy: s.energy,
            null: s.null,
        })
        .collect()
}

fn v1_csv(t: &FirstOrderTransform) -> Columns {
    Columns::new(t.grid().points())
        .push("V0", t.base_potential().values())
        .push("W1", t.superpotential.values())
        .push("V1", t.partner_potential.values())
}

fn first_order(r: &Resolved, sys: &LadderSystem) -> Result<Vec<Artifact>, CliError> {
    let levels = r.raw.system.levels;
    let t = first_order_transform(sys, &first_seed(r, sys)?, &options(r))?;
    let mapped = map_all(sys, levels, |s| map_state_first(&t, s))?;
    let missing = missing_state_first(&t)?;
    let spec = subdomain_spectra(&r.profile, &t.partner_potential, &t.singularities, levels, sys.hbar())?;
    let summary = FirstSummary {
        profile: r.profile.label().to_owned(),
        grid: GridInfo::of(sys.grid()),
        epsilon1: t.epsilon1,
        seed_residual: t.seed_residual,
        two_route: t.two_route,
        mapped: mapped_summaries(&mapped),
        missing: (&missing).into(),
        spectra: spectra(spec),
    };
    let mut funcs: Vec<&SampledFunction> = mapped.iter().map(|m| &m.function).collect();
    funcs.push(&missing.function);
    let mut states = states_csv(sys.grid(), "phi", &funcs[..levels]);
    states = states.push("phi_missing", funcs[levels].values());
    Ok(vec![
        Artifact::csv("V1.csv", v1_csv(&t)),
        Artifact::csv("states.csv", states),
        Artifact::json("singularities.json", &serde_json::json!({ "first": t.singularities })),
        Artifact::json("spectrum.json", &summary),
    ])
}

#[derive(Debug, Serialize)]
struct SecondSummary {
    profile: String,
    grid: GridInfo,
    mode: pdmsusy::susy::TransformMode,
    epsilon1: f64,
    epsilon2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor: Option<f64>,
    regular: bool,
    sequential_discrepancy: f64,
    mapped: Vec<MappedSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    missing: Option<MissingSummary>,
    spectra: Vec<SpectrumSummary>,
}

fn second_artifacts(r: &Resolved, sys: &LadderSystem, t: &SecondOrderTransform) -> Result<Vec<Artifact>, CliError> {
    let levels = r.raw.system.levels;
    let mapped = map_all(sys, levels, |s| t.map_state(s))?;
    let missing = match t.mode {
        pdmsusy::susy::TransformMode::NonConfluent => Some(missing_state_second(t)?),
        pdmsusy::susy::TransformMode::Confluent => None,
    };
    let spec = subdomain_spectra(&r.profile, &t.partner_potential2, &t.singularities, levels, sys.hbar())?;
    let summary = SecondSummary {
        profile: r.profile.label().to_owned(),
        grid: GridInfo::of(sys.grid()),
        mode: t.mode,
        epsilon1: t.first.epsilon1,
        epsilon2: t.epsilon2,
        d: t.d_parameter,
        anchor: t.anchor,
        regular: t.singularities.is_regular(),
        sequential_discrepancy: t.sequential_discrepancy,
        mapped: mapped_summaries(&mapped),
        missing: missing.as_ref().map(Into::into),
        spectra: spectra(spec),
    };
    let grid = sys.grid();
    let mut v2 = Columns::new(grid.points()).push("V0", sys.potential().values());
    if let Some(w) = &t.w_function {
        v2 = v2.push("w", w.values());
    }
    v2 = v2
        .push("W2", t.superpotential2.values())
        .push("V2", t.partner_potential2.values());
    let funcs: Vec<&SampledFunction> = mapped.iter().map(|m| &m.function).collect();
    let mut states = states_csv(grid, "chi", &funcs);
    if let Some(m) = &missing {
        states = states.push("chi_missing", m.function.values());
    }
    let mut out = vec![
        Artifact::csv("V2.csv", v2),
        Artifact::csv("states.csv", states),
        Artifact::json(
            "singularities.json",
            &serde_json::json!({ "first": t.first.singularities, "second": t.singularities }),
        ),
        Artifact::json("spectrum.json", &summary),
    ];
    if t.mode == pdmsusy::susy::TransformMode::NonConfluent {
        out.insert(0, Artifact::csv("V1.csv", v1_csv(&t.first)));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SweepCase {
    d: f64,
    dir: String,
    regular: bool,
    poles: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    profile: String,
    anchor: f64,
    critical_d: pdmsusy::susy::CriticalD,
    cases: Vec<SweepCase>,
}

fn case_dir(d: f64) -> String {
    format!("d_{d:.6}")
}

fn confluent(r: &Resolved, sys: &LadderSystem, jobs: usize) -> Result<Vec<Artifact>, CliError> {
    let t = &r.raw.transform;
    let u1 = first_seed(r, sys)?;
    let opts = options(r);
    let anchor = t.anchor.unwrap_or_else(|| sys.grid().default_anchor());
    if !sys.grid().contains(anchor) {
        return Err(CliError::Config(format!("transform.anchor {anchor} lies outside the grid")));
    }
    let crit = critical_d(sys, &u1, Some(anchor), &opts)?;
    if t.d_values.is_empty() {
        let d = t.d.expect("validated");
        let tr = confluent_transform(sys, &u1, d, Some(anchor), &opts)?;
        return second_artifacts(r, sys, &tr);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} jobs: {e}")))?;
    let per_case: Vec<Result<(SweepCase, Vec<Artifact>), CliError>> = pool.install(|| {
        t.d_values
            .par_iter()
            .map(|&d| {
                let tr = confluent_transform(sys, &u1, d, Some(anchor), &opts)?;
                let dir = case_dir(d);
                let files = second_artifacts(r, sys, &tr)?
                    .into_iter()
                    .map(|a| a.nested(Path::new(&dir)))
                    .collect();
                let case = SweepCase {
                    d,
                    dir,
                    regular: tr.singularities.is_regular(),
                    poles: tr.singularities.locations.clone(),
                };
                Ok((case, files))
            })
            .collect()
    });
    let mut cases = Vec::with_capacity(per_case.len());
    let mut out = Vec::new();
    for item in per_case {
        let (case, files) = item?;
        cases.push(case);
        out.extend(files);
    }
    out.push(Artifact::json(
        "sweep.json",
        &SweepSummary {
            profile: r.profile.label().to_owned(),
            anchor,
            critical_d: crit,
            cases,
        },
    ));
    Ok(out)
}

pub fn susy(r: &Resolved, jobs: usize) -> Result<Vec<Artifact>, CliError> {
    let sys = system(r)?;
    let t = &r.raw.transform;
    match (t.order, t.mode) {
        (1, _) => first_order(r, &sys),
        (_, Mode::NonConfluent) => {
            let u1 = first_seed(r, &sys)?;
            let u2 = ladder_seed(&sys, t.seeds[1], t.scaling)?;
            let tr = second_order_nonconfluent(&sys, &u1, &u2, &options(r))?;
            second_artifacts(r, &sys, &tr)
        }
        (_, Mode::Confluent) => confluent(r, &sys, jobs),
    }
}

pub fn verify(r: &Resolved) -> Result<(VerifyReport, Vec<Artifact>), CliError> {
    let grid = run_grid(r, highest_index(r))?;
    let seeds = &r.raw.transform.seeds;
    let mut setup = VerifySetup::new(r.profile.clone(), r.ladder.clone(), grid);
    setup.seeds = (seeds[0], seeds.get(1).copied().unwrap_or(seeds[0] + 1));
    setup.levels = r.raw.system.levels;
    setup.tolerances = r.tolerances;
    setup.mask_radius = r.mask_radius;
    let report = run_verify(&setup)?;
    let artifact = Artifact::json("report.json", &report);
    Ok((report, vec![artifact]))
}

pub fn out_dir(r: &Resolved, flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned().unwrap_or_else(|| r.raw.output.dir.clone())
}
