//! The experiment runners behind the CLI subcommands.

use crate::classify;
use locz_core::density::{
    make_gauss_family, make_step_family, Density, GaussFamilyParams, GridDensity1D, Interval,
    MaskedGrid2D, MixtureSpec, StepFamilyParams,
};
use locz_core::io::{self, Manifest};
use locz_core::neumann_poincare as np;
use locz_core::ot;
use locz_core::poisson;
use locz_core::rng::SplitMix64;
use locz_core::sturm;
use locz_core::transport1d as t1;
use locz_core::Result as CoreResult;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Failure(String),
}

impl From<locz_core::Error> for RunError {
    fn from(err: locz_core::Error) -> Self {
        classify(err)
    }
}

impl From<std::io::Error> for RunError {
    fn from(err: std::io::Error) -> Self {
        RunError::Failure(format!("io error: {err}"))
    }
}

#[derive(Debug, Clone)]
pub enum ExperimentSpec {
    Families { n: usize, points: usize },
    LemmaCheck { n: usize, samples: usize },
    Periodized { n: usize, points: usize },
    Extended { n: usize, points: usize, margin: f64 },
    Peyre { n: usize, samples: usize },
    Sturm { n: usize, count: usize, margin: f64 },
    Np { n: usize, count: usize, curves: Vec<usize> },
    Ot2d { nx: usize, points: usize, width: f64, dump_hm1_w: Option<PathBuf> },
}

pub type Report = Vec<(String, usize)>;

pub fn run(spec: &ExperimentSpec, out: &Path, jobs: usize) -> Result<Report, RunError> {
    let mut manifest = Manifest::new();
    match spec {
        ExperimentSpec::Families { n, points } => families(*n, *points, jobs, out, &mut manifest)?,
        ExperimentSpec::LemmaCheck { n, samples } => {
            lemma_check(*n, *samples, out, &mut manifest)?
        }
        ExperimentSpec::Periodized { n, points } => {
            periodized(*n, *points, jobs, out, &mut manifest)?
        }
        ExperimentSpec::Extended { n, points, margin } => {
            extended(*n, *points, *margin, jobs, out, &mut manifest)?
        }
        ExperimentSpec::Peyre { n, samples } => peyre(*n, *samples, out, &mut manifest)?,
        ExperimentSpec::Sturm { n, count, margin } => {
            sturm_experiment(*n, *count, *margin, out, &mut manifest)?
        }
        ExperimentSpec::Np { n, count, curves } => {
            np_experiment(*n, *count, curves, jobs, out, &mut manifest)?
        }
        ExperimentSpec::Ot2d { nx, points, width, dump_hm1_w } => {
            ot2d(*nx, *points, *width, dump_hm1_w.as_deref(), out, &mut manifest)?
        }
    }
    manifest.finish(out)?;
    let mut report = manifest.entries().to_vec();
    report.push(("manifest.csv".to_string(), manifest.entries().len()));
    Ok(report)
}

fn validate(cond: bool, msg: &str) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(RunError::Usage(msg.to_string()))
    }
}

/// Evaluate `f` over the items with `jobs` workers, preserving input order.
fn parallel_sweep<T, R, F>(items: Vec<T>, jobs: usize, f: F) -> Result<Vec<R>, RunError>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> CoreResult<R> + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(|t| f(t).map_err(RunError::from)).collect();
    }
    let results: Vec<std::sync::Mutex<Option<CoreResult<R>>>> =
        items.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for worker in 0..jobs {
            let f = &f;
            let items = &items;
            let results = &results;
            scope.spawn(move || {
                let mut idx = worker;
                while idx < items.len() {
                    let value = f(&items[idx]);
                    *results[idx].lock().unwrap() = Some(value);
                    idx += jobs;
                }
            });
        }
    });
    results
        .into_iter()
        .map(|cell| cell.into_inner().unwrap().expect("worker filled every slot"))
        .map(|r| r.map_err(RunError::from))
        .collect()
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

const FAMILY_A: f64 = 0.1;
const FAMILY_B: f64 = 0.05;

fn families(
    n: usize,
    points: usize,
    jobs: usize,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate(n >= 16, "families needs --n >= 16")?;
    validate(points >= 2, "families needs --points >= 2")?;

    let score_row = |param: f64, u: &GridDensity1D| -> CoreResult<Vec<f64>> {
        let alpha = u.participation_ratio(2.0, 4.0)?;
        let s = t1::localization_score(u)?;
        Ok(vec![param, alpha, s.w2, s.sobolev])
    };

    // separation sweep with the left bump pinned
    let rows = parallel_sweep(linspace(2.0 * FAMILY_B, 1.0 - FAMILY_A - FAMILY_B, points), jobs, |&d| {
        let u = make_step_family(&StepFamilyParams { a: FAMILY_A, d, b: FAMILY_B }, n, false)?;
        score_row(d, &u)
    })?;
    manifest.write(out, "step_dsweep.csv", &io::sweep_csv("param,alpha24,beta_w2,beta_sobolev", &rows))?;

    // symmetric pair: bump centers at 1/2 -+ s
    let rows = parallel_sweep(linspace(FAMILY_B, 0.5 - FAMILY_B, points), jobs, |&s| {
        let u = make_step_family(
            &StepFamilyParams { a: 0.5 - s, d: 2.0 * s, b: FAMILY_B },
            n,
            false,
        )?;
        score_row(s, &u)
    })?;
    manifest.write(
        out,
        "step_dsweep_symmetric.csv",
        &io::sweep_csv("param,alpha24,beta_w2,beta_sobolev", &rows),
    )?;

    // translation sweep of a fixed profile
    let d = 0.3;
    let rows = parallel_sweep(linspace(FAMILY_B, 1.0 - d - FAMILY_B, points), jobs, |&a| {
        let u = make_step_family(&StepFamilyParams { a, d, b: FAMILY_B }, n, false)?;
        score_row(a, &u)
    })?;
    manifest.write(out, "step_asweep.csv", &io::sweep_csv("param,alpha24,beta_w2,beta_sobolev", &rows))?;

    // width sweep of the Gaussian family
    let rows = parallel_sweep(linspace(0.02, 1.0, points), jobs, |&sigma| {
        let u = make_gauss_family(&GaussFamilyParams { sigma }, n)?;
        score_row(sigma, &u)
    })?;
    manifest.write(out, "gauss_sweep.csv", &io::sweep_csv("param,alpha24,beta_w2,beta_sobolev", &rows))?;

    // one density dump for inspection
    let u = make_step_family(&StepFamilyParams { a: FAMILY_A, d: 0.3, b: FAMILY_B }, n, false)
        .map_err(RunError::from)?;
    manifest.write(out, "step_density_example.csv", &io::density_1d_csv(&u))?;
    Ok(())
}

fn lemma_check(
    n: usize,
    samples: usize,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate(n >= 64, "lemma-check needs --n >= 64")?;
    validate(samples >= 1, "lemma-check needs --samples >= 1")?;
    let mut rng = SplitMix64::new(0x1E44A);
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let u = MixtureSpec::sample(&mut rng).render(n).map_err(RunError::from)?;
        let s = t1::localization_score(&u).map_err(RunError::from)?;
        rows.push(vec![k as f64, s.w2, s.sobolev, (s.w2 - s.sobolev).abs()]);
    }
    manifest.write(out, "lemma_check.csv", &io::sweep_csv("sample,w2,sobolev,abs_diff", &rows))?;
    Ok(())
}

fn periodized(
    n: usize,
    points: usize,
    jobs: usize,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate((16..=1024).contains(&n), "periodized needs 16 <= --n <= 1024 (exact LP)")?;
    validate(points >= 2, "periodized needs --points >= 2")?;
    let flat = GridDensity1D::constant(Interval::unit(), n, 1.0).map_err(RunError::from)?;
    let rows = parallel_sweep(
        linspace(2.0 * FAMILY_B, 1.0 - FAMILY_A - FAMILY_B, points),
        jobs,
        |&d| {
            let u =
                make_step_family(&StepFamilyParams { a: FAMILY_A, d, b: FAMILY_B }, n, false)?;
            let mu = ot::atomize_1d(&u)?;
            let nu = ot::atomize_1d(&flat)?;
            let plain = ot::solve_exact(&mu, &nu, &ot::CostKernel::SquaredEuclidean)?;
            let wrapped =
                ot::solve_exact(&mu, &nu, &ot::CostKernel::Periodized1d { period: 1.0 })?;
            Ok(vec![d, plain.cost, wrapped.cost])
        },
    )?;
    manifest.write(out, "periodized_sweep.csv", &io::sweep_csv("d,cost_w2,cost_periodized", &rows))?;
    Ok(())
}

fn extended(
    n: usize,
    points: usize,
    margin: f64,
    jobs: usize,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate(n >= 16, "extended needs --n >= 16")?;
    validate(points >= 2, "extended needs --points >= 2")?;
    validate(margin >= 0.0, "extended needs --margin >= 0")?;
    let rows = parallel_sweep(
        linspace(2.0 * FAMILY_B, 1.0 - FAMILY_A - FAMILY_B, points),
        jobs,
        |&d| {
            let u =
                make_step_family(&StepFamilyParams { a: FAMILY_A, d, b: FAMILY_B }, n, false)?;
            let s = t1::extended_domain_score(&u, margin)?;
            Ok(vec![d, s.w2, s.sobolev])
        },
    )?;
    manifest.write(out, "extended_sweep.csv", &io::sweep_csv("param,beta_w2,beta_sobolev", &rows))?;
    Ok(())
}

fn peyre(n: usize, samples: usize, out: &Path, manifest: &mut Manifest) -> Result<(), RunError> {
    validate((32..=512).contains(&n), "peyre needs 32 <= --n <= 512 (exact LP)")?;
    validate(samples >= 1, "peyre needs --samples >= 1")?;
    let flat = GridDensity1D::constant(Interval::unit(), n, 1.0).map_err(RunError::from)?;
    let nu = ot::atomize_1d(&flat).map_err(RunError::from)?;
    let mut rng = SplitMix64::new(0x9E7);
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let u = MixtureSpec::sample(&mut rng).render(n).map_err(RunError::from)?;
        let mu = ot::atomize_1d(&u).map_err(RunError::from)?;
        let plan = ot::solve_exact(&mu, &nu, &ot::CostKernel::SquaredEuclidean)
            .map_err(RunError::from)?;
        let w2 = plan.cost.max(0.0).sqrt();
        let bounds = poisson::peyre_bounds_1d(&u, Some(w2)).map_err(RunError::from)?;
        rows.push(vec![k as f64, bounds.lower, w2, bounds.upper, bounds.sobolev_weighted]);
    }
    manifest.write(out, "peyre_bounds.csv", &io::sweep_csv("sample,lower,w2,upper,sobolev", &rows))?;
    Ok(())
}

fn sturm_experiment(
    n: usize,
    count: usize,
    margin: f64,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate(margin >= 0.0, "sturm needs --margin >= 0")?;
    let problem = sturm::SlProblem::new(sturm::reference_metric, n, count)?;
    let op = sturm::discretize_sl(&problem);
    let pairs = sturm::eigensolve(&op, count)?;
    let standard = sturm::score_localization(&pairs, sturm::ScoreMode::Standard)?;
    let extended =
        sturm::score_localization(&pairs, sturm::ScoreMode::Extended { margin })?;
    let rows: Vec<Vec<f64>> = standard
        .iter()
        .zip(&extended)
        .map(|(s, e)| {
            vec![s.index as f64, s.eigenvalue, s.alpha24_inv, s.beta, e.beta]
        })
        .collect();
    manifest.write(
        out,
        "sturm_localization.csv",
        &io::sweep_csv("index,eigenvalue,alpha24_inv,beta_std,beta_ext", &rows),
    )?;
    Ok(())
}

fn np_experiment(
    n: usize,
    count: usize,
    curves: &[usize],
    jobs: usize,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    let params = np::reference_curves();
    validate(curves.iter().all(|&c| c < params.len()), "curve index out of range")?;
    struct CurveOutput {
        index: usize,
        geometry: String,
        scores: String,
    }
    let outputs = parallel_sweep(curves.to_vec(), jobs, |&ci| {
        let curve = np::sample_curve(&params[ci], n)?;
        let matrix = np::np_matrix(&curve);
        let pairs = np::np_eigensolve(&matrix, &curve, count)?;
        let scores = np::score_np_localization(&pairs)?;
        let geometry_rows: Vec<Vec<f64>> = (0..curve.len())
            .map(|k| {
                vec![
                    curve.thetas[k],
                    curve.positions[k][0],
                    curve.positions[k][1],
                    curve.speeds[k],
                    curve.curvatures[k],
                ]
            })
            .collect();
        let score_rows: Vec<Vec<f64>> = scores
            .iter()
            .map(|s| vec![s.eigenvalue, s.alpha24_inv, s.beta])
            .collect();
        Ok(CurveOutput {
            index: ci + 1,
            geometry: io::sweep_csv("theta,x,y,speed,curvature", &geometry_rows),
            scores: io::sweep_csv("eigenvalue,alpha24_inv,beta", &score_rows),
        })
    })?;
    for output in outputs {
        manifest.write(out, &format!("np_curve{}_geometry.csv", output.index), &output.geometry)?;
        manifest.write(out, &format!("np_curve{}_scores.csv", output.index), &output.scores)?;
    }
    Ok(())
}

/// The reference 2D domain: a disc of radius 0.45 inside the unit square.
pub fn reference_disc(nx: usize) -> CoreResult<MaskedGrid2D> {
    MaskedGrid2D::disc(
        (Interval::unit(), Interval::unit()),
        nx,
        nx,
        (0.5, 0.5),
        0.45,
    )
}

fn ot2d(
    nx: usize,
    points: usize,
    width: f64,
    dump_hm1_w: Option<&Path>,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), RunError> {
    validate((8..=64).contains(&nx), "ot2d needs 8 <= --nx <= 64 (exact LP)")?;
    validate(points >= 2, "ot2d needs --points >= 2")?;
    validate(width > 0.0, "ot2d needs --width > 0")?;
    let template = reference_disc(nx)?;
    let field = ot::distance_to_boundary_field(&template)?;
    let measure = template.domain_measure();
    let uniform_vals: Vec<f64> = template
        .mask()
        .iter()
        .map(|&m| if m { 1.0 / measure } else { 0.0 })
        .collect();
    let uniform = template.with_values(uniform_vals).map_err(RunError::from)?;
    let (nu, nu_cells) = ot::atomize_2d_indexed(&uniform).map_err(RunError::from)?;
    let target_cost: Vec<f64> = nu_cells.iter().map(|&c| field[c]).collect();

    let ds = linspace(0.1, 0.7, points);
    let mut rows = Vec::with_capacity(points);
    let mut first_density: Option<MaskedGrid2D> = None;
    for &d in &ds {
        let u = ot::two_bump_2d(&template, d, width).map_err(RunError::from)?;
        let (mu, mu_cells) = ot::atomize_2d_indexed(&u).map_err(RunError::from)?;
        let source_cost: Vec<f64> = mu_cells.iter().map(|&c| field[c]).collect();
        let plan = ot::solve_exact(
            &mu,
            &nu,
            &ot::CostKernel::Separable {
                source_cost: source_cost.clone(),
                target_cost: target_cost.clone(),
            },
        )
        .map_err(RunError::from)?;
        let direct = ot::separable_cost_value(&mu, &nu, &source_cost, &target_cost)
            .map_err(RunError::from)?;
        if (plan.cost - direct).abs() > 1e-10 {
            return Err(RunError::Failure(format!(
                "separable shortcut and LP disagree at d = {d}: {} vs {}",
                plan.cost, direct
            )));
        }
        rows.push(vec![d, plan.cost]);
        if first_density.is_none() {
            manifest.write(out, "ot2d_plan_first.csv", &io::plan_csv(&plan))?;
            first_density = Some(u);
        }
    }
    manifest.write(out, "ot2d_sweep.csv", &io::sweep_csv("d,cost", &rows))?;
    let first = first_density.expect("at least two sweep points");
    manifest.write(out, "ot2d_density_first.csv", &io::masked_grid_csv(&first))?;

    if let Some(path) = dump_hm1_w {
        let source = poisson::ZeroMeanSource2D::from_density(&first).map_err(RunError::from)?;
        let sol = poisson::solve_neumann_poisson_2d(&source).map_err(RunError::from)?;
        std::fs::write(path, io::potential_2d_csv(&first, &sol.w))?;
    }
    Ok(())
}
