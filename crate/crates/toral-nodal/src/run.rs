//! Turns a config into a list of independent jobs and runs them.

use rayon::prelude::*;
use toral_nodal_core::curve::{make_arclength, ArcLengthCurve};
use toral_nodal_core::exceptions::{
    continued_fraction_approximants, irrational_geodesic_witness, parallel_exception_search,
    rational_geodesic_eigenfunction, ExceptionReport,
};
use toral_nodal_core::lattice::{arclog_bound_audit, b_lambda, cc_subset_audit, enumerate_circle, jarnik_audit};
use toral_nodal_core::medians::{build_median_set, dyadic_decompose};
use toral_nodal_core::nodal::theorem_harness;
use toral_nodal_core::oscillatory::{bilinear_form_bound, restriction_norms, schur_family, schur_norms};
use toral_nodal_core::rng::run_seed;
use toral_nodal_core::wavefield::{make_eigenfunction, restrict, Eigenfunction};

use crate::config::{Command, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::export::{EigenfunctionFile, GeodesicSegment};
use crate::records::{ExceptionRow, LatticeRow, NodalRow, Record, SchurRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Job {
    Lattice { n: u64 },
    Nodal { n: u64, seed_index: u64 },
    Schur { n: u64 },
    Geodesic { index: usize },
    Convergents,
    Witness { k: usize },
    Legendre { theta0: f64 },
}

/// Jobs in canonical order; run indices follow this order.
pub fn jobs(command: Command, cfg: &ExperimentConfig) -> Vec<Job> {
    let ns = cfg.n.values();
    match command {
        Command::Lattice => ns.into_iter().map(|n| Job::Lattice { n }).collect(),
        Command::Nodal => ns
            .into_iter()
            .flat_map(|n| (0..cfg.seeds as u64).map(move |i| Job::Nodal { n, seed_index: cfg.seed_offset + i }))
            .collect(),
        Command::Schur => ns.into_iter().map(|n| Job::Schur { n }).collect(),
        Command::Exceptions => {
            let ex = &cfg.exceptions;
            let mut v: Vec<Job> = (0..ex.geodesics.len()).map(|index| Job::Geodesic { index }).collect();
            v.push(Job::Convergents);
            v.extend((1..=ex.witnesses).map(|k| Job::Witness { k }));
            v.extend(ex.theta0.iter().map(|&theta0| Job::Legendre { theta0 }));
            v
        }
        Command::Sweep => cfg.commands.iter().flat_map(|&c| jobs(c, cfg)).collect(),
    }
}

/// One job's rows plus any eigenfunctions to export.
#[derive(Debug, Default)]
pub struct JobOutput {
    pub rows: Vec<Record>,
    pub exports: Vec<(String, EigenfunctionFile)>,
}

struct Context {
    curve: ArcLengthCurve,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_job(job: Job, cfg: &ExperimentConfig, ctx: &Context) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let ex = &cfg.exceptions;
    match job {
        Job::Lattice { n } => {
            let circle = enumerate_circle(n)?;
            if circle.is_empty() {
                return Ok(out);
            }
            let jarnik = jarnik_audit(&circle)?;
            let arclog = if n >= 4 { Some(arclog_bound_audit(&circle)?) } else { None };
            let cc = (circle.count() <= cfg.cc_max_points).then(|| cc_subset_audit(&circle, cfg.cc_max_size));
            out.rows.push(Record::Lattice(LatticeRow {
                run: 0,
                n,
                lambda: circle.lambda(),
                count: circle.count(),
                b_lambda: b_lambda(&circle)?,
                jarnik_max: jarnik.max_count,
                jarnik_ok: jarnik.ok,
                arclog_m: arclog.map(|a| a.m),
                arclog_bound: arclog.map(|a| a.bound),
                arclog_ok: arclog.map(|a| a.ok),
                cc_subsets: cc.map(|c| c.subsets_checked),
                cc_violations: cc.map(|c| c.violations),
                cc_min_margin: cc.and_then(|c| finite(c.min_log_margin)),
            }));
        }
        Job::Nodal { n, seed_index } => {
            let circle = enumerate_circle(n)?;
            if circle.is_empty() {
                return Ok(out);
            }
            let seed = run_seed(cfg.seed, seed_index);
            let eigen = make_eigenfunction(&circle, cfg.model.model(&circle, seed))?;
            let wave = restrict(&eigen, &ctx.curve);
            let t = theorem_harness(&wave, cfg.tol)?;
            let norms = restriction_norms(&wave, cfg.tol)?;
            let l4_4 = norms.l4.powi(4);
            out.rows.push(Record::Nodal(NodalRow {
                run: 0,
                n,
                seed_index,
                seed,
                lambda: t.lambda,
                e_count: t.e_count,
                b: t.b,
                sign_changes: t.sign_changes,
                stable: t.stable,
                l1: t.l1,
                l2norm: t.l2norm,
                ratio_thm11: t.ratio_thm11,
                ratio_thm12: t.ratio_thm12,
                n_over_lambda: t.n_over_lambda,
                degenerate: t.degenerate,
                restricted_l2: norms.l2,
                l4_4,
                l4_ratio: l4_4 / t.b as f64,
                holder_ok: norms.holder_ok(),
                fourier_l2_sq: norms.fourier_l2_sq,
            }));
            if cfg.export_eigenfunctions {
                let mut file = EigenfunctionFile::new(&eigen, Some(seed));
                file.curve = Some(cfg.curve);
                out.exports.push((format!("nodal_n{n}_s{seed_index}"), file));
            }
        }
        Job::Schur { n } => {
            let circle = enumerate_circle(n)?;
            if circle.is_empty() {
                return Ok(out);
            }
            let set = build_median_set(&circle)?;
            let decomp = dyadic_decompose(&set, cfg.epsilon)?;
            let fam = schur_family(&set, &decomp)?;
            let ones = vec![1.0; set.len()];
            let bil = bilinear_form_bound(&ones, &set, &decomp, &fam)?;
            for s in schur_norms(&fam) {
                if (s.bound2to2 * s.bound2to2 - s.bound_sq).abs() > 4.0 * f64::EPSILON * s.bound_sq {
                    return Err(CliError::Invariant(format!("Schur bound mismatch in block ({}, {})", s.k, s.l)));
                }
                let block = &fam.blocks[&(s.k, s.l)];
                out.rows.push(Record::Schur(SchurRow {
                    run: 0,
                    n,
                    lambda: fam.lambda,
                    epsilon: fam.epsilon,
                    b_lambda: fam.b_lambda,
                    k: s.k,
                    l: s.l,
                    columns: block.columns.len(),
                    rows: block.rows.len(),
                    entries: block.entries.len(),
                    norm1to1: s.norm1to1,
                    norm_adj1to1: s.norm_adj1to1,
                    bound_sq: s.bound_sq,
                    bound2to2: s.bound2to2,
                    ratio_column: s.ratio_column,
                    ratio_row: s.ratio_row,
                    bilinear_blocked: bil.lhs_blocked,
                    bilinear_flat: bil.lhs_flat,
                    bilinear_ratio: bil.ratio,
                    g0_ratio: bil.g0_ratio,
                }));
            }
        }
        Job::Geodesic { index } => {
            let g = ex.geodesics[index];
            let (f, audit) = rational_geodesic_eigenfunction(g.p, g.q, g.c, g.n)?;
            out.rows.push(Record::Exceptions(ExceptionRow::Geodesic {
                run: 0,
                p: g.p,
                q: g.q,
                c: g.c,
                n: g.n,
                eigenvalue: audit.eigenvalue,
                max_on_geodesic: audit.max_on_geodesic,
                laplacian_residual: audit.laplacian_residual,
            }));
            if cfg.export_eigenfunctions {
                let mut file = EigenfunctionFile::new(&f.to_eigenfunction()?, None);
                file.geodesic_segment = Some(GeodesicSegment {
                    point: f.geodesic.point(0.0),
                    direction: [g.p as f64, g.q as f64],
                    t_min: 0.0,
                    t_max: 1.0,
                });
                out.exports.push((format!("geodesic_{index}"), file));
            }
        }
        Job::Convergents => {
            let cf = continued_fraction_approximants(ex.beta, ex.convergents)?;
            for (i, a) in cf.approximants.iter().enumerate() {
                out.rows.push(Record::Exceptions(ExceptionRow::Convergent {
                    run: 0,
                    beta: ex.beta,
                    k: i + 1,
                    p: a.p,
                    q: a.q,
                    a: a.a,
                    error: a.error,
                    bound: 1.0 / (a.q as f64 * a.q as f64),
                }));
            }
        }
        Job::Witness { k } => {
            let w = irrational_geodesic_witness(ex.beta, ex.v0, k)?;
            out.rows.push(Record::Exceptions(ExceptionRow::Witness {
                run: 0,
                beta: w.beta,
                k,
                p: w.approximant.p,
                q: w.approximant.q,
                eigenvalue: w.eigenvalue,
                lambda: (w.eigenvalue as f64).sqrt(),
                min_on_segment: w.min_on_segment,
                sampled_min: w.sampled_min,
                lower_bound: w.lower_bound,
                sign_changes: w.sign_changes,
            }));
            if cfg.export_eigenfunctions {
                let mut file = EigenfunctionFile::new(&w.to_eigenfunction()?, None);
                file.geodesic_segment = Some(GeodesicSegment {
                    point: w.v0,
                    direction: [1.0, -w.beta],
                    t_min: -1.0,
                    t_max: 1.0,
                });
                out.exports.push((format!("witness_{k}"), file));
            }
        }
        Job::Legendre { theta0 } => {
            let row = match parallel_exception_search(theta0, ex.max_degree, ex.prime_bound)? {
                ExceptionReport::Equator { odd_degrees, max_abs } => ExceptionRow::Legendre {
                    run: 0,
                    theta0,
                    branch: "equator".into(),
                    x0: theta0.cos(),
                    degree: None,
                    hits: odd_degrees.len(),
                    checked: odd_degrees.len(),
                    min_abs: Some(max_abs),
                },
                ExceptionReport::Exceptional { x0, degree, hits, primes, min_abs } => ExceptionRow::Legendre {
                    run: 0,
                    theta0,
                    branch: "exceptional".into(),
                    x0,
                    degree: Some(degree),
                    hits: hits.len(),
                    checked: primes.len(),
                    min_abs: finite(min_abs),
                },
                ExceptionReport::Generic { x0, max_degree, min_abs } => ExceptionRow::Legendre {
                    run: 0,
                    theta0,
                    branch: "generic".into(),
                    x0,
                    degree: None,
                    hits: 0,
                    checked: max_degree as usize,
                    min_abs: finite(min_abs),
                },
            };
            out.rows.push(Record::Exceptions(row));
        }
    }
    Ok(out)
}

/// Runs every job of `command` on `jobs` workers (0: pool default). Rows come
/// back in job order with consecutive run indices, whatever the scheduling.
pub fn generate(command: Command, cfg: &ExperimentConfig) -> Result<JobOutput> {
    cfg.validate()?;
    let list = jobs(command, cfg);
    let ctx = Context {
        curve: make_arclength(cfg.curve.spec())?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<JobOutput>> = pool.install(|| list.par_iter().map(|&j| run_job(j, cfg, &ctx)).collect());
    let mut all = JobOutput::default();
    for r in results {
        let r = r?;
        all.rows.extend(r.rows);
        all.exports.extend(r.exports);
    }
    for (i, row) in all.rows.iter_mut().enumerate() {
        row.set_run(i);
    }
    Ok(all)
}

/// The eigenfunction of one nodal run, rebuilt from the config.
pub fn nodal_eigenfunction(cfg: &ExperimentConfig, n: u64, seed_index: u64) -> Result<Eigenfunction> {
    let circle = enumerate_circle(n)?;
    let seed = run_seed(cfg.seed, seed_index);
    Ok(make_eigenfunction(&circle, cfg.model.model(&circle, seed))?)
}
