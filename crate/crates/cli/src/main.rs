use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pinvtte::experiment::{analytic, run_experiment, ExperimentConfig};
use pinvtte::io;
use pinvtte::output::{num, opt, write_table, Table};
use pinvtte::sources::{
    estimator_label, parse_estimator, ClusteringSource, DesignChoice, GraphSource, ModelSource,
};
use pinvtte_core::bounds::{bias_bound_gcr, bias_crd, bias_exact, variance_bound, GammaSource};
use pinvtte_core::clustering::{cluster_stats, modularity};
use pinvtte_core::design::DesignKind;
use pinvtte_core::estimator::{Estimator, EstimatorSpec, MomentSource};
use pinvtte_core::harness::{
    exhaustive_moments, mc_convergence_report, rmse_ratio, select_clustering, DesignTemplate,
};
use pinvtte_core::moments::{
    design_moments, monte_carlo_moments, support_weighted_moments, unit_cluster_index,
};
use pinvtte_core::outcomes::{cluster_aggregate, outcome_bound, true_tte, NamedModel, BASELINE_SD};

/// Pseudoinverse TTE estimation under network interference.
///
/// Any subcommand also accepts `--config FILE` holding `flag = value` lines.
#[derive(Parser)]
#[command(name = "pinvtte", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a clustering and write it as `unit<TAB>label`.
    Cluster(ClusterArgs),
    /// Potential-outcome models.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Estimate the TTE from observed outcomes and treatments.
    Estimate(EstimateArgs),
    /// Replicated simulation over one or more clusterings.
    Simulate(SimulateArgs),
    /// Bias and variance bounds per clustering.
    Bounds(BoundsArgs),
    /// Rank candidate clusterings by their variance bound.
    Select(SelectArgs),
    /// Convergence of Monte Carlo design-moment pseudoinverses.
    McMoments(McArgs),
    /// Exact estimator moments by enumerating the design support.
    Oracle(OracleArgs),
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Generate a model and write it as `unit<TAB>subset<TAB>value`.
    Gen(ModelGenArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// `bern` (units), `gcr` (Bernoulli clusters) or `crd` (k of m clusters).
    #[arg(long, default_value = "gcr")]
    design: String,
    /// Treatment probability for `bern` and `gcr`.
    #[arg(long, default_value_t = 0.25)]
    p: f64,
    #[arg(long)]
    k: Option<usize>,
}

impl DesignArgs {
    fn choice(&self) -> Result<DesignChoice> {
        DesignChoice::from_flags(&self.design, Some(self.p), self.k)
    }
}

#[derive(Args)]
struct OutputArg {
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl OutputArg {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => {
                Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)
            }
            None => Box::new(std::io::stdout().lock()),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterMethod {
    Louvain,
    Cycle,
    Singleton,
    File,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ClusterArgs {
    /// Edge-list file or `cycle:n=..,r=..` / `sbm:n=..,blocks=..,pin=..,pout=..,seed=..`.
    #[arg(long)]
    graph: GraphSource,
    #[arg(long, value_enum, default_value = "louvain")]
    method: ClusterMethod,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clustering file for `--method file`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Cycle,
    Null,
    Weak,
    Strong,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ModelGenArgs {
    #[arg(long)]
    graph: GraphSource,
    #[arg(long, value_enum)]
    kind: ModelKind,
    #[arg(long, default_value_t = 1)]
    beta_star: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentsArg {
    Analytic,
    Mc,
}

#[derive(Args)]
struct MomentArgs {
    /// Where pseudoinverse weights come from.
    #[arg(long, value_enum, default_value = "analytic")]
    moments: MomentsArg,
    #[arg(long, default_value_t = 10_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
}

impl MomentArgs {
    fn source(&self) -> MomentSource {
        match self.moments {
            MomentsArg::Analytic => MomentSource::Analytic,
            MomentsArg::Mc => MomentSource::MonteCarlo {
                samples: self.mc_samples,
                seed: self.mc_seed,
            },
        }
    }
}

#[derive(Args)]
#[command(args_override_self = true)]
struct EstimateArgs {
    #[arg(long)]
    graph: GraphSource,
    #[arg(long, default_value = "singleton")]
    clustering: ClusteringSource,
    #[command(flatten)]
    design: DesignArgs,
    /// `pinv`, `explicit`, `ht` or `crd1`.
    #[arg(long, default_value = "pinv")]
    estimator: String,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    /// `unit<TAB>outcome` lines.
    #[arg(long)]
    outcomes: PathBuf,
    /// `unit<TAB>0|1` lines, constant within clusters.
    #[arg(long)]
    treatment: PathBuf,
    /// Also emit every unit's weight.
    #[arg(long)]
    weights: bool,
    #[command(flatten)]
    moments: MomentArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[arg(long)]
    graph: GraphSource,
    /// File or `cycle:beta=..` / `null|weak|strong[:seed=..]`.
    #[arg(long)]
    model: ModelSource,
    /// Repeat for several clusterings: file, `singleton`, `cycle:w=..`, `louvain:res=..,seed=..`.
    #[arg(long, required = true, action = clap::ArgAction::Append)]
    clustering: Vec<ClusteringSource>,
    #[command(flatten)]
    design: DesignArgs,
    /// Repeatable; `pinv[:β]`, `explicit[:β]`, `ht`, `crd1`.
    #[arg(long, action = clap::ArgAction::Append, default_values_t = ["pinv".to_string(), "ht".to_string()])]
    estimator: Vec<String>,
    /// Order used by estimators written without one.
    #[arg(long, default_value_t = 1)]
    beta: usize,
    #[arg(long, default_value_t = 500)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Report wall-clock seconds per clustering.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    moments: MomentArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    Closed,
    Quadform,
    Mc,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct BoundsArgs {
    #[arg(long)]
    graph: GraphSource,
    #[arg(long, required = true, action = clap::ArgAction::Append)]
    clustering: Vec<ClusteringSource>,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    /// Outcome bound B; derived from `--model` when omitted.
    #[arg(long = "B-bound")]
    b_bound: Option<f64>,
    /// Enables exact bias and bias bounds.
    #[arg(long)]
    model: Option<ModelSource>,
    #[arg(long, value_enum, default_value = "quadform")]
    gamma: GammaArg,
    #[arg(long, default_value_t = 10_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
    /// Assert sign-consistent coefficients (checked against `--model`) to
    /// drop independent pairs under complete randomization.
    #[arg(long)]
    monotone: bool,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct SelectArgs {
    #[arg(long)]
    graph: GraphSource,
    /// Repeatable candidate clustering.
    #[arg(long, action = clap::ArgAction::Append)]
    candidate: Vec<ClusteringSource>,
    /// Comma-separated Louvain resolutions added as candidates.
    #[arg(long, value_delimiter = ',')]
    louvain_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    louvain_seed: u64,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    #[arg(long = "B-bound")]
    b_bound: Option<f64>,
    #[arg(long)]
    model: Option<ModelSource>,
    /// Simulate every candidate this many times and report RMSE ratios;
    /// needs `--model`.
    #[arg(long, default_value_t = 0)]
    evaluate: usize,
    #[arg(long, default_value = "pinv")]
    estimator: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct McArgs {
    #[arg(long)]
    graph: GraphSource,
    #[arg(long, default_value = "singleton")]
    clustering: ClusteringSource,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, required = true, action = clap::ArgAction::Append)]
    unit: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    /// Repeatable sample counts.
    #[arg(long, required = true, action = clap::ArgAction::Append)]
    samples: Vec<usize>,
    /// Repeatable seeds.
    #[arg(long, action = clap::ArgAction::Append, default_values_t = [0u64])]
    seed: Vec<u64>,
    /// Emit the estimated matrix and pseudoinverse of the first unit, sample
    /// count and seed instead of the error table.
    #[arg(long)]
    matrix: bool,
    /// Add the support-weighted limit for each unit.
    #[arg(long)]
    support: bool,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct OracleArgs {
    #[arg(long)]
    graph: GraphSource,
    #[arg(long)]
    model: ModelSource,
    #[arg(long, default_value = "singleton")]
    clustering: ClusteringSource,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, action = clap::ArgAction::Append, default_values_t = ["pinv".to_string()])]
    estimator: Vec<String>,
    #[arg(long, default_value_t = 1)]
    beta: usize,
    #[command(flatten)]
    out: OutputArg,
}

fn estimators(raw: &[String], beta: usize) -> Result<Vec<EstimatorSpec>> {
    raw.iter().map(|s| parse_estimator(s, beta)).collect()
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let g = a.graph.build()?;
    let source = match a.method {
        ClusterMethod::Louvain => ClusteringSource::Louvain {
            resolution: a.resolution,
            seed: a.seed,
        },
        ClusterMethod::Cycle => ClusteringSource::Cycle {
            w: a.width.context("--method cycle needs --width")?,
        },
        ClusterMethod::Singleton => ClusteringSource::Singleton,
        ClusterMethod::File => {
            ClusteringSource::File(a.input.context("--method file needs --input")?)
        }
    };
    let c = source.build(&g)?;
    let mut out = a.out.open()?;
    out.write_all(io::write_clustering(&c).as_bytes())?;
    writeln!(out, "# clusters={}", c.m())?;
    writeln!(out, "# modularity={}", modularity(&g, &c, a.resolution))?;
    Ok(())
}

fn model_gen(a: ModelGenArgs) -> Result<()> {
    let g = a.graph.build()?;
    let source = match a.kind {
        ModelKind::Cycle => ModelSource::Cycle {
            beta_star: a.beta_star,
        },
        ModelKind::Null | ModelKind::Weak | ModelKind::Strong => {
            if a.beta_star != 1 {
                bail!("null, weak and strong models are first order; drop --beta-star");
            }
            let kind = match a.kind {
                ModelKind::Null => NamedModel::Null,
                ModelKind::Weak => NamedModel::Weak,
                _ => NamedModel::Strong,
            };
            ModelSource::Named { kind, seed: a.seed }
        }
    };
    let model = source.build(&g)?;
    let mut out = a.out.open()?;
    out.write_all(io::write_model(&model).as_bytes())?;
    writeln!(out, "# true_tte={}", true_tte(&model))?;
    if matches!(source, ModelSource::Named { .. }) {
        writeln!(out, "# baseline_sd={}", BASELINE_SD)?;
    }
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let g = a.graph.build()?;
    let d = a.design.choice()?.build(a.clustering.build(&g)?)?;
    let y: Vec<f64> = io::parse_unit_values(&io::read(&a.outcomes)?, g.n(), "outcome")?;
    let w = io::parse_treatments(&io::read(&a.treatment)?, d.clustering())?;
    let spec = parse_estimator(&a.estimator, a.beta)?;
    let est = Estimator::prepare(spec, &g, &d, a.moments.source())?;
    let b = est.estimate(&y, &d.draw_from_clusters(w))?;
    let mut t = Table::new(&["quantity", "unit", "value"]);
    t.push(vec!["tte_hat".into(), String::new(), num(b.tte_hat)]);
    if a.weights {
        for (i, v) in b.per_unit_weight.iter().enumerate() {
            t.push(vec!["weight".into(), i.to_string(), num(*v)]);
        }
    }
    write_table(
        a.out.open()?,
        &t,
        None,
        &[("estimator", estimator_label(spec))],
    )
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(a.threads)
            .build_global()?;
    }
    let cfg = ExperimentConfig {
        graph: a.graph,
        model: a.model,
        clusterings: a.clustering,
        design: a.design.choice()?,
        estimators: estimators(&a.estimator, a.beta)?,
        replicates: a.replicates,
        seed: a.seed,
        moments: a.moments.source(),
        timing: a.timing,
    };
    let report = run_experiment(&cfg)?;
    let mut extra = Vec::new();
    if matches!(cfg.model, ModelSource::Named { .. }) {
        extra.push(("baseline_sd", BASELINE_SD.to_string()));
    }
    write_table(a.out.open()?, &report.to_table(), Some(a.seed), &extra)
}

fn resolve_b(b: Option<f64>, model: Option<&pinvtte_core::outcomes::LowOrderModel>) -> Result<f64> {
    match (b, model) {
        (Some(b), _) => Ok(b),
        (None, Some(m)) => Ok(outcome_bound(m)),
        (None, None) => bail!("pass --B-bound or --model"),
    }
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let g = a.graph.build()?;
    let model = a.model.as_ref().map(|m| m.build(&g)).transpose()?;
    let b = resolve_b(a.b_bound, model.as_ref())?;
    if a.monotone && model.is_none() {
        bail!("--monotone needs --model to check the sign condition");
    }
    let gamma = match a.gamma {
        GammaArg::Closed => GammaSource::Closed,
        GammaArg::Quadform => GammaSource::Quadform,
        GammaArg::Mc => GammaSource::MonteCarlo {
            samples: a.mc_samples,
            seed: a.mc_seed,
        },
    };
    let choice = a.design.choice()?;
    let mut t = Table::new(&[
        "clustering",
        "clusters",
        "design",
        "beta",
        "gamma",
        "B",
        "c_max",
        "n_max",
        "d_max",
        "bias_exact",
        "bias_bound",
        "var_bound_pairwise",
        "var_bound_capped",
        "var_bound_simplified",
        "crd_screen",
    ]);
    for source in &a.clustering {
        let c = source.build(&g)?;
        let stats = cluster_stats(&g, &c)?;
        let d = choice.build(c)?;
        let agg = model.as_ref().map(|m| cluster_aggregate(m, d.clustering()));
        let monotone = match agg.as_ref() {
            Some(x) if a.monotone && !x.is_sign_consistent() => {
                eprintln!("note: model signs are mixed; disjoint-pair screen disabled");
                None
            }
            Some(x) if a.monotone => Some(x),
            _ => None,
        };
        let report = variance_bound(&g, &stats, &d, a.beta, b, gamma, monotone)?;
        let (bias, bias_bound) = match &model {
            None => (None, None),
            Some(m) => {
                let exact = bias_exact(m, &g, &d, a.beta)?;
                let bound = match d.kind() {
                    DesignKind::CompleteGcr { k } if a.beta == 1 => {
                        bias_crd(agg.as_ref().expect("model present"), &stats, d.m(), k, b)
                            .ok()
                            .map(|r| r.bound)
                    }
                    DesignKind::CompleteGcr { .. } => None,
                    _ => Some(bias_bound_gcr(m, d.clustering(), a.beta).aggregated_l1),
                };
                (Some(exact), bound)
            }
        };
        t.push(vec![
            source.to_string(),
            d.m().to_string(),
            choice.to_string(),
            a.beta.to_string(),
            format!("{:?}", report.gamma).to_lowercase(),
            num(b),
            report.c_max.to_string(),
            report.n_max.to_string(),
            report.d_max.to_string(),
            opt(bias),
            opt(bias_bound),
            num(report.var_bound_pairwise),
            opt(report.var_bound_capped),
            opt(report.var_bound_simplified),
            report.crd_screen.to_string(),
        ]);
    }
    write_table(a.out.open()?, &t, None, &[])
}

fn select(a: SelectArgs) -> Result<()> {
    let g = a.graph.build()?;
    let mut sources = a.candidate.clone();
    sources.extend(
        a.louvain_grid
            .iter()
            .map(|&resolution| ClusteringSource::Louvain {
                resolution,
                seed: a.louvain_seed,
            }),
    );
    if sources.is_empty() {
        bail!("pass --candidate or --louvain-grid");
    }
    let model = a.model.as_ref().map(|m| m.build(&g)).transpose()?;
    let b = resolve_b(a.b_bound, model.as_ref())?;
    let template = match a.design.choice()? {
        DesignChoice::Gcr { p } | DesignChoice::Bern { p } => DesignTemplate::Bernoulli { p },
        DesignChoice::Crd { k } => DesignTemplate::Complete { k },
    };
    let candidates = sources
        .iter()
        .map(|s| s.build(&g))
        .collect::<Result<Vec<_>>>()?;
    let sel = select_clustering(&g, &candidates, template, a.beta, b)?;
    let rmse = if a.evaluate > 0 {
        let model = model.as_ref().context("--evaluate needs --model")?;
        let spec = parse_estimator(&a.estimator, a.beta)?;
        let mut out = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let d = template.instantiate(c.clone())?;
            let stats = pinvtte::experiment::simulate(
                &g,
                model,
                &d,
                &[spec],
                a.evaluate,
                a.seed,
                MomentSource::Analytic,
            )?;
            out.push(stats[0].rmse());
        }
        Some(out)
    } else {
        None
    };
    let mut t = Table::new(&[
        "rank",
        "candidate",
        "clustering",
        "clusters",
        "var_bound_pairwise",
        "rmse",
        "chosen",
    ]);
    for (rank, (idx, report)) in sel.ranking.iter().enumerate() {
        t.push(vec![
            (rank + 1).to_string(),
            idx.to_string(),
            sources[*idx].to_string(),
            report.m.to_string(),
            num(report.var_bound_pairwise),
            opt(rmse.as_ref().map(|r| r[*idx])),
            (*idx == sel.chosen).to_string(),
        ]);
    }
    let mut meta = vec![("chosen", sel.chosen.to_string())];
    if let Some(r) = &rmse {
        meta.push(("rmse_ratio", num(rmse_ratio(r, sel.chosen)?)));
    }
    write_table(a.out.open()?, &t, (a.evaluate > 0).then_some(a.seed), &meta)
}

fn mc_moments(a: McArgs) -> Result<()> {
    let g = a.graph.build()?;
    let d = a.design.choice()?.build(a.clustering.build(&g)?)?;
    let mut out = a.out.open()?;
    if a.matrix {
        let (unit, samples, seed) = (a.unit[0], a.samples[0], a.seed[0]);
        let est = monte_carlo_moments(&d, &g, unit, a.beta, samples, seed)?;
        let exact = design_moments(&d, &unit_cluster_index(&g, d.clustering(), unit, a.beta)?)?;
        let mut t = Table::new(&["kind", "row", "col", "value"]);
        for (kind, m) in [
            ("matrix", &est.matrix),
            ("pinv", &est.pinv),
            ("analytic_pinv", &exact.pinv),
        ] {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    t.push(vec![
                        kind.into(),
                        r.to_string(),
                        c.to_string(),
                        num(m[(r, c)]),
                    ]);
                }
            }
        }
        let err = (&est.pinv - &exact.pinv).norm();
        return write_table(
            out,
            &t,
            Some(seed),
            &[("unit", unit.to_string()), ("frobenius_error", num(err))],
        );
    }
    let report = mc_convergence_report(&d, &g, &a.unit, a.beta, &a.samples, &a.seed)?;
    let mut t = Table::new(&[
        "kind",
        "samples",
        "seed",
        "unit",
        "frobenius_error",
        "log10_samples",
        "log10_error",
    ]);
    let logs = |s: usize, e: f64| vec![num((s as f64).log10()), num(e.log10())];
    for r in &report.rows {
        let mut row = vec![
            "replicate".into(),
            r.samples.to_string(),
            r.seed.to_string(),
            r.unit.to_string(),
            num(r.frobenius_error),
        ];
        row.extend(logs(r.samples, r.frobenius_error));
        t.push(row);
    }
    for s in &report.summary {
        let mut row = vec![
            "median".into(),
            s.samples.to_string(),
            String::new(),
            String::new(),
            num(s.median),
        ];
        row.extend(logs(s.samples, s.median));
        t.push(row);
        t.push(vec![
            "std".into(),
            s.samples.to_string(),
            String::new(),
            String::new(),
            num(s.std),
            String::new(),
            String::new(),
        ]);
    }
    if a.support {
        for &unit in &a.unit {
            let w = support_weighted_moments(&d, &g, unit, a.beta)?;
            let exact = design_moments(&d, &w.index)?;
            let err = (&w.pinv - &exact.pinv).norm();
            t.push(vec![
                "support".into(),
                String::new(),
                String::new(),
                unit.to_string(),
                num(err),
                String::new(),
                String::new(),
            ]);
        }
    }
    let seeds = a
        .seed
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    write_table(&mut out, &t, None, &[("seeds", seeds)])
}

fn oracle(a: OracleArgs) -> Result<()> {
    let g = a.graph.build()?;
    let model = a.model.build(&g)?;
    let d = a.design.choice()?.build(a.clustering.build(&g)?)?;
    let truth = true_tte(&model);
    let mut t = Table::new(&[
        "estimator",
        "mean",
        "variance",
        "true_tte",
        "bias",
        "analytic_bias",
        "var_bound_pairwise",
    ]);
    for spec in estimators(&a.estimator, a.beta)? {
        let est = Estimator::prepare(spec, &g, &d, MomentSource::Analytic)?;
        let m = exhaustive_moments(&model, &d, &est)?;
        let (bias, var) = analytic(&g, &model, &d, spec)?;
        t.push(vec![
            estimator_label(spec),
            num(m.mean),
            num(m.variance),
            num(truth),
            num(m.mean - truth),
            opt(bias),
            opt(var),
        ]);
    }
    write_table(a.out.open()?, &t, None, &[])
}

fn main() -> Result<()> {
    match run() {
        Err(e) if is_broken_pipe(&e) => Ok(()),
        other => other,
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn run() -> Result<()> {
    let argv = pinvtte::config::expand(std::env::args().collect())?;
    match Cli::parse_from(argv).command {
        Command::Cluster(a) => cluster(a),
        Command::Model(ModelCommand::Gen(a)) => model_gen(a),
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Bounds(a) => bounds(a),
        Command::Select(a) => select(a),
        Command::McMoments(a) => mc_moments(a),
        Command::Oracle(a) => oracle(a),
    }
}
