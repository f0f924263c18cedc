//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use ppcard_core::clustering::{KRange, ReferenceMethod};
use ppcard_core::theory::{emit_curves, MonteCarlo, Threshold};
use ppcard_core::{perturb_dataset, Encoder, PrivacyParams};

use crate::config::{DatasetSource, ExperimentConfig, FlipGrid};
use crate::error::{CliError, CliResult};
use crate::grid::{run_grid, write_grid};
use crate::pipeline::{self, Selection};
use crate::{io, seeds};

#[derive(Debug, Parser)]
#[command(name = "ppcard", version, about = "Privacy-preserving cardinality estimation over Bloom-filter encoded records")]
pub struct Cli {
    /// Experiment config (JSON or TOML); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic voter-style records split across providers.
    Datagen(DatagenArgs),
    /// Encode and perturb one provider's records into an exchange file.
    Encode(EncodeArgs),
    /// Pool exchange files and estimate the cardinality (linkage unit only).
    Cluster(ClusterArgs),
    /// Full pipeline: data, per-provider encoding, pooled estimate.
    Estimate(EstimateArgs),
    /// Run the method x epsilon x p_flip experiment grid.
    Grid(GridArgs),
    /// Same-cluster probability curves versus epsilon.
    TheoryCurves(TheoryArgs),
}

#[derive(Debug, Args, Default)]
pub struct DatagenArgs {
    #[arg(long)]
    pub entities: Option<usize>,
    #[arg(long)]
    pub providers: Option<usize>,
    /// Fraction of duplicate records that receive character edits.
    #[arg(long)]
    pub corruption: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Defaults to the records file stem.
    #[arg(long)]
    pub provider: Option<String>,
    /// Exchange file to write; defaults to `<out-dir>/exchange/<provider>.bf`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Ground-truth sidecar to write when the records carry entity ids.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct SelectArgs {
    #[arg(long)]
    pub method: Option<ReferenceMethod>,
    #[arg(long)]
    pub p_flip: Option<f64>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub n_init: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Exchange files from the providers.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Ground-truth sidecars, used only to attach error metrics.
    #[arg(long, num_args = 1..)]
    pub truth: Vec<PathBuf>,
    #[command(flatten)]
    pub select: SelectArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub select: SelectArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated epsilon list.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<ReferenceMethod>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub no_baseline: bool,
    #[command(flatten)]
    pub select: SelectArgs,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,6,7,8,9,10")]
    pub epsilons: Vec<f64>,
    /// Thresholds as fractions of the filter length.
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.015,0.02,0.025,0.03")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub ell: usize,
    /// Monte-Carlo trials per cell; 0 skips the simulation.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = Some(d.clone());
    }
    Ok(cfg)
}

fn apply_select(cfg: &mut ExperimentConfig, s: &SelectArgs) -> CliResult<()> {
    if let Some(m) = s.method {
        cfg.methods = vec![m];
    }
    if let Some(p) = s.p_flip {
        cfg.p_flip = FlipGrid::single(p);
    }
    match (s.k_min, s.k_max) {
        (None, None) => {}
        (Some(a), Some(b)) => cfg.estimator.k_range = Some(KRange::new(a, b)),
        _ => return Err(CliError::config("--k-min and --k-max go together")),
    }
    if let Some(n) = s.n_init {
        cfg.estimator.kmeans.n_init = n;
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = load_config(&cli)?;
    let out = cfg.output_dir();
    match &cli.command {
        Command::Datagen(a) => {
            if let DatasetSource::Generated { entities, num_providers, corruption_fraction, .. } = &mut cfg.dataset {
                if let Some(n) = a.entities {
                    *entities = n;
                }
                if let Some(n) = a.providers {
                    *num_providers = n;
                }
                if let Some(c) = a.corruption {
                    *corruption_fraction = c;
                }
            } else {
                return Err(CliError::config("datagen needs a generated dataset source"));
            }
            cfg.validate()?;
            let providers = pipeline::load_providers(&cfg)?;
            io::write_json(&out.join("schema.json"), &providers.schema)?;
            for (id, recs) in &providers.providers {
                io::write_records(&out.join(format!("{id}.csv")), &providers.schema, recs)?;
            }
            if let Some(m) = &providers.manifest {
                io::write_json(&out.join("manifest.json"), m)?;
            }
            println!("wrote {} providers to {}", providers.providers.len(), out.display());
        }
        Command::Encode(a) => {
            cfg.validate()?;
            let schema = io::read_schema(&a.schema)?;
            let records = io::read_records(&a.records, &schema)?;
            let provider = a.provider.clone().unwrap_or_else(|| pipeline::provider_id(&a.records));
            let encoder = Encoder::new(schema, cfg.encoding.clone())?;
            let filters = records
                .iter()
                .enumerate()
                .map(|(i, r)| encoder.encode(r).map_err(|e| CliError::data(format!("record {}: {e}", i + 1)).at(&a.records)))
                .collect::<CliResult<Vec<_>>>()?;
            let privacy = PrivacyParams::new(a.epsilon, seeds::perturbation(cfg.seed, a.epsilon, 0, &provider))?;
            let ds = perturb_dataset(&provider, &filters, &privacy)?;
            let path = a.output.clone().unwrap_or_else(|| pipeline::exchange_path(&out, &provider));
            io::write_exchange(&path, &ds)?;
            let ids: Option<Vec<String>> = records.iter().map(|r| r.entity_id.clone()).collect();
            match (&a.truth, ids) {
                (Some(t), Some(ids)) => io::write_truth(t, &ids)?,
                (Some(_), None) => return Err(CliError::data("records lack entity ids for a truth sidecar").at(&a.records)),
                _ => {}
            }
            println!("wrote {} filters to {}", ds.len(), path.display());
        }
        Command::Cluster(a) => {
            apply_select(&mut cfg, &a.select)?;
            cfg.validate()?;
            let mut sel = Selection::first(&cfg);
            let k_true = pipeline::k_true_from_truth(&a.truth)?;
            let first = io::read_exchange(&a.inputs[0])?;
            sel.epsilon = first.epsilon;
            let (report, path, _) = pipeline::linkage_stage(&cfg, &sel, &a.inputs, k_true, &out)?;
            print_summary(&report, &path);
        }
        Command::Estimate(a) => {
            apply_select(&mut cfg, &a.select)?;
            if let Some(e) = a.epsilon {
                cfg.epsilons = vec![e];
            }
            let sel = Selection::first(&cfg);
            let res = pipeline::run_pipeline(&cfg, &sel)?;
            print_summary(&res.cardinality, &res.report);
        }
        Command::Grid(a) => {
            apply_select(&mut cfg, &a.select)?;
            if a.select.p_flip.is_some() {
                log::info!("grid restricted to a single p_flip");
            }
            if let Some(e) = &a.epsilons {
                cfg.epsilons = e.clone();
            }
            if let Some(m) = &a.methods {
                cfg.methods = m.clone();
            }
            if let Some(r) = a.repetitions {
                cfg.repetitions = r;
            }
            if a.no_baseline {
                cfg.baseline = false;
            }
            let rows = run_grid(&cfg)?;
            let path = out.join("grid.csv");
            write_grid(&path, &rows)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("wrote {} rows ({failed} failed) to {}", rows.len(), path.display());
        }
        Command::TheoryCurves(a) => {
            let thresholds: Vec<Threshold> = a.thresholds.iter().map(|&f| Threshold::Fraction(f)).collect();
            let mc = (a.trials > 0).then_some(MonteCarlo {
                trials: a.trials,
                seed: cfg.seed,
            });
            let points = emit_curves(&a.epsilons, &thresholds, a.ell, mc)?;
            let path = out.join("theory_curves.csv");
            write_theory(&path, &points)?;
            println!("wrote {} rows to {}", points.len(), path.display());
        }
    }
    Ok(())
}

fn print_summary(r: &ppcard_core::clustering::CardinalityReport, report: &Path) {
    match (r.error, r.error_rate) {
        (Some(e), Some(rate)) => println!(
            "k_star={} cardinality={} error={e} error_rate={rate:.4} report={}",
            r.k_star,
            r.cardinality,
            report.display()
        ),
        _ => println!("k_star={} cardinality={} report={}", r.k_star, r.cardinality, report.display()),
    }
}

fn write_theory(path: &Path, points: &[ppcard_core::theory::TheoryPoint]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(e).at(dir))?;
    }
    let csv_err = |e: csv::Error| CliError::data(e.to_string()).at(path);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["epsilon", "r", "r_frac", "p_closed", "p_mc", "mu", "sigma"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.epsilon.to_string(),
            p.r.to_string(),
            p.r_frac.to_string(),
            p.p_closed.to_string(),
            p.p_mc.map(|v| v.to_string()).unwrap_or_default(),
            p.mu.to_string(),
            p.sigma.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::from(e).at(path))
}
