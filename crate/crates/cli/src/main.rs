use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use imgclust_core::pipeline::{self, cluster_table, evaluate_assignments, extract_features};
use imgclust_core::table::write_atomic;
use imgclust_core::{
    ingest, read_assignments, read_features, run_pipeline, write_assignments, write_features,
    Error, Init, KMeansConfig, Labeling, Method, PipelineConfig,
};

/// Cluster images by color moments or block truncation coding features.
#[derive(Debug, Parser)]
#[command(name = "imgclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract one feature vector per image into a CSV table.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = LabelingArg::Subdirs)]
        labeling: LabelingArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Btc)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        /// Z-score every feature dimension over the table.
        #[arg(long)]
        normalize: bool,
    },
    /// Run k-means over a feature table and write per-image cluster indices.
    Cluster {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InitArg::Kmeanspp)]
        init: InitArg,
        #[arg(long = "max-iter", default_value_t = 100)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score cluster assignments against their labels.
    Evaluate {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run extract, cluster and evaluate from a key=value config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LabelingArg {
    Subdirs,
    #[value(name = "wang_numeric")]
    WangNumeric,
    None,
}

impl From<LabelingArg> for Labeling {
    fn from(v: LabelingArg) -> Self {
        match v {
            LabelingArg::Subdirs => Labeling::Subdirs,
            LabelingArg::WangNumeric => Labeling::WangNumeric,
            LabelingArg::None => Labeling::Unlabeled,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Moments,
    Btc,
}

impl From<MethodArg> for Method {
    fn from(v: MethodArg) -> Self {
        match v {
            MethodArg::Moments => Method::Moments,
            MethodArg::Btc => Method::Btc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Kmeanspp,
    #[value(name = "random_points")]
    RandomPoints,
}

impl From<InitArg> for Init {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Kmeanspp => Init::KMeansPlusPlus,
            InitArg::RandomPoints => Init::RandomPoints,
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Extract {
            input,
            labeling,
            method,
            out,
            normalize,
        } => {
            let manifest = ingest(&input, labeling.into())?;
            let table = extract_features(&manifest, method.into(), normalize)?;
            write_features(&table, &out)?;
            eprintln!(
                "extracted {} {} vectors to {}",
                table.len(),
                table.method,
                out.display()
            );
        }
        Command::Cluster {
            features,
            k,
            seed,
            init,
            max_iter,
            out,
        } => {
            let table = read_features(&features)?;
            let config = KMeansConfig::new(k, seed)
                .with_init(init.into())
                .with_max_iterations(max_iter);
            let (model, rows) = cluster_table(&table, &config)?;
            write_assignments(&rows, &out)?;
            eprintln!(
                "k={k}: {} iterations, converged={}, sse={}",
                model.iterations_run,
                model.converged,
                model.sse(&table.rows)
            );
        }
        Command::Evaluate { assignments, out } => {
            let rows = read_assignments(&assignments)?;
            let report = evaluate_assignments(&rows)?;
            write_atomic(&out, pipeline::report_csv(&report).as_bytes())?;
            print!("{}", pipeline::report_table(&report));
        }
        Command::Pipeline { config } => {
            let config = PipelineConfig::load(&config)?;
            let output = run_pipeline(&config)?;
            print!("{}", pipeline::report_table(&output.report));
            eprintln!("artifacts written to {}", config.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
