use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use evodyn::rational::{format_rational, parse_rational};
use evodyn::{enumerate_nash, shapley_triangle, Rational, RpsSpec, SymmetricGame};
use evodyn_cli::{load_game, parse_face, run_batch, thread_pool, Batch, Builder, BuilderArgs, Experiment, ExperimentConfig};

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Parser)]
#[command(name = "evodyn", version, about = "Replicator and best-reply dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GameArgs {
    /// Game JSON file ({n, payoff: [[num, den], ...]}).
    game: Option<PathBuf>,
    /// Built-in game instead of a file.
    #[arg(long, value_enum)]
    builder: Option<Builder>,
    /// Builder parameters, as p/q.
    #[arg(long, value_parser = rational)]
    eps: Option<Rational>,
    #[arg(long, value_parser = rational)]
    alpha: Option<Rational>,
    #[arg(long, value_parser = rational)]
    beta: Option<Rational>,
}

impl GameArgs {
    fn game(&self) -> anyhow::Result<SymmetricGame> {
        match (&self.game, self.builder) {
            (Some(path), None) => load_game(path),
            (None, Some(b)) => b.build(&self.builder_args()),
            _ => bail!("give either a game file or --builder"),
        }
    }

    fn builder_args(&self) -> BuilderArgs {
        BuilderArgs { eps: self.eps.clone(), alpha: self.alpha.clone(), beta: self.beta.clone() }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; may instead come from --config.
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of initial conditions (games for perturb66).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon T.
    #[arg(long = "T", visible_alias = "horizon")]
    horizon: Option<f64>,
    /// Epsilon of the epsilon-form RPS blocks, as p/q.
    #[arg(long, value_parser = rational)]
    eps: Option<Rational>,
    /// Cyclic RPS parameters, as p/q.
    #[arg(long, value_parser = rational)]
    alpha: Option<Rational>,
    #[arg(long, value_parser = rational)]
    beta: Option<Rational>,
    /// Perturbation magnitude (perturb66).
    #[arg(long, value_parser = rational)]
    delta: Option<Rational>,
    /// Best-reply runs per perturbed game (perturb66).
    #[arg(long)]
    runs_per_game: Option<usize>,
    /// Replicator integrator tolerances.
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Rows per exported CSV.
    #[arg(long)]
    csv_samples: Option<usize>,
    /// Output directory for reports and per-run files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print every report as a JSON line.
    #[arg(long)]
    jsonl: bool,
}

impl RunArgs {
    fn config(&self, fallback: Option<Experiment>) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.experiment.or(fallback)) {
            (Some(path), e) => {
                let mut c = ExperimentConfig::from_file(path)?;
                if let Some(e) = e {
                    c.experiment = e;
                }
                c
            }
            (None, Some(e)) => ExperimentConfig::new(e),
            (None, None) => bail!("give an experiment name or --config"),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone().into();
                }
            )*};
        }
        set!(count, seed, rtol, atol, csv_samples, runs_per_game);
        if self.horizon.is_some() {
            cfg.horizon = self.horizon;
        }
        for (dst, src) in [
            (&mut cfg.eps, &self.eps),
            (&mut cfg.alpha, &self.alpha),
            (&mut cfg.beta, &self.beta),
            (&mut cfg.delta, &self.delta),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        if self.out.is_some() {
            cfg.out_dir = self.out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all Nash equilibria and report uniqueness.
    Nash {
        #[command(flatten)]
        game: GameArgs,
        /// Print the certificates as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a named, seeded batch of experiments.
    Run(RunArgs),
    /// Print the Shapley triangle of an RPS face.
    Shapley {
        #[command(flatten)]
        game: GameArgs,
        /// Face as 1-based labels, e.g. 4,5,6 (default: every RPS face of the builder).
        #[arg(long)]
        face: Option<String>,
    },
    /// Compare 7x7 replicator face shares with the face games under rescaled time.
    DecomposeCheck(RunArgs),
}

fn nash(args: &GameArgs, json: bool) -> anyhow::Result<bool> {
    let g = args.game()?;
    let nash = enumerate_nash(&g)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&nash.to_json())?);
    } else {
        for (k, c) in nash.equilibria.iter().enumerate() {
            println!(
                "equilibrium {}: x = {} y = {} support = {} quasi_strict = {} strict = {}",
                k + 1,
                c.x,
                c.y,
                c.support_x,
                c.quasi_strict,
                c.strict
            );
        }
        let verdict = if nash.is_unique() { "unique" } else { "not unique" };
        let degenerate = if nash.degenerate { " (degenerate: continuum of equilibria)" } else { "" };
        println!("{} equilibria, {verdict}{degenerate}", nash.equilibria.len());
    }
    Ok(true)
}

fn shapley(args: &GameArgs, face: Option<&str>) -> anyhow::Result<bool> {
    let g = args.game()?;
    let faces = match (face, args.builder) {
        (Some(f), _) => vec![parse_face(f)?],
        (None, Some(b)) => b.rps_faces(),
        (None, None) => bail!("--face is required for a game file"),
    };
    for face in faces {
        let block = g.restrict(face)?;
        let spec = RpsSpec::from_matrix(&block)?;
        let tri = shapley_triangle(&spec, face, &g).with_context(|| format!("face {face}"))?;
        println!("face {face}");
        for (k, v) in tri.vertices.iter().enumerate() {
            let (i, j) = (tri.face[k] + 1, tri.face[(k + 1) % 3] + 1);
            println!("  {i}->{j}: {v}");
        }
        let a: Vec<String> = tri.coefficients.iter().map(format_rational).collect();
        println!("  level coefficients: {}", a.join(", "));
        println!("{}", serde_json::to_string(&tri.to_json())?);
    }
    Ok(true)
}

fn finish(batch: &Batch, jsonl: bool) -> anyhow::Result<bool> {
    if jsonl {
        for r in batch.records() {
            println!("{}", serde_json::to_string(r)?);
        }
    }
    if let Some(dir) = &batch.config.out_dir {
        batch.write(dir)?;
    }
    print!("{}", batch.summary().table());
    Ok(batch.success())
}

fn run(args: &RunArgs, fallback: Option<Experiment>) -> anyhow::Result<bool> {
    let cfg = args.config(fallback)?;
    let pool = thread_pool()?;
    let batch = run_batch(&cfg, &pool)?;
    finish(&batch, args.jsonl)
}

fn decompose_check(args: &RunArgs) -> anyhow::Result<bool> {
    if args.experiment.is_some_and(|e| e != Experiment::RescaleCheck) {
        bail!("decompose-check only runs the rescale-check experiment");
    }
    let cfg = args.config(Some(Experiment::RescaleCheck))?;
    let pool = thread_pool()?;
    let batch = run_batch(&cfg, &pool)?;
    for r in batch.records() {
        let d = &r.report["rescale"];
        println!("run {:>4}: bar {} hat {}", r.run_index + 1, d["bar"], d["hat"]);
    }
    finish(&batch, args.jsonl)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Nash { game, json } => nash(game, *json),
        Command::Run(args) => run(args, None),
        Command::Shapley { game, face } => shapley(game, face.as_deref()),
        Command::DecomposeCheck(args) => decompose_check(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
