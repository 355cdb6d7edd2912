use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evcharge::report::{self, Format, Method, ParamOverrides, Scenario};
use evcharge::sim::{convergence_experiment, simulate_full_lot, simulate_model, Scaling, SimConfig};
use evcharge::{Result, Spaces};

#[derive(Parser)]
#[command(name = "evcharge", version, about = "Occupancy and charging metrics for an EV charging lot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Arrival rate.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Charging rate per unit of power (default 1).
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Departure rate per vehicle (default 1).
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Number of spaces, or `inf`.
    #[arg(long = "K", alias = "k")]
    k: Option<Spaces>,
    /// Available power.
    #[arg(long = "M", alias = "m", allow_hyphen_values = true)]
    m: Option<f64>,
}

impl ParamArgs {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides { lambda: self.lambda, mu: self.mu, nu: self.nu, k: self.k, m: self.m }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; defaults to $EVCHARGE_OUT_DIR/<command>.<format>, else stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args, Clone)]
struct SimArgs {
    #[arg(long, default_value_t = 2e4)]
    horizon: f64,
    #[arg(long, default_value_t = 1e3)]
    burn_in: f64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig::new(self.horizon, self.burn_in, self.reps, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario with the selected methods.
    Eval {
        /// JSON scenario file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated methods: exact, bounds, fluid, fluid_modified,
        /// diffusion_overloaded, diffusion_smallnu, simulate.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum relative error of E[Z] for one approximation table.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Success probability and its bounds against M.
    Sweep {
        #[arg(long = "K", alias = "k")]
        k: u32,
        #[arg(long)]
        lambda_mult: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Comma-separated M values; default 1..=K.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimates with confidence half-widths.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Simulate the full-lot chain (Q = K throughout).
        #[arg(long)]
        full_lot: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulated convergence toward a scaling limit.
    Converge {
        /// fluid, hw, overloaded or smallnu.
        #[arg(long)]
        scaling: String,
        /// Comma-separated scale factors.
        #[arg(long, value_delimiter = ',', default_value = "10,100")]
        n: Vec<u32>,
        /// Power offset for hw and overloaded (default 0).
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Lot offset for hw (default 1, `inf` for no limit).
        #[arg(long)]
        kappa: Option<f64>,
        /// Initial uncharged fraction for fluid (default 0).
        #[arg(long)]
        z0: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn out_path(output: &OutputArgs, command: &str, format: Format) -> Option<PathBuf> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    report::resolve_output(output.out.as_deref(), &format!("{command}.{ext}"))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval { config, methods, params, output } => {
            let mut scenario = match config {
                Some(path) => {
                    let mut s = Scenario::load(&path)?;
                    s.params = params.overrides().apply(Some(s.params))?;
                    s
                }
                None => Scenario {
                    params: params.overrides().apply(None)?,
                    methods: Vec::new(),
                    simulation: None,
                    output: Default::default(),
                },
            };
            if !methods.is_empty() {
                scenario.methods = methods;
            }
            let format = output.format.unwrap_or(scenario.output.format);
            let path = output
                .out
                .clone()
                .or_else(|| scenario.output.path.clone())
                .or_else(|| out_path(&output, "eval", format));
            let rows = report::cmd_eval(&scenario)?;
            report::emit(&rows, format, path.as_deref())
        }
        Command::Tables { id, output } => {
            let format = output.format.unwrap_or_default();
            let rows = report::cmd_tables(id)?;
            report::emit(&rows, format, out_path(&output, &format!("table{id}"), format).as_deref())
        }
        Command::Sweep { k, lambda_mult, nu, mu, grid, output } => {
            let format = output.format.unwrap_or_default();
            let grid = (!grid.is_empty()).then_some(grid.as_slice());
            let rows = report::cmd_sweep(k, lambda_mult, nu, mu, grid)?;
            report::emit(&rows, format, out_path(&output, "sweep", format).as_deref())
        }
        Command::Simulate { params, sim, full_lot, output } => {
            let p = params.overrides().apply(None)?;
            let est = if full_lot { simulate_full_lot(&p, &sim.config())? } else { simulate_model(&p, &sim.config())? };
            let format = output.format.unwrap_or_default();
            report::emit(&[est], format, out_path(&output, "simulate", format).as_deref())
        }
        Command::Converge { scaling, n, beta, kappa, z0, params, sim, output } => {
            let mut scaling: Scaling = scaling.parse()?;
            match &mut scaling {
                Scaling::Fluid { z0: z, .. } => *z = z0.unwrap_or(*z),
                Scaling::HalfinWhitt { beta: b, kappa: k } => {
                    *b = beta.unwrap_or(*b);
                    *k = kappa.unwrap_or(*k);
                }
                Scaling::Overloaded { beta: b } => *b = beta.unwrap_or(*b),
                Scaling::SmallNu => {}
            }
            let p = params.overrides().apply(None)?;
            let rows = convergence_experiment(&p, &scaling, &n, &sim.config())?;
            let format = output.format.unwrap_or_default();
            report::emit(&rows, format, out_path(&output, "converge", format).as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(report::exit_code(&result) as u8)
}
