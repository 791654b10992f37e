use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use egtl::estimation::BayesConfig;
use egtl::io::{exit_code, run, Command, OutputFormat, RunConfig};
use egtl::simulation::SimDesign;
use egtl::{EgtlError, EgtlParams, Method, SeriesControl};

#[derive(Parser)]
#[command(
    name = "egtl",
    version,
    about = "EGTL lifetime distributions: fitting, goodness of fit, simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Random seed for sampling and simulation.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Relative truncation tolerance for moment series.
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,

    /// Hard cap on moment series terms.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    max_terms: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mle,
    Em,
    Moments,
    Bayes,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mle => Method::MleDirect,
            MethodArg::Em => Method::Em,
            MethodArg::Moments => Method::Moments,
            MethodArg::Bayes => Method::Bayes,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    k: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit (p, theta) for a fixed k.
    Fit {
        /// File path or bundled dataset name (barlow1975, quesenberry1982).
        #[arg(long)]
        data: String,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
        method: MethodArg,
        /// Starting shape for mle/em.
        #[arg(long, requires = "init_theta")]
        init_p: Option<f64>,
        /// Starting rate for mle/em.
        #[arg(long, requires = "init_p")]
        init_theta: Option<f64>,
        /// Gamma prior shape (bayes).
        #[arg(long, default_value_t = 1.0)]
        prior_a: f64,
        /// Gamma prior rate (bayes).
        #[arg(long, default_value_t = 1.0)]
        prior_b: f64,
        #[arg(long, default_value_t = 128)]
        grid_p: usize,
        #[arg(long, default_value_t = 256)]
        grid_theta: usize,
        #[arg(long)]
        theta_max: Option<f64>,
    },
    /// Kolmogorov-Smirnov table: EGTL k = 1..k-max, gamma, Weibull.
    Gof {
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 4)]
        k_max: u32,
    },
    /// Monte Carlo bias / variance / MSE of the estimators.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        replications: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [20, 50, 100])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
        k_values: Vec<u32>,
        /// True (p:theta) settings, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = ["0.5:0.5".to_string(), "0.7:1.5".to_string(), "0.3:2".to_string()])]
        settings: Vec<String>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Mle, MethodArg::Moments, MethodArg::Bayes])]
        methods: Vec<MethodArg>,
    },
    /// Draw a seeded sample.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
    },
    /// pdf, cdf, survival and hazard on a uniform grid.
    Curve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Right end of the grid; defaults to the 0.999 quantile.
        #[arg(long)]
        x_max: Option<f64>,
    },
}

fn parse_setting(s: &str) -> Result<(f64, f64), EgtlError> {
    let bad = || EgtlError::Domain(format!("setting `{s}` is not of the form p:theta"));
    let (p, t) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        p.trim().parse().map_err(|_| bad())?,
        t.trim().parse().map_err(|_| bad())?,
    ))
}

fn build_config(cli: Cli) -> Result<RunConfig, EgtlError> {
    let series = SeriesControl::new(cli.rel_tol, cli.max_terms)?;
    let command = match cli.command {
        Cmd::Fit {
            data,
            k,
            method,
            init_p,
            init_theta,
            prior_a,
            prior_b,
            grid_p,
            grid_theta,
            theta_max,
        } => {
            let bayes = BayesConfig {
                a: prior_a,
                b: prior_b,
                grid_p,
                grid_theta,
                theta_max,
            };
            bayes.validate()?;
            Command::Fit {
                data,
                k,
                method: method.into(),
                init: init_p.zip(init_theta),
                bayes,
            }
        }
        Cmd::Gof { data, k_max } => Command::Gof { data, k_max },
        Cmd::Simulate {
            replications,
            sizes,
            k_values,
            settings,
            methods,
        } => Command::Simulate {
            design: SimDesign {
                sample_sizes: sizes,
                k_values,
                param_settings: settings
                    .iter()
                    .map(|s| parse_setting(s))
                    .collect::<Result<_, _>>()?,
                replications,
                methods: methods.into_iter().map(Method::from).collect(),
                ..SimDesign::default()
            },
        },
        Cmd::Sample { params, n } => Command::Sample {
            params: EgtlParams::new(params.p, params.theta, params.k)?,
            n,
        },
        Cmd::Curve {
            params,
            points,
            x_max,
        } => Command::Curve {
            params: EgtlParams::new(params.p, params.theta, params.k)?,
            points,
            x_max,
        },
    };
    Ok(RunConfig {
        command,
        format: match cli.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Table => OutputFormat::Table,
        },
        seed: cli.seed,
        series,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.output);
            for d in &outcome.diagnostics {
                eprintln!("note: {d}");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let EgtlError::DataQuality { indices, .. } = &e {
                if !indices.is_empty() {
                    eprintln!("offending indices: {indices:?}");
                }
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
