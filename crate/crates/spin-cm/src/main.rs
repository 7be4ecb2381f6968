use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "spin-cm",
    about = "Spin Calogero-Moser systems: projection solver, ODE oracle, verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the system described by a JSON run configuration
    Run {
        /// path to the configuration file
        config: String,
    },
    /// Run a verification suite over the built-in regression corpus
    Verify {
        /// identities | lax | conservation | crosscheck | gauss | all
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// optional explicit report path
        #[arg(long)]
        report: Option<String>,
    },
    /// Validate the closed-form lattice identities against truncated series
    Identities {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => spin_cm::cli::run(&config),
        Command::Verify {
            suite,
            seed,
            report,
        } => spin_cm::cli::verify_suite(&suite, seed, report.as_deref()),
        Command::Identities { samples, seed } => spin_cm::cli::identities(samples, seed),
    };
    std::process::exit(code);
}
