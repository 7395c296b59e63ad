use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tauberkit", version, about = "Tauberian asymptotics of non-increasing functions: transforms, checks and fits")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// σ sequence 2^-k for k = k0..=k1.
    #[arg(long = "sigma-seq", global = true, value_name = "K0:K1", value_parser = parse_sigma_seq)]
    pub sigma_seq: Option<(i32, i32)>,
    /// Log-spaced T grid.
    #[arg(long = "T-grid", global = true, value_name = "LO:HI:N", value_parser = parse_grid)]
    pub t_grid: Option<Grid>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    Loglim,
    Lipschitz,
    Dk,
    BoundedH,
    Ab,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every exemplar against its closed-form oracles.
    VerifyCorpus,
    /// Fit the asymptotic law to sampled data and tabulate the ratios.
    Analyze {
        /// CSV with header `t,phi`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_name = "LO:HI", value_parser = parse_window)]
        window: (f64, f64),
        /// Pass tolerance on |ratio(t_max) - 1|.
        #[arg(long = "ratio-tol", default_value_t = 0.02)]
        ratio_tol: f64,
        /// Log-spaced grid for the ratio table (default: the fit window).
        #[arg(long = "ratio-grid", value_name = "LO:HI:N", value_parser = parse_grid)]
        ratio_grid: Option<Grid>,
    },
    /// Run one hypothesis checker on an exemplar.
    Check {
        #[arg(long)]
        exemplar: String,
        #[arg(long, value_enum)]
        condition: Condition,
        /// Strip half-height.
        #[arg(long = "T", default_value_t = 10.0)]
        t: f64,
        /// Left edge of the Lipschitz strip as a fraction of mu.
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Exponent for `loglim_counterexample`.
        #[arg(long)]
        j: Option<f64>,
    },
    /// Tabulate η(σ, T) along the σ sequence.
    EtaScan {
        #[arg(long)]
        exemplar: String,
        #[arg(long = "T", value_delimiter = ',', default_values_t = [1.0, 10.0, 64.0])]
        t: Vec<f64>,
    },
    /// ρ(t) with its minimizing T and the envelope for phi(t).
    Rho {
        #[arg(long)]
        exemplar: String,
        #[arg(long = "t", value_delimiter = ',', default_values_t = [50.0, 100.0, 200.0])]
        times: Vec<f64>,
        /// Envelope constant C.
        #[arg(long = "C")]
        constant: Option<f64>,
    },
    /// Tables of g_j, h_j and the regime bounds.
    Specialfn {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0, 3.0])]
        j: Vec<f64>,
    },
    /// Inspect the exemplar registry.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    List,
    /// Exemplar definition with samples of phi on [0, t_max].
    Dump {
        name: String,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
}

fn parse_sigma_seq(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected K0:K1")?;
    let k0: i32 = a.trim().parse().map_err(|e| format!("bad K0: {e}"))?;
    let k1: i32 = b.trim().parse().map_err(|e| format!("bad K1: {e}"))?;
    if k0 < 0 || k1 <= k0 {
        return Err("need 0 <= K0 < K1".into());
    }
    Ok((k0, k1))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err("need 0 < LO < HI".into());
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err("expected LO:HI:N".into());
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad N: {e}"))?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err("need 0 < LO <= HI and N >= 1".into());
    }
    Ok(Grid { lo, hi, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_sigma_seq("2:12"), Ok((2, 12)));
        assert!(parse_sigma_seq("5:2").is_err());
        assert!(parse_sigma_seq("x").is_err());
        assert_eq!(parse_window("5:80"), Ok((5.0, 80.0)));
        assert!(parse_window("0:80").is_err());
        assert_eq!(parse_grid("64:1e6:40"), Ok(Grid { lo: 64.0, hi: 1e6, n: 40 }));
        assert!(parse_grid("64:1e6").is_err());
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
