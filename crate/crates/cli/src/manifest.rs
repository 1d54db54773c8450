//! Run parameters, written next to the outputs of every run.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    // allow 1e5 style
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("bracket '{s}' must look like LO:HI"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad bracket start '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad bracket end '{b}'"))?;
    if !(lo <= hi) {
        return Err(format!("bracket {lo}:{hi} is reversed"));
    }
    Ok((lo, hi))
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// System configuration (JSON).
    #[arg(long, conflicts_with = "builtin")]
    pub config: Option<PathBuf>,
    /// Built-in system: section3:N or power:D.
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Julia cloud size.
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub samples: usize,
    /// Largest period for the periodic-point estimator.
    #[arg(long, default_value_t = 3)]
    pub period: usize,
    /// Initial bracket for the pressure zero.
    #[arg(long, default_value = "0:2", value_parser = parse_bracket)]
    pub bracket: (f64, f64),
    /// Bisection tolerance on the pressure zero.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Run `dim` even when checks do not pass.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Config(String),
    Builtin(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub source: Source,
    pub seed: u64,
    pub samples: usize,
    pub period: usize,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub out: String,
    pub force: bool,
    pub threads: Option<usize>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, source: Source, args: &RunArgs, threads: Option<usize>) -> Self {
        Self {
            command: command.to_string(),
            source,
            seed: args.seed,
            samples: args.samples,
            period: args.period,
            bracket: [args.bracket.0, args.bracket.1],
            tol: args.tol,
            out: args.out.display().to_string(),
            force: args.force,
            threads,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Arguments that reproduce this run.
    pub fn to_args(&self) -> RunArgs {
        let (config, builtin) = match &self.source {
            Source::Config(p) => (Some(PathBuf::from(p)), None),
            Source::Builtin(n) => (None, Some(n.clone())),
        };
        RunArgs {
            config,
            builtin,
            seed: self.seed,
            samples: self.samples,
            period: self.period,
            bracket: (self.bracket[0], self.bracket[1]),
            tol: self.tol,
            out: PathBuf::from(&self.out),
            force: self.force,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_brackets() {
        assert_eq!(parse_count("1e5").unwrap(), 100_000);
        assert_eq!(parse_count("250").unwrap(), 250);
        assert!(parse_count("1.5").is_err());
        assert_eq!(parse_bracket("0.5:2").unwrap(), (0.5, 2.0));
        assert!(parse_bracket("2:1").is_err());
        assert!(parse_bracket("2").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            command: "dim".into(),
            source: Source::Builtin("power:2".into()),
            seed: 9,
            samples: 1234,
            period: 4,
            bracket: [0.5, 1.5],
            tol: 1e-4,
            out: "somewhere".into(),
            force: true,
            threads: Some(2),
            version: "0.1.0".into(),
        };
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let again = RunManifest::new("dim", back.source.clone(), &back.to_args(), back.threads);
        assert_eq!(again, m);
    }
}
