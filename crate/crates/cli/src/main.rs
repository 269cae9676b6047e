mod commands;
mod experiments;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bss", version, about = "Matrix-mixing multimedia cipher and attack experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    General,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key file.
    Keygen(commands::KeygenArgs),
    /// Encrypt a PGM image or WAV clip into a ciphertext container.
    Encrypt(commands::EncryptArgs),
    /// Decrypt a ciphertext container back to media.
    Decrypt(commands::DecryptArgs),
    /// Run an attack experiment and write its report, manifest and media.
    Experiment(experiments::ExperimentArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => commands::keygen(&a),
        Command::Encrypt(a) => commands::encrypt(&a),
        Command::Decrypt(a) => commands::decrypt(&a),
        Command::Experiment(a) => experiments::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Default location of the bundled corpus.
fn default_corpus() -> PathBuf {
    PathBuf::from("corpus")
}
