use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use squeezelab_core::scenario::{run_validated, ScenarioConfig, ScenarioKind};
use squeezelab_core::Status;

/// Environment variable that overrides the configured output directory.
const OUT_ENV: &str = "SQUEEZELAB_OUT";

#[derive(Parser)]
#[command(name = "squeezelab", version, about = "Coherent and squeezed wavepacket laboratory", after_long_help = defaults_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config. Keys left out take the
    /// scenario's defaults. Exit status: 0 all hard invariants pass, 1 a
    /// hard invariant failed, 2 the config is invalid.
    #[command(after_long_help = defaults_help())]
    Run { config: PathBuf },
    /// Print the full default config of a scenario as TOML.
    PrintDefaultConfig {
        #[arg(default_value = "harmonic-coherent")]
        scenario: String,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for kind in ScenarioKind::ALL {
                println!("{:<18} {}", kind.name(), kind.description());
            }
            ExitCode::SUCCESS
        }
        Command::PrintDefaultConfig { scenario } => match ScenarioKind::from_name(&scenario) {
            Some(kind) => {
                print!("{}", default_toml(kind));
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown scenario '{scenario}' (see list-scenarios)");
                ExitCode::from(2)
            }
        },
        Command::Run { config } => run(&config),
    }
}

fn run(path: &Path) -> ExitCode {
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = std::env::var_os(OUT_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    let setup = match cfg.validate() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    let outcome = run_validated(&cfg, &setup);
    let written = match outcome.write(&cfg.output_dir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: writing artifacts to {}: {e}", cfg.output_dir.display());
            return ExitCode::from(1);
        }
    };
    for entry in &outcome.report.entries {
        let status = match entry.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
            Status::Info => "info",
        };
        // values near one (overlaps) are printed in full so the deficit shows
        let measured = match entry.measured {
            Some(m) if (m - 1.0).abs() < 1e-3 => format!("{m}"),
            Some(m) => format!("{m:.3e}"),
            None => "-".into(),
        };
        let tol = entry.tolerance.map(|t| format!(" (limit {t:.1e})")).unwrap_or_default();
        println!("{status:<5} {:<36} {measured}{tol}", entry.name);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!("{} finished in {:.1} s", cfg.scenario.name(), started.elapsed().as_secs_f64());
    if outcome.success() {
        ExitCode::SUCCESS
    } else {
        for f in outcome.report.failures() {
            eprintln!("failed: {}: {}", f.name, f.detail);
        }
        ExitCode::from(1)
    }
}

/// Reads a config and fills every key it leaves out from the defaults of
/// its scenario.
fn load_config(path: &Path) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let user: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
    let name = user
        .get("scenario")
        .and_then(|v| v.as_str())
        .ok_or_else(|| format!("{}: missing string key 'scenario'", path.display()))?;
    let kind = ScenarioKind::from_name(name).ok_or_else(|| format!("unknown scenario '{name}'"))?;
    let mut merged = toml::Table::try_from(ScenarioConfig::default_for(kind)).map_err(|e| e.to_string())?;
    merge(&mut merged, user);
    merged.try_into().map_err(|e: toml::de::Error| format!("{}: {e}", path.display()))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn default_toml(kind: ScenarioKind) -> String {
    toml::to_string(&ScenarioConfig::default_for(kind)).expect("default config serializes")
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            v => out.push((key, v.to_string())),
        }
    }
}

/// Default config of the base scenario followed by each scenario's
/// overrides.
fn defaults_help() -> String {
    let table = |kind| toml::Table::try_from(ScenarioConfig::default_for(kind)).expect("default config serializes");
    let mut base = Vec::new();
    flatten("", &table(ScenarioKind::HarmonicCoherent), &mut base);
    let mut text = String::from("Defaults (harmonic-coherent):\n");
    for (k, v) in &base {
        text.push_str(&format!("  {k} = {v}\n"));
    }
    for kind in ScenarioKind::ALL.into_iter().skip(1) {
        let mut own = Vec::new();
        flatten("", &table(kind), &mut own);
        let changed: Vec<String> =
            own.iter().filter(|kv| !base.contains(kv)).map(|(k, v)| format!("{k} = {v}")).collect();
        text.push_str(&format!("\n{} overrides:\n  {}\n", kind.name(), changed.join("\n  ")));
    }
    text.push_str("\nprofile.table is only read when profile.name = \"table\"; dynamics.dq0 defaults to the well's stationary dispersion.");
    text
}
