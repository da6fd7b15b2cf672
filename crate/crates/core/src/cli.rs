//! Command-line entry points: serve, generate, replay, validate, mirror,
//! graph-export and stats.

use std::io::Write as _;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::controller::{behavior_for, ControllerConfig, EpisodeController, DEFAULT_DT};
use crate::driver::drive_to_goal;
use crate::gateway::{self, GatewayConfig};
use crate::graph::{episode_to_samples, export_graph_dataset, schema_path};
use crate::recorder::{
    dataset_stats, load_episode, write_episode, ComplianceConfig, FixedClock, SystemClock,
};
use crate::replay::{replay_episode, ReplayReport};
use crate::rng::Seed;
use crate::scene::{generate_world, CountRange, GenerationRanges, RoomShapeChoice, SceneParams};
use crate::{canonical, recorder};

#[derive(Debug, Parser)]
#[command(name = "sonata", version, about = "Social navigation data toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the simulation loop behind a WebSocket gateway.
    Serve(ServeArgs),
    /// Generate scenes, or record autopilot episodes with `--episodes`.
    Generate(GenerateArgs),
    /// Re-simulate an episode and compare every frame.
    Replay { file: PathBuf },
    /// Load and check episode files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write the mirrored copy of episode files.
    Mirror {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output directory; defaults to each input's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert episodes into a line-delimited graph dataset.
    GraphExport {
        /// Episode files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
        window: u8,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        stride: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a directory of episodes.
    Stats {
        /// Defaults to the data directory.
        dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// TOML or JSON file of `[min, max]` ranges; flags below override it.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub humans_static: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub humans_walking: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub tables: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub laptops: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub plants: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub human_human_talking: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub human_laptop_interaction: Option<CountRange>,
    #[arg(long, value_name = "N|MIN,MAX")]
    pub walking_groups: Option<CountRange>,
    #[arg(long, default_value = "random")]
    pub room_shape: RoomShapeChoice,
    /// Seconds per tick.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
}

impl SceneArgs {
    pub fn generation_ranges(&self) -> Result<GenerationRanges> {
        let mut r = match &self.ranges {
            Some(path) => GenerationRanges::from_file(path)?,
            None => GenerationRanges::default(),
        };
        let overrides = [
            (&mut r.humans_static, self.humans_static),
            (&mut r.humans_walking, self.humans_walking),
            (&mut r.tables, self.tables),
            (&mut r.laptops, self.laptops),
            (&mut r.plants, self.plants),
            (&mut r.human_human_talking, self.human_human_talking),
            (&mut r.human_laptop_interaction, self.human_laptop_interaction),
            (&mut r.walking_groups, self.walking_groups),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        r.validate()?;
        Ok(r)
    }

    pub fn controller_config(&self, user_id: &str) -> Result<ControllerConfig> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            bail!("--dt must be positive, got {}", self.dt);
        }
        if !recorder::is_valid_user_id(user_id) {
            bail!("user id {user_id:?} must be ASCII letters and digits");
        }
        let scene = SceneParams::with_shape(self.room_shape);
        Ok(ControllerConfig {
            user_id: user_id.to_string(),
            dt: self.dt,
            behavior: behavior_for(&scene),
            scene,
            ..ControllerConfig::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    /// Address to bind.
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    pub host: IpAddr,
    #[arg(long, default_value = "demo")]
    pub user: String,
    #[arg(long, env = "SONATA_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Milliseconds between ticks; defaults to real time (dt).
    #[arg(long)]
    pub tick_ms: Option<u64>,
    #[command(flatten)]
    pub scene: SceneArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Number of consecutive seeds to generate scenes for.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Record this many autopilot episodes instead of writing scenes.
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long, default_value = "autopilot")]
    pub user: String,
    /// Scenes: output file (JSON lines), stdout if absent. Episodes: output
    /// directory, the data directory if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "SONATA_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Tick budget per autopilot episode.
    #[arg(long, default_value_t = 5000)]
    pub max_ticks: u64,
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns `Ok(false)` when the command ran but reported errors.
pub fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Serve(args) => serve(args),
        Command::Generate(args) => generate(args),
        Command::Replay { file } => {
            let episode = load_episode(&file)?;
            let report = replay_episode(&episode)?;
            println!("{}: {report}", file.display());
            Ok(matches!(report, ReplayReport::Exact { .. }))
        }
        Command::Validate { files } => {
            let mut ok = true;
            for file in files {
                match load_episode(&file) {
                    Ok(ep) => println!("{}: ok ({} steps)", file.display(), ep.steps.len()),
                    Err(e) => {
                        ok = false;
                        println!("{}", describe(&file, &e.to_string()));
                    }
                }
            }
            Ok(ok)
        }
        Command::Mirror { files, out } => {
            let mut ok = true;
            for file in files {
                let result = load_episode(&file).and_then(|ep| {
                    let dir = out
                        .clone()
                        .or_else(|| file.parent().map(Path::to_path_buf))
                        .unwrap_or_default();
                    let clock = FixedClock(ep.metadata.created_at);
                    write_episode(&ep.mirrored(), &dir, &clock)
                });
                match result {
                    Ok(path) => println!("{} -> {}", file.display(), path.display()),
                    Err(e) => {
                        ok = false;
                        println!("{}", describe(&file, &e.to_string()));
                    }
                }
            }
            Ok(ok)
        }
        Command::GraphExport {
            inputs,
            window,
            stride,
            out,
        } => graph_export(&inputs, window as usize, stride as usize, &out),
        Command::Stats { dir } => {
            let dir = dir.unwrap_or_else(default_data_dir);
            let stats = dataset_stats(&dir, &ComplianceConfig::default())?;
            for e in &stats.errors {
                eprintln!("{}", describe(&e.file, &e.error));
            }
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(stats.errors.is_empty())
        }
    }
}

/// Error text prefixed with the file unless it already names it.
fn describe(file: &Path, error: &str) -> String {
    let name = file.display().to_string();
    if error.contains(&name) {
        error.to_string()
    } else {
        format!("{name}: {error}")
    }
}

fn default_data_dir() -> PathBuf {
    std::env::var_os("SONATA_DATA_DIR").map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

fn serve(args: ServeArgs) -> Result<bool> {
    let config = GatewayConfig {
        addr: SocketAddr::new(args.host, args.port),
        controller: args.scene.controller_config(&args.user)?,
        ranges: args.scene.generation_ranges()?,
        seed: Seed(args.scene.seed),
        data_dir: args.data_dir,
        tick_interval: args
            .tick_ms
            .map(Duration::from_millis)
            .unwrap_or_else(|| Duration::from_secs_f64(args.scene.dt)),
    };
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime.block_on(async {
        let handle = gateway::start(config).await?;
        println!("serving on ws://{}", handle.local_addr());
        handle.wait().await;
        Ok(true)
    })
}

fn generate(args: GenerateArgs) -> Result<bool> {
    let ranges = args.scene.generation_ranges()?;
    let config = args.scene.controller_config(&args.user)?;
    if let Some(n) = args.episodes {
        let dir = args.out.clone().unwrap_or(args.data_dir.clone());
        let mut ok = true;
        for i in 0..n {
            let seed = Seed(args.scene.seed.wrapping_add(i));
            let result = EpisodeController::new(config.clone(), ranges, seed, None)
                .map_err(anyhow::Error::from)
                .and_then(|mut c| {
                    drive_to_goal(&mut c, args.max_ticks)?;
                    Ok(c.finish(crate::controller::Decision::Save, &dir, &SystemClock)?)
                });
            match result {
                Ok(Some(path)) => println!("seed {seed}: {}", path.display()),
                Ok(None) => {}
                Err(e) => {
                    ok = false;
                    eprintln!("seed {seed}: {e:#}");
                }
            }
        }
        return Ok(ok);
    }
    let mut out: Box<dyn std::io::Write> = match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut ok = true;
    for i in 0..args.count {
        let seed = Seed(args.scene.seed.wrapping_add(i));
        match generate_world(&ranges, &config.scene, seed) {
            Ok(world) => writeln!(out, "{}", canonical::to_string(&world.state)?)?,
            Err(e) => {
                ok = false;
                eprintln!("seed {seed}: {e}");
            }
        }
    }
    out.flush()?;
    Ok(ok)
}

fn episode_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn graph_export(inputs: &[PathBuf], window: usize, stride: usize, out: &Path) -> Result<bool> {
    let files = episode_files(inputs)?;
    let per_file: Vec<(PathBuf, Result<Vec<_>>)> = files
        .into_par_iter()
        .map(|f| {
            let samples = load_episode(&f)
                .map_err(anyhow::Error::from)
                .and_then(|ep| Ok(episode_to_samples(&ep, window, stride)?));
            (f, samples)
        })
        .collect();
    let mut ok = true;
    let mut samples = Vec::new();
    for (file, result) in per_file {
        match result {
            Ok(s) => samples.extend(s),
            Err(e) => {
                ok = false;
                eprintln!("{}: {e:#}", file.display());
            }
        }
    }
    export_graph_dataset(&samples, out)?;
    println!(
        "{} samples -> {} (schema {})",
        samples.len(),
        out.display(),
        schema_path(out).display()
    );
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("ranges.toml");
        std::fs::write(&file, "tables = [2, 2]\nplants = [1, 1]\n").unwrap();
        let cli = Cli::try_parse_from([
            "sonata",
            "generate",
            "--ranges",
            file.to_str().unwrap(),
            "--plants",
            "0,3",
            "--humans-walking",
            "2",
        ])
        .unwrap();
        let Command::Generate(args) = cli.command else { panic!() };
        let r = args.scene.generation_ranges().unwrap();
        assert_eq!(r.tables, CountRange::new(2, 2));
        assert_eq!(r.plants, CountRange::new(0, 3));
        assert_eq!(r.humans_walking, CountRange::exactly(2));
    }

    #[test]
    fn window_flag_is_bounded() {
        assert!(Cli::try_parse_from(["sonata", "graph-export", "x", "--out", "y", "--window", "4"]).is_err());
        assert!(Cli::try_parse_from(["sonata", "graph-export", "x", "--out", "y", "--window", "2"]).is_ok());
    }

    #[test]
    fn bad_user_id_rejected() {
        let cli = Cli::try_parse_from(["sonata", "generate"]).unwrap();
        let Command::Generate(args) = cli.command else { panic!() };
        assert!(args.scene.controller_config("no_underscores").is_err());
    }
}
