//! `fracmc`: one experiment per invocation.
//!
//! Settings are layered: built-in defaults < `--config` (key=value) <
//! `--override` (JSON object) < flags. Exit status 0 on success, 2 when the
//! run's verification verdict fails, 1 on any error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, Settings};

#[derive(Parser, Debug)]
#[command(name = "fracmc", version, about = "Fractional area and fractional mean curvature experiments")]
struct Cli {
    /// Worker threads (falls back to FRACMC_THREADS); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key=value settings file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// JSON object overriding the settings file.
    #[arg(long = "override", global = true, value_name = "FILE")]
    override_json: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

// Every flag is kept as text and validated with the rest of the settings, so
// a bad value gets the same diagnostics wherever it came from.
macro_rules! flags {
    ($name:ident { $($field:ident = $flag:literal : $key:literal),* $(,)? }) => {
        #[derive(Args, Debug, Default)]
        struct $name {
            $(
                #[arg(long = $flag, allow_hyphen_values = true, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl $name {
            fn pairs(&self) -> Vec<(&'static str, String)> {
                let mut v = Vec::new();
                $( if let Some(x) = &self.$field { v.push(($key, x.clone())); } )*
                v
            }
        }
    };
}

flags!(Sampling {
    s = "s": "s", n = "n": "n", seed = "seed": "seed", r_near = "r-near": "r_near", r_far = "r-far": "r_far",
    alpha_reg = "alpha-reg": "alpha_reg", format = "format": "format",
});

flags!(ShapeFlags {
    shape = "shape": "shape", d = "d": "d", eps = "eps": "eps", facets = "facets": "facets", n_az = "n-az": "n_az",
    n_rad = "n-rad": "n_rad", radius = "radius": "radius", depth = "depth": "depth", width = "width": "width",
    center = "center": "center", h = "h": "h", waist = "waist": "waist",
});

flags!(CurvatureFlags { z = "z": "z", flip_normal = "flip-normal": "flip_normal", expect = "expect": "expect" });
flags!(AreaFlags { omega_radius = "omega-radius": "omega_radius", oracle = "oracle": "oracle" });
flags!(ConeScanFlags { d = "d": "d", points = "points": "points" });
flags!(BarrierFlags {
    dim = "dim": "dim", eps = "eps": "eps", bound_factor = "bound-factor": "bound_factor", mesh_h = "mesh-h": "mesh_h",
    mesh_eta = "mesh-eta": "mesh_eta",
});
flags!(ProbeFlags {
    probe = "probe": "probe", axis = "axis": "axis", direction = "direction": "direction", ball_radius = "ball-radius": "ball_radius",
    ball_height = "ball-height": "ball_height", expect = "expect": "expect",
});
flags!(FlowFlags {
    s = "s": "s", seed = "seed": "seed", d = "d": "d", init = "init": "init", dt_safety = "dt-safety": "dt_safety",
    h_target = "h-target": "h_target", max_steps = "max-steps": "max_steps", stop_tol = "stop-tol": "stop_tol", merge = "merge": "merge",
    energy_lines = "energy-lines": "energy_lines", audit_points = "audit-points": "audit_points",
    audit_samples = "audit-samples": "audit_samples", expect = "expect": "expect", format = "format": "format",
});
flags!(LimitFlags { shape = "shape": "shape", facets = "facets": "facets", s_list = "s-list": "s_list", omega_radius = "omega-radius": "omega_radius" });

#[derive(Subcommand, Debug)]
enum Command {
    /// H_{M,s} at one point by Monte Carlo.
    Curvature {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        shape: ShapeFlags,
        #[command(flatten)]
        extra: CurvatureFlags,
    },
    /// Per_s(M; Ω) for Ω a ball about the origin, optionally against the classical oracle.
    Area {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        shape: ShapeFlags,
        #[command(flatten)]
        extra: AreaFlags,
    },
    /// Sign of H at regular points of planar cones C_d.
    ConeScan {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        extra: ConeScanFlags,
    },
    /// Apex curvature of the barriers against c(N,s)·φ(ε)^s.
    BarrierScan {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        extra: BarrierFlags,
    },
    /// Slide a hyperplane or ball to first contact and evaluate H there.
    Probe {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        shape: ShapeFlags,
        #[command(flatten)]
        extra: ProbeFlags,
    },
    /// Curvature flow between the two rings, with an audit of the final state.
    Flow {
        #[command(flatten)]
        extra: FlowFlags,
    },
    /// (1−s)·Per_s as s → 1.
    LimitScan {
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        extra: LimitFlags,
    },
    /// Run the command named by `command=` in the --config file.
    Run,
}

impl Command {
    fn name_and_flags(&self) -> (Option<&'static str>, Vec<(&'static str, String)>) {
        match self {
            Command::Curvature { sampling, shape, extra } => (Some("curvature"), [sampling.pairs(), shape.pairs(), extra.pairs()].concat()),
            Command::Area { sampling, shape, extra } => (Some("area"), [sampling.pairs(), shape.pairs(), extra.pairs()].concat()),
            Command::ConeScan { sampling, extra } => (Some("cone-scan"), [sampling.pairs(), extra.pairs()].concat()),
            Command::BarrierScan { sampling, extra } => (Some("barrier-scan"), [sampling.pairs(), extra.pairs()].concat()),
            Command::Probe { sampling, shape, extra } => (Some("probe"), [sampling.pairs(), shape.pairs(), extra.pairs()].concat()),
            Command::Flow { extra } => (Some("flow"), extra.pairs()),
            Command::LimitScan { sampling, extra } => (Some("limit-scan"), [sampling.pairs(), extra.pairs()].concat()),
            Command::Run => (None, Vec::new()),
        }
    }
}

/// `command=` from a settings file.
fn command_in_file(text: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.split('#').next()?.split_once('='))
        .find(|(k, _)| k.trim() == "command")
        .map(|(_, v)| v.trim().to_string())
}

fn settings(cli: &Cli) -> Result<Settings, ConfigError> {
    let (name, flags) = cli.command.name_and_flags();
    let file_text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ConfigError::Other(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let name = match name {
        Some(n) => n.to_string(),
        None => file_text
            .as_deref()
            .and_then(command_in_file)
            .ok_or_else(|| ConfigError::Other("`run` needs --config with a `command=` line".into()))?,
    };
    let mut st = Settings::for_command(&name)?;
    if let Some(t) = &file_text {
        st.apply_text(t)?;
    }
    if let Some(p) = &cli.override_json {
        st.load_json(p)?;
    }
    st.apply_flags(flags)?;
    if let Some(o) = &cli.out {
        st.apply_flags(vec![("out", o.clone())])?;
    }
    Ok(st)
}

fn threads(cli: &Cli) -> Result<Option<usize>, ConfigError> {
    let n = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("FRACMC_THREADS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().map_err(|_| ConfigError::Other(format!("FRACMC_THREADS: expected a positive integer, got `{v}`")))?)
            }
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(ConfigError::Other("thread count must be positive".into()));
    }
    Ok(n)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), ConfigError> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ConfigError::Other(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> Result<(), ConfigError> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prepared = threads(&cli).and_then(|n| n.map_or(Ok(()), set_threads)).and_then(|_| settings(&cli));
    let st = match prepared {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match commands::run(&st) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
