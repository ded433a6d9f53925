use std::path::Path;

use flatcap::kinetics::BrusselatorParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    Eigenmode,
    Noise,
    Zero,
}

/// One layer of settings. Layers stack as built-in defaults < preset < config
/// file < flags; the merged result is what a manifest records, and feeding a
/// manifest back through `--config` reproduces the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<BrusselatorParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<(u32, u32)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cadence: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic: Option<IcKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track: Option<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_gammas: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// Fields set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self, top, preset, params, radius, gamma0, gamma_end, epsilon, modes, samples, grid, dt, cadence, seed, x0,
            terms, resolutions, ic, affine, duration, track, snapshot_gammas
        )
    }

    /// Reads a settings file, or the `config` block of a manifest.
    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not JSON: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// The fully resolved settings for one command. Fields a command does not use
/// stay `None` so the manifest only lists what mattered.
pub struct Resolved(pub Settings);

macro_rules! getter {
    ($name:ident, $t:ty) => {
        pub fn $name(&self) -> $t {
            self.0.$name.clone().unwrap_or_else(|| panic!("{} has no default for this command", stringify!($name)))
        }
    };
}

impl Resolved {
    getter!(params, BrusselatorParams);
    getter!(radius, f64);
    getter!(gamma0, f64);
    getter!(gamma_end, f64);
    getter!(epsilon, Vec<f64>);
    getter!(samples, usize);
    getter!(grid, (usize, usize));
    getter!(dt, f64);
    getter!(cadence, usize);
    getter!(seed, u64);
    getter!(x0, f64);
    getter!(terms, usize);
    getter!(resolutions, Vec<usize>);
    getter!(ic, IcKind);
    getter!(affine, bool);
    getter!(duration, f64);

    /// The single ε of commands that follow one schedule.
    pub fn single_epsilon(&self) -> Result<f64, CliError> {
        match self.epsilon().as_slice() {
            [e] => Ok(*e),
            other => Err(CliError::Usage(format!("this command takes one epsilon, got {}", other.len()))),
        }
    }
}

fn base() -> Settings {
    Settings { params: Some(BrusselatorParams::default()), radius: Some(1.0), ..Settings::default() }
}

/// Built-in defaults of each command.
pub fn command_defaults(command: &str) -> Settings {
    let b = base();
    match command {
        "curves" => Settings { gamma0: Some(0.8), gamma_end: Some(0.3), samples: Some(201), ..b },
        "eigen" => Settings { gamma0: Some(0.5), modes: Some(vec![(5, 1)]), ..b },
        "qp" => Settings { gamma0: Some(0.4915), epsilon: Some(vec![1e-6]), terms: Some(5), ..b },
        "nfcoef" => Settings {
            gamma0: Some(0.51),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![1e-6]),
            samples: Some(flatcap::reduction::DEFAULT_SAMPLES),
            terms: Some(5),
            ..b
        },
        "nf" => Settings {
            gamma0: Some(0.51),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![3e-8, 1e-7, 3e-7, 1e-6]),
            x0: Some(0.002305),
            samples: Some(flatcap::reduction::DEFAULT_SAMPLES),
            terms: Some(5),
            ..b
        },
        "sim" => Settings {
            gamma0: Some(0.4915),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![1e-6]),
            grid: Some((64, 40)),
            dt: Some(0.1),
            cadence: Some(50),
            seed: Some(1),
            samples: Some(400),
            terms: Some(5),
            ic: Some(IcKind::Eigenmode),
            affine: Some(false),
            duration: Some(0.0),
            snapshot_gammas: Some(Vec::new()),
            ..b
        },
        "project" => Settings {
            gamma0: Some(0.4915),
            grid: Some((64, 40)),
            seed: Some(1),
            ic: Some(IcKind::Eigenmode),
            track: Some((8, 3)),
            ..b
        },
        "converge" => Settings {
            gamma0: Some(0.4915),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![1e-5]),
            grid: Some((64, 40)),
            dt: Some(0.1),
            cadence: Some(50),
            samples: Some(24),
            resolutions: Some(vec![24, 32, 48, 64]),
            ..b
        },
        _ => b,
    }
}

/// Settings a preset implies on top of the command defaults.
pub fn preset_settings(preset: Preset) -> Settings {
    match preset {
        Preset::Fig4 => Settings {
            gamma0: Some(0.51),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![3e-8, 1e-7, 3e-7, 1e-6]),
            x0: Some(0.002305),
            ..Settings::default()
        },
        Preset::Fig5 => Settings {
            gamma0: Some(0.4915),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![1e-6]),
            ic: Some(IcKind::Eigenmode),
            affine: Some(false),
            snapshot_gammas: Some(vec![0.4915, 0.4715, 0.4515]),
            ..Settings::default()
        },
        Preset::Fig6 => Settings {
            gamma0: Some(0.5015),
            gamma_end: Some(0.4915),
            epsilon: Some(vec![1e-6]),
            grid: Some((256, 8)),
            ic: Some(IcKind::Zero),
            affine: Some(true),
            ..Settings::default()
        },
        Preset::Fig7 => Settings {
            gamma0: Some(0.4915),
            gamma_end: Some(0.4315),
            epsilon: Some(vec![1e-6]),
            ic: Some(IcKind::Noise),
            affine: Some(false),
            track: Some((8, 3)),
            snapshot_gammas: Some(vec![0.4915, 0.4615, 0.4315]),
            ..Settings::default()
        },
        Preset::Fig8 => Settings {
            gamma0: Some(0.4915),
            gamma_end: Some(0.4515),
            epsilon: Some(vec![1e-6]),
            resolutions: Some(vec![24, 32, 48, 64]),
            ..Settings::default()
        },
    }
}

/// Merges defaults, preset, config file and flags, then drops fields the
/// command has no default for (`modes` and `track` are optional everywhere).
pub fn resolve(command: &str, file: Settings, flags: Settings) -> Resolved {
    let defaults = command_defaults(command);
    let preset = flags.preset.or(file.preset);
    let mut merged = defaults.clone();
    if let Some(p) = preset {
        merged = merged.overlay(preset_settings(p));
    }
    merged = merged.overlay(file).overlay(flags);
    merged.preset = preset;
    macro_rules! trim {
        ($($f:ident),*) => { $( if defaults.$f.is_none() { merged.$f = None; } )* };
    }
    trim!(
        params, radius, gamma0, gamma_end, epsilon, samples, grid, dt, cadence, seed, x0, terms, resolutions, ic,
        affine, duration, snapshot_gammas
    );
    Resolved(merged)
}
