//! Flat `key = value` experiment configuration.
//!
//! Every model coefficient is a literal key (`k1`, `k2`, `k3`, `a`, `b`,
//! `c1`, `c2`, `a3`, `b3`, `c3`, `epsilon`, `T`), so a config file reads like
//! the system itself. `#` starts a comment, blank lines are ignored, unknown
//! keys are rejected, and every key may appear at most once.

use fastslow::model::ModelParams;
use fastslow::profiles::ProfileSpec;
use fastslow::solver::Boundary;
use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, msg: String },
    MissingKey(String),
    UnknownKey { key: String, line: usize },
    BadValue { key: String, line: usize, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            ConfigError::MissingKey(key) => write!(f, "missing key `{key}`"),
            ConfigError::UnknownKey { key, line } => {
                write!(f, "line {line}: unknown key `{key}`")
            }
            ConfigError::BadValue { key, line, msg } => {
                write!(f, "line {line}: bad value for `{key}`: {msg}")
            }
        }
    }
}

impl Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Expand,
    Compare,
    Sweep,
    Oracle,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Expand => "expand",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
            Mode::Oracle => "oracle",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        match s {
            "solve" => Some(Mode::Solve),
            "expand" => Some(Mode::Expand),
            "compare" => Some(Mode::Compare),
            "sweep" => Some(Mode::Sweep),
            "oracle" => Some(Mode::Oracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSpec {
    pub u: ProfileSpec,
    pub v: ProfileSpec,
    pub w: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSolver {
    pub cfl: f64,
    pub boundary: Boundary,
    pub output_times: Vec<f64>,
}

/// A fully parsed experiment. Mode-specific parts are `Option`al: profile
/// initial data for every mode except `oracle`, which instead carries three
/// uniform initial values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub ic: Option<IcSpec>,
    pub oracle_ic: Option<[f64; 3]>,
    pub solver: RunSolver,
    pub sweep_epsilons: Option<Vec<f64>>,
    /// Decay-fit window in the stretched time `tau = t / eps^2`
    /// (compare and sweep modes).
    pub tau_window: (f64, f64),
    pub output_dir: String,
}

/// The parsed spec plus the source line of every key, for error messages
/// that point back into the file.
#[derive(Debug, Clone)]
pub struct ConfigDoc {
    pub spec: ExperimentSpec,
    pub key_lines: BTreeMap<String, usize>,
}

impl ConfigDoc {
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.key_lines.get(key).copied()
    }
}

struct KeyTable {
    // key -> (value, line); entries are removed as they are consumed
    entries: BTreeMap<String, (String, usize)>,
    lines: BTreeMap<String, usize>,
}

impl KeyTable {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            lines.insert(key.clone(), line_no);
            entries.insert(key, (value, line_no));
        }
        Ok(KeyTable { entries, lines })
    }

    fn take(&mut self, key: &str) -> Result<(String, usize), ConfigError> {
        self.entries
            .remove(key)
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn take_opt(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        let (value, line) = self.take(key)?;
        parse_f64(key, &value, line)
    }

    fn take_f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take_opt(key) {
            Some((value, line)) => parse_f64(key, &value, line),
            None => Ok(default),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        let (value, line) = self.take(key)?;
        value.parse::<usize>().map_err(|e| ConfigError::BadValue {
            key: key.to_string(),
            line,
            msg: e.to_string(),
        })
    }

    fn reject_leftovers(&self) -> Result<(), ConfigError> {
        if let Some((key, (_, line))) = self
            .entries
            .iter()
            .min_by_key(|(_, (_, line))| *line)
        {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                line: *line,
            });
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        line,
        msg: e.to_string(),
    })
}

fn parse_f64_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    let items: Result<Vec<f64>, _> = value
        .split(',')
        .map(|s| parse_f64(key, s.trim(), line))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            line,
            msg: "empty list".into(),
        });
    }
    Ok(items)
}

fn take_profile(table: &mut KeyTable, prefix: &str) -> Result<ProfileSpec, ConfigError> {
    let kind_key = format!("{prefix}_kind");
    let (kind, line) = table.take(&kind_key)?;
    let smooth = |table: &mut KeyTable| -> Result<(f64, f64, f64), ConfigError> {
        Ok((
            table.take_f64(&format!("{prefix}_amplitude"))?,
            table.take_f64(&format!("{prefix}_center"))?,
            table.take_f64(&format!("{prefix}_width"))?,
        ))
    };
    match kind.as_str() {
        "gaussian" => {
            let (amplitude, center, width) = smooth(table)?;
            Ok(ProfileSpec::Gaussian {
                amplitude,
                center,
                width,
            })
        }
        "compact_bump" => {
            let (amplitude, center, width) = smooth(table)?;
            Ok(ProfileSpec::CompactBump {
                amplitude,
                center,
                width,
            })
        }
        "step" => Ok(ProfileSpec::Step {
            jump_location: table.take_f64(&format!("{prefix}_jump_location"))?,
            left: table.take_f64(&format!("{prefix}_left"))?,
            right: table.take_f64(&format!("{prefix}_right"))?,
        }),
        "spike" => {
            let base_key = format!("{prefix}_base_kind");
            let (base_kind, base_line) = table.take(&base_key)?;
            let (amplitude, center, width) = smooth(table)?;
            let base = match base_kind.as_str() {
                "gaussian" => ProfileSpec::Gaussian {
                    amplitude,
                    center,
                    width,
                },
                "compact_bump" => ProfileSpec::CompactBump {
                    amplitude,
                    center,
                    width,
                },
                other => {
                    return Err(ConfigError::BadValue {
                        key: base_key,
                        line: base_line,
                        msg: format!("expected gaussian or compact_bump, got `{other}`"),
                    })
                }
            };
            Ok(ProfileSpec::Spike {
                base: Box::new(base),
            })
        }
        other => Err(ConfigError::BadValue {
            key: kind_key,
            line,
            msg: format!("expected gaussian|compact_bump|step|spike, got `{other}`"),
        }),
    }
}

/// Parse and keep the key-to-line map for downstream error reporting.
pub fn parse_document(text: &str) -> Result<ConfigDoc, ConfigError> {
    let mut table = KeyTable::parse(text)?;

    let (mode_str, mode_line) = table.take("mode")?;
    let mode = Mode::parse(&mode_str).ok_or_else(|| ConfigError::BadValue {
        key: "mode".into(),
        line: mode_line,
        msg: format!("expected solve|expand|compare|sweep|oracle, got `{mode_str}`"),
    })?;

    let params = ModelParams {
        k1: table.take_f64("k1")?,
        k2: table.take_f64("k2")?,
        k3: table.take_f64("k3")?,
        a: table.take_f64("a")?,
        b: table.take_f64("b")?,
        c1: table.take_f64("c1")?,
        c2: table.take_f64("c2")?,
        a3: table.take_f64("a3")?,
        b3: table.take_f64("b3")?,
        c3: table.take_f64("c3")?,
        epsilon: table.take_f64("epsilon")?,
        t_end: table.take_f64("T")?,
    };

    let grid = GridSpec {
        x_min: table.take_f64("x_min")?,
        x_max: table.take_f64("x_max")?,
        n_cells: table.take_usize("n_cells")?,
    };

    let cfl = table.take_f64_or("cfl", 0.9)?;
    let boundary = match table.take_opt("boundary") {
        None => Boundary::Outflow,
        Some((value, line)) => match value.as_str() {
            "outflow" => Boundary::Outflow,
            "periodic" => Boundary::Periodic,
            other => {
                return Err(ConfigError::BadValue {
                    key: "boundary".into(),
                    line,
                    msg: format!("expected outflow or periodic, got `{other}`"),
                })
            }
        },
    };
    let output_times = match table.take_opt("output_times") {
        None => vec![params.t_end],
        Some((value, line)) => {
            let times = parse_f64_list("output_times", &value, line)?;
            if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(ConfigError::BadValue {
                    key: "output_times".into(),
                    line,
                    msg: "times must be finite and nonnegative".into(),
                });
            }
            if times.windows(2).any(|p| p[1] <= p[0]) {
                return Err(ConfigError::BadValue {
                    key: "output_times".into(),
                    line,
                    msg: "times must be strictly increasing".into(),
                });
            }
            times
        }
    };

    let (ic, oracle_ic) = if mode == Mode::Oracle {
        let ic = [
            table.take_f64("oracle_u0")?,
            table.take_f64("oracle_v0")?,
            table.take_f64("oracle_w0")?,
        ];
        (None, Some(ic))
    } else {
        let ic = IcSpec {
            u: take_profile(&mut table, "u")?,
            v: take_profile(&mut table, "v")?,
            w: take_profile(&mut table, "w")?,
        };
        (Some(ic), None)
    };

    let sweep_epsilons = if mode == Mode::Sweep {
        let (value, line) = table.take("sweep_epsilons")?;
        let eps = parse_f64_list("sweep_epsilons", &value, line)?;
        if eps.iter().any(|e| *e <= 0.0 || *e >= 1.0) {
            return Err(ConfigError::BadValue {
                key: "sweep_epsilons".into(),
                line,
                msg: "every epsilon must lie in (0, 1)".into(),
            });
        }
        if eps.windows(2).any(|p| p[1] >= p[0]) {
            return Err(ConfigError::BadValue {
                key: "sweep_epsilons".into(),
                line,
                msg: "epsilons must be strictly decreasing".into(),
            });
        }
        Some(eps)
    } else {
        None
    };

    let tau_window = if matches!(mode, Mode::Compare | Mode::Sweep) {
        let lo = table.take_f64_or("tau_fit_min", 0.5)?;
        let hi = table.take_f64_or("tau_fit_max", 4.0)?;
        if !(lo > 0.0 && hi > lo) {
            return Err(ConfigError::BadValue {
                key: "tau_fit_max".into(),
                line: 0,
                msg: format!("need 0 < tau_fit_min < tau_fit_max (got {lo}, {hi})"),
            });
        }
        (lo, hi)
    } else {
        (0.5, 4.0)
    };

    let output_dir = match table.take_opt("output_dir") {
        Some((value, _)) => value,
        None => "out".to_string(),
    };

    table.reject_leftovers()?;

    Ok(ConfigDoc {
        spec: ExperimentSpec {
            mode,
            params,
            grid,
            ic,
            oracle_ic,
            solver: RunSolver {
                cfl,
                boundary,
                output_times,
            },
            sweep_epsilons,
            tau_window,
            output_dir,
        },
        key_lines: table.lines,
    })
}

/// Parse a config file into an experiment spec.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    parse_document(text).map(|doc| doc.spec)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit_profile(out: &mut String, prefix: &str, spec: &ProfileSpec) {
    match spec {
        ProfileSpec::Gaussian {
            amplitude,
            center,
            width,
        } => {
            out.push_str(&format!("{prefix}_kind = gaussian\n"));
            out.push_str(&format!("{prefix}_amplitude = {}\n", fmt_f64(*amplitude)));
            out.push_str(&format!("{prefix}_center = {}\n", fmt_f64(*center)));
            out.push_str(&format!("{prefix}_width = {}\n", fmt_f64(*width)));
        }
        ProfileSpec::CompactBump {
            amplitude,
            center,
            width,
        } => {
            out.push_str(&format!("{prefix}_kind = compact_bump\n"));
            out.push_str(&format!("{prefix}_amplitude = {}\n", fmt_f64(*amplitude)));
            out.push_str(&format!("{prefix}_center = {}\n", fmt_f64(*center)));
            out.push_str(&format!("{prefix}_width = {}\n", fmt_f64(*width)));
        }
        ProfileSpec::Step {
            jump_location,
            left,
            right,
        } => {
            out.push_str(&format!("{prefix}_kind = step\n"));
            out.push_str(&format!(
                "{prefix}_jump_location = {}\n",
                fmt_f64(*jump_location)
            ));
            out.push_str(&format!("{prefix}_left = {}\n", fmt_f64(*left)));
            out.push_str(&format!("{prefix}_right = {}\n", fmt_f64(*right)));
        }
        ProfileSpec::Spike { base } => {
            out.push_str(&format!("{prefix}_kind = spike\n"));
            let (kind, amplitude, center, width) = match base.as_ref() {
                ProfileSpec::Gaussian {
                    amplitude,
                    center,
                    width,
                } => ("gaussian", amplitude, center, width),
                ProfileSpec::CompactBump {
                    amplitude,
                    center,
                    width,
                } => ("compact_bump", amplitude, center, width),
                _ => unreachable!("spike bases are validated to be smooth"),
            };
            out.push_str(&format!("{prefix}_base_kind = {kind}\n"));
            out.push_str(&format!("{prefix}_amplitude = {}\n", fmt_f64(*amplitude)));
            out.push_str(&format!("{prefix}_center = {}\n", fmt_f64(*center)));
            out.push_str(&format!("{prefix}_width = {}\n", fmt_f64(*width)));
        }
    }
}

/// Canonical `key = value` rendering of a spec; `parse_config` of the output
/// reproduces the spec exactly (floats are printed with 17 significant
/// digits, which round-trips `f64`).
pub fn emit_config(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("mode = {}\n", spec.mode.as_str()));
    let p = &spec.params;
    for (key, value) in [
        ("k1", p.k1),
        ("k2", p.k2),
        ("k3", p.k3),
        ("a", p.a),
        ("b", p.b),
        ("c1", p.c1),
        ("c2", p.c2),
        ("a3", p.a3),
        ("b3", p.b3),
        ("c3", p.c3),
        ("epsilon", p.epsilon),
        ("T", p.t_end),
    ] {
        out.push_str(&format!("{key} = {}\n", fmt_f64(value)));
    }
    out.push_str(&format!("x_min = {}\n", fmt_f64(spec.grid.x_min)));
    out.push_str(&format!("x_max = {}\n", fmt_f64(spec.grid.x_max)));
    out.push_str(&format!("n_cells = {}\n", spec.grid.n_cells));
    out.push_str(&format!("cfl = {}\n", fmt_f64(spec.solver.cfl)));
    out.push_str(&format!(
        "boundary = {}\n",
        match spec.solver.boundary {
            Boundary::Outflow => "outflow",
            Boundary::Periodic => "periodic",
        }
    ));
    let times: Vec<String> = spec.solver.output_times.iter().map(|t| fmt_f64(*t)).collect();
    out.push_str(&format!("output_times = {}\n", times.join(",")));

    if let Some(ic) = &spec.ic {
        emit_profile(&mut out, "u", &ic.u);
        emit_profile(&mut out, "v", &ic.v);
        emit_profile(&mut out, "w", &ic.w);
    }
    if let Some(o) = &spec.oracle_ic {
        out.push_str(&format!("oracle_u0 = {}\n", fmt_f64(o[0])));
        out.push_str(&format!("oracle_v0 = {}\n", fmt_f64(o[1])));
        out.push_str(&format!("oracle_w0 = {}\n", fmt_f64(o[2])));
    }
    if let Some(eps) = &spec.sweep_epsilons {
        let items: Vec<String> = eps.iter().map(|e| fmt_f64(*e)).collect();
        out.push_str(&format!("sweep_epsilons = {}\n", items.join(",")));
    }
    if matches!(spec.mode, Mode::Compare | Mode::Sweep) {
        out.push_str(&format!("tau_fit_min = {}\n", fmt_f64(spec.tau_window.0)));
        out.push_str(&format!("tau_fit_max = {}\n", fmt_f64(spec.tau_window.1)));
    }
    out.push_str(&format!("output_dir = {}\n", spec.output_dir));
    out
}
