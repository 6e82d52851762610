//! Flat `key = value` run configuration with `[section]` headers.
//!
//! ```text
//! command = numrange
//! preset = compliant
//!
//! [numrange]
//! n = 1000
//! times = 0, 5
//! ```
//!
//! Keys outside any section belong to the top level. Presets fill in
//! every key they define; keys written in the file override them.

use std::collections::BTreeMap;
use std::fmt;

use terrace::evolve::{DiffusionScheme, Mode, Preset};
use terrace::fronts::Endpoints;
use terrace::model::ModelParams;
use terrace::scenario::{reference, ProbeBump};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Equilibria,
    Front,
    SpeedRegion,
    WeightCheck,
    Numrange,
    Simulate,
    Figure,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Equilibria,
        Command::Front,
        Command::SpeedRegion,
        Command::WeightCheck,
        Command::Numrange,
        Command::Simulate,
        Command::Figure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Front => "front",
            Command::SpeedRegion => "speed-region",
            Command::WeightCheck => "weight-check",
            Command::Numrange => "numrange",
            Command::Simulate => "simulate",
            Command::Figure => "figure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// One problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Text,
    Reals,
}

const KEYS: &[(&str, Kind)] = &[
    ("command", Kind::Text),
    ("preset", Kind::Text),
    ("seed", Kind::Count),
    ("model.d", Kind::Real),
    ("model.r", Kind::Real),
    ("model.alpha1", Kind::Real),
    ("model.alpha2", Kind::Real),
    ("speeds.c1", Kind::Real),
    ("speeds.c2", Kind::Real),
    ("speeds.kappa1", Kind::Real),
    ("speeds.kappa2", Kind::Real),
    ("weight.psi1", Kind::Real),
    ("weight.psi2", Kind::Real),
    ("front.c", Kind::Real),
    ("front.endpoints", Kind::Text),
    ("front.length", Kind::Real),
    ("front.n", Kind::Count),
    ("region.c1_min", Kind::Real),
    ("region.c1_max", Kind::Real),
    ("region.c1_steps", Kind::Count),
    ("region.c2_min", Kind::Real),
    ("region.c2_max", Kind::Real),
    ("region.c2_steps", Kind::Count),
    ("check.t0", Kind::Real),
    ("check.t1", Kind::Real),
    ("check.dt", Kind::Real),
    ("check.x0", Kind::Real),
    ("check.x1", Kind::Real),
    ("check.dx", Kind::Real),
    ("check.map_points", Kind::Count),
    ("check.alpha_lo", Kind::Real),
    ("check.alpha_hi", Kind::Real),
    ("check.alpha_resolution", Kind::Real),
    ("check.alpha_dx", Kind::Real),
    ("numrange.x_lo", Kind::Real),
    ("numrange.x_hi", Kind::Real),
    ("numrange.n", Kind::Count),
    ("numrange.times", Kind::Reals),
    ("numrange.angles", Kind::Count),
    ("numrange.eta_resolution", Kind::Real),
    ("numrange.resolvent_samples", Kind::Count),
    ("numrange.random_samples", Kind::Count),
    ("simulate.mode", Kind::Text),
    ("simulate.bump", Kind::Text),
    ("simulate.x_lo", Kind::Real),
    ("simulate.x_hi", Kind::Real),
    ("simulate.n", Kind::Count),
    ("simulate.t_end", Kind::Real),
    ("simulate.dt", Kind::Real),
    ("simulate.snapshot_every", Kind::Count),
    ("simulate.scheme", Kind::Text),
    ("simulate.fit_t0", Kind::Real),
    ("simulate.fit_t1", Kind::Real),
    ("simulate.max_columns", Kind::Count),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

/// Named parameter sets usable with `--preset` or `preset = ...`.
pub const PRESETS: [&str; 5] = ["fig1", "fig2-left", "fig2-right", "compliant", "violating"];

fn preset_entries(name: &str) -> Option<Vec<(&'static str, String)>> {
    let model = |d: f64, r: f64, a1: f64, a2: f64| {
        vec![
            ("model.d", d.to_string()),
            ("model.r", r.to_string()),
            ("model.alpha1", a1.to_string()),
            ("model.alpha2", a2.to_string()),
        ]
    };
    let (d, r, a1, a2) = reference::PARAMS;
    let scenario = |c2: f64, k1: f64, k2: Option<f64>| {
        let mut v = model(d, r, a1, a2);
        v.push(("speeds.c1", reference::C1.to_string()));
        v.push(("speeds.c2", c2.to_string()));
        v.push(("speeds.kappa1", k1.to_string()));
        if let Some(k2) = k2 {
            v.push(("speeds.kappa2", k2.to_string()));
        }
        v.push(("weight.psi1", reference::PSI1.to_string()));
        v.push(("weight.psi2", reference::PSI2.to_string()));
        v
    };
    let figure = |p: Preset| {
        let m = p.params::<f64>();
        let mut v = model(m.d, m.r, m.alpha1, m.alpha2);
        v.push(("simulate.mode", "nonlinear".into()));
        v.push(("simulate.t_end", p.t_end().to_string()));
        v
    };
    Some(match name {
        "compliant" => scenario(reference::C2, reference::KAPPA1, None),
        "violating" => scenario(
            reference::C2_VIOLATING,
            reference::KAPPA1_VIOLATING,
            Some(reference::KAPPA2_VIOLATING),
        ),
        other => figure(Preset::parse(other).ok()?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedsBlock {
    pub c1: f64,
    pub c2: f64,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrontKind {
    Kpp,
    System(Endpoints),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontBlock {
    pub c: f64,
    pub kind: FrontKind,
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBlock {
    pub c1: (f64, f64, usize),
    pub c2: (f64, f64, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckBlock {
    pub t: (f64, f64, f64),
    pub x: (f64, f64, f64),
    /// Upper bound on samples per axis of the weight maps.
    pub map_points: usize,
    /// `(lo, hi, resolution, dx)` of the coupling threshold search.
    pub alpha: Option<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumrangeBlock {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub times: Vec<f64>,
    pub angles: usize,
    pub eta_resolution: f64,
    pub resolvent_samples: usize,
    pub random_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateBlock {
    pub mode: Mode,
    pub bump: ProbeBump,
    /// Domain override `(lo, hi, n)`.
    pub domain: Option<(f64, f64, usize)>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub scheme: DiffusionScheme,
    pub fit: (f64, f64),
    pub max_columns: usize,
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub seed: u64,
    pub model: Option<ModelParams<f64>>,
    pub speeds: Option<SpeedsBlock>,
    pub psi: (f64, f64),
    pub front: Option<FrontBlock>,
    pub region: RegionBlock,
    pub check: CheckBlock,
    pub numrange: NumrangeBlock,
    pub simulate: SimulateBlock,
    pub figure: Option<Preset>,
    /// Every resolved key with its value, presets included.
    pub entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn params(&self) -> ModelParams<f64> {
        self.model.expect("validated")
    }

    pub fn speeds(&self) -> SpeedsBlock {
        self.speeds.expect("validated")
    }

    /// Normalized `section.key = value` listing.
    pub fn echo(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

struct Entry {
    value: String,
    line: Option<usize>,
}

struct Reader {
    map: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        let line = self.map.get(key).and_then(|e| e.line);
        self.errors.push(ConfigError {
            line,
            key: Some(key.to_string()),
            message: message.into(),
        });
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn real(&mut self, key: &str) -> Option<f64> {
        let v = self.text(key)?.to_string();
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.error(key, format!("`{v}` is not a finite number"));
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        let v = self.text(key)?.to_string();
        match v.parse::<usize>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.error(key, format!("`{v}` is not a non-negative integer"));
                None
            }
        }
    }

    fn reals(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.text(key)?.to_string();
        let parsed: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(xs) if !xs.is_empty() && xs.iter().all(|x| x.is_finite()) => Some(xs),
            _ => {
                self.error(
                    key,
                    format!("`{v}` is not a comma-separated list of numbers"),
                );
                None
            }
        }
    }

    fn require_real(&mut self, key: &str) -> Option<f64> {
        if !self.map.contains_key(key) {
            self.error(key, "missing required key");
            return None;
        }
        self.real(key)
    }

    fn real_or(&mut self, key: &str, default: f64) -> f64 {
        self.real(key).unwrap_or(default)
    }

    fn count_or(&mut self, key: &str, default: usize) -> usize {
        self.count(key).unwrap_or(default)
    }

    fn positive(&mut self, key: &str, v: f64) {
        if !(v > 0.0) {
            self.error(key, format!("must be positive, got {v}"));
        }
    }

    fn at_least(&mut self, key: &str, v: usize, min: usize) {
        if v < min {
            self.error(key, format!("must be at least {min}, got {v}"));
        }
    }

    fn ordered(&mut self, key: &str, lo: f64, hi: f64) {
        if !(lo < hi) {
            self.error(key, format!("range must be increasing, got [{lo}, {hi}]"));
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        key: None,
        message: message.into(),
    }
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, Entry> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => section = name.trim().to_string(),
                _ => errors.push(syntax(line, format!("malformed section header `{body}`"))),
            }
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            errors.push(syntax(
                line,
                format!("expected `key = value`, got `{body}`"),
            ));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            errors.push(syntax(line, "empty key or value"));
            continue;
        }
        let key = if section.is_empty() {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        if kind_of(&key).is_none() {
            errors.push(ConfigError {
                line: Some(line),
                key: Some(key),
                message: "unknown key".into(),
            });
            continue;
        }
        if map.contains_key(&key) {
            errors.push(ConfigError {
                line: Some(line),
                key: Some(key),
                message: "duplicate key".into(),
            });
            continue;
        }
        map.insert(
            key,
            Entry {
                value: v.to_string(),
                line: Some(line),
            },
        );
    }
    map
}

/// Parses and validates a configuration whose `command` key selects the
/// command.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    parse_config_with(text, None, None)
}

/// Like [`parse_config`]; `command` and `preset` given on the command line
/// take precedence over the file.
pub fn parse_config_with(
    text: &str,
    command: Option<Command>,
    preset: Option<&str>,
) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut map = tokenize(text, &mut errors);
    if let Some(c) = command {
        map.insert(
            "command".into(),
            Entry {
                value: c.name().into(),
                line: None,
            },
        );
    }
    if let Some(p) = preset {
        map.insert(
            "preset".into(),
            Entry {
                value: p.into(),
                line: None,
            },
        );
    }
    let mut rd = Reader { map, errors };

    let command = match rd.text("command").map(str::to_string) {
        None => {
            rd.error("command", "missing required key");
            None
        }
        Some(c) => {
            let parsed = Command::parse(&c);
            if parsed.is_none() {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                rd.error(
                    "command",
                    format!("unknown command `{c}` ({})", names.join(", ")),
                );
            }
            parsed
        }
    };

    let preset = rd.text("preset").map(str::to_string);
    if let Some(name) = &preset {
        match preset_entries(name) {
            Some(entries) => {
                for (k, v) in entries {
                    rd.map.entry(k.to_string()).or_insert(Entry {
                        value: v,
                        line: None,
                    });
                }
            }
            None => rd.error(
                "preset",
                format!("unknown preset `{name}` ({})", PRESETS.join(", ")),
            ),
        }
    }
    let Some(command) = command else {
        return Err(rd.errors);
    };
    let figure_preset = preset.as_deref().and_then(|p| Preset::parse(p).ok());

    let seed = rd.count("seed").unwrap_or(0) as u64;

    let needs_model = command != Command::Figure || figure_preset.is_none();
    let model = if needs_model || rd.map.contains_key("model.d") {
        let d = rd.require_real("model.d");
        let r = rd.require_real("model.r");
        let a1 = rd.require_real("model.alpha1");
        let a2 = rd.require_real("model.alpha2");
        match (d, r, a1, a2) {
            (Some(d), Some(r), Some(a1), Some(a2)) => match ModelParams::new(d, r, a1, a2) {
                Ok(p) => Some(p),
                Err(e) => {
                    rd.error("model", e.to_string());
                    None
                }
            },
            _ => None,
        }
    } else {
        None
    };

    let mode = match rd.text("simulate.mode").map(str::to_string) {
        None => Mode::WeightedLinear,
        Some(m) => Mode::parse(&m).unwrap_or_else(|e| {
            rd.error("simulate.mode", e.to_string());
            Mode::WeightedLinear
        }),
    };

    let needs_speeds = matches!(command, Command::WeightCheck | Command::Numrange)
        || (command == Command::Simulate && mode != Mode::Nonlinear);
    let speeds = if needs_speeds {
        let c1 = rd.require_real("speeds.c1");
        let c2 = rd.require_real("speeds.c2");
        let kappa1 = rd.real("speeds.kappa1");
        let kappa2 = rd.real("speeds.kappa2");
        if kappa2.is_some() && kappa1.is_none() {
            rd.error(
                "speeds.kappa2",
                "kappa2 can only be forced together with kappa1",
            );
        }
        match (c1, c2) {
            (Some(c1), Some(c2)) => {
                if !(c1 < c2) {
                    rd.error(
                        "speeds.c1",
                        format!("assumption c1 < c2 violated (c1 = {c1}, c2 = {c2})"),
                    );
                }
                for (k, v) in [("speeds.c1", c1), ("speeds.c2", c2)] {
                    rd.positive(k, v);
                }
                Some(SpeedsBlock {
                    c1,
                    c2,
                    kappa1,
                    kappa2,
                })
            }
            _ => None,
        }
    } else {
        None
    };

    let psi = (
        rd.real_or("weight.psi1", reference::PSI1),
        rd.real_or("weight.psi2", reference::PSI2),
    );
    if needs_speeds {
        if !(psi.0 < 0.0 && 0.0 < psi.1) {
            rd.error(
                "weight.psi1",
                format!("need psi1 < 0 < psi2, got ({}, {})", psi.0, psi.1),
            );
        } else if psi.1 - psi.0 < 20.0 {
            rd.error(
                "weight.psi2",
                format!(
                    "shift separation psi2 - psi1 = {} is below 20",
                    psi.1 - psi.0
                ),
            );
        }
    }

    let front = if command == Command::Front {
        let c = rd.require_real("front.c");
        let kind = match rd.text("front.endpoints").map(str::to_string) {
            None => Some(FrontKind::Kpp),
            Some(s) if s == "kpp" => Some(FrontKind::Kpp),
            Some(s) => match Endpoints::parse(&s) {
                Ok(e) => Some(FrontKind::System(e)),
                Err(e) => {
                    rd.error("front.endpoints", format!("{e} (kpp, e1-e3, e1-e4, e3-e4)"));
                    None
                }
            },
        };
        let length = rd.real_or("front.length", 100.0);
        let n = rd.count_or("front.n", 4001);
        rd.positive("front.length", length);
        rd.at_least("front.n", n, 5);
        if let Some(c) = c {
            rd.positive("front.c", c);
        }
        c.zip(kind)
            .map(|(c, kind)| FrontBlock { c, kind, length, n })
    } else {
        None
    };

    let region = RegionBlock {
        c1: (
            rd.real_or("region.c1_min", 0.5),
            rd.real_or("region.c1_max", 6.0),
            rd.count_or("region.c1_steps", 56),
        ),
        c2: (
            rd.real_or("region.c2_min", 4.0),
            rd.real_or("region.c2_max", 16.0),
            rd.count_or("region.c2_steps", 61),
        ),
    };
    if command == Command::SpeedRegion {
        for (k, (lo, hi, n)) in [("region.c1", region.c1), ("region.c2", region.c2)] {
            rd.ordered(&format!("{k}_min"), lo, hi);
            rd.positive(&format!("{k}_min"), lo);
            rd.at_least(&format!("{k}_steps"), n, 2);
        }
    }

    let alpha = if rd.map.contains_key("check.alpha_hi") {
        let lo = rd.real_or("check.alpha_lo", 0.01);
        let hi = rd.real_or("check.alpha_hi", 0.0);
        let res = rd.real_or("check.alpha_resolution", 0.005);
        let dx = rd.real_or("check.alpha_dx", 0.25);
        rd.ordered("check.alpha_lo", lo, hi);
        rd.positive("check.alpha_lo", lo);
        rd.positive("check.alpha_resolution", res);
        rd.positive("check.alpha_dx", dx);
        Some((lo, hi, res, dx))
    } else {
        None
    };
    let check = CheckBlock {
        t: (
            rd.real_or("check.t0", 0.0),
            rd.real_or("check.t1", 20.0),
            rd.real_or("check.dt", 0.05),
        ),
        x: (
            rd.real_or("check.x0", -60.0),
            rd.real_or("check.x1", 320.0),
            rd.real_or("check.dx", 0.05),
        ),
        map_points: rd.count_or("check.map_points", 400),
        alpha,
    };
    if command == Command::WeightCheck {
        rd.ordered("check.t0", check.t.0, check.t.1);
        rd.ordered("check.x0", check.x.0, check.x.1);
        rd.positive("check.dt", check.t.2);
        rd.positive("check.dx", check.x.2);
        rd.at_least("check.map_points", check.map_points, 2);
    }

    let numrange = NumrangeBlock {
        x_lo: rd.real_or("numrange.x_lo", -100.0),
        x_hi: rd.real_or("numrange.x_hi", 400.0),
        n: rd.count_or("numrange.n", 2000),
        times: rd
            .reals("numrange.times")
            .unwrap_or_else(|| vec![0.0, 5.0, 10.0]),
        angles: rd.count_or("numrange.angles", 64),
        eta_resolution: rd.real_or("numrange.eta_resolution", 1e-4),
        resolvent_samples: rd.count_or("numrange.resolvent_samples", 20),
        random_samples: rd.count_or("numrange.random_samples", 0),
    };
    if command == Command::Numrange {
        rd.ordered("numrange.x_lo", numrange.x_lo, numrange.x_hi);
        rd.at_least("numrange.n", numrange.n, 3);
        rd.at_least("numrange.angles", numrange.angles, 8);
        rd.positive("numrange.eta_resolution", numrange.eta_resolution);
        if numrange.times.iter().any(|t| *t < 0.0) {
            rd.error("numrange.times", "times must be >= 0");
        }
    }

    let bump = match rd.text("simulate.bump").map(str::to_string) {
        None => ProbeBump::Between,
        Some(b) => ProbeBump::parse(&b).unwrap_or_else(|e| {
            rd.error("simulate.bump", e.to_string());
            ProbeBump::Between
        }),
    };
    let scheme = match rd.text("simulate.scheme") {
        None | Some("crank-nicolson") => DiffusionScheme::CrankNicolson,
        Some("explicit") => DiffusionScheme::Explicit,
        Some(other) => {
            let msg = format!("unknown scheme `{other}` (crank-nicolson, explicit)");
            rd.error("simulate.scheme", msg);
            DiffusionScheme::CrankNicolson
        }
    };
    let domain_keys = ["simulate.x_lo", "simulate.x_hi", "simulate.n"];
    let domain = if domain_keys.iter().any(|k| rd.map.contains_key(*k)) {
        let lo = rd.require_real("simulate.x_lo");
        let hi = rd.require_real("simulate.x_hi");
        let n = if rd.map.contains_key("simulate.n") {
            rd.count("simulate.n")
        } else {
            rd.error("simulate.n", "missing required key");
            None
        };
        match (lo, hi, n) {
            (Some(lo), Some(hi), Some(n)) => {
                rd.ordered("simulate.x_lo", lo, hi);
                rd.at_least("simulate.n", n, 5);
                Some((lo, hi, n))
            }
            _ => None,
        }
    } else {
        None
    };
    let simulate = SimulateBlock {
        mode,
        bump,
        domain,
        t_end: rd.real("simulate.t_end"),
        dt: rd.real("simulate.dt"),
        snapshot_every: rd.count("simulate.snapshot_every"),
        scheme,
        fit: (
            rd.real_or("simulate.fit_t0", 5.0),
            rd.real_or("simulate.fit_t1", 40.0),
        ),
        max_columns: rd.count_or("simulate.max_columns", 1200),
    };
    if matches!(command, Command::Simulate | Command::Figure) {
        if let Some(t) = simulate.t_end {
            if !(t >= 0.0) {
                rd.error("simulate.t_end", "must be >= 0");
            }
        }
        if let Some(dt) = simulate.dt {
            rd.positive("simulate.dt", dt);
        }
        if simulate.snapshot_every == Some(0) {
            rd.error("simulate.snapshot_every", "must be at least 1");
        }
        rd.at_least("simulate.max_columns", simulate.max_columns, 1);
        if mode == Mode::Nonlinear && figure_preset.is_none() {
            rd.error("preset", "nonlinear runs take their initial data from a figure preset (fig1, fig2-left, fig2-right)");
        }
        if mode != Mode::Nonlinear {
            rd.ordered("simulate.fit_t0", simulate.fit.0, simulate.fit.1);
        }
    }
    if command == Command::Figure && figure_preset.is_none() {
        rd.error("preset", "figure needs one of fig1, fig2-left, fig2-right");
    }

    if !rd.errors.is_empty() {
        return Err(rd.errors);
    }
    let entries = rd.map.into_iter().map(|(k, e)| (k, e.value)).collect();
    Ok(RunConfig {
        command,
        preset,
        seed,
        model,
        speeds,
        psi,
        front,
        region,
        check,
        numrange,
        simulate,
        figure: figure_preset,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_preset_fills_parameters() {
        let cfg = parse_config("command = figure\npreset = fig1\n").unwrap();
        assert_eq!(
            cfg.params(),
            ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap()
        );
        assert_eq!(cfg.figure, Some(Preset::Fig1));
    }

    #[test]
    fn speed_ordering_is_named() {
        let text = "command = weight-check\n[model]\nd = 4\nr = 2\nalpha1 = 0.05\nalpha2 = 0.05\n[speeds]\nc1 = 6\nc2 = 3\n";
        let errs = parse_config(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].key.as_deref(), Some("speeds.c1"));
        assert!(errs[0].message.contains("c1 < c2"));
        assert_eq!(errs[0].line, Some(8));
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "command = front\nbogus = 1\n[model]\nd = 4\nr = x\nalpha1 = 0.75\nnot a pair\n";
        let errs = parse_config(text).unwrap_err();
        let keys: Vec<Option<&str>> = errs.iter().map(|e| e.key.as_deref()).collect();
        assert!(keys.contains(&Some("bogus")));
        assert!(keys.contains(&Some("model.r")));
        assert!(keys.contains(&Some("model.alpha2")));
        assert!(keys.contains(&Some("front.c")));
        assert!(errs.iter().any(|e| e.key.is_none() && e.line == Some(7)));
    }

    #[test]
    fn file_overrides_preset() {
        let cfg = parse_config_with(
            "[speeds]\nc2 = 14\n",
            Some(Command::Numrange),
            Some("compliant"),
        )
        .unwrap();
        assert_eq!(cfg.speeds().c2, 14.0);
        assert_eq!(cfg.speeds().kappa1, Some(reference::KAPPA1));
        assert!(cfg.echo().contains("speeds.c2 = 14\n"));
    }
}
