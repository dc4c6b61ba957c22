//! Experiment configuration: a flat `key = value` file merged with flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use indepbound::ScenarioKind;

/// Every key accepted in a config file or as a `--flag`.
pub const KEYS: &[&str] = &[
    "seed",
    "trials",
    "perms",
    "out",
    "alpha",
    "beta",
    "kappa",
    "grid-n",
    "grid-p",
    "grid-q",
    "grid-s",
    "grid-b",
    "regime",
    "centered",
    "threads",
    "mc-trials",
    "perturb-gamma",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bound,
    Verify,
    Power,
    Phase,
    Divergence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Verify => "verify",
            Command::Power => "power",
            Command::Phase => "phase",
            Command::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeChoice {
    Null,
    LeastFavorable,
    Both,
    Scenario(ScenarioKind),
}

impl RegimeChoice {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "null" => RegimeChoice::Null,
            "least_favorable" => RegimeChoice::LeastFavorable,
            "both" => RegimeChoice::Both,
            "regression" => RegimeChoice::Scenario(ScenarioKind::Regression),
            "two_sample" => RegimeChoice::Scenario(ScenarioKind::TwoSample),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegimeChoice::Null => "null",
            RegimeChoice::LeastFavorable => "least_favorable",
            RegimeChoice::Both => "both",
            RegimeChoice::Scenario(k) => k.name(),
        }
    }
}

/// One violated constraint, named by its config key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub reason: String,
}

impl Violation {
    fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub trials: usize,
    pub perms: usize,
    pub out: Option<PathBuf>,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: Option<f64>,
    pub grid_n: Vec<usize>,
    pub grid_p: Vec<usize>,
    pub grid_q: Vec<usize>,
    pub grid_s: Vec<f64>,
    pub grid_b: Vec<f64>,
    pub regime: RegimeChoice,
    pub centered: bool,
    pub threads: Option<usize>,
    pub mc_trials: usize,
    pub perturb_gamma: bool,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        let phase = command == Command::Phase;
        Self {
            command,
            seed: 0,
            trials: 1000,
            perms: 200,
            out: None,
            alpha: 0.05,
            beta: 0.35,
            kappa: None,
            grid_n: vec![200],
            grid_p: vec![10],
            grid_q: vec![10],
            grid_s: if phase {
                vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0]
            } else {
                Vec::new()
            },
            grid_b: Vec::new(),
            regime: if phase {
                RegimeChoice::LeastFavorable
            } else {
                RegimeChoice::Both
            },
            centered: false,
            threads: None,
            mc_trials: 200_000,
            perturb_gamma: false,
        }
    }

    /// Builds the config from file entries overridden by flag entries.
    /// Every malformed value and every violated constraint is returned.
    pub fn resolve(
        command: Command,
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, Vec<Violation>> {
        let mut merged = file.clone();
        for (k, v) in flags {
            merged.insert(k.clone(), v.clone());
        }
        let mut cfg = Self::defaults(command);
        let mut errs = Vec::new();
        for (key, value) in &merged {
            if let Err(reason) = cfg.set(key, value) {
                errs.push(Violation::new(key.as_str(), reason));
            }
        }
        errs.extend(cfg.violations());
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(errs)
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "seed" => self.seed = parse_num(value)?,
            "trials" => self.trials = parse_num(value)?,
            "perms" => self.perms = parse_num(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "alpha" => self.alpha = parse_num(value)?,
            "beta" => self.beta = parse_num(value)?,
            "kappa" => self.kappa = Some(parse_num(value)?),
            "grid-n" => self.grid_n = parse_list(value)?,
            "grid-p" => self.grid_p = parse_list(value)?,
            "grid-q" => self.grid_q = parse_list(value)?,
            "grid-s" => self.grid_s = parse_list(value)?,
            "grid-b" => self.grid_b = parse_list(value)?,
            "regime" => {
                self.regime = RegimeChoice::parse(value).ok_or_else(|| {
                    format!("`{value}` is not one of null, least_favorable, both, regression, two_sample")
                })?
            }
            "centered" => self.centered = parse_bool(value)?,
            "threads" => self.threads = Some(parse_num(value)?),
            "mc-trials" => self.mc_trials = parse_num(value)?,
            "perturb-gamma" => self.perturb_gamma = parse_bool(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// `(n, p, q)` triples in grid order (n outermost).
    pub fn points(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &n in &self.grid_n {
            for &p in &self.grid_p {
                for &q in &self.grid_q {
                    out.push((n, p, q));
                }
            }
        }
        out
    }

    pub fn kappa_or_default(&self) -> f64 {
        self.kappa.unwrap_or(1.0)
    }

    /// Signal constants used by `bound`, `divergence` and least-favorable `power`.
    pub fn b_values(&self) -> Vec<f64> {
        if self.grid_b.is_empty() {
            indepbound::select_b(self.kappa_or_default(), self.alpha, self.beta)
                .map(|b| vec![b])
                .unwrap_or_default()
        } else {
            self.grid_b.clone()
        }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            v.push(Violation::new("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !(self.beta > self.alpha && self.beta < 1.0) {
            v.push(Violation::new("beta", format!("{} not in (alpha, 1)", self.beta)));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                v.push(Violation::new("kappa", format!("{k} is not positive")));
            }
        }
        for (key, grid) in [("grid-n", &self.grid_n), ("grid-p", &self.grid_p), ("grid-q", &self.grid_q)] {
            if grid.is_empty() {
                v.push(Violation::new(key, "empty list"));
            }
            if grid.contains(&0) {
                v.push(Violation::new(key, "entries must be at least 1"));
            }
        }
        for (key, grid) in [("grid-s", &self.grid_s), ("grid-b", &self.grid_b)] {
            for x in grid.iter() {
                if !(*x >= 0.0 && x.is_finite()) {
                    v.push(Violation::new(key, format!("{x} is not a nonnegative real")));
                }
            }
        }
        if self.threads == Some(0) {
            v.push(Violation::new("threads", "must be at least 1"));
        }
        if matches!(self.command, Command::Power | Command::Phase) {
            if self.trials < indepbound::MonteCarlo::MIN_TRIALS {
                v.push(Violation::new(
                    "trials",
                    format!("{} < {}", self.trials, indepbound::MonteCarlo::MIN_TRIALS),
                ));
            }
            if self.perms < 19 {
                v.push(Violation::new("perms", format!("{} < 19", self.perms)));
            }
        }
        if !v.is_empty() {
            // Point-level checks below assume well-formed scalars.
            return v;
        }
        match self.command {
            Command::Verify => {
                if self.mc_trials < 1000 {
                    v.push(Violation::new("mc-trials", format!("{} < 1000", self.mc_trials)));
                }
            }
            Command::Bound => {
                if self.grid_b.is_empty() {
                    if let Err(e) = indepbound::select_b(self.kappa_or_default(), self.alpha, self.beta) {
                        v.push(Violation::new("kappa", e.to_string()));
                    }
                }
            }
            Command::Divergence => {
                if self.points().len() != 1 {
                    v.push(Violation::new("grid", "divergence takes exactly one (n, p, q)"));
                }
                if self.grid_b.len() > 1 {
                    v.push(Violation::new("grid-b", "divergence takes at most one b"));
                }
                if self.grid_b.is_empty() {
                    if let Err(e) = indepbound::select_b(self.kappa_or_default(), self.alpha, self.beta) {
                        v.push(Violation::new("kappa", e.to_string()));
                    }
                }
            }
            Command::Power | Command::Phase => self.monte_carlo_violations(&mut v),
        }
        v
    }

    fn monte_carlo_violations(&self, v: &mut Vec<Violation>) {
        let uses_s = self.command == Command::Phase || matches!(self.regime, RegimeChoice::Scenario(_));
        if uses_s && self.grid_s.is_empty() {
            v.push(Violation::new("grid-s", "empty list"));
        }
        if self.command == Command::Phase && matches!(self.regime, RegimeChoice::Null | RegimeChoice::Both) {
            v.push(Violation::new("regime", "phase takes least_favorable, regression or two_sample"));
        }
        if let RegimeChoice::Scenario(kind) = self.regime {
            if self.grid_q.iter().any(|&q| q != 1) {
                v.push(Violation::new("grid-q", format!("{} has a single response; set grid-q to 1", kind.name())));
            }
            return;
        }
        let lf = matches!(self.regime, RegimeChoice::LeastFavorable | RegimeChoice::Both);
        if !lf {
            return;
        }
        let signals: Vec<f64> = if self.command == Command::Phase {
            self.grid_s.clone()
        } else {
            if self.grid_b.is_empty() {
                if let Err(e) = indepbound::select_b(self.kappa_or_default(), self.alpha, self.beta) {
                    v.push(Violation::new("kappa", e.to_string()));
                    return;
                }
            }
            self.b_values().iter().map(|b| b * b / 2.0).collect()
        };
        for (n, p, q) in self.points() {
            for &s in &signals {
                let load = s * ((p * q) as f64).sqrt() / n as f64;
                if load >= 1.0 {
                    v.push(Violation::new(
                        if self.command == Command::Phase { "grid-s" } else { "grid-b" },
                        format!(
                            "signal {s} at (n, p, q) = ({n}, {p}, {q}) gives a^2 pq = {load} >= 1; \
                             the covariance is not positive definite"
                        ),
                    ));
                }
            }
        }
    }

    /// Canonical rendering of every output-affecting setting. Excludes `out`
    /// and `threads`, which do not change the results.
    pub fn canonical(&self) -> String {
        let list = |xs: &[String]| xs.join(",");
        let usizes = |xs: &[usize]| list(&xs.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        let floats = |xs: &[f64]| list(&xs.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        let mut parts = vec![
            format!("command={}", self.command.name()),
            format!("seed={}", self.seed),
            format!("alpha={}", self.alpha),
            format!("beta={}", self.beta),
            format!("kappa={}", self.kappa.map(|k| k.to_string()).unwrap_or_else(|| "none".into())),
            format!("grid-n={}", usizes(&self.grid_n)),
            format!("grid-p={}", usizes(&self.grid_p)),
            format!("grid-q={}", usizes(&self.grid_q)),
            format!("grid-s={}", floats(&self.grid_s)),
            format!("grid-b={}", floats(&self.grid_b)),
        ];
        match self.command {
            Command::Power | Command::Phase => {
                parts.push(format!("trials={}", self.trials));
                parts.push(format!("perms={}", self.perms));
                parts.push(format!("regime={}", self.regime.name()));
                parts.push(format!("centered={}", self.centered));
            }
            Command::Verify => {
                parts.push(format!("mc-trials={}", self.mc_trials));
                parts.push(format!("perturb-gamma={}", self.perturb_gamma));
            }
            Command::Bound | Command::Divergence => {}
        }
        parts.join(" ")
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse `{s}`"))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_num(x.trim())).collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

/// Reads `key = value` lines; `#` starts a comment. Underscores in keys are
/// accepted as dashes. Well-formed entries are returned alongside the problems.
pub fn parse_config_text(text: &str) -> (BTreeMap<String, String>, Vec<Violation>) {
    let mut map = BTreeMap::new();
    let mut errs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errs.push(Violation::new(format!("line {}", i + 1), "expected `key = value`"));
            continue;
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            errs.push(Violation::new(format!("line {}", i + 1), format!("unknown key `{}`", k.trim())));
            continue;
        }
        map.insert(key, v.trim().to_string());
    }
    (map, errs)
}

pub fn read_config_file(path: &Path) -> (BTreeMap<String, String>, Vec<Violation>) {
    match std::fs::read_to_string(path) {
        Ok(text) => parse_config_text(&text),
        Err(e) => (
            BTreeMap::new(),
            vec![Violation::new("config", format!("{}: {e}", path.display()))],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn flags_override_file() {
        let (file, errs) = parse_config_text("seed = 3\nalpha = 0.1 # level\n\ngrid_n = 50,60\n");
        assert!(errs.is_empty());
        let cfg = ExperimentConfig::resolve(Command::Bound, &file, &flags(&[("seed", "9")])).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.grid_n, vec![50, 60]);
    }

    #[test]
    fn reports_every_violation() {
        let errs = ExperimentConfig::resolve(
            Command::Power,
            &BTreeMap::new(),
            &flags(&[("alpha", "1.5"), ("trials", "abc"), ("grid-p", "0"), ("perms", "5")]),
        )
        .unwrap_err();
        let keys: Vec<&str> = errs.iter().map(|v| v.key.as_str()).collect();
        for k in ["alpha", "trials", "grid-p", "beta"] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn phase_rejects_non_pd_signals() {
        let errs = ExperimentConfig::resolve(
            Command::Phase,
            &BTreeMap::new(),
            &flags(&[("grid-s", "0,5,25,50")]),
        )
        .unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|v| v.key == "grid-s"));
    }

    #[test]
    fn unknown_file_keys_are_reported() {
        let (map, errs) = parse_config_text("sead = 1\nnot a pair\nseed = 2\n");
        assert_eq!(errs.len(), 2);
        assert_eq!(map.len(), 1);
    }

    #[test]
    fn canonical_ignores_threads_and_out() {
        let a = ExperimentConfig::resolve(Command::Bound, &BTreeMap::new(), &flags(&[("threads", "1")])).unwrap();
        let b = ExperimentConfig::resolve(
            Command::Bound,
            &BTreeMap::new(),
            &flags(&[("threads", "4"), ("out", "x.csv")]),
        )
        .unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
