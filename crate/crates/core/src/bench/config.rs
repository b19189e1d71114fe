//! Run and sweep configuration, from `key=value` files and command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::nitsche::Variant;

use super::problems::{Example, MAX_INTERFACES};
use super::run::{cells_for_level, default_depth, SolverKind};

/// Keys accepted in configuration files.
pub const KNOWN_KEYS: [&str; 15] = [
    "example",
    "variant",
    "alpha1",
    "alpha2",
    "levels",
    "finest",
    "solver",
    "ncoarse",
    "interfaces",
    "out",
    "tol",
    "kappa",
    "errors",
    "l5",
    "jobs",
];

/// Highest finest level without the large-run flag.
pub const DESK_MAX_LEVEL: usize = 3;
pub const L5_MAX_LEVEL: usize = 5;

/// One fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: Example,
    pub variant: Variant,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Finest level index (`L1` has 100 cells per side).
    pub finest: usize,
    /// Number of levels in the hierarchy.
    pub depth: usize,
    pub solver: SolverKind,
    pub interfaces: usize,
    pub tol: f64,
    pub kappa: bool,
    pub errors: bool,
}

impl RunConfig {
    pub fn new(example: Example, variant: Variant, finest: usize) -> Self {
        let (alpha1, alpha2) = (1.0, 1.0);
        Self {
            example,
            variant,
            alpha1,
            alpha2,
            finest,
            depth: default_depth(cells_for_level(finest)),
            solver: SolverKind::CgSmg,
            interfaces: 1,
            tol: 1e-12,
            kappa: false,
            errors: true,
        }
    }

    pub fn n_finest(&self) -> usize {
        cells_for_level(self.finest)
    }

    pub fn n_coarse(&self) -> usize {
        self.n_finest() >> (self.depth - 1)
    }
}

/// Cartesian product of list-valued settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub example: Example,
    pub variants: Vec<Variant>,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub finest: Vec<usize>,
    pub depth: Option<usize>,
    pub n_coarse: Option<usize>,
    pub solvers: Vec<SolverKind>,
    pub interfaces: Vec<usize>,
    pub out: PathBuf,
    pub tol: f64,
    pub kappa: bool,
    pub errors: bool,
    pub l5: bool,
    pub jobs: usize,
}

/// Parses `key=value` lines; `#` starts a comment. Unknown keys are rejected.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", ln + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{k}'", ln + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

fn list<T>(s: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(parse).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list '{s}'")));
    }
    Ok(items)
}

fn number<T: std::str::FromStr>(key: &str) -> impl Fn(&str) -> Result<T> + '_ {
    move |s| {
        s.parse::<T>()
            .map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))
    }
}

fn flag(key: &str, s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got '{s}'"))),
    }
}

fn levels(s: &str) -> Result<Vec<usize>> {
    // "1..3" or a list
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = number("finest")(a.trim())?;
        let b: usize = number("finest")(b.trim().trim_start_matches('='))?;
        if a > b {
            return Err(Error::Config(format!("finest: empty range '{s}'")));
        }
        return Ok((a..=b).collect());
    }
    list(s, number("finest"))
}

impl SweepConfig {
    /// Builds a sweep from merged settings. Missing keys take the defaults of `example`.
    pub fn from_settings(example: Example, map: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(e) = get("example") {
            if e.parse::<Example>()? != example {
                return Err(Error::Config(format!("config is for '{e}', not '{example}'")));
            }
        }
        let variants = match get("variant").unwrap_or("all") {
            "all" => Variant::ALL.to_vec(),
            s => list(s, str::parse)?,
        };
        let (d1, d2) = match example {
            Example::Two => ("1e-1,1e-5,1e-9", "1"),
            Example::Three => ("1", "10,1e5,1e9"),
            Example::One | Example::Multi => ("1", "1"),
        };
        let alpha1: Vec<f64> = list(get("alpha1").unwrap_or(d1), number("alpha1"))?;
        let alpha2: Vec<f64> = list(get("alpha2").unwrap_or(d2), number("alpha2"))?;
        if alpha1.iter().chain(&alpha2).any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Config("coefficients must be positive and finite".into()));
        }
        if matches!(example, Example::One | Example::Multi) && alpha1.iter().chain(&alpha2).any(|&a| a != 1.0) {
            return Err(Error::Config(format!("{example} uses unit coefficients")));
        }
        let l5 = get("l5").map(|s| flag("l5", s)).transpose()?.unwrap_or(false);
        let finest = levels(get("finest").unwrap_or("1..3"))?;
        let max_level = if l5 { L5_MAX_LEVEL } else { DESK_MAX_LEVEL };
        if let Some(&bad) = finest.iter().find(|&&l| l == 0 || l > max_level) {
            return Err(Error::Config(if l5 || bad == 0 {
                format!("finest level must be in 1..={max_level}, got {bad}")
            } else {
                format!("finest level {bad} needs the l5 flag")
            }));
        }
        let depth = get("levels").map(number("levels")).transpose()?;
        let n_coarse = get("ncoarse").map(number("ncoarse")).transpose()?;
        let solvers = list(get("solver").unwrap_or("cg-smg"), str::parse)?;
        let interfaces = match example {
            Example::Multi => list(get("interfaces").unwrap_or("1,2,4,6,8,10"), number("interfaces"))?,
            _ => {
                if get("interfaces").is_some_and(|s| s != "1") {
                    return Err(Error::Config("interfaces only applies to the multi example".into()));
                }
                vec![1]
            }
        };
        if let Some(&k) = interfaces.iter().find(|&&k| k == 0 || k > MAX_INTERFACES) {
            return Err(Error::Config(format!("interface count must be in 1..={MAX_INTERFACES}, got {k}")));
        }
        let tol = get("tol").map(number("tol")).transpose()?.unwrap_or(1e-12);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Config(format!("tol must be in (0, 1), got {tol}")));
        }
        let jobs = match get("jobs") {
            Some(s) => number("jobs")(s)?,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let sweep = Self {
            example,
            variants,
            alpha1,
            alpha2,
            finest,
            depth,
            n_coarse,
            solvers,
            interfaces,
            out: PathBuf::from(get("out").unwrap_or("results")),
            tol,
            kappa: get("kappa").map(|s| flag("kappa", s)).transpose()?.unwrap_or(false),
            errors: get("errors").map(|s| flag("errors", s)).transpose()?.unwrap_or(true),
            l5,
            jobs: jobs.max(1),
        };
        // validates the depth of every level up front
        sweep.runs()?;
        Ok(sweep)
    }

    fn depth_for(&self, finest: usize) -> Result<usize> {
        let n = cells_for_level(finest);
        let from_coarse = match self.n_coarse {
            Some(nc) => {
                if nc == 0 || n % nc != 0 || !(n / nc).is_power_of_two() {
                    return Err(Error::Config(format!(
                        "ncoarse {nc} is not {n} divided by a power of two"
                    )));
                }
                Some((n / nc).trailing_zeros() as usize + 1)
            }
            None => None,
        };
        let depth = match (self.depth, from_coarse) {
            (Some(d), Some(c)) if d != c => {
                return Err(Error::Config(format!(
                    "levels={d} and ncoarse={} disagree at L{finest}",
                    self.n_coarse.unwrap_or(0)
                )))
            }
            (Some(d), _) => d,
            (None, Some(c)) => c,
            (None, None) => default_depth(n),
        };
        if depth == 0 || n % (1 << (depth - 1)) != 0 {
            return Err(Error::Config(format!("L{finest} ({n} cells) cannot be coarsened to {depth} levels")));
        }
        Ok(depth)
    }

    /// Every run of the sweep in a fixed order.
    pub fn runs(&self) -> Result<Vec<RunConfig>> {
        let mut out = Vec::new();
        for &finest in &self.finest {
            let depth = self.depth_for(finest)?;
            for &k in &self.interfaces {
                for &alpha1 in &self.alpha1 {
                    for &alpha2 in &self.alpha2 {
                        for &variant in &self.variants {
                            for &solver in &self.solvers {
                                if depth < 2 && solver.uses_multigrid() {
                                    return Err(Error::Config(format!("{solver} needs at least two levels")));
                                }
                                out.push(RunConfig {
                                    example: self.example,
                                    variant,
                                    alpha1,
                                    alpha2,
                                    finest,
                                    depth,
                                    solver,
                                    interfaces: k,
                                    tol: self.tol,
                                    kappa: self.kappa,
                                    errors: self.errors,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
