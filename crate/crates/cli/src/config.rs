//! Optional config files and flag/config/default precedence.

use std::fmt::Display;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Keys accepted in a config file. Names match the long flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<String>,
    pub at: Option<f64>,
    pub dlam: Option<f64>,
    pub out: Option<String>,
    pub seed: Option<SeedValue>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub krylov: Option<usize>,
    pub workers: Option<usize>,
    pub threshold: Option<f64>,
    pub strict: Option<bool>,
    pub delta: Option<f64>,
    pub a: Option<f64>,
    pub eps: Option<f64>,
    pub model: Option<String>,
    pub n: Option<usize>,
    pub j: Option<f64>,
    pub jx: Option<f64>,
    pub jy: Option<f64>,
    pub lambda: Option<f64>,
    pub h: Option<f64>,
    pub pin: Option<f64>,
    pub pin_site: Option<usize>,
    pub boundary: Option<String>,
    pub param: Option<String>,
}

/// A seed written either as an integer or as a string such as `"0x5EED"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(u64),
    Text(String),
}

impl SeedValue {
    pub fn resolve(&self) -> Result<u64> {
        match self {
            SeedValue::Int(v) => Ok(*v),
            SeedValue::Text(s) => parse_seed(s).map_err(anyhow::Error::msg),
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| format!("seed {s:?} is not a decimal or 0x-prefixed hex integer"))
}

impl FileConfig {
    /// `.json` files are read as JSON, everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            serde_json::from_str(&text).with_context(|| format!("parsing JSON config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing TOML config {}", path.display()))?
        };
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Env,
    Config,
    Default,
}

impl Source {
    fn label(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::Env => "env",
            Source::Config => "config",
            Source::Default => "default",
        }
    }
}

/// Records where each resolved value came from for the provenance line.
#[derive(Debug, Default)]
pub struct Resolver {
    entries: Vec<String>,
}

impl Resolver {
    /// Explicit flag over config over default.
    pub fn pick<T: Display>(&mut self, key: &str, flag: Option<T>, config: Option<T>, default: T) -> T {
        let (value, source) = match (flag, config) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::Config),
            (None, None) => (default, Source::Default),
        };
        self.record(key, &value, source);
        value
    }

    /// Like [`pick`](Self::pick) with no default; records nothing when unset.
    pub fn pick_opt<T: Display>(&mut self, key: &str, flag: Option<T>, config: Option<T>) -> Option<T> {
        let (value, source) = match (flag, config) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::Config),
            (None, None) => return None,
        };
        self.record(key, &value, source);
        Some(value)
    }

    pub fn record<T: Display>(&mut self, key: &str, value: &T, source: Source) {
        self.entries.push(format!("{key}={value} ({})", source.label()));
    }

    pub fn summary(&self) -> String {
        self.entries.join(", ")
    }
}

/// Seed precedence: flag, then `QUENCHLAB_SEED`, then config, then default.
pub fn resolve_seed(
    resolver: &mut Resolver,
    flag: Option<u64>,
    env: Option<String>,
    config: Option<&SeedValue>,
    default: u64,
) -> Result<u64> {
    let (seed, source) = if let Some(s) = flag {
        (s, Source::Flag)
    } else if let Some(text) = env {
        match parse_seed(&text) {
            Ok(s) => (s, Source::Env),
            Err(e) => bail!("QUENCHLAB_SEED: {e}"),
        }
    } else if let Some(v) = config {
        (v.resolve()?, Source::Config)
    } else {
        (default, Source::Default)
    };
    resolver.record("seed", &format!("{seed:#x}"), source);
    Ok(seed)
}
