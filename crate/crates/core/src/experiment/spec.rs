//! Flat `key = value` spec files.
//!
//! ```text
//! # 1-D comparison
//! name = uni-a
//! case = uni-a
//! preset = desk
//! iterations = 2000
//! svg = true
//!
//! [scheme moment:K=10]
//! [scheme quantile:K=200]
//! hidden = 40,40
//! ```
//!
//! Settings before the first section apply to every scheme; settings inside
//! a `[scheme ...]` section override them for that scheme only. `#` starts a
//! comment.

use std::path::PathBuf;
use std::str::FromStr;

use crate::distgen::BinGrid;
use crate::error::{Error, Result};
use crate::features::FeatureScheme;
use crate::nn::Activation;
use crate::targets::{LabelPolicy, TestCase};
use crate::trainer::{Preset, TrainConfig};

/// Keys that may appear both globally and inside a scheme section.
pub const TRAINING_KEYS: &[&str] = &[
    "batch",
    "samples",
    "bins",
    "iterations",
    "eval_every",
    "eval_count",
    "window",
    "label",
    "lr",
    "activation",
    "hidden",
    "cylinder_inner",
    "cylinder_latent",
    "cylinder_outer",
    "seed",
];

const GLOBAL_KEYS: &[&str] = &["name", "case", "preset", "svg", "out"];

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// Column of the value.
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeSection {
    pub scheme: FeatureScheme,
    pub overrides: Vec<Setting>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub origin: String,
    pub name: String,
    pub case: TestCase,
    pub preset: Preset,
    pub svg: bool,
    pub out: Option<PathBuf>,
    pub settings: Vec<Setting>,
    pub schemes: Vec<SchemeSection>,
}

pub(crate) struct Pos<'a> {
    pub(crate) origin: &'a str,
}

impl Pos<'_> {
    pub(crate) fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            column,
            message: message.into(),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn col(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

type Section = (String, usize, usize, Vec<Setting>);

/// Parses `key = value` lines; returns `(settings, sections)` in file order.
/// `global` keys may only appear before the first section, `section` keys
/// anywhere. With no `section` keys, sections are rejected.
pub(crate) fn parse_lines(text: &str, origin: &str, global: &[&str], section: &[&str]) -> Result<(Vec<Setting>, Vec<Section>)> {
    let p = &Pos { origin };
    let mut globals = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = strip_comment(raw);
        let body = line.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let Some(inner) = rest.strip_suffix(']') else {
                return Err(p.err(n, col(raw, body), "section header is missing `]`"));
            };
            let inner = inner.trim();
            if section.is_empty() {
                return Err(p.err(n, col(raw, body), "sections are not allowed in this file"));
            }
            let Some(scheme) = inner.strip_prefix("scheme") else {
                return Err(p.err(n, col(raw, body), format!("unknown section `[{inner}]`")));
            };
            let scheme = scheme.trim();
            if scheme.is_empty() {
                return Err(p.err(n, col(raw, body), "`[scheme]` needs a feature scheme"));
            }
            sections.push((scheme.to_string(), n, col(raw, scheme), Vec::new()));
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(p.err(n, col(raw, body), format!("expected `key = value`, found `{body}`")));
        };
        let key = k.trim();
        let value = v.trim();
        if key.is_empty() {
            return Err(p.err(n, col(raw, body), "missing key before `=`"));
        }
        let in_section = !sections.is_empty();
        let known = section.contains(&key) || (!in_section && global.contains(&key));
        if !known {
            let msg = if global.contains(&key) {
                format!("`{key}` is only allowed before the first section")
            } else {
                format!("unknown key `{key}`")
            };
            return Err(p.err(n, col(raw, key), msg));
        }
        let column = if value.is_empty() { col(raw, body) + body.len() } else { col(raw, value) };
        let s = Setting {
            key: key.to_string(),
            value: value.to_string(),
            line: n,
            column,
        };
        match sections.last_mut() {
            Some(sec) => {
                if sec.3.iter().any(|o| o.key == s.key) {
                    return Err(p.err(n, col(raw, key), format!("`{key}` is set twice in this section")));
                }
                sec.3.push(s)
            }
            None => {
                if globals.iter().any(|o: &Setting| o.key == s.key) {
                    return Err(p.err(n, col(raw, key), format!("`{key}` is set twice")));
                }
                globals.push(s)
            }
        }
    }
    Ok((globals, sections))
}

pub(crate) fn parse_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}")))
        .collect()
}

pub(crate) fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

pub(crate) fn parse_num<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

/// `exact` or `mc:<n_label>`.
pub fn parse_label(v: &str) -> std::result::Result<LabelPolicy, String> {
    if v == "exact" {
        return Ok(LabelPolicy::Exact);
    }
    match v.strip_prefix("mc:") {
        Some(n) => Ok(LabelPolicy::MonteCarlo { n_label: parse_num(n)? }),
        None => Err(format!("expected `exact` or `mc:<n>`, found `{v}`")),
    }
}

pub fn format_label(policy: &LabelPolicy) -> String {
    match policy {
        LabelPolicy::Exact => "exact".into(),
        LabelPolicy::MonteCarlo { n_label } => format!("mc:{n_label}"),
    }
}

/// Applies one training setting to `config`.
pub fn apply(config: &mut TrainConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "batch" => config.batch = parse_num(value)?,
        "samples" => config.samples = parse_num(value)?,
        "bins" => {
            let bins = value
                .split('x')
                .map(|j| parse_num::<usize>(j.trim()))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let support = config.grid.support().to_vec();
            let bins = if bins.len() == 1 { vec![bins[0]; support.len()] } else { bins };
            config.grid = BinGrid::new(support, bins).map_err(|e| e.to_string())?;
        }
        "iterations" => config.iterations = parse_num(value)?,
        "eval_every" => config.eval_every = parse_num(value)?,
        "eval_count" => config.eval_count = parse_num(value)?,
        "window" => config.window = parse_num(value)?,
        "label" => config.label = parse_label(value)?,
        "lr" => config.lr = parse_num(value)?,
        "activation" => config.activation = value.parse::<Activation>()?,
        "hidden" => config.hidden = parse_list(value)?,
        "cylinder_inner" => config.cylinder_inner = parse_list(value)?,
        "cylinder_latent" => config.cylinder_latent = parse_num(value)?,
        "cylinder_outer" => config.cylinder_outer = parse_list(value)?,
        "seed" => config.seed = parse_num(value)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

/// Every training setting of `config`, in [`TRAINING_KEYS`] order.
pub fn settings_of(config: &TrainConfig) -> Vec<(&'static str, String)> {
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let bins = config.grid.bins().iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x");
    vec![
        ("batch", config.batch.to_string()),
        ("samples", config.samples.to_string()),
        ("bins", bins),
        ("iterations", config.iterations.to_string()),
        ("eval_every", config.eval_every.to_string()),
        ("eval_count", config.eval_count.to_string()),
        ("window", config.window.to_string()),
        ("label", format_label(&config.label)),
        ("lr", config.lr.to_string()),
        ("activation", config.activation.name().to_string()),
        ("hidden", list(&config.hidden)),
        ("cylinder_inner", list(&config.cylinder_inner)),
        ("cylinder_latent", config.cylinder_latent.to_string()),
        ("cylinder_outer", list(&config.cylinder_outer)),
        ("seed", config.seed.to_string()),
    ]
}

impl ExperimentSpec {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ExperimentSpec::parse(&text, &path.display().to_string())
    }

    /// Parses and fully resolves a spec, so every error carries a position.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let p = Pos { origin };
        let (globals, sections) = parse_lines(text, origin, GLOBAL_KEYS, TRAINING_KEYS)?;
        let find = |key: &str| globals.iter().find(|s| s.key == key);
        let req = |key: &str| find(key).ok_or_else(|| p.err(1, 1, format!("missing required key `{key}`")));
        let name_s = req("name")?;
        let name = name_s.value.clone();
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(p.err(name_s.line, name_s.column, format!("`{name}` is not a valid run name")));
        }
        let case_s = req("case")?;
        let case: TestCase = case_s.value.parse().map_err(|e: String| p.err(case_s.line, case_s.column, e))?;
        let preset = match find("preset") {
            Some(s) => s.value.parse().map_err(|e: String| p.err(s.line, s.column, e))?,
            None => Preset::Desk,
        };
        let svg = match find("svg") {
            Some(s) => parse_bool(&s.value).map_err(|e| p.err(s.line, s.column, e))?,
            None => false,
        };
        let out = find("out").map(|s| PathBuf::from(&s.value));
        if sections.is_empty() {
            return Err(p.err(1, 1, "no `[scheme ...]` sections"));
        }
        let mut schemes = Vec::new();
        for (text, line, column, overrides) in sections {
            let scheme: FeatureScheme = text.parse().map_err(|e: String| p.err(line, column, e))?;
            if schemes.iter().any(|s: &SchemeSection| s.scheme.slug() == scheme.slug()) {
                return Err(p.err(line, column, format!("scheme `{scheme}` appears twice")));
            }
            schemes.push(SchemeSection { scheme, overrides, line });
        }
        let spec = ExperimentSpec {
            origin: origin.to_string(),
            name,
            case,
            preset,
            svg,
            out,
            settings: globals.into_iter().filter(|s| TRAINING_KEYS.contains(&s.key.as_str())).collect(),
            schemes,
        };
        spec.resolve(None, None)?;
        Ok(spec)
    }

    /// One validated configuration per scheme. `preset` and `seed` replace
    /// the values from the file when given.
    pub fn resolve(&self, preset: Option<Preset>, seed: Option<u64>) -> Result<Vec<TrainConfig>> {
        let p = Pos { origin: &self.origin };
        let preset = preset.unwrap_or(self.preset);
        let mut configs = Vec::with_capacity(self.schemes.len());
        for sec in &self.schemes {
            let mut config = TrainConfig::preset(preset, self.case, sec.scheme.clone());
            for s in self.settings.iter().chain(&sec.overrides) {
                apply(&mut config, &s.key, &s.value).map_err(|e| p.err(s.line, s.column, e))?;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            config
                .validate()
                .map_err(|e| p.err(sec.line, 1, format!("scheme `{}` with case `{}`: {e}", sec.scheme, self.case)))?;
            configs.push(config);
        }
        Ok(configs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# comment
name = cmp
case = uni-b
iterations = 300   # trailing comment
svg = yes

[scheme quantile:K=50]
[scheme moment:K=4]
hidden = 8,8
seed = 9
";

    #[test]
    fn parses_and_resolves() {
        let spec = ExperimentSpec::parse(BASIC, "basic.spec").unwrap();
        assert_eq!(spec.name, "cmp");
        assert_eq!(spec.case, TestCase::UNI_B);
        assert_eq!(spec.preset, Preset::Desk);
        assert!(spec.svg);
        let cs = spec.resolve(None, None).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].iterations, 300);
        assert_eq!(cs[0].hidden, vec![20, 20]);
        assert_eq!(cs[1].hidden, vec![8, 8]);
        assert_eq!((cs[0].seed, cs[1].seed), (0, 9));
        let cs = spec.resolve(Some(Preset::Paper), Some(5)).unwrap();
        assert_eq!(cs[0].samples, 200_000);
        assert_eq!(cs[0].iterations, 300);
        assert!(cs.iter().all(|c| c.seed == 5));
    }

    #[test]
    fn settings_round_trip() {
        let mut c = TrainConfig::desk(TestCase::BI_C, FeatureScheme::Moment { k: 3 });
        c.lr = 1.25e-3;
        c.grid = BinGrid::cube(2, -2.0, 2.0, 7).unwrap();
        let mut d = TrainConfig::desk(TestCase::BI_C, FeatureScheme::Moment { k: 3 });
        for (k, v) in settings_of(&c) {
            apply(&mut d, k, &v).unwrap();
        }
        assert_eq!(c, d);
    }

    fn err(text: &str) -> String {
        ExperimentSpec::parse(text, "s").unwrap_err().to_string()
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(err("name = a\ncase = uni-a\nbogus = 1\n"), "s:3:1: unknown key `bogus`");
        assert_eq!(
            err("name = a\ncase = uni-a\n[scheme moment:K=2]\niterations = ten\n"),
            "s:4:14: `ten`: invalid digit found in string"
        );
        assert!(err("name = a\ncase = uni-z\n").starts_with("s:2:8: unknown test case"));
        assert!(err("name = a\ncase = uni-a\n[scheme moment:K=2\n").starts_with("s:3:1:"));
        assert!(err("name = a\ncase = uni-a\n[scheme nope]\n").starts_with("s:3:9: unknown feature scheme"));
        assert!(err("name = a\ncase = uni-a\n[scheme moment:K=2]\ncase = uni-b\n").starts_with("s:4:1:"));
        assert!(err("name = a\ncase = uni-a\njust words\n").starts_with("s:3:1: expected"));
        assert!(err("case = uni-a\n[scheme moment:K=2]\n").contains("missing required key `name`"));
        assert!(err("name = a\ncase = uni-a\n").contains("no `[scheme"));
        assert!(err("name = a\ncase = uni-a\n[scheme moment:K=2]\n[scheme moment:K=2]\n").starts_with("s:4:9:"));
    }

    #[test]
    fn dimension_mismatch_points_at_scheme() {
        let e = err("name = a\ncase = bi-a\n[scheme moment:K=2]\n[scheme quantile:K=10]\n");
        assert!(e.starts_with("s:4:1:"), "{e}");
        assert!(e.contains("dimension mismatch"), "{e}");
    }

    #[test]
    fn labels() {
        assert_eq!(parse_label("exact"), Ok(LabelPolicy::Exact));
        assert_eq!(parse_label("mc:50000"), Ok(LabelPolicy::MonteCarlo { n_label: 50000 }));
        assert!(parse_label("mc").is_err());
        let e = err("name = a\ncase = bi-b\nlabel = mc:10\n[scheme moment:K=2]\n");
        assert!(e.starts_with("s:4:1:") && e.contains("n_label"), "{e}");
    }
}
