//! Run configuration: a sectioned `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! [run]
//! mode = spectrum            # spectrum | propagate | qubit | acp | verify
//!
//! [output]
//! dir = out
//! prefix = naphthalene
//!
//! [molecule]
//! name = naphthalene
//! resonance = e              # several groups: e, f (needs omega)
//! omega = 5.969e10           # rad/s, optional
//! scaled = false
//! abundance = false
//!
//! [group e]
//! spin = 1/2
//! count = 1
//! gamma = -1.76085963e7
//! lambda.H1 = 4.90           # or coupling.H1 = T (rad/s), giving λ = −T/γ
//!
//! [system]
//! spins = 1/2, 1/2
//! gammas = -1, -0.35
//! coupling.1.2 = 0.6         # 1-based spin indices
//! beta = 0.05                # or temperature_kelvin = 300
//!
//! [field]
//! b0 = 8
//! b1 = 0.02
//! kind = lorentzian          # lorentzian | gaussian | delta
//! center = 8
//! width = 0.2                # FWHM
//!
//! [propagate]
//! t_end = 50
//! dt = 0.01                  # optional
//! record_every = 10
//!
//! [acp]
//! order = 2
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lineshape::{FrequencyDistribution, Kind};
use crate::master::FieldConfig;
use crate::spectrum::{lambda_from_coupling, EquivalentGroup, Molecule};
use crate::spin::{beta_from_kelvin, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spectrum,
    Propagate,
    Qubit,
    Acp,
    Verify,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectrum" => Ok(Mode::Spectrum),
            "propagate" => Ok(Mode::Propagate),
            "qubit" => Ok(Mode::Qubit),
            "acp" => Ok(Mode::Acp),
            "verify" => Ok(Mode::Verify),
            other => Err(Error::Argument(format!(
                "unknown mode '{other}' (expected spectrum, propagate, qubit, acp or verify)"
            ))),
        }
    }
}

/// One `key = value` line.
#[derive(Clone, Debug)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A `[name]` or `[name arg]` section.
#[derive(Clone, Debug)]
pub struct Section {
    pub name: String,
    pub arg: Option<String>,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    fn find(&self, key: &str) -> Option<&Entry> { self.entries.iter().find(|e| e.key == key) }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.find(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
                line: e.line,
                msg: format!("[{}] {key} = '{}': {err}", self.name, e.value),
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| Error::Parse { line: self.line, msg: format!("[{}] is missing '{key}'", self.name) })
    }

    fn check_keys(&self, allowed: &[&str], prefixes: &[&str]) -> Result<()> {
        for e in &self.entries {
            let ok = allowed.contains(&e.key.as_str()) || prefixes.iter().any(|p| e.key.starts_with(p));
            if !ok {
                return Err(Error::Parse { line: e.line, msg: format!("unknown key '{}' in [{}]", e.key, self.name) });
            }
        }
        Ok(())
    }
}

/// Split text into sections. Keys must be unique within a section.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, msg: format!("unterminated section header '{content}'") })?
                .trim();
            let mut parts = inner.split_whitespace();
            let name = parts.next().ok_or_else(|| Error::Parse { line, msg: "empty section name".into() })?;
            let arg = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(Error::Parse { line, msg: format!("section header '{content}' has too many words") });
            }
            sections.push(Section { name: name.to_ascii_lowercase(), arg, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{content}'") })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, msg: "empty key".into() });
        }
        let section =
            sections.last_mut().ok_or_else(|| Error::Parse { line, msg: "key outside of any section".into() })?;
        if section.find(key).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key '{key}' in [{}]", section.name) });
        }
        section.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
    }
    Ok(sections)
}

/// Spin quantum number as 2j: accepts "1/2", "3/2", "1", "0.5".
pub fn parse_spin(s: &str) -> std::result::Result<u32, String> {
    let s = s.trim();
    let twice = if let Some((a, b)) = s.split_once('/') {
        let a: u32 = a.trim().parse().map_err(|_| format!("bad spin '{s}'"))?;
        if b.trim() != "2" {
            return Err(format!("spin '{s}' must be an integer or a half-integer n/2"));
        }
        a
    } else {
        let v: f64 = s.parse().map_err(|_| format!("bad spin '{s}'"))?;
        let t = 2.0 * v;
        if !(t >= 0.0 && (t - t.round()).abs() < 1e-12) {
            return Err(format!("spin '{s}' must be a non-negative multiple of 1/2"));
        }
        t.round() as u32
    };
    Ok(twice)
}

fn parse_list<T>(entry: &Entry, section: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    entry
        .value
        .split(',')
        .map(|s| f(s.trim()).map_err(|msg| Error::Parse { line: entry.line, msg: format!("[{section}] {}: {msg}", entry.key) }))
        .collect()
}

#[derive(Clone, Debug)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
}

#[derive(Clone, Debug)]
pub struct MoleculeConfig {
    pub molecule: Molecule,
    pub resonance: Vec<String>,
    pub omega_o: Option<f64>,
    pub scaled: bool,
    pub abundance: bool,
}

#[derive(Clone, Debug)]
pub struct PropagateConfig {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: usize,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: Option<u64>,
    pub output: OutputConfig,
    pub molecule: Option<MoleculeConfig>,
    pub system: Option<SpinSystem>,
    pub beta: Option<f64>,
    pub field: Option<FieldConfig>,
    pub propagate: PropagateConfig,
    pub acp_order: usize,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut by_name: BTreeMap<&str, &Section> = BTreeMap::new();
        let mut groups = Vec::new();
        for s in &sections {
            match s.name.as_str() {
                "group" => groups.push(s),
                "run" | "output" | "molecule" | "system" | "field" | "propagate" | "acp" => {
                    if s.arg.is_some() {
                        return Err(Error::Parse { line: s.line, msg: format!("[{}] takes no argument", s.name) });
                    }
                    if by_name.insert(s.name.as_str(), s).is_some() {
                        return Err(Error::Parse { line: s.line, msg: format!("section [{}] appears twice", s.name) });
                    }
                }
                other => return Err(Error::Parse { line: s.line, msg: format!("unknown section [{other}]") }),
            }
        }

        let run = by_name.get("run").ok_or_else(|| Error::Parse { line: 1, msg: "missing [run] section".into() })?;
        run.check_keys(&["mode", "seed"], &[])?;
        let mode: Mode = {
            let e = run.find("mode").ok_or_else(|| Error::Parse { line: run.line, msg: "[run] is missing 'mode'".into() })?;
            e.value.parse().map_err(|err: Error| Error::Parse { line: e.line, msg: err.to_string() })?
        };
        let seed = run.get::<u64>("seed")?;

        let output = match by_name.get("output") {
            Some(s) => {
                s.check_keys(&["dir", "prefix"], &[])?;
                OutputConfig {
                    dir: PathBuf::from(s.get::<String>("dir")?.unwrap_or_else(|| "out".into())),
                    prefix: s.get::<String>("prefix")?.unwrap_or_else(|| "spinlind".into()),
                }
            }
            None => OutputConfig { dir: PathBuf::from("out"), prefix: "spinlind".into() },
        };

        let molecule = match by_name.get("molecule") {
            Some(s) => Some(parse_molecule(s, &groups)?),
            None => {
                if let Some(g) = groups.first() {
                    return Err(Error::Parse { line: g.line, msg: "[group] sections need a [molecule] section".into() });
                }
                None
            }
        };

        let (system, beta) = match by_name.get("system") {
            Some(s) => {
                let (sys, beta) = parse_system(s)?;
                (Some(sys), Some(beta))
            }
            None => (None, None),
        };

        let field = match by_name.get("field") {
            Some(s) => Some(parse_field(s)?),
            None => None,
        };

        let propagate = match by_name.get("propagate") {
            Some(s) => {
                s.check_keys(&["t_end", "dt", "record_every"], &[])?;
                PropagateConfig {
                    t_end: s.get("t_end")?,
                    dt: s.get("dt")?,
                    record_every: s.get("record_every")?.unwrap_or(1),
                }
            }
            None => PropagateConfig { t_end: None, dt: None, record_every: 1 },
        };

        let acp_order = match by_name.get("acp") {
            Some(s) => {
                s.check_keys(&["order"], &[])?;
                s.get("order")?.unwrap_or(2)
            }
            None => 2,
        };

        let cfg = RunConfig { mode, seed, output, molecule, system, beta, field, propagate, acp_order };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that the sections needed by the mode are present.
    pub fn validate(&self) -> Result<()> {
        let need_matrix = |what: &str| -> Result<()> {
            if self.system.is_none() {
                return Err(Error::Validation(format!("mode {what} needs a [system] section with an explicit spin list")));
            }
            if self.field.is_none() {
                return Err(Error::Validation(format!("mode {what} needs a [field] section")));
            }
            Ok(())
        };
        match self.mode {
            Mode::Spectrum => {
                if self.molecule.is_none() {
                    return Err(Error::Validation("mode spectrum needs a [molecule] section".into()));
                }
            }
            Mode::Propagate => need_matrix("propagate")?,
            Mode::Qubit => {
                need_matrix("qubit")?;
                let s = self.system.as_ref().expect("checked");
                if s.twice_j() != [1] {
                    return Err(Error::Validation("mode qubit needs exactly one spin-1/2".into()));
                }
            }
            Mode::Acp => {
                if self.system.is_none() || self.field.is_none() {
                    return Err(Error::Validation("mode acp needs [system] and [field] sections".into()));
                }
                if !(1..=crate::acp::MAX_ORDER).contains(&self.acp_order) {
                    return Err(Error::Validation(format!("acp order must lie in 1..={}", crate::acp::MAX_ORDER)));
                }
            }
            Mode::Verify => {
                if self.system.is_none() && self.molecule.is_none() {
                    return Err(Error::Validation("mode verify needs a [system] or a [molecule] section".into()));
                }
                if self.system.is_some() && self.field.is_none() {
                    return Err(Error::Validation("mode verify with a [system] needs a [field] section".into()));
                }
            }
        }
        if self.propagate.record_every == 0 {
            return Err(Error::Validation("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got '{other}'")),
    }
}

fn parse_molecule(s: &Section, groups: &[&Section]) -> Result<MoleculeConfig> {
    s.check_keys(&["name", "resonance", "omega", "scaled", "abundance"], &[])?;
    let name = s.get::<String>("name")?.unwrap_or_else(|| "molecule".into());
    let bool_key = |key: &str| -> Result<bool> {
        match s.find(key) {
            None => Ok(false),
            Some(e) => parse_bool(&e.value).map_err(|msg| Error::Parse { line: e.line, msg: format!("[molecule] {key}: {msg}") }),
        }
    };
    let scaled = bool_key("scaled")?;
    let abundance = bool_key("abundance")?;
    let omega_o = s.get::<f64>("omega")?;

    let mut list = Vec::new();
    // couplings are converted after all γ are known
    let mut couplings: Vec<(usize, String, f64, usize)> = Vec::new();
    for g in groups {
        let label = g.arg.clone().ok_or_else(|| Error::Parse { line: g.line, msg: "[group] needs a label, e.g. [group H1]".into() })?;
        g.check_keys(&["spin", "count", "gamma", "abundance"], &["lambda.", "coupling."])?;
        let spin_entry = g.find("spin").ok_or_else(|| Error::Parse { line: g.line, msg: format!("[group {label}] is missing 'spin'") })?;
        let twice_j = parse_spin(&spin_entry.value).map_err(|msg| Error::Parse { line: spin_entry.line, msg })?;
        let mut group = EquivalentGroup::new(&label, twice_j, g.require("count")?, g.require("gamma")?);
        group.abundance = g.get("abundance")?.unwrap_or(1.0);
        for e in &g.entries {
            if let Some(other) = e.key.strip_prefix("lambda.") {
                let v: f64 = e.value.parse().map_err(|err| Error::Parse { line: e.line, msg: format!("{}: {err}", e.key) })?;
                group.lambdas.insert(other.to_string(), v);
            } else if let Some(other) = e.key.strip_prefix("coupling.") {
                let v: f64 = e.value.parse().map_err(|err| Error::Parse { line: e.line, msg: format!("{}: {err}", e.key) })?;
                couplings.push((list.len(), other.to_string(), v, e.line));
            }
        }
        list.push(group);
    }
    for (k, other, t, line) in couplings {
        let lam = lambda_from_coupling(t, list[k].gamma).map_err(|err| Error::Parse { line, msg: err.to_string() })?;
        if let Some(&given) = list[k].lambdas.get(&other) {
            if (given - lam).abs() > 1e-9 * given.abs().max(lam.abs()).max(1e-300) {
                return Err(Error::Validation(format!(
                    "group '{}': lambda.{other} = {given} disagrees with -coupling/gamma = {lam}",
                    list[k].label
                )));
            }
        }
        list[k].lambdas.insert(other, lam);
    }
    let molecule = Molecule::new(&name, list)?;
    let resonance: Vec<String> = match s.find("resonance") {
        Some(e) => e.value.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        None => vec![molecule.groups[0].label.clone()],
    };
    for r in &resonance {
        molecule.group(r)?;
    }
    if resonance.is_empty() {
        return Err(Error::Validation("[molecule] resonance list is empty".into()));
    }
    Ok(MoleculeConfig { molecule, resonance, omega_o, scaled, abundance })
}

fn parse_system(s: &Section) -> Result<(SpinSystem, f64)> {
    s.check_keys(&["spins", "gammas", "beta", "temperature_kelvin"], &["coupling."])?;
    let spins_e = s.find("spins").ok_or_else(|| Error::Parse { line: s.line, msg: "[system] is missing 'spins'".into() })?;
    let twice_j = parse_list(spins_e, "system", parse_spin)?;
    let gam_e = s.find("gammas").ok_or_else(|| Error::Parse { line: s.line, msg: "[system] is missing 'gammas'".into() })?;
    let gammas = parse_list(gam_e, "system", |x| x.parse::<f64>().map_err(|e| format!("'{x}': {e}")))?;
    if gammas.len() != twice_j.len() {
        return Err(Error::Parse {
            line: gam_e.line,
            msg: format!("{} gammas for {} spins", gammas.len(), twice_j.len()),
        });
    }
    let n = twice_j.len();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for e in &s.entries {
        if let Some(rest) = e.key.strip_prefix("coupling.") {
            let bad = || Error::Parse { line: e.line, msg: format!("expected coupling.I.J with 1-based indices, got '{}'", e.key) };
            let (a, b) = rest.split_once('.').ok_or_else(bad)?;
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.parse().map_err(|_| bad())?;
            if a == 0 || b == 0 || a > n || b > n || a == b {
                return Err(bad());
            }
            let v: f64 = e.value.parse().map_err(|err| Error::Parse { line: e.line, msg: format!("{}: {err}", e.key) })?;
            t[(a - 1, b - 1)] = v;
            t[(b - 1, a - 1)] = v;
        }
    }
    let beta = match (s.get::<f64>("beta")?, s.get::<f64>("temperature_kelvin")?) {
        (Some(b), None) => b,
        (None, Some(k)) => beta_from_kelvin(k)?,
        _ => {
            return Err(Error::Validation(
                "[system] needs exactly one of 'beta' and 'temperature_kelvin'".into(),
            ))
        }
    };
    let sys = SpinSystem::new(twice_j, gammas, t).map_err(|e| match e {
        Error::Argument(m) => Error::Validation(m),
        other => other,
    })?;
    Ok((sys, beta))
}

fn parse_field(s: &Section) -> Result<FieldConfig> {
    s.check_keys(&["b0", "b1", "kind", "center", "width"], &[])?;
    let kind = match s.get::<String>("kind")?.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("lorentzian") => Kind::Lorentzian,
        Some("gaussian") => Kind::Gaussian,
        Some("delta") => Kind::Delta,
        Some(other) => {
            let line = s.find("kind").map_or(s.line, |e| e.line);
            return Err(Error::Parse { line, msg: format!("unknown distribution kind '{other}'") });
        }
    };
    let b0: f64 = s.require("b0")?;
    let center = s.get::<f64>("center")?.unwrap_or(b0);
    let dist = match kind {
        Kind::Delta => FrequencyDistribution::delta(center),
        _ => FrequencyDistribution::new(kind, center, s.require("width")?).map_err(|e| Error::Validation(e.to_string()))?,
    };
    FieldConfig::new(b0, s.require("b1")?, dist).map_err(|e| Error::Validation(e.to_string()))
}
