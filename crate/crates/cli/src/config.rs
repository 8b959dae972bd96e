//! Sectioned `key = value` configuration with per-command schemas.
//!
//! ```text
//! # comment
//! [strichartz.scan]
//! n = 3
//! nu = 0.5
//! ```
//!
//! Sections are command paths. Unknown sections and keys are rejected; each
//! resolved value comes from the command-line flag, else the file, else the
//! schema default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

/// Keys of one command with their defaults.
pub struct Schema {
    pub section: &'static str,
    pub keys: &'static [(&'static str, &'static str)],
}

impl Schema {
    fn has(&self, key: &str) -> bool {
        self.keys.iter().any(|(k, _)| *k == key)
    }
}

/// Parsed sections of a configuration file.
pub type Sections = BTreeMap<String, BTreeMap<String, String>>;

/// Parses the file text, validating every section and key against `schemas`.
pub fn parse_text(text: &str, schemas: &[&Schema]) -> Result<Sections, CliError> {
    let mut out = Sections::new();
    let mut current: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| CliError::Config(format!("line {}: {msg}", no + 1));
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !schemas.iter().any(|s| s.section == name) {
                return Err(at(format!("unknown section [{name}]")));
            }
            out.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
        let (key, value) = (key.trim().replace('-', "_"), value.trim().to_string());
        let section = current.as_ref().ok_or_else(|| at(format!("key `{key}` outside a section")))?;
        let schema = schemas.iter().find(|s| s.section == section).expect("section validated above");
        if !schema.has(&key) {
            return Err(at(format!("unknown key `{key}` in [{section}]")));
        }
        if out.get_mut(section).unwrap().insert(key.clone(), value).is_some() {
            return Err(at(format!("duplicate key `{key}` in [{section}]")));
        }
    }
    Ok(out)
}

pub fn parse_file(path: &Path, schemas: &[&Schema]) -> Result<Sections, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_text(&text, schemas)
}

/// Resolved values of one command.
#[derive(Debug, Clone)]
pub struct Params {
    pub section: &'static str,
    values: BTreeMap<&'static str, String>,
}

impl Params {
    /// Defaults, overridden by the file section, overridden by flags.
    pub fn resolve(schema: &Schema, file: Option<&Sections>, flags: &[(&'static str, Option<String>)]) -> Result<Self, CliError> {
        let mut values: BTreeMap<&'static str, String> = schema.keys.iter().map(|(k, v)| (*k, v.to_string())).collect();
        if let Some(section) = file.and_then(|f| f.get(schema.section)) {
            for (k, v) in section {
                let key = schema.keys.iter().find(|(s, _)| s == k).expect("keys validated on parse").0;
                values.insert(key, v.clone());
            }
        }
        for (k, v) in flags {
            if !schema.has(k) {
                return Err(CliError::Config(format!("flag `{k}` is not a key of [{}]", schema.section)));
            }
            if let Some(v) = v {
                values.insert(k, v.clone());
            }
        }
        Ok(Params { section: schema.section, values })
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        let mut s = format!("[{}]\n", self.section);
        for (k, v) in &self.values {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn entries(&self) -> &BTreeMap<&'static str, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("schema of [{}] lacks `{key}`", self.section))
    }

    fn bad(&self, key: &str, what: &str) -> CliError {
        CliError::Config(format!("[{}] {key} = `{}`: {what}", self.section, self.raw(key)))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_number(self.raw(key)).ok_or_else(|| self.bad(key, "expected a number"))
    }

    /// A number, or `None` for the value `auto`.
    pub fn f64_or_auto(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(key, "expected a positive finite number"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.raw(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.bad(key, "expected true or false")),
        }
    }

    /// `2` or `3`.
    pub fn dimension(&self) -> Result<u8, CliError> {
        match self.raw("n") {
            "2" => Ok(2),
            "3" => Ok(3),
            _ => Err(self.bad("n", "the dimension must be 2 or 3")),
        }
    }

    /// `lo..hi` with `lo < hi`.
    pub fn range(&self, key: &str) -> Result<(f64, f64), CliError> {
        let (a, b) = self.raw(key).split_once("..").ok_or_else(|| self.bad(key, "expected a range lo..hi"))?;
        let (a, b) = (parse_number(a.trim()), parse_number(b.trim()));
        match (a, b) {
            (Some(a), Some(b)) if a < b && a.is_finite() && b.is_finite() => Ok((a, b)),
            _ => Err(self.bad(key, "expected a range lo..hi of finite numbers with lo < hi")),
        }
    }
}

/// A number: decimal, `inf`/`∞`, or a power `a^b` (e.g. `2^-6`).
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "inf" | "infinity" | "∞" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    if let Some((base, exp)) = s.split_once('^') {
        let (b, e) = (base.trim().parse::<f64>().ok()?, exp.trim().parse::<f64>().ok()?);
        return Some(b.powf(e)).filter(|v| v.is_finite());
    }
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Checks `|ν|` against the coupling range of the dimension; the lowest
/// channel needs `γ = √(k² − ν²) > 0`, so the bound itself is excluded.
pub fn check_coupling(n: u8, nu: f64) -> Result<(), CliError> {
    let (limit, name) = if n == 2 { (0.5, "½") } else { (1.0, "1") };
    if nu.is_finite() && nu.abs() < limit {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "coupling nu = {nu} out of range for n = {n}: requires |ν| ≤ {name} (strictly below, so that γ > 0 on the lowest channel)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Schema = Schema { section: "demo", keys: &[("n", "3"), ("nu", "0.5"), ("k_max", "5")] };

    #[test]
    fn precedence_is_flag_file_default() {
        let file = parse_text("# c\n[demo]\nnu = 0.25  # inline\nk-max = 2\n", &[&S]).unwrap();
        let p = Params::resolve(&S, Some(&file), &[("k_max", Some("3".into())), ("n", None)]).unwrap();
        assert_eq!(p.raw("n"), "3");
        assert_eq!(p.f64("nu").unwrap(), 0.25);
        assert_eq!(p.f64("k_max").unwrap(), 3.0);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        assert!(parse_text("[demo]\nbogus = 1\n", &[&S]).is_err());
        assert!(parse_text("[other]\n", &[&S]).is_err());
        assert!(parse_text("n = 3\n", &[&S]).is_err());
        assert!(parse_text("[demo]\nn = 3\nn = 2\n", &[&S]).is_err());
    }

    #[test]
    fn numbers_and_ranges() {
        assert_eq!(parse_number("2^-6"), Some(1.0 / 64.0));
        assert_eq!(parse_number("inf"), Some(f64::INFINITY));
        assert_eq!(parse_number("x"), None);
        const R: Schema = Schema { section: "r", keys: &[("rho", "1e-3..100"), ("bad", "5..1")] };
        let p = Params::resolve(&R, None, &[]).unwrap();
        assert_eq!(p.range("rho").unwrap(), (1e-3, 100.0));
        assert!(p.range("bad").is_err());
    }

    #[test]
    fn coupling_message_names_the_bound() {
        let e = check_coupling(2, 0.9).unwrap_err().to_string();
        assert!(e.contains("|ν| ≤ ½"), "{e}");
        assert!(check_coupling(3, 0.9).is_ok());
    }
}
