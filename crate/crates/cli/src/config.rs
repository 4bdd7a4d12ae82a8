//! Settings merged from defaults, a `key = value` file and flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ptshock_core::shock::SearchBox;
use ptshock_core::GridSpec;

/// Keys, defaults and one-line help, in `--show-config` order.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("u0", None, "deformed-side initial profile u0(x)"),
    ("w0", None, "undeformed initial profile w0(x), instead of u0"),
    (
        "f",
        Some("w"),
        "nonlinearity: a power such as w^2, or an expression in x",
    ),
    ("eps", Some("1"), "deformation exponent; a comma list for shock-times"),
    ("phase", None, "reality phase m,sign applied to u0"),
    (
        "window",
        Some("-10,10,4001"),
        "scan window for real catastrophe times: min,max,points",
    ),
    ("grid", Some("-10,10,2001"), "spatial grid: min,max,points"),
    (
        "labels",
        Some("-10,10,20001"),
        "characteristic labels for loop elimination: min,max,points",
    ),
    ("t", Some("0"), "time or comma list of times"),
    ("kappa", Some("1,2"), "charge exponents"),
    ("direction", Some("w-to-u"), "transform direction: w-to-u or u-to-w"),
    (
        "box",
        Some("-3,3,-3,3"),
        "complex search box: re_min,re_max,im_min,im_max",
    ),
    ("lattice", Some("41"), "seed lattice points per side of the box"),
    ("out", None, "directory for CSV and JSON files; stdout if unset"),
];

/// Invalid invocation, mapped to the usage exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Parse `key = value` lines. `#` and `;` start comments and `[section]`
/// headers are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim().replace('-', "_"), v.trim());
        if !known(&k) {
            return Err(usage(format!("config line {}: unknown key `{k}`", n + 1)));
        }
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.insert(k, v.to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Defaults, overridden by the file, overridden by flags.
    pub fn resolve(file: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<Self, UsageError> {
        let mut values: BTreeMap<String, String> = KEYS
            .iter()
            .filter_map(|(k, d, _)| d.map(|d| (k.to_string(), d.to_string())))
            .collect();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            values.extend(parse_config(&text)?);
        }
        for (k, v) in flags {
            debug_assert!(known(k), "flag {k} has no key");
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, UsageError> {
        self.get(key).ok_or_else(|| usage(format!("missing setting `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T, UsageError> {
        let v = self.require(key)?;
        v.trim()
            .parse()
            .map_err(|_| usage(format!("invalid value `{v}` for `{key}`")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, UsageError> {
        let v = self.require(key)?;
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| usage(format!("invalid value `{v}` for `{key}`")))
            })
            .collect()
    }

    pub fn grid(&self, key: &str) -> Result<GridSpec, UsageError> {
        let v = self.require(key)?;
        let bad = || usage(format!("`{key}` must be min,max,points, got `{v}`"));
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b) = (
            parts[0].parse().map_err(|_| bad())?,
            parts[1].parse().map_err(|_| bad())?,
        );
        let n = parts[2].parse().map_err(|_| bad())?;
        GridSpec::new(a, b, n).map_err(|e| usage(format!("`{key}`: {e}")))
    }

    pub fn search_box(&self) -> Result<SearchBox, UsageError> {
        let b: Vec<f64> = self.list("box")?;
        if b.len() != 4 {
            return Err(usage("`box` must be re_min,re_max,im_min,im_max"));
        }
        Ok(SearchBox {
            re_min: b[0],
            re_max: b[1],
            im_min: b[2],
            im_max: b[3],
            lattice: self.parsed("lattice")?,
        })
    }

    /// The resolved settings in config-file syntax; unset keys are commented.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, _, help) in KEYS {
            s.push_str(&format!("# {help}\n"));
            match self.get(k) {
                Some(v) => s.push_str(&format!("{k} = {v}\n")),
                None => s.push_str(&format!("# {k} =\n")),
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "[run]\n# comment\neps = 5\nt = 0.1\n").unwrap();
        let s = Settings::resolve(Some(&path), &[("eps", Some("3".into())), ("u0", None)]).unwrap();
        assert_eq!(s.get("eps"), Some("3"));
        assert_eq!(s.get("t"), Some("0.1"));
        assert_eq!(s.get("grid"), Some("-10,10,2001"));
        assert_eq!(s.get("u0"), None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("epsilon = 3").is_err());
        assert!(parse_config("eps 3").is_err());
        assert_eq!(parse_config("u0 = \"1/(1+x^2)\"").unwrap()["u0"], "1/(1+x^2)");
    }

    #[test]
    fn dump_round_trips() {
        let s = Settings::resolve(None, &[("u0", Some("exp(-x^2)".into()))]).unwrap();
        let again = parse_config(&s.dump()).unwrap();
        assert_eq!(again.get("u0").map(String::as_str), Some("exp(-x^2)"));
        assert_eq!(again.len(), KEYS.iter().filter(|(k, _, _)| s.get(k).is_some()).count());
    }

    #[test]
    fn grids_and_lists_parse() {
        let s = Settings::resolve(None, &[("t", Some("0.1, 0.2".into()))]).unwrap();
        assert_eq!(s.list::<f64>("t").unwrap(), vec![0.1, 0.2]);
        assert_eq!(s.grid("window").unwrap().points, 4001);
        assert_eq!(s.search_box().unwrap().lattice, 41);
        let bad = Settings::resolve(None, &[("grid", Some("1,2".into()))]).unwrap();
        assert!(bad.grid("grid").is_err());
    }
}
