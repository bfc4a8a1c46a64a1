//! Settings: built-in defaults, then a key=value file, then a JSON override
//! object, then command-line flags. Every resolved value remembers where it
//! came from so errors can point at it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use fracmc::{Dim, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { line: usize },
    Json,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { line } => write!(f, "config line {line}"),
            Origin::Json => write!(f, "json override"),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}: field `{field}`: {msg}")]
    Field { field: String, origin: Origin, msg: String },
    #[error("config line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: Origin,
}

/// The resolved key → value map of one command.
#[derive(Clone, Debug)]
pub struct Settings {
    command: String,
    values: BTreeMap<String, Entry>,
}

impl Settings {
    /// Defaults of `command`; every other key is rejected later on.
    pub fn for_command(command: &str) -> Result<Self, ConfigError> {
        let defs = defaults(command).ok_or_else(|| ConfigError::Other(format!("unknown command `{command}`")))?;
        let values = defs.iter().map(|(k, v)| (k.to_string(), Entry { value: v.to_string(), origin: Origin::Default })).collect();
        Ok(Settings { command: command.into(), values })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn set(&mut self, key: &str, value: String, origin: Origin) -> Result<(), ConfigError> {
        if key == "command" {
            if value != self.command {
                return Err(ConfigError::Field { field: key.into(), origin, msg: format!("is `{value}` but the command is `{}`", self.command) });
            }
            return Ok(());
        }
        match self.values.get_mut(key) {
            Some(e) => {
                *e = Entry { value, origin };
                Ok(())
            }
            None => Err(ConfigError::Field { field: key.into(), origin, msg: format!("unknown for `{}`", self.command) }),
        }
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Line { line, msg: format!("expected key=value, got `{body}`") })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Line { line, msg: "empty key".into() });
            }
            self.set(k, v.trim().to_string(), Origin::File { line })?;
        }
        Ok(())
    }

    /// A flat JSON object; arrays become comma lists.
    pub fn apply_json(&mut self, text: &str) -> Result<(), ConfigError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Other(format!("json override: {e}")))?;
        let obj = v.as_object().ok_or_else(|| ConfigError::Other("json override: top level must be an object".into()))?;
        for (k, v) in obj {
            let s = scalar(v).ok_or_else(|| ConfigError::Field { field: k.clone(), origin: Origin::Json, msg: "must be a string, number, bool or flat array".into() })?;
            self.set(k, s, Origin::Json)?;
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, pairs: Vec<(&'static str, String)>) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            self.set(k, v, Origin::Flag)?;
        }
        Ok(())
    }

    pub fn load_json(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Other(format!("{}: {e}", path.display())))?;
        self.apply_json(&text)
    }

    fn entry(&self, key: &str) -> &Entry {
        self.values.get(key).unwrap_or_else(|| panic!("`{key}` is not a setting of `{}`", self.command))
    }

    pub fn bad(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Field { field: key.into(), origin: self.entry(key).origin.clone(), msg: msg.into() }
    }

    pub fn str(&self, key: &str) -> &str {
        &self.entry(key).value
    }

    /// A required value: empty means unset.
    pub fn required(&self, key: &str) -> Result<&str, ConfigError> {
        let v = self.str(key);
        if v.is_empty() {
            return Err(self.bad(key, "is required"));
        }
        Ok(v)
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.required(key)?;
        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.bad(key, format!("expected a number, got `{v}`")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| self.bad(key, format!("expected a non-negative integer, got `{v}`")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| self.bad(key, format!("expected a non-negative integer, got `{v}`")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.required(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(self.bad(key, format!("expected true/false, got `{v}`"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.required(key)?;
        v.split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.bad(key, format!("expected a comma-separated list of numbers, got `{v}`")))
    }

    /// A point given by `dim` comma-separated coordinates.
    pub fn point(&self, key: &str, dim: Dim) -> Result<Point, ConfigError> {
        let c = self.f64_list(key)?;
        if c.len() != dim.n() {
            return Err(self.bad(key, format!("expected {} coordinates, got {}", dim.n(), c.len())));
        }
        let mut p = Point::zeros();
        for (i, x) in c.into_iter().enumerate() {
            p[i] = x;
        }
        Ok(p)
    }

    pub fn choice<'a>(&'a self, key: &str, allowed: &[&str]) -> Result<&'a str, ConfigError> {
        let v = self.required(key)?;
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(self.bad(key, format!("expected one of {}, got `{v}`", allowed.join("|"))))
        }
    }

    /// `key=value` for every setting, sorted, for output headers.
    pub fn header_lines(&self) -> Vec<String> {
        self.values.iter().map(|(k, e)| format!("{k}={}", e.value)).collect()
    }
}

fn scalar(v: &serde_json::Value) -> Option<String> {
    use serde_json::Value;
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Array(a) => a.iter().map(|x| match x {
            Value::Array(_) | Value::Object(_) => None,
            x => scalar(x),
        }).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
        _ => None,
    }
}

// Samples, seed and Per_s domain shared by the Monte Carlo commands. The seed
// has no default: runs are reproducible only from an explicit one.
const SAMPLING: &[(&str, &str)] = &[("s", "0.5"), ("n", "1000000"), ("seed", ""), ("r_near", "auto"), ("r_far", "auto"), ("alpha_reg", "1")];

/// All physical and numerical defaults, per command.
pub fn defaults(command: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let mut v: Vec<(&str, &str)> = vec![("out", ""), ("format", "auto")];
    let shape = [("shape", "cone2d"), ("d", "1"), ("eps", "0.01"), ("facets", "16"), ("n_az", "64"), ("n_rad", "16"), ("radius", "1"),
        ("depth", "0.05"), ("width", "0.3"), ("center", "0.3"), ("h", "0.01"), ("waist", "0.2")];
    match command {
        "curvature" => {
            v.extend(SAMPLING);
            v.extend(shape);
            v.extend([("z", "-0.5,0.5"), ("flip_normal", "false"), ("expect", "any")]);
        }
        "area" => {
            v.extend(SAMPLING);
            v.extend(shape);
            v.extend([("shape", "circle"), ("facets", "512"), ("omega_radius", "3"), ("oracle", "none")]);
        }
        "cone-scan" => {
            v.extend(SAMPLING);
            v.extend([("d", "0.5,1,2"), ("points", "5")]);
        }
        "barrier-scan" => {
            v.extend(SAMPLING);
            v.extend([("dim", "2"), ("eps", "1e-2,1e-3,1e-4,1e-5"), ("bound_factor", "1.05"), ("mesh_h", "5e-4"), ("mesh_eta", "1e-6")]);
        }
        "probe" => {
            v.extend(SAMPLING);
            v.extend(shape);
            v.extend([("shape", "dented2d"), ("probe", "plane"), ("axis", "0,1"), ("direction", "1"), ("ball_radius", "0.5"),
                ("ball_height", "0.6"), ("expect", "any")]);
        }
        "flow" => {
            v.extend([("s", "0.5"), ("seed", ""), ("d", ""), ("init", "wall-chords"), ("dt_safety", "0.5"), ("h_target", "0.02"),
                ("max_steps", "4000"), ("stop_tol", "1e-3"), ("merge", "auto"), ("energy_lines", "4000"), ("audit_points", "10"),
                ("audit_samples", "200000"), ("expect", "any")]);
        }
        "limit-scan" => {
            v.extend(SAMPLING);
            v.extend([("shape", "segment"), ("facets", "512"), ("s_list", "0.5,0.7,0.9"), ("omega_radius", "3")]);
        }
        _ => return None,
    }
    // later entries win (command-specific overrides of the shared ones)
    let mut seen = BTreeMap::new();
    for (k, d) in v {
        seen.insert(k, d);
    }
    Some(seen.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering_and_origins() {
        let mut s = Settings::for_command("curvature").unwrap();
        s.apply_text("# comment\nd = 2\n\nseed=5 # trailing\n").unwrap();
        s.apply_json(r#"{"d": 0.5, "z": [0.1, 0.2]}"#).unwrap();
        s.apply_flags(vec![("seed", "9".into())]).unwrap();
        assert_eq!(s.f64("d").unwrap(), 0.5);
        assert_eq!(s.str("z"), "0.1,0.2");
        assert_eq!(s.u64("seed").unwrap(), 9);
        assert_eq!(s.entry("d").origin, Origin::Json);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let mut s = Settings::for_command("curvature").unwrap();
        let e = s.apply_text("d=1\nnonsense\n").unwrap_err();
        assert_eq!(e.to_string(), "config line 2: expected key=value, got `nonsense`");
        let e = s.apply_text("bogus=1").unwrap_err();
        assert!(e.to_string().contains("field `bogus`"), "{e}");
        s.apply_text("\n\nd=abc").unwrap();
        assert_eq!(s.f64("d").unwrap_err().to_string(), "config line 3: field `d`: expected a number, got `abc`");
        assert!(s.u64("seed").unwrap_err().to_string().contains("is required"));
    }

    #[test]
    fn command_key_must_match() {
        let mut s = Settings::for_command("flow").unwrap();
        assert!(s.apply_text("command=flow").is_ok());
        assert!(s.apply_text("command=area").is_err());
    }
}
