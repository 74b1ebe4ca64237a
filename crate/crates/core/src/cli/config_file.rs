//! `key = value` files with `[section]` headers. Keys before the first
//! header are shared by every section.

use std::collections::BTreeMap;

use super::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub shared: Vec<(String, String)>,
    pub sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = Self::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Config(format!("line {}: unclosed section", i + 1)))?
                    .trim()
                    .to_string();
                if file.sections.contains_key(&name) {
                    return Err(CliError::Config(format!(
                        "line {}: repeated section [{name}]",
                        i + 1
                    )));
                }
                file.sections.insert(name.clone(), Vec::new());
                current = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", i + 1))
            })?;
            let pair = (key.trim().to_string(), value.trim().to_string());
            if pair.0.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            match &current {
                Some(name) => file.sections.get_mut(name).expect("section exists").push(pair),
                None => file.shared.push(pair),
            }
        }
        Ok(file)
    }

    /// Shared pairs followed by those of `section`, so section values win.
    pub fn pairs_for(&self, section: &str) -> Option<Vec<(String, String)>> {
        let own = self.sections.get(section)?;
        Some(self.shared.iter().chain(own).cloned().collect())
    }

    pub fn lookup<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
        pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_shared_keys() {
        let text = "seed = 3\n# comment\n[two-point]\ngraph = p2 # inline\nsamples=10\n\n[cap-law]\nseed = 9\n";
        let f = ConfigFile::parse(text).unwrap();
        let tp = f.pairs_for("two-point").unwrap();
        assert_eq!(ConfigFile::lookup(&tp, "seed"), Some("3"));
        assert_eq!(ConfigFile::lookup(&tp, "graph"), Some("p2"));
        let cl = f.pairs_for("cap-law").unwrap();
        assert_eq!(ConfigFile::lookup(&cl, "seed"), Some("9"));
        assert!(f.pairs_for("one-arm").is_none());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("[open\n").is_err());
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert!(ConfigFile::parse("[a]\n[a]\n").is_err());
        assert!(ConfigFile::parse(" = 3\n").is_err());
    }
}
