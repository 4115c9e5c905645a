use std::collections::HashMap;

use crate::data::COUNTRY_ALIASES_CSV;

/// Matching key: trimmed, whitespace-collapsed, lowercase.
pub fn normalize(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Values that mean "no country recorded".
pub fn is_unknown(raw: &str) -> bool {
    matches!(normalize(raw).as_str(), "" | "unknown" | "n/a" | "none" | "-")
}

/// Maps aliases and ISO codes onto one matching key per country.
#[derive(Debug, Clone)]
pub struct CountryNames {
    aliases: HashMap<String, String>,
}

impl Default for CountryNames {
    fn default() -> Self {
        Self::from_csv(COUNTRY_ALIASES_CSV)
    }
}

impl CountryNames {
    /// Parses `alias,country` lines (header optional).
    pub fn from_csv(raw: &str) -> Self {
        let aliases = raw
            .lines()
            .filter_map(|l| l.split_once(','))
            .filter(|(alias, _)| !alias.eq_ignore_ascii_case("alias"))
            .map(|(alias, country)| (normalize(alias), normalize(country)))
            .collect();
        CountryNames { aliases }
    }

    pub fn key(&self, raw: &str) -> String {
        let n = normalize(raw);
        self.aliases.get(&n).cloned().unwrap_or(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_and_codes_collapse() {
        let names = CountryNames::default();
        assert_eq!(names.key("USA"), "united states");
        assert_eq!(names.key("  United   States "), "united states");
        assert_eq!(names.key("us"), "united states");
        assert_eq!(names.key("RUS"), "russia");
        assert_eq!(names.key("Russian Federation"), "russia");
        assert_eq!(names.key("Atlantis"), "atlantis");
        assert!(is_unknown(" N/A "));
        assert!(!is_unknown("Israel"));
    }
}
