use std::fmt;

/// Which constraint families a relaxation enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RelaxationLevel {
    pub psd: bool,
    pub diag: bool,
    pub rlt: bool,
    pub tri: bool,
    pub etri1: bool,
    pub etri2: bool,
    pub etri3: bool,
    pub soc: bool,
}

impl RelaxationLevel {
    pub fn psd_diag() -> Self {
        RelaxationLevel {
            psd: true,
            diag: true,
            ..Default::default()
        }
    }

    pub fn psd_rlt() -> Self {
        RelaxationLevel {
            rlt: true,
            ..Self::psd_diag()
        }
    }

    pub fn psd_rlt_tri() -> Self {
        RelaxationLevel {
            tri: true,
            ..Self::psd_rlt()
        }
    }

    pub fn etri1() -> Self {
        RelaxationLevel {
            etri1: true,
            ..Self::psd_rlt_tri()
        }
    }

    pub fn etri123() -> Self {
        RelaxationLevel {
            etri2: true,
            etri3: true,
            ..Self::etri1()
        }
    }

    pub fn soc() -> Self {
        RelaxationLevel {
            soc: true,
            ..Self::etri123()
        }
    }

    /// The presets from weakest to strongest.
    pub fn ladder() -> [RelaxationLevel; 6] {
        [
            Self::psd_diag(),
            Self::psd_rlt(),
            Self::psd_rlt_tri(),
            Self::etri1(),
            Self::etri123(),
            Self::soc(),
        ]
    }

    pub fn name(&self) -> String {
        let presets = [
            (Self::psd_diag(), "PSD+DIAG"),
            (Self::psd_rlt(), "PSD+RLT"),
            (Self::psd_rlt_tri(), "PSD+RLT+TRI"),
            (Self::etri1(), "+ETRI1"),
            (Self::etri123(), "+ETRI1/2/3"),
            (Self::soc(), "+SOC"),
        ];
        if let Some((_, name)) = presets.iter().find(|(l, _)| l == self) {
            return (*name).to_string();
        }
        let flags = [
            (self.psd, "PSD"),
            (self.diag, "DIAG"),
            (self.rlt, "RLT"),
            (self.tri, "TRI"),
            (self.etri1, "ETRI1"),
            (self.etri2, "ETRI2"),
            (self.etri3, "ETRI3"),
            (self.soc, "SOC"),
        ];
        let on: Vec<&str> = flags.iter().filter(|f| f.0).map(|f| f.1).collect();
        if on.is_empty() {
            "NONE".into()
        } else {
            on.join("+")
        }
    }

    /// Accepts the preset names (case-insensitive, with or without a leading
    /// `+`) and short aliases such as `tri`, `etri123`, `soc`.
    pub fn parse(s: &str) -> Option<RelaxationLevel> {
        let key: String = s
            .trim()
            .trim_start_matches('+')
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '+' | '/' | '-' | '_'))
            .collect();
        Some(match key.as_str() {
            "psddiag" | "diag" => Self::psd_diag(),
            "psdrlt" | "rlt" => Self::psd_rlt(),
            "psdrlttri" | "tri" => Self::psd_rlt_tri(),
            "etri1" => Self::etri1(),
            "etri123" => Self::etri123(),
            "soc" => Self::soc(),
            _ => return None,
        })
    }
}

impl fmt::Display for RelaxationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for level in RelaxationLevel::ladder() {
            assert_eq!(RelaxationLevel::parse(&level.name()), Some(level));
        }
        assert_eq!(RelaxationLevel::parse("etri1/2/3"), Some(RelaxationLevel::etri123()));
        assert_eq!(RelaxationLevel::parse("nope"), None);
    }
}
