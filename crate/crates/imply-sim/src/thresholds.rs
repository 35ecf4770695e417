//! Logic threshold schemes over the normalized device state.
//!
//! A scheme defines input and output bands like a conventional logic
//! family: `s >= s_IH` reads as input '1', `s <= s_IL` as input '0', and
//! the open interval between them is undefined. Outputs use (s_OL, s_OH).

use crate::device::MemristorParams;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    /// Single cutoff at one half for every threshold.
    Half,
    /// Thirds scheme, stored at the conventional three-decimal values.
    Thirds,
    /// Normalized 5 V TTL levels.
    Ttl,
}

impl SchemeId {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Half => "1/2",
            SchemeId::Thirds => "1/3",
            SchemeId::Ttl => "ttl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1/2" | "half" => Ok(SchemeId::Half),
            "1/3" | "thirds" => Ok(SchemeId::Thirds),
            "ttl" | "TTL" => Ok(SchemeId::Ttl),
            other => Err(Error::InvalidConfig(format!(
                "unknown threshold scheme '{other}' (expected 1/2, 1/3 or ttl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScheme {
    pub s_ol: f64,
    pub s_il: f64,
    pub s_ih: f64,
    pub s_oh: f64,
    /// When true, states exactly on a threshold are undefined instead of
    /// defined. Default false: boundary equality counts as a valid level.
    pub strict_boundaries: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
}

impl ThresholdScheme {
    pub fn preset(id: SchemeId) -> Self {
        let (s_ol, s_il, s_ih, s_oh) = match id {
            SchemeId::Half => (0.5, 0.5, 0.5, 0.5),
            SchemeId::Thirds => (0.333, 0.333, 0.667, 0.667),
            SchemeId::Ttl => (0.08, 0.16, 0.40, 0.48),
        };
        Self {
            s_ol,
            s_il,
            s_ih,
            s_oh,
            strict_boundaries: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.s_ol
            && self.s_ol <= self.s_il
            && self.s_il <= self.s_ih
            && self.s_ih <= self.s_oh
            && self.s_oh <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "thresholds must satisfy 0 <= s_OL <= s_IL <= s_IH <= s_OH <= 1".into(),
            ))
        }
    }

    fn band(&self, role: Role) -> (f64, f64) {
        match role {
            Role::Input => (self.s_il, self.s_ih),
            Role::Output => (self.s_ol, self.s_oh),
        }
    }

    /// Classify a normalized state: Some(true) = '1', Some(false) = '0',
    /// None = undefined. The high test runs first so the degenerate
    /// all-equal scheme still assigns every state a value.
    pub fn classify(&self, s: f64, role: Role) -> Option<bool> {
        let (lo, hi) = self.band(role);
        if self.strict_boundaries {
            if s > hi {
                Some(true)
            } else if s < lo {
                Some(false)
            } else {
                None
            }
        } else if s >= hi {
            Some(true)
        } else if s <= lo {
            Some(false)
        } else {
            None
        }
    }

    /// Resistance images of the four thresholds under a device's nominal
    /// linear map, in scheme order (OL, IL, IH, OH). Because the map is
    /// decreasing in s, R_OL is the largest image.
    pub fn r_images(&self, params: &MemristorParams) -> [f64; 4] {
        let r = |s: f64| params.r_of_w(params.w_of_s(s));
        [r(self.s_ol), r(self.s_il), r(self.s_ih), r(self.s_oh)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ttl_images_at_nominal() {
        let scheme = ThresholdScheme::preset(SchemeId::Ttl);
        let p = MemristorParams::nominal();
        let [r_ol, r_il, r_ih, r_oh] = scheme.r_images(&p);
        assert!((r_ol - 920_800.0).abs() < 0.5);
        assert!((r_il - 841_600.0).abs() < 0.5);
        assert!((r_ih - 604_000.0).abs() < 0.5);
        assert!((r_oh - 524_800.0).abs() < 0.5);
    }

    #[test]
    fn half_scheme_has_no_undefined_states() {
        let scheme = ThresholdScheme::preset(SchemeId::Half);
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            assert!(scheme.classify(s, Role::Input).is_some());
            assert!(scheme.classify(s, Role::Output).is_some());
        }
    }

    #[test]
    fn boundary_equality_is_defined_by_default() {
        let scheme = ThresholdScheme::preset(SchemeId::Ttl);
        assert_eq!(scheme.classify(0.40, Role::Input), Some(true));
        assert_eq!(scheme.classify(0.16, Role::Input), Some(false));
        let strict = ThresholdScheme {
            strict_boundaries: true,
            ..scheme
        };
        assert_eq!(strict.classify(0.40, Role::Input), None);
    }
}
