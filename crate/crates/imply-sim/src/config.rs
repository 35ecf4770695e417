//! Flat key/value parameter documents.
//!
//! One document per concern (devices, gate drive, sweep, crossbar), each a
//! plain text file of `key = value` lines with `#` comments. Values carry
//! an optional unit token which must match the key's declared unit; metric
//! prefixes scale the number, so `t_step = 15 us` and `t_step = 1.5e-5 s`
//! are the same setting. Loaders start from a caller-supplied base (the
//! nominal defaults) and apply only the keys present, which gives the
//! precedence chain CLI flag > file > built-in default its middle layer.
//!
//! Device documents address the two gate devices with `p.` / `q.`
//! prefixes; an unprefixed key sets both. Example:
//!
//! ```text
//! # deepen Q's set threshold by 10%
//! q.v_on = -0.77 V
//! r_on   = 10 kohm
//! ```

use crate::crossbar::{CrossbarConfig, Placement, UnselectedPolicy};
use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::gate::{GateConfig, ReadoutSense};
use crate::sweep::Family;
use crate::thresholds::SchemeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Volt,
    Ohm,
    Second,
    NmPerSecond,
    Nm,
    Dimensionless,
}

impl Unit {
    fn name(&self) -> &'static str {
        match self {
            Unit::Volt => "V",
            Unit::Ohm => "ohm",
            Unit::Second => "s",
            Unit::NmPerSecond => "nm/s",
            Unit::Nm => "nm",
            Unit::Dimensionless => "(none)",
        }
    }

    /// Scale factor of a unit token, or None when the token does not
    /// denote this unit.
    fn scale(&self, token: &str) -> Option<f64> {
        match self {
            Unit::Volt => match token {
                "V" => Some(1.0),
                "mV" => Some(1e-3),
                "uV" | "µV" => Some(1e-6),
                _ => None,
            },
            // Resistance prefixes stay case-sensitive: lowercasing would
            // collapse mega into milli.
            Unit::Ohm => match token {
                "ohm" | "Ohm" => Some(1.0),
                "kohm" | "kOhm" => Some(1e3),
                "Mohm" | "MOhm" => Some(1e6),
                "Gohm" | "GOhm" => Some(1e9),
                _ => None,
            },
            Unit::Second => match token {
                "s" => Some(1.0),
                "ms" => Some(1e-3),
                "us" | "µs" => Some(1e-6),
                "ns" => Some(1e-9),
                _ => None,
            },
            Unit::NmPerSecond => (token == "nm/s").then_some(1.0),
            Unit::Nm => (token == "nm").then_some(1.0),
            Unit::Dimensionless => None,
        }
    }
}

/// One parsed `key = value` line.
#[derive(Debug, Clone)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Split a document into entries; no key interpretation yet.
pub fn parse_document(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(Error::ConfigParse {
            line,
            msg: "expected 'key = value'".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigParse {
                line,
                msg: "empty key or value".into(),
            });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(entries)
}

fn parse_number(entry: &Entry, unit: Unit) -> Result<f64> {
    let mut parts = entry.value.split_whitespace();
    let number = parts.next().unwrap_or("");
    let value: f64 = number.parse().map_err(|_| Error::ConfigParse {
        line: entry.line,
        msg: format!("'{number}' is not a number (key {})", entry.key),
    })?;
    match parts.next() {
        None => Ok(value),
        Some(token) => match unit.scale(token) {
            Some(scale) => Ok(value * scale),
            None => Err(Error::ConfigParse {
                line: entry.line,
                msg: format!(
                    "unit '{token}' does not match {} expected for key {}",
                    unit.name(),
                    entry.key
                ),
            }),
        },
    }
}

fn parse_integer(entry: &Entry) -> Result<u64> {
    entry.value.parse().map_err(|_| Error::ConfigParse {
        line: entry.line,
        msg: format!("'{}' is not an integer (key {})", entry.value, entry.key),
    })
}

/// Comma-separated bare numbers (lists carry no unit tokens).
fn parse_list(entry: &Entry) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| Error::ConfigParse {
                line: entry.line,
                msg: format!("'{}' is not a number in list {}", part.trim(), entry.key),
            })
        })
        .collect()
}

fn apply_device_key(dev: &mut MemristorParams, entry: &Entry, key: &str) -> Result<bool> {
    let unit = match key {
        "v_on" | "v_off" => Unit::Volt,
        "r_on" | "r_off" => Unit::Ohm,
        "k_on" | "k_off" => Unit::NmPerSecond,
        "a_on" | "a_off" | "w_c" | "w_on" | "w_off" => Unit::Nm,
        "alpha_on" | "alpha_off" => Unit::Dimensionless,
        _ => return Ok(false),
    };
    if key.starts_with("alpha") {
        let v = parse_integer(entry)? as u32;
        if key == "alpha_on" {
            dev.alpha_on = v;
        } else {
            dev.alpha_off = v;
        }
        return Ok(true);
    }
    let v = parse_number(entry, unit)?;
    match key {
        "v_on" => dev.v_on = v,
        "v_off" => dev.v_off = v,
        "r_on" => dev.r_on = v,
        "r_off" => dev.r_off = v,
        "k_on" => dev.k_on = v,
        "k_off" => dev.k_off = v,
        "a_on" => dev.a_on = v,
        "a_off" => dev.a_off = v,
        "w_c" => dev.w_c = v,
        "w_on" => dev.w_on = v,
        "w_off" => dev.w_off = v,
        _ => unreachable!(),
    }
    Ok(true)
}

/// Load a device document on top of a base parameter set. Returns the two
/// gate devices; both are validated.
pub fn load_devices(
    text: &str,
    base: &MemristorParams,
) -> Result<(MemristorParams, MemristorParams)> {
    let mut p = *base;
    let mut q = *base;
    for entry in parse_document(text)? {
        let (to_p, to_q, key) = if let Some(rest) = entry.key.strip_prefix("p.") {
            (true, false, rest)
        } else if let Some(rest) = entry.key.strip_prefix("q.") {
            (false, true, rest)
        } else {
            (true, true, entry.key.as_str())
        };
        let key = key.to_string();
        let mut known = true;
        if to_p {
            known = apply_device_key(&mut p, &entry, &key)?;
        }
        if to_q && known {
            known = apply_device_key(&mut q, &entry, &key)?;
        }
        if !known {
            return Err(Error::UnknownKey(format!(
                "'{}' (devices document, line {})",
                entry.key, entry.line
            )));
        }
    }
    p.validate()?;
    q.validate()?;
    Ok((p, q))
}

/// Load only the unprefixed keys of a devices document: the family
/// baseline shared by both devices. `p.`/`q.` entries are skipped here;
/// commands that vary the devices themselves reject them up front via
/// [`reject_per_device_keys`].
pub fn load_baseline(text: &str, base: &MemristorParams) -> Result<MemristorParams> {
    let mut dev = *base;
    for entry in parse_document(text)? {
        if entry.key.starts_with("p.") || entry.key.starts_with("q.") {
            continue;
        }
        let key = entry.key.clone();
        if !apply_device_key(&mut dev, &entry, &key)? {
            return Err(Error::UnknownKey(format!(
                "'{}' (devices document, line {})",
                entry.key, entry.line
            )));
        }
    }
    dev.validate()?;
    Ok(dev)
}

/// Error out when a devices document addresses P or Q individually. Sweep
/// commands own the per-device values, so such keys would be silently
/// overwritten; better to refuse them.
pub fn reject_per_device_keys(text: &str) -> Result<()> {
    for entry in parse_document(text)? {
        if entry.key.starts_with("p.") || entry.key.starts_with("q.") {
            return Err(Error::InvalidConfig(format!(
                "per-device key '{}' (line {}) conflicts with a command that varies \
                 the devices itself; set family-wide keys only",
                entry.key, entry.line
            )));
        }
    }
    Ok(())
}

/// Load a gate drive document on top of a base configuration. Validation
/// against the device thresholds is the caller's step, since it needs the
/// final devices.
pub fn load_gate(text: &str, base: &GateConfig) -> Result<GateConfig> {
    let mut cfg = *base;
    for entry in parse_document(text)? {
        match entry.key.as_str() {
            "v_set" => cfg.v_set = parse_number(&entry, Unit::Volt)?,
            "v_cond" => cfg.v_cond = parse_number(&entry, Unit::Volt)?,
            "v_reset" => cfg.v_reset = parse_number(&entry, Unit::Volt)?,
            "v_read" => cfg.v_read = parse_number(&entry, Unit::Volt)?,
            "r_g" => cfg.r_g = parse_number(&entry, Unit::Ohm)?,
            "t_step" => cfg.t_step = parse_number(&entry, Unit::Second)?,
            "switch_on" => cfg.switch_on = parse_number(&entry, Unit::Ohm)?,
            "switch_off" => cfg.switch_off = parse_number(&entry, Unit::Ohm)?,
            "readout_sense" => {
                cfg.readout_sense = match entry.value.as_str() {
                    "driver_current" => ReadoutSense::DriverCurrent,
                    "gate_resistor_voltage" => ReadoutSense::GateResistorVoltage,
                    other => {
                        return Err(Error::ConfigParse {
                            line: entry.line,
                            msg: format!(
                                "readout_sense '{other}' (driver_current|gate_resistor_voltage)"
                            ),
                        })
                    }
                }
            }
            _ => {
                return Err(Error::UnknownKey(format!(
                    "'{}' (gate document, line {})",
                    entry.key, entry.line
                )))
            }
        }
    }
    Ok(cfg)
}

/// Sweep document fields; everything optional so CLI flags can fill the
/// rest.
#[derive(Debug, Clone, Default)]
pub struct SweepDoc {
    pub family: Option<Family>,
    pub levels: Option<Vec<f64>>,
    pub scheme: Option<SchemeId>,
    /// Absolute value lists keyed by axis position within the family.
    pub absolute: [Option<Vec<f64>>; 4],
}

/// Load a sweep document. Absolute per-axis lists use the parameter name
/// with a `.values` suffix, for example `v_on_q.values = -0.9, -0.7, -0.5`.
pub fn load_sweep(text: &str) -> Result<SweepDoc> {
    let mut doc = SweepDoc::default();
    let mut absolute_pending: Vec<(Entry, String)> = Vec::new();
    for entry in parse_document(text)? {
        match entry.key.as_str() {
            "family" => doc.family = Some(Family::parse(&entry.value)?),
            "scheme" => doc.scheme = Some(SchemeId::parse(&entry.value)?),
            "levels" => doc.levels = Some(parse_list(&entry)?),
            key => match key.strip_suffix(".values") {
                Some(param) => absolute_pending.push((entry.clone(), param.to_string())),
                None => {
                    return Err(Error::UnknownKey(format!(
                        "'{}' (sweep document, line {})",
                        entry.key, entry.line
                    )))
                }
            },
        }
    }
    // Axis positions depend on the family, so absolute lists resolve last.
    for (entry, param) in absolute_pending {
        let family = doc.family.ok_or(Error::ConfigParse {
            line: entry.line,
            msg: format!("'{param}.values' needs 'family' set earlier in the document"),
        })?;
        let axis = family
            .param_names()
            .iter()
            .position(|n| *n == param)
            .ok_or(Error::ConfigParse {
                line: entry.line,
                msg: format!(
                    "'{param}' is not a parameter of the {} family",
                    family.as_str()
                ),
            })?;
        doc.absolute[axis] = Some(parse_list(&entry)?);
    }
    Ok(doc)
}

/// Crossbar document on top of a base configuration; an optional placement
/// list ships in the same file.
pub fn load_crossbar(
    text: &str,
    base: &CrossbarConfig,
) -> Result<(CrossbarConfig, Option<Vec<Placement>>)> {
    let mut cfg = *base;
    let mut placements = None;
    for entry in parse_document(text)? {
        match entry.key.as_str() {
            "n" | "size" => cfg.n = parse_integer(&entry)? as usize,
            "line_r" => cfg.line_r = parse_number(&entry, Unit::Ohm)?,
            "switch_on" => cfg.switch_on = parse_number(&entry, Unit::Ohm)?,
            "switch_off" => cfg.switch_off = parse_number(&entry, Unit::Ohm)?,
            "unselected" => cfg.unselected = UnselectedPolicy::parse(&entry.value)?,
            "sigma" => cfg.init_sigma = parse_number(&entry, Unit::Dimensionless)?,
            "seed" => cfg.seed = parse_integer(&entry)?,
            "placements" => {
                let list: Result<Vec<Placement>> = entry
                    .value
                    .split(';')
                    .map(|s| Placement::parse(s.trim()))
                    .collect();
                placements = Some(list?);
            }
            _ => {
                return Err(Error::UnknownKey(format!(
                    "'{}' (crossbar document, line {})",
                    entry.key, entry.line
                )))
            }
        }
    }
    cfg.validate()?;
    Ok((cfg, placements))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_document_applies_prefixes_and_units() {
        let nominal = MemristorParams::nominal();
        let text = "\
# only Q's set threshold moves
q.v_on = -770 mV
r_on = 10 kohm   # both devices
p.k_on = 1.1e7 nm/s
";
        let (p, q) = load_devices(text, &nominal).unwrap();
        assert_eq!(p.v_on, nominal.v_on);
        assert!((q.v_on - (-0.77)).abs() < 1e-15);
        assert_eq!(p.r_on, 10_000.0);
        assert_eq!(q.r_on, 10_000.0);
        assert_eq!(p.k_on, 1.1e7);
        assert_eq!(q.k_on, nominal.k_on);
    }

    #[test]
    fn wrong_unit_and_unknown_key_are_rejected() {
        let nominal = MemristorParams::nominal();
        let err = load_devices("v_on = -0.7 ohm\n", &nominal).unwrap_err();
        assert!(err.to_string().contains("does not match V"), "{err}");
        let err = load_devices("r_onn = 10 kohm\n", &nominal).unwrap_err();
        assert!(matches!(err, Error::UnknownKey(_)));
        let err = load_devices("v_on -0.7\n", &nominal).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn gate_document_scales_time_units() {
        let base = GateConfig::nominal();
        let cfg = load_gate("t_step = 15 us\nr_g = 40 kohm\n", &base).unwrap();
        assert!((cfg.t_step - 15e-6).abs() < 1e-18);
        assert_eq!(cfg.r_g, 40_000.0);
    }

    #[test]
    fn sweep_document_resolves_absolute_axis_lists() {
        let doc = load_sweep(
            "family = v\nscheme = ttl\nlevels = -0.1, 0, 0.1\nv_on_q.values = -0.9, -0.7\n",
        )
        .unwrap();
        assert_eq!(doc.family, Some(Family::Voltage));
        assert_eq!(doc.scheme, Some(SchemeId::Ttl));
        assert_eq!(doc.levels.as_deref(), Some(&[-0.1, 0.0, 0.1][..]));
        assert_eq!(doc.absolute[2].as_deref(), Some(&[-0.9, -0.7][..]));
        let err = load_sweep("family = v\nr_on_p.values = 1, 2\n").unwrap_err();
        assert!(err.to_string().contains("not a parameter"));
    }

    #[test]
    fn crossbar_document_parses_placements() {
        let base = CrossbarConfig::nominal();
        let (cfg, placements) =
            load_crossbar("n = 8\nunselected = grounded\nplacements = 0,0/7,7; 7,7/0,0\n", &base)
                .unwrap();
        assert_eq!(cfg.n, 8);
        assert_eq!(cfg.unselected, UnselectedPolicy::Grounded);
        let placements = placements.unwrap();
        assert_eq!(placements.len(), 2);
        assert_eq!(placements[0].p, (0, 0));
        assert_eq!(placements[1].q, (0, 0));
    }
}
