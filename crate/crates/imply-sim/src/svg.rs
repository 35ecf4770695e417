//! SVG renderers for sweep results and operating areas.
//!
//! Two chart types: the four-square grid, which shows every tuple of a
//! variation sweep as a group of four partially filled squares (P's
//! parameter pair on the left, Q's on the right, fill encoding the deviation
//! level, outline color encoding the verdict); and the operating-area chart,
//! which draws constraint boundary curves over a two-parameter plane with
//! the admissible region shaded and optional result bars along the axes.
//!
//! The documents are standalone and hand-assembled; the vocabulary used
//! here (rect, polyline, text) is small enough that a templating dependency
//! would be heavier than the output itself.

use std::fmt::Write as _;

use crate::constraints::{OperatingArea, ParamId};
use crate::device::MemristorParams;
use crate::error::{Error, Result};
use crate::sweep::{Family, ParamTuple, SweepOutcome, VariationSpec};
use crate::thresholds::ThresholdScheme;

const GREEN: &str = "#2e8b57";
const RED: &str = "#cc3333";
const ORANGE: &str = "#e8932c";
const FILL: &str = "#4a6fa5";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Compact number label: engineering suffix above 1e3, plain decimal
/// otherwise, trailing zeros trimmed.
fn fmt_si(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    let (scaled, suffix) = if a >= 1e6 {
        (v / 1e6, "M")
    } else if a >= 1e3 {
        (v / 1e3, "k")
    } else if a < 0.01 {
        (v * 1e3, "m")
    } else {
        (v, "")
    };
    let mut s = format!("{scaled:.3}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    format!("{s}{suffix}")
}

fn family_label(family: Family) -> &'static str {
    match family {
        Family::Resistance => "resistance",
        Family::Voltage => "voltage",
        Family::Speed => "switching speed",
    }
}

/// Render a sweep as groups of four squares, one group per (tuple,
/// verdict) pair; both the single-gate and the crossbar sweeps feed this.
///
/// `delta` filters a multi-magnitude sweep down to the sub-grid whose
/// relative levels are in {-delta, 0, +delta}; `None` keeps every tuple.
/// Fill encodes the level's rank within the selected set of its axis (empty
/// = lowest, half = middle, full = highest); the group outline is green for
/// a correct tuple and red for a failed one. An empty selection still
/// yields a valid document.
pub fn render_four_square(
    items: &[(ParamTuple, bool)],
    spec: &VariationSpec,
    delta: Option<f64>,
) -> String {
    let matches = |f: Option<f64>| -> bool {
        match (delta, f) {
            (None, _) => true,
            // Absolute-valued axes carry no fraction; the magnitude filter
            // does not constrain them.
            (Some(_), None) => true,
            (Some(d), Some(f)) => {
                f.abs() < 1e-12 || (f.abs() - d).abs() < 1e-9
            }
        }
    };
    let selected: Vec<&(ParamTuple, bool)> = items
        .iter()
        .filter(|(tuple, _)| tuple.fractions.iter().all(|&f| matches(f)))
        .collect();

    // Rank of each surviving level index within its axis, for the fill
    // fraction. Axes keep their original index space.
    let mut kept_levels: [Vec<usize>; 4] = Default::default();
    for (axis, kept) in kept_levels.iter_mut().enumerate() {
        let n_levels = match &spec.absolute[axis] {
            Some(list) => list.len(),
            None => spec.levels.len(),
        };
        for li in 0..n_levels {
            let frac = if spec.absolute[axis].is_some() {
                None
            } else {
                Some(spec.levels[li])
            };
            if matches(frac) {
                kept.push(li);
            }
        }
    }
    let fill_frac = |axis: usize, li: usize| -> f64 {
        let kept = &kept_levels[axis];
        match (kept.iter().position(|&k| k == li), kept.len()) {
            (Some(_), 1) => 0.5,
            (Some(r), n) => r as f64 / (n - 1) as f64,
            (None, _) => 0.5,
        }
    };

    const SQ: f64 = 12.0;
    const SQ_GAP: f64 = 3.0;
    const PAIR_GAP: f64 = 8.0;
    const PAD: f64 = 5.0;
    const GROUP_GAP: f64 = 10.0;
    const MARGIN: f64 = 20.0;
    const HEADER: f64 = 46.0;
    let gw = 2.0 * PAD + 4.0 * SQ + 2.0 * SQ_GAP + PAIR_GAP;
    let gh = 2.0 * PAD + SQ;

    let n = selected.len();
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols.max(1));
    let width = 2.0 * MARGIN + cols as f64 * gw + (cols.saturating_sub(1)) as f64 * GROUP_GAP;
    let height =
        HEADER + MARGIN + rows as f64 * gh + (rows.saturating_sub(1)) as f64 * GROUP_GAP;
    let width = width.max(560.0);

    let failed = selected.iter().filter(|(_, ok)| !ok).count();
    let title = match delta {
        Some(d) => format!(
            "{} family, +/-{:.0}% deviation: {} tuples, {} failed",
            family_label(spec.family),
            d * 100.0,
            n,
            failed
        ),
        None => format!(
            "{} family: {} tuples, {} failed",
            family_label(spec.family),
            n,
            failed
        ),
    };
    let names = spec.family.param_names();

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(s, "<title>{}</title>", esc(&title));
    let _ = writeln!(
        s,
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"22\" font-size=\"15\">{}</text>",
        esc(&title)
    );
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"38\" font-size=\"11\" fill=\"#555\">squares: {} {} | {} {} \
         &#8212; fill empty/half/full = low/nominal/high, outline green = correct, red = \
         failed</text>",
        names[0], names[1], names[2], names[3]
    );

    for (gi, (tuple, ok)) in selected.iter().enumerate() {
        let gx = MARGIN + (gi % cols) as f64 * (gw + GROUP_GAP);
        let gy = HEADER + (gi / cols) as f64 * (gh + GROUP_GAP);
        let outline = if *ok { GREEN } else { RED };
        let _ = writeln!(
            s,
            "<rect x=\"{gx:.1}\" y=\"{gy:.1}\" width=\"{gw:.1}\" height=\"{gh:.1}\" rx=\"3\" \
             fill=\"none\" stroke=\"{outline}\" stroke-width=\"2\"/>"
        );
        for axis in 0..4 {
            let x = gx
                + PAD
                + axis as f64 * (SQ + SQ_GAP)
                + if axis >= 2 { PAIR_GAP - SQ_GAP } else { 0.0 };
            let y = gy + PAD;
            let f = fill_frac(axis, tuple.level_idx[axis]);
            let fh = SQ * f;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{SQ}\" height=\"{SQ}\" fill=\"white\"/>"
            );
            if fh > 0.0 {
                let _ = writeln!(
                    s,
                    "<rect x=\"{x:.1}\" y=\"{:.2}\" width=\"{SQ}\" height=\"{fh:.2}\" \
                     fill=\"{FILL}\"/>",
                    y + SQ - fh
                );
            }
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{SQ}\" height=\"{SQ}\" fill=\"none\" \
                 stroke=\"#333\" stroke-width=\"1\"/>"
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Simulation results along one parameter axis for the operating-area
/// overlay: the verdict at each explicitly simulated value of that
/// parameter, everything else held at its reference level.
#[derive(Debug, Clone)]
pub struct AxisBar {
    pub param: ParamId,
    /// (parameter value, tuple passed), ascending by value.
    pub levels: Vec<(f64, bool)>,
}

/// Build an overlay bar from sweep outcomes: pick the tuples that vary only
/// `param` (the other three axes at the level closest to nominal) and record
/// the verdict at each of its simulated values.
pub fn axis_bar_from_sweep(
    outcomes: &[SweepOutcome],
    spec: &VariationSpec,
    nominal: &MemristorParams,
    param: ParamId,
) -> Result<AxisBar> {
    let names = spec.family.param_names();
    let axis = names
        .iter()
        .position(|n| *n == param.as_str())
        .ok_or_else(|| {
            Error::AxisMismatch(format!(
                "parameter {} is not varied by the {} family sweep",
                param.as_str(),
                family_label(spec.family)
            ))
        })?;
    let lists = spec.value_lists(nominal);
    let (on_nom, off_nom) = spec.family.nominal_pair(nominal);
    let noms = [on_nom, off_nom, on_nom, off_nom];
    let reference: [usize; 4] = core::array::from_fn(|a| {
        let mut best = 0usize;
        for (i, &v) in lists[a].iter().enumerate() {
            if (v - noms[a]).abs() < (lists[a][best] - noms[a]).abs() {
                best = i;
            }
        }
        best
    });

    let mut levels = Vec::new();
    for (li, &value) in lists[axis].iter().enumerate() {
        let mut want = reference;
        want[axis] = li;
        let hit = outcomes.iter().find(|o| o.tuple.level_idx == want).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "sweep outcomes do not cover level {li} of {}",
                param.as_str()
            ))
        })?;
        levels.push((value, hit.correct));
    }
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(AxisBar { param, levels })
}

struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.x0) / (self.x1 - self.x0) * self.w
    }
    fn y(&self, v: f64) -> f64 {
        self.top + (self.y1 - v) / (self.y1 - self.y0) * self.h
    }
}

fn nominal_value(id: ParamId, nominal: &MemristorParams) -> f64 {
    match id {
        ParamId::VonP | ParamId::VonQ => nominal.v_on,
        ParamId::VoffP | ParamId::VoffQ => nominal.v_off,
        ParamId::RonP | ParamId::RonQ => nominal.r_on,
        ParamId::RoffP | ParamId::RoffQ => nominal.r_off,
    }
}

/// Render an operating area: shaded admissible region, one boundary curve
/// per constraint, dashed nominal lines, dotted threshold resistance levels
/// on resistance axes, and optional result bars along each axis (green =
/// simulated and passed, red = simulated and failed, orange = range between
/// simulated values). A bar whose parameter matches neither axis is a
/// config error.
pub fn render_operating_area(
    area: &OperatingArea,
    nominal: &MemristorParams,
    scheme: &ThresholdScheme,
    bars: &[AxisBar],
) -> Result<String> {
    for bar in bars {
        if bar.param != area.x_id && bar.param != area.y_id {
            return Err(Error::AxisMismatch(format!(
                "overlay parameter {} matches neither plot axis ({}, {})",
                bar.param.as_str(),
                area.x_id.as_str(),
                area.y_id.as_str()
            )));
        }
    }
    let nx = area.x_grid.len();
    let ny = area.y_grid.len();
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidConfig("operating area grid is degenerate".into()));
    }

    let legend_w = 190.0;
    let f = Frame {
        left: 96.0,
        top: 34.0,
        w: 560.0,
        h: 420.0,
        x0: area.x_grid[0],
        x1: area.x_grid[nx - 1],
        y0: area.y_grid[0],
        y1: area.y_grid[ny - 1],
    };
    let width = f.left + f.w + 18.0 + legend_w;
    let height = f.top + f.h + 78.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let title = format!(
        "operating area: {} vs {}",
        area.y_id.as_str(),
        area.x_id.as_str()
    );
    let _ = writeln!(s, "<title>{}</title>", esc(&title));
    let _ = writeln!(
        s,
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" font-size=\"15\">{}</text>",
        f.left,
        esc(&title)
    );

    // Region shading, merged into horizontal strips per grid row.
    let px = (area.x_grid[1] - area.x_grid[0]).abs();
    let py = (area.y_grid[1] - area.y_grid[0]).abs();
    let shade = |flags: &[bool], color: &str, opacity: f64, s: &mut String| {
        for iy in 0..ny {
            let mut ix = 0;
            while ix < nx {
                if !flags[area.idx(iy, ix)] {
                    ix += 1;
                    continue;
                }
                let start = ix;
                while ix < nx && flags[area.idx(iy, ix)] {
                    ix += 1;
                }
                let xa = (area.x_grid[start] - px / 2.0).max(f.x0);
                let xb = (area.x_grid[ix - 1] + px / 2.0).min(f.x1);
                let ya = (area.y_grid[iy] - py / 2.0).max(f.y0);
                let yb = (area.y_grid[iy] + py / 2.0).min(f.y1);
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                     fill=\"{color}\" fill-opacity=\"{opacity}\"/>",
                    f.x(xa),
                    f.y(yb),
                    f.x(xb) - f.x(xa),
                    f.y(ya) - f.y(yb)
                );
            }
        }
    };
    shade(&area.admissible, "#79c779", 0.45, &mut s);
    shade(&area.invalid, "#cccccc", 0.5, &mut s);

    // Threshold resistance levels on resistance axes.
    let images = scheme.r_images(nominal);
    let image_names = ["R(s_OL)", "R(s_IL)", "R(s_IH)", "R(s_OH)"];
    for (axis_id, vertical) in [(area.x_id, true), (area.y_id, false)] {
        if axis_id.unit() != "ohm" {
            continue;
        }
        for (r, name) in images.iter().zip(image_names) {
            let (lo, hi) = if vertical { (f.x0, f.x1) } else { (f.y0, f.y1) };
            if *r < lo || *r > hi {
                continue;
            }
            if vertical {
                let xp = f.x(*r);
                let _ = writeln!(
                    s,
                    "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" \
                     stroke=\"#888\" stroke-dasharray=\"2 3\"/>",
                    f.top,
                    f.top + f.h
                );
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#666\" font-size=\"9\">{name}</text>",
                    xp + 2.0,
                    f.top + 10.0
                );
            } else {
                let yp = f.y(*r);
                let _ = writeln!(
                    s,
                    "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{:.2}\" y2=\"{yp:.2}\" \
                     stroke=\"#888\" stroke-dasharray=\"2 3\"/>",
                    f.left,
                    f.left + f.w
                );
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#666\" font-size=\"9\">{name}</text>",
                    f.left + 4.0,
                    yp - 2.0
                );
            }
        }
    }

    // Nominal parameter values, dashed.
    let xn = nominal_value(area.x_id, nominal);
    if xn >= f.x0 && xn <= f.x1 {
        let xp = f.x(xn);
        let _ = writeln!(
            s,
            "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#444\" \
             stroke-dasharray=\"6 4\"/>",
            f.top,
            f.top + f.h
        );
    }
    let yn = nominal_value(area.y_id, nominal);
    if yn >= f.y0 && yn <= f.y1 {
        let yp = f.y(yn);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{:.2}\" y2=\"{yp:.2}\" stroke=\"#444\" \
             stroke-dasharray=\"6 4\"/>",
            f.left,
            f.left + f.w
        );
    }

    // Constraint boundary curves.
    for (i, pl) in area.polylines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = pl
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", f.x(*x), f.y(*y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>",
            pts.join(" ")
        );
    }

    // Result bars: a horizontal strip under the x axis and a vertical strip
    // left of the y axis. Solid segments mark simulated values, orange
    // fills the ranges in between.
    for bar in bars {
        if bar.levels.is_empty() {
            continue;
        }
        let horizontal = bar.param == area.x_id;
        let (lo, hi) = if horizontal { (f.x0, f.x1) } else { (f.y0, f.y1) };
        let to_px = |v: f64| if horizontal { f.x(v) } else { f.y(v) };
        let half = {
            let mut h = 0.012 * (hi - lo);
            for w in bar.levels.windows(2) {
                h = h.min((w[1].0 - w[0].0).abs() / 3.0);
            }
            h
        };
        let seg = |a: f64, b: f64, color: &str, s: &mut String| {
            let a = a.clamp(lo, hi);
            let b = b.clamp(lo, hi);
            if a >= b {
                return;
            }
            let (pa, pb) = (to_px(a), to_px(b));
            let (pmin, pmax) = (pa.min(pb), pa.max(pb));
            if horizontal {
                let _ = writeln!(
                    s,
                    "<rect x=\"{pmin:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"10\" \
                     fill=\"{color}\"/>",
                    f.top + f.h + 5.0,
                    pmax - pmin
                );
            } else {
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{pmin:.2}\" width=\"10\" height=\"{:.2}\" \
                     fill=\"{color}\"/>",
                    f.left - 16.0,
                    pmax - pmin
                );
            }
        };
        for w in bar.levels.windows(2) {
            seg(w[0].0 + half, w[1].0 - half, ORANGE, &mut s);
        }
        for &(v, ok) in &bar.levels {
            seg(v - half, v + half, if ok { GREEN } else { RED }, &mut s);
        }
    }

    // Axes: frame, ticks, labels.
    let _ = writeln!(
        s,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"#222\"/>",
        f.left, f.top, f.w, f.h
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let xp = f.x(xv);
        let _ = writeln!(
            s,
            "<line x1=\"{xp:.2}\" y1=\"{:.1}\" x2=\"{xp:.2}\" y2=\"{:.1}\" stroke=\"#222\"/>",
            f.top + f.h,
            f.top + f.h + 4.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{xp:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            f.top + f.h + 30.0,
            fmt_si(xv)
        );
        let yv = f.y0 + t * (f.y1 - f.y0);
        let yp = f.y(yv);
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{yp:.2}\" x2=\"{:.1}\" y2=\"{yp:.2}\" stroke=\"#222\"/>",
            f.left - 4.0,
            f.left
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            f.left - 22.0,
            yp + 4.0,
            fmt_si(yv)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{} ({})</text>",
        f.left + f.w / 2.0,
        f.top + f.h + 52.0,
        area.x_id.as_str(),
        area.x_id.unit()
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 16 {:.1})\">{} ({})</text>",
        f.top + f.h / 2.0,
        f.top + f.h / 2.0,
        area.y_id.as_str(),
        area.y_id.unit()
    );

    // Legend.
    let lx = f.left + f.w + 18.0;
    let mut ly = f.top + 6.0;
    let legend_line = |swatch: String, label: &str, s: &mut String, ly: &mut f64| {
        let _ = writeln!(s, "{swatch}");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 26.0,
            *ly + 4.0,
            esc(label)
        );
        *ly += 17.0;
    };
    legend_line(
        format!(
            "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"20\" height=\"10\" fill=\"#79c779\" \
             fill-opacity=\"0.45\"/>",
            ly - 5.0
        ),
        "admissible",
        &mut s,
        &mut ly,
    );
    for (i, pl) in area.polylines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        legend_line(
            format!(
                "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
                 stroke=\"{color}\" stroke-width=\"1.8\"/>",
                lx + 20.0
            ),
            &pl.constraint_id,
            &mut s,
            &mut ly,
        );
    }
    legend_line(
        format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"#444\" \
             stroke-dasharray=\"6 4\"/>",
            lx + 20.0
        ),
        "nominal value",
        &mut s,
        &mut ly,
    );
    if !bars.is_empty() {
        legend_line(
            format!(
                "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"20\" height=\"10\" fill=\"{GREEN}\"/>",
                ly - 5.0
            ),
            "simulated, passed",
            &mut s,
            &mut ly,
        );
        legend_line(
            format!(
                "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"20\" height=\"10\" fill=\"{RED}\"/>",
                ly - 5.0
            ),
            "simulated, failed",
            &mut s,
            &mut ly,
        );
        legend_line(
            format!(
                "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"20\" height=\"10\" fill=\"{ORANGE}\"/>",
                ly - 5.0
            ),
            "not explicitly simulated",
            &mut s,
            &mut ly,
        );
    }

    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{operating_area, ConstraintSet};
    use crate::gate::GateConfig;
    use crate::sweep::run_sweep;
    use crate::thresholds::SchemeId;

    fn item(level_idx: [usize; 4], fractions: [f64; 4], correct: bool) -> (ParamTuple, bool) {
        (
            ParamTuple {
                index: 0,
                level_idx,
                fractions: fractions.map(Some),
                values: [0.0; 4],
            },
            correct,
        )
    }

    #[test]
    fn four_square_encodes_levels_and_verdicts() {
        let spec =
            VariationSpec::three_level(Family::Voltage, 0.10, SchemeId::Ttl).unwrap();
        let items = vec![
            item([1, 1, 1, 1], [0.0; 4], true),
            item([0, 2, 1, 1], [-0.1, 0.1, 0.0, 0.0], false),
        ];
        let svg = render_four_square(&items, &spec, Some(0.10));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(GREEN) && svg.contains(RED));
        // One full square (level 2 of 3) in the failed group.
        assert!(svg.contains("height=\"12.00\""));
    }

    #[test]
    fn four_square_empty_list_is_valid() {
        let spec =
            VariationSpec::three_level(Family::Speed, 0.30, SchemeId::Ttl).unwrap();
        let svg = render_four_square(&[], &spec, None);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn four_square_filter_selects_matching_magnitude() {
        let spec = VariationSpec::new(
            Family::Voltage,
            vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            SchemeId::Ttl,
        )
        .unwrap();
        let inside = item([2, 2, 2, 3], [0.0, 0.0, 0.0, 0.1], true);
        let outside = item([2, 2, 2, 4], [0.0, 0.0, 0.0, 0.2], true);
        let svg = render_four_square(&[inside, outside], &spec, Some(0.10));
        assert!(svg.contains("1 tuples"));
    }

    #[test]
    fn area_render_rejects_mismatched_overlay_axis() {
        let nominal = MemristorParams::nominal();
        let cfg = GateConfig::nominal();
        let scheme = ThresholdScheme::preset(SchemeId::Ttl);
        let area = operating_area(
            ParamId::VonQ,
            (-1.0, -0.2),
            11,
            ParamId::RoffP,
            (2e5, 1.5e6),
            11,
            &nominal,
            &nominal,
            &nominal,
            &cfg,
            &scheme,
            ConstraintSet::All,
        )
        .unwrap();
        let bar = AxisBar {
            param: ParamId::VonP,
            levels: vec![(-0.7, true)],
        };
        let err = render_operating_area(&area, &nominal, &scheme, &[bar]).unwrap_err();
        assert!(err.to_string().contains("neither plot axis"));

        let svg = render_operating_area(&area, &nominal, &scheme, &[]).unwrap();
        assert!(svg.contains("polyline") && svg.contains("admissible"));
    }

    #[test]
    fn voltage_sweep_overlay_marks_deep_vonq_red() {
        let nominal = MemristorParams::nominal();
        let cfg = GateConfig::nominal();
        let spec =
            VariationSpec::three_level(Family::Voltage, 0.10, SchemeId::Ttl).unwrap();
        let outcomes = run_sweep(&spec, &nominal, &cfg);
        let bar = axis_bar_from_sweep(&outcomes, &spec, &nominal, ParamId::VonQ).unwrap();
        assert_eq!(bar.levels.len(), 3);
        // Ascending by value: -0.77 first.
        assert!((bar.levels[0].0 - (-0.77)).abs() < 1e-12);
        assert!(!bar.levels[0].1, "deepened v_onQ alone must fail");
        assert!(bar.levels[1].1 && bar.levels[2].1);

        let err = axis_bar_from_sweep(&outcomes, &spec, &nominal, ParamId::RonP).unwrap_err();
        assert!(err.to_string().contains("not varied"));
    }
}
