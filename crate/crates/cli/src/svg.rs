//! Standalone SVG 1.1 plot emitters, no drawing dependencies.
//!
//! Output bytes are deterministic for identical input: coordinates are
//! rendered with fixed precision and every data point carries `data-*`
//! attributes with its source values.

use std::fmt::Write as _;

use litmap_core::scimap::{Boundaries, EvolutionRow, ScienceMap};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct LinearScale {
    domain_max: f64,
    range_start: f64,
    range_end: f64,
}

impl LinearScale {
    fn new(domain_max: f64, range_start: f64, range_end: f64) -> Self {
        LinearScale {
            domain_max: if domain_max > 0.0 { domain_max } else { 1.0 },
            range_start,
            range_end,
        }
    }

    fn apply(&self, v: f64) -> f64 {
        self.range_start + (v / self.domain_max) * (self.range_end - self.range_start)
    }
}

fn svg_header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
}

fn axis_ticks(max: f64) -> Vec<f64> {
    (0..=5).map(|i| max * i as f64 / 5.0).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}

fn draw_axes(
    out: &mut String,
    x_max: f64,
    y_max: f64,
    x_label: &str,
    y_label: &str,
    top: f64,
    bottom: f64,
) {
    let x_scale = LinearScale::new(x_max, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let y_scale = LinearScale::new(y_max, bottom, top);
    let _ = writeln!(
        out,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        px(MARGIN_LEFT),
        px(bottom),
        px(WIDTH - MARGIN_RIGHT),
        px(bottom)
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        px(MARGIN_LEFT),
        px(bottom),
        px(MARGIN_LEFT),
        px(top)
    );
    for tick in axis_ticks(x_max) {
        let x = x_scale.apply(tick);
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            px(x),
            px(bottom),
            px(x),
            px(bottom + 5.0)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            px(x),
            px(bottom + 18.0),
            fmt_tick(tick)
        );
    }
    for tick in axis_ticks(y_max) {
        let y = y_scale.apply(tick);
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            px(MARGIN_LEFT - 5.0),
            px(y),
            px(MARGIN_LEFT),
            px(y)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            px(MARGIN_LEFT - 8.0),
            px(y + 4.0),
            fmt_tick(tick)
        );
    }
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>",
        px((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
        px(bottom + 40.0)
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{y_label}</text>",
        px(MARGIN_LEFT - 50.0),
        px((top + bottom) / 2.0),
        px(MARGIN_LEFT - 50.0),
        px((top + bottom) / 2.0)
    );
}

fn boundary_lines(
    out: &mut String,
    bounds: &Boundaries,
    scale: &LinearScale,
    vertical: bool,
    top: f64,
    bottom: f64,
) {
    let cuts = [
        (bounds.median, "#4e79a7", "median"),
        (bounds.q3, "#59a14f", "q3"),
        (bounds.p90, "#edc948", "p90"),
    ];
    for (value, color, name) in cuts {
        let pos = scale.apply(value);
        if vertical {
            let _ = writeln!(
                out,
                "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{color}\" stroke-dasharray=\"6,4\" data-boundary=\"interest-{name}\" data-value=\"{value}\"/>",
                px(pos),
                px(bottom),
                px(top)
            );
        } else {
            let _ = writeln!(
                out,
                "  <line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"{color}\" stroke-dasharray=\"6,4\" data-boundary=\"impact-{name}\" data-value=\"{value}\"/>",
                px(pos),
                px(MARGIN_LEFT),
                px(WIDTH - MARGIN_RIGHT)
            );
        }
    }
}

/// Scatter plot of topic profiles: interest on x, impact on y, bubble radius
/// proportional to `sqrt(max(growth, 0) + 1)`, quantile boundary lines on
/// both axes.
pub fn emit_scatter_svg(map: &ScienceMap) -> String {
    let mut out = String::new();
    svg_header(&mut out, "Research topics: interest vs impact");
    let bottom = HEIGHT - MARGIN_BOTTOM;
    let top = MARGIN_TOP;

    let x_max = map
        .profiles
        .iter()
        .map(|p| p.paper_count as f64)
        .fold(0.0, f64::max)
        .max(map.interest_bounds.p90)
        * 1.05;
    let y_max = map
        .profiles
        .iter()
        .map(|p| p.citation_sum as f64)
        .fold(0.0, f64::max)
        .max(map.impact_bounds.p90)
        * 1.05;

    draw_axes(
        &mut out,
        x_max,
        y_max,
        "Research interest (papers)",
        "Research impact (citations)",
        top,
        bottom,
    );
    let x_scale = LinearScale::new(x_max, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let y_scale = LinearScale::new(y_max, bottom, top);
    boundary_lines(&mut out, &map.interest_bounds, &x_scale, true, top, bottom);
    boundary_lines(&mut out, &map.impact_bounds, &y_scale, false, top, bottom);

    for profile in &map.profiles {
        let x = x_scale.apply(profile.paper_count as f64);
        let y = y_scale.apply(profile.citation_sum as f64);
        let radius = 2.0 * (profile.growth_pct.max(0.0) + 1.0).sqrt();
        let color = PALETTE[profile.topic_id % PALETTE.len()];
        let _ = writeln!(
            out,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\" fill-opacity=\"0.55\" stroke=\"{color}\" data-topic=\"{}\" data-papers=\"{}\" data-citations=\"{}\" data-growth=\"{}\" data-cell=\"{}\"/>",
            px(x),
            px(y),
            px(radius),
            profile.topic_id,
            profile.paper_count,
            profile.citation_sum,
            profile.growth_pct,
            profile.grid_cell
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">T{}</text>",
            px(x),
            px(y - radius - 3.0),
            profile.topic_id
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Two stacked panels of per-topic yearly series: papers on top, citations
/// below, one polyline per requested topic.
pub fn emit_evolution_svg(map: &ScienceMap, topic_ids: &[usize]) -> String {
    let rows: Vec<EvolutionRow> = litmap_core::scimap::evolution_series(&map.profiles)
        .into_iter()
        .filter(|r| topic_ids.contains(&r.topic))
        .collect();

    let mut out = String::new();
    svg_header(&mut out, "Evolution of topics over time");

    let (year_min, year_max) = rows.iter().fold((i32::MAX, i32::MIN), |(lo, hi), r| {
        (lo.min(r.year), hi.max(r.year))
    });
    let have_data = !rows.is_empty();
    let (year_min, year_max) = if have_data {
        (year_min, year_max.max(year_min + 1))
    } else {
        (2000, 2001)
    };

    let panel_height = (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM - 60.0) / 2.0;
    let panels = [
        ("papers", MARGIN_TOP, "Papers per year"),
        (
            "citations",
            MARGIN_TOP + panel_height + 60.0,
            "Citations per year",
        ),
    ];

    for (field, panel_top, label) in panels {
        let panel_bottom = panel_top + panel_height;
        let value_of = |r: &EvolutionRow| -> u64 {
            if field == "papers" {
                r.papers
            } else {
                r.citations
            }
        };
        let y_max = rows.iter().map(|r| value_of(r) as f64).fold(0.0, f64::max) * 1.1;
        let x_scale = LinearScale::new(
            (year_max - year_min) as f64,
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT - 80.0,
        );
        let y_scale = LinearScale::new(y_max, panel_bottom, panel_top);

        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            px(MARGIN_LEFT),
            px(panel_bottom),
            px(WIDTH - MARGIN_RIGHT - 80.0),
            px(panel_bottom)
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            px(MARGIN_LEFT),
            px(panel_bottom),
            px(MARGIN_LEFT),
            px(panel_top)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"13\">{label}</text>",
            px(MARGIN_LEFT),
            px(panel_top - 8.0)
        );
        for year in year_min..=year_max {
            let x = x_scale.apply((year - year_min) as f64);
            let _ = writeln!(
                out,
                "  <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{year}</text>",
                px(x),
                px(panel_bottom + 14.0)
            );
        }

        for (i, &topic) in topic_ids.iter().enumerate() {
            let series: Vec<&EvolutionRow> = rows.iter().filter(|r| r.topic == topic).collect();
            if series.is_empty() {
                continue;
            }
            let color = PALETTE[i % PALETTE.len()];
            let points: Vec<String> = series
                .iter()
                .map(|r| {
                    format!(
                        "{},{}",
                        px(x_scale.apply((r.year - year_min) as f64)),
                        px(y_scale.apply(value_of(r) as f64))
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\" data-topic=\"{topic}\" data-series=\"{field}\"/>",
                points.join(" ")
            );
            for r in &series {
                let _ = writeln!(
                    out,
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\" data-topic=\"{topic}\" data-series=\"{field}\" data-year=\"{}\" data-value=\"{}\"/>",
                    px(x_scale.apply((r.year - year_min) as f64)),
                    px(y_scale.apply(value_of(r) as f64)),
                    r.year,
                    value_of(r)
                );
            }
        }
    }

    // legend
    for (i, &topic) in topic_ids.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 * i as f64;
        let _ = writeln!(
            out,
            "  <rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            px(WIDTH - MARGIN_RIGHT - 70.0),
            px(y)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\">T{topic}</text>",
            px(WIDTH - MARGIN_RIGHT - 56.0),
            px(y + 9.0)
        );
    }
    out.push_str("</svg>\n");
    out
}
