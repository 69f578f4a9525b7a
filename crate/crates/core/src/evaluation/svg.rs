//! Minimal grouped bar charts as standalone SVG 1.1 documents.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 3] = ["#4e79a7", "#e15759", "#59a14f"];

pub(super) struct Chart {
    pub title: String,
    pub x_label: String,
    pub categories: Vec<String>,
    pub series: Vec<(String, Vec<f64>)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rounds the axis maximum up to 1, 2 or 5 times a power of ten.
fn nice_max(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(max.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&v| v >= max)
        .unwrap_or(10.0 * magnitude)
}

impl Chart {
    pub fn render(&self) -> String {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let max = self
            .series
            .iter()
            .flat_map(|(_, v)| v.iter().copied())
            .fold(0.0f64, f64::max);
        let y_max = nice_max(max);
        let y = |v: f64| TOP + plot_h - v / y_max * plot_h;

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        for i in 0..=4 {
            let v = y_max * f64::from(i) / 4.0;
            let yy = y(v);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#dddddd"/>"##,
                WIDTH - RIGHT
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                yy + 4.0,
                format_tick(v)
            );
        }
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333333"/>"##,
            TOP + plot_h,
            WIDTH - RIGHT,
            TOP + plot_h
        );

        let n = self.categories.len();
        if n > 0 {
            let group_w = plot_w / n as f64;
            let bar_w = group_w * 0.8 / self.series.len().max(1) as f64;
            for (ci, category) in self.categories.iter().enumerate() {
                let gx = LEFT + group_w * ci as f64 + group_w * 0.1;
                for (si, (_, values)) in self.series.iter().enumerate() {
                    let v = values.get(ci).copied().unwrap_or(0.0);
                    let top = y(v);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.1}" y="{top:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"/>"#,
                        gx + bar_w * si as f64,
                        TOP + plot_h - top,
                        COLORS[si % COLORS.len()]
                    );
                }
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    LEFT + group_w * (ci as f64 + 0.5),
                    TOP + plot_h + 16.0,
                    escape(category)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        for (si, (name, _)) in self.series.iter().enumerate() {
            let lx = LEFT + 8.0 + 130.0 * si as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#,
                TOP - 12.0,
                COLORS[si % COLORS.len()]
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 14.0,
                TOP - 3.0,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_maximum() {
        assert_eq!(nice_max(0.0), 1.0);
        assert_eq!(nice_max(0.83), 1.0);
        assert_eq!(nice_max(13.0), 20.0);
        assert_eq!(nice_max(400.0), 500.0);
    }

    #[test]
    fn empty_chart_renders_axes() {
        let chart = Chart {
            title: "t".into(),
            x_label: "x".into(),
            categories: vec![],
            series: vec![("s".into(), vec![])],
        };
        let svg = chart.render();
        assert!(svg.contains("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<rect x=\"") || svg.matches("<rect").count() == 1);
    }
}
