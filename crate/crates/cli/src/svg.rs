//! Minimal SVG charts: line plots for wealth and sentiment series, a
//! scatter for the efficient frontier.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, preamble: &[String]) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for line in preamble {
        // `--` is not allowed inside an XML comment.
        let _ = writeln!(out, "<!-- {} -->", line.replace("--", "- -"));
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: (&str, &str), y_label: &str) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        "<path d=\"M{l} {t} L{l} {b} L{r} {b}\" fill=\"none\" stroke=\"black\"/>"
    );
    for k in 0..=4 {
        let y = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            l - 6.0,
            f.py(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{l}\" y=\"{:.1}\">{}</text>",
        b + 20.0,
        escape(x_label.0)
    );
    let _ = writeln!(
        out,
        "<text x=\"{r}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
        b + 20.0,
        escape(x_label.1)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 4.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 140.0;
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\"/>",
            x + 20.0,
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            x + 26.0,
            y + 4.0,
            escape(name)
        );
    }
}

/// Series plotted against their index; every series should have the same
/// length. `x_span` labels the two ends of the x axis.
pub fn line_chart(
    title: &str,
    y_label: &str,
    x_span: (&str, &str),
    series: &[(&str, &[f64])],
    preamble: &[String],
) -> String {
    let n = series.iter().map(|(_, s)| s.len()).max().unwrap_or(0).max(2);
    let frame = Frame::fit(
        [0.0, (n - 1) as f64].into_iter(),
        series.iter().flat_map(|(_, s)| s.iter().copied()),
    );
    let mut out = String::new();
    header(&mut out, title, preamble);
    axes(&mut out, &frame, x_span, y_label);
    for (i, (_, values)) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (t, v) in values.iter().enumerate() {
            if !v.is_finite() {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            let _ = write!(d, "{cmd}{:.1} {:.1} ", frame.px(t as f64), frame.py(*v));
            pen_down = true;
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            d.trim_end(),
            PALETTE[i % PALETTE.len()]
        );
    }
    legend(&mut out, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Points as (x, y); `highlight` is drawn last and larger.
pub fn scatter(
    title: &str,
    axis_labels: (&str, &str),
    points: &[(f64, f64)],
    highlight: Option<(f64, f64)>,
    preamble: &[String],
) -> String {
    let all = points.iter().chain(highlight.iter());
    let frame = Frame::fit(all.clone().map(|p| p.0), all.map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, preamble);
    axes(
        &mut out,
        &frame,
        (&format!("{}: {}", axis_labels.0, tick(frame.x0)), &tick(frame.x1)),
        axis_labels.1,
    );
    for (x, y) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\" fill=\"{}\" fill-opacity=\"0.5\"/>",
            frame.px(*x),
            frame.py(*y),
            PALETTE[0]
        );
    }
    if let Some((x, y)) = highlight {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"6\" fill=\"{}\" stroke=\"black\"/>",
            frame.px(x),
            frame.py(y),
            PALETTE[1]
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_paths(svg: &str) -> Vec<&str> {
        svg.lines().filter(|l| l.contains("stroke-width=\"1.5\"")).collect()
    }

    #[test]
    fn preamble_is_an_xml_comment() {
        let s = line_chart(
            "t",
            "y",
            ("a", "b"),
            &[("x", &[1.0, 2.0, 3.0])],
            &["config_hash=ab seed=1".into()],
        );
        assert!(s.contains("<!-- config_hash=ab seed=1 -->"));
        assert_eq!(series_paths(&s).len(), 1);
        assert!(s.ends_with("</svg>\n"));
    }

    #[test]
    fn non_finite_values_break_the_line() {
        let s = line_chart("t", "y", ("a", "b"), &[("x", &[1.0, f64::NAN, 3.0])], &[]);
        let paths = series_paths(&s);
        assert_eq!(paths[0].matches('M').count(), 2);
    }

    #[test]
    fn scatter_marks_the_highlight() {
        let s = scatter("f", ("vol", "ret"), &[(0.1, 0.2), (0.2, 0.3)], Some((0.1, 0.2)), &[]);
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains("r=\"6\""));
    }
}
