use std::fmt::Write as _;

pub const PANEL: f64 = 600.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const STYLE: &str = "\
text{font-family:sans-serif;font-size:13px;fill:#222}\
.title{font-size:15px}\
.axis{stroke:#222;stroke-width:1;fill:none}\
.tick{stroke:#222;stroke-width:1}\
.mark{stroke:#222;stroke-width:0.6}\
.normal{fill:#bdbdbd}\
.detected{fill:#d7301f}\
.false-alarm{fill:#fdae61}\
.missed{fill:#2c7bb6}\
.boundary{fill:none;stroke:#444;stroke-width:1.2;stroke-dasharray:5 3}\
.parabola{fill:none;stroke:#444;stroke-width:1.2}";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Data-to-pixel mapping of one panel.
pub struct Frame {
    left: f64,
    top: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

impl Frame {
    pub fn fit(left: f64, top: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Frame {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
        let (xmin, xmax) = padded(xmin, xmax);
        let (ymin, ymax) = padded(ymin, ymax);
        Frame { left, top, xmin, xmax, ymin, ymax }
    }

    fn width() -> f64 {
        PANEL - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn height() -> f64 {
        PANEL - MARGIN_TOP - MARGIN_BOTTOM
    }

    pub fn px(&self, x: f64) -> f64 {
        self.left + MARGIN_LEFT + (x - self.xmin) / (self.xmax - self.xmin) * Self::width()
    }

    pub fn py(&self, y: f64) -> f64 {
        self.top + MARGIN_TOP + (self.ymax - y) / (self.ymax - self.ymin) * Self::height()
    }

    /// Opens the panel group and draws axes, ticks, labels and title.
    pub fn open(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        write!(
            out,
            "<g class=\"panel\" data-xmin=\"{}\" data-xmax=\"{}\" data-ymin=\"{}\" data-ymax=\"{}\">",
            self.xmin, self.xmax, self.ymin, self.ymax
        )
        .unwrap();
        let (x0, x1) = (self.left + MARGIN_LEFT, self.left + MARGIN_LEFT + Self::width());
        let (y0, y1) = (self.top + MARGIN_TOP, self.top + MARGIN_TOP + Self::height());
        write!(out, "<rect class=\"axis\" x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\"/>", x1 - x0, y1 - y0).unwrap();
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.xmin + f * (self.xmax - self.xmin);
            let xp = self.px(xv);
            write!(out, "<line class=\"tick\" x1=\"{xp:.3}\" y1=\"{y1}\" x2=\"{xp:.3}\" y2=\"{}\"/>", y1 + 5.0).unwrap();
            write!(out, "<text x=\"{xp:.3}\" y=\"{}\" text-anchor=\"middle\">{}</text>", y1 + 19.0, tick_label(xv)).unwrap();
            let yv = self.ymin + f * (self.ymax - self.ymin);
            let yp = self.py(yv);
            write!(out, "<line class=\"tick\" x1=\"{}\" y1=\"{yp:.3}\" x2=\"{x0}\" y2=\"{yp:.3}\"/>", x0 - 5.0).unwrap();
            write!(out, "<text x=\"{}\" y=\"{:.3}\" text-anchor=\"end\">{}</text>", x0 - 8.0, yp + 4.0, tick_label(yv)).unwrap();
        }
        write!(
            out,
            "<text x=\"{:.3}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            (x0 + x1) / 2.0,
            y1 + 44.0,
            escape(xlabel)
        )
        .unwrap();
        let (cx, cy) = (self.left + 18.0, (y0 + y1) / 2.0);
        write!(
            out,
            "<text x=\"{cx}\" y=\"{cy:.3}\" text-anchor=\"middle\" transform=\"rotate(-90 {cx} {cy:.3})\">{}</text>",
            escape(ylabel)
        )
        .unwrap();
        write!(out, "<text class=\"title\" x=\"{:.3}\" y=\"{}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, self.top + 24.0, escape(title))
            .unwrap();
    }

    pub fn close(&self, out: &mut String) {
        out.push_str("</g>");
    }

    pub fn mark(&self, out: &mut String, x: f64, y: f64, class: &str, id: &str) {
        write!(
            out,
            "<circle class=\"mark {class}\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"3.5\"><title>{}</title></circle>",
            self.px(x),
            self.py(y),
            escape(id)
        )
        .unwrap();
    }

    pub fn polyline(&self, out: &mut String, points: &[(f64, f64)], class: &str, closed: bool) {
        let tag = if closed { "polygon" } else { "polyline" };
        write!(out, "<{tag} class=\"{class}\" points=\"").unwrap();
        for (k, (x, y)) in points.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{:.3},{:.3}", self.px(*x), self.py(*y)).unwrap();
        }
        out.push_str("\"/>");
    }
}

/// Legend of the style classes that occur in the document.
pub fn legend(out: &mut String, left: f64, top: f64, classes: &[&str]) {
    fn label(c: &str) -> &str {
        match c {
            "normal" => "not flagged",
            "detected" => "flagged",
            "false-alarm" => "flagged, not an outlier",
            "missed" => "missed outlier",
            _ => c,
        }
    }
    out.push_str("<g class=\"legend\">");
    for (k, class) in classes.iter().enumerate() {
        let y = top + 16.0 * k as f64;
        write!(out, "<rect class=\"{class}\" x=\"{left}\" y=\"{}\" width=\"9\" height=\"9\"/>", y - 9.0).unwrap();
        write!(out, "<text x=\"{}\" y=\"{y}\">{}</text>", left + 14.0, label(class)).unwrap();
    }
    out.push_str("</g>");
}

pub fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <style>{STYLE}</style>\n\
         <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n\
         {body}\n</svg>\n"
    )
}
