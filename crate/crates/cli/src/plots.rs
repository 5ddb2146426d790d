//! Minimal static SVG line charts for the report command.

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
}

/// Render series as polylines with axes and a legend; log-log when requested.
pub fn line_chart(title: &str, series: &[Series], log_log: bool) -> String {
    let (w, h) = (720.0, 440.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let map = |v: f64| if log_log { v.max(1e-300).log10() } else { v };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(map(x));
            xmax = xmax.max(map(x));
            ymin = ymin.min(map(y));
            ymax = ymax.max(map(y));
        }
    }
    if !(xmax > xmin) {
        xmax = xmin + 1.0;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| ml + (map(x) - xmin) / (xmax - xmin) * (w - ml - mr);
    let sy = |y: f64| h - mb - (map(y) - ymin) / (ymax - ymin) * (h - mt - mb);
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect width="{w}" height="{h}" fill="white"/>
<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>
<line x1="{ml}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{}" stroke="black"/>
"#,
        w / 2.0,
        h - mb,
        w - mr,
        h - mb,
        h - mb,
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>
<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{}">{}</text>
"#,
            pts.join(" "),
            s.color,
            w - mr - 150.0,
            mt + 16.0 * (i + 1) as f64,
            s.color,
            s.name,
        ));
    }
    // axis extent labels
    svg.push_str(&format!(
        r#"<text x="{ml}" y="{}" font-family="sans-serif" font-size="11">{:.3e}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{:.3e}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="11">{:.3e}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="11">{:.3e}</text>
</svg>
"#,
        h - mb + 16.0,
        if log_log { 10f64.powf(xmin) } else { xmin },
        w - mr,
        h - mb + 16.0,
        if log_log { 10f64.powf(xmax) } else { xmax },
        8.0,
        h - mb,
        if log_log { 10f64.powf(ymin) } else { ymin },
        8.0,
        mt + 8.0,
        if log_log { 10f64.powf(ymax) } else { ymax },
    ));
    svg
}
