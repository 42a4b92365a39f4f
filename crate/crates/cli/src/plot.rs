//! Deterministic SVG rendering of log-log error curves: fixed 800x600
//! canvas, data points, a least-squares fit line over above-floor points
//! (two or more required), and a shaded band below the accuracy floor.

use crate::config::{CliError, CliResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;

struct LogMap {
    lo_x: f64,
    hi_x: f64,
    lo_y: f64,
    hi_y: f64,
}

impl LogMap {
    fn x(&self, v: f64) -> f64 {
        let span = (self.hi_x - self.lo_x).max(1e-12);
        MARGIN + (v.log10() - self.lo_x) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.hi_y - self.lo_y).max(1e-12);
        // SVG y grows downward
        HEIGHT - MARGIN - (v.log10() - self.lo_y) / span * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Render (n, error) pairs. `floor` draws the roundoff band; points at or
/// below it are excluded from the fit. Zero errors are clamped to the floor
/// (or to the smallest positive error) so they stay renderable.
pub fn emit_plot(points: &[(f64, f64)], floor: Option<f64>) -> CliResult<String> {
    if points.is_empty() {
        return Err(CliError::Config("plot: empty curve".into()));
    }
    let smallest_positive = points
        .iter()
        .map(|p| p.1)
        .filter(|e| *e > 0.0)
        .fold(f64::INFINITY, f64::min);
    let clamp = floor.unwrap_or(smallest_positive.min(1e-300)).max(1e-300);
    let drawn: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n, e.max(clamp))).collect();

    let mut map = LogMap {
        lo_x: f64::INFINITY,
        hi_x: f64::NEG_INFINITY,
        lo_y: f64::INFINITY,
        hi_y: f64::NEG_INFINITY,
    };
    for &(n, e) in &drawn {
        map.lo_x = map.lo_x.min(n.log10());
        map.hi_x = map.hi_x.max(n.log10());
        map.lo_y = map.lo_y.min(e.log10());
        map.hi_y = map.hi_y.max(e.log10());
    }
    if let Some(fl) = floor {
        map.lo_y = map.lo_y.min(fl.log10());
    }
    // half-decade padding so points never sit on the frame
    map.lo_x -= 0.5;
    map.hi_x += 0.5;
    map.lo_y -= 0.5;
    map.hi_y += 0.5;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(fl) = floor {
        let y = map.y(fl);
        let bottom = HEIGHT - MARGIN;
        if y < bottom {
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"#f0f0f0\"/>\n",
                MARGIN,
                y,
                WIDTH - 2.0 * MARGIN,
                bottom - y
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n",
                MARGIN,
                WIDTH - MARGIN
            ));
        }
    }

    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">log10 n</text>\n",
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\" transform=\"rotate(-90 {:.2} {:.2})\">log10 error</text>\n",
        MARGIN / 3.0,
        HEIGHT / 2.0,
        MARGIN / 3.0,
        HEIGHT / 2.0
    ));

    // fit over points strictly above the floor, if there are enough
    let fit_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| floor.map_or(*e > 0.0, |fl| *e > fl))
        .map(|&(n, e)| (n.log10(), e.log10()))
        .collect();
    if fit_pts.len() >= 2 {
        let count = fit_pts.len() as f64;
        let mx: f64 = fit_pts.iter().map(|p| p.0).sum::<f64>() / count;
        let my: f64 = fit_pts.iter().map(|p| p.1).sum::<f64>() / count;
        let sxx: f64 = fit_pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if sxx > 0.0 {
            let slope: f64 =
                fit_pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
            let (x_first, x_last) = (fit_pts[0].0, fit_pts[fit_pts.len() - 1].0);
            let y_at = |lx: f64| my + slope * (lx - mx);
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                 stroke=\"#cc3333\" stroke-width=\"1.5\"/>\n",
                map.x(10f64.powf(x_first)),
                map.y(10f64.powf(y_at(x_first))),
                map.x(10f64.powf(x_last)),
                map.y(10f64.powf(y_at(x_last)))
            ));
        }
    }

    for &(n, e) in &drawn {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#3355bb\"/>\n",
            map.x(n),
            map.y(e)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_power_law_gets_a_fit_line() {
        let points: Vec<(f64, f64)> = [8u32, 16, 32, 64, 128]
            .iter()
            .map(|&n| (n as f64, 1.0 / n as f64))
            .collect();
        let svg = emit_plot(&points, None).unwrap();
        assert!(svg.contains("<svg"));
        assert!(svg.matches("<circle").count() == 5);
        assert!(svg.contains("#cc3333"), "fit line missing");
    }

    #[test]
    fn single_point_has_no_fit_line() {
        let svg = emit_plot(&[(16.0, 1e-3)], None).unwrap();
        assert!(svg.matches("<circle").count() == 1);
        assert!(!svg.contains("#cc3333"));
    }

    #[test]
    fn floor_limited_curve_shades_the_floor() {
        let points = vec![(8.0, 1e-2), (16.0, 1e-4), (32.0, 1e-12), (64.0, 1e-12)];
        let svg = emit_plot(&points, Some(1e-11)).unwrap();
        assert!(svg.contains("#f0f0f0"), "floor band missing");
        // only the two above-floor points feed the fit, which still draws
        assert!(svg.contains("#cc3333"));
    }

    #[test]
    fn empty_curve_is_rejected() {
        assert!(emit_plot(&[], None).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let points = vec![(8.0, 0.5), (16.0, 0.25), (32.0, 0.125)];
        assert_eq!(
            emit_plot(&points, Some(1e-11)).unwrap(),
            emit_plot(&points, Some(1e-11)).unwrap()
        );
    }
}
