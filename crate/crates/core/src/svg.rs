//! Episode replay rendering: a standalone SVG with the floor plan, vents,
//! source, spawn region, agent trajectories, committed waypoints, and crash
//! markers. Pure string assembly — deterministic for identical inputs.

use crate::env::bundle::EnvBundle;
use crate::geometry::Vec2;
use crate::sim::RunMetrics;

const SCALE: f64 = 60.0; // pixels per meter
const MARGIN: f64 = 20.0; // pixels
const AGENT_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn render_episode_svg(bundle: &EnvBundle, metrics: &RunMetrics) -> String {
    let size = bundle.env.size;
    let w = size.x * SCALE + 2.0 * MARGIN;
    let h = size.y * SCALE + 2.0 * MARGIN + 24.0;
    // SVG y grows downward; world y grows upward.
    let tx = |p: Vec2| -> (f64, f64) {
        (
            MARGIN + p.x * SCALE,
            MARGIN + (size.y - p.y) * SCALE,
        )
    };
    let mut s = String::with_capacity(1 << 16);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#fbfbf8\"/>\n");

    // Spawn region.
    let (sx, sy) = tx(Vec2::new(
        bundle.env.spawn_region.min.x,
        bundle.env.spawn_region.max.y,
    ));
    s.push_str(&format!(
        "<rect class=\"spawn\" x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#2ca02c\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n",
        sx,
        sy,
        bundle.env.spawn_region.width() * SCALE,
        bundle.env.spawn_region.height() * SCALE,
    ));

    // Walls.
    for wseg in &bundle.env.walls {
        let (x1, y1) = tx(wseg.a);
        let (x2, y2) = tx(wseg.b);
        s.push_str(&format!(
            "<line class=\"wall\" x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" \
             stroke=\"#333\" stroke-width=\"3\" stroke-linecap=\"square\"/>\n"
        ));
    }

    // Vents: inlets blue, outlets orange.
    for (spans, color, class) in [
        (&bundle.env.inlets, "#1f77b4", "inlet"),
        (&bundle.env.outlets, "#ff7f0e", "outlet"),
    ] {
        for span in spans.iter() {
            let (x1, y1) = tx(span.seg.a);
            let (x2, y2) = tx(span.seg.b);
            s.push_str(&format!(
                "<line class=\"{class}\" x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" \
                 y2=\"{y2:.1}\" stroke=\"{color}\" stroke-width=\"6\"/>\n"
            ));
        }
    }

    // Source and the success radius around it.
    let (cx, cy) = tx(bundle.env.source_pos);
    s.push_str(&format!(
        "<circle class=\"success-radius\" cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{:.1}\" \
         fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"4 4\"/>\n",
        1.5 * SCALE
    ));
    s.push_str(&format!(
        "<circle class=\"source\" cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"6\" fill=\"#d62728\"/>\n"
    ));

    // Trajectories, waypoints, crash markers.
    for (i, traj) in metrics.trajectories.iter().enumerate() {
        let color = AGENT_COLORS[i % AGENT_COLORS.len()];
        let mut points = String::new();
        for p in traj {
            let (x, y) = tx(*p);
            points.push_str(&format!("{x:.1},{y:.1} "));
        }
        s.push_str(&format!(
            "<polyline class=\"trajectory\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"1.2\" opacity=\"0.85\" points=\"{}\"/>\n",
            points.trim_end()
        ));
        for wp in &metrics.waypoints[i] {
            let (x, y) = tx(*wp);
            s.push_str(&format!(
                "<path class=\"waypoint\" d=\"M {:.1} {y:.1} L {:.1} {y:.1} M {x:.1} {:.1} \
                 L {x:.1} {:.1}\" stroke=\"{color}\" stroke-width=\"1\" opacity=\"0.5\"/>\n",
                x - 4.0,
                x + 4.0,
                y - 4.0,
                y + 4.0,
            ));
        }
        if metrics.crashed[i].is_some() {
            let (x, y) = tx(*traj.last().unwrap());
            s.push_str(&format!(
                "<path class=\"crash\" d=\"M {:.1} {:.1} L {:.1} {:.1} M {:.1} {:.1} L {:.1} \
                 {:.1}\" stroke=\"#000\" stroke-width=\"2.5\"/>\n",
                x - 6.0,
                y - 6.0,
                x + 6.0,
                y + 6.0,
                x - 6.0,
                y + 6.0,
                x + 6.0,
                y - 6.0,
            ));
        }
        let (x0, y0) = tx(traj[0]);
        s.push_str(&format!(
            "<circle class=\"start\" cx=\"{x0:.1}\" cy=\"{y0:.1}\" r=\"4\" fill=\"{color}\"/>\n"
        ));
    }

    s.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\">{} policy={} \
         seed={} success={} time={:.2}s</text>\n",
        size.y * SCALE + 2.0 * MARGIN + 16.0,
        metrics.env_id,
        metrics.policy,
        metrics.seed,
        metrics.success,
        metrics.time_to_source,
    ));
    s.push_str("</svg>\n");
    s
}
