//! Gnuplot script for a sweep: one panel per `(b, ε)`, one curve per α.

use crate::run::density_file_name;
use levy_fpe::BifurcationDiagram;
use std::fmt::Write;

/// Script that reads `densities/` relative to the output directory.
pub fn gnuplot_script(diagram: &BifurcationDiagram) -> String {
    let axes = &diagram.axes;
    let l = diagram.half_width;
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot plot.gp  (run from the output directory)");
    let _ = writeln!(
        s,
        "set terminal pngcairo size {},{}",
        360 * axes.epsilon.len(),
        280 * axes.b.len()
    );
    let _ = writeln!(s, "set output 'densities.png'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key top right font ',7'");
    let _ = writeln!(s, "set xrange [{}:{}]", -l, l);
    let _ = writeln!(s, "set multiplot layout {},{}", axes.b.len(), axes.epsilon.len());
    for &b in &axes.b {
        for &eps in &axes.epsilon {
            let _ = writeln!(s, "set title 'b = {b}, ε = {eps}'");
            let curves: Vec<String> = axes
                .alpha
                .iter()
                .filter(|&&a| solved(diagram, b, a, eps))
                .map(|&a| {
                    format!(
                        "'densities/{}' skip 1 using 1:2 with lines title 'α = {a}'",
                        density_file_name(b, a, eps)
                    )
                })
                .collect();
            if curves.is_empty() {
                let _ = writeln!(s, "set multiplot next");
            } else {
                let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
            }
        }
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

fn solved(diagram: &BifurcationDiagram, b: f64, alpha: f64, eps: f64) -> bool {
    diagram
        .records()
        .any(|r| r.params.b == b && r.params.noise.alpha() == Some(alpha) && r.params.noise.epsilon() == Some(eps))
}
