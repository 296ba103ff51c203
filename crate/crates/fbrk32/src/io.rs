//! Output plumbing: atomic file writes, report JSON, plot-ready CSV tables,
//! and the eigenvalue-track SVG.

use crate::vn::DispersionSample;
use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;

/// Write a file atomically: the content goes to a temporary file in the
/// destination directory and is renamed over the target only after a
/// successful flush, so readers never observe a partial file.
pub fn atomic_write<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Serialize a report as pretty JSON with a trailing newline, atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, |w| w.write_all(&bytes))
}

/// Long-form plot table: header `x,series,value`, one row per point.
pub fn write_plot_csv<'a, I>(w: &mut dyn Write, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = (f64, &'a str, f64)>,
{
    writeln!(w, "x,series,value")?;
    for (x, series, value) in rows {
        writeln!(w, "{x},{series},{value}")?;
    }
    Ok(())
}

/// Wide eigenvalue-track table: one row per sampled nondimensional
/// wavenumber-step product, both eigenvalues in rectangular and modulus
/// form.
pub fn write_dispersion_csv(w: &mut dyn Write, samples: &[DispersionSample]) -> io::Result<()> {
    writeln!(w, "ktilde_nu,re1,im1,abs1,re2,im2,abs2")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.ktilde_nu,
            s.lambda1.re,
            s.lambda1.im,
            s.lambda1.norm(),
            s.lambda2.re,
            s.lambda2.im,
            s.lambda2.norm()
        )?;
    }
    Ok(())
}

/// Dispersion tracks in the complex plane: one unit circle, light axes, and
/// one polyline per eigenvalue branch.
pub fn write_spectrum_svg(w: &mut dyn Write, samples: &[DispersionSample]) -> io::Result<()> {
    const SIZE: f64 = 640.0;
    const CENTER: f64 = SIZE / 2.0;
    const RADIUS: f64 = 240.0;
    let px = |re: f64| CENTER + re * RADIUS;
    let py = |im: f64| CENTER - im * RADIUS;

    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SIZE} {SIZE}\" \
         width=\"{SIZE}\" height=\"{SIZE}\">"
    )?;
    writeln!(
        w,
        "  <line x1=\"0\" y1=\"{CENTER}\" x2=\"{SIZE}\" y2=\"{CENTER}\" \
         stroke=\"#ddd\" stroke-width=\"1\"/>"
    )?;
    writeln!(
        w,
        "  <line x1=\"{CENTER}\" y1=\"0\" x2=\"{CENTER}\" y2=\"{SIZE}\" \
         stroke=\"#ddd\" stroke-width=\"1\"/>"
    )?;
    writeln!(
        w,
        "  <circle cx=\"{CENTER}\" cy=\"{CENTER}\" r=\"{RADIUS}\" fill=\"none\" \
         stroke=\"#999\" stroke-width=\"1.5\"/>"
    )?;
    for (track, color) in [(0usize, "#c0392b"), (1usize, "#2e6fb7")] {
        let pts: Vec<String> = samples
            .iter()
            .map(|s| {
                let z = if track == 0 { s.lambda1 } else { s.lambda2 };
                format!("{:.3},{:.3}", px(z.re), py(z.im))
            })
            .collect();
        writeln!(
            w,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" \
             points=\"{}\"/>",
            pts.join(" ")
        )?;
    }
    writeln!(
        w,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         fill=\"#555\">unit circle</text>",
        px(0.2),
        py(-1.12)
    )?;
    writeln!(w, "</svg>")?;
    Ok(())
}
