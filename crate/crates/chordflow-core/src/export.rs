//! Deterministic text export: CSV at 17 significant digits and ASCII PGM
//! heatmaps with an explicit value-mapping comment.

/// Format a float with 17 significant digits ('.' separator, LF endings are
/// the caller's concern).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a grayscale P2 PGM of a row-major field (`rows` rows of `cols`
/// values, first row at the top).  The affine mapping is documented in a
/// `# vmin=.. vmax=..` comment.
pub fn pgm_p2(values: &[f64], cols: usize, rows: usize) -> String {
    assert_eq!(values.len(), cols * rows, "field shape mismatch");
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    if !vmin.is_finite() || !vmax.is_finite() {
        vmin = 0.0;
        vmax = 0.0;
    }
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };
    let mut out = String::new();
    out.push_str("P2\n");
    out.push_str(&format!("# vmin={} vmax={}\n", fmt17(vmin), fmt17(vmax)));
    out.push_str(&format!("{cols} {rows}\n255\n"));
    for r in 0..rows {
        let mut line = String::new();
        for c in 0..cols {
            let v = values[r * cols + c];
            let g = if v.is_finite() {
                (((v - vmin) / span) * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            if c > 0 {
                line.push(' ');
            }
            line.push_str(&g.to_string());
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
