//! Draws detections onto an image: 2-pixel boxes in a per-class color with
//! a `NAME 0.87` tag at the top-left corner.

use crate::corpus::{ClassTable, NormBox, PredRecord};
use crate::spectral::{luma, ImageBuffer};

/// One color per KIIT-MiTA class; ids past the end wrap around.
pub const PALETTE: [[u8; 3]; 7] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
];

pub const LINE_WIDTH: u32 = 2;
const GLYPH_W: u32 = 5;
const GLYPH_H: u32 = 7;
const TAG_H: u32 = GLYPH_H + 2;

pub fn class_color(class_id: usize) -> [u8; 3] {
    PALETTE[class_id % PALETTE.len()]
}

fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        ' ' => [0; 7],
        _ => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04],
    }
}

/// Pixel rectangle `(x0, y0, x1, y1)`, inclusive, for a normalized box.
pub fn pixel_rect(b: &NormBox, width: u32, height: u32) -> (u32, u32, u32, u32) {
    let (nx0, ny0, nx1, ny1) = b.corners();
    let edge = |v: f64, size: u32| (v * size as f64).round().clamp(0.0, size as f64) as u32;
    let x0 = edge(nx0, width).min(width - 1);
    let y0 = edge(ny0, height).min(height - 1);
    let x1 = edge(nx1, width).saturating_sub(1).clamp(x0, width - 1);
    let y1 = edge(ny1, height).saturating_sub(1).clamp(y0, height - 1);
    (x0, y0, x1, y1)
}

fn fill(img: &mut ImageBuffer, x0: u32, y0: u32, x1: u32, y1: u32, color: [u8; 3]) {
    let x1 = x1.min(img.width() - 1);
    let y1 = y1.min(img.height() - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            img.put(x, y, color);
        }
    }
}

fn draw_rect(img: &mut ImageBuffer, (x0, y0, x1, y1): (u32, u32, u32, u32), color: [u8; 3]) {
    for t in 0..LINE_WIDTH {
        let (ax, ay) = (x0 + t, y0 + t);
        let (bx, by) = (x1.saturating_sub(t), y1.saturating_sub(t));
        if ax > bx || ay > by {
            break;
        }
        fill(img, ax, ay, bx, ay, color);
        fill(img, ax, by, bx, by, color);
        fill(img, ax, ay, ax, by, color);
        fill(img, bx, ay, bx, by, color);
    }
}

fn draw_text(img: &mut ImageBuffer, x: u32, y: u32, text: &str, color: [u8; 3]) {
    for (i, c) in text.chars().enumerate() {
        let gx = x + i as u32 * (GLYPH_W + 1);
        for (row, bits) in glyph(c).iter().enumerate() {
            for col in 0..GLYPH_W {
                if bits & (1 << (GLYPH_W - 1 - col)) == 0 {
                    continue;
                }
                let (px, py) = (gx + col, y + row as u32);
                if px < img.width() && py < img.height() {
                    img.put(px, py, color);
                }
            }
        }
    }
}

pub fn label_text(class_table: &ClassTable, p: &PredRecord) -> String {
    let name = class_table
        .name(p.class_id)
        .map(str::to_string)
        .unwrap_or_else(|| p.class_id.to_string());
    format!("{} {:.2}", name, p.confidence)
}

/// Draws every prediction with `confidence >= conf_threshold`, lowest
/// confidence first so stronger detections end up on top.
pub fn render_detections(
    img: &ImageBuffer,
    preds: &[PredRecord],
    class_table: &ClassTable,
    conf_threshold: f64,
) -> ImageBuffer {
    let mut out = img.clone();
    let mut visible: Vec<&PredRecord> = preds.iter().filter(|p| p.confidence >= conf_threshold).collect();
    visible.sort_by(|a, b| a.confidence.total_cmp(&b.confidence));
    for p in visible {
        let color = class_color(p.class_id);
        let rect = pixel_rect(&p.bbox, out.width(), out.height());
        draw_rect(&mut out, rect, color);

        let text = label_text(class_table, p);
        let tag_w = text.chars().count() as u32 * (GLYPH_W + 1) + 1;
        let (x0, y0) = (rect.0, rect.1);
        // above the box when there is room, otherwise just inside it
        let tag_y = if y0 >= TAG_H { y0 - TAG_H } else { y0 + LINE_WIDTH };
        fill(&mut out, x0, tag_y, x0 + tag_w - 1, tag_y + TAG_H - 1, color);
        let ink = if luma(color) > 140.0 {
            [0, 0, 0]
        } else {
            [255, 255, 255]
        };
        draw_text(&mut out, x0 + 1, tag_y + 1, &text, ink);
    }
    out
}
