use crate::features::Keypoint;
use crate::imagecore::ImageU8;
use crate::matching::Match;

fn color(i: usize) -> [u8; 3] {
    let h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    [(h >> 56) as u8 | 0x40, (h >> 48) as u8 | 0x40, (h >> 40) as u8 | 0x40]
}

fn put(img: &mut ImageU8, x: i64, y: i64, c: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
        for (k, v) in c.iter().enumerate() {
            img.set(x as usize, y as usize, k, *v);
        }
    }
}

fn line(img: &mut ImageU8, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: [u8; 3]) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        put(img, x0, y0, c);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Side-by-side RGB canvas (`a` left, `b` right) with one colored line per
/// match and a small cross on each endpoint.
pub fn draw_matches(a: &ImageU8, b: &ImageU8, kps_a: &[Keypoint], kps_b: &[Keypoint], matches: &[Match]) -> ImageU8 {
    let w = a.width() + b.width();
    let h = a.height().max(b.height());
    let mut out = ImageU8::filled(w, h, 3, 0).expect("non-empty inputs");
    for (img, ox) in [(a, 0), (b, a.width())] {
        for y in 0..img.height() {
            for x in 0..img.width() {
                for k in 0..3 {
                    let v = img.get(x, y, if img.channels() == 3 { k } else { 0 });
                    out.set(ox + x, y, k, v);
                }
            }
        }
    }
    for (i, m) in matches.iter().enumerate() {
        let (Some(p), Some(q)) = (kps_a.get(m.query_idx), kps_b.get(m.train_idx)) else {
            continue;
        };
        let c = color(i);
        let pa = (p.x.round() as i64, p.y.round() as i64);
        let pb = (q.x.round() as i64 + a.width() as i64, q.y.round() as i64);
        line(&mut out, pa, pb, c);
        for (x, y) in [pa, pb] {
            for d in -2..=2 {
                put(&mut out, x + d, y, c);
                put(&mut out, x, y + d, c);
            }
        }
    }
    out
}
