//! Import environments from binary occupancy rasters.
//!
//! Accepts binary PGM images (magic `P5`; bright pixels are free space) or
//! plain text grids of `0` (free) and `1` (occupied). The largest connected
//! free region is kept and every other free pocket is filled. Walls are the
//! boundary edges of the kept region, merged into maximal straight
//! segments. Row 0 of the raster is the top of the map.

use super::Environment;
use crate::geometry::{Rect, Segment, Vec2};
use crate::{Error, Result};
use std::collections::BTreeMap;

struct Raster {
    w: usize,
    h: usize,
    /// true = occupied; row-major with row 0 at the BOTTOM (world order).
    occ: Vec<bool>,
}

fn parse_pgm(data: &[u8]) -> Result<Raster> {
    // Tokenizer over the header: whitespace-separated, '#' starts a comment.
    let mut pos = 2; // past "P5"
    let token = |pos: &mut usize| -> Result<usize> {
        loop {
            while *pos < data.len() && data[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < data.len() && data[*pos] == b'#' {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < data.len() && data[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return Err(Error::Parse("malformed image header".to_string()));
        }
        std::str::from_utf8(&data[start..*pos])
            .unwrap()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad image header number: {e}")))
    };
    let w = token(&mut pos)?;
    let h = token(&mut pos)?;
    let maxval = token(&mut pos)?;
    if w == 0 || h == 0 || maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!(
            "unsupported image dimensions {w}x{h} maxval {maxval}"
        )));
    }
    pos += 1; // single whitespace after maxval
    if data.len() < pos + w * h {
        return Err(Error::Parse("image pixel data truncated".to_string()));
    }
    let mut occ = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let px = data[pos + r * w + c] as usize;
            let free = px * 2 >= maxval;
            // Image row 0 is the top: flip to world order (row 0 bottom).
            occ[(h - 1 - r) * w + c] = !free;
        }
    }
    Ok(Raster { w, h, occ })
}

fn parse_ascii(data: &[u8]) -> Result<Raster> {
    let text = std::str::from_utf8(data)
        .map_err(|_| Error::Parse("occupancy grid is not valid text".to_string()))?;
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut row = Vec::new();
        for ch in line.chars() {
            match ch {
                '0' => row.push(false),
                '1' => row.push(true),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::Parse(format!(
                        "unexpected character {c:?} on line {}",
                        ln + 1
                    )))
                }
            }
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if h == 0 || w == 0 {
        return Err(Error::Parse("empty occupancy grid".to_string()));
    }
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::Parse("occupancy grid rows differ in width".to_string()));
    }
    let mut occ = vec![false; w * h];
    for (r, row) in rows.iter().enumerate() {
        for (c, &is_occ) in row.iter().enumerate() {
            occ[(h - 1 - r) * w + c] = is_occ;
        }
    }
    Ok(Raster { w, h, occ })
}

/// Keep the largest 4-connected free region (first in row-major order wins
/// ties) and mark every other free cell occupied. Returns the free count.
fn keep_largest_region(r: &mut Raster) -> usize {
    let (w, h) = (r.w, r.h);
    let mut comp = vec![usize::MAX; w * h];
    let mut sizes = Vec::new();
    for start in 0..w * h {
        if r.occ[start] || comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0usize;
        let mut stack = vec![start];
        comp[start] = id;
        while let Some(c) = stack.pop() {
            size += 1;
            let (i, j) = (c % w, c / w);
            let mut push = |idx: usize| {
                if !r.occ[idx] && comp[idx] == usize::MAX {
                    comp[idx] = id;
                    stack.push(idx);
                }
            };
            if i > 0 {
                push(c - 1);
            }
            if i + 1 < w {
                push(c + 1);
            }
            if j > 0 {
                push(c - w);
            }
            if j + 1 < h {
                push(c + w);
            }
        }
        sizes.push(size);
    }
    if sizes.is_empty() {
        return 0;
    }
    let best = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .unwrap()
        .0;
    for c in 0..w * h {
        if !r.occ[c] && comp[c] != best {
            r.occ[c] = true;
        }
    }
    sizes[best]
}

/// Merge the unit boundary edges between free and occupied cells (or the
/// raster border) into maximal straight wall segments.
fn extract_walls(r: &Raster, cell: f64) -> Vec<Segment> {
    let (w, h) = (r.w, r.h);
    let occ_at = |i: i64, j: i64| -> bool {
        if i < 0 || j < 0 || i >= w as i64 || j >= h as i64 {
            true
        } else {
            r.occ[j as usize * w + i as usize]
        }
    };
    // Horizontal edges at y = j*cell (j in 0..=h): separate cell (i, j-1)
    // below from (i, j) above; an edge exists when exactly one side is free.
    let mut horiz: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in 0..=h {
        for i in 0..w {
            let below = occ_at(i as i64, j as i64 - 1);
            let above = occ_at(i as i64, j as i64);
            if below != above {
                horiz.entry(j).or_default().push(i);
            }
        }
    }
    let mut vert: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..=w {
        for j in 0..h {
            let left = occ_at(i as i64 - 1, j as i64);
            let right = occ_at(i as i64, j as i64);
            if left != right {
                vert.entry(i).or_default().push(j);
            }
        }
    }
    let mut walls = Vec::new();
    for (j, mut xs) in horiz {
        xs.sort_unstable();
        let y = j as f64 * cell;
        let mut run: Option<(usize, usize)> = None;
        for &i in &xs {
            run = match run {
                Some((a, b)) if i == b + 1 => Some((a, i)),
                Some((a, b)) => {
                    walls.push(Segment::new(
                        Vec2::new(a as f64 * cell, y),
                        Vec2::new((b + 1) as f64 * cell, y),
                    ));
                    Some((i, i))
                }
                None => Some((i, i)),
            };
        }
        if let Some((a, b)) = run {
            walls.push(Segment::new(
                Vec2::new(a as f64 * cell, y),
                Vec2::new((b + 1) as f64 * cell, y),
            ));
        }
    }
    for (i, mut ys) in vert {
        ys.sort_unstable();
        let x = i as f64 * cell;
        let mut run: Option<(usize, usize)> = None;
        for &j in &ys {
            run = match run {
                Some((a, b)) if j == b + 1 => Some((a, j)),
                Some((a, b)) => {
                    walls.push(Segment::new(
                        Vec2::new(x, a as f64 * cell),
                        Vec2::new(x, (b + 1) as f64 * cell),
                    ));
                    Some((j, j))
                }
                None => Some((j, j)),
            };
        }
        if let Some((a, b)) = run {
            walls.push(Segment::new(
                Vec2::new(x, a as f64 * cell),
                Vec2::new(x, (b + 1) as f64 * cell),
            ));
        }
    }
    walls
}

/// Best free axis-aligned rectangle to spawn in: scan every maximal free
/// rectangle (largest-rectangle-in-histogram per row), clamp each to at most
/// ~4 m per side with the clamp window slid away from the source, and keep
/// the one with the largest shorter side, then largest area, then greatest
/// center distance from the source. Deterministic for a given raster.
fn spawn_rectangle(raster: &Raster, cell: f64, source: Vec2) -> Rect {
    let (w, h) = (raster.w, raster.h);
    let max_cells = ((4.0 / cell).floor() as usize).max(1);
    let mut best: Option<((f64, f64, f64), (usize, usize), Rect)> = None;
    let mut consider = |i0: usize, i1: usize, j0: usize, j1: usize| {
        let clamp_axis = |lo: usize, hi: usize, src: f64| -> (usize, usize) {
            let n = hi - lo + 1;
            if n <= max_cells {
                return (lo, hi);
            }
            let mid = cell * (lo + hi + 1) as f64 / 2.0;
            if src < mid {
                (hi + 1 - max_cells, hi) // slide window away from the source
            } else {
                (lo, lo + max_cells - 1)
            }
        };
        let (i0, i1) = clamp_axis(i0, i1, source.x);
        let (j0, j1) = clamp_axis(j0, j1, source.y);
        let rect = Rect::new(
            Vec2::new(i0 as f64 * cell, j0 as f64 * cell),
            Vec2::new((i1 + 1) as f64 * cell, (j1 + 1) as f64 * cell),
        );
        let score = (
            rect.width().min(rect.height()),
            rect.width() * rect.height(),
            rect.center().dist(source),
        );
        let better = match &best {
            None => true,
            Some((s, key, _)) => {
                score > *s || (score == *s && (j0, i0) < *key)
            }
        };
        if better {
            best = Some((score, (j0, i0), rect));
        }
    };
    let mut heights = vec![0usize; w];
    for j in 0..h {
        for (i, hgt) in heights.iter_mut().enumerate() {
            *hgt = if raster.occ[j * w + i] { 0 } else { *hgt + 1 };
        }
        // Largest-rectangle-in-histogram stack sweep; every popped bar
        // yields one maximal rectangle with its base on row j.
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for i in 0..=w {
            let cur = if i < w { heights[i] } else { 0 };
            let mut start = i;
            while let Some(&(s, bar)) = stack.last() {
                if bar <= cur {
                    break;
                }
                stack.pop();
                start = s;
                consider(s, i - 1, j + 1 - bar, j);
            }
            if cur > 0 && stack.last().map_or(true, |&(_, bar)| bar < cur) {
                stack.push((start, cur));
            }
        }
    }
    best.expect("raster has at least one free cell").2
}

fn fnv64(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Build an environment from an occupancy raster (`P5` PGM or text 0/1
/// grid) with square cells of `cell_size` meters.
///
/// The gas source sits at the free cell nearest the free-space centroid;
/// the spawn region is the best free rectangle by shorter-side length,
/// area, and distance from the source. No vents are assigned — add them with
/// `assign_vents` before solving airflow (this requires the free region to
/// touch the arena border).
pub fn load_occupancy_image(data: &[u8], cell_size: f64) -> Result<Environment> {
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return Err(Error::Config(format!("bad cell size {cell_size}")));
    }
    let mut raster = if data.starts_with(b"P5") {
        parse_pgm(data)?
    } else {
        parse_ascii(data)?
    };
    let free = keep_largest_region(&mut raster);
    if free < 9 {
        return Err(Error::Parse(format!(
            "degenerate free space: {free} free cells"
        )));
    }
    let (w, h) = (raster.w, raster.h);
    let cell = cell_size;
    let center_of = |i: usize, j: usize| {
        Vec2::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell)
    };
    let free_cells: Vec<(usize, usize)> = (0..w * h)
        .filter(|&c| !raster.occ[c])
        .map(|c| (c % w, c / w))
        .collect();
    let centroid = free_cells
        .iter()
        .fold(Vec2::ZERO, |acc, &(i, j)| acc + center_of(i, j))
        * (1.0 / free_cells.len() as f64);
    let source_cell = *free_cells
        .iter()
        .min_by(|a, b| {
            let da = center_of(a.0, a.1).dist(centroid);
            let db = center_of(b.0, b.1).dist(centroid);
            da.partial_cmp(&db).unwrap().then((a.1, a.0).cmp(&(b.1, b.0)))
        })
        .unwrap();
    let source_pos = center_of(source_cell.0, source_cell.1);
    let raw = spawn_rectangle(&raster, cell, source_pos);
    let inset = cell
        .min((raw.width() - 1.0) / 2.0)
        .min((raw.height() - 1.0) / 2.0)
        .max(0.0);
    let spawn_region = raw.inset(inset);
    if spawn_region.width() < 1.0 - 1e-9 || spawn_region.height() < 1.0 - 1e-9 {
        return Err(Error::Parse(
            "free space too small for a spawn region".to_string(),
        ));
    }
    let walls = extract_walls(&raster, cell);
    Ok(Environment {
        id: format!("import-{:016x}", fnv64(data)),
        size: Vec2::new(w as f64 * cell, h as f64 * cell),
        walls,
        inlets: Vec::new(),
        outlets: Vec::new(),
        source_pos,
        spawn_region,
        seed: 0,
    })
}
