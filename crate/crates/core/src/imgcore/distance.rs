use super::BinaryMask;

/// Chamfer (3, 4) distance from each foreground pixel to the nearest
/// background pixel, in pixel units. Outside the raster counts as background.
/// Background pixels get 0.
pub fn distance_transform(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = (mask.width(), mask.height());
    const INF: u32 = u32::MAX / 2;
    let mut d: Vec<u32> = mask.as_raw().iter().map(|&v| if v { INF } else { 0 }).collect();
    let at = |d: &[u32], x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0
        } else {
            d[y as usize * w + x as usize]
        }
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            if d[i] == 0 {
                continue;
            }
            let best = [(-1, -1, 4), (0, -1, 3), (1, -1, 4), (-1, 0, 3)]
                .iter()
                .map(|&(dx, dy, c)| at(&d, x + dx, y + dy) + c)
                .min()
                .unwrap();
            d[i] = d[i].min(best);
        }
    }
    for y in (0..h as isize).rev() {
        for x in (0..w as isize).rev() {
            let i = y as usize * w + x as usize;
            if d[i] == 0 {
                continue;
            }
            let best = [(1, 1, 4), (0, 1, 3), (-1, 1, 4), (1, 0, 3)]
                .iter()
                .map(|&(dx, dy, c)| at(&d, x + dx, y + dy) + c)
                .min()
                .unwrap();
            d[i] = d[i].min(best);
        }
    }
    d.into_iter().map(|v| v as f64 / 3.0).collect()
}
