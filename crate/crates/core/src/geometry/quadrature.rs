use crate::vec2::Vec2;

/// Midpoint rule over the unit disk on a `cells x cells` grid covering `[-1, 1]^2`.
pub fn disk_midpoint<F: FnMut(Vec2<f64>) -> f64>(cells: usize, mut f: F) -> f64 {
    let h = 2.0 / cells as f64;
    let mut sum = 0.0;
    for j in 0..cells {
        let y = -1.0 + (j as f64 + 0.5) * h;
        for i in 0..cells {
            let x = -1.0 + (i as f64 + 0.5) * h;
            if x * x + y * y < 1.0 {
                sum += f(Vec2::new(x, y));
            }
        }
    }
    sum * h * h
}

/// Midpoint-rule L2 norm over the unit disk.
pub fn disk_l2<F: FnMut(Vec2<f64>) -> f64>(cells: usize, mut f: F) -> f64 {
    disk_midpoint(cells, |x| {
        let v = f(x);
        v * v
    })
    .sqrt()
}
