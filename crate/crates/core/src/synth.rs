//! Synthetic grey-level test images.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{ImageGrid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestImage {
    /// Disk, rectangles, a ramp patch and a bright bar on a dark background.
    Shapes,
    Disk,
    /// Vertical step edges of increasing height.
    Steps,
    Checkerboard,
    /// Horizontal linear ramp from 0 to 255.
    Ramp,
}

impl FromStr for TestImage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shapes" => Ok(TestImage::Shapes),
            "disk" => Ok(TestImage::Disk),
            "steps" => Ok(TestImage::Steps),
            "checkerboard" => Ok(TestImage::Checkerboard),
            "ramp" => Ok(TestImage::Ramp),
            other => Err(Error::InvalidParameter(format!("unknown test image `{other}`"))),
        }
    }
}

impl fmt::Display for TestImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TestImage::Shapes => "shapes",
            TestImage::Disk => "disk",
            TestImage::Steps => "steps",
            TestImage::Checkerboard => "checkerboard",
            TestImage::Ramp => "ramp",
        };
        f.write_str(s)
    }
}

/// Renders `kind` on `grid`. Values are integers in `[0, 255]`.
pub fn generate(kind: TestImage, grid: ImageGrid) -> ScalarField {
    let (w, h) = (grid.width() as f64, grid.height() as f64);
    let field = match kind {
        TestImage::Shapes => ScalarField::from_fn(grid, |i, j| {
            // coordinates in units of a 128x128 canvas
            let x = i as f64 * 128.0 / w;
            let y = j as f64 * 128.0 / h;
            if (x - 40.0).powi(2) + (y - 45.0).powi(2) < 22.0 * 22.0 {
                200.0
            } else if (80.0..115.0).contains(&y) && (20.0..60.0).contains(&x) {
                140.0
            } else if (70.0..110.0).contains(&y) && (75.0..115.0).contains(&x) {
                (40.0 + (x - 75.0).floor() * 5.0).min(255.0)
            } else if (15.0..40.0).contains(&y) && (80.0..118.0).contains(&x) {
                230.0
            } else {
                60.0
            }
        }),
        TestImage::Disk => ScalarField::from_fn(grid, |i, j| {
            let (dx, dy) = (i as f64 + 0.5 - w / 2.0, j as f64 + 0.5 - h / 2.0);
            if dx.hypot(dy) < 0.3 * w.min(h) {
                200.0
            } else {
                50.0
            }
        }),
        TestImage::Steps => ScalarField::from_fn(grid, |i, _| {
            let band = (i as f64 * 4.0 / w).floor();
            40.0 + 50.0 * band
        }),
        TestImage::Checkerboard => ScalarField::from_fn(grid, |i, j| {
            let cell = (w.min(h) / 8.0).max(1.0) as usize;
            if (i / cell + j / cell) % 2 == 0 {
                60.0
            } else {
                190.0
            }
        }),
        TestImage::Ramp => ScalarField::from_fn(grid, |i, _| {
            (255.0 * i as f64 / (w - 1.0)).round()
        }),
    };
    field.expect("synthetic images are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_kinds_are_integer_valued_bytes() {
        let grid = ImageGrid::unit(64, 48).unwrap();
        for kind in [
            TestImage::Shapes,
            TestImage::Disk,
            TestImage::Steps,
            TestImage::Checkerboard,
            TestImage::Ramp,
        ] {
            let f = generate(kind, grid);
            assert!(f
                .values()
                .iter()
                .all(|&x| (0.0..=255.0).contains(&x) && x.fract() == 0.0));
            assert!(f.max() > f.min(), "{kind} is flat");
            assert_eq!(kind.to_string().parse::<TestImage>().unwrap(), kind);
        }
    }
}
