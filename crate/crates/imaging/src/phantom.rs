//! Synthetic test images and seeded noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ImagingError, Result};
use crate::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phantom {
    /// 8×8 blocks alternating between 50 and 200.
    Checkerboard,
    /// Diagonal ramp from 0 to 255.
    Ramp,
    /// A rectangle, a disc and a bar on a dark background.
    Shapes,
}

impl Phantom {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "checkerboard" => Ok(Phantom::Checkerboard),
            "ramp" => Ok(Phantom::Ramp),
            "shapes" => Ok(Phantom::Shapes),
            other => Err(ImagingError::InvalidParameter {
                name: "phantom",
                reason: format!("unknown phantom `{other}`"),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phantom::Checkerboard => "checkerboard",
            Phantom::Ramp => "ramp",
            Phantom::Shapes => "shapes",
        }
    }

    pub fn render(self, rows: usize, cols: usize) -> Result<Image> {
        let mut px = vec![0.0; rows * cols];
        let (fr, fc) = (rows as f64, cols as f64);
        for r in 0..rows {
            for c in 0..cols {
                px[r * cols + c] = match self {
                    Phantom::Checkerboard => {
                        let block = (rows.max(cols) / 8).max(1);
                        if (r / block + c / block).is_multiple_of(2) {
                            50.0
                        } else {
                            200.0
                        }
                    }
                    Phantom::Ramp => {
                        let span = (rows + cols).saturating_sub(2).max(1) as f64;
                        255.0 * (r + c) as f64 / span
                    }
                    Phantom::Shapes => {
                        let (y, x) = ((r as f64 + 0.5) / fr, (c as f64 + 0.5) / fc);
                        if ((y - 0.65).powi(2) + (x - 0.65).powi(2)).sqrt() < 0.2 {
                            120.0
                        } else if (0.15..0.45).contains(&y) && (0.1..0.5).contains(&x) {
                            220.0
                        } else if (0.75..0.85).contains(&y) && (0.1..0.4).contains(&x) {
                            170.0
                        } else {
                            30.0
                        }
                    }
                };
            }
        }
        Image::new(rows, cols, px)
    }
}

/// Adds `N(0, sigma²)` noise from a seeded generator and clamps to `[0, 255]`.
pub fn add_gaussian_noise(image: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ImagingError::InvalidParameter {
            name: "noise sigma",
            reason: format!("must be nonnegative, got {sigma}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    let px = image
        .pixels
        .iter()
        .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, 255.0))
        .collect();
    Image::new(image.rows, image.cols, px)
}
