//! Deterministic synthetic datasets.
//!
//! The digit generator renders seven-segment style glyphs on a 28x28 grid
//! with randomized placement, stroke geometry, intensity, and pixel noise.
//! It stands in for a handwritten-digit corpus at desk scale: a small dense
//! network trains to high accuracy on it, yet samples keep enough variation
//! that one-step attacks are far from trivial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;

const SIDE: usize = 28;

/// Two 2-D Gaussian blobs, one per class, clamped into the unit square.
/// `separation_sigmas` is the center distance in units of the blob sigma.
/// Returns (train, test), each with `n_per_class` samples per class.
pub fn two_gaussians(n_per_class: usize, separation_sigmas: f32, seed: u64) -> (Dataset, Dataset) {
    let sigma = 0.08f32;
    let offset = separation_sigmas * sigma / 2.0 / std::f32::consts::SQRT_2;
    let centers = [
        [0.5 - offset, 0.5 - offset],
        [0.5 + offset, 0.5 + offset],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make = |n: usize| {
        let mut inputs = Vec::with_capacity(n * 2 * 2);
        let mut labels = Vec::with_capacity(n * 2);
        for i in 0..n * 2 {
            let class = i % 2;
            for axis in 0..2 {
                let u1: f32 = rng.random_range(1e-7..1.0);
                let u2: f32 = rng.random_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f32::consts::PI * u2).cos();
                inputs.push((centers[class][axis] + sigma * z).clamp(0.0, 1.0));
            }
            labels.push(class);
        }
        Dataset::new(inputs, labels, 2, 2).unwrap()
    };
    (make(n_per_class), make(n_per_class))
}

/// Segment bit per position: A top bar, B top-right, C bottom-right,
/// D bottom bar, E bottom-left, F top-left, G middle bar.
const SEG_A: u8 = 1;
const SEG_B: u8 = 2;
const SEG_C: u8 = 4;
const SEG_D: u8 = 8;
const SEG_E: u8 = 16;
const SEG_F: u8 = 32;
const SEG_G: u8 = 64;

const DIGIT_SEGMENTS: [u8; 10] = [
    SEG_A | SEG_B | SEG_C | SEG_D | SEG_E | SEG_F,
    SEG_B | SEG_C,
    SEG_A | SEG_B | SEG_G | SEG_E | SEG_D,
    SEG_A | SEG_B | SEG_G | SEG_C | SEG_D,
    SEG_F | SEG_G | SEG_B | SEG_C,
    SEG_A | SEG_F | SEG_G | SEG_C | SEG_D,
    SEG_A | SEG_F | SEG_G | SEG_E | SEG_C | SEG_D,
    SEG_A | SEG_B | SEG_C,
    SEG_A | SEG_B | SEG_C | SEG_D | SEG_E | SEG_F | SEG_G,
    SEG_A | SEG_B | SEG_C | SEG_D | SEG_F | SEG_G,
];

fn fill_rect(canvas: &mut [f32], r0: usize, r1: usize, c0: usize, c1: usize, value: f32) {
    for r in r0..r1.min(SIDE) {
        for c in c0..c1.min(SIDE) {
            let cell = &mut canvas[r * SIDE + c];
            *cell = cell.max(value);
        }
    }
}

fn render_glyph(digit: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let mut canvas = vec![0.0f32; SIDE * SIDE];

    let h = rng.random_range(17..=20usize);
    let w = rng.random_range(10..=13usize);
    let t = rng.random_range(2..=3usize);
    let r0 = (SIDE - h) / 2 + rng.random_range(0..=4usize).wrapping_sub(2).min(SIDE);
    let r0 = ((SIDE - h) / 2) as i32 + rng.random_range(-2..=2i32);
    let c0 = ((SIDE - w) / 2) as i32 + rng.random_range(-3..=3i32);
    let r0 = r0.clamp(0, (SIDE - h) as i32) as usize;
    let c0 = c0.clamp(0, (SIDE - w) as i32) as usize;
    let mid = r0 + h / 2;

    let segs = DIGIT_SEGMENTS[digit];
    let mut seg_value = |rng: &mut ChaCha8Rng| rng.random_range(0.65..1.0f32);
    if segs & SEG_A != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, r0, r0 + t, c0, c0 + w, v);
    }
    if segs & SEG_B != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, r0, mid, c0 + w - t, c0 + w, v);
    }
    if segs & SEG_C != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, mid, r0 + h, c0 + w - t, c0 + w, v);
    }
    if segs & SEG_D != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, r0 + h - t, r0 + h, c0, c0 + w, v);
    }
    if segs & SEG_E != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, mid, r0 + h, c0, c0 + t, v);
    }
    if segs & SEG_F != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, r0, mid, c0, c0 + t, v);
    }
    if segs & SEG_G != 0 {
        let v = seg_value(rng);
        fill_rect(&mut canvas, mid - t / 2, mid - t / 2 + t, c0, c0 + w, v);
    }

    // Pixel noise over the whole canvas.
    for cell in canvas.iter_mut() {
        *cell = (*cell + rng.random_range(0.0..0.18f32)).clamp(0.0, 1.0);
    }
    canvas
}

/// Renders `n` glyph samples cycling through the ten digit classes.
pub fn digits(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n * SIDE * SIDE);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let digit = i % 10;
        inputs.extend(render_glyph(digit, &mut rng));
        labels.push(digit);
    }
    Dataset::new(inputs, labels, SIDE * SIDE, 10).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussians_are_deterministic_and_in_range() {
        let (a_train, a_test) = two_gaussians(50, 4.0, 7);
        let (b_train, b_test) = two_gaussians(50, 4.0, 7);
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        assert_eq!(a_train.len(), 100);
        assert_eq!(a_train.class_count(), 2);
    }

    #[test]
    fn glyphs_are_deterministic_and_shaped() {
        let a = digits(40, 11);
        let b = digits(40, 11);
        assert_eq!(a, b);
        assert_eq!(a.input_dim(), 784);
        assert_eq!(a.class_count(), 10);
        let counts = (0..a.len()).fold([0usize; 10], |mut acc, i| {
            acc[a.label(i)] += 1;
            acc
        });
        assert!(counts.iter().all(|&c| c == 4));
    }

    #[test]
    fn glyphs_of_different_classes_differ() {
        let ds = digits(20, 0);
        // Same generator position, different digits: the images must not
        // collapse onto each other.
        let d0 = ds.sample(0);
        let d1 = ds.sample(1);
        let diff: f32 = d0.iter().zip(d1).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff > 5.0);
    }
}
