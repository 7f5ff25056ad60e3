mod common;

use common::oracles::brute_force_otsu;

use flimreg_core::datamodel::{PlaneKind, RgbImage, ScalarPlane};
use flimreg_core::imaging::{
    hist_equalize, mask_background, otsu_threshold, render_lifetime, resize_rgb, to_grayscale, Colormap,
    LifetimeRenderSpec, Weighting,
};
use flimreg_core::Error;
use image::Rgb;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn plane_of(levels: &[u8], w: usize) -> ScalarPlane {
    ScalarPlane::new(w, levels.len() / w, PlaneKind::IntensityCounts, levels.iter().map(|&v| f32::from(v)).collect())
        .unwrap()
}

#[test]
fn otsu_matches_exhaustive_search() {
    let mut r = common::rng(31);
    let mut checked = 0;
    for i in 0..1000 {
        let n = 24 * 24;
        let levels: Vec<u8> = match i % 3 {
            0 => (0..n).map(|_| r.random()).collect(),
            1 => {
                let lo = Normal::new(r.random_range(20.0..110.0), r.random_range(3.0..25.0)).unwrap();
                let hi = Normal::new(r.random_range(140.0..230.0), r.random_range(3.0..25.0)).unwrap();
                (0..n)
                    .map(|_| {
                        let v: f64 = if r.random_bool(0.4) { lo.sample(&mut r) } else { hi.sample(&mut r) };
                        v.round().clamp(0.0, 255.0) as u8
                    })
                    .collect()
            }
            // few distinct levels: exact ties are common here
            _ => {
                let palette: Vec<u8> = (0..r.random_range(2..5)).map(|_| r.random()).collect();
                (0..n).map(|_| palette[r.random_range(0..palette.len())]).collect()
            }
        };
        let Some(expected) = brute_force_otsu(&levels) else { continue };
        let (t, mask) = otsu_threshold(&plane_of(&levels, 24)).unwrap();
        assert_eq!(t, expected, "image {i}");
        assert!(mask.bits().iter().zip(&levels).all(|(&b, &v)| b == (v > t)));
        checked += 1;
    }
    assert!(checked > 990);
}

#[test]
fn symmetric_tie_goes_to_lowest_threshold() {
    // levels 0, 100, 200 in equal thirds: splitting after 0 or after 100 scores the same
    let levels: Vec<u8> = (0..300).map(|i| [0, 100, 200][i % 3]).collect();
    assert_eq!(brute_force_otsu(&levels), Some(0));
    assert_eq!(otsu_threshold(&plane_of(&levels, 30)).unwrap().0, 0);
}

#[test]
fn grayscale_examples() {
    let img = RgbImage::from_fn(3, 1, |x, _| [Rgb([255, 255, 255]), Rgb([255, 0, 0]), Rgb([37, 37, 37])][x as usize]);
    assert_eq!(to_grayscale(&img).values(), &[255.0, 76.0, 37.0]);
}

#[test]
fn equalisation_pushes_two_levels_apart() {
    let levels: Vec<u8> = (0..64).map(|i| if i < 32 { 0 } else { 128 }).collect();
    let eq = hist_equalize(&plane_of(&levels, 8));
    assert_eq!(eq.values()[0], 127.0);
    assert_eq!(eq.values()[63], 255.0);
}

#[test]
fn tissue_on_white_slide() {
    let img = RgbImage::from_fn(40, 30, |x, y| {
        if (10..30).contains(&x) && (8..22).contains(&y) {
            // eosin-pink stroma with hematoxylin-purple nuclei
            if (x / 3 + y / 3) % 4 == 0 { Rgb([80, 40, 130]) } else { Rgb([220, 120, 180]) }
        } else {
            Rgb([244, 242, 246])
        }
    });
    let (out, mask) = mask_background(&img).unwrap();
    for (x, y, p) in out.enumerate_pixels() {
        let tissue = (10..30).contains(&x) && (8..22).contains(&y);
        assert_eq!(mask.get(x as usize, y as usize), tissue);
        assert_eq!(*p, if tissue { *img.get_pixel(x, y) } else { Rgb([0, 0, 0]) });
    }
    assert!(matches!(mask_background(&RgbImage::from_pixel(5, 5, Rgb([255, 255, 255]))), Err(Error::DegenerateHistogram)));
}

#[test]
fn render_examples() {
    let tau = ScalarPlane::new(2, 1, PlaneKind::LifetimeNs, vec![1.0, 2.0]).unwrap();
    let out = render_lifetime(&tau, None, &LifetimeRenderSpec::default()).unwrap();
    assert_eq!(*out.get_pixel(0, 0), Rgb([0, 0, 128]));
    let weights = ScalarPlane::new(2, 1, PlaneKind::IntensityCounts, vec![0.0, 1.0]).unwrap();
    let spec = LifetimeRenderSpec { weighting: Weighting::Intensity, ..Default::default() };
    let out = render_lifetime(&tau, Some(&weights), &spec).unwrap();
    assert_eq!(*out.get_pixel(0, 0), Rgb([0, 0, 0]));
    assert_ne!(*out.get_pixel(1, 0), Rgb([0, 0, 0]));

    let ramp = ScalarPlane::new(50, 1, PlaneKind::LifetimeNs, (0..50).map(|i| 0.5 + i as f32 * 0.06).collect()).unwrap();
    let gray = render_lifetime(&ramp, None, &LifetimeRenderSpec { colormap: Colormap::Gray, ..Default::default() }).unwrap();
    let vals: Vec<u8> = gray.pixels().map(|p| p.0[0]).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn checkerboard_upsample() {
    let img = RgbImage::from_fn(2, 2, |x, y| if (x + y) % 2 == 0 { Rgb([0, 0, 0]) } else { Rgb([255, 255, 255]) });
    let out = resize_rgb(&img, 4, 4).unwrap();
    // half-pixel centres: output column 1 samples x = 0.25, row 0 clamps to y = 0
    assert_eq!(out.get_pixel(0, 0).0[0], 0);
    assert_eq!(out.get_pixel(1, 0).0[0], 64);
    assert_eq!(out.get_pixel(1, 1).0[0], 96);
    assert_eq!(out.get_pixel(3, 0).0[0], 255);
}
