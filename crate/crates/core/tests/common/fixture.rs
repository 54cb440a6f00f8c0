//! On-disk dataset fixtures.

use std::fs;
use std::path::Path;

use image::{GrayImage, Luma};

pub fn init_layout(root: &Path) {
    for d in ["videos", "scores", "annotations", "splits"] {
        fs::create_dir_all(root.join(d)).unwrap();
    }
}

/// Writes `frames` PNG frames of a dark scene; frames inside `event` carry a
/// bright square.
pub fn write_frames(root: &Path, id: &str, frames: usize, event: Option<(usize, usize)>) {
    let dir = root.join("videos").join(id).join("frames");
    fs::create_dir_all(&dir).unwrap();
    for i in 0..frames {
        let mut img = GrayImage::from_pixel(8, 8, Luma([40]));
        // mild deterministic flicker
        img.put_pixel((i % 8) as u32, 0, Luma([48]));
        if event.is_some_and(|(s, e)| s <= i && i <= e) {
            for y in 2..6 {
                for x in 2..6 {
                    img.put_pixel(x, y, Luma([220]));
                }
            }
        }
        img.save(dir.join(format!("{i:06}.png"))).unwrap();
    }
}

pub fn write_scores(root: &Path, id: &str, model: &str, scores: &[f64]) {
    let mut text = String::from("frame,score\n");
    for (i, s) in scores.iter().enumerate() {
        text.push_str(&format!("{i},{s}\n"));
    }
    fs::write(root.join("scores").join(format!("{id}.{model}.csv")), text).unwrap();
}

pub fn write_annotations(root: &Path, annotator: &str, rows: &[(&str, usize, usize)]) {
    let mut text = String::from("video,start,end\n");
    for (v, s, e) in rows {
        text.push_str(&format!("{v},{s},{e}\n"));
    }
    fs::write(root.join("annotations").join(format!("{annotator}.csv")), text).unwrap();
}

pub fn write_cfg(path: &Path, scene_a: &[&str], scene_b: &[&str]) {
    let mut text = String::new();
    if !scene_a.is_empty() {
        text.push_str(&format!("scene_a = {}\n", scene_a.join(",")));
    }
    if !scene_b.is_empty() {
        text.push_str(&format!("scene_b = {}\n", scene_b.join(",")));
    }
    fs::write(path, text).unwrap();
}

pub fn write_split(root: &Path, split: &str, scene_a: &[&str], scene_b: &[&str]) {
    write_cfg(&root.join("splits").join(format!("{split}.cfg")), scene_a, scene_b);
}

pub fn write_scenes(root: &Path, scene_a: &[&str], scene_b: &[&str]) {
    write_cfg(&root.join("scenes.cfg"), scene_a, scene_b);
}

/// Two scene-A videos of 8 and 10 frames, two annotators and a `perfect`
/// model whose scores are the consensus boxcar. `v01` trains split 1.
pub fn toy_dataset(root: &Path) {
    init_layout(root);
    write_frames(root, "v01", 8, None);
    write_frames(root, "v02", 10, Some((3, 6)));
    write_split(root, "Split1", &["v01"], &[]);
    write_scenes(root, &["v01", "v02"], &[]);
    write_annotations(root, "U01", &[("v01", 2, 4), ("v02", 3, 6)]);
    write_annotations(root, "U02", &[("v01", 2, 4), ("v02", 3, 6)]);
    let boxcar = |t: usize, s: usize, e: usize| -> Vec<f64> {
        (0..t).map(|i| if s <= i && i <= e { 1.0 } else { 0.0 }).collect()
    };
    write_scores(root, "v01", "perfect", &boxcar(8, 2, 4));
    write_scores(root, "v02", "perfect", &boxcar(10, 3, 6));
}
