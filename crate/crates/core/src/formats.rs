//! On-disk formats: score CSVs, annotation CSVs and `.cfg` scene lists.
//!
//! All files are UTF-8 with LF line endings and no quoting. Writers produce
//! byte-identical output for identical input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{EventInterval, Scene, VideoId};

pub const SCORE_HEADER: &str = "frame,score";
pub const ANNOTATION_HEADER: &str = "video,start,end";

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .quoting(false)
        .from_reader(file))
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &str) -> Result<()> {
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    let want: Vec<&str> = expected.split(',').collect();
    if got != want {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `{expected}`, found `{}`", got.join(",")),
        ));
    }
    Ok(())
}

fn records(
    path: &Path,
    rdr: &mut csv::Reader<fs::File>,
) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn field<'r>(path: &Path, line: usize, rec: &'r csv::StringRecord, i: usize) -> Result<&'r str> {
    rec.get(i)
        .ok_or_else(|| Error::parse(path, line, format!("missing column {}", i + 1)))
}

fn parse_index(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(path, line, format!("invalid frame index {s:?}")))
}

/// Reads a `frame,score` file. Row `i` must carry frame index `i`.
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    check_header(path, &mut rdr, SCORE_HEADER)?;
    let mut scores = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        let frame = parse_index(path, line, field(path, line, &rec, 0)?)?;
        if frame != scores.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected frame {}, found {frame}", scores.len()),
            ));
        }
        let raw = field(path, line, &rec, 1)?;
        let score: f64 = raw
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid score {raw:?}")))?;
        scores.push(score);
    }
    Ok(scores)
}

/// Renders a per-frame value column with the given header (`frame,score`, `frame,value`).
pub fn render_series(header: &str, values: &[f64]) -> String {
    let mut out = String::with_capacity(16 * (values.len() + 1));
    out.push_str(header);
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

/// One parsed row of an annotation (or prediction / consensus) file.
pub type IntervalRow = (usize, VideoId, EventInterval);

/// Reads a `video,start,end` file. Returns rows with their source line numbers.
pub fn read_annotations(path: &Path) -> Result<Vec<IntervalRow>> {
    let mut rdr = reader(path)?;
    check_header(path, &mut rdr, ANNOTATION_HEADER)?;
    let mut rows = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        let video = VideoId::new(field(path, line, &rec, 0)?)?;
        let start = parse_index(path, line, field(path, line, &rec, 1)?)?;
        let end = parse_index(path, line, field(path, line, &rec, 2)?)?;
        let interval = EventInterval::new(start, end)?;
        rows.push((line, video, interval));
    }
    Ok(rows)
}

/// Renders a `video,start,end` file; `None` intervals leave `start,end` empty.
pub fn render_intervals<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a VideoId, Option<EventInterval>)>,
{
    let mut out = String::from(ANNOTATION_HEADER);
    out.push('\n');
    for (video, iv) in rows {
        match iv {
            Some(iv) => {
                let _ = writeln!(out, "{video},{},{}", iv.start(), iv.end());
            }
            None => {
                let _ = writeln!(out, "{video},,");
            }
        }
    }
    out
}

/// Parses `scene_a = v01,v02` style lines. Blank lines and `#` comments are skipped.
pub fn read_scene_lists(path: &Path) -> Result<BTreeMap<Scene, Vec<VideoId>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene_lists(path, &text)
}

pub(crate) fn parse_scene_lists(path: &Path, text: &str) -> Result<BTreeMap<Scene, Vec<VideoId>>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line, "expected `key = ids`"))?;
        let scene = Scene::from_cfg_key(key.trim())
            .ok_or_else(|| Error::parse(path, line, format!("unknown key {:?}", key.trim())))?;
        let ids = value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(VideoId::new)
            .collect::<Result<Vec<_>>>()?;
        if out.insert(scene, ids).is_some() {
            return Err(Error::parse(path, line, format!("duplicate key {}", scene.cfg_key())));
        }
    }
    Ok(out)
}

pub fn render_scene_lists(lists: &BTreeMap<Scene, Vec<VideoId>>) -> String {
    let mut out = String::new();
    for (scene, ids) in lists {
        let joined: Vec<&str> = ids.iter().map(VideoId::as_str).collect();
        let _ = writeln!(out, "{} = {}", scene.cfg_key(), joined.join(","));
    }
    out
}

/// Writes `contents` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile_in(dir, path)?;
    tmp.1
        .write_all(contents)
        .and_then(|_| tmp.1.sync_all())
        .map_err(|e| Error::io(&tmp.0, e))?;
    drop(tmp.1);
    fs::rename(&tmp.0, path).map_err(|e| Error::io(path, e))
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(std::path::PathBuf, fs::File)> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let name = target
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    loop {
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = dir.join(format!(".{name}.{}.{n}.tmp", std::process::id()));
        match fs::OpenOptions::new().write(true).create_new(true).open(&tmp) {
            Ok(f) => return Ok((tmp, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(&tmp, e)),
        }
    }
}
