//! On-disk formats: sequence directories (binary PGM frames, a key-value
//! manifest, groundtruth), prediction files and scenario files.
//!
//! ```text
//! seq/
//!   sequence.meta      key=value lines: name, width, height, length, attributes, seed, spec_hash
//!   groundtruth.txt    one line per frame: x,y,w,h or absent
//!   00000000.pgm ...
//! ```
//!
//! Prediction files hold one line per frame, `x,y,w,h,confidence` or
//! `absent,confidence`. Reals are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::evaluation::{parse_attributes, FrameRecord, PredictionTrack};
use crate::frame::Frame;
use crate::geometry::FrameDims;
use crate::simulator::{ScenarioSpec, SequenceRecord};
use crate::BBox64;

pub const META_FILE: &str = "sequence.meta";
pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";

pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("{index:08}.pgm"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(frame.pixels(), frame.width(), frame.height(), ExtendedColorType::L8)
        .map_err(|source| Error::Image {
            path: path.into(),
            source,
        })?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Frame> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let image_err = |source| Error::Image {
        path: path.into(),
        source,
    };
    let decoder = PnmDecoder::new(BufReader::new(file)).map_err(image_err)?;
    let img = DynamicImage::from_decoder(decoder).map_err(image_err)?.into_luma8();
    let dims = FrameDims::new(img.width(), img.height())?;
    Frame::new(dims, img.into_raw())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

fn parse_reals(path: &Path, line: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, line, format!("bad number `{}`", f.trim())))
        })
        .collect()
}

fn format_box(b: &BBox64) -> String {
    format!("{},{},{},{}", b.x(), b.y(), b.w(), b.h())
}

fn make_box(path: &Path, line: usize, v: &[f64]) -> Result<BBox64> {
    BBox64::new(v[0], v[1], v[2], v[3]).map_err(|e| parse_err(path, line, e.to_string()))
}

pub fn format_groundtruth(gt: &[Option<BBox64>]) -> String {
    gt.iter()
        .map(|g| g.as_ref().map_or_else(|| "absent".to_string(), format_box) + "\n")
        .collect()
}

/// `path` only labels errors.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<Option<BBox64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let l = l.trim();
            if l == "absent" {
                return Ok(None);
            }
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 4 {
                return Err(parse_err(path, i + 1, "expected x,y,w,h or absent"));
            }
            Ok(Some(make_box(path, i + 1, &parse_reals(path, i + 1, &fields)?)?))
        })
        .collect()
}

pub fn format_predictions(track: &PredictionTrack) -> String {
    track
        .records
        .iter()
        .map(|r| match &r.bbox {
            Some(b) => format!("{},{}\n", format_box(b), r.confidence),
            None => format!("absent,{}\n", r.confidence),
        })
        .collect()
}

pub fn parse_predictions(text: &str, path: &Path) -> Result<PredictionTrack> {
    let records = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.trim().split(',').collect();
            match fields.as_slice() {
                ["absent", c] => Ok(FrameRecord::absent(parse_reals(path, i + 1, &[c])?[0])),
                [_, _, _, _, _] => {
                    let v = parse_reals(path, i + 1, &fields)?;
                    Ok(FrameRecord::present(make_box(path, i + 1, &v)?, v[4]))
                }
                _ => Err(parse_err(path, i + 1, "expected x,y,w,h,confidence or absent,confidence")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PredictionTrack::new(records).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn write_predictions(path: &Path, track: &PredictionTrack) -> Result<()> {
    write_text(path, &format_predictions(track))
}

pub fn read_predictions(path: &Path) -> Result<PredictionTrack> {
    parse_predictions(&read_text(path)?, path)
}

pub fn read_groundtruth(path: &Path) -> Result<Vec<Option<BBox64>>> {
    parse_groundtruth(&read_text(path)?, path)
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| parse_err(path, i + 1, "expected key=value"))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(parse_err(path, i + 1, format!("duplicate key `{}`", k.trim())));
        }
    }
    Ok(map)
}

/// Manifest of a sequence directory.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMeta {
    pub name: String,
    pub dims: FrameDims,
    pub length: usize,
    pub attributes: std::collections::BTreeSet<crate::simulator::Attribute>,
    pub seed: u64,
    pub spec_hash: String,
}

impl SequenceMeta {
    pub fn to_text(&self) -> String {
        let tags: Vec<String> = self.attributes.iter().map(|a| a.to_string()).collect();
        format!(
            "name={}\nwidth={}\nheight={}\nlength={}\nattributes={}\nseed={}\nspec_hash={}\n",
            self.name,
            self.dims.width,
            self.dims.height,
            self.length,
            tags.join(" "),
            self.seed,
            self.spec_hash
        )
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let map = parse_key_values(text, path)?;
        let get = |k: &str| {
            map.get(k)
                .map(String::as_str)
                .ok_or_else(|| parse_err(path, 0, format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| parse_err(path, 0, format!("`{k}` is not an unsigned integer")))
        };
        let known = ["name", "width", "height", "length", "attributes", "seed", "spec_hash"];
        if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(parse_err(path, 0, format!("unknown key `{k}`")));
        }
        let width = u32::try_from(num("width")?).map_err(|_| parse_err(path, 0, "width too large"))?;
        let height = u32::try_from(num("height")?).map_err(|_| parse_err(path, 0, "height too large"))?;
        Ok(Self {
            name: get("name")?.to_string(),
            dims: FrameDims::new(width, height)?,
            length: num("length")? as usize,
            attributes: parse_attributes(map.get("attributes").map_or("", String::as_str))?,
            seed: map.get("seed").map_or(Ok(0), |_| num("seed"))?,
            spec_hash: map.get("spec_hash").cloned().unwrap_or_default(),
        })
    }
}

pub fn write_sequence(dir: &Path, seq: &SequenceRecord) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = SequenceMeta {
        name: seq.name.clone(),
        dims: seq.dims(),
        length: seq.len(),
        attributes: seq.attributes.clone(),
        seed: seq.seed,
        spec_hash: seq.spec_hash.clone(),
    };
    write_text(&dir.join(META_FILE), &meta.to_text())?;
    write_text(&dir.join(GROUNDTRUTH_FILE), &format_groundtruth(&seq.groundtruth))?;
    for (i, f) in seq.frames.iter().enumerate() {
        write_pgm(&frame_path(dir, i), f)?;
    }
    Ok(())
}

pub fn read_meta(dir: &Path) -> Result<SequenceMeta> {
    let path = dir.join(META_FILE);
    SequenceMeta::parse(&read_text(&path)?, &path)
}

/// Loads a sequence directory and checks it against its manifest.
pub fn read_sequence(dir: &Path) -> Result<SequenceRecord> {
    let meta = read_meta(dir)?;
    let gt_path = dir.join(GROUNDTRUTH_FILE);
    let groundtruth = read_groundtruth(&gt_path)?;
    if groundtruth.len() != meta.length {
        return Err(Error::LengthMismatch {
            what: "groundtruth",
            got: groundtruth.len(),
            expected: meta.length,
        });
    }
    let frames = (0..meta.length)
        .map(|i| {
            let f = read_pgm(&frame_path(dir, i))?;
            if f.dims() != meta.dims {
                return Err(Error::DimsMismatch(f.width(), f.height(), meta.dims.width, meta.dims.height));
            }
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceRecord {
        name: meta.name,
        frames,
        groundtruth,
        attributes: meta.attributes,
        spec_hash: meta.spec_hash,
        seed: meta.seed,
    })
}

pub fn read_scenario(path: &Path) -> Result<ScenarioSpec> {
    ScenarioSpec::from_toml(&read_text(path)?)
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn write_scenario(path: &Path, spec: &ScenarioSpec) -> Result<()> {
    write_text(path, &spec.to_toml()?)
}
