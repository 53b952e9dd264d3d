//! 8-bit RGB images in binary PPM (P6) or PNG.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use llf_core::{Grid, Plane};

use crate::error::{CliError, CliResult};

/// Three 8-bit channels of equal size.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: [Grid<u8>; 3],
}

impl Image {
    pub fn from_channels(channels: [Grid<u8>; 3]) -> CliResult<Self> {
        let (width, height) = channels[0].dims();
        if channels.iter().any(|c| c.dims() != (width, height)) {
            return Err(CliError::Validation("channels differ in size".into()));
        }
        Ok(Self { width, height, channels })
    }

    /// Splits interleaved RGB bytes.
    pub fn from_interleaved(width: usize, height: usize, rgb: &[u8]) -> CliResult<Self> {
        if width == 0 || height == 0 || rgb.len() != width * height * 3 {
            return Err(CliError::Validation(format!(
                "expected {} RGB bytes for {width}x{height}, got {}",
                width * height * 3,
                rgb.len()
            )));
        }
        let channel = |c: usize| Grid::from_fn(width, height, |x, y| rgb[(y * width + x) * 3 + c]);
        Ok(Self {
            width,
            height,
            channels: [channel(0), channel(1), channel(2)],
        })
    }

    /// Gray image replicated to three channels.
    pub fn from_gray(gray: Grid<u8>) -> Self {
        let (width, height) = gray.dims();
        Self {
            width,
            height,
            channels: [gray.clone(), gray.clone(), gray],
        }
    }

    /// Clamps to `[0, 1]` and rounds half up to 8 bits.
    pub fn from_planes(planes: &[Plane]) -> CliResult<Self> {
        let [r, g, b] = planes else {
            return Err(CliError::Validation(format!("expected 3 planes, got {}", planes.len())));
        };
        Self::from_channels([r.map(to_byte), g.map(to_byte), b.map(to_byte)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> &[Grid<u8>; 3] {
        &self.channels
    }

    /// Channels normalized to `[0, 1]`.
    pub fn planes(&self) -> Vec<Plane> {
        self.channels
            .iter()
            .map(|c| c.map(|v| v as f64 / 255.0))
            .collect()
    }

    pub fn interleaved(&self) -> Vec<u8> {
        let n = self.width * self.height;
        let mut out = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in &self.channels {
                out.push(c.samples()[i]);
            }
        }
        out
    }
}

/// Export rule for one sample.
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Ppm,
    Png,
}

fn format_of(path: &Path) -> CliResult<Format> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("ppm" | "pnm") => Ok(Format::Ppm),
        Some("png") => Ok(Format::Png),
        _ => Err(CliError::io(path, "unsupported format (use .ppm or .png)")),
    }
}

pub fn load_image(path: &Path) -> CliResult<Image> {
    let format = format_of(path)?;
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = BufReader::new(file);
    match format {
        Format::Ppm => {
            let mut bytes = Vec::new();
            reader.read_to_end(&mut bytes).map_err(|e| CliError::io(path, e))?;
            decode_ppm(&bytes).map_err(|m| CliError::io(path, m))
        }
        Format::Png => decode_png(reader).map_err(|m| CliError::io(path, m)),
    }
}

/// Writes planes after clamping and rounding to 8 bits.
pub fn save_image(planes: &[Plane], path: &Path) -> CliResult<()> {
    save_image_u8(&Image::from_planes(planes)?, path)
}

pub fn save_image_u8(image: &Image, path: &Path) -> CliResult<()> {
    let format = format_of(path)?;
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        Format::Ppm => w.write_all(&encode_ppm(image)).map_err(|e| e.to_string()),
        Format::Png => encode_png(image, &mut w),
    };
    res.and_then(|_| w.flush().map_err(|e| e.to_string()))
        .map_err(|m| CliError::io(path, m))
}

pub fn encode_ppm(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.interleaved());
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image, String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("empty file")?;
    if magic != b"P6" {
        return Err("not a binary PPM (P6) file".into());
    }
    let mut field = |name: &str| -> Result<usize, String> {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| format!("missing {name} in PPM header"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {name} in PPM header"))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported PPM maxval {maxval} (only 8-bit, maxval 255)"));
    }
    if width == 0 || height == 0 {
        return Err("PPM has zero size".into());
    }
    // exactly one whitespace byte separates the header from the payload
    let payload = bytes.get(pos + 1..).unwrap_or(&[]);
    let expected = width * height * 3;
    if payload.len() < expected {
        return Err(format!(
            "truncated P6 payload: expected {expected} bytes, found {}",
            payload.len()
        ));
    }
    Image::from_interleaved(width, height, &payload[..expected]).map_err(|e| e.to_string())
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        match bytes.get(*pos)? {
            b'#' => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            b if b.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn decode_png(reader: BufReader<File>) -> Result<Image, String> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let size = reader.output_buffer_size().ok_or("PNG too large")?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(format!("unsupported PNG bit depth {:?} (only 8-bit)", info.bit_depth));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let buf = &buf[..info.buffer_size()];
    let stride = info.line_size;
    let pick = |step: usize, c: usize| Grid::from_fn(w, h, |x, y| buf[y * stride + x * step + c]);
    use png::ColorType::*;
    match info.color_type {
        Grayscale => Ok(Image::from_gray(pick(1, 0))),
        GrayscaleAlpha => Ok(Image::from_gray(pick(2, 0))),
        Rgb => Image::from_channels([pick(3, 0), pick(3, 1), pick(3, 2)]).map_err(|e| e.to_string()),
        Rgba => Image::from_channels([pick(4, 0), pick(4, 1), pick(4, 2)]).map_err(|e| e.to_string()),
        Indexed => Err("indexed PNG was not expanded".into()),
    }
}

fn encode_png(image: &Image, w: &mut impl Write) -> Result<(), String> {
    let mut enc = png::Encoder::new(w, image.width as u32, image.height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| e.to_string())?;
    writer
        .write_image_data(&image.interleaved())
        .map_err(|e| e.to_string())?;
    writer.finish().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn export_rounding() {
        assert_eq!(to_byte(1.5), 255);
        assert_eq!(to_byte(0.5), 128);
        assert_eq!(to_byte(-0.1), 0);
        assert_eq!(to_byte(1.0 / 255.0), 1);
    }

    #[test]
    fn ppm_white_2x2() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend([255u8; 12]);
        let img = decode_ppm(&bytes).unwrap();
        for p in img.planes() {
            assert_eq!(p, Plane::filled(2, 2, 1.0));
        }
    }

    #[test]
    fn ppm_header_comments() {
        let mut bytes = b"P6 # made by hand\n1 # w\n1\n255 ".to_vec();
        bytes.extend([1, 2, 3]);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(img.interleaved(), vec![1, 2, 3]);
    }

    #[test]
    fn truncated_ppm_names_byte_counts() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend([0u8; 7]);
        let err = decode_ppm(&bytes).unwrap_err();
        assert!(err.contains("expected 12") && err.contains("found 7"), "{err}");
    }

    #[test]
    fn ppm_rejects_other_depths() {
        assert!(decode_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0").is_err());
        assert!(decode_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
    }
}
