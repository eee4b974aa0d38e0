//! Decoding image files into an exact RGB raster and splitting it into planes.
//!
//! PPM (P3 and P6, maxval 255) is decoded by hand so that test fixtures are
//! bit-exact. PNG and JPEG go through the `image` crate.

use std::fmt;
use std::path::Path;

use crate::error::{DecodeError, Error, Result};

/// A decoded raster in row-major order, top-left origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    height: usize,
    width: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Input(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if height.checked_mul(width) != Some(pixels.len()) {
            return Err(Error::Input(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height.saturating_mul(width),
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Every pixel set to `rgb`.
    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(height, width, vec![rgb; height.saturating_mul(width)])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn into_pixels(self) -> Vec<[u8; 3]> {
        self.pixels
    }

    /// Binary (P6) PPM encoding with maxval 255.
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len() * 3);
        out.extend_from_slice(header.as_bytes());
        for px in &self.pixels {
            out.extend_from_slice(px);
        }
        out
    }
}

/// Where a list of channel values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelSource {
    R,
    G,
    B,
    RH,
    RL,
    GH,
    GL,
    BH,
    BL,
}

impl ChannelSource {
    /// High and low partition tags for a full plane; `None` for partitions.
    pub fn partitions(self) -> Option<(ChannelSource, ChannelSource)> {
        match self {
            ChannelSource::R => Some((ChannelSource::RH, ChannelSource::RL)),
            ChannelSource::G => Some((ChannelSource::GH, ChannelSource::GL)),
            ChannelSource::B => Some((ChannelSource::BH, ChannelSource::BL)),
            _ => None,
        }
    }

    pub fn is_plane(self) -> bool {
        matches!(self, ChannelSource::R | ChannelSource::G | ChannelSource::B)
    }
}

impl fmt::Display for ChannelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Intensities from one channel: either a whole plane or one BTC partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelValues {
    pub source: ChannelSource,
    pub values: Vec<f64>,
}

impl ChannelValues {
    pub fn new(source: ChannelSource, values: Vec<f64>) -> Self {
        Self { source, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Split a raster into its R, G and B planes, keeping row-major order.
pub fn split_channels(image: &RgbImage) -> (ChannelValues, ChannelValues, ChannelValues) {
    let n = image.pixels.len();
    let (mut r, mut g, mut b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &[pr, pg, pb] in &image.pixels {
        r.push(f64::from(pr));
        g.push(f64::from(pg));
        b.push(f64::from(pb));
    }
    (
        ChannelValues::new(ChannelSource::R, r),
        ChannelValues::new(ChannelSource::G, g),
        ChannelValues::new(ChannelSource::B, b),
    )
}

/// Header token reader for Netpbm files. Skips whitespace and `#` comments.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// Next token and the offset it starts at.
    fn next(&mut self) -> Option<(usize, &'a [u8])> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, &self.bytes[start..self.pos]))
    }

    fn number(&mut self, what: &str) -> Result<(usize, u64), DecodeError> {
        let offset = self.pos;
        let (start, tok) = self.next().ok_or_else(|| DecodeError::Header {
            offset,
            reason: format!("missing {what}"),
        })?;
        let value = std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|c| c.is_ascii_digit()))
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| DecodeError::Header {
                offset: start,
                reason: format!("{what} is not a non-negative integer"),
            })?;
        Ok((start, value))
    }
}

/// Decode a P3 (ASCII) or P6 (binary) PPM with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, DecodeError> {
    let binary = match bytes.get(..2) {
        Some(b"P6") => true,
        Some(b"P3") => false,
        _ => {
            return Err(DecodeError::Header {
                offset: 0,
                reason: "expected magic P3 or P6".into(),
            })
        }
    };
    let mut tokens = Tokens { bytes, pos: 2 };
    if tokens.pos < bytes.len() && !bytes[tokens.pos].is_ascii_whitespace() && bytes[2] != b'#' {
        return Err(DecodeError::Header {
            offset: 2,
            reason: "magic must be followed by whitespace".into(),
        });
    }
    let (w_off, width) = tokens.number("width")?;
    let (h_off, height) = tokens.number("height")?;
    let (m_off, maxval) = tokens.number("maxval")?;
    if width == 0 {
        return Err(DecodeError::Header {
            offset: w_off,
            reason: "width must be positive".into(),
        });
    }
    if height == 0 {
        return Err(DecodeError::Header {
            offset: h_off,
            reason: "height must be positive".into(),
        });
    }
    if maxval != 255 {
        return Err(DecodeError::Maxval {
            offset: m_off,
            maxval,
        });
    }
    let count = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .filter(|n| n.checked_mul(3).is_some())
        .ok_or_else(|| DecodeError::Header {
            offset: w_off,
            reason: "image dimensions overflow".into(),
        })?;
    let (width, height) = (width as usize, height as usize);

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let body = tokens.pos + 1;
        match bytes.get(tokens.pos) {
            Some(c) if c.is_ascii_whitespace() => {}
            _ => {
                return Err(DecodeError::Truncated {
                    offset: tokens.pos,
                    expected: count * 3,
                    found: 0,
                })
            }
        }
        let available = bytes.len().saturating_sub(body);
        if available < count * 3 {
            return Err(DecodeError::Truncated {
                offset: bytes.len(),
                expected: count * 3,
                found: available,
            });
        }
        bytes[body..body + count * 3]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    } else {
        let mut samples = Vec::with_capacity(count * 3);
        while samples.len() < count * 3 {
            let Some((off, tok)) = tokens.next() else {
                return Err(DecodeError::Truncated {
                    offset: bytes.len(),
                    expected: count * 3,
                    found: samples.len(),
                });
            };
            let v = std::str::from_utf8(tok)
                .ok()
                .filter(|s| s.bytes().all(|c| c.is_ascii_digit()))
                .and_then(|s| s.parse::<u16>().ok())
                .ok_or_else(|| DecodeError::Sample {
                    offset: off,
                    reason: "not an integer".into(),
                })?;
            let v = u8::try_from(v).map_err(|_| DecodeError::Sample {
                offset: off,
                reason: format!("{v} exceeds maxval 255"),
            })?;
            samples.push(v);
        }
        samples
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    };
    Ok(RgbImage {
        height,
        width,
        pixels,
    })
}

/// Load a PPM, PNG or JPEG file. PPM goes through [`decode_ppm`]; other
/// formats are decoded by the `image` crate and expanded to RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bytes(&bytes).map_err(|e| match e {
        None => Error::UnsupportedFormat(path.to_path_buf()),
        Some(source) => Error::Decode {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn decode_bytes(bytes: &[u8]) -> Result<RgbImage, Option<DecodeError>> {
    if matches!(bytes.get(..2), Some(b"P3") | Some(b"P6")) {
        return decode_ppm(bytes).map_err(Some);
    }
    let format = image::guess_format(bytes).map_err(|_| None)?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(None);
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Some(DecodeError::Codec(e.to_string())))?
        .into_rgb8();
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = decoded.pixels().map(|p| p.0).collect();
    RgbImage::new(height, width, pixels).map_err(|e| Some(DecodeError::Codec(e.to_string())))
}
