//! Color-moment and block-truncation-coding (BTC) descriptors.
//!
//! The moment descriptor is 9 values: mean, standard deviation and skewness
//! of each of the R, G, B planes. The BTC descriptor splits every plane at
//! its mean into a high part (strictly above) and a low part (at or below),
//! then takes the same three moments of each part, giving 18 values ordered
//! RH, RL, GH, GL, BH, BL.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::imagery::{split_channels, ChannelValues, RgbImage};

/// Mean, population standard deviation and signed-cube-root skewness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub stddev: f64,
    pub skewness: f64,
}

impl Moments {
    pub fn to_array(self) -> [f64; 3] {
        [self.mean, self.stddev, self.skewness]
    }
}

/// First three moments of `values`, accumulated in list order.
///
/// An empty list yields `(fallback_mean, 0, 0)`.
pub fn moments_of(values: &[f64], fallback_mean: f64) -> Moments {
    if values.is_empty() {
        return Moments {
            mean: fallback_mean,
            stddev: 0.0,
            skewness: 0.0,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut sq, mut cube) = (0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        sq += d2;
        cube += d2 * d;
    }
    Moments {
        mean,
        stddev: (sq / n).sqrt(),
        // f64::cbrt keeps the sign of its argument
        skewness: (cube / n).cbrt(),
    }
}

/// Which descriptor a feature vector holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Moments,
    Btc,
}

impl Method {
    pub fn dimension(self) -> usize {
        match self {
            Method::Moments => 9,
            Method::Btc => 18,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Moments => "moments",
            Method::Btc => "btc",
        }
    }

    /// Extract this descriptor from an image (without id or label).
    pub fn extract(self, image: &RgbImage) -> Vec<f64> {
        match self {
            Method::Moments => color_moment_values(image).to_vec(),
            Method::Btc => btc_values(image).to_vec(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moments" => Ok(Method::Moments),
            "btc" => Ok(Method::Btc),
            other => Err(Error::Input(format!(
                "unknown method {other:?} (expected moments or btc)"
            ))),
        }
    }
}

/// One image's descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub image_id: String,
    pub label: Option<String>,
    pub method: Method,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn color_moment_values(image: &RgbImage) -> [f64; 9] {
    let (r, g, b) = split_channels(image);
    let mut out = [0.0; 9];
    for (slot, plane) in out.chunks_exact_mut(3).zip([&r, &g, &b]) {
        slot.copy_from_slice(&moments_of(&plane.values, 0.0).to_array());
    }
    out
}

/// The 9-value color-moment descriptor, `[R.mean, R.sd, R.skew, G.., B..]`.
pub fn color_moments(
    image: &RgbImage,
    image_id: impl Into<String>,
    label: Option<String>,
) -> FeatureVector {
    FeatureVector {
        image_id: image_id.into(),
        label,
        method: Method::Moments,
        values: color_moment_values(image).to_vec(),
    }
}

/// A plane split at its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BtcPartition {
    /// Values strictly above `threshold`, in plane order.
    pub high: ChannelValues,
    /// Values at or below `threshold`, in plane order.
    pub low: ChannelValues,
    pub threshold: f64,
}

impl BtcPartition {
    /// Moments of the high and low parts. Each part is normalized by its own
    /// size; an empty part reports the threshold as its mean.
    pub fn moments(&self) -> (Moments, Moments) {
        (
            moments_of(&self.high.values, self.threshold),
            moments_of(&self.low.values, self.threshold),
        )
    }
}

/// Split a full plane at its arithmetic mean. Ties go to the low part.
///
/// Panics if `plane` is empty or is itself a partition.
pub fn btc_split(plane: &ChannelValues) -> BtcPartition {
    assert!(!plane.is_empty(), "btc_split needs a non-empty plane");
    let (high_tag, low_tag) = plane
        .source
        .partitions()
        .expect("btc_split needs a full R, G or B plane");
    let threshold = plane.values.iter().sum::<f64>() / plane.len() as f64;
    let (high, low): (Vec<f64>, Vec<f64>) = plane.values.iter().partition(|&&v| v > threshold);
    BtcPartition {
        high: ChannelValues::new(high_tag, high),
        low: ChannelValues::new(low_tag, low),
        threshold,
    }
}

fn btc_values(image: &RgbImage) -> [f64; 18] {
    let (r, g, b) = split_channels(image);
    let mut out = [0.0; 18];
    for (slot, plane) in out.chunks_exact_mut(6).zip([&r, &g, &b]) {
        let (high, low) = btc_split(plane).moments();
        slot[..3].copy_from_slice(&high.to_array());
        slot[3..].copy_from_slice(&low.to_array());
    }
    out
}

/// The 18-value BTC descriptor, moments of RH, RL, GH, GL, BH, BL.
pub fn btc_features(
    image: &RgbImage,
    image_id: impl Into<String>,
    label: Option<String>,
) -> FeatureVector {
    FeatureVector {
        image_id: image_id.into(),
        label,
        method: Method::Btc,
        values: btc_values(image).to_vec(),
    }
}

/// Dispatch on `method`.
pub fn extract(
    method: Method,
    image: &RgbImage,
    image_id: impl Into<String>,
    label: Option<String>,
) -> FeatureVector {
    match method {
        Method::Moments => color_moments(image, image_id, label),
        Method::Btc => btc_features(image, image_id, label),
    }
}
