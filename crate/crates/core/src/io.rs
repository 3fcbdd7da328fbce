//! Versioned JSON and CSV exchange formats.
//!
//! Every float is written with 17 significant digits, so reading a file back
//! gives the same bits.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};

use crate::debranges::{StructureFunction, StructureKind};
use crate::error::{Error, Result};
use crate::paley_wiener::{BandSpec, BandlimitedSignal, GridSamples, RealGrid, Spectrum};
use crate::range_rkhs::{ExpansionCoefficients, GramSystem};
use crate::truncation::CurvePoint;
use crate::warps::{MeasureBoundReport, Warp, WarpKind};

pub const SIGNAL_FORMAT: &str = "warpband-signal/1";
pub const WARP_FORMAT: &str = "warpband-warp/1";
pub const GRAM_FORMAT: &str = "warpband-gram/1";
pub const COEFFS_FORMAT: &str = "warpband-coeffs/1";
pub const STRUCTURE_FORMAT: &str = "warpband-structure/1";
pub const CURVE_HEADER: &str = "A,l2_error,tail_mass";

/// Relative slack when matching a stored grid against the spectral nodes.
const GRID_MATCH: f64 = 1e-12;

/// `{:.16e}`, i.e. 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with 17-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

fn parse<T: DeserializeOwned>(text: &str, format: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Tag {
        format: String,
    }
    let tag: Tag = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if tag.format != format {
        return Err(Error::Format(format!(
            "expected format {format}, found {}",
            tag.format
        )));
    }
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl From<RealGrid> for GridSpec {
    fn from(g: RealGrid) -> Self {
        GridSpec {
            start: g.start,
            step: g.step,
            count: g.count,
        }
    }
}

impl GridSpec {
    pub fn to_grid(self) -> Result<RealGrid> {
        RealGrid::new(self.start, self.step, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Spectrum,
    TimeSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalFile {
    pub format: String,
    pub kind: SignalKind,
    pub band: f64,
    pub grid: GridSpec,
    pub values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_bound: Option<MeasureBoundReport>,
}

impl SignalFile {
    /// Spectrum samples on `[-a, a]`.
    pub fn from_signal(f: &BandlimitedSignal) -> Self {
        let s = &f.spectrum;
        SignalFile {
            format: SIGNAL_FORMAT.into(),
            kind: SignalKind::Spectrum,
            band: s.band().a(),
            grid: GridSpec {
                start: -s.band().a(),
                step: s.spacing(),
                count: s.len(),
            },
            values: s.values().iter().map(pair).collect(),
            measure_bound: None,
        }
    }

    pub fn from_samples(
        band: f64,
        x: &GridSamples,
        measure_bound: Option<MeasureBoundReport>,
    ) -> Self {
        SignalFile {
            format: SIGNAL_FORMAT.into(),
            kind: SignalKind::TimeSamples,
            band,
            grid: x.grid.into(),
            values: x.values.iter().map(pair).collect(),
            measure_bound,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: SignalFile = parse(text, SIGNAL_FORMAT)?;
        if f.values.len() != f.grid.count {
            return Err(Error::Format(format!(
                "{} values for a grid of {}",
                f.values.len(),
                f.grid.count
            )));
        }
        Ok(f)
    }

    pub fn to_signal(&self) -> Result<BandlimitedSignal> {
        if self.kind != SignalKind::Spectrum {
            return Err(Error::Format("expected a spectrum signal".into()));
        }
        let band = BandSpec::new(self.band)?;
        let values: Vec<Complex64> = self.values.iter().map(unpair).collect();
        let spectrum = Spectrum::new(band, values)?;
        let a = band.a();
        if (self.grid.start + a).abs() > GRID_MATCH * a
            || (self.grid.step - spectrum.spacing()).abs() > GRID_MATCH * spectrum.spacing()
        {
            return Err(Error::Format(
                "spectrum grid does not span [-band, band]".into(),
            ));
        }
        Ok(BandlimitedSignal::new(spectrum, "file"))
    }

    pub fn to_samples(&self) -> Result<GridSamples> {
        if self.kind != SignalKind::TimeSamples {
            return Err(Error::Format("expected time samples".into()));
        }
        GridSamples::new(
            self.grid.to_grid()?,
            self.values.iter().map(unpair).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpFile {
    pub format: String,
    pub kind: WarpKind,
    pub coefficients: Vec<f64>,
}

impl WarpFile {
    pub fn from_warp(w: &Warp) -> Self {
        WarpFile {
            format: WARP_FORMAT.into(),
            kind: w.kind(),
            coefficients: w.coefficients().to_vec(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text, WARP_FORMAT)
    }

    pub fn to_warp(&self) -> Result<Warp> {
        Warp::new(self.kind, self.coefficients.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramFile {
    pub format: String,
    pub nodes: Vec<f64>,
    pub ridge: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl GramFile {
    pub fn from_gram(g: &GramSystem) -> Self {
        GramFile {
            format: GRAM_FORMAT.into(),
            nodes: g.nodes.clone(),
            ridge: g.ridge,
            matrix: g
                .matrix
                .row_iter()
                .map(|r| r.iter().map(pair).collect())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text, GRAM_FORMAT)
    }

    pub fn to_gram(&self) -> Result<GramSystem> {
        let n = self.nodes.len();
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::NodeMismatch);
        }
        let m = DMatrix::from_fn(n, n, |i, j| unpair(&self.matrix[i][j]));
        GramSystem::from_matrix(self.nodes.clone(), m, self.ridge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsFile {
    pub format: String,
    pub nodes: Vec<f64>,
    pub coeffs: Vec<[f64; 2]>,
}

impl CoeffsFile {
    pub fn from_coefficients(c: &ExpansionCoefficients) -> Self {
        CoeffsFile {
            format: COEFFS_FORMAT.into(),
            nodes: c.nodes.clone(),
            coeffs: c.coeffs.iter().map(pair).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text, COEFFS_FORMAT)
    }

    pub fn to_coefficients(&self) -> Result<ExpansionCoefficients> {
        ExpansionCoefficients::new(self.nodes.clone(), self.coeffs.iter().map(unpair).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureFileKind {
    Exponential,
    PolyExp,
    CustomUnsupported,
}

/// `poly` holds ascending `[re, im]` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub format: String,
    pub kind: StructureFileKind,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<[f64; 2]>>,
}

impl StructureFile {
    pub fn from_structure(s: &StructureFunction) -> Self {
        let (kind, a, poly) = match s.kind() {
            StructureKind::Exponential { a } => (StructureFileKind::Exponential, *a, None),
            StructureKind::PolyExp { poly, a } => (
                StructureFileKind::PolyExp,
                *a,
                Some(poly.iter().map(pair).collect()),
            ),
            StructureKind::Custom => (
                StructureFileKind::CustomUnsupported,
                s.exponential_type().unwrap_or(0.0),
                None,
            ),
        };
        StructureFile {
            format: STRUCTURE_FORMAT.into(),
            kind,
            a,
            poly,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text, STRUCTURE_FORMAT)
    }

    pub fn to_structure(&self) -> Result<StructureFunction> {
        match (self.kind, &self.poly) {
            (StructureFileKind::Exponential, None) => StructureFunction::exponential(self.a),
            (StructureFileKind::Exponential, Some(_)) => {
                Err(Error::Format("exponential structure takes no poly".into()))
            }
            (StructureFileKind::PolyExp, Some(p)) => {
                StructureFunction::poly_exp(p.iter().map(unpair).collect(), self.a)
            }
            (StructureFileKind::PolyExp, None) => {
                Err(Error::Format("poly-exp structure needs poly".into()))
            }
            (StructureFileKind::CustomUnsupported, _) => Err(Error::InvalidStructure(
                "custom structure functions cannot be loaded from a file".into(),
            )),
        }
    }
}

/// Error curve as CSV, one row per band limit.
pub fn error_curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.a_limit),
            fmt_f64(p.l2_error),
            fmt_f64(p.tail_mass)
        ));
    }
    out
}
