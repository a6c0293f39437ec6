//! JSON file formats and the number formatting shared by every artifact.
//!
//! Floats are written with 17 significant digits so that every value reads
//! back bit for bit; object keys keep declaration order, so identical
//! inputs give identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::forward::{Spectrum, SpectrumSource};
use crate::geometry::{Exactness, Geometry, Potential, Rational};

pub const SCHEMA: &str = "frozen-spectrum/1";

/// Pretty printer that writes floats as `d.dddddddddddddddde±x`.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Every output file: schema tag, the resolved configuration, then the
/// command's own fields.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, P: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    #[serde(flatten)]
    pub payload: P,
}

impl<'a, C: Serialize, P: Serialize> Envelope<'a, C, P> {
    pub fn new(command: &'a str, config: &'a C, payload: P) -> Self {
        Self { schema: SCHEMA, command, config, payload }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactFile {
    #[serde(default)]
    pub l_over_gamma: Option<[i64; 2]>,
    #[serde(default)]
    pub pi_l_over_gamma: Option<[i64; 2]>,
    #[serde(default)]
    pub pi_d_over_gamma: Option<[i64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub gamma: f64,
    pub d: f64,
    pub l: f64,
    #[serde(default)]
    pub exact: ExactFile,
}

fn ratio(pair: Option<[i64; 2]>, name: &str) -> Result<Option<Rational>> {
    match pair {
        None => Ok(None),
        Some([_, 0]) => Err(Error::Domain(format!("{name} has a zero denominator"))),
        Some([p, q]) => Ok(Some(Rational::new(p, q))),
    }
}

fn pair(r: &Option<Rational>) -> Option<[i64; 2]> {
    r.as_ref().map(|r| [*r.numer(), *r.denom()])
}

impl GeometryFile {
    pub fn to_geometry(&self) -> Result<Geometry> {
        let exact = Exactness {
            l_over_gamma: ratio(self.exact.l_over_gamma, "l_over_gamma")?,
            pi_l_over_gamma: ratio(self.exact.pi_l_over_gamma, "pi_l_over_gamma")?,
            pi_d_over_gamma: ratio(self.exact.pi_d_over_gamma, "pi_d_over_gamma")?,
        };
        Geometry::with_exact(self.gamma, self.d, self.l, exact)
    }
}

impl From<&Geometry> for GeometryFile {
    fn from(g: &Geometry) -> Self {
        Self {
            gamma: g.gamma,
            d: g.d,
            l: g.l,
            exact: ExactFile {
                l_over_gamma: pair(&g.exact.l_over_gamma),
                pi_l_over_gamma: pair(&g.exact.pi_l_over_gamma),
                pi_d_over_gamma: pair(&g.exact.pi_d_over_gamma),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub from: f64,
    pub to: f64,
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    pub segments: Vec<SegmentFile>,
    pub q_at_gamma: f64,
}

impl PotentialFile {
    /// Samples `q` at `points` uniform nodes per segment.
    pub fn sample(q: &Potential, geom: &Geometry, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Domain("a segment needs at least 2 samples".into()));
        }
        let seg = |from: f64, to: f64, last: Option<f64>| {
            let mut samples: Vec<f64> = (0..points)
                .map(|k| {
                    let x = from + (to - from) * k as f64 / (points - 1) as f64;
                    q.eval(geom, x)
                })
                .collect::<Result<_>>()?;
            if let Some(v) = last {
                *samples.last_mut().expect("at least 2 samples") = v;
            }
            Ok::<_, Error>(SegmentFile { from, to, samples })
        };
        Ok(Self {
            segments: vec![seg(0.0, geom.gamma, Some(q.q_at_gamma))?, seg(geom.a(), geom.b(), None)?],
            q_at_gamma: q.q_at_gamma,
        })
    }

    pub fn from_grids(geom: &Geometry, left: &[f64], right: &[f64], q_at_gamma: f64) -> Self {
        Self {
            segments: vec![
                SegmentFile { from: 0.0, to: geom.gamma, samples: left.to_vec() },
                SegmentFile { from: geom.a(), to: geom.b(), samples: right.to_vec() },
            ],
            q_at_gamma,
        }
    }

    /// Checks the segment bounds against `geom` and builds the potential.
    pub fn to_potential(&self, geom: &Geometry) -> Result<Potential> {
        let [left, right] = self.segments.as_slice() else {
            return Err(Error::Domain(format!("expected 2 segments, got {}", self.segments.len())));
        };
        let near = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
        for (seg, lo, hi) in [(left, 0.0, geom.gamma), (right, geom.a(), geom.b())] {
            if !(near(seg.from, lo) && near(seg.to, hi)) {
                return Err(Error::Domain(format!(
                    "segment [{}, {}] does not match [{lo}, {hi}] of the geometry",
                    seg.from, seg.to
                )));
            }
        }
        Potential::from_grids(geom, left.samples.clone(), right.samples.clone(), self.q_at_gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFile {
    Computed,
    Supplied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub geometry: GeometryFile,
    pub k0: usize,
    pub values: Vec<[f64; 2]>,
    #[serde(default)]
    pub source: Option<SourceFile>,
}

impl SpectrumFile {
    pub fn new(geom: &Geometry, spec: &Spectrum) -> Self {
        Self {
            geometry: geom.into(),
            k0: spec.k0,
            values: spec.values.iter().map(|v| [v.re, v.im]).collect(),
            source: Some(match spec.source {
                SpectrumSource::Computed => SourceFile::Computed,
                SpectrumSource::Supplied => SourceFile::Supplied,
            }),
        }
    }

    /// The spectrum as supplied data, whatever produced the file.
    pub fn to_spectrum(&self) -> Result<Spectrum> {
        Spectrum::supplied(self.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect(), self.k0)
    }
}
