//! JSON and CSV reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) and parsed back
//! with correct rounding, so a report survives a round trip bit for bit.
//! Non-finite values are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};
use stc_core::jack::JackReport;
use stc_core::theorem::Verdict;
use stc_core::Complex64;

pub const SCHEMA_VERSION: u32 = 1;

/// How many undefined grid points a report lists explicitly.
pub const UNDEFINED_SAMPLE: usize = 16;

/// An `f64` that also carries infinities and NaN through JSON.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

struct RealVisitor;

impl Visitor<'_> for RealVisitor {
    type Value = Real;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
        Ok(Real(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
        match v {
            "inf" => Ok(Real(f64::INFINITY)),
            "-inf" => Ok(Real(f64::NEG_INFINITY)),
            "nan" => Ok(Real(f64::NAN)),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(RealVisitor)
    }
}

/// `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub Real, pub Real);

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx(Real(z.re), Real(z.im))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub command: CommandEcho,
    pub outcome: Outcome,
    pub reliability: ReliabilitySummary,
    pub exit_code: i32,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing_ms: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEcho {
    pub radii: usize,
    pub angles: usize,
    pub r_max: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEcho {
    pub param: String,
    pub from: Real,
    pub to: Real,
    pub step: Real,
}

/// Every resolved input of the run. Fields a subcommand does not use are omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEcho {
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepEcho>,
    pub order: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Outcome {
    Check(CheckOutcome),
    Jack(JackOutcome),
    Identity(IdentityOutcome),
    Sweep(SweepOutcome),
    Error(ErrorOutcome),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictRecord {
    pub theorem: u32,
    pub n: usize,
    pub w_vanishing_order: usize,
    pub index_mismatch: bool,
    pub hyp_sup: Real,
    pub hyp_bound: Real,
    /// `hyp_bound - hyp_sup`.
    pub hyp_margin: Real,
    pub hyp_holds: bool,
    pub hyp_undefined_count: usize,
    pub hyp_undefined_sample: Vec<Cx>,
    pub concl_sup: Real,
    pub concl_bound: Real,
    /// `concl_bound - concl_sup`.
    pub concl_margin: Real,
    pub concl_holds: bool,
    pub consistent: bool,
    pub witness_hyp: Option<Cx>,
    pub witness_concl: Option<Cx>,
    pub reliability: Real,
    pub reliable: bool,
    pub points: usize,
}

impl From<&Verdict> for VerdictRecord {
    fn from(v: &Verdict) -> Self {
        Self {
            theorem: v.theorem.number(),
            n: v.n,
            w_vanishing_order: v.w_vanishing_order,
            index_mismatch: v.index_mismatch(),
            hyp_sup: Real(v.hyp_sup),
            hyp_bound: Real(v.hyp_bound),
            hyp_margin: Real(v.hyp_bound - v.hyp_sup),
            hyp_holds: v.hyp_holds,
            hyp_undefined_count: v.hyp_undefined.len(),
            hyp_undefined_sample: v.hyp_undefined.iter().take(UNDEFINED_SAMPLE).map(|&z| z.into()).collect(),
            concl_sup: Real(v.concl_sup),
            concl_bound: Real(v.concl_bound),
            concl_margin: Real(v.concl_bound - v.concl_sup),
            concl_holds: v.concl_holds,
            consistent: v.consistent,
            witness_hyp: v.witness_hyp.map(Cx::from),
            witness_concl: v.witness_concl.map(Cx::from),
            reliability: Real(v.reliability),
            reliable: v.reliable,
            points: v.points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOutcome {
    pub verdict: VerdictRecord,
    /// `inf Re(z g'/g) - alpha` on the grid, when it could be evaluated reliably.
    pub g_starlike_margin: Option<Real>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JackProbe {
    pub r: Real,
    pub z0: Cx,
    pub wmax: Real,
    pub quotient: Cx,
    pub k_est: Real,
    pub imag_residual: Real,
    pub vanishing_order: usize,
    pub order_ok: bool,
    pub real_ok: bool,
    pub flat: bool,
    /// Truncation tail of `w` at `z0`.
    pub tail_bound: Real,
}

impl JackProbe {
    pub fn new(rep: &JackReport, tail_bound: f64) -> Self {
        Self {
            r: Real(rep.r),
            z0: rep.z0.into(),
            wmax: Real(rep.wmax),
            quotient: rep.quotient.into(),
            k_est: Real(rep.k_est),
            imag_residual: Real(rep.imag_residual),
            vanishing_order: rep.vanishing_order,
            order_ok: rep.order_ok,
            real_ok: rep.real_ok,
            flat: rep.flat,
            tail_bound: Real(tail_bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ProbeResult {
    Ok(JackProbe),
    Error { r: Real, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JackOutcome {
    pub probes: Vec<ProbeResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityOutcome {
    /// Largest coefficient of the forward residual series.
    pub forward_residual: Real,
    pub reciprocal_residual: Real,
    pub tolerance: Real,
    pub passes: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutcome {
    pub rows: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub hyp_holds: usize,
    pub unreliable: usize,
    pub errors: usize,
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorOutcome {
    /// `input` (exit 2) or `unreliable` (exit 3).
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilitySummary {
    pub threshold: Real,
    pub max_tail_bound: Real,
    pub reliable: bool,
    /// Verdicts or probes whose tail bound exceeded the threshold.
    pub unreliable_cells: usize,
}

/// Pretty JSON with every float at 17 significant digits.
struct SigDigits(PrettyFormatter<'static>);

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
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

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types always serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn from_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub theorem: u32,
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_re: f64,
    pub delta_im: f64,
    pub rho: f64,
    pub alpha: f64,
    pub n: usize,
    pub hyp_sup: Option<f64>,
    pub hyp_bound: Option<f64>,
    pub hyp_holds: Option<bool>,
    pub concl_sup: Option<f64>,
    pub concl_bound: Option<f64>,
    pub concl_holds: Option<bool>,
    pub consistent: Option<bool>,
    pub reliability: Option<f64>,
    pub reliable: Option<bool>,
    pub error: String,
}

pub fn to_csv(rows: &[SweepRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: CommandEcho {
                subcommand: "check".into(),
                theorem: Some(3),
                f: Some("identity".into()),
                mu: Some(Real(0.1)),
                delta: Some(Cx(Real(1.0 / 3.0), Real(-0.0))),
                order: 128,
                seed: 42,
                ..Default::default()
            },
            outcome: Outcome::Jack(JackOutcome {
                probes: vec![ProbeResult::Error { r: Real(0.5), message: "degenerate".into() }],
            }),
            reliability: ReliabilitySummary {
                threshold: Real(1e-7),
                max_tail_bound: Real(f64::INFINITY),
                reliable: false,
                unreliable_cells: 1,
            },
            exit_code: 3,
            timing_ms: Real(12.5),
        }
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let text = to_json(&sample());
        assert!(text.contains("\"mu\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains("\"max_tail_bound\": \"inf\""));
        assert!(text.trim_end().ends_with('}'));
        let last_field = text.lines().rev().nth(1).unwrap();
        assert!(last_field.trim_start().starts_with("\"timing_ms\""));
    }

    #[test]
    fn json_round_trips() {
        let report = sample();
        let text = to_json(&report);
        let back = from_json(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(to_json(&back), text);
        assert!(back.command.delta.unwrap().1 .0.is_sign_negative());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = to_json(&sample()).replacen("\"exit_code\"", "\"extra\": 1,\n  \"exit_code\"", 1);
        assert!(from_json(&text).is_err());
    }

    #[test]
    fn csv_quotes_and_heads() {
        let row = SweepRow {
            param: "rho".into(),
            value: 0.75,
            theorem: 3,
            mu: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta_re: 1.0,
            delta_im: 0.0,
            rho: 0.75,
            alpha: 0.0,
            n: 1,
            hyp_sup: None,
            hyp_bound: None,
            hyp_holds: None,
            concl_sup: None,
            concl_bound: None,
            concl_holds: None,
            consistent: None,
            reliability: None,
            reliable: None,
            error: "bad \"rho\", below floor".into(),
        };
        let text = String::from_utf8(to_csv(&[row]).unwrap()).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("param,value,theorem,mu"));
        assert!(lines.next().unwrap().ends_with("\"bad \"\"rho\"\", below floor\""));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
