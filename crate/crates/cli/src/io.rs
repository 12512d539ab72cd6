//! File handling, JSON layouts and the exit-code contract.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use channel_lab::dilation::UnitaryDilation;
use channel_lab::gaussian::{GaussianChannel, GaussianState, RMatrix, RVector};
use channel_lab::json;
use channel_lab::{CMatrix, CVector, KrausChannel, StinespringIsometry, UnitaryOp};
use serde::Deserialize;
use serde_json::{Map, Value};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PARSE: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable input or unwritable output.
    Io(String),
    /// Input that is valid JSON of the right shape but violates an
    /// invariant, or parameters outside their domain.
    Validation(String),
    /// Malformed JSON, unknown layouts, unparsable flag values.
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => EXIT_FAILURE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Parse(_) => EXIT_PARSE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
        }
    }
}

impl From<channel_lab::Error> for CliError {
    fn from(e: channel_lab::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_layout<T: for<'de> Deserialize<'de>>(value: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to `path` if given, otherwise to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

pub fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `prefix.csv` and `prefix.json`.
pub fn report_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".csv"), with(".json"))
}

#[derive(Deserialize)]
struct KrausLayout {
    d_in: usize,
    d_out: usize,
    #[serde(with = "json::cmatrix_list")]
    kraus: Vec<CMatrix>,
}

#[derive(Deserialize)]
struct IsometryLayout {
    d_a: usize,
    d_b: usize,
    d_e: usize,
    #[serde(with = "json::cmatrix")]
    v: CMatrix,
}

#[derive(Deserialize)]
struct DilationLayout {
    d_a: usize,
    d_d: usize,
    d_b: usize,
    d_eprime: usize,
    #[serde(with = "json::cmatrix")]
    u: CMatrix,
    #[serde(with = "json::cvector")]
    tau0: CVector,
}

/// A channel in one of the three stored representations.
#[derive(Debug, Clone)]
pub enum Representation {
    Kraus(KrausChannel),
    Stinespring(StinespringIsometry),
    Unitary(UnitaryDilation),
}

impl Representation {
    pub fn kind(&self) -> &'static str {
        match self {
            Representation::Kraus(_) => "kraus",
            Representation::Stinespring(_) => "stinespring",
            Representation::Unitary(_) => "unitary",
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Representation::Kraus(k) => serde_json::to_value(k),
            Representation::Stinespring(v) => serde_json::to_value(v),
            Representation::Unitary(u) => serde_json::to_value(u),
        }
        .expect("representations serialize")
    }
}

fn has(map: &Map<String, Value>, key: &str) -> bool {
    map.contains_key(key)
}

/// Detects the layout from its keys: `kraus`, `v` or `u`.
pub fn parse_representation(value: Value) -> CliResult<Representation> {
    let map = value
        .as_object()
        .ok_or_else(|| CliError::Parse("expected a JSON object".into()))?;
    if has(map, "kraus") {
        let l: KrausLayout = parse_layout(value, "kraus layout")?;
        Ok(Representation::Kraus(KrausChannel::new(l.d_in, l.d_out, l.kraus)?))
    } else if has(map, "v") {
        let l: IsometryLayout = parse_layout(value, "stinespring layout")?;
        Ok(Representation::Stinespring(StinespringIsometry::new(l.d_a, l.d_b, l.d_e, l.v)?))
    } else if has(map, "u") {
        let l: DilationLayout = parse_layout(value, "unitary dilation layout")?;
        let u = UnitaryOp::new(l.u)?;
        Ok(Representation::Unitary(UnitaryDilation::new(l.d_a, l.d_d, l.d_b, l.d_eprime, u, l.tau0)?))
    } else {
        Err(CliError::Parse(
            "unrecognized representation: expected a \"kraus\", \"v\" or \"u\" field".into(),
        ))
    }
}

#[derive(Deserialize)]
struct StateLayout {
    s: usize,
    #[serde(with = "json::rvector")]
    m: RVector,
    #[serde(with = "json::rmatrix")]
    sigma: RMatrix,
}

#[derive(Deserialize)]
struct ChannelLayout {
    s_in: usize,
    s_out: usize,
    #[serde(rename = "K", with = "json::rmatrix")]
    k: RMatrix,
    #[serde(with = "json::rvector")]
    ell: RVector,
    #[serde(with = "json::rmatrix")]
    alpha: RMatrix,
}

pub enum GaussianObject {
    State(GaussianState),
    Channel(GaussianChannel),
}

pub fn parse_gaussian(value: Value) -> CliResult<GaussianObject> {
    let map = value
        .as_object()
        .ok_or_else(|| CliError::Parse("expected a JSON object".into()))?;
    if has(map, "sigma") {
        let l: StateLayout = parse_layout(value, "gaussian state layout")?;
        Ok(GaussianObject::State(GaussianState::new(l.s, l.m, l.sigma)?))
    } else if has(map, "K") {
        let l: ChannelLayout = parse_layout(value, "gaussian channel layout")?;
        Ok(GaussianObject::Channel(GaussianChannel::new(l.s_in, l.s_out, l.k, l.ell, l.alpha)?))
    } else {
        Err(CliError::Parse(
            "unrecognized Gaussian object: expected a \"sigma\" or \"K\" field".into(),
        ))
    }
}

pub fn parse_gaussian_state(path: &Path) -> CliResult<GaussianState> {
    match parse_gaussian(read_json(path)?)? {
        GaussianObject::State(s) => Ok(s),
        GaussianObject::Channel(_) => Err(CliError::Parse(format!("{}: expected a state", path.display()))),
    }
}

pub fn parse_gaussian_channel(path: &Path) -> CliResult<GaussianChannel> {
    match parse_gaussian(read_json(path)?)? {
        GaussianObject::Channel(c) => Ok(c),
        GaussianObject::State(_) => Err(CliError::Parse(format!("{}: expected a channel", path.display()))),
    }
}

/// `re` or `re,im`.
pub fn parse_complex(text: &str) -> Result<num_complex::Complex64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(num_complex::Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(num_complex::Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {text:?}")),
    }
}
