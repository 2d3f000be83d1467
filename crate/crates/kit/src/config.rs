//! Run configuration: JSON is the canonical format, TOML an accepted
//! alternate. Parsing is strict (`deny_unknown_fields`); semantic validation
//! names the offending field.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use gordon_core::jacobi::CoeffSeq;
use gordon_core::piecewise::PiecewiseC;
use gordon_core::quasiperiodic::{Frequency, TorusSampler};
use gordon_core::sturm::{LocalMeasure, SLCoeff};

use crate::KitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Mode {
    JacobiBound,
    JacobiScan,
    JacobiDefect,
    QuasiGen,
    SlBound,
    SlScan,
    SlDefect,
    Spectrum,
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::JacobiBound => "jacobi-bound",
            Mode::JacobiScan => "jacobi-scan",
            Mode::JacobiDefect => "jacobi-defect",
            Mode::QuasiGen => "quasi-gen",
            Mode::SlBound => "sl-bound",
            Mode::SlScan => "sl-scan",
            Mode::SlDefect => "sl-defect",
            Mode::Spectrum => "spectrum",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridSpec {
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_grid_count")]
    pub nx: usize,
    #[serde(default = "default_grid_count")]
    pub ny: usize,
}

fn default_grid_count() -> usize {
    21
}

impl ZGridSpec {
    /// Grid points in row-major (re-major, then im) order, which keeps scan
    /// reports sorted by `(z.re, z.im)`.
    pub fn points(&self) -> Vec<Complex64> {
        let coords = |count: usize, center: f64| -> Vec<f64> {
            if count <= 1 {
                vec![center]
            } else {
                (0..count)
                    .map(|i| center + self.radius * (2.0 * i as f64 / (count - 1) as f64 - 1.0))
                    .collect()
            }
        };
        let res = coords(self.nx, self.center[0]);
        let ims = coords(self.ny, self.center[1]);
        let mut out = Vec::with_capacity(res.len() * ims.len());
        for re in &res {
            for im in &ims {
                out.push(Complex64::new(*re, *im));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_format() -> Format {
    Format::Csv
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiSpec {
    pub n_lo: i64,
    /// Complex entries as `[re, im]` pairs.
    pub a: Vec<[f64; 2]>,
    pub b: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SlSpec {
    /// Contiguous pieces `[t_lo, t_hi, re, im]`.
    pub a_pieces: Vec<[f64; 4]>,
    #[serde(default)]
    pub density_pieces: Vec<[f64; 4]>,
    /// Atoms as `[position, re, im]`.
    #[serde(default)]
    pub atoms: Vec<[f64; 3]>,
    /// Support window; defaults to the hull of the pieces.
    #[serde(default)]
    pub support: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub k: u32,
    #[serde(default)]
    pub cos: [f64; 2],
    #[serde(default)]
    pub sin: [f64; 2],
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplerSpec {
    Trig {
        #[serde(default)]
        constant: [f64; 2],
        #[serde(default)]
        harmonics: Vec<HarmonicSpec>,
    },
    DistPow {
        #[serde(default)]
        offset: [f64; 2],
        scale: [f64; 2],
        beta: f64,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrequencySpec {
    Liouville {
        depth: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    GoldenMean {
        depth: usize,
    },
    Rational {
        p: u64,
        q: u64,
    },
    Quotients {
        values: Vec<u64>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiSpec {
    pub a_sampler: SamplerSpec,
    pub b_sampler: SamplerSpec,
    pub frequency: FrequencySpec,
    /// Explicit sampling window; defaults to `[-q_P, 2 q_P + 1]` for the
    /// period depth in use.
    #[serde(default)]
    pub window: Option<[i64; 2]>,
    /// How many convergent denominators to use as trial periods (defaults to
    /// the full depth).
    #[serde(default)]
    pub period_depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSpec {
    #[serde(default)]
    pub norm_a: Option<f64>,
    #[serde(default)]
    pub norm_ainv: Option<f64>,
    #[serde(default)]
    pub norm_b: Option<f64>,
    #[serde(default)]
    pub mu_unif: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(rename = "C", default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub periods: Option<Vec<f64>>,
    #[serde(default)]
    pub z_grid: Option<ZGridSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    /// Truncation size for spectrum mode.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub jacobi: Option<JacobiSpec>,
    #[serde(default)]
    pub jacobi_file: Option<String>,
    #[serde(default)]
    pub quasiperiodic: Option<QuasiSpec>,
    #[serde(default)]
    pub sl: Option<SlSpec>,
    #[serde(default)]
    pub sl_file: Option<String>,
    #[serde(default)]
    pub norms: Option<NormsSpec>,
}

fn semantic(field: &str, msg: impl Into<String>) -> KitError {
    KitError::Semantic { field: field.into(), msg: msg.into() }
}

/// Parse a config document: JSON first (canonical), then TOML.
pub fn parse_config(text: &str) -> Result<RunConfig, KitError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| {
            KitError::Parse(format!("json at line {}, column {}: {e}", e.line(), e.column()))
        });
    }
    match toml::from_str::<RunConfig>(text) {
        Ok(cfg) => Ok(cfg),
        Err(toml_err) => match serde_json::from_str::<RunConfig>(text) {
            Ok(cfg) => Ok(cfg),
            Err(_) => Err(KitError::Parse(format!("toml: {toml_err}"))),
        },
    }
}

impl RunConfig {
    /// Mode-specific validation; `mode` must have been resolved first.
    pub fn validate(&self, mode: Mode) -> Result<(), KitError> {
        let needs_c = matches!(
            mode,
            Mode::JacobiBound | Mode::JacobiScan | Mode::SlBound | Mode::SlScan | Mode::QuasiGen
        );
        if needs_c && self.c.is_none() {
            return Err(semantic("C", format!("required for mode {}", mode.as_str())));
        }
        if let Some(c) = self.c {
            if !(c > 0.0) {
                return Err(semantic("C", "must be positive"));
            }
        }
        let needs_periods = matches!(
            mode,
            Mode::JacobiScan | Mode::JacobiDefect | Mode::SlScan | Mode::SlDefect
        );
        if needs_periods {
            let periods = self
                .periods
                .as_ref()
                .ok_or_else(|| semantic("periods", format!("required for mode {}", mode.as_str())))?;
            if periods.is_empty() {
                return Err(semantic("periods", "must be nonempty"));
            }
            if periods.windows(2).any(|w| w[0] >= w[1]) {
                return Err(semantic("periods", "must be strictly increasing"));
            }
        }
        if matches!(mode, Mode::JacobiScan | Mode::SlScan) && self.z_grid.is_none() {
            return Err(semantic("z_grid", format!("required for mode {}", mode.as_str())));
        }
        if let Some(g) = &self.z_grid {
            if !(g.radius >= 0.0) || g.nx == 0 || g.ny == 0 {
                return Err(semantic("z_grid", "radius must be >= 0 and counts positive"));
            }
        }
        match mode {
            Mode::JacobiScan | Mode::JacobiDefect | Mode::Spectrum | Mode::Verify
            | Mode::JacobiBound => {}
            _ => {}
        }
        if mode == Mode::Spectrum && self.n.is_none() {
            return Err(semantic("n", "required for mode spectrum"));
        }
        if mode == Mode::QuasiGen && self.quasiperiodic.is_none() {
            return Err(semantic("quasiperiodic", "required for mode quasi-gen"));
        }
        Ok(())
    }

    /// Jacobi coefficients from whichever source the config provides.
    pub fn jacobi_coeffs(&self, base_dir: &Path) -> Result<CoeffSeq, KitError> {
        if let Some(spec) = &self.jacobi {
            return jacobi_from_spec(spec);
        }
        if let Some(path) = &self.jacobi_file {
            let text = std::fs::read_to_string(base_dir.join(path))?;
            let spec: JacobiSpec = serde_json::from_str(&text).map_err(|e| {
                KitError::Parse(format!("jacobi file {path}: {e}"))
            })?;
            return jacobi_from_spec(&spec);
        }
        if let Some(q) = &self.quasiperiodic {
            return Ok(quasi_parts(q)?.0);
        }
        Err(semantic(
            "jacobi",
            "mode needs jacobi coefficients (inline `jacobi`, `jacobi_file`, or `quasiperiodic`)",
        ))
    }

    pub fn sl_coeffs(&self, base_dir: &Path) -> Result<SLCoeff, KitError> {
        if let Some(spec) = &self.sl {
            return sl_from_spec(spec);
        }
        if let Some(path) = &self.sl_file {
            let text = std::fs::read_to_string(base_dir.join(path))?;
            let spec: SlSpec = serde_json::from_str(&text)
                .map_err(|e| KitError::Parse(format!("sl file {path}: {e}")))?;
            return sl_from_spec(&spec);
        }
        Err(semantic("sl", "mode needs Sturm-Liouville coefficients (`sl` or `sl_file`)"))
    }
}

fn cpx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn jacobi_from_spec(spec: &JacobiSpec) -> Result<CoeffSeq, KitError> {
    let a: Vec<Complex64> = spec.a.iter().copied().map(cpx).collect();
    let b: Vec<Complex64> = spec.b.iter().copied().map(cpx).collect();
    Ok(CoeffSeq::new(spec.n_lo, a, b)?)
}

pub fn jacobi_to_spec(coeffs: &CoeffSeq) -> JacobiSpec {
    let (lo, hi) = coeffs.window();
    JacobiSpec {
        n_lo: lo,
        a: (lo..=hi)
            .map(|n| {
                let v = coeffs.a(n).unwrap();
                [v.re, v.im]
            })
            .collect(),
        b: (lo..=hi)
            .map(|n| {
                let v = coeffs.b(n).unwrap();
                [v.re, v.im]
            })
            .collect(),
    }
}

fn pieces_to_piecewise(pieces: &[[f64; 4]], what: &str) -> Result<PiecewiseC, KitError> {
    if pieces.is_empty() {
        return Ok(PiecewiseC::empty());
    }
    let mut breakpoints = Vec::with_capacity(pieces.len() + 1);
    let mut values = Vec::with_capacity(pieces.len());
    breakpoints.push(pieces[0][0]);
    for (i, p) in pieces.iter().enumerate() {
        if p[0] != breakpoints[i] {
            return Err(semantic(what, format!("piece {i} is not contiguous")));
        }
        breakpoints.push(p[1]);
        values.push(Complex64::new(p[2], p[3]));
    }
    Ok(PiecewiseC::new(breakpoints, values)?)
}

pub fn sl_from_spec(spec: &SlSpec) -> Result<SLCoeff, KitError> {
    let a = pieces_to_piecewise(&spec.a_pieces, "a_pieces")?;
    let density = pieces_to_piecewise(&spec.density_pieces, "density_pieces")?;
    let atoms: Vec<(f64, Complex64)> = spec
        .atoms
        .iter()
        .map(|e| (e[0], Complex64::new(e[1], e[2])))
        .collect();
    let support = match spec.support {
        Some([lo, hi]) => (lo, hi),
        None => a
            .span()
            .ok_or_else(|| semantic("a_pieces", "must be nonempty"))?,
    };
    let mu = LocalMeasure::new(atoms, density, support)?;
    Ok(SLCoeff::new(a, mu)?)
}

pub fn sampler_from_spec(spec: &SamplerSpec) -> Result<TorusSampler, KitError> {
    Ok(match spec {
        SamplerSpec::Trig { constant, harmonics } => TorusSampler::trig(
            cpx(*constant),
            harmonics
                .iter()
                .map(|h| (h.k, cpx(h.cos), cpx(h.sin)))
                .collect(),
        )?,
        SamplerSpec::DistPow { offset, scale, beta } => {
            TorusSampler::dist_pow(cpx(*offset), cpx(*scale), *beta)?
        }
    })
}

pub fn frequency_from_spec(spec: &FrequencySpec) -> Result<Frequency, KitError> {
    Ok(match spec {
        FrequencySpec::Liouville { depth, seed } => match seed {
            Some(s) => Frequency::liouville_seeded(*depth, *s)?,
            None => Frequency::liouville(*depth)?,
        },
        FrequencySpec::GoldenMean { depth } => Frequency::golden_mean(*depth)?,
        FrequencySpec::Rational { p, q } => Frequency::from_rational(*p, *q)?,
        FrequencySpec::Quotients { values } => Frequency::from_partial_quotients(
            values.iter().map(|v| (*v).into()).collect(),
            false,
        )?,
    })
}

/// Sampled coefficients plus the trial periods (convergent denominators up to
/// the requested period depth).
pub fn quasi_parts(spec: &QuasiSpec) -> Result<(CoeffSeq, Vec<i64>), KitError> {
    let a = sampler_from_spec(&spec.a_sampler)?;
    let b = sampler_from_spec(&spec.b_sampler)?;
    let freq = frequency_from_spec(&spec.frequency)?;
    let depth = spec.period_depth.unwrap_or(freq.depth()).min(freq.depth());
    if depth == 0 {
        return Err(semantic("quasiperiodic.period_depth", "must be at least 1"));
    }
    let mut periods = Vec::with_capacity(depth);
    for m in 1..=depth {
        periods.push(freq.denominator_i64(m)?);
    }
    let window = match spec.window {
        Some([lo, hi]) => (lo, hi),
        None => {
            let q = *periods.last().unwrap();
            (-q, 2 * q + 1)
        }
    };
    let coeffs = gordon_core::quasiperiodic::sample_coeffs(&a, &b, &freq, window)?;
    Ok((coeffs, periods))
}
