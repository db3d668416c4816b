//! Physical parameters of the ion-cavity system.
//!
//! Parameters come in two flavours. [`RawParams`] describes the ion and cavity
//! (coupling strength, atomic and cavity detunings, Lamb-Dicke parameter, ion
//! position in the standing wave). [`EffectiveParams`] is the reduced
//! optomechanical description (effective detuning `Delta` and single-photon
//! coupling `g_o`) that every downstream stage consumes.
//!
//! All rates are angular frequencies. Nothing here assumes a particular unit;
//! [`EffectiveParams::normalized`] rescales to units where `gamma = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Ion and cavity parameters before the internal ionic levels are eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    /// Ion-cavity coupling strength `Omega`.
    pub coupling: f64,
    /// Pump-atom detuning `Delta_a = omega_p - omega_a`.
    pub delta_a: f64,
    /// Pump-cavity detuning `Delta_c = omega_p - omega_c`.
    pub delta_c: f64,
    /// Lamb-Dicke parameter.
    pub lamb_dicke: f64,
    /// Phase of the ion centre of mass relative to the standing wave.
    pub phi: f64,
    pub pump: Complex64,
    pub omega_m: f64,
    /// Cavity field damping.
    pub gamma: f64,
    /// Mechanical damping.
    pub gamma_m: f64,
    pub n_a: f64,
    pub n_b: f64,
    /// Ion mass in kg, metadata only.
    pub mass: Option<f64>,
    /// Optical wavenumber in 1/m, metadata only.
    pub wavenumber: Option<f64>,
}

impl RawParams {
    /// Zero-point length `sqrt(hbar / 2 m omega_m)` when the mass is known.
    pub fn zero_point_length(&self) -> Option<f64> {
        self.mass.map(|m| (HBAR / (2.0 * m * self.omega_m)).sqrt())
    }

    /// Lamb-Dicke parameter `k sqrt(hbar / 2 m omega_m)` computed from mass and
    /// wavenumber, when both are present.
    pub fn lamb_dicke_from_ion(&self) -> Option<f64> {
        Some(self.wavenumber? * self.zero_point_length()?)
    }

    /// Replace the Lamb-Dicke parameter with the value implied by mass and
    /// wavenumber. `omega_m` must be in rad/s for this to be meaningful.
    pub fn with_ion(mut self, mass: f64, wavenumber: f64) -> Self {
        self.mass = Some(mass);
        self.wavenumber = Some(wavenumber);
        if let Some(eta) = self.lamb_dicke_from_ion() {
            self.lamb_dicke = eta;
        }
        self
    }
}

/// Effective optomechanical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Effective cavity detuning `Delta`.
    pub delta: f64,
    /// Single-photon optomechanical coupling `g_o` (signed).
    pub g0: f64,
    pub pump: Complex64,
    pub omega_m: f64,
    pub gamma: f64,
    pub gamma_m: f64,
    pub n_a: f64,
    pub n_b: f64,
}

/// Map ion and cavity parameters to the effective optomechanical pair:
/// `Delta = Omega^2 / (4 Delta_a) - Delta_c` and
/// `g_o = Omega^2 eta_LD sin(2 phi) / (4 Delta_a)`.
pub fn derive_effective(raw: &RawParams) -> Result<EffectiveParams> {
    if raw.delta_a == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let light_shift = raw.coupling * raw.coupling / (4.0 * raw.delta_a);
    Ok(EffectiveParams {
        delta: light_shift - raw.delta_c,
        g0: light_shift * raw.lamb_dicke * (2.0 * raw.phi).sin(),
        pump: raw.pump,
        omega_m: raw.omega_m,
        gamma: raw.gamma,
        gamma_m: raw.gamma_m,
        n_a: raw.n_a,
        n_b: raw.n_b,
    })
}

/// A violated parameter bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub bound: &'static str,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated ({} = {})", self.bound, self.field, self.value)
    }
}

/// Report every violated invariant of an effective parameter set.
pub fn validate(eff: &EffectiveParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, bound: &'static str, value: f64| {
        if !ok {
            out.push(Violation { field, bound, value });
        }
    };
    for (name, v) in [
        ("Delta", eff.delta),
        ("g_o", eff.g0),
        ("eta_pump_re", eff.pump.re),
        ("eta_pump_im", eff.pump.im),
    ] {
        check(v.is_finite(), name, "finite", v);
    }
    check(eff.omega_m > 0.0, "omega_m", "omega_m>0", eff.omega_m);
    check(eff.gamma > 0.0, "gamma", "gamma>0", eff.gamma);
    check(eff.gamma_m > 0.0, "Gamma", "Gamma>0", eff.gamma_m);
    check(eff.gamma_m < eff.gamma, "Gamma", "Gamma<gamma", eff.gamma_m);
    check(eff.n_a >= 0.0, "n_a", "n_a>=0", eff.n_a);
    check(eff.n_b >= 0.0, "n_b", "n_b>=0", eff.n_b);
    out
}

/// Report every violated invariant of a raw parameter set, including those
/// of the effective set it maps to.
pub fn validate_raw(raw: &RawParams) -> Vec<Violation> {
    match derive_effective(raw) {
        Ok(eff) => validate(&eff),
        Err(_) => vec![Violation { field: "Delta_a", bound: "Delta_a!=0", value: raw.delta_a }],
    }
}

impl EffectiveParams {
    /// Fail with [`Error::InvalidParams`] listing every violated bound.
    pub fn checked(self) -> Result<Self> {
        let v = validate(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            let msg: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidParams(msg.join("; ")))
        }
    }

    /// Multiply every rate by `s`; occupations are untouched.
    pub fn rescale(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidScale(s));
        }
        Ok(Self {
            delta: self.delta * s,
            g0: self.g0 * s,
            pump: self.pump * s,
            omega_m: self.omega_m * s,
            gamma: self.gamma * s,
            gamma_m: self.gamma_m * s,
            n_a: self.n_a,
            n_b: self.n_b,
        })
    }

    /// Rescale to units where `gamma = 1`.
    pub fn normalized(&self) -> Result<Self> {
        self.rescale(1.0 / self.gamma)
    }

    pub fn pump_intensity(&self) -> f64 {
        self.pump.norm_sqr()
    }
}

/// Free-function form of [`EffectiveParams::rescale`].
pub fn rescale(eff: &EffectiveParams, s: f64) -> Result<EffectiveParams> {
    eff.rescale(s)
}

/// Keys of the flat parameter document.
pub const RAW_KEYS: [&str; 5] = ["Omega", "Delta_a", "Delta_c", "eta_LD", "phi"];
pub const EFFECTIVE_KEYS: [&str; 2] = ["g_o", "Delta"];
pub const SHARED_KEYS: [&str; 7] = ["eta_pump_re", "eta_pump_im", "omega_m", "gamma", "Gamma", "n_a", "n_b"];

/// A parameter document resolved into one of the two entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    Raw(RawParams),
    Effective(EffectiveParams),
}

impl ParamSet {
    pub fn effective(&self) -> Result<EffectiveParams> {
        match self {
            ParamSet::Raw(raw) => derive_effective(raw),
            ParamSet::Effective(eff) => Ok(*eff),
        }
    }

    /// Build from key/value pairs. Raw and effective keys may not be mixed;
    /// missing occupations and pump components default to zero.
    pub fn from_pairs(map: &BTreeMap<String, f64>) -> Result<Self> {
        if let Some(k) = map
            .keys()
            .find(|k| !RAW_KEYS.contains(&k.as_str()) && !EFFECTIVE_KEYS.contains(&k.as_str()) && !SHARED_KEYS.contains(&k.as_str()))
        {
            return Err(Error::InvalidParams(format!("unknown parameter key `{k}`")));
        }
        let has_raw = RAW_KEYS.iter().any(|k| map.contains_key(*k));
        let has_eff = EFFECTIVE_KEYS.iter().any(|k| map.contains_key(*k));
        if has_raw && has_eff {
            return Err(Error::InvalidParams(
                "raw keys (Omega, Delta_a, Delta_c, eta_LD, phi) cannot be mixed with effective keys (g_o, Delta)".into(),
            ));
        }
        let req = |k: &str| -> Result<f64> {
            map.get(k).copied().ok_or_else(|| Error::InvalidParams(format!("missing parameter `{k}`")))
        };
        let opt = |k: &str| map.get(k).copied().unwrap_or(0.0);
        let pump = Complex64::new(opt("eta_pump_re"), opt("eta_pump_im"));
        let (omega_m, gamma, gamma_m) = (req("omega_m")?, req("gamma")?, req("Gamma")?);
        let (n_a, n_b) = (opt("n_a"), opt("n_b"));
        if has_raw {
            Ok(ParamSet::Raw(RawParams {
                coupling: req("Omega")?,
                delta_a: req("Delta_a")?,
                delta_c: opt("Delta_c"),
                lamb_dicke: req("eta_LD")?,
                phi: req("phi")?,
                pump,
                omega_m,
                gamma,
                gamma_m,
                n_a,
                n_b,
                mass: None,
                wavenumber: None,
            }))
        } else {
            Ok(ParamSet::Effective(EffectiveParams {
                delta: opt("Delta"),
                g0: req("g_o")?,
                pump,
                omega_m,
                gamma,
                gamma_m,
                n_a,
                n_b,
            }))
        }
    }

    /// Flatten back into key/value pairs.
    pub fn to_pairs(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), v);
        };
        let (pump, omega_m, gamma, gamma_m, n_a, n_b) = match self {
            ParamSet::Raw(r) => {
                put("Omega", r.coupling);
                put("Delta_a", r.delta_a);
                put("Delta_c", r.delta_c);
                put("eta_LD", r.lamb_dicke);
                put("phi", r.phi);
                (r.pump, r.omega_m, r.gamma, r.gamma_m, r.n_a, r.n_b)
            }
            ParamSet::Effective(e) => {
                put("g_o", e.g0);
                put("Delta", e.delta);
                (e.pump, e.omega_m, e.gamma, e.gamma_m, e.n_a, e.n_b)
            }
        };
        put("eta_pump_re", pump.re);
        put("eta_pump_im", pump.im);
        put("omega_m", omega_m);
        put("gamma", gamma);
        put("Gamma", gamma_m);
        put("n_a", n_a);
        put("n_b", n_b);
        m
    }
}
