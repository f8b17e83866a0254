//! Run configuration: JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use stratawave_core::FluidParams;

/// How `field` computes the stream function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Asymptotic,
    Elliptic,
}

/// Fully resolved configuration. Every output file carries a copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rho: f64,
    pub rho_bar: f64,
    pub g: f64,
    pub sigma: f64,
    pub omega: f64,
    pub omega_bar: f64,
    pub k: Option<u32>,
    pub branch: u8,
    pub s: Option<f64>,
    pub s_max: f64,
    pub ds: f64,
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
    pub method: Method,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rho: 2.0,
            rho_bar: 1.0,
            g: 9.8,
            sigma: 0.0,
            omega: 1.0,
            omega_bar: 0.0,
            k: None,
            branch: 1,
            s: None,
            s_max: 0.05,
            ds: 0.005,
            nx: 128,
            ny: 65,
            tol: 1e-10,
            method: Method::Elliptic,
            out: None,
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags take precedence over its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lower-layer density.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Upper-layer density.
    #[arg(long = "rho-bar", global = true)]
    pub rho_bar: Option<f64>,
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// Surface tension.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Lower-layer vorticity.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Upper-layer vorticity.
    #[arg(long = "omega-bar", global = true, allow_negative_numbers = true)]
    pub omega_bar: Option<f64>,
    /// Wavenumber (for `dispersion`: the largest wavenumber listed).
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Root of the dispersion relation, 1 or 2.
    #[arg(long, global = true)]
    pub branch: Option<u8>,
    /// Amplitude of the solution to compute.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    #[arg(long = "s-max", global = true)]
    pub s_max: Option<f64>,
    #[arg(long, global = true)]
    pub ds: Option<f64>,
    /// Output columns per period.
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    /// Output rows per layer.
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    /// Newton tolerance on the interface residual.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Rejected configuration; maps to exit status 2.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidConfig {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidConfig(msg.into()).into()
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("bad config {}: {e}", path.display())))
    }

    /// File (if any) overlaid with flags, then validated.
    pub fn resolve(flags: &Overrides) -> anyhow::Result<Self> {
        let mut c = match &flags.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f { c.$f = v; } )* };
        }
        take!(rho, rho_bar, g, sigma, omega, omega_bar, branch, s_max, ds, nx, ny, tol);
        if flags.k.is_some() {
            c.k = flags.k;
        }
        if flags.s.is_some() {
            c.s = flags.s;
        }
        if flags.out.is_some() {
            c.out = flags.out.clone();
        }
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> anyhow::Result<()> {
        self.params()?;
        if self.k == Some(0) {
            return Err(invalid("--k must be at least 1"));
        }
        if self.branch != 1 && self.branch != 2 {
            return Err(invalid(format!("--branch must be 1 or 2, got {}", self.branch)));
        }
        if let Some(s) = self.s {
            if !(s.is_finite() && s >= 0.0) {
                return Err(invalid(format!("--s must be a non-negative number, got {s}")));
            }
        }
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(invalid("--ds must be positive"));
        }
        if self.nx < 2 || !self.nx.is_multiple_of(2) || self.ny < 2 {
            return Err(invalid("--nx must be even and at least 2, --ny at least 2"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("--tol must be positive"));
        }
        Ok(())
    }

    pub fn params(&self) -> anyhow::Result<FluidParams> {
        FluidParams::new(self.rho, self.rho_bar, self.g, self.sigma, self.omega, self.omega_bar)
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn require_k(&self) -> anyhow::Result<u32> {
        self.k.ok_or_else(|| invalid("missing --k (wavenumber)"))
    }

    /// `(s_max, ds)` for branch tracing.
    pub fn require_range(&self) -> anyhow::Result<(f64, f64)> {
        if self.s_max >= self.ds && self.s_max.is_finite() {
            Ok((self.s_max, self.ds))
        } else {
            Err(invalid("need 0 < ds <= s-max"))
        }
    }

    pub fn require_s(&self) -> anyhow::Result<f64> {
        self.s.ok_or_else(|| invalid("missing --s (amplitude)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = RunConfig {
            k: Some(2),
            s: Some(0.015),
            method: Method::Asymptotic,
            out: Some("a/b.csv".into()),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"k": 3, "rho": 4.0, "omega": -2.0}"#).unwrap();
        let flags = Overrides {
            config: Some(path),
            rho: Some(5.0),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(&flags).unwrap();
        assert_eq!((c.k, c.rho, c.omega), (Some(3), 5.0, -2.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"kk": 3}"#).unwrap();
        let flags = Overrides {
            config: Some(path),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(&flags).unwrap_err().is::<InvalidConfig>());
    }
}
