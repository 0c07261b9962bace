//! TOML run configuration.
//!
//! A config file holds the physical parameters under `[system]` plus
//! optional per-method option tables. Unknown keys are rejected so typos
//! surface instead of silently falling back to defaults:
//!
//! ```toml
//! [system]
//! n_sites = 3
//! t1 = 1e-4
//! t2 = 1e-2
//! gamma1 = 1e-3
//! gamma2 = 1e-3
//! kappa = 0.07
//! g = 2.2e-3
//! # omega1 = -0.5, omega2 = 0.5, omega_c = 1.0 unless overridden
//!
//! [ngf]        # frequency-domain solver knobs
//! [qme]        # full master equation knobs (n_max, solver, hardcore, ...)
//! [qme_eff]    # effective master equation knobs (nonlocal, detuned, ...)
//! [rates]      # mean-field rate equation knobs
//! [observables]
//!
//! [sweep]
//! methods = ["qme-eff", "rates"]
//! [[sweep.axis]]
//! name = "g"
//! scale = "log"
//! min = 1e-4
//! max = 1e-1
//! count = 11
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use fermicav_core::ngf::ScbaOptions;
use fermicav_core::qme::QmeOptions;
use fermicav_core::qme_eff::EffectiveOptions;
use fermicav_core::SystemParams;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    #[serde(default)]
    pub ngf: NgfConfig,
    #[serde(default)]
    pub qme: QmeOptions,
    #[serde(default)]
    pub qme_eff: EffectiveOptions,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.system.validate()?;
        if let Some(sweep) = &cfg.sweep {
            sweep.validate()?;
        }
        Ok(cfg)
    }
}

/// Frequency-domain solver settings; mirrors the solver options that make
/// sense to set from a file. Omitted keys keep the solver defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgfConfig {
    /// Frequency grid override; unset sizes the grid from the parameters.
    pub grid_points: Option<usize>,
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Extra broadening inside the Dyson kernel; keep zero unless states
    /// narrower than the grid spacing must be resolved by brute force.
    pub eta_kernel: f64,
}

impl Default for NgfConfig {
    fn default() -> Self {
        let d = ScbaOptions::default();
        NgfConfig {
            grid_points: d.grid_points,
            mixing: d.mixing,
            tol: d.tol,
            max_iter: d.max_iter,
            eta_kernel: d.eta_kernel,
        }
    }
}

impl NgfConfig {
    pub fn to_options(&self) -> ScbaOptions {
        ScbaOptions {
            grid_points: self.grid_points,
            mixing: self.mixing,
            tol: self.tol,
            max_iter: self.max_iter,
            eta_kernel: self.eta_kernel,
            ..ScbaOptions::default()
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    /// Keep the transfer-induced damping of the bond coherence. Off by
    /// default: the undamped form is the one whose linearization gives the
    /// perturbative enhancement 2 gamma_c / gamma.
    pub damp_coherence: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservablesConfig {
    /// Emit the cavity spectral function A_c(omega) from the stationary
    /// state (qme-full only; the frequency solver emits its photon spectrum
    /// unconditionally).
    pub cavity_dos: bool,
    /// Half-width of the A_c window around (omega_c + omega21)/2; 0 picks
    /// max(6 g sqrt(N), 6 kappa, 20 (gamma1 + gamma2)).
    pub dos_span: f64,
    pub dos_points: usize,
    /// Correlation horizon for the regression; 0 picks the solver default.
    pub dos_t_max: f64,
    /// Horizon for the real-time site-resolved spectral transform of the
    /// frequency solution; 0 skips the transform.
    pub realtime_t_max: f64,
    /// Band fed through the transform, 1 (lower) or 2 (upper).
    pub realtime_band: usize,
    /// Injection site of the transform, 1-based.
    pub realtime_site: usize,
    /// Excess off-injection-site weight fraction that counts as transfer.
    pub transfer_threshold: f64,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        ObservablesConfig {
            cavity_dos: false,
            dos_span: 0.0,
            dos_points: 801,
            dos_t_max: 0.0,
            realtime_t_max: 0.0,
            realtime_band: 2,
            realtime_site: 1,
            transfer_threshold: 0.05,
        }
    }
}

impl ObservablesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.realtime_band) {
            bail!("observables.realtime_band must be 1 or 2");
        }
        if self.realtime_site == 0 {
            bail!("observables.realtime_site is 1-based");
        }
        if self.dos_points < 3 {
            bail!("observables.dos_points must be at least 3");
        }
        Ok(())
    }
}

pub const SWEEPABLE: [&str; 9] = [
    "t1", "t2", "gamma1", "gamma2", "omega1", "omega2", "omega_c", "kappa", "g",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Subset of {ngf, qme-full, qme-eff, rates}.
    pub methods: Vec<String>,
    /// One or two swept parameters; two axes span their product grid.
    #[serde(rename = "axis")]
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    /// SystemParams field to sweep.
    pub name: String,
    #[serde(default)]
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            bail!("sweep.methods must name at least one method");
        }
        for m in &self.methods {
            if crate::runner::Method::parse(m).is_none() {
                bail!("unknown sweep method {m:?} (expected ngf, qme-full, qme-eff or rates)");
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                bail!("sweep method {m:?} listed twice");
            }
        }
        if self.axes.is_empty() || self.axes.len() > 2 {
            bail!("sweep needs one or two [[sweep.axis]] tables");
        }
        for ax in &self.axes {
            ax.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            bail!("both sweep axes target {:?}", self.axes[0].name);
        }
        Ok(())
    }

    /// Row-major product of the axis grids, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(AxisSpec::values).collect();
        match grids.as_slice() {
            [a] => a.iter().map(|&x| vec![x]).collect(),
            [a, b] => a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| vec![x, y]))
                .collect(),
            _ => unreachable!("validate() bounds the axis count"),
        }
    }

    /// Applies one grid point to a copy of the base parameters.
    pub fn apply(&self, base: &SystemParams, point: &[f64]) -> SystemParams {
        let mut p = *base;
        for (ax, &v) in self.axes.iter().zip(point) {
            set_param(&mut p, &ax.name, v);
        }
        p
    }
}

impl AxisSpec {
    pub fn validate(&self) -> Result<()> {
        if !SWEEPABLE.contains(&self.name.as_str()) {
            bail!(
                "cannot sweep {:?}; parameters are {}",
                self.name,
                SWEEPABLE.join(", ")
            );
        }
        if self.count < 2 {
            bail!("axis {:?} needs count >= 2", self.name);
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            bail!("axis {:?} needs finite min <= max", self.name);
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            bail!("axis {:?} is log-scaled, so min must be > 0", self.name);
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + s * (self.max - self.min),
                    Scale::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

fn set_param(p: &mut SystemParams, name: &str, v: f64) {
    match name {
        "t1" => p.t1 = v,
        "t2" => p.t2 = v,
        "gamma1" => p.gamma1 = v,
        "gamma2" => p.gamma2 = v,
        "omega1" => p.omega1 = v,
        "omega2" => p.omega2 = v,
        "omega_c" => p.omega_c = v,
        "kappa" => p.kappa = v,
        "g" => p.g = v,
        _ => unreachable!("axis names are validated against SWEEPABLE"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        toml::from_str(text).unwrap()
    }

    const MINIMAL: &str = r#"
        [system]
        n_sites = 3
        t1 = 1e-4
        t2 = 1e-2
        gamma1 = 1e-3
        gamma2 = 1e-3
        kappa = 0.07
        g = 2.2e-3
    "#;

    #[test]
    fn minimal_config_fills_every_default() {
        let cfg = parse(MINIMAL);
        assert_eq!(cfg.system.omega1, -0.5);
        assert_eq!(cfg.system.omega2, 0.5);
        assert_eq!(cfg.system.omega_c, 1.0);
        assert_eq!(cfg.qme, QmeOptions::default());
        assert_eq!(cfg.qme_eff, EffectiveOptions::default());
        assert!(cfg.ngf.grid_points.is_none());
        assert!(!cfg.rates.damp_coherence);
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[qme]\nn_maxx = 3\n");
        assert!(toml::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn axis_grids_hit_both_endpoints() {
        let lin = AxisSpec {
            name: "g".into(),
            scale: Scale::Linear,
            min: 1.0,
            max: 2.0,
            count: 5,
        };
        let v = lin.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[4], 2.0);
        assert!((v[2] - 1.5).abs() < 1e-15);

        let log = AxisSpec {
            name: "kappa".into(),
            scale: Scale::Log,
            min: 1e-3,
            max: 1e1,
            count: 5,
        };
        let v = log.values();
        assert!((v[0] - 1e-3).abs() < 1e-18);
        assert!((v[4] - 1e1).abs() < 1e-14);
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
    }

    #[test]
    fn sweep_validation_rejects_bad_specs() {
        let base = |axes: &str, methods: &str| {
            format!("{MINIMAL}\n[sweep]\nmethods = {methods}\n{axes}")
        };
        let ok = base(
            "[[sweep.axis]]\nname = \"g\"\nmin = 1e-4\nmax = 1e-2\ncount = 3\n",
            r#"["qme-eff", "rates"]"#,
        );
        parse(&ok).sweep.unwrap().validate().unwrap();

        for (axes, methods) in [
            // unknown parameter
            (
                "[[sweep.axis]]\nname = \"n_sites\"\nmin = 2.0\nmax = 4.0\ncount = 3\n",
                r#"["rates"]"#,
            ),
            // count too small
            (
                "[[sweep.axis]]\nname = \"g\"\nmin = 1e-4\nmax = 1e-2\ncount = 1\n",
                r#"["rates"]"#,
            ),
            // log scale with zero endpoint
            (
                "[[sweep.axis]]\nname = \"g\"\nscale = \"log\"\nmin = 0.0\nmax = 1e-2\ncount = 3\n",
                r#"["rates"]"#,
            ),
            // unknown method
            (
                "[[sweep.axis]]\nname = \"g\"\nmin = 1e-4\nmax = 1e-2\ncount = 3\n",
                r#"["qme"]"#,
            ),
            // duplicate axis
            (
                "[[sweep.axis]]\nname = \"g\"\nmin = 1e-4\nmax = 1e-2\ncount = 3\n\
                 [[sweep.axis]]\nname = \"g\"\nmin = 1e-4\nmax = 1e-2\ncount = 3\n",
                r#"["rates"]"#,
            ),
        ] {
            let cfg = parse(&base(axes, methods));
            assert!(cfg.sweep.unwrap().validate().is_err(), "{axes} accepted");
        }
    }

    #[test]
    fn two_axes_span_their_product_row_major() {
        let cfg = parse(&format!(
            "{MINIMAL}\n[sweep]\nmethods = [\"rates\"]\n\
             [[sweep.axis]]\nname = \"g\"\nmin = 1.0\nmax = 2.0\ncount = 2\n\
             [[sweep.axis]]\nname = \"kappa\"\nmin = 10.0\nmax = 20.0\ncount = 3\n"
        ));
        let sweep = cfg.sweep.unwrap();
        let pts = sweep.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![1.0, 10.0]);
        assert_eq!(pts[2], vec![1.0, 20.0]);
        assert_eq!(pts[3], vec![2.0, 10.0]);
        let p = sweep.apply(&cfg.system, &pts[3]);
        assert_eq!(p.g, 2.0);
        assert_eq!(p.kappa, 10.0);
        assert_eq!(p.t2, cfg.system.t2);
    }
}
