//! Tunables collected from defaults, an optional `key=value` file and
//! command-line overrides, applied in that order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::identifier::{MatchParams, Thresholds, Weights};
use crate::signature::{DescriptorParams, DEFAULT_N_FRAME, DEFAULT_T_STEP};
use crate::srm::BoundCombination;

pub const KEYS: [&str; 17] = [
    "n_color",
    "tau",
    "q",
    "k",
    "sigma",
    "n_poi",
    "nms",
    "th_ccv",
    "th_poi",
    "w_ccv",
    "w_poi",
    "n_frame",
    "t_step",
    "stride",
    "thre_dist",
    "thre_harris",
    "srm_bound",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub descriptor: DescriptorParams,
    pub weights: Weights,
    pub thresholds: Thresholds,
    pub matching: MatchParams,
    pub n_frame: u32,
    pub t_step: u32,
    pub stride: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            descriptor: DescriptorParams::default(),
            weights: Weights::default(),
            thresholds: Thresholds::default(),
            matching: MatchParams::default(),
            n_frame: DEFAULT_N_FRAME,
            t_step: DEFAULT_T_STEP,
            stride: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl Config {
    /// Sets one tunable; `tau=auto` restores the frame-size default.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let d = &mut self.descriptor;
        match key {
            "n_color" => d.n_color = parse(key, value)?,
            "tau" if value == "auto" => d.tau = None,
            "tau" => d.tau = Some(parse(key, value)?),
            "q" => d.q = parse(key, value)?,
            "k" => d.k = parse(key, value)?,
            "sigma" => d.sigma = parse(key, value)?,
            "n_poi" => d.n_poi = parse(key, value)?,
            "nms" => d.nms_radius = parse(key, value)?,
            "srm_bound" => d.srm_bound = parse::<BoundCombination>(key, value)?,
            "th_ccv" => self.thresholds.ccv = parse(key, value)?,
            "th_poi" => self.thresholds.poi = parse(key, value)?,
            "w_ccv" => self.weights.ccv = parse(key, value)?,
            "w_poi" => self.weights.poi = parse(key, value)?,
            "n_frame" => self.n_frame = parse(key, value)?,
            "t_step" => self.t_step = parse(key, value)?,
            "stride" => self.stride = parse(key, value)?,
            "thre_dist" => self.matching.thre_dist = parse(key, value)?,
            "thre_harris" => self.matching.thre_harris = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let config_err = |msg: String| Error::Config { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("expected key=value, got `{line}`")))?;
            self.set(key.trim(), value.trim()).map_err(config_err)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.descriptor.validate()?;
        self.weights.validate()?;
        self.thresholds.validate()?;
        if self.n_frame == 0 || self.t_step == 0 || self.stride == 0 {
            return Err(Error::InvalidParameter(
                "n_frame, t_step and stride must be positive".into(),
            ));
        }
        if !(self.matching.thre_dist > 0.0 && self.matching.thre_harris > 0.0) {
            return Err(Error::InvalidParameter(
                "thre_dist and thre_harris must be positive".into(),
            ));
        }
        Ok(())
    }

    /// One `key=value` line per tunable, readable by `apply_text`.
    pub fn to_text(&self) -> String {
        let d = &self.descriptor;
        let tau = d.tau.map_or("auto".to_string(), |t| t.to_string());
        let bound = match d.srm_bound {
            BoundCombination::Sum => "sum",
            BoundCombination::Quadrature => "quadrature",
        };
        let values = [
            d.n_color.to_string(),
            tau,
            d.q.to_string(),
            d.k.to_string(),
            d.sigma.to_string(),
            d.n_poi.to_string(),
            d.nms_radius.to_string(),
            self.thresholds.ccv.to_string(),
            self.thresholds.poi.to_string(),
            self.weights.ccv.to_string(),
            self.weights.poi.to_string(),
            self.n_frame.to_string(),
            self.t_step.to_string(),
            self.stride.to_string(),
            self.matching.thre_dist.to_string(),
            self.matching.thre_harris.to_string(),
            bound.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = Config::default();
        c.apply_text("# tuned\nq = 64\n\ntau=12 # fixed\nsrm_bound=quadrature\nw_ccv=0.89\n")
            .unwrap();
        assert_eq!(c.descriptor.q, 64.0);
        assert_eq!(c.descriptor.tau, Some(12));
        assert_eq!(c.descriptor.srm_bound, BoundCombination::Quadrature);
        assert_eq!(c.weights.ccv, 0.89);
        assert_eq!(c.t_step, 12);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut c = Config::default();
        match c.apply_text("q=1\nbogus=3\n") {
            Err(Error::Config { line: 2, msg }) => assert!(msg.contains("bogus")),
            other => panic!("{other:?}"),
        }
        match c.apply_text("\n\nstride\n") {
            Err(Error::Config { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(c.apply_text("n_poi=-1").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = Config::default();
        c.set("tau", "30").unwrap();
        c.set("th_poi", "0.65").unwrap();
        let mut d = Config::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
        assert_eq!(c.to_text().lines().count(), KEYS.len());
    }

    #[test]
    fn validation() {
        assert!(Config::default().validate().is_ok());
        let mut c = Config::default();
        c.set("stride", "0").unwrap();
        assert!(c.validate().is_err());
        let mut c = Config::default();
        c.set("w_ccv", "0").unwrap();
        c.set("w_poi", "0").unwrap();
        assert!(matches!(c.validate(), Err(Error::ZeroWeight)));
    }
}
