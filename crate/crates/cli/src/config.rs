//! Run configuration: defaults, then a `key = value` file, then flags.
//!
//! ```text
//! # comments and blank lines are ignored
//! data_dir = /data/cabspotting
//! bbox = -122.52,37.70,-122.35,37.82
//! rows = 100
//! cols = 100
//! t_r = 60
//! max_minutes = 30
//! first_levels = 11
//! utc_offset_hours = -7
//! seed = 0
//! ```

use std::path::{Path, PathBuf};

use triptrie::{BoundingBox, Grid};

use crate::error::CliError;

pub const DATA_DIR_ENV: &str = "TRIPTRIE_DATA_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub data_dir: PathBuf,
    /// `None` means: take the extent of the data.
    pub bbox: Option<BoundingBox>,
    pub rows: u32,
    pub cols: u32,
    pub t_r: u32,
    pub max_minutes: f64,
    pub first_levels: usize,
    pub utc_offset_hours: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: PathBuf::from("."),
            bbox: None,
            rows: 100,
            cols: 100,
            t_r: 60,
            max_minutes: 30.0,
            first_levels: 11,
            // the taxi traces were recorded in San Francisco in May and June
            utc_offset_hours: -7.0,
            seed: 0,
        }
    }
}

/// Values given on the command line; each one overrides the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub data_dir: Option<PathBuf>,
    pub bbox: Option<String>,
    pub rows: Option<u32>,
    pub cols: Option<u32>,
    pub t_r: Option<u32>,
    pub max_minutes: Option<f64>,
    pub first_levels: Option<usize>,
    pub utc_offset_hours: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_bbox(text: &str) -> Result<BoundingBox, CliError> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("bbox {text:?} is not four numbers")))?;
    let [x_min, y_min, x_max, y_max] = values.as_slice() else {
        return Err(CliError::Config(format!(
            "bbox {text:?} must be x_min,y_min,x_max,y_max"
        )));
    };
    Ok(BoundingBox::new(*x_min, *y_min, *x_max, *y_max))
}

fn value<T: std::str::FromStr>(key: &str, raw: &str, origin: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("{origin}: bad value {raw:?} for {key}")))
}

impl Config {
    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = format!("{origin}:{}", idx + 1);
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{at}: expected key = value")))?;
            let (key, raw) = (key.trim(), raw.trim());
            match key {
                "data_dir" => self.data_dir = PathBuf::from(raw),
                "bbox" => self.bbox = Some(parse_bbox(raw)?),
                "rows" => self.rows = value(key, raw, &at)?,
                "cols" => self.cols = value(key, raw, &at)?,
                "t_r" => self.t_r = value(key, raw, &at)?,
                "max_minutes" => self.max_minutes = value(key, raw, &at)?,
                "first_levels" => self.first_levels = value(key, raw, &at)?,
                "utc_offset_hours" => self.utc_offset_hours = value(key, raw, &at)?,
                "seed" => self.seed = value(key, raw, &at)?,
                other => return Err(CliError::Config(format!("{at}: unknown key {other:?}"))),
            }
        }
        Ok(())
    }

    /// Defaults, then the data directory from the environment, then the
    /// config file, then the flags.
    pub fn resolve(
        file: Option<&Path>,
        env_data_dir: Option<PathBuf>,
        flags: &Overrides,
    ) -> Result<Config, CliError> {
        let mut config = Config::default();
        if let Some(dir) = env_data_dir {
            config.data_dir = dir;
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            config.apply_text(&text, &path.display().to_string())?;
        }
        if let Some(d) = &flags.data_dir {
            config.data_dir = d.clone();
        }
        if let Some(b) = &flags.bbox {
            config.bbox = Some(parse_bbox(b)?);
        }
        config.rows = flags.rows.unwrap_or(config.rows);
        config.cols = flags.cols.unwrap_or(config.cols);
        config.t_r = flags.t_r.unwrap_or(config.t_r);
        config.max_minutes = flags.max_minutes.unwrap_or(config.max_minutes);
        config.first_levels = flags.first_levels.unwrap_or(config.first_levels);
        config.utc_offset_hours = flags.utc_offset_hours.unwrap_or(config.utc_offset_hours);
        config.seed = flags.seed.unwrap_or(config.seed);
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(CliError::Config("rows and cols must be positive".into()));
        }
        if self.t_r == 0 {
            return Err(CliError::Config("t_r must be positive".into()));
        }
        if !(self.max_minutes.is_finite() && self.max_minutes > 0.0) {
            return Err(CliError::Config("max_minutes must be positive".into()));
        }
        if !(self.utc_offset_hours.is_finite() && self.utc_offset_hours.abs() <= 24.0) {
            return Err(CliError::Config(
                "utc_offset_hours must lie in [-24, 24]".into(),
            ));
        }
        Ok(())
    }

    pub fn utc_offset_secs(&self) -> i64 {
        (self.utc_offset_hours * 3600.0).round() as i64
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.data_dir.join(name)
    }

    /// Grid from the configured bounding box.
    pub fn grid(&self) -> Result<Option<Grid>, CliError> {
        self.bbox
            .map(|b| Grid::new(b, self.rows, self.cols))
            .transpose()
            .map_err(CliError::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# run\nrows = 20\ncols=30\n\nbbox = 0,0,3,2\nseed = 9\n",
        )
        .unwrap();
        let flags = Overrides {
            cols: Some(40),
            ..Overrides::default()
        };
        let c = Config::resolve(Some(&path), Some(PathBuf::from("/env")), &flags).unwrap();
        assert_eq!((c.rows, c.cols, c.seed), (20, 40, 9));
        assert_eq!(c.bbox, Some(BoundingBox::new(0.0, 0.0, 3.0, 2.0)));
        assert_eq!(c.data_dir, PathBuf::from("/env"));
        assert_eq!(c.t_r, 60);
    }

    #[test]
    fn flag_data_dir_beats_environment() {
        let flags = Overrides {
            data_dir: Some(PathBuf::from("/flag")),
            ..Overrides::default()
        };
        let c = Config::resolve(None, Some(PathBuf::from("/env")), &flags).unwrap();
        assert_eq!(c.data_dir, PathBuf::from("/flag"));
        assert_eq!(c.utc_offset_secs(), -7 * 3600);
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut c = Config::default();
        assert!(c.apply_text("colour = red\n", "x").is_err());
        assert!(c.apply_text("rows\n", "x").is_err());
        assert!(c.apply_text("rows = many\n", "x").is_err());
        assert!(c.apply_text("bbox = 1,2,3\n", "x").is_err());
        let flags = Overrides {
            t_r: Some(0),
            ..Overrides::default()
        };
        assert!(Config::resolve(None, None, &flags).is_err());
    }
}
