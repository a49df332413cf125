//! Command-line front end: configuration, CSV emission and command dispatch.

mod app;
mod config;
pub mod csv;

pub use app::{run, Cli, Command, EXIT_PHYSICS, EXIT_USAGE};
pub use config::{
    collect_entries, parse_config, parse_provenance, CommandKind, ConfigEntry, ConfigError,
    Numerics, Origin, OutputFormat, RunConfig, CONFIG_KEYS,
};

use std::f64::consts::PI;

/// Parses a decimal number, or a multiple of `pi` written as `pi`, `2pi`,
/// `pi/6`, `4pi/3`, `-pi/2` or `0.5*pi`.
pub fn parse_number(text: &str) -> Option<f64> {
    let s = text.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = num.strip_suffix("pi")?.trim_end_matches('*').trim();
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    Some(coef * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_multiples_of_pi() {
        assert_eq!(parse_number("0.25"), Some(0.25));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_number("4pi/3"), Some(4.0 * PI / 3.0));
        assert_eq!(parse_number("0.5*pi"), Some(0.5 * PI));
        assert_eq!(parse_number("2pi"), Some(2.0 * PI));
        assert_eq!(parse_number("pie"), None);
        assert_eq!(parse_number("x"), None);
        assert_eq!(parse_number("pi/0x"), None);
    }
}
