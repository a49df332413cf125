//! Named sweep presets reproducing the figure panels.

use std::f64::consts::{PI, TAU};

use super::{Axis, Observable, SweepMode, SweepParam, SweepSpec};
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};

const GRID: usize = 201;
const MAP_GRID: usize = 61;
const FIELD: f64 = 0.1;
const PHASES: [f64; 3] = [0.0, PI / 6.0, 4.0 * PI / 3.0];
const DETUNINGS: [f64; 4] = [0.0, 2.0, 4.0, 6.0];
const NEAR_FULL: f64 = 0.99;

pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> Vec<SweepSpec>,
}

impl FigurePreset {
    pub fn specs(&self) -> Vec<SweepSpec> {
        (self.build)()
    }
}

pub const PRESETS: &[FigurePreset] = &[
    FigurePreset {
        name: "fig2a",
        description: "entropy vs time, resonant, kc = 0",
        build: || transient_panel("fig2a", 0.0, 0.0),
    },
    FigurePreset {
        name: "fig2b",
        description: "entropy vs time, resonant, kc = 0.5",
        build: || transient_panel("fig2b", 0.0, 0.5),
    },
    FigurePreset {
        name: "fig2c",
        description: "entropy vs time, resonant, kc = 0.99",
        build: || transient_panel("fig2c", 0.0, NEAR_FULL),
    },
    FigurePreset {
        name: "fig2d",
        description: "entropy vs time, detuning 2, kc = 0",
        build: || transient_panel("fig2d", 2.0, 0.0),
    },
    FigurePreset {
        name: "fig2e",
        description: "entropy vs time, detuning 2, kc = 0.5",
        build: || transient_panel("fig2e", 2.0, 0.5),
    },
    FigurePreset {
        name: "fig2f",
        description: "entropy vs time, detuning 2, kc = 0.99",
        build: || transient_panel("fig2f", 2.0, NEAR_FULL),
    },
    FigurePreset {
        name: "fig3",
        description: "steady entropy vs detuning for three phases, kc in {0, 0.5, 0.99}",
        build: fig3,
    },
    FigurePreset {
        name: "fig4a",
        description: "steady entropy vs phase for kc in {0.99, 0.5, 0}, resonant",
        build: || phase_panel("fig4a", 0.0),
    },
    FigurePreset {
        name: "fig4b",
        description: "steady entropy vs phase for kc in {0.99, 0.5, 0}, detuning 2",
        build: || phase_panel("fig4b", 2.0),
    },
    FigurePreset {
        name: "fig5",
        description: "steady entropy vs field ratio for detunings {0, 2, 4, 6}",
        build: fig5,
    },
    FigurePreset {
        name: "fig6",
        description: "steady populations vs phase and vs field ratio",
        build: fig6,
    },
    FigurePreset {
        name: "fig7",
        description: "steady entropy over phase and field ratio",
        build: fig7,
    },
];

fn base(kc: f64, detuning: f64) -> SystemParams {
    SystemParams {
        omega_r: FIELD,
        omega_l: FIELD,
        delta_r: detuning,
        delta_l: detuning,
        kc,
        ..SystemParams::default()
    }
}

fn phases() -> Axis {
    Axis::values(SweepParam::Field("phi"), &PHASES)
}

fn transient_panel(label: &str, detuning: f64, kc: f64) -> Vec<SweepSpec> {
    let mut spec = SweepSpec::steady(
        label,
        base(kc, detuning),
        vec![phases()],
        &[Observable::Entropy],
    );
    spec.mode = SweepMode::Transient {
        t_end: 50.0,
        dt: 1e-3,
        stride: 100,
    };
    vec![spec]
}

fn fig3() -> Vec<SweepSpec> {
    [
        (0.0, "fig3-kc0"),
        (0.5, "fig3-kc0.5"),
        (NEAR_FULL, "fig3-kc0.99"),
    ]
    .iter()
    .map(|&(kc, label)| {
        SweepSpec::steady(
            label,
            base(kc, 0.0),
            vec![
                phases(),
                Axis::linear(SweepParam::Detuning, -10.0, 10.0, GRID),
            ],
            &[Observable::Entropy],
        )
    })
    .collect()
}

fn phase_panel(label: &str, detuning: f64) -> Vec<SweepSpec> {
    vec![SweepSpec::steady(
        label,
        base(0.0, detuning),
        vec![
            Axis::values(SweepParam::Field("kc"), &[NEAR_FULL, 0.5, 0.0]),
            Axis::linear(SweepParam::Field("phi"), 0.0, TAU, GRID),
        ],
        &[Observable::Entropy],
    )]
}

fn ratio_axis(n: usize) -> Axis {
    Axis::linear(SweepParam::OmegaRatio, 0.0, 2.0, n)
}

fn fig5() -> Vec<SweepSpec> {
    vec![SweepSpec::steady(
        "fig5",
        base(NEAR_FULL, 0.0),
        vec![
            Axis::values(SweepParam::Detuning, &DETUNINGS),
            ratio_axis(GRID),
        ],
        &[Observable::Entropy],
    )]
}

fn fig6() -> Vec<SweepSpec> {
    vec![
        SweepSpec::steady(
            "fig6-phase",
            base(NEAR_FULL, 0.0),
            vec![
                Axis::values(SweepParam::Detuning, &DETUNINGS),
                Axis::linear(SweepParam::Field("phi"), 0.0, TAU, GRID),
            ],
            &[Observable::Populations],
        ),
        SweepSpec::steady(
            "fig6-ratio",
            base(NEAR_FULL, 0.0),
            vec![
                Axis::values(SweepParam::Detuning, &DETUNINGS),
                ratio_axis(GRID),
            ],
            &[Observable::Populations],
        ),
    ]
}

fn fig7() -> Vec<SweepSpec> {
    vec![SweepSpec::steady(
        "fig7",
        base(NEAR_FULL, 0.0),
        vec![
            Axis::linear(SweepParam::Field("phi"), 0.0, TAU, MAP_GRID),
            ratio_axis(MAP_GRID),
        ],
        &[Observable::Entropy],
    )]
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

pub fn figure_preset(name: &str) -> Result<Vec<SweepSpec>> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(FigurePreset::specs)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// 64-bit FNV-1a over the canonical text of every spec of a preset.
pub fn preset_fingerprint(specs: &[SweepSpec]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for spec in specs {
        for byte in spec.canonical().bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for p in PRESETS {
            let specs = p.specs();
            assert!(!specs.is_empty(), "{}", p.name);
            for s in &specs {
                s.validate().unwrap();
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            figure_preset("fig9"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(figure_preset("fig7").unwrap()[0].grid_size(), 61 * 61);
        assert_eq!(figure_preset("fig3").unwrap().len(), 3);
        assert_eq!(figure_preset("fig4a").unwrap()[0].grid_size(), 3 * 201);
    }

    #[test]
    fn fingerprints_are_stable_and_distinct() {
        let a = preset_fingerprint(&figure_preset("fig4a").unwrap());
        assert_eq!(a, preset_fingerprint(&figure_preset("fig4a").unwrap()));
        assert_ne!(a, preset_fingerprint(&figure_preset("fig4b").unwrap()));
    }
}
