use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::config::*;
use crate::error::{Error, Result};
use crate::sensors::{BoundarySegment, Edge, Sensor, WeightProfile};

pub const CANNED_NAMES: [&str; 7] = [
    "example_4_5",
    "corollary_5_1",
    "corollary_5_2_one_side",
    "corollary_5_2_two_side",
    "corollary_5_3_internal",
    "corollary_5_3_filament",
    "corollary_5_3_boundary",
];

/// Half-width of zone and boundary-zone supports in the 2D presets.
pub const HALF_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Strategic,
    NonStrategic,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strategic" => Ok(Self::Strategic),
            "non-strategic" | "non_strategic" => Ok(Self::NonStrategic),
            other => Err(Error::Config(format!("unknown variant `{other}` (strategic | non-strategic)"))),
        }
    }
}

fn pick<T>(variant: Variant, strategic: T, non_strategic: T) -> T {
    match variant {
        Variant::Strategic => strategic,
        Variant::NonStrategic => non_strategic,
    }
}

/// Rectangle `]0,1[×]0,2[` with unstable modes (1,1), (1,2), (1,3), (2,1) at `gamma2 = 4.54`.
fn rectangle(gamma2: f64, sensors: Vec<Sensor>) -> ScenarioConfig {
    ScenarioConfig {
        domain: DomainConfig::Rectangle { a1: 1.0, a2: 2.0 },
        coefficients: Coefficients { gamma1: 0.1, gamma2 },
        truncation: Some(TruncationConfig::TwoD(TruncationTwoD { n1: 16, n2: 16 })),
        subregion: SubregionConfig::Rectangle(SubRectangleConfig { alpha1: 0.2, beta1: 0.8, alpha2: 0.4, beta2: 1.6 }),
        sensors,
        unstable_margin: 0.0,
        observer: ObserverConfig { output_every: 100, ..ObserverConfig::default() },
        initial: InitialConfig::default(),
        quadrature: QuadratureConfig { order: 24 },
        seed: 0,
    }
}

pub const RECTANGLE_GAMMA2: f64 = 4.54;
/// Raises the `{(1,4),(2,2)}` cluster of the rectangle preset above zero.
pub const RECTANGLE_GAMMA2_DEGENERATE: f64 = 5.2;

/// Fully populated config for a named scenario.
pub fn canned(name: &str, variant: Variant) -> Result<ScenarioConfig> {
    let tent = || vec![WeightProfile::Tent, WeightProfile::Tent];
    Ok(match name {
        "example_4_5" => ScenarioConfig {
            domain: DomainConfig::Interval { a: 1.0 },
            coefficients: Coefficients { gamma1: 0.01, gamma2: 1.0 },
            truncation: Some(TruncationConfig::OneD(TruncationOneD { n: 16 })),
            subregion: SubregionConfig::Interval(SubIntervalConfig { alpha: 0.2, beta: 0.8 }),
            sensors: vec![Sensor::pointwise(&[pick(variant, 1.0 / SQRT_2, 0.5)])],
            unstable_margin: 0.0,
            observer: ObserverConfig::default(),
            initial: InitialConfig::default(),
            quadrature: QuadratureConfig { order: 64 },
            seed: 0,
        },
        "corollary_5_1" => {
            let center = [pick(variant, 1.0 / SQRT_2, 0.5), 2.0 / E];
            rectangle(RECTANGLE_GAMMA2, vec![Sensor::zone(&center, &[HALF_WIDTH, HALF_WIDTH], tent())])
        }
        "corollary_5_2_one_side" => {
            let eta = pick(variant, 1.0 / SQRT_2, 0.5);
            let segment = BoundarySegment { edge: Edge::Top, from: eta - HALF_WIDTH, to: eta + HALF_WIDTH, weight: WeightProfile::Tent };
            rectangle(RECTANGLE_GAMMA2, vec![Sensor::boundary_zone(vec![segment])])
        }
        "corollary_5_2_two_side" => {
            // segments ]0, η01 + l1[ × {0} and {0} × ]0, η02 + l2[ with l = η
            let (eta1, eta2, gamma2) = pick(variant, (0.5 / SQRT_2, 1.0 / E, RECTANGLE_GAMMA2), (0.5, 1.0, RECTANGLE_GAMMA2_DEGENERATE));
            let segments = vec![
                BoundarySegment { edge: Edge::Bottom, from: 0.0, to: 2.0 * eta1, weight: WeightProfile::Uniform },
                BoundarySegment { edge: Edge::Left, from: 0.0, to: 2.0 * eta2, weight: WeightProfile::Uniform },
            ];
            rectangle(gamma2, vec![Sensor::boundary_zone(segments)])
        }
        "corollary_5_3_internal" => rectangle(RECTANGLE_GAMMA2, vec![Sensor::pointwise(&[pick(variant, 1.0 / SQRT_2, 0.5), 1.0 / PI])]),
        "corollary_5_3_filament" => {
            let points = pick(variant, vec![vec![1.0 / PI, 1.0 / E], vec![1.0 / SQRT_2, SQRT_2 + 0.1]], vec![vec![0.5, 0.0], vec![0.5, 2.0]]);
            rectangle(RECTANGLE_GAMMA2, vec![Sensor::filament(points, vec![])])
        }
        "corollary_5_3_boundary" => rectangle(RECTANGLE_GAMMA2, vec![Sensor::boundary_pointwise(&[1.0, pick(variant, SQRT_2, 1.0)])]),
        other => return Err(Error::Config(format!("unknown canned scenario `{other}`; known: {}", CANNED_NAMES.join(", ")))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategic::check_strategic;

    #[test]
    fn presets_have_expected_verdicts() {
        for name in CANNED_NAMES {
            for (variant, expected) in [(Variant::Strategic, true), (Variant::NonStrategic, false)] {
                let c = canned(name, variant).unwrap();
                let s = c.build().unwrap();
                let r = check_strategic(&s.sensors, &s.model, &s.omega, c.unstable_margin).unwrap();
                assert_eq!(r.verdict, expected, "{name} {variant:?}: {:?}", r.offending);
                assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
            }
        }
    }

    #[test]
    fn example_preset_has_three_unstable_modes() {
        let s = canned("example_4_5", Variant::NonStrategic).unwrap().build().unwrap();
        let r = check_strategic(&s.sensors, &s.model, &s.omega, 0.0).unwrap();
        assert_eq!(r.clusters.len(), 3);
        assert_eq!(r.offending, vec![vec![crate::spectral::ModeIndex::OneD(2)]]);
    }

    #[test]
    fn geometry_of_boundary_presets() {
        let c = canned("corollary_5_2_one_side", Variant::Strategic).unwrap();
        let Sensor::BoundaryZone { segments } = &c.sensors[0] else { panic!() };
        assert_eq!(segments[0].edge, Edge::Top);
        assert!((segments[0].from + segments[0].to - SQRT_2).abs() < 1e-15);
        let c = canned("corollary_5_2_two_side", Variant::Strategic).unwrap();
        let Sensor::BoundaryZone { segments } = &c.sensors[0] else { panic!() };
        assert_eq!(segments.len(), 2);
        assert!(segments.iter().all(|s| s.from == 0.0));
    }

    #[test]
    fn unknown_names_and_variants() {
        assert!(matches!(canned("example_9", Variant::Strategic), Err(Error::Config(_))));
        assert!("both".parse::<Variant>().is_err());
        assert_eq!("non-strategic".parse::<Variant>().unwrap(), Variant::NonStrategic);
    }
}
