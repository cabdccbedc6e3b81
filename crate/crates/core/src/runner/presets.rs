use crate::groups::GroupKind;
use crate::hamiltonian::Potential;
use crate::quantum::GridPolicy;
use crate::verify::Tolerances;

use super::config::{
    default_cache_dir, ClassicalSettings, ExperimentConfig, GutzwillerSettings, OracleSettings, Suite, Sweep,
};

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn base(name: &str, group: GroupKind, sectors: Vec<i64>, potential: Potential) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        group,
        sectors,
        potential,
        window: [1.0, 2.0],
        energy: Some(1.5),
        sweep: Sweep {
            h_max: 0.02,
            h_min: 0.002,
            count: 8,
        },
        suites: vec![Suite::All],
        tolerances: Tolerances::default(),
        seed: 1,
        jobs: None,
        output_dir: "redspec-out".into(),
        cache_dir: default_cache_dir(),
        grid: GridPolicy::default(),
        gutzwiller: GutzwillerSettings::default(),
        oracle: OracleSettings::default(),
        classical: ClassicalSettings::default(),
    }
}

pub fn presets() -> Vec<Preset> {
    let mut harmonic_so2 = base("harmonic-so2", GroupKind::So2Planar, vec![0, 1, 2], Potential::harmonic());
    harmonic_so2.energy = Some(1.0);
    let harmonic_so3 = base("harmonic-so3", GroupKind::So3, vec![0, 1], Potential::harmonic());
    let anharmonic = base("anharmonic-so2", GroupKind::So2Planar, vec![0], Potential::anharmonic(1.0));
    let mut double_well = base("doublewell-so2", GroupKind::So2Planar, vec![0], Potential::double_well(1.0));
    double_well.window = [1.2, 2.0];
    double_well.energy = Some(1.6);
    let mut cylinder = base("cylinder-classical", GroupKind::So2Axial, vec![0], Potential::harmonic());
    cylinder.suites = vec![Suite::Classical];
    vec![
        Preset {
            name: "harmonic-so2",
            description: "planar oscillator, SO(2) sectors 0..2, exact levels 2h(2k+|n|+1)",
            config: harmonic_so2,
        },
        Preset {
            name: "harmonic-so3",
            description: "3D oscillator, SO(3) sectors 0 and 1, exact levels h(4k+2n+3)",
            config: harmonic_so3,
        },
        Preset {
            name: "anharmonic-so2",
            description: "planar r² + r⁴, SO(2) sector 0",
            config: anharmonic,
        },
        Preset {
            name: "doublewell-so2",
            description: "planar (r² − 1)² above the barrier, SO(2) sector 0",
            config: double_well,
        },
        Preset {
            name: "cylinder-classical",
            description: "cylindrical oscillator under rotations about the axis, classical suites only",
            config: cylinder,
        },
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    presets().into_iter().find(|p| p.name == name).map(|p| p.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_valid() {
        let all = presets();
        assert!(all.iter().any(|p| p.name == "harmonic-so2"));
        for p in &all {
            p.config.validate().unwrap();
            let round = ExperimentConfig::from_toml(&p.config.to_toml()).unwrap();
            assert_eq!(round, p.config, "{}", p.name);
        }
    }

    #[test]
    fn cylinder_is_classical_only() {
        let c = preset("cylinder-classical").unwrap();
        assert_eq!(c.resolved_suites(), vec![Suite::Classical]);
    }
}
