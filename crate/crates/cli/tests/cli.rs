use std::path::Path;
use std::process::Command;

use rotcool_cli::config::{self, ConfigSources};
use rotcool_cli::{load_str, CliError};

fn rotcool() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rotcool"))
}

fn header_of(path: &Path) -> (Vec<String>, String) {
    let text = std::fs::read_to_string(path).unwrap();
    let meta: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(String::from)
        .collect();
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap().to_string();
    (meta, columns)
}

#[test]
fn preset_resolves_to_table_constants() {
    let cfg = config::load(&ConfigSources {
        preset: Some("propanediol-depletion"),
        ..Default::default()
    })
    .unwrap();
    let m = cfg.molecule.as_ref().unwrap();
    assert_eq!(
        (m.a, m.b, m.c, m.mass),
        (Some(8612.0), Some(3758.0), Some(2868.0), Some(77.0))
    );
    assert_eq!(cfg.cooling.rabi_mhz, 0.2);
    assert_eq!(cfg.cooling.gamma_mhz, 0.1);
    assert_eq!(cfg.cooling.eta, 0.012);
    assert_eq!(cfg.cooling.coupling_khz, vec![0.0, 2.7, 5.7, 8.4]);
}

#[test]
fn glutamine_preset() {
    let cfg = config::load(&ConfigSources {
        preset: Some("glutamine-2_21"),
        ..Default::default()
    })
    .unwrap();
    assert_eq!(cfg.chain.radial_mhz, 3.76);
    assert_eq!(cfg.cooling.coupling_khz[1], 0.38);
    assert_eq!(cfg.cooling.gamma_mhz, 0.05);
    assert_eq!(cfg.cooling.rabi_mhz, 0.05);
}

#[test]
fn missing_molecule_is_named() {
    let err = load_str("[chain]\nradial_mhz = 5.0\n").unwrap_err();
    assert!(err.to_string().contains("molecule"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn parse_errors_carry_position() {
    let err = load_str("[molecule]\npreset = \"propanediol\"\nmass = = 3\n").unwrap_err();
    assert!(matches!(err, CliError::Parse(_)));
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let err = load_str("[molecule]\npreset = \"propanediol\"\n[cooling]\ngama_mhz = 0.1\n").unwrap_err();
    assert!(err.to_string().contains("gama_mhz"), "{err}");
}

#[test]
fn resolved_config_round_trips() {
    for name in config::PRESET_NAMES {
        let cfg = config::load(&ConfigSources {
            preset: Some(name),
            ..Default::default()
        })
        .unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(load_str(&text).unwrap(), cfg, "{name}");
    }
}

#[test]
fn overrides_apply_with_types() {
    let overrides = vec![
        "cooling.gamma_mhz=0.05".to_string(),
        "numerics.jump=amplitude".to_string(),
        "chain.mode=axial-1".to_string(),
    ];
    let cfg = config::load(&ConfigSources {
        preset: Some("propanediol-depletion"),
        path: None,
        overrides: &overrides,
    })
    .unwrap();
    assert_eq!(cfg.cooling.gamma_mhz, 0.05);
    assert_eq!(cfg.chain.mode, "axial-1");
    assert_eq!(config::enum_name(&cfg.numerics.jump), "amplitude");
}

#[test]
fn levels_command_writes_golden_headers() {
    let dir = tempfile::tempdir().unwrap();
    let status = rotcool()
        .args(["levels", "--preset", "propanediol-depletion", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (meta, columns) = header_of(&dir.path().join("levels.csv"));
    assert_eq!(columns, "j,ka,kc,label,energy_mhz");
    assert!(meta[0].starts_with("# rotcool-cli "));
    assert_eq!(meta[2], "# schema: levels/1");
    assert!(
        meta[3].contains("mass_scaling=none") && meta[3].contains("mixing=intensity") && meta[3].contains("jump=rate")
    );
    let (_, columns) = header_of(&dir.path().join("transitions.csv"));
    assert_eq!(columns, "lower,upper,frequency_mhz,strength_x,strength_y,strength_z");

    let text = std::fs::read_to_string(dir.path().join("levels.csv")).unwrap();
    let energy = |label: &str| -> f64 {
        let line = text.lines().find(|l| l.contains(&format!(",{label},"))).unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!(text.contains("3,3,1,3_31,") && text.contains("3,3,0,3_30,"));
    let gap = energy("3_30") - energy("3_31");
    assert!((8.3..=9.4).contains(&gap), "{gap}");

    let echoed = std::fs::read_to_string(dir.path().join("resolved_config.toml")).unwrap();
    assert!(load_str(&echoed).is_ok());
}

#[test]
fn modes_and_drive_headers() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rotcool()
        .args(["modes", "--preset", "propanediol-depletion", "--out"])
        .arg(dir.path())
        .status()
        .unwrap()
        .success());
    let (_, columns) = header_of(&dir.path().join("modes.csv"));
    assert_eq!(columns, "label,axis,frequency_mhz,zigzag,b_0,b_1,b_2");
    let (_, columns) = header_of(&dir.path().join("positions.csv"));
    assert_eq!(columns, "index,kind,mass_u,position_um");

    let status = rotcool()
        .args([
            "drive",
            "--preset",
            "propanediol-depletion",
            "--set",
            r#"pulses=[{lower="2_21:1", upper="3_30:2", polarization="x"}]"#,
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, columns) = header_of(&dir.path().join("populations.csv"));
    assert_eq!(columns, "level,m,population_before,population_after");
}

#[test]
fn scan_finds_resonances_for_every_molecule() {
    let dir = tempfile::tempdir().unwrap();
    let status = rotcool()
        .args(["scan", "--preset", "scan-window", "--set", "scan.mass_points=20", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, columns) = header_of(&dir.path().join("resonances.csv"));
    assert_eq!(
        columns,
        "molecule,mass_u,radial_mhz,lower,upper,transition_mhz,b_m,prefactor_khz_per_debye"
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    let per = summary["resonances_per_molecule"].as_object().unwrap();
    assert_eq!(per.len(), 4);
    assert!(per.values().all(|v| v.as_u64().unwrap() > 0));
}

#[test]
fn z_only_protocol_is_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let status = rotcool()
        .args([
            "protocol",
            "--preset",
            "propanediol-depletion",
            "--set",
            "protocol.admixture=1.0",
            "--set",
            "protocol.iterations=4",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("protocol.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], serde_json::Value::Bool(false));
    let (_, columns) = header_of(&dir.path().join("protocol.csv"));
    assert!(columns.starts_with("iteration,error,stages,2_21:-2,"));
}

#[test]
fn cool_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let status = rotcool()
        .args([
            "cool",
            "--preset",
            "propanediol-depletion",
            "--set",
            "cooling.blocks=[0,1]",
            "--set",
            "cooling.duration_ms=0.5",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, columns) = header_of(&dir.path().join("cooling.csv"));
    assert_eq!(
        columns,
        "m,coupling_khz,time_ms,p_lower,p_upper,phonon_0,phonon_1,phonon_2,trace,purity,min_eigenvalue"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotcool()
        .args(["levels", "--preset", "no-such-preset", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = rotcool().args(["levels", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // A radial confinement this weak cannot hold the chain.
    let out = rotcool()
        .args([
            "modes",
            "--preset",
            "propanediol-depletion",
            "--set",
            "chain.radial_mhz=0.5",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "preset = \"propanediol-depletion\"\n[levels]\njmax = 2\n").unwrap();
    let out = dir.path().join("o");
    let status = rotcool()
        .arg("levels")
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("levels.csv")).unwrap();
    assert!(!text.contains("3_31"));
    assert!(text.contains("2_21"));
}
