use otajam::harness::{read_csv, run_decode, run_resolvability, ErrorRow, ExperimentConfig, Needs};
use otajam::resolvability::{TvMethod, TvRow};

const DECODE: &str = r#"
scenario = "t"
seed = 11

[compound]
gain = 1.0
noise_vars = [0.5, 1.0]
input = { mean = 0.0, var = 1.0 }
delta = 0.05
mi_samples = 20000

[decode]
rate_fraction = 0.4
epsilon_fraction = 0.9
block_lengths = [10, 20]
trials = 64
"#;

const GAUSSIAN: &str = r#"
scenario = "g"
seed = 12

[resolvability]
channel = "gaussian"
gain = 0.5
noise_var = 1.0
input = { mean = 0.0, var = 1.0 }
rate = 0.5
block_lengths = [4, 6]
replicates = 2
samples = 500
cost = { function = "square", budget = 1.2 }
"#;

#[test]
fn decode_rows_survive_a_csv_round_trip() {
    let cfg = ExperimentConfig::parse(DECODE, &[Needs::Compound, Needs::Decode]).unwrap();
    let run = run_decode(&cfg).unwrap();
    assert_eq!(run.rows.len(), 4);
    assert_eq!(run_decode(&cfg).unwrap().rows, run.rows);
    let dir = tempfile::tempdir().unwrap();
    let path = &run.write(&cfg, dir.path()).unwrap()[0];
    let header = std::fs::read_to_string(path).unwrap().lines().nth(2).unwrap().to_string();
    assert_eq!(header, "n,R,trials,err,stderr,e1_frac,e2_frac,seed,state");
    let back: Vec<ErrorRow> = read_csv(path).unwrap();
    assert_eq!(back, run.rows);
}

#[test]
fn constrained_gaussian_sweep_records_replacements() {
    let cfg = ExperimentConfig::parse(GAUSSIAN, &[Needs::Resolvability]).unwrap();
    let run = run_resolvability(&cfg).unwrap();
    assert_eq!(run.rows.len(), 4);
    assert!(run.rows.iter().all(|r| r.replaced_count.is_some() && r.method == TvMethod::IsMc));
    assert!(run.rows.iter().all(|r| (0.0..=2.0).contains(&r.tv)));
    let dir = tempfile::tempdir().unwrap();
    let path = &run.write(&cfg, dir.path()).unwrap()[0];
    let back: Vec<TvRow> = read_csv(path).unwrap();
    assert_eq!(back, run.rows);
}

#[test]
fn config_seed_changes_the_draws() {
    let cfg = ExperimentConfig::parse(GAUSSIAN, &[Needs::Resolvability]).unwrap();
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(cfg.sha256(), other.sha256());
    assert_ne!(run_resolvability(&cfg).unwrap().rows, run_resolvability(&other).unwrap().rows);
}
