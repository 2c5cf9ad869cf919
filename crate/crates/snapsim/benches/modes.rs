//! Benchmarks of the data-parallel hot paths, labelled with the execution
//! mode so the two builds can be compared:
//!
//! ```text
//! cargo bench -p snapsim                          # rayon pool
//! cargo bench -p snapsim --no-default-features     # sequential fallback
//! ```
//!
//! Criterion keys results by the full id, so after running both commands
//! `target/criterion` holds a `<name>/parallel` and `<name>/sequential`
//! entry per benchmark.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use snapsim::analysis::{reconstruct_density_matrix, wigner_map, GridSpec};
use snapsim::dispersive::{reference_frame_shift, HamiltonianParams};
use snapsim::experiments::{phase_evolution_experiment, GateMode, ScanSetup};
use snapsim::pulse::{simulate_drive, snap_pulse_pair, JointState, PulseWidth};
use snapsim::{par, CavityState, C64};

fn wigner_map_bench(c: &mut Criterion) {
    let state = CavityState::coherent(C64::new(2.0, 0.0), 40).unwrap();
    let spec = GridSpec::centered_on(0.0, 0.0, 3.5, 0.1);
    let mut group = c.benchmark_group("wigner_map_71x71_dim40");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(8));
    group.bench_with_input(
        BenchmarkId::from_parameter(par::mode()),
        &spec,
        |b, spec| b.iter(|| wigner_map(&state, spec).unwrap()),
    );
    group.finish();
}

fn phase_scan_bench(c: &mut Criterion) {
    let params = HamiltonianParams::reference();
    let setup = ScanSetup {
        params: &params,
        dim: 40,
        alpha: C64::new(1.4, 0.0),
        qubit_excited: false,
        frame_shift: reference_frame_shift(),
        epsilon: 0.05,
        mode: GateMode::Ideal,
    };
    let ns: Vec<usize> = (0..=3).collect();
    let dts: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25e-6).collect();
    let thetas: Vec<f64> = (0..48)
        .map(|k| -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / 48.0)
        .collect();
    let mut group = c.benchmark_group("phase_scan_4n_41dt");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(8));
    group.bench_function(BenchmarkId::from_parameter(par::mode()), |b| {
        b.iter(|| phase_evolution_experiment(&setup, &ns, &dts, &thetas, None).unwrap())
    });
    group.finish();
}

fn pulse_pair_bench(c: &mut Criterion) {
    let params = HamiltonianParams::reference();
    let program = snap_pulse_pair(1, 1.0, PulseWidth::Sigma(0.25e-6), &params).unwrap();
    let initial = JointState::from_cavity(
        false,
        &CavityState::coherent(C64::new(1.0, 0.0), 20).unwrap(),
    );
    let mut group = c.benchmark_group("pulse_pair_dim20");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(8));
    group.bench_function(BenchmarkId::from_parameter(par::mode()), |b| {
        b.iter(|| simulate_drive(&initial, &program.pulses, &params, None).unwrap())
    });
    group.finish();
}

fn reconstruction_bench(c: &mut Criterion) {
    let state = CavityState::fock(1, 40).unwrap();
    let samples = wigner_map(&state, &GridSpec::centered_on(0.0, 0.0, 2.0, 0.25))
        .unwrap()
        .samples();
    let mut group = c.benchmark_group("reconstruction_289_samples_dim8");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(8));
    group.bench_function(BenchmarkId::from_parameter(par::mode()), |b| {
        b.iter(|| reconstruct_density_matrix(&samples, 8).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    wigner_map_bench,
    phase_scan_bench,
    pulse_pair_bench,
    reconstruction_bench
);
criterion_main!(benches);
