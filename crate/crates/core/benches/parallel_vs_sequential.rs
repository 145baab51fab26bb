use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mdimlab::harness::{mdim_estimate, SystemSpec};
use mdimlab::local_entropy::{brin_katok_estimate, BallMethod};
use mdimlab::measures::parry;
use mdimlab::metric_core::{covering_number, CoverOptions, RateMethod};
use mdimlab::par;
use mdimlab::shift_systems::{build_full_shift, golden_mean, Alphabet, ShiftWindowSystem};

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", false), ("sequential", true)]
}

fn brin_katok(c: &mut Criterion) {
    let mu = parry(&golden_mean()).unwrap();
    let sys = ShiftWindowSystem::sft(golden_mean(), Alphabet::evenly_spaced(2).unwrap(), 3, 10).unwrap();
    let mut g = c.benchmark_group("brin_katok_101_centers");
    g.sample_size(10);
    for (name, seq) in modes() {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brin_katok_estimate(&mu, &sys, 0.4, 1..=10, 101, 0, BallMethod::Auto).unwrap())
        });
    }
    g.finish();
    par::set_sequential(false);
}

fn covering(c: &mut Criterion) {
    let sys = build_full_shift(2, 2, 6, 1 << 12).unwrap();
    let bowen = sys.bowen(3).unwrap();
    let opts = CoverOptions::default();
    let mut g = c.benchmark_group("covering_bracket_1024_points");
    g.sample_size(10);
    for (name, seq) in modes() {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| covering_number(&bowen, 0.3, &opts).unwrap())
        });
    }
    g.finish();
    par::set_sequential(false);
}

fn mdim(c: &mut Criterion) {
    let eps: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    let spec = SystemSpec::UnitFullShift { window: None };
    let mut g = c.benchmark_group("mdim_unit_family");
    g.sample_size(10);
    for (name, seq) in modes() {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mdim_estimate(&spec, &eps, 1..=8, RateMethod::SlopeFit).unwrap())
        });
    }
    g.finish();
    par::set_sequential(false);
}

criterion_group!(benches, brin_katok, covering, mdim);
criterion_main!(benches);
