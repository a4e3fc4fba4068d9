use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use heraldsim_bench::random_matrix;
use heraldsim_core::oracle::{glynn_permanent, glynn_permanent_dd, naive_permanent};
use heraldsim_core::permanent;

fn permanents(c: &mut Criterion) {
    let mut g = c.benchmark_group("permanent");
    for n in [4usize, 8, 12, 16] {
        let m = random_matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::new("ryser", n), &m, |b, m| {
            b.iter(|| permanent(black_box(m)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("glynn", n), &m, |b, m| {
            b.iter(|| glynn_permanent(black_box(m)))
        });
        if n <= 12 {
            g.bench_with_input(BenchmarkId::new("glynn_dd", n), &m, |b, m| {
                b.iter(|| glynn_permanent_dd(black_box(m)))
            });
        }
        if n <= 8 {
            g.bench_with_input(BenchmarkId::new("naive", n), &m, |b, m| {
                b.iter(|| naive_permanent(black_box(m)).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, permanents);
criterion_main!(benches);
