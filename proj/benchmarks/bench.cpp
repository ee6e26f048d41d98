#include <benchmark/benchmark.h>

#include <filesystem>

#include "imftn/simkit.hpp"

using namespace imftn;

namespace {

const LinkSetup& link_for_bench() {
  static const LinkSetup link = [] {
    ExperimentConfig cfg;
    cfg.ebn0_grid_db = {4.0};
    cfg.pilot_restarts = 16;
    cfg.cache_dir = (std::filesystem::temp_directory_path() / "imftn_bench_cache").string();
    return prepare_link(cfg);
  }();
  return link;
}

void BM_Identify(benchmark::State& state) {
  const LinkSetup& link = link_for_bench();
  const SuperframeSignal sig = simulate_superframe(link, 0);
  const std::size_t n = link.fc.n();
  const double sigma = ebn0_to_sigma(4.0, 4, link.cfg.rate_rc);
  CVec w(n);
  std::size_t frame = 0;
  for (auto _ : state) {
    const std::size_t start = sig.lead + (frame % 144) * n;
    for (std::size_t k = 0; k < n; ++k)
      w[k] = sig.clean[start + k] + sigma * sig.noise[start + k];
    benchmark::DoNotOptimize(identify(w, link.wp, link.ps, link.cfg.detector));
    ++frame;
  }
}
BENCHMARK(BM_Identify);

void BM_Lsse(benchmark::State& state) {
  const LinkSetup& link = link_for_bench();
  const SuperframeSignal sig = simulate_superframe(link, 0);
  const std::size_t off = sig.lead + sig.locations[0] + link.design.useful_offset();
  const std::span<const cplx> r_p(sig.clean.data() + off, link.design.useful_length());
  for (auto _ : state) benchmark::DoNotOptimize(lsse_estimate(r_p, link.design));
}
BENCHMARK(BM_Lsse);

void BM_SimulateSuperframe(benchmark::State& state) {
  const LinkSetup& link = link_for_bench();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_superframe(link, i++));
}
BENCHMARK(BM_SimulateSuperframe)->Unit(benchmark::kMillisecond);

void BM_WhiteningDesign(benchmark::State& state) {
  const double tau = static_cast<double>(state.range(0)) / 100.0;
  const PulseConfig cfg{0.35, tau, default_isi_half_length(tau, 0.35)};
  for (auto _ : state) benchmark::DoNotOptimize(whitening_filter(cfg));
}
BENCHMARK(BM_WhiteningDesign)->Arg(72)->Arg(80)->Arg(84)->Unit(benchmark::kMillisecond);

void BM_RelaxedSearch(benchmark::State& state) {
  const PulseConfig cfg{0.35, 0.84, 4};
  const TapSet v = whitening_filter(cfg);
  const Constellation c = make_constellation(Modulation::BPSK);
  RelaxedSearchOptions opt;
  opt.restarts = static_cast<int>(state.range(0));
  opt.workers = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(pilot_search_relaxed(c, 32, v, 4, 6, opt));
}
BENCHMARK(BM_RelaxedSearch)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
