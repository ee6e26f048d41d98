#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "imftn/channel.hpp"
#include "oracles.hpp"

using namespace imftn;

namespace {

CVec random_cvec(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  CVec x(n);
  for (auto& z : x) z = complex_normal(rng);
  return x;
}

// Hand-built static channel with the given taps.
ChannelProcess static_channel(const CVec& c, std::size_t n) {
  ChannelProcess ch;
  ch.l_c = static_cast<int>(c.size()) - 1;
  ch.n_symbols = n;
  ch.block_length = n;
  for (std::size_t l = 0; l < c.size(); ++l) {
    ch.delay_profile.push_back(static_cast<int>(l));
    ch.paths.push_back(CVec{c[l]});
  }
  return ch;
}

double sample_corr(const CVec& a, const CVec& b) {
  cplx ab{};
  double aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * std::conj(b[i]);
    aa += std::norm(a[i]);
    bb += std::norm(b[i]);
  }
  return std::abs(ab) / std::sqrt(aa * bb);
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("model names") {
  CHECK(parse_channel_model("1") == ChannelModelId::Model1);
  CHECK(parse_channel_model("Model3") == ChannelModelId::Model3);
  CHECK(to_string(ChannelModelId::Model2) == "model2");
  CHECK_THROWS_AS(parse_channel_model("4"), std::invalid_argument);
}

TEST_CASE("channel memory from delay spread") {
  std::string warn;
  CHECK(make_lc(2.0, 2400, 0.84, &warn) == 6);
  CHECK(warn.empty());
  CHECK(make_lc(2.1, 2400, 1.0, &warn) == 5);
  CHECK(warn.empty());
  CHECK(make_lc(0.0, 2400, 0.84) == 0);
  CHECK(make_lc(2.1, 2400, 0.72) == 7);
  make_lc(2.0, 2400, 0.6, &warn);  // 8 intervals exactly
  CHECK(warn.empty());
  make_lc(1.0, 2400, 0.9, &warn);  // 2.67 intervals
  CHECK_FALSE(warn.empty());
}

TEST_CASE("model 2 moments and sparsity") {
  double p0 = 0.0, p6 = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const ChannelProcess ch = make_model2(static_cast<std::uint64_t>(s), 6, 10, false);
    const CVec c = ch.taps_at(3);
    for (int l = 1; l < 6; ++l) CHECK(c[l] == cplx{});
    p0 += std::norm(c[0]);
    p6 += std::norm(c[6]);
  }
  CHECK(p0 / draws == doctest::Approx(0.5).epsilon(0.02));
  CHECK(p6 / draws == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("model 2 normalized realization and determinism") {
  const ChannelProcess a = make_model2(42, 6, 100);
  const ChannelProcess b = make_model2(42, 6, 100);
  CHECK(a.taps_at(0) == b.taps_at(0));
  CHECK(a.taps_at(0) == a.taps_at(99));
  const CVec c = a.taps_at(50);
  CHECK(std::norm(c[0]) + std::norm(c[6]) == doctest::Approx(1.0));
  CHECK(make_model2(43, 6, 100).taps_at(0) != a.taps_at(0));
}

TEST_CASE("model 1 ergodic power") {
  Model1Params p;
  p.l_c = 6;
  const std::size_t n = 1'000'000;
  double total = 0.0;
  const int runs = 16;
  for (int s = 0; s < runs; ++s) {
    const ChannelProcess ch = make_model1(static_cast<std::uint64_t>(s), n, p);
    CHECK(ch.delay_profile == std::vector<int>{0, 6});
    for (std::size_t k = 0; k < n; k += 7) {
      total += std::norm(ch.tap(k, 0)) + std::norm(ch.tap(k, 6));
    }
  }
  const double mean = total / (runs * ((n + 6) / 7));
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("model 1 gaussian doppler autocorrelation") {
  Model1Params p;
  p.l_c = 6;
  const double sigma_d = p.doppler_hz / 2.0;
  const double t_e = 1.0 / (std::sqrt(2.0) * std::numbers::pi * sigma_d);
  const std::size_t n = 1'000'000;
  const int runs = 16;
  const std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<cplx> acc(fractions.size() + 1, cplx{});
  for (int s = 0; s < runs; ++s) {
    const ChannelProcess ch = make_model1(100 + static_cast<std::uint64_t>(s), n, p);
    const CVec& x = ch.paths[0];
    for (std::size_t f = 0; f <= fractions.size(); ++f) {
      const std::size_t lag =
          f == 0 ? 0 : static_cast<std::size_t>(fractions[f - 1] * t_e * p.symbol_rate);
      cplx r{};
      for (std::size_t k = 0; k + lag < n; k += 3) r += x[k + lag] * std::conj(x[k]);
      acc[f] += r / static_cast<double>((n - lag) / 3);
    }
  }
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const double lag_s = static_cast<std::size_t>(fractions[f] * t_e * p.symbol_rate) / p.symbol_rate;
    const double want = std::exp(-2.0 * std::pow(std::numbers::pi * sigma_d * lag_s, 2.0));
    CHECK(std::abs(acc[f + 1]) / acc[0].real() == doctest::Approx(want).epsilon(0.05));
  }
}

TEST_CASE("model 1 without doppler is static") {
  Model1Params p;
  p.l_c = 6;
  p.doppler_hz = 0.0;
  const ChannelProcess ch = make_model1(5, 1000, p);
  CHECK(ch.taps_at(0) == ch.taps_at(999));
  double p0 = 0.0;
  for (int s = 0; s < 4000; ++s) p0 += std::norm(make_model1(static_cast<std::uint64_t>(s), 10, p).tap(0, 0));
  CHECK(p0 / 4000 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("model 3 holds taps over frame pairs") {
  Model3Params p;
  const std::size_t frames = 9;
  const ChannelProcess ch = make_model3(7, frames, p);
  CHECK(ch.l_c == 6);
  CHECK(ch.delay_profile.size() == 7);
  for (std::size_t i = 0; i + 1 < frames; i += 2) {
    CHECK(ch.taps_at(i * 288) == ch.taps_at((i + 1) * 288 + 287));
    if (i + 2 < frames) CHECK(ch.taps_at(i * 288) != ch.taps_at((i + 2) * 288));
  }
}

TEST_CASE("model 3 power and redraw independence") {
  Model3Params p;
  p.normalize = false;
  const std::size_t frames = 20000;
  const ChannelProcess ch = make_model3(11, frames, p);
  const std::size_t blocks = ch.paths[0].size();
  double power = 0.0;
  for (std::size_t b = 0; b < blocks; ++b)
    for (const auto& path : ch.paths) power += std::norm(path[b]);
  CHECK(power / blocks == doctest::Approx(1.0).epsilon(0.02));
  const CVec& c0 = ch.paths[0];
  const CVec a(c0.begin(), c0.end() - 1), b(c0.begin() + 1, c0.end());
  CHECK(sample_corr(a, b) < 0.05);
}

TEST_CASE("model 3 exponential profile") {
  Model3Params p;
  p.exp_decay = 1.0;
  p.normalize = false;
  const ChannelProcess ch = make_model3(13, 40000, p);
  double p0 = 0.0, p1 = 0.0;
  for (std::size_t b = 0; b < ch.paths[0].size(); ++b) {
    p0 += std::norm(ch.paths[0][b]);
    p1 += std::norm(ch.paths[1][b]);
  }
  CHECK(p1 / p0 == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("apply_channel identity, impulse and brute force") {
  const CVec x = random_cvec(50, 1);
  CHECK(apply_channel(x, static_channel({1.0}, 50)) == x);

  const cplx a(0.3, -0.2), b(-0.5, 0.7);
  CVec imp(6, cplx{});
  imp[0] = 1.0;
  const CVec y = apply_channel(imp, static_channel({a, 0.0, b}, 6));
  CHECK(y[0] == a);
  CHECK(y[1] == cplx{});
  CHECK(y[2] == b);
  CHECK(y[3] == cplx{});

  const CVec c = random_cvec(5, 2);
  const CVec got = apply_channel(x, static_channel(c, 50));
  const CVec want = oracle::conv_full(x, c);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-14);
}

TEST_CASE("apply_channel noise variance and overflow") {
  const std::size_t n = 200000;
  const CVec x(n, cplx{});
  Rng rng = make_stream(9);
  const CVec y = apply_channel(x, static_channel({1.0}, n), 0.3, rng);
  double e = 0.0;
  for (const cplx& z : y) e += std::norm(z);
  CHECK(e / n == doctest::Approx(0.09).epsilon(0.02));
  CHECK_THROWS(apply_channel(CVec(11), static_channel({1.0}, 10)));
}

TEST_CASE("channel csv dump") {
  const ChannelProcess ch = make_model2(1, 6, 10);
  std::ostringstream os;
  write_channel_csv(os, ch, 2);
  const std::string s = os.str();
  CHECK(s.rfind("k,l,re,im\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}

}  // TEST_SUITE
