#include "imftn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "imftn/waveform.hpp"

namespace imftn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("invalid value '" + std::string(value) + "' for " +
                              std::string(key));
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = lower(trim(value));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

std::vector<double> parse_grid(std::string_view key, std::string_view value) {
  // Either a comma list or start:step:stop.
  std::vector<double> out;
  const std::string v = trim(value);
  if (v.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ':');)
      parts.push_back(parse_number<double>(key, item));
    if (parts.size() != 3 || parts[1] <= 0.0) bad_value(key, value);
    const int n = static_cast<int>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(parts[0] + i * parts[1]);
    return out;
  }
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');)
    if (!trim(item).empty()) out.push_back(parse_number<double>(key, item));
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

int ExperimentConfig::resolved_l_h() const {
  return l_h > 0 ? l_h : default_isi_half_length(tau, beta);
}

int ExperimentConfig::resolved_l_c() const {
  if (l_c > 0) return l_c;
  if (channel_model == ChannelModelId::Model3) return 6;
  return make_lc(delay_spread_ms, symbol_rate, tau);
}

void ExperimentConfig::validate() const {
  PulseConfig{beta, tau, std::max(l_h, 1)}.validate();
  if (ebn0_grid_db.empty()) throw std::invalid_argument("config: empty Eb/N0 grid");
  if (frames_per_superframe < 1 || superframes < 1)
    throw std::invalid_argument("config: frame and superframe counts must be positive");
  if (rate_rc <= 0.0 || rate_rc > 1.0)
    throw std::invalid_argument("config: rate_rc must lie in (0, 1]");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (pilot_restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
  const int lc = resolved_l_c();
  if (lc < 1) throw std::invalid_argument("config: channel memory L_c must be >= 1");
  FrameConfig{n_p, n_s, lc, resolved_l_h()}.validate();
  detector.validate(lc);
}

void apply_setting(ExperimentConfig& cfg, std::string_view key_in,
                   std::string_view value) {
  const std::string key = lower(trim(key_in));
  const std::string v = trim(value);
  if (key == "model") cfg.channel_model = parse_channel_model(v);
  else if (key == "tau") cfg.tau = parse_number<double>(key, v);
  else if (key == "beta") cfg.beta = parse_number<double>(key, v);
  else if (key == "n_p") cfg.n_p = parse_number<int>(key, v);
  else if (key == "n_s") cfg.n_s = parse_number<int>(key, v);
  else if (key == "l_h") cfg.l_h = parse_number<int>(key, v);
  else if (key == "l_c") cfg.l_c = parse_number<int>(key, v);
  else if (key == "delay_spread_ms") cfg.delay_spread_ms = parse_number<double>(key, v);
  else if (key == "symbol_rate") cfg.symbol_rate = parse_number<double>(key, v);
  else if (key == "data_modulation") cfg.data_modulation = parse_modulation(v);
  else if (key == "pilot_modulation") cfg.pilot_modulation = parse_modulation(v);
  else if (key == "c1") cfg.detector.c1 = parse_number<double>(key, v);
  else if (key == "c2") cfg.detector.c2 = parse_number<double>(key, v);
  else if (key == "r0") cfg.detector.r0 = parse_number<int>(key, v);
  else if (key == "ebn0") cfg.ebn0_grid_db = parse_grid(key, v);
  else if (key == "frames_per_superframe") cfg.frames_per_superframe = parse_number<int>(key, v);
  else if (key == "superframes") cfg.superframes = parse_number<int>(key, v);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "rate_rc") cfg.rate_rc = parse_number<double>(key, v);
  else if (key == "doppler_hz") cfg.doppler_hz = parse_number<double>(key, v);
  else if (key == "doppler_convention") {
    const std::string s = lower(v);
    if (s == "two_sided") cfg.doppler_convention = DopplerConvention::TwoSided;
    else if (s == "sigma") cfg.doppler_convention = DopplerConvention::Sigma;
    else bad_value(key, v);
  } else if (key == "noise_path") {
    const std::string s = lower(v);
    if (s == "white") cfg.noise_path = NoisePath::White;
    else if (s == "colored") cfg.noise_path = NoisePath::Colored;
    else bad_value(key, v);
  } else if (key == "location") {
    const std::string s = lower(v);
    if (s == "known") cfg.location_mode = LocationMode::Known;
    else if (s == "identified") cfg.location_mode = LocationMode::Identified;
    else bad_value(key, v);
  } else if (key == "interpolate") cfg.interpolate = parse_bool(key, v);
  else if (key == "normalize_channel") cfg.normalize_channel = parse_bool(key, v);
  else if (key == "snapshot_per_frame") cfg.snapshot_per_frame = parse_bool(key, v);
  else if (key == "noiseless") cfg.noiseless = parse_bool(key, v);
  else if (key == "model3_exp_decay") cfg.model3_exp_decay = parse_number<double>(key, v);
  else if (key == "pilot_file") cfg.pilot_file = v;
  else if (key == "cache_dir") cfg.cache_dir = v;
  else if (key == "restarts") cfg.pilot_restarts = parse_number<int>(key, v);
  else if (key == "pilot_seed") cfg.pilot_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "workers") cfg.workers = parse_number<int>(key, v);
  else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto kv = [&os](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
  kv("model", std::string(to_string(cfg.channel_model)));
  kv("tau", format_double(cfg.tau));
  kv("beta", format_double(cfg.beta));
  kv("n_p", std::to_string(cfg.n_p));
  kv("n_s", std::to_string(cfg.n_s));
  kv("l_h", std::to_string(cfg.resolved_l_h()));
  kv("l_c", std::to_string(cfg.resolved_l_c()));
  kv("delay_spread_ms", format_double(cfg.delay_spread_ms));
  kv("symbol_rate", format_double(cfg.symbol_rate));
  kv("data_modulation", std::string(to_string(cfg.data_modulation)));
  kv("pilot_modulation", std::string(to_string(cfg.pilot_modulation)));
  kv("c1", format_double(cfg.detector.c1));
  kv("c2", format_double(cfg.detector.c2));
  kv("r0", std::to_string(cfg.detector.radius(cfg.resolved_l_c())));
  std::string grid;
  for (std::size_t i = 0; i < cfg.ebn0_grid_db.size(); ++i)
    grid += (i ? "," : "") + format_double(cfg.ebn0_grid_db[i]);
  kv("ebn0", grid);
  kv("frames_per_superframe", std::to_string(cfg.frames_per_superframe));
  kv("superframes", std::to_string(cfg.superframes));
  kv("seed", std::to_string(cfg.seed));
  kv("rate_rc", format_double(cfg.rate_rc));
  kv("doppler_hz", format_double(cfg.doppler_hz));
  kv("doppler_convention",
     cfg.doppler_convention == DopplerConvention::TwoSided ? "two_sided" : "sigma");
  kv("noise_path", cfg.noise_path == NoisePath::White ? "white" : "colored");
  kv("location", cfg.location_mode == LocationMode::Known ? "known" : "identified");
  kv("interpolate", cfg.interpolate ? "true" : "false");
  kv("normalize_channel", cfg.normalize_channel ? "true" : "false");
  kv("snapshot_per_frame", cfg.snapshot_per_frame ? "true" : "false");
  kv("noiseless", cfg.noiseless ? "true" : "false");
  kv("model3_exp_decay", format_double(cfg.model3_exp_decay));
  kv("pilot_file", cfg.pilot_file);
  kv("restarts", std::to_string(cfg.pilot_restarts));
  kv("pilot_seed", std::to_string(cfg.pilot_seed));
  return os.str();
}

}  // namespace imftn
