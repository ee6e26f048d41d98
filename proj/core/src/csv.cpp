#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "imftn/simkit.hpp"

namespace imftn {

namespace {

constexpr const char* kHeader = "ebn0_db,pslie,pslie_ci_lo,pslie_ci_hi,mse,trials,seed";

template <class T>
T parse_field(const std::string& s, int lineno) {
  T out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("csv line " + std::to_string(lineno) + ": bad field '" + s + "'");
  return out;
}

}  // namespace

void emit_csv(const ExperimentResult& result, std::ostream& os) {
  os << kHeader << '\n';
  for (const auto& p : result.points) {
    os << format_double(p.ebn0_db) << ',' << format_double(p.pslie) << ','
       << format_double(p.pslie_ci_lo) << ',' << format_double(p.pslie_ci_hi) << ','
       << format_double(p.mse) << ',' << p.trials << ',' << result.seed << '\n';
  }
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  emit_csv(result, os);
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

ExperimentResult parse_csv(std::istream& is) {
  ExperimentResult res;
  std::string line;
  if (!std::getline(is, line) || line != kHeader)
    throw IoError("csv: missing or unexpected header");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 7)
      throw IoError("csv line " + std::to_string(lineno) + ": expected 7 fields");
    PointResult p;
    p.ebn0_db = parse_field<double>(f[0], lineno);
    p.pslie = parse_field<double>(f[1], lineno);
    p.pslie_ci_lo = parse_field<double>(f[2], lineno);
    p.pslie_ci_hi = parse_field<double>(f[3], lineno);
    p.mse = parse_field<double>(f[4], lineno);
    p.trials = parse_field<std::uint64_t>(f[5], lineno);
    p.errors = static_cast<std::uint64_t>(std::llround(p.pslie * static_cast<double>(p.trials)));
    res.seed = parse_field<std::uint64_t>(f[6], lineno);
    res.points.push_back(p);
  }
  return res;
}

ExperimentResult parse_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return parse_csv(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace imftn
