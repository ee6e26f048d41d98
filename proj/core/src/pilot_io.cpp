#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "imftn/estimator.hpp"

namespace imftn {

namespace {

std::string fmt_param(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(x);
}

}  // namespace

void write_pilot_file(const std::filesystem::path& path,
                      const std::vector<int>& labels, const Constellation& c,
                      const std::string& comment) {
  // Write to a sibling temp file, then rename, so concurrent readers never see
  // a partial file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write pilot file " + tmp.string());
    os << "# constellation " << c.name << '\n';
    if (!comment.empty()) {
      std::istringstream lines(comment);
      for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
    }
    for (int l : labels) os << l << '\n';
    if (!os) throw IoError("write failed for pilot file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move pilot file into place at " + path.string() +
                        ": " + ec.message());
}

std::vector<int> read_pilot_file(const std::filesystem::path& path,
                                 const Constellation& c) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open pilot file " + path.string());
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(first, last - first + 1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || value < 0 ||
        static_cast<std::size_t>(value) >= c.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": invalid " +
                    c.name + " label '" + tok + "'");
    labels.push_back(value);
  }
  if (labels.empty()) throw IoError("pilot file " + path.string() + " holds no symbols");
  return labels;
}

std::string design_cache_name(const Constellation& c, int n_p, double tau,
                              double beta, int l_h, int l_c) {
  return c.name + "_np" + std::to_string(n_p) + "_tau" + fmt_param(tau) + "_beta" +
         fmt_param(beta) + "_lh" + std::to_string(l_h) + "_lc" + std::to_string(l_c) +
         ".pilot";
}

}  // namespace imftn
