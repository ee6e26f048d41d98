// imftn: command-line front end for the index-modulated FTN simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imftn/channel.hpp"
#include "imftn/config.hpp"
#include "imftn/estimator.hpp"
#include "imftn/framing.hpp"
#include "imftn/psli.hpp"
#include "imftn/simkit.hpp"

using namespace imftn;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_file, "key=value configuration file");
  app->add_option("--set", o.sets, "override a configuration key (key=value)")
      ->take_all();
  app->add_option("--seed", o.seed, "master RNG seed")
      ->each([&o](const std::string&) { o.seed_given = true; });
  app->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", o.out, "output file (default: stdout)");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig cfg;
  if (!o.config_file.empty()) load_config_file(cfg, o.config_file);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed_given) cfg.seed = o.seed;
  if (o.workers > 0) cfg.workers = o.workers;
  return cfg;
}

// Opens --out or falls back to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open " + path + " for writing");
    }
    path_ = path;
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed for " + (path_.empty() ? "stdout" : path_));
  }

 private:
  std::ofstream file_;
  std::string path_;
};

std::vector<double> parse_list(const std::string& s) {
  ExperimentConfig tmp;
  apply_setting(tmp, "ebn0", s);
  return tmp.ebn0_grid_db;
}

int cmd_design_pilot(const CommonOptions& o, const std::string& method,
                     std::uint64_t limit) {
  ExperimentConfig cfg = resolve_config(o);
  const int l_h = cfg.resolved_l_h();
  const int l_c = cfg.resolved_l_c();
  const PulseConfig pulse{cfg.beta, cfg.tau, l_h};
  const TapSet v = whitening_filter(pulse);
  const Constellation c = make_constellation(cfg.pilot_modulation);
  PilotDesign d;
  if (method == "exhaustive") {
    d = pilot_search_exhaustive(c, cfg.n_p, v, l_h, l_c, limit);
  } else {
    RelaxedSearchOptions opt;
    opt.restarts = cfg.pilot_restarts;
    opt.seed = cfg.pilot_seed;
    opt.workers = cfg.workers;
    d = pilot_search_relaxed(c, cfg.n_p, v, l_h, l_c, opt);
  }
  const std::string note = method + " search, tau=" + format_double(cfg.tau) +
                           " beta=" + format_double(cfg.beta) + " L_h=" + std::to_string(l_h) +
                           " L_c=" + std::to_string(l_c) +
                           "\npredicted MSE at sigma^2=1: " + format_double(d.predicted_mse);
  if (o.out.empty()) {
    std::cout << "# constellation " << c.name << '\n';
    for (int l : d.labels) std::cout << l << '\n';
  } else {
    write_pilot_file(o.out, d.labels, c, note);
  }
  std::cerr << "predicted MSE (sigma^2 = 1): " << d.predicted_mse << '\n';
  return 0;
}

int cmd_simulate(const CommonOptions& o, bool psli) {
  const ExperimentConfig cfg = resolve_config(o);
  const LinkSetup link = prepare_link(cfg);
  std::cerr << "L_h=" << link.cfg.l_h << " L_c=" << link.cfg.l_c
            << " N_b=" << link.ps.n_b << " predicted MSE(sigma^2=1)="
            << link.design.predicted_mse << '\n';
  const ExperimentResult r = psli ? run_psli_experiment(link) : run_mse_experiment(link);
  Output out(o.out);
  emit_csv(r, out.stream());
  out.finish();
  for (const auto& p : r.points)
    std::cerr << "EbN0 " << p.ebn0_db << " dB: " << p.errors << "/" << p.trials
              << " errors, MSE " << p.mse << '\n';
  return 0;
}

int cmd_se_table(const CommonOptions& o, const std::vector<int>& n_p,
                 const std::vector<int>& n_s, const std::vector<int>& m, bool grid,
                 double tau, double beta, double r_c, int l_c) {
  struct Row { int n_p, n_s, m; };
  std::vector<Row> rows;
  if (grid) {
    for (int a : n_p)
      for (int b : n_s)
        for (int c : m) rows.push_back({a, b, c});
  } else {
    if (n_p.size() != n_s.size() || n_p.size() != m.size())
      throw std::invalid_argument("--n-p, --n-s and --order need equal lengths unless --grid");
    for (std::size_t i = 0; i < n_p.size(); ++i) rows.push_back({n_p[i], n_s[i], m[i]});
  }
  Output out(o.out);
  auto& os = out.stream();
  os << "n_p,n_s,M,tau,beta,r_c,n_b,gamma_nyq,gamma_ftn,gamma_im,gain_nyq_pct,gain_ftn_pct\n";
  for (const Row& r : rows) {
    const int n_b = placement_set(r.n_s, l_c).n_b;
    const SEFigures se = se_figures(r.n_p, r.n_s, r.m, tau, beta, r_c, n_b);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%g,%g,%g,%d,%.4f,%.4f,%.4f,%.2f,%.2f\n", r.n_p,
                  r.n_s, r.m, tau, beta, r_c, n_b, se.gamma_nyq, se.gamma_ftn, se.gamma_im,
                  100.0 * se.gain_nyq, 100.0 * se.gain_ftn);
    os << buf;
  }
  out.finish();
  return 0;
}

int cmd_channel_probe(const CommonOptions& o, std::size_t symbols) {
  ExperimentConfig cfg = resolve_config(o);
  const int l_c = cfg.resolved_l_c();
  ChannelProcess ch;
  switch (cfg.channel_model) {
    case ChannelModelId::Model1: {
      Model1Params p;
      p.l_c = l_c;
      p.doppler_hz = cfg.doppler_hz;
      p.convention = cfg.doppler_convention;
      p.symbol_rate = cfg.symbol_rate / cfg.tau;
      ch = make_model1(cfg.seed, symbols, p);
      break;
    }
    case ChannelModelId::Model2:
      ch = make_model2(cfg.seed, l_c, symbols, cfg.normalize_channel);
      break;
    case ChannelModelId::Model3: {
      Model3Params p;
      p.l_c = l_c;
      p.frame_length = static_cast<std::size_t>(cfg.n_p + cfg.n_s);
      p.exp_decay = cfg.model3_exp_decay;
      p.normalize = cfg.normalize_channel;
      ch = make_model3(cfg.seed, (symbols + p.frame_length - 1) / p.frame_length, p);
      break;
    }
  }
  Output out(o.out);
  write_channel_csv(out.stream(), ch, symbols);
  out.finish();
  return 0;
}

int cmd_calibrate(const CommonOptions& o, const std::string& c1s, const std::string& c2s,
                  double target) {
  const ExperimentConfig cfg = resolve_config(o);
  const LinkSetup link = prepare_link(cfg);
  const auto rows = calibrate_detector(link, parse_list(c1s), parse_list(c2s));
  Output out(o.out);
  auto& os = out.stream();
  os << "c1,c2,ebn0_db,pslie,errors,trials\n";
  const CalibrationRow* best = nullptr;
  for (const auto& r : rows) {
    os << format_double(r.c1) << ',' << format_double(r.c2) << ',' << format_double(r.ebn0_db)
       << ',' << format_double(static_cast<double>(r.errors) / static_cast<double>(r.trials))
       << ',' << r.errors << ',' << r.trials << '\n';
    if (r.ebn0_db == target && (!best || r.errors < best->errors)) best = &r;
  }
  out.finish();
  if (best)
    std::cerr << "lowest PSLIE at " << target << " dB: c1=" << best->c1 << " c2=" << best->c2
              << " (" << best->errors << "/" << best->trials << ")\n";
  return 0;
}

int cmd_psli_dump(const CommonOptions& o, std::size_t superframe, std::size_t frame) {
  ExperimentConfig cfg = resolve_config(o);
  const LinkSetup link = prepare_link(cfg);
  if (frame >= static_cast<std::size_t>(cfg.frames_per_superframe))
    throw std::invalid_argument("--frame beyond frames_per_superframe");
  const SuperframeSignal sig = simulate_superframe(link, superframe);
  const double sigma = cfg.noiseless ? 0.0
                                     : ebn0_to_sigma(cfg.ebn0_grid_db.front(),
                                                     static_cast<int>(link.data_c.size()),
                                                     cfg.rate_rc);
  const std::size_t n = static_cast<std::size_t>(link.fc.n());
  CVec w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = sig.lead + frame * n + k;
    w[k] = sig.clean[idx] + sigma * sig.noise[idx];
  }
  Output out(o.out);
  write_correlation_csv(out.stream(), w, link.wp, link.ps);
  out.finish();
  const std::size_t n_hat = identify(w, link.wp, link.ps, cfg.detector);
  std::cerr << "true location " << sig.locations[frame] << ", identified " << n_hat << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index-modulated pilot placement and channel estimation for FTN signaling"};
  app.require_subcommand(1);

  CommonOptions design_o, psli_o, mse_o, se_o, probe_o, cal_o, dump_o;

  auto* design = app.add_subcommand("design-pilot", "search for an MSE-optimal pilot sequence");
  add_common(design, design_o);
  std::string method = "relaxed";
  std::uint64_t limit = 1ULL << 24;
  design->add_option("--method", method, "relaxed or exhaustive")
      ->check(CLI::IsMember({"relaxed", "exhaustive"}));
  design->add_option("--limit", limit, "exhaustive search budget (sequences)");

  auto* sim_psli = app.add_subcommand("simulate-psli", "pilot-location error rate versus Eb/N0");
  add_common(sim_psli, psli_o);
  auto* sim_mse = app.add_subcommand("simulate-mse", "channel-estimation MSE versus Eb/N0");
  add_common(sim_mse, mse_o);

  auto* se = app.add_subcommand("se-table", "spectral-efficiency figures");
  add_common(se, se_o);
  std::vector<int> se_np{48, 32, 32, 32}, se_ns{48, 96, 256, 256}, se_m{2, 2, 2, 4};
  double se_tau = 0.72, se_beta = 0.35, se_rc = 0.75;
  int se_lc = 6;
  bool se_grid = false;
  se->add_option("--n-p", se_np, "pilot lengths");
  se->add_option("--n-s", se_ns, "data lengths");
  se->add_option("-m,--order", se_m, "constellation sizes");
  se->add_option("--tau", se_tau, "packing ratio");
  se->add_option("--beta", se_beta, "roll-off");
  se->add_option("--rc", se_rc, "code rate");
  se->add_option("--l-c", se_lc, "channel memory used for the placement set");
  se->add_flag("--grid", se_grid, "cross product of the lists instead of zipping them");

  auto* probe = app.add_subcommand("channel-probe", "dump a channel realization as CSV");
  add_common(probe, probe_o);
  std::size_t probe_symbols = 4096;
  probe->add_option("--symbols", probe_symbols, "symbols to generate");

  auto* cal = app.add_subcommand("calibrate-detector", "sweep detector thresholds c1 and c2");
  add_common(cal, cal_o);
  std::string c1s = "0.3,0.4,0.5,0.6,0.7,0.8,0.9", c2s = "1,1.1,1.25,1.5";
  double target = 4.0;
  cal->add_option("--c1", c1s, "c1 values (comma list or start:step:stop)");
  cal->add_option("--c2", c2s, "c2 values (comma list or start:step:stop)");
  cal->add_option("--target", target, "Eb/N0 used to report the best pair");

  auto* dump = app.add_subcommand("psli-dump", "correlation profile of one received frame");
  add_common(dump, dump_o);
  std::size_t dump_sf = 0, dump_frame = 0;
  dump->add_option("--superframe", dump_sf, "superframe index");
  dump->add_option("--frame", dump_frame, "frame index within the superframe");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) return cmd_design_pilot(design_o, method, limit);
    if (*sim_psli) return cmd_simulate(psli_o, true);
    if (*sim_mse) return cmd_simulate(mse_o, false);
    if (*se) return cmd_se_table(se_o, se_np, se_ns, se_m, se_grid, se_tau, se_beta, se_rc, se_lc);
    if (*probe) return cmd_channel_probe(probe_o, probe_symbols);
    if (*cal) return cmd_calibrate(cal_o, c1s, c2s, target);
    if (*dump) return cmd_psli_dump(dump_o, dump_sf, dump_frame);
  } catch (const IoError& e) {
    std::cerr << "imftn: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "imftn: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "imftn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
