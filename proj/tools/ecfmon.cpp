// ecfmon: sequential and retrospective stationarity monitoring for univariate
// time series, based on L2 distances between empirical characteristic
// functions of delay-embedded segments. Thresholds come from a stationary
// bootstrap on the training sample or from simulated asymptotics.
//
// Exit codes: 0 no break found, 2 break found, 1 usage or runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecfmon/asymptotic.hpp"
#include "ecfmon/bootstrap.hpp"
#include "ecfmon/detector.hpp"
#include "ecfmon/io.hpp"
#include "ecfmon/parallel.hpp"
#include "ecfmon/simulation.hpp"

namespace {

using nlohmann::ordered_json;

struct Options {
  std::string input;
  std::string output;
  std::size_t m = 1;
  double a = 1.0;
  double gamma = 0.0;
  double L = 1.0;
  double alpha = 0.05;
  std::size_t B = 1000;
  std::string p_B = "auto";
  std::uint64_t seed = 1;
  std::string variant = "cumulative";
  std::string kernel = "gaussian";
  std::string route = "bootstrap";
  std::size_t train_len = 0;
  std::string train_end_date;
  std::size_t threads = 0;
  std::string format = "table";
  double eta = -1.0;

  // simulate grids
  std::vector<std::string> dgps{"S1"};
  std::vector<std::size_t> grid_T{100};
  std::vector<std::size_t> grid_m{1};
  std::vector<double> grid_a{1.0};
  std::vector<double> grid_L{1.0};
  std::size_t reps = 1000;
  std::size_t burn_in = 500;

  // pvalue
  double observed = 0.0;
  std::string maxima_file;
};

ecfmon::StatVariant parse_variant(const std::string& v) {
  if (v == "cumulative") return ecfmon::StatVariant::Cumulative;
  if (v == "postbreak") return ecfmon::StatVariant::PostBreak;
  if (v == "negenergy") return ecfmon::StatVariant::NegEnergy;
  throw std::invalid_argument("unknown variant: " + v);
}

ecfmon::KernelFamily parse_kernel(const std::string& k) {
  if (k == "gaussian") return ecfmon::KernelFamily::Gaussian;
  if (k == "energy") return ecfmon::KernelFamily::Energy;
  throw std::invalid_argument("unknown kernel family: " + k);
}

double parse_p_B(const std::string& s) {
  if (s == "auto") return 0.0;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() || !(v > 0.0 && v <= 1.0)) {
    throw std::invalid_argument("--p-B expects 'auto' or a value in (0, 1]");
  }
  return v;
}

std::size_t effective_threads(std::size_t requested) {
  return requested == 0 ? ecfmon::default_threads() : requested;
}

ecfmon::MonitorConfig make_monitor_config(const Options& o) {
  ecfmon::MonitorConfig cfg;
  cfg.kernel.family = parse_kernel(o.kernel);
  cfg.kernel.a = o.a;
  cfg.kernel.m = o.m;
  cfg.variant = parse_variant(o.variant);
  cfg.gamma = o.gamma;
  cfg.L = o.L;
  cfg.alpha = o.alpha;
  cfg.validate();
  return cfg;
}

// Everything that determines the numbers goes into the echo; thread count and
// output destination do not.
ordered_json config_echo(const Options& o, const std::string& command,
                         std::size_t rows, std::size_t train_len) {
  ordered_json j;
  j["command"] = command;
  j["input"] = o.input;
  j["rows"] = rows;
  j["train_len"] = train_len;
  j["m"] = o.m;
  j["a"] = o.a;
  j["kernel"] = o.kernel;
  j["variant"] = o.variant;
  j["gamma"] = o.gamma;
  j["L"] = o.L;
  j["alpha"] = o.alpha;
  j["B"] = o.B;
  j["p_B"] = o.p_B;
  j["route"] = o.route;
  j["seed"] = o.seed;
  j["format"] = o.format;
  return j;
}

std::size_t resolve_train_len(const Options& o, const ecfmon::CsvData& data) {
  if (o.train_len > 0 && !o.train_end_date.empty()) {
    throw std::runtime_error(
        "give either --train-len or --train-end-date, not both");
  }
  if (!o.train_end_date.empty()) {
    return ecfmon::train_len_for_date(data, o.train_end_date);
  }
  if (o.train_len == 0) {
    throw std::runtime_error(
        "monitoring needs --train-len or --train-end-date");
  }
  if (o.train_len > data.values.size()) {
    throw std::runtime_error("--train-len exceeds the number of rows");
  }
  return o.train_len;
}

class OutputStream {
 public:
  explicit OutputStream(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_monitor(const Options& o) {
  const ecfmon::CsvData data = ecfmon::ingest_csv_file(o.input);
  const std::size_t train_len = resolve_train_len(o, data);
  const ecfmon::MonitorConfig cfg = make_monitor_config(o);
  if (cfg.kernel.m > train_len) {
    throw std::runtime_error("embedding dimension exceeds the training length");
  }
  const std::span<const double> training(data.values.data(), train_len);
  const std::span<const double> stream(data.values.data() + train_len,
                                       data.values.size() - train_len);

  ecfmon::MonitorReport report;
  report.seed = o.seed;
  report.config = config_echo(o, "monitor", data.values.size(), train_len);

  double c_alpha = 0.0;
  std::vector<double> maxima;
  if (o.route == "bootstrap") {
    ecfmon::BootstrapConfig boot;
    boot.B = o.B;
    boot.p_B = parse_p_B(o.p_B);
    boot.seed = o.seed;
    boot.threads = effective_threads(o.threads);
    ecfmon::CalibrationResult cal = ecfmon::calibrate(training, cfg, boot);
    c_alpha = cal.c_hat;
    maxima = std::move(cal.maxima);
    report.p_B = cal.p_B_used;
  } else if (o.route == "asymptotic") {
    ecfmon::AsymptoticConfig asym;
    asym.seed = o.seed;
    asym.eta = o.eta;
    asym.threads = effective_threads(o.threads);
    c_alpha = ecfmon::asymptotic_critical_value(training, cfg, asym);
  } else {
    throw std::runtime_error("unknown route: " + o.route);
  }

  ecfmon::EcfAccumulator acc(training, cfg.kernel);
  const ecfmon::StoppingResult stop = ecfmon::run_monitor(
      acc, stream, cfg, c_alpha, {maxima.data(), maxima.size()});
  report.stopping = stop;

  OutputStream out(o.output);
  if (o.format == "jsonl") {
    ecfmon::write_monitor_jsonl(out.get(), report);
  } else {
    ecfmon::write_monitor_table(out.get(), report);
  }
  return stop.detected() ? 2 : 0;
}

int cmd_retro(const Options& o) {
  const ecfmon::CsvData data = ecfmon::ingest_csv_file(o.input);
  ecfmon::KernelSpec kernel;
  kernel.family = parse_kernel(o.kernel);
  kernel.a = o.a;
  kernel.m = o.m;
  kernel.validate();

  const std::span<const double> x(data.values.data(), data.values.size());
  const ecfmon::RetroResult scan = ecfmon::retrospective_scan(x, kernel);

  double p_B = parse_p_B(o.p_B);
  bool degenerate = false;
  if (p_B == 0.0) {
    const ecfmon::BlockSelection sel = ecfmon::select_p_B(x);
    p_B = sel.p_B;
    degenerate = sel.degenerate;
  }
  (void)degenerate;

  std::vector<double> maxima(o.B, 0.0);
  ecfmon::parallel_for(o.B, effective_threads(o.threads), [&](std::size_t b) {
    ecfmon::Rng rng(ecfmon::subseed(o.seed, b));
    const std::vector<double> pseudo =
        ecfmon::stationary_bootstrap_sample(x, x.size(), p_B, rng);
    maxima[b] = ecfmon::retrospective_scan(pseudo, kernel).max_stat;
  });
  std::sort(maxima.begin(), maxima.end());
  const std::size_t idx = ecfmon::floor_order_index(o.B, 1.0 - o.alpha);
  const double c_alpha = maxima[idx - 1];
  const double p =
      ecfmon::p_value({maxima.data(), maxima.size()}, scan.max_stat);
  const bool found = scan.max_stat > c_alpha;

  OutputStream out(o.output);
  std::ostream& os = out.get();
  if (o.format == "jsonl") {
    for (const auto& [t, stat] : scan.trajectory) {
      ordered_json line;
      line["t"] = t;
      line["stat"] = stat;
      os << line.dump() << "\n";
    }
    ordered_json summary;
    summary["split"] = scan.split;
    summary["max_stat"] = scan.max_stat;
    summary["p_value"] = p;
    summary["c_alpha"] = c_alpha;
    summary["p_B"] = p_B;
    summary["seed"] = o.seed;
    summary["config"] = config_echo(o, "retro", data.values.size(), 0);
    os << summary.dump() << "\n";
  } else {
    char buf[128];
    os << "split candidates: " << scan.trajectory.size() << "\n";
    std::snprintf(buf, sizeof(buf), "max_stat: %.10g at t = %zu\n",
                  scan.max_stat, scan.split);
    os << buf;
    std::snprintf(buf, sizeof(buf), "c_alpha: %.10g\np_value: %.6g\n",
                  c_alpha, p);
    os << buf;
    std::snprintf(buf, sizeof(buf), "p_B: %.10g\n", p_B);
    os << buf;
    os << "seed: " << o.seed << "\n";
    os << (found ? "break detected" : "no break detected") << "\n";
  }
  return found ? 2 : 0;
}

int cmd_calibrate(const Options& o) {
  const ecfmon::CsvData data = ecfmon::ingest_csv_file(o.input);
  std::size_t train_len = data.values.size();
  if (o.train_len > 0 || !o.train_end_date.empty()) {
    train_len = resolve_train_len(o, data);
  }
  const ecfmon::MonitorConfig cfg = make_monitor_config(o);

  ecfmon::BootstrapConfig boot;
  boot.B = o.B;
  boot.p_B = parse_p_B(o.p_B);
  boot.seed = o.seed;
  boot.threads = effective_threads(o.threads);
  const ecfmon::CalibrationResult cal =
      ecfmon::calibrate({data.values.data(), train_len}, cfg, boot);

  OutputStream out(o.output);
  std::ostream& os = out.get();
  if (o.format == "jsonl") {
    for (std::size_t b = 0; b < cal.maxima.size(); ++b) {
      ordered_json line;
      line["b"] = b + 1;
      line["max"] = cal.maxima[b];
      os << line.dump() << "\n";
    }
    ordered_json summary;
    summary["c_alpha"] = cal.c_hat;
    summary["p_B"] = cal.p_B_used;
    summary["seed"] = cal.seed;
    summary["config"] = config_echo(o, "calibrate", data.values.size(),
                                    train_len);
    os << summary.dump() << "\n";
  } else {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "c_alpha: %.10g\np_B: %.10g\n", cal.c_hat,
                  cal.p_B_used);
    os << buf;
    os << "replicates: " << cal.maxima.size() << "\n";
    os << "seed: " << cal.seed << "\n";
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  const ecfmon::StatVariant variant = parse_variant(o.variant);
  const ecfmon::KernelFamily family = parse_kernel(o.kernel);

  OutputStream out(o.output);
  std::ostream& os = out.get();
  const std::size_t threads = effective_threads(o.threads);

  if (o.format != "jsonl") {
    os << "dgp      T    L      m    a        gamma  reps   rate     c_star\n";
  }
  for (const std::string& dgp_s : o.dgps) {
    const ecfmon::Dgp dgp = ecfmon::dgp_from_string(dgp_s);
    for (const std::size_t T : o.grid_T) {
      for (const double L : o.grid_L) {
        for (const std::size_t m : o.grid_m) {
          for (const double a : o.grid_a) {
            ecfmon::DgpSpec spec;
            spec.name = dgp;
            spec.T = T;
            spec.L = L;
            spec.burn_in = o.burn_in;

            ecfmon::MonitorConfig cfg;
            cfg.kernel.family = family;
            cfg.kernel.a = a;
            cfg.kernel.m = m;
            cfg.variant = variant;
            cfg.gamma = o.gamma;
            cfg.L = L;
            cfg.alpha = o.alpha;

            const ecfmon::WarpSpeedResult res =
                ecfmon::warp_speed_mc(spec, cfg, o.reps, o.seed, threads);

            if (o.format == "jsonl") {
              ordered_json row;
              row["dgp"] = dgp_s;
              row["T"] = T;
              row["L"] = L;
              row["m"] = m;
              row["a"] = a;
              row["gamma"] = o.gamma;
              row["variant"] = o.variant;
              row["kernel"] = o.kernel;
              row["reps"] = o.reps;
              row["rate"] = res.rate;
              row["c_star"] = res.c_star;
              row["seed"] = o.seed;
              os << row.dump() << "\n";
            } else {
              char buf[160];
              std::snprintf(buf, sizeof(buf),
                            "%-6s %5zu %5.2f %4zu %8.3f %6.2f %6zu %8.4f %10.5g\n",
                            dgp_s.c_str(), T, L, m, a, o.gamma, o.reps,
                            res.rate, res.c_star);
              os << buf;
            }
          }
        }
      }
    }
  }
  return 0;
}

int cmd_pvalue(const Options& o) {
  std::ifstream in(o.maxima_file);
  if (!in) {
    throw std::runtime_error("cannot open maxima file: " + o.maxima_file);
  }
  std::vector<double> maxima;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error("maxima file is not json-lines");
    }
    if (j.contains("max")) maxima.push_back(j["max"].get<double>());
  }
  if (maxima.empty()) {
    throw std::runtime_error("maxima file holds no replicate records");
  }
  const double p = ecfmon::p_value({maxima.data(), maxima.size()}, o.observed);

  OutputStream out(o.output);
  if (o.format == "jsonl") {
    ordered_json j;
    j["observed"] = o.observed;
    j["B"] = maxima.size();
    j["p_value"] = p;
    out.get() << j.dump() << "\n";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "p_value: %.6g\n", p);
    out.get() << buf;
  }
  return 0;
}

void add_stat_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--m", o.m, "delay-embedding dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--a", o.a, "kernel parameter (gaussian bandwidth or energy exponent)");
  cmd->add_option("--gamma", o.gamma,
                  "boundary exponent in [0, 0.5); choose close to 0.5 when "
                  "early violations are expected");
  cmd->add_option("--L", o.L, "monitoring horizon multiplier");
  cmd->add_option("--alpha", o.alpha, "significance level");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--variant", o.variant, "statistic variant")
      ->check(CLI::IsMember({"cumulative", "postbreak", "negenergy"}));
  cmd->add_option("--kernel", o.kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian", "energy"}));
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"table", "jsonl"}));
  cmd->add_option("--output", o.output, "write the report to a file");
}

void add_bootstrap_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--B", o.B, "bootstrap replicates");
  cmd->add_option("--p-B", o.p_B,
                  "block probability: 'auto' or a value in (0, 1]");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{
      "stationarity monitoring via empirical characteristic functions"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "key=value configuration file; keys live in a section "
                 "named after the subcommand");

  CLI::App* monitor =
      app.add_subcommand("monitor", "sequential monitoring of a CSV series");
  add_stat_options(monitor, o);
  add_bootstrap_options(monitor, o);
  monitor->add_option("--input", o.input, "CSV with a 'value' column")
      ->required();
  monitor->add_option("--train-len", o.train_len,
                      "training sample length (leading rows)");
  monitor->add_option("--train-end-date", o.train_end_date,
                      "last training date (needs a 'date' column)");
  monitor->add_option("--route", o.route, "threshold route")
      ->check(CLI::IsMember({"bootstrap", "asymptotic"}));
  monitor->add_option("--eta", o.eta,
                      "lower trimming of the limit functional (asymptotic "
                      "route, required > 0 when gamma > 0)");

  CLI::App* retro = app.add_subcommand(
      "retro", "retrospective break scan over a whole CSV series");
  add_stat_options(retro, o);
  add_bootstrap_options(retro, o);
  retro->add_option("--input", o.input, "CSV with a 'value' column")
      ->required();

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "bootstrap threshold for a training sample");
  add_stat_options(calibrate, o);
  add_bootstrap_options(calibrate, o);
  calibrate->add_option("--input", o.input, "CSV with a 'value' column")
      ->required();
  calibrate->add_option("--train-len", o.train_len,
                        "training length (default: all rows)");
  calibrate->add_option("--train-end-date", o.train_end_date,
                        "last training date (needs a 'date' column)");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "size and power experiments on built-in processes");
  simulate->add_option("--dgp", o.dgps, "process names (S1..S7, P1..P5)")
      ->delimiter(',');
  simulate->add_option("--T", o.grid_T, "training lengths")->delimiter(',');
  simulate->add_option("--m", o.grid_m, "embedding dimensions")
      ->delimiter(',');
  simulate->add_option("--a", o.grid_a, "kernel parameters")->delimiter(',');
  simulate->add_option("--L", o.grid_L, "horizon multipliers")->delimiter(',');
  simulate->add_option("--gamma", o.gamma,
                       "boundary exponent in [0, 0.5); choose close to 0.5 "
                       "when early violations are expected");
  simulate->add_option("--alpha", o.alpha, "significance level");
  simulate->add_option("--seed", o.seed, "master seed");
  simulate->add_option("--variant", o.variant, "statistic variant")
      ->check(CLI::IsMember({"cumulative", "postbreak", "negenergy"}));
  simulate->add_option("--kernel", o.kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian", "energy"}));
  simulate->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  simulate->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"table", "jsonl"}));
  simulate->add_option("--output", o.output, "write the report to a file");
  simulate->add_option("--reps", o.reps, "Monte Carlo repetitions");
  simulate->add_option("--burn-in", o.burn_in,
                       "spin-up samples for recursive processes (0 = none)");

  CLI::App* pvalue = app.add_subcommand(
      "pvalue", "p-value of an observed maximum against stored maxima");
  pvalue->add_option("--observed", o.observed, "observed maximum statistic")
      ->required();
  pvalue->add_option("--maxima", o.maxima_file,
                     "json-lines output of the calibrate command")
      ->required();
  pvalue->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"table", "jsonl"}));
  pvalue->add_option("--output", o.output, "write the report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (monitor->parsed()) return cmd_monitor(o);
    if (retro->parsed()) return cmd_retro(o);
    if (calibrate->parsed()) return cmd_calibrate(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (pvalue->parsed()) return cmd_pvalue(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
