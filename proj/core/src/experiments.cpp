#include "plilab/experiments.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "plilab/csv.hpp"
#include "plilab/flow.hpp"
#include "plilab/highgain.hpp"
#include "plilab/pli.hpp"
#include "plilab/scalar_lqr.hpp"
#include "plilab/svg.hpp"

namespace plilab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Kind { Real, RealList, Str };

struct ParamSpec {
  const char* name;
  Kind kind;
  ParamValue default_value;
};

const std::vector<ParamSpec>& schema_for(Experiment e) {
  static const std::vector<ParamSpec> scalar_profile{
      {"a", Kind::Real, 1.0},    {"q", Kind::Real, 1.0},
      {"r", Kind::Real, 1.0},    {"kmin", Kind::Real, 1.05},
      {"kmax", Kind::Real, 8.0}, {"n", Kind::Real, 400.0},
  };
  static const std::vector<ParamSpec> flow{
      {"a", Kind::Real, 1.0},
      {"q", Kind::Real, 1.0},
      {"r", Kind::Real, 1.0},
      {"k0", Kind::Real, 19.72},
      {"max_time", Kind::Real, 60.0},
      {"record_every", Kind::Real, 0.01},
      {"gap_tol", Kind::Real, -1.0},
      {"grad_tol", Kind::Real, 1e-9},
  };
  static const std::vector<ParamSpec> high_gain{
      {"system", Kind::Str, std::string("double_integrator")},
      {"layout", Kind::Str, std::string("single_fast")},
      {"rho_min", Kind::Real, 10.0},
      {"rho_max", Kind::Real, 1e4},
      {"n_rho", Kind::Real, 12.0},
  };
  static const std::vector<ParamSpec> dt_sweep{
      {"a", Kind::Real, 1.0},
      {"q", Kind::Real, 1.0},
      {"r", Kind::Real, 1.0},
      {"hs", Kind::RealList,
       std::vector<double>{1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01}},
  };
  static const std::vector<ParamSpec> pli_diagnose{
      {"cost", Kind::Str, std::string("quadratic")},
      {"a", Kind::Real, 1.0},
      {"q", Kind::Real, 1.0},
      {"r", Kind::Real, 1.0},
      {"kmax", Kind::Real, 1000.0},
      {"n", Kind::Real, 500.0},
  };
  static const std::vector<ParamSpec> prox{
      {"f", Kind::Str, std::string("quadratic")},
      {"x0", Kind::Real, 5.0},
      {"max_time", Kind::Real, 40.0},
  };
  switch (e) {
    case Experiment::ScalarProfile: return scalar_profile;
    case Experiment::Flow: return flow;
    case Experiment::HighGain: return high_gain;
    case Experiment::DtSweep: return dt_sweep;
    case Experiment::PliDiagnose: return pli_diagnose;
    case Experiment::Prox: return prox;
  }
  return scalar_profile;
}

Experiment experiment_from_name(const std::string& raw) {
  std::string s;
  for (char c : raw) {
    if (c == '-' || c == '_') continue;
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "scalarprofile") return Experiment::ScalarProfile;
  if (s == "flow") return Experiment::Flow;
  if (s == "highgain") return Experiment::HighGain;
  if (s == "dtsweep") return Experiment::DtSweep;
  if (s == "plidiagnose") return Experiment::PliDiagnose;
  if (s == "prox") return Experiment::Prox;
  throw ConfigError("unknown experiment '" + raw +
                    "' (expected ScalarProfile, Flow, HighGain, DtSweep, "
                    "PliDiagnose or Prox)");
}

double parse_real(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("value '" + s + "' for key '" + key + "' is not a number");
  }
}

std::vector<double> parse_real_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_real(item, key));
  }
  if (out.empty()) {
    throw ConfigError("value for list key '" + key + "' is empty");
  }
  return out;
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed '" + s + "' is not an unsigned integer");
  }
}

const ParamSpec& find_spec(const std::vector<ParamSpec>& schema,
                           const std::string& key) {
  for (const auto& spec : schema) {
    if (key == spec.name) return spec;
  }
  throw ConfigError("unknown key '" + key + "'");
}

void apply_json_value(ExperimentConfig& cfg, const std::vector<ParamSpec>& schema,
                      const std::string& key, const json& v) {
  const ParamSpec& spec = find_spec(schema, key);
  switch (spec.kind) {
    case Kind::Real:
      if (!v.is_number()) {
        throw ConfigError("key '" + key + "' must be a number");
      }
      cfg.params[key] = v.get<double>();
      break;
    case Kind::RealList: {
      if (!v.is_array()) {
        throw ConfigError("key '" + key + "' must be an array of numbers");
      }
      std::vector<double> xs;
      for (const auto& e : v) {
        if (!e.is_number()) {
          throw ConfigError("key '" + key + "' must be an array of numbers");
        }
        xs.push_back(e.get<double>());
      }
      if (xs.empty()) throw ConfigError("key '" + key + "' is empty");
      cfg.params[key] = std::move(xs);
      break;
    }
    case Kind::Str:
      if (!v.is_string()) {
        throw ConfigError("key '" + key + "' must be a string");
      }
      cfg.params[key] = v.get<std::string>();
      break;
  }
}

double real_param(const ExperimentConfig& cfg, const std::string& key) {
  return std::get<double>(cfg.params.at(key));
}
const std::vector<double>& list_param(const ExperimentConfig& cfg,
                                      const std::string& key) {
  return std::get<std::vector<double>>(cfg.params.at(key));
}
const std::string& str_param(const ExperimentConfig& cfg, const std::string& key) {
  return std::get<std::string>(cfg.params.at(key));
}

int int_param(const ExperimentConfig& cfg, const std::string& key, int lo) {
  const double v = real_param(cfg, key);
  const int n = static_cast<int>(v);
  if (v != static_cast<double>(n) || n < lo) {
    throw ConfigError("key '" + key + "' must be an integer >= " +
                      std::to_string(lo));
  }
  return n;
}

json config_json(const ExperimentConfig& cfg) {
  json params = json::object();
  for (const auto& [key, value] : cfg.params) {
    std::visit([&](const auto& v) { params[key] = v; }, value);
  }
  return json{{"experiment", experiment_name(cfg.experiment)},
              {"params", params},
              {"seed", cfg.seed},
              {"out", cfg.out_dir}};
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f << content;
    if (!f.good()) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects experiment outputs; the manifest is emitted once at the end.
class OutputSet {
 public:
  explicit OutputSet(const ExperimentConfig& cfg) : cfg_(cfg) {
    fs::create_directories(cfg.out_dir);
    started_ = iso8601_utc_now();
    t0_ = std::chrono::steady_clock::now();
  }

  void add(const std::string& filename, const std::string& content) {
    write_file_atomic(fs::path(cfg_.out_dir) / filename, content);
    files_.push_back({filename, sha256_hex(content)});
  }

  std::vector<std::string> finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
            .count();
    json outputs = json::array();
    std::vector<std::string> names;
    for (const auto& [name, hash] : files_) {
      outputs.push_back({{"path", name}, {"sha256", hash}});
      names.push_back(name);
    }
    const json manifest{{"config", config_json(cfg_)},
                        {"outputs", outputs},
                        {"started", started_},
                        {"elapsed_s", elapsed},
                        {"versions",
                         {{"pli_lab", "0.1.0"},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}}}};
    write_file_atomic(fs::path(cfg_.out_dir) / "manifest.json",
                      manifest.dump(2) + "\n");
    names.push_back("manifest.json");
    return names;
  }

 private:
  const ExperimentConfig& cfg_;
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string render_svg(const svg::PlotSpec& spec,
                       const std::vector<svg::Series>& series) {
  std::ostringstream os;
  svg::write_plot(os, spec, series);
  return os.str();
}

lqr::LqrProblem scalar_problem(double a, double q, double r) {
  Mat A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
  A << a;
  B << 1.0;
  Q << q;
  R << r;
  return {A, B, Q, R};
}

void run_scalar_profile(const ExperimentConfig& cfg, OutputSet& out) {
  const scalar::ScalarCt sys(real_param(cfg, "a"), real_param(cfg, "q"),
                             real_param(cfg, "r"));
  const double kmin = real_param(cfg, "kmin");
  const double kmax = real_param(cfg, "kmax");
  const int n = int_param(cfg, "n", 2);
  if (!(kmin > sys.a) || !(kmax > kmin)) {
    throw ConfigError("need a < kmin < kmax");
  }

  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        kmin + (static_cast<double>(i) * (kmax - kmin)) / (n - 1);
  }
  const auto rows = scalar::rate_profile(sys, grid);

  std::ostringstream csv_out;
  csv::write_header(csv_out, {"k", "grad_sq", "m"});
  svg::Series s_grad{"grad_sq", {}}, s_m{"m", {}};
  for (const auto& row : rows) {
    csv::write_row(csv_out, {row.k, row.grad_sq, row.m});
    s_grad.points.emplace_back(row.k, row.grad_sq);
    s_m.points.emplace_back(row.k, row.m);
  }
  out.add("scalar_profile.csv", csv_out.str());

  svg::PlotSpec spec;
  spec.title = "scalar LQR: squared gradient and local rate";
  spec.xlabel = "k";
  spec.ylabel = "value";
  spec.log_y = true;
  out.add("scalar_profile.svg", render_svg(spec, {s_grad, s_m}));
}

void run_flow(const ExperimentConfig& cfg, OutputSet& out) {
  const lqr::LqrProblem prob = scalar_problem(
      real_param(cfg, "a"), real_param(cfg, "q"), real_param(cfg, "r"));
  Mat K0(1, 1);
  K0 << real_param(cfg, "k0");

  flow::FlowConfig fc;
  fc.max_time = real_param(cfg, "max_time");
  fc.record_every = real_param(cfg, "record_every");
  fc.gap_tol = real_param(cfg, "gap_tol");
  fc.grad_tol = real_param(cfg, "grad_tol");

  const flow::Trajectory traj =
      flow::integrate_gradient_flow(prob, lqr::Gain(prob, K0), fc);

  std::ostringstream csv_out;
  flow::write_trajectory_csv(traj, csv_out);
  out.add("flow.csv", csv_out.str());

  json cert_json;
  try {
    const pli::GlesCertificate cert = pli::certify_gles(traj);
    cert_json = json{{"t_split", cert.t_split},       {"slope_m", cert.slope_m},
                     {"rate_mu", cert.rate_mu},       {"max_violation", cert.max_violation},
                     {"sup_grad_sq", cert.sup_grad_sq}, {"valid", cert.valid}};
  } catch (const CertificationError& e) {
    cert_json = json{{"error", e.what()}};
  }
  out.add("flow_gles.json", cert_json.dump(2) + "\n");

  svg::Series gap{"gap", {}};
  for (const auto& s : traj.samples) gap.points.emplace_back(s.t, s.gap);
  svg::PlotSpec spec;
  spec.title = "gradient flow cost gap";
  spec.xlabel = "t";
  spec.ylabel = "gap";
  spec.log_y = true;
  out.add("flow.svg", render_svg(spec, {gap}));
}

void run_high_gain(const ExperimentConfig& cfg, OutputSet& out) {
  const std::string& system = str_param(cfg, "system");
  lqr::LqrProblem prob = [&]() -> lqr::LqrProblem {
    if (system == "scalar") return scalar_problem(1.0, 1.0, 1.0);
    Mat A(2, 2), B(2, 1);
    if (system == "double_integrator") {
      A << 0, 1, 0, 0;
    } else if (system == "oscillator") {
      A << 0, 1, -1, 0;
    } else {
      throw ConfigError("unknown system '" + system + "'");
    }
    B << 0, 1;
    return {A, B, Mat::Identity(2, 2), Mat::Identity(1, 1)};
  }();

  const std::string& layout_name = str_param(cfg, "layout");
  highgain::HighGainCurve::PoleLayout layout;
  if (layout_name == "single_fast") {
    layout = highgain::HighGainCurve::PoleLayout::SingleFast;
  } else if (layout_name == "all_fast") {
    layout = highgain::HighGainCurve::PoleLayout::AllFast;
  } else {
    throw ConfigError("unknown layout '" + layout_name + "'");
  }

  const double rho_min = real_param(cfg, "rho_min");
  const double rho_max = real_param(cfg, "rho_max");
  const int n_rho = int_param(cfg, "n_rho", 2);

  const highgain::HighGainCurve curve(prob, layout, rho_min, cfg.seed);
  const auto rows = highgain::curve_limit_study(
      curve, highgain::geometric_grid(rho_min, rho_max, n_rho));

  std::ostringstream csv_out;
  csv::write_header(csv_out, {"rho", "gap", "grad_fro", "ratio"});
  svg::Series s_gap{"gap", {}}, s_grad{"grad_fro", {}}, s_ratio{"ratio", {}};
  for (const auto& row : rows) {
    csv::write_row(csv_out, {row.rho, row.gap, row.grad_fro, row.ratio});
    s_gap.points.emplace_back(row.rho, row.gap);
    s_grad.points.emplace_back(row.rho, row.grad_fro);
    s_ratio.points.emplace_back(row.rho, row.ratio);
  }
  out.add("high_gain.csv", csv_out.str());

  svg::PlotSpec spec;
  spec.title = "high gain curve limit study (" + system + ")";
  spec.xlabel = "rho";
  spec.ylabel = "value";
  spec.log_x = true;
  spec.log_y = true;
  out.add("high_gain.svg", render_svg(spec, {s_gap, s_grad, s_ratio}));
}

void run_dt_sweep(const ExperimentConfig& cfg, OutputSet& out) {
  const scalar::ScalarCt sys(real_param(cfg, "a"), real_param(cfg, "q"),
                             real_param(cfg, "r"));
  const auto rows = scalar::dt_rate_sweep(sys, list_param(cfg, "hs"));

  std::ostringstream csv_out;
  csv::write_header(csv_out, {"h", "kd_min", "md_min"});
  svg::Series s_k{"kd_min", {}}, s_m{"md_min", {}};
  for (const auto& row : rows) {
    csv::write_row(csv_out, {row.h, row.kd_min, row.md_min});
    s_k.points.emplace_back(row.h, row.kd_min);
    s_m.points.emplace_back(row.h, row.md_min);
  }
  out.add("dt_sweep.csv", csv_out.str());

  svg::PlotSpec spec;
  spec.title = "discretization step vs best global rate";
  spec.xlabel = "h";
  spec.ylabel = "value";
  spec.log_x = true;
  spec.log_y = true;
  out.add("dt_sweep.svg", render_svg(spec, {s_k, s_m}));
}

void run_pli_diagnose(const ExperimentConfig& cfg, OutputSet& out) {
  const std::string& cost = str_param(cfg, "cost");

  std::vector<pli::GapGradSample> samples;
  if (cost == "scalar_lqr") {
    const scalar::ScalarCt sys(real_param(cfg, "a"), real_param(cfg, "q"),
                               real_param(cfg, "r"));
    const double ks = scalar::kstar(sys);
    const double kmax = real_param(cfg, "kmax");
    const int n = int_param(cfg, "n", 3);
    if (!(kmax > ks)) throw ConfigError("kmax must exceed the optimal gain");
    // gains right of the optimum, geometric in the offset
    const double lo = 1e-3, hi = kmax - ks;
    for (int i = 0; i < n; ++i) {
      const double off = lo * std::pow(hi / lo, i / double(n - 1));
      const scalar::CtForms f = scalar::ct_closed_forms(sys, ks + off);
      samples.push_back({f.p - f.pstar, std::abs(f.grad)});
    }
  } else {
    bool found = false;
    for (const auto& zoo : pli::zoo_examples()) {
      if (zoo.name == cost) {
        samples = pli::sample_zoo(zoo);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown cost '" + cost + "'");
  }

  const pli::PliReport report = pli::diagnose(samples);

  std::ostringstream csv_out;
  pli::write_report_csv(report, csv_out);
  out.add("pli_diagnose.csv", csv_out.str());
  out.add("pli_diagnose_report.json", pli::report_sidecar_json(report) + "\n");

  svg::Series mu{"mu_hat", {}};
  for (std::size_t i = 0; i < report.eps_grid.size(); ++i) {
    if (report.mu_hat[i]) mu.points.emplace_back(report.eps_grid[i], *report.mu_hat[i]);
  }
  svg::PlotSpec spec;
  spec.title = "empirical PLI constant per sublevel set (" + cost + ")";
  spec.xlabel = "eps";
  spec.ylabel = "mu_hat";
  spec.log_x = true;
  spec.log_y = true;
  out.add("pli_diagnose.svg", render_svg(spec, {mu}));
}

void run_prox(const ExperimentConfig& cfg, OutputSet& out) {
  const std::string& fname = str_param(cfg, "f");
  flow::ScalarFn f;
  double reg_min = 0.0;
  if (fname == "quadratic") {  // x^2/2 + |x| minimized at 0
    f.value = [](double x) { return 0.5 * x * x; };
    f.deriv = [](double x) { return x; };
    reg_min = 0.0;
  } else if (fname == "shifted3") {  // (x-3)^2/2 + |x| minimized at 2
    f.value = [](double x) { return 0.5 * (x - 3.0) * (x - 3.0); };
    f.deriv = [](double x) { return x - 3.0; };
    reg_min = 2.5;
  } else if (fname == "half") {  // (x-1/2)^2/2 + |x| minimized at 0
    f.value = [](double x) { return 0.5 * (x - 0.5) * (x - 0.5); };
    f.deriv = [](double x) { return x - 0.5; };
    reg_min = 0.125;
  } else {
    throw ConfigError("unknown prox cost '" + fname + "'");
  }

  flow::FlowConfig fc;
  fc.max_time = real_param(cfg, "max_time");
  const flow::Trajectory traj =
      flow::integrate_prox_flow_scalar(f, real_param(cfg, "x0"), fc, reg_min);

  std::ostringstream csv_out;
  flow::write_trajectory_csv(traj, csv_out);
  out.add("prox.csv", csv_out.str());

  svg::Series xs{"x", {}}, gap{"gap", {}};
  for (const auto& s : traj.samples) {
    xs.points.emplace_back(s.t, s.param(0));
    gap.points.emplace_back(s.t, s.gap);
  }
  svg::PlotSpec spec;
  spec.title = "proximal gradient flow (" + fname + ")";
  spec.xlabel = "t";
  spec.ylabel = "value";
  out.add("prox.svg", render_svg(spec, {xs, gap}));
}

std::string error_json_for(const char* type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}}.dump();
}

}  // namespace

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::ScalarProfile: return "scalar_profile";
    case Experiment::Flow: return "flow";
    case Experiment::HighGain: return "high_gain";
    case Experiment::DtSweep: return "dt_sweep";
    case Experiment::PliDiagnose: return "pli_diagnose";
    case Experiment::Prox: return "prox";
  }
  return "unknown";
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  for (const auto& spec : schema_for(e)) {
    cfg.params[spec.name] = spec.default_value;
  }
  return cfg;
}

ExperimentConfig parse_args(const std::vector<std::string>& args) {
  if (args.empty()) {
    throw ConfigError("usage: pli-lab <experiment> [--config file.json] "
                      "[--key value ...] [--out dir]");
  }

  std::string positional;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> flags;
  std::size_t i = 0;
  if (args[0].rfind("--", 0) != 0) {
    positional = args[0];
    i = 1;
  }
  for (; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      throw ConfigError("unexpected positional argument '" + a + "'");
    }
    if (i + 1 >= args.size()) {
      throw ConfigError("flag '" + a + "' is missing its value");
    }
    const std::string key = a.substr(2);
    const std::string& value = args[++i];
    if (key == "config") {
      config_path = value;
    } else {
      flags.emplace_back(key, value);
    }
  }

  json file = json::object();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
    try {
      f >> file;
    } catch (const json::exception& e) {
      throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
  }

  std::string experiment_str = positional;
  if (experiment_str.empty() && file.contains("experiment")) {
    if (!file["experiment"].is_string()) {
      throw ConfigError("config 'experiment' must be a string");
    }
    experiment_str = file["experiment"].get<std::string>();
  }
  if (experiment_str.empty()) {
    throw ConfigError("no experiment given (positional or config file)");
  }

  ExperimentConfig cfg = default_config(experiment_from_name(experiment_str));
  const auto& schema = schema_for(cfg.experiment);

  // lowest precedence: environment seed
  if (const char* env = std::getenv("PLI_LAB_SEED")) {
    cfg.seed = parse_seed(env);
  }

  for (const auto& [key, value] : file.items()) {
    if (key == "experiment") continue;
    if (key == "seed") {
      if (value.is_number_unsigned()) {
        cfg.seed = value.get<std::uint64_t>();
      } else if (value.is_string()) {
        cfg.seed = parse_seed(value.get<std::string>());
      } else {
        throw ConfigError("config 'seed' must be an unsigned integer");
      }
      continue;
    }
    if (key == "out") {
      if (!value.is_string()) throw ConfigError("config 'out' must be a string");
      cfg.out_dir = value.get<std::string>();
      continue;
    }
    apply_json_value(cfg, schema, key, value);
  }

  for (const auto& [key, value] : flags) {
    if (key == "seed") {
      cfg.seed = parse_seed(value);
      continue;
    }
    if (key == "out") {
      cfg.out_dir = value;
      continue;
    }
    const ParamSpec& spec = find_spec(schema, key);
    switch (spec.kind) {
      case Kind::Real:
        cfg.params[key] = parse_real(value, key);
        break;
      case Kind::RealList:
        cfg.params[key] = parse_real_list(value, key);
        break;
      case Kind::Str:
        cfg.params[key] = value;
        break;
    }
  }
  return cfg;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  try {
    OutputSet out(cfg);
    switch (cfg.experiment) {
      case Experiment::ScalarProfile: run_scalar_profile(cfg, out); break;
      case Experiment::Flow: run_flow(cfg, out); break;
      case Experiment::HighGain: run_high_gain(cfg, out); break;
      case Experiment::DtSweep: run_dt_sweep(cfg, out); break;
      case Experiment::PliDiagnose: run_pli_diagnose(cfg, out); break;
      case Experiment::Prox: run_prox(cfg, out); break;
    }
    result.outputs = out.finish();
    result.exit_code = 0;
  } catch (const ConfigError& e) {
    result.exit_code = 2;
    result.error_json = error_json_for("config", e.what());
  } catch (const StabilityError& e) {
    result.exit_code = 3;
    result.error_json = error_json_for("stability", e.what());
  } catch (const Error& e) {
    result.exit_code = 3;
    result.error_json = error_json_for("numerical", e.what());
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.error_json = error_json_for("internal", e.what());
  }
  return result;
}

int main_entry(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const ConfigError& e) {
    std::cerr << error_json_for("config", e.what()) << "\n";
    return 2;
  }
  const RunResult result = run(cfg);
  if (result.exit_code != 0) {
    std::cerr << result.error_json << "\n";
  }
  return result.exit_code;
}

}  // namespace plilab::cli
