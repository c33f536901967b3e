// Command-line front end: configure runs, simulate drivers and
// convolutions, run the estimator suites, decompositions, transform
// decompositions, kernel audits and the counterexample tables, and bundle
// run directories into a single report.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdp/io.hpp"
#include "wdp/wdp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wdp;

namespace {

constexpr const char* kToolVersion = "wdp 0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::vector<std::string>& required, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + context);
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw ConfigError(context + " is missing required key '" + key + "'");
  }
}

struct RunConfig {
  DriverSpec driver;
  std::string driver_desc;
  std::vector<std::pair<std::string, double>> driver_params;
  std::optional<KernelSpec> kernel;
  std::string kernel_desc;
  std::vector<std::pair<std::string, double>> kernel_params;
  std::shared_ptr<const SamplePath> beta;  // frozen trajectory, when present
  std::vector<int> levels;
  std::size_t n_paths = 1000;
  std::vector<double> probes{1.0};
  std::optional<TransformSpec> transform;
  fs::path output_dir = "out";
  double quad_tol = 1e-8;
  double se_mult = 3.0;
  // preqv settings
  SawtoothVariant preqv_variant = SawtoothVariant::Sqrt;
  std::vector<int> preqv_pi_n{1, 2, 3, 4, 5, 6};
  int preqv_depth_cap = 20;
};

std::function<double(double)> named_function(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "identity") return [](double s) { return s; };
  throw ConfigError("unknown function name '" + name + "' (available: one, identity)");
}

std::function<double(double, double)> named_function2(const std::string& name) {
  if (name == "one") return [](double, double) { return 1.0; };
  if (name == "u_times_s") return [](double u, double s) { return u * s; };
  throw ConfigError("unknown two-argument function '" + name +
                    "' (available: one, u_times_s)");
}

TransformSpec named_transform(const std::string& name, const json& params) {
  TransformSpec tf;
  tf.name = name;
  if (name == "square") {
    require_keys(params, {}, {}, "transform.params");
    tf.F = [](double x) { return x * x; };
    tf.f = [](double x) { return 2.0 * x; };
    tf.fprime = [](double) { return 2.0; };
    tf.smoothness = Smoothness::C2;
    return tf;
  }
  if (name == "sin") {
    require_keys(params, {}, {}, "transform.params");
    tf.F = [](double x) { return std::sin(x); };
    tf.f = [](double x) { return std::cos(x); };
    tf.fprime = [](double x) { return -std::sin(x); };
    tf.smoothness = Smoothness::C2;
    return tf;
  }
  if (name == "linear") {
    require_keys(params, {"a", "b"}, {"a"}, "transform.params");
    const double a = params.at("a").get<double>();
    const double b = params.value("b", 0.0);
    tf.F = [a, b](double x) { return a * x + b; };
    tf.f = [a](double) { return a; };
    tf.fprime = [](double) { return 0.0; };
    tf.smoothness = Smoothness::C2;
    return tf;
  }
  if (name == "smooth_abs") {
    require_keys(params, {"eps"}, {"eps"}, "transform.params");
    const double eps = params.at("eps").get<double>();
    if (!(eps > 0.0)) throw ConfigError("smooth_abs needs eps > 0");
    tf.F = [eps](double x) { return std::sqrt(x * x + eps * eps); };
    tf.f = [eps](double x) { return x / std::sqrt(x * x + eps * eps); };
    tf.smoothness = Smoothness::C1;
    return tf;
  }
  throw ConfigError("unknown transform '" + name +
                    "' (available: square, sin, linear, smooth_abs)");
}

RunConfig parse_config(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("config file not found: " + file.string());
  json j;
  try {
    j = json::parse(io::read_text(file));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j,
               {"driver", "kernel", "levels", "n_paths", "probes", "transform", "output_dir",
                "tolerances", "preqv"},
               {"driver", "levels"}, "config");
  RunConfig cfg;

  const json& d = j.at("driver");
  require_keys(d, {"kind", "lambda", "seed", "beta_seed", "beta_resolution"}, {"kind", "seed"},
               "driver");
  const std::string dkind = d.at("kind").get<std::string>();
  const auto seed = d.at("seed").get<std::uint64_t>();
  if (dkind == "brownian") {
    cfg.driver = DriverSpec::brownian(seed);
  } else if (dkind == "compensated_poisson") {
    cfg.driver = DriverSpec::compensated_poisson(d.value("lambda", 1.0), seed);
    cfg.driver_params.emplace_back("lambda", cfg.driver.lambda);
  } else if (dkind == "frozen") {
    require_keys(d, {"kind", "lambda", "seed", "beta_seed", "beta_resolution"},
                 {"beta_seed", "beta_resolution"}, "driver");
    auto path = std::make_shared<SamplePath>(
        frozen_beta(d.at("beta_seed").get<std::uint64_t>(), d.at("beta_resolution").get<int>()));
    cfg.driver = DriverSpec::frozen_trajectory(path);
    cfg.driver.seed = seed;
  } else {
    throw ConfigError("unknown driver kind '" + dkind +
                      "' (available: brownian, compensated_poisson, frozen)");
  }
  cfg.driver_desc = dkind;

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    require_keys(t, {"quadrature", "verdict_se_multiplier"}, {}, "tolerances");
    cfg.quad_tol = t.value("quadrature", 1e-8);
    cfg.se_mult = t.value("verdict_se_multiplier", 3.0);
  }

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    require_keys(k,
                 {"kind", "H", "c", "f", "beta_seed", "beta_resolution", "path", "constant"},
                 {"kind"}, "kernel");
    const std::string kkind = k.at("kind").get<std::string>();
    auto load_beta = [&]() {
      require_keys(k, {"kind", "H", "c", "f", "beta_seed", "beta_resolution", "path", "constant"},
                   {"beta_seed", "beta_resolution"}, "kernel");
      cfg.beta = std::make_shared<SamplePath>(
          frozen_beta(k.at("beta_seed").get<std::uint64_t>(), k.at("beta_resolution").get<int>()));
    };
    if (kkind == "fractional") {
      cfg.kernel = FractionalKernel(k.value("H", 0.75), k.value("c", 1.0), cfg.quad_tol);
      cfg.kernel_params.emplace_back("H", k.value("H", 0.75));
      cfg.kernel_params.emplace_back("c", k.value("c", 1.0));
    } else if (kkind == "product_beta_f") {
      load_beta();
      cfg.kernel = ProductBetaFKernel{cfg.beta, named_function(k.value("f", "one")),
                                      k.value("f", "one")};
      cfg.kernel_params.emplace_back("beta_seed", k.at("beta_seed").get<double>());
      cfg.kernel_params.emplace_back("beta_resolution", k.at("beta_resolution").get<double>());
    } else if (kkind == "volterra_beta") {
      load_beta();
      cfg.kernel = VolterraBetaKernel{named_function2(k.value("f", "one")), cfg.beta,
                                      k.value("f", "one")};
      cfg.kernel_params.emplace_back("beta_seed", k.at("beta_seed").get<double>());
      cfg.kernel_params.emplace_back("beta_resolution", k.at("beta_resolution").get<double>());
    } else if (kkind == "tabulated") {
      if (k.contains("constant")) {
        std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
        cfg.kernel = TabulatedKernel::constant(k.at("constant").get<double>(), grid, grid);
        cfg.kernel_params.emplace_back("constant", k.at("constant").get<double>());
      } else if (k.contains("path")) {
        cfg.kernel = io::read_tabulated_kernel_csv(k.at("path").get<std::string>());
      } else {
        throw ConfigError("tabulated kernel needs 'path' or 'constant'");
      }
    } else {
      throw ConfigError("unknown kernel kind '" + kkind +
                        "' (available: fractional, product_beta_f, volterra_beta, tabulated)");
    }
    cfg.kernel_desc = kkind;
  }

  cfg.levels = j.at("levels").get<std::vector<int>>();
  if (cfg.levels.empty()) throw ConfigError("levels must not be empty");
  for (std::size_t i = 1; i < cfg.levels.size(); ++i)
    if (cfg.levels[i] <= cfg.levels[i - 1]) throw ConfigError("levels must be increasing");
  cfg.n_paths = j.value("n_paths", std::size_t{1000});
  if (j.contains("probes")) cfg.probes = j.at("probes").get<std::vector<double>>();
  if (j.contains("transform")) {
    const json& t = j.at("transform");
    require_keys(t, {"name", "params"}, {"name"}, "transform");
    cfg.transform = named_transform(t.at("name").get<std::string>(), t.value("params", json::object()));
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (const char* env = std::getenv("WDP_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (j.contains("preqv")) {
    const json& p = j.at("preqv");
    require_keys(p, {"variant", "pi_n", "depth_cap"}, {}, "preqv");
    const std::string variant = p.value("variant", "sqrt");
    if (variant == "sqrt") cfg.preqv_variant = SawtoothVariant::Sqrt;
    else if (variant == "linear") cfg.preqv_variant = SawtoothVariant::Linear;
    else throw ConfigError("preqv.variant must be sqrt or linear");
    if (p.contains("pi_n")) cfg.preqv_pi_n = p.at("pi_n").get<std::vector<int>>();
    cfg.preqv_depth_cap = p.value("depth_cap", 20);
  }
  return cfg;
}

RunManifest make_manifest(const RunConfig& cfg) {
  RunManifest m;
  m.master_seed = cfg.driver.seed;
  m.driver = cfg.driver_desc;
  m.kernel = cfg.kernel ? cfg.kernel_desc : "none";
  m.driver_params = cfg.driver_params;
  m.kernel_params = cfg.kernel_params;
  m.levels = cfg.levels;
  m.n_paths = cfg.n_paths;
  m.tool_version = kToolVersion;
  if (cfg.beta) m.frozen_fingerprints.emplace_back("beta", fingerprint(cfg.beta->values()));
  if (cfg.driver.frozen)
    m.frozen_fingerprints.emplace_back("driver", fingerprint(cfg.driver.frozen->values()));
  return m;
}

SubdivisionSequence levels_of(const RunConfig& cfg) {
  std::vector<std::pair<int, SubdivisionPtr>> lv;
  for (int n : cfg.levels)
    lv.emplace_back(n, std::make_shared<Subdivision>(Subdivision::dyadic(1.0, n)));
  return SubdivisionSequence(std::move(lv), true);
}

SubdivisionPtr deepest_grid(const RunConfig& cfg) {
  return std::make_shared<Subdivision>(Subdivision::dyadic(1.0, cfg.levels.back()));
}

DriverSpec seeded(const RunConfig& cfg, std::uint64_t index) {
  DriverSpec s = cfg.driver;
  s.seed = derive_path_seed(cfg.driver.seed, index);
  return s;
}

void prepare_output(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  io::write_manifest(make_manifest(cfg), cfg.output_dir / "manifest.json");
}

// --- subcommands -----------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  prepare_output(cfg);
  auto grid = deepest_grid(cfg);
  const SamplePath L = simulate_driver(seeded(cfg, 0), grid);
  io::write_path_csv(L, cfg.output_dir / "driver.csv");
  io::write_jump_ledger_json(L, cfg.output_dir / "driver_jumps.json");
  if (cfg.kernel) {
    const SamplePath X = sample_convolution(*cfg.kernel, L, grid);
    io::write_path_csv(X, cfg.output_dir / "convolution.csv");
    io::write_jump_ledger_json(X, cfg.output_dir / "convolution_jumps.json");
  }
  io::write_subdivision_csv(*grid, cfg.output_dir / "grid.csv");
  std::cout << "wrote " << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::string& which) {
  prepare_output(cfg);
  const auto seq = levels_of(cfg);
  auto grid = deepest_grid(cfg);
  std::vector<io::ReportRow> rows;
  json summary;
  summary["which"] = which;

  if (which == "preqv") {
    const Sawtooth saw(cfg.preqv_variant);
    for (int n : cfg.preqv_pi_n) {
      const Subdivision pi = pathological_pi(n, cfg.preqv_depth_cap);
      for (double t : cfg.probes) rows.push_back({n, t, pre_qv(saw, pi, t), 0.0});
    }
  } else if (which == "energy") {
    const auto rep = energy_estimate(
        [&](std::uint64_t i) { return simulate_driver(seeded(cfg, i), grid); }, seq, cfg.n_paths);
    for (const auto& r : rep.per_level) rows.push_back({r.level, 1.0, r.mean, r.se});
    summary["running_sup"] = rep.running_sup;
  } else if (which == "qv" || which == "cov") {
    std::optional<KernelWeights> kw;
    if (cfg.kernel) kw = build_kernel_weights(*cfg.kernel, grid);
    std::vector<std::string> names;
    for (const auto& [n, sub] : seq.levels())
      for (double t : cfg.probes)
        names.push_back("S^" + std::to_string(n) + "_" + io::fmt(t));
    EnsembleConfig ecfg{cfg.driver.seed, cfg.n_paths, 0};
    const auto stats = run_ensemble(
        ecfg,
        [&](std::uint64_t i) {
          const SamplePath L = simulate_driver(seeded(cfg, i), grid);
          const SamplePath X = kw ? convolve(*kw, L) : L;
          const SamplePath& Y = which == "cov" ? L : X;
          std::vector<double> out;
          for (const auto& [n, sub] : seq.levels()) {
            const auto v = covariation_at_probes(X, Y, *sub, cfg.probes);
            out.insert(out.end(), v.begin(), v.end());
          }
          return out;
        },
        names);
    std::size_t c = 0;
    for (const auto& [n, sub] : seq.levels())
      for (double t : cfg.probes) rows.push_back({n, t, stats[c].mean, stats[c++].se});
  } else {
    throw ConfigError("estimate --which must be one of qv, cov, energy, preqv");
  }

  io::write_report_csv(rows, cfg.output_dir / ("estimate_" + which + ".csv"));
  std::vector<double> xs, ys;
  for (const auto& r : rows)
    if (r.probe_t == cfg.probes.back()) {
      xs.push_back(static_cast<double>(r.level));
      ys.push_back(r.value);
    }
  io::write_plot_data(which + " per level", xs, ys,
                      cfg.output_dir / ("estimate_" + which + ".dat"));
  summary["rows"] = rows.size();
  io::write_text(cfg.output_dir / ("estimate_" + which + ".json"), summary.dump(2) + "\n");
  std::cout << "wrote " << (cfg.output_dir / ("estimate_" + which + ".csv")).string() << "\n";
  return 0;
}

int cmd_decompose(const RunConfig& cfg) {
  if (!cfg.kernel) throw ConfigError("decompose requires a kernel");
  prepare_output(cfg);
  auto grid = deepest_grid(cfg);
  const auto seq = levels_of(cfg);
  const KernelWeights kw = build_kernel_weights(*cfg.kernel, grid);
  const SamplePath L0 = simulate_driver(seeded(cfg, 0), grid);
  const Decomposition d0 = natural_decomposition_convolution(*cfg.kernel, L0, &kw);
  io::write_decomposition_csv(d0.M, d0.A, cfg.output_dir / "decomposition.csv");

  const auto rep = orthogonality_test(
      [&](std::uint64_t i) {
        const SamplePath L = simulate_driver(seeded(cfg, i), grid);
        Decomposition d = natural_decomposition_convolution(*cfg.kernel, L, &kw);
        return std::make_pair(std::move(d.A), std::move(L));
      },
      seq, cfg.n_paths, cfg.se_mult);
  json diag;
  diag["orthogonality_verdict"] = rep.verdict;
  diag["deepest_ci_contains_zero"] = rep.deepest_ci_contains_zero;
  diag["trend"] = to_string(rep.trend);
  json table = json::array();
  for (const auto& r : rep.per_level)
    table.push_back({{"level", r.level}, {"mean", r.mean}, {"se", r.se}});
  diag["S_n_A_N"] = table;
  io::write_text(cfg.output_dir / "diagnostics.json", diag.dump(2) + "\n");
  std::cout << "wrote " << (cfg.output_dir / "decomposition.csv").string() << "\n";
  return 0;
}

int cmd_ito(const RunConfig& cfg) {
  if (!cfg.transform) throw ConfigError("ito requires a transform");
  prepare_output(cfg);
  auto grid = deepest_grid(cfg);
  const auto seq = levels_of(cfg);
  const JumpCompensator nu = compensator_for(cfg.driver);
  auto decompose_path = [&](const SamplePath& L) {
    if (cfg.kernel) return natural_decomposition_convolution(*cfg.kernel, L);
    SamplePath zero(grid, std::vector<double>(grid->size(), 0.0));
    return Decomposition{L, L, std::move(zero), Provenance::ClosedFormConvolution, 0, {}};
  };

  const SamplePath L = simulate_driver(seeded(cfg, 0), grid);
  const Decomposition d = decompose_path(L);
  const ItoReport rep = run_ito(d, *cfg.transform, nu, grid);
  std::string csv = "t,Y,Gamma\n";
  for (std::size_t i = 0; i < grid->size(); ++i)
    csv += io::fmt((*grid)[i]) + "," + io::fmt(rep.Y.value_at_index(i)) + "," +
           io::fmt(rep.Gamma.value_at_index(i)) + "\n";
  io::write_text(cfg.output_dir / "ito.csv", csv);

  json out;
  out["transform"] = cfg.transform->name;
  out["reconstruction_residual"] = rep.reconstruction_residual;
  out["gamma_discrepancy"] = rep.gamma_discrepancy;

  // orthogonality of Gamma against an independent Brownian motion
  const auto orth = orthogonality_of_gamma(
      [&](std::uint64_t i) {
        const SamplePath Li = simulate_driver(seeded(cfg, i), grid);
        const Decomposition di = decompose_path(Li);
        SamplePath G = run_ito(di, *cfg.transform, nu, grid).Gamma;
        DriverSpec wspec = DriverSpec::brownian(derive_path_seed(cfg.driver.seed ^ 0x57, i));
        return std::make_pair(std::move(G), simulate_driver(wspec, grid));
      },
      seq, cfg.n_paths, cfg.se_mult);
  json orth_rows = json::array();
  for (const auto& r : orth.per_level)
    orth_rows.push_back({{"level", r.level}, {"mean", r.mean}, {"se", r.se}});
  out["gamma_orthogonality"] = {{"rows", orth_rows},
                                {"deepest_ci_contains_zero", orth.deepest_ci_contains_zero},
                                {"trend", to_string(orth.trend)}};

  // quadratic variation of F(X) against the bracket split, path 0
  json qv_rows = json::array();
  for (const auto& row : qv_of_transform(d, *cfg.transform, seq))
    qv_rows.push_back({{"level", row.level}, {"lhs", row.lhs}, {"rhs", row.rhs},
                       {"residual", row.residual}});
  out["qv_of_transform"] = qv_rows;

  io::write_text(cfg.output_dir / "ito.json", out.dump(2) + "\n");
  std::cout << "wrote " << (cfg.output_dir / "ito.csv").string() << "\n";
  return 0;
}

int cmd_audit(const RunConfig& cfg) {
  if (!cfg.kernel) throw ConfigError("audit requires a kernel");
  prepare_output(cfg);
  const auto seq = levels_of(cfg);
  const auto audit = audit_hypotheses(*cfg.kernel, cfg.driver, seq);
  json out;
  for (const auto& r : audit.reports)
    out["verdicts"][r.name] = {{"verdict", to_string(r.verdict)}, {"value", r.value},
                               {"note", r.note}};
  out["hc_exponent"] = audit.hc_exponent;
  out["h6_gaps"] = audit.h6_gap_per_level;
  io::write_text(cfg.output_dir / "audit.json", out.dump(2) + "\n");
  std::string csv = "s,v2_sup,var_sup,gamma2,var_bound\n";
  for (const auto& row : audit.per_s)
    csv += io::fmt(row.s) + "," + io::fmt(row.v2_sup) + "," + io::fmt(row.var_sup) + "," +
           io::fmt(row.gamma2) + "," + io::fmt(row.var_bound) + "\n";
  io::write_text(cfg.output_dir / "audit_per_s.csv", csv);
  for (const auto& r : audit.reports)
    std::cout << r.name << ": " << to_string(r.verdict) << "\n";
  return 0;
}

int cmd_pathology(bool alternating, int depth, const std::string& sawtooth_variant,
                  const std::vector<int>& pi_ns, double probe_t, int depth_cap,
                  const std::string& export_csv) {
  if (alternating) {
    const auto fn = build_alternating(depth);
    const auto sk = fn.sk_table();
    std::cout << "k,S_k\n";
    for (std::size_t k = 0; k < sk.size(); ++k)
      std::cout << (k + 1) << "," << io::fmt(sk[k]) << "\n";
    if (!export_csv.empty()) {
      std::string csv = "t,value\n";
      for (std::size_t i = 0; i < fn.values.size(); ++i)
        csv += io::fmt(std::ldexp(static_cast<double>(i), -depth)) + "," +
               io::fmt(fn.values[i]) + "\n";
      io::write_text(export_csv, csv);
    }
    return 0;
  }
  if (!sawtooth_variant.empty()) {
    const Sawtooth saw(sawtooth_variant == "sqrt" ? SawtoothVariant::Sqrt
                                                  : SawtoothVariant::Linear);
    std::cout << "n,preqv\n";
    for (int n : pi_ns)
      std::cout << n << "," << io::fmt(pre_qv(saw, pathological_pi(n, depth_cap), probe_t))
                << "\n";
    return 0;
  }
  throw ConfigError("pathology: pick --alternating or --sawtooth");
}

int cmd_report(const fs::path& dir) {
  if (!fs::exists(dir) || !fs::is_directory(dir))
    throw ConfigError("report: not a directory: " + dir.string());
  if (!fs::exists(dir / "manifest.json"))
    throw ConfigError("report: no manifest.json in " + dir.string() + " (empty run directory?)");
  json bundle;
  bundle["manifest"] = json::parse(io::read_text(dir / "manifest.json"));
  json files = json::array();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name == "report.json") continue;
    files.push_back(name);
    if (entry.path().extension() == ".csv") {
      // turn level,probe,value,se tables into plot data
      std::ifstream in(entry.path());
      std::string header;
      std::getline(in, header);
      if (header.rfind("level,", 0) == 0) {
        std::vector<double> xs, ys;
        std::string line;
        while (std::getline(in, line)) {
          const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
          const auto c3 = line.find(',', c2 + 1);
          xs.push_back(std::stod(line.substr(0, c1)));
          ys.push_back(std::stod(line.substr(c2 + 1, c3 - c2 - 1)));
        }
        io::write_plot_data(name, xs, ys, dir / (entry.path().stem().string() + ".dat"));
      }
    }
  }
  std::sort(files.begin(), files.end());
  bundle["files"] = files;
  io::write_text(dir / "report.json", bundle.dump(2) + "\n");
  std::cout << "wrote " << (dir / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak Dirichlet process toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string which = "qv";
  bool alternating = false;
  int depth = 12;
  std::string sawtooth_variant;
  std::vector<int> pi_ns{1, 2, 3, 4, 5, 6};
  double probe_t = 1.0;
  int depth_cap = 20;
  std::string export_csv;
  std::string report_dir;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
  };
  add_config(app.add_subcommand("simulate", "write driver and convolution paths"));
  auto* est = app.add_subcommand("estimate", "run an estimator suite");
  add_config(est);
  est->add_option("--which", which, "qv | cov | energy | preqv");
  add_config(app.add_subcommand("decompose", "natural decomposition and diagnostics"));
  add_config(app.add_subcommand("ito", "transform decomposition F(X) = Y + Gamma"));
  add_config(app.add_subcommand("audit", "kernel hypothesis audit"));
  auto* path_cmd = app.add_subcommand("pathology", "counterexample tables");
  path_cmd->add_flag("--alternating", alternating, "alternating-QV S_k table");
  path_cmd->add_option("--depth", depth, "construction depth");
  path_cmd->add_option("--sawtooth", sawtooth_variant, "sqrt | linear");
  path_cmd->add_option("--pi-n", pi_ns, "pi_n levels");
  path_cmd->add_option("--t", probe_t, "probe time");
  path_cmd->add_option("--depth-cap", depth_cap, "tail truncation");
  path_cmd->add_option("--export", export_csv, "write the dyadic table to CSV");
  auto* rep_cmd = app.add_subcommand("report", "bundle a run directory");
  rep_cmd->add_option("--dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("pathology"))
      return cmd_pathology(alternating, depth, sawtooth_variant, pi_ns, probe_t, depth_cap,
                           export_csv);
    if (app.got_subcommand("report")) return cmd_report(report_dir);
    const RunConfig cfg = parse_config(config_path);
    if (app.got_subcommand("simulate")) return cmd_simulate(cfg);
    if (app.got_subcommand("estimate")) return cmd_estimate(cfg, which);
    if (app.got_subcommand("decompose")) return cmd_decompose(cfg);
    if (app.got_subcommand("ito")) return cmd_ito(cfg);
    if (app.got_subcommand("audit")) return cmd_audit(cfg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
