#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "wdp/io.hpp"

using namespace wdp;
namespace fs = std::filesystem;

namespace {
fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wdp_io_tests";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("path CSV carries a header and full-precision values") {
  auto g = std::make_shared<Subdivision>(Subdivision::dyadic(1.0, 2));
  const SamplePath p(g, {0.0, 0.1234567890123456789, -1.0, 2.0, 0.5});
  const auto file = temp_file("path.csv");
  io::write_path_csv(p, file);
  const std::string text = io::read_text(file);
  CHECK(text.rfind("t,value\n", 0) == 0);
  CHECK(text.find("0.12345678901234568") != std::string::npos);
  CHECK(text.find("0.25,") != std::string::npos);
}

TEST_CASE("subdivision CSV is one column of times") {
  const auto file = temp_file("sub.csv");
  io::write_subdivision_csv(Subdivision::dyadic(1.0, 1), file);
  CHECK(io::read_text(file) == "t\n0\n0.5\n1\n");
}

TEST_CASE("report CSV layout") {
  const auto file = temp_file("report.csv");
  io::write_report_csv({{8, 1.0, 0.5, 0.01}, {9, 1.0, 0.25, 0.005}}, file);
  const std::string text = io::read_text(file);
  CHECK(text.rfind("level,probe_t,value,se\n", 0) == 0);
  CHECK(text.find("8,1,0.5,0.01") != std::string::npos);
}

TEST_CASE("plot data is two whitespace-separated columns with a comment") {
  const auto file = temp_file("plot.dat");
  io::write_plot_data("energy per level", {1.0, 2.0}, {0.5, 0.25}, file);
  CHECK(io::read_text(file) == "# energy per level\n1 0.5\n2 0.25\n");
  CHECK_THROWS_AS(io::write_plot_data("bad", {1.0}, {}, file), std::invalid_argument);
}

TEST_CASE("jump ledger sidecar JSON") {
  auto g = std::make_shared<Subdivision>(Subdivision::dyadic(1.0, 2));
  const SamplePath p(g, {0.0, 1.0, 1.0, 1.0, 1.0}, {{0.25, 1.0}});
  const auto file = temp_file("jumps.json");
  io::write_jump_ledger_json(p, file);
  const auto j = nlohmann::json::parse(io::read_text(file));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["t"] == 0.25);
  CHECK(j[0]["dx"] == 1.0);
}

TEST_CASE("tabulated kernel CSV round trip") {
  const auto file = temp_file("kernel.csv");
  io::write_text(file,
                 "G,0,0.5,1\n"
                 "0,1,0,0\n"
                 "0.5,1,1,0\n"
                 "1,1,1,1\n");
  const TabulatedKernel k = io::read_tabulated_kernel_csv(file);
  REQUIRE(k.t_grid == std::vector<double>{0.0, 0.5, 1.0});
  REQUIRE(k.s_grid == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(eval_kernel(KernelSpec(k), 1.0, 0.5) == 1.0);
  CHECK(eval_kernel(KernelSpec(k), 0.25, 0.75) == 0.0);  // above the diagonal

  io::write_text(file, "X,0,1\n0,1,1\n");
  CHECK_THROWS_AS(io::read_tabulated_kernel_csv(file), std::runtime_error);
}

TEST_CASE("manifest serialization") {
  RunManifest m;
  m.master_seed = 42;
  m.driver = "brownian";
  m.kernel = "fractional";
  m.kernel_params = {{"H", 0.75}, {"c", 1.0}};
  m.levels = {8, 9};
  m.n_paths = 100;
  m.tool_version = "wdp test";
  m.frozen_fingerprints = {{"beta", 123456789ull}};
  const auto j = io::manifest_to_json(m);
  CHECK(j["master_seed"] == 42);
  CHECK(j["kernel_params"]["H"] == 0.75);
  CHECK(j["kernel_params"]["c"] == 1.0);
  CHECK(j["levels"] == nlohmann::json::array({8, 9}));
  CHECK(j["frozen_fingerprints"]["beta"] == 123456789ull);
}
