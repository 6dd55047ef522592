// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the C interface of the
// shared library; this file only parses flags and prints results.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stefanlab/stefanlab.h"

namespace {

int report_error(sl_status status, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"]["code"] = sl_status_name(status);
  err["error"]["status"] = static_cast<int>(status);
  err["error"]["message"] = message;
  std::cout << err.dump(2) << '\n';
  return static_cast<int>(status);
}

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized nonlocal Stefan problems: solver and intrinsic analysis"};
  app.set_version_flag("--version", std::string(sl_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "Preset name (melt1d, twophase1d, logbdy, constant)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for the kernel audit sampling");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the canonical config to stderr before running");

  const char* names[] = {"solve", "analyze-modulus", "continuation", "lemma-check", "verify", "tail"};
  const char* help[] = {"Integrate the regularized problem and store the trajectory",
                        "Oscillation ladder and log-modulus fit",
                        "Solve a family of epsilons and extract the limit pair",
                        "Check the iteration lemmas on their default grids",
                        "Maximum principle, comparison, normalization, energy and density reports",
                        "Tail values for the configured points and radii"};
  for (int i = 0; i < 6; ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  if (config_path.empty() && preset.empty())
    return report_error(SL_INVALID_ARGUMENT, "one of --config or --preset is required");

  sl_config* cfg = nullptr;
  sl_status st = SL_OK;
  if (!config_path.empty()) {
    auto text = slurp(config_path);
    if (!text) return report_error(SL_IO, "cannot read " + config_path);
    if (!preset.empty()) {
      // Let --preset seed the problem when the file does not name one.
      auto doc = nlohmann::json::parse(*text, nullptr, false);
      if (doc.is_object()) {
        if (!doc.contains("problem")) doc["problem"] = nlohmann::json::object();
        if (doc["problem"].is_object() && !doc["problem"].contains("preset")) doc["problem"]["preset"] = preset;
        *text = doc.dump();
      }
    }
    st = sl_config_parse(text->c_str(), &cfg);
  } else {
    st = sl_config_from_preset(preset.c_str(), &cfg);
  }
  if (st != SL_OK) return report_error(st, sl_last_error());

  if (print_config) {
    char* canonical = nullptr;
    if (sl_config_canonical(cfg, &canonical) == SL_OK) {
      std::cerr << canonical << '\n';
      sl_string_free(canonical);
    }
  }

  char* summary = nullptr;
  st = sl_run(sub.c_str(), cfg, out_dir.empty() ? nullptr : out_dir.c_str(), threads, seed, &summary);
  sl_config_free(cfg);

  if (summary) {
    std::cout << summary << '\n';
    sl_string_free(summary);
  }
  if (st == SL_CONTRACT_FAILED) {
    std::cerr << "contract failed; see the report above\n";
    return static_cast<int>(st);
  }
  if (st != SL_OK) return report_error(st, sl_last_error());
  return 0;
}
