// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>

#include "stefanlab/stefanlab.h"

TEST_CASE("status names and version") {
  CHECK(std::string(sl_status_name(SL_OK)) == "ok");
  CHECK(std::string(sl_status_name(SL_SCHEMA_VIOLATION)) == "schema_violation");
  CHECK(std::strlen(sl_version()) > 0);
}

TEST_CASE("config parsing reports violations") {
  sl_config* cfg = nullptr;
  CHECK(sl_config_parse(R"({"problem": {"preset": "melt1d", "p": 2}})", &cfg) == SL_SCHEMA_VIOLATION);
  CHECK(cfg == nullptr);
  CHECK(std::string(sl_last_error()).find("p must exceed 2") != std::string::npos);
  CHECK(sl_config_from_preset("glacier", &cfg) == SL_INVALID_ARGUMENT);
  CHECK(sl_config_parse(nullptr, &cfg) == SL_INVALID_ARGUMENT);
}

TEST_CASE("canonical config through the handle") {
  sl_config* cfg = nullptr;
  REQUIRE(sl_config_from_preset("melt1d", &cfg) == SL_OK);
  char* text = nullptr;
  REQUIRE(sl_config_canonical(cfg, &text) == SL_OK);
  sl_config* again = nullptr;
  REQUIRE(sl_config_parse(text, &again) == SL_OK);
  char* text2 = nullptr;
  REQUIRE(sl_config_canonical(again, &text2) == SL_OK);
  CHECK(std::string(text) == std::string(text2));
  sl_string_free(text);
  sl_string_free(text2);
  sl_config_free(cfg);
  sl_config_free(again);
}

TEST_CASE("enthalpy entry points") {
  double v = 0.0;
  REQUIRE(sl_beta_eps(0.1, 0.0, &v) == SL_OK);
  CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
  REQUIRE(sl_b(0.1, 0.5, &v) == SL_OK);
  CHECK(v == 1.5);
  REQUIRE(sl_b_inverse(0.1, 1.5, &v) == SL_OK);
  CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sl_beta_eps(-1.0, 0.0, &v) != SL_OK);
  REQUIRE(sl_lemma_iter_epsilon(4, 4, 4, &v) == SL_OK);
  CHECK(v == doctest::Approx(0.0117355).epsilon(1e-6));
}

TEST_CASE("solve and read back a trajectory") {
  sl_config* cfg = nullptr;
  REQUIRE(sl_config_parse(R"({"problem": {"preset": "constant", "box": {"nodes": 17}}, "solver": {"steps": 4}})", &cfg) == SL_OK);
  sl_trajectory* tr = nullptr;
  REQUIRE(sl_solve(cfg, 2, &tr) == SL_OK);
  CHECK(sl_trajectory_times(tr) == 5);
  REQUIRE(sl_trajectory_nodes(tr) == 17);
  std::vector<double> f(17);
  REQUIRE(sl_trajectory_field(tr, 4, f.data(), f.size()) == SL_OK);
  for (double x : f) CHECK(x == 0.3);
  CHECK(sl_trajectory_field(tr, 9, f.data(), f.size()) == SL_INVALID_ARGUMENT);
  CHECK(sl_trajectory_field(tr, 0, f.data(), 3) == SL_INVALID_ARGUMENT);

  const auto dir = std::filesystem::temp_directory_path() / "stefanlab_capi_traj";
  std::filesystem::remove_all(dir);
  REQUIRE(sl_trajectory_write(tr, dir.c_str()) == SL_OK);
  sl_trajectory* back = nullptr;
  REQUIRE(sl_trajectory_read(dir.c_str(), &back) == SL_OK);
  double t = 0.0;
  REQUIRE(sl_trajectory_time(back, 4, &t) == SL_OK);
  double t0 = 0.0;
  sl_trajectory_time(tr, 4, &t0);
  CHECK(t == t0);
  sl_trajectory_free(back);
  sl_trajectory_free(tr);
  sl_config_free(cfg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run returns the summary") {
  sl_config* cfg = nullptr;
  REQUIRE(sl_config_from_preset("constant", &cfg) == SL_OK);
  const auto dir = std::filesystem::temp_directory_path() / "stefanlab_capi_run";
  char* summary = nullptr;
  CHECK(sl_run("lemma-check", cfg, dir.c_str(), 1, 1, &summary) == SL_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("\"pass\": true") != std::string::npos);
  sl_string_free(summary);
  CHECK(sl_run("dance", cfg, dir.c_str(), 1, 1, nullptr) == SL_INVALID_ARGUMENT);
  sl_config_free(cfg);
  std::filesystem::remove_all(dir);
}
