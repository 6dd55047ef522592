// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/stefanlab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "stefanlab/config.hpp"
#include "stefanlab/enthalpy.hpp"

struct sl_config {
  stefanlab::RunConfig value;
};

struct sl_trajectory {
  stefanlab::Trajectory value;
};

namespace {

thread_local std::string last_error;

sl_status to_status(stefanlab::Errc code) { return static_cast<sl_status>(static_cast<int>(code)); }

// Runs f and converts exceptions into a status plus the thread's message.
template <class F>
sl_status guarded(F&& f) noexcept {
  try {
    return f();
  } catch (const stefanlab::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return SL_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return SL_INTERNAL;
  }
}

sl_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be null";
  return SL_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sl_version(void) { return "0.1.0"; }

const char* sl_status_name(sl_status status) {
  if (status == SL_OK) return "ok";
  if (status == SL_INTERNAL) return "internal";
  if (status < SL_INVALID_ARGUMENT || status > SL_CONTRACT_FAILED) return "unknown";
  // The view points at a string literal, so data() is null-terminated.
  return stefanlab::errc_name(static_cast<stefanlab::Errc>(status)).data();
}

const char* sl_last_error(void) { return last_error.c_str(); }

void sl_string_free(char* s) { std::free(s); }

sl_status sl_config_parse(const char* json, sl_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new sl_config{stefanlab::parse_config(json)};
    return SL_OK;
  });
}

sl_status sl_config_from_preset(const char* name, sl_config** out) {
  if (!name) return null_argument("name");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new sl_config{stefanlab::preset(name)};
    return SL_OK;
  });
}

sl_status sl_config_canonical(const sl_config* config, char** out_json) {
  if (!config) return null_argument("config");
  if (!out_json) return null_argument("out_json");
  return guarded([&] {
    *out_json = duplicate(stefanlab::emit_config(config->value));
    return SL_OK;
  });
}

void sl_config_free(sl_config* config) { delete config; }

sl_status sl_run(const char* subcommand, const sl_config* config, const char* out_dir, int threads,
                 uint64_t seed, char** summary) {
  if (!subcommand) return null_argument("subcommand");
  if (!config) return null_argument("config");
  if (summary) *summary = nullptr;
  return guarded([&] {
    stefanlab::RunOptions opt;
    if (out_dir) opt.out_dir = out_dir;
    opt.threads = threads;
    opt.seed = seed;
    const stefanlab::RunOutcome r = stefanlab::run(subcommand, config->value, opt);
    if (summary) *summary = duplicate(r.summary);
    if (!r.ok) {
      last_error = std::string(subcommand) + ": contract failed";
      return SL_CONTRACT_FAILED;
    }
    return SL_OK;
  });
}

sl_status sl_solve(const sl_config* config, int threads, sl_trajectory** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    stefanlab::SolverConfig sc = config->value.solver;
    sc.threads = threads;
    *out = new sl_trajectory{stefanlab::solve(config->value.problem.build(), sc)};
    return SL_OK;
  });
}

size_t sl_trajectory_times(const sl_trajectory* traj) { return traj ? traj->value.times.size() : 0; }

size_t sl_trajectory_nodes(const sl_trajectory* traj) { return traj ? traj->value.grid.size() : 0; }

sl_status sl_trajectory_time(const sl_trajectory* traj, size_t index, double* out) {
  if (!traj) return null_argument("traj");
  if (!out) return null_argument("out");
  if (index >= traj->value.times.size()) {
    last_error = "time index out of range";
    return SL_INVALID_ARGUMENT;
  }
  *out = traj->value.times[index];
  return SL_OK;
}

sl_status sl_trajectory_field(const sl_trajectory* traj, size_t index, double* out, size_t len) {
  if (!traj) return null_argument("traj");
  if (!out) return null_argument("out");
  if (index >= traj->value.fields.size() || len != traj->value.grid.size()) {
    last_error = "time index out of range or buffer length differs from the node count";
    return SL_INVALID_ARGUMENT;
  }
  std::memcpy(out, traj->value.fields[index].data(), len * sizeof(double));
  return SL_OK;
}

sl_status sl_trajectory_write(const sl_trajectory* traj, const char* dir) {
  if (!traj) return null_argument("traj");
  if (!dir) return null_argument("dir");
  return guarded([&] {
    stefanlab::write_trajectory(dir, traj->value, "");
    return SL_OK;
  });
}

sl_status sl_trajectory_read(const char* dir, sl_trajectory** out) {
  if (!dir) return null_argument("dir");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new sl_trajectory{stefanlab::read_trajectory(dir)};
    return SL_OK;
  });
}

void sl_trajectory_free(sl_trajectory* traj) { delete traj; }

sl_status sl_beta_eps(double epsilon, double xi, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = stefanlab::Enthalpy(epsilon).beta(xi);
    return SL_OK;
  });
}

sl_status sl_b(double epsilon, double xi, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = stefanlab::Enthalpy(epsilon).b(xi);
    return SL_OK;
  });
}

sl_status sl_b_inverse(double epsilon, double y, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = stefanlab::Enthalpy(epsilon).b_inverse(y);
    return SL_OK;
  });
}

sl_status sl_lemma_iter_epsilon(double M2, double N2, double L2, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = stefanlab::lemma_iter_epsilon(M2, N2, L2);
    return SL_OK;
  });
}

}  // extern "C"
