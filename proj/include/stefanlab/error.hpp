// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_ERROR_HPP
#define STEFANLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace stefanlab {

enum class Errc {
  invalid_argument = 1,
  invalid_exponent,
  invalid_params,
  schema_violation,
  newton_divergence,
  no_convergence,
  empty_window,
  empty_cylinder,
  insufficient_samples,
  nonpositive_excess,
  degenerate_cutoff,
  unresolved_band_too_wide,
  inconsistent_family,
  io,
  contract_failed,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace stefanlab

#endif
