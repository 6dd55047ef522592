// SPDX-License-Identifier: Apache-2.0

#include "stefanlab/error.hpp"

namespace stefanlab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_exponent: return "invalid_exponent";
    case Errc::invalid_params: return "invalid_params";
    case Errc::schema_violation: return "schema_violation";
    case Errc::newton_divergence: return "newton_divergence";
    case Errc::no_convergence: return "no_convergence";
    case Errc::empty_window: return "empty_window";
    case Errc::empty_cylinder: return "empty_cylinder";
    case Errc::insufficient_samples: return "insufficient_samples";
    case Errc::nonpositive_excess: return "nonpositive_excess";
    case Errc::degenerate_cutoff: return "degenerate_cutoff";
    case Errc::unresolved_band_too_wide: return "unresolved_band_too_wide";
    case Errc::inconsistent_family: return "inconsistent_family";
    case Errc::io: return "io";
    case Errc::contract_failed: return "contract_failed";
  }
  return "unknown";
}

}  // namespace stefanlab
