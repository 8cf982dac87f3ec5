#pragma once

#include <stdexcept>
#include <string>

namespace mlz {

enum class errc {
  // model construction
  zero_coupling,
  zero_slope,
  duplicate_slope,
  zero_slope_entry,
  invalid_spin,
  cutoff_too_small,
  window_too_small,
  invalid_bargmann_index,
  not_gaugeable,
  // commutant
  degenerate_xi,
  root_bracket_failure,
  zero_detuning,
  dimension_mismatch,
  not_a_commuting_partner,
  // spectra
  degenerate_poles,
  // propagator
  step_limit_exceeded,
  tolerance_unreachable,
  non_convergent_tail,
  probe_outside_cutoff,
  // closed form
  invalid_magnetic_quantum,
  invalid_sector_state,
  non_terminating,
  pole_passed,
  non_positive_argument,
  // harness
  unsupported_format,
  validation,
  numerical,
  io
};

/// All library errors carry a machine-checkable code plus a message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mlz
