#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "inhomwalk/constraint.hpp"
#include "inhomwalk/harness.hpp"

namespace inhomwalk::detail {

// Starts a report and checks that every member law up to step n_max lies in
// the class; failures are recorded as notes and force a failing verdict.
VerificationReport begin(const std::string& id, const FamilySpec& family, const HarnessOptions& opt,
                         std::size_t n_max);

// Runs the tasks concurrently and concatenates their rows in task order.
std::vector<ReportRow> run_tasks(std::size_t count, const HarnessOptions& opt,
                                 const std::function<std::vector<ReportRow>(std::size_t)>& task);

// Sorts rows on (member, part, inputs) and fills grid_points / skipped.
// Returns false when more than half the grid was skipped.
bool settle_rows(VerificationReport& report);

void add_constant(VerificationReport& report, const std::string& name, double value);

// Envelope over the non-skipped rows accepted by the filter, using
// (envelope_x or 0, log_normalized).
Envelope fit_rows(const std::vector<ReportRow>& rows, const std::function<bool(const ReportRow&)>& filter,
                  bool with_rate);

// Records the envelope constants under a prefix; returns true when both
// envelopes are finite with C_- > 0 (and, if required, the upper rate is positive).
bool record_envelope(VerificationReport& report, const std::string& prefix, const Envelope& env,
                     bool need_upper_decay);

// Closes the report: an empty grid passes vacuously with a note, a failing
// membership check or excess skips force a failure.
void finish(VerificationReport& report, bool verdict, bool skips_ok);

// Sorted distinct grid values in [0, limit].
std::vector<std::int64_t> uv_values(const FamilyGrids& grids, std::size_t n, double limit);
// lambda0, 2 lambda0, ... up to sqrt(n).
std::vector<std::int64_t> lambdas(const FamilyGrids& grids, std::size_t n);

// Lattice endpoint y with y - m_n in [lo, hi], closest to the centered target v.
// Returns false when no lattice point lies in the range.
bool endpoint_in(const StepSchedule& schedule, double v, double lo, double hi, LatticeEndpoint& out);

// Centered band [lo, hi] for steps 1..n.
PathConstraint centered_tube(const StepSchedule& schedule, double lo, double hi, bool lo_strict = false,
                             bool hi_strict = false);

double row_sort_key_nan(double v);

inline ReportRow make_row(const std::string& member, const std::string& part) {
  ReportRow r;
  r.member = member;
  r.part = part;
  return r;
}

// Fills value/log_value and normalized/log_normalized from a log value and a
// log prefactor; a -inf log value marks the row as skipped.
void set_log_value(ReportRow& row, double log_value, double log_prefactor);

}  // namespace inhomwalk::detail
