#pragma once

#include <vector>

#include "fwav/dynamics.hpp"
#include "fwav/params.hpp"

namespace fwav::sim {

/// Vertical-frame forward channel of one log sample.
struct ForwardSample {
  double t = 0.0;
  double vv_x = 0.0;     // m/s
  double f_flap = 0.0;   // Hz
  double gamma_x = 0.0;
};

struct DragEstimate {
  double k_d_over_m = 0.0;  // 1/m
  double residual_norm = 0.0;
  int windows = 0;
  double condition = 0.0;
};

struct IdentifyOptions {
  double min_speed = 0.2;  // m/s, excitation threshold
  int window = 25;         // samples per integration window
  double k_tf = 1.25e-3;
  double m = 0.029;
};

/// Least squares of the forward velocity change over windows against the
/// integral of -sgn(vv_x) vv_x^2, after removing the thrust contribution:
///   vv_x(b) - vv_x(a) + int k_tf f^2 Gamma_x / m = -(k_d/m) int sgn(vv_x) vv_x^2.
/// Only windows with |vv_x| > min_speed throughout are used. Throws
/// InsufficientExcitation when none qualify.
DragEstimate identify_drag(const std::vector<ForwardSample>& log, const IdentifyOptions& opts);

/// Forward-channel samples from a full-schema state log.
std::vector<ForwardSample> forward_samples(const std::vector<dynamics::FullSample>& states);
std::vector<ForwardSample> forward_samples_from_csv(const std::string& csv_text);

}  // namespace fwav::sim
