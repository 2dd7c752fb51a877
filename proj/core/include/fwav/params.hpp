#pragma once

#include <Eigen/Dense>
#include <string>

#include "fwav/io.hpp"

namespace fwav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Coefficients of the full 16-state model.
///
/// The torque coefficients are signed: with the rotor-to-tail geometry of the
/// reference airframe a positive rudder deflection yields a positive roll
/// torque, so the nominal k_tau/k_flap x and y entries are negative (the
/// deflection-torque law carries a leading minus).
struct FwavParams {
  double m = 0.029;  // kg
  double g = 9.81;   // m/s^2
  Mat3 J = Vec3(1.2e-4, 1.0e-4, 0.6e-4).asDiagonal();
  double k_tf = 1.25e-3;                  // N s^2
  Vec3 k_d = Vec3(0.0174, 0.03, 0.02);    // N s^2/m^2
  Vec3 k_tau = Vec3(-1.0e-3, -1.0e-3, 2.0e-4);
  Vec3 k_flap = Vec3(-2.6e-5, -2.2e-5, 5.0e-6);
  double k_flap_c = 0.05;  // s
  double k_rud_c = 0.03;   // s
  double k_ele_c = 0.03;   // s

  /// Throws InvalidInput when a physical invariant is violated.
  void validate() const;
  double hover_frequency() const;
};

/// Coefficients of the vertical-frame (planar heading) model.
struct VerticalParams {
  double m = 0.029;
  double g = 9.81;
  double k_tf = 1.25e-3;
  Vec3 vk_d = Vec3(0.0174, 0.03, 0.02);
  double vk_gamma = 20.0;     // wind-vane gain
  double vk_damp = 0.5;       // yaw damping
  double vk_tau_x = 0.5;      // rudder yaw torque, velocity part
  double vk_flap_x = 0.05;    // rudder yaw torque, flapping part
  double kbar_gamma = 2.0;    // lumped gain, velocity part
  double kbar_flap_x = 0.1;   // lumped gain, flapping part
  double l_gamma_min = 10.0;
  double l_gamma_max = 40.0;

  void validate() const;
  double hover_frequency() const;
  /// k_drag,y of the lateral constraint is the same coefficient as vk_d.y().
  double vk_drag_y() const { return vk_d.y(); }
};

struct ModelParams {
  FwavParams full;
  VerticalParams vertical;

  void validate() const {
    full.validate();
    vertical.validate();
  }
};

/// Version tag written into parameter files produced by to_document().
inline constexpr int kParamsFileVersion = 1;

ModelParams params_from_document(const io::KeyValueDocument& doc);
io::KeyValueDocument params_to_document(const ModelParams& params);
ModelParams load_params(const std::string& path);

}  // namespace fwav
