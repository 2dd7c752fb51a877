#include "fwav/params.hpp"

#include <cmath>

#include "fwav/errors.hpp"

namespace fwav {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace

void FwavParams::validate() const {
  require(m > 0.0 && g > 0.0 && k_tf > 0.0, "FwavParams: m, g and k_tf must be positive");
  require(k_flap_c > 0.0 && k_rud_c > 0.0 && k_ele_c > 0.0, "FwavParams: time constants must be positive");
  require((k_d.array() >= 0.0).all(), "FwavParams: drag coefficients must be non-negative");
  require((J - J.transpose()).norm() <= 1e-12 * J.norm(), "FwavParams: inertia must be symmetric");
  Eigen::LLT<Mat3> llt(J);
  require(llt.info() == Eigen::Success, "FwavParams: inertia must be positive definite");
}

double FwavParams::hover_frequency() const { return std::sqrt(m * g / k_tf); }

void VerticalParams::validate() const {
  require(m > 0.0 && g > 0.0 && k_tf > 0.0, "VerticalParams: m, g and k_tf must be positive");
  require((vk_d.array() >= 0.0).all(), "VerticalParams: drag coefficients must be non-negative");
  require(vk_gamma >= 0.0 && vk_damp >= 0.0 && vk_tau_x >= 0.0 && vk_flap_x >= 0.0 &&
              kbar_gamma >= 0.0 && kbar_flap_x >= 0.0,
          "VerticalParams: yaw coefficients must be non-negative");
  require(l_gamma_min > 0.0 && l_gamma_min <= l_gamma_max,
          "VerticalParams: need 0 < l_gamma_min <= l_gamma_max");
}

double VerticalParams::hover_frequency() const { return std::sqrt(m * g / k_tf); }

ModelParams params_from_document(const io::KeyValueDocument& doc) {
  if (doc.has("version") && doc.number("version") != kParamsFileVersion) {
    throw InvalidInput("parameter file version " + doc.text("version") + " is not supported");
  }
  ModelParams p;
  FwavParams& f = p.full;
  f.m = doc.number_or("m", f.m);
  f.g = doc.number_or("g", f.g);
  f.k_tf = doc.number_or("k_tf", f.k_tf);
  const char* axes[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    const std::string a = axes[i];
    f.k_d[i] = doc.number_or("k_d_" + a, f.k_d[i]);
    f.k_tau[i] = doc.number_or("k_tau_" + a, f.k_tau[i]);
    f.k_flap[i] = doc.number_or("k_flap_" + a, f.k_flap[i]);
    p.vertical.vk_d[i] = doc.number_or("vk_d_" + a, p.vertical.vk_d[i]);
    for (int j = 0; j < 3; ++j) {
      const std::string key = "J_" + a + axes[j];
      if (doc.has(key)) {
        f.J(i, j) = doc.number(key);
        f.J(j, i) = f.J(i, j);
      }
    }
  }
  f.k_flap_c = doc.number_or("k_flap_c", f.k_flap_c);
  f.k_rud_c = doc.number_or("k_rud_c", f.k_rud_c);
  f.k_ele_c = doc.number_or("k_ele_c", f.k_ele_c);

  VerticalParams& v = p.vertical;
  v.m = f.m;
  v.g = f.g;
  v.k_tf = f.k_tf;
  v.vk_gamma = doc.number_or("vk_gamma", v.vk_gamma);
  v.vk_damp = doc.number_or("vk_damp", v.vk_damp);
  v.vk_tau_x = doc.number_or("vk_tau_x", v.vk_tau_x);
  v.vk_flap_x = doc.number_or("vk_flap_x", v.vk_flap_x);
  v.kbar_gamma = doc.number_or("kbar_gamma", v.kbar_gamma);
  v.kbar_flap_x = doc.number_or("kbar_flap_x", v.kbar_flap_x);
  v.l_gamma_min = doc.number_or("l_gamma_min", v.l_gamma_min);
  v.l_gamma_max = doc.number_or("l_gamma_max", v.l_gamma_max);
  p.validate();
  return p;
}

io::KeyValueDocument params_to_document(const ModelParams& p) {
  io::KeyValueDocument doc;
  const FwavParams& f = p.full;
  const VerticalParams& v = p.vertical;
  doc.set("version", static_cast<double>(kParamsFileVersion));
  doc.set("m", f.m);
  doc.set("g", f.g);
  doc.set("k_tf", f.k_tf);
  const char* axes[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) doc.set(std::string("J_") + axes[i] + axes[j], f.J(i, j));
  }
  for (int i = 0; i < 3; ++i) doc.set(std::string("k_d_") + axes[i], f.k_d[i]);
  for (int i = 0; i < 3; ++i) doc.set(std::string("k_tau_") + axes[i], f.k_tau[i]);
  for (int i = 0; i < 3; ++i) doc.set(std::string("k_flap_") + axes[i], f.k_flap[i]);
  doc.set("k_flap_c", f.k_flap_c);
  doc.set("k_rud_c", f.k_rud_c);
  doc.set("k_ele_c", f.k_ele_c);
  for (int i = 0; i < 3; ++i) doc.set(std::string("vk_d_") + axes[i], v.vk_d[i]);
  doc.set("vk_gamma", v.vk_gamma);
  doc.set("vk_damp", v.vk_damp);
  doc.set("vk_tau_x", v.vk_tau_x);
  doc.set("vk_flap_x", v.vk_flap_x);
  doc.set("kbar_gamma", v.kbar_gamma);
  doc.set("kbar_flap_x", v.kbar_flap_x);
  doc.set("l_gamma_min", v.l_gamma_min);
  doc.set("l_gamma_max", v.l_gamma_max);
  return doc;
}

ModelParams load_params(const std::string& path) {
  return params_from_document(io::KeyValueDocument::load(path));
}

}  // namespace fwav
