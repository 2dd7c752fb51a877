#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fwav/controller.hpp"
#include "fwav/errors.hpp"
#include "fwav/io.hpp"
#include "fwav/params.hpp"

using namespace fwav;

TEST_CASE("key-value documents parse comments and numbers") {
  const auto doc = io::KeyValueDocument::parse("# header\na = 1.5  # trailing\n\nname = hello\n");
  CHECK(doc.number("a") == 1.5);
  CHECK(doc.text("name") == "hello");
  CHECK(doc.number_or("missing", 7.0) == 7.0);
  CHECK_THROWS_AS(doc.number("missing"), InvalidInput);
  CHECK_THROWS_AS(doc.number("name"), InvalidInput);
  CHECK_THROWS_AS(io::KeyValueDocument::parse("no equals sign\n"), InvalidInput);
}

TEST_CASE("format_number round-trips doubles exactly") {
  for (double v : {0.0, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.1}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
}

TEST_CASE("csv parse and write") {
  const io::CsvTable t = io::parse_csv("t,x\n0,1\n0.5,2.25\n");
  REQUIRE(t.header.size() == 2);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column_values("x")[1] == 2.25);
  CHECK_THROWS_AS(t.column_values("y"), InvalidInput);
  const io::CsvTable back = io::parse_csv(io::to_csv(t));
  CHECK(back.rows == t.rows);
}

TEST_CASE("shipped parameter file matches the built-in defaults") {
  const ModelParams p = load_params(std::string(FWAV_DATA_DIR) + "/default_params.cfg");
  const ModelParams d;
  CHECK(p.full.m == d.full.m);
  CHECK(p.full.k_tf == d.full.k_tf);
  CHECK((p.full.J - d.full.J).norm() == 0.0);
  CHECK((p.vertical.vk_d - d.vertical.vk_d).norm() == 0.0);
  CHECK(p.vertical.l_gamma_max == d.vertical.l_gamma_max);
}

TEST_CASE("parameter document round trip") {
  ModelParams p;
  p.full.m = 0.031;
  p.vertical.vk_d.x() = 0.02;
  const ModelParams q = params_from_document(params_to_document(p));
  CHECK(q.full.m == 0.031);
  CHECK(q.vertical.vk_d.x() == 0.02);
}

TEST_CASE("invalid parameters are rejected") {
  ModelParams p;
  p.full.m = -1.0;
  CHECK_THROWS_AS(p.full.validate(), InvalidInput);
  auto doc = params_to_document(ModelParams{});
  doc.set("version", 99.0);
  CHECK_THROWS_AS(params_from_document(doc), InvalidInput);
  auto bad = params_to_document(ModelParams{});
  bad.set("k_tf", -1.0);
  CHECK_THROWS_AS(params_from_document(bad), InvalidInput);
}

TEST_CASE("hover frequency balances gravity") {
  const VerticalParams v;
  const double f = v.hover_frequency();
  CHECK(v.k_tf * f * f == doctest::Approx(v.m * v.g).epsilon(1e-12));
}

TEST_CASE("gain files load") {
  const auto nominal = control::load_gains(std::string(FWAV_DATA_DIR) + "/gains_nominal.cfg");
  const auto builtin = control::ControllerGains::nominal();
  CHECK((nominal.Kp - builtin.Kp).norm() == 0.0);
  CHECK((nominal.Kv - builtin.Kv).norm() == 0.0);
  CHECK(nominal.k_psi == builtin.k_psi);
  CHECK(nominal.k_omega == builtin.k_omega);
  const auto cert = control::load_gains(std::string(FWAV_DATA_DIR) + "/gains_certified.cfg");
  CHECK(cert.k_psi == control::ControllerGains::certified().k_psi);
  CHECK(cert.k_omega == control::ControllerGains::certified().k_omega);
  auto doc = control::gains_to_document(nominal);
  doc.set("k_psi", -1.0);
  CHECK_THROWS_AS(control::gains_from_document(doc), InvalidInput);
}

TEST_CASE("missing files raise") {
  CHECK_THROWS_AS(io::read_text_file("/nonexistent/file.cfg"), InvalidInput);
}
