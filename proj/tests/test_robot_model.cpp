#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wbf/robot_model.hpp"

using namespace wbf;

namespace {

const std::string kAssets = WBF_ASSET_DIR;

std::string base_text() {
  return
      "schema_version 1\n"
      "name two_link\n"
      "link {\n"
      "  name base\n"
      "  mass 2\n"
      "  com 0 0 0\n"
      "  inertia 0.1 0 0 0.1 0 0.1\n"
      "}\n";
}

std::string arm_text(const std::string& patch) {
  std::string link =
      "link {\n"
      "  name arm\n"
      "  parent base\n"
      "  origin 0.1 0 0\n"
      "  axis 0 1 0\n"
      "  mass 1\n"
      "  com 0.2 0 0\n"
      "  inertia 1e-4 0 0 1e-3 0 1e-3\n"
      "  q_min -1\n"
      "  q_max 1\n"
      "  vel_max 10\n"
      "  tau_min -5\n"
      "  tau_max 5\n"
      "  nominal 0\n"
      "}\n";
  if (!patch.empty()) {
    // Replace the line holding the patched key (the parser reads the first
    // occurrence, so appending a duplicate would be ignored).
    const std::string key = patch.substr(0, patch.find(' '));
    const auto at = link.find("  " + key + " ");
    if (at != std::string::npos) {
      const auto end = link.find('\n', at);
      link = link.substr(0, at) + "  " + patch + link.substr(end);
    } else {
      link.insert(link.size() - 2, "  " + patch + "\n");
    }
  }
  return link;
}

}  // namespace

TEST_CASE("hexapod asset loads with the expected shape") {
  const RobotModel model = load_robot(kAssets + "/hexapod.robot");
  CHECK(model.name == "hexapod");
  CHECK(model.n_joints() == 18);
  CHECK(model.n_feet() == 6);
  CHECK(model.n_v() == 24);
  CHECK(model.total_mass() == doctest::Approx(30.0));
  CHECK(model.links[0].parent == -1);
  CHECK(model.find_link("body") == 0);
  CHECK(model.find_link("fl_tibia") > 0);
  CHECK(model.find_link("made_up") == -1);

  const vector_t lo = model.joint_lower();
  const vector_t hi = model.joint_upper();
  REQUIRE(lo.size() == 18);
  for (int j = 0; j < 18; ++j) {
    CHECK(lo[j] < hi[j]);
    CHECK(model.joint_vel_max()[j] > 0.0);
    CHECK(model.tau_lower()[j] < 0.0);
    CHECK(model.tau_upper()[j] > 0.0);
    const scalar_t nominal = model.nominal_posture()[j];
    CHECK(nominal >= lo[j]);
    CHECK(nominal <= hi[j]);
  }

  int hip_yaw_count = 0;
  for (int j = 0; j < 18; ++j) hip_yaw_count += model.joint_link(j).hip_yaw ? 1 : 0;
  CHECK(hip_yaw_count == 6);

  for (const Foot& f : model.feet) {
    CHECK(f.link > 0);
    CHECK(f.radius > 0.0);
  }
}

TEST_CASE("neutral state stands at the nominal posture") {
  const RobotModel model = load_robot(kAssets + "/hexapod.robot");
  const GeneralizedState s = GeneralizedState::neutral(model);
  CHECK(s.nj() == 18);
  CHECK(s.nv() == 24);
  CHECK(s.v.norm() == 0.0);
  CHECK((s.q_j - model.nominal_posture()).norm() == 0.0);
  CHECK(s.base_rot.isApprox(matrix3_t::Identity()));
}

TEST_CASE("serialize/reload reproduces the model exactly") {
  const RobotModel model = load_robot(kAssets + "/hexapod.robot");
  const std::string text = serialize_robot(model);
  const RobotModel back = parse_robot(parse_config_text(text), "round-trip");
  CHECK(serialize_robot(back) == text);

  REQUIRE(back.links.size() == model.links.size());
  for (size_t i = 0; i < model.links.size(); ++i) {
    const Link& a = model.links[i];
    const Link& b = back.links[i];
    CHECK(a.name == b.name);
    CHECK(a.parent == b.parent);
    CHECK((a.origin - b.origin).norm() == 0.0);
    CHECK((a.fixed_rot - b.fixed_rot).norm() == 0.0);
    CHECK((a.axis - b.axis).norm() == 0.0);
    CHECK(a.mass == b.mass);
    CHECK((a.com - b.com).norm() == 0.0);
    CHECK((a.inertia - b.inertia).norm() == 0.0);
    CHECK(a.q_min == b.q_min);
    CHECK(a.q_max == b.q_max);
    CHECK(a.nominal == b.nominal);
    CHECK(a.hip_yaw == b.hip_yaw);
  }
  REQUIRE(back.feet.size() == model.feet.size());
  for (size_t i = 0; i < model.feet.size(); ++i) {
    CHECK(model.feet[i].name == back.feet[i].name);
    CHECK(model.feet[i].link == back.feet[i].link);
    CHECK((model.feet[i].offset - back.feet[i].offset).norm() == 0.0);
    CHECK(model.feet[i].radius == back.feet[i].radius);
  }
  CHECK((model.gravity - back.gravity).norm() == 0.0);
}

TEST_CASE("semantic validation rejects bad models") {
  auto parse = [](const std::string& text) {
    return parse_robot(parse_config_text(text), "test");
  };

  CHECK_NOTHROW(parse(base_text() + arm_text("")));

  // Schema and structure.
  CHECK_THROWS_AS(parse("name x\nlink {\n  name base\n  mass 1\n}\n"), ValidationError);
  CHECK_THROWS_AS(parse("schema_version 2\nlink {\n  name base\n  mass 1\n}\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse("schema_version 1\nname empty\n"), ValidationError);

  // Link semantics.
  CHECK_THROWS_AS(parse(base_text() + arm_text("mass -1")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("parent nothing")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("axis 0 0 0")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("q_min 2")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("vel_max -1")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("tau_min 1")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("nominal 9")), ValidationError);
  CHECK_THROWS_AS(parse(base_text() + arm_text("inertia -1 0 0 -1 0 -1")),
                  ValidationError);

  // Duplicate names.
  CHECK_THROWS_AS(parse(base_text() + arm_text("") + arm_text("")), ValidationError);

  // Feet.
  const std::string good = base_text() + arm_text("");
  const std::string tip = "foot {\n  name tip\n  link arm\n  offset 0 0 0\n  radius 0.02\n}\n";
  CHECK_NOTHROW(parse(good + tip));
  CHECK_THROWS_AS(
      parse(good + "foot {\n  name tip\n  link no\n  offset 0 0 0\n  radius 0.02\n}\n"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(good + "foot {\n  name tip\n  link base\n  offset 0 0 0\n  radius 0.02\n}\n"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(good + "foot {\n  name tip\n  link arm\n  offset 0 0 0\n  radius 0\n}\n"),
      ValidationError);
  CHECK_THROWS_AS(parse(good + tip + tip), ValidationError);
}
