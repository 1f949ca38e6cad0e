#include "wbf/robot_model.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <set>
#include <sstream>

namespace wbf {

namespace {

matrix3_t rpy_to_matrix(const vector_t& rpy) {
  return (Eigen::AngleAxisd(rpy[2], vector3_t::UnitZ()) *
          Eigen::AngleAxisd(rpy[1], vector3_t::UnitY()) *
          Eigen::AngleAxisd(rpy[0], vector3_t::UnitX()))
      .toRotationMatrix();
}

matrix3_t inertia_from_six(const vector_t& v) {
  matrix3_t m;
  m << v[0], v[1], v[2],
       v[1], v[3], v[4],
       v[2], v[4], v[5];
  return m;
}

void validate_inertia(const matrix3_t& inertia, const std::string& link_name) {
  Eigen::SelfAdjointEigenSolver<matrix3_t> es(inertia);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("link '" + link_name + "': inertia is not positive semidefinite");
  }
}

}  // namespace

scalar_t RobotModel::total_mass() const {
  scalar_t m = 0.0;
  for (const auto& l : links) m += l.mass;
  return m;
}

int RobotModel::find_link(const std::string& name) const {
  for (size_t i = 0; i < links.size(); ++i) {
    if (links[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

vector_t RobotModel::joint_lower() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).q_min;
  return v;
}

vector_t RobotModel::joint_upper() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).q_max;
  return v;
}

vector_t RobotModel::joint_vel_max() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).vel_max;
  return v;
}

vector_t RobotModel::tau_lower() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).tau_min;
  return v;
}

vector_t RobotModel::tau_upper() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).tau_max;
  return v;
}

vector_t RobotModel::nominal_posture() const {
  vector_t v(n_joints());
  for (int j = 0; j < n_joints(); ++j) v[j] = joint_link(j).nominal;
  return v;
}

void GeneralizedState::renormalize_rotation() {
  base_rot = quaternion_t(base_rot).normalized().toRotationMatrix();
}

GeneralizedState GeneralizedState::neutral(const RobotModel& model) {
  GeneralizedState s;
  s.q_j = model.nominal_posture();
  s.v = vector_t::Zero(model.n_v());
  return s;
}

RobotModel parse_robot(const ConfigNode& root, const std::string& origin) {
  RobotModel model;
  model.schema_version = static_cast<int>(root.get_int("schema_version", -1));
  if (model.schema_version != 1) {
    throw ValidationError(origin + ": schema_version must be 1");
  }
  model.name = root.get_string("name", "robot");
  if (root.has("gravity")) model.gravity = root.require_vector("gravity", 3);

  std::set<std::string> names;
  for (const ConfigNode* node : root.sections("link")) {
    Link link;
    link.name = node->require_string("name");
    if (!names.insert(link.name).second) {
      throw ValidationError("duplicate link name '" + link.name + "'");
    }
    link.mass = node->require_scalar("mass");
    if (link.mass <= 0.0) {
      throw ValidationError("link '" + link.name + "': mass must be positive");
    }
    link.com = node->require_vector("com", 3);
    link.inertia = inertia_from_six(node->require_vector("inertia", 6));
    validate_inertia(link.inertia, link.name);

    if (model.links.empty()) {
      if (node->has("parent")) {
        throw ValidationError("first link '" + link.name + "' is the base and cannot have a parent");
      }
      model.links.push_back(std::move(link));
      continue;
    }

    const std::string parent_name = node->require_string("parent");
    link.parent = model.find_link(parent_name);
    if (link.parent < 0) {
      throw ValidationError("link '" + link.name + "': parent '" + parent_name +
                            "' not defined above it");
    }
    link.origin = node->require_vector("origin", 3);
    // `rpy` is the authoring form; `rot` (9 values, row-major) is what the
    // serializer emits so reloads reproduce the matrix exactly.
    if (node->has("rot")) {
      const vector_t r = node->require_vector("rot", 9);
      link.fixed_rot = Eigen::Map<const Eigen::Matrix<scalar_t, 3, 3, Eigen::RowMajor>>(r.data());
    } else if (node->has("rpy")) {
      link.fixed_rot = rpy_to_matrix(node->require_vector("rpy", 3));
    }
    link.axis = node->require_vector("axis", 3);
    if (link.axis.norm() < 1e-9) {
      throw ValidationError("link '" + link.name + "': joint axis is zero");
    }
    link.axis.normalize();
    link.q_min = node->require_scalar("q_min");
    link.q_max = node->require_scalar("q_max");
    if (link.q_min >= link.q_max) {
      throw ValidationError("link '" + link.name + "': q_min must be below q_max");
    }
    link.vel_max = node->require_scalar("vel_max");
    if (link.vel_max <= 0.0) {
      throw ValidationError("link '" + link.name + "': vel_max must be positive");
    }
    link.tau_min = node->require_scalar("tau_min");
    link.tau_max = node->require_scalar("tau_max");
    if (link.tau_min > 0.0 || link.tau_max < 0.0 || link.tau_min >= link.tau_max) {
      throw ValidationError("link '" + link.name + "': torque limits must straddle zero");
    }
    link.nominal = node->get_scalar("nominal", 0.0);
    if (link.nominal < link.q_min || link.nominal > link.q_max) {
      throw ValidationError("link '" + link.name + "': nominal angle outside joint limits");
    }
    link.hip_yaw = node->get_bool("hip_yaw", false);
    model.links.push_back(std::move(link));
  }
  if (model.links.empty()) {
    throw ValidationError(origin + ": no link sections");
  }

  std::set<std::string> foot_names;
  for (const ConfigNode* node : root.sections("foot")) {
    Foot foot;
    foot.name = node->require_string("name");
    if (!foot_names.insert(foot.name).second) {
      throw ValidationError("duplicate foot name '" + foot.name + "'");
    }
    const std::string link_name = node->require_string("link");
    foot.link = model.find_link(link_name);
    if (foot.link < 0) {
      throw ValidationError("foot '" + foot.name + "': unknown link '" + link_name + "'");
    }
    if (foot.link == 0) {
      throw ValidationError("foot '" + foot.name + "': cannot attach to the base");
    }
    foot.offset = node->require_vector("offset", 3);
    foot.radius = node->require_scalar("radius");
    if (foot.radius <= 0.0) {
      throw ValidationError("foot '" + foot.name + "': radius must be positive");
    }
    model.feet.push_back(std::move(foot));
  }
  return model;
}

RobotModel load_robot(const std::string& path) {
  return parse_robot(load_config_file(path), path);
}

std::string serialize_robot(const RobotModel& model) {
  ConfigWriter w;
  w.entry("schema_version", static_cast<long>(model.schema_version));
  w.entry("name", model.name);
  w.entry("gravity", vector3_t(model.gravity));
  for (size_t i = 0; i < model.links.size(); ++i) {
    const Link& l = model.links[i];
    w.blank();
    w.open("link");
    w.entry("name", l.name);
    if (l.parent >= 0) {
      w.entry("parent", model.links[static_cast<size_t>(l.parent)].name);
      w.entry("origin", l.origin);
      vector_t rot(9);
      Eigen::Map<Eigen::Matrix<scalar_t, 3, 3, Eigen::RowMajor>>(rot.data()) = l.fixed_rot;
      w.entry("rot", rot);
      w.entry("axis", l.axis);
    }
    w.entry("mass", l.mass);
    w.entry("com", l.com);
    vector_t in6(6);
    in6 << l.inertia(0, 0), l.inertia(0, 1), l.inertia(0, 2),
           l.inertia(1, 1), l.inertia(1, 2), l.inertia(2, 2);
    w.entry("inertia", in6);
    if (l.parent >= 0) {
      w.entry("q_min", l.q_min);
      w.entry("q_max", l.q_max);
      w.entry("vel_max", l.vel_max);
      w.entry("tau_min", l.tau_min);
      w.entry("tau_max", l.tau_max);
      w.entry("nominal", l.nominal);
      if (l.hip_yaw) w.entry("hip_yaw", std::string("true"));
    }
    w.close();
  }
  for (const Foot& f : model.feet) {
    w.blank();
    w.open("foot");
    w.entry("name", f.name);
    w.entry("link", model.links[static_cast<size_t>(f.link)].name);
    w.entry("offset", f.offset);
    w.entry("radius", f.radius);
    w.close();
  }
  return w.str();
}

}  // namespace wbf
