#include "wbf/wbc_tasks.hpp"

#include <cmath>

namespace wbf {

namespace {

constexpr scalar_t kRoot2Half = 0.7071067811865476;  // sqrt(2)/2

void check_layout(const DecisionLayout& layout) {
  if (layout.nv != layout.nj + 6 || layout.nc < 0) {
    throw DimensionError("decision layout is inconsistent");
  }
}

}  // namespace

Task task_dynamic_consistency(const DynamicsTerms& dyn, const DecisionLayout& layout) {
  check_layout(layout);
  const int d = layout.dim();
  matrix_t A(layout.nv, d);
  A.setZero();
  A.block(0, layout.qdd_offset(), layout.nv, layout.nv) = dyn.M;
  A.block(0, layout.grf_offset(), layout.nv, 3 * layout.nc) = -dyn.J.transpose();
  A.block(6, layout.tau_offset(), layout.nj, layout.nj) =
      -matrix_t::Identity(layout.nj, layout.nj);
  return Task::equality(std::move(A), -dyn.h, 0, "dynamic_consistency");
}

Task task_kinematic_limits(const vector_t& q_min, const vector_t& q_max,
                           const vector_t& vel_max, const GeneralizedState& state,
                           scalar_t dt_horizon, const DecisionLayout& layout) {
  check_layout(layout);
  const int n = layout.nj;
  if (q_min.size() != n || q_max.size() != n || vel_max.size() != n) {
    throw DimensionError("joint limit vectors do not match the layout");
  }
  const int d = layout.dim();
  matrix_t D(4 * n, d);
  vector_t f(4 * n);
  D.setZero();
  const scalar_t inv_h2 = 2.0 / (dt_horizon * dt_horizon);
  for (int j = 0; j < n; ++j) {
    const scalar_t q = state.q_j[j];
    const scalar_t qd = state.qd_j()[j];
    const int col = layout.qdd_offset() + 6 + j;
    D(4 * j + 0, col) = 1.0;   // stay below the upper position limit
    f[4 * j + 0] = inv_h2 * (q_max[j] - q - dt_horizon * qd);
    D(4 * j + 1, col) = -1.0;  // stay above the lower position limit
    f[4 * j + 1] = -inv_h2 * (q_min[j] - q - dt_horizon * qd);
    D(4 * j + 2, col) = 1.0;   // velocity cap
    f[4 * j + 2] = (vel_max[j] - qd) / dt_horizon;
    D(4 * j + 3, col) = -1.0;
    f[4 * j + 3] = (vel_max[j] + qd) / dt_horizon;
  }
  return Task::inequality(std::move(D), std::move(f), 0, "kinematic_limits");
}

Task task_torque_limits(const vector_t& tau_min, const vector_t& tau_max,
                        const DecisionLayout& layout) {
  check_layout(layout);
  const int n = layout.nj;
  if (tau_min.size() != n || tau_max.size() != n) {
    throw DimensionError("torque limit vectors do not match the layout");
  }
  const int d = layout.dim();
  matrix_t D(2 * n, d);
  vector_t f(2 * n);
  D.setZero();
  for (int j = 0; j < n; ++j) {
    const int col = layout.tau_offset() + j;
    D(2 * j, col) = 1.0;
    f[2 * j] = tau_max[j];
    D(2 * j + 1, col) = -1.0;
    f[2 * j + 1] = -tau_min[j];
  }
  return Task::inequality(std::move(D), std::move(f), 0, "torque_limits");
}

Task task_joint_tracking(const vector_t& a_t, const GeneralizedState& state,
                         const vector_t& kp, const vector_t& kd,
                         const DecisionLayout& layout) {
  check_layout(layout);
  const int n = layout.nj;
  if (a_t.size() != n || kp.size() != n || kd.size() != n) {
    throw DimensionError("tracking target/gain sizes do not match the layout");
  }
  const int d = layout.dim();
  matrix_t A(n, d);
  A.setZero();
  A.block(0, layout.qdd_offset() + 6, n, n).setIdentity();
  const vector_t b =
      kp.cwiseProduct(a_t - state.q_j) - kd.cwiseProduct(vector_t(state.qd_j()));
  return Task::equality(std::move(A), b, 1, "joint_tracking");
}

Task task_contact_motion(const DynamicsTerms& dyn, const std::vector<bool>& contact,
                         const DecisionLayout& layout) {
  check_layout(layout);
  if (static_cast<int>(contact.size()) != layout.nc) {
    throw DimensionError("contact flag count does not match the layout");
  }
  int rows = 0;
  for (bool c : contact) rows += c ? 3 : 0;
  matrix_t A(rows, layout.dim());
  vector_t b(rows);
  A.setZero();
  int r = 0;
  for (int i = 0; i < layout.nc; ++i) {
    if (!contact[static_cast<size_t>(i)]) continue;
    A.block(r, layout.qdd_offset(), 3, layout.nv) = dyn.J.middleRows<3>(3 * i);
    b.segment<3>(r) = -dyn.jdot_v.segment<3>(3 * i);
    r += 3;
  }
  return Task::equality(std::move(A), std::move(b), 2, "contact_motion");
}

FootForceBounds compute_force_bounds(const TerrainParams& terrain,
                                     const std::vector<scalar_t>& foot_radii,
                                     const std::vector<bool>& contact,
                                     scalar_t total_weight, scalar_t mu_assumed,
                                     scalar_t xi_xy_max, scalar_t delta_max) {
  const int nc = static_cast<int>(foot_radii.size());
  if (static_cast<int>(contact.size()) != nc) {
    throw DimensionError("contact flag count does not match the radii");
  }
  FootForceBounds out;
  out.mu = mu_assumed;
  out.xi_xy_max = xi_xy_max;
  out.delta_max = delta_max;
  out.shear_factor = shear_saturation(terrain, xi_xy_max);
  out.f_z_max.resize(nc);
  out.cohesion_cap.resize(nc);
  out.f_xy_max.resize(nc);
  int in_contact = 0;
  for (bool c : contact) in_contact += c ? 1 : 0;
  const scalar_t weight_share = in_contact > 0 ? total_weight / in_contact : 0.0;
  for (int i = 0; i < nc; ++i) {
    const scalar_t radius = foot_radii[static_cast<size_t>(i)];
    out.f_z_max[i] = normal_force_capacity(terrain, radius, delta_max);
    out.cohesion_cap[i] = M_PI * radius * radius * terrain.a;
    out.f_xy_max[i] =
        out.shear_factor * (out.cohesion_cap[i] + mu_assumed * weight_share);
  }
  return out;
}

Task task_ft_interaction(const FootForceBounds& bounds, const std::vector<bool>& contact,
                         const DecisionLayout& layout) {
  check_layout(layout);
  if (static_cast<int>(contact.size()) != layout.nc ||
      bounds.f_z_max.size() != layout.nc) {
    throw DimensionError("force bound sizes do not match the layout");
  }
  const int d = layout.dim();
  matrix_t D(6 * layout.nc, d);
  vector_t f(6 * layout.nc);
  D.setZero();
  int r = 0;
  const scalar_t s = bounds.shear_factor;
  for (int i = 0; i < layout.nc; ++i) {
    const int fx = layout.grf_offset() + 3 * i;
    if (contact[static_cast<size_t>(i)]) {
      const scalar_t shear_rhs = kRoot2Half * s * bounds.cohesion_cap[i];
      for (int axis = 0; axis < 2; ++axis) {
        for (scalar_t sign : {1.0, -1.0}) {
          D(r, fx + axis) = sign;
          D(r, fx + 2) = -kRoot2Half * s * bounds.mu;
          f[r] = shear_rhs;
          ++r;
        }
      }
      D(r, fx + 2) = 1.0;  // normal force below the sinkage capacity
      f[r] = bounds.f_z_max[i];
      ++r;
      D(r, fx + 2) = -1.0;  // soil cannot pull the foot down
      f[r] = 0.0;
      ++r;
    } else {
      for (int axis = 0; axis < 3; ++axis) {  // swing feet carry no force
        D(r, fx + axis) = 1.0;
        f[r] = 0.0;
        ++r;
        D(r, fx + axis) = -1.0;
        f[r] = 0.0;
        ++r;
      }
    }
  }
  return Task::inequality(std::move(D), std::move(f), 2, "ft_interaction");
}

Task task_body_stabilization(const DecisionLayout& layout) {
  check_layout(layout);
  matrix_t A(3, layout.dim());
  A.setZero();
  A(0, layout.qdd_offset() + 2) = 1.0;  // vertical acceleration
  A(1, layout.qdd_offset() + 3) = 1.0;  // roll rate derivative
  A(2, layout.qdd_offset() + 4) = 1.0;  // pitch rate derivative
  return Task::equality(std::move(A), vector_t::Zero(3), 3, "body_stabilization");
}

}  // namespace wbf
