#include "wbf/dynamics.hpp"

namespace wbf {

namespace {

using vector6_t = Eigen::Matrix<scalar_t, 6, 1>;
using matrix6_t = Eigen::Matrix<scalar_t, 6, 6>;

// Spatial inertia of one link about the reference point `ref` in world axes,
// for motion vectors [angular; linear-at-ref] (momentum pairs by plain dot).
matrix6_t spatial_inertia_about(const LinkKinematics& kin, const Link& link,
                                const vector3_t& ref) {
  const matrix3_t iw = kin.rot * link.inertia * kin.rot.transpose();
  const vector3_t d = kin.com - ref;
  const matrix3_t dx = skew(d);
  matrix6_t sp;
  sp.topLeftCorner<3, 3>() = iw - link.mass * dx * dx;
  sp.topRightCorner<3, 3>() = link.mass * dx;
  sp.bottomLeftCorner<3, 3>() = -link.mass * dx;
  sp.bottomRightCorner<3, 3>() = link.mass * matrix3_t::Identity();
  return sp;
}

}  // namespace

std::vector<LinkKinematics> forward_kinematics(const RobotModel& model,
                                               const GeneralizedState& state) {
  const int nl = static_cast<int>(model.links.size());
  if (state.q_j.size() != model.n_joints() || state.v.size() != model.n_v()) {
    throw DimensionError("state dimensions do not match the model");
  }
  std::vector<LinkKinematics> kin(static_cast<size_t>(nl));

  LinkKinematics& base = kin[0];
  base.rot = state.base_rot;
  base.origin = state.base_pos;
  base.com = state.base_pos + state.base_rot * model.links[0].com;
  base.axis.setZero();
  base.ang_vel = state.base_rot * state.omega_body();
  base.lin_vel = state.base_lin_vel();
  // The base angular velocity is expressed in body coordinates, so zero
  // generalized acceleration means d/dt(R w_body) = R (w x w) = 0: both bias
  // accelerations vanish at the root.
  base.ang_acc_bias.setZero();
  base.lin_acc_bias.setZero();

  for (int i = 1; i < nl; ++i) {
    const Link& link = model.links[static_cast<size_t>(i)];
    const LinkKinematics& par = kin[static_cast<size_t>(link.parent)];
    LinkKinematics& k = kin[static_cast<size_t>(i)];
    const scalar_t q = state.q_j[i - 1];
    const scalar_t qd = state.qd_j()[i - 1];

    const matrix3_t pre = par.rot * link.fixed_rot;
    k.rot = pre * Eigen::AngleAxisd(q, link.axis).toRotationMatrix();
    k.origin = par.origin + par.rot * link.origin;
    k.com = k.origin + k.rot * link.com;
    k.axis = pre * link.axis;

    const vector3_t r = k.origin - par.origin;
    k.ang_vel = par.ang_vel + k.axis * qd;
    k.lin_vel = par.lin_vel + par.ang_vel.cross(r);
    k.ang_acc_bias = par.ang_acc_bias + par.ang_vel.cross(k.axis) * qd;
    k.lin_acc_bias = par.lin_acc_bias + par.ang_acc_bias.cross(r) +
                     par.ang_vel.cross(par.ang_vel.cross(r));
  }
  return kin;
}

DynamicsTerms compute_dynamics(const RobotModel& model, const GeneralizedState& state) {
  const int n = model.n_joints();
  const int nv = model.n_v();
  const int nl = static_cast<int>(model.links.size());
  const int nc = model.n_feet();
  const auto kin = forward_kinematics(model, state);

  DynamicsTerms out;
  out.M.setZero(nv, nv);
  out.h.setZero(nv);
  out.J.setZero(3 * nc, nv);
  out.jdot_v.setZero(3 * nc);
  out.foot_pos.setZero(3 * nc);
  out.foot_vel.setZero(3 * nc);

  const vector3_t ref = state.base_pos;

  // Motion-subspace columns [angular; linear-at-ref] for every generalized
  // velocity: three world translations, three body-frame base rotations, and
  // one revolute axis per joint.
  matrix_t S(6, nv);
  S.setZero();
  S.block<3, 3>(3, 0).setIdentity();
  S.block<3, 3>(0, 3) = state.base_rot;
  for (int j = 0; j < n; ++j) {
    const LinkKinematics& k = kin[static_cast<size_t>(j + 1)];
    S.block<3, 1>(0, 6 + j) = k.axis;
    S.block<3, 1>(3, 6 + j) = k.axis.cross(ref - k.origin);
  }

  // Composite-rigid-body pass for M: accumulate subtree spatial inertias
  // leaf-to-root in the shared frame, then pair each joint's composite
  // momentum with the motion columns of all its ancestors.
  std::vector<matrix6_t> composite(static_cast<size_t>(nl));
  for (int i = 0; i < nl; ++i) {
    composite[static_cast<size_t>(i)] =
        spatial_inertia_about(kin[static_cast<size_t>(i)], model.links[static_cast<size_t>(i)], ref);
  }
  for (int i = nl - 1; i >= 1; --i) {
    composite[static_cast<size_t>(model.links[static_cast<size_t>(i)].parent)] +=
        composite[static_cast<size_t>(i)];
  }
  out.M.topLeftCorner<6, 6>() = S.leftCols<6>().transpose() * composite[0] * S.leftCols<6>();
  for (int j = 0; j < n; ++j) {
    const vector6_t f = composite[static_cast<size_t>(j + 1)] * S.col(6 + j);
    out.M(6 + j, 6 + j) = S.col(6 + j).dot(f);
    int anc = model.links[static_cast<size_t>(j + 1)].parent;
    while (anc > 0) {
      const int ja = 6 + anc - 1;
      out.M(ja, 6 + j) = S.col(ja).dot(f);
      out.M(6 + j, ja) = out.M(ja, 6 + j);
      anc = model.links[static_cast<size_t>(anc)].parent;
    }
    out.M.block<6, 1>(0, 6 + j) = S.leftCols<6>().transpose() * f;
    out.M.block<1, 6>(6 + j, 0) = out.M.block<6, 1>(0, 6 + j).transpose();
  }

  // Bias forces h: Newton-Euler wrenches at zero generalized acceleration,
  // accumulated leaf-to-root about each link origin.
  std::vector<vector3_t> force(static_cast<size_t>(nl));
  std::vector<vector3_t> moment(static_cast<size_t>(nl));
  for (int i = 0; i < nl; ++i) {
    const Link& link = model.links[static_cast<size_t>(i)];
    const LinkKinematics& k = kin[static_cast<size_t>(i)];
    const vector3_t rc = k.com - k.origin;
    const vector3_t com_acc = k.lin_acc_bias + k.ang_acc_bias.cross(rc) +
                              k.ang_vel.cross(k.ang_vel.cross(rc));
    const matrix3_t iw = k.rot * link.inertia * k.rot.transpose();
    const vector3_t f = link.mass * (com_acc - model.gravity);
    const vector3_t nn = iw * k.ang_acc_bias + k.ang_vel.cross(iw * k.ang_vel);
    force[static_cast<size_t>(i)] = f;
    moment[static_cast<size_t>(i)] = nn + rc.cross(f);
  }
  for (int i = nl - 1; i >= 1; --i) {
    const int p = model.links[static_cast<size_t>(i)].parent;
    const vector3_t rp = kin[static_cast<size_t>(i)].origin - kin[static_cast<size_t>(p)].origin;
    force[static_cast<size_t>(p)] += force[static_cast<size_t>(i)];
    moment[static_cast<size_t>(p)] +=
        moment[static_cast<size_t>(i)] + rp.cross(force[static_cast<size_t>(i)]);
    out.h[6 + i - 1] = kin[static_cast<size_t>(i)].axis.dot(moment[static_cast<size_t>(i)]);
  }
  out.h.head<3>() = force[0];
  out.h.segment<3>(3) = state.base_rot.transpose() * moment[0];

  // Foot quantities: point Jacobians, drift accelerations, positions,
  // velocities — all world frame.
  for (int c = 0; c < nc; ++c) {
    const Foot& foot = model.feet[static_cast<size_t>(c)];
    const LinkKinematics& k = kin[static_cast<size_t>(foot.link)];
    const vector3_t x = k.origin + k.rot * foot.offset;
    out.foot_pos.segment<3>(3 * c) = x;
    out.foot_vel.segment<3>(3 * c) = k.lin_vel + k.ang_vel.cross(x - k.origin);
    out.jdot_v.segment<3>(3 * c) =
        k.lin_acc_bias + k.ang_acc_bias.cross(x - k.origin) +
        k.ang_vel.cross(k.ang_vel.cross(x - k.origin));

    auto Jf = out.J.middleRows<3>(3 * c);
    Jf.leftCols<3>().setIdentity();
    Jf.middleCols<3>(3) = -skew(x - ref) * state.base_rot;
    int li = foot.link;
    while (li > 0) {
      Jf.col(6 + li - 1) = kin[static_cast<size_t>(li)].axis.cross(x - kin[static_cast<size_t>(li)].origin);
      li = model.links[static_cast<size_t>(li)].parent;
    }
  }

  return out;
}

vector_t forward_dynamics(const RobotModel& model, const DynamicsTerms& terms,
                          const vector_t& tau, const vector_t& f_grf) {
  const int n = model.n_joints();
  if (tau.size() != n) throw DimensionError("tau size does not match joint count");
  if (f_grf.size() != 3 * model.n_feet()) {
    throw DimensionError("f_grf size does not match foot count");
  }
  vector_t rhs = -terms.h;
  rhs.tail(n) += tau;
  rhs.noalias() += terms.J.transpose() * f_grf;

  Eigen::LDLT<matrix_t> ldlt(terms.M);
  const vector_t d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0 ||
      d.maxCoeff() / d.minCoeff() > 1e12) {
    throw NumericalError("mass matrix is numerically singular");
  }
  return ldlt.solve(rhs);
}

vector_t forward_dynamics(const RobotModel& model, const GeneralizedState& state,
                          const vector_t& tau, const vector_t& f_grf) {
  return forward_dynamics(model, compute_dynamics(model, state), tau, f_grf);
}

scalar_t total_energy(const RobotModel& model, const GeneralizedState& state) {
  const DynamicsTerms terms = compute_dynamics(model, state);
  const auto kin = forward_kinematics(model, state);
  scalar_t potential = 0.0;
  for (size_t i = 0; i < model.links.size(); ++i) {
    potential -= model.links[i].mass * model.gravity.dot(kin[i].com);
  }
  return 0.5 * state.v.dot(terms.M * state.v) + potential;
}

}  // namespace wbf
