#pragma once

// Group elements for SO(3), SE(2) and SE(3), the coset section map and the
// twist function h(g, x) defined by g s(x) = s(g x) h(g, x).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace homharm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Smallest signed difference a - b on the circle, in (-pi, pi].
inline double angle_distance(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  return std::abs(d);
}

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  const double c = std::cos(a), s = std::sin(a);
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

inline Eigen::Matrix3d rot_y(double b) {
  Eigen::Matrix3d m;
  const double c = std::cos(b), s = std::sin(b);
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

/// Rotation in Z-Y-Z Euler angles: R = Rz(alpha) Ry(beta) Rz(gamma).
///
/// Canonical ranges are alpha, gamma in [0, 2pi) and beta in [0, pi]. At the
/// gimbal points beta in {0, pi} the rotation is stored with gamma = 0 and the
/// remaining angle folded into alpha, so every rotation has one parametrization.
struct Rotation3 {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  static Rotation3 identity() { return {}; }

  /// Builds a rotation from angles, canonicalizing the ranges.
  static Rotation3 from_euler(double alpha, double beta, double gamma) {
    return from_matrix(rot_z(alpha) * rot_y(beta) * rot_z(gamma));
  }

  static Rotation3 about_z(double a) { return {wrap_angle(a), 0.0, 0.0}; }

  static Rotation3 from_matrix(const Eigen::Matrix3d& r) {
    constexpr double kGimbal = 1e-12;
    Rotation3 out;
    const double sb = std::hypot(r(2, 0), r(2, 1));
    out.beta = std::atan2(sb, r(2, 2));
    if (sb > kGimbal) {
      out.alpha = wrap_angle(std::atan2(r(1, 2), r(0, 2)));
      out.gamma = wrap_angle(std::atan2(r(2, 1), -r(2, 0)));
    } else if (r(2, 2) > 0.0) {
      out.beta = 0.0;
      out.alpha = wrap_angle(std::atan2(r(1, 0), r(0, 0)));
      out.gamma = 0.0;
    } else {
      // Rz(a) Ry(pi) Rz(g) has r00 = -cos(a - g), r10 = -sin(a - g).
      out.beta = kPi;
      out.alpha = wrap_angle(std::atan2(-r(1, 0), -r(0, 0)));
      out.gamma = 0.0;
    }
    return out;
  }

  Eigen::Matrix3d matrix() const { return rot_z(alpha) * rot_y(beta) * rot_z(gamma); }

  Rotation3 inverse() const { return from_matrix(matrix().transpose()); }
};

inline Rotation3 compose(const Rotation3& a, const Rotation3& b) {
  return Rotation3::from_matrix(a.matrix() * b.matrix());
}

/// Rigid motion of the plane, translation a (cos phi, sin phi) then rotation theta.
struct SE2Element {
  double a = 0.0;
  double phi = 0.0;
  double theta = 0.0;

  static SE2Element identity() { return {}; }

  static SE2Element from_parts(const Eigen::Vector2d& t, double theta) {
    SE2Element g;
    g.a = t.norm();
    g.phi = g.a > 0.0 ? wrap_angle(std::atan2(t.y(), t.x())) : 0.0;
    g.theta = wrap_angle(theta);
    return g;
  }

  Eigen::Vector2d translation() const { return {a * std::cos(phi), a * std::sin(phi)}; }

  Eigen::Matrix2d rotation() const {
    Eigen::Matrix2d m;
    m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return m;
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m.topLeftCorner<2, 2>() = rotation();
    m.topRightCorner<2, 1>() = translation();
    return m;
  }

  SE2Element inverse() const {
    return from_parts(-(rotation().transpose() * translation()), -theta);
  }
};

inline SE2Element compose(const SE2Element& g1, const SE2Element& g2) {
  return SE2Element::from_parts(g1.translation() + g1.rotation() * g2.translation(),
                                g1.theta + g2.theta);
}

/// Rigid motion of space (x, R) acting as y -> R y + x.
struct SE3Element {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Rotation3 rotation;

  static SE3Element identity() { return {}; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = x;
    return m;
  }

  SE3Element inverse() const {
    const Eigen::Matrix3d rt = rotation.matrix().transpose();
    return {-(rt * x), Rotation3::from_matrix(rt)};
  }
};

inline SE3Element compose(const SE3Element& g1, const SE3Element& g2) {
  const Eigen::Matrix3d r1 = g1.rotation.matrix();
  return {g1.x + r1 * g2.x, Rotation3::from_matrix(r1 * g2.rotation.matrix())};
}

using GroupElement = std::variant<Rotation3, SE2Element, SE3Element>;

/// Composes two elements of the same group; mixing groups is an error.
inline GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
  if (g1.index() != g2.index()) {
    throw std::invalid_argument("compose: group elements belong to different groups");
  }
  return std::visit(
      [&](const auto& a) -> GroupElement {
        using T = std::decay_t<decltype(a)>;
        return compose(a, std::get<T>(g2));
      },
      g1);
}

inline GroupElement inverse(const GroupElement& g) {
  return std::visit([](const auto& a) -> GroupElement { return a.inverse(); }, g);
}

// ---------------------------------------------------------------------------
// S^2 = SO(3)/SO(2)

/// Point of the sphere in (azimuth alpha, colatitude beta). At the poles alpha is 0.
struct S2Point {
  double alpha = 0.0;
  double beta = 0.0;

  static S2Point north() { return {}; }

  static S2Point from_vector(const Eigen::Vector3d& v) {
    const double rho = std::hypot(v.x(), v.y());
    S2Point p;
    p.beta = std::atan2(rho, v.z());
    p.alpha = rho > 1e-300 ? wrap_angle(std::atan2(v.y(), v.x())) : 0.0;
    if (p.beta == 0.0 || p.beta == kPi) p.alpha = 0.0;
    return p;
  }

  Eigen::Vector3d vector() const {
    return {std::sin(beta) * std::cos(alpha), std::sin(beta) * std::sin(alpha), std::cos(beta)};
  }
};

inline S2Point act(const Rotation3& g, const S2Point& x) {
  return S2Point::from_vector(g.matrix() * x.vector());
}

/// Coset projection p(R) = R * north.
inline S2Point coset_point(const Rotation3& r) { return act(r, S2Point::north()); }

/// Section s(alpha, beta) = (alpha, beta, 0).
inline Rotation3 section(const S2Point& x) {
  if (x.beta == 0.0) return Rotation3::identity();
  return Rotation3{wrap_angle(x.alpha), x.beta, 0.0};
}

/// Twist angle theta with g s(x) = s(g x) Rz(theta), returned in [0, 2pi).
inline double twist(const Rotation3& g, const S2Point& x) {
  const S2Point gx = act(g, x);
  const Eigen::Matrix3d h =
      section(gx).matrix().transpose() * g.matrix() * section(x).matrix();
  return wrap_angle(std::atan2(h(1, 0), h(0, 0)));
}

// ---------------------------------------------------------------------------
// R^2 = SE(2)/SO(2) and R^3 = SE(3)/SO(3)

inline Eigen::Vector2d act(const SE2Element& g, const Eigen::Vector2d& x) {
  return g.rotation() * x + g.translation();
}

inline SE2Element section(const Eigen::Vector2d& x) { return SE2Element::from_parts(x, 0.0); }

/// For the semidirect product the twist is the rotation part of g, whatever x is.
inline double twist(const SE2Element& g, const Eigen::Vector2d& /*x*/) { return g.theta; }

inline Eigen::Vector3d act(const SE3Element& g, const Eigen::Vector3d& y) {
  return g.rotation.matrix() * y + g.x;
}

inline SE3Element section(const Eigen::Vector3d& x) { return {x, Rotation3::identity()}; }

inline Rotation3 twist(const SE3Element& g, const Eigen::Vector3d& /*x*/) { return g.rotation; }

}  // namespace homharm
