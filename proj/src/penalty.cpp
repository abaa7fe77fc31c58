#include "ipmm/penalty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ipmm {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Penalty::Penalty(PenaltyKind kind, double eps, double q)
    : kind_(kind), eps_(eps), q_(q) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("Penalty: eps must be positive and finite");
  if (kind == PenaltyKind::Power && !(q > 0.0 && q < 1.0))
    throw std::invalid_argument("Penalty: power exponent q must lie in (0,1)");
}

Penalty Penalty::from_name(std::string_view name, double eps, double q) {
  const std::string n = lower(name);
  if (n == "abs") return Penalty(PenaltyKind::Abs, eps, q);
  if (n == "log") return Penalty(PenaltyKind::Log, eps, q);
  if (n == "rational") return Penalty(PenaltyKind::Rational, eps, q);
  if (n == "exp") return Penalty(PenaltyKind::Exp, eps, q);
  if (n == "power") return Penalty(PenaltyKind::Power, eps, q);
  if (n == "atan") return Penalty(PenaltyKind::Atan, eps, q);
  throw std::invalid_argument("Penalty: unknown kind '" + std::string(name) + "'");
}

const char* Penalty::name() const {
  switch (kind_) {
    case PenaltyKind::Abs: return "abs";
    case PenaltyKind::Log: return "log";
    case PenaltyKind::Rational: return "rational";
    case PenaltyKind::Exp: return "exp";
    case PenaltyKind::Power: return "power";
    case PenaltyKind::Atan: return "atan";
  }
  return "?";
}

double Penalty::theta(double t) const {
  switch (kind_) {
    case PenaltyKind::Abs:
      return t;
    case PenaltyKind::Log:
      return std::log(t + eps_) - std::log(eps_);
    case PenaltyKind::Rational:
      return t / (t + eps_);
    case PenaltyKind::Exp:
      // -expm1 keeps full precision for small eps*t.
      return -std::expm1(-eps_ * t) / -std::expm1(-eps_);
    case PenaltyKind::Power:
      // Normalized so theta(0) = 0; the shift changes no gradient or argmin.
      return std::pow(t + eps_, q_) - std::pow(eps_, q_);
    case PenaltyKind::Atan: {
      const double s = std::sqrt(3.0);
      return (2.0 / s) * std::atan((1.0 + 2.0 * eps_ * t) / s) - kPi / (3.0 * s);
    }
  }
  return 0.0;
}

double Penalty::theta_prime(double t) const {
  switch (kind_) {
    case PenaltyKind::Abs:
      return 1.0;
    case PenaltyKind::Log:
      return 1.0 / (t + eps_);
    case PenaltyKind::Rational: {
      const double d = t + eps_;
      return eps_ / (d * d);
    }
    case PenaltyKind::Exp:
      return eps_ * std::exp(-eps_ * t) / -std::expm1(-eps_);
    case PenaltyKind::Power:
      return q_ * std::pow(t + eps_, q_ - 1.0);
    case PenaltyKind::Atan: {
      const double u = 1.0 + 2.0 * eps_ * t;
      return 4.0 * eps_ / (3.0 + u * u);
    }
  }
  return 0.0;
}

double Penalty::vartheta(const Grid& Z) const {
  if ((Z < 0.0).any())
    throw std::domain_error("vartheta: matrix must be entrywise nonnegative");
  double s = 0.0;
  for (Eigen::Index j = 0; j < Z.cols(); ++j)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) s += theta(Z(i, j));
  return s;
}

Grid Penalty::grad_vartheta(const Grid& Z) const {
  if ((Z < 0.0).any())
    throw std::domain_error("grad_vartheta: matrix must be entrywise nonnegative");
  Grid G(Z.rows(), Z.cols());
  for (Eigen::Index j = 0; j < Z.cols(); ++j)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) G(i, j) = theta_prime(Z(i, j));
  return G;
}

}  // namespace ipmm
