#pragma once

#include <functional>
#include <string>

#include "genpanis/common.hpp"

namespace genpanis {

enum class PdeKind { Darcy, Helmholtz };

inline std::string to_string(PdeKind k) { return k == PdeKind::Darcy ? "darcy" : "helmholtz"; }
inline PdeKind pde_kind_from_string(const std::string& s) {
  if (s == "darcy") return PdeKind::Darcy;
  if (s == "helmholtz") return PdeKind::Helmholtz;
  throw error("unknown PDE kind '" + s + "' (expected darcy|helmholtz)");
}

/// Boundary-value function u0(s1, s2) on the domain boundary.
using DirichletFn = std::function<double(double, double)>;

/// Darcy:      div(-c grad u) = f   with u = u0 on the boundary
/// Helmholtz:  lap u + w^2 c u = 0  with u = u0 on the boundary
struct PdeProblem {
  PdeKind kind = PdeKind::Darcy;
  double source = 100.0;  // f (Darcy only)
  double omega = 1.0;     // angular frequency (Helmholtz only)
  DirichletFn dirichlet;

  static PdeProblem darcy(double f = 100.0, double u0 = 0.0) {
    PdeProblem p;
    p.kind = PdeKind::Darcy;
    p.source = f;
    p.dirichlet = [u0](double, double) { return u0; };
    return p;
  }
  static PdeProblem helmholtz(double omega = 1.0, double u0 = 1.0) {
    PdeProblem p;
    p.kind = PdeKind::Helmholtz;
    p.omega = omega;
    p.dirichlet = [u0](double, double) { return u0; };
    return p;
  }
  PdeProblem with_dirichlet(DirichletFn fn) const {
    PdeProblem p = *this;
    p.dirichlet = std::move(fn);
    return p;
  }
  /// The out-of-distribution boundary condition u0 = 5 (s1 + s2).
  static DirichletFn ramp_bc() {
    return [](double x, double y) { return 5.0 * (x + y); };
  }
};

}  // namespace genpanis
