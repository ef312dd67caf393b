// Sobolev-type norms of cochains.  W^{1,p} combines the field with d and d*
// terms; the public kind uses the plain sum of the three L^p norms.  The
// negative norm W^{-1,p} is computed through the (Delta + 1)-lift: solve
// (Delta + 1) u = f and take the quadratic W^{1,p'} norm of u with the dual
// exponent.  The quadratic (l2) combination is what makes the lift exact at
// p = 2, and it is also the combination used internally by the smoothing
// engine and the constants lab.
#pragma once

#include <map>
#include <memory>

#include "gaugedec/cochain.hpp"
#include "gaugedec/elliptic.hpp"

namespace gaugedec {

enum class NormKind { lp, w1p, wminus1p, l2grad };

struct NormReport {
  double p = 2.0;
  double value = 0.0;
  NormKind kind = NormKind::lp;
};

// Caches the (Delta + 1) lift operators per degree.  Lifts act on
// unconstrained cochains: natural absolute conditions on a box, periodic on
// a torus.
class NormContext {
public:
  explicit NormContext(const Grid& g) : grid_(&g) {}

  const Grid& grid() const { return *grid_; }

  const HodgeLaplacian& lift(int k) const {
    auto it = lifts_.find(k);
    if (it == lifts_.end()) {
      Bc bc = grid_->topology() == Topology::torus ? Bc::periodic : Bc::absolute;
      it = lifts_.emplace(k, std::make_shared<HodgeLaplacian>(*grid_, k, bc, TraceHandling::natural))
               .first;
    }
    return *it->second;
  }

private:
  const Grid* grid_;
  mutable std::map<int, std::shared_ptr<HodgeLaplacian>> lifts_;
};

// Sum combination, the spec'd W^{1,p} norm.
inline double w1p_norm(const Cochain& a, double p) {
  double v = lp_norm(a, p);
  if (a.degree < a.grid->dimension()) v += lp_norm(exterior_d(a), p);
  if (a.degree > 0) v += lp_norm(codifferential(a), p);
  return v;
}

// Quadratic combination; exact Hilbert norm at p = 2.
inline double w1p_quad_norm(const Cochain& a, double p) {
  double v = lp_norm(a, p);
  double s = v * v;
  if (a.degree < a.grid->dimension()) {
    double d = lp_norm(exterior_d(a), p);
    s += d * d;
  }
  if (a.degree > 0) {
    double d = lp_norm(codifferential(a), p);
    s += d * d;
  }
  return std::sqrt(s);
}

inline double l2grad_norm(const Cochain& a) {
  double s = 0.0;
  if (a.degree < a.grid->dimension()) {
    double d = l2_norm(exterior_d(a));
    s += d * d;
  }
  if (a.degree > 0) {
    double d = l2_norm(codifferential(a));
    s += d * d;
  }
  return std::sqrt(s);
}

inline double wminus1p_norm(const NormContext& ctx, const Cochain& f, double p) {
  Cochain u = ctx.lift(f.degree).solve_shifted(f, 1.0);
  double pdual = p / (p - 1.0);
  return w1p_quad_norm(u, pdual);
}

inline NormReport norm(const NormContext& ctx, const Cochain& a, double p, NormKind kind) {
  if (kind != NormKind::l2grad && p < 1.0) throw std::invalid_argument("norm requires p >= 1");
  NormReport r;
  r.p = p;
  r.kind = kind;
  switch (kind) {
    case NormKind::lp: r.value = lp_norm(a, p); break;
    case NormKind::w1p: r.value = w1p_norm(a, p); break;
    case NormKind::wminus1p:
      if (p <= 1.0) throw std::invalid_argument("wminus1p requires p > 1");
      r.value = wminus1p_norm(ctx, a, p);
      break;
    case NormKind::l2grad: r.value = l2grad_norm(a); break;
  }
  return r;
}

}  // namespace gaugedec
