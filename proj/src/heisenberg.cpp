#include <cmath>
#include <sstream>

#include "kcurv/heisenberg.hpp"

namespace kcurv {

using cxd = std::complex<double>;

double ModelConvention::kappa() const {
  double k = 1.0;
  for (int i = 1; i <= n; ++i) k *= 4.0 * i;
  return k;
}

void ModelConvention::validate() const {
  if (n < 1 || n > 16) throw validation_error("n out of range [1,16]");
  if (!(levi_scale > 0.0)) {
    throw validation_error("levi_scale must be positive");
  }
  if (frame_sign != 1.0 && frame_sign != -1.0) {
    throw validation_error("frame_sign must be +1 or -1");
  }
}

HPoint::HPoint(Eigen::VectorXd coords) : v(std::move(coords)) {
  if (v.size() < 3 || v.size() % 2 == 0) {
    throw validation_error("point dimension must be 2n+1");
  }
  if (!v.allFinite()) throw validation_error("point has non-finite entries");
}

namespace {

/// One frame direction T_a (bar = false) or conj(T_a) (bar = true),
/// expanded over the real slots it touches:
///   T_a  = 1/2 d/dx_a - i/2 d/dy_a + i s conj(z^a) d/dt
///   T_a~ = 1/2 d/dx_a + i/2 d/dy_a - i s z^a d/dt
/// The t-coefficient is linear in (x_a, y_a); its slot-derivatives are the
/// dct terms below, and its second derivatives vanish.
struct FrameDir {
  int xs, ys, ts;  // slots
  cxd cx, cy, ct;
  cxd dct_x, dct_y;

  FrameDir(int a, bool bar, const HPoint& p, const ModelConvention& conv) {
    const int n = conv.n;
    const double s = conv.frame_sign;
    xs = a;
    ys = n + a;
    ts = 2 * n;
    cx = 0.5;
    cy = bar ? cxd(0.0, 0.5) : cxd(0.0, -0.5);
    const cxd i_s(0.0, s);
    if (bar) {
      ct = -i_s * p.z(a);
      dct_x = -i_s;
      dct_y = cxd(s, 0.0);
    } else {
      ct = i_s * std::conj(p.z(a));
      dct_x = i_s;
      dct_y = cxd(s, 0.0);
    }
  }

  [[nodiscard]] cxd dct(int slot) const {
    if (slot == xs) return dct_x;
    if (slot == ys) return dct_y;
    return 0.0;
  }
};

/// complex 2-jet of (D u) over real slots, D a frame direction
struct CJet2 {
  cxd v;
  Eigen::VectorXcd g;
  Eigen::MatrixXcd H;
};

/// complex 1-jet of (D2 D1 u)
struct CJet1 {
  cxd v;
  Eigen::VectorXcd g;
};

CJet2 apply1(const Jet3& j, const FrameDir& D) {
  const int d = j.d;
  CJet2 r;
  r.v = D.cx * j.g(D.xs) + D.cy * j.g(D.ys) + D.ct * j.g(D.ts);
  r.g.resize(d);
  r.H.resize(d, d);
  for (int b = 0; b < d; ++b) {
    r.g(b) = D.cx * j.h(D.xs, b) + D.cy * j.h(D.ys, b) + D.ct * j.h(D.ts, b) +
             D.dct(b) * j.g(D.ts);
  }
  for (int b = 0; b < d; ++b) {
    for (int c = 0; c < d; ++c) {
      r.H(b, c) = D.cx * j.t3(D.xs, b, c) + D.cy * j.t3(D.ys, b, c) +
                  D.ct * j.t3(D.ts, b, c) + D.dct(b) * j.h(D.ts, c) +
                  D.dct(c) * j.h(D.ts, b);
    }
  }
  return r;
}

CJet1 apply2(const CJet2& a, const FrameDir& D) {
  const int d = static_cast<int>(a.g.size());
  CJet1 r;
  r.v = D.cx * a.g(D.xs) + D.cy * a.g(D.ys) + D.ct * a.g(D.ts);
  r.g.resize(d);
  for (int b = 0; b < d; ++b) {
    r.g(b) = D.cx * a.H(D.xs, b) + D.cy * a.H(D.ys, b) + D.ct * a.H(D.ts, b) +
             D.dct(b) * a.g(D.ts);
  }
  return r;
}

cxd apply3(const CJet1& a, const FrameDir& D) {
  return D.cx * a.g(D.xs) + D.cy * a.g(D.ys) + D.ct * a.g(D.ts);
}

}  // namespace

CovariantJet frame_derivatives(const Jet3& jet, const HPoint& point,
                               const ModelConvention& conv) {
  conv.validate();
  const int n = conv.n;
  if (jet.d != conv.dim() || point.v.size() != conv.dim()) {
    throw validation_error("jet/point dimension does not match convention");
  }

  std::vector<FrameDir> T, Tb;
  T.reserve(n);
  Tb.reserve(n);
  for (int a = 0; a < n; ++a) {
    T.emplace_back(a, false, point, conv);
    Tb.emplace_back(a, true, point, conv);
  }

  std::vector<CJet2> Au(n), Abu(n);  // T_a u, T_a~ u as 2-jets
  for (int a = 0; a < n; ++a) {
    Au[a] = apply1(jet, T[a]);
    Abu[a] = apply1(jet, Tb[a]);
  }

  CovariantJet cj;
  cj.n = n;
  cj.u = jet.v;
  cj.u0 = jet.g(2 * n);
  cj.u_alpha.resize(n);
  for (int a = 0; a < n; ++a) cj.u_alpha(a) = Au[a].v;

  cj.u_albe_bar.resize(n, n);
  cj.u_bebar_al.resize(n, n);
  cj.u_alpha_beta.resize(n, n);
  cj.third.assign(n, Eigen::MatrixXcd(n, n));
  cj.third_ba.assign(n, Eigen::MatrixXcd(n, n));

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const CJet1 ab_bar = apply2(Au[a], Tb[b]);   // T_b~ T_a u
      const CJet1 bbar_a = apply2(Abu[b], T[a]);   // T_a T_b~ u
      const CJet1 ab = apply2(Au[a], T[b]);        // T_b T_a u
      cj.u_albe_bar(a, b) = ab_bar.v;
      cj.u_bebar_al(a, b) = bbar_a.v;
      cj.u_alpha_beta(a, b) = ab.v;
      for (int s = 0; s < n; ++s) {
        cj.third[s](a, b) = apply3(ab_bar, T[s]);
        cj.third_ba[s](a, b) = apply3(bbar_a, T[s]);
      }
    }
  }
  return cj;
}

CovariantJet frame_derivatives(const FieldExpr& u, const HPoint& point,
                               const ModelConvention& conv) {
  return frame_derivatives(eval_jet3(u, point.flat()), point, conv);
}

double sublaplacian(const CovariantJet& cj, const ModelConvention& conv) {
  const cxd tr = cj.u_albe_bar.trace() + cj.u_bebar_al.trace();
  const double re = -tr.real() / conv.levi_scale;
  const double im = tr.imag() / conv.levi_scale;
  if (std::abs(im) > 1e-10 * (1.0 + std::abs(re))) {
    std::ostringstream os;
    os << "sublaplacian imaginary residue " << im << " exceeds tolerance";
    throw check_error(os.str());
  }
  return re;
}

double grad_norm_sq(const CovariantJet& cj, const ModelConvention& conv) {
  return 2.0 * cj.u_alpha.squaredNorm() / conv.levi_scale;
}

}  // namespace kcurv
