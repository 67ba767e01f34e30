#include "rdc/gauss.hpp"

#include <cmath>
#include <map>

namespace rdc {

namespace {

std::vector<QPoint> make_1d(int n) {
  std::vector<double> x, w;
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4:
      x = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
      w = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
      break;
    case 5:
      x = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
           0.9061798459386640};
      w = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
           0.2369268850561891};
      break;
    default:
      throw Error("gauss_1d: unsupported point count");
  }
  std::vector<QPoint> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = {Vec2(x[i], 0.0), w[i]};
  return r;
}

// Symmetric triangle rules; input weights are normalized to unit area and
// scaled by the reference area 1/2 here.
std::vector<QPoint> make_tri(int degree) {
  std::vector<QPoint> r;
  auto add = [&](double a, double b, double w) { r.push_back({Vec2(a, b), 0.5 * w}); };
  if (degree <= 2) {
    add(1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0);
    add(2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
    add(1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0);
  } else if (degree <= 5) {
    add(1.0 / 3.0, 1.0 / 3.0, 0.225);
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    add(a1, b1, w1);
    add(b1, a1, w1);
    add(b1, b1, w1);
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    add(a2, b2, w2);
    add(b2, a2, w2);
    add(b2, b2, w2);
  } else {
    const double a1 = 0.873821971016996, b1 = 0.063089014491502, w1 = 0.050844906370207;
    add(a1, b1, w1);
    add(b1, a1, w1);
    add(b1, b1, w1);
    const double a2 = 0.501426509658179, b2 = 0.249286745170910, w2 = 0.116786275726379;
    add(a2, b2, w2);
    add(b2, a2, w2);
    add(b2, b2, w2);
    const double a3 = 0.636502499121399, b3 = 0.310352451033785, c3 = 0.053145049844816,
                 w3 = 0.082851075618374;
    add(a3, b3, w3);
    add(a3, c3, w3);
    add(b3, a3, w3);
    add(b3, c3, w3);
    add(c3, a3, w3);
    add(c3, b3, w3);
  }
  return r;
}

std::vector<QPoint> make_quad(int n) {
  const auto& g = gauss_1d(n);
  std::vector<QPoint> r;
  r.reserve(g.size() * g.size());
  for (const auto& gy : g)
    for (const auto& gx : g) r.push_back({Vec2(gx.xi[0], gy.xi[0]), gx.w * gy.w});
  return r;
}

std::vector<QPoint3> make_hex(int n) {
  const auto& g = gauss_1d(n);
  std::vector<QPoint3> r;
  r.reserve(g.size() * g.size() * g.size());
  for (const auto& gz : g)
    for (const auto& gy : g)
      for (const auto& gx : g)
        r.push_back({Vec3(gx.xi[0], gy.xi[0], gz.xi[0]), gx.w * gy.w * gz.w});
  return r;
}

}  // namespace

const std::vector<QPoint>& gauss_1d(int n) {
  static const std::map<int, std::vector<QPoint>> rules = {
      {1, make_1d(1)}, {2, make_1d(2)}, {3, make_1d(3)}, {4, make_1d(4)}, {5, make_1d(5)}};
  auto it = rules.find(n);
  if (it == rules.end()) throw Error("gauss_1d: unsupported point count");
  return it->second;
}

const std::vector<QPoint>& gauss_tri(int degree) {
  static const std::vector<QPoint> deg2 = make_tri(2);
  static const std::vector<QPoint> deg5 = make_tri(5);
  static const std::vector<QPoint> deg6 = make_tri(6);
  if (degree <= 2) return deg2;
  if (degree <= 5) return deg5;
  return deg6;
}

const std::vector<QPoint>& gauss_quad(int n) {
  static const std::map<int, std::vector<QPoint>> rules = {
      {2, make_quad(2)}, {3, make_quad(3)}, {4, make_quad(4)}, {5, make_quad(5)}};
  auto it = rules.find(n);
  if (it == rules.end()) throw Error("gauss_quad: unsupported point count");
  return it->second;
}

const std::vector<QPoint3>& gauss_hex(int n) {
  static const std::map<int, std::vector<QPoint3>> rules = {{2, make_hex(2)}, {3, make_hex(3)}};
  auto it = rules.find(n);
  if (it == rules.end()) throw Error("gauss_hex: unsupported point count");
  return it->second;
}

}  // namespace rdc
