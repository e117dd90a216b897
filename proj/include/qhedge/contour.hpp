#ifndef QHEDGE_CONTOUR_HPP_
#define QHEDGE_CONTOUR_HPP_

#include <cstddef>
#include <vector>

#include "qhedge/additive.hpp"
#include "qhedge/levy.hpp"

namespace qhedge {

enum class PayoffKind { Call, Put, Custom };

struct ContourAtom {
  complexd z;
  complexd weight;
};

// Vertical line at Re z = abscissa carrying the density
// g(z) = K^{1-z} / (2*pi*i * z (z-1)) against dz.
struct ContourLine {
  double abscissa;
  double strike;
  complexd density(complexd z) const;  // without the 1/(2*pi*i) prefactor
};

// Finite complex measure: atoms plus strike-kernel vertical lines.
// Calls are represented as the atom (1, 1) plus a line with 0 < R < 1
// (the line alone represents payoff - s); puts as a single line, R < 0.
class ContourMeasure {
 public:
  static ContourMeasure call(double strike, double abscissa = 0.5);
  static ContourMeasure put(double strike, double abscissa = -1.0);
  // Single atom s^z; used for claims proportional to a power of S_T.
  static ContourMeasure single_power(complexd z, complexd weight = 1.0);

  PayoffKind kind() const { return kind_; }
  double strike() const { return strike_; }
  const std::vector<ContourAtom>& atoms() const { return atoms_; }
  const std::vector<ContourLine>& lines() const { return lines_; }

  // The (kinked) payoff function itself.
  double payoff(double s) const;

  // High-accuracy evaluation of the contour representation at s:
  // resolved Gauss-Legendre panels plus an analytic tail (exponential
  // integral).  Agrees with payoff() to ~1e-10 * strike.
  double value(double s) const;

 private:
  PayoffKind kind_ = PayoffKind::Custom;
  double strike_ = 0.0;
  std::vector<ContourAtom> atoms_;
  std::vector<ContourLine> lines_;
};

// Picks an admissible line abscissa for the given model: 1/2 for calls,
// -1 for puts, the put abscissa shrinking geometrically toward 0 until
// the admissibility points sit inside the driver strip with 5% margin.
// Throws ModelError when no abscissa works.
double choose_abscissa(PayoffKind kind, const AdditiveModel& model);

// Verifies that every admissibility point of the measure (doubled
// support, support + 1, and the points 1, 2) stays inside the driver
// strip under both loading extremes.  Throws ModelError otherwise.
void ensure_admissible(const ContourMeasure& measure, const AdditiveModel& model);

struct QuadratureOptions {
  // Tolerance relative to the strike scale.
  double rel_tol = 1e-8;
  // Exponential damping rate per unit |Im z| contributed by the model at
  // the evaluation times (0 means none is available).
  double decay_rate = 0.0;
  // Largest |ln(s/K)| the node layout must resolve.
  double osc_theta_max = 2.0;
  // Smallest |ln(s/K)| used in the truncation bound when undamped.
  double osc_theta_floor = 0.04;
  // For double-contour (pair) sums the truncated mass scales like the
  // cube of the cutoff, which shortens the line considerably.
  bool paired_tail = false;
  std::size_t max_nodes = std::size_t(1) << 20;
};

struct QuadratureNode {
  complexd z;
  complexd weight;
};

// One discretized vertical line: nodes on the upper half (u > 0,
// ascending); the mirrored conjugate nodes are implied.
struct LineQuadrature {
  double abscissa;
  double strike;
  double truncation;
  std::vector<double> u;
  std::vector<complexd> weight;
};

class ContourQuadrature {
 public:
  ContourQuadrature(std::vector<ContourAtom> atoms, std::vector<LineQuadrature> lines,
                    double rel_tol);

  const std::vector<ContourAtom>& atoms() const { return atoms_; }
  const std::vector<LineQuadrature>& lines() const { return lines_; }
  double rel_tol() const { return rel_tol_; }
  double strike_scale() const;

  // Full conjugate-closed node list: for each line the +u nodes followed
  // by their mirror images with conjugated weights.
  std::vector<QuadratureNode> nodes() const;
  std::size_t node_count() const;  // size of nodes()

  // Payoff reconstruction: atoms + line sums + analytic truncation tails.
  double reconstruct(double s) const;
  // Bound on the truncated tail mass that a plain node sum (no tail
  // correction) misses at spot s.
  double tail_bound(double s) const;

 private:
  std::vector<ContourAtom> atoms_;
  std::vector<LineQuadrature> lines_;
  double rel_tol_;
};

ContourQuadrature discretize(const ContourMeasure& measure, const QuadratureOptions& opts = {});

// exp integral E1 for complex arguments (|arg| < pi); exposed for tests.
complexd expint_e1(complexd zeta);

// Truncation tail of a strike-kernel line integral: the exact value of
// (K e^{R theta}/pi) * Re \int_U^inf e^{i u theta} / (z(z-1)) du with
// z = R + iu and theta = ln(s/K).
double line_tail(const ContourLine& line, double truncation, double s);

}  // namespace qhedge

#endif  // QHEDGE_CONTOUR_HPP_
