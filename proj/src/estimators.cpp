#include "cutflux/estimators.hpp"

#include <cmath>
#include <ostream>

namespace cutflux {

FluxEval flux_eval(const GlobalIRTFlux& sigma) {
  return [&sigma](int t, int i, const Vec2& x) { return sigma.value(t, i, x); };
}

FluxEval flux_eval(const std::array<SubdomainRTFlux, kNumPhases>& sigma) {
  return [&sigma](int t, int i, const Vec2& x) { return sigma[i].value(t, x); };
}

double PerEntity::euclidean() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

PerEntity eta_cell(const FluxEval& sigma, const PrimalField& u, const ProblemData& data, int refinements) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  PerEntity out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double s = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      if (topology.piece_area(t, i) == 0.0) continue;
      const Vec2 ku = data.k[i] * u.gradient(i, t);
      const QuadratureRule rule = topology.region_rule(t, i, kSourceQuadratureDegree, refinements);
      s += rule.integrate([&](const Vec2& x) { return (sigma(t, i, x) - ku).squaredNorm(); }) / data.k[i];
    }
    out.ids.push_back(t);
    out.values.push_back(std::sqrt(s));
  }
  return out;
}

InterfaceIndicators eta_interface(const FluxEval& sigma, const PrimalField& u, const ProblemData& data) {
  const CutTopology& topology = u.topology();
  const Mesh& mesh = topology.mesh();
  const InterfaceWeights w = data.weights();
  InterfaceIndicators out;
  for (int e : topology.cut_edges()) {
    const Edge& edge = mesh.edge(e);
    const double h = edge.length;
    std::array<Segment, kNumPhases> frag{topology.edge_fragment(e, 0), topology.edge_fragment(e, 1)};
    // Edge mean of the normal trace seen from one neighbour.
    auto mean = [&](int t) {
      double s = 0.0;
      for (int i = 0; i < kNumPhases; ++i) {
        const QuadratureRule rule = segment_rule(frag[i].a, frag[i].b, 2);
        s += rule.integrate([&](const Vec2& x) { return sigma(t, i, x).dot(edge.normal); });
      }
      return s / h;
    };
    const double mean_minus = mean(edge.minus);
    const double mean_plus = edge.boundary() ? 0.0 : mean(edge.plus);
    double s = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      const QuadratureRule rule = segment_rule(frag[i].a, frag[i].b, 4);
      s += rule.integrate([&](const Vec2& x) {
        double d = sigma(edge.minus, i, x).dot(edge.normal) - mean_minus;
        if (!edge.boundary()) d -= sigma(edge.plus, i, x).dot(edge.normal) - mean_plus;
        return d * d;
      });
    }
    out.edges.ids.push_back(e);
    out.edges.values.push_back(std::sqrt(h / w.k_gamma * s));
  }
  for (const CutCell& cell : topology.cut_cells()) {
    const QuadratureRule rule = segment_rule(cell.gamma.a, cell.gamma.b, 2);
    const double j2 = rule.integrate([&](const Vec2& x) {
      const double j = u.jump(cell.triangle, x);
      return j * j;
    });
    out.cells.ids.push_back(cell.triangle);
    out.cells.values.push_back(std::sqrt(w.k_max) / mesh.diameter(cell.triangle) * std::sqrt(j2));
  }
  return out;
}

PerEntity data_oscillation(const CutTopology& topology, const ProblemData& data, int refinements) {
  const Mesh& mesh = topology.mesh();
  const InterfaceWeights w = data.weights();
  PerEntity out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::array<QuadratureRule, kNumPhases> rules;
    double integral = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      rules[i] = topology.region_rule(t, i, kSourceQuadratureDegree, refinements);
      integral += rules[i].integrate([&](const Vec2& x) { return data.source(i, x); });
    }
    const double mean = integral / mesh.area(t);
    double s = 0.0;
    for (int i = 0; i < kNumPhases; ++i) {
      s += rules[i].integrate([&](const Vec2& x) {
        const double d = data.source(i, x) - mean;
        return d * d;
      });
    }
    const double k_t = topology.triangle_cut(t) ? w.k_gamma : data.k[topology.triangle_phase(t)];
    const double h = mesh.diameter(t);
    out.ids.push_back(t);
    out.values.push_back(std::sqrt(h * h / k_t * s));
  }
  return out;
}

EstimatorReport estimate(const FluxEval& sigma, const PrimalField& u, const ProblemData& data) {
  EstimatorReport r;
  r.eta_T = eta_cell(sigma, u, data);
  InterfaceIndicators gamma = eta_interface(sigma, u, data);
  r.eta_F = std::move(gamma.edges);
  r.eta_tilde = std::move(gamma.cells);
  r.oscillation = data_oscillation(u.topology(), data);
  r.eta = r.eta_T.euclidean();
  const double f = r.eta_F.euclidean(), g = r.eta_tilde.euclidean();
  r.eta_gamma = std::sqrt(f * f + g * g);
  r.epsilon = r.oscillation.euclidean();
  double s = 0.0;
  for (const CutCell& cell : u.topology().cut_cells()) {
    const QuadratureRule rule = segment_rule(cell.gamma.a, cell.gamma.b, 4);
    s += rule.integrate([&](const Vec2& x) {
      const double d = (sigma(cell.triangle, 0, x) - sigma(cell.triangle, 1, x)).dot(cell.normal);
      return d * d;
    });
  }
  r.transmission_term = std::sqrt(s);
  return r;
}

void effectivity(EstimatorReport& report, double exact_error) {
  report.exact_error = exact_error;
  const double total = report.total();
  if (exact_error == 0.0) {
    report.exact_case = total == 0.0;
    report.effectivity = 0.0;
    report.reliable = report.exact_case;
    return;
  }
  report.exact_case = false;
  report.effectivity = total / exact_error;
  report.reliable = report.effectivity >= 1.0 - 1e-6;
}

void write_estimator_csv(const EstimatorReport& report, int num_cells, std::ostream& out) {
  std::vector<double> tilde(num_cells, 0.0);
  for (std::size_t k = 0; k < report.eta_tilde.ids.size(); ++k) tilde[report.eta_tilde.ids[k]] = report.eta_tilde.values[k];
  out.precision(17);
  out << "cell,eta_T,eta_tilde,oscillation\n";
  for (int t = 0; t < num_cells; ++t) {
    out << t << ',' << report.eta_T.values[t] << ',' << tilde[t] << ',' << report.oscillation.values[t] << '\n';
  }
  out << "\nedge,eta_F\n";
  for (std::size_t k = 0; k < report.eta_F.ids.size(); ++k) out << report.eta_F.ids[k] << ',' << report.eta_F.values[k] << '\n';
}

}  // namespace cutflux
