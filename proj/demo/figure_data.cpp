// Branch energies E_+(v) and E_-(v) of sqrt(L) + v delta_0 for d = 1..5,
// written as CSV together with the edge classification of each dimension.
//
// Usage: figure_data [output.csv]   (stdout when no path is given)

#include <cmath>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "latspec/io.hpp"
#include "latspec/spectral.hpp"

using namespace latspec;

namespace {

std::vector<double> couplings() {
  std::vector<double> vs;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    const double v = 1e-2 * std::pow(1e4, static_cast<double>(i) / (n - 1));
    vs.push_back(-v);
    vs.push_back(v);
  }
  return vs;
}

void write(std::ostream& out) {
  const auto spec = MultiplierSpec::fractional(1.0);
  out << "d,v,E,gap,edge,behavior,threshold,resolved\n";
  for (int d = 1; d <= 5; ++d) {
    const auto t = thresholds(spec, d);
    const auto top = classify_edge(spec, d, Edge::Top);
    const auto bottom = classify_edge(spec, d, Edge::Bottom);
    // Marker rows: one per edge, at the threshold coupling with the edge energy.
    for (const auto& [b, thr, e] : {std::tuple{top, t.v2, spec(2.0)}, std::tuple{bottom, t.v0, spec(0.0)}}) {
      out << d << ',' << format_number(thr) << ',' << format_number(e) << ",0," << edge_name(b.edge) << ','
          << behavior_name(b.behavior) << ',' << format_number(thr) << ",marker\n";
    }
    const auto vs = couplings();
    const auto pts = eigencurve(spec, d, vs);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (!pts[i])
        continue;
      const auto& p = *pts[i];
      const auto& b = p.offset.edge == Edge::Top ? top : bottom;
      out << d << ',' << format_number(p.v) << ',' << format_number(p.E) << ',' << format_number(p.offset.gap)
          << ',' << edge_name(p.offset.edge) << ',' << behavior_name(b.behavior) << ','
          << format_number(p.offset.edge == Edge::Top ? t.v2 : t.v0) << ',' << (p.resolved ? "yes" : "no")
          << '\n';
    }
  }
}

} // namespace

int main(int argc, char** argv) {
  try {
    if (argc > 1) {
      std::ofstream f(argv[1]);
      if (!f) {
        std::cerr << "cannot open " << argv[1] << '\n';
        return 1;
      }
      write(f);
    } else {
      write(std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
