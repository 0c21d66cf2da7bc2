#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "prescreen/csv.hpp"
#include "prescreen/harness.hpp"

namespace prescreen::plot {

/// Static SVG box plot, one box per model: box spans Q1..Q3 with a median
/// bar, whiskers reach p2.5 and p97.5. No timestamps, so output is a pure
/// function of the rows.
inline void write_boxplot_svg(const std::vector<harness::ComparisonRow>& rows, std::ostream& out,
                              const std::string& title = "AUC by classifier") {
  const double width = 140.0 + 110.0 * static_cast<double>(rows.size()), height = 420.0;
  const double left = 70.0, top = 40.0, bottom = 340.0;
  double lo = 1.0, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.summary.p2_5);
    hi = std::max(hi, r.summary.p97_5);
  }
  lo = std::max(0.0, std::floor(lo * 10.0) / 10.0);
  hi = std::min(1.0, std::ceil(hi * 10.0) / 10.0);
  if (hi <= lo) hi = lo + 0.1;
  const auto y = [&](double v) { return bottom - (v - lo) / (hi - lo) * (bottom - top); };
  const auto f = [](double v) { return csv::format_fixed(v, 2); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(width) << "\" height=\"" << f(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << f(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<line x1=\"" << f(left) << "\" y1=\"" << f(top) << "\" x2=\"" << f(left) << "\" y2=\"" << f(bottom)
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 10; ++t) {
    const double v = lo + (hi - lo) * t / 10.0;
    out << "<line x1=\"" << f(left - 4) << "\" y1=\"" << f(y(v)) << "\" x2=\"" << f(width - 20) << "\" y2=\""
        << f(y(v)) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << f(left - 8) << "\" y=\"" << f(y(v) + 4) << "\" text-anchor=\"end\">"
        << csv::format_fixed(v, 2) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i].summary;
    const double cx = left + 60.0 + 110.0 * static_cast<double>(i), half = 30.0;
    out << "<g>\n";
    out << "<line x1=\"" << f(cx) << "\" y1=\"" << f(y(s.p97_5)) << "\" x2=\"" << f(cx) << "\" y2=\"" << f(y(s.q3))
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << f(cx) << "\" y1=\"" << f(y(s.q1)) << "\" x2=\"" << f(cx) << "\" y2=\"" << f(y(s.p2_5))
        << "\" stroke=\"black\"/>\n";
    for (double w : {s.p2_5, s.p97_5})
      out << "<line x1=\"" << f(cx - half / 2) << "\" y1=\"" << f(y(w)) << "\" x2=\"" << f(cx + half / 2)
          << "\" y2=\"" << f(y(w)) << "\" stroke=\"black\"/>\n";
    out << "<rect x=\"" << f(cx - half) << "\" y=\"" << f(y(s.q3)) << "\" width=\"" << f(2 * half) << "\" height=\""
        << f(y(s.q1) - y(s.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << f(cx - half) << "\" y1=\"" << f(y(s.median)) << "\" x2=\"" << f(cx + half)
        << "\" y2=\"" << f(y(s.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << f(cx) << "\" y=\"" << f(bottom + 18) << "\" text-anchor=\"end\" transform=\"rotate(-35 "
        << f(cx) << ' ' << f(bottom + 18) << ")\">" << rows[i].model << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace prescreen::plot
