#include "comrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "comrl/tape.hpp"

namespace comrl {

namespace {

// Per-step mean over seeds, in ascending step order.
struct CurvePoint {
  int step;
  double iid, ood;
};

std::vector<CurvePoint> seed_mean_curve(std::span<const MetricsRow> rows) {
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_step;
  for (const MetricsRow& r : rows) {
    by_step[r.step].first.push_back(r.iid_mean);
    by_step[r.step].second.push_back(r.ood_mean);
  }
  std::vector<CurvePoint> out;
  for (const auto& [step, v] : by_step) {
    out.push_back({step,
                   exact_mean_strided(v.first.data(),
                                      static_cast<int>(v.first.size()), 1),
                   exact_mean_strided(v.second.data(),
                                      static_cast<int>(v.second.size()), 1)});
  }
  return out;
}

double final_mean(std::span<const MetricsRow> rows, bool ood) {
  COMRL_REQUIRE(!rows.empty(), "no metrics rows to aggregate");
  int last = 0;
  for (const MetricsRow& r : rows) last = std::max(last, r.step);
  std::vector<double> finals;
  for (const MetricsRow& r : rows) {
    if (r.step == last) finals.push_back(ood ? r.ood_mean : r.iid_mean);
  }
  return exact_mean_strided(finals.data(), static_cast<int>(finals.size()), 1);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out =
      "seed,step,repr_loss,actor_loss,critic_loss,iid_mean,iid_std,ood_mean,"
      "ood_std\n";
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.seed) + ',' + std::to_string(r.step) + ',' +
           double_repr(r.repr_loss) + ',' + double_repr(r.actor_loss) + ',' +
           double_repr(r.critic_loss) + ',' + double_repr(r.iid_mean) + ',' +
           double_repr(r.iid_std) + ',' + double_repr(r.ood_mean) + ',' +
           double_repr(r.ood_std) + '\n';
  }
  return out;
}

std::string timings_csv(std::span<const MetricsRow> rows) {
  std::string out = "seed,step,wall_clock_s\n";
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.seed) + ',' + std::to_string(r.step) + ',' +
           double_repr(r.wall_clock_s) + '\n';
  }
  return out;
}

std::string learning_curve_svg(std::span<const MetricsRow> rows,
                               const std::string& title) {
  COMRL_REQUIRE(!rows.empty(), "no metrics rows to plot");
  const std::vector<CurvePoint> curve = seed_mean_curve(rows);

  double ymin = curve[0].iid, ymax = curve[0].iid;
  for (const CurvePoint& p : curve) {
    ymin = std::min({ymin, p.iid, p.ood});
    ymax = std::max({ymax, p.iid, p.ood});
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double xmin = curve.front().step, xmax = curve.back().step;
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;

  const double w = 720, h = 440, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double step) {
    return ml + (step - xmin) / xspan * (w - ml - mr);
  };
  auto py = [&](double ret) {
    return h - mb - (ret - ymin) / (ymax - ymin) * (h - mt - mb);
  };
  auto poly = [&](bool ood) {
    std::string pts;
    for (const CurvePoint& p : curve) {
      pts += double_repr(px(p.step)) + ',' +
             double_repr(py(ood ? p.ood : p.iid)) + ' ';
    }
    if (!pts.empty()) pts.pop_back();
    return pts;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"440\" viewBox=\"0 0 720 440\">\n";
  svg += "<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";
  // Axes.
  svg += "<line x1=\"" + double_repr(ml) + "\" y1=\"" + double_repr(mt) +
         "\" x2=\"" + double_repr(ml) + "\" y2=\"" + double_repr(h - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + double_repr(ml) + "\" y1=\"" + double_repr(h - mb) +
         "\" x2=\"" + double_repr(w - mr) + "\" y2=\"" + double_repr(h - mb) +
         "\" stroke=\"black\"/>\n";
  // Extremal tick labels.
  svg += "<text x=\"" + double_repr(ml - 6) + "\" y=\"" + double_repr(h - mb) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         double_repr(ymin) + "</text>\n";
  svg += "<text x=\"" + double_repr(ml - 6) + "\" y=\"" + double_repr(mt + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         double_repr(ymax) + "</text>\n";
  svg += "<text x=\"" + double_repr(ml) + "\" y=\"" + double_repr(h - mb + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" +
         double_repr(xmin) + "</text>\n";
  svg += "<text x=\"" + double_repr(w - mr) + "\" y=\"" +
         double_repr(h - mb + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" +
         double_repr(xmax) + "</text>\n";
  svg += "<text x=\"360\" y=\"" + double_repr(h - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">training step</text>\n";
  // Curves and legend.
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
         "points=\"" +
         poly(false) + "\"/>\n";
  svg += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" "
         "stroke-dasharray=\"6 3\" points=\"" +
         poly(true) + "\"/>\n";
  svg += "<line x1=\"590\" y1=\"50\" x2=\"620\" y2=\"50\" stroke=\"#1f77b4\" "
         "stroke-width=\"2\"/>\n";
  svg += "<text x=\"626\" y=\"54\" font-family=\"sans-serif\" "
         "font-size=\"12\">IID</text>\n";
  svg += "<line x1=\"590\" y1=\"70\" x2=\"620\" y2=\"70\" stroke=\"#d62728\" "
         "stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n";
  svg += "<text x=\"626\" y=\"74\" font-family=\"sans-serif\" "
         "font-size=\"12\">OOD</text>\n";
  svg += "</svg>\n";
  return svg;
}

double final_iid_mean(std::span<const MetricsRow> rows) {
  return final_mean(rows, false);
}

double final_ood_mean(std::span<const MetricsRow> rows) {
  return final_mean(rows, true);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    COMRL_REQUIRE(!ec, "cannot create directory: " + p.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  COMRL_REQUIRE(out.good(), "cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  COMRL_REQUIRE(out.good(), "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  COMRL_REQUIRE(in.good(), "cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace comrl
