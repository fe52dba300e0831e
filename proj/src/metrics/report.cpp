#include "rising/metrics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace rising::metrics {
namespace {

// 'valid' separable filtering with a normalised 1D kernel along both axes.
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& img, const Eigen::VectorXd& k) {
  const Eigen::Index w = k.size();
  const Eigen::Index rows = img.rows() - w + 1;
  const Eigen::Index cols = img.cols() - w + 1;
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(img.rows(), cols);
  for (Eigen::Index i = 0; i < w; ++i) tmp += k[i] * img.middleCols(i, cols);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < w; ++i) out += k[i] * tmp.middleRows(i, rows);
  return out;
}

}  // namespace

double ssim(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
            const SsimOptions& opts) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error("ssim: dimension mismatch");
  if (x.rows() < opts.window || x.cols() < opts.window) throw Error("ssim: image smaller than the window");
  Eigen::VectorXd k(opts.window);
  const double c = 0.5 * (opts.window - 1);
  for (int i = 0; i < opts.window; ++i) k[i] = std::exp(-(i - c) * (i - c) / (2.0 * opts.sigma * opts.sigma));
  k /= k.sum();

  const Eigen::MatrixXd xx = x.cwiseProduct(x), yy = y.cwiseProduct(y), xy = x.cwiseProduct(y);
  const Eigen::ArrayXXd mx = filter_valid(x, k).array();
  const Eigen::ArrayXXd my = filter_valid(y, k).array();
  const Eigen::ArrayXXd sxx = filter_valid(xx, k).array() - mx * mx;
  const Eigen::ArrayXXd syy = filter_valid(yy, k).array() - my * my;
  const Eigen::ArrayXXd sxy = filter_valid(xy, k).array() - mx * my;
  const double c1 = std::pow(opts.k1 * opts.dynamic_range, 2);
  const double c2 = std::pow(opts.k2 * opts.dynamic_range, 2);
  const Eigen::ArrayXXd map =
      ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.count;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / s.count);
  return s;
}

std::vector<std::string> MetricsReport::roles() const {
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (std::find(out.begin(), out.end(), r.role) == out.end()) out.push_back(r.role);
  return out;
}

Summary MetricsReport::aggregate(const std::string& role, const std::string& metric) const {
  std::vector<double> v;
  for (const auto& r : records_) {
    if (r.role != role) continue;
    if (metric == "re") v.push_back(r.re);
    else if (metric == "rmse") v.push_back(r.rmse);
    else if (metric == "ssim") v.push_back(r.ssim);
    else if (metric == "rmse_vs_is") {
      if (r.rmse_vs_is) v.push_back(*r.rmse_vs_is);
    } else {
      throw Error("unknown metric '" + metric + "'");
    }
  }
  return summarize(v);
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "id,role,re,rmse,ssim,rmse_vs_is\n";
  os << std::setprecision(17);
  for (const auto& r : records_) {
    os << r.id << ',' << r.role << ',' << r.re << ',' << r.rmse << ',' << r.ssim << ',';
    if (r.rmse_vs_is) os << *r.rmse_vs_is;
    os << '\n';
  }
  return os.str();
}

MetricsReport MetricsReport::from_csv(const std::string& text) {
  MetricsReport rep;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw Error("metrics CSV: expected 6 columns in '" + line + "'");
    MetricRecord r{cells[0], cells[1], std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4]), std::nullopt};
    if (!cells[5].empty()) r.rmse_vs_is = std::stod(cells[5]);
    rep.add(std::move(r));
  }
  return rep;
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& columns,
                         const std::vector<std::string>& metrics) {
  std::vector<std::string> roles;
  for (const auto& [_, rep] : columns)
    for (const auto& role : rep.roles())
      if (std::find(roles.begin(), roles.end(), role) == roles.end()) roles.push_back(role);

  auto upper = [](std::string s) {
    if (s == "rmse_vs_is") return std::string("RMSE(y=x_IS)");
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
  };
  constexpr int kLabel = 14, kCell = 20;
  std::ostringstream os;
  os << std::left << std::setw(kLabel) << "" << std::setw(8) << "";
  for (const auto& [name, _] : columns) os << " | " << std::setw(kCell) << name;
  os << '\n' << std::string(kLabel + 8 + columns.size() * (kCell + 3), '-') << '\n';
  for (const auto& metric : metrics) {
    bool first = true;
    for (const auto& role : roles) {
      bool any = false;
      for (const auto& [_, rep] : columns) any = any || rep.aggregate(role, metric).count > 0;
      if (!any) continue;
      os << std::setw(kLabel) << (first ? upper(metric) : "") << std::setw(8) << role;
      first = false;
      for (const auto& [_, rep] : columns) {
        const Summary s = rep.aggregate(role, metric);
        char cell[64] = "-";
        if (s.count > 0) std::snprintf(cell, sizeof(cell), "%.4f +/- %.4f", s.mean, s.std);
        os << " | " << std::setw(kCell) << cell;
      }
      os << '\n';
    }
    os << std::string(kLabel + 8 + columns.size() * (kCell + 3), '-') << '\n';
  }
  return os.str();
}

}  // namespace rising::metrics
