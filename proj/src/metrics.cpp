#include "spalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "spalign/grid_io.hpp"
#include "spalign/latent_ops.hpp"

namespace spalign {

double psnr_from_mse(double mse, double dynamic_range) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

Preservation preservation(const LatentGrid& x_out, const LatentGrid& reference, double dynamic_range) {
  if (!(dynamic_range > 0.0)) throw std::invalid_argument("preservation: dynamic range must be positive");
  const double mse = mean_squared_difference(x_out, reference);
  return {mse, psnr_from_mse(mse, dynamic_range)};
}

double edit_strength(const LatentGrid& x_out, int target, const MixtureSpec& spec) {
  return gm_class_posterior(x_out, target, spec);
}

namespace {

using CellKey = std::tuple<std::string, int, int, double, int>;

CellKey key_of(const EditReport& r) {
  return {r.method, r.K, static_cast<int>(r.beta.kind), r.beta.value, r.t_inject};
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

const char* law_name(const BetaLaw& b) { return b.kind == BetaLaw::Kind::Constant ? "constant" : "linear"; }

}  // namespace

std::vector<TradeoffRow> tradeoff_table(std::span<const EditReport> runs) {
  if (runs.empty()) throw std::invalid_argument("tradeoff_table: no runs");
  std::map<CellKey, std::vector<const EditReport*>> cells;
  for (const auto& r : runs) cells[key_of(r)].push_back(&r);
  std::vector<TradeoffRow> rows;
  for (const auto& [key, members] : cells) {
    std::vector<double> mse, strength;
    for (const auto* r : members) {
      mse.push_back(r->mse);
      strength.push_back(r->strength);
    }
    const auto& first = *members.front();
    TradeoffRow row;
    row.method = first.method;
    row.K = first.K;
    row.beta = first.beta;
    row.t_inject = first.t_inject;
    row.runs = members.size();
    std::tie(row.mse_mean, row.mse_std) = mean_std(mse);
    std::tie(row.strength_mean, row.strength_std) = mean_std(strength);
    row.psnr = psnr_from_mse(row.mse_mean, first.dynamic_range);
    rows.push_back(row);
  }
  return rows;
}

void write_runs_csv(std::ostream& out, std::span<const EditReport> runs, const std::string& config_hash,
                    bool with_timing) {
  out << "# " << kRunsSchema << " config_hash=" << config_hash
      << " preservation=mse/psnr edit_strength=target-class-posterior\n";
  out << "method,target,K,beta_law,beta,t_inject,guidance,seed,dynamic_range,mse,psnr,strength";
  if (with_timing) out << ",wall_ms";
  out << '\n';
  for (const auto& r : runs) {
    out << r.method << ',' << r.target << ',' << r.K << ',' << law_name(r.beta) << ',' << io::format_double(r.beta.value)
        << ',' << r.t_inject << ',' << io::format_double(r.guidance) << ',' << r.seed << ','
        << io::format_double(r.dynamic_range) << ',' << io::format_double(r.mse) << ',' << io::format_double(r.psnr)
        << ',' << io::format_double(r.strength);
    if (with_timing) out << ',' << io::format_double(r.wall_ms);
    out << '\n';
  }
}

void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffRow> rows, const std::string& config_hash,
                        double dynamic_range) {
  out << "# " << kTradeoffSchema << " config_hash=" << config_hash << " dynamic_range="
      << io::format_double(dynamic_range) << " preservation=mse/psnr edit_strength=target-class-posterior\n";
  out << "method,K,beta_law,beta,t_inject,runs,mse_mean,mse_std,psnr,strength_mean,strength_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.K << ',' << law_name(r.beta) << ',' << io::format_double(r.beta.value) << ','
        << r.t_inject << ',' << r.runs << ',' << io::format_double(r.mse_mean) << ',' << io::format_double(r.mse_std)
        << ',' << io::format_double(r.psnr) << ',' << io::format_double(r.strength_mean) << ','
        << io::format_double(r.strength_std) << '\n';
  }
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length series");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double hypervolume(std::span<const std::pair<double, double>> points, double mse_ref, double strength_ref) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    if (p.first < mse_ref && p.second > strength_ref) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double height = strength_ref;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    height = std::max(height, pts[i].second);
    const double next = i + 1 < pts.size() ? pts[i + 1].first : mse_ref;
    area += (next - pts[i].first) * (height - strength_ref);
  }
  return area;
}

}  // namespace spalign
