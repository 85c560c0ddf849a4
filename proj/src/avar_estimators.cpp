#include "jumpvar/avar_estimators.hpp"

#include "jumpvar/errors.hpp"
#include "jumpvar/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace jumpvar {

AvarEstimate batch_means(const std::vector<double>& values, std::size_t batch_len) {
  if (values.empty()) throw EmptyPath("batch means of an empty path");
  if (batch_len < 1) throw InvalidConfig("batch_len must be >= 1");
  if (values.size() < 2 * batch_len)
    throw PathTooShort("path of length " + std::to_string(values.size()) + " is shorter than two batches of " +
                       std::to_string(batch_len));
  AvarEstimate e;
  e.batch_len = batch_len;
  e.n_batches = values.size() / batch_len;
  std::vector<double> means(e.n_batches);
  for (std::size_t b = 0; b < e.n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * batch_len; i < (b + 1) * batch_len; ++i) {
      if (!std::isfinite(values[i])) throw InvalidModel("path values must be finite");
      s += values[i];
    }
    means[b] = s / static_cast<double>(batch_len);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(e.n_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double nb = static_cast<double>(e.n_batches);
  e.value = static_cast<double>(batch_len) * ss / (nb - 1.0);
  e.stderr = e.value * std::sqrt(2.0 / (nb - 1.0));
  return e;
}

AvarEstimate batch_means(const PathSample& path, std::size_t batch_len) { return batch_means(path.values, batch_len); }

std::size_t default_batch_len(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
}

std::size_t default_burn_in(std::size_t n) { return n / 100; }

AvarEstimate batch_means(const PathSample& path) {
  return batch_means(path.values, default_batch_len(path.values.size()));
}

DivergenceScan divergence_scan(const PathGenerator& generator, std::vector<std::size_t> n_grid,
                               std::size_t n_seeds, std::uint64_t master_seed) {
  DivergenceScan scan;
  scan.n_grid = std::move(n_grid);
  for (std::size_t s = 0; s < n_seeds; ++s) scan.seeds.push_back(stream_seed(master_seed, s));
  scan.estimates = parallel_map(n_seeds, [&](std::size_t s) {
    std::vector<AvarEstimate> row;
    for (std::size_t n : scan.n_grid) row.push_back(batch_means(generator(n, scan.seeds[s]), default_batch_len(n)));
    return row;
  });
  std::size_t monotone = 0;
  for (const auto& row : scan.estimates) {
    bool up = !row.empty();
    for (std::size_t k = 1; k < row.size(); ++k) up = up && row[k].value > row[k - 1].value;
    if (up) ++monotone;
  }
  scan.monotone_fraction = n_seeds ? static_cast<double>(monotone) / static_cast<double>(n_seeds) : 0.0;
  return scan;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

void write_estimate_header(std::ostream& os) { os << "model,f,n,batch_len,value,stderr,seed\n"; }

void write_estimate_row(std::ostream& os, const std::string& model, const std::string& f, std::size_t n,
                        const AvarEstimate& e, std::uint64_t seed) {
  os << csv_quote(model) << ',' << csv_quote(f) << ',' << n << ',' << e.batch_len << ',' << std::setprecision(17) << e.value << ','
     << e.stderr << ',' << seed << '\n';
}

}  // namespace jumpvar
