#include "qtrbm/data_io.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qtrbm/baselines.hpp"
#include "qtrbm/errors.hpp"
#include "qtrbm/oracle.hpp"
#include "qtrbm/rng.hpp"

namespace qtrbm {

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
    case Split::kUnspecified: break;
  }
  return "all";
}

BinaryDataset parse_dataset(const std::string& text, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool saw_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      saw_blank = true;
      continue;
    }
    if (saw_blank) throw DataError(name + ": line " + std::to_string(line_no - 1) + ": empty line inside data");
    std::vector<double> row;
    std::size_t col = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      ++col;
      if (field == "0" || field == "1") {
        row.push_back(field == "1" ? 1.0 : 0.0);
      } else {
        throw DataError(name + ": line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                        ": expected 0 or 1, found '" + field + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(name + ": line " + std::to_string(line_no) + ": has " + std::to_string(row.size()) +
                      " columns, expected " + std::to_string(width));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(name + ": dataset is empty");

  BinaryDataset data;
  data.name = name;
  data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      data.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return data;
}

BinaryDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), path.stem().string());
}

std::string format_dataset(const BinaryDataset& data) {
  std::string out;
  out.reserve(static_cast<std::size_t>(data.values.size()) * 2);
  for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
      const double x = data.values(r, c);
      if (x != 0.0 && x != 1.0) {
        throw DataError("cannot save non-binary value at row " + std::to_string(r) + ", column " + std::to_string(c));
      }
      if (c > 0) out.push_back(',');
      out.push_back(x == 1.0 ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const BinaryDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  out << format_dataset(data);
  if (!out) throw DataError("failed writing dataset '" + path.string() + "'");
}

namespace {

BinaryDataset take_rows(const BinaryDataset& data, const std::vector<std::size_t>& order, std::size_t begin,
                        std::size_t end, Split split) {
  BinaryDataset out;
  out.name = data.name;
  out.split = split;
  out.values.resize(static_cast<Eigen::Index>(end - begin), data.values.cols());
  for (std::size_t k = begin; k < end; ++k) {
    out.values.row(static_cast<Eigen::Index>(k - begin)) = data.values.row(static_cast<Eigen::Index>(order[k]));
  }
  return out;
}

}  // namespace

DatasetSplits split_dataset(const BinaryDataset& data, std::array<double, 3> fractions, std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw DomainError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("split fractions must sum to 1");
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[0] + 1e-9));
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[1] + 1e-9));
  if (n_train == 0 || n_valid == 0 || n_train + n_valid >= n) {
    throw DataError("dataset with " + std::to_string(n) + " rows is too small for the requested split");
  }
  Rng rng = make_stream({seed, tag(StreamTag::kSplit)});
  const std::vector<std::size_t> order = random_permutation(n, rng);
  return {take_rows(data, order, 0, n_train, Split::kTrain),
          take_rows(data, order, n_train, n_train + n_valid, Split::kValid),
          take_rows(data, order, n_train + n_valid, n, Split::kTest)};
}

SyntheticData generate_synthetic(const SyntheticOptions& options) {
  if (options.visible < 1 || options.hidden < 0 || options.samples < 1) {
    throw DomainError("synthetic: need V >= 1, H >= 0 and at least one sample");
  }
  if (!(options.param_scale >= 0.0) || !(options.bias_scale >= 0.0)) {
    throw DomainError("synthetic: scales must be non-negative");
  }
  Rng rng = make_stream({options.seed, tag(StreamTag::kSynthetic)});
  RbmParamsStd truth = RbmParamsStd::zeros(options.visible, options.hidden);
  for (Eigen::Index i = 0; i < truth.hidden(); ++i) {
    for (Eigen::Index j = 0; j < truth.visible(); ++j) {
      truth.w(i, j) = uniform_range(rng, -options.param_scale, options.param_scale);
    }
  }
  for (Eigen::Index j = 0; j < truth.visible(); ++j) truth.b_v[j] = uniform_range(rng, -options.bias_scale, options.bias_scale);
  for (Eigen::Index i = 0; i < truth.hidden(); ++i) truth.b_h[i] = uniform_range(rng, -options.bias_scale, options.bias_scale);

  SyntheticData out;
  out.truth = truth;
  out.data.name = "synthetic";
  out.data.values.resize(static_cast<Eigen::Index>(options.samples), options.visible);
  const Eigen::Index units = options.visible + options.hidden;

  if (units <= kMaxEnumerationUnits) {
    // Exact sampling from the visible marginal by inverse CDF.
    const RbmParamsQT qt = from_standard(truth);
    const std::uint64_t states = std::uint64_t{1} << options.visible;
    std::vector<double> log_w(states);
    Vec v(options.visible);
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < states; ++s) {
      for (Eigen::Index j = 0; j < options.visible; ++j) v[j] = static_cast<double>((s >> j) & 1U);
      log_w[s] = visible_log_weight(qt, v);
      max_lw = std::max(max_lw, log_w[s]);
    }
    std::vector<double> cdf(states);
    double acc = 0.0;
    for (std::uint64_t s = 0; s < states; ++s) {
      acc += std::exp(log_w[s] - max_lw);
      cdf[s] = acc;
    }
    for (std::size_t n = 0; n < options.samples; ++n) {
      const double u = uniform01(rng) * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      const auto s = static_cast<std::uint64_t>(it - cdf.begin());
      for (Eigen::Index j = 0; j < options.visible; ++j) {
        out.data.values(static_cast<Eigen::Index>(n), j) = static_cast<double>((s >> j) & 1U);
      }
    }
    out.exact = true;
    return out;
  }

  if (!options.allow_approximate) {
    throw SizeLimitError("synthetic: exact sampling needs V + H <= " + std::to_string(kMaxEnumerationUnits) +
                         ", got " + std::to_string(units) + " (enable approximate Gibbs sampling to proceed)");
  }
  GibbsChainState chain = random_chain_state(options.visible, options.hidden, rng);
  for (int s = 0; s < options.gibbs_burn_in; ++s) chain = gibbs_sweep(truth, chain, rng);
  for (std::size_t n = 0; n < options.samples; ++n) {
    for (int s = 0; s < std::max(1, options.gibbs_thinning); ++s) chain = gibbs_sweep(truth, chain, rng);
    out.data.values.row(static_cast<Eigen::Index>(n)) = chain.v.transpose();
  }
  out.exact = false;
  return out;
}

BinaryDataset make_pl_failure_dataset(std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("pl-failure dataset needs at least one sample");
  Rng rng = make_stream({seed, tag(StreamTag::kSynthetic), 0x706cULL});
  BinaryDataset data;
  data.name = "pl-failure";
  data.values.resize(static_cast<Eigen::Index>(samples), 6);
  for (std::size_t n = 0; n < samples; ++n) {
    const auto r = static_cast<Eigen::Index>(n);
    const double a = bernoulli(rng, 0.5) ? 1.0 : 0.0;
    data.values(r, kPlColumnA) = a;
    data.values(r, kPlColumnB) = bernoulli(rng, 0.99) ? a : 1.0 - a;
    data.values(r, kPlColumnZ) = bernoulli(rng, 0.75) ? a : 1.0 - a;
    for (Eigen::Index d = 3; d < 6; ++d) data.values(r, d) = bernoulli(rng, 0.5) ? 1.0 : 0.0;
  }
  return data;
}

}  // namespace qtrbm
