#include "causality/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "causality/errors.hpp"

namespace causality {

MultivariateTimeSeries::MultivariateTimeSeries(Matrix values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() < 1) throw InvalidArgument("time series must have at least one sample");
  if (values_.cols() < 2) throw InvalidArgument("time series must have at least two variables");
  if (!values_.allFinite()) throw InvalidArgument("time series contains non-finite values");
  if (labels_.empty()) {
    labels_.reserve(static_cast<std::size_t>(values_.cols()));
    for (Index j = 0; j < values_.cols(); ++j) labels_.push_back("X" + std::to_string(j + 1));
  } else if (static_cast<Index>(labels_.size()) != values_.cols()) {
    throw InvalidArgument("label count does not match the number of columns");
  }
}

MultivariateTimeSeries MultivariateTimeSeries::with_column(Index var, const Eigen::Ref<const Vector>& column) const {
  if (column.size() != length()) throw InvalidArgument("replacement column has the wrong length");
  Matrix values = values_;
  values.col(var) = column;
  return MultivariateTimeSeries(std::move(values), labels_);
}

MultivariateTimeSeries MultivariateTimeSeries::select(std::span<const Index> vars) const {
  Matrix values(length(), static_cast<Index>(vars.size()));
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    values.col(static_cast<Index>(j)) = values_.col(vars[j]);
    labels.push_back(labels_[static_cast<std::size_t>(vars[j])]);
  }
  return MultivariateTimeSeries(std::move(values), std::move(labels));
}

MultivariateTimeSeries standardize(const MultivariateTimeSeries& series) {
  const Index n = series.length();
  Matrix values = series.values();
  for (Index j = 0; j < values.cols(); ++j) {
    auto col = values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = n > 1 ? std::sqrt(col.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (!(sd > 0.0)) throw ConstantColumn("column '" + series.labels()[static_cast<std::size_t>(j)] + "' is constant");
    col /= sd;
  }
  return MultivariateTimeSeries(std::move(values), series.labels());
}

Index max_lag(std::span<const LaggedTerm> terms) {
  Index result = 0;
  for (const auto& t : terms) result = std::max(result, t.lag);
  return result;
}

LagMatrix build_lag_matrix(const MultivariateTimeSeries& series, Index response,
                           std::span<const LaggedTerm> terms, Index window) {
  const Index n = series.length();
  if (response < 0 || response >= series.num_vars()) throw InvalidArgument("response index out of range");
  for (const auto& t : terms) {
    if (t.lag < 1) throw InvalidArgument("lags must be >= 1");
    if (t.var < 0 || t.var >= series.num_vars()) throw InvalidArgument("term variable out of range");
  }
  const Index lag = std::max(max_lag(terms), window);
  if (n <= lag) {
    throw SeriesTooShort("series of length " + std::to_string(n) + " is too short for lag " + std::to_string(lag));
  }
  const Index rows = n - lag;
  LagMatrix out;
  out.max_lag = lag;
  out.terms.assign(terms.begin(), terms.end());
  out.target = series.values().col(response).segment(lag, rows);
  out.regressors.resize(rows, static_cast<Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    out.regressors.col(static_cast<Index>(j)) = series.values().col(terms[j].var).segment(lag - terms[j].lag, rows);
  }
  return out;
}

std::vector<LaggedTerm> uniform_embedding(Index num_vars, std::span<const Index> vars, int m, int tau) {
  if (m < 1 || tau < 1) throw InvalidArgument("embedding requires m >= 1 and tau >= 1");
  std::vector<LaggedTerm> terms;
  terms.reserve(vars.size() * static_cast<std::size_t>(m));
  for (Index v : vars) {
    if (v < 0 || v >= num_vars) throw InvalidArgument("embedding variable out of range");
    for (int i = 0; i < m; ++i) terms.push_back({v, 1 + static_cast<Index>(i) * tau});
  }
  return terms;
}

void write_csv(std::ostream& out, const MultivariateTimeSeries& series) {
  const auto& labels = series.labels();
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  char buf[32];
  for (Index t = 0; t < series.length(); ++t) {
    for (Index j = 0; j < series.num_vars(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), series.values()(t, j));
      if (j) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

}  // namespace

MultivariateTimeSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV input");
  auto labels = split_row(line);
  std::vector<double> data;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_row(line);
    if (fields.size() != labels.size()) {
      throw InvalidArgument("CSV row " + std::to_string(rows + 2) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(labels.size()));
    }
    for (const auto& f : fields) {
      double v = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw InvalidArgument("CSV row " + std::to_string(rows + 2) + ": cannot parse '" + f + "'");
      }
      data.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<Index>(labels.size());
  Matrix values(rows, cols);
  for (Index t = 0; t < rows; ++t)
    for (Index j = 0; j < cols; ++j) values(t, j) = data[static_cast<std::size_t>(t * cols + j)];
  return MultivariateTimeSeries(std::move(values), std::move(labels));
}

}  // namespace causality
