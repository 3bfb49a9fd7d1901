#include "icluster/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "icluster/error.hpp"

namespace icluster {

std::vector<WeightedPoint> SortedDataset::points() const {
  std::vector<WeightedPoint> out(static_cast<std::size_t>(size()));
  for (Index l = 0; l < size(); ++l) {
    out[static_cast<std::size_t>(l)] = {values_[l], weights_[l]};
  }
  return out;
}

SortedDataset build_dataset(std::span<const RawPoint> raw) {
  if (raw.empty()) throw Error(ErrorKind::EmptyInput, "no data points");

  std::vector<WeightedPoint> pts;
  pts.reserve(raw.size());
  for (const auto& r : raw) {
    if (!std::isfinite(r.value)) {
      throw Error(ErrorKind::NonFiniteValue, "value is NaN or infinite");
    }
    const double w = r.weight.value_or(1.0);
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::NonPositiveWeight,
                  "weight must be positive and finite, got " +
                      std::to_string(w));
    }
    pts.push_back({r.value, w});
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.value < b.value; });

  std::vector<WeightedPoint> merged;
  merged.reserve(pts.size());
  for (const auto& p : pts) {
    if (!merged.empty() && merged.back().value == p.value) {
      merged.back().weight += p.weight;
    } else {
      merged.push_back(p);
    }
  }

  SortedDataset ds;
  ds.values_.resize(static_cast<Index>(merged.size()));
  ds.weights_.resize(static_cast<Index>(merged.size()));
  for (std::size_t l = 0; l < merged.size(); ++l) {
    ds.values_[static_cast<Index>(l)] = merged[l].value;
    ds.weights_[static_cast<Index>(l)] = merged[l].weight;
  }
  return ds;
}

SortedDataset build_dataset(std::span<const WeightedPoint> points) {
  std::vector<RawPoint> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back({p.value, p.weight});
  return build_dataset(std::span<const RawPoint>(raw));
}

SortedDataset build_dataset(std::span<const double> values) {
  std::vector<RawPoint> raw;
  raw.reserve(values.size());
  for (double v : values) raw.push_back({v, std::nullopt});
  return build_dataset(std::span<const RawPoint>(raw));
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  // from_chars for double is available in libstdc++ >= 11
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() &&
           (line[pos] == ',' || line[pos] == ' ' || line[pos] == '\t' ||
            line[pos] == '\r' || line[pos] == ';')) {
      ++pos;
    }
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ',' && line[end] != ' ' &&
           line[end] != '\t' && line[end] != '\r' && line[end] != ';') {
      ++end;
    }
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

}  // namespace

std::vector<RawPoint> read_points(std::istream& in, bool histogram) {
  std::vector<RawPoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    const auto first = sv.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || sv[first] == '#') continue;

    const auto fields = split_fields(sv);
    const auto fail = [&](const std::string& why) {
      return Error(ErrorKind::ParseError,
                   "line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() > 2) throw fail("expected `value` or `value,weight`");
    if (histogram && fields.size() != 2) throw fail("expected `value,count`");

    RawPoint p;
    if (!parse_double(fields[0], p.value)) {
      throw fail("cannot parse value '" + std::string(fields[0]) + "'");
    }
    if (fields.size() == 2) {
      double w = 0.0;
      if (!parse_double(fields[1], w)) {
        throw fail("cannot parse weight '" + std::string(fields[1]) + "'");
      }
      p.weight = w;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<RawPoint> read_points_file(const std::string& path,
                                       bool histogram) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return read_points(in, histogram);
}

namespace {

// hi[l] = hi[l-1] + term, with the TwoSum error and the product error
// `term_err` collected in lo[l].
void accumulate(Eigen::VectorXd& hi, Eigen::VectorXd& lo, Index l,
                double term, double term_err) {
  const double a = hi[l - 1];
  const double s = a + term;
  const double ap = s - term;
  const double err = (a - ap) + (term - (s - ap));
  hi[l] = s;
  lo[l] = lo[l - 1] + (err + term_err);
}

}  // namespace

PrefixTables build_prefix_tables(const SortedDataset& ds,
                                 const BregmanGenerator& gen) {
  const Index n = ds.size();
  PrefixTables pt;
  pt.generator_id = gen.name;
  pt.s1 = Eigen::VectorXd::Zero(n + 1);
  pt.s2 = Eigen::VectorXd::Zero(n + 1);
  pt.s3 = Eigen::VectorXd::Zero(n + 1);
  pt.c1 = Eigen::VectorXd::Zero(n + 1);
  pt.c2 = Eigen::VectorXd::Zero(n + 1);
  pt.c3 = Eigen::VectorXd::Zero(n + 1);
  pt.x = ds.values();
  pt.w = ds.weights();
  for (Index l = 1; l <= n; ++l) {
    const double x = ds.x(l);
    const double w = ds.w(l);
    if (!gen.contains(x)) {
      std::ostringstream msg;
      msg << "value " << x << " outside the domain of generator '" << gen.name
          << "'";
      throw Error(ErrorKind::DomainViolation, msg.str());
    }
    accumulate(pt.s1, pt.c1, l, w, 0.0);
    const double wx = w * x;
    accumulate(pt.s2, pt.c2, l, wx, std::fma(w, x, -wx));
    const double fx = gen.f(x);
    const double wf = w * fx;
    accumulate(pt.s3, pt.c3, l, wf, std::fma(w, fx, -wf));
  }
  return pt;
}

RangeSums range_sums(const PrefixTables& pt, Index j, Index i) {
  if (j < 1 || i < j || i > pt.size()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "range [" + std::to_string(j) + ", " + std::to_string(i) +
                    "] invalid for n = " + std::to_string(pt.size()));
  }
  return range_sums_unchecked(pt, j, i);
}

}  // namespace icluster
