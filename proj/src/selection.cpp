#include "whim/selection.hpp"

#include <algorithm>
#include <cmath>

#include "whim/error.hpp"
#include "whim/objective.hpp"

namespace whim {

ValueSelector ValueSelector::category(std::string label) {
  ValueSelector s;
  s.kind = Kind::Category;
  s.label = std::move(label);
  return s;
}

ValueSelector ValueSelector::bucket(Bucket bucket) {
  ValueSelector s;
  s.kind = Kind::Range;
  s.label = bucket.label;
  s.range = std::move(bucket);
  return s;
}

ValueSelector ValueSelector::point(std::string column, double value) {
  Bucket b{std::move(column), value, value, true, format_real(value)};
  return bucket(std::move(b));
}

ValueSelector ValueSelector::missing() {
  ValueSelector s;
  s.kind = Kind::Missing;
  s.label = std::string(kMissingLabel);
  return s;
}

bool ValueSelector::operator==(const ValueSelector& other) const {
  if (kind != other.kind || label != other.label) return false;
  if (kind != Kind::Range) return true;
  return range.lower == other.range.lower && range.upper == other.range.upper &&
         range.upper_inclusive == other.range.upper_inclusive;
}

RowPartition partition_rows(const Dataset& dataset, std::string_view column,
                            const ValueSelector& value) {
  const Column& col = dataset.column(column);
  RowPartition out;
  const std::size_t n = dataset.row_count();
  switch (value.kind) {
    case ValueSelector::Kind::Missing:
      for (std::size_t r = 0; r < n; ++r) (col.is_missing(r) ? out.matching : out.complement).push_back(r);
      break;
    case ValueSelector::Kind::Category: {
      if (col.is_numeric())
        fail(ErrorCode::WrongColumnKind, "column '" + col.name() + "' is numeric; select a range or value");
      const auto code = col.code_of(value.label);
      const auto codes = col.codes();
      for (std::size_t r = 0; r < n; ++r)
        (code && codes[r] == *code ? out.matching : out.complement).push_back(r);
      break;
    }
    case ValueSelector::Kind::Range: {
      if (!col.is_numeric())
        fail(ErrorCode::WrongColumnKind, "column '" + col.name() + "' is categorical; select a label");
      const auto values = col.numeric_values();
      for (std::size_t r = 0; r < n; ++r)
        (!std::isnan(values[r]) && value.range.contains(values[r]) ? out.matching : out.complement).push_back(r);
      break;
    }
  }
  return out;
}

std::vector<Bucket> bucket_numeric(const Dataset& dataset, std::string_view column,
                                   std::size_t n_buckets) {
  const Column& col = dataset.column(column);
  if (!col.is_numeric()) fail(ErrorCode::WrongColumnKind, "column '" + col.name() + "' is not numeric");
  if (n_buckets < 2) fail(ErrorCode::InvalidArgument, "n_buckets must be at least 2");
  std::vector<double> sorted;
  for (double v : col.numeric_values())
    if (!std::isnan(v)) sorted.push_back(v);
  if (sorted.empty()) fail(ErrorCode::EmptySelection, "column '" + col.name() + "' has no values");
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> edges;
  for (std::size_t i = 0; i <= n_buckets; ++i) {
    const double edge = i == n_buckets ? sorted.back()
                                       : quantile_sorted(sorted, static_cast<double>(i) / static_cast<double>(n_buckets));
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }

  std::vector<Bucket> out;
  if (edges.size() == 1) {
    out.push_back({col.name(), edges[0], edges[0], true, "[" + format_real(edges[0]) + ", " + format_real(edges[0]) + "]"});
    return out;
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const bool last = i + 2 == edges.size();
    Bucket b{col.name(), edges[i], edges[i + 1], last, {}};
    b.label = "[" + format_real(b.lower) + ", " + format_real(b.upper) + (last ? "]" : ")");
    out.push_back(std::move(b));
  }
  return out;
}

double current_fraction(const Dataset& dataset, std::string_view column, const ValueSelector& value) {
  const RowPartition p = partition_rows(dataset, column, value);
  return static_cast<double>(p.matching.size()) / static_cast<double>(dataset.row_count());
}

std::vector<ValueSelector> column_domain(const Dataset& dataset, std::string_view column,
                                         std::size_t n_unique, std::size_t n_buckets) {
  const Column& col = dataset.column(column);
  std::vector<ValueSelector> out;
  if (col.is_numeric()) {
    const auto distinct = col.distinct_values();
    if (distinct.size() > n_unique) {
      for (Bucket& b : bucket_numeric(dataset, column, n_buckets)) out.push_back(ValueSelector::bucket(std::move(b)));
    } else {
      for (double v : distinct) out.push_back(ValueSelector::point(col.name(), v));
    }
  } else {
    for (std::string& label : col.present_labels()) out.push_back(ValueSelector::category(std::move(label)));
    if (col.missing_count() > 0) out.push_back(ValueSelector::missing());
  }
  return out;
}

ValueSelector resolve_value(const Dataset& dataset, std::string_view column, std::string_view text,
                            std::size_t n_unique, std::size_t n_buckets) {
  const Column& col = dataset.column(column);
  if (text == kMissingLabel) return ValueSelector::missing();
  if (!col.is_numeric()) {
    if (col.code_of(text)) return ValueSelector::category(std::string(text));
    fail(ErrorCode::UnknownValue, "value '" + std::string(text) + "' does not occur in column '" + col.name() + "'");
  }
  for (ValueSelector& s : column_domain(dataset, column, n_unique, n_buckets))
    if (s.label == text) return s;
  if (const auto v = parse_real(text)) {
    const auto distinct = col.distinct_values();
    if (std::binary_search(distinct.begin(), distinct.end(), *v)) return ValueSelector::point(col.name(), *v);
  }
  fail(ErrorCode::UnknownValue, "value '" + std::string(text) + "' is neither a bucket label nor a value of column '" +
                                    col.name() + "'");
}

}  // namespace whim
