#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "whim/dataset.hpp"

namespace whim {

inline constexpr std::string_view kMissingLabel = "(missing)";

/// Numeric range [lower, upper), or [lower, upper] when upper_inclusive.
struct Bucket {
  std::string column;
  double lower = 0.0;
  double upper = 0.0;
  bool upper_inclusive = false;
  std::string label;

  bool contains(double value) const {
    return value >= lower && (value < upper || (upper_inclusive && value <= upper));
  }
};

/// The u_c of a scenario: a categorical label, a numeric range, or the
/// missing-cell category.
struct ValueSelector {
  enum class Kind { Category, Range, Missing };

  Kind kind = Kind::Category;
  std::string label;
  Bucket range;

  static ValueSelector category(std::string label);
  static ValueSelector bucket(Bucket bucket);
  static ValueSelector point(std::string column, double value);
  static ValueSelector missing();

  bool operator==(const ValueSelector& other) const;
};

/// Row indices split by whether they match a selector. Both lists ascending.
struct RowPartition {
  std::vector<std::size_t> matching;
  std::vector<std::size_t> complement;

  std::size_t total() const { return matching.size() + complement.size(); }
};

RowPartition partition_rows(const Dataset& dataset, std::string_view column,
                            const ValueSelector& value);

/// Quantile buckets for a numeric column. Edges are the i/n_buckets
/// linear-interpolation quantiles; tied edges are merged.
std::vector<Bucket> bucket_numeric(const Dataset& dataset, std::string_view column,
                                   std::size_t n_buckets);

/// Share of all N rows matching value; missing cells never match a
/// category or range.
double current_fraction(const Dataset& dataset, std::string_view column,
                        const ValueSelector& value);

/// Values a sweep iterates for one column: raw values when the column has at
/// most n_unique distinct values (or is categorical), quantile buckets
/// otherwise. Categorical columns with missing cells get a Missing selector.
std::vector<ValueSelector> column_domain(const Dataset& dataset, std::string_view column,
                                         std::size_t n_unique, std::size_t n_buckets);

/// Resolves user text (a label, a bucket label, or a raw number) against a
/// column's domain. Throws ErrorCode::UnknownValue.
ValueSelector resolve_value(const Dataset& dataset, std::string_view column,
                            std::string_view text, std::size_t n_unique,
                            std::size_t n_buckets);

}  // namespace whim
