#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace whim {

enum class ColumnKind { Categorical, Numeric };

std::string_view kind_name(ColumnKind kind);

/// One typed column. Numeric cells are stored as doubles with NaN marking a
/// missing (or unparseable) cell; categorical cells as dictionary codes with
/// -1 marking a missing cell. Labels are kept in lexicographic order.
class Column {
 public:
  static Column numeric(std::string name, std::vector<double> values);
  static Column categorical(std::string name, std::vector<std::int32_t> codes,
                            std::vector<std::string> labels);
  /// Builds a categorical column from raw text; std::nullopt marks missing.
  static Column categorical_from_text(std::string name,
                                      const std::vector<std::optional<std::string>>& cells);

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::Numeric; }
  std::size_t size() const noexcept;
  std::size_t missing_count() const noexcept { return missing_count_; }
  bool is_missing(std::size_t row) const;

  std::span<const double> numeric_values() const;
  std::span<const std::int32_t> codes() const;
  std::span<const std::string> labels() const;
  std::optional<std::int32_t> code_of(std::string_view label) const;

  /// Labels with at least one occurrence (categorical), in label order.
  std::vector<std::string> present_labels() const;
  /// Sorted distinct non-missing values (numeric).
  std::vector<double> distinct_values() const;
  /// Number of distinct non-missing values, for either kind.
  std::size_t unique_count() const;

  /// Cell rendered as text; empty string for a missing cell.
  std::string cell_text(std::size_t row) const;

  Column take(std::span<const std::size_t> rows) const;

 private:
  Column() = default;

  std::string name_;
  ColumnKind kind_ = ColumnKind::Categorical;
  std::size_t missing_count_ = 0;
  std::vector<double> values_;
  std::vector<std::int32_t> codes_;
  std::vector<std::string> labels_;
};

/// Immutable columnar table.
class Dataset {
 public:
  explicit Dataset(std::vector<Column> columns);

  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  std::span<const Column> columns() const noexcept { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }
  /// Throws ErrorCode::UnknownColumn.
  const Column& column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  Dataset take(std::span<const std::size_t> rows) const;

 private:
  std::vector<Column> columns_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t rows_ = 0;
};

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  std::vector<std::string> missing_tokens{"", "NA", "null"};
  /// Minimum share of non-missing cells that must parse as finite reals for
  /// a column to be typed Numeric.
  double numeric_threshold = 0.95;
  /// Columns forced to Categorical regardless of content.
  std::vector<std::string> force_categorical;
  std::size_t max_rows = 0;  // 0 = unlimited
};

Dataset parse_csv(std::string_view text, const CsvOptions& options = {});
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
void write_csv(const Dataset& dataset, std::ostream& out, char delimiter = ',');

/// Parses a finite real, tolerating surrounding blanks.
std::optional<double> parse_real(std::string_view text);

/// Shortest text that round-trips to the same double.
std::string format_real(double value);

}  // namespace whim
