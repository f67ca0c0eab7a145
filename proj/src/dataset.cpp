#include "whim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "whim/error.hpp"

namespace whim {

std::string_view kind_name(ColumnKind kind) {
  return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

std::optional<double> parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string();
}

Column Column::numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::Numeric;
  for (double& v : values) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
  }
  c.missing_count_ = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }));
  c.values_ = std::move(values);
  return c;
}

Column Column::categorical(std::string name, std::vector<std::int32_t> codes,
                           std::vector<std::string> labels) {
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::Categorical;
  const auto n_labels = static_cast<std::int32_t>(labels.size());
  for (std::int32_t code : codes) {
    if (code < -1 || code >= n_labels) fail(ErrorCode::InvalidArgument, "categorical code out of range");
    if (code < 0) ++c.missing_count_;
  }
  if (!std::is_sorted(labels.begin(), labels.end()) ||
      std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    fail(ErrorCode::InvalidArgument, "categorical labels must be sorted and distinct");
  c.codes_ = std::move(codes);
  c.labels_ = std::move(labels);
  return c;
}

Column Column::categorical_from_text(std::string name,
                                     const std::vector<std::optional<std::string>>& cells) {
  std::set<std::string> seen;
  for (const auto& cell : cells)
    if (cell) seen.insert(*cell);
  std::vector<std::string> labels(seen.begin(), seen.end());
  std::vector<std::int32_t> codes;
  codes.reserve(cells.size());
  for (const auto& cell : cells) {
    if (!cell) {
      codes.push_back(-1);
      continue;
    }
    const auto it = std::lower_bound(labels.begin(), labels.end(), *cell);
    codes.push_back(static_cast<std::int32_t>(it - labels.begin()));
  }
  return categorical(std::move(name), std::move(codes), std::move(labels));
}

std::size_t Column::size() const noexcept { return is_numeric() ? values_.size() : codes_.size(); }

bool Column::is_missing(std::size_t row) const {
  return is_numeric() ? std::isnan(values_.at(row)) : codes_.at(row) < 0;
}

std::span<const double> Column::numeric_values() const {
  if (!is_numeric()) fail(ErrorCode::WrongColumnKind, "column '" + name_ + "' is not numeric");
  return values_;
}

std::span<const std::int32_t> Column::codes() const {
  if (is_numeric()) fail(ErrorCode::WrongColumnKind, "column '" + name_ + "' is not categorical");
  return codes_;
}

std::span<const std::string> Column::labels() const {
  if (is_numeric()) fail(ErrorCode::WrongColumnKind, "column '" + name_ + "' is not categorical");
  return labels_;
}

std::optional<std::int32_t> Column::code_of(std::string_view label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<std::int32_t>(it - labels_.begin());
}

std::vector<std::string> Column::present_labels() const {
  std::vector<char> present(labels().size(), 0);
  for (std::int32_t code : codes_)
    if (code >= 0) present[static_cast<std::size_t>(code)] = 1;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (present[i]) out.push_back(labels_[i]);
  return out;
}

std::vector<double> Column::distinct_values() const {
  std::vector<double> out;
  for (double v : numeric_values())
    if (!std::isnan(v)) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t Column::unique_count() const {
  return is_numeric() ? distinct_values().size() : present_labels().size();
}

std::string Column::cell_text(std::size_t row) const {
  if (is_missing(row)) return {};
  return is_numeric() ? format_real(values_[row]) : labels_[static_cast<std::size_t>(codes_[row])];
}

Column Column::take(std::span<const std::size_t> rows) const {
  Column c;
  c.name_ = name_;
  c.kind_ = kind_;
  c.labels_ = labels_;
  if (is_numeric()) {
    c.values_.reserve(rows.size());
    for (std::size_t r : rows) c.values_.push_back(values_.at(r));
    c.missing_count_ = static_cast<std::size_t>(
        std::count_if(c.values_.begin(), c.values_.end(), [](double v) { return std::isnan(v); }));
  } else {
    c.codes_.reserve(rows.size());
    for (std::size_t r : rows) c.codes_.push_back(codes_.at(r));
    c.missing_count_ = static_cast<std::size_t>(std::count(c.codes_.begin(), c.codes_.end(), -1));
  }
  return c;
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) fail(ErrorCode::Ingestion, "dataset has no columns");
  rows_ = columns_.front().size();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const Column& c = columns_[i];
    if (c.name().empty()) fail(ErrorCode::Ingestion, "column " + std::to_string(i + 1) + " has an empty name");
    if (c.size() != rows_)
      fail(ErrorCode::Ingestion, "column '" + c.name() + "' has " + std::to_string(c.size()) +
                                     " cells, expected " + std::to_string(rows_));
    if (!index_.emplace(c.name(), i).second)
      fail(ErrorCode::Ingestion, "duplicate column name '" + c.name() + "'");
  }
}

const Column& Dataset::column(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
  return columns_[it->second];
}

bool Dataset::has_column(std::string_view name) const { return index_.find(name) != index_.end(); }

Dataset Dataset::take(std::span<const std::size_t> rows) const {
  std::vector<Column> out;
  out.reserve(columns_.size());
  for (const Column& c : columns_) out.push_back(c.take(rows));
  return Dataset(std::move(out));
}

}  // namespace whim
