#include <algorithm>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "whim/dataset.hpp"
#include "whim/error.hpp"

namespace whim {
namespace {

using Record = std::vector<std::string>;

// RFC 4180 records: quoted fields may hold delimiters, doubled quotes and
// line breaks. Blank lines are skipped.
class RecordReader {
 public:
  RecordReader(std::string_view text, char delimiter) : text_(text), delimiter_(delimiter) {
    if (text_.size() >= 3 && text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  bool next(Record& record, std::size_t& line) {
    record.clear();
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    line = line_;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_++];
      if (quoted) {
        if (ch == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"' && field.empty()) {
        quoted = true;
      } else if (ch == delimiter_) {
        record.push_back(std::move(field));
        field.clear();
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        break;
      } else {
        field.push_back(ch);
      }
    }
    if (quoted) fail(ErrorCode::Ingestion, "unterminated quoted field starting on line " + std::to_string(line));
    record.push_back(std::move(field));
    return true;
  }

 private:
  std::string_view text_;
  char delimiter_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

bool needs_quotes(const std::string& text, char delimiter) {
  return text.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  RecordReader reader(text, options.delimiter);
  Record record;
  std::size_t line = 0;
  std::vector<std::string> names;
  std::vector<Record> rows;

  if (!reader.next(record, line)) fail(ErrorCode::Ingestion, "input is empty");
  if (options.header) {
    names = record;
  } else {
    for (std::size_t i = 0; i < record.size(); ++i) names.push_back("column_" + std::to_string(i + 1));
    rows.push_back(record);
  }
  const std::size_t width = names.size();
  if (!rows.empty() && rows.front().size() != width)
    fail(ErrorCode::Ingestion, "row 1 has inconsistent length");

  while (reader.next(record, line)) {
    if (record.size() != width)
      fail(ErrorCode::Ingestion, "row " + std::to_string(rows.size() + 1) + " (line " + std::to_string(line) +
                                     ") has " + std::to_string(record.size()) + " fields, header has " +
                                     std::to_string(width));
    rows.push_back(record);
    if (options.max_rows > 0 && rows.size() > options.max_rows)
      fail(ErrorCode::Ingestion, "row count exceeds the cap of " + std::to_string(options.max_rows));
  }
  if (rows.empty()) fail(ErrorCode::Ingestion, "no data rows");

  const auto is_missing_token = [&](const std::string& cell) {
    return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), cell) !=
           options.missing_tokens.end();
  };

  std::vector<Column> columns;
  columns.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    std::size_t present = 0;
    std::size_t parseable = 0;
    std::vector<double> values(rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string& cell = rows[r][c];
      if (is_missing_token(cell)) continue;
      ++present;
      if (auto v = parse_real(cell)) {
        values[r] = *v;
        ++parseable;
      }
    }
    const bool forced = std::find(options.force_categorical.begin(), options.force_categorical.end(),
                                  names[c]) != options.force_categorical.end();
    const bool numeric = !forced && present > 0 &&
                         static_cast<double>(parseable) >= options.numeric_threshold * static_cast<double>(present);
    if (numeric) {
      columns.push_back(Column::numeric(names[c], std::move(values)));
    } else {
      std::vector<std::optional<std::string>> cells(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r)
        if (!is_missing_token(rows[r][c])) cells[r] = rows[r][c];
      columns.push_back(Column::categorical_from_text(names[c], cells));
    }
  }
  return Dataset(std::move(columns));
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Ingestion, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

void write_csv(const Dataset& dataset, std::ostream& out, char delimiter) {
  const auto emit = [&](const std::string& text) {
    if (!needs_quotes(text, delimiter)) {
      out << text;
      return;
    }
    out << '"';
    for (char ch : text) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  };
  const auto columns = dataset.columns();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << delimiter;
    emit(columns[c].name());
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << delimiter;
      emit(columns[c].cell_text(r));
    }
    out << '\n';
  }
}

}  // namespace whim
