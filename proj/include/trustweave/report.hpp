#pragma once

#include <string>
#include <utility>
#include <vector>

namespace trustweave {

/// Line-delimited `kind key=value ...` records with caller-fixed field
/// order; trivially diffable and byte-stable for identical runs.
class ReportRecord {
 public:
  explicit ReportRecord(std::string kind) : kind_(std::move(kind)) {}

  ReportRecord& field(const std::string& key, const std::string& value) {
    fields_.emplace_back(key, value);
    return *this;
  }
  ReportRecord& field(const std::string& key, long long value) {
    return field(key, std::to_string(value));
  }

  std::string line() const {
    std::string out = kind_;
    for (const auto& [k, v] : fields_) out += " " + k + "=" + v;
    return out;
  }

 private:
  std::string kind_;
  std::vector<std::pair<std::string, std::string>> fields_;
};

class Report {
 public:
  void add(const ReportRecord& r) { lines_.push_back(r.line()); }
  void add_line(std::string line) { lines_.push_back(std::move(line)); }
  const std::vector<std::string>& lines() const { return lines_; }

  std::string text() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

 private:
  std::vector<std::string> lines_;
};

}  // namespace trustweave
