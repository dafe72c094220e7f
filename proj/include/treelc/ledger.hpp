#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "treelc/canonical.hpp"
#include "treelc/errors.hpp"
#include "treelc/independence.hpp"
#include "treelc/prufer.hpp"
#include "treelc/tree.hpp"

namespace treelc {

struct CounterexampleRecord {
  PruferCode code;
  Score score;
  IndependenceSequence sequence;
  int alpha = 0;
  int epoch_found = 0;
  /// canonical_hash of the decoded tree.
  std::string canonical;
  bool conjecture_ok = true;

  int n() const noexcept { return code.n(); }
};

/// Scores `code` at `index` and fills every derived field.
inline CounterexampleRecord make_record(const PruferCode& code, int index, int epoch) {
  const auto tree = decode(code);
  CounterexampleRecord r;
  r.code = code;
  r.sequence = independence_sequence(tree);
  r.alpha = r.sequence.alpha();
  r.score = score_at(r.sequence, index);
  r.epoch_found = epoch;
  r.canonical = canonical_hash(tree);
  r.conjecture_ok = check_alpha_conjecture(r.sequence, index);
  return r;
}

// One record per line, tab separated:
//   code tokens, index, score, coefficients, alpha, epoch, canonical hash

inline std::string format_record(const CounterexampleRecord& r) {
  std::string line = format_code(r.code);
  line += '\t';
  line += std::to_string(r.score.index);
  line += '\t';
  line += to_decimal(r.score.value);
  line += '\t';
  line += format_sequence(r.sequence);
  line += '\t';
  line += std::to_string(r.alpha);
  line += '\t';
  line += std::to_string(r.epoch_found);
  line += '\t';
  line += r.canonical;
  return line;
}

/// Syntactic parse only; stored numbers are taken at face value (see verify_ledger).
inline CounterexampleRecord parse_record(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() != 7) {
    throw ValidationError("ledger record needs 7 tab-separated fields, got " + std::to_string(fields.size()));
  }
  auto parse_small = [](std::string_view s, const char* what) {
    int v = 0;
    if (!detail::parse_int(s, v)) throw ValidationError(std::string("bad ") + what + " field '" + std::string(s) + "'");
    return v;
  };
  CounterexampleRecord r;
  std::size_t token_count = fields[0].empty() ? 0 : static_cast<std::size_t>(std::count(fields[0].begin(), fields[0].end(), ' ') + 1);
  r.code = parse_code_line(fields[0], static_cast<int>(token_count) + 2);
  r.score.index = parse_small(fields[1], "index");
  r.score.value = parse_decimal(fields[2]);
  r.score.beta = r.code.n() / 2 - r.score.index;
  r.sequence.n = r.code.n();
  r.sequence.coeffs = parse_sequence(fields[3]);
  r.alpha = parse_small(fields[4], "alpha");
  r.epoch_found = parse_small(fields[5], "epoch");
  r.canonical = std::string(fields[6]);
  const int half = r.code.n() / 2;
  r.conjecture_ok = r.alpha >= half + r.score.beta + 1;
  return r;
}

/// Deduplicated counterexample set. Insertion is keyed by code; isomorphism
/// classes are tracked through the canonical hash. Inserts are serialized by
/// an internal mutex, so concurrent producers may share one ledger.
class Ledger {
 public:
  Ledger() = default;
  Ledger(const Ledger& other) { copy_from(other); }
  Ledger& operator=(const Ledger& other) {
    if (this != &other) copy_from(other);
    return *this;
  }
  Ledger(Ledger&& other) noexcept
      : records_(std::move(other.records_)), codes_(std::move(other.codes_)), classes_(std::move(other.classes_)) {}
  Ledger& operator=(Ledger&& other) noexcept {
    records_ = std::move(other.records_);
    codes_ = std::move(other.codes_);
    classes_ = std::move(other.classes_);
    return *this;
  }

  /// True iff no record with the same code existed.
  bool insert(CounterexampleRecord record) {
    if (!record.score.positive()) throw PreconditionError("ledger accepts only positive scores");
    std::lock_guard lock(mutex_);
    if (!codes_.insert(format_code(record.code)).second) return false;
    ++classes_[record.canonical];
    records_.push_back(std::move(record));
    return true;
  }

  bool contains(const PruferCode& code) const {
    std::lock_guard lock(mutex_);
    return codes_.contains(format_code(code));
  }

  const std::vector<CounterexampleRecord>& records() const noexcept { return records_; }
  std::size_t distinct_codes() const noexcept { return records_.size(); }
  std::size_t distinct_classes() const noexcept { return classes_.size(); }

  std::size_t conjecture_violations() const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const auto& r) { return !r.conjecture_ok; }));
  }

  void write(std::ostream& out) const {
    for (const auto& r : records_) out << format_record(r) << '\n';
  }

  /// Writes via a temporary file and rename.
  void save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw RuntimeFailure("cannot write " + tmp.string());
      write(out);
      if (!out) throw RuntimeFailure("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  static Ledger read(std::istream& in) {
    Ledger ledger;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      try {
        auto r = parse_record(line);
        if (!r.score.positive()) throw ValidationError("non-positive score");
        ledger.insert(std::move(r));
      } catch (const std::invalid_argument& e) {
        throw ValidationError("ledger line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
    }
    return ledger;
  }

  static Ledger load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot read ledger " + path.string());
    return read(in);
  }

 private:
  void copy_from(const Ledger& other) {
    std::lock_guard lock(other.mutex_);
    records_ = other.records_;
    codes_ = other.codes_;
    classes_ = other.classes_;
  }

  mutable std::mutex mutex_;
  std::vector<CounterexampleRecord> records_;
  std::unordered_set<std::string> codes_;
  std::unordered_map<std::string, std::size_t> classes_;
};

inline bool dedup_insert(Ledger& ledger, CounterexampleRecord record) { return ledger.insert(std::move(record)); }

struct VerifyReport {
  std::size_t checked = 0;
  /// "line <k>: <what differs>" for every record that does not rescore.
  std::vector<std::string> mismatches;
  /// 1-based line numbers of records whose recomputed alpha breaks the conjecture.
  std::vector<std::size_t> violations;

  bool ok() const noexcept { return mismatches.empty() && violations.empty(); }
};

/// Re-derives every field of every record from its code. Unparseable lines
/// count as mismatches rather than aborting the scan.
inline VerifyReport verify_ledger(std::istream& in) {
  VerifyReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++report.checked;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    CounterexampleRecord stored;
    try {
      stored = parse_record(line);
    } catch (const std::exception& e) {
      report.mismatches.push_back(where + "unparseable (" + e.what() + ")");
      continue;
    }
    CounterexampleRecord fresh;
    try {
      fresh = make_record(stored.code, stored.score.index, stored.epoch_found);
    } catch (const std::exception& e) {
      report.mismatches.push_back(where + "cannot rescore (" + e.what() + ")");
      continue;
    }
    std::vector<std::string> diffs;
    if (fresh.score.value != stored.score.value) {
      diffs.push_back("score " + to_decimal(stored.score.value) + " != recomputed " + to_decimal(fresh.score.value));
    }
    if (fresh.sequence.coeffs != stored.sequence.coeffs) diffs.emplace_back("coefficient list differs");
    if (fresh.alpha != stored.alpha) {
      diffs.push_back("alpha " + std::to_string(stored.alpha) + " != recomputed " + std::to_string(fresh.alpha));
    }
    if (fresh.canonical != stored.canonical) diffs.emplace_back("canonical hash differs");
    if (!fresh.score.positive()) diffs.emplace_back("recomputed score is not positive");
    for (const auto& d : diffs) report.mismatches.push_back(where + d);
    if (diffs.empty() && !fresh.conjecture_ok) report.violations.push_back(line_no);
  }
  return report;
}

}  // namespace treelc
