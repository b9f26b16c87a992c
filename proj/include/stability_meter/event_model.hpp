#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace stability_meter {

/// Binary case outcome. Positives are `positive`.
enum class Outcome : std::uint8_t { negative = 0, positive = 1 };

inline int to_int(Outcome o) { return static_cast<int>(o); }

enum class AttributeKind : std::uint8_t { categorical, numeric };

using AttributeValue = std::variant<std::string, double>;

/// Ordered name -> value list. Order follows the log's column order.
using Attributes = std::vector<std::pair<std::string, AttributeValue>>;

struct AttributeColumn {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;

  bool operator==(const AttributeColumn&) const = default;
};

/// One activity occurrence within a case.
struct Event {
  std::string case_id;
  std::string activity;
  std::int64_t timestamp_ms = 0;
  std::size_t position = 1;  // 1-based within the case
  Attributes attributes;
  std::size_t row = 0;       // 0-based data row in the source log; replay tie-break key

  const AttributeValue* attribute(std::string_view name) const;

  bool operator==(const Event&) const = default;
};

/// A complete case: its events in position order and its outcome.
struct Trace {
  std::string case_id;
  std::vector<Event> events;
  std::optional<Outcome> label;

  std::size_t length() const { return events.size(); }

  bool operator==(const Trace&) const = default;
};

struct StreamItem {
  Event event;
  bool is_case_end = false;
  std::optional<Outcome> label;  // present iff is_case_end
};

struct EventLog {
  std::vector<Trace> traces;              // ordered by first appearance in the file
  std::vector<AttributeColumn> attributes;  // extra columns, file order
};

/// Parses the CSV event-log format (header row; columns case_id, activity,
/// timestamp, label; any further columns become event attributes).
///
/// Events of a case are ordered by timestamp with ties kept in row order. The
/// label may be given on every row of a case or only on some of them, but all
/// given values must agree. A case ends at its last row in the file.
EventLog parse_log(std::istream& source);
EventLog parse_log_file(const std::filesystem::path& path);

/// Integer milliseconds, or an ISO-8601 date/date-time normalized to
/// milliseconds since the Unix epoch.
std::int64_t parse_timestamp(std::string_view text);

/// Emits every event of every trace in global (timestamp, row) order and
/// marks the last event of each case with its label.
std::vector<StreamItem> replay(std::span<const Trace> traces);

/// Serializes traces back to the CSV format, one row per event in replay
/// order, label repeated on every row.
void write_log(std::ostream& out, std::span<const Trace> traces,
               std::span<const AttributeColumn> attributes);

}  // namespace stability_meter
