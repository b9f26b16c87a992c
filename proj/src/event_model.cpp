#include "stability_meter/event_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "stability_meter/errors.hpp"

namespace stability_meter {

const AttributeValue* Event::attribute(std::string_view name) const {
  for (const auto& [key, value] : attributes) {
    if (key == name) return &value;
  }
  return nullptr;
}

namespace {

// Reads one CSV record (RFC 4180 quoting, LF or CRLF). Returns false at EOF.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw FormatError(fmt::format("unterminated quoted field at line {}", line));
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool all_blank(const std::vector<std::string>& fields) {
  return std::all_of(fields.begin(), fields.end(),
                     [](const std::string& f) { return trim(f).empty(); });
}

std::optional<double> parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.find_first_not_of("+-0123456789.eE") != std::string_view::npos) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <typename Int>
bool parse_fixed(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw FormatError("empty timestamp");

  if (s.find_first_not_of("0123456789") == std::string_view::npos) {
    std::int64_t v = 0;
    if (!parse_fixed(s, v)) throw FormatError(fmt::format("timestamp out of range: '{}'", s));
    return v;
  }

  // YYYY-MM-DD[(T| )HH:MM[:SS[.fff...]]][Z|(+|-)HH[:]MM]
  const auto fail = [&] { return FormatError(fmt::format("unrecognized timestamp: '{}'", s)); };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw fail();
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  if (!parse_fixed(s.substr(0, 4), year) || !parse_fixed(s.substr(5, 2), month) ||
      !parse_fixed(s.substr(8, 2), day)) {
    throw fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw fail();

  std::int64_t ms = 0;
  std::string_view rest = s.substr(10);
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') throw fail();
    rest.remove_prefix(1);
    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (rest.size() < 5 || rest[2] != ':' || !parse_fixed(rest.substr(0, 2), hh) ||
        !parse_fixed(rest.substr(3, 2), mm)) {
      throw fail();
    }
    rest.remove_prefix(5);
    if (!rest.empty() && rest[0] == ':') {
      if (rest.size() < 3 || !parse_fixed(rest.substr(1, 2), ss)) throw fail();
      rest.remove_prefix(3);
    }
    int frac_ms = 0;
    if (!rest.empty() && (rest[0] == '.' || rest[0] == ',')) {
      rest.remove_prefix(1);
      std::size_t n = 0;
      int scale = 100;
      while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') {
        frac_ms += (rest[n] - '0') * scale;
        scale /= 10;
        ++n;
      }
      if (n == 0) throw fail();
      rest.remove_prefix(n);
    }
    if (hh > 23 || mm > 59 || ss > 60) throw fail();
    ms = ((hh * 60LL + mm) * 60LL + ss) * 1000LL + frac_ms;

    if (!rest.empty()) {
      if (rest == "Z") {
        rest = {};
      } else if (rest[0] == '+' || rest[0] == '-') {
        const int sign = rest[0] == '-' ? -1 : 1;
        rest.remove_prefix(1);
        int oh = 0;
        int om = 0;
        if (rest.size() == 5 && rest[2] == ':') {
          if (!parse_fixed(rest.substr(0, 2), oh) || !parse_fixed(rest.substr(3, 2), om)) throw fail();
        } else if (rest.size() == 4) {
          if (!parse_fixed(rest.substr(0, 2), oh) || !parse_fixed(rest.substr(2, 2), om)) throw fail();
        } else if (rest.size() == 2) {
          if (!parse_fixed(rest, oh)) throw fail();
        } else {
          throw fail();
        }
        // Local time = UTC + offset.
        ms -= sign * (oh * 60LL + om) * 60'000LL;
      } else {
        throw fail();
      }
    }
  }

  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  const std::int64_t result = static_cast<std::int64_t>(days) * 86'400'000LL + ms;
  if (result < 0) throw FormatError(fmt::format("timestamp before epoch: '{}'", s));
  return result;
}

EventLog parse_log(std::istream& source) {
  std::vector<std::string> header;
  std::size_t line = 1;
  if (!read_record(source, header, line) || all_blank(header)) throw EmptyLogError();
  for (auto& h : header) h = std::string(trim(h));
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  const auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError(fmt::format("missing required column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_case = column("case_id");
  const std::size_t c_activity = column("activity");
  const std::size_t c_time = column("timestamp");
  const std::size_t c_label = column("label");

  std::vector<std::size_t> attr_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != c_case && i != c_activity && i != c_time && i != c_label) attr_cols.push_back(i);
  }

  struct RawRow {
    std::vector<std::string> fields;
    std::size_t row = 0;
  };
  std::vector<RawRow> rows;
  std::vector<std::string> fields;
  while (read_record(source, fields, line)) {
    if (all_blank(fields)) continue;
    if (fields.size() != header.size()) {
      throw FormatError(fmt::format("row {} has {} fields, header has {}", rows.size() + 1,
                                    fields.size(), header.size()));
    }
    rows.push_back({fields, rows.size()});
  }
  if (rows.empty()) throw EmptyLogError();

  EventLog log;
  // A column is numeric iff every non-empty value parses as a decimal.
  for (const std::size_t col : attr_cols) {
    bool numeric = false;
    bool seen = false;
    for (const auto& r : rows) {
      if (trim(r.fields[col]).empty()) continue;
      seen = true;
      numeric = parse_decimal(r.fields[col]).has_value();
      if (!numeric) break;
    }
    log.attributes.push_back(
        {header[col], seen && numeric ? AttributeKind::numeric : AttributeKind::categorical});
  }

  std::unordered_map<std::string, std::size_t> case_index;
  for (const auto& r : rows) {
    const std::size_t row_no = r.row + 1;
    std::string case_id(trim(r.fields[c_case]));
    if (case_id.empty()) throw ValueError(fmt::format("row {}: empty case_id", row_no));

    Event e;
    e.case_id = case_id;
    e.activity = std::string(trim(r.fields[c_activity]));
    try {
      e.timestamp_ms = parse_timestamp(r.fields[c_time]);
    } catch (const FormatError& err) {
      throw FormatError(fmt::format("row {}: {}", row_no, err.what()));
    }
    e.row = r.row;
    for (std::size_t a = 0; a < attr_cols.size(); ++a) {
      const std::string_view raw = trim(r.fields[attr_cols[a]]);
      if (raw.empty()) continue;
      if (log.attributes[a].kind == AttributeKind::numeric) {
        e.attributes.emplace_back(log.attributes[a].name, *parse_decimal(raw));
      } else {
        e.attributes.emplace_back(log.attributes[a].name, std::string(raw));
      }
    }

    std::optional<Outcome> label;
    const std::string_view raw_label = trim(r.fields[c_label]);
    if (raw_label == "0") {
      label = Outcome::negative;
    } else if (raw_label == "1") {
      label = Outcome::positive;
    } else if (!raw_label.empty()) {
      throw ValueError(fmt::format("row {}: label must be 0 or 1, got '{}'", row_no, raw_label));
    }

    auto [it, inserted] = case_index.try_emplace(case_id, log.traces.size());
    if (inserted) log.traces.push_back(Trace{case_id, {}, std::nullopt});
    Trace& trace = log.traces[it->second];
    if (label) {
      if (trace.label && *trace.label != *label) {
        throw ValueError(
            fmt::format("row {}: conflicting label for case '{}'", row_no, case_id));
      }
      trace.label = label;
    }
    trace.events.push_back(std::move(e));
  }

  for (auto& trace : log.traces) {
    if (!trace.label) throw ValueError(fmt::format("case '{}' has no label", trace.case_id));
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp_ms < b.timestamp_ms; });
    for (std::size_t i = 0; i < trace.events.size(); ++i) trace.events[i].position = i + 1;
  }
  return log;
}

EventLog parse_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return parse_log(in);
}

std::vector<StreamItem> replay(std::span<const Trace> traces) {
  struct Ref {
    std::int64_t timestamp;
    std::size_t row;
    std::size_t trace;
    std::size_t event;
  };
  std::vector<Ref> order;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    for (std::size_t e = 0; e < traces[t].events.size(); ++e) {
      const Event& ev = traces[t].events[e];
      order.push_back({ev.timestamp_ms, ev.row, t, e});
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const Ref& a, const Ref& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.row < b.row;
  });

  std::vector<StreamItem> items;
  items.reserve(order.size());
  for (const Ref& r : order) {
    const Trace& trace = traces[r.trace];
    StreamItem item{trace.events[r.event], false, std::nullopt};
    if (r.event + 1 == trace.events.size()) {
      item.is_case_end = true;
      item.label = trace.label;
    }
    items.push_back(std::move(item));
  }
  return items;
}

void write_log(std::ostream& out, std::span<const Trace> traces,
               std::span<const AttributeColumn> attributes) {
  out << "case_id,activity,timestamp,label";
  for (const auto& a : attributes) out << ',' << csv_escape(a.name);
  out << '\n';
  std::unordered_map<std::string_view, int> labels;
  for (const Trace& t : traces) labels.emplace(t.case_id, t.label ? to_int(*t.label) : 0);
  for (const StreamItem& item : replay(traces)) {
    const Event& e = item.event;
    out << csv_escape(e.case_id) << ',' << csv_escape(e.activity) << ',' << e.timestamp_ms << ','
        << labels.at(e.case_id);
    for (const auto& a : attributes) {
      out << ',';
      if (const AttributeValue* v = e.attribute(a.name)) {
        if (const auto* d = std::get_if<double>(v)) {
          out << fmt::format("{}", *d);
        } else {
          out << csv_escape(std::get<std::string>(*v));
        }
      }
    }
    out << '\n';
  }
}

}  // namespace stability_meter
