#pragma once

// Personal dataset files: calendar JSON, conversation logs (JSONL) and
// question / golden-answer pairs.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/error.hpp"
#include "kgrag/io.hpp"

namespace kgrag {

using ordered_json = nlohmann::ordered_json;

struct CalendarEvent {
    std::string title;
    std::string date; // YYYY-MM-DD
    std::string time; // "HH:MM - HH:MM" or "All day"

    bool operator==(const CalendarEvent&) const = default;
};

struct MonthGroup {
    std::string month; // English month name, e.g. "January"
    std::vector<CalendarEvent> events;

    bool operator==(const MonthGroup&) const = default;
};

struct Calendar {
    std::string key;   // top-level key, e.g. "AlexCalendar2024"
    std::string owner; // key prefix before "Calendar"
    std::vector<MonthGroup> months;

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& m : months) n += m.events.size();
        return n;
    }

    bool operator==(const Calendar&) const = default;
};

struct ConversationMessage {
    std::string conversation_id;
    std::size_t seq = 0;
    std::string sender;
    std::string text;

    bool operator==(const ConversationMessage&) const = default;
};

struct QAPair {
    std::string id;
    std::string question;
    std::string golden_answer;

    bool operator==(const QAPair&) const = default;
};

/// Non-fatal findings (unknown fields, unusual conversation lengths).
struct Diagnostic {
    std::string location;
    std::string message;
};
using Diagnostics = std::vector<Diagnostic>;

inline constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

inline constexpr std::string_view kAllDay = "All day";

namespace detail {

inline std::optional<int> parse_fixed_int(std::string_view s) {
    int value = 0;
    if (s.empty()) return std::nullopt;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline std::optional<int> parse_clock(std::string_view s) {
    if (s.size() != 5 || s[2] != ':') return std::nullopt;
    auto hh = parse_fixed_int(s.substr(0, 2));
    auto mm = parse_fixed_int(s.substr(3, 2));
    if (!hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
    return *hh * 60 + *mm;
}

inline void warn(Diagnostics* sink, std::string location, std::string message) {
    if (sink) sink->push_back({std::move(location), std::move(message)});
}

inline ordered_json parse_json_text(std::string_view text, const std::string& source) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw Error(ErrorKind::malformed_json, source + " byte " + std::to_string(e.byte),
                    e.what());
    }
}

inline std::string pointer(const std::string& source, const std::string& ptr) {
    return source + "#" + ptr;
}

inline std::string escape_pointer_token(std::string_view token) {
    std::string out;
    for (char c : token) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

inline const std::string& require_string(const ordered_json& obj, std::string_view field,
                                         const std::string& where, ErrorKind kind) {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) {
        throw Error(kind, where, "missing \"" + std::string(field) + "\"");
    }
    if (!it->is_string()) {
        throw Error(kind, where + "/" + std::string(field), "expected a string");
    }
    return it->get_ref<const std::string&>();
}

inline void warn_unknown_fields(const ordered_json& obj,
                                std::initializer_list<std::string_view> known,
                                const std::string& where, Diagnostics* sink) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            warn(sink, where + "/" + escape_pointer_token(key),
                 "unknown field \"" + key + "\" ignored");
        }
    }
}

} // namespace detail

/// Index 1..12 of an English month name, or 0.
inline int month_number(std::string_view name) {
    for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
        if (kMonthNames[i] == name) return static_cast<int>(i) + 1;
    }
    return 0;
}

/// True for a real calendar date written as YYYY-MM-DD.
inline bool is_valid_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    auto y = detail::parse_fixed_int(s.substr(0, 4));
    auto m = detail::parse_fixed_int(s.substr(5, 2));
    auto d = detail::parse_fixed_int(s.substr(8, 2));
    if (!y || !m || !d) return false;
    using namespace std::chrono;
    return year_month_day{year{*y}, month{static_cast<unsigned>(*m)},
                          day{static_cast<unsigned>(*d)}}
        .ok();
}

/// "All day" or "HH:MM - HH:MM" with start <= end.
inline bool is_valid_time_range(std::string_view s) {
    if (s == kAllDay) return true;
    if (s.size() != 13 || s.substr(5, 3) != " - ") return false;
    auto start = detail::parse_clock(s.substr(0, 5));
    auto end = detail::parse_clock(s.substr(8, 5));
    return start && end && *start <= *end;
}

inline std::string owner_from_key(const std::string& key) {
    auto pos = key.find("Calendar");
    if (pos == std::string::npos || pos == 0) return key;
    return key.substr(0, pos);
}

inline Calendar parse_calendar(std::string_view text, const std::string& source,
                               Diagnostics* warnings = nullptr) {
    using detail::pointer;
    const ordered_json root = detail::parse_json_text(text, source);
    if (!root.is_object()) {
        throw Error(ErrorKind::malformed_json, pointer(source, ""), "expected a JSON object");
    }
    if (root.size() != 1) {
        throw Error(ErrorKind::schema_violation, pointer(source, ""),
                    "expected exactly one calendar key, found " + std::to_string(root.size()));
    }

    Calendar cal;
    const auto& [key, body] = *root.items().begin();
    cal.key = key;
    cal.owner = owner_from_key(key);
    const std::string key_ptr = "/" + detail::escape_pointer_token(key);
    if (!body.is_object()) {
        throw Error(ErrorKind::schema_violation, pointer(source, key_ptr),
                    "expected an object of month arrays");
    }

    for (const auto& [month, entries] : body.items()) {
        const std::string month_ptr = key_ptr + "/" + detail::escape_pointer_token(month);
        const int month_no = month_number(month);
        if (month_no == 0) {
            throw Error(ErrorKind::schema_violation, pointer(source, month_ptr),
                        "unknown month name \"" + month + "\"");
        }
        if (!entries.is_array()) {
            throw Error(ErrorKind::schema_violation, pointer(source, month_ptr),
                        "expected an array of events");
        }
        MonthGroup group{month, {}};
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& entry = entries[i];
            const std::string where = pointer(source, month_ptr + "/" + std::to_string(i));
            if (!entry.is_object()) {
                throw Error(ErrorKind::schema_violation, where, "expected an event object");
            }
            CalendarEvent ev;
            ev.title = detail::require_string(entry, "event", where, ErrorKind::schema_violation);
            ev.date = detail::require_string(entry, "date", where, ErrorKind::schema_violation);
            ev.time = detail::require_string(entry, "time", where, ErrorKind::schema_violation);
            if (ev.title.empty()) {
                throw Error(ErrorKind::schema_violation, where + "/event", "empty event title");
            }
            if (!is_valid_date(ev.date)) {
                throw Error(ErrorKind::schema_violation, where + "/date",
                            "invalid calendar date \"" + ev.date + "\"");
            }
            if (detail::parse_fixed_int(ev.date.substr(5, 2)) != month_no) {
                throw Error(ErrorKind::schema_violation, where + "/date",
                            "date " + ev.date + " is outside month group " + month);
            }
            if (!is_valid_time_range(ev.time)) {
                throw Error(ErrorKind::schema_violation, where + "/time",
                            "time must be \"HH:MM - HH:MM\" or \"All day\", got \"" + ev.time +
                                "\"");
            }
            detail::warn_unknown_fields(entry, {"event", "date", "time"}, where, warnings);
            group.events.push_back(std::move(ev));
        }
        cal.months.push_back(std::move(group));
    }
    return cal;
}

inline Calendar load_calendar(const std::filesystem::path& path, Diagnostics* warnings = nullptr) {
    return parse_calendar(read_file(path), path.string(), warnings);
}

inline ordered_json calendar_to_json(const Calendar& cal) {
    ordered_json months = ordered_json::object();
    for (const auto& group : cal.months) {
        ordered_json events = ordered_json::array();
        for (const auto& ev : group.events) {
            events.push_back({{"event", ev.title}, {"date", ev.date}, {"time", ev.time}});
        }
        months[group.month] = std::move(events);
    }
    ordered_json root = ordered_json::object();
    root[cal.key] = std::move(months);
    return root;
}

inline std::string serialize_calendar(const Calendar& cal) {
    return calendar_to_json(cal).dump(2) + "\n";
}

inline constexpr std::size_t kMinConversationLength = 10;
inline constexpr std::size_t kMaxConversationLength = 20;

/**
 * Line-delimited JSON, one {"conversation_id","sender","text"} object per
 * line. Sequence numbers follow line order within each conversation; the
 * result is ordered by (conversation_id, seq). Blank lines are skipped.
 */
inline std::vector<ConversationMessage> parse_conversations(std::string_view text,
                                                            const std::string& source,
                                                            Diagnostics* warnings = nullptr) {
    std::vector<ConversationMessage> messages;
    std::map<std::string, std::size_t> next_seq;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        const std::string where = source + ":" + std::to_string(line_no);
        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw Error(ErrorKind::malformed_json, where, e.what());
        }
        if (!obj.is_object()) {
            throw Error(ErrorKind::malformed_json, where, "expected a JSON object");
        }
        ConversationMessage msg;
        msg.conversation_id =
            detail::require_string(obj, "conversation_id", where, ErrorKind::malformed_json);
        msg.sender = detail::require_string(obj, "sender", where, ErrorKind::malformed_json);
        msg.text = detail::require_string(obj, "text", where, ErrorKind::malformed_json);
        if (msg.text.empty()) {
            throw Error(ErrorKind::malformed_json, where, "empty \"text\"");
        }
        detail::warn_unknown_fields(obj, {"conversation_id", "sender", "text"}, where, warnings);
        msg.seq = next_seq[msg.conversation_id]++;
        messages.push_back(std::move(msg));
    }

    std::stable_sort(messages.begin(), messages.end(), [](const auto& a, const auto& b) {
        return a.conversation_id < b.conversation_id;
    });
    for (const auto& [id, count] : next_seq) {
        if (count < kMinConversationLength || count > kMaxConversationLength) {
            detail::warn(warnings, source,
                         "conversation \"" + id + "\" has " + std::to_string(count) +
                             " messages, expected 10 to 20");
        }
    }
    return messages;
}

inline std::vector<ConversationMessage> load_conversations(const std::filesystem::path& path,
                                                           Diagnostics* warnings = nullptr) {
    return parse_conversations(read_file(path), path.string(), warnings);
}

inline std::string serialize_conversations(const std::vector<ConversationMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        ordered_json line = {
            {"conversation_id", m.conversation_id}, {"sender", m.sender}, {"text", m.text}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

inline std::vector<QAPair> parse_qa_pairs(std::string_view text, const std::string& source,
                                          Diagnostics* warnings = nullptr) {
    using detail::pointer;
    const ordered_json root = detail::parse_json_text(text, source);
    if (!root.is_array()) {
        throw Error(ErrorKind::malformed_json, pointer(source, ""), "expected a JSON array");
    }
    std::vector<QAPair> pairs;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const auto& obj = root[i];
        const std::string where = pointer(source, "/" + std::to_string(i));
        if (!obj.is_object()) {
            throw Error(ErrorKind::malformed_json, where, "expected a JSON object");
        }
        QAPair qa;
        qa.id = detail::require_string(obj, "id", where, ErrorKind::schema_violation);
        qa.question = detail::require_string(obj, "question", where, ErrorKind::schema_violation);
        qa.golden_answer =
            detail::require_string(obj, "golden_answer", where, ErrorKind::schema_violation);
        if (qa.question.empty() || qa.golden_answer.empty()) {
            throw Error(ErrorKind::schema_violation, where, "empty question or golden_answer");
        }
        if (!seen.insert(qa.id).second) {
            throw Error(ErrorKind::duplicate_id, where + "/id", qa.id);
        }
        detail::warn_unknown_fields(obj, {"id", "question", "golden_answer"}, where, warnings);
        pairs.push_back(std::move(qa));
    }
    return pairs;
}

inline std::vector<QAPair> load_qa_pairs(const std::filesystem::path& path,
                                         Diagnostics* warnings = nullptr) {
    return parse_qa_pairs(read_file(path), path.string(), warnings);
}

inline std::string serialize_qa_pairs(const std::vector<QAPair>& pairs) {
    ordered_json arr = ordered_json::array();
    for (const auto& qa : pairs) {
        arr.push_back({{"id", qa.id}, {"question", qa.question}, {"golden_answer", qa.golden_answer}});
    }
    return arr.dump(2) + "\n";
}

} // namespace kgrag
