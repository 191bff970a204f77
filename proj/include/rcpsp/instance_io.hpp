#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcpsp/error.hpp"
#include "rcpsp/ga.hpp"
#include "rcpsp/project_model.hpp"
#include "rcpsp/schedule.hpp"

namespace rcpsp {

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest round-trip decimal rendering of `x` ("." separator, locale independent).
inline std::string format_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < offset; ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

using json = nlohmann::json;

inline void require_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }) == allowed.end())
            throw ParseError(path + "/" + key + ": unknown field '" + key + "'");
    }
}

inline const json& field(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + ": missing required field '" + std::string(key) + "'");
    return *it;
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
    return v.get<std::int64_t>();
}

inline int as_int(const json& v, const std::string& path) {
    auto x = as_integer(v, path);
    if (x < INT32_MIN || x > INT32_MAX) throw ParseError(path + ": integer out of range");
    return static_cast<int>(x);
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ParseError(path + ": expected a string");
    return v.get<std::string>();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Native JSON instance format
//
// {
//   "name": "T1",
//   "ticks_per_day": 1,
//   "groups": [{"id": 1, "name": "crew", "capacity": 2}],
//   "activities": [{"id": 1, "duration": 2, "workgroup": "cabin",
//                   "demands": {"1": 1}, "successors": [3]}]
// }

/// Parses and validates a native instance document. Syntax errors carry line and
/// column; schema errors carry the JSON pointer of the offending value; semantic
/// errors throw InvalidInstance listing every violation.
inline Instance parse_native(std::string_view text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        auto [line, column] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(msg, line, column);
    }

    detail::require_keys(doc, "", {"name", "ticks_per_day", "groups", "activities"});
    Instance inst;
    if (doc.contains("name")) inst.name = detail::as_string(doc["name"], "/name");
    if (doc.contains("ticks_per_day")) {
        if (!doc["ticks_per_day"].is_number()) throw ParseError("/ticks_per_day: expected a number");
        inst.ticks_per_day = doc["ticks_per_day"].get<double>();
    }

    const auto& groups = detail::field(doc, "", "groups");
    if (!groups.is_array()) throw ParseError("/groups: expected an array");
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const std::string path = "/groups/" + std::to_string(k);
        const auto& g = groups[k];
        detail::require_keys(g, path, {"id", "name", "capacity"});
        ResourceGroup rg;
        rg.id = detail::as_int(detail::field(g, path, "id"), path + "/id");
        rg.name = g.contains("name") ? detail::as_string(g["name"], path + "/name") : "R" + std::to_string(rg.id);
        rg.capacity = detail::as_int(detail::field(g, path, "capacity"), path + "/capacity");
        inst.groups.push_back(std::move(rg));
    }

    const auto& acts = detail::field(doc, "", "activities");
    if (!acts.is_array()) throw ParseError("/activities: expected an array");
    for (std::size_t k = 0; k < acts.size(); ++k) {
        const std::string path = "/activities/" + std::to_string(k);
        const auto& a = acts[k];
        detail::require_keys(a, path, {"id", "duration", "workgroup", "demands", "successors"});
        Activity act;
        act.id = detail::as_int(detail::field(a, path, "id"), path + "/id");
        act.duration = detail::as_integer(detail::field(a, path, "duration"), path + "/duration");
        act.workgroup = a.contains("workgroup") ? detail::as_string(a["workgroup"], path + "/workgroup") : "default";
        if (a.contains("demands")) {
            const auto& d = a["demands"];
            if (!d.is_object()) throw ParseError(path + "/demands: expected an object");
            for (const auto& [key, units] : d.items()) {
                int group = 0;
                auto res = std::from_chars(key.data(), key.data() + key.size(), group);
                if (res.ec != std::errc{} || res.ptr != key.data() + key.size())
                    throw ParseError(path + "/demands/" + key + ": group key must be an integer id");
                act.demands[group] = detail::as_int(units, path + "/demands/" + key);
            }
        }
        if (a.contains("successors")) {
            const auto& s = a["successors"];
            if (!s.is_array()) throw ParseError(path + "/successors: expected an array");
            for (std::size_t j = 0; j < s.size(); ++j)
                inst.precedence.push_back({act.id, detail::as_int(s[j], path + "/successors/" + std::to_string(j))});
        }
        inst.activities.push_back(std::move(act));
    }

    auto report = validate_instance(inst);
    if (!report.ok()) throw InvalidInstance("invalid instance '" + inst.name + "'", report.messages());
    return inst;
}

inline std::string serialize_native(const Instance& inst) {
    using ojson = nlohmann::ordered_json;
    ojson doc;
    doc["name"] = inst.name;
    doc["ticks_per_day"] = inst.ticks_per_day;
    doc["groups"] = ojson::array();
    for (const auto& g : inst.groups) doc["groups"].push_back({{"id", g.id}, {"name", g.name}, {"capacity", g.capacity}});

    std::map<int, std::vector<int>> successors;
    std::set<Arc> arcs(inst.precedence.begin(), inst.precedence.end());
    for (const auto& arc : arcs) successors[arc.pred].push_back(arc.succ);

    doc["activities"] = ojson::array();
    for (const auto& a : inst.activities) {
        ojson demands = ojson::object();
        for (const auto& [group, units] : a.demands) demands[std::to_string(group)] = units;
        ojson succ = ojson::array();
        if (auto it = successors.find(a.id); it != successors.end())
            for (int s : it->second) succ.push_back(s);
        doc["activities"].push_back({{"id", a.id},
                                     {"duration", a.duration},
                                     {"workgroup", a.workgroup},
                                     {"demands", std::move(demands)},
                                     {"successors", std::move(succ)}});
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// PSPLIB single-mode (.sm)

namespace detail {

inline std::vector<std::string> tokens(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    auto trimmed = s.substr(std::min(s.size(), s.find_first_not_of(" \t")));
    if (trimmed.size() < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(trimmed[k])) != std::tolower(static_cast<unsigned char>(prefix[k])))
            return false;
    return true;
}

inline std::int64_t parse_number(const std::string& tok, std::size_t line, const char* what) {
    std::int64_t x = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError(std::string("non-numeric ") + what + " '" + tok + "'", line);
    return x;
}

/// Value after the last ':' of a "key : value ..." header line.
inline std::int64_t header_value(std::string_view line, std::size_t lineno) {
    auto colon = line.rfind(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'key : value'", lineno);
    auto toks = tokens(line.substr(colon + 1));
    if (toks.empty()) throw ParseError("missing value after ':'", lineno);
    return parse_number(toks[0], lineno, "header value");
}

struct ResourceLabel {
    char kind; // 'R', 'N' or 'D'
    int index;
};

/// Splits "R 1  R 2  N 1" or "R1 R2 N1" into labels.
inline std::vector<ResourceLabel> resource_labels(const std::vector<std::string>& toks, std::size_t lineno) {
    std::vector<ResourceLabel> out;
    for (std::size_t k = 0; k < toks.size(); ++k) {
        const auto& t = toks[k];
        const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
        if (kind != 'R' && kind != 'N' && kind != 'D')
            throw ParseError("unexpected resource label '" + t + "'", lineno);
        std::string number = t.substr(1);
        if (number.empty()) {
            if (k + 1 >= toks.size()) throw ParseError("resource label '" + t + "' lacks an index", lineno);
            number = toks[++k];
        }
        out.push_back({kind, static_cast<int>(parse_number(number, lineno, "resource index"))});
    }
    return out;
}

} // namespace detail

/// Parses the single-mode PSPLIB layout. Dummy source and sink jobs are kept;
/// every activity gets workgroup "default" and renewable resource k becomes
/// group k named "Rk".
inline Instance parse_psplib(std::string_view text, std::string name = "") {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    auto is_rule = [](std::string_view l) { return detail::starts_with_ci(l, "*"); };
    auto is_blank = [](std::string_view l) { return l.find_first_not_of(" \t") == std::string_view::npos; };

    std::optional<int> declared_jobs;
    std::optional<int> renewable;
    std::size_t k = 0;
    auto find_section = [&](std::string_view header) -> std::optional<std::size_t> {
        for (std::size_t j = k; j < lines.size(); ++j)
            if (detail::starts_with_ci(lines[j], header)) return j;
        return std::nullopt;
    };

    for (; k < lines.size(); ++k) {
        const auto& l = lines[k];
        if (detail::starts_with_ci(l, "file with basedata") && name.empty()) {
            auto colon = l.find(':');
            auto toks = detail::tokens(l.substr(colon + 1));
            if (!toks.empty()) name = toks[0];
        } else if (detail::starts_with_ci(l, "jobs")) {
            declared_jobs = static_cast<int>(detail::header_value(l, k + 1));
        } else if (detail::starts_with_ci(l, "- renewable")) {
            auto colon = l.find(':');
            auto toks = detail::tokens(l.substr(colon + 1));
            if (toks.empty()) throw ParseError("missing renewable resource count", k + 1);
            renewable = static_cast<int>(detail::parse_number(toks[0], k + 1, "renewable resource count"));
        } else if (detail::starts_with_ci(l, "PRECEDENCE RELATIONS")) {
            break;
        }
    }
    if (!declared_jobs) throw ParseError("missing 'jobs (incl. supersource/sink )' header");

    Instance inst;
    inst.name = name;
    inst.ticks_per_day = 1.0;

    // precedence relations
    if (k >= lines.size()) throw ParseError("missing 'PRECEDENCE RELATIONS:' section");
    k += 2; // section title + column header
    std::map<int, std::size_t> job_line;
    for (; k < lines.size() && !is_rule(lines[k]); ++k) {
        if (is_blank(lines[k])) continue;
        auto toks = detail::tokens(lines[k]);
        const std::size_t lineno = k + 1;
        if (toks.size() < 3) throw ParseError("precedence row needs job, modes and successor count", lineno);
        const int job = static_cast<int>(detail::parse_number(toks[0], lineno, "job number"));
        const auto modes = detail::parse_number(toks[1], lineno, "mode count");
        const auto nsucc = detail::parse_number(toks[2], lineno, "successor count");
        if (modes != 1) throw ParseError("job " + std::to_string(job) + " has " + std::to_string(modes) +
                                             " modes; only single-mode files are supported",
                                         lineno);
        if (static_cast<std::int64_t>(toks.size()) != 3 + nsucc)
            throw ParseError("job " + std::to_string(job) + " declares " + std::to_string(nsucc) + " successors but lists " +
                                 std::to_string(toks.size() - 3),
                             lineno);
        if (!job_line.emplace(job, lineno).second) throw ParseError("duplicate job " + std::to_string(job), lineno);
        for (std::size_t j = 3; j < toks.size(); ++j)
            inst.precedence.push_back({job, static_cast<int>(detail::parse_number(toks[j], lineno, "successor"))});
    }
    if (static_cast<int>(job_line.size()) != *declared_jobs)
        throw ParseError("count mismatch: " + std::to_string(*declared_jobs) + " jobs declared, " +
                             std::to_string(job_line.size()) + " precedence rows found",
                         std::min(k + 1, lines.size()));

    // requests / durations
    auto req = find_section("REQUESTS/DURATIONS");
    if (!req) throw ParseError("missing 'REQUESTS/DURATIONS:' section", k + 1);
    k = *req + 1;
    if (k >= lines.size()) throw ParseError("missing requests header", k);
    const std::size_t header_lineno = k + 1;
    auto header = detail::tokens(lines[k]);
    // jobnr. mode duration <labels...>
    std::vector<std::string> label_tokens;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j >= 3) label_tokens.push_back(header[j]);
    const auto labels = detail::resource_labels(label_tokens, header_lineno);
    const int renewable_in_header = static_cast<int>(
        std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.kind == 'R'; }));
    if (renewable && *renewable != renewable_in_header)
        throw ParseError("count mismatch: " + std::to_string(*renewable) + " renewable resources declared, " +
                             std::to_string(renewable_in_header) + " in requests header",
                         header_lineno);
    ++k;
    if (k < lines.size() && detail::starts_with_ci(lines[k], "-")) ++k;

    std::map<int, Activity> acts;
    for (; k < lines.size() && !is_rule(lines[k]); ++k) {
        if (is_blank(lines[k])) continue;
        auto toks = detail::tokens(lines[k]);
        const std::size_t lineno = k + 1;
        if (toks.size() != 3 + labels.size())
            throw ParseError("requests row has " + std::to_string(toks.size()) + " fields, expected " +
                                 std::to_string(3 + labels.size()),
                             lineno);
        Activity a;
        a.id = static_cast<int>(detail::parse_number(toks[0], lineno, "job number"));
        detail::parse_number(toks[1], lineno, "mode");
        a.duration = detail::parse_number(toks[2], lineno, "duration");
        a.workgroup = "default";
        for (std::size_t j = 0; j < labels.size(); ++j) {
            const auto units = detail::parse_number(toks[3 + j], lineno, "resource request");
            if (labels[j].kind == 'R' && units != 0) a.demands[labels[j].index] = static_cast<int>(units);
        }
        if (!job_line.count(a.id))
            throw ParseError("job " + std::to_string(a.id) + " has no precedence row", lineno);
        if (!acts.emplace(a.id, a).second) throw ParseError("duplicate requests row for job " + std::to_string(a.id), lineno);
    }
    if (static_cast<int>(acts.size()) != *declared_jobs)
        throw ParseError("count mismatch: " + std::to_string(*declared_jobs) + " jobs declared, " +
                             std::to_string(acts.size()) + " requests rows found",
                         std::min(k + 1, lines.size()));
    for (auto& [id, a] : acts) inst.activities.push_back(std::move(a));

    // resource availabilities
    auto avail = find_section("RESOURCEAVAILABILITIES");
    if (!avail) throw ParseError("missing 'RESOURCEAVAILABILITIES:' section", k + 1);
    k = *avail + 1;
    if (k + 1 >= lines.size()) throw ParseError("truncated resource availabilities", k + 1);
    const auto avail_labels = detail::resource_labels(detail::tokens(lines[k]), k + 1);
    const auto values = detail::tokens(lines[k + 1]);
    if (values.size() != avail_labels.size())
        throw ParseError("count mismatch: " + std::to_string(avail_labels.size()) + " resources labelled, " +
                             std::to_string(values.size()) + " availabilities given",
                         k + 2);
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (avail_labels[j].kind != 'R') continue;
        const int id = avail_labels[j].index;
        inst.groups.push_back({id, "R" + std::to_string(id),
                               static_cast<int>(detail::parse_number(values[j], k + 2, "availability"))});
    }

    auto report = validate_instance(inst);
    if (!report.ok()) throw InvalidInstance("invalid PSPLIB instance '" + inst.name + "'", report.messages());
    return inst;
}

// ---------------------------------------------------------------------------
// CSV output (ASCII, LF line endings)

/// One row per (activity, group, unit) assignment; an activity without demands
/// gets a single row with empty group and unit columns. Rows are sorted by start
/// tick, then activity id, group id and unit id.
inline std::string write_schedule(const Project& project, const Schedule& schedule) {
    struct Row {
        Tick start;
        int activity;
        int group;
        int unit;
        Tick finish;
        const std::string* workgroup;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < schedule.activities.size(); ++i) {
        const auto& a = schedule.activities[i];
        const auto* wg = &project.workgroup_name(project.workgroup(static_cast<int>(i)));
        if (a.units.empty()) rows.push_back({a.start, a.id, 0, 0, a.finish, wg});
        for (const auto& ua : a.units)
            for (int u : ua.units) rows.push_back({a.start, a.id, ua.group_id, u, a.finish, wg});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        return std::tie(x.start, x.activity, x.group, x.unit) < std::tie(y.start, y.activity, y.group, y.unit);
    });
    std::string out = "activity_id,workgroup,start_tick,finish_tick,group_id,unit_id\n";
    for (const auto& r : rows) {
        out += std::to_string(r.activity) + ',' + csv_field(*r.workgroup) + ',' + std::to_string(r.start) + ',' +
               std::to_string(r.finish) + ',' + (r.group ? std::to_string(r.group) : "") + ',' +
               (r.unit ? std::to_string(r.unit) : "") + '\n';
    }
    return out;
}

inline std::string write_convergence(const ConvergenceLog& log, double ticks_per_day) {
    std::string out = "generation,best_makespan_ticks,best_makespan_days,mean_makespan_ticks,elapsed_ms\n";
    for (const auto& r : log) {
        out += std::to_string(r.generation) + ',' + std::to_string(r.best_makespan) + ',' +
               format_number(static_cast<double>(r.best_makespan) / ticks_per_day) + ',' +
               format_number(r.mean_makespan) + ',' + std::to_string(r.elapsed_ms) + '\n';
    }
    return out;
}

} // namespace rcpsp
