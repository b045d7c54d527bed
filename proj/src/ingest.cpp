#include "refnet/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "refnet/states.hpp"

namespace refnet {
namespace {

bool is_npi(std::string_view s) {
    if (s.size() != 10) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// Splits `line` on `delim` into at most `max_fields` trimmed views.
std::size_t split_fields(std::string_view line, char delim, std::string_view* fields,
                         std::size_t max_fields) {
    std::size_t count = 0;
    std::size_t start = 0;
    while (count < max_fields) {
        std::size_t pos = line.find(delim, start);
        std::string_view f = (pos == std::string_view::npos) ? line.substr(start)
                                                             : line.substr(start, pos - start);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
            f.remove_suffix(1);
        fields[count++] = f;
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return count;
}

void note_error(IngestReport& rep, std::uint64_t line_no, const std::string& what) {
    ++rep.malformed;
    if (rep.sample_errors.size() < 10)
        rep.sample_errors.push_back("line " + std::to_string(line_no) + ": " + what);
}

} // namespace

FormatSpec FormatSpec::parse(const std::string& text) {
    FormatSpec spec;
    spec.columns.clear();
    std::string body = text;
    if (body.rfind("header:", 0) == 0) {
        spec.has_header = true;
        body = body.substr(7);
    }
    // Delimiter = first non-alphanumeric, non-underscore character.
    spec.delimiter = ',';
    for (char c : body) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            spec.delimiter = c;
            break;
        }
    }
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        if (token == "from") spec.columns.push_back(Column::FromNpi);
        else if (token == "to") spec.columns.push_back(Column::ToNpi);
        else if (token == "count") spec.columns.push_back(Column::SharedCount);
        else if (token == "_") spec.columns.push_back(Column::Ignore);
        else throw input_error("unknown column name in format spec: " + token);
        token.clear();
    };
    for (char c : body) {
        if (c == spec.delimiter) flush();
        else token += c;
    }
    flush();
    auto has = [&](Column c) { return std::count(spec.columns.begin(), spec.columns.end(), c); };
    if (has(Column::FromNpi) != 1 || has(Column::ToNpi) != 1 || has(Column::SharedCount) != 1)
        throw input_error("format spec must name from, to and count exactly once: " + text);
    return spec;
}

std::string FormatSpec::to_string() const {
    std::string out = has_header ? "header:" : "";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += delimiter;
        switch (columns[i]) {
            case Column::FromNpi: out += "from"; break;
            case Column::ToNpi: out += "to"; break;
            case Column::SharedCount: out += "count"; break;
            case Column::Ignore: out += "_"; break;
        }
    }
    return out;
}

IngestReport parse_referrals(const std::string& path, const FormatSpec& spec, int year,
                             const std::function<void(const RawReferralRecord&)>& sink,
                             double max_malformed_fraction) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open referral file: " + path);

    IngestReport rep;
    std::string line;
    line.reserve(256);
    std::string_view fields[32];
    const std::size_t ncols = spec.columns.size();
    RawReferralRecord rec;
    rec.year = year;

    bool first = true;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (first && spec.has_header) {
            first = false;
            continue;
        }
        first = false;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++rep.total_rows;

        std::size_t got = split_fields(line, spec.delimiter, fields, std::min<std::size_t>(32, ncols));
        if (got < ncols) {
            note_error(rep, line_no, "expected " + std::to_string(ncols) + " fields, got " +
                                         std::to_string(got));
            continue;
        }
        std::string_view from, to, count;
        for (std::size_t i = 0; i < ncols; ++i) {
            switch (spec.columns[i]) {
                case Column::FromNpi: from = fields[i]; break;
                case Column::ToNpi: to = fields[i]; break;
                case Column::SharedCount: count = fields[i]; break;
                case Column::Ignore: break;
            }
        }
        std::uint64_t w = 0;
        if (!is_npi(from) || !is_npi(to)) {
            note_error(rep, line_no, "bad NPI field");
            continue;
        }
        if (!parse_u64(count, w) || w == 0) {
            note_error(rep, line_no, "bad shared count");
            continue;
        }
        if (from == to) {
            ++rep.self_loops;
            continue;
        }
        rec.from_npi.assign(from);
        rec.to_npi.assign(to);
        rec.shared_count = w;
        ++rep.emitted;
        sink(rec);
    }
    if (rep.total_rows > 0 &&
        static_cast<double>(rep.malformed) > max_malformed_fraction * static_cast<double>(rep.total_rows)) {
        std::string diag = "too many malformed rows in " + path + " (" +
                           std::to_string(rep.malformed) + "/" + std::to_string(rep.total_rows) +
                           "); wrong --format?";
        for (const auto& e : rep.sample_errors) diag += "\n  " + e;
        throw input_error(diag);
    }
    return rep;
}

std::vector<RawReferralRecord> read_referrals(const std::string& path, const FormatSpec& spec,
                                              int year, IngestReport* report) {
    std::vector<RawReferralRecord> out;
    IngestReport rep = parse_referrals(path, spec, year,
                                       [&out](const RawReferralRecord& r) { out.push_back(r); });
    if (report) *report = rep;
    return out;
}

std::vector<NpiStateRecord> parse_npi_states(const std::string& path, int year,
                                             IngestReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open NPI-state file: " + path);

    IngestReport rep;
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<NpiStateRecord> out;
    std::string line;
    std::string_view fields[4];
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++rep.total_rows;
        std::size_t got = split_fields(line, ',', fields, 2);
        if (got < 2) {
            note_error(rep, line_no, "expected npi,state");
            continue;
        }
        if (!is_npi(fields[0])) {
            note_error(rep, line_no, "bad NPI field");
            continue;
        }
        std::string state(fields[1]);
        if (!is_known_state(state)) {
            note_error(rep, line_no, "unknown state code " + state);
            continue;
        }
        auto key = std::make_pair(std::string(fields[0]), state);
        if (!seen.insert(key).second) continue; // duplicate row, keep first
        ++rep.emitted;
        out.push_back(NpiStateRecord{key.first, key.second, year});
    }
    if (out.empty()) throw input_error("no NPI-state records parsed from " + path + "; wrong file?");
    if (report) *report = rep;
    return out;
}

std::vector<StateHealthRecord> parse_health_attributes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open attribute file: " + path);

    std::vector<StateHealthRecord> out;
    std::map<std::tuple<std::string, int, std::string>, std::uint64_t> keys;
    std::string line;
    std::string_view fields[4];
    std::uint64_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (first) { // header state,year,attribute,value
            first = false;
            continue;
        }
        std::size_t got = split_fields(line, ',', fields, 4);
        if (got < 4)
            throw input_error(path + " line " + std::to_string(line_no) +
                              ": expected state,year,attribute,value");
        StateHealthRecord rec;
        rec.state.assign(fields[0]);
        rec.attribute_name.assign(fields[2]);
        if (!parse_int(fields[1], rec.year))
            throw input_error(path + " line " + std::to_string(line_no) + ": bad year");
        if (!parse_double(fields[3], rec.value) || !std::isfinite(rec.value))
            throw input_error(path + " line " + std::to_string(line_no) + ": bad value");
        auto key = std::make_tuple(rec.state, rec.year, rec.attribute_name);
        auto [it, inserted] = keys.emplace(key, line_no);
        if (!inserted)
            throw input_error(path + ": duplicate key (" + rec.state + "," +
                              std::to_string(rec.year) + "," + rec.attribute_name + ") at lines " +
                              std::to_string(it->second) + " and " + std::to_string(line_no));
        out.push_back(std::move(rec));
    }
    return out;
}

void write_referrals_csv(std::ostream& out, const std::vector<RawReferralRecord>& records,
                         const FormatSpec& spec) {
    if (spec.has_header) {
        for (std::size_t i = 0; i < spec.columns.size(); ++i) {
            if (i) out << spec.delimiter;
            switch (spec.columns[i]) {
                case Column::FromNpi: out << "from_npi"; break;
                case Column::ToNpi: out << "to_npi"; break;
                case Column::SharedCount: out << "shared_count"; break;
                case Column::Ignore: out << "x"; break;
            }
        }
        out << '\n';
    }
    for (const auto& r : records) {
        for (std::size_t i = 0; i < spec.columns.size(); ++i) {
            if (i) out << spec.delimiter;
            switch (spec.columns[i]) {
                case Column::FromNpi: out << r.from_npi; break;
                case Column::ToNpi: out << r.to_npi; break;
                case Column::SharedCount: out << r.shared_count; break;
                case Column::Ignore: out << 0; break;
            }
        }
        out << '\n';
    }
}

} // namespace refnet
