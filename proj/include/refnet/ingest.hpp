#ifndef REFNET_INGEST_HPP
#define REFNET_INGEST_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "refnet/common.hpp"

namespace refnet {

// One cleaned shared-patient row: from_npi referred shared_count patients
// who then saw to_npi within the capture window.
struct RawReferralRecord {
    std::string from_npi; // exactly 10 decimal digits
    std::string to_npi;   // exactly 10 decimal digits
    std::uint64_t shared_count = 0;
    int year = 0;

    bool operator==(const RawReferralRecord&) const = default;
};

struct NpiStateRecord {
    std::string npi;
    std::string state; // 2-letter USPS code, whitelist-checked
    int year = 0;

    bool operator==(const NpiStateRecord&) const = default;
    auto operator<=>(const NpiStateRecord&) const = default;
};

struct StateHealthRecord {
    std::string state;
    int year = 0;
    std::string attribute_name;
    double value = 0.0;

    bool operator==(const StateHealthRecord&) const = default;
};

// Column roles a referral file may carry. CMS layouts moved columns around
// across release years, so order is configured rather than assumed.
enum class Column { FromNpi, ToNpi, SharedCount, Ignore };

struct FormatSpec {
    char delimiter = ',';
    bool has_header = false;
    std::vector<Column> columns = {Column::FromNpi, Column::ToNpi, Column::SharedCount};

    // Parses strings like "from,to,count" or "from|to|_|count" where "_"
    // marks an ignored column; the separator character doubles as the
    // delimiter. A leading "header:" prefix marks a header row.
    static FormatSpec parse(const std::string& text);
    std::string to_string() const;
};

struct IngestReport {
    std::uint64_t total_rows = 0;     // data rows seen (header excluded)
    std::uint64_t emitted = 0;        // valid records handed to the sink
    std::uint64_t malformed = 0;      // rejected rows
    std::uint64_t self_loops = 0;     // dropped from==to rows
    std::vector<std::string> sample_errors; // first few diagnostics
};

// Streams validated records to `sink` in file order. Malformed rows are
// tallied, never silently dropped; self-loops are removed with a tally.
// Throws input_error if the file is unreadable or if more than
// `max_malformed_fraction` of rows are malformed (signals a wrong spec).
IngestReport parse_referrals(const std::string& path, const FormatSpec& spec, int year,
                             const std::function<void(const RawReferralRecord&)>& sink,
                             double max_malformed_fraction = 0.01);

// Convenience wrapper collecting everything in memory (test-sized files).
std::vector<RawReferralRecord> read_referrals(const std::string& path, const FormatSpec& spec,
                                              int year, IngestReport* report = nullptr);

// npi,state rows. Unknown state codes are reported in the returned report's
// sample_errors and counted as malformed. Duplicate (npi,state) rows
// deduplicate to one record. An empty result throws (wrong file).
std::vector<NpiStateRecord> parse_npi_states(const std::string& path, int year,
                                             IngestReport* report = nullptr);

// Long-format CSV with header state,year,attribute,value. (state, year,
// attribute) must be unique; a duplicate key aborts naming the offender.
std::vector<StateHealthRecord> parse_health_attributes(const std::string& path);

void write_referrals_csv(std::ostream& out, const std::vector<RawReferralRecord>& records,
                         const FormatSpec& spec);

} // namespace refnet

#endif
