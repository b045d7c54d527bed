#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "refnet/ingest.hpp"

using namespace refnet;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("refnet_ingest_" + std::to_string(getpid()) + "_" +
                                            std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

} // namespace

TEST_CASE("referral rows map to records field-for-field") {
    TempFile f("1234567890,9876543210,17\n");
    IngestReport rep;
    auto records = read_referrals(f.path.string(), FormatSpec{}, 2009, &rep);
    REQUIRE(records.size() == 1);
    CHECK(records[0].from_npi == "1234567890");
    CHECK(records[0].to_npi == "9876543210");
    CHECK(records[0].shared_count == 17);
    CHECK(records[0].year == 2009);
    CHECK(rep.emitted == 1);
    CHECK(rep.malformed == 0);
}

TEST_CASE("self-loops are dropped and tallied") {
    TempFile f("1234567890,1234567890,5\n1234567890,9876543210,2\n");
    IngestReport rep;
    auto records = read_referrals(f.path.string(), FormatSpec{}, 2009, &rep);
    CHECK(records.size() == 1);
    CHECK(rep.self_loops == 1);
    CHECK(rep.total_rows == 2);
}

TEST_CASE("record count conservation: rows = emitted + malformed + self-loops") {
    TempFile f("1234567890,9876543210,3\n"
               "badnpi,9876543210,1\n"
               "1234567890,1234567890,9\n"
               "1234567890,9876543210,0\n"
               "9876543210,1234567890,4\n");
    // 2/5 malformed exceeds the default 1% guard; raise the cap for the tally check.
    std::vector<RawReferralRecord> records;
    IngestReport rep = parse_referrals(f.path.string(), FormatSpec{}, 2010,
                                       [&](const RawReferralRecord& r) { records.push_back(r); },
                                       0.9);
    CHECK(rep.total_rows == rep.emitted + rep.malformed + rep.self_loops);
    CHECK(rep.emitted == 2);
    CHECK(rep.malformed == 2);
    CHECK(rep.self_loops == 1);
}

TEST_CASE("malformed fraction above threshold aborts with a diagnostic") {
    std::string rows;
    for (int i = 0; i < 50; ++i) rows += "1234567890,9876543210,1\n";
    for (int i = 0; i < 5; ++i) rows += "oops\n";
    TempFile f(rows);
    CHECK_THROWS_AS(read_referrals(f.path.string(), FormatSpec{}, 2009), input_error);
}

TEST_CASE("unreadable file is an input error") {
    CHECK_THROWS_AS(read_referrals("/nonexistent/x.csv", FormatSpec{}, 2009), input_error);
}

TEST_CASE("format spec reorders and skips columns") {
    FormatSpec spec = FormatSpec::parse("header:count|from|_|to");
    CHECK(spec.delimiter == '|');
    CHECK(spec.has_header);
    TempFile f("n,src,junk,dst\n7|1111111111|zz|2222222222\n");
    auto records = read_referrals(f.path.string(), spec, 2011);
    REQUIRE(records.size() == 1);
    CHECK(records[0].from_npi == "1111111111");
    CHECK(records[0].to_npi == "2222222222");
    CHECK(records[0].shared_count == 7);
}

TEST_CASE("format spec requires from, to and count exactly once") {
    CHECK_THROWS_AS(FormatSpec::parse("from,to"), input_error);
    CHECK_THROWS_AS(FormatSpec::parse("from,to,count,count"), input_error);
    CHECK_THROWS_AS(FormatSpec::parse("from,to,quantity"), input_error);
}

TEST_CASE("round trip: serialize then re-parse gives identical records") {
    TempFile f("1234567890,9876543210,17\n"
               "9876543210,1234567890,3\n"
               "5555555555,1234567890,1\n");
    auto records = read_referrals(f.path.string(), FormatSpec{}, 2012);
    FormatSpec canon;
    canon.has_header = true;
    std::ostringstream os;
    write_referrals_csv(os, records, canon);
    TempFile g(os.str());
    auto again = read_referrals(g.path.string(), canon, 2012);
    CHECK(records == again);
}

TEST_CASE("npi-state rows validate against the whitelist") {
    TempFile f("1234567890,NH\n"
               "9876543210,ZZ\n"
               "5555555555,VT\n"
               "1234567890,NH\n");
    IngestReport rep;
    auto records = parse_npi_states(f.path.string(), 2009, &rep);
    REQUIRE(records.size() == 2);
    CHECK(records[0].npi == "1234567890");
    CHECK(records[0].state == "NH");
    CHECK(rep.malformed == 1);
    bool mentions_zz = false;
    for (const auto& e : rep.sample_errors) mentions_zz |= e.find("ZZ") != std::string::npos;
    CHECK(mentions_zz);
}

TEST_CASE("empty npi-state result signals the wrong file") {
    TempFile f("garbage\n");
    CHECK_THROWS_AS(parse_npi_states(f.path.string(), 2009), input_error);
}

TEST_CASE("health attributes parse and enforce key uniqueness") {
    TempFile f("state,year,attribute,value\nNH,2012,mortality,0.8\nVT,2012,mortality,0.9\n");
    auto records = parse_health_attributes(f.path.string());
    REQUIRE(records.size() == 2);
    CHECK(records[0].state == "NH");
    CHECK(records[0].year == 2012);
    CHECK(records[0].attribute_name == "mortality");
    CHECK(records[0].value == doctest::Approx(0.8));

    TempFile dup("state,year,attribute,value\nNH,2012,mortality,0.8\nNH,2012,mortality,0.9\n");
    try {
        parse_health_attributes(dup.path.string());
        FAIL("expected duplicate-key error");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("NH,2012,mortality") != std::string::npos);
    }
}

TEST_CASE("attribute fixture count identity: 50 states x 6 years x 1 attribute") {
    std::ostringstream os;
    os << "state,year,attribute,value\n";
    const char* states[] = {"AL","AK","AZ","AR","CA","CO","CT","DE","FL","GA","HI","ID","IL","IN",
                            "IA","KS","KY","LA","ME","MD","MA","MI","MN","MS","MO","MT","NE","NV",
                            "NH","NJ","NM","NY","NC","ND","OH","OK","OR","PA","RI","SC","SD","TN",
                            "TX","UT","VT","VA","WA","WV","WI","WY"};
    for (const char* s : states)
        for (int y = 2009; y <= 2014; ++y) os << s << "," << y << ",mortality,1.0\n";
    TempFile f(os.str());
    CHECK(parse_health_attributes(f.path.string()).size() == 300);
}
