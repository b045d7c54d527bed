#include "refnet/states.hpp"

#include <array>
#include <cmath>
#include <map>

#include "refnet/common.hpp"

namespace refnet {
namespace {

struct StateInfo {
    const char* code;
    double lat;   // capital latitude, degrees
    double lon;   // capital longitude, degrees
    bool core;    // one of the 50 states
};

// Capital coordinates in decimal degrees (WGS84), v1 table.
const std::array<StateInfo, 56> kStates = {{
    {"AK", 58.3019, -134.4197, true},  {"AL", 32.3777, -86.3000, true},
    {"AR", 34.7465, -92.2896, true},   {"AZ", 33.4484, -112.0740, true},
    {"CA", 38.5816, -121.4944, true},  {"CO", 39.7392, -104.9903, true},
    {"CT", 41.7637, -72.6851, true},   {"DE", 39.1582, -75.5244, true},
    {"FL", 30.4383, -84.2807, true},   {"GA", 33.7490, -84.3880, true},
    {"HI", 21.3099, -157.8581, true},  {"IA", 41.5868, -93.6250, true},
    {"ID", 43.6150, -116.2023, true},  {"IL", 39.7817, -89.6501, true},
    {"IN", 39.7684, -86.1581, true},   {"KS", 39.0473, -95.6752, true},
    {"KY", 38.2009, -84.8733, true},   {"LA", 30.4515, -91.1871, true},
    {"MA", 42.3601, -71.0589, true},   {"MD", 38.9784, -76.4922, true},
    {"ME", 44.3106, -69.7795, true},   {"MI", 42.7325, -84.5555, true},
    {"MN", 44.9537, -93.0900, true},   {"MO", 38.5767, -92.1735, true},
    {"MS", 32.2988, -90.1848, true},   {"MT", 46.5884, -112.0245, true},
    {"NC", 35.7796, -78.6382, true},   {"ND", 46.8083, -100.7837, true},
    {"NE", 40.8136, -96.7026, true},   {"NH", 43.2081, -71.5376, true},
    {"NJ", 40.2206, -74.7597, true},   {"NM", 35.6870, -105.9378, true},
    {"NV", 39.1638, -119.7674, true},  {"NY", 42.6526, -73.7562, true},
    {"OH", 39.9612, -82.9988, true},   {"OK", 35.4676, -97.5164, true},
    {"OR", 44.9429, -123.0351, true},  {"PA", 40.2732, -76.8867, true},
    {"RI", 41.8240, -71.4128, true},   {"SC", 34.0007, -81.0348, true},
    {"SD", 44.3683, -100.3510, true},  {"TN", 36.1627, -86.7816, true},
    {"TX", 30.2672, -97.7431, true},   {"UT", 40.7608, -111.8910, true},
    {"VA", 37.5407, -77.4360, true},   {"VT", 44.2601, -72.5754, true},
    {"WA", 47.0379, -122.9007, true},  {"WI", 43.0731, -89.4012, true},
    {"WV", 38.3498, -81.6326, true},   {"WY", 41.1400, -104.8202, true},
    {"DC", 38.9072, -77.0369, false},  {"PR", 18.4655, -66.1057, false},
    {"VI", 18.3419, -64.9307, false},  {"GU", 13.4757, 144.7489, false},
    {"AS", -14.2756, -170.7020, false},{"MP", 15.1894, 145.7475, false},
}};

const StateInfo* lookup(std::string_view code) {
    for (const auto& s : kStates)
        if (code == s.code) return &s;
    return nullptr;
}

} // namespace

std::size_t state_count() { return 50; }

bool is_known_state(std::string_view code) { return lookup(code) != nullptr; }

std::optional<StateId> state_id(std::string_view code) {
    for (std::size_t i = 0; i < kStates.size(); ++i)
        if (code == kStates[i].code) return static_cast<StateId>(i);
    return std::nullopt;
}

const std::string& state_code(StateId id) {
    static std::vector<std::string> codes = [] {
        std::vector<std::string> v;
        for (const auto& s : kStates) v.emplace_back(s.code);
        return v;
    }();
    if (id < 0 || static_cast<std::size_t>(id) >= codes.size())
        throw analysis_error("unknown state id " + std::to_string(id));
    return codes[static_cast<std::size_t>(id)];
}

bool is_core_state(StateId id) {
    return id >= 0 && static_cast<std::size_t>(id) < kStates.size() &&
           kStates[static_cast<std::size_t>(id)].core;
}

std::size_t core_state_index(StateId id) {
    // Core states occupy the first 50 slots of the table in code order.
    if (!is_core_state(id)) throw analysis_error("not one of the 50 states: id " + std::to_string(id));
    return static_cast<std::size_t>(id);
}

StateId core_state_id(std::size_t index) {
    if (index >= state_count()) throw analysis_error("core state index out of range");
    return static_cast<StateId>(index);
}

double capital_distance_km(std::string_view state_a, std::string_view state_b) {
    const StateInfo* a = lookup(state_a);
    const StateInfo* b = lookup(state_b);
    if (!a || !b) throw analysis_error("unknown state code in capital_distance");
    if (a == b) return 0.0;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    constexpr double kEarthRadiusKm = 6371.0088;
    double phi1 = a->lat * kDeg, phi2 = b->lat * kDeg;
    double dphi = (b->lat - a->lat) * kDeg;
    double dlam = (b->lon - a->lon) * kDeg;
    double s1 = std::sin(dphi / 2), s2 = std::sin(dlam / 2);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<std::string> core_state_codes() {
    std::vector<std::string> v;
    for (const auto& s : kStates)
        if (s.core) v.emplace_back(s.code);
    return v;
}

} // namespace refnet
