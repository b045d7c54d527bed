#ifndef REFNET_STATES_HPP
#define REFNET_STATES_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace refnet {

// Compact id for a USPS state/territory code; -1 means "no state".
using StateId = std::int16_t;
constexpr StateId kNoState = -1;

// The 50 states, in code order. Gravity-law machinery is restricted to these.
std::size_t state_count();

// Full whitelist: 50 states + DC + territories (PR, VI, GU, AS, MP).
bool is_known_state(std::string_view code);

std::optional<StateId> state_id(std::string_view code);
const std::string& state_code(StateId id);

// True for one of the 50 states (excludes DC and territories).
bool is_core_state(StateId id);

// Index into the 50-state block, valid only when is_core_state(id).
std::size_t core_state_index(StateId id);
StateId core_state_id(std::size_t index);

// Great-circle distance between the capital cities of two of the 50 states
// (DC included), in kilometers. Coordinate table is embedded; see
// docs in README for the source.
double capital_distance_km(std::string_view state_a, std::string_view state_b);

std::vector<std::string> core_state_codes();

} // namespace refnet

#endif
