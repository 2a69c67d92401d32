#include "greenflow/state_space.hpp"

#include <charconv>
#include <limits>
#include <numeric>

#include "greenflow/error.hpp"

namespace greenflow {

int CellState::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

std::string CellState::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(counts[i]);
  }
  return out;
}

CellState CellState::parse(std::string_view text) {
  CellState state;
  while (true) {
    const auto comma = text.find(',');
    auto field = text.substr(0, comma);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    int value = -1;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
      throw ConfigError("bad state '" + std::string(text) + "': expected nonnegative counts N1,N2,...");
    }
    state.counts.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return state;
}

std::vector<Transition> neighbors(const CellState& state, int n_max) {
  std::vector<Transition> out;
  const bool admits = state.total() < n_max;
  for (std::size_t z = 0; z < state.zones(); ++z) {
    if (admits) {
      CellState next = state;
      ++next.counts[z];
      out.push_back({Transition::Kind::kArrival, static_cast<int>(z), std::move(next)});
    }
    if (state.counts[z] > 0) {
      CellState next = state;
      --next.counts[z];
      out.push_back({Transition::Kind::kDeparture, static_cast<int>(z), std::move(next)});
    }
  }
  return out;
}

std::size_t StateSpace::count(int zones, int n_max) {
  // C(n + m, m) computed incrementally; saturates instead of overflowing.
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (int i = 1; i <= zones; ++i) {
    const auto num = static_cast<std::size_t>(n_max + i);
    if (c > kMax / num) return kMax;
    c = c * num / static_cast<std::size_t>(i);
  }
  return c;
}

StateSpace::StateSpace(int zones, int n_max, std::size_t ceiling) : zones_(zones), n_max_(n_max) {
  if (zones < 1) throw ConfigError("state space needs at least one zone");
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  const std::size_t n = count(zones, n_max);
  if (n > ceiling) {
    throw CapacityError("state space has " + std::to_string(n) + " states, above the ceiling of " +
                        std::to_string(ceiling));
  }
  states_.reserve(n);
  CellState s{std::vector<int>(static_cast<std::size_t>(zones), 0)};
  // Odometer over counts, last coordinate fastest, pruned by the admission cap.
  while (true) {
    states_.push_back(s);
    int z = zones - 1;
    while (z >= 0) {
      ++s.counts[static_cast<std::size_t>(z)];
      if (s.total() <= n_max) break;
      s.counts[static_cast<std::size_t>(z)] = 0;
      --z;
    }
    if (z < 0) break;
  }
}

bool StateSpace::contains(const CellState& state) const {
  if (state.zones() != static_cast<std::size_t>(zones_)) return false;
  for (int c : state.counts) {
    if (c < 0) return false;
  }
  return state.total() <= n_max_;
}

std::size_t StateSpace::index(const CellState& state) const {
  if (!contains(state)) throw ConfigError("state {" + state.to_string() + "} is outside the state space");
  return rank(state, n_max_);
}

std::size_t StateSpace::rank(const CellState& state, int n_max) {
  // Number of states lexicographically before `state`.
  const int zones = static_cast<int>(state.zones());
  std::size_t rank = 0;
  int budget = n_max;
  for (int z = 0; z < zones; ++z) {
    const int rest = zones - z - 1;
    const int v = state.counts[static_cast<std::size_t>(z)];
    for (int smaller = 0; smaller < v; ++smaller) rank += count(rest, budget - smaller);
    budget -= v;
  }
  return rank;
}

std::vector<CellState> enumerate_states(int zones, int n_max, std::size_t ceiling) {
  return StateSpace(zones, n_max, ceiling).states();
}

}  // namespace greenflow
