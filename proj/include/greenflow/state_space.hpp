#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace greenflow {

// Number of users in each zone; the coordinate of the flow-level Markov chain.
struct CellState {
  std::vector<int> counts;

  std::size_t zones() const { return counts.size(); }
  int total() const;
  bool empty() const { return total() == 0; }

  // "N1,N2,...,NM"
  std::string to_string() const;
  static CellState parse(std::string_view text);

  auto operator<=>(const CellState&) const = default;
};

struct Transition {
  enum class Kind { kArrival, kDeparture };
  Kind kind;
  int zone;
  CellState target;
};

// Arrivals are admitted only while total() < n_max.
std::vector<Transition> neighbors(const CellState& state, int n_max);

// Dense lexicographic indexing of every state with at most n_max users.
//
// Index 0 is always the empty state; the first coordinate is the most
// significant digit, so for two zones the order is {0,0},{0,1},...,{1,0},...
class StateSpace {
 public:
  static constexpr std::size_t kDefaultCeiling = 1'000'000;

  StateSpace(int zones, int n_max, std::size_t ceiling = kDefaultCeiling);

  // C(n + m, m): number of states of m zones with at most n users.
  static std::size_t count(int zones, int n_max);

  int zones() const { return zones_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return states_.size(); }
  const CellState& state(std::size_t index) const { return states_.at(index); }
  const std::vector<CellState>& states() const { return states_; }

  std::size_t index(const CellState& state) const;
  // Lexicographic rank without materializing the space; state must be admissible.
  static std::size_t rank(const CellState& state, int n_max);
  bool contains(const CellState& state) const;

 private:
  int zones_;
  int n_max_;
  std::vector<CellState> states_;
};

std::vector<CellState> enumerate_states(int zones, int n_max,
                                        std::size_t ceiling = StateSpace::kDefaultCeiling);

}  // namespace greenflow
