#pragma once

// Grid mazes: generation at a connectivity level, move execution, fitness,
// and a breadth-first shortest-path oracle.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ace/domain.hpp"
#include "ace/gca.hpp"

namespace ace {

// Atomic maze operations; the numeric value is the OpId.
enum class Direction : OpId { North = 0, East = 1, South = 2, West = 3 };
inline constexpr std::size_t kDirectionCount = 4;
inline constexpr Direction kDirections[] = {Direction::North, Direction::East, Direction::South,
                                            Direction::West};

constexpr OpId op_of(Direction d) { return static_cast<OpId>(d); }
constexpr Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<OpId>(d) + 2) % 4);
}
char direction_letter(Direction d);

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

Cell step(Cell c, Direction d);
int manhattan(Cell a, Cell b);

class Maze {
 public:
  Maze() = default;
  // All edges closed.
  Maze(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }

  bool is_open(Cell c, Direction d) const;
  // Opens or closes the shared edge on both sides. Border edges cannot be opened.
  void set_open(Cell c, Direction d, bool open);
  // Number of open interior edges, each counted once.
  std::size_t open_edge_count() const;

  Cell start{};
  Cell goal{};
  double connectivity = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const Maze&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> open_;  // bit d set = edge in direction d open
};

// Perfect maze by randomized depth-first carving, then floor(connectivity*R)
// of the R remaining interior walls opened uniformly at random.
Maze generate_maze(int width, int height, double connectivity, std::uint64_t seed);

// Open cardinal neighbors in N, E, S, W order. Throws DomainError out of bounds.
std::vector<std::pair<Direction, Cell>> valid_neighbors(const Maze& maze, Cell cell);

bool is_connected(const Maze& maze);

struct ExecutionResult {
  Cell final_cell{};
  std::vector<Cell> visited;  // start first, one entry per executed step
  bool success = false;
  int steps_used = 0;  // moves actually made
  int wall_hits = 0;   // moves skipped because of a wall
};

// Runs moves from the start; wall moves are skipped and counted, execution
// stops on reaching the goal.
ExecutionResult execute_trajectory(const Maze& maze, std::span<const OpId> moves);

struct FitnessConstants {
  double success_base = 10000.0;
  double step_cost = 10.0;
  double wall_cost = 2.0;
  double failure_scale = 5000.0;
};

double fitness(const Maze& maze, const ExecutionResult& result, const FitnessConstants& k = {});

// Shortest-path length over steps used; only defined for successful runs.
std::optional<double> path_efficiency(const Maze& maze, const ExecutionResult& result);

struct ShortestPath {
  int length = 0;
  std::vector<OpId> moves;
};

// Ties resolved by N, E, S, W expansion order. Throws InternalError if the
// goal is unreachable.
ShortestPath bfs_shortest_path(const Maze& maze);

// Text form: a header line `w h sx sy gx gy connectivity seed` followed by
// a `+--+` wall drawing.
std::string format_maze(const Maze& maze);
Maze parse_maze(const std::string& text);

class MazeDomain final : public Domain {
 public:
  explicit MazeDomain(Maze maze, FitnessConstants constants = {});

  const Maze& maze() const { return maze_; }
  int shortest_length() const { return shortest_; }

  std::vector<std::string> atomic_names() const override;
  StateId start_state() const override;
  std::vector<OpId> valid_atomic(StateId state) const override;
  std::optional<StateId> apply(StateId state, OpId op) const override;
  bool is_goal(StateId state) const override;
  double heuristic(StateId state) const override;
  Evaluation evaluate(std::span<const OpId> atomic_ops) const override;
  bool atomic_transition_allowed(OpId, OpId) const override { return true; }
  std::size_t default_max_steps() const override { return 4 * maze_.cell_count(); }
  std::optional<std::size_t> reference_length() const override { return static_cast<std::size_t>(shortest_); }

 private:
  Maze maze_;
  FitnessConstants constants_;
  int shortest_ = 0;
};

}  // namespace ace
