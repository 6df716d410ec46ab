#include "ace/maze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace {

char direction_letter(Direction d) {
  static constexpr char kLetters[] = {'N', 'E', 'S', 'W'};
  return kLetters[static_cast<OpId>(d)];
}

Cell step(Cell c, Direction d) {
  switch (d) {
    case Direction::North: return {c.x, c.y - 1};
    case Direction::East: return {c.x + 1, c.y};
    case Direction::South: return {c.x, c.y + 1};
    case Direction::West: return {c.x - 1, c.y};
  }
  return c;
}

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

Maze::Maze(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ConfigError("maze dimensions must be positive");
  open_.assign(cell_count(), 0);
  goal = {width - 1, height - 1};
}

bool Maze::is_open(Cell c, Direction d) const {
  if (!in_bounds(c)) throw DomainError("cell out of bounds");
  return (open_[index(c)] >> static_cast<OpId>(d)) & 1U;
}

void Maze::set_open(Cell c, Direction d, bool open) {
  const Cell n = step(c, d);
  if (!in_bounds(c) || !in_bounds(n)) throw DomainError("cannot change a border edge");
  const auto bit = [](Direction dir) { return static_cast<std::uint8_t>(1U << static_cast<OpId>(dir)); };
  if (open) {
    open_[index(c)] |= bit(d);
    open_[index(n)] |= bit(opposite(d));
  } else {
    open_[index(c)] &= static_cast<std::uint8_t>(~bit(d));
    open_[index(n)] &= static_cast<std::uint8_t>(~bit(opposite(d)));
  }
}

std::size_t Maze::open_edge_count() const {
  std::size_t n = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      n += is_open({x, y}, Direction::East) ? 1 : 0;
      n += is_open({x, y}, Direction::South) ? 1 : 0;
    }
  }
  return n;
}

Maze generate_maze(int width, int height, double connectivity, std::uint64_t seed) {
  if (width < 2 || height < 2) throw ConfigError("maze must be at least 2x2");
  if (!(connectivity >= 0.0 && connectivity <= 1.0)) {
    throw ConfigError("connectivity must lie in [0,1]");
  }
  Maze maze(width, height);
  maze.start = {0, 0};
  maze.goal = {width - 1, height - 1};
  maze.connectivity = connectivity;
  maze.seed = seed;

  Rng rng(seed);
  std::vector<bool> seen(maze.cell_count(), false);
  std::vector<Cell> stack{maze.start};
  seen[maze.index(maze.start)] = true;
  std::vector<Direction> options;
  while (!stack.empty()) {
    const Cell cur = stack.back();
    options.clear();
    for (Direction d : kDirections) {
      const Cell n = step(cur, d);
      if (maze.in_bounds(n) && !seen[maze.index(n)]) options.push_back(d);
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    const Direction d = options[rng.index(options.size())];
    const Cell n = step(cur, d);
    maze.set_open(cur, d, true);
    seen[maze.index(n)] = true;
    stack.push_back(n);
  }

  std::vector<std::pair<Cell, Direction>> closed;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width && !maze.is_open({x, y}, Direction::East)) closed.push_back({{x, y}, Direction::East});
      if (y + 1 < height && !maze.is_open({x, y}, Direction::South)) closed.push_back({{x, y}, Direction::South});
    }
  }
  for (std::size_t i = closed.size(); i > 1; --i) {
    std::swap(closed[i - 1], closed[rng.index(i)]);
  }
  const auto extra = static_cast<std::size_t>(std::floor(connectivity * static_cast<double>(closed.size())));
  for (std::size_t i = 0; i < extra; ++i) maze.set_open(closed[i].first, closed[i].second, true);
  return maze;
}

std::vector<std::pair<Direction, Cell>> valid_neighbors(const Maze& maze, Cell cell) {
  if (!maze.in_bounds(cell)) throw DomainError("cell out of bounds");
  std::vector<std::pair<Direction, Cell>> out;
  for (Direction d : kDirections) {
    if (maze.is_open(cell, d)) out.emplace_back(d, step(cell, d));
  }
  return out;
}

bool is_connected(const Maze& maze) {
  std::vector<bool> seen(maze.cell_count(), false);
  std::deque<Cell> queue{maze.start};
  seen[maze.index(maze.start)] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const auto& [d, n] : valid_neighbors(maze, c)) {
      if (seen[maze.index(n)]) continue;
      seen[maze.index(n)] = true;
      ++reached;
      queue.push_back(n);
    }
  }
  return reached == maze.cell_count();
}

ExecutionResult execute_trajectory(const Maze& maze, std::span<const OpId> moves) {
  ExecutionResult r;
  Cell cur = maze.start;
  r.visited.push_back(cur);
  for (OpId op : moves) {
    if (cur == maze.goal) break;
    if (op >= kDirectionCount) throw DomainError("maze move id out of range");
    const auto d = static_cast<Direction>(op);
    if (!maze.is_open(cur, d)) {
      ++r.wall_hits;
      continue;
    }
    cur = step(cur, d);
    ++r.steps_used;
    r.visited.push_back(cur);
  }
  r.final_cell = cur;
  r.success = cur == maze.goal;
  return r;
}

double fitness(const Maze& maze, const ExecutionResult& result, const FitnessConstants& k) {
  double f = 0.0;
  if (result.success) {
    f = k.success_base - k.step_cost * result.steps_used - k.wall_cost * result.wall_hits;
  } else {
    const double d0 = manhattan(maze.start, maze.goal);
    const double d = manhattan(result.final_cell, maze.goal);
    f = k.failure_scale * (1.0 - d / d0) - k.wall_cost * result.wall_hits;
  }
  return std::max(f, 0.0);
}

std::optional<double> path_efficiency(const Maze& maze, const ExecutionResult& result) {
  if (!result.success) return std::nullopt;
  if (result.steps_used == 0) return 1.0;
  return static_cast<double>(bfs_shortest_path(maze).length) / result.steps_used;
}

ShortestPath bfs_shortest_path(const Maze& maze) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(maze.cell_count(), kNone);
  std::vector<Direction> via(maze.cell_count(), Direction::North);
  const std::size_t s = maze.index(maze.start);
  const std::size_t g = maze.index(maze.goal);
  parent[s] = s;
  std::deque<Cell> queue{maze.start};
  while (!queue.empty() && parent[g] == kNone) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const auto& [d, n] : valid_neighbors(maze, c)) {
      const std::size_t ni = maze.index(n);
      if (parent[ni] != kNone) continue;
      parent[ni] = maze.index(c);
      via[ni] = d;
      queue.push_back(n);
    }
  }
  if (parent[g] == kNone) throw InternalError("maze goal unreachable from start");
  ShortestPath sp;
  for (std::size_t at = g; at != s; at = parent[at]) sp.moves.push_back(op_of(via[at]));
  std::reverse(sp.moves.begin(), sp.moves.end());
  sp.length = static_cast<int>(sp.moves.size());
  return sp;
}

namespace {

std::string shortest_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string format_maze(const Maze& maze) {
  std::ostringstream out;
  out << maze.width() << ' ' << maze.height() << ' ' << maze.start.x << ' ' << maze.start.y << ' '
      << maze.goal.x << ' ' << maze.goal.y << ' ' << shortest_double(maze.connectivity) << ' '
      << maze.seed << '\n';
  out << '+';
  for (int x = 0; x < maze.width(); ++x) out << "--+";
  out << '\n';
  for (int y = 0; y < maze.height(); ++y) {
    out << '|';
    for (int x = 0; x < maze.width(); ++x) {
      out << "  " << (maze.is_open({x, y}, Direction::East) ? ' ' : '|');
    }
    out << "\n+";
    for (int x = 0; x < maze.width(); ++x) {
      out << (maze.is_open({x, y}, Direction::South) ? "  " : "--") << '+';
    }
    out << '\n';
  }
  return out.str();
}

Maze parse_maze(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("maze: missing header line");
  std::istringstream hs(header);
  int w = 0, h = 0, sx = 0, sy = 0, gx = 0, gy = 0;
  std::string conn_text;
  std::uint64_t seed = 0;
  if (!(hs >> w >> h >> sx >> sy >> gx >> gy >> conn_text >> seed)) {
    throw ParseError("maze header: expected `width height startX startY goalX goalY connectivity seed`");
  }
  double conn = 0.0;
  auto [ptr, ec] = std::from_chars(conn_text.data(), conn_text.data() + conn_text.size(), conn);
  if (ec != std::errc() || ptr != conn_text.data() + conn_text.size()) {
    throw ParseError("maze header: bad connectivity '" + conn_text + "'");
  }
  if (w < 1 || h < 1) throw ParseError("maze header: dimensions must be positive");

  Maze maze(w, h);
  maze.start = {sx, sy};
  maze.goal = {gx, gy};
  maze.connectivity = conn;
  maze.seed = seed;
  if (!maze.in_bounds(maze.start) || !maze.in_bounds(maze.goal)) {
    throw ParseError("maze header: start or goal out of bounds");
  }

  const std::size_t line_len = 3 * static_cast<std::size_t>(w) + 1;
  auto next_line = [&](int lineno) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("maze line " + std::to_string(lineno) + ": missing");
    if (line.size() != line_len) {
      throw ParseError("maze line " + std::to_string(lineno) + ": expected " + std::to_string(line_len) +
                       " characters");
    }
    return line;
  };
  int lineno = 2;
  const std::string top = next_line(lineno++);
  if (top.find(' ') != std::string::npos) throw ParseError("maze line 2: top border must be closed");
  for (int y = 0; y < h; ++y) {
    const std::string row = next_line(lineno++);
    if (row.front() != '|' || row.back() != '|') {
      throw ParseError("maze line " + std::to_string(lineno - 1) + ": side borders must be closed");
    }
    for (int x = 0; x + 1 < w; ++x) {
      const char c = row[3 * x + 3];
      if (c != ' ' && c != '|') throw ParseError("maze line " + std::to_string(lineno - 1) + ": bad wall glyph");
      if (c == ' ') maze.set_open({x, y}, Direction::East, true);
    }
    const std::string sep = next_line(lineno++);
    for (int x = 0; x < w; ++x) {
      const std::string seg = sep.substr(3 * x + 1, 2);
      if (seg != "  " && seg != "--") throw ParseError("maze line " + std::to_string(lineno - 1) + ": bad wall glyph");
      if (seg == "  ") {
        if (y + 1 == h) throw ParseError("maze line " + std::to_string(lineno - 1) + ": bottom border must be closed");
        maze.set_open({x, y}, Direction::South, true);
      }
    }
  }
  return maze;
}

MazeDomain::MazeDomain(Maze maze, FitnessConstants constants)
    : maze_(std::move(maze)), constants_(constants), shortest_(bfs_shortest_path(maze_).length) {}

std::vector<std::string> MazeDomain::atomic_names() const { return {"N", "E", "S", "W"}; }

StateId MazeDomain::start_state() const { return static_cast<StateId>(maze_.index(maze_.start)); }

std::vector<OpId> MazeDomain::valid_atomic(StateId state) const {
  const Cell c = maze_.cell(state);
  std::vector<OpId> out;
  for (Direction d : kDirections) {
    if (maze_.is_open(c, d)) out.push_back(op_of(d));
  }
  return out;
}

std::optional<StateId> MazeDomain::apply(StateId state, OpId op) const {
  if (op >= kDirectionCount) return std::nullopt;
  const Cell c = maze_.cell(state);
  const auto d = static_cast<Direction>(op);
  if (!maze_.is_open(c, d)) return std::nullopt;
  return static_cast<StateId>(maze_.index(step(c, d)));
}

bool MazeDomain::is_goal(StateId state) const { return maze_.cell(state) == maze_.goal; }

double MazeDomain::heuristic(StateId state) const {
  const double d0 = manhattan(maze_.start, maze_.goal);
  if (d0 == 0.0) return 1.0;
  const double d = manhattan(maze_.cell(state), maze_.goal);
  return std::clamp(1.0 - d / d0, 0.0, 1.0);
}

Evaluation MazeDomain::evaluate(std::span<const OpId> atomic_ops) const {
  const ExecutionResult r = execute_trajectory(maze_, atomic_ops);
  Evaluation e;
  e.fitness = fitness(maze_, r, constants_);
  e.success = r.success;
  if (r.success) {
    e.path_efficiency = r.steps_used == 0 ? 1.0 : static_cast<double>(shortest_) / r.steps_used;
  }
  e.path.reserve(r.visited.size());
  for (Cell c : r.visited) e.path.push_back(static_cast<StateId>(maze_.index(c)));
  return e;
}

}  // namespace ace
